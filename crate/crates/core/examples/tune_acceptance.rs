//! Scratch probe of the imbalanced learnability setup (not shipped).
use flarecast_core::catalog::FlareClass;
use flarecast_core::models::{run_experiment, ExperimentConfig, ExperimentMode};
use flarecast_core::neuralnet::{OptimizerKind, TrainConfig};
use flarecast_core::windows::{ResampleConfig, Window, WindowSet, WindowMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn imbalanced(n: usize, large_every: usize, w: usize, seed: u64) -> WindowSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = flarecast_core::catalog::parse_time("2015-01-01T00:00:00Z").unwrap();
    let windows = (0..n).map(|i| {
        let large = i % large_every == 0;
        let mut features: Vec<f64> = (0..w).map(|_| rng.gen_range(0.0..0.6)).collect();
        if large { let p = rng.gen_range(0..w); features[p] = rng.gen_range(0.9..1.0); }
        let max = features.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Window {
            features,
            class: if max > 0.8 { FlareClass::M } else { FlareClass::B },
            anchor_index: i + w,
            anchor_time: base + chrono::Duration::hours(i as i64),
            min_flux: 1e-7, max_flux: 1e-6,
        }
    }).collect();
    WindowSet { windows, w, d: 1, mode: WindowMode::Regular, provenance: "imbalanced".into() }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let hidden: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let lr: f64 = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(0.02);
    let epochs: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(10);
    let batch: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(128);
    let seed: u64 = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(1);

    let set = imbalanced(10_000, 50, 24, 900);
    let only: Option<String> = args.get(6).cloned();
    for mode in [ExperimentMode::LstmRegular, ExperimentMode::DlstmRegular] {
        if let Some(o) = &only { if mode.name() != o.as_str() { continue; } }
        for r in [12u32, 0] {
            let mut cfg = ExperimentConfig::new(mode);
            cfg.resample = ResampleConfig::new(r);
            cfg.seeds = vec![seed];
            cfg.train = TrainConfig { epochs, batch_size: batch, learning_rate: lr, optimizer: OptimizerKind::Adam, seed };
            cfg.lstm.hidden_sizes = vec![hidden];
            cfg.dlstm.kernel = 3;
            cfg.dlstm.second_kernel = 1;
            cfg.dlstm.front_width = 4;
            cfg.dlstm.lstm_hidden = hidden;
            cfg.dlstm.dense_hidden = 4;
            let start = std::time::Instant::now();
            let outcome = run_experiment(&set, &cfg).unwrap();
            let m = &outcome.report.metrics;
            println!("{} R={r}: TSS={:?} recall_large={:?} auc={:?} ({:?})",
                mode.name(), m.tss.mean().map(|v| (v*1000.0).round()/1000.0),
                m.recall_large.mean().map(|v| (v*1000.0).round()/1000.0),
                m.auc.mean().map(|v| (v*1000.0).round()/1000.0),
                start.elapsed());
        }
    }
}
