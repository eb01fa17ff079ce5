//! Scratch harness for planted-rule hyperparameter probing (not shipped).
use flarecast_core::catalog::FlareClass;
use flarecast_core::models::{train, predict_proba, LstmModelConfig, DlstmModelConfig, ModelConfig};
use flarecast_core::neuralnet::{OptimizerKind, TrainConfig};
use flarecast_core::windows::{Window, WindowSet, WindowMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn planted(n: usize, frac: f64, w: usize, seed: u64) -> WindowSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base = flarecast_core::catalog::parse_time("2015-01-01T00:00:00Z").unwrap();
    let period = ((1.0 / frac).round() as usize).max(1);
    let windows = (0..n).map(|i| {
        let large = i % period == 0;
        let mut features: Vec<f64> = (0..w).map(|_| rng.gen_range(0.0..0.75)).collect();
        if large {
            let pos = rng.gen_range(0..w);
            features[pos] = rng.gen_range(0.85..1.0);
        }
        let max = features.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Window {
            features,
            class: if max > 0.8 { FlareClass::M } else { FlareClass::B },
            anchor_index: i + w,
            anchor_time: base + chrono::Duration::hours(i as i64),
            min_flux: 1e-7, max_flux: 1e-6,
        }
    }).collect();
    WindowSet { windows, w, d: 1, mode: WindowMode::Regular, provenance: "planted".into() }
}

fn accuracy(m: &flarecast_core::models::TrainedModel, set: &WindowSet) -> f64 {
    let correct = set.windows.iter().filter(|w| {
        (predict_proba(m, w, set.w).unwrap() >= 0.5) == w.is_large()
    }).count();
    correct as f64 / set.len() as f64
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let w: usize = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(8);
    let hidden: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(8);
    let lr: f64 = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let epochs: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(30);
    let batch: usize = args.get(5).and_then(|s| s.parse().ok()).unwrap_or(32);
    let arch = args.get(6).map(|s| s.as_str()).unwrap_or("lstm");

    let set = planted(400, 0.5, w, 3);
    for seed in [11u64, 12, 13] {
        let tc = TrainConfig { epochs, batch_size: batch, learning_rate: lr, optimizer: OptimizerKind::Adam, seed };
        let config = if arch == "lstm" {
            ModelConfig::Lstm(LstmModelConfig { input_size: 1, hidden_sizes: vec![hidden] })
        } else {
            {
                let k2: usize = std::env::args().nth(7).and_then(|s| s.parse().ok()).unwrap_or(3);
                ModelConfig::Dlstm(DlstmModelConfig { input_size: 1, kernel: 3, second_kernel: k2, front_width: (hidden/2).max(2), lstm_hidden: hidden, dense_hidden: (hidden/2).max(2) })
            }
        };
        let start = std::time::Instant::now();
        let trained = train(&config, &set, &tc).unwrap();
        println!("{arch} w={w} h={hidden} lr={lr} ep={epochs} b={batch} seed={seed}: acc={:.4} loss0={:.4} lossN={:.4} ({:?})",
            accuracy(&trained, &set), trained.history[0], trained.history.last().unwrap(), start.elapsed());
    }
}
