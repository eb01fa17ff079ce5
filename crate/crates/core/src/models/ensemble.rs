//! Bootstrap-aggregated ensembles: members train on resampled draws of the
//! training windows and their predicted probabilities are averaged.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::training::{predict_proba, train, TrainError, TrainedModel};
use super::ModelConfig;
use crate::neuralnet::{NetError, TrainConfig};
use crate::windows::{Window, WindowSet};

/// Ensemble shape and sampling parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnsembleConfig {
    /// Number of members.
    pub members: usize,
    /// Draw size as a fraction of the training set.
    pub bootstrap_fraction: f64,
    /// When false, every member trains on the full set (identity draw) and
    /// members differ only by their weight-initialization seed.
    pub resample: bool,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            members: 10,
            bootstrap_fraction: 1.0,
            resample: true,
        }
    }
}

/// Trained ensemble; prediction is the arithmetic mean of member probabilities.
pub struct TrainedEnsemble {
    pub members: Vec<TrainedModel>,
    pub seed: u64,
}

/// Derives the seed of member `index` from the ensemble seed (splitmix64).
pub fn member_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9e3779b97f4a7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn bootstrap_draw(set: &WindowSet, fraction: f64, rng: &mut ChaCha8Rng) -> WindowSet {
    let n = set.len();
    let draws = ((n as f64) * fraction).round().max(1.0) as usize;
    let windows = (0..draws).map(|_| set.windows[rng.gen_range(0..n)].clone()).collect();
    WindowSet {
        windows,
        w: set.w,
        d: set.d,
        mode: set.mode,
        provenance: set.provenance.clone(),
    }
}

/// Trains `members` models on bootstrap resamples (with replacement, seeded)
/// of the training set. `jobs > 1` trains members on that many threads; the
/// result is identical to the sequential run.
pub fn train_bagged(
    config: &ModelConfig,
    ec: &EnsembleConfig,
    train_set: &WindowSet,
    tc: &TrainConfig,
    jobs: usize,
) -> Result<TrainedEnsemble, TrainError> {
    if ec.members == 0 {
        return Err(TrainError::Net(NetError::InvalidConfig(
            "ensemble needs at least one member".into(),
        )));
    }
    let train_member = |index: usize| -> Result<TrainedModel, TrainError> {
        let seed = member_seed(tc.seed, index);
        let member_set = if ec.resample {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            bootstrap_draw(train_set, ec.bootstrap_fraction, &mut rng)
        } else {
            train_set.clone()
        };
        let member_tc = TrainConfig { seed, ..*tc };
        train(config, &member_set, &member_tc).map_err(|e| TrainError::Member {
            index,
            source: Box::new(e),
        })
    };

    let members: Vec<TrainedModel> = if jobs <= 1 || ec.members == 1 {
        let mut members = Vec::with_capacity(ec.members);
        for index in 0..ec.members {
            members.push(train_member(index)?);
        }
        members
    } else {
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<Result<TrainedModel, TrainError>>>> =
            Mutex::new((0..ec.members).map(|_| None).collect());
        std::thread::scope(|scope| {
            for _ in 0..jobs.min(ec.members) {
                scope.spawn(|| loop {
                    let index = next.fetch_add(1, Ordering::SeqCst);
                    if index >= ec.members {
                        break;
                    }
                    let result = train_member(index);
                    slots.lock().unwrap()[index] = Some(result);
                });
            }
        });
        slots
            .into_inner()
            .unwrap()
            .into_iter()
            .map(|slot| slot.expect("every member slot filled"))
            .collect::<Result<Vec<_>, _>>()?
    };

    Ok(TrainedEnsemble {
        members,
        seed: tc.seed,
    })
}

/// Mean member probability for one window.
pub fn ensemble_predict(
    ensemble: &TrainedEnsemble,
    window: &Window,
    w: usize,
) -> Result<f64, NetError> {
    let mut sum = 0.0;
    for member in &ensemble.members {
        sum += predict_proba(member, window, w)?;
    }
    Ok(sum / ensemble.members.len() as f64)
}
