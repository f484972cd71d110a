//! Repeated seeded trials producing the empirical loss distribution `P_m`.
//!
//! Every trial owns a ChaCha8 generator seeded from
//! `derive_seed(master_seed, stream, m, trial_index)`, where `derive_seed`
//! chains the SplitMix64 finalizer
//!
//! ```text
//! z = (z ^ (z >> 30)) * 0xBF58_476D_1CE4_E5B9
//! z = (z ^ (z >> 27)) * 0x94D0_49BB_1331_11EB
//! z =  z ^ (z >> 31)
//! ```
//!
//! over the master seed and each word (each offset by the golden-ratio
//! increment `0x9E37_79B9_7F4A_7C15`). Trial results therefore depend only on
//! their inputs, never on which thread ran them or in what order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::learners::{
    conjunction_loss_exact, random_conjunction_target, random_threshold_target,
    sample_threshold_point, threshold_loss_exact, ConjunctionHypothesis, ConjunctionLearner,
    ThresholdHypothesis, ThresholdLearner,
};
use crate::theory::{slot_index, DiscreteDistribution};

pub const SEED_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

const TRIAL_STREAM: u64 = 0;
const GROUND_TRUTH_STREAM: u64 = 1;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn derive_seed(master_seed: u64, words: &[u64]) -> u64 {
    words.iter().fold(mix64(master_seed.wrapping_add(SEED_GAMMA)), |h, &w| {
        mix64(h ^ w.wrapping_add(SEED_GAMMA))
    })
}

/// Seed of trial `index` at sample size `m`.
pub fn trial_seed(master_seed: u64, m: u64, index: u64) -> u64 {
    derive_seed(master_seed, &[TRIAL_STREAM, m, index])
}

/// Seed of the shared ground truth at sample size `m` in fixed-GT mode.
pub fn ground_truth_seed(master_seed: u64, m: u64) -> u64 {
    derive_seed(master_seed, &[GROUND_TRUTH_STREAM, m])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Task {
    Conjunction { n: usize },
    Threshold,
}

/// Whether every trial draws its own ground truth or all trials at one `m`
/// share a single one.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GtMode {
    #[default]
    PerTrial,
    Fixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatch {
    pub task: Task,
    pub m: u64,
    pub k: usize,
    pub master_seed: u64,
    pub gt_mode: GtMode,
    pub losses: Vec<f64>,
}

enum GroundTruth {
    Conjunction(ConjunctionHypothesis),
    Threshold(ThresholdHypothesis),
}

impl GroundTruth {
    fn draw(task: Task, rng: &mut ChaCha8Rng) -> Self {
        match task {
            Task::Conjunction { n } => Self::Conjunction(random_conjunction_target(n, rng)),
            Task::Threshold => Self::Threshold(random_threshold_target(rng)),
        }
    }

    /// Samples `m` labelled instances, learns, and returns the exact loss.
    fn train_and_score(&self, m: u64, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            GroundTruth::Conjunction(target) => {
                let mut learner = ConjunctionLearner::new(target.n());
                for _ in 0..m {
                    learner.observe_sample(target, rng);
                }
                conjunction_loss_exact(target, learner.hypothesis()).expect("same n")
            }
            GroundTruth::Threshold(target) => {
                let mut learner = ThresholdLearner::default();
                for _ in 0..m {
                    learner.observe(sample_threshold_point(target, rng));
                }
                threshold_loss_exact(target, &learner.hypothesis())
            }
        }
    }
}

/// Runs `k` independent trials with per-trial ground truth.
pub fn run_trials(task: Task, m: u64, k: usize, master_seed: u64) -> Result<TrialBatch> {
    run_trials_with(task, m, k, master_seed, GtMode::PerTrial)
}

pub fn run_trials_with(
    task: Task,
    m: u64,
    k: usize,
    master_seed: u64,
    gt_mode: GtMode,
) -> Result<TrialBatch> {
    if m == 0 || k == 0 {
        return Err(Error::InvalidConfig(format!("need m >= 1 and k >= 1, got m={m}, k={k}")));
    }
    if let Task::Conjunction { n: 0 } = task {
        return Err(Error::InvalidConfig("conjunction task needs n >= 1".into()));
    }
    let shared = match gt_mode {
        GtMode::Fixed => {
            let mut rng = ChaCha8Rng::seed_from_u64(ground_truth_seed(master_seed, m));
            Some(GroundTruth::draw(task, &mut rng))
        }
        GtMode::PerTrial => None,
    };
    let losses = (0..k as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(master_seed, m, i));
            match &shared {
                Some(gt) => gt.train_and_score(m, &mut rng),
                None => GroundTruth::draw(task, &mut rng).train_and_score(m, &mut rng),
            }
        })
        .collect();
    Ok(TrialBatch { task, m, k, master_seed, gt_mode, losses })
}

/// Relative frequencies of `losses` over `num_slots` equal-width slots;
/// a loss of exactly 1 falls in the last slot.
pub fn histogram(losses: &[f64], num_slots: usize) -> Result<DiscreteDistribution> {
    if losses.is_empty() {
        return Err(Error::Empty("loss list"));
    }
    if num_slots < 2 {
        return Err(Error::InvalidDistribution(format!("need at least 2 slots, got {num_slots}")));
    }
    let mut counts = vec![0u64; num_slots];
    for &loss in losses {
        if !(0.0..=1.0).contains(&loss) {
            return Err(Error::LossOutOfRange(loss));
        }
        counts[slot_index(loss, num_slots)] += 1;
    }
    let total = losses.len() as f64;
    DiscreteDistribution::new(counts.into_iter().map(|c| c as f64 / total).collect())
}

/// Arithmetic schedule `start, start + step, ..., <= max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MSchedule {
    pub start: u64,
    pub step: u64,
    pub max: u64,
}

impl MSchedule {
    pub fn values(&self) -> impl Iterator<Item = u64> {
        let Self { start, step, max } = *self;
        (0..)
            .map(move |i| start + i * step)
            .take_while(move |&m| m <= max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    /// VC dimension of the theoretical bound for the threshold task.
    pub vc_dim: u32,
    pub num_slots: usize,
    pub trials: usize,
    pub schedule: MSchedule,
    pub master_seed: u64,
    pub gt_mode: GtMode,
}

impl ExperimentConfig {
    /// 1000 trials, 100 slots; conjunctions over 10 variables at
    /// m = 25, 50, ..., 1250, thresholds at m = 20, 40, ..., 1000.
    pub fn defaults_for(task: Task) -> Self {
        let schedule = match task {
            Task::Conjunction { .. } => MSchedule { start: 25, step: 25, max: 1250 },
            Task::Threshold => MSchedule { start: 20, step: 20, max: 1000 },
        };
        Self {
            task,
            vc_dim: 1,
            num_slots: 100,
            trials: 1000,
            schedule,
            master_seed: 0,
            gt_mode: GtMode::PerTrial,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.num_slots < 2 {
            return bad(format!("slots must be >= 2, got {}", self.num_slots));
        }
        if self.trials == 0 {
            return bad("trials must be >= 1".into());
        }
        let MSchedule { start, step, max } = self.schedule;
        if start == 0 || step == 0 || max < start {
            return bad(format!("invalid m schedule start={start} step={step} max={max}"));
        }
        if let Task::Conjunction { n: 0 } = self.task {
            return bad("conjunction task needs n >= 1".into());
        }
        if self.vc_dim == 0 {
            return bad("vc_dim must be >= 1".into());
        }
        Ok(())
    }
}
