use rand::Rng;

use crate::error::{Error, Result};

/// `h_a(x) = 1` iff `x < a`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct ThresholdHypothesis {
    a: f64,
}

impl ThresholdHypothesis {
    pub fn new(a: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&a) {
            Ok(Self { a })
        } else {
            Err(Error::InvalidConfig(format!("threshold {a} outside [0, 1]")))
        }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn label(&self, x: f64) -> bool {
        x < self.a
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LabeledPoint {
    pub x: f64,
    pub label: bool,
}

pub fn random_threshold_target<R: Rng + ?Sized>(rng: &mut R) -> ThresholdHypothesis {
    ThresholdHypothesis { a: rng.random::<f64>() }
}

pub fn sample_threshold_point<R: Rng + ?Sized>(
    target: &ThresholdHypothesis,
    rng: &mut R,
) -> LabeledPoint {
    let x = rng.random::<f64>();
    LabeledPoint { x, label: target.label(x) }
}

/// Tracks the smallest negatively labelled `x` seen so far.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdLearner {
    min_negative: f64,
}

impl Default for ThresholdLearner {
    fn default() -> Self {
        // no negative seen yet: fall back to the top of the support
        Self { min_negative: 1.0 }
    }
}

impl ThresholdLearner {
    pub fn observe(&mut self, point: LabeledPoint) {
        if !point.label && point.x < self.min_negative {
            self.min_negative = point.x;
        }
    }

    pub fn hypothesis(&self) -> ThresholdHypothesis {
        ThresholdHypothesis { a: self.min_negative }
    }
}

/// `a_hat = min { x : label(x) = 0 }`, or 1 when there is no negative point.
pub fn learn_threshold(points: &[LabeledPoint]) -> ThresholdHypothesis {
    let mut learner = ThresholdLearner::default();
    points.iter().for_each(|&p| learner.observe(p));
    learner.hypothesis()
}

/// Length of the disagreement interval under the uniform distribution.
pub fn threshold_loss_exact(target: &ThresholdHypothesis, learned: &ThresholdHypothesis) -> f64 {
    (learned.a - target.a).abs()
}
