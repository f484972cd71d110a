//! ERM learners for the two realizable tasks, together with ground-truth
//! generation, uniform sampling, and exact generalization loss.

mod conjunction;
mod threshold;

pub use conjunction::{
    conjunction_loss_enumerate, conjunction_loss_exact, label_conjunction, learn_conjunction,
    random_conjunction_target, sample_conjunction_example, BooleanExample, ConjunctionHypothesis,
    ConjunctionLearner, LiteralState,
};
pub use threshold::{
    learn_threshold, random_threshold_target, sample_threshold_point, threshold_loss_exact,
    LabeledPoint, ThresholdHypothesis, ThresholdLearner,
};

/// Largest `n` for which [`conjunction_loss_enumerate`] walks all `2^n`
/// assignments.
pub const MAX_ENUMERATE_VARS: usize = 20;
