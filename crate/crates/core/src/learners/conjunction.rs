use rand::Rng;

use super::MAX_ENUMERATE_VARS;
use crate::error::{Error, Result};

/// Which literals of one variable appear in a conjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LiteralState {
    /// `x_i`
    Positive,
    /// `not x_i`
    Negated,
    /// `x_i and not x_i`; unsatisfiable.
    Both,
    Absent,
}

impl LiteralState {
    const POS: u8 = 0b01;
    const NEG: u8 = 0b10;

    fn bits(self) -> u8 {
        match self {
            LiteralState::Positive => Self::POS,
            LiteralState::Negated => Self::NEG,
            LiteralState::Both => Self::POS | Self::NEG,
            LiteralState::Absent => 0,
        }
    }

    fn from_bits(bits: u8) -> Self {
        match bits & 0b11 {
            Self::POS => LiteralState::Positive,
            Self::NEG => LiteralState::Negated,
            0b11 => LiteralState::Both,
            _ => LiteralState::Absent,
        }
    }

    pub fn literal_count(self) -> u32 {
        self.bits().count_ones()
    }

    /// Whether the literals of this variable hold under `value`.
    pub fn satisfied_by(self, value: bool) -> bool {
        match self {
            LiteralState::Positive => value,
            LiteralState::Negated => !value,
            LiteralState::Both => false,
            LiteralState::Absent => true,
        }
    }
}

/// A conjunction of literals over `n` boolean variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ConjunctionHypothesis {
    states: Vec<LiteralState>,
}

impl ConjunctionHypothesis {
    pub fn from_states(states: Vec<LiteralState>) -> Self {
        Self { states }
    }

    /// The empty conjunction, true everywhere.
    pub fn empty(n: usize) -> Self {
        Self::from_states(vec![LiteralState::Absent; n])
    }

    /// `x_1 and not x_1 and ... and x_n and not x_n`, the learner's starting
    /// point.
    pub fn all_literals(n: usize) -> Self {
        Self::from_states(vec![LiteralState::Both; n])
    }

    pub fn n(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[LiteralState] {
        &self.states
    }

    pub fn literal_count(&self) -> u32 {
        self.states.iter().map(|s| s.literal_count()).sum()
    }

    pub fn is_contradictory(&self) -> bool {
        self.states.contains(&LiteralState::Both)
    }

    /// True iff every literal of `self` is also a literal of `other`.
    pub fn literals_subset_of(&self, other: &Self) -> bool {
        self.n() == other.n()
            && self
                .states
                .iter()
                .zip(&other.states)
                .all(|(a, b)| a.bits() & !b.bits() == 0)
    }

    fn satisfied_by(&self, bits: &[bool]) -> bool {
        self.states.iter().zip(bits).all(|(s, &b)| s.satisfied_by(b))
    }

    /// Probability that a uniform assignment satisfies the conjunction of the
    /// literals of `self` and `other`.
    fn joint_satisfaction_probability(&self, other: &Self) -> f64 {
        let mut literals = 0i32;
        for (a, b) in self.states.iter().zip(&other.states) {
            let union = a.bits() | b.bits();
            if union == LiteralState::POS | LiteralState::NEG {
                return 0.0;
            }
            literals += union.count_ones() as i32;
        }
        0.5f64.powi(literals)
    }

    /// `(positive mask, negated mask, contradictory)` for `n <= 64`.
    fn masks(&self) -> (u64, u64, bool) {
        let mut pos = 0u64;
        let mut neg = 0u64;
        for (i, s) in self.states.iter().enumerate() {
            let b = s.bits();
            if b & LiteralState::POS != 0 {
                pos |= 1 << i;
            }
            if b & LiteralState::NEG != 0 {
                neg |= 1 << i;
            }
        }
        (pos, neg, pos & neg != 0)
    }
}

/// One training instance: an assignment and whether the target accepts it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanExample {
    pub bits: Vec<bool>,
    pub positive: bool,
}

/// Draws each variable independently as positive, negated, or absent with
/// probability 1/3 each, i.e. uniformly over the `3^n` consistent
/// conjunctions.
pub fn random_conjunction_target<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ConjunctionHypothesis {
    let states = (0..n)
        .map(|_| match rng.random_range(0..3u8) {
            0 => LiteralState::Positive,
            1 => LiteralState::Negated,
            _ => LiteralState::Absent,
        })
        .collect();
    ConjunctionHypothesis::from_states(states)
}

pub fn label_conjunction(h: &ConjunctionHypothesis, bits: &[bool]) -> Result<bool> {
    if bits.len() != h.n() {
        return Err(Error::LengthMismatch { expected: h.n(), got: bits.len() });
    }
    Ok(h.satisfied_by(bits))
}

fn fill_uniform_bits<R: Rng + ?Sized>(bits: &mut [bool], rng: &mut R) {
    for chunk in bits.chunks_mut(64) {
        let word: u64 = rng.random();
        for (i, b) in chunk.iter_mut().enumerate() {
            *b = (word >> i) & 1 == 1;
        }
    }
}

/// Uniform assignment over `{0,1}^n`, labelled by `target`.
pub fn sample_conjunction_example<R: Rng + ?Sized>(
    target: &ConjunctionHypothesis,
    rng: &mut R,
) -> BooleanExample {
    let mut bits = vec![false; target.n()];
    fill_uniform_bits(&mut bits, rng);
    let positive = target.satisfied_by(&bits);
    BooleanExample { bits, positive }
}

/// Streaming form of [`learn_conjunction`].
#[derive(Debug, Clone)]
pub struct ConjunctionLearner {
    hypothesis: ConjunctionHypothesis,
    scratch: Vec<bool>,
}

impl ConjunctionLearner {
    pub fn new(n: usize) -> Self {
        Self {
            hypothesis: ConjunctionHypothesis::all_literals(n),
            scratch: vec![false; n],
        }
    }

    /// Rules out every literal falsified by a positive assignment. Negative
    /// assignments carry no usable information and are skipped.
    pub fn observe(&mut self, bits: &[bool], positive: bool) -> Result<()> {
        let n = self.hypothesis.n();
        if bits.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: bits.len() });
        }
        if positive {
            for (state, &b) in self.hypothesis.states.iter_mut().zip(bits) {
                let ruled_out = if b { LiteralState::NEG } else { LiteralState::POS };
                *state = LiteralState::from_bits(state.bits() & !ruled_out);
            }
        }
        Ok(())
    }

    /// Samples one example from `target` and learns from it without
    /// allocating.
    pub(crate) fn observe_sample<R: Rng + ?Sized>(
        &mut self,
        target: &ConjunctionHypothesis,
        rng: &mut R,
    ) {
        let mut bits = std::mem::take(&mut self.scratch);
        fill_uniform_bits(&mut bits, rng);
        let positive = target.satisfied_by(&bits);
        self.observe(&bits, positive).expect("scratch sized to n");
        self.scratch = bits;
    }

    pub fn hypothesis(&self) -> &ConjunctionHypothesis {
        &self.hypothesis
    }

    pub fn finish(self) -> ConjunctionHypothesis {
        self.hypothesis
    }
}

/// Positive-example elimination: start from all `2n` literals and drop each
/// literal contradicted by some positive example.
pub fn learn_conjunction(examples: &[BooleanExample], n: usize) -> Result<ConjunctionHypothesis> {
    let mut learner = ConjunctionLearner::new(n);
    for ex in examples {
        learner.observe(&ex.bits, ex.positive)?;
    }
    Ok(learner.finish())
}

/// Exact disagreement probability under the uniform distribution:
/// `P(T) + P(L) - 2 P(T and L)`.
pub fn conjunction_loss_exact(
    target: &ConjunctionHypothesis,
    learned: &ConjunctionHypothesis,
) -> Result<f64> {
    if target.n() != learned.n() {
        return Err(Error::LengthMismatch { expected: target.n(), got: learned.n() });
    }
    let p_target = target.joint_satisfaction_probability(target);
    let p_learned = learned.joint_satisfaction_probability(learned);
    let p_both = target.joint_satisfaction_probability(learned);
    Ok(p_target + p_learned - 2.0 * p_both)
}

/// Disagreement fraction over all `2^n` assignments.
pub fn conjunction_loss_enumerate(
    target: &ConjunctionHypothesis,
    learned: &ConjunctionHypothesis,
) -> Result<f64> {
    let n = target.n();
    if learned.n() != n {
        return Err(Error::LengthMismatch { expected: n, got: learned.n() });
    }
    if n > MAX_ENUMERATE_VARS {
        return Err(Error::TooManyVariables(n));
    }
    let sat = |(pos, neg, contradictory): (u64, u64, bool), x: u64| {
        !contradictory && x & pos == pos && x & neg == 0
    };
    let t = target.masks();
    let l = learned.masks();
    let disagreements = (0..1u64 << n).filter(|&x| sat(t, x) != sat(l, x)).count();
    Ok(disagreements as f64 / (1u64 << n) as f64)
}
