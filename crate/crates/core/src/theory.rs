//! Theoretical lower-bound distributions of ERM generalization loss.
//!
//! For a realizable problem with sample size `m`, the loss `eps` of an ERM
//! hypothesis is bounded in distribution by
//!
//! ```text
//! F_m(eps) = 0                          eps < w / m
//!          = 1 - exp(w - m * eps)       w / m <= eps < 1
//!          = 1                          eps >= 1
//! ```
//!
//! where the log-weight `w` is `ln |H|` for a finite hypothesis class and
//! `d * ln(e * m / d)` (the Sauer-lemma surrogate) for a class of VC
//! dimension `d`. The CDF is the sum of a continuous part with density
//! `m * exp(w - m * eps)` on `[w / m, 1)` and an atom of weight
//! `min(1, exp(w - m))` at `eps = 1`.
//!
//! All weights are carried in log space so that `|H| = 3^n` never overflows.

use crate::error::{Error, Result};

/// Tolerance on the total mass of a [`DiscreteDistribution`].
pub const MASS_TOLERANCE: f64 = 1e-9;

/// Iteration cap for [`sample_complexity_vc`].
pub const MAX_FIXED_POINT_ITERATIONS: usize = 10_000;

/// Natural logarithm of a hypothesis-class cardinality.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct LogCardinality(f64);

impl LogCardinality {
    pub fn from_ln(ln_size: f64) -> Result<Self> {
        if !ln_size.is_finite() || ln_size < 0.0 {
            return Err(Error::InvalidBound(format!(
                "ln|H| must be finite and >= 0, got {ln_size}"
            )));
        }
        Ok(Self(ln_size))
    }

    pub fn from_count(size: f64) -> Result<Self> {
        if !size.is_finite() || size < 1.0 {
            return Err(Error::InvalidBound(format!("|H| must be >= 1, got {size}")));
        }
        Self::from_ln(size.ln())
    }

    /// `|H| = 3^n`: each variable appears positive, negated, or not at all.
    pub fn conjunctions(n: u32) -> Self {
        Self(f64::from(n) * 3f64.ln())
    }

    pub fn ln(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundKind {
    FiniteH(LogCardinality),
    FiniteVc { dim: u32 },
}

/// Parameters of one theoretical bound: the class description plus the
/// sample size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundSpec {
    kind: BoundKind,
    m: u64,
}

impl BoundSpec {
    pub fn new(kind: BoundKind, m: u64) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidBound("sample size m must be >= 1".into()));
        }
        if let BoundKind::FiniteVc { dim: 0 } = kind {
            return Err(Error::InvalidBound("VC dimension must be >= 1".into()));
        }
        Ok(Self { kind, m })
    }

    pub fn finite_h(h_size: LogCardinality, m: u64) -> Result<Self> {
        Self::new(BoundKind::FiniteH(h_size), m)
    }

    pub fn finite_vc(dim: u32, m: u64) -> Result<Self> {
        Self::new(BoundKind::FiniteVc { dim }, m)
    }

    pub fn kind(&self) -> BoundKind {
        self.kind
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    /// Same class, different sample size.
    pub fn with_m(&self, m: u64) -> Result<Self> {
        Self::new(self.kind, m)
    }

    /// `ln |H|`, or `d * ln(e * m / d)` for the VC case.
    pub fn log_weight(&self) -> f64 {
        match self.kind {
            BoundKind::FiniteH(h) => h.ln(),
            BoundKind::FiniteVc { dim } => vc_log_weight(dim, self.m as f64),
        }
    }

    /// Smallest `eps` at which the CDF leaves zero.
    pub fn cutoff(&self) -> f64 {
        self.log_weight() / self.m as f64
    }

    pub fn cdf(&self, eps: f64) -> f64 {
        if eps.is_nan() {
            return f64::NAN;
        }
        let w = self.log_weight();
        let m = self.m as f64;
        if eps >= 1.0 {
            1.0
        } else if eps < w / m {
            0.0
        } else {
            (1.0 - (w - m * eps).exp()).clamp(0.0, 1.0)
        }
    }

    /// Weight of the atom at `eps = 1`.
    pub fn point_mass(&self) -> f64 {
        (self.log_weight() - self.m as f64).exp().clamp(0.0, 1.0)
    }

    /// Density of the continuous part. The atom at `eps = 1` has no finite
    /// density and is rejected.
    pub fn density(&self, eps: f64) -> Result<f64> {
        if eps == 1.0 {
            return Err(Error::DensityAtAtom);
        }
        let w = self.log_weight();
        let m = self.m as f64;
        if eps < w / m || eps > 1.0 {
            Ok(0.0)
        } else {
            Ok(m * (w - m * eps).exp())
        }
    }

    /// `Q_m`: probability mass of each of `num_slots` equal-width loss
    /// intervals. The last slot is closed at 1 and so carries the atom.
    pub fn discretize(&self, num_slots: usize) -> Result<DiscreteDistribution> {
        if num_slots < 2 {
            return Err(Error::InvalidDistribution(format!(
                "need at least 2 slots, got {num_slots}"
            )));
        }
        // CDF mass below 0 (possible for the VC surrogate when m < d / e)
        // is folded into slot 0, hence the first lower edge contributes 0.
        let mut lower = 0.0;
        let masses = (0..num_slots)
            .map(|i| {
                let upper = self.cdf(slot_edge(i + 1, num_slots));
                let mass = upper - lower;
                lower = upper;
                mass
            })
            .collect();
        DiscreteDistribution::new(masses)
    }
}

fn vc_log_weight(dim: u32, m: f64) -> f64 {
    let d = f64::from(dim);
    d * (1.0 + m.ln() - d.ln())
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfUnitInterval { name, value })
    }
}

/// `ln(|H| / delta) / eps` before rounding up.
pub fn sample_complexity_finite_unrounded(
    h_size: LogCardinality,
    eps: f64,
    delta: f64,
) -> Result<f64> {
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    Ok((h_size.ln() - delta.ln()) / eps)
}

/// `ceil(ln(|H| / delta) / eps)`.
pub fn sample_complexity_finite(h_size: LogCardinality, eps: f64, delta: f64) -> Result<u64> {
    Ok(sample_complexity_finite_unrounded(h_size, eps, delta)?.ceil() as u64)
}

/// Smallest `m >= d` with `m >= ln((e m / d)^d / delta) / eps`.
///
/// `m` appears on both sides, so the bound is resolved by iterating
/// `m <- ceil(ln((e m / d)^d / delta) / eps)` from `m = d`. The right-hand
/// side is increasing in `m` and exceeds `d` at `m = d`, so the iterates
/// climb monotonically to the least fixed point.
pub fn sample_complexity_vc(dim: u32, eps: f64, delta: f64) -> Result<u64> {
    check_unit("eps", eps)?;
    check_unit("delta", delta)?;
    if dim == 0 {
        return Err(Error::InvalidBound("VC dimension must be >= 1".into()));
    }
    let ln_delta = delta.ln();
    let mut m = u64::from(dim);
    for _ in 0..MAX_FIXED_POINT_ITERATIONS {
        let next = ((vc_log_weight(dim, m as f64) - ln_delta) / eps).ceil();
        if !next.is_finite() || next >= u64::MAX as f64 {
            break;
        }
        let next = (next as u64).max(1);
        if next == m {
            return Ok(m);
        }
        m = next;
    }
    Err(Error::NoConvergence(MAX_FIXED_POINT_ITERATIONS))
}

/// Edge `i` of `num_slots` equal-width slots on `[0, 1]`.
pub fn slot_edge(i: usize, num_slots: usize) -> f64 {
    if i >= num_slots {
        1.0
    } else {
        i as f64 / num_slots as f64
    }
}

/// Probability masses over `num_slots` equal-width slots of `[0, 1]`.
///
/// Slot `i` covers `[i / l, (i + 1) / l)`; the last slot is closed at 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDistribution {
    masses: Vec<f64>,
}

impl DiscreteDistribution {
    pub fn new(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidDistribution("no slots".into()));
        }
        if let Some((i, m)) = masses
            .iter()
            .enumerate()
            .find(|(_, m)| !m.is_finite() || **m < 0.0)
        {
            return Err(Error::InvalidDistribution(format!(
                "slot {i} has invalid mass {m}"
            )));
        }
        let total: f64 = masses.iter().sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "masses sum to {total}, expected 1"
            )));
        }
        Ok(Self { masses })
    }

    pub fn num_slots(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn slot_bounds(&self, i: usize) -> (f64, f64) {
        let l = self.num_slots();
        (slot_edge(i, l), slot_edge(i + 1, l))
    }

    pub fn slot_midpoint(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.num_slots() as f64
    }

    /// Cumulative masses; entry `i` is the mass of slots `0..=i`.
    pub fn prefix_sums(&self) -> Vec<f64> {
        self.masses
            .iter()
            .scan(0.0, |acc, m| {
                *acc += m;
                Some(*acc)
            })
            .collect()
    }
}

/// Index of the slot containing `x`, consistent with [`slot_edge`] so that a
/// value equal to an edge lands in the slot that edge opens.
pub fn slot_index(x: f64, num_slots: usize) -> usize {
    let last = num_slots - 1;
    let mut i = ((x * num_slots as f64).floor().max(0.0) as usize).min(last);
    while i > 0 && x < slot_edge(i, num_slots) {
        i -= 1;
    }
    while i < last && x >= slot_edge(i + 1, num_slots) {
        i += 1;
    }
    i
}
