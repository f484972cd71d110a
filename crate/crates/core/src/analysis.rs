//! Comparison of empirical and theoretical loss distributions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::theory::DiscreteDistribution;

/// Substitute for zero theoretical mass so that `log2(p / q)` stays finite.
pub const KL_FLOOR: f64 = 2e-16;

/// Tolerance on prefix-sum comparisons in [`stochastic_dominance`].
pub const DOMINANCE_TOLERANCE: f64 = 1e-12;

fn check_slots(p: &DiscreteDistribution, q: &DiscreteDistribution) -> Result<()> {
    if p.num_slots() != q.num_slots() {
        return Err(Error::SlotMismatch(p.num_slots(), q.num_slots()));
    }
    Ok(())
}

/// `sum_i p_i * log2(p_i / q_i)` over slots with `p_i > 0`, where a zero
/// `q_i` is replaced by `floor`.
///
/// `q` is not renormalized after flooring, so a `p` concentrated where `q`
/// vanishes scores `log2(1 / floor)`, about 52 bits for the default floor.
pub fn kl_divergence(p: &DiscreteDistribution, q: &DiscreteDistribution, floor: f64) -> Result<f64> {
    check_slots(p, q)?;
    Ok(p.masses()
        .iter()
        .zip(q.masses())
        .filter(|(&pi, _)| pi > 0.0)
        .map(|(&pi, &qi)| pi * (pi / if qi > 0.0 { qi } else { floor }).log2())
        .sum())
}

/// Mean of the distribution with every slot represented by its midpoint.
/// Quantization error is at most half a slot width.
pub fn dist_mean(d: &DiscreteDistribution) -> f64 {
    d.masses()
        .iter()
        .enumerate()
        .map(|(i, m)| m * d.slot_midpoint(i))
        .sum()
}

pub fn dist_std(d: &DiscreteDistribution) -> f64 {
    let mean = dist_mean(d);
    d.masses()
        .iter()
        .enumerate()
        .map(|(i, m)| m * (d.slot_midpoint(i) - mean).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotonicityReport {
    /// `(i, rise)` for every step `i -> i + 1` that rose beyond tolerance.
    pub violations: Vec<(usize, f64)>,
    /// Largest increase over any step, tolerated or not; 0 if none.
    pub max_rise: f64,
    pub fraction_monotone_steps: f64,
}

/// Flags step `i` when `values[i + 1] > values[i] + tolerance`.
pub fn check_monotone(values: &[f64], tolerance: f64) -> Result<MonotonicityReport> {
    let taus = vec![tolerance; values.len().saturating_sub(1)];
    check_monotone_per_step(values, &taus)
}

/// Like [`check_monotone`], with a separate tolerance for each step.
pub fn check_monotone_per_step(values: &[f64], tolerances: &[f64]) -> Result<MonotonicityReport> {
    if values.len() < 2 {
        return Err(Error::Empty("monotonicity check needs at least two values"));
    }
    let steps = values.len() - 1;
    if tolerances.len() != steps {
        return Err(Error::InvalidConfig(format!(
            "{} tolerances for {steps} steps",
            tolerances.len()
        )));
    }
    if let Some(t) = tolerances.iter().find(|t| !(**t >= 0.0)) {
        return Err(Error::InvalidConfig(format!("tolerance {t} must be >= 0")));
    }
    let mut violations = Vec::new();
    let mut max_rise = 0.0f64;
    for (i, (w, tau)) in values.windows(2).zip(tolerances).enumerate() {
        let rise = w[1] - w[0];
        max_rise = max_rise.max(rise);
        if w[1] > w[0] + tau {
            violations.push((i, rise));
        }
    }
    let fraction_monotone_steps = 1.0 - violations.len() as f64 / steps as f64;
    Ok(MonotonicityReport { violations, max_rise, fraction_monotone_steps })
}

/// Two-standard-error tolerances `2 * max(std_i, std_{i+1}) / sqrt(k)` for
/// the steps of a curve of empirical means over `k` trials each.
pub fn standard_error_tolerances(stds: &[f64], trials: usize) -> Vec<f64> {
    let scale = 2.0 / (trials as f64).sqrt();
    stds.windows(2).map(|w| scale * w[0].max(w[1])).collect()
}

/// True iff `later` puts at least as much mass as `earlier` below every
/// slot edge, i.e. `later` is stochastically smaller.
pub fn stochastic_dominance(earlier: &DiscreteDistribution, later: &DiscreteDistribution) -> Result<bool> {
    check_slots(earlier, later)?;
    Ok(earlier
        .prefix_sums()
        .iter()
        .zip(later.prefix_sums())
        .all(|(e, l)| l >= e - DOMINANCE_TOLERANCE))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub m: u64,
    pub mean_p: f64,
    pub std_p: f64,
    pub mean_q: f64,
    pub std_q: f64,
    pub kl: f64,
}

/// One learning-curve point per `(m, P_m, Q_m)` record. Records must be
/// strictly increasing in `m` and share a slot count.
pub fn build_curve(
    records: &[(u64, DiscreteDistribution, DiscreteDistribution)],
) -> Result<Vec<CurvePoint>> {
    let Some((_, first, _)) = records.first() else {
        return Err(Error::Empty("curve records"));
    };
    let slots = first.num_slots();
    for pair in records.windows(2) {
        if pair[1].0 <= pair[0].0 {
            return Err(Error::UnsortedRecords { prev: pair[0].0, next: pair[1].0 });
        }
    }
    records
        .iter()
        .map(|(m, p, q)| {
            if p.num_slots() != slots {
                return Err(Error::SlotMismatch(slots, p.num_slots()));
            }
            Ok(CurvePoint {
                m: *m,
                mean_p: dist_mean(p),
                std_p: dist_std(p),
                mean_q: dist_mean(q),
                std_q: dist_std(q),
                kl: kl_divergence(p, q, KL_FLOOR)?,
            })
        })
        .collect()
}
