//! Disparity measures built from G-functions, Pearson residuals, derivatives
//! in theta, and the frequentist minimum disparity estimator.
//!
//! `q` arguments are dense nonnegative vectors indexed by offspring count.
//! Probability vectors are the normal case; sub-probability vectors (as
//! produced by contamination arithmetic) are accepted and handled by the
//! same formulas.

use crate::error::{Error, Result};
use crate::families::OffspringFamily;
use crate::numeric::golden_min;

pub const E_MINUS_2: f64 = std::f64::consts::E - 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DisparityKind {
    /// Kullback-Leibler divergence, G(d) = (d+1) ln(d+1) - d.
    Kl,
    /// Squared Hellinger distance, G(d) = 2 [(d+1)^(1/2) - 1]^2.
    Hd,
    /// Negative exponential disparity, G(d) = e^(-d) - 1 + d.
    Ned,
}

impl DisparityKind {
    pub const ALL: [DisparityKind; 3] = [DisparityKind::Kl, DisparityKind::Hd, DisparityKind::Ned];

    pub fn g(self, delta: f64) -> f64 {
        match self {
            DisparityKind::Kl => {
                if delta <= -1.0 {
                    1.0
                } else {
                    (delta + 1.0) * (delta + 1.0).ln() - delta
                }
            }
            DisparityKind::Hd => 2.0 * ((delta + 1.0).sqrt() - 1.0).powi(2),
            DisparityKind::Ned => (-delta).exp() - 1.0 + delta,
        }
    }

    pub fn g_prime(self, delta: f64) -> f64 {
        match self {
            DisparityKind::Kl => (delta + 1.0).ln(),
            DisparityKind::Hd => 2.0 * (1.0 - 1.0 / (delta + 1.0).sqrt()),
            DisparityKind::Ned => 1.0 - (-delta).exp(),
        }
    }

    /// Whether the disparity admits a bounded re-definition of its G-function
    /// (for NED, `e^(-d) - 1`) leaving every `D(q, .)` value unchanged.
    pub fn bounded_form_available(self) -> bool {
        matches!(self, DisparityKind::Ned)
    }

    pub fn name(self) -> &'static str {
        match self {
            DisparityKind::Kl => "kl",
            DisparityKind::Hd => "hd",
            DisparityKind::Ned => "ned",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "kl" => Ok(DisparityKind::Kl),
            "hd" => Ok(DisparityKind::Hd),
            "ned" => Ok(DisparityKind::Ned),
            other => Err(Error::Domain(format!("unknown disparity kind '{other}'"))),
        }
    }
}

/// Pearson residuals `q_k / p_k(theta) - 1` (zero where `p_k(theta) = 0`),
/// dense over `0..=max(supp(q), support_hint(theta))`.
#[derive(Clone, Debug)]
pub struct PearsonResidualField {
    pub residuals: Vec<f64>,
}

pub fn pearson_residuals<F: OffspringFamily + ?Sized>(
    q: &[f64],
    family: &F,
    theta: f64,
) -> PearsonResidualField {
    let top = (q.len() as u64).max(family.support_hint(theta) + 1);
    let residuals = (0..top)
        .map(|k| {
            let p = family.pmf(theta, k);
            if p > 0.0 {
                q.get(k as usize).copied().unwrap_or(0.0) / p - 1.0
            } else {
                0.0
            }
        })
        .collect();
    PearsonResidualField { residuals }
}

fn q_mass(q: &[f64]) -> f64 {
    q.iter().sum()
}

/// Largest index carrying q-mass; zero-padding never changes it.
fn last_support(q: &[f64]) -> usize {
    q.iter().rposition(|&x| x > 0.0).unwrap_or(0)
}

/// Evaluate `D(q, theta) = sum_k G(delta_k) p_k(theta)`.
///
/// KL is summed on the q side (`sum q ln(q/p)`), which is exact and returns
/// `+inf` when q carries mass outside the model support. HD uses the closed
/// form `2|q| + 2 - 4 sum sqrt(q_k p_k)`, whose terms vanish off supp(q), so
/// the infinite series is exact. The NED series is truncated two support
/// points past the largest observed offspring count.
pub fn disparity<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    q: &[f64],
    family: &F,
    theta: f64,
) -> f64 {
    match kind {
        DisparityKind::Kl => {
            let mut acc = 0.0;
            for (k, &qk) in q.iter().enumerate() {
                if qk > 0.0 {
                    let p = family.pmf(theta, k as u64);
                    if p <= 0.0 {
                        return f64::INFINITY;
                    }
                    acc += qk * (qk / p).ln();
                }
            }
            acc
        }
        DisparityKind::Hd => {
            let mut cross = 0.0;
            for (k, &qk) in q.iter().enumerate() {
                if qk > 0.0 {
                    cross += (qk * family.pmf(theta, k as u64)).sqrt();
                }
            }
            2.0 * q_mass(q) + 2.0 - 4.0 * cross
        }
        DisparityKind::Ned => {
            let top = last_support(q) + 2;
            let mut acc = 0.0;
            for k in 0..=top {
                let p = family.pmf(theta, k as u64);
                if p > 0.0 {
                    let qk = q.get(k).copied().unwrap_or(0.0);
                    let delta = qk / p - 1.0;
                    // (e^(-delta) - 1 + delta) * p, grouped so huge residuals
                    // cannot produce inf * 0
                    acc += (-delta).exp() * p - 2.0 * p + qk;
                }
            }
            acc
        }
    }
}

/// Reference evaluation as the literal G-sum over
/// `0..=max(supp(q), support_hint(theta))` plus the analytic tail
/// `G(-1) * (1 - sum p_k)`. Slower but convention-free; property tests pit
/// the production paths against it.
pub fn disparity_gsum<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    q: &[f64],
    family: &F,
    theta: f64,
) -> f64 {
    let top = (last_support(q) as u64).max(family.support_hint(theta));
    let mut acc = 0.0;
    let mut p_mass = 0.0;
    for k in 0..=top {
        let p = family.pmf(theta, k);
        p_mass += p;
        if p > 0.0 {
            let qk = q.get(k as usize).copied().unwrap_or(0.0);
            acc += kind.g(qk / p - 1.0) * p;
        }
    }
    acc + kind.g(-1.0) * (1.0 - p_mass).max(0.0)
}

/// NED through its bounded G-function `e^(-d) - 1`, with the same analytic
/// tail treatment as [`disparity_gsum`].
pub fn ned_bounded_gsum<F: OffspringFamily + ?Sized>(q: &[f64], family: &F, theta: f64) -> f64 {
    let top = (last_support(q) as u64).max(family.support_hint(theta));
    let mut acc = 0.0;
    let mut p_mass = 0.0;
    for k in 0..=top {
        let p = family.pmf(theta, k);
        p_mass += p;
        if p > 0.0 {
            let qk = q.get(k as usize).copied().unwrap_or(0.0);
            let delta = qk / p - 1.0;
            acc += (-delta).exp() * p - p;
        }
    }
    acc + (std::f64::consts::E - 1.0) * (1.0 - p_mass).max(0.0)
}

/// A finite-difference derivative plus a flag marking the degraded one-sided
/// fallback taken near the parameter-space boundary.
#[derive(Clone, Copy, Debug)]
pub struct ThetaDeriv {
    pub value: f64,
    pub one_sided: bool,
}

const H_FIRST: f64 = 1e-5;
const H_SECOND: f64 = 1e-4;

pub fn disparity_dtheta<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    q: &[f64],
    family: &F,
    theta: f64,
) -> ThetaDeriv {
    if kind == DisparityKind::Kl {
        let weighted: f64 = q.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
        if let Some((first, _)) = family.kl_theta_derivs(q_mass(q), weighted, theta) {
            return ThetaDeriv { value: first, one_sided: false };
        }
    }
    let (lo, hi) = family.theta_bounds();
    let d = |t: f64| disparity(kind, q, family, t);
    if theta - H_FIRST >= lo && theta + H_FIRST <= hi {
        ThetaDeriv {
            value: (d(theta + H_FIRST) - d(theta - H_FIRST)) / (2.0 * H_FIRST),
            one_sided: false,
        }
    } else if theta + 2.0 * H_FIRST <= hi {
        ThetaDeriv {
            value: (d(theta + H_FIRST) - d(theta)) / H_FIRST,
            one_sided: true,
        }
    } else {
        ThetaDeriv {
            value: (d(theta) - d(theta - H_FIRST)) / H_FIRST,
            one_sided: true,
        }
    }
}

pub fn disparity_d2theta<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    q: &[f64],
    family: &F,
    theta: f64,
) -> ThetaDeriv {
    if kind == DisparityKind::Kl {
        let weighted: f64 = q.iter().enumerate().map(|(k, &v)| k as f64 * v).sum();
        if let Some((_, second)) = family.kl_theta_derivs(q_mass(q), weighted, theta) {
            return ThetaDeriv { value: second, one_sided: false };
        }
    }
    let (lo, hi) = family.theta_bounds();
    let d = |t: f64| disparity(kind, q, family, t);
    if theta - H_SECOND >= lo && theta + H_SECOND <= hi {
        ThetaDeriv {
            value: (d(theta + H_SECOND) - 2.0 * d(theta) + d(theta - H_SECOND))
                / (H_SECOND * H_SECOND),
            one_sided: false,
        }
    } else if theta + 2.0 * H_SECOND <= hi {
        ThetaDeriv {
            value: (d(theta) - 2.0 * d(theta + H_SECOND) + d(theta + 2.0 * H_SECOND))
                / (H_SECOND * H_SECOND),
            one_sided: true,
        }
    } else {
        ThetaDeriv {
            value: (d(theta) - 2.0 * d(theta - H_SECOND) + d(theta - 2.0 * H_SECOND))
                / (H_SECOND * H_SECOND),
            one_sided: true,
        }
    }
}

/// Minimum disparity estimate with the curvature of the objective at it.
#[derive(Clone, Copy, Debug)]
pub struct Mde {
    pub theta_hat: f64,
    pub curvature: f64,
}

const MDE_GRID: usize = 1001;

/// Global grid scan (1001 points) followed by golden-section refinement of
/// the bracketing cell to an interval below 1e-9. Ties break toward smaller
/// theta.
pub fn mde<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    q: &[f64],
    family: &F,
) -> Result<Mde> {
    if q.iter().any(|&x| !x.is_finite() || x < 0.0) {
        return Err(Error::Domain("q must be a finite nonnegative vector".into()));
    }
    let (lo, hi) = family.theta_bounds();
    let step = (hi - lo) / (MDE_GRID - 1) as f64;
    let values: Vec<f64> = (0..MDE_GRID)
        .map(|i| disparity(kind, q, family, lo + i as f64 * step))
        .collect();

    let mut best = None;
    let mut finite_min = f64::INFINITY;
    let mut finite_max = f64::NEG_INFINITY;
    for (i, &v) in values.iter().enumerate() {
        if v.is_finite() {
            finite_min = finite_min.min(v);
            finite_max = finite_max.max(v);
            if best.map(|(_, b)| v < b).unwrap_or(true) {
                best = Some((i, v));
            }
        }
    }
    let (i, _) = best.ok_or_else(|| {
        Error::Degenerate("disparity is infinite over the whole parameter grid".into())
    })?;
    if finite_max - finite_min < 1e-14 {
        return Err(Error::Degenerate(
            "disparity objective is flat over the parameter grid".into(),
        ));
    }

    let a = if i == 0 { lo } else { lo + (i - 1) as f64 * step };
    let b = if i == MDE_GRID - 1 { hi } else { lo + (i + 1) as f64 * step };
    let theta_hat = golden_min(|t| disparity(kind, q, family, t), a, b, 1e-9);
    let curvature = disparity_d2theta(kind, q, family, theta_hat).value;
    Ok(Mde { theta_hat, curvature })
}
