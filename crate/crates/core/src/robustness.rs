//! Contamination machinery and robustness diagnostics: gross-error mixtures,
//! alpha-influence curves, influence functions, breakdown scans and
//! contaminated-posterior stability. Everything here is deterministic.

use crate::disparity::{mde, DisparityKind};
use crate::dposterior::{build_dposterior, DPosterior1D, Prior1D, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::families::OffspringFamily;

/// Gross-error model `(1-alpha) p(theta0) + alpha eta_L`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContaminationModel {
    pub theta0: f64,
    pub alpha: f64,
    pub point: u64,
}

/// Dense pmf of the mixture over `0..=max(support_hint, L)`. The model part
/// is renormalized over the window so the mixture sums to one exactly.
pub fn contaminate<F: OffspringFamily + ?Sized>(
    family: &F,
    theta0: f64,
    alpha: f64,
    point: u64,
) -> Result<Vec<f64>> {
    family.validate_theta(theta0)?;
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} must lie in [0,1)")));
    }
    let top = family.support_hint(theta0).max(point);
    let mut p: Vec<f64> = (0..=top).map(|k| family.pmf(theta0, k)).collect();
    let mass: f64 = p.iter().sum();
    for x in p.iter_mut() {
        *x *= (1.0 - alpha) / mass;
    }
    p[point as usize] += alpha;
    Ok(p)
}

/// Which functional a scan displaces.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EstimatorTag {
    Edap,
    Mdap,
    Mde,
}

impl EstimatorTag {
    pub fn name(self) -> &'static str {
        match self {
            EstimatorTag::Edap => "edap",
            EstimatorTag::Mdap => "mdap",
            EstimatorTag::Mde => "mde",
        }
    }
}

fn estimate<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    tag: EstimatorTag,
    q: &[f64],
    family: &F,
    delta: u64,
    prior: &Prior1D,
) -> Result<f64> {
    match tag {
        EstimatorTag::Mde => Ok(mde(kind, q, family)?.theta_hat),
        EstimatorTag::Edap => {
            Ok(build_dposterior(kind, q, family, delta, prior, DEFAULT_GRID)?.edap())
        }
        EstimatorTag::Mdap => {
            let post = build_dposterior(kind, q, family, delta, prior, DEFAULT_GRID)?;
            Ok(post.mdap_with(kind, q, family, prior).theta)
        }
    }
}

#[derive(Clone, Debug)]
pub struct InfluencePoint {
    pub point: u64,
    /// `alpha^{-1} [estimate(contaminated) - estimate(clean)]`.
    pub value: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug)]
pub struct InfluenceCurve {
    pub alpha: f64,
    pub estimator: EstimatorTag,
    pub delta_used: u64,
    pub points: Vec<InfluencePoint>,
}

impl InfluenceCurve {
    pub fn abs_max(&self) -> Option<(u64, f64)> {
        self.points
            .iter()
            .filter_map(|p| p.value.map(|v| (p.point, v.abs())))
            .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
    }

    pub fn value_at(&self, point: u64) -> Option<f64> {
        self.points.iter().find(|p| p.point == point).and_then(|p| p.value)
    }
}

/// The alpha-influence curve of an estimator at the model `p(theta0)`,
/// evaluated over the exact mixture pmfs. Per-point estimator failures are
/// recorded and the rest of the curve is still returned.
#[allow(clippy::too_many_arguments)]
pub fn alpha_influence<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    tag: EstimatorTag,
    family: &F,
    theta0: f64,
    alpha: f64,
    points: &[u64],
    delta: u64,
    prior: &Prior1D,
) -> Result<InfluenceCurve> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} must lie in (0,1)")));
    }
    if tag != EstimatorTag::Mde && delta == 0 {
        return Err(Error::Domain(
            "EDAP/MDAP influence needs delta >= 1 (delta enters their definition)".into(),
        ));
    }
    let clean = contaminate(family, theta0, 0.0, 0)?;
    let base = estimate(kind, tag, &clean, family, delta, prior)?;
    let mut curve = Vec::with_capacity(points.len());
    for &l in points {
        match contaminate(family, theta0, alpha, l)
            .and_then(|q| estimate(kind, tag, &q, family, delta, prior))
        {
            Ok(v) => curve.push(InfluencePoint {
                point: l,
                value: Some((v - base) / alpha),
                error: None,
            }),
            Err(e) => curve.push(InfluencePoint {
                point: l,
                value: None,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(InfluenceCurve {
        alpha,
        estimator: tag,
        delta_used: delta,
        points: curve,
    })
}

/// Convergence record of the one-sided alpha -> 0 limit.
#[derive(Clone, Copy, Debug)]
pub struct InfluenceDiagnostics {
    pub alphas: [f64; 3],
    pub quotients: [f64; 3],
    pub spread: f64,
    pub converged: bool,
}

const IF_ALPHAS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Influence function of the EDAP functional at `p(theta0)`: forward
/// difference quotients at alpha in {1e-2, 1e-3, 1e-4} and a linear
/// extrapolation of the last two to alpha = 0. A spread of the last two
/// quotients above 10% of the extrapolated magnitude is flagged; the value
/// is reported either way.
pub fn influence_function<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    family: &F,
    theta0: f64,
    point: u64,
    delta: u64,
    prior: &Prior1D,
) -> Result<(f64, InfluenceDiagnostics)> {
    let clean = contaminate(family, theta0, 0.0, 0)?;
    let base = estimate(kind, EstimatorTag::Edap, &clean, family, delta, prior)?;
    let mut quotients = [0.0f64; 3];
    for (i, &a) in IF_ALPHAS.iter().enumerate() {
        let q = contaminate(family, theta0, a, point)?;
        let v = estimate(kind, EstimatorTag::Edap, &q, family, delta, prior)?;
        quotients[i] = (v - base) / a;
    }
    let (a2, a3) = (IF_ALPHAS[1], IF_ALPHAS[2]);
    let value = (quotients[2] * a2 - quotients[1] * a3) / (a2 - a3);
    let spread = (quotients[2] - quotients[1]).abs();
    let converged = spread <= 0.1 * value.abs().max(1e-12);
    Ok((
        value,
        InfluenceDiagnostics {
            alphas: IF_ALPHAS,
            quotients,
            spread,
            converged,
        },
    ))
}

#[derive(Clone, Copy, Debug)]
pub struct BreakdownPoint {
    pub alpha: f64,
    /// Finite-scan proxy of `b(alpha)`: worst displacement over L.
    pub displacement: f64,
    pub worst_point: u64,
}

/// Worst-case displacement scan `b(alpha) = max_L |T((1-a)p + a eta_L) - T(p)|`
/// over `L in 0..=l_max`, per contamination weight.
#[allow(clippy::too_many_arguments)]
pub fn breakdown_scan<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    tag: EstimatorTag,
    family: &F,
    theta0: f64,
    alphas: &[f64],
    l_max: u64,
    delta: u64,
    prior: &Prior1D,
) -> Result<Vec<BreakdownPoint>> {
    let clean = contaminate(family, theta0, 0.0, 0)?;
    let base = estimate(kind, tag, &clean, family, delta, prior)?;
    let mut out = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::Domain(format!("alpha {alpha} must lie in (0,1)")));
        }
        let mut worst = (0u64, f64::NEG_INFINITY);
        for l in 0..=l_max {
            let q = contaminate(family, theta0, alpha, l)?;
            let v = estimate(kind, tag, &q, family, delta, prior)?;
            let disp = (v - base).abs();
            if disp > worst.1 {
                worst = (l, disp);
            }
        }
        out.push(BreakdownPoint {
            alpha,
            displacement: worst.1,
            worst_point: worst.0,
        });
    }
    Ok(out)
}

/// ell-1 distances between the D-posterior at the contaminated mixture and
/// the D-posterior at the sub-probability reference `(1-alpha) p(theta0)`,
/// per contamination point.
pub fn contaminated_posterior_stability<F: OffspringFamily + ?Sized>(
    kind: DisparityKind,
    family: &F,
    theta0: f64,
    alpha: f64,
    points: &[u64],
    delta: u64,
    prior: &Prior1D,
) -> Result<Vec<(u64, f64)>> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::Domain(format!("alpha {alpha} must lie in [0,1)")));
    }
    let clean = contaminate(family, theta0, 0.0, 0)?;
    let reference_q: Vec<f64> = clean.iter().map(|p| (1.0 - alpha) * p).collect();
    let reference: DPosterior1D =
        build_dposterior(kind, &reference_q, family, delta, prior, DEFAULT_GRID)?;
    let mut out = Vec::with_capacity(points.len());
    for &l in points {
        let q = contaminate(family, theta0, alpha, l)?;
        let post = build_dposterior(kind, &q, family, delta, prior, DEFAULT_GRID)?;
        out.push((l, reference.l1_distance(&post)));
    }
    Ok(out)
}
