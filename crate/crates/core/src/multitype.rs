//! The two-type controlled branching process with binomial control: type-1
//! cells die, split into two type-1 cells, or differentiate into one type-2
//! cell; a Binomial(z1, gamma) control thins the type-1 progenitors.
//!
//! The D-posterior over the offspring simplex is approximated by
//! self-normalized importance sampling from the Dirichlet prior, matching
//! the likelihood's conjugate structure in the KL case.

use serde::{Deserialize, Serialize};

use crate::disparity::DisparityKind;
use crate::error::{Error, Result};
use crate::families::SimplexParam;
use crate::numeric::ln_gamma;
use crate::rng::SplitMix64;

/// Sufficient statistics of an observed two-type tree over `n` generations:
/// `y1_0` deaths, `y1_2` splits, `psi` differentiations, `delta` observed
/// progenitors and `y1_total` type-1 individuals.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoTypeStats {
    pub y1_0: u64,
    pub y1_2: u64,
    pub psi: u64,
    pub delta: u64,
    pub y1_total: u64,
    pub n: u64,
    pub z0: u64,
}

impl TwoTypeStats {
    pub fn validate(&self) -> Result<()> {
        if self.y1_0 + self.y1_2 + self.psi != self.delta {
            return Err(Error::Data(format!(
                "delta {} is not the sum of outcome counts {} + {} + {}",
                self.delta, self.y1_0, self.y1_2, self.psi
            )));
        }
        if self.delta > self.y1_total {
            return Err(Error::Data(format!(
                "progenitors {} exceed type-1 individuals {}",
                self.delta, self.y1_total
            )));
        }
        Ok(())
    }

    /// Empirical offspring law over (death, split, differentiate).
    pub fn phat(&self) -> Result<[f64; 3]> {
        if self.delta == 0 {
            return Err(Error::Estimation("no progenitors observed".into()));
        }
        let d = self.delta as f64;
        Ok([
            self.y1_0 as f64 / d,
            self.y1_2 as f64 / d,
            self.psi as f64 / d,
        ])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTypeGeneration {
    pub z1: u64,
    pub z2: u64,
    pub phi: u64,
    pub died: u64,
    pub split: u64,
    pub differentiated: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoTypeTree {
    pub z0: u64,
    pub generations: Vec<TwoTypeGeneration>,
    pub final_z1: u64,
    pub final_z2: u64,
    pub extinct: bool,
}

pub fn simulate_twotype(
    params: SimplexParam,
    gamma: f64,
    z0: u64,
    n: u64,
    seed: u64,
) -> Result<TwoTypeTree> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma {gamma} must lie in [0,1]")));
    }
    if z0 == 0 {
        return Err(Error::Domain("z0 must be at least 1".into()));
    }
    let mut rng = SplitMix64::new(seed);
    let mut z1 = z0;
    let mut z2 = 0u64;
    let mut generations = Vec::new();
    let mut extinct = false;
    for _ in 0..n {
        let phi = rng.binomial(z1, gamma);
        let (mut died, mut split, mut diff) = (0u64, 0u64, 0u64);
        for _ in 0..phi {
            let u = rng.next_f64();
            if u < params.q0 {
                died += 1;
            } else if u < params.q0 + params.q1 {
                split += 1;
            } else {
                diff += 1;
            }
        }
        generations.push(TwoTypeGeneration {
            z1,
            z2,
            phi,
            died,
            split,
            differentiated: diff,
        });
        z1 = 2 * split;
        z2 = diff;
        if z1 == 0 {
            extinct = true;
            break;
        }
    }
    Ok(TwoTypeTree {
        z0,
        generations,
        final_z1: z1,
        final_z2: z2,
        extinct,
    })
}

pub fn accumulate_twotype(tree: &TwoTypeTree) -> TwoTypeStats {
    let mut stats = TwoTypeStats {
        y1_0: 0,
        y1_2: 0,
        psi: 0,
        delta: 0,
        y1_total: 0,
        n: tree.generations.len() as u64,
        z0: tree.z0,
    };
    for g in &tree.generations {
        stats.y1_0 += g.died;
        stats.y1_2 += g.split;
        stats.psi += g.differentiated;
        stats.delta += g.phi;
        stats.y1_total += g.z1;
    }
    stats
}

/// Maximum likelihood estimates `(p0, p1, p2, gamma)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MleTwoType {
    pub p0: f64,
    pub p1: f64,
    pub p2: f64,
    pub gamma: f64,
}

pub fn mle_twotype(stats: &TwoTypeStats) -> Result<MleTwoType> {
    stats.validate()?;
    if stats.delta == 0 || stats.y1_total == 0 {
        return Err(Error::Estimation(
            "MLE needs at least one progenitor and one type-1 individual".into(),
        ));
    }
    let d = stats.delta as f64;
    Ok(MleTwoType {
        p0: stats.y1_0 as f64 / d,
        p1: stats.y1_2 as f64 / d,
        p2: stats.psi as f64 / d,
        gamma: d / stats.y1_total as f64,
    })
}

/// Dirichlet prior on the offspring simplex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirichletPrior {
    pub alpha: [f64; 3],
}

impl DirichletPrior {
    pub fn jeffreys() -> Self {
        DirichletPrior { alpha: [0.5, 0.5, 0.5] }
    }

    pub fn validate(&self) -> Result<()> {
        if self.alpha.iter().all(|&a| a > 0.0 && a.is_finite()) {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "Dirichlet parameters {:?} must be positive",
                self.alpha
            )))
        }
    }

    pub fn log_density(&self, q: [f64; 3]) -> f64 {
        let a = self.alpha;
        let ln_b = ln_gamma(a[0]) + ln_gamma(a[1]) + ln_gamma(a[2]) - ln_gamma(a[0] + a[1] + a[2]);
        (a[0] - 1.0) * q[0].ln() + (a[1] - 1.0) * q[1].ln() + (a[2] - 1.0) * q[2].ln() - ln_b
    }

    pub fn mean(&self) -> [f64; 3] {
        let s = self.alpha[0] + self.alpha[1] + self.alpha[2];
        [self.alpha[0] / s, self.alpha[1] / s, self.alpha[2] / s]
    }
}

/// Disparity between two laws on the three-outcome space.
pub fn disparity3(kind: DisparityKind, q: [f64; 3], p: [f64; 3]) -> f64 {
    match kind {
        DisparityKind::Kl => {
            let mut acc = 0.0;
            for i in 0..3 {
                if q[i] > 0.0 {
                    if p[i] <= 0.0 {
                        return f64::INFINITY;
                    }
                    acc += q[i] * (q[i] / p[i]).ln();
                }
            }
            acc
        }
        DisparityKind::Hd => {
            let mass: f64 = q.iter().sum();
            let cross: f64 = (0..3).map(|i| (q[i] * p[i]).sqrt()).sum();
            2.0 * mass + 2.0 - 4.0 * cross
        }
        DisparityKind::Ned => {
            let mut acc = 0.0;
            for i in 0..3 {
                if p[i] > 0.0 {
                    let d = q[i] / p[i] - 1.0;
                    acc += (-d).exp() * p[i] - 2.0 * p[i] + q[i];
                }
            }
            acc
        }
    }
}

pub const DEFAULT_DRAWS: usize = 200_000;
pub const ESS_FLOOR: f64 = 500.0;

/// Prior-importance-sampled D-posterior over the simplex: draws from the
/// Dirichlet prior weighted by `exp(-Delta * D(phat, q_i))`, stabilized by
/// max subtraction and self-normalized.
#[derive(Clone, Debug)]
pub struct SimplexPosterior {
    pub draws: Vec<[f64; 3]>,
    pub log_weights: Vec<f64>,
    /// Self-normalized weights (sum to one).
    pub weights: Vec<f64>,
    pub seed: u64,
    pub delta_used: u64,
    pub effective_sample_size: f64,
    pub ess_warning: bool,
}

pub fn build_simplex_dposterior(
    kind: DisparityKind,
    stats: &TwoTypeStats,
    prior: &DirichletPrior,
    n_draws: usize,
    seed: u64,
) -> Result<SimplexPosterior> {
    prior.validate()?;
    stats.validate()?;
    if n_draws < 10_000 {
        return Err(Error::Domain(format!(
            "importance sampling needs at least 10^4 draws, got {n_draws}"
        )));
    }
    // delta = 0 carries no data: every weight is one and the posterior is
    // the prior itself
    let phat = if stats.delta > 0 { stats.phat()? } else { [0.0; 3] };
    let delta = stats.delta as f64;
    let mut rng = SplitMix64::new(seed);
    let mut draws = Vec::with_capacity(n_draws);
    let mut log_weights = Vec::with_capacity(n_draws);
    let mut max_lw = f64::NEG_INFINITY;
    for _ in 0..n_draws {
        let q = rng.dirichlet3(prior.alpha);
        let lw = if stats.delta == 0 {
            0.0
        } else {
            -delta * disparity3(kind, phat, q)
        };
        max_lw = max_lw.max(lw);
        draws.push(q);
        log_weights.push(lw);
    }
    if !max_lw.is_finite() {
        return Err(Error::PosteriorUndefined(
            "every importance weight vanished".into(),
        ));
    }
    let mut weights: Vec<f64> = log_weights.iter().map(|&lw| (lw - max_lw).exp()).collect();
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
    let ess = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
    Ok(SimplexPosterior {
        draws,
        log_weights,
        weights,
        seed,
        delta_used: stats.delta,
        effective_sample_size: ess,
        ess_warning: ess < ESS_FLOOR,
    })
}

pub fn edap_simplex(post: &SimplexPosterior) -> [f64; 3] {
    let mut p0 = 0.0;
    let mut p1 = 0.0;
    for (q, w) in post.draws.iter().zip(&post.weights) {
        p0 += w * q[0];
        p1 += w * q[1];
    }
    [p0, p1, 1.0 - p0 - p1]
}

/// Monte Carlo standard errors of the EDAP coordinates, from the weighted
/// draw variance.
pub fn edap_simplex_se(post: &SimplexPosterior) -> [f64; 3] {
    let e = edap_simplex(post);
    let mut se = [0.0f64; 3];
    for (q, w) in post.draws.iter().zip(&post.weights) {
        let q2 = 1.0 - q[0] - q[1];
        se[0] += w * w * (q[0] - e[0]).powi(2);
        se[1] += w * w * (q[1] - e[1]).powi(2);
        se[2] += w * w * (q2 - e[2]).powi(2);
    }
    [se[0].sqrt(), se[1].sqrt(), se[2].sqrt()]
}

/// Posterior probability of a supercritical type-1 offspring law,
/// `P[m > 1] = P[2 q1 > 1]`.
pub fn criticality_prob(post: &SimplexPosterior) -> f64 {
    post.draws
        .iter()
        .zip(&post.weights)
        .filter(|(q, _)| 2.0 * q[1] > 1.0)
        .map(|(_, w)| w)
        .sum()
}

pub const SIMPLEX_GRID_STEP: f64 = 0.001;

#[derive(Clone, Copy, Debug)]
pub struct MdapSimplex {
    pub p: [f64; 3],
    pub multimodal: bool,
    /// The maximizer sits on the outermost grid ring (clipped simplex edge).
    pub boundary: bool,
}

/// MDAP by exhaustive search of the 0.001 simplex grid for the maximizer of
/// `-Delta D(phat, q) + log prior(q)`. No refinement: the grid is the
/// reporting resolution. Ties break toward lexicographically smaller
/// `(q0, q1)`.
pub fn mdap_simplex(
    kind: DisparityKind,
    stats: &TwoTypeStats,
    prior: &DirichletPrior,
) -> Result<MdapSimplex> {
    prior.validate()?;
    let phat = if stats.delta > 0 { stats.phat()? } else { [0.0; 3] };
    let delta = stats.delta as f64;
    let mut best = f64::NEG_INFINITY;
    let mut best_ij = (0usize, 0usize);
    let mut near_best = 0usize;
    for i in 1..=998usize {
        let q0 = i as f64 * SIMPLEX_GRID_STEP;
        for j in 1..=(999 - i) {
            let q1 = j as f64 * SIMPLEX_GRID_STEP;
            let q = [q0, q1, 1.0 - q0 - q1];
            let d = disparity3(kind, phat, q);
            if !d.is_finite() {
                continue;
            }
            let obj = -delta * d + prior.log_density(q);
            if obj > best {
                best = obj;
                best_ij = (i, j);
                near_best = 1;
            } else if best - obj <= 1e-12 {
                near_best += 1;
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::Degenerate(
            "simplex objective is infinite everywhere on the grid".into(),
        ));
    }
    let (i, j) = best_ij;
    let q0 = i as f64 * SIMPLEX_GRID_STEP;
    let q1 = j as f64 * SIMPLEX_GRID_STEP;
    Ok(MdapSimplex {
        p: [q0, q1, 1.0 - q0 - q1],
        multimodal: near_best >= 3,
        boundary: i == 1 || j == 1 || i + j == 999,
    })
}

/// Minimum disparity estimate over the simplex: 0.001 grid scan plus a
/// shrinking pattern search down to 1e-8 steps.
pub fn mde_simplex(kind: DisparityKind, q: [f64; 3]) -> Result<[f64; 3]> {
    let mut best = f64::INFINITY;
    let mut at = (0.0f64, 0.0f64);
    for i in 1..=998usize {
        let q0 = i as f64 * SIMPLEX_GRID_STEP;
        for j in 1..=(999 - i) {
            let q1 = j as f64 * SIMPLEX_GRID_STEP;
            let d = disparity3(kind, q, [q0, q1, 1.0 - q0 - q1]);
            if d < best {
                best = d;
                at = (q0, q1);
            }
        }
    }
    if !best.is_finite() {
        return Err(Error::Degenerate("disparity infinite over the simplex grid".into()));
    }
    let eps = 1e-9;
    let eval = |q0: f64, q1: f64| -> f64 {
        if q0 < eps || q1 < eps || q0 + q1 > 1.0 - eps {
            f64::INFINITY
        } else {
            disparity3(kind, q, [q0, q1, 1.0 - q0 - q1])
        }
    };
    let (mut q0, mut q1) = at;
    let mut step = SIMPLEX_GRID_STEP / 2.0;
    while step > 1e-8 {
        let mut improved = false;
        for (dx, dy) in [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)] {
            let v = eval(q0 + dx, q1 + dy);
            if v < best {
                best = v;
                q0 += dx;
                q1 += dy;
                improved = true;
            }
        }
        if !improved {
            step /= 2.0;
        }
    }
    Ok([q0, q1, 1.0 - q0 - q1])
}

/// A highest-posterior-density region on the 0.001 simplex grid, built by
/// water-filling the weighted draw histogram (no smoothing). `cells` holds
/// the retained `(i, j)` grid indices with their masses; `threshold` is the
/// density (mass / cell area) of the last retained cell.
#[derive(Clone, Debug)]
pub struct HpdRegion {
    pub level: f64,
    pub threshold: f64,
    pub cells: Vec<((u32, u32), f64)>,
    pub mass: f64,
    pub ess_warning: bool,
}

pub const SIMPLEX_CELL_AREA: f64 = SIMPLEX_GRID_STEP * SIMPLEX_GRID_STEP;

impl HpdRegion {
    pub fn contains(&self, i: u32, j: u32) -> bool {
        self.cells.iter().any(|&((a, b), _)| a == i && b == j)
    }
}

pub fn hpd_region(post: &SimplexPosterior, level: f64) -> Result<HpdRegion> {
    if !(0.0 < level && level < 1.0) {
        return Err(Error::Domain(format!("HPD level {level} must lie in (0,1)")));
    }
    use std::collections::HashMap;
    let mut hist: HashMap<(u32, u32), f64> = HashMap::new();
    for (q, w) in post.draws.iter().zip(&post.weights) {
        let i = (q[0] / SIMPLEX_GRID_STEP) as u32;
        let j = (q[1] / SIMPLEX_GRID_STEP) as u32;
        *hist.entry((i, j)).or_insert(0.0) += w;
    }
    let mut cells: Vec<((u32, u32), f64)> = hist.into_iter().collect();
    // mass-descending, index tie-break for a deterministic order
    cells.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then(a.0.cmp(&b.0)));
    let mut kept = Vec::new();
    let mut mass = 0.0;
    let mut threshold = 0.0;
    for (ij, m) in cells {
        kept.push((ij, m));
        mass += m;
        threshold = m / SIMPLEX_CELL_AREA;
        if mass >= level {
            break;
        }
    }
    Ok(HpdRegion {
        level,
        threshold,
        cells: kept,
        mass,
        ess_warning: post.ess_warning,
    })
}
