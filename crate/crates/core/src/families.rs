//! Parametric offspring families: pmf, derivative in theta, parameter space
//! and moment maps.

use crate::error::{Error, Result};

/// Parameter spaces are clipped away from their topological boundary so that
/// priors with endpoint singularities stay finite on the quadrature grid.
pub const THETA_CLIP: f64 = 1e-6;

/// A one-parameter offspring law on the nonnegative integers.
pub trait OffspringFamily {
    /// Closed (clipped) parameter interval.
    fn theta_bounds(&self) -> (f64, f64);

    fn pmf(&self, theta: f64, k: u64) -> f64;

    /// Analytic d/dtheta of the pmf, where available.
    fn pmf_dtheta(&self, _theta: f64, _k: u64) -> Option<f64> {
        None
    }

    /// Largest k worth enumerating: tail mass beyond it is below 1e-14.
    fn support_hint(&self, theta: f64) -> u64;

    fn mean(&self, theta: f64) -> f64;

    fn variance(&self, theta: f64) -> f64;

    /// Analytic (first, second) theta-derivatives of KL(q, theta), expressed
    /// through the total mass and first weighted moment of q. Available only
    /// when the family admits a closed form.
    fn kl_theta_derivs(&self, _q_mass: f64, _q_weighted: f64, _theta: f64) -> Option<(f64, f64)> {
        None
    }

    fn contains(&self, theta: f64) -> bool {
        let (lo, hi) = self.theta_bounds();
        theta >= lo && theta <= hi
    }

    fn validate_theta(&self, theta: f64) -> Result<()> {
        if self.contains(theta) {
            Ok(())
        } else {
            let (lo, hi) = self.theta_bounds();
            Err(Error::Domain(format!(
                "theta {theta} outside parameter space [{lo}, {hi}]"
            )))
        }
    }
}

/// Geometric offspring law `p_k = theta * (1-theta)^k`, k >= 0, with
/// mean (1-theta)/theta and variance (1-theta)/theta^2.
#[derive(Clone, Copy, Debug, Default)]
pub struct Geometric;

pub fn geometric_family() -> Geometric {
    Geometric
}

impl OffspringFamily for Geometric {
    fn theta_bounds(&self) -> (f64, f64) {
        (THETA_CLIP, 1.0 - THETA_CLIP)
    }

    fn pmf(&self, theta: f64, k: u64) -> f64 {
        theta * (1.0 - theta).powi(k as i32)
    }

    fn pmf_dtheta(&self, theta: f64, k: u64) -> Option<f64> {
        // d/dtheta [theta (1-theta)^k] = (1-theta)^(k-1) ((1-theta) - k theta)
        let k = k as f64;
        Some(if k == 0.0 {
            1.0
        } else {
            (1.0 - theta).powf(k - 1.0) * (1.0 - theta - k * theta)
        })
    }

    fn support_hint(&self, theta: f64) -> u64 {
        // smallest K with (1-theta)^(K+1) < 1e-14
        let lt = (1.0 - theta).ln();
        if lt >= 0.0 {
            return 0;
        }
        let k = (1e-14f64.ln() / lt).ceil() - 1.0;
        k.max(0.0) as u64
    }

    fn mean(&self, theta: f64) -> f64 {
        (1.0 - theta) / theta
    }

    fn variance(&self, theta: f64) -> f64 {
        (1.0 - theta) / (theta * theta)
    }

    fn kl_theta_derivs(&self, q_mass: f64, q_weighted: f64, theta: f64) -> Option<(f64, f64)> {
        // KL(q, theta) = C(q) - q_mass ln(theta) - q_weighted ln(1-theta)
        let om = 1.0 - theta;
        Some((
            -q_mass / theta + q_weighted / om,
            q_mass / (theta * theta) + q_weighted / (om * om),
        ))
    }
}

/// A fixed finite pmf over `0..probs.len()`, indifferent to theta. Used as a
/// degenerate family by robustness probes.
#[derive(Clone, Debug)]
pub struct TablePmf {
    probs: Vec<f64>,
}

impl TablePmf {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|&p| !p.is_finite() || p < 0.0) {
            return Err(Error::Domain("table pmf needs nonnegative finite entries".into()));
        }
        let total: f64 = probs.iter().sum();
        if total <= 0.0 {
            return Err(Error::Domain("table pmf has no mass".into()));
        }
        Ok(TablePmf {
            probs: probs.iter().map(|p| p / total).collect(),
        })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl OffspringFamily for TablePmf {
    fn theta_bounds(&self) -> (f64, f64) {
        (THETA_CLIP, 1.0 - THETA_CLIP)
    }

    fn pmf(&self, _theta: f64, k: u64) -> f64 {
        self.probs.get(k as usize).copied().unwrap_or(0.0)
    }

    fn pmf_dtheta(&self, _theta: f64, _k: u64) -> Option<f64> {
        Some(0.0)
    }

    fn support_hint(&self, _theta: f64) -> u64 {
        (self.probs.len() - 1) as u64
    }

    fn mean(&self, _theta: f64) -> f64 {
        self.probs.iter().enumerate().map(|(k, p)| k as f64 * p).sum()
    }

    fn variance(&self, theta: f64) -> f64 {
        let m = self.mean(theta);
        self.probs
            .iter()
            .enumerate()
            .map(|(k, p)| (k as f64 - m).powi(2) * p)
            .sum()
    }
}

pub fn mean_of<F: OffspringFamily + ?Sized>(family: &F, theta: f64) -> Result<f64> {
    family.validate_theta(theta)?;
    Ok(family.mean(theta))
}

pub fn variance_of<F: OffspringFamily + ?Sized>(family: &F, theta: f64) -> Result<f64> {
    family.validate_theta(theta)?;
    Ok(family.variance(theta))
}

/// A point of the 2-simplex: `(q0, q1)` with the third coordinate implied.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimplexParam {
    pub q0: f64,
    pub q1: f64,
}

impl SimplexParam {
    pub fn new(q0: f64, q1: f64) -> Result<Self> {
        if !(q0 >= 0.0 && q1 >= 0.0 && q0 + q1 <= 1.0) {
            return Err(Error::Domain(format!(
                "({q0}, {q1}) violates the simplex constraints"
            )));
        }
        Ok(SimplexParam { q0, q1 })
    }

    pub fn q2(&self) -> f64 {
        1.0 - self.q0 - self.q1
    }

    pub fn as_probs(&self) -> [f64; 3] {
        [self.q0, self.q1, self.q2()]
    }
}

/// The three-outcome offspring law of the two-type model: category 0 is death,
/// category 1 a split into two type-1 cells, category 2 differentiation into
/// one type-2 cell, with probabilities `(q0, q1, 1-q0-q1)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Trinomial;

pub fn trinomial_family() -> Trinomial {
    Trinomial
}

impl Trinomial {
    pub fn pmf(&self, p: SimplexParam, category: usize) -> f64 {
        match category {
            0 => p.q0,
            1 => p.q1,
            2 => p.q2(),
            _ => 0.0,
        }
    }

    /// Inset of the simplex kept away from its edges for posterior grids.
    pub fn inset(&self) -> f64 {
        THETA_CLIP
    }
}

/// Mean number of type-1 offspring per type-1 progenitor: a split produces
/// two, the other outcomes none, so m = 2*q1.
pub fn offspring_mean_twotype(q1: f64) -> f64 {
    2.0 * q1
}
