//! Robust Bayesian estimation of the offspring law of controlled branching
//! processes via disparity-based posteriors.
//!
//! The posterior of the offspring parameter given a whole family tree factors
//! through the nonparametric offspring MLE and the total progenitor count:
//! replacing the Kullback-Leibler divergence in that factorization with a
//! robust disparity (squared Hellinger distance, negative exponential
//! disparity) yields the D-posterior, whose mean (EDAP) and mode (MDAP) are
//! efficient at the model and stable under gross-error contamination.
//!
//! Module map:
//! - [`families`]: parametric offspring laws (geometric, trinomial, tables)
//! - [`branching`]: simulation and sufficient statistics of the process
//! - [`disparity`]: G-functions, Pearson residuals, minimum disparity estimation
//! - [`dposterior`]: one-dimensional D-posteriors on a grid
//! - [`multitype`]: the two-type cell-kinetics model with importance-sampled
//!   simplex posteriors
//! - [`robustness`]: contamination mixtures, influence curves, breakdown scans
//! - [`fixtures`]: embedded datasets
//! - [`rng`]: deterministic splittable random streams

pub mod branching;
pub mod disparity;
pub mod dposterior;
pub mod error;
pub mod families;
pub mod fixtures;
pub mod multitype;
pub mod numeric;
pub mod rng;
pub mod robustness;

pub use branching::{
    accumulate_stats, empirical_offspring, simulate_cbp, Contamination, ControlLaw, FamilyTree,
    SufficientStats,
};
pub use disparity::{
    disparity, disparity_d2theta, disparity_dtheta, mde, pearson_residuals, DisparityKind, Mde,
};
pub use dposterior::{asymptotic_summary, build_dposterior, DPosterior1D, Prior1D};
pub use error::{Error, Result};
pub use families::{
    geometric_family, mean_of, offspring_mean_twotype, trinomial_family, Geometric,
    OffspringFamily, SimplexParam, TablePmf, Trinomial,
};
pub use multitype::{
    build_simplex_dposterior, criticality_prob, edap_simplex, hpd_region, mdap_simplex,
    mle_twotype, simulate_twotype, DirichletPrior, SimplexPosterior, TwoTypeStats,
};
pub use rng::SplitMix64;
pub use robustness::{
    alpha_influence, breakdown_scan, contaminate, contaminated_posterior_stability,
    influence_function, EstimatorTag,
};
