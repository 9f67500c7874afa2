//! Controlled branching process simulation and reduction to sufficient
//! statistics.
//!
//! A tree records, per generation `l`, the size `z`, the number of
//! progenitors `phi`, and the counts `Z_l(k)` of progenitors with exactly
//! `k` offspring. Every estimator in this crate consumes only the
//! aggregates `Y(k)`, `Delta` and `Y`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::families::OffspringFamily;
use crate::rng::SplitMix64;

/// Distribution of the control function `phi(z)` given the current size `z`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ControlLaw {
    /// `phi(z) ~ Poisson(lambda * z)`: random emigration/immigration balance.
    Poisson { lambda: f64 },
    /// `phi(z) ~ Binomial(z, gamma)`: each individual independently reproduces.
    Binomial { gamma: f64 },
    /// `phi(z) = z`: the Galton-Watson case.
    Identity,
}

impl ControlLaw {
    pub fn validate(&self) -> Result<()> {
        match self {
            ControlLaw::Poisson { lambda } if !(lambda.is_finite() && *lambda >= 0.0) => Err(
                Error::Domain(format!("Poisson control rate {lambda} must be nonnegative")),
            ),
            ControlLaw::Binomial { gamma } if !(0.0..=1.0).contains(gamma) => Err(Error::Domain(
                format!("binomial control probability {gamma} must lie in [0,1]"),
            )),
            _ => Ok(()),
        }
    }

    fn sample(&self, z: u64, rng: &mut SplitMix64) -> u64 {
        match self {
            ControlLaw::Poisson { lambda } => rng.poisson(lambda * z as f64),
            ControlLaw::Binomial { gamma } => rng.binomial(z, *gamma),
            ControlLaw::Identity => z,
        }
    }

    /// Criticality index `tau_m = tau * m` where `tau = lim E[phi(k)]/k`.
    pub fn criticality_index(&self, offspring_mean: f64) -> f64 {
        match self {
            ControlLaw::Poisson { lambda } => lambda * offspring_mean,
            ControlLaw::Binomial { gamma } => gamma * offspring_mean,
            ControlLaw::Identity => offspring_mean,
        }
    }
}

/// Point contamination applied per progenitor: with probability `alpha` the
/// offspring count is `point` instead of a draw from the family, realizing
/// the mixture `(1-alpha) p(theta) + alpha eta_point` draw by draw.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contamination {
    pub alpha: f64,
    pub point: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationRecord {
    /// Population size entering this generation.
    pub z: u64,
    /// Number of progenitors drawn by the control law.
    pub phi: u64,
    /// Map k -> number of progenitors with exactly k offspring.
    pub counts: BTreeMap<u64, u64>,
}

/// An observed family tree: `generations[l]` describes transition `l`, and
/// `final_z` is the size after the last recorded transition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyTree {
    pub z0: u64,
    pub final_z: u64,
    pub extinct: bool,
    pub generations: Vec<GenerationRecord>,
}

impl FamilyTree {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Data(format!("invalid tree JSON: {e}")))
    }

    /// Keep only the first `n` transitions (used by checkpointed harnesses).
    pub fn truncated(&self, n: usize) -> FamilyTree {
        if n >= self.generations.len() {
            return self.clone();
        }
        let generations: Vec<_> = self.generations[..n].to_vec();
        let final_z = generations
            .last()
            .map(|g| g.counts.iter().map(|(k, c)| k * c).sum())
            .unwrap_or(self.z0);
        FamilyTree {
            z0: self.z0,
            final_z,
            extinct: final_z == 0,
            generations,
        }
    }
}

/// Aggregates of a tree with `generations = n` transitions: `y_of_k[k]` is
/// `Y_{n-1}(k)`, `delta` is `Delta_{n-1}` and `y_total` is `Y_n`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SufficientStats {
    pub y_of_k: BTreeMap<u64, u64>,
    pub delta: u64,
    pub y_total: u64,
    pub z0: u64,
    pub generations: u64,
}

impl SufficientStats {
    pub fn max_offspring(&self) -> u64 {
        self.y_of_k.keys().next_back().copied().unwrap_or(0)
    }

    /// Total children ever produced, `sum_k k * Y(k) = Y_n - Z_0`.
    pub fn total_children(&self) -> u64 {
        self.y_of_k.iter().map(|(k, y)| k * y).sum()
    }
}

pub fn simulate_cbp<F: OffspringFamily + ?Sized>(
    family: &F,
    theta: f64,
    control: ControlLaw,
    z0: u64,
    n_generations: u64,
    seed: u64,
    contamination: Option<Contamination>,
) -> Result<FamilyTree> {
    family.validate_theta(theta)?;
    control.validate()?;
    if z0 == 0 {
        return Err(Error::Domain("z0 must be at least 1".into()));
    }
    if let Some(c) = contamination {
        if !(0.0..1.0).contains(&c.alpha) {
            return Err(Error::Domain(format!(
                "contamination weight {} must lie in [0,1)",
                c.alpha
            )));
        }
    }

    let mut rng = SplitMix64::new(seed);
    // Inversion cap: beyond twice the support hint the residual mass is far
    // below 1e-14 per draw.
    let cap = family.support_hint(theta).saturating_mul(2).max(64);

    let mut generations = Vec::new();
    let mut z = z0;
    let mut extinct = false;
    for _ in 0..n_generations {
        let phi = control.sample(z, &mut rng);
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        let mut next: u64 = 0;
        for _ in 0..phi {
            let k = match contamination {
                Some(c) if rng.bernoulli(c.alpha) => c.point,
                _ => rng.from_pmf(|k| family.pmf(theta, k), cap),
            };
            *counts.entry(k).or_insert(0) += 1;
            next = next
                .checked_add(k)
                .ok_or_else(|| Error::Data("population total overflowed u64".into()))?;
        }
        generations.push(GenerationRecord { z, phi, counts });
        z = next;
        if z == 0 {
            extinct = true;
            break;
        }
    }

    Ok(FamilyTree {
        z0,
        final_z: z,
        extinct,
        generations,
    })
}

pub fn accumulate_stats(tree: &FamilyTree) -> Result<SufficientStats> {
    let mut y_of_k: BTreeMap<u64, u64> = BTreeMap::new();
    let mut delta: u64 = 0;
    let mut y_total: u64 = 0;

    if let Some(first) = tree.generations.first() {
        if first.z != tree.z0 {
            return Err(Error::Data(format!(
                "generation 0 records size {} but z0 is {}",
                first.z, tree.z0
            )));
        }
    }
    for (l, gen) in tree.generations.iter().enumerate() {
        let progenitors: u64 = gen.counts.values().sum();
        if progenitors != gen.phi {
            return Err(Error::Data(format!(
                "generation {l}: offspring counts cover {progenitors} progenitors, phi is {}",
                gen.phi
            )));
        }
        let children: u64 = gen.counts.iter().map(|(k, c)| k * c).sum();
        let next = tree
            .generations
            .get(l + 1)
            .map(|g| g.z)
            .unwrap_or(tree.final_z);
        if children != next {
            return Err(Error::Data(format!(
                "generation {l}: counts produce {children} children but generation {} has {next}",
                l + 1
            )));
        }
        for (&k, &c) in &gen.counts {
            *y_of_k.entry(k).or_insert(0) += c;
        }
        delta += gen.phi;
        y_total += gen.z;
    }
    y_total += if tree.generations.is_empty() {
        tree.z0
    } else {
        tree.final_z
    };

    Ok(SufficientStats {
        y_of_k,
        delta,
        y_total,
        z0: tree.z0,
        generations: tree.generations.len() as u64,
    })
}

/// Nonparametric MLE of the offspring distribution, `p_k = Y(k) / Delta`,
/// returned dense over `0..=max_offspring`.
pub fn empirical_offspring(stats: &SufficientStats) -> Result<Vec<f64>> {
    if stats.delta == 0 {
        return Err(Error::Estimation("no progenitors observed".into()));
    }
    let mut pmf = vec![0.0; stats.max_offspring() as usize + 1];
    for (&k, &y) in &stats.y_of_k {
        pmf[k as usize] = y as f64 / stats.delta as f64;
    }
    Ok(pmf)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{geometric_family, TablePmf};

    #[test]
    fn zero_generations_yields_empty_tree() {
        let tree =
            simulate_cbp(&geometric_family(), 0.3, ControlLaw::Identity, 5, 0, 1, None).unwrap();
        assert_eq!(tree.generations.len(), 0);
        assert_eq!(tree.z0, 5);
        assert_eq!(tree.final_z, 5);
        assert!(!tree.extinct);
        let stats = accumulate_stats(&tree).unwrap();
        assert_eq!(stats.delta, 0);
        assert_eq!(stats.y_total, 5);
        assert!(empirical_offspring(&stats).is_err());
    }

    #[test]
    fn degenerate_doubling_population() {
        // point mass at 2 offspring, identity control: z_l = 3 * 2^l
        let fam = TablePmf::new(vec![0.0, 0.0, 1.0]).unwrap();
        let tree = simulate_cbp(&fam, 0.5, ControlLaw::Identity, 3, 10, 7, None).unwrap();
        for (l, gen) in tree.generations.iter().enumerate() {
            assert_eq!(gen.z, 3 << l);
            assert_eq!(gen.phi, gen.z);
        }
        assert_eq!(tree.final_z, 3 << 10);
    }

    #[test]
    fn zero_control_goes_extinct_in_one_step() {
        let tree = simulate_cbp(
            &geometric_family(),
            0.3,
            ControlLaw::Binomial { gamma: 0.0 },
            1,
            45,
            3,
            None,
        )
        .unwrap();
        assert!(tree.extinct);
        assert_eq!(tree.generations.len(), 1);
        assert_eq!(tree.final_z, 0);
        assert_eq!(tree.generations[0].phi, 0);
    }

    #[test]
    fn same_seed_same_tree() {
        let mk = || {
            simulate_cbp(
                &geometric_family(),
                0.3,
                ControlLaw::Poisson { lambda: 0.3 },
                1,
                45,
                0xDEADBEEF,
                Some(Contamination { alpha: 0.15, point: 11 }),
            )
            .unwrap()
        };
        assert_eq!(mk(), mk());
    }

    #[test]
    fn identity_control_is_galton_watson() {
        let tree =
            simulate_cbp(&geometric_family(), 0.45, ControlLaw::Identity, 3, 25, 11, None).unwrap();
        for gen in &tree.generations {
            assert_eq!(gen.phi, gen.z);
        }
    }

    #[test]
    fn invariants_hold_on_random_trees() {
        let fam = geometric_family();
        for seed in 0..1000u64 {
            let tree = simulate_cbp(
                &fam,
                0.3,
                ControlLaw::Poisson { lambda: 0.5 },
                2,
                12,
                seed,
                Some(Contamination { alpha: 0.1, point: 7 }),
            )
            .unwrap();
            for (l, gen) in tree.generations.iter().enumerate() {
                let phi: u64 = gen.counts.values().sum();
                assert_eq!(phi, gen.phi, "seed {seed} generation {l}");
                let children: u64 = gen.counts.iter().map(|(k, c)| k * c).sum();
                let next = tree.generations.get(l + 1).map(|g| g.z).unwrap_or(tree.final_z);
                assert_eq!(children, next, "seed {seed} generation {l}");
            }
            // accumulate_stats re-validates and must agree
            let stats = accumulate_stats(&tree).unwrap();
            assert_eq!(stats.total_children(), stats.y_total - stats.z0);
            let y_sum: u64 = stats.y_of_k.values().sum();
            assert_eq!(y_sum, stats.delta);
        }
    }

    #[test]
    fn empirical_offspring_is_a_pmf() {
        let tree = simulate_cbp(
            &geometric_family(),
            0.3,
            ControlLaw::Poisson { lambda: 0.5 },
            3,
            20,
            99,
            None,
        )
        .unwrap();
        let stats = accumulate_stats(&tree).unwrap();
        let pmf = empirical_offspring(&stats).unwrap();
        assert!(pmf.iter().all(|&p| p >= 0.0));
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_generation_aggregation() {
        let mut counts = BTreeMap::new();
        counts.insert(0u64, 2u64);
        counts.insert(3u64, 1u64);
        let tree = FamilyTree {
            z0: 5,
            final_z: 3,
            extinct: false,
            generations: vec![GenerationRecord { z: 5, phi: 3, counts }],
        };
        let stats = accumulate_stats(&tree).unwrap();
        assert_eq!(stats.delta, 3);
        assert_eq!(stats.y_of_k[&0], 2);
        assert_eq!(stats.y_of_k[&3], 1);
        assert_eq!(stats.y_total, 5 + 3);
    }

    #[test]
    fn corrupted_tree_names_the_generation() {
        let mut counts = BTreeMap::new();
        counts.insert(1u64, 2u64);
        let tree = FamilyTree {
            z0: 2,
            final_z: 9,
            extinct: false,
            generations: vec![GenerationRecord { z: 2, phi: 2, counts }],
        };
        let err = accumulate_stats(&tree).unwrap_err();
        assert!(err.to_string().contains("generation 0"), "{err}");
    }

    #[test]
    fn point_mass_stats_give_point_mass_pmf() {
        let mut y = BTreeMap::new();
        y.insert(1u64, 12u64);
        let stats = SufficientStats {
            y_of_k: y,
            delta: 12,
            y_total: 14,
            z0: 2,
            generations: 3,
        };
        let pmf = empirical_offspring(&stats).unwrap();
        assert_eq!(pmf, vec![0.0, 1.0]);
    }

    #[test]
    fn tree_json_round_trips() {
        let tree = simulate_cbp(
            &geometric_family(),
            0.3,
            ControlLaw::Poisson { lambda: 0.3 },
            1,
            30,
            5,
            Some(Contamination { alpha: 0.15, point: 11 }),
        )
        .unwrap();
        let back = FamilyTree::from_json(&tree.to_json()).unwrap();
        assert_eq!(tree, back);
    }

    #[test]
    fn controls_produce_no_progenitors_from_an_empty_population() {
        let mut rng = SplitMix64::new(8);
        for law in [
            ControlLaw::Poisson { lambda: 0.7 },
            ControlLaw::Binomial { gamma: 0.5 },
            ControlLaw::Identity,
        ] {
            for _ in 0..100 {
                assert_eq!(law.sample(0, &mut rng), 0, "{law:?}");
            }
        }
    }

    #[test]
    fn criticality_index_by_control_kind() {
        let m = geometric_family().mean(0.3);
        assert!((ControlLaw::Poisson { lambda: 0.3 }.criticality_index(m) - 0.7).abs() < 1e-12);
        assert!((ControlLaw::Identity.criticality_index(m) - m).abs() < 1e-15);
        assert!(
            (ControlLaw::Binomial { gamma: 0.9 }.criticality_index(m) - 0.9 * m).abs() < 1e-12
        );
    }
}
