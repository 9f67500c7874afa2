//! Point-estimate reproduction on the embedded simulated trajectory and the
//! replication-harness trend properties.

use cbp_core::branching::{
    accumulate_stats, empirical_offspring, simulate_cbp, Contamination, ControlLaw,
};
use cbp_core::disparity::{mde, DisparityKind};
use cbp_core::dposterior::{build_dposterior, Prior1D, DEFAULT_GRID};
use cbp_core::families::{geometric_family, OffspringFamily};
use cbp_core::fixtures::sim_geo45_tree;
use cbp_core::rng::SplitMix64;

fn jeffreys() -> Prior1D {
    Prior1D::Beta { rho: 0.5, beta: 0.5 }
}

#[test]
fn embedded_trajectory_point_estimates() {
    let fam = geometric_family();
    let stats = accumulate_stats(&sim_geo45_tree()).unwrap();
    let q = empirical_offspring(&stats).unwrap();
    let prior = jeffreys();

    let hd = build_dposterior(DisparityKind::Hd, &q, &fam, stats.delta, &prior, DEFAULT_GRID)
        .unwrap();
    assert!((hd.edap() - 0.2962).abs() < 5e-4, "HD edap {}", hd.edap());
    let hd_mode = hd.mdap_with(DisparityKind::Hd, &q, &fam, &prior);
    assert!((hd_mode.theta - 0.2953).abs() < 5e-4, "HD mdap {}", hd_mode.theta);
    assert!(!hd_mode.multimodal);

    let ned = build_dposterior(DisparityKind::Ned, &q, &fam, stats.delta, &prior, DEFAULT_GRID)
        .unwrap();
    assert!((ned.edap() - 0.2953).abs() < 5e-4, "NED edap {}", ned.edap());
    let ned_mode = ned.mdap_with(DisparityKind::Ned, &q, &fam, &prior);
    assert!((ned_mode.theta - 0.2940).abs() < 5e-4, "NED mdap {}", ned_mode.theta);
}

#[test]
fn hd_posterior_on_the_fixture_is_unimodal_near_the_true_value() {
    let fam = geometric_family();
    let stats = accumulate_stats(&sim_geo45_tree()).unwrap();
    let q = empirical_offspring(&stats).unwrap();
    let post = build_dposterior(DisparityKind::Hd, &q, &fam, stats.delta, &jeffreys(), DEFAULT_GRID)
        .unwrap();
    let peak = post.density.iter().cloned().fold(0.0f64, f64::max);
    let mut maxima = 0;
    for i in 1..post.density.len() - 1 {
        if post.density[i] > post.density[i - 1]
            && post.density[i] >= post.density[i + 1]
            && post.density[i] > 1e-6 * peak
        {
            maxima += 1;
        }
    }
    assert_eq!(maxima, 1, "density must be unimodal");
    let mode = post.mdap_with(DisparityKind::Hd, &q, &fam, &jeffreys()).theta;
    assert!((mode - 0.295).abs() < 0.005, "mode {mode}");
}

/// Simulate the contaminated process of the simulated example until `want`
/// trajectories survive past the last checkpoint; returns the survivors and
/// the number of discarded (extinct) attempts.
fn surviving_trajectories(
    want: usize,
    n_generations: u64,
    seed: u64,
) -> (Vec<cbp_core::branching::FamilyTree>, usize) {
    let fam = geometric_family();
    let root = SplitMix64::new(seed);
    let mut kept = Vec::new();
    let mut discarded = 0usize;
    let mut stream = 0u64;
    while kept.len() < want {
        stream += 1;
        assert!(stream < 200 * want as u64, "survival rate collapsed");
        let tree = simulate_cbp(
            &fam,
            0.3,
            ControlLaw::Poisson { lambda: 0.3 },
            1,
            n_generations,
            root.split(stream).next_u64(),
            Some(Contamination { alpha: 0.15, point: 11 }),
        )
        .unwrap();
        if tree.extinct {
            discarded += 1;
        } else {
            kept.push(tree);
        }
    }
    (kept, discarded)
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs[xs.len() / 2]
}

#[test]
fn empirical_pmf_l1_error_is_nonincreasing_in_the_median() {
    // the generating law is the contaminated mixture; the l1 distance to the
    // clean geometric settles toward ||mix - p(0.3)||_1 from above
    let fam = geometric_family();
    let (trees, discarded) = surviving_trajectories(200, 45, 0xC0FFEE);
    assert!(discarded > 0, "the contaminated process does go extinct sometimes");
    let mut medians = Vec::new();
    for &n in &[15usize, 30, 45] {
        let mut errs = Vec::new();
        for tree in &trees {
            let stats = accumulate_stats(&tree.truncated(n)).unwrap();
            if stats.delta == 0 {
                continue;
            }
            let q = empirical_offspring(&stats).unwrap();
            let l1: f64 = (0..q.len())
                .map(|k| (q[k] - fam.pmf(0.3, k as u64)).abs())
                .sum();
            errs.push(l1);
        }
        medians.push(median(&mut errs));
    }
    assert!(
        medians[0] >= medians[1] && medians[1] >= medians[2],
        "medians {medians:?}"
    );
}

#[test]
fn edap_tracks_the_mde_at_root_delta_rate() {
    // median |EDAP - MDE| * sqrt(Delta) shrinks from n=15 to n=45
    let fam = geometric_family();
    let prior = jeffreys();
    let (trees, _) = surviving_trajectories(100, 45, 0xBEEF);
    let mut stats_by_checkpoint = Vec::new();
    for &n in &[15usize, 45] {
        let mut vals = Vec::new();
        for tree in &trees {
            let stats = accumulate_stats(&tree.truncated(n)).unwrap();
            if stats.delta < 2 {
                continue;
            }
            let q = empirical_offspring(&stats).unwrap();
            let est = mde(DisparityKind::Hd, &q, &fam).unwrap();
            let post =
                build_dposterior(DisparityKind::Hd, &q, &fam, stats.delta, &prior, 2001).unwrap();
            vals.push((post.edap() - est.theta_hat).abs() * (stats.delta as f64).sqrt());
        }
        stats_by_checkpoint.push(median(&mut vals));
    }
    assert!(
        stats_by_checkpoint[0] > stats_by_checkpoint[1],
        "EDAP-MDE agreement must tighten: {stats_by_checkpoint:?}"
    );
}
