//! Implementations of the six subcommands. Each returns the lines it wants
//! on stdout so the binary stays a thin shell.

use std::collections::BTreeMap;

use serde::Serialize;

use cbp_core::branching::{
    accumulate_stats, empirical_offspring, simulate_cbp, ControlLaw, FamilyTree, SufficientStats,
};
use cbp_core::disparity::{mde, DisparityKind};
use cbp_core::dposterior::{asymptotic_summary, build_dposterior, Prior1D};
use cbp_core::families::{geometric_family, Geometric, OffspringFamily};
use cbp_core::fixtures::{fixture, FixturePayload};
use cbp_core::multitype::{
    build_simplex_dposterior, criticality_prob, edap_simplex, edap_simplex_se, hpd_region,
    mdap_simplex, mle_twotype, DirichletPrior, TwoTypeStats, SIMPLEX_CELL_AREA,
    SIMPLEX_GRID_STEP,
};
use cbp_core::robustness::{alpha_influence, breakdown_scan, EstimatorTag};
use cbp_core::rng::SplitMix64;
use cbp_core::{Error, Result};

use crate::config::RunConfig;
use crate::fmt::{sig6, Cell};
use crate::out::OutDir;
use crate::published;

fn family_from(cfg: &RunConfig) -> Result<Geometric> {
    match cfg.family.as_deref().unwrap_or("geometric") {
        "geometric" => Ok(geometric_family()),
        "trinomial" => Err(Error::Domain(
            "the trinomial family is the two-type offspring law; use the \
             oligo-exp1/oligo-exp2 fixtures or two-type data instead"
                .into(),
        )),
        other => Err(Error::Domain(format!("unknown family id '{other}'"))),
    }
}

fn out_dir(cfg: &RunConfig) -> Result<OutDir> {
    let path = cfg
        .out
        .clone()
        .ok_or_else(|| Error::Domain("an output directory is required (--out)".into()))?;
    OutDir::create(&path)
}

// ---------------------------------------------------------------- simulate

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Vec<String>> {
    let family = family_from(cfg)?;
    let theta = cfg.theta.unwrap_or(0.3);
    let control = cfg.control.unwrap_or(ControlLaw::Poisson { lambda: 0.3 });
    let z0 = cfg.z0.unwrap_or(1);
    let generations = cfg.generations.unwrap_or(45);
    let tree = simulate_cbp(
        &family,
        theta,
        control,
        z0,
        generations,
        cfg.seed(),
        cfg.contamination,
    )?;
    let dir = out_dir(cfg)?;
    let path = dir.write("tree.json", &(tree.to_json() + "\n"))?;
    let delta: u64 = tree.generations.iter().map(|g| g.phi).sum();
    Ok(vec![format!(
        "wrote {} generations={} final_z={} extinct={} delta={}",
        path.display(),
        tree.generations.len(),
        tree.final_z,
        tree.extinct,
        delta
    )])
}

// ---------------------------------------------------------------- estimate

#[derive(Serialize)]
struct Estimate1D {
    edap: f64,
    mdap: f64,
    multimodal: bool,
    hpd_level: f64,
    hpd: Vec<(f64, f64)>,
    mde: Option<f64>,
    curvature: Option<f64>,
    std_error: Option<f64>,
    mean_at_edap: f64,
    variance_at_edap: f64,
    mean_at_mdap: f64,
    variance_at_mdap: f64,
}

#[derive(Serialize)]
struct Report1D {
    source: String,
    delta: u64,
    y_total: u64,
    generations: u64,
    kinds: BTreeMap<String, Estimate1D>,
}

enum DataSource {
    Tree(Box<FamilyTree>, String),
    TwoType(TwoTypeStats, String),
}

fn resolve_data(cfg: &RunConfig) -> Result<DataSource> {
    if let Some(id) = &cfg.fixture {
        return match fixture(id)? {
            FixturePayload::Tree(t) => Ok(DataSource::Tree(Box::new(t), id.clone())),
            FixturePayload::TwoType(s) => Ok(DataSource::TwoType(s, id.clone())),
        };
    }
    if let Some(path) = &cfg.dataset {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Data(format!("cannot read dataset {}: {e}", path.display())))?;
        let tree = FamilyTree::from_json(&text)?;
        return Ok(DataSource::Tree(Box::new(tree), path.display().to_string()));
    }
    Err(Error::Domain(
        "estimate needs --fixture <id> or a dataset path in the config".into(),
    ))
}

pub fn cmd_estimate(cfg: &RunConfig) -> Result<Vec<String>> {
    match resolve_data(cfg)? {
        DataSource::Tree(tree, source) => {
            let stats = accumulate_stats(&tree)?;
            estimate_univariate(cfg, &stats, source)
        }
        DataSource::TwoType(stats, source) => estimate_twotype(cfg, &stats, source),
    }
}

fn estimate_univariate(cfg: &RunConfig, stats: &SufficientStats, source: String) -> Result<Vec<String>> {
    let family = family_from(cfg)?;
    let prior = cfg.prior();
    let grid = cfg.grid();
    let dir = out_dir(cfg)?;
    // with no progenitors the posterior is the prior itself
    let q = if stats.delta == 0 {
        vec![1.0]
    } else {
        empirical_offspring(stats)?
    };
    let mut lines = Vec::new();
    let mut kinds = BTreeMap::new();
    for kind in cfg.kinds()? {
        let post = build_dposterior(kind, &q, &family, stats.delta, &prior, grid)?;
        let mdap = post.mdap_with(kind, &q, &family, &prior);
        let level = cfg.hpd_level.unwrap_or(0.95);
        let hpd = post.hpd_interval(level)?;
        let freq = if stats.delta > 0 {
            Some(asymptotic_summary(kind, &q, &family, stats.delta)?)
        } else {
            None
        };
        let edap = post.edap();
        dir.write(&format!("posterior_{}.csv", kind.name()), &post.to_csv())?;
        lines.push(format!(
            "{}: edap {} mdap {} mde {}",
            kind.name(),
            sig6(edap),
            sig6(mdap.theta),
            freq.map(|f| sig6(f.mde.theta_hat)).unwrap_or_else(|| "n/a".into()),
        ));
        kinds.insert(
            kind.name().to_string(),
            Estimate1D {
                edap,
                mdap: mdap.theta,
                multimodal: mdap.multimodal,
                hpd_level: level,
                hpd,
                mde: freq.map(|f| f.mde.theta_hat),
                curvature: freq.map(|f| f.mde.curvature),
                std_error: freq.map(|f| f.std_error),
                mean_at_edap: family.mean(edap),
                variance_at_edap: family.variance(edap),
                mean_at_mdap: family.mean(mdap.theta),
                variance_at_mdap: family.variance(mdap.theta),
            },
        );
    }
    let report = Report1D {
        source,
        delta: stats.delta,
        y_total: stats.y_total,
        generations: stats.generations,
        kinds,
    };
    dir.write_json("estimate.json", &report)?;
    Ok(lines)
}

#[derive(Serialize)]
struct EstimateTwoType {
    edap: [f64; 3],
    edap_se: [f64; 3],
    mdap: [f64; 3],
    mdap_boundary: bool,
    criticality_prob: f64,
    effective_sample_size: f64,
    ess_warning: bool,
}

#[derive(Serialize)]
struct ReportTwoType {
    source: String,
    delta: u64,
    mle: [f64; 4],
    kinds: BTreeMap<String, EstimateTwoType>,
}

fn estimate_twotype(cfg: &RunConfig, stats: &TwoTypeStats, source: String) -> Result<Vec<String>> {
    let prior = DirichletPrior { alpha: cfg.dirichlet() };
    let dir = out_dir(cfg)?;
    let level = cfg.hpd_level.unwrap_or(0.95);
    let mle = mle_twotype(stats)?;
    let mut lines = Vec::new();
    let mut kinds = BTreeMap::new();
    for kind in cfg.kinds()? {
        let post = build_simplex_dposterior(kind, stats, &prior, cfg.draws(), cfg.seed())?;
        let edap = edap_simplex(&post);
        let mdap = mdap_simplex(kind, stats, &prior)?;
        let crit = criticality_prob(&post);
        let region = hpd_region(&post, level)?;

        // contour export: weighted histogram cells with the in-region flag
        let mut hist: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        for (q, w) in post.draws.iter().zip(&post.weights) {
            let i = (q[0] / SIMPLEX_GRID_STEP) as u32;
            let j = (q[1] / SIMPLEX_GRID_STEP) as u32;
            *hist.entry((i, j)).or_insert(0.0) += w;
        }
        let region_cells: std::collections::HashSet<(u32, u32)> =
            region.cells.iter().map(|(ij, _)| *ij).collect();
        let mut rows = Vec::new();
        let mut sidecar = Vec::new();
        for (&(i, j), &mass) in &hist {
            let q0 = i as f64 * SIMPLEX_GRID_STEP;
            let q1 = j as f64 * SIMPLEX_GRID_STEP;
            let density = mass / SIMPLEX_CELL_AREA;
            let in_region = region_cells.contains(&(i, j));
            rows.push(vec![
                Cell::Num(q0),
                Cell::Num(q1),
                Cell::Num(density),
                Cell::Text(in_region.to_string()),
            ]);
            sidecar.push((q0, q1, density, in_region));
        }
        dir.write_csv(
            &format!("contour_{}", kind.name()),
            "q0,q1,density,in_region",
            &rows,
            &sidecar,
        )?;

        lines.push(format!(
            "{}: edap ({}, {}, {}) mdap ({}, {}, {}) P[m>1] {} ess {}",
            kind.name(),
            sig6(edap[0]),
            sig6(edap[1]),
            sig6(edap[2]),
            sig6(mdap.p[0]),
            sig6(mdap.p[1]),
            sig6(mdap.p[2]),
            sig6(crit),
            sig6(post.effective_sample_size),
        ));
        kinds.insert(
            kind.name().to_string(),
            EstimateTwoType {
                edap,
                edap_se: edap_simplex_se(&post),
                mdap: mdap.p,
                mdap_boundary: mdap.boundary,
                criticality_prob: crit,
                effective_sample_size: post.effective_sample_size,
                ess_warning: post.ess_warning,
            },
        );
    }
    let report = ReportTwoType {
        source,
        delta: stats.delta,
        mle: [mle.p0, mle.p1, mle.p2, mle.gamma],
        kinds,
    };
    dir.write_json("estimate.json", &report)?;
    Ok(lines)
}

// -------------------------------------------------------------- robustness

fn estimators_from(cfg: &RunConfig) -> Result<Vec<EstimatorTag>> {
    let names = cfg
        .estimators
        .clone()
        .unwrap_or_else(|| vec!["edap".to_string()]);
    names
        .iter()
        .map(|n| match n.as_str() {
            "edap" => Ok(EstimatorTag::Edap),
            "mdap" => Ok(EstimatorTag::Mdap),
            "mde" => Ok(EstimatorTag::Mde),
            other => Err(Error::Domain(format!("unknown estimator tag '{other}'"))),
        })
        .collect()
}

pub fn cmd_robustness(cfg: &RunConfig) -> Result<Vec<String>> {
    let family = family_from(cfg)?;
    let theta0 = cfg.theta0.or(cfg.theta).unwrap_or(0.3);
    let alpha = cfg.alpha.unwrap_or(0.15);
    let delta = cfg.delta.unwrap_or(1000);
    let prior = cfg.prior();
    let l_list = cfg
        .l_list
        .clone()
        .unwrap_or_else(|| (0..=cfg.l_max.unwrap_or(40)).collect());
    let dir = out_dir(cfg)?;

    let mut inf_rows = Vec::new();
    let mut inf_sidecar = Vec::new();
    let mut brk_rows = Vec::new();
    let mut brk_sidecar = Vec::new();
    for kind in cfg.kinds()? {
        for tag in estimators_from(cfg)? {
            let label = format!("{}:{}", kind.name(), tag.name());
            if !l_list.is_empty() {
                let curve = alpha_influence(
                    kind, tag, &family, theta0, alpha, &l_list, delta, &prior,
                )?;
                for p in &curve.points {
                    inf_rows.push(vec![
                        Cell::Int(p.point as i64),
                        match p.value {
                            Some(v) => Cell::Num(v),
                            None => Cell::Text(String::new()),
                        },
                        Cell::Text(label.clone()),
                        Cell::Text(p.error.clone().unwrap_or_default()),
                    ]);
                    inf_sidecar.push((p.point, p.value, label.clone(), p.error.clone()));
                }
            }
            let alphas = cfg.alphas.clone().unwrap_or_else(|| vec![alpha]);
            let l_max = cfg.l_max.unwrap_or_else(|| l_list.iter().max().copied().unwrap_or(40));
            for b in breakdown_scan(kind, tag, &family, theta0, &alphas, l_max, delta, &prior)? {
                // re-evaluate the estimator at the worst contamination point
                let q = cbp_core::robustness::contaminate(&family, theta0, b.alpha, b.worst_point)?;
                let est = match tag {
                    EstimatorTag::Mde => mde(kind, &q, &family)?.theta_hat,
                    EstimatorTag::Edap => {
                        build_dposterior(kind, &q, &family, delta, &prior, cfg.grid())?.edap()
                    }
                    EstimatorTag::Mdap => {
                        let post = build_dposterior(kind, &q, &family, delta, &prior, cfg.grid())?;
                        post.mdap_with(kind, &q, &family, &prior).theta
                    }
                };
                brk_rows.push(vec![
                    Cell::Num(b.alpha),
                    Cell::Int(b.worst_point as i64),
                    Cell::Num(est),
                    Cell::Num(b.displacement),
                    Cell::Text(label.clone()),
                ]);
                brk_sidecar.push((b.alpha, b.worst_point, est, b.displacement, label.clone()));
            }
        }
    }
    dir.write_csv("influence", "L,if_alpha,estimator,error", &inf_rows, &inf_sidecar)?;
    dir.write_csv(
        "breakdown",
        "alpha,L,estimate,displacement,estimator",
        &brk_rows,
        &brk_sidecar,
    )?;
    Ok(vec![format!(
        "wrote influence.csv ({} rows) and breakdown.csv ({} rows) to {}",
        inf_rows.len(),
        brk_rows.len(),
        dir.path().display()
    )])
}

// -------------------------------------------------------------- sensitivity

pub fn cmd_sensitivity(cfg: &RunConfig) -> Result<Vec<String>> {
    match resolve_data(cfg)? {
        DataSource::Tree(tree, _) => {
            let stats = accumulate_stats(&tree)?;
            sensitivity_univariate(cfg, &stats)
        }
        DataSource::TwoType(stats, _) => sensitivity_twotype(cfg, &stats),
    }
}

fn sensitivity_univariate(cfg: &RunConfig, stats: &SufficientStats) -> Result<Vec<String>> {
    let family = family_from(cfg)?;
    let dir = out_dir(cfg)?;
    let kinds = match &cfg.kinds {
        None => vec![DisparityKind::Hd, DisparityKind::Ned],
        Some(_) => cfg.kinds()?,
    };
    let rows_cfg: Vec<(f64, f64)> = cfg.beta_priors.clone().unwrap_or_else(|| {
        published::TABLE6_ROWS.iter().map(|r| (r.0, r.1)).collect()
    });
    let q = empirical_offspring(stats)?;

    let mut header = String::from("rho,beta,prior_mean,prior_variance");
    for kind in &kinds {
        header.push_str(&format!(",edap_{0},mdap_{0}", kind.name()));
    }
    let mut rows = Vec::new();
    let mut sidecar = Vec::new();
    for (rho, beta) in rows_cfg {
        let prior = Prior1D::Beta { rho, beta };
        prior.validate()?;
        let mut row = vec![
            Cell::Num(rho),
            Cell::Num(beta),
            Cell::Num(prior.mean().unwrap()),
            Cell::Num(prior.variance().unwrap()),
        ];
        let mut side = vec![rho, beta, prior.mean().unwrap(), prior.variance().unwrap()];
        for &kind in &kinds {
            let post = build_dposterior(kind, &q, &family, stats.delta, &prior, cfg.grid())?;
            let edap = post.edap();
            let mdap = post.mdap_with(kind, &q, &family, &prior).theta;
            row.push(Cell::Num(edap));
            row.push(Cell::Num(mdap));
            side.push(edap);
            side.push(mdap);
        }
        rows.push(row);
        sidecar.push(side);
    }
    dir.write_csv("sensitivity", &header, &rows, &sidecar)?;
    Ok(vec![format!(
        "wrote sensitivity.csv ({} prior rows) to {}",
        rows.len(),
        dir.path().display()
    )])
}

fn sensitivity_twotype(cfg: &RunConfig, stats: &TwoTypeStats) -> Result<Vec<String>> {
    let dir = out_dir(cfg)?;
    let kinds = cfg.kinds()?;
    let priors = cfg
        .dirichlet_priors
        .clone()
        .unwrap_or_else(|| vec![[0.5, 0.5, 0.5], [1.0, 1.0, 1.0], [2.0, 2.0, 2.0]]);
    let header = "a1,a2,a3,kind,edap_p0,edap_p1,edap_p2,mdap_p0,mdap_p1,mdap_p2";
    let mut rows = Vec::new();
    let mut sidecar = Vec::new();
    for alpha in priors {
        let prior = DirichletPrior { alpha };
        for &kind in &kinds {
            let post = build_simplex_dposterior(kind, stats, &prior, cfg.draws(), cfg.seed())?;
            let e = edap_simplex(&post);
            let m = mdap_simplex(kind, stats, &prior)?;
            rows.push(vec![
                Cell::Num(alpha[0]),
                Cell::Num(alpha[1]),
                Cell::Num(alpha[2]),
                Cell::Text(kind.name().to_string()),
                Cell::Num(e[0]),
                Cell::Num(e[1]),
                Cell::Num(e[2]),
                Cell::Num(m.p[0]),
                Cell::Num(m.p[1]),
                Cell::Num(m.p[2]),
            ]);
            sidecar.push((alpha, kind.name().to_string(), e, m.p));
        }
    }
    dir.write_csv("sensitivity_dirichlet", header, &rows, &sidecar)?;
    Ok(vec![format!(
        "wrote sensitivity_dirichlet.csv ({} rows) to {}",
        rows.len(),
        dir.path().display()
    )])
}

// --------------------------------------------------------------- reproduce

pub fn cmd_reproduce(table: &str) -> Result<(Vec<String>, bool)> {
    let reports = published::reproduce(table)?;
    let mut lines = Vec::new();
    let mut all_pass = true;
    for r in &reports {
        all_pass &= r.pass;
        let tol = if r.tolerance == 0.0 {
            "exact".to_string()
        } else {
            format!("+/-{}", sig6(r.tolerance))
        };
        lines.push(format!(
            "{} {}: computed {} published {} ({}) {}",
            r.table,
            r.label,
            sig6(r.computed),
            sig6(r.published),
            tol,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    lines.push(format!(
        "{table}: {}/{} cells pass",
        reports.iter().filter(|r| r.pass).count(),
        reports.len()
    ));
    Ok((lines, all_pass))
}

// --------------------------------------------------------------- replicate

pub fn cmd_replicate(cfg: &RunConfig) -> Result<Vec<String>> {
    let family = family_from(cfg)?;
    let theta = cfg.theta.unwrap_or(0.3);
    let control = cfg.control.unwrap_or(ControlLaw::Poisson { lambda: 0.3 });
    let z0 = cfg.z0.unwrap_or(1);
    let prior = cfg.prior();
    let replicates = cfg.replicates.unwrap_or(200);
    let mut checkpoints = cfg.checkpoints.clone().unwrap_or_else(|| vec![15, 30, 45]);
    checkpoints.sort_unstable();
    let horizon = *checkpoints.last().ok_or_else(|| {
        Error::Domain("replicate needs at least one checkpoint".into())
    })?;
    let kinds = match &cfg.kinds {
        None => vec![DisparityKind::Hd],
        Some(_) => cfg.kinds()?,
    };
    let dir = out_dir(cfg)?;

    let mut lines = Vec::new();
    let tau_m = control.criticality_index(family.mean(theta));
    if tau_m <= 1.0 {
        // warn up front: the run proceeds, but survival may be rare
        eprintln!(
            "warning: tau_m = {} <= 1: the posited process is subcritical; \
             survival to generation {horizon} may be rare (rates reported below)",
            sig6(tau_m)
        );
    }

    let root = SplitMix64::new(cfg.seed());
    let mut survivors = Vec::new();
    let mut discarded = 0usize;
    let max_attempts = (replicates * 100).max(1000);
    let mut attempts = 0usize;
    while survivors.len() < replicates && attempts < max_attempts {
        attempts += 1;
        let tree = simulate_cbp(
            &family,
            theta,
            control,
            z0,
            horizon,
            root.split(attempts as u64).next_u64(),
            cfg.contamination,
        )?;
        if tree.extinct {
            discarded += 1;
        } else {
            survivors.push(tree);
        }
    }
    if survivors.is_empty() {
        return Err(Error::Degenerate(format!(
            "all {attempts} simulated trajectories went extinct before generation {horizon}; \
             tau_m = {} -- consider a supercritical setting (tau_m > 1) or larger z0",
            sig6(tau_m)
        )));
    }
    lines.push(format!(
        "{} survivors from {attempts} attempts ({discarded} discarded extinct)",
        survivors.len()
    ));

    let mut rows = Vec::new();
    let mut sidecar = Vec::new();
    // per (checkpoint, kind): |edap - theta| and |edap - mde| sqrt(delta)
    type TrendSamples = (Vec<f64>, Vec<f64>);
    let mut agg: BTreeMap<(u64, &'static str), TrendSamples> = BTreeMap::new();
    for (idx, tree) in survivors.iter().enumerate() {
        for &n in &checkpoints {
            let stats = accumulate_stats(&tree.truncated(n as usize))?;
            if stats.delta == 0 {
                continue;
            }
            let q = empirical_offspring(&stats)?;
            for &kind in &kinds {
                let post = build_dposterior(kind, &q, &family, stats.delta, &prior, cfg.grid())?;
                let edap = post.edap();
                let mdap = post.mdap_with(kind, &q, &family, &prior).theta;
                let mde_hat = mde(kind, &q, &family)?.theta_hat;
                rows.push(vec![
                    Cell::Int(idx as i64),
                    Cell::Int(n as i64),
                    Cell::Int(stats.delta as i64),
                    Cell::Text(kind.name().to_string()),
                    Cell::Num(edap),
                    Cell::Num(mdap),
                    Cell::Num(mde_hat),
                ]);
                sidecar.push((idx, n, stats.delta, kind.name(), edap, mdap, mde_hat));
                let entry = agg.entry((n, kind.name())).or_default();
                entry.0.push((edap - theta).abs());
                entry.1.push((edap - mde_hat).abs() * (stats.delta as f64).sqrt());
            }
        }
    }
    dir.write_csv(
        "replicates",
        "replicate,checkpoint,delta,kind,edap,mdap,mde",
        &rows,
        &sidecar,
    )?;

    let median = |xs: &mut Vec<f64>| -> f64 {
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs[xs.len() / 2]
    };
    let mut agg_rows = Vec::new();
    let mut agg_sidecar = Vec::new();
    for ((n, kind), (mut errs, mut gaps)) in agg {
        let row = (n, kind, errs.len(), median(&mut errs), median(&mut gaps));
        agg_rows.push(vec![
            Cell::Int(row.0 as i64),
            Cell::Text(row.1.to_string()),
            Cell::Int(row.2 as i64),
            Cell::Num(row.3),
            Cell::Num(row.4),
        ]);
        lines.push(format!(
            "n={} {}: median |edap - theta0| = {}, median |edap - mde| sqrt(delta) = {}",
            row.0,
            row.1,
            sig6(row.3),
            sig6(row.4)
        ));
        agg_sidecar.push(row);
    }
    dir.write_csv(
        "aggregate",
        "checkpoint,kind,survivors,median_abs_error_edap,median_edap_mde_gap_scaled",
        &agg_rows,
        &agg_sidecar,
    )?;
    Ok(lines)
}
