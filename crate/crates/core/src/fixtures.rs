//! Embedded datasets: the two observed cell-kinetics trees (as aggregate
//! counts) and the 45-generation simulated trajectory of the contaminated
//! geometric process. Payloads are compile-time constants; checksums over
//! their canonical JSON are pinned by tests so the embedded data cannot
//! drift.

use crate::branching::{FamilyTree, GenerationRecord};
use crate::error::{Error, Result};
use crate::multitype::TwoTypeStats;

/// Observed branching tree aggregates of experiment 1 (vehicle solution,
/// 34 initial precursor cells, 7 generations).
pub fn oligo_exp1() -> TwoTypeStats {
    TwoTypeStats {
        y1_0: 158,
        y1_2: 201,
        psi: 51,
        delta: 410,
        y1_total: 425,
        n: 7,
        z0: 34,
    }
}

/// Observed branching tree aggregates of experiment 2 (hormone-stimulated,
/// 30 initial precursor cells, 5 generations).
pub fn oligo_exp2() -> TwoTypeStats {
    TwoTypeStats {
        y1_0: 37,
        y1_2: 133,
        psi: 99,
        delta: 269,
        y1_total: 276,
        n: 5,
        z0: 30,
    }
}

/// One trajectory row: (z, phi, offspring counts).
type TrajectoryRow = (u64, u64, &'static [(u64, u64)]);

/// Per-generation rows of the simulated trajectory: geometric(0.3) offspring
/// with point contamination (0.15, 11) under Poisson(0.3 z) control, started
/// from a single individual and run for 45 generations.
const SIM_GEO45_ROWS: &[TrajectoryRow] = &[
    (1, 1, &[(8, 1)]),
    (8, 4, &[(0, 1), (11, 1), (3, 1), (8, 1)]),
    (22, 5, &[(0, 2), (1, 1), (11, 1), (4, 1)]),
    (16, 3, &[(11, 2), (6, 1)]),
    (28, 3, &[(0, 2), (4, 1)]),
    (4, 1, &[(11, 1)]),
    (11, 2, &[(1, 1), (3, 1)]),
    (4, 3, &[(1, 1), (2, 1), (8, 1)]),
    (11, 4, &[(0, 1), (2, 1), (3, 2)]),
    (8, 3, &[(1, 1), (11, 1), (2, 1)]),
    (14, 3, &[(0, 1), (2, 1), (3, 1)]),
    (5, 1, &[(1, 1)]),
    (1, 1, &[(11, 1)]),
    (11, 3, &[(0, 1), (10, 1), (2, 1)]),
    (12, 5, &[(0, 1), (1, 2), (11, 1), (4, 1)]),
    (17, 6, &[(1, 2), (11, 1), (2, 1), (5, 1), (7, 1)]),
    (27, 10, &[(0, 3), (1, 3), (11, 2), (2, 2)]),
    (29, 6, &[(0, 1), (1, 2), (2, 1), (4, 1), (7, 1)]),
    (15, 5, &[(0, 1), (1, 1), (11, 1), (2, 1), (3, 1)]),
    (17, 6, &[(0, 1), (1, 1), (2, 2), (4, 1), (5, 1)]),
    (14, 8, &[(0, 2), (1, 4), (11, 1), (2, 1)]),
    (17, 4, &[(0, 1), (11, 1), (2, 2)]),
    (15, 2, &[(11, 1), (2, 1)]),
    (13, 4, &[(0, 2), (11, 1), (2, 1)]),
    (13, 2, &[(1, 1), (11, 1)]),
    (12, 3, &[(0, 1), (2, 1), (9, 1)]),
    (11, 4, &[(11, 1), (3, 1), (4, 1), (8, 1)]),
    (26, 9, &[(0, 2), (1, 2), (10, 1), (11, 1), (2, 2), (4, 1)]),
    (31, 7, &[(0, 2), (1, 1), (11, 3), (2, 1)]),
    (36, 9, &[(0, 3), (1, 2), (3, 1), (4, 2), (6, 1)]),
    (19, 6, &[(0, 1), (1, 1), (11, 1), (2, 1), (3, 1), (4, 1)]),
    (21, 5, &[(0, 1), (2, 1), (3, 2), (4, 1)]),
    (12, 4, &[(0, 1), (11, 1), (3, 1), (4, 1)]),
    (18, 6, &[(0, 2), (11, 1), (2, 3)]),
    (17, 8, &[(0, 1), (11, 3), (2, 1), (3, 1), (4, 1), (5, 1)]),
    (47, 16, &[(0, 6), (1, 2), (11, 3), (2, 2), (3, 2), (8, 1)]),
    (53, 18, &[(0, 8), (1, 1), (2, 4), (3, 3), (6, 1), (8, 1)]),
    (32, 12, &[(0, 1), (1, 2), (11, 1), (2, 1), (3, 1), (4, 4), (6, 1), (7, 1)]),
    (47, 16, &[(0, 7), (1, 3), (11, 1), (14, 1), (2, 1), (4, 2), (5, 1)]),
    (43, 15, &[(0, 5), (1, 4), (11, 1), (2, 3), (3, 1), (8, 1)]),
    (32, 14, &[(0, 5), (1, 3), (11, 2), (3, 3), (5, 1)]),
    (39, 13, &[(0, 4), (1, 2), (10, 1), (2, 3), (4, 1), (5, 2)]),
    (32, 10, &[(0, 3), (1, 1), (10, 1), (11, 3), (2, 2)]),
    (48, 18, &[(0, 4), (1, 2), (11, 4), (2, 2), (5, 2), (6, 3), (8, 1)]),
    (86, 20, &[(0, 7), (1, 3), (14, 1), (2, 6), (3, 2), (4, 1)]),
];

const SIM_GEO45_FINAL_Z: u64 = 39;

/// The simulated 45-generation trajectory as a [`FamilyTree`].
pub fn sim_geo45_tree() -> FamilyTree {
    let generations = SIM_GEO45_ROWS
        .iter()
        .map(|&(z, phi, counts)| GenerationRecord {
            z,
            phi,
            counts: counts.iter().copied().collect(),
        })
        .collect();
    FamilyTree {
        z0: 1,
        final_z: SIM_GEO45_FINAL_Z,
        extinct: false,
        generations,
    }
}

/// Identifiers of the built-in datasets.
pub const FIXTURE_IDS: [&str; 3] = ["oligo-exp1", "oligo-exp2", "sim-geo45"];

pub enum FixturePayload {
    TwoType(TwoTypeStats),
    Tree(FamilyTree),
}

pub fn fixture(id: &str) -> Result<FixturePayload> {
    match id {
        "oligo-exp1" => Ok(FixturePayload::TwoType(oligo_exp1())),
        "oligo-exp2" => Ok(FixturePayload::TwoType(oligo_exp2())),
        "sim-geo45" => Ok(FixturePayload::Tree(sim_geo45_tree())),
        other => Err(Error::Domain(format!("unknown fixture id '{other}'"))),
    }
}

/// FNV-1a over a fixture's canonical JSON; pinned by tests.
pub fn fixture_checksum(id: &str) -> Result<u64> {
    let json = match fixture(id)? {
        FixturePayload::TwoType(stats) => serde_json::to_string(&stats).unwrap(),
        FixturePayload::Tree(tree) => serde_json::to_string(&tree).unwrap(),
    };
    const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;
    let mut hash = FNV_OFFSET;
    for byte in json.as_bytes() {
        hash ^= *byte as u64;
        hash = hash.wrapping_mul(FNV_PRIME);
    }
    Ok(hash)
}
