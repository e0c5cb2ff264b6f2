//! Built-in corpora: the synthesizable 3D-Shapes factor grid and small
//! hand-picked toy manifests for each shipped dataset.
//!
//! The factor grid is the full cartesian product of the six declared
//! factor ranges (480,000 rows), so the flagship split check needs no
//! external download. The toys are a few examples per domain chosen so
//! that every metric's conditioning set is nonempty and the varying
//! attributes avoid the opposite domain's pinned codes.

use crate::config::{builtin_config, DatasetConfig};
use crate::error::{Error, Result};
use crate::schema::{AttributeValue, Domain};
use crate::splitter::{DomainManifest, LabeledExample, Provenance};

/// Name accepted by the CLI's `--corpus` for the synthesized grid.
pub const GRID_CORPUS_NAME: &str = "builtin:3dshapes-grid";

/// The full 3D-Shapes factor grid: every combination of the six
/// factors, in schema order with the last factor fastest.
pub fn shapes_grid() -> Vec<LabeledExample> {
    let cards = [4u32, 10, 10, 10, 8, 15];
    let total: u32 = cards.iter().product();
    let mut out = Vec::with_capacity(total as usize);
    for i in 0..total {
        let mut rest = i;
        let mut codes = [0u32; 6];
        for (slot, &card) in codes.iter_mut().zip(&cards).rev() {
            *slot = rest % card;
            rest /= card;
        }
        out.push(LabeledExample::new(
            format!("g{i:06}"),
            codes.iter().map(|&c| AttributeValue::cat(c)).collect(),
        ));
    }
    out
}

fn manifest(
    config: &DatasetConfig,
    domain: Domain,
    rows: Vec<(String, Vec<AttributeValue>)>,
) -> DomainManifest {
    DomainManifest {
        domain,
        partition_hash: config.partition_hash(),
        provenance: Provenance {
            source: "builtin:toy".into(),
            filtered_at: None,
        },
        examples: rows
            .into_iter()
            .map(|(id, values)| LabeledExample::new(id, values))
            .collect(),
    }
}

fn shapes_toys(config: &DatasetConfig) -> (DomainManifest, DomainManifest) {
    let row = |id: &str, codes: [u32; 6]| {
        (
            id.to_string(),
            codes.iter().map(|&c| AttributeValue::cat(c)).collect(),
        )
    };
    // A pins size=5(4) and orientation=-30(0); floor/wall vary and
    // avoid red(0)/blue(7), the codes they are pinned to in B.
    let a = manifest(
        config,
        Domain::A,
        vec![
            row("a0", [0, 1, 3, 2, 4, 0]),
            row("a1", [1, 1, 5, 4, 4, 0]),
            row("a2", [2, 5, 8, 9, 4, 0]),
            row("a3", [3, 8, 6, 1, 4, 0]),
            row("a4", [0, 5, 9, 3, 4, 0]),
            row("a5", [1, 2, 2, 5, 4, 0]),
        ],
    );
    // B pins floor=red(0) and wall=blue(7); size/orientation vary and
    // avoid 5(4)/-30(0), the codes they are pinned to in A.
    let b = manifest(
        config,
        Domain::B,
        vec![
            row("b0", [0, 1, 0, 7, 0, 5]),
            row("b1", [1, 9, 0, 7, 7, 1]),
            row("b2", [3, 5, 0, 7, 2, 14]),
            row("b3", [2, 2, 0, 7, 5, 8]),
            row("b4", [0, 8, 0, 7, 1, 3]),
            row("b5", [2, 1, 0, 7, 6, 11]),
        ],
    );
    (a, b)
}

fn synaction_toys(config: &DatasetConfig) -> (DomainManifest, DomainManifest) {
    // Distinct 34-channel poses from exact binary fractions, so every
    // cross-domain pose pair differs and distances are exact.
    let pose = |i: u32| {
        AttributeValue::Continuous(
            (0..34)
                .map(|c| f64::from(i) * 0.25 + f64::from(c) * 0.125)
                .collect(),
        )
    };
    let row = |id: &str, p: u32, background: u32, identity: u32| {
        (
            id.to_string(),
            vec![
                pose(p),
                AttributeValue::cat(background),
                AttributeValue::cat(identity),
            ],
        )
    };
    // A pins identity=identity_0; backgrounds vary, including one
    // example at background_0 so the bias conditioning (input equals
    // guidance) is nonempty on every attribute kind.
    let a = manifest(
        config,
        Domain::A,
        vec![
            row("a0", 0, 1, 0),
            row("a1", 1, 2, 0),
            row("a2", 2, 3, 0),
            row("a3", 3, 4, 0),
            row("a4", 4, 0, 0),
        ],
    );
    // B pins background=background_0; identities vary, including one at
    // identity_0, and b4 shares a pose with a4.
    let b = manifest(
        config,
        Domain::B,
        vec![
            row("b0", 5, 0, 1),
            row("b1", 6, 0, 2),
            row("b2", 7, 0, 3),
            row("b3", 8, 0, 4),
            row("b4", 4, 0, 0),
        ],
    );
    (a, b)
}

fn celeba_toys(config: &DatasetConfig) -> (DomainManifest, DomainManifest) {
    let schema = &config.schema;
    let build = |id: &str, base: &[(&str, u32)], overrides: &[(&str, u32)]| {
        let mut codes = vec![0u32; schema.len()];
        for (name, value) in base.iter().chain(overrides) {
            let k = schema.index_of(name).expect("known attribute");
            codes[k] = *value;
        }
        (
            id.to_string(),
            codes
                .into_iter()
                .map(AttributeValue::cat)
                .collect::<Vec<_>>(),
        )
    };
    // Domain A: Male=1 with the hair attributes pinned to their
    // fixed-in-A codes; the seven A-specific attributes vary.
    let base_a = [
        ("Male", 1u32),
        ("Black_Hair", 1),
        ("Blond_Hair", 0),
        ("Brown_Hair", 0),
        ("Gray_Hair", 0),
    ];
    let a = manifest(
        config,
        Domain::A,
        vec![
            build(
                "a0",
                &base_a,
                &[("Goatee", 1), ("Smiling", 1), ("Big_Nose", 1)],
            ),
            build(
                "a1",
                &base_a,
                &[("Heavy_Makeup", 1), ("Young", 1), ("Eyeglasses", 1)],
            ),
            build(
                "a2",
                &base_a,
                &[("Mustache", 1), ("No_Beard", 1), ("Wavy_Hair", 1)],
            ),
            build(
                "a3",
                &base_a,
                &[("Sideburns", 1), ("Smiling", 1), ("Chubby", 1)],
            ),
            build(
                "a4",
                &base_a,
                &[("Young", 1), ("No_Beard", 1), ("Big_Nose", 1)],
            ),
            build(
                "a5",
                &base_a,
                &[("Goatee", 1), ("Mustache", 1), ("Pale_Skin", 1)],
            ),
        ],
    );
    // Domain B: Male=0 with the beard/makeup block pinned to its
    // fixed-in-B codes; the four hair attributes vary.
    let base_b = [
        ("Male", 0u32),
        ("Goatee", 0),
        ("Heavy_Makeup", 1),
        ("Mustache", 0),
        ("No_Beard", 1),
        ("Sideburns", 0),
        ("Smiling", 1),
        ("Young", 1),
    ];
    let b = manifest(
        config,
        Domain::B,
        vec![
            build("b0", &base_b, &[("Black_Hair", 1), ("Big_Nose", 1)]),
            build("b1", &base_b, &[("Blond_Hair", 1), ("Eyeglasses", 1)]),
            build("b2", &base_b, &[("Brown_Hair", 1), ("Wavy_Hair", 1)]),
            build("b3", &base_b, &[("Gray_Hair", 1), ("Chubby", 1)]),
            build("b4", &base_b, &[("Black_Hair", 1), ("Blond_Hair", 1)]),
            build("b5", &base_b, &[("Brown_Hair", 1), ("Pale_Skin", 1)]),
        ],
    );
    (a, b)
}

/// Pose-focused manifests on the synaction schema, built so that no
/// two pool poses are ever equidistant from a third: every pose's
/// channels all carry one value 2^i, and differences of distinct
/// powers of two are unique. With the domain pools disjoint, the
/// pose-match indicator never ties, so a random-output oracle has a
/// pose-match expectation of exactly one half over both directions.
pub fn pose_fixture() -> Result<(DatasetConfig, DomainManifest, DomainManifest)> {
    let config = builtin_config("synaction")?;
    let pose = |i: u32| AttributeValue::Continuous(vec![f64::from(2u32.pow(i)); 34]);
    let row = |id: &str, p: u32, background: u32, identity: u32| {
        (
            id.to_string(),
            vec![
                pose(p),
                AttributeValue::cat(background),
                AttributeValue::cat(identity),
            ],
        )
    };
    let a = manifest(
        &config,
        Domain::A,
        vec![
            row("pa0", 0, 1, 0),
            row("pa1", 1, 2, 0),
            row("pa2", 2, 3, 0),
            row("pa3", 3, 4, 0),
            row("pa4", 4, 5, 0),
        ],
    );
    let b = manifest(
        &config,
        Domain::B,
        vec![
            row("pb0", 5, 0, 1),
            row("pb1", 6, 0, 2),
            row("pb2", 7, 0, 3),
            row("pb3", 8, 0, 4),
            row("pb4", 9, 0, 5),
        ],
    );
    Ok((config, a, b))
}

/// Small verified manifests for a built-in dataset.
pub fn toy_manifests(dataset: &str) -> Result<(DatasetConfig, DomainManifest, DomainManifest)> {
    let config = builtin_config(dataset)?;
    let (a, b) = match dataset {
        "3dshapes" => shapes_toys(&config),
        "synaction" => synaction_toys(&config),
        "celeba_d" => celeba_toys(&config),
        _ => {
            return Err(Error::config(format!(
                "no toy fixture for dataset '{dataset}'"
            )))
        }
    };
    Ok((config, a, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::BUILTIN_CONFIGS;
    use crate::splitter::{build_split, verify_manifest};

    #[test]
    fn grid_has_all_combinations_once() {
        let grid = shapes_grid();
        assert_eq!(grid.len(), 480_000);
        assert_eq!(grid[0].values, vec![AttributeValue::cat(0); 6]);
        let last = &grid[479_999].values;
        assert_eq!(
            last,
            &vec![
                AttributeValue::cat(3),
                AttributeValue::cat(9),
                AttributeValue::cat(9),
                AttributeValue::cat(9),
                AttributeValue::cat(7),
                AttributeValue::cat(14),
            ]
        );
        // Row 1 increments the fastest factor (orientation).
        assert_eq!(grid[1].values[5], AttributeValue::cat(1));
        assert_eq!(grid[1].values[0], AttributeValue::cat(0));
    }

    #[test]
    fn grid_split_cardinalities() {
        let config = builtin_config("3dshapes").unwrap();
        let grid = shapes_grid();
        let outcome = build_split(
            &grid,
            &config.schema,
            &config.partition,
            &config.partition_hash(),
            GRID_CORPUS_NAME,
        )
        .unwrap();
        assert_eq!(outcome.a.examples.len(), 4000);
        assert_eq!(outcome.b.examples.len(), 4800);
        // Rows pinned on all four specific factors belong to both.
        assert_eq!(outcome.overlap_ids.len(), 40);
    }

    #[test]
    fn toys_verify_against_their_partitions() {
        for dataset in BUILTIN_CONFIGS {
            let (config, a, b) = toy_manifests(dataset).unwrap();
            for m in [&a, &b] {
                let result = verify_manifest(m, &config.schema, &config.partition);
                assert!(
                    result.is_ok(),
                    "{dataset} {}: {:?}",
                    m.domain,
                    result.violations
                );
            }
            assert!(!a.examples.is_empty() && !b.examples.is_empty());
        }
    }

    #[test]
    fn toys_condition_every_metric_attribute() {
        use crate::metrics::{compute_report, EvalOptions};
        use crate::oracles::{
            generate_triplets, OracleKind, OracleSpec, Pairing, DEFAULT_PAIR_CAP,
        };
        for dataset in BUILTIN_CONFIGS {
            let (config, a, b) = toy_manifests(dataset).unwrap();
            let spec = OracleSpec {
                kind: OracleKind::ContentIdentity,
                seed: 1,
            };
            let triplets = generate_triplets(
                &spec,
                &config.schema,
                &config.partition,
                &a,
                &b,
                1,
                Pairing::Exhaustive,
                DEFAULT_PAIR_CAP,
            )
            .unwrap();
            let report = compute_report(
                &triplets,
                &config.schema,
                &config.partition,
                &EvalOptions::default(),
            )
            .unwrap();
            // Every transfer attribute must be exercised; content
            // attributes need at least one conditioned representative
            // (the celeba toys leave most content attributes constant).
            for (metric, name) in [
                (&report.q_tr_a2b, "Q_tr A2B"),
                (&report.q_tr_b2a, "Q_tr B2A"),
                (&report.d_s_a2b, "D_s A2B"),
                (&report.d_s_b2a, "D_s B2A"),
            ] {
                for score in &metric.per_attribute {
                    assert!(
                        score.conditioned > 0,
                        "{dataset} {name} '{}' never conditioned",
                        score.name
                    );
                }
            }
            for (metric, name) in [(&report.d_c_a2b, "D_c A2B"), (&report.d_c_b2a, "D_c B2A")] {
                assert!(
                    metric.per_attribute.iter().any(|s| s.conditioned > 0),
                    "{dataset} {name} has no conditioned attribute"
                );
            }
            assert!(report.bias.a2b.is_some() || report.bias.b2a.is_some());
        }
    }
}
