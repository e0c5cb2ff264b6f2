//! Domain construction: filtering a labeled corpus into domains A and B.
//!
//! An example belongs to a domain when every attribute that is fixed
//! there carries its fixed value: the domain-splitting code plus the
//! opposite side's specific attributes. Membership is decided per
//! example, so the split is order-independent; output keeps input order.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{
    AttributeKind, AttributePartition, AttributeSchema, AttributeValue, Domain, Role,
    ValidationResult, Violation,
};

/// One corpus record: an opaque id (image filename, row key) and its
/// attribute vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub id: String,
    pub values: Vec<AttributeValue>,
}

impl LabeledExample {
    pub fn new(id: impl Into<String>, values: Vec<AttributeValue>) -> Self {
        LabeledExample {
            id: id.into(),
            values,
        }
    }
}

/// Where a manifest came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: String,
    /// Filter timestamp; populated only on request so emitted manifests
    /// stay byte-deterministic by default.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub filtered_at: Option<String>,
}

/// All examples of one domain, with the partition hash they were
/// filtered under.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainManifest {
    pub domain: Domain,
    pub partition_hash: String,
    pub provenance: Provenance,
    pub examples: Vec<LabeledExample>,
}

/// Result of a split: both manifests plus everything that did not land
/// cleanly in exactly one domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitOutcome {
    pub a: DomainManifest,
    pub b: DomainManifest,
    /// Ids matching both membership predicates (possible only without a
    /// domain-splitting attribute). Such examples belong to both
    /// domains, which is how the reference subset counts come out; the
    /// ids are surfaced here so callers can enforce stricter hygiene.
    pub overlap_ids: Vec<String>,
    /// Ids matching neither predicate.
    pub unmatched: usize,
    pub warnings: Vec<String>,
}

/// True when `values` satisfies the membership predicate of `domain`.
pub fn is_member(
    partition: &AttributePartition,
    values: &[AttributeValue],
    domain: Domain,
) -> bool {
    partition
        .membership_constraints(domain)
        .iter()
        .all(|&(k, code)| values.get(k).and_then(|v| v.code()) == Some(code))
}

/// Filters `corpus` into the two domain manifests.
pub fn build_split(
    corpus: &[LabeledExample],
    schema: &AttributeSchema,
    partition: &AttributePartition,
    partition_hash: &str,
    source: &str,
) -> Result<SplitOutcome> {
    let mut seen_ids: HashSet<&str> = HashSet::with_capacity(corpus.len());
    for ex in corpus {
        schema
            .check_vector(&ex.values)
            .map_err(|e| Error::data(format!("example '{}': {e}", ex.id)))?;
        if !seen_ids.insert(ex.id.as_str()) {
            return Err(Error::data(format!("duplicate example id '{}'", ex.id)));
        }
    }

    let mut a = Vec::new();
    let mut b = Vec::new();
    let mut overlap_ids = Vec::new();
    let mut unmatched = 0usize;
    for ex in corpus {
        let in_a = is_member(partition, &ex.values, Domain::A);
        let in_b = is_member(partition, &ex.values, Domain::B);
        if in_a && in_b {
            overlap_ids.push(ex.id.clone());
        }
        if in_a {
            a.push(ex.clone());
        }
        if in_b {
            b.push(ex.clone());
        }
        if !in_a && !in_b {
            unmatched += 1;
        }
    }

    let mut warnings = Vec::new();
    if a.is_empty() {
        warnings.push("domain A is empty: no example matched its membership predicate".into());
    }
    if b.is_empty() {
        warnings.push("domain B is empty: no example matched its membership predicate".into());
    }
    if !overlap_ids.is_empty() {
        warnings.push(format!(
            "{} example(s) match both membership predicates and appear in both domains",
            overlap_ids.len()
        ));
    }

    let manifest = |domain, examples| DomainManifest {
        domain,
        partition_hash: partition_hash.to_string(),
        provenance: Provenance {
            source: source.to_string(),
            filtered_at: None,
        },
        examples,
    };
    Ok(SplitOutcome {
        a: manifest(Domain::A, a),
        b: manifest(Domain::B, b),
        overlap_ids,
        unmatched,
        warnings,
    })
}

/// Re-checks a manifest: vector validity, id uniqueness, membership.
pub fn verify_manifest(
    manifest: &DomainManifest,
    schema: &AttributeSchema,
    partition: &AttributePartition,
) -> ValidationResult {
    let mut result = ValidationResult::default();
    let mut seen: HashSet<&str> = HashSet::with_capacity(manifest.examples.len());
    let constraints = partition.membership_constraints(manifest.domain);
    for ex in &manifest.examples {
        if !seen.insert(ex.id.as_str()) {
            result.push(Violation::on_example(&ex.id, "duplicate id"));
        }
        if let Err(e) = schema.check_vector(&ex.values) {
            result.push(Violation::on_example(&ex.id, e.to_string()));
            continue;
        }
        for &(k, code) in &constraints {
            if ex.values[k].code() != Some(code) {
                result.push(Violation::on_example(
                    &ex.id,
                    format!(
                        "attribute '{}' must be {} in domain {}",
                        schema.name_of(k),
                        schema.render_code(k, code),
                        manifest.domain
                    ),
                ));
            }
        }
    }
    result
}

/// Verifies a manifest against a configuration before use: it must be
/// for the expected domain, its partition hash must match, and every
/// example must pass [`verify_manifest`]. Violations are reported as a
/// data error carrying the first few findings.
pub fn check_manifest(
    manifest: &DomainManifest,
    schema: &AttributeSchema,
    partition: &AttributePartition,
    expected_hash: &str,
    expected_domain: Domain,
    label: &str,
) -> Result<()> {
    if manifest.domain != expected_domain {
        return Err(Error::data(format!(
            "{label}: manifest is for domain {}, expected {expected_domain}",
            manifest.domain
        )));
    }
    if manifest.partition_hash != expected_hash {
        return Err(Error::data(format!(
            "{label}: partition hash {} does not match the configured partition ({expected_hash})",
            manifest.partition_hash
        )));
    }
    let result = verify_manifest(manifest, schema, partition);
    if !result.is_ok() {
        let mut lines: Vec<String> = result
            .violations
            .iter()
            .take(5)
            .map(|v| v.to_string())
            .collect();
        if result.violations.len() > 5 {
            lines.push(format!("... {} more", result.violations.len() - 5));
        }
        return Err(Error::data(format!(
            "{label} fails verification: {}",
            lines.join("; ")
        )));
    }
    Ok(())
}

/// Observed variation of one attribute inside one domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ObservedVariation {
    /// Distinct categorical codes seen.
    Codes(BTreeSet<u32>),
    /// Per-channel [min, max] over all examples; empty when no examples.
    Range(Vec<[f64; 2]>),
}

impl ObservedVariation {
    pub fn varies(&self) -> bool {
        match self {
            ObservedVariation::Codes(set) => set.len() > 1,
            ObservedVariation::Range(chans) => chans.iter().any(|[lo, hi]| lo < hi),
        }
    }
}

/// Declared-role vs observed-variation summary for one attribute.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeVariation {
    pub attribute: String,
    pub in_a: ObservedVariation,
    pub in_b: ObservedVariation,
    pub varies_in_a: bool,
    pub varies_in_b: bool,
}

/// Per-attribute variation across both manifests plus warnings where the
/// observation contradicts the declared role.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariationSummary {
    pub attributes: Vec<AttributeVariation>,
    pub warnings: Vec<String>,
}

fn observe(schema: &AttributeSchema, examples: &[LabeledExample], k: usize) -> ObservedVariation {
    match schema.attrs()[k].kind {
        AttributeKind::Categorical { .. } => {
            let codes = examples
                .iter()
                .filter_map(|ex| ex.values[k].code())
                .collect();
            ObservedVariation::Codes(codes)
        }
        AttributeKind::Continuous { channels } => {
            let mut range: Vec<[f64; 2]> = Vec::new();
            for ex in examples {
                if let AttributeValue::Continuous(v) = &ex.values[k] {
                    if range.is_empty() {
                        range = v.iter().map(|&x| [x, x]).collect();
                    } else {
                        for (slot, &x) in range.iter_mut().zip(v) {
                            slot[0] = slot[0].min(x);
                            slot[1] = slot[1].max(x);
                        }
                    }
                }
            }
            let _ = channels;
            ObservedVariation::Range(range)
        }
    }
}

/// Compares observed per-domain variation with each attribute's declared
/// role. Warnings fire only where a domain has at least two examples, so
/// degenerate manifests do not drown the report.
pub fn split_stats(
    manifest_a: &DomainManifest,
    manifest_b: &DomainManifest,
    schema: &AttributeSchema,
    partition: &AttributePartition,
) -> VariationSummary {
    let mut attributes = Vec::with_capacity(schema.len());
    let mut warnings = Vec::new();
    let enough_a = manifest_a.examples.len() >= 2;
    let enough_b = manifest_b.examples.len() >= 2;
    for k in 0..schema.len() {
        let in_a = observe(schema, &manifest_a.examples, k);
        let in_b = observe(schema, &manifest_b.examples, k);
        let varies_in_a = in_a.varies();
        let varies_in_b = in_b.varies();
        let name = schema.name_of(k);
        if let Ok(role) = partition.role_of(k) {
            match role {
                Role::Shared => {
                    if enough_a && !varies_in_a {
                        warnings.push(format!("'{name}' declared shared but constant in A"));
                    }
                    if enough_b && !varies_in_b {
                        warnings.push(format!("'{name}' declared shared but constant in B"));
                    }
                }
                Role::SpecificA => {
                    if enough_a && !varies_in_a {
                        warnings.push(format!("'{name}' declared A-specific but constant in A"));
                    }
                    if varies_in_b {
                        warnings.push(format!("'{name}' declared A-specific but varies in B"));
                    }
                }
                Role::SpecificB => {
                    if enough_b && !varies_in_b {
                        warnings.push(format!("'{name}' declared B-specific but constant in B"));
                    }
                    if varies_in_a {
                        warnings.push(format!("'{name}' declared B-specific but varies in A"));
                    }
                }
                Role::DomainSplitting => {
                    if varies_in_a || varies_in_b {
                        warnings.push(format!(
                            "'{name}' is domain-splitting but varies within a domain"
                        ));
                    }
                }
            }
        }
        attributes.push(AttributeVariation {
            attribute: name.to_string(),
            in_a,
            in_b,
            varies_in_a,
            varies_in_b,
        });
    }
    VariationSummary {
        attributes,
        warnings,
    }
}

/// Drops examples that do not have exactly one attribute of `attrs`
/// asserted (nonzero code). Returns the kept examples and dropped ids.
/// Used to clean label inconsistencies before splitting, e.g. requiring
/// exactly one asserted hair color.
pub fn require_one_hot(
    corpus: &[LabeledExample],
    schema: &AttributeSchema,
    attrs: &[usize],
) -> Result<(Vec<LabeledExample>, Vec<String>)> {
    for &k in attrs {
        let decl = schema.attr(k)?;
        if !decl.is_categorical() {
            return Err(Error::config(format!(
                "one-hot filter attribute '{}' must be categorical",
                decl.name
            )));
        }
    }
    let mut kept = Vec::new();
    let mut dropped = Vec::new();
    for ex in corpus {
        let asserted = attrs
            .iter()
            .filter(|&&k| ex.values.get(k).and_then(|v| v.code()).unwrap_or(0) != 0)
            .count();
        if asserted == 1 {
            kept.push(ex.clone());
        } else {
            dropped.push(ex.id.clone());
        }
    }
    Ok((kept, dropped))
}

/// Counts per attribute value for quick inspection; categorical only.
pub fn value_histogram(examples: &[LabeledExample], k: usize) -> BTreeMap<u32, usize> {
    let mut out = BTreeMap::new();
    for ex in examples {
        if let Some(code) = ex.values.get(k).and_then(|v| v.code()) {
            *out.entry(code).or_insert(0) += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::builtin_config;

    // shape, object_hue, floor_hue, wall_hue, size, orientation
    fn shapes_example(id: &str, codes: [u32; 6]) -> LabeledExample {
        LabeledExample::new(id, codes.iter().map(|&c| AttributeValue::cat(c)).collect())
    }

    #[test]
    fn two_example_corpus_splits_one_each() {
        let cfg = builtin_config("3dshapes").unwrap();
        // First example: size=5 (code 4), orientation=-30 (code 0) -> domain A.
        // Second: floor=red (0), wall=blue (7) -> domain B.
        let corpus = vec![
            shapes_example("a0", [0, 3, 2, 5, 4, 0]),
            shapes_example("b0", [1, 6, 0, 7, 2, 9]),
        ];
        let split = build_split(&corpus, &cfg.schema, &cfg.partition, "h", "test").unwrap();
        assert_eq!(split.a.examples.len(), 1);
        assert_eq!(split.a.examples[0].id, "a0");
        assert_eq!(split.b.examples.len(), 1);
        assert_eq!(split.b.examples[0].id, "b0");
        assert_eq!(split.unmatched, 0);
        assert!(split.overlap_ids.is_empty());
    }

    #[test]
    fn empty_domain_is_a_warning_not_an_error() {
        let cfg = builtin_config("3dshapes").unwrap();
        let corpus = vec![shapes_example("a0", [0, 0, 1, 1, 4, 0])];
        let split = build_split(&corpus, &cfg.schema, &cfg.partition, "h", "test").unwrap();
        assert!(split.b.examples.is_empty());
        assert!(split
            .warnings
            .iter()
            .any(|w| w.contains("domain B is empty")));
    }

    #[test]
    fn overlap_lands_in_both_domains_and_is_reported() {
        let cfg = builtin_config("3dshapes").unwrap();
        // Satisfies both predicates: size/orientation at A-fixed values
        // and floor/wall at B-fixed values.
        let corpus = vec![shapes_example("both", [0, 0, 0, 7, 4, 0])];
        let split = build_split(&corpus, &cfg.schema, &cfg.partition, "h", "test").unwrap();
        assert_eq!(split.a.examples.len(), 1);
        assert_eq!(split.b.examples.len(), 1);
        assert_eq!(split.overlap_ids, vec!["both".to_string()]);
        assert!(split.warnings.iter().any(|w| w.contains("both domains")));
    }

    #[test]
    fn malformed_vector_errors_with_id() {
        let cfg = builtin_config("3dshapes").unwrap();
        let corpus = vec![shapes_example("bad", [9, 0, 0, 0, 0, 0])];
        let err = build_split(&corpus, &cfg.schema, &cfg.partition, "h", "test").unwrap_err();
        assert!(err.to_string().contains("bad"));
    }

    #[test]
    fn duplicate_corpus_id_is_rejected() {
        let cfg = builtin_config("3dshapes").unwrap();
        let corpus = vec![
            shapes_example("x", [0, 0, 1, 1, 4, 0]),
            shapes_example("x", [1, 0, 1, 1, 4, 0]),
        ];
        assert!(build_split(&corpus, &cfg.schema, &cfg.partition, "h", "test").is_err());
    }

    #[test]
    fn build_split_is_idempotent_on_its_own_output() {
        let cfg = builtin_config("3dshapes").unwrap();
        let corpus = vec![
            shapes_example("a0", [0, 3, 2, 5, 4, 0]),
            shapes_example("a1", [2, 1, 9, 9, 4, 0]),
            shapes_example("b0", [1, 6, 0, 7, 2, 9]),
        ];
        let split = build_split(&corpus, &cfg.schema, &cfg.partition, "h", "test").unwrap();
        let again =
            build_split(&split.a.examples, &cfg.schema, &cfg.partition, "h", "test").unwrap();
        assert_eq!(again.a.examples, split.a.examples);
        assert!(again.b.examples.is_empty());
    }

    #[test]
    fn verify_catches_wrong_fixed_value_and_duplicate_id() {
        let cfg = builtin_config("3dshapes").unwrap();
        let manifest = DomainManifest {
            domain: Domain::B,
            partition_hash: "h".into(),
            provenance: Provenance::default(),
            examples: vec![
                // floor_hue = orange (1), must be red in domain B.
                shapes_example("m0", [0, 0, 1, 7, 2, 3]),
                shapes_example("m1", [0, 0, 0, 7, 2, 3]),
                shapes_example("m1", [0, 0, 0, 7, 2, 3]),
            ],
        };
        let result = verify_manifest(&manifest, &cfg.schema, &cfg.partition);
        assert!(result
            .violations
            .iter()
            .any(|v| v.example.as_deref() == Some("m0") && v.rule.contains("floor_hue")));
        assert!(result
            .violations
            .iter()
            .any(|v| v.example.as_deref() == Some("m1") && v.rule.contains("duplicate id")));
    }

    #[test]
    fn verified_split_output_passes_verify() {
        let cfg = builtin_config("3dshapes").unwrap();
        let corpus = vec![
            shapes_example("a0", [0, 3, 2, 5, 4, 0]),
            shapes_example("b0", [1, 6, 0, 7, 2, 9]),
        ];
        let split = build_split(&corpus, &cfg.schema, &cfg.partition, "h", "test").unwrap();
        assert!(verify_manifest(&split.a, &cfg.schema, &cfg.partition).is_ok());
        assert!(verify_manifest(&split.b, &cfg.schema, &cfg.partition).is_ok());
    }

    #[test]
    fn stats_flag_variation_by_role() {
        let cfg = builtin_config("3dshapes").unwrap();
        let corpus = vec![
            shapes_example("a0", [0, 3, 2, 5, 4, 0]),
            shapes_example("a1", [2, 3, 9, 9, 4, 0]),
            shapes_example("b0", [1, 6, 0, 7, 2, 9]),
            shapes_example("b1", [3, 6, 0, 7, 5, 1]),
        ];
        let split = build_split(&corpus, &cfg.schema, &cfg.partition, "h", "test").unwrap();
        let stats = split_stats(&split.a, &split.b, &cfg.schema, &cfg.partition);
        let by_name = |n: &str| stats.attributes.iter().find(|a| a.attribute == n).unwrap();
        assert!(by_name("shape").varies_in_a && by_name("shape").varies_in_b);
        assert!(by_name("floor_hue").varies_in_a && !by_name("floor_hue").varies_in_b);
        assert!(!by_name("size").varies_in_a && by_name("size").varies_in_b);
        // object_hue is shared but constant within each domain here.
        assert!(stats
            .warnings
            .iter()
            .any(|w| w.contains("object_hue") && w.contains("constant in A")));
    }

    #[test]
    fn one_hot_filter_drops_zero_and_multi_asserted() {
        let cfg = builtin_config("celeba_d").unwrap();
        let m = cfg.schema.len();
        let hair: Vec<usize> = ["Black_Hair", "Blond_Hair", "Brown_Hair", "Gray_Hair"]
            .iter()
            .map(|n| cfg.schema.require_index(n).unwrap())
            .collect();
        let mut zero = vec![AttributeValue::cat(0); m];
        zero[hair[1]] = AttributeValue::cat(1);
        let one_hot = LabeledExample::new("ok", zero.clone());
        let mut none = vec![AttributeValue::cat(0); m];
        none[cfg.schema.require_index("Male").unwrap()] = AttributeValue::cat(1);
        let no_hair = LabeledExample::new("none", none);
        let mut two = zero;
        two[hair[2]] = AttributeValue::cat(1);
        let two_hair = LabeledExample::new("two", two);
        let (kept, dropped) =
            require_one_hot(&[one_hot, no_hair, two_hair], &cfg.schema, &hair).unwrap();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].id, "ok");
        assert_eq!(dropped, vec!["none".to_string(), "two".to_string()]);
    }
}
