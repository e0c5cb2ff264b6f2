//! Disentanglement metrics over translation triplets.
//!
//! Every metric is a macro-average over attributes of a per-attribute
//! conditional match rate: translation quality conditions on the fixed
//! target attributes differing between input and guidance, content
//! preservation on shared attributes differing, style transfer on
//! target-specific attributes differing, and bias on attributes agreeing
//! (where any change is an unforced error). Rates are kept as integer
//! counters and divided once at the end, so results are bit-identical
//! under triplet reordering and code relabeling.
//!
//! Attributes whose conditioning set is empty are excluded from the
//! macro-average and reported as undefined; they are never coerced to 0
//! or 100, which would bias the average.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::schema::{
    AttributePartition, AttributeSchema, AttributeValue, Direction, Role, ValidationResult,
    Violation,
};
use crate::splitter::is_member;

/// One evaluated translation: input attributes, guidance attributes and
/// the attributes measured on the translated output. The optional `_gt`
/// vectors carry ground-truth labels when the main vectors come from an
/// attribute regressor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranslationTriplet {
    pub direction: Direction,
    pub y_a: Vec<AttributeValue>,
    pub y_b: Vec<AttributeValue>,
    pub y_hat: Vec<AttributeValue>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y_a_gt: Option<Vec<AttributeValue>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub y_b_gt: Option<Vec<AttributeValue>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub a_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub b_id: Option<String>,
}

impl TranslationTriplet {
    pub fn new(
        direction: Direction,
        y_a: Vec<AttributeValue>,
        y_b: Vec<AttributeValue>,
        y_hat: Vec<AttributeValue>,
    ) -> Self {
        TranslationTriplet {
            direction,
            y_a,
            y_b,
            y_hat,
            y_a_gt: None,
            y_b_gt: None,
            a_id: None,
            b_id: None,
        }
    }
}

/// Which vectors to treat as the reference input/guidance labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LabelSource {
    /// Use y_a and y_b as given (they may be regressor predictions).
    AsGiven,
    /// Use y_a_gt and y_b_gt; predictions remain only in y_hat.
    GroundTruth,
}

/// Evaluation knobs.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EvalOptions {
    pub label_source: LabelSource,
    /// Bias percentage above which a report row is flagged low-confidence.
    pub bias_threshold: f64,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            label_source: LabelSource::AsGiven,
            bias_threshold: 30.0,
        }
    }
}

/// The attribute vector a perfect translator would produce: shared
/// attributes from the input, target-specific attributes from the
/// guidance, source-specific attributes and the domain-splitting
/// attribute at the target domain's fixed values.
pub fn perfect_attributes(
    schema: &AttributeSchema,
    partition: &AttributePartition,
    direction: Direction,
    y_a: &[AttributeValue],
    y_b: &[AttributeValue],
) -> Result<Vec<AttributeValue>> {
    schema.check_vector(y_a)?;
    schema.check_vector(y_b)?;
    let target = direction.target();
    let mut out = Vec::with_capacity(schema.len());
    for k in 0..schema.len() {
        let role = partition.role_of(k)?;
        let value = match (role, direction) {
            (Role::Shared, _) => y_a[k].clone(),
            (Role::SpecificB, Direction::A2B) | (Role::SpecificA, Direction::B2A) => y_b[k].clone(),
            (Role::SpecificA, Direction::A2B)
            | (Role::SpecificB, Direction::B2A)
            | (Role::DomainSplitting, _) => {
                AttributeValue::Categorical(partition.fixed_value(target, k)?)
            }
        };
        out.push(value);
    }
    Ok(out)
}

/// Mean absolute per-channel difference between two continuous values.
pub fn continuous_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let sum: f64 = a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum();
    sum / a.len() as f64
}

/// Exact equality; continuous values compare componentwise.
pub fn values_equal(a: &AttributeValue, b: &AttributeValue) -> bool {
    match (a, b) {
        (AttributeValue::Categorical(x), AttributeValue::Categorical(y)) => x == y,
        (AttributeValue::Continuous(x), AttributeValue::Continuous(y)) => {
            x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p == q)
        }
        _ => false,
    }
}

/// Whether the test value counts as matching the reference. Categorical
/// values match on exact equality. A continuous value matches when it is
/// strictly closer to the reference than to the competing reference
/// `v_other`; ties count as mismatch so an equidistant output is never
/// credited.
pub fn attribute_match(
    schema: &AttributeSchema,
    k: usize,
    v_test: &AttributeValue,
    v_ref: &AttributeValue,
    v_other: Option<&AttributeValue>,
) -> Result<bool> {
    schema.check_value(k, v_test)?;
    schema.check_value(k, v_ref)?;
    match (v_test, v_ref) {
        (AttributeValue::Categorical(t), AttributeValue::Categorical(r)) => Ok(t == r),
        (AttributeValue::Continuous(t), AttributeValue::Continuous(r)) => {
            let other = match v_other {
                Some(AttributeValue::Continuous(o)) => o,
                _ => {
                    return Err(Error::data(format!(
                        "attribute '{}': continuous match needs the competing reference",
                        schema.name_of(k)
                    )))
                }
            };
            schema.check_value(k, v_other.unwrap())?;
            Ok(continuous_distance(t, r) < continuous_distance(t, other))
        }
        _ => Err(Error::data(format!(
            "attribute '{}': mixed value kinds in comparison",
            schema.name_of(k)
        ))),
    }
}

/// Integer conditional counter: of `conditioned` triplets where the
/// conditioning event held, `matched` satisfied the success predicate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CondCounter {
    pub conditioned: u64,
    pub matched: u64,
}

impl CondCounter {
    pub fn observe(&mut self, success: bool) {
        self.conditioned += 1;
        if success {
            self.matched += 1;
        }
    }

    pub fn merge(&mut self, other: &CondCounter) {
        self.conditioned += other.conditioned;
        self.matched += other.matched;
    }

    /// Rate in percent; None when the conditioning set is empty.
    pub fn rate_percent(&self) -> Option<f64> {
        if self.conditioned == 0 {
            None
        } else {
            Some(self.matched as f64 / self.conditioned as f64 * 100.0)
        }
    }
}

/// Per-attribute conditional score with its conditioning-set size.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeScore {
    pub attribute: usize,
    pub name: String,
    pub conditioned: u64,
    pub matched: u64,
    /// None when conditioned = 0: the score is undefined, not 0 or 100.
    pub rate_percent: Option<f64>,
}

/// A single direction's metric: macro-average over the defined
/// per-attribute rates, in percent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionalMetric {
    pub direction: Direction,
    pub value_percent: f64,
    pub per_attribute: Vec<AttributeScore>,
}

fn macro_average(
    direction: Direction,
    schema: &AttributeSchema,
    attrs: &[usize],
    counters: &[CondCounter],
    metric_name: &str,
) -> Result<DirectionalMetric> {
    let mut per_attribute = Vec::with_capacity(attrs.len());
    let mut sum = 0.0;
    let mut defined = 0u64;
    for (&k, c) in attrs.iter().zip(counters) {
        let rate = c.rate_percent();
        if let Some(r) = rate {
            sum += r;
            defined += 1;
        }
        per_attribute.push(AttributeScore {
            attribute: k,
            name: schema.name_of(k).to_string(),
            conditioned: c.conditioned,
            matched: c.matched,
            rate_percent: rate,
        });
    }
    if defined == 0 {
        return Err(Error::undefined(format!(
            "{metric_name} ({direction}): every conditioning set is empty"
        )));
    }
    Ok(DirectionalMetric {
        direction,
        value_percent: sum / defined as f64,
        per_attribute,
    })
}

enum SuccessRule {
    EqualsPerfect,
    DiffersFromPerfect,
    EqualsGuidance,
    MatchesInput,
}

fn reference_vectors(
    triplet: &TranslationTriplet,
    label_source: LabelSource,
) -> Result<(&[AttributeValue], &[AttributeValue])> {
    match label_source {
        LabelSource::AsGiven => Ok((&triplet.y_a, &triplet.y_b)),
        LabelSource::GroundTruth => {
            let a = triplet.y_a_gt.as_deref().ok_or_else(|| {
                Error::data("ground-truth labels requested but y_a_gt is missing")
            })?;
            let b = triplet.y_b_gt.as_deref().ok_or_else(|| {
                Error::data("ground-truth labels requested but y_b_gt is missing")
            })?;
            Ok((a, b))
        }
    }
}

/// Folds one direction's triplets into per-attribute counters.
/// `condition_on_equal` selects the bias conditioning (y_a,k = y_b,k)
/// instead of the default difference conditioning.
#[allow(clippy::too_many_arguments)]
fn fold_metric(
    triplets: &[TranslationTriplet],
    schema: &AttributeSchema,
    partition: &AttributePartition,
    label_source: LabelSource,
    attrs: &[usize],
    condition_on_equal: bool,
    rule: SuccessRule,
) -> Result<Vec<CondCounter>> {
    let direction = triplets
        .first()
        .ok_or_else(|| Error::data("no triplets to evaluate"))?
        .direction;
    let mut counters = vec![CondCounter::default(); attrs.len()];
    for triplet in triplets {
        if triplet.direction != direction {
            return Err(Error::data("mixed directions in a single-direction metric"));
        }
        let (y_a, y_b) = reference_vectors(triplet, label_source)?;
        schema.check_vector(y_a)?;
        schema.check_vector(y_b)?;
        schema.check_vector(&triplet.y_hat)?;
        let perfect = perfect_attributes(schema, partition, direction, y_a, y_b)?;
        for (slot, &k) in counters.iter_mut().zip(attrs) {
            let differs = !values_equal(&y_a[k], &y_b[k]);
            if differs == condition_on_equal {
                continue;
            }
            let success = match rule {
                SuccessRule::EqualsPerfect => values_equal(&triplet.y_hat[k], &perfect[k]),
                SuccessRule::DiffersFromPerfect => !values_equal(&triplet.y_hat[k], &perfect[k]),
                SuccessRule::EqualsGuidance => values_equal(&triplet.y_hat[k], &y_b[k]),
                SuccessRule::MatchesInput => {
                    attribute_match(schema, k, &triplet.y_hat[k], &y_a[k], Some(&y_b[k]))?
                }
            };
            slot.observe(success);
        }
    }
    Ok(counters)
}

/// Q_tr for one direction: over the fixed target attributes (the source
/// domain's specific set plus the domain-splitting attribute when
/// present), the conditional rate of the output carrying the perfect
/// value given that input and guidance disagreed.
pub fn translation_quality(
    triplets: &[TranslationTriplet],
    schema: &AttributeSchema,
    partition: &AttributePartition,
    label_source: LabelSource,
) -> Result<DirectionalMetric> {
    let direction = triplets
        .first()
        .ok_or_else(|| Error::data("no triplets to evaluate"))?
        .direction;
    let attrs = partition.fixed_target_attrs(direction);
    if attrs.is_empty() {
        return Err(Error::undefined(format!(
            "translation quality ({direction}): no fixed target attributes"
        )));
    }
    let counters = fold_metric(
        triplets,
        schema,
        partition,
        label_source,
        &attrs,
        false,
        SuccessRule::EqualsPerfect,
    )?;
    macro_average(direction, schema, &attrs, &counters, "translation quality")
}

/// D_c for one direction: over shared attributes, the conditional rate
/// of the output matching the input given that input and guidance
/// disagreed. Continuous attributes match by the nearest-reference rule.
pub fn content_preservation(
    triplets: &[TranslationTriplet],
    schema: &AttributeSchema,
    partition: &AttributePartition,
    label_source: LabelSource,
) -> Result<DirectionalMetric> {
    let direction = triplets
        .first()
        .ok_or_else(|| Error::data("no triplets to evaluate"))?
        .direction;
    let attrs = partition.shared.clone();
    if attrs.is_empty() {
        return Err(Error::undefined(format!(
            "content preservation ({direction}): no shared attributes"
        )));
    }
    let counters = fold_metric(
        triplets,
        schema,
        partition,
        label_source,
        &attrs,
        false,
        SuccessRule::MatchesInput,
    )?;
    macro_average(direction, schema, &attrs, &counters, "content preservation")
}

/// D_s for one direction: over the target domain's specific attributes,
/// the conditional rate of the output matching the guidance given that
/// input and guidance disagreed.
pub fn style_transfer(
    triplets: &[TranslationTriplet],
    schema: &AttributeSchema,
    partition: &AttributePartition,
    label_source: LabelSource,
) -> Result<DirectionalMetric> {
    let direction = triplets
        .first()
        .ok_or_else(|| Error::data("no triplets to evaluate"))?
        .direction;
    let attrs = partition.specific(direction.target()).to_vec();
    if attrs.is_empty() {
        return Err(Error::undefined(format!(
            "style transfer ({direction}): target domain has no specific attributes"
        )));
    }
    let counters = fold_metric(
        triplets,
        schema,
        partition,
        label_source,
        &attrs,
        false,
        SuccessRule::EqualsGuidance,
    )?;
    macro_average(direction, schema, &attrs, &counters, "style transfer")
}

/// Bias over both directions: per direction, over all attributes, the
/// conditional rate of the output differing from the perfect value given
/// that input and guidance agreed (an unforced change). The
/// domain-splitting attribute never satisfies the conditioning because
/// its domain codes differ, so it drops out naturally. Directions are
/// computed separately and averaged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasReport {
    pub value_percent: f64,
    pub a2b: Option<DirectionalMetric>,
    pub b2a: Option<DirectionalMetric>,
}

pub fn bias(
    triplets: &[TranslationTriplet],
    schema: &AttributeSchema,
    partition: &AttributePartition,
    label_source: LabelSource,
) -> Result<BiasReport> {
    if triplets.is_empty() {
        return Err(Error::data("no triplets to evaluate"));
    }
    let attrs: Vec<usize> = (0..schema.len()).collect();
    let mut per_direction: [Option<DirectionalMetric>; 2] = [None, None];
    for (slot, direction) in per_direction.iter_mut().zip(Direction::BOTH) {
        let subset: Vec<TranslationTriplet> = triplets
            .iter()
            .filter(|t| t.direction == direction)
            .cloned()
            .collect();
        if subset.is_empty() {
            continue;
        }
        let counters = fold_metric(
            &subset,
            schema,
            partition,
            label_source,
            &attrs,
            true,
            SuccessRule::DiffersFromPerfect,
        )?;
        match macro_average(direction, schema, &attrs, &counters, "bias") {
            Ok(metric) => *slot = Some(metric),
            Err(Error::MetricUndefined(_)) => {}
            Err(e) => return Err(e),
        }
    }
    let defined: Vec<f64> = per_direction
        .iter()
        .flatten()
        .map(|m| m.value_percent)
        .collect();
    if defined.is_empty() {
        return Err(Error::undefined("bias: every conditioning set is empty"));
    }
    let [a2b, b2a] = per_direction;
    Ok(BiasReport {
        value_percent: defined.iter().sum::<f64>() / defined.len() as f64,
        a2b,
        b2a,
    })
}

/// Cross-direction aggregates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    /// Mean of the two directional content scores.
    pub d_c_mean: f64,
    /// Quarter-sum of both style and both content scores.
    pub d: f64,
    /// Mean of the two directional translation-quality scores.
    pub q_tr_mean: f64,
    pub bias: f64,
    pub bias_threshold: f64,
    pub low_confidence: bool,
}

/// Combines per-direction metrics; both directions must be present.
pub fn aggregate(
    q_tr: (&DirectionalMetric, &DirectionalMetric),
    d_s: (&DirectionalMetric, &DirectionalMetric),
    d_c: (&DirectionalMetric, &DirectionalMetric),
    bias: &BiasReport,
    bias_threshold: f64,
) -> Result<Aggregates> {
    for (m, name) in [(&q_tr, "Q_tr"), (&d_s, "D_s"), (&d_c, "D_c")] {
        if m.0.direction == m.1.direction {
            return Err(Error::data(format!(
                "{name}: need both directions, got one twice"
            )));
        }
    }
    let d_c_mean = (d_c.0.value_percent + d_c.1.value_percent) / 2.0;
    let d = (d_s.0.value_percent + d_s.1.value_percent + d_c.0.value_percent + d_c.1.value_percent)
        / 4.0;
    let q_tr_mean = (q_tr.0.value_percent + q_tr.1.value_percent) / 2.0;
    Ok(Aggregates {
        d_c_mean,
        d,
        q_tr_mean,
        bias: bias.value_percent,
        bias_threshold,
        low_confidence: bias.value_percent > bias_threshold,
    })
}

/// Full evaluation of a triplet collection containing both directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub q_tr_a2b: DirectionalMetric,
    pub q_tr_b2a: DirectionalMetric,
    pub d_s_a2b: DirectionalMetric,
    pub d_s_b2a: DirectionalMetric,
    pub d_c_a2b: DirectionalMetric,
    pub d_c_b2a: DirectionalMetric,
    pub bias: BiasReport,
    pub aggregates: Aggregates,
    pub triplets_a2b: u64,
    pub triplets_b2a: u64,
}

pub fn compute_report(
    triplets: &[TranslationTriplet],
    schema: &AttributeSchema,
    partition: &AttributePartition,
    options: &EvalOptions,
) -> Result<MetricReport> {
    let a2b: Vec<TranslationTriplet> = triplets
        .iter()
        .filter(|t| t.direction == Direction::A2B)
        .cloned()
        .collect();
    let b2a: Vec<TranslationTriplet> = triplets
        .iter()
        .filter(|t| t.direction == Direction::B2A)
        .cloned()
        .collect();
    if a2b.is_empty() || b2a.is_empty() {
        return Err(Error::data(format!(
            "need triplets in both directions, got {} A2B and {} B2A",
            a2b.len(),
            b2a.len()
        )));
    }
    let src = options.label_source;
    let q_tr_a2b = translation_quality(&a2b, schema, partition, src)?;
    let q_tr_b2a = translation_quality(&b2a, schema, partition, src)?;
    let d_s_a2b = style_transfer(&a2b, schema, partition, src)?;
    let d_s_b2a = style_transfer(&b2a, schema, partition, src)?;
    let d_c_a2b = content_preservation(&a2b, schema, partition, src)?;
    let d_c_b2a = content_preservation(&b2a, schema, partition, src)?;
    let bias_report = bias(triplets, schema, partition, src)?;
    let aggregates = aggregate(
        (&q_tr_a2b, &q_tr_b2a),
        (&d_s_a2b, &d_s_b2a),
        (&d_c_a2b, &d_c_b2a),
        &bias_report,
        options.bias_threshold,
    )?;
    Ok(MetricReport {
        q_tr_a2b,
        q_tr_b2a,
        d_s_a2b,
        d_s_b2a,
        d_c_a2b,
        d_c_b2a,
        bias: bias_report,
        aggregates,
        triplets_a2b: a2b.len() as u64,
        triplets_b2a: b2a.len() as u64,
    })
}

/// Checks triplet vectors against the schema and the membership
/// predicates of their direction's source/target domains. Violations are
/// reported, not fatal: regressed attribute vectors may legitimately
/// stray outside their domain.
pub fn verify_triplets(
    triplets: &[TranslationTriplet],
    schema: &AttributeSchema,
    partition: &AttributePartition,
) -> ValidationResult {
    let mut result = ValidationResult::default();
    for (i, t) in triplets.iter().enumerate() {
        let label = t.a_id.clone().unwrap_or_else(|| format!("triplet {i}"));
        for (vec, what) in [(&t.y_a, "y_a"), (&t.y_b, "y_b"), (&t.y_hat, "y_hat")] {
            if let Err(e) = schema.check_vector(vec) {
                result.push(Violation::on_example(&label, format!("{what}: {e}")));
            }
        }
        if schema.check_vector(&t.y_a).is_ok()
            && !is_member(partition, &t.y_a, t.direction.source())
        {
            result.push(Violation::on_example(
                &label,
                format!("y_a is not a member of domain {}", t.direction.source()),
            ));
        }
        if schema.check_vector(&t.y_b).is_ok()
            && !is_member(partition, &t.y_b, t.direction.target())
        {
            result.push(Violation::on_example(
                &label,
                format!("y_b is not a member of domain {}", t.direction.target()),
            ));
        }
    }
    result
}

/// Pose preservation: per-channel mean absolute difference between the
/// output's pose and the input's, their mean D_p, and the pose match
/// score PM (fraction of triplets whose output pose is strictly closer
/// to the input pose than to the guidance pose; ties do not count).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoseReport {
    pub attribute: String,
    pub channel_mean_abs_delta: Vec<f64>,
    pub d_p: f64,
    pub pose_match: f64,
    pub triplets: u64,
}

pub fn pose_report(
    triplets: &[TranslationTriplet],
    schema: &AttributeSchema,
    pose_attr: usize,
) -> Result<PoseReport> {
    let decl = schema.attr(pose_attr)?;
    let channels = match decl.kind {
        crate::schema::AttributeKind::Continuous { channels } => channels,
        _ => {
            return Err(Error::config(format!(
                "pose attribute '{}' must be continuous",
                decl.name
            )))
        }
    };
    if triplets.is_empty() {
        return Err(Error::data("no triplets to evaluate"));
    }
    let mut sums = vec![0.0f64; channels];
    let mut closer = 0u64;
    for t in triplets {
        let get = |v: &[AttributeValue]| -> Result<Vec<f64>> {
            match v.get(pose_attr) {
                Some(AttributeValue::Continuous(x)) if x.len() == channels => Ok(x.clone()),
                _ => Err(Error::data(format!(
                    "triplet lacks the {} pose channels of '{}'",
                    channels, decl.name
                ))),
            }
        };
        let input = get(&t.y_a)?;
        let guidance = get(&t.y_b)?;
        let output = get(&t.y_hat)?;
        for ((slot, o), i) in sums.iter_mut().zip(&output).zip(&input) {
            *slot += (o - i).abs();
        }
        if continuous_distance(&output, &input) < continuous_distance(&output, &guidance) {
            closer += 1;
        }
    }
    let n = triplets.len() as f64;
    let channel_mean_abs_delta: Vec<f64> = sums.iter().map(|s| s / n).collect();
    let d_p = channel_mean_abs_delta.iter().sum::<f64>() / channels as f64;
    Ok(PoseReport {
        attribute: decl.name.clone(),
        channel_mean_abs_delta,
        d_p,
        pose_match: closer as f64 / n,
        triplets: triplets.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::builtin_config;
    use crate::schema::{AttributeDecl, DomainSplit};
    use std::collections::BTreeMap;

    fn toy_schema() -> AttributeSchema {
        AttributeSchema::new(vec![
            AttributeDecl::categorical("split", 2),
            AttributeDecl::categorical("shared", 10),
            AttributeDecl::categorical("a_only", 10),
            AttributeDecl::categorical("b_only", 10),
        ])
        .unwrap()
    }

    fn toy_partition() -> AttributePartition {
        AttributePartition {
            domain_splitting: Some(DomainSplit {
                attribute: 0,
                value_a: 0,
                value_b: 1,
            }),
            shared: vec![1],
            specific_a: vec![2],
            specific_b: vec![3],
            fixed_in_b: BTreeMap::from([(2, 8)]),
            fixed_in_a: BTreeMap::from([(3, 2)]),
        }
    }

    fn cats(codes: &[u32]) -> Vec<AttributeValue> {
        codes.iter().map(|&c| AttributeValue::cat(c)).collect()
    }

    #[test]
    fn perfect_vector_follows_roles() {
        let schema = toy_schema();
        let p = toy_partition();
        let y_a = cats(&[0, 5, 7, 2]);
        let y_b = cats(&[1, 9, 8, 4]);
        let star = perfect_attributes(&schema, &p, Direction::A2B, &y_a, &y_b).unwrap();
        assert_eq!(star, cats(&[1, 5, 8, 4]));
        // Reverse direction: roles of the two domains swap.
        let star_rev = perfect_attributes(&schema, &p, Direction::B2A, &y_b, &y_a).unwrap();
        assert_eq!(star_rev, cats(&[0, 9, 7, 2]));
    }

    #[test]
    fn perfect_vector_on_shapes() {
        let cfg = builtin_config("3dshapes").unwrap();
        let s = &cfg.schema;
        let code =
            |name: &str, label: &str| s.parse_code(s.require_index(name).unwrap(), label).unwrap();
        // Input from A: cube, green object, orange floor, purple wall,
        // size 5, orientation -30.
        let y_a = cats(&[
            code("shape", "cube"),
            code("object_hue", "green"),
            code("floor_hue", "orange"),
            code("wall_hue", "purple"),
            code("size", "5"),
            code("orientation", "-30"),
        ]);
        // Guidance from B: red floor, blue wall, size 7, orientation 0.
        let y_b = cats(&[
            code("shape", "cylinder"),
            code("object_hue", "red"),
            code("floor_hue", "red"),
            code("wall_hue", "blue"),
            code("size", "7"),
            code("orientation", "0"),
        ]);
        let star = perfect_attributes(s, &cfg.partition, Direction::A2B, &y_a, &y_b).unwrap();
        let expected = cats(&[
            code("shape", "cube"),
            code("object_hue", "green"),
            code("floor_hue", "red"),
            code("wall_hue", "blue"),
            code("size", "7"),
            code("orientation", "0"),
        ]);
        assert_eq!(star, expected);
    }

    #[test]
    fn categorical_match_is_equality() {
        let schema = toy_schema();
        let three = AttributeValue::cat(3);
        let four = AttributeValue::cat(4);
        assert!(attribute_match(&schema, 1, &three, &three, None).unwrap());
        assert!(!attribute_match(&schema, 1, &four, &three, None).unwrap());
    }

    #[test]
    fn continuous_match_is_strictly_nearer() {
        let schema = AttributeSchema::new(vec![AttributeDecl::continuous("yaw", 1)]).unwrap();
        let test = AttributeValue::cont(10.0);
        let input = AttributeValue::cont(12.0);
        let guidance = AttributeValue::cont(40.0);
        assert!(attribute_match(&schema, 0, &test, &input, Some(&guidance)).unwrap());
        // Equidistant: 25 is 5 away from both 20 and 30.
        let tie_test = AttributeValue::cont(25.0);
        let r1 = AttributeValue::cont(20.0);
        let r2 = AttributeValue::cont(30.0);
        assert!(!attribute_match(&schema, 0, &tie_test, &r1, Some(&r2)).unwrap());
        assert!(attribute_match(&schema, 0, &tie_test, &r1, None).is_err());
    }

    // Q_tr on a partition without a domain-splitting attribute and a
    // single source-specific attribute: 4 triplets, conditioning holds
    // in 3, the output carries the perfect value in 2.
    #[test]
    fn translation_quality_hand_count() {
        let schema = AttributeSchema::new(vec![
            AttributeDecl::categorical("c0", 10),
            AttributeDecl::categorical("c1", 10),
            AttributeDecl::categorical("a_only", 10),
            AttributeDecl::categorical("b_only", 10),
        ])
        .unwrap();
        let p = AttributePartition {
            domain_splitting: None,
            shared: vec![0, 1],
            specific_a: vec![2],
            specific_b: vec![3],
            fixed_in_b: BTreeMap::from([(2, 8)]),
            fixed_in_a: BTreeMap::from([(3, 2)]),
        };
        // Direction A2B: the fixed target attribute is a_only (index 2),
        // whose perfect value is 8. Guidance carries 8 there; input
        // varies. Conditioning y_a[2] != y_b[2] holds when y_a[2] != 8.
        let mk = |input2: u32, hat2: u32| {
            TranslationTriplet::new(
                Direction::A2B,
                cats(&[0, 0, input2, 2]),
                cats(&[0, 1, 8, 4]),
                cats(&[0, 0, hat2, 4]),
            )
        };
        let triplets = vec![
            mk(0, 8), // conditioned, match
            mk(5, 8), // conditioned, match
            mk(7, 3), // conditioned, mismatch
            mk(8, 8), // not conditioned
        ];
        let q = translation_quality(&triplets, &schema, &p, LabelSource::AsGiven).unwrap();
        assert!((q.value_percent - 200.0 / 3.0).abs() < 1e-12);
        assert_eq!(q.per_attribute.len(), 1);
        assert_eq!(q.per_attribute[0].conditioned, 3);
        assert_eq!(q.per_attribute[0].matched, 2);
    }

    // Macro-average vs pooled micro-average must disagree on an
    // asymmetric fixture: attribute k2 with 9/10 and k3 with 0/2 gives
    // macro (90+0)/2 = 45 but pooled 9/12 = 75.
    #[test]
    fn macro_average_not_pooled() {
        let schema = AttributeSchema::new(vec![
            AttributeDecl::categorical("c0", 10),
            AttributeDecl::categorical("b_only", 10),
            AttributeDecl::categorical("a1", 10),
            AttributeDecl::categorical("a2", 10),
        ])
        .unwrap();
        let p = AttributePartition {
            domain_splitting: None,
            shared: vec![0],
            specific_a: vec![2, 3],
            specific_b: vec![1],
            fixed_in_b: BTreeMap::from([(2, 0), (3, 0)]),
            fixed_in_a: BTreeMap::from([(1, 0)]),
        };
        let mk = |a2: u32, a3: u32, hat2: u32, hat3: u32| {
            TranslationTriplet::new(
                Direction::A2B,
                cats(&[0, 0, a2, a3]),
                cats(&[0, 1, 0, 0]),
                cats(&[0, 0, hat2, hat3]),
            )
        };
        let mut triplets = Vec::new();
        // a2: conditioned in 10 triplets, 9 outputs carry the perfect 0.
        // a3: conditioned in the first 2 only, both outputs wrong.
        for i in 0..10 {
            let a3 = if i < 2 { 5 } else { 0 };
            let hat2 = if i == 0 { 7 } else { 0 };
            triplets.push(mk(3, a3, hat2, 9));
        }
        // Two more triplets where a2 is unconditioned.
        triplets.push(mk(0, 0, 0, 9));
        triplets.push(mk(0, 0, 0, 9));
        let q = translation_quality(&triplets, &schema, &p, LabelSource::AsGiven).unwrap();
        let a2_score = q.per_attribute.iter().find(|s| s.name == "a1").unwrap();
        let a3_score = q.per_attribute.iter().find(|s| s.name == "a2").unwrap();
        assert_eq!((a2_score.conditioned, a2_score.matched), (10, 9));
        assert_eq!((a3_score.conditioned, a3_score.matched), (2, 0));
        assert!((q.value_percent - 45.0).abs() < 1e-12);
        let pooled = (a2_score.matched + a3_score.matched) as f64
            / (a2_score.conditioned + a3_score.conditioned) as f64
            * 100.0;
        assert!((q.value_percent - pooled).abs() > 1.0);
    }

    fn toy_triplet(
        direction: Direction,
        y_a: &[u32],
        y_b: &[u32],
        y_hat: &[u32],
    ) -> TranslationTriplet {
        TranslationTriplet::new(direction, cats(y_a), cats(y_b), cats(y_hat))
    }

    fn toy_identity_triplets(guidance: bool) -> Vec<TranslationTriplet> {
        // A examples: split=0, a_only varies, b_only pinned to 2.
        // B examples: split=1, b_only varies, a_only pinned to 8.
        // Some values agree across domains so bias conditioning sets
        // are nonempty: shared 3 appears on both sides, one A example
        // carries a_only=8, one B example carries b_only=2.
        let a_pool = [[0u32, 3, 1, 2], [0, 6, 8, 2], [0, 9, 9, 2]];
        let b_pool = [[1u32, 3, 8, 2], [1, 7, 8, 6], [1, 1, 8, 9]];
        let mut out = Vec::new();
        for a in &a_pool {
            for b in &b_pool {
                let hat = if guidance { *b } else { *a };
                out.push(toy_triplet(Direction::A2B, a, b, &hat));
                let hat = if guidance { *a } else { *b };
                out.push(toy_triplet(Direction::B2A, b, a, &hat));
            }
        }
        out
    }

    #[test]
    fn content_identity_hits_its_pole() {
        let schema = toy_schema();
        let p = toy_partition();
        let triplets = toy_identity_triplets(false);
        let report = compute_report(&triplets, &schema, &p, &EvalOptions::default()).unwrap();
        assert_eq!(report.q_tr_a2b.value_percent, 0.0);
        assert_eq!(report.q_tr_b2a.value_percent, 0.0);
        assert_eq!(report.d_s_a2b.value_percent, 0.0);
        assert_eq!(report.d_s_b2a.value_percent, 0.0);
        assert_eq!(report.d_c_a2b.value_percent, 100.0);
        assert_eq!(report.d_c_b2a.value_percent, 100.0);
        assert_eq!(report.aggregates.d, 50.0);
        assert_eq!(report.aggregates.d_c_mean, 100.0);
        assert_eq!(report.bias.value_percent, 0.0);
        assert!(!report.aggregates.low_confidence);
    }

    #[test]
    fn guidance_identity_hits_its_pole() {
        let schema = toy_schema();
        let p = toy_partition();
        let triplets = toy_identity_triplets(true);
        let report = compute_report(&triplets, &schema, &p, &EvalOptions::default()).unwrap();
        assert_eq!(report.q_tr_a2b.value_percent, 100.0);
        assert_eq!(report.q_tr_b2a.value_percent, 100.0);
        assert_eq!(report.d_s_a2b.value_percent, 100.0);
        assert_eq!(report.d_s_b2a.value_percent, 100.0);
        assert_eq!(report.d_c_a2b.value_percent, 0.0);
        assert_eq!(report.d_c_b2a.value_percent, 0.0);
        assert_eq!(report.aggregates.d, 50.0);
        assert_eq!(report.bias.value_percent, 0.0);
    }

    #[test]
    fn conditioning_counts_partition_the_triplets() {
        let schema = toy_schema();
        let p = toy_partition();
        let triplets = toy_identity_triplets(false);
        let a2b: Vec<_> = triplets
            .iter()
            .filter(|t| t.direction == Direction::A2B)
            .cloned()
            .collect();
        let n = a2b.len() as u64;
        let q = translation_quality(&a2b, &schema, &p, LabelSource::AsGiven).unwrap();
        let b = bias(&a2b, &schema, &p, LabelSource::AsGiven).unwrap();
        let b_scores = &b.a2b.as_ref().unwrap().per_attribute;
        for score in &q.per_attribute {
            let bias_score = b_scores
                .iter()
                .find(|s| s.attribute == score.attribute)
                .unwrap();
            assert_eq!(score.conditioned + bias_score.conditioned, n);
        }
        // The domain-splitting attribute never satisfies the bias
        // conditioning.
        assert_eq!(b_scores[0].conditioned, 0);
        assert!(b_scores[0].rate_percent.is_none());
    }

    #[test]
    fn undefined_when_all_conditioning_empty() {
        let schema = toy_schema();
        let p = toy_partition();
        // Guidance everywhere equal to input on the shared attribute.
        let t = toy_triplet(Direction::A2B, &[0, 5, 1, 2], &[1, 5, 8, 4], &[1, 5, 8, 4]);
        let err = content_preservation(&[t], &schema, &p, LabelSource::AsGiven).unwrap_err();
        assert!(matches!(err, Error::MetricUndefined(_)));
    }

    #[test]
    fn ground_truth_labels_take_over_when_requested() {
        let schema = toy_schema();
        let p = toy_partition();
        let mut t = toy_triplet(Direction::A2B, &[0, 5, 1, 2], &[1, 9, 8, 4], &[1, 5, 8, 4]);
        // Regressed y_a got the shared attribute wrong; ground truth
        // says it was 9, equal to the guidance, so conditioning drops.
        t.y_a_gt = Some(cats(&[0, 9, 1, 2]));
        t.y_b_gt = Some(cats(&[1, 9, 8, 4]));
        let given = content_preservation(&[t.clone()], &schema, &p, LabelSource::AsGiven).unwrap();
        assert_eq!(given.per_attribute[0].conditioned, 1);
        let err =
            content_preservation(&[t.clone()], &schema, &p, LabelSource::GroundTruth).unwrap_err();
        assert!(matches!(err, Error::MetricUndefined(_)));
        t.y_a_gt = None;
        assert!(matches!(
            content_preservation(&[t], &schema, &p, LabelSource::GroundTruth),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn continuous_content_uses_nearest_rule() {
        let schema = AttributeSchema::new(vec![
            AttributeDecl::continuous("pose", 2),
            AttributeDecl::categorical("a_only", 4),
            AttributeDecl::categorical("b_only", 4),
        ])
        .unwrap();
        let p = AttributePartition {
            domain_splitting: None,
            shared: vec![0],
            specific_a: vec![1],
            specific_b: vec![2],
            fixed_in_b: BTreeMap::from([(1, 0)]),
            fixed_in_a: BTreeMap::from([(2, 0)]),
        };
        let mk = |hat_pose: [f64; 2]| {
            TranslationTriplet::new(
                Direction::A2B,
                vec![
                    AttributeValue::Continuous(vec![0.0, 0.0]),
                    AttributeValue::cat(1),
                    AttributeValue::cat(0),
                ],
                vec![
                    AttributeValue::Continuous(vec![10.0, 10.0]),
                    AttributeValue::cat(0),
                    AttributeValue::cat(2),
                ],
                vec![
                    AttributeValue::Continuous(hat_pose.to_vec()),
                    AttributeValue::cat(0),
                    AttributeValue::cat(2),
                ],
            )
        };
        let near_input = mk([1.0, 2.0]);
        let near_guidance = mk([9.0, 8.0]);
        let tie = mk([5.0, 5.0]);
        let d = content_preservation(
            &[near_input, near_guidance, tie],
            &schema,
            &p,
            LabelSource::AsGiven,
        )
        .unwrap();
        // Only the first output is strictly closer to the input.
        assert!((d.value_percent - 100.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn pose_report_identity_and_swap_poles() {
        let schema = AttributeSchema::new(vec![AttributeDecl::continuous("pose", 3)]).unwrap();
        let input = vec![AttributeValue::Continuous(vec![10.0, 0.0, -5.0])];
        let guidance = vec![AttributeValue::Continuous(vec![40.0, 10.0, 5.0])];
        let keep = TranslationTriplet::new(
            Direction::A2B,
            input.clone(),
            guidance.clone(),
            input.clone(),
        );
        let r = pose_report(&[keep], &schema, 0).unwrap();
        assert_eq!(r.d_p, 0.0);
        assert_eq!(r.pose_match, 1.0);
        let swap = TranslationTriplet::new(
            Direction::A2B,
            input.clone(),
            guidance.clone(),
            guidance.clone(),
        );
        let r = pose_report(&[swap], &schema, 0).unwrap();
        assert_eq!(r.pose_match, 0.0);
        assert!((r.d_p - (30.0 + 10.0 + 10.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn shuffled_triplets_give_identical_bits() {
        let schema = toy_schema();
        let p = toy_partition();
        let mut triplets = toy_identity_triplets(false);
        // Deliberately imperfect outputs so rates are strictly inside (0, 100).
        triplets[0].y_hat = cats(&[1, 9, 8, 4]);
        triplets[5].y_hat = cats(&[0, 0, 0, 0]);
        let before = compute_report(&triplets, &schema, &p, &EvalOptions::default()).unwrap();
        triplets.reverse();
        triplets.swap(1, 11);
        let after = compute_report(&triplets, &schema, &p, &EvalOptions::default()).unwrap();
        assert_eq!(before.aggregates.d.to_bits(), after.aggregates.d.to_bits());
        assert_eq!(before.q_tr_a2b, after.q_tr_a2b);
        assert_eq!(before.bias, after.bias);
    }
}
