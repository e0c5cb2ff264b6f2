//! Reference translators in attribute space and their exact expectations.
//!
//! The oracles serve two purposes: they reproduce the naive baselines
//! whose metric values are known poles (content identity, guidance
//! identity, random draws), and they simulate failure modes (style
//! copying of the wrong attribute set, mode collapse, label noise).
//!
//! `expected_metrics_bruteforce` is the independent verification path:
//! it enumerates every (input, guidance) pair and every oracle outcome
//! with its exact probability, and computes each metric's expectation
//! with the same conditioning and macro-averaging rules the streaming
//! implementation uses. Because every metric event involves a single
//! attribute, per-attribute outcome marginals are sufficient even for
//! oracles that draw correlated full vectors.
//!
//! All sampling uses counter-based streams keyed by (seed, direction,
//! purpose, pair index), so generation is deterministic and independent
//! of evaluation order.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{
    continuous_distance, perfect_attributes, values_equal, Aggregates, TranslationTriplet,
};
use crate::rng::SplitMix64;
use crate::schema::{
    AttributeKind, AttributePartition, AttributeSchema, AttributeValue, Direction, Domain,
};
use crate::splitter::DomainManifest;

/// How a domain's attribute vectors are modeled when sampling.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DistributionMode {
    /// Uniform over the observed vectors; preserves correlations.
    JointEmpirical,
    /// Product of per-attribute empirical marginals.
    IndependentMarginals,
}

#[derive(Clone, Debug)]
enum Marginal {
    /// Counts per categorical code.
    Categorical(Vec<u64>),
    /// Observed continuous values, multiplicity preserved.
    Continuous(Vec<Vec<f64>>),
}

/// Empirical distribution of one domain's attribute vectors.
#[derive(Clone, Debug)]
pub struct DomainDistribution {
    pub domain: Domain,
    pub mode: DistributionMode,
    vectors: Vec<Vec<AttributeValue>>,
    marginals: Vec<Marginal>,
}

impl DomainDistribution {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// Probability of each categorical code for attribute `k`.
    pub fn categorical_probs(&self, k: usize) -> Result<Vec<f64>> {
        match &self.marginals[k] {
            Marginal::Categorical(counts) => {
                let total = self.vectors.len() as f64;
                Ok(counts.iter().map(|&c| c as f64 / total).collect())
            }
            Marginal::Continuous(_) => Err(Error::data(format!(
                "attribute {k} is continuous, no categorical marginal"
            ))),
        }
    }

    /// Observed continuous values of attribute `k`, with multiplicity.
    pub fn continuous_pool(&self, k: usize) -> Result<&[Vec<f64>]> {
        match &self.marginals[k] {
            Marginal::Continuous(pool) => Ok(pool),
            Marginal::Categorical(_) => Err(Error::data(format!(
                "attribute {k} is categorical, no continuous pool"
            ))),
        }
    }

    fn sample_marginal(&self, k: usize, rng: &mut SplitMix64) -> AttributeValue {
        match &self.marginals[k] {
            Marginal::Categorical(counts) => {
                let total: u64 = counts.iter().sum();
                let mut draw = rng.below(total);
                for (code, &c) in counts.iter().enumerate() {
                    if draw < c {
                        return AttributeValue::Categorical(code as u32);
                    }
                    draw -= c;
                }
                unreachable!("draw below total")
            }
            Marginal::Continuous(pool) => {
                let idx = rng.below(pool.len() as u64) as usize;
                AttributeValue::Continuous(pool[idx].clone())
            }
        }
    }

    /// Draws one full attribute vector.
    pub fn sample(&self, rng: &mut SplitMix64) -> Vec<AttributeValue> {
        match self.mode {
            DistributionMode::JointEmpirical => {
                let idx = rng.below(self.vectors.len() as u64) as usize;
                self.vectors[idx].clone()
            }
            DistributionMode::IndependentMarginals => (0..self.marginals.len())
                .map(|k| self.sample_marginal(k, rng))
                .collect(),
        }
    }
}

/// Builds the empirical distribution of a manifest's vectors.
pub fn estimate_distribution(
    manifest: &DomainManifest,
    schema: &AttributeSchema,
    mode: DistributionMode,
) -> Result<DomainDistribution> {
    if manifest.examples.is_empty() {
        return Err(Error::data(format!(
            "cannot estimate a distribution from empty domain {} manifest",
            manifest.domain
        )));
    }
    let mut marginals: Vec<Marginal> = schema
        .attrs()
        .iter()
        .map(|decl| match decl.kind {
            AttributeKind::Categorical { cardinality } => {
                Marginal::Categorical(vec![0; cardinality as usize])
            }
            AttributeKind::Continuous { .. } => Marginal::Continuous(Vec::new()),
        })
        .collect();
    let mut vectors = Vec::with_capacity(manifest.examples.len());
    for ex in &manifest.examples {
        schema
            .check_vector(&ex.values)
            .map_err(|e| Error::data(format!("example '{}': {e}", ex.id)))?;
        for (slot, value) in marginals.iter_mut().zip(&ex.values) {
            match (slot, value) {
                (Marginal::Categorical(counts), AttributeValue::Categorical(code)) => {
                    counts[*code as usize] += 1;
                }
                (Marginal::Continuous(pool), AttributeValue::Continuous(v)) => {
                    pool.push(v.clone());
                }
                _ => unreachable!("vector checked against schema"),
            }
        }
        vectors.push(ex.values.clone());
    }
    Ok(DomainDistribution {
        domain: manifest.domain,
        mode,
        vectors,
        marginals,
    })
}

/// The translator simulated in attribute space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum OracleKind {
    /// Output carries the input's attributes unchanged.
    ContentIdentity,
    /// Output carries the guidance's attributes unchanged.
    GuidanceIdentity,
    /// Output drawn from the target domain's distribution.
    RandomTarget,
    /// Fair coin picks a domain, output drawn from its distribution.
    RandomTriplets,
    /// Copies `copied` attributes from the guidance and the rest from
    /// the input, then imposes the target domain's fixed values on the
    /// source-specific and domain-splitting attributes. With `copied`
    /// covering both specific sets this is the perfect translator.
    StyleCopier { copied: Vec<usize> },
    /// Mode collapse: always the same vector.
    ConstantOutput { vector: Vec<AttributeValue> },
    /// Applies `inner`, then independently resamples each attribute to a
    /// different value with probability epsilon (label-noise model).
    Composite {
        epsilon: f64,
        inner: Box<OracleKind>,
    },
}

/// Oracle plus the seed that makes its randomness reproducible.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    pub kind: OracleKind,
    pub seed: u64,
}

impl OracleKind {
    pub fn validate(&self, schema: &AttributeSchema) -> Result<()> {
        match self {
            OracleKind::StyleCopier { copied } => {
                for &k in copied {
                    schema.attr(k)?;
                }
                Ok(())
            }
            OracleKind::ConstantOutput { vector } => schema.check_vector(vector),
            OracleKind::Composite { epsilon, inner } => {
                if !(0.0..=1.0).contains(epsilon) {
                    return Err(Error::config(format!(
                        "noise level {epsilon} outside [0, 1]"
                    )));
                }
                inner.validate(schema)
            }
            _ => Ok(()),
        }
    }

    /// True when the output involves no randomness.
    pub fn is_deterministic(&self) -> bool {
        match self {
            OracleKind::ContentIdentity
            | OracleKind::GuidanceIdentity
            | OracleKind::StyleCopier { .. }
            | OracleKind::ConstantOutput { .. } => true,
            OracleKind::RandomTarget | OracleKind::RandomTriplets => false,
            OracleKind::Composite { epsilon, inner } => *epsilon == 0.0 && inner.is_deterministic(),
        }
    }

    /// Short stable name for reports.
    pub fn name(&self) -> String {
        match self {
            OracleKind::ContentIdentity => "content-identity".into(),
            OracleKind::GuidanceIdentity => "guidance-identity".into(),
            OracleKind::RandomTarget => "random-target".into(),
            OracleKind::RandomTriplets => "random-triplets".into(),
            OracleKind::StyleCopier { .. } => "style-copier".into(),
            OracleKind::ConstantOutput { .. } => "constant".into(),
            OracleKind::Composite { epsilon, inner } => {
                format!("{}+noise{}", inner.name(), epsilon)
            }
        }
    }
}

/// Parses an oracle given as a CLI-style string: `content-identity`,
/// `guidance-identity`, `random-target`, `random-triplets`, `perfect`,
/// `style-copier:attr,attr,...` or `constant:v,v,...` (one value per
/// attribute; continuous channels joined with `;`).
pub fn parse_oracle(
    text: &str,
    schema: &AttributeSchema,
    partition: &AttributePartition,
) -> Result<OracleKind> {
    let kind = match text {
        "content-identity" => OracleKind::ContentIdentity,
        "guidance-identity" => OracleKind::GuidanceIdentity,
        "random-target" => OracleKind::RandomTarget,
        "random-triplets" => OracleKind::RandomTriplets,
        "perfect" => {
            let mut copied: Vec<usize> = partition
                .specific_a
                .iter()
                .chain(&partition.specific_b)
                .copied()
                .collect();
            copied.sort_unstable();
            OracleKind::StyleCopier { copied }
        }
        _ => {
            if let Some(list) = text.strip_prefix("style-copier:") {
                let mut copied = Vec::new();
                for name in list.split(',').filter(|s| !s.is_empty()) {
                    let k = match schema.index_of(name) {
                        Some(k) => k,
                        None => name.parse::<usize>().map_err(|_| {
                            Error::config(format!("style-copier: unknown attribute '{name}'"))
                        })?,
                    };
                    schema.attr(k)?;
                    copied.push(k);
                }
                copied.sort_unstable();
                copied.dedup();
                OracleKind::StyleCopier { copied }
            } else if let Some(list) = text.strip_prefix("constant:") {
                let parts: Vec<&str> = list.split(',').collect();
                if parts.len() != schema.len() {
                    return Err(Error::config(format!(
                        "constant: {} values for {} attributes",
                        parts.len(),
                        schema.len()
                    )));
                }
                let mut vector = Vec::with_capacity(parts.len());
                for (k, part) in parts.iter().enumerate() {
                    let value = match schema.attr(k)?.kind {
                        AttributeKind::Categorical { .. } => {
                            AttributeValue::Categorical(schema.parse_code(k, part)?)
                        }
                        AttributeKind::Continuous { .. } => {
                            let channels: std::result::Result<Vec<f64>, _> =
                                part.split(';').map(str::parse::<f64>).collect();
                            AttributeValue::Continuous(channels.map_err(|e| {
                                Error::config(format!("constant: bad channel value: {e}"))
                            })?)
                        }
                    };
                    vector.push(value);
                }
                OracleKind::ConstantOutput { vector }
            } else {
                return Err(Error::config(format!("unknown oracle '{text}'")));
            }
        }
    };
    kind.validate(schema)?;
    Ok(kind)
}

fn noise_categorical(code: u32, cardinality: u32, epsilon: f64, rng: &mut SplitMix64) -> u32 {
    if cardinality < 2 || rng.next_f64() >= epsilon {
        return code;
    }
    let other = rng.below(u64::from(cardinality) - 1) as u32;
    if other >= code {
        other + 1
    } else {
        other
    }
}

fn noise_continuous(
    value: &[f64],
    pool: &[Vec<f64>],
    epsilon: f64,
    rng: &mut SplitMix64,
) -> Vec<f64> {
    if pool.is_empty() || rng.next_f64() >= epsilon {
        return value.to_vec();
    }
    // Rejection sampling over pool indices keeps each differing entry's
    // multiplicity weight; fall back to a scan when rejections pile up.
    for _ in 0..32 {
        let idx = rng.below(pool.len() as u64) as usize;
        if pool[idx] != value {
            return pool[idx].clone();
        }
    }
    let differing: Vec<&Vec<f64>> = pool.iter().filter(|v| v.as_slice() != value).collect();
    if differing.is_empty() {
        value.to_vec()
    } else {
        differing[rng.below(differing.len() as u64) as usize].clone()
    }
}

/// Runs the oracle on one (input, guidance) pair.
#[allow(clippy::too_many_arguments)]
pub fn apply_oracle(
    kind: &OracleKind,
    schema: &AttributeSchema,
    partition: &AttributePartition,
    direction: Direction,
    y_a: &[AttributeValue],
    y_b: &[AttributeValue],
    dist_a: Option<&DomainDistribution>,
    dist_b: Option<&DomainDistribution>,
    rng: &mut SplitMix64,
) -> Result<Vec<AttributeValue>> {
    let dist_for = |domain: Domain| -> Result<&DomainDistribution> {
        let d = match domain {
            Domain::A => dist_a,
            Domain::B => dist_b,
        };
        d.ok_or_else(|| Error::data(format!("oracle needs the domain {domain} distribution")))
    };
    match kind {
        OracleKind::ContentIdentity => Ok(y_a.to_vec()),
        OracleKind::GuidanceIdentity => Ok(y_b.to_vec()),
        OracleKind::RandomTarget => Ok(dist_for(direction.target())?.sample(rng)),
        OracleKind::RandomTriplets => {
            let domain = if rng.below(2) == 0 {
                Domain::A
            } else {
                Domain::B
            };
            Ok(dist_for(domain)?.sample(rng))
        }
        OracleKind::StyleCopier { copied } => {
            let mut out: Vec<AttributeValue> = (0..schema.len())
                .map(|k| {
                    if copied.contains(&k) {
                        y_b[k].clone()
                    } else {
                        y_a[k].clone()
                    }
                })
                .collect();
            for k in partition.fixed_target_attrs(direction) {
                out[k] = AttributeValue::Categorical(partition.fixed_value(direction.target(), k)?);
            }
            Ok(out)
        }
        OracleKind::ConstantOutput { vector } => Ok(vector.clone()),
        OracleKind::Composite { epsilon, inner } => {
            let mut out = apply_oracle(
                inner, schema, partition, direction, y_a, y_b, dist_a, dist_b, rng,
            )?;
            for (k, slot) in out.iter_mut().enumerate() {
                match slot {
                    AttributeValue::Categorical(code) => {
                        let cardinality = match schema.attrs()[k].kind {
                            AttributeKind::Categorical { cardinality } => cardinality,
                            _ => unreachable!("kind checked by schema validation"),
                        };
                        *code = noise_categorical(*code, cardinality, *epsilon, rng);
                    }
                    AttributeValue::Continuous(v) => {
                        let pool = dist_for(direction.target())?.continuous_pool(k)?;
                        *v = noise_continuous(v, pool, *epsilon, rng);
                    }
                }
            }
            Ok(out)
        }
    }
}

/// How input/guidance pairs are drawn.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pairing {
    /// n independent uniform pairs (with replacement) per direction.
    UniformRandom,
    /// Every (input, guidance) pair once, input-major order.
    Exhaustive,
}

/// Guard for exhaustive pairing and brute-force enumeration.
pub const DEFAULT_PAIR_CAP: u64 = 1_000_000;

const PURPOSE_INPUT: u64 = 1;
const PURPOSE_GUIDANCE: u64 = 2;
const PURPOSE_ORACLE: u64 = 3;

fn stream_tag(direction: Direction, purpose: u64) -> u64 {
    let dir = match direction {
        Direction::A2B => 0,
        Direction::B2A => 1,
    };
    purpose << 1 | dir
}

/// Generates triplets for both directions under the oracle.
/// Deterministic given (spec, manifests, n_pairs, pairing): each pair
/// index gets its own counter-derived streams, so results do not depend
/// on generation order.
#[allow(clippy::too_many_arguments)]
pub fn generate_triplets(
    spec: &OracleSpec,
    schema: &AttributeSchema,
    partition: &AttributePartition,
    manifest_a: &DomainManifest,
    manifest_b: &DomainManifest,
    n_pairs: u64,
    pairing: Pairing,
    cap: u64,
) -> Result<Vec<TranslationTriplet>> {
    spec.kind.validate(schema)?;
    if n_pairs == 0 && pairing == Pairing::UniformRandom {
        return Err(Error::config("n_pairs must be positive"));
    }
    let dist_a = estimate_distribution(manifest_a, schema, DistributionMode::JointEmpirical)?;
    let dist_b = estimate_distribution(manifest_b, schema, DistributionMode::JointEmpirical)?;
    let mut out = Vec::new();
    for direction in Direction::BOTH {
        let (source, target) = match direction {
            Direction::A2B => (manifest_a, manifest_b),
            Direction::B2A => (manifest_b, manifest_a),
        };
        let n_source = source.examples.len() as u64;
        let n_target = target.examples.len() as u64;
        if n_source == 0 || n_target == 0 {
            return Err(Error::data(format!(
                "cannot generate {direction} triplets from an empty manifest"
            )));
        }
        let pair_indices: Vec<(u64, u64)> = match pairing {
            Pairing::UniformRandom => (0..n_pairs)
                .map(|i| {
                    let s = SplitMix64::stream(spec.seed, stream_tag(direction, PURPOSE_INPUT), i)
                        .below(n_source);
                    let t =
                        SplitMix64::stream(spec.seed, stream_tag(direction, PURPOSE_GUIDANCE), i)
                            .below(n_target);
                    (s, t)
                })
                .collect(),
            Pairing::Exhaustive => {
                let total = n_source.saturating_mul(n_target);
                if total > cap {
                    return Err(Error::config(format!(
                        "exhaustive pairing needs {total} pairs, above the cap of {cap}"
                    )));
                }
                (0..n_source)
                    .flat_map(|s| (0..n_target).map(move |t| (s, t)))
                    .collect()
            }
        };
        for (i, (s, t)) in pair_indices.into_iter().enumerate() {
            let input = &source.examples[s as usize];
            let guidance = &target.examples[t as usize];
            let mut rng =
                SplitMix64::stream(spec.seed, stream_tag(direction, PURPOSE_ORACLE), i as u64);
            let y_hat = apply_oracle(
                &spec.kind,
                schema,
                partition,
                direction,
                &input.values,
                &guidance.values,
                Some(&dist_a),
                Some(&dist_b),
                &mut rng,
            )?;
            let mut triplet = TranslationTriplet::new(
                direction,
                input.values.clone(),
                guidance.values.clone(),
                y_hat,
            );
            triplet.a_id = Some(input.id.clone());
            triplet.b_id = Some(guidance.id.clone());
            out.push(triplet);
        }
    }
    Ok(out)
}

/// Exact probability distribution of one attribute's output value.
#[derive(Clone, Debug)]
enum Outcome {
    /// Probability per categorical code.
    Cat(Vec<f64>),
    /// Distinct continuous values with probabilities.
    Cont(Vec<(Vec<f64>, f64)>),
}

impl Outcome {
    fn point(value: &AttributeValue, cardinality_of: impl Fn() -> usize) -> Outcome {
        match value {
            AttributeValue::Categorical(code) => {
                let mut probs = vec![0.0; cardinality_of()];
                probs[*code as usize] = 1.0;
                Outcome::Cat(probs)
            }
            AttributeValue::Continuous(v) => Outcome::Cont(vec![(v.clone(), 1.0)]),
        }
    }

    fn prob_equal(&self, value: &AttributeValue) -> f64 {
        match (self, value) {
            (Outcome::Cat(probs), AttributeValue::Categorical(code)) => {
                probs.get(*code as usize).copied().unwrap_or(0.0)
            }
            (Outcome::Cont(entries), AttributeValue::Continuous(v)) => {
                entries.iter().filter(|(w, _)| w == v).map(|(_, p)| p).sum()
            }
            _ => 0.0,
        }
    }

    /// P(output strictly nearer to `reference` than to `other`);
    /// categorical outcomes reduce to equality with the reference.
    fn prob_matches(&self, reference: &AttributeValue, other: &AttributeValue) -> f64 {
        match self {
            Outcome::Cat(_) => self.prob_equal(reference),
            Outcome::Cont(entries) => {
                let (r, o) = match (reference, other) {
                    (AttributeValue::Continuous(r), AttributeValue::Continuous(o)) => (r, o),
                    _ => return 0.0,
                };
                entries
                    .iter()
                    .filter(|(w, _)| continuous_distance(w, r) < continuous_distance(w, o))
                    .map(|(_, p)| p)
                    .sum()
            }
        }
    }
}

fn group_continuous(pool: &[Vec<f64>]) -> Vec<(Vec<f64>, u64)> {
    let mut grouped: BTreeMap<Vec<u64>, (Vec<f64>, u64)> = BTreeMap::new();
    for v in pool {
        let key: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
        grouped.entry(key).or_insert_with(|| (v.clone(), 0)).1 += 1;
    }
    grouped.into_values().collect()
}

fn marginal_outcome(dist: &DomainDistribution, schema: &AttributeSchema, k: usize) -> Outcome {
    match schema.attrs()[k].kind {
        AttributeKind::Categorical { .. } => {
            Outcome::Cat(dist.categorical_probs(k).expect("kind checked"))
        }
        AttributeKind::Continuous { .. } => {
            let pool = dist.continuous_pool(k).expect("kind checked");
            let total = pool.len() as f64;
            Outcome::Cont(
                group_continuous(pool)
                    .into_iter()
                    .map(|(v, c)| (v, c as f64 / total))
                    .collect(),
            )
        }
    }
}

fn mix(a: Outcome, b: Outcome) -> Outcome {
    match (a, b) {
        (Outcome::Cat(pa), Outcome::Cat(pb)) => {
            Outcome::Cat(pa.iter().zip(&pb).map(|(x, y)| 0.5 * x + 0.5 * y).collect())
        }
        (Outcome::Cont(ea), Outcome::Cont(eb)) => {
            let mut grouped: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
            for (v, p) in ea.into_iter().chain(eb) {
                let key: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
                grouped.entry(key).or_insert_with(|| (v.clone(), 0.0)).1 += 0.5 * p;
            }
            Outcome::Cont(grouped.into_values().collect())
        }
        _ => unreachable!("mixed kinds for one attribute"),
    }
}

/// Applies the resample-to-different noise kernel to an exact marginal.
fn noise_kernel(
    outcome: Outcome,
    epsilon: f64,
    cardinality: Option<u32>,
    target_pool: Option<&[Vec<f64>]>,
) -> Outcome {
    if epsilon == 0.0 {
        return outcome;
    }
    match outcome {
        Outcome::Cat(probs) => {
            let c = cardinality.expect("categorical outcome") as usize;
            if c < 2 {
                return Outcome::Cat(probs);
            }
            let out = probs
                .iter()
                .map(|&p| (1.0 - epsilon) * p + epsilon * (1.0 - p) / (c as f64 - 1.0))
                .collect();
            Outcome::Cat(out)
        }
        Outcome::Cont(entries) => {
            let pool = target_pool.expect("continuous outcome");
            if pool.is_empty() {
                return Outcome::Cont(entries);
            }
            let grouped = group_continuous(pool);
            let total: u64 = grouped.iter().map(|(_, c)| c).sum();
            let mut acc: BTreeMap<Vec<u64>, (Vec<f64>, f64)> = BTreeMap::new();
            let mut add = |v: &Vec<f64>, p: f64| {
                let key: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
                acc.entry(key).or_insert_with(|| (v.clone(), 0.0)).1 += p;
            };
            for (v, p) in &entries {
                add(v, (1.0 - epsilon) * p);
                let same: u64 = grouped
                    .iter()
                    .filter(|(w, _)| w == v)
                    .map(|(_, c)| *c)
                    .sum();
                let differing = total - same;
                if differing == 0 {
                    // No differing value in the pool: the draw keeps v.
                    add(v, epsilon * p);
                } else {
                    for (w, c) in &grouped {
                        if w != v {
                            add(w, epsilon * p * *c as f64 / differing as f64);
                        }
                    }
                }
            }
            Outcome::Cont(acc.into_values().collect())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn pair_outcome(
    kind: &OracleKind,
    schema: &AttributeSchema,
    partition: &AttributePartition,
    direction: Direction,
    k: usize,
    y_a: &[AttributeValue],
    y_b: &[AttributeValue],
    dist_a: &DomainDistribution,
    dist_b: &DomainDistribution,
) -> Result<Outcome> {
    let cardinality_of = || match schema.attrs()[k].kind {
        AttributeKind::Categorical { cardinality } => cardinality as usize,
        AttributeKind::Continuous { .. } => 0,
    };
    let target_dist = match direction.target() {
        Domain::A => dist_a,
        Domain::B => dist_b,
    };
    Ok(match kind {
        OracleKind::ContentIdentity => Outcome::point(&y_a[k], cardinality_of),
        OracleKind::GuidanceIdentity => Outcome::point(&y_b[k], cardinality_of),
        OracleKind::RandomTarget => marginal_outcome(target_dist, schema, k),
        OracleKind::RandomTriplets => mix(
            marginal_outcome(dist_a, schema, k),
            marginal_outcome(dist_b, schema, k),
        ),
        OracleKind::StyleCopier { copied } => {
            let value = if partition.fixed_target_attrs(direction).contains(&k) {
                AttributeValue::Categorical(partition.fixed_value(direction.target(), k)?)
            } else if copied.contains(&k) {
                y_b[k].clone()
            } else {
                y_a[k].clone()
            };
            Outcome::point(&value, cardinality_of)
        }
        OracleKind::ConstantOutput { vector } => Outcome::point(&vector[k], cardinality_of),
        OracleKind::Composite { epsilon, inner } => {
            let base = pair_outcome(
                inner, schema, partition, direction, k, y_a, y_b, dist_a, dist_b,
            )?;
            let (cardinality, pool) = match schema.attrs()[k].kind {
                AttributeKind::Categorical { cardinality } => (Some(cardinality), None),
                AttributeKind::Continuous { .. } => (None, Some(target_dist.continuous_pool(k)?)),
            };
            noise_kernel(base, *epsilon, cardinality, pool)
        }
    })
}

/// Expected per-attribute conditional rate: the conditioning count is an
/// exact integer, the rate an exact expectation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedAttribute {
    pub attribute: usize,
    pub name: String,
    pub conditioned: u64,
    pub rate_percent: Option<f64>,
}

/// One direction's expected metric.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedMetric {
    pub direction: Direction,
    pub value_percent: f64,
    pub per_attribute: Vec<ExpectedAttribute>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedBias {
    pub value_percent: f64,
    pub a2b: Option<ExpectedMetric>,
    pub b2a: Option<ExpectedMetric>,
}

/// Exact metric expectations from full enumeration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpectedReport {
    pub q_tr_a2b: ExpectedMetric,
    pub q_tr_b2a: ExpectedMetric,
    pub d_s_a2b: ExpectedMetric,
    pub d_s_b2a: ExpectedMetric,
    pub d_c_a2b: ExpectedMetric,
    pub d_c_b2a: ExpectedMetric,
    pub bias: ExpectedBias,
    pub aggregates: Aggregates,
    pub pairs_a2b: u64,
    pub pairs_b2a: u64,
}

struct ExpectedCounter {
    conditioned: u64,
    success_sum: f64,
}

fn expected_average(
    direction: Direction,
    schema: &AttributeSchema,
    attrs: &[usize],
    counters: &[ExpectedCounter],
    metric_name: &str,
) -> Result<ExpectedMetric> {
    let mut per_attribute = Vec::with_capacity(attrs.len());
    let mut sum = 0.0;
    let mut defined = 0u64;
    for (&k, c) in attrs.iter().zip(counters) {
        let rate = if c.conditioned == 0 {
            None
        } else {
            Some(c.success_sum / c.conditioned as f64 * 100.0)
        };
        if let Some(r) = rate {
            sum += r;
            defined += 1;
        }
        per_attribute.push(ExpectedAttribute {
            attribute: k,
            name: schema.name_of(k).to_string(),
            conditioned: c.conditioned,
            rate_percent: rate,
        });
    }
    if defined == 0 {
        return Err(Error::undefined(format!(
            "{metric_name} ({direction}): every conditioning set is empty"
        )));
    }
    Ok(ExpectedMetric {
        direction,
        value_percent: sum / defined as f64,
        per_attribute,
    })
}

/// Enumerates every (input, guidance) pair in both directions and
/// returns the exact metric expectations under the oracle. The oracle's
/// per-pair output distribution is reduced to per-attribute marginals,
/// which is sufficient because every metric event concerns one
/// attribute.
pub fn expected_metrics_bruteforce(
    spec: &OracleSpec,
    schema: &AttributeSchema,
    partition: &AttributePartition,
    manifest_a: &DomainManifest,
    manifest_b: &DomainManifest,
    bias_threshold: f64,
    cap: u64,
) -> Result<ExpectedReport> {
    spec.kind.validate(schema)?;
    let dist_a = estimate_distribution(manifest_a, schema, DistributionMode::JointEmpirical)?;
    let dist_b = estimate_distribution(manifest_b, schema, DistributionMode::JointEmpirical)?;
    let all_attrs: Vec<usize> = (0..schema.len()).collect();

    let mut per_direction: Vec<(
        ExpectedMetric,
        ExpectedMetric,
        ExpectedMetric,
        Option<ExpectedMetric>,
        u64,
    )> = Vec::new();
    for direction in Direction::BOTH {
        let (source, target) = match direction {
            Direction::A2B => (manifest_a, manifest_b),
            Direction::B2A => (manifest_b, manifest_a),
        };
        let n_pairs = (source.examples.len() as u64) * (target.examples.len() as u64);
        if n_pairs == 0 {
            return Err(Error::data(format!(
                "cannot enumerate {direction}: a manifest is empty"
            )));
        }
        if n_pairs > cap {
            return Err(Error::config(format!(
                "brute force needs {n_pairs} pairs for {direction}, above the cap of {cap}"
            )));
        }
        let quality_attrs = partition.fixed_target_attrs(direction);
        let style_attrs = partition.specific(direction.target()).to_vec();
        let content_attrs = partition.shared.clone();
        let mut quality: Vec<ExpectedCounter> = quality_attrs
            .iter()
            .map(|_| ExpectedCounter {
                conditioned: 0,
                success_sum: 0.0,
            })
            .collect();
        let mut style: Vec<ExpectedCounter> = style_attrs
            .iter()
            .map(|_| ExpectedCounter {
                conditioned: 0,
                success_sum: 0.0,
            })
            .collect();
        let mut content: Vec<ExpectedCounter> = content_attrs
            .iter()
            .map(|_| ExpectedCounter {
                conditioned: 0,
                success_sum: 0.0,
            })
            .collect();
        let mut bias_c: Vec<ExpectedCounter> = all_attrs
            .iter()
            .map(|_| ExpectedCounter {
                conditioned: 0,
                success_sum: 0.0,
            })
            .collect();

        for input in &source.examples {
            for guidance in &target.examples {
                let y_a = &input.values;
                let y_b = &guidance.values;
                let perfect = perfect_attributes(schema, partition, direction, y_a, y_b)?;
                let outcome_for = |k: usize| {
                    pair_outcome(
                        &spec.kind, schema, partition, direction, k, y_a, y_b, &dist_a, &dist_b,
                    )
                };
                for (slot, &k) in quality.iter_mut().zip(&quality_attrs) {
                    if !values_equal(&y_a[k], &y_b[k]) {
                        slot.conditioned += 1;
                        slot.success_sum += outcome_for(k)?.prob_equal(&perfect[k]);
                    }
                }
                for (slot, &k) in style.iter_mut().zip(&style_attrs) {
                    if !values_equal(&y_a[k], &y_b[k]) {
                        slot.conditioned += 1;
                        slot.success_sum += outcome_for(k)?.prob_equal(&y_b[k]);
                    }
                }
                for (slot, &k) in content.iter_mut().zip(&content_attrs) {
                    if !values_equal(&y_a[k], &y_b[k]) {
                        slot.conditioned += 1;
                        slot.success_sum += outcome_for(k)?.prob_matches(&y_a[k], &y_b[k]);
                    }
                }
                for (slot, &k) in bias_c.iter_mut().zip(&all_attrs) {
                    if values_equal(&y_a[k], &y_b[k]) {
                        slot.conditioned += 1;
                        slot.success_sum += 1.0 - outcome_for(k)?.prob_equal(&perfect[k]);
                    }
                }
            }
        }

        let q = expected_average(
            direction,
            schema,
            &quality_attrs,
            &quality,
            "translation quality",
        )?;
        let s = expected_average(direction, schema, &style_attrs, &style, "style transfer")?;
        let c = expected_average(
            direction,
            schema,
            &content_attrs,
            &content,
            "content preservation",
        )?;
        let b = match expected_average(direction, schema, &all_attrs, &bias_c, "bias") {
            Ok(m) => Some(m),
            Err(Error::MetricUndefined(_)) => None,
            Err(e) => return Err(e),
        };
        per_direction.push((q, s, c, b, n_pairs));
    }

    let mut it = per_direction.into_iter();
    let (q_a2b, s_a2b, c_a2b, b_a2b, pairs_a2b) = it.next().expect("two directions");
    let (q_b2a, s_b2a, c_b2a, b_b2a, pairs_b2a) = it.next().expect("two directions");
    let defined: Vec<f64> = [&b_a2b, &b_b2a]
        .iter()
        .filter_map(|m| m.as_ref().map(|x| x.value_percent))
        .collect();
    if defined.is_empty() {
        return Err(Error::undefined("bias: every conditioning set is empty"));
    }
    let bias = ExpectedBias {
        value_percent: defined.iter().sum::<f64>() / defined.len() as f64,
        a2b: b_a2b,
        b2a: b_b2a,
    };
    let d_c_mean = (c_a2b.value_percent + c_b2a.value_percent) / 2.0;
    let d = (s_a2b.value_percent + s_b2a.value_percent + c_a2b.value_percent + c_b2a.value_percent)
        / 4.0;
    let q_tr_mean = (q_a2b.value_percent + q_b2a.value_percent) / 2.0;
    let aggregates = Aggregates {
        d_c_mean,
        d,
        q_tr_mean,
        bias: bias.value_percent,
        bias_threshold,
        low_confidence: bias.value_percent > bias_threshold,
    };
    Ok(ExpectedReport {
        q_tr_a2b: q_a2b,
        q_tr_b2a: q_b2a,
        d_s_a2b: s_a2b,
        d_s_b2a: s_b2a,
        d_c_a2b: c_a2b,
        d_c_b2a: c_b2a,
        bias,
        aggregates,
        pairs_a2b,
        pairs_b2a,
    })
}
