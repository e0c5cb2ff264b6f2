//! Attribute vocabularies and the four-way role partition.
//!
//! A schema declares every attribute's name and kind. A partition assigns
//! each attribute exactly one role: the optional domain-splitting
//! attribute (constant within each domain, different across them), shared
//! attributes (vary in both domains), and the two domain-specific sets
//! (vary in one domain, pinned to a fixed value in the other). Everything
//! downstream — splitting, triplet generation, metric conditioning —
//! consumes a validated `(schema, partition)` pair, so validation here is
//! strict and violations are explicit data rather than panics.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kind of an attribute: a finite code set, or a real vector.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AttributeKind {
    Categorical { cardinality: u32 },
    Continuous { channels: usize },
}

/// One declared attribute. Categorical values are integer codes; the
/// optional label table maps codes to strings at I/O boundaries only, so
/// equality tests and enumeration stay exact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeDecl {
    pub name: String,
    pub kind: AttributeKind,
    /// Code labels, categorical attributes only; length = cardinality.
    pub labels: Option<Vec<String>>,
    /// Channel names, continuous attributes only; length = channels.
    pub channel_names: Option<Vec<String>>,
}

impl AttributeDecl {
    pub fn categorical(name: &str, cardinality: u32) -> Self {
        AttributeDecl {
            name: name.to_string(),
            kind: AttributeKind::Categorical { cardinality },
            labels: None,
            channel_names: None,
        }
    }

    pub fn labeled(name: &str, labels: &[&str]) -> Self {
        AttributeDecl {
            name: name.to_string(),
            kind: AttributeKind::Categorical {
                cardinality: labels.len() as u32,
            },
            labels: Some(labels.iter().map(|s| s.to_string()).collect()),
            channel_names: None,
        }
    }

    pub fn continuous(name: &str, channels: usize) -> Self {
        AttributeDecl {
            name: name.to_string(),
            kind: AttributeKind::Continuous { channels },
            labels: None,
            channel_names: None,
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, AttributeKind::Categorical { .. })
    }

    pub fn cardinality(&self) -> Option<u32> {
        match self.kind {
            AttributeKind::Categorical { cardinality } => Some(cardinality),
            AttributeKind::Continuous { .. } => None,
        }
    }
}

/// Ordered list of attribute declarations; indices are implicit 0..M-1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributeSchema {
    attrs: Vec<AttributeDecl>,
    #[serde(skip)]
    by_name: HashMap<String, usize>,
}

impl AttributeSchema {
    pub fn new(attrs: Vec<AttributeDecl>) -> Result<Self> {
        let mut by_name = HashMap::new();
        for (i, a) in attrs.iter().enumerate() {
            if a.name.is_empty() {
                return Err(Error::config(format!("attribute {i} has an empty name")));
            }
            if by_name.insert(a.name.clone(), i).is_some() {
                return Err(Error::config(format!(
                    "duplicate attribute name '{}'",
                    a.name
                )));
            }
            match &a.kind {
                AttributeKind::Categorical { cardinality } => {
                    if *cardinality == 0 {
                        return Err(Error::config(format!(
                            "attribute '{}' has cardinality 0",
                            a.name
                        )));
                    }
                    if let Some(labels) = &a.labels {
                        if labels.len() as u32 != *cardinality {
                            return Err(Error::config(format!(
                                "attribute '{}': {} labels for cardinality {}",
                                a.name,
                                labels.len(),
                                cardinality
                            )));
                        }
                        let distinct: BTreeSet<&String> = labels.iter().collect();
                        if distinct.len() != labels.len() {
                            return Err(Error::config(format!(
                                "attribute '{}' has duplicate labels",
                                a.name
                            )));
                        }
                    }
                    if a.channel_names.is_some() {
                        return Err(Error::config(format!(
                            "attribute '{}': channel names on a categorical attribute",
                            a.name
                        )));
                    }
                }
                AttributeKind::Continuous { channels } => {
                    if *channels == 0 {
                        return Err(Error::config(format!(
                            "attribute '{}' has 0 channels",
                            a.name
                        )));
                    }
                    if a.labels.is_some() {
                        return Err(Error::config(format!(
                            "attribute '{}': labels on a continuous attribute",
                            a.name
                        )));
                    }
                    if let Some(names) = &a.channel_names {
                        if names.len() != *channels {
                            return Err(Error::config(format!(
                                "attribute '{}': {} channel names for {} channels",
                                a.name,
                                names.len(),
                                channels
                            )));
                        }
                    }
                }
            }
        }
        Ok(AttributeSchema { attrs, by_name })
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn attrs(&self) -> &[AttributeDecl] {
        &self.attrs
    }

    pub fn attr(&self, k: usize) -> Result<&AttributeDecl> {
        self.attrs.get(k).ok_or_else(|| {
            Error::config(format!(
                "attribute index {k} out of range (M = {})",
                self.attrs.len()
            ))
        })
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    pub fn require_index(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::config(format!("unknown attribute '{name}'")))
    }

    pub fn name_of(&self, k: usize) -> &str {
        &self.attrs[k].name
    }

    /// Rebuilds the name index after deserialization.
    pub fn reindex(mut self) -> Self {
        self.by_name = self
            .attrs
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.clone(), i))
            .collect();
        self
    }

    /// Checks a single value against attribute `k`'s declaration.
    pub fn check_value(&self, k: usize, value: &AttributeValue) -> Result<()> {
        let decl = self.attr(k)?;
        match (&decl.kind, value) {
            (AttributeKind::Categorical { cardinality }, AttributeValue::Categorical(code)) => {
                if code >= cardinality {
                    return Err(Error::data(format!(
                        "attribute '{}': code {} out of range (cardinality {})",
                        decl.name, code, cardinality
                    )));
                }
                Ok(())
            }
            (AttributeKind::Continuous { channels }, AttributeValue::Continuous(v)) => {
                if v.len() != *channels {
                    return Err(Error::data(format!(
                        "attribute '{}': {} channels, expected {}",
                        decl.name,
                        v.len(),
                        channels
                    )));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(Error::data(format!(
                        "attribute '{}': non-finite value",
                        decl.name
                    )));
                }
                Ok(())
            }
            (AttributeKind::Categorical { .. }, AttributeValue::Continuous(_)) => {
                Err(Error::data(format!(
                    "attribute '{}': continuous value for a categorical attribute",
                    decl.name
                )))
            }
            (AttributeKind::Continuous { .. }, AttributeValue::Categorical(_)) => {
                Err(Error::data(format!(
                    "attribute '{}': categorical value for a continuous attribute",
                    decl.name
                )))
            }
        }
    }

    /// Checks a full vector for length and per-value validity.
    pub fn check_vector(&self, values: &[AttributeValue]) -> Result<()> {
        if values.len() != self.attrs.len() {
            return Err(Error::data(format!(
                "vector length {} does not match schema (M = {})",
                values.len(),
                self.attrs.len()
            )));
        }
        for (k, v) in values.iter().enumerate() {
            self.check_value(k, v)?;
        }
        Ok(())
    }

    /// Renders a categorical code through the label table if present.
    pub fn render_code(&self, k: usize, code: u32) -> String {
        match self.attrs.get(k).and_then(|a| a.labels.as_ref()) {
            Some(labels) => labels
                .get(code as usize)
                .cloned()
                .unwrap_or_else(|| code.to_string()),
            None => code.to_string(),
        }
    }

    /// Parses a categorical value given as a label or a decimal code.
    /// Labels take precedence over codes when both would parse.
    pub fn parse_code(&self, k: usize, text: &str) -> Result<u32> {
        let decl = self.attr(k)?;
        let cardinality = decl.cardinality().ok_or_else(|| {
            Error::config(format!(
                "attribute '{}' is continuous, not categorical",
                decl.name
            ))
        })?;
        if let Some(labels) = &decl.labels {
            if let Some(pos) = labels.iter().position(|l| l == text) {
                return Ok(pos as u32);
            }
        }
        match text.parse::<u32>() {
            Ok(code) if code < cardinality => Ok(code),
            _ => Err(Error::config(format!(
                "attribute '{}': '{}' is neither a label nor a code below {}",
                decl.name, text, cardinality
            ))),
        }
    }
}

/// A single attribute value: a categorical code or a real vector
/// (scalar = one channel). Pose-style attributes carry several channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeValue {
    Categorical(u32),
    Continuous(Vec<f64>),
}

impl AttributeValue {
    pub fn cat(code: u32) -> Self {
        AttributeValue::Categorical(code)
    }

    pub fn cont(v: f64) -> Self {
        AttributeValue::Continuous(vec![v])
    }

    pub fn code(&self) -> Option<u32> {
        match self {
            AttributeValue::Categorical(c) => Some(*c),
            AttributeValue::Continuous(_) => None,
        }
    }
}

/// The role an attribute plays under a partition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Role {
    DomainSplitting,
    Shared,
    SpecificA,
    SpecificB,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::DomainSplitting => "domain-splitting",
            Role::Shared => "shared",
            Role::SpecificA => "A-specific",
            Role::SpecificB => "B-specific",
        };
        f.write_str(s)
    }
}

/// One of the two domains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Domain {
    A,
    B,
}

impl Domain {
    pub fn opposite(self) -> Domain {
        match self {
            Domain::A => Domain::B,
            Domain::B => Domain::A,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::A => f.write_str("A"),
            Domain::B => f.write_str("B"),
        }
    }
}

/// Translation direction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    A2B,
    B2A,
}

impl Direction {
    pub fn source(self) -> Domain {
        match self {
            Direction::A2B => Domain::A,
            Direction::B2A => Domain::B,
        }
    }

    pub fn target(self) -> Domain {
        match self {
            Direction::A2B => Domain::B,
            Direction::B2A => Domain::A,
        }
    }

    pub const BOTH: [Direction; 2] = [Direction::A2B, Direction::B2A];
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::A2B => f.write_str("A2B"),
            Direction::B2A => f.write_str("B2A"),
        }
    }
}

impl std::str::FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Direction> {
        match s {
            "A2B" => Ok(Direction::A2B),
            "B2A" => Ok(Direction::B2A),
            _ => Err(Error::data(format!("unknown direction '{s}'"))),
        }
    }
}

/// Domain-splitting attribute with its two fixed codes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSplit {
    pub attribute: usize,
    pub value_a: u32,
    pub value_b: u32,
}

/// Role assignment over all attribute indices plus the fixed values that
/// pin domain-specific attributes in their constant domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttributePartition {
    pub domain_splitting: Option<DomainSplit>,
    pub shared: Vec<usize>,
    pub specific_a: Vec<usize>,
    pub specific_b: Vec<usize>,
    /// k in specific_a -> code the attribute is pinned to in domain B.
    pub fixed_in_b: BTreeMap<usize, u32>,
    /// k in specific_b -> code the attribute is pinned to in domain A.
    pub fixed_in_a: BTreeMap<usize, u32>,
}

impl AttributePartition {
    /// Canonicalizes index order; role lists are kept sorted.
    pub fn normalize(mut self) -> Self {
        self.shared.sort_unstable();
        self.shared.dedup();
        self.specific_a.sort_unstable();
        self.specific_a.dedup();
        self.specific_b.sort_unstable();
        self.specific_b.dedup();
        self
    }

    pub fn domain_splitting_attr(&self) -> Option<usize> {
        self.domain_splitting.as_ref().map(|d| d.attribute)
    }

    /// Specific set of one domain (the attributes that vary there).
    pub fn specific(&self, domain: Domain) -> &[usize] {
        match domain {
            Domain::A => &self.specific_a,
            Domain::B => &self.specific_b,
        }
    }

    /// The role of attribute `k`. Errors when `k` is out of range or, on
    /// an unvalidated partition, not assigned anywhere.
    pub fn role_of(&self, k: usize) -> Result<Role> {
        if self.domain_splitting_attr() == Some(k) {
            return Ok(Role::DomainSplitting);
        }
        if self.shared.contains(&k) {
            return Ok(Role::Shared);
        }
        if self.specific_a.contains(&k) {
            return Ok(Role::SpecificA);
        }
        if self.specific_b.contains(&k) {
            return Ok(Role::SpecificB);
        }
        Err(Error::config(format!(
            "attribute index {k} has no role in the partition"
        )))
    }

    /// Fixed code of attribute `k` inside `domain`, defined for the
    /// domain-splitting attribute and for the opposite domain's specific
    /// attributes. Errors with "not fixed" when `k` varies in `domain`.
    pub fn fixed_value(&self, domain: Domain, k: usize) -> Result<u32> {
        if let Some(split) = &self.domain_splitting {
            if split.attribute == k {
                return Ok(match domain {
                    Domain::A => split.value_a,
                    Domain::B => split.value_b,
                });
            }
        }
        let map = match domain {
            Domain::A => &self.fixed_in_a,
            Domain::B => &self.fixed_in_b,
        };
        map.get(&k)
            .copied()
            .ok_or_else(|| Error::config(format!("attribute {k} is not fixed in domain {domain}")))
    }

    /// (attribute, code) constraints an example must satisfy to belong to
    /// `domain`: the domain-splitting pin plus the opposite-specific pins.
    pub fn membership_constraints(&self, domain: Domain) -> Vec<(usize, u32)> {
        let mut out = Vec::new();
        if let Some(split) = &self.domain_splitting {
            let code = match domain {
                Domain::A => split.value_a,
                Domain::B => split.value_b,
            };
            out.push((split.attribute, code));
        }
        let map = match domain {
            Domain::A => &self.fixed_in_a,
            Domain::B => &self.fixed_in_b,
        };
        out.extend(map.iter().map(|(&k, &v)| (k, v)));
        out
    }

    /// Attributes whose target-domain value is pinned for `direction`:
    /// the source-specific set plus the domain-splitting attribute.
    /// These are the ones translation quality ranges over.
    pub fn fixed_target_attrs(&self, direction: Direction) -> Vec<usize> {
        let mut out: Vec<usize> = self.specific(direction.source()).to_vec();
        if let Some(z) = self.domain_splitting_attr() {
            out.push(z);
        }
        out.sort_unstable();
        out
    }
}

/// Result of a validation pass: empty means ok.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationResult {
    pub violations: Vec<Violation>,
}

impl ValidationResult {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, v: Violation) {
        self.violations.push(v);
    }

    pub fn into_result(self, what: &str) -> Result<()> {
        if self.is_ok() {
            Ok(())
        } else {
            let mut lines: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
            lines.truncate(20);
            Err(Error::config(format!(
                "{what} invalid: {}",
                lines.join("; ")
            )))
        }
    }
}

/// One violated rule, pointing at the attribute index and/or example id
/// it concerns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub attribute: Option<usize>,
    pub example: Option<String>,
    pub rule: String,
}

impl Violation {
    pub fn on_attr(attribute: usize, rule: impl Into<String>) -> Self {
        Violation {
            attribute: Some(attribute),
            example: None,
            rule: rule.into(),
        }
    }

    pub fn on_example(example: impl Into<String>, rule: impl Into<String>) -> Self {
        Violation {
            attribute: None,
            example: Some(example.into()),
            rule: rule.into(),
        }
    }

    pub fn general(rule: impl Into<String>) -> Self {
        Violation {
            attribute: None,
            example: None,
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.attribute, &self.example) {
            (Some(k), Some(id)) => write!(f, "attribute {k}, example '{id}': {}", self.rule),
            (Some(k), None) => write!(f, "attribute {k}: {}", self.rule),
            (None, Some(id)) => write!(f, "example '{id}': {}", self.rule),
            (None, None) => f.write_str(&self.rule),
        }
    }
}

/// Checks every partition invariant against the schema. Violations are
/// returned as data; only hopelessly malformed inputs are errors.
pub fn validate_partition(
    schema: &AttributeSchema,
    partition: &AttributePartition,
) -> ValidationResult {
    let m = schema.len();
    let mut result = ValidationResult::default();
    let mut seen: BTreeMap<usize, u32> = BTreeMap::new();

    let mut claim = |k: usize, result: &mut ValidationResult| {
        let count = seen.entry(k).or_insert(0);
        *count += 1;
        if *count == 2 {
            result.push(Violation::on_attr(k, "assigned two roles"));
        }
        if k >= m {
            result.push(Violation::on_attr(
                k,
                format!("index out of range (M = {m})"),
            ));
        }
    };

    if let Some(split) = &partition.domain_splitting {
        claim(split.attribute, &mut result);
    }
    for &k in &partition.shared {
        claim(k, &mut result);
    }
    for &k in &partition.specific_a {
        claim(k, &mut result);
    }
    for &k in &partition.specific_b {
        claim(k, &mut result);
    }
    for k in 0..m {
        if !seen.contains_key(&k) {
            result.push(Violation::on_attr(k, "not assigned any role"));
        }
    }

    // Domain-splitting attribute: categorical, two distinct valid codes.
    if let Some(split) = &partition.domain_splitting {
        if let Ok(decl) = schema.attr(split.attribute) {
            match decl.cardinality() {
                Some(card) => {
                    if split.value_a >= card {
                        result.push(Violation::on_attr(
                            split.attribute,
                            format!(
                                "domain A code {} out of range (cardinality {card})",
                                split.value_a
                            ),
                        ));
                    }
                    if split.value_b >= card {
                        result.push(Violation::on_attr(
                            split.attribute,
                            format!(
                                "domain B code {} out of range (cardinality {card})",
                                split.value_b
                            ),
                        ));
                    }
                    if split.value_a == split.value_b {
                        result.push(Violation::on_attr(
                            split.attribute,
                            "domain-splitting codes for A and B must differ",
                        ));
                    }
                }
                None => result.push(Violation::on_attr(
                    split.attribute,
                    "domain-splitting attribute must be categorical",
                )),
            }
        }
    }

    // Fixed maps must cover the opposite-specific sets exactly.
    check_fixed_map(
        schema,
        &partition.specific_a,
        &partition.fixed_in_b,
        "B",
        &mut result,
    );
    check_fixed_map(
        schema,
        &partition.specific_b,
        &partition.fixed_in_a,
        "A",
        &mut result,
    );

    // Per-attribute role constraints.
    for (k, decl) in schema.attrs().iter().enumerate() {
        let role = match partition.role_of(k) {
            Ok(r) => r,
            Err(_) => continue,
        };
        match &decl.kind {
            AttributeKind::Categorical { cardinality } => {
                // An attribute that never takes a second value carries no
                // information in any role.
                if *cardinality < 2 {
                    result.push(Violation::on_attr(
                        k,
                        format!("cardinality {cardinality} < 2 for a partitioned attribute"),
                    ));
                }
            }
            AttributeKind::Continuous { .. } => {
                if role != Role::Shared {
                    result.push(Violation::on_attr(
                        k,
                        format!("continuous attribute may only be shared, found role {role}"),
                    ));
                }
            }
        }
    }

    result
}

fn check_fixed_map(
    schema: &AttributeSchema,
    specific: &[usize],
    fixed: &BTreeMap<usize, u32>,
    fixed_domain: &str,
    result: &mut ValidationResult,
) {
    for &k in specific {
        match fixed.get(&k) {
            None => result.push(Violation::on_attr(
                k,
                format!("missing fixed value in domain {fixed_domain}"),
            )),
            Some(&code) => {
                if let Ok(decl) = schema.attr(k) {
                    if let Some(card) = decl.cardinality() {
                        if code >= card {
                            result.push(Violation::on_attr(
                                k,
                                format!(
                                    "fixed code {code} in domain {fixed_domain} out of range (cardinality {card})"
                                ),
                            ));
                        }
                    }
                }
            }
        }
    }
    for &k in fixed.keys() {
        if !specific.contains(&k) {
            result.push(Violation::on_attr(
                k,
                format!("fixed value in domain {fixed_domain} for a non-specific attribute"),
            ));
        }
    }
}
