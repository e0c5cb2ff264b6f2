//! Schema and partition config files.
//!
//! Both are TOML. Attributes are referenced by name in files and resolved
//! to indices against the schema at parse time. Emission is canonical:
//! fixed key order, fixed formatting, role lists in index order, so
//! serialize -> parse -> serialize is byte-identical and config hashes
//! are stable.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::schema::{
    validate_partition, AttributeDecl, AttributeKind, AttributePartition, AttributeSchema,
    DomainSplit,
};

/// A parsed (schema, partition) pair plus its identifying hash.
#[derive(Clone, Debug)]
pub struct DatasetConfig {
    pub dataset: Option<String>,
    pub schema: AttributeSchema,
    pub partition: AttributePartition,
}

impl DatasetConfig {
    /// Hex digest over the canonical schema and partition text. Stable
    /// across whitespace or ordering differences in the source files.
    pub fn partition_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(emit_schema(&self.schema, self.dataset.as_deref()).as_bytes());
        hasher.update(
            emit_partition(&self.partition, &self.schema, self.dataset.as_deref()).as_bytes(),
        );
        let digest = hasher.finalize();
        let mut out = String::with_capacity(64);
        for byte in digest {
            let _ = write!(out, "{byte:02x}");
        }
        out
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchemaFile {
    dataset: Option<String>,
    #[serde(default)]
    attribute: Vec<RawAttribute>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAttribute {
    name: String,
    kind: String,
    cardinality: Option<u32>,
    labels: Option<Vec<String>>,
    channels: Option<usize>,
    channel_names: Option<Vec<String>>,
}

/// Parses a `.schema` file. Returns the schema and the optional dataset id.
pub fn parse_schema(text: &str) -> Result<(AttributeSchema, Option<String>)> {
    let raw: RawSchemaFile =
        toml::from_str(text).map_err(|e| Error::config(format!("schema file: {e}")))?;
    if raw.attribute.is_empty() {
        return Err(Error::config("schema file declares no attributes"));
    }
    let mut attrs = Vec::with_capacity(raw.attribute.len());
    for a in raw.attribute {
        let kind = match a.kind.as_str() {
            "categorical" => {
                if a.channels.is_some() || a.channel_names.is_some() {
                    return Err(Error::config(format!(
                        "attribute '{}': channel fields on a categorical attribute",
                        a.name
                    )));
                }
                let cardinality = match (a.cardinality, &a.labels) {
                    (Some(c), Some(l)) if c as usize != l.len() => {
                        return Err(Error::config(format!(
                            "attribute '{}': cardinality {} disagrees with {} labels",
                            a.name,
                            c,
                            l.len()
                        )))
                    }
                    (Some(c), _) => c,
                    (None, Some(l)) => l.len() as u32,
                    (None, None) => {
                        return Err(Error::config(format!(
                            "attribute '{}': categorical needs cardinality or labels",
                            a.name
                        )))
                    }
                };
                AttributeKind::Categorical { cardinality }
            }
            "continuous" => {
                if a.cardinality.is_some() || a.labels.is_some() {
                    return Err(Error::config(format!(
                        "attribute '{}': categorical fields on a continuous attribute",
                        a.name
                    )));
                }
                let channels = a.channels.ok_or_else(|| {
                    Error::config(format!("attribute '{}': continuous needs channels", a.name))
                })?;
                AttributeKind::Continuous { channels }
            }
            other => {
                return Err(Error::config(format!(
                    "attribute '{}': unknown kind '{other}' (categorical or continuous)",
                    a.name
                )))
            }
        };
        attrs.push(AttributeDecl {
            name: a.name,
            kind,
            labels: a.labels,
            channel_names: a.channel_names,
        });
    }
    Ok((AttributeSchema::new(attrs)?, raw.dataset))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPartitionFile {
    dataset: Option<String>,
    #[serde(default)]
    shared: Vec<String>,
    #[serde(default)]
    specific_a: Vec<String>,
    #[serde(default)]
    specific_b: Vec<String>,
    domain_splitting: Option<RawSplit>,
    #[serde(default)]
    fixed_in_a: Vec<RawFixed>,
    #[serde(default)]
    fixed_in_b: Vec<RawFixed>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    attribute: String,
    value_a: String,
    value_b: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixed {
    attribute: String,
    value: String,
}

/// Parses a `.partition` file against an already-parsed schema.
/// The result is normalized but not yet validated.
pub fn parse_partition(
    text: &str,
    schema: &AttributeSchema,
) -> Result<(AttributePartition, Option<String>)> {
    let raw: RawPartitionFile =
        toml::from_str(text).map_err(|e| Error::config(format!("partition file: {e}")))?;
    let resolve = |names: &[String]| -> Result<Vec<usize>> {
        names.iter().map(|n| schema.require_index(n)).collect()
    };
    let resolve_fixed = |entries: &[RawFixed]| -> Result<BTreeMap<usize, u32>> {
        let mut out = BTreeMap::new();
        for e in entries {
            let k = schema.require_index(&e.attribute)?;
            let code = schema.parse_code(k, &e.value)?;
            if out.insert(k, code).is_some() {
                return Err(Error::config(format!(
                    "attribute '{}': duplicate fixed value entry",
                    e.attribute
                )));
            }
        }
        Ok(out)
    };
    let domain_splitting = match raw.domain_splitting {
        Some(s) => {
            let k = schema.require_index(&s.attribute)?;
            Some(DomainSplit {
                attribute: k,
                value_a: schema.parse_code(k, &s.value_a)?,
                value_b: schema.parse_code(k, &s.value_b)?,
            })
        }
        None => None,
    };
    let partition = AttributePartition {
        domain_splitting,
        shared: resolve(&raw.shared)?,
        specific_a: resolve(&raw.specific_a)?,
        specific_b: resolve(&raw.specific_b)?,
        fixed_in_a: resolve_fixed(&raw.fixed_in_a)?,
        fixed_in_b: resolve_fixed(&raw.fixed_in_b)?,
    }
    .normalize();
    Ok((partition, raw.dataset))
}

fn toml_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04X}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn toml_string_array(items: impl IntoIterator<Item = String>) -> String {
    let quoted: Vec<String> = items.into_iter().map(|s| toml_string(&s)).collect();
    format!("[{}]", quoted.join(", "))
}

/// Canonical schema text.
pub fn emit_schema(schema: &AttributeSchema, dataset: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(d) = dataset {
        let _ = writeln!(out, "dataset = {}", toml_string(d));
    }
    for decl in schema.attrs() {
        let _ = writeln!(out);
        let _ = writeln!(out, "[[attribute]]");
        let _ = writeln!(out, "name = {}", toml_string(&decl.name));
        match &decl.kind {
            AttributeKind::Categorical { cardinality } => {
                let _ = writeln!(out, "kind = \"categorical\"");
                let _ = writeln!(out, "cardinality = {cardinality}");
                if let Some(labels) = &decl.labels {
                    let _ = writeln!(
                        out,
                        "labels = {}",
                        toml_string_array(labels.iter().cloned())
                    );
                }
            }
            AttributeKind::Continuous { channels } => {
                let _ = writeln!(out, "kind = \"continuous\"");
                let _ = writeln!(out, "channels = {channels}");
                if let Some(names) = &decl.channel_names {
                    let _ = writeln!(
                        out,
                        "channel_names = {}",
                        toml_string_array(names.iter().cloned())
                    );
                }
            }
        }
    }
    out
}

/// Canonical partition text. Role lists appear in index order; fixed
/// values as array-of-tables sorted by attribute index; codes rendered
/// through the label table.
pub fn emit_partition(
    partition: &AttributePartition,
    schema: &AttributeSchema,
    dataset: Option<&str>,
) -> String {
    let p = partition.clone().normalize();
    let names = |ks: &[usize]| -> String {
        toml_string_array(ks.iter().map(|&k| schema.name_of(k).to_string()))
    };
    let mut out = String::new();
    if let Some(d) = dataset {
        let _ = writeln!(out, "dataset = {}", toml_string(d));
    }
    let _ = writeln!(out, "shared = {}", names(&p.shared));
    let _ = writeln!(out, "specific_a = {}", names(&p.specific_a));
    let _ = writeln!(out, "specific_b = {}", names(&p.specific_b));
    if let Some(split) = &p.domain_splitting {
        let _ = writeln!(out);
        let _ = writeln!(out, "[domain_splitting]");
        let _ = writeln!(
            out,
            "attribute = {}",
            toml_string(schema.name_of(split.attribute))
        );
        let _ = writeln!(
            out,
            "value_a = {}",
            toml_string(&schema.render_code(split.attribute, split.value_a))
        );
        let _ = writeln!(
            out,
            "value_b = {}",
            toml_string(&schema.render_code(split.attribute, split.value_b))
        );
    }
    for (&k, &code) in &p.fixed_in_a {
        let _ = writeln!(out);
        let _ = writeln!(out, "[[fixed_in_a]]");
        let _ = writeln!(out, "attribute = {}", toml_string(schema.name_of(k)));
        let _ = writeln!(out, "value = {}", toml_string(&schema.render_code(k, code)));
    }
    for (&k, &code) in &p.fixed_in_b {
        let _ = writeln!(out);
        let _ = writeln!(out, "[[fixed_in_b]]");
        let _ = writeln!(out, "attribute = {}", toml_string(schema.name_of(k)));
        let _ = writeln!(out, "value = {}", toml_string(&schema.render_code(k, code)));
    }
    out
}

/// Loads and validates a (schema, partition) pair from two files.
pub fn load_config(schema_path: &Path, partition_path: &Path) -> Result<DatasetConfig> {
    let schema_text = std::fs::read_to_string(schema_path).map_err(|e| {
        Error::config(format!(
            "cannot read schema file {}: {e}",
            schema_path.display()
        ))
    })?;
    let partition_text = std::fs::read_to_string(partition_path).map_err(|e| {
        Error::config(format!(
            "cannot read partition file {}: {e}",
            partition_path.display()
        ))
    })?;
    config_from_texts(&schema_text, &partition_text)
}

/// Parses and validates schema + partition text.
pub fn config_from_texts(schema_text: &str, partition_text: &str) -> Result<DatasetConfig> {
    let (schema, schema_dataset) = parse_schema(schema_text)?;
    let (partition, partition_dataset) = parse_partition(partition_text, &schema)?;
    if let (Some(s), Some(p)) = (&schema_dataset, &partition_dataset) {
        if s != p {
            return Err(Error::config(format!(
                "schema is for dataset '{s}' but partition is for '{p}'"
            )));
        }
    }
    validate_partition(&schema, &partition).into_result("partition")?;
    Ok(DatasetConfig {
        dataset: schema_dataset.or(partition_dataset),
        schema,
        partition,
    })
}

/// Names of the configs shipped with the binary.
pub const BUILTIN_CONFIGS: [&str; 3] = ["3dshapes", "synaction", "celeba_d"];

/// Returns a shipped config by dataset name.
pub fn builtin_config(name: &str) -> Result<DatasetConfig> {
    let (schema_text, partition_text) = builtin_texts(name)?;
    config_from_texts(schema_text, partition_text)
}

/// Raw text of a shipped config, for export and for round-trip tests.
pub fn builtin_texts(name: &str) -> Result<(&'static str, &'static str)> {
    match name {
        "3dshapes" => Ok((
            include_str!("../../../configs/3dshapes.schema"),
            include_str!("../../../configs/3dshapes.partition"),
        )),
        "synaction" => Ok((
            include_str!("../../../configs/synaction.schema"),
            include_str!("../../../configs/synaction.partition"),
        )),
        "celeba_d" => Ok((
            include_str!("../../../configs/celeba_d.schema"),
            include_str!("../../../configs/celeba_d.partition"),
        )),
        other => Err(Error::config(format!(
            "unknown builtin config '{other}' (available: {})",
            BUILTIN_CONFIGS.join(", ")
        ))),
    }
}
