//! Rendering of metric reports as markdown, CSV, and JSON.
//!
//! The markdown layout mirrors the benchmark's main result tables:
//! one row per model, columns `Q_tr | D | D_s^A2B | D_s^B2A | D_c | B`
//! with arrows marking the preferred direction. A model whose bias
//! exceeds the confidence threshold gets its disentanglement cells
//! wrapped in a gray marker; the bias cell itself stays plain, since
//! it is the evidence for the flag. CSV is a long-format table of raw
//! values; JSON serializes the whole document and loads back exactly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{AttributeScore, DirectionalMetric, MetricReport, PoseReport};
use crate::schema::{AttributePartition, AttributeSchema};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Markdown,
    Csv,
    Json,
}

impl ReportFormat {
    pub fn parse(text: &str) -> Result<ReportFormat> {
        match text {
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            _ => Err(Error::config(format!("unknown report format '{text}'"))),
        }
    }
}

/// Presentation knobs; raw values are never rounded in CSV/JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FormatOptions {
    /// Decimal places in markdown cells, at least 1.
    pub precision: usize,
    pub gray_open: String,
    pub gray_close: String,
}

impl Default for FormatOptions {
    fn default() -> FormatOptions {
        FormatOptions {
            precision: 1,
            gray_open: "<span class=gray>".into(),
            gray_close: "</span>".into(),
        }
    }
}

/// A set of evaluated models over one dataset and partition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub dataset: String,
    pub partition_hash: String,
    /// Emission timestamp; only set when explicitly requested, so that
    /// report bytes are reproducible by default.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stamp: Option<String>,
    pub rows: Vec<(String, MetricReport)>,
    pub options: FormatOptions,
}

impl ReportDocument {
    pub fn new(dataset: impl Into<String>, partition_hash: impl Into<String>) -> ReportDocument {
        ReportDocument {
            dataset: dataset.into(),
            partition_hash: partition_hash.into(),
            stamp: None,
            rows: Vec::new(),
            options: FormatOptions::default(),
        }
    }

    pub fn push(&mut self, name: impl Into<String>, report: MetricReport) {
        self.rows.push((name.into(), report));
    }
}

fn fmt_percent(value: f64, precision: usize) -> String {
    format!("{value:.*}", precision.max(1))
}

fn emit_markdown(doc: &ReportDocument) -> String {
    let precision = doc.options.precision.max(1);
    let mut out = String::new();
    let _ = writeln!(out, "Dataset: {}", doc.dataset);
    let _ = writeln!(out, "Partition: {}", doc.partition_hash);
    if let Some(stamp) = &doc.stamp {
        let _ = writeln!(out, "Generated: {stamp}");
    }
    out.push('\n');
    out.push_str("| Model | Q_tr ↑ | D ↑ | D_s^A2B ↑ | D_s^B2A ↑ | D_c ↑ | B ↓ |\n");
    out.push_str("|---|---|---|---|---|---|---|\n");
    for (name, report) in &doc.rows {
        let gray = report.aggregates.low_confidence;
        let wrap = |v: f64| {
            let cell = fmt_percent(v, precision);
            if gray {
                format!("{}{cell}{}", doc.options.gray_open, doc.options.gray_close)
            } else {
                cell
            }
        };
        let _ = writeln!(
            out,
            "| {name} | {} | {} | {} | {} | {} | {} |",
            wrap(report.aggregates.q_tr_mean),
            wrap(report.aggregates.d),
            wrap(report.d_s_a2b.value_percent),
            wrap(report.d_s_b2a.value_percent),
            wrap(report.aggregates.d_c_mean),
            fmt_percent(report.bias.value_percent, precision),
        );
    }
    out
}

fn emit_csv(doc: &ReportDocument) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer
        .write_record([
            "model",
            "metric",
            "direction",
            "attribute",
            "conditioned",
            "value_percent",
            "low_confidence",
        ])
        .map_err(|e| Error::data(e.to_string()))?;
    for (name, report) in &doc.rows {
        let flag = report.aggregates.low_confidence.to_string();
        let mut aggregate = |metric: &str, direction: &str, value: f64| {
            writer
                .write_record([
                    name.as_str(),
                    metric,
                    direction,
                    "",
                    "",
                    &value.to_string(),
                    &flag,
                ])
                .map_err(|e| Error::data(e.to_string()))
        };
        aggregate("Q_tr", "mean", report.aggregates.q_tr_mean)?;
        aggregate("Q_tr", "A2B", report.q_tr_a2b.value_percent)?;
        aggregate("Q_tr", "B2A", report.q_tr_b2a.value_percent)?;
        aggregate("D", "mean", report.aggregates.d)?;
        aggregate("D_s", "A2B", report.d_s_a2b.value_percent)?;
        aggregate("D_s", "B2A", report.d_s_b2a.value_percent)?;
        aggregate("D_c", "mean", report.aggregates.d_c_mean)?;
        aggregate("D_c", "A2B", report.d_c_a2b.value_percent)?;
        aggregate("D_c", "B2A", report.d_c_b2a.value_percent)?;
        aggregate("B", "mean", report.bias.value_percent)?;
        let mut per_attribute =
            |metric: &str, direction: &str, scores: &[AttributeScore]| -> Result<()> {
                for s in scores {
                    writer
                        .write_record([
                            name.as_str(),
                            metric,
                            direction,
                            s.name.as_str(),
                            &s.conditioned.to_string(),
                            &s.rate_percent.map(|r| r.to_string()).unwrap_or_default(),
                            &flag,
                        ])
                        .map_err(|e| Error::data(e.to_string()))?;
                }
                Ok(())
            };
        per_attribute("Q_tr", "A2B", &report.q_tr_a2b.per_attribute)?;
        per_attribute("Q_tr", "B2A", &report.q_tr_b2a.per_attribute)?;
        per_attribute("D_s", "A2B", &report.d_s_a2b.per_attribute)?;
        per_attribute("D_s", "B2A", &report.d_s_b2a.per_attribute)?;
        per_attribute("D_c", "A2B", &report.d_c_a2b.per_attribute)?;
        per_attribute("D_c", "B2A", &report.d_c_b2a.per_attribute)?;
        if let Some(b) = &report.bias.a2b {
            per_attribute("B", "A2B", &b.per_attribute)?;
        }
        if let Some(b) = &report.bias.b2a {
            per_attribute("B", "B2A", &b.per_attribute)?;
        }
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::data(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::data(e.to_string()))
}

/// Renders the document; byte-deterministic for a given document.
pub fn emit_report(doc: &ReportDocument, format: ReportFormat) -> Result<String> {
    if doc.rows.is_empty() {
        return Err(Error::config("report has no rows"));
    }
    match format {
        ReportFormat::Markdown => Ok(emit_markdown(doc)),
        ReportFormat::Csv => emit_csv(doc),
        ReportFormat::Json => {
            let mut text =
                serde_json::to_string_pretty(doc).map_err(|e| Error::data(e.to_string()))?;
            text.push('\n');
            Ok(text)
        }
    }
}

/// Loads a JSON report document back; inverse of JSON emission.
pub fn parse_report_json(text: &str) -> Result<ReportDocument> {
    serde_json::from_str(text).map_err(|e| Error::data(format!("report JSON: {e}")))
}

fn score_cell(scores: &[AttributeScore], k: usize, precision: usize) -> String {
    match scores.iter().find(|s| s.attribute == k) {
        Some(s) => match s.rate_percent {
            Some(r) => format!("{} ({})", fmt_percent(r, precision), s.conditioned),
            None => format!("— ({})", s.conditioned),
        },
        None => "—".to_string(),
    }
}

fn per_attribute_group(
    out: &mut String,
    title: &str,
    columns: &[(&str, &DirectionalMetric)],
    attrs: &[usize],
    schema: &AttributeSchema,
    precision: usize,
) {
    if attrs.is_empty() {
        return;
    }
    let _ = writeln!(out, "### {title}");
    let _ = write!(out, "\n| Attribute |");
    for (label, _) in columns {
        let _ = write!(out, " {label} |");
    }
    out.push('\n');
    out.push_str("|---|");
    for _ in columns {
        out.push_str("---|");
    }
    out.push('\n');
    for &k in attrs {
        let _ = write!(out, "| {} |", schema.name_of(k));
        for (_, metric) in columns {
            let _ = write!(
                out,
                " {} |",
                score_cell(&metric.per_attribute, k, precision)
            );
        }
        out.push('\n');
    }
    out.push('\n');
}

/// Per-attribute conditional success rates with conditioning counts,
/// grouped by the attribute's role. Cells show `rate (n)`; an empty
/// conditioning set renders as `— (0)`, never as a zero score.
pub fn emit_per_attribute_report(
    report: &MetricReport,
    schema: &AttributeSchema,
    partition: &AttributePartition,
    precision: usize,
) -> String {
    let precision = precision.max(1);
    let mut out = String::new();
    per_attribute_group(
        &mut out,
        "Content",
        &[
            ("D_c^A2B (n)", &report.d_c_a2b),
            ("D_c^B2A (n)", &report.d_c_b2a),
        ],
        &partition.shared,
        schema,
        precision,
    );
    per_attribute_group(
        &mut out,
        "A-specific",
        &[
            ("Q_tr^A2B (n)", &report.q_tr_a2b),
            ("D_s^B2A (n)", &report.d_s_b2a),
        ],
        &partition.specific_a,
        schema,
        precision,
    );
    per_attribute_group(
        &mut out,
        "B-specific",
        &[
            ("Q_tr^B2A (n)", &report.q_tr_b2a),
            ("D_s^A2B (n)", &report.d_s_a2b),
        ],
        &partition.specific_b,
        schema,
        precision,
    );
    if let Some(k) = partition.domain_splitting_attr() {
        per_attribute_group(
            &mut out,
            "Domain",
            &[
                ("Q_tr^A2B (n)", &report.q_tr_a2b),
                ("Q_tr^B2A (n)", &report.q_tr_b2a),
            ],
            &[k],
            schema,
            precision,
        );
    }
    out
}

/// Markdown for a pose evaluation: per-channel mean absolute deviation
/// from the input, their mean D_p, and the pose-match rate.
pub fn emit_pose_report(pose: &PoseReport, schema: &AttributeSchema, precision: usize) -> String {
    let prec = precision.max(3);
    let mut out = String::new();
    let _ = writeln!(out, "Pose attribute: {}", pose.attribute);
    let _ = writeln!(out, "Triplets: {}", pose.triplets);
    let _ = writeln!(out, "D_p (mean abs deviation): {:.prec$}", pose.d_p);
    let _ = writeln!(out, "Pose match rate: {:.prec$}", pose.pose_match);
    out.push('\n');
    out.push_str("| Channel | Mean abs deviation |\n");
    out.push_str("|---|---|\n");
    let channel_names = schema
        .index_of(&pose.attribute)
        .and_then(|k| schema.attrs()[k].channel_names.clone());
    for (c, delta) in pose.channel_mean_abs_delta.iter().enumerate() {
        let name = channel_names
            .as_ref()
            .and_then(|names| names.get(c).cloned())
            .unwrap_or_else(|| format!("c{c}"));
        let _ = writeln!(out, "| {name} | {delta:.prec$} |");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::builtin_config;
    use crate::metrics::{compute_report, EvalOptions};
    use crate::oracles::{generate_triplets, OracleKind, OracleSpec, Pairing, DEFAULT_PAIR_CAP};
    use crate::schema::{AttributeSchema, AttributeValue, Domain};
    use crate::splitter::{DomainManifest, LabeledExample, Provenance};

    fn toy_doc() -> (
        ReportDocument,
        AttributeSchema,
        AttributePartition,
        MetricReport,
    ) {
        let config = builtin_config("3dshapes").unwrap();
        let rows = |codes: &[[u32; 6]], domain: Domain| DomainManifest {
            domain,
            partition_hash: "h".into(),
            provenance: Provenance::default(),
            examples: codes
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    LabeledExample::new(
                        format!("{domain}{i}"),
                        c.iter().map(|&x| AttributeValue::cat(x)).collect(),
                    )
                })
                .collect(),
        };
        // A pins size=5(4), orientation=-30(0); B pins floor=red(0),
        // wall=blue(7). The varying attributes avoid the opposite
        // domain's pinned codes so the pole conditioning is exercised.
        let a = rows(
            &[[0, 1, 3, 2, 4, 0], [1, 1, 5, 4, 4, 0], [2, 5, 8, 9, 4, 0]],
            Domain::A,
        );
        let b = rows(
            &[[0, 1, 0, 7, 0, 5], [1, 9, 0, 7, 7, 1], [3, 5, 0, 7, 2, 14]],
            Domain::B,
        );
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
        let mut doc = ReportDocument::new("3dshapes", "h");
        doc.push("Content idt", report.clone());
        (doc, config.schema, config.partition, report)
    }

    #[test]
    fn content_identity_row_shows_pole_values() {
        let (doc, ..) = toy_doc();
        let md = emit_report(&doc, ReportFormat::Markdown).unwrap();
        assert!(
            md.contains("| Content idt | 0.0 | 50.0 | 0.0 | 0.0 | 100.0 | 0.0 |"),
            "{md}"
        );
        assert!(md.contains("| Model | Q_tr ↑ | D ↑ | D_s^A2B ↑ | D_s^B2A ↑ | D_c ↑ | B ↓ |"));
    }

    #[test]
    fn emission_is_byte_deterministic() {
        let (doc, ..) = toy_doc();
        for format in [
            ReportFormat::Markdown,
            ReportFormat::Csv,
            ReportFormat::Json,
        ] {
            let one = emit_report(&doc, format).unwrap();
            let two = emit_report(&doc, format).unwrap();
            assert_eq!(one, two);
        }
    }

    #[test]
    fn low_confidence_grays_all_but_bias() {
        let (mut doc, ..) = toy_doc();
        doc.rows[0].1.aggregates.low_confidence = true;
        doc.rows[0].1.bias.value_percent = 44.25;
        let md = emit_report(&doc, ReportFormat::Markdown).unwrap();
        assert!(md.contains("<span class=gray>0.0</span>"), "{md}");
        assert!(md.contains("<span class=gray>50.0</span>"), "{md}");
        // The bias cell stays unwrapped.
        assert!(md.contains("| 44.2 |") || md.contains("| 44.3 |"), "{md}");
        assert!(!md.contains("<span class=gray>44"), "{md}");
        // Wrapper is configurable.
        doc.options.gray_open = "~".into();
        doc.options.gray_close = "~".into();
        let md = emit_report(&doc, ReportFormat::Markdown).unwrap();
        assert!(md.contains("~0.0~"), "{md}");
    }

    #[test]
    fn json_roundtrip_is_exact() {
        let (doc, ..) = toy_doc();
        let text = emit_report(&doc, ReportFormat::Json).unwrap();
        let loaded = parse_report_json(&text).unwrap();
        assert_eq!(loaded, doc);
    }

    #[test]
    fn csv_carries_raw_values_and_attributes() {
        let (doc, ..) = toy_doc();
        let text = emit_report(&doc, ReportFormat::Csv).unwrap();
        assert!(text.starts_with(
            "model,metric,direction,attribute,conditioned,value_percent,low_confidence\n"
        ));
        assert!(text.contains("Content idt,D,mean,,,50,false"), "{text}");
        assert!(text.contains("Content idt,D_c,A2B,shape,"), "{text}");
    }

    #[test]
    fn empty_document_is_an_error() {
        let doc = ReportDocument::new("x", "h");
        assert!(emit_report(&doc, ReportFormat::Markdown).is_err());
    }

    #[test]
    fn per_attribute_groups_follow_roles() {
        let (_, schema, partition, report) = toy_doc();
        let md = emit_per_attribute_report(&report, &schema, &partition, 1);
        assert!(md.contains("### Content"), "{md}");
        assert!(md.contains("### A-specific"), "{md}");
        assert!(md.contains("### B-specific"), "{md}");
        assert!(md.contains("| shape |"), "{md}");
        assert!(md.contains("| floor_hue |"), "{md}");
        // Content identity: shared cells 100, specific cells 0.
        let shape_row = md.lines().find(|l| l.starts_with("| shape |")).unwrap();
        assert!(shape_row.contains("100.0"), "{shape_row}");
        let floor_row = md.lines().find(|l| l.starts_with("| floor_hue |")).unwrap();
        assert!(floor_row.contains("0.0"), "{floor_row}");
    }

    #[test]
    fn stamp_appears_only_when_set() {
        let (mut doc, ..) = toy_doc();
        let md = emit_report(&doc, ReportFormat::Markdown).unwrap();
        assert!(!md.contains("Generated:"));
        doc.stamp = Some("2026-01-01T00:00:00Z".into());
        let md = emit_report(&doc, ReportFormat::Markdown).unwrap();
        assert!(md.contains("Generated: 2026-01-01T00:00:00Z"));
    }
}
