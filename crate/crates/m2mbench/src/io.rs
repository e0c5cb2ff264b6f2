//! File ingestion and emission for corpora, manifests, and triplets.
//!
//! Corpora arrive as CSV (an `id` column plus one column per attribute,
//! `#` comments allowed), JSONL (one labeled example per line), or the
//! CelebA-native attribute table (count line, name line, then
//! space-separated ±1 rows). Manifests and triplets are JSONL with a
//! leading header object carrying provenance. Continuous attribute
//! values in CSV cells join their channels with `;`.

use std::fs;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::TranslationTriplet;
use crate::schema::{AttributeKind, AttributeSchema, AttributeValue, Domain};
use crate::splitter::{DomainManifest, LabeledExample, Provenance};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CorpusFormat {
    Csv,
    Jsonl,
    CelebaAttr,
}

impl CorpusFormat {
    pub fn parse(text: &str) -> Result<CorpusFormat> {
        match text {
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            "celeba-attr" => Ok(CorpusFormat::CelebaAttr),
            _ => Err(Error::config(format!("unknown corpus format '{text}'"))),
        }
    }

    /// Guesses from the file extension; CelebA files are plain .txt.
    pub fn infer(path: &Path) -> Result<CorpusFormat> {
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => Ok(CorpusFormat::Csv),
            Some("jsonl") => Ok(CorpusFormat::Jsonl),
            Some("txt") => Ok(CorpusFormat::CelebaAttr),
            other => Err(Error::config(format!(
                "cannot infer corpus format from extension {other:?}; pass it explicitly"
            ))),
        }
    }
}

fn parse_cell(schema: &AttributeSchema, k: usize, cell: &str, line: u64) -> Result<AttributeValue> {
    match schema.attrs()[k].kind {
        AttributeKind::Categorical { .. } => {
            let code = schema
                .parse_code(k, cell)
                .map_err(|e| Error::data(format!("line {line}: {e}")))?;
            Ok(AttributeValue::Categorical(code))
        }
        AttributeKind::Continuous { .. } => {
            let channels: std::result::Result<Vec<f64>, _> =
                cell.split(';').map(|c| c.trim().parse::<f64>()).collect();
            Ok(AttributeValue::Continuous(channels.map_err(|e| {
                Error::data(format!("line {line}: bad channel value in '{cell}': {e}"))
            })?))
        }
    }
}

fn render_cell(schema: &AttributeSchema, k: usize, value: &AttributeValue) -> String {
    match value {
        AttributeValue::Categorical(code) => schema.render_code(k, *code),
        AttributeValue::Continuous(v) => v
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(";"),
    }
}

fn load_corpus_csv(path: &Path, schema: &AttributeSchema) -> Result<Vec<LabeledExample>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?
        .clone();
    if headers.get(0) != Some("id") {
        return Err(Error::data(format!(
            "{}: first column must be 'id', found {:?}",
            path.display(),
            headers.get(0).unwrap_or("")
        )));
    }
    let mut column_attr = Vec::with_capacity(headers.len().saturating_sub(1));
    let mut seen = vec![false; schema.len()];
    for name in headers.iter().skip(1) {
        let k = schema
            .index_of(name)
            .ok_or_else(|| Error::data(format!("{}: unknown column '{name}'", path.display())))?;
        if seen[k] {
            return Err(Error::data(format!(
                "{}: duplicate column '{name}'",
                path.display()
            )));
        }
        seen[k] = true;
        column_attr.push(k);
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::data(format!(
            "{}: missing column for attribute '{}'",
            path.display(),
            schema.name_of(k)
        )));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != headers.len() {
            return Err(Error::data(format!(
                "line {line}: {} fields, header has {}",
                record.len(),
                headers.len()
            )));
        }
        let id = record.get(0).unwrap_or("").to_string();
        if id.is_empty() {
            return Err(Error::data(format!("line {line}: empty id")));
        }
        let mut values: Vec<Option<AttributeValue>> = vec![None; schema.len()];
        for (slot, cell) in column_attr.iter().zip(record.iter().skip(1)) {
            values[*slot] = Some(parse_cell(schema, *slot, cell, line)?);
        }
        let values: Vec<AttributeValue> = values
            .into_iter()
            .map(|v| v.expect("all columns mapped"))
            .collect();
        schema
            .check_vector(&values)
            .map_err(|e| Error::data(format!("line {line} (id '{id}'): {e}")))?;
        out.push(LabeledExample::new(id, values));
    }
    Ok(out)
}

fn load_corpus_jsonl(path: &Path, schema: &AttributeSchema) -> Result<Vec<LabeledExample>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let example: LabeledExample =
            serde_json::from_str(line).map_err(|e| Error::data(format!("line {n}: {e}")))?;
        schema
            .check_vector(&example.values)
            .map_err(|e| Error::data(format!("line {n} (id '{}'): {e}", example.id)))?;
        out.push(example);
    }
    Ok(out)
}

/// Parses the public CelebA attribute table: a count line, a line of
/// attribute names, then `id ±1 ±1 ...` rows. Only the schema's
/// attributes are kept; 1 maps to code 1, -1 to code 0.
fn load_corpus_celeba(path: &Path, schema: &AttributeSchema) -> Result<Vec<LabeledExample>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, count_line) = lines
        .next()
        .ok_or_else(|| Error::data(format!("{}: empty file", path.display())))?;
    count_line.trim().parse::<u64>().map_err(|_| {
        Error::data(format!(
            "line 1: expected an example count, found '{count_line}'"
        ))
    })?;
    let (_, name_line) = lines
        .next()
        .ok_or_else(|| Error::data(format!("{}: missing attribute-name line", path.display())))?;
    let columns: Vec<&str> = name_line.split_whitespace().collect();
    let mut attr_column = Vec::with_capacity(schema.len());
    for k in 0..schema.len() {
        let name = schema.name_of(k);
        let col = columns
            .iter()
            .position(|c| *c == name)
            .ok_or_else(|| Error::data(format!("line 2: attribute '{name}' not in file")))?;
        attr_column.push(col);
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let id = tokens.next().expect("nonempty line").to_string();
        let values: Vec<&str> = tokens.collect();
        if values.len() != columns.len() {
            return Err(Error::data(format!(
                "line {n}: {} values for {} attributes",
                values.len(),
                columns.len()
            )));
        }
        let mut vector = Vec::with_capacity(schema.len());
        for (k, &col) in attr_column.iter().enumerate() {
            let code = match values[col] {
                "1" => 1u32,
                "-1" => 0u32,
                other => {
                    return Err(Error::data(format!(
                        "line {n}: value '{other}' for '{}' is not 1 or -1",
                        schema.name_of(k)
                    )))
                }
            };
            vector.push(AttributeValue::Categorical(code));
        }
        schema
            .check_vector(&vector)
            .map_err(|e| Error::data(format!("line {n} (id '{id}'): {e}")))?;
        out.push(LabeledExample::new(id, vector));
    }
    Ok(out)
}

pub fn load_corpus(
    path: &Path,
    format: CorpusFormat,
    schema: &AttributeSchema,
) -> Result<Vec<LabeledExample>> {
    match format {
        CorpusFormat::Csv => load_corpus_csv(path, schema),
        CorpusFormat::Jsonl => load_corpus_jsonl(path, schema),
        CorpusFormat::CelebaAttr => load_corpus_celeba(path, schema),
    }
}

/// Writes a corpus as CSV or JSONL (the CelebA table is input-only).
pub fn save_corpus(
    path: &Path,
    format: CorpusFormat,
    schema: &AttributeSchema,
    examples: &[LabeledExample],
) -> Result<()> {
    match format {
        CorpusFormat::Csv => {
            let mut writer = csv::Writer::from_path(path)
                .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
            let mut header = vec!["id".to_string()];
            header.extend(schema.attrs().iter().map(|a| a.name.clone()));
            writer
                .write_record(&header)
                .map_err(|e| Error::data(e.to_string()))?;
            for ex in examples {
                let mut row = vec![ex.id.clone()];
                for (k, v) in ex.values.iter().enumerate() {
                    row.push(render_cell(schema, k, v));
                }
                writer
                    .write_record(&row)
                    .map_err(|e| Error::data(e.to_string()))?;
            }
            writer.flush()?;
            Ok(())
        }
        CorpusFormat::Jsonl => {
            let mut file = fs::File::create(path)?;
            for ex in examples {
                serde_json::to_writer(&mut file, ex).map_err(|e| Error::data(e.to_string()))?;
                file.write_all(b"\n")?;
            }
            Ok(())
        }
        CorpusFormat::CelebaAttr => Err(Error::config("celeba-attr is an input format only")),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
struct ManifestHeader {
    kind: String,
    domain: Domain,
    partition_hash: String,
    provenance: Provenance,
    examples: u64,
}

/// Writes a manifest as a header line plus one example per line.
pub fn save_manifest(path: &Path, manifest: &DomainManifest) -> Result<()> {
    let header = ManifestHeader {
        kind: "manifest".into(),
        domain: manifest.domain,
        partition_hash: manifest.partition_hash.clone(),
        provenance: manifest.provenance.clone(),
        examples: manifest.examples.len() as u64,
    };
    let mut file = fs::File::create(path)?;
    serde_json::to_writer(&mut file, &header).map_err(|e| Error::data(e.to_string()))?;
    file.write_all(b"\n")?;
    for ex in &manifest.examples {
        serde_json::to_writer(&mut file, ex).map_err(|e| Error::data(e.to_string()))?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

pub fn load_manifest(path: &Path) -> Result<DomainManifest> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, first) = lines
        .next()
        .ok_or_else(|| Error::data(format!("{}: empty manifest file", path.display())))?;
    let header: ManifestHeader = serde_json::from_str(first)
        .map_err(|e| Error::data(format!("line 1: not a manifest header: {e}")))?;
    if header.kind != "manifest" {
        return Err(Error::data(format!(
            "line 1: kind '{}' is not 'manifest'",
            header.kind
        )));
    }
    let mut examples = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let ex: LabeledExample =
            serde_json::from_str(line).map_err(|e| Error::data(format!("line {}: {e}", i + 1)))?;
        examples.push(ex);
    }
    if examples.len() as u64 != header.examples {
        return Err(Error::data(format!(
            "{}: header promises {} examples, file has {}",
            path.display(),
            header.examples,
            examples.len()
        )));
    }
    Ok(DomainManifest {
        domain: header.domain,
        partition_hash: header.partition_hash,
        provenance: header.provenance,
        examples,
    })
}

/// Plain id list, one per line, for piping to image tooling.
pub fn save_id_list(path: &Path, manifest: &DomainManifest) -> Result<()> {
    let mut file = fs::File::create(path)?;
    for ex in &manifest.examples {
        file.write_all(ex.id.as_bytes())?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// Provenance header of a triplet file.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TripletHeader {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dataset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition_hash: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl TripletHeader {
    pub fn new() -> TripletHeader {
        TripletHeader {
            kind: "triplets".into(),
            ..TripletHeader::default()
        }
    }
}

/// Writes triplets as JSONL, optionally preceded by a header object.
pub fn save_triplets(
    path: &Path,
    triplets: &[TranslationTriplet],
    header: Option<&TripletHeader>,
) -> Result<()> {
    let mut file = fs::File::create(path)?;
    if let Some(h) = header {
        let mut h = h.clone();
        h.kind = "triplets".into();
        serde_json::to_writer(&mut file, &h).map_err(|e| Error::data(e.to_string()))?;
        file.write_all(b"\n")?;
    }
    for t in triplets {
        serde_json::to_writer(&mut file, t).map_err(|e| Error::data(e.to_string()))?;
        file.write_all(b"\n")?;
    }
    Ok(())
}

/// Reads a triplet JSONL file; the header line is optional.
pub fn load_triplets(path: &Path) -> Result<(Vec<TranslationTriplet>, Option<TripletHeader>)> {
    let text = fs::read_to_string(path)?;
    let mut header = None;
    let mut triplets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        if n == 1 {
            if let Ok(value) = serde_json::from_str::<serde_json::Value>(line) {
                if value.get("kind").and_then(|k| k.as_str()) == Some("triplets") {
                    header = Some(
                        serde_json::from_value(value)
                            .map_err(|e| Error::data(format!("line 1: {e}")))?,
                    );
                    continue;
                }
            }
        }
        let t: TranslationTriplet =
            serde_json::from_str(line).map_err(|e| Error::data(format!("line {n}: {e}")))?;
        triplets.push(t);
    }
    Ok((triplets, header))
}

/// Writes triplets as CSV with `a_`/`b_`/`hat_` column prefixes.
/// Ground-truth vectors are JSONL-only.
pub fn save_triplets_csv(
    path: &Path,
    schema: &AttributeSchema,
    triplets: &[TranslationTriplet],
) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    let mut header = vec![
        "direction".to_string(),
        "a_id".to_string(),
        "b_id".to_string(),
    ];
    for prefix in ["a_", "b_", "hat_"] {
        for attr in schema.attrs() {
            header.push(format!("{prefix}{}", attr.name));
        }
    }
    writer
        .write_record(&header)
        .map_err(|e| Error::data(e.to_string()))?;
    for t in triplets {
        let mut row = vec![
            t.direction.to_string(),
            t.a_id.clone().unwrap_or_default(),
            t.b_id.clone().unwrap_or_default(),
        ];
        for vector in [&t.y_a, &t.y_b, &t.y_hat] {
            for (k, v) in vector.iter().enumerate() {
                row.push(render_cell(schema, k, v));
            }
        }
        writer
            .write_record(&row)
            .map_err(|e| Error::data(e.to_string()))?;
    }
    writer.flush()?;
    Ok(())
}

pub fn load_triplets_csv(path: &Path, schema: &AttributeSchema) -> Result<Vec<TranslationTriplet>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::data(format!("{}: {e}", path.display())))?
        .clone();
    let m = schema.len();
    let expected_cols = 3 + 3 * m;
    if headers.len() != expected_cols {
        return Err(Error::data(format!(
            "{}: {} columns, expected {expected_cols}",
            path.display(),
            headers.len()
        )));
    }
    for (want, got) in ["direction", "a_id", "b_id"].iter().zip(headers.iter()) {
        if *want != got {
            return Err(Error::data(format!(
                "{}: column '{got}' where '{want}' expected",
                path.display()
            )));
        }
    }
    for (block, prefix) in ["a_", "b_", "hat_"].iter().enumerate() {
        for k in 0..m {
            let got = headers.get(3 + block * m + k).unwrap_or("");
            let want = format!("{prefix}{}", schema.name_of(k));
            if got != want {
                return Err(Error::data(format!(
                    "{}: column '{got}' where '{want}' expected",
                    path.display()
                )));
            }
        }
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::data(format!("{}: {e}", path.display())))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != expected_cols {
            return Err(Error::data(format!(
                "line {line}: {} fields, header has {expected_cols}",
                record.len()
            )));
        }
        let direction = record
            .get(0)
            .unwrap_or("")
            .parse()
            .map_err(|e| Error::data(format!("line {line}: {e}")))?;
        let mut vectors = Vec::with_capacity(3);
        for block in 0..3 {
            let mut vector = Vec::with_capacity(m);
            for k in 0..m {
                let cell = record.get(3 + block * m + k).unwrap_or("");
                vector.push(parse_cell(schema, k, cell, line)?);
            }
            schema
                .check_vector(&vector)
                .map_err(|e| Error::data(format!("line {line}: {e}")))?;
            vectors.push(vector);
        }
        let y_hat = vectors.pop().expect("three blocks");
        let y_b = vectors.pop().expect("three blocks");
        let y_a = vectors.pop().expect("three blocks");
        let mut t = TranslationTriplet::new(direction, y_a, y_b, y_hat);
        t.a_id = Some(record.get(1).unwrap_or("").to_string()).filter(|s| !s.is_empty());
        t.b_id = Some(record.get(2).unwrap_or("").to_string()).filter(|s| !s.is_empty());
        out.push(t);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::builtin_config;
    use crate::schema::{AttributeDecl, Direction};
    use tempfile::TempDir;

    fn shapes_schema() -> AttributeSchema {
        builtin_config("3dshapes").unwrap().schema
    }

    fn example(id: &str, codes: &[u32]) -> LabeledExample {
        LabeledExample::new(
            id.to_string(),
            codes.iter().map(|&c| AttributeValue::cat(c)).collect(),
        )
    }

    #[test]
    fn csv_corpus_roundtrip() {
        let schema = shapes_schema();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("corpus.csv");
        let examples = vec![
            example("x1", &[0, 3, 0, 7, 4, 0]),
            example("x2", &[2, 9, 1, 7, 4, 14]),
            example("x3", &[1, 0, 0, 2, 0, 7]),
        ];
        save_corpus(&path, CorpusFormat::Csv, &schema, &examples).unwrap();
        let loaded = load_corpus(&path, CorpusFormat::Csv, &schema).unwrap();
        assert_eq!(loaded, examples);
        let text = fs::read_to_string(&path).unwrap();
        // Labels, not raw codes, in the cells.
        assert!(text.contains("cube"));
        assert!(text.contains("blue"));
    }

    #[test]
    fn csv_corpus_accepts_any_column_order_and_comments() {
        let schema = shapes_schema();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("corpus.csv");
        fs::write(
            &path,
            "id,orientation,shape,object_hue,floor_hue,wall_hue,size\n\
             # a comment line\n\
             x1,0,cube,red,red,blue,5\n",
        )
        .unwrap();
        let loaded = load_corpus(&path, CorpusFormat::Csv, &schema).unwrap();
        assert_eq!(loaded.len(), 1);
        assert_eq!(loaded[0].values[0], AttributeValue::cat(0));
        assert_eq!(loaded[0].values[5], AttributeValue::cat(7));
    }

    #[test]
    fn csv_corpus_errors_name_the_line() {
        let schema = shapes_schema();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("corpus.csv");
        fs::write(
            &path,
            "id,shape,object_hue,floor_hue,wall_hue,size,orientation\n\
             x1,cube,red,red,blue,5,0\n\
             x2,dodecahedron,red,red,blue,5,0\n",
        )
        .unwrap();
        let err = load_corpus(&path, CorpusFormat::Csv, &schema).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        fs::write(&path, "key,shape\nx,cube\n").unwrap();
        let err = load_corpus(&path, CorpusFormat::Csv, &schema).unwrap_err();
        assert!(err.to_string().contains("first column"), "{err}");
        fs::write(&path, "id,shape\nx,cube\n").unwrap();
        let err = load_corpus(&path, CorpusFormat::Csv, &schema).unwrap_err();
        assert!(err.to_string().contains("missing column"), "{err}");
    }

    #[test]
    fn jsonl_corpus_roundtrip() {
        let schema = shapes_schema();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("corpus.jsonl");
        let examples = vec![
            example("x1", &[0, 3, 0, 7, 4, 0]),
            example("x2", &[2, 9, 1, 7, 4, 14]),
        ];
        save_corpus(&path, CorpusFormat::Jsonl, &schema, &examples).unwrap();
        let loaded = load_corpus(&path, CorpusFormat::Jsonl, &schema).unwrap();
        assert_eq!(loaded, examples);
    }

    #[test]
    fn continuous_channels_survive_csv() {
        let schema = AttributeSchema::new(vec![
            AttributeDecl::continuous("pose", 3),
            AttributeDecl::categorical("identity", 4),
        ])
        .unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("corpus.csv");
        let examples = vec![LabeledExample::new(
            "p1".to_string(),
            vec![
                AttributeValue::Continuous(vec![0.125, -3.5, 42.0625]),
                AttributeValue::cat(2),
            ],
        )];
        save_corpus(&path, CorpusFormat::Csv, &schema, &examples).unwrap();
        let loaded = load_corpus(&path, CorpusFormat::Csv, &schema).unwrap();
        assert_eq!(loaded, examples);
    }

    #[test]
    fn celeba_attr_maps_signs_and_rejects_zero() {
        let schema = AttributeSchema::new(vec![
            AttributeDecl::categorical("Male", 2),
            AttributeDecl::categorical("Smiling", 2),
        ])
        .unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("attrs.txt");
        fs::write(
            &path,
            "3\nBlack_Hair Male Smiling\n\
             000001.jpg 1 -1 1\n\
             000002.jpg -1 1 -1\n\
             000003.jpg 1 1 1\n",
        )
        .unwrap();
        let loaded = load_corpus(&path, CorpusFormat::CelebaAttr, &schema).unwrap();
        assert_eq!(loaded.len(), 3);
        assert_eq!(loaded[0].id, "000001.jpg");
        assert_eq!(
            loaded[0].values,
            vec![AttributeValue::cat(0), AttributeValue::cat(1)]
        );
        assert_eq!(
            loaded[1].values,
            vec![AttributeValue::cat(1), AttributeValue::cat(0)]
        );

        fs::write(&path, "1\nBlack_Hair Male Smiling\n000001.jpg 1 0 1\n").unwrap();
        let err = load_corpus(&path, CorpusFormat::CelebaAttr, &schema).unwrap_err();
        assert!(err.to_string().contains("line 3"), "{err}");
        assert!(err.to_string().contains("not 1 or -1"), "{err}");

        fs::write(&path, "1\nBlack_Hair Smiling\n000001.jpg 1 1\n").unwrap();
        let err = load_corpus(&path, CorpusFormat::CelebaAttr, &schema).unwrap_err();
        assert!(err.to_string().contains("'Male' not in file"), "{err}");
    }

    #[test]
    fn manifest_roundtrip_and_count_check() {
        let schema = shapes_schema();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("a.manifest.jsonl");
        let manifest = DomainManifest {
            domain: Domain::A,
            partition_hash: "abc123".into(),
            provenance: Provenance {
                source: "corpus.csv".into(),
                filtered_at: None,
            },
            examples: vec![example("x1", &[0, 3, 0, 7, 4, 0])],
        };
        save_manifest(&path, &manifest).unwrap();
        let loaded = load_manifest(&path).unwrap();
        assert_eq!(loaded, manifest);
        let _ = schema;

        let mut text = fs::read_to_string(&path).unwrap();
        text.push_str(&serde_json::to_string(&example("x9", &[0, 3, 0, 7, 4, 0])).unwrap());
        text.push('\n');
        fs::write(&path, text).unwrap();
        let err = load_manifest(&path).unwrap_err();
        assert!(err.to_string().contains("promises 1 examples"), "{err}");
    }

    #[test]
    fn id_list_is_one_id_per_line() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("ids.txt");
        let manifest = DomainManifest {
            domain: Domain::B,
            partition_hash: "h".into(),
            provenance: Provenance::default(),
            examples: vec![example("x1", &[0]), example("x2", &[1])],
        };
        save_id_list(&path, &manifest).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), "x1\nx2\n");
    }

    #[test]
    fn triplet_jsonl_roundtrip_with_and_without_header() {
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("triplets.jsonl");
        let mut t = TranslationTriplet::new(
            Direction::A2B,
            vec![
                AttributeValue::cat(0),
                AttributeValue::Continuous(vec![1.5, 2.5]),
            ],
            vec![
                AttributeValue::cat(1),
                AttributeValue::Continuous(vec![0.5, 0.25]),
            ],
            vec![
                AttributeValue::cat(1),
                AttributeValue::Continuous(vec![1.5, 2.5]),
            ],
        );
        t.a_id = Some("a0".into());
        let triplets = vec![t];
        let mut header = TripletHeader::new();
        header.oracle = Some("guidance-identity".into());
        header.seed = Some(42);
        save_triplets(&path, &triplets, Some(&header)).unwrap();
        let (loaded, loaded_header) = load_triplets(&path).unwrap();
        assert_eq!(loaded, triplets);
        assert_eq!(loaded_header, Some(header));

        save_triplets(&path, &triplets, None).unwrap();
        let (loaded, loaded_header) = load_triplets(&path).unwrap();
        assert_eq!(loaded, triplets);
        assert_eq!(loaded_header, None);
    }

    #[test]
    fn triplet_csv_roundtrip() {
        let schema = AttributeSchema::new(vec![
            AttributeDecl::categorical("kind", 3),
            AttributeDecl::continuous("pose", 2),
        ])
        .unwrap();
        let dir = TempDir::new().unwrap();
        let path = dir.path().join("triplets.csv");
        let mut t1 = TranslationTriplet::new(
            Direction::A2B,
            vec![
                AttributeValue::cat(0),
                AttributeValue::Continuous(vec![1.5, 2.5]),
            ],
            vec![
                AttributeValue::cat(1),
                AttributeValue::Continuous(vec![0.5, 0.25]),
            ],
            vec![
                AttributeValue::cat(1),
                AttributeValue::Continuous(vec![1.5, 2.5]),
            ],
        );
        t1.a_id = Some("a0".into());
        t1.b_id = Some("b3".into());
        let t2 = TranslationTriplet::new(
            Direction::B2A,
            vec![
                AttributeValue::cat(2),
                AttributeValue::Continuous(vec![-1.0, 0.0]),
            ],
            vec![
                AttributeValue::cat(0),
                AttributeValue::Continuous(vec![3.0, 4.0]),
            ],
            vec![
                AttributeValue::cat(2),
                AttributeValue::Continuous(vec![3.0, 4.0]),
            ],
        );
        let triplets = vec![t1, t2];
        save_triplets_csv(&path, &schema, &triplets).unwrap();
        let loaded = load_triplets_csv(&path, &schema).unwrap();
        assert_eq!(loaded, triplets);
    }

    #[test]
    fn format_inference_uses_extensions() {
        assert_eq!(
            CorpusFormat::infer(Path::new("x.csv")).unwrap(),
            CorpusFormat::Csv
        );
        assert_eq!(
            CorpusFormat::infer(Path::new("x.jsonl")).unwrap(),
            CorpusFormat::Jsonl
        );
        assert_eq!(
            CorpusFormat::infer(Path::new("list_attr_celeba.txt")).unwrap(),
            CorpusFormat::CelebaAttr
        );
        assert!(CorpusFormat::infer(Path::new("x.bin")).is_err());
    }
}
