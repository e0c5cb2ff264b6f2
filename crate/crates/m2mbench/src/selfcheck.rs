//! Built-in consistency suite: reproduces the known baseline poles on
//! the toy fixtures and cross-checks the streamed metric path against
//! the brute-force expectation engine. The CLI exposes it as
//! `selfcheck`, exiting nonzero on any mismatch, so a fresh build can
//! prove its arithmetic before touching real data.

use crate::config::BUILTIN_CONFIGS;
use crate::error::Result;
use crate::fixtures::{pose_fixture, toy_manifests};
use crate::metrics::{compute_report, pose_report, EvalOptions, MetricReport};
use crate::oracles::{
    expected_metrics_bruteforce, generate_triplets, ExpectedReport, OracleKind, OracleSpec,
    Pairing, DEFAULT_PAIR_CAP,
};
use crate::schema::Direction;
use crate::splitter::verify_manifest;

/// One named check with its outcome.
#[derive(Clone, Debug)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn pass(name: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed: true,
            detail: String::new(),
        }
    }

    fn fail(name: impl Into<String>, detail: impl Into<String>) -> Check {
        Check {
            name: name.into(),
            passed: false,
            detail: detail.into(),
        }
    }

    fn from(name: impl Into<String>, result: std::result::Result<(), String>) -> Check {
        match result {
            Ok(()) => Check::pass(name),
            Err(detail) => Check::fail(name, detail),
        }
    }
}

fn exact(label: &str, got: f64, want: f64) -> std::result::Result<(), String> {
    if got == want {
        Ok(())
    } else {
        Err(format!("{label}: got {got}, want {want}"))
    }
}

fn content_pole(report: &MetricReport) -> std::result::Result<(), String> {
    exact("Q_tr", report.aggregates.q_tr_mean, 0.0)?;
    exact("D", report.aggregates.d, 50.0)?;
    exact("D_s A2B", report.d_s_a2b.value_percent, 0.0)?;
    exact("D_s B2A", report.d_s_b2a.value_percent, 0.0)?;
    exact("D_c", report.aggregates.d_c_mean, 100.0)?;
    exact("B", report.bias.value_percent, 0.0)
}

fn guidance_pole(report: &MetricReport) -> std::result::Result<(), String> {
    exact("Q_tr", report.aggregates.q_tr_mean, 100.0)?;
    exact("D", report.aggregates.d, 50.0)?;
    exact("D_s A2B", report.d_s_a2b.value_percent, 100.0)?;
    exact("D_s B2A", report.d_s_b2a.value_percent, 100.0)?;
    exact("D_c", report.aggregates.d_c_mean, 0.0)?;
    exact("B", report.bias.value_percent, 0.0)
}

fn perfect_pole(expected: &ExpectedReport) -> std::result::Result<(), String> {
    exact("Q_tr", expected.aggregates.q_tr_mean, 100.0)?;
    exact("D_s A2B", expected.d_s_a2b.value_percent, 100.0)?;
    exact("D_s B2A", expected.d_s_b2a.value_percent, 100.0)?;
    exact("D_c", expected.aggregates.d_c_mean, 100.0)?;
    exact("D", expected.aggregates.d, 100.0)?;
    exact("B", expected.bias.value_percent, 0.0)
}

fn perfect_copier(config: &crate::config::DatasetConfig) -> OracleKind {
    let mut copied: Vec<usize> = config
        .partition
        .specific_a
        .iter()
        .chain(&config.partition.specific_b)
        .copied()
        .collect();
    copied.sort_unstable();
    OracleKind::StyleCopier { copied }
}

/// Compares a streamed report with brute-force expectations within a
/// 3-sigma binomial tolerance per metric (exact when sigma is zero).
pub fn within_binomial_tolerance(
    streamed: &MetricReport,
    expected: &ExpectedReport,
) -> std::result::Result<(), String> {
    let pairs = [
        ("Q_tr A2B", &streamed.q_tr_a2b, &expected.q_tr_a2b),
        ("Q_tr B2A", &streamed.q_tr_b2a, &expected.q_tr_b2a),
        ("D_s A2B", &streamed.d_s_a2b, &expected.d_s_a2b),
        ("D_s B2A", &streamed.d_s_b2a, &expected.d_s_b2a),
        ("D_c A2B", &streamed.d_c_a2b, &expected.d_c_a2b),
        ("D_c B2A", &streamed.d_c_b2a, &expected.d_c_b2a),
    ];
    for (label, got, want) in pairs {
        // sigma of the macro average: sqrt(sum p_k(1-p_k)/n_k) / K over
        // the attributes with defined rates, percent scale.
        let mut variance = 0.0;
        let mut defined = 0.0;
        for score in &want.per_attribute {
            let (Some(p), Some(n)) = (
                score.rate_percent.map(|r| r / 100.0),
                got.per_attribute
                    .iter()
                    .find(|s| s.attribute == score.attribute)
                    .filter(|s| s.conditioned > 0)
                    .map(|s| s.conditioned as f64),
            ) else {
                continue;
            };
            variance += p * (1.0 - p) / n;
            defined += 1.0;
        }
        if defined == 0.0 {
            return Err(format!("{label}: no commonly defined attributes"));
        }
        let sigma = variance.sqrt() / defined * 100.0;
        let delta = (got.value_percent - want.value_percent).abs();
        if delta > 3.0 * sigma + 1e-9 {
            return Err(format!(
                "{label}: streamed {} vs expected {} exceeds 3 sigma = {}",
                got.value_percent,
                want.value_percent,
                3.0 * sigma
            ));
        }
    }
    Ok(())
}

/// Runs the whole suite; failures come back as entries, not errors.
pub fn run_selfcheck() -> Vec<Check> {
    let mut checks = Vec::new();
    for dataset in BUILTIN_CONFIGS {
        checks.extend(
            dataset_checks(dataset).unwrap_or_else(|e| {
                vec![Check::fail(format!("{dataset}: fixtures"), e.to_string())]
            }),
        );
    }
    checks.extend(
        pose_checks().unwrap_or_else(|e| vec![Check::fail("pose: fixtures", e.to_string())]),
    );
    checks
}

fn dataset_checks(dataset: &str) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let (config, a, b) = toy_manifests(dataset)?;
    for m in [&a, &b] {
        let verify = verify_manifest(m, &config.schema, &config.partition);
        checks.push(Check::from(
            format!("{dataset}: domain {} toy manifest verifies", m.domain),
            if verify.is_ok() {
                Ok(())
            } else {
                Err(format!("{} violation(s)", verify.violations.len()))
            },
        ));
    }

    let evaluate = |kind: OracleKind| -> Result<MetricReport> {
        let spec = OracleSpec { kind, seed: 42 };
        let triplets = generate_triplets(
            &spec,
            &config.schema,
            &config.partition,
            &a,
            &b,
            1,
            Pairing::Exhaustive,
            DEFAULT_PAIR_CAP,
        )?;
        compute_report(
            &triplets,
            &config.schema,
            &config.partition,
            &EvalOptions::default(),
        )
    };

    match evaluate(OracleKind::ContentIdentity) {
        Ok(report) => checks.push(Check::from(
            format!("{dataset}: content-identity pole"),
            content_pole(&report),
        )),
        Err(e) => checks.push(Check::fail(
            format!("{dataset}: content-identity pole"),
            e.to_string(),
        )),
    }
    match evaluate(OracleKind::GuidanceIdentity) {
        Ok(report) => checks.push(Check::from(
            format!("{dataset}: guidance-identity pole"),
            guidance_pole(&report),
        )),
        Err(e) => checks.push(Check::fail(
            format!("{dataset}: guidance-identity pole"),
            e.to_string(),
        )),
    }

    let copier = perfect_copier(&config);
    let spec = OracleSpec {
        kind: copier,
        seed: 42,
    };
    match expected_metrics_bruteforce(
        &spec,
        &config.schema,
        &config.partition,
        &a,
        &b,
        30.0,
        DEFAULT_PAIR_CAP,
    ) {
        Ok(expected) => checks.push(Check::from(
            format!("{dataset}: perfect copier optimum (brute force)"),
            perfect_pole(&expected),
        )),
        Err(e) => checks.push(Check::fail(
            format!("{dataset}: perfect copier optimum (brute force)"),
            e.to_string(),
        )),
    }

    // Deterministic oracles: streamed metrics over the exhaustive pair
    // population must equal brute force bit for bit.
    for kind in [
        OracleKind::ContentIdentity,
        OracleKind::GuidanceIdentity,
        perfect_copier(&config),
    ] {
        let name = format!("{dataset}: streamed equals brute force ({})", kind.name());
        let spec = OracleSpec { kind, seed: 42 };
        let outcome = (|| -> Result<std::result::Result<(), String>> {
            let triplets = generate_triplets(
                &spec,
                &config.schema,
                &config.partition,
                &a,
                &b,
                1,
                Pairing::Exhaustive,
                DEFAULT_PAIR_CAP,
            )?;
            let streamed = compute_report(
                &triplets,
                &config.schema,
                &config.partition,
                &EvalOptions::default(),
            )?;
            let expected = expected_metrics_bruteforce(
                &spec,
                &config.schema,
                &config.partition,
                &a,
                &b,
                30.0,
                DEFAULT_PAIR_CAP,
            )?;
            for (label, got, want) in [
                (
                    "Q_tr",
                    streamed.aggregates.q_tr_mean,
                    expected.aggregates.q_tr_mean,
                ),
                ("D", streamed.aggregates.d, expected.aggregates.d),
                (
                    "D_c",
                    streamed.aggregates.d_c_mean,
                    expected.aggregates.d_c_mean,
                ),
                (
                    "B",
                    streamed.bias.value_percent,
                    expected.bias.value_percent,
                ),
            ] {
                if got.to_bits() != want.to_bits() {
                    return Ok(Err(format!("{label}: streamed {got} != brute {want}")));
                }
            }
            Ok(Ok(()))
        })();
        match outcome {
            Ok(result) => checks.push(Check::from(name, result)),
            Err(e) => checks.push(Check::fail(name, e.to_string())),
        }
    }

    // A sampling oracle: Monte-Carlo agreement within 3 sigma.
    let spec = OracleSpec {
        kind: OracleKind::RandomTarget,
        seed: 42,
    };
    let name = format!("{dataset}: random-target within binomial tolerance");
    let outcome = (|| -> Result<std::result::Result<(), String>> {
        let triplets = generate_triplets(
            &spec,
            &config.schema,
            &config.partition,
            &a,
            &b,
            20_000,
            Pairing::UniformRandom,
            DEFAULT_PAIR_CAP,
        )?;
        let streamed = compute_report(
            &triplets,
            &config.schema,
            &config.partition,
            &EvalOptions::default(),
        )?;
        let expected = expected_metrics_bruteforce(
            &spec,
            &config.schema,
            &config.partition,
            &a,
            &b,
            30.0,
            DEFAULT_PAIR_CAP,
        )?;
        Ok(within_binomial_tolerance(&streamed, &expected))
    })();
    match outcome {
        Ok(result) => checks.push(Check::from(name, result)),
        Err(e) => checks.push(Check::fail(name, e.to_string())),
    }

    Ok(checks)
}

fn pose_checks() -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let (config, a, b) = pose_fixture()?;
    let pose_attr = config.schema.require_index("pose")?;

    // Echoing the input means zero pose distance and a perfect match.
    let spec = OracleSpec {
        kind: OracleKind::ContentIdentity,
        seed: 42,
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
    )?;
    match pose_report(&triplets, &config.schema, pose_attr) {
        Ok(pose) => {
            let mut result = exact("D_p", pose.d_p, 0.0);
            if result.is_ok() {
                result = exact("PM", pose.pose_match, 1.0);
            }
            checks.push(Check::from("pose: input echo has D_p=0, PM=1", result));
        }
        Err(e) => checks.push(Check::fail(
            "pose: input echo has D_p=0, PM=1",
            e.to_string(),
        )),
    }

    // Random pool outputs match the input half of the time.
    let spec = OracleSpec {
        kind: OracleKind::RandomTriplets,
        seed: 42,
    };
    let triplets = generate_triplets(
        &spec,
        &config.schema,
        &config.partition,
        &a,
        &b,
        5_000,
        Pairing::UniformRandom,
        DEFAULT_PAIR_CAP,
    )?;
    match pose_report(&triplets, &config.schema, pose_attr) {
        Ok(pose) => {
            let delta = (pose.pose_match - 0.5).abs();
            checks.push(Check::from(
                "pose: random outputs match input half the time",
                if delta <= 0.02 {
                    Ok(())
                } else {
                    Err(format!("PM = {}, want 0.50 +/- 0.02", pose.pose_match))
                },
            ));
        }
        Err(e) => checks.push(Check::fail(
            "pose: random outputs match input half the time",
            e.to_string(),
        )),
    }

    // Both directions contribute triplets.
    let directions: Vec<Direction> = triplets.iter().map(|t| t.direction).collect();
    checks.push(Check::from(
        "pose: both directions generated",
        if directions.contains(&Direction::A2B) && directions.contains(&Direction::B2A) {
            Ok(())
        } else {
            Err("one direction missing".into())
        },
    ));
    Ok(checks)
}
