//! Experiment artifacts: schema-versioned CSV files plus a JSON family
//! manifest. Every file starts with a `# schema=<name> seed=<seed>`
//! comment line so artifacts are self-describing and re-parseable here.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use mirlab::cutloop::GapValue;
use mirlab::features::{feature_names, FeatureVector, FEATURE_COUNT, FEATURE_SCHEMA_VERSION};
use mirlab::instgen::PerturbationConfig;
use mirlab::learning::{EvalReport, LabeledSample};
use serde::{Deserialize, Serialize};

use crate::commands::CliError;

pub const TRACES_SCHEMA: &str = "mirlab-traces-v1";
pub const DATASET_SCHEMA: &str = "mirlab-dataset-v1";
pub const SPLIT_SCHEMA: &str = "mirlab-split-v1";
pub const EVAL_SCHEMA: &str = "mirlab-eval-v1";
pub const COMPARE_SCHEMA: &str = "mirlab-compare-v1";
pub const REPORT_SCHEMA: &str = "mirlab-report-v1";
pub const MANIFEST_SCHEMA: &str = "mirlab-family-v1";

fn parse_failed(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("{}: {msg}", path.display()))
}

/// Writes the schema comment line and returns a CSV writer on the file.
fn csv_writer(path: &Path, schema: &str, seed: u64) -> Result<csv::Writer<File>, CliError> {
    let mut file = File::create(path)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", path.display())))?;
    writeln!(file, "# schema={schema} seed={seed}")
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))?;
    Ok(csv::Writer::from_writer(file))
}

/// Validates the comment line and returns a CSV reader plus the seed.
fn csv_reader(path: &Path, schema: &str) -> Result<(csv::Reader<File>, u64), CliError> {
    let file =
        File::open(path).map_err(|e| parse_failed(path, format!("cannot open: {e}")))?;
    let mut first = String::new();
    BufReader::new(&file)
        .read_line(&mut first)
        .map_err(|e| parse_failed(path, e))?;
    let first = first.trim();
    let mut seed = 0u64;
    let mut found = None;
    if let Some(rest) = first.strip_prefix("# ") {
        for token in rest.split_whitespace() {
            if let Some(s) = token.strip_prefix("schema=") {
                found = Some(s.to_string());
            }
            if let Some(s) = token.strip_prefix("seed=") {
                seed = s.parse().map_err(|e| parse_failed(path, format!("bad seed: {e}")))?;
            }
        }
    }
    match found {
        Some(s) if s == schema => {}
        Some(s) => {
            return Err(parse_failed(path, format!("schema {s}, expected {schema}")));
        }
        None => {
            return Err(parse_failed(path, format!("missing schema line, expected {schema}")));
        }
    }
    let reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(|e| parse_failed(path, e))?;
    Ok((reader, seed))
}

fn gap_to_field(gap: GapValue) -> String {
    match gap {
        GapValue::Percent(p) => format!("{p}"),
        GapValue::Degenerate => "degenerate".to_string(),
        GapValue::Unknown => "unknown".to_string(),
    }
}

fn gap_from_field(field: &str) -> Result<GapValue, String> {
    match field {
        "degenerate" => Ok(GapValue::Degenerate),
        "unknown" => Ok(GapValue::Unknown),
        num => num
            .parse()
            .map(GapValue::Percent)
            .map_err(|e| format!("bad gap {num}: {e}")),
    }
}

/// One CSV row of a per-round trace (generate and compare outputs).
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub variation: usize,
    pub round: usize,
    pub cuts_added: usize,
    pub lambda_rows: usize,
    pub lp_objective: f64,
    pub gap: GapValue,
    pub sep_wall_ms: u64,
    /// Empty except on the final round of a run.
    pub termination: String,
}

pub fn write_traces(path: &Path, seed: u64, rows: &[TraceRow]) -> Result<(), CliError> {
    let mut writer = csv_writer(path, TRACES_SCHEMA, seed)?;
    writer
        .write_record([
            "variation",
            "round",
            "cuts_added",
            "lambda_rows",
            "lp_objective",
            "gap_closed",
            "sep_wall_ms",
            "termination",
        ])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for row in rows {
        writer
            .write_record([
                row.variation.to_string(),
                row.round.to_string(),
                row.cuts_added.to_string(),
                row.lambda_rows.to_string(),
                format!("{}", row.lp_objective),
                gap_to_field(row.gap),
                row.sep_wall_ms.to_string(),
                row.termination.clone(),
            ])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

pub fn read_traces(path: &Path) -> Result<(u64, Vec<TraceRow>), CliError> {
    let (mut reader, seed) = csv_reader(path, TRACES_SCHEMA)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_failed(path, e))?;
        let field = |idx: usize| -> Result<&str, CliError> {
            record
                .get(idx)
                .ok_or_else(|| parse_failed(path, format!("missing column {idx}")))
        };
        rows.push(TraceRow {
            variation: field(0)?.parse().map_err(|e| parse_failed(path, e))?,
            round: field(1)?.parse().map_err(|e| parse_failed(path, e))?,
            cuts_added: field(2)?.parse().map_err(|e| parse_failed(path, e))?,
            lambda_rows: field(3)?.parse().map_err(|e| parse_failed(path, e))?,
            lp_objective: field(4)?.parse().map_err(|e| parse_failed(path, e))?,
            gap: gap_from_field(field(5)?).map_err(|e| parse_failed(path, e))?,
            sep_wall_ms: field(6)?.parse().map_err(|e| parse_failed(path, e))?,
            termination: field(7)?.to_string(),
        });
    }
    Ok((seed, rows))
}

pub fn write_dataset(path: &Path, seed: u64, samples: &[LabeledSample]) -> Result<(), CliError> {
    let mut file = File::create(path)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", path.display())))?;
    writeln!(
        file,
        "# schema={DATASET_SCHEMA} seed={seed} features={FEATURE_SCHEMA_VERSION}"
    )
    .map_err(|e| CliError::Runtime(e.to_string()))?;
    let mut writer = csv::Writer::from_writer(file);
    let mut header = vec!["variation".to_string(), "round".to_string(), "row".to_string()];
    header.extend(feature_names());
    header.push("label".to_string());
    writer
        .write_record(&header)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for sample in samples {
        let mut record = vec![
            sample.features.instance_id.clone(),
            sample.features.round.to_string(),
            sample.features.row_index.to_string(),
        ];
        record.extend(sample.features.values.iter().map(|v| format!("{v}")));
        record.push(if sample.label { "1" } else { "0" }.to_string());
        writer
            .write_record(&record)
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

pub fn read_dataset(path: &Path) -> Result<(u64, Vec<LabeledSample>), CliError> {
    let (mut reader, seed) = csv_reader(path, DATASET_SCHEMA)?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_failed(path, e))?;
        if record.len() != 3 + FEATURE_COUNT + 1 {
            return Err(parse_failed(
                path,
                format!("expected {} columns, found {}", 3 + FEATURE_COUNT + 1, record.len()),
            ));
        }
        let mut values = Vec::with_capacity(FEATURE_COUNT);
        for idx in 3..3 + FEATURE_COUNT {
            values.push(record[idx].parse().map_err(|e| parse_failed(path, e))?);
        }
        samples.push(LabeledSample {
            features: FeatureVector {
                values,
                row_index: record[2].parse().map_err(|e| parse_failed(path, e))?,
                round: record[1].parse().map_err(|e| parse_failed(path, e))?,
                instance_id: record[0].to_string(),
            },
            label: &record[3 + FEATURE_COUNT] == "1",
        });
    }
    Ok((seed, samples))
}

pub fn write_split(
    path: &Path,
    seed: u64,
    sides: &[(String, &'static str)],
) -> Result<(), CliError> {
    let mut writer = csv_writer(path, SPLIT_SCHEMA, seed)?;
    writer
        .write_record(["variation", "side"])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for (id, side) in sides {
        writer
            .write_record([id.as_str(), side])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

pub fn read_split(path: &Path) -> Result<(u64, HashMap<String, String>), CliError> {
    let (mut reader, seed) = csv_reader(path, SPLIT_SCHEMA)?;
    let mut sides = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_failed(path, e))?;
        sides.insert(record[0].to_string(), record[1].to_string());
    }
    Ok((seed, sides))
}

fn metric_field(value: Option<f64>) -> String {
    match value {
        Some(v) => format!("{v}"),
        None => "undefined".to_string(),
    }
}

pub fn write_eval(
    path: &Path,
    seed: u64,
    reports: &[(&str, EvalReport)],
) -> Result<(), CliError> {
    let mut writer = csv_writer(path, EVAL_SCHEMA, seed)?;
    writer
        .write_record(["side", "accuracy", "precision", "recall", "tp", "fp", "fn", "tn"])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for (side, report) in reports {
        writer
            .write_record([
                side.to_string(),
                format!("{}", report.accuracy),
                metric_field(report.precision),
                metric_field(report.recall),
                report.true_pos.to_string(),
                report.false_pos.to_string(),
                report.false_neg.to_string(),
                report.true_neg.to_string(),
            ])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

pub fn read_eval(path: &Path) -> Result<(u64, Vec<(String, EvalReport)>), CliError> {
    let (mut reader, seed) = csv_reader(path, EVAL_SCHEMA)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_failed(path, e))?;
        let metric = |s: &str| -> Result<Option<f64>, CliError> {
            if s == "undefined" {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|e| parse_failed(path, e))
            }
        };
        rows.push((
            record[0].to_string(),
            EvalReport {
                accuracy: record[1].parse().map_err(|e| parse_failed(path, e))?,
                precision: metric(&record[2])?,
                recall: metric(&record[3])?,
                true_pos: record[4].parse().map_err(|e| parse_failed(path, e))?,
                false_pos: record[5].parse().map_err(|e| parse_failed(path, e))?,
                false_neg: record[6].parse().map_err(|e| parse_failed(path, e))?,
                true_neg: record[7].parse().map_err(|e| parse_failed(path, e))?,
            },
        ));
    }
    Ok((seed, rows))
}

/// One row of the paired full-vs-reduced comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub variation: usize,
    pub side: String,
    pub separator: String,
    pub round: usize,
    pub gap: GapValue,
    pub cuts_added: usize,
    pub lambda_rows: usize,
    pub sep_wall_ms: u64,
    pub termination: String,
}

pub fn write_compare(path: &Path, seed: u64, rows: &[CompareRow]) -> Result<(), CliError> {
    let mut writer = csv_writer(path, COMPARE_SCHEMA, seed)?;
    writer
        .write_record([
            "variation",
            "side",
            "separator",
            "round",
            "gap_closed",
            "cuts_added",
            "lambda_rows",
            "sep_wall_ms",
            "termination",
        ])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for row in rows {
        writer
            .write_record([
                row.variation.to_string(),
                row.side.clone(),
                row.separator.clone(),
                row.round.to_string(),
                gap_to_field(row.gap),
                row.cuts_added.to_string(),
                row.lambda_rows.to_string(),
                row.sep_wall_ms.to_string(),
                row.termination.clone(),
            ])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

pub fn read_compare(path: &Path) -> Result<(u64, Vec<CompareRow>), CliError> {
    let (mut reader, seed) = csv_reader(path, COMPARE_SCHEMA)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_failed(path, e))?;
        rows.push(CompareRow {
            variation: record[0].parse().map_err(|e| parse_failed(path, e))?,
            side: record[1].to_string(),
            separator: record[2].to_string(),
            round: record[3].parse().map_err(|e| parse_failed(path, e))?,
            gap: gap_from_field(&record[4]).map_err(|e| parse_failed(path, e))?,
            cuts_added: record[5].parse().map_err(|e| parse_failed(path, e))?,
            lambda_rows: record[6].parse().map_err(|e| parse_failed(path, e))?,
            sep_wall_ms: record[7].parse().map_err(|e| parse_failed(path, e))?,
            termination: record[8].to_string(),
        });
    }
    Ok((seed, rows))
}

/// One aggregated row of the figure-ready report.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub separator: String,
    pub side: String,
    pub round: usize,
    /// Mean/std over variations with a numeric gap at this round.
    pub mean_gap: Option<f64>,
    pub std_gap: Option<f64>,
    /// Variations whose loop reached this round.
    pub survivors: usize,
}

pub fn write_report(path: &Path, seed: u64, rows: &[ReportRow]) -> Result<(), CliError> {
    let mut writer = csv_writer(path, REPORT_SCHEMA, seed)?;
    writer
        .write_record(["separator", "side", "round", "mean_gap", "std_gap", "survivors"])
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    for row in rows {
        writer
            .write_record([
                row.separator.clone(),
                row.side.clone(),
                row.round.to_string(),
                metric_field(row.mean_gap),
                metric_field(row.std_gap),
                row.survivors.to_string(),
            ])
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    writer.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(())
}

pub fn read_report(path: &Path) -> Result<(u64, Vec<ReportRow>), CliError> {
    let (mut reader, seed) = csv_reader(path, REPORT_SCHEMA)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| parse_failed(path, e))?;
        let metric = |s: &str| -> Result<Option<f64>, CliError> {
            if s == "undefined" {
                Ok(None)
            } else {
                s.parse().map(Some).map_err(|e| parse_failed(path, e))
            }
        };
        rows.push(ReportRow {
            separator: record[0].to_string(),
            side: record[1].to_string(),
            round: record[2].parse().map_err(|e| parse_failed(path, e))?,
            mean_gap: metric(&record[3])?,
            std_gap: metric(&record[4])?,
            survivors: record[5].parse().map_err(|e| parse_failed(path, e))?,
        });
    }
    Ok((seed, rows))
}

/// Limits recorded alongside a family so compare runs reproduce generate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LoopLimits {
    pub sep_time_limit_s: u64,
    pub loop_time_limit_s: u64,
    pub max_rounds: usize,
    pub eps_bits: usize,
    pub lambda_bound: f64,
    pub violation_cutoff: f64,
    pub sep_node_limit: u64,
    pub min_gap_pct: f64,
    pub oracle_box_cap: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ManifestVariation {
    pub id: usize,
    pub fingerprint: u64,
    pub int_costs: Vec<f64>,
    pub cont_costs: Vec<f64>,
}

/// The JSON family manifest produced by `generate`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub schema: String,
    pub seed: u64,
    pub base_path: String,
    pub base_name: String,
    pub feature_schema: String,
    pub perturbation: PerturbationConfig,
    pub limits: LoopLimits,
    pub variations: Vec<ManifestVariation>,
    pub kept: Vec<usize>,
    pub discarded: Vec<usize>,
    /// Variations whose loop failed, with the error text.
    pub failed: Vec<(usize, String)>,
}

pub fn write_manifest(path: &Path, manifest: &FamilyManifest) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", path.display())))
}

pub fn read_manifest(path: &Path) -> Result<FamilyManifest, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| parse_failed(path, format!("cannot open: {e}")))?;
    let manifest: FamilyManifest =
        serde_json::from_str(&text).map_err(|e| parse_failed(path, e))?;
    if manifest.schema != MANIFEST_SCHEMA {
        return Err(parse_failed(
            path,
            format!("schema {} (expected {MANIFEST_SCHEMA})", manifest.schema),
        ));
    }
    Ok(manifest)
}
