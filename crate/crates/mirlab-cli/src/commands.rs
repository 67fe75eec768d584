//! The four experiment commands: generate, train, compare, report.
//!
//! Each variation pipeline is independent, so generate and compare can
//! fan work out over a rayon pool; results are merged by variation id so
//! artifacts come out identical regardless of the worker count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use rayon::prelude::*;
use thiserror::Error;

use mirlab::cutloop::{
    run_cutting_loop, ConstraintClassifier, GapValue, GbtClassifier, LoopConfig, LoopRun,
};
use mirlab::instgen::{gap_keeps, generate_family, InstanceFamily, PerturbationConfig, Variation};
use mirlab::learning::{evaluate, split_by_variation, train_gbt, GbtHyperparams, GbtModel};
use mirlab::mirsep::SeparationConfig;
use mirlab::model::{to_standard_form, MipInstance};
use mirlab::mps::parse_mps;

use crate::artifacts::{
    self, CompareRow, FamilyManifest, LoopLimits, ManifestVariation, ReportRow, TraceRow,
};

/// Failure classes map to distinct exit codes: parse 2, config 3,
/// runtime 4.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Config(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

/// Everything a full experiment needs; assembled by the CLI layer.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub base_path: PathBuf,
    pub out_dir: PathBuf,
    pub family_size: usize,
    pub seed: u64,
    pub sep_time_limit: Duration,
    pub loop_time_limit: Duration,
    pub max_rounds: usize,
    pub eps_bits: usize,
    pub lambda_bound: f64,
    pub violation_cutoff: f64,
    pub sep_node_limit: u64,
    pub min_gap_pct: f64,
    pub oracle_box_cap: u64,
    pub split_fraction: f64,
    pub threshold: f64,
    pub workers: usize,
    pub hyperparams: GbtHyperparams,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            base_path: PathBuf::new(),
            out_dir: PathBuf::new(),
            family_size: 20,
            seed: 0,
            sep_time_limit: Duration::from_secs(600),
            loop_time_limit: Duration::from_secs(3 * 3600),
            max_rounds: 1_000_000,
            eps_bits: 6,
            lambda_bound: 1.0,
            violation_cutoff: 1e-4,
            sep_node_limit: 200_000,
            min_gap_pct: 5.0,
            oracle_box_cap: 10,
            split_fraction: 0.8,
            threshold: 0.5,
            workers: 1,
            hyperparams: GbtHyperparams::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            return Err(CliError::Config(format!(
                "split fraction {} outside (0, 1)",
                self.split_fraction
            )));
        }
        if self.workers == 0 {
            return Err(CliError::Config("workers must be at least 1".into()));
        }
        if self.eps_bits == 0 {
            return Err(CliError::Config("eps bits must be at least 1".into()));
        }
        if self.min_gap_pct < 0.0 || self.min_gap_pct > 100.0 {
            return Err(CliError::Config(format!(
                "min gap {} outside [0, 100]",
                self.min_gap_pct
            )));
        }
        Ok(())
    }

    pub fn loop_config(&self, collect: bool) -> LoopConfig {
        LoopConfig {
            max_wall_time: self.loop_time_limit,
            separation: SeparationConfig {
                num_eps: self.eps_bits,
                lambda_bound: self.lambda_bound,
                time_limit: self.sep_time_limit,
                node_limit: self.sep_node_limit,
                violation_cutoff: self.violation_cutoff,
                allowed_rows: None,
            },
            max_rounds: self.max_rounds,
            oracle_box_cap: self.oracle_box_cap,
            collect_training_data: collect,
            ..LoopConfig::default()
        }
    }

    fn limits(&self) -> LoopLimits {
        LoopLimits {
            sep_time_limit_s: self.sep_time_limit.as_secs(),
            loop_time_limit_s: self.loop_time_limit.as_secs(),
            max_rounds: self.max_rounds,
            eps_bits: self.eps_bits,
            lambda_bound: self.lambda_bound,
            violation_cutoff: self.violation_cutoff,
            sep_node_limit: self.sep_node_limit,
            min_gap_pct: self.min_gap_pct,
            oracle_box_cap: self.oracle_box_cap,
        }
    }
}

fn load_base(path: &Path) -> Result<MipInstance, CliError> {
    let general = parse_mps(path).map_err(|e| CliError::Parse(e.to_string()))?;
    to_standard_form(&general).map_err(|e| CliError::Parse(e.to_string()))
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))
}

fn trace_rows_of(variation: usize, run: &LoopRun) -> Vec<TraceRow> {
    run.traces
        .iter()
        .map(|t| TraceRow {
            variation,
            round: t.round,
            cuts_added: t.cuts_added,
            lambda_rows: t.lambda_rows,
            lp_objective: t.lp_objective,
            gap: t.gap_closed,
            sep_wall_ms: t.separation_wall.as_millis() as u64,
            termination: t.termination.map(|r| r.to_string()).unwrap_or_default(),
        })
        .collect()
}

/// Instance id used across dataset, split and compare artifacts.
fn instance_id(base_name: &str, variation: usize) -> String {
    format!("{base_name}_v{variation}")
}

pub struct GenerateOutput {
    pub manifest_path: PathBuf,
    pub traces_path: PathBuf,
    pub dataset_path: PathBuf,
    pub kept: usize,
    pub discarded: usize,
    pub failed: usize,
}

/// Generates a family, runs the full separator on every variation, and
/// writes the manifest, trace and dataset artifacts.
pub fn cmd_generate(config: &ExperimentConfig) -> Result<GenerateOutput, CliError> {
    config.validate()?;
    let base = load_base(&config.base_path)?;
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", config.out_dir.display())))?;

    let perturbation = PerturbationConfig::new(config.seed, config.family_size);
    let family = generate_family(&base, &perturbation, true)
        .map_err(|e| CliError::Runtime(e.to_string()))?;

    let loop_config = config.loop_config(true);
    let pool = thread_pool(config.workers)?;
    let results: Vec<(usize, Result<LoopRun, String>)> = pool.install(|| {
        family
            .variations
            .par_iter()
            .map(|variation| {
                let inst = family.instantiate(variation);
                let run = run_cutting_loop(&inst, &loop_config, None)
                    .map_err(|e| e.to_string());
                (variation.id, run)
            })
            .collect()
    });

    let mut trace_rows = Vec::new();
    let mut samples = Vec::new();
    let mut kept = Vec::new();
    let mut discarded = Vec::new();
    let mut failed = Vec::new();
    let mut sorted = results;
    sorted.sort_by_key(|(id, _)| *id);
    for (id, result) in sorted {
        match result {
            Ok(run) => {
                trace_rows.extend(trace_rows_of(id, &run));
                if gap_keeps(run.final_gap(), config.min_gap_pct) {
                    kept.push(id);
                    samples.extend(run.samples);
                } else {
                    discarded.push(id);
                }
            }
            Err(msg) => failed.push((id, msg)),
        }
    }

    let manifest = FamilyManifest {
        schema: artifacts::MANIFEST_SCHEMA.to_string(),
        seed: config.seed,
        base_path: config.base_path.display().to_string(),
        base_name: base.name.clone(),
        feature_schema: mirlab::features::FEATURE_SCHEMA_VERSION.to_string(),
        perturbation,
        limits: config.limits(),
        variations: family
            .variations
            .iter()
            .map(|v| ManifestVariation {
                id: v.id,
                fingerprint: v.fingerprint,
                int_costs: v.int_costs.clone(),
                cont_costs: v.cont_costs.clone(),
            })
            .collect(),
        kept: kept.clone(),
        discarded: discarded.clone(),
        failed: failed.clone(),
    };

    let manifest_path = config.out_dir.join("family.json");
    let traces_path = config.out_dir.join("traces.csv");
    let dataset_path = config.out_dir.join("dataset.csv");
    artifacts::write_manifest(&manifest_path, &manifest)?;
    artifacts::write_traces(&traces_path, config.seed, &trace_rows)?;
    artifacts::write_dataset(&dataset_path, config.seed, &samples)?;
    Ok(GenerateOutput {
        manifest_path,
        traces_path,
        dataset_path,
        kept: kept.len(),
        discarded: discarded.len(),
        failed: failed.len(),
    })
}

pub struct TrainOutput {
    pub model_path: PathBuf,
    pub split_path: PathBuf,
    pub eval_path: PathBuf,
    pub train_samples: usize,
    pub test_samples: usize,
    pub single_class: bool,
}

/// Splits a dataset per variation, trains the classifier and writes the
/// model, split and evaluation artifacts.
pub fn cmd_train(
    dataset_path: &Path,
    out_dir: &Path,
    config: &ExperimentConfig,
) -> Result<TrainOutput, CliError> {
    config.validate()?;
    let (_, samples) = artifacts::read_dataset(dataset_path)?;
    if samples.is_empty() {
        return Err(CliError::Config("dataset has no observations".into()));
    }
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", out_dir.display())))?;

    let (train, test) = split_by_variation(&samples, config.split_fraction, config.seed)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (model, report) =
        train_gbt(&train, &config.hyperparams).map_err(|e| CliError::Config(e.to_string()))?;
    let train_eval = evaluate(&model, &train).map_err(|e| CliError::Runtime(e.to_string()))?;
    let test_eval = evaluate(&model, &test).map_err(|e| CliError::Runtime(e.to_string()))?;

    let model_path = out_dir.join("model.json");
    std::fs::write(&model_path, model.to_json())
        .map_err(|e| CliError::Runtime(format!("write {}: {e}", model_path.display())))?;

    let mut sides: Vec<(String, &'static str)> = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for sample in &train {
        if seen.insert(sample.features.instance_id.clone()) {
            sides.push((sample.features.instance_id.clone(), "train"));
        }
    }
    for sample in &test {
        if seen.insert(sample.features.instance_id.clone()) {
            sides.push((sample.features.instance_id.clone(), "test"));
        }
    }
    sides.sort();
    let split_path = out_dir.join("split.csv");
    artifacts::write_split(&split_path, config.seed, &sides)?;

    let eval_path = out_dir.join("eval.csv");
    artifacts::write_eval(
        &eval_path,
        config.seed,
        &[("train", train_eval), ("test", test_eval)],
    )?;
    Ok(TrainOutput {
        model_path,
        split_path,
        eval_path,
        train_samples: train.len(),
        test_samples: test.len(),
        single_class: report.single_class,
    })
}

pub struct CompareOutput {
    pub compare_path: PathBuf,
    pub variations: usize,
}

/// Runs the full and the reduced separator on every family variation and
/// writes the paired per-round rows.
pub fn cmd_compare(
    manifest_path: &Path,
    model_path: &Path,
    split_path: &Path,
    out_dir: &Path,
    config: &ExperimentConfig,
) -> Result<CompareOutput, CliError> {
    config.validate()?;
    let manifest = artifacts::read_manifest(manifest_path)?;
    let model_text = std::fs::read_to_string(model_path)
        .map_err(|e| CliError::Parse(format!("{}: {e}", model_path.display())))?;
    let model = GbtModel::from_json(&model_text).map_err(|e| CliError::Parse(e.to_string()))?;
    let (_, sides) = artifacts::read_split(split_path)?;
    let base = load_base(Path::new(&manifest.base_path))?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", out_dir.display())))?;

    let family = InstanceFamily {
        base,
        variations: manifest
            .variations
            .iter()
            .map(|v| Variation {
                id: v.id,
                int_costs: v.int_costs.clone(),
                cont_costs: v.cont_costs.clone(),
                fingerprint: v.fingerprint,
            })
            .collect(),
    };

    let loop_config = config.loop_config(false);
    let pool = thread_pool(config.workers)?;
    let threshold = config.threshold;
    let results: Vec<(usize, Result<Vec<CompareRow>, String>)> = pool.install(|| {
        family
            .variations
            .par_iter()
            .map(|variation| {
                let inst = family.instantiate(variation);
                let id = instance_id(&manifest.base_name, variation.id);
                let side = sides.get(&id).cloned().unwrap_or_else(|| "discarded".to_string());
                let run_pair = (|| -> Result<Vec<CompareRow>, String> {
                    let mut rows = Vec::new();
                    let full = run_cutting_loop(&inst, &loop_config, None)
                        .map_err(|e| e.to_string())?;
                    let classifier = GbtClassifier {
                        model: model.clone(),
                        threshold,
                    };
                    let reduced =
                        run_cutting_loop(&inst, &loop_config, Some(&classifier as &dyn ConstraintClassifier))
                            .map_err(|e| e.to_string())?;
                    for (separator, run) in [("full", &full), ("reduced", &reduced)] {
                        for t in &run.traces {
                            rows.push(CompareRow {
                                variation: variation.id,
                                side: side.clone(),
                                separator: separator.to_string(),
                                round: t.round,
                                gap: t.gap_closed,
                                cuts_added: t.cuts_added,
                                lambda_rows: t.lambda_rows,
                                sep_wall_ms: t.separation_wall.as_millis() as u64,
                                termination: t
                                    .termination
                                    .map(|r| r.to_string())
                                    .unwrap_or_default(),
                            });
                        }
                    }
                    Ok(rows)
                })();
                (variation.id, run_pair)
            })
            .collect()
    });

    let mut sorted = results;
    sorted.sort_by_key(|(id, _)| *id);
    let mut rows = Vec::new();
    let mut ran = 0;
    for (id, result) in sorted {
        match result {
            Ok(mut variation_rows) => {
                ran += 1;
                rows.append(&mut variation_rows);
            }
            Err(msg) => {
                eprintln!("variation {id} failed: {msg}");
            }
        }
    }
    let compare_path = out_dir.join("compare.csv");
    artifacts::write_compare(&compare_path, config.seed, &rows)?;
    Ok(CompareOutput {
        compare_path,
        variations: ran,
    })
}

/// Aggregates a comparison into per-round mean/std gap and survivor
/// counts, one row per (separator, side, round).
pub fn cmd_report(compare_path: &Path, out_dir: &Path, seed: u64) -> Result<PathBuf, CliError> {
    let (_, rows) = artifacts::read_compare(compare_path)?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("create {}: {e}", out_dir.display())))?;

    let mut groups: BTreeMap<(String, String, usize), Vec<GapValue>> = BTreeMap::new();
    for row in &rows {
        groups
            .entry((row.separator.clone(), row.side.clone(), row.round))
            .or_default()
            .push(row.gap);
    }
    let mut report_rows = Vec::new();
    for ((separator, side, round), gaps) in groups {
        let numeric: Vec<f64> = gaps.iter().filter_map(|g| g.as_percent()).collect();
        let (mean, std) = if numeric.is_empty() {
            (None, None)
        } else {
            let n = numeric.len() as f64;
            let mean = numeric.iter().sum::<f64>() / n;
            let var = numeric.iter().map(|g| (g - mean) * (g - mean)).sum::<f64>() / n;
            (Some(mean), Some(var.sqrt()))
        };
        report_rows.push(ReportRow {
            separator,
            side,
            round,
            mean_gap: mean,
            std_gap: std,
            survivors: gaps.len(),
        });
    }
    let report_path = out_dir.join("report.csv");
    artifacts::write_report(&report_path, seed, &report_rows)?;
    Ok(report_path)
}
