//! Runs every sub-run of an experiment and writes its outputs.
//!
//! Layout under the output directory:
//!
//! ```text
//! summary.json
//! summary.csv
//! <run>/replica_<r>/snapshot_<t>.csv       full asset vectors
//! <run>/replica_<r>/snapshot_<t>_hist.csv  histogram-only snapshots
//! <run>/replica_<r>/histogram.csv          final-state histogram
//! <run>/replica_<r>/gof.json
//! <run>/replica_<r>/run_meta.json
//! ```
//!
//! Everything is written to a staging directory first and moved into place
//! once all runs have succeeded.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use coinflip::{
    ks_two_sample, make_histogram, run, GofReport, HistRange, RunResult, SimConfig, SnapshotData,
    CONSERVATION_LIMIT, GENERATOR,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{derive_seed, AnalysisSpec, ExperimentSpec, Preset};
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub replica: u32,
    pub seed: u64,
    pub rule: String,
    pub init: String,
    pub n: usize,
    pub matches: u64,
    pub conservation_drift: f64,
    pub min_asset: f64,
    pub gof: GofReport,
    pub ks_pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PairwiseKs {
    pub a: String,
    pub b: String,
    pub ks: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct Thresholds {
    pub ks: f64,
    pub pairwise_ks: f64,
    pub conservation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub preset: Preset,
    pub seed: u64,
    pub seed_generated: bool,
    pub generator: String,
    pub thresholds: Thresholds,
    pub analysis: AnalysisSpec,
    pub runs: Vec<RunSummary>,
    /// Two-sample KS between the final states of replica 0 of each pair of
    /// sub-runs.
    pub pairwise_ks: Vec<PairwiseKs>,
    pub all_pass: bool,
}

struct Job {
    run_index: usize,
    name: String,
    replica: u32,
    sim: SimConfig,
}

struct Finished {
    summary: RunSummary,
    result: RunResult,
    wall_seconds: f64,
    sim: SimConfig,
}

fn write_file(
    path: &Path,
    fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut out = BufWriter::new(file);
    fill(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| CliError::io(path, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    write_file(path, |out| {
        serde_json::to_writer_pretty(&mut *out, value)?;
        out.write_all(b"\n")
    })
}

fn execute(job: &Job, analysis: &AnalysisSpec) -> Result<Finished, CliError> {
    let context = format!("{} replica {}", job.name, job.replica);
    let started = Instant::now();
    let result = run(&job.sim).map_err(|e| CliError::from_engine(&context, e))?;
    let wall_seconds = started.elapsed().as_secs_f64();

    let samples = result.final_assets.as_slice();
    let analyse = || -> coinflip::Result<GofReport> {
        let hist = make_histogram(samples, analysis.bins, HistRange::Auto, analysis.binning)?;
        GofReport::compute(samples, result.initial_mean, &hist, &analysis.moment_orders)
    };
    let gof = analyse().map_err(|e| CliError::from_engine(&context, e))?;
    let summary = RunSummary {
        name: job.name.clone(),
        replica: job.replica,
        seed: job.sim.seed,
        rule: job.sim.rule.name().to_string(),
        init: job.sim.init.name().to_string(),
        n: job.sim.n,
        matches: job.sim.total_matches,
        conservation_drift: result.conservation_drift,
        min_asset: result.final_assets.min(),
        ks_pass: gof.ks < analysis.ks_threshold,
        gof,
    };
    Ok(Finished {
        summary,
        result,
        wall_seconds,
        sim: job.sim.clone(),
    })
}

fn write_run(dir: &Path, done: &Finished, analysis: &AnalysisSpec) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    for snap in &done.result.snapshots {
        match &snap.data {
            SnapshotData::Assets(v) => write_file(
                &dir.join(format!("snapshot_{}.csv", snap.t_matches)),
                |out| v.write_csv(out),
            )?,
            SnapshotData::Histogram(h) => write_file(
                &dir.join(format!("snapshot_{}_hist.csv", snap.t_matches)),
                |out| h.write_csv(out),
            )?,
        }
    }
    let samples = done.result.final_assets.as_slice();
    let hist = make_histogram(samples, analysis.bins, HistRange::Auto, analysis.binning)
        .map_err(|e| CliError::from_engine(&done.summary.name, e))?;
    write_file(&dir.join("histogram.csv"), |out| hist.write_csv(out))?;
    write_json(&dir.join("gof.json"), &done.summary.gof)?;
    write_json(
        &dir.join("run_meta.json"),
        &json!({
            "seed": done.sim.seed,
            "generator": GENERATOR,
            "config": &done.sim,
            "conservation_drift": done.result.conservation_drift,
            "conservation_limit": CONSERVATION_LIMIT,
            "timing": { "wall_seconds": done.wall_seconds },
        }),
    )
}

fn write_summary_csv(path: &Path, summary: &Summary) -> Result<(), CliError> {
    write_file(path, |out| {
        write!(
            out,
            "run,replica,seed,rule,init,ks,l1,conservation_drift,min_asset"
        )?;
        for k in &summary.analysis.moment_orders {
            write!(out, ",moment_ratio_{k}")?;
        }
        writeln!(out, ",ks_pass")?;
        for r in &summary.runs {
            write!(
                out,
                "{},{},{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
                r.name,
                r.replica,
                r.seed,
                r.rule,
                r.init,
                r.gof.ks,
                r.gof.l1,
                r.conservation_drift,
                r.min_asset
            )?;
            for m in &r.gof.moment_ratios {
                write!(out, ",{:.16e}", m.ratio)?;
            }
            writeln!(out, ",{}", r.ks_pass)?;
        }
        Ok(())
    })
}

/// Moves every entry of `staging` into `target`, replacing existing ones.
fn publish(staging: &Path, target: &Path) -> Result<(), CliError> {
    let entries = fs::read_dir(staging).map_err(|e| CliError::io(staging, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(staging, e))?;
        let dest = target.join(entry.file_name());
        if dest.is_dir() {
            fs::remove_dir_all(&dest).map_err(|e| CliError::io(&dest, e))?;
        }
        fs::rename(entry.path(), &dest).map_err(|e| CliError::io(&dest, e))?;
    }
    fs::remove_dir(staging).map_err(|e| CliError::io(staging, e))
}

fn staging_dir(output_dir: &Path) -> PathBuf {
    output_dir.join(format!(".coinflip-staging-{}", std::process::id()))
}

/// Runs all sub-runs in parallel and writes outputs under
/// `spec.output_dir`. On error nothing is left behind in the output
/// directory besides what was there before.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<Summary, CliError> {
    let out = &spec.output_dir;
    let created = !out.exists();
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let staging = staging_dir(out);
    if let Err(e) = fs::create_dir(&staging) {
        if created {
            let _ = fs::remove_dir(out);
        }
        return Err(CliError::io(&staging, e));
    }
    let outcome = run_into(spec, &staging).and_then(|s| publish(&staging, out).map(|_| s));
    if outcome.is_err() {
        let _ = fs::remove_dir_all(&staging);
        if created {
            let _ = fs::remove_dir(out);
        }
    }
    outcome
}

fn run_into(spec: &ExperimentSpec, staging: &Path) -> Result<Summary, CliError> {
    let jobs: Vec<Job> = spec
        .runs
        .iter()
        .enumerate()
        .flat_map(|(k, sub)| {
            (0..spec.replicas).map(move |r| Job {
                run_index: k,
                name: sub.name.clone(),
                replica: r,
                sim: SimConfig {
                    seed: derive_seed(spec.seed, k, r),
                    ..sub.sim.clone()
                },
            })
        })
        .collect();

    let finished: Vec<Finished> = jobs
        .par_iter()
        .map(|job| execute(job, &spec.analysis))
        .collect::<Result<_, _>>()?;

    for (job, done) in jobs.iter().zip(&finished) {
        let dir = staging
            .join(&job.name)
            .join(format!("replica_{}", job.replica));
        write_run(&dir, done, &spec.analysis)?;
    }

    let leads: Vec<(&Job, &Finished)> = jobs
        .iter()
        .zip(&finished)
        .filter(|(job, _)| job.replica == 0)
        .collect();
    let mut pairwise = Vec::new();
    for (x, (job_a, a)) in leads.iter().enumerate() {
        for (job_b, b) in &leads[x + 1..] {
            debug_assert!(job_a.run_index < job_b.run_index);
            let ks = ks_two_sample(
                a.result.final_assets.as_slice(),
                b.result.final_assets.as_slice(),
            )
            .map_err(|e| CliError::from_engine("pairwise KS", e))?;
            pairwise.push(PairwiseKs {
                a: job_a.name.clone(),
                b: job_b.name.clone(),
                ks,
                pass: ks < spec.analysis.pairwise_threshold,
            });
        }
    }

    let runs: Vec<RunSummary> = finished.into_iter().map(|f| f.summary).collect();
    let all_pass = runs.iter().all(|r| r.ks_pass) && pairwise.iter().all(|p| p.pass);
    let summary = Summary {
        preset: spec.preset,
        seed: spec.seed,
        seed_generated: spec.seed_generated,
        generator: GENERATOR.to_string(),
        thresholds: Thresholds {
            ks: spec.analysis.ks_threshold,
            pairwise_ks: spec.analysis.pairwise_threshold,
            conservation: CONSERVATION_LIMIT,
        },
        analysis: spec.analysis.clone(),
        runs,
        pairwise_ks: pairwise,
        all_pass,
    };

    let mut doc = serde_json::to_value(&summary).expect("summary serializes");
    let generated_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    doc["generated_at_unix"] = json!(generated_at);
    write_json(&staging.join("summary.json"), &doc)?;
    write_summary_csv(&staging.join("summary.csv"), &summary)?;
    Ok(summary)
}
