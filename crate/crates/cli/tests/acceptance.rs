//! Acceptance suite. Runs every criterion, prints one line each and exits
//! nonzero if any failed.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use coinflip::{
    decay_fit, fixed_point_residual_formal, is_strictly_decreasing, relative_ode_defect, run,
    run_perturbation, scan_fixed_point_residual, smooth3, DecayProbe, Exponential,
    InitialDistribution, PaymentRule, Perturbation, SimConfig, CONSERVATION_LIMIT,
};
use coinflip_cli::experiment::Summary;
use coinflip_cli::{parse_config_with, run_experiment, Overrides};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

const N: usize = 10_000;
const SEED: u64 = 42;

fn conservation_and_positivity() -> Outcome {
    let cfg = SimConfig::new(N, 1_000_000, SEED).with_even_snapshots(20);
    let started = Instant::now();
    let r = match run(&cfg) {
        Ok(r) => r,
        Err(e) => return outcome(false, format!("run failed: {e}")),
    };
    let secs = started.elapsed().as_secs_f64();
    let min = r
        .snapshots
        .iter()
        .map(|s| s.min_asset)
        .fold(f64::INFINITY, f64::min);
    outcome(
        r.conservation_drift < CONSERVATION_LIMIT
            && min > 0.0
            && r.snapshots.len() == 20
            && secs < 5.0,
        format!(
            "drift {:.2e}, min snapshot asset {min:.3e} over {} snapshots, {secs:.2} s",
            r.conservation_drift,
            r.snapshots.len()
        ),
    )
}

fn fixed_point() -> Outcome {
    let started = Instant::now();
    let f = Exponential::new(1.0).unwrap();
    let (lo, hi, points) = (0.1, 5.0, 20);
    let mut worst = 0.0f64;
    let mut evaluated = 0;
    let mut pass = true;
    for p in [0.3, 0.5, 0.7] {
        for rule in [PaymentRule::HalfAssets, PaymentRule::harmonic(1.0).unwrap()] {
            match scan_fixed_point_residual(&f, p, &rule, lo, hi, points) {
                Ok(scan) => {
                    worst = worst.max(scan.max_abs);
                    evaluated += scan.evaluated;
                    if rule != PaymentRule::HalfAssets && scan.evaluated == 0 {
                        pass = false;
                    }
                }
                Err(_) => pass = false,
            }
        }
        // The positivity domain is empty under half-assets payments, so the
        // unchecked expression is evaluated on the full grid as well.
        let step = (hi - lo) / (points - 1) as f64;
        for i in 0..points {
            for j in 0..points {
                let (a, b) = (lo + i as f64 * step, lo + j as f64 * step);
                match fixed_point_residual_formal(&f, p, &PaymentRule::HalfAssets, a, b) {
                    Ok(r) => {
                        worst = worst.max(r.abs());
                        evaluated += 1;
                    }
                    Err(_) => pass = false,
                }
            }
        }
    }
    let secs = started.elapsed().as_secs_f64();
    outcome(
        pass && worst <= 1e-10 && secs < 1.0,
        format!("max |residual| {worst:.2e} over {evaluated} grid points, {secs:.3} s"),
    )
}

fn ode() -> Outcome {
    let f = Exponential::new(1.0).unwrap();
    let mut worst = 0.0f64;
    for k in 0..1000 {
        let a = 0.1 + 9.9 * k as f64 / 999.0;
        match relative_ode_defect(&f, a, 1e-4) {
            Ok(d) => worst = worst.max(d.abs()),
            Err(e) => return outcome(false, format!("a = {a}: {e}")),
        }
    }
    outcome(
        worst <= 1e-8,
        format!("max relative defect {worst:.3e} on [0.1, 10]"),
    )
}

fn experiment(preset: &str, dir: &Path) -> Result<(Summary, f64), String> {
    let overrides = Overrides {
        output_dir: Some(dir.to_path_buf()),
        // 100 matches per player.
        matches: Some(50 * N as u64),
        ..Overrides::default()
    };
    let text = format!(r#"{{"preset":"{preset}","seed":{SEED},"sim":{{"n":{N}}}}}"#);
    let spec = parse_config_with(&text, &overrides).map_err(|e| e.to_string())?;
    let started = Instant::now();
    let summary = run_experiment(&spec).map_err(|e| e.to_string())?;
    Ok((summary, started.elapsed().as_secs_f64()))
}

fn collapse(result: &Result<(Summary, f64), String>) -> Outcome {
    let (summary, secs) = match result {
        Ok(s) => s,
        Err(e) => return outcome(false, e.clone()),
    };
    let ks: Vec<String> = summary
        .runs
        .iter()
        .map(|r| format!("{} {:.4}", r.name, r.gof.ks))
        .collect();
    let pairwise: Vec<String> = summary
        .pairwise_ks
        .iter()
        .map(|p| format!("{:.4}", p.ks))
        .collect();
    let drift_ok = summary
        .runs
        .iter()
        .all(|r| r.conservation_drift < CONSERVATION_LIMIT);
    let pass = summary.runs.iter().all(|r| r.gof.ks < 0.03)
        && summary.pairwise_ks.len() == 3
        && summary.pairwise_ks.iter().all(|p| p.ks < 0.03)
        && drift_ok
        && *secs < 30.0;
    outcome(
        pass,
        format!(
            "KS [{}], pairwise [{}], {secs:.2} s",
            ks.join(", "),
            pairwise.join(", ")
        ),
    )
}

fn moments(fig2a: &Result<(Summary, f64), String>) -> Outcome {
    let Ok((summary, _)) = fig2a else {
        return outcome(false, "baseline run failed");
    };
    let Some(base) = summary.runs.iter().find(|r| r.init == "constant") else {
        return outcome(false, "no constant-start run");
    };
    let (m2, m3) = (base.gof.ratio(2), base.gof.ratio(3));
    match (m2, m3) {
        (Some(m2), Some(m3)) => outcome(
            (0.95..=1.05).contains(&m2) && (0.85..=1.15).contains(&m3),
            format!("k=2 ratio {m2:.4}, k=3 ratio {m3:.4}"),
        ),
        _ => outcome(false, "moment ratios missing"),
    }
}

fn stability() -> Outcome {
    let mut cfg = SimConfig::new(N, 0, SEED).with_matches_per_player(4.0);
    cfg.init = InitialDistribution::Constant { value: 1.0 };
    let cfg = cfg.with_even_snapshots(16);
    let bump = Perturbation::GaussianBump {
        weight: 0.5,
        center: 1.0,
        width: 0.2,
    };
    let trace = match run_perturbation(&cfg, &bump, &DecayProbe::default()) {
        Ok(t) => t,
        Err(e) => return outcome(false, e.to_string()),
    };
    let distances: Vec<f64> = trace.points.iter().map(|p| p.distance).collect();
    let smoothed = smooth3(&distances);
    let snapshots = trace.points.len() - 1;
    let fit = decay_fit(&trace.as_pairs(), trace.noise_floor);
    let rate = fit.as_ref().map(|f| f.rate).unwrap_or(f64::NAN);
    outcome(
        snapshots >= 8 && is_strictly_decreasing(&smoothed) && rate > 0.0,
        format!(
            "L1 {:.3} -> {:.3} over {snapshots} snapshots, noise floor {:.3}, fitted rate {rate:.3} per match/player",
            distances[0],
            distances[distances.len() - 1],
            trace.noise_floor
        ),
    )
}

fn strip_timestamp(json: &str) -> Result<serde_json::Value, String> {
    let mut v: serde_json::Value = serde_json::from_str(json).map_err(|e| e.to_string())?;
    v.as_object_mut()
        .ok_or("summary is not an object")?
        .remove("generated_at_unix")
        .ok_or("timestamp key missing")?;
    Ok(v)
}

fn determinism() -> Outcome {
    let tmp = tempfile::tempdir().unwrap();
    let config = tmp.path().join("config.json");
    std::fs::write(
        &config,
        r#"{"preset":"fig2b","seed":7,"replicas":2,"sim":{"n":2000,"matches":100000}}"#,
    )
    .unwrap();
    let mut outputs = Vec::new();
    for k in 0..2 {
        let dir = tmp.path().join(format!("out{k}"));
        let status = Command::new(env!("CARGO_BIN_EXE_coinflip"))
            .arg("--config")
            .arg(&config)
            .arg("--output-dir")
            .arg(&dir)
            .output()
            .unwrap();
        if !status.status.success() {
            return outcome(false, format!("run {k} exited with {}", status.status));
        }
        let json = std::fs::read_to_string(dir.join("summary.json")).unwrap();
        let csv = std::fs::read(dir.join("summary.csv")).unwrap();
        let snapshot =
            std::fs::read(dir.join("fig2b_harmonic/replica_1/snapshot_100000.csv")).unwrap();
        outputs.push((json, csv, snapshot));
    }
    let (a, b) = (&outputs[0], &outputs[1]);
    let json_equal = match (strip_timestamp(&a.0), strip_timestamp(&b.0)) {
        (Ok(x), Ok(y)) => x == y,
        _ => false,
    };
    // Bytewise check of the JSON with only the timestamp line removed.
    let without_stamp = |s: &str| {
        s.lines()
            .filter(|l| !l.contains("\"generated_at_unix\""))
            .collect::<Vec<_>>()
            .join("\n")
    };
    let json_bytes_equal = without_stamp(&a.0) == without_stamp(&b.0);
    outcome(
        json_equal && json_bytes_equal && a.1 == b.1 && a.2 == b.2,
        format!(
            "summary.json {}, summary.csv {}, snapshot CSV {}",
            if json_bytes_equal {
                "identical"
            } else {
                "differs"
            },
            if a.1 == b.1 { "identical" } else { "differs" },
            if a.2 == b.2 { "identical" } else { "differs" },
        ),
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let fig2a = experiment("fig2a", &tmp.path().join("fig2a"));
    let fig2b = experiment("fig2b", &tmp.path().join("fig2b"));

    let results = [
        (
            "1 conservation and positivity",
            conservation_and_positivity(),
        ),
        ("2 fixed-point residual", fixed_point()),
        ("3 small-payment ODE", ode()),
        ("4 initial-distribution collapse", collapse(&fig2a)),
        ("5 payment-rule collapse", collapse(&fig2b)),
        ("6 moment ratios", moments(&fig2a)),
        ("7 perturbation decay", stability()),
        ("8 determinism", determinism()),
    ];
    let mut failed = 0;
    for (name, o) in &results {
        println!(
            "criterion {name}: {} ({})",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "{} of {} criteria passed",
        results.len() - failed,
        results.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
