use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

use d2p_core::figures::{run_figure, FigureId};
use d2p_core::montecarlo::{run_schedule, Algorithm};
use d2p_core::schedules::{critical_steps, d2p_schedule, improved_schedule, positioned_schedule};
use d2p_core::verify::{run_suite, Suite, SuiteReport};
use d2p_core::{Lambda, NoiseSpec};

use crate::manifest::RunManifest;
use crate::{
    AlgorithmArg, Command, Failure, Format, PhasesArgs, ReportFormat, ReproduceArgs, RerunArgs, SimulateArgs,
    Template, VerifyArgs,
};

/// Runs `command`. `out_override` replaces the recorded output location
/// (used by `rerun --out`).
pub fn run(command: &Command, out_override: Option<&Path>) -> Result<(), Failure> {
    match command {
        Command::Phases(a) => phases(a),
        Command::Simulate(a) => {
            let mut a = a.clone();
            if let Some(p) = out_override {
                a.out = Some(p.to_path_buf());
            }
            simulate(&a)
        }
        Command::Reproduce(a) => {
            let mut a = a.clone();
            if let Some(p) = out_override {
                a.out = p.to_path_buf();
            }
            reproduce(&a)
        }
        Command::Verify(a) => verify(a),
        Command::Rerun(a) => rerun(a),
    }
}

#[derive(Debug, Serialize)]
struct PhasesRow {
    lambda: f64,
    template: Template,
    k: usize,
    position: Option<usize>,
    beta1: f64,
    beta2: f64,
    residual: f64,
    iterations: usize,
}

fn phases(a: &PhasesArgs) -> Result<(), Failure> {
    let lambda = Lambda::new(a.lambda)?;
    let schedule = match a.template {
        Template::Improved => improved_schedule(lambda)?,
        Template::D2p => d2p_schedule(lambda, a.kd.unwrap_or_else(|| critical_steps(lambda).k))?,
        Template::Positioned => {
            let n = a.position.ok_or_else(|| Failure::Input("--template positioned needs --position".into()))?;
            positioned_schedule(lambda, n)?
        }
    };
    let solve = schedule.solve.expect("designed schedules carry a solve result");
    let row = PhasesRow {
        lambda: a.lambda,
        template: a.template,
        k: schedule.len(),
        position: schedule.position_n,
        beta1: solve.beta1,
        beta2: solve.beta2,
        residual: solve.residual,
        iterations: solve.iterations,
    };
    let stdout = io::stdout();
    match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(&row).map_err(anyhow::Error::from)?;
            v["betas"] = serde_json::to_value(&schedule.betas).map_err(anyhow::Error::from)?;
            writeln!(stdout.lock(), "{}", serde_json::to_string_pretty(&v).map_err(anyhow::Error::from)?)?;
        }
        Format::Csv => write_csv(stdout.lock(), std::slice::from_ref(&row))?,
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct SimulateRow {
    algorithm: &'static str,
    lambda: f64,
    position: Option<usize>,
    k: usize,
    noise: String,
    samples: usize,
    seed: u64,
    mean_success: f64,
    stderr: f64,
}

fn algorithm(a: &SimulateArgs) -> Result<Algorithm, Failure> {
    Ok(match a.algorithm {
        AlgorithmArg::Original => Algorithm::Original,
        AlgorithmArg::Improved => Algorithm::Improved,
        AlgorithmArg::D2p => Algorithm::D2p { k_d: a.kd },
        AlgorithmArg::Positioned => Algorithm::Positioned {
            n: a.position.ok_or_else(|| Failure::Input("--algorithm positioned needs --position".into()))?,
        },
    })
}

fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let noise: NoiseSpec = a.noise.parse()?;
    noise.validate()?;
    if a.samples == 0 {
        return Err(Failure::Input("--samples must be at least 1".into()));
    }
    let lambda = Lambda::new(a.lambda)?;
    let schedule = algorithm(a)?.build(lambda)?;
    let stats = run_schedule(&schedule, &noise, a.samples, a.seed);
    let row = SimulateRow {
        algorithm: schedule.kind.as_str(),
        lambda: a.lambda,
        position: schedule.position_n,
        k: schedule.len(),
        noise: noise.to_string(),
        samples: stats.samples,
        seed: stats.seed,
        mean_success: stats.mean,
        stderr: stats.stderr,
    };
    let mut buf = Vec::new();
    match a.format {
        Format::Csv => write_csv(&mut buf, std::slice::from_ref(&row))?,
        Format::Json => {
            serde_json::to_writer(&mut buf, &row).map_err(anyhow::Error::from)?;
            buf.push(b'\n');
        }
    }
    match &a.out {
        Some(path) => {
            write_file(path, &buf)?;
            let mut m = RunManifest::new(Command::Simulate(a.clone()), a.seed);
            m.noise.push(noise.to_string());
            m.outputs.push(path.display().to_string());
            m.write(&sidecar(path))?;
        }
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn sidecar(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

fn reproduce(a: &ReproduceArgs) -> Result<(), Failure> {
    let figures: Vec<FigureId> = if a.figure.trim().eq_ignore_ascii_case("all") {
        FigureId::ALL.to_vec()
    } else {
        vec![a.figure.parse()?]
    };
    if a.samples == Some(0) {
        return Err(Failure::Input("--samples must be at least 1".into()));
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for figure in figures {
        let data = run_figure(figure, a.samples, a.seed)?;
        let csv_name = format!("fig{figure}.csv");
        let csv_path = a.out.join(&csv_name);
        let mut buf = Vec::new();
        write_csv(&mut buf, &data.rows)?;
        write_file(&csv_path, &buf)?;

        let params = ReproduceArgs { figure: figure.to_string(), ..a.clone() };
        let mut m = RunManifest::new(Command::Reproduce(params), a.seed);
        m.noise.push(data.spec.noise.to_string());
        m.outputs.push(csv_name);
        m.errors = data.errors.clone();
        m.write(&a.out.join(format!("fig{figure}.manifest.json")))?;
        println!("wrote {} ({} rows, {} failed)", csv_path.display(), data.rows.len(), data.errors.len());
    }
    Ok(())
}

fn verify(a: &VerifyArgs) -> Result<(), Failure> {
    let suites: Vec<Suite> = if a.suite.trim().eq_ignore_ascii_case("all") {
        Suite::ALL.to_vec()
    } else {
        vec![a.suite.parse()?]
    };
    let reports: Vec<SuiteReport> = suites.into_iter().map(|s| run_suite(s, a.seed)).collect();
    let mut out = io::stdout().lock();
    match a.format {
        ReportFormat::Json => {
            writeln!(out, "{}", serde_json::to_string_pretty(&reports).map_err(anyhow::Error::from)?)?;
        }
        ReportFormat::Text => {
            for r in &reports {
                for c in &r.checks {
                    writeln!(out, "[{}] {c}", r.suite)?;
                }
                writeln!(out, "{}: {}", r.suite, if r.passed() { "PASS" } else { "FAIL" })?;
            }
        }
    }
    if reports.iter().all(SuiteReport::passed) {
        Ok(())
    } else {
        Err(Failure::Checks)
    }
}

fn rerun(a: &RerunArgs) -> Result<(), Failure> {
    let m = RunManifest::read(&a.manifest)?;
    if m.version != env!("CARGO_PKG_VERSION") {
        eprintln!("warning: manifest written by version {}, running {}", m.version, env!("CARGO_PKG_VERSION"));
    }
    run(&m.command, a.out.as_deref())
}

fn write_csv<W: Write, T: Serialize>(w: W, rows: &[T]) -> Result<(), Failure> {
    let mut wtr = csv::Writer::from_writer(w);
    for r in rows {
        wtr.serialize(r).map_err(anyhow::Error::from)?;
    }
    wtr.flush()?;
    Ok(())
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
