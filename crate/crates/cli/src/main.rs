//! `hopfavg`: Hopf-bifurcation analysis by averaging, from a TOML config.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use hopfavg::models::{build_model, registry, BuiltModel, ModelInfo};
use hopfavg::pipeline::{characterize, cylinder_slices, verify_at, Analysis, AnalysisOptions, OffsetResult};
use hopfavg::Exec;
use serde::Serialize;

use config::AnalysisConfig;
use report::{units, ModelSection, Outcome, RunReport, Settings};

const DEFAULT_OUT_DIR: &str = "hopfavg-out";

#[derive(Parser)]
#[command(name = "hopfavg", version, about = "Averaged amplitude, stability and trapping annulus of Hopf bifurcations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse one model and verify the predictions at each offset.
    Analyze {
        #[arg(long)]
        config: PathBuf,
        /// Output directory (overrides HOPFAVG_OUT_DIR and the config).
        #[arg(long, env = "HOPFAVG_OUT_DIR")]
        out: Option<PathBuf>,
    },
    /// Repeat the analysis over a grid of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// The bifurcation parameter (absolute values) or a model parameter.
        #[arg(long)]
        param: String,
        /// Comma-separated values; may be empty.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long, env = "HOPFAVG_OUT_DIR")]
        out: Option<PathBuf>,
    },
    /// Registered models with their parameters, units and defaults.
    ListModels {
        #[arg(long)]
        json: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = match cli.command {
        Command::Analyze { config, out } => cmd_analyze(&config, out),
        Command::Sweep { config, param, grid, out } => cmd_sweep(&config, &param, &grid, out),
        Command::ListModels { json } => cmd_list_models(json).map(|_| Outcome::Ok),
    };
    match run {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn out_dir(flag: Option<PathBuf>, cfg: Option<&AnalysisConfig>) -> PathBuf {
    flag.or_else(|| cfg.and_then(|c| c.output.dir.clone()))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn options(cfg: &AnalysisConfig, model: &BuiltModel) -> AnalysisOptions {
    AnalysisOptions {
        bracket: cfg.param_bracket.map(|[a, b]| (a, b)),
        offsets: cfg.alpha_offsets.clone().unwrap_or_else(|| model.info.default_offsets.clone()),
        epsilon: cfg.epsilon().expect("validated on load"),
        degeneracy_threshold: cfg.degeneracy_threshold(),
        exec: Exec::default(),
    }
}

fn state_unit(info: &ModelInfo) -> &'static str {
    if info.id.starts_with("predator-prey") {
        "biomass"
    } else {
        "state"
    }
}

fn write_report(dir: &Path, report: &RunReport) -> Result<()> {
    let path = dir.join("report.json");
    let text = serde_json::to_string_pretty(report)?;
    fs::write(&path, text + "\n").with_context(|| format!("cannot write {}", path.display()))?;
    println!("{}", path.display());
    Ok(())
}

fn cmd_analyze(config_path: &Path, out: Option<PathBuf>) -> Result<Outcome> {
    let start = Instant::now();
    let mut report = RunReport::new();
    let cfg = match AnalysisConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => {
            let dir = out_dir(out, None);
            fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
            eprintln!("config error: {e}");
            report.fail(Outcome::ConfigError, "run", e.code(), e.to_string());
            report.timings.total_seconds = start.elapsed().as_secs_f64();
            write_report(&dir, &report)?;
            return Ok(report.status.outcome);
        }
    };
    let dir = out_dir(out, Some(&cfg));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    run_analysis(&cfg, &dir, &mut report, start)?;
    report.timings.total_seconds = start.elapsed().as_secs_f64();
    write_report(&dir, &report)?;
    for e in &report.status.errors {
        eprintln!("{} [{}]: {}", e.scope, e.code, e.message);
    }
    Ok(report.status.outcome)
}

fn run_analysis(cfg: &AnalysisConfig, dir: &Path, report: &mut RunReport, start: Instant) -> Result<()> {
    let model = match build_model(&cfg.model, &cfg.model_params, cfg.seed) {
        Ok(m) => m,
        Err(e) => {
            report.fail(Outcome::ConfigError, "run", e.code(), e.to_string());
            return Ok(());
        }
    };
    let opts = options(cfg, &model);
    let bracket = opts.bracket.unwrap_or(model.info.default_bracket);
    report.model = Some(ModelSection {
        id: model.info.id.clone(),
        bifurcation_param: model.info.bifurcation_param.clone(),
        values: model.values.clone(),
        seed: model.seed,
    });
    report.settings = Some(Settings {
        param_bracket: [bracket.0, bracket.1],
        alpha_offsets: opts.offsets.clone(),
        epsilon: opts.epsilon,
        degeneracy_threshold: opts.degeneracy_threshold,
        seed: cfg.seed,
    });
    report.units = units(&model.info.bifurcation_unit, state_unit(&model.info));

    let mut analysis = match characterize(&model, &opts) {
        Ok(a) => a,
        Err(e) => {
            report.fail(Outcome::ConfigError, "run", e.code(), e.to_string());
            return Ok(());
        }
    };
    report.timings.characterize_seconds = start.elapsed().as_secs_f64();
    if analysis.prediction.is_degenerate() {
        let msg = format!(
            "|K| = {:e} is below the degeneracy threshold {:e}; no amplitude or annulus",
            analysis.prediction.k.abs(),
            opts.degeneracy_threshold
        );
        report.fail(Outcome::Degenerate, "run", "degenerate", msg);
        report.absorb(analysis);
        return Ok(());
    }

    let verify_start = Instant::now();
    let alpha0 = analysis.hopf_data.alpha0;
    let params: Vec<f64> = opts.offsets.iter().map(|o| alpha0 + o).collect();
    analysis.offsets = opts.exec.map(&params, |&p| verify_at(&model, &analysis, p, &opts));
    for (i, res) in analysis.offsets.iter().enumerate() {
        let found = res.verification.as_ref().is_some_and(|v| v.orbit_found());
        if let Some(e) = &res.error {
            let outcome = if e.code == "branch-mismatch" {
                Outcome::ConfigError
            } else {
                Outcome::OrbitNotFound
            };
            report.fail(outcome, &format!("offset[{i}]"), &e.code, e.message.clone());
        } else if !found {
            report.fail(Outcome::OrbitNotFound, &format!("offset[{i}]"), "orbit-not-found", "no orbit".into());
        }
        report.artifacts.extend(output::offset_artifacts(dir, i, res)?);
    }

    if model.info.id == "predator-prey-3d" {
        if let (Some(p), Some(&offset)) = (model.predator_prey, opts.offsets.first()) {
            let cs = cfg.slices.clone().unwrap_or_else(|| vec![p.c]);
            let rows = cylinder_slices(&p, bracket, offset, &cs, opts.exec);
            for (j, row) in rows.iter().enumerate() {
                if let Some(e) = &row.error {
                    report.fail(Outcome::OrbitNotFound, &format!("slice[{j}]"), &e.code, e.message.clone());
                }
                report.artifacts.extend(output::slice_artifact(dir, j, row)?);
            }
            report.cylinder = Some(rows);
        }
    }
    report.timings.verify_seconds = verify_start.elapsed().as_secs_f64();
    report.absorb(analysis);
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    index: usize,
    param: String,
    value: f64,
    alpha: Option<f64>,
    k: Option<f64>,
    rho0: Option<f64>,
    amplitude_measured: Option<f64>,
    radius_measured: Option<f64>,
    containment: Option<f64>,
    orbit_found: bool,
    error: Option<String>,
}

const SWEEP_HEADER: [&str; 11] = [
    "index",
    "param",
    "value",
    "alpha",
    "K",
    "rho0",
    "amplitude_measured",
    "radius_measured",
    "containment",
    "orbit_found",
    "error",
];

impl SweepRow {
    fn empty(index: usize, param: &str, value: f64) -> Self {
        Self {
            index,
            param: param.into(),
            value,
            alpha: None,
            k: None,
            rho0: None,
            amplitude_measured: None,
            radius_measured: None,
            containment: None,
            orbit_found: false,
            error: None,
        }
    }

    fn fill(&mut self, analysis: &Analysis, res: &OffsetResult) {
        self.k = Some(analysis.prediction.k);
        self.rho0 = analysis.prediction.rho0;
        self.alpha = analysis.hopf_data.eigen_at(res.param).ok().map(|(a, _)| a);
        if let Some(v) = &res.verification {
            self.containment = v.containment;
            if let Some(o) = &v.orbit {
                self.orbit_found = true;
                self.amplitude_measured = Some(o.amplitude_measured);
                self.radius_measured = Some(o.radius_max);
            }
        }
        self.error = res.error.as_ref().map(|e| e.code.clone());
    }
}

fn parse_grid(grid: &str) -> Result<Vec<f64>, String> {
    grid.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|_| format!("grid value `{s}` is not a number")))
        .collect()
}

fn cmd_sweep(config_path: &Path, param: &str, grid: &str, out: Option<PathBuf>) -> Result<Outcome> {
    let fail = |msg: String| {
        eprintln!("config error: {msg}");
        Ok(Outcome::ConfigError)
    };
    let cfg = match AnalysisConfig::load(config_path) {
        Ok(c) => c,
        Err(e) => return fail(e.to_string()),
    };
    let values = match parse_grid(grid) {
        Ok(v) => v,
        Err(e) => return fail(e),
    };
    let model = match build_model(&cfg.model, &cfg.model_params, cfg.seed) {
        Ok(m) => m,
        Err(e) => return fail(e.to_string()),
    };
    let opts = options(&cfg, &model);
    let rows: Vec<SweepRow> = if param == model.info.bifurcation_param {
        let analysis = match characterize(&model, &opts) {
            Ok(a) => a,
            Err(e) => return fail(e.to_string()),
        };
        let indexed: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
        opts.exec.map(&indexed, |&(i, v)| {
            let mut row = SweepRow::empty(i, param, v);
            if analysis.prediction.is_degenerate() {
                row.k = Some(analysis.prediction.k);
                row.error = Some("degenerate".into());
            } else {
                row.fill(&analysis, &verify_at(&model, &analysis, v, &opts));
            }
            row
        })
    } else if model.values.contains_key(param) {
        let offset = opts.offsets.first().copied().unwrap_or(0.0);
        let indexed: Vec<(usize, f64)> = values.iter().copied().enumerate().collect();
        opts.exec.map(&indexed, |&(i, v)| sweep_model_param(&cfg, &opts, param, i, v, offset))
    } else {
        return fail(format!("model `{}` has no parameter `{param}`", model.info.id));
    };

    let dir = out_dir(out, Some(&cfg));
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join("sweep.csv");
    output::write_rows(&path, &SWEEP_HEADER, &rows)?;
    print!("{}", fs::read_to_string(&path)?);
    Ok(Outcome::Ok)
}

fn sweep_model_param(cfg: &AnalysisConfig, opts: &AnalysisOptions, param: &str, i: usize, v: f64, offset: f64) -> SweepRow {
    let mut row = SweepRow::empty(i, param, v);
    let mut overrides = cfg.model_params.clone();
    overrides.insert(param.to_string(), v);
    let analysed = build_model(&cfg.model, &overrides, cfg.seed).and_then(|m| {
        let a = characterize(&m, opts)?;
        Ok((m, a))
    });
    match analysed {
        Ok((_, a)) if a.prediction.is_degenerate() => {
            row.k = Some(a.prediction.k);
            row.error = Some("degenerate".into());
        }
        Ok((m, a)) => {
            let res = verify_at(&m, &a, a.hopf_data.alpha0 + offset, opts);
            row.fill(&a, &res);
        }
        Err(e) => row.error = Some(e.code().into()),
    }
    row
}

fn cmd_list_models(json: bool) -> Result<()> {
    let models = registry();
    if json {
        println!("{}", serde_json::to_string_pretty(&models)?);
        return Ok(());
    }
    for m in &models {
        println!("{}: {}", m.id, m.description);
        println!(
            "  bifurcation parameter: {} [{}], bracket [{}, {}], default offsets {:?}",
            m.bifurcation_param, m.bifurcation_unit, m.default_bracket.0, m.default_bracket.1, m.default_offsets
        );
        if m.uses_seed {
            println!("  seeded: yes");
        }
        for p in &m.params {
            println!("  {:<8} = {:<6} [{}] {}", p.name, p.default, p.unit, p.description);
        }
    }
    Ok(())
}
