//! Command-line front end: reads a TOML config (plus command-line
//! overrides), runs the requested operation, writes its artifacts (schedule
//! JSON, report JSON, CSV tables) to the output directory, and exits 0 iff
//! every pass/fail flag passed. Invalid configuration exits 2, experiment
//! failure exits 1.

use clap::{Parser, Subcommand};
use midspace::blocks::{build_schedule, dyadic_schedule, BlockSchedule, Variant};
use midspace::config::RunConfig;
use midspace::error::{Error, Result};
use midspace::experiments::{
    self, Body, McParams, NormSpec, Subspace,
};
use midspace::haar::{self, CoeffSeq};
use midspace::models::{BasisModel, CustomBasis, TailParams};
use midspace::norms;
use midspace::paths::DyadicPath;
use midspace::report::ExperimentReport;
use midspace::rng::CounterNoise;
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "midspace",
    about = "Intermediate Gaussian norms: schedules, block norms, and Monte Carlo checks",
    version
)]
struct Cli {
    /// TOML config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<String>,

    /// Override any config field, e.g. --set schedule.alpha=0.4
    /// (repeatable; values use TOML syntax).
    #[arg(long = "set", global = true, value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,

    /// Shorthand for --set run.seed=...
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Shorthand for --set run.replicates=...
    #[arg(long, global = true)]
    replicates: Option<u64>,

    /// Shorthand for --set run.workers=...
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Shorthand for --set run.out_dir=... (else $MIDSPACE_OUT, else ".")
    #[arg(long, global = true)]
    out_dir: Option<String>,

    /// Shorthand for --set model.level=...
    #[arg(long, global = true)]
    level: Option<u32>,

    /// Shorthand for --set schedule.alpha=...
    #[arg(long, global = true)]
    alpha: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Draw one path sample and write it with its coefficients.
    Sample,
    /// Build the certified block schedule and write it as JSON.
    Blocks,
    /// Print all norms of a path or coefficient file.
    Norms,
    /// Check the per-block Markov bound on the weighted block norms.
    VerifyKeyInequality,
    /// Check convergence of the partial norms Z_n.
    ZnConvergence,
    /// Estimate exponential square moments over a rho grid.
    Fernique,
    /// Fit the exponential tightness slope on a shrinking-eps grid.
    Tightness,
    /// Compare Gaussian mass of a symmetric convex body with its subspace trace.
    Concentration,
    /// Profile dyadic block variances against the factorized form.
    BlockVariance,
    /// Check the weighted-coefficient equivalence of the sup block norm.
    Ciesielski,
    /// Compute the interpolation K-functional over a t grid.
    Kfunctional,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match load_config(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match run(cli.command, &cfg) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let text = match &cli.config {
        Some(path) => fs::read_to_string(path)?,
        None => String::new(),
    };
    let mut table: toml::Table = text
        .parse()
        .map_err(|e| Error::Config(format!("config parse: {e}")))?;
    let mut overrides = cli.overrides.clone();
    if let Some(v) = cli.seed {
        overrides.push(format!("run.seed = {v}"));
    }
    if let Some(v) = cli.replicates {
        overrides.push(format!("run.replicates = {v}"));
    }
    if let Some(v) = cli.workers {
        overrides.push(format!("run.workers = {v}"));
    }
    if let Some(v) = &cli.out_dir {
        overrides.push(format!("run.out_dir = {:?}", v));
    }
    if let Some(v) = cli.level {
        overrides.push(format!("model.level = {v}"));
    }
    if let Some(v) = cli.alpha {
        overrides.push(format!("schedule.alpha = {v}"));
    }
    for spec in &overrides {
        RunConfig::apply_override(&mut table, spec)?;
    }
    RunConfig::from_toml(&toml::to_string(&table).expect("table serializes"))
}

fn model_of(cfg: &RunConfig) -> Result<BasisModel> {
    let custom = match cfg.model.custom_path.as_deref() {
        Some(path) => Some(CustomBasis::from_json(&fs::read_to_string(path)?)?),
        None => None,
    };
    BasisModel::parse_kind(&cfg.model.kind, custom)
}

fn schedule_of(cfg: &RunConfig, model: &BasisModel) -> Result<BlockSchedule> {
    if cfg.schedule.dyadic {
        return dyadic_schedule(cfg.schedule.alpha, cfg.schedule.blocks);
    }
    let variant = cfg.variant();
    let eta = (variant == Variant::Sup).then_some(cfg.schedule.eta);
    build_schedule(
        model,
        cfg.schedule.alpha,
        variant,
        eta,
        cfg.schedule.blocks,
        &TailParams {
            replicates: cfg.schedule.tail_replicates,
            j_max: cfg.j_max(),
            level: cfg.model.level,
            seed: cfg.run.seed,
            workers: cfg.run.workers,
        },
    )
}

fn mc_params(cfg: &RunConfig) -> McParams {
    McParams {
        replicates: cfg.run.replicates,
        level: cfg.model.level,
        seed: cfg.run.seed,
        workers: cfg.run.workers,
    }
}

fn out_path(cfg: &RunConfig, name: &str) -> Result<PathBuf> {
    let dir = PathBuf::from(cfg.out_dir());
    fs::create_dir_all(&dir)?;
    Ok(dir.join(name))
}

fn write_report(cfg: &RunConfig, report: &ExperimentReport) -> Result<()> {
    fs::write(
        out_path(cfg, &format!("report-{}.json", report.name))?,
        report.to_json(),
    )?;
    for table in &report.tables {
        let mut buf = Vec::new();
        table.write_csv(&mut buf)?;
        fs::write(out_path(cfg, &format!("{}.csv", table.name))?, buf)?;
    }
    print!("{}", report.summary());
    Ok(())
}

fn read_coeffs(path: &str) -> Result<CoeffSeq> {
    CoeffSeq::read_csv(BufReader::new(fs::File::open(Path::new(path))?))
}

fn read_path_csv(path: &str) -> Result<DyadicPath> {
    DyadicPath::read_csv(BufReader::new(fs::File::open(Path::new(path))?))
}

fn trunc_of(cfg: &RunConfig, model: &BasisModel) -> usize {
    if cfg.experiment.trunc > 0 {
        cfg.experiment.trunc
    } else {
        model
            .effective_dim(cfg.model.level)
            .unwrap_or(1usize << cfg.model.level)
    }
}

fn t_grid(cfg: &RunConfig) -> Vec<f64> {
    let e = &cfg.experiment;
    let n = e.t_points.max(2);
    (0..n)
        .map(|i| {
            2f64.powf(e.t_min_exp + (e.t_max_exp - e.t_min_exp) * i as f64 / (n - 1) as f64)
        })
        .collect()
}

fn run(command: Command, cfg: &RunConfig) -> Result<bool> {
    let noise = CounterNoise::new(cfg.run.seed);
    match command {
        Command::Sample => {
            let model = model_of(cfg)?;
            let trunc = trunc_of(cfg, &model);
            let (path, xi) =
                model.sample_partial_sum(trunc, cfg.model.level, cfg.run.seed)?;
            let mut buf = Vec::new();
            path.write_csv(&mut buf)?;
            fs::write(out_path(cfg, "sample_path.csv")?, buf)?;
            let mut buf = Vec::new();
            xi.write_csv(&mut buf)?;
            fs::write(out_path(cfg, "sample_coeffs.csv")?, buf)?;
            println!(
                "{}",
                serde_json::json!({
                    "model": model.kind(),
                    "level": cfg.model.level,
                    "trunc": trunc,
                    "seed": cfg.run.seed,
                    "sup_norm": path.sup_norm(),
                    "h1_seminorm": path.h1_seminorm(),
                })
            );
            Ok(true)
        }
        Command::Blocks => {
            let model = model_of(cfg)?;
            let schedule = schedule_of(cfg, &model)?;
            fs::write(out_path(cfg, "schedule.json")?, schedule.to_json())?;
            println!("{}", schedule.to_json());
            Ok(true)
        }
        Command::Norms => {
            let model = model_of(cfg)?;
            let level = cfg.model.level;
            let (path, xi) = if !cfg.experiment.coeffs_path.is_empty() {
                let xi = read_coeffs(&cfg.experiment.coeffs_path)?;
                (model.combine(&xi, level)?, xi)
            } else if !cfg.experiment.path_csv.is_empty() {
                let path = read_path_csv(&cfg.experiment.path_csv)?;
                let xi = haar::analyze(&path);
                (path, xi)
            } else {
                return Err(Error::Config(
                    "norms needs experiment.coeffs_path or experiment.path_csv".into(),
                ));
            };
            let schedule = schedule_of(cfg, &model)?;
            let report = norms::norm_report(&path, &xi, &schedule, &model, cfg.schedule.alpha)?;
            let text = serde_json::to_string_pretty(&report)?;
            fs::write(out_path(cfg, "norms.json")?, &text)?;
            println!("{text}");
            Ok(true)
        }
        Command::VerifyKeyInequality => {
            let model = model_of(cfg)?;
            let schedule = schedule_of(cfg, &model)?;
            fs::write(out_path(cfg, "schedule.json")?, schedule.to_json())?;
            let report = experiments::verify_key_inequality(
                &model,
                &schedule,
                &mc_params(cfg),
                &noise,
            )?;
            write_report(cfg, &report)?;
            Ok(report.passed)
        }
        Command::ZnConvergence => {
            let model = model_of(cfg)?;
            let schedule = schedule_of(cfg, &model)?;
            fs::write(out_path(cfg, "schedule.json")?, schedule.to_json())?;
            let report = experiments::zn_convergence(
                &model,
                &schedule,
                &mc_params(cfg),
                &cfg.experiment.eps_grid,
                &noise,
            )?;
            write_report(cfg, &report)?;
            Ok(report.passed)
        }
        Command::Fernique => {
            let model = model_of(cfg)?;
            let spec = NormSpec::parse(&cfg.experiment.norm)?;
            let schedule = if spec.needs_schedule() {
                Some(schedule_of(cfg, &model)?)
            } else {
                None
            };
            let (report, out) = experiments::estimate_fernique(
                &model,
                schedule.as_ref(),
                spec,
                &cfg.experiment.rho_grid,
                &mc_params(cfg),
                &noise,
            )?;
            write_report(cfg, &report)?;
            println!("largest stable rho = {} (C = {})", out.rho, out.c_rho);
            Ok(report.passed)
        }
        Command::Tightness => {
            let model = model_of(cfg)?;
            let spec = NormSpec::parse(&cfg.experiment.norm)?;
            let schedule = if spec.needs_schedule() {
                Some(schedule_of(cfg, &model)?)
            } else {
                None
            };
            let eps_grid = if cfg.experiment.eps_grid.is_empty() {
                (0..9).map(|i| 1.0 / (3.0 + 0.15 * i as f64)).collect()
            } else {
                cfg.experiment.eps_grid.clone()
            };
            let rho_hat = (cfg.experiment.rho_hat > 0.0).then_some(cfg.experiment.rho_hat);
            let (report, out) = experiments::tightness_experiment(
                &model,
                schedule.as_ref(),
                spec,
                cfg.experiment.radius,
                &eps_grid,
                &mc_params(cfg),
                rho_hat,
                &noise,
            )?;
            write_report(cfg, &report)?;
            println!("fitted slope = {}", out.slope);
            Ok(report.passed)
        }
        Command::Concentration => {
            let e = &cfg.experiment;
            let body = match e.body.as_str() {
                "box" => Body::Box {
                    half_sides: e.half_sides.clone(),
                },
                "ellipsoid" => Body::Ellipsoid {
                    semi_axes: e.semi_axes.clone(),
                },
                "polytope" => Body::Polytope {
                    normals: e.normals.clone(),
                    offsets: e.offsets.clone(),
                },
                other => return Err(Error::Config(format!("unknown body {other:?}"))),
            };
            let subspace = Subspace::axes(e.dim, e.sub_dim);
            let report =
                experiments::concentration_check(e.dim, &subspace, &body, &mc_params(cfg), &noise)?;
            write_report(cfg, &report)?;
            Ok(report.passed)
        }
        Command::BlockVariance => {
            let e = &cfg.experiment;
            let report = experiments::block_variance_profile(
                e.k_lo.max(1),
                e.k_hi,
                e.lambda,
                &mc_params(cfg),
                &noise,
            )?;
            write_report(cfg, &report)?;
            Ok(report.passed)
        }
        Command::Ciesielski => {
            let xi = if !cfg.experiment.coeffs_path.is_empty() {
                read_coeffs(&cfg.experiment.coeffs_path)?
            } else {
                use midspace::rng::NoiseSource;
                let n = if cfg.experiment.trunc > 0 {
                    cfg.experiment.trunc
                } else {
                    64
                };
                CoeffSeq::new((1..=n).map(|j| noise.gauss(0, j as u64)).collect())
            };
            let report = experiments::ciesielski_equivalence_check(&xi, cfg.schedule.alpha)?;
            write_report(cfg, &report)?;
            Ok(report.passed)
        }
        Command::Kfunctional => {
            let model = model_of(cfg)?;
            let path = if !cfg.experiment.path_csv.is_empty() {
                read_path_csv(&cfg.experiment.path_csv)?
            } else {
                let trunc = trunc_of(cfg, &model);
                model
                    .sample_partial_sum(trunc, cfg.model.level, cfg.run.seed)?
                    .0
            };
            let report = experiments::k_functional_report(
                &path,
                cfg.experiment.theta,
                &t_grid(cfg),
                cfg.experiment.tol,
            )?;
            write_report(cfg, &report)?;
            Ok(report.passed)
        }
    }
}
