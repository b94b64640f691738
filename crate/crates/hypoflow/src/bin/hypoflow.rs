// Copyright 2026 hypoflow contributors
// SPDX-License-Identifier: Apache-2.0

//! Command-line front end: model catalog, spectral and lifting analyses,
//! flow-Poincare fitting, and Monte Carlo simulation.
//!
//! Outputs are deterministic given identical configuration and seed; all
//! floating-point output uses round-trip precision. Exit codes: 0 success,
//! 2 configuration error, 3 numerical failure. Configuration errors emit a
//! machine-readable JSON object on standard error.

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use std::io::Write;
use std::path::PathBuf;

use hypoflow::catalog::{build_model, list_models, ModelParams};
use hypoflow::error::HypoflowError;
use hypoflow::flow::{default_x0_set, fit_constants, flow_ratio, verify_decay};
use hypoflow::lifting::{
    check_lift_conditions, default_gamma_grid, log_grid, model_rate_formula, overdamped_limit,
    rate_scan, RateFormula,
};
use hypoflow::sde::{
    estimate_decay_rate, simulate_langevin, simulate_overdamped, InitialCondition, Integrator,
    SimConfig,
};
use hypoflow::spectral::{spectral_gap, DEFAULT_KERNEL_TOL};

#[derive(Parser)]
#[command(
    name = "hypoflow",
    about = "Convergence-rate analysis for kinetic Langevin and Lindblad generators",
    version
)]
struct Cli {
    /// TOML configuration file; command-line flags override file values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Report format.
    #[arg(long, global = true, value_parser = ["json", "csv"])]
    format: Option<String>,

    /// Indented JSON for human reading (JSON format only).
    #[arg(long, global = true)]
    pretty: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default, Clone)]
struct ModelArgs {
    /// Catalog model name or path to a .json Lindblad model file.
    #[arg(long)]
    model: Option<String>,

    /// Quadratic-well curvature.
    #[arg(long)]
    m: Option<f64>,

    /// Friction / interaction strength.
    #[arg(long)]
    gamma: Option<f64>,

    /// Position truncation (modes).
    #[arg(long)]
    nx: Option<usize>,

    /// Velocity truncation (Hermite degrees).
    #[arg(long)]
    nv: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues, spectral gap and kernel dimension of the generator.
    Spectrum {
        #[command(flatten)]
        model: ModelArgs,
        /// Relative kernel cutoff.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Spectral/singular gaps and prefactors over a friction grid.
    RateScan {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        gamma_min: Option<f64>,
        #[arg(long)]
        gamma_max: Option<f64>,
        #[arg(long)]
        gamma_points: Option<usize>,
    },
    /// Lift-structure residuals and constants.
    LiftCheck {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Overdamped-limit generator and its spectral gap.
    OverdampedLimit {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Flow-Poincare ratios over a friction grid with constant fitting
    /// and decay verification.
    FlowPoincare {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        t_horizon: Option<f64>,
        #[arg(long)]
        quad_n: Option<usize>,
        #[arg(long)]
        gamma_min: Option<f64>,
        #[arg(long)]
        gamma_max: Option<f64>,
        #[arg(long)]
        gamma_points: Option<usize>,
    },
    /// Monte Carlo simulation of the kinetic or overdamped dynamics.
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        /// "langevin" or "overdamped".
        #[arg(long)]
        dynamics: Option<String>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long)]
        n_steps: Option<usize>,
        #[arg(long)]
        n_paths: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// "baoab" or "euler_maruyama".
        #[arg(long)]
        integrator: Option<String>,
        /// "point" or "stationary".
        #[arg(long)]
        initial: Option<String>,
        #[arg(long, allow_negative_numbers = true)]
        x0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        v0: Option<f64>,
        /// Observable to rate-fit (adds an estimate to the report).
        #[arg(long)]
        observable: Option<String>,
        #[arg(long)]
        fit_start: Option<f64>,
        #[arg(long)]
        fit_end: Option<f64>,
        /// Equilibrium value subtracted before the rate fit.
        #[arg(long, allow_negative_numbers = true)]
        equilibrium: Option<f64>,
    },
    /// Closed-form model rate formulas.
    Formulas {
        /// "langevin" or "quantum".
        #[arg(long)]
        kind: Option<String>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        lambda_s: Option<f64>,
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
    },
    /// List the shipped model catalog with structural classification.
    Models {
        #[command(flatten)]
        model: ModelArgs,
    },
}

/// Optional values loadable from the TOML configuration file. Unknown
/// keys are rejected so typos cannot silently fall back to defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    model: Option<String>,
    m: Option<f64>,
    gamma: Option<f64>,
    nx: Option<usize>,
    nv: Option<usize>,
    tol: Option<f64>,
    gamma_min: Option<f64>,
    gamma_max: Option<f64>,
    gamma_points: Option<usize>,
    t_horizon: Option<f64>,
    quad_n: Option<usize>,
    dynamics: Option<String>,
    dt: Option<f64>,
    n_steps: Option<usize>,
    n_paths: Option<usize>,
    seed: Option<u64>,
    integrator: Option<String>,
    initial: Option<String>,
    x0: Option<f64>,
    v0: Option<f64>,
    observable: Option<String>,
    fit_start: Option<f64>,
    fit_end: Option<f64>,
    equilibrium: Option<f64>,
    kind: Option<String>,
    c: Option<f64>,
    lambda_s: Option<f64>,
    c1: Option<f64>,
    c2: Option<f64>,
    output: Option<String>,
    format: Option<String>,
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Numerical(String),
}

impl From<HypoflowError> for CliError {
    fn from(e: HypoflowError) -> Self {
        match e {
            HypoflowError::InvalidModel(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn main() {
    // HYPOFLOW_THREADS caps internal parallelism (default: all cores).
    if let Ok(v) = std::env::var("HYPOFLOW_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Config(msg)) => {
            let _ = writeln!(
                std::io::stderr(),
                "{}",
                serde_json::json!({"error": msg, "kind": "config"})
            );
            std::process::exit(2);
        }
        Err(CliError::Numerical(msg)) => {
            let _ = writeln!(
                std::io::stderr(),
                "{}",
                serde_json::json!({"error": msg, "kind": "numerical"})
            );
            std::process::exit(3);
        }
    }
}

fn load_file_config(path: &Option<PathBuf>) -> Result<FileConfig, CliError> {
    match path {
        None => Ok(FileConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Config(format!("bad config: {e}")))
        }
    }
}

fn merged_params(args: &ModelArgs, file: &FileConfig) -> Result<(String, ModelParams), CliError> {
    let defaults = ModelParams::default();
    let params = ModelParams {
        m: args.m.or(file.m).unwrap_or(defaults.m),
        gamma: args.gamma.or(file.gamma).unwrap_or(defaults.gamma),
        n_x: args.nx.or(file.nx).unwrap_or(defaults.n_x),
        n_v: args.nv.or(file.nv).unwrap_or(defaults.n_v),
    };
    if !(params.m > 0.0) || !(params.gamma > 0.0) {
        return Err(CliError::Config(format!(
            "m and gamma must be positive (m = {}, gamma = {})",
            params.m, params.gamma
        )));
    }
    let model = args
        .model
        .clone()
        .or_else(|| file.model.clone())
        .ok_or_else(|| CliError::Config("no model given (use --model)".into()))?;
    Ok((model, params))
}

/// Full-precision float formatting for CSV cells (17 significant digits).
fn fmt(x: f64) -> String {
    format!("{:.16e}", x)
}

fn emit(
    output: &Option<PathBuf>,
    format: &Option<String>,
    pretty: bool,
    json: serde_json::Value,
    csv: Option<String>,
) -> Result<(), CliError> {
    let body = match format.as_deref() {
        Some("csv") => csv.ok_or_else(|| {
            CliError::Config("this command has no CSV representation".into())
        })?,
        _ => {
            if pretty {
                serde_json::to_string_pretty(&json).expect("serializable report")
            } else {
                serde_json::to_string(&json).expect("serializable report")
            }
        }
    };
    match output {
        Some(path) => std::fs::write(path, body + "\n")
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{body}");
            Ok(())
        }
    }
}

fn gamma_grid_from(
    gmin: Option<f64>,
    gmax: Option<f64>,
    gpoints: Option<usize>,
    lambda_o_hint: f64,
) -> Result<Vec<f64>, CliError> {
    match (gmin, gmax) {
        (Some(a), Some(b)) if a > 0.0 && b > a => Ok(log_grid(a, b, gpoints.unwrap_or(48))),
        (None, None) => Ok(default_gamma_grid(lambda_o_hint)),
        _ => Err(CliError::Config(
            "gamma_min and gamma_max must both be given, positive and ordered".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let file = load_file_config(&cli.config)?;
    let output = cli
        .output
        .clone()
        .or_else(|| file.output.as_ref().map(PathBuf::from));
    let format = cli.format.clone().or_else(|| file.format.clone());
    if let Some(f) = &format {
        if f != "json" && f != "csv" {
            return Err(CliError::Config(format!("unknown format '{f}'")));
        }
    }

    match &cli.command {
        Command::Spectrum { model, tol } => {
            let (name, params) = merged_params(model, &file)?;
            let tol = tol.or(file.tol).unwrap_or(DEFAULT_KERNEL_TOL);
            if !(tol > 0.0) {
                return Err(CliError::Config("tol must be positive".into()));
            }
            let built = build_model(&name, &params)?;
            let rep = spectral_gap(&built.decomp.full()?, tol)?;
            let json = serde_json::json!({
                "model": built.info,
                "params": params,
                "spectrum": rep,
            });
            let mut csv = String::from("re,im\n");
            for (re, im) in &rep.eigenvalues {
                csv.push_str(&format!("{},{}\n", fmt(*re), fmt(*im)));
            }
            emit(&output, &format, cli.pretty, json, Some(csv))
        }
        Command::RateScan {
            model,
            gamma_min,
            gamma_max,
            gamma_points,
        } => {
            let (name, params) = merged_params(model, &file)?;
            let built = build_model(&name, &params)?;
            let lambda_hint = spectral_gap(
                &overdamped_limit(&built.decomp)?.op,
                DEFAULT_KERNEL_TOL,
            )
            .map(|r| r.gap)
            .unwrap_or(1.0);
            let grid = gamma_grid_from(
                gamma_min.or(file.gamma_min),
                gamma_max.or(file.gamma_max),
                gamma_points.or(file.gamma_points),
                lambda_hint,
            )?;
            let rep = rate_scan(&built.decomp, &grid, None)?;
            let json = serde_json::json!({
                "model": built.info,
                "params": params,
                "rate_scan": rep,
            });
            let mut csv =
                String::from("gamma,spectral_gap,singular_gap,prefactor,prefactor_margin\n");
            for i in 0..rep.gamma_grid.len() {
                csv.push_str(&format!(
                    "{},{},{},{},{}\n",
                    fmt(rep.gamma_grid[i]),
                    fmt(rep.spectral_gaps[i]),
                    fmt(rep.singular_gaps[i]),
                    fmt(rep.prefactors[i]),
                    fmt(rep.prefactors_with_margin[i]),
                ));
            }
            emit(&output, &format, cli.pretty, json, Some(csv))
        }
        Command::LiftCheck { model } => {
            let (name, params) = merged_params(model, &file)?;
            let built = build_model(&name, &params)?;
            let rep = check_lift_conditions(&built.decomp, None)?;
            let json = serde_json::json!({
                "model": built.info,
                "params": params,
                "lift": rep,
                "kernel_dims": {"ker_l": built.info.ker_l_dim, "ker_ls": built.info.ker_ls_dim},
            });
            emit(&output, &format, cli.pretty, json, None)
        }
        Command::OverdampedLimit { model } => {
            let (name, params) = merged_params(model, &file)?;
            let built = build_model(&name, &params)?;
            let od = overdamped_limit(&built.decomp)?;
            let gap = match spectral_gap(&od.op, DEFAULT_KERNEL_TOL) {
                Ok(r) => Some(r.gap),
                Err(HypoflowError::GapUndefined) => None,
                Err(e) => return Err(e.into()),
            };
            let json = serde_json::json!({
                "model": built.info,
                "params": params,
                "overdamped": {
                    "dim": od.op.dim(),
                    "spectral_gap": gap,
                    "range_residual": od.range_residual,
                },
            });
            emit(&output, &format, cli.pretty, json, None)
        }
        Command::FlowPoincare {
            model,
            t_horizon,
            quad_n,
            gamma_min,
            gamma_max,
            gamma_points,
        } => {
            let (name, params) = merged_params(model, &file)?;
            let built = build_model(&name, &params)?;
            let od = overdamped_limit(&built.decomp)?;
            let lambda_o = spectral_gap(&od.op, DEFAULT_KERNEL_TOL)
                .map(|r| r.gap)
                .unwrap_or(1.0);
            let t = t_horizon
                .or(file.t_horizon)
                .unwrap_or(2.0 / lambda_o.sqrt());
            let qn = quad_n.or(file.quad_n).unwrap_or(64);
            if !(t > 0.0) || qn < 16 {
                return Err(CliError::Config(
                    "t_horizon must be positive and quad_n >= 16".into(),
                ));
            }
            let grid = gamma_grid_from(
                gamma_min.or(file.gamma_min),
                gamma_max.or(file.gamma_max),
                gamma_points.or(file.gamma_points).or(Some(12)),
                lambda_o,
            )?;
            let x0_set = default_x0_set(&built.decomp)?;
            let fit = fit_constants(&built.decomp, &grid, t, Some(&x0_set), qn)?;
            let decay = verify_decay(
                &built.decomp,
                fit.gamma_max,
                fit.predicted_max_rate,
                t,
                &x0_set,
            )?;
            let mut csv = String::from("gamma,initial,lhs,dissipation,ratio,degenerate\n");
            for &g in &grid {
                for s in flow_ratio(&built.decomp, g, t, &x0_set, qn)? {
                    csv.push_str(&format!(
                        "{},{},{},{},{},{}\n",
                        fmt(s.gamma),
                        s.initial_label,
                        fmt(s.lhs),
                        fmt(s.dissipation),
                        fmt(s.ratio),
                        s.degenerate,
                    ));
                }
            }
            let json = serde_json::json!({
                "model": built.info,
                "params": params,
                "t_horizon": t,
                "fit": fit,
                "decay_check": decay,
            });
            emit(&output, &format, cli.pretty, json, Some(csv))
        }
        Command::Simulate {
            model,
            dynamics,
            dt,
            n_steps,
            n_paths,
            seed,
            integrator,
            initial,
            x0,
            v0,
            observable,
            fit_start,
            fit_end,
            equilibrium,
        } => {
            let (name, params) = merged_params(model, &file)?;
            let built = build_model(&name, &params)?;
            let potential = built.potential.clone().ok_or_else(|| {
                CliError::Config(format!("model '{name}' has no particle dynamics"))
            })?;
            let dynamics = dynamics
                .clone()
                .or_else(|| file.dynamics.clone())
                .unwrap_or_else(|| "langevin".into());
            let integrator = match integrator
                .clone()
                .or_else(|| file.integrator.clone())
                .unwrap_or_else(|| "baoab".into())
                .as_str()
            {
                "baoab" => Integrator::Baoab,
                "euler_maruyama" => Integrator::EulerMaruyama,
                other => return Err(CliError::Config(format!("unknown integrator '{other}'"))),
            };
            let initial = match initial
                .clone()
                .or_else(|| file.initial.clone())
                .unwrap_or_else(|| "point".into())
                .as_str()
            {
                "point" => InitialCondition::Point {
                    x0: x0.or(file.x0).unwrap_or(1.0),
                    v0: v0.or(file.v0).unwrap_or(0.0),
                },
                "stationary" => InitialCondition::Stationary,
                other => return Err(CliError::Config(format!("unknown initial '{other}'"))),
            };
            let cfg = SimConfig {
                potential,
                gamma: Some(params.gamma),
                dt: dt.or(file.dt).unwrap_or(0.01),
                n_steps: n_steps.or(file.n_steps).unwrap_or(1000),
                n_paths: n_paths.or(file.n_paths).unwrap_or(10_000),
                seed: seed.or(file.seed).unwrap_or(0),
                integrator,
                initial,
            };
            let ens = match dynamics.as_str() {
                "langevin" => simulate_langevin(&cfg)?,
                "overdamped" => simulate_overdamped(&cfg)?,
                other => return Err(CliError::Config(format!("unknown dynamics '{other}'"))),
            };
            let estimate = match observable.clone().or_else(|| file.observable.clone()) {
                Some(obs) => {
                    let a = fit_start.or(file.fit_start).unwrap_or(0.0);
                    let b = fit_end
                        .or(file.fit_end)
                        .unwrap_or(cfg.n_steps as f64 * cfg.dt);
                    let eq = equilibrium.or(file.equilibrium).unwrap_or(0.0);
                    Some(estimate_decay_rate(&ens, &obs, (a, b), eq)?)
                }
                None => None,
            };
            // CSV with the configuration echoed as a JSON header comment.
            let mut csv = format!(
                "# {}\n",
                serde_json::to_string(&ens.config).expect("serializable config")
            );
            csv.push_str("time");
            for nme in &ens.observable_names {
                csv.push_str(&format!(",{nme}_mean,{nme}_stderr"));
            }
            csv.push('\n');
            for (i, &t) in ens.times.iter().enumerate() {
                csv.push_str(&fmt(t));
                for o in 0..ens.observable_names.len() {
                    csv.push_str(&format!(",{},{}", fmt(ens.means[o][i]), fmt(ens.stderrs[o][i])));
                }
                csv.push('\n');
            }
            let json = serde_json::json!({
                "model": built.info,
                "ensemble": ens,
                "rate_estimate": estimate,
            });
            emit(&output, &format, cli.pretty, json, Some(csv))
        }
        Command::Formulas {
            kind,
            m,
            gamma,
            c,
            lambda_s,
            c1,
            c2,
        } => {
            let kind = kind
                .clone()
                .or_else(|| file.kind.clone())
                .ok_or_else(|| CliError::Config("formulas requires --kind".into()))?;
            let formula = match kind.as_str() {
                "langevin" => RateFormula::Langevin {
                    m: m.or(file.m).unwrap_or(1.0),
                    gamma: gamma.or(file.gamma).unwrap_or(1.0),
                    c: c.or(file.c).unwrap_or(1.0),
                },
                "quantum" => RateFormula::Quantum {
                    lambda_s: lambda_s.or(file.lambda_s).unwrap_or(1.0),
                    c1: c1.or(file.c1).unwrap_or(1.0),
                    c2: c2.or(file.c2).unwrap_or(1.0),
                    gamma: gamma.or(file.gamma).unwrap_or(1.0),
                },
                other => return Err(CliError::Config(format!("unknown kind '{other}'"))),
            };
            let nu = model_rate_formula(&formula);
            let json = serde_json::json!({"formula": formula, "rate": nu});
            emit(&output, &format, cli.pretty, json, None)
        }
        Command::Models { model } => {
            let defaults = ModelParams::default();
            let params = ModelParams {
                m: model.m.or(file.m).unwrap_or(defaults.m),
                gamma: model.gamma.or(file.gamma).unwrap_or(defaults.gamma),
                n_x: model.nx.or(file.nx).unwrap_or(8),
                n_v: model.nv.or(file.nv).unwrap_or(8),
            };
            let infos = list_models(&params)?;
            let json = serde_json::json!({"params": params, "models": infos});
            let mut csv = String::from(
                "name,kind,dimension,ker_l_dim,ker_ls_dim,classification,php_satisfied\n",
            );
            for i in &infos {
                csv.push_str(&format!(
                    "{},{},{},{},{},{:?},{}\n",
                    i.name,
                    i.kind,
                    i.dimension,
                    i.ker_l_dim,
                    i.ker_ls_dim,
                    i.classification,
                    i.php_satisfied
                ));
            }
            emit(&output, &format, cli.pretty, json, Some(csv))
        }
    }
}
