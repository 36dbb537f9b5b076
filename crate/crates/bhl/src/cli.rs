use std::ffi::OsString;
use std::path::PathBuf;

use bhl_core::geometry::{lattice_generate, lattice_validate};
use bhl_core::kernels::{kernel_eval, normalized_kernel_eval, normalized_kernel_norm, SeriesPolicy};
use bhl_core::operators::{hankel_gram, schatten_norm};
use bhl_core::oscillation::MoEvaluator;
use bhl_core::quadrature::{DiscRule, InvariantRule};
use bhl_core::symbols::SymbolPoly;
use bhl_core::weights::{classify, default_grid, RadialWeight};
use bhl_core::Complex64;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::equivalence::{partial_failure, run_equivalence, write_equivalence};
use crate::error::{HarnessError, HarnessResult};
use crate::io;
use crate::lemmas::{run_lemma_suite, write_lemmas};
use crate::parse::{parse_point, parse_weight};

#[derive(Debug, Parser)]
#[command(
    name = "bhl",
    version,
    about = "Weighted Bergman-space Hankel operators and mean oscillation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Doubling and regularity report for a weight.
    Classify {
        #[arg(long, value_parser = parse_weight)]
        weight: RadialWeight,
        /// Use r_k = 1 − 2^{−k/16} for k < POINTS instead of the default 256.
        #[arg(long)]
        grid_points: Option<usize>,
    },
    /// Reproducing kernel B_z(ζ) and, with --eta, the normalized kernel k^{η+2}_z.
    Kernel {
        #[arg(long, value_parser = parse_weight)]
        weight: RadialWeight,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        z: Complex64,
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        zeta: Option<Complex64>,
        #[arg(long, allow_hyphen_values = true)]
        eta: Option<f64>,
    },
    /// Truncated Schatten norm of the Hankel operator H_f.
    Schatten {
        #[arg(long, value_parser = parse_weight)]
        weight: RadialWeight,
        #[arg(long)]
        symbol: SymbolPoly,
        #[arg(long)]
        p: f64,
        #[arg(long = "N", default_value_t = 128)]
        n: usize,
        /// Include the singular values in the output.
        #[arg(long)]
        singular_values: bool,
    },
    /// Mean-oscillation profile at given points or on a lattice.
    Mo(MoArgs),
    /// Three-way comparison over weights × symbols × p.
    Equivalence(RunArgs),
    /// Ratio profiles of the auxiliary estimates.
    Lemmas(RunArgs),
    /// Generate (and optionally validate) an r-lattice.
    Lattice {
        #[arg(long)]
        r: f64,
        #[arg(long)]
        r_max: f64,
        #[arg(long)]
        validate: bool,
        #[arg(long, default_value_t = 20_000)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the points as `re,im` rows.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Variant {
    Global,
    Local,
}

#[derive(Debug, Args)]
struct MoArgs {
    #[arg(long, value_parser = parse_weight)]
    weight: RadialWeight,
    #[arg(long)]
    symbol: SymbolPoly,
    #[arg(long, value_enum, default_value_t = Variant::Local)]
    variant: Variant,
    #[arg(long, default_value_t = 4.0)]
    eta: f64,
    /// Bergman-disc radius; defaults to artanh(1/2).
    #[arg(long)]
    r: Option<f64>,
    /// Sample points; without any, the lattice below is used.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    z: Vec<Complex64>,
    #[arg(long, default_value_t = 0.5)]
    lattice_r: f64,
    #[arg(long, default_value_t = 0.995)]
    r_max: f64,
    #[arg(long = "p")]
    ps: Vec<f64>,
    /// Write `re,im,value` rows here and the p-norm summary next to it.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "weight")]
    weights: Vec<String>,
    #[arg(long = "symbol")]
    symbols: Vec<String>,
    #[arg(long = "p")]
    ps: Vec<f64>,
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

impl RunArgs {
    fn config(&self) -> HarnessResult<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(out) = &self.out {
            config.output.dir = out.clone();
        }
        if !self.weights.is_empty() {
            config.weights = self.weights.clone();
        }
        if !self.symbols.is_empty() {
            config.symbols = self.symbols.clone();
        }
        if !self.ps.is_empty() {
            config.p = self.ps.clone();
        }
        if let Some(n) = self.n {
            config.n = n;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }
}

fn print(value: &serde_json::Value) {
    use std::io::Write;
    // a closed pipe (`bhl ... | head`) is not an error worth reporting
    let _ = writeln!(
        std::io::stdout(),
        "{}",
        serde_json::to_string_pretty(value).expect("json values serialize")
    );
}

fn with_cache<T>(w: &RadialWeight, body: impl FnOnce() -> HarnessResult<T>) -> HarnessResult<T> {
    io::load_moment_cache(w)?;
    let out = body()?;
    io::store_moment_cache(w)?;
    Ok(out)
}

fn execute(command: Command) -> HarnessResult<()> {
    match command {
        Command::Classify { weight, grid_points } => with_cache(&weight, || {
            let grid = match grid_points {
                Some(n) => (0..n).map(|k| 1.0 - (-(k as f64) / 16.0).exp2()).collect(),
                None => default_grid(),
            };
            let report = classify(&weight, &grid)?;
            print(&json!({ "weight": weight.to_string(), "in_d": report.in_d(), "report": report }));
            Ok(())
        }),
        Command::Kernel { weight, z, zeta, eta } => with_cache(&weight, || {
            let zeta = zeta.unwrap_or(z);
            let b = kernel_eval(&weight, z, zeta, &SeriesPolicy::default())?;
            let mut out =
                json!({ "weight": weight.to_string(), "z": z, "zeta": zeta, "kernel": b.value, "terms": b.terms });
            if let Some(eta) = eta {
                out["eta"] = json!(eta);
                out["standard_kernel_norm"] = json!(normalized_kernel_norm(&weight, eta, z)?);
                out["normalized_value"] = json!(normalized_kernel_eval(&weight, eta, z, zeta)?);
            }
            print(&out);
            Ok(())
        }),
        Command::Schatten {
            weight,
            symbol,
            p,
            n,
            singular_values,
        } => with_cache(&weight, || {
            if n == 0 {
                return Err(HarnessError::Usage("--N must be positive".into()));
            }
            let report = schatten_norm(&hankel_gram(&symbol, &weight, n)?, p)?;
            let mut out = json!({
                "weight": weight.to_string(),
                "symbol": symbol.to_string(),
                "p": p,
                "N": n,
                "norm": report.norm_p,
                "power_sum": report.power_sum(),
                "tail_slope": report.tail_slope,
                "divergent": report.divergent,
            });
            if singular_values {
                out["singular_values"] = json!(report.singular_values);
            }
            print(&out);
            Ok(())
        }),
        Command::Mo(args) => {
            let weight = args.weight.clone();
            with_cache(&weight, || mo(args))
        }
        Command::Equivalence(args) => {
            let resolved = args.config()?.resolve()?;
            let report = run_equivalence(&resolved)?;
            write_equivalence(&report)?;
            print(&json!({
                "output": report.config.output.dir,
                "cells": report.cells.len(),
                "failures": report.failures.len(),
                "all_verdicts_agree": report.all_verdicts_agree,
                "ratio_bracket": report.ratio_bracket,
                "integral_ratio_bracket": report.integral_ratio_bracket,
            }));
            partial_failure(&report).map_or(Ok(()), Err)
        }
        Command::Lemmas(args) => {
            let resolved = args.config()?.resolve()?;
            let report = run_lemma_suite(&resolved)?;
            write_lemmas(&report)?;
            let summary: Vec<_> = report
                .profiles
                .iter()
                .map(|p| json!({ "estimate": p.estimate, "weight": p.weight, "symbol": p.symbol, "parameter": p.parameter, "exponent": p.exponent, "max": p.max, "holds": p.holds }))
                .collect();
            print(
                &json!({ "output": report.config.output.dir, "all_hold": report.all_hold, "profiles": summary, "failures": report.failures }),
            );
            if report.failures.is_empty() {
                Ok(())
            } else {
                Err(HarnessError::Partial {
                    failed: report.failures.len(),
                    total: report.failures.len() + report.profiles.len(),
                })
            }
        }
        Command::Lattice {
            r,
            r_max,
            validate,
            probes,
            seed,
            out,
        } => {
            let lattice = lattice_generate(r, r_max)?;
            let mut summary = json!({ "r": r, "r_max": r_max, "points": lattice.len() });
            if validate {
                summary["validation"] = json!(lattice_validate(&lattice.points, r, r_max, probes, seed)?);
            }
            if let Some(path) = out {
                io::write_points(&path, &lattice.points)?;
                summary["output"] = json!(path);
            }
            print(&summary);
            Ok(())
        }
    }
}

fn mo(args: MoArgs) -> HarnessResult<()> {
    let evaluator = match args.variant {
        Variant::Global => MoEvaluator::global(args.weight.clone(), args.eta)?,
        Variant::Local => MoEvaluator::local(
            args.weight.clone(),
            args.r.unwrap_or(0.5f64.atanh()),
            DiscRule::default(),
        )?,
    };
    let points = if args.z.is_empty() {
        lattice_generate(args.lattice_r, args.r_max)?.points
    } else {
        args.z.clone()
    };
    let ps = if args.ps.is_empty() { vec![2.0] } else { args.ps.clone() };
    let profile = evaluator.profile(&args.symbol, &points, &ps, args.r_max, &InvariantRule::default())?;
    match &args.out {
        Some(path) => {
            let sidecar = io::write_profile(path, &profile)?;
            print(&json!({ "output": path, "summary": sidecar, "points": points.len(), "p_norms": profile.p_norms }));
        }
        None => print(&serde_json::to_value(&profile).expect("profiles serialize")),
    }
    Ok(())
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{}", e.record());
            e.exit_code()
        }
    }
}
