//! Ratio profiles for the auxiliary estimates over a z-grid.

use std::f64::consts::TAU;
use std::time::Instant;

use bhl_core::geometry::mobius;
use bhl_core::kernels::{kernel_beta_bound, kernel_beta_integral};
use bhl_core::operators::hankel_kernel_norm;
use bhl_core::oscillation::{averaging_ratio, mo_local, polar_grid, reverse_estimate_rhs, BerezinEngine};
use bhl_core::weights::plateau;
use bhl_core::Complex64;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Resolved};
use crate::error::HarnessResult;
use crate::io;

/// Slack allowed above the exact constant 1 in ‖H_f k‖ ≤ MO_{ω,η}(f).
pub const HANKEL_KERNEL_SLACK: f64 = 1e-4;

/// Pairs (z, ζ) sampled per grid point for the averaging estimate.
pub const PAIRS_PER_POINT: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimate {
    /// ∫|K^η_z| β(z,·)^c ω dA against ω̂(z)/(1−|z|)^{η−1}.
    KernelBeta,
    /// ‖H_f k_z‖ against MO_{ω,η}(f)(z), sharp constant 1.
    HankelKernel,
    /// MO_{ω,r}(f)(z)² against the kernel-reproduced double integral over D(z,r).
    ReverseEstimate,
    /// |f̂_r(z) − f̂_r(ζ)| against MO_{ω,2r}(f)(z) for β(z,ζ) < r.
    Averaging,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaProfile {
    pub estimate: Estimate,
    pub weight: String,
    pub symbol: Option<String>,
    /// η for the kernel estimates, r for the disc estimates.
    pub parameter: f64,
    /// Distance exponent c of the kernel estimate.
    pub exponent: Option<f64>,
    pub points: Vec<Complex64>,
    /// LHS/RHS per point; `None` where both sides vanish.
    pub ratios: Vec<Option<f64>>,
    pub max: f64,
    pub min: f64,
    /// Maxima over each ring of the grid, innermost first.
    pub ring_maxima: Vec<f64>,
    pub plateau: bool,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaFailure {
    pub estimate: Estimate,
    pub weight: String,
    pub symbol: Option<String>,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub config: ExperimentConfig,
    pub profiles: Vec<LemmaProfile>,
    pub failures: Vec<LemmaFailure>,
    pub all_hold: bool,
    pub total_runtime_ms: f64,
}

struct Job {
    estimate: Estimate,
    weight: usize,
    symbol: Option<usize>,
    parameter: f64,
    exponent: Option<f64>,
}

fn finish(
    job: &Job,
    resolved: &Resolved,
    points: Vec<Complex64>,
    ratios: Vec<Option<f64>>,
    rings: usize,
) -> LemmaProfile {
    let defined: Vec<f64> = ratios.iter().flatten().copied().collect();
    let max = defined.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = defined.iter().copied().fold(f64::INFINITY, f64::min);
    let per_ring = ratios.len() / rings.max(1);
    let ring_maxima: Vec<f64> = ratios
        .chunks(per_ring.max(1))
        .map(|c| c.iter().flatten().copied().fold(0.0, f64::max))
        .collect();
    let finite = defined.iter().all(|v| v.is_finite());
    let plateau = finite && plateau(&ring_maxima);
    let holds = match job.estimate {
        Estimate::HankelKernel => finite && max <= 1.0 + HANKEL_KERNEL_SLACK,
        _ => plateau,
    };
    LemmaProfile {
        estimate: job.estimate,
        weight: resolved.weights[job.weight].0.clone(),
        symbol: job.symbol.map(|j| resolved.symbols[j].0.clone()),
        parameter: job.parameter,
        exponent: job.exponent,
        points,
        ratios,
        max,
        min,
        ring_maxima,
        plateau,
        holds,
    }
}

fn guarded(lhs: f64, rhs: f64) -> Option<f64> {
    if rhs <= 1e-300 {
        (lhs > 1e-14).then_some(f64::INFINITY)
    } else {
        Some(lhs / rhs)
    }
}

fn run_job(job: &Job, resolved: &Resolved) -> HarnessResult<LemmaProfile> {
    let config = &resolved.config;
    let g = &config.lemma_grid;
    let grid = polar_grid(g.radial, g.angular, g.max_radius);
    let w = &resolved.weights[job.weight].1;
    let f = job.symbol.map(|j| &resolved.symbols[j].1);
    let ratios: Vec<Option<f64>> = match (job.estimate, f) {
        (Estimate::KernelBeta, _) => {
            let rule = config.graded_rule()?;
            let c = job.exponent.unwrap_or(0.0);
            grid.iter()
                .map(|&z| {
                    let lhs = kernel_beta_integral(w, job.parameter, c, z, &rule)?;
                    Ok(guarded(lhs, kernel_beta_bound(w, job.parameter, z)?))
                })
                .collect::<HarnessResult<_>>()?
        }
        (Estimate::HankelKernel, Some(f)) => {
            let engine = BerezinEngine::new(w.clone(), job.parameter)?;
            grid.iter()
                .map(|&z| {
                    let lhs = hankel_kernel_norm(f, &engine, z)?;
                    Ok(guarded(lhs, engine.mo_global(f, z)?))
                })
                .collect::<HarnessResult<_>>()?
        }
        (Estimate::ReverseEstimate, Some(f)) => {
            let rule = config.local_rule()?;
            grid.iter()
                .map(|&z| {
                    let lhs = mo_local(f, w, job.parameter, z, &rule)?.powi(2);
                    Ok(guarded(lhs, reverse_estimate_rhs(f, w, job.parameter, z, &rule)?))
                })
                .collect::<HarnessResult<_>>()?
        }
        (Estimate::Averaging, Some(f)) => {
            let rule = config.local_rule()?;
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let mut unit = move || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
            // one offset set for the whole grid, so ring maxima move smoothly with |z|;
            // ζ = φ_z(u) with β(0, u) < r gives β(z, ζ) < r
            let offsets: Vec<Complex64> = (0..PAIRS_PER_POINT)
                .map(|_| Complex64::from_polar((job.parameter * unit()).tanh(), TAU * unit()))
                .collect();
            grid.iter()
                .map(|&z| {
                    let mut worst: Option<f64> = None;
                    for &u in &offsets {
                        if let Some(v) = averaging_ratio(f, w, job.parameter, z, mobius(z, u), &rule)? {
                            worst = Some(worst.map_or(v, |m| m.max(v)));
                        }
                    }
                    Ok(worst)
                })
                .collect::<HarnessResult<_>>()?
        }
        _ => unreachable!("symbol-dependent estimates always carry a symbol"),
    };
    Ok(finish(job, resolved, grid, ratios, g.radial))
}

pub fn run_lemma_suite(resolved: &Resolved) -> HarnessResult<LemmaReport> {
    let start = Instant::now();
    let config = &resolved.config;
    for (_, w) in &resolved.weights {
        io::load_moment_cache(w)?;
    }
    let mut jobs = Vec::new();
    for wi in 0..resolved.weights.len() {
        for &eta in &config.eta {
            for c in [0.0, 1.0] {
                jobs.push(Job {
                    estimate: Estimate::KernelBeta,
                    weight: wi,
                    symbol: None,
                    parameter: eta,
                    exponent: Some(c),
                });
            }
        }
        for fi in 0..resolved.symbols.len() {
            for &eta in &config.eta {
                jobs.push(Job {
                    estimate: Estimate::HankelKernel,
                    weight: wi,
                    symbol: Some(fi),
                    parameter: eta,
                    exponent: None,
                });
            }
            for &r in &config.r {
                for estimate in [Estimate::ReverseEstimate, Estimate::Averaging] {
                    jobs.push(Job {
                        estimate,
                        weight: wi,
                        symbol: Some(fi),
                        parameter: r,
                        exponent: None,
                    });
                }
            }
        }
    }
    let outcomes: Vec<HarnessResult<LemmaProfile>> = jobs.par_iter().map(|job| run_job(job, resolved)).collect();
    let mut profiles = Vec::new();
    let mut failures = Vec::new();
    for (job, outcome) in jobs.iter().zip(outcomes) {
        match outcome {
            Ok(p) => profiles.push(p),
            Err(e) => failures.push(LemmaFailure {
                estimate: job.estimate,
                weight: resolved.weights[job.weight].0.clone(),
                symbol: job.symbol.map(|j| resolved.symbols[j].0.clone()),
                error: e.to_string(),
            }),
        }
    }
    for (_, w) in &resolved.weights {
        io::store_moment_cache(w)?;
    }
    Ok(LemmaReport {
        config: config.clone(),
        all_hold: failures.is_empty() && profiles.iter().all(|p| p.holds),
        profiles,
        failures,
        total_runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

pub fn write_lemmas(report: &LemmaReport) -> HarnessResult<()> {
    let dir = &report.config.output.dir;
    io::ensure_dir(dir)?;
    io::write_json(&dir.join("lemmas.json"), report)
}
