//! Schatten sums against the two oscillation integrals, cell by cell.

use std::time::Instant;

use bhl_core::geometry::lattice_generate;
use bhl_core::operators::{hankel_gram, schatten_from_singular_values};
use bhl_core::oscillation::{extrapolate, MoEvaluator};
use bhl_core::quadrature::InvariantIntegral;
use bhl_core::symbols::SymbolPoly;
use bhl_core::weights::RadialWeight;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Resolved};
use crate::error::{HarnessError, HarnessResult};
use crate::io;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Convergent,
    Divergent,
}

impl Verdict {
    fn from_flag(divergent: bool) -> Self {
        if divergent {
            Verdict::Divergent
        } else {
            Verdict::Convergent
        }
    }
}

/// A truncated sum at two radii and the growth between them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    pub inner: f64,
    pub outer: f64,
    pub growth: f64,
    /// Outermost-shell diagnostic of the dλ rule; absent for lattice sums.
    pub shell_flag: Option<bool>,
}

impl Trend {
    fn new(inner: f64, outer: f64, shell_flag: Option<bool>) -> Self {
        let growth = if inner > 0.0 {
            outer / inner - 1.0
        } else if outer > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        Trend {
            inner,
            outer,
            growth,
            shell_flag,
        }
    }

    fn of(inner: &InvariantIntegral, outer: &InvariantIntegral) -> Self {
        Trend::new(inner.value.re, outer.value.re, Some(outer.divergent))
    }

    fn verdict(&self, threshold: f64) -> Verdict {
        Verdict::from_flag(self.growth > threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenSide {
    pub power_sum_f: f64,
    pub power_sum_fbar: f64,
    pub tail_slope_f: f64,
    pub tail_slope_fbar: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub weight: String,
    pub symbol: String,
    pub p: f64,
    /// ‖H_f‖^p_{S_p} + ‖H_{f̄}‖^p_{S_p} at truncation N.
    pub schatten_sum: f64,
    pub schatten_flag: Verdict,
    pub schatten: SchattenSide,
    /// ∫_{|z|<R} MO_{ω,η}(f)^p dλ at the outer truncation.
    pub mo_global: f64,
    pub mo_global_flag: Verdict,
    pub mo_global_trend: Trend,
    /// Σ_j MO_{ω,r}(f)(a_j)^p over lattice points with |a_j| ≤ R.
    pub mo_local_sum: f64,
    pub mo_local_flag: Verdict,
    pub mo_local_trend: Trend,
    /// ∫ MO_{ω,r}(f)^p dλ extrapolated from the two truncations (the outer value when divergent).
    pub mo_local_integral: f64,
    pub mo_local_integral_flag: Verdict,
    pub mo_local_integral_trend: Trend,
    pub ratio_gl: Option<f64>,
    pub ratio_gs: Option<f64>,
    pub ratio_ls: Option<f64>,
    /// schatten_sum / mo_local_integral.
    pub ratio_s_local_integral: Option<f64>,
    pub verdicts_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellFailure {
    pub weight: String,
    pub symbol: String,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatticeSummary {
    pub r: f64,
    pub r_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    pub config: ExperimentConfig,
    pub eta: f64,
    pub local_r: f64,
    pub lattice: LatticeSummary,
    pub cells: Vec<CellReport>,
    pub failures: Vec<CellFailure>,
    pub all_verdicts_agree: bool,
    /// Smallest and largest of ratio_gl, ratio_gs, ratio_ls over convergent cells.
    pub ratio_bracket: Option<(f64, f64)>,
    /// The same with the lattice sum replaced by the local dλ integral.
    pub integral_ratio_bracket: Option<(f64, f64)>,
    pub runtimes_ms: Vec<(String, String, f64)>,
    pub total_runtime_ms: f64,
}

/// One row of `report.csv`.
#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    weight: &'a str,
    symbol: &'a str,
    p: f64,
    schatten_sum: f64,
    schatten_flag: Verdict,
    mo_global: f64,
    mo_global_flag: Verdict,
    mo_local_sum: f64,
    mo_local_flag: Verdict,
    ratio_gl: Option<f64>,
    ratio_gs: Option<f64>,
    ratio_ls: Option<f64>,
}

struct Shared<'a> {
    config: &'a ExperimentConfig,
    lattice: &'a [bhl_core::Complex64],
    eta: f64,
    local_r: f64,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b > 0.0 && a > 0.0).then(|| a / b)
}

fn run_pair(
    shared: &Shared,
    weight: &(String, RadialWeight),
    symbol: &(String, SymbolPoly),
) -> HarnessResult<Vec<CellReport>> {
    let config = shared.config;
    let (wname, w) = weight;
    let (fname, f) = symbol;
    let ps = &config.p;
    let (inner_r, outer_r) = (config.trend_r_max, config.lattice.r_max);
    let threshold = config.growth_threshold;

    let sv_f = hankel_gram(f, w, config.n)?.singular_values()?;
    let sv_fbar = hankel_gram(&f.conj(), w, config.n)?.singular_values()?;

    let rule = config.invariant_rule();
    let global = MoEvaluator::global(w.clone(), shared.eta)?;
    let g_in = global.integrals(f, ps, inner_r, &rule)?;
    let g_out = global.integrals(f, ps, outer_r, &rule)?;

    let local = MoEvaluator::local(w.clone(), shared.local_r, config.disc_rule()?)?;
    let l_in = local.lattice_sums(f, ps, shared.lattice, inner_r)?;
    let l_out = local.lattice_sums(f, ps, shared.lattice, outer_r)?;
    let li_in = local.integrals(f, ps, inner_r, &rule)?;
    let li_out = local.integrals(f, ps, outer_r, &rule)?;

    let mut cells = Vec::with_capacity(ps.len());
    for (k, &p) in ps.iter().enumerate() {
        let sf = schatten_from_singular_values(sv_f.clone(), p)?;
        let sfb = schatten_from_singular_values(sv_fbar.clone(), p)?;
        let schatten_sum = sf.power_sum() + sfb.power_sum();
        let schatten_flag = Verdict::from_flag(sf.divergent || sfb.divergent);

        let g_trend = Trend::of(&g_in[k], &g_out[k]);
        let l_trend = Trend::new(l_in[k].power_sum, l_out[k].power_sum, None);
        let li_trend = Trend::of(&li_in[k], &li_out[k]);
        let (mo_global_flag, mo_local_flag) = (g_trend.verdict(threshold), l_trend.verdict(threshold));
        let li_flag = li_trend.verdict(threshold);
        let mo_local_integral = match li_flag {
            Verdict::Convergent => extrapolate(li_trend.inner, inner_r, li_trend.outer, outer_r, p - 1.0),
            Verdict::Divergent => li_trend.outer,
        };

        let all_convergent = [schatten_flag, mo_global_flag, mo_local_flag]
            .iter()
            .all(|&v| v == Verdict::Convergent);
        let (mo_global, mo_local_sum) = (g_trend.outer, l_trend.outer);
        let when = |v: Option<f64>| if all_convergent { v } else { None };
        cells.push(CellReport {
            weight: wname.clone(),
            symbol: fname.clone(),
            p,
            schatten_sum,
            schatten_flag,
            schatten: SchattenSide {
                power_sum_f: sf.power_sum(),
                power_sum_fbar: sfb.power_sum(),
                tail_slope_f: sf.tail_slope,
                tail_slope_fbar: sfb.tail_slope,
            },
            mo_global,
            mo_global_flag,
            mo_global_trend: g_trend,
            mo_local_sum,
            mo_local_flag,
            mo_local_trend: l_trend,
            mo_local_integral,
            mo_local_integral_flag: li_flag,
            mo_local_integral_trend: li_trend,
            ratio_gl: when(ratio(mo_global, mo_local_sum)),
            ratio_gs: when(ratio(mo_global, schatten_sum)),
            ratio_ls: when(ratio(mo_local_sum, schatten_sum)),
            ratio_s_local_integral: when(ratio(schatten_sum, mo_local_integral)),
            verdicts_agree: schatten_flag == mo_global_flag && mo_global_flag == mo_local_flag,
        });
    }
    Ok(cells)
}

/// Runs every (weight, symbol, p) cell with the first η and r of the config.
pub fn run_equivalence(resolved: &Resolved) -> HarnessResult<EquivalenceReport> {
    let start = Instant::now();
    let config = &resolved.config;
    let lattice = lattice_generate(config.lattice.r, config.lattice.r_max)?;
    for (_, w) in &resolved.weights {
        io::load_moment_cache(w)?;
    }
    let shared = Shared {
        config,
        lattice: &lattice.points,
        eta: config.eta[0],
        local_r: config.r[0],
    };
    let pairs: Vec<(usize, usize)> = (0..resolved.weights.len())
        .flat_map(|i| (0..resolved.symbols.len()).map(move |j| (i, j)))
        .collect();
    let outcomes: Vec<(HarnessResult<Vec<CellReport>>, f64)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let t = Instant::now();
            let out = run_pair(&shared, &resolved.weights[i], &resolved.symbols[j]);
            (out, t.elapsed().as_secs_f64() * 1e3)
        })
        .collect();

    let mut cells = Vec::new();
    let mut failures = Vec::new();
    let mut runtimes_ms = Vec::new();
    for (&(i, j), (outcome, ms)) in pairs.iter().zip(outcomes) {
        let (wname, fname) = (&resolved.weights[i].0, &resolved.symbols[j].0);
        runtimes_ms.push((wname.clone(), fname.clone(), ms));
        match outcome {
            Ok(c) => cells.extend(c),
            Err(e) => failures.push(CellFailure {
                weight: wname.clone(),
                symbol: fname.clone(),
                error: e.to_string(),
            }),
        }
    }
    for (_, w) in &resolved.weights {
        io::store_moment_cache(w)?;
    }
    let ratio_bracket = bracket(
        cells
            .iter()
            .flat_map(|c| [c.ratio_gl, c.ratio_gs, c.ratio_ls])
            .flatten(),
    );
    let integral_ratio_bracket = bracket(
        cells
            .iter()
            .filter(|c| c.ratio_gs.is_some())
            .flat_map(|c| {
                [
                    ratio(c.mo_global, c.mo_local_integral),
                    c.ratio_gs,
                    ratio(c.mo_local_integral, c.schatten_sum),
                ]
            })
            .flatten(),
    );
    Ok(EquivalenceReport {
        config: config.clone(),
        eta: shared.eta,
        local_r: shared.local_r,
        lattice: LatticeSummary {
            r: lattice.separation_r,
            r_max: lattice.r_max,
            points: lattice.len(),
        },
        all_verdicts_agree: cells.iter().all(|c| c.verdicts_agree),
        cells,
        failures,
        ratio_bracket,
        integral_ratio_bracket,
        runtimes_ms,
        total_runtime_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

fn bracket(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, r| {
        Some(acc.map_or((r, r), |(lo, hi): (f64, f64)| (lo.min(r), hi.max(r))))
    })
}

/// Writes `report.csv` and `report.json` into the configured output directory.
pub fn write_equivalence(report: &EquivalenceReport) -> HarnessResult<()> {
    let dir = &report.config.output.dir;
    io::ensure_dir(dir)?;
    let rows: Vec<CsvRow> = report
        .cells
        .iter()
        .map(|c| CsvRow {
            weight: &c.weight,
            symbol: &c.symbol,
            p: c.p,
            schatten_sum: c.schatten_sum,
            schatten_flag: c.schatten_flag,
            mo_global: c.mo_global,
            mo_global_flag: c.mo_global_flag,
            mo_local_sum: c.mo_local_sum,
            mo_local_flag: c.mo_local_flag,
            ratio_gl: c.ratio_gl,
            ratio_gs: c.ratio_gs,
            ratio_ls: c.ratio_ls,
        })
        .collect();
    io::write_rows(&dir.join("report.csv"), &rows)?;
    io::write_json(&dir.join("report.json"), report)
}

/// Error for a run in which some cells failed; the reports are still written.
pub fn partial_failure(report: &EquivalenceReport) -> Option<HarnessError> {
    (!report.failures.is_empty()).then(|| HarnessError::Partial {
        failed: report.failures.len(),
        total: report.failures.len() + report.cells.len() / report.config.p.len().max(1),
    })
}
