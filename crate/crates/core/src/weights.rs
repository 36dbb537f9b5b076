//! Radial weights on the unit disc: evaluation, tail mass ω̂, moments and
//! class membership tests.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use crate::quadrature::adaptive::{integrate, integrate_to_infinity};
use crate::quadrature::{integrate_bergman_disc, pairwise_sum, DiscRule};
use crate::special::{ln_gamma, ln_gamma_ratio};
use crate::{Error, Result};

/// Relative tolerance for ω̂ and moments obtained by quadrature.
pub const QUADRATURE_TOL: f64 = 1e-12;

/// Tables must reach this radius; the weight is held constant beyond the last sample.
pub const TABLE_MIN_REACH: f64 = 0.999;

/// Integer standard exponents up to this size use the polynomial closed forms.
const INTEGER_CLOSED_FORM_MAX: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum WeightKind {
    /// (η+1)(1−r²)^η
    Standard { eta: f64 },
    /// (1−r)^α (1 − ln(1−r))^β
    LogPower { alpha: f64, beta: f64 },
    /// Samples (r, ω(r)) joined by a monotone cubic.
    Tabulated { samples: Vec<(f64, f64)> },
}

/// Monotone piecewise cubic (Fritsch–Carlson slopes).
#[derive(Debug, Clone)]
struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    /// ∫_{x_i}^{x_last} of the interpolant.
    suffix: Vec<f64>,
}

fn pchip_end_slope(h0: f64, h1: f64, m0: f64, m1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if d.signum() != m0.signum() {
        0.0
    } else if m0.signum() != m1.signum() && d.abs() > 3.0 * m0.abs() {
        3.0 * m0
    } else {
        d
    }
}

impl Pchip {
    fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let m: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut d = alloc::vec![0.0; n];
        if n == 2 {
            d[0] = m[0];
            d[1] = m[0];
        } else {
            for k in 1..n - 1 {
                if m[k - 1] * m[k] > 0.0 {
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
                }
            }
            d[0] = pchip_end_slope(h[0], h[1], m[0], m[1]);
            d[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
        }
        let mut suffix = alloc::vec![0.0; n];
        for i in (0..n - 1).rev() {
            let full = h[i] * (y[i] + y[i + 1]) / 2.0 + h[i] * h[i] * (d[i] - d[i + 1]) / 12.0;
            suffix[i] = suffix[i + 1] + full;
        }
        Pchip { x, y, d, suffix }
    }

    fn segment(&self, r: f64) -> usize {
        match self.x.binary_search_by(|v| v.total_cmp(&r)) {
            Ok(i) => i.min(self.x.len() - 2),
            Err(i) => i.saturating_sub(1).min(self.x.len() - 2),
        }
    }

    fn last(&self) -> (f64, f64) {
        (self.x[self.x.len() - 1], self.y[self.y.len() - 1])
    }

    fn eval(&self, r: f64) -> f64 {
        let (x_last, y_last) = self.last();
        if r >= x_last {
            return y_last;
        }
        let i = self.segment(r);
        let h = self.x[i + 1] - self.x[i];
        let u = (r - self.x[i]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        (2.0 * u3 - 3.0 * u2 + 1.0) * self.y[i]
            + (u3 - 2.0 * u2 + u) * h * self.d[i]
            + (-2.0 * u3 + 3.0 * u2) * self.y[i + 1]
            + (u3 - u2) * h * self.d[i + 1]
    }

    /// ∫_r^1 with the constant continuation past the last sample.
    fn tail(&self, r: f64) -> f64 {
        let (x_last, y_last) = self.last();
        if r >= x_last {
            return y_last * (1.0 - r);
        }
        let i = self.segment(r);
        let h = self.x[i + 1] - self.x[i];
        let u = (r - self.x[i]) / h;
        let u2 = u * u;
        let u3 = u2 * u;
        let u4 = u2 * u2;
        let head = h
            * (self.y[i] * (u4 / 2.0 - u3 + u)
                + h * self.d[i] * (u4 / 4.0 - 2.0 * u3 / 3.0 + u2 / 2.0)
                + self.y[i + 1] * (-u4 / 2.0 + u3)
                + h * self.d[i + 1] * (u4 / 4.0 - u3 / 3.0));
        let seg_full = self.suffix[i] - self.suffix[i + 1];
        (seg_full - head) + self.suffix[i + 1] + y_last * (1.0 - x_last)
    }
}

struct Inner {
    kind: WeightKind,
    normalization: f64,
    table: Option<Pchip>,
    moments: spin::Mutex<BTreeMap<u64, f64>>,
    odd: spin::Mutex<Vec<f64>>,
}

/// A radial weight. Cloning is cheap and clones share the moment cache.
#[derive(Clone)]
pub struct RadialWeight {
    inner: Arc<Inner>,
}

impl fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialWeight")
            .field("kind", &self.inner.kind)
            .field("normalization", &self.inner.normalization)
            .finish()
    }
}

impl PartialEq for RadialWeight {
    fn eq(&self, other: &Self) -> bool {
        self.inner.kind == other.inner.kind && self.inner.normalization == other.inner.normalization
    }
}

impl fmt::Display for RadialWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.inner.kind {
            WeightKind::Standard { eta } => write!(f, "standard:eta={eta}")?,
            WeightKind::LogPower { alpha, beta } => write!(f, "logpow:alpha={alpha},beta={beta}")?,
            WeightKind::Tabulated { samples } => write!(f, "table:{}pts", samples.len())?,
        }
        if self.inner.normalization != 1.0 {
            write!(f, "*{}", self.inner.normalization)?;
        }
        Ok(())
    }
}

impl RadialWeight {
    pub fn standard(eta: f64) -> Result<Self> {
        if !(eta > -1.0) || !eta.is_finite() {
            return Err(Error::domain(format!("standard weight needs η > −1, got {eta}")));
        }
        Ok(Self::build(WeightKind::Standard { eta }, 1.0, None))
    }

    pub fn log_power(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > -1.0) || !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::domain(format!(
                "log-power weight needs α > −1 and finite β, got α = {alpha}, β = {beta}"
            )));
        }
        Ok(Self::build(WeightKind::LogPower { alpha, beta }, 1.0, None))
    }

    /// Samples must start at r = 0, increase strictly, reach r ≥ 0.999 and
    /// carry nonnegative values with a positive last value.
    pub fn tabulated(samples: Vec<(f64, f64)>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::config("weight table needs at least two samples"));
        }
        if samples[0].0 != 0.0 {
            return Err(Error::config(format!(
                "weight table must start at r = 0, starts at {}",
                samples[0].0
            )));
        }
        for (i, w) in samples.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(Error::config(format!(
                    "weight table radii not increasing at row {}",
                    i + 1
                )));
            }
        }
        let (r_last, y_last) = samples[samples.len() - 1];
        if !(TABLE_MIN_REACH..1.0).contains(&r_last) {
            return Err(Error::config(format!(
                "weight table must end in [{TABLE_MIN_REACH}, 1), ends at {r_last}"
            )));
        }
        if let Some((i, s)) = samples
            .iter()
            .enumerate()
            .find(|(_, s)| !(s.1 >= 0.0) || !s.1.is_finite())
        {
            return Err(Error::config(format!(
                "weight table value {} at row {i} is not a finite nonnegative number",
                s.1
            )));
        }
        if !(y_last > 0.0) {
            return Err(Error::config(
                "weight table must end with a positive value so that ω̂ > 0",
            ));
        }
        let (x, y): (Vec<f64>, Vec<f64>) = samples.iter().copied().unzip();
        let table = Pchip::new(x, y);
        Ok(Self::build(WeightKind::Tabulated { samples }, 1.0, Some(table)))
    }

    pub fn from_kind(kind: WeightKind) -> Result<Self> {
        match kind {
            WeightKind::Standard { eta } => Self::standard(eta),
            WeightKind::LogPower { alpha, beta } => Self::log_power(alpha, beta),
            WeightKind::Tabulated { samples } => Self::tabulated(samples),
        }
    }

    /// Same shape scaled by `c > 0`. The copy starts with an empty cache.
    pub fn with_normalization(&self, c: f64) -> Result<Self> {
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::domain(format!("normalization must be positive, got {c}")));
        }
        Ok(Self::build(self.inner.kind.clone(), c, self.inner.table.clone()))
    }

    fn build(kind: WeightKind, normalization: f64, table: Option<Pchip>) -> Self {
        RadialWeight {
            inner: Arc::new(Inner {
                kind,
                normalization,
                table,
                moments: spin::Mutex::new(BTreeMap::new()),
                odd: spin::Mutex::new(Vec::new()),
            }),
        }
    }

    pub fn kind(&self) -> &WeightKind {
        &self.inner.kind
    }

    pub fn normalization(&self) -> f64 {
        self.inner.normalization
    }

    /// ω(r) for 0 ≤ r < 1.
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::domain(format!("weight evaluated at r = {r}, outside [0, 1)")));
        }
        Ok(self.density(r))
    }

    /// ω(r) without the domain check; callers guarantee 0 ≤ r < 1.
    #[inline]
    pub fn density(&self, r: f64) -> f64 {
        match &self.inner.kind {
            WeightKind::Standard { .. } | WeightKind::LogPower { .. } => self.density_at_gap(1.0 - r, r),
            WeightKind::Tabulated { .. } => self.table().eval(r) * self.inner.normalization,
        }
    }

    /// ω at radius 1 − u, computed from the gap u to stay accurate near the boundary.
    /// `r` is the same point, used where the radius itself is the better input.
    #[inline]
    fn density_at_gap(&self, u: f64, r: f64) -> f64 {
        let c = self.inner.normalization;
        match &self.inner.kind {
            WeightKind::Standard { eta } => {
                if *eta == 0.0 {
                    c
                } else {
                    c * (eta + 1.0) * (u * (1.0 + r)).powf(*eta)
                }
            }
            WeightKind::LogPower { alpha, beta } => {
                let mut v = c * u.powf(*alpha);
                if *beta != 0.0 {
                    v *= (1.0 - u.ln()).powf(*beta);
                }
                v
            }
            WeightKind::Tabulated { .. } => c * self.table().eval(r),
        }
    }

    fn table(&self) -> &Pchip {
        self.inner
            .table
            .as_ref()
            .expect("tabulated weights carry their interpolant")
    }

    fn integer_eta(&self) -> Option<u32> {
        match self.inner.kind {
            WeightKind::Standard { eta } if eta >= 0.0 && eta.fract() == 0.0 && eta <= INTEGER_CLOSED_FORM_MAX => {
                Some(eta as u32)
            }
            _ => None,
        }
    }

    /// ω̂(r) = ∫_r^1 ω(s) ds.
    pub fn omega_hat(&self, r: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::domain(format!("ω̂ evaluated at r = {r}, outside [0, 1)")));
        }
        let c = self.inner.normalization;
        let v = 1.0 - r;
        if let Some(n) = self.integer_eta() {
            // (η+1) ∫_0^v u^η (2−u)^η du expanded in powers of v
            let mut binom = 1.0;
            let mut terms = Vec::with_capacity(n as usize + 1);
            for k in 0..=n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                let pow2 = 2f64.powi((n - k) as i32);
                let e = (n + k + 1) as i32;
                terms.push(sign * binom * pow2 * v.powi(e) / e as f64);
                binom = binom * (n - k) as f64 / (k + 1) as f64;
            }
            return Ok(c * (n as f64 + 1.0) * pairwise_sum(&terms));
        }
        match &self.inner.kind {
            WeightKind::LogPower { alpha, beta } if *beta == 0.0 => Ok(c * v.powf(alpha + 1.0) / (alpha + 1.0)),
            WeightKind::Tabulated { .. } => Ok(c * self.table().tail(r)),
            _ => {
                // 1 − s = v e^{−t}
                let value = integrate_to_infinity(
                    |t| {
                        let e = (-t).exp();
                        let u = v * e;
                        self.density_at_gap(u, 1.0 - u) * e
                    },
                    30.0,
                    QUADRATURE_TOL,
                )?;
                Ok(v * value)
            }
        }
    }

    /// μ_x = ∫_0^1 s^x ω(s) ds, memoized.
    pub fn moment(&self, x: f64) -> Result<f64> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::domain(format!(
                "moment exponent must be finite and ≥ 0, got {x}"
            )));
        }
        let key = x.to_bits();
        if let Some(&v) = self.inner.moments.lock().get(&key) {
            return Ok(v);
        }
        let v = self.compute_moment(x)?;
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::numerical(format!("moment μ_{x} = {v} is not positive"), v));
        }
        self.inner.moments.lock().insert(key, v);
        Ok(v)
    }

    /// μ_{2n+1} for n < len, in order. Backed by a dense cache that grows on demand.
    pub fn odd_moments(&self, len: usize) -> Result<Vec<f64>> {
        {
            let odd = self.inner.odd.lock();
            if odd.len() >= len {
                return Ok(odd[..len].to_vec());
            }
        }
        let start = self.inner.odd.lock().len();
        let mut fresh = Vec::with_capacity(len - start);
        for n in start..len {
            fresh.push(self.moment(2.0 * n as f64 + 1.0)?);
        }
        let mut odd = self.inner.odd.lock();
        if odd.len() == start {
            odd.extend_from_slice(&fresh);
        } else if odd.len() < len {
            let have = odd.len();
            odd.extend_from_slice(&fresh[have - start..]);
        }
        Ok(odd[..len].to_vec())
    }

    fn compute_moment(&self, x: f64) -> Result<f64> {
        let c = self.inner.normalization;
        let a = (x + 1.0) / 2.0;
        if let Some(n) = self.integer_eta() {
            // (η+1)! / (2 Π_{k=0}^{η} (a+k))
            let mut v = 0.5;
            for k in 0..=n {
                v *= (k as f64 + 1.0) / (a + k as f64);
            }
            return Ok(c * v);
        }
        match &self.inner.kind {
            WeightKind::Standard { eta } => {
                let ln = ln_gamma(eta + 2.0) - core::f64::consts::LN_2 + ln_gamma_ratio(a, eta + 1.0);
                Ok(c * ln.exp())
            }
            WeightKind::LogPower { alpha, beta } if *beta == 0.0 => {
                Ok(c * (ln_gamma(alpha + 1.0) + ln_gamma_ratio(x + 1.0, alpha + 1.0)).exp())
            }
            WeightKind::Tabulated { .. } => self.tabulated_moment(x),
            WeightKind::LogPower { .. } => {
                // s = 1 − e^{−t}
                let bulk = 30.0 + (x + 1.0).ln();
                integrate_to_infinity(
                    |t| {
                        let e = (-t).exp();
                        let sx = if x == 0.0 { 1.0 } else { (x * (-e).ln_1p()).exp() };
                        self.density_at_gap(e, 1.0 - e) * e * sx
                    },
                    bulk,
                    QUADRATURE_TOL,
                )
            }
        }
    }

    fn tabulated_moment(&self, x: f64) -> Result<f64> {
        let table = self.table();
        let c = self.inner.normalization;
        let mut parts = Vec::with_capacity(table.x.len());
        for w in table.x.windows(2) {
            let (v, _) = integrate(|s| s.powf(x) * table.eval(s), w[0], w[1], QUADRATURE_TOL, 1e-300)?;
            parts.push(v);
        }
        let (x_last, y_last) = table.last();
        parts.push(y_last * (1.0 - x_last.powf(x + 1.0)) / (x + 1.0));
        Ok(c * pairwise_sum(&parts))
    }

    /// Cached moments as (exponent, value) pairs in increasing exponent order.
    pub fn moment_cache_snapshot(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self
            .inner
            .moments
            .lock()
            .iter()
            .map(|(&k, &v)| (f64::from_bits(k), v))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Seeds the cache. Entries that disagree with an already cached value
    /// beyond 1e−12 relative are rejected.
    pub fn preload_moments<I: IntoIterator<Item = (f64, f64)>>(&self, entries: I) -> Result<usize> {
        let mut cache = self.inner.moments.lock();
        let mut added = 0;
        for (x, v) in entries {
            if !(x >= 0.0) || !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("invalid cached moment ({x}, {v})")));
            }
            match cache.get(&x.to_bits()) {
                Some(&old) if (old - v).abs() > 1e-12 * old => {
                    return Err(Error::config(format!("cached moment μ_{x} = {v} disagrees with {old}")));
                }
                Some(_) => {}
                None => {
                    cache.insert(x.to_bits(), v);
                    added += 1;
                }
            }
        }
        Ok(added)
    }

    /// Stable identifier for cache files.
    pub fn cache_key(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut feed = |bits: u64| {
            for b in bits.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        };
        let tag = match &self.inner.kind {
            WeightKind::Standard { eta } => {
                feed(eta.to_bits());
                "standard"
            }
            WeightKind::LogPower { alpha, beta } => {
                feed(alpha.to_bits());
                feed(beta.to_bits());
                "logpow"
            }
            WeightKind::Tabulated { samples } => {
                for (r, w) in samples {
                    feed(r.to_bits());
                    feed(w.to_bits());
                }
                "table"
            }
        };
        feed(self.inner.normalization.to_bits());
        format!("{tag}-{h:016x}")
    }
}

/// ω(D(z, r)) = ∫_{D(z,r)} ω dA.
pub fn weight_disc_mass(w: &RadialWeight, z: Complex64, r: f64, rule: &DiscRule) -> Result<f64> {
    let v = integrate_bergman_disc(|zeta| Complex64::new(w.density(zeta.norm()), 0.0), z, r, rule)?;
    Ok(v.re)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DhatReport {
    pub holds: bool,
    pub witness_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DcheckReport {
    pub holds: bool,
    pub witness_k: f64,
    pub witness_c: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RegularReport {
    pub holds: bool,
    pub ratio_min: f64,
    pub ratio_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct WeightClassReport {
    pub dhat: DhatReport,
    pub dcheck: DcheckReport,
    pub regular: RegularReport,
    pub grid_max_r: f64,
}

impl WeightClassReport {
    /// Membership in D = D̂ ∩ Ď.
    pub fn in_d(&self) -> bool {
        self.dhat.holds && self.dcheck.holds
    }
}

pub const MIN_GRID_POINTS: usize = 16;
pub const PLATEAU_FACTOR: f64 = 1.05;
const DCHECK_KS: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

/// r_k = 1 − 2^{−k/16}, k = 0..256.
pub fn default_grid() -> Vec<f64> {
    (0..256).map(|k| 1.0 - (-(k as f64) / 16.0).exp2()).collect()
}

/// A profile is bounded if its maximum over the last quartile stays within
/// 5% of its value at the third quartile.
pub fn plateau(values: &[f64]) -> bool {
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return false;
    }
    let q3 = 3 * values.len() / 4;
    let reference = values[q3];
    let tail_max = values[q3..].iter().copied().fold(f64::NEG_INFINITY, f64::max);
    tail_max <= PLATEAU_FACTOR * reference
}

fn max_of(values: &[f64]) -> f64 {
    values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

pub fn classify(w: &RadialWeight, grid: &[f64]) -> Result<WeightClassReport> {
    if grid.len() < MIN_GRID_POINTS {
        return Err(Error::config(format!(
            "classification grid has {} points, needs at least {MIN_GRID_POINTS}",
            grid.len()
        )));
    }
    if grid.windows(2).any(|p| !(p[1] > p[0])) || !(grid[0] >= 0.0) || !(grid[grid.len() - 1] < 1.0) {
        return Err(Error::config(
            "classification grid must increase strictly within [0, 1)",
        ));
    }
    let hat: Vec<f64> = grid.iter().map(|&r| w.omega_hat(r)).collect::<Result<_>>()?;

    let dhat_profile: Vec<f64> = grid
        .iter()
        .zip(&hat)
        .map(|(&r, &h)| Ok(h / w.omega_hat((1.0 + r) / 2.0)?))
        .collect::<Result<_>>()?;
    let dhat = DhatReport {
        holds: plateau(&dhat_profile),
        witness_c: max_of(&dhat_profile),
    };

    let mut dcheck = None;
    for &k in &DCHECK_KS {
        let profile: Vec<f64> = grid
            .iter()
            .zip(&hat)
            .map(|(&r, &h)| {
                let inner = w.omega_hat(1.0 - (1.0 - r) / k)?;
                Ok(h / (h - inner))
            })
            .collect::<Result<_>>()?;
        let report = DcheckReport {
            holds: plateau(&profile),
            witness_k: k,
            witness_c: max_of(&profile),
        };
        dcheck = Some(report);
        if report.holds {
            break;
        }
    }
    let dcheck = dcheck.expect("at least one K is tried");

    let ratio: Vec<f64> = grid
        .iter()
        .zip(&hat)
        .map(|(&r, &h)| h / (w.density(r) * (1.0 - r)))
        .collect();
    let reciprocal: Vec<f64> = ratio.iter().map(|v| 1.0 / v).collect();
    let regular = RegularReport {
        holds: plateau(&ratio) && plateau(&reciprocal),
        ratio_min: ratio.iter().copied().fold(f64::INFINITY, f64::min),
        ratio_max: max_of(&ratio),
    };

    Ok(WeightClassReport {
        dhat,
        dcheck,
        regular,
        grid_max_r: grid[grid.len() - 1],
    })
}

/// max of ω(t)/ω(r) and ω(r)/ω(t) over r in the grid and r ≤ t ≤ r + s(1−r).
pub fn local_smoothness(w: &RadialWeight, grid: &[f64], s: f64) -> f64 {
    const SUB: usize = 16;
    let mut worst: f64 = 1.0;
    for &r in grid {
        let base = w.density(r);
        for j in 1..=SUB {
            let t = r + s * (1.0 - r) * j as f64 / SUB as f64;
            if t >= 1.0 {
                break;
            }
            let v = w.density(t);
            worst = worst.max(v / base).max(base / v);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn eval_examples() {
        assert_eq!(RadialWeight::standard(0.0).unwrap().eval(0.3).unwrap(), 1.0);
        assert_relative_eq!(
            RadialWeight::standard(1.0).unwrap().eval(0.5).unwrap(),
            1.5,
            max_relative = 1e-15
        );
        let lp = RadialWeight::log_power(0.0, 1.0)
            .unwrap()
            .with_normalization(2.5)
            .unwrap();
        assert_relative_eq!(lp.eval(0.0).unwrap(), 2.5, max_relative = 1e-15);
        assert!(matches!(lp.eval(1.0), Err(Error::Domain(_))));
        assert!(matches!(lp.eval(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn constructor_domains() {
        assert!(RadialWeight::standard(-1.0).is_err());
        assert!(RadialWeight::log_power(-1.5, 0.0).is_err());
        assert!(RadialWeight::tabulated(alloc::vec![(0.0, 1.0), (0.9, 1.0)]).is_err());
        assert!(RadialWeight::tabulated(alloc::vec![(0.1, 1.0), (0.9995, 1.0)]).is_err());
        assert!(RadialWeight::tabulated(alloc::vec![(0.0, 1.0), (0.9995, 0.0)]).is_err());
        assert!(RadialWeight::tabulated(alloc::vec![(0.0, 1.0), (0.9995, 1.0)]).is_ok());
    }

    #[test]
    fn omega_hat_examples() {
        let w0 = RadialWeight::standard(0.0).unwrap();
        assert_relative_eq!(w0.omega_hat(0.3).unwrap(), 0.7, max_relative = 1e-15);
        let w1 = RadialWeight::standard(1.0).unwrap();
        assert_relative_eq!(w1.omega_hat(0.0).unwrap(), 4.0 / 3.0, max_relative = 1e-14);
        for &r in &[0.1, 0.5, 0.9, 0.999] {
            let exact = 2.0 / 3.0 * (1.0 - r) * (1.0 - r) * (r + 2.0);
            assert_relative_eq!(w1.omega_hat(r).unwrap(), exact, max_relative = 1e-12);
        }
    }

    #[test]
    fn generic_paths_match_closed_forms() {
        // non-integer η goes through the substitution integral
        let w = RadialWeight::standard(0.5).unwrap();
        let by_quad = integrate(|s| w.density(s), 0.3, 1.0, 1e-13, 0.0).unwrap().0;
        assert_relative_eq!(w.omega_hat(0.3).unwrap(), by_quad, max_relative = 1e-10);
        // log-power with β = 0 has a closed form
        let lp = RadialWeight::log_power(-0.5, 0.0).unwrap();
        assert_relative_eq!(lp.omega_hat(0.75).unwrap(), 2.0 * 0.5, max_relative = 1e-14);
        // β ≠ 0 against direct quadrature
        let lb = RadialWeight::log_power(0.5, 2.0).unwrap();
        let direct = integrate(|s| lb.density(s), 0.2, 1.0, 1e-13, 0.0).unwrap().0;
        assert_relative_eq!(lb.omega_hat(0.2).unwrap(), direct, max_relative = 1e-10);
        let m_direct = integrate(|s| s.powi(7) * lb.density(s), 0.0, 1.0, 1e-13, 0.0)
            .unwrap()
            .0;
        assert_relative_eq!(lb.moment(7.0).unwrap(), m_direct, max_relative = 1e-10);
    }

    #[test]
    fn moment_examples() {
        let w0 = RadialWeight::standard(0.0).unwrap();
        for n in 0..20 {
            let x = 2.0 * n as f64 + 1.0;
            assert_relative_eq!(
                w0.moment(x).unwrap(),
                1.0 / (2.0 * n as f64 + 2.0),
                max_relative = 1e-15
            );
        }
        let w1 = RadialWeight::standard(1.0).unwrap();
        assert_relative_eq!(w1.moment(3.0).unwrap(), 1.0 / 6.0, max_relative = 1e-15);
        for n in 0..50 {
            let nf = n as f64;
            assert_relative_eq!(
                w1.moment(2.0 * nf + 1.0).unwrap(),
                1.0 / ((nf + 1.0) * (nf + 2.0)),
                max_relative = 1e-14
            );
        }
        assert!(w1.moment(-1.0).is_err());
    }

    #[test]
    fn beta_form_agrees_with_products() {
        // η = 2 through the product and through Γ ratios
        let w = RadialWeight::standard(2.0).unwrap();
        for &x in &[0.0, 1.0, 2.5, 17.0, 301.0, 40_001.0] {
            let a: f64 = (x + 1.0) / 2.0;
            let beta = (ln_gamma(4.0) - core::f64::consts::LN_2 + ln_gamma_ratio(a, 3.0)).exp();
            assert_relative_eq!(w.moment(x).unwrap(), beta, max_relative = 1e-12);
        }
    }

    #[test]
    fn odd_moment_table_consistent() {
        let w = RadialWeight::log_power(-0.5, 0.0).unwrap();
        let t = w.odd_moments(40).unwrap();
        let u = w.odd_moments(10).unwrap();
        assert_eq!(&t[..10], &u[..]);
        for (n, v) in t.iter().enumerate() {
            assert_eq!(*v, w.moment(2.0 * n as f64 + 1.0).unwrap());
        }
    }

    #[test]
    fn cache_roundtrip() {
        let w = RadialWeight::standard(1.0).unwrap();
        w.moment(3.0).unwrap();
        w.moment(5.0).unwrap();
        let snap = w.moment_cache_snapshot();
        assert_eq!(snap.len(), 2);
        let fresh = RadialWeight::standard(1.0).unwrap();
        assert_eq!(fresh.preload_moments(snap.clone()).unwrap(), 2);
        assert_eq!(fresh.moment_cache_snapshot(), snap);
        assert!(fresh.preload_moments([(3.0, 0.5)]).is_err());
        assert_eq!(w.cache_key(), fresh.cache_key());
        assert_ne!(w.cache_key(), RadialWeight::standard(2.0).unwrap().cache_key());
    }

    #[test]
    fn table_reproduces_linear_weight() {
        // ω(r) = 1 + r is reproduced exactly by the monotone cubic
        let samples: Vec<(f64, f64)> = (0..=10).map(|i| i as f64 * 0.0999).map(|r| (r, 1.0 + r)).collect();
        let w = RadialWeight::tabulated(samples).unwrap();
        assert_relative_eq!(w.eval(0.37).unwrap(), 1.37, max_relative = 1e-14);
        let last = 0.999;
        let exact = |r: f64| (last - r) + (last * last - r * r) / 2.0 + (1.0 + last) * (1.0 - last);
        for &r in &[0.0, 0.05, 0.5, 0.9985] {
            assert_relative_eq!(w.omega_hat(r).unwrap(), exact(r), max_relative = 1e-13);
        }
        assert_relative_eq!(w.omega_hat(0.9995).unwrap(), 1.999 * 0.0005, max_relative = 1e-12);
        let m1 = (last * last / 2.0 + last.powi(3) / 3.0) + 1.999 * (1.0 - last * last) / 2.0;
        assert_relative_eq!(w.moment(1.0).unwrap(), m1, max_relative = 1e-12);
    }

    #[test]
    fn pchip_stays_monotone() {
        let samples = alloc::vec![(0.0, 0.0), (0.3, 0.0), (0.5, 2.0), (0.7, 2.1), (0.9995, 5.0)];
        let w = RadialWeight::tabulated(samples).unwrap();
        let mut prev = 0.0;
        for i in 0..=1000 {
            let r = 0.9995 * i as f64 / 1000.0;
            let v = w.density(r);
            assert!(v >= prev - 1e-15, "not monotone at {r}");
            prev = v;
        }
    }

    #[test]
    fn disc_mass_examples() {
        let w = RadialWeight::standard(0.0).unwrap();
        let rule = DiscRule::new(32, 64).unwrap();
        let r = 0.5f64.atanh();
        assert_relative_eq!(
            weight_disc_mass(&w, Complex64::new(0.0, 0.0), r, &rule).unwrap(),
            0.25,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            weight_disc_mass(&w, Complex64::new(0.5, 0.0), r, &rule).unwrap(),
            0.16,
            max_relative = 1e-12
        );
    }

    #[test]
    fn classify_standard_weights() {
        let grid = default_grid();
        let r0 = classify(&RadialWeight::standard(0.0).unwrap(), &grid).unwrap();
        assert_relative_eq!(r0.dhat.witness_c, 2.0, max_relative = 1e-10);
        assert!(r0.dhat.holds && r0.regular.holds && r0.dcheck.holds && r0.in_d());
        assert_relative_eq!(r0.regular.ratio_min, 1.0, max_relative = 1e-10);
        assert_relative_eq!(r0.regular.ratio_max, 1.0, max_relative = 1e-10);

        let r1 = classify(&RadialWeight::standard(1.0).unwrap(), &grid).unwrap();
        assert!(r1.regular.holds);
        assert!(r1.regular.ratio_min >= 0.5 - 1e-12 && r1.regular.ratio_max <= 2.0 / 3.0 + 1e-12);

        for &eta in &[0.5, 2.0] {
            assert!(
                classify(&RadialWeight::standard(eta).unwrap(), &grid)
                    .unwrap()
                    .regular
                    .holds
            );
        }
        let lp = classify(&RadialWeight::log_power(-0.5, 0.0).unwrap(), &grid).unwrap();
        assert!(lp.regular.holds);
    }

    #[test]
    fn classify_rejects_coarse_grid() {
        let lb = RadialWeight::log_power(0.0, -3.0).unwrap();
        let grid = default_grid();
        assert!(classify(&lb, &grid).unwrap().dhat.holds);
        assert!(matches!(classify(&lb, &grid[..10]), Err(Error::Config(_))));
        let unsorted: Vec<f64> = grid.iter().rev().copied().collect();
        assert!(matches!(classify(&lb, &unsorted), Err(Error::Config(_))));
    }

    #[test]
    fn local_smoothness_bounded_for_family() {
        let grid = default_grid();
        for w in [
            RadialWeight::standard(0.0).unwrap(),
            RadialWeight::standard(1.0).unwrap(),
            RadialWeight::log_power(-0.5, 0.0).unwrap(),
        ] {
            for &s in &[0.25, 0.5] {
                let c = local_smoothness(&w, &grid, s);
                assert!(c < 100.0, "{w}: {c}");
            }
        }
    }
}
