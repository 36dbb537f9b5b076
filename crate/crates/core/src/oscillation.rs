//! Berezin-type transform, global and local mean oscillation and their
//! L^p(dλ) summaries.
//!
//! Everything rotates: for a radial weight the value at ρe^{iθ} of any of
//! these transforms of f equals the value at ρ of f(e^{iθ}·). Ring
//! evaluators exploit this by doing the radial work once per |z|.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use crate::geometry::mobius;
use crate::kernels::{kernel_eval, sum_series, NormalizedKernel, SeriesPolicy};
use crate::quadrature::{
    integrate_invariant_rings, pairwise_sum, pairwise_sum_complex, DiscRule, InvariantIntegral, InvariantRule,
};
use crate::symbols::SymbolPoly;
use crate::weights::RadialWeight;
use crate::{Error, Result};

/// Variances down to −VARIANCE_CLIP (relative to the second moment) are roundoff.
pub const VARIANCE_CLIP: f64 = 1e-10;

fn clipped_sqrt(variance: f64, scale: f64, what: &str) -> Result<f64> {
    if variance < -VARIANCE_CLIP * scale.max(1.0) {
        return Err(Error::numerical(
            format!("{what}: negative variance {variance:e}"),
            variance,
        ));
    }
    Ok(variance.max(0.0).sqrt())
}

struct Tables {
    ln_d: Vec<f64>,
    ln_two_mu: Vec<f64>,
}

/// Series evaluation of B_{ω,η}(f)(z) = ⟨f k, k⟩_{L²_ω}, k = k^{η+2}_{ω,z}.
///
/// For f = z^p z̄^q and z = ρe^{iθ},
/// B(f)(z) = e^{i(p−q)θ} Σ_j d_j d_{j+|p−q|} ρ^{2j+|p−q|} 2μ_{2(max(p,q)+j)+1} / ‖K_z‖².
pub struct BerezinEngine {
    kernel: NormalizedKernel,
    tables: spin::Mutex<Arc<Tables>>,
}

impl core::fmt::Debug for BerezinEngine {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("BerezinEngine").field("kernel", &self.kernel).finish()
    }
}

/// B(f) on a circle |z| = ρ as Σ_k coeff_k e^{ikθ}.
#[derive(Debug, Clone, PartialEq)]
pub struct RingTransform {
    pub rho: f64,
    pub modes: Vec<(i64, Complex64)>,
}

impl RingTransform {
    pub fn at(&self, theta: f64) -> Complex64 {
        self.modes
            .iter()
            .map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
            .sum()
    }
}

impl BerezinEngine {
    pub fn new(weight: RadialWeight, eta: f64) -> Result<Self> {
        Self::with_policy(weight, eta, SeriesPolicy::default())
    }

    pub fn with_policy(weight: RadialWeight, eta: f64, policy: SeriesPolicy) -> Result<Self> {
        let kernel = NormalizedKernel::new(weight, eta, policy)?;
        Ok(BerezinEngine {
            kernel,
            tables: spin::Mutex::new(Arc::new(Tables {
                ln_d: Vec::new(),
                ln_two_mu: Vec::new(),
            })),
        })
    }

    pub fn kernel(&self) -> &NormalizedKernel {
        &self.kernel
    }

    pub fn weight(&self) -> &RadialWeight {
        self.kernel.weight()
    }

    pub fn eta(&self) -> f64 {
        self.kernel.eta()
    }

    fn tables(&self, len: usize) -> Result<Arc<Tables>> {
        let current = self.tables.lock().clone();
        if current.ln_d.len() >= len {
            return Ok(current);
        }
        let len = len.max(2 * current.ln_d.len()).max(256);
        let mut ln_d = current.ln_d.clone();
        ln_d.extend((ln_d.len()..len).map(|n| self.kernel.ln_coeff(n)));
        let ln_two_mu = self
            .weight()
            .odd_moments(len)?
            .into_iter()
            .map(|m| (2.0 * m).ln())
            .collect();
        let fresh = Arc::new(Tables { ln_d, ln_two_mu });
        let mut slot = self.tables.lock();
        if slot.ln_d.len() < len {
            *slot = fresh.clone();
        }
        Ok(fresh)
    }

    /// Σ_j d_j d_{j+k} ρ^{2j+k} 2μ_{2(m+j)+1}.
    pub fn radial_sum(&self, k: u32, m: u32, rho: f64) -> Result<f64> {
        if !(0.0..1.0).contains(&rho) {
            return Err(Error::domain(format!("Berezin transform needs |z| < 1, got {rho}")));
        }
        let (k, m) = (k as usize, m as usize);
        if rho == 0.0 {
            return Ok(if k == 0 {
                self.tables(m + 1)?.ln_two_mu[m].exp()
            } else {
                0.0
            });
        }
        let ln_rho = rho.ln();
        let mut tab = self.tables(k.max(m) + 64)?;
        let s = sum_series(
            |j| {
                let need = (j + k).max(j + m) + 1;
                if need > tab.ln_d.len() {
                    tab = self.tables(need)?;
                }
                let e = tab.ln_d[j] + tab.ln_d[j + k] + (2 * j + k) as f64 * ln_rho + tab.ln_two_mu[m + j];
                Ok(Complex64::new(e.exp(), 0.0))
            },
            self.kernel.policy(),
            "Berezin radial series",
        )?;
        Ok(s.value.re)
    }

    /// ‖K^{η+2}_z‖² at |z| = ρ.
    pub fn norm_sq(&self, rho: f64) -> Result<f64> {
        self.radial_sum(0, 0, rho)
    }

    pub fn ring(&self, f: &SymbolPoly, rho: f64) -> Result<RingTransform> {
        let norm = self.norm_sq(rho)?;
        let mut radial: BTreeMap<(u32, u32), f64> = BTreeMap::new();
        let mut modes: BTreeMap<i64, Complex64> = BTreeMap::new();
        for ((p, q), c) in f.terms() {
            let key = (p.abs_diff(q), p.max(q));
            let r = match radial.get(&key) {
                Some(&r) => r,
                None => {
                    let r = self.radial_sum(key.0, key.1, rho)? / norm;
                    radial.insert(key, r);
                    r
                }
            };
            *modes.entry(p as i64 - q as i64).or_insert(Complex64::new(0.0, 0.0)) += c * r;
        }
        Ok(RingTransform {
            rho,
            modes: modes.into_iter().collect(),
        })
    }

    pub fn berezin(&self, f: &SymbolPoly, z: Complex64) -> Result<Complex64> {
        Ok(self.ring(f, z.norm())?.at(z.arg()))
    }

    /// (B(|f|²)(z) − |B(f)(z)|²)^{1/2}.
    pub fn mo_global(&self, f: &SymbolPoly, z: Complex64) -> Result<f64> {
        GlobalRing::new(self, f, z.norm())?.at(z.arg())
    }
}

/// Density of k_z·k̄_z·ω dA after ζ = φ_z(u), as a function of u.
fn pulled_back_density(engine: &BerezinEngine, z: Complex64, norm_sq: f64) -> impl Fn(Complex64) -> f64 + '_ {
    let gamma = engine.kernel().power();
    let lift = 1.0 - z.norm_sqr();
    let one = Complex64::new(1.0, 0.0);
    let w = engine.weight();
    move |u: Complex64| {
        let den = (one - z.conj() * u).norm();
        let zeta = mobius(z, u);
        // |k(φ_z(u))|² |φ_z'(u)|² = (|1 − z̄u|/(1−|z|²))^{2γ} ((1−|z|²)/|1 − z̄u|²)² / ‖K‖²
        let factor = (den / lift).powf(2.0 * gamma) * (lift / (den * den)).powi(2) / norm_sq;
        factor * w.density(zeta.norm().min(1.0 - 1e-16))
    }
}

/// ⟨f k, k⟩ by Möbius-substituted quadrature (graded rules suit singular weights).
pub fn berezin_quadrature(engine: &BerezinEngine, f: &SymbolPoly, z: Complex64, rule: &DiscRule) -> Result<Complex64> {
    let norm = engine.norm_sq(z.norm())?;
    let density = pulled_back_density(engine, z, norm);
    let terms: Vec<Complex64> = rule
        .nodes()
        .map(|(u, wt)| f.eval(mobius(z, u)) * (wt * density(u)))
        .collect();
    Ok(pairwise_sum_complex(&terms))
}

/// ‖f k − B(f)(z) k‖_{L²_ω}, the transform taken from the series.
pub fn mo_global_deviation(engine: &BerezinEngine, f: &SymbolPoly, z: Complex64, rule: &DiscRule) -> Result<f64> {
    let centre = engine.berezin(f, z)?;
    let norm = engine.norm_sq(z.norm())?;
    let density = pulled_back_density(engine, z, norm);
    let terms: Vec<f64> = rule
        .nodes()
        .map(|(u, wt)| (f.eval(mobius(z, u)) - centre).norm_sqr() * wt * density(u))
        .collect();
    Ok(pairwise_sum(&terms).sqrt())
}

/// The double-integral form of the global oscillation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PairwiseOscillation {
    /// (½ ∫∫ |f(u) − f(ζ)|² |k(u)|² |k(ζ)|² ω(u) ω(ζ))^{1/2}; equals MO_{ω,η}.
    pub mo: f64,
    /// The same double integral without the ½; equals √2·MO_{ω,η}.
    pub unhalved: f64,
}

pub fn mo_global_pairwise(
    engine: &BerezinEngine,
    f: &SymbolPoly,
    z: Complex64,
    rule: &DiscRule,
) -> Result<PairwiseOscillation> {
    let norm = engine.norm_sq(z.norm())?;
    let density = pulled_back_density(engine, z, norm);
    let (values, weights): (Vec<Complex64>, Vec<f64>) = rule
        .nodes()
        .map(|(u, wt)| (f.eval(mobius(z, u)), wt * density(u)))
        .unzip();
    let total = double_sum(&values, &weights);
    Ok(PairwiseOscillation {
        mo: (0.5 * total).max(0.0).sqrt(),
        unhalved: total.max(0.0).sqrt(),
    })
}

/// Σ_i Σ_j w_i w_j |v_i − v_j|².
fn double_sum(values: &[Complex64], weights: &[f64]) -> f64 {
    let mut rows = Vec::with_capacity(values.len());
    let mut inner = Vec::with_capacity(values.len());
    for (i, &vi) in values.iter().enumerate() {
        inner.clear();
        inner.extend(values.iter().zip(weights).map(|(&vj, &wj)| wj * (vi - vj).norm_sqr()));
        rows.push(weights[i] * pairwise_sum(&inner));
    }
    pairwise_sum(&rows)
}

/// MO_{ω,η}(f) on |z| = ρ.
#[derive(Debug, Clone)]
pub struct GlobalRing {
    second: RingTransform,
    first: RingTransform,
}

impl GlobalRing {
    pub fn new(engine: &BerezinEngine, f: &SymbolPoly, rho: f64) -> Result<Self> {
        let f = &centered(f);
        Ok(GlobalRing {
            second: engine.ring(&f.abs_sq()?, rho)?,
            first: engine.ring(f, rho)?,
        })
    }

    pub fn at(&self, theta: f64) -> Result<f64> {
        let second = self.second.at(theta).re;
        let variance = second - self.first.at(theta).norm_sqr();
        clipped_sqrt(variance, second, "global mean oscillation")
    }
}

/// Oscillation ignores additive constants; dropping them makes constant symbols exactly zero.
fn centered(f: &SymbolPoly) -> SymbolPoly {
    SymbolPoly::from_terms(f.terms().filter(|t| t.0 != (0, 0)))
}

/// Bergman-disc nodes at z with weights w_i·ω(ζ_i).
fn weighted_disc_nodes(w: &RadialWeight, z: Complex64, r: f64, rule: &DiscRule) -> Result<Vec<(Complex64, f64)>> {
    if z.norm() >= 1.0 || !(r > 0.0) {
        return Err(Error::domain("Bergman disc needs |z| < 1 and r > 0"));
    }
    Ok(rule
        .bergman_disc_nodes(z, r)
        .into_iter()
        .map(|(zeta, wt)| (zeta, wt * w.density(zeta.norm())))
        .collect())
}

/// f̂_{ω,r}(z) = ω(D(z,r))^{−1} ∫_{D(z,r)} f ω dA.
pub fn avg(f: &SymbolPoly, w: &RadialWeight, r: f64, z: Complex64, rule: &DiscRule) -> Result<Complex64> {
    let nodes = weighted_disc_nodes(w, z, r, rule)?;
    let mass = pairwise_sum(&nodes.iter().map(|n| n.1).collect::<Vec<_>>());
    let terms: Vec<Complex64> = nodes.iter().map(|&(zeta, v)| f.eval(zeta) * v).collect();
    Ok(pairwise_sum_complex(&terms) / mass)
}

/// MO_{ω,r}(f)(z) = (ω(D)^{−1} ∫_D |f − f̂_{ω,r}(z)|² ω dA)^{1/2}.
pub fn mo_local(f: &SymbolPoly, w: &RadialWeight, r: f64, z: Complex64, rule: &DiscRule) -> Result<f64> {
    let f = &centered(f);
    let nodes = weighted_disc_nodes(w, z, r, rule)?;
    let mass = pairwise_sum(&nodes.iter().map(|n| n.1).collect::<Vec<_>>());
    let values: Vec<Complex64> = nodes.iter().map(|n| f.eval(n.0)).collect();
    let mean = pairwise_sum_complex(&values.iter().zip(&nodes).map(|(&v, n)| v * n.1).collect::<Vec<_>>()) / mass;
    let spread: Vec<f64> = values
        .iter()
        .zip(&nodes)
        .map(|(&v, n)| (v - mean).norm_sqr() * n.1)
        .collect();
    Ok((pairwise_sum(&spread) / mass).sqrt())
}

/// (1/(2ω(D)²) ∫_D ∫_D |f(u) − f(ζ)|² ω(u) ω(ζ))^{1/2}.
pub fn mo_local_pairwise(f: &SymbolPoly, w: &RadialWeight, r: f64, z: Complex64, rule: &DiscRule) -> Result<f64> {
    let nodes = weighted_disc_nodes(w, z, r, rule)?;
    let (values, weights): (Vec<Complex64>, Vec<f64>) = nodes.iter().map(|&(zeta, v)| (f.eval(zeta), v)).unzip();
    let mass = pairwise_sum(&weights);
    Ok((0.5 * double_sum(&values, &weights) / (mass * mass)).max(0.0).sqrt())
}

/// MO_{ω,r}(f) on |z| = ρ from the weighted covariance of the monomials of f over D(ρ, r).
#[derive(Debug, Clone)]
pub struct LocalRing {
    modes: Vec<(i64, Complex64)>,
    covariance: Vec<Vec<Complex64>>,
    scale: f64,
}

impl LocalRing {
    pub fn new(f: &SymbolPoly, w: &RadialWeight, r: f64, rho: f64, rule: &DiscRule) -> Result<Self> {
        let f = &centered(f);
        let nodes = weighted_disc_nodes(w, Complex64::new(rho, 0.0), r, rule)?;
        let mass = pairwise_sum(&nodes.iter().map(|n| n.1).collect::<Vec<_>>());
        let terms: Vec<((u32, u32), Complex64)> = f.terms().collect();
        let t = terms.len();
        let values: Vec<Vec<Complex64>> = terms
            .iter()
            .map(|&((m, n), _)| {
                nodes
                    .iter()
                    .map(|&(zeta, _)| zeta.powu(m) * zeta.conj().powu(n))
                    .collect()
            })
            .collect();
        let means: Vec<Complex64> = values
            .iter()
            .map(|vals| {
                let weighted: Vec<Complex64> = vals.iter().zip(&nodes).map(|(&v, n)| v * n.1).collect();
                pairwise_sum_complex(&weighted) / mass
            })
            .collect();
        let mut covariance = alloc::vec![alloc::vec![Complex64::new(0.0, 0.0); t]; t];
        let mut scratch = Vec::with_capacity(nodes.len());
        for a in 0..t {
            for b in a..t {
                scratch.clear();
                scratch.extend(
                    nodes
                        .iter()
                        .enumerate()
                        .map(|(i, n)| (values[a][i] - means[a]) * (values[b][i] - means[b]).conj() * n.1),
                );
                let v = pairwise_sum_complex(&scratch) / mass;
                covariance[a][b] = v;
                covariance[b][a] = v.conj();
            }
        }
        let scale = terms.iter().map(|t| t.1.norm()).sum::<f64>().powi(2);
        Ok(LocalRing {
            modes: terms.iter().map(|&((m, n), c)| (m as i64 - n as i64, c)).collect(),
            covariance,
            scale,
        })
    }

    pub fn at(&self, theta: f64) -> Result<f64> {
        let c: Vec<Complex64> = self
            .modes
            .iter()
            .map(|&(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
            .collect();
        let mut variance = Complex64::new(0.0, 0.0);
        for (a, ca) in c.iter().enumerate() {
            for (b, cb) in c.iter().enumerate() {
                variance += ca * cb.conj() * self.covariance[a][b];
            }
        }
        clipped_sqrt(variance.re, self.scale, "local mean oscillation")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "variant", rename_all = "snake_case"))]
pub enum MoVariant {
    Global { eta: f64 },
    Local { r: f64 },
}

enum Backend {
    Global(BerezinEngine),
    Local { r: f64, rule: DiscRule },
}

/// Either oscillation, evaluated ring by ring.
pub struct MoEvaluator {
    weight: RadialWeight,
    backend: Backend,
}

pub enum MoRing {
    Global(GlobalRing),
    Local(LocalRing),
}

impl MoRing {
    pub fn at(&self, theta: f64) -> Result<f64> {
        match self {
            MoRing::Global(g) => g.at(theta),
            MoRing::Local(l) => l.at(theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeSum {
    /// Σ_j MO(a_j)^p over |a_j| ≤ R_max.
    pub power_sum: f64,
    /// (Σ_j MO(a_j)^p)^{1/p}.
    pub norm: f64,
    pub points: usize,
    pub r_max: f64,
}

impl MoEvaluator {
    pub fn global(weight: RadialWeight, eta: f64) -> Result<Self> {
        let engine = BerezinEngine::new(weight.clone(), eta)?;
        Ok(MoEvaluator {
            weight,
            backend: Backend::Global(engine),
        })
    }

    pub fn local(weight: RadialWeight, r: f64, rule: DiscRule) -> Result<Self> {
        if !(r > 0.0) {
            return Err(Error::domain(format!(
                "local oscillation radius must be positive, got {r}"
            )));
        }
        Ok(MoEvaluator {
            weight,
            backend: Backend::Local { r, rule },
        })
    }

    pub fn variant(&self) -> MoVariant {
        match &self.backend {
            Backend::Global(e) => MoVariant::Global { eta: e.eta() },
            Backend::Local { r, .. } => MoVariant::Local { r: *r },
        }
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    pub fn ring(&self, f: &SymbolPoly, rho: f64) -> Result<MoRing> {
        match &self.backend {
            Backend::Global(e) => Ok(MoRing::Global(GlobalRing::new(e, f, rho)?)),
            Backend::Local { r, rule } => Ok(MoRing::Local(LocalRing::new(f, &self.weight, *r, rho, rule)?)),
        }
    }

    pub fn at(&self, f: &SymbolPoly, z: Complex64) -> Result<f64> {
        self.ring(f, z.norm())?.at(z.arg())
    }

    /// Values at arbitrary points, grouping points that share a radius.
    pub fn values(&self, f: &SymbolPoly, points: &[Complex64]) -> Result<Vec<f64>> {
        let mut groups: BTreeMap<u64, Vec<usize>> = BTreeMap::new();
        for (i, z) in points.iter().enumerate() {
            groups.entry(radius_key(z.norm())).or_default().push(i);
        }
        let mut out = alloc::vec![0.0; points.len()];
        for idx in groups.values() {
            let ring = self.ring(f, points[idx[0]].norm())?;
            for &i in idx {
                out[i] = ring.at(points[i].arg())?;
            }
        }
        Ok(out)
    }

    pub fn lattice_sum(&self, f: &SymbolPoly, p: f64, points: &[Complex64], r_max: f64) -> Result<LatticeSum> {
        Ok(self.lattice_sums(f, &[p], points, r_max)?.remove(0))
    }

    /// One lattice sum per exponent, sharing the oscillation values.
    pub fn lattice_sums(
        &self,
        f: &SymbolPoly,
        ps: &[f64],
        points: &[Complex64],
        r_max: f64,
    ) -> Result<Vec<LatticeSum>> {
        ps.iter().try_for_each(|&p| check_p(p))?;
        let inside: Vec<Complex64> = points.iter().copied().filter(|a| a.norm() <= r_max).collect();
        let values = self.values(f, &inside)?;
        Ok(ps
            .iter()
            .map(|&p| {
                let power_sum = pairwise_sum(&values.iter().map(|v| v.powf(p)).collect::<Vec<_>>());
                LatticeSum {
                    power_sum,
                    norm: power_sum.powf(1.0 / p),
                    points: inside.len(),
                    r_max,
                }
            })
            .collect())
    }

    /// ∫_{|z|<R} MO(f)(z)^p dλ(z) with the shell tail diagnostics.
    pub fn integral(&self, f: &SymbolPoly, p: f64, r_max: f64, rule: &InvariantRule) -> Result<InvariantIntegral> {
        Ok(self.integrals(f, &[p], r_max, rule)?.remove(0))
    }

    /// One dλ integral per exponent, sharing the oscillation values on each ring.
    pub fn integrals(
        &self,
        f: &SymbolPoly,
        ps: &[f64],
        r_max: f64,
        rule: &InvariantRule,
    ) -> Result<Vec<InvariantIntegral>> {
        ps.iter().try_for_each(|&p| check_p(p))?;
        let angles = rule.angles();
        let mut rings: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for node in rule.radial_nodes(r_max)? {
            let ring = self.ring(f, node.s)?;
            let vals = angles.iter().map(|&t| ring.at(t)).collect::<Result<_>>()?;
            rings.insert(node.s.to_bits(), vals);
        }
        ps.iter()
            .map(|&p| {
                integrate_invariant_rings(
                    |s| {
                        let vals = rings
                            .get(&s.to_bits())
                            .ok_or_else(|| Error::numerical("ring outside the precomputed rule", s))?;
                        let powered: Vec<f64> = vals.iter().map(|v| v.powf(p)).collect();
                        Ok(Complex64::new(pairwise_sum(&powered) / angles.len() as f64, 0.0))
                    },
                    r_max,
                    rule,
                )
            })
            .collect()
    }

    /// Sampled values plus p-norm summaries.
    pub fn profile(
        &self,
        f: &SymbolPoly,
        points: &[Complex64],
        ps: &[f64],
        r_max: f64,
        rule: &InvariantRule,
    ) -> Result<MoProfile> {
        let values = self.values(f, points)?;
        let lattice = self.lattice_sums(f, ps, points, r_max)?;
        let integrals = self.integrals(f, ps, r_max, rule)?;
        let p_norms = ps
            .iter()
            .zip(lattice.iter().zip(&integrals))
            .map(|(&p, (l, i))| PNormSummary {
                p,
                lattice_sum: l.power_sum,
                integral: i.value.re,
                tail_flag: i.divergent,
            })
            .collect();
        Ok(MoProfile {
            variant: self.variant(),
            sample_points: points.to_vec(),
            values,
            p_norms,
        })
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("exponent p must be positive, got {p}")));
    }
    Ok(())
}

fn radius_key(rho: f64) -> u64 {
    (rho * 1e12).round() as u64
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PNormSummary {
    pub p: f64,
    pub lattice_sum: f64,
    pub integral: f64,
    pub tail_flag: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MoProfile {
    pub variant: MoVariant,
    pub sample_points: Vec<Complex64>,
    pub values: Vec<f64>,
    pub p_norms: Vec<PNormSummary>,
}

/// Limit of I(R) from two truncations when I(∞) − I(R) ∝ (1−R)^γ.
pub fn extrapolate(i1: f64, r1: f64, i2: f64, r2: f64, gamma: f64) -> f64 {
    let h1 = (1.0 - r1).powf(gamma);
    let h2 = (1.0 - r2).powf(gamma);
    i2 + (i2 - i1) * h2 / (h1 - h2)
}

/// |f̂_{ω,r}(z) − f̂_{ω,r}(ζ)| / MO_{ω,2r}(f)(z); `None` when both vanish.
pub fn averaging_ratio(
    f: &SymbolPoly,
    w: &RadialWeight,
    r: f64,
    z: Complex64,
    zeta: Complex64,
    rule: &DiscRule,
) -> Result<Option<f64>> {
    let gap = (avg(f, w, r, z, rule)? - avg(f, w, r, zeta, rule)?).norm();
    let mo = mo_local(f, w, 2.0 * r, z, rule)?;
    if mo <= 1e-300 {
        return Ok(if gap <= 1e-14 { None } else { Some(f64::INFINITY) });
    }
    Ok(Some(gap / mo))
}

/// ω(D)^{−1} ∫_D |∫_D (f(u) − f(ζ)) B^ω_u(ζ) ω(ζ) dA(ζ)|² ω(u) dA(u), D = D(z, r).
///
/// With a_n = ∫_D ζ^n ω and b_n = ∫_D f ζ^n ω the inner integral is
/// Σ_n ū^n (f(u) a_n − b_n) / (2μ_{2n+1}).
pub fn reverse_estimate_rhs(f: &SymbolPoly, w: &RadialWeight, r: f64, z: Complex64, rule: &DiscRule) -> Result<f64> {
    let nodes = weighted_disc_nodes(w, z, r, rule)?;
    let mass = pairwise_sum(&nodes.iter().map(|n| n.1).collect::<Vec<_>>());
    let fvals: Vec<Complex64> = nodes.iter().map(|n| f.eval(n.0)).collect();
    let reach = nodes.iter().map(|n| n.0.norm()).fold(0.0, f64::max);
    let x = reach * reach;
    let policy = SeriesPolicy::default();
    let envelope = kernel_eval(w, Complex64::new(x, 0.0), Complex64::new(1.0, 0.0), &policy)?
        .value
        .re;

    let count = nodes.len();
    let mut inner = alloc::vec![Complex64::new(0.0, 0.0); count];
    let mut zeta_pow: Vec<Complex64> = alloc::vec![Complex64::new(1.0, 0.0); count];
    let mut ubar_pow: Vec<Complex64> = alloc::vec![Complex64::new(1.0, 0.0); count];
    let mut partial = 0.0;
    let mut xn = 1.0;
    let mut n = 0;
    loop {
        let mu = w.moment(2.0 * n as f64 + 1.0)?;
        let c = 1.0 / (2.0 * mu);
        let a: Complex64 =
            pairwise_sum_complex(&zeta_pow.iter().zip(&nodes).map(|(&p, nd)| p * nd.1).collect::<Vec<_>>());
        let b: Complex64 = pairwise_sum_complex(
            &zeta_pow
                .iter()
                .zip(&nodes)
                .zip(&fvals)
                .map(|((&p, nd), &fv)| p * fv * nd.1)
                .collect::<Vec<_>>(),
        );
        for k in 0..count {
            inner[k] += ubar_pow[k] * (fvals[k] * a - b) * c;
        }
        partial += c * xn;
        if envelope - partial <= 1e-14 * envelope {
            break;
        }
        n += 1;
        if n >= policy.max_terms {
            return Err(Error::Convergence(format!(
                "reverse-estimate kernel expansion not converged after {} terms",
                policy.max_terms
            )));
        }
        xn *= x;
        for k in 0..count {
            zeta_pow[k] *= nodes[k].0;
            ubar_pow[k] *= nodes[k].0.conj();
        }
    }
    let outer: Vec<f64> = inner.iter().zip(&nodes).map(|(v, nd)| v.norm_sqr() * nd.1).collect();
    Ok(pairwise_sum(&outer) / mass)
}

/// Sample points z_k = ρ_k e^{iθ_k} on a polar grid with |z| ≤ r_max.
pub fn polar_grid(radial: usize, angular: usize, r_max: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(radial * angular);
    for i in 0..radial {
        let rho = r_max * (i as f64 + 0.5) / radial as f64;
        for j in 0..angular {
            let theta = 2.0 * PI * (j as f64 + 0.25 * i as f64) / angular as f64;
            out.push(Complex64::from_polar(rho, theta));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn engine(eta_w: f64, eta: f64) -> BerezinEngine {
        BerezinEngine::new(RadialWeight::standard(eta_w).unwrap(), eta).unwrap()
    }

    #[test]
    fn berezin_examples() {
        let e = engine(0.0, 4.0);
        let konst = SymbolPoly::constant(c(2.5, -1.0));
        for &z in &[c(0.0, 0.0), c(0.3, 0.4), c(-0.9, 0.1)] {
            let v = e.berezin(&konst, z).unwrap();
            assert!((v - c(2.5, -1.0)).norm() < 1e-12, "{v}");
        }
        assert_eq!(e.berezin(&SymbolPoly::zbar(), c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
        let absz2: SymbolPoly = "absz2".parse().unwrap();
        assert_relative_eq!(e.berezin(&absz2, c(0.0, 0.0)).unwrap().re, 0.5, max_relative = 1e-14);
    }

    #[test]
    fn berezin_series_matches_quadrature() {
        let e = engine(1.0, 4.0);
        let f: SymbolPoly = "zbar+zbar2".parse().unwrap();
        let rule = DiscRule::graded(64, 128).unwrap();
        for &z in &[c(0.2, 0.1), c(-0.5, 0.4)] {
            let s = e.berezin(&f, z).unwrap();
            let q = berezin_quadrature(&e, &f, z, &rule).unwrap();
            assert!((s - q).norm() < 1e-10, "{s} vs {q}");
        }
    }

    #[test]
    fn mo_global_examples() {
        let e = engine(0.0, 4.0);
        assert_eq!(
            e.mo_global(&SymbolPoly::constant(c(1.0, 0.0)), c(0.4, 0.2)).unwrap(),
            0.0
        );
        assert_relative_eq!(
            e.mo_global(&SymbolPoly::zbar(), c(0.0, 0.0)).unwrap(),
            0.5f64.sqrt(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn avg_and_local_examples() {
        let w = RadialWeight::standard(0.0).unwrap();
        let rule = DiscRule::new(32, 64).unwrap();
        let r = 0.5f64.atanh();
        let k = SymbolPoly::constant(c(0.0, 3.0));
        assert!((avg(&k, &w, r, c(0.3, 0.3), &rule).unwrap() - c(0.0, 3.0)).norm() < 1e-13);
        assert!(avg(&SymbolPoly::zbar(), &w, r, c(0.0, 0.0), &rule).unwrap().norm() < 1e-15);
        assert!((avg(&SymbolPoly::zbar(), &w, r, c(0.5, 0.0), &rule).unwrap() - c(0.4, 0.0)).norm() < 1e-13);
        assert!(mo_local(&k, &w, r, c(0.2, 0.0), &rule).unwrap() < 1e-14);
        assert_relative_eq!(
            mo_local(&SymbolPoly::zbar(), &w, r, c(0.0, 0.0), &rule).unwrap(),
            0.5 / 2f64.sqrt(),
            max_relative = 1e-12
        );
        let z = c(0.3, -0.6);
        let radius = crate::geometry::disc_params(z, r).unwrap().euclid_radius;
        assert_relative_eq!(
            mo_local(&SymbolPoly::zbar(), &w, r, z, &rule).unwrap(),
            radius / 2f64.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn local_ring_matches_direct() {
        let w = RadialWeight::standard(1.0).unwrap();
        let rule = DiscRule::new(32, 64).unwrap();
        let f: SymbolPoly = "zbar+zbar2+absz2".parse().unwrap();
        let ring = LocalRing::new(&f, &w, 0.7, 0.6, &rule).unwrap();
        for &t in &[0.0, 1.0, 2.5] {
            let direct = mo_local(&f, &w, 0.7, Complex64::from_polar(0.6, t), &rule).unwrap();
            assert_relative_eq!(ring.at(t).unwrap(), direct, max_relative = 1e-10);
        }
    }

    #[test]
    fn pairwise_forms() {
        let e = engine(0.0, 4.0);
        let f: SymbolPoly = "zbar2".parse().unwrap();
        let z = c(0.3, 0.2);
        let rule = DiscRule::graded(24, 48).unwrap();
        let pw = mo_global_pairwise(&e, &f, z, &rule).unwrap();
        let mo = e.mo_global(&f, z).unwrap();
        assert_relative_eq!(pw.mo, mo, max_relative = 1e-8);
        assert_relative_eq!(pw.unhalved, 2f64.sqrt() * mo, max_relative = 1e-8);
        let w = RadialWeight::standard(0.0).unwrap();
        let small = DiscRule::new(16, 32).unwrap();
        let a = mo_local(&f, &w, 0.6, z, &small).unwrap();
        let b = mo_local_pairwise(&f, &w, 0.6, z, &small).unwrap();
        assert_relative_eq!(a, b, max_relative = 1e-10);
    }

    #[test]
    fn extrapolation_recovers_linear_tail() {
        let limit = 1.0 / 6.0;
        let value = |r: f64| limit - 0.3 * (1.0 - r);
        let x = extrapolate(value(0.98), 0.98, value(0.995), 0.995, 1.0);
        assert_relative_eq!(x, limit, max_relative = 1e-12);
    }

    #[test]
    fn reverse_estimate_vanishes_for_constants() {
        let w = RadialWeight::standard(0.0).unwrap();
        let rule = DiscRule::new(12, 24).unwrap();
        let v = reverse_estimate_rhs(&SymbolPoly::constant(c(1.0, 0.0)), &w, 0.5, c(0.3, 0.1), &rule).unwrap();
        assert!(v.abs() < 1e-20);
        let z = reverse_estimate_rhs(&SymbolPoly::zbar(), &w, 0.5, c(0.3, 0.1), &rule).unwrap();
        assert!(z > 0.0);
    }
}
