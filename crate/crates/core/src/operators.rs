//! Bergman projection, Hankel operators, their Gram matrices on the monomial
//! basis, Schatten norms and the lattice synthesis operator.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use crate::kernels::{sum_series, NormalizedKernel, SeriesPolicy};
use crate::oscillation::BerezinEngine;
use crate::symbols::{inner_product, norm_sq, SymbolPoly};
use crate::weights::RadialWeight;
use crate::{Error, Result};

pub const MAX_GRAM_SIZE: usize = 512;
/// Eigenvalues above −CLIP_FACTOR·‖G‖ are treated as roundoff and set to zero.
pub const CLIP_FACTOR: f64 = 1e-9;
/// Margin added to the critical slope −1/p when deciding divergence.
pub const SLOPE_MARGIN: f64 = 0.05;

/// P_ω(z^p z̄^q) = (μ_{2p+1}/μ_{2(p−q)+1}) z^{p−q} for p ≥ q, else 0.
pub fn project(f: &SymbolPoly, w: &RadialWeight) -> Result<SymbolPoly> {
    let mut out = SymbolPoly::zero();
    for ((p, q), c) in f.terms() {
        if p >= q {
            let ratio = w.moment(2.0 * p as f64 + 1.0)? / w.moment(2.0 * (p - q) as f64 + 1.0)?;
            out.add_term(p - q, 0, c * ratio);
        }
    }
    Ok(out)
}

/// H_f g = fg − P(fg) for analytic g.
pub fn hankel_apply(f: &SymbolPoly, g: &SymbolPoly, w: &RadialWeight) -> Result<SymbolPoly> {
    if !g.is_analytic() {
        return Err(Error::domain("Hankel operators act on analytic polynomials"));
    }
    let fg = f.mul(g)?;
    Ok(fg.sub(&project(&fg, w)?))
}

/// [M_f, P] g = f·P(g) − P(f g).
pub fn commutator_apply(f: &SymbolPoly, g: &SymbolPoly, w: &RadialWeight) -> Result<SymbolPoly> {
    let left = f.mul(&project(g, w)?)?;
    let right = project(&f.mul(g)?, w)?;
    Ok(left.sub(&right))
}

/// e_n = z^n / √(2μ_{2n+1}), n < size.
#[derive(Debug, Clone)]
pub struct OrthonormalBasis {
    weight: RadialWeight,
    scale: Vec<f64>,
}

impl OrthonormalBasis {
    pub fn new(weight: RadialWeight, size: usize) -> Result<Self> {
        let scale = weight
            .odd_moments(size)?
            .into_iter()
            .map(|m| 1.0 / (2.0 * m).sqrt())
            .collect();
        Ok(OrthonormalBasis { weight, scale })
    }

    pub fn len(&self) -> usize {
        self.scale.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scale.is_empty()
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    /// 1/‖z^n‖.
    pub fn scale(&self, n: usize) -> f64 {
        self.scale[n]
    }

    pub fn element(&self, n: usize) -> SymbolPoly {
        SymbolPoly::monomial(n as u32, 0, Complex64::new(self.scale[n], 0.0))
    }
}

/// Terms of f·e_i as (m, n, coefficient).
fn shifted_terms(f: &SymbolPoly, i: usize, scale: f64) -> Vec<(usize, usize, Complex64)> {
    f.terms()
        .map(|((p, q), c)| (p as usize + i, q as usize, c * scale))
        .collect()
}

/// G_ij = ⟨H_f e_i, H_f e_j⟩ on span{e_0, …, e_{N−1}}, exact in the moments.
#[derive(Debug, Clone)]
pub struct HankelGram {
    pub symbol: SymbolPoly,
    pub weight: RadialWeight,
    pub size: usize,
    pub matrix: DMatrix<Complex64>,
}

impl HankelGram {
    pub fn new(f: &SymbolPoly, w: &RadialWeight, size: usize) -> Result<Self> {
        if size == 0 || size > MAX_GRAM_SIZE {
            return Err(Error::config(format!(
                "Gram size must lie in 1..={MAX_GRAM_SIZE}, got {size}"
            )));
        }
        let basis = OrthonormalBasis::new(w.clone(), size)?;
        let top = size + (f.deg_z() + f.deg_zbar()) as usize + 1;
        let mu = w.odd_moments(top)?;
        let rows: Vec<Vec<(usize, usize, Complex64)>> =
            (0..size).map(|i| shifted_terms(f, i, basis.scale(i))).collect();
        // P(f e_i) as (power, coefficient)
        let proj: Vec<Vec<(usize, Complex64)>> = rows
            .iter()
            .map(|terms| {
                terms
                    .iter()
                    .filter(|(a, b, _)| a >= b)
                    .map(|&(a, b, c)| (a - b, c * (mu[a] / mu[a - b])))
                    .collect()
            })
            .collect();
        let mut g = DMatrix::<Complex64>::zeros(size, size);
        for i in 0..size {
            for j in i..size {
                let mut full = Complex64::new(0.0, 0.0);
                for &(a, b, c) in &rows[i] {
                    for &(a2, b2, c2) in &rows[j] {
                        // z^a z̄^b · z̄^{a2} z^{b2}
                        if a + b2 == b + a2 {
                            full += c * c2.conj() * (2.0 * mu[a + b2]);
                        }
                    }
                }
                let mut analytic = Complex64::new(0.0, 0.0);
                for &(m, c) in &proj[i] {
                    for &(m2, c2) in &proj[j] {
                        if m == m2 {
                            analytic += c * c2.conj() * (2.0 * mu[m]);
                        }
                    }
                }
                let v = full - analytic;
                g[(j, i)] = v;
                g[(i, j)] = v.conj();
            }
        }
        for i in 0..size {
            g[(i, i)].im = 0.0;
        }
        Ok(HankelGram {
            symbol: f.clone(),
            weight: w.clone(),
            size,
            matrix: g,
        })
    }

    /// Eigenvalues in descending order with roundoff negatives clipped to 0.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let scale = self.matrix.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if scale == 0.0 {
            return Ok(alloc::vec![0.0; self.size]);
        }
        let eig = SymmetricEigen::try_new(self.matrix.clone(), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::numerical("Hermitian eigensolver did not converge", f64::NAN))?;
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        let norm = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
        for v in values.iter_mut() {
            if *v < 0.0 {
                if *v < -CLIP_FACTOR * norm {
                    return Err(Error::numerical(
                        format!("Gram matrix has eigenvalue {v:e} below −{CLIP_FACTOR:e}·‖G‖"),
                        *v / norm,
                    ));
                }
                *v = 0.0;
            }
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(values)
    }

    pub fn singular_values(&self) -> Result<Vec<f64>> {
        Ok(self.eigenvalues()?.into_iter().map(f64::sqrt).collect())
    }

    /// Largest |G_ij − conj(G_ji)|.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.size;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

pub fn hankel_gram(f: &SymbolPoly, w: &RadialWeight, size: usize) -> Result<HankelGram> {
    HankelGram::new(f, w, size)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SchattenReport {
    pub p: f64,
    pub size: usize,
    pub singular_values: Vec<f64>,
    pub norm_p: f64,
    /// Least-squares slope of ln s_n against ln n, see [`tail_slope`].
    pub tail_slope: f64,
    pub divergent: bool,
}

impl SchattenReport {
    /// Σ s_j^p = norm_p^p.
    pub fn power_sum(&self) -> f64 {
        self.norm_p.powf(self.p)
    }
}

/// Least-squares slope of ln s_n against ln n over the middle third of the
/// index range (n counted from 1), skipping values below 1e−14·s_1. The top
/// third is left out because compressing a banded H*H to N basis vectors
/// bends its last eigenvalues down. −∞ when fewer than three values remain.
pub fn tail_slope(singular_values: &[f64]) -> f64 {
    let len = singular_values.len();
    let top = singular_values.first().copied().unwrap_or(0.0);
    let tail: Vec<(f64, f64)> = singular_values
        .iter()
        .enumerate()
        .take(2 * len / 3)
        .skip(len / 3)
        .filter(|(_, &s)| s > 1e-14 * top && s > 0.0)
        .map(|(j, &s)| ((j as f64 + 1.0).ln(), s.ln()))
        .collect();
    if tail.len() < 3 {
        return f64::NEG_INFINITY;
    }
    let n = tail.len() as f64;
    let mx = tail.iter().map(|t| t.0).sum::<f64>() / n;
    let my = tail.iter().map(|t| t.1).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|t| (t.0 - mx) * (t.1 - my)).sum();
    let sxx: f64 = tail.iter().map(|t| (t.0 - mx) * (t.0 - mx)).sum();
    sxy / sxx
}

/// A singular-value tail decaying like n^{slope} is p-summable only if
/// slope < −1/p; the margin keeps borderline n^{−1/p} tails on the divergent side.
pub fn slope_divergent(slope: f64, p: f64) -> bool {
    slope >= -1.0 / p - SLOPE_MARGIN
}

pub fn schatten_norm(gram: &HankelGram, p: f64) -> Result<SchattenReport> {
    let s = gram.singular_values()?;
    schatten_from_singular_values(s, p)
}

pub fn schatten_from_singular_values(singular_values: Vec<f64>, p: f64) -> Result<SchattenReport> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::domain(format!("Schatten exponent must be positive, got {p}")));
    }
    let sum: f64 = singular_values.iter().map(|s| s.powf(p)).sum();
    let slope = tail_slope(&singular_values);
    Ok(SchattenReport {
        p,
        size: singular_values.len(),
        norm_p: sum.powf(1.0 / p),
        tail_slope: slope,
        divergent: slope_divergent(slope, p),
        singular_values,
    })
}

/// Graded monomials z^a z̄^b ordered by a + b, then by a.
pub fn graded_monomials(count: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::with_capacity(count);
    let mut degree = 0;
    while out.len() < count {
        for a in (0..=degree).rev() {
            if out.len() == count {
                break;
            }
            out.push((a, degree - a));
        }
        degree += 1;
    }
    out
}

/// Largest entrywise gap between the matrices of [M_f, P] and H_f P − (H_{f̄} P)*
/// on normalized graded monomials.
pub fn commutator_identity_defect(f: &SymbolPoly, w: &RadialWeight, count: usize) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let basis: Vec<SymbolPoly> = graded_monomials(count)
        .into_iter()
        .map(|(a, b)| {
            let m = SymbolPoly::monomial(a, b, one);
            let n = norm_sq(&m, w)?;
            Ok(m.scale(Complex64::new(1.0 / n.sqrt(), 0.0)))
        })
        .collect::<Result<_>>()?;
    let fbar = f.conj();
    let mut comm = Vec::with_capacity(count);
    let mut hf = Vec::with_capacity(count);
    let mut hfbar = Vec::with_capacity(count);
    for g in &basis {
        comm.push(commutator_apply(f, g, w)?);
        let pg = project(g, w)?;
        hf.push(hankel_apply(f, &pg, w)?);
        hfbar.push(hankel_apply(&fbar, &pg, w)?);
    }
    let mut worst: f64 = 0.0;
    for i in 0..count {
        for j in 0..count {
            let lhs = inner_product(&comm[j], &basis[i], w)?;
            let rhs = inner_product(&hf[j], &basis[i], w)? - inner_product(&basis[j], &hfbar[i], w)?;
            worst = worst.max((lhs - rhs).norm());
        }
    }
    Ok(worst)
}

/// Largest of |⟨Pg_j, g_i⟩ − ⟨g_j, Pg_i⟩| and ‖P(Pg_j) − Pg_j‖ over normalized graded monomials.
pub fn projection_defect(w: &RadialWeight, count: usize) -> Result<f64> {
    let one = Complex64::new(1.0, 0.0);
    let basis: Vec<SymbolPoly> = graded_monomials(count)
        .into_iter()
        .map(|(a, b)| {
            let m = SymbolPoly::monomial(a, b, one);
            let n = norm_sq(&m, w)?;
            Ok(m.scale(Complex64::new(1.0 / n.sqrt(), 0.0)))
        })
        .collect::<Result<_>>()?;
    let projected: Vec<SymbolPoly> = basis.iter().map(|g| project(g, w)).collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for j in 0..count {
        let again = project(&projected[j], w)?;
        worst = worst.max(norm_sq(&again.sub(&projected[j]), w)?.sqrt());
        for i in 0..count {
            let a = inner_product(&projected[j], &basis[i], w)?;
            let b = inner_product(&basis[j], &projected[i], w)?;
            worst = worst.max((a - b).norm());
        }
    }
    Ok(worst)
}

/// |‖f e_n‖² − ‖P(f e_n)‖² − ‖H_f e_n‖²| relative to ‖f e_n‖².
pub fn pythagoras_defect(f: &SymbolPoly, w: &RadialWeight, n: usize) -> Result<f64> {
    let basis = OrthonormalBasis::new(w.clone(), n + 1)?;
    let e = basis.element(n);
    let fe = f.mul(&e)?;
    let total = norm_sq(&fe, w)?;
    let analytic = norm_sq(&project(&fe, w)?, w)?;
    let hankel = norm_sq(&hankel_apply(f, &e, w)?, w)?;
    Ok((total - analytic - hankel).abs() / total.max(f64::MIN_POSITIVE))
}

/// ‖H_f k^{η+2}_{ω,z}‖_{A²_ω} from ‖f k‖² = B(|f|²)(z) and the coefficients of P(f k).
pub fn hankel_kernel_norm(f: &SymbolPoly, engine: &BerezinEngine, z: Complex64) -> Result<f64> {
    // analytic terms are annihilated by H, dropping them avoids a cancellation
    let f = &SymbolPoly::from_terms(f.terms().filter(|&((_, n), _)| n > 0));
    if f.is_zero() {
        return Ok(0.0);
    }
    let kernel = engine.kernel();
    let w = kernel.weight();
    let total = engine.berezin(&f.abs_sq()?, z)?.re;
    let norm = kernel.norm(z)?;
    let zbar = z.conj();
    let rho = z.norm();
    // κ_i = d_i z̄^i / ‖K_z‖
    let kappa = |i: i64| -> Complex64 {
        if i < 0 {
            return Complex64::new(0.0, 0.0);
        }
        let i = i as usize;
        if i == 0 {
            return Complex64::new(1.0 / norm, 0.0);
        }
        if rho == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let mag = (kernel.ln_coeff(i) + i as f64 * rho.ln()).exp() / norm;
        Complex64::from_polar(mag, i as f64 * zbar.arg())
    };
    let terms: Vec<((u32, u32), Complex64)> = f.terms().collect();
    let extra = (f.deg_zbar() as usize) + 1;
    let mut mu = w.odd_moments(64 + extra)?;
    let projected = sum_series(
        |j| {
            if j + extra >= mu.len() {
                mu = w.odd_moments(2 * mu.len() + extra)?;
            }
            let mut a = Complex64::new(0.0, 0.0);
            for &((p, q), c) in &terms {
                let idx = j as i64 + q as i64 - p as i64;
                if idx >= 0 {
                    a += c * kappa(idx) * (mu[j + q as usize] / mu[j]);
                }
            }
            Ok(Complex64::new(a.norm_sqr() * 2.0 * mu[j], 0.0))
        },
        kernel.policy(),
        "projection of f·k",
    )?;
    let diff = total - projected.value.re;
    if diff < -1e-10 * total.max(1.0) {
        return Err(Error::numerical(
            format!("‖f k‖² − ‖P(f k)‖² = {diff:e} is negative"),
            diff,
        ));
    }
    Ok(diff.max(0.0).sqrt())
}

/// Matrix of A: e_j ↦ k^{η+2}_{ω,a_j} in the basis {e_n}, n < size.
#[derive(Debug, Clone)]
pub struct SynthesisMatrix {
    pub matrix: DMatrix<Complex64>,
    pub operator_norm: f64,
    /// Smallest captured fraction of a column's norm.
    pub min_capture: f64,
}

pub const SYNTHESIS_CAPTURE: f64 = 1.0 - 1e-6;

pub fn synthesis_matrix(w: &RadialWeight, eta: f64, points: &[Complex64], size: usize) -> Result<SynthesisMatrix> {
    if points.is_empty() || size == 0 {
        return Err(Error::config("synthesis matrix needs points and a positive basis size"));
    }
    let kernel = NormalizedKernel::new(w.clone(), eta, SeriesPolicy::default())?;
    let mu = w.odd_moments(size)?;
    let mut m = DMatrix::<Complex64>::zeros(size, points.len());
    let mut min_capture = f64::INFINITY;
    for (j, &a) in points.iter().enumerate() {
        let norm = kernel.norm(a)?;
        let rho = a.norm();
        let mut captured = 0.0;
        for n in 0..size {
            let entry = if n == 0 {
                Complex64::new((2.0 * mu[0]).sqrt() / norm, 0.0)
            } else if rho == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                let mag = (kernel.ln_coeff(n) + n as f64 * rho.ln() + 0.5 * (2.0 * mu[n]).ln()).exp() / norm;
                Complex64::from_polar(mag, -(n as f64) * a.arg())
            };
            captured += entry.norm_sqr();
            m[(n, j)] = entry;
        }
        min_capture = min_capture.min(captured);
    }
    if min_capture < SYNTHESIS_CAPTURE {
        return Err(Error::Convergence(format!(
            "basis of size {size} captures only {min_capture:.9} of a kernel column; increase the size"
        )));
    }
    let gram = if points.len() <= size {
        m.adjoint() * &m
    } else {
        &m * m.adjoint()
    };
    let eig = SymmetricEigen::try_new(gram, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::numerical("eigensolver did not converge on the synthesis Gram matrix", f64::NAN))?;
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    Ok(SynthesisMatrix {
        matrix: m,
        operator_norm: top.sqrt(),
        min_capture,
    })
}
