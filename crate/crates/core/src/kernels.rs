//! Reproducing kernels of A²_ω as moment series, standard kernels
//! (1 − z̄ζ)^{−η} and their normalized versions.

use alloc::format;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use crate::geometry::mobius;
use crate::quadrature::{integrate_disc, DiscRule};
use crate::special::{ln_gamma, ln_gamma_ratio};
use crate::weights::{weight_disc_mass, RadialWeight};
use crate::{Error, Result, DEFAULT_SERIES_TOL};

/// Largest |z̄ζ| accepted by [`kernel_eval`].
pub const MAX_KERNEL_ARG: f64 = 0.9999;
pub const DEFAULT_MAX_TERMS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesPolicy {
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for SeriesPolicy {
    fn default() -> Self {
        SeriesPolicy {
            tol: DEFAULT_SERIES_TOL,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

/// A summed series with the tail bound at the stopping index.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesValue<T> {
    pub value: T,
    pub bound: f64,
    pub terms: usize,
}

/// Sums Σ term(n). Stops once the newest term and the geometric tail
/// estimate |t_n|·q/(1−q), q = |t_n/t_{n−1}|, both fall below tol·|sum|.
pub fn sum_series<F>(mut term: F, policy: &SeriesPolicy, what: &str) -> Result<SeriesValue<Complex64>>
where
    F: FnMut(usize) -> Result<Complex64>,
{
    let mut sum = Complex64::new(0.0, 0.0);
    let mut prev = f64::NAN;
    for n in 0..policy.max_terms {
        let t = term(n)?;
        if !t.re.is_finite() || !t.im.is_finite() {
            return Err(Error::numerical(
                format!("{what}: non-finite term at n = {n}"),
                f64::NAN,
            ));
        }
        sum += t;
        let mag = t.norm();
        if n > 0 {
            if mag == 0.0 && prev == 0.0 {
                return Ok(SeriesValue {
                    value: sum,
                    bound: 0.0,
                    terms: n + 1,
                });
            }
            let scale = policy.tol * sum.norm();
            if prev > 0.0 && mag <= scale {
                let q = mag / prev;
                if q < 1.0 {
                    let bound = mag * q / (1.0 - q);
                    if bound <= scale {
                        return Ok(SeriesValue {
                            value: sum,
                            bound,
                            terms: n + 1,
                        });
                    }
                }
            }
        }
        prev = mag;
    }
    Err(Error::Convergence(format!(
        "{what}: series not converged after {} terms",
        policy.max_terms
    )))
}

/// Dense view of μ_{2n+1} that grows by doubling.
pub(crate) struct OddMoments<'a> {
    weight: &'a RadialWeight,
    values: Vec<f64>,
}

impl<'a> OddMoments<'a> {
    pub(crate) fn new(weight: &'a RadialWeight) -> Self {
        OddMoments {
            weight,
            values: Vec::new(),
        }
    }

    pub(crate) fn get(&mut self, n: usize) -> Result<f64> {
        if n >= self.values.len() {
            let len = (n + 1).max(2 * self.values.len()).max(64);
            self.values = self.weight.odd_moments(len)?;
        }
        Ok(self.values[n])
    }
}

/// B^ω_z(ζ) = Σ_n (z̄ζ)^n / (2μ_{2n+1}).
pub fn kernel_eval(
    w: &RadialWeight,
    z: Complex64,
    zeta: Complex64,
    policy: &SeriesPolicy,
) -> Result<SeriesValue<Complex64>> {
    let x = z.conj() * zeta;
    if x.norm() > MAX_KERNEL_ARG {
        return Err(Error::domain(format!(
            "kernel argument |z̄ζ| = {} exceeds {MAX_KERNEL_ARG}",
            x.norm()
        )));
    }
    let mut moments = OddMoments::new(w);
    let mut power = Complex64::new(1.0, 0.0);
    sum_series(
        |n| {
            if n > 0 {
                power *= x;
            }
            Ok(power / (2.0 * moments.get(n)?))
        },
        policy,
        "reproducing kernel",
    )
}

/// ‖B^ω_z‖² = B^ω_z(z).
pub fn kernel_norm_sq(w: &RadialWeight, z: Complex64, policy: &SeriesPolicy) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::domain("kernel norm needs |z| < 1"));
    }
    Ok(kernel_eval(w, z, z, policy)?.value.re)
}

/// (1 − z̄ζ)^{−η} on the principal branch.
pub fn standard_kernel_eval(eta: f64, z: Complex64, zeta: Complex64) -> Complex64 {
    (Complex64::new(1.0, 0.0) - z.conj() * zeta).powf(-eta)
}

/// ln of the n-th Taylor coefficient of (1 − x)^{−γ}, γ > 0.
pub fn ln_binomial_coeff(gamma: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    // Γ(n+γ) / (Γ(γ) n!)
    -ln_gamma_ratio(n as f64 + 1.0, gamma - 1.0) - ln_gamma(gamma)
}

/// k^{η+2}_{ω,z} = K^{η+2}_z / ‖K^{η+2}_z‖_{A²_ω}.
#[derive(Debug, Clone)]
pub struct NormalizedKernel {
    weight: RadialWeight,
    eta: f64,
    policy: SeriesPolicy,
}

impl NormalizedKernel {
    pub fn new(weight: RadialWeight, eta: f64, policy: SeriesPolicy) -> Result<Self> {
        if !(eta > -1.0) || !eta.is_finite() {
            return Err(Error::domain(format!(
                "normalized kernels need η > −1, got {eta}; use a larger η"
            )));
        }
        Ok(NormalizedKernel { weight, eta, policy })
    }

    pub fn weight(&self) -> &RadialWeight {
        &self.weight
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn policy(&self) -> &SeriesPolicy {
        &self.policy
    }

    /// Exponent γ = η + 2 of the underlying standard kernel.
    pub fn power(&self) -> f64 {
        self.eta + 2.0
    }

    /// ln d_n for (1 − x)^{−(η+2)} = Σ d_n x^n.
    pub fn ln_coeff(&self, n: usize) -> f64 {
        ln_binomial_coeff(self.power(), n)
    }

    /// ‖K^{η+2}_z‖² = Σ d_n² |z|^{2n} 2μ_{2n+1}.
    pub fn norm_sq(&self, z: Complex64) -> Result<SeriesValue<f64>> {
        let rho2 = z.norm_sqr();
        if rho2 >= 1.0 {
            return Err(Error::domain("normalized kernel needs |z| < 1"));
        }
        let ln_rho2 = rho2.ln();
        let mut moments = OddMoments::new(&self.weight);
        let s = sum_series(
            |n| {
                let m = 2.0 * moments.get(n)?;
                let t = if n == 0 {
                    m
                } else if rho2 == 0.0 {
                    0.0
                } else {
                    (2.0 * self.ln_coeff(n) + n as f64 * ln_rho2 + m.ln()).exp()
                };
                Ok(Complex64::new(t, 0.0))
            },
            &self.policy,
            "normalized kernel norm",
        )?;
        Ok(SeriesValue {
            value: s.value.re,
            bound: s.bound,
            terms: s.terms,
        })
    }

    pub fn norm(&self, z: Complex64) -> Result<f64> {
        Ok(self.norm_sq(z)?.value.sqrt())
    }

    pub fn eval(&self, z: Complex64, zeta: Complex64) -> Result<Complex64> {
        Ok(standard_kernel_eval(self.power(), z, zeta) / self.norm(z)?)
    }
}

pub fn normalized_kernel_norm(w: &RadialWeight, eta: f64, z: Complex64) -> Result<f64> {
    NormalizedKernel::new(w.clone(), eta, SeriesPolicy::default())?.norm(z)
}

pub fn normalized_kernel_eval(w: &RadialWeight, eta: f64, z: Complex64, zeta: Complex64) -> Result<Complex64> {
    NormalizedKernel::new(w.clone(), eta, SeriesPolicy::default())?.eval(z, zeta)
}

/// Ranges of the pairwise ratios between ‖B_z‖², ω(D(z,r))^{−1} and
/// (ω̂(z)(1−|z|))^{−1} over a set of radii.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NormBracket {
    pub r: f64,
    pub kernel_vs_disc: (f64, f64),
    pub kernel_vs_tail: (f64, f64),
    pub disc_vs_tail: (f64, f64),
}

impl NormBracket {
    pub fn is_finite(&self) -> bool {
        [self.kernel_vs_disc, self.kernel_vs_tail, self.disc_vs_tail]
            .iter()
            .all(|(lo, hi)| lo.is_finite() && hi.is_finite() && *lo > 0.0)
    }
}

pub fn kernel_norm_bracket(w: &RadialWeight, r: f64, radii: &[f64], rule: &DiscRule) -> Result<NormBracket> {
    let policy = SeriesPolicy::default();
    let mut kd = (f64::INFINITY, 0.0f64);
    let mut kt = kd;
    let mut dt = kd;
    let widen = |acc: &mut (f64, f64), v: f64| {
        acc.0 = acc.0.min(v);
        acc.1 = acc.1.max(v);
    };
    for &rho in radii {
        let z = Complex64::new(rho, 0.0);
        let kernel = kernel_norm_sq(w, z, &policy)?;
        let disc = 1.0 / weight_disc_mass(w, z, r, rule)?;
        let tail = 1.0 / (w.omega_hat(rho)? * (1.0 - rho));
        widen(&mut kd, kernel / disc);
        widen(&mut kt, kernel / tail);
        widen(&mut dt, disc / tail);
    }
    Ok(NormBracket {
        r,
        kernel_vs_disc: kd,
        kernel_vs_tail: kt,
        disc_vs_tail: dt,
    })
}

/// ∫_𝔻 |K^η_z(ζ)| β(z,ζ)^c ω(ζ) dA(ζ), computed after the substitution ζ = φ_z(w)
/// so the factor β(z, ζ) = artanh|w| is radial. Use a graded rule.
pub fn kernel_beta_integral(w: &RadialWeight, eta: f64, c: f64, z: Complex64, rule: &DiscRule) -> Result<f64> {
    if z.norm() >= 1.0 {
        return Err(Error::domain("kernel integral needs |z| < 1"));
    }
    if !(c >= 0.0) {
        return Err(Error::domain(format!("distance exponent must be ≥ 0, got {c}")));
    }
    let one = Complex64::new(1.0, 0.0);
    let lift = 1.0 - z.norm_sqr();
    let v = integrate_disc(
        |u| {
            let zeta = mobius(z, u);
            let den = (one - z.conj() * u).norm();
            // |1 − z̄ζ| = (1−|z|²)/|1 − z̄u|, Jacobian ((1−|z|²)/|1 − z̄u|²)²
            let kernel = (den / lift).powf(eta);
            let jac = (lift / (den * den)).powi(2);
            let dist = if c == 0.0 { 1.0 } else { u.norm().atanh().powf(c) };
            Complex64::new(kernel * dist * w.density(zeta.norm().min(1.0 - 1e-16)) * jac, 0.0)
        },
        rule,
    )?;
    Ok(v.re)
}

/// ω̂(z) / (1 − |z|)^{η−1}.
pub fn kernel_beta_bound(w: &RadialWeight, eta: f64, z: Complex64) -> Result<f64> {
    let rho = z.norm();
    Ok(w.omega_hat(rho)? / (1.0 - rho).powf(eta - 1.0))
}
