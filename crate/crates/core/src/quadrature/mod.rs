//! Product quadrature on the unit disc, on Bergman discs and against the
//! invariant measure dλ(z) = dA(z)/(1−|z|²)².
//!
//! All area integrals use the normalized measure dA = dx dy/π, so the disc has
//! unit mass. Sums are evaluated pairwise, which makes results independent of
//! how node evaluation is scheduled.

pub mod adaptive;

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use crate::geometry::mobius;
use crate::{Error, Result};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, z);
        if d.is_finite() {
            dp = d;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    if n == 0 {
        return (1.0, 0.0);
    }
    for j in 2..=n {
        let jf = j as f64;
        let p2 = ((2.0 * jf - 1.0) * z * p1 - (jf - 1.0) * p0) / jf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

/// Gauss–Legendre pairs mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    x.iter()
        .zip(&w)
        .map(|(&xi, &wi)| (a + half * (xi + 1.0), half * wi))
        .collect()
}

const PAIRWISE_BLOCK: usize = 16;

/// Pairwise (tree) summation.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum(l) + pairwise_sum(r)
}

/// Pairwise summation of complex values.
pub fn pairwise_sum_complex(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= PAIRWISE_BLOCK {
        return xs.iter().sum();
    }
    let (l, r) = xs.split_at(xs.len() / 2);
    pairwise_sum_complex(l) + pairwise_sum_complex(r)
}

/// How the radial Gauss–Legendre nodes are placed on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RadialMap {
    /// Nodes directly in s; exact for polynomials in z, z̄.
    Uniform,
    /// Nodes in x with s = 1 − (1−x)²; absorbs (1−s)^{±1/2} endpoint behaviour.
    Graded,
}

/// Tensor rule on the unit disc: Gauss–Legendre in the radius times the
/// trapezoid rule in the angle.
#[derive(Debug, Clone)]
pub struct DiscRule {
    radial: Vec<(f64, f64)>,
    angular: usize,
    map: RadialMap,
}

impl Default for DiscRule {
    fn default() -> Self {
        DiscRule::new(128, 256).expect("default sizes are valid")
    }
}

impl DiscRule {
    pub fn new(radial: usize, angular: usize) -> Result<Self> {
        Self::with_map(radial, angular, RadialMap::Uniform)
    }

    pub fn graded(radial: usize, angular: usize) -> Result<Self> {
        Self::with_map(radial, angular, RadialMap::Graded)
    }

    pub fn with_map(radial: usize, angular: usize, map: RadialMap) -> Result<Self> {
        if radial == 0 || angular == 0 {
            return Err(Error::config(
                "disc rule needs at least one radial and one angular node",
            ));
        }
        let pairs = gauss_legendre_on(radial, 0.0, 1.0);
        let radial = pairs
            .into_iter()
            .map(|(x, w)| match map {
                RadialMap::Uniform => (x, 2.0 * x * w),
                RadialMap::Graded => {
                    let s = 1.0 - (1.0 - x) * (1.0 - x);
                    (s, 2.0 * s * 2.0 * (1.0 - x) * w)
                }
            })
            .collect();
        Ok(DiscRule { radial, angular, map })
    }

    pub fn radial_count(&self) -> usize {
        self.radial.len()
    }

    pub fn angular_count(&self) -> usize {
        self.angular
    }

    pub fn map(&self) -> RadialMap {
        self.map
    }

    pub fn len(&self) -> usize {
        self.radial.len() * self.angular
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Same rule with both node counts doubled.
    pub fn refined(&self) -> Self {
        Self::with_map(2 * self.radial.len(), 2 * self.angular, self.map).expect("sizes stay valid")
    }

    /// Radial (s, weight) pairs; weights integrate against 2s ds.
    pub fn radial_nodes(&self) -> &[(f64, f64)] {
        &self.radial
    }

    /// Nodes and weights on the unit disc for dA.
    pub fn nodes(&self) -> impl Iterator<Item = (Complex64, f64)> + '_ {
        let m = self.angular;
        let inv_m = 1.0 / m as f64;
        self.radial.iter().flat_map(move |&(s, ws)| {
            (0..m).map(move |k| {
                let theta = 2.0 * PI * k as f64 * inv_m;
                (Complex64::from_polar(s, theta), ws * inv_m)
            })
        })
    }

    /// Nodes and weights for ∫_{D(z,r)} · dA, obtained by pushing the rule
    /// on |w| < tanh r forward through φ_z.
    pub fn bergman_disc_nodes(&self, z: Complex64, r: f64) -> Vec<(Complex64, f64)> {
        let t = r.tanh();
        let a = 1.0 - z.norm_sqr();
        self.nodes()
            .map(|(u, wt)| {
                let w = u * t;
                let jac = a / (Complex64::new(1.0, 0.0) - z.conj() * w).norm_sqr();
                (mobius(z, w), wt * t * t * jac * jac)
            })
            .collect()
    }
}

fn check_finite(v: Complex64, at: Complex64) -> Result<Complex64> {
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::numerical(
            format!("integrand not finite at node {}{:+}i", at.re, at.im),
            f64::NAN,
        ))
    }
}

/// ∫_𝔻 g dA.
pub fn integrate_disc<G: FnMut(Complex64) -> Complex64>(mut g: G, rule: &DiscRule) -> Result<Complex64> {
    let mut terms = Vec::with_capacity(rule.len());
    for (z, w) in rule.nodes() {
        terms.push(check_finite(g(z), z)? * w);
    }
    Ok(pairwise_sum_complex(&terms))
}

/// Sum of `g` against precomputed (node, weight) pairs.
pub fn integrate_nodes<G: FnMut(Complex64) -> Complex64>(mut g: G, nodes: &[(Complex64, f64)]) -> Result<Complex64> {
    let mut terms = Vec::with_capacity(nodes.len());
    for &(z, w) in nodes {
        terms.push(check_finite(g(z), z)? * w);
    }
    Ok(pairwise_sum_complex(&terms))
}

/// ∫_{D(z,r)} g dA via the substitution ζ = φ_z(w), |w| < tanh r.
pub fn integrate_bergman_disc<G: FnMut(Complex64) -> Complex64>(
    g: G,
    z: Complex64,
    r: f64,
    rule: &DiscRule,
) -> Result<Complex64> {
    if z.norm() >= 1.0 {
        return Err(Error::domain("Bergman disc centre must lie in the unit disc"));
    }
    if !(r > 0.0) {
        return Err(Error::domain("Bergman disc radius must be positive"));
    }
    integrate_nodes(g, &rule.bergman_disc_nodes(z, r))
}

/// Shell-to-shell growth above which a truncated dλ integral is flagged.
pub const TAIL_GROWTH_RATIO: f64 = 0.75;

/// Radial rule for dλ integrals on |z| < R: Gauss–Legendre panels in
/// x = −ln(1−|z|). Each panel spans one halving of 1−|z| (a "shell"), so the
/// last two panels compare like-for-like pieces of the tail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InvariantRule {
    pub panel_order: usize,
    pub angular: usize,
}

impl Default for InvariantRule {
    fn default() -> Self {
        InvariantRule {
            panel_order: 12,
            angular: 64,
        }
    }
}

/// One radial node of an [`InvariantRule`]; `weight` already contains the
/// dλ density 2s/(1−s²)² and the Jacobian of the log substitution.
#[derive(Debug, Clone, Copy)]
pub struct RadialNode {
    pub s: f64,
    pub weight: f64,
    pub shell: usize,
}

impl InvariantRule {
    pub fn radial_nodes(&self, r_max: f64) -> Result<Vec<RadialNode>> {
        if !(r_max > 0.0 && r_max < 1.0) {
            return Err(Error::domain(format!("truncation radius {r_max} must lie in (0, 1)")));
        }
        if self.panel_order == 0 || self.angular == 0 {
            return Err(Error::config(
                "invariant rule needs positive panel order and angular count",
            ));
        }
        let x_max = -(-r_max).ln_1p();
        let ln2 = core::f64::consts::LN_2;
        let full = (x_max / ln2).floor() as usize;
        let mut edges = Vec::with_capacity(full + 2);
        let head = x_max - full as f64 * ln2;
        edges.push(0.0);
        if head > 1e-12 {
            edges.push(head);
        }
        for k in (0..full).rev() {
            edges.push(x_max - k as f64 * ln2);
        }
        let mut nodes = Vec::with_capacity((edges.len() - 1) * self.panel_order);
        for (shell, pair) in edges.windows(2).enumerate() {
            for (x, w) in gauss_legendre_on(self.panel_order, pair[0], pair[1]) {
                let e = (-x).exp();
                let s = 1.0 - e;
                let one_minus_s2 = e * (2.0 - e);
                // 2s (1−s²)^{-2} ds with ds = e^{-x} dx
                let weight = w * 2.0 * s * e / (one_minus_s2 * one_minus_s2);
                nodes.push(RadialNode { s, weight, shell });
            }
        }
        Ok(nodes)
    }

    pub fn angles(&self) -> Vec<f64> {
        (0..self.angular)
            .map(|k| 2.0 * PI * k as f64 / self.angular as f64)
            .collect()
    }
}

/// Result of a truncated dλ integral with its tail diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct InvariantIntegral {
    pub value: Complex64,
    pub r_max: f64,
    pub last_shell: f64,
    pub previous_shell: f64,
    /// The outermost shell did not shrink relative to its neighbour.
    pub divergent: bool,
}

/// ∫_{|z|<R} g dλ from ring means: `ring_mean(s)` must return the angular
/// average of the integrand on |z| = s.
pub fn integrate_invariant_rings<F: FnMut(f64) -> Result<Complex64>>(
    mut ring_mean: F,
    r_max: f64,
    rule: &InvariantRule,
) -> Result<InvariantIntegral> {
    let nodes = rule.radial_nodes(r_max)?;
    let mut terms = Vec::with_capacity(nodes.len());
    let shells = nodes.last().map_or(0, |n| n.shell + 1);
    let mut shell_sums = alloc::vec![Complex64::new(0.0, 0.0); shells];
    for node in &nodes {
        let v = check_finite(ring_mean(node.s)?, Complex64::new(node.s, 0.0))? * node.weight;
        shell_sums[node.shell] += v;
        terms.push(v);
    }
    let value = pairwise_sum_complex(&terms);
    let (last_shell, previous_shell) = match shells {
        0 => (0.0, 0.0),
        1 => (shell_sums[0].norm(), 0.0),
        _ => (shell_sums[shells - 1].norm(), shell_sums[shells - 2].norm()),
    };
    let divergent = shells >= 2 && last_shell > TAIL_GROWTH_RATIO * previous_shell;
    Ok(InvariantIntegral {
        value,
        r_max,
        last_shell,
        previous_shell,
        divergent,
    })
}

/// ∫_{|z|<R} g(z) dλ(z) with radial nodes clustered toward R.
pub fn integrate_invariant<G: FnMut(Complex64) -> Complex64>(
    mut g: G,
    r_max: f64,
    rule: &InvariantRule,
) -> Result<InvariantIntegral> {
    let angles = rule.angles();
    let inv_m = 1.0 / angles.len() as f64;
    let mut ring = Vec::with_capacity(angles.len());
    integrate_invariant_rings(
        |s| {
            ring.clear();
            for &th in &angles {
                let z = Complex64::from_polar(s, th);
                ring.push(check_finite(g(z), z)?);
            }
            Ok(pairwise_sum_complex(&ring) * inv_m)
        },
        r_max,
        rule,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 64, 128, 513] {
            let (_, w) = gauss_legendre(n);
            assert_relative_eq!(w.iter().sum::<f64>(), 2.0, max_relative = 1e-13);
        }
    }

    #[test]
    fn disc_examples() {
        let rule = DiscRule::default();
        assert_relative_eq!(integrate_disc(|_| c(1.0), &rule).unwrap().re, 1.0, max_relative = 1e-12);
        assert_relative_eq!(
            integrate_disc(|z| c(z.norm_sqr()), &rule).unwrap().re,
            0.5,
            max_relative = 1e-12
        );
        assert!(integrate_disc(|z| z, &rule).unwrap().norm() < 1e-14);
    }

    #[test]
    fn exactness_window() {
        let rule = DiscRule::new(6, 5).unwrap();
        // m + n ≤ 10, |m − n| < 5
        for m in 0..=10u32 {
            for n in 0..=(10 - m) {
                if (m as i32 - n as i32).abs() >= 5 {
                    continue;
                }
                let v = integrate_disc(|z| z.powu(m) * z.conj().powu(n), &rule).unwrap();
                let exact = if m == n { 1.0 / (m as f64 + 1.0) } else { 0.0 };
                assert!((v - c(exact)).norm() < 1e-12, "m={m} n={n} got {v}");
            }
        }
    }

    #[test]
    fn non_finite_is_reported() {
        let rule = DiscRule::new(4, 4).unwrap();
        let err = integrate_disc(|_| c(f64::NAN), &rule).unwrap_err();
        assert!(matches!(err, Error::Numerical { .. }));
    }

    #[test]
    fn bergman_disc_area() {
        let rule = DiscRule::new(32, 64).unwrap();
        let t: f64 = 0.5;
        let v = integrate_bergman_disc(|_| c(1.0), c(0.5), t.atanh(), &rule).unwrap();
        assert_relative_eq!(v.re, 0.16, max_relative = 1e-12);
        let v0 = integrate_bergman_disc(|_| c(1.0), c(0.0), 0.7, &rule).unwrap();
        assert_relative_eq!(v0.re, 0.7f64.tanh().powi(2), max_relative = 1e-12);
    }

    #[test]
    fn bergman_disc_complement_vanishes() {
        let rule = DiscRule::new(24, 48).unwrap();
        let z = Complex64::new(0.3, -0.4);
        let r = 0.6;
        let v = integrate_bergman_disc(
            |zeta| {
                if crate::geometry::bergman_dist(z, zeta) < r {
                    c(0.0)
                } else {
                    c(1.0)
                }
            },
            z,
            r,
            &rule,
        )
        .unwrap();
        assert_eq!(v, c(0.0));
    }

    #[test]
    fn invariant_examples() {
        let rule = InvariantRule::default();
        let cancel = integrate_invariant(|z| c((1.0 - z.norm_sqr()).powi(2)), 0.999_999, &rule).unwrap();
        assert_relative_eq!(cancel.value.re, 1.0, max_relative = 1e-5);
        assert!(!cancel.divergent);

        let r = 0.995;
        let one = integrate_invariant(|_| c(1.0), r, &rule).unwrap();
        assert_relative_eq!(one.value.re, r * r / (1.0 - r * r), max_relative = 1e-10);
        assert!(one.divergent);

        let t2 = 0.25;
        let mo2 = |z: Complex64| {
            let a = 1.0 - z.norm_sqr();
            c(0.5 * t2 * (a / (1.0 - t2 * z.norm_sqr())).powi(2))
        };
        let near_one = integrate_invariant(mo2, 1.0 - 1e-9, &rule).unwrap();
        assert_relative_eq!(near_one.value.re, 0.5 * t2 / (1.0 - t2), max_relative = 1e-7);
        assert!(!near_one.divergent);
    }
}
