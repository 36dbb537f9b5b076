//! Polynomial symbols f(z) = Σ c_{m,n} z^m z̄^n and their exact weighted
//! inner products.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;

use crate::weights::RadialWeight;
use crate::{Error, Result};

pub const DEFAULT_DEGREE_CAP: u32 = 256;

/// Finite sum of monomials z^m z̄^n keyed by (m, n). Zero coefficients are not stored.
#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SymbolPoly {
    terms: BTreeMap<(u32, u32), Complex64>,
}

impl SymbolPoly {
    pub fn zero() -> Self {
        SymbolPoly::default()
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, 0, c)
    }

    pub fn monomial(m: u32, n: u32, c: Complex64) -> Self {
        let mut p = SymbolPoly::zero();
        p.add_term(m, n, c);
        p
    }

    pub fn z() -> Self {
        Self::monomial(1, 0, Complex64::new(1.0, 0.0))
    }

    pub fn zbar() -> Self {
        Self::monomial(0, 1, Complex64::new(1.0, 0.0))
    }

    pub fn from_terms<I: IntoIterator<Item = ((u32, u32), Complex64)>>(terms: I) -> Self {
        let mut p = SymbolPoly::zero();
        for ((m, n), c) in terms {
            p.add_term(m, n, c);
        }
        p
    }

    pub fn add_term(&mut self, m: u32, n: u32, c: Complex64) {
        let entry = self.terms.entry((m, n)).or_insert(Complex64::new(0.0, 0.0));
        *entry += c;
        if *entry == Complex64::new(0.0, 0.0) {
            self.terms.remove(&(m, n));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = ((u32, u32), Complex64)> + '_ {
        self.terms.iter().map(|(&k, &c)| (k, c))
    }

    pub fn coefficient(&self, m: u32, n: u32) -> Complex64 {
        self.terms.get(&(m, n)).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.is_zero()
    }

    /// Only terms with n = 0.
    pub fn is_analytic(&self) -> bool {
        self.terms.keys().all(|&(_, n)| n == 0)
    }

    pub fn deg_z(&self) -> u32 {
        self.terms.keys().map(|&(m, _)| m).max().unwrap_or(0)
    }

    pub fn deg_zbar(&self) -> u32 {
        self.terms.keys().map(|&(_, n)| n).max().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|&(m, n)| m + n).max().unwrap_or(0)
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let zb = z.conj();
        self.terms.iter().map(|(&(m, n), &c)| c * z.powu(m) * zb.powu(n)).sum()
    }

    /// c_{m,n} ↦ conj(c_{n,m}).
    pub fn conj(&self) -> Self {
        SymbolPoly {
            terms: self.terms.iter().map(|(&(m, n), &c)| ((n, m), c.conj())).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::from_terms(self.terms().map(|(k, c)| (k, c * s)))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for ((m, n), c) in other.terms() {
            out.add_term(m, n, c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_capped(other, DEFAULT_DEGREE_CAP)
    }

    pub fn mul_capped(&self, other: &Self, cap: u32) -> Result<Self> {
        let degree = self.degree() + other.degree();
        if degree > cap && !self.is_zero() && !other.is_zero() {
            return Err(Error::Resource {
                what: format!("symbol product of degree {degree}"),
                cap: cap as usize,
            });
        }
        let mut out = SymbolPoly::zero();
        for ((a, b), c) in self.terms() {
            for ((p, q), d) in other.terms() {
                out.add_term(a + p, b + q, c * d);
            }
        }
        Ok(out)
    }

    /// |f|² = f·conj(f).
    pub fn abs_sq(&self) -> Result<Self> {
        self.mul(&self.conj())
    }

    /// Coefficients of z ↦ f(e^{iθ} z).
    pub fn rotated(&self, theta: f64) -> Self {
        Self::from_terms(
            self.terms()
                .map(|((m, n), c)| ((m, n), c * Complex64::from_polar(1.0, (m as f64 - n as f64) * theta))),
        )
    }

    /// Largest |c_{m,n}|.
    pub fn max_coefficient(&self) -> f64 {
        self.terms.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

impl fmt::Display for SymbolPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0,0,0,0");
        }
        let mut first = true;
        for ((m, n), c) in self.terms() {
            if !first {
                write!(f, ",")?;
            }
            first = false;
            write!(f, "{m},{n},{},{}", c.re, c.im)?;
        }
        Ok(())
    }
}

fn shorthand(name: &str) -> Option<SymbolPoly> {
    let one = Complex64::new(1.0, 0.0);
    let half = Complex64::new(0.5, 0.0);
    Some(match name {
        "z" => SymbolPoly::z(),
        "zbar" => SymbolPoly::zbar(),
        "z2" => SymbolPoly::monomial(2, 0, one),
        "zbar2" => SymbolPoly::monomial(0, 2, one),
        "absz2" => SymbolPoly::monomial(1, 1, one),
        "rez" => SymbolPoly::from_terms([((1, 0), half), ((0, 1), half)]),
        "one" | "1" => SymbolPoly::constant(one),
        _ => return None,
    })
}

impl FromStr for SymbolPoly {
    type Err = Error;

    /// Either shorthand names joined by `+` (`zbar`, `zbar2`, `absz2`, `rez`,
    /// `z`, `z2`, `one`) or a comma list of `m,n,re,im` quadruples.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::config("empty symbol"));
        }
        if !s.contains(',') {
            let mut out = SymbolPoly::zero();
            for part in s.split('+') {
                let part = part.trim();
                let term = shorthand(part).ok_or_else(|| Error::config(format!("unknown symbol name '{part}'")))?;
                out = out.add(&term);
            }
            return Ok(out);
        }
        let fields: Vec<&str> = s.split(',').map(str::trim).collect();
        if !fields.len().is_multiple_of(4) {
            return Err(Error::config(format!(
                "symbol list must hold m,n,re,im quadruples, got {} fields",
                fields.len()
            )));
        }
        let mut out = SymbolPoly::zero();
        for quad in fields.chunks(4) {
            let m: u32 = quad[0]
                .parse()
                .map_err(|_| Error::config(format!("bad exponent '{}'", quad[0])))?;
            let n: u32 = quad[1]
                .parse()
                .map_err(|_| Error::config(format!("bad exponent '{}'", quad[1])))?;
            let re: f64 = quad[2]
                .parse()
                .map_err(|_| Error::config(format!("bad coefficient '{}'", quad[2])))?;
            let im: f64 = quad[3]
                .parse()
                .map_err(|_| Error::config(format!("bad coefficient '{}'", quad[3])))?;
            if !re.is_finite() || !im.is_finite() {
                return Err(Error::config("symbol coefficients must be finite"));
            }
            out.add_term(m, n, Complex64::new(re, im));
        }
        Ok(out)
    }
}

/// The experiment family: z̄, z̄², |z|², z̄ + z̄², Re z.
pub fn builtin_family() -> Vec<(String, SymbolPoly)> {
    ["zbar", "zbar2", "absz2", "zbar+zbar2", "rez"]
        .iter()
        .map(|name| (name.to_string(), name.parse().expect("built-in names parse")))
        .collect()
}

/// ∫_𝔻 z^p z̄^q ω dA: zero unless p = q, then 2μ_{2p+1}.
pub fn monomial_integral(w: &RadialWeight, p: u32, q: u32) -> Result<f64> {
    if p != q {
        return Ok(0.0);
    }
    Ok(2.0 * w.moment(2.0 * p as f64 + 1.0)?)
}

/// ⟨f, g⟩_{L²_ω} = ∫ f ḡ ω dA.
pub fn inner_product(f: &SymbolPoly, g: &SymbolPoly, w: &RadialWeight) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for ((a, b), c) in f.terms() {
        for ((p, q), d) in g.terms() {
            // z^a z̄^b · z̄^p z^q
            if a + q == b + p {
                acc += c * d.conj() * monomial_integral(w, a + q, b + p)?;
            }
        }
    }
    Ok(acc)
}

pub fn norm_sq(f: &SymbolPoly, w: &RadialWeight) -> Result<f64> {
    Ok(inner_product(f, f, w)?.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn eval_examples() {
        assert_eq!(SymbolPoly::zbar().eval(c(0.3, 0.4)), c(0.3, -0.4));
        let absz2: SymbolPoly = "absz2".parse().unwrap();
        assert_relative_eq!(absz2.eval(c(0.0, 0.5)).re, 0.25, max_relative = 1e-15);
        assert_eq!(SymbolPoly::constant(c(2.0, 0.0)).eval(c(0.7, -0.1)), c(2.0, 0.0));
    }

    #[test]
    fn mul_examples() {
        let zz = SymbolPoly::z().mul(&SymbolPoly::zbar()).unwrap();
        assert_eq!(zz, SymbolPoly::monomial(1, 1, c(1.0, 0.0)));
        let s = SymbolPoly::z().add(&SymbolPoly::zbar());
        let d = SymbolPoly::z().sub(&SymbolPoly::zbar());
        let prod = s.mul(&d).unwrap();
        let expect = SymbolPoly::from_terms([((2, 0), c(1.0, 0.0)), ((0, 2), c(-1.0, 0.0))]);
        assert_eq!(prod, expect);
        let f: SymbolPoly = "zbar+zbar2".parse().unwrap();
        assert_eq!(f.mul(&SymbolPoly::constant(c(1.0, 0.0))).unwrap(), f);
        let big = SymbolPoly::monomial(200, 0, c(1.0, 0.0));
        assert!(matches!(big.mul(&big), Err(Error::Resource { cap: 256, .. })));
    }

    #[test]
    fn conj_swaps_indices() {
        let f = SymbolPoly::from_terms([((2, 1), c(1.0, 2.0)), ((0, 3), c(-0.5, 0.0))]);
        let g = f.conj();
        assert_eq!(g.coefficient(1, 2), c(1.0, -2.0));
        assert_eq!(g.coefficient(3, 0), c(-0.5, 0.0));
        let z = c(0.2, -0.6);
        assert!((g.eval(z) - f.eval(z).conj()).norm() < 1e-15);
    }

    #[test]
    fn grammar() {
        let q: SymbolPoly = "0,1,1,0, 2,0,0.5,-1".parse().unwrap();
        assert_eq!(q.coefficient(0, 1), c(1.0, 0.0));
        assert_eq!(q.coefficient(2, 0), c(0.5, -1.0));
        let rez: SymbolPoly = "rez".parse().unwrap();
        assert_eq!(rez.coefficient(1, 0), c(0.5, 0.0));
        assert!("zbar3".parse::<SymbolPoly>().is_err());
        assert!("1,2,3".parse::<SymbolPoly>().is_err());
        assert!("a,b,c,d".parse::<SymbolPoly>().is_err());
        let round: SymbolPoly = q.to_string().parse().unwrap();
        assert_eq!(round, q);
        assert_eq!(builtin_family().len(), 5);
    }

    #[test]
    fn integral_examples() {
        let w0 = RadialWeight::standard(0.0).unwrap();
        let w1 = RadialWeight::standard(1.0).unwrap();
        assert_relative_eq!(monomial_integral(&w0, 1, 1).unwrap(), 0.5, max_relative = 1e-15);
        assert_eq!(monomial_integral(&w0, 2, 3).unwrap(), 0.0);
        assert_relative_eq!(monomial_integral(&w1, 0, 0).unwrap(), 1.0, max_relative = 1e-15);
    }

    #[test]
    fn inner_product_examples() {
        let w0 = RadialWeight::standard(0.0).unwrap();
        let f = SymbolPoly::monomial(2, 1, c(1.0, 0.0));
        assert_relative_eq!(
            inner_product(&f, &SymbolPoly::z(), &w0).unwrap().re,
            1.0 / 3.0,
            max_relative = 1e-15
        );
        assert_eq!(
            inner_product(&SymbolPoly::z(), &SymbolPoly::zbar(), &w0).unwrap(),
            c(0.0, 0.0)
        );
        assert_eq!(norm_sq(&SymbolPoly::zero(), &w0).unwrap(), 0.0);
        let g: SymbolPoly = "zbar+zbar2".parse().unwrap();
        assert!(norm_sq(&g, &w0).unwrap() > 0.0);
    }
}
