//! Globally adaptive Gauss–Kronrod (7/15) integration on intervals.

use alloc::collections::BinaryHeap;
use alloc::format;
use core::cmp::Ordering;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Panel> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    let value = k * h;
    let err = ((k - g) * h).abs();
    if !value.is_finite() {
        return Err(Error::numerical(
            format!("non-finite integrand on [{a}, {b}]"),
            f64::NAN,
        ));
    }
    Ok(Panel { a, b, value, err })
}

/// Integrates `f` over `[a, b]` until the summed Kronrod–Gauss error estimate
/// falls below `max(abs_tol, rel_tol·|I|)`. Returns `(value, error estimate)`.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<(f64, f64)> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let first = kronrod(&mut f, a, b)?;
    let mut total = first.value;
    let mut err = first.err;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while err > abs_tol.max(rel_tol * total.abs()) {
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::numerical(
                format!("adaptive quadrature on [{a}, {b}] exhausted {MAX_INTERVALS} panels"),
                err / total.abs().max(f64::MIN_POSITIVE),
            ));
        }
        let worst = heap.pop().expect("heap is never empty here");
        let mid = 0.5 * (worst.a + worst.b);
        let left = kronrod(&mut f, worst.a, mid)?;
        let right = kronrod(&mut f, mid, worst.b)?;
        total += left.value + right.value - worst.value;
        err += left.err + right.err - worst.err;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    let mut panels = heap.into_vec();
    panels.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = panels.iter().map(|p| p.value).sum::<f64>();
    let err = panels.iter().map(|p| p.err).sum::<f64>();
    Ok((value, err))
}

/// Integrates an exponentially decaying `f` over `[0, ∞)`.
///
/// The range `[0, bulk]` is handled in one adaptive pass; after that the
/// window doubles until a window contributes less than `rel_tol/100` of the
/// running total.
pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(mut f: F, bulk: f64, rel_tol: f64) -> Result<f64> {
    let bulk = bulk.max(1.0);
    let (mut total, _) = integrate(&mut f, 0.0, bulk, rel_tol, 0.0)?;
    let mut lo = bulk;
    let mut width = bulk;
    let mut quiet = 0;
    while quiet < 2 {
        if lo > 1.0e5 {
            return Err(Error::numerical(
                "semi-infinite integral did not decay by t = 1e5",
                f64::NAN,
            ));
        }
        let (piece, _) = integrate(&mut f, lo, lo + width, rel_tol, 0.0)?;
        total += piece;
        if piece.abs() <= 1e-2 * rel_tol * total.abs() {
            quiet += 1;
        } else {
            quiet = 0;
        }
        lo += width;
        width *= 2.0;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_exact() {
        let (v, _) = integrate(|x| x * x * x + 2.0, 0.0, 2.0, 1e-14, 0.0).unwrap();
        assert_relative_eq!(v, 8.0, max_relative = 1e-14);
    }

    #[test]
    fn inverse_sqrt_endpoint() {
        let (v, _) = integrate(|x| 1.0 / x.sqrt(), 0.0, 1.0, 1e-10, 0.0).unwrap();
        assert_relative_eq!(v, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn exponential_tail() {
        let v = integrate_to_infinity(|t| (-0.1 * t).exp() * (1.0 + t), 1.0, 1e-12).unwrap();
        // ∫ e^{-at}(1+t) = 1/a + 1/a²
        assert_relative_eq!(v, 10.0 + 100.0, max_relative = 1e-11);
    }
}
