//! Möbius automorphisms, the Bergman metric, Bergman discs and r-lattices.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)] // float methods come from libm without std
use num_traits::Float;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

/// φ_z(ζ) = (z − ζ)/(1 − z̄ζ). An involution of the disc swapping z and 0.
#[inline]
pub fn mobius(z: Complex64, zeta: Complex64) -> Complex64 {
    (z - zeta) / (Complex64::new(1.0, 0.0) - z.conj() * zeta)
}

/// Pseudo-hyperbolic distance |φ_z(ζ)|.
#[inline]
pub fn pseudo_hyperbolic(z: Complex64, zeta: Complex64) -> f64 {
    (z - zeta).norm() / (Complex64::new(1.0, 0.0) - z.conj() * zeta).norm()
}

/// Bergman distance β(z, ζ) = artanh |φ_z(ζ)|.
#[inline]
pub fn bergman_dist(z: Complex64, zeta: Complex64) -> f64 {
    pseudo_hyperbolic(z, zeta).min(1.0).atanh()
}

/// The Bergman disc D(z, r) = {ζ : β(z, ζ) < r} with its Euclidean description.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BergmanDisc {
    pub center: Complex64,
    pub radius_hyp: f64,
    pub euclid_center: Complex64,
    pub euclid_radius: f64,
}

impl BergmanDisc {
    /// Membership by the defining condition |φ_z(ζ)| < tanh r.
    pub fn contains(&self, zeta: Complex64) -> bool {
        pseudo_hyperbolic(self.center, zeta) < self.radius_hyp.tanh()
    }

    /// Membership through the derived Euclidean centre and radius.
    pub fn contains_euclid(&self, zeta: Complex64) -> bool {
        (zeta - self.euclid_center).norm() < self.euclid_radius
    }
}

pub fn disc_params(z: Complex64, r: f64) -> Result<BergmanDisc> {
    if z.norm() >= 1.0 {
        return Err(Error::domain("disc centre must lie in the unit disc"));
    }
    if !(r > 0.0) {
        return Err(Error::domain("disc radius must be positive"));
    }
    let t = r.tanh();
    let t2 = t * t;
    let z2 = z.norm_sqr();
    let denom = 1.0 - t2 * z2;
    Ok(BergmanDisc {
        center: z,
        radius_hyp: r,
        euclid_center: z * ((1.0 - t2) / denom),
        euclid_radius: (1.0 - z2) * t / denom,
    })
}

/// Default cap on generated lattice size.
pub const DEFAULT_POINT_CAP: usize = 500_000;

/// Ring-based r-lattice truncated at |z| ≤ R_max.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Lattice {
    pub separation_r: f64,
    pub points: Vec<Complex64>,
    pub r_max: f64,
}

impl Lattice {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points with |a| ≤ `radius`.
    pub fn within(&self, radius: f64) -> impl Iterator<Item = Complex64> + '_ {
        self.points.iter().copied().filter(move |a| a.norm() <= radius)
    }
}

/// β-distance between two points on the circle of Euclidean radius `s`
/// separated by angle `dtheta`.
fn ring_chord(s: f64, dtheta: f64) -> f64 {
    let a = Complex64::new(s, 0.0);
    bergman_dist(a, Complex64::from_polar(s, dtheta))
}

/// Angle at which the ring chord reaches `d` (π if it never does).
fn angle_for_chord(s: f64, d: f64) -> f64 {
    if ring_chord(s, PI) <= d {
        return PI;
    }
    let (mut lo, mut hi) = (0.0, PI);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if ring_chord(s, mid) < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

struct Ring {
    radius: f64,
    count: usize,
    offset: f64,
}

fn ring_layout(r: f64, r_max: f64) -> Vec<Ring> {
    let beta_max = r_max.atanh();
    let rings = (2.0 * beta_max / r).ceil() as usize;
    let mut out = Vec::with_capacity(rings + 1);
    out.push(Ring {
        radius: 0.0,
        count: 1,
        offset: 0.0,
    });
    for k in 1..=rings {
        let s = (k as f64 * r / 2.0).tanh();
        let n_min = (2.0 * PI / angle_for_chord(s, r)).ceil().max(1.0) as usize;
        let n_max = (2.0 * PI / angle_for_chord(s, r / 2.0)).floor().max(1.0) as usize;
        let target = 0.8 * r;
        let count = if n_min >= n_max {
            n_min
        } else {
            (n_min..=n_max)
                .min_by(|&a, &b| {
                    let da = (ring_chord(s, 2.0 * PI / a as f64) - target).abs();
                    let db = (ring_chord(s, 2.0 * PI / b as f64) - target).abs();
                    da.total_cmp(&db)
                })
                .unwrap_or(n_min)
        };
        let offset = if k % 2 == 1 { PI / count as f64 } else { 0.0 };
        out.push(Ring {
            radius: s,
            count,
            offset,
        });
    }
    out
}

/// Deterministic r-lattice: the origin plus rings at β-radius k·r/2 whose
/// adjacent points sit about 0.8·r apart. Separation ≥ r/2 holds by
/// construction; covering of |z| ≤ R_max is checked before returning.
pub fn lattice_generate(r: f64, r_max: f64) -> Result<Lattice> {
    lattice_generate_capped(r, r_max, DEFAULT_POINT_CAP)
}

pub fn lattice_generate_capped(r: f64, r_max: f64, cap: usize) -> Result<Lattice> {
    if !(r > 0.0 && r <= 2.0) {
        return Err(Error::domain(format!("lattice spacing {r} must lie in (0, 2]")));
    }
    if !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::domain(format!("lattice truncation {r_max} must lie in (0, 1)")));
    }
    let rings = ring_layout(r, r_max);
    let total: usize = rings.iter().map(|g| g.count).sum();
    if total > cap {
        return Err(Error::Resource {
            what: format!("lattice with r = {r}, R_max = {r_max} needs {total} points"),
            cap,
        });
    }
    let mut points = Vec::with_capacity(total);
    for ring in &rings {
        for j in 0..ring.count {
            let theta = ring.offset + 2.0 * PI * j as f64 / ring.count as f64;
            points.push(Complex64::from_polar(ring.radius, theta));
        }
    }
    let lattice = Lattice {
        separation_r: r,
        points,
        r_max,
    };
    if let Some(gap) = ring_cover_gap(&rings, r, r_max) {
        return Err(Error::numerical(
            format!("ring lattice leaves {}{:+}i uncovered", gap.re, gap.im),
            r,
        ));
    }
    Ok(lattice)
}

/// Checks covering on a polar probe grid using only neighbouring rings.
fn ring_cover_gap(rings: &[Ring], r: f64, r_max: f64) -> Option<Complex64> {
    let beta_max = r_max.atanh();
    let steps = ((beta_max / (r / 8.0)).ceil() as usize).max(2);
    let nearest_on = |ring: &Ring, z: Complex64| -> f64 {
        if ring.count == 1 && ring.radius == 0.0 {
            return bergman_dist(Complex64::new(0.0, 0.0), z);
        }
        let step = 2.0 * PI / ring.count as f64;
        let mut angle = (z.arg() - ring.offset) % (2.0 * PI);
        if angle < 0.0 {
            angle += 2.0 * PI;
        }
        let rel = angle / step;
        let j0 = rel.floor();
        [j0, j0 + 1.0]
            .iter()
            .map(|&j| {
                let a = Complex64::from_polar(ring.radius, ring.offset + j * step);
                bergman_dist(a, z)
            })
            .fold(f64::INFINITY, f64::min)
    };
    for i in 0..=steps {
        let rho = beta_max * i as f64 / steps as f64;
        let s = rho.tanh();
        let circumference = PI * (2.0 * rho).sinh();
        let m = ((circumference / (r / 8.0)).ceil() as usize).max(8);
        for k in 0..m {
            let z = Complex64::from_polar(s, 2.0 * PI * k as f64 / m as f64);
            let covered = rings
                .iter()
                .enumerate()
                .filter(|(idx, _)| (*idx as f64 * r / 2.0 - rho).abs() < r)
                .any(|(_, ring)| nearest_on(ring, z) < r);
            if !covered {
                return Some(z);
            }
        }
    }
    None
}

/// Outcome of brute-force lattice validation.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LatticeCheck {
    pub separated: bool,
    pub covering: bool,
    pub max_overlap: usize,
    pub min_separation: f64,
    pub uncovered_probes: usize,
    pub probes: usize,
}

/// Probe points: uniform by area, uniform in β-radius, and the rim |z| = R_max.
fn probes(r_max: f64, count: usize, seed: u64) -> Vec<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut unit = move || (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    let beta_max = r_max.atanh();
    let rim = (count / 10).max(16);
    let mut out = Vec::with_capacity(count + rim);
    for i in 0..count {
        let theta = 2.0 * PI * unit();
        let s = if i % 2 == 0 {
            r_max * unit().sqrt()
        } else {
            (beta_max * unit()).tanh()
        };
        out.push(Complex64::from_polar(s, theta));
    }
    for k in 0..rim {
        out.push(Complex64::from_polar(r_max, 2.0 * PI * k as f64 / rim as f64));
    }
    out
}

/// Brute-force check of separation (pairwise β ≥ r/2), covering of |z| ≤ R_max
/// by the discs D(a_j, r), and the maximal number of discs over any probe.
pub fn lattice_validate(
    points: &[Complex64],
    r: f64,
    r_max: f64,
    probe_count: usize,
    seed: u64,
) -> Result<LatticeCheck> {
    if probe_count < 1000 {
        return Err(Error::config(format!(
            "lattice validation needs at least 1000 probes, got {probe_count}"
        )));
    }
    if !(r > 0.0) || !(r_max > 0.0 && r_max < 1.0) {
        return Err(Error::domain("validation needs r > 0 and 0 < R_max < 1"));
    }
    let mut min_sep = f64::INFINITY;
    for (i, &a) in points.iter().enumerate() {
        for &b in &points[i + 1..] {
            min_sep = min_sep.min(bergman_dist(a, b));
        }
    }
    let separated = min_sep >= r / 2.0 - 1e-12;

    let probe_set = probes(r_max, probe_count, seed);
    let t = r.tanh();
    let mut uncovered = 0;
    let mut max_overlap = 0;
    for &z in &probe_set {
        let hits = points.iter().filter(|&&a| pseudo_hyperbolic(a, z) < t).count();
        if hits == 0 {
            uncovered += 1;
        }
        max_overlap = max_overlap.max(hits);
    }
    Ok(LatticeCheck {
        separated,
        covering: uncovered == 0,
        max_overlap,
        min_separation: min_sep,
        uncovered_probes: uncovered,
        probes: probe_set.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius(c(0.5, 0.0), c(0.5, 0.0)), c(0.0, 0.0));
        assert_relative_eq!(mobius(c(0.5, 0.0), c(0.2, 0.0)).re, 1.0 / 3.0, max_relative = 1e-15);
        let zeta = c(0.3, -0.6);
        assert_eq!(mobius(c(0.0, 0.0), zeta), -zeta);
        let z = c(-0.2, 0.7);
        assert!((mobius(z, mobius(z, zeta)) - zeta).norm() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        assert_relative_eq!(
            bergman_dist(c(0.0, 0.0), c(0.5, 0.0)),
            0.5 * 3f64.ln(),
            max_relative = 1e-14
        );
        assert_eq!(bergman_dist(c(0.3, 0.1), c(0.3, 0.1)), 0.0);
        assert_eq!(
            bergman_dist(c(0.3, 0.0), c(0.7, 0.0)),
            bergman_dist(c(0.7, 0.0), c(0.3, 0.0))
        );
    }

    #[test]
    fn disc_examples() {
        let d0 = disc_params(c(0.0, 0.0), 0.8).unwrap();
        assert_eq!(d0.euclid_center, c(0.0, 0.0));
        assert_relative_eq!(d0.euclid_radius, 0.8f64.tanh(), max_relative = 1e-15);

        let r = 0.5f64.atanh();
        let d = disc_params(c(0.5, 0.0), r).unwrap();
        assert_relative_eq!(d.euclid_center.re, 0.4, max_relative = 1e-14);
        assert_relative_eq!(d.euclid_radius, 0.4, max_relative = 1e-14);
        // |0.79 − 0.5| / |1 − 0.395| ≈ 0.479 < 0.5
        assert!(d.contains(c(0.79, 0.0)));
        assert!(d.contains_euclid(c(0.79, 0.0)));
        assert!(!d.contains(c(0.81, 0.0)));
    }

    #[test]
    fn single_point_lattice_validates() {
        let check = lattice_validate(&[c(0.0, 0.0)], 1.0, 0.4, 1000, 7).unwrap();
        assert!(check.separated && check.covering);
        assert_eq!(check.max_overlap, 1);
    }

    #[test]
    fn duplicate_points_are_not_separated() {
        let pts = [c(0.1, 0.2), c(0.1, 0.2), c(-0.5, 0.0)];
        let check = lattice_validate(&pts, 0.5, 0.3, 1000, 1).unwrap();
        assert!(!check.separated);
    }

    #[test]
    fn too_few_probes_rejected() {
        assert!(matches!(
            lattice_validate(&[c(0.0, 0.0)], 1.0, 0.4, 10, 0),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn generated_lattice_contains_origin_and_validates() {
        let lat = lattice_generate(0.5, 0.9).unwrap();
        assert!(lat.points.contains(&c(0.0, 0.0)));
        let check = lattice_validate(&lat.points, 0.5, 0.9, 2000, 11).unwrap();
        assert!(check.separated, "min separation {}", check.min_separation);
        assert!(check.covering, "{} uncovered", check.uncovered_probes);
        assert!(check.min_separation >= 0.25 - 1e-12);
    }

    #[test]
    fn coarse_lattice_is_small() {
        let lat = lattice_generate(2.0, 0.5).unwrap();
        assert!(lat.len() <= 10, "{} points", lat.len());
        let check = lattice_validate(&lat.points, 2.0, 0.5, 1000, 3).unwrap();
        assert!(check.separated && check.covering);
    }

    #[test]
    fn cap_is_enforced() {
        let err = lattice_generate_capped(0.25, 0.99, 100).unwrap_err();
        assert!(matches!(err, Error::Resource { cap: 100, .. }));
    }
}
