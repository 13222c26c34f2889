//! Configuration points, centers, and the distances between them.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A point of the `n`-particle configuration lattice `Z^{nd}`.
///
/// Particle `i` occupies `coords[i*d .. (i+1)*d)`. Points order
/// lexicographically by their flattened coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ConfigPoint {
    n: usize,
    d: usize,
    coords: Vec<i64>,
}

impl ConfigPoint {
    pub fn new(n: usize, d: usize, coords: Vec<i64>) -> Result<Self> {
        if n == 0 || d == 0 || coords.len() != n * d {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{} coordinates, got {}",
                n,
                d,
                coords.len()
            )));
        }
        Ok(Self { n, d, coords })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    /// Coordinates of particle `i`.
    pub fn particle(&self, i: usize) -> &[i64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    /// The particle-position set `S_x` with duplicates removed.
    pub fn particle_set(&self) -> Vec<&[i64]> {
        let mut set: Vec<&[i64]> = (0..self.n).map(|i| self.particle(i)).collect();
        set.sort();
        set.dedup();
        set
    }

    /// Sup norm: the largest per-particle sup norm.
    pub fn sup_norm(&self) -> f64 {
        self.coords.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0) as f64
    }

    /// `<x> = sqrt(1 + ||x||^2)`.
    pub fn bracket(&self) -> f64 {
        let s = self.sup_norm();
        (1.0 + s * s).sqrt()
    }

    /// Sup-norm distance to another point of the same shape.
    pub fn sup_dist(&self, other: &ConfigPoint) -> f64 {
        debug_assert_eq!(self.coords.len(), other.coords.len());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).unsigned_abs())
            .max()
            .unwrap_or(0) as f64
    }

    /// 1-norm distance (graph distance on `Z^{nd}`).
    pub fn l1_dist(&self, other: &ConfigPoint) -> u64 {
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b).unsigned_abs())
            .sum()
    }

    /// View of the same point with real coordinates.
    pub fn to_real(&self) -> RealCenter {
        RealCenter {
            n: self.n,
            d: self.d,
            coords: self.coords.iter().map(|&c| c as f64).collect(),
        }
    }

    /// The sub-point with only the given particle indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> ConfigPoint {
        let mut coords = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            coords.extend_from_slice(self.particle(i));
        }
        ConfigPoint {
            n: indices.len(),
            d: self.d,
            coords,
        }
    }
}

/// A center in `R^{nd}`; boxes may be centered off the lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealCenter {
    n: usize,
    d: usize,
    coords: Vec<f64>,
}

impl RealCenter {
    pub fn new(n: usize, d: usize, coords: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 || coords.len() != n * d {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{} coordinates, got {}",
                n,
                d,
                coords.len()
            )));
        }
        Ok(Self { n, d, coords })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn particle_set(&self) -> Vec<&[f64]> {
        let mut set: Vec<&[f64]> = (0..self.n).map(|i| self.particle(i)).collect();
        set.sort_by(|a, b| a.partial_cmp(b).unwrap());
        set.dedup_by(|a, b| a == b);
        set
    }

    pub fn sup_norm(&self) -> f64 {
        self.coords.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    pub fn sup_dist(&self, other: &RealCenter) -> f64 {
        debug_assert_eq!(self.coords.len(), other.coords.len());
        self.coords
            .iter()
            .zip(&other.coords)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn select(&self, indices: &[usize]) -> RealCenter {
        let mut coords = Vec::with_capacity(indices.len() * self.d);
        for &i in indices {
            coords.extend_from_slice(self.particle(i));
        }
        RealCenter {
            n: indices.len(),
            d: self.d,
            coords,
        }
    }
}

fn slice_sup_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// Sup-norm distance between a single-particle position and a finite set.
fn dist_to_set(p: &[f64], set: &[&[f64]]) -> f64 {
    set.iter()
        .map(|q| slice_sup_dist(p, q))
        .fold(f64::INFINITY, f64::min)
}

/// Hausdorff distance between the particle-position sets of two centers.
///
/// The particle counts may differ; the spatial dimension must match.
pub fn hausdorff_distance(a: &RealCenter, b: &RealCenter) -> Result<f64> {
    if a.d != b.d {
        return Err(Error::ShapeMismatch(format!(
            "hausdorff distance needs equal spatial dimension, got {} and {}",
            a.d, b.d
        )));
    }
    let sa = a.particle_set();
    let sb = b.particle_set();
    let forward = sa
        .iter()
        .map(|p| dist_to_set(p, &sb))
        .fold(0.0, f64::max);
    let backward = sb
        .iter()
        .map(|q| dist_to_set(q, &sa))
        .fold(0.0, f64::max);
    Ok(forward.max(backward))
}

/// Largest pairwise distance between particle positions of one point.
pub fn diam(p: &RealCenter) -> f64 {
    let mut best = 0.0f64;
    for i in 0..p.n {
        for j in (i + 1)..p.n {
            best = best.max(slice_sup_dist(p.particle(i), p.particle(j)));
        }
    }
    best
}

/// `dist(b, S_a^n) = max_i dist(b_i, S_a)`: the sup-norm distance from the
/// configuration `b` to the n-fold product of the particle set of `a`.
pub fn point_dist(b: &RealCenter, a: &RealCenter) -> f64 {
    let sa = a.particle_set();
    (0..b.n)
        .map(|i| dist_to_set(b.particle(i), &sa))
        .fold(0.0, f64::max)
}

/// Whether the boxes `Λ_L(a)` and `Λ_L(b)` are L-distant:
/// `max{dist(b, S_a^n), dist(a, S_b^n)} >= 2nL`.
pub fn is_l_distant(a: &RealCenter, b: &RealCenter, l: f64, n: usize) -> bool {
    point_dist(b, a).max(point_dist(a, b)) >= 2.0 * n as f64 * l
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(n: usize, d: usize, coords: &[i64]) -> ConfigPoint {
        ConfigPoint::new(n, d, coords.to_vec()).unwrap()
    }

    #[test]
    fn sup_norm_origin_is_zero() {
        assert_eq!(cp(2, 1, &[0, 0]).sup_norm(), 0.0);
    }

    #[test]
    fn sup_norm_is_max_abs_entry() {
        // x = ((3,-4),(1,2)) in n=2, d=2
        assert_eq!(cp(2, 2, &[3, -4, 1, 2]).sup_norm(), 4.0);
    }

    #[test]
    fn hausdorff_zero_for_equal_sets() {
        let a = cp(2, 1, &[0, 5]).to_real();
        let b = cp(2, 1, &[5, 0]).to_real();
        assert_eq!(hausdorff_distance(&a, &b).unwrap(), 0.0);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_rejects_mixed_dimension() {
        let a = cp(1, 1, &[0]).to_real();
        let b = cp(1, 2, &[0, 0]).to_real();
        assert!(hausdorff_distance(&a, &b).is_err());
    }

    #[test]
    fn diam_single_particle_is_zero() {
        assert_eq!(diam(&cp(1, 3, &[4, -2, 9]).to_real()), 0.0);
    }

    #[test]
    fn diam_two_particles() {
        assert_eq!(diam(&cp(2, 1, &[0, 7]).to_real()), 7.0);
    }

    #[test]
    fn l_distant_examples() {
        let a = cp(2, 1, &[0, 0]).to_real();
        assert!(!is_l_distant(&a, &a, 1.0, 2));
        let b = cp(2, 1, &[100, 100]).to_real();
        // dist = 100 >= 2*2*10 = 40
        assert!(is_l_distant(&a, &b, 10.0, 2));
        assert!(!is_l_distant(&a, &b, 30.0, 2));
    }

    #[test]
    fn select_keeps_particle_blocks() {
        let p = cp(3, 2, &[1, 2, 3, 4, 5, 6]);
        let q = p.select(&[2, 0]);
        assert_eq!(q.coords(), &[5, 6, 1, 2]);
    }
}
