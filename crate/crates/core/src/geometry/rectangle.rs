//! Particle rectangles: products of per-particle sup-norm boxes.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::point::{ConfigPoint, RealCenter};
use crate::Result;

/// Default cap on enumerated lattice points of a single rectangle.
pub const DEFAULT_POINT_CAP: usize = 1 << 22;

/// A product `Π_i Λ_{L_i}(x_i)` of single-particle boxes, possibly with a
/// real center. Its lattice point set is
/// `{ y in Z^{nd} : ||y_i - x_i||_inf <= L_i/2 for each particle i }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleRectangle {
    center: RealCenter,
    sides: Vec<f64>,
}

impl ParticleRectangle {
    pub fn new(center: RealCenter, sides: Vec<f64>) -> Result<Self> {
        if sides.len() != center.n() {
            return Err(Error::ShapeMismatch(format!(
                "{} side lengths for {} particles",
                sides.len(),
                center.n()
            )));
        }
        if sides.iter().any(|&s| !(s >= 1.0) || !s.is_finite()) {
            return Err(Error::Contract("side lengths must be finite and >= 1".into()));
        }
        Ok(Self { center, sides })
    }

    /// A cube: every particle box has the same side `l`.
    pub fn cube(center: RealCenter, l: f64) -> Result<Self> {
        let n = center.n();
        Self::new(center, vec![l; n])
    }

    pub fn center(&self) -> &RealCenter {
        &self.center
    }

    pub fn sides(&self) -> &[f64] {
        &self.sides
    }

    pub fn n(&self) -> usize {
        self.center.n()
    }

    pub fn d(&self) -> usize {
        self.center.d()
    }

    /// Side length when the rectangle is a cube.
    pub fn cube_side(&self) -> Option<f64> {
        let s = self.sides[0];
        self.sides.iter().all(|&t| t == s).then_some(s)
    }

    /// Smallest side, the scale used by resonance thresholds.
    pub fn min_side(&self) -> f64 {
        self.sides.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Largest side, the circumscribing cube scale used by Wegner bounds.
    pub fn max_side(&self) -> f64 {
        self.sides.iter().cloned().fold(0.0, f64::max)
    }

    /// Integer range `[lo, hi]` of flattened coordinate `c`.
    pub fn coord_range(&self, c: usize) -> (i64, i64) {
        let d = self.d();
        let half = self.sides[c / d] / 2.0;
        let x = self.center.coords()[c];
        ((x - half).ceil() as i64, (x + half).floor() as i64)
    }

    /// Whether the flattened integer coordinates lie in the rectangle.
    pub fn contains_coords(&self, coords: &[i64]) -> bool {
        debug_assert_eq!(coords.len(), self.n() * self.d());
        coords.iter().enumerate().all(|(c, &v)| {
            let (lo, hi) = self.coord_range(c);
            lo <= v && v <= hi
        })
    }

    pub fn contains(&self, p: &ConfigPoint) -> bool {
        self.contains_coords(p.coords())
    }

    /// Whether every lattice point of `self` lies in `other`.
    ///
    /// Product structure makes this a per-coordinate interval containment.
    pub fn lattice_subset_of(&self, other: &ParticleRectangle) -> bool {
        if self.n() != other.n() || self.d() != other.d() {
            return false;
        }
        (0..self.n() * self.d()).all(|c| {
            let (lo_s, hi_s) = self.coord_range(c);
            let (lo_o, hi_o) = other.coord_range(c);
            lo_s > hi_s || (lo_o <= lo_s && hi_s <= hi_o)
        })
    }

    /// Number of lattice points, computed without enumeration.
    pub fn point_count(&self) -> u128 {
        let mut count: u128 = 1;
        for c in 0..self.n() * self.d() {
            let (lo, hi) = self.coord_range(c);
            if hi < lo {
                return 0;
            }
            count = count.saturating_mul((hi - lo + 1) as u128);
        }
        count
    }

    /// All lattice points in lexicographic order of flattened coordinates.
    pub fn lattice_points(&self) -> Result<Vec<ConfigPoint>> {
        self.lattice_points_capped(DEFAULT_POINT_CAP)
    }

    pub fn lattice_points_capped(&self, cap: usize) -> Result<Vec<ConfigPoint>> {
        let count = self.point_count();
        if count > cap as u128 {
            return Err(Error::BoxTooLarge { count, cap });
        }
        let nd = self.n() * self.d();
        let ranges: Vec<(i64, i64)> = (0..nd).map(|c| self.coord_range(c)).collect();
        let mut out = Vec::with_capacity(count as usize);
        let mut cur: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        if count == 0 {
            return Ok(out);
        }
        loop {
            out.push(ConfigPoint::new(self.n(), self.d(), cur.clone())?);
            // odometer with the last coordinate fastest: lexicographic order
            let mut c = nd;
            loop {
                if c == 0 {
                    return Ok(out);
                }
                c -= 1;
                if cur[c] < ranges[c].1 {
                    cur[c] += 1;
                    for r in c + 1..nd {
                        cur[r] = ranges[r].0;
                    }
                    break;
                }
            }
        }
    }

    /// Single-particle box of particle `i` as integer ranges per dimension.
    pub fn particle_box(&self, i: usize) -> Vec<(i64, i64)> {
        let d = self.d();
        (0..d).map(|j| self.coord_range(i * d + j)).collect()
    }

    /// The sub-rectangle with only the given particle indices.
    pub fn select(&self, indices: &[usize]) -> ParticleRectangle {
        ParticleRectangle {
            center: self.center.select(indices),
            sides: indices.iter().map(|&i| self.sides[i]).collect(),
        }
    }
}

fn boxes_intersect(a: &[(i64, i64)], b: &[(i64, i64)]) -> bool {
    a.iter()
        .zip(b)
        .all(|(&(lo1, hi1), &(lo2, hi2))| lo1 <= hi2 && lo2 <= hi1)
}

/// Sup-norm distance between the lattice point sets of two single-particle
/// boxes given as per-dimension integer ranges (0 when they intersect).
fn box_gap(a: &[(i64, i64)], b: &[(i64, i64)]) -> i64 {
    a.iter()
        .zip(b)
        .map(|(&(lo1, hi1), &(lo2, hi2))| (lo2 - hi1).max(lo1 - hi2).max(0))
        .max()
        .unwrap_or(0)
}

/// Sup-norm distance between the lattice sets of two rectangles of the
/// same shape (product sets, so the distance is per-coordinate).
pub fn lattice_distance(a: &ParticleRectangle, b: &ParticleRectangle) -> i64 {
    let nd = a.n() * a.d();
    (0..nd)
        .map(|c| {
            let (lo1, hi1) = a.coord_range(c);
            let (lo2, hi2) = b.coord_range(c);
            (lo2 - hi1).max(lo1 - hi2).max(0)
        })
        .max()
        .unwrap_or(0)
}

impl ParticleRectangle {
    /// Whether some single-particle factor of one rectangle misses every
    /// single-particle projection of the other.
    pub fn partially_separated(&self, other: &ParticleRectangle) -> bool {
        let misses_all = |r: &ParticleRectangle, s: &ParticleRectangle| -> bool {
            (0..r.n()).any(|i| {
                let bi = r.particle_box(i);
                (0..s.n()).all(|j| !boxes_intersect(&bi, &s.particle_box(j)))
            })
        };
        misses_all(self, other) || misses_all(other, self)
    }

    /// Whether the full single-particle projections are disjoint.
    pub fn fully_separated(&self, other: &ParticleRectangle) -> bool {
        (0..self.n()).all(|i| {
            let bi = self.particle_box(i);
            (0..other.n()).all(|j| !boxes_intersect(&bi, &other.particle_box(j)))
        })
    }
}

/// Boundary edges `(u, v)` paired with the distinct outer vertices.
pub type Boundary = (Vec<(ConfigPoint, ConfigPoint)>, Vec<ConfigPoint>);

/// Inner/outer boundary of `inner` inside `outer`.
///
/// Edges are ordered pairs `(u, v)` with `u` in the inner set, `v` in
/// `outer \ inner`, and `||u - v||_1 = 1`; the vertex part collects the
/// distinct second components in lexicographic order.
pub fn boundary(inner: &ParticleRectangle, outer: &ParticleRectangle) -> Result<Boundary> {
    if !inner.lattice_subset_of(outer) {
        return Err(Error::NotNested);
    }
    let nd = inner.n() * inner.d();
    let mut edges = Vec::new();
    let mut plus = std::collections::BTreeSet::new();
    for u in inner.lattice_points()? {
        for c in 0..nd {
            for step in [-1i64, 1] {
                let mut coords = u.coords().to_vec();
                coords[c] += step;
                if !inner.contains_coords(&coords) && outer.contains_coords(&coords) {
                    let v = ConfigPoint::new(u.n(), u.d(), coords)?;
                    plus.insert(v.clone());
                    edges.push((u.clone(), v));
                }
            }
        }
    }
    Ok((edges, plus.into_iter().collect()))
}

/// Outcome of the interactivity classification of a cubic box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Interactivity {
    /// Fully interactive: no partition of the particles works.
    Fi,
    /// Partially interactive with a witness particle subset.
    Pi { witness: Vec<usize> },
}

/// Decide whether a cubic box is partially interactive for range `r0`.
///
/// Builds the graph on particle indices with an edge whenever the
/// sup-norm distance between the two single-particle lattice boxes is
/// `<= r0`; the box is PI exactly when the graph is disconnected, and the
/// witness is the connected component containing particle 0.
pub fn classify_interactivity(rect: &ParticleRectangle, r0: f64) -> Result<Interactivity> {
    if rect.cube_side().is_none() {
        return Err(Error::Contract(
            "interactivity is defined for cubic boxes".into(),
        ));
    }
    let n = rect.n();
    if n == 1 {
        return Ok(Interactivity::Fi);
    }
    let boxes: Vec<Vec<(i64, i64)>> = (0..n).map(|i| rect.particle_box(i)).collect();
    let mut adj = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if (box_gap(&boxes[i], &boxes[j]) as f64) <= r0 {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
    }
    // component of particle 0
    let mut seen = vec![false; n];
    let mut stack = vec![0usize];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        Ok(Interactivity::Fi)
    } else {
        Ok(Interactivity::Pi {
            witness: (0..n).filter(|&i| seen[i]).collect(),
        })
    }
}
