//! The suitable ℓ-covering of a cubic box.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::point::{ConfigPoint, RealCenter};
use crate::geometry::rectangle::ParticleRectangle;
use crate::Result;

/// The suitable ℓ-covering of a parent cube of side `L`.
///
/// Member boxes have side ℓ and centers on the grid `x + αℓ Z^{nd}`
/// clipped to the closed cube of side `L` around `x`, with
/// `α = max([3/5, 4/5] ∩ {(L-ℓ)/(2ℓk) : k ∈ N})`. For admissible `α` the
/// grid indices run over `[-k, k]` per coordinate, so the cover holds
/// exactly `(2k+1)^{nd}` members.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuitableCover {
    parent: ParticleRectangle,
    ell: f64,
    alpha: f64,
    k: i64,
}

/// Build the suitable ℓ-covering of the cube of side `l` centered at `x`.
pub fn suitable_cover(l: f64, ell: f64, x: &RealCenter) -> Result<SuitableCover> {
    if !(ell >= 1.0) || !(l > ell) {
        return Err(Error::CoverPrecondition(format!(
            "need 1 <= ell < L, got ell={ell}, L={l}"
        )));
    }
    if ell > l / 6.0 {
        return Err(Error::CoverPrecondition(format!(
            "need ell <= L/6, got ell={ell}, L={l}"
        )));
    }
    let parent = ParticleRectangle::cube(x.clone(), l)?;
    // alpha = (L-ell)/(2*ell*k) decreases in k; the first admissible k
    // gives the maximal admissible alpha.
    let k_hi = ((l - ell) / (1.2 * ell)).ceil() as i64;
    for k in 1..=k_hi.max(1) {
        let alpha = (l - ell) / (2.0 * ell * k as f64);
        if (0.6..=0.8).contains(&alpha) {
            return Ok(SuitableCover {
                parent,
                ell,
                alpha,
                k,
            });
        }
    }
    Err(Error::NoValidAlpha { l, ell })
}

impl SuitableCover {
    pub fn parent(&self) -> &ParticleRectangle {
        &self.parent
    }

    pub fn ell(&self) -> f64 {
        self.ell
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn l(&self) -> f64 {
        self.parent.sides()[0]
    }

    /// Grid half-extent: centers are `x + αℓ z`, `z ∈ [-k, k]^{nd}`.
    pub fn k(&self) -> i64 {
        self.k
    }

    pub fn nd(&self) -> usize {
        self.parent.n() * self.parent.d()
    }

    /// Number of member boxes.
    pub fn center_count(&self) -> u128 {
        (2 * self.k as u128 + 1).pow(self.nd() as u32)
    }

    /// Center for a grid index vector `z` (entries in `[-k, k]`).
    ///
    /// Coordinates are `x + z (L-ℓ) / (2k)`, computed as one division of
    /// the exact product so the extreme grid points land exactly on
    /// `±(L-ℓ)/2` when that value is representable.
    pub fn center_at(&self, z: &[i64]) -> RealCenter {
        let x = self.parent.center();
        let span = self.l() - self.ell;
        let denom = 2.0 * self.k as f64;
        let coords = x
            .coords()
            .iter()
            .zip(z)
            .map(|(&xc, &zc)| xc + zc as f64 * span / denom)
            .collect();
        RealCenter::new(x.n(), x.d(), coords).expect("shape preserved")
    }

    /// One grid coordinate `x_c + z (L-ℓ) / (2k)`.
    pub fn grid_coord(&self, c: usize, z: i64) -> f64 {
        let span = self.l() - self.ell;
        self.parent.center().coords()[c] + z as f64 * span / (2.0 * self.k as f64)
    }

    /// All centers `Ξ` in lexicographic grid order.
    pub fn centers(&self) -> Vec<RealCenter> {
        let nd = self.nd();
        let mut out = Vec::new();
        let mut z = vec![-self.k; nd];
        loop {
            out.push(self.center_at(&z));
            let mut c = nd;
            loop {
                if c == 0 {
                    return out;
                }
                c -= 1;
                if z[c] < self.k {
                    z[c] += 1;
                    z[c + 1..nd].fill(-self.k);
                    break;
                }
            }
        }
    }

    /// The member box at a given center.
    pub fn member_box(&self, center: &RealCenter) -> ParticleRectangle {
        ParticleRectangle::cube(center.clone(), self.ell).expect("ell >= 1")
    }

    /// The cover-aligned box of side `K_j ℓ = (2 k_j α + 1) ℓ` at a grid center.
    pub fn scaled_box(&self, center: &RealCenter, kj: f64) -> ParticleRectangle {
        ParticleRectangle::cube(center.clone(), kj * self.ell).expect("side >= 1")
    }

    /// The member box assigned to a lattice point `b` of the parent:
    /// the lexicographically smallest center whose box contains
    /// `Λ_{ℓ/10}(b) ∩ parent`.
    pub fn cover_box_for(&self, b: &ConfigPoint) -> Result<ParticleRectangle> {
        let center = self.cover_center_for(b)?;
        Ok(self.member_box(&center))
    }

    /// Center of [`Self::cover_box_for`].
    pub fn cover_center_for(&self, b: &ConfigPoint) -> Result<RealCenter> {
        if !self.parent.contains(b) {
            return Err(Error::Contract(
                "cover_box_for requires a lattice point of the parent".into(),
            ));
        }
        let small = ParticleRectangle::cube(b.to_real(), (self.ell / 10.0).max(1.0))?;
        let nd = self.nd();
        let x = self.parent.center().coords();
        let step = self.alpha * self.ell;
        // Qualifying centers lie within ell of b per coordinate; scan that
        // window in lexicographic order.
        let mut lo = Vec::with_capacity(nd);
        let mut hi = Vec::with_capacity(nd);
        for (&bc, &xc) in b.coords().iter().zip(x.iter()).take(nd) {
            let t = (bc as f64 - xc) / step;
            lo.push(((t - 1.0 / self.alpha).floor() as i64).max(-self.k));
            hi.push(((t + 1.0 / self.alpha).ceil() as i64).min(self.k));
        }
        let small_pts = small.lattice_points()?;
        let mut z: Vec<i64> = lo.clone();
        loop {
            let center = self.center_at(&z);
            let member = self.member_box(&center);
            let ok = small_pts
                .iter()
                .filter(|p| self.parent.contains(p))
                .all(|p| member.contains(p));
            if ok {
                return Ok(center);
            }
            let mut c = nd;
            loop {
                if c == 0 {
                    return Err(Error::Contract(
                        "no qualifying cover box; covering guarantee violated".into(),
                    ));
                }
                c -= 1;
                if z[c] < hi[c] {
                    z[c] += 1;
                    z[c + 1..nd].copy_from_slice(&lo[c + 1..nd]);
                    break;
                }
            }
        }
    }
}
