//! Agglomeration of bad cover boxes into a buffered union of grid-centered
//! boxes whose exterior stays ℓ-distant from every bad box.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::geometry::cover::SuitableCover;
use crate::geometry::point::{ConfigPoint, RealCenter};
use crate::geometry::rectangle::{lattice_distance, ParticleRectangle};
use crate::Result;

/// Side multipliers for the agglomerated boxes.
///
/// `k_1 = 6`, `k_j = min{k in N : k > k_{j-1} + 6 + 2/(Nα)}`, and
/// `K_j = 2 k_j N α + 1`. Returns `(k_j, K_j)` for `j = 1..=count`.
pub fn multiplier_sequence(n_particles: usize, alpha: f64, count: usize) -> Vec<(u64, f64)> {
    let na = n_particles as f64 * alpha;
    let mut out = Vec::with_capacity(count);
    let mut k = 6u64;
    for j in 0..count {
        if j > 0 {
            let lower = k as f64 + 6.0 + 2.0 / na;
            let mut next = lower.floor() as u64 + 1;
            // strict inequality: bump when the bound is attained exactly
            if (next as f64) <= lower {
                next += 1;
            }
            k = next;
        }
        out.push((k, 2.0 * k as f64 * na + 1.0));
    }
    out
}

/// Union of grid-centered boxes `Λ_{K_{j_t} ℓ}(u_t)` isolating the bad
/// cover boxes from the rest of the parent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BadRegion {
    ell: f64,
    centers: Vec<RealCenter>,
    multipliers: Vec<usize>,
    sizes: Vec<f64>,
}

impl BadRegion {
    pub fn ell(&self) -> f64 {
        self.ell
    }

    /// Centers `u_t` (grid points of the cover).
    pub fn centers(&self) -> &[RealCenter] {
        &self.centers
    }

    /// Multipliers `j_t` (1-based indices into the `K_j` sequence).
    pub fn multipliers(&self) -> &[usize] {
        &self.multipliers
    }

    /// Box sides `K_{j_t} ℓ`.
    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn member_boxes(&self) -> Vec<ParticleRectangle> {
        self.centers
            .iter()
            .zip(&self.sizes)
            .map(|(u, &s)| ParticleRectangle::cube(u.clone(), s).expect("side >= 1"))
            .collect()
    }

    /// Whether a lattice point lies in the union.
    pub fn contains(&self, p: &ConfigPoint) -> bool {
        self.member_boxes().iter().any(|b| b.contains(p))
    }

    /// `Σ_t K_{j_t}`.
    pub fn sum_kj(&self) -> f64 {
        self.sizes.iter().map(|s| s / self.ell).sum()
    }
}

/// Real-interval hull tracked per flattened coordinate.
#[derive(Debug, Clone)]
struct Cluster {
    lo: Vec<f64>,
    hi: Vec<f64>,
    weight: usize,
    snapped: Option<(Vec<i64>, usize)>,
}

/// Build the bad region for a set of bad cover centers.
///
/// Greedy agglomeration: start from the `(4N+2)ℓ` halos around every
/// point of `S_a^N` for each bad center `a`, snap each to the smallest
/// `K_j ℓ` box centered on the cover grid that contains it and fits in
/// the parent, then merge any pair of boxes at lattice distance `<= 1`
/// and re-snap until the members are pairwise more than 1 apart. The
/// construction is accepted solely through its postconditions; when the
/// parent cannot accommodate it, `RegionOverflow` is returned and the
/// caller treats the whole parent as bad.
pub fn build_bad_region(cover: &SuitableCover, bad_centers: &[RealCenter]) -> Result<BadRegion> {
    let s = bad_centers.len();
    if s == 0 {
        return Err(Error::Contract("at least one bad center required".into()));
    }
    let n = cover.parent().n();
    let d = cover.parent().d();
    let nd = n * d;
    let ell = cover.ell();
    let overflow = || Error::RegionOverflow { s, ell };

    for a in bad_centers {
        if grid_index(cover, a).is_none() {
            return Err(Error::Contract(
                "bad centers must be centers of the suitable cover".into(),
            ));
        }
    }

    // Halo hulls: one per distinct b in S_a^N over all bad centers.
    let halo_half = (4.0 * n as f64 + 2.0) * ell / 2.0;
    let parent = cover.parent();
    let (plo, phi): (Vec<f64>, Vec<f64>) = {
        let x = parent.center().coords();
        let half = cover.l() / 2.0;
        (
            x.iter().map(|&c| c - half).collect(),
            x.iter().map(|&c| c + half).collect(),
        )
    };
    let mut seen = std::collections::BTreeSet::new();
    let mut clusters: Vec<Cluster> = Vec::new();
    for a in bad_centers {
        let set = a.particle_set();
        let m = set.len();
        // the n-fold product of the particle set, decoded base-m
        let total = m.pow(n as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut coords = Vec::with_capacity(nd);
            for _ in 0..n {
                coords.extend_from_slice(set[rem % m]);
                rem /= m;
            }
            let key: Vec<u64> = coords.iter().map(|c| c.to_bits()).collect();
            if seen.insert(key) {
                let lo: Vec<f64> = coords
                    .iter()
                    .enumerate()
                    .map(|(c, &v)| (v - halo_half).max(plo[c]))
                    .collect();
                let hi: Vec<f64> = coords
                    .iter()
                    .enumerate()
                    .map(|(c, &v)| (v + halo_half).min(phi[c]))
                    .collect();
                if lo.iter().zip(&hi).all(|(l, h)| l <= h) {
                    clusters.push(Cluster {
                        lo,
                        hi,
                        weight: 1,
                        snapped: None,
                    });
                }
            }
        }
    }
    if clusters.is_empty() {
        return Err(Error::Contract("bad centers produced no halos".into()));
    }

    let table = multiplier_sequence(n, cover.alpha(), 64);
    for cl in &mut clusters {
        cl.snapped = Some(snap(cover, &table, cl).ok_or_else(overflow)?);
    }

    // Merge until all member boxes are pairwise more than 1 apart.
    loop {
        let boxes: Vec<ParticleRectangle> = clusters
            .iter()
            .map(|cl| {
                let (z, j) = cl.snapped.as_ref().unwrap();
                cover.scaled_box(&cover.center_at(z), table[j - 1].1)
            })
            .collect();
        let mut merge_pair = None;
        'search: for t in 0..boxes.len() {
            for u in t + 1..boxes.len() {
                if lattice_distance(&boxes[t], &boxes[u]) <= 1 {
                    merge_pair = Some((t, u));
                    break 'search;
                }
            }
        }
        let Some((t, u)) = merge_pair else { break };
        let other = clusters.remove(u);
        let target = &mut clusters[t];
        for c in 0..nd {
            target.lo[c] = target.lo[c].min(other.lo[c]);
            target.hi[c] = target.hi[c].max(other.hi[c]);
        }
        target.weight += other.weight;
        target.snapped = Some(snap(cover, &table, target).ok_or_else(overflow)?);
    }

    let mut centers = Vec::with_capacity(clusters.len());
    let mut multipliers = Vec::with_capacity(clusters.len());
    let mut sizes = Vec::with_capacity(clusters.len());
    for cl in &clusters {
        let (z, j) = cl.snapped.as_ref().unwrap();
        centers.push(cover.center_at(z));
        multipliers.push(*j);
        sizes.push(table[*j - 1].1 * ell);
    }
    let region = BadRegion {
        ell,
        centers,
        multipliers,
        sizes,
    };

    // Postconditions that the greedy cannot guarantee a priori.
    let nf = n as f64;
    if region.sum_kj() > 17.0 * s as f64 * nf.powi(n as i32 + 1) + 1e-9 {
        return Err(overflow());
    }
    for b in region.member_boxes() {
        if !b.lattice_subset_of(parent) {
            return Err(overflow());
        }
    }
    Ok(region)
}

/// Grid index of a cover center, if it is one.
fn grid_index(cover: &SuitableCover, a: &RealCenter) -> Option<Vec<i64>> {
    let x = cover.parent().center().coords();
    let step = cover.alpha() * cover.ell();
    let mut z = Vec::with_capacity(a.coords().len());
    for (c, &v) in a.coords().iter().enumerate() {
        let t = ((v - x[c]) / step).round() as i64;
        if t.abs() > cover.k() || (cover.grid_coord(c, t) - v).abs() > 1e-9 {
            return None;
        }
        z.push(t);
    }
    Some(z)
}

/// Smallest `(z, j)` such that the real box of side `K_j ℓ` at grid point
/// `z` contains the cluster hull and its lattice set fits in the parent.
/// The scan is per-coordinate because both conditions factor.
fn snap(
    cover: &SuitableCover,
    table: &[(u64, f64)],
    cl: &Cluster,
) -> Option<(Vec<i64>, usize)> {
    let nd = cl.lo.len();
    let parent = cover.parent();
    let x = parent.center().coords();
    let step = cover.alpha() * cover.ell();
    let start_j = cl.snapped.as_ref().map(|(_, j)| *j).unwrap_or(1);
    'next_j: for (ji, &(_, kj)) in table.iter().enumerate().skip(start_j - 1) {
        let half = kj * cover.ell() / 2.0;
        if kj * cover.ell() > cover.l() {
            return None;
        }
        let mut z = Vec::with_capacity(nd);
        for (c, &xc) in x.iter().enumerate().take(nd) {
            let (plo, phi) = parent_range(parent, c);
            // coverage: u - half <= lo and hi <= u + half
            let zmin = ((cl.hi[c] - half - xc) / step).ceil() as i64;
            let zmax = ((cl.lo[c] + half - xc) / step).floor() as i64;
            let mut found = None;
            for cand in zmin.max(-cover.k())..=zmax.min(cover.k()) {
                let u = cover.grid_coord(c, cand);
                let lo_i = (u - half).ceil() as i64;
                let hi_i = (u + half).floor() as i64;
                if lo_i >= plo && hi_i <= phi && u - half <= cl.lo[c] && cl.hi[c] <= u + half {
                    found = Some(cand);
                    break;
                }
            }
            match found {
                Some(cand) => z.push(cand),
                None => continue 'next_j,
            }
        }
        return Some((z, ji + 1));
    }
    None
}

fn parent_range(parent: &ParticleRectangle, c: usize) -> (i64, i64) {
    parent.coord_range(c)
}
