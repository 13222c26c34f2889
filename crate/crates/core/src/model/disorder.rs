//! Seeded disorder fields on single-particle lattice regions.
//!
//! Every site value is a pure function of `(seed, sample_index, site)`,
//! so a sample is reproducible bit-for-bit regardless of evaluation
//! order, region shape, or worker count, and sub-boxes sharing an
//! ambient field automatically agree on shared sites.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::params::ModelParams;
use crate::Result;

/// Axis-aligned lattice region in `Z^d` given by closed integer ranges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SiteRegion {
    lo: Vec<i64>,
    hi: Vec<i64>,
}

impl SiteRegion {
    pub fn new(lo: Vec<i64>, hi: Vec<i64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::ShapeMismatch("region bounds must match".into()));
        }
        if lo.iter().zip(&hi).any(|(l, h)| l > h) {
            return Err(Error::Contract("empty site region".into()));
        }
        Ok(Self { lo, hi })
    }

    /// Smallest region covering the projections of the given rectangles.
    pub fn covering(rects: &[&crate::geometry::ParticleRectangle]) -> Result<Self> {
        let mut ranges = Vec::new();
        for r in rects {
            for i in 0..r.n() {
                ranges.push(r.particle_box(i));
            }
        }
        Self::hull(&ranges)
    }

    /// Hull of a list of per-dimension integer ranges.
    pub fn hull(ranges: &[Vec<(i64, i64)>]) -> Result<Self> {
        let d = ranges
            .first()
            .ok_or_else(|| Error::Contract("empty hull".into()))?
            .len();
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for r in ranges {
            for (c, &(l, h)) in r.iter().enumerate() {
                lo[c] = lo[c].min(l);
                hi[c] = hi[c].max(h);
            }
        }
        Self::new(lo, hi)
    }

    pub fn d(&self) -> usize {
        self.lo.len()
    }

    pub fn contains(&self, site: &[i64]) -> bool {
        site.len() == self.lo.len()
            && site
                .iter()
                .enumerate()
                .all(|(c, &v)| self.lo[c] <= v && v <= self.hi[c])
    }

    pub fn site_count(&self) -> usize {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| (h - l + 1) as usize)
            .product()
    }

    /// Sites in lexicographic order.
    pub fn sites(&self) -> Vec<Vec<i64>> {
        let d = self.d();
        let mut out = Vec::with_capacity(self.site_count());
        let mut cur = self.lo.clone();
        loop {
            out.push(cur.clone());
            let mut c = d;
            loop {
                if c == 0 {
                    return out;
                }
                c -= 1;
                if cur[c] < self.hi[c] {
                    cur[c] += 1;
                    cur[c + 1..d].copy_from_slice(&self.lo[c + 1..d]);
                    break;
                }
            }
        }
    }

    fn index_of(&self, site: &[i64]) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let mut idx = 0usize;
        for (c, &v) in site.iter().enumerate() {
            let width = (self.hi[c] - self.lo[c] + 1) as usize;
            idx = idx * width + (v - self.lo[c]) as usize;
        }
        Some(idx)
    }
}

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// Uniform draw in `[0, 1)` for a `(seed, sample_index, site)` triple.
///
/// The triple is mixed into a 256-bit ChaCha8 key; a single block drives
/// the value. This is the counter-based generator contract: the output
/// never depends on how many other sites were evaluated, or in which
/// order, or on how many threads did the work.
pub fn site_value(seed: u64, sample_index: u64, site: &[i64]) -> f64 {
    let mut state = seed ^ 0x243f6a8885a308d3;
    let mut mixed = splitmix64(&mut state);
    state ^= sample_index.wrapping_mul(0x9e3779b97f4a7c15);
    mixed ^= splitmix64(&mut state);
    for &c in site {
        state ^= (c as u64).wrapping_mul(0xd1342543de82ef95);
        mixed ^= splitmix64(&mut state);
    }
    let mut key = [0u8; 32];
    for (i, chunk) in key.chunks_mut(8).enumerate() {
        state ^= mixed.rotate_left(i as u32 * 16 + 1);
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    let word = ChaCha8Rng::from_seed(key).next_u64();
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// A realization of the single-particle random field on a region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisorderSample {
    region: SiteRegion,
    values: Vec<f64>,
    seed: u64,
    sample_index: u64,
}

impl DisorderSample {
    pub fn region(&self) -> &SiteRegion {
        &self.region
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn sample_index(&self) -> u64 {
        self.sample_index
    }

    /// Field value at a site of the region.
    pub fn value(&self, site: &[i64]) -> Result<f64> {
        self.region
            .index_of(site)
            .map(|i| self.values[i])
            .ok_or_else(|| Error::SampleMissingSite(site.to_vec()))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Draw an i.i.d. field from the model density over a region.
pub fn sample_disorder(
    params: &ModelParams,
    region: &SiteRegion,
    seed: u64,
    sample_index: u64,
) -> DisorderSample {
    let values = region
        .sites()
        .iter()
        .map(|site| params.rho.quantile(site_value(seed, sample_index, site)))
        .collect();
    DisorderSample {
        region: region.clone(),
        values,
        seed,
        sample_index,
    }
}
