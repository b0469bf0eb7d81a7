use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::TriflingRegion;
use crate::error::{invalid, Result};

/// Which part of the box is sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionFilter {
    FullCube,
    /// Drop every point inside `Ω`.
    ExcludeTrifling(TriflingRegion),
}

/// A uniform lattice on `[lo, hi]^d` plus one seeded uniform point in each lattice cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub d: usize,
    pub points_per_axis: usize,
    pub region_filter: RegionFilter,
    pub seed: u64,
    pub lo: f64,
    pub hi: f64,
}

impl GridSpec {
    pub fn new(d: usize, points_per_axis: usize, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("d", "must be at least 1"));
        }
        if points_per_axis < 2 {
            return Err(invalid("grid", format!("need at least 2 points per axis, got {points_per_axis}")));
        }
        if (points_per_axis as f64).powi(d as i32) > 5e7 {
            return Err(invalid("grid", format!("{points_per_axis}^{d} points is too many")));
        }
        Ok(Self {
            d,
            points_per_axis,
            region_filter: RegionFilter::FullCube,
            seed,
            lo: 0.0,
            hi: 1.0,
        })
    }

    /// Roughly `total` lattice points spread over `d` axes.
    pub fn with_total(d: usize, total: usize, seed: u64) -> Result<Self> {
        let per_axis = (total.max(2) as f64).powf(1.0 / d.max(1) as f64).round() as usize;
        Self::new(d, per_axis.max(2), seed)
    }

    pub fn excluding(mut self, region: TriflingRegion) -> Result<Self> {
        if region.dim() != self.d {
            return Err(invalid("region", format!("region has d = {}, grid has d = {}", region.dim(), self.d)));
        }
        self.region_filter = RegionFilter::ExcludeTrifling(region);
        Ok(self)
    }

    pub fn on_interval(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("interval", format!("need finite lo < hi, got [{lo}, {hi}]")));
        }
        self.lo = lo;
        self.hi = hi;
        Ok(self)
    }

    /// Lattice spacing.
    pub fn pitch(&self) -> f64 {
        (self.hi - self.lo) / (self.points_per_axis - 1) as f64
    }

    fn keep(&self, x: &[f64]) -> bool {
        match &self.region_filter {
            RegionFilter::FullCube => true,
            RegionFilter::ExcludeTrifling(r) => !r.contains(x),
        }
    }

    /// Lattice points in lexicographic order, then the jitter points.
    pub fn points(&self) -> Vec<Vec<f64>> {
        let m = self.points_per_axis;
        let h = self.pitch();
        let mut out = Vec::new();
        let mut idx = vec![0usize; self.d];
        let coord = |i: usize| if i + 1 == m { self.hi } else { self.lo + i as f64 * h };
        loop {
            let x: Vec<f64> = idx.iter().map(|&i| coord(i)).collect();
            if self.keep(&x) {
                out.push(x);
            }
            if !advance(&mut idx, m) {
                break;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut idx = vec![0usize; self.d];
        loop {
            let x: Vec<f64> = idx
                .iter()
                .map(|&i| (self.lo + (i as f64 + rng.gen::<f64>()) * h).min(self.hi))
                .collect();
            if self.keep(&x) {
                out.push(x);
            }
            if !advance(&mut idx, m - 1) {
                break;
            }
        }
        out
    }
}

/// Odometer step over `{0..m−1}^d` with the last axis fastest; false after the last index.
fn advance(idx: &mut [usize], m: usize) -> bool {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < m {
            return true;
        }
        idx[i] = 0;
    }
    false
}
