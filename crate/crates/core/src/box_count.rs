//! Box-counting dimension of mixed-state point clouds.
//!
//! The cloud is an empirical sample of the Blackwell measure, so each box
//! carries the fraction of points in it. `d_bc` is the slope of the
//! coarse-grained entropy `H_eps` against `log2(1/eps)`; the slope of the raw
//! occupied-box count `N(eps)` (capacity dimension of the support) is kept
//! alongside as `d_capacity`. Three-state clouds are drawn in the equilateral (barycentric) embedding;
//! other sizes drop the last coordinate. Boxes are axis-aligned and anchored
//! at the origin of the embedding.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::info::neg_plogp;
use crate::mixed_state::PointCloud;

const SQRT3_2: f64 = 0.866_025_403_784_438_6;

/// `2^-3 .. 2^-10`.
pub fn default_eps_grid() -> Vec<f64> {
    (3..=10).map(|k| 0.5f64.powi(k)).collect()
}

/// Maps a distribution over three states to the triangle
/// `(0,0), (1,0), (1/2, sqrt(3)/2)`.
pub fn barycentric(p: &[f64]) -> [f64; 2] {
    [p[1] + 0.5 * p[2], SQRT3_2 * p[2]]
}

/// Planar or `(N-1)`-dimensional coordinates used for counting.
pub fn embed(cloud: &PointCloud) -> (usize, Vec<f64>) {
    let n = cloud.dim();
    if n == 3 {
        let coords = cloud.points().flat_map(barycentric).collect();
        (2, coords)
    } else {
        let d = n.saturating_sub(1);
        let coords = cloud.points().flat_map(|p| p[..d].iter().copied()).collect();
        (d, coords)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleCount {
    pub eps: f64,
    pub boxes: usize,
    /// Entropy of the box occupation frequencies, bits.
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoxCountFit {
    /// Slope of `H_eps` against `log2(1/eps)`.
    pub d_bc: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Slope of `log2 N(eps)` against `log2(1/eps)`.
    pub d_capacity: f64,
    pub scales: Vec<ScaleCount>,
}

impl BoxCountFit {
    /// Entropy slopes between consecutive scales, for spotting drift.
    pub fn local_slopes(&self) -> Vec<f64> {
        self.pairwise(|s| s.entropy)
    }

    pub fn capacity_local_slopes(&self) -> Vec<f64> {
        self.pairwise(|s| (s.boxes as f64).log2())
    }

    fn pairwise(&self, y: impl Fn(&ScaleCount) -> f64) -> Vec<f64> {
        self.scales
            .windows(2)
            .map(|w| (y(&w[1]) - y(&w[0])) / (w[0].eps / w[1].eps).log2())
            .collect()
    }
}

fn occupancy(counts: impl Iterator<Item = usize>, total: usize) -> (usize, f64) {
    let total = total as f64;
    let mut boxes = 0;
    let mut entropy = 0.0;
    for c in counts {
        boxes += 1;
        entropy += neg_plogp(c as f64 / total);
    }
    (boxes, entropy)
}

fn count_boxes(dim: usize, coords: &[f64], eps: f64) -> (usize, f64) {
    let cell = |x: f64| (x / eps).floor() as i64;
    if dim == 0 {
        return (1, 0.0);
    }
    let points = coords.len() / dim;
    if dim <= 4 {
        // 32 bits per axis is plenty for the unit simplex at eps >= 2^-30.
        let mut counts: HashMap<u128, usize> = HashMap::new();
        for p in coords.chunks_exact(dim) {
            let key = p
                .iter()
                .fold(0u128, |k, &x| (k << 32) | u128::from(cell(x) as u32));
            *counts.entry(key).or_default() += 1;
        }
        occupancy(counts.into_values(), points)
    } else {
        let mut counts: HashMap<Vec<i64>, usize> = HashMap::new();
        for p in coords.chunks_exact(dim) {
            *counts.entry(p.iter().map(|&x| cell(x)).collect()).or_default() += 1;
        }
        occupancy(counts.into_values(), points)
    }
}

/// Least-squares `(slope, intercept, r^2)`.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (slope, my - slope * mx, r_squared)
}

pub fn box_counting_dimension(cloud: &PointCloud, eps_grid: &[f64]) -> Result<BoxCountFit> {
    if cloud.len() < 2 {
        return Err(Error::DegenerateCloud { points: cloud.len() });
    }
    if eps_grid.len() < 2 || eps_grid.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument(
            "box-counting needs at least two positive scales".into(),
        ));
    }
    let (dim, coords) = embed(cloud);
    let scales: Vec<ScaleCount> = eps_grid
        .par_iter()
        .map(|&eps| {
            let (boxes, entropy) = count_boxes(dim, &coords, eps);
            ScaleCount { eps, boxes, entropy }
        })
        .collect();

    let xs: Vec<f64> = scales.iter().map(|s| -s.eps.log2()).collect();
    if xs.iter().all(|&x| x == xs[0]) {
        return Err(Error::InvalidArgument("box-counting scales must differ".into()));
    }
    let hs: Vec<f64> = scales.iter().map(|s| s.entropy).collect();
    let ns: Vec<f64> = scales.iter().map(|s| (s.boxes as f64).log2()).collect();
    let (d_bc, intercept, r_squared) = fit_line(&xs, &hs);
    let (d_capacity, _, _) = fit_line(&xs, &ns);
    Ok(BoxCountFit {
        d_bc,
        intercept,
        r_squared,
        d_capacity,
        scales,
    })
}
