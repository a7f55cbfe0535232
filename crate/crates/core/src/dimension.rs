//! Dimension estimates for the Blackwell attractor.
//!
//! `d_lce` is the Kaplan-Yorke (Lyapunov) dimension of the tangent spectrum
//! with the entropy rate playing the role of the expanding direction:
//! `d = k + (h + lambda_1 + ... + lambda_k) / |lambda_{k+1}|`, where `k` is the
//! largest index keeping the partial sum positive.

use std::collections::HashSet;

use crate::box_count::{box_counting_dimension, default_eps_grid, embed, BoxCountFit};
use crate::error::{Error, Result};
use crate::hmm::LabeledHmm;
use crate::info::{neg_plogp, BatchMeans};
use crate::lce::{LceAccumulator, LceEstimate};
use crate::mixed_state::{
    propagate, MixedState, MixedStateWalk, PointCloud, TrajectoryEstimate, DEFAULT_BURN_IN,
    MIN_TRAJECTORY_LENGTH,
};

/// Returns `(k, d_lce)` with `d_lce` clamped to `[0, n_states - 1]`.
pub fn d_lce(hmu: f64, exponents: &[f64], n_states: usize) -> Result<(usize, f64)> {
    if exponents.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if exponents.iter().any(|l| !l.is_finite()) || !hmu.is_finite() {
        return Err(Error::InvalidArgument("exponents and entropy rate must be finite".into()));
    }
    if exponents.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::InvalidArgument("exponents must be sorted descending".into()));
    }
    let cap = n_states.saturating_sub(1) as f64;
    let h = hmu.max(0.0);
    let mut k = 0;
    let mut partial = h;
    for (i, &l) in exponents.iter().enumerate() {
        if partial + l > 0.0 {
            k = i + 1;
            partial += l;
        } else {
            break;
        }
    }
    let d = match exponents.get(k) {
        Some(&next) => k as f64 + partial / next.abs(),
        None => cap,
    };
    Ok((k, d.clamp(0.0, cap)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitConfig {
    pub length: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub reorth_every: usize,
    pub decimation: Option<usize>,
    pub lce: bool,
}

impl OrbitConfig {
    pub fn new(length: usize, seed: u64) -> Self {
        OrbitConfig {
            length,
            burn_in: DEFAULT_BURN_IN,
            seed,
            reorth_every: 1,
            decimation: None,
            lce: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitAnalysis {
    pub trajectory: TrajectoryEstimate,
    pub lce: Option<LceEstimate>,
}

/// Entropy rate, Lyapunov spectrum and point cloud from one orbit.
///
/// Matches `iterate_trajectory` and `lce_spectrum` run separately with the
/// same seed and burn-in.
pub fn analyze_orbit(machine: &LabeledHmm, config: &OrbitConfig) -> Result<OrbitAnalysis> {
    if config.length < MIN_TRAJECTORY_LENGTH {
        return Err(Error::InvalidArgument(format!(
            "trajectory length {} below minimum {MIN_TRAJECTORY_LENGTH}",
            config.length
        )));
    }
    if config.reorth_every == 0 {
        return Err(Error::InvalidArgument("reorth_every must be >= 1".into()));
    }
    let n = machine.num_states();
    let mut walk = MixedStateWalk::new(machine, config.seed);
    let mut lce = config
        .lce
        .then(|| LceAccumulator::new(n, config.reorth_every, config.length));
    for _ in 0..config.burn_in {
        walk.step_with(|eta, _, x| {
            if let Some(acc) = lce.as_mut() {
                acc.push(machine, eta, x);
            }
        });
    }
    if let Some(acc) = lce.as_mut() {
        acc.start_recording();
    }
    let mut hmu = BatchMeans::for_length(config.length);
    let mut cloud = config
        .decimation
        .map(|d| PointCloud::with_capacity(n, config.length / d + 1));
    for t in 0..config.length {
        walk.step_with(|eta, probs, x| {
            hmu.push(probs.iter().copied().map(neg_plogp).sum());
            if let (Some(c), Some(d)) = (cloud.as_mut(), config.decimation) {
                if t % d == 0 {
                    c.push(eta);
                }
            }
            if let Some(acc) = lce.as_mut() {
                acc.push(machine, eta, x);
            }
        });
    }
    Ok(OrbitAnalysis {
        trajectory: TrajectoryEstimate {
            hmu_b: hmu.mean(),
            stderr: hmu.stderr(),
            length: config.length,
            burn_in: config.burn_in,
            point_cloud: cloud,
        },
        lce: lce.map(|acc| acc.finish(config.length)),
    })
}

/// Box size used by the overlap heuristic.
const OVERLAP_EPS: f64 = 1.0 / 128.0;
/// Shared-box fraction above which images count as overlapping.
const OVERLAP_FRACTION: f64 = 0.1;
const OVERLAP_SAMPLE: usize = 20_000;

/// Fraction of boxes shared by the images of two symbol maps, maximized over
/// symbol pairs and normalized by the smaller image.
pub fn symbol_image_overlap(machine: &LabeledHmm, cloud: &PointCloud) -> f64 {
    let stride = (cloud.len() / OVERLAP_SAMPLE).max(1);
    let n = machine.num_states();
    let images: Vec<HashSet<Vec<i64>>> = (0..machine.alphabet_size())
        .map(|x| {
            let mut img = PointCloud::new(n);
            for p in cloud.points().step_by(stride) {
                let eta = MixedState { probs: p.to_vec() };
                if let Ok(next) = propagate(&eta, x, machine) {
                    img.push(&next.probs);
                }
            }
            let (dim, coords) = embed(&img);
            coords
                .chunks_exact(dim.max(1))
                .map(|c| c.iter().map(|v| (v / OVERLAP_EPS).floor() as i64).collect())
                .collect()
        })
        .collect();
    let mut worst: f64 = 0.0;
    for a in 0..images.len() {
        for b in a + 1..images.len() {
            let smaller = images[a].len().min(images[b].len());
            if smaller == 0 {
                continue;
            }
            let shared = images[a].intersection(&images[b]).count();
            worst = worst.max(shared as f64 / smaller as f64);
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionConfig {
    pub orbit: OrbitConfig,
    /// Scales for box counting; `None` skips it.
    pub eps_grid: Option<Vec<f64>>,
}

impl DimensionConfig {
    pub fn new(length: usize, seed: u64) -> Self {
        DimensionConfig {
            orbit: OrbitConfig::new(length, seed),
            eps_grid: None,
        }
    }

    pub fn with_box_counting(mut self) -> Self {
        self.eps_grid = Some(default_eps_grid());
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimensionReport {
    pub hmu_b: f64,
    pub hmu_stderr: f64,
    pub exponents: LceEstimate,
    pub k: usize,
    pub d_lce: f64,
    pub d_bc: Option<f64>,
    pub bc_fit: Option<BoxCountFit>,
    /// Advisory: symbol-map images appear to overlap, so `d_lce` is likely a
    /// strict upper bound.
    pub open_set_flag: bool,
    pub image_overlap: f64,
    pub point_cloud: PointCloud,
}

pub fn dimension_report(machine: &LabeledHmm, config: &DimensionConfig) -> Result<DimensionReport> {
    let mut orbit = config.orbit.clone();
    orbit.lce = true;
    orbit.decimation = Some(orbit.decimation.unwrap_or(1));
    let analysis = analyze_orbit(machine, &orbit)?;
    let lce = analysis.lce.expect("requested");
    let cloud = analysis.trajectory.point_cloud.expect("requested");
    let n = machine.num_states();
    let (k, d) = if n < 2 {
        (0, 0.0)
    } else {
        d_lce(analysis.trajectory.hmu_b, &lce.exponents, n)?
    };
    let bc_fit = match &config.eps_grid {
        Some(grid) => Some(box_counting_dimension(&cloud, grid)?),
        None => None,
    };
    let image_overlap = symbol_image_overlap(machine, &cloud);
    Ok(DimensionReport {
        hmu_b: analysis.trajectory.hmu_b,
        hmu_stderr: analysis.trajectory.stderr,
        exponents: lce,
        k,
        d_lce: d,
        d_bc: bc_fit.as_ref().map(|f| f.d_bc),
        bc_fit,
        open_set_flag: image_overlap > OVERLAP_FRACTION,
        image_overlap,
        point_cloud: cloud,
    })
}
