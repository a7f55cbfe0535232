//! Measurement-angle sweeps over a qubit source.
//!
//! Each angle is an independent job with seed `derive_seed(seed, index)`, so
//! rows do not depend on the worker count or on scheduling.

use std::fmt::Write;

use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use qmsp_core::{
    analyze_orbit, box_counting_dimension, d_lce, default_eps_grid, derive_seed, enumerate_msp,
    MspConfig, MspOutcome, OrbitConfig, PointCloud, ProjectiveMeasurement, QubitHmm,
};

#[derive(Debug, Clone, Serialize)]
pub struct SweepConfig {
    pub thetas: Vec<f64>,
    pub phi: f64,
    pub length: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Cloud decimation; clouds are only collected when needed.
    pub decimation: usize,
    pub box_counting: bool,
    pub keep_clouds: bool,
    pub msp: bool,
    pub merge_tol: f64,
    pub max_states: usize,
    pub workers: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub index: usize,
    pub theta: f64,
    pub phi: f64,
    pub hmu_b: Option<f64>,
    pub hmu_stderr: Option<f64>,
    pub lambdas: Vec<f64>,
    pub k: Option<usize>,
    pub d_lce: Option<f64>,
    /// `-1` when the state budget ran out.
    pub msp_states: Option<i64>,
    pub cmu_exact_msp: Option<f64>,
    pub d_bc: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone)]
pub struct AngleResult {
    pub row: SweepRow,
    pub cloud: Option<PointCloud>,
}

fn analyze_angle(source: &QubitHmm, index: usize, theta: f64, config: &SweepConfig) -> AngleResult {
    let mut row = SweepRow {
        index,
        theta,
        phi: config.phi,
        hmu_b: None,
        hmu_stderr: None,
        lambdas: Vec::new(),
        k: None,
        d_lce: None,
        msp_states: None,
        cmu_exact_msp: None,
        d_bc: None,
        status: "ok".into(),
    };
    let mut cloud = None;
    let outcome = (|| -> qmsp_core::Result<()> {
        let machine = source.measure(&ProjectiveMeasurement::new(theta, config.phi)?)?;
        let want_cloud = config.box_counting || config.keep_clouds;
        let orbit = OrbitConfig {
            length: config.length,
            burn_in: config.burn_in,
            seed: derive_seed(config.seed, index as u64),
            reorth_every: 1,
            decimation: want_cloud.then_some(config.decimation.max(1)),
            lce: true,
        };
        let analysis = analyze_orbit(&machine, &orbit)?;
        row.hmu_b = Some(analysis.trajectory.hmu_b);
        row.hmu_stderr = Some(analysis.trajectory.stderr);
        if let Some(lce) = &analysis.lce {
            row.lambdas = lce.exponents.clone();
            if !lce.exponents.is_empty() {
                let (k, d) = d_lce(analysis.trajectory.hmu_b, &lce.exponents, machine.num_states())?;
                row.k = Some(k);
                row.d_lce = Some(d);
            }
        }
        if let Some(c) = analysis.trajectory.point_cloud {
            if config.box_counting {
                row.d_bc = Some(box_counting_dimension(&c, &default_eps_grid())?.d_bc);
            }
            if config.keep_clouds {
                cloud = Some(c);
            }
        }
        if config.msp {
            let msp = enumerate_msp(
                &machine,
                &MspConfig {
                    merge_tol: config.merge_tol,
                    max_states: config.max_states,
                },
            )?;
            match msp {
                MspOutcome::Closed(p) => {
                    row.msp_states = Some(p.num_states() as i64);
                    row.cmu_exact_msp = Some(p.cmu);
                }
                MspOutcome::BudgetExceeded { .. } => row.msp_states = Some(-1),
            }
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        row.status = format!("error: {e}");
    }
    AngleResult { row, cloud }
}

pub fn run_sweep(source: &QubitHmm, config: &SweepConfig) -> Result<Vec<AngleResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()?;
    Ok(pool.install(|| {
        config
            .thetas
            .par_iter()
            .enumerate()
            .map(|(i, &theta)| analyze_angle(source, i, theta, config))
            .collect()
    }))
}

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(String::new, |x| x.to_string())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// `sweep.csv` contents; `exponents` fixes the number of `lambda_i` columns.
pub fn sweep_csv(rows: &[SweepRow], exponents: usize) -> String {
    let mut out = String::from("index,theta,phi,hmu_B,hmu_stderr");
    for i in 1..=exponents {
        let _ = write!(out, ",lambda_{i}");
    }
    out.push_str(",k,d_lce,msp_states,cmu_exact_msp,d_bc,status\n");
    for r in rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            r.index,
            r.theta,
            r.phi,
            opt(&r.hmu_b),
            opt(&r.hmu_stderr)
        );
        for i in 0..exponents {
            let _ = write!(out, ",{}", opt(&r.lambdas.get(i)));
        }
        let _ = writeln!(
            out,
            ",{},{},{},{},{},{}",
            opt(&r.k),
            opt(&r.d_lce),
            opt(&r.msp_states),
            opt(&r.cmu_exact_msp),
            opt(&r.d_bc),
            csv_field(&r.status)
        );
    }
    out
}

/// `cloud_<idx>.csv`: mixed-state coordinates, plus the planar embedding
/// for three-state machines.
pub fn cloud_csv(cloud: &PointCloud) -> String {
    let n = cloud.dim();
    let mut out = (1..=n).map(|i| format!("p_{i}")).collect::<Vec<_>>().join(",");
    if n == 3 {
        out.push_str(",x2d,y2d");
    }
    out.push('\n');
    for p in cloud.points() {
        let mut fields: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        if n == 3 {
            let [x, y] = qmsp_core::box_count::barycentric(p);
            fields.push(x.to_string());
            fields.push(y.to_string());
        }
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
