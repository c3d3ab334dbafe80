//! Grid sweeps of state and logical-channel metrics.

use std::io::Write;

use anyhow::{bail, Context};
use clustersim::choi::{decompose, first_kraus_correlation, first_kraus_fidelity};
use clustersim::entanglement::{negativity, witness_expectation};
use clustersim::logical::{
    cluster_fidelity, gate_fidelity, ideal_superoperator, reconstruct_superoperator, HaarRotations,
};
use clustersim::{build_cluster, decohere, ConventionCalibration, InitialState, RotationSpec};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Format, Metric, SweepConfig};
use crate::format::format_float;

pub const HEADER: [&str; 9] = ["channel", "p", "alpha", "beta", "theta1", "theta2", "theta3", "metric", "value"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    pub channel: &'static str,
    pub p: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta1: f64,
    pub theta2: f64,
    pub theta3: f64,
    pub metric: String,
    pub value: f64,
}

/// Grid points in lexicographic order: `p` outermost, then `α`, `β`, `θ1`,
/// `θ2`, `θ3`. With `haar` set, the three θ loops become one loop over the
/// sampled rotations.
pub fn points(cfg: &SweepConfig) -> Vec<Point> {
    let thetas: Vec<[f64; 3]> = match cfg.haar {
        Some(n) => HaarRotations::new(cfg.seed).take(n).map(|r| r.angles()).collect(),
        None => {
            let mut v = Vec::new();
            for &t1 in &cfg.theta1.values() {
                for &t2 in &cfg.theta2.values() {
                    for &t3 in &cfg.theta3.values() {
                        v.push([t1, t2, t3]);
                    }
                }
            }
            v
        }
    };
    let mut out = Vec::new();
    for &p in &cfg.p.values() {
        for &alpha in &cfg.alpha.values() {
            for &beta in &cfg.beta.values() {
                for &theta in &thetas {
                    out.push(Point { p, alpha, beta, theta });
                }
            }
        }
    }
    out
}

fn evaluate(cfg: &SweepConfig, pt: &Point) -> anyhow::Result<Vec<(String, f64)>> {
    let kind = cfg.channel;
    let single = |v: f64| vec![(cfg.metric.name().to_string(), v)];
    if !cfg.metric.is_logical() {
        let rho = build_cluster(InitialState::new(pt.alpha, pt.beta));
        let fin = decohere(&rho, kind, pt.p)?;
        let v = match cfg.metric {
            Metric::Negativity => negativity(&fin, &cfg.subset)?.value,
            Metric::Witness => witness_expectation(&fin, pt.beta)?,
            Metric::ClusterFidelity => cluster_fidelity(&rho, &fin)?,
            _ => unreachable!(),
        };
        return Ok(single(v));
    }
    let r = RotationSpec::from_angles(pt.theta);
    let sp = reconstruct_superoperator(kind, pt.p, r)?;
    match cfg.metric {
        Metric::GateFidelity => Ok(single(gate_fidelity(&ideal_superoperator(r), &sp)?)),
        Metric::KrausAmplitudes => Ok(decompose(&sp)?
            .amplitudes
            .iter()
            .enumerate()
            .map(|(k, &a)| (format!("kraus_amplitude_{}", k + 1), a))
            .collect()),
        Metric::F1 | Metric::C1 => {
            let d = decompose(&sp)?;
            let u = ConventionCalibration::SHIPPED.target_unitary(&r);
            let v = if cfg.metric == Metric::F1 {
                first_kraus_fidelity(&d, &u)
            } else {
                first_kraus_correlation(&d, &u)?
            };
            Ok(single(v))
        }
        _ => unreachable!(),
    }
}

/// Evaluates every grid point on a pool of `cfg.jobs` threads and returns
/// rows in grid order regardless of the thread count.
pub fn run(cfg: &SweepConfig) -> anyhow::Result<Vec<Row>> {
    let pts = points(cfg);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cfg.jobs {
        builder = builder.num_threads(j);
    }
    let pool = builder.build().context("starting worker pool")?;
    let values: Vec<Vec<(String, f64)>> =
        pool.install(|| pts.par_iter().map(|pt| evaluate(cfg, pt)).collect::<anyhow::Result<_>>())?;
    let mut rows = Vec::with_capacity(values.len());
    for (pt, vals) in pts.iter().zip(values) {
        for (metric, value) in vals {
            if !value.is_finite() {
                bail!("{metric} is not finite at p = {}, alpha = {}, beta = {}", pt.p, pt.alpha, pt.beta);
            }
            rows.push(Row {
                channel: cfg.channel.as_str(),
                p: pt.p,
                alpha: pt.alpha,
                beta: pt.beta,
                theta1: pt.theta[0],
                theta2: pt.theta[1],
                theta3: pt.theta[2],
                metric,
                value,
            });
        }
    }
    Ok(rows)
}

pub fn write_rows(rows: &[Row], format: Format, out: impl Write) -> anyhow::Result<()> {
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            w.write_record(HEADER)?;
            for r in rows {
                w.write_record([
                    r.channel.to_string(),
                    format_float(r.p),
                    format_float(r.alpha),
                    format_float(r.beta),
                    format_float(r.theta1),
                    format_float(r.theta2),
                    format_float(r.theta3),
                    r.metric.clone(),
                    format_float(r.value),
                ])?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
