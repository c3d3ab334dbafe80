//! Subcommands other than `sweep`.

use std::io::Write;

use anyhow::bail;
use clustersim::choi::{decompose, first_kraus_correlation, first_kraus_fidelity};
use clustersim::entanglement::esd_threshold;
use clustersim::logical::{
    closed_form_superoperator, reconstruct_superoperator, HaarRotations, DEPOLARIZING_SUSPECT_ENTRIES,
};
use clustersim::validation::{run_all, run_criterion, ValidationReport};
use clustersim::{ChannelKind, ConventionCalibration, InitialState, RotationSpec, Superoperator};
use serde::Serialize;
use serde_json::json;

use crate::config::Format;
use crate::format::format_float;

/// Decimal places that resolve `tol`.
fn decimals_for(tol: f64) -> usize {
    (-tol.log10()).ceil().max(1.0) as usize
}

pub fn esd(
    kind: ChannelKind,
    subset: &[usize],
    s: InitialState,
    tol: f64,
    format: Format,
    mut out: impl Write,
) -> anyhow::Result<()> {
    let threshold = esd_threshold(kind, subset, s, tol)?;
    match format {
        Format::Csv => match threshold {
            Some(p) => writeln!(out, "esd p={:.*}", decimals_for(tol), p)?,
            None => writeln!(out, "no-esd")?,
        },
        Format::Json => {
            let v = json!({
                "channel": kind,
                "subset": subset,
                "alpha": s.alpha,
                "beta": s.beta,
                "tol": tol,
                "esd": threshold,
            });
            writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Source {
    Reconstructed,
    #[value(name = "closed-form")]
    ClosedForm,
    Both,
}

/// Largest entry difference with the suspect depolarizing entries masked.
fn residual_outside_suspect(a: &Superoperator, b: &Superoperator) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..4 {
        for j in 0..4 {
            if !DEPOLARIZING_SUSPECT_ENTRIES.contains(&(i, j)) {
                worst = worst.max((a.matrix[(i, j)] - b.matrix[(i, j)]).norm());
            }
        }
    }
    worst
}

pub fn superop(kind: ChannelKind, p: f64, r: RotationSpec, source: Source, mut out: impl Write) -> anyhow::Result<()> {
    let v = match source {
        Source::Reconstructed => serde_json::to_value(reconstruct_superoperator(kind, p, r)?)?,
        Source::ClosedForm => serde_json::to_value(closed_form_superoperator(kind, p, r)?)?,
        Source::Both => {
            let rec = reconstruct_superoperator(kind, p, r)?;
            let cf = closed_form_superoperator(kind, p, r)?;
            let mut v = json!({
                "reconstructed": rec,
                "closed_form": cf,
                "max_residual": rec.max_abs_diff(&cf),
            });
            if kind == ChannelKind::Depolarizing {
                v["max_residual_outside_suspect_entries"] = json!(residual_outside_suspect(&rec, &cf));
                v["suspect_entries"] = json!(DEPOLARIZING_SUSPECT_ENTRIES
                    .iter()
                    .map(|&(i, j)| [i + 1, j + 1])
                    .collect::<Vec<_>>());
            }
            v
        }
    };
    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    Ok(())
}

pub fn kraus(kind: ChannelKind, p: f64, r: RotationSpec, mut out: impl Write) -> anyhow::Result<()> {
    let sp = reconstruct_superoperator(kind, p, r)?;
    let d = decompose(&sp)?;
    let u = ConventionCalibration::SHIPPED.target_unitary(&r);
    let v = json!({
        "channel": kind,
        "p": p,
        "theta": r.angles(),
        "convention": ConventionCalibration::SHIPPED.tag(),
        "f1": first_kraus_fidelity(&d, &u),
        "c1": first_kraus_correlation(&d, &u).ok(),
        "decomposition": d,
    });
    writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
    Ok(())
}

fn print_report(report: &ValidationReport, mut out: impl Write) -> std::io::Result<()> {
    for c in &report.criteria {
        write!(out, "{c}")?;
    }
    let e = &report.prefactor;
    writeln!(out, "amplitude damping gate fidelity prefactor:")?;
    writeln!(out, "    1/16: max |F - F_dephasing| = {:.6e}, F(p=0) = {}", e.sixteenth_vs_dephasing, format_float(e.sixteenth_at_zero))?;
    writeln!(out, "    1/4:  max |F - F_dephasing| = {:.6e}, F(p=0) = {}", e.quarter_vs_dephasing, format_float(e.quarter_at_zero))?;
    writeln!(out, "witness crossings:")?;
    writeln!(out, "    {:<10} {:>10} {:>10} {:>10}", "channel", "beta", "alpha", "crossing")?;
    for row in &report.witness_table {
        writeln!(
            out,
            "    {:<10} {:>10.6} {:>10.6} {:>10.6}{}",
            row.channel.as_str(),
            row.beta,
            row.alpha,
            row.crossing,
            if row.is_max { "  max over alpha" } else { "" }
        )?;
    }
    let verdict = if report.passed() { "PASS" } else { "FAIL" };
    let passed = report.criteria.iter().filter(|c| c.passed()).count();
    writeln!(out, "{verdict}: {passed} of {} criteria passed", report.criteria.len())
}

/// Returns whether every requested criterion passed.
pub fn validate(criterion: Option<u8>, format: Format, mut out: impl Write) -> anyhow::Result<bool> {
    if let Some(id) = criterion {
        if !(1..=8).contains(&id) {
            bail!("criteria are numbered 1 to 8, got {id}");
        }
        let rep = run_criterion(id)?;
        match format {
            Format::Csv => write!(out, "{rep}")?,
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rep)?)?,
        }
        return Ok(rep.passed());
    }
    let report = run_all()?;
    match format {
        Format::Csv => print_report(&report, &mut out)?,
        Format::Json => {
            #[derive(Serialize)]
            struct Full<'a> {
                passed: bool,
                #[serde(flatten)]
                report: &'a ValidationReport,
            }
            let full = Full {
                passed: report.passed(),
                report: &report,
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&full)?)?;
        }
    }
    Ok(report.passed())
}

pub fn haar_sample(seed: u64, count: usize, format: Format, out: impl Write) -> anyhow::Result<()> {
    let samples: Vec<[f64; 3]> = HaarRotations::new(seed).take(count).map(|r| r.angles()).collect();
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(out);
            w.write_record(["theta1", "theta2", "theta3"])?;
            for t in &samples {
                w.write_record(t.iter().map(|&x| format_float(x)))?;
            }
            w.flush()?;
        }
        Format::Json => {
            let mut out = out;
            let rows: Vec<_> = samples
                .iter()
                .map(|t| json!({"theta1": t[0], "theta2": t[1], "theta3": t[2]}))
                .collect();
            writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decimals_cover_tolerance() {
        assert_eq!(decimals_for(1e-6), 6);
        assert_eq!(decimals_for(5e-4), 4);
        assert_eq!(decimals_for(0.5), 1);
    }
}
