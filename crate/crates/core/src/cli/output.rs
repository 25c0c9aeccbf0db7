//! CSV and JSON writers. CSV uses `\n` line endings and 17 significant
//! digits so values survive a text round trip.

use std::io::{self, Write};

use serde::Serialize;

use crate::dynamics::BlochTrajectory;
use crate::experiments::{GpSurface, StrategyReport};
use crate::phase::GpResult;

pub const SURFACE_HEADER: &str = "theta,phi,gp_principal,gp_unwrapped,singular_count";

/// Scientific notation with 17 significant digits; `nan` for missing values.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn fmt_opt(x: Option<f64>) -> String {
    fmt_real(x.unwrap_or(f64::NAN))
}

/// Writes one row per cell, `theta` outer and `phi` inner.
pub fn write_surface_csv<W: Write>(surface: &GpSurface, out: &mut W) -> io::Result<()> {
    writeln!(out, "{SURFACE_HEADER}")?;
    for c in &surface.cells {
        writeln!(
            out,
            "{},{},{},{},{}",
            fmt_real(c.theta),
            fmt_real(c.phi),
            fmt_opt(c.gamma),
            fmt_opt(c.gamma_unwrapped),
            c.singular_count
        )?;
    }
    Ok(())
}

pub fn write_trajectory_csv<W: Write>(traj: &BlochTrajectory, out: &mut W) -> io::Result<()> {
    writeln!(out, "t,x,y,z,norm")?;
    for (t, p) in traj.times().zip(&traj.points) {
        writeln!(out, "{},{},{},{},{}", fmt_real(t), fmt_real(p.x), fmt_real(p.y), fmt_real(p.z), fmt_real(p.norm()))?;
    }
    Ok(())
}

pub fn write_gp_csv<W: Write>(results: &[GpResult], out: &mut W) -> io::Result<()> {
    writeln!(out, "method,gp_principal,gp_unwrapped,nodes,singular_nodes,unwrap_jumps")?;
    for r in results {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method,
            fmt_real(r.gamma),
            fmt_real(r.gamma_unwrapped),
            r.diagnostics.nodes,
            r.diagnostics.singular_nodes,
            r.diagnostics.unwrap_jumps
        )?;
    }
    Ok(())
}

/// Labels such as `(1,0)` contain commas, so they are quoted.
pub fn write_reports_csv<W: Write>(reports: &[StrategyReport], out: &mut W) -> io::Result<()> {
    writeln!(
        out,
        "bath_size,label,alpha1,alpha2,mean_abs_gp,mean_dist_to_unitary,min,max,cells,missing,rank,winner"
    )?;
    for report in reports {
        for e in &report.entries {
            let rank = report.ranking.iter().position(|l| *l == e.label).map_or(0, |p| p + 1);
            let s = &e.summary;
            writeln!(
                out,
                "{},\"{}\",{},{},{},{},{},{},{},{},{},{}",
                report.bath_size,
                e.label,
                fmt_real(e.alpha1),
                fmt_real(e.alpha2),
                fmt_real(s.mean_abs_gp),
                fmt_real(s.mean_dist_to_unitary),
                fmt_real(s.min),
                fmt_real(s.max),
                s.cells,
                s.missing,
                rank,
                report.winner == e.label
            )?;
        }
    }
    Ok(())
}

/// Pretty JSON; non-finite numbers become `null`.
pub fn write_json<W: Write, T: Serialize + ?Sized>(value: &T, out: &mut W) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io::Error::other)?;
    writeln!(out)
}
