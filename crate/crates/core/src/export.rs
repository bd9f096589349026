//! CSV writers for orbits, trajectories and batch tables.
//!
//! Floats are written with 17 significant digits (`{:.16e}`), which round-trips
//! every `f64` exactly.

use std::io::Write;

use crate::error::Result;
use crate::orbit::{Orbit, TrajectoryPoint};
use crate::scan::{BasinScan, BoundRow, SweepRow};
use crate::yields::FrontierRow;

pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Columns `n, x_n`.
pub fn write_orbit_csv<W: Write>(orbit: &Orbit, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["n", "x_n"])?;
    for (n, &x) in orbit.values().iter().enumerate() {
        w.write_record([n.to_string(), fmt_f64(x)])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t, N, post_impulse`.
pub fn write_trajectory_csv<W: Write>(points: &[TrajectoryPoint], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "N", "post_impulse"])?;
    for pt in points {
        w.write_record([fmt_f64(pt.t), fmt_f64(pt.value), pt.post_impulse.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Basin header: `N_0, N_m1, ..., N_m{k-1}` for the history, then
/// `n0_plus, outcome, steps`.
pub fn basin_header(k: usize) -> Vec<String> {
    let mut h: Vec<String> = (0..k)
        .map(|j| if j == 0 { "N_0".to_string() } else { format!("N_m{j}") })
        .collect();
    h.extend(["n0_plus", "outcome", "steps"].map(String::from));
    h
}

pub fn write_basin_csv<W: Write>(scan: &BasinScan, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(basin_header(scan.metadata.params.delay()))?;
    for s in &scan.samples {
        let mut row: Vec<String> = s.initial.history().iter().map(|&h| fmt_f64(h)).collect();
        row.push(fmt_f64(s.initial.n0_plus()));
        row.push(s.outcome.to_string());
        row.push(s.steps_run.to_string());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `k, rT, E, verdict, margin`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["k", "rT", "E", "verdict", "margin"])?;
    for r in rows {
        w.write_record([
            r.k.to_string(),
            fmt_f64(r.rt),
            fmt_f64(r.effort),
            r.verdict.to_string(),
            fmt_f64(r.margin),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `k, f_k, k_f_k`.
pub fn write_bounds_csv<W: Write>(rows: &[BoundRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["k", "f_k", "k_f_k"])?;
    for r in rows {
        w.write_record([r.k.to_string(), fmt_f64(r.f_k), fmt_f64(r.k_f_k)])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `rT, k, E_star, E_star_star, E_opt, MSY`; an empty `E_star_star`
/// means every effort up to `E_opt` is sustainable.
pub fn write_frontier_csv<W: Write>(rows: &[FrontierRow], out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["rT", "k", "E_star", "E_star_star", "E_opt", "MSY"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.rt),
            r.k.to_string(),
            fmt_f64(r.guaranteed_effort),
            fmt_opt(r.frontier),
            fmt_f64(r.optimal_effort),
            fmt_f64(r.max_yield),
        ])?;
    }
    w.flush()?;
    Ok(())
}
