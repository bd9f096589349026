use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::Subcommand;
use harvest_core::export::{
    write_basin_csv, write_bounds_csv, write_frontier_csv, write_orbit_csv, write_sweep_csv, write_trajectory_csv,
};
use harvest_core::yields::FrontierRow;
use harvest_core::{
    basin_scan, classify, continuous_trajectory, frontier_table, guaranteed_sustainable_effort, iterate, max_yield,
    msy_bound_table, msy_rt_bound, optimal_effort, positive_equilibrium, stability_region_sweep,
    sustainability_frontier, transitions, yield_report, Outcome, StabilityVerdict,
};
use serde::Serialize;
use serde_json::json;

use crate::config::{Format, RunConfig, StoppingConfig, SurvivalConfig, SweepConfig};
use crate::error::{CliError, Result};

pub const EXIT_EXTINCT: u8 = 2;
pub const EXIT_HORIZON: u8 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Iterate the post-harvest recurrence; writes the orbit and the continuous trajectory.
    Simulate,
    /// Classify the positive periodic solution.
    Stability,
    /// Yield, optimal effort and sustainability thresholds.
    Yield,
    /// Seeded basin-of-attraction scan over random initial data.
    Basin,
    /// Stability verdicts over a (k, rT) grid.
    Sweep,
    /// Table of the MSY bound f(k) for k = 2..k_max.
    Bounds,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Stability => "stability",
            Command::Yield => "yield",
            Command::Basin => "basin",
            Command::Sweep => "sweep",
            Command::Bounds => "bounds",
        }
    }

    fn default_format(self) -> Format {
        match self {
            Command::Stability | Command::Yield => Format::Json,
            _ => Format::Csv,
        }
    }
}

/// Runs one subcommand and returns the process exit code.
pub fn execute(command: Command, cfg: &RunConfig) -> Result<u8> {
    let format = cfg.format_or(command.default_format());
    let out = cfg.output.path.as_deref();
    let (code, summary) = match command {
        Command::Simulate => simulate(cfg, format, out)?,
        Command::Stability => stability(cfg, format, out)?,
        Command::Yield => yields(cfg, format, out)?,
        Command::Basin => basin(cfg, format, out)?,
        Command::Sweep => sweep(cfg, format, out)?,
        Command::Bounds => bounds(cfg, format, out)?,
    };
    if let Some(out) = out {
        let meta = json!({
            "command": command.name(),
            "generated_at": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            "version": env!("CARGO_PKG_VERSION"),
            "config": resolved(cfg, format)?,
            "summary": summary,
        });
        let path = meta_path(out);
        write_to(Some(&path), |w| json_to(w, &meta))?;
    }
    Ok(code)
}

/// `<out>.meta.json`
pub fn meta_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_os_string();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// `<stem>_trajectory.csv` next to `out`.
pub fn trajectory_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}_trajectory.csv"))
}

/// The config with every default spelled out, as echoed in the sidecar.
fn resolved(cfg: &RunConfig, format: Format) -> Result<RunConfig> {
    let stopping = cfg.stopping_rule()?;
    let survival = cfg.survival_rule()?;
    let mut r = cfg.clone();
    if r.params.r.is_some() {
        r.params.period.get_or_insert(1.0);
    }
    r.stopping = StoppingConfig {
        rel_tol: Some(stopping.rel_tol),
        consecutive_hits: Some(stopping.consecutive_hits),
        max_periods: Some(stopping.max_periods),
        extinction_threshold: Some(stopping.extinction_threshold),
    };
    r.survival = SurvivalConfig {
        iterations: Some(survival.iterations),
        window_halfwidth: Some(survival.window_halfwidth),
        extinction_threshold: Some(survival.extinction_threshold),
        domain_max: survival.domain_max,
    };
    let grid = &cfg.sweep;
    r.sweep = SweepConfig {
        k_list: Some(cfg.sweep_k_list()),
        rt_start: grid.rt_start.or(Some(0.1)),
        rt_stop: grid.rt_stop.or(Some(3.0)),
        rt_step: grid.rt_step.or(Some(0.01)),
        effort: grid.effort,
    };
    r.output.format = Some(format);
    r.seed = Some(cfg.seed());
    r.samples = Some(cfg.samples());
    r.samples_per_period = Some(cfg.samples_per_period());
    r.k_max = Some(cfg.k_max());
    r.tolerance = Some(cfg.frontier_tol());
    r.boundary_tol = Some(cfg.boundary_tol()?);
    Ok(r)
}

fn io_err(path: Option<&Path>) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf),
        source,
    }
}

/// Opens `path` (or stdout), hands it to `f` and flushes.
fn write_to<F>(path: Option<&Path>, f: F) -> Result<()>
where
    F: FnOnce(&mut dyn Write) -> Result<()>,
{
    let mut sink: Box<dyn Write> = match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).map_err(io_err(path))?)),
        None => Box::new(io::stdout().lock()),
    };
    f(sink.as_mut())?;
    sink.flush().map_err(io_err(path))
}

fn json_to<T: Serialize + ?Sized>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, value)?;
    writeln!(w).map_err(io_err(None))
}

fn simulate(cfg: &RunConfig, format: Format, out: Option<&Path>) -> Result<(u8, serde_json::Value)> {
    let p = cfg.model_params()?;
    let init = cfg.initial_data()?;
    let orbit = iterate(&p, &init, &cfg.stopping_rule()?)?;
    let trajectory = continuous_trajectory(&orbit, cfg.samples_per_period())?;
    match format {
        Format::Csv => {
            write_to(out, |w| Ok(write_orbit_csv(&orbit, w)?))?;
            if let Some(out) = out {
                let path = trajectory_path(out);
                write_to(Some(&path), |w| Ok(write_trajectory_csv(&trajectory, w)?))?;
            }
        }
        Format::Json => write_to(out, |w| {
            json_to(w, &json!({ "orbit": orbit, "trajectory": trajectory }))
        })?,
    }
    let (code, message) = match orbit.outcome() {
        Outcome::Converged { limit, step } => (0, format!("converged to {limit} at period {step}")),
        Outcome::Extinct { step } => (EXIT_EXTINCT, format!("extinct at period {step}")),
        Outcome::HorizonReached => (
            EXIT_HORIZON,
            format!("horizon of {} periods reached", orbit.values().len() - 1),
        ),
    };
    eprintln!("harvest simulate: {message}");
    let summary = json!({
        "outcome": orbit.outcome(),
        "periods": orbit.values().len() - 1,
        "last": orbit.last(),
        "x_star": positive_equilibrium(&p),
        "trajectory_file": out.filter(|_| format == Format::Csv).map(trajectory_path),
    });
    Ok((code, summary))
}

fn stability(cfg: &RunConfig, format: Format, out: Option<&Path>) -> Result<(u8, serde_json::Value)> {
    let p = cfg.model_params()?;
    let verdict = classify(&p, cfg.boundary_tol()?);
    match format {
        Format::Json => write_to(out, |w| json_to(w, &verdict))?,
        Format::Csv => write_to(out, |w| verdict_csv(&verdict, w))?,
    }
    Ok((0, json!({ "params": p, "verdict": verdict })))
}

fn verdict_csv(v: &StabilityVerdict, w: &mut dyn Write) -> Result<()> {
    use harvest_core::export::fmt_f64;
    let opt = |x: Option<f64>| x.map(fmt_f64).unwrap_or_default();
    let (p0, pk) = match v.coefficients {
        Some(c) => (Some(c.p0), Some(c.pk)),
        None => (None, None),
    };
    writeln!(w, "class,x_star,p0,pk,theta_star,margin").map_err(io_err(None))?;
    writeln!(
        w,
        "{},{},{},{},{},{}",
        v.class,
        opt(v.equilibrium),
        opt(p0),
        opt(pk),
        opt(v.theta_star),
        fmt_f64(v.margin)
    )
    .map_err(io_err(None))
}

fn yields(cfg: &RunConfig, format: Format, out: Option<&Path>) -> Result<(u8, serde_json::Value)> {
    match format {
        Format::Json => {
            let p = cfg.model_params()?;
            let report = yield_report(&p, cfg.frontier_tol())?;
            write_to(out, |w| json_to(w, &report))?;
            Ok((0, json!({ "params": p, "report": report })))
        }
        Format::Csv => {
            let rows = frontier_rows(cfg)?;
            write_to(out, |w| Ok(write_frontier_csv(&rows, w)?))?;
            Ok((0, json!({ "rows": rows.len() })))
        }
    }
}

/// A frontier table over the sweep grid when one is configured, otherwise a
/// single row for the configured stock.
fn frontier_rows(cfg: &RunConfig) -> Result<Vec<FrontierRow>> {
    let s = &cfg.sweep;
    let has_grid = s.k_list.is_some() || s.rt_start.is_some() || s.rt_stop.is_some() || s.rt_step.is_some();
    if has_grid {
        let capacity = cfg.params.capacity.unwrap_or(1.0);
        return Ok(frontier_table(
            &cfg.sweep_rt_grid()?,
            &cfg.sweep_k_list(),
            capacity,
            cfg.frontier_tol(),
        )?);
    }
    let p = cfg.model_params()?;
    let stock = p.stock();
    Ok(vec![FrontierRow {
        rt: p.rt(),
        k: p.delay(),
        guaranteed_effort: guaranteed_sustainable_effort(p.r(), p.period()),
        frontier: sustainability_frontier(&stock, cfg.frontier_tol())?.map(|f| f.effort),
        optimal_effort: optimal_effort(p.r(), p.period()),
        max_yield: max_yield(p.r(), p.period(), p.capacity()),
    }])
}

fn basin(cfg: &RunConfig, format: Format, out: Option<&Path>) -> Result<(u8, serde_json::Value)> {
    let p = cfg.model_params()?;
    let scan = basin_scan(&p, &cfg.survival_rule()?, cfg.samples(), cfg.seed())?;
    match format {
        Format::Csv => write_to(out, |w| Ok(write_basin_csv(&scan, w)?))?,
        Format::Json => write_to(out, |w| json_to(w, &scan))?,
    }
    let m = &scan.metadata;
    eprintln!(
        "harvest basin: {} survived, {} extinct, {} indeterminate",
        m.survived, m.extinct, m.indeterminate
    );
    Ok((0, serde_json::to_value(m)?))
}

fn sweep(cfg: &RunConfig, format: Format, out: Option<&Path>) -> Result<(u8, serde_json::Value)> {
    let rows = stability_region_sweep(&cfg.sweep_k_list(), &cfg.sweep_rt_grid()?, cfg.sweep_effort())?;
    match format {
        Format::Csv => write_to(out, |w| Ok(write_sweep_csv(&rows, w)?))?,
        Format::Json => write_to(out, |w| json_to(w, &rows))?,
    }
    let switches: Vec<_> = transitions(&rows)
        .into_iter()
        .map(|(a, b)| json!({ "k": a.k, "rT_below": a.rt, "rT_above": b.rt, "f_k": msy_rt_bound(a.k) }))
        .collect();
    Ok((
        0,
        json!({ "effort": cfg.sweep_effort(), "rows": rows.len(), "transitions": switches }),
    ))
}

fn bounds(cfg: &RunConfig, format: Format, out: Option<&Path>) -> Result<(u8, serde_json::Value)> {
    let rows = msy_bound_table(cfg.k_max())?;
    match format {
        Format::Csv => write_to(out, |w| Ok(write_bounds_csv(&rows, w)?))?,
        Format::Json => write_to(out, |w| json_to(w, &rows))?,
    }
    Ok((0, json!({ "rows": rows.len() })))
}
