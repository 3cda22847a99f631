use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use super::config::RunConfig;
use crate::error::Error;
use crate::interferometer::{
    fit_cubic, fit_quadratic, fringes, run_protocol, sci, t3_significance, CubicFit, Protocol, WavepacketSettings,
};
use crate::phases::{cow_phase, gr_budget, rindler_cubic_phase, rindler_time};
use crate::qdynamics::{gauge_check, gaussian_packet, Grid};
use crate::report::run_all;
use crate::units::PhysParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Subcommand {
    GaugeCheck,
    Cow,
    Drop,
    Rindler,
    Gr,
    Fit,
    Sweep,
    Report,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::GaugeCheck => "gauge-check",
            Subcommand::Cow => "cow",
            Subcommand::Drop => "drop",
            Subcommand::Rindler => "rindler",
            Subcommand::Gr => "gr",
            Subcommand::Fit => "fit",
            Subcommand::Sweep => "sweep",
            Subcommand::Report => "report",
        }
    }
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    /// A check failed or the inputs were invalid.
    pub const FAILED: u8 = 1;
    /// Reading or writing files failed.
    pub const IO: u8 = 2;
}

enum Failure {
    Check(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Check(e.to_string())
    }
}

struct Ctx<'a, W: Write> {
    cfg: &'a RunConfig,
    out_dir: &'a Path,
    out: &'a mut W,
}

impl<W: Write> Ctx<'_, W> {
    fn say(&mut self, line: impl AsRef<str>) -> Result<(), Failure> {
        writeln!(self.out, "{}", line.as_ref()).map_err(|e| Failure::Io(format!("stdout: {e}")))
    }

    fn write_file(&mut self, name: &str, body: &[u8]) -> Result<PathBuf, Failure> {
        let path = self.out_dir.join(name);
        fs::write(&path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
        self.say(format!("wrote {}", path.display()))?;
        Ok(path)
    }

    fn write_table(&mut self, name: &str, header: &str, rows: &[Vec<f64>]) -> Result<PathBuf, Failure> {
        let mut body = String::new();
        body.push_str(header);
        body.push('\n');
        for row in rows {
            let cells: Vec<String> = row.iter().map(|v| sci(*v)).collect();
            body.push_str(&cells.join(","));
            body.push('\n');
        }
        self.write_file(name, body.as_bytes())
    }
}

/// Runs `cmd`, writing CSV artifacts to `out_dir` and a summary to `out`.
/// Returns the process exit code.
pub fn run<W: Write>(cfg: &RunConfig, cmd: Subcommand, out_dir: &Path, out: &mut W) -> u8 {
    let mut cx = Ctx { cfg, out_dir, out };
    let result = fs::create_dir_all(out_dir)
        .map_err(|e| Failure::Io(format!("{}: {e}", out_dir.display())))
        .and_then(|_| match cmd {
            Subcommand::GaugeCheck => gauge(&mut cx),
            Subcommand::Cow => cow(&mut cx),
            Subcommand::Drop => drop_run(&mut cx),
            Subcommand::Rindler => rindler(&mut cx),
            Subcommand::Gr => gr(&mut cx),
            Subcommand::Fit => fit(&mut cx),
            Subcommand::Sweep => sweep(&mut cx),
            Subcommand::Report => report(&mut cx),
        });
    match result {
        Ok(()) => exit::OK,
        Err(Failure::Check(msg)) => {
            let _ = writeln!(cx.out, "{}: FAILED: {msg}", cmd.name());
            exit::FAILED
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(cx.out, "{}: I/O error: {msg}", cmd.name());
            exit::IO
        }
    }
}

fn protocol(cfg: &RunConfig, params: PhysParams) -> Protocol {
    Protocol {
        params,
        d: cfg.d,
        sigma: cfg.sigma,
        t_samples: cfg.times.samples(),
        method: cfg.method,
        wavepacket: WavepacketSettings {
            n: cfg.grid_n,
            x_range: cfg.grid_range,
            max_dt: cfg.max_dt,
        },
    }
}

fn gauge<W: Write>(cx: &mut Ctx<W>) -> Result<(), Failure> {
    let cfg = cx.cfg;
    let p = &cfg.params;
    let grid = match cfg.grid_range {
        Some((lo, hi)) => Grid::new(lo, hi, cfg.grid_n)?,
        None => Grid::centered(cfg.d, 512.0 * cfg.d, cfg.grid_n)?,
    };
    let psi0 = gaussian_packet(&grid, cfg.d, 0.0, cfg.gauge_sigma, p.hbar)?;
    let times = cfg.times.samples();
    let checks = times
        .par_iter()
        .map(|&t| gauge_check(&psi0, p, t, cfg.max_dt))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<f64>> = times
        .iter()
        .zip(&checks)
        .map(|(t, c)| vec![*t, c.fidelity, c.phase])
        .collect();
    cx.write_table("gauge_check.csv", "t,fidelity,phase_rad", &rows)?;
    let fid = checks.iter().map(|c| c.fidelity).fold(f64::INFINITY, f64::min);
    let phase = checks.iter().map(|c| c.phase.abs()).fold(0.0, f64::max);
    cx.say(format!("gauge-check: min fidelity {fid:.12}, max |phase| {phase:.3e} rad over {} times", times.len()))?;
    if 1.0 - fid > cfg.tol.gauge_fidelity || phase > cfg.tol.gauge_phase {
        return Err(Failure::Check(format!(
            "gauge-equivalence outside tolerance (1 - fidelity <= {}, |phase| <= {})",
            cfg.tol.gauge_fidelity, cfg.tol.gauge_phase
        )));
    }
    Ok(())
}

fn cow<W: Write>(cx: &mut Ctx<W>) -> Result<(), Failure> {
    let cfg = cx.cfg;
    let rows: Vec<Vec<f64>> = cfg
        .times
        .samples()
        .into_iter()
        .map(|t| vec![t, cow_phase(&cfg.params, cfg.delta_h, t)])
        .collect();
    cx.write_table("cow.csv", "t,phase_rad", &rows)?;
    cx.say(format!("cow: delta_h = {}, {} samples", cfg.delta_h, rows.len()))
}

fn drop_run<W: Write>(cx: &mut Ctx<W>) -> Result<(), Failure> {
    let cfg = cx.cfg;
    let series = run_protocol(&protocol(cfg, cfg.params.clone()))?;
    let mut body = Vec::new();
    series.write_csv(&mut body).map_err(|e| Failure::Io(e.to_string()))?;
    cx.write_file("drop.csv", &body)?;
    let rows: Vec<Vec<f64>> = series.times.iter().zip(fringes(&series)).map(|(t, i)| vec![*t, i]).collect();
    cx.write_table("fringes.csv", "t,intensity", &rows)?;
    let last = series.len() - 1;
    cx.say(format!(
        "drop ({}): {} samples, phase at t = {} is {} rad",
        series.method.name(),
        series.len(),
        sci(series.times[last]),
        sci(series.phases_unwrapped[last])
    ))
}

fn rindler<W: Write>(cx: &mut Ctx<W>) -> Result<(), Failure> {
    let cfg = cx.cfg;
    let rows = cfg
        .times
        .samples()
        .into_iter()
        .map(|t| Ok(vec![t, rindler_time(&cfg.params, cfg.accel, t)?, rindler_cubic_phase(&cfg.params, cfg.accel, t)]))
        .collect::<Result<Vec<_>, Error>>()?;
    cx.write_table("rindler.csv", "t,t_prime,cubic_phase_rad", &rows)?;
    cx.say(format!("rindler: a = {}, {} samples", cfg.accel, rows.len()))
}

fn gr<W: Write>(cx: &mut Ctx<W>) -> Result<(), Failure> {
    let cfg = cx.cfg;
    let rows = cfg
        .times
        .samples()
        .into_iter()
        .map(|tau| {
            let b = gr_budget(&cfg.params, cfg.x, cfg.delta_h, tau)?;
            Ok(vec![tau, b.newtonian_term, b.gr_term, b.dt_exact, b.dt_series])
        })
        .collect::<Result<Vec<_>, Error>>()?;
    cx.write_table("gr.csv", "tau,newtonian_term,gr_term,dt_exact,dt_series", &rows)?;
    cx.say(format!("gr: x = {}, delta_h = {}, {} samples", cfg.x, cfg.delta_h, rows.len()))
}

fn fit_row(fit: &CubicFit) -> Vec<f64> {
    let mut row = vec![fit.degree as f64];
    row.extend_from_slice(&fit.coeffs);
    row.push(fit.rms_residual);
    row.push(fit.condition);
    row
}

const FIT_HEADER: &str = "degree,c0,c1,c2,c3,rms_residual,condition";

fn fit<W: Write>(cx: &mut Ctx<W>) -> Result<(), Failure> {
    let cfg = cx.cfg;
    let p = &cfg.params;
    let series = run_protocol(&protocol(cfg, p.clone()))?;
    let cubic = fit_cubic(&series)?;
    let quadratic = fit_quadratic(&series)?;
    let rows: Vec<Vec<f64>> = [cubic, quadratic].iter().map(fit_row).collect();
    cx.write_table("fit.csv", FIT_HEADER, &rows)?;
    let expected = -p.m * p.g * p.g / (6.0 * p.hbar);
    let ratio = t3_significance(&cubic, &quadratic);
    cx.say(format!(
        "fit ({}): c1 = {}, c3 = {} (expected {}), rms {:.3e}, t3 significance {:.3e}",
        series.method.name(),
        sci(cubic.coeffs[1]),
        sci(cubic.coeffs[3]),
        sci(expected),
        cubic.rms_residual,
        ratio
    ))
}

fn sweep<W: Write>(cx: &mut Ctx<W>) -> Result<(), Failure> {
    let cfg = cx.cfg;
    let fits = cfg
        .sweep_m
        .par_iter()
        .map(|factor| {
            let params = PhysParams {
                m: cfg.params.m * factor,
                ..cfg.params.clone()
            };
            let m = params.m;
            fit_cubic(&run_protocol(&protocol(cfg, params))?).map(|f| (m, f))
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<Vec<f64>> = fits
        .iter()
        .map(|(m, f)| std::iter::once(*m).chain(fit_row(f)).collect())
        .collect();
    cx.write_table("sweep.csv", &format!("m,{FIT_HEADER}"), &rows)?;
    for (m, f) in &fits {
        cx.say(format!("sweep: m = {}, c1 = {}, c3 = {}", sci(*m), sci(f.coeffs[1]), sci(f.coeffs[3])))?;
    }
    Ok(())
}

fn report<W: Write>(cx: &mut Ctx<W>) -> Result<(), Failure> {
    let results = run_all(&cx.cfg.tol);
    let mut text = String::new();
    for c in &results {
        cx.say(c.to_string())?;
        text.push_str(&c.to_string());
        text.push('\n');
    }
    cx.write_file("report.txt", text.as_bytes())?;
    let failed: Vec<&str> = results.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Check(format!("failing criteria: {}", failed.join(", "))))
    }
}

/// Caps rayon's global pool at `GRAVPHASE_THREADS` when that is set.
pub fn init_threads(var: Option<&str>) -> io::Result<()> {
    let Some(v) = var else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, format!("GRAVPHASE_THREADS = `{v}` is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(io::Error::other)
}
