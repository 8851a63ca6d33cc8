//! `combnls`: command-line front end for the comb-nls experiments.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod io;
pub mod manifest;

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use comb_nls::dynamics::{self, energy, integrate, RhsMethod, System};
use comb_nls::explicit::{explicit_b, phase_integral, PhaseQuadratureConfig};
use comb_nls::field::{synthesize_v, vnls_residual, FieldGrid};
use comb_nls::fixedpoint::{picard_solve, QuadSpec};
use comb_nls::norms::{hsp_norm_estimate, WindowSamples, WindowSpec, DEFAULT_WINDOW_SAMPLES};
use comb_nls::resonance::{divisor_stats, Truncation};
use comb_nls::{Sequence, SolverConfig, Table, Trajectory, C64};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::io::{csv_writer, fmt_f64, parse_sequence, read_trajectory, sink, write_trajectory};
use crate::manifest::{FileDigest, RunManifest};

#[derive(Debug, Parser)]
#[command(
    name = "combnls",
    version,
    about = "Fourier-mode experiments for cubic NLS with Dirac-comb data"
)]
#[command(arg_required_else_help = true)]
pub struct Cli {
    /// Worker threads for the numerical kernels.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Where to write the run manifest.
    #[arg(long, global = true)]
    pub manifest: Option<PathBuf>,
    /// Suppress progress messages; a manifest without a file still goes to
    /// standard error.
    #[arg(long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Nonresonant interaction table as JSON.
    ResonanceTable(TableArgs),
    /// Integrate a truncated mode system.
    Simulate(SimulateArgs),
    /// Closed-form solution for constant data.
    Explicit(ExplicitArgs),
    /// Picard iteration of the integral map.
    FixedPoint(FixedPointArgs),
    /// Windowed norms of a trajectory.
    Norms(NormsArgs),
    /// Physical field and equation residual from a trajectory.
    Field(FieldArgs),
    /// Divisor-count statistics.
    DivisorStats(DivisorArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ResonanceTable(_) => "resonance-table",
            Command::Simulate(_) => "simulate",
            Command::Explicit(_) => "explicit",
            Command::FixedPoint(_) => "fixed-point",
            Command::Norms(_) => "norms",
            Command::Field(_) => "field",
            Command::DivisorStats(_) => "divisor-stats",
        }
    }

    fn flags(&self) -> Value {
        match self {
            Command::ResonanceTable(a) => serde_json::to_value(a),
            Command::Simulate(a) => serde_json::to_value(a),
            Command::Explicit(a) => serde_json::to_value(a),
            Command::FixedPoint(a) => serde_json::to_value(a),
            Command::Norms(a) => serde_json::to_value(a),
            Command::Field(a) => serde_json::to_value(a),
            Command::DivisorStats(a) => serde_json::to_value(a),
        }
        .expect("flags serialize")
    }
}

#[derive(Debug, Args, Serialize)]
pub struct TableArgs {
    #[arg(long = "K")]
    pub k: i64,
    /// Datum for the Lambda column; zero when omitted.
    #[arg(long)]
    pub alpha: Option<PathBuf>,
    /// Keep all |m| <= this with indices reduced mod 2K+1.
    #[arg(long)]
    pub wrap: Option<i64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub alpha: PathBuf,
    #[arg(long = "K")]
    pub k: i64,
    /// A, Atilde, B or V.
    #[arg(long, default_value = "B")]
    pub system: String,
    #[arg(long)]
    pub t0: f64,
    #[arg(long)]
    pub t1: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub rtol: f64,
    #[arg(long, default_value_t = 1e-12)]
    pub atol: f64,
    #[arg(long, default_value_t = 101)]
    pub samples: usize,
    /// auto, table or spectral.
    #[arg(long, default_value = "auto")]
    pub method: String,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV `t,mass,energy`.
    #[arg(long)]
    pub diagnostics: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExplicitArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub alpha_re: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub alpha_im: f64,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long, default_value_t = 4096)]
    pub mmax: i64,
    /// `t0:t1:n`, n uniform times including both ends.
    #[arg(long)]
    pub sweep: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FixedPointArgs {
    #[arg(long)]
    pub alpha: PathBuf,
    #[arg(long = "K")]
    pub k: i64,
    #[arg(long = "N", default_value_t = 0)]
    pub n: i64,
    #[arg(long, default_value_t = 0.75)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long)]
    pub tmax: f64,
    #[arg(long, default_value_t = 50)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub quad_tol: f64,
    /// Solution mesh as CSV `t,k,re,im`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON report; standard output when omitted.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct NormsArgs {
    #[arg(long)]
    pub traj: PathBuf,
    /// Subtract this datum first (norms of `B - alpha`).
    #[arg(long)]
    pub alpha: Option<PathBuf>,
    #[arg(long, default_value_t = 0.75)]
    pub s: f64,
    #[arg(long, default_value_t = 2.0)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub nu_min: i64,
    #[arg(long)]
    pub nu_max: i64,
    #[arg(long, default_value_t = DEFAULT_WINDOW_SAMPLES)]
    pub window_samples: usize,
    /// CSV `nu,k,norm`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Summary JSON; standard error when omitted.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct FieldArgs {
    #[arg(long)]
    pub traj: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub xgrid: usize,
    /// Datum fixing the mass `M`; the first state's mass otherwise.
    #[arg(long)]
    pub alpha: Option<PathBuf>,
    /// CSV `t,x,re,im`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// CSV `t,res_l2`.
    #[arg(long)]
    pub residual: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct DivisorArgs {
    #[arg(long = "m-max")]
    pub m_max: i64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Ctx {
    quiet: bool,
    inputs: Vec<PathBuf>,
    outputs: Vec<PathBuf>,
}

impl Ctx {
    fn note(&self, msg: impl AsRef<str>) {
        if !self.quiet {
            eprintln!("[combnls] {}", msg.as_ref());
        }
    }

    fn input(&mut self, p: &Path) {
        self.inputs.push(p.to_owned());
    }

    fn output(&mut self, p: Option<&Path>) {
        if let Some(p) = p {
            self.outputs.push(p.to_owned());
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit status.
pub fn run<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let argv: Vec<std::ffi::OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let argv: Vec<String> = argv
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    match execute(cli, argv) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn execute(cli: Cli, argv: Vec<String>) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!("--threads must be at least 1");
        }
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let start = Instant::now();
    let mut ctx = Ctx {
        quiet: cli.quiet,
        inputs: Vec::new(),
        outputs: Vec::new(),
    };
    let primary = match &cli.command {
        Command::ResonanceTable(a) => resonance_table(a, &mut ctx)?,
        Command::Simulate(a) => simulate(a, &mut ctx)?,
        Command::Explicit(a) => explicit(a, &mut ctx)?,
        Command::FixedPoint(a) => fixed_point(a, &mut ctx)?,
        Command::Norms(a) => norms(a, &mut ctx)?,
        Command::Field(a) => field(a, &mut ctx)?,
        Command::DivisorStats(a) => divisors(a, &mut ctx)?,
    };
    let digests = |paths: &[PathBuf]| -> Result<Vec<FileDigest>> {
        paths
            .iter()
            .map(|p| FileDigest::of(p).with_context(|| format!("digest of {}", p.display())))
            .collect()
    };
    let m = RunManifest {
        tool: "combnls",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: cli.command.name().into(),
        argv,
        flags: cli.command.flags(),
        threads: rayon::current_num_threads(),
        inputs: digests(&ctx.inputs)?,
        outputs: digests(&ctx.outputs)?,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let target = cli
        .manifest
        .clone()
        .or_else(|| primary.as_deref().map(manifest::default_path));
    m.write(target.as_deref()).context("writing manifest")?;
    Ok(())
}

fn load_alpha(path: &Path, k: Option<i64>, ctx: &mut Ctx) -> Result<Sequence> {
    ctx.input(path);
    Ok(parse_sequence(path, k)?)
}

fn write_json(value: &Value, path: Option<&Path>) -> Result<()> {
    let mut w = sink(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

use std::io::Write as _;

fn resonance_table(a: &TableArgs, ctx: &mut Ctx) -> Result<Option<PathBuf>> {
    let alpha = match &a.alpha {
        Some(p) => load_alpha(p, Some(a.k), ctx)?,
        None => Sequence::zeros(a.k.max(0)),
    };
    let table = match a.wrap {
        Some(m) => Table::build_wrapped(a.k, &alpha, m)?,
        None => Table::build(a.k, &alpha)?,
    };
    ctx.note(format!(
        "{} entries, max |m| = {}",
        table.total_entries(),
        table.max_frequency()
    ));
    let mut entries = Map::new();
    for k in -a.k..=a.k {
        let rows: Vec<Value> = table
            .entries(k)
            .iter()
            .map(|e| json!([e.m, e.z, e.j1, e.j2, e.j3, e.lambda]))
            .collect();
        entries.insert(k.to_string(), Value::Array(rows));
    }
    let truncation = match table.truncation() {
        Truncation::Hard => json!("hard"),
        Truncation::Wrap { m_max } => json!({ "wrap": m_max }),
    };
    write_json(
        &json!({ "K": a.k, "truncation": truncation, "entries": entries }),
        a.out.as_deref(),
    )?;
    ctx.output(a.out.as_deref());
    Ok(a.out.clone())
}

fn rhs_method(s: &str) -> Result<RhsMethod> {
    Ok(match s {
        "auto" => RhsMethod::Auto,
        "table" => RhsMethod::Table,
        "spectral" => RhsMethod::Spectral,
        _ => bail!("unknown method {s:?} (auto, table, spectral)"),
    })
}

fn simulate(a: &SimulateArgs, ctx: &mut Ctx) -> Result<Option<PathBuf>> {
    let system: System = a.system.parse()?;
    let alpha = load_alpha(&a.alpha, Some(a.k), ctx)?;
    let table = Table::build(a.k, &alpha)?;
    let cfg = SolverConfig::new(a.k, a.t0, a.t1)
        .with_tolerances(a.rtol, a.atol)
        .with_uniform_samples(a.samples)
        .with_method(rhs_method(&a.method)?);
    let start = Instant::now();
    let traj = integrate(system, &alpha, &table, &cfg)?;
    ctx.note(format!(
        "{} system, K = {}, {} samples in {:.2?}",
        system.name(),
        a.k,
        traj.len(),
        start.elapsed()
    ));
    let mut w = csv_writer(a.out.as_deref())?;
    write_trajectory(&mut w, &traj.times, &traj.states)?;
    drop(w);
    ctx.output(a.out.as_deref());
    if let Some(d) = &a.diagnostics {
        let mut w = csv_writer(Some(d))?;
        w.write_record(["t", "mass", "energy"])?;
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let e = energy(s, *t, &cfg)?;
            w.write_record([fmt_f64(*t), fmt_f64(dynamics::mass(s)), fmt_f64(e)])?;
        }
        w.flush()?;
        ctx.output(Some(d));
    }
    Ok(a.out.clone())
}

/// `t0:t1:n` into `n` uniform times.
pub fn parse_sweep(s: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        bail!("sweep must look like t0:t1:n, got {s:?}");
    }
    let t0: f64 = parts[0]
        .parse()
        .with_context(|| format!("bad sweep start {:?}", parts[0]))?;
    let t1: f64 = parts[1]
        .parse()
        .with_context(|| format!("bad sweep end {:?}", parts[1]))?;
    let n: usize = parts[2]
        .parse()
        .with_context(|| format!("bad sweep count {:?}", parts[2]))?;
    if n == 0 || !(t1 >= t0) {
        bail!("sweep needs n >= 1 and t1 >= t0");
    }
    if n == 1 {
        return Ok(vec![t0]);
    }
    Ok((0..n)
        .map(|i| t0 + (t1 - t0) * i as f64 / (n - 1) as f64)
        .collect())
}

fn explicit(a: &ExplicitArgs, ctx: &mut Ctx) -> Result<Option<PathBuf>> {
    let times = match (&a.sweep, a.t) {
        (Some(s), _) => parse_sweep(s)?,
        (None, Some(t)) => vec![t],
        (None, None) => bail!("give --t or --sweep"),
    };
    let alpha = C64::new(a.alpha_re, a.alpha_im);
    let cfg = PhaseQuadratureConfig::with_m_max(a.mmax);
    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record(["t", "re", "im", "phase", "tail_bound"])?;
    for t in &times {
        let phi = phase_integral(*t, &cfg)?;
        let b = explicit_b(alpha, *t, &cfg)?;
        w.write_record([
            fmt_f64(*t),
            fmt_f64(b.re),
            fmt_f64(b.im),
            fmt_f64(phi.value),
            fmt_f64(phi.tail_bound),
        ])?;
    }
    w.flush()?;
    drop(w);
    ctx.note(format!("{} times, M_max = {}", times.len(), a.mmax));
    ctx.output(a.out.as_deref());
    Ok(a.out.clone())
}

fn fixed_point(a: &FixedPointArgs, ctx: &mut Ctx) -> Result<Option<PathBuf>> {
    let alpha = load_alpha(&a.alpha, Some(a.k), ctx)?.truncated(a.k)?;
    let table = Table::build(a.k, &alpha)?;
    let mut quad = QuadSpec::new(a.tmax).with_norm(a.s, a.p);
    quad.quad_tol = a.quad_tol;
    let start = Instant::now();
    let rep = picard_solve(&alpha, &table, a.n, a.tol, a.max_iter, &quad)?;
    ctx.note(format!(
        "{} iterations on {} nodes in {:.2?}, converged = {}",
        rep.iterations,
        rep.solution.times().len(),
        start.elapsed(),
        rep.converged
    ));
    let sol = &rep.solution;
    let states: Vec<Sequence> = (0..sol.times().len()).map(|i| sol.at_node(i)).collect();
    let mut w = csv_writer(a.out.as_deref())?;
    write_trajectory(&mut w, sol.times(), &states)?;
    drop(w);
    ctx.output(a.out.as_deref());
    let report = json!({
        "iterations": rep.iterations,
        "converged": rep.converged,
        "ratios": rep.ratios,
        "gaps": rep.gaps,
        "residual": rep.residual,
        "tail_bound": rep.tail_bound,
        "nodes": sol.times().len(),
    });
    write_json(&report, a.report.as_deref())?;
    ctx.output(a.report.as_deref());
    Ok(a.out.clone().or_else(|| a.report.clone()))
}

/// Cubic Lagrange interpolation through the four samples around `t`.
fn interpolate(times: &[f64], values: &[C64], t: f64) -> C64 {
    let n = times.len();
    if n == 1 {
        return values[0];
    }
    let i = times.partition_point(|x| *x < t).clamp(1, n - 1) - 1;
    let lo = i.saturating_sub(1).min(n.saturating_sub(4));
    let hi = (lo + 4).min(n);
    let mut acc = C64::new(0.0, 0.0);
    for j in lo..hi {
        let mut w = 1.0;
        for m in lo..hi {
            if m != j {
                w *= (t - times[m]) / (times[j] - times[m]);
            }
        }
        acc += values[j] * w;
    }
    acc
}

fn norms(a: &NormsArgs, ctx: &mut Ctx) -> Result<Option<PathBuf>> {
    ctx.input(&a.traj);
    let traj = read_trajectory(&a.traj, System::B, None)?;
    let alpha = match &a.alpha {
        Some(p) => Some(load_alpha(p, None, ctx)?),
        None => None,
    };
    let offset = traj.states[0].offset();
    let modes = traj.states[0].len();
    let (first, last) = (traj.times[0], *traj.times.last().unwrap());
    let per_mode: Vec<Vec<C64>> = (0..modes)
        .map(|i| {
            let k = offset + i as i64;
            let shift = alpha.as_ref().map_or(C64::new(0.0, 0.0), |s| s.get(k));
            traj.states.iter().map(|s| s.values()[i] - shift).collect()
        })
        .collect();
    let tol = 1e-9 * last.abs().max(1.0);
    let mut rows = Vec::new();
    let mut windows = Vec::new();
    if a.nu_min < 0 || a.nu_min > a.nu_max {
        bail!("need 0 <= nu-min <= nu-max");
    }
    for nu in a.nu_min..=a.nu_max {
        let w = WindowSpec::new(nu, a.window_samples)?;
        let (ea, eb) = w.extended::<f64>();
        let (ia, ib) = w.interval::<f64>();
        let mut per = Vec::with_capacity(modes);
        for vals in &per_mode {
            let f = |t: f64| interpolate(&traj.times, vals, t);
            let ws = if ea >= first - tol && eb <= last + tol {
                WindowSamples::from_fn(w, f)
            } else if ia >= first - tol && ib <= last + tol {
                let grid = w.grid::<f64>();
                let interior = grid[w.interior_range()].iter().map(|t| f(*t)).collect();
                WindowSamples::interior_only(w, interior)?
            } else {
                bail!("trajectory on [{first}, {last}] does not cover window nu = {nu} = [{ia}, {ib}]");
            };
            per.push(ws);
        }
        for (i, ws) in per.iter().enumerate() {
            rows.push((nu, offset + i as i64, hsp_norm_estimate(ws, a.s, a.p)?));
        }
        windows.push(per);
    }
    let xsp = comb_nls::norms::xsp_norm(&windows, a.s, a.p)?;
    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record(["nu", "k", "norm"])?;
    for (nu, k, v) in &rows {
        w.write_record([nu.to_string(), k.to_string(), fmt_f64(*v)])?;
    }
    w.flush()?;
    drop(w);
    ctx.output(a.out.as_deref());
    let mut slopes = Map::new();
    for i in 0..modes {
        let k = offset + i as i64;
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.1 == k && r.0 >= a.nu_min.max(1) && r.2 > 0.0)
            .map(|r| ((r.0 + 1) as f64, r.2))
            .collect();
        let slope = if pts.len() >= 2 {
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            json!(comb_nls::explicit::loglog_slope(&x, &y))
        } else {
            Value::Null
        };
        slopes.insert(k.to_string(), slope);
    }
    ctx.note(format!("xsp = {}", fmt_f64(xsp)));
    let summary = json!({ "xsp": xsp, "s": a.s, "p": a.p, "nu_min": a.nu_min, "nu_max": a.nu_max, "slopes": slopes });
    match &a.summary {
        Some(p) => {
            write_json(&summary, Some(p))?;
            ctx.output(Some(p));
        }
        None if a.out.is_some() => write_json(&summary, None)?,
        None => eprintln!("{}", serde_json::to_string(&summary)?),
    }
    Ok(a.out.clone())
}

fn field(a: &FieldArgs, ctx: &mut Ctx) -> Result<Option<PathBuf>> {
    ctx.input(&a.traj);
    let mass = match &a.alpha {
        Some(p) => Some(load_alpha(p, None, ctx)?.mass()),
        None => None,
    };
    let traj: Trajectory = read_trajectory(&a.traj, System::V, mass)?;
    let reach = traj.states[0]
        .offset()
        .abs()
        .max(traj.states[0].last_index().abs());
    let grid = FieldGrid::new(a.xgrid, reach)?;
    let xs = grid.points::<f64>();
    let mut w = csv_writer(a.out.as_deref())?;
    w.write_record(["t", "x", "re", "im"])?;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let v = synthesize_v(s, &grid)?;
        let ts = fmt_f64(*t);
        for (x, z) in xs.iter().zip(&v) {
            w.write_record([ts.clone(), fmt_f64(*x), fmt_f64(z.re), fmt_f64(z.im)])?;
        }
    }
    w.flush()?;
    drop(w);
    ctx.output(a.out.as_deref());
    if let Some(rp) = &a.residual {
        let res = vnls_residual(&traj, &grid)?;
        let mut w = csv_writer(Some(rp))?;
        w.write_record(["t", "res_l2"])?;
        for (t, r) in &res {
            w.write_record([fmt_f64(*t), fmt_f64(*r)])?;
        }
        w.flush()?;
        ctx.output(Some(rp));
        ctx.note(format!(
            "max residual {}",
            fmt_f64(res.iter().map(|r| r.1).fold(0.0, f64::max))
        ));
    }
    Ok(a.out.clone())
}

fn divisors(a: &DivisorArgs, ctx: &mut Ctx) -> Result<Option<PathBuf>> {
    let st = divisor_stats(a.m_max)?;
    ctx.note(format!("max r_m = {} at m = {}", st.max, st.argmax));
    write_json(
        &json!({ "m_max": st.m_max, "max": st.max, "argmax": st.argmax, "mean": st.mean }),
        a.out.as_deref(),
    )?;
    ctx.output(a.out.as_deref());
    Ok(a.out.clone())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_parsing() {
        assert_eq!(parse_sweep("1:3:3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_sweep("5:5:1").unwrap(), vec![5.0]);
        assert!(parse_sweep("1:2").is_err());
        assert!(parse_sweep("3:1:4").is_err());
        assert!(parse_sweep("a:1:4").is_err());
    }

    #[test]
    fn cubic_interpolation_is_exact_for_cubics() {
        let times: Vec<f64> = (0..10).map(|i| i as f64 * 0.7).collect();
        let f = |t: f64| C64::new(t * t * t - 2.0 * t, 0.5 * t * t);
        let vals: Vec<C64> = times.iter().map(|t| f(*t)).collect();
        for t in [0.0, 0.1, 3.3, 6.2, 6.3] {
            assert!((interpolate(&times, &vals, t) - f(t)).norm() < 1e-10);
        }
    }
}
