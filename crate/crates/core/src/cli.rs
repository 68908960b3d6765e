//! Command-line front end.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::atoms::AtomSum;
use crate::convolution::{
    approx_identity_convergence_multi, bump, convolve, density_experiment, tent, young_check, ApproxIdentity, DensityReport,
};
use crate::error::{Error, Result};
use crate::kernel::kernel;
use crate::measure::{fmt17, GridFunction, GridSpec};
use crate::params::Params;
use crate::report::{all_passed, run_suite, CheckReport, Status, Suite, SuiteConfig, Tolerances};
use crate::schwartz::{membership_report, Member, SeminormReport, ATOM_RANGE_MAX};
use crate::transform::{gaussian_closed_form, ClosedFormSummary, TransformPlan};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILED_CHECK: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "genfourier", version, about = "The (k, 2/n)-generalized Fourier transform in one dimension")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub k: Option<f64>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    /// Nodes of the source grid.
    #[arg(long = "grid-points", global = true)]
    pub grid_points: Option<usize>,
    /// Truncation radius of the source grid in u = sgn(x)|x|^(1/n).
    #[arg(long = "u-max", global = true)]
    pub u_max: Option<f64>,
    /// Tolerance override, NAME=VALUE; repeatable.
    #[arg(long = "tol", global = true, value_name = "NAME=VALUE")]
    pub tol: Vec<String>,
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Kernel values B(x, y) on a square lattice.
    Kernel {
        /// Half-width of the lattice.
        #[arg(long, default_value_t = 3.0)]
        extent: f64,
        /// Lattice points per axis.
        #[arg(long, default_value_t = 13)]
        points: usize,
    },
    /// Forward transform of a Gaussian or an atom file.
    Transform {
        /// Gaussian rate s in exp(-s n |x|^(2/n)).
        #[arg(long)]
        s: Option<f64>,
        /// Atom sum as a JSON array of atom records.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Only target points with |x| up to this radius are written.
        #[arg(long, default_value_t = 3.0)]
        radius: f64,
    },
    /// Generalized convolution of two Gaussians or atom files.
    Convolve {
        #[arg(long, default_value_t = 0.5)]
        s: f64,
        #[arg(long, default_value_t = 0.8)]
        s2: f64,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        input2: Option<PathBuf>,
        /// Exponent for the Young ratio, with r = 1 and q = p.
        #[arg(long, default_value_t = 2.0)]
        p: f64,
    },
    /// Approximate-identity convergence and the density argument.
    DensityExperiment {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.05)]
        epsilon: f64,
    },
    /// Seminorm table of an atom sum or a bump.
    Report {
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        input: Option<PathBuf>,
        /// Report the bump exp(-1/(1-u^2)) on |u| < 1 instead of atoms.
        #[arg(long)]
        bump: bool,
        #[arg(long, default_value_t = 3)]
        alpha: u32,
        #[arg(long, default_value_t = 3)]
        beta: u32,
        #[arg(long, default_value_t = 3)]
        ell: u32,
    },
    /// Run verification suites and write a JSON array of check reports.
    Verify {
        /// Suites to run; all when omitted.
        #[arg(long = "suite")]
        suites: Vec<String>,
    },
}

/// Grid section of [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub u_max: f64,
    pub points: usize,
    pub panels: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Option<Format>,
}

/// On-disk run configuration. Every field is optional.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub k: Option<f64>,
    pub n: Option<u32>,
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub suites: Vec<String>,
    pub output: Option<OutputConfig>,
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("{origin}: line {} column {}: {e}", e.line(), e.column())))
    }
}

/// Config and flags merged and validated.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub params: Params,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub suites: Vec<Suite>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

pub fn resolve(common: &Common, suites_flag: &[String]) -> Result<Resolved> {
    let cfg = match &common.config {
        Some(path) => RunConfig::from_json(&fs::read_to_string(path)?, &path.display().to_string())?,
        None => RunConfig::default(),
    };
    let k = common.k.or(cfg.k).unwrap_or(1.0);
    let n = common.n.or(cfg.n).unwrap_or(1);
    let params = Params::new(k, n)?;
    let mut grid = cfg.grid.map_or_else(GridSpec::default, |g| GridSpec::new(g.u_max, g.points, g.panels));
    if let Some(p) = common.grid_points {
        grid.points = p;
    }
    if let Some(u) = common.u_max {
        grid.u_max = u;
    }
    crate::measure::QuadratureGrid::new(params, grid)?;
    let mut tolerances = Tolerances::default();
    for (name, v) in &cfg.tolerances {
        tolerances.set(name, *v)?;
    }
    for item in &common.tol {
        let (name, v) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("--tol expects NAME=VALUE, got '{item}'")))?;
        let v: f64 = v.trim().parse().map_err(|_| Error::Parse(format!("--tol {name}: '{v}' is not a number")))?;
        tolerances.set(name.trim(), v)?;
    }
    let names = if suites_flag.is_empty() { &cfg.suites } else { suites_flag };
    let mut suites = names.iter().map(|s| s.parse()).collect::<Result<Vec<Suite>>>()?;
    if suites.is_empty() {
        suites = Suite::ALL.to_vec();
    }
    let out_cfg = cfg.output.unwrap_or(OutputConfig { path: None, format: None });
    Ok(Resolved {
        params,
        grid,
        tolerances,
        suites,
        output: common.output.clone().or(out_cfg.path),
        format: common.format.or(out_cfg.format),
    })
}

/// Width of the rayon pool from `GENFOURIER_THREADS`, if set.
pub fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("GENFOURIER_THREADS") else { return Ok(()) };
    let threads: usize = v
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("GENFOURIER_THREADS must be a positive integer, got '{v}'")))?;
    if threads == 0 {
        return Err(Error::Parse("GENFOURIER_THREADS must be positive".into()));
    }
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_atoms(path: &Path) -> Result<AtomSum> {
    AtomSum::from_json(&fs::read_to_string(path)?).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn atoms_or_gaussian(input: Option<&PathBuf>, s: Option<f64>, default: f64) -> Result<(AtomSum, Option<f64>)> {
    match (input, s) {
        (Some(_), Some(_)) => Err(Error::Parse("give either --s or --input, not both".into())),
        (Some(p), None) => Ok((load_atoms(p)?, None)),
        (None, s) => {
            let s = s.unwrap_or(default);
            Ok((AtomSum::gaussian(s)?, Some(s)))
        }
    }
}

/// Slowest decay among the atoms, used to size plans.
fn slowest_rate(f: &AtomSum) -> f64 {
    f.terms().iter().map(|a| a.rate).fold(f64::INFINITY, f64::min).min(1.0)
}

fn json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v)?;
    s.push('\n');
    Ok(s)
}

/// Parses arguments, runs, and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    configure_threads()?;
    let suites_flag: &[String] = match &cli.command {
        Command::Verify { suites } => suites,
        _ => &[],
    };
    let cfg = resolve(&cli.common, suites_flag)?;
    let p = cfg.params;
    let out = cfg.output.as_deref();
    match &cli.command {
        Command::Kernel { extent, points } => {
            if *points < 2 || !(*extent > 0.0) {
                return Err(Error::Domain("kernel lattice needs points >= 2 and a positive extent".into()));
            }
            let mut s = String::from("x,y,re,im\n");
            let at = |i: usize| -extent + 2.0 * extent * i as f64 / (*points - 1) as f64;
            for i in 0..*points {
                for j in 0..*points {
                    let (x, y) = (at(i), at(j));
                    let b = kernel(&p, x, y)?;
                    s.push_str(&format!("{},{},{},{}\n", fmt17(x), fmt17(y), fmt17(b.re), fmt17(b.im)));
                }
            }
            write_out(out, &s)?;
        }
        Command::Transform { s, input, radius } => {
            let (f, rate) = atoms_or_gaussian(input.as_ref(), *s, 0.5)?;
            let plan = TransformPlan::for_rate(p, slowest_rate(&f), cfg.grid.points, cfg.grid.panels)?;
            let ff = plan.forward_atoms(&f)?;
            let exact = rate.map(|s| gaussian_closed_form(&p, s)).transpose()?;
            let mut csv = String::from(if exact.is_some() { "x,re,im,abs_error\n" } else { "x,re,im\n" });
            let mut worst: f64 = 0.0;
            for (y, v) in plan.target().x_nodes().iter().zip(ff.values()) {
                if y.abs() > *radius {
                    continue;
                }
                csv.push_str(&format!("{},{},{}", fmt17(*y), fmt17(v.re), fmt17(v.im)));
                if let Some(g) = &exact {
                    let e = (v - g.evaluate_nonzero(&p, *y)).norm();
                    worst = worst.max(e);
                    csv.push_str(&format!(",{}", fmt17(e)));
                }
                csv.push('\n');
            }
            let summary = rate.map(|s| ClosedFormSummary {
                k: p.k(),
                n: p.n(),
                s,
                radius: *radius,
                max_abs_error_vs_closed_form: worst,
            });
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => {
                    write_out(out, &csv)?;
                    if let Some(sm) = &summary {
                        let text = json(sm)?;
                        match out {
                            Some(path) => fs::write(path.with_extension("summary.json"), text)?,
                            None => eprint!("{text}"),
                        }
                    }
                }
                Format::Json => match &summary {
                    Some(sm) => write_out(out, &json(sm)?)?,
                    None => write_out(out, &json(&ff.values().iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())?)?,
                },
            }
        }
        Command::Convolve { s, s2, input, input2, p: exp } => {
            let f = match input {
                Some(path) => load_atoms(path)?,
                None => AtomSum::gaussian(*s)?,
            };
            let g = match input2 {
                Some(path) => load_atoms(path)?,
                None => AtomSum::gaussian(*s2)?,
            };
            let rate = slowest_rate(&f).min(slowest_rate(&g));
            let plan = TransformPlan::for_rate(p, rate, cfg.grid.points, cfg.grid.panels)?;
            let (fs_, gs) = (plan.sample(&f)?, plan.sample(&g)?);
            let fg = convolve(&plan, &fs_, &gs)?;
            match cfg.format.unwrap_or(Format::Csv) {
                Format::Csv => write_out(out, &fg.to_csv())?,
                Format::Json => {
                    let gf = convolve(&plan, &gs, &fs_)?;
                    let summary = ConvolveSummary {
                        k: p.k(),
                        n: p.n(),
                        commutativity: fg.sub(&gf)?.sup_norm(),
                        young_p: *exp,
                        young_ratio: young_check(&plan, &fs_, &gs, *exp, 1.0, *exp)?,
                        support_radius: fg.support_radius(1e-10),
                    };
                    write_out(out, &json(&summary)?)?;
                }
            }
        }
        Command::DensityExperiment { p: exp, epsilon } => {
            let report = density_run(&p, *exp, *epsilon)?;
            match cfg.format.unwrap_or(Format::Json) {
                Format::Json => write_out(out, &json(&report)?)?,
                Format::Csv => {
                    let mut s = String::from("input,r,error\n");
                    for seq in &report.sequences {
                        for (r, e) in report.schedule.iter().zip(&seq.errors) {
                            s.push_str(&format!("{},{},{}\n", seq.input, fmt17(*r), fmt17(*e)));
                        }
                    }
                    write_out(out, &s)?;
                }
            }
            if !report.density.success {
                return Ok(EXIT_FAILED_CHECK);
            }
        }
        Command::Report { s, input, bump: use_bump, alpha, beta, ell } => {
            let range = (*alpha).max(*beta).max(*ell);
            let full = if *use_bump {
                let grid = std::sync::Arc::new(crate::measure::QuadratureGrid::new(p, GridSpec::new(1.0, 512, 16))?);
                let b = GridFunction::from_real_fn(grid, bump(&p, 1.0))?;
                membership_report(Member::Grid(&b), &p, range)?
            } else {
                if range > ATOM_RANGE_MAX {
                    return Err(Error::Capacity(format!("atom reports go up to {ATOM_RANGE_MAX}")));
                }
                let (f, _) = atoms_or_gaussian(input.as_ref(), *s, 0.5)?;
                membership_report(Member::Atoms(&f), &p, range)?
            };
            let report = SeminormReport {
                params: full.params,
                entries: full
                    .entries
                    .into_iter()
                    .filter(|e| e.alpha <= *alpha && e.beta <= *beta && e.ell <= *ell)
                    .collect(),
            };
            let text = match cfg.format.unwrap_or(Format::Json) {
                Format::Json => json(&report)?,
                Format::Csv => report.to_csv(),
            };
            write_out(out, &text)?;
        }
        Command::Verify { .. } => {
            let sc = SuiteConfig { tolerances: cfg.tolerances.clone(), grid: cfg.grid, ..SuiteConfig::default() };
            let mut reports: Vec<CheckReport> = Vec::new();
            for suite in &cfg.suites {
                reports.extend(run_suite(*suite, &p, &sc));
            }
            for r in &reports {
                let tag = match r.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Skipped => "SKIP",
                };
                eprintln!("{tag} {} residual={:.3e} tol={:.1e}", r.name, r.residual, r.tolerance);
            }
            let text = match cfg.format.unwrap_or(Format::Json) {
                Format::Json => json(&reports)?,
                Format::Csv => {
                    let mut s = String::from("name,status,residual,tolerance\n");
                    for r in &reports {
                        let st = serde_json::to_string(&r.status)?;
                        s.push_str(&format!("{},{},{},{}\n", r.name, st.trim_matches('"'), fmt17(r.residual), fmt17(r.tolerance)));
                    }
                    s
                }
            };
            write_out(out, &text)?;
            if !all_passed(&reports) {
                return Ok(EXIT_FAILED_CHECK);
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvolveSummary {
    pub k: f64,
    pub n: u32,
    pub commutativity: f64,
    pub young_p: f64,
    pub young_ratio: f64,
    pub support_radius: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorSequence {
    pub input: String,
    pub p: f64,
    pub norm: f64,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityRun {
    pub k: f64,
    pub n: u32,
    pub schedule: Vec<f64>,
    pub sequences: Vec<ErrorSequence>,
    pub density: DensityReport,
}

/// Approximate-identity error sequences for a Gaussian and a bump, plus the
/// density argument on a tent.
pub fn density_run(p: &Params, exp: f64, epsilon: f64) -> Result<DensityRun> {
    let schedule = vec![1.0, 0.5, 0.25, 0.125];
    let phi = ApproxIdentity::bump(*p, 0.25)?;
    let mut sequences = Vec::new();
    let gp = TransformPlan::for_rate(*p, 0.5, 512, 16)?;
    let gf = gp.sample(&AtomSum::gaussian(0.5)?)?;
    let sp = TransformPlan::for_support(*p, 3.0)?;
    let bf = GridFunction::from_real_fn(sp.source().clone(), bump(p, 1.0))?;
    for (name, plan, f) in [("gaussian", &gp, &gf), ("bump", &sp, &bf)] {
        let errors = approx_identity_convergence_multi(plan, f, &phi, &[exp], &schedule)?.remove(0);
        sequences.push(ErrorSequence { input: name.into(), p: exp, norm: f.norm(exp)?, errors });
    }
    let density = density_experiment(&sp, tent(p, 1.0), &phi, exp, epsilon, &[1.0, 0.5, 0.25, 0.125, 0.0625])?;
    Ok(DensityRun { k: p.k(), n: p.n(), schedule, sequences, density })
}
