//! Command-line front end. Every command returns its process exit code so
//! the binary stays a one-liner and tests can drive commands in-process.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::complex::{check_star, euler_characteristic, triangulate, CellComplex};
use crate::curvature::PatternState;
use crate::existence::{check_h3, Coverage};
use crate::flow::{fit_exponential, run, FlowConfig, FlowKind, Method, StopReason};
use crate::geometry::Geometry;
use crate::io::{read_instance, read_trajectory_csv, write_trajectory_csv, RunSummary};

pub const EXIT_OK: i32 = 0;
/// Unreadable or malformed input, invalid complex, bad flags.
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_STAR: i32 = 2;
pub const EXIT_UNDERFLOW: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ideal-patterns", version, about = "Ideal circle patterns via combinatorial Calabi and Ricci flows")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlowArg {
    Calabi,
    Ricci,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GeometryArg {
    Euclidean,
    Hyperbolic,
}

impl From<GeometryArg> for Geometry {
    fn from(g: GeometryArg) -> Self {
        match g {
            GeometryArg::Euclidean => Geometry::Euclidean,
            GeometryArg::Hyperbolic => Geometry::Hyperbolic,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Rk4,
    Euler,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print complex statistics and the per-face angle-sum check.
    Validate { input: PathBuf },
    /// Integrate a flow and write the trajectory and a JSON summary.
    Flow {
        input: PathBuf,
        #[arg(long, value_enum, default_value = "calabi")]
        flow: FlowArg,
        #[arg(long, value_enum)]
        geometry: GeometryArg,
        /// Initial radii: a constant, or a file holding one radius per vertex.
        #[arg(long, default_value = "1")]
        r0: String,
        #[arg(long, default_value_t = 1e-2)]
        dt: f64,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 1_000_000)]
        max_steps: usize,
        #[arg(long, value_enum, default_value = "rk4")]
        method: MethodArg,
        #[arg(long, default_value_t = 1)]
        record_every: usize,
        /// Trajectory CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Summary JSON; defaults to `<out>.summary.json` next to the CSV.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Check the angle-sum condition and, with --h3, the subset inequality.
    Check {
        input: PathBuf,
        #[arg(long)]
        h3: bool,
    },
    /// Turn a trajectory CSV into plot-ready TSVs and fit the decay rate.
    Report {
        trajectory: PathBuf,
        /// Curvature target subtracted before computing residuals.
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        k_target: f64,
        /// Output prefix; defaults to the CSV path without its extension.
        #[arg(long)]
        prefix: Option<PathBuf>,
    },
}

/// Parse `args` (including the program name) and run the command.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                return EXIT_INVALID;
            }
            let _ = write!(out, "{}", e.render());
            return EXIT_OK;
        }
    };
    execute(&cli.command, out, err)
}

pub fn execute(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match command {
        Command::Validate { input } => cmd_validate(input, out),
        Command::Flow { .. } => cmd_flow(command, out, err),
        Command::Check { input, h3 } => cmd_check(input, *h3, out),
        Command::Report { trajectory, k_target, prefix } => cmd_report(trajectory, *k_target, prefix.as_deref(), out),
    };
    match result {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INVALID
        }
    }
}

type CmdResult = Result<i32, String>;

fn load(input: &Path) -> Result<CellComplex, String> {
    read_instance(input).map_err(|e| format!("{}: {e}", input.display()))
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> String + '_ {
    move |e| format!("{}: {e}", path.display())
}

fn cmd_validate(input: &Path, out: &mut dyn Write) -> CmdResult {
    let c = load(input)?;
    let star = check_star(&c);
    let w = |e: std::io::Error| e.to_string();
    writeln!(out, "vertices\t{}", c.num_vertices()).map_err(w)?;
    writeln!(out, "edges\t{}", c.num_edges()).map_err(w)?;
    writeln!(out, "faces\t{}", c.num_faces()).map_err(w)?;
    writeln!(out, "euler_characteristic\t{}", euler_characteristic(&c)).map_err(w)?;
    writeln!(out, "genus\t{}", c.genus()).map_err(w)?;
    for f in &star.faces {
        writeln!(
            out,
            "face {}\tsides {}\tresidual {:.3e}\t{}\t{}",
            f.face,
            f.slots,
            f.residual,
            if f.exact { "exact" } else { "float" },
            if f.pass { "pass" } else { "FAIL" }
        )
        .map_err(w)?;
    }
    let pass = star.all_pass();
    writeln!(out, "angle_sum\t{}", if pass { "pass" } else { "FAIL" }).map_err(w)?;
    Ok(if pass { EXIT_OK } else { EXIT_STAR })
}

/// A number, or a file with one radius per vertex (JSON array or
/// whitespace/comma separated).
fn initial_radii(spec: &str, n: usize) -> Result<Vec<f64>, String> {
    if let Ok(r) = spec.trim().parse::<f64>() {
        return Ok(vec![r; n]);
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    let radii: Vec<f64> = match serde_json::from_str::<Vec<f64>>(&text) {
        Ok(v) => v,
        Err(_) => text
            .split(|ch: char| ch.is_whitespace() || ch == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|e| format!("{}: {s:?}: {e}", path.display())))
            .collect::<Result<_, _>>()?,
    };
    if radii.len() != n {
        return Err(format!("{}: expected {n} radii, found {}", path.display(), radii.len()));
    }
    Ok(radii)
}

fn default_summary_path(out: &Path) -> PathBuf {
    let mut name = out.file_stem().unwrap_or_default().to_os_string();
    name.push(".summary.json");
    out.with_file_name(name)
}

fn cmd_flow(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let Command::Flow { input, flow, geometry, r0, dt, tol, max_steps, method, record_every, out: csv, summary } =
        command
    else {
        unreachable!("cmd_flow called with another command");
    };
    let c = load(input)?;
    let star = check_star(&c);
    if !star.all_pass() {
        for f in star.failures() {
            let _ = writeln!(err, "face {} violates the angle-sum condition (residual {:.3e})", f.face, f.residual);
        }
        return Ok(EXIT_STAR);
    }
    let geometry = Geometry::from(*geometry);
    let tri = triangulate(&c).map_err(|e| e.to_string())?;
    let s0 = PatternState::from_radii(geometry, initial_radii(r0, c.num_vertices())?).map_err(|e| e.to_string())?;
    let cfg = FlowConfig {
        kind: FlowKind::new(*flow == FlowArg::Calabi, geometry),
        dt: *dt,
        tol: *tol,
        max_steps: *max_steps,
        method: match method {
            MethodArg::Rk4 => Method::Rk4,
            MethodArg::Euler => Method::Euler,
        },
        record_every: *record_every,
    };
    let traj = run(&cfg, &tri, &s0).map_err(|e| e.to_string())?;

    if let Some(path) = csv {
        let mut w = BufWriter::new(File::create(path).map_err(io_err(path))?);
        write_trajectory_csv(&traj, &mut w).and_then(|_| w.flush()).map_err(io_err(path))?;
    }
    let summary_doc = RunSummary::from_trajectory(&traj);
    let json = serde_json::to_string_pretty(&summary_doc).map_err(|e| e.to_string())?;
    if let Some(path) = summary.clone().or_else(|| csv.as_deref().map(default_summary_path)) {
        std::fs::write(&path, format!("{json}\n")).map_err(io_err(&path))?;
    }
    writeln!(out, "{json}").map_err(|e| e.to_string())?;
    Ok(match traj.stop_reason {
        StopReason::Converged => EXIT_OK,
        StopReason::StepUnderflow => EXIT_UNDERFLOW,
        StopReason::MaxSteps => EXIT_BUDGET,
    })
}

fn cmd_check(input: &Path, h3: bool, out: &mut dyn Write) -> CmdResult {
    let c = load(input)?;
    let w = |e: std::io::Error| e.to_string();
    let star = check_star(&c);
    writeln!(out, "angle_sum\t{}", if star.all_pass() { "pass" } else { "FAIL" }).map_err(w)?;
    if h3 {
        let v = check_h3(&c);
        let coverage = match v.coverage {
            Coverage::Exact => "exact",
            Coverage::Sampled => "sampled",
        };
        writeln!(
            out,
            "h3\t{} ({coverage}, {} subsets checked)",
            if v.pass { "pass" } else { "FAIL" },
            v.subsets_checked
        )
        .map_err(w)?;
        if let Some(set) = &v.witness {
            let list: Vec<String> = set.iter().map(|x| format!("v{x}")).collect();
            writeln!(out, "witness\t{{{}}}", list.join(", ")).map_err(w)?;
        }
    }
    Ok(EXIT_OK)
}

fn cmd_report(csv: &Path, k_target: f64, prefix: Option<&Path>, out: &mut dyn Write) -> CmdResult {
    let file = File::open(csv).map_err(io_err(csv))?;
    let rows = read_trajectory_csv(BufReader::new(file)).map_err(|e| format!("{}: {e}", csv.display()))?;
    let prefix = prefix.map(Path::to_path_buf).unwrap_or_else(|| csv.with_extension(""));
    let with_suffix = |s: &str| {
        let mut p = prefix.clone().into_os_string();
        p.push(s);
        PathBuf::from(p)
    };

    // residual energy sum (K_i - target)^2; the stored column when target = 0
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let e = if k_target == 0.0 { r.energy } else { r.k.iter().map(|k| (k - k_target).powi(2)).sum() };
            (r.t, e)
        })
        .collect();

    let energy_path = with_suffix(".energy.tsv");
    let mut energy_tsv = String::from("t\tln_energy\n");
    for &(t, e) in points.iter().filter(|(_, e)| *e > 0.0) {
        energy_tsv.push_str(&format!("{t:.16e}\t{:.16e}\n", e.ln()));
    }
    std::fs::write(&energy_path, energy_tsv).map_err(io_err(&energy_path))?;

    let maxk_path = with_suffix(".maxk.tsv");
    let mut maxk_tsv = String::from("t\tmax_abs_k\n");
    for r in &rows {
        let m = r.k.iter().map(|k| (k - k_target).abs()).fold(0.0, f64::max);
        maxk_tsv.push_str(&format!("{:.16e}\t{m:.16e}\n", r.t));
    }
    std::fs::write(&maxk_path, maxk_tsv).map_err(io_err(&maxk_path))?;

    let fit = fit_exponential(&points).map_err(|e| e.to_string())?;
    let w = |e: std::io::Error| e.to_string();
    writeln!(out, "energy_tsv\t{}", energy_path.display()).map_err(w)?;
    writeln!(out, "max_k_tsv\t{}", maxk_path.display()).map_err(w)?;
    writeln!(out, "lambda\t{:.12e}", fit.lambda).map_err(w)?;
    writeln!(out, "r2\t{:.12}", fit.r2).map_err(w)?;
    Ok(EXIT_OK)
}
