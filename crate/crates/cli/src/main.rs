use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hyperideal::coherent::{build_constraints, find_coherent, Certificate, Feasibility};
use hyperideal::energy::{self, IdealTriple, TetAngles};
use hyperideal::io::parse_angle;
use hyperideal::layout::{export_svg, lay_out, layout_to_json, SvgOptions};
use hyperideal::pattern::{self, metric_from_lengths, truncated_lengths, verify_pattern, PatternError};
use hyperideal::solution::{parse_solution, solution_to_json, Solution, SolutionReport};
use hyperideal::solve::{maximize, SolveError};
use hyperideal::surface::{parse_problem, problem_to_json, SurfaceError};
use hyperideal::{SolveOptions, SolveStatus};

mod selftest;

#[derive(Parser, Debug)]
#[command(name = "hyperideal", version, about = "Euclidean hyperideal circle patterns")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct Common {
    /// Stationarity tolerance on the projected gradient.
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 200)]
    max_iters: usize,
    /// Output file (stdout when omitted).
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Svg)]
    format: Format,
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Svg,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Decide whether a problem has a strictly coherent angle system.
    Check { input: PathBuf },
    /// Solve a problem and write a solution file.
    Solve { input: PathBuf },
    /// Draw a solution as SVG or export its layout as JSON.
    Layout { input: PathBuf },
    /// Turn a geometry file (lengths and radii) into a problem file.
    Probe { input: PathBuf },
    /// Evaluate volume formulas on literal angles (`pi/3`, `5pi/6`, `0.4`).
    Volume(VolumeArgs),
    /// Run the built-in identity and solver checks.
    Selftest,
}

#[derive(Args, Debug)]
#[group(required = true, multiple = false)]
struct VolumeArgs {
    /// Ideal tetrahedron with angles A B C.
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"], allow_hyphen_values = true)]
    ideal: Option<Vec<String>>,
    /// Truncated tetrahedron: a12 a23 a31 g1 g2 g3.
    #[arg(long, num_args = 6, value_names = ["A12", "A23", "A31", "G1", "G2", "G3"], allow_hyphen_values = true)]
    tet: Option<Vec<String>>,
    #[arg(long, num_args = 1, value_name = "ALPHA", allow_hyphen_values = true)]
    p1: Option<Vec<String>>,
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"], allow_hyphen_values = true)]
    prism: Option<Vec<String>>,
    #[arg(long, num_args = 3, value_names = ["A", "B", "C"], allow_hyphen_values = true)]
    p3: Option<Vec<String>>,
    #[arg(long, num_args = 3, value_names = ["A", "B", "G"], allow_hyphen_values = true)]
    p4: Option<Vec<String>>,
}

/// Failure classes with their exit codes.
#[derive(Debug)]
enum Failure {
    Infeasible(String),
    Parse(String),
    NotConverged(String),
    Precondition(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Infeasible(_) => 2,
            Failure::Parse(_) => 3,
            Failure::NotConverged(_) => 4,
            Failure::Precondition(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Infeasible(m) | Failure::Parse(m) | Failure::NotConverged(m) | Failure::Precondition(m) => m,
        }
    }
}

impl From<SurfaceError> for Failure {
    fn from(e: SurfaceError) -> Self {
        match e {
            SurfaceError::Invalid(_) => Failure::Precondition(e.to_string()),
            _ => Failure::Parse(e.to_string()),
        }
    }
}

impl From<PatternError> for Failure {
    fn from(e: PatternError) -> Self {
        match e {
            PatternError::Surface(s) => s.into(),
            PatternError::NotCritical { .. } => Failure::NotConverged(e.to_string()),
            _ => Failure::Precondition(e.to_string()),
        }
    }
}

type Outcome = Result<(), Failure>;

struct Ctx {
    common: Common,
}

impl Ctx {
    fn log(&self, msg: impl AsRef<str>) {
        if self.common.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn emit(&self, text: &str) -> Outcome {
        match &self.common.output {
            Some(path) => fs::write(path, text)
                .map_err(|e| Failure::Precondition(format!("cannot write {}: {e}", path.display()))),
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(text.as_bytes()).map_err(|e| Failure::Precondition(e.to_string()))
            }
        }
    }

    fn options(&self) -> Result<SolveOptions, Failure> {
        let c = &self.common;
        if !(c.tol > 0.0 && c.tol <= 1e-4) {
            return Err(Failure::Precondition(format!("--tol must lie in (0, 1e-4], got {}", c.tol)));
        }
        if c.max_iters < 1 {
            return Err(Failure::Precondition("--max-iters must be at least 1".into()));
        }
        Ok(SolveOptions { tol: c.tol, max_iters: c.max_iters })
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))
}

fn describe_certificate(cs: &hyperideal::ConstraintSystem, cert: &Certificate) -> String {
    let mut out = String::from("infeasible: no strictly coherent angle system\n");
    match (cert.max_slack, cert.phase_one_value) {
        (Some(s), _) => out.push_str(&format!("  best common slack of the strict inequalities: {s:.6e}\n")),
        (None, Some(p)) => out.push_str(&format!("  equalities inconsistent with the relaxed bounds (phase-one value {p:.6e})\n")),
        _ => {}
    }
    let labels = cs.eq_labels.iter().chain(&cs.ineq_labels);
    let mut rows: Vec<(f64, String)> =
        cert.duals.iter().zip(labels).filter(|(y, _)| y.abs() > 1e-12).map(|(y, l)| (*y, l.to_string())).collect();
    rows.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()));
    if !rows.is_empty() {
        out.push_str("  certificate multipliers:\n");
        for (y, l) in rows {
            out.push_str(&format!("    {y:+.6e}  {l}\n"));
        }
    }
    out
}

fn check(ctx: &Ctx, input: &Path) -> Outcome {
    let text = read(input)?;
    // Solution files are re-validated against their own problem.
    if let Ok(sol) = parse_solution(&text) {
        let rep = sol.coherence();
        if rep.coherent {
            println!("coherent: stored angle system satisfies all constraints (min slack {:.6e})", rep.min_slack);
            return Ok(());
        }
        let names: Vec<String> = rep.failures.iter().map(|(l, v)| format!("{l} ({v:.3e})")).collect();
        return Err(Failure::Precondition(format!("stored angle system is not coherent: {}", names.join(", "))));
    }
    let (tri, data) = parse_problem(&text)?;
    let cs = build_constraints(&tri, &data);
    ctx.log(format!(
        "{} equality rows (rank {}), {} inequality rows, {} unknowns",
        cs.eq.nrows(),
        cs.eq_rank(),
        cs.ineq.nrows(),
        cs.dim()
    ));
    match find_coherent(&cs).map_err(|e| Failure::NotConverged(e.to_string()))? {
        Feasibility::Feasible { x, slack } => {
            println!("feasible: strictly coherent angle system found (slack {slack:.6e})");
            if ctx.common.output.is_some() {
                let sol = Solution { tri, data, x, lengths: None, metric: None, report: None };
                ctx.emit(&solution_to_json(&sol))?;
            }
            Ok(())
        }
        Feasibility::Infeasible(cert) => Err(Failure::Infeasible(describe_certificate(&cs, &cert))),
    }
}

fn solve(ctx: &Ctx, input: &Path) -> Outcome {
    let opts = ctx.options()?;
    let (tri, data) = parse_problem(&read(input)?)?;
    let cs = build_constraints(&tri, &data);
    let x0 = match find_coherent(&cs).map_err(|e| Failure::NotConverged(e.to_string()))? {
        Feasibility::Feasible { x, slack } => {
            ctx.log(format!("starting point with slack {slack:.3e}"));
            x
        }
        Feasibility::Infeasible(cert) => return Err(Failure::Infeasible(describe_certificate(&cs, &cert))),
    };
    let (x, report) = maximize(&tri, &data, &x0, &opts).map_err(|e| match e {
        SolveError::Infeasible(_) => Failure::Infeasible(e.to_string()),
        _ => Failure::Precondition(e.to_string()),
    })?;
    for d in &report.diagnostics {
        eprintln!("warning: {d}");
    }
    ctx.log(format!(
        "{:?} after {} iterations: F = {:.17e}, projected gradient {:.3e}",
        report.status, report.iterations, report.objective, report.grad_norm
    ));
    if report.status != SolveStatus::Converged {
        return Err(Failure::NotConverged(format!(
            "solver stopped ({:?}) after {} iterations with projected gradient {:.3e} > {:.1e}",
            report.status, report.iterations, report.grad_norm, opts.tol
        )));
    }
    let lengths = truncated_lengths(&x, &tri)?;
    let metric = metric_from_lengths(&lengths, &tri);
    let residuals = verify_pattern(&tri, &data, &metric);
    ctx.log(format!(
        "theta residual {:.3e}, xi residual {:.3e}, condition margins {:.3e} / {:.3e}",
        residuals.theta_residual, residuals.xi_residual, residuals.condition_one_slack, residuals.condition_two_margin
    ));
    let sol = Solution {
        tri,
        data,
        x,
        lengths: Some(lengths),
        metric: Some(metric),
        report: Some(SolutionReport { solve: report, residuals }),
    };
    ctx.emit(&solution_to_json(&sol))
}

fn layout(ctx: &Ctx, input: &Path) -> Outcome {
    let sol = parse_solution(&read(input)?)?;
    let Some(metric) = sol.metric.as_ref() else {
        return Err(Failure::Precondition("solution file has no lengths and radii; run `solve` first".into()));
    };
    let cl = lay_out(&sol.tri, metric)?;
    for w in &cl.warnings {
        eprintln!("warning: {w}");
    }
    ctx.log(format!("{:?} layout of {} triangles", cl.mode, cl.triangles.len()));
    match ctx.common.format {
        Format::Svg => ctx.emit(&export_svg(&cl, &SvgOptions::default())),
        Format::Json => ctx.emit(&layout_to_json(&cl)),
    }
}

fn probe(ctx: &Ctx, input: &Path) -> Outcome {
    let (tri, dm) = pattern::parse_geometry(&read(input)?)?;
    let (data, _) = pattern::probe(&tri, &dm)?;
    ctx.emit(&problem_to_json(&tri, &data))
}

fn angles(values: &[String]) -> Result<Vec<f64>, Failure> {
    values.iter().map(|v| parse_angle(v).map_err(Failure::Parse)).collect()
}

fn volume(ctx: &Ctx, args: &VolumeArgs) -> Outcome {
    let pre = |e: energy::EnergyError| Failure::Precondition(e.to_string());
    let value = if let Some(v) = &args.ideal {
        let a = angles(v)?;
        energy::v0(&IdealTriple::new(a[0], a[1], a[2])).map_err(pre)?
    } else if let Some(v) = &args.tet {
        let a = angles(v)?;
        let t = TetAngles::new([a[0], a[1], a[2]], [a[3], a[4], a[5]]);
        if ctx.common.verbose {
            let class = energy::classify(&t).map_err(pre)?;
            eprintln!("class: {class:?}");
            for tr in energy::five_tetra(&t).map_err(pre)?.triples() {
                eprintln!("  ideal {:?}: {}", tr.0, energy::v0(&tr).map_err(pre)?);
            }
        }
        energy::tet_volume(&t).map_err(pre)?
    } else if let Some(v) = &args.p1 {
        energy::vol_p1(angles(v)?[0]).map_err(pre)?
    } else if let Some(v) = &args.prism {
        let a = angles(v)?;
        energy::vol_prism(a[0], a[1], a[2]).map_err(pre)?
    } else if let Some(v) = &args.p3 {
        let a = angles(v)?;
        energy::vol_p3(a[0], a[1], a[2]).map_err(pre)?
    } else if let Some(v) = &args.p4 {
        let a = angles(v)?;
        energy::vol_p4(a[0], a[1], a[2]).map_err(pre)?
    } else {
        unreachable!("clap enforces exactly one formula")
    };
    ctx.emit(&format!("{value}\n"))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(3) } else { ExitCode::SUCCESS };
        }
    };
    let ctx = Ctx { common: cli.common };
    let result = match &cli.command {
        Command::Check { input } => check(&ctx, input),
        Command::Solve { input } => solve(&ctx, input),
        Command::Layout { input } => layout(&ctx, input),
        Command::Probe { input } => probe(&ctx, input),
        Command::Volume(args) => volume(&ctx, args),
        Command::Selftest => selftest::run(ctx.common.verbose),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("{}", f.message().trim_end());
            ExitCode::from(f.code())
        }
    }
}
