//! Command-line front end: single solves, convergence studies, robustness
//! tests, scheme comparison, and mesh generation.
//!
//! Exit codes: 0 success, 1 usage or runtime error, 2 when a threshold
//! check requested with --check fails.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use stokes2d::assembly::{StabConfig, StabKind};
use stokes2d::harness::{
    compute_errors, convergence_study, divergence_check, robustness_test, solve_case, write_csv,
    ErrorReport, RunScheme, Study,
};
use stokes2d::manufactured::{example51, Potential};
use stokes2d::mesh::Mesh;
use stokes2d::vtk::write_vtk;

#[derive(Parser)]
#[command(
    name = "stokes2d",
    about = "Divergence-free Stokes solver on triangulated domains",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the built-in manufactured case on one mesh and report errors
    Solve(SolveArgs),
    /// Solve on a dyadic mesh family and report errors with observed orders
    Convergence(ConvergenceArgs),
    /// Perturb the force by a gradient field and measure the response
    Robustness(RobustnessArgs),
    /// Compare the divergence-free scheme against the bubble scheme
    CompareBr(CompareBrArgs),
    /// Generate a structured mesh file
    Mesh(MeshArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum StabArg {
    J0,
    Jd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Full,
    Condensed,
    Br,
}

impl SchemeArg {
    fn run_scheme(self) -> RunScheme {
        match self {
            SchemeArg::Full => RunScheme::Full,
            SchemeArg::Condensed => RunScheme::Condensed,
            SchemeArg::Br => RunScheme::BernardiRaugel,
        }
    }
}

#[derive(Args)]
struct ProblemArgs {
    /// Structured mesh subdivisions per side
    #[arg(long, default_value_t = 16, conflicts_with = "mesh")]
    n: usize,
    /// Read the mesh from a text file instead of generating one
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Viscosity
    #[arg(long, default_value_t = 1e-6)]
    nu: f64,
    /// Stabilization form (defaults to jd; not allowed with --scheme br)
    #[arg(long, value_enum)]
    stab: Option<StabArg>,
    /// Stabilization parameter (defaults to 1; not allowed with --scheme br)
    #[arg(long)]
    alpha: Option<f64>,
}

impl ProblemArgs {
    fn load_mesh(&self) -> Result<Mesh, String> {
        if let Some(path) = &self.mesh {
            Mesh::read_text(path).map_err(|e| format!("reading {}: {e}", path.display()))
        } else if self.n == 0 {
            Err("--n must be at least 1".into())
        } else {
            Ok(Mesh::generate_structured(self.n))
        }
    }

    fn level_label(&self) -> usize {
        if self.mesh.is_some() {
            0
        } else {
            self.n
        }
    }

    fn stab_config(&self, scheme: SchemeArg) -> Result<Option<StabConfig>, String> {
        if scheme == SchemeArg::Br {
            if self.stab.is_some() || self.alpha.is_some() {
                return Err("--scheme br takes no stabilization flags".into());
            }
            return Ok(None);
        }
        let kind = match self.stab.unwrap_or(StabArg::Jd) {
            StabArg::J0 => StabKind::J0,
            StabArg::Jd => StabKind::Jd,
        };
        StabConfig::new(kind, self.alpha.unwrap_or(1.0))
            .map(Some)
            .map_err(|e| e.to_string())
    }

    fn check_nu(&self) -> Result<(), String> {
        if self.nu > 0.0 && self.nu.is_finite() {
            Ok(())
        } else {
            Err("--nu must be positive".into())
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Discretization: full saddle-point system, condensed perturbed
    /// system, or the bubble comparison scheme
    #[arg(long, value_enum, default_value_t = SchemeArg::Full)]
    scheme: SchemeArg,
    /// Write the solution as a legacy VTK file
    #[arg(long)]
    vtk: Option<PathBuf>,
    /// Write the error report as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ConvergenceArgs {
    /// Mesh subdivisions per level, comma separated
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    levels: Vec<usize>,
    /// Viscosity
    #[arg(long, default_value_t = 1e-6)]
    nu: f64,
    #[arg(long, value_enum)]
    stab: Option<StabArg>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_enum, default_value_t = SchemeArg::Full)]
    scheme: SchemeArg,
    /// Write the study table as CSV
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Fail (exit 2) if the observed orders leave their windows
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct RobustnessArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Gradient-perturbation potential
    #[arg(long, value_enum, default_value_t = PsiArg::X)]
    psi: PsiArg,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PsiArg {
    X,
    Cubic,
}

#[derive(Args)]
struct CompareBrArgs {
    /// Structured mesh subdivisions per side
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Viscosity
    #[arg(long, default_value_t = 1e-6)]
    nu: f64,
    /// Fail (exit 2) if the error gap falls below 10^3
    #[arg(long)]
    check: bool,
}

#[derive(Args)]
struct MeshArgs {
    /// Structured mesh subdivisions per side
    #[arg(long, default_value_t = 16)]
    n: usize,
    /// Output path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.cmd) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cmd: Cmd) -> Result<ExitCode, String> {
    match cmd {
        Cmd::Solve(args) => run_solve(args),
        Cmd::Convergence(args) => run_convergence(args),
        Cmd::Robustness(args) => run_robustness(args),
        Cmd::CompareBr(args) => run_compare_br(args),
        Cmd::Mesh(args) => run_mesh(args),
    }
}

fn print_report_line(r: &ErrorReport) {
    let eoc = |v: Option<f64>| v.map(|x| format!("{x:7.3}")).unwrap_or_else(|| "      -".into());
    println!(
        "  n={:<4} h={:.4e}  h1_u={:.6e}  l2_u={:.6e}  l2_p={:.6e}  max_div={:.3e}  eoc[{} {} {}]",
        r.n,
        r.h,
        r.h1_u,
        r.l2_u,
        r.l2_p,
        r.max_div,
        eoc(r.eoc_h1),
        eoc(r.eoc_l2u),
        eoc(r.eoc_l2p),
    );
}

fn write_csv_file(path: &Path, reports: &[ErrorReport]) -> Result<(), String> {
    let file = File::create(path).map_err(|e| format!("creating {}: {e}", path.display()))?;
    write_csv(BufWriter::new(file), reports)
        .map_err(|e| format!("writing {}: {e}", path.display()))
}

fn run_solve(args: SolveArgs) -> Result<ExitCode, String> {
    args.problem.check_nu()?;
    let stab = args.problem.stab_config(args.scheme)?;
    let mesh = args.problem.load_mesh()?;
    let case = example51(args.problem.nu);
    let scheme = args.scheme.run_scheme();
    let (dofmap, solution) =
        solve_case(&mesh, &case, stab.as_ref(), scheme).map_err(|e| e.to_string())?;

    println!(
        "mesh: {} vertices, {} triangles, {} edges ({} interior)",
        mesh.num_vertices(),
        mesh.num_triangles(),
        mesh.num_edges(),
        mesh.num_interior_edges()
    );
    println!(
        "dofs: {} vertex, {} flux, {} pressure  (scheme {}, nu {:.3e})",
        dofmap.n1,
        dofmap.n_r,
        dofmap.n_p,
        scheme.label(),
        args.problem.nu
    );
    println!("solve residual: {:.3e}", solution.residual);
    if dofmap.n_r <= 8 {
        let coeffs: Vec<String> = solution.u_r.iter().map(|v| format!("{v:.6e}")).collect();
        println!("U_R = [{}]", coeffs.join(", "));
    }

    let report = compute_errors(&mesh, &dofmap, &solution, &case, args.problem.level_label());
    print_report_line(&report);
    let div = divergence_check(&mesh, &dofmap, &solution);
    println!(
        "divergence: max pointwise {:.3e}, max element mean {:.3e} (velocity scale {:.3e})",
        div.max_pointwise, div.max_element_mean, div.velocity_scale
    );

    if let Some(path) = &args.vtk {
        let file = File::create(path).map_err(|e| format!("creating {}: {e}", path.display()))?;
        write_vtk(BufWriter::new(file), &mesh, &dofmap, &solution)
            .map_err(|e| format!("writing {}: {e}", path.display()))?;
        println!("wrote {}", path.display());
    }
    if let Some(path) = &args.csv {
        write_csv_file(path, std::slice::from_ref(&report))?;
        println!("wrote {}", path.display());
    }
    Ok(ExitCode::SUCCESS)
}

fn order_violations(study: &Study) -> Vec<String> {
    let mut violations = Vec::new();
    let Some(last) = study.reports.last() else {
        violations.push("no completed levels".into());
        return violations;
    };
    match last.eoc_h1 {
        Some(o) if (0.85..=1.15).contains(&o) => {}
        Some(o) => violations.push(format!("h1 velocity order {o:.3} outside [0.85, 1.15]")),
        None => violations.push("too few levels for observed orders".into()),
    }
    if let Some(o) = last.eoc_l2u {
        if !(1.8..=2.2).contains(&o) {
            violations.push(format!("l2 velocity order {o:.3} outside [1.8, 2.2]"));
        }
    }
    if let Some(o) = last.eoc_l2p {
        if o < 0.85 {
            violations.push(format!("l2 pressure order {o:.3} below 0.85"));
        }
    }
    violations
}

fn run_convergence(args: ConvergenceArgs) -> Result<ExitCode, String> {
    if !(args.nu > 0.0 && args.nu.is_finite()) {
        return Err("--nu must be positive".into());
    }
    if args.levels.is_empty() || args.levels.iter().any(|&n| n == 0) {
        return Err("--levels must list positive subdivisions".into());
    }
    let problem = ProblemArgs {
        n: 1,
        mesh: None,
        nu: args.nu,
        stab: args.stab,
        alpha: args.alpha,
    };
    let stab = problem.stab_config(args.scheme)?;
    let study = convergence_study(
        &args.levels,
        args.nu,
        stab.as_ref(),
        args.scheme.run_scheme(),
    );

    println!(
        "convergence study: scheme {}, nu {:.3e}, levels {:?}",
        args.scheme.run_scheme().label(),
        args.nu,
        args.levels
    );
    for r in &study.reports {
        print_report_line(r);
    }
    if let Some(path) = &args.csv {
        write_csv_file(path, &study.reports)?;
        println!("wrote {}", path.display());
    }
    if let Some((n, err)) = &study.failure {
        return Err(format!("level n={n} failed: {err}"));
    }
    if args.check {
        let violations = order_violations(&study);
        if !violations.is_empty() {
            for v in &violations {
                eprintln!("check failed: {v}");
            }
            return Ok(ExitCode::from(2));
        }
        println!("check passed: observed orders within windows");
    }
    Ok(ExitCode::SUCCESS)
}

fn run_robustness(args: RobustnessArgs) -> Result<ExitCode, String> {
    args.problem.check_nu()?;
    let stab = args
        .problem
        .stab_config(SchemeArg::Full)?
        .expect("full scheme always carries a stabilization");
    let mesh = args.problem.load_mesh()?;
    let psi = match args.psi {
        PsiArg::X => Potential::X,
        PsiArg::Cubic => Potential::Cubic,
    };
    let report =
        robustness_test(&mesh, args.problem.nu, &stab, psi).map_err(|e| e.to_string())?;
    println!(
        "robustness (psi = {}, nu {:.3e}): velocity delta {:.3e} relative, pressure vs projected potential {:.3e} relative",
        psi.label(),
        args.problem.nu,
        report.velocity_delta_rel,
        report.pressure_match_rel
    );
    Ok(ExitCode::SUCCESS)
}

fn run_compare_br(args: CompareBrArgs) -> Result<ExitCode, String> {
    if args.n == 0 {
        return Err("--n must be at least 1".into());
    }
    if !(args.nu > 0.0 && args.nu.is_finite()) {
        return Err("--nu must be positive".into());
    }
    let mesh = Mesh::generate_structured(args.n);
    let case = example51(args.nu);
    let stab = StabConfig::new(StabKind::Jd, 1.0).map_err(|e| e.to_string())?;

    let (dm_a, sol_a) =
        solve_case(&mesh, &case, Some(&stab), RunScheme::Full).map_err(|e| e.to_string())?;
    let rep_a = compute_errors(&mesh, &dm_a, &sol_a, &case, args.n);
    let (dm_b, sol_b) =
        solve_case(&mesh, &case, None, RunScheme::BernardiRaugel).map_err(|e| e.to_string())?;
    let rep_b = compute_errors(&mesh, &dm_b, &sol_b, &case, args.n);

    let ratio = rep_b.h1_u / rep_a.h1_u;
    println!("divergence-free scheme: h1_u={:.6e}  l2_u={:.6e}", rep_a.h1_u, rep_a.l2_u);
    println!("bubble scheme:          h1_u={:.6e}  l2_u={:.6e}", rep_b.h1_u, rep_b.l2_u);
    println!("h1 error ratio (bubble / divergence-free): {ratio:.3e}");
    if args.check && ratio < 1e3 {
        eprintln!("check failed: ratio {ratio:.3e} below 1e3");
        return Ok(ExitCode::from(2));
    }
    if args.check {
        println!("check passed: ratio at least 1e3");
    }
    Ok(ExitCode::SUCCESS)
}

fn run_mesh(args: MeshArgs) -> Result<ExitCode, String> {
    if args.n == 0 {
        return Err("--n must be at least 1".into());
    }
    let mesh = Mesh::generate_structured(args.n);
    match &args.out {
        Some(path) => {
            mesh.write_text(path)
                .map_err(|e| format!("writing {}: {e}", path.display()))?;
            println!(
                "wrote {} ({} vertices, {} triangles)",
                path.display(),
                mesh.num_vertices(),
                mesh.num_triangles()
            );
        }
        None => print!("{}", mesh.format_text()),
    }
    Ok(ExitCode::SUCCESS)
}
