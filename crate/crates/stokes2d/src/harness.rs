//! Manufactured-solution experiment drivers: solve-and-measure plumbing,
//! convergence studies with observed orders, pressure-robustness and
//! divergence checks, and deterministic CSV emission.

use crate::assembly::{
    assemble_system, build_dofmap, AssemblyError, DofMap, Scheme, StabConfig,
};
use crate::condense::{condense, CondenseError};
use crate::field::DiscreteVelocity;
use crate::geometry::Vec2;
use crate::interp::project_p0;
use crate::manufactured::{ManufacturedCase, Potential};
use crate::mesh::Mesh;
use crate::quadrature::{quadrature, QuadratureRule};
use crate::solver::{solve_condensed, solve_system, Solution, SolverError};
use std::io::{self, Write};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error(transparent)]
    Assembly(#[from] AssemblyError),
    #[error(transparent)]
    Condense(#[from] CondenseError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Solve pipeline selector: the full saddle-point system, the diagonally
/// perturbed system reduced by static condensation, or the bubble-enriched
/// comparison scheme.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunScheme {
    Full,
    Condensed,
    BernardiRaugel,
}

impl RunScheme {
    pub fn label(self) -> &'static str {
        match self {
            RunScheme::Full => "full",
            RunScheme::Condensed => "condensed",
            RunScheme::BernardiRaugel => "br",
        }
    }
}

/// Assemble and solve one manufactured case on one mesh.
pub fn solve_case(
    mesh: &Mesh,
    case: &ManufacturedCase,
    stab: Option<&StabConfig>,
    scheme: RunScheme,
) -> Result<(DofMap, Solution), HarnessError> {
    let dofmap = build_dofmap(mesh);
    let f = |x: Vec2| case.force(x);
    let solution = match scheme {
        RunScheme::Full => {
            let sys = assemble_system(mesh, &dofmap, stab, case.nu, &f, Scheme::Full)?;
            solve_system(&sys, mesh, &dofmap)?
        }
        RunScheme::Condensed => {
            let sys = assemble_system(mesh, &dofmap, stab, case.nu, &f, Scheme::Perturbed)?;
            let cs = condense(&sys)?;
            solve_condensed(&cs, mesh, &dofmap)?
        }
        RunScheme::BernardiRaugel => {
            let sys = assemble_system(mesh, &dofmap, stab, case.nu, &f, Scheme::BernardiRaugel)?;
            solve_system(&sys, mesh, &dofmap)?
        }
    };
    Ok((dofmap, solution))
}

/// Error measurements on one level. `max_div` is the largest divergence
/// magnitude seen at any quadrature point; `max_div_mean` the largest
/// element-mean magnitude; both raw (unnormalized).
#[derive(Clone, Debug)]
pub struct ErrorReport {
    pub n: usize,
    pub h: f64,
    pub h1_u: f64,
    pub l2_u: f64,
    pub l2_p: f64,
    pub max_div: f64,
    pub max_div_mean: f64,
    pub velocity_scale: f64,
    pub eoc_h1: Option<f64>,
    pub eoc_l2u: Option<f64>,
    pub eoc_l2p: Option<f64>,
}

fn frobenius_diff_sq(a: [[f64; 2]; 2], b: [[f64; 2]; 2]) -> f64 {
    let mut s = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let d = a[i][j] - b[i][j];
            s += d * d;
        }
    }
    s
}

/// Measure discrete errors of a solution against the closed-form case, with
/// the exact pressure recentered to its quadrature mean over the domain.
pub fn compute_errors(
    mesh: &Mesh,
    dofmap: &DofMap,
    solution: &Solution,
    case: &ManufacturedCase,
    n: usize,
) -> ErrorReport {
    let rule = quadrature(crate::assembly::LOAD_EXACTNESS).expect("fixed exactness is in range");
    let field = DiscreteVelocity::new(mesh, dofmap, &solution.u_l, &solution.u_r, solution.scheme);

    let area_total: f64 = mesh.areas.iter().sum();
    let mut p_integral = 0.0;
    for t in 0..mesh.num_triangles() {
        p_integral += rule.integrate(mesh.tri_vertices(t), mesh.areas[t], |x| case.pressure(x));
    }
    let p_mean = p_integral / area_total;

    let mut h1_sq = 0.0;
    let mut l2_sq = 0.0;
    let mut p_sq = 0.0;
    let mut max_div = 0.0f64;
    let mut max_div_mean = 0.0f64;
    let mut velocity_scale = 0.0f64;
    for t in 0..mesh.num_triangles() {
        let elem = field.element(t);
        let verts = mesh.tri_vertices(t);
        let area = mesh.areas[t];
        h1_sq += rule.integrate(verts, area, |x| {
            frobenius_diff_sq(case.velocity_gradient(x), elem.gradient(x))
        });
        l2_sq += rule.integrate(verts, area, |x| {
            let uh = elem.value(x);
            velocity_scale = velocity_scale.max(uh.norm());
            (case.velocity(x) - uh).norm_sq()
        });
        let pt = solution.p[t];
        p_sq += rule.integrate(verts, area, |x| {
            let d = case.pressure(x) - p_mean - pt;
            d * d
        });
        let div_integral = rule.integrate(verts, area, |x| {
            let d = elem.divergence(x);
            max_div = max_div.max(d.abs());
            d
        });
        max_div_mean = max_div_mean.max((div_integral / area).abs());
    }

    ErrorReport {
        n,
        h: mesh.diameters.iter().fold(0.0f64, |m, &d| m.max(d)),
        h1_u: h1_sq.sqrt(),
        l2_u: l2_sq.sqrt(),
        l2_p: p_sq.sqrt(),
        max_div,
        max_div_mean,
        velocity_scale,
        eoc_h1: None,
        eoc_l2u: None,
        eoc_l2p: None,
    }
}

/// Fill observed orders between consecutive reports on a dyadic family.
pub fn attach_orders(reports: &mut [ErrorReport]) {
    for i in 1..reports.len() {
        let (prev, cur) = (reports[i - 1].clone(), &mut reports[i]);
        cur.eoc_h1 = Some((prev.h1_u / cur.h1_u).log2());
        cur.eoc_l2u = Some((prev.l2_u / cur.l2_u).log2());
        cur.eoc_l2p = Some((prev.l2_p / cur.l2_p).log2());
    }
}

/// A convergence study; `failure` flags the first level whose solve failed,
/// with the reports of the completed levels retained.
#[derive(Debug)]
pub struct Study {
    pub reports: Vec<ErrorReport>,
    pub failure: Option<(usize, HarnessError)>,
}

pub fn convergence_study(
    levels: &[usize],
    nu: f64,
    stab: Option<&StabConfig>,
    scheme: RunScheme,
) -> Study {
    let case = crate::manufactured::example51(nu);
    let mut reports = Vec::new();
    let mut failure = None;
    for &n in levels {
        let mesh = Mesh::generate_structured(n);
        match solve_case(&mesh, &case, stab, scheme) {
            Ok((dofmap, solution)) => {
                reports.push(compute_errors(&mesh, &dofmap, &solution, &case, n));
            }
            Err(e) => {
                failure = Some((n, e));
                break;
            }
        }
    }
    attach_orders(&mut reports);
    Study { reports, failure }
}

/// Divergence diagnostics of a discrete velocity.
#[derive(Clone, Copy, Debug)]
pub struct DivergenceReport {
    pub max_pointwise: f64,
    pub max_element_mean: f64,
    pub velocity_scale: f64,
}

pub fn divergence_check(mesh: &Mesh, dofmap: &DofMap, solution: &Solution) -> DivergenceReport {
    let rule = quadrature(crate::assembly::LOAD_EXACTNESS).expect("fixed exactness is in range");
    divergence_check_with_rule(mesh, dofmap, solution, &rule)
}

fn divergence_check_with_rule(
    mesh: &Mesh,
    dofmap: &DofMap,
    solution: &Solution,
    rule: &QuadratureRule,
) -> DivergenceReport {
    let field = DiscreteVelocity::new(mesh, dofmap, &solution.u_l, &solution.u_r, solution.scheme);
    let mut max_pointwise = 0.0f64;
    let mut max_element_mean = 0.0f64;
    let mut velocity_scale = 0.0f64;
    for t in 0..mesh.num_triangles() {
        let elem = field.element(t);
        let integral = rule.integrate(mesh.tri_vertices(t), mesh.areas[t], |x| {
            velocity_scale = velocity_scale.max(elem.value(x).norm());
            let d = elem.divergence(x);
            max_pointwise = max_pointwise.max(d.abs());
            d
        });
        max_element_mean = max_element_mean.max((integral / mesh.areas[t]).abs());
    }
    DivergenceReport {
        max_pointwise,
        max_element_mean,
        velocity_scale,
    }
}

/// Outcome of perturbing the force by a gradient field: the velocity should
/// not move and the pressure should absorb exactly the projected potential.
#[derive(Clone, Copy, Debug)]
pub struct RobustnessReport {
    /// Largest velocity-coefficient change over the solution scale.
    pub velocity_delta_rel: f64,
    /// Deviation of the pressure change from the mean-adjusted projected
    /// potential, relative to that potential's scale.
    pub pressure_match_rel: f64,
}

pub fn robustness_test(
    mesh: &Mesh,
    nu: f64,
    stab: &StabConfig,
    psi: Potential,
) -> Result<RobustnessReport, HarnessError> {
    let case = crate::manufactured::example51(nu);
    let dofmap = build_dofmap(mesh);
    let base_f = |x: Vec2| case.force(x);
    let shifted_f = |x: Vec2| case.force(x) + psi.gradient(x);

    let sys_a = assemble_system(mesh, &dofmap, Some(stab), nu, &base_f, Scheme::Full)?;
    let sol_a = solve_system(&sys_a, mesh, &dofmap)?;
    let sys_b = assemble_system(mesh, &dofmap, Some(stab), nu, &shifted_f, Scheme::Full)?;
    let sol_b = solve_system(&sys_b, mesh, &dofmap)?;

    let mut psi_proj = project_p0(mesh, &|x| psi.value(x));
    let total: f64 = sys_a.c.iter().sum();
    let mean = psi_proj
        .iter()
        .zip(&sys_a.c)
        .map(|(v, c)| v * c)
        .sum::<f64>()
        / total;
    for v in &mut psi_proj {
        *v -= mean;
    }

    let vel_scale = sol_a
        .u_l
        .iter()
        .chain(&sol_a.u_r)
        .fold(1e-300f64, |m, v| m.max(v.abs()));
    let vel_delta = sol_a
        .u_l
        .iter()
        .zip(&sol_b.u_l)
        .chain(sol_a.u_r.iter().zip(&sol_b.u_r))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));

    let psi_scale = psi_proj.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
    let pressure_err = sol_a
        .p
        .iter()
        .zip(&sol_b.p)
        .zip(&psi_proj)
        .fold(0.0f64, |m, ((a, b), w)| m.max((b - a - w).abs()));

    Ok(RobustnessReport {
        velocity_delta_rel: vel_delta / vel_scale,
        pressure_match_rel: pressure_err / psi_scale,
    })
}

pub const CSV_HEADER: &str = "n,h,h1_u,l2_u,l2_p,max_div,eoc_h1,eoc_l2u,eoc_l2p";

/// Emit the study table. The format is fixed so identical inputs produce
/// byte-identical files.
pub fn write_csv<W: Write>(mut w: W, reports: &[ErrorReport]) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in reports {
        let eoc = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        writeln!(
            w,
            "{},{:.12e},{:.12e},{:.12e},{:.12e},{:.12e},{},{},{}",
            r.n,
            r.h,
            r.h1_u,
            r.l2_u,
            r.l2_p,
            r.max_div,
            eoc(r.eoc_h1),
            eoc(r.eoc_l2u),
            eoc(r.eoc_l2p),
        )?;
    }
    Ok(())
}
