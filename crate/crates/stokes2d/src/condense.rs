//! Diagonal perturbation of the RT0 block and static condensation.
//!
//! The perturbed form replaces the RT0-RT0 coupling by the diagonal matrix
//! d_h with entries (d+1) (grad Phi_e, grad Phi_e) + alpha_e h_e^-2
//! (Phi_e, Phi_e), d = 2, both integrals over the full two-triangle support.
//! Because the block is diagonal, the flux unknowns can be eliminated
//! exactly, leaving a stabilized vertex-pressure system whose stencil matches
//! the Bernardi-Raugel element, and recovered edge-locally afterwards.

use crate::assembly::{BlockSystem, DofMap, Scheme, StabConfig, StabKind};
use crate::elements::{local_matrices, TriGeom};
use crate::mesh::Mesh;
use crate::quadrature::quadrature;
use crate::sparse::Csr;

#[derive(Debug, thiserror::Error)]
pub enum CondenseError {
    #[error("the diagonally perturbed form is defined with the diagonal stabilization; J0 was requested")]
    J0Requested,
    #[error("condensation requires the perturbed scheme, got {0}")]
    WrongScheme(&'static str),
    #[error("RT0 block is not strictly diagonal at row {row}")]
    NotDiagonal { row: usize },
    #[error("nonpositive diagonal entry {value:.3e} at row {row}")]
    BadDiagonal { row: usize, value: f64 },
}

/// Diagonal of the perturbed RT0 block, viscosity included.
pub fn build_drr(
    mesh: &Mesh,
    dofmap: &DofMap,
    stab: &StabConfig,
    nu: f64,
) -> Result<Vec<f64>, CondenseError> {
    if stab.kind != StabKind::Jd {
        return Err(CondenseError::J0Requested);
    }
    let rule = quadrature(2).expect("exactness 2 is supported");
    let mut d = vec![0.0; dofmap.n_r];
    for t in 0..mesh.num_triangles() {
        let geom = TriGeom::new(mesh.tri_vertices(t));
        let signs: [f64; 3] = std::array::from_fn(|k| mesh.tri_edges[t][k].sign as f64);
        let local = local_matrices(&geom, signs, &rule);
        for k in 0..3 {
            let e = mesh.tri_edges[t][k].edge;
            let Some(dof) = dofmap.edge_dofs[e] else {
                continue;
            };
            let alpha = stab.alpha_for_edge(e);
            let h = mesh.edge_lengths[e];
            d[dof] += nu * (3.0 * local.a_rr[k][k] + alpha / (h * h) * local.m_rr[k][k]);
        }
    }
    Ok(d)
}

/// Schur-reduced system plus the blocks retained for flux recovery.
#[derive(Clone, Debug)]
pub struct CondensedSystem {
    /// A_LL - A_RL^T D^-1 A_RL.
    pub a_hat: Csr,
    /// G_L - A_RL^T D^-1 G_R; enters the saddle matrix negated.
    pub g_hat: Csr,
    /// -G_R^T D^-1 G_R, symmetric negative semidefinite.
    pub s_pp: Csr,
    pub f_hat_l: Vec<f64>,
    /// Right-hand side of the pressure row, G_R^T D^-1 F_R.
    pub f_hat_p: Vec<f64>,
    pub d_rr: Vec<f64>,
    pub a_rl: Csr,
    pub g_r: Csr,
    pub f_r: Vec<f64>,
    pub c: Vec<f64>,
    pub nu: f64,
}

pub fn condense(system: &BlockSystem) -> Result<CondensedSystem, CondenseError> {
    if system.scheme != Scheme::Perturbed {
        return Err(CondenseError::WrongScheme(system.scheme.label()));
    }
    let n_r = system.a_rr.nrows;
    let mut d = vec![0.0; n_r];
    for row in 0..n_r {
        let (cols, vals) = system.a_rr.row(row);
        if cols != [row] {
            return Err(CondenseError::NotDiagonal { row });
        }
        if vals[0] <= 0.0 {
            return Err(CondenseError::BadDiagonal {
                row,
                value: vals[0],
            });
        }
        d[row] = vals[0];
    }
    let dinv: Vec<f64> = d.iter().map(|&v| 1.0 / v).collect();

    let a_rl_t = system.a_rl.transpose();
    let a_hat = system.a_ll.sub(&a_rl_t.matmul(&system.a_rl.scale_rows(&dinv)));
    let g_hat = system.g_l.sub(&a_rl_t.matmul(&system.g_r.scale_rows(&dinv)));
    let s_pp = system
        .g_r
        .transpose()
        .matmul(&system.g_r.scale_rows(&dinv))
        .scaled(-1.0);

    let df_r: Vec<f64> = system.f_r.iter().zip(&dinv).map(|(f, di)| f * di).collect();
    let mut f_hat_l = system.f_l.clone();
    system.a_rl.matvec_transpose_add(&df_r, -1.0, &mut f_hat_l);
    let mut f_hat_p = vec![0.0; system.c.len()];
    system.g_r.matvec_transpose_add(&df_r, 1.0, &mut f_hat_p);

    Ok(CondensedSystem {
        a_hat,
        g_hat,
        s_pp,
        f_hat_l,
        f_hat_p,
        d_rr: d,
        a_rl: system.a_rl.clone(),
        g_r: system.g_r.clone(),
        f_r: system.f_r.clone(),
        c: system.c.clone(),
        nu: system.nu,
    })
}

/// Edge-local back substitution U_R = D^-1 (F_R - A_RL U_L + G_R P).
pub fn recover_rt0(cs: &CondensedSystem, u_l: &[f64], p: &[f64]) -> Vec<f64> {
    let mut r = cs.f_r.clone();
    cs.a_rl.matvec_add(u_l, -1.0, &mut r);
    cs.g_r.matvec_add(p, 1.0, &mut r);
    for (v, d) in r.iter_mut().zip(&cs.d_rr) {
        *v /= d;
    }
    r
}
