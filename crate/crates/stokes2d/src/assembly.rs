//! Global degree-of-freedom numbering and assembly of the block saddle-point
//! system.
//!
//! Homogeneous Dirichlet data is imposed by exclusion: boundary vertices and
//! boundary edges never receive indices. Velocity blocks are stored with the
//! viscosity factor already applied; divergence blocks store b(v, q) =
//! (div v, q) with no viscosity factor and enter the saddle matrix negated.

use crate::condense::build_drr;
use crate::elements::{br_local, local_matrices, TriGeom};
use crate::geometry::Vec2;
use crate::mesh::Mesh;
use crate::quadrature::quadrature;
use crate::sparse::{Coo, Csr};

pub const LOAD_EXACTNESS: usize = 12;

#[derive(Debug, thiserror::Error)]
pub enum AssemblyError {
    #[error("stabilization parameter must be strictly positive, got {0}")]
    NonPositiveAlpha(f64),
    #[error("per-{kind} parameter overrides have length {got}, mesh has {want}")]
    OverrideLength {
        kind: &'static str,
        got: usize,
        want: usize,
    },
    #[error("the Bernardi-Raugel scheme takes no stabilization")]
    BernardiRaugelWithStab,
    #[error("schemes with RT0 enrichment require a stabilization")]
    MissingStab,
    #[error("the diagonally perturbed form is defined with the diagonal stabilization; J0 was requested")]
    PerturbedNeedsJd,
    #[error("viscosity must be strictly positive, got {0}")]
    NonPositiveViscosity(f64),
}

/// Global indices: two velocity dofs per interior vertex, one flux dof per
/// interior edge, one pressure dof per triangle.
#[derive(Clone, Debug)]
pub struct DofMap {
    /// Per vertex, the index pair base; x component 2k, y component 2k+1.
    pub vertex_dofs: Vec<Option<usize>>,
    /// Per edge, the RT0 (or bubble) dof index.
    pub edge_dofs: Vec<Option<usize>>,
    pub n1: usize,
    pub n_r: usize,
    pub n_p: usize,
}

pub fn build_dofmap(mesh: &Mesh) -> DofMap {
    let mut vertex_dofs = vec![None; mesh.num_vertices()];
    let mut next = 0usize;
    for (v, dof) in vertex_dofs.iter_mut().enumerate() {
        if !mesh.vertex_boundary[v] {
            *dof = Some(next);
            next += 1;
        }
    }
    let n1 = 2 * next;
    let mut edge_dofs = vec![None; mesh.num_edges()];
    let mut next_e = 0usize;
    for (e, dof) in edge_dofs.iter_mut().enumerate() {
        if !mesh.edge_boundary[e] {
            *dof = Some(next_e);
            next_e += 1;
        }
    }
    DofMap {
        vertex_dofs,
        edge_dofs,
        n1,
        n_r: next_e,
        n_p: mesh.num_triangles(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StabKind {
    /// Elementwise scaled RT0 mass penalty.
    J0,
    /// Diagonal per-edge penalty.
    Jd,
}

/// Stabilization parameters; uniform alpha with optional per-element or
/// per-edge overrides.
#[derive(Clone, Debug)]
pub struct StabConfig {
    pub kind: StabKind,
    pub alpha: f64,
    pub alpha_elements: Option<Vec<f64>>,
    pub alpha_edges: Option<Vec<f64>>,
}

impl StabConfig {
    pub fn new(kind: StabKind, alpha: f64) -> Result<StabConfig, AssemblyError> {
        if alpha <= 0.0 || !alpha.is_finite() {
            return Err(AssemblyError::NonPositiveAlpha(alpha));
        }
        Ok(StabConfig {
            kind,
            alpha,
            alpha_elements: None,
            alpha_edges: None,
        })
    }

    pub fn validate(&self, mesh: &Mesh) -> Result<(), AssemblyError> {
        if self.alpha <= 0.0 || !self.alpha.is_finite() {
            return Err(AssemblyError::NonPositiveAlpha(self.alpha));
        }
        if let Some(per_t) = &self.alpha_elements {
            if per_t.len() != mesh.num_triangles() {
                return Err(AssemblyError::OverrideLength {
                    kind: "element",
                    got: per_t.len(),
                    want: mesh.num_triangles(),
                });
            }
            if let Some(&bad) = per_t.iter().find(|a| **a <= 0.0) {
                return Err(AssemblyError::NonPositiveAlpha(bad));
            }
        }
        if let Some(per_e) = &self.alpha_edges {
            if per_e.len() != mesh.num_edges() {
                return Err(AssemblyError::OverrideLength {
                    kind: "edge",
                    got: per_e.len(),
                    want: mesh.num_edges(),
                });
            }
            if let Some(&bad) = per_e.iter().find(|a| **a <= 0.0) {
                return Err(AssemblyError::NonPositiveAlpha(bad));
            }
        }
        Ok(())
    }

    pub fn alpha_for_element(&self, t: usize) -> f64 {
        self.alpha_elements
            .as_ref()
            .map_or(self.alpha, |per_t| per_t[t])
    }

    pub fn alpha_for_edge(&self, e: usize) -> f64 {
        self.alpha_edges
            .as_ref()
            .map_or(self.alpha, |per_e| per_e[e])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// P1c + RT0 velocity with the exact bilinear form.
    Full,
    /// P1c + RT0 with the diagonally perturbed RT0-RT0 block.
    Perturbed,
    /// P1c + normal edge bubbles, no stabilization.
    BernardiRaugel,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::Full => "full",
            Scheme::Perturbed => "perturbed",
            Scheme::BernardiRaugel => "bernardi-raugel",
        }
    }
}

/// Assembled blocks of the saddle-point system. Velocity blocks include the
/// viscosity; divergence blocks do not.
#[derive(Clone, Debug)]
pub struct BlockSystem {
    pub a_ll: Csr,
    pub a_rl: Csr,
    pub a_rr: Csr,
    pub g_l: Csr,
    pub g_r: Csr,
    pub f_l: Vec<f64>,
    pub f_r: Vec<f64>,
    /// Mean-constraint vector, c_T = |T|.
    pub c: Vec<f64>,
    pub nu: f64,
    pub scheme: Scheme,
}

/// Assemble the stabilization matrix on the interior-edge dofs (without the
/// viscosity factor).
pub fn assemble_stab(mesh: &Mesh, dofmap: &DofMap, stab: &StabConfig) -> Result<Csr, AssemblyError> {
    stab.validate(mesh)?;
    let rule = quadrature(2).expect("exactness 2 is supported");
    let mut coo = Coo::new(dofmap.n_r, dofmap.n_r);
    for t in 0..mesh.num_triangles() {
        let geom = TriGeom::new(mesh.tri_vertices(t));
        let signs: [f64; 3] = std::array::from_fn(|k| mesh.tri_edges[t][k].sign as f64);
        let local = local_matrices(&geom, signs, &rule);
        match stab.kind {
            StabKind::J0 => {
                let scale = stab.alpha_for_element(t) / mesh.diameters[t].powi(2);
                for k in 0..3 {
                    let Some(row) = dofmap.edge_dofs[mesh.tri_edges[t][k].edge] else {
                        continue;
                    };
                    for m in 0..3 {
                        let Some(col) = dofmap.edge_dofs[mesh.tri_edges[t][m].edge] else {
                            continue;
                        };
                        coo.push(row, col, scale * local.m_rr[k][m]);
                    }
                }
            }
            StabKind::Jd => {
                for k in 0..3 {
                    let e = mesh.tri_edges[t][k].edge;
                    let Some(row) = dofmap.edge_dofs[e] else {
                        continue;
                    };
                    let scale = stab.alpha_for_edge(e) / mesh.edge_lengths[e].powi(2);
                    coo.push(row, row, scale * local.m_rr[k][k]);
                }
            }
        }
    }
    Ok(coo.to_csr())
}

/// Assemble the block system for the given scheme. `stab` is required for
/// the RT0 schemes and must be absent for Bernardi-Raugel; the perturbed
/// scheme requires the diagonal stabilization.
pub fn assemble_system(
    mesh: &Mesh,
    dofmap: &DofMap,
    stab: Option<&StabConfig>,
    nu: f64,
    f: &dyn Fn(Vec2) -> Vec2,
    scheme: Scheme,
) -> Result<BlockSystem, AssemblyError> {
    if nu <= 0.0 || !nu.is_finite() {
        return Err(AssemblyError::NonPositiveViscosity(nu));
    }
    match (scheme, stab) {
        (Scheme::BernardiRaugel, Some(_)) => return Err(AssemblyError::BernardiRaugelWithStab),
        (Scheme::BernardiRaugel, None) => {}
        (_, None) => return Err(AssemblyError::MissingStab),
        (Scheme::Perturbed, Some(s)) if s.kind != StabKind::Jd => {
            return Err(AssemblyError::PerturbedNeedsJd)
        }
        (_, Some(s)) => s.validate(mesh)?,
    }

    let load_rule = quadrature(LOAD_EXACTNESS).expect("exactness 12 is supported");
    let elem_rule = quadrature(2).expect("exactness 2 is supported");

    let (n1, n_r, n_p) = (dofmap.n1, dofmap.n_r, dofmap.n_p);
    let mut a_ll = Coo::new(n1, n1);
    let mut a_rl = Coo::new(n_r, n1);
    let mut a_rr_grad = Coo::new(n_r, n_r);
    let mut g_l = Coo::new(n1, n_p);
    let mut g_r = Coo::new(n_r, n_p);
    let mut f_l = vec![0.0; n1];
    let mut f_r = vec![0.0; n_r];
    let mut c = vec![0.0; n_p];

    for t in 0..mesh.num_triangles() {
        let geom = TriGeom::new(mesh.tri_vertices(t));
        let signs: [f64; 3] = std::array::from_fn(|k| mesh.tri_edges[t][k].sign as f64);
        c[t] = geom.area;

        // Local-to-global maps: vector P1 dof 2k+a and edge dof k.
        let vdof: [Option<usize>; 3] =
            std::array::from_fn(|k| dofmap.vertex_dofs[mesh.triangles[t][k]]);
        let edof: [Option<usize>; 3] =
            std::array::from_fn(|k| dofmap.edge_dofs[mesh.tri_edges[t][k].edge]);
        let p1_global = |local: usize| vdof[local / 2].map(|base| 2 * base + local % 2);

        let (e_coupling, e_grad, e_div): ([[f64; 6]; 3], [[f64; 3]; 3], [f64; 3]);
        let local = local_matrices(&geom, signs, &elem_rule);
        match scheme {
            Scheme::Full | Scheme::Perturbed => {
                e_coupling = local.a_rl;
                e_grad = local.a_rr;
                e_div = local.g_r;
            }
            Scheme::BernardiRaugel => {
                let br = br_local(&geom, signs, &elem_rule);
                e_coupling = br.a_bl;
                e_grad = br.a_bb;
                e_div = br.g_b;
            }
        }

        for i in 0..6 {
            let Some(gi) = p1_global(i) else { continue };
            for j in 0..6 {
                if let Some(gj) = p1_global(j) {
                    a_ll.push(gi, gj, nu * local.a_ll[i][j]);
                }
            }
            g_l.push(gi, t, local.g_l[i]);
        }
        for k in 0..3 {
            let Some(ge) = edof[k] else { continue };
            for j in 0..6 {
                if let Some(gj) = p1_global(j) {
                    a_rl.push(ge, gj, nu * e_coupling[k][j]);
                }
            }
            for m in 0..3 {
                if let Some(gm) = edof[m] {
                    a_rr_grad.push(ge, gm, nu * e_grad[k][m]);
                }
            }
            g_r.push(ge, t, e_div[k]);
        }

        // Loads by the high-order rule; basis values evaluated per point.
        for (bary, w) in load_rule.points.iter().zip(&load_rule.weights) {
            let x = geom.point(*bary);
            let fx = f(x);
            let wq = 2.0 * geom.area * w;
            for k in 0..3 {
                if let Some(base) = vdof[k] {
                    f_l[2 * base] += wq * fx.x * bary[k];
                    f_l[2 * base + 1] += wq * fx.y * bary[k];
                }
            }
            for k in 0..3 {
                let Some(ge) = edof[k] else { continue };
                let value = match scheme {
                    Scheme::Full | Scheme::Perturbed => {
                        crate::elements::rt0_basis(&geom, k, signs[k]).eval(x).dot(fx)
                    }
                    Scheme::BernardiRaugel => {
                        let n = geom.outward_normals[k].scale(signs[k]);
                        crate::elements::bubble_value(k, *bary) * n.dot(fx)
                    }
                };
                f_r[ge] += wq * value;
            }
        }
    }

    let a_rr = match scheme {
        Scheme::Full => {
            let j = assemble_stab(mesh, dofmap, stab.expect("checked above"))?;
            a_rr_grad.to_csr().add_scaled(&j, nu)
        }
        Scheme::Perturbed => {
            let d = build_drr(mesh, dofmap, stab.expect("checked above"), nu)
                .expect("stab kind checked above");
            let mut coo = Coo::new(n_r, n_r);
            for (e, &v) in d.iter().enumerate() {
                coo.push(e, e, v);
            }
            coo.to_csr()
        }
        Scheme::BernardiRaugel => a_rr_grad.to_csr(),
    };

    Ok(BlockSystem {
        a_ll: a_ll.to_csr(),
        a_rl: a_rl.to_csr(),
        a_rr,
        g_l: g_l.to_csr(),
        g_r: g_r.to_csr(),
        f_l,
        f_r,
        c,
        nu,
        scheme,
    })
}

/// Velocity-block quadratic form v^T A v over [edge dofs; vertex dofs],
/// used by the stability checks.
pub fn velocity_energy(system: &BlockSystem, v_r: &[f64], v_l: &[f64]) -> f64 {
    let mut acc = 0.0;
    let mut tmp = vec![0.0; v_r.len()];
    system.a_rr.matvec(v_r, &mut tmp);
    acc += v_r.iter().zip(&tmp).map(|(a, b)| a * b).sum::<f64>();
    if !v_l.is_empty() {
        let mut tmp_l = vec![0.0; v_l.len()];
        system.a_ll.matvec(v_l, &mut tmp_l);
        acc += v_l.iter().zip(&tmp_l).map(|(a, b)| a * b).sum::<f64>();
        let mut cross = vec![0.0; v_r.len()];
        system.a_rl.matvec(v_l, &mut cross);
        acc += 2.0 * v_r.iter().zip(&cross).map(|(a, b)| a * b).sum::<f64>();
    }
    acc
}

/// Evaluate the stabilization quadratic form J(v, v) for RT0 coefficients.
pub fn stab_energy(j: &Csr, v: &[f64]) -> f64 {
    let mut tmp = vec![0.0; v.len()];
    j.matvec(v, &mut tmp);
    v.iter().zip(&tmp).map(|(a, b)| a * b).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn zero_force(_: Vec2) -> Vec2 {
        Vec2::ZERO
    }

    #[test]
    fn dofmap_counts() {
        for (n, n1, n_r, n_p) in [(1, 0, 1, 2), (2, 2, 8, 8), (4, 18, 40, 32)] {
            let mesh = Mesh::generate_structured(n);
            let dm = build_dofmap(&mesh);
            assert_eq!((dm.n1, dm.n_r, dm.n_p), (n1, n_r, n_p), "n={n}");
        }
    }

    #[test]
    fn dofmap_indices_dense_and_interior_only() {
        let mesh = Mesh::generate_structured(4);
        let dm = build_dofmap(&mesh);
        let mut seen = vec![false; dm.n_r];
        for (e, dof) in dm.edge_dofs.iter().enumerate() {
            match dof {
                Some(i) => {
                    assert!(!mesh.edge_boundary[e]);
                    seen[*i] = true;
                }
                None => assert!(mesh.edge_boundary[e]),
            }
        }
        assert!(seen.iter().all(|&s| s));
        for (v, dof) in dm.vertex_dofs.iter().enumerate() {
            assert_eq!(dof.is_none(), mesh.vertex_boundary[v]);
        }
    }

    #[test]
    fn jd_single_entry_on_coarsest_mesh() {
        let mesh = Mesh::generate_structured(1);
        let dm = build_dofmap(&mesh);
        let stab = StabConfig::new(StabKind::Jd, 1.0).unwrap();
        let j = assemble_stab(&mesh, &dm, &stab).unwrap();
        assert_eq!(j.nnz(), 1);
        assert_relative_eq!(j.get(0, 0), 1.0 / 3.0, epsilon = 1e-14);
    }

    #[test]
    fn stab_scales_linearly_in_alpha() {
        let mesh = Mesh::generate_structured(3);
        let dm = build_dofmap(&mesh);
        for kind in [StabKind::J0, StabKind::Jd] {
            let j1 = assemble_stab(&mesh, &dm, &StabConfig::new(kind, 1.0).unwrap()).unwrap();
            let j2 = assemble_stab(&mesh, &dm, &StabConfig::new(kind, 2.0).unwrap()).unwrap();
            assert_eq!(j1.indices, j2.indices);
            for (a, b) in j1.values.iter().zip(&j2.values) {
                assert_relative_eq!(2.0 * a, *b, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn j0_couples_only_within_elements() {
        let mesh = Mesh::generate_structured(3);
        let dm = build_dofmap(&mesh);
        let stab = StabConfig::new(StabKind::J0, 1.0).unwrap();
        let j = assemble_stab(&mesh, &dm, &stab).unwrap();
        // Edges that never share a triangle must have zero coupling.
        for e in 0..mesh.num_edges() {
            let Some(re) = dm.edge_dofs[e] else { continue };
            for e2 in 0..mesh.num_edges() {
                let Some(ce) = dm.edge_dofs[e2] else { continue };
                let share = mesh.edge_tris[e]
                    .iter()
                    .any(|t| mesh.edge_tris[e2].contains(t));
                if !share {
                    assert_eq!(j.get(re, ce), 0.0);
                }
            }
        }
        // JD must be strictly diagonal.
        let jd = assemble_stab(&mesh, &dm, &StabConfig::new(StabKind::Jd, 1.0).unwrap()).unwrap();
        for i in 0..jd.nrows {
            let (cols, _) = jd.row(i);
            assert_eq!(cols, &[i]);
        }
    }

    #[test]
    fn nonpositive_alpha_rejected() {
        assert!(StabConfig::new(StabKind::Jd, 0.0).is_err());
        assert!(StabConfig::new(StabKind::J0, -1.0).is_err());
        let mesh = Mesh::generate_structured(2);
        let mut stab = StabConfig::new(StabKind::Jd, 1.0).unwrap();
        stab.alpha_edges = Some(vec![1.0; mesh.num_edges() - 1]);
        assert!(stab.validate(&mesh).is_err());
    }

    #[test]
    fn zero_force_gives_zero_loads() {
        let mesh = Mesh::generate_structured(2);
        let dm = build_dofmap(&mesh);
        let stab = StabConfig::new(StabKind::Jd, 1.0).unwrap();
        let sys =
            assemble_system(&mesh, &dm, Some(&stab), 1.0, &zero_force, Scheme::Full).unwrap();
        assert!(sys.f_l.iter().all(|&v| v == 0.0));
        assert!(sys.f_r.iter().all(|&v| v == 0.0));
        assert_relative_eq!(sys.c.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn coarsest_mesh_divergence_row() {
        let mesh = Mesh::generate_structured(1);
        let dm = build_dofmap(&mesh);
        let stab = StabConfig::new(StabKind::Jd, 1.0).unwrap();
        let sys =
            assemble_system(&mesh, &dm, Some(&stab), 1.0, &zero_force, Scheme::Full).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        let row: Vec<f64> = (0..2).map(|t| sys.g_r.get(0, t)).collect();
        assert_relative_eq!(row[0].abs(), s2, epsilon = 1e-14);
        assert_relative_eq!(row[0] + row[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn g_r_rows_have_two_opposite_entries() {
        let mesh = Mesh::generate_structured(4);
        let dm = build_dofmap(&mesh);
        let stab = StabConfig::new(StabKind::Jd, 1.0).unwrap();
        let sys =
            assemble_system(&mesh, &dm, Some(&stab), 1e-6, &zero_force, Scheme::Full).unwrap();
        for e in 0..mesh.num_edges() {
            let Some(re) = dm.edge_dofs[e] else { continue };
            let (cols, vals) = sys.g_r.row(re);
            assert_eq!(cols.len(), 2);
            assert_relative_eq!(vals[0] + vals[1], 0.0, epsilon = 1e-14);
            assert_relative_eq!(vals[0].abs(), mesh.edge_lengths[e], epsilon = 1e-14);
        }
    }

    #[test]
    fn doubling_viscosity_scales_velocity_blocks_only() {
        let mesh = Mesh::generate_structured(2);
        let dm = build_dofmap(&mesh);
        let stab = StabConfig::new(StabKind::Jd, 1.0).unwrap();
        let f = |x: Vec2| Vec2::new(x.y, -x.x);
        let s1 = assemble_system(&mesh, &dm, Some(&stab), 1.0, &f, Scheme::Full).unwrap();
        let s2 = assemble_system(&mesh, &dm, Some(&stab), 2.0, &f, Scheme::Full).unwrap();
        for (a, b) in s1.a_ll.values.iter().zip(&s2.a_ll.values) {
            assert_relative_eq!(2.0 * a, *b, epsilon = 1e-14);
        }
        for (a, b) in s1.a_rr.values.iter().zip(&s2.a_rr.values) {
            assert_relative_eq!(2.0 * a, *b, epsilon = 1e-13);
        }
        assert_eq!(s1.g_l, s2.g_l);
        assert_eq!(s1.g_r, s2.g_r);
        assert_eq!(s1.f_l, s2.f_l);
    }

    #[test]
    fn scheme_stab_mismatch_rejected() {
        let mesh = Mesh::generate_structured(2);
        let dm = build_dofmap(&mesh);
        let stab = StabConfig::new(StabKind::Jd, 1.0).unwrap();
        let err = assemble_system(
            &mesh,
            &dm,
            Some(&stab),
            1.0,
            &zero_force,
            Scheme::BernardiRaugel,
        )
        .unwrap_err();
        assert!(matches!(err, AssemblyError::BernardiRaugelWithStab));
        let err =
            assemble_system(&mesh, &dm, None, 1.0, &zero_force, Scheme::Full).unwrap_err();
        assert!(matches!(err, AssemblyError::MissingStab));
        let j0 = StabConfig::new(StabKind::J0, 1.0).unwrap();
        let err = assemble_system(&mesh, &dm, Some(&j0), 1.0, &zero_force, Scheme::Perturbed)
            .unwrap_err();
        assert!(matches!(err, AssemblyError::PerturbedNeedsJd));
    }

    #[test]
    fn blocks_symmetric() {
        let mesh = Mesh::generate_structured(3);
        let dm = build_dofmap(&mesh);
        for kind in [StabKind::J0, StabKind::Jd] {
            let stab = StabConfig::new(kind, 1.0).unwrap();
            let sys =
                assemble_system(&mesh, &dm, Some(&stab), 1.0, &zero_force, Scheme::Full).unwrap();
            assert!(sys.a_ll.max_abs_asymmetry() < 1e-14);
            assert!(sys.a_rr.max_abs_asymmetry() < 1e-14);
        }
        let sys = assemble_system(&mesh, &dm, None, 1.0, &zero_force, Scheme::BernardiRaugel)
            .unwrap();
        assert!(sys.a_rr.max_abs_asymmetry() < 1e-14);
    }

    #[test]
    fn assembly_is_order_independent() {
        // Reversing the element order must reproduce the same matrices.
        let mesh = Mesh::generate_structured(3);
        let dm = build_dofmap(&mesh);
        let stab = StabConfig::new(StabKind::Jd, 1.0).unwrap();
        let f = |x: Vec2| Vec2::new(x.x * x.y, x.y - x.x);
        let sys = assemble_system(&mesh, &dm, Some(&stab), 1.0, &f, Scheme::Full).unwrap();

        let mut reversed = mesh.clone();
        reversed.triangles.reverse();
        let reversed = Mesh::build_topology(reversed.vertices, reversed.triangles).unwrap();
        // The edge set and its numbering are canonical, so dofs coincide;
        // pressure dofs are permuted by the reversal.
        let dm_rev = build_dofmap(&reversed);
        let sys_rev =
            assemble_system(&reversed, &dm_rev, Some(&stab), 1.0, &f, Scheme::Full).unwrap();
        let n_p = dm.n_p;
        for (i, row) in sys.a_rr.to_dense().iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                assert_relative_eq!(*v, sys_rev.a_rr.get(i, j), epsilon = 1e-15);
            }
        }
        for i in 0..dm.n_r {
            for t in 0..n_p {
                assert_relative_eq!(
                    sys.g_r.get(i, t),
                    sys_rev.g_r.get(i, n_p - 1 - t),
                    epsilon = 1e-15
                );
            }
        }
        for (a, b) in sys.f_l.iter().zip(&sys_rev.f_l) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
    }
}
