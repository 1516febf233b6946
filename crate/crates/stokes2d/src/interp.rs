//! Interpolation operators onto the discrete spaces: elementwise-mean
//! projection for pressures, edge-flux interpolation for the flux space,
//! nodal interpolation for the continuous piecewise-linear space, and their
//! divergence-preserving composite.

use crate::assembly::{DofMap, LOAD_EXACTNESS};
use crate::geometry::Vec2;
use crate::mesh::Mesh;
use crate::quadrature::{edge_quadrature, quadrature};

/// Edge integrals must stay exact well past every tested integrand; six
/// Gauss points integrate degree 11 exactly.
pub const FLUX_EXACTNESS: usize = 10;

/// Elementwise means of a scalar field, one coefficient per triangle.
pub fn project_p0(mesh: &Mesh, q: &dyn Fn(Vec2) -> f64) -> Vec<f64> {
    let rule = quadrature(LOAD_EXACTNESS).expect("fixed exactness is in range");
    (0..mesh.num_triangles())
        .map(|t| rule.integrate(mesh.tri_vertices(t), mesh.areas[t], &q) / mesh.areas[t])
        .collect()
}

/// Mean normal flux density of a vector field on every edge, matching the
/// unit-normal-trace normalization of the flux basis.
pub fn interp_rt0(mesh: &Mesh, v: &dyn Fn(Vec2) -> Vec2) -> Vec<f64> {
    let rule = edge_quadrature(FLUX_EXACTNESS);
    (0..mesh.num_edges())
        .map(|e| {
            let (lo, hi) = mesh.edges[e];
            let normal = mesh.edge_normals[e];
            let integral = rule.integrate(mesh.vertices[lo], mesh.vertices[hi], |p| {
                v(p).dot(normal)
            });
            integral / mesh.edge_lengths[e]
        })
        .collect()
}

/// Vertex-evaluation nodal interpolation onto the interior-vertex dofs.
pub fn interp_p1(mesh: &Mesh, dofmap: &DofMap, v: &dyn Fn(Vec2) -> Vec2) -> Vec<f64> {
    let mut u_l = vec![0.0; dofmap.n1];
    for (vertex, dof) in dofmap.vertex_dofs.iter().enumerate() {
        if let Some(i) = dof {
            let val = v(mesh.vertices[vertex]);
            u_l[2 * i] = val.x;
            u_l[2 * i + 1] = val.y;
        }
    }
    u_l
}

/// Divergence-preserving composite: nodal interpolation plus edge-flux
/// interpolation of the remainder. Returns coefficients in dof numbering
/// (interior vertices, interior edges); the input must vanish on the
/// boundary, so the remainder carries no flux through boundary edges.
pub fn fortin(mesh: &Mesh, dofmap: &DofMap, v: &dyn Fn(Vec2) -> Vec2) -> (Vec<f64>, Vec<f64>) {
    let u_l = interp_p1(mesh, dofmap, v);
    let nodal: Vec<Vec2> = (0..mesh.num_vertices())
        .map(|k| {
            if mesh.vertex_boundary[k] {
                Vec2::ZERO
            } else {
                v(mesh.vertices[k])
            }
        })
        .collect();

    let rule = edge_quadrature(FLUX_EXACTNESS);
    let mut u_r = vec![0.0; dofmap.n_r];
    for (e, dof) in dofmap.edge_dofs.iter().enumerate() {
        let Some(i) = dof else { continue };
        let (lo, hi) = mesh.edges[e];
        let (a, b) = (mesh.vertices[lo], mesh.vertices[hi]);
        let normal = mesh.edge_normals[e];
        let mut mean_flux = 0.0;
        for (&t, &w) in rule.points.iter().zip(&rule.weights) {
            let x = a + (b - a).scale(t);
            let trace = nodal[lo].scale(1.0 - t) + nodal[hi].scale(t);
            mean_flux += w * (v(x) - trace).dot(normal);
        }
        // The edge length cancels between the integral and the coefficient
        // normalization, leaving the weighted mean directly.
        u_r[*i] = mean_flux;
    }
    (u_l, u_r)
}
