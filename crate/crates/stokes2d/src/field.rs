//! Pointwise evaluation of the discrete velocity, elementwise.
//!
//! The vertex part is shared by every scheme; the enrichment part is either
//! the per-edge flux basis (with gradient a multiple of the identity) or the
//! normal edge bubble (with rank-one gradient n (grad b)^T).

use crate::assembly::{DofMap, Scheme};
use crate::elements::{bary_at, br_bubble, bubble_gradient, bubble_value, rt0_basis, Rt0Basis,
    TriGeom};
use crate::geometry::Vec2;
use crate::mesh::Mesh;
use crate::quadrature::quadrature;

enum Enrichment {
    Flux([Rt0Basis; 3]),
    Bubble([Vec2; 3]),
}

/// Velocity restricted to one element, assembled from global coefficients.
pub struct ElementField {
    pub geom: TriGeom,
    nodal: [Vec2; 3],
    coeffs: [f64; 3],
    enrichment: Enrichment,
}

impl ElementField {
    pub fn value(&self, x: Vec2) -> Vec2 {
        let bary = bary_at(&self.geom, x);
        let mut out = Vec2::ZERO;
        for (k, &nv) in self.nodal.iter().enumerate() {
            out = out + nv.scale(bary[k]);
        }
        match &self.enrichment {
            Enrichment::Flux(bases) => {
                for (k, basis) in bases.iter().enumerate() {
                    out = out + basis.eval(x).scale(self.coeffs[k]);
                }
            }
            Enrichment::Bubble(normals) => {
                for (k, normal) in normals.iter().enumerate() {
                    out = out + normal.scale(self.coeffs[k] * bubble_value(k, bary));
                }
            }
        }
        out
    }

    /// Jacobian with rows per component: grad[i][j] = d u_i / d x_j.
    pub fn gradient(&self, x: Vec2) -> [[f64; 2]; 2] {
        let mut g = [[0.0; 2]; 2];
        for (k, &nv) in self.nodal.iter().enumerate() {
            let gl = self.geom.grad_lambda[k];
            g[0][0] += nv.x * gl.x;
            g[0][1] += nv.x * gl.y;
            g[1][0] += nv.y * gl.x;
            g[1][1] += nv.y * gl.y;
        }
        match &self.enrichment {
            Enrichment::Flux(bases) => {
                let scale: f64 = bases
                    .iter()
                    .zip(&self.coeffs)
                    .map(|(b, c)| b.coeff * c)
                    .sum();
                g[0][0] += scale;
                g[1][1] += scale;
            }
            Enrichment::Bubble(normals) => {
                let bary = bary_at(&self.geom, x);
                for (k, normal) in normals.iter().enumerate() {
                    let gb = bubble_gradient(&self.geom, k, bary).scale(self.coeffs[k]);
                    g[0][0] += normal.x * gb.x;
                    g[0][1] += normal.x * gb.y;
                    g[1][0] += normal.y * gb.x;
                    g[1][1] += normal.y * gb.y;
                }
            }
        }
        g
    }

    pub fn divergence(&self, x: Vec2) -> f64 {
        let g = self.gradient(x);
        g[0][0] + g[1][1]
    }
}

/// Discrete velocity over the whole mesh in global coefficient vectors.
pub struct DiscreteVelocity<'a> {
    pub mesh: &'a Mesh,
    pub dofmap: &'a DofMap,
    pub u_l: &'a [f64],
    pub u_r: &'a [f64],
    pub scheme: Scheme,
}

impl<'a> DiscreteVelocity<'a> {
    pub fn new(
        mesh: &'a Mesh,
        dofmap: &'a DofMap,
        u_l: &'a [f64],
        u_r: &'a [f64],
        scheme: Scheme,
    ) -> DiscreteVelocity<'a> {
        assert_eq!(u_l.len(), dofmap.n1);
        assert_eq!(u_r.len(), dofmap.n_r);
        DiscreteVelocity {
            mesh,
            dofmap,
            u_l,
            u_r,
            scheme,
        }
    }

    pub fn element(&self, t: usize) -> ElementField {
        let geom = TriGeom::new(self.mesh.tri_vertices(t));
        let nodal = std::array::from_fn(|k| {
            match self.dofmap.vertex_dofs[self.mesh.triangles[t][k]] {
                Some(i) => Vec2::new(self.u_l[2 * i], self.u_l[2 * i + 1]),
                None => Vec2::ZERO,
            }
        });
        let coeffs = std::array::from_fn(|k| {
            match self.dofmap.edge_dofs[self.mesh.tri_edges[t][k].edge] {
                Some(i) => self.u_r[i],
                None => 0.0,
            }
        });
        let signs: [f64; 3] = std::array::from_fn(|k| self.mesh.tri_edges[t][k].sign as f64);
        let enrichment = match self.scheme {
            Scheme::Full | Scheme::Perturbed => {
                Enrichment::Flux(std::array::from_fn(|k| rt0_basis(&geom, k, signs[k])))
            }
            Scheme::BernardiRaugel => {
                let rule = quadrature(2).expect("fixed exactness is in range");
                Enrichment::Bubble(std::array::from_fn(|k| {
                    br_bubble(&geom, k, signs[k], &rule).normal
                }))
            }
        };
        ElementField {
            geom,
            nodal,
            coeffs,
            enrichment,
        }
    }

    /// Largest coefficient magnitude, the natural scale for relative checks.
    pub fn coefficient_scale(&self) -> f64 {
        self.u_l
            .iter()
            .chain(self.u_r)
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}
