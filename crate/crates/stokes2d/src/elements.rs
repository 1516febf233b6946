//! Reference and physical element kernels.
//!
//! Local degrees of freedom are ordered vertices first, then edges: the six
//! vector P1 dofs are [v0x, v0y, v1x, v1y, v2x, v2y] and the three edge dofs
//! (RT0 fluxes or Bernardi-Raugel bubbles) follow the triangle's local edge
//! order, edge k opposite vertex k.
//!
//! The RT0 and mixed gradient blocks use the identity
//! (grad w, grad Phi)_T = 1/2 (div w, div Phi)_T, which holds pointwise
//! because grad Phi = 1/2 (div Phi) I for every RT0 function. Both sides
//! involve only elementwise constants, so the blocks are exact.

use crate::geometry::Vec2;
use crate::quadrature::QuadratureRule;

/// Geometry cache for one triangle: area, barycentric gradients, edge data.
#[derive(Clone, Debug)]
pub struct TriGeom {
    pub verts: [Vec2; 3],
    pub area: f64,
    /// grad lambda_k, constant over the triangle.
    pub grad_lambda: [Vec2; 3],
    /// Length of edge k (opposite vertex k).
    pub edge_lengths: [f64; 3],
    /// Unit outward normal of edge k.
    pub outward_normals: [Vec2; 3],
}

impl TriGeom {
    /// Requires counter-clockwise vertices (positive area).
    pub fn new(verts: [Vec2; 3]) -> TriGeom {
        let twice_area = (verts[1] - verts[0]).cross(verts[2] - verts[0]);
        assert!(twice_area > 0.0, "triangle must be counter-clockwise");
        let area = 0.5 * twice_area;
        let mut grad_lambda = [Vec2::ZERO; 3];
        let mut edge_lengths = [0.0; 3];
        let mut outward_normals = [Vec2::ZERO; 3];
        for k in 0..3 {
            let (i, j) = ((k + 1) % 3, (k + 2) % 3);
            let tangent = verts[j] - verts[i];
            grad_lambda[k] = (verts[i] - verts[j]).rot_cw().scale(1.0 / twice_area);
            edge_lengths[k] = tangent.norm();
            outward_normals[k] = tangent.rot_cw().scale(1.0 / edge_lengths[k]);
        }
        TriGeom {
            verts,
            area,
            grad_lambda,
            edge_lengths,
            outward_normals,
        }
    }

    /// Physical point of a barycentric coordinate triple.
    pub fn point(&self, bary: [f64; 3]) -> Vec2 {
        self.verts[0].scale(bary[0]) + self.verts[1].scale(bary[1]) + self.verts[2].scale(bary[2])
    }
}

/// RT0 basis function attached to local edge e of a triangle:
/// Phi(x) = coeff * (x - opposite), with constant divergence 2 * coeff.
/// The normal trace Phi . n_e is identically `sign` * |n_e outward| = 1 on e
/// (with the orientation sign folded into coeff) and 0 on the other edges.
#[derive(Clone, Copy, Debug)]
pub struct Rt0Basis {
    pub coeff: f64,
    pub opposite: Vec2,
    pub divergence: f64,
}

impl Rt0Basis {
    pub fn eval(&self, x: Vec2) -> Vec2 {
        (x - self.opposite).scale(self.coeff)
    }
}

/// Basis for local edge `k` with orientation sign `s` (+1 when the global
/// edge normal points out of this triangle).
pub fn rt0_basis(geom: &TriGeom, local_edge: usize, sign: f64) -> Rt0Basis {
    let h_e = geom.edge_lengths[local_edge];
    let coeff = sign * h_e / (2.0 * geom.area);
    Rt0Basis {
        coeff,
        opposite: geom.verts[local_edge],
        divergence: sign * h_e / geom.area,
    }
}

/// Per-triangle blocks of the velocity and divergence forms, in the local
/// ordering described at module level.
#[derive(Clone, Debug)]
pub struct LocalMatrices {
    /// (grad of vector P1, grad of vector P1), 6x6.
    pub a_ll: [[f64; 6]; 6],
    /// (grad RT0, grad of vector P1), 3x6, via the divergence shortcut.
    pub a_rl: [[f64; 6]; 3],
    /// (grad RT0, grad RT0), 3x3, via the divergence shortcut.
    pub a_rr: [[f64; 3]; 3],
    /// (RT0, RT0) mass, 3x3.
    pub m_rr: [[f64; 3]; 3],
    /// (div of vector P1, 1), length 6.
    pub g_l: [f64; 6],
    /// (div RT0, 1), length 3.
    pub g_r: [f64; 3],
}

/// Assemble all local blocks. `signs[k]` orients the RT0 basis on local
/// edge k. The rule only needs exactness 2 (for the RT0 mass block).
pub fn local_matrices(geom: &TriGeom, signs: [f64; 3], rule: &QuadratureRule) -> LocalMatrices {
    assert!(rule.exactness >= 2, "local matrices need exactness >= 2");
    let area = geom.area;
    let bases: [Rt0Basis; 3] = std::array::from_fn(|k| rt0_basis(geom, k, signs[k]));

    // Vector P1 dof (2j + a) is lambda_j e_a; its gradient has single nonzero
    // row a equal to grad lambda_j, and its divergence is grad lambda_j [a].
    let p1_div = |dof: usize| -> f64 {
        let (j, a) = (dof / 2, dof % 2);
        if a == 0 {
            geom.grad_lambda[j].x
        } else {
            geom.grad_lambda[j].y
        }
    };

    let mut a_ll = [[0.0; 6]; 6];
    for i in 0..6 {
        for j in 0..6 {
            if i % 2 == j % 2 {
                a_ll[i][j] = geom.grad_lambda[i / 2].dot(geom.grad_lambda[j / 2]) * area;
            }
        }
    }

    let mut a_rl = [[0.0; 6]; 3];
    let mut a_rr = [[0.0; 3]; 3];
    for e in 0..3 {
        for dof in 0..6 {
            a_rl[e][dof] = 0.5 * bases[e].divergence * p1_div(dof) * area;
        }
        for e2 in 0..3 {
            a_rr[e][e2] = 0.5 * bases[e].divergence * bases[e2].divergence * area;
        }
    }

    let mut m_rr = [[0.0; 3]; 3];
    for e in 0..3 {
        for e2 in e..3 {
            let v = rule.integrate(geom.verts, area, |x| bases[e].eval(x).dot(bases[e2].eval(x)));
            m_rr[e][e2] = v;
            m_rr[e2][e] = v;
        }
    }

    let mut g_l = [0.0; 6];
    for (dof, g) in g_l.iter_mut().enumerate() {
        *g = p1_div(dof) * area;
    }
    let g_r: [f64; 3] = std::array::from_fn(|e| bases[e].divergence * area);

    LocalMatrices {
        a_ll,
        a_rl,
        a_rr,
        m_rr,
        g_l,
        g_r,
    }
}

/// The a_RL and a_RR blocks by direct Frobenius contraction of the constant
/// gradients, used to cross-check the divergence shortcut.
pub fn contraction_blocks(geom: &TriGeom, signs: [f64; 3]) -> ([[f64; 6]; 3], [[f64; 3]; 3]) {
    let area = geom.area;
    let bases: [Rt0Basis; 3] = std::array::from_fn(|k| rt0_basis(geom, k, signs[k]));
    // grad Phi = coeff * I; grad (lambda_j e_a) has row a = grad lambda_j.
    let mut a_rl = [[0.0; 6]; 3];
    let mut a_rr = [[0.0; 3]; 3];
    for e in 0..3 {
        let c = bases[e].coeff;
        for dof in 0..6 {
            let (j, a) = (dof / 2, dof % 2);
            let g = geom.grad_lambda[j];
            // Frobenius product of c*I with the single-row gradient: only the
            // (a, a) entry of I meets row a, picking out component a of g.
            let entry = if a == 0 { c * g.x } else { c * g.y };
            a_rl[e][dof] = entry * area;
        }
        for e2 in 0..3 {
            a_rr[e][e2] = 2.0 * c * bases[e2].coeff * area;
        }
    }
    (a_rl, a_rr)
}

/// Bernardi-Raugel normal edge bubble on local edge k: the vector function
/// b_k n_k with b_k = 4 lambda_i lambda_j (endpoints of the edge), normalized
/// to 1 at the edge midpoint, and n_k the oriented global edge normal.
#[derive(Clone, Debug)]
pub struct BrBubble {
    /// Coupling (grad bubble, grad of vector P1), length 6.
    pub coupling: [f64; 6],
    /// (grad bubble, grad bubble).
    pub self_energy: f64,
    /// (div bubble, 1) = sign * (2/3) * h_e.
    pub div_row: f64,
    /// Oriented normal carried by the bubble.
    pub normal: Vec2,
}

/// Value of the scalar bubble 4 lambda_i lambda_j at a barycentric point.
pub fn bubble_value(local_edge: usize, bary: [f64; 3]) -> f64 {
    let (i, j) = ((local_edge + 1) % 3, (local_edge + 2) % 3);
    4.0 * bary[i] * bary[j]
}

pub fn bubble_gradient(geom: &TriGeom, local_edge: usize, bary: [f64; 3]) -> Vec2 {
    let (i, j) = ((local_edge + 1) % 3, (local_edge + 2) % 3);
    (geom.grad_lambda[j].scale(bary[i]) + geom.grad_lambda[i].scale(bary[j])).scale(4.0)
}

pub fn bary_at(geom: &TriGeom, x: Vec2) -> [f64; 3] {
    // Affine inversion via the barycentric gradients: lambda_k is affine with
    // gradient grad_lambda[k] and value 1 at vertex k.
    std::array::from_fn(|k| 1.0 + geom.grad_lambda[k].dot(x - geom.verts[k]))
}

pub fn br_bubble(
    geom: &TriGeom,
    local_edge: usize,
    sign: f64,
    rule: &QuadratureRule,
) -> BrBubble {
    let normal = geom.outward_normals[local_edge].scale(sign);
    let mut coupling = [0.0; 6];
    for (dof, c) in coupling.iter_mut().enumerate() {
        let (j, a) = (dof / 2, dof % 2);
        let na = if a == 0 { normal.x } else { normal.y };
        let v = rule.integrate(geom.verts, geom.area, |x| {
            bubble_gradient(geom, local_edge, bary_at(geom, x)).dot(geom.grad_lambda[j])
        });
        *c = na * v;
    }
    let self_energy = rule.integrate(geom.verts, geom.area, |x| {
        bubble_gradient(geom, local_edge, bary_at(geom, x)).norm_sq()
    });
    let div_row = rule.integrate(geom.verts, geom.area, |x| {
        bubble_gradient(geom, local_edge, bary_at(geom, x)).dot(normal)
    });
    BrBubble {
        coupling,
        self_energy,
        div_row,
        normal,
    }
}

/// All Bernardi-Raugel blocks for one triangle, including the bubble-bubble
/// cross couplings between different edges.
#[derive(Clone, Debug)]
pub struct BrLocal {
    pub a_bb: [[f64; 3]; 3],
    pub a_bl: [[f64; 6]; 3],
    pub g_b: [f64; 3],
}

pub fn br_local(geom: &TriGeom, signs: [f64; 3], rule: &QuadratureRule) -> BrLocal {
    let normals: [Vec2; 3] =
        std::array::from_fn(|k| geom.outward_normals[k].scale(signs[k]));
    let mut a_bb = [[0.0; 3]; 3];
    for e in 0..3 {
        for e2 in e..3 {
            let grads = rule.integrate(geom.verts, geom.area, |x| {
                let b = bary_at(geom, x);
                bubble_gradient(geom, e, b).dot(bubble_gradient(geom, e2, b))
            });
            let v = normals[e].dot(normals[e2]) * grads;
            a_bb[e][e2] = v;
            a_bb[e2][e] = v;
        }
    }
    let mut a_bl = [[0.0; 6]; 3];
    let mut g_b = [0.0; 3];
    for e in 0..3 {
        let bubble = br_bubble(geom, e, signs[e], rule);
        a_bl[e] = bubble.coupling;
        g_b[e] = bubble.div_row;
    }
    BrLocal { a_bb, a_bl, g_b }
}
