//! Direct solution of the bordered saddle-point system.
//!
//! The global matrix is ordered [flux dofs; vertex dofs; pressures; mean
//! multiplier] and factored by a left-looking sparse LU with partial
//! pivoting, using depth-first reachability to predict each column's fill.
//! Fill is kept low by a geometric nested-dissection permutation computed
//! from the dof locations; very dense rows (the mean-constraint border) are
//! kept out of the dissection and ordered last.

use crate::assembly::{BlockSystem, DofMap, Scheme};
use crate::condense::{recover_rt0, CondensedSystem};
use crate::geometry::Vec2;
use crate::mesh::Mesh;
use crate::sparse::{Coo, Csr};

pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, thiserror::Error)]
pub enum SolverError {
    #[error("matrix is numerically singular at column {col}")]
    Singular { col: usize },
    #[error("solve residual {achieved:.3e} exceeds tolerance {required:.3e}")]
    Residual { achieved: f64, required: f64 },
    #[error("inconsistent dimensions: {0}")]
    Dimension(String),
}

/// Discrete solution with the pressure multiplier and achieved residual.
#[derive(Clone, Debug)]
pub struct Solution {
    pub u_l: Vec<f64>,
    pub u_r: Vec<f64>,
    pub p: Vec<f64>,
    pub lambda: f64,
    pub scheme: Scheme,
    pub residual: f64,
}

/// Sparse LU factors P A Q = L U with row pivoting P and the caller-supplied
/// fill-reducing symmetric permutation Q.
#[derive(Debug)]
pub struct Factorization {
    n: usize,
    /// Position -> original index.
    perm: Vec<usize>,
    /// Pivot step -> row (in permuted numbering).
    piv_row: Vec<usize>,
    l_ptr: Vec<usize>,
    l_rows: Vec<u32>,
    l_vals: Vec<f64>,
    u_ptr: Vec<usize>,
    u_rows: Vec<u32>,
    u_vals: Vec<f64>,
    u_diag: Vec<f64>,
}

const UNSET: usize = usize::MAX;

/// Factor a square matrix. `order` is a symmetric fill-reducing permutation
/// (position -> original index); identity when absent.
pub fn factorize(a: &Csr, order: Option<Vec<usize>>) -> Result<Factorization, SolverError> {
    let n = a.nrows;
    if a.ncols != n {
        return Err(SolverError::Dimension(format!(
            "matrix is {}x{}",
            a.nrows, a.ncols
        )));
    }
    let perm = order.unwrap_or_else(|| (0..n).collect());
    debug_assert_eq!(perm.len(), n);
    let mut inv_perm = vec![UNSET; n];
    for (k, &old) in perm.iter().enumerate() {
        debug_assert_eq!(inv_perm[old], UNSET, "order is not a permutation");
        inv_perm[old] = k;
    }

    // Columns of the permuted matrix: column j holds A[:, perm[j]] with row
    // indices renumbered. The transpose's rows are the original's columns.
    let at = a.transpose();

    let mut pinv = vec![UNSET; n];
    let mut piv_row = vec![0usize; n];
    let mut l_ptr = vec![0usize; n + 1];
    let mut l_rows: Vec<u32> = Vec::new();
    let mut l_vals: Vec<f64> = Vec::new();
    let mut u_ptr = vec![0usize; n + 1];
    let mut u_rows: Vec<u32> = Vec::new();
    let mut u_vals: Vec<f64> = Vec::new();
    let mut u_diag = vec![0.0; n];

    let mut x = vec![0.0; n];
    let mut mark = vec![UNSET; n];
    let mut reach: Vec<u32> = Vec::new();
    let mut stack: Vec<(u32, usize)> = Vec::new();

    for j in 0..n {
        reach.clear();
        let (orig_rows, col_vals) = at.row(perm[j]);

        // Depth-first search through the current L pattern collects, in
        // postorder, every row the triangular solve can touch.
        for &orig_r in orig_rows {
            let r = inv_perm[orig_r] as u32;
            if mark[r as usize] == j {
                continue;
            }
            mark[r as usize] = j;
            stack.push((r, 0));
            while let Some(&(node, cursor)) = stack.last() {
                let col = pinv[node as usize];
                let mut pushed = false;
                if col != UNSET {
                    let (start, end) = (l_ptr[col], l_ptr[col + 1]);
                    let mut k = cursor;
                    while start + k < end {
                        let child = l_rows[start + k];
                        k += 1;
                        if mark[child as usize] != j {
                            mark[child as usize] = j;
                            stack.last_mut().unwrap().1 = k;
                            stack.push((child, 0));
                            pushed = true;
                            break;
                        }
                    }
                    if !pushed {
                        stack.last_mut().unwrap().1 = k;
                    }
                }
                if !pushed {
                    reach.push(node);
                    stack.pop();
                }
            }
        }

        // Numeric sparse triangular solve in topological (reverse postorder)
        // order.
        for &i in &reach {
            x[i as usize] = 0.0;
        }
        for (&orig_r, &v) in orig_rows.iter().zip(col_vals) {
            x[inv_perm[orig_r]] = v;
        }
        for &i in reach.iter().rev() {
            let col = pinv[i as usize];
            if col == UNSET {
                continue;
            }
            let xi = x[i as usize];
            if xi == 0.0 {
                continue;
            }
            for k in l_ptr[col]..l_ptr[col + 1] {
                x[l_rows[k] as usize] -= l_vals[k] * xi;
            }
        }

        // Partial pivoting over the rows not yet assigned to a pivot.
        let mut best = -1.0f64;
        let mut best_row = UNSET;
        for &i in &reach {
            if pinv[i as usize] == UNSET {
                let mag = x[i as usize].abs();
                if mag > best {
                    best = mag;
                    best_row = i as usize;
                }
            }
        }
        if best_row == UNSET || best == 0.0 || !best.is_finite() {
            return Err(SolverError::Singular { col: j });
        }
        let pivot = x[best_row];

        for &i in &reach {
            let p = pinv[i as usize];
            if p != UNSET {
                let v = x[i as usize];
                if v != 0.0 {
                    u_rows.push(p as u32);
                    u_vals.push(v);
                }
            }
        }
        u_ptr[j + 1] = u_rows.len();
        u_diag[j] = pivot;

        for &i in &reach {
            if pinv[i as usize] == UNSET && i as usize != best_row {
                let v = x[i as usize] / pivot;
                if v != 0.0 {
                    l_rows.push(i);
                    l_vals.push(v);
                }
            }
        }
        l_ptr[j + 1] = l_rows.len();
        pinv[best_row] = j;
        piv_row[j] = best_row;
    }

    Ok(Factorization {
        n,
        perm,
        piv_row,
        l_ptr,
        l_rows,
        l_vals,
        u_ptr,
        u_rows,
        u_vals,
        u_diag,
    })
}

impl Factorization {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        // Forward elimination against L, tracking rows in permuted numbering.
        let mut z: Vec<f64> = (0..n).map(|k| b[self.perm[k]]).collect();
        let mut y = vec![0.0; n];
        for j in 0..n {
            let yj = z[self.piv_row[j]];
            y[j] = yj;
            if yj != 0.0 {
                for k in self.l_ptr[j]..self.l_ptr[j + 1] {
                    z[self.l_rows[k] as usize] -= self.l_vals[k] * yj;
                }
            }
        }
        // Back substitution against the column-stored upper factor.
        for j in (0..n).rev() {
            let xj = y[j] / self.u_diag[j];
            y[j] = xj;
            if xj != 0.0 {
                for k in self.u_ptr[j]..self.u_ptr[j + 1] {
                    y[self.u_rows[k] as usize] -= self.u_vals[k] * xj;
                }
            }
        }
        let mut out = vec![0.0; n];
        for k in 0..n {
            out[self.perm[k]] = y[k];
        }
        out
    }

    pub fn fill(&self) -> usize {
        self.l_rows.len() + self.u_rows.len() + self.n
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Factor, solve, apply one step of iterative refinement, and verify the
/// relative residual against the tolerance.
pub fn solve_refined(
    a: &Csr,
    b: &[f64],
    order: Option<Vec<usize>>,
) -> Result<(Vec<f64>, f64), SolverError> {
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((vec![0.0; a.ncols], 0.0));
    }
    let fact = factorize(a, order)?;
    let mut x = fact.solve(b);
    let mut r = b.to_vec();
    a.matvec_add(&x, -1.0, &mut r);
    let correction = fact.solve(&r);
    for (xi, ci) in x.iter_mut().zip(&correction) {
        *xi += ci;
    }
    let mut r = b.to_vec();
    a.matvec_add(&x, -1.0, &mut r);
    let rel = norm2(&r) / b_norm;
    if !(rel <= RESIDUAL_TOL) {
        return Err(SolverError::Residual {
            achieved: rel,
            required: RESIDUAL_TOL,
        });
    }
    Ok((x, rel))
}

/// Geometric nested-dissection order for a structurally symmetric matrix
/// whose rows have locations. Returns position -> original index. Rows far
/// denser than average (the bordering constraint) are appended at the end.
pub fn nested_dissection_order(pattern: &Csr, coords: &[Vec2]) -> Vec<usize> {
    let n = pattern.nrows;
    assert_eq!(coords.len(), n);
    if n == 0 {
        return Vec::new();
    }
    let avg_degree = (pattern.nnz() as f64 / n as f64).ceil() as usize;
    let dense_cut = (8 * avg_degree).max(48);
    let mut dense = vec![false; n];
    let mut active: Vec<u32> = Vec::with_capacity(n);
    let mut tail: Vec<usize> = Vec::new();
    for i in 0..n {
        if pattern.row(i).0.len() > dense_cut {
            dense[i] = true;
            tail.push(i);
        } else {
            active.push(i as u32);
        }
    }
    let mut order = Vec::with_capacity(n);
    let mut side = vec![0u8; n];
    dissect(pattern, coords, &dense, active, 0, &mut side, &mut order);
    order.extend(tail);
    order
}

const ND_LEAF: usize = 24;

fn dissect(
    pattern: &Csr,
    coords: &[Vec2],
    dense: &[bool],
    mut nodes: Vec<u32>,
    axis: usize,
    side: &mut [u8],
    order: &mut Vec<usize>,
) {
    let key = |i: u32| {
        let c = coords[i as usize];
        if axis == 0 {
            c.x
        } else {
            c.y
        }
    };
    if nodes.len() <= ND_LEAF {
        nodes.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
        order.extend(nodes.iter().map(|&i| i as usize));
        return;
    }
    nodes.sort_by(|&a, &b| key(a).total_cmp(&key(b)).then(a.cmp(&b)));
    let mid = nodes.len() / 2;
    for &i in &nodes[mid..] {
        side[i as usize] = 2;
    }
    // One-sided vertex separator: first-half nodes adjacent to the second
    // half move to the separator, decoupling the remainder.
    let mut keep = Vec::with_capacity(mid);
    let mut sep = Vec::new();
    for &i in &nodes[..mid] {
        let (cols, _) = pattern.row(i as usize);
        if cols.iter().any(|&c| !dense[c] && side[c] == 2) {
            sep.push(i);
        } else {
            keep.push(i);
        }
    }
    let b: Vec<u32> = nodes[mid..].to_vec();
    for &i in &nodes[mid..] {
        side[i as usize] = 0;
    }
    drop(nodes);
    dissect(pattern, coords, dense, keep, axis ^ 1, side, order);
    dissect(pattern, coords, dense, b, axis ^ 1, side, order);
    order.extend(sep.iter().map(|&i| i as usize));
}

/// Global ordering offsets: [U_R; U_L; P; lambda].
pub fn global_offsets(dofmap: &DofMap) -> (usize, usize, usize, usize) {
    let off_l = dofmap.n_r;
    let off_p = off_l + dofmap.n1;
    let lambda = off_p + dofmap.n_p;
    (0, off_l, off_p, lambda)
}

/// Assemble the bordered symmetric global matrix and right-hand side.
pub fn to_global(system: &BlockSystem) -> Result<(Csr, Vec<f64>), SolverError> {
    let n_r = system.a_rr.nrows;
    let n1 = system.a_ll.nrows;
    let n_p = system.c.len();
    let check = |cond: bool, what: &str| {
        if cond {
            Ok(())
        } else {
            Err(SolverError::Dimension(what.to_string()))
        }
    };
    check(system.a_rl.nrows == n_r && system.a_rl.ncols == n1, "A_RL")?;
    check(system.g_r.nrows == n_r && system.g_r.ncols == n_p, "G_R")?;
    check(system.g_l.nrows == n1 && system.g_l.ncols == n_p, "G_L")?;
    check(system.f_r.len() == n_r, "F_R")?;
    check(system.f_l.len() == n1, "F_L")?;

    let n = n_r + n1 + n_p + 1;
    let (off_r, off_l, off_p, lam) = (0, n_r, n_r + n1, n_r + n1 + n_p);
    let mut coo = Coo::new(n, n);
    let push_block = |coo: &mut Coo, m: &Csr, ro: usize, co: usize, s: f64, mirror: bool| {
        for i in 0..m.nrows {
            let (cols, vals) = m.row(i);
            for (&jj, &v) in cols.iter().zip(vals) {
                coo.push(ro + i, co + jj, s * v);
                if mirror {
                    coo.push(co + jj, ro + i, s * v);
                }
            }
        }
    };
    push_block(&mut coo, &system.a_rr, off_r, off_r, 1.0, false);
    push_block(&mut coo, &system.a_rl, off_r, off_l, 1.0, true);
    push_block(&mut coo, &system.a_ll, off_l, off_l, 1.0, false);
    push_block(&mut coo, &system.g_r, off_r, off_p, -1.0, true);
    push_block(&mut coo, &system.g_l, off_l, off_p, -1.0, true);
    for (t, &ct) in system.c.iter().enumerate() {
        coo.push(off_p + t, lam, ct);
        coo.push(lam, off_p + t, ct);
    }

    let mut rhs = vec![0.0; n];
    rhs[..n_r].copy_from_slice(&system.f_r);
    rhs[n_r..n_r + n1].copy_from_slice(&system.f_l);
    Ok((coo.to_csr(), rhs))
}

/// Locations of the global unknowns, used by the dissection ordering: flux
/// dofs at edge midpoints, the vertex dof pair at the vertex, pressures at
/// centroids, the multiplier at the mesh centroid.
pub fn full_dof_coordinates(mesh: &Mesh, dofmap: &DofMap) -> Vec<Vec2> {
    let n = dofmap.n_r + dofmap.n1 + dofmap.n_p + 1;
    let mut coords = vec![Vec2::ZERO; n];
    let (off_r, off_l, off_p, lam) = global_offsets(dofmap);
    for (e, dof) in dofmap.edge_dofs.iter().enumerate() {
        if let Some(i) = dof {
            let (lo, hi) = mesh.edges[e];
            coords[off_r + i] = (mesh.vertices[lo] + mesh.vertices[hi]).scale(0.5);
        }
    }
    for (v, dof) in dofmap.vertex_dofs.iter().enumerate() {
        if let Some(i) = dof {
            coords[off_l + 2 * i] = mesh.vertices[v];
            coords[off_l + 2 * i + 1] = mesh.vertices[v];
        }
    }
    let mut center = Vec2::ZERO;
    for t in 0..mesh.num_triangles() {
        let [a, b, c] = mesh.tri_vertices(t);
        coords[off_p + t] = (a + b + c).scale(1.0 / 3.0);
        center = center + coords[off_p + t];
    }
    coords[lam] = center.scale(1.0 / mesh.num_triangles() as f64);
    coords
}

/// Same for the condensed ordering [U_L; P; lambda].
pub fn condensed_dof_coordinates(mesh: &Mesh, dofmap: &DofMap) -> Vec<Vec2> {
    let n = dofmap.n1 + dofmap.n_p + 1;
    let mut coords = vec![Vec2::ZERO; n];
    for (v, dof) in dofmap.vertex_dofs.iter().enumerate() {
        if let Some(i) = dof {
            coords[2 * i] = mesh.vertices[v];
            coords[2 * i + 1] = mesh.vertices[v];
        }
    }
    let mut center = Vec2::ZERO;
    for t in 0..mesh.num_triangles() {
        let [a, b, c] = mesh.tri_vertices(t);
        coords[dofmap.n1 + t] = (a + b + c).scale(1.0 / 3.0);
        center = center + coords[dofmap.n1 + t];
    }
    coords[n - 1] = center.scale(1.0 / mesh.num_triangles() as f64);
    coords
}

/// Exactify the area-weighted zero mean of the pressure. The divergence rows
/// sum to zero, so shifting the pressure by a constant leaves every other
/// equation untouched.
fn project_pressure_mean(p: &mut [f64], c: &[f64]) {
    let total: f64 = c.iter().sum();
    let mean: f64 = p.iter().zip(c).map(|(pi, ci)| pi * ci).sum::<f64>() / total;
    for pi in p.iter_mut() {
        *pi -= mean;
    }
}

/// Solve the full block system on its mesh.
pub fn solve_system(
    system: &BlockSystem,
    mesh: &Mesh,
    dofmap: &DofMap,
) -> Result<Solution, SolverError> {
    let (a, b) = to_global(system)?;
    let order = nested_dissection_order(&a, &full_dof_coordinates(mesh, dofmap));
    let (x, residual) = solve_refined(&a, &b, Some(order))?;
    let (n_r, n1) = (dofmap.n_r, dofmap.n1);
    let u_r = x[..n_r].to_vec();
    let u_l = x[n_r..n_r + n1].to_vec();
    let mut p = x[n_r + n1..n_r + n1 + dofmap.n_p].to_vec();
    let lambda = x[n_r + n1 + dofmap.n_p];
    project_pressure_mean(&mut p, &system.c);
    Ok(Solution {
        u_l,
        u_r,
        p,
        lambda,
        scheme: system.scheme,
        residual,
    })
}

/// Assemble and solve the condensed system, then recover the fluxes.
pub fn solve_condensed(
    cs: &CondensedSystem,
    mesh: &Mesh,
    dofmap: &DofMap,
) -> Result<Solution, SolverError> {
    let n1 = cs.a_hat.nrows;
    let n_p = cs.c.len();
    let n = n1 + n_p + 1;
    let mut coo = Coo::new(n, n);
    for i in 0..n1 {
        let (cols, vals) = cs.a_hat.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            coo.push(i, j, v);
        }
    }
    for i in 0..n1 {
        let (cols, vals) = cs.g_hat.row(i);
        for (&t, &v) in cols.iter().zip(vals) {
            coo.push(i, n1 + t, -v);
            coo.push(n1 + t, i, -v);
        }
    }
    for t in 0..n_p {
        let (cols, vals) = cs.s_pp.row(t);
        for (&t2, &v) in cols.iter().zip(vals) {
            coo.push(n1 + t, n1 + t2, v);
        }
        coo.push(n1 + t, n - 1, cs.c[t]);
        coo.push(n - 1, n1 + t, cs.c[t]);
    }
    let a = coo.to_csr();
    let mut rhs = vec![0.0; n];
    rhs[..n1].copy_from_slice(&cs.f_hat_l);
    rhs[n1..n1 + n_p].copy_from_slice(&cs.f_hat_p);

    let order = nested_dissection_order(&a, &condensed_dof_coordinates(mesh, dofmap));
    let (x, residual) = solve_refined(&a, &rhs, Some(order))?;
    let u_l = x[..n1].to_vec();
    let mut p = x[n1..n1 + n_p].to_vec();
    let lambda = x[n - 1];
    project_pressure_mean(&mut p, &cs.c);
    let u_r = recover_rt0(cs, &u_l, &p);
    Ok(Solution {
        u_l,
        u_r,
        p,
        lambda,
        scheme: Scheme::Perturbed,
        residual,
    })
}
