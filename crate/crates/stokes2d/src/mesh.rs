//! Conforming triangulations of the unit square with full edge topology.
//!
//! Edges are stored once, as vertex pairs `(lo, hi)` with `lo < hi`, sorted
//! lexicographically. Every edge carries a global unit normal obtained by
//! rotating the lo->hi direction 90 degrees clockwise. Each triangle records
//! its three edges together with a sign that is +1 exactly when the global
//! normal points out of the triangle, so the two triangles sharing an
//! interior edge always carry opposite signs.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::geometry::Vec2;

#[derive(Debug, thiserror::Error)]
pub enum MeshError {
    #[error("triangle {tri} references vertex {vertex} but the mesh has only {nverts} vertices")]
    VertexOutOfRange {
        tri: usize,
        vertex: usize,
        nverts: usize,
    },
    #[error("triangle {tri} is degenerate (area {area:.3e})")]
    DegenerateTriangle { tri: usize, area: f64 },
    #[error("duplicate triangle {tri} (same vertex set as triangle {first})")]
    DuplicateTriangle { tri: usize, first: usize },
    #[error("non-manifold edge ({lo}, {hi}) shared by {count} triangles")]
    NonManifoldEdge { lo: usize, hi: usize, count: usize },
    #[error("vertex {vertex} lies in the interior of edge ({lo}, {hi}); mesh is non-conforming")]
    HangingVertex { vertex: usize, lo: usize, hi: usize },
    #[error("mesh file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One edge of a triangle, as seen from that triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TriEdge {
    /// Index into `Mesh::edges`.
    pub edge: usize,
    /// +1 if the global edge normal points out of this triangle, -1 otherwise.
    pub sign: i8,
}

/// Immutable triangulation with edge topology and geometric caches.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Vec2>,
    /// Vertex indices, counter-clockwise.
    pub triangles: Vec<[usize; 3]>,
    /// Deduplicated `(lo, hi)` pairs with `lo < hi`, sorted lexicographically.
    pub edges: Vec<(usize, usize)>,
    /// Per triangle, its three edges in local order: entry `i` is the edge
    /// opposite local vertex `i`.
    pub tri_edges: Vec<[TriEdge; 3]>,
    /// Adjacent triangles per edge; interior edges have two, boundary one.
    pub edge_tris: Vec<Vec<usize>>,
    pub edge_boundary: Vec<bool>,
    pub vertex_boundary: Vec<bool>,
    /// Triangle areas |T|.
    pub areas: Vec<f64>,
    /// Triangle diameters h_T (longest edge).
    pub diameters: Vec<f64>,
    /// Edge lengths h_e.
    pub edge_lengths: Vec<f64>,
    /// Global unit normals, the lo->hi direction rotated 90 degrees clockwise.
    pub edge_normals: Vec<Vec2>,
}

/// Mesh-quality summary reported by [`Mesh::shape_metrics`].
#[derive(Clone, Copy, Debug)]
pub struct ShapeMetrics {
    /// h = max_T h_T.
    pub h: f64,
    /// Smallest interior angle over all triangles, in radians.
    pub min_angle: f64,
    /// max_T h_T / min_T (inradius of T); constant on a uniformly refined family.
    pub regularity: f64,
}

impl Mesh {
    /// Uniform n x n grid of squares, each split along the lower-left to
    /// upper-right diagonal.
    pub fn generate_structured(n: usize) -> Mesh {
        assert!(n >= 1, "structured mesh requires n >= 1");
        let np = n + 1;
        let mut vertices = Vec::with_capacity(np * np);
        for j in 0..np {
            for i in 0..np {
                vertices.push(Vec2::new(i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        let at = |i: usize, j: usize| j * np + i;
        let mut triangles = Vec::with_capacity(2 * n * n);
        for j in 0..n {
            for i in 0..n {
                let (a, b, c, d) = (at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        Mesh::build_topology(vertices, triangles).expect("structured mesh is always conforming")
    }

    /// Build the full edge topology from raw vertices and triangles.
    ///
    /// Clockwise triangles are reoriented; degenerate triangles, non-manifold
    /// edges and hanging (T-junction) vertices are rejected.
    pub fn build_topology(
        vertices: Vec<Vec2>,
        mut triangles: Vec<[usize; 3]>,
    ) -> Result<Mesh, MeshError> {
        let nverts = vertices.len();
        let mut seen = BTreeMap::new();
        for (t, tri) in triangles.iter_mut().enumerate() {
            for &v in tri.iter() {
                if v >= nverts {
                    return Err(MeshError::VertexOutOfRange {
                        tri: t,
                        vertex: v,
                        nverts,
                    });
                }
            }
            let mut key = *tri;
            key.sort_unstable();
            if key[0] == key[1] || key[1] == key[2] {
                return Err(MeshError::DegenerateTriangle { tri: t, area: 0.0 });
            }
            if let Some(&first) = seen.get(&key) {
                return Err(MeshError::DuplicateTriangle { tri: t, first });
            }
            seen.insert(key, t);

            let signed = signed_area(&vertices, *tri);
            let area_tol = 1e-14 * max_coord_span(&vertices).powi(2);
            if signed.abs() <= area_tol {
                return Err(MeshError::DegenerateTriangle {
                    tri: t,
                    area: signed,
                });
            }
            if signed < 0.0 {
                tri.swap(1, 2);
            }
        }

        // Canonical edge numbering: sorted (lo, hi) pairs.
        let mut edge_ids = BTreeMap::new();
        for tri in &triangles {
            for k in 0..3 {
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                edge_ids.entry(key).or_insert(0usize);
            }
        }
        let edges: Vec<(usize, usize)> = edge_ids.keys().copied().collect();
        for (i, (key, id)) in edge_ids.iter_mut().enumerate() {
            debug_assert_eq!(edges[i], *key);
            *id = i;
        }

        let mut edge_tris: Vec<Vec<usize>> = vec![Vec::new(); edges.len()];
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let mut local = [TriEdge { edge: 0, sign: 0 }; 3];
            for k in 0..3 {
                // Local edge k is opposite local vertex k.
                let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let e = edge_ids[&(a.min(b), a.max(b))];
                edge_tris[e].push(t);
                local[k] = TriEdge { edge: e, sign: 0 };
            }
            tri_edges.push(local);
        }
        for (e, tris) in edge_tris.iter().enumerate() {
            if tris.len() > 2 {
                let (lo, hi) = edges[e];
                return Err(MeshError::NonManifoldEdge {
                    lo,
                    hi,
                    count: tris.len(),
                });
            }
        }

        let edge_boundary: Vec<bool> = edge_tris.iter().map(|t| t.len() == 1).collect();
        let mut vertex_boundary = vec![false; nverts];
        for (e, &(lo, hi)) in edges.iter().enumerate() {
            if edge_boundary[e] {
                vertex_boundary[lo] = true;
                vertex_boundary[hi] = true;
            }
        }

        reject_hanging_vertices(&vertices, &triangles, &edges)?;

        let mut areas = Vec::with_capacity(triangles.len());
        let mut diameters = Vec::with_capacity(triangles.len());
        for tri in &triangles {
            areas.push(0.5 * signed_area(&vertices, *tri));
            let d = (0..3)
                .map(|k| (vertices[tri[(k + 1) % 3]] - vertices[tri[k]]).norm())
                .fold(0.0, f64::max);
            diameters.push(d);
        }
        let edge_lengths: Vec<f64> = edges
            .iter()
            .map(|&(lo, hi)| (vertices[hi] - vertices[lo]).norm())
            .collect();
        let edge_normals: Vec<Vec2> = edges
            .iter()
            .zip(&edge_lengths)
            .map(|(&(lo, hi), &len)| (vertices[hi] - vertices[lo]).rot_cw().scale(1.0 / len))
            .collect();

        // Orientation signs: +1 iff the global normal points out of the triangle.
        let mut mesh = Mesh {
            vertices,
            triangles,
            edges,
            tri_edges,
            edge_tris,
            edge_boundary,
            vertex_boundary,
            areas,
            diameters,
            edge_lengths,
            edge_normals,
        };
        for t in 0..mesh.triangles.len() {
            for k in 0..3 {
                let e = mesh.tri_edges[t][k].edge;
                let (lo, hi) = mesh.edges[e];
                let midpoint = (mesh.vertices[lo] + mesh.vertices[hi]).scale(0.5);
                let opposite = mesh.vertices[mesh.triangles[t][k]];
                let outward = mesh.edge_normals[e].dot(midpoint - opposite);
                debug_assert!(outward.abs() > 0.0);
                mesh.tri_edges[t][k].sign = if outward > 0.0 { 1 } else { -1 };
            }
        }
        Ok(mesh)
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_interior_edges(&self) -> usize {
        self.edge_boundary.iter().filter(|&&b| !b).count()
    }

    pub fn num_interior_vertices(&self) -> usize {
        self.vertex_boundary.iter().filter(|&&b| !b).count()
    }

    /// Corner coordinates of triangle `t`, counter-clockwise.
    pub fn tri_vertices(&self, t: usize) -> [Vec2; 3] {
        let [a, b, c] = self.triangles[t];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    /// Vertex opposite local edge `k` of triangle `t`.
    pub fn opposite_vertex(&self, t: usize, k: usize) -> Vec2 {
        self.vertices[self.triangles[t][k]]
    }

    pub fn shape_metrics(&self) -> ShapeMetrics {
        let h = self.diameters.iter().copied().fold(0.0, f64::max);
        let mut min_angle = f64::INFINITY;
        let mut min_inradius = f64::INFINITY;
        for (t, tri) in self.triangles.iter().enumerate() {
            let p = [
                self.vertices[tri[0]],
                self.vertices[tri[1]],
                self.vertices[tri[2]],
            ];
            let mut perimeter = 0.0;
            for k in 0..3 {
                let u = p[(k + 1) % 3] - p[k];
                let v = p[(k + 2) % 3] - p[k];
                let angle = (u.dot(v) / (u.norm() * v.norm())).clamp(-1.0, 1.0).acos();
                min_angle = min_angle.min(angle);
                perimeter += u.norm();
            }
            // inradius = area / semiperimeter
            min_inradius = min_inradius.min(self.areas[t] / (0.5 * perimeter));
        }
        ShapeMetrics {
            h,
            min_angle,
            regularity: h / min_inradius,
        }
    }

    /// Read a mesh from the plain-text node/element format:
    /// a header line `V E F`, then `V` lines `x y`, then `F` lines `i j k`
    /// with 0-based vertex indices. `#` starts a comment. The edge count in
    /// the header is ignored; topology is rebuilt.
    pub fn read_text(path: &Path) -> Result<Mesh, MeshError> {
        let content = std::fs::read_to_string(path)?;
        Mesh::parse_text(&content)
    }

    pub fn parse_text(content: &str) -> Result<Mesh, MeshError> {
        let mut lines = content.lines().filter_map(|line| {
            let line = line.trim();
            (!line.is_empty() && !line.starts_with('#')).then_some(line)
        });
        let header = lines
            .next()
            .ok_or_else(|| MeshError::Format("empty file".into()))?;
        let counts: Vec<usize> = header
            .split_whitespace()
            .map(|tok| {
                tok.parse()
                    .map_err(|_| MeshError::Format(format!("bad header token {tok:?}")))
            })
            .collect::<Result<_, _>>()?;
        if counts.len() != 3 {
            return Err(MeshError::Format(format!(
                "header must be `V E F`, got {header:?}"
            )));
        }
        let (nv, nf) = (counts[0], counts[2]);
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            let line = lines
                .next()
                .ok_or_else(|| MeshError::Format("missing vertex line".into()))?;
            let coords: Vec<f64> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse()
                        .map_err(|_| MeshError::Format(format!("bad coordinate {tok:?}")))
                })
                .collect::<Result<_, _>>()?;
            if coords.len() != 2 {
                return Err(MeshError::Format(format!("vertex line needs `x y`: {line:?}")));
            }
            vertices.push(Vec2::new(coords[0], coords[1]));
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let line = lines
                .next()
                .ok_or_else(|| MeshError::Format("missing triangle line".into()))?;
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse()
                        .map_err(|_| MeshError::Format(format!("bad vertex index {tok:?}")))
                })
                .collect::<Result<_, _>>()?;
            if idx.len() != 3 {
                return Err(MeshError::Format(format!("triangle line needs `i j k`: {line:?}")));
            }
            triangles.push([idx[0], idx[1], idx[2]]);
        }
        Mesh::build_topology(vertices, triangles)
    }

    /// Render the mesh in the plain-text format read by [`Mesh::read_text`].
    pub fn format_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{} {} {}",
            self.num_vertices(),
            self.num_edges(),
            self.num_triangles()
        );
        for v in &self.vertices {
            let _ = writeln!(out, "{:.17e} {:.17e}", v.x, v.y);
        }
        for tri in &self.triangles {
            let _ = writeln!(out, "{} {} {}", tri[0], tri[1], tri[2]);
        }
        out
    }

    /// Write the mesh in the same plain-text format read by [`Mesh::read_text`].
    pub fn write_text(&self, path: &Path) -> Result<(), MeshError> {
        std::fs::write(path, self.format_text())?;
        Ok(())
    }
}

fn signed_area(vertices: &[Vec2], tri: [usize; 3]) -> f64 {
    let [a, b, c] = tri;
    (vertices[b] - vertices[a]).cross(vertices[c] - vertices[a])
}

fn max_coord_span(vertices: &[Vec2]) -> f64 {
    let mut span = 0.0f64;
    for v in vertices {
        span = span.max(v.x.abs()).max(v.y.abs());
    }
    span.max(1.0)
}

/// A vertex lying strictly inside another triangle's edge makes the mesh
/// non-conforming (a T-junction): the offending edge is then missing from
/// the neighbor's edge set.
fn reject_hanging_vertices(
    vertices: &[Vec2],
    triangles: &[[usize; 3]],
    edges: &[(usize, usize)],
) -> Result<(), MeshError> {
    let mut used = vec![false; vertices.len()];
    for tri in triangles {
        for &v in tri {
            used[v] = true;
        }
    }
    for &(lo, hi) in edges {
        let a = vertices[lo];
        let b = vertices[hi];
        let ab = b - a;
        let len_sq = ab.norm_sq();
        let tol = 1e-10 * len_sq.sqrt();
        for (v, &active) in used.iter().enumerate() {
            if !active || v == lo || v == hi {
                continue;
            }
            let p = vertices[v];
            let t = (p - a).dot(ab) / len_sq;
            if t <= 0.0 || t >= 1.0 {
                continue;
            }
            let foot = a + ab.scale(t);
            if (p - foot).norm() < tol {
                return Err(MeshError::HangingVertex { vertex: v, lo, hi });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn n1_counts() {
        let mesh = Mesh::generate_structured(1);
        assert_eq!(mesh.num_vertices(), 4);
        assert_eq!(mesh.num_triangles(), 2);
        assert_eq!(mesh.num_edges(), 5);
        assert_eq!(mesh.num_interior_edges(), 1);
    }

    #[test]
    fn n2_counts() {
        // Counting oracle: E = (3F + boundary edges) / 2 = (24 + 8) / 2 = 16.
        let mesh = Mesh::generate_structured(2);
        assert_eq!(mesh.num_vertices(), 9);
        assert_eq!(mesh.num_triangles(), 8);
        assert_eq!(mesh.num_edges(), 16);
        assert_eq!(mesh.num_interior_edges(), 8);
        assert_eq!(mesh.num_interior_vertices(), 1);
    }

    #[test]
    fn euler_relation() {
        for n in [1, 2, 3, 4, 7] {
            let mesh = Mesh::generate_structured(n);
            let (v, e, f) = (
                mesh.num_vertices() as i64,
                mesh.num_edges() as i64,
                mesh.num_triangles() as i64,
            );
            assert_eq!(v - e + f, 1, "Euler relation failed for n={n}");
            if n == 4 {
                assert_eq!(f, 32);
            }
        }
    }

    #[test]
    fn interior_edges_have_opposite_signs() {
        let mesh = Mesh::generate_structured(3);
        for (e, tris) in mesh.edge_tris.iter().enumerate() {
            let signs: Vec<i8> = tris
                .iter()
                .map(|&t| {
                    mesh.tri_edges[t]
                        .iter()
                        .find(|te| te.edge == e)
                        .unwrap()
                        .sign
                })
                .collect();
            match signs.len() {
                1 => assert_eq!(signs[0].abs(), 1),
                2 => assert_eq!(signs[0] * signs[1], -1),
                n => panic!("edge {e} shared by {n} triangles"),
            }
        }
    }

    #[test]
    fn areas_sum_to_one() {
        for n in [1, 2, 5, 8] {
            let mesh = Mesh::generate_structured(n);
            let total: f64 = mesh.areas.iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "n={n}: total area {total}");
            assert!(mesh.areas.iter().all(|&a| a > 0.0));
        }
    }

    #[test]
    fn all_triangles_ccw() {
        let mesh = Mesh::generate_structured(4);
        for tri in &mesh.triangles {
            assert!(signed_area(&mesh.vertices, *tri) > 0.0);
        }
    }

    #[test]
    fn shape_metrics_structured() {
        let mesh = Mesh::generate_structured(2);
        let m = mesh.shape_metrics();
        assert_relative_eq!(m.h, std::f64::consts::SQRT_2 / 2.0, epsilon = 1e-15);
        assert_relative_eq!(m.min_angle, std::f64::consts::FRAC_PI_4, epsilon = 1e-12);

        // Regularity indicator is constant across the structured family.
        let m4 = Mesh::generate_structured(4).shape_metrics();
        let m8 = Mesh::generate_structured(8).shape_metrics();
        assert_relative_eq!(m.regularity, m4.regularity, epsilon = 1e-12);
        assert_relative_eq!(m.regularity, m8.regularity, epsilon = 1e-12);
    }

    #[test]
    fn unit_right_triangle_metrics() {
        let mesh = Mesh::build_topology(
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_relative_eq!(mesh.areas[0], 0.5, epsilon = 1e-15);
        assert_relative_eq!(mesh.diameters[0], std::f64::consts::SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn two_triangle_square_shares_diagonal() {
        let vertices = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        let mesh = Mesh::build_topology(vertices, vec![[0, 1, 2], [0, 2, 3]]).unwrap();
        let diag = mesh.edges.iter().position(|&e| e == (0, 2)).unwrap();
        assert!(!mesh.edge_boundary[diag]);
        let signs: Vec<i8> = (0..2)
            .map(|t| {
                mesh.tri_edges[t]
                    .iter()
                    .find(|te| te.edge == diag)
                    .unwrap()
                    .sign
            })
            .collect();
        assert_eq!(signs[0] * signs[1], -1);
    }

    #[test]
    fn cw_triangle_is_repaired() {
        let mesh = Mesh::build_topology(
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
            vec![[0, 2, 1]], // clockwise on purpose
        )
        .unwrap();
        assert!(mesh.areas[0] > 0.0);
        assert_relative_eq!(mesh.areas[0], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn t_junction_rejected() {
        // Vertex 3 sits at the midpoint of edge (1, 2) of the big triangle.
        let vertices = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(1.0, 0.5),
            Vec2::new(2.0, 0.5),
        ];
        let triangles = vec![[0, 1, 2], [1, 4, 3], [3, 4, 2]];
        let err = Mesh::build_topology(vertices, triangles).unwrap_err();
        assert!(matches!(err, MeshError::HangingVertex { vertex: 3, .. }), "{err}");
    }

    #[test]
    fn non_manifold_rejected() {
        let vertices = vec![
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(0.0, 1.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(-1.0, 1.0),
        ];
        // Three triangles all sharing edge (0, 1).
        let triangles = vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]];
        let err = Mesh::build_topology(vertices, triangles).unwrap_err();
        assert!(matches!(err, MeshError::NonManifoldEdge { count: 3, .. }), "{err}");
    }

    #[test]
    fn zero_area_rejected() {
        let vertices = vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        let err = Mesh::build_topology(vertices, vec![[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, MeshError::DegenerateTriangle { .. }), "{err}");
    }

    #[test]
    fn topology_rebuild_is_idempotent() {
        let mesh = Mesh::generate_structured(3);
        let rebuilt =
            Mesh::build_topology(mesh.vertices.clone(), mesh.triangles.clone()).unwrap();
        assert_eq!(mesh.edges, rebuilt.edges);
        for t in 0..mesh.num_triangles() {
            assert_eq!(mesh.tri_edges[t], rebuilt.tri_edges[t]);
        }
    }

    #[test]
    fn text_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mesh.txt");
        let mesh = Mesh::generate_structured(3);
        mesh.write_text(&path).unwrap();
        let back = Mesh::read_text(&path).unwrap();
        assert_eq!(mesh.triangles, back.triangles);
        assert_eq!(mesh.edges, back.edges);
        for (a, b) in mesh.vertices.iter().zip(&back.vertices) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# a comment\n\n3 0 1\n0 0\n1 0\n# interleaved\n0 1\n0 1 2\n";
        let mesh = Mesh::parse_text(text).unwrap();
        assert_eq!(mesh.num_triangles(), 1);
    }
}
