//! Legacy ASCII VTK export of a discrete solution: vertex-averaged and
//! cell-averaged velocity vectors plus cell pressures on the triangulation.

use crate::assembly::DofMap;
use crate::field::DiscreteVelocity;
use crate::geometry::Vec2;
use crate::mesh::Mesh;
use crate::quadrature::quadrature;
use crate::solver::Solution;
use std::io::{self, Write};

/// Write an unstructured-grid file. The velocity is multi-valued at
/// vertices for the flux-enriched schemes, so the point data averages the
/// adjacent element values; cell data carries element means and pressures.
pub fn write_vtk<W: Write>(
    mut w: W,
    mesh: &Mesh,
    dofmap: &DofMap,
    solution: &Solution,
) -> io::Result<()> {
    let field = DiscreteVelocity::new(
        mesh,
        dofmap,
        &solution.u_l,
        &solution.u_r,
        solution.scheme,
    );

    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    let mut vertex_sum = vec![Vec2::ZERO; nv];
    let mut vertex_count = vec![0usize; nv];
    let rule = quadrature(2).expect("fixed exactness is in range");
    let mut cell_mean = Vec::with_capacity(nt);
    for t in 0..nt {
        let elem = field.element(t);
        for &v in &mesh.triangles[t] {
            vertex_sum[v] = vertex_sum[v] + elem.value(mesh.vertices[v]);
            vertex_count[v] += 1;
        }
        let mut mean = Vec2::ZERO;
        let area = mesh.areas[t];
        mean.x = rule.integrate(mesh.tri_vertices(t), area, |p| elem.value(p).x) / area;
        mean.y = rule.integrate(mesh.tri_vertices(t), area, |p| elem.value(p).y) / area;
        cell_mean.push(mean);
    }

    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "stokes2d solution ({})", solution.scheme.label())?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {nv} double")?;
    for p in &mesh.vertices {
        writeln!(w, "{:.9e} {:.9e} 0.0", p.x, p.y)?;
    }
    writeln!(w, "CELLS {nt} {}", 4 * nt)?;
    for tri in &mesh.triangles {
        writeln!(w, "3 {} {} {}", tri[0], tri[1], tri[2])?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    writeln!(w, "POINT_DATA {nv}")?;
    writeln!(w, "VECTORS velocity double")?;
    for (sum, count) in vertex_sum.iter().zip(&vertex_count) {
        let avg = sum.scale(1.0 / (*count).max(1) as f64);
        writeln!(w, "{:.9e} {:.9e} 0.0", avg.x, avg.y)?;
    }
    writeln!(w, "CELL_DATA {nt}")?;
    writeln!(w, "SCALARS pressure double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for p in &solution.p {
        writeln!(w, "{p:.9e}")?;
    }
    writeln!(w, "VECTORS velocity_mean double")?;
    for m in &cell_mean {
        writeln!(w, "{:.9e} {:.9e} 0.0", m.x, m.y)?;
    }
    Ok(())
}
