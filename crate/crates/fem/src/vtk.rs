//! Legacy VTK unstructured-grid export.

use std::io::{self, Write};

use crate::mesh::Mesh;

const VTK_HEXAHEDRON: u8 = 12;

/// Writes the mesh with an integer `stratum` point field (`-1` off the
/// contact set) and, if given, a nodal `displacement` vector field.
pub fn write_vtk<W: Write>(
    out: &mut W,
    mesh: &Mesh,
    strata: &[i32],
    displacement: Option<&[[f64; 3]]>,
) -> io::Result<()> {
    assert_eq!(strata.len(), mesh.contact.len());
    let nn = mesh.node_count();
    writeln!(out, "# vtk DataFile Version 3.0")?;
    writeln!(
        out,
        "contact block lev={} geometry={}",
        mesh.spec.lev, mesh.spec.geometry
    )?;
    writeln!(out, "ASCII")?;
    writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(out, "POINTS {nn} double")?;
    for x in &mesh.nodes {
        writeln!(out, "{} {} {}", x[0], x[1], x[2])?;
    }
    let nh = mesh.hexes.len();
    writeln!(out, "CELLS {nh} {}", 9 * nh)?;
    for h in &mesh.hexes {
        writeln!(
            out,
            "8 {} {} {} {} {} {} {} {}",
            h[0], h[1], h[2], h[3], h[4], h[5], h[6], h[7]
        )?;
    }
    writeln!(out, "CELL_TYPES {nh}")?;
    for _ in 0..nh {
        writeln!(out, "{VTK_HEXAHEDRON}")?;
    }
    writeln!(out, "POINT_DATA {nn}")?;
    writeln!(out, "SCALARS stratum int 1")?;
    writeln!(out, "LOOKUP_TABLE default")?;
    let mut field = vec![-1; nn];
    for (&i, &s) in mesh.contact.iter().zip(strata) {
        field[i] = s;
    }
    for s in field {
        writeln!(out, "{s}")?;
    }
    if let Some(u) = displacement {
        assert_eq!(u.len(), nn);
        writeln!(out, "VECTORS displacement double")?;
        for v in u {
            writeln!(out, "{} {} {}", v[0], v[1], v[2])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, Geometry, MeshSpec};

    #[test]
    fn header_and_sections() {
        let mesh = build_mesh(MeshSpec::new(1, Geometry::D1).unwrap());
        let mut buf = Vec::new();
        write_vtk(&mut buf, &mesh, &vec![0; mesh.contact.len()], None).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(text.contains(&format!("POINTS {} double", mesh.node_count())));
        assert!(text.contains(&format!("CELL_TYPES {}", mesh.hexes.len())));
        assert_eq!(
            text.lines().filter(|l| *l == "-1").count(),
            mesh.node_count() - mesh.contact.len()
        );
    }
}
