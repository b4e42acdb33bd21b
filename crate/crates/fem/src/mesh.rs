use std::fmt;
use std::str::FromStr;

use crate::FemError;

/// Gap profile `d(x1, x2)` of the bottom surface over `[0,2] x [0,1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Geometry {
    D1,
    D2,
    D3,
}

impl Geometry {
    pub const ALL: [Geometry; 3] = [Geometry::D1, Geometry::D2, Geometry::D3];

    pub fn value(self, x1: f64, x2: f64) -> f64 {
        match self {
            Geometry::D1 => 0.01,
            Geometry::D2 => {
                let r = (0.5 * (x1 - 1.0).powi(2) + 2.0 * (x2 - 0.5).powi(2)).sqrt();
                (0.01 - 0.015 * r).max(0.0025)
            }
            Geometry::D3 => {
                use std::f64::consts::TAU;
                0.01 + 0.005 * ((TAU * x1).sin() + (TAU * x2).cos())
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Geometry::D1 => "d1",
            Geometry::D2 => "d2",
            Geometry::D3 => "d3",
        }
    }
}

impl fmt::Display for Geometry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Geometry {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "d1" => Ok(Geometry::D1),
            "d2" => Ok(Geometry::D2),
            "d3" => Ok(Geometry::D3),
            other => Err(format!(
                "unknown geometry `{other}` (expected d1, d2 or d3)"
            )),
        }
    }
}

/// Grid resolution and problem sizes of one refinement level.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshSizes {
    pub nx1: usize,
    pub nx2: usize,
    pub nx3: usize,
    /// Number of contact nodes.
    pub p: usize,
    /// Number of free degrees of freedom.
    pub n: usize,
}

/// `ceil(c * 2^(lev/2))`, exact for even levels.
fn scaled_count(c: usize, lev: u32) -> usize {
    if lev % 2 == 0 {
        c << (lev / 2)
    } else {
        (c as f64 * 2f64.powf(lev as f64 / 2.0)).ceil() as usize
    }
}

pub fn mesh_sizes(lev: u32) -> MeshSizes {
    let nx1 = scaled_count(4, lev);
    let nx2 = scaled_count(2, lev);
    let nx3 = nx2;
    MeshSizes {
        nx1,
        nx2,
        nx3,
        p: nx1 * (nx2 + 1),
        n: 3 * nx1 * (nx2 + 1) * (nx3 + 1),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeshSpec {
    pub lev: u32,
    pub geometry: Geometry,
}

impl MeshSpec {
    pub fn new(lev: u32, geometry: Geometry) -> Result<Self, FemError> {
        if lev == 0 || lev > 12 {
            return Err(FemError::InvalidLevel(lev));
        }
        Ok(Self { lev, geometry })
    }

    pub fn sizes(&self) -> MeshSizes {
        mesh_sizes(self.lev)
    }
}

/// Structured hexahedral mesh of the block `d(x1,x2) < x3 < 1`.
///
/// Node `(i1, i2, i3)` has id `i1 + (nx1+1) * (i2 + (nx2+1) * i3)`, so the
/// bottom layer comes first. Hexahedra use the VTK corner order.
#[derive(Debug, Clone)]
pub struct Mesh {
    pub spec: MeshSpec,
    pub sizes: MeshSizes,
    pub nodes: Vec<[f64; 3]>,
    pub hexes: Vec<[usize; 8]>,
    /// Quadrilaterals on `x3 = 1`.
    pub top_faces: Vec<[usize; 4]>,
    /// Quadrilaterals on `x1 = 2`.
    pub right_faces: Vec<[usize; 4]>,
    /// Nodes on `x1 = 0`.
    pub dirichlet: Vec<usize>,
    /// Bottom nodes off the Dirichlet edge, in id order.
    pub contact: Vec<usize>,
}

impl Mesh {
    pub fn node_id(&self, i1: usize, i2: usize, i3: usize) -> usize {
        let s = self.sizes;
        i1 + (s.nx1 + 1) * (i2 + (s.nx2 + 1) * i3)
    }

    pub fn logical(&self, id: usize) -> (usize, usize, usize) {
        let s = self.sizes;
        let (m1, m2) = (s.nx1 + 1, s.nx2 + 1);
        (id % m1, (id / m1) % m2, id / (m1 * m2))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Height fraction `(x3 - d) / (1 - d)` of a point in its column.
    pub fn vertical_fraction(&self, x: [f64; 3]) -> f64 {
        let d = self.spec.geometry.value(x[0], x[1]);
        (x[2] - d) / (1.0 - d)
    }
}

pub fn build_mesh(spec: MeshSpec) -> Mesh {
    let sizes = spec.sizes();
    let MeshSizes { nx1, nx2, nx3, .. } = sizes;
    let (m1, m2) = (nx1 + 1, nx2 + 1);
    let id = |i1: usize, i2: usize, i3: usize| i1 + m1 * (i2 + m2 * i3);

    let mut nodes = Vec::with_capacity(m1 * m2 * (nx3 + 1));
    for i3 in 0..=nx3 {
        let s = i3 as f64 / nx3 as f64;
        for i2 in 0..=nx2 {
            let x2 = i2 as f64 / nx2 as f64;
            for i1 in 0..=nx1 {
                let x1 = 2.0 * i1 as f64 / nx1 as f64;
                let d = spec.geometry.value(x1, x2);
                let x3 = if i3 == nx3 { 1.0 } else { d + s * (1.0 - d) };
                nodes.push([x1, x2, x3]);
            }
        }
    }

    let mut hexes = Vec::with_capacity(nx1 * nx2 * nx3);
    for i3 in 0..nx3 {
        for i2 in 0..nx2 {
            for i1 in 0..nx1 {
                hexes.push([
                    id(i1, i2, i3),
                    id(i1 + 1, i2, i3),
                    id(i1 + 1, i2 + 1, i3),
                    id(i1, i2 + 1, i3),
                    id(i1, i2, i3 + 1),
                    id(i1 + 1, i2, i3 + 1),
                    id(i1 + 1, i2 + 1, i3 + 1),
                    id(i1, i2 + 1, i3 + 1),
                ]);
            }
        }
    }

    let mut top_faces = Vec::with_capacity(nx1 * nx2);
    for i2 in 0..nx2 {
        for i1 in 0..nx1 {
            top_faces.push([
                id(i1, i2, nx3),
                id(i1 + 1, i2, nx3),
                id(i1 + 1, i2 + 1, nx3),
                id(i1, i2 + 1, nx3),
            ]);
        }
    }
    let mut right_faces = Vec::with_capacity(nx2 * nx3);
    for i3 in 0..nx3 {
        for i2 in 0..nx2 {
            right_faces.push([
                id(nx1, i2, i3),
                id(nx1, i2 + 1, i3),
                id(nx1, i2 + 1, i3 + 1),
                id(nx1, i2, i3 + 1),
            ]);
        }
    }

    let mut dirichlet = Vec::with_capacity(m2 * (nx3 + 1));
    for i3 in 0..=nx3 {
        for i2 in 0..=nx2 {
            dirichlet.push(id(0, i2, i3));
        }
    }
    dirichlet.sort_unstable();
    let contact = (0..m1 * m2).filter(|i| i % m1 != 0).collect();

    Mesh {
        spec,
        sizes,
        nodes,
        hexes,
        top_faces,
        right_faces,
        dirichlet,
        contact,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes_by_level() {
        let s = mesh_sizes(3);
        assert_eq!((s.nx1, s.nx2, s.nx3, s.p, s.n), (12, 6, 6, 84, 1764));
        assert_eq!((mesh_sizes(4).p, mesh_sizes(4).n), (144, 3888));
        assert_eq!((mesh_sizes(5).p, mesh_sizes(5).n), (299, 11661));
    }

    #[test]
    fn geometry_values() {
        assert_eq!(Geometry::D1.value(1.3, 0.2), 0.01);
        assert_eq!(Geometry::D2.value(1.0, 0.5), 0.01);
        assert_eq!(Geometry::D2.value(0.0, 0.0), 0.0025);
        assert!((Geometry::D3.value(0.0, 0.0) - 0.015).abs() < 1e-15);
        assert_eq!("D3".parse::<Geometry>().unwrap(), Geometry::D3);
        assert!("d4".parse::<Geometry>().is_err());
    }

    #[test]
    fn level3_counts() {
        let m = build_mesh(MeshSpec::new(3, Geometry::D2).unwrap());
        assert_eq!(m.node_count(), 13 * 7 * 7);
        assert_eq!(m.dirichlet.len(), 49);
        assert_eq!(m.contact.len(), 84);
        assert_eq!(m.hexes.len(), 12 * 6 * 6);
        assert_eq!(
            m.contact,
            (0..91).filter(|i| i % 13 != 0).collect::<Vec<_>>()
        );
        for id in [0, 17, 636] {
            let (a, b, c) = m.logical(id);
            assert_eq!(m.node_id(a, b, c), id);
        }
    }

    #[test]
    fn bottom_follows_gap() {
        let m = build_mesh(MeshSpec::new(3, Geometry::D1).unwrap());
        for &i in &m.contact {
            assert_eq!(m.nodes[i][2], 0.01);
        }
        let m = build_mesh(MeshSpec::new(3, Geometry::D3).unwrap());
        for i in 0..91 {
            let x = m.nodes[i];
            assert_eq!(x[2], Geometry::D3.value(x[0], x[1]));
            assert!(m.vertical_fraction(x).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_level_zero() {
        assert!(MeshSpec::new(0, Geometry::D1).is_err());
    }
}
