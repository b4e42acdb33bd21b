use std::fmt;
use std::str::FromStr;

use scd_core::coulomb::{product_map, CoulombProduct};
use scd_core::linalg::CsrMatrix;
use scd_core::newton::AffineGe;

use crate::element::{face_load, hex8_stiffness, Material};
use crate::mesh::Mesh;
use crate::FemError;

/// Surface traction densities on the top (`x3 = 1`) and right (`x1 = 2`) faces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Loads {
    pub top: [f64; 3],
    pub right: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LoadCase {
    L1,
    L2,
    /// Zero tractions.
    Unloaded,
}

impl LoadCase {
    /// The two benchmark cases.
    pub const ALL: [LoadCase; 2] = [LoadCase::L1, LoadCase::L2];

    pub fn loads(self) -> Loads {
        match self {
            LoadCase::L1 => Loads {
                top: [0.0, 0.0, -1.0],
                right: [-0.2, 0.0, 0.0],
            },
            LoadCase::L2 => Loads {
                top: [0.0, 0.0, -1.0],
                right: [-0.17, -0.1, 0.0],
            },
            LoadCase::Unloaded => Loads {
                top: [0.0; 3],
                right: [0.0; 3],
            },
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LoadCase::L1 => "L1",
            LoadCase::L2 => "L2",
            LoadCase::Unloaded => "none",
        }
    }
}

impl fmt::Display for LoadCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LoadCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Ok(LoadCase::L1),
            "L2" => Ok(LoadCase::L2),
            "NONE" => Ok(LoadCase::Unloaded),
            _ => Err(format!("unknown load case `{s}` (expected L1, L2 or none)")),
        }
    }
}

fn element_triplets(
    mesh: &Mesh,
    material: &Material,
) -> Result<Vec<(usize, usize, f64)>, FemError> {
    let d = material.elasticity();
    let mut triplets = Vec::with_capacity(mesh.hexes.len() * 576);
    for (e, hex) in mesh.hexes.iter().enumerate() {
        let coords = hex.map(|i| mesh.nodes[i]);
        let ke = hex8_stiffness(&coords, &d)
            .map_err(|det| FemError::DegenerateElement { element: e, det })?;
        for a in 0..8 {
            for b in 0..8 {
                for i in 0..3 {
                    for j in 0..3 {
                        triplets.push((3 * hex[a] + i, 3 * hex[b] + j, ke[(3 * a + i, 3 * b + j)]));
                    }
                }
            }
        }
    }
    Ok(triplets)
}

/// Stiffness over all `3 * node_count` nodal dofs, before Dirichlet elimination.
pub fn assemble_full_stiffness(mesh: &Mesh, material: &Material) -> Result<CsrMatrix, FemError> {
    let dim = 3 * mesh.node_count();
    Ok(CsrMatrix::from_triplets(
        dim,
        dim,
        element_triplets(mesh, material)?,
    ))
}

/// Consistent surface loads over all nodal dofs.
pub fn assemble_full_load(mesh: &Mesh, loads: &Loads) -> Vec<f64> {
    let mut l = vec![0.0; 3 * mesh.node_count()];
    for (faces, t) in [
        (&mesh.top_faces, loads.top),
        (&mesh.right_faces, loads.right),
    ] {
        for face in faces {
            let f = face_load(&face.map(|i| mesh.nodes[i]), t);
            for (a, &node) in face.iter().enumerate() {
                for i in 0..3 {
                    l[3 * node + i] += f[a][i];
                }
            }
        }
    }
    l
}

/// Discrete contact problem `0 in A u - l + Q(u)` in shifted variables `u = u~ + d`.
///
/// Dofs are grouped in nodal blocks `(v1, v2, v3)`; the first `contact_count`
/// blocks belong to contact nodes, so normal and tangential components are
/// read off by index.
#[derive(Debug, Clone)]
pub struct ContactModel {
    pub stiffness: CsrMatrix,
    /// Shifted load `l = l~ + A d`, so that `A u - l = A u~ - l~`.
    pub load: Vec<f64>,
    /// Load before the shift.
    pub raw_load: Vec<f64>,
    /// `d` with the gap in the normal slot of every contact block.
    pub gap_shift: Vec<f64>,
    pub friction: f64,
    pub contact_count: usize,
    /// Mesh node of each free nodal block.
    pub free_nodes: Vec<usize>,
}

pub fn assemble(
    mesh: &Mesh,
    material: &Material,
    loads: &Loads,
    friction: f64,
) -> Result<ContactModel, FemError> {
    if !(friction >= 0.0 && friction.is_finite()) {
        return Err(FemError::InvalidFriction(friction));
    }
    let nn = mesh.node_count();
    let mut block = vec![usize::MAX; nn];
    for &i in &mesh.dirichlet {
        block[i] = usize::MAX - 1;
    }
    let mut free_nodes = Vec::with_capacity(nn - mesh.dirichlet.len());
    for (i, b) in block.iter_mut().enumerate() {
        if *b == usize::MAX {
            *b = free_nodes.len();
            free_nodes.push(i);
        }
    }
    let p = mesh.contact.len();
    debug_assert_eq!(&free_nodes[..p], &mesh.contact[..]);

    let reduced = |dof: usize| match block[dof / 3] {
        b if b < nn => Some(3 * b + dof % 3),
        _ => None,
    };
    let n = 3 * free_nodes.len();
    let triplets = element_triplets(mesh, material)?
        .into_iter()
        .filter_map(|(r, c, v)| Some((reduced(r)?, reduced(c)?, v)))
        .collect();
    let stiffness = CsrMatrix::from_triplets(n, n, triplets);

    let full = assemble_full_load(mesh, loads);
    let raw_load: Vec<f64> = free_nodes
        .iter()
        .flat_map(|&i| [full[3 * i], full[3 * i + 1], full[3 * i + 2]])
        .collect();
    let mut gap_shift = vec![0.0; n];
    for (k, &i) in mesh.contact.iter().enumerate() {
        let x = mesh.nodes[i];
        gap_shift[3 * k + 2] = mesh.spec.geometry.value(x[0], x[1]);
    }
    let ad = stiffness.mul_vec(&gap_shift);
    let load = raw_load.iter().zip(&ad).map(|(l, a)| l + a).collect();

    Ok(ContactModel {
        stiffness,
        load,
        raw_load,
        gap_shift,
        friction,
        contact_count: p,
        free_nodes,
    })
}

impl ContactModel {
    pub fn dim(&self) -> usize {
        self.stiffness.nrows()
    }

    pub fn map(&self) -> CoulombProduct {
        product_map(
            self.contact_count,
            self.dim() - 3 * self.contact_count,
            self.friction,
        )
    }

    /// The generalized equation with `f(u) = A u - l`.
    pub fn problem(&self) -> AffineGe<CoulombProduct> {
        AffineGe::new(self.stiffness.clone(), self.load.clone(), self.map())
    }

    /// Physical displacement `u~ = u - d`.
    pub fn physical(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.gap_shift).map(|(a, b)| a - b).collect()
    }

    /// Inverse of [`ContactModel::physical`].
    pub fn shifted(&self, u_phys: &[f64]) -> Vec<f64> {
        u_phys
            .iter()
            .zip(&self.gap_shift)
            .map(|(a, b)| a + b)
            .collect()
    }

    /// Spreads a reduced vector onto all mesh nodes, zero on Dirichlet nodes.
    pub fn nodal_field(&self, node_count: usize, v: &[f64]) -> Vec<[f64; 3]> {
        let mut out = vec![[0.0; 3]; node_count];
        for (k, &i) in self.free_nodes.iter().enumerate() {
            out[i] = [v[3 * k], v[3 * k + 1], v[3 * k + 2]];
        }
        out
    }

    /// Reads a nodal field at the free nodes.
    pub fn restrict(&self, field: &[[f64; 3]]) -> Vec<f64> {
        self.free_nodes.iter().flat_map(|&i| field[i]).collect()
    }

    /// Normal component of contact node `i` (the `N` extraction).
    pub fn normal(&self, v: &[f64], i: usize) -> f64 {
        assert!(i < self.contact_count);
        v[3 * i + 2]
    }

    /// Tangential components of contact node `i` (the `T^i` extraction).
    pub fn tangential(&self, v: &[f64], i: usize) -> [f64; 2] {
        assert!(i < self.contact_count);
        [v[3 * i], v[3 * i + 1]]
    }
}
