//! Transfer of a displacement field between consecutive refinement levels.

use std::path::Path;

use scd_fem::{build_mesh, Geometry, Mesh, MeshSpec};
use serde::{Deserialize, Serialize};

use crate::config::ConfigError;

/// Nodal solution written after a run and read back for warm starts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredSolution {
    pub lev: u32,
    pub geometry: String,
    pub load: String,
    pub friction: f64,
    /// Physical displacement per mesh node, zero on the clamped face; this is what gets interpolated.
    pub displacement: Vec<[f64; 3]>,
    /// The solver variable `u = u~ + d` per mesh node.
    pub shifted: Vec<[f64; 3]>,
}

impl StoredSolution {
    pub fn read(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Json {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    pub fn spec(&self) -> Result<MeshSpec, ConfigError> {
        let g: Geometry = self.geometry.parse().map_err(ConfigError::Invalid)?;
        MeshSpec::new(self.lev, g).map_err(|e| ConfigError::Invalid(e.to_string()))
    }
}

fn cell(t: f64, n: usize) -> (usize, f64) {
    let s = (t * n as f64).clamp(0.0, n as f64);
    let i = (s.floor() as usize).min(n - 1);
    (i, s - i as f64)
}

/// Trilinear interpolation in the logical coordinates `(x1, x2, (x3-d)/(1-d))`.
pub fn interpolate_nodal(coarse: &Mesh, field: &[[f64; 3]], fine: &Mesh) -> Vec<[f64; 3]> {
    assert_eq!(field.len(), coarse.node_count());
    let s = coarse.sizes;
    fine.nodes
        .iter()
        .enumerate()
        .map(|(id, x)| {
            let (_, _, k3) = fine.logical(id);
            let (i1, t1) = cell(x[0] / 2.0, s.nx1);
            let (i2, t2) = cell(x[1], s.nx2);
            let (i3, t3) = cell(k3 as f64 / fine.sizes.nx3 as f64, s.nx3);
            let mut v = [0.0; 3];
            for (c, w3) in [(0, 1.0 - t3), (1, t3)] {
                for (b, w2) in [(0, 1.0 - t2), (1, t2)] {
                    for (a, w1) in [(0, 1.0 - t1), (1, t1)] {
                        let w = w1 * w2 * w3;
                        if w == 0.0 {
                            continue;
                        }
                        let u = field[coarse.node_id(i1 + a, i2 + b, i3 + c)];
                        for k in 0..3 {
                            v[k] += w * u[k];
                        }
                    }
                }
            }
            v
        })
        .collect()
}

/// Interpolates a coarse nodal field onto the next level and drops the
/// clamped nodes, giving a vector in the fine dof order.
pub fn interpolate_warm_start(
    coarse_field: &[[f64; 3]],
    coarse_spec: MeshSpec,
    fine_spec: MeshSpec,
) -> Result<Vec<f64>, ConfigError> {
    let coarse = build_mesh(coarse_spec);
    if fine_spec.lev != coarse_spec.lev + 1
        || fine_spec.geometry != coarse_spec.geometry
        || coarse_field.len() != coarse.node_count()
    {
        return Err(ConfigError::LevelMismatch {
            coarse_lev: coarse_spec.lev,
            coarse_geometry: coarse_spec.geometry.to_string(),
            fine_lev: fine_spec.lev,
            fine_geometry: fine_spec.geometry.to_string(),
        });
    }
    let fine = build_mesh(fine_spec);
    let nodal = interpolate_nodal(&coarse, coarse_field, &fine);
    let m1 = fine.sizes.nx1 + 1;
    Ok(nodal
        .into_iter()
        .enumerate()
        .filter(|(id, _)| id % m1 != 0)
        .flat_map(|(_, v)| v)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_consecutive_levels() {
        let c = MeshSpec::new(2, Geometry::D1).unwrap();
        let field = vec![[0.0; 3]; build_mesh(c).node_count()];
        for f in [
            MeshSpec::new(4, Geometry::D1).unwrap(),
            MeshSpec::new(3, Geometry::D2).unwrap(),
        ] {
            assert!(matches!(
                interpolate_warm_start(&field, c, f),
                Err(ConfigError::LevelMismatch { .. })
            ));
        }
        assert!(
            interpolate_warm_start(&field[1..], c, MeshSpec::new(3, Geometry::D1).unwrap())
                .is_err()
        );
    }

    #[test]
    fn cell_lookup() {
        assert_eq!(cell(0.0, 4), (0, 0.0));
        assert_eq!(cell(1.0, 4), (3, 1.0));
        assert_eq!(cell(0.5, 4), (2, 0.0));
    }
}
