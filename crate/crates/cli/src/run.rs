use std::fmt::Write as _;
use std::io;
use std::path::Path;
use std::time::Instant;

use scd_core::coulomb::{classify, CellPoint, Stratum, StratumCensus};
use scd_core::newton::{solve, Solution, SolveError, SolverTrace};
use scd_fem::vtk::write_vtk;
use scd_fem::{assemble, build_mesh, ContactModel, Mesh, MeshSpec};
use serde::Serialize;

use crate::config::{ConfigError, ExperimentConfig};
use crate::warm::{interpolate_warm_start, StoredSolution};

pub const CONVERGENCE_HEADER: &str = "iter,residual,alpha,gmres_iters,nL,nM1,nM2,nM3p,nM3m,nM4";
pub const CONTACT_HEADER: &str = "node_id,x1,x2,x3,state,ux,uy,uz,gx,gy,theta";

/// Starting point of the Newton iteration.
#[derive(Debug, Clone, PartialEq)]
pub enum Start {
    Zero,
    /// Physical nodal displacement on the previous level.
    Coarse {
        spec: MeshSpec,
        field: Vec<[f64; 3]>,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct Timings {
    pub assemble_s: f64,
    pub solve_s: f64,
}

#[derive(Debug)]
pub struct ExperimentOutput {
    pub config: ExperimentConfig,
    pub mesh: Mesh,
    pub model: ContactModel,
    pub result: Result<Solution, SolveError>,
    pub warm_started: bool,
    pub timings: Timings,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput, ConfigError> {
    let start = match &cfg.warm_start {
        None => Start::Zero,
        Some(path) => {
            let stored = StoredSolution::read(path)?;
            Start::Coarse {
                spec: stored.spec()?,
                field: stored.displacement,
            }
        }
    };
    run_from(cfg, start)
}

pub fn run_from(cfg: &ExperimentConfig, start: Start) -> Result<ExperimentOutput, ConfigError> {
    cfg.validate()?;
    let spec =
        MeshSpec::new(cfg.lev, cfg.geometry).map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let t0 = Instant::now();
    let mesh = build_mesh(spec);
    let model = assemble(&mesh, &cfg.material(), &cfg.load.loads(), cfg.friction)
        .map_err(|e| ConfigError::Invalid(e.to_string()))?;
    let assemble_s = t0.elapsed().as_secs_f64();

    let (x0, warm_started) = match start {
        Start::Zero => (vec![0.0; model.dim()], false),
        Start::Coarse {
            spec: coarse,
            field,
        } => (
            model.shifted(&interpolate_warm_start(&field, coarse, spec)?),
            true,
        ),
    };
    let t1 = Instant::now();
    let result = solve(&model.problem(), &x0, &cfg.solver());
    let solve_s = t1.elapsed().as_secs_f64();

    Ok(ExperimentOutput {
        config: cfg.clone(),
        mesh,
        model,
        result,
        warm_started,
        timings: Timings {
            assemble_s,
            solve_s,
        },
    })
}

/// Contact state of one node at the final graph point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeState {
    pub node: usize,
    pub stratum: Option<Stratum>,
    pub point: CellPoint,
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    config: serde_json::Value,
    status: &'a str,
    error: Option<String>,
    n: usize,
    p: usize,
    warm_start: bool,
    iterations: usize,
    gmres_iterations: usize,
    gamma: f64,
    initial_residual: f64,
    final_residual: f64,
    reduction: f64,
    census: Option<serde_json::Value>,
    timing: Timings,
}

fn census_json(c: &StratumCensus) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for s in Stratum::ALL {
        m.insert(s.name().to_string(), c.get(s).into());
    }
    m.insert("violations".into(), c.violations.into());
    m.into()
}

fn fmt_opt<T: std::fmt::Display>(v: Option<T>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

impl ExperimentOutput {
    pub fn trace(&self) -> &SolverTrace {
        match &self.result {
            Ok(s) => &s.trace,
            Err(e) => &e.trace,
        }
    }

    pub fn converged(&self) -> bool {
        self.result.is_ok()
    }

    pub fn iterations(&self) -> usize {
        self.trace().iterations()
    }

    pub fn gmres_iterations(&self) -> usize {
        self.trace().total_inner_iters()
    }

    /// Contact states at the last resolvent output; empty after a failure.
    pub fn contact_states(&self) -> Vec<NodeState> {
        let Ok(sol) = &self.result else {
            return Vec::new();
        };
        (0..self.model.contact_count)
            .map(|i| {
                let r = 3 * i..3 * i + 3;
                let point = CellPoint::from_slices(&sol.d[r.clone()], &sol.z[r]);
                NodeState {
                    node: self.model.free_nodes[i],
                    stratum: classify(&point, self.model.friction).ok(),
                    point,
                }
            })
            .collect()
    }

    /// Physical nodal displacement of the final iterate.
    pub fn nodal_displacement(&self) -> Option<Vec<[f64; 3]>> {
        let sol = self.result.as_ref().ok()?;
        Some(
            self.model
                .nodal_field(self.mesh.node_count(), &self.model.physical(&sol.d)),
        )
    }

    /// Nodal values of the solver variable `u` at the final iterate.
    pub fn nodal_solution(&self) -> Option<Vec<[f64; 3]>> {
        let sol = self.result.as_ref().ok()?;
        Some(self.model.nodal_field(self.mesh.node_count(), &sol.d))
    }

    pub fn convergence_csv(&self) -> String {
        let mut s = String::from(CONVERGENCE_HEADER);
        s.push('\n');
        for r in &self.trace().records {
            let c = r.census.unwrap_or_default();
            let _ = write!(
                s,
                "{},{:e},{},{}",
                r.iter,
                r.residual,
                fmt_opt(r.alpha),
                fmt_opt(r.inner_iters)
            );
            for st in Stratum::ALL {
                let _ = write!(s, ",{}", c.get(st));
            }
            s.push('\n');
        }
        s
    }

    pub fn contact_csv(&self) -> String {
        let mut s = String::from(CONTACT_HEADER);
        s.push('\n');
        let Some(u) = self.nodal_displacement() else {
            return s;
        };
        for st in self.contact_states() {
            let x = self.mesh.nodes[st.node];
            let v = u[st.node];
            let state = st.stratum.map_or("invalid", Stratum::name);
            let p = st.point;
            let _ = writeln!(
                s,
                "{},{},{},{},{},{:e},{:e},{:e},{:e},{:e},{:e}",
                st.node, x[0], x[1], x[2], state, v[0], v[1], v[2], p.g[0], p.g[1], p.theta
            );
        }
        s
    }

    pub fn summary_json(&self) -> String {
        let tr = self.trace();
        let summary = Summary {
            config: self.config.echo(),
            status: if self.converged() {
                "converged"
            } else {
                "failed"
            },
            error: self.result.as_ref().err().map(|e| e.to_string()),
            n: self.model.dim(),
            p: self.model.contact_count,
            warm_start: self.warm_started,
            iterations: tr.iterations(),
            gmres_iterations: tr.total_inner_iters(),
            gamma: tr.gamma,
            initial_residual: tr.initial_residual(),
            final_residual: tr.final_residual(),
            reduction: tr.reduction(),
            census: tr
                .records
                .last()
                .and_then(|r| r.census)
                .map(|c| census_json(&c)),
            timing: self.timings,
        };
        serde_json::to_string_pretty(&summary).expect("summary serializes")
    }

    pub fn stored_solution(&self) -> Option<StoredSolution> {
        Some(StoredSolution {
            lev: self.config.lev,
            geometry: self.config.geometry.to_string(),
            load: self.config.load.to_string(),
            friction: self.config.friction,
            displacement: self.nodal_displacement()?,
            shifted: self.nodal_solution()?,
        })
    }

    /// Integer stratum per contact node for the VTK file; `-2` marks a failed classification.
    pub fn stratum_codes(&self) -> Vec<i32> {
        let states = self.contact_states();
        if states.is_empty() {
            return vec![-2; self.model.contact_count];
        }
        states
            .iter()
            .map(|s| {
                s.stratum.map_or(-2, |st| {
                    Stratum::ALL.iter().position(|&a| a == st).unwrap() as i32
                })
            })
            .collect()
    }

    /// Writes `convergence.csv`, `contact.csv`, `contact.vtk`, `summary.json`
    /// and, after a successful solve, `solution.json`.
    pub fn write(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("convergence.csv"), self.convergence_csv())?;
        std::fs::write(dir.join("contact.csv"), self.contact_csv())?;
        std::fs::write(dir.join("summary.json"), self.summary_json())?;
        let mut vtk = io::BufWriter::new(std::fs::File::create(dir.join("contact.vtk"))?);
        write_vtk(
            &mut vtk,
            &self.mesh,
            &self.stratum_codes(),
            self.nodal_displacement().as_deref(),
        )?;
        if let Some(stored) = self.stored_solution() {
            std::fs::write(
                dir.join("solution.json"),
                serde_json::to_string(&stored).expect("serializes"),
            )?;
        }
        Ok(())
    }
}
