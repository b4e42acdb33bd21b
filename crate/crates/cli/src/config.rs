use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Parser;
use scd_core::linalg::GmresOptions;
use scd_core::newton::{GammaChoice, LinearSolver, SolverConfig, Variant};
use scd_fem::{Geometry, LoadCase, Material};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_FRICTION: f64 = 0.23;
pub const DEFAULT_YOUNG: f64 = 70.0;
pub const DEFAULT_POISSON: f64 = 0.334;
pub const GMRES_RESTART: usize = 200;
pub const GMRES_MAX_INNER: usize = 2000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed JSON in {path}: {message}")]
    Json { path: PathBuf, message: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("warm start from lev={coarse_lev} ({coarse_geometry}) does not fit lev={fine_lev} ({fine_geometry})")]
    LevelMismatch {
        coarse_lev: u32,
        coarse_geometry: String,
        fine_lev: u32,
        fine_geometry: String,
    },
}

/// Newton system flavor as spelled on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum VariantName {
    #[default]
    #[value(name = "dual_a")]
    DualA,
    #[value(name = "primal_b")]
    PrimalB,
}

impl From<VariantName> for Variant {
    fn from(v: VariantName) -> Self {
        match v {
            VariantName::DualA => Variant::DualA,
            VariantName::PrimalB => Variant::PrimalB,
        }
    }
}

impl fmt::Display for VariantName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariantName::DualA => "dual_a",
            VariantName::PrimalB => "primal_b",
        })
    }
}

/// Fully resolved experiment settings.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lev: u32,
    pub geometry: Geometry,
    pub load: LoadCase,
    pub friction: f64,
    pub young: f64,
    pub poisson: f64,
    pub gmres_tol: f64,
    pub newton_tol: f64,
    pub max_iters: usize,
    pub variant: VariantName,
    pub warm_start: Option<PathBuf>,
    pub out_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lev: 3,
            geometry: Geometry::D1,
            load: LoadCase::L1,
            friction: DEFAULT_FRICTION,
            young: DEFAULT_YOUNG,
            poisson: DEFAULT_POISSON,
            gmres_tol: 0.1,
            newton_tol: 1e-12,
            max_iters: 100,
            variant: VariantName::DualA,
            warm_start: None,
            out_dir: PathBuf::from("scd-out"),
        }
    }
}

impl ExperimentConfig {
    pub fn new(lev: u32, geometry: Geometry, load: LoadCase) -> Self {
        Self {
            lev,
            geometry,
            load,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.to_string()));
        if !(1..=10).contains(&self.lev) {
            return bad("lev must lie in 1..=10");
        }
        if let Err(e) = Material::new(self.young, self.poisson) {
            return Err(ConfigError::Invalid(e.to_string()));
        }
        if !(self.friction >= 0.0 && self.friction.is_finite()) {
            return bad("friction must be finite and non-negative");
        }
        if !(self.gmres_tol > 0.0 && self.gmres_tol < 1.0) {
            return bad("gmres-tol must lie in (0, 1)");
        }
        if !(self.newton_tol > 0.0 && self.newton_tol < 1.0) {
            return bad("newton-tol must lie in (0, 1)");
        }
        if self.max_iters == 0 {
            return bad("max-iters must be at least 1");
        }
        Ok(())
    }

    pub fn material(&self) -> Material {
        Material::new(self.young, self.poisson).expect("validated material")
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            gamma: GammaChoice::Auto,
            newton_rel_tol: self.newton_tol,
            max_iters: self.max_iters,
            variant: self.variant.into(),
            linear_solver: LinearSolver::Gmres(GmresOptions {
                tol: self.gmres_tol,
                restart: GMRES_RESTART,
                max_inner: GMRES_MAX_INNER,
            }),
            line_search: true,
            keep_iterates: false,
        }
    }

    pub fn label(&self) -> String {
        format!("lev{}-{}-{}", self.lev, self.geometry, self.load)
    }

    /// Overrides `self` with every field present in `over`.
    fn apply(&mut self, over: &Overrides) -> Result<(), ConfigError> {
        fn parse<T: FromStr<Err = String>>(s: &Option<String>) -> Result<Option<T>, ConfigError> {
            s.as_deref()
                .map(str::parse)
                .transpose()
                .map_err(ConfigError::Invalid)
        }
        if let Some(v) = over.lev {
            self.lev = v;
        }
        if let Some(v) = parse(&over.geometry)? {
            self.geometry = v;
        }
        if let Some(v) = parse(&over.load)? {
            self.load = v;
        }
        macro_rules! take {
            ($($dst:ident <- $src:ident),*) => {$(
                if let Some(v) = over.$src.clone() {
                    self.$dst = v;
                }
            )*};
        }
        take!(friction <- friction, young <- young, poisson <- nu, gmres_tol <- gmres_tol,
              newton_tol <- newton_tol, max_iters <- max_iters, variant <- variant, out_dir <- out_dir);
        if over.warm_start.is_some() {
            self.warm_start = over.warm_start.clone();
        }
        Ok(())
    }

    /// Defaults, then the JSON file named by `--config`, then explicit flags.
    pub fn resolve(args: &CliArgs) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(path) = &args.config {
            cfg.apply(&Overrides::from_file(path)?)?;
        }
        cfg.apply(&args.overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn echo(&self) -> serde_json::Value {
        serde_json::json!({
            "lev": self.lev,
            "geometry": self.geometry.name(),
            "load": self.load.name(),
            "friction": self.friction,
            "E": self.young,
            "nu": self.poisson,
            "gmres_tol": self.gmres_tol,
            "newton_tol": self.newton_tol,
            "max_iters": self.max_iters,
            "variant": self.variant.to_string(),
            "warm_start": self.warm_start.as_ref().map(|p| p.display().to_string()),
        })
    }
}

/// Settings that may come from the JSON file or from flags; all optional.
#[derive(Debug, Clone, Default, PartialEq, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    /// Refinement level.
    #[arg(long)]
    pub lev: Option<u32>,
    /// Bottom profile: d1, d2 or d3.
    #[arg(long)]
    pub geometry: Option<String>,
    /// Load case: L1, L2 or none.
    #[arg(long)]
    pub load: Option<String>,
    /// Coulomb friction coefficient.
    #[arg(long)]
    pub friction: Option<f64>,
    /// Young's modulus in GPa.
    #[arg(long = "E")]
    #[serde(rename = "E")]
    pub young: Option<f64>,
    /// Poisson's ratio.
    #[arg(long)]
    pub nu: Option<f64>,
    /// Relative residual target of the inner GMRES solves.
    #[arg(long)]
    pub gmres_tol: Option<f64>,
    /// Relative reduction of the Newton residual.
    #[arg(long)]
    pub newton_tol: Option<f64>,
    /// Maximal number of Newton steps.
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantName>,
    /// `solution.json` of the previous level to start from.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    /// Directory for the output files.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Json {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }
}

/// Frictional contact benchmark driver.
#[derive(Debug, Clone, Parser)]
#[command(name = "scd-contact", version, about, allow_negative_numbers = true)]
pub struct CliArgs {
    /// JSON file with default settings; explicit flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
}
