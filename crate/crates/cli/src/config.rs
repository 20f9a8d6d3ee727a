//! Run configuration: command-line flags layered over an optional TOML file,
//! validated before any command runs.

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum GenerateKind {
    Disk,
    Annulus,
    SphericalCap,
    Icosphere,
    CatenoidBoundary,
    CirclePair,
}

/// Keys accepted in a `--config` TOML file. Every key is optional; flags
/// given on the command line take precedence.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub command: Option<String>,
    pub ambient: Option<String>,
    pub alpha: Option<f64>,
    pub strict: Option<bool>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub mesh: Option<PathBuf>,
    pub boundary: Option<PathBuf>,
    pub eps: Option<Vec<f64>>,
    pub eta: Option<f64>,
    pub s_res: Option<usize>,
    pub steiner: Option<usize>,
    pub quadrature: Option<usize>,
    pub area_budget: Option<f64>,
    pub f: Option<String>,
    pub layers: Option<usize>,
    pub max_iters: Option<usize>,
    pub kind: Option<GenerateKind>,
    pub radius: Option<f64>,
    pub inner: Option<f64>,
    pub rings: Option<usize>,
    pub angle: Option<f64>,
    pub subdiv: Option<usize>,
    pub height: Option<f64>,
    pub sep: Option<f64>,
    pub points: Option<usize>,
    pub seed: Option<u64>,
    pub jitter: Option<f64>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }
}

/// Fully resolved configuration. Its JSON form is hashed into the manifest,
/// so it holds only settings that influence outputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub ambient: String,
    pub alpha: Option<f64>,
    pub strict: bool,
    pub out: PathBuf,
    pub mesh: Option<PathBuf>,
    pub boundary: Option<PathBuf>,
    pub eps: Vec<f64>,
    pub eta: f64,
    pub s_res: usize,
    pub steiner: usize,
    pub quadrature: usize,
    pub area_budget: Option<f64>,
    pub f: String,
    pub layers: usize,
    pub max_iters: usize,
    pub kind: Option<GenerateKind>,
    pub radius: f64,
    pub inner: f64,
    pub rings: usize,
    pub angle: f64,
    pub subdiv: usize,
    pub height: f64,
    pub sep: f64,
    pub points: usize,
    pub seed: u64,
    pub jitter: f64,
}

impl RunConfig {
    pub fn with_defaults(command: &str) -> Self {
        RunConfig {
            command: command.to_string(),
            ambient: "e3".into(),
            alpha: None,
            strict: false,
            out: PathBuf::from("out"),
            mesh: None,
            boundary: None,
            eps: vec![0.08, 0.04, 0.02],
            eta: 0.05,
            s_res: 64,
            steiner: 1,
            quadrature: 1,
            area_budget: None,
            f: "hat:center".into(),
            layers: 12,
            max_iters: 500,
            kind: None,
            radius: 1.0,
            inner: 0.5,
            rings: 6,
            angle: 1.0,
            subdiv: 3,
            height: 1.0,
            sep: 2.0,
            points: 64,
            seed: 0,
            jitter: 0.0,
        }
    }

    /// Fills every field the command line left unset from `file`.
    pub fn layer_file(&mut self, file: &FileConfig, set: &SetFlags) -> Result<()> {
        if let Some(c) = &file.command {
            if c != &self.command {
                bail!("config file is for command '{c}', not '{}'", self.command);
            }
        }
        macro_rules! fill {
            ($($field:ident),*) => {$(
                if !set.contains(stringify!($field)) {
                    if let Some(v) = &file.$field {
                        self.$field = v.clone().into();
                    }
                }
            )*};
        }
        fill!(ambient, alpha, strict, out, mesh, boundary, eps, eta, s_res, steiner, quadrature, area_budget, f);
        fill!(layers, max_iters, kind, radius, inner, rings, angle, subdiv, height, sep, points, seed, jitter);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        confdiam_core::ConformalAmbient::from_cli_name(&self.ambient)?;
        if let Some(a) = self.alpha {
            if !(a > 0.0 && a < 1.0) {
                bail!("alpha must lie in (0, 1), got {a}");
            }
        }
        let needs = |field: &Option<PathBuf>, name: &str| -> Result<()> {
            if field.is_none() {
                bail!("command '{}' needs --{name}", self.command);
            }
            Ok(())
        };
        match self.command.as_str() {
            "check" | "sobolev" => needs(&self.mesh, "mesh")?,
            "double" => {
                needs(&self.mesh, "mesh")?;
                if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0)) {
                    bail!("eps list must be non-empty and positive");
                }
                if self.eps.windows(2).any(|w| w[1] >= w[0]) {
                    bail!("eps list must be strictly decreasing");
                }
                if !(self.eta > 0.0 && self.eta < std::f64::consts::FRAC_PI_4) {
                    bail!("eta must lie in (0, π/4)");
                }
                if self.s_res < 8 {
                    bail!("s-res must be at least 8");
                }
            }
            "solve" | "screen" => needs(&self.boundary, "boundary")?,
            "generate" => {
                if self.kind.is_none() {
                    bail!("generate needs a kind");
                }
                let positive = [self.radius, self.height, self.sep, self.angle];
                if positive.iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                    bail!("radius, height, sep and angle must be positive");
                }
                if self.kind == Some(GenerateKind::Annulus) && !(self.inner > 0.0 && self.inner < self.radius) {
                    bail!("inner radius must lie in (0, radius)");
                }
                if self.rings == 0 || self.points < 3 {
                    bail!("rings must be positive and points at least 3");
                }
                if !(self.jitter >= 0.0 && self.jitter < 0.5) {
                    bail!("jitter must lie in [0, 0.5)");
                }
            }
            other => bail!("unknown command '{other}'"),
        }
        if self.quadrature == 0 || self.layers == 0 || self.max_iters == 0 {
            bail!("quadrature, layers and max-iters must be positive");
        }
        if let Some(b) = self.area_budget {
            if !(b > 0.0 && b.is_finite()) {
                bail!("area budget must be positive");
            }
        }
        Ok(())
    }
}

/// Names of the fields given explicitly on the command line.
#[derive(Debug, Default)]
pub struct SetFlags(Vec<&'static str>);

impl SetFlags {
    pub fn mark(&mut self, name: &'static str) {
        self.0.push(name);
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains(&name)
    }
}
