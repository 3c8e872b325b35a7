//! Run configuration read from a single JSON document.
//!
//! Every section is optional and falls back to the library defaults. Unknown
//! keys anywhere in the document are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use painleve_core::gl::{DEFAULT_CHI, DEFAULT_EPSILONS};
use painleve_core::grid::{Grid1D, Grid2D};
use painleve_core::ode::{HMProblem, DEFAULT_A, DEFAULT_B, DEFAULT_N};
use painleve_core::pde::{DEFAULT_N1, DEFAULT_N2, DEFAULT_X1, DEFAULT_X2MAX};
use painleve_core::special::GLParams;
use painleve_core::verify::{VerifySettings, PROFILE_WINDOW, PROFILE_X1_LEVEL};
use painleve_core::SolverConfig;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub hm: HmSection,
    pub connect: ConnectSection,
    pub gl: GlSection,
    pub rescale: RescaleSection,
    pub verify: VerifySection,
    /// Used when `--out` is not given.
    pub output_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HmSection {
    pub a: f64,
    pub b: f64,
    pub n: usize,
}

impl Default for HmSection {
    fn default() -> Self {
        Self {
            a: DEFAULT_A,
            b: DEFAULT_B,
            n: DEFAULT_N,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConnectSection {
    pub x1min: f64,
    pub x1max: f64,
    pub x2max: f64,
    pub n1: usize,
    pub n2: usize,
}

impl Default for ConnectSection {
    fn default() -> Self {
        Self {
            x1min: DEFAULT_X1.0,
            x1max: DEFAULT_X1.1,
            x2max: DEFAULT_X2MAX,
            n1: DEFAULT_N1,
            n2: DEFAULT_N2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GlSection {
    pub chi: f64,
    /// Continuation sequence, strictly decreasing.
    pub epsilons: Vec<f64>,
}

impl Default for GlSection {
    fn default() -> Self {
        Self {
            chi: DEFAULT_CHI,
            epsilons: DEFAULT_EPSILONS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RescaleSection {
    pub x1_level: f64,
    /// Centre of the sampled window in `x2` (0 samples across the axis).
    pub x2_offset: f64,
    pub t2_window: f64,
}

impl Default for RescaleSection {
    fn default() -> Self {
        Self {
            x1_level: PROFILE_X1_LEVEL,
            x2_offset: 0.0,
            t2_window: PROFILE_WINDOW,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    /// Solve for any field missing from the output directory instead of
    /// failing.
    pub compute_missing: bool,
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| invalid(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| invalid(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.solver.validate()?;

        let hm = &self.hm;
        if !(hm.a < 0.0 && hm.b > 0.0) {
            return Err(invalid(format!("hm: need a < 0 < b, got a = {}, b = {}", hm.a, hm.b)));
        }
        if hm.n < 3 {
            return Err(invalid("hm: n must be at least 3"));
        }

        let c = &self.connect;
        if !(c.x2max > 0.0) {
            return Err(invalid(format!("connect: x2max must be positive, got {}", c.x2max)));
        }
        if !(c.x1min < c.x1max) {
            return Err(invalid("connect: x1min must be below x1max"));
        }
        if c.n1 < 3 || c.n2 < 3 {
            return Err(invalid("connect: n1 and n2 must be at least 3"));
        }

        let g = &self.gl;
        if g.epsilons.is_empty() {
            return Err(invalid("gl: epsilons must not be empty"));
        }
        if g.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(invalid("gl: epsilons must be strictly decreasing"));
        }
        for &eps in &g.epsilons {
            GLParams::new(eps, g.chi).map_err(|e| invalid(format!("gl: {e}")))?;
        }

        let r = &self.rescale;
        if !(r.x1_level < 0.0) {
            return Err(invalid("rescale: x1_level must be negative"));
        }
        if !(r.t2_window > 0.0) {
            return Err(invalid("rescale: t2_window must be positive"));
        }
        Ok(())
    }

    pub fn hm_problem(&self) -> Result<HMProblem, CliError> {
        let grid = Grid1D::new(self.hm.a, self.hm.b, self.hm.n)?;
        Ok(HMProblem::new(grid, self.solver)?)
    }

    pub fn connect_grid(&self) -> Result<Grid2D, CliError> {
        let c = &self.connect;
        Ok(Grid2D::new(c.x1min, c.x1max, 0.0, c.x2max, c.n1, c.n2)?)
    }

    pub fn verify_settings(&self) -> Result<VerifySettings, CliError> {
        Ok(VerifySettings {
            config: self.solver,
            hm: self.hm_problem()?,
            pde_grid: self.connect_grid()?,
            chi: self.gl.chi,
            epsilons: self.gl.epsilons.clone(),
        })
    }
}
