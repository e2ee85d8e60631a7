use std::path::Path;

use anyhow::{bail, Context};
use serde::Deserialize;

use hyperfill::curves::MIN_SAMPLES;
use hyperfill::hyperbolic::DEFAULT_TAU_POINT;
use hyperfill::surfaces::{DEFAULT_PROBES, MIN_GRID};
use hyperfill::tube::{DEFAULT_PINCHING_SAMPLES, MIN_PINCHING_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Settings shared by every subcommand. Loaded from TOML; any missing key
/// takes its default, and command-line flags override both.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub out: Option<String>,
    pub tau_point: f64,
    pub curves: CurveConfig,
    pub surfaces: SurfaceConfig,
    pub tube: TubeConfig,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    pub fixture: String,
    pub dt: f64,
    pub length: f64,
    /// Lower-bound slack in units of `dt`.
    pub violation_factor: f64,
    pub identity_tol: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceConfig {
    pub fixture: String,
    pub h: f64,
    pub half_width: f64,
    pub gauss_tol: f64,
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeConfig {
    pub samples: usize,
    pub boundary_tol: f64,
    pub endpoint_tol: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            format: Format::Json,
            out: None,
            tau_point: DEFAULT_TAU_POINT,
            curves: CurveConfig::default(),
            surfaces: SurfaceConfig::default(),
            tube: TubeConfig::default(),
        }
    }
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            fixture: "geodesic".into(),
            dt: 1e-2,
            length: 6.0,
            violation_factor: 10.0,
            identity_tol: 1e-4,
            amplitude: 0.05,
        }
    }
}

impl Default for SurfaceConfig {
    fn default() -> Self {
        Self {
            fixture: "geodesic-plane".into(),
            h: 1e-2,
            half_width: 0.5,
            gauss_tol: 1e-3,
            probes: DEFAULT_PROBES,
        }
    }
}

impl Default for TubeConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_PINCHING_SAMPLES,
            boundary_tol: 1e-11,
            endpoint_tol: 1e-9,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let positive = [
            ("tau_point", self.tau_point),
            ("curves.dt", self.curves.dt),
            ("curves.length", self.curves.length),
            ("curves.violation_factor", self.curves.violation_factor),
            ("curves.identity_tol", self.curves.identity_tol),
            ("surfaces.h", self.surfaces.h),
            ("surfaces.half_width", self.surfaces.half_width),
            ("surfaces.gauss_tol", self.surfaces.gauss_tol),
            ("tube.boundary_tol", self.tube.boundary_tol),
            ("tube.endpoint_tol", self.tube.endpoint_tol),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                bail!("{name} must be positive and finite, got {v}");
            }
        }
        if !(self.curves.amplitude >= 0.0) {
            bail!("curves.amplitude must be non-negative, got {}", self.curves.amplitude);
        }
        if ((self.curves.length / self.curves.dt).round() as usize) + 1 < MIN_SAMPLES {
            bail!("curves.length / curves.dt gives fewer than {MIN_SAMPLES} samples");
        }
        if (2.0 * self.surfaces.half_width / self.surfaces.h).round() as usize + 1 < MIN_GRID {
            bail!("surfaces.half_width / surfaces.h gives a grid narrower than {MIN_GRID} nodes");
        }
        if self.tube.samples < MIN_PINCHING_SAMPLES {
            bail!(
                "tube.samples must be at least {MIN_PINCHING_SAMPLES}, got {}",
                self.tube.samples
            );
        }
        Ok(())
    }
}
