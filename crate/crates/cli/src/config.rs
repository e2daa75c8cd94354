//! Run configuration: built-in defaults, overridden by a `key = value`
//! file, overridden by command-line flags.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use stokes_audit::geometry::defaults;
use stokes_audit::mapexpr::JacobianStencil;

/// Environment variable naming a default config file.
pub const CONFIG_ENV: &str = "STOKES_AUDIT_CONFIG";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub disk2_resolution: usize,
    pub disk3_resolution: usize,
    pub sphere_resolution: usize,
    pub curve_samples: usize,
    pub cylinder_resolution: usize,
    pub stencil_order: u8,
    pub stencil_step: f64,
    pub seed: u64,
    pub stokes_tolerance: f64,
    pub rounding_tolerance: f64,
    pub fixed_tolerance: f64,
    pub antipodal_tolerance: f64,
    pub bisection_tolerance: f64,
    pub equivariance_tolerance: f64,
    pub pole_tolerance: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            disk2_resolution: defaults::DISK2_RESOLUTION,
            disk3_resolution: defaults::DISK3_RESOLUTION,
            sphere_resolution: defaults::SPHERE_RESOLUTION,
            curve_samples: defaults::CURVE_SAMPLES,
            cylinder_resolution: defaults::CYLINDER_RESOLUTION,
            stencil_order: 2,
            stencil_step: 1e-5,
            seed: 0,
            stokes_tolerance: 1e-4,
            rounding_tolerance: 0.05,
            fixed_tolerance: 1e-8,
            antipodal_tolerance: 1e-6,
            bisection_tolerance: 1e-10,
            equivariance_tolerance: 1e-8,
            pole_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            f.write_str(&self.message)
        } else {
            write!(f, "config line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.parse().map_err(|_| format!("invalid value '{value}' for {key}"))
}

impl RunConfig {
    /// Sets one key; unknown keys and malformed values are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "disk2_resolution" => self.disk2_resolution = parse_value(key, value)?,
            "disk3_resolution" => self.disk3_resolution = parse_value(key, value)?,
            "sphere_resolution" => self.sphere_resolution = parse_value(key, value)?,
            "curve_samples" => self.curve_samples = parse_value(key, value)?,
            "cylinder_resolution" => self.cylinder_resolution = parse_value(key, value)?,
            "stencil_order" => self.stencil_order = parse_value(key, value)?,
            "stencil_step" => self.stencil_step = parse_value(key, value)?,
            "seed" => self.seed = parse_value(key, value)?,
            "stokes_tolerance" => self.stokes_tolerance = parse_value(key, value)?,
            "rounding_tolerance" => self.rounding_tolerance = parse_value(key, value)?,
            "fixed_tolerance" => self.fixed_tolerance = parse_value(key, value)?,
            "antipodal_tolerance" => self.antipodal_tolerance = parse_value(key, value)?,
            "bisection_tolerance" => self.bisection_tolerance = parse_value(key, value)?,
            "equivariance_tolerance" => self.equivariance_tolerance = parse_value(key, value)?,
            "pole_tolerance" => self.pole_tolerance = parse_value(key, value)?,
            _ => return Err(format!("unknown key '{key}'")),
        }
        Ok(())
    }

    /// Applies `key = value` lines. Blank lines and `#` comments are skipped.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError { line: i + 1, message };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected 'key = value', got '{line}'")))?;
            self.set(key.trim(), value.trim()).map_err(err)?;
        }
        self.validate()
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<(), ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
            line: 0,
            message: format!("cannot read config {}: {e}", path.display()),
        })?;
        self.apply_text(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |message: String| ConfigError { line: 0, message };
        for (key, r) in [
            ("disk2_resolution", self.disk2_resolution),
            ("disk3_resolution", self.disk3_resolution),
            ("sphere_resolution", self.sphere_resolution),
            ("curve_samples", self.curve_samples),
            ("cylinder_resolution", self.cylinder_resolution),
        ] {
            if r < 4 {
                return Err(err(format!("{key} must be at least 4, got {r}")));
            }
        }
        self.stencil().map_err(|e| err(e.to_string()))?;
        Ok(())
    }

    pub fn stencil(&self) -> stokes_audit::Result<JacobianStencil> {
        JacobianStencil::new(self.stencil_step, self.stencil_order)
    }

    pub fn disk_resolution(&self, n: usize) -> usize {
        if n >= 3 {
            self.disk3_resolution
        } else {
            self.disk2_resolution
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_key_value_lines() {
        let mut c = RunConfig::default();
        c.apply_text("# audit\nseed = 42\n\ndisk2_resolution = 64  # coarse\nstencil_order=4\n")
            .unwrap();
        assert_eq!(c.seed, 42);
        assert_eq!(c.disk2_resolution, 64);
        assert_eq!(c.stencil_order, 4);
    }

    #[test]
    fn rejects_bad_lines() {
        let mut c = RunConfig::default();
        assert_eq!(c.apply_text("seed 4").unwrap_err().line, 1);
        assert_eq!(c.apply_text("\nmystery = 1").unwrap_err().line, 2);
        assert!(c.apply_text("seed = -1").is_err());
        assert!(c.apply_text("curve_samples = 2").is_err());
        assert!(c.apply_text("stencil_order = 3").is_err());
    }
}
