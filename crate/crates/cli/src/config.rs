//! Flat `section.key = value` configuration with defaults and overrides.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

/// Every recognised key with its default value. An empty default means
/// "derived" or "unset".
pub const DEFAULTS: &[(&str, &str)] = &[
    ("run.stages", "propagate"),
    ("run.mode", "lab_full"),
    ("run.initial", "atomic_ground"),
    ("run.initial_file", ""),
    ("run.coherent_sign", "1"),
    ("run.t0", "0"),
    ("run.t_end", ""),
    ("run.dt", "0.05"),
    ("run.cadence", "20"),
    ("run.snapshots", ""),
    ("run.wigner_times", ""),
    ("run.restart_at", ""),
    ("run.seed", "0"),
    ("restart.mode", "kh_averaged"),
    ("restart.t_end", ""),
    ("restart.snapshots", ""),
    ("restart.wigner_times", ""),
    ("grid.x_min", "-1500"),
    ("grid.x_max", "1500"),
    ("grid.n_points", "16384"),
    ("pulse.intensity_wcm2", "5.7e13"),
    ("pulse.eps0", ""),
    ("pulse.omega", "0.0628"),
    ("pulse.ramp_cycles", "2"),
    ("pulse.flat_end_cycles", "10"),
    ("pulse.total_cycles", "12"),
    ("pulse.dt_field", ""),
    ("field.dump_stride", "40"),
    ("potential.depth", "-24.856"),
    ("potential.core_sq", "16"),
    ("potential.width", "6.27"),
    ("kh.alpha0", ""),
    ("kh.quadrature_n", "2048"),
    ("eigen.fd_half_width", "300"),
    ("eigen.fd_dx", "0.05"),
    ("eigen.dt_imag", "0.5"),
    ("eigen.tol", "1e-10"),
    ("eigen.max_steps", "1000000"),
    ("absorber.enabled", "true"),
    ("absorber.inner_half_width", "600"),
    ("absorber.width", "900"),
    ("absorber.exponent", "0.125"),
    ("absorber.reference_dt", "0.05"),
    ("observables.window", "60"),
    ("output.half_width", "100"),
    ("wigner.x_min", "-60"),
    ("wigner.x_max", "60"),
    ("wigner.n_x", "241"),
    ("wigner.p_min", "-0.6"),
    ("wigner.p_max", "0.6"),
    ("wigner.n_p", "201"),
    ("wigner.xi_max", "240"),
    ("wigner.tail_cut", "0.25"),
    ("portrait.levels", "0.0125"),
    ("portrait.n_x", "241"),
];

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

/// Resolved key/value table. Iteration order is sorted by key.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            values: DEFAULTS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl Config {
    /// Parses `text` on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.merge_text(text, "<config>")?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::default();
        cfg.merge_text(&text, &path.display().to_string())?;
        Ok(cfg)
    }

    pub fn merge_text(&mut self, text: &str, origin: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return err(format!("{origin}:{}: expected `key = value`, got `{line}`", n + 1));
            };
            self.set(k.trim(), v.trim())
                .map_err(|e| ConfigError(format!("{origin}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    /// Applies one `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> Result<()> {
        let Some((k, v)) = spec.split_once('=') else {
            return err(format!("override `{spec}` is not of the form key=value"));
        };
        self.set(k.trim(), v.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => err(format!("unknown configuration key `{key}`")),
        }
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values
            .get(key)
            .unwrap_or_else(|| panic!("configuration key `{key}` missing from the defaults table"))
    }

    pub fn is_set(&self, key: &str) -> bool {
        !self.raw(key).is_empty()
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v = self.raw(key);
        v.parse::<f64>()
            .ok()
            .filter(|x| x.is_finite())
            .ok_or_else(|| ConfigError(format!("`{key}` must be a finite number, got `{v}`")))
    }

    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        if self.is_set(key) {
            self.f64(key).map(Some)
        } else {
            Ok(None)
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        let v = self.raw(key);
        v.parse::<usize>()
            .map_err(|_| ConfigError(format!("`{key}` must be a non-negative integer, got `{v}`")))
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        match self.raw(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            v => err(format!("`{key}` must be true or false, got `{v}`")),
        }
    }

    pub fn list(&self, key: &str) -> Vec<String> {
        self.raw(key)
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect()
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.list(key)
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ConfigError(format!("`{key}` entry `{s}` is not a number")))
            })
            .collect()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut c = Config::parse("# pulse\npulse.omega = 0.1   # faster\n\nrun.snapshots = 1, 2.5 ,3\n").unwrap();
        assert_eq!(c.f64("pulse.omega").unwrap(), 0.1);
        assert_eq!(c.f64_list("run.snapshots").unwrap(), vec![1.0, 2.5, 3.0]);
        c.apply_override("grid.n_points=1024").unwrap();
        assert_eq!(c.usize("grid.n_points").unwrap(), 1024);
        assert!(!c.is_set("kh.alpha0"));
    }

    #[test]
    fn rejects_unknown_and_malformed() {
        assert!(Config::parse("grid.npoints = 4").is_err());
        assert!(Config::parse("grid.n_points 4").is_err());
        let c = Config::parse("run.dt = fast").unwrap();
        assert!(c.f64("run.dt").is_err());
        let mut c = Config::default();
        assert!(c.apply_override("nonsense").is_err());
    }
}
