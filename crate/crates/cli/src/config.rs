//! Flat `key = value` run configuration.
//!
//! Files use TOML syntax restricted to top-level scalars and arrays of
//! scalars. Unknown keys and nested tables are rejected with the offending
//! line. Command-line flags override file values; defaults fill the rest.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use dismet::analysis::{Channel, HeatmapSpec, OperatingPoint, ProbeKind};
use dismet::analytic::{linspace, DEFAULT_PLATEAU_DELTA};
use dismet::fock::Probe;
use dismet::{LandscapeGrid, ModelParams};

use crate::error::{config, CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // landscape / simulate grid
    pub hbar_omega0: Option<f64>,
    pub photons: Option<u32>,
    pub beta_min: Option<f64>,
    pub beta_max: Option<f64>,
    pub n_beta: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub n_x: Option<usize>,
    pub plateau_delta: Option<f64>,
    // sampling
    pub seed: Option<u64>,
    pub mu: Option<u64>,
    pub bootstrap: Option<usize>,
    // probes
    pub probes: Option<Vec<String>>,
    pub noon_n: Option<u32>,
    pub alpha_re: Option<f64>,
    pub alpha_im: Option<f64>,
    pub squeeze_r: Option<f64>,
    pub cutoff: Option<usize>,
    pub eigen_floor: Option<f64>,
    // decoherence heatmap
    pub eta_min: Option<f64>,
    pub eta_max: Option<f64>,
    pub n_eta: Option<usize>,
    pub gamma_min: Option<f64>,
    pub gamma_max: Option<f64>,
    pub n_gamma: Option<usize>,
    pub at_beta: Option<f64>,
    pub at_x: Option<f64>,
    // susceptibility
    pub channels: Option<Vec<String>>,
    pub sizes: Option<Vec<f64>>,
    pub crit_eps: Option<Vec<f64>>,
    pub n_max: Option<u32>,
    // bias
    pub kappa: Option<f64>,
    pub betas: Option<Vec<f64>>,
    // output
    pub out: Option<PathBuf>,
    pub format: Option<String>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($field:ident),* $(,)?) => {
        $( if $src.$field.is_some() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let src = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&src).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn parse(src: &str) -> CliResult<Self> {
        let table: toml::Table = src.parse().map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
        for (key, value) in &table {
            let nested = match value {
                toml::Value::Table(_) => true,
                toml::Value::Array(items) => items.iter().any(|v| matches!(v, toml::Value::Table(_) | toml::Value::Array(_))),
                _ => false,
            };
            if nested {
                return Err(CliError::Config(format!(
                    "line {}: `{key}` is nested; only flat scalars and arrays of scalars are allowed",
                    line_of(src, key)
                )));
            }
        }
        toml::from_str(src).map_err(|e: toml::de::Error| CliError::Config(e.to_string()))
    }

    /// Values set in `other` win.
    pub fn merge(&mut self, other: &RunConfig) {
        overlay!(self, other;
            hbar_omega0, photons, beta_min, beta_max, n_beta, x_min, x_max, n_x, plateau_delta,
            seed, mu, bootstrap, probes, noon_n, alpha_re, alpha_im, squeeze_r, cutoff, eigen_floor,
            eta_min, eta_max, n_eta, gamma_min, gamma_max, n_gamma, at_beta, at_x,
            channels, sizes, crit_eps, n_max, kappa, betas, out, format,
        );
    }

    pub fn hbar_omega0(&self) -> CliResult<f64> {
        let hw = self.hbar_omega0.unwrap_or(1.0);
        positive("hbar_omega0", hw)?;
        Ok(hw)
    }

    pub fn grid(&self) -> CliResult<LandscapeGrid> {
        let d = LandscapeGrid::default();
        LandscapeGrid::new(
            (self.beta_min.unwrap_or(d.beta_range.0), self.beta_max.unwrap_or(d.beta_range.1)),
            (self.x_min.unwrap_or(d.x_range.0), self.x_max.unwrap_or(d.x_range.1)),
            self.n_beta.unwrap_or(d.n_beta),
            self.n_x.unwrap_or(d.n_x),
        )
        .map_err(config)
    }

    pub fn template(&self) -> CliResult<ModelParams> {
        let hw = self.hbar_omega0()?;
        ModelParams::new(0.0, 0.0, self.photons.unwrap_or(1))
            .and_then(|p| p.with_energy(hw))
            .map_err(config)
    }

    pub fn plateau_delta(&self) -> CliResult<f64> {
        let d = self.plateau_delta.unwrap_or(DEFAULT_PLATEAU_DELTA);
        if !(d > 0.0 && d < 1.0) {
            return Err(CliError::Config(format!("plateau_delta = {d} is outside (0, 1)")));
        }
        Ok(d)
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.seed
            .ok_or_else(|| CliError::Config("`seed` is required for sampling (config key or --seed)".into()))
    }

    pub fn mu(&self) -> CliResult<u64> {
        match self.mu.unwrap_or(10_000) {
            0 => Err(CliError::Config("mu must be at least 1".into())),
            mu => Ok(mu),
        }
    }

    /// Bootstrap resamples per cell; 0 disables the bootstrap.
    pub fn bootstrap(&self) -> CliResult<usize> {
        let b = self.bootstrap.unwrap_or(200);
        if b != 0 && b < dismet::estimate::MIN_RESAMPLES {
            return Err(CliError::Config(format!(
                "bootstrap = {b}: use 0 or at least {}",
                dismet::estimate::MIN_RESAMPLES
            )));
        }
        Ok(b)
    }

    pub fn eigen_floor(&self) -> CliResult<f64> {
        let f = self.eigen_floor.unwrap_or(1e-10);
        positive("eigen_floor", f)?;
        Ok(f)
    }

    pub fn probe_kinds(&self) -> CliResult<Vec<ProbeKind>> {
        let names = self.probes.clone().unwrap_or_else(|| vec!["noon".into()]);
        if names.is_empty() {
            return Err(CliError::Config("`probes` is empty".into()));
        }
        names
            .iter()
            .map(|n| match n.as_str() {
                "noon" => Ok(ProbeKind::Noon),
                "cat" => Ok(ProbeKind::Cat),
                "squeezed" => Ok(ProbeKind::Squeezed),
                other => Err(CliError::Config(format!("unknown probe `{other}` (noon, cat, squeezed)"))),
            })
            .collect()
    }

    /// The configured instance of each probe kind.
    pub fn probe(&self, kind: ProbeKind) -> CliResult<Probe> {
        let p = match kind {
            ProbeKind::Noon => {
                let n = self.noon_n.unwrap_or(4);
                if n == 0 {
                    return Err(CliError::Config("noon_n must be at least 1".into()));
                }
                Probe::Noon { n }
            }
            ProbeKind::Cat => {
                let (re, im) = (self.alpha_re.unwrap_or(2.0), self.alpha_im.unwrap_or(0.0));
                if !(re.is_finite() && im.is_finite()) {
                    return Err(CliError::Config("alpha must be finite".into()));
                }
                Probe::Cat { alpha_re: re, alpha_im: im }
            }
            ProbeKind::Squeezed => {
                let r = self.squeeze_r.unwrap_or(1.1);
                if !(r >= 0.0 && r.is_finite()) {
                    return Err(CliError::Config(format!("squeeze_r = {r} must be finite and non-negative")));
                }
                Probe::Squeezed { r }
            }
        };
        Ok(p)
    }

    pub fn heatmap_spec(&self, probe: Probe) -> CliResult<HeatmapSpec> {
        let mut s = HeatmapSpec::new(probe);
        s.eta_range = (self.eta_min.unwrap_or(s.eta_range.0), self.eta_max.unwrap_or(s.eta_range.1));
        s.gamma_range = (
            self.gamma_min.unwrap_or(s.gamma_range.0),
            self.gamma_max.unwrap_or(s.gamma_range.1),
        );
        s.n_eta = self.n_eta.unwrap_or(s.n_eta);
        s.n_gamma = self.n_gamma.unwrap_or(s.n_gamma);
        s.cutoff = self.cutoff;
        s.eigen_floor_rel = self.eigen_floor()?;
        let d = OperatingPoint::default();
        s.at = OperatingPoint {
            beta: self.at_beta.unwrap_or(d.beta),
            x: self.at_x.unwrap_or(d.x),
            hbar_omega0: self.hbar_omega0()?,
        };
        s.validate().map_err(config)?;
        if !(s.at.beta.is_finite() && s.at.x.is_finite()) {
            return Err(CliError::Config("operating point must be finite".into()));
        }
        Ok(s)
    }

    pub fn channels(&self) -> CliResult<Vec<Channel>> {
        let names = self.channels.clone().unwrap_or_else(|| vec!["ad".into(), "pd".into()]);
        if names.is_empty() {
            return Err(CliError::Config("`channels` is empty".into()));
        }
        names
            .iter()
            .map(|n| match n.as_str() {
                "ad" => Ok(Channel::AmplitudeDamping),
                "pd" => Ok(Channel::DifferentialDephasing),
                other => Err(CliError::Config(format!("unknown channel `{other}` (ad, pd)"))),
            })
            .collect()
    }

    pub fn sizes(&self) -> CliResult<Vec<f64>> {
        let s = self.sizes.clone().unwrap_or_else(|| vec![2.0, 3.0, 4.0, 5.0, 6.0]);
        if s.len() < 4 {
            return Err(CliError::Config(format!("`sizes` needs at least 4 entries, got {}", s.len())));
        }
        if s.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(CliError::Config("`sizes` must be positive".into()));
        }
        Ok(s)
    }

    pub fn crit_eps(&self) -> CliResult<Vec<f64>> {
        let e = self.crit_eps.clone().unwrap_or_else(|| vec![0.02, 0.05, 0.1]);
        if e.iter().any(|v| !(*v > 0.0 && *v < 0.5)) {
            return Err(CliError::Config("`crit_eps` entries must lie in (0, 0.5)".into()));
        }
        Ok(e)
    }

    pub fn n_max(&self) -> CliResult<u32> {
        match self.n_max.unwrap_or(200) {
            0 => Err(CliError::Config("n_max must be at least 1".into())),
            n => Ok(n),
        }
    }

    pub fn kappa(&self) -> CliResult<f64> {
        let k = self
            .kappa
            .ok_or_else(|| CliError::Config("`kappa` is required for the bias sweep".into()))?;
        if !(k > 0.0 && k < 1.0) {
            return Err(CliError::Config(format!("kappa = {k} is outside (0, 1)")));
        }
        Ok(k)
    }

    pub fn betas(&self) -> CliResult<Vec<f64>> {
        let b = self.betas.clone().unwrap_or_else(|| linspace((-4.0, 4.0), 17));
        if b.is_empty() || b.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config("`betas` must be a non-empty list of finite values".into()));
        }
        Ok(b)
    }
}

fn positive(name: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} = {v} must be positive")))
    }
}

/// 1-based line where `key` is defined, either as `key = …` or as a
/// `[key]`/`[[key]]` header.
fn line_of(src: &str, key: &str) -> usize {
    src.lines()
        .position(|l| {
            let t = l.trim_start();
            let header = t.trim_start_matches('[').trim_start();
            (t.starts_with('[') && header.starts_with(key))
                || (t.starts_with(key) && t[key.len()..].trim_start().starts_with('='))
        })
        .map_or(0, |i| i + 1)
}
