//! Flat `section.key = value` configuration with unit conversion.
//!
//! Frequencies are entered in MHz (f, not ω) and times in ns. Every key has a
//! default that reproduces the reference parameter set.

use std::collections::BTreeSet;
use std::path::Path;

use glzi_core::liouvillian::NoiseParams;
use glzi_core::mhz_to_rad_per_ns;
use glzi_core::odeint::IntegratorConfig;
use glzi_core::protocol::ProtocolParams;
use thiserror::Error;

use crate::format::fmt_num;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    InvalidValue { key: String, value: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Experiment {
    Fringe,
    Heatmap,
    ContrastScan,
    Backaction,
    SqueezeBench,
    OracleCheck,
}

impl Experiment {
    pub const ALL: [Experiment; 6] = [
        Experiment::Fringe,
        Experiment::Heatmap,
        Experiment::ContrastScan,
        Experiment::Backaction,
        Experiment::SqueezeBench,
        Experiment::OracleCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fringe => "fringe",
            Experiment::Heatmap => "heatmap",
            Experiment::ContrastScan => "contrast-scan",
            Experiment::Backaction => "backaction",
            Experiment::SqueezeBench => "squeeze-bench",
            Experiment::OracleCheck => "oracle-check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolSettings {
    pub omega_mhz: f64,
    pub delta0_mhz: f64,
    pub tau_p_ns: f64,
    pub tau_c_ns: f64,
    pub phi_echo_rad: f64,
    pub echo: bool,
}

/// Qubit and battery channels. Rates, when present, take precedence over the
/// corresponding coherence times.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSettings {
    pub enabled: bool,
    pub t1_ns: f64,
    pub t2_ns: f64,
    pub gamma1_per_ns: Option<f64>,
    pub gamma_phi_per_ns: Option<f64>,
    pub kappa_per_ns: f64,
    pub n_th: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridSettings {
    pub theta_count: usize,
    pub tau_p_min_ns: f64,
    pub tau_p_max_ns: f64,
    pub tau_p_count: usize,
    /// Coherent n̄ list for contrast-scan and backaction.
    pub nbar: Vec<f64>,
    /// Lowest n̄ entering the contrast-deficit fit.
    pub fit_min_nbar: f64,
    pub fringe_nbar: Vec<f64>,
    pub heatmap_nbar: Vec<f64>,
    pub squeeze_nbar: Vec<f64>,
    pub r: Vec<f64>,
    pub q: Vec<f64>,
    pub phase_squeezed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanConfig {
    pub protocol: ProtocolSettings,
    pub noise: NoiseSettings,
    pub integrator: IntegratorConfig,
    pub grid: GridSettings,
    /// Adds a decoupled, lossless control table to the backaction output.
    pub backaction_control: bool,
    /// Mutation control: flips the sign of the transfer amplitude in the
    /// sector oracle used by oracle-check.
    pub oracle_flip_b_sign: bool,
    explicit: BTreeSet<String>,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            protocol: ProtocolSettings {
                omega_mhz: 20.0,
                delta0_mhz: 100.0,
                tau_p_ns: 25.0,
                tau_c_ns: 100.0,
                phi_echo_rad: 0.0,
                echo: true,
            },
            noise: NoiseSettings {
                enabled: true,
                t1_ns: 118.0,
                t2_ns: 157.0,
                gamma1_per_ns: None,
                gamma_phi_per_ns: None,
                kappa_per_ns: 1e-4,
                n_th: 0.0,
            },
            integrator: IntegratorConfig::default(),
            grid: GridSettings {
                theta_count: 101,
                tau_p_min_ns: 25.0,
                tau_p_max_ns: 35.0,
                tau_p_count: 101,
                nbar: vec![0.5, 0.8, 1.0, 1.5, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0],
                fit_min_nbar: 3.0,
                fringe_nbar: vec![0.5, 1.0, 2.0, 5.0, 10.0],
                heatmap_nbar: vec![2.0, 5.0],
                squeeze_nbar: vec![1.0, 2.0, 3.0, 5.0, 7.5, 10.0],
                r: vec![0.15, 0.25, 0.35, 0.50],
                q: vec![0.75, 0.50],
                phase_squeezed: true,
            },
            backaction_control: false,
            oracle_flip_b_sign: false,
            explicit: BTreeSet::new(),
        }
    }
}

/// Every recognised key, in the order used for the resolved-config dump.
pub const KEYS: &[&str] = &[
    "protocol.omega_mhz",
    "protocol.delta0_mhz",
    "protocol.tau_p_ns",
    "protocol.tau_c_ns",
    "protocol.phi_echo_rad",
    "protocol.echo",
    "noise.enabled",
    "noise.t1_ns",
    "noise.t2_ns",
    "noise.gamma1_per_ns",
    "noise.gamma_phi_per_ns",
    "noise.kappa_per_ns",
    "noise.n_th",
    "integrator.rtol",
    "integrator.atol",
    "integrator.h_init_ns",
    "integrator.h_min_ns",
    "integrator.h_max_ns",
    "integrator.max_steps",
    "grid.theta_count",
    "grid.tau_p_min_ns",
    "grid.tau_p_max_ns",
    "grid.tau_p_count",
    "grid.nbar",
    "grid.fit_min_nbar",
    "grid.fringe_nbar",
    "grid.heatmap_nbar",
    "grid.squeeze_nbar",
    "grid.r",
    "grid.q",
    "grid.phase_squeezed",
    "backaction.control",
    "oracle.flip_b_sign",
];

fn invalid(key: &str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::InvalidValue {
        key: key.into(),
        value: value.into(),
        reason: reason.into(),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value.parse().map_err(|_| invalid(key, value, "not a number"))?;
    if !x.is_finite() {
        return Err(invalid(key, value, "must be finite"));
    }
    Ok(x)
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value
        .parse()
        .map_err(|_| invalid(key, value, "not a non-negative integer"))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "1" | "yes" | "on" => Ok(true),
        "false" | "0" | "no" | "off" => Ok(false),
        _ => Err(invalid(key, value, "not a boolean")),
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<&str> = value.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if items.is_empty() {
        return Err(invalid(key, value, "empty list"));
    }
    items.into_iter().map(|s| parse_f64(key, s)).collect()
}

fn fmt_list(v: &[f64]) -> String {
    v.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(",")
}

impl ScanConfig {
    /// Reads `path` and applies `overrides` (`key=value`) on top of it.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        if let Some(path) = path {
            let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
                path: path.display().to_string(),
                source,
            })?;
            cfg.apply_text(&text)?;
        }
        for (i, item) in overrides.iter().enumerate() {
            let (k, v) = item.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: item.clone(),
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies `key = value` lines; `#` starts a comment.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let (p, n, it, g) = (
            &mut self.protocol,
            &mut self.noise,
            &mut self.integrator,
            &mut self.grid,
        );
        match key {
            "protocol.omega_mhz" => p.omega_mhz = parse_f64(key, value)?,
            "protocol.delta0_mhz" => p.delta0_mhz = parse_f64(key, value)?,
            "protocol.tau_p_ns" => p.tau_p_ns = parse_f64(key, value)?,
            "protocol.tau_c_ns" => p.tau_c_ns = parse_f64(key, value)?,
            "protocol.phi_echo_rad" => p.phi_echo_rad = parse_f64(key, value)?,
            "protocol.echo" => p.echo = parse_bool(key, value)?,
            "noise.enabled" => n.enabled = parse_bool(key, value)?,
            "noise.t1_ns" => n.t1_ns = parse_f64(key, value)?,
            "noise.t2_ns" => n.t2_ns = parse_f64(key, value)?,
            "noise.gamma1_per_ns" => n.gamma1_per_ns = Some(parse_f64(key, value)?),
            "noise.gamma_phi_per_ns" => n.gamma_phi_per_ns = Some(parse_f64(key, value)?),
            "noise.kappa_per_ns" => n.kappa_per_ns = parse_f64(key, value)?,
            "noise.n_th" => n.n_th = parse_f64(key, value)?,
            "integrator.rtol" => it.rtol = parse_f64(key, value)?,
            "integrator.atol" => it.atol = parse_f64(key, value)?,
            "integrator.h_init_ns" => it.h_init = parse_f64(key, value)?,
            "integrator.h_min_ns" => it.h_min = parse_f64(key, value)?,
            "integrator.h_max_ns" => it.h_max = Some(parse_f64(key, value)?),
            "integrator.max_steps" => it.max_steps = parse_usize(key, value)?,
            "grid.theta_count" => g.theta_count = parse_usize(key, value)?,
            "grid.tau_p_min_ns" => g.tau_p_min_ns = parse_f64(key, value)?,
            "grid.tau_p_max_ns" => g.tau_p_max_ns = parse_f64(key, value)?,
            "grid.tau_p_count" => g.tau_p_count = parse_usize(key, value)?,
            "grid.nbar" => g.nbar = parse_list(key, value)?,
            "grid.fit_min_nbar" => g.fit_min_nbar = parse_f64(key, value)?,
            "grid.fringe_nbar" => g.fringe_nbar = parse_list(key, value)?,
            "grid.heatmap_nbar" => g.heatmap_nbar = parse_list(key, value)?,
            "grid.squeeze_nbar" => g.squeeze_nbar = parse_list(key, value)?,
            "grid.r" => g.r = parse_list(key, value)?,
            "grid.q" => g.q = parse_list(key, value)?,
            "grid.phase_squeezed" => g.phase_squeezed = parse_bool(key, value)?,
            "backaction.control" => self.backaction_control = parse_bool(key, value)?,
            "oracle.flip_b_sign" => self.oracle_flip_b_sign = parse_bool(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        self.explicit.insert(key.to_string());
        Ok(())
    }

    /// Keys set by the file or by overrides.
    pub fn is_explicit(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        if g.theta_count < 2 {
            return Err(ConfigError::Invalid("grid.theta_count must be at least 2".into()));
        }
        if g.tau_p_count < 1
            || g.tau_p_min_ns > g.tau_p_max_ns
            || (g.tau_p_count == 1 && g.tau_p_min_ns != g.tau_p_max_ns)
        {
            return Err(ConfigError::Invalid(format!(
                "τ_p grid [{}, {}] ns with {} points is not valid",
                g.tau_p_min_ns, g.tau_p_max_ns, g.tau_p_count
            )));
        }
        let positive = |name: &str, v: &[f64]| {
            if v.iter().all(|&x| x > 0.0) {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{name} entries must be positive")))
            }
        };
        positive("grid.nbar", &g.nbar)?;
        positive("grid.fringe_nbar", &g.fringe_nbar)?;
        positive("grid.heatmap_nbar", &g.heatmap_nbar)?;
        positive("grid.squeeze_nbar", &g.squeeze_nbar)?;
        positive("grid.r", &g.r)?;
        positive("grid.q", &g.q)?;
        self.integrator
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        self.noise_params()?;
        let p = self.protocol_params(0.0, self.protocol.tau_p_ns, 1.0);
        p.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        for &tau_p in &[g.tau_p_min_ns, g.tau_p_max_ns] {
            self.protocol_params(0.0, tau_p, 1.0)
                .validate()
                .map_err(|e| ConfigError::Invalid(format!("heatmap grid: {e}")))?;
        }
        Ok(())
    }

    /// Warnings about conflicting inputs; rates override times.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.is_explicit("noise.gamma1_per_ns") && self.is_explicit("noise.t1_ns") {
            w.push("noise.gamma1_per_ns and noise.t1_ns both given; using the rate".to_string());
        }
        if self.is_explicit("noise.gamma_phi_per_ns")
            && (self.is_explicit("noise.t2_ns") || self.is_explicit("noise.t1_ns"))
        {
            w.push("noise.gamma_phi_per_ns and a coherence time both given; using the rate".to_string());
        }
        w
    }

    /// Lindblad rates in ns⁻¹. Γ₁ = 1/T₁ and γ_φ = 1/T₂ − Γ₁/2 unless the
    /// rates are given directly.
    pub fn noise_params(&self) -> Result<NoiseParams, ConfigError> {
        let n = &self.noise;
        if !n.enabled {
            return Ok(NoiseParams::none());
        }
        let from_times = NoiseParams::from_times(n.t1_ns, n.t2_ns, n.kappa_per_ns, n.n_th);
        let gamma1 = match n.gamma1_per_ns {
            Some(g) => g,
            None => 1.0 / n.t1_ns,
        };
        let gamma_phi = match n.gamma_phi_per_ns {
            Some(g) => g,
            None => 1.0 / n.t2_ns - gamma1 / 2.0,
        };
        if n.gamma1_per_ns.is_none() && n.gamma_phi_per_ns.is_none() {
            return from_times.map_err(|e| ConfigError::Invalid(e.to_string()));
        }
        let params = NoiseParams {
            gamma1,
            gamma_phi,
            kappa: n.kappa_per_ns,
            n_th: n.n_th,
        };
        params.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
        Ok(params)
    }

    /// Protocol parameters in rad/ns and ns for one grid point.
    pub fn protocol_params(&self, theta_geo: f64, tau_p: f64, nbar: f64) -> ProtocolParams {
        let p = &self.protocol;
        ProtocolParams {
            omega: mhz_to_rad_per_ns(p.omega_mhz),
            delta0: mhz_to_rad_per_ns(p.delta0_mhz),
            tau_p,
            tau_c: p.tau_c_ns,
            theta_geo,
            phi_echo: p.phi_echo_rad,
            nbar,
            echo: p.echo,
        }
    }

    /// Every key with its resolved value; unset optional keys map to "".
    pub fn resolved(&self) -> Vec<(&'static str, String)> {
        let opt = |x: Option<f64>| x.map(fmt_num).unwrap_or_default();
        let (p, n, it, g) = (&self.protocol, &self.noise, &self.integrator, &self.grid);
        KEYS.iter()
            .map(|&k| {
                let v = match k {
                    "protocol.omega_mhz" => fmt_num(p.omega_mhz),
                    "protocol.delta0_mhz" => fmt_num(p.delta0_mhz),
                    "protocol.tau_p_ns" => fmt_num(p.tau_p_ns),
                    "protocol.tau_c_ns" => fmt_num(p.tau_c_ns),
                    "protocol.phi_echo_rad" => fmt_num(p.phi_echo_rad),
                    "protocol.echo" => p.echo.to_string(),
                    "noise.enabled" => n.enabled.to_string(),
                    "noise.t1_ns" => fmt_num(n.t1_ns),
                    "noise.t2_ns" => fmt_num(n.t2_ns),
                    "noise.gamma1_per_ns" => opt(n.gamma1_per_ns),
                    "noise.gamma_phi_per_ns" => opt(n.gamma_phi_per_ns),
                    "noise.kappa_per_ns" => fmt_num(n.kappa_per_ns),
                    "noise.n_th" => fmt_num(n.n_th),
                    "integrator.rtol" => fmt_num(it.rtol),
                    "integrator.atol" => fmt_num(it.atol),
                    "integrator.h_init_ns" => fmt_num(it.h_init),
                    "integrator.h_min_ns" => fmt_num(it.h_min),
                    "integrator.h_max_ns" => opt(it.h_max),
                    "integrator.max_steps" => it.max_steps.to_string(),
                    "grid.theta_count" => g.theta_count.to_string(),
                    "grid.tau_p_min_ns" => fmt_num(g.tau_p_min_ns),
                    "grid.tau_p_max_ns" => fmt_num(g.tau_p_max_ns),
                    "grid.tau_p_count" => g.tau_p_count.to_string(),
                    "grid.nbar" => fmt_list(&g.nbar),
                    "grid.fit_min_nbar" => fmt_num(g.fit_min_nbar),
                    "grid.fringe_nbar" => fmt_list(&g.fringe_nbar),
                    "grid.heatmap_nbar" => fmt_list(&g.heatmap_nbar),
                    "grid.squeeze_nbar" => fmt_list(&g.squeeze_nbar),
                    "grid.r" => fmt_list(&g.r),
                    "grid.q" => fmt_list(&g.q),
                    "grid.phase_squeezed" => g.phase_squeezed.to_string(),
                    "backaction.control" => self.backaction_control.to_string(),
                    "oracle.flip_b_sign" => self.oracle_flip_b_sign.to_string(),
                    _ => unreachable!("KEYS and resolved() list the same keys"),
                };
                (k, v)
            })
            .collect()
    }
}
