//! Experiment configuration, pipelines and data emission.
//!
//! Configs are line-oriented `key = value` files with `[section]` headers.
//! Every parameter has a default, so an empty file runs the reference
//! configuration; unknown keys are rejected with their line number.

pub mod experiments;
pub mod output;

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::Serialize;

use crate::hilbert::Caps;
use crate::params::PhysicalParams;
use crate::SimError;

/// Which pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// Interaction matrix elements over the (b_e_qe, v0) plane.
    Fig2,
    /// Emission spectra and peak heights vs electron speed.
    Fig3,
    /// Momentum reshaping Δn_k vs detuning for f ∈ {0, 0.1, 0.5}.
    Fig4,
    /// Modulated-beam population transfer and spectra.
    Fig5,
    /// Net electron energy change maps.
    Fig6,
    /// Single-point diagnostics (spectrum, Δn_k, populations).
    Custom,
    /// Oracle and invariant suite; nonzero exit on failure.
    Validate,
}

impl ExperimentKind {
    pub fn parse(s: &str) -> Option<ExperimentKind> {
        Some(match s {
            "fig2" => ExperimentKind::Fig2,
            "fig3" => ExperimentKind::Fig3,
            "fig4" => ExperimentKind::Fig4,
            "fig5" => ExperimentKind::Fig5,
            "fig6" => ExperimentKind::Fig6,
            "custom" => ExperimentKind::Custom,
            "validate" => ExperimentKind::Validate,
            _ => return None,
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Fig2 => "fig2",
            ExperimentKind::Fig3 => "fig3",
            ExperimentKind::Fig4 => "fig4",
            ExperimentKind::Fig5 => "fig5",
            ExperimentKind::Fig6 => "fig6",
            ExperimentKind::Custom => "custom",
            ExperimentKind::Validate => "validate",
        }
    }
}

/// Spectrum normalization mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    Raw,
    I0,
}

/// Which first-manifold transition the comb spacing targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum QModTarget {
    Upper,
    Lower,
}

impl QModTarget {
    pub fn label(&self) -> &'static str {
        match self {
            QModTarget::Upper => "upper",
            QModTarget::Lower => "lower",
        }
    }
}

/// Output file format for data tables (the manifest is always JSON).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Sweep grids; empty vectors are filled with per-experiment defaults at
/// resolution time.
#[derive(Debug, Clone, Serialize)]
pub struct SweepGrids {
    pub v0_over_c: Vec<f64>,
    pub b_e_qe: Vec<f64>,
    /// Half detuning ħΔ = (ħω_c − ħω_QE)/2, eV.
    pub delta: Vec<f64>,
    pub theta: Vec<f64>,
    pub f: Vec<f64>,
    pub q_mod_target: Vec<QModTarget>,
    pub comb_teeth: u32,
    pub comb_xi: f64,
    /// Emission-spectrum energy grid (lo, hi, points), eV.
    pub omega_ev: (f64, f64, usize),
    /// Δn_k output grid in units (k − k₀)v₀/ω_c: (lo, hi, points).
    pub k_offset: (f64, f64, usize),
}

impl Default for SweepGrids {
    fn default() -> Self {
        SweepGrids {
            v0_over_c: Vec::new(),
            b_e_qe: Vec::new(),
            delta: Vec::new(),
            theta: Vec::new(),
            f: Vec::new(),
            q_mod_target: Vec::new(),
            comb_teeth: 100,
            comb_xi: 0.0,
            omega_ev: (1.75, 2.25, 501),
            k_offset: (-1.6, 1.6, 321),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub normalization: Normalization,
    pub params: PhysicalParams,
    pub n_z_max: u32,
    pub manifold_max: u32,
    pub sweep: SweepGrids,
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    /// Keys set explicitly (used to pin sweep grids to single points).
    #[serde(skip)]
    pub explicit: BTreeSet<String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let caps = Caps::default();
        ExperimentConfig {
            kind: ExperimentKind::Custom,
            normalization: Normalization::Raw,
            params: PhysicalParams::default(),
            n_z_max: caps.n_z_max,
            manifold_max: caps.manifold_max,
            sweep: SweepGrids::default(),
            out_dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
            explicit: BTreeSet::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn caps(&self) -> Caps {
        Caps {
            n_z_max: self.n_z_max,
            manifold_max: self.manifold_max,
        }
    }

    pub fn was_set(&self, key: &str) -> bool {
        self.explicit.contains(key)
    }

    /// Probe parameters at a sweep point, honoring the collinear layout
    /// unless b_e_c was pinned explicitly.
    pub fn probe_params(&self, v0_over_c: f64, b_e_qe: f64) -> PhysicalParams {
        let mut p = self.params.clone();
        p.v0_over_c = v0_over_c;
        p.b_e_qe = b_e_qe;
        if !self.was_set("b_e_c") {
            p.b_e_c = p.b_c_qe + p.b_e_qe;
        }
        p
    }
}

fn parse_f64(key: &str, val: &str, line: usize) -> Result<f64, SimError> {
    parse_theta_token(val).ok_or_else(|| SimError::Config {
        line,
        msg: format!("{key}: cannot parse '{val}' as a number"),
    })
}

/// Numbers plus the tokens pi, -pi, pi/2, -pi/2 (phases come up a lot).
fn parse_theta_token(val: &str) -> Option<f64> {
    match val.trim() {
        "pi" => Some(std::f64::consts::PI),
        "-pi" => Some(-std::f64::consts::PI),
        "pi/2" => Some(std::f64::consts::FRAC_PI_2),
        "-pi/2" => Some(-std::f64::consts::FRAC_PI_2),
        other => other.parse::<f64>().ok(),
    }
}

/// Grid syntax: `start:stop:count` (inclusive linspace) or a comma list.
fn parse_grid(key: &str, val: &str, line: usize) -> Result<Vec<f64>, SimError> {
    let bad = |msg: String| SimError::Config { line, msg };
    if val.contains(':') {
        let parts: Vec<&str> = val.split(':').collect();
        if parts.len() != 3 {
            return Err(bad(format!("{key}: expected start:stop:count, got '{val}'")));
        }
        let lo = parse_f64(key, parts[0], line)?;
        let hi = parse_f64(key, parts[1], line)?;
        let n: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| bad(format!("{key}: bad count '{}'", parts[2])))?;
        if n == 0 {
            return Err(bad(format!("{key}: grid count must be >= 1")));
        }
        Ok(linspace(lo, hi, n))
    } else {
        val.split(',')
            .map(|tok| parse_f64(key, tok, line))
            .collect()
    }
}

/// Inclusive linear grid with n points.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Parse the documented config grammar into a resolved configuration.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, SimError> {
    let mut cfg = ExperimentConfig::default();
    let mut section = String::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let stripped = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        if let Some(name) = stripped.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or(SimError::Config {
                line,
                msg: format!("unterminated section header '{stripped}'"),
            })?;
            section = name.trim().to_string();
            match section.as_str() {
                "experiment" | "params" | "probe" | "caps" | "sweep" | "output" => {}
                other => {
                    return Err(SimError::Config {
                        line,
                        msg: format!("unknown section [{other}]"),
                    })
                }
            }
            continue;
        }
        let (key, val) = stripped.split_once('=').ok_or(SimError::Config {
            line,
            msg: format!("expected key = value, got '{stripped}'"),
        })?;
        let key = key.trim();
        let val = val.trim();
        apply_key(&mut cfg, &section, key, val, line)?;
    }
    // range checks with the offending key named
    validate_ranges(&cfg)?;
    Ok(cfg)
}

fn apply_key(
    cfg: &mut ExperimentConfig,
    section: &str,
    key: &str,
    val: &str,
    line: usize,
) -> Result<(), SimError> {
    let unknown = || SimError::Config {
        line,
        msg: format!("unknown key '{key}' in section [{section}]"),
    };
    match section {
        "experiment" => match key {
            "kind" => {
                cfg.kind = ExperimentKind::parse(val).ok_or(SimError::Config {
                    line,
                    msg: format!("unknown experiment kind '{val}'"),
                })?;
            }
            "normalization" => {
                cfg.normalization = match val {
                    "raw" => Normalization::Raw,
                    "i0" => Normalization::I0,
                    _ => {
                        return Err(SimError::Config {
                            line,
                            msg: format!("normalization must be raw or i0, got '{val}'"),
                        })
                    }
                };
            }
            _ => return Err(unknown()),
        },
        // [probe] is an alias scoped to the beam-side parameters
        "params" | "probe" => {
            let probe_keys = ["v0_over_c", "b_e_qe", "b_e_c", "sigma"];
            if section == "probe" && !probe_keys.contains(&key) {
                return Err(unknown());
            }
            let v = parse_f64(key, val, line)?;
            match key {
                "hbar_omega_c" => cfg.params.hbar_omega_c = v,
                "hbar_omega_qe" => cfg.params.hbar_omega_qe = v,
                "mu_qe" => cfg.params.mu_qe = v,
                "radius_r" => cfg.params.radius_r = v,
                "b_c_qe" => cfg.params.b_c_qe = v,
                "b_e_c" => cfg.params.b_e_c = v,
                "b_e_qe" => cfg.params.b_e_qe = v,
                "v0_over_c" => cfg.params.v0_over_c = v,
                "sigma" => cfg.params.sigma = v,
                _ => return Err(unknown()),
            }
            cfg.explicit.insert(key.to_string());
        }
        "caps" => {
            let v: u32 = val.parse().map_err(|_| SimError::Config {
                line,
                msg: format!("{key}: expected a nonnegative integer, got '{val}'"),
            })?;
            match key {
                "n_z_max" => cfg.n_z_max = v,
                "manifold_max" => cfg.manifold_max = v,
                _ => return Err(unknown()),
            }
            cfg.explicit.insert(key.to_string());
        }
        "sweep" => match key {
            "v0_over_c" => cfg.sweep.v0_over_c = parse_grid(key, val, line)?,
            "b_e_qe" => cfg.sweep.b_e_qe = parse_grid(key, val, line)?,
            "delta" => cfg.sweep.delta = parse_grid(key, val, line)?,
            "theta" => cfg.sweep.theta = parse_grid(key, val, line)?,
            "f" => cfg.sweep.f = parse_grid(key, val, line)?,
            "q_mod_target" => {
                cfg.sweep.q_mod_target = val
                    .split(',')
                    .map(|t| match t.trim() {
                        "upper" => Ok(QModTarget::Upper),
                        "lower" => Ok(QModTarget::Lower),
                        other => Err(SimError::Config {
                            line,
                            msg: format!("q_mod_target must be upper or lower, got '{other}'"),
                        }),
                    })
                    .collect::<Result<_, _>>()?;
            }
            "comb_teeth" => {
                cfg.sweep.comb_teeth = val.parse().map_err(|_| SimError::Config {
                    line,
                    msg: format!("comb_teeth: expected an even integer, got '{val}'"),
                })?;
            }
            "comb_xi" => cfg.sweep.comb_xi = parse_f64(key, val, line)?,
            "omega_ev" => {
                let g = parse_grid(key, val, line)?;
                if g.len() < 2 {
                    return Err(SimError::Config {
                        line,
                        msg: "omega_ev: need a range lo:hi:count".into(),
                    });
                }
                cfg.sweep.omega_ev = (g[0], *g.last().unwrap(), g.len());
            }
            "k_offset" => {
                let g = parse_grid(key, val, line)?;
                if g.len() < 2 {
                    return Err(SimError::Config {
                        line,
                        msg: "k_offset: need a range lo:hi:count".into(),
                    });
                }
                cfg.sweep.k_offset = (g[0], *g.last().unwrap(), g.len());
            }
            _ => return Err(unknown()),
        },
        "output" => match key {
            "dir" => cfg.out_dir = PathBuf::from(val),
            "format" => {
                cfg.format = match val {
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    _ => {
                        return Err(SimError::Config {
                            line,
                            msg: format!("format must be csv or json, got '{val}'"),
                        })
                    }
                };
            }
            _ => return Err(unknown()),
        },
        "" => {
            return Err(SimError::Config {
                line,
                msg: format!("key '{key}' appears before any [section] header"),
            })
        }
        _ => return Err(unknown()),
    }
    Ok(())
}

fn validate_ranges(cfg: &ExperimentConfig) -> Result<(), SimError> {
    cfg.params
        .validate()
        .map_err(|e| SimError::InvalidParams(format!("config: {e}")))?;
    if cfg.manifold_max < 1 {
        return Err(SimError::InvalidParams(
            "config: manifold_max must be >= 1".into(),
        ));
    }
    if cfg.sweep.comb_teeth % 2 != 0 {
        return Err(SimError::InvalidParams(
            "config: comb_teeth must be even".into(),
        ));
    }
    for (name, grid) in [
        ("v0_over_c", &cfg.sweep.v0_over_c),
        ("b_e_qe", &cfg.sweep.b_e_qe),
    ] {
        for &v in grid {
            if !(v > 0.0) {
                return Err(SimError::InvalidParams(format!(
                    "config: sweep {name} values must be positive"
                )));
            }
        }
    }
    if let Some(v) = cfg.sweep.v0_over_c.iter().find(|v| **v >= 1.0) {
        return Err(SimError::InvalidParams(format!(
            "config: sweep v0_over_c {v} must be below 1"
        )));
    }
    Ok(())
}
