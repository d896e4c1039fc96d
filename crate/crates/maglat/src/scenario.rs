//! Scenario files: a versioned JSON description of material, drive,
//! environment and hardware plus a list of analyses to run.
//!
//! Dimensioned inputs are strings with units (`"86 ueV"`, `"900 nm"`,
//! `"22 GHz_f"`). Bare `GHz` follows `frequency_convention` (angular by
//! default, i.e. 10⁹ rad/s).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::lattice::{self, BandConfig, Disorder, HubbardOptions, PeriodicPotential, Sublattice};
use crate::saw::{self, SawFilmSpec};
use crate::spin;
use crate::stability::{self, ClassifyConfig, StabilityParams};
use crate::trap::{self, GridConfig, Thresholds};
use crate::units::{self, Dimension, DriveSpec, EnvironmentSpec, FreqConvention, MaterialSpec};
use crate::wire::{self, WireGeometry};

pub mod case_study;
pub mod table;
pub mod table1;

pub use case_study::{case_study, run_case_study, CaseStudy, CaseStudyExpectation, CaseStudyReport, Check, Expected, Tolerance};
pub use table::Table;
pub use table1::{table1, FieldLevels, Table1Cell};

use table::num;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    #[default]
    Angular,
    Cycle,
}

impl From<Convention> for FreqConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Angular => FreqConvention::Angular,
            Convention::Cycle => FreqConvention::Cycle,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub frequency_convention: Convention,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub material: Option<MaterialConfig>,
    #[serde(default)]
    pub drive: Option<DriveConfig>,
    #[serde(default)]
    pub environment: Option<EnvironmentConfig>,
    #[serde(default)]
    pub implementation: ImplementationConfig,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub expectations: Vec<Expectation>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MaterialConfig {
    pub name: String,
    pub g_factor: f64,
    /// Units of m₀.
    pub eff_mass: f64,
    #[serde(default)]
    pub sound_speed: Option<String>,
    #[serde(default)]
    pub dielectric_const: Option<f64>,
    #[serde(default)]
    pub rashba: Option<String>,
    #[serde(default)]
    pub dresselhaus: Option<String>,
    #[serde(default)]
    pub phonon_rate: Option<String>,
    #[serde(default)]
    pub linewidth: Option<String>,
}

/// Either fields (`b0`, `b1`) or energies (`rabi`, `delta`), plus `omega`
/// and `a`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DriveConfig {
    #[serde(default)]
    pub b0: Option<String>,
    #[serde(default)]
    pub b1: Option<String>,
    #[serde(default)]
    pub rabi: Option<String>,
    #[serde(default)]
    pub delta: Option<String>,
    pub omega: String,
    pub a: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EnvironmentConfig {
    pub temperature: String,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImplementationConfig {
    #[default]
    Abstract,
    Wire(WireConfig),
    Saw(SawConfig),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WireConfig {
    pub n_wires: usize,
    /// Defaults to the drive's lattice constant.
    #[serde(default)]
    pub a: Option<String>,
    pub d: String,
    pub current: String,
    /// (width, height); defaults to 480 nm square.
    #[serde(default)]
    pub cross_section: Option<[String; 2]>,
    /// Defaults to the drive frequency.
    #[serde(default)]
    pub omega: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SawConfig {
    pub thickness: String,
    /// μ₀M_s.
    pub saturation: String,
    pub gilbert_alpha: f64,
    pub g_film: f64,
    pub magnetoelastic: String,
    pub strain: f64,
    pub frequency: String,
    pub sound_speed: String,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub n: usize,
    #[serde(default)]
    pub log: bool,
}

impl Grid {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.n == 0 || !self.min.is_finite() || !self.max.is_finite() {
            return Err(Error::Invalid("grid needs finite bounds and n >= 1".into()));
        }
        if self.log {
            if !(self.min > 0.0 && self.max > 0.0) {
                return Err(Error::Invalid("log grid needs positive bounds".into()));
            }
            Ok(stability::linspace(self.min.ln(), self.max.ln(), self.n).into_iter().map(f64::exp).collect())
        } else {
            Ok(stability::linspace(self.min, self.max, self.n))
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandPotential {
    /// ±ε(z) from the drive, in units of the material's E_R.
    Adiabatic { sublattice: Sublattice },
    /// V₀ sin²(πz/a), V₀ in E_R.
    Sin2 { v0_over_er: f64 },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Analysis {
    TrapCheck {
        #[serde(default)]
        thresholds: Option<Thresholds>,
    },
    Spectrum {
        #[serde(default)]
        grid: Option<GridConfig>,
    },
    WireField {
        /// Depths below the wire plane in units of a.
        #[serde(default = "default_wire_x")]
        x_over_a: Vec<f64>,
        #[serde(default = "default_samples")]
        samples_per_period: usize,
    },
    Rabi {},
    SawStray {
        #[serde(default = "default_stray_x")]
        x_over_a: Vec<f64>,
        /// Defaults to the film's own frequency.
        #[serde(default)]
        frequencies: Option<Vec<String>>,
        #[serde(default = "default_stray_tol")]
        tol: f64,
    },
    Hybrid {
        v_saw: String,
        /// Defaults to m(ω/k)²/2.
        #[serde(default)]
        e_s: Option<String>,
    },
    Bands {
        #[serde(default = "default_nq")]
        n_q: usize,
        #[serde(default = "default_nbands")]
        n_bands: usize,
        potential: BandPotential,
    },
    Hubbard {
        #[serde(default = "default_sites")]
        n_sites: usize,
        #[serde(default)]
        omega_dr: Option<String>,
        #[serde(default)]
        omega_3: Option<String>,
        #[serde(default)]
        d_scr: Option<String>,
        #[serde(default)]
        u_over_tc: Option<f64>,
        #[serde(default = "default_z0")]
        z0_over_a: f64,
        #[serde(default = "default_u_sublattice")]
        u_sublattice: Sublattice,
        #[serde(default)]
        disorder: Disorder,
    },
    FloquetCompare {
        #[serde(default = "default_delta_over_omega")]
        delta_over_omega: f64,
        #[serde(default = "default_rabi_over_omega")]
        rabi_over_omega: Vec<f64>,
        #[serde(default = "default_orders")]
        orders: Vec<u8>,
        #[serde(default = "default_periods")]
        n_periods: usize,
        #[serde(default = "default_floquet_tol")]
        tol: f64,
    },
    StabilityDiagram {
        q: Grid,
        r: Grid,
        eta: f64,
        #[serde(default)]
        pbm: bool,
    },
    HoppingSweep {
        #[serde(default = "default_sweep_drive")]
        drive_over_rabi: Grid,
        #[serde(default = "default_sweep_rabi")]
        rabi_over_delta: Grid,
        #[serde(default = "default_nb_sqrt")]
        n_b_sqrt: f64,
        #[serde(default = "default_sites")]
        n_sites: usize,
    },
    Table1 {
        #[serde(default)]
        wire: Option<[String; 2]>,
        #[serde(default)]
        saw: Option<[String; 2]>,
    },
    CaseStudy {
        name: String,
    },
}

fn default_wire_x() -> Vec<f64> {
    vec![1.0]
}
fn default_samples() -> usize {
    32
}
fn default_stray_x() -> Vec<f64> {
    vec![0.1, 0.2, 0.3, 0.4, 0.5]
}
fn default_stray_tol() -> f64 {
    1e-6
}
fn default_nq() -> usize {
    32
}
fn default_nbands() -> usize {
    3
}
fn default_sites() -> usize {
    8
}
fn default_z0() -> f64 {
    0.05
}
fn default_u_sublattice() -> Sublattice {
    Sublattice::Minus
}
fn default_delta_over_omega() -> f64 {
    0.2
}
fn default_rabi_over_omega() -> Vec<f64> {
    vec![0.1, 0.5]
}
fn default_orders() -> Vec<u8> {
    vec![0, 1, 2]
}
fn default_periods() -> usize {
    10
}
fn default_floquet_tol() -> f64 {
    1e-12
}
/// Ω_dr/Ω₀ from 10⁻⁴ to 10⁻¹, log spaced.
pub fn default_sweep_drive() -> Grid {
    Grid { min: 1e-4, max: 1e-1, n: 13, log: true }
}
/// Ω₀/Δ from 0.02 to 1, log spaced.
pub fn default_sweep_rabi() -> Grid {
    Grid { min: 0.02, max: 1.0, n: 12, log: true }
}
fn default_nb_sqrt() -> f64 {
    1.0
}

impl Analysis {
    pub fn kind(&self) -> &'static str {
        match self {
            Analysis::TrapCheck { .. } => "trap_check",
            Analysis::Spectrum { .. } => "spectrum",
            Analysis::WireField { .. } => "wire_field",
            Analysis::Rabi { .. } => "rabi",
            Analysis::SawStray { .. } => "saw_stray",
            Analysis::Hybrid { .. } => "hybrid",
            Analysis::Bands { .. } => "bands",
            Analysis::Hubbard { .. } => "hubbard",
            Analysis::FloquetCompare { .. } => "floquet_compare",
            Analysis::StabilityDiagram { .. } => "stability_diagram",
            Analysis::HoppingSweep { .. } => "hopping_sweep",
            Analysis::Table1 { .. } => "table1",
            Analysis::CaseStudy { .. } => "case_study",
        }
    }
}

/// A check on a value of the results object, addressed by JSON pointer
/// (e.g. `/trap_check/v0_uev`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Expectation {
    pub quantity: String,
    pub value: f64,
    pub tolerance: Tolerance,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<String>,
    #[serde(default)]
    pub format: Format,
}

/// A parsed scenario and the keys that were not recognized.
#[derive(Debug, Clone)]
pub struct LoadedScenario {
    pub config: ScenarioConfig,
    pub unknown_keys: Vec<String>,
}

/// Parses scenario JSON. In strict mode any unknown key is an error.
pub fn parse_scenario(text: &str, strict: bool) -> Result<LoadedScenario> {
    let mut unknown = Vec::new();
    let mut de = serde_json::Deserializer::from_str(text);
    let config: ScenarioConfig = {
        let mut track = |p: serde_ignored::Path<'_>| unknown.push(p.to_string());
        let ig = serde_ignored::Deserializer::new(&mut de, &mut track);
        serde_path_to_error::deserialize(ig).map_err(|e| {
            let key = e.path().to_string();
            Error::Config { key: if key == "." { "<root>".into() } else { key }, msg: e.into_inner().to_string() }
        })?
    };
    de.end().map_err(|e| Error::Config { key: "<root>".into(), msg: e.to_string() })?;
    if config.schema_version != SCHEMA_VERSION {
        return Err(Error::Config {
            key: "schema_version".into(),
            msg: format!("unsupported version {} (expected {SCHEMA_VERSION})", config.schema_version),
        });
    }
    if strict {
        if let Some(k) = unknown.first() {
            return Err(Error::Config { key: k.clone(), msg: "unknown key".into() });
        }
    }
    Ok(LoadedScenario { config, unknown_keys: unknown })
}

/// Scenario inputs in internal units.
#[derive(Debug, Clone, Serialize)]
pub struct Resolved {
    pub material: Option<MaterialSpec>,
    pub drive: Option<DriveSpec>,
    pub environment: Option<EnvironmentSpec>,
    pub implementation: ResolvedImplementation,
    #[serde(skip)]
    pub convention: FreqConvention,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ResolvedImplementation {
    Abstract,
    Wire(WireGeometry),
    Saw(SawFilmSpec),
}

fn quantity(key: &str, s: &str, dim: Dimension, conv: FreqConvention) -> Result<f64> {
    units::parse_quantity(s, dim, conv).map_err(|e| Error::Config { key: key.to_string(), msg: e.to_string() })
}

fn opt_quantity(key: &str, s: &Option<String>, dim: Dimension, conv: FreqConvention) -> Result<Option<f64>> {
    s.as_deref().map(|v| quantity(key, v, dim, conv)).transpose()
}

fn config_err(key: &str, e: Error) -> Error {
    match e {
        Error::Invalid(msg) | Error::Units(msg) => Error::Config { key: key.to_string(), msg },
        other => other,
    }
}

pub fn resolve(cfg: &ScenarioConfig) -> Result<Resolved> {
    let conv: FreqConvention = cfg.frequency_convention.into();
    let material = match &cfg.material {
        None => None,
        Some(m) => {
            let mut spec = MaterialSpec::new(&m.name, m.g_factor, m.eff_mass);
            spec.sound_speed = opt_quantity("material.sound_speed", &m.sound_speed, Dimension::Speed, conv)?;
            if let Some(e) = m.dielectric_const {
                spec.dielectric_const = e;
            }
            spec.rashba = opt_quantity("material.rashba", &m.rashba, Dimension::Speed, conv)?.unwrap_or(0.0);
            spec.dresselhaus = opt_quantity("material.dresselhaus", &m.dresselhaus, Dimension::Speed, conv)?.unwrap_or(0.0);
            spec.phonon_rate = opt_quantity("material.phonon_rate", &m.phonon_rate, Dimension::Energy, conv)?.unwrap_or(0.0);
            spec.linewidth = opt_quantity("material.linewidth", &m.linewidth, Dimension::Energy, conv)?.unwrap_or(0.0);
            spec.validate().map_err(|e| config_err("material", e))?;
            Some(spec)
        }
    };
    let drive = match &cfg.drive {
        None => None,
        Some(d) => {
            let g = material
                .as_ref()
                .map(|m| m.g_factor)
                .ok_or_else(|| Error::Config { key: "material".into(), msg: "a drive needs a material g-factor".into() })?;
            let omega = quantity("drive.omega", &d.omega, Dimension::Energy, conv)?;
            let a = quantity("drive.a", &d.a, Dimension::Length, conv)?;
            let spec = match (&d.rabi, &d.delta, &d.b0, &d.b1) {
                (Some(r), Some(dl), None, None) => DriveSpec::from_energies(
                    g,
                    quantity("drive.rabi", r, Dimension::Energy, conv)?,
                    quantity("drive.delta", dl, Dimension::Energy, conv)?,
                    omega,
                    a,
                ),
                (None, None, Some(b0), Some(b1)) => DriveSpec::new(
                    g,
                    quantity("drive.b0", b0, Dimension::Field, conv)?,
                    quantity("drive.b1", b1, Dimension::Field, conv)?,
                    omega,
                    a,
                ),
                _ => {
                    return Err(Error::Config {
                        key: "drive".into(),
                        msg: "give either rabi and delta, or b0 and b1".into(),
                    })
                }
            }
            .map_err(|e| config_err("drive", e))?;
            Some(spec)
        }
    };
    let environment = match &cfg.environment {
        None => None,
        Some(e) => {
            // temperatures parse as energies; reject frequency spellings
            let t = e.temperature.trim();
            if !(t.ends_with("mK") || t.ends_with('K')) {
                return Err(Error::Config { key: "environment.temperature".into(), msg: format!("{t:?} is not in K or mK") });
            }
            let w = quantity("environment.temperature", t, Dimension::Energy, conv)?;
            Some(EnvironmentSpec::new(w * units::HBAR / units::K_B).map_err(|e| config_err("environment", e))?)
        }
    };
    let implementation = match &cfg.implementation {
        ImplementationConfig::Abstract => ResolvedImplementation::Abstract,
        ImplementationConfig::Wire(w) => {
            let a = match &w.a {
                Some(s) => quantity("implementation.a", s, Dimension::Length, conv)?,
                None => drive.map(|d| d.a).ok_or_else(|| Error::Config {
                    key: "implementation.a".into(),
                    msg: "wire spacing missing and no drive to take it from".into(),
                })?,
            };
            let cross_section = match &w.cross_section {
                Some([wd, ht]) => (
                    quantity("implementation.cross_section[0]", wd, Dimension::Length, conv)?,
                    quantity("implementation.cross_section[1]", ht, Dimension::Length, conv)?,
                ),
                None => WireGeometry::reference().cross_section,
            };
            let omega = match &w.omega {
                Some(s) => quantity("implementation.omega", s, Dimension::Energy, conv)?,
                None => drive.map(|d| d.omega).unwrap_or(0.0),
            };
            let g = WireGeometry {
                n_wires: w.n_wires,
                a,
                d: quantity("implementation.d", &w.d, Dimension::Length, conv)?,
                current: quantity("implementation.current", &w.current, Dimension::Current, conv)?,
                omega,
                cross_section,
            };
            g.validate().map_err(|e| config_err("implementation", e))?;
            ResolvedImplementation::Wire(g)
        }
        ImplementationConfig::Saw(s) => {
            let f = SawFilmSpec {
                thickness: quantity("implementation.thickness", &s.thickness, Dimension::Length, conv)?,
                saturation: quantity("implementation.saturation", &s.saturation, Dimension::Field, conv)?,
                gilbert_alpha: s.gilbert_alpha,
                g_film: s.g_film,
                magnetoelastic: quantity("implementation.magnetoelastic", &s.magnetoelastic, Dimension::Field, conv)?,
                strain: s.strain,
                frequency: quantity("implementation.frequency", &s.frequency, Dimension::Energy, conv)? / std::f64::consts::TAU,
                sound_speed: quantity("implementation.sound_speed", &s.sound_speed, Dimension::Speed, conv)?,
            };
            f.validate().map_err(|e| config_err("implementation", e))?;
            ResolvedImplementation::Saw(f)
        }
    };
    Ok(Resolved { material, drive, environment, implementation, convention: conv, seed: cfg.seed })
}

/// Output of one analysis.
#[derive(Debug, Clone, Default)]
pub struct AnalysisOutput {
    pub value: Value,
    pub tables: Vec<Table>,
    pub checks: Vec<Check>,
    /// Extra files (name, contents).
    pub files: Vec<(String, Vec<u8>)>,
}

fn need<'a, T>(x: &'a Option<T>, key: &str, what: &str) -> Result<&'a T> {
    x.as_ref().ok_or_else(|| Error::Config { key: key.to_string(), msg: format!("{what} requires `{key}`") })
}

fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(serde_json::to_value(x)?)
}

/// Runs one analysis against resolved inputs.
pub fn run_analysis(res: &Resolved, analysis: &Analysis) -> Result<AnalysisOutput> {
    let kind = analysis.kind();
    let conv = res.convention;
    let mut out = AnalysisOutput::default();
    match analysis {
        Analysis::TrapCheck { thresholds } => {
            let m = need(&res.material, "material", kind)?;
            let d = need(&res.drive, "drive", kind)?;
            let e = need(&res.environment, "environment", kind)?;
            let r = trap::check_requirements(m, d, e, &thresholds.unwrap_or_default())?;
            let mut t = Table::new(
                "trap_check",
                &[("chain", "-"), ("condition", "-"), ("lhs", "ueV"), ("rhs", "ueV"), ("ratio", "1"), ("threshold", "1"), ("ok", "-")],
            );
            for (chain, ms) in [("shared", &r.chain), ("plus", &r.chain_plus), ("minus", &r.chain_minus)] {
                for mg in ms {
                    t.push(vec![
                        chain.into(),
                        mg.name.clone(),
                        num(mg.lhs_uev),
                        num(mg.rhs_uev),
                        num(mg.ratio),
                        num(mg.threshold),
                        mg.ok.to_string(),
                    ]);
                }
            }
            out.value = to_value(&r)?;
            out.tables.push(t);
        }
        Analysis::Spectrum { grid } => {
            let m = need(&res.material, "material", kind)?;
            let d = need(&res.drive, "drive", kind)?;
            let r = trap::spectrum_comparison(m, d, &grid.unwrap_or_default())?;
            let mut t = Table::new(
                "spectrum",
                &[("sublattice", "-"), ("level", "1"), ("adiabatic", "ueV"), ("spinor", "ueV"), ("deviation", "E_R")],
            );
            for (name, lc) in [("plus", &r.plus), ("minus", &r.minus)] {
                for i in 0..lc.adiabatic_uev.len() {
                    t.push(vec![
                        name.into(),
                        i.to_string(),
                        num(lc.adiabatic_uev[i]),
                        num(lc.spinor_uev[i]),
                        num(lc.deviation[i]),
                    ]);
                }
            }
            out.value = to_value(&r)?;
            out.tables.push(t);
        }
        Analysis::WireField { x_over_a, samples_per_period } => {
            let ResolvedImplementation::Wire(g) = &res.implementation else {
                return Err(Error::Config { key: "implementation".into(), msg: "wire_field needs a wire implementation".into() });
            };
            let gf = res.material.as_ref().map(|m| m.g_factor).unwrap_or(2.0);
            let omega0 = res.drive.map(|d| d.omega0).unwrap_or(0.0);
            let report = wire::wire_report(g, gf, omega0, *samples_per_period)?;
            let n = (g.n_wires as f64 + 1.0) * *samples_per_period as f64;
            let nz = n.round() as usize + 1;
            let zs: Vec<f64> = (0..nz).map(|i| g.a * (-1.0 + (g.n_wires as f64 + 1.0) * i as f64 / (nz - 1) as f64)).collect();
            let xs: Vec<f64> = x_over_a.iter().map(|x| x * g.a).collect();
            let map = wire::digamma_map(g, &zs, &xs)?;
            let mut t = Table::new("wire_field", &[("z", "m"), ("x", "m"), ("b_x", "T"), ("b_z", "T")]);
            for (ix, x) in map.x.iter().enumerate() {
                for (iz, z) in map.z.iter().enumerate() {
                    let (bx, bz) = map.at(ix, iz);
                    t.push(vec![num(*z), num(*x), num(bx), num(bz)]);
                }
            }
            out.value = to_value(&report)?;
            out.tables.push(t);
        }
        Analysis::Rabi {} => {
            let ResolvedImplementation::Wire(g) = &res.implementation else {
                return Err(Error::Config { key: "implementation".into(), msg: "rabi needs a wire implementation".into() });
            };
            let m = need(&res.material, "material", kind)?;
            let r = wire::rabi_amplitudes(g.d, g.a, g.current, m.g_factor)?;
            let mut t = Table::new("rabi", &[("d", "m"), ("a", "m"), ("current", "A"), ("g", "1"), ("rabi_x", "ueV"), ("rabi_z", "ueV")]);
            t.push(vec![num(g.d), num(g.a), num(g.current), num(m.g_factor), num(r.x_uev), num(r.z_uev)]);
            out.value = to_value(&r)?;
            out.tables.push(t);
        }
        Analysis::SawStray { x_over_a, frequencies, tol } => {
            let ResolvedImplementation::Saw(f) = &res.implementation else {
                return Err(Error::Config { key: "implementation".into(), msg: "saw_stray needs a saw implementation".into() });
            };
            let freqs = match frequencies {
                None => vec![f.frequency],
                Some(v) => v
                    .iter()
                    .enumerate()
                    .map(|(i, s)| quantity(&format!("frequencies[{i}]"), s, Dimension::Energy, conv).map(|w| w / std::f64::consts::TAU))
                    .collect::<Result<Vec<f64>>>()?,
            };
            let rows = saw::stray_sweep(f, &freqs, x_over_a, *tol)?;
            let mut t = Table::new("saw_stray", &[("frequency", "Hz"), ("x_over_a", "1"), ("b1", "T")]);
            for r in &rows {
                t.push(vec![num(r.frequency), num(r.x_over_a), num(r.b1)]);
            }
            let mut per_freq = Vec::new();
            for &fr in &freqs {
                let film = SawFilmSpec { frequency: fr, ..*f };
                let dm = saw::dynamic_magnetization(&film)?;
                let pts: Vec<&saw::StrayRow> = rows.iter().filter(|r| r.frequency == fr).collect();
                let xs: Vec<f64> = pts.iter().map(|r| r.x_over_a * film.lattice_const()).collect();
                let bs: Vec<f64> = pts.iter().map(|r| r.b1).collect();
                let slope = if xs.len() >= 2 { Some(saw::log_slope(&xs, &bs)?) } else { None };
                per_freq.push(json!({
                    "frequency": fr,
                    "magnetization": dm,
                    "log_slope": slope,
                    "sheet_slope": -std::f64::consts::TAU / film.wavelength(),
                }));
            }
            out.value = json!({ "rows": rows, "films": per_freq });
            out.tables.push(t);
        }
        Analysis::Hybrid { v_saw, e_s } => {
            let m = need(&res.material, "material", kind)?;
            let d = need(&res.drive, "drive", kind)?;
            let v = quantity("v_saw", v_saw, Dimension::Energy, conv)?;
            let es = match e_s {
                Some(s) => quantity("e_s", s, Dimension::Energy, conv)?,
                None => {
                    let vel = d.omega / d.k;
                    0.5 * m.mass_kg() * vel * vel / units::HBAR
                }
            };
            let u = units::to_uev;
            let h = saw::hybrid_potential(u(d.rabi), u(d.delta), u(v), u(es))?;
            let sp = StabilityParams { q: v.abs() / es, r: d.rabi * d.rabi / (4.0 * es * d.delta.abs()), eta: d.delta.abs() / d.omega };
            let verdict = stability::classify(sp, &ClassifyConfig::default())?;
            let mut t = Table::new(
                "hybrid",
                &[("v0_plus", "ueV"), ("v0_minus", "ueV"), ("q", "1"), ("r", "1"), ("eta", "1"), ("stable", "-")],
            );
            t.push(vec![num(h.v0_plus), num(h.v0_minus), num(h.q), num(h.r), num(sp.eta), verdict.stable.to_string()]);
            out.value = json!({ "e_s_uev": u(es), "potential": h, "stability": verdict });
            out.tables.push(t);
        }
        Analysis::Bands { n_q, n_bands, potential } => {
            let cfg = BandConfig { n_bands: *n_bands, ..BandConfig::default() };
            let (pot, e_r_uev) = match potential {
                BandPotential::Sin2 { v0_over_er } => (PeriodicPotential::sin2(*v0_over_er), None),
                BandPotential::Adiabatic { sublattice } => {
                    let m = need(&res.material, "material", kind)?;
                    let d = need(&res.drive, "drive", kind)?;
                    let e_r = units::uev(units::recoil_energy(d.a, m.eff_mass));
                    (PeriodicPotential::adiabatic(d.rabi / e_r, d.delta / e_r, *sublattice), Some(units::to_uev(e_r)))
                }
            };
            let b = lattice::band_structure(&pot, *n_q, &cfg)?;
            let mut t = Table::new("bands", &[("kappa", "1"), ("band", "1"), ("energy", "E_R")]);
            for (k, es) in b.kappa.iter().zip(&b.energies) {
                for (i, e) in es.iter().enumerate() {
                    t.push(vec![num(*k), i.to_string(), num(*e)]);
                }
            }
            let residual = lattice::hubbard::dispersion_fit_residual(&b);
            out.value = json!({
                "e_r_uev": e_r_uev,
                "n_max": b.n_max,
                "t_c_numeric_er": lattice::hubbard::tc_numeric(&b),
                "dispersion_residual": residual,
                "bandwidth_er": b.bandwidth(0),
                "gap_er": b.gap_above(0),
                "bands": b,
            });
            out.tables.push(t);
        }
        Analysis::Hubbard { n_sites, omega_dr, omega_3, d_scr, u_over_tc, z0_over_a, u_sublattice, disorder } => {
            let m = need(&res.material, "material", kind)?;
            let d = need(&res.drive, "drive", kind)?;
            let mut disorder = disorder.clone();
            if let (Disorder::Uniform { seed, .. }, Some(s)) = (&mut disorder, res.seed) {
                *seed = s;
            }
            let opts = HubbardOptions {
                n_sites: *n_sites,
                omega_dr: opt_quantity("omega_dr", omega_dr, Dimension::Energy, conv)?.unwrap_or(0.0),
                omega_3: opt_quantity("omega_3", omega_3, Dimension::Energy, conv)?.unwrap_or(0.0),
                d_scr: opt_quantity("d_scr", d_scr, Dimension::Length, conv)?,
                u_over_tc: *u_over_tc,
                z0_over_a: *z0_over_a,
                u_sublattice: *u_sublattice,
                disorder,
                bands: BandConfig::default(),
            };
            let h = lattice::hubbard_params(m, d, &opts)?;
            let mut t = Table::new(
                "hubbard",
                &[("e_r", "ueV"), ("v0", "ueV"), ("t_c", "ueV"), ("t_c_numeric_minus", "ueV"), ("t_pm", "ueV"), ("t_rat", "1"), ("t_soi", "ueV"), ("u", "ueV")],
            );
            t.push(vec![
                num(h.e_r_uev),
                num(h.v0_uev),
                num(h.t_c_uev),
                num(h.t_c_numeric_minus_uev),
                num(h.t_pm_uev),
                num(h.t_rat),
                num(h.t_soi_uev),
                num(h.u_uev),
            ]);
            out.value = to_value(&h)?;
            out.tables.push(t);
        }
        Analysis::FloquetCompare { delta_over_omega, rabi_over_omega, orders, n_periods, tol } => {
            let mut t = Table::new(
                "floquet_compare",
                &[("delta_over_omega", "1"), ("rabi_over_omega", "1"), ("order", "1"), ("max_distance", "1")],
            );
            let mut runs = Vec::new();
            for &r in rabi_over_omega {
                for &o in orders {
                    let c = spin::stroboscopic_error(*delta_over_omega, r, o, *n_periods, *tol)?;
                    t.push(vec![num(*delta_over_omega), num(r), o.to_string(), num(c.max_distance)]);
                    runs.push(json!({ "rabi_over_omega": r, "comparison": c }));
                }
            }
            out.value = Value::Array(runs);
            out.tables.push(t);
        }
        Analysis::StabilityDiagram { q, r, eta, pbm } => {
            let qs = q.values().map_err(|e| config_err("q", e))?;
            let rs = r.values().map_err(|e| config_err("r", e))?;
            let pts = stability::diagram(&qs, &rs, *eta, &ClassifyConfig::default());
            let mut t = Table::new("stability_diagram", &[("q", "1"), ("r", "1"), ("eta", "1"), ("stable", "-"), ("exponent", "1")]);
            let mut failed = 0usize;
            let mut grid = vec![None; pts.len()];
            for (i, p) in pts.iter().enumerate() {
                let (qq, rr) = (qs[i % qs.len()], rs[i / qs.len()]);
                match p {
                    Ok(p) => {
                        grid[i] = Some(p.stable);
                        t.push(vec![num(qq), num(rr), num(*eta), p.stable.to_string(), num(p.growth_exponent)]);
                    }
                    Err(_) => {
                        failed += 1;
                        t.push(vec![num(qq), num(rr), num(*eta), "failed".into(), "nan".into()]);
                    }
                }
            }
            if *pbm {
                out.files.push(("stability_diagram.pbm".into(), pbm_bitmap(&grid, qs.len(), rs.len())));
            }
            let stable = grid.iter().filter(|g| **g == Some(true)).count();
            out.value = json!({ "eta": eta, "nq": qs.len(), "nr": rs.len(), "stable": stable, "failed": failed });
            out.tables.push(t);
        }
        Analysis::HoppingSweep { drive_over_rabi, rabi_over_delta, n_b_sqrt, n_sites } => {
            let xs = drive_over_rabi.values().map_err(|e| config_err("drive_over_rabi", e))?;
            let ys = rabi_over_delta.values().map_err(|e| config_err("rabi_over_delta", e))?;
            let pts = lattice::hopping_ratio_sweep(&xs, &ys, *n_b_sqrt, *n_sites)?;
            let mut t = Table::new("hopping_sweep", &[("drive_over_rabi", "1"), ("rabi_over_delta", "1"), ("t_rat", "1"), ("log10_t_rat", "1")]);
            for p in &pts {
                t.push(vec![num(p.drive_over_rabi), num(p.rabi_over_delta), num(p.t_rat), num(p.log10_t_rat)]);
            }
            out.value = json!({ "n_b_sqrt": n_b_sqrt, "points": pts.len(), "contour_1": contour_present(&pts, 1.0) });
            out.tables.push(t);
        }
        Analysis::Table1 { wire, saw } => {
            let mut lv = FieldLevels::default();
            let parse2 = |k: &str, v: &[String; 2]| -> Result<[f64; 2]> {
                Ok([
                    quantity(&format!("{k}[0]"), &v[0], Dimension::Field, conv)?,
                    quantity(&format!("{k}[1]"), &v[1], Dimension::Field, conv)?,
                ])
            };
            if let Some(w) = wire {
                lv.wire = parse2("wire", w)?;
            }
            if let Some(s) = saw {
                lv.saw = parse2("saw", s)?;
            }
            let cells = table1::table1(&lv);
            out.tables.push(table1::table1_csv(&cells));
            out.value = json!({ "levels": lv, "cells": cells });
        }
        Analysis::CaseStudy { name } => {
            let cs = case_study::case_study(name)?;
            let r = case_study::run_case_study(&cs, None)?;
            let mut t = Table::new(
                "case_study",
                &[("case", "-"), ("quantity", "-"), ("value", "ueV"), ("expected", "ueV"), ("rel_diff", "1"), ("pass", "-")],
            );
            for c in &r.checks {
                t.push(vec![r.name.clone(), c.quantity.clone(), num(c.value), num(c.expected), num(c.rel_diff), c.pass.to_string()]);
            }
            out.checks = r.checks.clone();
            out.value = to_value(&r)?;
            out.tables.push(t);
        }
    }
    Ok(out)
}

/// True when some pair of neighbouring points along Ω_dr/Ω₀ straddles
/// `level`.
pub fn contour_present(pts: &[lattice::SweepPoint], level: f64) -> bool {
    pts.windows(2).any(|w| {
        w[0].rabi_over_delta == w[1].rabi_over_delta && (w[0].t_rat - level) * (w[1].t_rat - level) <= 0.0
    })
}

/// Plain PBM (P1), stable points black, highest r on top.
pub fn pbm_bitmap(grid: &[Option<bool>], nq: usize, nr: usize) -> Vec<u8> {
    let mut s = format!("P1\n{nq} {nr}\n");
    for ir in (0..nr).rev() {
        let row: Vec<&str> = (0..nq).map(|iq| if grid[ir * nq + iq] == Some(true) { "1" } else { "0" }).collect();
        s.push_str(&row.join(" "));
        s.push('\n');
    }
    s.into_bytes()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub schema_version: u32,
    pub name: String,
    pub config: ScenarioConfig,
    pub inputs: Resolved,
    pub results: BTreeMap<String, Value>,
    pub checks: Vec<Check>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub strict: bool,
    pub out_dir: Option<PathBuf>,
    pub format: Option<Format>,
    pub seed: Option<u64>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub report: ScenarioReport,
    pub tables: Vec<Table>,
    /// Set when an expectation failed (exit code 3).
    pub mismatch: Option<Error>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        self.mismatch.as_ref().map_or(0, Error::exit_code)
    }
}

/// Loads, runs and (if an output directory is set) writes a scenario.
pub fn run_scenario(path: &Path, opts: &RunOptions) -> Result<RunOutcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config { key: "<file>".into(), msg: format!("{}: {e}", path.display()) })?;
    let loaded = parse_scenario(&text, opts.strict)?;
    run_config(loaded, opts)
}

pub fn run_config(loaded: LoadedScenario, opts: &RunOptions) -> Result<RunOutcome> {
    let mut cfg = loaded.config;
    if opts.seed.is_some() {
        cfg.seed = opts.seed;
    }
    let res = resolve(&cfg)?;
    let mut results = BTreeMap::new();
    let mut checks = Vec::new();
    let mut tables = Vec::new();
    let mut extra = Vec::new();
    for (i, a) in cfg.analyses.iter().enumerate() {
        let out = run_analysis(&res, a).map_err(|e| match e {
            Error::Invalid(msg) => Error::Config { key: format!("analyses[{i}]"), msg },
            other => other,
        })?;
        let mut id = a.kind().to_string();
        let mut n = 2;
        while results.contains_key(&id) {
            id = format!("{}_{n}", a.kind());
            n += 1;
        }
        for mut t in out.tables {
            if id != a.kind() {
                t.name = format!("{id}_{}", t.name);
            }
            tables.push(t);
        }
        extra.extend(out.files);
        checks.extend(out.checks);
        results.insert(id, out.value);
    }
    let results_value = serde_json::to_value(&results)?;
    for (i, e) in cfg.expectations.iter().enumerate() {
        e.tolerance.validate().map_err(|err| config_err(&format!("expectations[{i}]"), err))?;
        let v = results_value.pointer(&e.quantity).and_then(Value::as_f64).ok_or_else(|| Error::Config {
            key: format!("expectations[{i}].quantity"),
            msg: format!("{} does not name a number in the results", e.quantity),
        })?;
        checks.push(Check::new(&e.quantity, v, e.value, e.tolerance));
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.pass)
        .map(|c| format!("{}: {} vs {} ({:+.1}%)", c.quantity, c.value, c.expected, 100.0 * c.rel_diff))
        .collect();
    let mismatch = (!failed.is_empty()).then(|| Error::Mismatch(failed.join("; ")));
    let format = opts.format.unwrap_or(cfg.output.format);
    let out_dir = opts.out_dir.clone().or_else(|| cfg.output.dir.as_ref().map(PathBuf::from));
    let mut files = Vec::new();
    if out_dir.is_some() {
        files.push("report.json".to_string());
        if format == Format::Csv {
            files.extend(tables.iter().map(|t| format!("{}.csv", t.name)));
        }
        files.extend(extra.iter().map(|f| f.0.clone()));
    }
    let report = ScenarioReport {
        schema_version: SCHEMA_VERSION,
        name: cfg.name.clone(),
        config: cfg,
        inputs: res,
        results,
        passed: checks.iter().all(|c| c.pass),
        checks,
        warnings: loaded.unknown_keys.iter().map(|k| format!("unknown key ignored: {k}")).collect(),
        files,
    };
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(&dir)?;
        if format == Format::Csv {
            for t in &tables {
                std::fs::write(dir.join(format!("{}.csv", t.name)), t.to_csv())?;
            }
        }
        for (name, bytes) in &extra {
            std::fs::write(dir.join(name), bytes)?;
        }
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        std::fs::write(dir.join("report.json"), text)?;
    }
    Ok(RunOutcome { report, tables, mismatch })
}

/// Machine-readable error record.
pub fn error_json(e: &Error) -> Value {
    let mut v = json!({ "error": { "kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code() } });
    if let Error::Config { key, .. } = e {
        v["error"]["key"] = Value::String(key.clone());
    }
    v
}
