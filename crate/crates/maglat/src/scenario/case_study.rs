//! The three worked parameter sets: InAs electrons, InAs heavy holes and
//! InSb heavy holes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{hubbard_params, HubbardOptions, HubbardParams};
use crate::trap::{check_requirements, Thresholds, TrapReport};
use crate::units::{self, DriveSpec, EnvironmentSpec, MaterialSpec};

pub const CASE_STUDIES: [&str; 3] = ["inas_electron", "inas_heavy_hole", "insb_heavy_hole"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Tolerance {
    /// |value/expected − 1| ≤ rel.
    Relative { rel: f64 },
    /// expected/factor ≤ value ≤ expected·factor.
    Factor { factor: f64 },
}

impl Tolerance {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Tolerance::Relative { rel } if rel > 0.0 => Ok(()),
            Tolerance::Factor { factor } if factor > 1.0 => Ok(()),
            _ => Err(Error::Invalid("tolerances must be positive (factor > 1)".into())),
        }
    }

    pub fn accepts(&self, value: f64, expected: f64) -> bool {
        match *self {
            Tolerance::Relative { rel } => (value / expected - 1.0).abs() <= rel,
            Tolerance::Factor { factor } => {
                let r = value / expected;
                r >= 1.0 / factor && r <= factor
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub quantity: String,
    pub value: f64,
    pub tolerance: Tolerance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyExpectation {
    pub name: String,
    pub expected: Vec<Expected>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub quantity: String,
    pub value: f64,
    pub expected: f64,
    pub tolerance: Tolerance,
    /// value/expected − 1.
    pub rel_diff: f64,
    pub pass: bool,
}

impl Check {
    pub fn new(quantity: &str, value: f64, expected: f64, tolerance: Tolerance) -> Self {
        Self {
            quantity: quantity.to_string(),
            value,
            expected,
            tolerance,
            rel_diff: value / expected - 1.0,
            pass: value.is_finite() && tolerance.accepts(value, expected),
        }
    }
}

/// A fully specified worked example.
#[derive(Debug, Clone, Serialize)]
pub struct CaseStudy {
    pub name: String,
    pub material: MaterialSpec,
    pub drive: DriveSpec,
    pub environment: EnvironmentSpec,
    pub expectation: CaseStudyExpectation,
}

fn expectation(name: &str, items: &[(&str, f64, Tolerance)]) -> CaseStudyExpectation {
    CaseStudyExpectation {
        name: name.to_string(),
        expected: items.iter().map(|(q, v, t)| Expected { quantity: q.to_string(), value: *v, tolerance: *t }).collect(),
    }
}

pub fn case_study(name: &str) -> Result<CaseStudy> {
    const EXACT: Tolerance = Tolerance::Relative { rel: 0.05 };
    const TC: Tolerance = Tolerance::Relative { rel: 0.35 };
    const HO: Tolerance = Tolerance::Factor { factor: 2.0 };
    let uev = units::uev;
    let ghz_f = |f: f64| std::f64::consts::TAU * f * 1e9;
    let environment = EnvironmentSpec::new(10e-3)?;
    let phonon = uev(0.3);
    // (material, Ω₀, Δ, f, a, expectations)
    let (mut material, rabi, delta, f, a, exp) = match name {
        "inas_electron" => (
            MaterialSpec::new("InAs electron", 14.9, 0.023),
            86.0,
            1.0,
            22.0,
            900e-9,
            expectation(
                name,
                &[("v0_uev", 43.0, EXACT), ("e_r_uev", 20.0, EXACT), ("omega_uev", 92.0, EXACT), ("t_c_uev", 5.2, TC)],
            ),
        ),
        "inas_heavy_hole" => {
            let mut m = MaterialSpec::new("InAs heavy hole", 14.9, 0.836);
            m.sound_speed = Some(25e3);
            (
                m,
                100.0,
                250.0,
                25.0,
                500e-9,
                expectation(
                    name,
                    &[
                        ("v0_uev", 10.0, EXACT),
                        ("e_r_uev", 1.8, EXACT),
                        ("omega_uev", 103.0, EXACT),
                        ("t_c_uev", 0.2, TC),
                        ("omega_ho_uev", 5.4, HO),
                        ("omega_ho_engineering_uev", 5.4, HO),
                    ],
                ),
            )
        }
        "insb_heavy_hole" => {
            let mut m = MaterialSpec::new("InSb heavy hole", 70.0, 0.627);
            m.sound_speed = Some(10e3);
            (
                m,
                200.0,
                25.0,
                50.0,
                100e-9,
                expectation(
                    name,
                    &[("v0_uev", 90.0, EXACT), ("e_r_uev", 60.0, EXACT), ("omega_uev", 207.0, EXACT), ("t_c_uev", 18.0, TC)],
                ),
            )
        }
        other => {
            return Err(Error::Config {
                key: "case_study.name".into(),
                msg: format!("unknown case study {other:?}; expected one of {}", CASE_STUDIES.join(", ")),
            })
        }
    };
    material.phonon_rate = phonon;
    material.dielectric_const = if name.starts_with("insb") { 16.8 } else { 15.15 };
    let drive = DriveSpec::from_energies(material.g_factor, uev(rabi), uev(delta), ghz_f(f), a)?;
    Ok(CaseStudy { name: name.to_string(), material, drive, environment, expectation: exp })
}

#[derive(Debug, Clone, Serialize)]
pub struct CaseStudyReport {
    pub name: String,
    pub material: MaterialSpec,
    pub drive: DriveSpec,
    pub environment: EnvironmentSpec,
    pub trap: TrapReport,
    /// Headline t_c from the tight-binding estimate, μeV.
    pub t_c_uev: f64,
    pub hubbard: Option<HubbardParams>,
    pub hubbard_error: Option<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl CaseStudyReport {
    pub fn quantity(&self, q: &str) -> Option<f64> {
        match q {
            "v0_uev" => Some(self.trap.v0_uev),
            "e_r_uev" => Some(self.trap.e_r_uev),
            "omega_uev" => Some(self.trap.omega_uev),
            "rabi_uev" => Some(self.trap.rabi_uev),
            "delta_uev" => Some(self.trap.delta_uev),
            "t_c_uev" => Some(self.t_c_uev),
            "omega_ho_uev" => self.trap.omega_ho_uev,
            "omega_ho_engineering_uev" => self.trap.omega_ho_engineering_uev,
            "omega_ho_perturbative_uev" => self.trap.omega_ho_perturbative_uev,
            "t_c_numeric_uev" => self.hubbard.as_ref().map(|h| h.t_c_numeric_minus_uev),
            _ => None,
        }
    }

    /// Per-quantity diff of the failed checks.
    pub fn mismatch(&self) -> Option<Error> {
        let bad: Vec<String> = self
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {:.4} vs {:.4} ({:+.1}%)", c.quantity, c.value, c.expected, 100.0 * c.rel_diff))
            .collect();
        (!bad.is_empty()).then(|| Error::Mismatch(format!("{}: {}", self.name, bad.join("; "))))
    }
}

/// Runs the trap checks and the lattice parameters for `cs` and compares
/// against its expectations, or `overrides` when given.
pub fn run_case_study(cs: &CaseStudy, overrides: Option<&CaseStudyExpectation>) -> Result<CaseStudyReport> {
    let exp = overrides.unwrap_or(&cs.expectation);
    for e in &exp.expected {
        e.tolerance.validate()?;
    }
    let trap = check_requirements(&cs.material, &cs.drive, &cs.environment, &Thresholds::default())?;
    let e_r = units::uev(trap.e_r_uev);
    let v0 = units::uev(trap.v0_uev);
    let t_c = crate::lattice::hopping_tc(v0, e_r, None)?.analytic;
    let (hubbard, hubbard_error) = match hubbard_params(&cs.material, &cs.drive, &HubbardOptions::default()) {
        Ok(h) => (Some(h), None),
        Err(e) => (None, Some(e.to_string())),
    };
    let mut report = CaseStudyReport {
        name: cs.name.clone(),
        material: cs.material.clone(),
        drive: cs.drive,
        environment: cs.environment,
        trap,
        t_c_uev: units::to_uev(t_c),
        hubbard,
        hubbard_error,
        checks: Vec::new(),
        passed: false,
    };
    let mut checks = Vec::with_capacity(exp.expected.len());
    for e in &exp.expected {
        let v = report.quantity(&e.quantity).ok_or_else(|| Error::Config {
            key: format!("expectations.{}", e.quantity),
            msg: "unknown or unavailable quantity".into(),
        })?;
        checks.push(Check::new(&e.quantity, v, e.value, e.tolerance));
    }
    report.passed = checks.iter().all(|c| c.pass);
    report.checks = checks;
    Ok(report)
}
