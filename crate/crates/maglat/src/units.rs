//! Physical constants, unit conversion and the shared parameter records.
//!
//! Energies are carried internally as angular frequencies in rad/s (ħ = 1),
//! lengths in metres, masses in kilograms and fields in tesla. User-facing
//! values are in μeV, GHz, mT, nm and mK.
//!
//! "GHz" without qualification is an *angular* unit, 10⁹ rad/s, so that
//! 380 GHz corresponds to 250 μeV. Cycle frequencies f are only accepted where
//! a field is explicitly a frequency (for example `frequency` in a scenario),
//! and are converted with ω = 2πf.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Elementary charge, C.
pub const E_CHARGE: f64 = 1.602_176_634e-19;
/// Bohr magneton, J/T.
pub const MU_B: f64 = 9.274_010_078_3e-24;
/// Boltzmann constant, J/K.
pub const K_B: f64 = 1.380_649e-23;
/// Electron rest mass, kg.
pub const M_E: f64 = 9.109_383_701_5e-31;
/// Vacuum permeability, T·m/A.
pub const MU_0: f64 = 1.256_637_062_12e-6;
/// Vacuum permittivity, F/m.
pub const EPS_0: f64 = 8.854_187_812_8e-12;
/// Speed of light in vacuum, m/s.
pub const C_LIGHT: f64 = 299_792_458.0;

/// One μeV in joules.
pub const UEV_J: f64 = 1.0e-6 * E_CHARGE;
/// One μeV expressed as an angular frequency, rad/s.
pub const UEV_RAD: f64 = UEV_J / HBAR;

/// Bohr magneton in μeV/T.
pub fn mu_b_uev_per_t() -> f64 {
    MU_B / UEV_J
}

/// Boltzmann constant in μeV/K.
pub fn k_b_uev_per_k() -> f64 {
    K_B / UEV_J
}

/// μeV → rad/s.
#[inline]
pub fn uev(x: f64) -> f64 {
    x * UEV_RAD
}

/// rad/s → μeV.
#[inline]
pub fn to_uev(w: f64) -> f64 {
    w / UEV_RAD
}

/// Physical dimension of a quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dimension {
    /// Energy, temperature and angular frequency (all interconvertible).
    Energy,
    Length,
    Field,
    Mass,
    Speed,
    Current,
    CurrentDensity,
    Dimensionless,
}

/// How a bare `Hz`/`GHz` token is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqConvention {
    /// `GHz` means 10⁹ rad/s.
    Angular,
    /// `GHz` means 10⁹ cycles per second, ω = 2πf.
    Cycle,
}

/// The units understood by [`convert`] and [`parse_quantity`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unit {
    MicroElectronVolt,
    MilliElectronVolt,
    ElectronVolt,
    Joule,
    Kelvin,
    MilliKelvin,
    RadPerSecond,
    /// 10³ rad/s.
    KiloHertzAngular,
    /// 10⁶ rad/s.
    MegaHertzAngular,
    /// 10⁹ rad/s.
    GigaHertzAngular,
    /// Cycles per second.
    Hertz,
    KiloHertz,
    MegaHertz,
    GigaHertz,
    Meter,
    Micrometer,
    Nanometer,
    Tesla,
    MilliTesla,
    MicroTesla,
    ElectronMass,
    Kilogram,
    MeterPerSecond,
    KilometerPerSecond,
    Ampere,
    MilliAmpere,
    AmperePerSquareMeter,
    MegaAmperePerSquareCentimeter,
    One,
}

impl Unit {
    pub fn dimension(self) -> Dimension {
        use Unit::*;
        match self {
            MicroElectronVolt | MilliElectronVolt | ElectronVolt | Joule | Kelvin | MilliKelvin
            | RadPerSecond | KiloHertzAngular | MegaHertzAngular | GigaHertzAngular | Hertz
            | KiloHertz | MegaHertz | GigaHertz => Dimension::Energy,
            Meter | Micrometer | Nanometer => Dimension::Length,
            Tesla | MilliTesla | MicroTesla => Dimension::Field,
            ElectronMass | Kilogram => Dimension::Mass,
            MeterPerSecond | KilometerPerSecond => Dimension::Speed,
            Ampere | MilliAmpere => Dimension::Current,
            AmperePerSquareMeter | MegaAmperePerSquareCentimeter => Dimension::CurrentDensity,
            One => Dimension::Dimensionless,
        }
    }

    /// Multiplier taking a value in this unit to the internal base unit
    /// (rad/s, m, T, kg, m/s, A, A/m²).
    pub fn to_base(self) -> f64 {
        use std::f64::consts::TAU;
        use Unit::*;
        match self {
            MicroElectronVolt => UEV_RAD,
            MilliElectronVolt => 1.0e3 * UEV_RAD,
            ElectronVolt => 1.0e6 * UEV_RAD,
            Joule => 1.0 / HBAR,
            Kelvin => K_B / HBAR,
            MilliKelvin => 1.0e-3 * K_B / HBAR,
            RadPerSecond => 1.0,
            KiloHertzAngular => 1.0e3,
            MegaHertzAngular => 1.0e6,
            GigaHertzAngular => 1.0e9,
            Hertz => TAU,
            KiloHertz => TAU * 1.0e3,
            MegaHertz => TAU * 1.0e6,
            GigaHertz => TAU * 1.0e9,
            Meter => 1.0,
            Micrometer => 1.0e-6,
            Nanometer => 1.0e-9,
            Tesla => 1.0,
            MilliTesla => 1.0e-3,
            MicroTesla => 1.0e-6,
            ElectronMass => M_E,
            Kilogram => 1.0,
            MeterPerSecond => 1.0,
            KilometerPerSecond => 1.0e3,
            Ampere => 1.0,
            MilliAmpere => 1.0e-3,
            AmperePerSquareMeter => 1.0,
            MegaAmperePerSquareCentimeter => 1.0e10,
            One => 1.0,
        }
    }

    /// Parses a unit token. Frequency tokens follow `conv`; the explicit
    /// spellings `rad/s`, `Grad/s`, `Mrad/s` and `GHz_f`/`MHz_f`/`Hz_f`
    /// ignore it.
    pub fn parse(token: &str, conv: FreqConvention) -> Option<Unit> {
        use Unit::*;
        let angular = conv == FreqConvention::Angular;
        let u = match token {
            "ueV" | "μeV" | "µeV" => MicroElectronVolt,
            "meV" => MilliElectronVolt,
            "eV" => ElectronVolt,
            "J" => Joule,
            "K" => Kelvin,
            "mK" => MilliKelvin,
            "rad/s" => RadPerSecond,
            "krad/s" => KiloHertzAngular,
            "Mrad/s" => MegaHertzAngular,
            "Grad/s" => GigaHertzAngular,
            "Hz" if angular => RadPerSecond,
            "kHz" if angular => KiloHertzAngular,
            "MHz" if angular => MegaHertzAngular,
            "GHz" if angular => GigaHertzAngular,
            "Hz" | "Hz_f" => Hertz,
            "kHz" | "kHz_f" => KiloHertz,
            "MHz" | "MHz_f" => MegaHertz,
            "GHz" | "GHz_f" => GigaHertz,
            "m" => Meter,
            "um" | "μm" | "µm" => Micrometer,
            "nm" => Nanometer,
            "T" => Tesla,
            "mT" => MilliTesla,
            "uT" | "μT" | "µT" => MicroTesla,
            "m0" | "m_e" => ElectronMass,
            "kg" => Kilogram,
            "m/s" => MeterPerSecond,
            "km/s" => KilometerPerSecond,
            "A" => Ampere,
            "mA" => MilliAmpere,
            "A/m2" | "A/m^2" => AmperePerSquareMeter,
            "MA/cm2" | "MA/cm^2" => MegaAmperePerSquareCentimeter,
            "" | "1" => One,
            _ => return None,
        };
        Some(u)
    }

    pub fn symbol(self) -> &'static str {
        use Unit::*;
        match self {
            MicroElectronVolt => "ueV",
            MilliElectronVolt => "meV",
            ElectronVolt => "eV",
            Joule => "J",
            Kelvin => "K",
            MilliKelvin => "mK",
            RadPerSecond => "rad/s",
            KiloHertzAngular => "krad/s",
            MegaHertzAngular => "Mrad/s",
            GigaHertzAngular => "Grad/s",
            Hertz => "Hz_f",
            KiloHertz => "kHz_f",
            MegaHertz => "MHz_f",
            GigaHertz => "GHz_f",
            Meter => "m",
            Micrometer => "um",
            Nanometer => "nm",
            Tesla => "T",
            MilliTesla => "mT",
            MicroTesla => "uT",
            ElectronMass => "m0",
            Kilogram => "kg",
            MeterPerSecond => "m/s",
            KilometerPerSecond => "km/s",
            Ampere => "A",
            MilliAmpere => "mA",
            AmperePerSquareMeter => "A/m2",
            MegaAmperePerSquareCentimeter => "MA/cm2",
            One => "1",
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// Converts `value` from one unit to another of the same dimension.
pub fn convert(value: f64, from: Unit, to: Unit) -> Result<f64> {
    if from == to {
        return Ok(value);
    }
    if from.dimension() != to.dimension() {
        return Err(Error::Units(format!(
            "cannot convert {from} ({:?}) to {to} ({:?})",
            from.dimension(),
            to.dimension()
        )));
    }
    Ok(value * (from.to_base() / to.to_base()))
}

/// Parses strings such as `"250 ueV"`, `"22 GHz"` or `"0.023 m0"` into the
/// internal base unit of `expected`.
pub fn parse_quantity(s: &str, expected: Dimension, conv: FreqConvention) -> Result<f64> {
    let s = s.trim();
    let split = s
        .char_indices()
        .find(|&(i, c)| {
            !(c.is_ascii_digit()
                || c == '.'
                || c == '+'
                || c == '-'
                || ((c == 'e' || c == 'E')
                    && s[i + 1..].starts_with(|n: char| n.is_ascii_digit() || n == '-' || n == '+')))
        })
        .map(|(i, _)| i)
        .unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Units(format!("malformed number in quantity {s:?}")))?;
    if !value.is_finite() {
        return Err(Error::Units(format!("non-finite quantity {s:?}")));
    }
    let unit = Unit::parse(unit.trim(), conv)
        .ok_or_else(|| Error::Units(format!("unknown unit {:?} in {s:?}", unit.trim())))?;
    if unit.dimension() != expected {
        return Err(Error::Units(format!(
            "{s:?} has dimension {:?}, expected {expected:?}",
            unit.dimension()
        )));
    }
    Ok(value * unit.to_base())
}

/// Zeeman energy g·μ_B·B in μeV (B in tesla). Used for Ω₀ = g_s μ_B B₁.
pub fn zeeman_rabi(g_factor: f64, b: f64) -> f64 {
    g_factor.abs() * mu_b_uev_per_t() * b
}

/// Recoil energy h²/(8 m a²) in μeV for lattice constant `a` (m) and mass
/// `m` in units of the electron mass.
pub fn recoil_energy(a: f64, m: f64) -> f64 {
    PLANCK * PLANCK / (8.0 * m * M_E * a * a) / UEV_J
}

/// Host-material constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialSpec {
    pub name: String,
    /// Signed g-factor; formulas use |g|.
    pub g_factor: f64,
    /// Effective mass in units of m₀.
    pub eff_mass: f64,
    /// Sound speed, m/s.
    pub sound_speed: Option<f64>,
    pub dielectric_const: f64,
    /// Rashba velocity α_R, m/s.
    pub rashba: f64,
    /// Dresselhaus velocity β_D, m/s.
    pub dresselhaus: f64,
    /// Spontaneous phonon emission rate, rad/s.
    pub phonon_rate: f64,
    /// Intrinsic two-level linewidth, rad/s.
    pub linewidth: f64,
}

impl MaterialSpec {
    pub fn new(name: &str, g_factor: f64, eff_mass: f64) -> Self {
        Self {
            name: name.to_string(),
            g_factor,
            eff_mass,
            sound_speed: None,
            dielectric_const: 1.0,
            rashba: 0.0,
            dresselhaus: 0.0,
            phonon_rate: 0.0,
            linewidth: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eff_mass > 0.0) {
            return Err(Error::Invalid("material.eff_mass must be positive".into()));
        }
        if !(self.dielectric_const >= 1.0) {
            return Err(Error::Invalid("material.dielectric_const must be >= 1".into()));
        }
        if self.phonon_rate < 0.0 || self.linewidth < 0.0 {
            return Err(Error::Invalid("material rates must be non-negative".into()));
        }
        if let Some(v) = self.sound_speed {
            if !(v > 0.0) {
                return Err(Error::Invalid("material.sound_speed must be positive".into()));
            }
        }
        Ok(())
    }

    /// Mass in kilograms.
    pub fn mass_kg(&self) -> f64 {
        self.eff_mass * M_E
    }
}

/// Drive and geometry. Primary inputs are `b0`, `b1`, `omega`, `a`; the
/// remaining fields are derived by [`DriveSpec::new`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    /// Static field, T.
    pub b0: f64,
    /// RF amplitude, T.
    pub b1: f64,
    /// Drive angular frequency, rad/s.
    pub omega: f64,
    /// Larmor frequency g μ_B B₀/ħ, rad/s.
    pub omega0: f64,
    /// Detuning ω₀ − ω, rad/s.
    pub delta: f64,
    /// Lattice constant, m.
    pub a: f64,
    /// Wavevector π/a, 1/m.
    pub k: f64,
    /// Rabi frequency g μ_B B₁/ħ, rad/s.
    pub rabi: f64,
}

impl DriveSpec {
    pub fn new(g_factor: f64, b0: f64, b1: f64, omega: f64, a: f64) -> Result<Self> {
        if !(a > 0.0) {
            return Err(Error::Invalid("lattice constant must be positive".into()));
        }
        if !(omega >= 0.0) || !(b1 >= 0.0) {
            return Err(Error::Invalid("omega and b1 must be non-negative".into()));
        }
        let g = g_factor.abs();
        let omega0 = g * MU_B * b0 / HBAR;
        Ok(Self {
            b0,
            b1,
            omega,
            omega0,
            delta: omega0 - omega,
            a,
            k: std::f64::consts::PI / a,
            rabi: g * MU_B * b1 / HBAR,
        })
    }

    /// Builds a drive directly from energies (rad/s) as the case studies
    /// quote them; B₀ and B₁ are back-computed from `g_factor`.
    pub fn from_energies(g_factor: f64, rabi: f64, delta: f64, omega: f64, a: f64) -> Result<Self> {
        let g = g_factor.abs();
        if g == 0.0 {
            return Err(Error::Invalid("g-factor must be non-zero to back-compute fields".into()));
        }
        let scale = HBAR / (g * MU_B);
        Self::new(g_factor, (delta + omega) * scale, rabi * scale, omega, a)
    }

    /// Lattice profile Λ(z) = cos(kz).
    pub fn profile(&self, z: f64) -> f64 {
        (self.k * z).cos()
    }

    pub fn validate(&self) -> Result<()> {
        let g_check = |x: f64, y: f64| (x - y).abs() <= 1e-12 * x.abs().max(y.abs()).max(1e-300);
        if !(self.a > 0.0) || !(self.omega >= 0.0) || !(self.rabi >= 0.0) {
            return Err(Error::Invalid("drive: a > 0, omega >= 0, rabi >= 0 required".into()));
        }
        if !g_check(self.delta, self.omega0 - self.omega)
            || !g_check(self.k, std::f64::consts::PI / self.a)
        {
            return Err(Error::Invalid("drive: derived fields inconsistent".into()));
        }
        Ok(())
    }
}

/// Temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    /// Kelvin.
    pub temperature: f64,
}

impl EnvironmentSpec {
    pub fn new(temperature: f64) -> Result<Self> {
        if !(temperature >= 0.0) {
            return Err(Error::Invalid("temperature must be non-negative".into()));
        }
        Ok(Self { temperature })
    }

    /// k_B T as rad/s.
    pub fn thermal_energy(&self) -> f64 {
        K_B * self.temperature / HBAR
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ghz_is_angular_by_default() {
        let d = parse_quantity("380 GHz", Dimension::Energy, FreqConvention::Angular).unwrap();
        assert!((to_uev(d) - 250.1).abs() < 0.05);
    }

    #[test]
    fn cycle_ghz_uses_two_pi() {
        let w = parse_quantity("22 GHz", Dimension::Energy, FreqConvention::Cycle).unwrap();
        assert!((to_uev(w) - 90.98).abs() < 0.01);
        let w2 = parse_quantity("22 GHz_f", Dimension::Energy, FreqConvention::Angular).unwrap();
        assert_eq!(w, w2);
    }

    #[test]
    fn micro_ev_to_millikelvin() {
        let mk = convert(1.0, Unit::MicroElectronVolt, Unit::MilliKelvin).unwrap();
        assert!((mk - 11.6045).abs() < 1e-3);
    }

    #[test]
    fn rejects_mismatched_dimension() {
        assert!(parse_quantity("3 nm", Dimension::Energy, FreqConvention::Angular).is_err());
        assert!(parse_quantity("3 parsec", Dimension::Length, FreqConvention::Angular).is_err());
        assert!(convert(1.0, Unit::Tesla, Unit::Meter).is_err());
    }

    #[test]
    fn exponent_notation() {
        let v = parse_quantity("1e4 m/s", Dimension::Speed, FreqConvention::Angular).unwrap();
        assert_eq!(v, 1e4);
        let v = parse_quantity("2.5E-3 T", Dimension::Field, FreqConvention::Angular).unwrap();
        assert_eq!(v, 2.5e-3);
    }

    #[test]
    fn drive_from_energies_round_trips() {
        let d = DriveSpec::from_energies(14.9, uev(86.0), uev(1.0), uev(92.0), 900e-9).unwrap();
        d.validate().unwrap();
        assert!((to_uev(d.rabi) - 86.0).abs() < 1e-9);
        assert!((to_uev(d.delta) - 1.0).abs() < 1e-9);
    }
}
