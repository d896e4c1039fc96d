//! Trap depth, harmonic frequency, bound-state counts, Majorana loss and the
//! requirement chain γ, k_BT ≪ ω_HO ≲ V₀ ≲ Ω₀/2 ≲ ω/2 for the lattice profile
//! Λ(z) = cos(kz).
//!
//! Potentials are ±ε(z) with ε = ½√(Ω₀²cos²(kz) + Δ²). The |+⟩ sublattice
//! sits at the nodes of Λ, the |−⟩ sublattice at the antinodes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::units::{self, DriveSpec, EnvironmentSpec, MaterialSpec, HBAR, MU_B};

pub mod spectrum;

pub use spectrum::{spectrum_comparison, GridConfig, SpectrumComparison};

/// V₀ = ½(√(Ω₀² + Δ²) − |Δ|).
pub fn trap_depth(rabi: f64, delta: f64) -> f64 {
    let d = delta.abs();
    let r = rabi.abs();
    // rationalized to avoid cancellation when Ω₀ ≪ |Δ|
    0.5 * r * r / (r.hypot(d) + d).max(f64::MIN_POSITIVE)
}

/// ε(z) for Λ = cos(kz).
pub fn epsilon(rabi: f64, delta: f64, k: f64, z: f64) -> f64 {
    0.5 * (rabi * (k * z).cos()).hypot(delta)
}

/// d²ε/dz² for Λ = cos(kz), from u(z) = Ω₀²cos²(kz):
/// ε'' = u''/(4√(u+Δ²)) − u'²/(8(u+Δ²)^{3/2}).
pub fn epsilon_curvature(rabi: f64, delta: f64, k: f64, z: f64) -> f64 {
    let w2 = rabi * rabi;
    let s = (2.0 * k * z).sin();
    let cc = (2.0 * k * z).cos();
    let u = w2 * (k * z).cos().powi(2);
    let du = -w2 * k * s;
    let ddu = -2.0 * w2 * k * k * cc;
    let g = u + delta * delta;
    ddu / (4.0 * g.sqrt()) - du * du / (8.0 * g.powf(1.5))
}

/// Harmonic frequencies (rad/s) from the different routes.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HarmonicFrequency {
    /// √(ε''/m) at the ε minimum (|+⟩ sublattice, node of Λ).
    pub exact: f64,
    /// (π/a)·Ω₀·√(ħ/(2m|Δ|)).
    pub perturbative: f64,
    /// Curvature of −ε at the antinode (|−⟩ sublattice).
    pub minus_sublattice: f64,
    /// 118 MHz·√((|g|/g₀)²/m[m₀])·B₁[mT]/(a[μm]·√|Δ[GHz]|), g₀ = 2, MHz and
    /// GHz read as 10⁶ and 10⁹ rad/s.
    pub engineering: f64,
}

/// `mass` in kg; energies in rad/s. `g_factor` only enters the engineering
/// branch through B₁ = ħΩ₀/(|g|μ_B), where it cancels.
pub fn harmonic_frequency(rabi: f64, delta: f64, a: f64, mass: f64) -> Result<HarmonicFrequency> {
    if !(a > 0.0) || !(mass > 0.0) {
        return Err(Error::Invalid("lattice constant and mass must be positive".into()));
    }
    let k = std::f64::consts::PI / a;
    if delta == 0.0 {
        return Err(Error::Invalid("Δ = 0: ε has a cusp at the node, no harmonic frequency".into()));
    }
    let curv = epsilon_curvature(rabi, delta, k, 0.5 * a);
    if !(curv > 0.0) {
        return Err(Error::Invalid(format!("flat trap: ε''(z_min) = {curv:e} <= 0")));
    }
    let exact = (HBAR * curv / mass).sqrt();
    let perturbative = k * rabi.abs() * (HBAR / (2.0 * mass * delta.abs())).sqrt();
    let curv_minus = -epsilon_curvature(rabi, delta, k, 0.0);
    let minus_sublattice = (HBAR * curv_minus.max(0.0) / mass).sqrt();
    let gb1_mt = HBAR * rabi.abs() / MU_B * 1e3;
    let engineering = 118e6 * (gb1_mt / 2.0) / (mass / units::M_E).sqrt() / (a * 1e6 * (delta.abs() / 1e9).sqrt());
    Ok(HarmonicFrequency { exact, perturbative, minus_sublattice, engineering })
}

/// (V₀/ω_HO, √(V₀/(4E_R))).
pub fn bound_state_counts(v0: f64, omega_ho: f64, e_r: f64) -> Result<(f64, f64)> {
    if !(v0 > 0.0) || !(omega_ho > 0.0) || !(e_r > 0.0) {
        return Err(Error::Invalid("bound-state counts need positive V0, omega_HO, E_R".into()));
    }
    Ok((v0 / omega_ho, (v0 / (4.0 * e_r)).sqrt()))
}

/// η = 2π·exp(−4/χ).
pub fn majorana_loss(chi: f64) -> f64 {
    if chi <= 0.0 {
        return 0.0;
    }
    std::f64::consts::TAU * (-4.0 / chi).exp()
}

/// Ratio thresholds for "≪" and "≲".
#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
pub struct Thresholds {
    pub much_less: f64,
    pub less_sim: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self { much_less: 0.1, less_sim: 1.0 }
    }
}

/// One inequality lhs ≪ rhs or lhs ≲ rhs.
#[derive(Debug, Clone, Serialize)]
pub struct Margin {
    pub name: String,
    pub lhs_uev: f64,
    pub rhs_uev: f64,
    pub ratio: f64,
    pub threshold: f64,
    /// threshold / ratio; infinite when the left side vanishes.
    pub margin: f64,
    pub ok: bool,
}

impl Margin {
    fn new(name: &str, lhs: f64, rhs: f64, threshold: f64) -> Self {
        let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
        let margin = if ratio == 0.0 { f64::INFINITY } else { threshold / ratio };
        Self {
            name: name.to_string(),
            lhs_uev: units::to_uev(lhs),
            rhs_uev: units::to_uev(rhs),
            ratio,
            threshold,
            margin,
            ok: ratio.is_finite() && ratio <= threshold,
        }
    }
}

/// Derived trap quantities. Energies in μeV.
#[derive(Debug, Clone, Serialize)]
pub struct TrapReport {
    pub v0_uev: f64,
    pub e_r_uev: f64,
    pub rabi_uev: f64,
    pub delta_uev: f64,
    pub omega_uev: f64,
    pub omega_ho_uev: Option<f64>,
    pub omega_ho_minus_uev: f64,
    pub omega_ho_perturbative_uev: Option<f64>,
    pub omega_ho_engineering_uev: Option<f64>,
    pub n_b_ratio: Option<f64>,
    pub n_b_sqrt: f64,
    pub chi: Option<f64>,
    pub eta_loss: Option<f64>,
    pub eps_ad: Option<f64>,
    /// Sublattice-independent inequalities.
    pub chain: Vec<Margin>,
    /// Inequalities involving ω_HO on the |+⟩ sublattice.
    pub chain_plus: Vec<Margin>,
    /// Inequalities involving ω_HO on the |−⟩ sublattice.
    pub chain_minus: Vec<Margin>,
    /// Shared chain holds and at least one sublattice satisfies its part.
    pub satisfied: bool,
}

fn sublattice_chain(omega_ho: f64, v0: f64, kbt: f64, gamma: f64, th: &Thresholds) -> Vec<Margin> {
    vec![
        Margin::new("gamma_ph << omega_HO", gamma, omega_ho, th.much_less),
        Margin::new("k_B T << omega_HO", kbt, omega_ho, th.much_less),
        Margin::new("omega_HO <~ V0", omega_ho, v0, th.less_sim),
    ]
}

pub fn check_requirements(
    material: &MaterialSpec,
    drive: &DriveSpec,
    env: &EnvironmentSpec,
    th: &Thresholds,
) -> Result<TrapReport> {
    material.validate()?;
    drive.validate()?;
    let mass = material.mass_kg();
    let v0 = trap_depth(drive.rabi, drive.delta);
    let e_r = units::uev(units::recoil_energy(drive.a, material.eff_mass));
    let hf = harmonic_frequency(drive.rabi, drive.delta, drive.a, mass).ok();
    let k = drive.k;
    let minus = (HBAR * (-epsilon_curvature(drive.rabi, drive.delta, k, 0.0)).max(0.0) / mass).sqrt();
    let kbt = env.thermal_energy();
    let gamma = material.phonon_rate;

    let chain = vec![
        Margin::new("V0 <~ Omega0/2", v0, 0.5 * drive.rabi, th.less_sim),
        Margin::new("Omega0/2 <~ omega/2", 0.5 * drive.rabi, 0.5 * drive.omega, th.less_sim),
        Margin::new("Gamma << |Delta|", material.linewidth, drive.delta.abs(), th.much_less),
    ];
    let chain_plus = match hf {
        Some(h) => sublattice_chain(h.exact, v0, kbt, gamma, th),
        None => sublattice_chain(f64::INFINITY, v0, kbt, gamma, th),
    };
    let chain_minus = sublattice_chain(minus, v0, kbt, gamma, th);
    let all = |c: &[Margin]| c.iter().all(|m| m.ok);
    let satisfied = all(&chain) && (all(&chain_plus) || all(&chain_minus));

    let omega_ho = hf.map(|h| h.exact);
    let chi = omega_ho.map(|w| w / drive.delta.abs());
    Ok(TrapReport {
        v0_uev: units::to_uev(v0),
        e_r_uev: units::to_uev(e_r),
        rabi_uev: units::to_uev(drive.rabi),
        delta_uev: units::to_uev(drive.delta),
        omega_uev: units::to_uev(drive.omega),
        omega_ho_uev: omega_ho.map(units::to_uev),
        omega_ho_minus_uev: units::to_uev(minus),
        omega_ho_perturbative_uev: hf.map(|h| units::to_uev(h.perturbative)),
        omega_ho_engineering_uev: hf.map(|h| units::to_uev(h.engineering)),
        n_b_ratio: omega_ho.filter(|w| *w > 0.0 && v0 > 0.0).map(|w| v0 / w),
        n_b_sqrt: (v0 / (4.0 * e_r)).sqrt(),
        chi,
        eta_loss: chi.map(majorana_loss),
        eps_ad: (drive.omega > 0.0).then(|| v0 / drive.omega),
        chain,
        chain_plus,
        chain_minus,
        satisfied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{to_uev, uev};

    #[test]
    fn depth_limits() {
        assert_eq!(trap_depth(2.0, 0.0), 1.0);
        assert!((to_uev(trap_depth(uev(100.0), uev(250.0))) - 9.629).abs() < 1e-3);
        let (w, d) = (0.1, 1.0);
        assert!((trap_depth(w, d) / (w * w / (4.0 * d)) - 1.0).abs() < 0.01);
    }

    #[test]
    fn curvature_matches_finite_difference() {
        let (w, d, k) = (1.3, 0.7, 2.1);
        for &z in &[0.0, 0.2, 0.5 * std::f64::consts::PI / k, 1.1] {
            let h = 1e-4;
            let fd = (epsilon(w, d, k, z + h) - 2.0 * epsilon(w, d, k, z) + epsilon(w, d, k, z - h)) / (h * h);
            assert!((fd - epsilon_curvature(w, d, k, z)).abs() < 1e-6, "z={z}");
        }
    }

    #[test]
    fn loss_anchors() {
        assert!((majorana_loss(0.5) / 2.108e-3 - 1.0).abs() < 1e-3);
        assert!((majorana_loss(1.0) / 0.11508 - 1.0).abs() < 1e-4);
    }

    #[test]
    fn exact_branch_matches_perturbative_at_node() {
        let hf = harmonic_frequency(uev(100.0), uev(250.0), 500e-9, 0.836 * units::M_E).unwrap();
        assert!((hf.exact / hf.perturbative - 1.0).abs() < 1e-12);
        assert!((to_uev(hf.exact) - 8.48).abs() < 0.01);
        assert!((to_uev(hf.engineering) - 7.53).abs() < 0.01);
    }

    #[test]
    fn flat_trap_rejected() {
        assert!(harmonic_frequency(0.0, 1.0, 1e-6, units::M_E).is_err());
        assert!(harmonic_frequency(1.0, 0.0, 1e-6, units::M_E).is_err());
    }
}
