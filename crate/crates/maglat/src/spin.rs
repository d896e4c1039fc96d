//! Two-level spin dynamics: the RWA model, its local eigensystem, exact
//! propagation of the rotating-frame Hamiltonian and the stroboscopic
//! Magnus (Floquet) Hamiltonians to second order in 1/ω.
//!
//! Energies are angular frequencies (ħ = 1). Spinors are ordered (↑, ↓).

use nalgebra::{Matrix2, SVector, Vector2};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{Gauss6, OdeOptions};

pub type Spinor = Vector2<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn spin_up() -> Spinor {
    Vector2::new(c(1.0), c(0.0))
}

pub fn spin_down() -> Spinor {
    Vector2::new(c(0.0), c(1.0))
}

/// h = (Δ/2)σᶻ + (Ω/2)σˣ.
pub fn h_rwa(delta: f64, rabi: f64) -> Matrix2<Complex64> {
    Matrix2::new(c(0.5 * delta), c(0.5 * rabi), c(0.5 * rabi), c(-0.5 * delta))
}

/// Rotating-frame Hamiltonian without the RWA,
/// (Δ/2)σᶻ + (Ω/2)σˣ + (Ω/2)(σ⁺e^{2iωt} + σ⁻e^{−2iωt}).
pub fn rotating_frame_hamiltonian(delta: f64, rabi: f64, omega: f64, t: f64) -> Matrix2<Complex64> {
    let ph = Complex64::from_polar(0.5 * rabi, 2.0 * omega * t);
    let off = c(0.5 * rabi) + ph;
    Matrix2::new(c(0.5 * delta), off, off.conj(), c(-0.5 * delta))
}

/// Local eigenvalues ±ε and eigenvectors of h_RWA.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct AdiabaticEigensystem {
    pub epsilon: f64,
    /// Mixing angle atan2(Ω, Δ); equals arcsin(Ω/√(Ω²+Δ²)) for Δ > 0.
    pub theta: f64,
    /// Set at Ω = Δ = 0, where θ is undefined and reported as 0.
    pub degenerate: bool,
}

impl AdiabaticEigensystem {
    /// |+⟩ = cos(θ/2)|↑⟩ + sin(θ/2)|↓⟩.
    pub fn plus(&self) -> Vector2<f64> {
        let h = 0.5 * self.theta;
        Vector2::new(h.cos(), h.sin())
    }

    /// |−⟩ = −sin(θ/2)|↑⟩ + cos(θ/2)|↓⟩.
    pub fn minus(&self) -> Vector2<f64> {
        let h = 0.5 * self.theta;
        Vector2::new(-h.sin(), h.cos())
    }
}

pub fn adiabatic_eigensystem(rabi: f64, delta: f64) -> AdiabaticEigensystem {
    let degenerate = rabi == 0.0 && delta == 0.0;
    AdiabaticEigensystem {
        epsilon: 0.5 * rabi.hypot(delta),
        theta: if degenerate { 0.0 } else { rabi.atan2(delta) },
        degenerate,
    }
}

/// Stroboscopic Floquet Hamiltonian c_x σˣ + c_z σᶻ (identity part dropped).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FloquetHamiltonian {
    pub order: u8,
    pub sx: f64,
    pub sz: f64,
}

impl FloquetHamiltonian {
    pub fn matrix(&self) -> Matrix2<Complex64> {
        Matrix2::new(c(self.sz), c(self.sx), c(self.sx), c(-self.sz))
    }

    /// exp(−iHt)ψ.
    pub fn evolve(&self, psi: &Spinor, t: f64) -> Spinor {
        let n = self.sx.hypot(self.sz);
        if n == 0.0 {
            return *psi;
        }
        let (s, co) = (n * t).sin_cos();
        let u = Matrix2::new(
            c(co) - I * (s * self.sz / n),
            -I * (s * self.sx / n),
            -I * (s * self.sx / n),
            c(co) + I * (s * self.sz / n),
        );
        u * psi
    }
}

/// Sum of the Magnus terms up to `order`:
/// H⁽⁰⁾ = (Δ/2)σᶻ + (Ω/2)σˣ,
/// H⁽¹⁾ = Ω/(16ω)·(2Δσˣ − Ωσᶻ),
/// H⁽²⁾ = −Ω/(64ω²)·(4Δ² + Ω²)σˣ.
pub fn magnus_hamiltonian(delta: f64, rabi: f64, omega: f64, order: u8) -> Result<FloquetHamiltonian> {
    if !(omega > 0.0) {
        return Err(Error::Invalid("drive frequency must be positive".into()));
    }
    if order > 2 {
        return Err(Error::Invalid(format!("Magnus order {order} not available (0..=2)")));
    }
    let mut h = FloquetHamiltonian { order, sx: 0.5 * rabi, sz: 0.5 * delta };
    if order >= 1 {
        h.sx += rabi / (16.0 * omega) * 2.0 * delta;
        h.sz -= rabi / (16.0 * omega) * rabi;
    }
    if order >= 2 {
        h.sx -= rabi / (64.0 * omega * omega) * (4.0 * delta * delta + rabi * rabi);
    }
    Ok(h)
}

fn to_real(psi: &Spinor) -> SVector<f64, 4> {
    SVector::<f64, 4>::new(psi[0].re, psi[0].im, psi[1].re, psi[1].im)
}

fn from_real(y: &SVector<f64, 4>) -> Spinor {
    Vector2::new(Complex64::new(y[0], y[1]), Complex64::new(y[2], y[3]))
}

/// Solves i∂ₜψ = H(t)ψ for the rotating-frame Hamiltonian from t = 0 and
/// returns ψ at each of the monotone `times`. Negative times propagate
/// backwards.
pub fn propagate_full(delta: f64, rabi: f64, omega: f64, psi0: &Spinor, times: &[f64], tol: f64) -> Result<Vec<Spinor>> {
    let n0 = psi0.norm();
    if (n0 - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("initial spinor not normalized (norm {n0})")));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let rhs = |t: f64, y: &SVector<f64, 4>| {
        let psi = from_real(y);
        let d = (rotating_frame_hamiltonian(delta, rabi, omega, t) * psi) * (-I);
        to_real(&d)
    };
    let scale = delta.abs().max(rabi.abs()).max(omega.abs()).max(1e-300);
    let opts = OdeOptions { rtol: tol, atol: tol, h_max: 0.5 / scale, ..OdeOptions::default() };
    let ys = Gauss6::sample(rhs, 0.0, to_real(psi0), times, &opts)?;
    Ok(ys.iter().map(from_real).collect())
}

/// ‖ψ − χ‖.
pub fn euclidean_distance(a: &Spinor, b: &Spinor) -> f64 {
    (a - b).norm()
}

/// min over φ of ‖ψ − e^{iφ}χ‖, attained at φ = arg⟨χ|ψ⟩.
pub fn phase_aligned_distance(a: &Spinor, b: &Spinor) -> f64 {
    let ov = b.dotc(a);
    if ov.norm() == 0.0 {
        return euclidean_distance(a, b);
    }
    let ph = ov / ov.norm();
    (a - b * ph).norm()
}

/// Full-versus-Magnus comparison at the stroboscopic times tₙ = nT/2,
/// T = 2π/ω.
#[derive(Debug, Clone, Serialize)]
pub struct StroboscopicComparison {
    pub order: u8,
    pub times: Vec<f64>,
    pub full: Vec<[f64; 4]>,
    pub magnus: Vec<[f64; 4]>,
    /// Phase-aligned distance at each sample.
    pub distance: Vec<f64>,
    pub max_distance: f64,
}

/// Compares exact propagation against exp(−iH_F t) starting from |↓⟩, in
/// units where ω = 1. The distance ignores the global phase, which the
/// stroboscopic Hamiltonian does not fix.
pub fn stroboscopic_error(
    delta_over_omega: f64,
    rabi_over_omega: f64,
    order: u8,
    n_periods: usize,
    tol: f64,
) -> Result<StroboscopicComparison> {
    if n_periods == 0 {
        return Err(Error::Invalid("n_periods must be at least 1".into()));
    }
    let omega = 1.0;
    let hf = magnus_hamiltonian(delta_over_omega, rabi_over_omega, omega, order)?;
    let half = std::f64::consts::PI / omega;
    let times: Vec<f64> = (0..=2 * n_periods).map(|n| n as f64 * half).collect();
    let psi0 = spin_down();
    let full = propagate_full(delta_over_omega, rabi_over_omega, omega, &psi0, &times, tol)?;
    let mut out = StroboscopicComparison {
        order,
        times: times.clone(),
        full: Vec::new(),
        magnus: Vec::new(),
        distance: Vec::new(),
        max_distance: 0.0,
    };
    for (t, psi) in times.iter().zip(&full) {
        let chi = hf.evolve(&psi0, *t);
        let d = phase_aligned_distance(psi, &chi);
        out.full.push([psi[0].re, psi[0].im, psi[1].re, psi[1].im]);
        out.magnus.push([chi[0].re, chi[0].im, chi[1].re, chi[1].im]);
        out.distance.push(d);
        out.max_distance = out.max_distance.max(d);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn eigensystem_cases() {
        let e = adiabatic_eigensystem(0.0, 2.0);
        assert_eq!((e.epsilon, e.theta), (1.0, 0.0));
        let e = adiabatic_eigensystem(3.0, 0.0);
        assert!((e.theta - PI / 2.0).abs() < 1e-15 && (e.epsilon - 1.5).abs() < 1e-15);
        let e = adiabatic_eigensystem(1.0, 1.0);
        assert!((e.theta - PI / 4.0).abs() < 1e-15);
        assert!((e.epsilon - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!(adiabatic_eigensystem(0.0, 0.0).degenerate);
    }

    #[test]
    fn eigenvectors_diagonalize() {
        for &(w, d) in &[(0.3, 1.0), (2.0, -0.5), (-1.0, 0.2), (1.0, 0.0)] {
            let e = adiabatic_eigensystem(w, d);
            let h = Matrix2::new(0.5 * d, 0.5 * w, 0.5 * w, -0.5 * d);
            let (p, m) = (e.plus(), e.minus());
            assert!((h * p - p * e.epsilon).norm() < 1e-14);
            assert!((h * m + m * e.epsilon).norm() < 1e-14);
            assert!(p.dot(&m).abs() < 1e-15);
        }
    }

    #[test]
    fn zero_drive_magnus_is_bare() {
        for order in 0..=2 {
            let h = magnus_hamiltonian(0.7, 0.0, 1.0, order).unwrap();
            assert_eq!((h.sx, h.sz), (0.0, 0.35));
        }
    }

    #[test]
    fn full_hamiltonian_is_hermitian() {
        let h = rotating_frame_hamiltonian(0.3, 0.8, 1.1, 0.77);
        assert!((h - h.adjoint()).norm() < 1e-15);
    }

    #[test]
    fn zero_drive_propagation_is_phase() {
        let psi0 = Vector2::new(c(0.6), c(0.8));
        let t = [0.0, 1.3, 7.9];
        let out = propagate_full(0.4, 0.0, 1.0, &psi0, &t, 1e-10).unwrap();
        for (ti, p) in t.iter().zip(&out) {
            let expect = Vector2::new(psi0[0] * Complex64::from_polar(1.0, -0.2 * ti), psi0[1] * Complex64::from_polar(1.0, 0.2 * ti));
            assert!((p - expect).norm() < 1e-9);
        }
    }
}
