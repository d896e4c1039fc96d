//! Bloch bands, Wannier functions and Hubbard parameters of the dressed-spin
//! lattice.
//!
//! Energies inside this module are in units of the recoil energy
//! E_R = ħ²(π/a)²/2m and lengths in units of a, unless a name says otherwise.
//! With κ = qa/π the plane-wave kinetic term is E_R(κ + 2n)².

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod bands;
pub mod hubbard;
pub mod wannier;

pub use bands::{band_structure, BandConfig, BandSolution};
pub use hubbard::{
    driven_hopping, hopping_ratio_sweep, hopping_tc, hubbard_params, onsite_interaction, screening_for_ratio, soi_hopping,
    Disorder, HoppingTc, HubbardOptions, HubbardParams, InteractionResult, SoiHopping, Sublattice, SweepPoint,
};
pub use wannier::{wannier_functions, WannierSet};

/// Even period-a potential V(z) = v₀ + 2Σⱼ vⱼ cos(2πjz), coefficients in E_R.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPotential {
    pub coeffs: Vec<f64>,
}

impl PeriodicPotential {
    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    /// V₀ sin²(πz).
    pub fn sin2(v0: f64) -> Self {
        Self { coeffs: vec![0.5 * v0, -0.25 * v0] }
    }

    /// Cosine coefficients of an even function sampled on `m` points of one
    /// period, truncated once they fall below 10⁻¹³ of the largest.
    pub fn from_fn<F: Fn(f64) -> f64>(f: F, m: usize) -> Self {
        let vals: Vec<f64> = (0..m).map(|s| f(s as f64 / m as f64)).collect();
        let mut coeffs: Vec<f64> = (0..m / 2)
            .map(|j| {
                vals.iter()
                    .enumerate()
                    .map(|(s, v)| v * (std::f64::consts::TAU * (j * s) as f64 / m as f64).cos())
                    .sum::<f64>()
                    / m as f64
            })
            .collect();
        let big = coeffs.iter().skip(1).fold(0.0f64, |a, c| a.max(c.abs()));
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1].abs() <= 1e-13 * big {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// ±ε(z) = ±½√(Ω₀²cos²(πz) + Δ²) with Ω₀, Δ in E_R.
    pub fn adiabatic(rabi: f64, delta: f64, sub: Sublattice) -> Self {
        let s = match sub {
            Sublattice::Plus => 1.0,
            Sublattice::Minus => -1.0,
        };
        // ε − |Δ|/2 in a cancellation-free form, then the constant back on
        let d = delta.abs();
        let mut p = Self::from_fn(
            |z| {
                let w2 = (rabi * (std::f64::consts::PI * z).cos()).powi(2);
                s * 0.5 * w2 / ((w2 + d * d).sqrt() + d).max(f64::MIN_POSITIVE)
            },
            1024,
        );
        p.coeffs[0] += s * 0.5 * d;
        p
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(j, c)| if j == 0 { *c } else { 2.0 * c * (std::f64::consts::TAU * j as f64 * z).cos() })
            .sum()
    }

    pub fn coeff(&self, j: usize) -> f64 {
        self.coeffs.get(j).copied().unwrap_or(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.coeffs.is_empty() || self.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Invalid("potential needs finite Fourier coefficients".into()));
        }
        Ok(())
    }
}
