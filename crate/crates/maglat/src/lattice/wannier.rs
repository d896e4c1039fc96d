//! Wannier functions of an isolated band on a ring of N periods.
//!
//! For a potential that is even about the site centre z_m, fixing the phase
//! of every Bloch function so that ψ_q(z_m) is real and positive yields the
//! real, maximally localized Wannier function of the band.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::Serialize;

use super::bands::BandSolution;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct WannierSet {
    /// Grid on [0, N) in units of a.
    pub z: Vec<f64>,
    /// w[j] centred at `center + j`, normalized with dz in units of a.
    pub w: Vec<Vec<f64>>,
    /// dw/dz for each function.
    #[serde(skip)]
    pub dw: Vec<Vec<f64>>,
    pub center: f64,
    pub points_per_period: usize,
    pub n_sites: usize,
    pub band: usize,
    /// Band energies on the q grid, E_R.
    pub energies: Vec<f64>,
    /// Largest discarded imaginary part (gauge quality).
    pub max_imag: f64,
    /// Gap to the next band minus the bandwidth, E_R (positive if isolated).
    pub isolation_margin: Option<f64>,
    #[serde(skip)]
    potential: Vec<f64>,
}

impl WannierSet {
    pub fn step(&self) -> f64 {
        1.0 / self.points_per_period as f64
    }

    /// ∫ f g dz on the ring.
    pub fn dot(&self, f: &[f64], g: &[f64]) -> f64 {
        f.iter().zip(g).map(|(a, b)| a * b).sum::<f64>() * self.step()
    }

    pub fn overlap(&self, i: usize, j: usize) -> f64 {
        self.dot(&self.w[i], &self.w[j])
    }

    /// max |⟨w_i|w_j⟩ − δ_ij|.
    pub fn orthonormality_error(&self) -> f64 {
        let n = self.w.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((self.overlap(i, j) - target).abs());
            }
        }
        worst
    }

    /// max |w_{j+1}(z) − w_j(z − 1)| over sites and grid.
    pub fn translation_error(&self) -> f64 {
        let n = self.z.len();
        let p = self.points_per_period;
        let mut worst: f64 = 0.0;
        for j in 0..self.w.len().saturating_sub(1) {
            for s in 0..n {
                let shifted = self.w[j][(s + n - p) % n];
                worst = worst.max((self.w[j + 1][s] - shifted).abs());
            }
        }
        worst
    }

    /// ⟨w_i|p²/2m + V|w_j⟩ by real-space quadrature, E_R.
    pub fn hamiltonian_element(&self, i: usize, j: usize) -> f64 {
        let pi2 = std::f64::consts::PI.powi(2);
        let kin = self.dot(&self.dw[i], &self.dw[j]) / pi2;
        let pot: f64 = self.w[i].iter().zip(&self.w[j]).zip(&self.potential).map(|((a, b), v)| a * b * v).sum::<f64>()
            * self.step();
        kin + pot
    }

    /// Potential on the grid, E_R.
    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
}

/// Wannier functions of `band` centred at `center + j` (units of a) for
/// every site j of the ring implied by the band's q grid.
pub fn wannier_functions(bands: &BandSolution, band: usize, center: f64, points_per_period: Option<usize>) -> Result<WannierSet> {
    let n_q = bands.n_q();
    if bands.energies.first().is_none_or(|e| band >= e.len()) {
        return Err(Error::Invalid(format!("band {band} not computed")));
    }
    let e_band = bands.band(band);
    let isolation_margin = bands.gap_above(band).map(|g| g - bands.bandwidth(band));
    let below = if band > 0 { bands.gap_above(band - 1) } else { None };
    if let Some(g) = bands.gap_above(band).into_iter().chain(below).find(|g| *g <= 1e-9) {
        return Err(Error::Invalid(format!(
            "band {band} touches a neighbouring band (gap {g:e} E_R); Wannier functions undefined"
        )));
    }
    let n_max = bands.n_max;
    let j_pot = bands.potential.coeffs.len();
    let min_p = 2 * (2 * n_max + j_pot + 2);
    let p = points_per_period.unwrap_or(min_p).max(min_p);
    let n = n_q * p;
    let z: Vec<f64> = (0..n).map(|s| s as f64 / p as f64).collect();
    let pi = std::f64::consts::PI;
    let norm = 1.0 / (n_q as f64);

    // gauge-fixed Bloch functions and their derivatives, each already / √N
    let bloch: Result<Vec<(Vec<Complex64>, Vec<Complex64>)>> = (0..n_q)
        .into_par_iter()
        .map(|iq| {
            let kappa = bands.kappa[iq];
            let c = &bands.vectors[iq][band];
            let at = |zz: f64| -> Complex64 {
                c.iter()
                    .enumerate()
                    .map(|(i, ci)| Complex64::from_polar(*ci, pi * (kappa + 2.0 * (i as f64 - n_max as f64)) * zz))
                    .sum()
            };
            let r = at(center);
            if r.norm() < 1e-8 {
                return Err(Error::Invalid(format!(
                    "Bloch function of band {band} vanishes at the site centre (kappa = {kappa}); choose another centre"
                )));
            }
            let ph = r.conj() / r.norm();
            // periodic part on one period by inverse FFT, then the e^{iπκz} envelope
            let mut u = vec![Complex64::new(0.0, 0.0); p];
            let mut du = vec![Complex64::new(0.0, 0.0); p];
            for (i, ci) in c.iter().enumerate() {
                let m = i as i64 - n_max as i64;
                let bin = m.rem_euclid(p as i64) as usize;
                u[bin] = Complex64::new(*ci, 0.0);
                du[bin] = Complex64::new(0.0, pi * (kappa + 2.0 * m as f64) * ci);
            }
            let plan = FftPlanner::<f64>::new().plan_fft_inverse(p);
            plan.process(&mut u);
            plan.process(&mut du);
            let mut f = Vec::with_capacity(n);
            let mut df = Vec::with_capacity(n);
            for (s, &zz) in z.iter().enumerate() {
                let env = Complex64::from_polar(norm, pi * kappa * zz) * ph;
                f.push(u[s % p] * env);
                df.push(du[s % p] * env);
            }
            Ok((f, df))
        })
        .collect();
    let bloch = bloch?;
    let mut max_imag: f64 = 0.0;
    let mut w = Vec::with_capacity(n_q);
    let mut dw = Vec::with_capacity(n_q);
    for j in 0..n_q {
        let phases: Vec<Complex64> = bands.kappa.iter().map(|k| Complex64::from_polar(1.0, -pi * k * j as f64)).collect();
        let mut wj = vec![0.0; n];
        let mut dwj = vec![0.0; n];
        for s in 0..n {
            let mut v = Complex64::new(0.0, 0.0);
            let mut dv = Complex64::new(0.0, 0.0);
            for (iq, ph) in phases.iter().enumerate() {
                v += bloch[iq].0[s] * ph;
                dv += bloch[iq].1[s] * ph;
            }
            max_imag = max_imag.max(v.im.abs());
            wj[s] = v.re;
            dwj[s] = dv.re;
        }
        w.push(wj);
        dw.push(dwj);
    }
    let potential: Vec<f64> = z.iter().map(|&zz| bands.potential.eval(zz)).collect();
    Ok(WannierSet {
        z,
        w,
        dw,
        center,
        points_per_period: p,
        n_sites: n_q,
        band,
        energies: e_band,
        max_imag,
        isolation_margin,
        potential,
    })
}
