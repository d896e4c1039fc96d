//! Central-equation band structure.

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::PeriodicPotential;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BandConfig {
    /// Starting number of plane waves on each side of n = 0.
    pub n_max: usize,
    pub n_max_limit: usize,
    /// Relative change on doubling n_max.
    pub tol: f64,
    pub n_bands: usize,
}

impl Default for BandConfig {
    fn default() -> Self {
        Self { n_max: 8, n_max_limit: 256, tol: 1e-8, n_bands: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BandSolution {
    /// κ = qa/π = 2j/N − 1 for j = 0..N.
    pub kappa: Vec<f64>,
    /// energies[iq][band], E_R.
    pub energies: Vec<Vec<f64>>,
    /// Plane-wave coefficients vectors[iq][band][n + n_max].
    #[serde(skip)]
    pub vectors: Vec<Vec<Vec<f64>>>,
    pub n_max: usize,
    pub potential: PeriodicPotential,
}

impl BandSolution {
    pub fn n_q(&self) -> usize {
        self.kappa.len()
    }

    pub fn band(&self, b: usize) -> Vec<f64> {
        self.energies.iter().map(|e| e[b]).collect()
    }

    pub fn bandwidth(&self, b: usize) -> f64 {
        let e = self.band(b);
        e.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - e.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// min E_{b+1} − max E_b.
    pub fn gap_above(&self, b: usize) -> Option<f64> {
        if b + 1 >= self.energies.first()?.len() {
            return None;
        }
        let hi = self.band(b).into_iter().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.band(b + 1).into_iter().fold(f64::INFINITY, f64::min);
        Some(lo - hi)
    }
}

fn solve_at(pot: &PeriodicPotential, kappa: f64, n_max: usize, n_bands: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let dim = 2 * n_max + 1;
    let h = DMatrix::from_fn(dim, dim, |i, j| {
        let d = (i as i64 - j as i64).unsigned_abs() as usize;
        let mut v = pot.coeff(d);
        if i == j {
            let n = i as f64 - n_max as f64;
            v += (kappa + 2.0 * n).powi(2);
        }
        v
    });
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let e = order.iter().take(n_bands).map(|&i| eig.eigenvalues[i]).collect();
    let v = order.iter().take(n_bands).map(|&i| eig.eigenvectors.column(i).iter().cloned().collect()).collect();
    (e, v)
}

fn solve_grid(pot: &PeriodicPotential, n_q: usize, n_max: usize, n_bands: usize) -> Vec<(Vec<f64>, Vec<Vec<f64>>)> {
    (0..n_q)
        .into_par_iter()
        .map(|j| solve_at(pot, kappa_at(j, n_q), n_max, n_bands))
        .collect()
}

/// κⱼ = 2j/N − 1.
pub fn kappa_at(j: usize, n_q: usize) -> f64 {
    2.0 * j as f64 / n_q as f64 - 1.0
}

/// Bands on an `n_q`-point grid, raising the plane-wave cutoff until the
/// lowest `n_bands` energies change by less than `cfg.tol` on doubling.
pub fn band_structure(pot: &PeriodicPotential, n_q: usize, cfg: &BandConfig) -> Result<BandSolution> {
    pot.validate()?;
    if n_q < 2 {
        return Err(Error::Invalid("band structure needs at least 2 quasimomenta".into()));
    }
    if cfg.n_bands == 0 {
        return Err(Error::Invalid("n_bands must be >= 1".into()));
    }
    // the constant term only shifts the bands; keep it out of the tolerance test
    let shift = pot.coeffs[0];
    let mut centred = pot.clone();
    centred.coeffs[0] = 0.0;
    let pot = &centred;
    let mut n_max = cfg.n_max.max(8).max(pot.coeffs.len());
    if 2 * n_max > cfg.n_max_limit {
        return Err(Error::NoConvergence(format!(
            "potential has {} harmonics; n_max_limit = {} leaves no room for a convergence check",
            pot.coeffs.len(),
            cfg.n_max_limit
        )));
    }
    let mut prev = solve_grid(pot, n_q, n_max, cfg.n_bands);
    loop {
        let next = 2 * n_max;
        if next > cfg.n_max_limit {
            return Err(Error::NoConvergence(format!("bands not converged at n_max = {n_max}")));
        }
        let cur = solve_grid(pot, n_q, next, cfg.n_bands);
        let worst = prev
            .iter()
            .zip(&cur)
            .flat_map(|(p, c)| p.0.iter().zip(&c.0).map(|(a, b)| (a - b).abs() / b.abs().max(1.0)))
            .fold(0.0, f64::max);
        n_max = next;
        prev = cur;
        if worst < cfg.tol {
            break;
        }
    }
    let (mut energies, vectors): (Vec<Vec<f64>>, _) = prev.into_iter().unzip();
    for e in energies.iter_mut().flatten() {
        *e += shift;
    }
    let mut potential = centred;
    potential.coeffs[0] = shift;
    Ok(BandSolution { kappa: (0..n_q).map(|j| kappa_at(j, n_q)).collect(), energies, vectors, n_max, potential })
}
