//! Adiabatic versus exact two-component spectra on a periodic grid.
//!
//! Both Hamiltonians use a Fourier-grid kinetic operator, so convergence in
//! the number of grid points is spectral for smooth potentials. The spinor
//! eigenstates are assigned to a sublattice by their weight on the local
//! |+⟩ state.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::spin::adiabatic_eigensystem;
use crate::units::{self, DriveSpec, MaterialSpec, HBAR};

/// Grid settings. `periods` must be even because Ω(z) repeats every 2a.
#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
pub struct GridConfig {
    pub periods: usize,
    /// Starting resolution; `None` picks one from the oscillator length.
    pub points_per_period: Option<usize>,
    pub max_points_per_period: usize,
    /// Relative change allowed between successive doublings.
    pub tol: f64,
    pub levels: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { periods: 4, points_per_period: None, max_points_per_period: 512, tol: 1e-8, levels: 3 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LevelComparison {
    pub adiabatic_uev: Vec<f64>,
    pub spinor_uev: Vec<f64>,
    /// |E_spinor − E_adiabatic| / E_R.
    pub deviation: Vec<f64>,
}

impl LevelComparison {
    pub fn max_deviation(&self) -> f64 {
        self.deviation.iter().cloned().fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumComparison {
    pub plus: LevelComparison,
    pub minus: LevelComparison,
    pub points_per_period: usize,
    pub e_r_uev: f64,
    /// (points per period, largest relative level change) per refinement.
    pub convergence: Vec<(usize, f64)>,
}

/// Periodic Fourier-grid kinetic matrix row t(j − k), rad/s.
fn kinetic_row(n: usize, length: f64, mass: f64) -> Vec<f64> {
    let half = (n / 2) as i64;
    let modes: Vec<(f64, f64)> = ((-half + 1)..=half)
        .map(|m| {
            let k = std::f64::consts::TAU * m as f64 / length;
            (m as f64, HBAR * k * k / (2.0 * mass))
        })
        .collect();
    (0..n)
        .map(|d| {
            modes
                .iter()
                .map(|&(m, e)| e * (std::f64::consts::TAU * m * d as f64 / n as f64).cos())
                .sum::<f64>()
                / n as f64
        })
        .collect()
}

struct Levels {
    plus_ad: Vec<f64>,
    minus_ad: Vec<f64>,
    plus_sp: Vec<f64>,
    minus_sp: Vec<f64>,
}

fn solve(mass: f64, rabi: f64, delta: f64, a: f64, periods: usize, ppp: usize, levels: usize) -> Result<Levels> {
    let n = periods * ppp;
    let length = periods as f64 * a;
    let h = length / n as f64;
    let k = std::f64::consts::PI / a;
    let row = kinetic_row(n, length, mass);
    let z: Vec<f64> = (0..n).map(|j| j as f64 * h).collect();
    let rab: Vec<f64> = z.iter().map(|&zz| rabi * (k * zz).cos()).collect();
    let eps: Vec<f64> = rab.iter().map(|&w| 0.5 * w.hypot(delta)).collect();
    let kin = |i: usize, j: usize| row[(i + n - j) % n];

    let scalar = |sign: f64| -> Vec<f64> {
        let m = DMatrix::from_fn(n, n, |i, j| kin(i, j) + if i == j { sign * eps[i] } else { 0.0 });
        let mut ev = SymmetricEigen::new(m).eigenvalues.as_slice().to_vec();
        ev.sort_by(|x, y| x.total_cmp(y));
        ev
    };
    let minus_all = scalar(-1.0);
    let plus_all = scalar(1.0);

    let spinor = DMatrix::from_fn(2 * n, 2 * n, |i, j| {
        let (si, ii) = (i / n, i % n);
        let (sj, jj) = (j / n, j % n);
        let mut v = if si == sj { kin(ii, jj) } else { 0.0 };
        if ii == jj {
            v += match (si, sj) {
                (0, 0) => 0.5 * delta,
                (1, 1) => -0.5 * delta,
                _ => 0.5 * rab[ii],
            };
        }
        v
    });
    let eig = SymmetricEigen::new(spinor);
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let local: Vec<_> = rab.iter().map(|&w| adiabatic_eigensystem(w, delta).plus()).collect();
    let mut plus_sp = Vec::new();
    let mut minus_sp = Vec::new();
    for &idx in &order {
        let v = eig.eigenvectors.column(idx);
        let wplus: f64 = (0..n)
            .map(|j| {
                let p = local[j];
                let amp = p[0] * v[j] + p[1] * v[n + j];
                amp * amp
            })
            .sum();
        let target = if wplus > 0.5 { &mut plus_sp } else { &mut minus_sp };
        if target.len() < levels {
            target.push(eig.eigenvalues[idx]);
        }
        if plus_sp.len() >= levels && minus_sp.len() >= levels {
            break;
        }
    }
    if plus_sp.len() < levels || minus_sp.len() < levels {
        return Err(Error::NoConvergence("could not assign enough spinor levels to each sublattice".into()));
    }
    Ok(Levels {
        plus_ad: plus_all[..levels].to_vec(),
        minus_ad: minus_all[..levels].to_vec(),
        plus_sp,
        minus_sp,
    })
}

fn oscillator_points(mass: f64, rabi: f64, delta: f64, a: f64) -> usize {
    let k = std::f64::consts::PI / a;
    let c_plus = super::epsilon_curvature(rabi, delta, k, 0.5 * a).abs();
    let c_minus = super::epsilon_curvature(rabi, delta, k, 0.0).abs();
    let curv = c_plus.max(c_minus);
    if curv == 0.0 || !curv.is_finite() {
        return 32;
    }
    let w = (HBAR * curv / mass).sqrt();
    let ell = (HBAR / (mass * w)).sqrt();
    let ppp = (16.0 * a / ell).ceil() as usize;
    ppp.max(16).next_multiple_of(2)
}

/// Compares the lowest `levels` eigenvalues of p²/2m ± ε(z) with the
/// matching spinor levels of p²/2m + h_RWA(z), refining the grid until the
/// largest relative change drops below `cfg.tol`.
pub fn spectrum_comparison_raw(mass: f64, rabi: f64, delta: f64, a: f64, cfg: &GridConfig) -> Result<SpectrumComparison> {
    if cfg.periods < 4 || !cfg.periods.is_multiple_of(2) {
        return Err(Error::Invalid("grid needs an even number (>= 4) of lattice periods".into()));
    }
    if !(mass > 0.0) || !(a > 0.0) {
        return Err(Error::Invalid("mass and lattice constant must be positive".into()));
    }
    let e_r = HBAR * (std::f64::consts::PI / a).powi(2) / (2.0 * mass);
    let min_ppp = oscillator_points(mass, rabi, delta, a);
    let mut ppp = cfg.points_per_period.unwrap_or(min_ppp).max(min_ppp);
    let mut prev = solve(mass, rabi, delta, a, cfg.periods, ppp, cfg.levels)?;
    let mut trace = Vec::new();
    loop {
        let next_ppp = 2 * ppp;
        if next_ppp > cfg.max_points_per_period {
            return Err(Error::NoConvergence(format!(
                "spectrum not converged at {ppp} points per period; trace {trace:?}"
            )));
        }
        let cur = solve(mass, rabi, delta, a, cfg.periods, next_ppp, cfg.levels)?;
        let change = |x: &[f64], y: &[f64]| {
            x.iter().zip(y).map(|(p, q)| (p - q).abs() / p.abs().max(e_r)).fold(0.0, f64::max)
        };
        let worst = change(&prev.plus_ad, &cur.plus_ad)
            .max(change(&prev.minus_ad, &cur.minus_ad))
            .max(change(&prev.plus_sp, &cur.plus_sp))
            .max(change(&prev.minus_sp, &cur.minus_sp));
        trace.push((next_ppp, worst));
        ppp = next_ppp;
        prev = cur;
        if worst < cfg.tol {
            break;
        }
    }
    let cmp = |ad: &[f64], sp: &[f64]| LevelComparison {
        adiabatic_uev: ad.iter().map(|&e| units::to_uev(e)).collect(),
        spinor_uev: sp.iter().map(|&e| units::to_uev(e)).collect(),
        deviation: ad.iter().zip(sp).map(|(x, y)| (x - y).abs() / e_r).collect(),
    };
    Ok(SpectrumComparison {
        plus: cmp(&prev.plus_ad, &prev.plus_sp),
        minus: cmp(&prev.minus_ad, &prev.minus_sp),
        points_per_period: ppp,
        e_r_uev: units::to_uev(e_r),
        convergence: trace,
    })
}

pub fn spectrum_comparison(material: &MaterialSpec, drive: &DriveSpec, cfg: &GridConfig) -> Result<SpectrumComparison> {
    material.validate()?;
    spectrum_comparison_raw(material.mass_kg(), drive.rabi, drive.delta, drive.a, cfg)
}
