//! Surface-acoustic-wave drive through a magnetostrictive film.
//!
//! Geometry: the film lies in the (y, z) plane with thickness δ along x, the
//! wave runs along z and the film is infinite along y. The static
//! magnetization points along z; the magnetoelastic drive is in-plane along
//! y. A y-component that is uniform along y produces no stray field, so the
//! field at the electron gas comes from the out-of-plane component m_x.

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{Dopri5, OdeOptions};
use crate::units::{HBAR, MU_B};

/// Drive quoted in the literature for kU = 10⁻⁶, h = 10 T, T.
pub const REFERENCE_DRIVE_T: f64 = 25e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SawFilmSpec {
    /// Film thickness δ, m.
    pub thickness: f64,
    /// μ₀M_s, T.
    pub saturation: f64,
    pub gilbert_alpha: f64,
    pub g_film: f64,
    /// Magnetoelastic constant h, T.
    pub magnetoelastic: f64,
    /// Strain amplitude ε_xx (= kU).
    pub strain: f64,
    /// Cycle frequency f, Hz.
    pub frequency: f64,
    /// m/s.
    pub sound_speed: f64,
}

impl SawFilmSpec {
    /// The reference nickel-like film at frequency `f` (Hz).
    pub fn reference(f: f64) -> Self {
        Self {
            thickness: 25e-9,
            saturation: 1.8,
            gilbert_alpha: 0.01,
            g_film: 2.1,
            magnetoelastic: 10.0,
            strain: 2e-4,
            frequency: f,
            sound_speed: 3500.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("thickness", self.thickness),
            ("saturation", self.saturation),
            ("g_film", self.g_film),
            ("magnetoelastic", self.magnetoelastic),
            ("strain", self.strain),
            ("frequency", self.frequency),
            ("sound_speed", self.sound_speed),
        ];
        for (k, v) in pos {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Invalid(format!("saw film: {k} must be positive")));
            }
        }
        if !(self.gilbert_alpha > 0.0 && self.gilbert_alpha <= 1.0) {
            return Err(Error::Invalid("saw film: gilbert_alpha must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        self.sound_speed / self.frequency
    }

    /// a = λ/2.
    pub fn lattice_const(&self) -> f64 {
        0.5 * self.wavelength()
    }

    pub fn wavenumber(&self) -> f64 {
        std::f64::consts::TAU / self.wavelength()
    }

    pub fn omega(&self) -> f64 {
        std::f64::consts::TAU * self.frequency
    }

    /// Gyromagnetic ratio g μ_B/ħ, rad/(s·T).
    pub fn gamma(&self) -> f64 {
        gyromagnetic_ratio(self.g_film)
    }
}

pub fn gyromagnetic_ratio(g: f64) -> f64 {
    g.abs() * MU_B / HBAR
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MagnetoelasticDrive {
    /// h·kU, T.
    pub formula_t: f64,
    /// Literature value at kU = 10⁻⁶, h = 10 T, T.
    pub reference_t: f64,
    /// reference / formula at that point; differs from 1.
    pub reference_ratio: f64,
    pub discrepancy: bool,
}

/// B_dr = h·kU, with the literature reference point reported alongside.
pub fn magnetoelastic_drive(h: f64, strain: f64) -> Result<MagnetoelasticDrive> {
    if !(h >= 0.0) || !(strain >= 0.0) {
        return Err(Error::Invalid("magnetoelastic constant and strain must be non-negative".into()));
    }
    let reference_formula = 10.0 * 1e-6;
    let ratio = REFERENCE_DRIVE_T / reference_formula;
    Ok(MagnetoelasticDrive {
        formula_t: h * strain,
        reference_t: REFERENCE_DRIVE_T,
        reference_ratio: ratio,
        discrepancy: (ratio - 1.0).abs() > 0.05,
    })
}

/// Same as [`magnetoelastic_drive`] from wavevector and displacement.
pub fn magnetoelastic_drive_ku(h: f64, k: f64, u: f64) -> Result<MagnetoelasticDrive> {
    magnetoelastic_drive(h, k * u)
}

#[derive(Debug, Clone, Serialize)]
pub struct LlgTrajectory {
    pub times: Vec<f64>,
    pub m: Vec<[f64; 3]>,
    /// Largest | |m| − 1 | seen before each renormalization.
    pub max_norm_drift: f64,
}

/// Integrates dm/dt = −γ/(1+α²)·[m×B + α m×(m×B)] (the explicit form of the
/// Gilbert equation) with B = `field(t, m)` in tesla. The state is projected
/// back onto |m| = 1 after every accepted step.
pub fn llg_integrate<F>(
    m0: Vector3<f64>,
    field: F,
    alpha: f64,
    g_film: f64,
    t_final: f64,
    times: &[f64],
    tol: f64,
) -> Result<LlgTrajectory>
where
    F: Fn(f64, &Vector3<f64>) -> Vector3<f64>,
{
    if (m0.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("m0 must be a unit vector (|m0| = {})", m0.norm())));
    }
    if !(alpha >= 0.0) || !(tol > 0.0) || !(t_final >= 0.0) {
        return Err(Error::Invalid("need alpha >= 0, tol > 0, t_final >= 0".into()));
    }
    let gamma = gyromagnetic_ratio(g_film);
    let pref = -gamma / (1.0 + alpha * alpha);
    let rhs = |t: f64, m: &Vector3<f64>| {
        let b = field(t, m);
        let mxb = m.cross(&b);
        (mxb + m.cross(&mxb) * alpha) * pref
    };
    let opts = OdeOptions { rtol: tol, atol: tol, ..OdeOptions::default() };
    let mut out_t = Vec::with_capacity(times.len());
    let mut out_m = Vec::with_capacity(times.len());
    let mut idx = 0;
    while idx < times.len() && times[idx] <= 0.0 {
        out_t.push(times[idx]);
        out_m.push([m0[0], m0[1], m0[2]]);
        idx += 1;
    }
    let mut drift: f64 = 0.0;
    let (m_end, _) = Dopri5::run(rhs, 0.0, m0, t_final, &opts, |step, y| {
        while idx < times.len() && times[idx] <= step.t1() {
            let v = step.eval(times[idx]).normalize();
            out_t.push(times[idx]);
            out_m.push([v[0], v[1], v[2]]);
            idx += 1;
        }
        drift = drift.max((y.norm() - 1.0).abs());
        y.normalize_mut();
    })?;
    while idx < times.len() {
        out_t.push(times[idx]);
        out_m.push([m_end[0], m_end[1], m_end[2]]);
        idx += 1;
    }
    Ok(LlgTrajectory { times: out_t, m: out_m, max_norm_drift: drift })
}

/// Static bias B₀ (T) that puts the uniform mode of a thin film at `omega`,
/// from ω² = γ²B₀(B₀ + μ₀M_s).
pub fn resonant_bias(film: &SawFilmSpec, omega: f64) -> f64 {
    let h = 0.5 * film.saturation;
    let w = omega / film.gamma();
    -h + (h * h + w * w).sqrt()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct PolderResponse {
    /// Out-of-plane diagonal element.
    pub chi_xx: Complex64,
    /// In-plane diagonal element.
    pub chi_yy: Complex64,
    /// Off-diagonal element; the (y, x) element is −chi_xy.
    pub chi_xy: Complex64,
    /// |χ_xy| at the resonance of the given bias.
    pub peak_chi_xy: f64,
    /// χ_yy at ω = 0, μ₀M_s/B₀.
    pub static_chi_yy: f64,
    /// |χ_yy(ω_res)| / χ_yy(0).
    pub diagonal_enhancement: f64,
    /// Uniform-mode frequency for this bias, rad/s.
    pub omega_res: f64,
}

fn polder_tensor(film: &SawFilmSpec, omega: f64, b0: f64) -> Result<(Complex64, Complex64, Complex64)> {
    let g = film.gamma();
    let ms = film.saturation;
    let ia = Complex64::new(0.0, omega * film.gilbert_alpha);
    let w1 = g * b0 + ia;
    let w2 = g * (b0 + ms) + ia;
    let det = w1 * w2 - omega * omega;
    if det.norm() < 1e-14 * (g * (b0 + ms)).powi(2) {
        return Err(Error::Invalid(format!("omega = {omega:e} rad/s sits on the undamped resonance pole")));
    }
    Ok((ms * g * w1 / det, ms * g * w2 / det, Complex64::new(0.0, omega) * (g * ms) / det))
}

/// Linearized LLG response μ₀M_s·m = χ·b of a thin film (demagnetizing
/// factor 1 along the normal, 0 in-plane) biased in-plane by `b0` (T).
pub fn polder_response(film: &SawFilmSpec, omega: f64, b0: f64) -> Result<PolderResponse> {
    if !(film.saturation > 0.0) || !(b0 > 0.0) || !(film.gilbert_alpha >= 0.0) || !(omega >= 0.0) {
        return Err(Error::Invalid("polder: need saturation > 0, b0 > 0, alpha >= 0, omega >= 0".into()));
    }
    let (chi_xx, chi_yy, chi_xy) = polder_tensor(film, omega, b0)?;
    let omega_res = film.gamma() * (b0 * (b0 + film.saturation)).sqrt();
    let (_, yy_res, xy_res) = polder_tensor(film, omega_res, b0)?;
    let static_chi_yy = film.saturation / b0;
    Ok(PolderResponse {
        chi_xx,
        chi_yy,
        chi_xy,
        peak_chi_xy: xy_res.norm(),
        static_chi_yy,
        diagonal_enhancement: yy_res.norm() / static_chi_yy,
        omega_res,
    })
}

/// Out-of-plane dynamic magnetization μ₀M_x (T) produced by the film's own
/// magnetoelastic drive at resonance, capped at saturation.
pub fn dynamic_magnetization(film: &SawFilmSpec) -> Result<DynamicMagnetization> {
    film.validate()?;
    let drive = magnetoelastic_drive(film.magnetoelastic, film.strain)?;
    let b0 = resonant_bias(film, film.omega());
    let p = polder_response(film, film.omega(), b0)?;
    let raw = p.chi_xy.norm() * drive.formula_t;
    Ok(DynamicMagnetization {
        drive,
        bias_t: b0,
        polder: p,
        mx_t: raw.min(film.saturation),
        saturated: raw > film.saturation,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DynamicMagnetization {
    pub drive: MagnetoelasticDrive,
    pub bias_t: f64,
    pub polder: PolderResponse,
    /// μ₀M_x amplitude, T.
    pub mx_t: f64,
    pub saturated: bool,
}

/// Stray-field amplitude of the standing pattern μ₀M_x·cos(kz) (plus an
/// optional in-plane μ₀M_z·sin(kz)), at distances `x` (m) from the film
/// surface.
#[derive(Debug, Clone, Serialize)]
pub struct StrayField {
    pub x: Vec<f64>,
    /// B₁(x), T.
    pub b1: Vec<f64>,
    /// Cells per wavelength and per thickness at convergence.
    pub cells: (usize, usize),
    /// (cells per wavelength, largest relative change) per refinement.
    pub convergence: Vec<(usize, f64)>,
}

/// Field of periodic line dipoles: each cell of cross-section A carries
/// moment per length M·A (M as μ₀M in T, so the result is in T after the
/// 1/μ₀ is absorbed). With w = z + ix, a row of dipoles spaced λ gives
/// B_z + iB_x = conj(p·(π/λ)²/sin²(π(w − w_c)/λ)) / (2π).
#[allow(clippy::too_many_arguments)]
fn cell_field(mx: &[f64], mz: &[f64], nz: usize, nt: usize, lambda: f64, delta: f64, z: f64, x: f64) -> (f64, f64) {
    let hz = lambda / nz as f64;
    let ht = delta / nt as f64;
    let area = hz * ht;
    let kp = std::f64::consts::PI / lambda;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nz {
        let zc = (j as f64 + 0.5) * hz;
        let p = Complex64::new(mz[j], mx[j]) * area;
        for l in 0..nt {
            let xc = -(l as f64 + 0.5) * ht;
            let w = Complex64::new(z - zc, x - xc);
            let s = (w * kp).sin();
            acc += p * kp * kp / (s * s);
        }
    }
    let b = acc.conj() / std::f64::consts::TAU;
    (b.im, b.re)
}

fn stray_once(mx_amp: f64, mz_amp: f64, lambda: f64, delta: f64, xs: &[f64], nz: usize, nt: usize) -> Vec<f64> {
    let k = std::f64::consts::TAU / lambda;
    let hz = lambda / nz as f64;
    let mx: Vec<f64> = (0..nz).map(|j| mx_amp * (k * (j as f64 + 0.5) * hz).cos()).collect();
    let mz: Vec<f64> = (0..nz).map(|j| mz_amp * (k * (j as f64 + 0.5) * hz).sin()).collect();
    xs.par_iter()
        .map(|&x| {
            // the x-component peaks where the out-of-plane pattern does
            let (bx, _) = cell_field(&mx, &mz, nz, nt, lambda, delta, 0.0, x);
            let (_, bz) = cell_field(&mx, &mz, nz, nt, lambda, delta, 0.25 * lambda, x);
            bx.abs().max(bz.abs())
        })
        .collect()
}

/// Dipole-sum stray field, refining the cells until one halving changes
/// every B₁(x) by less than `tol` (relative).
pub fn stray_field(mx_t: f64, mz_t: f64, lambda: f64, delta: f64, xs: &[f64], tol: f64) -> Result<StrayField> {
    if !(lambda > 0.0) || !(delta > 0.0) {
        return Err(Error::Invalid("stray field: wavelength and thickness must be positive".into()));
    }
    if let Some(&x) = xs.iter().find(|&&x| !(x > 0.0)) {
        return Err(Error::Invalid(format!("stray field: distance {x:e} m must be positive")));
    }
    let xmin = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut nz = 16usize;
    let mut nt = ((delta / xmin).ceil() as usize).max(2);
    let mut prev = stray_once(mx_t, mz_t, lambda, delta, xs, nz, nt);
    let mut trace = Vec::new();
    for _ in 0..12 {
        nz *= 2;
        nt *= 2;
        let cur = stray_once(mx_t, mz_t, lambda, delta, xs, nz, nt);
        let worst = prev
            .iter()
            .zip(&cur)
            .map(|(p, c)| if c.abs() > 0.0 { (p - c).abs() / c.abs() } else { (p - c).abs() })
            .fold(0.0, f64::max);
        trace.push((nz, worst));
        prev = cur;
        if worst < tol {
            return Ok(StrayField { x: xs.to_vec(), b1: prev, cells: (nz, nt), convergence: trace });
        }
    }
    Err(Error::NoConvergence(format!("stray field not converged; trace {trace:?}")))
}

/// B₁ of a uniformly thick sheet magnetized μ₀M_x·cos(kz):
/// (μ₀M_x/2)(1 − e^{−kδ})e^{−kx}.
pub fn sheet_field(mx_t: f64, lambda: f64, delta: f64, x: f64) -> f64 {
    let k = std::f64::consts::TAU / lambda;
    0.5 * mx_t * (1.0 - (-k * delta).exp()) * (-k * x).exp()
}

/// Stray field of a film driven at its own frequency, on x given in units of
/// a = λ/2.
pub fn stray_field_map(film: &SawFilmSpec, x_over_a: &[f64], tol: f64) -> Result<(DynamicMagnetization, StrayField)> {
    let dm = dynamic_magnetization(film)?;
    let a = film.lattice_const();
    let xs: Vec<f64> = x_over_a.iter().map(|u| u * a).collect();
    let sf = stray_field(dm.mx_t, 0.0, film.wavelength(), film.thickness, &xs, tol)?;
    Ok((dm, sf))
}

#[derive(Debug, Clone, Serialize)]
pub struct StrayRow {
    pub x_over_a: f64,
    pub frequency: f64,
    pub b1: f64,
}

/// B₁ on an (x/a, f) grid, frequency-major.
pub fn stray_sweep(base: &SawFilmSpec, frequencies: &[f64], x_over_a: &[f64], tol: f64) -> Result<Vec<StrayRow>> {
    let per_f: Result<Vec<Vec<StrayRow>>> = frequencies
        .par_iter()
        .map(|&f| {
            let film = SawFilmSpec { frequency: f, ..*base };
            let (_, sf) = stray_field_map(&film, x_over_a, tol)?;
            Ok(x_over_a.iter().zip(&sf.b1).map(|(&u, &b)| StrayRow { x_over_a: u, frequency: f, b1: b }).collect())
        })
        .collect();
    Ok(per_f?.into_iter().flatten().collect())
}

/// Least-squares slope of ln B against x.
pub fn log_slope(x: &[f64], b: &[f64]) -> Result<f64> {
    if x.len() != b.len() || x.len() < 2 || b.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::Invalid("log slope needs >= 2 positive samples".into()));
    }
    let n = x.len() as f64;
    let ly: Vec<f64> = b.iter().map(|v| v.ln()).collect();
    let mx = x.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&ly).map(|(a, c)| (a - mx) * (c - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HybridPotential {
    /// |Ω₀²/(4|Δ|) − V²/(8E_S)|, μeV.
    pub v0_plus: f64,
    /// Ω₀²/(4|Δ|) + V²/(8E_S), μeV.
    pub v0_minus: f64,
    /// Signed Ω₀²/(4|Δ|) − V²/(8E_S), μeV.
    pub v0_plus_signed: f64,
    pub q: f64,
    pub r: f64,
    /// Depths (max − min over z) of ±ε̃(z) + (q²E_S/8 + r|Δ|/4)sin²(kz).
    pub depth_plus_second_order: f64,
    pub depth_minus_second_order: f64,
    pub r_flag: bool,
    pub q_flag: bool,
}

/// Spin-dependent amplitudes of the combined strain and magnetic lattice.
/// All energies in μeV.
pub fn hybrid_potential(rabi: f64, delta: f64, v_saw: f64, e_s: f64) -> Result<HybridPotential> {
    if !(e_s > 0.0) {
        return Err(Error::Invalid("E_S must be positive".into()));
    }
    let ad = delta.abs();
    if ad == 0.0 {
        return Err(Error::Invalid("hybrid potential needs a non-zero detuning".into()));
    }
    let mag = rabi * rabi / (4.0 * ad);
    let saw = v_saw * v_saw / (8.0 * e_s);
    let q = v_saw / e_s;
    let r = rabi * rabi / (4.0 * e_s * ad);
    let dt = ad + rabi * rabi / (8.0 * e_s);
    let c = q * q * e_s / 8.0 + r * ad / 4.0;
    let n = 2048;
    let (mut pmin, mut pmax, mut mmin, mut mmax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for j in 0..=n {
        // one half period of kz covers every value of cos² and sin²
        let kz = std::f64::consts::FRAC_PI_2 * j as f64 / n as f64;
        let (s, co) = kz.sin_cos();
        let eps = 0.5 * (rabi * rabi * co * co + dt * dt).sqrt();
        let up = eps + c * s * s;
        let dn = -eps + c * s * s;
        pmin = pmin.min(up);
        pmax = pmax.max(up);
        mmin = mmin.min(dn);
        mmax = mmax.max(dn);
    }
    Ok(HybridPotential {
        v0_plus: (mag - saw).abs(),
        v0_minus: mag + saw,
        v0_plus_signed: mag - saw,
        q,
        r,
        depth_plus_second_order: pmax - pmin,
        depth_minus_second_order: mmax - mmin,
        r_flag: r > 0.5,
        q_flag: q * q / 8.0 > 0.5,
    })
}
