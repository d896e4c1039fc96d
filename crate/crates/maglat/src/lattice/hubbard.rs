//! Hubbard parameters: t_c, driven spin-flip hopping t_±, SOI hopping,
//! screened on-site interaction and the t_± / t_c sweep.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::bands::{band_structure, BandConfig, BandSolution};
use super::wannier::{wannier_functions, WannierSet};
use super::PeriodicPotential;
use crate::error::{Error, Result};
use crate::spin::adiabatic_eigensystem;
use crate::trap::trap_depth;
use crate::units::{self, DriveSpec, MaterialSpec, EPS_0, E_CHARGE, HBAR, UEV_J};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sublattice {
    /// +ε branch, sites at the nodes of cos(kz) (z = a/2 + ja).
    Plus,
    /// −ε branch, sites at the antinodes (z = ja).
    Minus,
}

impl Sublattice {
    /// Site centre in units of a.
    pub fn center(self) -> f64 {
        match self {
            Sublattice::Plus => 0.5,
            Sublattice::Minus => 0.0,
        }
    }
}

/// t_c/E_R ≈ (4/√π)s^{3/4}e^{−2√s}, s = V₀/E_R.
pub fn tc_analytic(s: f64) -> f64 {
    if !(s > 0.0) {
        return 0.0;
    }
    4.0 / std::f64::consts::PI.sqrt() * s.powf(0.75) * (-2.0 * s.sqrt()).exp()
}

/// t_c = −(1/N)Σ_q E(q)cos(qa) from the lowest band, E_R.
pub fn tc_numeric(bands: &BandSolution) -> f64 {
    let n = bands.n_q() as f64;
    -bands.kappa.iter().zip(&bands.energies).map(|(k, e)| e[0] * (std::f64::consts::PI * k).cos()).sum::<f64>() / n
}

/// max |E(q) − (ē − 2t_c cos qa)| over the lowest band, as a fraction of the
/// bandwidth.
pub fn dispersion_fit_residual(bands: &BandSolution) -> f64 {
    let e = bands.band(0);
    let mean = e.iter().sum::<f64>() / e.len() as f64;
    let t = tc_numeric(bands);
    let w = bands.bandwidth(0);
    bands
        .kappa
        .iter()
        .zip(&e)
        .map(|(k, ek)| (ek - (mean - 2.0 * t * (std::f64::consts::PI * k).cos())).abs())
        .fold(0.0, f64::max)
        / w
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct HoppingTc {
    pub analytic: f64,
    pub numeric: Option<f64>,
}

/// t_c in the units of `v0` and `e_r`; the numeric branch needs bands
/// computed in E_R units.
pub fn hopping_tc(v0: f64, e_r: f64, bands: Option<&BandSolution>) -> Result<HoppingTc> {
    if !(v0 > 0.0) || !(e_r > 0.0) {
        return Err(Error::Invalid("t_c needs positive V0 and E_R".into()));
    }
    Ok(HoppingTc { analytic: e_r * tc_analytic(v0 / e_r), numeric: bands.map(|b| e_r * tc_numeric(b)) })
}

fn check_normalized(ws: &WannierSet, which: &str) -> Result<()> {
    let err = ws.w.iter().map(|w| (ws.dot(w, w) - 1.0).abs()).fold(0.0, f64::max);
    if err > 1e-6 {
        return Err(Error::Invalid(format!("{which} Wannier set not normalized (error {err:e})")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct DrivenHopping {
    pub t_pm: f64,
    /// Ω_dr/Ω₀ above 0.1.
    pub strong_drive: bool,
}

/// t_± = ⟨w⁺_0|(Ω_dr/2)cos²ϑ − 2Ω₃ sinϑ cosϑ|w⁻_1⟩ with ϑ = θ(z)/2 and
/// θ = atan2(Ω₀cos(πz), Δ). Energies in any common unit; the result is in
/// the unit of Ω_dr and Ω₃.
pub fn driven_hopping(
    plus: &WannierSet,
    minus: &WannierSet,
    omega_dr: f64,
    omega_3: f64,
    rabi: f64,
    delta: f64,
) -> Result<DrivenHopping> {
    if plus.points_per_period != minus.points_per_period || plus.n_sites != minus.n_sites {
        return Err(Error::Invalid("Wannier sets must share one grid".into()));
    }
    if plus.n_sites < 2 {
        return Err(Error::Invalid("driven hopping needs at least two sites".into()));
    }
    check_normalized(plus, "|+>")?;
    check_normalized(minus, "|->")?;
    let f: Vec<f64> = plus
        .z
        .iter()
        .map(|&z| {
            let th = 0.5 * adiabatic_eigensystem(rabi * (std::f64::consts::PI * z).cos(), delta).theta;
            let (s, c) = th.sin_cos();
            0.5 * omega_dr * c * c - 2.0 * omega_3 * s * c
        })
        .collect();
    let wp = &plus.w[0];
    let wm = &minus.w[1];
    let t = wp.iter().zip(wm).zip(&f).map(|((a, b), g)| a * b * g).sum::<f64>() * plus.step();
    Ok(DrivenHopping { t_pm: t, strong_drive: rabi != 0.0 && (omega_dr / rabi).abs() > 0.1 })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SoiHopping {
    /// (ħλπ²/a)·√(V₀/E_R)·exp(−(π²/16)√(V₀/E_R)), μeV.
    pub t_soi_uev: f64,
    /// E_R·λ√(V₀E_R)π²/a·exp(…) with λ in m/s, energies in μeV and a in m,
    /// taken literally.
    pub verbatim: f64,
}

/// SOI-assisted hopping for Rashba or Dresselhaus velocity `lambda` (m/s).
pub fn soi_hopping(lambda: f64, v0_uev: f64, e_r_uev: f64, a: f64) -> Result<SoiHopping> {
    if !(v0_uev > 0.0) || !(e_r_uev > 0.0) || !(a > 0.0) {
        return Err(Error::Invalid("SOI hopping needs positive V0, E_R and a".into()));
    }
    let s = (v0_uev / e_r_uev).sqrt();
    let pi2 = std::f64::consts::PI.powi(2);
    let decay = (-pi2 / 16.0 * s).exp();
    let scale = HBAR * lambda.abs() * pi2 / a / UEV_J;
    Ok(SoiHopping {
        t_soi_uev: scale * s * decay,
        verbatim: e_r_uev * lambda.abs() * (v0_uev * e_r_uev).sqrt() * pi2 / a * decay,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct InteractionResult {
    /// U = U_0000, μeV.
    pub u_uev: f64,
    /// U_ijkl for sites i, j, k, l ∈ {0, 1}, μeV.
    pub u_ijkl: [[[[f64; 2]; 2]; 2]; 2],
    /// max |U_ijkl − U_lkji|.
    pub symmetry_error: f64,
    /// Relative change of U between half and full grid resolution.
    pub refinement_change: f64,
}

fn kernel(ws: &WannierSet, a: f64, eps_r: f64, d_scr: Option<f64>, z0: f64, stride: usize) -> Vec<f64> {
    let n = ws.z.len();
    let ring = ws.n_sites as f64;
    let kc = E_CHARGE * E_CHARGE / (4.0 * std::f64::consts::PI * EPS_0 * eps_r) / UEV_J;
    (0..n / stride)
        .map(|d| {
            let mut r = (d * stride) as f64 * ws.step();
            r = r.min(ring - r) * a;
            let fs = match d_scr {
                Some(ds) => 1.0 - r / (r * r + 4.0 * ds * ds).sqrt(),
                None => 1.0,
            };
            kc * fs / (r * r + z0 * z0).sqrt()
        })
        .collect()
}

/// Circular convolution with the Coulomb kernel, by FFT.
struct Convolver {
    stride: usize,
    h: f64,
    khat: Vec<Complex64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Convolver {
    fn new(ws: &WannierSet, k: &[f64], stride: usize) -> Self {
        let n = k.len();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let mut khat: Vec<Complex64> = k.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        fwd.process(&mut khat);
        Self { stride, h: ws.step() * stride as f64, khat, fwd, inv }
    }

    /// ∫∫ w_i(z)w_l(z) K(z − z′) w_j(z′)w_k(z′) dz dz′.
    fn integral(&self, ws: &WannierSet, i: usize, l: usize, j: usize, kk: usize) -> f64 {
        let n = self.khat.len();
        let st = self.stride;
        let mut buf: Vec<Complex64> = (0..n).map(|s| Complex64::new(ws.w[j][s * st] * ws.w[kk][s * st], 0.0)).collect();
        self.fwd.process(&mut buf);
        for (b, k) in buf.iter_mut().zip(&self.khat) {
            *b *= k;
        }
        self.inv.process(&mut buf);
        let sum: f64 = (0..n).map(|s| ws.w[i][s * st] * ws.w[l][s * st] * buf[s].re).sum();
        sum / n as f64 * self.h * self.h
    }
}

/// Screened on-site interaction with 1/|z − z′| regularized by z₀ (m).
/// `d_scr = None` is the unscreened limit. `a` is the lattice constant (m).
pub fn onsite_interaction(ws: &WannierSet, a: f64, eps_r: f64, d_scr: Option<f64>, z0: f64) -> Result<InteractionResult> {
    if !(z0 > 0.0) || !(a > 0.0) || !(eps_r > 0.0) {
        return Err(Error::Invalid("interaction needs z0, a, eps_r > 0".into()));
    }
    if let Some(d) = d_scr {
        if !(d > 0.0) {
            return Err(Error::Invalid("screening distance must be positive".into()));
        }
    }
    if ws.n_sites < 2 {
        return Err(Error::Invalid("interaction window needs two sites".into()));
    }
    check_normalized(ws, "interaction")?;
    let k1 = kernel(ws, a, eps_r, d_scr, z0, 1);
    let k2 = kernel(ws, a, eps_r, d_scr, z0, 2);
    let coarse = Convolver::new(ws, &k2, 2).integral(ws, 0, 0, 0, 0);
    let conv = Convolver::new(ws, &k1, 1);
    let mut u = [[[[0.0; 2]; 2]; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    u[i][j][k][l] = conv.integral(ws, i, l, j, k);
                }
            }
        }
    }
    let fine = u[0][0][0][0];
    let change = (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE);
    if change > 1e-3 {
        return Err(Error::NoConvergence(format!(
            "on-site integral changes by {change:e} between grid levels; raise points_per_period"
        )));
    }
    let mut sym: f64 = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    sym = sym.max((u[i][j][k][l] - u[l][k][j][i]).abs());
                }
            }
        }
    }
    Ok(InteractionResult { u_uev: fine, u_ijkl: u, symmetry_error: sym, refinement_change: change })
}

/// d_scr (m) with U = `target_uev`, by bisection on log d. U grows with
/// d_scr from 0 towards the unscreened value.
pub fn screening_for_ratio(ws: &WannierSet, a: f64, eps_r: f64, z0: f64, target_uev: f64) -> Result<f64> {
    let u_of = |d: f64| -> Result<f64> {
        let k = kernel(ws, a, eps_r, Some(d), z0, 1);
        Ok(Convolver::new(ws, &k, 1).integral(ws, 0, 0, 0, 0))
    };
    let unscreened = onsite_interaction(ws, a, eps_r, None, z0)?.u_uev;
    if !(target_uev > 0.0) || target_uev >= unscreened {
        return Err(Error::Invalid(format!(
            "target U = {target_uev} ueV not below the unscreened value {unscreened} ueV"
        )));
    }
    let (mut lo, mut hi) = ((1e-4 * a).ln(), (1e4 * a).ln());
    if u_of(lo.exp())? > target_uev {
        return Err(Error::Invalid("target U below the reach of the screening bracket".into()));
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if u_of(mid.exp())? < target_uev {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-10 {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Site chemical potentials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Disorder {
    #[default]
    None,
    /// Explicit list, μeV.
    List { values: Vec<f64> },
    /// i.i.d. uniform on [−width/2, width/2] μeV.
    Uniform { width: f64, sites: usize, seed: u64 },
}

impl Disorder {
    pub fn sample(&self) -> Result<Vec<f64>> {
        match self {
            Disorder::None => Ok(Vec::new()),
            Disorder::List { values } => Ok(values.clone()),
            Disorder::Uniform { width, sites, seed } => {
                if !(*width >= 0.0) {
                    return Err(Error::Invalid("disorder width must be non-negative".into()));
                }
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                Ok((0..*sites).map(|_| width * (rng.gen::<f64>() - 0.5)).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HubbardOptions {
    pub n_sites: usize,
    /// Ω_dr, rad/s.
    pub omega_dr: f64,
    /// Ω₃, rad/s.
    pub omega_3: f64,
    /// Screening distance, m; `None` is unscreened.
    pub d_scr: Option<f64>,
    /// Find d_scr so that U equals this multiple of t_c (overrides d_scr).
    pub u_over_tc: Option<f64>,
    pub z0_over_a: f64,
    pub u_sublattice: Sublattice,
    pub disorder: Disorder,
    pub bands: BandConfig,
}

impl Default for HubbardOptions {
    fn default() -> Self {
        Self {
            n_sites: 8,
            omega_dr: 0.0,
            omega_3: 0.0,
            d_scr: None,
            u_over_tc: None,
            z0_over_a: 0.05,
            u_sublattice: Sublattice::Minus,
            disorder: Disorder::None,
            bands: BandConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct HubbardParams {
    pub e_r_uev: f64,
    pub v0_uev: f64,
    /// Analytic t_c from V₀ and E_R, μeV.
    pub t_c_uev: f64,
    pub t_c_numeric_plus_uev: f64,
    pub t_c_numeric_minus_uev: f64,
    /// ⟨w_0|H|w_1⟩ from real-space quadrature (sign flipped), |−⟩ sublattice.
    pub t_c_wannier_minus_uev: f64,
    pub t_pm_uev: f64,
    /// |t_±| / t_c with the analytic t_c.
    pub t_rat: f64,
    pub strong_drive: bool,
    pub t_soi_uev: f64,
    pub t_soi_verbatim: f64,
    pub u_uev: f64,
    pub u_ijkl_uev: [[[[f64; 2]; 2]; 2]; 2],
    pub d_scr: Option<f64>,
    pub z0: f64,
    /// Half the difference of the |+⟩ and |−⟩ band centres, μeV.
    pub eps_offset_uev: f64,
    pub mu_uev: Vec<f64>,
    pub isolation_margin_plus: Option<f64>,
    pub isolation_margin_minus: Option<f64>,
}

/// Both sublattice Wannier sets on a common grid.
pub fn wannier_pair(
    rabi_er: f64,
    delta_er: f64,
    n_sites: usize,
    cfg: &BandConfig,
    min_points: usize,
) -> Result<(BandSolution, BandSolution, WannierSet, WannierSet)> {
    let bp = band_structure(&PeriodicPotential::adiabatic(rabi_er, delta_er, Sublattice::Plus), n_sites, cfg)?;
    let bm = band_structure(&PeriodicPotential::adiabatic(rabi_er, delta_er, Sublattice::Minus), n_sites, cfg)?;
    let need = |b: &BandSolution| 2 * (2 * b.n_max + b.potential.coeffs.len() + 2);
    let p = need(&bp).max(need(&bm)).max(min_points).next_multiple_of(2);
    let wp = wannier_functions(&bp, 0, Sublattice::Plus.center(), Some(p))?;
    let wm = wannier_functions(&bm, 0, Sublattice::Minus.center(), Some(p))?;
    Ok((bp, bm, wp, wm))
}

pub fn hubbard_params(material: &MaterialSpec, drive: &DriveSpec, opts: &HubbardOptions) -> Result<HubbardParams> {
    material.validate()?;
    drive.validate()?;
    if opts.n_sites < 8 {
        return Err(Error::Invalid("hubbard: n_sites must be >= 8".into()));
    }
    if !(opts.z0_over_a > 0.0) {
        return Err(Error::Invalid("hubbard: z0_over_a must be positive".into()));
    }
    let e_r = units::uev(units::recoil_energy(drive.a, material.eff_mass));
    let v0 = trap_depth(drive.rabi, drive.delta);
    let to = |x: f64| units::to_uev(x * e_r);
    let min_points = (8.0 / opts.z0_over_a).ceil() as usize;
    let (bp, bm, wp, wm) = wannier_pair(drive.rabi / e_r, drive.delta / e_r, opts.n_sites, &opts.bands, min_points)?;
    let t_c = e_r * tc_analytic(v0 / e_r);
    let dh = driven_hopping(&wp, &wm, opts.omega_dr / e_r, opts.omega_3 / e_r, drive.rabi, drive.delta)?;
    let soi = soi_hopping(material.rashba.abs().max(material.dresselhaus.abs()), units::to_uev(v0), units::to_uev(e_r), drive.a)?;
    let ws = match opts.u_sublattice {
        Sublattice::Plus => &wp,
        Sublattice::Minus => &wm,
    };
    let z0 = opts.z0_over_a * drive.a;
    let d_scr = match opts.u_over_tc {
        Some(ratio) => Some(screening_for_ratio(ws, drive.a, material.dielectric_const, z0, ratio * units::to_uev(t_c))?),
        None => opts.d_scr,
    };
    let inter = onsite_interaction(ws, drive.a, material.dielectric_const, d_scr, z0)?;
    let mean = |b: &BandSolution| b.band(0).iter().sum::<f64>() / b.n_q() as f64;
    Ok(HubbardParams {
        e_r_uev: units::to_uev(e_r),
        v0_uev: units::to_uev(v0),
        t_c_uev: units::to_uev(t_c),
        t_c_numeric_plus_uev: to(tc_numeric(&bp)),
        t_c_numeric_minus_uev: to(tc_numeric(&bm)),
        t_c_wannier_minus_uev: to(-wm.hamiltonian_element(0, 1)),
        t_pm_uev: to(dh.t_pm),
        t_rat: if t_c > 0.0 { (dh.t_pm * e_r).abs() / t_c } else { f64::INFINITY },
        strong_drive: dh.strong_drive,
        t_soi_uev: soi.t_soi_uev,
        t_soi_verbatim: soi.verbatim,
        u_uev: inter.u_uev,
        u_ijkl_uev: inter.u_ijkl,
        d_scr,
        z0,
        eps_offset_uev: to(0.5 * (mean(&bp) - mean(&bm))),
        mu_uev: opts.disorder.sample()?,
        isolation_margin_plus: wp.isolation_margin,
        isolation_margin_minus: wm.isolation_margin,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SweepPoint {
    pub drive_over_rabi: f64,
    pub rabi_over_delta: f64,
    pub t_rat: f64,
    pub log10_t_rat: f64,
}

/// t_rat = |t_±|/t_c over (Ω_dr/Ω₀, Ω₀/Δ) at fixed √(V₀/4E_R) = `n_b_sqrt`,
/// reached by choosing E_R (equivalently a) at every Ω₀/Δ. Ω₃ = 0 and t_c
/// is the geometric mean of the numeric values of both sublattices.
/// Rows are ordered by Ω₀/Δ, then Ω_dr/Ω₀.
pub fn hopping_ratio_sweep(drive_over_rabi: &[f64], rabi_over_delta: &[f64], n_b_sqrt: f64, n_sites: usize) -> Result<Vec<SweepPoint>> {
    if !(n_b_sqrt > 0.0) {
        return Err(Error::Invalid("n_b_sqrt must be positive".into()));
    }
    let cols: Result<Vec<Vec<SweepPoint>>> = rabi_over_delta
        .par_iter()
        .map(|&rho| {
            if !(rho > 0.0) {
                return Err(Error::Invalid("Omega0/Delta must be positive".into()));
            }
            let v0 = trap_depth(rho, 1.0);
            let e_r = v0 / (4.0 * n_b_sqrt * n_b_sqrt);
            let (rabi, delta) = (rho / e_r, 1.0 / e_r);
            let (bp, bm, wp, wm) = wannier_pair(rabi, delta, n_sites, &BandConfig::default(), 0)?;
            let tc = (tc_numeric(&bp) * tc_numeric(&bm)).sqrt();
            Ok(drive_over_rabi
                .iter()
                .map(|&x| {
                    let t = driven_hopping(&wp, &wm, x * rabi, 0.0, rabi, delta).map(|d| d.t_pm.abs()).unwrap_or(f64::NAN);
                    let r = t / tc;
                    SweepPoint { drive_over_rabi: x, rabi_over_delta: rho, t_rat: r, log10_t_rat: r.log10() }
                })
                .collect())
        })
        .collect();
    Ok(cols?.into_iter().flatten().collect())
}
