//! Classical stability of the hybrid trap: decorrelated mean-field equations
//! and the generalized Mathieu equation
//! z̈ + [r + 2q cos 2τ − r cos 2ητ] z = 0, τ = ωt/2.

use nalgebra::{Matrix2, SVector, Vector2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::{Gauss6, OdeOptions};
use crate::units::HBAR;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityParams {
    /// V_SAW/E_S.
    pub q: f64,
    /// Ω₀²/(4E_S|Δ|).
    pub r: f64,
    /// |Δ|/ω.
    pub eta: f64,
}

impl StabilityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.q >= 0.0) || !(self.r >= 0.0) || !(self.eta > 0.0) {
            return Err(Error::Invalid("stability: need q >= 0, r >= 0, eta > 0".into()));
        }
        Ok(())
    }
}

/// (q, r, η) from Ω₀, Δ, V_SAW, ω (rad/s), mass (kg) and k (1/m), with
/// E_S = m(ω/k)²/2.
pub fn derive_params(rabi: f64, delta: f64, v_saw: f64, mass: f64, omega: f64, k: f64) -> Result<StabilityParams> {
    if delta == 0.0 {
        return Err(Error::Invalid("Delta = 0 leaves r undefined; detune the drive from the Larmor frequency".into()));
    }
    if !(mass > 0.0) || !(omega > 0.0) || !(k > 0.0) {
        return Err(Error::Invalid("mass, omega and k must be positive".into()));
    }
    let v = omega / k;
    let e_s = 0.5 * mass * v * v / HBAR;
    Ok(StabilityParams { q: v_saw.abs() / e_s, r: rabi * rabi / (4.0 * e_s * delta.abs()), eta: delta.abs() / omega })
}

/// Mean-field state: z̃ = kz, p̃ = dz̃/dτ and ⟨σ⟩.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldState {
    pub z: f64,
    pub p: f64,
    pub sigma: [f64; 3],
}

impl MeanFieldState {
    fn to_vec(self) -> SVector<f64, 5> {
        SVector::<f64, 5>::from([self.z, self.p, self.sigma[0], self.sigma[1], self.sigma[2]])
    }

    fn from_vec(y: &SVector<f64, 5>) -> Self {
        Self { z: y[0], p: y[1], sigma: [y[2], y[3], y[4]] }
    }

    pub fn spin_norm(&self) -> f64 {
        self.sigma.iter().map(|s| s * s).sum::<f64>().sqrt()
    }
}

/// Mean-field model, fixed by (q, r, η) and ε = Ω₀/Δ. Then Ω₀/E_S = 4r/ε
/// and Ω₀/ω = εη.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub stability: StabilityParams,
    pub rabi_over_delta: f64,
}

/// z̃' = p̃
/// p̃' = (2V/E_S) sin z̃ cos 2τ + (Ω₀/2E_S) sin z̃ ⟨σˣ⟩
/// σˣ' = −2(Δ/ω)σʸ
/// σʸ' = 2(Δ/ω)σˣ − (Ω₀/ω) cos z̃ σᶻ
/// σᶻ' = (Ω₀/ω) cos z̃ σʸ
fn mean_field_rhs(mp: &MeanFieldParams) -> impl Fn(f64, &SVector<f64, 5>) -> SVector<f64, 5> {
    let sp = mp.stability;
    let eps = mp.rabi_over_delta;
    let rabi_es = if eps != 0.0 { 4.0 * sp.r / eps } else { 0.0 };
    let rabi_w = eps * sp.eta;
    let (q, eta) = (sp.q, sp.eta);
    move |tau: f64, y: &SVector<f64, 5>| {
        let (s, c) = y[0].sin_cos();
        SVector::<f64, 5>::from([
            y[1],
            2.0 * q * s * (2.0 * tau).cos() + 0.5 * rabi_es * s * y[2],
            -2.0 * eta * y[3],
            2.0 * eta * y[2] - rabi_w * c * y[4],
            rabi_w * c * y[3],
        ])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeanFieldTrajectory {
    pub tau: Vec<f64>,
    pub states: Vec<MeanFieldState>,
    pub max_spin_norm_drift: f64,
}

pub fn integrate_mean_field(
    mp: &MeanFieldParams,
    init: &MeanFieldState,
    times: &[f64],
    tol: f64,
) -> Result<MeanFieldTrajectory> {
    mp.stability.validate()?;
    if (init.spin_norm() - 1.0).abs() > 1e-12 {
        return Err(Error::Invalid(format!("initial spin norm {} != 1", init.spin_norm())));
    }
    if mp.rabi_over_delta == 0.0 && mp.stability.r != 0.0 {
        return Err(Error::Invalid("r > 0 needs a non-zero Omega0/Delta".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Invalid("tolerance must be positive".into()));
    }
    let opts = OdeOptions { rtol: tol, atol: tol, h_max: 0.1 / mp.stability.eta.max(1.0), ..OdeOptions::default() };
    let ys = Gauss6::sample(mean_field_rhs(mp), 0.0, init.to_vec(), times, &opts)?;
    let states: Vec<MeanFieldState> = ys.iter().map(MeanFieldState::from_vec).collect();
    let drift = states.iter().map(|s| (s.spin_norm() - 1.0).abs()).fold(0.0, f64::max);
    Ok(MeanFieldTrajectory { tau: times.to_vec(), states, max_spin_norm_drift: drift })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Monodromy,
    Lyapunov,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassifyConfig {
    pub max_denominator: u64,
    pub rational_tol: f64,
    /// Spectral-radius tolerance for the monodromy test.
    pub radius_tol: f64,
    pub lyapunov_tau: f64,
    /// Growth rate per π below which a Lyapunov run counts as stable.
    pub lyapunov_threshold: f64,
    pub ode_tol: f64,
    /// Force one method regardless of η.
    pub force: Option<Method>,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            max_denominator: 100,
            rational_tol: 1e-9,
            radius_tol: 1e-6,
            lyapunov_tau: 1e4,
            lyapunov_threshold: 1e-3,
            ode_tol: 1e-11,
            force: None,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct StabilityPoint {
    pub params: StabilityParams,
    pub stable: bool,
    /// Monodromy: spectral radius over one period. Lyapunov: growth rate per π.
    pub growth_exponent: f64,
    /// Distance from the decision threshold (positive means unstable).
    pub margin: f64,
    pub method: Method,
    /// Integration period (monodromy), in τ.
    pub period: f64,
    /// det of the monodromy matrix.
    pub det: f64,
}

/// Best rational p/p′ with p′ ≤ `max_den` within `tol`, by continued
/// fractions.
pub fn rational_approx(x: f64, max_den: u64, tol: f64) -> Option<(u64, u64)> {
    if !(x > 0.0) || !x.is_finite() {
        return None;
    }
    let (mut h0, mut h1) = (0u64, 1u64);
    let (mut k0, mut k1) = (1u64, 0u64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        if a > 1e12 {
            break;
        }
        let ai = a as u64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_den {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        if (x - h1 as f64 / k1 as f64).abs() <= tol {
            return Some((h1, k1));
        }
        let frac = v - a;
        if frac < 1e-15 {
            break;
        }
        v = 1.0 / frac;
    }
    (k1 > 0 && (x - h1 as f64 / k1 as f64).abs() <= tol).then_some((h1, k1))
}

fn hill_rhs(sp: StabilityParams) -> impl Fn(f64, &SVector<f64, 4>) -> SVector<f64, 4> {
    move |tau: f64, y: &SVector<f64, 4>| {
        let f = sp.r + 2.0 * sp.q * (2.0 * tau).cos() - sp.r * (2.0 * sp.eta * tau).cos();
        SVector::<f64, 4>::from([y[1], -f * y[0], y[3], -f * y[2]])
    }
}

/// Fundamental matrix of the generalized Mathieu equation from τ₀ to τ₁.
fn propagate_fundamental(sp: StabilityParams, t0: f64, t1: f64, y0: SVector<f64, 4>, tol: f64) -> Result<SVector<f64, 4>> {
    let scale = (sp.r + 2.0 * sp.q).sqrt().max(1.0).max(sp.eta);
    let opts = OdeOptions { rtol: tol, atol: tol, h_max: 0.25 / scale, ..OdeOptions::default() };
    Gauss6::integrate(hill_rhs(sp), t0, y0, t1, &opts)
}

fn to_matrix(y: &SVector<f64, 4>) -> Matrix2<f64> {
    Matrix2::new(y[0], y[2], y[1], y[3])
}

fn spectral_radius(m: &Matrix2<f64>) -> f64 {
    let tr = m.trace();
    let det = m.determinant();
    let disc = tr * tr - 4.0 * det;
    if disc >= 0.0 {
        let s = disc.sqrt();
        ((tr + s) / 2.0).abs().max(((tr - s) / 2.0).abs())
    } else {
        det.abs().sqrt()
    }
}

/// Monodromy matrix over `period` and its determinant.
pub fn monodromy(sp: StabilityParams, period: f64, tol: f64) -> Result<Matrix2<f64>> {
    let y0 = SVector::<f64, 4>::from([1.0, 0.0, 0.0, 1.0]);
    Ok(to_matrix(&propagate_fundamental(sp, 0.0, period, y0, tol)?))
}

/// Benettin estimate of the largest growth rate per π over `tau_max`.
pub fn lyapunov_rate(sp: StabilityParams, tau_max: f64, tol: f64) -> Result<f64> {
    let pi = std::f64::consts::PI;
    let n = (tau_max / pi).ceil().max(1.0) as usize;
    let mut basis = Matrix2::<f64>::identity();
    let mut log_sum = 0.0;
    for i in 0..n {
        let y0 = SVector::<f64, 4>::from([basis[(0, 0)], basis[(1, 0)], basis[(0, 1)], basis[(1, 1)]]);
        let y = propagate_fundamental(sp, i as f64 * pi, (i + 1) as f64 * pi, y0, tol)?;
        let m = to_matrix(&y);
        let qr = m.qr();
        let r = qr.r();
        log_sum += r[(0, 0)].abs().ln();
        basis = qr.q();
    }
    Ok(log_sum / n as f64)
}

pub fn classify(sp: StabilityParams, cfg: &ClassifyConfig) -> Result<StabilityPoint> {
    sp.validate()?;
    let pi = std::f64::consts::PI;
    let period = if sp.r == 0.0 {
        Some(pi)
    } else {
        rational_approx(sp.eta, cfg.max_denominator, cfg.rational_tol).map(|(_, den)| pi * den as f64)
    };
    let method = match (cfg.force, period) {
        (Some(m), _) => m,
        (None, Some(_)) => Method::Monodromy,
        (None, None) => Method::Lyapunov,
    };
    match method {
        Method::Monodromy => {
            let period = period.ok_or_else(|| {
                Error::Invalid(format!("eta = {} has no rational form with denominator <= {}", sp.eta, cfg.max_denominator))
            })?;
            let m = monodromy(sp, period, cfg.ode_tol)?;
            let rho = spectral_radius(&m);
            Ok(StabilityPoint {
                params: sp,
                stable: rho <= 1.0 + cfg.radius_tol,
                growth_exponent: rho,
                margin: rho - 1.0 - cfg.radius_tol,
                method,
                period,
                det: m.determinant(),
            })
        }
        Method::Lyapunov => {
            let rate = lyapunov_rate(sp, cfg.lyapunov_tau, cfg.ode_tol)?;
            Ok(StabilityPoint {
                params: sp,
                stable: rate < cfg.lyapunov_threshold,
                growth_exponent: rate,
                margin: rate - cfg.lyapunov_threshold,
                method,
                period: pi,
                det: f64::NAN,
            })
        }
    }
}

/// Smallest unstable q in [lo, hi] along a line of fixed (r, η), assuming
/// `lo` is stable and `hi` unstable.
pub fn stability_edge(r: f64, eta: f64, lo: f64, hi: f64, tol: f64, cfg: &ClassifyConfig) -> Result<f64> {
    let at = |q: f64| classify(StabilityParams { q, r, eta }, cfg).map(|p| p.stable);
    if !at(lo)? || at(hi)? {
        return Err(Error::Invalid(format!("edge bracket [{lo}, {hi}] is not stable/unstable")));
    }
    let (mut a, mut b) = (lo, hi);
    while b - a > tol {
        let m = 0.5 * (a + b);
        if at(m)? {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Verdicts on a (q, r) grid, r-major: point (iq, ir) is at ir·nq + iq.
pub fn diagram(q: &[f64], r: &[f64], eta: f64, cfg: &ClassifyConfig) -> Vec<Result<StabilityPoint>> {
    let pts: Vec<(f64, f64)> = r.iter().flat_map(|&rr| q.iter().map(move |&qq| (qq, rr))).collect();
    pts.par_iter().map(|&(qq, rr)| classify(StabilityParams { q: qq, r: rr, eta }, cfg)).collect()
}

/// Evenly spaced samples on [lo, hi].
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Verdict from the nonlinear mean-field flow: start at z̃ = π + δ₀ with the
/// spin down and call the run unstable if |z̃ − π| exceeds `escape`.
pub fn mean_field_verdict(mp: &MeanFieldParams, delta0: f64, tau_max: f64, escape: f64, tol: f64) -> Result<bool> {
    let init = MeanFieldState { z: std::f64::consts::PI + delta0, p: 0.0, sigma: [0.0, 0.0, -1.0] };
    let n = (tau_max / std::f64::consts::PI).ceil() as usize;
    let times: Vec<f64> = (1..=n).map(|i| i as f64 * std::f64::consts::PI).collect();
    let traj = integrate_mean_field(mp, &init, &times, tol)?;
    Ok(traj.states.iter().all(|s| (s.z - std::f64::consts::PI).abs() < escape))
}

/// Linear solution of the generalized Mathieu equation at `times`.
pub fn mathieu_solution(sp: StabilityParams, z0: f64, p0: f64, times: &[f64], tol: f64) -> Result<Vec<Vector2<f64>>> {
    let rhs = |tau: f64, y: &SVector<f64, 2>| {
        let f = sp.r + 2.0 * sp.q * (2.0 * tau).cos() - sp.r * (2.0 * sp.eta * tau).cos();
        SVector::<f64, 2>::from([y[1], -f * y[0]])
    };
    let opts = OdeOptions { rtol: tol, atol: tol, h_max: 0.1, ..OdeOptions::default() };
    Gauss6::sample(rhs, 0.0, Vector2::new(z0, p0), times, &opts)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn continued_fraction() {
        assert_eq!(rational_approx(0.1, 100, 1e-9), Some((1, 10)));
        assert_eq!(rational_approx(0.75, 100, 1e-9), Some((3, 4)));
        assert_eq!(rational_approx(2f64.sqrt(), 100, 1e-9), None);
    }

    #[test]
    fn free_motion_is_marginal() {
        let p = classify(StabilityParams { q: 0.0, r: 0.0, eta: 0.1 }, &ClassifyConfig::default()).unwrap();
        assert!(p.stable);
        assert!((p.growth_exponent - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mathieu_examples() {
        let cfg = ClassifyConfig::default();
        assert!(classify(StabilityParams { q: 0.5, r: 0.0, eta: 0.1 }, &cfg).unwrap().stable);
        assert!(!classify(StabilityParams { q: 1.0, r: 0.0, eta: 0.1 }, &cfg).unwrap().stable);
    }

    #[test]
    fn zero_drive_is_free_flight() {
        let mp = MeanFieldParams { stability: StabilityParams { q: 0.0, r: 0.0, eta: 0.3 }, rabi_over_delta: 0.0 };
        let init = MeanFieldState { z: 0.3, p: 0.2, sigma: [0.0, 0.0, -1.0] };
        let t = integrate_mean_field(&mp, &init, &[5.0, 10.0], 1e-12).unwrap();
        assert!((t.states[1].z - 2.3).abs() < 1e-10);
    }
}
