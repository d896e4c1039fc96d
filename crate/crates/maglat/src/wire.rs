//! Field of a meandering superconducting wire: N parallel infinite lines at
//! z = n·a, x = 0 carrying alternating currents (−1)ⁿI₀, sampled in the plane
//! x = d of the electron gas.
//!
//! In units of a, the reduced field is
//! b_z + i b_x = Σₙ (−1)ⁿ((z − n) + ix)/((z − n)² + x²) = −Σₙ (−1)ⁿ/(ξ + n)
//! with ξ = −z + ix, and B = μ₀I₀/(2πa)·b.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digamma::digamma;
use crate::error::{Error, Result};
use crate::units::{mu_b_uev_per_t, C_LIGHT, MU_0};

/// Critical current density of the reference NbN wire, A/m² (30 MA/cm²).
pub const J_CRITICAL: f64 = 30e6 * 1e4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WireGeometry {
    pub n_wires: usize,
    /// Wire spacing, m.
    pub a: f64,
    /// Depth of the electron gas below the wire plane, m.
    pub d: f64,
    /// Current amplitude, A.
    pub current: f64,
    /// Drive angular frequency, rad/s.
    pub omega: f64,
    /// Wire cross-section (width, height), m.
    pub cross_section: (f64, f64),
}

impl WireGeometry {
    /// The reference geometry: 50 wires, a = 1 μm, I₀ = 70 mA, 480 nm square
    /// wires, d = a.
    pub fn reference() -> Self {
        Self { n_wires: 50, a: 1e-6, d: 1e-6, current: 0.07, omega: 0.0, cross_section: (480e-9, 480e-9) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_wires == 0 {
            return Err(Error::Invalid("wire: n_wires must be >= 1".into()));
        }
        if !(self.a > 0.0) || !(self.d > 0.0) || !(self.current > 0.0) {
            return Err(Error::Invalid("wire: a, d and current must be positive".into()));
        }
        if !(self.cross_section.0 > 0.0) || !(self.cross_section.1 > 0.0) {
            return Err(Error::Invalid("wire: cross-section must be positive".into()));
        }
        Ok(())
    }

    /// I₀ / (w·h), A/m².
    pub fn current_density(&self) -> f64 {
        self.current / (self.cross_section.0 * self.cross_section.1)
    }

    pub fn current_feasible(&self) -> bool {
        self.current_density() <= J_CRITICAL * (1.0 + 1e-9)
    }

    /// μ₀I₀/(2πa), T.
    pub fn field_scale(&self) -> f64 {
        MU_0 * self.current / (2.0 * std::f64::consts::PI * self.a)
    }

    fn wire_radius(&self) -> f64 {
        0.5 * self.cross_section.0.min(self.cross_section.1)
    }
}

/// Field amplitudes on a rectangular (z, x) grid, row-major in x.
#[derive(Debug, Clone, Serialize)]
pub struct FieldMap {
    pub z: Vec<f64>,
    pub x: Vec<f64>,
    /// bx[i * z.len() + j] at (z[j], x[i]), T.
    pub bx: Vec<f64>,
    pub bz: Vec<f64>,
    pub geometry: WireGeometry,
}

impl FieldMap {
    pub fn at(&self, ix: usize, iz: usize) -> (f64, f64) {
        let k = ix * self.z.len() + iz;
        (self.bx[k], self.bz[k])
    }

    pub fn magnitude(&self, ix: usize, iz: usize) -> f64 {
        let (bx, bz) = self.at(ix, iz);
        bx.hypot(bz)
    }
}

/// Direct superposition of the line fields (μ₀I/2π)(x, z − na)/((z − na)² + x²).
pub fn biot_savart_map(geom: &WireGeometry, z: &[f64], x: &[f64]) -> Result<FieldMap> {
    geom.validate()?;
    let r_w = geom.wire_radius();
    for (ix, &xx) in x.iter().enumerate() {
        for (iz, &zz) in z.iter().enumerate() {
            let n = (zz / geom.a).round();
            if n >= 0.0 && (n as usize) < geom.n_wires && (zz - n * geom.a).hypot(xx) <= r_w {
                return Err(Error::Invalid(format!(
                    "grid point (z[{iz}], x[{ix}]) = ({zz:e}, {xx:e}) m lies inside wire {n}"
                )));
            }
        }
    }
    let c = MU_0 * geom.current / (2.0 * std::f64::consts::PI);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = x
        .par_iter()
        .map(|&xx| {
            let mut bx = Vec::with_capacity(z.len());
            let mut bz = Vec::with_capacity(z.len());
            for &zz in z {
                let (mut sx, mut sz) = (0.0, 0.0);
                for n in 0..geom.n_wires {
                    let dz = zz - n as f64 * geom.a;
                    let r2 = dz * dz + xx * xx;
                    let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                    sx += s * xx / r2;
                    sz += s * dz / r2;
                }
                bx.push(c * sx);
                bz.push(c * sz);
            }
            (bx, bz)
        })
        .collect();
    let mut bx = Vec::with_capacity(x.len() * z.len());
    let mut bz = Vec::with_capacity(x.len() * z.len());
    for (rx, rz) in rows {
        bx.extend(rx);
        bz.extend(rz);
    }
    Ok(FieldMap { z: z.to_vec(), x: x.to_vec(), bx, bz, geometry: *geom })
}

/// Reduced field b_z + i·b_x at (z, x) in units of a, for `n_wires` wires or
/// the semi-infinite array when `None`.
///
/// With Σ_{n≥0} (−1)ⁿ/(ξ + n) = ½[ψ((ξ+1)/2) − ψ(ξ/2)], the finite sum is
/// b = ½[ψ(ξ/2) − ψ((ξ+1)/2)] + (−1)ᴺ·½[ψ((ξ+N+1)/2) − ψ((ξ+N)/2)].
pub fn digamma_field(z: f64, x: f64, n_wires: Option<usize>) -> Result<Complex64> {
    let xi = Complex64::new(-z, x);
    let pole = || Error::Invalid(format!("digamma pole at (z, x) = ({z}, {x})"));
    let half = |w: Complex64| digamma(0.5 * w).ok_or_else(pole);
    let mut b = 0.5 * (half(xi)? - half(xi + 1.0)?);
    if let Some(n) = n_wires {
        if n == 0 {
            return Err(Error::Invalid("n_wires must be >= 1".into()));
        }
        let nf = n as f64;
        let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
        b += sign * 0.5 * (half(xi + nf + 1.0)? - half(xi + nf)?);
    }
    Ok(b)
}

/// Digamma-based map over the same grid as [`biot_savart_map`].
pub fn digamma_map(geom: &WireGeometry, z: &[f64], x: &[f64]) -> Result<FieldMap> {
    geom.validate()?;
    let c = geom.field_scale();
    let rows: Result<Vec<Vec<Complex64>>> = x
        .par_iter()
        .map(|&xx| z.iter().map(|&zz| digamma_field(zz / geom.a, xx / geom.a, Some(geom.n_wires))).collect())
        .collect();
    let rows = rows?;
    let mut bx = Vec::with_capacity(x.len() * z.len());
    let mut bz = Vec::with_capacity(x.len() * z.len());
    for row in rows {
        for b in row {
            bz.push(c * b.re);
            bx.push(c * b.im);
        }
    }
    Ok(FieldMap { z: z.to_vec(), x: x.to_vec(), bx, bz, geometry: *geom })
}

/// Sum of Σ_{n≥0} (−1)ⁿ f(n) by the Cohen–Villegas–Zagier scheme with `m`
/// terms.
fn cvz<F: Fn(usize) -> f64>(f: F, m: usize) -> f64 {
    let d = (3.0 + 8f64.sqrt()).powi(m as i32);
    let d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..m {
        c = b - c;
        s += c * f(k);
        let kf = k as f64;
        let mf = m as f64;
        b *= (kf + mf) * (kf - mf) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// Σ_{n≥0} (−1)ⁿ f(n), summing the first terms directly until the summand is
/// monotone and accelerating the rest. Returns (value, tail bound).
fn alternating_sum<F: Fn(f64) -> f64>(f: F, start: usize) -> (f64, f64) {
    let head: f64 = (0..start).map(|n| if n % 2 == 0 { f(n as f64) } else { -f(n as f64) }).sum();
    let sign = if start.is_multiple_of(2) { 1.0 } else { -1.0 };
    let g = |k: usize| f((start + k) as f64);
    let t1 = cvz(g, 40);
    let t2 = cvz(g, 56);
    (head + sign * t2, (t2 - t1).abs())
}

/// The two wire series for u = d/a:
/// S_x = Σ (−1)ⁿ/((n+½)² + u²), S_z = Σ (−1)ⁿ(n+½)/((n+½)² + u²).
pub fn wire_series(u: f64) -> (f64, f64, f64) {
    // (n+½)/((n+½)²+u²) decreases only for n + ½ > u
    let start = (u.ceil() as usize) + 1;
    let (sx, ex) = alternating_sum(|n| 1.0 / ((n + 0.5).powi(2) + u * u), start);
    let (sz, ez) = alternating_sum(|n| (n + 0.5) / ((n + 0.5).powi(2) + u * u), start);
    (sx, sz, ex.max(ez))
}

/// Partial sums of S_x, used to show Leibniz bracketing.
pub fn wire_series_partial(u: f64, count: usize) -> Vec<f64> {
    let mut s = 0.0;
    (0..count)
        .map(|n| {
            let t = 1.0 / ((n as f64 + 0.5).powi(2) + u * u);
            s += if n % 2 == 0 { t } else { -t };
            s
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RabiAmplitudes {
    /// Transverse Rabi amplitude Ω₀ˣ, μeV.
    pub x_uev: f64,
    /// Longitudinal amplitude Ω₀ᶻ, μeV.
    pub z_uev: f64,
    pub tail_bound: f64,
}

/// Ω₀ˣ = |g|μ_B·(d/a)(μ₀I₀/πa)·S_x and Ω₀ᶻ = |g|μ_B·(μ₀I₀/πa)·S_z.
///
/// Both equal twice the semi-infinite array field at z = −a/2:
/// Ω₀ˣ ∝ 2·Im b(−½, d/a), Ω₀ᶻ ∝ −2·Re b(−½, d/a).
pub fn rabi_amplitudes(d: f64, a: f64, current: f64, g_factor: f64) -> Result<RabiAmplitudes> {
    if !(d > 0.0) || !(a > 0.0) {
        return Err(Error::Invalid("d and a must be positive".into()));
    }
    let u = d / a;
    let (sx, sz, tail) = wire_series(u);
    let b = MU_0 * current / (std::f64::consts::PI * a);
    let gmu = g_factor.abs() * mu_b_uev_per_t();
    Ok(RabiAmplitudes { x_uev: gmu * u * b * sx, z_uev: gmu * b * sz, tail_bound: tail })
}

/// Least-squares fit of y ≈ A·sin(πz/a + φ).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SineFit {
    pub amplitude: f64,
    /// Fixed at 2a.
    pub period: f64,
    pub phase: f64,
    /// max |residual| / A over the central half of the sampled range.
    pub central_residual: f64,
    /// max |residual| / A over the outer quarters.
    pub edge_residual: f64,
    /// max |residual| / A over all samples.
    pub max_residual: f64,
    pub degenerate: bool,
}

pub fn fit_sine_profile(z: &[f64], y: &[f64], a: f64) -> Result<SineFit> {
    if z.len() != y.len() || z.len() < 3 {
        return Err(Error::Invalid("fit needs matching z/y of length >= 3".into()));
    }
    let (z0, z1) = (z[0], z[z.len() - 1]);
    let span = z1 - z0;
    let per_period = (z.len() - 1) as f64 * 2.0 * a / span.abs();
    if !(per_period >= 8.0 - 1e-9) {
        return Err(Error::Invalid(format!("only {per_period:.1} samples per period, need >= 8")));
    }
    let k = std::f64::consts::PI / a;
    let (mut ss, mut sc, mut cc, mut ys, mut yc) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&zi, &yi) in z.iter().zip(y) {
        let (s, c) = (k * zi).sin_cos();
        ss += s * s;
        sc += s * c;
        cc += c * c;
        ys += yi * s;
        yc += yi * c;
    }
    let det = ss * cc - sc * sc;
    let p = (ys * cc - yc * sc) / det;
    let q = (yc * ss - ys * sc) / det;
    let amplitude = p.hypot(q);
    let scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let degenerate = !(amplitude > 1e-9 * scale.max(f64::MIN_POSITIVE));
    let (lo, hi) = (z0 + 0.25 * span, z0 + 0.75 * span);
    let (mut central, mut edge) = (0.0f64, 0.0f64);
    for (&zi, &yi) in z.iter().zip(y) {
        let r = (yi - p * (k * zi).sin() - q * (k * zi).cos()).abs();
        if (zi - lo) * (zi - hi) <= 0.0 {
            central = central.max(r);
        } else {
            edge = edge.max(r);
        }
    }
    let norm = if degenerate { 1.0 } else { amplitude };
    Ok(SineFit {
        amplitude,
        period: 2.0 * a,
        phase: q.atan2(p),
        central_residual: central / norm,
        edge_residual: edge / norm,
        max_residual: central.max(edge) / norm,
        degenerate,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct JefimenkoEstimate {
    /// ωd/(c/n).
    pub ratio: f64,
    pub warning: bool,
}

/// Size of the retardation correction, ωd·n/c.
pub fn jefimenko_ratio(d: f64, omega: f64, refractive_index: f64) -> Result<JefimenkoEstimate> {
    if !(refractive_index >= 1.0) || d < 0.0 || omega < 0.0 {
        return Err(Error::Invalid("need d >= 0, omega >= 0, refractive index >= 1".into()));
    }
    let ratio = omega * d * refractive_index / C_LIGHT;
    Ok(JefimenkoEstimate { ratio, warning: ratio > 1e-2 })
}

#[derive(Debug, Clone, Serialize)]
pub struct WireReport {
    pub geometry: WireGeometry,
    pub rabi: RabiAmplitudes,
    /// Sine fits of the transverse and longitudinal rows at x = d over the
    /// whole array.
    pub fit_x: SineFit,
    pub fit_z: SineFit,
    /// Fits restricted to the central half of the array.
    pub center_fit_x: SineFit,
    pub center_fit_z: SineFit,
    /// |B₁| = A_x·μ₀I₀/(2πa) from the central fit, T.
    pub b1_center: f64,
    pub current_density: f64,
    pub current_feasible: bool,
    pub jefimenko: JefimenkoEstimate,
    /// Ω₀ᶻ/ω₀ exceeds 1 %.
    pub sigma_z_flag: bool,
}

/// Rabi amplitudes, the digamma row at x = d with its sine fits, and the
/// feasibility checks. `omega0` (rad/s) is the Larmor frequency used for
/// the σᶻ-term flag; pass 0 to skip it.
pub fn wire_report(geom: &WireGeometry, g_factor: f64, omega0: f64, samples_per_period: usize) -> Result<WireReport> {
    geom.validate()?;
    let rabi = rabi_amplitudes(geom.d, geom.a, geom.current, g_factor)?;
    let n = geom.n_wires as f64;
    let span = (n - 1.0).max(2.0);
    let z0 = 0.5 * (n - 1.0 - span);
    let count = (span * samples_per_period.max(8) as f64 / 2.0).round() as usize + 1;
    let zs: Vec<f64> = (0..count).map(|i| z0 + span * i as f64 / (count - 1) as f64).collect();
    let row: Result<Vec<Complex64>> = zs.iter().map(|&z| digamma_field(z, geom.d / geom.a, Some(geom.n_wires))).collect();
    let row = row.map_err(|_| Error::Invalid("wire row passes through a wire axis (x = d must be > 0)".into()))?;
    let bx: Vec<f64> = row.iter().map(|b| b.im).collect();
    let bz: Vec<f64> = row.iter().map(|b| b.re).collect();
    let fit_x = fit_sine_profile(&zs, &bx, 1.0)?;
    let fit_z = fit_sine_profile(&zs, &bz, 1.0)?;
    let (lo, hi) = (z0 + 0.25 * span, z0 + 0.75 * span);
    let idx: Vec<usize> = (0..zs.len()).filter(|&i| zs[i] >= lo && zs[i] <= hi).collect();
    let pick = |v: &[f64]| idx.iter().map(|&i| v[i]).collect::<Vec<f64>>();
    let zc = pick(&zs);
    let (center_fit_x, center_fit_z) = if zc.len() >= 3 && hi - lo >= 2.0 {
        (fit_sine_profile(&zc, &pick(&bx), 1.0)?, fit_sine_profile(&zc, &pick(&bz), 1.0)?)
    } else {
        (fit_x, fit_z)
    };
    let omega0_uev = crate::units::to_uev(omega0);
    Ok(WireReport {
        geometry: *geom,
        rabi,
        fit_x,
        fit_z,
        center_fit_x,
        center_fit_z,
        b1_center: center_fit_x.amplitude * geom.field_scale(),
        current_density: geom.current_density(),
        current_feasible: geom.current_feasible(),
        jefimenko: jefimenko_ratio(geom.d, geom.omega, 1.0)?,
        sigma_z_flag: omega0 > 0.0 && rabi.z_uev.abs() / omega0_uev > 0.01,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_wire_law() {
        let g = WireGeometry { n_wires: 1, ..WireGeometry::reference() };
        let m = biot_savart_map(&g, &[0.3e-6, -2e-6], &[0.7e-6]).unwrap();
        for iz in 0..2 {
            let rho = m.z[iz].hypot(m.x[0]);
            let expect = MU_0 * g.current / (2.0 * std::f64::consts::PI * rho);
            assert!((m.magnitude(0, iz) / expect - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn wire_interior_rejected() {
        let g = WireGeometry::reference();
        assert!(biot_savart_map(&g, &[3e-6], &[0.1e-6]).is_err());
    }

    #[test]
    fn cvz_matches_known_series() {
        // Σ (−1)ⁿ/(2n+1) = π/4
        let v = cvz(|k| 1.0 / (2.0 * k as f64 + 1.0), 40);
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn jefimenko_anchor() {
        let j = jefimenko_ratio(1e-6, std::f64::consts::TAU * 25e9, 1.0).unwrap();
        assert!((j.ratio - 5.24e-4).abs() < 0.01e-4);
        assert!(!j.warning);
        assert_eq!(jefimenko_ratio(1e-6, 0.0, 1.0).unwrap().ratio, 0.0);
    }

    #[test]
    fn reference_current_is_at_critical_density() {
        let g = WireGeometry::reference();
        assert!((g.current_density() / J_CRITICAL - 1.0).abs() < 0.02);
    }
}
