//! Adaptive ODE integrators on fixed-size real state vectors.
//!
//! * [`Dopri5`]: explicit Dormand–Prince 5(4) with embedded error estimate and
//!   the standard fourth-order continuous extension for dense output.
//! * [`Gauss6`]: three-stage Gauss–Legendre collocation (order 6), adaptive by
//!   step doubling. It is symplectic and preserves quadratic invariants, so
//!   norms of spin and wave-function states stay at round-off level.

use nalgebra::SVector;

use crate::error::{Error, Result};

/// Step-size control settings shared by both integrators.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Largest allowed |h|; `f64::INFINITY` for none.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_max: f64::INFINITY, max_steps: 10_000_000 }
    }
}

impl OdeOptions {
    pub fn with_tol(rtol: f64) -> Self {
        Self { rtol, atol: rtol * 1e-2, ..Self::default() }
    }

    pub fn h_max(mut self, h: f64) -> Self {
        self.h_max = h;
        self
    }
}

fn err_norm<const N: usize>(e: &SVector<f64, N>, y0: &SVector<f64, N>, y1: &SVector<f64, N>, o: &OdeOptions) -> f64 {
    let mut s = 0.0;
    for i in 0..N {
        let sk = o.atol + o.rtol * y0[i].abs().max(y1[i].abs());
        let r = e[i] / sk;
        s += r * r;
    }
    (s / N as f64).sqrt()
}

fn initial_step<const N: usize, F>(f: &mut F, t0: f64, y0: &SVector<f64, N>, dir: f64, o: &OdeOptions) -> f64
where
    F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
{
    let f0 = f(t0, y0);
    let zero = SVector::<f64, N>::zeros();
    let d0 = err_norm(y0, y0, &zero, o);
    let d1 = err_norm(&f0, y0, &zero, o);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = y0 + f0 * (dir * h0);
    let f1 = f(t0 + dir * h0, &y1);
    let d2 = err_norm(&(f1 - f0), y0, &zero, o) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(o.h_max)
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Interpolation data for one accepted step.
#[derive(Debug, Clone)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    r: [SVector<f64, N>; 5],
}

impl<const N: usize> DenseStep<N> {
    pub fn eval(&self, t: f64) -> SVector<f64, N> {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        self.r[0] + (self.r[1] + (self.r[2] + (self.r[3] + self.r[4] * th1) * th) * th1) * th
    }

    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }
}

/// Counters reported by the integrators.
#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evals: usize,
}

/// Dormand–Prince 5(4).
pub struct Dopri5;

impl Dopri5 {
    /// Integrates from `t0` to `t1`, calling `observer` after each accepted
    /// step. The observer may modify the new state in place (for projection
    /// onto a constraint manifold); the interpolant is built before that.
    pub fn run<const N: usize, F, O>(
        mut f: F,
        t0: f64,
        y0: SVector<f64, N>,
        t1: f64,
        opts: &OdeOptions,
        mut observer: O,
    ) -> Result<(SVector<f64, N>, OdeStats)>
    where
        F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
        O: FnMut(&DenseStep<N>, &mut SVector<f64, N>),
    {
        let mut stats = OdeStats::default();
        if t1 == t0 {
            return Ok((y0, stats));
        }
        let dir = (t1 - t0).signum();
        let mut t = t0;
        let mut y = y0;
        let mut h = initial_step(&mut f, t0, &y0, dir, opts);
        let mut k1 = f(t, &y);
        stats.evals += 3;
        let mut last_rejected = false;
        loop {
            if stats.accepted + stats.rejected > opts.max_steps {
                return Err(Error::NoConvergence(format!(
                    "Dopri5 exceeded {} steps at t = {t:e}",
                    opts.max_steps
                )));
            }
            let remaining = (t1 - t) * dir;
            let mut last = false;
            if h >= remaining {
                h = remaining;
                last = true;
            }
            if h < 1e-15 * t.abs().max(1.0) {
                return Err(Error::NoConvergence(format!("Dopri5 step size underflow at t = {t:e}")));
            }
            let hs = dir * h;
            let k2 = f(t + C2 * hs, &(y + k1 * (hs * A21)));
            let k3 = f(t + C3 * hs, &(y + (k1 * A31 + k2 * A32) * hs));
            let k4 = f(t + C4 * hs, &(y + (k1 * A41 + k2 * A42 + k3 * A43) * hs));
            let k5 = f(t + C5 * hs, &(y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * hs));
            let k6 = f(t + hs, &(y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * hs));
            let y1 = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * hs;
            let k7 = f(t + hs, &y1);
            stats.evals += 6;
            let e = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * hs;
            let err = err_norm(&e, &y, &y1, opts);
            if !err.is_finite() {
                // an overshooting trial step; retry much shorter
                stats.rejected += 1;
                h *= 0.1;
                last_rejected = true;
                continue;
            }
            if err <= 1.0 {
                let ydiff = y1 - y;
                let bspl = k1 * hs - ydiff;
                let step = DenseStep {
                    t0: t,
                    h: hs,
                    r: [
                        y,
                        ydiff,
                        bspl,
                        ydiff - k7 * hs - bspl,
                        (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * hs,
                    ],
                };
                let mut ynew = y1;
                observer(&step, &mut ynew);
                let projected = ynew != y1;
                t = if last { t1 } else { t + hs };
                y = ynew;
                k1 = if projected { f(t, &y) } else { k7 };
                stats.accepted += 1;
                if last {
                    return Ok((y, stats));
                }
                let mut fac = 0.9 * err.max(1e-10).powf(-0.2);
                fac = fac.clamp(0.2, 5.0);
                if last_rejected {
                    fac = fac.min(1.0);
                }
                h = (h * fac).min(opts.h_max);
                last_rejected = false;
            } else {
                stats.rejected += 1;
                let fac = (0.9 * err.powf(-0.2)).max(0.2);
                h *= fac;
                last_rejected = true;
            }
        }
    }

    pub fn integrate<const N: usize, F>(f: F, t0: f64, y0: SVector<f64, N>, t1: f64, opts: &OdeOptions) -> Result<SVector<f64, N>>
    where
        F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    {
        Self::run(f, t0, y0, t1, opts, |_, _| {}).map(|r| r.0)
    }

    /// States at the requested monotone `times` (the first may equal `t0`),
    /// evaluated through the continuous extension.
    pub fn sample<const N: usize, F>(
        f: F,
        t0: f64,
        y0: SVector<f64, N>,
        times: &[f64],
        opts: &OdeOptions,
    ) -> Result<Vec<SVector<f64, N>>>
    where
        F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    {
        let Some(&t_end) = times.last() else { return Ok(Vec::new()) };
        let dir = (t_end - t0).signum();
        let mut out = Vec::with_capacity(times.len());
        let mut idx = 0;
        while idx < times.len() && times[idx] == t0 {
            out.push(y0);
            idx += 1;
        }
        let (y_end, _) = Self::run(f, t0, y0, t_end, opts, |step, _| {
            while idx < times.len() && (step.t1() - times[idx]) * dir >= 0.0 {
                out.push(step.eval(times[idx]));
                idx += 1;
            }
        })?;
        while out.len() < times.len() {
            out.push(y_end);
        }
        Ok(out)
    }
}

const SQ15: f64 = 3.872_983_346_207_417;

/// Three-stage Gauss–Legendre collocation.
pub struct Gauss6;

impl Gauss6 {
    const C: [f64; 3] = [0.5 - SQ15 / 10.0, 0.5, 0.5 + SQ15 / 10.0];
    const B: [f64; 3] = [5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0];
    const A: [[f64; 3]; 3] = [
        [5.0 / 36.0, 2.0 / 9.0 - SQ15 / 15.0, 5.0 / 36.0 - SQ15 / 30.0],
        [5.0 / 36.0 + SQ15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - SQ15 / 24.0],
        [5.0 / 36.0 + SQ15 / 30.0, 2.0 / 9.0 + SQ15 / 15.0, 5.0 / 36.0],
    ];

    /// One implicit step; `None` when the fixed-point iteration fails.
    fn step<const N: usize, F>(f: &mut F, t: f64, y: &SVector<f64, N>, h: f64, evals: &mut usize) -> Option<SVector<f64, N>>
    where
        F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    {
        let f0 = f(t, y);
        *evals += 1;
        let mut k = [f0, f0, f0];
        let mut prev_delta = f64::INFINITY;
        for it in 0..100 {
            let mut next = [SVector::<f64, N>::zeros(); 3];
            for i in 0..3 {
                let mut yi = *y;
                for j in 0..3 {
                    yi += k[j] * (h * Self::A[i][j]);
                }
                next[i] = f(t + Self::C[i] * h, &yi);
            }
            *evals += 3;
            let mut delta: f64 = 0.0;
            let mut scale: f64 = 0.0;
            for i in 0..3 {
                delta = delta.max((next[i] - k[i]).amax());
                scale = scale.max(next[i].amax());
            }
            k = next;
            let rel = delta / scale.max(1e-300);
            if !rel.is_finite() {
                return None;
            }
            if rel <= 1e-15 || (it > 3 && rel >= prev_delta && rel < 1e-12) {
                let mut y1 = *y;
                for j in 0..3 {
                    y1 += k[j] * (h * Self::B[j]);
                }
                return Some(y1);
            }
            if it > 8 && rel > 0.5 * prev_delta.min(1.0) && rel > 1e-6 {
                return None;
            }
            prev_delta = rel;
        }
        None
    }

    /// Integrates through each of the monotone `times` exactly.
    pub fn sample<const N: usize, F>(
        mut f: F,
        t0: f64,
        y0: SVector<f64, N>,
        times: &[f64],
        opts: &OdeOptions,
    ) -> Result<Vec<SVector<f64, N>>>
    where
        F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    {
        let mut out = Vec::with_capacity(times.len());
        let mut t = t0;
        let mut y = y0;
        let mut h = f64::NAN;
        let mut stats = OdeStats::default();
        for &target in times {
            if target == t {
                out.push(y);
                continue;
            }
            let dir = (target - t).signum();
            if h.is_nan() {
                h = initial_step(&mut f, t, &y, dir, opts) * 4.0;
            }
            loop {
                if stats.accepted + stats.rejected > opts.max_steps {
                    return Err(Error::NoConvergence(format!("Gauss6 exceeded {} steps", opts.max_steps)));
                }
                let remaining = (target - t) * dir;
                if remaining <= 1e-13 * t.abs().max(1.0) {
                    t = target;
                    break;
                }
                let last = h * (1.0 + 1e-10) >= remaining;
                let hh = if last { remaining } else { h };
                if hh < 1e-15 * t.abs().max(1.0) {
                    return Err(Error::NoConvergence(format!("Gauss6 step size underflow at t = {t:e}")));
                }
                let hs = dir * hh;
                let big = Self::step(&mut f, t, &y, hs, &mut stats.evals);
                let half = Self::step(&mut f, t, &y, 0.5 * hs, &mut stats.evals)
                    .and_then(|ym| Self::step(&mut f, t + 0.5 * hs, &ym, 0.5 * hs, &mut stats.evals));
                let (Some(big), Some(small)) = (big, half) else {
                    stats.rejected += 1;
                    h = hh * 0.25;
                    continue;
                };
                let err = err_norm(&((small - big) / 63.0), &y, &small, opts);
                if err <= 1.0 {
                    stats.accepted += 1;
                    t = if last { target } else { t + hs };
                    y = small;
                    let fac = (0.9 * err.max(1e-12).powf(-1.0 / 7.0)).clamp(0.2, 4.0);
                    // keep the pre-clamp step when only the final approach was shortened
                    h = if last { h.max(hh * fac).min(opts.h_max) } else { (hh * fac).min(opts.h_max) };
                    if last {
                        break;
                    }
                } else {
                    stats.rejected += 1;
                    h = hh * (0.9 * err.powf(-1.0 / 7.0)).max(0.2);
                }
            }
            out.push(y);
        }
        Ok(out)
    }

    pub fn integrate<const N: usize, F>(f: F, t0: f64, y0: SVector<f64, N>, t1: f64, opts: &OdeOptions) -> Result<SVector<f64, N>>
    where
        F: FnMut(f64, &SVector<f64, N>) -> SVector<f64, N>,
    {
        Self::sample(f, t0, y0, &[t1], opts).map(|v| v[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Vector1, Vector2};

    fn oscillator(_t: f64, y: &Vector2<f64>) -> Vector2<f64> {
        Vector2::new(y[1], -y[0])
    }

    #[test]
    fn dopri_harmonic_oscillator() {
        let o = OdeOptions::with_tol(1e-11);
        let y = Dopri5::integrate(oscillator, 0.0, Vector2::new(1.0, 0.0), 10.0, &o).unwrap();
        assert!((y[0] - 10f64.cos()).abs() < 1e-9);
        assert!((y[1] + 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn dopri_dense_output_is_accurate() {
        let o = OdeOptions::with_tol(1e-10).h_max(0.5);
        let times: Vec<f64> = (0..=200).map(|i| i as f64 * 0.0537).collect();
        let ys = Dopri5::sample(oscillator, 0.0, Vector2::new(1.0, 0.0), &times, &o).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - t.cos()).abs() < 1e-8, "t={t} err={}", (y[0] - t.cos()).abs());
        }
    }

    #[test]
    fn dopri_runs_backward() {
        let o = OdeOptions::with_tol(1e-11);
        let y = Dopri5::integrate(|t, _y: &Vector1<f64>| Vector1::new(t.cos()), 3.0, Vector1::new(3f64.sin()), 0.0, &o).unwrap();
        assert!(y[0].abs() < 1e-9);
    }

    #[test]
    fn gauss_preserves_quadratic_invariant() {
        let o = OdeOptions::with_tol(1e-8);
        let times: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        let ys = Gauss6::sample(oscillator, 0.0, Vector2::new(1.0, 0.0), &times, &o).unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y.norm() - 1.0).abs() < 1e-13);
            assert!((y[0] - t.cos()).abs() < 1e-6);
        }
    }

    #[test]
    fn gauss_hits_sample_times_exactly() {
        let o = OdeOptions::with_tol(1e-12);
        let ys = Gauss6::sample(|t, _y: &Vector1<f64>| Vector1::new(2.0 * t), 0.0, Vector1::new(0.0), &[0.0, 0.3, 1.7], &o).unwrap();
        assert_eq!(ys[0][0], 0.0);
        assert!((ys[1][0] - 0.09).abs() < 1e-14);
        assert!((ys[2][0] - 2.89).abs() < 1e-13);
    }
}
