use maglat::spin::*;
use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use proptest::prelude::*;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// exp(−iHt) of a 2×2 Hermitian matrix through its eigen-decomposition,
/// written out for H = h0·1 + h·σ.
fn expm_hermitian(h: &Matrix2<Complex64>, t: f64) -> Matrix2<Complex64> {
    let h0 = 0.5 * (h[(0, 0)].re + h[(1, 1)].re);
    let hz = 0.5 * (h[(0, 0)].re - h[(1, 1)].re);
    let hx = h[(0, 1)].re;
    let hy = -h[(0, 1)].im;
    let n = (hx * hx + hy * hy + hz * hz).sqrt();
    let i = Complex64::i();
    let (s, co) = (n * t).sin_cos();
    let (nx, ny, nz) = if n > 0.0 { (hx / n, hy / n, hz / n) } else { (0.0, 0.0, 0.0) };
    let u = Matrix2::new(c(co) - i * (s * nz), -i * (s * nx) - c(s * ny), -i * (s * nx) + c(s * ny), c(co) + i * (s * nz));
    u * Complex64::from_polar(1.0, -h0 * t)
}

#[test]
fn rwa_limit_is_static_rabi_problem() {
    // with the counter-rotating term averaged out the RWA propagator is exact
    let (delta, rabi) = (0.4, 0.7);
    let psi0 = spin_down();
    let hf = magnus_hamiltonian(delta, rabi, 1.0, 0).unwrap();
    let u = expm_hermitian(&h_rwa(delta, rabi), 3.7);
    let direct = u * psi0;
    let via = hf.evolve(&psi0, 3.7);
    assert!(phase_aligned_distance(&direct, &via) < 1e-12);
}

#[test]
fn full_hamiltonian_averages_to_rwa() {
    let (delta, rabi, omega) = (0.3, 0.5, 2.0);
    let n = 4000;
    let period = std::f64::consts::PI / omega;
    let mut avg = Matrix2::<Complex64>::zeros();
    for j in 0..n {
        avg += rotating_frame_hamiltonian(delta, rabi, omega, period * (j as f64 + 0.5) / n as f64);
    }
    avg /= c(n as f64);
    assert!((avg - h_rwa(delta, rabi)).norm() < 1e-9);
}

#[test]
fn magnus_coefficients_match_closed_forms() {
    let (d, w, om) = (0.2, 0.3, 1.0);
    let h1 = magnus_hamiltonian(d, w, om, 1).unwrap();
    assert!((h1.sx - (0.5 * w + w * 2.0 * d / (16.0 * om))).abs() < 1e-15);
    assert!((h1.sz - (0.5 * d - w * w / (16.0 * om))).abs() < 1e-15);
    let h2 = magnus_hamiltonian(d, w, om, 2).unwrap();
    assert!((h2.sx - h1.sx + w * (4.0 * d * d + w * w) / (64.0 * om * om)).abs() < 1e-15);
    assert!(magnus_hamiltonian(d, w, om, 3).is_err());
    assert!(magnus_hamiltonian(d, w, 0.0, 0).is_err());
}

#[test]
fn second_order_error_scales_steeply_with_drive() {
    let weak = stroboscopic_error(0.2, 0.1, 2, 10, 1e-12).unwrap().max_distance;
    let strong = stroboscopic_error(0.2, 0.5, 2, 10, 1e-12).unwrap().max_distance;
    assert!(strong / weak >= 10.0, "ratio {}", strong / weak);
    let zeroth = stroboscopic_error(0.2, 0.1, 0, 10, 1e-12).unwrap().max_distance;
    assert!(weak <= zeroth, "order 2 {weak:e} vs order 0 {zeroth:e}");
}

#[test]
fn propagation_is_unitary() {
    let psi0 = Vector2::new(c(0.6), Complex64::new(0.0, 0.8));
    let tol = 1e-11;
    let times: Vec<f64> = (1..=40).map(|i| 0.5 * i as f64).collect();
    let out = propagate_full(0.3, 0.9, 1.3, &psi0, &times, tol).unwrap();
    let drift = out.iter().map(|p| (p.norm() - 1.0).abs()).fold(0.0, f64::max);
    assert!(drift < 10.0 * tol, "norm drift {drift:e}");
    // overlaps are preserved too
    let phi0 = spin_up();
    let other = propagate_full(0.3, 0.9, 1.3, &phi0, &times, tol).unwrap();
    let ov0 = phi0.dotc(&psi0);
    for (a, b) in out.iter().zip(&other) {
        assert!((b.dotc(a) - ov0).norm() < 10.0 * tol);
    }
}

#[test]
fn stroboscopic_samples_are_half_periods() {
    let cmp = stroboscopic_error(0.2, 0.3, 2, 5, 1e-10).unwrap();
    assert_eq!(cmp.times.len(), 11);
    for (n, t) in cmp.times.iter().enumerate() {
        assert!((t - n as f64 * std::f64::consts::PI).abs() < 1e-12);
    }
    assert_eq!(cmp.distance[0], 0.0);
}

#[test]
fn phase_aligned_distance_ignores_global_phase() {
    let a = Vector2::new(c(0.6), Complex64::new(0.0, 0.8));
    let b = a * Complex64::from_polar(1.0, 1.234);
    assert!(phase_aligned_distance(&a, &b) < 1e-15);
    assert!(euclidean_distance(&a, &b) > 0.1);
}

proptest! {
    #[test]
    fn adiabatic_states_diagonalize_rwa(rabi in -5.0f64..5.0, delta in -5.0f64..5.0) {
        prop_assume!(rabi.abs() + delta.abs() > 1e-6);
        let e = adiabatic_eigensystem(rabi, delta);
        let h = h_rwa(delta, rabi).map(|z| z.re);
        let (p, m) = (e.plus(), e.minus());
        let eps = 0.5 * rabi.hypot(delta);
        prop_assert!((h * p - p * eps).norm() < 1e-12);
        prop_assert!((h * m + m * eps).norm() < 1e-12);
        prop_assert!((p.dot(&m)).abs() < 1e-12);
    }

    #[test]
    fn floquet_evolution_preserves_norm(sx in -3.0f64..3.0, sz in -3.0f64..3.0, t in 0.0f64..50.0) {
        let h = FloquetHamiltonian { order: 0, sx, sz };
        let psi = h.evolve(&spin_up(), t);
        prop_assert!((psi.norm() - 1.0).abs() < 1e-13);
    }
}
