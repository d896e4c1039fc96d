//! Complex digamma function ψ(z) = Γ'(z)/Γ(z).
//!
//! The argument is shifted with ψ(z) = ψ(z + 1) − 1/z until Re z ≥ 10, then
//! the asymptotic expansion
//! ψ(z) ~ ln z − 1/(2z) − Σ B₂ₖ/(2k z²ᵏ), k = 1..7, is summed.

use num_complex::Complex64;

/// B₂ₖ/(2k) for k = 1..7.
const TAIL: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

const SHIFT: f64 = 10.0;

/// Returns `None` at the poles z = 0, −1, −2, …
pub fn digamma(z: Complex64) -> Option<Complex64> {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return None;
    }
    let mut z = z;
    let mut acc = Complex64::new(0.0, 0.0);
    while z.re < SHIFT {
        acc -= z.inv();
        z += 1.0;
    }
    let w = (z * z).inv();
    let mut series = Complex64::new(0.0, 0.0);
    for c in TAIL.iter().rev() {
        series = (series + c) * w;
    }
    Some(acc + z.ln() - 0.5 * z.inv() - series)
}

/// Real digamma for x not a non-positive integer.
pub fn digamma_real(x: f64) -> Option<f64> {
    digamma(Complex64::new(x, 0.0)).map(|c| c.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{LN_2, PI};

    const EULER: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn special_values() {
        assert!((digamma_real(1.0).unwrap() + EULER).abs() < 1e-14);
        assert!((digamma_real(0.5).unwrap() + EULER + 2.0 * LN_2).abs() < 1e-14);
        // ψ(1/4) = −γ − π/2 − 3 ln 2
        assert!((digamma_real(0.25).unwrap() + EULER + PI / 2.0 + 3.0 * LN_2).abs() < 1e-13);
    }

    #[test]
    fn imaginary_part_on_imaginary_axis() {
        for &y in &[0.1, 0.7, 2.5, 13.0] {
            let v = digamma(Complex64::new(0.0, y)).unwrap();
            let expect = 0.5 / y + 0.5 * PI / (PI * y).tanh();
            assert!((v.im - expect).abs() < 1e-12 * expect, "y={y}");
        }
    }

    #[test]
    fn recurrence_holds() {
        let z = Complex64::new(-3.7, 0.41);
        let lhs = digamma(z + 1.0).unwrap() - digamma(z).unwrap();
        assert!((lhs - z.inv()).norm() < 1e-12);
    }

    #[test]
    fn poles_rejected() {
        assert!(digamma(Complex64::new(0.0, 0.0)).is_none());
        assert!(digamma(Complex64::new(-4.0, 0.0)).is_none());
        assert!(digamma(Complex64::new(-4.0, 1e-9)).is_some());
    }
}
