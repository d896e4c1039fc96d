use maglat::scenario::{table1, FieldLevels};
use maglat::trap::*;
use maglat::units::*;
use proptest::prelude::*;

#[test]
fn majorana_anchors() {
    // anchors are printed to 3, 4 and 2 significant figures
    for (chi, eta, digits) in [(0.5, 2.11e-3, 3), (1.0, 1.151e-1, 4), (0.1, 2.7e-17, 2)] {
        let v = majorana_loss(chi);
        let oracle = 2.0 * std::f64::consts::PI * (-4.0 / chi).exp();
        assert!((v / oracle - 1.0).abs() < 0.01);
        let scale = 10f64.powi(v.log10().floor() as i32 - digits + 1);
        assert_eq!((v / scale).round(), (eta / scale).round(), "chi {chi}: {v:e} vs {eta:e}");
    }
    assert_eq!(majorana_loss(0.0), 0.0);
}

#[test]
fn loss_exponent_is_affine_in_inverse_chi() {
    let xs: Vec<f64> = (1..=20).map(|i| 0.05 * i as f64).collect();
    for w in xs.windows(2) {
        let slope = (majorana_loss(w[1]).ln() - majorana_loss(w[0]).ln()) / (1.0 / w[1] - 1.0 / w[0]);
        assert!((slope + 4.0).abs() < 1e-9, "{slope}");
    }
}

#[test]
fn depth_is_exact_for_small_drive() {
    // naive ½(√(Ω²+Δ²) − Δ) loses every digit here
    let (w, d) = (1e-6, 1.0);
    assert!((trap_depth(w, d) / (w * w / 4.0) - 1.0).abs() < 1e-10);
    assert_eq!(trap_depth(3.0, 4.0), 0.5);
}

#[test]
fn harmonic_branches_agree_to_leading_order() {
    let m = 0.023 * M_E;
    for ratio in [0.05, 0.1, 0.2] {
        let delta = uev(200.0);
        let hf = harmonic_frequency(ratio * delta, delta, 400e-9, m).unwrap();
        // the exact node curvature is Ω₀²k²/(4|Δ|), identical to the expansion
        assert!((hf.exact / hf.perturbative - 1.0).abs() < 1e-12);
        assert!(hf.minus_sublattice > 0.0);
        // the engineering rule of thumb carries a rounded prefactor
        assert!((hf.engineering / hf.exact - 1.0).abs() < 0.2, "{}", hf.engineering / hf.exact);
    }
    assert!(harmonic_frequency(1.0, 1.0, 0.0, m).is_err());
}

#[test]
fn minus_sublattice_curvature_oracle() {
    // −ε'' at the antinode: Ω₀²k²/(2√(Ω₀²+Δ²))
    let (w, d, a, m) = (uev(80.0), uev(200.0), 500e-9, 0.05 * M_E);
    let k = std::f64::consts::PI / a;
    let hf = harmonic_frequency(w, d, a, m).unwrap();
    let expect = (HBAR * w * w * k * k / (2.0 * w.hypot(d)) / m).sqrt();
    assert!((hf.minus_sublattice / expect - 1.0).abs() < 1e-10);
}

#[test]
fn bound_state_counts_follow_definitions() {
    let (r, s) = bound_state_counts(40.0, 8.0, 2.5).unwrap();
    assert_eq!(r, 5.0);
    assert_eq!(s, 2.0);
    assert!(bound_state_counts(0.0, 1.0, 1.0).is_err());
}

#[test]
fn requirement_chain_reports_margins() {
    let mut m = MaterialSpec::new("hh", 14.9, 0.836);
    m.phonon_rate = uev(0.3);
    let d = DriveSpec::from_energies(14.9, uev(100.0), uev(250.0), std::f64::consts::TAU * 25e9, 500e-9).unwrap();
    let env = EnvironmentSpec::new(0.01).unwrap();
    let r = check_requirements(&m, &d, &env, &Thresholds::default()).unwrap();
    assert!((r.v0_uev - 9.63).abs() < 0.01);
    for c in r.chain.iter().chain(&r.chain_plus).chain(&r.chain_minus) {
        assert_eq!(c.ok, c.ratio <= c.threshold, "{}", c.name);
        assert!((c.ratio - c.lhs_uev / c.rhs_uev).abs() < 1e-12 * c.ratio.max(1.0));
    }
    let loose = Thresholds { much_less: 1e9, less_sim: 1e9 };
    assert!(check_requirements(&m, &d, &env, &loose).unwrap().satisfied);
    let tight = Thresholds { much_less: 1e-12, less_sim: 1e-12 };
    assert!(!check_requirements(&m, &d, &env, &tight).unwrap().satisfied);
}

#[test]
fn adiabatic_spectrum_improves_for_weak_mixing() {
    let mut mat = MaterialSpec::new("e", 2.0, 0.067);
    mat.dielectric_const = 12.9;
    let mut prev = f64::INFINITY;
    // the residual is set by the mixing-angle gradient, so it shrinks with Ω₀/Δ
    for ratio in [0.75, 0.4, 0.2] {
        let d = DriveSpec::from_energies(2.0, uev(ratio * 800.0), uev(800.0), 1e13, 400e-9).unwrap();
        let c = spectrum_comparison(&mat, &d, &GridConfig::default()).unwrap();
        assert!(c.convergence.last().unwrap().1 < 1e-6);
        let dev = c.plus.max_deviation();
        assert!(dev < prev, "ratio {ratio}: {:?}", c.plus.deviation);
        prev = dev;
    }
    assert!(prev < 0.1);
}

#[test]
fn table1_cells_cover_all_materials() {
    let cells = table1(&FieldLevels::default());
    assert_eq!(cells.len(), 12);
    // Ω₀ = |g|μ_B B₁ in μeV
    let mu = mu_b_uev_per_t();
    for c in &cells {
        assert!((c.rabi_uev[0] - c.g[0] * mu * c.b1_t[0]).abs() < 1e-9 * c.rabi_uev[0]);
        assert!((c.rabi_uev[1] - c.g[1] * mu * c.b1_t[1]).abs() < 1e-9 * c.rabi_uev[1]);
    }
    let doubled = table1(&FieldLevels::default().scaled(2.0));
    for (a, b) in cells.iter().zip(&doubled) {
        assert!((b.rabi_uev[1] / a.rabi_uev[1] - 2.0).abs() < 1e-12);
    }
}

#[test]
fn constants_in_user_units() {
    assert!((mu_b_uev_per_t() - 57.883_818_06).abs() < 1e-6);
    assert!((k_b_uev_per_k() - 86.173_332_62).abs() < 1e-6);
    // 380 GHz angular is about 250 μeV
    assert!((to_uev(380e9) - 250.1).abs() < 0.1);
}

#[test]
fn frequency_tokens_follow_the_convention() {
    let ang = parse_quantity("22 GHz", Dimension::Energy, FreqConvention::Angular).unwrap();
    assert_eq!(ang, 22e9);
    let cyc = parse_quantity("22 GHz", Dimension::Energy, FreqConvention::Cycle).unwrap();
    assert!((cyc / (std::f64::consts::TAU * 22e9) - 1.0).abs() < 1e-15);
    let explicit = parse_quantity("22 GHz_f", Dimension::Energy, FreqConvention::Angular).unwrap();
    assert_eq!(explicit, cyc);
    assert_eq!(parse_quantity("22 Grad/s", Dimension::Energy, FreqConvention::Cycle).unwrap(), 22e9);
}

#[test]
fn quantity_parser_rejects_bad_input() {
    let e = FreqConvention::Angular;
    assert!(parse_quantity("250 ueV", Dimension::Length, e).is_err());
    assert!(parse_quantity("250 parsecs", Dimension::Length, e).is_err());
    assert!(parse_quantity("abc nm", Dimension::Length, e).is_err());
    assert!(parse_quantity("1e999 nm", Dimension::Length, e).is_err());
    assert!(parse_quantity("", Dimension::Length, e).is_err());
    assert!((parse_quantity("1.5e2nm", Dimension::Length, e).unwrap() / 1.5e-7 - 1.0).abs() < 1e-15);
    assert_eq!(parse_quantity(" 0.023 m0 ", Dimension::Mass, e).unwrap(), 0.023 * M_E);
    assert_eq!(parse_quantity("3", Dimension::Dimensionless, e).unwrap(), 3.0);
}

#[test]
fn conversion_rejects_dimension_mismatch() {
    assert!(convert(1.0, Unit::Tesla, Unit::Nanometer).is_err());
    assert!((convert(1.0, Unit::MilliElectronVolt, Unit::MicroElectronVolt).unwrap() - 1e3).abs() < 1e-9);
    // 1 K ≈ 86.17 μeV
    assert!((convert(1.0, Unit::Kelvin, Unit::MicroElectronVolt).unwrap() - 86.173_332_62).abs() < 1e-6);
}

const UNITS: [Unit; 12] = [
    Unit::MicroElectronVolt,
    Unit::MilliElectronVolt,
    Unit::Kelvin,
    Unit::MilliKelvin,
    Unit::GigaHertzAngular,
    Unit::GigaHertz,
    Unit::Joule,
    Unit::Nanometer,
    Unit::Micrometer,
    Unit::MilliTesla,
    Unit::ElectronMass,
    Unit::MegaAmperePerSquareCentimeter,
];

proptest! {
    #[test]
    fn conversion_round_trips(v in -1e6f64..1e6, i in 0usize..12, j in 0usize..12) {
        let (a, b) = (UNITS[i], UNITS[j]);
        match convert(v, a, b) {
            Ok(x) => {
                let back = convert(x, b, a).unwrap();
                prop_assert!((back - v).abs() <= 1e-12 * v.abs().max(1e-300));
            }
            Err(_) => prop_assert_ne!(a.dimension(), b.dimension()),
        }
    }

    #[test]
    fn printed_quantities_parse_back(v in -1e6f64..1e6, i in 0usize..12) {
        let u = UNITS[i];
        let s = format!("{v:e} {}", u.symbol());
        let parsed = parse_quantity(&s, u.dimension(), FreqConvention::Angular).unwrap();
        prop_assert!((parsed - v * u.to_base()).abs() <= 1e-12 * (v * u.to_base()).abs());
    }

    #[test]
    fn depth_is_bounded_by_half_rabi(w in 0.0f64..100.0, d in 0.0f64..100.0) {
        let v = trap_depth(w, d);
        prop_assert!(v >= 0.0 && v <= 0.5 * w + 1e-12);
    }
}
