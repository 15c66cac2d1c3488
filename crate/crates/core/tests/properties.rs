use std::f64::consts::{PI, TAU};

use hom_core::closedform::{
    coincidence_detuned, coincidence_entangled, coincidence_entangled_or_limit, d_full, mu_zero_limit, s_term,
};
use hom_core::engine::{joint_probability, DelayPair, QuadRule, QuadratureSpec};
use hom_core::model::{
    apply_beamsplitter, make_detuned_spectrum, make_entangled_spectrum, GridSpectrum, JointWaveFunction, PortPair,
    ReducedSpectrum, SourceParams,
};
use hom_core::oracle::{oracle_coincidence, overlap_quadrature, overlap_time_domain, OracleMethod};
use num_complex::Complex64;
use proptest::prelude::*;

fn entangled_wf(mu: f64, xi: f64, phi: f64, theta: f64) -> JointWaveFunction {
    let p = SourceParams::new(0.0, mu, xi, phi, theta).unwrap();
    apply_beamsplitter(&make_entangled_spectrum(&p), &p)
}

fn gaussian_grid(width: f64, offset: f64, chirp: f64) -> GridSpectrum {
    let samples = (-300..=300)
        .map(|i| {
            let w = i as f64 * 6.0 * width / 300.0;
            let a = (-((w - offset) / width).powi(2) / 2.0).exp();
            (w, Complex64::from_polar(a, chirp * w * w))
        })
        .collect();
    GridSpectrum::new(samples).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn phases_reduce_into_one_turn(phi in -50.0..50.0f64, theta in -50.0..50.0f64) {
        let p = SourceParams::new(0.0, 1.0, 1.0, phi, theta).unwrap();
        prop_assert!((0.0..TAU).contains(&p.symmetry_phase_phi()));
        prop_assert!((0.0..TAU).contains(&p.bs_phase_theta()));
        let back = (p.symmetry_phase_phi() - phi) / TAU;
        prop_assert!((back - back.round()).abs() < 1e-9);
    }

    #[test]
    fn entangled_spectrum_exchange_symmetry(mu in 0.0..10.0f64, xi in 0.1..5.0f64, phi in 0.0..TAU, w in -20.0..20.0f64) {
        // mirroring Ω conjugates the relative phase of two real sincs, leaving the modulus
        let g = ReducedSpectrum::SincEntangled { mu, xi, phi };
        prop_assert!((g.eval(w).norm() - g.eval(-w).norm()).abs() < 1e-12);
    }

    #[test]
    fn closed_form_probabilities_in_unit_interval(
        mu in 0.0..200.0f64, xi in 0.05..10.0f64, phi in 0.0..TAU, dtau in -5.0..5.0f64,
    ) {
        let pc = coincidence_entangled_or_limit(mu, xi, phi, dtau).unwrap();
        prop_assert!((0.0..=1.0).contains(&pc), "{}", pc);
        let pd = coincidence_detuned(mu, xi, dtau).unwrap();
        prop_assert!((0.0..=1.0).contains(&pd));
    }

    #[test]
    fn closed_form_flat_beyond_support(mu in 0.0..50.0f64, xi in 0.1..5.0f64, phi in 0.0..TAU, k in 1.0001..10.0f64) {
        let dtau = 2.0 / xi * k;
        prop_assert_eq!(coincidence_entangled_or_limit(mu, xi, phi, dtau).unwrap(), 0.5);
        prop_assert_eq!(coincidence_entangled_or_limit(mu, xi, phi, -dtau).unwrap(), 0.5);
    }

    #[test]
    fn closed_form_even_at_real_phases(mu in 0.01..50.0f64, xi in 0.1..5.0f64, dtau in 0.0..3.0f64, pi_phase in any::<bool>()) {
        let phi = if pi_phase { PI } else { 0.0 };
        let a = coincidence_entangled(mu, xi, phi, dtau).unwrap();
        let b = coincidence_entangled(mu, xi, phi, -dtau).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn small_detuning_approaches_cubic(xi in 0.2..5.0f64, x in -1.2..1.2f64) {
        let dtau = 2.0 * x / xi;
        let mu = 1e-4 * xi;
        let d = d_full(mu, xi, PI, dtau).unwrap();
        prop_assert!((d - mu_zero_limit(xi, PI, dtau)).abs() < 1e-6, "{} vs {}", d, mu_zero_limit(xi, PI, dtau));
    }

    #[test]
    fn time_domain_oracle_matches_closed_form(
        mu in 0.001..60.0f64, xi in 0.1..5.0f64, phi in 0.0..TAU, x in -1.2..1.2f64,
    ) {
        // stay away from the singular corner φ = π, μ → 0 where both sides lose digits
        prop_assume!(1.0 + phi.cos() * hom_core::special::sinc(2.0 * mu / xi) > 1e-6);
        let dtau = 2.0 * x / xi;
        let wf = entangled_wf(mu, xi, phi, 0.0);
        let o = oracle_coincidence(&wf, DelayPair::from_difference(dtau).unwrap(), OracleMethod::TimeDomainExact).unwrap();
        let c = coincidence_entangled(mu, xi, phi, dtau).unwrap();
        prop_assert!((o.value - c).abs() < 1e-9, "oracle {} closed {}", o.value, c);
        prop_assert!(o.error_bound <= 1e-12);
    }

    #[test]
    fn detuned_oracle_matches_s_term(mu in 0.0..30.0f64, xi in 0.1..5.0f64, x in -1.2..1.2f64) {
        let dtau = 2.0 * x / xi;
        let r = overlap_time_domain(&ReducedSpectrum::SincDetuned { mu, xi }, dtau).unwrap();
        prop_assert!((r.value - s_term(mu, xi, dtau)).abs() < 1e-12);
    }

    #[test]
    fn engine_matches_oracle(mu in 0.0..8.0f64, xi in 0.3..3.0f64, phi in 0.0..TAU, theta in 0.0..TAU, dtau in -3.0..3.0f64) {
        prop_assume!(mu > 1e-2 || (phi - PI).abs() > 1e-2);
        let wf = entangled_wf(mu, xi, phi, theta);
        let delays = DelayPair::from_difference(dtau).unwrap();
        let m = joint_probability(&wf, delays, &QuadratureSpec::default_for(&wf)).unwrap();
        let o = oracle_coincidence(&wf, delays, OracleMethod::TimeDomainExact).unwrap();
        prop_assert!((m.coincidence() - o.value).abs() <= m.error_bound() + o.error_bound + 1e-10);
    }

    #[test]
    fn factorized_gaussian_never_antibunches(width in 0.3..3.0f64, dtau in -4.0..4.0f64, theta in 0.0..TAU) {
        // a product spectrum on the energy line is symmetric in Ω
        let p = SourceParams::new(0.0, 0.0, 1.0, 0.0, theta).unwrap();
        let wf = apply_beamsplitter(&ReducedSpectrum::Grid(gaussian_grid(width, 0.0, 0.0)), &p);
        let quad = QuadratureSpec::default_for(&wf);
        let m = joint_probability(&wf, DelayPair::from_difference(dtau).unwrap(), &quad).unwrap();
        prop_assert!(m.coincidence() <= 0.5 + m.error_bound() + 1e-12, "{}", m.coincidence());
    }

    #[test]
    fn grid_engine_agrees_with_quadrature_oracle(
        width in 0.5..2.0f64, offset in -1.0..1.0f64, chirp in -0.5..0.5f64, dtau in -3.0..3.0f64,
    ) {
        let p = SourceParams::sinc_source(0.0, 1.0, 0.0).unwrap();
        let spectrum = ReducedSpectrum::Grid(gaussian_grid(width, offset, chirp));
        let wf = apply_beamsplitter(&spectrum, &p);
        let delays = DelayPair::from_difference(dtau).unwrap();
        let m = joint_probability(&wf, delays, &QuadratureSpec::default_for(&wf)).unwrap();
        let o = oracle_coincidence(&wf, delays, OracleMethod::FreqDomainQuadrature).unwrap();
        prop_assert!((m.coincidence() - o.value).abs() <= m.error_bound() + o.error_bound + 1e-9,
            "engine {} oracle {}", m.coincidence(), o.value);
    }
}

#[test]
fn parseval_norms_agree() {
    for &(mu, xi, phi) in &[(1.665, 1.356, PI), (0.3, 0.8, 1.0), (12.0, 2.0, 0.0)] {
        let spec = ReducedSpectrum::SincEntangled { mu, xi, phi };
        let t = overlap_time_domain(&spec, 0.4).unwrap();
        let quad = QuadratureSpec::new(mu + 400.0 * xi, 4096, QuadRule::GaussLegendreComposite).unwrap();
        let q = overlap_quadrature(&spec, 0.4, &quad).unwrap();
        assert!((t.value - q.value).abs() <= t.error_bound + q.error_bound, "{mu}: {} vs {}", t.value, q.value);
        // tail bound ≤ 2(Σ|a|/b)²/(W − c); both norms are of the same integral
        let b = 2.0 / xi;
        let tail = 2.0 * (2.0 / b) * (2.0 / b) / (quad.window_halfwidth - mu / 2.0);
        assert!((t.norm - q.norm).abs() <= tail + 1e-6 * t.norm, "{} vs {}", t.norm, q.norm);
    }
}

#[test]
fn engine_handles_mixed_entry_spectra() {
    // entries with different spectra exercise the generic integrand and the grid-extended window
    let p = SourceParams::sinc_source(1.0, 1.0, 0.0).unwrap();
    let sinc = make_detuned_spectrum(&p);
    let grid = ReducedSpectrum::Grid(gaussian_grid(1.0, 0.0, 0.0));
    let one = Complex64::new(1.0, 0.0);
    let wf = JointWaveFunction::new(
        0.0,
        [[one, one], [-one, -one]],
        [[sinc.clone(), grid.clone()], [grid, sinc]],
    )
    .unwrap();
    let m = joint_probability(&wf, DelayPair::from_difference(0.5).unwrap(), &QuadratureSpec::default_for(&wf)).unwrap();
    assert!((m.sum() - 1.0).abs() < 1e-12);
    for ports in PortPair::all() {
        assert!((0.0..=1.0).contains(&m.get(ports)));
    }
    assert!(oracle_coincidence(&wf, DelayPair::from_difference(0.5).unwrap(), OracleMethod::TimeDomainExact).is_err());
}

#[test]
fn trapezoid_rule_converges_too() {
    let wf = entangled_wf(1.665, 1.356, PI, 0.0);
    let delays = DelayPair::from_difference(1.0).unwrap();
    let quad = QuadratureSpec::new(20.0, 256, QuadRule::Trapezoid).unwrap();
    let m = joint_probability(&wf, delays, &quad).unwrap();
    let exact = coincidence_entangled(1.665, 1.356, PI, 1.0).unwrap();
    assert!((m.coincidence() - exact).abs() < 1e-6, "{}", m.coincidence());
}

#[test]
fn detuned_source_engine_matches_closed_form() {
    let p = SourceParams::sinc_source(2.0, 1.2, 0.0).unwrap();
    let wf = apply_beamsplitter(&make_detuned_spectrum(&p), &p);
    for &dtau in &[0.0, 0.4, -1.1, 2.0] {
        let m = joint_probability(&wf, DelayPair::from_difference(dtau).unwrap(), &QuadratureSpec::default_for(&wf)).unwrap();
        let c = coincidence_detuned(2.0, 1.2, dtau).unwrap();
        assert!((m.coincidence() - c).abs() < 1e-8, "{dtau}: {} vs {c}", m.coincidence());
    }
}
