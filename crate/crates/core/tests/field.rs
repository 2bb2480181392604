use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;
use wgqed::ddesolver::integrate_dde;
use wgqed::dynamics::{amplitude_series, critical_separation, subradiant_steady_population, ModeExpansion};
use wgqed::field::*;
use wgqed::{Error, GeneralInitialState, ModelParams, Parity};

fn params(beta: f64, eta: f64) -> ModelParams {
    ModelParams::new(beta, eta).unwrap()
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect()
}

/// `int_0^tau e^{i Delta s} B(s) ds` with `B = sqrt2 c` from the round-trip
/// series, by Simpson's rule on panels that end on every light-cone time.
fn spectral_oracle(p: &ModelParams, parity: Parity, tau: f64, delta: f64) -> Complex64 {
    let per_eta = 256;
    let h = p.eta / per_eta as f64;
    let mut n = (tau / h).ceil() as usize;
    n += n % 2;
    let h = tau / n as f64;
    let s: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
    let c = amplitude_series(p, parity, &s).unwrap().values;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..=n {
        let w = if k == 0 || k == n { 1.0 } else if k % 2 == 1 { 4.0 } else { 2.0 };
        total += w * Complex64::from_polar(1.0, delta * s[k]) * c[k] * 2f64.sqrt();
    }
    total * h / 3.0
}

fn form(p: &ModelParams, parity: Parity, delta: f64) -> f64 {
    let y = PI * p.winding as f64 + 0.5 * p.eta * delta;
    match parity {
        Parity::Sup => y.cos(),
        Parity::Sub => y.sin(),
    }
}

#[test]
fn spectral_amplitude_matches_time_integral() {
    // Kinks of B at multiples of eta fall on panel ends only when tau is a
    // multiple of eta; pick such times.
    for (beta, eta, parity, tau) in [
        (1.0, 0.5, Parity::Sup, 3.0),
        (1.0, 1.0, Parity::Sub, 4.0),
        (0.6, 1.5, Parity::Sup, 4.5),
        (0.6, 0.8, Parity::Sub, 2.4),
    ] {
        let p = params(beta, eta);
        let deltas = [-7.3, -1.0, -0.2, 0.0, 0.35, 2.0, 11.0];
        let amps = spectral_amplitudes(&p, parity, Time::Finite(tau), &deltas, None).unwrap();
        let k = (beta / (2.0 * PI)).sqrt();
        for (i, &d) in deltas.iter().enumerate() {
            let expect = -Complex64::i() * k * form(&p, parity, d) * spectral_oracle(&p, parity, tau, d);
            assert!(
                (amps.a[i] - expect).norm() < 1e-8,
                "{beta} {eta} {parity} {d}: {} vs {expect}",
                amps.a[i]
            );
        }
    }
}

#[test]
fn parity_sign_relations() {
    let deltas = linspace(-5.0, 5.0, 41);
    let p = params(0.8, 0.9);
    let sup = spectral_amplitudes(&p, Parity::Sup, Time::Finite(3.0), &deltas, None).unwrap();
    assert_eq!(sup.a, sup.b);
    let sub = spectral_amplitudes(&p, Parity::Sub, Time::Infinite, &deltas, None).unwrap();
    assert!(sub.a.iter().zip(&sub.b).all(|(a, b)| *a == -b));
}

#[test]
fn nothing_emitted_at_start() {
    let p = params(1.0, 0.5);
    let amps = spectral_amplitudes(&p, Parity::Sup, Time::Finite(0.0), &[-1.0, 0.0, 3.0], None).unwrap();
    assert!(amps.a.iter().all(|a| a.norm() == 0.0));
    let g = guided_norm(&p, Parity::Sup, Time::Finite(0.0), &Quadrature::default()).unwrap();
    assert_eq!(g.value, 0.0);
}

#[test]
fn coincident_antisymmetric_amplitude_vanishes() {
    let p = params(0.7, 0.0);
    let amps = spectral_amplitudes(&p, Parity::Sub, Time::Finite(2.0), &[-1.0, 0.0, 1.0], None).unwrap();
    assert!(amps.a.iter().all(|a| a.norm() == 0.0));
}

#[test]
fn symmetric_peak_at_long_times() {
    // tau -> infinity at Delta = 0 against the time integral at a late time.
    let p = params(1.0, 0.5);
    let inf = spectral_amplitudes(&p, Parity::Sup, Time::Infinite, &[0.0], None).unwrap().a[0];
    let late = spectral_amplitudes(&p, Parity::Sup, Time::Finite(60.0), &[0.0], None).unwrap().a[0];
    assert!(inf.norm().is_finite() && inf.norm() > 0.0);
    assert!((inf - late).norm() < 1e-12);
}

#[test]
fn unitarity_budget() {
    for eta in [0.5, 1.5] {
        for parity in Parity::BOTH {
            let p = params(1.0, eta);
            let exp = ModeExpansion::new(&p, parity).unwrap();
            for tau in [1.0, 5.0, 20.0] {
                let g = guided_norm(&p, parity, Time::Finite(tau), &Quadrature::default()).unwrap();
                let emitters = exp.collective(tau).0.norm_sqr();
                let gap = (g.value + emitters - 1.0).abs();
                assert!(gap < 1e-4, "{eta} {parity} {tau}: {gap:e}");
            }
        }
    }
}

#[test]
fn bound_state_keeps_the_rest() {
    let p = params(1.0, 1.0);
    let g = guided_norm(&p, Parity::Sub, Time::Infinite, &Quadrature::default()).unwrap();
    let expect = 1.0 - 2.0 * subradiant_steady_population(&p);
    assert!((expect - 5.0 / 9.0).abs() < 1e-15);
    assert!((g.value - expect).abs() < 1e-4);
}

#[test]
fn norm_loss_matches_integrator() {
    let p = params(1.0, 0.7);
    let init = GeneralInitialState::from_parity(Parity::Sup);
    let tr = integrate_dde(&p, init, 6.0, 0.005).unwrap();
    let n = tr.norm();
    for tau in [1.4, 3.5, 6.0] {
        let k = (tau / tr.step).round() as usize;
        let g = guided_norm(&p, Parity::Sup, Time::Finite(tau), &Quadrature::default()).unwrap();
        assert!((1.0 - n[k] - g.value).abs() < 1e-4);
    }
}

#[test]
fn quadrature_reports_refinement() {
    let p = params(0.5, 1.0);
    let g = guided_norm(&p, Parity::Sup, Time::Finite(2.0), &Quadrature::default()).unwrap();
    assert!(g.refinement_change.unwrap() <= 1e-5);
    assert!(g.tail_correction > 0.0);
    let strict = Quadrature {
        tolerance: Some(1e-15),
        points: 201,
        ..Quadrature::default()
    };
    assert!(matches!(
        guided_norm(&p, Parity::Sup, Time::Finite(2.0), &strict),
        Err(Error::QuadratureNotConverged { .. })
    ));
}

fn map(parity: Parity, xi: &[f64], tau: &[f64]) -> FieldGrid {
    intensity_map(&params(1.0, 0.5), parity, xi, tau, None, IntensityMode::Envelope).unwrap()
}

#[test]
fn map_causality_and_sign() {
    let xi = linspace(-3.0, 3.0, 61);
    let tau = linspace(0.0, 4.0, 41);
    for parity in Parity::BOTH {
        let g = map(parity, &xi, &tau);
        for (i, &t) in tau.iter().enumerate() {
            for (j, &x) in xi.iter().enumerate() {
                let v = g.at(i, j);
                assert!(v >= 0.0);
                if t < (x - 0.25).abs().min((x + 0.25).abs()) {
                    assert!(v <= 1e-12);
                }
            }
        }
    }
}

#[test]
fn symmetric_map_is_mirror_symmetric() {
    let xi: Vec<f64> = (-60..=60).map(|k| k as f64 * 0.05).collect();
    let tau = linspace(0.0, 5.0, 26);
    let g = map(Parity::Sup, &xi, &tau);
    let n = xi.len();
    for i in 0..tau.len() {
        for j in 0..n {
            assert!((g.at(i, j) - g.at(i, n - 1 - j)).abs() <= 1e-12 * g.max());
        }
    }
}

#[test]
fn antisymmetric_map_traps_light() {
    let g = map(Parity::Sub, &[-2.0, -1.0, 0.0, 1.0, 2.0], &[6.0, 12.0]);
    let full = map(Parity::Sub, &linspace(-4.0, 4.0, 81), &linspace(0.0, 8.0, 81));
    for i in 0..2 {
        assert!(g.at(i, 0) <= 1e-3 * full.max());
        assert!(g.at(i, 4) <= 1e-3 * full.max());
        // Both counter-propagating components carry alpha_0 inside.
        let alpha0 = 1.0 / 1.25;
        assert!((g.at(i, 2) - 0.5 * alpha0 * alpha0).abs() < 1e-8);
    }
}

#[test]
fn interference_dichotomy() {
    // Just outside the pair, shortly after the first round trip.
    let eta = 0.4;
    assert!(eta < critical_separation(1.0).unwrap());
    let p = params(1.0, eta);
    let (x, t) = (0.25, 0.45);
    let free = |r: f64| if r >= 0.0 { (-r).exp() } else { 0.0 };
    let independent = 0.25 * (free(t - (x + 0.5 * eta)) + free(t - (x - 0.5 * eta)));
    let at = |parity| intensity_map(&p, parity, &[x], &[t], None, IntensityMode::Envelope).unwrap().intensity[0];
    assert!(at(Parity::Sup) > independent);
    assert!(at(Parity::Sub) < independent);
}

#[test]
fn map_integrates_to_guided_norm() {
    let p = params(1.0, 0.8);
    let tau = 3.0;
    let xi = linspace(-tau - 1.0, tau + 1.0, 8001);
    let dx = xi[1] - xi[0];
    for parity in Parity::BOTH {
        let g = intensity_map(&p, parity, &xi, &[tau], None, IntensityMode::Envelope).unwrap();
        let total: f64 = g.intensity.iter().sum::<f64>() * dx;
        let norm = guided_norm(&p, parity, Time::Finite(tau), &Quadrature::default()).unwrap().value;
        assert!((total - norm).abs() < 2e-3, "{parity}: {total} vs {norm}");
    }
}

#[test]
fn fringes_only_where_both_directions_meet() {
    let p = params(1.0, 0.5);
    let xi = [-1.5, 0.0, 1.5];
    let tau = [3.0];
    let env = intensity_map(&p, Parity::Sup, &xi, &tau, None, IntensityMode::Envelope).unwrap();
    let full = intensity_map(&p, Parity::Sup, &xi, &tau, None, IntensityMode::FullFringe).unwrap();
    // Outside the pair only one direction is present.
    assert!((env.intensity[0] - full.intensity[0]).abs() < 1e-12);
    assert!((env.intensity[2] - full.intensity[2]).abs() < 1e-12);
    let (normed, peak) = env.normalized();
    assert_eq!(peak, env.max());
    assert!(normed.iter().all(|&v| (0.0..=1.0).contains(&v)));
}

#[test]
fn map_argument_errors() {
    let p = params(1.0, 0.0);
    assert!(matches!(
        intensity_map(&p, Parity::Sup, &[0.0], &[1.0], None, IntensityMode::Envelope),
        Err(Error::Domain(_))
    ));
    let p = params(1.0, 0.5);
    assert!(intensity_map(&p, Parity::Sup, &[1.0, 0.0], &[1.0], None, IntensityMode::Envelope).is_err());
    assert!(spectral_amplitudes(&p, Parity::Sup, Time::Finite(-1.0), &[0.0], None).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn causality_on_random_points(eta in 0.1..2.0f64, x in -4.0..4.0f64, t in 0.0..4.0f64, sup in any::<bool>()) {
        let parity = if sup { Parity::Sup } else { Parity::Sub };
        let p = params(1.0, eta);
        let g = intensity_map(&p, parity, &[x], &[t], None, IntensityMode::FullFringe).unwrap();
        prop_assert!(g.intensity[0] >= 0.0);
        if t < (x - eta / 2.0).abs().min((x + eta / 2.0).abs()) {
            prop_assert!(g.intensity[0] <= 1e-12);
        }
    }

    #[test]
    fn spectral_density_is_even(beta in 0.1..=1.0f64, eta in 0.1..2.0f64, t in 0.1..6.0f64, d in 0.0..10.0f64) {
        // Real amplitudes make |c(-Delta)| = |c(Delta)|.
        let p = params(beta, eta);
        for parity in Parity::BOTH {
            let a = spectral_amplitudes(&p, parity, Time::Finite(t), &[-d, d], None).unwrap().a;
            prop_assert!((a[0].norm() - a[1].norm()).abs() < 1e-10);
        }
    }
}
