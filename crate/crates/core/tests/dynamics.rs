use std::f64::consts::{E, FRAC_1_SQRT_2};

use num_complex::Complex64;
use proptest::prelude::*;
use wgqed::dynamics::*;
use wgqed::{Error, ModelParams, Parity};

fn params(beta: f64, eta: f64) -> ModelParams {
    ModelParams::new(beta, eta).unwrap()
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn grid(end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| end * k as f64 / n as f64).collect()
}

fn branch(p: &ModelParams, parity: Parity, tau: &[f64]) -> Vec<Complex64> {
    amplitude_branch_sum(p, parity, tau, &BranchSumOptions::default())
        .unwrap()
        .values
}

fn critical() -> f64 {
    critical_separation(1.0).unwrap()
}

#[test]
fn critical_separation_examples() {
    let root = bisect(0.0, 1.0, |w| w * w.exp() - 1.0 / E);
    assert!((critical() - 2.0 * root).abs() < 1e-14);
    assert!((critical() - 0.5569).abs() < 1e-4);
    assert!((critical_separation((-2.0f64).exp()).unwrap() - 2.0).abs() < 1e-14);
    let root = bisect(0.0, 2.0, |w| w * w.exp() - 1.0 / (0.13 * E));
    let eta = critical_separation(0.13).unwrap();
    assert!((eta - 2.0 * root).abs() < 1e-13);
    assert!((eta - 2.04).abs() < 5e-3);
    assert!(matches!(critical_separation(0.0), Err(Error::Domain(_))));
}

#[test]
fn peak_rate_examples() {
    assert!((max_instantaneous_rate(1.0).unwrap() - 4.591).abs() < 1e-3);
    let e2 = (-2.0f64).exp();
    assert!((max_instantaneous_rate(e2).unwrap() - 2.0).abs() < 1e-14);
    assert!((beta_for_max_rate(2.0).unwrap() - e2).abs() < 1e-15);
    assert!((max_instantaneous_rate(1e-12).unwrap() - 1.0).abs() < 0.05);
    let at_critical = instantaneous_rate(&params(1.0, critical())).unwrap();
    assert!((at_critical.rate - max_instantaneous_rate(1.0).unwrap()).abs() < 1e-6);
}

#[test]
fn instantaneous_rate_limits() {
    let r = instantaneous_rate(&params(1.0, 1e-6)).unwrap();
    assert!((r.rate - 2.0).abs() < 1e-5 && !r.oscillatory);
    let r = instantaneous_rate(&params((-2.0f64).exp(), 2.0)).unwrap();
    assert!((r.rate - 2.0).abs() < 1e-12);
    let r = instantaneous_rate(&params(1.0, 1.2 * critical())).unwrap();
    assert!(r.oscillatory);
}

#[test]
fn modes_solve_characteristic_equation() {
    for &(beta, eta) in &[(1.0, 0.1), (0.3, 0.5), (0.7, 1.5), (1.0, 3.0), (1.0, 0.5569)] {
        let p = params(beta, eta);
        for parity in Parity::BOTH {
            for m in branch_modes(&p, parity, 30).unwrap() {
                let s = -0.5 * m.rate;
                let residual = s + 0.5 + parity.sign() * 0.5 * beta * (-eta * s).exp();
                assert!(residual.norm() < 1e-10 * (1.0 + s.norm()), "{beta} {eta} {parity} n={}", m.n);
                let z = lambert_argument(&p, parity);
                let w = m.w;
                assert!((w * w.exp() - z).norm() < 1e-12 * (1.0 + w.norm()));
                assert!((m.residue * (1.0 + w) - 1.0).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn rates_close_under_conjugation() {
    let p = params(0.7, 1.5);
    for parity in Parity::BOTH {
        let modes = branch_modes(&p, parity, 20).unwrap();
        for m in modes.iter().filter(|m| m.n.abs() < 19) {
            let partner = modes.iter().any(|o| (o.rate - m.rate.conj()).norm() < 1e-12);
            assert!(partner, "{parity} n={}", m.n);
        }
    }
}

#[test]
fn lossless_antisymmetric_zero_mode() {
    for eta in [0.2, 1.0, 2.5] {
        let p = params(1.0, eta);
        let m = branch_mode(&p, Parity::Sub, 0).unwrap();
        assert_eq!(m.rate, Complex64::new(0.0, 0.0));
        assert!((m.residue.re - 1.0 / (1.0 + eta / 2.0)).abs() < 1e-15);
        let late = branch(&p, Parity::Sub, &[40.0 * eta.max(1.0)])[0];
        assert!((late.norm_sqr() - subradiant_steady_population(&p)).abs() < 1e-8);
    }
}

#[test]
fn symmetric_residue_sums_tend_to_half() {
    // The terms decay like 1/n and a symmetric partial sum converges to
    // the midpoint of the unit jump at tau = 0, not to the jump itself.
    let p = params(1.0, 0.1);
    let gap = |n| {
        let sum: Complex64 = branch_modes(&p, Parity::Sup, n).unwrap().iter().map(|m| m.residue).sum();
        (sum - 0.5).norm()
    };
    let (g100, g200, g400) = (gap(100), gap(200), gap(400));
    assert!(g200 < 5e-3 && g400 < g200 && g200 < g100, "{g100} {g200} {g400}");
    // The tail-corrected sum recovers the initial value just after zero.
    let c = branch(&p, Parity::Sup, &[1e-9])[0];
    assert!((c.re - FRAC_1_SQRT_2).abs() < 1e-6);
}

#[test]
fn branch_sum_matches_series_examples() {
    let p = params(1.0, 0.5);
    let b = branch(&p, Parity::Sup, &[2.0])[0];
    let s = amplitude_series(&p, Parity::Sup, &[2.0]).unwrap().values[0];
    assert!((b - s).norm() < 1e-8);
    let b = branch(&p, Parity::Sub, &[5.0])[0];
    let s = amplitude_series(&p, Parity::Sub, &[5.0]).unwrap().values[0];
    assert!((b - s).norm() < 1e-8);
}

#[test]
fn series_and_markov_examples() {
    let p = params(1.0, 2.0);
    let c = amplitude_series(&p, Parity::Sup, &[0.0, 1.0]).unwrap().values;
    assert!((c[0].re - FRAC_1_SQRT_2).abs() < 1e-16);
    assert!((c[1].re - 0.42888).abs() < 1e-5);
    let m = amplitude_markovian(&p, Parity::Sup, &[1.0]).unwrap().values[0];
    assert!((m.re - (-1.0f64).exp() * FRAC_1_SQRT_2).abs() < 1e-16);
    let m = amplitude_markovian(&p, Parity::Sub, &[7.0]).unwrap().values[0];
    assert_eq!(m.re, FRAC_1_SQRT_2);
    let m = amplitude_markovian(&params(0.5, 0.0), Parity::Sup, &[2.0]).unwrap().values[0];
    assert!((m.re - (-1.5f64).exp() * FRAC_1_SQRT_2).abs() < 1e-16);
    assert!(matches!(
        amplitude_series(&params(1.0, 0.0), Parity::Sup, &[1.0]),
        Err(Error::Domain(_))
    ));
}

#[test]
fn branch_sum_agrees_with_series_on_matrix() {
    let tau = grid(10.0, 400);
    for beta in [0.3, 0.7, 1.0] {
        for eta in [0.1, 0.5, critical(), 1.5, 3.0] {
            let p = params(beta, eta);
            for parity in Parity::BOTH {
                let b = branch(&p, parity, &tau);
                let s = amplitude_series(&p, parity, &tau).unwrap().values;
                let worst = b.iter().zip(&s).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
                assert!(worst < 1e-6, "{beta} {eta} {parity}: {worst:e}");
            }
        }
    }
}

#[test]
fn free_decay_before_light_cone() {
    for (beta, eta) in [(1.0, 2.0), (0.4, 0.7)] {
        let p = params(beta, eta);
        let tau = grid(0.99 * eta, 50);
        for parity in Parity::BOTH {
            for (t, c) in tau.iter().zip(branch(&p, parity, &tau)) {
                assert!((c.norm_sqr() - 0.5 * (-t).exp()).abs() < 1e-12, "{t}");
            }
        }
    }
}

#[test]
fn kink_at_light_cone() {
    // Left of eta the emitters decay freely; right of it the feedback
    // term adds -/+ beta c(0) / 2 to the slope.
    let h = 1e-5;
    for parity in Parity::BOTH {
        let p = params(1.0, 0.8);
        let eta = p.eta;
        let c = branch(&p, parity, &[eta - 2.0 * h, eta - h, eta, eta + h, eta + 2.0 * h]);
        let left = (3.0 * c[2] - 4.0 * c[1] + c[0]).re / (2.0 * h);
        let right = (-3.0 * c[2] + 4.0 * c[3] - c[4]).re / (2.0 * h);
        let free = -0.5 * (-0.5 * eta).exp() * FRAC_1_SQRT_2;
        let fed = free - 0.5 * parity.sign() * p.beta * FRAC_1_SQRT_2;
        assert!((left - free).abs() < 1e-4, "{parity} left {left} vs {free}");
        assert!((right - fed).abs() < 1e-4, "{parity} right {right} vs {fed}");
        assert!((c[1] - c[3]).norm() < 1e-4);
    }
}

fn local_minima(values: &[f64]) -> usize {
    values.windows(3).filter(|w| w[1] < w[0] && w[1] < w[2]).count()
}

#[test]
fn oscillation_onset() {
    let tau = grid(15.0, 3000);
    let below = params(1.0, 0.8 * critical());
    let pop: Vec<f64> = branch(&below, Parity::Sup, &tau).iter().map(|c| c.norm_sqr()).collect();
    assert!(pop.windows(2).all(|w| w[1] <= w[0]));
    assert_eq!(branch_mode(&below, Parity::Sup, 0).unwrap().rate.im, 0.0);

    let above = params(1.0, 1.2 * critical());
    assert_ne!(branch_mode(&above, Parity::Sup, 0).unwrap().rate.im, 0.0);
    let pop: Vec<f64> = branch(&above, Parity::Sup, &tau).iter().map(|c| c.norm_sqr()).collect();
    assert!(local_minima(&pop) >= 1);
}

#[test]
fn truncated_mode_reports_shortfall() {
    let p = params(1.0, 0.5);
    let opts = BranchSumOptions {
        n_max: Some(2),
        tail: TailMode::Truncated,
        tolerance: 1e-9,
    };
    match amplitude_branch_sum(&p, Parity::Sup, &[0.01, 1.0], &opts) {
        Err(Error::TruncationNotConverged { n_max, .. }) => assert_eq!(n_max, 3),
        other => panic!("expected truncation error, got {other:?}"),
    }
}

#[test]
fn trace_carries_truncation_report() {
    let p = params(0.7, 1.5);
    let tr = amplitude_branch_sum(&p, Parity::Sup, &grid(5.0, 10), &BranchSumOptions::default()).unwrap();
    assert_eq!(tr.source, Source::BranchSum);
    let t = tr.truncation.unwrap();
    assert!(t.tail_estimate <= 1e-9);
    assert_eq!(t.n_max, DEFAULT_WINDOW + 1);
    assert_eq!(tr.values[0].re, FRAC_1_SQRT_2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn populations_bounded(beta in 0.0..=1.0f64, eta in 0.01..4.0f64, t in 0.0..20.0f64, sup in any::<bool>()) {
        let parity = if sup { Parity::Sup } else { Parity::Sub };
        let c = branch(&params(beta, eta), parity, &[t])[0];
        prop_assert!(c.norm_sqr() <= 0.5 + 1e-9);
    }

    #[test]
    fn branch_sum_tracks_series(beta in 0.0..=1.0f64, eta in 0.05..4.0f64, t in 0.0..12.0f64, sup in any::<bool>()) {
        let parity = if sup { Parity::Sup } else { Parity::Sub };
        let p = params(beta, eta);
        let b = branch(&p, parity, &[t])[0];
        let s = amplitude_series(&p, parity, &[t]).unwrap().values[0];
        prop_assert!((b - s).norm() < 1e-8);
    }

    #[test]
    fn peak_rate_increases_with_beta(a in 0.01..1.0f64, b in 0.01..1.0f64) {
        prop_assume!((a - b).abs() > 1e-9);
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(max_instantaneous_rate(lo).unwrap() < max_instantaneous_rate(hi).unwrap());
    }

    #[test]
    fn peak_rate_at_critical_separation(beta in 0.05..=1.0f64) {
        let eta = critical_separation(beta).unwrap();
        let r = instantaneous_rate(&params(beta, eta)).unwrap();
        prop_assert!((r.rate - max_instantaneous_rate(beta).unwrap()).abs() < 1e-5);
    }

    #[test]
    fn small_eta_rate_matches_dicke(beta in 0.0..=1.0f64, sup in any::<bool>()) {
        let parity = if sup { Parity::Sup } else { Parity::Sub };
        let r = effective_rate_small_eta(&params(beta, 0.0), parity).unwrap();
        prop_assert!((r - (1.0 + parity.sign() * beta)).abs() < 1e-15);
    }
}
