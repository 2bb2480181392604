//! Shared inputs for the criterion benches.

use num_complex::Complex64;
use wgqed::ModelParams;

/// `tau` grid on `[0, end]` with `n + 1` points.
pub fn grid(end: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|k| end * k as f64 / n as f64).collect()
}

/// Lossless pair at the given delay.
pub fn lossless(eta: f64) -> ModelParams {
    ModelParams::new(1.0, eta).expect("valid parameters")
}

/// Fixed spread of Lambert arguments over several decades and all phases.
pub fn lambert_arguments(n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|k| {
            let r = 10f64.powf(-4.0 + 8.0 * ((k as f64 * 0.618_033_988_749_895) % 1.0));
            let arg = std::f64::consts::PI * (2.0 * ((k as f64 * 0.414_213_562_373_095) % 1.0) - 1.0);
            Complex64::from_polar(r, arg)
        })
        .collect()
}
