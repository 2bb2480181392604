//! Experimental platform parameters and the delay `eta = d gamma / v_g`.

use crate::output::fmt_f64;

/// Shipped table; rates are `gamma_0 / 2 pi`, frequencies `omega_0 / 2 pi`.
pub const PLATFORMS_CSV: &str = include_str!("../data/platforms.csv");

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Platform {
    pub name: String,
    pub omega0_thz: f64,
    pub gamma0_mhz: f64,
    pub beta: f64,
    pub vg_over_c: (f64, f64),
    pub distance_m: f64,
    pub eta_quoted: f64,
}

impl Platform {
    /// `eta` at the slowest and fastest group velocity.
    pub fn eta_range(&self) -> (f64, f64) {
        let e = |v| eta(self.distance_m, self.gamma0_mhz, v);
        (e(self.vg_over_c.1), e(self.vg_over_c.0))
    }
}

/// `eta = d gamma / v_g` with `gamma = 2 pi gamma0`.
pub fn eta(distance_m: f64, gamma0_mhz: f64, vg_over_c: f64) -> f64 {
    distance_m * 2.0 * std::f64::consts::PI * gamma0_mhz * 1e6 / (vg_over_c * SPEED_OF_LIGHT)
}

pub fn platforms() -> Vec<Platform> {
    PLATFORMS_CSV
        .lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let num = |k: usize| f[k].parse::<f64>().expect("shipped table is numeric");
            Platform {
                name: f[0].to_string(),
                omega0_thz: num(1),
                gamma0_mhz: num(2),
                beta: num(3),
                vg_over_c: (num(4), num(5)),
                distance_m: num(6),
                eta_quoted: num(7),
            }
        })
        .collect()
}

/// The shipped table with computed `eta_min,eta_max` columns appended.
pub fn platforms_report() -> String {
    let mut lines = PLATFORMS_CSV.lines();
    let mut out = format!("{},eta_min,eta_max\n", lines.next().expect("header"));
    for (line, p) in lines.filter(|l| !l.trim().is_empty()).zip(platforms()) {
        let (lo, hi) = p.eta_range();
        out.push_str(&format!("{line},{},{}\n", fmt_f64(lo), fmt_f64(hi)));
    }
    out
}
