//! Newton + DFT oracle for the Kepler expansions.

use cassini_core::orbexp::EccExpansion;
use cassini_core::TrigKind;
use std::f64::consts::TAU;

const N: usize = 4096;

/// (a/r, true anomaly) at mean anomaly `m`.
pub fn newton_kepler(e: f64, m: f64) -> (f64, f64) {
    let mut ea = m + e * m.sin();
    for _ in 0..50 {
        let step = (ea - e * ea.sin() - m) / (1.0 - e * ea.cos());
        ea -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    let v = 2.0 * ((1.0 + e).sqrt() * (ea / 2.0).sin()).atan2((1.0 - e).sqrt() * (ea / 2.0).cos());
    (1.0 / (1.0 - e * ea.cos()), v)
}

/// Fourier coefficients on a uniform mean-anomaly grid: (cos_k, sin_k) for k = 0..=kmax.
pub fn dft(f: impl Fn(f64) -> f64, kmax: usize) -> Vec<(f64, f64)> {
    let samples: Vec<f64> = (0..N).map(|j| f(TAU * j as f64 / N as f64)).collect();
    (0..=kmax)
        .map(|k| {
            let (mut c, mut s) = (0.0, 0.0);
            for (j, v) in samples.iter().enumerate() {
                let a = TAU * ((k * j) % N) as f64 / N as f64;
                c += v * a.cos();
                s += v * a.sin();
            }
            let w = if k == 0 { 1.0 } else { 2.0 } / N as f64;
            (c * w, s * w)
        })
        .collect()
}

/// Largest |series − oracle| over harmonics 0..=kmax, with the offending label.
pub fn max_error(exp: &EccExpansion, e: f64, f: impl Fn(f64) -> f64, kmax: usize) -> (f64, String) {
    let mut worst = (0.0, String::new());
    for (k, (c, s)) in dft(f, kmax).into_iter().enumerate() {
        let k = k as i32;
        let ec = exp.harmonic(e, k, TrigKind::Cos);
        let es = if k == 0 { 0.0 } else { exp.harmonic(e, k, TrigKind::Sin) };
        for (d, label) in [((ec - c).abs(), format!("cos {k}")), ((es - s).abs(), format!("sin {k}"))] {
            if d > worst.0 {
                worst = (d, label);
            }
        }
    }
    worst
}
