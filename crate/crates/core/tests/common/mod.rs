#![allow(dead_code)]

use ndarray::{Array1, Array2};
use qzd_core::C64;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Dense annihilation operator on `dim` levels.
pub fn lowering(dim: usize) -> Array2<C64> {
    let mut a = Array2::zeros((dim, dim));
    for n in 1..dim {
        a[[n - 1, n]] = c((n as f64).sqrt(), 0.0);
    }
    a
}

/// Matrix exponential by scaling, a 30-term Taylor series, and squaring.
pub fn taylor_expm(m: &Array2<C64>) -> Array2<C64> {
    let norm: f64 = m.iter().map(|z| z.norm()).fold(0.0, f64::max) * m.nrows() as f64;
    let mut squarings = 0;
    let mut scale = 1.0;
    while norm * scale > 0.5 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = m.mapv(|z| z * scale);
    let n = m.nrows();
    let mut term = Array2::<C64>::eye(n);
    let mut sum = term.clone();
    for k in 1..30 {
        term = term.dot(&x).mapv(|z| z / k as f64);
        sum = sum + &term;
    }
    for _ in 0..squarings {
        sum = sum.dot(&sum);
    }
    sum
}

/// exp(β a† − β* a), built independently of the library.
pub fn dense_displacement(beta: C64, dim: usize) -> Array2<C64> {
    let a = lowering(dim);
    let ad = a.t().mapv(|z| z.conj());
    let gen = ad.mapv(|z| z * beta) - a.mapv(|z| z * beta.conj());
    taylor_expm(&gen)
}

/// D(γ)(1 − 2|s⟩⟨s|)D(γ)†.
pub fn dense_kick(s: usize, gamma: C64, dim: usize) -> Array2<C64> {
    let mut u = Array2::<C64>::eye(dim);
    u[[s, s]] = c(-1.0, 0.0);
    let d = dense_displacement(gamma, dim);
    let dd = d.t().mapv(|z| z.conj());
    d.dot(&u).dot(&dd)
}

/// Poisson-weighted coherent amplitudes computed by recurrence.
pub fn coherent_amplitudes(alpha: C64, dim: usize) -> Array1<C64> {
    let mut v = Array1::zeros(dim);
    v[0] = c((-alpha.norm_sqr() / 2.0).exp(), 0.0);
    for n in 1..dim {
        v[n] = v[n - 1] * alpha / (n as f64).sqrt();
    }
    v
}

pub fn max_diff(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
