//! Dense complex linear algebra used throughout the crate: the matrix
//! exponential (Padé-13 scaling and squaring, after Higham 2005), a pivoted
//! linear solve, and a handful of small matrix utilities.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

/// Padé(13) numerator/denominator coefficients b_0..b_13.
const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// 1-norm bound below which Padé(13) is accurate to double precision.
const THETA13: f64 = 5.371_920_351_148_152;

pub fn identity(n: usize) -> Array2<C64> {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

/// Conjugate transpose.
pub fn dagger(m: &Array2<C64>) -> Array2<C64> {
    m.t().mapv(|z| z.conj())
}

/// Maximum column sum of absolute values.
pub fn norm_1(m: &Array2<C64>) -> f64 {
    m.columns()
        .into_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest elementwise modulus of `a - b`.
pub fn max_abs_diff(a: &Array2<C64>, b: &Array2<C64>) -> f64 {
    assert_eq!(a.dim(), b.dim());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

pub fn vec_max_abs_diff(a: &Array1<C64>, b: &Array1<C64>) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling and squaring with a Padé(13) approximant.
pub fn expm(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Array2::zeros((0, 0));
    }
    let norm = norm_1(a);
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * C64::new(0.5f64.powi(squarings), 0.0);
    let mut result = pade13(&scaled);
    for _ in 0..squarings {
        result = result.dot(&result);
    }
    result
}

fn pade13(a: &Array2<C64>) -> Array2<C64> {
    let n = a.nrows();
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let eye = identity(n);
    let a2 = a.dot(a);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let u_inner = &a6 * b(13) + &a4 * b(11) + &a2 * b(9);
    let u_outer = u_inner.dot(&a6) + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &eye * b(1);
    let u = a.dot(&u_outer);

    let v_inner = &a6 * b(12) + &a4 * b(10) + &a2 * b(8);
    let v = v_inner.dot(&a6) + &a6 * b(6) + &a4 * b(4) + &a2 * b(2) + &eye * b(0);

    solve(&(&v - &u), &(&v + &u)).expect("Padé denominator is nonsingular for scaled input")
}

/// Solves `a · x = rhs` by Gaussian elimination with partial pivoting.
/// Returns `None` when `a` is numerically singular.
pub fn solve(a: &Array2<C64>, rhs: &Array2<C64>) -> Option<Array2<C64>> {
    let n = a.nrows();
    assert_eq!(n, a.ncols());
    assert_eq!(n, rhs.nrows());
    let mut lu = a.clone();
    let mut x = rhs.clone();
    let m = x.ncols();

    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, lu[[r, col]].norm()))
            .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot_abs < f64::MIN_POSITIVE {
            return None;
        }
        if pivot_row != col {
            for j in 0..n {
                lu.swap([col, j], [pivot_row, j]);
            }
            for j in 0..m {
                x.swap([col, j], [pivot_row, j]);
            }
        }
        let pivot = lu[[col, col]];
        for row in (col + 1)..n {
            let factor = lu[[row, col]] / pivot;
            if factor == C64::new(0.0, 0.0) {
                continue;
            }
            for j in col..n {
                let v = lu[[col, j]];
                lu[[row, j]] -= factor * v;
            }
            for j in 0..m {
                let v = x[[col, j]];
                x[[row, j]] -= factor * v;
            }
        }
    }

    for col in (0..n).rev() {
        let pivot = lu[[col, col]];
        for j in 0..m {
            let mut acc = x[[col, j]];
            for k in (col + 1)..n {
                acc -= lu[[col, k]] * x[[k, j]];
            }
            x[[col, j]] = acc / pivot;
        }
    }
    Some(x)
}

/// Natural logs of factorials 0!..(n-1)!, accumulated in log space so that
/// nothing overflows past 170!.
pub fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    let mut acc = 0.0;
    for k in 0..n {
        if k > 0 {
            acc += (k as f64).ln();
        }
        out.push(acc);
    }
    out
}
