//! Truncated Fock space: pure field states, dense operators, the
//! displacement algebra, photon statistics and fidelities.
//!
//! States live on the basis |0⟩..|dim−1⟩. Every constructor renormalizes
//! over the truncated basis, so the norm invariant holds to rounding.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg;

/// Number of top Fock levels watched for truncation leakage.
pub const GUARD_LEVELS: usize = 3;
/// Largest tolerated population in the guard levels.
pub const LEAK_TOL: f64 = 1e-6;

/// Smallest truncation that holds a coherent amplitude of modulus
/// `amplitude`: |α|² + 6|α| + 10.
pub fn required_dim(amplitude: f64) -> usize {
    let a = amplitude.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

fn check_dim(dim: usize) -> Result<()> {
    if dim < 2 {
        Err(Error::DimensionTooSmall(dim))
    } else {
        Ok(())
    }
}

/// Pure state of the cavity field.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldState {
    amps: Array1<C64>,
}

impl FieldState {
    /// Normalizes `amps` into a state.
    pub fn from_amplitudes(amps: Array1<C64>) -> Result<Self> {
        check_dim(amps.len())?;
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::ZeroNorm);
        }
        Ok(FieldState {
            amps: amps.mapv(|z| z / norm),
        })
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Array1<C64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    /// ⟨self|other⟩.
    pub fn inner(&self, other: &FieldState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(self
            .amps
            .iter()
            .zip(other.amps.iter())
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// Copies the state into a larger (or equal) truncation.
    pub fn embed(&self, dim: usize) -> Result<FieldState> {
        if dim < self.dim() {
            return Err(Error::DimensionMismatch(self.dim(), dim));
        }
        let mut amps = Array1::zeros(dim);
        amps.slice_mut(ndarray::s![..self.dim()]).assign(&self.amps);
        Ok(FieldState { amps })
    }
}

/// Fock state |n⟩.
pub fn fock_basis(n: usize, dim: usize) -> Result<FieldState> {
    check_dim(dim)?;
    if n >= dim {
        return Err(Error::IndexOutOfRange { index: n, dim });
    }
    let mut amps = Array1::zeros(dim);
    amps[n] = C64::new(1.0, 0.0);
    Ok(FieldState { amps })
}

pub fn vacuum(dim: usize) -> Result<FieldState> {
    fock_basis(0, dim)
}

/// Coherent state |α⟩, enforcing the truncation rule.
pub fn coherent(alpha: C64, dim: usize) -> Result<FieldState> {
    check_dim(dim)?;
    let required = required_dim(alpha.norm());
    if dim < required {
        return Err(Error::TruncationTooSmall {
            amplitude: alpha.norm(),
            required,
            dim,
        });
    }
    coherent_unchecked(alpha, dim)
}

/// Coherent state |α⟩ renormalized over whatever truncation is given, with
/// no adequacy check. Useful for probing truncation diagnostics.
pub fn coherent_unchecked(alpha: C64, dim: usize) -> Result<FieldState> {
    check_dim(dim)?;
    FieldState::from_amplitudes(coherent_amplitudes(alpha, dim))
}

/// Unnormalized Poisson amplitudes e^{−|α|²/2} αⁿ/√n!, built in log space.
fn coherent_amplitudes(alpha: C64, dim: usize) -> Array1<C64> {
    let r = alpha.norm();
    if r == 0.0 {
        let mut amps = Array1::zeros(dim);
        amps[0] = C64::new(1.0, 0.0);
        return amps;
    }
    let lnf = linalg::ln_factorials(dim);
    let (ln_r, phase) = (r.ln(), alpha.arg());
    Array1::from_shape_fn(dim, |n| {
        let nf = n as f64;
        C64::from_polar((-0.5 * r * r + nf * ln_r - 0.5 * lnf[n]).exp(), nf * phase)
    })
}

/// Normalized (|α⟩ + phase·|−α⟩).
pub fn cat_state(alpha: C64, phase: C64, dim: usize) -> Result<FieldState> {
    if (phase.norm() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidPhase(phase.norm()));
    }
    superposition(&[(C64::new(1.0, 0.0), alpha), (phase, -alpha)], dim)
}

/// Normalized Σ cₖ|αₖ⟩ over the given (weight, amplitude) pairs.
pub fn superposition(components: &[(C64, C64)], dim: usize) -> Result<FieldState> {
    check_dim(dim)?;
    let mut amps = Array1::<C64>::zeros(dim);
    for &(weight, alpha) in components {
        let required = required_dim(alpha.norm());
        if dim < required {
            return Err(Error::TruncationTooSmall {
                amplitude: alpha.norm(),
                required,
                dim,
            });
        }
        let comp = FieldState::from_amplitudes(coherent_amplitudes(alpha, dim))?;
        amps.scaled_add(weight, comp.amplitudes());
    }
    FieldState::from_amplitudes(amps)
}

pub fn photon_distribution(state: &FieldState) -> Vec<f64> {
    state.amps.iter().map(|z| z.norm_sqr()).collect()
}

/// Mean photon number ⟨a†a⟩.
pub fn mean_energy(state: &FieldState) -> f64 {
    state
        .amps
        .iter()
        .enumerate()
        .map(|(n, z)| n as f64 * z.norm_sqr())
        .sum()
}

/// ⟨a⟩.
pub fn mean_amplitude(state: &FieldState) -> C64 {
    let a = &state.amps;
    (0..a.len() - 1)
        .map(|n| ((n + 1) as f64).sqrt() * a[n].conj() * a[n + 1])
        .sum()
}

/// Smallest variance of a rotated quadrature (a e^{−iφ} + a† e^{iφ})/2,
/// minimized over φ. The vacuum value is 1/4.
pub fn min_quadrature_variance(state: &FieldState) -> f64 {
    let a = &state.amps;
    let mean_a = mean_amplitude(state);
    let mean_a2: C64 = (0..a.len().saturating_sub(2))
        .map(|n| (((n + 1) * (n + 2)) as f64).sqrt() * a[n].conj() * a[n + 2])
        .sum();
    let n_mean = mean_energy(state);
    0.25 * (1.0 + 2.0 * (n_mean - mean_a.norm_sqr()) - 2.0 * (mean_a2 - mean_a * mean_a).norm())
}

/// |⟨a|b⟩|².
pub fn fidelity_pure(a: &FieldState, b: &FieldState) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr().min(1.0))
}

/// Population held in the top Fock levels of a truncated state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationReport {
    pub top_population: f64,
    pub guard_levels: usize,
    pub ok: bool,
}

impl TruncationReport {
    pub fn from_populations(populations: &[f64], guard_levels: usize, leak_tol: f64) -> Self {
        assert!(
            guard_levels < populations.len(),
            "guard_levels must be smaller than the dimension"
        );
        let top_population = populations[populations.len() - guard_levels..]
            .iter()
            .sum::<f64>();
        TruncationReport {
            top_population,
            guard_levels,
            ok: top_population < leak_tol,
        }
    }
}

pub fn truncation_check(state: &FieldState, guard_levels: usize, leak_tol: f64) -> TruncationReport {
    TruncationReport::from_populations(&photon_distribution(state), guard_levels, leak_tol)
}

/// Dense operator on the truncated space.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    mat: Array2<C64>,
}

impl Operator {
    pub fn from_matrix(mat: Array2<C64>) -> Result<Self> {
        let (r, c) = mat.dim();
        if r != c {
            return Err(Error::DimensionMismatch(r, c));
        }
        check_dim(r)?;
        Ok(Operator { mat })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Operator {
            mat: linalg::identity(dim),
        })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn into_matrix(self) -> Array2<C64> {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn dagger(&self) -> Operator {
        Operator {
            mat: linalg::dagger(&self.mat),
        }
    }

    /// self · other.
    pub fn compose(&self, other: &Operator) -> Result<Operator> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch(self.dim(), other.dim()));
        }
        Ok(Operator {
            mat: self.mat.dot(&other.mat),
        })
    }

    pub fn scale(&self, factor: C64) -> Operator {
        Operator {
            mat: &self.mat * factor,
        }
    }

    /// Raw matrix-vector product; no renormalization.
    pub fn apply_raw(&self, amps: &Array1<C64>) -> Array1<C64> {
        self.mat.dot(amps)
    }

    /// Applies the operator and renormalizes the result.
    pub fn apply(&self, state: &FieldState) -> Result<FieldState> {
        if self.dim() != state.dim() {
            return Err(Error::DimensionMismatch(self.dim(), state.dim()));
        }
        FieldState::from_amplitudes(self.mat.dot(state.amplitudes()))
    }

    /// ‖M†M − 1‖_max.
    pub fn unitarity_error(&self) -> f64 {
        let prod = linalg::dagger(&self.mat).dot(&self.mat);
        linalg::max_abs_diff(&prod, &linalg::identity(self.dim()))
    }

    /// ‖M − M†‖_max.
    pub fn hermiticity_error(&self) -> f64 {
        linalg::max_abs_diff(&self.mat, &linalg::dagger(&self.mat))
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_error() < 1e-10
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_error() < 1e-12
    }
}

pub fn annihilation_op(dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    let mut mat = Array2::zeros((dim, dim));
    for n in 1..dim {
        mat[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    Ok(Operator { mat })
}

pub fn creation_op(dim: usize) -> Result<Operator> {
    Ok(annihilation_op(dim)?.dagger())
}

pub fn number_op(dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    let mut mat = Array2::zeros((dim, dim));
    for n in 0..dim {
        mat[[n, n]] = C64::new(n as f64, 0.0);
    }
    Ok(Operator { mat })
}

/// D(β) = exp(βa† − β*a), exponentiated on the truncated space so that the
/// result is unitary there.
pub fn displacement_op(beta: C64, dim: usize) -> Result<Operator> {
    check_dim(dim)?;
    if beta == C64::new(0.0, 0.0) {
        return Operator::identity(dim);
    }
    let mut gen = Array2::<C64>::zeros((dim, dim));
    for n in 1..dim {
        let s = (n as f64).sqrt();
        gen[[n, n - 1]] = beta * s;
        gen[[n - 1, n]] = -beta.conj() * s;
    }
    Ok(Operator {
        mat: linalg::expm(&gen),
    })
}

/// Matrix elements ⟨m|D(β)|n⟩ of the untruncated displacement, for
/// m, n < dim. Uses the associated-Laguerre closed form with the polynomial
/// evaluated by its (stable) degree recurrence.
pub fn displacement_elements(beta: C64, dim: usize) -> Array2<C64> {
    let x = beta.norm_sqr();
    if x == 0.0 {
        return linalg::identity(dim);
    }
    let lnf = linalg::ln_factorials(dim);
    let ln_r = beta.norm().ln();
    let (phase_lower, phase_upper) = (beta.arg(), (-beta.conj()).arg());
    let mut out = Array2::<C64>::zeros((dim, dim));
    let mut lag = vec![0.0; dim];
    for k in 0..dim {
        laguerre_into(&mut lag[..dim - k], k as f64, x);
        let kf = k as f64;
        for n in 0..dim - k {
            let m = n + k;
            let mag = (-0.5 * x + 0.5 * (lnf[n] - lnf[m]) + kf * ln_r).exp() * lag[n];
            out[[m, n]] = C64::from_polar(1.0, kf * phase_lower) * mag;
            if k > 0 {
                out[[n, m]] = C64::from_polar(1.0, kf * phase_upper) * mag;
            }
        }
    }
    out
}

/// Fills `out[j] = L_j^{(k)}(x)` for j < out.len().
fn laguerre_into(out: &mut [f64], k: f64, x: f64) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = 1.0 + k - x;
    }
    for j in 1..out.len().saturating_sub(1) {
        let jf = j as f64;
        out[j + 1] = ((2.0 * jf + 1.0 + k - x) * out[j] - (jf + k) * out[j - 1]) / (jf + 1.0);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn poisson(mean: f64, n: usize) -> f64 {
        // independent evaluation: direct product, no log-space shortcuts
        let mut p = (-mean).exp();
        for k in 1..=n {
            p *= mean / k as f64;
        }
        p
    }

    #[test]
    fn fock_basis_examples() {
        let v = fock_basis(0, 10).unwrap();
        assert_eq!(v.amplitudes()[0], c(1.0, 0.0));
        assert!(v.amplitudes().iter().skip(1).all(|z| z.norm() == 0.0));
        let six = fock_basis(6, 15).unwrap();
        assert_eq!(photon_distribution(&six)[6], 1.0);
        assert_eq!(
            fock_basis(15, 15),
            Err(Error::IndexOutOfRange { index: 15, dim: 15 })
        );
        assert_eq!(fock_basis(0, 1), Err(Error::DimensionTooSmall(1)));
    }

    #[test]
    fn coherent_examples() {
        let vac = coherent(c(0.0, 0.0), 10).unwrap();
        assert_eq!(vac, vacuum(10).unwrap());
        let two = coherent(c(2.0, 0.0), 40).unwrap();
        assert!((mean_energy(&two) - 4.0).abs() < 1e-6);
        let five = coherent(c(-5.0, 0.0), 80).unwrap();
        let p25 = photon_distribution(&five)[25];
        assert!((p25 - poisson(25.0, 25)).abs() < 1e-12);
        assert!((p25 - 0.0795).abs() < 1e-4);
    }

    #[test]
    fn coherent_rejects_small_truncation() {
        assert!(matches!(
            coherent(c(5.0, 0.0), 26),
            Err(Error::TruncationTooSmall { required: 65, .. })
        ));
    }

    #[test]
    fn displacement_examples() {
        let id = displacement_op(c(0.0, 0.0), 12).unwrap();
        assert_eq!(id, Operator::identity(12).unwrap());

        let d = displacement_op(c(0.1, 0.0), 20).unwrap();
        let dm = displacement_op(c(-0.1, 0.0), 20).unwrap();
        let prod = d.compose(&dm).unwrap();
        assert!(linalg::max_abs_diff(prod.matrix(), &linalg::identity(20)) < 1e-10);

        let d1 = displacement_op(c(1.0, 0.0), 30).unwrap();
        assert!((d1.matrix()[[0, 0]] - c((-0.5f64).exp(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn displacement_inverse_is_adjoint() {
        let b = c(0.7, -1.3);
        let d = displacement_op(b, 40).unwrap();
        let dm = displacement_op(-b, 40).unwrap();
        assert!(linalg::max_abs_diff(dm.matrix(), d.dagger().matrix()) < 1e-12);
        assert!(d.is_unitary());
    }

    #[test]
    fn ladder_operators() {
        let a = annihilation_op(8).unwrap();
        let one = fock_basis(1, 8).unwrap();
        let out = a.apply(&one).unwrap();
        assert_eq!(out, fock_basis(0, 8).unwrap());
        let num = number_op(8).unwrap();
        assert_eq!(num.matrix()[[6, 6]], c(6.0, 0.0));

        let ad = creation_op(8).unwrap();
        let comm = a.compose(&ad).unwrap().matrix() - ad.compose(&a).unwrap().matrix();
        for i in 0..7 {
            for j in 0..7 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((comm[[i, j]] - c(expected, 0.0)).norm() < 1e-12);
            }
        }
        // the truncation artifact sits in the last level only
        assert!((comm[[7, 7]] - c(-7.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn cat_examples() {
        let vac = cat_state(c(0.0, 0.0), c(1.0, 0.0), 10).unwrap();
        assert!(fidelity_pure(&vac, &vacuum(10).unwrap()).unwrap() > 1.0 - 1e-15);

        let cat = cat_state(c(2.0, 0.0), c(1.0, 0.0), 40).unwrap();
        let p = photon_distribution(&cat);
        assert!(p.iter().skip(1).step_by(2).all(|&q| q < 1e-12));
        // ⟨n⟩ for the even cat by direct summation of the Poisson weights
        let (mut num, mut den) = (0.0, 0.0);
        for n in (0..80).step_by(2) {
            num += n as f64 * poisson(4.0, n);
            den += poisson(4.0, n);
        }
        let oracle = num / den;
        assert!((oracle - 4.0 * 4f64.tanh()).abs() < 1e-12);
        assert!((mean_energy(&cat) - oracle).abs() < 1e-9);
        assert!((mean_energy(&cat) - 3.9973).abs() < 1e-4);

        assert_eq!(
            cat_state(c(2.0, 0.0), c(2.0, 0.0), 40),
            Err(Error::InvalidPhase(2.0))
        );
        assert_eq!(cat_state(c(0.0, 0.0), c(-1.0, 0.0), 10), Err(Error::ZeroNorm));
    }

    #[test]
    fn photon_statistics_examples() {
        let vac = vacuum(5).unwrap();
        assert_eq!(photon_distribution(&vac)[0], 1.0);
        assert_eq!(mean_energy(&vac), 0.0);
        let coh = coherent(c(2.0, 0.0), 40).unwrap();
        assert!((mean_energy(&coh) - 4.0).abs() < 1e-9);
        assert!((photon_distribution(&coh).iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((mean_amplitude(&coh) - c(2.0, 0.0)).norm() < 1e-9);
        assert!((min_quadrature_variance(&coh) - 0.25).abs() < 1e-9);
    }

    #[test]
    fn fidelity_examples() {
        let psi = coherent(c(1.0, 0.5), 30).unwrap();
        assert!((fidelity_pure(&psi, &psi).unwrap() - 1.0).abs() < 1e-12);
        let f01 = fidelity_pure(&fock_basis(0, 5).unwrap(), &fock_basis(1, 5).unwrap()).unwrap();
        assert_eq!(f01, 0.0);
        let f = fidelity_pure(
            &coherent(c(0.0, 0.0), 30).unwrap(),
            &coherent(c(1.0, 0.0), 30).unwrap(),
        )
        .unwrap();
        assert!((f - (-1.0f64).exp()).abs() < 1e-12);
        assert!(matches!(
            fidelity_pure(&vacuum(3).unwrap(), &vacuum(4).unwrap()),
            Err(Error::DimensionMismatch(3, 4))
        ));
    }

    #[test]
    fn truncation_examples() {
        let r = truncation_check(&vacuum(10).unwrap(), 3, 1e-6);
        assert!(r.ok);
        assert_eq!(r.top_population, 0.0);

        let tight = coherent_unchecked(c(5.0, 0.0), 26).unwrap();
        assert!(!truncation_check(&tight, 3, 1e-6).ok);

        let roomy = coherent(c(5.0, 0.0), 80).unwrap();
        let r = truncation_check(&roomy, 3, 1e-6);
        // Poisson(25) mass at n = 77..79 from the direct formula
        let oracle: f64 = (77..80).map(|n| poisson(25.0, n)).sum();
        assert!(r.ok);
        assert!((r.top_population - oracle).abs() < 1e-15 + 1e-6 * oracle);
    }

    #[test]
    fn exact_elements_agree_with_truncated_exponential_inside_block() {
        // the truncated exponential matches the untruncated elements well
        // inside a padded space
        let beta = c(1.2, -0.7);
        let big = displacement_op(beta, 70).unwrap();
        let exact = displacement_elements(beta, 20);
        for m in 0..20 {
            for n in 0..20 {
                assert!((big.matrix()[[m, n]] - exact[[m, n]]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn exact_elements_column_zero_is_coherent_state() {
        let beta = c(-3.0, 4.0);
        let d = displacement_elements(beta, 90);
        let coh = coherent(beta, 90).unwrap();
        for n in 0..90 {
            assert!((d[[n, 0]] - coh.amplitudes()[n]).norm() < 1e-12);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn constructors_are_normalized(re in -4.0f64..4.0, im in -4.0f64..4.0, k in 0usize..3) {
            let alpha = c(re, im);
            let dim = required_dim(alpha.norm()) + 2;
            let phase = C64::from_polar(1.0, k as f64);
            let states = [coherent(alpha, dim).unwrap(), cat_state(alpha, phase, dim).unwrap()];
            for s in states.iter() {
                prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn displacement_composition_law(
            r1 in 0.0f64..2.5, t1 in 0.0f64..6.3, r2 in 0.0f64..2.5, t2 in 0.0f64..6.3
        ) {
            let b1 = C64::from_polar(r1, t1);
            let b2 = C64::from_polar(r2, t2);
            // compare on a block that the truncation leaves untouched
            let dim = 90;
            let lhs = displacement_op(b1, dim).unwrap().compose(&displacement_op(b2, dim).unwrap()).unwrap();
            let phase = C64::from_polar(1.0, (b1 * b2.conj()).im);
            let rhs = displacement_op(b1 + b2, dim).unwrap().scale(phase);
            let block = 15;
            let mut worst: f64 = 0.0;
            for m in 0..block {
                for n in 0..block {
                    worst = worst.max((lhs.matrix()[[m, n]] - rhs.matrix()[[m, n]]).norm());
                }
            }
            prop_assert!(worst < 1e-9, "composition residual {}", worst);
        }

        #[test]
        fn coherent_equals_displaced_vacuum(re in -5.0f64..5.0, im in -5.0f64..5.0) {
            let alpha = c(re, im);
            // headroom past the truncation rule keeps the edge error of the
            // truncated generator below the comparison tolerance
            let dim = required_dim(alpha.norm()) + 20;
            let coh = coherent(alpha, dim).unwrap();
            let disp = displacement_op(alpha, dim).unwrap().apply(&vacuum(dim).unwrap()).unwrap();
            prop_assert!(linalg::vec_max_abs_diff(coh.amplitudes(), disp.amplitudes()) < 1e-8);
        }

        #[test]
        fn displacement_is_unitary(re in -5.0f64..5.0, im in -5.0f64..5.0, dim in 2usize..60) {
            let d = displacement_op(c(re, im), dim).unwrap();
            prop_assert!(d.unitarity_error() < 1e-10);
        }

        #[test]
        fn fidelity_symmetric_and_phase_blind(
            a in -2.0f64..2.0, b in -2.0f64..2.0, p1 in 0.0f64..6.3, p2 in 0.0f64..6.3
        ) {
            let x = coherent(c(a, 0.3), 30).unwrap();
            let y = cat_state(c(b, -0.2), c(1.0, 0.0), 30).unwrap();
            let f = fidelity_pure(&x, &y).unwrap();
            prop_assert!((f - fidelity_pure(&y, &x).unwrap()).abs() < 1e-14);
            let xp = FieldState::from_amplitudes(x.amplitudes().mapv(|z| z * C64::from_polar(1.0, p1))).unwrap();
            let yp = FieldState::from_amplitudes(y.amplitudes().mapv(|z| z * C64::from_polar(1.0, p2))).unwrap();
            prop_assert!((f - fidelity_pure(&xp, &yp).unwrap()).abs() < 1e-12);
        }
    }
}
