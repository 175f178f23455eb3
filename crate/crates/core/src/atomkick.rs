//! Realistic selective kick. An atom in |h⟩ is probed by a weak square
//! pulse tuned to the |h,s⟩ → |+,s⟩ dressed line; the pulse acts on each
//! photon number separately, on the block {|h,n⟩, |+,n⟩, |−,n⟩}
//! (or {|h,0⟩, |g,0⟩} for the empty cavity).

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{self, FieldState, Operator};
use crate::linalg;

/// Selectivity ratio above which the pulse starts to address neighbours.
pub const SELECTIVITY_WARNING: f64 = 0.3;
/// Default bound on the total atom leak of one kick before it is flagged.
pub const DEFAULT_LEAK_THRESHOLD: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq)]
pub struct PulseParams {
    /// Vacuum Rabi frequency Ω (rad/s).
    pub omega: f64,
    /// Drive Rabi frequency Ω_R on the bare h → g line (rad/s).
    pub rabi_drive: f64,
    /// Rabi angle on the resonant dressed line (rad).
    pub theta: f64,
    /// Addressed photon number.
    pub s: usize,
    pub include_minus_branch: bool,
}

impl PulseParams {
    pub fn new(omega: f64, rabi_drive: f64, theta: f64, s: usize) -> Self {
        PulseParams {
            omega,
            rabi_drive,
            theta,
            s,
            include_minus_branch: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return Err(Error::InvalidParameter(format!("omega must be positive, got {}", self.omega)));
        }
        if !(self.rabi_drive > 0.0 && self.rabi_drive.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "rabi_drive must be positive, got {}",
                self.rabi_drive
            )));
        }
        if !(self.theta > 0.0 && self.theta <= 4.0 * std::f64::consts::PI) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in (0, 4π], got {}",
                self.theta
            )));
        }
        Ok(())
    }

    /// Ω_R / (Ω |√(s+1) − √s|).
    pub fn selectivity_ratio(&self) -> f64 {
        let s = self.s as f64;
        self.rabi_drive / (self.omega * ((s + 1.0).sqrt() - s.sqrt()))
    }

    pub fn selectivity_warning(&self) -> Option<String> {
        let r = self.selectivity_ratio();
        (r > SELECTIVITY_WARNING).then(|| {
            format!("selectivity ratio {r:.3} exceeds {SELECTIVITY_WARNING}: neighbouring photon numbers are addressed")
        })
    }

    /// Coupling of |h,n⟩ to each driven level.
    fn coupling(&self, n: usize) -> f64 {
        if n == 0 {
            self.rabi_drive / 2.0
        } else {
            self.rabi_drive / (2.0 * std::f64::consts::SQRT_2)
        }
    }

    /// Pulse length τ giving a rotation θ on the addressed line. A single
    /// pulse acts on all photon numbers at once, so every block shares it.
    pub fn duration(&self) -> f64 {
        self.theta / (2.0 * self.coupling(self.s))
    }
}

/// Detunings (δ₊, δ₋) of the |h,n⟩ → |±,n⟩ lines from the drive. For n = 0
/// both entries hold the detuning of the bare |h,0⟩ → |g,0⟩ line.
pub fn dressed_detunings(n: usize, params: &PulseParams) -> (f64, f64) {
    let half = params.omega / 2.0;
    let rs = (params.s as f64).sqrt();
    if n == 0 {
        return (-half * rs, -half * rs);
    }
    let rn = (n as f64).sqrt();
    (half * (rn - rs), -half * (rn + rs))
}

/// Rotating-frame Hamiltonian on the photon-number-n block, |h,n⟩ first.
pub fn block_hamiltonian(n: usize, params: &PulseParams) -> Array2<C64> {
    let g = C64::new(params.coupling(n), 0.0);
    let (dp, dm) = dressed_detunings(n, params);
    let size = if n > 0 && params.include_minus_branch { 3 } else { 2 };
    let mut h = Array2::<C64>::zeros((size, size));
    h[[0, 1]] = g;
    h[[1, 0]] = g;
    h[[1, 1]] = C64::new(dp, 0.0);
    if size == 3 {
        h[[0, 2]] = g;
        h[[2, 0]] = g;
        h[[2, 2]] = C64::new(dm, 0.0);
    }
    h
}

/// exp(−iH_n τ) for the block of photon number `n`.
pub fn pulse_block_unitary(n: usize, params: &PulseParams) -> Result<Array2<C64>> {
    params.validate()?;
    let h = block_hamiltonian(n, params);
    Ok(linalg::expm(&(h * C64::new(0.0, -params.duration()))))
}

/// ⟨h,n|U_n|h,n⟩ for n < dim: the field operator conditioned on the atom
/// returning to |h⟩ is diagonal with these entries.
pub fn field_factors(params: &PulseParams, dim: usize) -> Result<Array1<C64>> {
    params.validate()?;
    (0..dim)
        .map(|n| pulse_block_unitary(n, params).map(|u| u[[0, 0]]))
        .collect::<Result<Vec<_>>>()
        .map(Array1::from)
}

#[derive(Clone, Debug, PartialEq)]
pub struct JointKickResult {
    /// Field operator on the |h⟩ branch (diagonal, contractive).
    pub field_unitary_on_h: Operator,
    /// Population left outside |h⟩ per photon number, 1 − |⟨h,n|U_n|h,n⟩|².
    pub atom_leak: Vec<f64>,
    /// Field state conditioned on the atom in |h⟩.
    pub conditioned: FieldState,
    /// Probability that the atom is found outside |h⟩.
    pub leak_probability: f64,
    /// Field populations of the discarded branch, per photon number.
    pub unconditioned_populations: Vec<f64>,
    /// Whether `leak_probability` exceeds the configured threshold.
    pub flagged: bool,
}

pub fn realistic_kick(state: &FieldState, params: &PulseParams) -> Result<JointKickResult> {
    realistic_kick_with(state, params, DEFAULT_LEAK_THRESHOLD)
}

/// Applies the pulse to |h⟩ ⊗ state and conditions on |h⟩.
pub fn realistic_kick_with(state: &FieldState, params: &PulseParams, leak_threshold: f64) -> Result<JointKickResult> {
    let dim = state.dim();
    if params.s >= dim {
        return Err(Error::IndexOutOfRange { index: params.s, dim });
    }
    let report = fock::truncation_check(state, fock::GUARD_LEVELS, fock::LEAK_TOL);
    if !report.ok {
        return Err(Error::TruncationLeak {
            step: 0,
            population: report.top_population,
            tol: fock::LEAK_TOL,
        });
    }
    let factors = field_factors(params, dim)?;
    let atom_leak: Vec<f64> = factors.iter().map(|u| (1.0 - u.norm_sqr()).max(0.0)).collect();
    let pops = fock::photon_distribution(state);
    let unconditioned_populations: Vec<f64> = pops.iter().zip(&atom_leak).map(|(p, l)| p * l).collect();
    let leak_probability: f64 = unconditioned_populations.iter().sum();
    let conditioned = FieldState::from_amplitudes(state.amplitudes() * &factors)?;
    Ok(JointKickResult {
        field_unitary_on_h: Operator::from_matrix(Array2::from_diag(&factors))?,
        atom_leak,
        conditioned,
        leak_probability,
        unconditioned_populations,
        flagged: leak_probability > leak_threshold,
    })
}

/// Coherent atom-field state during a sequence of interrogation pulses.
/// Row 0 holds the |h⟩ branch; rows 1 and 2 hold the |+,n⟩ (or |g,0⟩) and
/// |−,n⟩ amplitudes. Only the |h⟩ branch is displaced by the drive.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    branches: Array2<C64>,
}

impl JointState {
    /// |h⟩ ⊗ field.
    pub fn from_field(field: &FieldState) -> Self {
        let mut branches = Array2::zeros((3, field.dim()));
        branches.row_mut(0).assign(field.amplitudes());
        JointState { branches }
    }

    pub fn dim(&self) -> usize {
        self.branches.ncols()
    }

    pub fn h_branch(&self) -> Array1<C64> {
        self.branches.row(0).to_owned()
    }

    /// Probability of finding the atom in |h⟩.
    pub fn h_probability(&self) -> f64 {
        self.branches.row(0).iter().map(|z| z.norm_sqr()).sum()
    }

    /// Field state conditioned on |h⟩.
    pub fn conditioned(&self) -> Result<FieldState> {
        FieldState::from_amplitudes(self.h_branch())
    }

    /// D(β) on the |h⟩ branch.
    pub fn displace(&mut self, d: &Operator) -> Result<()> {
        if d.dim() != self.dim() {
            return Err(Error::DimensionMismatch(d.dim(), self.dim()));
        }
        let moved = d.apply_raw(&self.h_branch());
        self.branches.row_mut(0).assign(&moved);
        Ok(())
    }

    /// One pulse, block by block.
    pub fn pulse(&mut self, blocks: &[Array2<C64>]) -> Result<()> {
        if blocks.len() != self.dim() {
            return Err(Error::DimensionMismatch(blocks.len(), self.dim()));
        }
        for (n, u) in blocks.iter().enumerate() {
            let m = u.nrows();
            let col = self.branches.column(n).slice(ndarray::s![..m]).to_owned();
            let out = u.dot(&col);
            self.branches.column_mut(n).slice_mut(ndarray::s![..m]).assign(&out);
        }
        Ok(())
    }
}

/// Outcome of [`joint_zeno_run`].
#[derive(Clone, Debug, PartialEq)]
pub struct JointRun {
    pub state: JointState,
    /// P(h) after each step.
    pub h_probability: Vec<f64>,
}

/// `steps` rounds of D(β) followed by one pulse, kept coherent across the
/// whole run starting from |h⟩ ⊗ field.
pub fn joint_zeno_run(field: &FieldState, beta: C64, params: &PulseParams, steps: usize) -> Result<JointRun> {
    let dim = field.dim();
    if params.s >= dim {
        return Err(Error::IndexOutOfRange { index: params.s, dim });
    }
    let blocks = (0..dim).map(|n| pulse_block_unitary(n, params)).collect::<Result<Vec<_>>>()?;
    let d = fock::displacement_op(beta, dim)?;
    let mut state = JointState::from_field(field);
    let mut h_probability = Vec::with_capacity(steps);
    for _ in 0..steps {
        state.displace(&d)?;
        state.pulse(&blocks)?;
        h_probability.push(state.h_probability());
    }
    Ok(JointRun { state, h_probability })
}
