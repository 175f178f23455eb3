//! Mixed-state evolution of the damped cavity: density matrices, the
//! Lindblad generator, a fixed-step RK4 integrator and timed schedules
//! mixing free drive, instantaneous displacements and interrogation pulses.

use std::io::Write;

use nalgebra::DMatrix;
use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::atomkick::{self, PulseParams};
use crate::error::{Error, Result};
use crate::fock::{self, FieldState, Operator};
use crate::linalg;
use crate::output::fmt17;
use crate::zeno::{self, KickModel, KickSpec};

/// Most negative eigenvalue tolerated before a run is aborted.
pub const POSITIVITY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: Array2<C64>,
}

impl DensityMatrix {
    /// |ψ⟩⟨ψ|.
    pub fn from_pure(state: &FieldState) -> Self {
        let v = state.amplitudes();
        let mat = Array2::from_shape_fn((v.len(), v.len()), |(m, n)| v[m] * v[n].conj());
        DensityMatrix { mat }
    }

    /// Wraps a matrix, checking Hermiticity (1e−10) and unit trace (1e−9).
    pub fn from_matrix(mat: Array2<C64>) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::DimensionMismatch(mat.nrows(), mat.ncols()));
        }
        if mat.nrows() < 2 {
            return Err(Error::DimensionTooSmall(mat.nrows()));
        }
        let rho = DensityMatrix { mat };
        if rho.hermiticity_error() > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "density matrix not Hermitian (error {:.3e})",
                rho.hermiticity_error()
            )));
        }
        if (rho.trace() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("density matrix trace {}", rho.trace())));
        }
        Ok(rho)
    }

    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Ok(DensityMatrix {
            mat: Array2::from_diag_elem(dim, C64::new(1.0 / dim as f64, 0.0)),
        })
    }

    pub fn matrix(&self) -> &Array2<C64> {
        &self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.mat.diag().iter().map(|z| z.re).sum()
    }

    /// Tr ρ².
    pub fn purity(&self) -> f64 {
        self.mat.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        linalg::max_abs_diff(&self.mat, &linalg::dagger(&self.mat))
    }

    pub fn populations(&self) -> Vec<f64> {
        self.mat.diag().iter().map(|z| z.re).collect()
    }

    pub fn mean_energy(&self) -> f64 {
        self.mat.diag().iter().enumerate().map(|(n, z)| n as f64 * z.re).sum()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let herm = DMatrix::from_fn(d, d, |i, j| {
            let z = (self.mat[[i, j]] + self.mat[[j, i]].conj()) * 0.5;
            nalgebra::Complex::new(z.re, z.im)
        });
        herm.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn renormalize(&mut self) -> Result<f64> {
        let tr = self.trace();
        if !(tr > 0.0) {
            return Err(Error::ZeroNorm);
        }
        self.mat.mapv_inplace(|z| z / tr);
        Ok(tr)
    }

    /// M ρ M†.
    fn conjugate_by(&mut self, m: &Array2<C64>) {
        self.mat = m.dot(&self.mat).dot(&linalg::dagger(m));
    }
}

/// ⟨ψ|ρ|ψ⟩.
pub fn fidelity_mixed(rho: &DensityMatrix, psi: &FieldState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch(rho.dim(), psi.dim()));
    }
    let v = psi.amplitudes();
    let rv = rho.mat.dot(v);
    let f: C64 = v.iter().zip(rv.iter()).map(|(a, b)| a.conj() * b).sum();
    Ok(f.re.clamp(0.0, 1.0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct LindbladParams {
    /// Cavity energy damping time (s); infinite disables damping.
    pub t_c: f64,
    /// Thermal photon number.
    pub n_th: f64,
    /// Integrator step (s).
    pub dt: f64,
}

impl LindbladParams {
    /// Zero temperature, dt = T_c/10⁶.
    pub fn new(t_c: f64) -> Self {
        LindbladParams {
            t_c,
            n_th: 0.0,
            dt: t_c / 1e6,
        }
    }

    /// No damping at all: segments evolve unitarily.
    pub fn undamped() -> Self {
        LindbladParams {
            t_c: f64::INFINITY,
            n_th: 0.0,
            dt: f64::INFINITY,
        }
    }

    pub fn is_damped(&self) -> bool {
        self.t_c.is_finite()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_c > 0.0) {
            return Err(Error::InvalidParameter(format!("t_c must be positive, got {}", self.t_c)));
        }
        if !(self.n_th >= 0.0 && self.n_th.is_finite()) {
            return Err(Error::InvalidParameter(format!("n_th must be non-negative, got {}", self.n_th)));
        }
        if self.is_damped() && !(self.dt > 0.0 && self.dt <= self.t_c * 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "dt must be positive and far below t_c, got {}",
                self.dt
            )));
        }
        Ok(())
    }
}

/// dρ/dt = −i[H,ρ] + (n_th+1)/T_c·𝒟[a]ρ + n_th/T_c·𝒟[a†]ρ with
/// 𝒟[L]ρ = LρL† − ½{L†L, ρ}.
pub fn lindblad_rhs(rho: &Array2<C64>, hamiltonian: Option<&Operator>, params: &LindbladParams) -> Array2<C64> {
    let d = rho.nrows();
    let mut out = match hamiltonian {
        Some(h) => {
            let hm = h.matrix();
            let comm = hm.dot(rho) - rho.dot(hm);
            comm * C64::new(0.0, -1.0)
        }
        None => Array2::zeros((d, d)),
    };
    if !params.is_damped() {
        return out;
    }
    let down = (params.n_th + 1.0) / params.t_c;
    let up = params.n_th / params.t_c;
    for m in 0..d {
        for n in 0..d {
            let (mf, nf) = (m as f64, n as f64);
            let mut acc = rho[[m, n]] * (-0.5 * down * (mf + nf));
            if m + 1 < d && n + 1 < d {
                acc += rho[[m + 1, n + 1]] * (down * ((mf + 1.0) * (nf + 1.0)).sqrt());
            }
            if up > 0.0 {
                acc -= rho[[m, n]] * (0.5 * up * (mf + nf + 2.0));
                if m > 0 && n > 0 {
                    acc += rho[[m - 1, n - 1]] * (up * (mf * nf).sqrt());
                }
            }
            out[[m, n]] += acc;
        }
    }
    out
}

/// Integrates for `duration` with RK4 at step ≤ params.dt.
pub fn integrate(rho: &mut DensityMatrix, hamiltonian: Option<&Operator>, duration: f64, params: &LindbladParams) {
    if duration <= 0.0 {
        return;
    }
    if !params.is_damped() {
        if let Some(h) = hamiltonian {
            let u = linalg::expm(&(h.matrix() * C64::new(0.0, -duration)));
            rho.conjugate_by(&u);
        }
        return;
    }
    let steps = (duration / params.dt).ceil().max(1.0) as usize;
    let h = duration / steps as f64;
    let f = |r: &Array2<C64>| lindblad_rhs(r, hamiltonian, params);
    for _ in 0..steps {
        let y = &rho.mat;
        let k1 = f(y);
        let k2 = f(&(y + &(&k1 * C64::new(h / 2.0, 0.0))));
        let k3 = f(&(y + &(&k2 * C64::new(h / 2.0, 0.0))));
        let k4 = f(&(y + &(&k3 * C64::new(h, 0.0))));
        let incr = (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * C64::new(h / 6.0, 0.0);
        rho.mat = &rho.mat + &incr;
    }
}

/// One piece of a timed schedule.
#[derive(Clone, Debug, PartialEq)]
pub enum Segment {
    /// Free evolution under the drive H = −i(𝓔*a − 𝓔a†) for `duration` seconds.
    Free { drive: C64, duration: f64 },
    /// Instantaneous displacement D(β).
    Displace(C64),
    /// A kick. Ideal kicks are instantaneous; dressed kicks last one pulse
    /// length, with the pulse acting at its midpoint and damping throughout.
    Kick(KickSpec),
}

impl Segment {
    pub fn duration(&self) -> f64 {
        match self {
            Segment::Free { duration, .. } => *duration,
            Segment::Displace(_) => 0.0,
            Segment::Kick(spec) => match &spec.model {
                KickModel::Ideal => 0.0,
                KickModel::Dressed(p) => p.duration(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MasterRecord {
    pub t: f64,
    pub energy: f64,
    pub purity: f64,
    /// NaN when no target was supplied.
    pub fidelity: f64,
    pub trace_err: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MasterRun {
    /// Final state, normalized over the |h⟩-conditioned branch.
    pub rho: DensityMatrix,
    pub records: Vec<MasterRecord>,
    /// Probability that the atom stayed in |h⟩ through every pulse.
    pub survival: f64,
    pub duration: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl MasterRun {
    /// survival × ⟨target|ρ|target⟩: fidelity of the unconditioned joint state
    /// with |h⟩ ⊗ |target⟩.
    pub fn joint_fidelity(&self, target: &FieldState) -> Result<f64> {
        Ok(self.survival * fidelity_mixed(&self.rho, target)?)
    }

    /// Writes `t_seconds,energy,purity,fidelity_vs_target,trace_err`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t_seconds,energy,purity,fidelity_vs_target,trace_err")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{}",
                fmt17(r.t),
                fmt17(r.energy),
                fmt17(r.purity),
                fmt17(r.fidelity),
                fmt17(r.trace_err)
            )?;
        }
        Ok(())
    }
}

/// Cache of the operators a timed schedule needs.
struct Operators {
    dim: usize,
    displacements: Vec<(C64, Operator)>,
    factors: Vec<(PulseParams, Array1<C64>)>,
}

impl Operators {
    fn displacement(&mut self, beta: C64) -> Result<&Operator> {
        if let Some(i) = self.displacements.iter().position(|(b, _)| *b == beta) {
            return Ok(&self.displacements[i].1);
        }
        self.displacements.push((beta, fock::displacement_op(beta, self.dim)?));
        Ok(&self.displacements.last().expect("just pushed").1)
    }

    fn factors(&mut self, p: &PulseParams) -> Result<Array1<C64>> {
        if let Some((_, f)) = self.factors.iter().find(|(q, _)| q == p) {
            return Ok(f.clone());
        }
        let f = atomkick::field_factors(p, self.dim)?;
        self.factors.push((p.clone(), f.clone()));
        Ok(f)
    }

    /// Field operator of a kick on the |h⟩ branch.
    fn kick(&mut self, spec: &KickSpec) -> Result<Array2<C64>> {
        let core = match &spec.model {
            KickModel::Ideal => zeno::kick_op(spec.s, self.dim)?.into_matrix(),
            KickModel::Dressed(p) => Array2::from_diag(&self.factors(p)?),
        };
        if spec.gamma == C64::new(0.0, 0.0) {
            return Ok(core);
        }
        let d = self.displacement(spec.gamma)?.matrix().clone();
        Ok(d.dot(&core).dot(&linalg::dagger(&d)))
    }
}

/// Runs a timed schedule on ρ.
pub fn evolve_master(
    rho: &DensityMatrix,
    segments: &[Segment],
    params: &LindbladParams,
    target: Option<&FieldState>,
) -> Result<MasterRun> {
    params.validate()?;
    let dim = rho.dim();
    if let Some(t) = target {
        if t.dim() != dim {
            return Err(Error::DimensionMismatch(t.dim(), dim));
        }
    }
    let mut ops = Operators {
        dim,
        displacements: Vec::new(),
        factors: Vec::new(),
    };
    let mut state = rho.clone();
    let mut t = 0.0;
    let mut survival = 1.0;
    let mut max_herm: f64 = state.hermiticity_error();
    let mut min_eig = state.min_eigenvalue();
    let record = |state: &DensityMatrix, t: f64| -> Result<MasterRecord> {
        Ok(MasterRecord {
            t,
            energy: state.mean_energy() / state.trace(),
            purity: state.purity(),
            fidelity: match target {
                Some(psi) => fidelity_mixed(state, psi)?,
                None => f64::NAN,
            },
            trace_err: (state.trace() - 1.0).abs(),
        })
    };
    let mut records = vec![record(&state, t)?];

    for seg in segments {
        match seg {
            Segment::Free { drive, duration } => {
                let h = zeno::drive_hamiltonian(*drive, dim)?;
                integrate(&mut state, Some(&h), *duration, params);
            }
            Segment::Displace(beta) => {
                let d = ops.displacement(*beta)?.matrix().clone();
                state.conjugate_by(&d);
            }
            Segment::Kick(spec) => {
                if spec.s >= dim {
                    return Err(Error::IndexOutOfRange { index: spec.s, dim });
                }
                let half = seg.duration() / 2.0;
                integrate(&mut state, None, half, params);
                let m = ops.kick(spec)?;
                let before = state.trace();
                state.conjugate_by(&m);
                survival *= state.trace() / before;
                state.renormalize()?;
                state.mat.mapv_inplace(|z| z * before);
                integrate(&mut state, None, half, params);
            }
        }
        t += seg.duration();
        max_herm = max_herm.max(state.hermiticity_error());
        let lowest = state.min_eigenvalue();
        min_eig = min_eig.min(lowest);
        if lowest < -POSITIVITY_TOL {
            return Err(Error::Positivity(lowest));
        }
        records.push(record(&state, t)?);
    }
    Ok(MasterRun {
        rho: state,
        records,
        survival,
        duration: t,
        max_hermiticity_error: max_herm,
        min_eigenvalue: min_eig,
    })
}

/// A 10-round tweezer stretch of an even cat, both components pulled
/// outward by dressed-atom kicks with no free evolution.
#[derive(Clone, Debug, PartialEq)]
pub struct RealisticStretch {
    pub dim: usize,
    pub s: usize,
    pub alpha_from: f64,
    pub alpha_to: f64,
    pub rounds: usize,
    /// Vacuum Rabi frequency Ω (rad/s).
    pub omega: f64,
    pub t_c: f64,
}

impl Default for RealisticStretch {
    fn default() -> Self {
        RealisticStretch {
            dim: 40,
            s: 1,
            alpha_from: 2.0,
            alpha_to: 3.0,
            rounds: 10,
            omega: 2.0 * std::f64::consts::PI * 50e3,
            t_c: 0.13,
        }
    }
}

/// Score of one (Ω_R, θ) point.
#[derive(Clone, Debug, PartialEq)]
pub struct StretchScore {
    pub rabi_drive: f64,
    pub theta: f64,
    pub duration: f64,
    pub fidelity_undamped: f64,
    /// NaN unless the damped run was performed.
    pub fidelity_damped: f64,
}

impl RealisticStretch {
    pub fn initial(&self) -> Result<FieldState> {
        fock::cat_state(C64::new(self.alpha_from, 0.0), C64::new(1.0, 0.0), self.dim)
    }

    pub fn target(&self) -> Result<FieldState> {
        fock::cat_state(C64::new(self.alpha_to, 0.0), C64::new(1.0, 0.0), self.dim)
    }

    /// Pulse sequence: in round k both ECs sit at ±(from + k·step).
    pub fn segments(&self, params: &PulseParams) -> Vec<Segment> {
        let step = (self.alpha_to - self.alpha_from) / self.rounds as f64;
        let mut out = Vec::with_capacity(2 * self.rounds);
        for k in 1..=self.rounds {
            let g = self.alpha_from + k as f64 * step;
            for sign in [1.0, -1.0] {
                out.push(Segment::Kick(KickSpec::dressed(params.clone(), C64::new(sign * g, 0.0))));
            }
        }
        out
    }

    pub fn pulse(&self, rabi_drive: f64, theta: f64) -> PulseParams {
        PulseParams::new(self.omega, rabi_drive, theta, self.s)
    }

    pub fn total_duration(&self, params: &PulseParams) -> f64 {
        2.0 * self.rounds as f64 * params.duration()
    }

    /// Joint fidelity with |h⟩ ⊗ target after the stretch.
    pub fn run(&self, params: &PulseParams, lindblad: &LindbladParams) -> Result<MasterRun> {
        let rho = DensityMatrix::from_pure(&self.initial()?);
        evolve_master(&rho, &self.segments(params), lindblad, Some(&self.target()?))
    }

    pub fn fidelity(&self, params: &PulseParams, lindblad: &LindbladParams) -> Result<f64> {
        self.run(params, lindblad)?.joint_fidelity(&self.target()?)
    }

    /// Scores every grid point whose total duration lies in `window`
    /// without damping, then repeats the `damped_top` best with damping.
    /// Results are sorted by damped fidelity, then undamped fidelity.
    pub fn grid_search(
        &self,
        rabi_drives: &[f64],
        thetas: &[f64],
        window: (f64, f64),
        damped_top: usize,
    ) -> Result<Vec<StretchScore>> {
        let mut scores = Vec::new();
        for &rabi_drive in rabi_drives {
            for &theta in thetas {
                let p = self.pulse(rabi_drive, theta);
                let duration = self.total_duration(&p);
                if duration < window.0 || duration > window.1 {
                    continue;
                }
                scores.push(StretchScore {
                    rabi_drive,
                    theta,
                    duration,
                    fidelity_undamped: self.fidelity(&p, &LindbladParams::undamped())?,
                    fidelity_damped: f64::NAN,
                });
            }
        }
        scores.sort_by(|a, b| b.fidelity_undamped.total_cmp(&a.fidelity_undamped));
        let damped = LindbladParams::new(self.t_c);
        for score in scores.iter_mut().take(damped_top) {
            score.fidelity_damped = self.fidelity(&self.pulse(score.rabi_drive, score.theta), &damped)?;
        }
        scores.sort_by(|a, b| {
            let key = |s: &StretchScore| if s.fidelity_damped.is_nan() { f64::NEG_INFINITY } else { s.fidelity_damped };
            key(b).total_cmp(&key(a)).then(b.fidelity_undamped.total_cmp(&a.fidelity_undamped))
        });
        Ok(scores)
    }
}
