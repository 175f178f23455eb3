//! Stroboscopic Zeno engine: selective kicks U_s = 1 − 2|s⟩⟨s|, their
//! phase-space translates U_s(γ) = D(γ)U_sD(−γ), step-by-step evolution and
//! the Zeno-limit effective Hamiltonian.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::sync::Arc;

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;

use crate::atomkick::{self, PulseParams};
use crate::error::{Error, Result};
use crate::fock::{self, FieldState, Operator, TruncationReport, GUARD_LEVELS, LEAK_TOL};
use crate::linalg;
use crate::output::fmt17;

/// How a kick is physically realized.
#[derive(Clone, Debug, PartialEq)]
pub enum KickModel {
    /// The exact U_s.
    Ideal,
    /// Interrogation pulse on a dressed atom, conditioned on the atom
    /// returning to |h⟩.
    Dressed(PulseParams),
}

/// One selective kick: photon number `s`, exclusion circle centered at `gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct KickSpec {
    pub s: usize,
    pub gamma: C64,
    pub model: KickModel,
}

impl KickSpec {
    pub fn ideal(s: usize, gamma: C64) -> Self {
        KickSpec {
            s,
            gamma,
            model: KickModel::Ideal,
        }
    }

    pub fn dressed(params: PulseParams, gamma: C64) -> Self {
        KickSpec {
            s: params.s,
            gamma,
            model: KickModel::Dressed(params),
        }
    }

    /// Exclusion-circle radius √s.
    pub fn exclusion_radius(&self) -> f64 {
        (self.s as f64).sqrt()
    }
}

/// A free displacement followed by kicks applied in list order.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub displacement: C64,
    pub kicks: Vec<KickSpec>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    steps: Vec<Step>,
}

impl Schedule {
    pub fn new(steps: Vec<Step>) -> Result<Self> {
        if steps.is_empty() {
            return Err(Error::InvalidParameter("schedule has no steps".into()));
        }
        Ok(Schedule { steps })
    }

    /// `n` identical steps.
    pub fn uniform(beta: C64, kicks: Vec<KickSpec>, n: usize) -> Result<Self> {
        Schedule::new(vec![
            Step {
                displacement: beta,
                kicks
            };
            n
        ])
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Every kicked level must sit below the guard levels of `dim`.
    pub fn validate(&self, dim: usize) -> Result<()> {
        let limit = dim.saturating_sub(GUARD_LEVELS);
        for kick in self.steps.iter().flat_map(|s| s.kicks.iter()) {
            if kick.s >= limit {
                return Err(Error::IndexOutOfRange {
                    index: kick.s,
                    dim: limit,
                });
            }
            if let KickModel::Dressed(p) = &kick.model {
                p.validate()?;
            }
        }
        Ok(())
    }
}

/// Run controls for [`zeno_run_with`].
#[derive(Clone, Debug, PartialEq)]
pub struct RunOptions {
    /// Keep a record every `record_every` steps (step 0 is always kept).
    pub record_every: usize,
    pub guard_levels: usize,
    pub leak_tol: f64,
    /// Abort on the first truncation-check failure; otherwise only count it.
    pub abort_on_leak: bool,
    /// Store the state in each record.
    pub keep_states: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            record_every: 1,
            guard_levels: GUARD_LEVELS,
            leak_tol: LEAK_TOL,
            abort_on_leak: true,
            keep_states: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub energy: f64,
    pub amplitude: C64,
    pub populations: Vec<f64>,
    pub truncation: TruncationReport,
    pub state: Option<FieldState>,
}

impl TraceRecord {
    fn new(step: usize, state: &FieldState, opts: &RunOptions) -> Self {
        let populations = fock::photon_distribution(state);
        let truncation =
            TruncationReport::from_populations(&populations, opts.guard_levels, opts.leak_tol);
        TraceRecord {
            step,
            energy: fock::mean_energy(state),
            amplitude: fock::mean_amplitude(state),
            populations,
            truncation,
            state: opts.keep_states.then(|| state.clone()),
        }
    }
}

/// Recorded history of a stroboscopic run.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionTrace {
    pub records: Vec<TraceRecord>,
    pub final_state: FieldState,
    pub steps_run: usize,
    /// Steps whose norm drifted and was restored.
    pub renormalizations: usize,
    pub max_top_population: f64,
    /// Steps at which the truncation check failed.
    pub leak_violations: usize,
    /// Probability of losing the atom from |h⟩, accumulated over dressed kicks.
    pub atom_leak: f64,
}

impl EvolutionTrace {
    pub fn record_at(&self, step: usize) -> Option<&TraceRecord> {
        self.records.iter().find(|r| r.step == step)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.energy).collect()
    }

    /// Writes `step,energy,p0..p9,leak`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let probs: Vec<String> = (0..10).map(|n| format!("p{n}")).collect();
        writeln!(out, "step,energy,{},leak", probs.join(","))?;
        for r in &self.records {
            let p: Vec<String> = (0..10)
                .map(|n| fmt17(r.populations.get(n).copied().unwrap_or(0.0)))
                .collect();
            writeln!(
                out,
                "{},{},{},{}",
                r.step,
                fmt17(r.energy),
                p.join(","),
                fmt17(r.truncation.top_population)
            )?;
        }
        Ok(())
    }
}

/// Writes a state as `index,re,im` rows.
pub fn write_state<W: Write>(state: &FieldState, mut out: W) -> std::io::Result<()> {
    writeln!(out, "index,re,im")?;
    for (n, z) in state.amplitudes().iter().enumerate() {
        writeln!(out, "{},{},{}", n, fmt17(z.re), fmt17(z.im))?;
    }
    Ok(())
}

/// A run that stopped early, with everything recorded up to the failure.
#[derive(Clone)]
pub struct RunFailure {
    pub partial: EvolutionTrace,
    pub error: Error,
}

impl fmt::Debug for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunFailure")
            .field("error", &self.error)
            .field("steps_run", &self.partial.steps_run)
            .finish_non_exhaustive()
    }
}

impl fmt::Display for RunFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (after {} steps)", self.error, self.partial.steps_run)
    }
}

impl std::error::Error for RunFailure {}

impl From<RunFailure> for Error {
    fn from(f: RunFailure) -> Self {
        f.error
    }
}

/// U_s = 1 − 2|s⟩⟨s|.
pub fn kick_op(s: usize, dim: usize) -> Result<Operator> {
    if s >= dim {
        return Err(Error::IndexOutOfRange { index: s, dim });
    }
    let mut mat = linalg::identity(dim);
    mat[[s, s]] = C64::new(-1.0, 0.0);
    Operator::from_matrix(mat)
}

/// Dense matrix of a kick centered at `spec.gamma`. Ideal kicks give the
/// unitary D(γ)U_sD(−γ); dressed kicks give the (contractive) operator
/// conditioned on the atom ending in |h⟩.
pub fn displaced_kick(spec: &KickSpec, dim: usize) -> Result<Operator> {
    let core = match &spec.model {
        KickModel::Ideal => kick_op(spec.s, dim)?,
        KickModel::Dressed(params) => {
            if params.s >= dim {
                return Err(Error::IndexOutOfRange { index: params.s, dim });
            }
            Operator::from_matrix(Array2::from_diag(&atomkick::field_factors(params, dim)?))?
        }
    };
    if spec.gamma == C64::new(0.0, 0.0) {
        return Ok(core);
    }
    let d = fock::displacement_op(spec.gamma, dim)?;
    d.compose(&core)?.compose(&d.dagger())
}

type Key = (u64, u64);

fn key(z: C64) -> Key {
    (z.re.to_bits(), z.im.to_bits())
}

/// Stateful stepper that caches displacement matrices and kick vectors.
/// The cache never changes results.
#[derive(Debug)]
pub struct ZenoEngine {
    dim: usize,
    displacements: HashMap<Key, Arc<Operator>>,
    dressed: HashMap<(usize, u64, u64, u64, bool), Arc<Array1<C64>>>,
}

impl ZenoEngine {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimensionTooSmall(dim));
        }
        Ok(ZenoEngine {
            dim,
            displacements: HashMap::new(),
            dressed: HashMap::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn displacement(&mut self, beta: C64) -> Result<Arc<Operator>> {
        if let Some(d) = self.displacements.get(&key(beta)) {
            return Ok(Arc::clone(d));
        }
        let d = Arc::new(fock::displacement_op(beta, self.dim)?);
        self.displacements.insert(key(beta), Arc::clone(&d));
        Ok(d)
    }

    fn dressed_factors(&mut self, p: &PulseParams) -> Result<Arc<Array1<C64>>> {
        let k = (
            p.s,
            p.omega.to_bits(),
            p.rabi_drive.to_bits(),
            p.theta.to_bits(),
            p.include_minus_branch,
        );
        if let Some(f) = self.dressed.get(&k) {
            return Ok(Arc::clone(f));
        }
        let f = Arc::new(atomkick::field_factors(p, self.dim)?);
        self.dressed.insert(k, Arc::clone(&f));
        Ok(f)
    }

    /// Applies one kick in place. Returns the norm lost to the atom (zero
    /// for ideal kicks).
    pub fn apply_kick(&mut self, amps: &mut Array1<C64>, kick: &KickSpec) -> Result<f64> {
        if kick.s >= self.dim {
            return Err(Error::IndexOutOfRange {
                index: kick.s,
                dim: self.dim,
            });
        }
        let origin = kick.gamma == C64::new(0.0, 0.0);
        match &kick.model {
            KickModel::Ideal => {
                if origin {
                    amps[kick.s] = -amps[kick.s];
                } else {
                    // D(γ)U_sD(−γ) = 1 − 2|v⟩⟨v| with v = D(γ)|s⟩
                    let d = self.displacement(kick.gamma)?;
                    let v = d.matrix().column(kick.s);
                    let overlap: C64 = v.iter().zip(amps.iter()).map(|(a, b)| a.conj() * b).sum();
                    amps.scaled_add(-2.0 * overlap, &v);
                }
                Ok(0.0)
            }
            KickModel::Dressed(params) => {
                let before = amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
                let factors = self.dressed_factors(params)?;
                if origin {
                    amps.zip_mut_with(&*factors, |a, f| *a *= f);
                } else {
                    let d = self.displacement(kick.gamma)?;
                    let mut shifted = d.matrix().t().mapv(|z| z.conj()).dot(&*amps);
                    shifted.zip_mut_with(&*factors, |a, f| *a *= f);
                    *amps = d.matrix().dot(&shifted);
                }
                let after = amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
                Ok(((before - after) / before).max(0.0))
            }
        }
    }

    /// (Π kicks)·D(β)·state, renormalized. Returns the new state, the atom
    /// leak probability and whether the norm had drifted.
    fn step_raw(&mut self, state: &FieldState, beta: C64, kicks: &[KickSpec]) -> Result<(FieldState, f64, bool)> {
        if state.dim() != self.dim {
            return Err(Error::DimensionMismatch(state.dim(), self.dim));
        }
        let mut amps = if beta == C64::new(0.0, 0.0) {
            state.amplitudes().clone()
        } else {
            self.displacement(beta)?.apply_raw(state.amplitudes())
        };
        let mut survive = 1.0;
        for kick in kicks {
            let leak = self.apply_kick(&mut amps, kick)?;
            survive *= 1.0 - leak;
        }
        let norm_sqr = amps.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let drifted = norm_sqr != 1.0;
        Ok((FieldState::from_amplitudes(amps)?, 1.0 - survive, drifted))
    }

    pub fn step(&mut self, state: &FieldState, beta: C64, kicks: &[KickSpec]) -> Result<FieldState> {
        Ok(self.step_raw(state, beta, kicks)?.0)
    }

    /// Runs a schedule, recording per [`RunOptions`].
    pub fn run(
        &mut self,
        state: &FieldState,
        schedule: &Schedule,
        opts: &RunOptions,
    ) -> std::result::Result<EvolutionTrace, RunFailure> {
        let every = opts.record_every.max(1);
        let first = TraceRecord::new(0, state, opts);
        let mut trace = EvolutionTrace {
            max_top_population: first.truncation.top_population,
            records: vec![first],
            final_state: state.clone(),
            steps_run: 0,
            renormalizations: 0,
            leak_violations: 0,
            atom_leak: 0.0,
        };
        if let Err(error) = schedule.validate(self.dim) {
            return Err(RunFailure { partial: trace, error });
        }
        let mut survive = 1.0;
        for (i, step) in schedule.steps().iter().enumerate() {
            let index = i + 1;
            let (next, leak, drifted) = match self.step_raw(&trace.final_state, step.displacement, &step.kicks) {
                Ok(v) => v,
                Err(error) => return Err(RunFailure { partial: trace, error }),
            };
            survive *= 1.0 - leak;
            trace.atom_leak = 1.0 - survive;
            trace.renormalizations += drifted as usize;
            trace.steps_run = index;
            let populations = fock::photon_distribution(&next);
            let report = TruncationReport::from_populations(&populations, opts.guard_levels, opts.leak_tol);
            trace.max_top_population = trace.max_top_population.max(report.top_population);
            trace.final_state = next;
            if index % every == 0 {
                trace.records.push(TraceRecord::new(index, &trace.final_state, opts));
            }
            if !report.ok {
                trace.leak_violations += 1;
                if opts.abort_on_leak {
                    let error = Error::TruncationLeak {
                        step: index,
                        population: report.top_population,
                        tol: opts.leak_tol,
                    };
                    return Err(RunFailure { partial: trace, error });
                }
            }
        }
        Ok(trace)
    }
}

/// One stroboscopic step: D(β), then the kicks in list order.
pub fn zeno_step(state: &FieldState, beta: C64, kicks: &[KickSpec]) -> Result<FieldState> {
    let mut engine = ZenoEngine::new(state.dim())?;
    let next = engine.step(state, beta, kicks)?;
    let report = fock::truncation_check(&next, GUARD_LEVELS, LEAK_TOL);
    if !report.ok {
        return Err(Error::TruncationLeak {
            step: 1,
            population: report.top_population,
            tol: LEAK_TOL,
        });
    }
    Ok(next)
}

/// Runs `schedule` from `state` with default options, recording every
/// `record_every` steps.
pub fn zeno_run(
    state: &FieldState,
    schedule: &Schedule,
    record_every: usize,
) -> std::result::Result<EvolutionTrace, RunFailure> {
    let opts = RunOptions {
        record_every,
        ..RunOptions::default()
    };
    zeno_run_with(state, schedule, &opts)
}

pub fn zeno_run_with(
    state: &FieldState,
    schedule: &Schedule,
    opts: &RunOptions,
) -> std::result::Result<EvolutionTrace, RunFailure> {
    let mut engine = match ZenoEngine::new(state.dim()) {
        Ok(e) => e,
        Err(error) => {
            return Err(RunFailure {
                partial: EvolutionTrace {
                    records: vec![],
                    final_state: state.clone(),
                    steps_run: 0,
                    renormalizations: 0,
                    max_top_population: 0.0,
                    leak_violations: 0,
                    atom_leak: 0.0,
                },
                error,
            })
        }
    };
    engine.run(state, schedule, opts)
}

/// Drive Hamiltonian H = −i(𝓔*a − 𝓔a†), with ħ = 1 so that exp(−iHt) = D(𝓔t).
pub fn drive_hamiltonian(drive_amp: C64, dim: usize) -> Result<Operator> {
    if dim < 2 {
        return Err(Error::DimensionTooSmall(dim));
    }
    let i = C64::new(0.0, 1.0);
    let mut mat = Array2::<C64>::zeros((dim, dim));
    for n in 1..dim {
        let s = (n as f64).sqrt();
        mat[[n - 1, n]] = -i * drive_amp.conj() * s;
        mat[[n, n - 1]] = i * drive_amp * s;
    }
    Operator::from_matrix(mat)
}

/// H_Z = P_{<s}HP_{<s} + P_{>s}HP_{>s}: the drive with every coupling
/// to |s⟩ removed.
pub fn effective_hamiltonian(drive_amp: C64, s: usize, dim: usize) -> Result<Operator> {
    if s >= dim {
        return Err(Error::IndexOutOfRange { index: s, dim });
    }
    let mut mat = drive_hamiltonian(drive_amp, dim)?.into_matrix();
    mat.row_mut(s).fill(C64::new(0.0, 0.0));
    mat.column_mut(s).fill(C64::new(0.0, 0.0));
    Operator::from_matrix(mat)
}

/// exp(−iH_Z t)·state for a state living in one block of H_Z.
pub fn zeno_limit_evolve(state: &FieldState, drive_amp: C64, s: usize, t: f64) -> Result<FieldState> {
    let dim = state.dim();
    if s >= dim {
        return Err(Error::IndexOutOfRange { index: s, dim });
    }
    let p = fock::photon_distribution(state);
    let below: f64 = p[..s].iter().sum();
    let above: f64 = p[s + 1..].iter().sum();
    if below > LEAK_TOL && above > LEAK_TOL {
        return Err(Error::StraddlingSupport { s, below, above });
    }
    let h = effective_hamiltonian(drive_amp, s, dim)?;
    let gen = h.matrix() * C64::new(0.0, -t);
    FieldState::from_amplitudes(linalg::expm(&gen).dot(state.amplitudes()))
}

/// Residual of U_Z(s,γ,p) = D(γ)U_Z(s,0,p)D(−γ)·exp[2ip Im(βγ*)], with
/// U_Z(s,γ,p) = [U_s(γ)D(β)]^p, both sides as explicit dense products.
/// The maximum is taken over the leading block of Fock levels that stays
/// clear of the truncation edge while being displaced by |γ| + p|β|.
pub fn topological_phase_identity_residual(
    s: usize,
    gamma: C64,
    beta: C64,
    p: usize,
    dim: usize,
) -> Result<f64> {
    let dg = fock::displacement_op(gamma, dim)?;
    let db = fock::displacement_op(beta, dim)?;
    let us = kick_op(s, dim)?;
    let us_gamma = dg.compose(&us)?.compose(&dg.dagger())?;

    let step_gamma = us_gamma.compose(&db)?;
    let step_origin = us.compose(&db)?;
    let mut lhs = Operator::identity(dim)?;
    let mut origin = Operator::identity(dim)?;
    for _ in 0..p {
        lhs = step_gamma.compose(&lhs)?;
        origin = step_origin.compose(&origin)?;
    }
    let phase = C64::from_polar(1.0, 2.0 * p as f64 * (beta * gamma.conj()).im);
    let rhs = dg.compose(&origin)?.compose(&dg.dagger())?.scale(phase);

    let block = identity_block(gamma.norm() + p as f64 * beta.norm(), dim);
    let mut worst: f64 = 0.0;
    for m in 0..block {
        for n in 0..block {
            worst = worst.max((lhs.matrix()[[m, n]] - rhs.matrix()[[m, n]]).norm());
        }
    }
    Ok(worst)
}

/// Size of the leading Fock block on which both sides of the identity are
/// unaffected by truncation: Fock states below m sit at least `reach` plus a
/// margin of 1.5 in amplitude away from the edge of the space; at least 1.
fn identity_block(reach: f64, dim: usize) -> usize {
    let edge = (dim as f64).sqrt() - reach - 1.5;
    if edge <= 0.0 {
        return 1;
    }
    ((edge * edge).floor() as usize).clamp(1, dim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent, fock_basis, vacuum};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kick_op_examples() {
        let u1 = kick_op(1, 6).unwrap();
        let vac = vacuum(6).unwrap();
        assert_eq!(u1.apply_raw(vac.amplitudes()), *vac.amplitudes());
        let one = fock_basis(1, 6).unwrap();
        assert_eq!(u1.apply_raw(one.amplitudes())[1], c(-1.0, 0.0));
        let negative = u1.matrix().diag().iter().filter(|z| z.re < 0.0).count();
        assert_eq!(negative, 1);
        assert!(u1.is_unitary() && u1.is_hermitian());
        assert!(linalg::max_abs_diff(u1.compose(&u1).unwrap().matrix(), &linalg::identity(6)) == 0.0);
        assert!(kick_op(6, 6).is_err());
    }

    #[test]
    fn displaced_kick_examples() {
        let dim = 40;
        let at_origin = displaced_kick(&KickSpec::ideal(2, c(0.0, 0.0)), dim).unwrap();
        assert_eq!(at_origin, kick_op(2, dim).unwrap());

        let gamma = c(1.0, -0.5);
        let u = displaced_kick(&KickSpec::ideal(2, gamma), dim).unwrap();
        assert!(u.is_unitary());
        let sq = u.compose(&u).unwrap();
        assert!(linalg::max_abs_diff(sq.matrix(), &linalg::identity(dim)) < 1e-10);

        let eig = fock::displacement_op(gamma, dim).unwrap().apply(&fock_basis(2, dim).unwrap()).unwrap();
        let image = u.apply_raw(eig.amplitudes());
        assert!(linalg::vec_max_abs_diff(&image, &eig.amplitudes().mapv(|z| -z)) < 1e-10);
    }

    #[test]
    fn far_component_survives_displaced_kick() {
        // oracle: U_1(γ)|α⟩ = |α⟩ − 2⟨1_γ|α⟩|1_γ⟩ and |⟨1|D(−γ)|α⟩|² = x e^{−x}
        // with x = |α−γ|², so the infidelity is 4x e^{−x}(1 − x e^{−x})
        let dim = 60;
        let u = displaced_kick(&KickSpec::ideal(1, c(2.5, 0.0)), dim).unwrap();
        let far = coherent(c(-2.5, 0.0), dim).unwrap();
        let out = u.apply(&far).unwrap();
        let f = fock::fidelity_pure(&far, &out).unwrap();
        let q = 25.0 * (-25.0f64).exp();
        let oracle = (1.0 - 2.0 * q).powi(2);
        assert!((f - oracle).abs() < 1e-12);
        assert!(1.0 - f < 1e-3);
    }

    #[test]
    fn zeno_step_examples() {
        let dim = 30;
        let vac = vacuum(dim).unwrap();
        assert_eq!(zeno_step(&vac, c(0.0, 0.0), &[]).unwrap(), vac);

        let kicked = zeno_step(&vac, c(0.1, 0.0), &[KickSpec::ideal(1, c(0.0, 0.0))]).unwrap();
        let plain = fock::displacement_op(c(0.1, 0.0), dim).unwrap().apply(&vac).unwrap();
        let (k, p) = (kicked.amplitudes(), plain.amplitudes());
        assert!((k[1] + p[1]).norm() < 1e-15);
        assert!((k[0] - p[0]).norm() < 1e-15 && (k[2] - p[2]).norm() < 1e-15);
    }

    #[test]
    fn zeno_step_matches_dense_power() {
        let dim = 40;
        let d = fock::displacement_op(c(0.1, 0.0), dim).unwrap();
        let u = kick_op(6, dim).unwrap().compose(&d).unwrap();
        let mut dense = Operator::identity(dim).unwrap();
        for _ in 0..50 {
            dense = u.compose(&dense).unwrap();
        }
        let oracle = dense.apply_raw(vacuum(dim).unwrap().amplitudes());

        let schedule = Schedule::uniform(c(0.1, 0.0), vec![KickSpec::ideal(6, c(0.0, 0.0))], 50).unwrap();
        let opts = RunOptions {
            record_every: 10,
            abort_on_leak: false,
            ..RunOptions::default()
        };
        let trace = zeno_run_with(&vacuum(dim).unwrap(), &schedule, &opts).unwrap();
        assert!(linalg::vec_max_abs_diff(trace.final_state.amplitudes(), &oracle) < 1e-10);
        assert_eq!(trace.records.len(), 6);
    }

    #[test]
    fn kick_only_schedule_conserves_energy() {
        let dim = 40;
        let start = coherent(c(1.5, 0.5), dim).unwrap();
        let schedule = Schedule::uniform(c(0.0, 0.0), vec![KickSpec::ideal(2, c(0.0, 0.0))], 30).unwrap();
        let trace = zeno_run(&start, &schedule, 1).unwrap();
        let e0 = fock::mean_energy(&start);
        assert!(trace.records.iter().all(|r| (r.energy - e0).abs() < 1e-12));
    }

    #[test]
    fn truncation_failure_returns_partial_trace() {
        let dim = 12;
        let schedule = Schedule::uniform(c(0.3, 0.0), vec![], 40).unwrap();
        let err = zeno_run(&vacuum(dim).unwrap(), &schedule, 1).unwrap_err();
        assert!(matches!(err.error, Error::TruncationLeak { .. }));
        assert!(err.partial.steps_run > 0 && err.partial.steps_run < 40);
        assert_eq!(err.partial.records.len(), err.partial.steps_run + 1);

        let opts = RunOptions {
            abort_on_leak: false,
            ..RunOptions::default()
        };
        let trace = zeno_run_with(&vacuum(dim).unwrap(), &schedule, &opts).unwrap();
        assert_eq!(trace.steps_run, 40);
        assert!(trace.leak_violations > 0);
    }

    #[test]
    fn schedule_rejects_kicks_in_guard_levels() {
        let schedule = Schedule::uniform(c(0.0, 0.0), vec![KickSpec::ideal(9, c(0.0, 0.0))], 3).unwrap();
        assert!(schedule.validate(12).is_err());
        assert!(schedule.validate(13).is_ok());
        assert!(Schedule::new(vec![]).is_err());
    }

    #[test]
    fn effective_hamiltonian_examples() {
        let e = c(0.7, 0.2);
        let h = effective_hamiltonian(e, 6, 20).unwrap();
        assert!(h.is_hermitian());
        assert_eq!(h.matrix()[[6, 5]], c(0.0, 0.0));
        assert_eq!(h.matrix()[[6, 7]], c(0.0, 0.0));
        assert!(h.matrix().row(6).iter().all(|z| *z == c(0.0, 0.0)));
        assert!((h.matrix()[[1, 0]] - c(0.0, 1.0) * e).norm() < 1e-15);
        // untouched block elements agree with the bare drive
        let full = drive_hamiltonian(e, 20).unwrap();
        assert_eq!(h.matrix()[[3, 4]], full.matrix()[[3, 4]]);
        assert_eq!(h.matrix()[[9, 8]], full.matrix()[[9, 8]]);
    }

    #[test]
    fn drive_hamiltonian_generates_displacement() {
        let e = c(0.3, -0.4);
        let t = 2.0;
        let h = drive_hamiltonian(e, 30).unwrap();
        let u = linalg::expm(&(h.matrix() * c(0.0, -t)));
        let d = fock::displacement_op(e * t, 30).unwrap();
        assert!(linalg::max_abs_diff(&u, d.matrix()) < 1e-12);
    }

    #[test]
    fn zeno_limit_examples() {
        let dim = 30;
        let vac = vacuum(dim).unwrap();
        let same = zeno_limit_evolve(&vac, c(1.0, 0.0), 6, 0.0).unwrap();
        assert!(linalg::vec_max_abs_diff(same.amplitudes(), vac.amplitudes()) < 1e-15);

        let frozen = zeno_limit_evolve(&vac, c(1.0, 0.0), 1, 37.0).unwrap();
        assert!(fock::fidelity_pure(&frozen, &vac).unwrap() > 1.0 - 1e-15);

        let evolved = zeno_limit_evolve(&vac, c(1.0, 0.0), 6, 3.0).unwrap();
        let p = fock::photon_distribution(&evolved);
        assert!(p[6..].iter().all(|&q| q == 0.0));

        let straddle = fock::superposition(
            &[(c(1.0, 0.0), c(0.0, 0.0)), (c(1.0, 0.0), c(4.0, 0.0))],
            50,
        )
        .unwrap();
        assert!(matches!(
            zeno_limit_evolve(&straddle, c(1.0, 0.0), 6, 1.0),
            Err(Error::StraddlingSupport { s: 6, .. })
        ));
    }

    #[test]
    fn topological_identity_examples() {
        assert_eq!(
            topological_phase_identity_residual(2, c(0.0, 0.0), c(0.1, 0.0), 10, 30).unwrap(),
            0.0
        );
        let r = topological_phase_identity_residual(2, c(1.0, 0.5), c(0.0, 0.0), 10, 40).unwrap();
        assert!(r < 1e-12, "{r}");
        let r = topological_phase_identity_residual(1, c(1.0, 1.0), c(0.05, 0.0), 20, 60).unwrap();
        assert!(r < 1e-8, "{r}");
    }
}
