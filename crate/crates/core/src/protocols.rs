//! Phase-space tweezers and the protocols built from them: moving trapped
//! coherent components, stretching a cat, crushing the vacuum between two
//! exclusion circles, and factories of multi-component cats.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::{self, FieldState};
use crate::zeno::{self, EvolutionTrace, KickSpec, RunOptions, Schedule, Step};

pub const DEFAULT_ADIABATIC_CAP: f64 = 0.1;
/// Two coherent components or exclusion circles are treated as overlapping
/// when exp(−|Δ|²/2) exceeds this.
pub const OVERLAP_TOL: f64 = 1e-3;
pub const MAX_CAT_COMPONENTS: usize = 4;

/// exp(−|a − b|²/2).
pub fn gaussian_overlap(a: C64, b: C64) -> f64 {
    (-(a - b).norm_sqr() / 2.0).exp()
}

/// Path of an exclusion-circle center. The circle sits at `waypoints[0]`
/// before the run and is kicked at every later waypoint.
#[derive(Clone, Debug, PartialEq)]
pub struct TweezerTrajectory {
    pub s: usize,
    waypoints: Vec<C64>,
    /// Stroboscopic steps spent on each waypoint.
    pub kicks_per_step: usize,
    pub adiabatic_cap: f64,
}

impl TweezerTrajectory {
    pub fn new(s: usize, waypoints: Vec<C64>, adiabatic_cap: f64) -> Result<Self> {
        if waypoints.is_empty() {
            return Err(Error::InvalidParameter("trajectory has no waypoints".into()));
        }
        for (i, pair) in waypoints.windows(2).enumerate() {
            let size = (pair[1] - pair[0]).norm();
            if size >= adiabatic_cap {
                return Err(Error::Adiabaticity {
                    index: i,
                    size,
                    cap: adiabatic_cap,
                });
            }
        }
        Ok(TweezerTrajectory {
            s,
            waypoints,
            kicks_per_step: 1,
            adiabatic_cap,
        })
    }

    pub fn waypoints(&self) -> &[C64] {
        &self.waypoints
    }

    pub fn start(&self) -> C64 {
        self.waypoints[0]
    }

    pub fn end(&self) -> C64 {
        *self.waypoints.last().expect("non-empty")
    }

    /// Number of moves.
    pub fn steps(&self) -> usize {
        self.waypoints.len() - 1
    }

    pub fn max_step(&self) -> f64 {
        self.waypoints.windows(2).map(|p| (p[1] - p[0]).norm()).fold(0.0, f64::max)
    }

    /// Center after `k` moves, holding at the end once the path is done.
    pub fn at(&self, k: usize) -> C64 {
        self.waypoints[k.min(self.steps())]
    }

    fn kick(&self, k: usize) -> KickSpec {
        KickSpec::ideal(self.s, self.at(k))
    }
}

/// Straight s = 1 path from `from` to `to` in `n_steps` moves with the
/// default adiabatic cap.
pub fn linear_trajectory(from: C64, to: C64, n_steps: usize) -> Result<TweezerTrajectory> {
    linear_trajectory_with_cap(from, to, n_steps, DEFAULT_ADIABATIC_CAP)
}

pub fn linear_trajectory_with_cap(from: C64, to: C64, n_steps: usize, cap: f64) -> Result<TweezerTrajectory> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("trajectory needs at least one step".into()));
    }
    let waypoints = (0..=n_steps)
        .map(|k| from + (to - from) * (k as f64 / n_steps as f64))
        .collect();
    TweezerTrajectory::new(1, waypoints, cap)
}

/// s = 1 path interpolating radius and polar angle linearly about the
/// origin. The angle turns the short way round; a half turn goes
/// counterclockwise.
pub fn spiral_trajectory(from: C64, to: C64, n_steps: usize, cap: f64) -> Result<TweezerTrajectory> {
    if n_steps == 0 {
        return Err(Error::InvalidParameter("trajectory needs at least one step".into()));
    }
    if from.norm() == 0.0 || to.norm() == 0.0 {
        return Err(Error::InvalidParameter("spiral endpoints must avoid the origin".into()));
    }
    let (r0, r1) = (from.norm(), to.norm());
    let a0 = from.arg();
    let mut turn = to.arg() - a0;
    while turn > std::f64::consts::PI {
        turn -= 2.0 * std::f64::consts::PI;
    }
    while turn <= -std::f64::consts::PI {
        turn += 2.0 * std::f64::consts::PI;
    }
    let waypoints = (0..=n_steps)
        .map(|k| {
            let f = k as f64 / n_steps as f64;
            if k == n_steps {
                to
            } else {
                C64::from_polar(r0 + (r1 - r0) * f, a0 + turn * f)
            }
        })
        .collect();
    TweezerTrajectory::new(1, waypoints, cap)
}

/// How several trajectories share the kicks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Interleave {
    /// One kick per trajectory per round.
    RoundRobin,
    /// Each trajectory runs to completion before the next starts.
    Sequential,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TweezerOptions {
    pub interleave: Interleave,
    pub beta_free: C64,
    /// Centers of coherent components that no tweezer holds.
    pub untouched: Vec<C64>,
    pub overlap_tol: f64,
    pub run: RunOptions,
}

impl Default for TweezerOptions {
    fn default() -> Self {
        TweezerOptions {
            interleave: Interleave::RoundRobin,
            beta_free: C64::new(0.0, 0.0),
            untouched: Vec::new(),
            overlap_tol: OVERLAP_TOL,
            run: RunOptions::default(),
        }
    }
}

/// Positions of every trapped component over the run, one snapshot per step.
fn component_paths(trajectories: &[TweezerTrajectory], interleave: Interleave) -> Vec<Vec<C64>> {
    match interleave {
        Interleave::RoundRobin => {
            let rounds = trajectories.iter().map(|t| t.steps()).max().unwrap_or(0);
            (0..=rounds).map(|k| trajectories.iter().map(|t| t.at(k)).collect()).collect()
        }
        Interleave::Sequential => {
            let mut snaps = vec![trajectories.iter().map(|t| t.start()).collect::<Vec<_>>()];
            for (i, t) in trajectories.iter().enumerate() {
                for k in 1..=t.steps() {
                    let mut snap = snaps.last().expect("non-empty").clone();
                    snap[i] = t.at(k);
                    snaps.push(snap);
                }
            }
            snaps
        }
    }
}

fn check_overlaps(trajectories: &[TweezerTrajectory], opts: &TweezerOptions) -> Result<()> {
    for snap in component_paths(trajectories, opts.interleave) {
        for i in 0..snap.len() {
            for j in i + 1..snap.len() {
                let overlap = gaussian_overlap(snap[i], snap[j]);
                if overlap > opts.overlap_tol {
                    return Err(Error::Overlap {
                        what: format!("tweezers {i} and {j} at {} and {}", snap[i], snap[j]),
                        overlap,
                    });
                }
            }
            for (u, &fixed) in opts.untouched.iter().enumerate() {
                let overlap = gaussian_overlap(snap[i], fixed);
                if overlap > opts.overlap_tol {
                    return Err(Error::Overlap {
                        what: format!("tweezer {i} at {} and untouched component {u} at {fixed}", snap[i]),
                        overlap,
                    });
                }
            }
        }
    }
    Ok(())
}

/// Builds the stroboscopic schedule for a set of tweezers.
pub fn tweezer_schedule(trajectories: &[TweezerTrajectory], opts: &TweezerOptions) -> Result<Schedule> {
    if trajectories.is_empty() {
        return Err(Error::InvalidParameter("no trajectories".into()));
    }
    check_overlaps(trajectories, opts)?;
    let mut steps = Vec::new();
    let mut push = |kicks: Vec<KickSpec>, repeat: usize| {
        for _ in 0..repeat.max(1) {
            steps.push(Step {
                displacement: opts.beta_free,
                kicks: kicks.clone(),
            });
        }
    };
    match opts.interleave {
        Interleave::RoundRobin => {
            let rounds = trajectories.iter().map(|t| t.steps()).max().unwrap_or(0);
            let repeat = trajectories.iter().map(|t| t.kicks_per_step).max().unwrap_or(1);
            for k in 1..=rounds {
                push(trajectories.iter().map(|t| t.kick(k)).collect(), repeat);
            }
        }
        Interleave::Sequential => {
            for t in trajectories {
                for k in 1..=t.steps() {
                    push(vec![t.kick(k)], t.kicks_per_step);
                }
            }
        }
    }
    if steps.is_empty() {
        steps.push(Step {
            displacement: opts.beta_free,
            kicks: trajectories.iter().map(|t| t.kick(0)).collect(),
        });
    }
    Schedule::new(steps)
}

/// Drags the components trapped at the trajectory starts, kicks
/// interleaved round-robin, with free displacement `beta_free` per step.
pub fn tweezer_run(
    state: &FieldState,
    trajectories: &[TweezerTrajectory],
    beta_free: C64,
) -> Result<(FieldState, EvolutionTrace)> {
    let opts = TweezerOptions {
        beta_free,
        ..TweezerOptions::default()
    };
    tweezer_run_with(state, trajectories, &opts)
}

pub fn tweezer_run_with(
    state: &FieldState,
    trajectories: &[TweezerTrajectory],
    opts: &TweezerOptions,
) -> Result<(FieldState, EvolutionTrace)> {
    let schedule = tweezer_schedule(trajectories, opts)?;
    let trace = zeno::zeno_run_with(state, &schedule, &opts.run)?;
    Ok((trace.final_state.clone(), trace))
}

/// (e^{2iN Im(βγ*)}|γ⟩ + e^{iN Im(βα*)}|α + Nβ⟩)/norm. The first factor is
/// the topological phase of the held component; it is 1 whenever βγ* is real.
pub fn stretch_target(gamma: C64, alpha: C64, beta: C64, n_steps: usize, dim: usize) -> Result<FieldState> {
    let n = n_steps as f64;
    let held = C64::from_polar(1.0, 2.0 * n * (beta * gamma.conj()).im);
    let moved = C64::from_polar(1.0, n * (beta * alpha.conj()).im);
    fock::superposition(&[(held, gamma), (moved, alpha + beta * n)], dim)
}

/// Schedule holding the component at `gamma` with an s = 1 exclusion circle
/// while `n_steps` displacements β carry the component at `alpha` away.
/// Fails if the moving component passes too close to the held one.
pub fn stretch_schedule(gamma: C64, alpha: C64, beta: C64, n_steps: usize) -> Result<Schedule> {
    let closest = (0..=n_steps)
        .map(|k| gaussian_overlap(gamma, alpha + beta * k as f64))
        .fold(0.0, f64::max);
    if closest > OVERLAP_TOL {
        return Err(Error::Overlap {
            what: format!("moving component from {alpha} passes the held component at {gamma}"),
            overlap: closest,
        });
    }
    Schedule::uniform(beta, vec![KickSpec::ideal(1, gamma)], n_steps)
}

pub fn stretch_cat(state: &FieldState, gamma: C64, alpha: C64, beta: C64, n_steps: usize) -> Result<FieldState> {
    if n_steps == 0 {
        return Ok(state.clone());
    }
    let schedule = stretch_schedule(gamma, alpha, beta, n_steps)?;
    Ok(zeno::zeno_run_with(state, &schedule, &RunOptions::default())?.final_state)
}

/// Two tweezers moved simultaneously across an initial state.
#[derive(Clone, Debug, PartialEq)]
pub struct CrushSpec {
    pub initial: FieldState,
    pub first: TweezerTrajectory,
    pub second: TweezerTrajectory,
    pub run: RunOptions,
}

impl CrushSpec {
    /// Circles start at center ± half_width·direction and meet at center.
    pub fn converging(
        initial: FieldState,
        center: C64,
        direction: C64,
        half_width: f64,
        n_steps: usize,
        cap: f64,
    ) -> Result<Self> {
        let unit = direction / direction.norm();
        let offset = unit * half_width;
        Ok(CrushSpec {
            initial,
            first: linear_trajectory_with_cap(center + offset, center, n_steps, cap)?,
            second: linear_trajectory_with_cap(center - offset, center, n_steps, cap)?,
            run: RunOptions::default(),
        })
    }

    pub fn schedule(&self) -> Result<Schedule> {
        if self.first.steps() != self.second.steps() {
            return Err(Error::InvalidParameter(format!(
                "crush trajectories differ in length: {} vs {}",
                self.first.steps(),
                self.second.steps()
            )));
        }
        let steps = (1..=self.first.steps())
            .map(|k| {
                let (a, b) = (self.first.kick(k), self.second.kick(k));
                let kicks = if a == b { vec![a] } else { vec![a, b] };
                Step {
                    displacement: C64::new(0.0, 0.0),
                    kicks,
                }
            })
            .collect::<Vec<_>>();
        if steps.is_empty() {
            return Schedule::new(vec![Step {
                displacement: C64::new(0.0, 0.0),
                kicks: vec![],
            }]);
        }
        Schedule::new(steps)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrushResult {
    pub state: FieldState,
    pub trace: EvolutionTrace,
    pub energy: f64,
    /// Real amplitude of the even cat with the same mean energy.
    pub matched_alpha: f64,
    pub fidelity_vs_cat: f64,
}

pub fn crush_vacuum(spec: &CrushSpec) -> Result<CrushResult> {
    let trace = zeno::zeno_run_with(&spec.initial, &spec.schedule()?, &spec.run)?;
    let state = trace.final_state.clone();
    let energy = fock::mean_energy(&state);
    let matched_alpha = energy_matched_cat_amplitude(energy)?;
    let cat = fock::cat_state(C64::new(matched_alpha, 0.0), C64::new(1.0, 0.0), state.dim())?;
    let fidelity_vs_cat = fock::fidelity_pure(&cat, &state)?;
    Ok(CrushResult {
        state,
        trace,
        energy,
        matched_alpha,
        fidelity_vs_cat,
    })
}

/// Real α with α² tanh(α²) = target_energy, by bisection to 1e−10.
pub fn energy_matched_cat_amplitude(target_energy: f64) -> Result<f64> {
    if !(target_energy >= 0.0 && target_energy.is_finite()) {
        return Err(Error::InvalidParameter(format!("target energy {target_energy}")));
    }
    if target_energy == 0.0 {
        return Ok(0.0);
    }
    let f = |x: f64| x * x.tanh() - target_energy;
    let (mut lo, mut hi) = (0.0, target_energy + 1.0);
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((0.5 * (lo + hi)).sqrt())
}

/// Geometry of the crushes in [`multi_cat_factory`].
#[derive(Clone, Debug, PartialEq)]
pub struct FactoryPlan {
    pub dim: usize,
    /// Initial distance of each exclusion circle from its crush center.
    pub half_width: f64,
    pub steps: usize,
    pub adiabatic_cap: f64,
}

impl Default for FactoryPlan {
    fn default() -> Self {
        FactoryPlan {
            dim: 60,
            half_width: 2.5,
            steps: 200,
            adiabatic_cap: DEFAULT_ADIABATIC_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactoryResult {
    pub state: FieldState,
    pub crushes: usize,
    /// Nominal component centers.
    pub centers: Vec<C64>,
}

/// Crushes the vacuum along the real axis, then each resulting component
/// along the imaginary axis, until `n_components` components exist.
pub fn multi_cat_factory(n_components: usize, plan: &FactoryPlan) -> Result<FactoryResult> {
    if n_components == 0 || !n_components.is_power_of_two() || n_components > MAX_CAT_COMPONENTS {
        return Err(Error::InvalidParameter(format!(
            "component count must be a power of two up to {MAX_CAT_COMPONENTS}, got {n_components}"
        )));
    }
    let mut state = fock::vacuum(plan.dim)?;
    let mut centers = vec![C64::new(0.0, 0.0)];
    let mut crushes = 0;
    let directions = [C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
    for direction in directions {
        if centers.len() >= n_components {
            break;
        }
        let mut next = Vec::new();
        for &center in &centers {
            let spec = CrushSpec::converging(state, center, direction, plan.half_width, plan.steps, plan.adiabatic_cap)?;
            state = zeno::zeno_run_with(&spec.initial, &spec.schedule()?, &spec.run)?.final_state;
            crushes += 1;
            next.push(center + direction * plan.half_width);
            next.push(center - direction * plan.half_width);
        }
        centers = next;
    }
    Ok(FactoryResult {
        state,
        crushes,
        centers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{coherent, vacuum};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn linear_trajectory_examples() {
        let t = linear_trajectory(c(0.0, 0.0), c(0.0, 0.0), 10).unwrap();
        assert!(t.waypoints().iter().all(|&w| w == c(0.0, 0.0)));
        assert_eq!(t.waypoints().len(), 11);

        let err = linear_trajectory(c(2.0, 0.0), c(0.0, 5.0), 50).unwrap_err();
        match err {
            Error::Adiabaticity { size, .. } => assert!((size - 29f64.sqrt() / 50.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        let ok = linear_trajectory_with_cap(c(2.0, 0.0), c(0.0, 5.0), 50, 0.12).unwrap();
        assert_eq!(ok.waypoints().len(), 51);
        assert!((ok.max_step() - 0.1077).abs() < 1e-4);

        let crush = linear_trajectory(c(-2.5, 0.0), c(0.0, 0.0), 200).unwrap();
        assert!((crush.max_step() - 0.0125).abs() < 1e-12);
        assert!(linear_trajectory(c(0.0, 0.0), c(1.0, 0.0), 0).is_err());
    }

    #[test]
    fn spiral_trajectory_shape() {
        let t = spiral_trajectory(c(2.0, 0.0), c(0.0, 5.0), 50, 0.2).unwrap();
        assert_eq!(t.start(), c(2.0, 0.0));
        assert_eq!(t.end(), c(0.0, 5.0));
        let mid = t.at(25);
        assert!((mid.norm() - 3.5).abs() < 1e-12);
        assert!((mid.arg() - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        // the mirror path turns the same way and never approaches the first
        let u = spiral_trajectory(c(-2.0, 0.0), c(0.0, -5.0), 50, 0.2).unwrap();
        assert!((u.at(25) + mid).norm() < 1e-12);
        assert!(spiral_trajectory(c(2.0, 0.0), c(0.0, 5.0), 10, 0.2).is_err());
    }

    #[test]
    fn stationary_tweezer_keeps_component() {
        let dim = 40;
        let gamma = c(1.0, -0.5);
        let start = coherent(gamma, dim).unwrap();
        let t = TweezerTrajectory::new(1, vec![gamma; 21], DEFAULT_ADIABATIC_CAP).unwrap();
        let (out, trace) = tweezer_run(&start, &[t], c(0.0, 0.0)).unwrap();
        assert!(fock::fidelity_pure(&start, &out).unwrap() > 0.999);
        assert_eq!(trace.steps_run, 20);
    }

    #[test]
    fn straight_paths_to_five_i_overlap() {
        let a = linear_trajectory_with_cap(c(2.0, 0.0), c(0.0, 5.0), 50, 0.12).unwrap();
        let b = linear_trajectory_with_cap(c(-2.0, 0.0), c(0.0, -5.0), 50, 0.12).unwrap();
        let opts = TweezerOptions::default();
        assert!(matches!(tweezer_schedule(&[a, b], &opts), Err(Error::Overlap { .. })));
    }

    #[test]
    fn tweezer_drags_coherent_state() {
        let dim = 50;
        let t = linear_trajectory(c(1.0, 0.0), c(3.0, 0.0), 40).unwrap();
        let (out, _) = tweezer_run(&coherent(c(1.0, 0.0), dim).unwrap(), &[t], c(0.0, 0.0)).unwrap();
        let target = coherent(c(3.0, 0.0), dim).unwrap();
        assert!(fock::fidelity_pure(&target, &out).unwrap() > 0.95);
    }

    #[test]
    fn schedule_layouts() {
        let a = linear_trajectory(c(3.0, 0.0), c(4.0, 0.0), 20).unwrap();
        let b = linear_trajectory(c(-3.0, 0.0), c(-3.9, 0.0), 10).unwrap();
        let rr = tweezer_schedule(&[a.clone(), b.clone()], &TweezerOptions::default()).unwrap();
        assert_eq!(rr.len(), 20);
        assert!(rr.steps().iter().all(|s| s.kicks.len() == 2));
        assert_eq!(rr.steps()[15].kicks[1].gamma, c(-3.9, 0.0));
        let seq = tweezer_schedule(
            &[a, b],
            &TweezerOptions {
                interleave: Interleave::Sequential,
                ..TweezerOptions::default()
            },
        )
        .unwrap();
        assert_eq!(seq.len(), 30);
        assert!(seq.steps().iter().all(|s| s.kicks.len() == 1));
    }

    #[test]
    fn round_robin_order_does_not_matter_for_distant_tweezers() {
        let dim = 50;
        let start = fock::superposition(&[(c(1.0, 0.0), c(3.0, 0.0)), (c(1.0, 0.0), c(-3.0, 0.0))], dim).unwrap();
        let a = linear_trajectory(c(3.0, 0.0), c(4.0, 0.0), 20).unwrap();
        let b = linear_trajectory(c(-3.0, 0.0), c(-4.0, 0.0), 20).unwrap();
        let (ab, _) = tweezer_run(&start, &[a.clone(), b.clone()], c(0.0, 0.0)).unwrap();
        let (ba, _) = tweezer_run(&start, &[b, a], c(0.0, 0.0)).unwrap();
        assert!(1.0 - fock::fidelity_pure(&ab, &ba).unwrap() < 1e-6);
    }

    #[test]
    fn distant_tweezer_leaves_component_alone() {
        let dim = 60;
        let fixed = c(-2.5, 0.0);
        let start = fock::superposition(&[(c(1.0, 0.0), fixed), (c(1.0, 0.0), c(2.0, 0.0))], dim).unwrap();
        let t = linear_trajectory(c(2.0, 0.0), c(3.5, 1.0), 30).unwrap();
        let opts = TweezerOptions {
            untouched: vec![fixed],
            ..TweezerOptions::default()
        };
        let (out, _) = tweezer_run_with(&start, &[t], &opts).unwrap();
        let before = fock::fidelity_pure(&coherent(fixed, dim).unwrap(), &start).unwrap();
        let after = fock::fidelity_pure(&coherent(fixed, dim).unwrap(), &out).unwrap();
        assert!((before - after).abs() < 1e-3);
    }

    #[test]
    fn stretch_examples() {
        let dim = 60;
        let start = fock::superposition(&[(c(1.0, 0.0), c(-2.0, 0.0)), (c(1.0, 0.0), c(2.0, 0.0))], dim).unwrap();
        assert_eq!(stretch_cat(&start, c(-2.0, 0.0), c(2.0, 0.0), c(0.02, 0.0), 0).unwrap(), start);

        let out = stretch_cat(&start, c(-2.0, 0.0), c(2.0, 0.0), c(0.02, 0.0), 50).unwrap();
        let target = stretch_target(c(-2.0, 0.0), c(2.0, 0.0), c(0.02, 0.0), 50, dim).unwrap();
        assert!(fock::fidelity_pure(&target, &out).unwrap() > 0.95);

        // real β and real α give no relative phase
        let plain = fock::superposition(&[(c(1.0, 0.0), c(-2.0, 0.0)), (c(1.0, 0.0), c(3.0, 0.0))], dim).unwrap();
        assert!(fock::fidelity_pure(&target, &plain).unwrap() > 1.0 - 1e-14);

        assert!(matches!(
            stretch_cat(&start, c(-2.0, 0.0), c(2.0, 0.0), c(-0.1, 0.0), 20),
            Err(Error::Overlap { .. })
        ));
    }

    #[test]
    fn stretch_with_imaginary_beta_picks_up_phase() {
        let dim = 60;
        let (gamma, alpha, beta, n) = (c(-2.0, 0.0), c(2.0, 0.0), c(0.0, 0.02), 40);
        let start = fock::superposition(&[(c(1.0, 0.0), gamma), (c(1.0, 0.0), alpha)], dim).unwrap();
        let out = stretch_cat(&start, gamma, alpha, beta, n).unwrap();
        let target = stretch_target(gamma, alpha, beta, n, dim).unwrap();
        let moving_phase_only = fock::superposition(
            &[
                (c(1.0, 0.0), gamma),
                (C64::from_polar(1.0, n as f64 * (beta * alpha.conj()).im), alpha + beta * n as f64),
            ],
            dim,
        )
        .unwrap();
        let f = fock::fidelity_pure(&target, &out).unwrap();
        assert!(f > 0.999);
        assert!(fock::fidelity_pure(&moving_phase_only, &out).unwrap() < 0.01);
    }

    #[test]
    fn matched_amplitude_examples() {
        assert_eq!(energy_matched_cat_amplitude(0.0).unwrap(), 0.0);
        // α⁴ ≈ E for small E
        assert!((energy_matched_cat_amplitude(1e-12).unwrap() - 1e-3).abs() < 1e-6);
        let a = energy_matched_cat_amplitude(6.4).unwrap();
        assert!((a - 6.4f64.sqrt()).abs() < 1e-4);
        let x = a * a;
        assert!((x * x.tanh() - 6.4).abs() < 1e-9);
        let mut last = 0.0;
        for e in [0.1, 0.5, 1.0, 3.0, 9.0] {
            let a = energy_matched_cat_amplitude(e).unwrap();
            assert!(a > last);
            last = a;
        }
        assert!(energy_matched_cat_amplitude(-1.0).is_err());
    }

    #[test]
    fn degenerate_crush_keeps_vacuum() {
        let vac = vacuum(20).unwrap();
        let spec = CrushSpec {
            initial: vac.clone(),
            first: TweezerTrajectory::new(1, vec![c(0.0, 0.0)], 0.1).unwrap(),
            second: TweezerTrajectory::new(1, vec![c(0.0, 0.0)], 0.1).unwrap(),
            run: RunOptions::default(),
        };
        let res = crush_vacuum(&spec).unwrap();
        assert_eq!(res.state, vac);
        assert_eq!(res.energy, 0.0);
    }

    #[test]
    fn crush_applies_coinciding_kick_once() {
        let spec = CrushSpec::converging(vacuum(40).unwrap(), c(0.0, 0.0), c(1.0, 0.0), 2.5, 200, 0.1).unwrap();
        let schedule = spec.schedule().unwrap();
        assert_eq!(schedule.len(), 200);
        assert_eq!(schedule.steps()[199].kicks.len(), 1);
        assert!(schedule.steps()[..199].iter().all(|s| s.kicks.len() == 2));
    }

    #[test]
    fn factory_counts() {
        let plan = FactoryPlan {
            dim: 30,
            steps: 50,
            ..FactoryPlan::default()
        };
        let none = multi_cat_factory(1, &plan).unwrap();
        assert_eq!(none.crushes, 0);
        assert_eq!(none.state, vacuum(30).unwrap());
        assert!(multi_cat_factory(3, &plan).is_err());
        assert!(multi_cat_factory(8, &plan).is_err());
        assert_eq!(multi_cat_factory(2, &plan).unwrap().crushes, 1);
    }
}
