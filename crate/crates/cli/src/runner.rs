use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use qzd_core::atomkick::{joint_zeno_run, PulseParams};
use qzd_core::fock::{self, FieldState, TruncationReport};
use qzd_core::openquantum::{DensityMatrix, LindbladParams, RealisticStretch};
use qzd_core::output::fmt17;
use qzd_core::phasespace::{self, Bounds, PhaseSpaceState, DEFAULT_GRID_POINTS};
use qzd_core::protocols::{self, CrushSpec, FactoryPlan, Interleave, TweezerOptions, TweezerTrajectory};
use qzd_core::zeno::{self, EvolutionTrace, KickSpec, RunOptions, Schedule};
use qzd_core::C64;
use serde::Serialize;

use crate::config::{cx, InterleaveKind, KickKind, PathShape, Protocol, RunConfig, StateConfig, StateKind};
use crate::error::{io_err, CliError, Result};

/// Width of the sliding window used for the energy-contrast analysis.
pub const CONTRAST_WINDOW: usize = 60;
const DEFAULT_OMEGA_HZ: f64 = 50e3;
const DEFAULT_LOBE_FRACTION: f64 = 0.25;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TruncationSummary {
    pub ok: bool,
    pub final_top_population: f64,
    pub max_top_population: f64,
    pub guard_levels: usize,
    pub tolerance: f64,
    pub violations: usize,
}

impl TruncationSummary {
    fn from_report(report: TruncationReport, max_top: f64, violations: usize) -> Self {
        TruncationSummary {
            ok: report.ok && violations == 0,
            final_top_population: report.top_population,
            max_top_population: max_top.max(report.top_population),
            guard_levels: report.guard_levels,
            tolerance: fock::LEAK_TOL,
            violations,
        }
    }

    fn from_trace(trace: &EvolutionTrace) -> Self {
        let report = fock::truncation_check(&trace.final_state, fock::GUARD_LEVELS, fock::LEAK_TOL);
        Self::from_report(report, trace.max_top_population, trace.leak_violations)
    }

    fn from_state(state: &FieldState) -> Self {
        let report = fock::truncation_check(state, fock::GUARD_LEVELS, fock::LEAK_TOL);
        Self::from_report(report, report.top_population, 0)
    }

    fn from_populations(populations: &[f64]) -> Self {
        let report = TruncationReport::from_populations(populations, fock::GUARD_LEVELS, fock::LEAK_TOL);
        Self::from_report(report, report.top_population, 0)
    }
}

/// Machine-readable outcome of one run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub name: String,
    pub protocol: Protocol,
    pub dim: usize,
    pub steps_run: usize,
    pub final_energy: f64,
    pub fidelity: Option<f64>,
    pub fidelity_reference: Option<String>,
    pub truncation: TruncationSummary,
    pub atom_leak: Option<f64>,
    pub metrics: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub files: Vec<String>,
    pub wall_time_s: f64,
}

/// Field-level result of a protocol, before artifacts are written.
struct Outcome {
    state: Snapshot,
    trace: Option<EvolutionTrace>,
    extra_csv: Vec<(String, String)>,
    steps_run: usize,
    fidelity: Option<f64>,
    fidelity_reference: Option<String>,
    truncation: TruncationSummary,
    atom_leak: Option<f64>,
    metrics: BTreeMap<String, f64>,
    warnings: Vec<String>,
}

enum Snapshot {
    Pure(FieldState),
    Mixed(DensityMatrix),
}

impl Snapshot {
    fn energy(&self) -> f64 {
        match self {
            Snapshot::Pure(s) => fock::mean_energy(s),
            Snapshot::Mixed(r) => r.mean_energy(),
        }
    }
}

impl Outcome {
    fn new(state: FieldState, trace: Option<EvolutionTrace>) -> Self {
        let truncation = match &trace {
            Some(t) => TruncationSummary::from_trace(t),
            None => TruncationSummary::from_state(&state),
        };
        Outcome {
            steps_run: trace.as_ref().map_or(0, |t| t.steps_run),
            state: Snapshot::Pure(state),
            trace,
            extra_csv: Vec::new(),
            fidelity: None,
            fidelity_reference: None,
            truncation,
            atom_leak: None,
            metrics: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }
}

/// Where and how loudly a run writes its artifacts.
#[derive(Clone, Debug, Default)]
pub struct RunTarget {
    pub out: Option<PathBuf>,
    pub quiet: bool,
}

pub fn build_state(st: &StateConfig, dim: usize) -> Result<FieldState> {
    let state = match st.kind.unwrap_or(StateKind::Vacuum) {
        StateKind::Vacuum => fock::vacuum(dim)?,
        StateKind::Fock => fock::fock_basis(st.n.unwrap_or(0), dim)?,
        StateKind::Coherent => fock::coherent(cx(st.alpha.unwrap_or_default()), dim)?,
        StateKind::Cat => fock::cat_state(cx(st.alpha.unwrap_or_default()), cx(st.phase.unwrap_or([1.0, 0.0])), dim)?,
        StateKind::Superposition => {
            let comps: Vec<(C64, C64)> = st
                .components
                .as_deref()
                .unwrap_or_default()
                .iter()
                .map(|&z| (C64::new(1.0, 0.0), cx(z)))
                .collect();
            fock::superposition(&comps, dim)?
        }
    };
    Ok(state)
}

fn describe(st: &StateConfig) -> String {
    let kind = st.kind.unwrap_or(StateKind::Vacuum);
    match kind {
        StateKind::Vacuum => "vacuum".into(),
        StateKind::Fock => format!("fock({})", st.n.unwrap_or(0)),
        StateKind::Coherent => format!("coherent({})", cx(st.alpha.unwrap_or_default())),
        StateKind::Cat => format!(
            "cat({}, phase {})",
            cx(st.alpha.unwrap_or_default()),
            cx(st.phase.unwrap_or([1.0, 0.0]))
        ),
        StateKind::Superposition => format!(
            "superposition of {:?}",
            st.components.as_deref().unwrap_or_default()
        ),
    }
}

fn run_options(cfg: &RunConfig, keep_states: bool) -> RunOptions {
    RunOptions {
        record_every: cfg.record_every.unwrap_or(1),
        abort_on_leak: cfg.abort_on_leak.unwrap_or(true),
        keep_states,
        ..RunOptions::default()
    }
}

fn pulse_params(cfg: &RunConfig, s: usize) -> Option<PulseParams> {
    let k = cfg.kick.as_ref()?;
    if k.model != Some(KickKind::Dressed) {
        return None;
    }
    let omega = 2.0 * PI * k.omega_hz.unwrap_or(DEFAULT_OMEGA_HZ);
    let rabi = match (k.rabi_drive_hz, k.selectivity) {
        (Some(hz), _) => 2.0 * PI * hz,
        (None, Some(r)) => r * omega * (((s + 1) as f64).sqrt() - (s as f64).sqrt()),
        (None, None) => unreachable!("validated"),
    };
    let mut p = PulseParams::new(omega, rabi, k.theta.unwrap_or(PI), s);
    if let Some(minus) = k.include_minus_branch {
        p.include_minus_branch = minus;
    }
    Some(p)
}

/// Peak-to-trough energy over each window of `window` consecutive records.
pub fn energy_contrast(energies: &[f64], window: usize) -> Vec<f64> {
    energies
        .windows(window.max(1))
        .map(|w| {
            let hi = w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let lo = w.iter().cloned().fold(f64::INFINITY, f64::min);
            hi - lo
        })
        .collect()
}

fn field_metrics(state: &FieldState, s: Option<usize>, metrics: &mut BTreeMap<String, f64>) {
    let p = fock::photon_distribution(state);
    let a = fock::mean_amplitude(state);
    metrics.insert("mean_amplitude_re".into(), a.re);
    metrics.insert("mean_amplitude_im".into(), a.im);
    metrics.insert("min_quadrature_variance".into(), fock::min_quadrature_variance(state));
    metrics.insert("even_population".into(), p.iter().step_by(2).sum());
    metrics.insert("p0".into(), p[0]);
    if let Some(s) = s {
        metrics.insert("population_above_s".into(), p.iter().skip(s + 1).sum());
    }
}

fn stroboscopic(cfg: &RunConfig, dim: usize, protocol: Protocol) -> Result<Outcome> {
    let s = cfg.s.expect("validated");
    let beta = cx(cfg.beta.expect("validated"));
    let steps = cfg.steps.expect("validated");
    let initial_cfg = cfg.initial.as_ref().expect("validated");
    let initial = build_state(initial_cfg, dim)?;
    let schedule = Schedule::uniform(beta, vec![KickSpec::ideal(s, C64::new(0.0, 0.0))], steps)?;
    let keep = cfg.snapshots.as_ref().is_some_and(|v| !v.is_empty());
    let ideal = zeno::zeno_run_with(&initial, &schedule, &run_options(cfg, keep))?;

    let mut out = if let Some(params) = pulse_params(cfg, s) {
        params.validate()?;
        let joint = joint_zeno_run(&initial, beta, &params, steps)?;
        let field = joint.state.conditioned()?;
        let mut o = Outcome::new(field.clone(), None);
        o.steps_run = steps;
        o.fidelity = Some(fock::fidelity_pure(&ideal.final_state, &field)?);
        o.fidelity_reference = Some("same run with ideal kicks".into());
        let p_h = joint.h_probability.last().copied().unwrap_or(1.0);
        o.atom_leak = Some(1.0 - p_h);
        o.metrics.insert("selectivity_ratio".into(), params.selectivity_ratio());
        o.metrics.insert("pulse_duration_s".into(), params.duration());
        o.warnings.extend(params.selectivity_warning());
        let mut csv = String::from("step,h_probability\n");
        for (k, p) in joint.h_probability.iter().enumerate() {
            csv.push_str(&format!("{},{}\n", k + 1, fmt17(*p)));
        }
        o.extra_csv.push(("joint_trace.csv".into(), csv));
        if keep {
            o.warnings.push("snapshots are written for the final state only with dressed kicks".into());
        }
        o
    } else {
        let mut o = Outcome::new(ideal.final_state.clone(), Some(ideal.clone()));
        if let Some(t) = &cfg.target {
            o.fidelity = Some(fock::fidelity_pure(&build_state(t, dim)?, &ideal.final_state)?);
            o.fidelity_reference = Some(describe(t));
        }
        o
    };
    if let Snapshot::Pure(state) = &out.state {
        let state = state.clone();
        field_metrics(&state, Some(s), &mut out.metrics);
    }
    if protocol == Protocol::ZenoUpper && initial_cfg.kind == Some(StateKind::Coherent) {
        let free = cx(initial_cfg.alpha.unwrap_or_default()) + beta * steps as f64;
        out.metrics.insert("kick_free_amplitude_re".into(), free.re);
        out.metrics.insert("kick_free_amplitude_im".into(), free.im);
    }
    if protocol == Protocol::Fig3Revival {
        let window = CONTRAST_WINDOW / cfg.record_every.unwrap_or(1).max(1);
        let contrast = energy_contrast(&ideal.energies(), window);
        if let Some(&c0) = contrast.first() {
            let every = cfg.record_every.unwrap_or(1) as f64;
            out.metrics.insert("contrast_window_steps".into(), CONTRAST_WINDOW as f64);
            out.metrics.insert("initial_contrast".into(), c0);
            if let Some(k) = contrast.iter().position(|&x| x < 0.2 * c0) {
                out.metrics.insert("collapse_step".into(), k as f64 * every);
                if let Some(j) = contrast[k..].iter().position(|&x| x > 0.5 * c0) {
                    out.metrics.insert("revival_step".into(), (k + j) as f64 * every);
                }
            }
        }
    }
    Ok(out)
}

fn stretch(cfg: &RunConfig, dim: usize) -> Result<Outcome> {
    let st = cfg.stretch.as_ref().expect("validated");
    let (gamma, alpha) = (cx(st.gamma.expect("validated")), cx(st.alpha.expect("validated")));
    let beta = cx(cfg.beta.expect("validated"));
    let steps = cfg.steps.expect("validated");
    let one = C64::new(1.0, 0.0);
    let initial = fock::superposition(&[(one, gamma), (one, alpha)], dim)?;
    let schedule = protocols::stretch_schedule(gamma, alpha, beta, steps)?;
    let keep = cfg.snapshots.as_ref().is_some_and(|v| !v.is_empty());
    let trace = zeno::zeno_run_with(&initial, &schedule, &run_options(cfg, keep))?;
    let target = protocols::stretch_target(gamma, alpha, beta, steps, dim)?;
    let fidelity = fock::fidelity_pure(&target, &trace.final_state)?;
    let mut o = Outcome::new(trace.final_state.clone(), Some(trace));
    o.fidelity = Some(fidelity);
    o.fidelity_reference = Some(format!("held {gamma} with moved {}", alpha + beta * steps as f64));
    Ok(o)
}

fn trajectory(t: &crate::config::TrajectoryConfig, cap: f64) -> Result<TweezerTrajectory> {
    let (from, to) = (cx(t.from), cx(t.to));
    Ok(match t.shape.unwrap_or(PathShape::Linear) {
        PathShape::Linear => protocols::linear_trajectory_with_cap(from, to, t.steps, cap)?,
        PathShape::Spiral => protocols::spiral_trajectory(from, to, t.steps, cap)?,
    })
}

fn tweezer_move(cfg: &RunConfig, dim: usize) -> Result<Outcome> {
    let tw = cfg.tweezer.as_ref().expect("validated");
    let initial = build_state(cfg.initial.as_ref().expect("validated"), dim)?;
    let cap = tw.adiabatic_cap.unwrap_or(protocols::DEFAULT_ADIABATIC_CAP);
    let trajectories = tw
        .trajectories
        .as_deref()
        .expect("validated")
        .iter()
        .map(|t| trajectory(t, cap))
        .collect::<Result<Vec<_>>>()?;
    let keep = cfg.snapshots.as_ref().is_some_and(|v| !v.is_empty());
    let opts = TweezerOptions {
        interleave: match tw.interleave.unwrap_or(InterleaveKind::RoundRobin) {
            InterleaveKind::RoundRobin => Interleave::RoundRobin,
            InterleaveKind::Sequential => Interleave::Sequential,
        },
        beta_free: cx(tw.beta_free.unwrap_or_default()),
        untouched: tw.untouched.as_deref().unwrap_or_default().iter().map(|&z| cx(z)).collect(),
        run: run_options(cfg, keep),
        ..TweezerOptions::default()
    };
    let (state, trace) = protocols::tweezer_run_with(&initial, &trajectories, &opts)?;
    let mut o = Outcome::new(state.clone(), Some(trace));
    if let Some(t) = &tw.target {
        o.fidelity = Some(fock::fidelity_pure(&build_state(t, dim)?, &state)?);
        o.fidelity_reference = Some(describe(t));
    }
    field_metrics(&state, None, &mut o.metrics);
    Ok(o)
}

fn crush(cfg: &RunConfig, dim: usize) -> Result<Outcome> {
    let c = cfg.crush.as_ref().expect("validated");
    let initial = match &cfg.initial {
        Some(st) => build_state(st, dim)?,
        None => fock::vacuum(dim)?,
    };
    let keep = cfg.snapshots.as_ref().is_some_and(|v| !v.is_empty());
    let mut spec = CrushSpec::converging(
        initial,
        cx(c.center.unwrap_or_default()),
        cx(c.direction.unwrap_or([1.0, 0.0])),
        c.half_width.expect("validated"),
        cfg.steps.expect("validated"),
        c.adiabatic_cap.unwrap_or(protocols::DEFAULT_ADIABATIC_CAP),
    )?;
    spec.run = run_options(cfg, keep);
    let r = protocols::crush_vacuum(&spec)?;
    let mut o = Outcome::new(r.state.clone(), Some(r.trace));
    o.fidelity = Some(r.fidelity_vs_cat);
    o.fidelity_reference = Some(format!("even cat with amplitude {} (same energy)", r.matched_alpha));
    o.metrics.insert("matched_alpha".into(), r.matched_alpha);
    for (key, sign) in [("overlap_plus_alpha", 1.0), ("overlap_minus_alpha", -1.0)] {
        let component = fock::coherent_unchecked(C64::new(sign * r.matched_alpha, 0.0), dim)?;
        o.metrics.insert(key.into(), fock::fidelity_pure(&component, &r.state)?);
    }
    field_metrics(&r.state, None, &mut o.metrics);
    Ok(o)
}

fn four_cat(cfg: &RunConfig, dim: usize) -> Result<Outcome> {
    let f = cfg.factory.clone().unwrap_or_default();
    let defaults = FactoryPlan::default();
    let plan = FactoryPlan {
        dim,
        half_width: f.half_width.unwrap_or(defaults.half_width),
        steps: cfg.steps.expect("validated"),
        adiabatic_cap: f.adiabatic_cap.unwrap_or(defaults.adiabatic_cap),
    };
    let r = protocols::multi_cat_factory(f.components.unwrap_or(4), &plan)?;
    let mut o = Outcome::new(r.state.clone(), None);
    o.steps_run = r.crushes * plan.steps;
    o.metrics.insert("crushes".into(), r.crushes as f64);
    for (i, &center) in r.centers.iter().enumerate() {
        let overlap = fock::fidelity_pure(&fock::coherent_unchecked(center, dim)?, &r.state)?;
        o.metrics.insert(format!("component_{i}_weight"), overlap);
    }
    let half = r.centers.iter().map(|z| z.norm()).fold(0.0, f64::max) + 2.5;
    let grid = phasespace::wigner_grid(&r.state, Bounds::square(half), DEFAULT_GRID_POINTS, DEFAULT_GRID_POINTS)?;
    let lobes = phasespace::count_lobes(&grid, f.lobe_fraction.unwrap_or(DEFAULT_LOBE_FRACTION));
    o.metrics.insert("lobes".into(), lobes.len() as f64);
    field_metrics(&r.state, None, &mut o.metrics);
    Ok(o)
}

fn realistic(cfg: &RunConfig, dim: usize, target: &RunTarget) -> Result<Outcome> {
    let r = cfg.realistic.as_ref().expect("validated");
    let defaults = RealisticStretch::default();
    let stretch = RealisticStretch {
        dim,
        s: cfg.s.unwrap_or(defaults.s),
        alpha_from: r.alpha_from.unwrap_or(defaults.alpha_from),
        alpha_to: r.alpha_to.unwrap_or(defaults.alpha_to),
        rounds: r.rounds.unwrap_or(defaults.rounds),
        omega: r.omega_hz.map_or(defaults.omega, |hz| 2.0 * PI * hz),
        t_c: r.t_c.unwrap_or(defaults.t_c),
    };
    let rabi: Vec<f64> = r.rabi_drive_hz.as_ref().expect("validated").expand().iter().map(|hz| 2.0 * PI * hz).collect();
    let thetas = r.theta.as_ref().expect("validated").expand();
    let window = r.window_ms.map_or((0.0, f64::INFINITY), |[a, b]| (a * 1e-3, b * 1e-3));
    if !target.quiet {
        eprintln!("scoring {} x {} pulse settings", rabi.len(), thetas.len());
    }
    let scores = stretch.grid_search(&rabi, &thetas, window, r.damped_top.unwrap_or(3).max(1))?;
    let best = scores.first().ok_or_else(|| {
        CliError::Config(vec!["no (rabi_drive_hz, theta) point has a total duration inside window_ms".into()])
    })?;
    let params = stretch.pulse(best.rabi_drive, best.theta);
    let run = stretch.run(&params, &LindbladParams::new(stretch.t_c))?;
    let target_state = stretch.target()?;

    let mut grid_csv = String::from("rabi_drive_hz,theta,duration_s,fidelity_undamped,fidelity_damped\n");
    for sc in &scores {
        grid_csv.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt17(sc.rabi_drive / (2.0 * PI)),
            fmt17(sc.theta),
            fmt17(sc.duration),
            fmt17(sc.fidelity_undamped),
            fmt17(sc.fidelity_damped)
        ));
    }
    let mut master_csv = Vec::new();
    run.write_csv(&mut master_csv).map_err(io_err(Path::new("master.csv")))?;

    let populations = run.rho.populations();
    let mut o = Outcome::new(stretch.initial()?, None);
    o.truncation = TruncationSummary::from_populations(&populations);
    o.steps_run = 2 * stretch.rounds;
    o.fidelity = Some(run.joint_fidelity(&target_state)?);
    o.fidelity_reference = Some(format!("atom in h with even cat of amplitude {}", stretch.alpha_to));
    o.atom_leak = Some(1.0 - run.survival);
    o.metrics.insert("fidelity_undamped".into(), best.fidelity_undamped);
    o.metrics.insert("rabi_drive_hz".into(), best.rabi_drive / (2.0 * PI));
    o.metrics.insert("theta".into(), best.theta);
    o.metrics.insert("duration_s".into(), run.duration);
    o.metrics.insert("purity".into(), run.rho.purity());
    o.metrics.insert("grid_points".into(), scores.len() as f64);
    o.warnings.extend(params.selectivity_warning());
    o.extra_csv.push(("grid.csv".into(), grid_csv));
    o.extra_csv.push(("master.csv".into(), String::from_utf8_lossy(&master_csv).into_owned()));
    o.state = Snapshot::Mixed(run.rho);
    Ok(o)
}

fn write_file(dir: &Path, name: &str, body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<String> {
    let path = dir.join(name);
    let file = File::create(&path).map_err(io_err(&path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(&path))?;
    Ok(name.to_string())
}

fn write_wigner<S: PhaseSpaceState>(dir: &Path, label: &str, state: &S, cfg: &RunConfig, dim: usize) -> Result<Vec<String>> {
    let w = cfg.wigner.clone().unwrap_or_default();
    let half = w.half_width.unwrap_or_else(|| (dim as f64).sqrt().max(3.0));
    let n = w.points.unwrap_or(DEFAULT_GRID_POINTS);
    let grid = phasespace::wigner_grid(state, Bounds::square(half), n, n)?;
    let csv = write_file(dir, &format!("wigner_{label}.csv"), |f| grid.write_csv(f))?;
    let pgm = write_file(dir, &format!("wigner_{label}.pgm"), |f| grid.write_pgm(f))?;
    Ok(vec![csv, pgm])
}

fn write_artifacts(dir: &Path, cfg: &RunConfig, dim: usize, o: &Outcome) -> Result<Vec<String>> {
    std::fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();
    if let Some(trace) = &o.trace {
        files.push(write_file(dir, "trace.csv", |f| trace.write_csv(f))?);
    }
    for (name, body) in &o.extra_csv {
        files.push(write_file(dir, name, |f| f.write_all(body.as_bytes()))?);
    }
    let snapshot_steps = cfg.snapshots.clone().unwrap_or_default();
    let recorded: Vec<(usize, &FieldState)> = match &o.trace {
        Some(trace) if !snapshot_steps.is_empty() => snapshot_steps
            .iter()
            .filter_map(|&k| trace.record_at(k).and_then(|r| r.state.as_ref()).map(|s| (k, s)))
            .collect(),
        _ => Vec::new(),
    };
    for (k, state) in &recorded {
        files.extend(write_wigner(dir, &format!("step{k:04}"), *state, cfg, dim)?);
    }
    if recorded.is_empty() {
        match &o.state {
            Snapshot::Pure(s) => files.extend(write_wigner(dir, "final", s, cfg, dim)?),
            Snapshot::Mixed(r) => files.extend(write_wigner(dir, "final", r, cfg, dim)?),
        }
    }
    if let Snapshot::Pure(s) = &o.state {
        files.push(write_file(dir, "final_state.csv", |f| zeno::write_state(s, f))?);
    }
    Ok(files)
}

/// Validates `cfg`, runs it, and writes artifacts when `target.out` is set.
pub fn run_config(cfg: &RunConfig, target: &RunTarget) -> Result<Summary> {
    cfg.validate()?;
    let t0 = Instant::now();
    let protocol = cfg.protocol.expect("validated");
    let dim = cfg.dim.expect("validated");
    let mut outcome = match protocol {
        p if p.is_stroboscopic() => stroboscopic(cfg, dim, p)?,
        Protocol::TweezerStretch => stretch(cfg, dim)?,
        Protocol::TweezerMove => tweezer_move(cfg, dim)?,
        Protocol::Crush => crush(cfg, dim)?,
        Protocol::FourCat => four_cat(cfg, dim)?,
        Protocol::Realistic => realistic(cfg, dim, target)?,
        _ => unreachable!(),
    };
    if !outcome.truncation.ok {
        outcome.warnings.push(format!(
            "truncation check failed: top {} levels held up to {:.3e} (tolerance {:.0e})",
            outcome.truncation.guard_levels, outcome.truncation.max_top_population, outcome.truncation.tolerance
        ));
    }
    let files = match &target.out {
        Some(dir) => write_artifacts(dir, cfg, dim, &outcome)?,
        None => Vec::new(),
    };
    let mut summary = Summary {
        name: cfg.name.clone().unwrap_or_else(|| format!("{protocol:?}")),
        protocol,
        dim,
        steps_run: outcome.steps_run,
        final_energy: outcome.state.energy(),
        fidelity: outcome.fidelity,
        fidelity_reference: outcome.fidelity_reference,
        truncation: outcome.truncation,
        atom_leak: outcome.atom_leak,
        metrics: outcome.metrics,
        warnings: outcome.warnings,
        files,
        wall_time_s: 0.0,
    };
    summary.wall_time_s = t0.elapsed().as_secs_f64();
    if let Some(dir) = &target.out {
        let json = serde_json::to_string_pretty(&summary)?;
        write_file(dir, "summary.json", |f| writeln!(f, "{json}"))?;
        summary.files.push("summary.json".into());
    }
    if !target.quiet {
        for w in &summary.warnings {
            eprintln!("warning: {w}");
        }
    }
    Ok(summary)
}
