//! Run configuration schema.
//!
//! Complex numbers are written as two-element arrays `[re, im]`. Frequencies
//! are ordinary frequencies in Hz (the code multiplies by 2π), times are in
//! seconds unless the key says otherwise.

use std::path::{Path, PathBuf};

use qzd_core::fock;
use qzd_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, Result};

pub type Complex = [f64; 2];

pub fn cx(z: Complex) -> C64 {
    C64::new(z[0], z[1])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Stroboscopic kicks at the origin, starting inside the exclusion circle.
    ZenoConfine,
    /// Same dynamics, starting outside the exclusion circle.
    ZenoUpper,
    /// Same dynamics, starting on a path that grazes the exclusion circle.
    Tangential,
    /// Long stroboscopic run with collapse/revival analysis of the energy.
    Fig3Revival,
    /// Hold one component of a two-component state while the free drive
    /// carries the other away.
    TweezerStretch,
    /// Drag components along tweezer trajectories.
    TweezerMove,
    /// Split the vacuum between two converging exclusion circles.
    Crush,
    /// Repeated crushes building a four-component cat.
    FourCat,
    /// Dressed-atom tweezer stretch with cavity damping.
    Realistic,
}

impl Protocol {
    pub fn is_stroboscopic(self) -> bool {
        matches!(
            self,
            Protocol::ZenoConfine | Protocol::ZenoUpper | Protocol::Tangential | Protocol::Fig3Revival
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Vacuum,
    Fock,
    Coherent,
    /// Normalized (|α⟩ + phase·|−α⟩).
    Cat,
    /// Normalized sum of coherent components with unit weights.
    Superposition,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub kind: Option<StateKind>,
    pub n: Option<usize>,
    pub alpha: Option<Complex>,
    pub phase: Option<Complex>,
    pub components: Option<Vec<Complex>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KickKind {
    Ideal,
    /// Finite-angle pulse on a three-level atom; the atom-field state is kept
    /// coherent across the run and the field is conditioned on the atom at the end.
    Dressed,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KickConfig {
    pub model: Option<KickKind>,
    pub theta: Option<f64>,
    /// Ω_R/2π in Hz. Exclusive with `selectivity`.
    pub rabi_drive_hz: Option<f64>,
    /// Ω_R as a multiple of Ω(√(s+1) − √s). Exclusive with `rabi_drive_hz`.
    pub selectivity: Option<f64>,
    /// Ω/2π in Hz; 50 kHz when absent.
    pub omega_hz: Option<f64>,
    pub include_minus_branch: Option<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathShape {
    Linear,
    Spiral,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoryConfig {
    pub from: Complex,
    pub to: Complex,
    pub steps: usize,
    pub shape: Option<PathShape>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterleaveKind {
    RoundRobin,
    Sequential,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TweezerConfig {
    pub trajectories: Option<Vec<TrajectoryConfig>>,
    pub interleave: Option<InterleaveKind>,
    pub adiabatic_cap: Option<f64>,
    pub beta_free: Option<Complex>,
    pub untouched: Option<Vec<Complex>>,
    pub target: Option<StateConfig>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StretchConfig {
    /// Center of the held component and of its exclusion circle.
    pub gamma: Option<Complex>,
    /// Initial center of the moving component.
    pub alpha: Option<Complex>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrushConfig {
    pub center: Option<Complex>,
    pub direction: Option<Complex>,
    pub half_width: Option<f64>,
    pub adiabatic_cap: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactoryConfig {
    pub components: Option<usize>,
    pub half_width: Option<f64>,
    pub adiabatic_cap: Option<f64>,
    /// Minimum lobe height, as a fraction of the highest, for lobe counting.
    pub lobe_fraction: Option<f64>,
}

/// Either an explicit list or `count` evenly spaced values from `start` to
/// `stop` inclusive.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Values {
    List(Vec<f64>),
    Linspace { start: f64, stop: f64, count: usize },
}

impl Values {
    pub fn expand(&self) -> Vec<f64> {
        match self {
            Values::List(v) => v.clone(),
            Values::Linspace { start, stop, count } => linspace(*start, *stop, *count),
        }
    }
}

pub fn linspace(start: f64, stop: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count)
            .map(|k| start + (stop - start) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealisticConfig {
    pub omega_hz: Option<f64>,
    pub t_c: Option<f64>,
    pub rounds: Option<usize>,
    pub alpha_from: Option<f64>,
    pub alpha_to: Option<f64>,
    /// Candidate Ω_R/2π values in Hz.
    pub rabi_drive_hz: Option<Values>,
    pub theta: Option<Values>,
    /// Admissible total duration in milliseconds.
    pub window_ms: Option<[f64; 2]>,
    /// Number of best undamped points re-scored with damping.
    pub damped_top: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WignerConfig {
    pub half_width: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: Option<Protocol>,
    pub name: Option<String>,
    pub dim: Option<usize>,
    pub steps: Option<usize>,
    pub s: Option<usize>,
    pub beta: Option<Complex>,
    pub initial: Option<StateConfig>,
    /// Fidelity reference for stroboscopic runs.
    pub target: Option<StateConfig>,
    pub record_every: Option<usize>,
    /// Steps at which Wigner snapshots are written; the final state when absent.
    pub snapshots: Option<Vec<usize>>,
    pub abort_on_leak: Option<bool>,
    pub out: Option<PathBuf>,
    pub kick: Option<KickConfig>,
    pub tweezer: Option<TweezerConfig>,
    pub stretch: Option<StretchConfig>,
    pub crush: Option<CrushConfig>,
    pub factory: Option<FactoryConfig>,
    pub realistic: Option<RealisticConfig>,
    pub wigner: Option<WignerConfig>,
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Parse {
            path: origin.to_string(),
            message: e.to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(io_err(path))?;
        Self::from_toml_str(&text, &path.display().to_string())
    }

    /// Checks every field the protocol needs and reports all problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        let Some(protocol) = self.protocol else {
            errs.push("missing key 'protocol'".to_string());
            if self.dim.is_none() {
                errs.push("missing key 'dim'".to_string());
            }
            return Err(CliError::Config(errs));
        };
        let dim = match self.dim {
            Some(d) if d < 2 => {
                errs.push(format!("dim must be at least 2, got {d}"));
                None
            }
            Some(d) => Some(d),
            None => {
                errs.push("missing key 'dim'".to_string());
                None
            }
        };
        match (self.record_every, &self.snapshots) {
            (Some(0), _) => errs.push("record_every must be positive".into()),
            (Some(every), Some(snaps)) => {
                if let Some(bad) = snaps.iter().find(|&&k| k % every != 0) {
                    errs.push(format!("snapshot step {bad} is not a multiple of record_every = {every}"));
                }
            }
            _ => {}
        }
        if let Some(w) = &self.wigner {
            if matches!(w.half_width, Some(h) if !(h > 0.0 && h.is_finite())) {
                errs.push("wigner.half_width must be positive".into());
            }
            if matches!(w.points, Some(p) if p < 2) {
                errs.push("wigner.points must be at least 2".into());
            }
        }
        match protocol {
            p if p.is_stroboscopic() => self.check_stroboscopic(dim, &mut errs),
            Protocol::TweezerStretch => self.check_stretch(dim, &mut errs),
            Protocol::TweezerMove => self.check_move(dim, &mut errs),
            Protocol::Crush => self.check_crush(&mut errs),
            Protocol::FourCat => self.check_factory(&mut errs),
            Protocol::Realistic => self.check_realistic(&mut errs),
            _ => unreachable!(),
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(errs))
        }
    }

    fn check_stroboscopic(&self, dim: Option<usize>, errs: &mut Vec<String>) {
        require(&self.steps, "steps", errs);
        require(&self.beta, "beta", errs);
        match self.s {
            None => errs.push("missing key 's'".into()),
            Some(s) => {
                if let Some(d) = dim {
                    if s + fock::GUARD_LEVELS >= d {
                        errs.push(format!("s = {s} leaves no guard levels in dim {d}"));
                    }
                }
            }
        }
        match &self.initial {
            None => errs.push("missing table 'initial'".into()),
            Some(st) => check_state(st, "initial", dim, errs),
        }
        if let Some(t) = &self.target {
            check_state(t, "target", dim, errs);
        }
        if let Some(k) = &self.kick {
            check_kick(k, errs);
        }
        if let (Some(snaps), Some(steps)) = (&self.snapshots, self.steps) {
            if let Some(bad) = snaps.iter().find(|&&k| k > steps) {
                errs.push(format!("snapshot step {bad} exceeds steps = {steps}"));
            }
        }
    }

    fn check_stretch(&self, dim: Option<usize>, errs: &mut Vec<String>) {
        require(&self.steps, "steps", errs);
        require(&self.beta, "beta", errs);
        match &self.stretch {
            None => errs.push("missing table 'stretch'".into()),
            Some(st) => {
                require(&st.gamma, "stretch.gamma", errs);
                require(&st.alpha, "stretch.alpha", errs);
                if let (Some(g), Some(a), Some(b), Some(n), Some(d)) = (st.gamma, st.alpha, self.beta, self.steps, dim) {
                    let end = cx(a) + cx(b) * n as f64;
                    let reach = cx(g).norm().max(cx(a).norm()).max(end.norm());
                    check_dim(reach, d, "stretch", errs);
                }
            }
        }
    }

    fn check_move(&self, dim: Option<usize>, errs: &mut Vec<String>) {
        match &self.initial {
            None => errs.push("missing table 'initial'".into()),
            Some(st) => check_state(st, "initial", dim, errs),
        }
        let Some(tw) = &self.tweezer else {
            errs.push("missing table 'tweezer'".into());
            return;
        };
        match &tw.trajectories {
            None => errs.push("missing key 'tweezer.trajectories'".into()),
            Some(ts) if ts.is_empty() => errs.push("tweezer.trajectories is empty".into()),
            Some(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if t.steps == 0 {
                        errs.push(format!("tweezer.trajectories[{i}].steps must be positive"));
                    }
                    if let Some(d) = dim {
                        check_dim(cx(t.from).norm().max(cx(t.to).norm()), d, "tweezer trajectory", errs);
                    }
                }
            }
        }
        if matches!(tw.adiabatic_cap, Some(c) if !(c > 0.0)) {
            errs.push("tweezer.adiabatic_cap must be positive".into());
        }
        if let Some(t) = &tw.target {
            check_state(t, "tweezer.target", dim, errs);
        }
    }

    fn check_crush(&self, errs: &mut Vec<String>) {
        require(&self.steps, "steps", errs);
        if self.steps == Some(0) {
            errs.push("steps must be positive".into());
        }
        match &self.crush {
            None => errs.push("missing table 'crush'".into()),
            Some(c) => {
                require(&c.half_width, "crush.half_width", errs);
                if matches!(c.direction, Some(d) if d == [0.0, 0.0]) {
                    errs.push("crush.direction must be nonzero".into());
                }
            }
        }
    }

    fn check_factory(&self, errs: &mut Vec<String>) {
        require(&self.steps, "steps", errs);
        if let Some(f) = &self.factory {
            if let Some(n) = f.components {
                if !n.is_power_of_two() || n > 4 {
                    errs.push(format!("factory.components must be 1, 2 or 4, got {n}"));
                }
            }
        }
    }

    fn check_realistic(&self, errs: &mut Vec<String>) {
        let Some(r) = &self.realistic else {
            errs.push("missing table 'realistic'".into());
            return;
        };
        require(&r.rabi_drive_hz, "realistic.rabi_drive_hz", errs);
        require(&r.theta, "realistic.theta", errs);
        if let Some(v) = &r.rabi_drive_hz {
            if v.expand().iter().any(|x| !(*x > 0.0 && x.is_finite())) {
                errs.push("realistic.rabi_drive_hz values must be positive".into());
            }
        }
        if matches!(r.t_c, Some(t) if !(t > 0.0)) {
            errs.push("realistic.t_c must be positive".into());
        }
        if let Some([a, b]) = r.window_ms {
            if !(a <= b) {
                errs.push("realistic.window_ms must be increasing".into());
            }
        }
    }
}

fn require<T>(v: &Option<T>, key: &str, errs: &mut Vec<String>) {
    if v.is_none() {
        errs.push(format!("missing key '{key}'"));
    }
}

fn check_dim(amplitude: f64, dim: usize, what: &str, errs: &mut Vec<String>) {
    let need = fock::required_dim(amplitude);
    if need > dim {
        errs.push(format!("{what} reaches amplitude {amplitude:.3}, which needs dim >= {need} (have {dim})"));
    }
}

fn check_state(st: &StateConfig, key: &str, dim: Option<usize>, errs: &mut Vec<String>) {
    let Some(kind) = st.kind else {
        errs.push(format!("missing key '{key}.kind'"));
        return;
    };
    let amplitude = match kind {
        StateKind::Vacuum => 0.0,
        StateKind::Fock => match st.n {
            None => {
                errs.push(format!("missing key '{key}.n'"));
                return;
            }
            Some(n) => {
                if let Some(d) = dim {
                    if n >= d {
                        errs.push(format!("{key}.n = {n} is outside dim {d}"));
                    }
                }
                return;
            }
        },
        StateKind::Coherent | StateKind::Cat => match st.alpha {
            None => {
                errs.push(format!("missing key '{key}.alpha'"));
                return;
            }
            Some(a) => cx(a).norm(),
        },
        StateKind::Superposition => match &st.components {
            None => {
                errs.push(format!("missing key '{key}.components'"));
                return;
            }
            Some(cs) if cs.is_empty() => {
                errs.push(format!("{key}.components is empty"));
                return;
            }
            Some(cs) => cs.iter().map(|&z| cx(z).norm()).fold(0.0, f64::max),
        },
    };
    if let Some(d) = dim {
        check_dim(amplitude, d, key, errs);
    }
}

fn check_kick(k: &KickConfig, errs: &mut Vec<String>) {
    if k.model != Some(KickKind::Dressed) {
        return;
    }
    if k.theta.is_none() {
        errs.push("missing key 'kick.theta'".into());
    }
    match (k.rabi_drive_hz, k.selectivity) {
        (None, None) => errs.push("dressed kicks need 'kick.rabi_drive_hz' or 'kick.selectivity'".into()),
        (Some(_), Some(_)) => errs.push("'kick.rabi_drive_hz' and 'kick.selectivity' are exclusive".into()),
        _ => {}
    }
}
