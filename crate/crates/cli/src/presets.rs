use crate::config::RunConfig;
use crate::error::{CliError, Result};

pub struct Preset {
    pub name: &'static str,
    pub description: &'static str,
    pub source: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "fig2a",
        description: "vacuum kicked at s = 6 with beta = 0.1: odd cat, snapshots every 5 steps",
        source: include_str!("../presets/fig2a.toml"),
    },
    Preset {
        name: "fig2a-dressed",
        description: "fig2a with finite-angle (theta = 1) dressed-atom kicks",
        source: include_str!("../presets/fig2a-dressed.toml"),
    },
    Preset {
        name: "fig2b",
        description: "coherent state at -5 bouncing off the s = 6 exclusion circle",
        source: include_str!("../presets/fig2b.toml"),
    },
    Preset {
        name: "fig2c",
        description: "coherent state grazing the exclusion circle: squeezing",
        source: include_str!("../presets/fig2c.toml"),
    },
    Preset {
        name: "fig3",
        description: "2000 kicked steps from the vacuum: collapse and revival of the energy oscillation",
        source: include_str!("../presets/fig3.toml"),
    },
    Preset {
        name: "fig4ab",
        description: "two tweezers move the +-2 cat to +-5i in 100 steps",
        source: include_str!("../presets/fig4ab.toml"),
    },
    Preset {
        name: "fig4ab-fast",
        description: "the same move in 20 steps",
        source: include_str!("../presets/fig4ab-fast.toml"),
    },
    Preset {
        name: "fig4c",
        description: "vacuum crushed between two converging exclusion circles",
        source: include_str!("../presets/fig4c.toml"),
    },
    Preset {
        name: "fig4d",
        description: "three crushes building a four-component cat",
        source: include_str!("../presets/fig4d.toml"),
    },
    Preset {
        name: "stretch",
        description: "one component held while the free drive carries the other away",
        source: include_str!("../presets/stretch.toml"),
    },
    Preset {
        name: "realistic",
        description: "dressed-atom stretch of a cat with cavity damping, pulse grid search",
        source: include_str!("../presets/realistic.toml"),
    },
    Preset {
        name: "qze",
        description: "s = 1 kicks freeze the vacuum",
        source: include_str!("../presets/qze.toml"),
    },
];

pub fn find(name: &str) -> Result<&'static Preset> {
    PRESETS
        .iter()
        .find(|p| p.name == name)
        .ok_or_else(|| CliError::UnknownPreset(name.to_string()))
}

pub fn load(name: &str) -> Result<RunConfig> {
    let p = find(name)?;
    RunConfig::from_toml_str(p.source, &format!("preset {name}"))
}

pub fn source_value(name: &str) -> Result<toml::Value> {
    let p = find(name)?;
    toml::from_str(p.source).map_err(|e| CliError::Parse {
        path: format!("preset {name}"),
        message: e.to_string(),
    })
}
