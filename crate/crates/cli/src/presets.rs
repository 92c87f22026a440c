//! Built-in configurations, written in the same TOML grammar as user files.

use serde_json::Value;

use crate::config::toml_to_value;
use crate::CliError;

/// Three identical oscillators at `(δ₀, −δ₀, π)` with `δ₀ = 1.2 > π/3`,
/// which synchronize completely.
const THREE_OSC: &str = r#"
[run]
mode = "finite"

[model]
coupling = 1.0
init = "three_osc"
delta0 = 1.2

[sim]
dt = 0.01
t_max = 200.0
record_every = 10
"#;

/// Two antipodal oscillators: an incoherent equilibrium from the start.
const TWO_ANTIPODAL: &str = r#"
[run]
mode = "finite"

[model]
coupling = 1.0
init = "explicit"
phases = [0.0, 3.141592653589793]

[sim]
dt = 0.01
t_max = 10.0
"#;

/// Identical oscillators spread uniformly over an arc of half-width 0.9π.
const UNIFORM_ARC: &str = r#"
[run]
mode = "kinetic"

[model]
coupling = 1.0

[density]
kind = "uniform_arc"
center = 0.0
halfwidth = 2.827433388230814
phase_nodes = 1024

[sim]
dt = 0.01
t_max = 100.0
record_every = 100
"#;

/// Uniform frequencies on [−1, 1] under a coupling sweep across the
/// critical value `4/π`. The midpoint frequency grid recurs at
/// `t = π · freq_nodes`, far beyond `t_max` here.
const KURAMOTO_UNIFORM_G: &str = r#"
[run]
mode = "sweep"

[model]
coupling = 2.0

[frequency]
kind = "uniform"
center = 0.0
halfwidth = 1.0

[density]
kind = "product"
phase = "uniform_arc"
center = 0.0
halfwidth = 1.5707963267948966
phase_nodes = 8
freq_nodes = 512

[sim]
dt = 0.05
t_max = 300.0
record_every = 20

[sweep]
k_min = 0.5
k_max = 3.0
points = 26
target = "kinetic"
"#;

pub const NAMES: [&str; 4] = ["three-osc", "two-antipodal", "uniform-arc", "kuramoto-uniform-g"];

pub fn source(name: &str) -> Option<&'static str> {
    match name {
        "three-osc" => Some(THREE_OSC),
        "two-antipodal" => Some(TWO_ANTIPODAL),
        "uniform-arc" => Some(UNIFORM_ARC),
        "kuramoto-uniform-g" => Some(KURAMOTO_UNIFORM_G),
        _ => None,
    }
}

pub fn load(name: &str) -> Result<Value, CliError> {
    let text = source(name)
        .ok_or_else(|| CliError::Config(format!("unknown preset `{name}` (available: {})", NAMES.join(", "))))?;
    toml_to_value(text, &format!("preset {name}"))
}
