//! Ready-made configurations for the three noise regimes: space-time white
//! noise, trace-class noise and an intermediate power law.

use super::config::ExperimentConfig;

/// `(name, description, TOML text)` for every preset.
pub fn presets() -> Vec<(&'static str, &'static str, String)> {
    PRESETS.iter().map(|(n, d, t)| (*n, *d, t.trim_start().to_string())).collect()
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    PRESETS
        .iter()
        .find(|(n, _, _)| *n == name)
        .map(|(_, _, t)| ExperimentConfig::parse(t).expect("presets are valid"))
}

const PRESETS: &[(&str, &str, &str)] = &[
    (
        "white_noise_time",
        "Q = I, rho = 1.2; expected time rate 1 - rho/2 = 0.4",
        r#"
[kernel]
rho = 1.2

[domain]
initial = "zero"

[noise]
model = "identity"
truncation = 256
nu = 0.31333333333333335

[ladder]
direction = "time"
n_elem = [128]
n_steps = [32, 64, 128, 256, 512, 1024, 2048]

[estimator]
kind = "exact_cov"
"#,
    ),
    (
        "white_noise_space",
        "Q = I, rho = 1.2; expected space rate 2/rho - 1 = 0.667",
        r#"
[kernel]
rho = 1.2

[domain]
initial = "zero"

[noise]
model = "identity"
truncation = 256
nu = 0.31333333333333335

[ladder]
direction = "space"
n_elem = [8, 16, 32, 64, 128]
n_steps = [2048]
space_time_integration = "exact"

[estimator]
kind = "exact_cov"
"#,
    ),
    (
        "trace_class_time",
        "Q = A^-1, rho = 1.5; expected time rate 1 up to the logarithm",
        r#"
[kernel]
rho = 1.5

[domain]
initial = "zero"

[noise]
model = "inverse_power"
alpha = 1.0
truncation = 256
nu = 0.6666666666666666

[ladder]
direction = "time"
n_elem = [128]
n_steps = [32, 64, 128, 256, 512, 1024, 2048]

[estimator]
kind = "exact_cov"
"#,
    ),
    (
        "trace_class_space",
        "Q = A^-1, rho = 1.5; expected space rate 2 up to the logarithm",
        r#"
[kernel]
rho = 1.5

[domain]
initial = "zero"

[noise]
model = "inverse_power"
alpha = 1.0
truncation = 256
nu = 0.6666666666666666

[ladder]
direction = "space"
n_elem = [4, 8, 16, 32, 64, 128]
n_steps = [2048]
space_time_integration = "exact"

[estimator]
kind = "exact_cov"
"#,
    ),
    (
        "trace_class_strong",
        "Q = A^-1, rho = 1.5; strong time error against a coupled reference with 4x smaller steps",
        r#"
[kernel]
rho = 1.5

[domain]
initial = "zero"

[noise]
model = "inverse_power"
alpha = 1.0
truncation = 64
nu = 0.6666666666666666

[ladder]
direction = "time"
n_elem = [32]
n_steps = [16, 32, 64, 128, 256]
reference_factor = 4

[estimator]
kind = "monte_carlo"
paths = 10000
seed = 20240901
"#,
    ),
    (
        "intermediate_time",
        "Q = A^-1/4, rho = 1.5; nu_max = 1/rho + alpha - 1/2, expected time rate rho nu",
        r#"
[kernel]
rho = 1.5

[domain]
initial = "zero"

[noise]
model = "inverse_power"
alpha = 0.25
truncation = 256
nu = 0.39666666666666667

[ladder]
direction = "time"
n_elem = [128]
n_steps = [32, 64, 128, 256, 512, 1024, 2048]

[estimator]
kind = "exact_cov"
"#,
    ),
    (
        "intermediate_space",
        "Q = A^-1/4, rho = 1.5; expected space rate 2 nu",
        r#"
[kernel]
rho = 1.5

[domain]
initial = "zero"

[noise]
model = "inverse_power"
alpha = 0.25
truncation = 256
nu = 0.39666666666666667

[ladder]
direction = "space"
n_elem = [8, 16, 32, 64, 128]
n_steps = [2048]
space_time_integration = "exact"

[estimator]
kind = "exact_cov"
"#,
    ),
];
