//! JSON schemas for every command output, shipped in `schemas/`.

pub const NAMES: &[&str] = &[
    "sets-greedy",
    "sets-exact",
    "sets-check",
    "fourier-energy",
    "fourier-dichotomy",
    "fourier-hyper",
    "circle-spectrum",
    "circle-weyl",
    "circle-gauss",
    "circle-minor",
    "circle-major",
    "circle-bump",
    "increment-run",
    "increment-bound",
    "lowerbound-build",
    "lowerbound-verify",
    "error",
];

pub fn get(name: &str) -> Option<&'static str> {
    Some(match name {
        "sets-greedy" => include_str!("../schemas/sets-greedy.json"),
        "sets-exact" => include_str!("../schemas/sets-exact.json"),
        "sets-check" => include_str!("../schemas/sets-check.json"),
        "fourier-energy" => include_str!("../schemas/fourier-energy.json"),
        "fourier-dichotomy" => include_str!("../schemas/fourier-dichotomy.json"),
        "fourier-hyper" => include_str!("../schemas/fourier-hyper.json"),
        "circle-spectrum" => include_str!("../schemas/circle-spectrum.json"),
        "circle-weyl" => include_str!("../schemas/circle-weyl.json"),
        "circle-gauss" => include_str!("../schemas/circle-gauss.json"),
        "circle-minor" => include_str!("../schemas/circle-minor.json"),
        "circle-major" => include_str!("../schemas/circle-major.json"),
        "circle-bump" => include_str!("../schemas/circle-bump.json"),
        "increment-run" => include_str!("../schemas/increment-run.json"),
        "increment-bound" => include_str!("../schemas/increment-bound.json"),
        "lowerbound-build" => include_str!("../schemas/lowerbound-build.json"),
        "lowerbound-verify" => include_str!("../schemas/lowerbound-verify.json"),
        "error" => include_str!("../schemas/error.json"),
        _ => return None,
    })
}

/// Schema name for a command path such as `sets greedy`.
pub fn name_of(command: &str) -> String {
    command.replace(' ', "-")
}
