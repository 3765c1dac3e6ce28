//! Shared fixtures for the benchmarks.

use capshock_core::profile::solve_profile_default;
use capshock_core::{EvansSystem, GasParams, ProfileSolution};

pub fn params(v_plus: f64, d: f64) -> GasParams {
    GasParams::new(1.4, v_plus, d).expect("valid benchmark parameters")
}

pub fn profile(v_plus: f64, d: f64) -> ProfileSolution {
    solve_profile_default(&params(v_plus, d)).expect("benchmark profile")
}

pub fn system(v_plus: f64, d: f64) -> EvansSystem {
    EvansSystem::new(profile(v_plus, d))
}
