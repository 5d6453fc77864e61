//! Shared inputs for the criterion benchmarks.

use bnbar::{simulate, GasParams, IngarchParams, ModelSpec, SimulateOptions};

pub fn bnb_ingarch() -> ModelSpec {
    ModelSpec::bnb_ingarch(10.0, 5.0, IngarchParams::from_delta(10.0, 0.5, 0.2).unwrap()).unwrap()
}

pub fn bnb_gas() -> ModelSpec {
    ModelSpec::bnb_gas(4.4, 5.0, GasParams::from_delta(8.0, 0.7, 0.2).unwrap()).unwrap()
}

pub fn series(spec: &ModelSpec, len: usize, seed: u64) -> Vec<u64> {
    simulate(spec, len, 200, seed, SimulateOptions::default()).unwrap().y
}
