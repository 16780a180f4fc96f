//! Shared helpers for the integration tests.

use otn_design::generate::{generate_instance, GeneratorSpec};
use otn_design::milp::HighsBackend;
use otn_design::pipeline::{run, RunResult};
use otn_design::{Approach, CostModel, DesignConfig, Error, Instance, Survivability};

pub fn instance(spec: &str) -> Instance {
    let spec: GeneratorSpec = spec.parse().expect("valid generator spec");
    generate_instance(&spec).expect("generator succeeds")
}

pub fn config(inst: &Instance, option: Survivability, approach: Approach, gap: f64) -> DesignConfig {
    DesignConfig::new(inst, option, approach).with_gap(gap).with_time_limit(120.0)
}

pub fn solve(inst: &Instance, cfg: &DesignConfig) -> Result<RunResult, Error> {
    run(inst, cfg, &CostModel::default().derive(), &HighsBackend::default())
}
