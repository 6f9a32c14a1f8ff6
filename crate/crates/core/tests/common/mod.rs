#![allow(dead_code)]

pub mod algebra;
pub mod kepler;

use cassini_core::pipeline::{self, Reduction, Run, Settings};
use cassini_core::model::BodyParams;
use cassini_core::{Exec, TruncationPolicy};

/// Relative error |got − want| / |want|.
pub fn rel(got: f64, want: f64) -> f64 {
    ((got - want) / want).abs()
}

pub fn titan_reduction(degree: u32) -> Reduction {
    let trunc = TruncationPolicy::uniform(degree, 8).unwrap();
    pipeline::reduce(&BodyParams::titan(), &trunc, Exec::default()).unwrap()
}

pub fn titan_run(order: usize, degree: u32) -> Run {
    let mut settings = Settings::for_order(order);
    settings.trunc = TruncationPolicy::uniform(degree, 8).unwrap();
    pipeline::run(&BodyParams::titan(), &settings).unwrap()
}
