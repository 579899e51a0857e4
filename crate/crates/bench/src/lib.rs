//! Fixtures shared by the benchmarks.

use homsweep::paramhom::Step2Source;
use homsweep::systems::{CUBE_SYSTEM, MONKS_SYSTEM};
use homsweep::{generate_mesh, parse_system, step1, Axis, MeshSpec, ParamSystem, ParameterPoint, SolveSettings, Step1Result};

pub struct Fixture {
    pub system: ParamSystem,
    pub settings: SolveSettings,
    pub step1: Step1Result,
}

impl Fixture {
    fn new(text: &str, seed: u64) -> Self {
        let system = parse_system(text).expect("bundled system parses");
        let settings = SolveSettings::default();
        let step1 = step1(&system, &settings, seed, None).expect("generic solve succeeds");
        Self { system, settings, step1 }
    }

    pub fn cube() -> Self {
        Self::new(CUBE_SYSTEM, 7)
    }

    pub fn monks() -> Self {
        Self::new(MONKS_SYSTEM, 10)
    }

    pub fn source(&self) -> Step2Source {
        Step2Source::from_step1(&self.system, &self.step1).expect("step1 matches system")
    }
}

pub fn point(values: &[f64]) -> ParameterPoint {
    ParameterPoint::new(values.iter().map(|&v| homsweep::Complex::new(v, 0.0)).collect()).expect("finite")
}

/// `count` points per axis over `[min, max]` for every parameter.
pub fn grid(m: usize, min: f64, max: f64, count: usize) -> Vec<ParameterPoint> {
    let spec = MeshSpec::new(vec![Axis::Range { min, max, count }; m]).expect("valid mesh");
    generate_mesh(&spec).points
}
