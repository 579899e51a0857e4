//! Parameter homotopy sweeps for polynomial systems.
//!
//! A system `F(z; p)` is solved once at a random complex parameter point with
//! a total-degree homotopy, then every point of a parameter mesh is reached
//! by tracking only the generic solutions along a parameter homotopy.

pub mod error;
pub mod export;
pub mod input;
pub mod linalg;
pub mod mesh;
pub mod paramhom;
pub mod poly;
pub mod scheduler;
pub mod startsys;
pub mod store;
pub mod systems;
pub mod tracker;

pub type Complex = num_complex::Complex64;

pub use error::SweepError;
pub use mesh::{generate_mesh, Axis, MeshSpec, PointList, PointSource};
pub use paramhom::{
    run_sweep, step1, step2_single, verify_step1, FaultPlan, PointResult, PointStatus, SolveSettings, Step1Result,
    SweepContext, SweepResult,
};
pub use poly::{parse_system, InstantiatedSystem, ParamSystem, ParameterPoint, VarPoint};
pub use scheduler::{run_parallel, ParallelConfig};
pub use startsys::{total_degree_start, Homotopy, StartSystem};
pub use store::{CollectedData, Step1File};
pub use tracker::{track_path, ClassifiedSolutions, PathResult, PathStatus, TrackerConfig};
