//! Generic solve, per-point parameter homotopies and the retry loop.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SweepError;
use crate::poly::{InstantiatedSystem, ParamSystem, ParameterPoint, VarPoint};
use crate::scheduler::TimingRecord;
use crate::startsys::{random_gamma, total_degree_start, Homotopy};
use crate::tracker::{
    classify_endpoints, crossing_check, track_path, ClassifiedSolutions, PathResult, PathStatus, TrackerConfig,
};
use crate::Complex;

/// Random streams derived from the master seed.
pub const STEP1_STREAM: u64 = 1;
pub const VERIFY_STREAM: u64 = 2;
pub const MITIGATION_STREAM: u64 = 3;

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Real and imaginary parts uniform on `[0, 1]`.
pub fn random_parameter_point<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ParameterPoint {
    let values = (0..m)
        .map(|_| {
            let re = rng.gen_range(0.0..=1.0);
            let im = rng.gen_range(0.0..=1.0);
            Complex::new(re, im)
        })
        .collect();
    ParameterPoint::new(values).expect("finite draws")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveSettings {
    pub tracker: TrackerConfig,
    pub dedup_tol: f64,
    pub real_tol: f64,
    /// Paths closer than this at the boundary `t` are treated as having jumped.
    pub crossing_tol: f64,
    /// Count diverged paths as retryable failures.
    pub divergence_is_failure: bool,
}

impl Default for SolveSettings {
    fn default() -> Self {
        Self {
            tracker: TrackerConfig::default(),
            dedup_tol: 1e-6,
            real_tol: 1e-8,
            crossing_tol: 1e-8,
            divergence_is_failure: false,
        }
    }
}

impl SolveSettings {
    pub fn validate(&self) -> Result<(), SweepError> {
        self.tracker.validate()?;
        if !(self.dedup_tol > 0.0 && self.real_tol > 0.0 && self.crossing_tol >= 0.0) {
            return Err(SweepError::Invalid("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step1Result {
    pub p0: ParameterPoint,
    pub gamma: Complex,
    /// Nonsingular finite solutions at `p0`.
    pub solutions: ClassifiedSolutions,
    /// Total-degree path count.
    pub paths_tracked_step1: usize,
    pub seed: u64,
    pub path_failures: usize,
    pub diverged: usize,
    /// Distinct singular endpoints that were dropped.
    pub singular_dropped: usize,
    /// Pairs of paths that coincided at the boundary `t`.
    pub crossings: Vec<(usize, usize)>,
}

pub(crate) fn count_outcomes(results: &[PathResult]) -> (usize, usize, BTreeMap<PathStatus, usize>) {
    let mut kinds = BTreeMap::new();
    for r in results {
        if r.status != PathStatus::Success {
            *kinds.entry(r.status).or_insert(0) += 1;
        }
    }
    let failures = results.iter().filter(|r| r.status.is_failure()).count();
    let diverged = results.iter().filter(|r| r.status == PathStatus::Diverged).count();
    (failures, diverged, kinds)
}

fn boundary_crossings(results: &[PathResult], tol: f64) -> Vec<(usize, usize)> {
    let (idx, pts): (Vec<usize>, Vec<VarPoint>) = results
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.boundary_point.clone().map(|b| (i, b)))
        .unzip();
    crossing_check(&pts, tol).into_iter().map(|(a, b)| (idx[a], idx[b])).collect()
}

/// Total-degree solve at `p0` (random unless overridden).
pub fn step1(
    sys: &ParamSystem,
    settings: &SolveSettings,
    seed: u64,
    p0_override: Option<ParameterPoint>,
) -> Result<Step1Result, SweepError> {
    step1_with_rng(sys, settings, seed, &mut stream_rng(seed, STEP1_STREAM), p0_override)
}

pub fn step1_with_rng<R: Rng + ?Sized>(
    sys: &ParamSystem,
    settings: &SolveSettings,
    seed: u64,
    rng: &mut R,
    p0_override: Option<ParameterPoint>,
) -> Result<Step1Result, SweepError> {
    settings.validate()?;
    let gamma = random_gamma(rng);
    let drawn = random_parameter_point(sys.num_params(), rng);
    let p0 = p0_override.unwrap_or(drawn);
    let target = sys.instantiate(&p0)?;
    let start = total_degree_start(&sys.variable_degrees())?;
    let h = Homotopy::total_degree(target.clone(), start.clone(), gamma)?;
    let results: Vec<PathResult> = start.solutions().map(|s| track_path(&h, &s, &settings.tracker)).collect();
    let (path_failures, diverged, _) = count_outcomes(&results);
    let all = classify_endpoints(&results, &target, settings.dedup_tol, settings.real_tol);
    let solutions = all.nonsingular();
    if solutions.is_empty() {
        return Err(SweepError::Step1Empty);
    }
    Ok(Step1Result {
        p0,
        gamma,
        singular_dropped: all.len() - solutions.len(),
        solutions,
        paths_tracked_step1: start.num_solutions(),
        seed,
        path_failures,
        diverged,
        crossings: boundary_crossings(&results, settings.crossing_tol),
    })
}

/// Whether two generic solves agree on the solution count.
pub fn counts_agree(a: &Step1Result, b: &Step1Result) -> bool {
    a.solutions.len() == b.solutions.len()
}

/// Repeats Step 1 at a fresh `p0` and `gamma` and compares counts.
pub fn verify_step1(sys: &ParamSystem, settings: &SolveSettings, r1: &Step1Result) -> Result<bool, SweepError> {
    let mut rng = stream_rng(r1.seed, VERIFY_STREAM);
    match step1_with_rng(sys, settings, r1.seed, &mut rng, None) {
        Ok(again) => Ok(counts_agree(r1, &again)),
        Err(SweepError::Step1Empty) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Known solutions at one parameter point, ready to start parameter homotopies.
#[derive(Clone, Debug)]
pub struct Step2Source {
    pub point: ParameterPoint,
    pub system: InstantiatedSystem,
    pub solutions: Vec<VarPoint>,
}

impl Step2Source {
    pub fn new(sys: &ParamSystem, point: ParameterPoint, solutions: Vec<VarPoint>) -> Result<Self, SweepError> {
        Ok(Self {
            system: sys.instantiate(&point)?,
            point,
            solutions,
        })
    }

    pub fn from_step1(sys: &ParamSystem, r1: &Step1Result) -> Result<Self, SweepError> {
        Self::new(sys, r1.p0.clone(), r1.solutions.distinct.clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Step2Outcome {
    pub solutions: ClassifiedSolutions,
    /// Retryable failures: failed paths plus paths that met another at the boundary.
    pub failures: usize,
    pub diverged: usize,
    pub kinds: BTreeMap<PathStatus, usize>,
    pub crossings: usize,
    pub paths: usize,
}

/// Tracks every known solution of `source` to `target`.
pub fn step2_single(
    sys: &ParamSystem,
    source: &Step2Source,
    target: &ParameterPoint,
    settings: &SolveSettings,
) -> Result<Step2Outcome, SweepError> {
    step2_with_hook(sys, source, target, settings, false)
}

fn step2_with_hook(
    sys: &ParamSystem,
    source: &Step2Source,
    target: &ParameterPoint,
    settings: &SolveSettings,
    force_first_failure: bool,
) -> Result<Step2Outcome, SweepError> {
    let target_sys = sys.instantiate(target)?;
    let h = Homotopy::parameter(target_sys.clone(), source.system.clone())?;
    let results: Vec<PathResult> = source
        .solutions
        .iter()
        .enumerate()
        .map(|(i, s)| {
            if i == 0 && force_first_failure {
                PathResult::failed(PathStatus::MinStepFailure, 1.0)
            } else {
                track_path(&h, s, &settings.tracker)
            }
        })
        .collect();
    let (mut failures, diverged, kinds) = count_outcomes(&results);
    let jumped: BTreeSet<usize> = boundary_crossings(&results, settings.crossing_tol)
        .into_iter()
        .flat_map(|(a, b)| [a, b])
        .collect();
    failures += jumped.len();
    if settings.divergence_is_failure {
        failures += diverged;
    }
    Ok(Step2Outcome {
        solutions: classify_endpoints(&results, &target_sys, settings.dedup_tol, settings.real_tol),
        failures,
        diverged,
        kinds,
        crossings: jumped.len(),
        paths: results.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointStatus {
    /// No failures, divergences or singular endpoints on the final attempt.
    Complete,
    /// Diverged paths or singular endpoints, which retrying cannot change.
    HadFailures,
    /// Still failing after the last retry round.
    Unresolved,
}

impl PointStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Complete => "Complete",
            Self::HadFailures => "HadFailures",
            Self::Unresolved => "Unresolved",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Complete" => Some(Self::Complete),
            "HadFailures" => Some(Self::HadFailures),
            "Unresolved" => Some(Self::Unresolved),
            _ => None,
        }
    }
}

/// What happened on one attempt at a point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttemptSummary {
    pub attempt: usize,
    pub n_solutions: usize,
    pub failures: usize,
    pub diverged: usize,
    pub crossings: usize,
    pub kinds: Vec<(PathStatus, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub index: usize,
    pub p: ParameterPoint,
    pub solutions: ClassifiedSolutions,
    pub status: PointStatus,
    /// Attempt number of the reported solve; 0 for the first pass.
    pub retries_used: usize,
    /// Retryable failures on the reported attempt.
    pub path_failures: usize,
    pub diverged_paths: usize,
    /// Every attempt so far, oldest first.
    pub history: Vec<AttemptSummary>,
    pub diagnostic: Option<String>,
}

impl PointResult {
    pub fn n_singular(&self) -> usize {
        self.solutions.n_singular()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MitigationRound {
    pub round: usize,
    pub p_prime: ParameterPoint,
    /// Why the round was skipped, if it was.
    pub abandoned: Option<String>,
    pub points_retried: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub point_results: Vec<PointResult>,
    pub total_paths_tracked: usize,
    pub unresolved_indices: Vec<usize>,
    pub timings: Vec<TimingRecord>,
    pub rounds: Vec<MitigationRound>,
}

/// Test hooks for exercising the retry and crash paths.
#[derive(Debug, Default)]
pub struct FaultPlan {
    fail_attempts: BTreeMap<usize, usize>,
    panics: Mutex<BTreeMap<usize, usize>>,
}

impl FaultPlan {
    /// Forces one path failure at `index` on each of its first `attempts` attempts.
    pub fn fail_attempts(mut self, index: usize, attempts: usize) -> Self {
        self.fail_attempts.insert(index, attempts);
        self
    }

    /// Panics the first `times` times `index` is processed.
    pub fn panic_on(self, index: usize, times: usize) -> Self {
        self.panics.lock().unwrap().insert(index, times);
        self
    }

    fn forces_failure(&self, index: usize, attempt: usize) -> bool {
        self.fail_attempts.get(&index).is_some_and(|&n| attempt < n)
    }

    fn take_panic(&self, index: usize) -> bool {
        let mut map = self.panics.lock().unwrap();
        match map.get_mut(&index) {
            Some(n) if *n > 0 => {
                *n -= 1;
                true
            }
            _ => false,
        }
    }
}

/// Everything a worker needs, shared read-only.
#[derive(Debug)]
pub struct SweepContext {
    pub system: ParamSystem,
    pub settings: SolveSettings,
    pub faults: FaultPlan,
}

impl SweepContext {
    pub fn new(system: ParamSystem, settings: SolveSettings) -> Self {
        Self {
            system,
            settings,
            faults: FaultPlan::default(),
        }
    }

    pub fn with_faults(mut self, faults: FaultPlan) -> Self {
        self.faults = faults;
        self
    }
}

#[derive(Clone, Debug)]
pub struct Job {
    pub index: usize,
    pub point: ParameterPoint,
    pub attempt: usize,
    pub source: Arc<Step2Source>,
    pub history: Vec<AttemptSummary>,
}

/// Solves one job. Panics only through the fault hook or a bug.
pub fn solve_job(ctx: &SweepContext, job: &Job) -> Result<PointResult, SweepError> {
    if ctx.faults.take_panic(job.index) {
        panic!("injected crash at point {}", job.index);
    }
    let forced = ctx.faults.forces_failure(job.index, job.attempt);
    let out = step2_with_hook(&ctx.system, &job.source, &job.point, &ctx.settings, forced)?;
    let status = if out.failures > 0 {
        PointStatus::Unresolved
    } else if out.diverged > 0 || out.solutions.n_singular() > 0 {
        PointStatus::HadFailures
    } else {
        PointStatus::Complete
    };
    let mut history = job.history.clone();
    history.push(AttemptSummary {
        attempt: job.attempt,
        n_solutions: out.solutions.len(),
        failures: out.failures,
        diverged: out.diverged,
        crossings: out.crossings,
        kinds: out.kinds.into_iter().collect(),
    });
    Ok(PointResult {
        index: job.index,
        p: job.point.clone(),
        solutions: out.solutions,
        status,
        retries_used: job.attempt,
        path_failures: out.failures,
        diverged_paths: out.diverged,
        history,
        diagnostic: None,
    })
}

/// Result of running one job, or the panic message if it crashed.
#[derive(Debug)]
pub struct JobOutcome {
    pub index: usize,
    pub result: Result<PointResult, String>,
    pub timing: Option<TimingRecord>,
}

/// Runs a set of jobs, in any order, and reports every one of them.
pub trait PointExecutor {
    fn execute(&mut self, ctx: &Arc<SweepContext>, jobs: Vec<Job>, batch_size: usize) -> Result<Vec<JobOutcome>, SweepError>;
}

pub(crate) fn panic_message(payload: Box<dyn std::any::Any + Send>) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        s.to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "worker panicked".to_string()
    }
}

/// Runs a job on the current thread, converting errors and panics into
/// crash messages.
pub(crate) fn run_caught(ctx: &SweepContext, job: &Job) -> (Result<PointResult, String>, f64) {
    let start = Instant::now();
    let res = match catch_unwind(AssertUnwindSafe(|| solve_job(ctx, job))) {
        Ok(Ok(r)) => Ok(r),
        Ok(Err(e)) => Err(e.to_string()),
        Err(payload) => Err(panic_message(payload)),
    };
    (res, start.elapsed().as_secs_f64())
}

/// Runs jobs one by one on the calling thread.
#[derive(Debug, Default)]
pub struct SerialExecutor;

impl PointExecutor for SerialExecutor {
    fn execute(&mut self, ctx: &Arc<SweepContext>, jobs: Vec<Job>, _batch_size: usize) -> Result<Vec<JobOutcome>, SweepError> {
        Ok(jobs
            .iter()
            .map(|job| {
                let (result, secs) = run_caught(ctx, job);
                JobOutcome {
                    index: job.index,
                    result,
                    timing: Some(TimingRecord {
                        index: job.index,
                        attempt: job.attempt,
                        track_secs: secs,
                        serialize_secs: 0.0,
                    }),
                }
            })
            .collect())
    }
}

/// Serial sweep over `points` with up to `max_retries` retry rounds.
pub fn run_sweep<R: Rng + ?Sized>(
    sys: &ParamSystem,
    r1: &Step1Result,
    points: &[ParameterPoint],
    settings: &SolveSettings,
    max_retries: usize,
    rng: &mut R,
) -> Result<SweepResult, SweepError> {
    let ctx = Arc::new(SweepContext::new(sys.clone(), settings.clone()));
    run_sweep_with(&mut SerialExecutor, &ctx, r1, points, max_retries, 1, rng)
}

fn crash_record(job: &Job, message: String) -> PointResult {
    PointResult {
        index: job.index,
        p: job.point.clone(),
        solutions: ClassifiedSolutions::default(),
        status: PointStatus::Unresolved,
        retries_used: job.attempt,
        path_failures: job.source.solutions.len(),
        diverged_paths: 0,
        history: job.history.clone(),
        diagnostic: Some(format!("crashed twice: {message}")),
    }
}

/// Runs jobs, giving every crashed job one more try on its own.
fn execute_with_requeue<E: PointExecutor + ?Sized>(
    exec: &mut E,
    ctx: &Arc<SweepContext>,
    jobs: Vec<Job>,
    batch_size: usize,
    timings: &mut Vec<TimingRecord>,
) -> Result<Vec<PointResult>, SweepError> {
    let by_index: BTreeMap<usize, Job> = jobs.iter().map(|j| (j.index, j.clone())).collect();
    let mut done = Vec::with_capacity(jobs.len());
    let mut crashed = Vec::new();
    for o in exec.execute(ctx, jobs, batch_size)? {
        timings.extend(o.timing);
        match o.result {
            Ok(r) => done.push(r),
            Err(_) => crashed.push(by_index[&o.index].clone()),
        }
    }
    if !crashed.is_empty() {
        for o in exec.execute(ctx, crashed, 1)? {
            timings.extend(o.timing);
            match o.result {
                Ok(r) => done.push(r),
                Err(msg) => done.push(crash_record(&by_index[&o.index], msg)),
            }
        }
    }
    Ok(done)
}

fn needs_retry(r: &PointResult) -> bool {
    r.status == PointStatus::Unresolved
}

/// The full sweep: one pass from `p0`, then retry rounds from fresh random
/// start points for every point that still has failed paths.
pub fn run_sweep_with<E: PointExecutor + ?Sized, R: Rng + ?Sized>(
    exec: &mut E,
    ctx: &Arc<SweepContext>,
    r1: &Step1Result,
    points: &[ParameterPoint],
    max_retries: usize,
    batch_size: usize,
    rng: &mut R,
) -> Result<SweepResult, SweepError> {
    ctx.settings.validate()?;
    if r1.solutions.is_empty() {
        return Err(SweepError::Step1Empty);
    }
    let sys = &ctx.system;
    for p in points {
        if p.len() != sys.num_params() {
            return Err(crate::poly::DimensionError::Parameters {
                expected: sys.num_params(),
                got: p.len(),
            }
            .into());
        }
    }
    let base = Arc::new(Step2Source::from_step1(sys, r1)?);
    let n_start = base.solutions.len();
    let mut total = r1.paths_tracked_step1;
    let mut timings = Vec::new();
    let jobs: Vec<Job> = points
        .iter()
        .enumerate()
        .map(|(index, p)| Job {
            index,
            point: p.clone(),
            attempt: 0,
            source: base.clone(),
            history: Vec::new(),
        })
        .collect();
    let mut results: Vec<Option<PointResult>> = vec![None; points.len()];
    for r in execute_with_requeue(exec, ctx, jobs, batch_size, &mut timings)? {
        if r.diagnostic.is_none() {
            total += n_start;
        }
        let i = r.index;
        results[i] = Some(r);
    }

    let mut rounds = Vec::new();
    let mut k = 0;
    loop {
        let failed: Vec<usize> = (0..points.len())
            .filter(|&i| results[i].as_ref().is_some_and(needs_retry))
            .collect();
        if failed.is_empty() || k >= max_retries {
            break;
        }
        k += 1;
        let p_prime = random_parameter_point(sys.num_params(), rng);
        let out = step2_single(sys, &base, &p_prime, &ctx.settings)?;
        total += n_start;
        let abandoned = if out.failures > 0 {
            Some(format!("{} failed paths", out.failures))
        } else if out.diverged > 0 {
            Some(format!("{} diverged paths", out.diverged))
        } else if out.solutions.len() != n_start {
            Some(format!("{} solutions, expected {n_start}", out.solutions.len()))
        } else if out.solutions.n_singular() > 0 {
            Some(format!("{} singular solutions", out.solutions.n_singular()))
        } else {
            None
        };
        if abandoned.is_some() {
            rounds.push(MitigationRound {
                round: k,
                p_prime,
                abandoned,
                points_retried: 0,
            });
            continue;
        }
        let source = Arc::new(Step2Source::new(sys, p_prime.clone(), out.solutions.distinct)?);
        let jobs: Vec<Job> = failed
            .iter()
            .map(|&i| {
                let prev = results[i].as_ref().unwrap();
                Job {
                    index: i,
                    point: points[i].clone(),
                    attempt: k,
                    source: source.clone(),
                    history: prev.history.clone(),
                }
            })
            .collect();
        rounds.push(MitigationRound {
            round: k,
            p_prime,
            abandoned: None,
            points_retried: jobs.len(),
        });
        for r in execute_with_requeue(exec, ctx, jobs, batch_size, &mut timings)? {
            if r.diagnostic.is_none() {
                total += n_start;
            }
            let i = r.index;
            results[i] = Some(r);
        }
    }

    let point_results: Vec<PointResult> = results.into_iter().map(|r| r.expect("every point reported")).collect();
    let unresolved_indices = point_results
        .iter()
        .filter(|r| r.status == PointStatus::Unresolved)
        .map(|r| r.index)
        .collect();
    timings.sort_by_key(|t| (t.index, t.attempt));
    Ok(SweepResult {
        point_results,
        total_paths_tracked: total,
        unresolved_indices,
        timings,
        rounds,
    })
}

/// Paths tracked by one generic solve plus `points` parameter homotopies,
/// each following `generic_count` paths.
pub fn parameter_homotopy_path_count(total_degree: usize, generic_count: usize, points: usize) -> usize {
    total_degree + generic_count * points
}

/// Paths tracked by solving every point with its own total-degree homotopy.
pub fn repeated_total_degree_path_count(total_degree: usize, points: usize) -> usize {
    total_degree * points
}
