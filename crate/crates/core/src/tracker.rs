//! Predictor-corrector path tracking from `t = 1` to `t = 0`.
//!
//! Each step takes an Euler predictor along the tangent, then Newton
//! corrects back onto the path at the new `t`. Failed corrections halve the
//! step; runs of successes double it. Tracking stops at `t_final`, where the
//! endpoint is sharpened with Newton on the target system itself.

use serde::{Deserialize, Serialize};

use crate::linalg::{condition_inf, CMatrix, Lu};
use crate::poly::{norm_inf, InstantiatedSystem, VarPoint};
use crate::startsys::Homotopy;
use crate::Complex;

/// Endpoints whose Jacobian condition number exceeds this are singular.
pub const SINGULAR_CONDITION: f64 = 1e12;

/// Two endpoints whose sharpening did not converge are merged when their
/// distance is below this multiple of their combined last Newton steps.
/// Newton contracts by `(m-1)/m` near an `m`-fold root, so the remaining
/// error is about `m` times the last step.
pub const SINGULAR_MERGE_FACTOR: f64 = 10.0;

/// Minimum log-log slope of `||z||` against `1/t` over the final two decades
/// of `t` for an unsharpenable endpoint to count as running off to infinity.
pub const DIVERGENCE_GROWTH_EXPONENT: f64 = 0.1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrackerConfig {
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub max_norm: f64,
    pub max_steps: usize,
    pub t_final: f64,
    pub endgame_boundary: f64,
    pub sharpen_iters: usize,
    pub step_increase_factor: f64,
    pub step_decrease_factor: f64,
    pub consecutive_successes_to_grow: usize,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            initial_step: 0.1,
            min_step: 1e-12,
            max_step: 0.1,
            newton_tol: 1e-10,
            max_newton_iters: 3,
            max_norm: 1e5,
            max_steps: 10_000,
            t_final: 1e-8,
            endgame_boundary: 0.1,
            sharpen_iters: 5,
            step_increase_factor: 2.0,
            step_decrease_factor: 0.5,
            consecutive_successes_to_grow: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid tracker configuration: {0}")]
pub struct ConfigError(pub String);

impl TrackerConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |msg: &str| Err(ConfigError(msg.to_string()));
        if !(0.0 < self.min_step && self.min_step <= self.initial_step && self.initial_step <= self.max_step && self.max_step < 1.0) {
            return bad("need 0 < min_step <= initial_step <= max_step < 1");
        }
        if !(self.newton_tol > 0.0) {
            return bad("newton_tol must be positive");
        }
        if !(self.max_norm > 0.0) {
            return bad("max_norm must be positive");
        }
        if !(0.0 < self.t_final && self.t_final < self.endgame_boundary && self.endgame_boundary < 1.0) {
            return bad("need 0 < t_final < endgame_boundary < 1");
        }
        if self.max_newton_iters == 0 || self.max_steps == 0 || self.consecutive_successes_to_grow == 0 {
            return bad("iteration limits must be at least 1");
        }
        if !(self.step_increase_factor >= 1.0) || !(0.0 < self.step_decrease_factor && self.step_decrease_factor < 1.0) {
            return bad("need step_increase_factor >= 1 and 0 < step_decrease_factor < 1");
        }
        Ok(())
    }
}

/// Anything Newton's method can be run on.
pub trait SquareSystem {
    fn dim(&self) -> usize;
    fn eval_into(&self, z: &[Complex], values: &mut [Complex], jac: Option<&mut CMatrix>);
}

impl SquareSystem for InstantiatedSystem {
    fn dim(&self) -> usize {
        self.num_vars()
    }

    fn eval_into(&self, z: &[Complex], values: &mut [Complex], jac: Option<&mut CMatrix>) {
        InstantiatedSystem::eval_into(self, z, values, jac)
    }
}

/// A homotopy frozen at one value of `t`.
pub struct HomotopyAt<'a> {
    pub homotopy: &'a Homotopy,
    pub t: f64,
}

impl SquareSystem for HomotopyAt<'_> {
    fn dim(&self) -> usize {
        self.homotopy.num_vars()
    }

    fn eval_into(&self, z: &[Complex], values: &mut [Complex], jac: Option<&mut CMatrix>) {
        self.homotopy.eval_into(z, self.t, values, jac, None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum PredictError {
    #[error("Jacobian is singular at the predictor base point")]
    Singular,
    #[error("predictor produced a non-finite point")]
    NonFinite,
}

/// Euler step: `z + dz` with `J_z dz = -(dH/dt) dt`. `dt` is signed; tracking
/// toward `t = 0` uses negative values.
pub fn euler_predict(h: &Homotopy, z: &[Complex], t: f64, dt: f64) -> Result<Vec<Complex>, PredictError> {
    let n = h.num_vars();
    let mut value = vec![Complex::new(0.0, 0.0); n];
    let mut jac = CMatrix::zeros(n);
    let mut d_dt = vec![Complex::new(0.0, 0.0); n];
    h.eval_into(z, t, &mut value, Some(&mut jac), Some(&mut d_dt));
    let lu = Lu::factor(&jac).map_err(|_| PredictError::Singular)?;
    let rhs: Vec<Complex> = d_dt.iter().map(|v| -v * dt).collect();
    let dz = lu.solve(&rhs);
    let out: Vec<Complex> = z.iter().zip(&dz).map(|(a, b)| a + b).collect();
    if out.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
        Ok(out)
    } else {
        Err(PredictError::NonFinite)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Correction {
    pub point: Vec<Complex>,
    pub iterations: usize,
    /// Norm of the final Newton update.
    pub last_step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum CorrectFailure {
    #[error("singular Jacobian during correction")]
    Singular,
    #[error("Newton did not converge (last update {last_step:e})")]
    NotConverged { last_step: f64 },
    #[error("non-finite iterate during correction")]
    NonFinite,
}

/// Newton's convergence test: the update is below `newton_tol`, measured
/// relative to the size of the iterate once that exceeds 1.
fn step_converged(step: f64, z: &[Complex], tol: f64) -> bool {
    step < tol * norm_inf(z).max(1.0)
}

/// Newton iterations `z <- z - J^-1 F(z)` until the update is below
/// `newton_tol`, giving up after `max_newton_iters`.
pub fn newton_correct<S: SquareSystem + ?Sized>(
    sys: &S,
    z: &[Complex],
    cfg: &TrackerConfig,
) -> Result<Correction, CorrectFailure> {
    let n = sys.dim();
    let mut point = z.to_vec();
    let mut values = vec![Complex::new(0.0, 0.0); n];
    let mut jac = CMatrix::zeros(n);
    let mut last_step = f64::INFINITY;
    for iter in 1..=cfg.max_newton_iters {
        sys.eval_into(&point, &mut values, Some(&mut jac));
        let lu = Lu::factor(&jac).map_err(|_| CorrectFailure::Singular)?;
        let dz = lu.solve(&values);
        for (p, d) in point.iter_mut().zip(&dz) {
            *p -= d;
        }
        if !point.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            return Err(CorrectFailure::NonFinite);
        }
        last_step = norm_inf(&dz);
        if step_converged(last_step, &point, cfg.newton_tol) {
            return Ok(Correction {
                point,
                iterations: iter,
                last_step,
            });
        }
    }
    Err(CorrectFailure::NotConverged { last_step })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PathStatus {
    Success,
    Diverged,
    MinStepFailure,
    NewtonFailure,
    MaxStepsExceeded,
}

impl PathStatus {
    /// Failures that warrant re-solving from a different start point.
    /// Divergence is a property of the target, not of the path.
    pub fn is_failure(self) -> bool {
        matches!(self, Self::MinStepFailure | Self::NewtonFailure | Self::MaxStepsExceeded)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Success => "Success",
            Self::Diverged => "Diverged",
            Self::MinStepFailure => "MinStepFailure",
            Self::NewtonFailure => "NewtonFailure",
            Self::MaxStepsExceeded => "MaxStepsExceeded",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    pub status: PathStatus,
    /// Present iff `status` is `Success`.
    pub endpoint: Option<VarPoint>,
    pub steps_taken: usize,
    /// Present iff `status` is not `Success`.
    pub t_at_failure: Option<f64>,
    pub final_residual: f64,
    pub condition_estimate: f64,
    /// Whether endpoint sharpening met the Newton tolerance.
    pub converged: bool,
    /// Norm of the last sharpening update.
    pub accuracy: f64,
    /// Point on the path at `t = endgame_boundary`, if reached.
    pub boundary_point: Option<VarPoint>,
}

impl PathResult {
    /// A path declared failed before it was tracked.
    pub fn failed(status: PathStatus, t: f64) -> Self {
        Self {
            status,
            endpoint: None,
            steps_taken: 0,
            t_at_failure: Some(t),
            final_residual: f64::INFINITY,
            condition_estimate: f64::INFINITY,
            converged: false,
            accuracy: f64::INFINITY,
            boundary_point: None,
        }
    }
}

/// Tracks one path of `h` from `start` at `t = 1` toward `t = 0`.
pub fn track_path(h: &Homotopy, start: &[Complex], cfg: &TrackerConfig) -> PathResult {
    let mut z = start.to_vec();
    let mut t = 1.0_f64;
    let mut dt = cfg.initial_step;
    let mut streak = 0usize;
    let mut steps = 0usize;
    let mut boundary_point = None;
    // Last accepted (t, ||z||) with t >= 100 t_final, for the growth test.
    let mut reference = (t, norm_inf(&z));
    let growth_window = 100.0 * cfg.t_final;

    let fail = |status: PathStatus, t: f64, steps: usize, boundary: Option<VarPoint>| PathResult {
        steps_taken: steps,
        boundary_point: boundary,
        ..PathResult::failed(status, t)
    };

    while t > cfg.t_final {
        if steps >= cfg.max_steps {
            return fail(PathStatus::MaxStepsExceeded, t, steps, boundary_point);
        }
        steps += 1;
        let mut t_next = t - dt;
        if t > cfg.endgame_boundary && t_next < cfg.endgame_boundary {
            t_next = cfg.endgame_boundary;
        }
        if t_next < cfg.t_final {
            t_next = cfg.t_final;
        }
        let corrected = euler_predict(h, &z, t, t_next - t).ok().and_then(|pred| {
            newton_correct(&HomotopyAt { homotopy: h, t: t_next }, &pred, cfg).ok()
        });
        match corrected {
            Some(c) => {
                if norm_inf(&c.point) > cfg.max_norm {
                    return fail(PathStatus::Diverged, t_next, steps, boundary_point);
                }
                #[cfg(debug_assertions)]
                {
                    let mut r = vec![Complex::new(0.0, 0.0); z.len()];
                    h.eval_into(&c.point, t_next, &mut r, None, None);
                    debug_assert!(
                        norm_inf(&r) <= 100.0 * cfg.newton_tol * norm_inf(&c.point).max(1.0),
                        "residual {} after accepted correction at t = {t_next}",
                        norm_inf(&r)
                    );
                }
                z = c.point;
                t = t_next;
                if t >= growth_window {
                    reference = (t, norm_inf(&z));
                }
                if t == cfg.endgame_boundary {
                    boundary_point = Some(VarPoint::from_vec_unchecked(z.clone()));
                }
                streak += 1;
                if streak >= cfg.consecutive_successes_to_grow {
                    dt = (dt * cfg.step_increase_factor).min(cfg.max_step);
                    streak = 0;
                }
            }
            None => {
                streak = 0;
                dt *= cfg.step_decrease_factor;
                if dt < cfg.min_step {
                    return fail(PathStatus::MinStepFailure, t, steps, boundary_point);
                }
            }
        }
    }

    let end_norm = norm_inf(&z);
    let sharp = sharpen(h.target(), z, cfg);
    let z = sharp.point;
    if sharp.escaped {
        return fail(PathStatus::Diverged, 0.0_f64.max(cfg.t_final), steps, boundary_point);
    }
    let residual = norm_inf(&h.target().evaluate(&z));
    if residual < 10.0 * cfg.newton_tol {
        let jac = h.target().jacobian(&z);
        return PathResult {
            status: PathStatus::Success,
            endpoint: Some(VarPoint::from_vec_unchecked(z)),
            steps_taken: steps,
            t_at_failure: None,
            final_residual: residual,
            condition_estimate: condition_inf(&jac),
            converged: sharp.converged,
            accuracy: sharp.last_step,
            boundary_point,
        };
    }
    let (t_ref, n_ref) = reference;
    let growth = if t_ref > cfg.t_final && n_ref > 0.0 {
        (end_norm / n_ref).ln() / (t_ref / cfg.t_final).ln()
    } else {
        0.0
    };
    let status = if growth > DIVERGENCE_GROWTH_EXPONENT && end_norm > 1.0 {
        PathStatus::Diverged
    } else {
        PathStatus::NewtonFailure
    };
    PathResult {
        final_residual: residual,
        ..fail(status, cfg.t_final, steps, boundary_point)
    }
}

struct Sharpened {
    point: Vec<Complex>,
    converged: bool,
    escaped: bool,
    last_step: f64,
}

/// Up to `sharpen_iters` Newton iterations on the target system.
fn sharpen(target: &InstantiatedSystem, mut z: Vec<Complex>, cfg: &TrackerConfig) -> Sharpened {
    let n = z.len();
    let mut values = vec![Complex::new(0.0, 0.0); n];
    let mut jac = CMatrix::zeros(n);
    let mut last_step = f64::INFINITY;
    for _ in 0..cfg.sharpen_iters {
        target.eval_into(&z, &mut values, Some(&mut jac));
        let Ok(lu) = Lu::factor(&jac) else { break };
        let dz = lu.solve(&values);
        let next: Vec<Complex> = z.iter().zip(&dz).map(|(a, b)| a - b).collect();
        if !next.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            break;
        }
        z = next;
        last_step = norm_inf(&dz);
        if norm_inf(&z) > cfg.max_norm {
            return Sharpened { point: z, converged: false, escaped: true, last_step };
        }
        if step_converged(last_step, &z, cfg.newton_tol) {
            return Sharpened { point: z, converged: true, escaped: false, last_step };
        }
    }
    Sharpened { point: z, converged: false, escaped: false, last_step }
}

/// Index pairs of points closer than `tol` in the infinity norm.
pub fn crossing_check(points: &[VarPoint], tol: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[i].distance(&points[j]) < tol {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Multiplicity {
    Nonsingular,
    Singular,
}

/// Deduplicated endpoints of one homotopy run.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct ClassifiedSolutions {
    pub distinct: Vec<VarPoint>,
    pub multiplicity_flags: Vec<Multiplicity>,
    pub real_flags: Vec<bool>,
    pub n_real: usize,
    /// `||F(z)||_inf` for each distinct point.
    pub residuals: Vec<f64>,
    /// Number of path endpoints merged into each distinct point.
    pub multiplicities: Vec<usize>,
}

impl ClassifiedSolutions {
    pub fn len(&self) -> usize {
        self.distinct.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distinct.is_empty()
    }

    pub fn n_singular(&self) -> usize {
        self.multiplicity_flags.iter().filter(|&&m| m == Multiplicity::Singular).count()
    }

    /// Only the nonsingular points.
    pub fn nonsingular(&self) -> ClassifiedSolutions {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.multiplicity_flags[i] == Multiplicity::Nonsingular)
            .collect();
        let real_flags: Vec<bool> = keep.iter().map(|&i| self.real_flags[i]).collect();
        ClassifiedSolutions {
            distinct: keep.iter().map(|&i| self.distinct[i].clone()).collect(),
            multiplicity_flags: keep.iter().map(|&i| self.multiplicity_flags[i]).collect(),
            n_real: real_flags.iter().filter(|&&r| r).count(),
            real_flags,
            residuals: keep.iter().map(|&i| self.residuals[i]).collect(),
            multiplicities: keep.iter().map(|&i| self.multiplicities[i]).collect(),
        }
    }
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Deduplicates successful endpoints and flags singular and real ones.
///
/// Endpoints closer than `dedup_tol` merge. Endpoints whose sharpening did
/// not converge also merge when their uncertainty balls overlap, which
/// collects the cluster of truncated paths around a multiple root. A merged
/// group of converged endpoints keeps its smallest-residual member; a group
/// containing unconverged endpoints is represented by its centroid.
pub fn classify_endpoints(
    results: &[PathResult],
    target: &InstantiatedSystem,
    dedup_tol: f64,
    real_tol: f64,
) -> ClassifiedSolutions {
    let ok: Vec<&PathResult> = results
        .iter()
        .filter(|r| r.status == PathStatus::Success && r.endpoint.is_some())
        .collect();
    let m = ok.len();
    let mut parent: Vec<usize> = (0..m).collect();
    for i in 0..m {
        for j in i + 1..m {
            let (a, b) = (ok[i], ok[j]);
            let d = a.endpoint.as_ref().unwrap().distance(b.endpoint.as_ref().unwrap());
            let loose = !(a.converged && b.converged) && d < SINGULAR_MERGE_FACTOR * (a.accuracy + b.accuracy);
            if d < dedup_tol || loose {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut group_of_root = vec![usize::MAX; m];
    for i in 0..m {
        let r = find(&mut parent, i);
        if group_of_root[r] == usize::MAX {
            group_of_root[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[group_of_root[r]].push(i);
    }

    let mut out = ClassifiedSolutions::default();
    for members in groups {
        let all_converged = members.iter().all(|&i| ok[i].converged);
        let (point, residual) = if all_converged {
            let best = members
                .iter()
                .copied()
                .min_by(|&a, &b| ok[a].final_residual.total_cmp(&ok[b].final_residual))
                .unwrap();
            (ok[best].endpoint.clone().unwrap(), ok[best].final_residual)
        } else {
            let n = target.num_vars();
            let mut centroid = vec![Complex::new(0.0, 0.0); n];
            for &i in &members {
                for (c, v) in centroid.iter_mut().zip(ok[i].endpoint.as_ref().unwrap().iter()) {
                    *c += v;
                }
            }
            for c in &mut centroid {
                *c /= members.len() as f64;
            }
            let residual = norm_inf(&target.evaluate(&centroid));
            (VarPoint::from_vec_unchecked(centroid), residual)
        };
        let singular = !all_converged
            || members.len() > 1
            || members.iter().any(|&i| !(ok[i].condition_estimate <= SINGULAR_CONDITION));
        let real = point.iter().all(|c| c.im.abs() < real_tol);
        out.distinct.push(point);
        out.multiplicity_flags.push(if singular { Multiplicity::Singular } else { Multiplicity::Nonsingular });
        out.real_flags.push(real);
        out.residuals.push(residual);
        out.multiplicities.push(members.len());
    }
    out.n_real = out.real_flags.iter().filter(|&&r| r).count();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_system, ParameterPoint};
    use crate::startsys::{random_gamma, total_degree_start};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn quad(p: Complex) -> InstantiatedSystem {
        parse_system("variable z; parameter p; function f; f = z^2 - p;")
            .unwrap()
            .instantiate(&ParameterPoint::new(vec![p]).unwrap())
            .unwrap()
    }

    /// `(z^2 - 1) t + (z^2 - 4)(1 - t)`, path `z(t) = sqrt(4 - 3t)`.
    fn four_from_one() -> Homotopy {
        Homotopy::parameter(quad(c(4.0, 0.0)), quad(c(1.0, 0.0))).unwrap()
    }

    #[test]
    fn euler_hand_example() {
        let z = euler_predict(&four_from_one(), &[c(1.0, 0.0)], 1.0, -0.5).unwrap();
        assert!((z[0] - c(1.75, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn euler_zero_step_is_identity() {
        let z = euler_predict(&four_from_one(), &[c(1.3, 0.2)], 0.7, 0.0).unwrap();
        assert_eq!(z, vec![c(1.3, 0.2)]);
    }

    #[test]
    fn euler_exact_for_linear_homotopy() {
        // H = (z - 1) t + (z - 3 - 2i)(1 - t): linear in z and t, z(t) = 3 + 2i - (2 + 2i) t.
        let sys = parse_system("variable z; parameter a; function f; f = z - a;").unwrap();
        let at = |v: Complex| sys.instantiate(&ParameterPoint::new(vec![v]).unwrap()).unwrap();
        let h = Homotopy::parameter(at(c(3.0, 2.0)), at(c(1.0, 0.0))).unwrap();
        let z = euler_predict(&h, &[c(1.0, 0.0)], 1.0, -0.6).unwrap();
        let r = h.evaluate(&z, 0.4).value;
        assert!(r[0].norm() < 1e-12);
    }

    #[test]
    fn newton_hand_example() {
        let sys = quad(c(2.5, 0.0));
        let one = TrackerConfig { max_newton_iters: 1, ..Default::default() };
        match newton_correct(&sys, &[c(1.75, 0.0)], &one) {
            Err(CorrectFailure::NotConverged { .. }) => {}
            other => panic!("{other:?}"),
        }
        let mut z = vec![c(1.75, 0.0)];
        let mut values = vec![c(0.0, 0.0)];
        let mut jac = CMatrix::zeros(1);
        sys.eval_into(&z, &mut values, Some(&mut jac));
        z[0] -= values[0] / jac[(0, 0)];
        assert!((z[0].re - 1.5893).abs() < 1e-4);

        let cfg = TrackerConfig { max_newton_iters: 10, ..Default::default() };
        let done = newton_correct(&sys, &[c(1.75, 0.0)], &cfg).unwrap();
        assert!((done.point[0].re - 2.5_f64.sqrt()).abs() < 1e-12);
        assert!((done.point[0].re - 1.58113883).abs() < 1e-8);
    }

    #[test]
    fn newton_exact_root_unchanged() {
        let sys = quad(c(4.0, 0.0));
        let done = newton_correct(&sys, &[c(2.0, 0.0)], &TrackerConfig::default()).unwrap();
        assert_eq!(done.point, vec![c(2.0, 0.0)]);
        assert_eq!(done.iterations, 1);
    }

    #[test]
    fn newton_double_root_fails() {
        let sys = quad(c(0.0, 0.0));
        let cfg = TrackerConfig { max_newton_iters: 3, ..Default::default() };
        assert!(matches!(
            newton_correct(&sys, &[c(1.0, 0.0)], &cfg),
            Err(CorrectFailure::NotConverged { .. })
        ));
    }

    #[test]
    fn tracks_closed_form_path() {
        let h = four_from_one();
        let cfg = TrackerConfig::default();
        let r = track_path(&h, &[c(1.0, 0.0)], &cfg);
        assert_eq!(r.status, PathStatus::Success);
        assert!((r.endpoint.as_ref().unwrap()[0] - c(2.0, 0.0)).norm() < 1e-8);
        assert!(r.converged);
        assert!(r.final_residual < 10.0 * cfg.newton_tol);
        // z(0.1) = sqrt(3.7)
        let b = r.boundary_point.unwrap();
        assert!((b[0] - c(3.7_f64.sqrt(), 0.0)).norm() < 1e-8);

        let r = track_path(&h, &[c(-1.0, 0.0)], &cfg);
        assert_eq!(r.status, PathStatus::Success);
        assert!((r.endpoint.unwrap()[0] - c(-2.0, 0.0)).norm() < 1e-8);
    }

    #[test]
    fn tracking_is_deterministic() {
        let h = four_from_one();
        let cfg = TrackerConfig::default();
        assert_eq!(track_path(&h, &[c(1.0, 0.0)], &cfg), track_path(&h, &[c(1.0, 0.0)], &cfg));
    }

    #[test]
    fn discriminant_target_gives_singular_cluster() {
        let cfg = TrackerConfig::default();
        let h = Homotopy::parameter(quad(c(0.0, 0.0)), quad(c(1.0, 0.0))).unwrap();
        let results: Vec<_> = [c(1.0, 0.0), c(-1.0, 0.0)].iter().map(|r| track_path(&h, &[*r], &cfg)).collect();
        for r in &results {
            assert_eq!(r.status, PathStatus::Success, "{r:?}");
            assert!(!r.converged);
            assert!(r.endpoint.as_ref().unwrap()[0].norm() < 1e-4);
        }
        let classes = classify_endpoints(&results, h.target(), 1e-6, 1e-8);
        assert_eq!(classes.len(), 1);
        assert_eq!(classes.multiplicity_flags[0], Multiplicity::Singular);
        assert_eq!(classes.multiplicities[0], 2);
        assert!(classes.distinct[0][0].norm() < 1e-6);
    }

    #[test]
    fn min_step_failure_when_step_underflows() {
        // Tracking straight through the double root z = 0 at t = 1/2.
        let h = Homotopy::parameter(quad(c(-1.0, 0.0)), quad(c(1.0, 0.0))).unwrap();
        let r = track_path(&h, &[c(1.0, 0.0)], &TrackerConfig::default());
        assert!(r.status.is_failure(), "{r:?}");
        assert!(r.endpoint.is_none());
        let t = r.t_at_failure.unwrap();
        assert!(t > 0.0 && t <= 1.0);
    }

    #[test]
    fn diverged_when_norm_bound_exceeded() {
        // (1 - t)(a z - 1) + t (z - 1): root 1 / (a (1 - t) + t) blows up near a(1-t)+t = 0.
        let sys = parse_system("variable z; parameter a; function f; f = a*z - 1;").unwrap();
        let at = |v: f64| sys.instantiate(&ParameterPoint::from_real(&[v])).unwrap();
        let h = Homotopy::parameter(at(0.0), at(1.0)).unwrap();
        let r = track_path(&h, &[c(1.0, 0.0)], &TrackerConfig { max_norm: 1e3, ..Default::default() });
        assert_eq!(r.status, PathStatus::Diverged);
    }

    #[test]
    fn crossing_examples() {
        let a = VarPoint::from_real(&[1.0]);
        let b = VarPoint::from_real(&[-1.0]);
        assert!(crossing_check(&[a.clone(), b], 1e-6).is_empty());
        assert_eq!(crossing_check(&[a.clone(), a], 1e-6), vec![(0, 1)]);
    }

    fn success(z: Complex, converged: bool) -> PathResult {
        PathResult {
            status: PathStatus::Success,
            endpoint: Some(VarPoint::new(vec![z]).unwrap()),
            steps_taken: 1,
            t_at_failure: None,
            final_residual: 0.0,
            condition_estimate: 1.0,
            converged,
            accuracy: 1e-14,
            boundary_point: None,
        }
    }

    #[test]
    fn classify_plus_minus_two() {
        let res = vec![success(c(2.0, 0.0), true), success(c(-2.0, 0.0), true)];
        let cl = classify_endpoints(&res, &quad(c(4.0, 0.0)), 1e-6, 1e-8);
        assert_eq!(cl.len(), 2);
        assert_eq!(cl.n_real, 2);
        assert!(cl.multiplicity_flags.iter().all(|&m| m == Multiplicity::Nonsingular));
    }

    #[test]
    fn classify_sixth_roots_of_unity() {
        let sys = parse_system("variable z; function f; f = z^6 - 1;").unwrap();
        let target = sys.instantiate(&ParameterPoint::from_real(&[])).unwrap();
        let res: Vec<_> = (0..6)
            .map(|k| success(Complex::from_polar(1.0, TAU * k as f64 / 6.0), true))
            .collect();
        let cl = classify_endpoints(&res, &target, 1e-6, 1e-8);
        assert_eq!(cl.len(), 6);
        assert_eq!(cl.n_real, 2);
    }

    #[test]
    fn classify_merges_close_endpoints() {
        let res = vec![success(c(2.0, 0.0), true), success(c(2.0 + 1e-10, 0.0), true)];
        let cl = classify_endpoints(&res, &quad(c(4.0, 0.0)), 1e-6, 1e-8);
        assert_eq!(cl.len(), 1);
        assert_eq!(cl.multiplicity_flags[0], Multiplicity::Singular);
        assert_eq!(cl.multiplicities[0], 2);
    }

    #[test]
    fn univariate_total_degree_matches_polar_roots() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let cfg = TrackerConfig::default();
        for d in 2..=6u32 {
            let sys = parse_system(&format!("variable z; parameter c; function f; f = z^{d} - c;")).unwrap();
            let cval = c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            let target = sys.instantiate(&ParameterPoint::new(vec![cval]).unwrap()).unwrap();
            let start = total_degree_start(&[d]).unwrap();
            let h = Homotopy::total_degree(target.clone(), start.clone(), random_gamma(&mut rng)).unwrap();
            let results: Vec<_> = start.solutions().map(|s| track_path(&h, &s, &cfg)).collect();
            let cl = classify_endpoints(&results, &target, 1e-6, 1e-8);
            assert_eq!(cl.len(), d as usize);
            let (r, theta) = cval.to_polar();
            for k in 0..d {
                let root = Complex::from_polar(r.powf(1.0 / d as f64), (theta + TAU * k as f64) / d as f64);
                let nearest = cl.distinct.iter().map(|z| (z[0] - root).norm()).fold(f64::INFINITY, f64::min);
                assert!(nearest < 1e-8, "d = {d}, k = {k}, miss {nearest}");
            }
        }
    }

    #[test]
    fn config_validation() {
        assert!(TrackerConfig::default().validate().is_ok());
        assert!(TrackerConfig { min_step: 0.0, ..Default::default() }.validate().is_err());
        assert!(TrackerConfig { t_final: 0.2, ..Default::default() }.validate().is_err());
        assert!(TrackerConfig { initial_step: 0.5, ..Default::default() }.validate().is_err());
    }
}
