//! Total-degree start systems and the two homotopy flavors built on them.

use std::f64::consts::TAU;

use rand::Rng;

use crate::linalg::CMatrix;
use crate::poly::{InstantiatedSystem, VarPoint};
use crate::Complex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StartSystemError {
    #[error("function {0} has degree 0 in the variables")]
    ConstantFunction(usize),
    #[error("source has {source_dim} variables, target has {target}")]
    DimensionMismatch { target: usize, source_dim: usize },
}

/// `g_i(z) = z_i^{d_i} - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct StartSystem {
    degrees: Vec<u32>,
}

impl StartSystem {
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    pub fn num_vars(&self) -> usize {
        self.degrees.len()
    }

    /// Number of start points, the product of the degrees.
    pub fn num_solutions(&self) -> usize {
        self.degrees.iter().map(|&d| d as usize).product()
    }

    /// The `k`-th start point in lexicographic order of the root indices
    /// (last coordinate varies fastest).
    pub fn solution(&self, mut k: usize) -> VarPoint {
        let mut idx = vec![0u32; self.degrees.len()];
        for (slot, &d) in idx.iter_mut().zip(&self.degrees).rev() {
            *slot = (k % d as usize) as u32;
            k /= d as usize;
        }
        VarPoint::from_vec_unchecked(
            idx.iter()
                .zip(&self.degrees)
                .map(|(&i, &d)| Complex::from_polar(1.0, TAU * i as f64 / d as f64))
                .collect(),
        )
    }

    pub fn solutions(&self) -> impl Iterator<Item = VarPoint> + '_ {
        (0..self.num_solutions()).map(|k| self.solution(k))
    }

    pub fn eval_into(&self, z: &[Complex], values: &mut [Complex], mut jac: Option<&mut CMatrix>) {
        if let Some(j) = jac.as_deref_mut() {
            j.fill_zero();
        }
        for (i, (&zi, &d)) in z.iter().zip(&self.degrees).enumerate() {
            let lower = zi.powu(d - 1);
            values[i] = lower * zi - 1.0;
            if let Some(j) = jac.as_deref_mut() {
                j[(i, i)] = lower * d as f64;
            }
        }
    }

    pub fn evaluate(&self, z: &[Complex]) -> Vec<Complex> {
        let mut out = vec![Complex::new(0.0, 0.0); z.len()];
        self.eval_into(z, &mut out, None);
        out
    }
}

/// Builds the total-degree start system for the given degrees.
pub fn total_degree_start(degrees: &[u32]) -> Result<StartSystem, StartSystemError> {
    if let Some(i) = degrees.iter().position(|&d| d == 0) {
        return Err(StartSystemError::ConstantFunction(i));
    }
    Ok(StartSystem {
        degrees: degrees.to_vec(),
    })
}

/// Uniform draw from the complex unit circle.
pub fn random_gamma<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    let theta: f64 = rng.gen_range(0.0..TAU);
    Complex::new(theta.cos(), theta.sin())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomotopyKind {
    TotalDegree,
    Parameter,
}

#[derive(Clone, Debug)]
pub enum Source {
    Start(StartSystem),
    System(InstantiatedSystem),
}

impl Source {
    fn num_vars(&self) -> usize {
        match self {
            Source::Start(s) => s.num_vars(),
            Source::System(s) => s.num_vars(),
        }
    }

    fn eval_into(&self, z: &[Complex], values: &mut [Complex], jac: Option<&mut CMatrix>) {
        match self {
            Source::Start(s) => s.eval_into(z, values, jac),
            Source::System(s) => s.eval_into(z, values, jac),
        }
    }
}

/// `H(z, t) = target(z) (1 - t) + gamma t source(z)`, tracked from `t = 1`
/// down to `t = 0`.
#[derive(Clone, Debug)]
pub struct Homotopy {
    kind: HomotopyKind,
    target: InstantiatedSystem,
    source: Source,
    gamma: Complex,
}

/// Values produced by one homotopy evaluation.
#[derive(Clone, Debug)]
pub struct HomotopyEval {
    pub value: Vec<Complex>,
    pub jac_z: CMatrix,
    pub d_dt: Vec<Complex>,
}

impl Homotopy {
    /// When `source` is itself an instantiated system the homotopy is a
    /// parameter homotopy and `gamma` is replaced by exactly 1.
    pub fn new(target: InstantiatedSystem, source: Source, gamma: Complex) -> Result<Self, StartSystemError> {
        if source.num_vars() != target.num_vars() {
            return Err(StartSystemError::DimensionMismatch {
                target: target.num_vars(),
                source_dim: source.num_vars(),
            });
        }
        let (kind, gamma) = match source {
            Source::Start(_) => (HomotopyKind::TotalDegree, gamma),
            Source::System(_) => (HomotopyKind::Parameter, Complex::new(1.0, 0.0)),
        };
        Ok(Self {
            kind,
            target,
            source,
            gamma,
        })
    }

    pub fn total_degree(target: InstantiatedSystem, start: StartSystem, gamma: Complex) -> Result<Self, StartSystemError> {
        Self::new(target, Source::Start(start), gamma)
    }

    pub fn parameter(target: InstantiatedSystem, source: InstantiatedSystem) -> Result<Self, StartSystemError> {
        Self::new(target, Source::System(source), Complex::new(1.0, 0.0))
    }

    pub fn kind(&self) -> HomotopyKind {
        self.kind
    }

    pub fn gamma(&self) -> Complex {
        self.gamma
    }

    pub fn target(&self) -> &InstantiatedSystem {
        &self.target
    }

    pub fn num_vars(&self) -> usize {
        self.target.num_vars()
    }

    /// Evaluates `H`, optionally with `dH/dz` and `dH/dt`.
    pub fn eval_into(
        &self,
        z: &[Complex],
        t: f64,
        value: &mut [Complex],
        jac_z: Option<&mut CMatrix>,
        d_dt: Option<&mut [Complex]>,
    ) {
        let n = self.num_vars();
        let mut f = vec![Complex::new(0.0, 0.0); n];
        let mut g = vec![Complex::new(0.0, 0.0); n];
        let a = Complex::new(1.0 - t, 0.0);
        let b = self.gamma * t;
        match jac_z {
            Some(jac) => {
                let mut jg = CMatrix::zeros(n);
                self.target.eval_into(z, &mut f, Some(jac));
                self.source.eval_into(z, &mut g, Some(&mut jg));
                jac.combine(a, &jg, b);
            }
            None => {
                self.target.eval_into(z, &mut f, None);
                self.source.eval_into(z, &mut g, None);
            }
        }
        for i in 0..n {
            value[i] = a * f[i] + b * g[i];
        }
        if let Some(dt) = d_dt {
            for i in 0..n {
                dt[i] = self.gamma * g[i] - f[i];
            }
        }
    }

    pub fn evaluate(&self, z: &[Complex], t: f64) -> HomotopyEval {
        let n = self.num_vars();
        let mut value = vec![Complex::new(0.0, 0.0); n];
        let mut jac_z = CMatrix::zeros(n);
        let mut d_dt = vec![Complex::new(0.0, 0.0); n];
        self.eval_into(z, t, &mut value, Some(&mut jac_z), Some(&mut d_dt));
        HomotopyEval { value, jac_z, d_dt }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{parse_system, ParameterPoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn inf_norm(v: &[Complex]) -> f64 {
        v.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn degree_two_roots() {
        let s = total_degree_start(&[2]).unwrap();
        let pts: Vec<_> = s.solutions().collect();
        assert_eq!(pts.len(), 2);
        assert!((pts[0][0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((pts[1][0] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn start_point_counts_and_residuals() {
        for (degrees, count) in [(vec![2, 3], 6), (vec![3, 3, 3, 3], 81), (vec![2, 3, 3], 18)] {
            let s = total_degree_start(&degrees).unwrap();
            assert_eq!(s.num_solutions(), count);
            let pts: Vec<_> = s.solutions().collect();
            assert_eq!(pts.len(), count);
            for p in &pts {
                assert!(inf_norm(&s.evaluate(p)) < 1e-12);
            }
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    assert!(pts[i].distance(&pts[j]) > 0.5);
                }
            }
        }
    }

    #[test]
    fn lexicographic_order() {
        let s = total_degree_start(&[2, 3]).unwrap();
        // index 1 = (root 0 of z1, root 1 of z2)
        let p = s.solution(1);
        assert!((p[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p[1] - Complex::from_polar(1.0, TAU / 3.0)).norm() < 1e-15);
        let p = s.solution(3);
        assert!((p[0] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_degree_rejected() {
        assert_eq!(total_degree_start(&[2, 0]), Err(StartSystemError::ConstantFunction(1)));
    }

    #[test]
    fn gamma_is_unit_and_reproducible() {
        let g1 = random_gamma(&mut ChaCha8Rng::seed_from_u64(42));
        let g2 = random_gamma(&mut ChaCha8Rng::seed_from_u64(42));
        let g3 = random_gamma(&mut ChaCha8Rng::seed_from_u64(43));
        assert!((g1.norm() - 1.0).abs() < 1e-15);
        assert_eq!(g1, g2);
        assert_ne!(g1, g3);
    }

    fn quad(p: f64) -> InstantiatedSystem {
        parse_system("variable z; parameter p; function f; f = z^2 - p;")
            .unwrap()
            .instantiate(&ParameterPoint::from_real(&[p]))
            .unwrap()
    }

    #[test]
    fn parameter_homotopy_hand_values() {
        let h = Homotopy::parameter(quad(4.0), quad(1.0)).unwrap();
        assert_eq!(h.kind(), HomotopyKind::Parameter);
        assert_eq!(h.gamma(), c(1.0, 0.0));
        let e = h.evaluate(&[c(1.0, 0.0)], 0.5);
        assert_eq!(e.value[0], c(-1.5, 0.0));
        assert_eq!(e.d_dt[0], c(3.0, 0.0));
        assert_eq!(e.jac_z[(0, 0)], c(2.0, 0.0));
    }

    #[test]
    fn gamma_forced_to_one_for_parameter_kind() {
        let h = Homotopy::new(quad(4.0), Source::System(quad(1.0)), c(0.0, 1.0)).unwrap();
        assert_eq!(h.gamma(), c(1.0, 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let start = total_degree_start(&[2, 2]).unwrap();
        assert!(matches!(
            Homotopy::total_degree(quad(1.0), start, c(1.0, 0.0)),
            Err(StartSystemError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn endpoint_identities_and_time_derivative() {
        let sys = parse_system(
            "variable x, y; parameter a; function f, g; f = x^2*y - a*x + 3; g = y^3 - x*y + a^2;",
        )
        .unwrap();
        let target = sys.instantiate(&ParameterPoint::new(vec![c(0.3, -0.8)]).unwrap()).unwrap();
        let start = total_degree_start(&target.degrees()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let gamma = random_gamma(&mut rng);
        let h = Homotopy::total_degree(target.clone(), start.clone(), gamma).unwrap();
        for _ in 0..20 {
            let z = vec![
                c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
                c(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)),
            ];
            let at0 = h.evaluate(&z, 0.0).value;
            let f = target.evaluate(&z);
            assert!((0..2).all(|i| (at0[i] - f[i]).norm() < 1e-12));
            let at1 = h.evaluate(&z, 1.0).value;
            let g = start.evaluate(&z);
            assert!((0..2).all(|i| (at1[i] - gamma * g[i]).norm() < 1e-12));

            let t: f64 = rng.gen_range(0.05..0.95);
            let dt = 1e-6;
            let hp = h.evaluate(&z, t + dt).value;
            let hm = h.evaluate(&z, t - dt).value;
            let analytic = h.evaluate(&z, t).d_dt;
            for i in 0..2 {
                let fd = (hp[i] - hm[i]) / (2.0 * dt);
                assert!((fd - analytic[i]).norm() / analytic[i].norm().max(1.0) < 1e-6);
            }
        }
    }
}
