use super::{ParamSystem, ParameterPoint, PowerTable};
use crate::linalg::CMatrix;
use crate::Complex;

/// `F(., p)` for a fixed parameter point: same monomials as the parent
/// system, with every coefficient multiplied by its parameter monomial.
///
/// Terms are kept one-for-one with the parent (no merging), so evaluating
/// here matches [`ParamSystem::evaluate`] bit for bit.
#[derive(Clone, Debug)]
pub struct InstantiatedSystem {
    n: usize,
    max_exp: u32,
    /// Term ranges per function into `coeffs` / `exps`.
    offsets: Vec<usize>,
    coeffs: Vec<Complex>,
    /// Flattened exponent vectors, `n` entries per term.
    exps: Vec<u32>,
}

impl InstantiatedSystem {
    pub(super) fn new(sys: &ParamSystem, p: &ParameterPoint) -> Self {
        let n = sys.num_vars();
        let ppow = PowerTable::new(p, sys.max_param_exponent());
        let mut offsets = vec![0];
        let mut coeffs = Vec::new();
        let mut exps = Vec::new();
        for terms in sys.functions() {
            for t in terms {
                coeffs.push(t.coeff * ppow.monomial(&t.param_exps));
                exps.extend_from_slice(&t.var_exps);
            }
            offsets.push(coeffs.len());
        }
        Self {
            n,
            max_exp: sys.max_var_exponent(),
            offsets,
            coeffs,
            exps,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    /// Total degree of each function.
    pub fn degrees(&self) -> Vec<u32> {
        (0..self.n)
            .map(|i| {
                (self.offsets[i]..self.offsets[i + 1])
                    .map(|k| self.term_exps(k).iter().sum::<u32>())
                    .max()
                    .unwrap_or(0)
            })
            .collect()
    }

    #[inline]
    fn term_exps(&self, k: usize) -> &[u32] {
        &self.exps[k * self.n..(k + 1) * self.n]
    }

    pub fn evaluate(&self, z: &[Complex]) -> Vec<Complex> {
        let mut out = vec![Complex::new(0.0, 0.0); self.n];
        self.eval_into(z, &mut out, None);
        out
    }

    pub fn jacobian(&self, z: &[Complex]) -> CMatrix {
        let mut f = vec![Complex::new(0.0, 0.0); self.n];
        let mut jac = CMatrix::zeros(self.n);
        self.eval_into(z, &mut f, Some(&mut jac));
        jac
    }

    /// Writes `F(z)` into `values` and, if requested, `dF/dz` into `jac`.
    pub fn eval_into(&self, z: &[Complex], values: &mut [Complex], mut jac: Option<&mut CMatrix>) {
        assert_eq!(z.len(), self.n, "variable dimension mismatch");
        let pow = PowerTable::new(z, self.max_exp);
        if let Some(j) = jac.as_deref_mut() {
            j.fill_zero();
        }
        for i in 0..self.n {
            let mut acc = Complex::new(0.0, 0.0);
            for k in self.offsets[i]..self.offsets[i + 1] {
                let c = self.coeffs[k];
                let e = self.term_exps(k);
                acc += c * pow.monomial(e);
                if let Some(j) = jac.as_deref_mut() {
                    for col in 0..self.n {
                        if let Some(d) = pow.partial(e, col) {
                            j[(i, col)] += c * d;
                        }
                    }
                }
            }
            values[i] = acc;
        }
    }
}
