//! Parameterized polynomial systems `F(z, p)`.
//!
//! A [`ParamSystem`] is a square system in `N` variables whose coefficients are
//! polynomials in `M` parameters. Every function is stored fully expanded as a
//! list of [`Term`]s, so evaluation and differentiation are term-by-term loops.
//! Fixing the parameters yields an [`InstantiatedSystem`], which keeps the
//! monomial structure and only refreshes coefficients.

mod emit;
mod instantiate;
mod parse;

use std::fmt;

pub use instantiate::InstantiatedSystem;
pub use parse::{parse_system, ParseError, ParseErrorKind};

use crate::linalg::CMatrix;
use crate::Complex;

/// One monomial `coeff * z^var_exps * p^param_exps`.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub coeff: Complex,
    pub var_exps: Vec<u32>,
    pub param_exps: Vec<u32>,
}

impl Term {
    pub fn var_degree(&self) -> u32 {
        self.var_exps.iter().sum()
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum DimensionError {
    #[error("expected {expected} variable values, got {got}")]
    Variables { expected: usize, got: usize },
    #[error("expected {expected} parameter values, got {got}")]
    Parameters { expected: usize, got: usize },
    #[error("non-finite value in point")]
    NonFinite,
}

/// A square system `F: C^N x C^M -> C^N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSystem {
    var_names: Vec<String>,
    param_names: Vec<String>,
    function_names: Vec<String>,
    functions: Vec<Vec<Term>>,
}

impl ParamSystem {
    /// Builds a system from already-expanded terms. Terms are normalized:
    /// duplicate monomials merged, zeros dropped, canonical order applied.
    pub fn from_terms(
        var_names: Vec<String>,
        param_names: Vec<String>,
        function_names: Vec<String>,
        functions: Vec<Vec<Term>>,
    ) -> Result<Self, String> {
        let n = var_names.len();
        let m = param_names.len();
        if functions.len() != n || function_names.len() != n {
            return Err(format!(
                "system is not square: {} functions, {} variables",
                functions.len(),
                n
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for name in var_names.iter().chain(&param_names).chain(&function_names) {
            if !seen.insert(name.as_str()) {
                return Err(format!("duplicate name `{name}`"));
            }
        }
        let mut normalized = Vec::with_capacity(n);
        for terms in functions {
            for t in &terms {
                if t.var_exps.len() != n || t.param_exps.len() != m {
                    return Err("term exponent vector has wrong length".into());
                }
            }
            normalized.push(normalize_terms(terms));
        }
        Ok(Self {
            var_names,
            param_names,
            function_names,
            functions: normalized,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.var_names.len()
    }

    pub fn num_params(&self) -> usize {
        self.param_names.len()
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn param_names(&self) -> &[String] {
        &self.param_names
    }

    pub fn function_names(&self) -> &[String] {
        &self.function_names
    }

    pub fn functions(&self) -> &[Vec<Term>] {
        &self.functions
    }

    /// Total degree of each function in the variables; parameter exponents
    /// do not count.
    pub fn variable_degrees(&self) -> Vec<u32> {
        self.functions
            .iter()
            .map(|f| f.iter().map(Term::var_degree).max().unwrap_or(0))
            .collect()
    }

    fn check_dims(&self, z: &[Complex], p: &[Complex]) -> Result<(), DimensionError> {
        if z.len() != self.num_vars() {
            return Err(DimensionError::Variables {
                expected: self.num_vars(),
                got: z.len(),
            });
        }
        if p.len() != self.num_params() {
            return Err(DimensionError::Parameters {
                expected: self.num_params(),
                got: p.len(),
            });
        }
        Ok(())
    }

    /// Evaluates `F(z, p)` by summing terms in stored order.
    pub fn evaluate(&self, z: &VarPoint, p: &ParameterPoint) -> Result<Vec<Complex>, DimensionError> {
        self.check_dims(z, p)?;
        let zpow = PowerTable::new(z, self.max_var_exponent());
        let ppow = PowerTable::new(p, self.max_param_exponent());
        Ok(self
            .functions
            .iter()
            .map(|terms| {
                let mut acc = Complex::new(0.0, 0.0);
                for t in terms {
                    let c = t.coeff * ppow.monomial(&t.param_exps);
                    acc += c * zpow.monomial(&t.var_exps);
                }
                acc
            })
            .collect())
    }

    /// `dF/dz` at `(z, p)` with parameters held constant.
    pub fn jacobian_z(&self, z: &VarPoint, p: &ParameterPoint) -> Result<CMatrix, DimensionError> {
        self.check_dims(z, p)?;
        let n = self.num_vars();
        let zpow = PowerTable::new(z, self.max_var_exponent());
        let ppow = PowerTable::new(p, self.max_param_exponent());
        let mut jac = CMatrix::zeros(n);
        for (i, terms) in self.functions.iter().enumerate() {
            for t in terms {
                let c = t.coeff * ppow.monomial(&t.param_exps);
                for j in 0..n {
                    if let Some(d) = zpow.partial(&t.var_exps, j) {
                        jac[(i, j)] += c * d;
                    }
                }
            }
        }
        Ok(jac)
    }

    /// Fixes the parameters, producing a system in `z` alone.
    pub fn instantiate(&self, p: &ParameterPoint) -> Result<InstantiatedSystem, DimensionError> {
        if p.len() != self.num_params() {
            return Err(DimensionError::Parameters {
                expected: self.num_params(),
                got: p.len(),
            });
        }
        Ok(InstantiatedSystem::new(self, p))
    }

    pub(crate) fn max_var_exponent(&self) -> u32 {
        self.functions
            .iter()
            .flatten()
            .flat_map(|t| t.var_exps.iter().copied())
            .max()
            .unwrap_or(0)
    }

    pub(crate) fn max_param_exponent(&self) -> u32 {
        self.functions
            .iter()
            .flatten()
            .flat_map(|t| t.param_exps.iter().copied())
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for ParamSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_input_text())
    }
}

/// Merges equal monomials, drops zero coefficients and sorts terms into the
/// canonical order (descending variable degree, then descending exponents).
pub(crate) fn normalize_terms(terms: Vec<Term>) -> Vec<Term> {
    let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
    let mut sorted = terms;
    sorted.sort_by(term_order);
    for t in sorted {
        match merged.last_mut() {
            Some(last) if last.var_exps == t.var_exps && last.param_exps == t.param_exps => {
                last.coeff += t.coeff;
            }
            _ => merged.push(t),
        }
    }
    merged.retain(|t| t.coeff != Complex::new(0.0, 0.0));
    merged
}

fn term_order(a: &Term, b: &Term) -> std::cmp::Ordering {
    b.var_degree()
        .cmp(&a.var_degree())
        .then_with(|| b.var_exps.cmp(&a.var_exps))
        .then_with(|| b.param_exps.cmp(&a.param_exps))
}

/// Powers `x_k^e` for `e <= max_exp`, built by repeated multiplication so that
/// every evaluation path produces identical floating point results.
pub(crate) struct PowerTable {
    stride: usize,
    powers: Vec<Complex>,
}

impl PowerTable {
    pub(crate) fn new(values: &[Complex], max_exp: u32) -> Self {
        let stride = max_exp as usize + 1;
        let mut powers = Vec::with_capacity(values.len() * stride);
        for &v in values {
            let mut acc = Complex::new(1.0, 0.0);
            powers.push(acc);
            for _ in 0..max_exp {
                acc *= v;
                powers.push(acc);
            }
        }
        Self { stride, powers }
    }

    #[inline]
    pub(crate) fn pow(&self, k: usize, e: u32) -> Complex {
        self.powers[k * self.stride + e as usize]
    }

    #[inline]
    pub(crate) fn monomial(&self, exps: &[u32]) -> Complex {
        let mut acc = Complex::new(1.0, 0.0);
        for (k, &e) in exps.iter().enumerate() {
            if e > 0 {
                acc *= self.pow(k, e);
            }
        }
        acc
    }

    /// `d/dx_j` of the monomial, or `None` when it does not depend on `x_j`.
    #[inline]
    pub(crate) fn partial(&self, exps: &[u32], j: usize) -> Option<Complex> {
        let ej = exps[j];
        if ej == 0 {
            return None;
        }
        let mut acc = Complex::new(ej as f64, 0.0);
        for (k, &e) in exps.iter().enumerate() {
            let e = if k == j { e - 1 } else { e };
            if e > 0 {
                acc *= self.pow(k, e);
            }
        }
        Some(acc)
    }
}

macro_rules! point_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
        #[serde(transparent)]
        pub struct $name(Vec<Complex>);

        impl $name {
            /// Fails if any coordinate is NaN or infinite.
            pub fn new(values: Vec<Complex>) -> Result<Self, DimensionError> {
                if values.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
                    Ok(Self(values))
                } else {
                    Err(DimensionError::NonFinite)
                }
            }

            pub fn from_real(values: &[f64]) -> Self {
                Self(values.iter().map(|&v| Complex::new(v, 0.0)).collect())
            }

            pub fn values(&self) -> &[Complex] {
                &self.0
            }

            pub fn into_inner(self) -> Vec<Complex> {
                self.0
            }

            /// Infinity norm: largest modulus among the coordinates.
            pub fn norm_inf(&self) -> f64 {
                norm_inf(&self.0)
            }
        }

        impl std::ops::Deref for $name {
            type Target = [Complex];
            fn deref(&self) -> &[Complex] {
                &self.0
            }
        }
    };
}

point_newtype!(
    /// A point `p` in parameter space.
    ParameterPoint
);
point_newtype!(
    /// A point `z` in variable space.
    VarPoint
);

impl VarPoint {
    pub(crate) fn from_vec_unchecked(values: Vec<Complex>) -> Self {
        Self(values)
    }

    /// Infinity-norm distance to another point.
    pub fn distance(&self, other: &VarPoint) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn norm_inf(values: &[Complex]) -> f64 {
    values.iter().map(|c| c.norm()).fold(0.0, f64::max)
}
