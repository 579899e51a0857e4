//! Uniform parameter meshes and parameter-point files.

use serde::{Deserialize, Serialize};

use crate::poly::ParameterPoint;
use crate::Complex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("axis {axis}: count must be at least 1")]
    ZeroCount { axis: usize },
    #[error("axis {axis}: min {min} exceeds max {max}")]
    Reversed { axis: usize, min: f64, max: f64 },
    #[error("axis {axis}: non-finite bound")]
    NonFinite { axis: usize },
    #[error("mesh has no axes")]
    Empty,
    #[error("index {index} out of range for {len} points")]
    OutOfRange { index: usize, len: usize },
    #[error("multi-index has {got} entries, mesh has {expected} axes")]
    Arity { expected: usize, got: usize },
    #[error("line {line}: expected {expected} numbers, found {found}")]
    TokenCount { line: usize, expected: usize, found: usize },
    #[error("line {line}: cannot parse {token:?} as a number")]
    BadNumber { line: usize, token: String },
    #[error("parameter file holds no points")]
    NoPoints,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Axis {
    Fixed(Complex),
    Range { min: f64, max: f64, count: usize },
}

impl Axis {
    pub fn count(&self) -> usize {
        match *self {
            Axis::Fixed(_) => 1,
            Axis::Range { count, .. } => count,
        }
    }

    /// Value at grid position `i`; both ends are hit exactly.
    pub fn value(&self, i: usize) -> Complex {
        match *self {
            Axis::Fixed(v) => v,
            Axis::Range { min, max, count } => {
                let v = if count == 1 || i == 0 {
                    min
                } else if i + 1 == count {
                    max
                } else {
                    min + (max - min) * (i as f64) / ((count - 1) as f64)
                };
                Complex::new(v, 0.0)
            }
        }
    }
}

/// One descriptor per parameter, in declaration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshSpec {
    axes: Vec<Axis>,
}

impl MeshSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self, MeshError> {
        if axes.is_empty() {
            return Err(MeshError::Empty);
        }
        for (axis, a) in axes.iter().enumerate() {
            match *a {
                Axis::Fixed(v) if !(v.re.is_finite() && v.im.is_finite()) => return Err(MeshError::NonFinite { axis }),
                Axis::Range { min, max, count } => {
                    if !(min.is_finite() && max.is_finite()) {
                        return Err(MeshError::NonFinite { axis });
                    }
                    if count == 0 {
                        return Err(MeshError::ZeroCount { axis });
                    }
                    if min > max {
                        return Err(MeshError::Reversed { axis, min, max });
                    }
                }
                _ => {}
            }
        }
        Ok(Self { axes })
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn counts(&self) -> Vec<usize> {
        self.axes.iter().map(Axis::count).collect()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, index: usize) -> Result<ParameterPoint, MeshError> {
        let multi = index_to_multi(self, index)?;
        let values = self.axes.iter().zip(&multi).map(|(a, &i)| a.value(i)).collect();
        Ok(ParameterPoint::new(values).expect("validated axes are finite"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum PointSource {
    Mesh(MeshSpec),
    File(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointList {
    pub points: Vec<ParameterPoint>,
    pub source: PointSource,
}

impl PointList {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Cartesian product of the axes, first parameter varying fastest.
pub fn generate_mesh(spec: &MeshSpec) -> PointList {
    let points = (0..spec.len()).map(|i| spec.point(i).expect("in range")).collect();
    PointList {
        points,
        source: PointSource::Mesh(spec.clone()),
    }
}

pub fn index_to_multi(spec: &MeshSpec, index: usize) -> Result<Vec<usize>, MeshError> {
    let len = spec.len();
    if index >= len {
        return Err(MeshError::OutOfRange { index, len });
    }
    let mut rest = index;
    Ok(spec
        .counts()
        .into_iter()
        .map(|n| {
            let i = rest % n;
            rest /= n;
            i
        })
        .collect())
}

pub fn multi_to_index(spec: &MeshSpec, multi: &[usize]) -> Result<usize, MeshError> {
    let counts = spec.counts();
    if multi.len() != counts.len() {
        return Err(MeshError::Arity {
            expected: counts.len(),
            got: multi.len(),
        });
    }
    let mut index = 0;
    for (&i, &n) in multi.iter().zip(&counts).rev() {
        if i >= n {
            return Err(MeshError::OutOfRange { index: i, len: n });
        }
        index = index * n + i;
    }
    Ok(index)
}

/// Parses `re im` pairs for `m` parameters, one point per line. Blank lines
/// and lines starting with `%` or `#` are skipped.
pub fn load_param_file(text: &str, m: usize, name: &str) -> Result<PointList, MeshError> {
    let mut points = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        if tokens.len() != 2 * m {
            return Err(MeshError::TokenCount {
                line: line_no,
                expected: 2 * m,
                found: tokens.len(),
            });
        }
        let nums = tokens
            .iter()
            .map(|t| match t.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(MeshError::BadNumber {
                    line: line_no,
                    token: t.to_string(),
                }),
            })
            .collect::<Result<Vec<f64>, _>>()?;
        let values = nums.chunks(2).map(|c| Complex::new(c[0], c[1])).collect();
        points.push(ParameterPoint::new(values).expect("finite"));
    }
    if points.is_empty() {
        return Err(MeshError::NoPoints);
    }
    Ok(PointList {
        points,
        source: PointSource::File(name.to_string()),
    })
}

/// Inverse of [`load_param_file`], exact to the last bit.
pub fn write_param_file(points: &[ParameterPoint]) -> String {
    let mut out = String::new();
    for p in points {
        let line: Vec<String> = p.iter().flat_map(|c| [format!("{:?}", c.re), format!("{:?}", c.im)]).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
    out
}
