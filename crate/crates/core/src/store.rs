//! Line-oriented text formats for Step 1 artifacts and collected sweep data.
//!
//! Floats are written in Rust's shortest round-trip form, so reading a file
//! back reproduces every value bit for bit.
//!
//! A collected file is a `#` header followed by one record per point:
//!
//! ```text
//! point <index> <status> retries <r> failures <f> diverged <d>
//! param <re> <im> ...
//! sol <N|S> <real 0|1> <residual> <multiplicity> <re> <im> ...
//! hist <attempt> <n_solutions> <failures> <diverged> <crossings> [<Kind>=<count> ...]
//! diag <text>
//! ```

use std::fmt::Write as _;
use std::str::FromStr;

use crate::mesh::{Axis, MeshSpec, PointSource};
use crate::paramhom::{AttemptSummary, PointResult, PointStatus, Step1Result};
use crate::poly::{ParamSystem, ParameterPoint, VarPoint};
use crate::tracker::{ClassifiedSolutions, Multiplicity, PathStatus};
use crate::Complex;

pub const COLLECTED_MAGIC: &str = "# homsweep collected";
pub const STEP1_MAGIC: &str = "# homsweep step1";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError {
        line,
        message: message.into(),
    })
}

fn push_complex(out: &mut String, values: &[Complex]) {
    for c in values {
        let _ = write!(out, " {:?} {:?}", c.re, c.im);
    }
}

fn parse_num<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T, FormatError> {
    match tok.map(str::parse::<T>) {
        Some(Ok(v)) => Ok(v),
        Some(Err(_)) => err(line, format!("bad {what}")),
        None => err(line, format!("missing {what}")),
    }
}

fn parse_complex_list(tokens: &[&str], line: usize) -> Result<Vec<Complex>, FormatError> {
    if !tokens.len().is_multiple_of(2) {
        return err(line, "odd number of real components");
    }
    tokens
        .chunks(2)
        .map(|c| {
            Ok(Complex::new(
                parse_num(Some(c[0]), line, "real part")?,
                parse_num(Some(c[1]), line, "imaginary part")?,
            ))
        })
        .collect()
}

fn expect_key(tok: Option<&str>, key: &str, line: usize) -> Result<(), FormatError> {
    if tok == Some(key) {
        Ok(())
    } else {
        err(line, format!("expected `{key}`"))
    }
}

fn write_solution_lines(out: &mut String, s: &ClassifiedSolutions) {
    for i in 0..s.len() {
        let flag = match s.multiplicity_flags[i] {
            Multiplicity::Nonsingular => 'N',
            Multiplicity::Singular => 'S',
        };
        let _ = write!(
            out,
            "sol {flag} {} {:?} {}",
            u8::from(s.real_flags[i]),
            s.residuals[i],
            s.multiplicities[i]
        );
        push_complex(out, &s.distinct[i]);
        out.push('\n');
    }
}

fn parse_solution_line(tokens: &[&str], line: usize, sols: &mut ClassifiedSolutions) -> Result<(), FormatError> {
    let flag = match tokens.first() {
        Some(&"N") => Multiplicity::Nonsingular,
        Some(&"S") => Multiplicity::Singular,
        _ => return err(line, "expected singularity flag N or S"),
    };
    let real = match tokens.get(1) {
        Some(&"1") => true,
        Some(&"0") => false,
        _ => return err(line, "expected real flag 0 or 1"),
    };
    let residual: f64 = parse_num(tokens.get(2).copied(), line, "residual")?;
    let mult: usize = parse_num(tokens.get(3).copied(), line, "multiplicity")?;
    let z = parse_complex_list(tokens.get(4..).unwrap_or(&[]), line)?;
    sols.distinct.push(VarPoint::new(z).map_err(|e| FormatError {
        line,
        message: e.to_string(),
    })?);
    sols.multiplicity_flags.push(flag);
    sols.real_flags.push(real);
    sols.residuals.push(residual);
    sols.multiplicities.push(mult);
    if real {
        sols.n_real += 1;
    }
    Ok(())
}

/// Appends the text of one point record.
pub fn write_point_record(out: &mut String, r: &PointResult) {
    let _ = writeln!(
        out,
        "point {} {} retries {} failures {} diverged {}",
        r.index,
        r.status.as_str(),
        r.retries_used,
        r.path_failures,
        r.diverged_paths
    );
    out.push_str("param");
    push_complex(out, &r.p);
    out.push('\n');
    write_solution_lines(out, &r.solutions);
    for h in &r.history {
        let _ = write!(
            out,
            "hist {} {} {} {} {}",
            h.attempt, h.n_solutions, h.failures, h.diverged, h.crossings
        );
        for (k, n) in &h.kinds {
            let _ = write!(out, " {}={n}", k.as_str());
        }
        out.push('\n');
    }
    if let Some(d) = &r.diagnostic {
        let _ = writeln!(out, "diag {}", d.replace('\n', " "));
    }
}

pub fn point_record_text(r: &PointResult) -> String {
    let mut s = String::new();
    write_point_record(&mut s, r);
    s
}

fn parse_path_status(s: &str) -> Option<PathStatus> {
    [
        PathStatus::Success,
        PathStatus::Diverged,
        PathStatus::MinStepFailure,
        PathStatus::NewtonFailure,
        PathStatus::MaxStepsExceeded,
    ]
    .into_iter()
    .find(|k| k.as_str() == s)
}

/// Parses a sequence of point records. `first_line` numbers the first line
/// of `lines` for error messages.
pub fn parse_point_records<'a>(
    lines: impl Iterator<Item = &'a str>,
    first_line: usize,
) -> Result<Vec<PointResult>, FormatError> {
    let mut out: Vec<PointResult> = Vec::new();
    for (offset, raw) in lines.enumerate() {
        let line = first_line + offset;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        let kind = tokens[0];
        if kind == "point" {
            let mut it = tokens[1..].iter().copied();
            let index = parse_num(it.next(), line, "index")?;
            let status = match it.next().and_then(PointStatus::parse) {
                Some(s) => s,
                None => return err(line, "bad status"),
            };
            expect_key(it.next(), "retries", line)?;
            let retries_used = parse_num(it.next(), line, "retries")?;
            expect_key(it.next(), "failures", line)?;
            let path_failures = parse_num(it.next(), line, "failures")?;
            expect_key(it.next(), "diverged", line)?;
            let diverged_paths = parse_num(it.next(), line, "diverged")?;
            out.push(PointResult {
                index,
                p: ParameterPoint::new(Vec::new()).unwrap(),
                solutions: ClassifiedSolutions::default(),
                status,
                retries_used,
                path_failures,
                diverged_paths,
                history: Vec::new(),
                diagnostic: None,
            });
            continue;
        }
        let Some(cur) = out.last_mut() else {
            return err(line, format!("`{kind}` line before any `point` line"));
        };
        match kind {
            "param" => {
                cur.p = ParameterPoint::new(parse_complex_list(&tokens[1..], line)?).map_err(|e| FormatError {
                    line,
                    message: e.to_string(),
                })?;
            }
            "sol" => parse_solution_line(&tokens[1..], line, &mut cur.solutions)?,
            "hist" => {
                let mut it = tokens[1..].iter().copied();
                let mut h = AttemptSummary {
                    attempt: parse_num(it.next(), line, "attempt")?,
                    n_solutions: parse_num(it.next(), line, "solution count")?,
                    failures: parse_num(it.next(), line, "failures")?,
                    diverged: parse_num(it.next(), line, "diverged")?,
                    crossings: parse_num(it.next(), line, "crossings")?,
                    kinds: Vec::new(),
                };
                for tok in it {
                    let Some((name, count)) = tok.split_once('=') else {
                        return err(line, "expected Kind=count");
                    };
                    let Some(kind) = parse_path_status(name) else {
                        return err(line, format!("unknown path status {name}"));
                    };
                    h.kinds.push((kind, parse_num(Some(count), line, "count")?));
                }
                cur.history.push(h);
            }
            "diag" => {
                cur.diagnostic = Some(trimmed.strip_prefix("diag").unwrap().trim_start().to_string());
            }
            other => return err(line, format!("unknown record line `{other}`")),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectedHeader {
    pub var_names: Vec<String>,
    pub param_names: Vec<String>,
    pub p0: ParameterPoint,
    pub gamma: Complex,
    pub seed: u64,
    /// Total-degree path count of Step 1.
    pub total_degree: usize,
    pub generic_solutions: usize,
    pub total_paths_tracked: usize,
    pub source: PointSource,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CollectedData {
    pub header: CollectedHeader,
    pub records: Vec<PointResult>,
}

fn axis_text(a: &Axis) -> String {
    match *a {
        Axis::Fixed(v) => format!("fixed {:?} {:?}", v.re, v.im),
        Axis::Range { min, max, count } => format!("range {min:?} {max:?} {count}"),
    }
}

fn parse_axis(text: &str, line: usize) -> Result<Axis, FormatError> {
    let t: Vec<&str> = text.split_whitespace().collect();
    match t.first() {
        Some(&"fixed") if t.len() == 3 => Ok(Axis::Fixed(Complex::new(
            parse_num(Some(t[1]), line, "value")?,
            parse_num(Some(t[2]), line, "value")?,
        ))),
        Some(&"range") if t.len() == 4 => Ok(Axis::Range {
            min: parse_num(Some(t[1]), line, "min")?,
            max: parse_num(Some(t[2]), line, "max")?,
            count: parse_num(Some(t[3]), line, "count")?,
        }),
        _ => err(line, format!("bad axis `{text}`")),
    }
}

impl CollectedData {
    /// Assembles the collected file for a finished sweep.
    pub fn from_sweep(
        sys: &ParamSystem,
        r1: &Step1Result,
        records: Vec<PointResult>,
        total_paths_tracked: usize,
        source: PointSource,
    ) -> Self {
        Self {
            header: CollectedHeader {
                var_names: sys.var_names().to_vec(),
                param_names: sys.param_names().to_vec(),
                p0: r1.p0.clone(),
                gamma: r1.gamma,
                seed: r1.seed,
                total_degree: r1.paths_tracked_step1,
                generic_solutions: r1.solutions.len(),
                total_paths_tracked,
                source,
            },
            records,
        }
    }

    pub fn to_text(&self) -> String {
        let h = &self.header;
        let mut out = String::new();
        let _ = writeln!(out, "{COLLECTED_MAGIC} v{FORMAT_VERSION}");
        let _ = writeln!(out, "# variables {}", h.var_names.join(" "));
        let _ = writeln!(out, "# parameters {}", h.param_names.join(" "));
        let _ = writeln!(out, "# points {}", self.records.len());
        out.push_str("# p0");
        push_complex(&mut out, &h.p0);
        out.push('\n');
        out.push_str("# gamma");
        push_complex(&mut out, &[h.gamma]);
        out.push('\n');
        let _ = writeln!(out, "# seed {}", h.seed);
        let _ = writeln!(out, "# total_degree {}", h.total_degree);
        let _ = writeln!(out, "# generic_solutions {}", h.generic_solutions);
        let _ = writeln!(out, "# total_paths_tracked {}", h.total_paths_tracked);
        match &h.source {
            PointSource::Mesh(spec) => {
                let axes: Vec<String> = spec.axes().iter().map(axis_text).collect();
                let _ = writeln!(out, "# mesh {}", axes.join(" ; "));
            }
            PointSource::File(name) => {
                let _ = writeln!(out, "# file {name}");
            }
        }
        for r in &self.records {
            write_point_record(&mut out, r);
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut lines = text.lines();
        let first = lines.next().unwrap_or("");
        let Some(version) = first.strip_prefix(COLLECTED_MAGIC) else {
            return err(1, "not a collected data file");
        };
        if version.trim() != format!("v{FORMAT_VERSION}") {
            return err(1, format!("unsupported version `{}`", version.trim()));
        }
        let mut var_names = None;
        let mut param_names = None;
        let mut n_points: Option<usize> = None;
        let mut p0 = None;
        let mut gamma = None;
        let mut seed = None;
        let mut total_degree = None;
        let mut generic_solutions = None;
        let mut total_paths_tracked = None;
        let mut source = None;
        let mut body_start = 2;
        for (i, raw) in text.lines().enumerate().skip(1) {
            let line = i + 1;
            let Some(rest) = raw.strip_prefix("# ") else {
                body_start = line;
                break;
            };
            body_start = line + 1;
            let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
            let words = || value.split_whitespace().map(String::from).collect::<Vec<_>>();
            let toks: Vec<&str> = value.split_whitespace().collect();
            match key {
                "variables" => var_names = Some(words()),
                "parameters" => param_names = Some(words()),
                "points" => n_points = Some(parse_num(Some(value.trim()), line, "point count")?),
                "p0" => {
                    p0 = Some(ParameterPoint::new(parse_complex_list(&toks, line)?).map_err(|e| FormatError {
                        line,
                        message: e.to_string(),
                    })?)
                }
                "gamma" => match parse_complex_list(&toks, line)?.as_slice() {
                    [g] => gamma = Some(*g),
                    _ => return err(line, "gamma needs one complex value"),
                },
                "seed" => seed = Some(parse_num(Some(value.trim()), line, "seed")?),
                "total_degree" => total_degree = Some(parse_num(Some(value.trim()), line, "total degree")?),
                "generic_solutions" => generic_solutions = Some(parse_num(Some(value.trim()), line, "count")?),
                "total_paths_tracked" => total_paths_tracked = Some(parse_num(Some(value.trim()), line, "count")?),
                "mesh" => {
                    let axes = value
                        .split(';')
                        .map(|a| parse_axis(a, line))
                        .collect::<Result<Vec<_>, _>>()?;
                    let spec = MeshSpec::new(axes).map_err(|e| FormatError {
                        line,
                        message: e.to_string(),
                    })?;
                    source = Some(PointSource::Mesh(spec));
                }
                "file" => source = Some(PointSource::File(value.to_string())),
                _ => return err(line, format!("unknown header key `{key}`")),
            }
        }
        let missing = |what: &str| FormatError {
            line: body_start,
            message: format!("header lacks `{what}`"),
        };
        let header = CollectedHeader {
            var_names: var_names.ok_or_else(|| missing("variables"))?,
            param_names: param_names.ok_or_else(|| missing("parameters"))?,
            p0: p0.ok_or_else(|| missing("p0"))?,
            gamma: gamma.ok_or_else(|| missing("gamma"))?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            total_degree: total_degree.ok_or_else(|| missing("total_degree"))?,
            generic_solutions: generic_solutions.ok_or_else(|| missing("generic_solutions"))?,
            total_paths_tracked: total_paths_tracked.ok_or_else(|| missing("total_paths_tracked"))?,
            source: source.ok_or_else(|| missing("mesh or file"))?,
        };
        let n_points = n_points.ok_or_else(|| missing("points"))?;
        let records = parse_point_records(text.lines().skip(body_start - 1), body_start)?;
        if records.len() != n_points {
            return err(body_start, format!("header says {n_points} points, found {}", records.len()));
        }
        if let Some((i, r)) = records.iter().enumerate().find(|(i, r)| r.index != *i) {
            return err(body_start, format!("record {i} carries index {}", r.index));
        }
        Ok(Self { header, records })
    }
}

/// Step 1 output together with the names it was computed for.
#[derive(Debug, Clone, PartialEq)]
pub struct Step1File {
    pub var_names: Vec<String>,
    pub param_names: Vec<String>,
    pub result: Step1Result,
}

impl Step1File {
    pub fn to_text(&self) -> String {
        let r = &self.result;
        let mut out = String::new();
        let _ = writeln!(out, "{STEP1_MAGIC} v{FORMAT_VERSION}");
        let _ = writeln!(out, "# variables {}", self.var_names.join(" "));
        let _ = writeln!(out, "# parameters {}", self.param_names.join(" "));
        let _ = writeln!(out, "# seed {}", r.seed);
        out.push_str("# p0");
        push_complex(&mut out, &r.p0);
        out.push('\n');
        out.push_str("# gamma");
        push_complex(&mut out, &[r.gamma]);
        out.push('\n');
        let _ = writeln!(out, "# total_degree {}", r.paths_tracked_step1);
        let _ = writeln!(out, "# path_failures {}", r.path_failures);
        let _ = writeln!(out, "# diverged {}", r.diverged);
        let _ = writeln!(out, "# singular_dropped {}", r.singular_dropped);
        let pairs: Vec<String> = r.crossings.iter().map(|(a, b)| format!("{a}-{b}")).collect();
        let _ = writeln!(out, "# crossings {}", pairs.join(" "));
        let _ = writeln!(out, "# solutions {}", r.solutions.len());
        write_solution_lines(&mut out, &r.solutions);
        out
    }

    pub fn parse(text: &str) -> Result<Self, FormatError> {
        let mut lines = text.lines().enumerate();
        let Some((_, first)) = lines.next() else {
            return err(1, "empty step1 file");
        };
        match first.strip_prefix(STEP1_MAGIC) {
            Some(v) if v.trim() == format!("v{FORMAT_VERSION}") => {}
            _ => return err(1, "not a step1 file"),
        }
        let mut names = (Vec::new(), Vec::new());
        let mut r = Step1Result {
            p0: ParameterPoint::new(Vec::new()).unwrap(),
            gamma: Complex::new(1.0, 0.0),
            solutions: ClassifiedSolutions::default(),
            paths_tracked_step1: 0,
            seed: 0,
            path_failures: 0,
            diverged: 0,
            singular_dropped: 0,
            crossings: Vec::new(),
        };
        let mut declared = None;
        for (i, raw) in lines {
            let line = i + 1;
            let toks: Vec<&str> = raw.split_whitespace().collect();
            if toks.is_empty() {
                continue;
            }
            if toks[0] == "sol" {
                parse_solution_line(&toks[1..], line, &mut r.solutions)?;
                continue;
            }
            if toks[0] != "#" || toks.len() < 2 {
                return err(line, "unexpected line");
            }
            let vals = &toks[2..];
            let one = || vals.first().copied();
            match toks[1] {
                "variables" => names.0 = vals.iter().map(|s| s.to_string()).collect(),
                "parameters" => names.1 = vals.iter().map(|s| s.to_string()).collect(),
                "seed" => r.seed = parse_num(one(), line, "seed")?,
                "p0" => {
                    r.p0 = ParameterPoint::new(parse_complex_list(vals, line)?).map_err(|e| FormatError {
                        line,
                        message: e.to_string(),
                    })?
                }
                "gamma" => match parse_complex_list(vals, line)?.as_slice() {
                    [g] => r.gamma = *g,
                    _ => return err(line, "gamma needs one complex value"),
                },
                "total_degree" => r.paths_tracked_step1 = parse_num(one(), line, "total degree")?,
                "path_failures" => r.path_failures = parse_num(one(), line, "count")?,
                "diverged" => r.diverged = parse_num(one(), line, "count")?,
                "singular_dropped" => r.singular_dropped = parse_num(one(), line, "count")?,
                "crossings" => {
                    for pair in vals {
                        let Some((a, b)) = pair.split_once('-') else {
                            return err(line, "expected a-b pair");
                        };
                        r.crossings.push((parse_num(Some(a), line, "index")?, parse_num(Some(b), line, "index")?));
                    }
                }
                "solutions" => declared = Some(parse_num::<usize>(one(), line, "count")?),
                other => return err(line, format!("unknown header key `{other}`")),
            }
        }
        if declared != Some(r.solutions.len()) {
            return err(1, "solution count does not match header");
        }
        Ok(Self {
            var_names: names.0,
            param_names: names.1,
            result: r,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn sample_solutions() -> ClassifiedSolutions {
        ClassifiedSolutions {
            distinct: vec![
                VarPoint::new(vec![c(0.1, -2.0e-300), c(1.0 / 3.0, 5.0)]).unwrap(),
                VarPoint::new(vec![c(-7.5, 0.0), c(1e10, -1e-10)]).unwrap(),
            ],
            multiplicity_flags: vec![Multiplicity::Nonsingular, Multiplicity::Singular],
            real_flags: vec![false, true],
            n_real: 1,
            residuals: vec![1.2345e-13, f64::INFINITY],
            multiplicities: vec![1, 3],
        }
    }

    fn sample_record(index: usize) -> PointResult {
        PointResult {
            index,
            p: ParameterPoint::new(vec![c(0.5, 0.0), c(-1.5, 0.25)]).unwrap(),
            solutions: sample_solutions(),
            status: PointStatus::HadFailures,
            retries_used: 1,
            path_failures: 0,
            diverged_paths: 2,
            history: vec![
                AttemptSummary {
                    attempt: 0,
                    n_solutions: 1,
                    failures: 1,
                    diverged: 2,
                    crossings: 0,
                    kinds: vec![(PathStatus::Diverged, 2), (PathStatus::MinStepFailure, 1)],
                },
                AttemptSummary {
                    attempt: 1,
                    n_solutions: 2,
                    failures: 0,
                    diverged: 2,
                    crossings: 0,
                    kinds: vec![(PathStatus::Diverged, 2)],
                },
            ],
            diagnostic: Some("note with  spaces".into()),
        }
    }

    fn sample_data(source: PointSource) -> CollectedData {
        CollectedData {
            header: CollectedHeader {
                var_names: vec!["a".into(), "b".into()],
                param_names: vec!["x".into(), "y".into()],
                p0: ParameterPoint::new(vec![c(0.1, 0.2), c(0.3, 0.4)]).unwrap(),
                gamma: c(0.6, 0.8),
                seed: u64::MAX,
                total_degree: 4,
                generic_solutions: 2,
                total_paths_tracked: 12,
                source,
            },
            records: (0..3).map(sample_record).collect(),
        }
    }

    #[test]
    fn collected_round_trip_mesh_and_file() {
        let mesh = MeshSpec::new(vec![
            Axis::Range { min: -1.5, max: 1.5, count: 3 },
            Axis::Fixed(c(7.63, -0.5)),
        ])
        .unwrap();
        for source in [PointSource::Mesh(mesh), PointSource::File("pts.txt".into())] {
            let d = sample_data(source);
            let back = CollectedData::parse(&d.to_text()).unwrap();
            assert_eq!(back, d);
        }
    }

    #[test]
    fn collected_rejects_count_mismatch() {
        let d = sample_data(PointSource::File("x".into()));
        let text = d.to_text().replace("# points 3", "# points 4");
        assert!(CollectedData::parse(&text).is_err());
        assert!(CollectedData::parse("hello\n").is_err());
    }

    #[test]
    fn collected_empty_sweep() {
        let mut d = sample_data(PointSource::File("x".into()));
        d.records.clear();
        assert_eq!(CollectedData::parse(&d.to_text()).unwrap(), d);
    }

    #[test]
    fn record_errors_have_lines() {
        let e = parse_point_records("point 0 Complete retries 0 failures 0 diverged 0\nsol Q 1 0 1 1 0\n".lines(), 1)
            .unwrap_err();
        assert_eq!(e.line, 2);
        assert!(parse_point_records("sol N 1 0 1 1 0\n".lines(), 1).is_err());
    }

    #[test]
    fn step1_round_trip() {
        let f = Step1File {
            var_names: vec!["z".into()],
            param_names: vec!["p".into()],
            result: Step1Result {
                p0: ParameterPoint::new(vec![c(0.25, 0.75)]).unwrap(),
                gamma: c(0.0, -1.0),
                solutions: sample_solutions(),
                paths_tracked_step1: 81,
                seed: 42,
                path_failures: 1,
                diverged: 2,
                singular_dropped: 3,
                crossings: vec![(1, 4), (7, 9)],
            },
        };
        assert_eq!(Step1File::parse(&f.to_text()).unwrap(), f);
    }

    proptest! {
        #[test]
        fn record_round_trip(vals in prop::collection::vec(any::<f64>().prop_filter("finite", |v| v.is_finite()), 4..20),
                             retries in 0usize..5, idx in 0usize..1000) {
            let mut r = sample_record(idx);
            r.retries_used = retries;
            r.p = ParameterPoint::new(vals.chunks_exact(2).map(|w| c(w[0], w[1])).collect()).unwrap();
            let back = parse_point_records(point_record_text(&r).lines(), 1).unwrap();
            prop_assert_eq!(back, vec![r]);
        }
    }
}
