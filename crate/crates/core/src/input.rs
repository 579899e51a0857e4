//! Input files: a `CONFIG` section of `key: value;` settings, an `INPUT`
//! section holding the system, and either a `MESH` section or a
//! `parameter_file` setting naming the points to solve. An optional `P0`
//! section fixes the generic start point.
//!
//! ```text
//! CONFIG
//!   max_retries: 3;
//! END;
//! INPUT
//!   variable z;
//!   parameter x, y;
//!   function f;
//!   f = x^6 + y^6 + z^6 - 1;
//! END;
//! MESH
//!   x: range -1.5 1.5 200;
//!   y: range -1.5 1.5 200;
//! END;
//! P0
//!   x: 0.3 0.8;
//!   y: 0.6 0.1;
//! END;
//! ```

use std::path::{Path, PathBuf};

use crate::mesh::{Axis, MeshSpec};
use crate::paramhom::SolveSettings;
use crate::poly::{parse_system, ParamSystem, ParameterPoint, ParseError};
use crate::Complex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InputError {
    #[error("line {line}: {message}")]
    At { line: usize, message: String },
    #[error(transparent)]
    System(#[from] ParseError),
}

fn at<T>(line: usize, message: impl Into<String>) -> Result<T, InputError> {
    Err(InputError::At {
        line,
        message: message.into(),
    })
}

/// Settings that sit above the tracker: seeding, retries and parallelism.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSettings {
    pub solve: SolveSettings,
    pub seed: Option<u64>,
    pub max_retries: usize,
    pub workers: Option<usize>,
    pub buffer_mb: usize,
    pub batch_size: Option<usize>,
    pub verify_step1: bool,
    pub parameter_file: Option<PathBuf>,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            solve: SolveSettings::default(),
            seed: None,
            max_retries: 3,
            workers: None,
            buffer_mb: 64,
            batch_size: None,
            verify_step1: false,
            parameter_file: None,
        }
    }
}

fn normalize_key(key: &str) -> String {
    key.chars()
        .filter(|c| *c != '_' && *c != '-')
        .flat_map(char::to_lowercase)
        .collect()
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, String> {
    value.trim().parse().map_err(|_| format!("bad value `{}` for {key}", value.trim()))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, String> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        other => Err(format!("bad value `{other}` for {key}")),
    }
}

impl RunSettings {
    /// Applies one `key: value` setting. Keys ignore case, `_` and `-`.
    /// Relative paths resolve against `base_dir`.
    pub fn apply(&mut self, key: &str, value: &str, base_dir: &Path) -> Result<(), String> {
        let t = &mut self.solve.tracker;
        match normalize_key(key).as_str() {
            "initialstep" => t.initial_step = parse_value(key, value)?,
            "minstep" => t.min_step = parse_value(key, value)?,
            "maxstep" => t.max_step = parse_value(key, value)?,
            "newtontol" => t.newton_tol = parse_value(key, value)?,
            "maxnewtoniters" => t.max_newton_iters = parse_value(key, value)?,
            "maxnorm" => t.max_norm = parse_value(key, value)?,
            "maxsteps" => t.max_steps = parse_value(key, value)?,
            "tfinal" => t.t_final = parse_value(key, value)?,
            "endgameboundary" | "tendgame" => t.endgame_boundary = parse_value(key, value)?,
            "sharpeniters" => t.sharpen_iters = parse_value(key, value)?,
            "stepincreasefactor" => t.step_increase_factor = parse_value(key, value)?,
            "stepdecreasefactor" => t.step_decrease_factor = parse_value(key, value)?,
            "consecutivesuccessestogrow" => t.consecutive_successes_to_grow = parse_value(key, value)?,
            "deduptol" => self.solve.dedup_tol = parse_value(key, value)?,
            "realtol" => self.solve.real_tol = parse_value(key, value)?,
            "crossingtol" => self.solve.crossing_tol = parse_value(key, value)?,
            "divergenceisfailure" => self.solve.divergence_is_failure = parse_bool(key, value)?,
            "seed" => self.seed = Some(parse_value(key, value)?),
            "maxretries" => self.max_retries = parse_value(key, value)?,
            "workers" => self.workers = Some(parse_value(key, value)?),
            "buffermb" => self.buffer_mb = parse_value(key, value)?,
            "batchsize" => self.batch_size = Some(parse_value(key, value)?),
            "verifystep1" => self.verify_step1 = parse_bool(key, value)?,
            "parameterfile" => self.parameter_file = Some(base_dir.join(value.trim())),
            _ => return Err(format!("unknown setting `{key}`")),
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PointsSpec {
    Mesh(MeshSpec),
    File(PathBuf),
}

#[derive(Clone, Debug, PartialEq)]
pub struct InputFile {
    pub settings: RunSettings,
    pub system: ParamSystem,
    /// `None` when the file names no points; Step 1 can still run.
    pub points: Option<PointsSpec>,
    pub p0: Option<ParameterPoint>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Section {
    Config,
    Input,
    Mesh,
    P0,
}

/// `name: value` statements split on `;`, each tagged with its first line.
fn statements(lines: &[(usize, &str)]) -> Result<Vec<(usize, String, String)>, InputError> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    for &(line, text) in lines {
        for ch in text.chars() {
            if ch == ';' {
                let stmt = cur.trim();
                if !stmt.is_empty() {
                    let Some((k, v)) = stmt.split_once(':') else {
                        return at(start, format!("expected `name: value`, found `{stmt}`"));
                    };
                    out.push((start, k.trim().to_string(), v.trim().to_string()));
                }
                cur.clear();
            } else {
                if cur.trim().is_empty() && !ch.is_whitespace() {
                    start = line;
                }
                cur.push(ch);
            }
        }
        cur.push(' ');
    }
    if !cur.trim().is_empty() {
        return at(start, "missing `;`");
    }
    Ok(out)
}

fn strip_comment(line: &str) -> &str {
    match line.find(['%', '#']) {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_f64(tok: &str, line: usize) -> Result<f64, InputError> {
    match tok.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => at(line, format!("bad number `{tok}`")),
    }
}

fn param_slot(sys: &ParamSystem, name: &str, line: usize) -> Result<usize, InputError> {
    match sys.param_names().iter().position(|p| p == name) {
        Some(i) => Ok(i),
        None => at(line, format!("`{name}` is not a declared parameter")),
    }
}

fn parse_axis(value: &str, line: usize) -> Result<Axis, InputError> {
    let toks: Vec<&str> = value.split_whitespace().collect();
    match toks.first().map(|s| s.to_ascii_lowercase()).as_deref() {
        Some("range") if toks.len() == 4 => {
            let count = toks[3]
                .parse::<usize>()
                .or_else(|_| at(line, format!("bad count `{}`", toks[3])))?;
            Ok(Axis::Range {
                min: parse_f64(toks[1], line)?,
                max: parse_f64(toks[2], line)?,
                count,
            })
        }
        Some("fixed") if toks.len() == 2 || toks.len() == 3 => {
            let im = if toks.len() == 3 { parse_f64(toks[2], line)? } else { 0.0 };
            Ok(Axis::Fixed(Complex::new(parse_f64(toks[1], line)?, im)))
        }
        _ => at(line, format!("expected `range min max count` or `fixed re [im]`, found `{value}`")),
    }
}

/// A section tag, its header line and its `(line, text)` body.
type SectionBody<'a> = (Section, usize, Vec<(usize, &'a str)>);

/// Parses an input file. Relative paths inside it resolve against `base_dir`.
pub fn parse_input(text: &str, base_dir: &Path) -> Result<InputFile, InputError> {
    let mut sections: Vec<SectionBody> = Vec::new();
    let mut current: Option<SectionBody> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = strip_comment(raw).trim();
        match current.as_mut() {
            Some((sec, _, body)) => {
                if content.eq_ignore_ascii_case("END;") || content.eq_ignore_ascii_case("END") {
                    sections.push(current.take().unwrap());
                } else if *sec == Section::Input {
                    body.push((line, raw));
                } else {
                    body.push((line, strip_comment(raw)));
                }
            }
            None => {
                if content.is_empty() {
                    continue;
                }
                let sec = match content.trim_end_matches(';').trim().to_ascii_uppercase().as_str() {
                    "CONFIG" => Section::Config,
                    "INPUT" => Section::Input,
                    "MESH" => Section::Mesh,
                    "P0" => Section::P0,
                    _ => return at(line, format!("expected CONFIG, INPUT, MESH or P0, found `{content}`")),
                };
                if sections.iter().any(|(s, _, _)| *s == sec) {
                    return at(line, format!("section {sec:?} appears twice"));
                }
                current = Some((sec, line, Vec::new()));
            }
        }
    }
    if let Some((sec, line, _)) = current {
        return at(line, format!("section {sec:?} is missing END;"));
    }
    let find = |s: Section| sections.iter().find(|(k, _, _)| *k == s);

    let Some((_, _, input_lines)) = find(Section::Input) else {
        return at(1, "no INPUT section");
    };
    // Blank out everything else so parse errors keep file line numbers.
    let mut masked = vec![""; text.lines().count()];
    for &(line, raw) in input_lines {
        masked[line - 1] = raw;
    }
    let system = parse_system(&masked.join("\n"))?;

    let mut settings = RunSettings::default();
    if let Some((_, _, lines)) = find(Section::Config) {
        for (line, key, value) in statements(lines)? {
            settings.apply(&key, &value, base_dir).or_else(|m| at(line, m))?;
        }
    }

    let mut points = settings.parameter_file.clone().map(PointsSpec::File);
    if let Some((_, header, lines)) = find(Section::Mesh) {
        if points.is_some() {
            return at(*header, "give either a MESH section or parameter_file, not both");
        }
        let mut axes: Vec<Option<Axis>> = vec![None; system.num_params()];
        for (line, name, value) in statements(lines)? {
            let slot = param_slot(&system, &name, line)?;
            if axes[slot].is_some() {
                return at(line, format!("`{name}` appears twice in MESH"));
            }
            axes[slot] = Some(parse_axis(&value, line)?);
        }
        let axes = axes
            .into_iter()
            .enumerate()
            .map(|(i, a)| a.map_or_else(|| at(*header, format!("MESH lacks `{}`", system.param_names()[i])), Ok))
            .collect::<Result<Vec<_>, _>>()?;
        let spec = MeshSpec::new(axes).or_else(|e| at(*header, e.to_string()))?;
        points = Some(PointsSpec::Mesh(spec));
    }

    let p0 = match find(Section::P0) {
        None => None,
        Some((_, header, lines)) => {
            let mut vals: Vec<Option<Complex>> = vec![None; system.num_params()];
            for (line, name, value) in statements(lines)? {
                let slot = param_slot(&system, &name, line)?;
                let toks: Vec<&str> = value.split_whitespace().collect();
                let v = match toks.as_slice() {
                    [re, im] => Complex::new(parse_f64(re, line)?, parse_f64(im, line)?),
                    _ => return at(line, "expected `name: re im`"),
                };
                if vals[slot].replace(v).is_some() {
                    return at(line, format!("`{name}` appears twice in P0"));
                }
            }
            let vals = vals
                .into_iter()
                .enumerate()
                .map(|(i, v)| v.map_or_else(|| at(*header, format!("P0 lacks `{}`", system.param_names()[i])), Ok))
                .collect::<Result<Vec<_>, _>>()?;
            Some(ParameterPoint::new(vals).expect("finite"))
        }
    };

    Ok(InputFile {
        settings,
        system,
        points,
        p0,
    })
}

/// Reads a `P0`-style file: `re im` pairs for every parameter, on one or more lines.
pub fn parse_p0_file(text: &str, m: usize) -> Result<ParameterPoint, InputError> {
    let list = crate::mesh::load_param_file(text, m, "p0").map_err(|e| InputError::At {
        line: 0,
        message: e.to_string(),
    })?;
    match list.points.as_slice() {
        [p] => Ok(p.clone()),
        _ => at(0, format!("expected one point, found {}", list.points.len())),
    }
}
