//! Real-count grids, JSON dumps, failure reports and timing tables.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::mesh::{index_to_multi, PointSource};
use crate::paramhom::{MitigationRound, PointResult, PointStatus};
use crate::poly::ParameterPoint;
use crate::scheduler::TimingRecord;
use crate::store::{CollectedData, CollectedHeader};
use crate::Complex;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExportError {
    #[error("points came from a file, so there is no grid to export")]
    NoGrid,
    #[error("axis {0} out of range")]
    BadAxis(usize),
    #[error("unknown parameter `{0}`")]
    UnknownParameter(String),
    #[error("invalid JSON: {0}")]
    Json(String),
}

/// Resolves parameter names to axis indices.
pub fn axis_indices(param_names: &[String], selection: &[String]) -> Result<Vec<usize>, ExportError> {
    selection
        .iter()
        .map(|name| {
            param_names
                .iter()
                .position(|p| p == name)
                .ok_or_else(|| ExportError::UnknownParameter(name.clone()))
        })
        .collect()
}

/// One row per point in index order: grid position and value for each
/// selected axis, then solution counts and status. An empty selection
/// means every axis.
pub fn export_real_count_grid(data: &CollectedData, axes: &[usize]) -> Result<String, ExportError> {
    let PointSource::Mesh(spec) = &data.header.source else {
        return Err(ExportError::NoGrid);
    };
    let names = &data.header.param_names;
    let axes: Vec<usize> = if axes.is_empty() { (0..spec.axes().len()).collect() } else { axes.to_vec() };
    if let Some(&bad) = axes.iter().find(|&&a| a >= spec.axes().len()) {
        return Err(ExportError::BadAxis(bad));
    }
    let mut out = String::from("index");
    for &a in &axes {
        let _ = write!(out, ",i_{0},{0}", names[a]);
    }
    out.push_str(",n_solutions,n_real,status\n");
    for r in &data.records {
        let multi = index_to_multi(spec, r.index).map_err(|_| ExportError::BadAxis(r.index))?;
        let _ = write!(out, "{}", r.index);
        for &a in &axes {
            let _ = write!(out, ",{},{:?}", multi[a], r.p[a].re);
        }
        let _ = writeln!(out, ",{},{},{}", r.solutions.len(), r.solutions.n_real, r.status.as_str());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonHeader {
    pub variables: Vec<String>,
    pub parameters: Vec<String>,
    pub p0: ParameterPoint,
    pub gamma: Complex,
    pub seed: u64,
    pub total_degree: usize,
    pub generic_solutions: usize,
    pub total_paths_tracked: usize,
    pub source: PointSource,
}

/// Schema of the JSON dump. Complex numbers are `[re, im]` arrays.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JsonExport {
    pub format: String,
    pub header: JsonHeader,
    pub points: Vec<PointResult>,
}

impl From<&CollectedData> for JsonExport {
    fn from(d: &CollectedData) -> Self {
        let h = &d.header;
        Self {
            format: "homsweep-solutions-v1".into(),
            header: JsonHeader {
                variables: h.var_names.clone(),
                parameters: h.param_names.clone(),
                p0: h.p0.clone(),
                gamma: h.gamma,
                seed: h.seed,
                total_degree: h.total_degree,
                generic_solutions: h.generic_solutions,
                total_paths_tracked: h.total_paths_tracked,
                source: h.source.clone(),
            },
            points: d.records.clone(),
        }
    }
}

impl From<JsonExport> for CollectedData {
    fn from(j: JsonExport) -> Self {
        let h = j.header;
        CollectedData {
            header: CollectedHeader {
                var_names: h.variables,
                param_names: h.parameters,
                p0: h.p0,
                gamma: h.gamma,
                seed: h.seed,
                total_degree: h.total_degree,
                generic_solutions: h.generic_solutions,
                total_paths_tracked: h.total_paths_tracked,
                source: h.source,
            },
            records: j.points,
        }
    }
}

pub fn export_solutions_json(data: &CollectedData) -> String {
    serde_json::to_string_pretty(&JsonExport::from(data)).expect("plain data serializes")
}

pub fn parse_solutions_json(text: &str) -> Result<CollectedData, ExportError> {
    serde_json::from_str::<JsonExport>(text)
        .map(CollectedData::from)
        .map_err(|e| ExportError::Json(e.to_string()))
}

fn fmt_complex(c: Complex) -> String {
    if c.im < 0.0 {
        format!("{}-{}i", c.re, -c.im)
    } else {
        format!("{}+{}i", c.re, c.im)
    }
}

/// Points needing attention: anything not `Complete`, plus points that
/// were only completed by a retry.
pub fn write_failure_report(results: &[PointResult], rounds: &[MitigationRound], param_names: &[String]) -> String {
    let listed: Vec<&PointResult> = results
        .iter()
        .filter(|r| r.status != PointStatus::Complete || r.retries_used > 0)
        .collect();
    let mut out = String::new();
    let _ = writeln!(out, "{} failed points", listed.len());
    let unresolved = results.iter().filter(|r| r.status == PointStatus::Unresolved).count();
    if unresolved > 0 {
        let _ = writeln!(out, "{unresolved} unresolved");
    }
    for round in rounds {
        let _ = write!(out, "round {}: start", round.round);
        for c in round.p_prime.iter() {
            let _ = write!(out, " {}", fmt_complex(*c));
        }
        match &round.abandoned {
            Some(why) => {
                let _ = writeln!(out, ", abandoned ({why})");
            }
            None => {
                let _ = writeln!(out, ", {} points retried", round.points_retried);
            }
        }
    }
    for r in listed {
        let _ = writeln!(
            out,
            "\npoint {} status {} retries_used {} path_failures {} diverged {} singular {}",
            r.index,
            r.status.as_str(),
            r.retries_used,
            r.path_failures,
            r.diverged_paths,
            r.n_singular()
        );
        let params: Vec<String> = r
            .p
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let name = param_names.get(i).map(String::as_str).unwrap_or("?");
                format!("{name}={}", fmt_complex(*c))
            })
            .collect();
        let _ = writeln!(out, "  parameters {}", params.join(" "));
        let mut flags = Vec::new();
        if r.n_singular() > 0 {
            flags.push("Singular-endpoint");
        }
        if r.diverged_paths > 0 {
            flags.push("Diverged-paths");
        }
        if !flags.is_empty() {
            let _ = writeln!(out, "  flags {}", flags.join(" "));
        }
        for h in &r.history {
            let kinds: Vec<String> = h.kinds.iter().map(|(k, n)| format!("{}={n}", k.as_str())).collect();
            let _ = writeln!(
                out,
                "  attempt {}: {} solutions, {} failures, {} diverged, {} crossings{}{}",
                h.attempt,
                h.n_solutions,
                h.failures,
                h.diverged,
                h.crossings,
                if kinds.is_empty() { "" } else { " " },
                kinds.join(" ")
            );
        }
        if let Some(d) = &r.diagnostic {
            let _ = writeln!(out, "  diagnostic {d}");
        }
    }
    out
}

pub fn write_timings_csv(timings: &[TimingRecord]) -> String {
    let mut out = String::from("index,attempt,track_secs,serialize_secs\n");
    for t in timings {
        let _ = writeln!(out, "{},{},{:.6e},{:.6e}", t.index, t.attempt, t.track_secs, t.serialize_secs);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{Axis, MeshSpec};
    use crate::paramhom::AttemptSummary;
    use crate::poly::VarPoint;
    use crate::tracker::{ClassifiedSolutions, Multiplicity, PathStatus};

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn record(index: usize, p: &[f64], n_real: usize, status: PointStatus) -> PointResult {
        let sols = ClassifiedSolutions {
            distinct: vec![VarPoint::new(vec![c(1.0, 0.0)]).unwrap(), VarPoint::new(vec![c(-1.0, 1e-3)]).unwrap()],
            multiplicity_flags: vec![Multiplicity::Nonsingular; 2],
            real_flags: vec![true, n_real == 2],
            n_real,
            residuals: vec![1e-15, 2e-15],
            multiplicities: vec![1, 1],
        };
        PointResult {
            index,
            p: ParameterPoint::from_real(p),
            solutions: sols,
            status,
            retries_used: 0,
            path_failures: 0,
            diverged_paths: 0,
            history: vec![AttemptSummary {
                attempt: 0,
                n_solutions: 2,
                failures: 0,
                diverged: 0,
                crossings: 0,
                kinds: vec![],
            }],
            diagnostic: None,
        }
    }

    fn data() -> CollectedData {
        let spec = MeshSpec::new(vec![
            Axis::Range { min: 0.0, max: 1.0, count: 2 },
            Axis::Range { min: 0.0, max: 2.0, count: 2 },
        ])
        .unwrap();
        let records = (0..4)
            .map(|i| {
                let p = spec.point(i).unwrap();
                record(i, &[p[0].re, p[1].re], i % 2 + 1, PointStatus::Complete)
            })
            .collect();
        CollectedData {
            header: CollectedHeader {
                var_names: vec!["z".into()],
                param_names: vec!["x".into(), "y".into()],
                p0: ParameterPoint::new(vec![c(0.1, 0.9), c(0.2, 0.8)]).unwrap(),
                gamma: c(0.0, 1.0),
                seed: 3,
                total_degree: 2,
                generic_solutions: 2,
                total_paths_tracked: 10,
                source: PointSource::Mesh(spec),
            },
            records,
        }
    }

    #[test]
    fn grid_csv_rows_and_columns() {
        let csv = export_real_count_grid(&data(), &[]).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "index,i_x,x,i_y,y,n_solutions,n_real,status");
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[2], "1,1,1.0,0,0.0,2,2,Complete");
        assert_eq!(lines[3], "2,0,0.0,1,2.0,2,1,Complete");
        let csv = export_real_count_grid(&data(), &[1]).unwrap();
        assert!(csv.starts_with("index,i_y,y,n_solutions"));
        assert_eq!(export_real_count_grid(&data(), &[2]), Err(ExportError::BadAxis(2)));
    }

    #[test]
    fn grid_requires_mesh() {
        let mut d = data();
        d.header.source = PointSource::File("pts".into());
        assert_eq!(export_real_count_grid(&d, &[]), Err(ExportError::NoGrid));
    }

    #[test]
    fn axis_names_resolve() {
        let names = vec!["x".to_string(), "y".to_string()];
        assert_eq!(axis_indices(&names, &["y".into()]).unwrap(), vec![1]);
        assert!(axis_indices(&names, &["w".into()]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let mut d = data();
        d.records.truncate(1);
        let text = export_solutions_json(&d);
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        let sols = &v["points"][0]["solutions"]["distinct"];
        assert_eq!(sols.as_array().unwrap().len(), 2);
        assert_eq!(sols[1][0], serde_json::json!([-1.0, 1e-3]));
        assert_eq!(parse_solutions_json(&text).unwrap(), d);
    }

    #[test]
    fn report_without_failures() {
        let d = data();
        let r = write_failure_report(&d.records, &[], &d.header.param_names);
        assert_eq!(r, "0 failed points\n");
    }

    #[test]
    fn report_lists_retried_and_singular_points() {
        let d = data();
        let mut recs = d.records.clone();
        recs[1].retries_used = 1;
        recs[1].history.insert(
            0,
            AttemptSummary {
                attempt: 0,
                n_solutions: 1,
                failures: 1,
                diverged: 0,
                crossings: 0,
                kinds: vec![(PathStatus::MinStepFailure, 1)],
            },
        );
        recs[2].status = PointStatus::HadFailures;
        recs[2].solutions.multiplicity_flags[0] = Multiplicity::Singular;
        let r = write_failure_report(&recs, &[], &d.header.param_names);
        assert!(r.starts_with("2 failed points\n"));
        assert!(r.contains("point 1 status Complete retries_used 1"));
        assert!(r.contains("MinStepFailure=1"));
        assert!(r.contains("point 2 status HadFailures"));
        assert!(r.contains("flags Singular-endpoint"));
    }

    #[test]
    fn timings_table() {
        let t = vec![TimingRecord { index: 0, attempt: 0, track_secs: 0.5, serialize_secs: 0.0 }];
        let csv = write_timings_csv(&t);
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,0,5.000000e-1"));
    }
}
