use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{MilpError, MilpModel, VarKind, TOLERANCE};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    FeasibleWithinGap,
    TimeLimitFeasible,
    Infeasible,
    Unbounded,
    Error,
}

impl SolveStatus {
    pub fn is_feasible(self) -> bool {
        matches!(
            self,
            SolveStatus::Optimal | SolveStatus::FeasibleWithinGap | SolveStatus::TimeLimitFeasible
        )
    }

    fn keyword(self) -> &'static str {
        match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::FeasibleWithinGap => "feasible_within_gap",
            SolveStatus::TimeLimitFeasible => "time_limit_feasible",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::Unbounded => "unbounded",
            SolveStatus::Error => "error",
        }
    }

    fn from_keyword(s: &str) -> Option<SolveStatus> {
        let s = s.trim().to_ascii_lowercase();
        [
            SolveStatus::Optimal,
            SolveStatus::FeasibleWithinGap,
            SolveStatus::TimeLimitFeasible,
            SolveStatus::Infeasible,
            SolveStatus::Unbounded,
            SolveStatus::Error,
        ]
        .into_iter()
        .find(|st| st.keyword() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum SolverFailure {
    /// The solver command could not be started.
    Missing(String),
    /// It ran but exited abnormally or was killed.
    Crashed(String),
    /// Its output could not be mapped onto the model.
    BadOutput(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub status: SolveStatus,
    /// Indexed by `VarId`; empty unless the status is feasible.
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Objective including the model offset, recomputed from snapped values.
    pub objective: f64,
    pub achieved_gap: Option<f64>,
    /// Seconds.
    pub wall_time: f64,
    pub failure: Option<SolverFailure>,
}

impl Solution {
    pub fn failed(status: SolveStatus, failure: Option<SolverFailure>, wall_time: f64) -> Solution {
        Solution { status, values: Vec::new(), objective: f64::NAN, achieved_gap: None, wall_time, failure }
    }

    pub fn value(&self, v: super::VarId) -> f64 {
        self.values.get(v.0).copied().unwrap_or(0.0)
    }

    /// True when the snapped value of a binary/integer is at least one.
    pub fn is_on(&self, v: super::VarId) -> bool {
        self.value(v) > 0.5
    }
}

/// Snaps integer variables and checks bounds. Values within [`TOLERANCE`]
/// of an integer are rounded; anything further off is an error.
pub fn snap_values(model: &MilpModel, raw: &[f64]) -> Result<Vec<f64>, MilpError> {
    let mut out = Vec::with_capacity(raw.len());
    for (var, &x) in model.variables().iter().zip(raw) {
        let mut v = x;
        if var.is_integral() {
            let r = x.round();
            if (x - r).abs() > TOLERANCE {
                return Err(MilpError::NonIntegral { name: var.name.clone(), value: x });
            }
            v = if r == 0.0 { 0.0 } else { r };
        }
        if v < var.lower - TOLERANCE || v > var.upper + TOLERANCE {
            return Err(MilpError::OutOfBounds { name: var.name.clone(), value: x, lower: var.lower, upper: var.upper });
        }
        if var.kind == VarKind::Binary && v != 0.0 && v != 1.0 {
            return Err(MilpError::NonIntegral { name: var.name.clone(), value: x });
        }
        out.push(v);
    }
    Ok(out)
}

/// Solution text as produced by the `lp-solve` command: `#`-prefixed header
/// lines followed by one `name value` line per non-zero variable.
pub fn write_solution(model: &MilpModel, sol: &Solution) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# status: {}", sol.status.keyword());
    if sol.status.is_feasible() {
        let _ = writeln!(out, "# objective: {}", sol.objective);
    }
    if let Some(g) = sol.achieved_gap {
        let _ = writeln!(out, "# gap: {g}");
    }
    let _ = writeln!(out, "# wall_time: {}", sol.wall_time);
    for (var, &x) in model.variables().iter().zip(&sol.values) {
        if x != 0.0 {
            let _ = writeln!(out, "{} {}", var.name, x);
        }
    }
    out
}

/// Maps solver output back onto `model`.
///
/// Accepted value lines are `name value` and the four-column
/// `index name value reduced-cost` layout. Variables that are not listed
/// are zero. A missing status header means the solver reported values,
/// which is taken as optimal.
pub fn read_solution(text: &str, model: &MilpModel) -> Result<Solution, MilpError> {
    let mut status = None;
    let mut gap = None;
    let mut wall = 0.0;
    let mut raw = vec![0.0; model.variables().len()];
    let mut any_value = false;
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let bad = |msg: &str| MilpError::SolutionFormat { line: line_no, msg: msg.to_string() };
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(h) = t.strip_prefix('#') {
            let Some((key, val)) = h.split_once(':') else { continue };
            match key.trim() {
                "status" => status = Some(SolveStatus::from_keyword(val).ok_or_else(|| bad("unknown status"))?),
                "gap" => gap = Some(val.trim().parse::<f64>().map_err(|_| bad("bad gap"))?),
                "wall_time" => wall = val.trim().parse::<f64>().map_err(|_| bad("bad wall time"))?,
                _ => {}
            }
            continue;
        }
        let cols: Vec<&str> = t.split_whitespace().collect();
        let (name, value) = match cols.as_slice() {
            [name, value] => (*name, *value),
            [index, name, value, _] if index.parse::<usize>().is_ok() => (*name, *value),
            _ if status.is_none() && !any_value => {
                // Free-form first line such as "Optimal - objective value 17".
                let lower = t.to_ascii_lowercase();
                status = Some(if lower.starts_with("optimal") {
                    SolveStatus::Optimal
                } else if lower.contains("infeasible") {
                    SolveStatus::Infeasible
                } else if lower.contains("unbounded") {
                    SolveStatus::Unbounded
                } else if lower.contains("stopped") || lower.contains("time") {
                    SolveStatus::TimeLimitFeasible
                } else {
                    return Err(bad("unrecognized header"));
                });
                continue;
            }
            _ => return Err(bad("expected `name value`")),
        };
        let v = model.var(name).ok_or_else(|| MilpError::UnknownVariable(name.to_string()))?;
        raw[v.0] = value.parse::<f64>().map_err(|_| bad("bad value"))?;
        any_value = true;
    }
    let status = status.unwrap_or(SolveStatus::Optimal);
    if !status.is_feasible() {
        return Ok(Solution::failed(status, None, wall));
    }
    let values = snap_values(model, &raw)?;
    Ok(Solution {
        status,
        objective: model.objective_value(&values),
        values,
        achieved_gap: gap,
        wall_time: wall,
        failure: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::milp::{Cmp, VarId};

    fn one_var() -> MilpModel {
        let mut m = MilpModel::new("one");
        let x = m.add_integer("x", f64::INFINITY).unwrap();
        m.add_row("demo", [(x, 1.0)], Cmp::Ge, 3.0).unwrap();
        m.add_objective(x, 1.0);
        m
    }

    #[test]
    fn plain_value_line() {
        let s = read_solution("x 3\n", &one_var()).unwrap();
        assert_eq!(s.values, vec![3.0]);
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.objective, 3.0);
    }

    #[test]
    fn missing_variable_is_zero() {
        let mut m = one_var();
        m.add_binary("y").unwrap();
        let s = read_solution("# status: optimal\nx 3\n", &m).unwrap();
        assert_eq!(s.value(VarId(1)), 0.0);
    }

    #[test]
    fn binary_snapping() {
        let mut m = MilpModel::new("b");
        m.add_binary("y").unwrap();
        let s = read_solution("y 0.9999999\n", &m).unwrap();
        assert_eq!(s.values, vec![1.0]);
        let err = read_solution("y 0.4\n", &m).unwrap_err();
        assert!(matches!(err, MilpError::NonIntegral { .. }));
        assert!(err.to_string().contains("non-integral"));
    }

    #[test]
    fn unknown_name_is_an_error() {
        assert_eq!(
            read_solution("z 1\n", &one_var()).unwrap_err(),
            MilpError::UnknownVariable("z".into())
        );
    }

    #[test]
    fn four_column_layout() {
        let text = "Optimal - objective value 3.00000000\n      0 x                      3                       1\n";
        let s = read_solution(text, &one_var()).unwrap();
        assert_eq!(s.values, vec![3.0]);
    }

    #[test]
    fn infeasible_header() {
        let s = read_solution("# status: infeasible\n", &one_var()).unwrap();
        assert_eq!(s.status, SolveStatus::Infeasible);
        assert!(s.values.is_empty());
    }

    #[test]
    fn written_text_reads_back() {
        let m = one_var();
        let sol = Solution {
            status: SolveStatus::FeasibleWithinGap,
            values: vec![3.0],
            objective: 3.0,
            achieved_gap: Some(0.01),
            wall_time: 0.5,
            failure: None,
        };
        let back = read_solution(&write_solution(&m, &sol), &m).unwrap();
        assert_eq!(back, sol);
    }
}
