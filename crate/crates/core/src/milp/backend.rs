use std::path::PathBuf;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use highs::{HighsModelStatus, HighsSolutionStatus, RowProblem, Sense};
use serde::{Deserialize, Serialize};

use super::solution::snap_values;
use super::{read_solution, write_model, Cmp, MilpModel, Solution, SolveStatus, SolverFailure};

/// Gaps at or below this count as proven optimal.
const OPTIMAL_GAP: f64 = 1e-9;
/// Grace period on top of the time limit before an external solver is killed.
const KILL_SLACK: Duration = Duration::from_secs(5);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveLimits {
    /// Relative MIP gap, e.g. `0.01` for 1 %.
    pub optimality_gap: f64,
    pub time_limit: Duration,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits { optimality_gap: 0.0, time_limit: Duration::from_secs(600) }
    }
}

pub trait Backend: Send + Sync {
    fn name(&self) -> String;
    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Solution;
}

/// In-process HiGHS.
#[derive(Debug, Clone, Default)]
pub struct HighsBackend {
    pub seed: i32,
}

impl Backend for HighsBackend {
    fn name(&self) -> String {
        "highs".into()
    }

    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Solution {
        let start = Instant::now();
        let mut pb = RowProblem::default();
        let mut obj = vec![0.0; model.variables().len()];
        for &(v, c) in model.objective() {
            obj[v.0] += c;
        }
        let cols: Vec<_> = model
            .variables()
            .iter()
            .zip(&obj)
            .map(|(var, &c)| {
                pb.add_column_with_integrality(c, var.lower..=var.upper, var.is_integral())
            })
            .collect();
        for row in model.rows() {
            let terms: Vec<_> = row.terms.iter().map(|&(v, c)| (cols[v.0], c)).collect();
            match row.cmp {
                Cmp::Le => pb.add_row(..=row.rhs, terms),
                Cmp::Ge => pb.add_row(row.rhs.., terms),
                Cmp::Eq => pb.add_row(row.rhs..=row.rhs, terms),
            }
        }
        let mut m = pb.optimise(Sense::Minimise);
        m.make_quiet();
        m.set_option("mip_rel_gap", limits.optimality_gap.max(0.0));
        m.set_option("time_limit", limits.time_limit.as_secs_f64().max(0.001));
        m.set_option("random_seed", self.seed);
        m.set_option("threads", 1);
        let solved = match m.try_solve() {
            Ok(s) => s,
            Err(e) => {
                return Solution::failed(
                    SolveStatus::Error,
                    Some(SolverFailure::Crashed(format!("{e:?}"))),
                    start.elapsed().as_secs_f64(),
                )
            }
        };
        let has_solution = solved.primal_solution_status() == HighsSolutionStatus::Feasible;
        let gap = if model.has_integers() { solved.mip_gap() } else { 0.0 };
        let status = match solved.status() {
            HighsModelStatus::Optimal if gap <= OPTIMAL_GAP || !gap.is_finite() => SolveStatus::Optimal,
            HighsModelStatus::Optimal => SolveStatus::FeasibleWithinGap,
            HighsModelStatus::ReachedTimeLimit if has_solution => SolveStatus::TimeLimitFeasible,
            HighsModelStatus::Infeasible => SolveStatus::Infeasible,
            HighsModelStatus::Unbounded | HighsModelStatus::UnboundedOrInfeasible => SolveStatus::Unbounded,
            other => {
                let wall = start.elapsed().as_secs_f64();
                return Solution::failed(
                    SolveStatus::Error,
                    Some(SolverFailure::BadOutput(format!("highs status {other:?}"))),
                    wall,
                );
            }
        };
        let wall = start.elapsed().as_secs_f64();
        match snap_values(model, solved.get_solution().columns()) {
            Ok(values) => Solution {
                status,
                objective: model.objective_value(&values),
                values,
                achieved_gap: Some(if gap.is_finite() { gap } else { 0.0 }),
                wall_time: wall,
                failure: None,
            },
            Err(e) => Solution::failed(SolveStatus::Error, Some(SolverFailure::BadOutput(e.to_string())), wall),
        }
    }
}

/// Runs a solver as a child process on LP text.
///
/// `command` is split on whitespace. The placeholders `{lp}`, `{sol}`,
/// `{gap}` and `{time}` are replaced by the model path, the solution path,
/// the relative gap and the time limit in seconds. The solver must write
/// the solution file in the format read by [`read_solution`].
#[derive(Debug, Clone)]
pub struct ExternalBackend {
    pub command: String,
    /// Keep model, solution and row-tag files here instead of a temp dir.
    pub keep: Option<PathBuf>,
}

impl ExternalBackend {
    fn run(&self, model: &MilpModel, limits: &SolveLimits) -> Result<Solution, (SolveStatus, SolverFailure)> {
        let crashed = |m: String| (SolveStatus::Error, SolverFailure::Crashed(m));
        let temp;
        let dir = match &self.keep {
            Some(d) => {
                std::fs::create_dir_all(d).map_err(|e| crashed(e.to_string()))?;
                d.clone()
            }
            None => {
                temp = tempfile::tempdir().map_err(|e| crashed(e.to_string()))?;
                temp.path().to_path_buf()
            }
        };
        let lp_path = dir.join("model.lp");
        let sol_path = dir.join("model.sol");
        let text = write_model(model).map_err(|e| crashed(e.to_string()))?;
        std::fs::write(&lp_path, text).map_err(|e| crashed(e.to_string()))?;
        let tags = serde_json::to_string_pretty(&model.row_tags()).unwrap_or_default();
        std::fs::write(dir.join("rows.json"), tags).map_err(|e| crashed(e.to_string()))?;
        let _ = std::fs::remove_file(&sol_path);

        let secs = limits.time_limit.as_secs_f64();
        let args: Vec<String> = self
            .command
            .split_whitespace()
            .map(|a| {
                a.replace("{lp}", &lp_path.to_string_lossy())
                    .replace("{sol}", &sol_path.to_string_lossy())
                    .replace("{gap}", &limits.optimality_gap.to_string())
                    .replace("{time}", &secs.to_string())
            })
            .collect();
        let Some((prog, rest)) = args.split_first() else {
            return Err((SolveStatus::Error, SolverFailure::Missing("empty solver command".into())));
        };
        let start = Instant::now();
        let mut child = Command::new(prog)
            .args(rest)
            .stdin(Stdio::null())
            .stdout(Stdio::null())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|e| (SolveStatus::Error, SolverFailure::Missing(format!("{prog}: {e}"))))?;
        let deadline = limits.time_limit.mul_f64(1.1) + KILL_SLACK;
        let status = loop {
            match child.try_wait() {
                Ok(Some(st)) => break st,
                Ok(None) if start.elapsed() > deadline => {
                    let _ = child.kill();
                    let _ = child.wait();
                    return Err(crashed(format!("killed after {:.1}s", start.elapsed().as_secs_f64())));
                }
                Ok(None) => std::thread::sleep(Duration::from_millis(10)),
                Err(e) => return Err(crashed(e.to_string())),
            }
        };
        let wall = start.elapsed().as_secs_f64();
        if !status.success() {
            let mut err = String::new();
            if let Some(mut s) = child.stderr.take() {
                use std::io::Read;
                let _ = s.read_to_string(&mut err);
            }
            return Err(crashed(format!("{status}: {}", err.trim())));
        }
        let sol_text = std::fs::read_to_string(&sol_path)
            .map_err(|e| (SolveStatus::Error, SolverFailure::BadOutput(format!("no solution file: {e}"))))?;
        let mut sol = read_solution(&sol_text, model)
            .map_err(|e| (SolveStatus::Error, SolverFailure::BadOutput(e.to_string())))?;
        sol.wall_time = wall;
        Ok(sol)
    }
}

impl Backend for ExternalBackend {
    fn name(&self) -> String {
        format!("external:{}", self.command)
    }

    fn solve(&self, model: &MilpModel, limits: &SolveLimits) -> Solution {
        match self.run(model, limits) {
            Ok(s) => s,
            Err((status, failure)) => Solution::failed(status, Some(failure), 0.0),
        }
    }
}

/// Solves `model`, short-cutting models with no variables or a row that
/// was already violated when built.
pub fn solve(backend: &dyn Backend, model: &MilpModel, limits: &SolveLimits) -> Solution {
    if model.is_trivially_infeasible() {
        return Solution::failed(SolveStatus::Infeasible, None, 0.0);
    }
    if model.variables().is_empty() {
        return Solution {
            status: SolveStatus::Optimal,
            values: Vec::new(),
            objective: model.objective_offset,
            achieved_gap: Some(0.0),
            wall_time: 0.0,
            failure: None,
        };
    }
    backend.solve(model, limits)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn knapsack() -> MilpModel {
        // min -5a - 4b - 3c  s.t. 2a + 3b + c <= 5
        let mut m = MilpModel::new("knap");
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        let c = m.add_binary("c").unwrap();
        m.add_row("cap", [(a, 2.0), (b, 3.0), (c, 1.0)], Cmp::Le, 5.0).unwrap();
        m.add_objective(a, -5.0);
        m.add_objective(b, -4.0);
        m.add_objective(c, -3.0);
        m.objective_offset = 10.0;
        m
    }

    #[test]
    fn highs_solves_knapsack() {
        let s = solve(&HighsBackend::default(), &knapsack(), &SolveLimits::default());
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.values, vec![1.0, 1.0, 0.0]);
        assert_eq!(s.objective, 1.0);
    }

    #[test]
    fn highs_reports_infeasible() {
        let mut m = MilpModel::new("inf");
        let a = m.add_binary("a").unwrap();
        let b = m.add_binary("b").unwrap();
        m.add_row("x", [(a, 1.0), (b, 1.0)], Cmp::Ge, 3.0).unwrap();
        assert_eq!(solve(&HighsBackend::default(), &m, &SolveLimits::default()).status, SolveStatus::Infeasible);
    }

    #[test]
    fn empty_model_keeps_offset() {
        let mut m = MilpModel::new("empty");
        m.objective_offset = -8.0;
        let s = solve(&HighsBackend::default(), &m, &SolveLimits::default());
        assert_eq!((s.status, s.objective), (SolveStatus::Optimal, -8.0));
    }

    #[test]
    fn missing_external_solver() {
        let be = ExternalBackend { command: "/nonexistent/solver {lp} {sol}".into(), keep: None };
        let s = solve(&be, &knapsack(), &SolveLimits::default());
        assert!(matches!(s.failure, Some(SolverFailure::Missing(_))));
    }

    #[test]
    fn external_shell_solver() {
        let dir = tempfile::tempdir().unwrap();
        let script = dir.path().join("fake.sh");
        std::fs::write(&script, "#!/bin/sh\nprintf '# status: optimal\\na 1\\nb 1\\n' > \"$2\"\n").unwrap();
        let be = ExternalBackend { command: format!("sh {} {{lp}} {{sol}}", script.display()), keep: None };
        let s = solve(&be, &knapsack(), &SolveLimits::default());
        assert_eq!(s.status, SolveStatus::Optimal);
        assert_eq!(s.objective, 1.0);
    }
}
