//! Solver-agnostic mixed-integer linear programs.
//!
//! A [`MilpModel`] is built in memory, written as CPLEX-style LP text for
//! external solvers ([`lp_format`]), and solved through a [`Backend`]. Every
//! solution, whichever backend produced it, is mapped back onto the model's
//! variables by name and snapped to integers before anyone reads it.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod backend;
pub mod lp_format;
pub mod solution;

pub use backend::{solve, Backend, ExternalBackend, HighsBackend, SolveLimits};
pub use lp_format::{parse_model, write_model};
pub use solution::{read_solution, write_solution, Solution, SolveStatus, SolverFailure};

/// Tolerance for snapping integer variables and for checking rows.
pub const TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, PartialEq)]
pub enum MilpError {
    #[error("variable name `{0}` declared twice")]
    NameCollision(String),
    #[error("variable name `{0}` is not a valid LP identifier")]
    BadName(String),
    #[error("row `{row}` references variable #{index}, model has {count}")]
    DanglingVariable { row: String, index: usize, count: usize },
    #[error("non-finite coefficient in `{0}`")]
    NonFinite(String),
    #[error("LP text line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("solution names unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("non-integral value {value} for integer variable `{name}`")]
    NonIntegral { name: String, value: f64 },
    #[error("value {value} for `{name}` outside bounds [{lower}, {upper}]")]
    OutOfBounds { name: String, value: f64, lower: f64, upper: f64 },
    #[error("solution text line {line}: {msg}")]
    SolutionFormat { line: usize, msg: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarKind {
    Binary,
    Integer,
    /// Only produced when parsing foreign LP text; builders never emit it.
    Continuous,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

impl Variable {
    pub fn is_integral(&self) -> bool {
        !matches!(self.kind, VarKind::Continuous)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cmp {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

impl Cmp {
    pub fn holds(self, lhs: f64, rhs: f64, tol: f64) -> bool {
        match self {
            Cmp::Le => lhs <= rhs + tol,
            Cmp::Eq => (lhs - rhs).abs() <= tol,
            Cmp::Ge => lhs >= rhs - tol,
        }
    }
}

impl fmt::Display for Cmp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Cmp::Le => "<=",
            Cmp::Eq => "=",
            Cmp::Ge => ">=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub name: String,
    /// Which family of constraint this row belongs to, e.g. `lsp_flow`.
    pub tag: String,
    pub terms: Vec<(VarId, f64)>,
    pub cmp: Cmp,
    pub rhs: f64,
}

impl Row {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|(v, c)| c * values[v.0]).sum()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MilpModel {
    pub name: String,
    vars: Vec<Variable>,
    by_name: HashMap<String, VarId>,
    rows: Vec<Row>,
    objective: Vec<(VarId, f64)>,
    objective_index: HashMap<VarId, usize>,
    /// Constant added to every objective value; not part of the LP body.
    pub objective_offset: f64,
    /// Rows with no variables left whose constant side is already violated.
    infeasible_rows: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelStats {
    pub variables: usize,
    pub binaries: usize,
    pub integers: usize,
    pub rows: usize,
}

fn valid_name(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    // Leading e/E followed by digits reads as an exponent in some parsers.
    if name.starts_with(['e', 'E']) && name[1..].chars().all(|c| c.is_ascii_digit()) {
        return false;
    }
    name.chars()
        .all(|c| c.is_ascii_alphanumeric() || "_.!#$%&(){}@~'".contains(c))
}

impl MilpModel {
    pub fn new(name: impl Into<String>) -> MilpModel {
        MilpModel { name: name.into(), ..Default::default() }
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId, MilpError> {
        let name = name.into();
        if !valid_name(&name) {
            return Err(MilpError::BadName(name));
        }
        if lower.is_nan() || upper.is_nan() || lower == f64::INFINITY || upper == f64::NEG_INFINITY {
            return Err(MilpError::NonFinite(name));
        }
        if self.by_name.contains_key(&name) {
            return Err(MilpError::NameCollision(name));
        }
        let (lower, upper) = match kind {
            VarKind::Binary => (0.0, 1.0),
            _ => (lower, upper),
        };
        let id = VarId(self.vars.len());
        self.by_name.insert(name.clone(), id);
        self.vars.push(Variable { name, kind, lower, upper });
        Ok(id)
    }

    pub fn add_binary(&mut self, name: impl Into<String>) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Non-negative general integer with an optional upper bound.
    pub fn add_integer(&mut self, name: impl Into<String>, upper: f64) -> Result<VarId, MilpError> {
        self.add_var(name, VarKind::Integer, 0.0, upper)
    }

    /// Adds `terms cmp rhs`. Duplicate terms are merged and zero
    /// coefficients dropped; a row left without variables is either
    /// discarded (satisfied) or remembered as proof of infeasibility.
    pub fn add_row(
        &mut self,
        tag: &str,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) -> Result<(), MilpError> {
        let name = format!("r{}", self.rows.len() + self.infeasible_rows.len());
        self.add_named_row(name, tag, terms, cmp, rhs)
    }

    pub fn add_named_row(
        &mut self,
        name: String,
        tag: &str,
        terms: impl IntoIterator<Item = (VarId, f64)>,
        cmp: Cmp,
        rhs: f64,
    ) -> Result<(), MilpError> {
        if !rhs.is_finite() {
            return Err(MilpError::NonFinite(name));
        }
        let mut merged: Vec<(VarId, f64)> = Vec::new();
        let mut pos: HashMap<VarId, usize> = HashMap::new();
        for (v, c) in terms {
            if v.0 >= self.vars.len() {
                return Err(MilpError::DanglingVariable { row: name, index: v.0, count: self.vars.len() });
            }
            if !c.is_finite() {
                return Err(MilpError::NonFinite(name));
            }
            match pos.get(&v) {
                Some(&k) => merged[k].1 += c,
                None => {
                    pos.insert(v, merged.len());
                    merged.push((v, c));
                }
            }
        }
        merged.retain(|(_, c)| *c != 0.0);
        if merged.is_empty() {
            if !cmp.holds(0.0, rhs, TOLERANCE) {
                self.infeasible_rows.push(name);
            }
            return Ok(());
        }
        self.rows.push(Row { name, tag: tag.to_string(), terms: merged, cmp, rhs });
        Ok(())
    }

    pub fn add_objective(&mut self, v: VarId, coef: f64) {
        if coef == 0.0 {
            return;
        }
        match self.objective_index.get(&v) {
            Some(&k) => self.objective[k].1 += coef,
            None => {
                self.objective_index.insert(v, self.objective.len());
                self.objective.push((v, coef));
            }
        }
    }

    pub fn var(&self, name: &str) -> Option<VarId> {
        self.by_name.get(name).copied()
    }

    pub fn variable(&self, v: VarId) -> &Variable {
        &self.vars[v.0]
    }

    pub fn variables(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn rows_mut(&mut self) -> &mut [Row] {
        &mut self.rows
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn infeasible_rows(&self) -> &[String] {
        &self.infeasible_rows
    }

    pub fn is_trivially_infeasible(&self) -> bool {
        !self.infeasible_rows.is_empty()
    }

    pub fn has_integers(&self) -> bool {
        self.vars.iter().any(Variable::is_integral)
    }

    pub fn stats(&self) -> ModelStats {
        ModelStats {
            variables: self.vars.len(),
            binaries: self.vars.iter().filter(|v| v.kind == VarKind::Binary).count(),
            integers: self.vars.iter().filter(|v| v.kind == VarKind::Integer).count(),
            rows: self.rows.len(),
        }
    }

    pub fn rows_tagged<'a>(&'a self, tag: &'a str) -> impl Iterator<Item = &'a Row> + 'a {
        self.rows.iter().filter(move |r| r.tag == tag)
    }

    /// Objective value of an assignment, offset included.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective_offset + self.objective.iter().map(|(v, c)| c * values[v.0]).sum::<f64>()
    }

    /// Names of rows and bounds violated by `values` beyond [`TOLERANCE`].
    pub fn violated(&self, values: &[f64]) -> Vec<String> {
        let mut out: Vec<String> = self.infeasible_rows.clone();
        for (var, &x) in self.vars.iter().zip(values) {
            if x < var.lower - TOLERANCE || x > var.upper + TOLERANCE {
                out.push(format!("bound {}", var.name));
            }
        }
        for row in &self.rows {
            if !row.cmp.holds(row.activity(values), row.rhs, TOLERANCE) {
                out.push(format!("{} [{}]", row.name, row.tag));
            }
        }
        out
    }

    /// Structural check: finite coefficients, valid references.
    pub fn validate(&self) -> Result<(), MilpError> {
        for row in &self.rows {
            for (v, c) in &row.terms {
                if v.0 >= self.vars.len() {
                    return Err(MilpError::DanglingVariable {
                        row: row.name.clone(),
                        index: v.0,
                        count: self.vars.len(),
                    });
                }
                if !c.is_finite() {
                    return Err(MilpError::NonFinite(row.name.clone()));
                }
            }
        }
        for (v, c) in &self.objective {
            if v.0 >= self.vars.len() {
                return Err(MilpError::DanglingVariable {
                    row: "objective".into(),
                    index: v.0,
                    count: self.vars.len(),
                });
            }
            if !c.is_finite() {
                return Err(MilpError::NonFinite("objective".into()));
            }
        }
        if !self.objective_offset.is_finite() {
            return Err(MilpError::NonFinite("objective offset".into()));
        }
        Ok(())
    }

    /// Row name to tag, in row order. Serialized next to LP files.
    pub fn row_tags(&self) -> Vec<(String, String)> {
        self.rows.iter().map(|r| (r.name.clone(), r.tag.clone())).collect()
    }

    /// Copy with every row tag cleared, for comparing against parsed text.
    pub fn without_tags(&self) -> MilpModel {
        let mut m = self.clone();
        for r in &mut m.rows {
            r.tag.clear();
        }
        m
    }
}
