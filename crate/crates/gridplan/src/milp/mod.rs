//! Solver-agnostic mixed-integer linear model: variables, linear
//! constraints, and a linear minimization objective, with deterministic
//! naming and MPS export.
//!
//! Variable and constraint order is insertion order everywhere, so the same
//! build sequence always produces the same model and the same MPS bytes.

mod mps;

pub use mps::{parse_mps, MpsDocument, MpsFormat, ParsedMps};

use crate::error::{Error, Result};
use std::collections::HashMap;

/// Handle to a variable in a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VarId(pub(crate) usize);

impl VarId {
    /// Position of the variable in insertion (and MPS column) order.
    pub fn index(&self) -> usize {
        self.0
    }
}

/// Handle to a constraint in a [`MilpModel`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConstrId(pub(crate) usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Continuous,
    Binary,
}

/// Constraint sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone)]
pub struct Constraint {
    pub name: String,
    /// Canonical terms: unique variables, no zero coefficients.
    pub terms: Vec<(VarId, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// A minimization MILP.
#[derive(Debug, Clone, Default)]
pub struct MilpModel {
    pub name: String,
    /// Identifier of the builder that produced this model (e.g. a
    /// formulation id); recorded in solve results for traceability.
    pub formulation: String,
    vars: Vec<Variable>,
    constrs: Vec<Constraint>,
    objective: Vec<(VarId, f64)>,
    var_index: HashMap<String, VarId>,
    constr_index: HashMap<String, ConstrId>,
}

/// Build a structured variable/constraint name: `family(i1,i2,...)`.
pub fn name(family: &str, indices: &[&str]) -> String {
    if indices.is_empty() {
        family.to_string()
    } else {
        format!("{}({})", family, indices.join(","))
    }
}

fn canonicalize(terms: &[(VarId, f64)]) -> Vec<(VarId, f64)> {
    let mut acc: Vec<(VarId, f64)> = Vec::with_capacity(terms.len());
    let mut seen: HashMap<VarId, usize> = HashMap::with_capacity(terms.len());
    for &(v, c) in terms {
        match seen.get(&v) {
            Some(&i) => acc[i].1 += c,
            None => {
                seen.insert(v, acc.len());
                acc.push((v, c));
            }
        }
    }
    acc.retain(|&(_, c)| c != 0.0);
    acc
}

impl MilpModel {
    pub fn new(name: impl Into<String>, formulation: impl Into<String>) -> Self {
        MilpModel {
            name: name.into(),
            formulation: formulation.into(),
            ..Default::default()
        }
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constrs(&self) -> usize {
        self.constrs.len()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn constrs(&self) -> &[Constraint] {
        &self.constrs
    }

    pub fn objective(&self) -> &[(VarId, f64)] {
        &self.objective
    }

    pub fn add_var(
        &mut self,
        name: impl Into<String>,
        kind: VarKind,
        lower: f64,
        upper: f64,
    ) -> Result<VarId> {
        let name = name.into();
        if self.var_index.contains_key(&name) {
            return Err(Error::Model(format!("duplicate variable name {name}")));
        }
        if lower > upper {
            return Err(Error::Model(format!(
                "variable {name}: lower bound {lower} above upper bound {upper}"
            )));
        }
        if kind == VarKind::Binary && !(lower >= 0.0 && upper <= 1.0) {
            return Err(Error::Model(format!(
                "binary variable {name} must have bounds within [0,1]"
            )));
        }
        let id = VarId(self.vars.len());
        self.vars.push(Variable {
            name: name.clone(),
            kind,
            lower,
            upper,
        });
        self.var_index.insert(name, id);
        Ok(id)
    }

    /// Continuous variable shorthand.
    pub fn add_cont(&mut self, name: impl Into<String>, lower: f64, upper: f64) -> Result<VarId> {
        self.add_var(name, VarKind::Continuous, lower, upper)
    }

    /// Binary variable shorthand.
    pub fn add_bin(&mut self, name: impl Into<String>) -> Result<VarId> {
        self.add_var(name, VarKind::Binary, 0.0, 1.0)
    }

    /// Tighten or fix bounds on an existing variable. Used to pin
    /// investment decisions when enumerating plans.
    pub fn set_bounds(&mut self, var: VarId, lower: f64, upper: f64) -> Result<()> {
        if lower > upper {
            return Err(Error::Model(format!(
                "set_bounds on {}: lower {lower} above upper {upper}",
                self.vars[var.0].name
            )));
        }
        let v = &mut self.vars[var.0];
        v.lower = lower;
        v.upper = upper;
        Ok(())
    }

    /// Fix a variable to a single value.
    pub fn fix_var(&mut self, var: VarId, value: f64) -> Result<()> {
        self.set_bounds(var, value, value)
    }

    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: &[(VarId, f64)],
        sense: Sense,
        rhs: f64,
    ) -> Result<ConstrId> {
        let name = name.into();
        if self.constr_index.contains_key(&name) {
            return Err(Error::Model(format!("duplicate constraint name {name}")));
        }
        for &(v, _) in terms {
            if v.0 >= self.vars.len() {
                return Err(Error::Model(format!(
                    "constraint {name} references unknown variable id {}",
                    v.0
                )));
            }
        }
        let id = ConstrId(self.constrs.len());
        self.constrs.push(Constraint {
            name: name.clone(),
            terms: canonicalize(terms),
            sense,
            rhs,
        });
        self.constr_index.insert(name, id);
        Ok(id)
    }

    /// Replace the (minimization) objective. Terms are canonicalized.
    pub fn set_objective(&mut self, terms: &[(VarId, f64)]) {
        self.objective = canonicalize(terms);
    }

    /// Add to the current objective.
    pub fn add_objective_terms(&mut self, terms: &[(VarId, f64)]) {
        let mut all = self.objective.clone();
        all.extend_from_slice(terms);
        self.objective = canonicalize(&all);
    }

    pub fn var_id(&self, name: &str) -> Option<VarId> {
        self.var_index.get(name).copied()
    }

    pub fn var(&self, id: VarId) -> &Variable {
        &self.vars[id.0]
    }

    pub fn objective_coeff(&self, var: VarId) -> f64 {
        self.objective
            .iter()
            .find(|(v, _)| *v == var)
            .map(|&(_, c)| c)
            .unwrap_or(0.0)
    }

    /// Objective value of an assignment given by variable index.
    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective
            .iter()
            .map(|&(v, c)| c * values[v.0])
            .sum()
    }

    /// Number of variables per family prefix (text before `(`).
    pub fn var_family_counts(&self) -> std::collections::BTreeMap<String, usize> {
        let mut counts = std::collections::BTreeMap::new();
        for v in &self.vars {
            let fam = v.name.split('(').next().unwrap_or(&v.name).to_string();
            *counts.entry(fam).or_insert(0) += 1;
        }
        counts
    }

    /// Number of constraints per family prefix.
    pub fn constr_family_counts(&self) -> std::collections::BTreeMap<String, usize> {
        let mut counts = std::collections::BTreeMap::new();
        for c in &self.constrs {
            let fam = c.name.split('(').next().unwrap_or(&c.name).to_string();
            *counts.entry(fam).or_insert(0) += 1;
        }
        counts
    }

    /// SHA-256 of the free-format MPS rendering; identifies the instance.
    pub fn instance_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let doc = self.to_mps(MpsFormat::Free);
        let mut h = Sha256::new();
        h.update(doc.text.as_bytes());
        let out = h.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}
