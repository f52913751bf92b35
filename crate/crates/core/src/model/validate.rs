use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::doc::{ContinuousExpr, Cpf, ModelDoc, ScopedFunction, VariableKind, VariableSpec};

/// One broken invariant, located by a dotted path into the document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub location: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.location, self.message)
    }
}

struct Checker<'a> {
    vars: HashMap<&'a str, &'a VariableSpec>,
    found: Vec<Violation>,
}

impl<'a> Checker<'a> {
    fn push(&mut self, location: impl Into<String>, message: impl Into<String>) {
        self.found.push(Violation {
            location: location.into(),
            message: message.into(),
        });
    }

    fn finite(&mut self, loc: &str, what: &str, v: f64) {
        if !v.is_finite() {
            self.push(loc, format!("{what} must be finite, got {v}"));
        }
    }

    fn scoped(&mut self, loc: &str, f: &'a ScopedFunction) {
        let mut rows = 1usize;
        let mut seen = HashSet::new();
        for name in f.discrete_scope.iter().chain(&f.continuous_scope) {
            if !seen.insert(name.as_str()) {
                self.push(loc, format!("variable \"{name}\" appears twice in scope"));
            }
        }
        for name in &f.discrete_scope {
            match self.vars.get(name.as_str()) {
                None => self.push(loc, format!("undeclared variable \"{name}\" in discrete_scope")),
                Some(v) if v.kind != VariableKind::Discrete => {
                    self.push(loc, format!("variable \"{name}\" in discrete_scope is continuous"))
                }
                Some(v) => rows = rows.saturating_mul(v.domain_size.unwrap_or(1)),
            }
        }
        for name in &f.continuous_scope {
            match self.vars.get(name.as_str()) {
                None => self.push(loc, format!("undeclared variable \"{name}\" in continuous_scope")),
                Some(v) if v.kind != VariableKind::Continuous => {
                    self.push(loc, format!("variable \"{name}\" in continuous_scope is discrete"))
                }
                _ => {}
            }
        }
        if f.table.len() != rows {
            self.push(
                loc,
                format!("table has {} entries, expected {rows} (one per discrete assignment)", f.table.len()),
            );
        }
        for (k, e) in f.table.iter().enumerate() {
            self.expr(&format!("{loc}.table[{k}]"), e, &f.continuous_scope);
        }
    }

    fn expr(&mut self, loc: &str, e: &ContinuousExpr, scope: &[String]) {
        for name in e.variables() {
            if !scope.iter().any(|s| s == name) {
                if self.vars.contains_key(name) {
                    self.push(loc, format!("expression uses \"{name}\" which is not in continuous_scope"));
                } else {
                    self.push(loc, format!("expression uses undeclared variable \"{name}\""));
                }
            }
        }
        match e {
            ContinuousExpr::Constant { value } => self.finite(loc, "constant", *value),
            ContinuousExpr::Polynomial { terms } => {
                for t in terms {
                    self.finite(loc, "coefficient", t.coef);
                }
            }
            ContinuousExpr::PiecewiseLinear { pieces } => {
                for p in pieces {
                    if let Err(msg) = check_knots(&p.knots, &p.values) {
                        self.push(loc, format!("piece over \"{}\": {msg}", p.var));
                    }
                }
            }
            ContinuousExpr::GaussianMixture { components } => {
                for c in components {
                    self.finite(loc, "weight", c.weight);
                    self.finite(loc, "mean", c.mean);
                    if !(c.variance > 0.0 && c.variance.is_finite()) {
                        self.push(loc, format!("variance must be positive, got {}", c.variance));
                    }
                }
            }
        }
    }

    fn floor(&mut self, loc: &str, floor: f64) {
        if !(floor > 0.0 && floor.is_finite()) {
            self.push(loc, format!("floor must be a positive real, got {floor}"));
        }
    }
}

/// Knots strictly increasing from 0 to 1, one finite value per knot.
pub(crate) fn check_knots(knots: &[f64], values: &[f64]) -> Result<(), String> {
    if knots.len() < 2 {
        return Err("needs at least two knots".into());
    }
    if knots.len() != values.len() {
        return Err(format!("{} knots but {} values", knots.len(), values.len()));
    }
    if knots[0] != 0.0 || knots[knots.len() - 1] != 1.0 {
        return Err("knots must span [0, 1]".into());
    }
    if knots.windows(2).any(|w| !(w[0] < w[1])) {
        return Err("knots must be strictly increasing".into());
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err("values must be finite".into());
    }
    Ok(())
}

/// Every invariant violation in `doc`; empty iff the model is well-formed.
pub fn validate_model(doc: &ModelDoc) -> Vec<Violation> {
    let mut ck = Checker {
        vars: HashMap::new(),
        found: vec![],
    };

    if !(0.0..1.0).contains(&doc.discount) {
        ck.push("discount", format!("discount must lie in [0, 1), got {}", doc.discount));
    }

    for (group, vars) in [("state_vars", &doc.state_vars), ("action_vars", &doc.action_vars)] {
        for (i, v) in vars.iter().enumerate() {
            let loc = format!("{group}[{i}]");
            if v.name.is_empty() {
                ck.push(&loc, "variable name is empty");
            }
            if ck.vars.insert(v.name.as_str(), v).is_some() {
                ck.push(&loc, format!("duplicate variable name \"{}\"", v.name));
            }
            match (v.kind, v.domain_size) {
                (VariableKind::Continuous, Some(_)) => {
                    ck.push(&loc, format!("continuous variable \"{}\" must not have domain_size", v.name))
                }
                (VariableKind::Discrete, None) => {
                    ck.push(&loc, format!("discrete variable \"{}\" needs domain_size", v.name))
                }
                (VariableKind::Discrete, Some(d)) if d < 2 => {
                    ck.push(&loc, format!("discrete variable \"{}\" needs domain_size >= 2", v.name))
                }
                _ => {}
            }
        }
    }

    let mut cpf_count: HashMap<&str, usize> = HashMap::new();
    for (i, cpf) in doc.cpfs.iter().enumerate() {
        let loc = format!("cpfs[{i}]");
        let child = cpf.child();
        *cpf_count.entry(child).or_default() += 1;
        let spec = doc.state_vars.iter().find(|v| v.name == child);
        match spec {
            None => ck.push(&loc, format!("child \"{child}\" is not a state variable")),
            Some(v) => {
                let wants_continuous = !matches!(cpf, Cpf::Discriminant(_));
                if v.is_continuous() != wants_continuous {
                    ck.push(&loc, format!("CPF kind does not match the kind of \"{child}\""));
                }
            }
        }
        match cpf {
            Cpf::Beta(c) => {
                ck.floor(&format!("{loc}.floor"), c.floor);
                ck.scoped(&format!("{loc}.h1"), &c.h1);
                ck.scoped(&format!("{loc}.h2"), &c.h2);
            }
            Cpf::MixtureBeta(c) => {
                if c.components.is_empty() {
                    ck.push(&loc, "mixture has no components");
                }
                let mut total = 0.0;
                for (k, comp) in c.components.iter().enumerate() {
                    let cl = format!("{loc}.components[{k}]");
                    if !(comp.weight > 0.0) {
                        ck.push(&cl, format!("weight must be positive, got {}", comp.weight));
                    }
                    total += comp.weight;
                    ck.floor(&format!("{cl}.floor"), comp.floor);
                    ck.scoped(&format!("{cl}.h1"), &comp.h1);
                    ck.scoped(&format!("{cl}.h2"), &comp.h2);
                }
                if !c.components.is_empty() && (total - 1.0).abs() > 1e-9 {
                    ck.push(&loc, format!("mixture weights sum to {total}, expected 1"));
                }
            }
            Cpf::Discriminant(c) => {
                ck.floor(&format!("{loc}.floor"), c.floor);
                if let Some(d) = spec.and_then(|v| v.domain_size) {
                    if c.discriminants.len() != d {
                        ck.push(
                            &loc,
                            format!("{} discriminants for a variable with {d} values", c.discriminants.len()),
                        );
                    }
                }
                for (k, f) in c.discriminants.iter().enumerate() {
                    ck.scoped(&format!("{loc}.discriminants[{k}]"), f);
                }
            }
        }
    }
    for v in &doc.state_vars {
        match cpf_count.get(v.name.as_str()).copied().unwrap_or(0) {
            1 => {}
            0 => ck.push("cpfs", format!("state variable \"{}\" has no CPF", v.name)),
            n => ck.push("cpfs", format!("state variable \"{}\" has {n} CPFs", v.name)),
        }
    }

    for (j, r) in doc.rewards.iter().enumerate() {
        ck.scoped(&format!("rewards[{j}]"), r);
    }
    ck.found
}
