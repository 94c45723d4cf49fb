//! CSP instances over a finite language: parsing, exact model counting,
//! unique-model decision and enumeration.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::ops::ControlFlow;
use std::path::Path;

use crate::budget::Budget;
use crate::relcore::{dual_language, Language, Relation, Tuple};
use crate::search::Problem;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Constraint {
    pub rel: String,
    /// Variable indices.
    pub args: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    pub language: Language,
    /// Language file as written after `lang`, if any.
    pub lang_path: Option<String>,
    pub vars: Vec<String>,
    pub constraints: Vec<Constraint>,
}

impl Instance {
    pub fn new(language: Language, vars: Vec<String>) -> Result<Instance> {
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::Precondition(format!("variable {v} declared twice")));
            }
        }
        Ok(Instance { language, lang_path: None, vars, constraints: Vec::new() })
    }

    pub fn domain(&self) -> usize {
        self.language.domain()
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    /// Adds a variable unless it exists; returns its index.
    pub fn ensure_var(&mut self, name: &str) -> usize {
        match self.var(name) {
            Some(i) => i,
            None => {
                self.vars.push(name.to_string());
                self.vars.len() - 1
            }
        }
    }

    pub fn relation(&self, name: &str) -> Result<&Relation> {
        self.language.get(name).ok_or_else(|| Error::Unknown(format!("relation {name}")))
    }

    pub fn add(&mut self, rel: &str, args: &[usize]) -> Result<()> {
        let r = self.relation(rel)?;
        if r.arity() != args.len() {
            return Err(Error::Arity(format!("{rel} takes {} arguments, given {}", r.arity(), args.len())));
        }
        if let Some(a) = args.iter().find(|&&a| a >= self.vars.len()) {
            return Err(Error::Unknown(format!("variable index {a}")));
        }
        self.constraints.push(Constraint { rel: rel.to_string(), args: args.to_vec() });
        Ok(())
    }

    pub fn add_named(&mut self, rel: &str, args: &[&str]) -> Result<()> {
        let idx = args
            .iter()
            .map(|a| self.var(a).ok_or_else(|| Error::Unknown(format!("variable {a}"))))
            .collect::<Result<Vec<_>>>()?;
        self.add(rel, &idx)
    }

    /// Parses the instance format; `resolve` loads the language named on
    /// the `lang` line.
    pub fn parse_with(text: &str, resolve: &mut dyn FnMut(&str) -> Result<Language>) -> Result<Instance> {
        let mut domain: Option<usize> = None;
        let mut vars: Vec<String> = Vec::new();
        let mut pending: Vec<(usize, String, Vec<String>)> = Vec::new();
        let mut lang_path = None;
        let mut language = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap().trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "domain" => {
                    let d = toks
                        .get(1)
                        .and_then(|d| d.parse().ok())
                        .filter(|_| toks.len() == 2)
                        .ok_or_else(|| Error::parse(ln + 1, "expected `domain N`"))?;
                    domain = Some(d);
                }
                "lang" => {
                    if toks.len() != 2 {
                        return Err(Error::parse(ln + 1, "expected `lang FILE`"));
                    }
                    language = Some(resolve(toks[1]).map_err(|e| match e {
                        Error::Io { .. } => e,
                        other => Error::parse(ln + 1, other),
                    })?);
                    lang_path = Some(toks[1].to_string());
                }
                "vars" => vars.extend(toks[1..].iter().map(|s| s.to_string())),
                rel => pending.push((ln + 1, rel.to_string(), toks[1..].iter().map(|s| s.to_string()).collect())),
            }
        }
        let language = match language {
            Some(l) => l,
            None => Language::new(domain.unwrap_or(2)),
        };
        if let Some(d) = domain {
            if d != language.domain() {
                return Err(Error::Domain(format!("instance domain {d} vs language domain {}", language.domain())));
            }
        }
        let mut i = Instance::new(language, vars).map_err(|e| Error::parse(0, e))?;
        i.lang_path = lang_path;
        for (ln, rel, args) in pending {
            let args: Vec<&str> = args.iter().map(String::as_str).collect();
            i.add_named(&rel, &args).map_err(|e| Error::parse(ln, e))?;
        }
        Ok(i)
    }

    /// Parses an instance; the `lang` path is resolved against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Instance> {
        Instance::parse_with(text, &mut |p| Language::from_file(&base.join(p)))
    }

    pub fn from_file(path: &Path) -> Result<Instance> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
        Instance::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "domain {}", self.domain());
        if let Some(p) = &self.lang_path {
            let _ = writeln!(out, "lang {p}");
        }
        let _ = writeln!(out, "vars {}", self.vars.join(" "));
        for c in &self.constraints {
            let args: Vec<&str> = c.args.iter().map(|&a| self.vars[a].as_str()).collect();
            let _ = writeln!(out, "{} {}", c.rel, args.join(" "));
        }
        out
    }

    fn problem(&self, budget: &Budget) -> Result<Option<Problem>> {
        let bits = Budget::space_bits(self.domain(), self.vars.len());
        if bits > budget.csp_vars as f64 {
            return Err(Error::Budget(format!(
                "{} variables over a domain of size {} exceed the limit of {} Boolean variables",
                self.vars.len(),
                self.domain(),
                budget.csp_vars
            )));
        }
        let mut p = Problem::new(self.domain(), self.vars.len());
        let mut ids: HashMap<&str, usize> = HashMap::new();
        for c in &self.constraints {
            let r = self.relation(&c.rel)?;
            if r.arity() == 0 {
                if r.is_empty() {
                    return Ok(None);
                }
                continue;
            }
            let id = match ids.get(c.rel.as_str()) {
                Some(&id) => id,
                None => {
                    let id = p.add_relation(r.clone());
                    ids.insert(&c.rel, id);
                    id
                }
            };
            p.add_constraint(id, c.args.clone())?;
        }
        Ok(Some(p))
    }

    /// The same instance over the dual language.
    pub fn dual(&self) -> Result<Instance> {
        let mut d = self.clone();
        d.language = dual_language(&self.language)?;
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Count {
    Exact(u128),
    /// The cap was reached.
    AtLeast(u128),
}

pub fn count_models(inst: &Instance, cap: Option<u128>, budget: &Budget) -> Result<Count> {
    let Some(p) = inst.problem(budget)? else {
        return Ok(Count::Exact(0));
    };
    match cap {
        None => Ok(Count::Exact(p.count(budget.nodes)?)),
        Some(cap) => {
            let mut n = 0u128;
            p.solve(budget.nodes, |_| {
                n += 1;
                if n >= cap {
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            })?;
            Ok(if n >= cap { Count::AtLeast(n) } else { Count::Exact(n) })
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Uniqueness {
    Unique(Tuple),
    Zero,
    /// The first two models in canonical order.
    Many(Tuple, Tuple),
}

pub fn unique_model(inst: &Instance, budget: &Budget) -> Result<Uniqueness> {
    let found = enumerate_models(inst, Some(2), budget)?;
    Ok(match found.as_slice() {
        [] => Uniqueness::Zero,
        [m] => Uniqueness::Unique(m.clone()),
        [a, b, ..] => Uniqueness::Many(a.clone(), b.clone()),
    })
}

/// Models in lexicographic order of the variable list, at most `limit`.
pub fn enumerate_models(inst: &Instance, limit: Option<usize>, budget: &Budget) -> Result<Vec<Tuple>> {
    let Some(p) = inst.problem(budget)? else {
        return Ok(Vec::new());
    };
    let mut out = Vec::new();
    if limit == Some(0) {
        return Ok(out);
    }
    p.solve(budget.nodes, |m| {
        out.push(m.to_vec());
        if limit.is_some_and(|l| out.len() >= l) || out.len() >= budget.results {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    })?;
    if limit.is_none_or(|l| l > budget.results) && out.len() >= budget.results {
        return Err(Error::Budget(format!("more than {} models", budget.results)));
    }
    Ok(out)
}
