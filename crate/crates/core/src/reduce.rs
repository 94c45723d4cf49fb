//! Instance transformations: rewriting through upp-definitions, the UNSAT
//! to unique-SAT reduction over R5, and the steering-variable construction
//! turning unsatisfiability into a unique model.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::budget::Budget;
use crate::closure::{check_upp, Atom, ConjFormula, Quant, UppVerdict};
use crate::csp::Instance;
use crate::relcore::{named, Language, Relation};
use crate::{Error, Result};

/// Union-find over instance variable indices; the smallest index wins so
/// original variables keep their names.
struct Merge {
    parent: Vec<usize>,
}

impl Merge {
    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        self.parent[hi] = lo;
    }
}

/// Accumulates an output instance; Eq atoms become identifications.
struct Builder {
    vars: Vec<String>,
    cons: Vec<(String, Vec<usize>)>,
    eqs: Vec<(usize, usize)>,
}

impl Builder {
    fn new(vars: Vec<String>) -> Builder {
        Builder { vars, cons: Vec::new(), eqs: Vec::new() }
    }

    fn fresh(&mut self, name: String) -> usize {
        self.vars.push(name);
        self.vars.len() - 1
    }

    /// Instantiates `def` with its free variables bound to `args`; fresh
    /// variables are named `<var>@<ci>#<k>`.
    fn expand(&mut self, def: &ConjFormula, args: &[usize], ci: usize) {
        let mut bind: BTreeMap<&str, usize> = BTreeMap::new();
        for (v, &a) in def.free.iter().zip(args) {
            bind.insert(v, a);
        }
        for (k, (v, _)) in def.quantified.iter().enumerate() {
            let idx = self.fresh(format!("{v}@{ci}#{k}"));
            bind.insert(v, idx);
        }
        for a in &def.atoms {
            let scope: Vec<usize> = a.args.iter().map(|v| bind[v.as_str()]).collect();
            if a.rel == "Eq" {
                self.eqs.push((scope[0], scope[1]));
            } else {
                self.cons.push((a.rel.clone(), scope));
            }
        }
    }

    fn finish(self, language: Language, lang_path: Option<String>) -> Result<Instance> {
        let mut m = Merge { parent: (0..self.vars.len()).collect() };
        for &(a, b) in &self.eqs {
            m.union(a, b);
        }
        let mut index = vec![usize::MAX; self.vars.len()];
        let mut names = Vec::new();
        for (v, slot) in index.iter_mut().enumerate() {
            if m.find(v) == v {
                *slot = names.len();
                names.push(self.vars[v].clone());
            }
        }
        let mut out = Instance::new(language, names)?;
        out.lang_path = lang_path;
        for (rel, scope) in self.cons {
            let scope: Vec<usize> = scope.iter().map(|&v| index[m.find(v)]).collect();
            out.add(&rel, &scope)?;
        }
        Ok(out)
    }
}

fn require_upp(def: &ConjFormula, target: &Relation, budget: &Budget) -> Result<()> {
    if let Some((v, _)) = def.quantified.iter().find(|(_, q)| *q == Quant::Exists) {
        return Err(Error::Precondition(format!("definition {} quantifies {v} without uniqueness", def.name)));
    }
    match check_upp(def, target, budget)? {
        UppVerdict::Valid(_) => Ok(()),
        other => Err(Error::Precondition(format!("definition {} is not a valid upp-definition: {other:?}", def.name))),
    }
}

fn common_language(defs: &[&ConjFormula]) -> Result<(Language, Option<String>)> {
    let first = defs.first().ok_or_else(|| Error::Precondition("no definitions".into()))?;
    for d in defs {
        if d.language.domain() != first.language.domain() {
            return Err(Error::Domain("definitions over different domains".into()));
        }
    }
    // Definitions may use different language files; the output language
    // is their union.
    let mut lang = Language::new(first.language.domain());
    for d in defs {
        for r in d.language.relations() {
            match lang.get(r.display_name()) {
                Some(existing) if existing == r => {}
                Some(_) => {
                    return Err(Error::Precondition(format!("relation {} defined differently", r.display_name())))
                }
                None => lang.add(r.clone())?,
            }
        }
    }
    let path = if defs.iter().all(|d| d.lang_path == first.lang_path) { first.lang_path.clone() } else { None };
    Ok((lang, path))
}

/// Replaces every constraint by its upp-definition. The model count is
/// unchanged since each auxiliary variable is a function of the others.
pub fn rewrite_upp(inst: &Instance, defs: &[ConjFormula], budget: &Budget) -> Result<Instance> {
    let by_name: BTreeMap<&str, &ConjFormula> = defs.iter().map(|d| (d.name.as_str(), d)).collect();
    let mut used: Vec<&ConjFormula> = Vec::new();
    for c in &inst.constraints {
        let def = *by_name
            .get(c.rel.as_str())
            .ok_or_else(|| Error::Unknown(format!("no definition for {}", c.rel)))?;
        if !used.iter().any(|d| d.name == def.name) {
            require_upp(def, inst.relation(&c.rel)?, budget)?;
            used.push(def);
        }
    }
    let (language, path) = if used.is_empty() {
        (inst.language.clone(), inst.lang_path.clone())
    } else {
        common_language(&used)?
    };
    let mut b = Builder::new(inst.vars.clone());
    for (ci, c) in inst.constraints.iter().enumerate() {
        b.expand(by_name[c.rel.as_str()], &c.args, ci);
    }
    b.finish(language, path)
}

/// The language {R5z} used by [`unsat_to_usat`].
pub fn usat_language() -> Language {
    Language::from_relations(2, vec![named::r5_zero()]).unwrap()
}

/// Every variable in fifth position becomes one shared variable `c1` and
/// each constraint is enlarged by the all-zero tuple. Variables outside
/// all constraints are dropped. The result has exactly one model (all
/// zero) if and only if the input is unsatisfiable.
pub fn unsat_to_usat(inst: &Instance) -> Result<Instance> {
    let r5 = named::r5();
    if inst.constraints.is_empty() {
        return Err(Error::Precondition("instance needs at least one constraint".into()));
    }
    for c in &inst.constraints {
        if inst.relation(&c.rel)? != &r5 {
            return Err(Error::Precondition(format!("constraint relation {} is not R5", c.rel)));
        }
    }
    let mut c1_name = "c1".to_string();
    while inst.var(&c1_name).is_some() {
        c1_name.push('\'');
    }
    let fifth: Vec<bool> = (0..inst.vars.len())
        .map(|v| inst.constraints.iter().any(|c| c.args[4] == v))
        .collect();
    let mut keep: Vec<Option<usize>> = vec![None; inst.vars.len()];
    let mut names = Vec::new();
    for (v, name) in inst.vars.iter().enumerate() {
        let used = inst.constraints.iter().any(|c| c.args.contains(&v));
        if used && !fifth[v] {
            keep[v] = Some(names.len());
            names.push(name.clone());
        }
    }
    let c1 = names.len();
    names.push(c1_name);
    let mut out = Instance::new(usat_language(), names)?;
    for c in &inst.constraints {
        let args: Vec<usize> = c.args.iter().map(|&v| if fifth[v] { c1 } else { keep[v].unwrap() }).collect();
        out.add("R5z", &args)?;
    }
    Ok(out)
}

/// R(x̄) ∨ s as a relation of arity ar(R)+1.
pub fn or_switch(r: &Relation) -> Relation {
    let n = r.arity();
    Relation::from_fn(n + 1, r.domain(), |t| t[n] == 1 || r.contains(&t[..n]))
        .named(format!("{}_or", r.display_name()))
}

/// upp-definitions driving the steering construction: `imp(x, v)` for
/// x → v, and for each source relation R a definition of R(x̄) ∨ s with
/// the switch s as last free variable.
#[derive(Clone, Debug)]
pub struct EthPlan {
    pub imp: ConjFormula,
    pub ors: BTreeMap<String, ConjFormula>,
}

impl EthPlan {
    /// Reads a plan from definitions: the one named `imp` and one per
    /// source relation.
    pub fn from_defs(defs: Vec<ConjFormula>) -> Result<EthPlan> {
        let mut imp = None;
        let mut ors = BTreeMap::new();
        for d in defs {
            if d.name == "imp" {
                imp = Some(d);
            } else {
                ors.insert(d.name.clone(), d);
            }
        }
        let imp = imp.ok_or_else(|| Error::Precondition("plan lacks a definition named imp".into()))?;
        Ok(EthPlan { imp, ors })
    }

    /// E: auxiliary variables per implication gadget.
    pub fn e(&self) -> usize {
        self.imp.quantified.len()
    }

    /// D: most auxiliary variables of any switch gadget.
    pub fn d(&self) -> usize {
        self.ors.values().map(|f| f.quantified.len()).max().unwrap_or(0)
    }

    /// Checks every definition against its relation.
    pub fn validate(&self, source: &Language, budget: &Budget) -> Result<()> {
        require_upp(&self.imp, &named::imp(), budget)?;
        for r in source.relations() {
            if let Some(def) = self.ors.get(r.display_name()) {
                require_upp(def, &or_switch(r), budget)?;
            }
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.imp.to_text());
        for d in self.ors.values() {
            let _ = write!(out, "\n{}", d.to_text());
        }
        out
    }

    /// The plan over 3-clauses: imp(x,v) = (¬x ∨ v ∨ v), and for a clause
    /// (l1 ∨ l2 ∨ l3) the switch version
    /// (l1 ∨ l2 ∨ y) ∧ (¬y ∨ l3 ∨ s) ∧ (y ∨ ¬l3) ∧ (y ∨ ¬s), so y ↔ l3 ∨ s.
    pub fn three_clauses(lang_path: &str) -> Result<EthPlan> {
        let lang = Language::from_relations(2, named::three_clauses())?;
        let c = |signs: [bool; 3]| named::clause3(signs).display_name().to_string();
        let mut imp = ConjFormula::build("imp", &lang, &["x", "v"], &[], &[(&c([false, true, true]), &["x", "v", "v"])])?;
        imp.lang_path = Some(lang_path.to_string());
        let mut ors = BTreeMap::new();
        for r in named::three_clauses() {
            let s = named::clause_signs(r.display_name()).unwrap();
            let atoms: Vec<Atom> = vec![
                Atom::new(c([s[0], s[1], true]), &["a", "b", "y"]),
                Atom::new(c([false, s[2], true]), &["y", "c", "s"]),
                Atom::new(c([true, !s[2], true]), &["y", "c", "y"]),
                Atom::new(c([true, false, true]), &["y", "s", "y"]),
            ];
            let mut f = ConjFormula::new(
                r.display_name(),
                lang.clone(),
                ["a", "b", "c", "s"].iter().map(|v| v.to_string()).collect(),
                vec![("y".to_string(), Quant::ExistsUnique)],
                atoms,
            )?;
            f.lang_path = Some(lang_path.to_string());
            ors.insert(r.display_name().to_string(), f);
        }
        Ok(EthPlan { imp, ors })
    }
}

/// Adds a steering variable x, an implication gadget x → v for every
/// variable v and a switch gadget R(x̄) ∨ x for every constraint R(x̄).
/// Setting x = 1 gives exactly one model, and the models with x = 0 are
/// the models of the input, so the result has a unique model if and only
/// if the input is unsatisfiable.
pub fn eth_reduction(inst: &Instance, plan: &EthPlan, budget: &Budget) -> Result<Instance> {
    let nv = inst.vars.len();
    let nc = inst.constraints.len();
    if nc > 2 * nv {
        return Err(Error::Precondition(format!("{nc} constraints exceed twice the {nv} variables")));
    }
    plan.validate(&inst.language, budget)?;
    let mut defs: Vec<&ConjFormula> = vec![&plan.imp];
    for c in &inst.constraints {
        let def = plan.ors.get(&c.rel).ok_or_else(|| Error::Unknown(format!("no switch definition for {}", c.rel)))?;
        if !defs.iter().any(|d| d.name == def.name) {
            defs.push(def);
        }
    }
    let (language, path) = common_language(&defs)?;
    let mut steer = "x".to_string();
    while inst.var(&steer).is_some() {
        steer.push('\'');
    }
    let mut b = Builder::new(inst.vars.clone());
    let x = b.fresh(steer);
    for v in 0..nv {
        b.expand(&plan.imp, &[x, v], nc + v);
    }
    for (ci, c) in inst.constraints.iter().enumerate() {
        let mut args = c.args.clone();
        args.push(x);
        b.expand(&plan.ors[&c.rel], &args, ci);
    }
    b.finish(language, path)
}
