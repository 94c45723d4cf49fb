//! Conjunctive formulas and the pp, qfpp and upp closure operators.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::budget::Budget;
use crate::relcore::{
    checked_pow, determined, ops, point_index, pol_problem, preserves_all, ArgKind, Determined,
    Language, Operation, Points, Relation, Tuple,
};
use crate::search::Problem;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quant {
    Exists,
    ExistsUnique,
    Frozen,
}

impl Quant {
    pub fn keyword(self) -> &'static str {
        match self {
            Quant::Exists => "exists",
            Quant::ExistsUnique => "exists!",
            Quant::Frozen => "frozen",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub rel: String,
    pub args: Vec<String>,
}

impl Atom {
    pub fn new(rel: impl Into<String>, args: &[&str]) -> Atom {
        Atom { rel: rel.into(), args: args.iter().map(|s| s.to_string()).collect() }
    }
}

/// ∃/∃!/frozen-quantified conjunction of atoms over a language.
#[derive(Clone, Debug)]
pub struct ConjFormula {
    pub name: String,
    pub language: Language,
    /// Path of the language file as written after `over`, if any.
    pub lang_path: Option<String>,
    pub free: Vec<String>,
    pub quantified: Vec<(String, Quant)>,
    pub atoms: Vec<Atom>,
}

impl ConjFormula {
    pub fn new(
        name: impl Into<String>,
        language: Language,
        free: Vec<String>,
        quantified: Vec<(String, Quant)>,
        atoms: Vec<Atom>,
    ) -> Result<ConjFormula> {
        let phi = ConjFormula { name: name.into(), language, lang_path: None, free, quantified, atoms };
        phi.validate()?;
        Ok(phi)
    }

    /// Convenience constructor taking string slices.
    pub fn build(
        name: &str,
        language: &Language,
        free: &[&str],
        quantified: &[(&str, Quant)],
        atoms: &[(&str, &[&str])],
    ) -> Result<ConjFormula> {
        ConjFormula::new(
            name,
            language.clone(),
            free.iter().map(|s| s.to_string()).collect(),
            quantified.iter().map(|(v, q)| (v.to_string(), *q)).collect(),
            atoms.iter().map(|(r, a)| Atom::new(*r, a)).collect(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let vars = self.vars();
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(Error::Precondition(format!("variable {v} declared twice")));
            }
        }
        for a in &self.atoms {
            let r = self
                .language
                .get(&a.rel)
                .ok_or_else(|| Error::Unknown(format!("relation {}", a.rel)))?;
            if r.arity() != a.args.len() {
                return Err(Error::Arity(format!(
                    "{} takes {} arguments, given {}",
                    a.rel,
                    r.arity(),
                    a.args.len()
                )));
            }
            if let Some(v) = a.args.iter().find(|v| !vars.contains(v)) {
                return Err(Error::Unknown(format!("variable {v} in {}", a.rel)));
            }
        }
        Ok(())
    }

    /// Free variables followed by quantified ones.
    pub fn vars(&self) -> Vec<&String> {
        self.free.iter().chain(self.quantified.iter().map(|(v, _)| v)).collect()
    }

    fn var_index(&self) -> HashMap<&str, usize> {
        self.vars().into_iter().enumerate().map(|(i, v)| (v.as_str(), i)).collect()
    }

    pub fn is_quantifier_free(&self) -> bool {
        self.quantified.is_empty()
    }

    pub fn domain(&self) -> usize {
        self.language.domain()
    }

    /// Renders the formula in the definition-file grammar.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let over = self.lang_path.as_deref().unwrap_or("-");
        let _ = writeln!(out, "def {}({}) over {} :", self.name, self.free.join(","), over);
        let mut groups = Vec::new();
        for q in [Quant::ExistsUnique, Quant::Exists, Quant::Frozen] {
            let vs: Vec<&str> = self
                .quantified
                .iter()
                .filter(|(_, t)| *t == q)
                .map(|(v, _)| v.as_str())
                .collect();
            if !vs.is_empty() {
                groups.push(format!("{} {} ;", q.keyword(), vs.join(" ")));
            }
        }
        if !groups.is_empty() {
            let _ = writeln!(out, "  {}", groups.join(" "));
        }
        let atoms: Vec<String> =
            self.atoms.iter().map(|a| format!("{}({})", a.rel, a.args.join(","))).collect();
        let _ = writeln!(out, "  {}", atoms.join(" & "));
        out
    }
}

fn is_var_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '@' | '#' | '.' | '\'')
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::parse(line, msg)
}

/// Parses a definition file. `over` paths are resolved against `base`.
pub fn parse_defs(text: &str, base: &Path) -> Result<Vec<ConjFormula>> {
    let mut cache: HashMap<PathBuf, Language> = HashMap::new();
    parse_defs_with(text, &mut |rel: &str, line: usize| {
        let path = base.join(rel);
        if let Some(l) = cache.get(&path) {
            return Ok(l.clone());
        }
        let l = Language::from_file(&path).map_err(|e| match e {
            Error::Io { .. } => e,
            other => parse_err(line, format!("in {}: {other}", path.display())),
        })?;
        cache.insert(path, l.clone());
        Ok(l)
    })
}

pub fn defs_from_file(path: &Path) -> Result<Vec<ConjFormula>> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_defs(&text, path.parent().unwrap_or(Path::new(".")))
}

/// Parses definitions, obtaining languages from `resolve(path, line)`.
pub fn parse_defs_with(
    text: &str,
    resolve: &mut dyn FnMut(&str, usize) -> Result<Language>,
) -> Result<Vec<ConjFormula>> {
    // Blocks start at lines beginning with `def`.
    let mut blocks: Vec<(usize, String)> = Vec::new();
    for (ln, raw) in text.lines().enumerate() {
        let t = raw.trim_start();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        if t.starts_with("def ") || t == "def" {
            blocks.push((ln + 1, String::new()));
        }
        match blocks.last_mut() {
            Some((_, b)) => {
                b.push_str(raw);
                b.push('\n');
            }
            None => return Err(parse_err(ln + 1, "expected `def`")),
        }
    }
    blocks.into_iter().map(|(line, b)| parse_block(&b, line, resolve)).collect()
}

fn parse_block(
    block: &str,
    line: usize,
    resolve: &mut dyn FnMut(&str, usize) -> Result<Language>,
) -> Result<ConjFormula> {
    let rest = block.trim_start().strip_prefix("def").unwrap().trim_start();
    let open = rest.find('(').ok_or_else(|| parse_err(line, "expected `(` after name"))?;
    let name = rest[..open].trim();
    if name.is_empty() || !name.chars().all(is_var_char) {
        return Err(parse_err(line, format!("bad definition name {name:?}")));
    }
    let close = rest.find(')').ok_or_else(|| parse_err(line, "expected `)`"))?;
    let free: Vec<String> = split_names(&rest[open + 1..close]);
    let rest = rest[close + 1..].trim_start();
    let rest = rest
        .strip_prefix("over")
        .ok_or_else(|| parse_err(line, "expected `over FILE :`"))?;
    let colon = rest.find(':').ok_or_else(|| parse_err(line, "expected `:` after language"))?;
    let path = rest[..colon].trim();
    if path.is_empty() {
        return Err(parse_err(line, "missing language file"));
    }
    let language = resolve(path, line)?;
    let mut body = rest[colon + 1..].trim();
    let mut quantified = Vec::new();
    loop {
        let (q, after) = if let Some(a) = body.strip_prefix("exists!") {
            (Quant::ExistsUnique, a)
        } else if let Some(a) = body.strip_prefix("exists").filter(|a| a.starts_with(char::is_whitespace)) {
            (Quant::Exists, a)
        } else if let Some(a) = body.strip_prefix("frozen").filter(|a| a.starts_with(char::is_whitespace)) {
            (Quant::Frozen, a)
        } else {
            break;
        };
        let semi = after.find(';').ok_or_else(|| parse_err(line, "quantifier group lacks `;`"))?;
        for v in split_names(&after[..semi]) {
            quantified.push((v, q));
        }
        body = after[semi + 1..].trim();
    }
    let mut atoms = Vec::new();
    if !body.is_empty() && body != "true" {
        for part in body.split('&') {
            let part = part.trim();
            let open = part.find('(').ok_or_else(|| parse_err(line, format!("bad atom {part:?}")))?;
            if !part.ends_with(')') {
                return Err(parse_err(line, format!("bad atom {part:?}")));
            }
            let rel = part[..open].trim().to_string();
            let args = split_names(&part[open + 1..part.len() - 1]);
            atoms.push(Atom { rel, args });
        }
    }
    for v in free.iter().chain(quantified.iter().map(|(v, _)| v)) {
        if !v.chars().all(is_var_char) {
            return Err(parse_err(line, format!("bad variable name {v:?}")));
        }
    }
    let mut phi = ConjFormula::new(name, language, free, quantified, atoms)
        .map_err(|e| parse_err(line, e))?;
    phi.lang_path = Some(path.to_string());
    Ok(phi)
}

fn split_names(s: &str) -> Vec<String> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// Relations described by a formula: all satisfying assignments over
/// free+quantified variables, and their projection onto the free ones.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub pre: Relation,
    pub rel: Relation,
}

pub fn eval_formula(phi: &ConjFormula, budget: &Budget) -> Result<Evaluation> {
    phi.validate()?;
    let d = phi.domain();
    let vars = phi.vars();
    let bits = Budget::space_bits(d, vars.len());
    if bits > budget.formula_bits as f64 {
        return Err(Error::Budget(format!(
            "{} variables over a domain of size {d} exceed 2^{}",
            vars.len(),
            budget.formula_bits
        )));
    }
    let index = phi.var_index();
    let mut prob = Problem::new(d, vars.len());
    let mut rel_ids: HashMap<&str, usize> = HashMap::new();
    for a in &phi.atoms {
        let ri = match rel_ids.get(a.rel.as_str()) {
            Some(&ri) => ri,
            None => {
                let ri = prob.add_relation(phi.language.get(&a.rel).unwrap().clone());
                rel_ids.insert(&a.rel, ri);
                ri
            }
        };
        prob.add_constraint(ri, a.args.iter().map(|v| index[v.as_str()]).collect())?;
    }
    let mut tuples = Vec::new();
    let mut overflow = false;
    prob.solve(budget.nodes, |s| {
        if tuples.len() >= budget.tuples {
            overflow = true;
            return ControlFlow::Break(());
        }
        tuples.push(s.to_vec());
        ControlFlow::Continue(())
    })?;
    if overflow {
        return Err(Error::Budget(format!("more than {} satisfying assignments", budget.tuples)));
    }
    let pre = Relation::from_sorted(vars.len(), d, tuples);
    let free: Vec<usize> = (0..phi.free.len()).collect();
    let rel = pre.project(&free)?;
    Ok(Evaluation { pre, rel })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuxWitness {
    pub var: String,
    pub quant: Quant,
    /// Free variables that determine `var`.
    pub determined_by: Vec<String>,
    /// Value of `var` for each assignment of `determined_by`.
    pub map: BTreeMap<Tuple, u8>,
}

#[derive(Clone, Debug)]
pub struct UppCertificate {
    pub formula: ConjFormula,
    pub witnesses: Vec<AuxWitness>,
}

#[derive(Clone, Debug)]
pub enum UppVerdict {
    Valid(UppCertificate),
    WrongRelation { missing: Vec<Tuple>, extra: Vec<Tuple> },
    /// `pair` are two satisfying assignments (free then quantified) that
    /// agree on the free variables; `ambiguous` lists every free
    /// assignment with more than one value for `var`.
    NotUnique { var: String, pair: (Tuple, Tuple), ambiguous: Vec<Tuple> },
    /// A frozen variable takes two different values.
    NotFrozen { var: String, pair: (Tuple, Tuple) },
}

impl UppVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, UppVerdict::Valid(_))
    }
}

/// Smallest (then lexicographically first) set of free coordinates
/// determining coordinate `i`; all free coordinates when there are many.
fn minimal_determiner(pre: &Relation, i: usize, nfree: usize) -> Result<(Vec<usize>, BTreeMap<Tuple, u8>)> {
    if nfree <= 12 {
        for size in 0..=nfree {
            for set in subsets(nfree, size) {
                if let Determined::Yes(map) = determined(pre, i, &set)? {
                    return Ok((set, map));
                }
            }
        }
    }
    let all: Vec<usize> = (0..nfree).collect();
    match determined(pre, i, &all)? {
        Determined::Yes(map) => Ok((all, map)),
        Determined::No(..) => Err(Error::Precondition("coordinate not determined".into())),
    }
}

/// k-subsets of 0..n in lexicographic order.
pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

/// Checks that `phi` defines `target` and that every ∃!/frozen variable is
/// determined by the free variables (frozen ones must also be constant).
pub fn check_upp(phi: &ConjFormula, target: &Relation, budget: &Budget) -> Result<UppVerdict> {
    if target.arity() != phi.free.len() {
        return Err(Error::Arity(format!(
            "target arity {} vs {} free variables",
            target.arity(),
            phi.free.len()
        )));
    }
    if target.domain() != phi.domain() {
        return Err(Error::Domain(format!("target over {} vs formula over {}", target.domain(), phi.domain())));
    }
    let ev = eval_formula(phi, budget)?;
    if &ev.rel != target {
        let missing = target.tuples().iter().filter(|t| !ev.rel.contains(t)).cloned().collect();
        let extra = ev.rel.tuples().iter().filter(|t| !target.contains(t)).cloned().collect();
        return Ok(UppVerdict::WrongRelation { missing, extra });
    }
    let nfree = phi.free.len();
    let free: Vec<usize> = (0..nfree).collect();
    let mut witnesses = Vec::new();
    for (qi, (var, q)) in phi.quantified.iter().enumerate() {
        if *q == Quant::Exists {
            continue;
        }
        let i = nfree + qi;
        if let Determined::No(a, b) = determined(&ev.pre, i, &free)? {
            let mut ambiguous: Vec<Tuple> = Vec::new();
            let mut seen: BTreeMap<&[u8], u8> = BTreeMap::new();
            for t in ev.pre.tuples() {
                let key = &t[..nfree];
                match seen.get(key) {
                    Some(&v) if v != t[i] => {
                        if ambiguous.last().map(Vec::as_slice) != Some(key) {
                            ambiguous.push(key.to_vec());
                        }
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(key, t[i]);
                    }
                }
            }
            return Ok(UppVerdict::NotUnique { var: var.clone(), pair: (a, b), ambiguous });
        }
        if *q == Quant::Frozen {
            let ts = ev.pre.tuples();
            if let Some(first) = ts.first() {
                if let Some(other) = ts.iter().find(|t| t[i] != first[i]) {
                    return Ok(UppVerdict::NotFrozen {
                        var: var.clone(),
                        pair: (first.clone(), other.clone()),
                    });
                }
            }
        }
        let (set, map) = minimal_determiner(&ev.pre, i, nfree)?;
        witnesses.push(AuxWitness {
            var: var.clone(),
            quant: *q,
            determined_by: set.iter().map(|&c| phi.free[c].clone()).collect(),
            map,
        });
    }
    Ok(UppVerdict::Valid(UppCertificate { formula: phi.clone(), witnesses }))
}

/// One member of a qfpp closure with the atoms that produced it; atom
/// arguments are coordinates 0..n.
#[derive(Clone, Debug)]
pub struct QfppEntry {
    pub rel: Relation,
    pub atoms: Vec<(String, Vec<usize>)>,
}

/// All n-ary relations qfpp-definable over `lang ∪ {Eq}`, in canonical
/// order (by tuple list).
pub fn qfpp_closure(lang: &Language, n: usize, budget: &Budget) -> Result<Vec<QfppEntry>> {
    let d = lang.domain();
    let points = checked_pow(d, n)
        .filter(|&p| p <= 128 && n <= budget.qfpp_arity.max(1))
        .ok_or_else(|| Error::Budget(format!("qfpp closure at arity {n} over domain {d}")))?;
    let full: u128 = if points == 128 { u128::MAX } else { (1u128 << points) - 1 };
    let all_points: Vec<Vec<u8>> = Points::new(n, d).collect();

    // Distinct cylinders, first atom wins.
    let mut cyl_index: HashMap<u128, usize> = HashMap::new();
    let mut cylinders: Vec<(u128, String, Vec<usize>)> = Vec::new();
    let eq = lang.get("Eq").unwrap().clone();
    let rels: Vec<&Relation> = lang.relations().iter().chain(std::iter::once(&eq)).collect();
    if n > 0 {
        for r in &rels {
            let maps = checked_pow(n, r.arity()).unwrap_or(usize::MAX);
            if maps > 1 << 22 {
                return Err(Error::Budget(format!("{n}^{} argument maps", r.arity())));
            }
            for m in Points::new(r.arity(), n) {
                let args: Vec<usize> = m.iter().map(|&v| v as usize).collect();
                let mut bits = 0u128;
                let mut sub = vec![0u8; args.len()];
                for (pi, p) in all_points.iter().enumerate() {
                    for (s, &a) in sub.iter_mut().zip(&args) {
                        *s = p[a];
                    }
                    if r.contains(&sub) {
                        bits |= 1u128 << pi;
                    }
                }
                if bits != full && !cyl_index.contains_key(&bits) {
                    cyl_index.insert(bits, cylinders.len());
                    cylinders.push((bits, r.name().unwrap().to_string(), args));
                }
            }
        }
    } else {
        // Nullary: only the empty conjunction and, via empty relations, ∅.
        for r in &rels {
            if r.is_empty() {
                cylinders.push((0, r.name().unwrap().to_string(), Vec::new()));
                break;
            }
        }
    }

    // Intersection closure, remembering (parent, cylinder) for each member.
    let mut members: Vec<(u128, Option<(usize, usize)>)> = vec![(full, None)];
    let mut seen: HashMap<u128, usize> = HashMap::from([(full, 0)]);
    let mut head = 0;
    while head < members.len() {
        let cur = members[head].0;
        for (ci, (c, ..)) in cylinders.iter().enumerate() {
            let x = cur & c;
            if let std::collections::hash_map::Entry::Vacant(e) = seen.entry(x) {
                if members.len() >= budget.results {
                    return Err(Error::Budget(format!("more than {} qfpp relations", budget.results)));
                }
                e.insert(members.len());
                members.push((x, Some((head, ci))));
            }
        }
        head += 1;
    }

    let mut out: Vec<QfppEntry> = members
        .iter()
        .map(|(bits, _)| {
            let tuples = all_points
                .iter()
                .enumerate()
                .filter(|(i, _)| bits >> i & 1 == 1)
                .map(|(_, p)| p.clone())
                .collect();
            let mut atoms = Vec::new();
            let mut at = seen[bits];
            while let Some((parent, ci)) = members[at].1 {
                let (_, name, args) = &cylinders[ci];
                atoms.push((name.clone(), args.clone()));
                at = parent;
            }
            atoms.reverse();
            QfppEntry { rel: Relation::from_sorted(n, d, tuples), atoms }
        })
        .collect();
    out.sort_by(|a, b| a.rel.tuples().cmp(b.rel.tuples()));
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PpVerdict {
    Yes,
    /// No polymorphism of arity k separates; larger arities unchecked.
    YesUpToArity(usize),
    /// A polymorphism of the language that does not preserve R.
    No(Operation),
}

/// Decides R ∈ ⟨Γ⟩ by searching for an |R|-ary polymorphism of Γ that
/// maps the tuples of R outside R. Beyond `budget.pp_exact` tuples only
/// k-element subsets of R are tried, with k = `budget.pp_exact`.
pub fn pp_member(r: &Relation, lang: &Language, budget: &Budget) -> Result<PpVerdict> {
    let d = lang.domain();
    if r.domain() != d {
        return Err(Error::Domain(format!("relation over {} vs language over {d}", r.domain())));
    }
    if r.is_empty() {
        let all_const = |c: u8| lang.relations().iter().all(|x| x.contains(&vec![c; x.arity()]));
        return Ok(match (0..d as u8).find(|&c| all_const(c)) {
            Some(c) => PpVerdict::No(Operation::constant(1, d, c)),
            None => PpVerdict::Yes,
        });
    }
    let rels: Vec<&Relation> = lang.relations().iter().collect();
    let complement = r.complement();
    if r.len() <= budget.pp_exact {
        return Ok(match separating_pol(&rels, d, r.tuples(), &complement, budget)? {
            Some(f) => PpVerdict::No(f),
            None => PpVerdict::Yes,
        });
    }
    let k = budget.pp_exact;
    let sets = subsets(r.len(), k);
    let found: Vec<Result<Option<Operation>>> = sets
        .par_iter()
        .map(|s| {
            let rows: Vec<Tuple> = s.iter().map(|&i| r.tuples()[i].clone()).collect();
            separating_pol(&rels, d, &rows, &complement, budget)
        })
        .collect();
    for f in found {
        if let Some(op) = f? {
            return Ok(PpVerdict::No(op));
        }
    }
    Ok(PpVerdict::YesUpToArity(k))
}

/// A polymorphism of `rels` of arity |rows| sending `rows` into `outside`.
fn separating_pol(
    rels: &[&Relation],
    d: usize,
    rows: &[Tuple],
    outside: &Relation,
    budget: &Budget,
) -> Result<Option<Operation>> {
    let m = rows.len();
    if outside.is_empty() {
        return Ok(None);
    }
    let mut prob = pol_problem(rels, d, m, budget)?;
    let n = outside.arity();
    let cols: Vec<usize> = (0..n)
        .map(|j| {
            let col: Vec<u8> = rows.iter().map(|t| t[j]).collect();
            point_index(&col, d)
        })
        .collect();
    let ri = prob.add_relation(outside.clone());
    prob.add_constraint(ri, cols.clone())?;
    let mut order: Vec<usize> = Vec::with_capacity(prob.nvars());
    for &c in &cols {
        if !order.contains(&c) {
            order.push(c);
        }
    }
    for v in 0..prob.nvars() {
        if !order.contains(&v) {
            order.push(v);
        }
    }
    prob.set_order(order);
    Ok(prob.first(budget.nodes)?.map(|table| Operation::new(m, d, table).unwrap()))
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum FindUpp {
    Found(UppCertificate),
    NoneUpTo(usize),
}

/// Searches qfpp-definable (n+j)-ary relations, j = 0..=max_aux, whose
/// projection onto the first n coordinates is R and whose remaining
/// coordinates are determined by the first n.
pub fn find_upp(r: &Relation, lang: &Language, max_aux: usize, budget: &Budget) -> Result<FindUpp> {
    let n = r.arity();
    let head: Vec<usize> = (0..n).collect();
    for j in 0..=max_aux {
        let closure = qfpp_closure(lang, n + j, budget)?;
        for entry in closure {
            let cand = &entry.rel;
            if cand.project(&head)? != *r {
                continue;
            }
            let mut ok = true;
            for i in n..n + j {
                if !determined(cand, i, &head)?.is_yes() {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let name = |c: usize| if c < n { format!("x{}", c + 1) } else { format!("y{}", c - n + 1) };
            let phi = ConjFormula::new(
                r.name().unwrap_or("R"),
                lang.clone(),
                (0..n).map(name).collect(),
                (n..n + j).map(|c| (name(c), Quant::ExistsUnique)).collect(),
                entry
                    .atoms
                    .iter()
                    .map(|(rel, args)| Atom { rel: rel.clone(), args: args.iter().map(|&c| name(c)).collect() })
                    .collect(),
            )?;
            if let UppVerdict::Valid(cert) = check_upp(&phi, r, budget)? {
                return Ok(FindUpp::Found(cert));
            }
        }
    }
    Ok(FindUpp::NoneUpTo(max_aux))
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Normalized {
    Upp(ConjFormula),
    /// The named quantified variable is neither determined nor fictitious.
    Fail(String),
}

/// Turns a pp-definition into a upp-definition when each quantified
/// variable, eliminated last to first, is determined or fictitious.
pub fn normalize_pp_to_upp(phi: &ConjFormula, budget: &Budget) -> Result<Normalized> {
    let mut cur = phi.clone();
    let nfree = cur.free.len();
    let free: Vec<usize> = (0..nfree).collect();
    for qi in (0..cur.quantified.len()).rev() {
        let ev = eval_formula(&cur, budget)?;
        let y = nfree + qi;
        let mut coords = free.clone();
        coords.push(y);
        let q = ev.pre.project(&coords)?;
        if determined(&q, nfree, &free)?.is_yes() {
            cur.quantified[qi].1 = Quant::ExistsUnique;
            continue;
        }
        let var = cur.quantified[qi].0.clone();
        if nfree > 0 && crate::relcore::arg_kind(&q, nfree)? == ArgKind::Fictitious {
            cur.atoms.push(Atom { rel: "Eq".into(), args: vec![cur.free[0].clone(), var] });
            cur.quantified[qi].1 = Quant::ExistsUnique;
            continue;
        }
        return Ok(Normalized::Fail(var));
    }
    Ok(Normalized::Upp(cur))
}

fn is_prime(n: usize) -> bool {
    n >= 2 && (2..n).take_while(|i| i * i <= n).all(|i| !n.is_multiple_of(i))
}

/// Does x − y + z mod |D| preserve the language?
pub fn affine_upp_applicable(lang: &Language) -> Result<bool> {
    let d = lang.domain();
    if !is_prime(d) {
        return Err(Error::Domain(format!("domain size {d} is not prime")));
    }
    preserves_all(&ops::affine(d), lang)
}

/// Tuples of R with coordinate `i` removed that have exactly one
/// extension at `i`.
pub fn eval_alt_unique(r: &Relation, i: usize) -> Result<Relation> {
    if i >= r.arity() {
        return Err(Error::Arity(format!("coordinate {i} out of range for arity {}", r.arity())));
    }
    let mut counts: BTreeMap<Tuple, usize> = BTreeMap::new();
    for t in r.tuples() {
        let mut u = t.clone();
        u.remove(i);
        *counts.entry(u).or_default() += 1;
    }
    let tuples = counts.into_iter().filter(|&(_, c)| c == 1).map(|(t, _)| t).collect();
    Relation::new(r.arity() - 1, r.domain(), tuples)
}
