//! Weak bases from the core relation Uˢ: closure of a relation under a set
//! of operations, the qfpp-formula defining C(Uˢ) from a base of Inv(C),
//! and upp-definitions through the core for constants-and-projections
//! clones.

use std::collections::{BTreeSet, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use crate::budget::Budget;
use crate::closure::{check_upp, Atom, ConjFormula, Quant, UppCertificate, UppVerdict};
use crate::relcore::{apply_op, checked_pow, point_at, point_index, pol, Language, Op, Operation, Relation, Tuple};
use crate::{Error, Result};

/// The s tuples of Uˢ over a domain; column j is the j-th point of Dˢ in
/// lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoreTable {
    pub domain: usize,
    pub s: usize,
    pub tuples: Vec<Tuple>,
}

impl CoreTable {
    pub fn width(&self) -> usize {
        self.tuples.first().map_or(0, |t| t.len())
    }

    pub fn relation(&self) -> Relation {
        Relation::new(self.width(), self.domain, self.tuples.clone()).expect("core tuples are in range")
    }

    /// Column index of a point of Dˢ.
    pub fn column(&self, point: &[u8]) -> usize {
        point_index(point, self.domain)
    }
}

/// Widest core relation built; wider ones could not be evaluated anyway.
const MAX_CORE_WIDTH: usize = 1024;

fn core_width(domain: usize, s: usize) -> Result<usize> {
    match checked_pow(domain, s) {
        Some(w) if w <= MAX_CORE_WIDTH => Ok(w),
        _ => Err(Error::Budget(format!("core relation of width {domain}^{s}"))),
    }
}

pub fn u_relation(domain: usize, s: usize) -> Result<CoreTable> {
    if s == 0 || domain == 0 {
        return Err(Error::Precondition("core size and domain must be positive".into()));
    }
    let w = core_width(domain, s)?;
    let tuples = (0..s).map(|i| (0..w).map(|j| point_at(j, s, domain)[i]).collect()).collect();
    Ok(CoreTable { domain, s, tuples })
}

/// Least superset of `r` preserved by every operation in `ops`.
pub fn f_closure(ops: &[Operation], r: &Relation, budget: &Budget) -> Result<Relation> {
    for f in ops {
        if f.domain() != r.domain() {
            return Err(Error::Domain(format!("operation over {} vs relation over {}", f.domain(), r.domain())));
        }
    }
    let mut all: Vec<Tuple> = r.tuples().to_vec();
    let mut seen: HashSet<Tuple> = all.iter().cloned().collect();
    let mut frontier_start = 0;
    while frontier_start < all.len() {
        let old = all.len();
        let mut fresh = Vec::new();
        for f in ops {
            let k = f.arity();
            // sequences over all tuples that use at least one from the frontier
            let mut idx = vec![0usize; k];
            loop {
                if idx.iter().any(|&i| i >= frontier_start) {
                    let rows: Vec<&[u8]> = idx.iter().map(|&i| all[i].as_slice()).collect();
                    if let Some(t) = apply_op(f, &rows)? {
                        if seen.insert(t.clone()) {
                            fresh.push(t);
                            if seen.len() > budget.tuples {
                                return Err(Error::Budget(format!("closure exceeds {} tuples", budget.tuples)));
                            }
                        }
                    }
                }
                let mut done = true;
                let mut p = k;
                while p > 0 {
                    p -= 1;
                    idx[p] += 1;
                    if idx[p] < old {
                        done = false;
                        break;
                    }
                    idx[p] = 0;
                }
                if done {
                    break;
                }
            }
        }
        frontier_start = old;
        all.extend(fresh);
    }
    Relation::new(r.arity(), r.domain(), all)
}

/// C(Uˢ) for the clone generated by `gens` (projections when empty).
pub fn weak_base(gens: &[Operation], domain: usize, s: usize, budget: &Budget) -> Result<Relation> {
    let u = u_relation(domain, s)?;
    f_closure(gens, &u.relation(), budget)
}

fn point_var(point: &[u8]) -> String {
    let mut v = String::from("u");
    for &d in point {
        let _ = write!(v, "{}", char::from_digit(d as u32, 36).unwrap());
    }
    v
}

/// The quantifier-free formula on |D|ˢ variables, one per point of Dˢ,
/// with an atom R(x_{c1},…,x_{cn}) for every R in `base` and every s-tuple
/// of R-tuples (cj the j-th column of the s-tuple). When `base` is a base
/// of Inv(C) it defines C(Uˢ).
pub fn emit_weakbase_qfpp(base: &Language, s: usize, budget: &Budget) -> Result<ConjFormula> {
    let d = base.domain();
    let u = u_relation(d, s)?;
    let w = u.width();
    let free: Vec<String> = (0..w).map(|j| point_var(&point_at(j, s, d))).collect();
    let mut atoms = Vec::new();
    let mut seen: HashSet<(String, Vec<usize>)> = HashSet::new();
    for r in base.relations() {
        let ts = r.tuples();
        let Some(count) = checked_pow(ts.len(), s).filter(|&c| c <= budget.tuples) else {
            return Err(Error::Budget(format!("{}^{s} tuple sequences", ts.len())));
        };
        for code in 0..count {
            let mut c = code;
            let rows: Vec<&Tuple> = (0..s)
                .map(|_| {
                    let t = &ts[c % ts.len()];
                    c /= ts.len();
                    t
                })
                .rev()
                .collect();
            let cols: Vec<usize> = (0..r.arity())
                .map(|j| point_index(&rows.iter().map(|t| t[j]).collect::<Vec<u8>>(), d))
                .collect();
            if seen.insert((r.display_name().to_string(), cols.clone())) {
                atoms.push(Atom { rel: r.display_name().to_string(), args: cols.iter().map(|&j| free[j].clone()).collect() });
            }
        }
    }
    atoms.sort_by(|a, b| (&a.rel, &a.args).cmp(&(&b.rel, &b.args)));
    ConjFormula::new(format!("W{s}"), base.clone(), free, Vec::new(), atoms)
}

/// An upp-definition of R through the core relation F(Uˢ), s = |R|.
#[derive(Clone, Debug)]
pub struct CoreCertificate {
    pub s: usize,
    /// F(Uˢ), named `W` in the certificate's language.
    pub core: Relation,
    /// Core coordinate realizing each coordinate of R.
    pub coords: Vec<usize>,
    /// The pair of coordinates equated to separate constant rows, if any.
    pub eq_pair: Option<(usize, usize)>,
    pub certificate: UppCertificate,
}

/// Builds and checks the upp-definition of `r` over {F(Uˢ)} for a clone
/// generated by constants and projections.
pub fn upp_via_core(r: &Relation, gens: &[Operation], budget: &Budget) -> Result<CoreCertificate> {
    let d = r.domain();
    let mut constants = BTreeSet::new();
    for g in gens {
        if g.domain() != d {
            return Err(Error::Domain(format!("generator over {} vs relation over {d}", g.domain())));
        }
        match g.as_constant() {
            Some(c) if g.as_projection().is_none() => {
                constants.insert(c);
            }
            _ if g.as_projection().is_some() => {}
            _ => return Err(Error::Precondition("generators must be constants or projections".into())),
        }
    }
    for &c in &constants {
        if !r.is_empty() && !r.contains(&vec![c; r.arity()]) {
            return Err(Error::Precondition(format!("relation is not preserved by the constant {c}")));
        }
    }
    let s = r.len();
    if s == 0 {
        return Err(Error::Precondition("empty relation has no core".into()));
    }
    let core = weak_base(gens, d, s, budget)?.named("W");
    let ts = r.tuples();
    let coords: Vec<usize> = (0..r.arity())
        .map(|j| point_index(&ts.iter().map(|t| t[j]).collect::<Vec<u8>>(), d))
        .collect();
    let w = core.arity();
    let mut names: Vec<Option<String>> = vec![None; w];
    let free: Vec<String> = (1..=r.arity()).map(|i| format!("x{i}")).collect();
    let mut atoms = Vec::new();
    for (j, &c) in coords.iter().enumerate() {
        match &names[c] {
            Some(prev) => atoms.push(Atom { rel: "Eq".into(), args: vec![prev.clone(), free[j].clone()] }),
            None => names[c] = Some(free[j].clone()),
        }
    }
    let mut quantified = Vec::new();
    for (p, slot) in names.iter_mut().enumerate() {
        if slot.is_none() {
            let v = point_var(&point_at(p, s, d));
            quantified.push((v.clone(), Quant::ExistsUnique));
            *slot = Some(v);
        }
    }
    let args: Vec<String> = names.iter().map(|n| n.clone().unwrap()).collect();
    atoms.insert(0, Atom { rel: "W".into(), args: args.clone() });
    let eq_pair = if constants.is_empty() {
        None
    } else {
        // Rows of R equal to a constant tuple available in F are told apart
        // from the constant row itself.
        let indicator: Vec<u8> = ts
            .iter()
            .map(|t| {
                let constant_row = t.iter().all(|&v| v == t[0]) && constants.contains(&t[0]);
                constant_row as u8
            })
            .collect();
        let j1 = 0;
        let j2 = point_index(&indicator, d);
        atoms.push(Atom { rel: "Eq".into(), args: vec![args[j1].clone(), args[j2].clone()] });
        Some((j1, j2))
    };
    let lang = Language::from_relations(d, vec![core.clone()])?;
    let phi = ConjFormula::new(format!("{}_core", r.display_name()), lang, free, quantified, atoms)?;
    match check_upp(&phi, r, budget)? {
        UppVerdict::Valid(certificate) => Ok(CoreCertificate { s, core, coords, eq_pair, certificate }),
        other => Err(Error::Precondition(format!("core construction did not validate: {other:?}"))),
    }
}

/// Smallest s ≤ `max_s` for which Pol(C(Uˢ)) agrees with the clone
/// generated by `gens` on all arities up to `k`.
pub fn probe_core_size(gens: &[Operation], domain: usize, max_s: usize, k: usize, budget: &Budget) -> Result<Option<usize>> {
    let k = k.min(budget.op_arity(domain));
    let mut fragments = Vec::new();
    for j in 1..=k {
        let frag = weak_base(gens, domain, j, budget)?;
        fragments.push(frag.tuples().iter().cloned().collect::<BTreeSet<Tuple>>());
    }
    for s in 1..=max_s {
        let w = Language::from_relations(domain, vec![weak_base(gens, domain, s, budget)?])?;
        let mut ok = true;
        for j in 1..=k {
            let tables: BTreeSet<Tuple> = pol(&w, j, budget)?.into_iter().map(|f| f.table().to_vec()).collect();
            if tables != fragments[j - 1] {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(Some(s));
        }
    }
    Ok(None)
}

/// Reads a generator file: an optional `domain D` line followed by
/// `op NAME ARITY DIGITS` lines.
pub fn parse_generators(text: &str) -> Result<(usize, Vec<Operation>)> {
    let mut domain = 2;
    let mut ops = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks.as_slice() {
            ["domain", d] if ops.is_empty() => {
                domain = d.parse().map_err(|_| Error::parse(ln + 1, "bad domain"))?;
            }
            ["op", _, a, digits] => {
                let arity = a.parse().map_err(|_| Error::parse(ln + 1, "bad arity"))?;
                ops.push(Operation::from_digits(arity, domain, digits).map_err(|e| Error::parse(ln + 1, e))?);
            }
            _ => return Err(Error::parse(ln + 1, "expected `domain D` or `op NAME ARITY DIGITS`")),
        }
    }
    Ok((domain, ops))
}

pub fn generators_from_file(path: &Path) -> Result<(usize, Vec<Operation>)> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_generators(&text)
}
