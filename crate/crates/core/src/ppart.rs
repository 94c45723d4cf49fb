//! Partial polymorphisms as certificates that a relation is not
//! upp-definable, and the frozen-collapse separation for the IS₁₁ⁿ family.

use std::fmt::{self, Write as _};
use std::path::Path;

use crate::budget::Budget;
use crate::lattice::{identify_coclone, Identification};
use crate::relcore::{
    determined, dual_language, dual_partial, named, preserves, ops, Language, Op, PartialOperation, Preservation,
    Relation, Tuple,
};
use crate::{Error, Result};

/// dom(f) is closed under componentwise ∧.
pub fn is_meet_closed(f: &PartialOperation) -> bool {
    let dom = f.dom();
    dom.iter().all(|a| {
        dom.iter().all(|b| {
            let m: Vec<u8> = a.iter().zip(b).map(|(x, y)| x & y).collect();
            f.get(&m).is_some()
        })
    })
}

/// dom(f) contains the all-zero point.
pub fn is_zero_closed(f: &PartialOperation) -> bool {
    f.get(&vec![0; f.arity()]).is_some()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Route {
    Ie0,
    /// The IE variant drops zero-closedness; it rests on a remark rather
    /// than a written proof.
    Ie,
    Frozen(usize),
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Route::Ie0 => write!(f, "IE0"),
            Route::Ie => write!(f, "IE"),
            Route::Frozen(n) => write!(f, "frozen({n})"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct SeparationCertificate {
    pub source: Language,
    pub target: Relation,
    pub witness: PartialOperation,
    pub route: Route,
    /// Rows of the target whose image under the witness leaves it.
    pub violation: Vec<Tuple>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Rejection {
    Precondition(String),
    NotMeetClosed,
    NotZeroClosed,
    /// The witness fails on a relation of the source language.
    ViolatesSource { relation: String, rows: Vec<Tuple> },
    PreservesTarget,
    /// Frozen route: the witness does not have the required shape.
    WrongShape(String),
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rejection::Precondition(m) => write!(f, "precondition: {m}"),
            Rejection::NotMeetClosed => write!(f, "witness domain is not closed under meet"),
            Rejection::NotZeroClosed => write!(f, "witness domain lacks the all-zero point"),
            Rejection::ViolatesSource { relation, .. } => write!(f, "witness does not preserve {relation}"),
            Rejection::PreservesTarget => write!(f, "witness preserves the target relation"),
            Rejection::WrongShape(m) => write!(f, "witness shape: {m}"),
        }
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Certification {
    Certified(SeparationCertificate),
    Rejected(Rejection),
}

impl Certification {
    pub fn is_certified(&self) -> bool {
        matches!(self, Certification::Certified(_))
    }
}

fn check_source(lang: &Language, f: &PartialOperation) -> Result<Option<Rejection>> {
    for r in lang.relations() {
        if let Preservation::Violated(rows) = preserves(f, r)? {
            return Ok(Some(Rejection::ViolatesSource { relation: r.display_name().to_string(), rows }));
        }
    }
    Ok(None)
}

/// Certifies that `target` is not upp-definable over `lang` when ⟨lang⟩ is
/// IE0 or IE: the witness must be 0-closed (IE0 only) and ∧-closed,
/// preserve `lang` and violate `target`.
pub fn certify_not_upp(lang: &Language, target: &Relation, f: &PartialOperation) -> Result<Certification> {
    if lang.domain() != 2 || target.domain() != 2 || f.domain() != 2 {
        return Ok(Certification::Rejected(Rejection::Precondition("Boolean inputs required".into())));
    }
    let route = match identify_coclone(lang, None)? {
        Identification::Exact(n) if n == "IE0" => Route::Ie0,
        Identification::Exact(n) if n == "IE" => Route::Ie,
        other => {
            return Ok(Certification::Rejected(Rejection::Precondition(format!(
                "language generates {other}, expected IE0 or IE"
            ))))
        }
    };
    if route == Route::Ie0 && !is_zero_closed(f) {
        return Ok(Certification::Rejected(Rejection::NotZeroClosed));
    }
    if !is_meet_closed(f) {
        return Ok(Certification::Rejected(Rejection::NotMeetClosed));
    }
    if let Some(rej) = check_source(lang, f)? {
        return Ok(Certification::Rejected(rej));
    }
    match preserves(f, target)? {
        Preservation::Preserved => Ok(Certification::Rejected(Rejection::PreservesTarget)),
        Preservation::Violated(violation) => Ok(Certification::Certified(SeparationCertificate {
            source: lang.clone(),
            target: target.clone(),
            witness: f.clone(),
            route,
            violation,
        })),
    }
}

/// Certifies that the frozen closures of a weak and a plain base of
/// IS₁₁ⁿ differ (or, dually, of IS₀₁ⁿ), so the co-clone collapses to its
/// frozen closure without being covered.
pub fn certify_frozen_collapse(
    weak: &Language,
    plain: &Language,
    f: &PartialOperation,
    n: usize,
) -> Result<Certification> {
    let reject = |m: String| Ok(Certification::Rejected(Rejection::Precondition(m)));
    if weak.domain() != 2 || plain.domain() != 2 || f.domain() != 2 {
        return reject("Boolean inputs required".into());
    }
    if n < 2 {
        return reject("the frozen route needs n >= 2".into());
    }
    let bound = Some(n + 1);
    let expect = |l: &Language| -> Result<Option<bool>> {
        Ok(match identify_coclone(l, bound)? {
            Identification::Exact(c) if c == format!("IS11^{n}") => Some(false),
            Identification::Exact(c) if c == format!("IS01^{n}") => Some(true),
            _ => None,
        })
    };
    let dual = match (expect(weak)?, expect(plain)?) {
        (Some(a), Some(b)) if a == b => a,
        _ => return reject(format!("bases do not both generate IS11^{n} or IS01^{n}")),
    };
    let (weak_c, plain_c, fc) = if dual {
        (dual_language(weak)?, dual_language(plain)?, dual_partial(f)?)
    } else {
        (weak.clone(), plain.clone(), f.clone())
    };
    if fc.arity() != n {
        return Ok(Certification::Rejected(Rejection::WrongShape(format!("arity {} instead of {n}", fc.arity()))));
    }
    if fc.get(&vec![0; n]) != Some(0) {
        return Ok(Certification::Rejected(Rejection::WrongShape("value at the zero point must be 0".into())));
    }
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        if fc.get(&e) != Some(1) {
            return Ok(Certification::Rejected(Rejection::WrongShape(format!(
                "value at the weight-one point {i} must be 1"
            ))));
        }
    }
    if let Some(rej) = check_source(&weak_c, &fc)? {
        return Ok(Certification::Rejected(rej));
    }
    let nand = named::nand(n);
    let Some(target) = plain_c.relations().iter().find(|r| **r == nand) else {
        return reject(format!("plain base lacks NAND{n}"));
    };
    match preserves(&fc, target)? {
        Preservation::Preserved => Ok(Certification::Rejected(Rejection::PreservesTarget)),
        Preservation::Violated(mut violation) => {
            let target = if dual {
                for t in &mut violation {
                    t.iter_mut().for_each(|v| *v = 1 - *v);
                }
                plain.relations().iter().find(|r| **r == named::or(n)).cloned().unwrap_or_else(|| target.clone())
            } else {
                target.clone()
            };
            Ok(Certification::Certified(SeparationCertificate {
                source: weak.clone(),
                target,
                witness: f.clone(),
                route: Route::Frozen(n),
                violation,
            }))
        }
    }
}

/// f(0,0) = 0, f(0,1) = f(1,0) = 1, undefined at (1,1).
pub fn ie0_witness() -> PartialOperation {
    PartialOperation::from_points(2, 2, [(vec![0, 0], 0), (vec![0, 1], 1), (vec![1, 0], 1)]).unwrap()
}

/// n-ary: 0ⁿ ↦ 0 and every weight-one point ↦ 1.
pub fn frozen_witness(n: usize) -> PartialOperation {
    let mut pts = vec![(vec![0; n], 0)];
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        pts.push((e, 1));
    }
    PartialOperation::from_points(n, 2, pts).unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DeterminedShape {
    /// t[i] is the meet of these coordinates on every tuple.
    Conjunction(Vec<usize>),
    Constant0,
    NotDetermined,
}

/// How coordinate `i` of a relation preserved by ∧ and 0 is determined by
/// the others.
pub fn ie0_determined_shape(r: &Relation, i: usize) -> Result<DeterminedShape> {
    if r.domain() != 2 || i >= r.arity() {
        return Err(Error::Precondition("Boolean relation and valid coordinate required".into()));
    }
    if !preserves(&ops::and(), r)?.holds() || !preserves(&ops::zero(), r)?.holds() {
        return Err(Error::Precondition("relation is not preserved by and and 0".into()));
    }
    let others: Vec<usize> = (0..r.arity()).filter(|&j| j != i).collect();
    if !determined(r, i, &others)?.is_yes() {
        return Ok(DeterminedShape::NotDetermined);
    }
    if r.tuples().iter().all(|t| t[i] == 0) {
        return Ok(DeterminedShape::Constant0);
    }
    let set: Vec<usize> = others
        .into_iter()
        .filter(|&j| r.tuples().iter().all(|t| t[i] == 0 || t[j] == 1))
        .collect();
    let holds = r.tuples().iter().all(|t| t[i] == set.iter().map(|&j| t[j]).fold(1, |a, b| a & b));
    if holds {
        Ok(DeterminedShape::Conjunction(set))
    } else {
        Err(Error::Precondition("determined coordinate is neither a meet nor constant".into()))
    }
}

/// Renders a partial operation as `pop ARITY DOMAIN` followed by one
/// `point -> value` line per defined point.
pub fn pop_to_text(f: &PartialOperation) -> String {
    let mut out = format!("pop {} {}\n", f.arity(), f.domain());
    for p in f.dom() {
        let pts: Vec<String> = p.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(out, "{} -> {}", pts.join(" "), f.get(&p).unwrap());
    }
    out
}

pub fn parse_pop(text: &str) -> Result<PartialOperation> {
    let mut f: Option<PartialOperation> = None;
    for (ln, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let num = |s: &str| s.parse::<usize>().map_err(|_| Error::parse(ln + 1, format!("bad number {s}")));
        match &mut f {
            None => {
                let toks: Vec<&str> = line.split_whitespace().collect();
                match toks.as_slice() {
                    ["pop", a, d] => f = Some(PartialOperation::nowhere(num(a)?, num(d)?)),
                    _ => return Err(Error::parse(ln + 1, "expected `pop ARITY DOMAIN`")),
                }
            }
            Some(g) => {
                let (lhs, rhs) = line
                    .split_once("->")
                    .or_else(|| line.split_once('→'))
                    .ok_or_else(|| Error::parse(ln + 1, "expected `point -> value`"))?;
                let point = lhs
                    .split_whitespace()
                    .map(|s| num(s).map(|v| v as u8))
                    .collect::<Result<Vec<u8>>>()?;
                let value = num(rhs.trim())? as u8;
                g.define(&point, value).map_err(|e| Error::parse(ln + 1, e))?;
            }
        }
    }
    f.ok_or_else(|| Error::parse(0, "empty partial operation"))
}

pub fn pop_from_file(path: &Path) -> Result<PartialOperation> {
    let text = std::fs::read_to_string(path)
        .map_err(|source| Error::Io { path: path.display().to_string(), source })?;
    parse_pop(&text)
}

/// Searches for an ∧- and 0-closed partial polymorphism of `lang` of arity
/// at most `max_arity` that violates `target`.
pub fn search_ie0_witness(
    lang: &Language,
    target: &Relation,
    max_arity: usize,
    budget: &Budget,
) -> Result<Option<PartialOperation>> {
    let keep = |f: &PartialOperation| is_meet_closed(f) && is_zero_closed(f);
    for k in 1..=max_arity.min(budget.partial_arity(2)) {
        for f in crate::relcore::ppol(lang, k, Some(&keep), budget)? {
            if !preserves(&f, target)?.holds() {
                return Ok(Some(f));
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closure::{find_upp, FindUpp};
    use crate::lattice::CloneCatalog;

    fn iff_and() -> Relation {
        named::iff_and()
    }

    fn catalog_lang(name: &str, plain: bool) -> Language {
        let cat = CloneCatalog::with_chain_bound(4).unwrap();
        let e = cat.get(name).unwrap();
        let rels = if plain { e.plain_base.clone().unwrap() } else { vec![e.weak_base.clone().unwrap()] };
        Language::from_relations(2, rels).unwrap()
    }

    #[test]
    fn closedness() {
        let f = ie0_witness();
        assert!(is_meet_closed(&f) && is_zero_closed(&f));
        let g = PartialOperation::from_points(2, 2, [(vec![0, 1], 1), (vec![1, 0], 1)]).unwrap();
        assert!(!is_zero_closed(&g));
        assert!(!is_meet_closed(&g));
        let h = PartialOperation::from_points(2, 2, [(vec![1, 1], 1)]).unwrap();
        assert!(is_meet_closed(&h) && !is_zero_closed(&h));
    }

    #[test]
    fn ie0_certificate() {
        let rw = catalog_lang("E0", false);
        let c = certify_not_upp(&rw, &iff_and(), &ie0_witness()).unwrap();
        assert!(c.is_certified());
        let g = PartialOperation::from_points(2, 2, [(vec![0, 1], 1), (vec![1, 0], 1)]).unwrap();
        assert!(matches!(
            certify_not_upp(&rw, &iff_and(), &g).unwrap(),
            Certification::Rejected(Rejection::NotZeroClosed)
        ));
        assert!(matches!(
            certify_not_upp(&rw, &named::imp(), &ie0_witness()).unwrap(),
            Certification::Rejected(Rejection::PreservesTarget)
        ));
        // (0,1) and (1,0) are both in NAND2 and f maps them to (1,1).
        assert!(certify_not_upp(&rw, &named::nand(2), &ie0_witness()).unwrap().is_certified());
        let wrong = Language::from_relations(2, vec![named::ne()]).unwrap();
        assert!(matches!(
            certify_not_upp(&wrong, &iff_and(), &ie0_witness()).unwrap(),
            Certification::Rejected(Rejection::Precondition(_))
        ));
        let b = Budget::default();
        assert!(matches!(find_upp(&iff_and(), &rw, 1, &b).unwrap(), FindUpp::NoneUpTo(1)));
        assert!(matches!(find_upp(&named::nand(2), &rw, 1, &b).unwrap(), FindUpp::NoneUpTo(1)));
    }

    #[test]
    fn ie_route() {
        let rw = catalog_lang("E", false);
        match certify_not_upp(&rw, &iff_and(), &ie0_witness()).unwrap() {
            Certification::Certified(c) => assert_eq!(c.route, Route::Ie),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn frozen_certificates() {
        for n in [2, 3] {
            let w = catalog_lang(&format!("S11^{n}"), false);
            let p = catalog_lang(&format!("S11^{n}"), true);
            let c = certify_frozen_collapse(&w, &p, &frozen_witness(n), n).unwrap();
            assert!(c.is_certified(), "n={n}: {c:?}");
            let wd = catalog_lang(&format!("S01^{n}"), false);
            let pd = catalog_lang(&format!("S01^{n}"), true);
            let fd = dual_partial(&frozen_witness(n)).unwrap();
            assert!(certify_frozen_collapse(&wd, &pd, &fd, n).unwrap().is_certified());
        }
        let w = catalog_lang("S11^2", false);
        let p = catalog_lang("S11^2", true);
        let bad = PartialOperation::from_points(2, 2, [(vec![0, 0], 1), (vec![0, 1], 1), (vec![1, 0], 1)]).unwrap();
        assert!(matches!(
            certify_frozen_collapse(&w, &p, &bad, 2).unwrap(),
            Certification::Rejected(Rejection::WrongShape(_))
        ));
    }

    #[test]
    fn shapes() {
        let and_graph = Relation::from_fn(3, 2, |t| t[2] == t[0] & t[1]);
        assert_eq!(ie0_determined_shape(&and_graph, 2).unwrap(), DeterminedShape::Conjunction(vec![0, 1]));
        let r = Relation::new(2, 2, vec![vec![0, 0], vec![1, 0]]).unwrap();
        assert_eq!(ie0_determined_shape(&r, 1).unwrap(), DeterminedShape::Constant0);
        assert_eq!(ie0_determined_shape(&named::nand(2), 1).unwrap(), DeterminedShape::NotDetermined);
        assert!(ie0_determined_shape(&named::or(2), 0).is_err());
    }

    #[test]
    fn pop_text() {
        let f = ie0_witness();
        let text = pop_to_text(&f);
        assert_eq!(text, "pop 2 2\n0 0 -> 0\n0 1 -> 1\n1 0 -> 1\n");
        assert_eq!(parse_pop(&text).unwrap(), f);
        assert_eq!(parse_pop("pop 2 2\n0 0 → 0\n0 1 → 1\n1 0 → 1\n").unwrap(), f);
        assert!(parse_pop("0 0 -> 1").is_err());
        assert!(parse_pop("pop 2 2\n0 0 -> 1\n0 0 -> 0\n").is_err());
    }

    #[test]
    fn witness_search() {
        let rw = catalog_lang("E0", false);
        let b = Budget::default();
        let f = search_ie0_witness(&rw, &iff_and(), 2, &b).unwrap().unwrap();
        assert!(certify_not_upp(&rw, &iff_and(), &f).unwrap().is_certified());
    }
}
