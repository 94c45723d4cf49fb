//! Boolean co-clone identification, the seven-atom profile and the
//! unique-satisfiability classifications built on it.
//!
//! The seven atoms are the minimal Boolean clones: every clone other than
//! the projections contains one of them, so a language whose profile is
//! empty has only projections as polymorphisms.

mod catalog;

use std::fmt;
use std::ops::ControlFlow;

use crate::budget::Budget;
use crate::relcore::{ops, pol_problem, preserves_all, Language, Operation, Relation};
use crate::{Error, Result};

pub use catalog::{dual_clone_name, normalize_name, parse_clone_name, CloneCatalog, CloneEntry};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct AtomProfile {
    pub zero: bool,
    pub one: bool,
    pub neg: bool,
    pub and: bool,
    pub or: bool,
    pub maj: bool,
    pub xor3: bool,
}

impl AtomProfile {
    pub const NAMES: [&'static str; 7] = ["0", "1", "not", "and", "or", "maj", "xor3"];

    pub fn bits(&self) -> [bool; 7] {
        [self.zero, self.one, self.neg, self.and, self.or, self.maj, self.xor3]
    }

    pub fn from_bits(b: [bool; 7]) -> AtomProfile {
        AtomProfile { zero: b[0], one: b[1], neg: b[2], and: b[3], or: b[4], maj: b[5], xor3: b[6] }
    }

    pub fn atoms() -> [Operation; 7] {
        [ops::zero(), ops::one(), ops::not(), ops::and(), ops::or(), ops::maj(), ops::xor3()]
    }

    pub fn is_empty(&self) -> bool {
        self.bits().iter().all(|b| !b)
    }

    pub fn true_names(&self) -> Vec<&'static str> {
        self.bits().iter().zip(Self::NAMES).filter(|(b, _)| **b).map(|(_, n)| n).collect()
    }
}

impl fmt::Display for AtomProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.true_names().join(","))
    }
}

fn require_boolean(lang: &Language) -> Result<()> {
    if lang.domain() != 2 {
        return Err(Error::Domain(format!("expected a Boolean language, got domain {}", lang.domain())));
    }
    Ok(())
}

pub fn atom_profile(lang: &Language) -> Result<AtomProfile> {
    require_boolean(lang)?;
    let mut bits = [false; 7];
    for (b, op) in bits.iter_mut().zip(AtomProfile::atoms()) {
        *b = preserves_all(&op, lang)?;
    }
    Ok(AtomProfile::from_bits(bits))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TractableReason {
    ComplementClosed,
    BothConstants,
    SchaeferEnumerable,
}

impl TractableReason {
    pub fn label(self) -> &'static str {
        match self {
            TractableReason::ComplementClosed => "complement-closed",
            TractableReason::BothConstants => "both-constants",
            TractableReason::SchaeferEnumerable => "schaefer-enumerable",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UsatClass {
    Tractable(TractableReason),
    CoNPComplete,
    USComplete,
}

impl fmt::Display for UsatClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            UsatClass::Tractable(r) => write!(f, "tractable ({})", r.label()),
            UsatClass::CoNPComplete => write!(f, "coNP-complete"),
            UsatClass::USComplete => write!(f, "US-complete"),
        }
    }
}

pub fn usat_from_profile(p: &AtomProfile) -> UsatClass {
    let only = |b: [bool; 7]| p.bits() == b;
    if p.is_empty() {
        UsatClass::USComplete
    } else if only([true, false, false, false, false, false, false])
        || only([false, true, false, false, false, false, false])
    {
        UsatClass::CoNPComplete
    } else if p.neg {
        UsatClass::Tractable(TractableReason::ComplementClosed)
    } else if p.zero && p.one {
        UsatClass::Tractable(TractableReason::BothConstants)
    } else {
        UsatClass::Tractable(TractableReason::SchaeferEnumerable)
    }
}

pub fn usat_class(lang: &Language) -> Result<UsatClass> {
    Ok(usat_from_profile(&atom_profile(lang)?))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UcspClass {
    USComplete,
    CoNPComplete,
    Other,
}

impl fmt::Display for UcspClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UcspClass::USComplete => "US-complete",
            UcspClass::CoNPComplete => "coNP-complete",
            UcspClass::Other => "other",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Soundness {
    Exact,
    /// Only polymorphisms up to this arity were inspected.
    Bounded(usize),
}

impl fmt::Display for Soundness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Soundness::Exact => write!(f, "exact"),
            Soundness::Bounded(k) => write!(f, "bounded({k})"),
        }
    }
}

pub fn ucsp_class(lang: &Language, budget: &Budget) -> Result<(UcspClass, Soundness)> {
    if lang.domain() == 2 {
        let c = match usat_class(lang)? {
            UsatClass::USComplete => UcspClass::USComplete,
            UsatClass::CoNPComplete => UcspClass::CoNPComplete,
            UsatClass::Tractable(_) => UcspClass::Other,
        };
        return Ok((c, Soundness::Exact));
    }
    let k = budget.op_arity(lang.domain());
    let rels: Vec<&Relation> = lang.relations().iter().collect();
    let mut constant: Option<u8> = None;
    let mut other = false;
    for j in 1..=k {
        let prob = pol_problem(&rels, lang.domain(), j, budget)?;
        prob.solve(budget.nodes, |table| {
            let f = Operation::new(j, lang.domain(), table.to_vec()).expect("pol table");
            if f.as_projection().is_some() {
                return ControlFlow::Continue(());
            }
            match (f.as_constant(), constant) {
                (Some(d), None) => {
                    constant = Some(d);
                    ControlFlow::Continue(())
                }
                (Some(d), Some(e)) if d == e => ControlFlow::Continue(()),
                _ => {
                    other = true;
                    ControlFlow::Break(())
                }
            }
        })?;
        if other {
            return Ok((UcspClass::Other, Soundness::Bounded(j)));
        }
    }
    let c = if constant.is_some() { UcspClass::CoNPComplete } else { UcspClass::USComplete };
    Ok((c, Soundness::Bounded(k)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Identification {
    Exact(String),
    /// Somewhere strictly above `lower` and at most `upper`; the catalog
    /// chains were cut before the co-clone could be pinned down.
    Interval { lower: String, upper: String },
}

impl fmt::Display for Identification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Identification::Exact(n) => write!(f, "{n}"),
            Identification::Interval { lower, upper } => write!(f, "interval {lower} {upper}"),
        }
    }
}

/// Default chain bound: one more than the largest relation arity.
pub fn default_chain_bound(lang: &Language) -> usize {
    (lang.max_arity() + 1).max(2)
}

pub fn identify_coclone(lang: &Language, bound: Option<usize>) -> Result<Identification> {
    require_boolean(lang)?;
    let cat = CloneCatalog::with_chain_bound(bound.unwrap_or_else(|| default_chain_bound(lang)))?;
    identify_with(&cat, lang)
}

/// The largest catalog clone whose generators preserve `lang`.
pub fn identify_with(cat: &CloneCatalog, lang: &Language) -> Result<Identification> {
    require_boolean(lang)?;
    let entries = cat.entries();
    let mut cand = vec![false; entries.len()];
    let pos = |name: &str| entries.iter().position(|e| e.name == name).expect("catalog cover");
    for i in cat.bottom_up() {
        let e = &entries[i];
        if !e.lower_covers.iter().all(|l| cand[pos(l)]) {
            continue;
        }
        let mut ok = true;
        for g in &e.gens {
            if !preserves_all(g, lang)? {
                ok = false;
                break;
            }
        }
        cand[i] = ok;
    }
    let maximal: Vec<&CloneEntry> = entries
        .iter()
        .enumerate()
        .filter(|&(i, e)| cand[i] && !e.upper_covers.iter().any(|u| cand[pos(u)]))
        .map(|(_, e)| e)
        .collect();
    match maximal.as_slice() {
        [e] if e.limit => Ok(Identification::Interval {
            lower: format!("I{}^{}", e.name, cat.bound()),
            upper: e.coclone(),
        }),
        [e] => Ok(Identification::Exact(e.coclone())),
        _ => Err(Error::Precondition(format!(
            "polymorphisms match no single catalog clone (maximal: {})",
            maximal.iter().map(|e| e.name.as_str()).collect::<Vec<_>>().join(" ")
        ))),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CoveredVerdict {
    Covered,
    NotCovered,
    /// Uniquely quantified closure coincides with the frozen closure.
    FrozenCollapse,
}

impl fmt::Display for CoveredVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CoveredVerdict::Covered => "covered",
            CoveredVerdict::NotCovered => "not-covered",
            CoveredVerdict::FrozenCollapse => "not-covered-frozen-collapse",
        })
    }
}

/// Whether the named co-clone (e.g. `IE0`, `IS11^3`, `IS₁₁³`) equals its
/// uniquely quantified closure.
pub fn covered_verdict(coclone: &str) -> Result<CoveredVerdict> {
    let norm = normalize_name(coclone);
    let clone = norm.strip_prefix('I').ok_or_else(|| Error::Unknown(format!("co-clone {coclone}")))?;
    let (family, _) = parse_clone_name(clone)?;
    Ok(match family.as_str() {
        "E" | "E0" | "V" | "V1" => CoveredVerdict::NotCovered,
        "S01" | "S11" => CoveredVerdict::FrozenCollapse,
        _ => CoveredVerdict::Covered,
    })
}
