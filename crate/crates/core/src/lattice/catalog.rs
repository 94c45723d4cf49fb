//! The Boolean clone catalog: fixed entries from the shipped data files
//! and the S chain families generated up to an index bound.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::relcore::{dual_op, dual_rel, named, ops, Language, Operation, Relation};
use crate::{Error, Result};

const GENERATORS: &str = include_str!("../../data/generators.txt");
const RELATIONS: &str = include_str!("../../data/catalog.rel");

#[derive(Clone, Debug)]
pub struct CloneEntry {
    pub name: String,
    pub gens: Vec<Operation>,
    pub lower_covers: Vec<String>,
    pub upper_covers: Vec<String>,
    /// Intersection of an infinite chain; only approximated by the catalog.
    pub limit: bool,
    /// A finite base of the co-clone (for limits: truncated at the bound).
    pub base: Vec<Relation>,
    pub weak_base: Option<Relation>,
    pub plain_base: Option<Vec<Relation>>,
}

impl CloneEntry {
    pub fn coclone(&self) -> String {
        format!("I{}", self.name)
    }

    /// The relation used for catalog checks: the weak base when known,
    /// otherwise the conjunction-free base.
    pub fn check_relations(&self) -> Vec<Relation> {
        match &self.weak_base {
            Some(w) => vec![w.clone()],
            None => self.base.clone(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CloneCatalog {
    bound: usize,
    entries: Vec<CloneEntry>,
    index: HashMap<String, usize>,
}

/// The S chain families: (name, dual name).
const CHAINS: [(&str, &str); 4] = [("S1", "S0"), ("S12", "S02"), ("S11", "S01"), ("S10", "S00")];

/// Dual clone name: conjugating every operation by negation.
pub fn dual_clone_name(name: &str) -> String {
    let (base, idx) = match name.split_once('^') {
        Some((b, i)) => (b, Some(i)),
        None => (name, None),
    };
    let d = match base {
        "R0" => "R1",
        "R1" => "R0",
        "M0" => "M1",
        "M1" => "M0",
        "L0" => "L1",
        "L1" => "L0",
        "E" => "V",
        "V" => "E",
        "E0" => "V1",
        "V1" => "E0",
        "E1" => "V0",
        "V0" => "E1",
        "E2" => "V2",
        "V2" => "E2",
        "I0" => "I1",
        "I1" => "I0",
        other => CHAINS
            .iter()
            .find_map(|&(a, b)| {
                if other == a {
                    Some(b)
                } else if other == b {
                    Some(a)
                } else {
                    None
                }
            })
            .unwrap_or(other),
    };
    match idx {
        Some(i) => format!("{d}^{i}"),
        None => d.to_string(),
    }
}

/// Maps subscript digits to ASCII and a run of superscript digits to
/// `^n`, so that `IS₁₁³` reads as `IS11^3`.
pub fn normalize_name(name: &str) -> String {
    let mut out = String::new();
    let mut in_sup = false;
    for c in name.trim().chars() {
        let sub = "₀₁₂₃₄₅₆₇₈₉".chars().position(|x| x == c);
        let sup = "⁰¹²³⁴⁵⁶⁷⁸⁹".chars().position(|x| x == c);
        match (sub, sup) {
            (Some(d), _) => {
                in_sup = false;
                out.push(char::from(b'0' + d as u8));
            }
            (_, Some(d)) => {
                if !in_sup {
                    out.push('^');
                    in_sup = true;
                }
                out.push(char::from(b'0' + d as u8));
            }
            _ => {
                in_sup = false;
                out.push(c);
            }
        }
    }
    out
}

/// Splits a clone name into family and optional chain index, checking
/// that it names a catalog clone (for any index n ≥ 2).
pub fn parse_clone_name(name: &str) -> Result<(String, Option<usize>)> {
    let name = normalize_name(name);
    let (base, idx) = match name.split_once('^') {
        Some((b, i)) => {
            let n: usize = i.parse().map_err(|_| Error::Unknown(format!("clone {name}")))?;
            (b.to_string(), Some(n))
        }
        None => (name.clone(), None),
    };
    let chain = CHAINS.iter().any(|&(a, b)| base == a || base == b);
    let fixed = fixed_names().contains(&base.as_str());
    match idx {
        Some(n) if chain && n >= 2 => Ok((base, Some(n))),
        None if chain || fixed => Ok((base, None)),
        _ => Err(Error::Unknown(format!("clone {name}"))),
    }
}

fn fixed_names() -> Vec<&'static str> {
    GENERATORS
        .lines()
        .filter_map(|l| l.strip_prefix("clone "))
        .filter_map(|l| l.split_whitespace().next())
        .collect()
}

fn nand_f(n: usize) -> Relation {
    Relation::from_fn(n + 1, 2, |t| t[..n].contains(&0) && t[n] == 0)
}

fn nand_f_t(n: usize) -> Relation {
    Relation::from_fn(n + 2, 2, |t| t[..n].contains(&0) && t[n] == 0 && t[n + 1] == 1)
}

/// Coordinates (x1..xn, x, c0): NANDⁿ(x1..xn), each xi → x, c0 = 0.
fn w_s11(n: usize) -> Relation {
    Relation::from_fn(n + 2, 2, |t| {
        let xs = &t[..n];
        xs.contains(&0) && xs.iter().all(|&v| v <= t[n]) && t[n + 1] == 0
    })
}

/// Coordinates (x1..xn, x, c0, c1).
fn w_s10(n: usize) -> Relation {
    let w = w_s11(n);
    Relation::from_fn(n + 3, 2, |t| w.contains(&t[..n + 2]) && t[n + 2] == 1)
}

/// (¬x1 ∨ … ∨ ¬xk ∨ x)
fn horn(k: usize) -> Relation {
    Relation::from_fn(k + 1, 2, |t| t[..k].contains(&0) || t[k] == 1).named(format!("H{k}"))
}

fn nand_named(n: usize) -> Relation {
    named::nand(n)
}

impl CloneCatalog {
    /// Catalog with chain members S·ⁿ for 2 ≤ n ≤ `bound`.
    pub fn with_chain_bound(bound: usize) -> Result<CloneCatalog> {
        let bound = bound.max(2);
        let rels = Language::parse(RELATIONS)?;
        let mut opmap: BTreeMap<String, Operation> = BTreeMap::new();
        let mut entries: Vec<CloneEntry> = Vec::new();
        let lookup_rel = |tok: &str| -> Result<Relation> {
            let (dual, nm) = match tok.strip_prefix('~') {
                Some(n) => (true, n),
                None => (false, tok),
            };
            let r = if nm == "Eq" {
                Relation::eq(2)
            } else {
                rels.get(nm).cloned().ok_or_else(|| Error::Unknown(format!("catalog relation {nm}")))?
            };
            if dual {
                Ok(dual_rel(&r)?.named(format!("{nm}d")))
            } else {
                Ok(r)
            }
        };
        for (ln, line) in GENERATORS.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            match toks[0] {
                "op" if toks.len() == 4 => {
                    let arity: usize = toks[2].parse().map_err(|_| Error::parse(ln + 1, "arity"))?;
                    opmap.insert(toks[1].to_string(), Operation::from_digits(arity, 2, toks[3])?);
                }
                "clone" if toks.len() >= 2 => {
                    let mut e = CloneEntry {
                        name: toks[1].to_string(),
                        gens: Vec::new(),
                        lower_covers: Vec::new(),
                        upper_covers: Vec::new(),
                        limit: false,
                        base: Vec::new(),
                        weak_base: None,
                        plain_base: None,
                    };
                    let mut section = "";
                    for &t in &toks[2..] {
                        match t {
                            "gens" | "base" | "weak" | "plain" | "covers" => {
                                section = t;
                                continue;
                            }
                            _ => {}
                        }
                        match section {
                            "gens" => e.gens.push(
                                opmap
                                    .get(t)
                                    .cloned()
                                    .ok_or_else(|| Error::parse(ln + 1, format!("unknown op {t}")))?,
                            ),
                            "base" => e.base.push(lookup_rel(t)?),
                            "weak" => e.weak_base = Some(lookup_rel(t)?),
                            "plain" => e.plain_base.get_or_insert_with(Vec::new).push(lookup_rel(t)?),
                            "covers" => e.lower_covers.push(t.to_string()),
                            _ => return Err(Error::parse(ln + 1, format!("unexpected {t}"))),
                        }
                    }
                    if e.base.is_empty() {
                        if let Some(w) = &e.weak_base {
                            e.base.push(w.clone());
                        }
                    }
                    entries.push(e);
                }
                _ => return Err(Error::parse(ln + 1, "expected `op` or `clone`")),
            }
        }
        add_e_plain_bases(&mut entries, bound)?;
        add_chains(&mut entries, bound)?;
        let index: HashMap<String, usize> =
            entries.iter().enumerate().map(|(i, e)| (e.name.clone(), i)).collect();
        for e in &entries {
            for c in &e.lower_covers {
                if !index.contains_key(c) {
                    return Err(Error::Unknown(format!("cover {c} of {}", e.name)));
                }
            }
        }
        let mut uppers: HashMap<String, Vec<String>> = HashMap::new();
        for e in &entries {
            for c in &e.lower_covers {
                uppers.entry(c.clone()).or_default().push(e.name.clone());
            }
        }
        for e in &mut entries {
            e.upper_covers = uppers.remove(&e.name).unwrap_or_default();
        }
        Ok(CloneCatalog { bound, entries, index })
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn entries(&self) -> &[CloneEntry] {
        &self.entries
    }

    pub fn get(&self, name: &str) -> Option<&CloneEntry> {
        let n = normalize_name(name);
        let n = n.strip_prefix('I').filter(|rest| self.index.contains_key(*rest)).unwrap_or(&n);
        self.index.get(n).map(|&i| &self.entries[i])
    }

    /// Entries ordered so that every entry follows all its lower covers.
    pub fn bottom_up(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut done = vec![false; self.entries.len()];
        fn visit(c: &CloneCatalog, i: usize, done: &mut [bool], out: &mut Vec<usize>) {
            if done[i] {
                return;
            }
            done[i] = true;
            for l in &c.entries[i].lower_covers {
                visit(c, c.index[l], done, out);
            }
            out.push(i);
        }
        for i in 0..self.entries.len() {
            visit(self, i, &mut done, &mut out);
        }
        out
    }

    /// Names of all clones contained in `name` (inclusive).
    pub fn below(&self, name: &str) -> HashSet<String> {
        let mut out = HashSet::new();
        let mut stack = vec![name.to_string()];
        while let Some(n) = stack.pop() {
            if out.insert(n.clone()) {
                if let Some(&i) = self.index.get(&n) {
                    stack.extend(self.entries[i].lower_covers.iter().cloned());
                }
            }
        }
        out
    }
}

fn add_e_plain_bases(entries: &mut [CloneEntry], bound: usize) -> Result<()> {
    let hs = |from: usize| (from..=bound).map(horn).collect::<Vec<_>>();
    let nands = || (1..=bound).map(nand_named).collect::<Vec<_>>();
    let plain: Vec<(&str, Vec<Relation>)> = vec![
        ("E", hs(1)),
        ("E0", nands().into_iter().chain(hs(1)).collect()),
        ("E1", hs(0)),
        ("E2", nands().into_iter().chain(hs(0)).collect()),
    ];
    for (name, rels) in plain {
        let dname = dual_clone_name(name);
        let drels = rels.iter().map(|r| Ok(dual_rel(r)?.named(format!("{}d", r.display_name())))).collect::<Result<Vec<_>>>()?;
        for e in entries.iter_mut() {
            if e.name == name {
                e.plain_base = Some(rels.clone());
            } else if e.name == dname {
                e.plain_base = Some(drels.clone());
            }
        }
    }
    Ok(())
}

fn add_chains(entries: &mut Vec<CloneEntry>, bound: usize) -> Result<()> {
    let s12_gen = Operation::from_fn(3, 2, |p| p[0] & (p[1] | (1 - p[2])));
    let s10_gen = Operation::from_fn(3, 2, |p| p[0] & (p[1] | p[2]));
    let mut ones_side: Vec<CloneEntry> = Vec::new();
    let next = |fam: &str, n: usize| if n < bound { format!("{fam}^{}", n + 1) } else { fam.to_string() };
    let entry = |name: String, gens: Vec<Operation>, weak: Relation, plain: Vec<Relation>, covers: Vec<String>, limit: bool| {
        CloneEntry {
            name,
            gens,
            lower_covers: covers,
            upper_covers: Vec::new(),
            limit,
            base: plain.clone(),
            weak_base: Some(weak),
            plain_base: Some(plain),
        }
    };
    for n in 2..=bound {
        let h = ops::threshold(n + 1, n);
        let nand = nand_named(n);
        ones_side.push(entry(
            format!("S1^{n}"),
            vec![ops::and_not(), h.clone()],
            nand_f(n),
            vec![nand.clone()],
            vec![format!("S12^{n}"), format!("S11^{n}"), next("S1", n)],
            false,
        ));
        ones_side.push(entry(
            format!("S12^{n}"),
            vec![s12_gen.clone(), h.clone()],
            nand_f_t(n),
            vec![nand.clone(), named::t()],
            vec![format!("S10^{n}"), next("S12", n)],
            false,
        ));
        ones_side.push(entry(
            format!("S11^{n}"),
            vec![h.clone(), ops::zero()],
            w_s11(n),
            vec![nand.clone(), named::imp()],
            vec![format!("S10^{n}"), next("S11", n)],
            false,
        ));
        let mut covers = vec![next("S10", n)];
        if n == 2 {
            covers.push("D2".into());
        }
        ones_side.push(entry(
            format!("S10^{n}"),
            vec![s10_gen.clone(), h],
            w_s10(n),
            vec![nand, named::imp(), named::t()],
            covers,
            false,
        ));
    }
    // Limits: relations at index bound+1 stand in for the infinite bases.
    let m = bound + 1;
    let nands: Vec<Relation> = (1..=m).map(nand_named).collect();
    let with = |extra: Vec<Relation>| nands.iter().cloned().chain(extra).collect::<Vec<_>>();
    ones_side.push(entry("S1".into(), vec![ops::and_not()], nand_f(m), with(vec![]), vec!["S12".into(), "S11".into()], true));
    ones_side.push(entry("S12".into(), vec![s12_gen], nand_f_t(m), with(vec![named::t()]), vec!["S10".into()], true));
    ones_side.push(entry(
        "S11".into(),
        vec![s10_gen.clone(), ops::zero()],
        w_s11(m),
        with(vec![named::imp()]),
        vec!["S10".into(), "E0".into()],
        true,
    ));
    ones_side.push(entry(
        "S10".into(),
        vec![s10_gen],
        w_s10(m),
        with(vec![named::imp(), named::t()]),
        vec!["E2".into()],
        true,
    ));
    let mut zeros_side = Vec::new();
    for e in &ones_side {
        let dual_rels = |rs: &[Relation]| -> Result<Vec<Relation>> {
            rs.iter().map(|r| Ok(dual_rel(r)?.named(format!("{}d", r.display_name())))).collect()
        };
        zeros_side.push(CloneEntry {
            name: dual_clone_name(&e.name),
            gens: e.gens.iter().map(dual_op).collect::<Result<_>>()?,
            lower_covers: e.lower_covers.iter().map(|c| dual_clone_name(c)).collect(),
            upper_covers: Vec::new(),
            limit: e.limit,
            base: dual_rels(&e.base)?,
            weak_base: e.weak_base.as_ref().map(dual_rel).transpose()?,
            plain_base: e.plain_base.as_deref().map(dual_rels).transpose()?,
        });
    }
    entries.extend(ones_side);
    entries.extend(zeros_side);
    Ok(())
}
