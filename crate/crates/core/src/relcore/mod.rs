//! Relations, total and partial operations, and the preservation relation
//! between them.

pub mod named;
pub mod ops;
mod text;

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::hash::{Hash, Hasher};

use crate::budget::Budget;
use crate::search::Problem;
use crate::{Error, Result};

pub type Tuple = Vec<u8>;

/// A finite relation with tuples kept sorted and deduplicated.
#[derive(Clone, Debug)]
pub struct Relation {
    name: Option<String>,
    arity: usize,
    domain: usize,
    tuples: Vec<Tuple>,
    // Membership bitmap for Boolean relations of arity <= 6.
    bits: Option<u64>,
}

impl PartialEq for Relation {
    fn eq(&self, other: &Self) -> bool {
        self.arity == other.arity && self.domain == other.domain && self.tuples == other.tuples
    }
}

impl Eq for Relation {}

impl Hash for Relation {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.arity.hash(state);
        self.domain.hash(state);
        self.tuples.hash(state);
    }
}

impl PartialOrd for Relation {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Relation {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.arity, self.domain, &self.tuples).cmp(&(other.arity, other.domain, &other.tuples))
    }
}

impl Relation {
    /// Builds a relation, sorting and deduplicating `tuples`.
    pub fn new(arity: usize, domain: usize, tuples: Vec<Tuple>) -> Result<Relation> {
        if !(1..=64).contains(&domain) {
            return Err(Error::Domain(format!("domain size {domain} outside 1..=64")));
        }
        for t in &tuples {
            if t.len() != arity {
                return Err(Error::Arity(format!(
                    "tuple {t:?} has {} entries, expected {arity}",
                    t.len()
                )));
            }
            if let Some(&v) = t.iter().find(|&&v| v as usize >= domain) {
                return Err(Error::Domain(format!("value {v} outside domain of size {domain}")));
            }
        }
        let mut tuples = tuples;
        tuples.sort_unstable();
        tuples.dedup();
        Ok(Relation::from_sorted(arity, domain, tuples))
    }

    pub(crate) fn from_sorted(arity: usize, domain: usize, tuples: Vec<Tuple>) -> Relation {
        debug_assert!(tuples.windows(2).all(|w| w[0] < w[1]));
        let bits = (domain == 2 && arity <= 6).then(|| {
            tuples.iter().fold(0u64, |acc, t| acc | (1u64 << bool_index(t)))
        });
        Relation { name: None, arity, domain, tuples, bits }
    }

    pub fn named(mut self, name: impl Into<String>) -> Relation {
        self.name = Some(name.into());
        self
    }

    pub fn empty(arity: usize, domain: usize) -> Relation {
        Relation::from_sorted(arity, domain, Vec::new())
    }

    pub fn full(arity: usize, domain: usize) -> Relation {
        let tuples = Points::new(arity, domain).collect();
        Relation::from_sorted(arity, domain, tuples)
    }

    /// Binary equality over a domain of the given size.
    pub fn eq(domain: usize) -> Relation {
        let tuples = (0..domain as u8).map(|d| vec![d, d]).collect();
        Relation::from_sorted(2, domain, tuples).named("Eq")
    }

    pub fn from_fn(arity: usize, domain: usize, pred: impl Fn(&[u8]) -> bool) -> Relation {
        let tuples = Points::new(arity, domain).filter(|t| pred(t)).collect();
        Relation::from_sorted(arity, domain, tuples)
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn tuples(&self) -> &[Tuple] {
        &self.tuples
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn bitmap(&self) -> Option<u64> {
        self.bits
    }

    pub fn contains(&self, t: &[u8]) -> bool {
        if t.len() != self.arity {
            return false;
        }
        match self.bits {
            Some(b) => t.iter().all(|&v| v < 2) && b >> bool_index(t) & 1 == 1,
            None => self.tuples.binary_search_by(|x| x.as_slice().cmp(t)).is_ok(),
        }
    }

    /// Projection onto `coords` (in that order, repetitions allowed).
    pub fn project(&self, coords: &[usize]) -> Result<Relation> {
        if let Some(&c) = coords.iter().find(|&&c| c >= self.arity) {
            return Err(Error::Arity(format!("coordinate {c} out of range for arity {}", self.arity)));
        }
        let tuples = self
            .tuples
            .iter()
            .map(|t| coords.iter().map(|&c| t[c]).collect())
            .collect();
        Relation::new(coords.len(), self.domain, tuples)
    }

    pub fn complement(&self) -> Relation {
        Relation::from_fn(self.arity, self.domain, |t| !self.contains(t))
    }

    pub fn intersect(&self, other: &Relation) -> Result<Relation> {
        self.check_same_shape(other)?;
        let tuples = self.tuples.iter().filter(|t| other.contains(t)).cloned().collect();
        Ok(Relation::from_sorted(self.arity, self.domain, tuples))
    }

    pub fn union(&self, other: &Relation) -> Result<Relation> {
        self.check_same_shape(other)?;
        let mut tuples = self.tuples.clone();
        tuples.extend(other.tuples.iter().cloned());
        Relation::new(self.arity, self.domain, tuples)
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.arity == other.arity && self.tuples.iter().all(|t| other.contains(t))
    }

    fn check_same_shape(&self, other: &Relation) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::Arity(format!("{} vs {}", self.arity, other.arity)));
        }
        if self.domain != other.domain {
            return Err(Error::Domain(format!("{} vs {}", self.domain, other.domain)));
        }
        Ok(())
    }

    /// Reorders or repeats coordinates: result tuple i-th entry is t[perm[i]].
    pub fn permute(&self, perm: &[usize]) -> Result<Relation> {
        self.project(perm)
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or("R")
    }
}

fn bool_index(t: &[u8]) -> u32 {
    t.iter().fold(0u32, |acc, &v| acc << 1 | v as u32)
}

/// Lexicographic enumeration of D^n.
#[derive(Clone, Debug)]
pub struct Points {
    cur: Option<Vec<u8>>,
    domain: u8,
}

impl Points {
    pub fn new(arity: usize, domain: usize) -> Points {
        let cur = (domain > 0).then(|| vec![0u8; arity]);
        Points { cur, domain: domain as u8 }
    }
}

impl Iterator for Points {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        let out = self.cur.clone()?;
        let cur = self.cur.as_mut().unwrap();
        let mut i = cur.len();
        loop {
            if i == 0 {
                self.cur = None;
                break;
            }
            i -= 1;
            cur[i] += 1;
            if cur[i] < self.domain {
                break;
            }
            cur[i] = 0;
        }
        Some(out)
    }
}

/// Index of a point of D^k in lexicographic order (first argument most
/// significant).
pub fn point_index(point: &[u8], domain: usize) -> usize {
    point.iter().fold(0usize, |acc, &v| acc * domain + v as usize)
}

pub fn point_at(mut index: usize, arity: usize, domain: usize) -> Vec<u8> {
    let mut p = vec![0u8; arity];
    for slot in p.iter_mut().rev() {
        *slot = (index % domain) as u8;
        index /= domain;
    }
    p
}

pub fn checked_pow(base: usize, exp: usize) -> Option<usize> {
    (0..exp).try_fold(1usize, |acc, _| acc.checked_mul(base))
}

/// Common interface of total and partial operations.
pub trait Op {
    fn arity(&self) -> usize;
    fn domain(&self) -> usize;
    /// Value at a point, `None` when outside the domain of definition.
    fn value(&self, args: &[u8]) -> Option<u8>;
    fn is_symmetric(&self) -> bool;
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Operation {
    arity: usize,
    domain: usize,
    table: Vec<u8>,
}

impl Operation {
    pub fn new(arity: usize, domain: usize, table: Vec<u8>) -> Result<Operation> {
        if arity == 0 {
            return Err(Error::Arity("operations need positive arity".into()));
        }
        let size = checked_pow(domain, arity)
            .ok_or_else(|| Error::Budget(format!("table of {domain}^{arity} entries")))?;
        if table.len() != size {
            return Err(Error::Arity(format!("table has {} entries, expected {size}", table.len())));
        }
        if let Some(&v) = table.iter().find(|&&v| v as usize >= domain) {
            return Err(Error::Domain(format!("table value {v} outside domain {domain}")));
        }
        Ok(Operation { arity, domain, table })
    }

    pub fn from_fn(arity: usize, domain: usize, f: impl Fn(&[u8]) -> u8) -> Operation {
        let table = Points::new(arity, domain).map(|p| f(&p)).collect();
        Operation { arity, domain, table }
    }

    /// Parses a table written as one digit per point, e.g. "0001" for ∧.
    pub fn from_digits(arity: usize, domain: usize, digits: &str) -> Result<Operation> {
        let table = digits
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| {
                c.to_digit(36)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::Domain(format!("bad table digit {c:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        Operation::new(arity, domain, table)
    }

    pub fn digits(&self) -> String {
        self.table
            .iter()
            .map(|&v| std::char::from_digit(v as u32, 36).unwrap())
            .collect()
    }

    pub fn projection(arity: usize, domain: usize, i: usize) -> Operation {
        Operation::from_fn(arity, domain, |p| p[i])
    }

    pub fn constant(arity: usize, domain: usize, d: u8) -> Operation {
        Operation::from_fn(arity, domain, |_| d)
    }

    pub fn table(&self) -> &[u8] {
        &self.table
    }

    pub fn eval(&self, args: &[u8]) -> u8 {
        self.table[point_index(args, self.domain)]
    }

    pub fn as_projection(&self) -> Option<usize> {
        (0..self.arity).find(|&i| {
            Points::new(self.arity, self.domain)
                .enumerate()
                .all(|(idx, p)| self.table[idx] == p[i])
        })
    }

    pub fn as_constant(&self) -> Option<u8> {
        let first = self.table[0];
        self.table.iter().all(|&v| v == first).then_some(first)
    }

    pub fn to_partial(&self) -> PartialOperation {
        PartialOperation {
            arity: self.arity,
            domain: self.domain,
            table: self.table.iter().map(|&v| Some(v)).collect(),
        }
    }
}

impl Op for Operation {
    fn arity(&self) -> usize {
        self.arity
    }

    fn domain(&self) -> usize {
        self.domain
    }

    fn value(&self, args: &[u8]) -> Option<u8> {
        Some(self.eval(args))
    }

    fn is_symmetric(&self) -> bool {
        symmetric_table(self.arity, self.domain, |i| Some(self.table[i]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PartialOperation {
    arity: usize,
    domain: usize,
    table: Vec<Option<u8>>,
}

impl PartialOperation {
    pub fn new(arity: usize, domain: usize, table: Vec<Option<u8>>) -> Result<PartialOperation> {
        if arity == 0 {
            return Err(Error::Arity("operations need positive arity".into()));
        }
        let size = checked_pow(domain, arity)
            .ok_or_else(|| Error::Budget(format!("table of {domain}^{arity} entries")))?;
        if table.len() != size {
            return Err(Error::Arity(format!("table has {} entries, expected {size}", table.len())));
        }
        if let Some(v) = table.iter().flatten().find(|&&v| v as usize >= domain) {
            return Err(Error::Domain(format!("table value {v} outside domain {domain}")));
        }
        Ok(PartialOperation { arity, domain, table })
    }

    pub fn nowhere(arity: usize, domain: usize) -> PartialOperation {
        let size = checked_pow(domain, arity).expect("table size overflow");
        PartialOperation { arity, domain, table: vec![None; size] }
    }

    /// Builds a partial operation from explicit `point -> value` pairs.
    pub fn from_points(
        arity: usize,
        domain: usize,
        points: impl IntoIterator<Item = (Vec<u8>, u8)>,
    ) -> Result<PartialOperation> {
        let mut f = PartialOperation::new(arity, domain, vec![None; checked_pow(domain, arity).unwrap_or(0)])?;
        for (p, v) in points {
            f.define(&p, v)?;
        }
        Ok(f)
    }

    pub fn define(&mut self, point: &[u8], value: u8) -> Result<()> {
        if point.len() != self.arity {
            return Err(Error::Arity(format!("point {point:?} for arity {}", self.arity)));
        }
        if point.iter().chain(std::iter::once(&value)).any(|&v| v as usize >= self.domain) {
            return Err(Error::Domain(format!("{point:?} -> {value} outside domain {}", self.domain)));
        }
        let idx = point_index(point, self.domain);
        match self.table[idx] {
            Some(old) if old != value => Err(Error::Precondition(format!(
                "point {point:?} already mapped to {old}"
            ))),
            _ => {
                self.table[idx] = Some(value);
                Ok(())
            }
        }
    }

    pub fn table(&self) -> &[Option<u8>] {
        &self.table
    }

    pub fn get(&self, point: &[u8]) -> Option<u8> {
        self.table[point_index(point, self.domain)]
    }

    /// Points where the operation is defined, in lexicographic order.
    pub fn dom(&self) -> Vec<Vec<u8>> {
        Points::new(self.arity, self.domain)
            .zip(&self.table)
            .filter(|(_, v)| v.is_some())
            .map(|(p, _)| p)
            .collect()
    }

    pub fn is_total(&self) -> bool {
        self.table.iter().all(Option::is_some)
    }

    pub fn to_total(&self) -> Option<Operation> {
        let table = self.table.iter().copied().collect::<Option<Vec<u8>>>()?;
        Some(Operation { arity: self.arity, domain: self.domain, table })
    }

    /// `self` is a suboperation of `other`: smaller domain, agreeing values.
    pub fn is_sub_of(&self, other: &PartialOperation) -> bool {
        self.arity == other.arity
            && self.domain == other.domain
            && self
                .table
                .iter()
                .zip(&other.table)
                .all(|(a, b)| a.is_none() || a == b)
    }

    pub fn restrict(&self, keep: impl Fn(&[u8]) -> bool) -> PartialOperation {
        let table = Points::new(self.arity, self.domain)
            .zip(&self.table)
            .map(|(p, v)| if keep(&p) { *v } else { None })
            .collect();
        PartialOperation { arity: self.arity, domain: self.domain, table }
    }
}

impl Op for PartialOperation {
    fn arity(&self) -> usize {
        self.arity
    }

    fn domain(&self) -> usize {
        self.domain
    }

    fn value(&self, args: &[u8]) -> Option<u8> {
        self.get(args)
    }

    fn is_symmetric(&self) -> bool {
        symmetric_table(self.arity, self.domain, |i| self.table[i])
    }
}

fn symmetric_table(arity: usize, domain: usize, at: impl Fn(usize) -> Option<u8>) -> bool {
    if arity < 2 {
        return true;
    }
    Points::new(arity, domain).enumerate().all(|(idx, mut p)| {
        (0..arity - 1).all(|i| {
            p.swap(i, i + 1);
            let same = at(point_index(&p, domain)) == at(idx);
            p.swap(i, i + 1);
            same
        })
    })
}

/// Componentwise application of `f` to `rows`. `None` means some column
/// lies outside the domain of definition.
pub fn apply_op<O: Op + ?Sized>(f: &O, rows: &[&[u8]]) -> Result<Option<Tuple>> {
    if rows.len() != f.arity() {
        return Err(Error::Arity(format!("{} rows for a {}-ary operation", rows.len(), f.arity())));
    }
    let n = rows.first().map_or(0, |r| r.len());
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Arity("rows of unequal length".into()));
    }
    if rows.iter().flat_map(|r| r.iter()).any(|&v| v as usize >= f.domain()) {
        return Err(Error::Domain(format!("row value outside domain {}", f.domain())));
    }
    let mut col = vec![0u8; rows.len()];
    let mut out = Vec::with_capacity(n);
    for j in 0..n {
        for (c, r) in col.iter_mut().zip(rows) {
            *c = r[j];
        }
        match f.value(&col) {
            Some(v) => out.push(v),
            None => return Ok(None),
        }
    }
    Ok(Some(out))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Preservation {
    Preserved,
    /// A sequence of tuples whose image is defined and lies outside R.
    Violated(Vec<Tuple>),
}

impl Preservation {
    pub fn holds(&self) -> bool {
        matches!(self, Preservation::Preserved)
    }
}

/// Decides whether `f` preserves `r`. Symmetric operations only visit
/// multisets of tuples.
pub fn preserves<O: Op + ?Sized>(f: &O, r: &Relation) -> Result<Preservation> {
    if f.domain() != r.domain() {
        return Err(Error::Domain(format!(
            "operation over {} vs relation over {}",
            f.domain(),
            r.domain()
        )));
    }
    let ts = r.tuples();
    if ts.is_empty() {
        return Ok(Preservation::Preserved);
    }
    let k = f.arity();
    let n = r.arity();
    let sym = f.is_symmetric();
    if sym && k >= 3 && r.domain() == 2 {
        return Ok(preserves_by_counts(f, r));
    }
    let mut idx = vec![0usize; k];
    let mut col = vec![0u8; k];
    let mut img = vec![0u8; n];
    loop {
        let mut defined = true;
        for j in 0..n {
            for (c, &i) in col.iter_mut().zip(&idx) {
                *c = ts[i][j];
            }
            match f.value(&col) {
                Some(v) => img[j] = v,
                None => {
                    defined = false;
                    break;
                }
            }
        }
        if defined && !r.contains(&img) {
            return Ok(Preservation::Violated(idx.iter().map(|&i| ts[i].clone()).collect()));
        }
        // odometer, last position fastest
        let mut p = k;
        loop {
            if p == 0 {
                return Ok(Preservation::Preserved);
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < ts.len() {
                break;
            }
        }
        for q in p + 1..k {
            idx[q] = if sym { idx[p] } else { 0 };
        }
    }
}

/// Preservation for symmetric Boolean operations. The image of a multiset
/// of rows depends only on the number of ones per column, so rows are
/// added one at a time while tracking per-column counts, merged whenever
/// two counts can no longer lead to different values.
fn preserves_by_counts<O: Op + ?Sized>(f: &O, r: &Relation) -> Preservation {
    let k = f.arity();
    let n = r.arity();
    let ts = r.tuples();
    let by_count: Vec<Option<u8>> = (0..=k)
        .map(|c| {
            let p: Vec<u8> = (0..k).map(|i| (i >= k - c) as u8).collect();
            f.value(&p)
        })
        .collect();
    // canon[i][c]: smallest count equivalent to c after i rows
    let canon: Vec<Vec<u8>> = (0..=k)
        .map(|i| {
            let sig = |c: usize| (0..=k - i).map(|m| by_count[c + m]).collect::<Vec<_>>();
            (0..=i).map(|c| (0..=c).find(|&c2| sig(c2) == sig(c)).unwrap() as u8).collect()
        })
        .collect();
    // Each layer holds (counts, parent index, tuple index).
    let mut layers: Vec<Vec<(Vec<u8>, usize, usize)>> = vec![vec![(vec![0u8; n], 0, 0)]];
    for i in 1..=k {
        let prev = &layers[i - 1];
        let mut seen: HashSet<Vec<u8>> = HashSet::new();
        let mut next = Vec::new();
        for (pi, (counts, ..)) in prev.iter().enumerate() {
            for (ti, t) in ts.iter().enumerate() {
                let c: Vec<u8> = counts
                    .iter()
                    .zip(t)
                    .map(|(&c, &v)| canon[i][(c + v) as usize])
                    .collect();
                if seen.insert(c.clone()) {
                    next.push((c, pi, ti));
                }
            }
        }
        layers.push(next);
    }
    for (si, (counts, ..)) in layers[k].iter().enumerate() {
        let img: Option<Vec<u8>> = counts.iter().map(|&c| by_count[c as usize]).collect();
        if let Some(img) = img {
            if !r.contains(&img) {
                let mut rows = Vec::with_capacity(k);
                let mut at = si;
                for i in (1..=k).rev() {
                    let (_, parent, ti) = &layers[i][at];
                    rows.push(ts[*ti].clone());
                    at = *parent;
                }
                rows.reverse();
                return Preservation::Violated(rows);
            }
        }
    }
    Preservation::Preserved
}

pub fn preserves_all<O: Op + ?Sized>(f: &O, lang: &Language) -> Result<bool> {
    for r in lang.relations() {
        if !preserves(f, r)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Constraint scopes expressing "the k-ary table over D^k preserves R":
/// one scope per k-sequence of R-tuples, deduplicated.
pub(crate) fn pol_scopes(r: &Relation, k: usize, budget: &Budget) -> Result<Vec<Vec<usize>>> {
    let ts = r.tuples();
    let count = checked_pow(ts.len(), k).unwrap_or(usize::MAX);
    if count > budget.tuples * 16 {
        return Err(Error::Budget(format!(
            "{} tuples to the power {k} exceeds the sequence budget",
            ts.len()
        )));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    if ts.is_empty() {
        return Ok(out);
    }
    let d = r.domain();
    let mut idx = vec![0usize; k];
    loop {
        let scope: Vec<usize> = (0..r.arity())
            .map(|j| idx.iter().fold(0usize, |acc, &i| acc * d + ts[i][j] as usize))
            .collect();
        if seen.insert(scope.clone()) {
            out.push(scope);
        }
        let mut p = k;
        loop {
            if p == 0 {
                return Ok(out);
            }
            p -= 1;
            idx[p] += 1;
            if idx[p] < ts.len() {
                break;
            }
            idx[p] = 0;
        }
    }
}

/// The constraint problem whose solutions are the k-ary polymorphisms of
/// the given relations.
pub(crate) fn pol_problem(rels: &[&Relation], domain: usize, k: usize, budget: &Budget) -> Result<Problem> {
    let points = checked_pow(domain, k)
        .filter(|&p| p <= 4096)
        .ok_or_else(|| Error::Budget(format!("{domain}^{k} table points")))?;
    let mut prob = Problem::new(domain, points);
    for r in rels {
        if r.domain() != domain {
            return Err(Error::Domain(format!("relation over {} in a domain-{domain} problem", r.domain())));
        }
        let ri = prob.add_relation((*r).clone());
        for scope in pol_scopes(r, k, budget)? {
            prob.add_constraint(ri, scope)?;
        }
    }
    Ok(prob)
}

/// All k-ary polymorphisms of `lang`, in lexicographic table order.
pub fn pol(lang: &Language, k: usize, budget: &Budget) -> Result<Vec<Operation>> {
    if k == 0 || k > budget.op_arity(lang.domain()) {
        return Err(Error::Budget(format!(
            "arity {k} outside the enumeration budget for domain {}",
            lang.domain()
        )));
    }
    let rels: Vec<&Relation> = lang.relations().iter().collect();
    let prob = pol_problem(&rels, lang.domain(), k, budget)?;
    let mut out = Vec::new();
    let mut overflow = false;
    prob.solve(budget.nodes, |sol| {
        if out.len() >= budget.results {
            overflow = true;
            return std::ops::ControlFlow::Break(());
        }
        out.push(Operation { arity: k, domain: lang.domain(), table: sol.to_vec() });
        std::ops::ControlFlow::Continue(())
    })?;
    if overflow {
        return Err(Error::Budget(format!("more than {} polymorphisms", budget.results)));
    }
    Ok(out)
}

/// All k-ary partial polymorphisms of `lang` accepted by `filter`.
///
/// Internally the value `D` stands for "undefined"; the image of a
/// sequence may then contain it, which is exactly the partial-preservation
/// escape clause.
pub fn ppol(
    lang: &Language,
    k: usize,
    filter: Option<&dyn Fn(&PartialOperation) -> bool>,
    budget: &Budget,
) -> Result<Vec<PartialOperation>> {
    let d = lang.domain();
    if k == 0 || k > budget.partial_arity(d) {
        return Err(Error::Budget(format!("partial arity {k} outside the enumeration budget for domain {d}")));
    }
    let points = checked_pow(d, k).unwrap();
    let mut prob = Problem::new(d + 1, points);
    for r in lang.relations() {
        let ext = Relation::from_fn(r.arity(), d + 1, |t| {
            t.iter().any(|&v| v as usize == d) || r.contains(t)
        });
        let ri = prob.add_relation(ext);
        for scope in pol_scopes(r, k, budget)? {
            prob.add_constraint(ri, scope)?;
        }
    }
    let mut out = Vec::new();
    let mut overflow = false;
    prob.solve(budget.nodes, |sol| {
        let table = sol.iter().map(|&v| (v as usize != d).then_some(v)).collect();
        let f = PartialOperation { arity: k, domain: d, table };
        if filter.is_none_or(|keep| keep(&f)) {
            if out.len() >= budget.results {
                overflow = true;
                return std::ops::ControlFlow::Break(());
            }
            out.push(f);
        }
        std::ops::ControlFlow::Continue(())
    })?;
    if overflow {
        return Err(Error::Budget(format!("more than {} partial polymorphisms", budget.results)));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Determined {
    /// The induced map from the projection onto S to the value at i.
    Yes(BTreeMap<Tuple, u8>),
    /// Two tuples agreeing on S and differing at i.
    No(Tuple, Tuple),
}

impl Determined {
    pub fn is_yes(&self) -> bool {
        matches!(self, Determined::Yes(_))
    }
}

/// Is coordinate `i` of `r` a function of the coordinates in `s`? (0-based)
pub fn determined(r: &Relation, i: usize, s: &[usize]) -> Result<Determined> {
    if i >= r.arity() || s.iter().any(|&c| c >= r.arity()) {
        return Err(Error::Arity(format!("coordinate out of range for arity {}", r.arity())));
    }
    let mut map: BTreeMap<Tuple, (u8, usize)> = BTreeMap::new();
    for (ti, t) in r.tuples().iter().enumerate() {
        let key: Tuple = s.iter().map(|&c| t[c]).collect();
        match map.get(&key) {
            Some(&(v, first)) if v != t[i] => {
                return Ok(Determined::No(r.tuples()[first].clone(), t.clone()));
            }
            Some(_) => {}
            None => {
                map.insert(key, (t[i], ti));
            }
        }
    }
    Ok(Determined::Yes(map.into_iter().map(|(k, (v, _))| (k, v)).collect()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArgKind {
    /// Always equal to argument j.
    Redundant(usize),
    Fictitious,
    Constant(u8),
    None,
}

/// First applicable classification of argument `i` (0-based).
pub fn arg_kind(r: &Relation, i: usize) -> Result<ArgKind> {
    if i >= r.arity() {
        return Err(Error::Arity(format!("argument {i} out of range for arity {}", r.arity())));
    }
    let ts = r.tuples();
    if let Some(j) = (0..r.arity()).find(|&j| j != i && ts.iter().all(|t| t[i] == t[j])) {
        return Ok(ArgKind::Redundant(j));
    }
    let fictitious = ts.iter().all(|t| {
        let mut u = t.clone();
        (0..r.domain() as u8).all(|d| {
            u[i] = d;
            r.contains(&u)
        })
    });
    if fictitious {
        return Ok(ArgKind::Fictitious);
    }
    if let Some(first) = ts.first() {
        let d = first[i];
        if ts.iter().all(|t| t[i] == d) {
            return Ok(ArgKind::Constant(d));
        }
    }
    Ok(ArgKind::None)
}

fn require_boolean(domain: usize) -> Result<()> {
    if domain != 2 {
        return Err(Error::Domain(format!("duality needs a Boolean domain, got {domain}")));
    }
    Ok(())
}

pub fn dual_rel(r: &Relation) -> Result<Relation> {
    require_boolean(r.domain())?;
    let tuples = r.tuples().iter().map(|t| t.iter().map(|&v| 1 - v).collect()).collect();
    let mut out = Relation::new(r.arity(), 2, tuples)?;
    out.name = r.name.clone();
    Ok(out)
}

pub fn dual_op(f: &Operation) -> Result<Operation> {
    require_boolean(f.domain)?;
    Ok(Operation::from_fn(f.arity, 2, |p| {
        let neg: Vec<u8> = p.iter().map(|&v| 1 - v).collect();
        1 - f.eval(&neg)
    }))
}

pub fn dual_partial(f: &PartialOperation) -> Result<PartialOperation> {
    require_boolean(f.domain)?;
    let table = Points::new(f.arity, 2)
        .map(|p| {
            let neg: Vec<u8> = p.iter().map(|&v| 1 - v).collect();
            f.get(&neg).map(|v| 1 - v)
        })
        .collect();
    Ok(PartialOperation { arity: f.arity, domain: 2, table })
}

pub fn dual_language(lang: &Language) -> Result<Language> {
    require_boolean(lang.domain())?;
    let mut out = Language::new(2);
    for r in lang.relations() {
        out.add(dual_rel(r)?)?;
    }
    Ok(out)
}

/// {(x, f(x))}: the (k+1)-ary graph of `f`.
pub fn graph_of(f: &Operation) -> Relation {
    let tuples = Points::new(f.arity, f.domain)
        .zip(&f.table)
        .map(|(mut p, &v)| {
            p.push(v);
            p
        })
        .collect();
    Relation::from_sorted(f.arity + 1, f.domain, tuples)
}

/// A constraint language: uniquely named relations over one domain.
/// `Eq` is always resolvable by name without being listed.
#[derive(Clone, Debug)]
pub struct Language {
    domain: usize,
    relations: Vec<Relation>,
    eq: Relation,
}

impl PartialEq for Language {
    fn eq(&self, other: &Self) -> bool {
        self.domain == other.domain
            && self.relations.len() == other.relations.len()
            && self
                .relations
                .iter()
                .zip(&other.relations)
                .all(|(a, b)| a.name == b.name && a == b)
    }
}

impl Language {
    pub fn new(domain: usize) -> Language {
        Language { domain, relations: Vec::new(), eq: Relation::eq(domain) }
    }

    pub fn from_relations(domain: usize, rels: impl IntoIterator<Item = Relation>) -> Result<Language> {
        let mut lang = Language::new(domain);
        for r in rels {
            lang.add(r)?;
        }
        Ok(lang)
    }

    /// Adds a relation. Unnamed relations get `R<index>`; adding the
    /// equality relation itself is a no-op.
    pub fn add(&mut self, r: Relation) -> Result<()> {
        if r.domain() != self.domain {
            return Err(Error::Domain(format!(
                "relation over {} added to a language over {}",
                r.domain(),
                self.domain
            )));
        }
        let r = match r.name {
            Some(_) => r,
            None => {
                let n = format!("R{}", self.relations.len());
                r.named(n)
            }
        };
        let name = r.name().unwrap();
        if name == "Eq" && r == self.eq {
            // Equality is always available.
            return Ok(());
        }
        if name == "Eq" || self.relations.iter().any(|x| x.name() == Some(name)) {
            return Err(Error::Precondition(format!("duplicate relation name {name}")));
        }
        self.relations.push(r);
        Ok(())
    }

    pub fn domain(&self) -> usize {
        self.domain
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn is_empty(&self) -> bool {
        self.relations.is_empty()
    }

    pub fn get(&self, name: &str) -> Option<&Relation> {
        self.relations
            .iter()
            .find(|r| r.name() == Some(name))
            .or_else(|| (name == "Eq").then_some(&self.eq))
    }

    pub fn max_arity(&self) -> usize {
        self.relations.iter().map(Relation::arity).max().unwrap_or(0)
    }
}
