//! Brute-force oracles shared by the integration tests. They only use the
//! plain data accessors of the library, never its search code.
#![allow(dead_code)]

use std::collections::BTreeSet;

use uqclone::csp::Instance;
use uqclone::relcore::{Language, Op, Relation};

/// Boolean relation whose tuples are the set bits of `mask`, tuple t at bit
/// Σ t[j]·2^(n-1-j).
pub fn rel_from_mask(arity: usize, mask: u64, name: &str) -> Relation {
    let tuples: Vec<Vec<u8>> = (0..1usize << arity)
        .filter(|&p| mask >> p & 1 == 1)
        .map(|p| (0..arity).map(|j| (p >> (arity - 1 - j) & 1) as u8).collect())
        .collect();
    Relation::new(arity, 2, tuples).unwrap().named(name)
}

/// Every sequence of `f.arity()` rows of R mapped componentwise stays in R
/// whenever the image is defined.
pub fn brute_preserves(f: &dyn Op, r: &Relation) -> bool {
    let rows = r.tuples();
    let k = f.arity();
    if rows.is_empty() {
        return true;
    }
    let total = rows.len().pow(k as u32);
    'seq: for code in 0..total {
        let mut c = code;
        let pick: Vec<&Vec<u8>> = (0..k)
            .map(|_| {
                let t = &rows[c % rows.len()];
                c /= rows.len();
                t
            })
            .collect();
        let mut image = Vec::with_capacity(r.arity());
        for j in 0..r.arity() {
            let col: Vec<u8> = pick.iter().map(|t| t[j]).collect();
            match f.value(&col) {
                Some(v) => image.push(v),
                None => continue 'seq,
            }
        }
        if !r.contains(&image) {
            return false;
        }
    }
    true
}

fn satisfies(inst: &Instance, rels: &[&Relation], a: &[u8]) -> bool {
    inst.constraints.iter().zip(rels).all(|(c, r)| {
        let t: Vec<u8> = c.args.iter().map(|&v| a[v]).collect();
        r.contains(&t)
    })
}

/// Models of `inst` by enumerating every assignment, stopping after `cap`.
pub fn brute_models(inst: &Instance, cap: usize) -> Vec<Vec<u8>> {
    let d = inst.domain();
    let n = inst.vars.len();
    let rels: Vec<&Relation> = inst.constraints.iter().map(|c| inst.relation(&c.rel).unwrap()).collect();
    let mut out = Vec::new();
    let mut a = vec![0u8; n];
    loop {
        if satisfies(inst, &rels, &a) {
            out.push(a.clone());
            if out.len() >= cap {
                return out;
            }
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            a[i] += 1;
            if (a[i] as usize) < d {
                break;
            }
            a[i] = 0;
        }
    }
}

pub fn brute_count(inst: &Instance) -> usize {
    brute_models(inst, usize::MAX).len()
}

/// Bitmask (over the 2^n Boolean points, point p at bit p) of the
/// relation {x | (x[c1],…,x[ck]) ∈ R}.
fn atom_mask(r: &Relation, coords: &[usize], n: usize) -> u128 {
    let mut m = 0u128;
    for p in 0..1usize << n {
        let t: Vec<u8> = coords.iter().map(|&c| (p >> (n - 1 - c) & 1) as u8).collect();
        if r.contains(&t) {
            m |= 1 << p;
        }
    }
    m
}

/// All n-ary Boolean relations that are conjunctions of atoms over
/// `lang ∪ {Eq}`, as bitmasks. n ≤ 7.
pub fn brute_qfpp(lang: &Language, n: usize) -> BTreeSet<u128> {
    assert!(n <= 7);
    let full = if n == 7 { u128::MAX } else { (1u128 << (1 << n)) - 1 };
    let mut atoms = BTreeSet::new();
    let eq = Relation::eq(2);
    for r in lang.relations().iter().chain(std::iter::once(&eq)) {
        let k = r.arity();
        for code in 0..n.pow(k as u32) {
            let mut c = code;
            let coords: Vec<usize> = (0..k)
                .map(|_| {
                    let v = c % n;
                    c /= n;
                    v
                })
                .collect();
            atoms.insert(atom_mask(r, &coords, n));
        }
    }
    let mut closed: BTreeSet<u128> = BTreeSet::from([full]);
    for a in atoms {
        let add: Vec<u128> = closed.iter().map(|s| s & a).collect();
        closed.extend(add);
    }
    closed
}

/// Projection of a bitmask relation of arity n onto its first k
/// coordinates, as a bitmask over 2^k points.
pub fn project_prefix(mask: u128, n: usize, k: usize) -> u128 {
    let mut out = 0u128;
    for p in 0..1usize << n {
        if mask >> p & 1 == 1 {
            out |= 1 << (p >> (n - k));
        }
    }
    out
}

pub fn mask_of(r: &Relation) -> u128 {
    r.tuples().iter().fold(0u128, |m, t| m | 1 << t.iter().fold(0usize, |p, &v| p << 1 | v as usize))
}

/// R is the projection onto the first ar(R) coordinates of a conjunction
/// of atoms over at most `max_arity` variables.
pub fn brute_pp(lang: &Language, r: &Relation, max_arity: usize) -> bool {
    let k = r.arity();
    let target = mask_of(r);
    (k.max(1)..=max_arity).any(|n| brute_qfpp(lang, n).iter().any(|&m| project_prefix(m, n, k) == target))
}
