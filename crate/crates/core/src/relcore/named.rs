//! Named Boolean relations used throughout the catalog and tests.

use super::{Points, Relation};

fn boolean(name: &str, arity: usize, pred: impl Fn(&[u8]) -> bool) -> Relation {
    Relation::from_fn(arity, 2, pred).named(name)
}

fn ones(t: &[u8]) -> usize {
    t.iter().filter(|&&v| v == 1).count()
}

pub fn ne() -> Relation {
    boolean("Ne", 2, |t| t[0] != t[1])
}

/// Constant-1 unary relation.
pub fn t() -> Relation {
    boolean("T", 1, |t| t[0] == 1)
}

/// Constant-0 unary relation.
pub fn f() -> Relation {
    boolean("F", 1, |t| t[0] == 0)
}

/// x → y
pub fn imp() -> Relation {
    boolean("Imp", 2, |t| t[0] <= t[1])
}

pub fn or(n: usize) -> Relation {
    boolean(&format!("OR{n}"), n, |t| ones(t) > 0)
}

pub fn nand(n: usize) -> Relation {
    boolean(&format!("NAND{n}"), n, |t| ones(t) < n)
}

pub fn even(n: usize) -> Relation {
    boolean(&format!("Even{n}"), n, |t| ones(t).is_multiple_of(2))
}

pub fn odd(n: usize) -> Relation {
    boolean(&format!("Odd{n}"), n, |t| ones(t) % 2 == 1)
}

pub fn one_in_three() -> Relation {
    boolean("OneInThree", 3, |t| ones(t) == 1)
}

/// Not-all-equal, ternary.
pub fn nae3() -> Relation {
    boolean("Nae3", 3, |t| !(t[0] == t[1] && t[1] == t[2]))
}

/// {0,1}^3 minus {(0,1,0),(1,0,1)}.
pub fn dup3() -> Relation {
    boolean("Dup3", 3, |t| t != [0, 1, 0] && t != [1, 0, 1])
}

/// (w ↔ x ∨ y), listed as (w, x, y).
pub fn iff_or() -> Relation {
    boolean("IFFOR", 3, |t| t[0] == (t[1] | t[2]))
}

/// (x1 ↔ x2 ∧ x3)
pub fn iff_and() -> Relation {
    boolean("IFFAND", 3, |t| t[0] == (t[1] & t[2]))
}

/// Five-ary relation whose co-clone is the top of the lattice: one-in-three
/// on the first three coordinates, constant 0 and 1 on the last two.
pub fn r5() -> Relation {
    boolean("R5", 5, |t| ones(&t[..3]) == 1 && t[3] == 0 && t[4] == 1)
}

/// R5 ∪ {0^5}.
pub fn r5_zero() -> Relation {
    boolean("R5z", 5, |t| (ones(&t[..3]) == 1 && t[3] == 0 && t[4] == 1) || ones(t) == 0)
}

pub fn rdddp() -> Relation {
    let tuples = vec![
        vec![0, 0, 1, 1, 1, 0, 0, 1],
        vec![0, 1, 0, 1, 0, 1, 0, 1],
        vec![1, 0, 0, 0, 1, 1, 0, 1],
    ];
    Relation::new(8, 2, tuples).unwrap().named("Rdddp")
}

/// Three-literal clause with sign pattern `signs` (true = positive),
/// named `c3_` followed by `p`/`n` per literal.
pub fn clause3(signs: [bool; 3]) -> Relation {
    let name: String = std::iter::once("c3_".to_string())
        .chain(signs.iter().map(|&s| if s { "p" } else { "n" }.to_string()))
        .collect();
    boolean(&name, 3, |t| (0..3).any(|i| (t[i] == 1) == signs[i]))
}

/// k-literal clause with the given signs, named `c<k>_<pattern>`.
pub fn clause(signs: &[bool]) -> Relation {
    let pattern: String = signs.iter().map(|&s| if s { 'p' } else { 'n' }).collect();
    boolean(&format!("c{}_{pattern}", signs.len()), signs.len(), |t| {
        t.iter().zip(signs).any(|(&v, &s)| (v == 1) == s)
    })
}

/// All eight 3-clause relations, in sign order ppp, ppn, ..., nnn.
pub fn three_clauses() -> Vec<Relation> {
    (0..8u8)
        .map(|m| clause3([m & 4 == 0, m & 2 == 0, m & 1 == 0]))
        .collect()
}

/// Sign pattern of a clause relation name such as `c3_pnp`.
pub fn clause_signs(name: &str) -> Option<Vec<bool>> {
    let (head, pat) = name.split_once('_')?;
    let k: usize = head.strip_prefix('c')?.parse().ok()?;
    if pat.len() != k || k == 0 {
        return None;
    }
    pat.chars()
        .map(|c| match c {
            'p' => Some(true),
            'n' => Some(false),
            _ => None,
        })
        .collect()
}

/// The full relation D^n.
pub fn full_rel(arity: usize, domain: usize) -> Relation {
    let tuples: Vec<_> = Points::new(arity, domain).collect();
    Relation::new(arity, domain, tuples).unwrap().named(format!("Full{arity}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sizes() {
        assert_eq!(ne().len(), 2);
        assert_eq!(or(3).len(), 7);
        assert_eq!(nand(2).tuples(), &[vec![0, 0], vec![0, 1], vec![1, 0]]);
        assert_eq!(even(3).len(), 4);
        assert_eq!(one_in_three().len(), 3);
        assert_eq!(
            r5().tuples(),
            &[vec![0, 0, 1, 0, 1], vec![0, 1, 0, 0, 1], vec![1, 0, 0, 0, 1]]
        );
        assert_eq!(r5_zero().len(), 4);
        assert_eq!(dup3().len(), 6);
        assert_eq!(three_clauses().len(), 8);
        assert!(three_clauses().iter().all(|r| r.len() == 7));
    }

    #[test]
    fn clause_names_round_trip() {
        for r in three_clauses() {
            let signs = clause_signs(r.name().unwrap()).unwrap();
            assert_eq!(clause(&signs), r);
        }
        assert_eq!(three_clauses()[0].name(), Some("c3_ppp"));
        assert_eq!(clause_signs("c3_pq"), None);
    }
}
