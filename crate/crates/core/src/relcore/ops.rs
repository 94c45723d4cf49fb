//! Frequently used Boolean and modular operations.

use super::Operation;

pub fn not() -> Operation {
    Operation::from_fn(1, 2, |p| 1 - p[0])
}

pub fn and() -> Operation {
    Operation::from_fn(2, 2, |p| p[0] & p[1])
}

pub fn or() -> Operation {
    Operation::from_fn(2, 2, |p| p[0] | p[1])
}

pub fn xor() -> Operation {
    Operation::from_fn(2, 2, |p| p[0] ^ p[1])
}

pub fn iff() -> Operation {
    Operation::from_fn(2, 2, |p| 1 - (p[0] ^ p[1]))
}

/// x → y
pub fn implies() -> Operation {
    Operation::from_fn(2, 2, |p| (1 - p[0]) | p[1])
}

/// x ∧ ¬y
pub fn and_not() -> Operation {
    Operation::from_fn(2, 2, |p| p[0] & (1 - p[1]))
}

pub fn maj() -> Operation {
    Operation::from_fn(3, 2, |p| (p[0] + p[1] + p[2] >= 2) as u8)
}

/// x ⊕ y ⊕ z
pub fn xor3() -> Operation {
    Operation::from_fn(3, 2, |p| p[0] ^ p[1] ^ p[2])
}

/// x − y + z mod |D|
pub fn affine(domain: usize) -> Operation {
    let d = domain as i32;
    Operation::from_fn(3, domain, |p| ((p[0] as i32 - p[1] as i32 + p[2] as i32).rem_euclid(d)) as u8)
}

pub fn zero() -> Operation {
    Operation::constant(1, 2, 0)
}

pub fn one() -> Operation {
    Operation::constant(1, 2, 1)
}

pub fn identity(domain: usize) -> Operation {
    Operation::projection(1, domain, 0)
}

/// Threshold function "at least `t` of `k` arguments are 1".
pub fn threshold(k: usize, t: usize) -> Operation {
    Operation::from_fn(k, 2, |p| (p.iter().filter(|&&v| v == 1).count() >= t) as u8)
}
