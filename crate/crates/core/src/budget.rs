/// Explicit resource limits. Every exhaustive search in the crate checks
/// one of these and fails with [`crate::Error::Budget`] instead of
/// truncating.
#[derive(Clone, Debug)]
pub struct Budget {
    /// Largest arity of total operations enumerated over D=2.
    pub op_arity_d2: usize,
    /// Largest arity of total operations enumerated over D=3.
    pub op_arity_d3: usize,
    /// Largest arity of partial operations enumerated over D=2.
    pub partial_arity_d2: usize,
    /// Upper bound on log2 of the assignment space of a formula (24 means
    /// 24 Boolean variables).
    pub formula_bits: u32,
    /// Largest arity for quantifier-free closures over D=2.
    pub qfpp_arity: usize,
    /// Largest |R| for which pp-membership is decided exactly.
    pub pp_exact: usize,
    /// Largest number of variables of a CSP instance.
    pub csp_vars: usize,
    /// Search-node limit for a single backtracking run.
    pub nodes: u64,
    /// Largest relation materialised by a closure fixpoint.
    pub tuples: usize,
    /// Largest number of operations returned by an enumeration.
    pub results: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            op_arity_d2: 4,
            op_arity_d3: 3,
            partial_arity_d2: 3,
            formula_bits: 24,
            qfpp_arity: 5,
            pp_exact: 4,
            csp_vars: 30,
            nodes: 200_000_000,
            tuples: 1 << 20,
            results: 1 << 20,
        }
    }
}

impl Budget {
    pub fn op_arity(&self, domain: usize) -> usize {
        match domain {
            0..=2 => self.op_arity_d2,
            3 => self.op_arity_d3,
            4 | 5 => self.op_arity_d3.saturating_sub(1).max(1),
            _ => 1,
        }
    }

    pub fn partial_arity(&self, domain: usize) -> usize {
        match domain {
            0..=2 => self.partial_arity_d2,
            3 => self.partial_arity_d2.saturating_sub(1).max(1),
            _ => 1,
        }
    }

    /// Largest qfpp arity for the given domain, keeping |D|^n within the
    /// same point count as 2^qfpp_arity allows (and at most 128 points).
    pub fn qfpp_points(&self) -> usize {
        (1usize << self.qfpp_arity).min(128)
    }

    pub(crate) fn space_bits(domain: usize, vars: usize) -> f64 {
        vars as f64 * (domain.max(1) as f64).log2()
    }
}
