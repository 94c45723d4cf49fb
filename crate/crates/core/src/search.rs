//! Backtracking search with generalized arc consistency over explicit
//! relations. Shared by polymorphism enumeration, pp-membership and model
//! counting.

use std::collections::VecDeque;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;

use crate::relcore::Relation;
use crate::{Error, Result};

struct Con {
    rel: usize,
    scope: Vec<usize>,
    // Pairs of scope positions holding the same variable.
    same: Vec<(usize, usize)>,
}

pub(crate) struct Problem {
    #[cfg_attr(not(test), allow(dead_code))]
    domain: usize,
    nvars: usize,
    rels: Vec<Relation>,
    cons: Vec<Con>,
    init: Vec<u64>,
    order: Option<Vec<usize>>,
}

struct Ctx<'a> {
    watch: Vec<Vec<usize>>,
    nodes: &'a AtomicU64,
    limit: u64,
}

const FLUSH: u64 = 4096;

impl<'a> Ctx<'a> {
    fn charge(&self, local: &mut u64) -> Result<()> {
        *local += 1;
        if *local >= FLUSH {
            self.flush(local)?;
        }
        Ok(())
    }

    fn flush(&self, local: &mut u64) -> Result<()> {
        let total = self.nodes.fetch_add(*local, Ordering::Relaxed) + *local;
        *local = 0;
        if total > self.limit {
            return Err(Error::Budget(format!("search exceeded {} nodes", self.limit)));
        }
        Ok(())
    }
}

impl Problem {
    pub fn new(domain: usize, nvars: usize) -> Problem {
        assert!((1..=64).contains(&domain), "domain size {domain}");
        let full = if domain == 64 { u64::MAX } else { (1u64 << domain) - 1 };
        Problem {
            domain,
            nvars,
            rels: Vec::new(),
            cons: Vec::new(),
            init: vec![full; nvars],
            order: None,
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_relation(&mut self, r: Relation) -> usize {
        self.rels.push(r);
        self.rels.len() - 1
    }

    pub fn add_constraint(&mut self, rel: usize, scope: Vec<usize>) -> Result<()> {
        let r = &self.rels[rel];
        if r.arity() != scope.len() {
            return Err(Error::Arity(format!(
                "scope of length {} for a {}-ary relation",
                scope.len(),
                r.arity()
            )));
        }
        if let Some(&v) = scope.iter().find(|&&v| v >= self.nvars) {
            return Err(Error::Arity(format!("variable {v} out of range")));
        }
        let mut same = Vec::new();
        for i in 0..scope.len() {
            if let Some(j) = (0..i).find(|&j| scope[j] == scope[i]) {
                same.push((j, i));
            }
        }
        self.cons.push(Con { rel, scope, same });
        Ok(())
    }

    pub fn set_order(&mut self, order: Vec<usize>) {
        debug_assert_eq!(order.len(), self.nvars);
        self.order = Some(order);
    }

    fn watch(&self) -> Vec<Vec<usize>> {
        let mut w = vec![Vec::new(); self.nvars];
        for (ci, c) in self.cons.iter().enumerate() {
            for &v in &c.scope {
                if w[v].last() != Some(&ci) {
                    w[v].push(ci);
                }
            }
        }
        w
    }

    /// Prunes unsupported values. Returns false on a wipe-out.
    fn propagate(&self, doms: &mut [u64], start: &[usize], watch: &[Vec<usize>]) -> bool {
        let mut queued = vec![false; self.cons.len()];
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &c in start {
            if !queued[c] {
                queued[c] = true;
                queue.push_back(c);
            }
        }
        let mut support = Vec::new();
        while let Some(ci) = queue.pop_front() {
            queued[ci] = false;
            let con = &self.cons[ci];
            let rel = &self.rels[con.rel];
            support.clear();
            support.resize(con.scope.len(), 0u64);
            for t in rel.tuples() {
                let ok = con.scope.iter().zip(t).all(|(&v, &x)| doms[v] >> x & 1 == 1)
                    && con.same.iter().all(|&(a, b)| t[a] == t[b]);
                if ok {
                    for (s, &x) in support.iter_mut().zip(t) {
                        *s |= 1u64 << x;
                    }
                }
            }
            for (j, &v) in con.scope.iter().enumerate() {
                let nd = doms[v] & support[j];
                if nd != doms[v] {
                    if nd == 0 {
                        return false;
                    }
                    doms[v] = nd;
                    for &other in &watch[v] {
                        if other != ci && !queued[other] {
                            queued[other] = true;
                            queue.push_back(other);
                        }
                    }
                }
            }
        }
        true
    }

    fn all_cons(&self) -> Vec<usize> {
        (0..self.cons.len()).collect()
    }

    /// Visits every solution in lexicographic order of the variable order
    /// (natural order unless set otherwise). Solutions are indexed by
    /// variable.
    pub fn solve(&self, limit: u64, mut visit: impl FnMut(&[u8]) -> ControlFlow<()>) -> Result<()> {
        let nodes = AtomicU64::new(0);
        let ctx = Ctx { watch: self.watch(), nodes: &nodes, limit };
        let mut doms = self.init.clone();
        if doms.contains(&0) || !self.propagate(&mut doms, &self.all_cons(), &ctx.watch) {
            return Ok(());
        }
        let order: Vec<usize> = self.order.clone().unwrap_or_else(|| (0..self.nvars).collect());
        let mut local = 0;
        let mut sol = vec![0u8; self.nvars];
        let _ = self.rec(&ctx, &mut local, &doms, &order, 0, &mut sol, &mut visit)?;
        ctx.flush(&mut local)?;
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        &self,
        ctx: &Ctx,
        local: &mut u64,
        doms: &[u64],
        order: &[usize],
        mut pos: usize,
        sol: &mut [u8],
        visit: &mut impl FnMut(&[u8]) -> ControlFlow<()>,
    ) -> Result<ControlFlow<()>> {
        while pos < order.len() && doms[order[pos]].count_ones() == 1 {
            pos += 1;
        }
        if pos == order.len() {
            for (s, d) in sol.iter_mut().zip(doms) {
                *s = d.trailing_zeros() as u8;
            }
            return Ok(visit(sol));
        }
        let v = order[pos];
        let mut rest = doms[v];
        while rest != 0 {
            let val = rest.trailing_zeros();
            rest &= rest - 1;
            ctx.charge(local)?;
            let mut nd = doms.to_vec();
            nd[v] = 1u64 << val;
            if self.propagate(&mut nd, &ctx.watch[v], &ctx.watch) {
                if let ControlFlow::Break(()) = self.rec(ctx, local, &nd, order, pos + 1, sol, visit)? {
                    return Ok(ControlFlow::Break(()));
                }
            }
        }
        Ok(ControlFlow::Continue(()))
    }

    pub fn first(&self, limit: u64) -> Result<Option<Vec<u8>>> {
        let mut found = None;
        self.solve(limit, |s| {
            found = Some(s.to_vec());
            ControlFlow::Break(())
        })?;
        Ok(found)
    }

    /// Number of solutions. Variables outside every constraint are
    /// factored out; the remaining tree is split into subtrees that are
    /// counted on the current rayon pool.
    pub fn count(&self, limit: u64) -> Result<u128> {
        let watch = self.watch();
        let mut factor: u128 = 1;
        for (w, d) in watch.iter().zip(&self.init) {
            if w.is_empty() {
                factor *= d.count_ones() as u128;
            }
        }
        if factor == 0 {
            return Ok(0);
        }
        let nodes = AtomicU64::new(0);
        let ctx = Ctx { watch, nodes: &nodes, limit };
        let mut doms = self.init.clone();
        if !self.propagate(&mut doms, &self.all_cons(), &ctx.watch) {
            return Ok(0);
        }
        // Split the top of the tree into independent subproblems.
        let mut frontier = vec![doms];
        let mut leaves: u128 = 0;
        let mut local = 0;
        for _ in 0..8 {
            if frontier.len() >= 64 {
                break;
            }
            let mut next = Vec::new();
            let mut expanded = false;
            for d in frontier {
                match self.pick(&d, &ctx.watch) {
                    None => leaves += 1,
                    Some(v) => {
                        expanded = true;
                        let mut rest = d[v];
                        while rest != 0 {
                            let val = rest.trailing_zeros();
                            rest &= rest - 1;
                            ctx.charge(&mut local)?;
                            let mut nd = d.clone();
                            nd[v] = 1u64 << val;
                            if self.propagate(&mut nd, &ctx.watch[v], &ctx.watch) {
                                next.push(nd);
                            }
                        }
                    }
                }
            }
            frontier = next;
            if !expanded {
                break;
            }
        }
        ctx.flush(&mut local)?;
        let parts: Vec<Result<u128>> = frontier
            .par_iter()
            .map(|d| {
                let mut local = 0;
                let c = self.count_rec(&ctx, &mut local, d)?;
                ctx.flush(&mut local)?;
                Ok(c)
            })
            .collect();
        let mut total = leaves;
        for p in parts {
            total += p?;
        }
        Ok(total * factor)
    }

    // Smallest domain first among constrained, unassigned variables.
    fn pick(&self, doms: &[u64], watch: &[Vec<usize>]) -> Option<usize> {
        let mut best: Option<(u32, usize)> = None;
        for (v, d) in doms.iter().enumerate() {
            let c = d.count_ones();
            if c > 1 && !watch[v].is_empty() && best.is_none_or(|(bc, _)| c < bc) {
                best = Some((c, v));
            }
        }
        best.map(|(_, v)| v)
    }

    fn count_rec(&self, ctx: &Ctx, local: &mut u64, doms: &[u64]) -> Result<u128> {
        let Some(v) = self.pick(doms, &ctx.watch) else {
            return Ok(1);
        };
        let mut total = 0;
        let mut rest = doms[v];
        while rest != 0 {
            let val = rest.trailing_zeros();
            rest &= rest - 1;
            ctx.charge(local)?;
            let mut nd = doms.to_vec();
            nd[v] = 1u64 << val;
            if self.propagate(&mut nd, &ctx.watch[v], &ctx.watch) {
                total += self.count_rec(ctx, local, &nd)?;
            }
        }
        Ok(total)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relcore::{named, Points};

    fn brute(p: &Problem) -> Vec<Vec<u8>> {
        Points::new(p.nvars, p.domain)
            .filter(|a| {
                a.iter().zip(&p.init).all(|(&x, &m)| m >> x & 1 == 1)
                    && p.cons.iter().all(|c| {
                        let t: Vec<u8> = c.scope.iter().map(|&v| a[v]).collect();
                        p.rels[c.rel].contains(&t)
                    })
            })
            .collect()
    }

    #[test]
    fn matches_brute_force() {
        let mut p = Problem::new(2, 5);
        let or3 = p.add_relation(named::or(3));
        let ne = p.add_relation(named::ne());
        p.add_constraint(or3, vec![0, 1, 1]).unwrap();
        p.add_constraint(ne, vec![1, 2]).unwrap();
        p.add_constraint(or3, vec![2, 3, 0]).unwrap();
        let mut sols = Vec::new();
        p.solve(1 << 20, |s| {
            sols.push(s.to_vec());
            ControlFlow::Continue(())
        })
        .unwrap();
        let expect = brute(&p);
        assert_eq!(sols, expect);
        assert_eq!(p.count(1 << 20).unwrap(), expect.len() as u128);
    }

    #[test]
    fn unsatisfiable_and_budget() {
        let mut p = Problem::new(2, 3);
        let ne = p.add_relation(named::ne());
        p.add_constraint(ne, vec![0, 1]).unwrap();
        p.add_constraint(ne, vec![1, 2]).unwrap();
        p.add_constraint(ne, vec![0, 2]).unwrap();
        assert_eq!(p.count(1000).unwrap(), 0);
        assert_eq!(p.first(1000).unwrap(), None);

        let mut q = Problem::new(2, 40);
        let ne = q.add_relation(named::nand(2));
        for v in 0..39 {
            q.add_constraint(ne, vec![v, v + 1]).unwrap();
        }
        assert!(q.count(100).unwrap_err().is_budget());
    }
}
