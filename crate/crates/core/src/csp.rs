//! Small finite-domain solver for ternary table constraints.
//!
//! Domains are bitmasks over values `0..64`. Propagation enforces
//! generalized arc consistency on each table constraint.

use std::sync::Arc;

use crate::search::Meter;

pub type Domain = u64;
pub type Table = Arc<Vec<[u32; 3]>>;

pub const MAX_VALUES: usize = 64;

pub fn full_domain(values: usize) -> Domain {
    if values >= 64 {
        u64::MAX
    } else {
        (1u64 << values) - 1
    }
}

#[derive(Debug, Clone)]
struct Constraint {
    vars: [usize; 3],
    table: Table,
}

/// Variables with bitmask domains and ternary table constraints.
#[derive(Debug, Clone)]
pub struct Csp {
    domains: Vec<Domain>,
    constraints: Vec<Constraint>,
    watch: Vec<Vec<usize>>,
    distinct: bool,
}

/// Control flow for solution enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

impl Csp {
    pub fn new(domains: Vec<Domain>) -> Self {
        let n = domains.len();
        Csp {
            domains,
            constraints: Vec::new(),
            watch: vec![Vec::new(); n],
            distinct: false,
        }
    }

    /// Requires all variables to take pairwise distinct values.
    pub fn all_different(mut self) -> Self {
        self.distinct = true;
        self
    }

    pub fn var_count(&self) -> usize {
        self.domains.len()
    }

    pub fn domains(&self) -> &[Domain] {
        &self.domains
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// Adds a constraint and propagates. Returns `false` on a wipe-out.
    pub fn add(&mut self, vars: [usize; 3], table: Table) -> bool {
        let idx = self.constraints.len();
        for &v in &vars {
            if self.watch[v].last() != Some(&idx) {
                self.watch[v].push(idx);
            }
        }
        self.constraints.push(Constraint { vars, table });
        self.propagate(vec![idx])
    }

    /// Removes constraints added after the first `len`.
    pub fn truncate(&mut self, len: usize) {
        while self.constraints.len() > len {
            let idx = self.constraints.len() - 1;
            let c = self.constraints.pop().expect("nonempty");
            for &v in &c.vars {
                if self.watch[v].last() == Some(&idx) {
                    self.watch[v].pop();
                }
            }
        }
    }

    pub fn set_domains(&mut self, domains: Vec<Domain>) {
        self.domains = domains;
    }

    fn revise(&mut self, ci: usize) -> Option<Vec<usize>> {
        let c = &self.constraints[ci];
        let [a, b, d] = c.vars;
        let doms = [self.domains[a], self.domains[b], self.domains[d]];
        let mut supp = [0u64; 3];
        for t in c.table.iter() {
            let bits = [1u64 << t[0], 1u64 << t[1], 1u64 << t[2]];
            if a == b && t[0] != t[1] || a == d && t[0] != t[2] || b == d && t[1] != t[2] {
                continue;
            }
            if doms[0] & bits[0] != 0 && doms[1] & bits[1] != 0 && doms[2] & bits[2] != 0 {
                supp[0] |= bits[0];
                supp[1] |= bits[1];
                supp[2] |= bits[2];
            }
        }
        let mut changed = Vec::new();
        for (i, &v) in c.vars.iter().enumerate() {
            let new = self.domains[v] & supp[i];
            if new == 0 {
                self.domains[v] = 0;
                return None;
            }
            if new != self.domains[v] {
                self.domains[v] = new;
                changed.push(v);
            }
        }
        Some(changed)
    }

    fn propagate(&mut self, mut queue: Vec<usize>) -> bool {
        let mut queued = vec![false; self.constraints.len()];
        for &q in &queue {
            queued[q] = true;
        }
        while let Some(ci) = queue.pop() {
            queued[ci] = false;
            match self.revise(ci) {
                None => return false,
                Some(changed) => {
                    for v in changed {
                        for &cj in &self.watch[v] {
                            if cj != ci && !queued[cj] {
                                queued[cj] = true;
                                queue.push(cj);
                            }
                        }
                    }
                }
            }
        }
        true
    }

    /// Propagates every constraint from scratch.
    pub fn propagate_all(&mut self) -> bool {
        if self.domains.contains(&0) {
            return false;
        }
        self.propagate((0..self.constraints.len()).collect())
    }

    fn assign(&mut self, v: usize, value: u32) -> bool {
        let bit = 1u64 << value;
        self.domains[v] = bit;
        let mut queue = self.watch[v].clone();
        if self.distinct {
            let mut singles = Vec::new();
            for u in 0..self.domains.len() {
                if u != v && self.domains[u] & bit != 0 {
                    self.domains[u] &= !bit;
                    match self.domains[u].count_ones() {
                        0 => return false,
                        1 => singles.push(u),
                        _ => {}
                    }
                    queue.extend_from_slice(&self.watch[u]);
                }
            }
            for u in singles {
                if self.domains[u].count_ones() == 1 && !self.assign(u, self.domains[u].trailing_zeros()) {
                    return false;
                }
            }
        }
        queue.sort_unstable();
        queue.dedup();
        self.propagate(queue)
    }

    /// Depth-first labeling, smallest domain first, values in increasing
    /// order. Calls `on_solution` for each full assignment. Returns `false`
    /// if the meter ran out.
    pub fn solve(&mut self, meter: &mut Meter, on_solution: &mut dyn FnMut(&[u32]) -> Flow) -> bool {
        self.search(meter, on_solution).is_some()
    }

    fn search(&mut self, meter: &mut Meter, on_solution: &mut dyn FnMut(&[u32]) -> Flow) -> Option<Flow> {
        if !meter.tick() {
            return None;
        }
        if self.domains.contains(&0) {
            return Some(Flow::Continue);
        }
        let pick = self
            .domains
            .iter()
            .enumerate()
            .filter(|(_, d)| d.count_ones() > 1)
            .min_by_key(|(_, d)| d.count_ones())
            .map(|(i, _)| i);
        let Some(v) = pick else {
            let values: Vec<u32> = self.domains.iter().map(|d| d.trailing_zeros()).collect();
            if self.distinct {
                let used = self.domains.iter().fold(0u64, |acc, d| acc | d);
                if used.count_ones() as usize != values.len() {
                    return Some(Flow::Continue);
                }
            }
            return Some(on_solution(&values));
        };
        let saved = self.domains.clone();
        let mut rest = saved[v];
        while rest != 0 {
            let value = rest.trailing_zeros();
            rest &= rest - 1;
            if self.assign(v, value) {
                let flow = self.search(meter, on_solution);
                if flow != Some(Flow::Continue) {
                    self.domains = saved;
                    return flow;
                }
            }
            self.domains.clone_from(&saved);
        }
        Some(Flow::Continue)
    }
}
