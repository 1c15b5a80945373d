//! Exact capacitated assignment as a min-cost flow.
//!
//! The network is the usual transportation layout: source -> individual
//! (capacity 1), individual -> service (capacity 1, integer cost), service ->
//! sink (capacity `c_k`). Flow of value `N` is pushed by successive shortest
//! paths, one individual at a time.
//!
//! With few services the residual graph has a compact form. A residual path
//! that enters service `k`, follows the reverse arc to some individual `j`
//! currently there and continues to service `k'` costs `c[j][k'] - c[j][k]`,
//! so only the cheapest such `j` matters for each ordered pair `(k, k')`.
//! Those candidates are kept in ordered sets and shortest paths are computed
//! with Bellman-Ford over the `K + 1` service and sink nodes. Each
//! augmentation therefore costs `O(K^3 + K^2 log N)` instead of a sweep over
//! all individuals.
//!
//! Among all optimal assignments the solver returns the lexicographically
//! smallest service vector: after the optimum is found, individuals are
//! fixed in index order, each moved to the lowest service reachable through
//! a zero-cost residual cycle that avoids already fixed individuals.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

const UNASSIGNED: usize = usize::MAX;
const INF: i64 = i64::MAX;

#[derive(Debug, Clone, Copy)]
struct Step {
    /// Previous node, `None` for the path start.
    from: Option<usize>,
    /// Individual moved out of `from` along this step, if any.
    mover: Option<usize>,
}

struct Residual<'a> {
    k: usize,
    caps: &'a [usize],
    costs: &'a [i64],
    assign: Vec<usize>,
    counts: Vec<usize>,
    /// `moves[from * k + to]`: (cost change, individual) for individuals
    /// currently at `from` that may move to `to`.
    moves: Vec<BTreeSet<(i64, usize)>>,
}

impl<'a> Residual<'a> {
    fn new(n: usize, k: usize, caps: &'a [usize], costs: &'a [i64]) -> Self {
        Self {
            k,
            caps,
            costs,
            assign: vec![UNASSIGNED; n],
            counts: vec![0; k],
            moves: vec![BTreeSet::new(); k * k],
        }
    }

    fn cost(&self, i: usize, s: usize) -> i64 {
        self.costs[i * self.k + s]
    }

    fn enroll(&mut self, j: usize) {
        let from = self.assign[j];
        for to in (0..self.k).filter(|&t| t != from) {
            let delta = self.cost(j, to) - self.cost(j, from);
            self.moves[from * self.k + to].insert((delta, j));
        }
    }

    fn withdraw(&mut self, j: usize) {
        let from = self.assign[j];
        for to in (0..self.k).filter(|&t| t != from) {
            let delta = self.cost(j, to) - self.cost(j, from);
            self.moves[from * self.k + to].remove(&(delta, j));
        }
    }

    /// Moves an unfixed individual, keeping the candidate sets in sync.
    fn relocate(&mut self, j: usize, to: usize) {
        self.withdraw(j);
        self.counts[self.assign[j]] -= 1;
        self.assign[j] = to;
        self.counts[to] += 1;
        self.enroll(j);
    }

    /// Bellman-Ford over services `0..k` and the sink `k`, from the given
    /// initial distances.
    fn shortest_paths(&self, mut dist: Vec<i64>) -> (Vec<i64>, Vec<Option<Step>>) {
        let k = self.k;
        let sink = k;
        let mut pred: Vec<Option<Step>> = dist
            .iter()
            .map(|&d| (d != INF).then_some(Step { from: None, mover: None }))
            .collect();
        for _ in 0..=k + 1 {
            let mut changed = false;
            for u in 0..=k {
                if dist[u] == INF {
                    continue;
                }
                let mut relax = |v: usize, w: i64, mover: Option<usize>, dist: &mut Vec<i64>| {
                    let cand = dist[u] + w;
                    if cand < dist[v] {
                        dist[v] = cand;
                        pred[v] = Some(Step { from: Some(u), mover });
                        changed = true;
                    }
                };
                if u == sink {
                    for v in (0..k).filter(|&v| self.counts[v] > 0) {
                        relax(v, 0, None, &mut dist);
                    }
                } else {
                    for v in (0..k).filter(|&v| v != u) {
                        if let Some(&(delta, j)) = self.moves[u * k + v].first() {
                            relax(v, delta, Some(j), &mut dist);
                        }
                    }
                    if self.counts[u] < self.caps[u] {
                        relax(sink, 0, None, &mut dist);
                    }
                }
            }
            if !changed {
                break;
            }
        }
        (dist, pred)
    }

    /// Walks predecessors back from `target`; returns the path's first node
    /// and the individual moves along it.
    fn trace(&self, pred: &[Option<Step>], target: usize) -> (usize, Vec<(usize, usize)>) {
        let mut moves = Vec::new();
        let mut node = target;
        loop {
            let step = pred[node].expect("reachable node has a predecessor");
            match step.from {
                None => return (node, moves),
                Some(prev) => {
                    if let Some(j) = step.mover {
                        moves.push((j, node));
                    }
                    node = prev;
                }
            }
        }
    }

    /// Adds individual `i` along a cheapest augmenting path.
    fn insert(&mut self, i: usize) {
        let mut dist = vec![INF; self.k + 1];
        for (s, d) in dist.iter_mut().take(self.k).enumerate() {
            *d = self.cost(i, s);
        }
        let (dist, pred) = self.shortest_paths(dist);
        debug_assert!(dist[self.k] != INF, "capacity check guarantees a path");
        let (first, moves) = self.trace(&pred, self.k);
        for (j, to) in moves {
            self.relocate(j, to);
        }
        self.assign[i] = first;
        self.counts[first] += 1;
        self.enroll(i);
    }

    /// Moves `i` to the lowest service that some optimal assignment
    /// consistent with the already fixed prefix gives it, then fixes `i`.
    fn fix_lexicographic(&mut self, i: usize) {
        self.withdraw(i);
        let current = self.assign[i];
        for target in 0..current {
            let mut dist = vec![INF; self.k + 1];
            dist[target] = 0;
            let (dist, pred) = self.shortest_paths(dist);
            if dist[current] == INF {
                continue;
            }
            let cycle = self.cost(i, target) - self.cost(i, current) + dist[current];
            if cycle <= 0 {
                let (_, moves) = self.trace(&pred, current);
                for (j, to) in moves {
                    self.relocate(j, to);
                }
                self.counts[current] -= 1;
                self.assign[i] = target;
                self.counts[target] += 1;
                return;
            }
        }
    }
}

/// Minimises `sum_i costs[i][a(i)]` subject to at most `caps[s]` individuals
/// per service. `costs` is row-major `n x k`.
///
/// Returns the lexicographically smallest optimal assignment (0-based).
pub fn solve_min_cost(costs: &[i64], n: usize, caps: &[usize]) -> Result<Vec<usize>> {
    let k = caps.len();
    if k == 0 {
        return Err(Error::InvalidParameters("no services".into()));
    }
    if costs.len() != n * k {
        return Err(Error::InvalidParameters(format!(
            "cost matrix has {} entries, expected {n}x{k}",
            costs.len()
        )));
    }
    let capacity: usize = caps.iter().sum();
    if capacity < n {
        return Err(Error::Infeasible { capacity, demand: n });
    }
    let mut net = Residual::new(n, k, caps, costs);
    for i in 0..n {
        net.insert(i);
    }
    for i in 0..n {
        net.fix_lexicographic(i);
    }
    Ok(net.assign)
}

/// Rounds `value * scale` to an integer cost, rejecting magnitudes that could
/// overflow when summed over `n` individuals.
pub fn integerize(value: f64, scale: f64, n: usize) -> Result<i64> {
    let scaled = (value * scale).round();
    let limit = (i64::MAX / 4) as f64 / (n.max(1) as f64);
    if !scaled.is_finite() || scaled.abs() > limit {
        return Err(Error::InvalidParameters(format!(
            "utility {value} with tie-break scale {scale} overflows integer costs"
        )));
    }
    Ok(scaled as i64)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates all feasible assignments in lexicographic order and keeps
    /// the first one of minimum cost.
    fn brute_force(costs: &[i64], n: usize, caps: &[usize]) -> Option<(i64, Vec<usize>)> {
        let k = caps.len();
        let mut best: Option<(i64, Vec<usize>)> = None;
        let mut a = vec![0usize; n];
        loop {
            let mut counts = vec![0; k];
            a.iter().for_each(|&s| counts[s] += 1);
            if counts.iter().zip(caps).all(|(c, cap)| c <= cap) {
                let total: i64 = a.iter().enumerate().map(|(i, &s)| costs[i * k + s]).sum();
                if best.as_ref().is_none_or(|(b, _)| total < *b) {
                    best = Some((total, a.clone()));
                }
            }
            let mut pos = n;
            loop {
                if pos == 0 {
                    return best;
                }
                pos -= 1;
                a[pos] += 1;
                if a[pos] < k {
                    break;
                }
                a[pos] = 0;
            }
        }
    }

    fn total(costs: &[i64], k: usize, a: &[usize]) -> i64 {
        a.iter().enumerate().map(|(i, &s)| costs[i * k + s]).sum()
    }

    #[test]
    fn two_by_two() {
        // maximise u1=(0.9,0.8), u2=(0.5,0.1): costs are negated
        let costs = [-9, -8, -5, -1];
        assert_eq!(solve_min_cost(&costs, 2, &[1, 1]).unwrap(), vec![1, 0]);
    }

    #[test]
    fn all_ties_give_lexicographic_least() {
        let costs = vec![-3; 5 * 3];
        let a = solve_min_cost(&costs, 5, &[2, 2, 2]).unwrap();
        assert_eq!(a, vec![0, 0, 1, 1, 2]);
    }

    #[test]
    fn slack_capacity_is_allowed() {
        let costs = [-1, -5, -2, -7, -3, -2];
        let a = solve_min_cost(&costs, 3, &[3, 1]).unwrap();
        assert_eq!(total(&costs, 2, &a), brute_force(&costs, 3, &[3, 1]).unwrap().0);
        assert_eq!(a, vec![0, 1, 0]);
    }

    #[test]
    fn infeasible_capacities() {
        let err = solve_min_cost(&[0; 6], 3, &[1, 1]).unwrap_err();
        assert!(matches!(err, Error::Infeasible { capacity: 2, demand: 3 }));
    }

    #[test]
    fn matches_brute_force_on_small_instances() {
        use rand::Rng;
        let mut rng = crate::rng::seeded(99);
        for _ in 0..400 {
            let n = rng.random_range(1..=7);
            let k = rng.random_range(1..=3);
            let mut caps: Vec<usize> = (0..k).map(|_| rng.random_range(0..=n)).collect();
            while caps.iter().sum::<usize>() < n {
                let s = rng.random_range(0..k);
                caps[s] += 1;
            }
            // narrow cost range forces plenty of ties
            let costs: Vec<i64> = (0..n * k).map(|_| rng.random_range(-4..=4)).collect();
            let (best, lex) = brute_force(&costs, n, &caps).unwrap();
            let got = solve_min_cost(&costs, n, &caps).unwrap();
            assert_eq!(total(&costs, k, &got), best, "costs {costs:?} caps {caps:?}");
            assert_eq!(got, lex, "costs {costs:?} caps {caps:?}");
        }
    }

    #[test]
    fn integerize_rounds_and_guards() {
        assert_eq!(integerize(0.123_456_78, 1e7, 10).unwrap(), 1_234_568);
        assert!(integerize(1e300, 1e7, 10).is_err());
        assert!(integerize(f64::NAN, 1e7, 10).is_err());
    }
}
