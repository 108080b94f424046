//! Offline optima: closed forms, an exhaustive solver for small graphs and
//! an exact structural solver for larger n-tadpoles.

use std::fmt;

use crate::geometry::cycle_geometry;
use crate::graph::{EdgeId, NodeId, Shape, WeightedGraph};
use crate::rational::Rational;

/// Environment variable overriding the default node cap of the exhaustive solver.
pub const BRUTE_CAP_ENV: &str = "TADPOLE_BRUTE_CAP";
pub const DEFAULT_BRUTE_CAP: usize = 12;
pub const MAX_BRUTE_AGENTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OfflineError {
    #[error("expected a {expected} instance")]
    WrongGraphClass { expected: &'static str },
    #[error("graph has {nodes} nodes, exhaustive search is capped at {cap}")]
    TooLarge { nodes: usize, cap: usize },
    #[error("agent count {0} is outside the supported range")]
    BadAgentCount(usize),
    #[error("closed form needs at least {needed} agents, got {k}")]
    InsufficientAgents { needed: usize, k: usize },
    #[error("weights are too fine-grained for exhaustive search")]
    ScaleOverflow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptMethod {
    Closed,
    Brute,
    Structured,
}

impl fmt::Display for OptMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OptMethod::Closed => "closed",
            OptMethod::Brute => "brute",
            OptMethod::Structured => "structured",
        })
    }
}

impl std::str::FromStr for OptMethod {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "closed" => Ok(OptMethod::Closed),
            "brute" => Ok(OptMethod::Brute),
            "structured" => Ok(OptMethod::Structured),
            other => Err(format!("unknown method `{other}`")),
        }
    }
}

/// Closed walks from the start node, one per agent; idle agents have `[s]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OfflinePlan {
    pub walks: Vec<Vec<NodeId>>,
    pub lengths: Vec<Rational>,
    pub makespan: Rational,
}

impl OfflinePlan {
    fn from_walks(g: &WeightedGraph, walks: Vec<Vec<NodeId>>) -> OfflinePlan {
        let lengths: Vec<Rational> = walks.iter().map(|w| walk_length(g, w)).collect();
        let makespan = lengths.iter().copied().max().unwrap_or(Rational::ZERO);
        OfflinePlan {
            walks,
            lengths,
            makespan,
        }
    }

    /// Checks coverage, closedness, adjacency and the makespan arithmetic.
    pub fn validate(&self, g: &WeightedGraph) -> Result<(), String> {
        let s = g.start();
        let mut covered = vec![false; g.node_count()];
        for (i, walk) in self.walks.iter().enumerate() {
            if walk.first() != Some(&s) || walk.last() != Some(&s) {
                return Err(format!("walk {i} is not closed at the start node"));
            }
            for pair in walk.windows(2) {
                if g.edge_between(pair[0], pair[1]).is_none() {
                    return Err(format!("walk {i} uses a non-edge {:?}", pair));
                }
            }
            for &v in walk {
                covered[v] = true;
            }
            if walk_length(g, walk) != self.lengths[i] {
                return Err(format!("walk {i} length mismatch"));
            }
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(format!("node {} is never visited", g.label(v)));
        }
        let max = self.lengths.iter().copied().max().unwrap_or(Rational::ZERO);
        if max != self.makespan {
            return Err("makespan is not the longest walk".into());
        }
        Ok(())
    }

    pub fn walk_labels(&self, g: &WeightedGraph) -> Vec<Vec<String>> {
        self.walks
            .iter()
            .map(|w| w.iter().map(|&v| g.label(v).to_string()).collect())
            .collect()
    }
}

fn walk_length(g: &WeightedGraph, walk: &[NodeId]) -> Rational {
    walk.windows(2)
        .map(|p| g.edge(g.edge_between(p[0], p[1]).expect("adjacent")).weight)
        .sum()
}

fn max_distance(g: &WeightedGraph) -> Rational {
    g.distances_from(g.start()).into_iter().max().unwrap()
}

/// Two agents on a cycle: walk to both sides of the midpoint and back.
pub fn opt_cycle(g: &WeightedGraph) -> Result<Rational, OfflineError> {
    if g.shape() != Shape::Cycle {
        return Err(OfflineError::WrongGraphClass { expected: "cycle" });
    }
    Ok(Rational::integer(2) * cycle_geometry(g).d_long)
}

/// Three or more agents on a tadpole: twice the eccentricity of the start.
pub fn opt_tadpole_k3plus(g: &WeightedGraph) -> Result<Rational, OfflineError> {
    if !matches!(g.shape(), Shape::Tadpole { .. }) {
        return Err(OfflineError::WrongGraphClass { expected: "tadpole" });
    }
    Ok(Rational::integer(2) * max_distance(g))
}

/// With at least `n + 2` agents every leaf of the midpoint-cut tree gets its
/// own agent, so the optimum is twice the eccentricity of the start.
pub fn opt_many_agents(g: &WeightedGraph, k: usize) -> Result<Rational, OfflineError> {
    let needed = g.tails().len() + 2;
    if k < needed {
        return Err(OfflineError::InsufficientAgents { needed, k });
    }
    Ok(Rational::integer(2) * max_distance(g))
}

/// One agent on an n-tadpole (any n, including cycles).
pub fn opt_single_agent_ntadpole(g: &WeightedGraph) -> Rational {
    let lc = g.cycle_length();
    let two = Rational::integer(2);
    let tails = two * g.tails_length();
    let e_max = g.cycle_weights().into_iter().max().unwrap();
    if e_max > lc / two {
        two * (lc - e_max) + tails
    } else {
        lc + tails
    }
}

/// `(L_c - l(e_max))/2 + sum of tail lengths / 2`, a lower bound for two agents.
pub fn two_agent_lower_bound(g: &WeightedGraph) -> Rational {
    let two = Rational::integer(2);
    let e_max = g.cycle_weights().into_iter().max().unwrap();
    (g.cycle_length() - e_max) / two + g.tails_length() / two
}

pub fn brute_force_cap() -> usize {
    std::env::var(BRUTE_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_BRUTE_CAP)
}

/// Exhaustive optimum for graphs below the configured node cap.
pub fn opt_bruteforce(g: &WeightedGraph, k: usize) -> Result<OfflinePlan, OfflineError> {
    BruteForce::new(g, brute_force_cap())?.plan(k)
}

/// Subset dynamic programme over the metric closure.
///
/// Weights are scaled to integers by the common denominator; the tour table
/// is shared between agent counts so several makespans cost one table.
pub struct BruteForce<'g> {
    g: &'g WeightedGraph,
    scale: i128,
    n: usize,
    others: Vec<NodeId>,
    /// Row-major `n x n` shortest distances and first hops.
    dist: Vec<i64>,
    next: Vec<NodeId>,
    /// `paths[mask * r + j]`: shortest path from the start through `mask` ending at `others[j]`.
    paths: Vec<i64>,
    tour: Vec<i64>,
}

const INF: i64 = i64::MAX / 4;
/// Scaled total weight above which the exhaustive solver declines.
const MAX_SCALED_TOTAL: i128 = 1 << 40;

impl<'g> BruteForce<'g> {
    pub fn new(g: &'g WeightedGraph, cap: usize) -> Result<Self, OfflineError> {
        let n = g.node_count();
        if n > cap {
            return Err(OfflineError::TooLarge { nodes: n, cap });
        }
        let scale = Rational::common_denominator(g.edges().iter().map(|e| &e.weight));
        let scaled: Vec<i128> = g
            .edges()
            .iter()
            .map(|e| e.weight.numer() * (scale / e.weight.denom()))
            .collect();
        if scaled.iter().sum::<i128>() > MAX_SCALED_TOTAL {
            return Err(OfflineError::ScaleOverflow);
        }
        let mut dist = vec![INF; n * n];
        let mut next = vec![usize::MAX; n * n];
        for v in 0..n {
            dist[v * n + v] = 0;
            next[v * n + v] = v;
        }
        for (e, &w) in g.edges().iter().zip(&scaled) {
            let w = w as i64;
            if w < dist[e.a * n + e.b] {
                dist[e.a * n + e.b] = w;
                dist[e.b * n + e.a] = w;
                next[e.a * n + e.b] = e.b;
                next[e.b * n + e.a] = e.a;
            }
        }
        for m in 0..n {
            for i in 0..n {
                let dim = dist[i * n + m];
                if dim >= INF {
                    continue;
                }
                for j in 0..n {
                    let via = dim + dist[m * n + j];
                    if via < dist[i * n + j] {
                        dist[i * n + j] = via;
                        next[i * n + j] = next[i * n + m];
                    }
                }
            }
        }
        let s = g.start();
        let others: Vec<NodeId> = (0..n).filter(|&v| v != s).collect();
        let r = others.len();
        let full = 1usize << r;
        // Distances among the non-start nodes, and to the start.
        let d: Vec<i64> = (0..r * r).map(|x| dist[others[x / r] * n + others[x % r]]).collect();
        let home: Vec<i64> = others.iter().map(|&v| dist[s * n + v]).collect();
        let mut paths = vec![INF; full * r.max(1)];
        for j in 0..r {
            paths[(1 << j) * r + j] = home[j];
        }
        for mask in 1..full {
            let row = mask * r;
            let mut bits = mask;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                let cur = paths[row + j];
                if cur >= INF {
                    continue;
                }
                let mut free = !mask & (full - 1);
                while free != 0 {
                    let t = free.trailing_zeros() as usize;
                    free &= free - 1;
                    let slot = &mut paths[(mask | (1 << t)) * r + t];
                    let cand = cur + d[j * r + t];
                    if cand < *slot {
                        *slot = cand;
                    }
                }
            }
        }
        let mut tour = vec![0i64; full];
        for (mask, slot) in tour.iter_mut().enumerate().skip(1) {
            let mut best = INF;
            let mut bits = mask;
            while bits != 0 {
                let j = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                best = best.min(paths[mask * r + j] + home[j]);
            }
            *slot = best;
        }
        Ok(BruteForce {
            g,
            scale,
            n,
            others,
            dist,
            next,
            paths,
            tour,
        })
    }

    fn partition(&self, k: usize) -> Result<(i64, Vec<usize>), OfflineError> {
        if k == 0 || k > MAX_BRUTE_AGENTS {
            return Err(OfflineError::BadAgentCount(k));
        }
        let full = self.tour.len();
        let all = full - 1;
        if k == 1 {
            return Ok((self.tour[all], if all == 0 { vec![] } else { vec![all] }));
        }
        let mut best = self.tour.clone();
        let mut choices: Vec<Vec<usize>> = Vec::new();
        for level_k in 2..=k {
            let mut level = vec![0i64; full];
            let mut choice = vec![0usize; full];
            // Only the full set is needed at the last level.
            let masks: Box<dyn Iterator<Item = usize>> = if level_k == k { Box::new(all..full) } else { Box::new(1..full) };
            for mask in masks {
                // `0` in `choice` means one agent stays idle.
                let mut val = best[mask];
                let mut pick = 0;
                let low = mask & mask.wrapping_neg();
                let rest = mask ^ low;
                let mut sub = rest;
                loop {
                    let block = sub | low;
                    let cand = self.tour[block].max(best[mask ^ block]);
                    if cand < val {
                        val = cand;
                        pick = block;
                    }
                    if sub == 0 {
                        break;
                    }
                    sub = (sub - 1) & rest;
                }
                level[mask] = val;
                choice[mask] = pick;
            }
            best = level;
            choices.push(choice);
        }
        let mut blocks = Vec::new();
        let mut mask = all;
        for choice in choices.iter().rev() {
            let pick = choice[mask];
            if pick != 0 {
                blocks.push(pick);
                mask ^= pick;
            }
        }
        if mask != 0 {
            blocks.push(mask);
        }
        Ok((best[all], blocks))
    }

    /// Minimum makespan with at most `k` agents.
    pub fn makespan(&self, k: usize) -> Result<Rational, OfflineError> {
        let (value, _) = self.partition(k)?;
        Ok(Rational::new(value as i128, self.scale))
    }

    pub fn plan(&self, k: usize) -> Result<OfflinePlan, OfflineError> {
        let (_, blocks) = self.partition(k)?;
        let s = self.g.start();
        let mut walks: Vec<Vec<NodeId>> = blocks.iter().map(|&b| self.block_walk(b)).collect();
        while walks.len() < k {
            walks.push(vec![s]);
        }
        Ok(OfflinePlan::from_walks(self.g, walks))
    }

    fn block_walk(&self, block: usize) -> Vec<NodeId> {
        let s = self.g.start();
        let n = self.n;
        let r = self.others.len();
        let d = |a: NodeId, b: NodeId| self.dist[a * n + b];
        let (mut cur, _) = (0..r)
            .filter(|&j| block & (1 << j) != 0)
            .map(|j| (j, self.paths[block * r + j] + d(self.others[j], s)))
            .min_by_key(|&(_, c)| c)
            .unwrap();
        let mut order = vec![cur];
        let mut mask = block;
        while mask.count_ones() > 1 {
            let prev_mask = mask ^ (1 << cur);
            let target = self.paths[mask * r + cur];
            let prev = (0..r)
                .find(|&i| {
                    prev_mask & (1 << i) != 0
                        && self.paths[prev_mask * r + i] + d(self.others[i], self.others[cur]) == target
                })
                .expect("held-karp predecessor");
            order.push(prev);
            mask = prev_mask;
            cur = prev;
        }
        order.reverse();
        let mut stops = vec![s];
        stops.extend(order.iter().map(|&j| self.others[j]));
        stops.push(s);
        let mut walk = vec![s];
        for pair in stops.windows(2) {
            let mut v = pair[0];
            while v != pair[1] {
                v = self.next[v * n + pair[1]];
                walk.push(v);
            }
        }
        walk
    }
}

/// Exact optimum for n-tadpoles of any size with few tails.
///
/// Either some cycle edge is unused, so agents partition the leaves of the
/// remaining tree, or some agent goes all the way round the cycle and the
/// others only serve tails.
pub fn opt_structured(g: &WeightedGraph, k: usize) -> Result<OfflinePlan, OfflineError> {
    if k == 0 {
        return Err(OfflineError::BadAgentCount(k));
    }
    let solver = Structured::new(g);
    let (value, plan) = solver.solve(k);
    debug_assert_eq!(plan.makespan, value);
    Ok(plan)
}

struct Structured<'g> {
    g: &'g WeightedGraph,
    s: NodeId,
}

/// Rooted spanning tree of the graph with one cycle edge removed.
struct CutTree {
    parent: Vec<Option<(NodeId, EdgeId)>>,
    leaves: Vec<NodeId>,
}

impl<'g> Structured<'g> {
    fn new(g: &'g WeightedGraph) -> Self {
        Structured { g, s: g.start() }
    }

    fn cut_tree(&self, removed: Option<EdgeId>) -> CutTree {
        let n = self.g.node_count();
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        let mut stack = vec![self.s];
        seen[self.s] = true;
        let mut children = vec![0usize; n];
        while let Some(v) = stack.pop() {
            for &(u, e) in self.g.neighbors(v) {
                if Some(e) == removed || seen[u] {
                    continue;
                }
                if removed.is_none() && self.g.is_cycle_edge(e) {
                    continue;
                }
                seen[u] = true;
                parent[u] = Some((v, e));
                children[v] += 1;
                stack.push(u);
            }
        }
        let leaves = (0..n)
            .filter(|&v| v != self.s && seen[v] && children[v] == 0)
            .collect();
        CutTree { parent, leaves }
    }

    /// Edges on the union of root paths to `targets`.
    fn union_edges(&self, tree: &CutTree, targets: impl IntoIterator<Item = NodeId>) -> Vec<EdgeId> {
        let mut used = vec![false; self.g.edge_count()];
        let mut out = Vec::new();
        for t in targets {
            let mut v = t;
            while let Some((p, e)) = tree.parent[v] {
                if used[e] {
                    break;
                }
                used[e] = true;
                out.push(e);
                v = p;
            }
        }
        out
    }

    fn weight(&self, edges: &[EdgeId]) -> Rational {
        edges.iter().map(|&e| self.g.edge(e).weight).sum()
    }

    fn solve(&self, k: usize) -> (Rational, OfflinePlan) {
        let g = self.g;
        let two = Rational::integer(2);
        let mut best: Option<(Rational, Vec<Vec<(EdgeId, usize)>>)> = None;
        let mut consider = |value: Rational, multisets: Vec<Vec<(EdgeId, usize)>>| {
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, multisets));
            }
        };

        // Some cycle edge unused by everyone.
        for cut in 0..g.cycle_len() {
            let tree = self.cut_tree(Some(cut));
            let leaves = tree.leaves.clone();
            let cost = |mask: usize| {
                let targets = (0..leaves.len()).filter(|i| mask & (1 << i) != 0).map(|i| leaves[i]);
                two * self.weight(&self.union_edges(&tree, targets))
            };
            let (value, blocks) = min_max_partition(leaves.len(), (1usize << leaves.len()) - 1, k, &cost);
            let multisets = blocks
                .iter()
                .map(|&mask| {
                    let targets = (0..leaves.len()).filter(|i| mask & (1 << i) != 0).map(|i| leaves[i]);
                    self.union_edges(&tree, targets).into_iter().map(|e| (e, 2)).collect()
                })
                .collect();
            consider(value, multisets);
        }

        // Some agent tours the cycle; remaining targets are the tail leaves.
        let trees: Vec<CutTree> = (0..g.cycle_len()).map(|e| self.cut_tree(Some(e))).collect();
        let entry = g.entry_node(self.s);
        let tail_leaves: Vec<NodeId> = trees[0]
            .leaves
            .iter()
            .copied()
            .filter(|&v| !g.is_cycle_node(v))
            .collect();
        let t = tail_leaves.len();
        let targets_of = |mask: usize| {
            (0..t)
                .filter(move |i| mask & (1 << i) != 0)
                .map(|i| tail_leaves[i])
        };
        let lc = g.cycle_length();
        // Off-cycle edges a touring agent needs: its way onto the cycle plus its tails.
        let tour_edges = |mask: usize| -> Vec<EdgeId> {
            self.union_edges(&trees[0], targets_of(mask).chain(std::iter::once(entry)))
                .into_iter()
                .filter(|&e| !g.is_cycle_edge(e))
                .collect()
        };
        let tour_cost = |mask: usize| lc + two * self.weight(&tour_edges(mask));
        let tour_multiset = |mask: usize| -> Vec<(EdgeId, usize)> {
            (0..g.cycle_len())
                .map(|e| (e, 1))
                .chain(tour_edges(mask).into_iter().map(|e| (e, 2)))
                .collect()
        };
        // Cheapest way for a helper to serve a set of tail leaves: tour, or stay in a cut tree.
        let helper: Vec<(Rational, Option<usize>)> = (0..(1usize << t))
            .map(|mask| {
                let mut best = (tour_cost(mask), None);
                for (e, tree) in trees.iter().enumerate() {
                    let c = two * self.weight(&self.union_edges(tree, targets_of(mask)));
                    if c < best.0 {
                        best = (c, Some(e));
                    }
                }
                best
            })
            .collect();
        let helper_cost = |mask: usize| helper[mask].0;
        let all = (1usize << t) - 1;
        for touring in 0..=all {
            let rest = all ^ touring;
            if k == 1 && rest != 0 {
                continue;
            }
            let (others, blocks) = if k > 1 {
                min_max_partition(t, rest, k - 1, &helper_cost)
            } else {
                (Rational::ZERO, Vec::new())
            };
            let value = tour_cost(touring).max(others);
            let mut multisets = vec![tour_multiset(touring)];
            for &b in &blocks {
                multisets.push(match helper[b].1 {
                    None => tour_multiset(b),
                    Some(e) => self
                        .union_edges(&trees[e], targets_of(b))
                        .into_iter()
                        .map(|e| (e, 2))
                        .collect(),
                });
            }
            consider(value, multisets);
        }

        let (value, multisets) = best.expect("at least one configuration");
        let mut walks: Vec<Vec<NodeId>> = multisets
            .iter()
            .map(|ms| euler_walk(g, self.s, ms))
            .collect();
        while walks.len() < k {
            walks.push(vec![self.s]);
        }
        (value, OfflinePlan::from_walks(g, walks))
    }
}

/// Min-max partition of the items in `target` into at most `k` blocks.
fn min_max_partition(
    n: usize,
    target: usize,
    k: usize,
    cost: &dyn Fn(usize) -> Rational,
) -> (Rational, Vec<usize>) {
    let full = 1usize << n;
    let block_cost: Vec<Rational> = (0..full).map(|m| if m == 0 { Rational::ZERO } else { cost(m) }).collect();
    let mut best = block_cost.clone();
    let mut choices: Vec<Vec<usize>> = Vec::new();
    for _ in 1..k {
        let mut level = best.clone();
        let mut choice = vec![0usize; full];
        for mask in 1..full {
            let low = mask & mask.wrapping_neg();
            let rest = mask ^ low;
            let mut sub = rest;
            loop {
                let block = sub | low;
                let cand = block_cost[block].max(best[mask ^ block]);
                if cand < level[mask] {
                    level[mask] = cand;
                    choice[mask] = block;
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        best = level;
        choices.push(choice);
    }
    let mut blocks = Vec::new();
    let mut mask = target;
    for choice in choices.iter().rev() {
        let pick = choice[mask];
        if pick != 0 {
            blocks.push(pick);
            mask ^= pick;
        }
    }
    if mask != 0 {
        blocks.push(mask);
    }
    (best[target], blocks)
}

/// Closed walk from `start` using every edge of the multiset exactly as often
/// as listed (Hierholzer).
fn euler_walk(g: &WeightedGraph, start: NodeId, multiset: &[(EdgeId, usize)]) -> Vec<NodeId> {
    let mut copies: Vec<EdgeId> = Vec::new();
    for &(e, count) in multiset {
        for _ in 0..count {
            copies.push(e);
        }
    }
    if copies.is_empty() {
        return vec![start];
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.node_count()];
    for (i, &e) in copies.iter().enumerate() {
        let edge = g.edge(e);
        incident[edge.a].push(i);
        incident[edge.b].push(i);
    }
    let mut used = vec![false; copies.len()];
    let mut cursor = vec![0usize; g.node_count()];
    let mut stack = vec![start];
    let mut walk = Vec::new();
    while let Some(&v) = stack.last() {
        let mut advanced = false;
        while cursor[v] < incident[v].len() {
            let i = incident[v][cursor[v]];
            cursor[v] += 1;
            if !used[i] {
                used[i] = true;
                stack.push(g.edge(copies[i]).other(v));
                advanced = true;
                break;
            }
        }
        if !advanced {
            walk.push(stack.pop().unwrap());
        }
    }
    walk.reverse();
    walk
}

/// Optimum for `k` agents using the cheapest applicable method.
pub fn opt_value(g: &WeightedGraph, k: usize) -> Result<(Rational, OptMethod), OfflineError> {
    if k == 0 {
        return Err(OfflineError::BadAgentCount(0));
    }
    if k == 1 {
        return Ok((opt_single_agent_ntadpole(g), OptMethod::Closed));
    }
    if let Ok(v) = opt_many_agents(g, k) {
        return Ok((v, OptMethod::Closed));
    }
    if g.node_count() <= brute_force_cap() && k <= MAX_BRUTE_AGENTS {
        match BruteForce::new(g, brute_force_cap()) {
            Ok(bf) => return Ok((bf.makespan(k)?, OptMethod::Brute)),
            Err(OfflineError::ScaleOverflow) => {}
            Err(e) => return Err(e),
        }
    }
    Ok((opt_structured(g, k)?.makespan, OptMethod::Structured))
}

/// Optimum by an explicitly requested method.
pub fn opt_with_method(
    g: &WeightedGraph,
    k: usize,
    method: OptMethod,
) -> Result<OfflinePlan, OfflineError> {
    match method {
        OptMethod::Brute => opt_bruteforce(g, k),
        OptMethod::Structured => opt_structured(g, k),
        OptMethod::Closed => {
            let value = if k == 1 {
                opt_single_agent_ntadpole(g)
            } else {
                opt_many_agents(g, k)?
            };
            let plan = opt_structured(g, k)?;
            debug_assert_eq!(plan.makespan, value);
            Ok(plan)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_cycle, build_n_tadpole, build_tadpole};
    use crate::rational::q;

    fn ints(ws: &[i128]) -> Vec<Rational> {
        ws.iter().map(|&w| Rational::integer(w)).collect()
    }

    #[test]
    fn cycle_closed_forms() {
        assert_eq!(opt_cycle(&build_cycle(&ints(&[1, 1, 1])).unwrap()).unwrap(), q(2, 1));
        assert_eq!(
            opt_cycle(&build_cycle(&[q(5, 4), q(1, 1), q(3, 4)]).unwrap()).unwrap(),
            q(5, 2)
        );
        assert_eq!(opt_cycle(&build_cycle(&ints(&[1, 1, 2])).unwrap()).unwrap(), q(4, 1));
        let tad = build_tadpole(&ints(&[1, 1, 1]), 1, &ints(&[1]), "c0").unwrap();
        assert!(opt_cycle(&tad).is_err());
    }

    #[test]
    fn tadpole_closed_forms() {
        let g = build_tadpole(&ints(&[1, 1, 1]), 1, &ints(&[1]), "c0").unwrap();
        assert_eq!(opt_tadpole_k3plus(&g).unwrap(), q(4, 1));
        let g = build_tadpole(&ints(&[1, 1, 1]), 0, &ints(&[2]), "t1").unwrap();
        assert_eq!(opt_tadpole_k3plus(&g).unwrap(), q(6, 1));
    }

    #[test]
    fn single_agent_and_lower_bound() {
        let c113 = build_cycle(&ints(&[1, 1, 3])).unwrap();
        assert_eq!(opt_single_agent_ntadpole(&c113), q(4, 1));
        assert_eq!(two_agent_lower_bound(&c113), q(1, 1));
        let c112 = build_cycle(&ints(&[1, 1, 2])).unwrap();
        assert_eq!(opt_single_agent_ntadpole(&c112), q(4, 1));
        let tri_tail = build_tadpole(&ints(&[1, 1, 1]), 0, &ints(&[1]), "c0").unwrap();
        assert_eq!(opt_single_agent_ntadpole(&tri_tail), q(5, 1));
        assert_eq!(two_agent_lower_bound(&tri_tail), q(3, 2));
        assert_eq!(two_agent_lower_bound(&build_cycle(&ints(&[1, 1, 1])).unwrap()), q(1, 1));
    }

    #[test]
    fn brute_force_small_cases() {
        let tri = build_cycle(&ints(&[1, 1, 1])).unwrap();
        let plan = opt_bruteforce(&tri, 2).unwrap();
        assert_eq!(plan.makespan, q(2, 1));
        plan.validate(&tri).unwrap();
        let bf = BruteForce::new(&tri, 12).unwrap();
        assert_eq!(bf.makespan(1).unwrap(), q(3, 1));
        assert!(bf.makespan(5).is_err());
        let big = build_cycle(&ints(&[1; 13])).unwrap();
        assert!(matches!(
            BruteForce::new(&big, 12),
            Err(OfflineError::TooLarge { nodes: 13, cap: 12 })
        ));
    }

    #[test]
    fn structured_matches_brute_force_on_examples() {
        let graphs = [
            build_cycle(&ints(&[1, 1, 3])).unwrap(),
            build_cycle(&[q(5, 4), q(1, 1), q(3, 4)]).unwrap(),
            build_tadpole(&ints(&[1, 1, 1]), 1, &ints(&[1]), "c0").unwrap(),
            build_tadpole(&ints(&[3, 1, 1]), 1, &ints(&[1]), "c0").unwrap(),
            build_tadpole(&ints(&[2, 1, 4, 1]), 2, &ints(&[1, 2]), "t1").unwrap(),
            build_n_tadpole(&ints(&[1, 1, 1, 1]), &[(0, ints(&[1])), (2, ints(&[1]))], "c1").unwrap(),
        ];
        for g in &graphs {
            for k in 1..=4 {
                let bf = opt_bruteforce(g, k).unwrap();
                let st = opt_structured(g, k).unwrap();
                st.validate(g).unwrap();
                bf.validate(g).unwrap();
                assert_eq!(bf.makespan, st.makespan, "k = {k} on\n{g}");
            }
        }
    }

    #[test]
    fn dispatcher_prefers_closed_forms() {
        let g = build_tadpole(&ints(&[1, 1, 1]), 1, &ints(&[1]), "c0").unwrap();
        assert_eq!(opt_value(&g, 3).unwrap(), (q(4, 1), OptMethod::Closed));
        assert_eq!(opt_value(&g, 2).unwrap().1, OptMethod::Brute);
        assert_eq!(opt_value(&g, 1).unwrap(), (q(5, 1), OptMethod::Closed));
    }
}
