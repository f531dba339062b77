//! Prim order on the complete graph with uniform edge weights, the merge
//! record, the exploration walk, the representation forest, cyclic points and
//! graph queries. Vertex labels and Prim ranks are 1-based; label 1 is the root.

use std::collections::VecDeque;

use crate::error::{domain, usage, Error, Result};
use crate::fmt::g17;
use crate::rng::{RngKey, UniformField};

/// Lexicographic index of the unordered pair `{a, b}` of labels among the
/// pairs 12, 13, ..., 1n, 23, ...
pub fn pair_index(n: usize, a: usize, b: usize) -> usize {
    let (i, j) = (a.min(b), a.max(b));
    debug_assert!(1 <= i && i < j && j <= n);
    (i - 1) * n - (i - 1) * i / 2 + (j - i - 1)
}

#[derive(Debug, Clone, PartialEq)]
pub enum Weights {
    /// Weight of pair `k` is the open uniform at counter `k` of key
    /// `(seed, "w", 0)`.
    Keyed { n: usize, field: UniformField },
    /// Explicit weights in lexicographic pair order (test hook).
    Forced { n: usize, w: Vec<f64> },
}

impl Weights {
    pub fn keyed(n: usize, seed: u64) -> Self {
        Weights::Keyed { n, field: UniformField::new(&RngKey::new(seed, "w", 0)) }
    }

    pub fn forced(n: usize, w: Vec<f64>) -> Result<Self> {
        if w.len() != n * (n - 1) / 2 {
            return usage(format!("{} forced weights given, {} pairs expected", w.len(), n * (n - 1) / 2));
        }
        if w.iter().any(|x| !(*x > 0.0 && *x < 1.0)) {
            return usage("forced weights must lie in (0, 1)");
        }
        Ok(Weights::Forced { n, w })
    }

    pub fn n(&self) -> usize {
        match self {
            Weights::Keyed { n, .. } | Weights::Forced { n, .. } => *n,
        }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> f64 {
        match self {
            Weights::Keyed { n, field } => field.open_at(pair_index(*n, a, b) as u64),
            Weights::Forced { n, w } => w[pair_index(*n, a, b)],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    /// Rank of `u_i`, the tree vertex the new vertex attaches to.
    pub a_rank: usize,
    /// Rank `i` of the new vertex.
    pub b_rank: usize,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrimResult {
    pub n: usize,
    /// `order[k - 1]` is the label of rank `k`. Shorter than `n` for a prefix.
    pub order: Vec<usize>,
    /// Edge `k - 2` attaches rank `k`, for `k = 2..=order.len()`.
    pub edges: Vec<MstEdge>,
}

impl PrimResult {
    pub fn rank_of(&self) -> Vec<usize> {
        let mut r = vec![0; self.n + 1];
        for (k, &lab) in self.order.iter().enumerate() {
            r[lab] = k + 1;
        }
        r
    }

    /// Selection weight `w_{e_k}` of rank `k >= 2`.
    pub fn weight_of_rank(&self, k: usize) -> f64 {
        self.edges[k - 2].weight
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Tree edges as sorted label pairs.
    pub fn label_edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|e| {
                let (a, b) = (self.order[e.a_rank - 1], self.order[e.b_rank - 1]);
                (a.min(b), a.max(b))
            })
            .collect();
        out.sort_unstable();
        out
    }

    /// CSV `rank_a,rank_b,weight`.
    pub fn edges_csv(&self) -> String {
        let mut s = String::from("rank_a,rank_b,weight\n");
        for e in &self.edges {
            s.push_str(&format!("{},{},{}\n", e.a_rank, e.b_rank, g17(e.weight)));
        }
        s
    }
}

/// Prim from label 1 with an O(n^2) array scan.
pub fn prim_order(weights: &Weights) -> Result<PrimResult> {
    prim_prefix(weights, weights.n())
}

/// The first `k` ranks of the Prim order; O(k n).
pub fn prim_prefix(weights: &Weights, k: usize) -> Result<PrimResult> {
    let n = weights.n();
    if n < 2 {
        return usage("need at least two vertices");
    }
    let k = k.clamp(1, n);
    let mut in_tree = vec![false; n + 1];
    let mut best = vec![f64::INFINITY; n + 1];
    let mut from = vec![0usize; n + 1];
    let mut rank = vec![0usize; n + 1];
    let mut order = Vec::with_capacity(k);
    let mut edges = Vec::with_capacity(k.saturating_sub(1));
    let mut ties = 0usize;
    let mut cur = 1;
    in_tree[1] = true;
    rank[1] = 1;
    order.push(1);
    while order.len() < k {
        for u in 1..=n {
            if in_tree[u] {
                continue;
            }
            let w = weights.get(cur, u);
            if w < best[u] {
                best[u] = w;
                from[u] = cur;
            } else if w == best[u] {
                ties += 1;
            }
        }
        let mut next = 0;
        for u in 1..=n {
            if in_tree[u] {
                continue;
            }
            if next == 0 || best[u] < best[next] {
                next = u;
            } else if best[u] == best[next] {
                ties += 1;
            }
        }
        in_tree[next] = true;
        order.push(next);
        rank[next] = order.len();
        edges.push(MstEdge { a_rank: rank[from[next]], b_rank: order.len(), weight: best[next] });
        cur = next;
    }
    if ties > 0 {
        return Err(Error::Statistical(format!("{ties} weight ties in the Prim scan")));
    }
    Ok(PrimResult { n, order, edges })
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a] < self.size[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b] = a;
        self.size[a] += self.size[b];
        true
    }
}

/// Kruskal on all pairs; returns sorted label pairs and the total weight.
pub fn kruskal_mst(weights: &Weights) -> Result<(Vec<(usize, usize)>, f64)> {
    let n = weights.n();
    if n < 2 {
        return usage("need at least two vertices");
    }
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for a in 1..=n {
        for b in a + 1..=n {
            pairs.push((weights.get(a, b), a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0).then((x.1, x.2).cmp(&(y.1, y.2))));
    let mut uf = UnionFind::new(n + 1);
    let mut accepted = vec![false; pairs.len()];
    let mut edges = Vec::with_capacity(n - 1);
    let mut total = 0.0;
    for (k, &(w, a, b)) in pairs.iter().enumerate() {
        if uf.union(a, b) {
            accepted[k] = true;
            edges.push((a, b));
            total += w;
        }
    }
    // a tie only matters when one of the tied pairs enters the tree
    let ties = (1..pairs.len()).filter(|&k| pairs[k].0 == pairs[k - 1].0 && (accepted[k] || accepted[k - 1])).count();
    if ties > 0 {
        return Err(Error::Statistical(format!("{ties} weight ties decide tree edges")));
    }
    edges.sort_unstable();
    Ok((edges, total))
}

/// `p_n(lambda) = 1/n + lambda n^{-4/3}`.
pub fn critical_p(n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    1.0 / nf + lambda * nf.powf(-4.0 / 3.0)
}

/// `(n w - 1) n^{1/3}`, the parameter at which weight `w` enters.
pub fn weight_to_lambda(n: usize, w: f64) -> f64 {
    let nf = n as f64;
    (nf * w - 1.0) * nf.cbrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeEntry {
    pub l: usize,
    pub i: usize,
    /// Exclusive right end of the component of rank `i` before the merge.
    pub r: usize,
    /// `(1 - n w_{e_i}) n^{1/3}`; the merge happens at parameter `-s`.
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MergeRecord {
    pub n: usize,
    /// Entry `i - 2` belongs to rank `i`.
    pub entries: Vec<MergeEntry>,
}

impl MergeRecord {
    pub fn entry(&self, i: usize) -> &MergeEntry {
        &self.entries[i - 2]
    }

    /// CSV `l,i,r,s`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("l,i,r,s\n");
        for e in &self.entries {
            s.push_str(&format!("{},{},{},{}\n", e.l, e.i, e.r, g17(e.s)));
        }
        s
    }
}

/// Replays the tree edges by increasing weight over rank intervals.
pub fn merge_record(prim: &PrimResult) -> Result<MergeRecord> {
    let n = prim.order.len();
    if n != prim.n {
        return usage("merge record needs the full Prim order");
    }
    let mut idx: Vec<usize> = (0..prim.edges.len()).collect();
    idx.sort_by(|&a, &b| prim.edges[a].weight.total_cmp(&prim.edges[b].weight));
    let mut uf = UnionFind::new(n + 1);
    let mut lo: Vec<usize> = (0..=n).collect();
    let mut hi: Vec<usize> = (0..=n).collect();
    let mut entries = vec![MergeEntry { l: 0, i: 0, r: 0, s: 0.0 }; n - 1];
    let cube = (n as f64).cbrt();
    for k in idx {
        let e = prim.edges[k];
        let (ra, rb) = (uf.find(e.a_rank), uf.find(e.b_rank));
        let (l, r) = (lo[ra], hi[rb] + 1);
        if hi[ra] + 1 != e.b_rank || lo[rb] != e.b_rank {
            return Err(Error::Statistical(format!("rank {} merges non-adjacent intervals", e.b_rank)));
        }
        entries[e.b_rank - 2] = MergeEntry { l, i: e.b_rank, r, s: (1.0 - n as f64 * e.weight) * cube };
        uf.union(ra, rb);
        let root = uf.find(ra);
        lo[root] = l;
        hi[root] = r - 1;
    }
    Ok(MergeRecord { n, entries })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Exploration {
    pub p: f64,
    /// `n_k` for `k = 0..=len`: tree-external vertices with a neighbour among
    /// the first `k` ranks in the graph of weights at most `p`.
    pub frontier: Vec<usize>,
    /// `X_k = n_k - #{1 <= i <= k : n_i = 0}` for `k = 0..=len`.
    pub walk: Vec<i64>,
    /// Ranks opening a new component: 1 and every `k + 1` with `n_k = 0`.
    pub zeros: Vec<usize>,
}

/// Exploration walk along the first `len` Prim ranks at parameter `lambda`.
pub fn exploration(prim: &PrimResult, weights: &Weights, lambda: f64, len: usize) -> Result<Exploration> {
    let n = prim.n;
    let p = critical_p(n, lambda);
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p_n(lambda) = {p} outside (0, 1)"));
    }
    let len = len.min(prim.order.len());
    // first rank (within the prefix) adjacent to each label
    let mut first = vec![usize::MAX; n + 1];
    for k in 1..=len {
        let a = prim.order[k - 1];
        for (b, f) in first.iter_mut().enumerate().skip(1) {
            if *f == usize::MAX && b != a && weights.get(a, b) <= p {
                *f = k;
            }
        }
    }
    let rank = prim.rank_of();
    let mut count_at = vec![0i64; len + 2];
    let mut leave_at = vec![0i64; len + 2];
    for b in 1..=n {
        let f = first[b];
        if f == usize::MAX {
            continue;
        }
        let rb = if rank[b] == 0 { usize::MAX } else { rank[b] };
        if rb > f {
            count_at[f] += 1;
            if rb <= len {
                leave_at[rb] += 1;
            }
        }
    }
    let mut frontier = vec![0usize; len + 1];
    let mut walk = vec![0i64; len + 1];
    let mut zeros = vec![1];
    let mut active = 0i64;
    let mut empties = 0i64;
    for k in 1..=len {
        active += count_at[k] - leave_at[k];
        frontier[k] = active as usize;
        if active == 0 {
            empties += 1;
            if k < n {
                zeros.push(k + 1);
            }
        }
        walk[k] = active - empties;
    }
    Ok(Exploration { p, frontier, walk, zeros })
}

/// Component boundaries from the selection weights: rank `k >= 2` opens a
/// component iff `w_{e_k} > p`.
pub fn zeros_from_weights(prim: &PrimResult, lambda: f64) -> Result<Vec<usize>> {
    let p = critical_p(prim.n, lambda);
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("p_n(lambda) = {p} outside (0, 1)"));
    }
    let mut z = vec![1];
    z.extend(prim.edges.iter().filter(|e| e.weight > p).map(|e| e.b_rank));
    Ok(z)
}

/// Edges `{j(i), i}` with `j(i) = l(i) + floor(U_i (i - l(i)))`, restricted
/// to merges with `-s(i) <= lambda`.
pub fn representation_forest(
    record: &MergeRecord,
    assign: &crate::cmt::UniformAssignment,
    lambda: f64,
) -> Vec<(usize, usize)> {
    record
        .entries
        .iter()
        .filter(|e| -e.s <= lambda)
        .map(|e| {
            let span = e.i - e.l;
            let j = e.l + ((assign.u(e.i) * span as f64) as usize).min(span - 1);
            (j, e.i)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicPoint {
    pub i: usize,
    pub j: usize,
    pub lambda: f64,
}

/// Non-tree pairs among the first `rank_cap` ranks with parameter at most
/// `lambda_max`. The actual pair weights are used; the no-boundary condition
/// on `(i, j]` is checked for every retained pair.
pub fn cyclic_points(
    prim: &PrimResult,
    weights: &Weights,
    lambda_max: f64,
    rank_cap: usize,
) -> Result<Vec<CyclicPoint>> {
    let n = prim.n;
    let cap = rank_cap.min(prim.order.len());
    let w_max = (1.0 + lambda_max / (n as f64).cbrt()) / n as f64;
    let mut out = Vec::new();
    for i in 1..=cap {
        let a = prim.order[i - 1];
        let mut run = 0.0f64;
        for j in i + 1..=cap {
            let e = prim.edges[j - 2];
            run = run.max(e.weight);
            if e.a_rank == i {
                continue;
            }
            let w = weights.get(a, prim.order[j - 1]);
            if w > w_max {
                continue;
            }
            let lambda = weight_to_lambda(n, w);
            if lambda > lambda_max {
                continue;
            }
            if !(run < w) {
                return Err(Error::Statistical(format!("cyclic pair ({i}, {j}) straddles a boundary")));
            }
            out.push(CyclicPoint { i, j, lambda });
        }
    }
    Ok(out)
}

/// Retained triples inside the rank interval `[start, end)` with parameter at most `lambda`.
pub fn surplus(points: &[CyclicPoint], start: usize, end: usize, lambda: f64) -> usize {
    points.iter().filter(|c| c.i >= start && c.j < end && c.lambda <= lambda).count()
}

pub const UNREACHABLE: usize = usize::MAX;

/// Hop distance by breadth-first search on vertices `1..=n`.
pub fn graph_distance(edges: &[(usize, usize)], n: usize, a: usize, b: usize) -> usize {
    graph_distances_from(edges, n, a)[b]
}

/// Hop distances from `a` to every vertex; `UNREACHABLE` where disconnected.
pub fn graph_distances_from(edges: &[(usize, usize)], n: usize, a: usize) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n + 1];
    for &(u, v) in edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let mut dist = vec![UNREACHABLE; n + 1];
    let mut q = VecDeque::new();
    dist[a] = 0;
    q.push_back(a);
    while let Some(u) = q.pop_front() {
        for &v in &adj[u] {
            if dist[v] == UNREACHABLE {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    dist
}

/// Tree edges of a Prim result in rank space.
pub fn rank_edges(prim: &PrimResult) -> Vec<(usize, usize)> {
    prim.edges.iter().map(|e| (e.a_rank, e.b_rank)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmt::UniformAssignment;

    fn brute_force_mst(n: usize, w: &Weights) -> (Vec<(usize, usize)>, f64) {
        let pairs: Vec<(usize, usize)> = (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).collect();
        let mut best = (Vec::new(), f64::INFINITY);
        for mask in 0u32..(1 << pairs.len()) {
            if mask.count_ones() as usize != n - 1 {
                continue;
            }
            let chosen: Vec<(usize, usize)> =
                pairs.iter().enumerate().filter(|(k, _)| mask >> k & 1 == 1).map(|(_, p)| *p).collect();
            let mut uf = UnionFind::new(n + 1);
            if !chosen.iter().all(|&(a, b)| uf.union(a, b)) {
                continue;
            }
            let total: f64 = chosen.iter().map(|&(a, b)| w.get(a, b)).sum();
            if total < best.1 {
                best = (chosen, total);
            }
        }
        best
    }

    #[test]
    fn pair_index_is_lexicographic() {
        let n = 5;
        let mut k = 0;
        for a in 1..=n {
            for b in a + 1..=n {
                assert_eq!(pair_index(n, a, b), k);
                assert_eq!(pair_index(n, b, a), k);
                k += 1;
            }
        }
    }

    #[test]
    fn two_vertices() {
        let w = Weights::keyed(2, 1);
        let p = prim_order(&w).unwrap();
        assert_eq!(p.order, vec![1, 2]);
        assert_eq!(p.label_edges(), vec![(1, 2)]);
        assert_eq!(kruskal_mst(&w).unwrap().0, vec![(1, 2)]);
    }

    #[test]
    fn three_vertices_forced() {
        let w = Weights::forced(3, vec![0.1, 0.5, 0.2]).unwrap();
        let p = prim_order(&w).unwrap();
        assert_eq!(p.order, vec![1, 2, 3]);
        assert_eq!(p.label_edges(), vec![(1, 2), (2, 3)]);
        assert!((p.total_weight() - 0.3).abs() < 1e-15);
        let (k, total) = kruskal_mst(&w).unwrap();
        let (b, bt) = brute_force_mst(3, &w);
        assert_eq!(k, b);
        assert_eq!(total, bt);
    }

    #[test]
    fn four_vertices_cycle_trap() {
        // lexicographic: 12 13 14 23 24 34
        let w = Weights::forced(4, vec![0.1, 0.9, 0.15, 0.2, 0.9, 0.3]).unwrap();
        let (k, _) = kruskal_mst(&w).unwrap();
        assert_eq!(k, vec![(1, 2), (1, 4), (2, 3)]);
        assert_eq!(brute_force_mst(4, &w).0, k);
        assert_eq!(prim_order(&w).unwrap().label_edges(), k);
        let tied = Weights::forced(3, vec![0.1, 0.2, 0.2]).unwrap();
        assert!(kruskal_mst(&tied).is_err());
    }

    #[test]
    fn prim_equals_kruskal() {
        for seed in 0..100 {
            let w = Weights::keyed(30, seed);
            let p = prim_order(&w).unwrap();
            let (k, total) = kruskal_mst(&w).unwrap();
            assert_eq!(p.label_edges(), k);
            assert!((p.total_weight() - total).abs() < 1e-12);
        }
    }

    #[test]
    fn prefix_agrees_with_full() {
        let w = Weights::keyed(200, 4);
        let full = prim_order(&w).unwrap();
        let pre = prim_prefix(&w, 37).unwrap();
        assert_eq!(pre.order[..], full.order[..37]);
        assert_eq!(pre.edges[..], full.edges[..36]);
    }

    #[test]
    fn merge_record_n3() {
        let w = Weights::forced(3, vec![0.1, 0.5, 0.2]).unwrap();
        let rec = merge_record(&prim_order(&w).unwrap()).unwrap();
        assert_eq!((rec.entry(2).l, rec.entry(2).r), (1, 3));
        assert_eq!((rec.entry(3).l, rec.entry(3).r), (1, 4));
        assert_eq!(representation_forest(&rec, &UniformAssignment::constant(0.0), f64::INFINITY), vec![(1, 2), (1, 3)]);
        assert_eq!(
            representation_forest(&rec, &UniformAssignment::constant(0.999), f64::INFINITY),
            vec![(1, 2), (2, 3)]
        );
    }

    #[test]
    fn merge_record_intervals() {
        for seed in 0..20 {
            let w = Weights::keyed(60, seed);
            let rec = merge_record(&prim_order(&w).unwrap()).unwrap();
            for e in &rec.entries {
                assert!(e.l < e.i && e.i < e.r && e.r <= 61);
            }
        }
    }

    #[test]
    fn exploration_extremes() {
        let n = 40;
        let w = Weights::keyed(n, 2);
        let p = prim_order(&w).unwrap();
        let lo = -(n as f64).cbrt() * 0.999999;
        let ex = exploration(&p, &w, lo, n).unwrap();
        assert_eq!(ex.zeros, (1..=n).collect::<Vec<_>>());
        let hi = (n as f64).powf(4.0 / 3.0) * (1.0 - 1.0 / n as f64) * 0.999999;
        let ex = exploration(&p, &w, hi, n).unwrap();
        assert_eq!(ex.zeros, vec![1]);
        assert!(exploration(&p, &w, -10.0 * (n as f64).cbrt(), n).is_err());
    }

    #[test]
    fn zeros_are_graph_components() {
        let n = 50;
        for seed in 0..10 {
            let w = Weights::keyed(n, seed);
            let p = prim_order(&w).unwrap();
            for &lambda in &[-2.0, 0.0, 1.5, 4.0] {
                let ex = exploration(&p, &w, lambda, n).unwrap();
                assert_eq!(ex.zeros, zeros_from_weights(&p, lambda).unwrap());
                let mut uf = UnionFind::new(n + 1);
                for a in 1..=n {
                    for b in a + 1..=n {
                        if w.get(a, b) <= ex.p {
                            uf.union(a, b);
                        }
                    }
                }
                let mut bounds = ex.zeros.clone();
                bounds.push(n + 1);
                for c in bounds.windows(2) {
                    let root = uf.find(p.order[c[0] - 1]);
                    for r in c[0]..c[1] {
                        assert_eq!(uf.find(p.order[r - 1]), root);
                    }
                    if c[1] <= n {
                        assert_ne!(uf.find(p.order[c[1] - 1]), root);
                    }
                }
                // new minima of the walk sit exactly one rank before the zeros
                let mut min = 0;
                for k in 1..=n {
                    if ex.walk[k] < min {
                        min = ex.walk[k];
                        assert!(k == n || ex.zeros.contains(&(k + 1)));
                    }
                }
            }
        }
    }

    #[test]
    fn forest_structure() {
        let n = 80;
        for seed in 0..20 {
            let w = Weights::keyed(n, seed);
            let p = prim_order(&w).unwrap();
            let rec = merge_record(&p).unwrap();
            let a = UniformAssignment::new(seed);
            let all = representation_forest(&rec, &a, f64::INFINITY);
            assert_eq!(all.len(), n - 1);
            let mut uf = UnionFind::new(n + 1);
            assert!(all.iter().all(|&(x, y)| uf.union(x, y)));
            let mut prev: Vec<(usize, usize)> = Vec::new();
            for &lambda in &[-3.0, -1.0, 0.0, 1.0, 3.0] {
                let f = representation_forest(&rec, &a, lambda);
                assert!(prev.iter().all(|e| f.contains(e)));
                let zeros = zeros_from_weights(&p, lambda).unwrap();
                let mut uf = UnionFind::new(n + 1);
                for &(x, y) in &f {
                    uf.union(x, y);
                }
                let mut bounds = zeros.clone();
                bounds.push(n + 1);
                for c in bounds.windows(2) {
                    for r in c[0]..c[1] {
                        assert_eq!(uf.find(r), uf.find(c[0]));
                    }
                    if c[1] <= n {
                        assert_ne!(uf.find(c[1]), uf.find(c[0]));
                    }
                }
                prev = f;
            }
        }
    }

    #[test]
    fn cyclic_points_complete_the_graph() {
        let n = 50;
        let w = Weights::keyed(n, 17);
        let p = prim_order(&w).unwrap();
        let lambda = 0.0;
        let pts = cyclic_points(&p, &w, lambda, n).unwrap();
        assert!(cyclic_points(&p, &w, -1e6, n).unwrap().is_empty());
        let rec = merge_record(&p).unwrap();
        let forest = representation_forest(&rec, &UniformAssignment::new(1), lambda);
        let zeros = zeros_from_weights(&p, lambda).unwrap();
        let mut edges = forest.clone();
        edges.extend(pts.iter().map(|c| (c.i, c.j)));
        let mut uf = UnionFind::new(n + 1);
        for &(x, y) in &edges {
            uf.union(x, y);
        }
        let mut bounds = zeros.clone();
        bounds.push(n + 1);
        for c in bounds.windows(2) {
            for r in c[0]..c[1] {
                assert_eq!(uf.find(r), uf.find(c[0]));
            }
            let inside = edges.iter().filter(|&&(x, y)| x >= c[0] && y < c[1]).count();
            let size = c[1] - c[0];
            assert_eq!(inside - (size - 1), surplus(&pts, c[0], c[1], lambda));
        }
        // the surplus equals the cycle rank of the true graph on each component
        let pth = critical_p(n, lambda);
        let rank = p.rank_of();
        for c in bounds.windows(2) {
            let mut count = 0;
            for a in 1..=n {
                for b in a + 1..=n {
                    let (ra, rb) = (rank[a], rank[b]);
                    if w.get(a, b) <= pth && ra >= c[0] && ra < c[1] && rb >= c[0] && rb < c[1] {
                        count += 1;
                    }
                }
            }
            assert_eq!(count - (c[1] - c[0] - 1), surplus(&pts, c[0], c[1], lambda));
        }
    }

    #[test]
    fn bfs_basics() {
        assert_eq!(graph_distance(&[(1, 2)], 2, 1, 2), 1);
        assert_eq!(graph_distance(&[(1, 2), (2, 3)], 3, 1, 3), 2);
        assert_eq!(graph_distance(&[(1, 2)], 3, 1, 3), UNREACHABLE);
    }

    #[test]
    fn bfs_matches_floyd_warshall() {
        let n = 30;
        let w = Weights::keyed(n, 5);
        let p = critical_p(n, 3.0);
        let edges: Vec<(usize, usize)> =
            (1..=n).flat_map(|a| (a + 1..=n).map(move |b| (a, b))).filter(|&(a, b)| w.get(a, b) <= p * 2.0).collect();
        let inf = usize::MAX / 4;
        let mut fw = vec![vec![inf; n + 1]; n + 1];
        for i in 1..=n {
            fw[i][i] = 0;
        }
        for &(a, b) in &edges {
            fw[a][b] = 1;
            fw[b][a] = 1;
        }
        for k in 1..=n {
            for i in 1..=n {
                for j in 1..=n {
                    if fw[i][k] + fw[k][j] < fw[i][j] {
                        fw[i][j] = fw[i][k] + fw[k][j];
                    }
                }
            }
        }
        for a in 1..=n {
            let d = graph_distances_from(&edges, n, a);
            for b in 1..=n {
                let expect = if fw[a][b] >= inf { UNREACHABLE } else { fw[a][b] };
                assert_eq!(d[b], expect);
                assert_eq!(graph_distance(&edges, n, b, a), d[b]);
            }
        }
    }
}
