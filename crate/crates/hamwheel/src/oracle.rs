//! Independent brute-force reference implementations.
//!
//! These deliberately avoid the bitset fast paths of the main modules;
//! the test suites compare the optimized implementations against them.
//! Nothing here is meant to be fast.

use crate::graph::{Graph, VertexSet};
use crate::Rational;

/// Permutation backtracking from vertex 0.
pub fn is_hamiltonian_backtracking(g: &Graph) -> bool {
    let n = g.n();
    if n < 3 {
        return false;
    }
    let mut visited = vec![false; n];
    visited[0] = true;
    let mut path = vec![0usize];
    backtrack(g, &mut visited, &mut path)
}

fn backtrack(g: &Graph, visited: &mut [bool], path: &mut Vec<usize>) -> bool {
    if path.len() == g.n() {
        return g.has_edge(*path.last().unwrap(), path[0]);
    }
    let last = *path.last().unwrap();
    for v in 0..g.n() {
        if !visited[v] && g.has_edge(last, v) {
            visited[v] = true;
            path.push(v);
            if backtrack(g, visited, path) {
                return true;
            }
            path.pop();
            visited[v] = false;
        }
    }
    false
}

/// h(G) and per-vertex counts by subset enumeration over the
/// backtracking test.
pub fn count_hamiltonian_subsets_naive(g: &Graph) -> (u64, Vec<u64>) {
    let n = g.n();
    assert!(n <= 16, "naive counting is exponential twice over");
    let mut total = 0u64;
    let mut per_vertex = vec![0u64; n];
    for mask in 0u64..(1 << n) {
        if mask.count_ones() < 3 {
            continue;
        }
        let s = VertexSet::from_mask(n, mask);
        let sub = g.induced(&s).unwrap();
        if is_hamiltonian_backtracking(&sub) {
            total += 1;
            for v in s.iter() {
                per_vertex[v] += 1;
            }
        }
    }
    (total, per_vertex)
}

/// Minimum order of an induced subgraph with average degree at least
/// `alpha * d(G)`, by plain subset enumeration in ascending size.
pub fn crux_naive(g: &Graph, alpha: Rational) -> (usize, Vec<usize>) {
    let n = g.n();
    assert!(n <= 16);
    let d_num = 2 * g.m() as u128 * *alpha.numer() as u128; // alpha * d = num / (n * den)
    let d_den = n as u128 * *alpha.denom() as u128;
    let mut best: Option<(usize, Vec<usize>)> = None;
    for mask in 1u64..(1 << n) {
        let k = mask.count_ones() as usize;
        if let Some((bk, _)) = &best {
            if k >= *bk {
                continue;
            }
        }
        let s = VertexSet::from_mask(n, mask);
        let e = induced_edges(g, &s);
        // 2e/k >= alpha*d  <=>  2e * d_den >= k * d_num
        if 2 * e as u128 * d_den >= k as u128 * d_num {
            best = Some((k, s.to_sorted_vec()));
        }
    }
    best.expect("the whole graph is always an alpha-crux")
}

fn induced_edges(g: &Graph, s: &VertexSet) -> usize {
    let verts = s.to_sorted_vec();
    let mut e = 0;
    for (i, &u) in verts.iter().enumerate() {
        for &v in &verts[i + 1..] {
            if g.has_edge(u, v) {
                e += 1;
            }
        }
    }
    e
}

/// |N(X)| recomputed with plain adjacency lookups, no bit rows.
pub fn neighborhood_size_naive(g: &Graph, x: &VertexSet) -> usize {
    (0..g.n())
        .filter(|&v| !x.contains(v) && x.iter().any(|u| g.has_edge(u, v)))
        .count()
}

/// All violating pairs check for the beta-graph property, by direct
/// enumeration of disjoint pairs of size exactly `s`.
pub fn beta_violating_pair_naive(g: &Graph, s: usize) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = g.n();
    assert!(n <= 16);
    for a_mask in 0u64..(1 << n) {
        if a_mask.count_ones() as usize != s {
            continue;
        }
        for b_mask in 0u64..(1 << n) {
            if b_mask.count_ones() as usize != s || a_mask & b_mask != 0 {
                continue;
            }
            let a = VertexSet::from_mask(n, a_mask);
            let b = VertexSet::from_mask(n, b_mask);
            let joined = a
                .iter()
                .any(|u| b.iter().any(|v| g.has_edge(u, v)));
            if !joined {
                return Some((a.to_sorted_vec(), b.to_sorted_vec()));
            }
        }
    }
    None
}
