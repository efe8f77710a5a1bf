//! Immutable simple undirected graphs with word-parallel bit-row adjacency.
//!
//! Vertices are dense integers `0..n`. Each row is padded to a multiple of
//! 64 bits so that set operations run word-parallel; the padding bits are
//! kept zero at all times.

use crate::error::{Error, Result};
use crate::Rational;

const WORD_BITS: usize = 64;

fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

/// Simple undirected graph. Immutable after construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    words: usize,
    /// Row-major adjacency: `rows[u * words .. (u+1) * words]`.
    rows: Vec<u64>,
    m: usize,
}

impl Graph {
    /// Graph on `n` isolated vertices.
    pub fn empty(n: usize) -> Graph {
        let words = words_for(n);
        Graph {
            n,
            words,
            rows: vec![0; n * words],
            m: 0,
        }
    }

    /// Build from an undirected edge list. Duplicate edges are collapsed,
    /// loops are rejected.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Graph> {
        let mut g = Graph::empty(n);
        for &(u, v) in edges {
            if u >= n {
                return Err(Error::VertexOutOfRange(u, n));
            }
            if v >= n {
                return Err(Error::VertexOutOfRange(v, n));
            }
            if u == v {
                return Err(Error::Invariant(format!("loop at vertex {u}")));
            }
            g.set_edge(u, v);
        }
        g.recount();
        debug_assert!(g.check_invariants().is_ok());
        Ok(g)
    }

    pub(crate) fn set_edge(&mut self, u: usize, v: usize) {
        self.rows[u * self.words + v / WORD_BITS] |= 1 << (v % WORD_BITS);
        self.rows[v * self.words + u / WORD_BITS] |= 1 << (u % WORD_BITS);
    }

    pub(crate) fn recount(&mut self) {
        let total: u32 = self.rows.iter().map(|w| w.count_ones()).sum();
        self.m = total as usize / 2;
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn words_per_row(&self) -> usize {
        self.words
    }

    pub fn row(&self, u: usize) -> &[u64] {
        &self.rows[u * self.words..(u + 1) * self.words]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u * self.words + v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|u| self.degree(u)).min().unwrap_or(0)
    }

    /// Exact average degree 2m/n as a reduced rational.
    pub fn avg_degree(&self) -> Result<Rational> {
        if self.n == 0 {
            return Err(Error::EmptyGraph);
        }
        Ok(Rational::new(2 * self.m as u64, self.n as u64))
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        BitIter::new(self.row(u))
    }

    /// Induced subgraph on `s`, vertices relabeled `0..|s|` in ascending
    /// original order.
    pub fn induced(&self, s: &VertexSet) -> Result<Graph> {
        if s.is_empty() {
            return Err(Error::EmptyVertexSet);
        }
        assert_eq!(s.ambient(), self.n, "vertex set indexes a different graph");
        let verts: Vec<usize> = s.iter().collect();
        let k = verts.len();
        let mut g = Graph::empty(k);
        for (i, &u) in verts.iter().enumerate() {
            for (j, &v) in verts.iter().enumerate().skip(i + 1) {
                if self.has_edge(u, v) {
                    g.set_edge(i, j);
                }
            }
        }
        g.recount();
        Ok(g)
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut seen = VertexSet::empty(self.n);
        let mut stack = vec![0];
        seen.insert(0);
        while let Some(u) = stack.pop() {
            for v in self.neighbors(u) {
                if !seen.contains(v) {
                    seen.insert(v);
                    stack.push(v);
                }
            }
        }
        seen.len() == self.n
    }

    /// Whether `s` induces a connected subgraph.
    pub fn is_connected_within(&self, s: &VertexSet) -> bool {
        let Some(start) = s.iter().next() else {
            return true;
        };
        let mut seen = VertexSet::empty(self.n);
        let mut stack = vec![start];
        seen.insert(start);
        while let Some(u) = stack.pop() {
            for v in self.neighbors(u) {
                if s.contains(v) && !seen.contains(v) {
                    seen.insert(v);
                    stack.push(v);
                }
            }
        }
        seen.len() == s.len()
    }

    /// Symmetry, loop-freeness, padding and cached edge count.
    pub fn check_invariants(&self) -> Result<()> {
        for u in 0..self.n {
            if self.has_edge(u, u) {
                return Err(Error::Invariant(format!("loop at {u}")));
            }
        }
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.has_edge(u, v) != self.has_edge(v, u) {
                    return Err(Error::Invariant(format!("asymmetric pair ({u},{v})")));
                }
            }
        }
        let total: u32 = self.rows.iter().map(|w| w.count_ones()).sum();
        if total as usize != 2 * self.m {
            return Err(Error::Invariant("cached m disagrees with popcount".into()));
        }
        // padding bits beyond n must be zero
        if self.n % WORD_BITS != 0 && self.words > 0 {
            let pad_mask = !0u64 << (self.n % WORD_BITS);
            for u in 0..self.n {
                if self.row(u)[self.words - 1] & pad_mask != 0 {
                    return Err(Error::Invariant(format!("padding bits set in row {u}")));
                }
            }
        }
        Ok(())
    }

    /// Disjoint union, second graph's vertices shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let n = self.n + other.n;
        let mut g = Graph::empty(n);
        for u in 0..self.n {
            for v in self.neighbors(u) {
                if u < v {
                    g.set_edge(u, v);
                }
            }
        }
        for u in 0..other.n {
            for v in other.neighbors(u) {
                if u < v {
                    g.set_edge(self.n + u, self.n + v);
                }
            }
        }
        g.recount();
        g
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for v in self.neighbors(u) {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }
}

/// Subset of the vertices of a graph of order `ambient`, stored as bit words.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexSet {
    ambient: usize,
    bits: Vec<u64>,
}

impl VertexSet {
    pub fn empty(ambient: usize) -> VertexSet {
        VertexSet {
            ambient,
            bits: vec![0; words_for(ambient)],
        }
    }

    pub fn full(ambient: usize) -> VertexSet {
        let mut s = VertexSet::empty(ambient);
        for v in 0..ambient {
            s.insert(v);
        }
        s
    }

    pub fn from_iter<I: IntoIterator<Item = usize>>(ambient: usize, verts: I) -> VertexSet {
        let mut s = VertexSet::empty(ambient);
        for v in verts {
            s.insert(v);
        }
        s
    }

    /// Low 64 bits interpreted as a subset (ambient <= 64 only).
    pub fn from_mask(ambient: usize, mask: u64) -> VertexSet {
        assert!(ambient <= 64);
        let mut s = VertexSet::empty(ambient);
        if !s.bits.is_empty() {
            s.bits[0] = mask;
        }
        s
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn insert(&mut self, v: usize) {
        assert!(v < self.ambient, "vertex {v} >= ambient {}", self.ambient);
        self.bits[v / WORD_BITS] |= 1 << (v % WORD_BITS);
    }

    pub fn remove(&mut self, v: usize) {
        self.bits[v / WORD_BITS] &= !(1 << (v % WORD_BITS));
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.ambient && self.bits[v / WORD_BITS] >> (v % WORD_BITS) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        BitIter::new(&self.bits)
    }

    pub fn union_with(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.ambient, other.ambient);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a |= b;
        }
    }

    pub fn subtract(&mut self, other: &VertexSet) {
        debug_assert_eq!(self.ambient, other.ambient);
        for (a, b) in self.bits.iter_mut().zip(&other.bits) {
            *a &= !b;
        }
    }

    pub fn is_disjoint(&self, other: &VertexSet) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & b == 0)
    }

    pub fn intersect_count(&self, other: &VertexSet) -> usize {
        self.bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    pub fn complement(&self) -> VertexSet {
        let mut out = VertexSet::full(self.ambient);
        out.subtract(self);
        out
    }

    /// Number of neighbors of `row` inside this set (word-parallel).
    pub fn count_row_hits(&self, row: &[u64]) -> usize {
        self.bits
            .iter()
            .zip(row)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    /// External neighborhood N(X) of this set in `g`.
    pub fn neighborhood(&self, g: &Graph) -> VertexSet {
        let mut out = VertexSet::empty(self.ambient);
        for u in self.iter() {
            for (a, b) in out.bits.iter_mut().zip(g.row(u)) {
                *a |= b;
            }
        }
        out.subtract(self);
        out
    }

    pub fn to_sorted_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

struct BitIter<'a> {
    words: &'a [u64],
    word_idx: usize,
    current: u64,
}

impl<'a> BitIter<'a> {
    fn new(words: &'a [u64]) -> Self {
        BitIter {
            words,
            word_idx: 0,
            current: words.first().copied().unwrap_or(0),
        }
    }
}

impl Iterator for BitIter<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        while self.current == 0 {
            self.word_idx += 1;
            if self.word_idx >= self.words.len() {
                return None;
            }
            self.current = self.words[self.word_idx];
        }
        let bit = self.current.trailing_zeros() as usize;
        self.current &= self.current - 1;
        Some(self.word_idx * WORD_BITS + bit)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{self, Family};

    #[test]
    fn avg_degree_examples() {
        let k4 = gen::generate(&Family::Complete(4), 0).unwrap();
        assert_eq!(k4.avg_degree().unwrap(), Rational::from_integer(3));
        let c5 = gen::generate(&Family::Cycle(5), 0).unwrap();
        assert_eq!(c5.avg_degree().unwrap(), Rational::from_integer(2));
        // star K_{1,3}: 2*3/4 = 3/2
        let star = gen::generate(&Family::CompleteBipartite(1, 3), 0).unwrap();
        assert_eq!(star.avg_degree().unwrap(), Rational::new(3, 2));
    }

    #[test]
    fn avg_degree_rejects_empty() {
        assert!(Graph::empty(0).avg_degree().is_err());
    }

    #[test]
    fn induced_examples() {
        let k5 = gen::generate(&Family::Complete(5), 0).unwrap();
        let tri = k5
            .induced(&VertexSet::from_iter(5, [0, 2, 4]))
            .unwrap();
        assert_eq!(tri.n(), 3);
        assert_eq!(tri.m(), 3);

        let c6 = gen::generate(&Family::Cycle(6), 0).unwrap();
        let p3 = c6.induced(&VertexSet::from_iter(6, [0, 1, 2])).unwrap();
        assert_eq!(p3.m(), 2);
        assert_eq!(p3.degree(1), 2);

        // outer 5 vertices of the standard Petersen labeling form C_5
        let pet = gen::petersen();
        let outer = pet
            .induced(&VertexSet::from_iter(10, 0..5))
            .unwrap();
        assert_eq!(outer.m(), 5);
        assert!((0..5).all(|v| outer.degree(v) == 2));
        assert!(outer.is_connected());
    }

    #[test]
    fn induced_rejects_empty_set() {
        let k5 = gen::generate(&Family::Complete(5), 0).unwrap();
        assert!(k5.induced(&VertexSet::empty(5)).is_err());
    }

    #[test]
    fn vertex_set_ops() {
        let mut s = VertexSet::from_iter(100, [0, 63, 64, 99]);
        assert_eq!(s.len(), 4);
        assert!(s.contains(64));
        s.remove(63);
        assert_eq!(s.to_sorted_vec(), vec![0, 64, 99]);
        assert!(s.is_disjoint(&VertexSet::from_iter(100, [1, 63])));
        assert_eq!(s.complement().len(), 97);
    }

    #[test]
    fn neighborhood_is_external() {
        let c6 = gen::generate(&Family::Cycle(6), 0).unwrap();
        let s = VertexSet::from_iter(6, [0, 1]);
        assert_eq!(s.neighborhood(&c6).to_sorted_vec(), vec![2, 5]);
    }

    #[test]
    fn disjoint_union_counts() {
        let k4 = gen::generate(&Family::Complete(4), 0).unwrap();
        let c5 = gen::generate(&Family::Cycle(5), 0).unwrap();
        let u = k4.disjoint_union(&c5);
        assert_eq!(u.n(), 9);
        assert_eq!(u.m(), 11);
        u.check_invariants().unwrap();
    }
}
