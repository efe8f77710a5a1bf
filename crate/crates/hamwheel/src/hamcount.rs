//! Exact Hamiltonicity testing and exact Hamiltonian-subset counting.
//!
//! The counting engine runs a single dynamic program over all vertex
//! subsets at once: `dp[mask]` is the bitset of endpoints `e` such that
//! the subgraph induced on `mask` has a Hamiltonian path from
//! `min(mask)` to `e`. A subset `A` with `|A| >= 3` is Hamiltonian iff
//! some endpoint in `dp[A]` is adjacent to `min(A)`.

use crate::error::{Error, Result};
use crate::graph::Graph;
use serde::Serialize;
use std::time::{Duration, Instant};

/// Hard memory ceiling for the subset DP (`2^n` u32 words).
const DP_MAX_N: usize = 26;

/// Resource limits for [`count_hamiltonian_subsets`].
#[derive(Clone, Debug)]
pub struct CountBudget {
    /// Feasibility cap on the order; hard error above.
    pub cap_n: usize,
    pub time_limit: Option<Duration>,
    /// Worker count for the tally phase; aggregation is associative, so
    /// the result is identical for any thread count.
    pub threads: usize,
}

impl Default for CountBudget {
    fn default() -> Self {
        CountBudget {
            cap_n: 18,
            time_limit: None,
            threads: 1,
        }
    }
}

/// Exact counting result.
#[derive(Clone, Debug, Serialize)]
pub struct HamCount {
    pub n: usize,
    pub m: usize,
    /// Exact h(G).
    pub total: u64,
    /// `per_vertex[v]` = number of Hamiltonian subsets containing `v`.
    pub per_vertex: Vec<u64>,
    /// Sum of |A| over Hamiltonian subsets A, tracked independently of
    /// `per_vertex` during enumeration.
    pub sizes_sum: u64,
    pub subsets_examined: u64,
    #[serde(skip)]
    pub elapsed: Duration,
}

fn adjacency_masks(g: &Graph) -> Vec<u32> {
    assert!(g.n() <= 32);
    (0..g.n()).map(|u| g.row(u)[0] as u32).collect()
}

/// Runs the endpoint DP for all masks containing their own minimum as
/// the path anchor. `only_full_anchor0` skips masks without bit 0, which
/// suffices when only the full vertex set is queried.
fn endpoint_dp(adj: &[u32], n: usize, only_anchor0: bool, deadline: Option<Instant>) -> Result<Vec<u32>> {
    let size = 1usize << n;
    let mut dp = vec![0u32; size];
    for v in 0..n {
        dp[1 << v] = 1 << v;
    }
    let step = if only_anchor0 { 2 } else { 1 };
    let mut mask = 1usize;
    while mask < size {
        let ends = dp[mask];
        if ends != 0 {
            let anchor = mask.trailing_zeros();
            let above = !((1u32 << anchor) - 1) & !(1u32 << anchor);
            let mut eb = ends;
            while eb != 0 {
                let e = eb.trailing_zeros() as usize;
                eb &= eb - 1;
                let mut ext = adj[e] & !(mask as u32) & above;
                while ext != 0 {
                    let v = ext.trailing_zeros() as usize;
                    ext &= ext - 1;
                    dp[mask | (1 << v)] |= 1 << v;
                }
            }
        }
        if mask & 0xffff == 0 {
            if let Some(d) = deadline {
                if Instant::now() > d {
                    return Err(Error::BudgetExceeded {
                        subsets_examined: mask as u64,
                    });
                }
            }
        }
        mask += step;
    }
    Ok(dp)
}

/// True iff `g` has a cycle visiting every vertex exactly once.
/// Graphs with fewer than 3 vertices are never Hamiltonian.
pub fn is_hamiltonian(g: &Graph) -> bool {
    let n = g.n();
    if n < 3 {
        return false;
    }
    // cheap pre-filters before the exponential DP
    if (0..n).any(|v| g.degree(v) < 2) {
        return false;
    }
    if !g.is_connected() {
        return false;
    }
    assert!(
        n <= DP_MAX_N,
        "is_hamiltonian: order {n} exceeds the DP ceiling {DP_MAX_N}"
    );
    let adj = adjacency_masks(g);
    let dp = endpoint_dp(&adj, n, true, None).expect("no deadline set");
    let full = (1usize << n) - 1;
    dp[full] & adj[0] != 0
}

/// Exact h(G) with per-vertex counts. Enumeration order is subsets
/// ascending by binary value.
pub fn count_hamiltonian_subsets(g: &Graph, budget: &CountBudget) -> Result<HamCount> {
    let n = g.n();
    if n > budget.cap_n {
        return Err(Error::CapExceeded {
            n,
            cap: budget.cap_n,
        });
    }
    assert!(
        n <= DP_MAX_N,
        "count: order {n} exceeds the DP ceiling {DP_MAX_N}"
    );
    let start = Instant::now();
    let deadline = budget.time_limit.map(|t| start + t);
    let adj = adjacency_masks(g);
    let dp = endpoint_dp(&adj, n, false, deadline)?;

    let size = 1usize << n;
    let threads = budget.threads.max(1).min(size);
    let chunk = size.div_ceil(threads);
    let parts: Vec<(u64, u64, u64, Vec<u64>)> = std::thread::scope(|scope| {
        let mut handles = Vec::new();
        for t in 0..threads {
            let lo = t * chunk;
            let hi = ((t + 1) * chunk).min(size);
            let dp = &dp;
            let adj = &adj;
            handles.push(scope.spawn(move || tally_range(adj, dp, n, lo, hi)));
        }
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let mut total = 0u64;
    let mut sizes_sum = 0u64;
    let mut examined = 0u64;
    let mut per_vertex = vec![0u64; n];
    for (t, s, e, pv) in parts {
        total += t;
        sizes_sum += s;
        examined += e;
        for (acc, x) in per_vertex.iter_mut().zip(pv) {
            *acc += x;
        }
    }
    if let Some(d) = deadline {
        if Instant::now() > d {
            return Err(Error::BudgetExceeded {
                subsets_examined: examined,
            });
        }
    }

    let pv_sum: u64 = per_vertex.iter().sum();
    debug_assert_eq!(pv_sum, sizes_sum, "per-vertex tally disagrees with size tally");
    let trivial = 1 + n as u64 + (n as u64 * (n as u64 - 1)) / 2;
    debug_assert!(total <= (1u64 << n) - trivial);

    Ok(HamCount {
        n,
        m: g.m(),
        total,
        per_vertex,
        sizes_sum,
        subsets_examined: examined,
        elapsed: start.elapsed(),
    })
}

fn tally_range(adj: &[u32], dp: &[u32], n: usize, lo: usize, hi: usize) -> (u64, u64, u64, Vec<u64>) {
    let mut total = 0u64;
    let mut sizes_sum = 0u64;
    let mut examined = 0u64;
    let mut per_vertex = vec![0u64; n];
    for mask in lo..hi {
        if mask.count_ones() < 3 {
            continue;
        }
        examined += 1;
        let anchor = mask.trailing_zeros() as usize;
        if dp[mask] & adj[anchor] != 0 {
            total += 1;
            sizes_sum += u64::from((mask as u32).count_ones());
            let mut mb = mask as u32;
            while mb != 0 {
                let v = mb.trailing_zeros() as usize;
                mb &= mb - 1;
                per_vertex[v] += 1;
            }
        }
    }
    (total, sizes_sum, examined, per_vertex)
}

/// h(K_{d+1}) in closed form: 2^{d+1} - (d^2+3d+4)/2, equivalently the
/// number of vertex subsets of K_{d+1} of size at least 3.
pub fn closed_form_h_clique(d: u64) -> Result<u64> {
    if d < 2 {
        return Err(Error::InvalidFamily(format!(
            "closed_form_h_clique requires d >= 2, got {d}"
        )));
    }
    assert!(d <= 61);
    Ok((1u64 << (d + 1)) - (d * d + 3 * d + 4) / 2)
}

/// One isomorphism-signature class of minimizing graphs.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct MinimizerClass {
    pub n: usize,
    /// Sorted degree sequence.
    pub degrees: Vec<usize>,
    pub h: u64,
    /// Sorted per-vertex count multiset.
    pub per_vertex: Vec<u64>,
    /// Labeled graphs falling into this class.
    pub count: u64,
    /// graph6 of the first representative encountered.
    pub graph6: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct MinReport {
    pub n_max: usize,
    pub min_degree: usize,
    pub min_h: u64,
    pub minimizers: Vec<MinimizerClass>,
    /// Minimum h over graphs not isomorphic to K_{d+1}, if any qualify.
    pub min_h_excluding_clique: Option<u64>,
    pub graphs_examined: u64,
}

/// Exhaustive minimum of h over all labeled graphs on at most `n_max`
/// vertices with minimum degree at least `d`.
pub fn exhaustive_min_search(n_max: usize, d: usize) -> Result<MinReport> {
    if n_max > 7 {
        let pairs = n_max * (n_max - 1) / 2;
        return Err(Error::SearchTooLarge {
            requested: n_max,
            cost: format!("2^{pairs} at n={n_max}"),
        });
    }
    let mut min_h = u64::MAX;
    let mut min_h_other: Option<u64> = None;
    let mut minimizers: Vec<MinimizerClass> = Vec::new();
    let mut examined = 0u64;

    for n in 3..=n_max {
        if n < d + 1 {
            continue; // min degree d needs at least d+1 vertices
        }
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .collect();
        let nbits = pairs.len();
        let clique_mask: u64 = (1u64 << nbits) - 1;
        for edge_mask in 0u64..(1u64 << nbits) {
            let mut adj = vec![0u32; n];
            for (b, &(u, v)) in pairs.iter().enumerate() {
                if edge_mask >> b & 1 == 1 {
                    adj[u] |= 1 << v;
                    adj[v] |= 1 << u;
                }
            }
            if adj.iter().any(|r| (r.count_ones() as usize) < d) {
                continue;
            }
            examined += 1;
            let (h, per_vertex) = count_by_masks(&adj, n);
            let is_kd1 = n == d + 1 && edge_mask == clique_mask;
            if !is_kd1 {
                min_h_other = Some(min_h_other.map_or(h, |x| x.min(h)));
            }
            if h > min_h {
                continue;
            }
            if h < min_h {
                min_h = h;
                minimizers.clear();
            }
            let mut degrees: Vec<usize> = adj.iter().map(|r| r.count_ones() as usize).collect();
            degrees.sort_unstable();
            let mut pv = per_vertex.clone();
            pv.sort_unstable();
            match minimizers
                .iter_mut()
                .find(|c| c.n == n && c.degrees == degrees && c.per_vertex == pv)
            {
                Some(c) => c.count += 1,
                None => {
                    let edges: Vec<(usize, usize)> = pairs
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| edge_mask >> b & 1 == 1)
                        .map(|(_, &e)| e)
                        .collect();
                    let g = Graph::from_edges(n, &edges)?;
                    minimizers.push(MinimizerClass {
                        n,
                        degrees,
                        h,
                        per_vertex: pv,
                        count: 1,
                        graph6: crate::graph6::encode(&g),
                    });
                }
            }
        }
    }
    Ok(MinReport {
        n_max,
        min_degree: d,
        min_h,
        minimizers,
        min_h_excluding_clique: min_h_other,
        graphs_examined: examined,
    })
}

/// Stack-allocated counting for the census inner loop (n <= 7).
fn count_by_masks(adj: &[u32], n: usize) -> (u64, Vec<u64>) {
    let size = 1usize << n;
    let mut dp = [0u32; 128];
    debug_assert!(size <= dp.len());
    for v in 0..n {
        dp[1 << v] = 1 << v;
    }
    for mask in 1..size {
        let ends = dp[mask];
        if ends == 0 {
            continue;
        }
        let anchor = mask.trailing_zeros();
        let above = !((1u32 << anchor) - 1) & !(1u32 << anchor);
        let mut eb = ends;
        while eb != 0 {
            let e = eb.trailing_zeros() as usize;
            eb &= eb - 1;
            let mut ext = adj[e] & !(mask as u32) & above;
            while ext != 0 {
                let v = ext.trailing_zeros() as usize;
                ext &= ext - 1;
                dp[mask | (1 << v)] |= 1 << v;
            }
        }
    }
    let mut total = 0u64;
    let mut per_vertex = vec![0u64; n];
    for mask in 0..size {
        if mask.count_ones() < 3 {
            continue;
        }
        let anchor = mask.trailing_zeros() as usize;
        if dp[mask] & adj[anchor] != 0 {
            total += 1;
            let mut mb = mask as u32;
            while mb != 0 {
                let v = mb.trailing_zeros() as usize;
                mb &= mb - 1;
                per_vertex[v] += 1;
            }
        }
    }
    (total, per_vertex)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{self, Family};
    use crate::graph::VertexSet;
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn count(g: &Graph) -> HamCount {
        count_hamiltonian_subsets(g, &CountBudget::default()).unwrap()
    }

    #[test]
    fn is_hamiltonian_examples() {
        assert!(is_hamiltonian(&gen::generate(&Family::Complete(4), 0).unwrap()));
        assert!(!is_hamiltonian(
            &gen::generate(&Family::CompleteBipartite(1, 3), 0).unwrap()
        ));
        assert!(!is_hamiltonian(&gen::petersen()));
        assert!(!oracle::is_hamiltonian_backtracking(&gen::petersen()));
        assert!(!is_hamiltonian(&gen::generate(&Family::Path(2), 0).unwrap()));
    }

    #[test]
    fn count_examples() {
        assert_eq!(count(&gen::generate(&Family::Complete(4), 0).unwrap()).total, 5);
        assert_eq!(
            count(&gen::generate(&Family::CompleteBipartite(3, 3), 0).unwrap()).total,
            10
        );
        // K_6 minus a perfect matching: 2^6 - 16 - 14 - 4 = 30
        assert_eq!(
            count(&gen::generate(&Family::CompleteMinusMatching(6), 0).unwrap()).total,
            30
        );
        // trees are acyclic
        assert_eq!(count(&gen::generate(&Family::Path(7), 0).unwrap()).total, 0);
        let star = gen::generate(&Family::CompleteBipartite(1, 5), 0).unwrap();
        assert_eq!(count(&star).total, 0);
        // cut vertex forces each Hamiltonian subset inside one K_4
        let gstar = gen::generate(&Family::CliqueStar { d: 3, copies: 2 }, 0).unwrap();
        assert_eq!(count(&gstar).total, 10);
    }

    #[test]
    fn count_rejects_over_cap() {
        let g = Graph::empty(19);
        match count_hamiltonian_subsets(&g, &CountBudget::default()) {
            Err(Error::CapExceeded { n: 19, cap: 18 }) => {}
            other => panic!("unexpected: {other:?}"),
        }
        // explicit override admits it
        let b = CountBudget {
            cap_n: 19,
            ..CountBudget::default()
        };
        assert_eq!(count_hamiltonian_subsets(&g, &b).unwrap().total, 0);
    }

    #[test]
    fn budget_exceeded_is_an_error() {
        let g = gen::generate(&Family::Complete(16), 0).unwrap();
        let b = CountBudget {
            time_limit: Some(Duration::ZERO),
            ..CountBudget::default()
        };
        match count_hamiltonian_subsets(&g, &b) {
            Err(Error::BudgetExceeded { .. }) => {}
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_h_clique(2).unwrap(), 1);
        assert_eq!(closed_form_h_clique(3).unwrap(), 5);
        // C(5,3)+C(5,4)+C(5,5) = 10+5+1
        assert_eq!(closed_form_h_clique(4).unwrap(), 16);
        assert!(closed_form_h_clique(1).is_err());
    }

    #[test]
    fn closed_form_matches_count_small() {
        for d in 2..=8u64 {
            let g = gen::generate(&Family::Complete(d as usize + 1), 0).unwrap();
            assert_eq!(count(&g).total, closed_form_h_clique(d).unwrap(), "d={d}");
        }
    }

    #[test]
    fn oracle_equivalence_small_orders() {
        // all graphs on n <= 4, plus a seeded corpus at n in 5..=8
        for n in 1..=4usize {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                .collect();
            for mask in 0u64..(1 << pairs.len()) {
                let edges: Vec<_> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let g = Graph::from_edges(n, &edges).unwrap();
                assert_eq!(is_hamiltonian(&g), oracle::is_hamiltonian_backtracking(&g));
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..300 {
            let n = rng.gen_range(5..=8);
            let p = rng.gen_range(0.2..0.9);
            let g = gen::generate(&Family::Gnp { n, p }, rng.gen()).unwrap();
            assert_eq!(is_hamiltonian(&g), oracle::is_hamiltonian_backtracking(&g));
        }
    }

    #[test]
    fn count_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..40 {
            let n = rng.gen_range(4..=9);
            let p = rng.gen_range(0.3..0.9);
            let g = gen::generate(&Family::Gnp { n, p }, rng.gen()).unwrap();
            let fast = count(&g);
            let (naive_total, naive_pv) = oracle::count_hamiltonian_subsets_naive(&g);
            assert_eq!(fast.total, naive_total);
            assert_eq!(fast.per_vertex, naive_pv);
        }
    }

    #[test]
    fn monotone_under_induced_subgraphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.gen_range(4..=12);
            let p = rng.gen_range(0.2..0.9);
            let g = gen::generate(&Family::Gnp { n, p }, rng.gen()).unwrap();
            let k = rng.gen_range(1..=n);
            let mut verts: Vec<usize> = (0..n).collect();
            use rand::seq::SliceRandom;
            verts.shuffle(&mut rng);
            let s = VertexSet::from_iter(n, verts.into_iter().take(k));
            let sub = g.induced(&s).unwrap();
            assert!(count(&g).total >= count(&sub).total);
        }
    }

    #[test]
    fn disjoint_union_additivity() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..30 {
            let a = gen::generate(
                &Family::Gnp {
                    n: rng.gen_range(3..=8),
                    p: rng.gen_range(0.3..0.9),
                },
                rng.gen(),
            )
            .unwrap();
            let b = gen::generate(
                &Family::Gnp {
                    n: rng.gen_range(3..=8),
                    p: rng.gen_range(0.3..0.9),
                },
                rng.gen(),
            )
            .unwrap();
            let u = a.disjoint_union(&b);
            assert_eq!(count(&u).total, count(&a).total + count(&b).total);
        }
    }

    #[test]
    fn per_vertex_consistency() {
        let g = gen::petersen();
        let c = count(&g);
        assert_eq!(c.per_vertex.iter().sum::<u64>(), c.sizes_sum);
        // vertex-transitive graph: all per-vertex counts equal
        assert!(c.per_vertex.windows(2).all(|w| w[0] == w[1]));
    }

    #[test]
    fn threaded_tally_matches_sequential() {
        let g = gen::generate(&Family::Gnp { n: 13, p: 0.5 }, 42).unwrap();
        let seq = count(&g);
        let par = count_hamiltonian_subsets(
            &g,
            &CountBudget {
                threads: 4,
                ..CountBudget::default()
            },
        )
        .unwrap();
        assert_eq!(seq.total, par.total);
        assert_eq!(seq.per_vertex, par.per_vertex);
    }

    #[test]
    fn census_examples() {
        let r = exhaustive_min_search(5, 3).unwrap();
        assert_eq!(r.min_h, 5);
        assert!(r
            .minimizers
            .iter()
            .all(|c| c.n == 4 && c.degrees == vec![3, 3, 3, 3]));

        let r = exhaustive_min_search(5, 2).unwrap();
        assert_eq!(r.min_h, 1);
        // the only graphs with h = 1 and min degree 2 are cycles
        assert!(r.minimizers.iter().all(|c| c.degrees.iter().all(|&d| d == 2)));
        let ns: std::collections::BTreeSet<usize> = r.minimizers.iter().map(|c| c.n).collect();
        assert_eq!(ns, [3, 4, 5].into_iter().collect());

        assert!(exhaustive_min_search(8, 3).is_err());
    }
}
