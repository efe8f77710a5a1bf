//! Beta-graphs: every pair of disjoint vertex sets of size above
//! beta*n is joined by an edge. Checking, DFS-based long cycles in
//! subsets, and the counting lower bounds that follow.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::expander::CertLevel;
use crate::graph::{Graph, VertexSet};
use crate::hamcount;
use crate::spectral::SpectralInfo;
use crate::Rational;
use num::BigUint;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const BETA_EXHAUSTIVE_MAX_N: usize = 22;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct BetaParams {
    #[serde(with = "crate::report::rational_serde")]
    pub beta: Rational,
    /// Ambient order the thresholds refer to.
    pub n: usize,
}

impl BetaParams {
    pub fn new(beta: Rational, n: usize) -> Result<BetaParams> {
        if beta <= Rational::from_integer(0) || beta >= Rational::from_integer(1) {
            return Err(Error::BadBeta(beta.to_string()));
        }
        Ok(BetaParams { beta, n })
    }

    /// Smallest integer strictly above beta*n.
    pub fn threshold(&self) -> usize {
        (self.n as u64 * self.beta.numer() / self.beta.denom()) as usize + 1
    }

    fn floor_multiple(&self, factor: u64) -> usize {
        (factor * self.n as u64 * self.beta.numer() / self.beta.denom()) as usize
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaReport {
    pub params: BetaParams,
    /// Set size actually checked (threshold; supersets follow by
    /// monotonicity).
    pub s: usize,
    pub level: CertLevel,
    pub violating: Option<(Vec<usize>, Vec<usize>)>,
    pub holds: bool,
}

/// A size-s set A admits a disjoint unjoined partner iff the vertices
/// outside A and N(A) number at least s.
fn violating_partner(g: &Graph, a: &VertexSet, s: usize) -> Option<Vec<usize>> {
    let mut cover = a.neighborhood(g);
    cover.union_with(a);
    let rest = cover.complement();
    if rest.len() >= s {
        Some(rest.iter().take(s).collect())
    } else {
        None
    }
}

/// Certify the beta-graph property. Exhaustive mode enumerates every
/// set of the threshold size; probed mode samples random sets and
/// BFS-ball sets. A found pair is data, not an error.
pub fn check_beta_graph(g: &Graph, p: &BetaParams, level: CertLevel) -> Result<BetaReport> {
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if p.n != n {
        return Err(Error::Invariant(format!(
            "params carry ambient order {} but the graph has {}",
            p.n, n
        )));
    }
    let s = p.threshold();
    let violating = if 2 * s > n {
        None // two disjoint sets of size s do not fit
    } else {
        match level {
            CertLevel::Exhaustive => {
                assert!(
                    n <= BETA_EXHAUSTIVE_MAX_N,
                    "exhaustive beta check capped at n = {BETA_EXHAUSTIVE_MAX_N}"
                );
                let mut found = None;
                for mask in 1u64..(1 << n) {
                    if mask.count_ones() as usize != s {
                        continue;
                    }
                    let a = VertexSet::from_mask(n, mask);
                    if let Some(b) = violating_partner(g, &a, s) {
                        found = Some((a.to_sorted_vec(), b));
                        break;
                    }
                }
                found
            }
            CertLevel::Probed { probes, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut found = None;
                for probe in 0..probes {
                    let a = if probe % 2 == 0 {
                        let mut perm: Vec<usize> = (0..n).collect();
                        perm.shuffle(&mut rng);
                        VertexSet::from_iter(n, perm[..s].iter().copied())
                    } else {
                        // BFS balls are the adversarial shape: their
                        // neighborhoods are as small as the graph allows
                        let c = rng.gen_range(0..n);
                        let mut order = vec![c];
                        let mut seen = VertexSet::empty(n);
                        seen.insert(c);
                        let mut head = 0;
                        while head < order.len() && order.len() < s {
                            let u = order[head];
                            head += 1;
                            for v in g.neighbors(u) {
                                if !seen.contains(v) {
                                    seen.insert(v);
                                    order.push(v);
                                }
                            }
                        }
                        if order.len() < s {
                            continue;
                        }
                        VertexSet::from_iter(n, order[..s].iter().copied())
                    };
                    if let Some(b) = violating_partner(g, &a, s) {
                        found = Some((a.to_sorted_vec(), b));
                        break;
                    }
                }
                found
            }
        }
    };
    Ok(BetaReport {
        params: *p,
        s,
        level,
        holds: violating.is_none(),
        violating,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleMode {
    /// Requires |S| > 4*beta*n and promises the (c-4*beta)n bound.
    Guaranteed,
    /// Requires only |S| > 3*beta*n; the stronger (c-3*beta)n bound is
    /// reported, not enforced.
    BestEffort,
}

#[derive(Clone, Debug, Serialize)]
pub struct LongCycleReport {
    pub cycle: Vec<usize>,
    pub achieved: usize,
    /// |S| - floor(4*beta*n), the constructive promise.
    pub guaranteed_bound: usize,
    /// |S| - floor(3*beta*n).
    pub stronger_bound: usize,
    pub meets_stronger: bool,
    pub longest_path: usize,
}

/// DFS long cycle in G[S]: the deepest stack moment yields a long
/// path; an edge between its two ends (which exists in a beta-graph
/// because the end windows exceed beta*n) closes it. A disjoint
/// unjoined U/X pair discovered mid-run is surfaced as a
/// counterexample.
pub fn long_cycle_in_subset(
    g: &Graph,
    s: &VertexSet,
    p: &BetaParams,
    mode: CycleMode,
) -> Result<LongCycleReport> {
    let n = g.n();
    if p.n != n {
        return Err(Error::Invariant(format!(
            "params carry ambient order {} but the graph has {}",
            p.n, n
        )));
    }
    if s.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    let t = p.threshold();
    let factor = match mode {
        CycleMode::Guaranteed => 4,
        CycleMode::BestEffort => 3,
    };
    let size = s.len();
    if (size as u64) * p.beta.denom() <= factor * p.beta.numer() * n as u64 {
        return Err(Error::SubsetTooSmall {
            s: size,
            threshold: format!("{factor}*beta*n = {}", Rational::new(factor, 1) * p.beta * Rational::from_integer(n as u64)),
        });
    }
    if n <= BETA_EXHAUSTIVE_MAX_N {
        let rep = check_beta_graph(g, p, CertLevel::Exhaustive)?;
        if let Some((a, b)) = rep.violating {
            return Err(Error::NotBetaGraph { a, b });
        }
    }

    let mut u_set = s.clone();
    let mut x_set = VertexSet::empty(n);
    let mut stack: Vec<usize> = Vec::new();
    let mut best: Vec<usize> = Vec::new();
    while !u_set.is_empty() || !stack.is_empty() {
        if stack.is_empty() {
            let v = u_set.iter().next().unwrap();
            u_set.remove(v);
            stack.push(v);
        } else {
            let top = *stack.last().unwrap();
            if let Some(v) = g.neighbors(top).find(|&v| u_set.contains(v)) {
                u_set.remove(v);
                stack.push(v);
            } else {
                x_set.insert(stack.pop().unwrap());
                if x_set.len() >= t && u_set.len() >= t {
                    let a: Vec<usize> = x_set.iter().take(t).collect();
                    let b: Vec<usize> = u_set.iter().take(t).collect();
                    debug_assert!(
                        a.iter().all(|&x| b.iter().all(|&y| !g.has_edge(x, y))),
                        "DFS invariant: no U-X edge"
                    );
                    return Err(Error::NotBetaGraph { a, b });
                }
            }
        }
        if stack.len() > best.len() {
            best = stack.clone();
            debug_assert!(best.windows(2).all(|w| g.has_edge(w[0], w[1])), "stack is a path");
        }
    }

    // close the longest path with the chord maximizing the span
    let len = best.len();
    let mut chord: Option<(usize, usize)> = None;
    for i in 0..len {
        for j in (i + 2..len).rev() {
            if chord.map_or(false, |(ci, cj)| cj - ci >= j - i) {
                break;
            }
            if g.has_edge(best[i], best[j]) {
                chord = Some((i, j));
                break;
            }
        }
    }
    let guaranteed_bound = size.saturating_sub(p.floor_multiple(4));
    let stronger_bound = size.saturating_sub(p.floor_multiple(3));
    let (ci, cj) = match chord {
        Some(c) => c,
        None => {
            return Err(beta_window_failure(g, &best, t));
        }
    };
    let cycle: Vec<usize> = best[ci..=cj].to_vec();
    let achieved = cycle.len();
    for w in cycle.windows(2) {
        debug_assert!(g.has_edge(w[0], w[1]));
    }
    debug_assert!(cycle.iter().all(|&v| s.contains(v)));
    if mode == CycleMode::Guaranteed && achieved < guaranteed_bound {
        return Err(beta_window_failure(g, &best, t));
    }
    Ok(LongCycleReport {
        achieved,
        guaranteed_bound,
        stronger_bound,
        meets_stronger: achieved >= stronger_bound,
        longest_path: len,
        cycle,
    })
}

/// A too-short closing means the end windows of the longest path are
/// an unjoined pair; surface them.
fn beta_window_failure(g: &Graph, path: &[usize], t: usize) -> Error {
    let len = path.len();
    if len >= 2 * t {
        let a: Vec<usize> = path[..t].to_vec();
        let b: Vec<usize> = path[len - t..].to_vec();
        if a.iter().all(|&x| b.iter().all(|&y| !g.has_edge(x, y))) {
            return Error::NotBetaGraph { a, b };
        }
    }
    Error::Invariant(format!(
        "longest DFS path of {len} vertices admits no long chord"
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct BetaCountReport {
    pub params: BetaParams,
    /// binom(n, n/2) / binom((1/2+3*beta)n, 3*beta*n), exact integer
    /// arithmetic, floored, as a decimal string.
    pub bound_binomial: String,
    /// 2^floor((1/2-3*beta)n), only when beta < 1/6.
    pub bound_exponential: Option<String>,
    pub samples: usize,
    pub distinct_cycles: usize,
    /// Exact h(G) when the order permits counting.
    pub exact_h: Option<u64>,
    pub exact_meets_bound: Option<bool>,
}

fn binomial(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::from(0u32);
    }
    let mut acc = BigUint::from(1u32);
    for i in 0..k.min(n - k) {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// The two counting lower bounds for beta-graphs, evaluated exactly,
/// plus an empirical distinct-cycle sample from random half-size
/// subsets.
pub fn count_lower_bound_beta(
    g: &Graph,
    p: &BetaParams,
    samples: usize,
    seed: u64,
) -> Result<BetaCountReport> {
    let n = g.n();
    let level = if n <= BETA_EXHAUSTIVE_MAX_N {
        CertLevel::Exhaustive
    } else {
        CertLevel::Probed { probes: 200, seed }
    };
    let rep = check_beta_graph(g, p, level)?;
    if let Some((a, b)) = rep.violating {
        return Err(Error::NotBetaGraph { a, b });
    }

    let num = *p.beta.numer();
    let den = *p.beta.denom();
    // (1/2 + 3*beta) n and 3*beta*n, floored
    let q = ((n as u64 * (den + 6 * num)) / (2 * den)) as usize;
    let k = p.floor_multiple(3);
    let denom_binom = binomial(q, k);
    let bound_binomial = if denom_binom == BigUint::from(0u32) {
        BigUint::from(0u32)
    } else {
        binomial(n, n / 2) / &denom_binom
    };
    let bound_exponential = if 6 * num < den {
        let e = (n as u64 * (den - 6 * num)) / (2 * den);
        Some((BigUint::from(1u32) << e as usize).to_string())
    } else {
        None
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut distinct: BTreeSet<Vec<usize>> = BTreeSet::new();
    let half = n / 2;
    for _ in 0..samples {
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let s = VertexSet::from_iter(n, perm[..half].iter().copied());
        if let Ok(r) = long_cycle_in_subset(g, &s, p, CycleMode::BestEffort) {
            let mut key = r.cycle;
            key.sort_unstable();
            distinct.insert(key);
        }
    }

    let (exact_h, exact_meets_bound) = if n <= 16 {
        let count = hamcount::count_hamiltonian_subsets(g, &hamcount::CountBudget::default())?;
        let ok = BigUint::from(count.total) >= bound_binomial;
        (Some(count.total), Some(ok))
    } else {
        (None, None)
    };

    Ok(BetaCountReport {
        params: *p,
        bound_binomial: bound_binomial.to_string(),
        bound_exponential,
        samples,
        distinct_cycles: distinct.len(),
        exact_h,
        exact_meets_bound,
    })
}

/// An (n,d,lambda)-graph with d/lambda at least 1/beta^2 is a
/// beta-graph; the eigensolver tolerance is folded in against the
/// claim.
pub fn ndl_to_beta(info: &SpectralInfo, beta: Rational) -> bool {
    let b = *beta.numer() as f64 / *beta.denom() as f64;
    info.d as f64 * b * b >= info.lambda + info.tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{self, Family};
    use crate::oracle;
    use crate::spectral;

    fn beta(p: u64, q: u64, n: usize) -> BetaParams {
        BetaParams::new(Rational::new(p, q), n).unwrap()
    }

    #[test]
    fn params_validation_and_threshold() {
        assert!(BetaParams::new(Rational::new(1, 1), 5).is_err());
        assert!(BetaParams::new(Rational::new(0, 1), 5).is_err());
        // threshold is the smallest size strictly above beta*n
        assert_eq!(beta(1, 4, 12).threshold(), 4);
        assert_eq!(beta(1, 4, 13).threshold(), 4);
        assert_eq!(beta(3, 10, 10).threshold(), 4);
    }

    #[test]
    fn complete_graphs_are_beta_graphs() {
        for n in [5, 9, 14] {
            let g = gen::generate(&Family::Complete(n), 0).unwrap();
            let p = beta(1, n as u64, n);
            let rep = check_beta_graph(&g, &p, CertLevel::Exhaustive).unwrap();
            assert!(rep.holds, "K_{n}");
        }
    }

    #[test]
    fn c12_quarter_violated_by_antipodal_arcs() {
        let g = gen::generate(&Family::Cycle(12), 0).unwrap();
        let rep = check_beta_graph(&g, &beta(1, 4, 12), CertLevel::Exhaustive).unwrap();
        assert!(!rep.holds);
        let (a, b) = rep.violating.unwrap();
        assert_eq!(a.len(), 4);
        assert_eq!(b.len(), 4);
        assert!(a.iter().all(|&x| b.iter().all(|&y| !g.has_edge(x, y))));
    }

    #[test]
    fn petersen_exhaustive_verdict() {
        let rep = check_beta_graph(&gen::petersen(), &beta(3, 10, 10), CertLevel::Exhaustive).unwrap();
        assert_eq!(rep.s, 4);
        assert!(rep.holds);
    }

    #[test]
    fn exhaustive_agrees_with_naive_pair_checker() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let n = rng.gen_range(6..=11);
            let g = gen::generate(
                &Family::Gnp {
                    n,
                    p: rng.gen_range(0.2..0.9),
                },
                rng.gen(),
            )
            .unwrap();
            let p = beta(1, 5, n);
            let rep = check_beta_graph(&g, &p, CertLevel::Exhaustive).unwrap();
            let naive = oracle::beta_violating_pair_naive(&g, rep.s);
            assert_eq!(rep.holds, naive.is_none(), "n={n}");
            if let Some((a, b)) = rep.violating {
                assert!(a.iter().all(|&x| b.iter().all(|&y| !g.has_edge(x, y))));
            }
        }
    }

    #[test]
    fn probed_finds_the_cycle_violation() {
        let g = gen::generate(&Family::Cycle(40), 0).unwrap();
        let rep = check_beta_graph(
            &g,
            &beta(1, 8, 40),
            CertLevel::Probed {
                probes: 60,
                seed: 1,
            },
        )
        .unwrap();
        assert!(!rep.holds, "an arc of C_40 expands far too little");
    }

    #[test]
    fn clique_half_subset_hamilton_cycle() {
        let g = gen::generate(&Family::Complete(12), 0).unwrap();
        let p = beta(1, 12, 12);
        let s = VertexSet::from_iter(12, 0..6);
        let rep = long_cycle_in_subset(&g, &s, &p, CycleMode::Guaranteed).unwrap();
        assert_eq!(rep.achieved, 6, "DFS spans a clique subset fully");
        assert!(rep.meets_stronger);
        assert_eq!(rep.guaranteed_bound, 6 - 4);
    }

    #[test]
    fn gnp_subset_bounds_recorded() {
        let g = gen::generate(&Family::Gnp { n: 60, p: 0.8 }, 2).unwrap();
        let p = beta(1, 10, 60);
        let probe = check_beta_graph(
            &g,
            &p,
            CertLevel::Probed {
                probes: 100,
                seed: 2,
            },
        )
        .unwrap();
        assert!(probe.holds);
        let s = VertexSet::from_iter(60, 0..30);
        let rep = long_cycle_in_subset(&g, &s, &p, CycleMode::Guaranteed).unwrap();
        assert_eq!(rep.guaranteed_bound, 30 - 24);
        assert!(rep.achieved >= rep.guaranteed_bound);
        assert!(rep.achieved <= 30);
    }

    #[test]
    fn c20_surfaces_a_counterexample() {
        let g = gen::generate(&Family::Cycle(20), 0).unwrap();
        let p = beta(1, 20, 20);
        let s = VertexSet::full(20);
        match long_cycle_in_subset(&g, &s, &p, CycleMode::BestEffort) {
            Err(Error::NotBetaGraph { a, b }) => {
                assert!(a.iter().all(|&x| b.iter().all(|&y| !g.has_edge(x, y))));
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn midrun_counterexample_on_disjoint_cliques() {
        // n = 30 skips the exhaustive precheck; the DFS exhausts one
        // component with the other still untouched
        let k15 = gen::generate(&Family::Complete(15), 0).unwrap();
        let g = k15.disjoint_union(&k15);
        let p = beta(1, 10, 30);
        match long_cycle_in_subset(&g, &VertexSet::full(30), &p, CycleMode::Guaranteed) {
            Err(Error::NotBetaGraph { a, b }) => {
                assert!(a.iter().all(|&x| b.iter().all(|&y| !g.has_edge(x, y))));
            }
            other => panic!("expected a counterexample, got {other:?}"),
        }
    }

    #[test]
    fn guaranteed_mode_precondition() {
        let g = gen::generate(&Family::Complete(12), 0).unwrap();
        let p = beta(1, 6, 12);
        // |S| = 6 is not above 4*beta*n = 8
        let s = VertexSet::from_iter(12, 0..6);
        assert!(matches!(
            long_cycle_in_subset(&g, &s, &p, CycleMode::Guaranteed),
            Err(Error::SubsetTooSmall { s: 6, .. })
        ));
    }

    #[test]
    fn binomial_bound_example() {
        // n = 12, beta = 1/12: binom(12,6)/binom(9,3) = 924/84 = 11
        let g = gen::generate(&Family::Complete(12), 0).unwrap();
        let p = beta(1, 12, 12);
        let rep = count_lower_bound_beta(&g, &p, 5, 0).unwrap();
        assert_eq!(rep.bound_binomial, "11");
        assert_eq!(rep.exact_h, Some(hamcount::closed_form_h_clique(11).unwrap()));
        assert_eq!(rep.exact_meets_bound, Some(true));
        assert!(rep.distinct_cycles >= 1);
    }

    #[test]
    fn exponential_bound_degenerates_at_one_sixth() {
        let g = gen::generate(&Family::Complete(12), 0).unwrap();
        let rep = count_lower_bound_beta(&g, &beta(1, 6, 12), 0, 0).unwrap();
        assert_eq!(rep.bound_exponential, None);
        let rep = count_lower_bound_beta(&g, &beta(1, 12, 12), 0, 0).unwrap();
        // (1/2 - 3/12)*12 = 3
        assert_eq!(rep.bound_exponential.as_deref(), Some("8"));
    }

    #[test]
    fn non_beta_graph_rejected_with_counterexample() {
        let g = gen::generate(&Family::Cycle(12), 0).unwrap();
        assert!(matches!(
            count_lower_bound_beta(&g, &beta(1, 4, 12), 0, 0),
            Err(Error::NotBetaGraph { .. })
        ));
    }

    #[test]
    fn ndl_to_beta_arithmetic() {
        let info = spectral::second_eigenvalue(&gen::petersen(), 1e-9).unwrap();
        assert!(ndl_to_beta(&info, Rational::new(9, 10)));
        assert!(!ndl_to_beta(&info, Rational::new(1, 2)));
        let k10 = gen::generate(&Family::Complete(10), 0).unwrap();
        let info = spectral::second_eigenvalue(&k10, 1e-9).unwrap();
        assert!(ndl_to_beta(&info, Rational::new(1, 2)));
    }

    #[test]
    fn ndl_implies_beta_graph_exhaustively() {
        // implication chain on small regular graphs
        let mut graphs = vec![gen::petersen()];
        for n in [8usize, 10, 12, 14] {
            graphs.push(gen::generate(&Family::Complete(n), 0).unwrap());
            graphs.push(gen::generate(&Family::Hypercube(4), 0).unwrap());
            graphs.push(gen::generate(&Family::RandomRegular { n, d: 5 }, n as u64).unwrap());
        }
        let betas = [
            Rational::new(1, 2),
            Rational::new(2, 5),
            Rational::new(3, 10),
            Rational::new(1, 4),
        ];
        for g in &graphs {
            let info = match spectral::second_eigenvalue(g, 1e-9) {
                Ok(i) => i,
                Err(_) => continue,
            };
            for &b in &betas {
                if ndl_to_beta(&info, b) {
                    let p = BetaParams::new(b, g.n()).unwrap();
                    let rep = check_beta_graph(g, &p, CertLevel::Exhaustive).unwrap();
                    assert!(
                        rep.holds,
                        "n={} d={} lambda={} beta={}",
                        info.n, info.d, info.lambda, b
                    );
                }
            }
        }
    }

    #[test]
    fn binomial_helper() {
        assert_eq!(binomial(12, 6), BigUint::from(924u32));
        assert_eq!(binomial(9, 3), BigUint::from(84u32));
        assert_eq!(binomial(5, 7), BigUint::from(0u32));
        assert_eq!(binomial(40, 20).to_string(), "137846528820");
    }
}
