//! Exact crux computation and the crux inequalities.
//!
//! The crux value c_alpha(G) is the minimum order of a subgraph with
//! average degree at least alpha * d(G). Only induced subgraphs are
//! searched: adding edges on a fixed vertex set only raises density, so
//! the minimum order is always attained by an induced subgraph.

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::spectral::{self, SpectralInfo};
use crate::Rational;
use serde::Serialize;

/// Order bound for the exhaustive branch-and-bound search.
pub const CRUX_EXHAUSTIVE_MAX_N: usize = 24;

#[derive(Clone, Debug, Serialize)]
pub struct CruxCertificate {
    #[serde(with = "crate::report::rational_serde")]
    pub alpha: Rational,
    /// c_alpha(G), or (refuted sizes + 1) when not exhaustive.
    pub value: usize,
    #[serde(serialize_with = "crate::report::serialize_opt_vertex_set")]
    pub witness: Option<VertexSet>,
    /// True iff every size below `value` was refuted.
    pub exhaustive: bool,
}

fn validate_alpha(alpha: Rational) -> Result<()> {
    if *alpha.numer() == 0 || alpha >= Rational::from_integer(1) {
        return Err(Error::BadAlpha(alpha.to_string()));
    }
    Ok(())
}

/// Number of edges induced by `s`, counted by bit-row intersection.
pub fn induced_edge_count(g: &Graph, s: &VertexSet) -> usize {
    let mut twice = 0usize;
    for u in s.iter() {
        twice += s.count_row_hits(g.row(u));
    }
    twice / 2
}

/// Smallest k-subset edge threshold: e(H) * n * q >= p * m * k with
/// alpha = p/q is the exact form of d(H) >= alpha * d(G).
fn edge_threshold(g: &Graph, alpha: Rational, k: usize) -> u128 {
    let p = *alpha.numer() as u128;
    let q = *alpha.denom() as u128;
    let num = p * g.m() as u128 * k as u128;
    let den = g.n() as u128 * q;
    num.div_ceil(den)
}

/// Exact c_alpha(G) by ascending-size search with branch-and-bound.
///
/// Sizes above `cap` are not searched; if no crux is found by then the
/// certificate records the refutation as a lower bound.
pub fn crux_exact(g: &Graph, alpha: Rational, cap: usize) -> Result<CruxCertificate> {
    validate_alpha(alpha)?;
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n > CRUX_EXHAUSTIVE_MAX_N {
        return Err(Error::CapExceeded {
            n,
            cap: CRUX_EXHAUSTIVE_MAX_N,
        });
    }
    let degrees: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    for k in 1..=cap.min(n) {
        let threshold = edge_threshold(g, alpha, k);
        let mut chosen = Vec::with_capacity(k);
        if let Some(witness) = search_k(g, &degrees, k, threshold, 0, 0, &mut chosen) {
            let w = VertexSet::from_iter(n, witness);
            let cert = CruxCertificate {
                alpha,
                value: k,
                witness: Some(w),
                exhaustive: true,
            };
            debug_assert!(verify_witness(g, &cert));
            return Ok(cert);
        }
    }
    if cap >= n {
        unreachable!("the whole graph is always an alpha-crux for alpha < 1");
    }
    Ok(CruxCertificate {
        alpha,
        value: cap + 1,
        witness: None,
        exhaustive: false,
    })
}

/// Lexicographic DFS for a k-subset inducing at least `threshold`
/// edges. Bound: total edges of any completion is at most half the
/// degree sum of its vertices.
fn search_k(
    g: &Graph,
    degrees: &[usize],
    k: usize,
    threshold: u128,
    start: usize,
    cur_edges: usize,
    chosen: &mut Vec<usize>,
) -> Option<Vec<usize>> {
    if chosen.len() == k {
        return (cur_edges as u128 >= threshold).then(|| chosen.clone());
    }
    let need = k - chosen.len();
    let n = g.n();
    if n - start < need {
        return None;
    }
    // admissible prune: best possible degree sum over any completion
    let mut cand_degs: Vec<usize> = (start..n).map(|v| degrees[v]).collect();
    cand_degs.sort_unstable_by(|a, b| b.cmp(a));
    let chosen_deg: usize = chosen.iter().map(|&v| degrees[v]).sum();
    let top: usize = cand_degs[..need].iter().sum();
    if ((chosen_deg + top) / 2) < threshold as usize {
        return None;
    }
    for v in start..=(n - need) {
        let added = chosen.iter().filter(|&&u| g.has_edge(u, v)).count();
        chosen.push(v);
        if let Some(hit) = search_k(g, degrees, k, threshold, v + 1, cur_edges + added, chosen) {
            return Some(hit);
        }
        chosen.pop();
    }
    None
}

/// Exact rational check of the witness density condition.
pub fn verify_witness(g: &Graph, cert: &CruxCertificate) -> bool {
    match &cert.witness {
        None => !cert.exhaustive,
        Some(w) => {
            if w.len() != cert.value {
                return false;
            }
            let e = induced_edge_count(g, w) as u128;
            e >= edge_threshold(g, cert.alpha, cert.value)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ScalingReport {
    pub c_alpha: usize,
    pub c_alpha_prime: usize,
    /// ceil((alpha/alpha') * (c_{alpha'} - 1) + 1)
    pub scaling_rhs: usize,
    pub scaling_holds: bool,
    /// ceil(alpha * (n-1) + 1)
    pub corollary_rhs: usize,
    pub corollary_holds: bool,
}

/// Checks c_alpha <= ceil((alpha/alpha')(c_alpha' - 1) + 1) and the
/// corollary c_alpha <= ceil(alpha (n-1) + 1), both computed exactly.
pub fn check_crux_scaling(g: &Graph, alpha: Rational, alpha_prime: Rational) -> Result<ScalingReport> {
    validate_alpha(alpha)?;
    validate_alpha(alpha_prime)?;
    if alpha >= alpha_prime {
        return Err(Error::BadAlpha(format!(
            "scaling check requires alpha < alpha', got {alpha} >= {alpha_prime}"
        )));
    }
    let n = g.n();
    let c_a = crux_exact(g, alpha, n)?.value;
    let c_ap = crux_exact(g, alpha_prime, n)?.value;

    // ceil((p*q')(c'-1) / (q*p')) + 1
    let num = *alpha.numer() as u128 * *alpha_prime.denom() as u128 * (c_ap as u128 - 1);
    let den = *alpha.denom() as u128 * *alpha_prime.numer() as u128;
    let scaling_rhs = (num.div_ceil(den) + 1) as usize;

    let cnum = *alpha.numer() as u128 * (n as u128 - 1);
    let corollary_rhs = (cnum.div_ceil(*alpha.denom() as u128) + 1) as usize;

    Ok(ScalingReport {
        c_alpha: c_a,
        c_alpha_prime: c_ap,
        scaling_rhs,
        scaling_holds: c_a <= scaling_rhs,
        corollary_rhs,
        corollary_holds: c_a <= corollary_rhs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct NdlCruxReport {
    pub applicable: bool,
    pub spectral: SpectralInfo,
    pub crux: Option<usize>,
    /// (1 - eps) * alpha * n
    pub lower_bound: f64,
    pub holds: Option<bool>,
}

/// Checks c_alpha(G) > (1-eps) * alpha * n for regular graphs with
/// lambda/d < eps*alpha. When the spectral precondition fails the
/// report is marked not-applicable rather than failed.
pub fn check_crux_lower_ndl(g: &Graph, alpha: Rational, eps: f64) -> Result<NdlCruxReport> {
    validate_alpha(alpha)?;
    let info = spectral::second_eigenvalue(g, 1e-9)?;
    let a = *alpha.numer() as f64 / *alpha.denom() as f64;
    let lower_bound = (1.0 - eps) * a * g.n() as f64;
    if info.lambda / info.d as f64 >= eps * a {
        return Ok(NdlCruxReport {
            applicable: false,
            spectral: info,
            crux: None,
            lower_bound,
            holds: None,
        });
    }
    let c = crux_exact(g, alpha, g.n())?.value;
    Ok(NdlCruxReport {
        applicable: true,
        spectral: info,
        crux: Some(c),
        lower_bound,
        holds: Some(c as f64 > lower_bound),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{self, Family};
    use crate::oracle;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(p: u64, q: u64) -> Rational {
        Rational::new(p, q)
    }

    #[test]
    fn crux_examples() {
        // sharp for complete graphs: H = K_{alpha d + 1}
        let k11 = gen::generate(&Family::Complete(11), 0).unwrap();
        let c = crux_exact(&k11, r(1, 5), 11).unwrap();
        assert_eq!(c.value, 3);
        assert!(c.exhaustive);
        assert!(verify_witness(&k11, &c));

        let c8 = gen::generate(&Family::Cycle(8), 0).unwrap();
        assert_eq!(crux_exact(&c8, r(1, 5), 8).unwrap().value, 2);

        let q3 = gen::generate(&Family::Hypercube(3), 0).unwrap();
        let c = crux_exact(&q3, r(1, 2), 8).unwrap();
        assert_eq!(c.value, 4);
    }

    #[test]
    fn crux_cap_gives_lower_bound_certificate() {
        let k11 = gen::generate(&Family::Complete(11), 0).unwrap();
        let c = crux_exact(&k11, r(1, 2), 3).unwrap();
        assert!(!c.exhaustive);
        assert_eq!(c.value, 4); // sizes 1..=3 refuted
        assert!(c.witness.is_none());
        // the true value is 6 (K_6 has average degree 5 = 10/2)
        assert_eq!(crux_exact(&k11, r(1, 2), 11).unwrap().value, 6);
    }

    #[test]
    fn crux_matches_naive_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.gen_range(4..=10);
            let p = rng.gen_range(0.2..0.9);
            let g = gen::generate(&Family::Gnp { n, p }, rng.gen()).unwrap();
            if g.m() == 0 {
                continue;
            }
            for alpha in [r(1, 5), r(1, 2), r(4, 5)] {
                let fast = crux_exact(&g, alpha, n).unwrap();
                let (naive, _) = oracle::crux_naive(&g, alpha);
                assert_eq!(fast.value, naive, "n={n} alpha={alpha}");
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let k11 = gen::generate(&Family::Complete(11), 0).unwrap();
        let rep = check_crux_scaling(&k11, r(1, 5), r(1, 2)).unwrap();
        assert_eq!(rep.c_alpha, 3);
        assert_eq!(rep.c_alpha_prime, 6);
        assert_eq!(rep.scaling_rhs, 3); // ceil((2/5)*5) + 1
        assert!(rep.scaling_holds);
        assert!(rep.corollary_holds);

        let c8 = gen::generate(&Family::Cycle(8), 0).unwrap();
        let rep = check_crux_scaling(&c8, r(1, 5), r(1, 2)).unwrap();
        assert_eq!(rep.c_alpha, 2);
        assert_eq!(rep.c_alpha_prime, 2);
        assert_eq!(rep.scaling_rhs, 2);
        assert!(rep.scaling_holds);

        let g = gen::generate(&Family::Gnp { n: 12, p: 0.5 }, 7).unwrap();
        let rep = check_crux_scaling(&g, r(1, 4), r(1, 2)).unwrap();
        assert!(rep.scaling_holds);
        assert!(rep.corollary_holds);
    }

    #[test]
    fn crux_monotone_in_alpha() {
        // exhaustive over all graphs on n <= 6, sampled at n = 7
        for n in 2..=6usize {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                .collect();
            for mask in 1u64..(1 << pairs.len()) {
                let edges: Vec<_> = pairs
                    .iter()
                    .enumerate()
                    .filter(|(b, _)| mask >> b & 1 == 1)
                    .map(|(_, &e)| e)
                    .collect();
                let g = Graph::from_edges(n, &edges).unwrap();
                assert_monotone(&g);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..500 {
            let g = gen::generate(
                &Family::Gnp {
                    n: 7,
                    p: rng.gen_range(0.1..0.95),
                },
                rng.gen(),
            )
            .unwrap();
            if g.m() > 0 {
                assert_monotone(&g);
            }
        }
    }

    fn assert_monotone(g: &Graph) {
        let n = g.n();
        let c15 = crux_exact(g, r(1, 5), n).unwrap().value;
        let c12 = crux_exact(g, r(1, 2), n).unwrap().value;
        let c45 = crux_exact(g, r(4, 5), n).unwrap().value;
        assert!(c15 <= c12 && c12 <= c45);
    }

    #[test]
    fn ndl_lower_bound_examples() {
        // K_12: lambda = 1, d = 11, lambda/d < 0.2 * 0.5
        let k12 = gen::generate(&Family::Complete(12), 0).unwrap();
        let rep = check_crux_lower_ndl(&k12, r(1, 2), 0.2).unwrap();
        assert!(rep.applicable);
        assert_eq!(rep.crux, Some(7)); // K_7 has average degree 6 >= 5.5
        assert_eq!(rep.holds, Some(true));

        // Petersen: lambda/d = 2/3 >= 0.5 * 0.5 -> not applicable
        let rep = check_crux_lower_ndl(&gen::petersen(), r(1, 2), 0.5).unwrap();
        assert!(!rep.applicable);
        assert!(rep.holds.is_none());

        // Q_4: lambda/d = 1 -> never applicable; evaluated per eigensolver
        let q4 = gen::generate(&Family::Hypercube(4), 0).unwrap();
        let rep = check_crux_lower_ndl(&q4, r(1, 4), 0.9).unwrap();
        assert!(!rep.applicable);
    }

    #[test]
    fn bad_alpha_rejected() {
        let k4 = gen::generate(&Family::Complete(4), 0).unwrap();
        assert!(crux_exact(&k4, Rational::from_integer(1), 4).is_err());
        assert!(crux_exact(&k4, Rational::new(0, 1), 4).is_err());
    }
}
