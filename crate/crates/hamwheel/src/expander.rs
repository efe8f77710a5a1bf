//! Sublinear-expander machinery: the piecewise expansion function,
//! expansion certification, expander-subgraph extraction by
//! violating-cut descent, degree peeling, robust ball finding and
//! short avoiding paths.

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::Rational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Largest order for exhaustive subset certification.
pub const EXHAUSTIVE_MAX_N: usize = 22;

/// The expansion function: 0 below k/5, eps1 / ln^2(15x/k) from k/5 on.
pub fn eps(x: f64, eps1: f64, k: usize) -> f64 {
    if x < k as f64 / 5.0 {
        0.0
    } else {
        let l = (15.0 * x / k as f64).ln();
        eps1 / (l * l)
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ExpanderParams {
    pub eps1: f64,
    pub k: usize,
    /// The C of delta = C * eps1 / ln 3.
    pub c: f64,
}

impl ExpanderParams {
    pub fn new(eps1: f64, k: usize, c: f64) -> Result<ExpanderParams> {
        if !(eps1 > 0.0 && eps1 < 1.0) {
            return Err(Error::BadExpanderParams(format!("eps1 = {eps1} not in (0,1)")));
        }
        if k == 0 {
            return Err(Error::BadExpanderParams("k must be positive".into()));
        }
        if c <= 0.0 {
            return Err(Error::BadExpanderParams(format!("C = {c} must be positive")));
        }
        let p = ExpanderParams { eps1, k, c };
        if p.delta() >= 1.0 {
            return Err(Error::BadExpanderParams(format!(
                "delta = C*eps1/ln3 = {} must be below 1",
                p.delta()
            )));
        }
        Ok(p)
    }

    /// C = 30 ln 3 and eps1 = 1/(10C), k = 15.
    pub fn strict() -> ExpanderParams {
        let c = 30.0 * 3.0f64.ln();
        ExpanderParams {
            eps1: 1.0 / (10.0 * c),
            k: 15,
            c,
        }
    }

    /// delta = C * eps1 / ln 3.
    pub fn delta(&self) -> f64 {
        self.c * self.eps1 / 3.0f64.ln()
    }

    pub fn eps_at(&self, x: f64) -> f64 {
        eps(x, self.eps1, self.k)
    }
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum CertLevel {
    Exhaustive,
    Probed { probes: usize, seed: u64 },
}

/// Outcome of expansion certification. A present `violating` set means
/// certification failed; a probed pass only means "unfalsified".
#[derive(Clone, Debug, Serialize)]
pub struct ExpanderCertificate {
    pub params: ExpanderParams,
    pub level: CertLevel,
    #[serde(serialize_with = "crate::report::serialize_opt_vertex_set")]
    pub violating: Option<VertexSet>,
}

impl ExpanderCertificate {
    pub fn certified(&self) -> bool {
        self.violating.is_none()
    }
}

/// The window of set sizes the expansion requirement quantifies over.
pub fn size_window(n: usize, k: usize) -> (usize, usize) {
    (k.div_ceil(2), n / 2)
}

/// Whether `x` (of size `xs` with external neighborhood `nb`) violates
/// the expansion requirement.
fn violates(params: &ExpanderParams, xs: usize, nb: usize) -> bool {
    (nb as f64) < params.eps_at(xs as f64) * xs as f64
}

/// Certify the (eps1,k)-expansion property of `g`.
///
/// Exhaustive mode iterates every subset in the size window (first
/// violation in ascending mask order wins); probed mode runs randomized
/// shrink probes plus BFS-ball prefix cuts. Failure is data, not error.
pub fn verify_expander(g: &Graph, params: &ExpanderParams, level: CertLevel) -> ExpanderCertificate {
    let violating = match level {
        CertLevel::Exhaustive => {
            assert!(
                g.n() <= EXHAUSTIVE_MAX_N,
                "exhaustive certification capped at n = {EXHAUSTIVE_MAX_N}"
            );
            exhaustive_violation(g, params)
        }
        CertLevel::Probed { probes, seed } => probed_violation(g, params, probes, seed),
    };
    ExpanderCertificate {
        params: *params,
        level,
        violating,
    }
}

fn exhaustive_violation(g: &Graph, params: &ExpanderParams) -> Option<VertexSet> {
    let n = g.n();
    let (lo, hi) = size_window(n, params.k);
    if lo > hi {
        return None; // empty quantifier window
    }
    let rows: Vec<u64> = (0..n).map(|u| g.row(u)[0]).collect();
    for mask in 1u64..(1 << n) {
        let xs = mask.count_ones() as usize;
        if xs < lo || xs > hi {
            continue;
        }
        let mut nb = 0u64;
        let mut mb = mask;
        while mb != 0 {
            let u = mb.trailing_zeros() as usize;
            mb &= mb - 1;
            nb |= rows[u];
        }
        nb &= !mask;
        if violates(params, xs, nb.count_ones() as usize) {
            return Some(VertexSet::from_mask(n, mask));
        }
    }
    None
}

fn neighborhood_size(g: &Graph, x: &VertexSet) -> usize {
    x.neighborhood(g).len()
}

fn probed_violation(g: &Graph, params: &ExpanderParams, probes: usize, seed: u64) -> Option<VertexSet> {
    let n = g.n();
    let (lo, hi) = size_window(n, params.k);
    if lo > hi {
        return None;
    }
    // BFS-ball prefixes from spread-out centers are natural small cuts
    let centers = (0..n).step_by((n / 20).max(1));
    for c in centers {
        let order = bfs_order(g, c, &VertexSet::empty(n));
        let step = ((hi - lo) / 16).max(1);
        let mut s = lo;
        while s <= hi.min(order.len()) {
            let x = VertexSet::from_iter(n, order[..s].iter().copied());
            if violates(params, s, neighborhood_size(g, &x)) {
                return Some(x);
            }
            s += step;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..probes {
        let size = rng.gen_range(lo..=hi);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut x = VertexSet::from_iter(n, perm[..size].iter().copied());
        let mut best = neighborhood_size(g, &x);
        if violates(params, size, best) {
            return Some(x);
        }
        // greedy shrink: random member-for-outsider swaps that reduce |N(X)|
        for _ in 0..60 {
            let members: Vec<usize> = x.iter().collect();
            let out = members[rng.gen_range(0..members.len())];
            let in_v = loop {
                let v = rng.gen_range(0..n);
                if !x.contains(v) {
                    break v;
                }
            };
            x.remove(out);
            x.insert(in_v);
            let nb = neighborhood_size(g, &x);
            if nb <= best {
                best = nb;
                if violates(params, size, best) {
                    return Some(x);
                }
            } else {
                x.remove(in_v);
                x.insert(out);
            }
        }
    }
    None
}

/// BFS discovery order from `center` in g - avoid, with depths.
fn bfs_order(g: &Graph, center: usize, avoid: &VertexSet) -> Vec<usize> {
    bfs_order_depths(g, center, avoid).0
}

fn bfs_order_depths(g: &Graph, center: usize, avoid: &VertexSet) -> (Vec<usize>, Vec<usize>) {
    let n = g.n();
    let mut order = vec![center];
    let mut depths = vec![0usize];
    let mut seen = VertexSet::empty(n);
    seen.insert(center);
    let mut head = 0;
    while head < order.len() {
        let u = order[head];
        let du = depths[head];
        head += 1;
        for v in g.neighbors(u) {
            if !seen.contains(v) && !avoid.contains(v) {
                seen.insert(v);
                order.push(v);
                depths.push(du + 1);
            }
        }
    }
    (order, depths)
}

/// Repeatedly delete the lowest-degree vertex (ties by index) while its
/// degree is below `threshold`. Returns the surviving induced subgraph
/// and the surviving original vertex set; possibly empty.
pub fn peel_min_degree(g: &Graph, threshold: Rational) -> (Graph, VertexSet) {
    let mut keep = VertexSet::full(g.n());
    peel_set(g, &mut keep, |deg, _n_in, _m_in| {
        (deg as u64) * threshold.denom() < *threshold.numer()
    });
    let peeled = if keep.is_empty() {
        Graph::empty(0)
    } else {
        g.induced(&keep).expect("nonempty")
    };
    (peeled, keep)
}

/// Generic peel loop over a predicate on (min degree, |set|, e(set)).
fn peel_set<F: Fn(usize, usize, usize) -> bool>(g: &Graph, keep: &mut VertexSet, drop_if: F) {
    loop {
        let n_in = keep.len();
        if n_in == 0 {
            return;
        }
        let m_in: usize = keep.iter().map(|u| keep.count_row_hits(g.row(u))).sum::<usize>() / 2;
        let (v, deg) = keep
            .iter()
            .map(|u| (u, keep.count_row_hits(g.row(u)).saturating_sub(usize::from(keep.contains(u) && g.has_edge(u, u)))))
            .min_by_key(|&(u, d)| (d, u))
            .expect("nonempty");
        if drop_if(deg, n_in, m_in) {
            keep.remove(v);
        } else {
            return;
        }
    }
}

/// Delete low-degree vertices until min degree >= half the average
/// degree. Average degree never decreases during this loop.
fn peel_to_half_avg(g: &Graph, keep: &mut VertexSet) {
    // deg < d/2  <=>  deg * n < m
    peel_set(g, keep, |deg, n_in, m_in| deg * n_in < m_in);
}

#[derive(Clone, Debug)]
pub struct ExtractBudget {
    pub max_rounds: usize,
    pub probes: usize,
    pub seed: u64,
}

impl Default for ExtractBudget {
    fn default() -> Self {
        ExtractBudget {
            max_rounds: 100,
            probes: 60,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Extraction {
    pub graph: Graph,
    /// Vertices of the subgraph, in the coordinates of the input graph.
    pub vertices: VertexSet,
    pub cert: ExpanderCertificate,
}

/// Violating-cut descent: peel, certify, and on a violating X replace H
/// by the denser of H[X u N(X)] and H - X, re-peeling each time. Stops
/// when certification succeeds; refuses candidates whose average degree
/// falls below (1 - delta) d(G).
pub fn extract_expander(g: &Graph, params: &ExpanderParams, budget: &ExtractBudget) -> Result<Extraction> {
    let n = g.n();
    if n == 0 || g.m() == 0 {
        return Err(Error::EmptyGraph);
    }
    let d0 = 2.0 * g.m() as f64 / n as f64;
    let target = (1.0 - params.delta()) * d0 - 1e-9;
    let avg = |keep: &VertexSet| -> f64 {
        let n_in = keep.len();
        if n_in == 0 {
            return 0.0;
        }
        let m_in: usize = keep.iter().map(|u| keep.count_row_hits(g.row(u))).sum::<usize>() / 2;
        2.0 * m_in as f64 / n_in as f64
    };

    let mut cur = VertexSet::full(n);
    peel_to_half_avg(g, &mut cur);
    let mut best_avg = avg(&cur);

    for round in 0..budget.max_rounds {
        if cur.is_empty() {
            break;
        }
        let h = g.induced(&cur)?;
        let level = if h.n() <= EXHAUSTIVE_MAX_N {
            CertLevel::Exhaustive
        } else {
            CertLevel::Probed {
                probes: budget.probes,
                seed: budget.seed.wrapping_add(round as u64),
            }
        };
        let cert = verify_expander(&h, params, level);
        if cert.certified() {
            // postconditions verified, not trusted
            let m_in: usize = cur.iter().map(|u| cur.count_row_hits(g.row(u))).sum::<usize>() / 2;
            let n_in = cur.len();
            let min_deg = cur
                .iter()
                .map(|u| cur.count_row_hits(g.row(u)))
                .min()
                .unwrap_or(0);
            if (2.0 * m_in as f64 / n_in as f64) < target {
                return Err(Error::ExtractionFailed {
                    best_avg_degree: format!("{:.4}", 2.0 * m_in as f64 / n_in as f64),
                });
            }
            assert!(2 * min_deg * n_in >= 2 * m_in, "peel postcondition: min degree >= d(H)/2");
            return Ok(Extraction {
                graph: h,
                vertices: cur,
                cert,
            });
        }

        // map the violating set back to input coordinates
        let locals: Vec<usize> = cur.iter().collect();
        let x_local = cert.violating.as_ref().unwrap();
        let x_global = VertexSet::from_iter(n, x_local.iter().map(|i| locals[i]));
        let nb_local = x_local.neighborhood(&h);
        let mut cand_dense = VertexSet::from_iter(
            n,
            x_local.iter().chain(nb_local.iter()).map(|i| locals[i]),
        );
        let mut cand_rest = cur.clone();
        cand_rest.subtract(&x_global);
        peel_to_half_avg(g, &mut cand_dense);
        peel_to_half_avg(g, &mut cand_rest);

        let (a_dense, a_rest) = (avg(&cand_dense), avg(&cand_rest));
        let pick = if a_dense >= a_rest { cand_dense } else { cand_rest };
        let pick_avg = a_dense.max(a_rest);
        if pick_avg < target || pick.len() >= cur.len() {
            return Err(Error::ExtractionFailed {
                best_avg_degree: format!("{best_avg:.4}"),
            });
        }
        best_avg = pick_avg;
        cur = pick;
    }
    Err(Error::ExtractionFailed {
        best_avg_degree: format!("{best_avg:.4}"),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Ball {
    pub center: usize,
    #[serde(serialize_with = "crate::report::serialize_vertex_set")]
    pub set: VertexSet,
    pub radius: usize,
}

/// First (in vertex order) BFS ball in g - w reaching `size_target`
/// within `radius_cap`, trimmed to exactly `size_target` vertices by
/// discovery-order prefix.
pub fn find_ball_avoiding(
    g: &Graph,
    w: &VertexSet,
    size_target: usize,
    radius_cap: usize,
) -> Result<Ball> {
    for center in 0..g.n() {
        if w.contains(center) {
            continue;
        }
        let (order, depths) = bfs_order_depths(g, center, w);
        let within: usize = depths.iter().take_while(|&&d| d <= radius_cap).count();
        if within >= size_target {
            let set = VertexSet::from_iter(g.n(), order[..size_target].iter().copied());
            return Ok(Ball {
                center,
                set,
                radius: depths[size_target - 1],
            });
        }
    }
    Err(Error::NoBall {
        size_target,
        radius_cap,
    })
}

/// Shortest path from `x1` to `x2` in g - w, internal vertices avoiding
/// w, x1 and x2. Vertices of x1 or x2 found in w are dropped from w.
/// Returns the path as a vertex list (endpoints included).
pub fn short_path_avoiding(
    g: &Graph,
    x1: &VertexSet,
    x2: &VertexSet,
    w: &VertexSet,
    length_cap: usize,
) -> Result<Vec<usize>> {
    if x1.is_empty() || x2.is_empty() {
        return Err(Error::EmptyVertexSet);
    }
    if !x1.is_disjoint(x2) {
        let common = x1.iter().find(|&v| x2.contains(v)).unwrap();
        return Ok(vec![common]);
    }
    let n = g.n();
    let mut w_eff = w.clone();
    w_eff.subtract(x1);
    w_eff.subtract(x2);
    let mut blocked = w_eff;
    blocked.union_with(x1);
    blocked.union_with(x2);

    let mut parent = vec![usize::MAX; n];
    let mut dist = vec![usize::MAX; n];
    let mut queue: std::collections::VecDeque<usize> = x1.iter().collect();
    for s in x1.iter() {
        dist[s] = 0;
    }
    let mut hit: Option<usize> = None;
    'bfs: while let Some(u) = queue.pop_front() {
        for v in g.neighbors(u) {
            if dist[v] != usize::MAX {
                continue;
            }
            if x2.contains(v) {
                dist[v] = dist[u] + 1;
                parent[v] = u;
                hit = Some(v);
                break 'bfs;
            }
            if blocked.contains(v) {
                continue;
            }
            dist[v] = dist[u] + 1;
            parent[v] = u;
            queue.push_back(v);
        }
    }
    match hit {
        Some(v) if dist[v] <= length_cap => {
            let mut path = vec![v];
            let mut cur = v;
            while parent[cur] != usize::MAX {
                cur = parent[cur];
                path.push(cur);
            }
            path.reverse();
            debug_assert!(x1.contains(path[0]) && x2.contains(*path.last().unwrap()));
            Ok(path)
        }
        Some(v) => Err(Error::NoShortPath {
            cap: length_cap,
            achieved: dist[v].to_string(),
        }),
        None => Err(Error::NoShortPath {
            cap: length_cap,
            achieved: "disconnected".into(),
        }),
    }
}
