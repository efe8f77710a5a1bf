//! The three-step construction: harvest disjoint cycles, connect them
//! into a chain by DFS over cycles, close the chain into a wheel. Plus
//! wheel-subset enumeration and the end-to-end heavy-vertex finder.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::expander::{self, ExpanderParams, ExtractBudget};
use crate::graph::{Graph, VertexSet};
use crate::Rational;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const WHEEL_ELL_CAP: usize = 20;
/// validate_wheel runs the full subset enumeration only up to this ell.
const VALIDATE_ENUM_CAP: usize = 12;
/// Node budget for the per-start greedy cycle DFS during harvest.
const HARVEST_DFS_BUDGET: usize = 20_000;

#[derive(Clone, Debug, Serialize)]
pub struct PipelineParams {
    /// Cycle length window for the harvest.
    pub lmin: usize,
    pub lmax: usize,
    /// Connector length cap (edges).
    pub conn_cap: usize,
    pub ball_size: usize,
    pub ball_radius: usize,
    pub target_cycles: usize,
    /// Chain DFS stops once |U| <= stop_fraction * |cycles|.
    #[serde(with = "crate::report::rational_serde")]
    pub stop_fraction: Rational,
    /// Consecutive ball-construction failures tolerated in harvest.
    pub retry: usize,
    pub exp: ExpanderParams,
}

impl PipelineParams {
    pub fn validate(&self) -> Result<()> {
        if self.lmin < 3 || self.lmin > self.lmax {
            return Err(Error::Invariant(format!(
                "cycle window requires 3 <= lmin <= lmax, got [{}, {}]",
                self.lmin, self.lmax
            )));
        }
        if self.conn_cap == 0 {
            return Err(Error::Invariant("conn_cap must be at least 1".into()));
        }
        let zero = Rational::from_integer(0);
        let one = Rational::from_integer(1);
        if self.stop_fraction <= zero || self.stop_fraction >= one {
            return Err(Error::Invariant(format!(
                "stop_fraction must lie strictly between 0 and 1, got {}",
                self.stop_fraction
            )));
        }
        Ok(())
    }

    /// Desk-scale presets by graph order.
    pub fn for_order(n: usize) -> PipelineParams {
        let third = Rational::new(1, 3);
        let exp = ExpanderParams::strict();
        if n <= 64 {
            PipelineParams {
                lmin: 3,
                lmax: 8,
                conn_cap: 4,
                ball_size: 4,
                ball_radius: 2,
                target_cycles: 8,
                stop_fraction: third,
                retry: 4,
                exp,
            }
        } else if n <= 512 {
            PipelineParams {
                lmin: 12,
                lmax: 48,
                conn_cap: 12,
                ball_size: 12,
                ball_radius: 8,
                target_cycles: 12,
                stop_fraction: third,
                retry: 6,
                exp,
            }
        } else {
            PipelineParams {
                lmin: 16,
                lmax: 64,
                conn_cap: 24,
                ball_size: 24,
                ball_radius: 12,
                target_cycles: 24,
                stop_fraction: third,
                retry: 8,
                exp,
            }
        }
    }
}

/// An ell-chain: pairwise disjoint cycles C_1..C_ell joined by
/// connectors, connectors[i] running from a vertex of cycles[i] to a
/// vertex of cycles[i+1].
#[derive(Clone, Debug, Serialize)]
pub struct Chain {
    pub cycles: Vec<Vec<usize>>,
    pub connectors: Vec<Vec<usize>>,
}

impl Chain {
    pub fn ell(&self) -> usize {
        self.cycles.len()
    }
}

/// One cycle of a wheel with its two attachment vertices. The two arcs
/// between `entry` and `exit` are the interchangeable halves.
#[derive(Clone, Debug, Serialize)]
pub struct AttachedCycle {
    pub cycle: Vec<usize>,
    pub entry: usize,
    pub exit: usize,
}

/// An ell-wheel: a base cycle with ell of its edges replaced by cycles.
/// segments[i] runs from attached[i].exit to attached[i+1 mod ell].entry
/// and may be a single shared vertex.
#[derive(Clone, Debug, Serialize)]
pub struct Wheel {
    pub attached: Vec<AttachedCycle>,
    pub segments: Vec<Vec<usize>>,
}

impl Wheel {
    pub fn ell(&self) -> usize {
        self.attached.len()
    }

    pub fn vertex_set(&self, ambient: usize) -> VertexSet {
        let mut s = VertexSet::empty(ambient);
        for a in &self.attached {
            for &v in &a.cycle {
                s.insert(v);
            }
        }
        for seg in &self.segments {
            for &v in seg {
                s.insert(v);
            }
        }
        s
    }
}

/// Final state of the chain DFS, with cycle indices referring to the
/// input collection.
#[derive(Clone, Debug, Serialize)]
pub struct ChainSearchState {
    pub stack: Vec<usize>,
    pub unexplored: Vec<usize>,
    pub explored: Vec<usize>,
    /// Every connector ever created, kept as obstacles.
    pub paths: Vec<Vec<usize>>,
    /// Per cycle, the vertex through which the DFS entered it.
    pub entries: Vec<Option<usize>>,
}

fn check_cycle(g: &Graph, c: &[usize]) -> Result<()> {
    if c.len() < 3 {
        return Err(Error::Invariant(format!("cycle of length {} is too short", c.len())));
    }
    let mut sorted = c.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != c.len() {
        return Err(Error::Invariant("cycle repeats a vertex".into()));
    }
    if let Some(&v) = c.iter().find(|&&v| v >= g.n()) {
        return Err(Error::VertexOutOfRange(v, g.n()));
    }
    for i in 0..c.len() {
        let (u, v) = (c[i], c[(i + 1) % c.len()]);
        if !g.has_edge(u, v) {
            return Err(Error::Invariant(format!("cycle edge {u}-{v} missing")));
        }
    }
    Ok(())
}

fn check_path(g: &Graph, p: &[usize]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::Invariant("empty path".into()));
    }
    let mut sorted = p.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != p.len() {
        return Err(Error::Invariant("path repeats a vertex".into()));
    }
    if let Some(&v) = p.iter().find(|&&v| v >= g.n()) {
        return Err(Error::VertexOutOfRange(v, g.n()));
    }
    for w in p.windows(2) {
        if !g.has_edge(w[0], w[1]) {
            return Err(Error::Invariant(format!("path edge {}-{} missing", w[0], w[1])));
        }
    }
    Ok(())
}

pub fn validate_chain(g: &Graph, chain: &Chain, conn_cap: usize) -> Result<()> {
    let m = chain.cycles.len();
    if m == 0 {
        return Err(Error::ChainTooShort { min: 1, got: 0 });
    }
    if chain.connectors.len() + 1 != m {
        return Err(Error::Invariant(format!(
            "{} cycles need {} connectors, got {}",
            m,
            m - 1,
            chain.connectors.len()
        )));
    }
    let n = g.n();
    let mut cycle_sets = Vec::with_capacity(m);
    let mut all_cycles = VertexSet::empty(n);
    for c in &chain.cycles {
        check_cycle(g, c)?;
        let s = VertexSet::from_iter(n, c.iter().copied());
        if !all_cycles.is_disjoint(&s) {
            return Err(Error::Invariant("chain cycles intersect".into()));
        }
        all_cycles.union_with(&s);
        cycle_sets.push(s);
    }
    let mut conn_verts = VertexSet::empty(n);
    for (i, q) in chain.connectors.iter().enumerate() {
        check_path(g, q)?;
        if q.len() < 2 {
            return Err(Error::Invariant("chain connector must have at least one edge".into()));
        }
        if q.len() - 1 > conn_cap {
            return Err(Error::Invariant(format!(
                "connector {} has length {} > cap {}",
                i,
                q.len() - 1,
                conn_cap
            )));
        }
        if !cycle_sets[i].contains(q[0]) || !cycle_sets[i + 1].contains(*q.last().unwrap()) {
            return Err(Error::Invariant(format!("connector {i} misses its cycles")));
        }
        for &v in &q[1..q.len() - 1] {
            if all_cycles.contains(v) {
                return Err(Error::Invariant(format!(
                    "connector {i} passes through a cycle vertex {v}"
                )));
            }
            if conn_verts.contains(v) {
                return Err(Error::Invariant(format!(
                    "connector {i} reuses vertex {v} of another connector"
                )));
            }
        }
        let s = VertexSet::from_iter(n, q.iter().copied());
        if conn_verts.intersect_count(&s) > 0 {
            return Err(Error::Invariant(format!("connector {i} intersects another connector")));
        }
        conn_verts.union_with(&s);
    }
    // a proper chain passes through each internal cycle: entry != exit
    for i in 1..m.saturating_sub(1) {
        let entry = *chain.connectors[i - 1].last().unwrap();
        let exit = chain.connectors[i][0];
        if entry == exit {
            return Err(Error::Invariant(format!(
                "cycle {i} entered and left through the same vertex {entry}"
            )));
        }
    }
    Ok(())
}

pub fn validate_wheel(g: &Graph, w: &Wheel) -> Result<()> {
    let ell = w.attached.len();
    if ell == 0 {
        return Err(Error::Invariant("wheel has no attached cycles".into()));
    }
    if w.segments.len() != ell {
        return Err(Error::Invariant(format!(
            "{} attached cycles need {} segments, got {}",
            ell,
            ell,
            w.segments.len()
        )));
    }
    let n = g.n();
    let mut base = VertexSet::empty(n);
    for (i, seg) in w.segments.iter().enumerate() {
        check_path(g, seg)?;
        let s = VertexSet::from_iter(n, seg.iter().copied());
        if base.intersect_count(&s) > 0 {
            return Err(Error::Invariant(format!("segment {i} intersects another segment")));
        }
        base.union_with(&s);
    }
    let mut interiors = VertexSet::empty(n);
    for (i, a) in w.attached.iter().enumerate() {
        check_cycle(g, &a.cycle)?;
        if a.entry == a.exit {
            return Err(Error::Invariant(format!("cycle {i} attachments coincide at {}", a.entry)));
        }
        if !a.cycle.contains(&a.entry) || !a.cycle.contains(&a.exit) {
            return Err(Error::Invariant(format!("cycle {i} attachments are off-cycle")));
        }
        if !base.contains(a.entry) || !base.contains(a.exit) {
            return Err(Error::Invariant(format!("cycle {i} attachments are off the base")));
        }
        let mut interior = VertexSet::from_iter(n, a.cycle.iter().copied());
        interior.remove(a.entry);
        interior.remove(a.exit);
        if !interior.is_disjoint(&base) {
            return Err(Error::Invariant(format!("cycle {i} interior touches the base")));
        }
        if !interior.is_disjoint(&interiors) {
            return Err(Error::Invariant(format!("cycle {i} interior touches another cycle")));
        }
        interiors.union_with(&interior);
        // segment wiring
        if w.segments[i][0] != a.exit {
            return Err(Error::Invariant(format!("segment {i} does not start at exit {}", a.exit)));
        }
        let next = &w.attached[(i + 1) % ell];
        if *w.segments[i].last().unwrap() != next.entry {
            return Err(Error::Invariant(format!("segment {i} does not end at the next entry")));
        }
    }
    // spot the arc arithmetic for modest ell; tests cover the rest
    if ell <= VALIDATE_ENUM_CAP {
        enumerate_wheel_subsets(g, w, VALIDATE_ENUM_CAP)?;
    }
    Ok(())
}

/// The two arcs of `cycle` between `entry` and `exit`, both inclusive.
fn arcs(cycle: &[usize], entry: usize, exit: usize) -> (Vec<usize>, Vec<usize>) {
    let len = cycle.len();
    let pe = cycle.iter().position(|&v| v == entry).expect("entry on cycle");
    let px = cycle.iter().position(|&v| v == exit).expect("exit on cycle");
    let mut fwd = Vec::new();
    let mut i = pe;
    loop {
        fwd.push(cycle[i]);
        if i == px {
            break;
        }
        i = (i + 1) % len;
    }
    let mut bwd = Vec::new();
    let mut i = pe;
    loop {
        bwd.push(cycle[i]);
        if i == px {
            break;
        }
        i = (i + len - 1) % len;
    }
    (fwd, bwd)
}

/// Witness cycle for one arc choice, as an ordered vertex list.
fn choice_walk(w: &Wheel, mask: u64) -> Vec<usize> {
    let ell = w.attached.len();
    let mut walk: Vec<usize> = Vec::new();
    for i in 0..ell {
        let a = &w.attached[i];
        let (fwd, bwd) = arcs(&a.cycle, a.entry, a.exit);
        let arc = if mask >> i & 1 == 0 { fwd } else { bwd };
        if walk.is_empty() {
            walk.extend(arc);
        } else {
            walk.extend(&arc[1..]);
        }
        walk.extend(&w.segments[i][1..]);
    }
    if walk.len() > 1 && walk.last() == walk.first() {
        walk.pop();
    }
    walk
}

/// All Hamiltonian subsets witnessed by the 2^ell arc choices, deduped,
/// each verified by its explicit witness cycle.
pub fn enumerate_wheel_subsets(g: &Graph, w: &Wheel, cap: usize) -> Result<Vec<VertexSet>> {
    let ell = w.attached.len();
    if ell > cap {
        return Err(Error::WheelTooLarge { ell, cap });
    }
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    for mask in 0u64..(1u64 << ell) {
        let walk = choice_walk(w, mask);
        check_cycle(g, &walk)?;
        let mut vs = walk;
        vs.sort_unstable();
        seen.insert(vs);
    }
    Ok(seen
        .into_iter()
        .map(|v| VertexSet::from_iter(g.n(), v))
        .collect())
}

/// How many of the enumerated subsets contain each vertex.
pub fn subset_membership(sets: &[VertexSet], n: usize) -> Vec<usize> {
    let mut count = vec![0usize; n];
    for s in sets {
        for v in s.iter() {
            count[v] += 1;
        }
    }
    count
}

/// Bounded DFS from `start` for a cycle through `start` with length in
/// [lmin, lmax], avoiding `used`. First found in neighbor order.
fn greedy_cycle(g: &Graph, start: usize, used: &VertexSet, lmin: usize, lmax: usize) -> Option<Vec<usize>> {
    let mut path = vec![start];
    let mut on_path = VertexSet::empty(g.n());
    on_path.insert(start);
    let mut budget = HARVEST_DFS_BUDGET;
    if cycle_dfs(g, start, used, &mut on_path, &mut path, lmin, lmax, &mut budget) {
        Some(path)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn cycle_dfs(
    g: &Graph,
    start: usize,
    used: &VertexSet,
    on_path: &mut VertexSet,
    path: &mut Vec<usize>,
    lmin: usize,
    lmax: usize,
    budget: &mut usize,
) -> bool {
    if *budget == 0 {
        return false;
    }
    *budget -= 1;
    let u = *path.last().unwrap();
    // close as early as allowed so cycles stay near lmin
    if path.len() >= lmin && g.has_edge(u, start) {
        return true;
    }
    for v in g.neighbors(u) {
        if path.len() < lmax && !on_path.contains(v) && !used.contains(v) {
            on_path.insert(v);
            path.push(v);
            if cycle_dfs(g, start, used, on_path, path, lmin, lmax, budget) {
                return true;
            }
            path.pop();
            on_path.remove(v);
        }
    }
    false
}

/// BFS path from `from` to `to` inside `allowed` minus `blocked`.
fn path_within(
    g: &Graph,
    allowed: &VertexSet,
    blocked: &VertexSet,
    from: usize,
    to: usize,
) -> Option<Vec<usize>> {
    if from == to {
        return Some(vec![from]);
    }
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut seen = VertexSet::empty(n);
    seen.insert(from);
    let mut queue = std::collections::VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        for v in g.neighbors(u) {
            if seen.contains(v) || !allowed.contains(v) || (v != to && blocked.contains(v)) {
                continue;
            }
            seen.insert(v);
            parent[v] = u;
            if v == to {
                let mut p = vec![to];
                let mut cur = to;
                while parent[cur] != usize::MAX {
                    cur = parent[cur];
                    p.push(cur);
                }
                p.reverse();
                return Some(p);
            }
            queue.push_back(v);
        }
    }
    None
}

/// One constructive cycle: two disjoint balls avoiding `used`, a short
/// connecting path, iterative lengthening through fresh balls until a
/// second avoiding path closes the union into an in-window cycle.
/// `skip` shifts the first ball's center choice for retry variation.
pub fn construct_cycle_via_balls(
    g: &Graph,
    used: &VertexSet,
    p: &PipelineParams,
    skip: usize,
) -> Result<Vec<usize>> {
    let mut avoid = used.clone();
    // shift the starting ball deterministically for retries
    let mut first = None;
    for _ in 0..=skip {
        let b = expander::find_ball_avoiding(g, &avoid, p.ball_size, p.ball_radius)?;
        avoid.insert(b.center);
        first = Some(b);
    }
    let mut d = first.unwrap().set;
    let mut w_and_d = used.clone();
    w_and_d.union_with(&d);
    let mut dp = expander::find_ball_avoiding(g, &w_and_d, p.ball_size, p.ball_radius)?.set;
    let mut path = expander::short_path_avoiding(g, &d, &dp, used, p.conn_cap)?;

    for _ in 0..p.lmax {
        if let Some(cycle) = close_ball_cycle(g, used, &d, &dp, &path, p) {
            if cycle.len() > p.lmax {
                return Err(Error::PipelineStage {
                    stage: "harvest",
                    reason: format!("closed cycle of length {} overshoots lmax {}", cycle.len(), p.lmax),
                });
            }
            if cycle.len() >= p.lmin {
                check_cycle(g, &cycle)?;
                debug_assert!(cycle.iter().all(|&v| !used.contains(v)));
                return Ok(cycle);
            }
        }
        lengthen_path(g, used, &mut d, &mut dp, &mut path, p)?;
    }
    Err(Error::PipelineStage {
        stage: "harvest",
        reason: "lengthening loop exhausted without an in-window cycle".into(),
    })
}

/// One lengthening step: detour the path through a fresh ball, growing
/// its length by at least one edge. The hit side of the old ball pair
/// is replaced by the fresh ball.
fn lengthen_path(
    g: &Graph,
    used: &VertexSet,
    d: &mut VertexSet,
    dp: &mut VertexSet,
    path: &mut Vec<usize>,
    p: &PipelineParams,
) -> Result<()> {
    let n = g.n();
    let pathset = VertexSet::from_iter(n, path.iter().copied());
    let mut avoid = used.clone();
    avoid.union_with(d);
    avoid.union_with(dp);
    avoid.union_with(&pathset);
    let x = expander::find_ball_avoiding(g, &avoid, p.ball_size, p.ball_radius)?;
    let mut targets = d.clone();
    targets.union_with(dp);
    let mut wq = used.clone();
    wq.union_with(&pathset);
    let q = expander::short_path_avoiding(g, &x.set, &targets, &wq, p.conn_cap)?;
    let hit = *q.last().unwrap();
    if d.contains(hit) {
        std::mem::swap(d, dp);
        path.reverse();
    }
    let end = *path.last().unwrap(); // endpoint inside dp
    let mut blocked = pathset;
    for &u in &q {
        blocked.insert(u);
    }
    blocked.remove(end);
    blocked.remove(hit);
    let r = path_within(g, dp, &blocked, hit, end).ok_or(Error::PipelineStage {
        stage: "harvest",
        reason: "detour ball disconnected from the path endpoint".into(),
    })?;
    // new path: old endpoint .. hit .. fresh ball
    let mut rrev = r;
    rrev.reverse();
    path.extend(&rrev[1..]);
    let mut qrev = q;
    qrev.reverse();
    path.extend(&qrev[1..]);
    *dp = x.set;
    Ok(())
}

/// Close the ball pair into a cycle: a second short avoiding path plus
/// two in-ball connections. None when no closing geometry exists yet.
fn close_ball_cycle(
    g: &Graph,
    used: &VertexSet,
    d: &VertexSet,
    dp: &VertexSet,
    path: &[usize],
    p: &PipelineParams,
) -> Option<Vec<usize>> {
    let n = g.n();
    let v = path[0];
    let v2 = *path.last().unwrap();
    let pathset = VertexSet::from_iter(n, path.iter().copied());
    let mut wq = used.clone();
    wq.union_with(&pathset);
    let q2 = expander::short_path_avoiding(g, d, dp, &wq, p.conn_cap).ok()?;
    let a = q2[0];
    let b = *q2.last().unwrap();
    let q2set = VertexSet::from_iter(n, q2.iter().copied());

    let mut blocked = pathset.clone();
    blocked.union_with(&q2set);
    blocked.remove(v2);
    blocked.remove(b);
    let r2 = path_within(g, dp, &blocked, v2, b)?;

    let mut blocked = pathset;
    blocked.union_with(&q2set);
    blocked.remove(a);
    blocked.remove(v);
    let r1 = path_within(g, d, &blocked, a, v)?;

    let mut cyc = path.to_vec();
    cyc.extend(&r2[1..]);
    let mut q2r = q2;
    q2r.reverse();
    cyc.extend(&q2r[1..]);
    cyc.extend(&r1[1..]);
    if cyc.len() > 1 && cyc.last() == cyc.first() {
        cyc.pop();
    }
    let mut sorted = cyc.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if cyc.len() >= 3 && sorted.len() == cyc.len() {
        Some(cyc)
    } else {
        None
    }
}

/// Greedy maximal collection of pairwise disjoint cycles with lengths
/// in [lmin, lmax]: existing cycles first (bounded DFS per start), then
/// the ball-and-path constructor until `target_cycles` or retries run
/// out. Zero cycles is an explicit empty result, not an error.
pub fn harvest_cycles(g: &Graph, p: &PipelineParams, seed: u64) -> Result<Vec<Vec<usize>>> {
    p.validate()?;
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut used = VertexSet::empty(n);
    let mut cycles: Vec<Vec<usize>> = Vec::new();
    let mut starts: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    starts.shuffle(&mut rng);
    for &s in &starts {
        if cycles.len() >= p.target_cycles {
            break;
        }
        if used.contains(s) {
            continue;
        }
        if let Some(c) = greedy_cycle(g, s, &used, p.lmin, p.lmax) {
            for &v in &c {
                used.insert(v);
            }
            cycles.push(c);
        }
    }
    let mut failures = 0;
    while cycles.len() < p.target_cycles && failures < p.retry {
        match construct_cycle_via_balls(g, &used, p, failures) {
            Ok(c) => {
                for &v in &c {
                    used.insert(v);
                }
                cycles.push(c);
                failures = 0;
            }
            Err(_) => failures += 1,
        }
    }
    Ok(cycles)
}

/// DFS over the cycle collection: a stack S of cycles, unexplored U,
/// explored X and an ever-growing obstacle set of connector paths.
/// Connectors from the stack top must leave through a vertex other
/// than the top's entry; internal vertices avoid every cycle and every
/// path created so far. Returns the longest stack seen as a chain.
pub fn build_chain(g: &Graph, cycles: &[Vec<usize>], p: &PipelineParams) -> Result<(Chain, ChainSearchState)> {
    p.validate()?;
    if cycles.is_empty() {
        return Err(Error::ChainTooShort { min: 1, got: 0 });
    }
    let n = g.n();
    let nc = cycles.len();
    for c in cycles {
        check_cycle(g, c)?;
    }
    let cycle_sets: Vec<VertexSet> = cycles
        .iter()
        .map(|c| VertexSet::from_iter(n, c.iter().copied()))
        .collect();
    let mut obstacles = VertexSet::empty(n);
    for s in &cycle_sets {
        if !obstacles.is_disjoint(s) {
            return Err(Error::Invariant("harvested cycles intersect".into()));
        }
        obstacles.union_with(s);
    }

    let mut unexplored: BTreeSet<usize> = (0..nc).collect();
    let mut explored: Vec<usize> = Vec::new();
    let mut stack: Vec<usize> = Vec::new();
    let mut stack_conn: Vec<Vec<usize>> = Vec::new();
    let mut entries: Vec<Option<usize>> = vec![None; nc];
    let mut paths: Vec<Vec<usize>> = Vec::new();
    let mut best: Option<Chain> = None;

    let stop = |u: usize| {
        (u as u64) * p.stop_fraction.denom() <= p.stop_fraction.numer() * nc as u64
    };
    let snapshot = |best: &mut Option<Chain>, stack: &[usize], conn: &[Vec<usize>]| {
        if best.as_ref().map_or(true, |c| stack.len() > c.ell()) {
            let chain = Chain {
                cycles: stack.iter().map(|&i| cycles[i].clone()).collect(),
                connectors: conn.to_vec(),
            };
            debug_assert!(validate_chain(g, &chain, p.conn_cap).is_ok());
            *best = Some(chain);
        }
    };

    while !unexplored.is_empty() && !stop(unexplored.len()) {
        if stack.is_empty() {
            let c = *unexplored.iter().next().unwrap();
            unexplored.remove(&c);
            stack.push(c);
            snapshot(&mut best, &stack, &stack_conn);
            continue;
        }
        let top = *stack.last().unwrap();
        let mut x1 = cycle_sets[top].clone();
        if let Some(e) = entries[top] {
            x1.remove(e);
        }
        let mut found = None;
        for &cand in unexplored.iter() {
            if let Ok(q) = expander::short_path_avoiding(g, &x1, &cycle_sets[cand], &obstacles, p.conn_cap) {
                found = Some((cand, q));
                break;
            }
        }
        match found {
            Some((cand, q)) => {
                unexplored.remove(&cand);
                entries[cand] = Some(*q.last().unwrap());
                for &v in &q {
                    obstacles.insert(v);
                }
                paths.push(q.clone());
                stack.push(cand);
                stack_conn.push(q);
                snapshot(&mut best, &stack, &stack_conn);
            }
            None => {
                let c = stack.pop().unwrap();
                explored.push(c);
                if !stack_conn.is_empty() {
                    stack_conn.pop();
                }
            }
        }
    }
    let state = ChainSearchState {
        stack,
        unexplored: unexplored.into_iter().collect(),
        explored,
        paths,
        entries,
    };
    Ok((best.expect("at least one cycle enters the stack"), state))
}

/// Termination audit: no qualifying connector from any explored cycle
/// to any still-unexplored cycle. Returns a violating triple if found.
/// (Obstacles only grow during the DFS, so absence at pop time implies
/// absence against the final obstacle set.)
pub fn audit_no_connector(
    g: &Graph,
    cycles: &[Vec<usize>],
    state: &ChainSearchState,
    p: &PipelineParams,
) -> Option<(usize, usize, Vec<usize>)> {
    let n = g.n();
    let mut obstacles = VertexSet::empty(n);
    for c in cycles {
        for &v in c {
            obstacles.insert(v);
        }
    }
    for q in &state.paths {
        for &v in q {
            obstacles.insert(v);
        }
    }
    for &xc in &state.explored {
        let mut x1 = VertexSet::from_iter(n, cycles[xc].iter().copied());
        if let Some(e) = state.entries[xc] {
            x1.remove(e);
        }
        for &uc in &state.unexplored {
            let x2 = VertexSet::from_iter(n, cycles[uc].iter().copied());
            if let Ok(q) = expander::short_path_avoiding(g, &x1, &x2, &obstacles, p.conn_cap) {
                return Some((xc, uc, q));
            }
        }
    }
    None
}

/// Close a chain of m >= 3 cycles into a wheel: split the chain into
/// X1 (first cycles), a middle buffer W (plus all connectors), and X2
/// (last cycles); find a return path between X1 and X2 avoiding W; the
/// wheel spans the two hit cycles inclusive. An end cycle whose two
/// attachments coincide is deleted and its connector merged into the
/// closing segment.
pub fn close_wheel(g: &Graph, chain: &Chain, p: &PipelineParams) -> Result<Wheel> {
    let m = chain.cycles.len();
    if m < 3 {
        return Err(Error::ChainTooShort { min: 3, got: m });
    }
    validate_chain(g, chain, p.conn_cap)?;
    let n = g.n();
    let half = m / 2;
    let buf = (m / 8).max(1);
    let l_end = half.saturating_sub(buf).max(1);
    let r_start = (half + buf).min(m - 1);

    let collect = |range: std::ops::Range<usize>| {
        let mut s = VertexSet::empty(n);
        for i in range {
            for &v in &chain.cycles[i] {
                s.insert(v);
            }
        }
        s
    };
    let x1 = collect(0..l_end);
    let x2 = collect(r_start..m);
    let mut mid = collect(l_end..r_start);
    for q in &chain.connectors {
        for &v in q {
            mid.insert(v);
        }
    }
    let path = expander::short_path_avoiding(g, &x1, &x2, &mid, n).map_err(|e| Error::PipelineStage {
        stage: "close_wheel",
        reason: format!(
            "no avoiding return path (|X1|={}, |W|={}, |X2|={}): {e}",
            x1.len(),
            mid.len(),
            x2.len()
        ),
    })?;
    let a = path[0];
    let b = *path.last().unwrap();
    let i = (0..l_end).find(|&i| chain.cycles[i].contains(&a)).expect("a lies in X1");
    let j = (r_start..m).find(|&j| chain.cycles[j].contains(&b)).expect("b lies in X2");

    let mut attached: Vec<AttachedCycle> = (i..=j)
        .map(|k| AttachedCycle {
            cycle: chain.cycles[k].clone(),
            entry: if k == i { a } else { *chain.connectors[k - 1].last().unwrap() },
            exit: if k == j { b } else { chain.connectors[k][0] },
        })
        .collect();
    let mut segments: Vec<Vec<usize>> = (i..j).map(|k| chain.connectors[k].clone()).collect();
    let mut closing: Vec<usize> = path.iter().rev().copied().collect();

    // endpoint deletion where the return path lands on an attachment
    let last = attached.last().unwrap();
    if last.entry == last.exit && attached.len() > 1 {
        attached.pop();
        let mut merged = segments.pop().unwrap();
        merged.extend(&closing[1..]);
        closing = merged;
    }
    if attached[0].entry == attached[0].exit && attached.len() > 1 {
        attached.remove(0);
        let dropped = segments.remove(0);
        closing.extend(&dropped[1..]);
    }
    segments.push(closing);
    let wheel = Wheel { attached, segments };
    validate_wheel(g, &wheel)?;
    Ok(wheel)
}

#[derive(Clone, Debug, Serialize)]
pub struct HeavyVertex {
    pub vertex: usize,
    pub ell: usize,
    /// 2^(ell-1), the certified count of Hamiltonian subsets through
    /// `vertex`.
    pub lower_bound: u128,
    pub wheel: Wheel,
}

fn relabel_wheel(w: &Wheel, map: &[usize]) -> Wheel {
    Wheel {
        attached: w
            .attached
            .iter()
            .map(|a| AttachedCycle {
                cycle: a.cycle.iter().map(|&v| map[v]).collect(),
                entry: map[a.entry],
                exit: map[a.exit],
            })
            .collect(),
        segments: w
            .segments
            .iter()
            .map(|s| s.iter().map(|&v| map[v]).collect())
            .collect(),
    }
}

fn stage_err(stage: &'static str) -> impl FnOnce(Error) -> Error {
    move |e| Error::PipelineStage {
        stage,
        reason: e.to_string(),
    }
}

/// End-to-end pipeline: expander extraction, cycle harvest, chain DFS,
/// wheel closing. Returns a wheel vertex together with the certified
/// count 2^(ell-1) of distinct Hamiltonian subsets containing it,
/// verified by enumeration when ell is small enough.
pub fn heavy_vertex(g: &Graph, p: &PipelineParams, budget: &ExtractBudget, seed: u64) -> Result<HeavyVertex> {
    p.validate()?;
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    if 2 * g.m() < 2 * g.n() {
        return Err(Error::PipelineStage {
            stage: "extract",
            reason: format!("average degree {} is below the floor of 2", g.m() as f64 * 2.0 / g.n() as f64),
        });
    }
    let ex = expander::extract_expander(g, &p.exp, budget).map_err(stage_err("extract"))?;
    let map = ex.vertices.to_sorted_vec();
    let h = &ex.graph;
    let cycles = harvest_cycles(h, p, seed).map_err(stage_err("harvest"))?;
    if cycles.is_empty() {
        return Err(Error::PipelineStage {
            stage: "harvest",
            reason: "no cycles in the length window were found".into(),
        });
    }
    let (chain, _state) = build_chain(h, &cycles, p).map_err(stage_err("chain"))?;
    let wheel_local = close_wheel(h, &chain, p).map_err(stage_err("close_wheel"))?;
    let wheel = relabel_wheel(&wheel_local, &map);
    validate_wheel(g, &wheel)?;
    let ell = wheel.ell();
    let lower_bound = 1u128 << (ell - 1);
    // pick a base vertex: it lies on every witness cycle
    let vertex = wheel.attached[0].entry;
    if ell <= WHEEL_ELL_CAP {
        let sets = enumerate_wheel_subsets(g, &wheel, WHEEL_ELL_CAP)?;
        let member = sets.iter().filter(|s| s.contains(vertex)).count();
        if (member as u128) < lower_bound {
            return Err(Error::Invariant(format!(
                "vertex {vertex} lies in only {member} enumerated subsets, below 2^{}",
                ell - 1
            )));
        }
    } else {
        // spot-check a sample of arc choices
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x77);
        for _ in 0..64 {
            let mask: u64 = rand::Rng::gen_range(&mut rng, 0..(1u64 << ell));
            let walk = choice_walk(&wheel, mask);
            check_cycle(g, &walk)?;
        }
    }
    Ok(HeavyVertex {
        vertex,
        ell,
        lower_bound,
        wheel,
    })
}

/// Test scaffold: an ell-wheel graph built from scratch. arcs[i] gives
/// the two arc lengths (edges, >= 1 each) of attached cycle i; segs[i]
/// the length of the base segment after it (>= 1 edge).
pub fn synthetic_wheel(arcs: &[(usize, usize)], segs: &[usize]) -> (Graph, Wheel) {
    let ell = arcs.len();
    assert!(ell >= 1 && segs.len() == ell);
    assert!(arcs.iter().all(|&(a, b)| a >= 1 && b >= 1 && a + b >= 3));
    assert!(segs.iter().all(|&s| s >= 1));
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut next = 0usize;
    let fresh = |k: usize, next: &mut usize| -> Vec<usize> {
        let vs: Vec<usize> = (*next..*next + k).collect();
        *next += k;
        vs
    };
    let mut attached = Vec::new();
    let mut seg_interiors = Vec::new();
    let mut entries = Vec::new();
    let mut exits = Vec::new();
    for i in 0..ell {
        let entry = fresh(1, &mut next)[0];
        let a_int = fresh(arcs[i].0 - 1, &mut next);
        let exit = fresh(1, &mut next)[0];
        let b_int = fresh(arcs[i].1 - 1, &mut next);
        let mut cycle = vec![entry];
        cycle.extend(&a_int);
        cycle.push(exit);
        cycle.extend(&b_int);
        for k in 0..cycle.len() {
            edges.push((cycle[k], cycle[(k + 1) % cycle.len()]));
        }
        attached.push(AttachedCycle { cycle, entry, exit });
        entries.push(entry);
        exits.push(exit);
        seg_interiors.push(fresh(segs[i] - 1, &mut next));
    }
    let mut segments = Vec::new();
    for i in 0..ell {
        let mut seg = vec![exits[i]];
        seg.extend(&seg_interiors[i]);
        seg.push(entries[(i + 1) % ell]);
        for w in seg.windows(2) {
            edges.push((w[0], w[1]));
        }
        segments.push(seg);
    }
    edges.sort_unstable();
    edges.dedup();
    let g = Graph::from_edges(next, &edges).expect("well-formed wheel graph");
    let w = Wheel { attached, segments };
    validate_wheel(&g, &w).expect("synthetic wheel is valid");
    (g, w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{self, Family};
    use crate::hamcount;

    fn params_small() -> PipelineParams {
        PipelineParams::for_order(20)
    }

    #[test]
    fn params_validation() {
        let mut p = params_small();
        assert!(p.validate().is_ok());
        p.lmin = 2;
        assert!(p.validate().is_err());
        p.lmin = 9;
        assert!(p.validate().is_err(), "lmin above lmax");
        p = params_small();
        p.stop_fraction = Rational::from_integer(1);
        assert!(p.validate().is_err());
        p = params_small();
        p.conn_cap = 0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn two_wheel_four_subsets() {
        // C_6 base with two opposite edges each replaced by a triangle
        let (g, w) = synthetic_wheel(&[(1, 2), (1, 2)], &[2, 2]);
        assert_eq!(g.n(), 8);
        let sets = enumerate_wheel_subsets(&g, &w, 20).unwrap();
        assert_eq!(sets.len(), 4);
        // all four appear among the graph's Hamiltonian subsets
        for s in &sets {
            assert!(hamcount::is_hamiltonian(&g.induced(s).unwrap()));
        }
        let (total, _) = crate::oracle::count_hamiltonian_subsets_naive(&g);
        assert!(total >= 4);
    }

    #[test]
    fn one_wheel_theta_two_subsets() {
        let (g, w) = synthetic_wheel(&[(2, 3)], &[2]);
        let sets = enumerate_wheel_subsets(&g, &w, 20).unwrap();
        assert_eq!(sets.len(), 2);
    }

    #[test]
    fn three_wheel_membership_counts() {
        let (g, w) = synthetic_wheel(&[(2, 2), (2, 3), (3, 3)], &[1, 2, 3]);
        let sets = enumerate_wheel_subsets(&g, &w, 20).unwrap();
        assert_eq!(sets.len(), 8);
        let counts = subset_membership(&sets, g.n());
        let base = w.vertex_set(g.n());
        let mut interiors = VertexSet::empty(g.n());
        for a in &w.attached {
            for &v in &a.cycle {
                if v != a.entry && v != a.exit {
                    interiors.insert(v);
                }
            }
        }
        for v in base.iter() {
            if interiors.contains(v) {
                assert_eq!(counts[v], 4, "arc interior {v}");
            } else {
                assert_eq!(counts[v], 8, "base vertex {v}");
            }
        }
    }

    #[test]
    fn wheel_cap_rejected() {
        let arcs: Vec<(usize, usize)> = (0..5).map(|_| (2, 2)).collect();
        let segs = vec![1; 5];
        let (g, w) = synthetic_wheel(&arcs, &segs);
        assert!(matches!(
            enumerate_wheel_subsets(&g, &w, 3),
            Err(Error::WheelTooLarge { ell: 5, cap: 3 })
        ));
    }

    #[test]
    fn validate_wheel_catches_tampering() {
        let (g, w) = synthetic_wheel(&[(2, 2), (2, 2)], &[2, 2]);
        let mut bad = w.clone();
        bad.attached[0].entry = bad.attached[0].exit;
        assert!(validate_wheel(&g, &bad).is_err());
        let mut bad = w.clone();
        bad.segments[0] = vec![bad.segments[0][0]];
        assert!(validate_wheel(&g, &bad).is_err());
        assert!(validate_wheel(&g, &w).is_ok());
    }

    #[test]
    fn harvest_degenerate_full_cycle() {
        let g = gen::generate(&Family::Cycle(100), 0).unwrap();
        let mut p = PipelineParams::for_order(100);
        p.lmin = 100;
        p.lmax = 100;
        p.target_cycles = 3;
        p.retry = 1;
        let cycles = harvest_cycles(&g, &p, 0).unwrap();
        assert_eq!(cycles.len(), 1);
        assert_eq!(cycles[0].len(), 100);
    }

    #[test]
    fn harvest_k20_four_five_cycles() {
        let g = gen::generate(&Family::Complete(20), 0).unwrap();
        let mut p = params_small();
        p.lmin = 5;
        p.lmax = 6;
        p.target_cycles = 10;
        p.retry = 2;
        for seed in [0, 1, 7] {
            let cycles = harvest_cycles(&g, &p, seed).unwrap();
            assert_eq!(cycles.len(), 4, "seed {seed}");
            let mut seen = VertexSet::empty(20);
            for c in &cycles {
                assert!(c.len() == 5 || c.len() == 6);
                check_cycle(&g, c).unwrap();
                for &v in c {
                    assert!(!seen.contains(v));
                    seen.insert(v);
                }
            }
        }
    }

    #[test]
    fn ball_constructor_reaches_the_window() {
        let g = gen::generate(&Family::RandomRegular { n: 500, d: 4 }, 2).unwrap();
        let mut p = PipelineParams::for_order(500);
        p.lmin = 30;
        p.lmax = 80;
        let c = construct_cycle_via_balls(&g, &VertexSet::empty(500), &p, 0).unwrap();
        assert!(c.len() >= 30 && c.len() <= 80, "length {}", c.len());
        check_cycle(&g, &c).unwrap();
    }

    /// A 3-chain on three C_8s with length-2 connectors, plus one extra
    /// edge joining cycle 0 and cycle 2 directly.
    fn chain_fixture() -> (Graph, Vec<Vec<usize>>) {
        let mut edges = Vec::new();
        let cycles: Vec<Vec<usize>> = (0..3).map(|i| (8 * i..8 * i + 8).collect()).collect();
        for c in &cycles {
            for k in 0..8 {
                edges.push((c[k], c[(k + 1) % 8]));
            }
        }
        // connectors 4-24-12 and 14-25-20 through fresh midpoints
        edges.push((4, 24));
        edges.push((24, 12));
        edges.push((14, 25));
        edges.push((25, 20));
        // the shortcut the wheel closing will use
        edges.push((0, 18));
        let g = Graph::from_edges(26, &edges).unwrap();
        (g, cycles)
    }

    #[test]
    fn chain_recovery_on_fixture() {
        let (g, cycles) = chain_fixture();
        let mut p = params_small();
        p.conn_cap = 2;
        p.lmin = 8;
        p.lmax = 8;
        p.stop_fraction = Rational::new(1, 4);
        let (chain, state) = build_chain(&g, &cycles, &p).unwrap();
        assert_eq!(chain.ell(), 3);
        validate_chain(&g, &chain, p.conn_cap).unwrap();
        assert!(state.unexplored.is_empty());
        assert!(audit_no_connector(&g, &cycles, &state, &p).is_none());
    }

    #[test]
    fn chain_across_components_is_single() {
        let c6 = gen::generate(&Family::Cycle(6), 0).unwrap();
        let g = c6.disjoint_union(&c6).disjoint_union(&c6);
        let cycles: Vec<Vec<usize>> = (0..3).map(|i| (6 * i..6 * i + 6).collect()).collect();
        let mut p = params_small();
        p.lmin = 6;
        p.lmax = 6;
        p.stop_fraction = Rational::new(1, 4);
        let (chain, state) = build_chain(&g, &cycles, &p).unwrap();
        assert_eq!(chain.ell(), 1);
        assert!(audit_no_connector(&g, &cycles, &state, &p).is_none());
    }

    #[test]
    fn close_wheel_on_fixture() {
        let (g, cycles) = chain_fixture();
        let mut p = params_small();
        p.conn_cap = 2;
        p.lmin = 8;
        p.lmax = 8;
        p.stop_fraction = Rational::new(1, 4);
        let (chain, _) = build_chain(&g, &cycles, &p).unwrap();
        let w = close_wheel(&g, &chain, &p).unwrap();
        assert!(w.ell() == 2 || w.ell() == 3, "got ell = {}", w.ell());
        let sets = enumerate_wheel_subsets(&g, &w, 20).unwrap();
        assert!(sets.len() >= 1 << (w.ell() - 1));
    }

    #[test]
    fn close_wheel_rejects_short_chains() {
        let (g, w) = synthetic_wheel(&[(2, 3)], &[3]);
        let chain = Chain {
            cycles: vec![w.attached[0].cycle.clone()],
            connectors: vec![],
        };
        assert!(matches!(
            close_wheel(&g, &chain, &params_small()),
            Err(Error::ChainTooShort { min: 3, got: 1 })
        ));
    }

    #[test]
    fn heavy_vertex_on_synthetic_four_wheel() {
        // triangles attached to a long base: window [3,3] harvests
        // exactly the four triangles
        let (g, _) = synthetic_wheel(&[(1, 2), (1, 2), (1, 2), (1, 2)], &[3, 3, 3, 3]);
        let mut p = params_small();
        p.lmin = 3;
        p.lmax = 3;
        p.conn_cap = 3;
        p.target_cycles = 4;
        p.retry = 1;
        p.stop_fraction = Rational::new(1, 5);
        let hv = heavy_vertex(&g, &p, &ExtractBudget::default(), 0).unwrap();
        assert_eq!(hv.ell, 4);
        assert_eq!(hv.lower_bound, 8);
        let sets = enumerate_wheel_subsets(&g, &hv.wheel, 20).unwrap();
        assert!(sets.iter().filter(|s| s.contains(hv.vertex)).count() >= 8);
    }

    #[test]
    fn heavy_vertex_on_k16_vs_exact_counts() {
        let g = gen::generate(&Family::Complete(16), 0).unwrap();
        let hv = heavy_vertex(&g, &params_small(), &ExtractBudget::default(), 0).unwrap();
        assert!(hv.lower_bound >= 2);
        let counts = hamcount::count_hamiltonian_subsets(&g, &hamcount::CountBudget::default()).unwrap();
        assert!(hv.lower_bound <= counts.per_vertex[hv.vertex] as u128);
    }

    #[test]
    fn heavy_vertex_rejects_sparse_graphs() {
        let g = gen::generate(&Family::Path(10), 0).unwrap();
        assert!(matches!(
            heavy_vertex(&g, &params_small(), &ExtractBudget::default(), 0),
            Err(Error::PipelineStage { stage: "extract", .. })
        ));
    }
}
