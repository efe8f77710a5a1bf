//! Generators for the graph families used throughout the harness.

use crate::error::{Error, Result};
use crate::graph::Graph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Retries of the pairing model before giving up.
const PAIRING_RETRIES: u32 = 1000;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    Complete(usize),
    CompleteBipartite(usize, usize),
    Cycle(usize),
    Path(usize),
    Hypercube(usize),
    /// `copies` cliques K_{d+1} sharing exactly one common vertex.
    CliqueStar { d: usize, copies: usize },
    /// Two K_{d+1}s sharing one vertex.
    CliqueBowtie(usize),
    /// K_k minus a perfect matching; k must be even.
    CompleteMinusMatching(usize),
    RandomRegular { n: usize, d: usize },
    Gnp { n: usize, p: f64 },
    /// Two K_k cliques joined by a single bridge edge.
    TwoCliquesBridge(usize),
}

impl Family {
    /// Parse a colon-separated spec like `complete:4`, `gnp:12:0.5`,
    /// `clique_star:3:2`.
    pub fn parse(spec: &str) -> Result<Family> {
        let parts: Vec<&str> = spec.split(':').collect();
        let usize_arg = |i: usize| -> Result<usize> {
            parts
                .get(i)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::InvalidFamily(format!("bad argument in `{spec}`")))
        };
        match parts[0] {
            "complete" => Ok(Family::Complete(usize_arg(1)?)),
            "complete_bipartite" => Ok(Family::CompleteBipartite(usize_arg(1)?, usize_arg(2)?)),
            "cycle" => Ok(Family::Cycle(usize_arg(1)?)),
            "path" => Ok(Family::Path(usize_arg(1)?)),
            "hypercube" => Ok(Family::Hypercube(usize_arg(1)?)),
            "clique_star" => Ok(Family::CliqueStar {
                d: usize_arg(1)?,
                copies: usize_arg(2)?,
            }),
            "clique_bowtie" => Ok(Family::CliqueBowtie(usize_arg(1)?)),
            "complete_minus_matching" => Ok(Family::CompleteMinusMatching(usize_arg(1)?)),
            "random_regular" => Ok(Family::RandomRegular {
                n: usize_arg(1)?,
                d: usize_arg(2)?,
            }),
            "gnp" => {
                let p: f64 = parts
                    .get(2)
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| Error::InvalidFamily(format!("bad probability in `{spec}`")))?;
                Ok(Family::Gnp { n: usize_arg(1)?, p })
            }
            "two_cliques_bridge" => Ok(Family::TwoCliquesBridge(usize_arg(1)?)),
            other => Err(Error::InvalidFamily(format!("unknown family `{other}`"))),
        }
    }
}

/// Deterministic given `(family, seed)`. The seed only matters for the
/// random families.
pub fn generate(family: &Family, seed: u64) -> Result<Graph> {
    let g = match *family {
        Family::Complete(k) => {
            require(k >= 1, "complete requires k >= 1")?;
            let mut edges = Vec::new();
            for u in 0..k {
                for v in (u + 1)..k {
                    edges.push((u, v));
                }
            }
            Graph::from_edges(k, &edges)?
        }
        Family::CompleteBipartite(s, t) => {
            require(s >= 1 && t >= 1, "complete_bipartite requires s,t >= 1")?;
            let mut edges = Vec::new();
            for u in 0..s {
                for v in 0..t {
                    edges.push((u, s + v));
                }
            }
            Graph::from_edges(s + t, &edges)?
        }
        Family::Cycle(n) => {
            require(n >= 3, "cycle requires n >= 3")?;
            let edges: Vec<_> = (0..n).map(|u| (u, (u + 1) % n)).collect();
            Graph::from_edges(n, &edges)?
        }
        Family::Path(n) => {
            require(n >= 1, "path requires n >= 1")?;
            let edges: Vec<_> = (0..n.saturating_sub(1)).map(|u| (u, u + 1)).collect();
            Graph::from_edges(n, &edges)?
        }
        Family::Hypercube(d) => {
            require(d >= 1 && d <= 20, "hypercube requires 1 <= d <= 20")?;
            let n = 1usize << d;
            let mut edges = Vec::new();
            for u in 0..n {
                for b in 0..d {
                    let v = u ^ (1 << b);
                    if u < v {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, &edges)?
        }
        Family::CliqueStar { d, copies } => {
            require(d >= 1 && copies >= 1, "clique_star requires d, copies >= 1")?;
            // vertex 0 shared; copy i owns vertices 1 + i*d .. 1 + (i+1)*d
            let mut edges = Vec::new();
            for i in 0..copies {
                let block: Vec<usize> = std::iter::once(0)
                    .chain((0..d).map(|j| 1 + i * d + j))
                    .collect();
                for a in 0..block.len() {
                    for b in (a + 1)..block.len() {
                        edges.push((block[a], block[b]));
                    }
                }
            }
            Graph::from_edges(copies * d + 1, &edges)?
        }
        Family::CliqueBowtie(d) => generate(&Family::CliqueStar { d, copies: 2 }, seed)?,
        Family::CompleteMinusMatching(k) => {
            require(k >= 2 && k % 2 == 0, "complete_minus_matching requires even k >= 2")?;
            let mut edges = Vec::new();
            for u in 0..k {
                for v in (u + 1)..k {
                    // matching pairs (0,1), (2,3), ...
                    if !(v == u + 1 && u % 2 == 0) {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(k, &edges)?
        }
        Family::RandomRegular { n, d } => random_regular(n, d, seed)?,
        Family::Gnp { n, p } => {
            require((0.0..=1.0).contains(&p), "gnp requires 0 <= p <= 1")?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen::<f64>() < p {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, &edges)?
        }
        Family::TwoCliquesBridge(k) => {
            require(k >= 1, "two_cliques_bridge requires k >= 1")?;
            let mut edges = Vec::new();
            for base in [0, k] {
                for u in 0..k {
                    for v in (u + 1)..k {
                        edges.push((base + u, base + v));
                    }
                }
            }
            edges.push((k - 1, k)); // the bridge
            Graph::from_edges(2 * k, &edges)?
        }
    };
    g.check_invariants().expect("generator produced an invalid graph");
    Ok(g)
}

fn require(cond: bool, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidFamily(msg.into()))
    }
}

/// Pairing (configuration) model; clashing stubs are redrawn and the
/// whole attempt restarts only when no simple partner remains.
/// Adequate for d much smaller than n.
fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    require(d < n, "random_regular requires d < n")?;
    if n * d % 2 != 0 {
        return Err(Error::InvalidFamily("random_regular requires n*d even".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    'attempt: for _ in 0..PAIRING_RETRIES {
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
        stubs.shuffle(&mut rng);
        let mut g = Graph::empty(n);
        while let Some(u) = stubs.pop() {
            // redraw the partner on a clash; restart only when stuck
            let mut matched = false;
            for _ in 0..200 {
                let i = rng.gen_range(0..stubs.len());
                let v = stubs[i];
                if v != u && !g.has_edge(u, v) {
                    stubs.swap_remove(i);
                    g.set_edge(u, v);
                    matched = true;
                    break;
                }
            }
            if !matched {
                continue 'attempt;
            }
        }
        g.recount();
        return Ok(g);
    }
    Err(Error::PairingExhausted(PAIRING_RETRIES))
}

/// Standard Petersen labeling: outer C_5 on 0..5, inner pentagram on 5..10,
/// spokes i -- i+5.
pub fn petersen() -> Graph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    Graph::from_edges(10, &edges).unwrap()
}
