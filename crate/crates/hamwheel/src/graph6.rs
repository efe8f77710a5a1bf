//! graph6 encoding and a plain edge-list text format.
//!
//! graph6 packs the upper adjacency triangle column-major into 6-bit
//! groups, each biased by 63. Orders up to 62 use a single size byte;
//! larger orders use the 4-byte form introduced by `~`.

use crate::error::{Error, Result};
use crate::graph::Graph;
use thiserror::Error;

pub const HEADER: &str = ">>graph6<<";

#[derive(Debug, Error, PartialEq, Eq)]
pub enum Graph6Error {
    #[error("byte 0x{0:02x} at position {1} is outside the graph6 range 63..=126")]
    OutOfRangeByte(u8, usize),
    #[error("input length {got} does not match the {want} bytes required for order {n}")]
    MalformedLength { n: usize, want: usize, got: usize },
    #[error("padding bits after the adjacency triangle are nonzero")]
    TrailingBits,
    #[error("empty input")]
    Empty,
    #[error("order {0} exceeds the supported maximum {1}")]
    OrderTooLarge(u64, u64),
}

const MAX_N: u64 = 258_047; // largest order of the 4-byte size form

fn triangle_bytes(n: usize) -> usize {
    (n * n.saturating_sub(1) / 2).div_ceil(6)
}

/// Canonical graph6 encoding: short size form for n <= 62, 4-byte form
/// otherwise.
pub fn encode(g: &Graph) -> String {
    let n = g.n();
    let mut out = Vec::new();
    if n <= 62 {
        out.push(n as u8 + 63);
    } else {
        assert!((n as u64) <= MAX_N, "order {n} exceeds graph6 support");
        out.push(126);
        out.push(((n >> 12) & 0x3f) as u8 + 63);
        out.push(((n >> 6) & 0x3f) as u8 + 63);
        out.push((n & 0x3f) as u8 + 63);
    }
    let mut group = 0u8;
    let mut filled = 0;
    for v in 1..n {
        for u in 0..v {
            group = (group << 1) | u8::from(g.has_edge(u, v));
            filled += 1;
            if filled == 6 {
                out.push(group + 63);
                group = 0;
                filled = 0;
            }
        }
    }
    if filled > 0 {
        out.push((group << (6 - filled)) + 63);
    }
    String::from_utf8(out).unwrap()
}

/// Decode a graph6 byte string; the `>>graph6<<` header is optional.
pub fn decode(input: &str) -> Result<Graph> {
    let bytes = input
        .strip_prefix(HEADER)
        .unwrap_or(input)
        .trim_end_matches(['\n', '\r'])
        .as_bytes();
    if bytes.is_empty() {
        return Err(Graph6Error::Empty.into());
    }
    for (i, &b) in bytes.iter().enumerate() {
        if !(63..=126).contains(&b) {
            return Err(Graph6Error::OutOfRangeByte(b, i).into());
        }
    }
    let (n, data) = if bytes[0] == 126 {
        if bytes.len() >= 2 && bytes[1] == 126 {
            // 8-byte size form for n > 258047: out of scope here
            let mut n: u64 = 0;
            if bytes.len() < 8 {
                return Err(Graph6Error::MalformedLength { n: 0, want: 8, got: bytes.len() }.into());
            }
            for &b in &bytes[2..8] {
                n = (n << 6) | u64::from(b - 63);
            }
            return Err(Graph6Error::OrderTooLarge(n, MAX_N).into());
        }
        if bytes.len() < 4 {
            return Err(Graph6Error::MalformedLength { n: 0, want: 4, got: bytes.len() }.into());
        }
        let n = (u64::from(bytes[1] - 63) << 12)
            | (u64::from(bytes[2] - 63) << 6)
            | u64::from(bytes[3] - 63);
        (n as usize, &bytes[4..])
    } else {
        ((bytes[0] - 63) as usize, &bytes[1..])
    };
    let want = triangle_bytes(n);
    if data.len() != want {
        return Err(Graph6Error::MalformedLength { n, want, got: data.len() }.into());
    }

    let mut g = Graph::empty(n);
    let mut bit_idx = 0usize;
    for v in 1..n {
        for u in 0..v {
            let byte = data[bit_idx / 6] - 63;
            if byte >> (5 - bit_idx % 6) & 1 == 1 {
                g.set_edge(u, v);
            }
            bit_idx += 1;
        }
    }
    // any bits past the triangle must be zero padding
    if want > 0 {
        let used_in_last = bit_idx - (want - 1) * 6;
        let last = data[want - 1] - 63;
        if used_in_last < 6 && last & ((1 << (6 - used_in_last)) - 1) != 0 {
            return Err(Graph6Error::TrailingBits.into());
        }
    }
    g.recount();
    Ok(g)
}

/// Plain text edge list: first line `n m`, then one `u v` pair per line.
pub fn encode_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.m());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn decode_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| Error::EdgeList("empty input".into()))?;
    let mut it = header.split_whitespace();
    let n: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::EdgeList("bad n in header".into()))?;
    let m: usize = it
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::EdgeList("bad m in header".into()))?;
    let mut edges = Vec::with_capacity(m);
    for line in lines {
        let mut it = line.split_whitespace();
        let u: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::EdgeList(format!("bad edge line `{line}`")))?;
        let v: usize = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::EdgeList(format!("bad edge line `{line}`")))?;
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(Error::EdgeList(format!(
            "header claims {m} edges, found {}",
            edges.len()
        )));
    }
    Graph::from_edges(n, &edges)
}
