//! JSON report plumbing: serde helpers for exact rationals and vertex
//! sets, plus the versioned report envelope used by the CLI. Elapsed
//! times live under a separate "timing" key so that reports are
//! byte-identical across runs with the same seed.

use std::time::Duration;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use serde_json::json;

use crate::graph::VertexSet;
use crate::Rational;

pub mod rational_serde {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
    }
}

pub fn serialize_vertex_set<S: Serializer>(v: &VertexSet, s: S) -> Result<S::Ok, S::Error> {
    let verts = v.to_sorted_vec();
    let mut seq = s.serialize_seq(Some(verts.len()))?;
    for x in verts {
        seq.serialize_element(&x)?;
    }
    seq.end()
}

pub fn serialize_opt_vertex_set<S: Serializer>(
    v: &Option<VertexSet>,
    s: S,
) -> Result<S::Ok, S::Error> {
    match v {
        Some(set) => serialize_vertex_set(set, s),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Format, String> {
        match s {
            "json" => Ok(Format::Json),
            "text" => Ok(Format::Text),
            other => Err(format!("unknown format `{other}`, expected json or text")),
        }
    }
}

/// The versioned envelope every command emits.
pub fn render<T: Serialize>(
    command: &str,
    seed: u64,
    result: &T,
    elapsed: Duration,
    format: Format,
) -> String {
    let value = json!({
        "schema": "1",
        "command": command,
        "seed": seed,
        "result": serde_json::to_value(result).expect("report serializes"),
        "timing": { "elapsed_ms": elapsed.as_millis() as u64 },
    });
    match format {
        Format::Json => value.to_string(),
        Format::Text => serde_json::to_string_pretty(&value).expect("report serializes"),
    }
}
