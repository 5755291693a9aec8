//! Text formats: graph6 (n <= 62) and 1-indexed edge lists.
//!
//! graph6 here is the headerless small-n form: one byte 63+n, then the upper
//! adjacency triangle in column-major bit order (x01, x02, x12, x03, ...),
//! packed big-endian into 6-bit groups, each offset by 63.

use crate::error::GraphError;
use crate::graph::LabeledGraph;

/// Encode using the sorted vertex order as positions 0..n-1.
pub fn to_graph6(g: &LabeledGraph) -> Result<String, GraphError> {
    let n = g.len();
    if n > 62 {
        return Err(GraphError::Graph6TooLarge(n));
    }
    let verts = g.vertices();
    let mut bits: Vec<bool> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for j in 1..n {
        for i in 0..j {
            bits.push(g.has_edge(verts[i], verts[j]));
        }
    }
    let mut out = String::new();
    out.push((63 + n as u8) as char);
    for chunk in bits.chunks(6) {
        let mut val = 0u8;
        for (b, &bit) in chunk.iter().enumerate() {
            if bit {
                val |= 1 << (5 - b);
            }
        }
        out.push((63 + val) as char);
    }
    Ok(out)
}

/// Decode to a graph on labels 1..=n.
pub fn from_graph6(s: &str) -> Result<LabeledGraph, GraphError> {
    let bytes = s.trim().as_bytes();
    if bytes.is_empty() {
        return Err(GraphError::BadGraph6("empty string".into()));
    }
    if bytes[0] < 63 {
        return Err(GraphError::BadGraph6("bad leading byte".into()));
    }
    let n = (bytes[0] - 63) as usize;
    if n > 62 {
        return Err(GraphError::Graph6TooLarge(n));
    }
    let nbits = n * n.saturating_sub(1) / 2;
    let need = nbits.div_ceil(6);
    if bytes.len() != 1 + need {
        return Err(GraphError::BadGraph6(format!(
            "expected {} data bytes for n={}, got {}",
            need,
            n,
            bytes.len() - 1
        )));
    }
    let mut bits = Vec::with_capacity(nbits);
    for &b in &bytes[1..] {
        if !(63..=126).contains(&b) {
            return Err(GraphError::BadGraph6(format!("byte {b} out of range")));
        }
        let val = b - 63;
        for k in 0..6 {
            bits.push(val >> (5 - k) & 1 == 1);
        }
    }
    if bits[nbits..].iter().any(|&b| b) {
        return Err(GraphError::BadGraph6("nonzero padding".into()));
    }
    let mut g = LabeledGraph::new((1..=n as u32).collect());
    let mut idx = 0;
    for j in 1..n {
        for i in 0..j {
            if bits[idx] {
                g.add_edge(i as u32 + 1, j as u32 + 1);
            }
            idx += 1;
        }
    }
    Ok(g)
}

/// Edge list: one "u v" line per edge, 1-indexed labels, terminated by the
/// end of the block. Isolated vertices are implied by the caller's n.
pub fn to_edge_list(g: &LabeledGraph) -> String {
    let mut out = String::new();
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// Parse an edge list block onto the vertex set [n].
pub fn from_edge_list(s: &str, n: u32) -> Result<LabeledGraph, GraphError> {
    let mut g = LabeledGraph::new((1..=n).collect());
    for line in s.lines() {
        let line = line.trim();
        if line.is_empty() {
            break;
        }
        let mut it = line.split_whitespace();
        let u: u32 = it
            .next()
            .ok_or_else(|| GraphError::BadEdgeList(line.into()))?
            .parse()
            .map_err(|_| GraphError::BadEdgeList(line.into()))?;
        let v: u32 = it
            .next()
            .ok_or_else(|| GraphError::BadEdgeList(line.into()))?
            .parse()
            .map_err(|_| GraphError::BadEdgeList(line.into()))?;
        if it.next().is_some() || u == v || u == 0 || v == 0 || u > n || v > n {
            return Err(GraphError::BadEdgeList(line.into()));
        }
        g.add_edge(u, v);
    }
    Ok(g)
}
