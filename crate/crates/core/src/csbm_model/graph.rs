use std::io::{BufRead, Write};

use rand::Rng;

use super::{ModelParams, Partition};
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, TrialRng};

/// Undirected simple graph in compressed sparse row form. Each row lists its
/// neighbours in increasing order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparseGraph {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<u32>,
    degrees: Vec<usize>,
    edge_count: usize,
}

impl SparseGraph {
    /// Builds a graph from an undirected edge list. Each edge must appear
    /// once, in either orientation.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n > u32::MAX as usize {
            return Err(Error::SizeGuard(format!(
                "n = {n} exceeds the u32 index range"
            )));
        }
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for n = {n}"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
        }
        let graph = Self::from_edges_unchecked(n, edges.iter().copied());
        for v in 0..n {
            if graph.neighbors(v).windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::invalid(format!("duplicate edge at vertex {v}")));
            }
        }
        Ok(graph)
    }

    fn from_edges_unchecked(n: usize, edges: impl Iterator<Item = (usize, usize)> + Clone) -> Self {
        let mut degrees = vec![0usize; n];
        let mut edge_count = 0;
        for (u, v) in edges.clone() {
            degrees[u] += 1;
            degrees[v] += 1;
            edge_count += 1;
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        row_offsets.push(0);
        for d in &degrees {
            row_offsets.push(row_offsets.last().unwrap() + d);
        }
        let mut fill = row_offsets[..n].to_vec();
        let mut col_indices = vec![0u32; 2 * edge_count];
        for (u, v) in edges {
            col_indices[fill[u]] = v as u32;
            fill[u] += 1;
            col_indices[fill[v]] = u as u32;
            fill[v] += 1;
        }
        for v in 0..n {
            col_indices[row_offsets[v]..row_offsets[v + 1]].sort_unstable();
        }
        Self {
            n,
            row_offsets,
            col_indices,
            degrees,
            edge_count,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn degrees(&self) -> &[usize] {
        &self.degrees
    }

    pub fn degree(&self, v: usize) -> usize {
        self.degrees[v]
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.col_indices[self.row_offsets[v]..self.row_offsets[v + 1]]
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[u32] {
        &self.col_indices
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors(u).binary_search(&(v as u32)).is_ok()
    }

    /// Empirical average degree `2|E| / n`.
    pub fn average_degree(&self) -> f64 {
        2.0 * self.edge_count as f64 / self.n as f64
    }

    pub fn min_degree(&self) -> Option<(usize, usize)> {
        self.degrees
            .iter()
            .copied()
            .enumerate()
            .min_by_key(|&(_, d)| d)
    }

    /// Edges `(u, v)` with `u < v` in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// `y = A x`
    pub fn adjacency_matvec(&self, x: &[f64], y: &mut [f64]) {
        for (v, yv) in y.iter_mut().enumerate() {
            *yv = self.neighbors(v).iter().map(|&u| x[u as usize]).sum();
        }
    }
}

/// Calls `f(i)` for every index `i < len` selected independently with
/// probability `prob`, using geometric gaps between selected indices.
fn bernoulli_indices(len: usize, prob: f64, rng: &mut TrialRng, mut f: impl FnMut(usize)) {
    if len == 0 || prob <= 0.0 {
        return;
    }
    if prob >= 1.0 {
        (0..len).for_each(f);
        return;
    }
    let log_keep = (-prob).ln_1p();
    let mut pos = 0usize;
    loop {
        let u: f64 = rng.random();
        let gap = ((1.0 - u).ln() / log_keep).floor();
        if gap >= (len - pos) as f64 {
            return;
        }
        pos += gap as usize;
        f(pos);
        pos += 1;
        if pos >= len {
            return;
        }
    }
}

/// Samples the CSBM graph: each unordered pair `{i, j}` is an edge with
/// probability `p` inside a class and `q` across classes, independently.
pub fn sample_graph(params: &ModelParams, partition: &Partition, seed: u64) -> Result<SparseGraph> {
    params.validate()?;
    Error::check_dim(params.n, partition.n())?;
    let n = params.n;
    let labels = partition.as_slice();
    let in_s: Vec<usize> = (0..n).filter(|&v| labels[v] == 1).collect();
    let in_t: Vec<usize> = (0..n).filter(|&v| labels[v] != 1).collect();

    let mut rng = rng_from_seed(seed);
    let mut edges = Vec::with_capacity(params.expected_edges().ceil() as usize + 16);
    for (i, &label) in labels.iter().enumerate() {
        let (own, other) = if label == 1 {
            (&in_s, &in_t)
        } else {
            (&in_t, &in_s)
        };
        for (list, prob) in [(own, params.p), (other, params.q)] {
            let start = list.partition_point(|&j| j <= i);
            let tail = &list[start..];
            bernoulli_indices(tail.len(), prob, &mut rng, |k| edges.push((i, tail[k])));
        }
    }
    Ok(SparseGraph::from_edges_unchecked(n, edges.iter().copied()))
}

/// Writes the header `n m_edges` followed by one `u v` line per edge, `u < v`.
pub fn write_edge_list<W: Write>(graph: &SparseGraph, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{} {}", graph.n(), graph.edge_count())?;
    for (u, v) in graph.edges() {
        writeln!(w, "{u} {v}")?;
    }
    w.flush()
}

pub fn read_edge_list<R: BufRead>(reader: R) -> Result<SparseGraph> {
    let parse_err = |line: usize, message: String| Error::Parse {
        location: format!("edge list line {line}"),
        message,
    };
    let mut lines = reader.lines().enumerate();
    let parse_pair = |text: &str, line: usize| -> Result<(usize, usize)> {
        let mut it = text.split_whitespace();
        let mut next = || -> Result<usize> {
            it.next()
                .ok_or_else(|| parse_err(line, "expected two integers".into()))?
                .parse::<usize>()
                .map_err(|e| parse_err(line, e.to_string()))
        };
        let pair = (next()?, next()?);
        if it.next().is_some() {
            return Err(parse_err(line, "trailing fields".into()));
        }
        Ok(pair)
    };

    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "missing header".into()))?;
    let header = header.map_err(|e| Error::io("<edge list>", e))?;
    let (n, m) = parse_pair(&header, 1)?;
    let mut edges = Vec::with_capacity(m);
    for (i, line) in lines {
        let line = line.map_err(|e| Error::io("<edge list>", e))?;
        if line.trim().is_empty() {
            continue;
        }
        let (u, v) = parse_pair(&line, i + 1)?;
        if u >= v {
            return Err(parse_err(i + 1, format!("expected u < v, got {u} {v}")));
        }
        edges.push((u, v));
    }
    if edges.len() != m {
        return Err(parse_err(
            1,
            format!("header announces {m} edges, found {}", edges.len()),
        ));
    }
    SparseGraph::from_edges(n, &edges)
}
