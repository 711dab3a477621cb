//! Central-random glued trees.
//!
//! Two complete `B`-ary trees of depth `n` face each other; the `B^n` leaves
//! on each side are joined by a uniformly random simple `B`-regular bipartite
//! graph. Nodes are numbered column-major: column `j` holds `B^j` nodes for
//! `j <= n` and `B^(2n+1-j)` nodes for `j > n`, the entrance root is node 0,
//! and the exit root is the last node.
//!
//! The quantum walk on such a graph never leaves the span of the uniform
//! column superpositions, which turns the dynamics into a weighted chain of
//! `2n + 2` sites; [`reduce_to_chain`] builds that chain directly.

use std::collections::HashSet;
use std::fmt;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{SparseSymmetric, SymTridiagonal};

/// Largest node count the builders accept; beyond this the dense state
/// vectors stop fitting comfortably in memory.
pub const NODE_BUDGET: u128 = 5_000_000;

/// Retry budget for the rejection sampler behind the random gluing.
const GLUING_ATTEMPTS: usize = 1000;

/// Parameters identifying one glued-tree instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GluedTreeParams {
    /// Branching factor `B >= 2`.
    pub branching: u32,
    /// Tree depth `n >= 1`.
    pub depth: u32,
    /// Seed for the random leaf-to-leaf connection.
    pub seed: u64,
}

fn check_shape(branching: u32, depth: u32) -> Result<()> {
    if branching < 2 {
        return Err(Error::parameter(format!("branching factor must be >= 2, got {branching}")));
    }
    if depth < 1 {
        return Err(Error::parameter(format!("tree depth must be >= 1, got {depth}")));
    }
    Ok(())
}

/// Total number of nodes: `2 (B^(n+1) - 1) / (B - 1)`.
pub fn node_count(branching: u32, depth: u32) -> Result<u128> {
    check_shape(branching, depth)?;
    let b = branching as u128;
    let power = b
        .checked_pow(depth + 1)
        .ok_or_else(|| Error::parameter(format!("B^(n+1) overflows for B={branching}, n={depth}")))?;
    Ok(2 * (power - 1) / (b - 1))
}

/// Nodes per column, entrance side first: `B^j` up to the left leaves, then
/// mirrored back down to the single exit node.
pub fn column_sizes(branching: u32, depth: u32) -> Result<Vec<u128>> {
    check_shape(branching, depth)?;
    let b = branching as u128;
    let n = depth as usize;
    let mut sizes = Vec::with_capacity(2 * n + 2);
    for j in 0..=n {
        let p = b
            .checked_pow(j as u32)
            .ok_or_else(|| Error::parameter(format!("B^{j} overflows for B={branching}")))?;
        sizes.push(p);
    }
    for j in (0..=n).rev() {
        sizes.push(sizes[j]);
    }
    Ok(sizes)
}

/// A concrete glued-tree instance.
///
/// The struct can also hold graphs loaded from tampered files, so structural
/// guarantees come from [`validate_gluing`] rather than the type itself.
#[derive(Debug, Clone, PartialEq)]
pub struct GluedTreeGraph {
    branching: u32,
    depth: u32,
    seed: u64,
    /// Column of each node; nondecreasing in the node id.
    column_of: Vec<u32>,
    /// Edges with `a < b`, sorted lexicographically.
    edges: Vec<(usize, usize)>,
}

impl GluedTreeGraph {
    pub fn branching(&self) -> u32 {
        self.branching
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn node_count(&self) -> usize {
        self.column_of.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn column_of(&self, node: usize) -> usize {
        self.column_of[node] as usize
    }

    /// Number of columns, `2 n + 2`.
    pub fn columns(&self) -> usize {
        2 * self.depth as usize + 2
    }

    pub fn entrance(&self) -> usize {
        0
    }

    pub fn exit(&self) -> usize {
        self.node_count() - 1
    }

    /// Node ids of column `j` as a contiguous range.
    pub fn column_nodes(&self, column: usize) -> std::ops::Range<usize> {
        let start = self.column_of.partition_point(|&c| (c as usize) < column);
        let end = self.column_of.partition_point(|&c| (c as usize) <= column);
        start..end
    }

    /// Adjacency matrix with unit weights.
    pub fn adjacency(&self) -> Result<SparseSymmetric> {
        SparseSymmetric::from_symmetric_triplets(
            self.node_count(),
            self.edges.iter().map(|&(a, b)| (a, b, 1.0)),
        )
    }

    /// Overlap of a node-amplitude vector with the normalized uniform
    /// column states: component `j` is `(1/sqrt(N_j)) * sum` of the
    /// amplitudes in column `j`.
    pub fn column_project(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        if amplitudes.len() != self.node_count() {
            return Err(Error::parameter(format!(
                "amplitude vector length {} does not match node count {}",
                amplitudes.len(),
                self.node_count()
            )));
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.columns()];
        for (node, &a) in amplitudes.iter().enumerate() {
            out[self.column_of[node] as usize] += a;
        }
        for j in 0..self.columns() {
            let size = self.column_nodes(j).len();
            if size > 0 {
                out[j] /= (size as f64).sqrt();
            }
        }
        Ok(out)
    }

    /// Assembles a graph from raw parts, checking only representability:
    /// ids in range, columns nondecreasing and within `0..2n+2`, endpoints
    /// distinct. Structural properties are left to [`validate_gluing`].
    pub fn from_parts(
        branching: u32,
        depth: u32,
        seed: u64,
        column_of: Vec<u32>,
        edges: Vec<(usize, usize)>,
    ) -> Result<Self> {
        check_shape(branching, depth)?;
        if column_of.is_empty() {
            return Err(Error::parameter("graph must contain at least one node"));
        }
        let columns = 2 * depth + 2;
        if column_of.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::parameter("node columns must be nondecreasing in the node id"));
        }
        if column_of.iter().any(|&c| c >= columns) {
            return Err(Error::parameter(format!(
                "column index out of range; depth {depth} allows columns 0..{columns}"
            )));
        }
        let count = column_of.len();
        let mut edges = edges;
        for e in edges.iter_mut() {
            if e.0 == e.1 {
                return Err(Error::parameter(format!("self-loop at node {}", e.0)));
            }
            if e.0 >= count || e.1 >= count {
                return Err(Error::parameter(format!(
                    "edge ({}, {}) references a node outside 0..{count}",
                    e.0, e.1
                )));
            }
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        Ok(GluedTreeGraph { branching, depth, seed, column_of, edges })
    }

    pub fn to_json_string(&self) -> Result<String> {
        serde_json::to_string_pretty(&GraphFile::from(self))
            .map_err(|e| Error::format(e.to_string()))
    }

    pub fn write_json<W: std::io::Write>(&self, mut writer: W) -> Result<()> {
        let text = self.to_json_string()?;
        writer.write_all(text.as_bytes())?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: GraphFile =
            serde_json::from_str(text).map_err(|e| Error::format(e.to_string()))?;
        file.into_graph()
    }

    pub fn read_json<R: std::io::Read>(mut reader: R) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        Self::from_json_str(&text)
    }
}

/// On-disk JSON layout: `{"B", "n", "seed", "nodes", "edges", "entrance",
/// "exit"}` with nodes listed as `{"id", "column"}` records.
#[derive(Serialize, Deserialize)]
struct GraphFile {
    #[serde(rename = "B")]
    branching: u32,
    #[serde(rename = "n")]
    depth: u32,
    seed: u64,
    nodes: Vec<NodeRecord>,
    edges: Vec<(usize, usize)>,
    entrance: usize,
    exit: usize,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: usize,
    column: u32,
}

impl From<&GluedTreeGraph> for GraphFile {
    fn from(g: &GluedTreeGraph) -> Self {
        GraphFile {
            branching: g.branching,
            depth: g.depth,
            seed: g.seed,
            nodes: g
                .column_of
                .iter()
                .enumerate()
                .map(|(id, &column)| NodeRecord { id, column })
                .collect(),
            edges: g.edges.clone(),
            entrance: g.entrance(),
            exit: g.exit(),
        }
    }
}

impl GraphFile {
    fn into_graph(self) -> Result<GluedTreeGraph> {
        let count = self.nodes.len();
        let mut column_of = vec![u32::MAX; count];
        for rec in &self.nodes {
            if rec.id >= count {
                return Err(Error::format(format!(
                    "node id {} out of range for {count} nodes",
                    rec.id
                )));
            }
            if column_of[rec.id] != u32::MAX {
                return Err(Error::format(format!("node id {} listed twice", rec.id)));
            }
            column_of[rec.id] = rec.column;
        }
        if column_of.contains(&u32::MAX) {
            return Err(Error::format("node ids must cover 0..count exactly"));
        }
        let graph =
            GluedTreeGraph::from_parts(self.branching, self.depth, self.seed, column_of, self.edges)
                .map_err(|e| Error::format(e.to_string()))?;
        if self.entrance != graph.entrance() || self.exit != graph.exit() {
            return Err(Error::format(format!(
                "entrance/exit must be node 0 and node {}, got {} and {}",
                graph.exit(),
                self.entrance,
                self.exit
            )));
        }
        Ok(graph)
    }
}

/// Builds a glued tree with a seeded random leaf connection.
///
/// Fails with a parameter error when the shape is out of range or the node
/// count exceeds [`NODE_BUDGET`], and with a generation error when the
/// rejection sampler cannot produce a simple gluing within its retry budget.
pub fn build_glued_tree(params: &GluedTreeParams) -> Result<GluedTreeGraph> {
    let total = node_count(params.branching, params.depth)?;
    if total > NODE_BUDGET {
        return Err(Error::parameter(format!(
            "graph with {total} nodes exceeds the {NODE_BUDGET}-node budget"
        )));
    }

    let b = params.branching as usize;
    let n = params.depth as usize;
    let sizes: Vec<usize> = column_sizes(params.branching, params.depth)?
        .into_iter()
        .map(|s| s as usize)
        .collect();
    let mut offsets = Vec::with_capacity(sizes.len() + 1);
    offsets.push(0usize);
    for &s in &sizes {
        offsets.push(offsets.last().unwrap() + s);
    }

    let mut column_of = Vec::with_capacity(total as usize);
    for (j, &s) in sizes.iter().enumerate() {
        column_of.extend(std::iter::repeat(j as u32).take(s));
    }

    let mut edges: Vec<(usize, usize)> = Vec::new();
    // Entrance-side tree: node k of column j parents nodes k*B..k*B+B of
    // column j+1.
    for j in 0..n {
        for k in 0..sizes[j] {
            let parent = offsets[j] + k;
            for c in 0..b {
                edges.push((parent, offsets[j + 1] + k * b + c));
            }
        }
    }
    // Exit-side tree, mirrored: node k of column j+1 parents nodes
    // k*B..k*B+B of column j.
    for j in (n + 1)..(2 * n + 1) {
        for k in 0..sizes[j + 1] {
            let parent = offsets[j + 1] + k;
            for c in 0..b {
                edges.push((offsets[j] + k * b + c, parent));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let glue = sample_gluing(b, sizes[n], &mut rng, GLUING_ATTEMPTS)?;
    for (left, right) in glue {
        edges.push((offsets[n] + left, offsets[n + 1] + right));
    }

    GluedTreeGraph::from_parts(params.branching, params.depth, params.seed, column_of, edges)
}

/// Draws a uniform simple `B`-regular bipartite graph on `leaves + leaves`
/// vertices by half-edge pairing, resampling whenever a parallel edge shows
/// up. Returns `(left, right)` index pairs.
fn sample_gluing(
    b: usize,
    leaves: usize,
    rng: &mut ChaCha8Rng,
    attempts: usize,
) -> Result<Vec<(usize, usize)>> {
    let mut right_stubs: Vec<usize> = (0..leaves).flat_map(|v| std::iter::repeat(v).take(b)).collect();
    let left_stubs: Vec<usize> = right_stubs.clone();
    let mut seen: HashSet<(usize, usize)> = HashSet::with_capacity(b * leaves);

    for _ in 0..attempts {
        right_stubs.shuffle(rng);
        seen.clear();
        let mut pairs = Vec::with_capacity(b * leaves);
        let mut simple = true;
        for (&left, &right) in left_stubs.iter().zip(&right_stubs) {
            if !seen.insert((left, right)) {
                simple = false;
                break;
            }
            pairs.push((left, right));
        }
        if simple {
            return Ok(pairs);
        }
    }
    Err(Error::Generation(format!(
        "no simple {b}-regular gluing found in {attempts} attempts; \
         try another seed or a smaller branching factor"
    )))
}

/// One structural defect found by [`validate_gluing`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GluingViolation {
    NodeCount { expected: u128, actual: usize },
    ColumnSize { column: usize, expected: u128, actual: usize },
    /// Edge endpoints are not in adjacent columns.
    EdgeSpan { a: usize, b: usize },
    ParallelEdge { a: usize, b: usize },
    /// Wrong number of neighbors in the column `toward`.
    Degree { node: usize, toward: usize, expected: u32, actual: u32 },
    Disconnected { unreachable: usize },
}

impl fmt::Display for GluingViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GluingViolation::NodeCount { expected, actual } => {
                write!(f, "node count {actual} differs from expected {expected}")
            }
            GluingViolation::ColumnSize { column, expected, actual } => {
                write!(f, "column {column} holds {actual} nodes, expected {expected}")
            }
            GluingViolation::EdgeSpan { a, b } => {
                write!(f, "edge ({a}, {b}) does not join adjacent columns")
            }
            GluingViolation::ParallelEdge { a, b } => {
                write!(f, "edge ({a}, {b}) appears more than once")
            }
            GluingViolation::Degree { node, toward, expected, actual } => {
                write!(
                    f,
                    "node {node} has {actual} neighbors in column {toward}, expected {expected}"
                )
            }
            GluingViolation::Disconnected { unreachable } => {
                write!(f, "{unreachable} nodes unreachable from the entrance")
            }
        }
    }
}

/// Outcome of a structural check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GluingReport {
    pub violations: Vec<GluingViolation>,
}

impl GluingReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks a graph against everything the construction promises: column
/// sizes, tree degrees, a simple `B`-regular gluing, and connectivity.
pub fn validate_gluing(graph: &GluedTreeGraph) -> GluingReport {
    let mut violations = Vec::new();
    let b = graph.branching;
    let n = graph.depth as usize;
    let count = graph.node_count();

    match node_count(graph.branching, graph.depth) {
        Ok(expected) if expected as usize != count => {
            violations.push(GluingViolation::NodeCount { expected, actual: count });
        }
        _ => {}
    }

    if let Ok(expected_sizes) = column_sizes(graph.branching, graph.depth) {
        for (j, &expected) in expected_sizes.iter().enumerate() {
            let actual = graph.column_nodes(j).len();
            if actual as u128 != expected {
                violations.push(GluingViolation::ColumnSize { column: j, expected, actual });
            }
        }
    }

    for pair in graph.edges.windows(2) {
        if pair[0] == pair[1] && violations.iter().all(|v| {
            !matches!(v, GluingViolation::ParallelEdge { a, b } if (*a, *b) == pair[0])
        }) {
            violations.push(GluingViolation::ParallelEdge { a: pair[0].0, b: pair[0].1 });
        }
    }

    // Count neighbors per (node, neighboring column), skipping edges that
    // already failed the span check.
    let columns = graph.columns();
    let mut toward_prev = vec![0u32; count];
    let mut toward_next = vec![0u32; count];
    for &(a, bn) in &graph.edges {
        let (ca, cb) = (graph.column_of(a), graph.column_of(bn));
        if ca.abs_diff(cb) != 1 {
            violations.push(GluingViolation::EdgeSpan { a, b: bn });
            continue;
        }
        let (lo, hi) = if ca < cb { (a, bn) } else { (bn, a) };
        toward_next[lo] += 1;
        toward_prev[hi] += 1;
    }
    for node in 0..count {
        let j = graph.column_of(node);
        let expected_prev = match j {
            0 => 0,
            _ if j <= n => 1,
            _ => b,
        };
        let expected_next = match j {
            _ if j < n => b,
            _ if j == n => b,
            _ if j < columns - 1 => 1,
            _ => 0,
        };
        if toward_prev[node] != expected_prev && j > 0 {
            violations.push(GluingViolation::Degree {
                node,
                toward: j - 1,
                expected: expected_prev,
                actual: toward_prev[node],
            });
        }
        if toward_next[node] != expected_next && j < columns - 1 {
            violations.push(GluingViolation::Degree {
                node,
                toward: j + 1,
                expected: expected_next,
                actual: toward_next[node],
            });
        }
    }

    // Connectivity from the entrance.
    let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); count];
    for &(a, bn) in &graph.edges {
        neighbors[a].push(bn);
        neighbors[bn].push(a);
    }
    let mut visited = vec![false; count];
    let mut queue = std::collections::VecDeque::new();
    visited[graph.entrance()] = true;
    queue.push_back(graph.entrance());
    let mut reached = 1usize;
    while let Some(v) = queue.pop_front() {
        for &w in &neighbors[v] {
            if !visited[w] {
                visited[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    if reached != count {
        violations.push(GluingViolation::Disconnected { unreachable: count - reached });
    }

    GluingReport { violations }
}

/// Hamiltonian of the column-space reduction: a `2n + 2` site chain with
/// zero diagonal, hopping `sqrt(B) * gamma` everywhere except `B * gamma`
/// across the central gluing bond.
pub fn reduce_to_chain(branching: u32, depth: u32, gamma: f64) -> Result<SymTridiagonal> {
    check_shape(branching, depth)?;
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(Error::parameter(format!("gamma must be positive and finite, got {gamma}")));
    }
    let n = depth as usize;
    let m = 2 * n + 2;
    let hop = (branching as f64).sqrt() * gamma;
    let mut off = vec![hop; m - 1];
    off[n] = branching as f64 * gamma;
    SymTridiagonal::new(vec![0.0; m], off)
}
