//! Noncompact metric graphs and the topological quantities the existence
//! theory keys on: terminal points, bridges, cycle coverings, compact core,
//! and the four-regime classification.
//!
//! A graph is a finite multigraph (self-loops and parallel edges allowed)
//! whose edges carry positive lengths; "half-lines" are unbounded edges with
//! exactly one finite endpoint. At least one half-line is required, so the
//! graph is noncompact. Infinity is never a vertex of the metric graph; it
//! only appears as the special merge vertex of [`MetricGraph::compactify`].

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// Endpoints of an edge. A half-line has one finite endpoint and infinite
/// length; a finite edge is identified with `[0, length]`, coordinate 0 at
/// `from`. Self-loops carry two distinct coordinates 0 and `length` mapped to
/// the same vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EdgeEnds {
    Finite {
        from: VertexId,
        to: VertexId,
        length: f64,
    },
    HalfLine {
        origin: VertexId,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub name: String,
    pub ends: EdgeEnds,
}

impl Edge {
    pub fn is_half_line(&self) -> bool {
        matches!(self.ends, EdgeEnds::HalfLine { .. })
    }

    pub fn is_self_loop(&self) -> bool {
        matches!(self.ends, EdgeEnds::Finite { from, to, .. } if from == to)
    }

    /// Length of a finite edge; `None` for half-lines.
    pub fn length(&self) -> Option<f64> {
        match self.ends {
            EdgeEnds::Finite { length, .. } => Some(length),
            EdgeEnds::HalfLine { .. } => None,
        }
    }

    /// Finite endpoints: both for a finite edge, one for a half-line.
    pub fn finite_endpoints(&self) -> (VertexId, Option<VertexId>) {
        match self.ends {
            EdgeEnds::Finite { from, to, .. } => (from, Some(to)),
            EdgeEnds::HalfLine { origin } => (origin, None),
        }
    }
}

/// A connected noncompact metric graph.
///
/// Immutable after construction; all operations are pure. Construct via
/// [`GraphBuilder`] or [`MetricGraph::parse`], both of which validate the
/// invariants (connectivity, at least one half-line, positive finite edge
/// lengths, no isolated vertex).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricGraph {
    vertex_names: Vec<String>,
    edges: Vec<Edge>,
}

/// One of the four mutually exclusive topology regimes, with the
/// witnesses used to decide it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyClass {
    pub tag: TopologyTag,
    pub terminal_points: Vec<VertexId>,
    pub bridges: Vec<EdgeId>,
    pub half_line_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TopologyTag {
    /// (a) the graph has a terminal point (a tip).
    Tip,
    /// (b) the graph admits a cycle covering (empty bridge set).
    CycleCovered,
    /// (c) exactly one half-line and no terminal point.
    OneHalfLineNoTip,
    /// (d) everything else.
    Other,
}

impl TopologyTag {
    pub fn case_letter(self) -> char {
        match self {
            TopologyTag::Tip => 'a',
            TopologyTag::CycleCovered => 'b',
            TopologyTag::OneHalfLineNoTip => 'c',
            TopologyTag::Other => 'd',
        }
    }
}

impl fmt::Display for TopologyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            TopologyTag::Tip => "Tip",
            TopologyTag::CycleCovered => "CycleCovered",
            TopologyTag::OneHalfLineNoTip => "OneHalfLineNoTip",
            TopologyTag::Other => "Other",
        };
        f.write_str(s)
    }
}

/// The multigraph obtained by merging all infinity points into one special
/// vertex with index `omega`.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactifiedGraph {
    pub node_count: usize,
    pub omega: usize,
    /// (node a, node b, originating edge)
    pub edges: Vec<(usize, usize, EdgeId)>,
}

impl CompactifiedGraph {
    pub fn degree(&self, node: usize) -> usize {
        self.edges
            .iter()
            .map(|&(a, b, _)| (a == node) as usize + (b == node) as usize)
            .sum()
    }
}

/// The graph left after removing the interior of every half-line. Vertices
/// are preserved; only finite edges remain. May have no edges at all.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactCore {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<(EdgeId, Edge)>,
}

#[derive(Debug, Default)]
pub struct GraphBuilder {
    vertex_names: Vec<String>,
    edges: Vec<Edge>,
}

impl GraphBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(&mut self, name: impl Into<String>) -> VertexId {
        self.vertex_names.push(name.into());
        VertexId(self.vertex_names.len() - 1)
    }

    pub fn edge(&mut self, name: impl Into<String>, from: VertexId, to: VertexId, length: f64) -> EdgeId {
        self.edges.push(Edge {
            name: name.into(),
            ends: EdgeEnds::Finite { from, to, length },
        });
        EdgeId(self.edges.len() - 1)
    }

    pub fn half_line(&mut self, name: impl Into<String>, origin: VertexId) -> EdgeId {
        self.edges.push(Edge {
            name: name.into(),
            ends: EdgeEnds::HalfLine { origin },
        });
        EdgeId(self.edges.len() - 1)
    }

    pub fn build(self) -> Result<MetricGraph, GraphError> {
        let g = MetricGraph {
            vertex_names: self.vertex_names,
            edges: self.edges,
        };
        g.validate()?;
        Ok(g)
    }
}

impl MetricGraph {
    pub fn builder() -> GraphBuilder {
        GraphBuilder::new()
    }

    fn validate(&self) -> Result<(), GraphError> {
        if self.vertex_names.is_empty() {
            return Err(GraphError::Invalid("graph has no vertices".into()));
        }
        let mut seen = BTreeSet::new();
        for name in &self.vertex_names {
            if !seen.insert(name.clone()) {
                return Err(GraphError::Invalid(format!("duplicate vertex name '{name}'")));
            }
        }
        let mut edge_names = BTreeSet::new();
        for e in &self.edges {
            if !edge_names.insert(e.name.clone()) {
                return Err(GraphError::Invalid(format!("duplicate edge name '{}'", e.name)));
            }
            match e.ends {
                EdgeEnds::Finite { from, to, length } => {
                    for v in [from, to] {
                        if v.0 >= self.vertex_names.len() {
                            return Err(GraphError::Invalid(format!(
                                "edge '{}' references unknown vertex {v}",
                                e.name
                            )));
                        }
                    }
                    if !(length.is_finite() && length > 0.0) {
                        return Err(GraphError::Invalid(format!(
                            "edge '{}' has nonpositive or nonfinite length {length}",
                            e.name
                        )));
                    }
                }
                EdgeEnds::HalfLine { origin } => {
                    if origin.0 >= self.vertex_names.len() {
                        return Err(GraphError::Invalid(format!(
                            "half-line '{}' references unknown vertex {origin}",
                            e.name
                        )));
                    }
                }
            }
        }
        if self.half_line_count() == 0 {
            return Err(GraphError::Invalid(
                "graph is compact: at least one half-line is required".into(),
            ));
        }
        for v in self.vertices() {
            if self.degree(v) == 0 {
                return Err(GraphError::Invalid(format!(
                    "vertex '{}' is isolated",
                    self.vertex_name(v)
                )));
            }
        }
        // Connectivity of the metric space: half-lines dangle, so it reduces
        // to connectivity of the vertex set under finite edges.
        let n = self.vertex_names.len();
        let mut dsu = Dsu::new(n);
        for e in &self.edges {
            if let EdgeEnds::Finite { from, to, .. } = e.ends {
                dsu.union(from.0, to.0);
            }
        }
        let root = dsu.find(0);
        for v in 1..n {
            if dsu.find(v) != root {
                return Err(GraphError::Invalid(format!(
                    "graph is disconnected: vertex '{}' is not reachable from '{}'",
                    self.vertex_names[v], self.vertex_names[0]
                )));
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> {
        (0..self.vertex_names.len()).map(VertexId)
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<VertexId> {
        self.vertex_names.iter().position(|n| n == name).map(VertexId)
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, &Edge)> {
        self.edges.iter().enumerate().map(|(i, e)| (EdgeId(i), e))
    }

    pub fn half_line_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_half_line()).count()
    }

    pub fn half_lines(&self) -> impl Iterator<Item = (EdgeId, VertexId)> + '_ {
        self.edges.iter().enumerate().filter_map(|(i, e)| match e.ends {
            EdgeEnds::HalfLine { origin } => Some((EdgeId(i), origin)),
            _ => None,
        })
    }

    /// Degree in the combinatorial graph: self-loops count twice, a half-line
    /// counts once at its origin.
    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .map(|e| match e.ends {
                EdgeEnds::Finite { from, to, .. } => (from == v) as usize + (to == v) as usize,
                EdgeEnds::HalfLine { origin } => (origin == v) as usize,
            })
            .sum()
    }

    /// All vertices of degree one. Infinity endpoints are not points of the
    /// graph and never count.
    pub fn terminal_points(&self) -> BTreeSet<VertexId> {
        self.vertices().filter(|&v| self.degree(v) == 1).collect()
    }

    /// A finite edge one of whose endpoints is a terminal point, or a
    /// half-line whose origin is terminal (the `R+` case).
    pub fn is_terminal_edge(&self, e: EdgeId) -> bool {
        let terminals = self.terminal_points();
        match self.edges[e.0].ends {
            EdgeEnds::Finite { from, to, .. } => terminals.contains(&from) || terminals.contains(&to),
            EdgeEnds::HalfLine { origin } => terminals.contains(&origin),
        }
    }

    /// Merge all infinity points into one special vertex. The special vertex
    /// has degree equal to the number of half-lines; parallel edges and
    /// self-loops are preserved.
    pub fn compactify(&self) -> CompactifiedGraph {
        let omega = self.vertex_names.len();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(i, e)| match e.ends {
                EdgeEnds::Finite { from, to, .. } => (from.0, to.0, EdgeId(i)),
                EdgeEnds::HalfLine { origin } => (origin.0, omega, EdgeId(i)),
            })
            .collect();
        CompactifiedGraph {
            node_count: omega + 1,
            omega,
            edges,
        }
    }

    /// Edges lying on no cycle of the compactified multigraph.
    ///
    /// Iterative DFS bridge finding, indexed by edge instance so that parallel
    /// edges and self-loops are handled correctly (neither is ever a bridge).
    pub fn bridge_set(&self) -> BTreeSet<EdgeId> {
        let comp = self.compactify();
        let n = comp.node_count;
        // adjacency: (neighbor, edge index into comp.edges)
        let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (idx, &(a, b, _)) in comp.edges.iter().enumerate() {
            if a == b {
                continue; // self-loops are cycles by themselves
            }
            adj[a].push((b, idx));
            adj[b].push((a, idx));
        }

        let mut visit = vec![usize::MAX; n];
        let mut low = vec![usize::MAX; n];
        let mut clock = 0;
        let mut bridges = BTreeSet::new();
        // stack frames: (node, entering edge idx, adjacency cursor)
        let mut stack: Vec<(usize, usize, usize)> = Vec::new();

        for start in 0..n {
            if visit[start] != usize::MAX {
                continue;
            }
            visit[start] = clock;
            low[start] = clock;
            clock += 1;
            stack.push((start, usize::MAX, 0));
            while !stack.is_empty() {
                let frame = stack.len() - 1;
                let (node, enter) = (stack[frame].0, stack[frame].1);
                if stack[frame].2 < adj[node].len() {
                    let (next, eidx) = adj[node][stack[frame].2];
                    stack[frame].2 += 1;
                    if eidx == enter {
                        continue; // the edge we came through; parallels get other indices
                    }
                    if visit[next] == usize::MAX {
                        visit[next] = clock;
                        low[next] = clock;
                        clock += 1;
                        stack.push((next, eidx, 0));
                    } else {
                        low[node] = low[node].min(visit[next]);
                    }
                } else {
                    stack.pop();
                    if let Some(&(parent, _, _)) = stack.last() {
                        low[parent] = low[parent].min(low[node]);
                        if low[node] > visit[parent] {
                            bridges.insert(comp.edges[enter].2);
                        }
                    }
                }
            }
        }
        bridges
    }

    /// True iff the bridge set of the compactified multigraph is empty, which
    /// is equivalent to the whole graph being covered by cycles (loops or
    /// unbounded paths joining two distinct infinity points).
    pub fn has_cycle_covering(&self) -> bool {
        self.bridge_set().is_empty()
    }

    /// Apply the regime tests in order (a), (b), (c), else (d). The first two
    /// are mutually incompatible, so the order only fixes determinism.
    pub fn classify(&self) -> TopologyClass {
        let terminal_points: Vec<VertexId> = self.terminal_points().into_iter().collect();
        let bridges: Vec<EdgeId> = self.bridge_set().into_iter().collect();
        let half_line_count = self.half_line_count();
        let tag = if !terminal_points.is_empty() {
            TopologyTag::Tip
        } else if bridges.is_empty() {
            TopologyTag::CycleCovered
        } else if half_line_count == 1 {
            TopologyTag::OneHalfLineNoTip
        } else {
            TopologyTag::Other
        };
        TopologyClass {
            tag,
            terminal_points,
            bridges,
            half_line_count,
        }
    }

    /// Remove the interior of every half-line. Vertices are preserved.
    pub fn compact_core(&self) -> CompactCore {
        CompactCore {
            vertices: self.vertices().collect(),
            edges: self
                .edges()
                .filter(|(_, e)| !e.is_half_line())
                .map(|(id, e)| (id, e.clone()))
                .collect(),
        }
    }

    /// Total length of the compact core.
    pub fn core_length(&self) -> f64 {
        self.edges.iter().filter_map(|e| e.length()).sum()
    }

    /// Length of the shortest loop (cycle of finite edges, homeomorphic image
    /// of the circle). Cycles through infinity do not count. `None` if the
    /// finite part is a forest.
    pub fn shortest_loop_length(&self) -> Option<f64> {
        let n = self.vertex_names.len();
        let finite: Vec<(usize, usize, f64, usize)> = self
            .edges
            .iter()
            .enumerate()
            .filter_map(|(i, e)| match e.ends {
                EdgeEnds::Finite { from, to, length } => Some((from.0, to.0, length, i)),
                _ => None,
            })
            .collect();
        let mut best: Option<f64> = None;
        let mut upd = |c: f64| {
            best = Some(match best {
                Some(b) => b.min(c),
                None => c,
            })
        };
        for &(a, b, len, skip) in &finite {
            if a == b {
                upd(len);
                continue;
            }
            // shortest a-b path avoiding this edge instance (Dijkstra on a
            // graph this small needs no heap tuning)
            let mut dist = vec![f64::INFINITY; n];
            let mut done = vec![false; n];
            dist[a] = 0.0;
            loop {
                let mut u = usize::MAX;
                let mut du = f64::INFINITY;
                for v in 0..n {
                    if !done[v] && dist[v] < du {
                        du = dist[v];
                        u = v;
                    }
                }
                if u == usize::MAX {
                    break;
                }
                done[u] = true;
                for &(x, y, l, idx) in &finite {
                    if idx == skip || x == y {
                        continue;
                    }
                    let other = if x == u {
                        y
                    } else if y == u {
                        x
                    } else {
                        continue;
                    };
                    if du + l < dist[other] {
                        dist[other] = du + l;
                    }
                }
            }
            if dist[b].is_finite() {
                upd(dist[b] + len);
            }
        }
        best
    }

    /// Split a finite edge at parameter `t in (0,1)` of its length, inserting
    /// a new degree-2 vertex. Used to test subdivision invariance.
    pub fn subdivide_edge(&self, e: EdgeId, t: f64) -> Result<MetricGraph, GraphError> {
        let edge = &self.edges[e.0];
        let EdgeEnds::Finite { from, to, length } = edge.ends else {
            return Err(GraphError::Invalid(format!(
                "cannot subdivide half-line '{}'",
                edge.name
            )));
        };
        if !(0.0 < t && t < 1.0) {
            return Err(GraphError::Invalid(format!("subdivision parameter {t} out of (0,1)")));
        }
        let mut vertex_names = self.vertex_names.clone();
        let mid_name = format!("{}_mid", edge.name);
        vertex_names.push(mid_name);
        let mid = VertexId(vertex_names.len() - 1);
        let mut edges = Vec::with_capacity(self.edges.len() + 1);
        for (i, old) in self.edges.iter().enumerate() {
            if i == e.0 {
                edges.push(Edge {
                    name: format!("{}_a", old.name),
                    ends: EdgeEnds::Finite {
                        from,
                        to: mid,
                        length: length * t,
                    },
                });
                edges.push(Edge {
                    name: format!("{}_b", old.name),
                    ends: EdgeEnds::Finite {
                        from: mid,
                        to,
                        length: length * (1.0 - t),
                    },
                });
            } else {
                edges.push(old.clone());
            }
        }
        let g = MetricGraph { vertex_names, edges };
        g.validate()?;
        Ok(g)
    }

    /// Render the graph in the description format accepted by
    /// [`MetricGraph::parse`]. Lengths round-trip exactly.
    pub fn to_description(&self) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        for name in &self.vertex_names {
            let _ = writeln!(s, "vertex {name}");
        }
        for e in &self.edges {
            match e.ends {
                EdgeEnds::Finite { from, to, length } => {
                    let mut buf = ryu_like(length);
                    if !buf.contains('.') && !buf.contains('e') && !buf.contains('E') {
                        buf.push_str(".0");
                    }
                    let _ = writeln!(
                        s,
                        "edge {} {} {} {buf}",
                        e.name, self.vertex_names[from.0], self.vertex_names[to.0]
                    );
                }
                EdgeEnds::HalfLine { origin } => {
                    let _ = writeln!(s, "edge {} {} INF INF", e.name, self.vertex_names[origin.0]);
                }
            }
        }
        s
    }

    /// Parse the structured-text graph description format:
    ///
    /// ```text
    /// # comment
    /// vertex <name>
    /// edge <name> <from> <to|INF> <length|INF>
    /// ```
    pub fn parse(text: &str) -> Result<MetricGraph, GraphError> {
        let mut builder = GraphBuilder::new();
        let mut names: Vec<String> = Vec::new();
        let err = |line: usize, msg: String| GraphError::Parse { line, msg };
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tok: Vec<&str> = line.split_whitespace().collect();
            match tok[0] {
                "vertex" => {
                    if tok.len() != 2 {
                        return Err(err(line_no, format!("expected 'vertex <name>', got '{line}'")));
                    }
                    if names.iter().any(|n| n == tok[1]) {
                        return Err(err(line_no, format!("duplicate vertex '{}'", tok[1])));
                    }
                    names.push(tok[1].to_string());
                    builder.vertex(tok[1]);
                }
                "edge" => {
                    if tok.len() != 5 {
                        return Err(err(
                            line_no,
                            format!("expected 'edge <name> <from> <to|INF> <length|INF>', got '{line}'"),
                        ));
                    }
                    let lookup = |name: &str| -> Result<VertexId, GraphError> {
                        names
                            .iter()
                            .position(|n| n == name)
                            .map(VertexId)
                            .ok_or_else(|| err(line_no, format!("unknown vertex '{name}'")))
                    };
                    let from = lookup(tok[2])?;
                    let to_inf = tok[3] == "INF";
                    let len_inf = tok[4] == "INF";
                    match (to_inf, len_inf) {
                        (true, true) => {
                            builder.half_line(tok[1], from);
                        }
                        (false, false) => {
                            let to = lookup(tok[3])?;
                            let length: f64 = tok[4].parse().map_err(|_| {
                                err(line_no, format!("bad length '{}'", tok[4]))
                            })?;
                            if !(length.is_finite() && length > 0.0) {
                                return Err(err(
                                    line_no,
                                    format!("edge length must be positive and finite, got {length}"),
                                ));
                            }
                            builder.edge(tok[1], from, to, length);
                        }
                        (true, false) => {
                            return Err(err(
                                line_no,
                                "endpoint INF requires length INF".to_string(),
                            ));
                        }
                        (false, true) => {
                            return Err(err(
                                line_no,
                                "length INF requires endpoint INF".to_string(),
                            ));
                        }
                    }
                }
                other => {
                    return Err(err(line_no, format!("unknown directive '{other}'")));
                }
            }
        }
        builder.build()
    }
}

impl<'de> Deserialize<'de> for MetricGraph {
    fn deserialize<D>(deserializer: D) -> Result<Self, D::Error>
    where
        D: serde::Deserializer<'de>,
    {
        #[derive(Deserialize)]
        struct Raw {
            vertex_names: Vec<String>,
            edges: Vec<Edge>,
        }
        let raw = Raw::deserialize(deserializer)?;
        let g = MetricGraph {
            vertex_names: raw.vertex_names,
            edges: raw.edges,
        };
        g.validate().map_err(serde::de::Error::custom)?;
        Ok(g)
    }
}

/// Shortest round-trip decimal for a float (f64's Display is exactly that).
fn ryu_like(x: f64) -> String {
    format!("{x}")
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu {
            parent: (0..n).collect(),
        }
    }
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn half_line_has_terminal_origin() {
        let g = fixtures::half_line();
        let t = g.terminal_points();
        assert_eq!(t.len(), 1);
        assert!(t.contains(&VertexId(0)));
    }

    #[test]
    fn tadpole_has_no_terminal_point() {
        let g = fixtures::tadpole(2.0 * std::f64::consts::PI);
        assert!(g.terminal_points().is_empty());
    }

    #[test]
    fn pendant_edge_is_terminal() {
        let mut b = MetricGraph::builder();
        let v = b.vertex("v");
        let w = b.vertex("w");
        b.edge("pendant", v, w, 1.0);
        b.half_line("h1", v);
        b.half_line("h2", v);
        let g = b.build().unwrap();
        let t = g.terminal_points();
        assert_eq!(t.into_iter().collect::<Vec<_>>(), vec![w]);
        assert_eq!(g.classify().tag, TopologyTag::Tip);
    }

    #[test]
    fn compactify_line_gives_two_parallel_edges() {
        let g = fixtures::line();
        let c = g.compactify();
        assert_eq!(c.node_count, g.vertex_count() + 1);
        assert_eq!(c.edges.len(), 2);
        assert_eq!(c.degree(c.omega), 2);
        for &(a, b, _) in &c.edges {
            assert_eq!((a, b), (0, c.omega));
        }
    }

    #[test]
    fn compactify_tadpole_keeps_self_loop() {
        let g = fixtures::tadpole(1.0);
        let c = g.compactify();
        assert_eq!(c.node_count, 2);
        let loops = c.edges.iter().filter(|&&(a, b, _)| a == b).count();
        assert_eq!(loops, 1);
        assert_eq!(c.degree(c.omega), 1);
    }

    #[test]
    fn compactify_signpost() {
        let g = fixtures::signpost(1.0, 1.0);
        let c = g.compactify();
        // loop at w, edge v-w, two parallel v-omega
        assert_eq!(c.node_count, 3);
        assert_eq!(c.degree(c.omega), 2);
        assert_eq!(c.edges.iter().filter(|&&(a, b, _)| a == b).count(), 1);
    }

    #[test]
    fn bridges_line_empty_tadpole_halfline() {
        assert!(fixtures::line().bridge_set().is_empty());
        let tad = fixtures::tadpole(1.0);
        let bridges = tad.bridge_set();
        let names: Vec<&str> = bridges.iter().map(|&e| tad.edge(e).name.as_str()).collect();
        assert_eq!(names, vec!["tail"]);
    }

    #[test]
    fn bridges_signpost_is_post_only() {
        let g = fixtures::signpost(1.0, 1.0);
        let names: Vec<&str> = g.bridge_set().iter().map(|&e| g.edge(e).name.as_str()).collect();
        assert_eq!(names, vec!["post"]);
    }

    #[test]
    fn parallel_edges_are_never_bridges() {
        let mut b = MetricGraph::builder();
        let v = b.vertex("v");
        let w = b.vertex("w");
        b.edge("p1", v, w, 1.0);
        b.edge("p2", v, w, 2.0);
        b.half_line("h", v);
        b.half_line("h2", w);
        let g = b.build().unwrap();
        assert!(g.bridge_set().is_empty());
    }

    #[test]
    fn lone_parallel_pair_with_one_half_line() {
        let mut b = MetricGraph::builder();
        let v = b.vertex("v");
        let w = b.vertex("w");
        b.edge("p1", v, w, 1.0);
        b.edge("p2", v, w, 2.0);
        b.half_line("h", v);
        let g = b.build().unwrap();
        let names: Vec<&str> = g.bridge_set().iter().map(|&e| g.edge(e).name.as_str()).collect();
        assert_eq!(names, vec!["h"]);
        assert_eq!(g.classify().tag, TopologyTag::OneHalfLineNoTip);
    }

    #[test]
    fn classification_matches_captions() {
        assert_eq!(fixtures::half_line().classify().tag, TopologyTag::Tip);
        assert_eq!(fixtures::line().classify().tag, TopologyTag::CycleCovered);
        assert_eq!(
            fixtures::tadpole(2.0 * std::f64::consts::PI).classify().tag,
            TopologyTag::OneHalfLineNoTip
        );
        assert_eq!(fixtures::signpost(1.0, 1.0).classify().tag, TopologyTag::Other);
        assert_eq!(fixtures::meshed_tip().classify().tag, TopologyTag::Tip);
        assert_eq!(fixtures::meshed_cover().classify().tag, TopologyTag::CycleCovered);
        assert_eq!(
            fixtures::meshed_one_half_line().classify().tag,
            TopologyTag::OneHalfLineNoTip
        );
    }

    #[test]
    fn cycle_covering_forces_no_tip_and_two_half_lines() {
        for g in [
            fixtures::line(),
            fixtures::meshed_cover(),
            fixtures::tadpole(1.0),
            fixtures::signpost(1.0, 1.0),
            fixtures::half_line(),
            fixtures::meshed_tip(),
            fixtures::meshed_one_half_line(),
        ] {
            if g.has_cycle_covering() {
                assert!(g.terminal_points().is_empty());
                assert!(g.half_line_count() >= 2);
            }
        }
    }

    #[test]
    fn compact_core_examples() {
        let line = fixtures::line();
        let core = line.compact_core();
        assert_eq!(core.vertices.len(), 1);
        assert!(core.edges.is_empty());

        let tad = fixtures::tadpole(3.0);
        let core = tad.compact_core();
        assert_eq!(core.edges.len(), 1);
        assert_eq!(core.edges[0].1.name, "loop");

        let sp = fixtures::signpost(1.0, 2.0);
        let core = sp.compact_core();
        let names: Vec<&str> = core.edges.iter().map(|(_, e)| e.name.as_str()).collect();
        assert_eq!(names, vec!["post", "loop"]);
    }

    #[test]
    fn subdivision_preserves_bridge_structure() {
        let g = fixtures::signpost(1.0, 1.0);
        let post = g
            .edges()
            .find(|(_, e)| e.name == "post")
            .map(|(id, _)| id)
            .unwrap();
        let sub = g.subdivide_edge(post, 0.25).unwrap();
        // bridge splits into two bridges
        assert_eq!(sub.bridge_set().len(), 2);
        let loop_edge = g
            .edges()
            .find(|(_, e)| e.name == "loop")
            .map(|(id, _)| id)
            .unwrap();
        let sub2 = g.subdivide_edge(loop_edge, 0.5).unwrap();
        // non-bridge splits into non-bridges
        assert_eq!(sub2.bridge_set().len(), 1);
        assert_eq!(sub2.classify().tag, TopologyTag::Other);
    }

    #[test]
    fn shortest_loop_lengths() {
        assert_eq!(fixtures::line().shortest_loop_length(), None);
        assert_eq!(fixtures::tadpole(5.0).shortest_loop_length(), Some(5.0));
        let mut b = MetricGraph::builder();
        let v = b.vertex("v");
        let w = b.vertex("w");
        b.edge("p1", v, w, 1.0);
        b.edge("p2", v, w, 2.5);
        b.edge("p3", v, w, 3.0);
        b.half_line("h", v);
        let g = b.build().unwrap();
        assert_eq!(g.shortest_loop_length(), Some(3.5));
    }

    #[test]
    fn rejects_invalid_graphs() {
        // no half-line
        let mut b = MetricGraph::builder();
        let v = b.vertex("v");
        let w = b.vertex("w");
        b.edge("e", v, w, 1.0);
        assert!(matches!(b.build(), Err(GraphError::Invalid(_))));

        // disconnected
        let mut b = MetricGraph::builder();
        let v = b.vertex("v");
        let w = b.vertex("w");
        b.half_line("h1", v);
        b.half_line("h2", w);
        assert!(matches!(b.build(), Err(GraphError::Invalid(_))));

        // nonpositive length
        let mut b = MetricGraph::builder();
        let v = b.vertex("v");
        b.edge("loop", v, v, 0.0);
        b.half_line("h", v);
        assert!(matches!(b.build(), Err(GraphError::Invalid(_))));
    }

    #[test]
    fn parser_reports_line_numbers() {
        let bad = "vertex v\nedge tail v INF 3.0\n";
        match MetricGraph::parse(bad) {
            Err(GraphError::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("INF"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad2 = "vertex v\nedge e v w 1.0\n";
        match MetricGraph::parse(bad2) {
            Err(GraphError::Parse { line, msg }) => {
                assert_eq!(line, 2);
                assert!(msg.contains("unknown vertex"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parser_round_trips_tadpole() {
        let text = "# tadpole\nvertex v\nedge loop v v 6.283185307179586\nedge tail v INF INF\n";
        let g = MetricGraph::parse(text).unwrap();
        assert_eq!(g, fixtures::tadpole(2.0 * std::f64::consts::PI));
    }
}
