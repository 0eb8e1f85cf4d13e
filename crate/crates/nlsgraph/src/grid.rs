//! Discretization of a metric graph: per-edge uniform grids with nodal
//! degrees of freedom shared at vertices.
//!
//! DOF layout: the first `vertex_count` entries are the vertex values, then
//! each edge contributes its interior nodes in order. The far node of a
//! truncated half-line is pinned to zero and owns no DOF, which is what makes
//! the hard-zero truncation structural rather than a penalty.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::FunctionError;
use crate::graph::{EdgeEnds, EdgeId, MetricGraph};

/// Target steps and truncation lengths. Actual steps are `len / n` with
/// `n = round(len / h)` clamped to at least 2 intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub default_h: f64,
    pub trunc_len: f64,
    #[serde(default)]
    pub edge_h: BTreeMap<usize, f64>,
    #[serde(default)]
    pub edge_trunc: BTreeMap<usize, f64>,
}

impl GridSpec {
    pub fn new(default_h: f64, trunc_len: f64) -> Self {
        GridSpec {
            default_h,
            trunc_len,
            edge_h: BTreeMap::new(),
            edge_trunc: BTreeMap::new(),
        }
    }

    pub fn with_edge_h(mut self, e: EdgeId, h: f64) -> Self {
        self.edge_h.insert(e.0, h);
        self
    }

    pub fn with_edge_trunc(mut self, e: EdgeId, len: f64) -> Self {
        self.edge_trunc.insert(e.0, len);
        self
    }

    fn h_for(&self, e: EdgeId) -> f64 {
        *self.edge_h.get(&e.0).unwrap_or(&self.default_h)
    }

    fn trunc_for(&self, e: EdgeId) -> f64 {
        *self.edge_trunc.get(&e.0).unwrap_or(&self.trunc_len)
    }

    fn validate(&self) -> Result<(), FunctionError> {
        let all_h = std::iter::once(self.default_h).chain(self.edge_h.values().copied());
        for h in all_h {
            if !(h.is_finite() && h > 0.0) {
                return Err(FunctionError::InvalidGrid(format!("step {h} must be positive")));
            }
        }
        let all_l = std::iter::once(self.trunc_len).chain(self.edge_trunc.values().copied());
        for l in all_l {
            if !(l.is_finite() && l >= 10.0) {
                return Err(FunctionError::InvalidGrid(format!(
                    "truncation length {l} must be finite and at least 10"
                )));
            }
        }
        Ok(())
    }
}

/// Where a grid node's value lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRef {
    Dof(usize),
    PinnedZero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGrid {
    /// Number of intervals.
    pub n: usize,
    /// Actual step.
    pub h: f64,
    /// Computational length (edge length, or truncation for half-lines).
    pub comp_len: f64,
    /// DOF index of the first interior node; interiors are contiguous.
    pub interior_start: usize,
    /// Node 0 and node n.
    pub ends: [NodeRef; 2],
}

impl EdgeGrid {
    /// DOF of node `k` (0..=n).
    pub fn node(&self, k: usize) -> NodeRef {
        if k == 0 {
            self.ends[0]
        } else if k == self.n {
            self.ends[1]
        } else {
            NodeRef::Dof(self.interior_start + k - 1)
        }
    }
}

/// A fixed grid over a fixed graph. Immutable and shared by all functions
/// discretized on it.
#[derive(Debug, PartialEq)]
pub struct Discretization {
    graph: MetricGraph,
    spec: GridSpec,
    edges: Vec<EdgeGrid>,
    ndof: usize,
    /// Lumped mass per DOF: half the adjacent interval lengths.
    lumped: Vec<f64>,
}

impl Discretization {
    pub fn new(graph: &MetricGraph, spec: GridSpec) -> Result<Arc<Self>, FunctionError> {
        spec.validate()?;
        let nv = graph.vertex_count();
        let mut edges = Vec::with_capacity(graph.edge_count());
        let mut ndof = nv;
        for (id, e) in graph.edges() {
            let h_target = spec.h_for(id);
            let (comp_len, ends) = match e.ends {
                EdgeEnds::Finite { from, to, length } => {
                    (length, [NodeRef::Dof(from.0), NodeRef::Dof(to.0)])
                }
                EdgeEnds::HalfLine { origin } => {
                    (spec.trunc_for(id), [NodeRef::Dof(origin.0), NodeRef::PinnedZero])
                }
            };
            let n = ((comp_len / h_target).round() as usize).max(2);
            let h = comp_len / n as f64;
            let eg = EdgeGrid {
                n,
                h,
                comp_len,
                interior_start: ndof,
                ends,
            };
            ndof += n - 1;
            edges.push(eg);
        }
        let mut lumped = vec![0.0; ndof];
        for eg in &edges {
            for k in 0..=eg.n {
                let w = if k == 0 || k == eg.n { eg.h / 2.0 } else { eg.h };
                if let NodeRef::Dof(d) = eg.node(k) {
                    lumped[d] += w;
                }
            }
        }
        Ok(Arc::new(Discretization {
            graph: graph.clone(),
            spec,
            edges,
            ndof,
            lumped,
        }))
    }

    pub fn graph(&self) -> &MetricGraph {
        &self.graph
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn ndof(&self) -> usize {
        self.ndof
    }

    pub fn edge_grid(&self, e: EdgeId) -> &EdgeGrid {
        &self.edges[e.0]
    }

    pub fn edge_grids(&self) -> impl Iterator<Item = (EdgeId, &EdgeGrid)> {
        self.edges.iter().enumerate().map(|(i, g)| (EdgeId(i), g))
    }

    pub fn lumped_mass(&self, dof: usize) -> f64 {
        self.lumped[dof]
    }

    pub fn lumped(&self) -> &[f64] {
        &self.lumped
    }

    /// Nodal distances from a point at arclength `offset` along edge `e`,
    /// measured through the graph metric. Used to center profiles anywhere.
    pub fn distances_from_point(&self, e: EdgeId, offset: f64) -> Vec<f64> {
        let nv = self.graph.vertex_count();
        // vertex distances by Dijkstra over finite edges, seeded from the two
        // (or one) endpoints of e at the right offsets
        let mut vdist = vec![f64::INFINITY; nv];
        let eg = &self.edges[e.0];
        match self.graph.edge(e).ends {
            EdgeEnds::Finite { from, to, .. } => {
                vdist[from.0] = offset;
                vdist[to.0] = vdist[to.0].min(eg.comp_len - offset);
            }
            EdgeEnds::HalfLine { origin } => {
                vdist[origin.0] = offset;
            }
        }
        let finite: Vec<(usize, usize, f64)> = self
            .graph
            .edges()
            .filter_map(|(_, ed)| match ed.ends {
                EdgeEnds::Finite { from, to, length } => Some((from.0, to.0, length)),
                _ => None,
            })
            .collect();
        let mut done = vec![false; nv];
        loop {
            let mut u = usize::MAX;
            let mut du = f64::INFINITY;
            for v in 0..nv {
                if !done[v] && vdist[v] < du {
                    du = vdist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            for &(a, bnode, l) in &finite {
                let other = if a == u {
                    bnode
                } else if bnode == u {
                    a
                } else {
                    continue;
                };
                if du + l < vdist[other] {
                    vdist[other] = du + l;
                }
            }
        }
        // nodal distances edge by edge
        let mut out = Vec::new();
        for (id, ed) in self.graph.edges() {
            let g = &self.edges[id.0];
            let (d0, dn) = match ed.ends {
                EdgeEnds::Finite { from, to, .. } => (vdist[from.0], vdist[to.0]),
                EdgeEnds::HalfLine { origin } => (vdist[origin.0], f64::INFINITY),
            };
            for k in 0..=g.n {
                let x = k as f64 * g.h;
                let mut d = (d0 + x).min(dn + (g.comp_len - x));
                if id == e {
                    d = d.min((x - offset).abs());
                }
                out.push(d);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn dof_layout_and_lumped_mass() {
        let g = fixtures::tadpole(2.0);
        let disc = Discretization::new(&g, GridSpec::new(0.5, 10.0)).unwrap();
        // loop: 4 intervals -> 3 interiors; half-line: 20 intervals -> 19 interiors
        assert_eq!(disc.ndof(), 1 + 3 + 19);
        let eg = disc.edge_grid(EdgeId(0));
        assert_eq!(eg.n, 4);
        assert_eq!(eg.ends, [NodeRef::Dof(0), NodeRef::Dof(0)]);
        let hg = disc.edge_grid(EdgeId(1));
        assert_eq!(hg.ends[1], NodeRef::PinnedZero);
        // vertex lumped mass: both loop ends (0.25 each) + half-line origin (0.25)
        assert!((disc.lumped_mass(0) - 0.75).abs() < 1e-15);
        // interior lumped mass equals the step
        assert!((disc.lumped_mass(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn grid_spec_validation() {
        let g = fixtures::line();
        assert!(Discretization::new(&g, GridSpec::new(0.0, 40.0)).is_err());
        assert!(Discretization::new(&g, GridSpec::new(0.1, 5.0)).is_err());
        assert!(Discretization::new(&g, GridSpec::new(0.1, 40.0)).is_ok());
    }

    #[test]
    fn minimum_two_intervals() {
        let mut b = crate::graph::MetricGraph::builder();
        let v = b.vertex("v");
        let w = b.vertex("w");
        b.edge("short", v, w, 0.05);
        b.half_line("h", v);
        b.half_line("h2", w);
        let g = b.build().unwrap();
        let disc = Discretization::new(&g, GridSpec::new(0.1, 40.0)).unwrap();
        assert_eq!(disc.edge_grid(EdgeId(0)).n, 2);
    }

    #[test]
    fn distances_from_vertex_on_tadpole() {
        let g = fixtures::tadpole(2.0);
        let disc = Discretization::new(&g, GridSpec::new(0.5, 10.0)).unwrap();
        // distance from the vertex (= offset 0 on the half-line edge 1)
        let d = disc.distances_from_point(EdgeId(1), 0.0);
        // loop nodes: positions 0,0.5,1,1.5,2 -> distances 0,0.5,1,0.5,0
        assert_eq!(&d[0..5], &[0.0, 0.5, 1.0, 0.5, 0.0]);
        // half-line nodes climb linearly
        assert_eq!(d[5], 0.0);
        assert!((d[6] - 0.5).abs() < 1e-15);
    }
}
