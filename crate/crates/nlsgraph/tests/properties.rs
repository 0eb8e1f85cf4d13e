//! Property tests over randomized graphs: the four-regime classification is
//! a partition with consistent witnesses, compactification bookkeeping holds,
//! subdivision leaves the regime invariant, and the description format
//! round-trips.

use proptest::prelude::*;

use nlsgraph::function::GraphFunction;
use nlsgraph::graph::{GraphBuilder, MetricGraph, TopologyTag};
use nlsgraph::grid::{Discretization, GridSpec};

#[derive(Debug, Clone)]
struct RawGraph {
    nv: usize,
    tree_parents: Vec<usize>, // raw, taken mod (i+1)
    extras: Vec<(usize, usize, u8)>,
    half_lines: Vec<usize>,
    lengths: Vec<u8>,
}

fn arb_raw() -> impl Strategy<Value = RawGraph> {
    (1usize..6)
        .prop_flat_map(|nv| {
            (
                Just(nv),
                proptest::collection::vec(0usize..100, nv.saturating_sub(1)),
                proptest::collection::vec((0usize..100, 0usize..100, 1u8..40), 0..5),
                proptest::collection::vec(0usize..100, 1..4),
                proptest::collection::vec(1u8..40, 12),
            )
        })
        .prop_map(|(nv, tree_parents, extras, half_lines, lengths)| RawGraph {
            nv,
            tree_parents,
            extras,
            half_lines,
            lengths,
        })
}

fn build(raw: &RawGraph) -> MetricGraph {
    let mut b = GraphBuilder::new();
    let vs: Vec<_> = (0..raw.nv).map(|i| b.vertex(format!("v{i}"))).collect();
    let mut li = 0;
    let mut next_len = || {
        let l = raw.lengths[li % raw.lengths.len()] as f64 / 8.0;
        li += 1;
        l
    };
    // spanning tree keeps everything connected
    for (i, &p) in raw.tree_parents.iter().enumerate() {
        let child = i + 1;
        let parent = p % (i + 1);
        b.edge(format!("t{i}"), vs[parent], vs[child], next_len());
    }
    for (k, &(a, bb, l)) in raw.extras.iter().enumerate() {
        b.edge(
            format!("x{k}"),
            vs[a % raw.nv],
            vs[bb % raw.nv],
            l as f64 / 8.0,
        );
    }
    for (k, &v) in raw.half_lines.iter().enumerate() {
        b.half_line(format!("h{k}"), vs[v % raw.nv]);
    }
    b.build().expect("constructed graphs are valid")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn classification_partitions_random_graphs(raw in arb_raw()) {
        let g = build(&raw);
        let tc = g.classify();
        // the tag matches its defining witnesses
        match tc.tag {
            TopologyTag::Tip => prop_assert!(!tc.terminal_points.is_empty()),
            TopologyTag::CycleCovered => {
                prop_assert!(tc.bridges.is_empty());
                prop_assert!(tc.terminal_points.is_empty());
                prop_assert!(tc.half_line_count >= 2);
            }
            TopologyTag::OneHalfLineNoTip => {
                prop_assert!(tc.terminal_points.is_empty());
                prop_assert_eq!(tc.half_line_count, 1);
                prop_assert!(!tc.bridges.is_empty());
            }
            TopologyTag::Other => {
                prop_assert!(tc.terminal_points.is_empty());
                prop_assert!(!tc.bridges.is_empty());
                prop_assert!(tc.half_line_count >= 2);
            }
        }
        // exhaustive and exclusive: exactly one tag can apply
        let tip = !g.terminal_points().is_empty();
        let covered = g.has_cycle_covering();
        prop_assert!(!(tip && covered));
    }

    #[test]
    fn compactify_bookkeeping(raw in arb_raw()) {
        let g = build(&raw);
        let c = g.compactify();
        prop_assert_eq!(c.node_count, g.vertex_count() + 1);
        prop_assert_eq!(c.degree(c.omega), g.half_line_count());
        prop_assert_eq!(c.edges.len(), g.edge_count());
    }

    #[test]
    fn subdivision_preserves_regime(raw in arb_raw()) {
        let g = build(&raw);
        let finite: Vec<_> = g.edges().filter(|(_, e)| !e.is_half_line()).map(|(id, _)| id).collect();
        if let Some(&e) = finite.first() {
            let was_bridge = g.bridge_set().contains(&e);
            let sub = g.subdivide_edge(e, 0.5).unwrap();
            prop_assert_eq!(sub.classify().tag, g.classify().tag);
            let expected = g.bridge_set().len() + if was_bridge { 1 } else { 0 };
            prop_assert_eq!(sub.bridge_set().len(), expected);
        }
    }

    #[test]
    fn quotient_never_exceeds_the_half_line_constant(
        raw in arb_raw(),
        samples in proptest::collection::vec(-1.0f64..1.0, 64),
    ) {
        // the universal upper bound: every H^1 function on a noncompact
        // graph has quotient at most 16/pi^2 (+ budget for roundoff)
        let g = build(&raw);
        let disc = Discretization::new(&g, GridSpec::new(0.2, 12.0)).unwrap();
        let vals: Vec<f64> = (0..disc.ndof()).map(|i| samples[i % samples.len()]).collect();
        let u = GraphFunction::from_values(&disc, vals).unwrap();
        if u.mass() > 0.0 && u.kinetic() > 0.0 {
            let q = u.gn_quotient().unwrap();
            let cap = 16.0 / (std::f64::consts::PI * std::f64::consts::PI);
            prop_assert!(q <= cap + 1e-3, "quotient {} above 16/pi^2", q);
        }
    }

    #[test]
    fn description_round_trips(raw in arb_raw()) {
        let g = build(&raw);
        let text = g.to_description();
        let back = MetricGraph::parse(&text).unwrap();
        prop_assert_eq!(back, g);
    }
}
