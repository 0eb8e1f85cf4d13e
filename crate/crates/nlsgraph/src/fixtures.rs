//! Programmatic builders for the fixture graphs shipped with the repo.
//!
//! Classification is independent of edge lengths, so the meshed fixtures use
//! unit lengths throughout. The same graphs ship as description files under
//! `fixtures/` at the workspace root.

use crate::graph::MetricGraph;

/// The real line: two half-lines glued at one vertex.
pub fn line() -> MetricGraph {
    let mut b = MetricGraph::builder();
    let v = b.vertex("v");
    b.half_line("left", v);
    b.half_line("right", v);
    b.build().expect("line fixture is valid")
}

/// The positive half-line: one vertex, one half-line.
pub fn half_line() -> MetricGraph {
    let mut b = MetricGraph::builder();
    let v = b.vertex("v");
    b.half_line("ray", v);
    b.build().expect("half-line fixture is valid")
}

/// A self-loop of the given length plus one half-line, glued at one vertex.
pub fn tadpole(loop_len: f64) -> MetricGraph {
    let mut b = MetricGraph::builder();
    let v = b.vertex("v");
    b.edge("loop", v, v, loop_len);
    b.half_line("tail", v);
    b.build().expect("tadpole fixture is valid")
}

/// Two half-lines at `v`, a finite edge `v-w` (the post), a self-loop at `w`.
pub fn signpost(post_len: f64, loop_len: f64) -> MetricGraph {
    let mut b = MetricGraph::builder();
    let v = b.vertex("v");
    let w = b.vertex("w");
    b.edge("post", v, w, post_len);
    b.edge("loop", w, w, loop_len);
    b.half_line("left", v);
    b.half_line("right", v);
    b.build().expect("signpost fixture is valid")
}

/// A densely meshed graph with three half-lines and a single pendant edge,
/// so it has a tip. Unit edge lengths.
pub fn meshed_tip() -> MetricGraph {
    let mut b = MetricGraph::builder();
    let a02 = b.vertex("a");
    let a22 = b.vertex("b");
    let a24 = b.vertex("c");
    let a42 = b.vertex("d");
    let a33 = b.vertex("e");
    let a52 = b.vertex("f");
    let a43 = b.vertex("g");
    let a04 = b.vertex("h");
    let a11 = b.vertex("i");
    let a20 = b.vertex("j");
    let a40 = b.vertex("k");
    let tip = b.vertex("tip");
    let pairs = [
        (a02, a04),
        (a04, a24),
        (a04, a22),
        (a24, a22),
        (a02, a11),
        (a11, a22),
        (a11, a20),
        (a20, a22),
        (a22, a33),
        (a24, a33),
        (a24, a43),
        (a33, a43),
        (a43, a52),
        (a33, a42),
        (a20, a42),
        (a20, a40),
        (a40, a42),
        (a42, a52),
        (a40, a52),
    ];
    for (i, &(x, y)) in pairs.iter().enumerate() {
        b.edge(format!("m{i}"), x, y, 1.0);
    }
    b.edge("pendant", a43, tip, 1.0);
    b.half_line("west", a02);
    b.half_line("northwest", a04);
    b.half_line("east", a52);
    b.build().expect("meshed tip fixture is valid")
}

/// A graph covered by cycles: every edge lies on a cycle once the four
/// half-lines are merged at infinity. Contains a self-loop, a triple edge and
/// a double edge. Unit edge lengths.
pub fn meshed_cover() -> MetricGraph {
    let mut b = MetricGraph::builder();
    let n1 = b.vertex("a");
    let n3 = b.vertex("b");
    let n4 = b.vertex("c");
    let n6 = b.vertex("d");
    let n7 = b.vertex("e");
    let n8 = b.vertex("f");
    let n9 = b.vertex("g");
    b.edge("m0", n1, n3, 1.0);
    b.edge("m1", n1, n4, 1.0);
    b.edge("m2", n3, n4, 1.0);
    b.edge("curl", n3, n3, 1.0);
    b.edge("m3", n3, n6, 1.0);
    b.edge("t0", n6, n7, 1.0);
    b.edge("t1", n6, n7, 1.0);
    b.edge("t2", n6, n7, 1.0);
    b.edge("d0", n6, n8, 1.0);
    b.edge("d1", n6, n8, 1.0);
    b.edge("m4", n7, n8, 1.0);
    b.edge("m5", n8, n9, 1.0);
    b.edge("m6", n7, n9, 1.0);
    b.half_line("west", n1);
    b.half_line("northwest", n4);
    b.half_line("northeast", n9);
    b.half_line("east", n7);
    b.build().expect("meshed cover fixture is valid")
}

/// The meshed graph of [`meshed_tip`] without the pendant and with a single
/// half-line: exactly one half-line and no terminal point. Unit lengths.
pub fn meshed_one_half_line() -> MetricGraph {
    let mut b = MetricGraph::builder();
    let a02 = b.vertex("a");
    let a22 = b.vertex("b");
    let a24 = b.vertex("c");
    let a42 = b.vertex("d");
    let a33 = b.vertex("e");
    let a52 = b.vertex("f");
    let a43 = b.vertex("g");
    let a04 = b.vertex("h");
    let a11 = b.vertex("i");
    let a20 = b.vertex("j");
    let a40 = b.vertex("k");
    let pairs = [
        (a02, a04),
        (a04, a24),
        (a04, a22),
        (a24, a22),
        (a02, a11),
        (a11, a22),
        (a11, a20),
        (a20, a22),
        (a22, a33),
        (a24, a33),
        (a24, a43),
        (a33, a43),
        (a43, a52),
        (a33, a42),
        (a20, a42),
        (a20, a40),
        (a40, a42),
        (a42, a52),
        (a40, a52),
    ];
    for (i, &(x, y)) in pairs.iter().enumerate() {
        b.edge(format!("m{i}"), x, y, 1.0);
    }
    b.half_line("west", a02);
    b.build().expect("meshed one-half-line fixture is valid")
}

/// The six figure fixtures in caption order, with their names.
pub fn figure_fixtures() -> Vec<(&'static str, MetricGraph)> {
    vec![
        ("tip_mesh", meshed_tip()),
        ("covered_mesh", meshed_cover()),
        ("single_halfline_mesh", meshed_one_half_line()),
        ("signpost", signpost(1.0, 1.0)),
        ("tadpole", tadpole(2.0 * std::f64::consts::PI)),
        ("half_line", half_line()),
    ]
}
