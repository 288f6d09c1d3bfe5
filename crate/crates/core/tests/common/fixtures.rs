//! Small hand-built networks with known diversity values.

use hindiv::hin::{EdgeStep, HinBuilder};
use hindiv::walk::validate_metapath;
use hindiv::{Hin, MetaPath};

/// Two sources, three targets: `a0 -> b0` three times, `a0 -> b1`, `a1 -> b1`, `a1 -> b2`.
pub fn small() -> (Hin, MetaPath) {
    let mut b = HinBuilder::new();
    let v0 = b.vertex_type("V_0", 2);
    let v1 = b.vertex_type("V_1", 3);
    let e = b.edge_type("E_1", v0, v1);
    b.edge(e, 0, 0, 3).edge(e, 0, 1, 1).edge(e, 1, 1, 1).edge(e, 1, 2, 1);
    let h = b.build().unwrap().add_sinks();
    let path = validate_metapath(&h, vec![EdgeStep::forward(e)]).unwrap();
    (h, path)
}

pub type Layout = (&'static str, Vec<(u32, u32)>, f64, f64);

/// The four source-to-target layouts over four sources and four targets, as
/// `(name, edges, collective, mean individual)` at order 1 under a uniform start.
pub fn quadrant_layouts() -> Vec<Layout> {
    vec![
        ("paired", vec![(0, 1), (1, 1), (2, 2), (3, 2)], 2.0, 1.0),
        ("bijective", vec![(0, 0), (1, 1), (2, 2), (3, 3)], 4.0, 1.0),
        (
            "shared",
            vec![(0, 1), (0, 2), (1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2)],
            2.0,
            2.0,
        ),
        (
            "spread",
            vec![(0, 0), (0, 1), (1, 0), (1, 2), (2, 1), (2, 3), (3, 2), (3, 3)],
            4.0,
            2.0,
        ),
    ]
}

pub fn quadrant(edges: &[(u32, u32)]) -> (Hin, MetaPath) {
    let mut b = HinBuilder::new();
    let s = b.vertex_type("sources", 4);
    let t = b.vertex_type("targets", 4);
    let e = b.edge_type("links", s, t);
    for &(u, v) in edges {
        b.edge(e, u, v, 1);
    }
    let h = b.build().unwrap().add_sinks();
    let path = validate_metapath(&h, vec![EdgeStep::forward(e)]).unwrap();
    (h, path)
}

/// One user choosing two items, then items tagged. `tags` holds `(item, tag, multiplicity)`.
pub fn tag_walk(n_tags: u32, tags: &[(u32, u32, u64)]) -> (Hin, MetaPath) {
    let mut b = HinBuilder::new();
    let u = b.vertex_type("users", 1);
    let i = b.vertex_type("items", 2);
    let t = b.vertex_type("tags", n_tags);
    let chose = b.edge_type("chose", u, i);
    let tagged = b.edge_type("tagged", i, t);
    b.edge(chose, 0, 0, 1).edge(chose, 0, 1, 1);
    for &(item, tag, m) in tags {
        b.edge(tagged, item, tag, m);
    }
    let h = b.build().unwrap().add_sinks();
    let path = validate_metapath(&h, vec![EdgeStep::forward(chose), EdgeStep::forward(tagged)]).unwrap();
    (h, path)
}

/// Item 0 has one tag, item 1 has three distinct tags.
pub fn tag_walk_spread() -> (Hin, MetaPath) {
    tag_walk(4, &[(0, 0, 1), (1, 1, 1), (1, 2, 1), (1, 3, 1)])
}

/// Item 0 has one tag, item 1 carries one other tag three times.
pub fn tag_walk_repeated() -> (Hin, MetaPath) {
    tag_walk(2, &[(0, 0, 1), (1, 1, 3)])
}

/// Four vertex types `V_0..V_3` with `E_0: V_0 -> V_1`, `E_1: V_1 -> V_2`, `E_2: V_1 -> V_3`.
pub fn chain() -> Hin {
    let mut b = HinBuilder::new();
    let v: Vec<_> = [("V_0", 2), ("V_1", 3), ("V_2", 2), ("V_3", 2)]
        .iter()
        .map(|&(n, c)| b.vertex_type(n, c))
        .collect();
    let e0 = b.edge_type("E_0", v[0], v[1]);
    let e1 = b.edge_type("E_1", v[1], v[2]);
    let e2 = b.edge_type("E_2", v[1], v[3]);
    b.edge(e0, 0, 0, 1).edge(e0, 0, 1, 1).edge(e0, 0, 2, 1).edge(e0, 1, 2, 2);
    b.edge(e1, 0, 0, 2).edge(e1, 0, 1, 1);
    b.edge(e2, 0, 0, 1).edge(e2, 1, 0, 2).edge(e2, 2, 1, 1);
    b.build().unwrap().add_sinks()
}
