//! Graph contributions depend only on the surface a graph embeds on.

use wickmaps::algebra::{build_named_algebra, StarAlgebra};
use wickmaps::maps::{classify, degree_sequences, enumerate_configurations, MapGraph, Mode};
use wickmaps::scalar::Scalar;
use wickmaps::wick::WickEvaluator;

fn algebra(name: &str) -> StarAlgebra {
    build_named_algebra(&name.parse().unwrap()).unwrap()
}

fn closed_form(ev: &WickEvaluator, g: &MapGraph) -> Scalar {
    let t = g.topological_type().unwrap();
    if t.orientable {
        ev.closed_form_or(t.genus_or_crosscaps, t.faces).unwrap()
    } else {
        ev.closed_form_nor(t.genus_or_crosscaps, t.faces).unwrap()
    }
}

fn connected_classes(w: usize, mode: Mode) -> Vec<MapGraph> {
    let twists = mode == Mode::Moebius;
    degree_sequences(w)
        .into_iter()
        .flat_map(|v| classify(enumerate_configurations(&v, twists), mode))
        .filter(|c| c.connected)
        .map(|c| c.representative)
        .collect()
}

#[test]
fn ribbon_graphs_match_closed_forms() {
    let graphs = connected_classes(8, Mode::Ribbon);
    assert!(graphs.len() > 50);
    for name in ["M(2,C)", "C[S3]", "C[Z2]"] {
        let alg = algebra(name);
        let ev = WickEvaluator::new(&alg).unwrap();
        for g in &graphs {
            assert_eq!(ev.graph_contribution(g).unwrap(), closed_form(&ev, g), "{name} {}", g.canonical_form());
        }
    }
}

#[test]
fn moebius_graphs_match_closed_forms() {
    let graphs = connected_classes(6, Mode::Moebius);
    assert!(graphs.iter().any(|g| !g.is_orientable()));
    assert!(graphs.iter().any(|g| g.is_orientable()));
    for name in ["M(2,R)", "M(1,H)", "R[S3]"] {
        let alg = algebra(name);
        let ev = WickEvaluator::new(&alg).unwrap();
        for g in &graphs {
            assert_eq!(ev.graph_contribution(g).unwrap(), closed_form(&ev, g), "{name} {}", g.canonical_form());
        }
    }
}

#[test]
fn every_contraction_and_flip_preserves_contribution() {
    let alg = algebra("M(1,H)");
    let ev = WickEvaluator::new(&alg).unwrap();
    let mut contracted = 0;
    for g in connected_classes(6, Mode::Moebius) {
        let before = ev.graph_contribution(&g).unwrap();
        let ty = g.topological_type().unwrap();
        for d in g.edges() {
            let Ok(h) = g.contract_edge(d) else { continue };
            contracted += 1;
            assert_eq!(h.topological_type().unwrap(), ty);
            assert_eq!(ev.graph_contribution(&h).unwrap(), before);
        }
        for v in 0..g.vertex_count() {
            let h = g.flip_vertex(v).unwrap();
            assert_eq!(h.canonical_form(), g.canonical_form());
            assert_eq!(WickEvaluator::new(&alg).unwrap().graph_contribution(&h).unwrap(), before);
        }
    }
    assert!(contracted > 20);
}
