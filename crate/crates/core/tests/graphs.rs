mod common;

use backbone_core::graph::{edge_failure_setfunction, random_graph};
use backbone_core::{
    communicability, structural_synergy_backbone, verify_desiderata, AggregatorKind,
    BackboneConfig, Edge, SearchStrategy, SetFunction, SubsetMask, WeightedGraph,
};
use std::f64::consts::E;

fn edge(u: usize, v: usize, w: f64) -> Edge {
    Edge { u, v, w }
}

#[test]
fn two_node_graph_closed_form() {
    for w in [0.2, 1.0, 3.0] {
        let g = WeightedGraph::new(2, vec![edge(0, 1, w)], false).unwrap();
        let c = communicability(&g).unwrap();
        assert!((c.matrix[(0, 0)] - w.cosh()).abs() < 1e-9);
        assert!((c.matrix[(0, 1)] - w.sinh()).abs() < 1e-9);
        let s = structural_synergy_backbone(&g, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
        assert!((s.alpha_synergy[0] - w.sinh()).abs() < 1e-9);
        assert!((s.partial_atoms[0] - w.sinh()).abs() < 1e-9);
    }
}

#[test]
fn triangle_closed_form_and_spectrum() {
    let g = WeightedGraph::new(3, vec![edge(0, 1, 1.0), edge(1, 2, 1.0), edge(0, 2, 1.0)], false)
        .unwrap();
    // K3 spectrum {2, -1, -1}
    let off = (E * E - 1.0 / E) / 3.0;
    let diag = (E * E + 2.0 / E) / 3.0;
    let c = communicability(&g).unwrap();
    assert!((c.mean_offdiagonal - off).abs() < 1e-9);
    assert!((c.matrix[(1, 1)] - diag).abs() < 1e-9);

    let s = structural_synergy_backbone(&g, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
    let want = common::synergy(3, AggregatorKind::Min, |failed| {
        common::communicability(&g, &[0, 1, 2]) - common::communicability(&g, &common::complement(3, failed))
    });
    assert!(common::close(&s.alpha_synergy, &want, 1e-9));
    assert!(s.alpha_synergy.windows(2).all(|w| w[1] >= w[0] - 1e-9));
    assert!((s.total() - off).abs() < 1e-9);
}

#[test]
fn small_graphs_satisfy_desiderata() {
    for seed in 0..15 {
        let m = 1 + seed as usize % 5;
        let g = random_graph(5, m, 1.0, seed).unwrap();
        let report = verify_desiderata(&edge_failure_setfunction(&g).unwrap()).unwrap();
        assert!(report.is_admissible(), "seed {seed}: {report:?}");
    }
}

#[test]
fn set_function_matches_series_oracle() {
    let g = random_graph(6, 8, 1.0, 42).unwrap();
    let f = edge_failure_setfunction(&g).unwrap();
    for bits in [0u64, 1, 0b1010_0101, 0xff, 0b0111_0000] {
        let survivors = SubsetMask::from_bits(8, bits).unwrap();
        let want = common::communicability(&g, &survivors.to_vec());
        assert!((f.value(survivors).unwrap() - want).abs() < 1e-9 * want.max(1.0));
    }
}

#[test]
fn relabeling_nodes_keeps_spectrum() {
    let g = random_graph(7, 9, 1.0, 3).unwrap();
    let h = g.relabeled(&[3, 5, 0, 6, 1, 2, 4]).unwrap();
    let cfg = BackboneConfig::exact(AggregatorKind::Mean);
    let a = structural_synergy_backbone(&g, &cfg).unwrap();
    let b = structural_synergy_backbone(&h, &cfg).unwrap();
    assert!(common::close(&a.alpha_synergy, &b.alpha_synergy, 1e-9));
}

#[test]
fn directed_graph_is_accepted() {
    let g = WeightedGraph::new(3, vec![edge(0, 1, 1.0), edge(1, 2, 1.0)], true).unwrap();
    let c = communicability(&g).unwrap();
    assert!((c.matrix[(0, 2)] - 0.5).abs() < 1e-12);
    assert_eq!(c.matrix[(2, 0)], 0.0);
    let s = structural_synergy_backbone(&g, &BackboneConfig::exact(AggregatorKind::Min)).unwrap();
    assert!((s.total() - c.mean_offdiagonal).abs() < 1e-9);
}

#[test]
fn sampled_backbone_on_larger_graph() {
    let g = random_graph(10, 24, 1.0, 8).unwrap();
    let cfg = BackboneConfig::new(AggregatorKind::Min, SearchStrategy::Sampled { num_samples: 200 });
    let s = structural_synergy_backbone(&g, &cfg).unwrap();
    assert_eq!(s.len(), 24);
    assert!((s.alpha_synergy[23] - communicability(&g).unwrap().mean_offdiagonal).abs() < 1e-9);
}
