use std::collections::HashSet;

use foveakit::neighborhoods::{
    build_metric_graph_with, coverage, knn, knn_geodesic, local_manifold_distance, min_covering_k, Metric,
};
use foveakit::sampler::search_resolution;
use foveakit::{CmfParams, GridOptions, IsotropyRule, SensorGrid};
use proptest::prelude::*;

fn grid_for(a: f64, target: usize, pad: usize) -> SensorGrid {
    let p = CmfParams::new(a, 8.0).unwrap();
    let n_r = search_resolution(&p, target, IsotropyRule::FiniteDifference).unwrap().n_r;
    let opts = GridOptions {
        pad_rings: pad,
        ..Default::default()
    };
    SensorGrid::build(p, n_r, opts).unwrap()
}

/// Fraction of kNN memberships shared between two neighbourhood sets.
fn membership_agreement(a: &foveakit::neighborhoods::NeighborhoodSet, b: &foveakit::neighborhoods::NeighborhoodSet) -> f64 {
    let mut shared = 0usize;
    for j in 0..a.n_out {
        let sa: HashSet<u32> = a.row(j).iter().copied().collect();
        shared += b.row(j).iter().filter(|i| sa.contains(i)).count();
    }
    shared as f64 / (a.n_out * a.k) as f64
}

#[test]
fn local_metric_agrees_with_dijkstra() {
    for a in [0.5, 5.0] {
        let g = grid_for(a, 5000, 3);
        let graph = build_metric_graph_with(&g, 3.0, Metric::Chord);
        for k in [9, 25] {
            let local = knn(&g, &g, k).unwrap();
            let geo = knn_geodesic(&g, &graph, &g, k).unwrap();
            let agree = membership_agreement(&local, &geo);
            assert!(agree >= 0.95, "a={a} k={k}: {agree}");
            // disagreements sit at the boundary: the first few slots always match
            for j in 0..local.n_out {
                assert_eq!(local.row(j)[0], geo.row(j)[0]);
            }
        }
    }
}

#[test]
fn patch_covering_of_the_64_patch_grid() {
    let input = grid_for(2.79, 4096, 4);
    assert_eq!(input.n_active, 3976);
    let out_p = CmfParams::new(2.79, 8.0).unwrap();
    let output = SensorGrid::build(out_p, 6, GridOptions::default()).unwrap();
    assert_eq!(output.n_active, 64);
    let res = min_covering_k(&input, &output).unwrap();
    let at = knn(&input, &output, res.k).unwrap();
    assert_eq!(coverage(&input, &at), 1.0);
    assert!(coverage(&input, &knn(&input, &output, res.k - 1).unwrap()) < 1.0);
    assert!(res.k * 64 > input.n_active, "patches should overlap");
    assert_eq!(res.k, foveakit::neighborhoods::PATCH_K_2_79_64);
}

#[test]
fn neighbourhoods_are_deterministic() {
    let g = grid_for(0.5, 1500, 3);
    let a = knn(&g, &g, 16).unwrap();
    let b = knn(&g, &g, 16).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn distance_symmetry(a in 0.05f64..100.0, n_r in 5usize..30, i in 0usize..10_000, j in 0usize..10_000) {
        let g = SensorGrid::build(CmfParams::new(a, 8.0).unwrap(), n_r, GridOptions::default()).unwrap();
        let (i, j) = (i % g.len(), j % g.len());
        prop_assert_eq!(local_manifold_distance(&g, i, j).to_bits(), local_manifold_distance(&g, j, i).to_bits());
    }

    #[test]
    fn rows_sorted_and_valid(a in 0.05f64..100.0, n_r in 5usize..25, k in 1usize..30) {
        let opts = GridOptions { pad_rings: 3, ..Default::default() };
        let g = SensorGrid::build(CmfParams::new(a, 8.0).unwrap(), n_r, opts).unwrap();
        let k = k.min(g.len());
        let nb = knn(&g, &g, k).unwrap();
        for j in 0..nb.n_out {
            prop_assert!(nb.row_dists(j).windows(2).all(|p| p[0] <= p[1]));
            prop_assert!(nb.row(j).iter().all(|&i| (i as usize) < g.len()));
        }
    }
}
