use std::f64::consts::{SQRT_2, TAU};

use foveakit::baselines::{
    anisotropy_index, anisotropy_of, baseline_anisotropy, dr_dtheta_profile, grid_anisotropy, interior_loci, logpolar_grid,
    sensor_dr_dtheta_profile, warped_cartesian_grid, BaselineGrid, WarpProfile,
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

fn ring_radii(g: &BaselineGrid) -> Vec<f64> {
    (0..g.rows).map(|row| g.points[row * g.cols][0]).collect()
}

fn spacings(radii: &[f64]) -> Vec<f64> {
    radii.windows(2).map(|w| w[1] - w[0]).collect()
}

#[test]
fn weak_logpolar_is_nearly_uniform_in_radius() {
    let s = spacings(&ring_radii(&logpolar_grid(500.0, 64, 64, 8.0).unwrap()));
    let (lo, hi) = s.iter().fold((f64::MAX, 0.0f64), |(lo, hi), &d| (lo.min(d), hi.max(d)));
    // closed form: consecutive gaps grow by exp(Δu) with Δu the log step
    let du = ((508.0f64).ln() - (500.008f64).ln()) / 63.0;
    assert!((hi / lo - (62.0 * du).exp()).abs() < 1e-6);
    assert!(hi / lo <= 1.05);
}

#[test]
fn strong_logpolar_concentrates_at_the_pole() {
    let s = spacings(&ring_radii(&logpolar_grid(0.0005, 64, 64, 8.0).unwrap()));
    assert!(s[0] / s[s.len() - 1] < 1e-2, "{}", s[0] / s[s.len() - 1]);
}

#[test]
fn logpolar_rings_are_anisotropic_at_the_edge() {
    let prof = dr_dtheta_profile(&logpolar_grid(500.0, 64, 64, 8.0).unwrap()).unwrap();
    let last = prof.last().unwrap();
    assert_eq!(last.r, 8.0);
    // radial gap ≈ 8/63 against an arc of 8·2π/64
    let expect = (8.0 - 8.0 * (1.0 - 1.0 / 63.0)) / (8.0 * TAU / 64.0);
    assert!((last.ratio - expect).abs() / expect < 0.02, "{} vs {expect}", last.ratio);
    assert!(last.ratio.max(1.0 / last.ratio) > 3.0);
}

#[test]
fn pure_log_polar_limit_is_isotropic() {
    let (n_r, r_max) = (200usize, 8.0f64);
    let a = 1e-9;
    let du = ((r_max + a) / (r_max * 1e-3 + a)).ln() / (n_r - 1) as f64;
    let n_theta = (TAU / du).round() as usize;
    for s in dr_dtheta_profile(&logpolar_grid(a, n_r, n_theta, r_max).unwrap()).unwrap() {
        assert!((s.ratio - 1.0).abs() < 0.05, "{s:?}");
    }
}

#[test]
fn foveated_rings_stay_near_isotropic() {
    for a in [0.05, 0.5, 5.0, 50.0] {
        let prof = sensor_dr_dtheta_profile(&grid_for(a, 4096, 0)).unwrap();
        for s in &prof {
            assert!((0.67..=1.5).contains(&s.ratio), "a={a} {s:?}");
        }
    }
    // small grids too
    let prof = sensor_dr_dtheta_profile(&grid_for(0.5, 200, 2)).unwrap();
    assert!(prof.iter().all(|s| (0.67..=1.5).contains(&s.ratio)), "{prof:?}");
}

#[test]
fn warp_preserves_radial_order() {
    let g = warped_cartesian_grid(WarpProfile::Hyperbolic { a: 0.5 }, 40, 8.0).unwrap();
    let mut order: Vec<usize> = (0..g.len()).collect();
    order.sort_by(|&i, &j| {
        let s = |k: usize| g.sensor[k][0].hypot(g.sensor[k][1]);
        s(i).total_cmp(&s(j))
    });
    let vis = |k: usize| g.points[k][0].hypot(g.points[k][1]);
    for w in order.windows(2) {
        assert!(vis(w[1]) >= vis(w[0]) - 1e-12);
    }
    // angles are preserved
    for (p, s) in g.points.iter().zip(&g.sensor) {
        assert!((p[1].atan2(p[0]) - s[1].atan2(s[0])).abs() < 1e-12);
    }
}

#[test]
fn warped_density_falls_towards_the_corner() {
    let side = 128;
    let a = 0.5;
    let g = warped_cartesian_grid(WarpProfile::Hyperbolic { a }, side, 8.0).unwrap();
    let at = |col: usize, row: usize| g.points[row * side + col];
    let cell = |col: usize, row: usize| {
        let (p, px, py) = (at(col, row), at(col + 1, row), at(col, row + 1));
        let (ux, uy) = ([px[0] - p[0], px[1] - p[1]], [py[0] - p[0], py[1] - p[1]]);
        (ux[0] * uy[1] - ux[1] * uy[0]).abs()
    };
    let centre = cell(side / 2, side / 2);
    let corner = cell(side - 2, side - 2);
    // analytic areal density of a radial remap ρ(r): ρ'(r)·ρ/r
    let c = |r: f64| (r / a).ln_1p();
    let rc = 8.0 * SQRT_2;
    let ratio_exact = (1.0 / a).powi(2) / ((1.0 / (rc + a)) * c(rc) / rc);
    let ratio = corner / centre;
    assert!(ratio > 4.0);
    assert!((ratio / ratio_exact - 1.0).abs() < 0.25, "{ratio} vs {ratio_exact}");
}

#[test]
fn square_lattice_is_isotropic() {
    let side = 101;
    let pts: Vec<[f64; 2]> = (0..side * side).map(|i| [(i % side) as f64, (i / side) as f64]).collect();
    let v = anisotropy_index(&pts, [50.0, 50.0], 1000).unwrap();
    assert!((v - 1.0).abs() <= 0.05, "{v}");
    let v = anisotropy_index(&pts, [40.3, 61.7], 1000).unwrap();
    assert!((v - 1.0).abs() <= 0.05, "{v}");
}

#[test]
fn foveated_grid_is_isotropic_in_mid_periphery() {
    let g = grid_for(0.5, 4096, 6);
    let loci = interior_loci(&g, 0.4, 0.6, 25, 3);
    let visual: Vec<[f64; 2]> = g.points.iter().map(|p| [p.x, p.y]).collect();
    for &i in &loci {
        let v = anisotropy_index(&visual, visual[i], 200).unwrap();
        assert!(v <= 1.2, "visual index {v} at r={}", g.points[i].r);
    }
    for s in grid_anisotropy(&g, &loci, 200).unwrap() {
        assert!(s.value <= 1.2, "{s:?}");
    }
}

#[test]
fn warped_anisotropy_grows_with_radius() {
    // neighbourhoods kept clear of the array edge, where truncation skews them
    let g = warped_cartesian_grid(WarpProfile::Hyperbolic { a: 0.5 }, 128, 8.0).unwrap();
    let ids: Vec<usize> = [0.1, 0.3, 0.5, 0.7, 0.85].iter().map(|&r| g.element_at_radius(r)).collect();
    let vals: Vec<f64> = baseline_anisotropy(&g, &ids, 200).unwrap().iter().map(|s| s.value).collect();
    assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
    assert!(vals[4] > 1.5, "{vals:?}");
    // the matched 64×64 budget at the default query radius
    let g = warped_cartesian_grid(WarpProfile::Hyperbolic { a: 0.5 }, 64, 8.0).unwrap();
    let v = baseline_anisotropy(&g, &[g.element_at_radius(0.9)], 200).unwrap()[0].value;
    assert!(v > 1.5, "{v}");
}

#[test]
fn logpolar_anisotropy_is_large_in_the_periphery() {
    let g = logpolar_grid(500.0, 64, 64, 8.0).unwrap();
    let ids: Vec<usize> = [0.6, 0.75, 0.9].iter().map(|&r| g.element_at_radius(r)).collect();
    for s in baseline_anisotropy(&g, &ids, 200).unwrap() {
        assert!(s.value > 1.5, "{s:?}");
    }
}

#[test]
fn loci_are_reproducible_and_interior() {
    let g = grid_for(5.0, 2000, 0);
    let a = interior_loci(&g, 0.3, 0.7, 50, 9);
    assert_eq!(a, interior_loci(&g, 0.3, 0.7, 50, 9));
    assert_eq!(a.len(), 50);
    assert!(a.iter().all(|&i| (0.3..=0.7).contains(&g.points[i].w)));
    assert!(a.windows(2).all(|w| w[0] < w[1]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_ignores_rotation_and_scale(
        pts in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 8..60),
        angle in 0.0f64..TAU,
        scale in 0.01f64..100.0,
        shift in (-50.0f64..50.0, -50.0f64..50.0),
    ) {
        let pts: Vec<[f64; 2]> = pts.into_iter().map(|(x, y)| [x, y]).collect();
        let base = anisotropy_of(&pts);
        prop_assume!(base.is_finite() && base < 1e6);
        let (c, s) = (angle.cos(), angle.sin());
        let moved: Vec<[f64; 2]> = pts
            .iter()
            .map(|p| [scale * (c * p[0] - s * p[1]) + shift.0, scale * (s * p[0] + c * p[1]) + shift.1])
            .collect();
        let v = anisotropy_of(&moved);
        prop_assert!((v - base).abs() <= 1e-7 * base, "{} vs {}", v, base);
        prop_assert!(base >= 1.0);
    }
}
