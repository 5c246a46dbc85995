//! Acceptance gate. Each test checks one criterion at its stated tolerance
//! and prints a single `PASS`/`FAIL` line to stderr before asserting.

use std::collections::HashSet;
use std::io::Write;
use std::time::{Duration, Instant};

use foveakit::analysis::{
    fixation_flops_curve, histogram, powerlaw_fit, rf_diameter_profile, vit_flops, DiameterStatistic, LayerStack, VitFlopsConfig,
    TOY_STACK,
};
use foveakit::baselines::{
    baseline_anisotropy, grid_anisotropy, interior_loci, logpolar_grid, warped_cartesian_grid, WarpProfile,
};
use foveakit::kernel_map::{
    apply_knn_conv, build_kernel_map, lattice_bundle, neighborhood_reference_coords, render_mapped_kernel, KernelBank,
    ReferenceKernelSpec,
};
use foveakit::neighborhoods::{build_metric_graph_with, knn, knn_geodesic, Metric, NeighborhoodSet};
use foveakit::resampler::{foveate, sample_fixations, FixationSpec, FixationZone, Image};
use foveakit::sampler::{default_pad_rings, search_resolution, solve_a_for_exact_n, SolveOptions};
use foveakit::{CmfParams, GridOptions, IsotropyRule, SensorGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "{tag} {name}: {detail}");
    assert!(pass, "{name}: {detail}");
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn grid_for(a: f64, target: usize, pad: usize) -> SensorGrid {
    let p = CmfParams::new(a, 8.0).unwrap();
    let n_r = search_resolution(&p, target, IsotropyRule::FiniteDifference).unwrap().n_r;
    let opts = GridOptions {
        pad_rings: pad,
        ..Default::default()
    };
    SensorGrid::build(p, n_r, opts).unwrap()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[test]
fn exact_n_solver() {
    let start = Instant::now();
    let sols = solve_a_for_exact_n(64, &SolveOptions::default()).unwrap();
    let took = start.elapsed();
    let want = [0.03, 0.14, 0.58, 2.79, 60.94];
    let got: Vec<f64> = sols.iter().map(|s| s.display).collect();
    let close = got.len() == want.len() && got.iter().zip(&want).all(|(g, w)| (g - w).abs() <= 0.01 + 1e-9);
    let pass = close && took < Duration::from_secs(10);
    verdict("exact-n solver", pass, &format!("got {got:?}, want {want:?} ±0.01, {}", secs(took)));
}

#[test]
fn sample_counts() {
    let start = Instant::now();
    let mut got = Vec::new();
    for (a, want) in [(2.79, 3976usize), (60.94, 4032)] {
        let n = search_resolution(&CmfParams::new(a, 8.0).unwrap(), 4096, IsotropyRule::FiniteDifference)
            .unwrap()
            .n_active;
        got.push((a, n, want));
    }
    let took = start.elapsed();
    let within = got.iter().all(|&(_, n, w)| (n as f64 - w as f64).abs() <= 0.02 * w as f64);
    let pass = within && took < Duration::from_secs(1);
    verdict("sample counts", pass, &format!("(a, got, want) {got:?}, ±2%, {}", secs(took)));
}

#[test]
fn isotropy_suite() {
    let start = Instant::now();
    let k = 200;
    let mut lines = Vec::new();
    let mut pass = true;
    for a in [0.05, 0.5, 5.0, 50.0] {
        let g = grid_for(a, 4096, default_pad_rings(k));
        let ring_err = median(g.ring_isotropy_errors().into_iter().map(|(_, e)| e).collect());
        let loci = interior_loci(&g, 0.1, 0.9, 100, 17);
        let worst = grid_anisotropy(&g, &loci, k)
            .unwrap()
            .iter()
            .map(|s| s.value)
            .fold(0.0, f64::max);
        pass &= ring_err <= 0.05 && worst <= 1.2 && loci.len() == 100;
        lines.push(format!("a={a}: n={} ring err {ring_err:.4}, worst index {worst:.3}", g.n_active));
    }
    let lp = logpolar_grid(500.0, 64, 64, 8.0).unwrap();
    let lp_v = baseline_anisotropy(&lp, &[lp.element_at_radius(0.9)], k).unwrap()[0].value;
    let wc = warped_cartesian_grid(WarpProfile::Hyperbolic { a: 0.5 }, 64, 8.0).unwrap();
    let wc_v = baseline_anisotropy(&wc, &[wc.element_at_radius(0.9)], k).unwrap()[0].value;
    pass &= lp_v > 1.5 && wc_v > 1.5;
    lines.push(format!("log-polar {lp_v:.2}, warped {wc_v:.2} at r=0.9"));
    let took = start.elapsed();
    pass &= took < Duration::from_secs(30);
    verdict("isotropy suite", pass, &format!("{}; {}", lines.join("; "), secs(took)));
}

/// Zero-padded 3×3 cross-correlation on a `side × side` image indexed
/// `[row][col][c]`, row increasing with y; tap `(dy + 1) * 3 + (dx + 1)`.
fn dense_reference(img: &[Vec<Vec<f64>>], kern: &[f64], bias: &[f64], c_in: usize) -> Vec<Vec<Vec<f64>>> {
    let side = img.len();
    let c_out = bias.len();
    let at = |r: i64, c: i64, ch: usize| -> f64 {
        if r < 0 || c < 0 || r >= side as i64 || c >= side as i64 {
            0.0
        } else {
            img[r as usize][c as usize][ch]
        }
    };
    (0..side)
        .map(|r| {
            (0..side)
                .map(|c| {
                    (0..c_out)
                        .map(|o| {
                            let mut acc = bias[o];
                            for ci in 0..c_in {
                                for tap in 0..9 {
                                    let (dy, dx) = (tap as i64 / 3 - 1, tap as i64 % 3 - 1);
                                    acc += kern[(o * c_in + ci) * 9 + tap] * at(r as i64 + dy, c as i64 + dx, ci);
                                }
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

#[test]
fn dense_equivalence() {
    let start = Instant::now();
    let side = 32;
    let (c_in, c_out) = (3, 4);
    let b = lattice_bundle(side).unwrap();
    // place every grid point on the pixel lattice from its coordinates
    let active: Vec<_> = b.input.points.iter().filter(|p| !p.is_padding).collect();
    let x0 = active.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let y0 = active.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let x1 = active.iter().map(|p| p.x).fold(f64::NEG_INFINITY, f64::max);
    let pitch = (x1 - x0) / (side - 1) as f64;
    let cell = |x: f64, y: f64| -> (i64, i64) { (((y - y0) / pitch).round() as i64, ((x - x0) / pitch).round() as i64) };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let img: Vec<Vec<Vec<f64>>> = (0..side)
            .map(|_| (0..side).map(|_| (0..c_in).map(|_| rng.random_range(-1.0..1.0)).collect()).collect())
            .collect();
        let kern: Vec<f64> = (0..c_out * c_in * 9).map(|_| rng.random_range(-1.0..1.0)).collect();
        let bias: Vec<f64> = (0..c_out).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut x = vec![0.0; b.input.len() * c_in];
        for (i, p) in b.input.points.iter().enumerate() {
            if !p.is_padding {
                let (r, c) = cell(p.x, p.y);
                x[i * c_in..(i + 1) * c_in].copy_from_slice(&img[r as usize][c as usize]);
            }
        }
        let bank = KernelBank::new(c_out, c_in, 3, kern.clone()).unwrap();
        let got = apply_knn_conv(&b.table, &b.nbhd, &x, b.input.len(), c_in, &bank, &bias).unwrap();
        let want = dense_reference(&img, &kern, &bias, c_in);
        for (j, p) in b.output.points.iter().enumerate() {
            let (r, c) = cell(p.x, p.y);
            for o in 0..c_out {
                worst = worst.max((got[j * c_out + o] - want[r as usize][c as usize][o]).abs());
            }
        }
    }
    let took = start.elapsed();
    let pass = worst <= 1e-5 && took < Duration::from_secs(10);
    verdict("dense equivalence", pass, &format!("max abs {worst:.2e} over 20 trials (≤1e-5), {}", secs(took)));
}

#[test]
fn rf_trends() {
    let start = Instant::now();
    let stack = |a: f64| LayerStack::build(CmfParams::new(a, 8.0).unwrap(), 4096, &TOY_STACK).unwrap();

    let fov = rf_diameter_profile(&stack(0.5), DiameterStatistic::MaxExtent).unwrap();
    let fits: Vec<_> = fov.iter().map(|p| p.fit.expect("fit")).collect();
    let rising = fits.windows(2).all(|w| w[1].slope > w[0].slope && w[1].intercept > w[0].intercept);
    let slopes: Vec<String> = fits.iter().map(|f| format!("{:.3}/{:.3}", f.slope, f.intercept)).collect();

    let aspects: Vec<f64> = fov[2].records.iter().filter(|r| !r.touches_padding).map(|r| r.aspect).collect();
    let edges: Vec<f64> = (0..=20).map(|i| 1.0 + 0.1 * i as f64).collect();
    let counts = histogram(&aspects, &edges);
    let mode = counts.iter().enumerate().max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i))).unwrap().0;
    let mode_ok = edges[mode] >= 1.0 && edges[mode + 1] <= 1.3 + 1e-12;

    let uni = rf_diameter_profile(&stack(50.0), DiameterStatistic::MaxExtent).unwrap();
    let rel: Vec<f64> = uni
        .iter()
        .map(|p| {
            let inner: Vec<f64> = p.records.iter().filter(|r| !r.touches_padding).map(|r| r.diameter).collect();
            let mean = inner.iter().sum::<f64>() / inner.len() as f64;
            p.fit.expect("fit").slope.abs() / mean
        })
        .collect();
    let flat = rel.iter().all(|&r| r <= 0.02);
    let took = start.elapsed();

    let pass = rising && mode_ok && flat && took < Duration::from_secs(120);
    let rel: Vec<String> = rel.iter().map(|r| format!("{r:.4}")).collect();
    verdict(
        "rf trends",
        pass,
        &format!(
            "a=0.5 slope/intercept [{}] increasing={rising}; layer-3 aspect mode [{:.1}, {:.1}); a=50 |slope|/mean [{}] (≤0.02); {}",
            slopes.join(", "),
            edges[mode],
            edges[mode + 1],
            rel.join(", "),
            secs(took)
        ),
    );
}

#[test]
fn flops_model() {
    let start = Instant::now();
    let cfg = VitFlopsConfig::default();
    let ratio = vit_flops(&cfg, 196).unwrap().total() / vit_flops(&cfg, 64).unwrap().total();
    let ratio_ok = (ratio / 3.02 - 1.0).abs() <= 0.05;

    let ms: Vec<usize> = (0..=25).map(|i| 224 + 32 * i).collect();
    let rows = fixation_flops_curve(&cfg, &ms, &[1]).unwrap();
    let xs: Vec<f64> = ms.iter().map(|&m| m as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.attention).collect();
    let exponent = powerlaw_fit(&xs, &ys).unwrap().exponent;
    let exp_ok = (3.8..=4.0).contains(&exponent);

    let small = fixation_flops_curve(&cfg, &[64], &[20]).unwrap()[0].total;
    let big = fixation_flops_curve(&cfg, &[1024], &[1]).unwrap()[0].total;
    let gap = big / small;
    let gap_ok = gap >= 100.0;
    let took = start.elapsed();

    let pass = ratio_ok && exp_ok && gap_ok && took < Duration::from_secs(5);
    verdict(
        "flops model",
        pass,
        &format!(
            "196/64 ratio {ratio:.3} (3.02±5%); attention exponent {exponent:.3} ([3.8, 4.0]); 1×1024 / 20×64 = {gap:.1} (≥100); {}",
            secs(took)
        ),
    );
}

#[test]
fn property_cmf_round_trip() {
    let mut worst: f64 = 0.0;
    for i in 0..=200 {
        let a = 10f64.powf(-3.0 + 7.0 * i as f64 / 200.0);
        let p = CmfParams::new(a, 8.0).unwrap();
        for j in 0..=200 {
            let r = 8.0 * j as f64 / 200.0;
            worst = worst.max((p.invert(p.integrate(r).unwrap()).unwrap() - r).abs());
        }
    }
    verdict("property: cmf round trip", worst <= 1e-10, &format!("max |r − M⁻¹(M(r))| {worst:.2e} (≤1e-10)"));
}

#[test]
fn property_bilinear_affine_exactness() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for a in [0.1, 0.5, 5.0, 50.0] {
        let g = grid_for(a, 800, 4);
        for k in [9, 25] {
            let nb = knn(&g, &g, k).unwrap();
            for res in [1, 2] {
                let spec = ReferenceKernelSpec::new(k, res, g.delta_w).unwrap();
                let t = build_kernel_map(&nb, &spec).unwrap();
                let s = spec.s;
                let hi = s as f64 - 1.0;
                let (c0, cu, cv): (f64, f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                let kernel: Vec<f64> = (0..s * s).map(|q| c0 + cu * (q % s) as f64 + cv * (q / s) as f64).collect();
                for j in 0..t.n_out {
                    let vals = render_mapped_kernel(&t, &kernel, j).unwrap();
                    for (i, (u, v)) in neighborhood_reference_coords(&nb, &spec, j).into_iter().enumerate() {
                        if !t.is_out_of_extent(j, i) {
                            let want = c0 + cu * u.clamp(0.0, hi) + cv * v.clamp(0.0, hi);
                            worst = worst.max((vals[i] - want).abs());
                        }
                    }
                }
            }
        }
    }
    verdict("property: bilinear affine exactness", worst <= 1e-6, &format!("max residual {worst:.2e} (≤1e-6)"));
}

#[test]
fn property_foveation_linearity() {
    let g = grid_for(0.5, 2000, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut noise = || Image::from_fn(96, 80, 3, |_, _, _| rng.random::<f32>()).unwrap();
    let (i1, i2) = (noise(), noise());
    let (alpha, beta) = (0.7f32, -1.3f32);
    let mix = Image::new(96, 80, 3, i1.data.iter().zip(&i2.data).map(|(a, b)| alpha * a + beta * b).collect()).unwrap();
    let mut worst: f64 = 0.0;
    for (cx, cy, scale) in [(0.5, 0.5, 1.0), (0.45, 0.55, 0.9), (0.3, 0.6, 0.5)] {
        let fix = FixationSpec::new(cx, cy, scale).unwrap();
        let s1 = foveate(&i1, &g, &fix).unwrap();
        let s2 = foveate(&i2, &g, &fix).unwrap();
        let sm = foveate(&mix, &g, &fix).unwrap();
        for i in 0..sm.values.len() {
            let want = alpha as f64 * s1.values[i] as f64 + beta as f64 * s2.values[i] as f64;
            worst = worst.max((sm.values[i] as f64 - want).abs());
        }
    }
    verdict("property: foveation linearity", worst <= 1e-6, &format!("max residual {worst:.2e} (≤1e-6)"));
}

#[test]
fn property_fixation_disc() {
    let radius = 0.25;
    let fx = sample_fixations(&FixationZone::new(radius, 100_000, 11).unwrap(), 1.0);
    let mean = fx.iter().map(|f| (f.cx - 0.5).hypot(f.cy - 0.5)).sum::<f64>() / fx.len() as f64;
    let want = 2.0 * radius / 3.0;
    let pass = fx.len() == 100_000 && (mean - want).abs() <= 0.002;
    verdict("property: fixation disc", pass, &format!("mean radius {mean:.5} vs {want:.5} ±0.002 over 1e5 draws"));
}

fn agreement(a: &NeighborhoodSet, b: &NeighborhoodSet) -> f64 {
    let mut shared = 0usize;
    for j in 0..a.n_out {
        let sa: HashSet<u32> = a.row(j).iter().copied().collect();
        shared += b.row(j).iter().filter(|i| sa.contains(i)).count();
    }
    shared as f64 / (a.n_out * a.k) as f64
}

#[test]
fn property_knn_vs_dijkstra() {
    let mut lowest: f64 = 1.0;
    let mut lines = Vec::new();
    for a in [0.5, 5.0] {
        let g = grid_for(a, 5000, 3);
        let graph = build_metric_graph_with(&g, 3.0, Metric::Chord);
        for k in [9, 25] {
            let v = agreement(&knn(&g, &g, k).unwrap(), &knn_geodesic(&g, &graph, &g, k).unwrap());
            lowest = lowest.min(v);
            lines.push(format!("a={a} k={k} n={}: {v:.4}", g.n_active));
        }
    }
    verdict("property: knn vs dijkstra", lowest >= 0.95, &format!("{} (≥0.95)", lines.join(", ")));
}
