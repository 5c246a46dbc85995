use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use foveakit::analysis::{
    fixation_flops_curve, histogram, rf_diameter_profile, vit_flops, DiameterStatistic, LayerStack, VitFlopsConfig, TOY_STACK,
};
use foveakit::baselines::{
    baseline_anisotropy, dr_dtheta_profile, grid_anisotropy, logpolar_grid, sensor_dr_dtheta_profile, warped_cartesian_grid,
    AnisotropySample, BaselineGrid, DrDthetaSample, WarpProfile,
};
use foveakit::io::{
    load_bundle, load_grid, load_signal, read_image, render_plot, save_baseline, save_grid, save_signal, write_bundle, write_csv,
    write_png, write_reference, Bounds, BundleMeta, Series,
};
use foveakit::kernel_map::{build_kernel_map, lattice_dense_deviation, ReferenceKernelSpec};
use foveakit::neighborhoods::{coverage, knn_with, min_covering_k, Metric};
use foveakit::resampler::{
    backproject, foveate as sample_image, local_resolution_profile, native_crossing, sample_fixations, FixationSpec, FixationZone,
    Image,
};
use foveakit::sampler::{default_pad_rings, search_resolution, solve_a_for_exact_n, SolveOptions};
use foveakit::{CmfParams, Error, GridOptions, IsotropyRule, Layout, SensorGrid};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{
    AnisotropyArgs, DrDthetaArgs, ExportArgs, FlopsArgs, FoveateArgs, GridArgs, KindArg, MetricArg, RenderArgs, ResolutionArgs,
    Report, RfArgs, RuleArg, SolveArgs, StatArg, TablesArgs, UsageError,
};

const PLOT_SIZE: usize = 640;
const BLACK: [u8; 3] = [20, 20, 20];
const GREY: [u8; 3] = [170, 170, 170];
const PALETTE: [[u8; 3]; 5] = [[31, 119, 180], [255, 127, 14], [44, 160, 44], [214, 39, 40], [148, 103, 189]];
/// Dense-equivalence tolerance for `tables --self-test`.
const SELF_TEST_TOL: f64 = 1e-5;

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn report(text: String, json: Value) -> Result<Report> {
    Ok(Report { text, json })
}

fn rule(r: RuleArg) -> IsotropyRule {
    match r {
        RuleArg::FiniteDifference => IsotropyRule::FiniteDifference,
        RuleArg::Differential => IsotropyRule::Differential,
    }
}

fn fixation(cx: f64, cy: f64, scale: f64) -> Result<FixationSpec> {
    FixationSpec::new(cx, cy, scale).map_err(|e| usage(e.to_string()))
}

fn plot_grid(grid: &SensorGrid, flat: bool, path: &Path) -> Result<()> {
    let coords = |pad: bool, left: Option<bool>| -> Vec<[f64; 2]> {
        grid.points
            .iter()
            .filter(|p| p.is_padding == pad)
            .filter(|p| left.map_or(true, |l| (p.hemifield as u8 == 0) == l))
            .map(|p| if flat { [p.flat_u, p.flat_v] } else { [p.x, p.y] })
            .collect()
    };
    let series = if flat {
        vec![
            Series::scatter(coords(false, Some(true)), PALETTE[0]),
            Series::scatter(coords(false, Some(false)), PALETTE[1]),
            Series::scatter(coords(true, None), GREY),
        ]
    } else {
        vec![Series::scatter(coords(true, None), GREY), Series::scatter(coords(false, None), BLACK)]
    };
    let bounds = Bounds::fit(&series).map(|b| if flat { b } else { b.square() });
    let img = render_plot(&series, PLOT_SIZE, PLOT_SIZE, bounds)?;
    Ok(write_png(path, &img)?)
}

pub fn grid(args: GridArgs) -> Result<Report> {
    let params = CmfParams::from_fov(args.a, args.fov)?;
    let grid = if let Some(side) = args.lattice {
        SensorGrid::lattice(params, side, args.pad_rings)?
    } else {
        let r = rule(args.rule);
        let n_r = match (args.n_r, args.target_n) {
            (Some(n), _) => n,
            (None, Some(t)) => search_resolution(&params, t, r)?.n_r,
            (None, None) => unreachable!("clap requires a size flag"),
        };
        let opts = GridOptions { pad_rings: args.pad_rings, stagger: args.stagger, rule: r };
        SensorGrid::build(params, n_r, opts)?
    };
    let mut files = Vec::new();
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        files.push(save_grid(&grid, dir, &args.stem)?);
        if args.png {
            for (flat, suffix) in [(false, "points"), (true, "flat")] {
                let p = dir.join(format!("{}.{suffix}.png", args.stem));
                plot_grid(&grid, flat, &p)?;
                files.push(p);
            }
        }
    }
    let radii = grid.scheme.as_ref().map(|s| s.radii.clone()).unwrap_or_default();
    let n_r = grid.scheme.as_ref().map(|s| s.n_r);
    let mut text = format!(
        "a {} fov {} -> {} active points ({} with padding)\n",
        args.a,
        args.fov,
        grid.n_active,
        grid.len()
    );
    if let Some(n_r) = n_r {
        let shown: Vec<String> = radii[..n_r.min(8)].iter().map(|r| format!("{r:.4}")).collect();
        let more = if n_r > 8 { " …" } else { "" };
        writeln!(text, "n_r {n_r}, delta_w {:.6}, radii {}{more}", grid.delta_w, shown.join(" "))?;
    }
    writeln!(text, "fingerprint {}", grid.fingerprint())?;
    for f in &files {
        writeln!(text, "wrote {}", f.display())?;
    }
    report(
        text,
        json!({
            "a": args.a,
            "fov": args.fov,
            "n_r": n_r,
            "n_active": grid.n_active,
            "n_points": grid.len(),
            "delta_w": grid.delta_w,
            "radii": radii,
            "ring_counts": grid.ring_counts,
            "fingerprint": grid.fingerprint(),
            "files": files,
        }),
    )
}

pub fn tables(args: TablesArgs) -> Result<Report> {
    if args.reference_cases == Some(0) {
        return Err(usage("--reference-cases must be positive"));
    }
    let input = load_grid(&args.grid_in)?;
    let output = match (&args.out_grid, args.target_n_out) {
        (Some(p), _) => load_grid(p)?,
        (None, Some(t)) => {
            if !matches!(input.layout, Layout::Rings) {
                return Err(usage("--target-n-out needs a ring grid input; pass --out-grid for lattices"));
            }
            let n_r = search_resolution(&input.params, t, input.options.rule)?.n_r;
            let opts = GridOptions { pad_rings: 0, ..input.options };
            SensorGrid::build(input.params, n_r, opts)?
        }
        (None, None) => unreachable!("clap requires an output grid"),
    };
    let metric = match args.metric {
        MetricArg::Chord => Metric::Chord,
        MetricArg::MeanEccentricity => Metric::MeanEccentricity,
    };
    let covering = if args.min_covering {
        if metric != Metric::Chord {
            return Err(usage("--min-covering uses the chord metric"));
        }
        Some(min_covering_k(&input, &output)?)
    } else {
        None
    };
    let k = covering.as_ref().map_or_else(|| args.k.expect("clap requires k"), |c| c.k);
    let nbhd = knn_with(&input, &output, k, metric)?;
    let covered = coverage(&input, &nbhd);
    if args.min_covering && covered < 1.0 {
        bail!("minimum covering k={k} leaves coverage at {covered}");
    }
    let spec = ReferenceKernelSpec::new(k, args.res_multiplier, input.delta_w).map_err(|e| usage(e.to_string()))?;
    let table = build_kernel_map(&nbhd, &spec)?;
    let meta = BundleMeta { metric, covering: covering.clone(), seed: args.seed, ..Default::default() };
    let manifest = write_bundle(&args.out, &input, &output, &nbhd, &spec, &table, meta)?;
    let overlap = (nbhd.n_out * k) as f64 / input.n_active as f64;

    let mut text = format!(
        "k {k}{}, overlap {overlap:.3}, coverage {:.2}%\n",
        if args.min_covering { " (minimum covering)" } else { "" },
        100.0 * covered
    );
    writeln!(
        text,
        "neighbourhoods {}×{k}, table {}×{k}×4 over a {}×{} kernel, {} slots out of extent",
        nbhd.n_out,
        table.n_out,
        spec.s,
        spec.s,
        table.dropped()
    )?;
    writeln!(text, "wrote {}", manifest.display())?;
    let mut out = json!({
        "k": k,
        "overlap": overlap,
        "coverage": covered,
        "covering": covering,
        "n_in": input.len(),
        "n_out": nbhd.n_out,
        "kernel": spec,
        "out_of_extent": table.dropped(),
        "neighborhood_shape": [nbhd.n_out, k],
        "table_shape": [table.n_out, k, 4],
        "bundle": manifest,
    });

    if args.self_test {
        // run on the artifact as written, not the in-memory tables
        let b = load_bundle(&args.out)?;
        let dev = lattice_dense_deviation(&b.input, &b.nbhd, &b.table, 2, 3, 20, args.seed.unwrap_or(0))?;
        let pass = dev <= SELF_TEST_TOL;
        writeln!(text, "self-test: max |kNN - dense| = {dev:.3e} ({})", if pass { "pass" } else { "FAIL" })?;
        out["self_test"] = json!({ "max_abs_deviation": dev, "tolerance": SELF_TEST_TOL, "pass": pass });
        if !pass {
            bail!("self-test failed: deviation {dev:e} exceeds {SELF_TEST_TOL:e}");
        }
    }
    if let Some(cases) = args.reference_cases {
        let seed = args.seed.expect("clap requires seed");
        let path = write_reference(&args.out, &args.out.join("reference"), cases, args.c_in, args.c_out, seed)?;
        writeln!(text, "wrote {cases} reference cases to {}", path.display())?;
        out["reference"] = json!(path);
    }
    report(text, out)
}

fn render_signal_image(back: &Image) -> Result<Image> {
    let c = back.channels - 1;
    if c != 1 && c != 3 {
        bail!(UsageError(format!("can only render 1- or 3-channel signals, got {c}")));
    }
    let mut data = Vec::with_capacity(back.width * back.height * c);
    for px in back.data.chunks_exact(back.channels) {
        if px[c] > 0.0 {
            data.extend_from_slice(&px[..c]);
        } else {
            data.extend(std::iter::repeat(0.5).take(c));
        }
    }
    Ok(Image::new(back.width, back.height, c, data)?)
}

pub fn foveate(args: FoveateArgs) -> Result<Report> {
    let grid = load_grid(&args.grid)?;
    let image = read_image(&args.image)?;
    let fixations = match args.fixations {
        Some(n) => {
            let zone = FixationZone::new(args.radius, n, args.seed.expect("clap requires seed")).map_err(|e| usage(e.to_string()))?;
            sample_fixations(&zone, args.scale)
        }
        None => vec![fixation(args.cx, args.cy, args.scale)?],
    };
    ensure_dir(&args.out)?;
    let mut files = Vec::new();
    let mut rows = Vec::new();
    for (i, fix) in fixations.iter().enumerate() {
        let stem = if fixations.len() == 1 { args.stem.clone() } else { format!("{}_{i:03}", args.stem) };
        let signal = sample_image(&image, &grid, fix)?;
        files.push(save_signal(&signal, &args.out, &stem)?);
        if args.png {
            let back = backproject(&signal, &grid, image.width, image.height)?;
            let p = args.out.join(format!("{stem}.png"));
            write_png(&p, &render_signal_image(&back)?)?;
            files.push(p);
        }
        rows.push(json!({ "stem": stem, "cx": fix.cx, "cy": fix.cy, "scale": fix.scale }));
    }
    let mut text = format!(
        "{} fixation(s) of a {}×{}×{} image through {} points\n",
        fixations.len(),
        image.width,
        image.height,
        image.channels,
        grid.len()
    );
    for f in &files {
        writeln!(text, "wrote {}", f.display())?;
    }
    report(text, json!({ "fixations": rows, "n": grid.len(), "channels": image.channels, "files": files }))
}

pub fn render(args: RenderArgs) -> Result<Report> {
    let grid = load_grid(&args.grid)?;
    let (w, h) = match &args.signal {
        Some(sig_path) => {
            let signal = load_signal(sig_path)?;
            if signal.grid_id != grid.fingerprint() {
                return Err(Error::Integrity {
                    path: sig_path.clone(),
                    reason: "signal was sampled on a different grid".into(),
                }
                .into());
            }
            let (w, h) = (args.width.unwrap_or(signal.source_width), args.height.unwrap_or(signal.source_height));
            let back = backproject(&signal, &grid, w, h)?;
            write_png(&args.out, &render_signal_image(&back)?)?;
            (w, h)
        }
        None => {
            plot_grid(&grid, args.flat, &args.out)?;
            (PLOT_SIZE, PLOT_SIZE)
        }
    };
    report(format!("wrote {} ({w}×{h})\n", args.out.display()), json!({ "file": args.out, "width": w, "height": h }))
}

#[derive(Serialize)]
struct RfRow {
    layer: usize,
    unit: usize,
    eccentricity: f64,
    diameter: f64,
    aspect: f64,
    size: usize,
    touches_padding: bool,
}

/// Lower edge of the fullest `0.1`-wide bin of finite aspect ratios in `[1, 3)`.
fn aspect_mode(aspects: &[f64]) -> Option<f64> {
    let edges: Vec<f64> = (0..=20).map(|i| 1.0 + 0.1 * i as f64).collect();
    let counts = histogram(aspects, &edges);
    let (i, &c) = counts.iter().enumerate().max_by_key(|&(i, c)| (*c, std::cmp::Reverse(i)))?;
    (c > 0).then_some(edges[i])
}

pub fn analyze_rf(args: RfArgs) -> Result<Report> {
    let params = CmfParams::from_fov(args.a, args.fov)?;
    let stat = match args.stat {
        StatArg::MaxExtent => DiameterStatistic::MaxExtent,
        StatArg::Gaussian => DiameterStatistic::Gaussian,
    };
    let stack = LayerStack::build(params, args.n_input, &TOY_STACK)?;
    let profile = rf_diameter_profile(&stack, stat)?;
    let mut text = String::from("layer  units  slope  intercept  r2     mean_diam  slope/mean  aspect_mode\n");
    let mut layers = Vec::new();
    let mut rows = Vec::new();
    let mut series = Vec::new();
    for (i, p) in profile.iter().enumerate() {
        let clean: Vec<_> = p.records.iter().filter(|r| !r.touches_padding).collect();
        let mean = clean.iter().map(|r| r.diameter).sum::<f64>() / clean.len().max(1) as f64;
        let aspects: Vec<f64> = clean.iter().map(|r| r.aspect).filter(|a| a.is_finite()).collect();
        let mode = aspect_mode(&aspects);
        if let Some(f) = &p.fit {
            writeln!(
                text,
                "{:<6} {:<6} {:<6.3} {:<10.3} {:<6.3} {:<10.3} {:<11.4} {}",
                p.layer,
                clean.len(),
                f.slope,
                f.intercept,
                f.r_squared,
                mean,
                f.slope / mean,
                mode.map_or("-".into(), |m| format!("{m:.1}-{:.1}", m + 0.1))
            )?;
        }
        layers.push(json!({
            "layer": p.layer,
            "fit": p.fit,
            "units_fitted": clean.len(),
            "mean_diameter": mean,
            "relative_slope": p.fit.as_ref().map(|f| f.slope / mean),
            "aspect_mode": mode,
        }));
        series.push(Series::scatter(clean.iter().map(|r| [r.eccentricity, r.diameter]).collect(), PALETTE[i % PALETTE.len()]));
        rows.extend(p.records.iter().map(|r| RfRow {
            layer: r.layer,
            unit: r.unit,
            eccentricity: r.eccentricity,
            diameter: r.diameter,
            aspect: r.aspect,
            size: r.size,
            touches_padding: r.touches_padding,
        }));
    }
    let mut files = Vec::new();
    if let Some(dir) = &args.out {
        ensure_dir(dir)?;
        let csv = dir.join("rf_units.csv");
        write_csv(&csv, &rows)?;
        let fits = dir.join("rf_fits.json");
        fs::write(&fits, serde_json::to_string_pretty(&layers)? + "\n").with_context(|| format!("writing {}", fits.display()))?;
        let png = dir.join("rf_diameter.png");
        write_png(&png, &render_plot(&series, PLOT_SIZE, PLOT_SIZE, None)?)?;
        files = vec![csv, fits, png];
    }
    for f in &files {
        writeln!(text, "wrote {}", f.display())?;
    }
    report(text, json!({ "a": args.a, "n_input": args.n_input, "layers": layers, "files": files }))
}

pub fn analyze_resolution(args: ResolutionArgs) -> Result<Report> {
    let grid = load_grid(&args.grid)?;
    let fix = fixation(args.cx, args.cy, args.scale)?;
    let profile = local_resolution_profile(&grid, args.width, args.height, &fix)?;
    let crossing = native_crossing(&profile);
    if let Some(p) = &args.out {
        write_csv(p, &profile)?;
    }
    let text = match crossing {
        Some(r) => format!("sensor density falls below the native pixel grid at r = {r:.3} deg\n"),
        None => "no crossing of native resolution inside the field of view\n".into(),
    };
    report(text, json!({ "crossing": crossing, "profile": profile }))
}

fn foveated_for(a: f64, fov: f64, target: usize, pad: usize) -> Result<SensorGrid> {
    let params = CmfParams::from_fov(a, fov)?;
    let n_r = search_resolution(&params, target, IsotropyRule::FiniteDifference)?.n_r;
    Ok(SensorGrid::build(params, n_r, GridOptions { pad_rings: pad, ..Default::default() })?)
}

fn baseline_for(kind: KindArg, a: f64, fov: f64, side: usize) -> Result<BaselineGrid> {
    Ok(match kind {
        KindArg::LogPolar => logpolar_grid(a, side, side, fov / 2.0)?,
        KindArg::Warped => warped_cartesian_grid(WarpProfile::Hyperbolic { a }, side, fov / 2.0)?,
        KindArg::Foveated => unreachable!("foveated grids are not baselines"),
    })
}

pub fn anisotropy(args: AnisotropyArgs) -> Result<Report> {
    if let Some(r) = args.r.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(usage(format!("--r must lie in [0, 1], got {r}")));
    }
    let samples: Vec<AnisotropySample> = if args.kind == KindArg::Foveated {
        // padding keeps footprints near the field edge from being cut off
        let grid = foveated_for(args.a, args.fov, args.target_n.unwrap_or(args.side * args.side), default_pad_rings(args.k))?;
        let scheme = grid.scheme.as_ref().expect("ring grid");
        let ids: Vec<usize> = args
            .r
            .iter()
            .map(|&r| grid.ring_starts[(r * (scheme.n_r - 1) as f64).round() as usize])
            .collect();
        grid_anisotropy(&grid, &ids, args.k)?
    } else {
        let g = baseline_for(args.kind, args.a, args.fov, args.side)?;
        let ids: Vec<usize> = args.r.iter().map(|&r| g.element_at_radius(r)).collect();
        baseline_anisotropy(&g, &ids, args.k)?
    };
    #[derive(Serialize)]
    struct Row {
        r_sensor: f64,
        element: usize,
        eccentricity: f64,
        anisotropy: f64,
    }
    let rows: Vec<Row> = args
        .r
        .iter()
        .zip(&samples)
        .map(|(&r, s)| Row { r_sensor: r, element: s.index, eccentricity: s.r, anisotropy: s.value })
        .collect();
    if let Some(p) = &args.out {
        write_csv(p, &rows)?;
    }
    let mut text = String::new();
    for r in &rows {
        writeln!(text, "r {:.3} (eccentricity {:.3} deg): anisotropy {:.4}", r.r_sensor, r.eccentricity, r.anisotropy)?;
    }
    report(text, json!({ "k": args.k, "samples": rows }))
}

pub fn dr_dtheta(args: DrDthetaArgs) -> Result<Report> {
    let profile: Vec<DrDthetaSample> = match args.kind {
        KindArg::Foveated => sensor_dr_dtheta_profile(&foveated_for(args.a, args.fov, args.target_n.unwrap_or(args.side * args.side), 1)?)?,
        KindArg::LogPolar => dr_dtheta_profile(&baseline_for(KindArg::LogPolar, args.a, args.fov, args.side)?)?,
        KindArg::Warped => return Err(usage("dr-dtheta applies to log-polar and foveated samplers")),
    };
    if let Some(p) = &args.out {
        write_csv(p, &profile)?;
    }
    let mut ratios: Vec<f64> = profile.iter().map(|s| s.ratio).collect();
    ratios.sort_by(f64::total_cmp);
    let median = ratios.get(ratios.len() / 2).copied();
    let text = format!(
        "{} rings, dr/dtheta median {:.4}, min {:.4}, max {:.4}\n",
        ratios.len(),
        median.unwrap_or(f64::NAN),
        ratios.first().copied().unwrap_or(f64::NAN),
        ratios.last().copied().unwrap_or(f64::NAN)
    );
    report(text, json!({ "median": median, "profile": profile }))
}

pub fn export_baseline(args: ExportArgs) -> Result<Report> {
    if args.kind == KindArg::Foveated {
        return Err(usage("use `grid` to build foveated grids"));
    }
    let g = baseline_for(args.kind, args.a, args.fov, args.side)?;
    ensure_dir(&args.out)?;
    let path = save_baseline(&g, &args.out, &args.stem)?;
    report(
        format!("{} {}×{} written to {}\n", g.kind, g.rows, g.cols, path.display()),
        json!({ "kind": g.kind, "rows": g.rows, "cols": g.cols, "manifest": path }),
    )
}

pub fn flops(args: FlopsArgs) -> Result<Report> {
    let cfg = VitFlopsConfig {
        embed_dim: args.embed_dim,
        mlp_dim: args.mlp_dim,
        layers: args.layers,
        heads: args.heads,
        patch_size: args.patch_size,
        in_channels: 3,
        extra_tokens: args.extra_tokens,
        num_classes: args.num_classes,
        gated_mlp: !args.ungated,
        include_bias: args.bias,
    };
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    let mut text = String::new();
    let mut per_tokens = Vec::new();
    for &t in &args.tokens {
        let f = vit_flops(&cfg, t)?;
        writeln!(text, "{t} tokens: {:.4} GFLOPs ({:.4} attention)", f.total() / 1e9, f.attention / 1e9)?;
        per_tokens.push(json!({ "tokens": t, "attention": f.attention, "non_attention": f.non_attention, "total": f.total() }));
    }
    let mut out = json!({ "config": cfg, "tokens": per_tokens });
    if let Some(&last) = args.tokens.last().filter(|_| args.tokens.len() > 1) {
        let base = vit_flops(&cfg, last)?.total();
        let ratios: Vec<f64> = args.tokens.iter().map(|&t| Ok(vit_flops(&cfg, t)?.total() / base)).collect::<Result<_>>()?;
        for (t, r) in args.tokens.iter().zip(&ratios).take(args.tokens.len() - 1) {
            writeln!(text, "ratio {t}/{last}: {r:.3}")?;
        }
        out["ratio"] = json!(ratios[0]);
        out["ratios"] = json!(ratios);
    }
    if !args.resolution.is_empty() {
        let rows = fixation_flops_curve(&cfg, &args.resolution, &args.fixations)?;
        for r in &rows {
            writeln!(text, "{}px × {} fixation(s): {:.4} GFLOPs", r.resolution, r.fixations, r.total / 1e9)?;
        }
        if let Some(p) = &args.out {
            write_csv(p, &rows)?;
            let png = p.with_extension("png");
            let series: Vec<Series> = args
                .fixations
                .iter()
                .enumerate()
                .map(|(i, &f)| {
                    let pts = rows.iter().filter(|r| r.fixations == f).map(|r| [(r.tokens as f64).ln(), r.total.ln()]).collect();
                    Series::line(pts, PALETTE[i % PALETTE.len()])
                })
                .collect();
            write_png(&png, &render_plot(&series, PLOT_SIZE, PLOT_SIZE, None)?)?;
            writeln!(text, "wrote {} and {}", p.display(), png.display())?;
        }
        out["curve"] = json!(rows);
    }
    report(text, out)
}

pub fn solve_a(args: SolveArgs) -> Result<Report> {
    if args.n_r_min > args.n_r_max {
        return Err(usage("--n-r-min exceeds --n-r-max"));
    }
    let opts = SolveOptions {
        n_r_range: args.n_r_min..=args.n_r_max,
        r_max: args.fov / 2.0,
        a_min: args.a_min,
        a_max: args.a_max,
        ..Default::default()
    };
    let sols = solve_a_for_exact_n(args.n, &opts)?;
    let shown: Vec<String> = sols.iter().map(|s| format!("{:.2}", s.display)).collect();
    let mut text = shown.join(" ");
    text.push('\n');
    report(text, json!({ "n": args.n, "values": sols.iter().map(|s| s.display).collect::<Vec<_>>(), "solutions": sols }))
}
