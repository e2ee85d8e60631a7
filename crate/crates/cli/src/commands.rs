use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use num_bigint::BigInt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use hyperfill::curves::fixtures::{self, Perturbation};
use hyperfill::curves::*;
use hyperfill::surfaces::*;
use hyperfill::surgery::script::{filling_to_value, int_to_value, run_script, MoveScript, SLOPESEQN_SCRIPT};
use hyperfill::surgery::*;
use hyperfill::tube::*;

use crate::config::RunConfig;
use crate::grid_csv::read_surface;
use crate::output::{fmt_float, Table};

/// A finished run: the JSON report, its CSV view and whether every
/// tolerance held.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub report: Value,
    pub table: Table,
    pub passed: bool,
}

pub const CURVE_FIXTURES: [&str; 5] = ["geodesic", "equidistant", "circle", "horocycle", "perturbed-geodesic"];

#[derive(Debug, Clone, Default, clap::Args)]
pub struct CurveArgs {
    /// geodesic | equidistant | circle | horocycle | perturbed-geodesic
    #[arg(long)]
    pub fixture: Option<String>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub length: Option<f64>,
    /// Distance from the axis, for `equidistant`.
    #[arg(long, default_value_t = 0.5)]
    pub d: f64,
    /// Radius, for `circle`.
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Hyperbolic dimension, for `geodesic`.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Mode amplitude bound, for `perturbed-geodesic`.
    #[arg(long)]
    pub amplitude: Option<f64>,
    /// Quasi-geodesic constant to test instead of the one implied by the curvature.
    #[arg(long)]
    pub k: Option<f64>,
    /// Skip the quasi-geodesic and displacement checks.
    #[arg(long)]
    pub no_quasi: bool,
}

pub fn curve_check(cfg: &RunConfig, args: &CurveArgs) -> anyhow::Result<Outcome> {
    let fixture = args.fixture.clone().unwrap_or_else(|| cfg.curves.fixture.clone());
    let dt = args.dt.unwrap_or(cfg.curves.dt);
    let length = args.length.unwrap_or(cfg.curves.length);
    let amplitude = args.amplitude.unwrap_or(cfg.curves.amplitude);
    let (path, params) = match fixture.as_str() {
        "geodesic" => (fixtures::geodesic(args.dim, length, dt)?, json!({ "dim": args.dim })),
        "equidistant" => (fixtures::equidistant(args.d, length, dt)?, json!({ "d": args.d })),
        "circle" => (fixtures::circle(args.rho, length, dt)?, json!({ "rho": args.rho })),
        "horocycle" => (fixtures::horocycle(length, dt)?, json!({})),
        "perturbed-geodesic" => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let pert = Perturbation::random(&mut rng, amplitude);
            let path = fixtures::perturbed_geodesic(&pert, length, dt)?;
            (
                path,
                json!({ "amplitude": amplitude, "seed": cfg.seed, "perturbation": pert }),
            )
        }
        other => bail!(
            "unknown curve fixture {other:?}; expected one of {}",
            CURVE_FIXTURES.join(", ")
        ),
    };
    let profile = geodesic_curvature(&path)?;
    let identity = accel_identity_residual(&path)?;
    let chord = chord_hausdorff(&path)?;
    let slack = cfg.curves.violation_factor * dt;

    let mut passed = identity < cfg.curves.identity_tol;
    let mut quasi = json!({ "k": null, "quasi_constant": null, "lower_violation": null, "upper_excess": null });
    let mut displacement = Value::Null;
    if !args.no_quasi {
        let qc = quasi_constant(profile.max_kappa)?;
        let k = args.k.unwrap_or(qc);
        let rep = verify_quasi_geodesic(&path, k)?;
        let excess = displacement_excess(&path, &profile)?;
        passed &= rep.lower_violation < slack && excess <= slack;
        quasi = json!({
            "k": k,
            "quasi_constant": qc,
            "lower_violation": rep.lower_violation,
            "upper_excess": rep.upper_excess,
        });
        displacement = json!(excess);
    }

    let mut report = json!({
        "command": "curve-check",
        "fixture": fixture,
        "params": params,
        "dt": dt,
        "length": length,
        "samples": path.len(),
        "max_kappa": profile.max_kappa,
        "chord_hausdorff": chord,
        "accel_identity_residual": identity,
        "displacement_excess": displacement,
        "tolerances": { "lower_violation": slack, "displacement": slack, "accel_identity_residual": cfg.curves.identity_tol },
        "pass": passed,
    });
    merge(&mut report, quasi);

    let mut table = Table::new(&["index", "t", "kappa"]);
    for (k, kappa) in profile.values.iter().enumerate() {
        let i = profile.first_index + k;
        table.push(vec![i.to_string(), fmt_float(path.t(i)), fmt_float(*kappa)]);
    }
    Ok(Outcome { report, table, passed })
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct SurfaceArgs {
    /// geodesic-plane | horosphere | equidistant | equidistant:<d>
    #[arg(long, conflicts_with = "csv")]
    pub fixture: Option<String>,
    /// Grid file with `nu,nv` followed by `u_index,v_index,x0,x1,x2,x3` rows.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[arg(long)]
    pub h: Option<f64>,
    #[arg(long)]
    pub half_width: Option<f64>,
    #[arg(long)]
    pub probes: Option<usize>,
    /// Gauss residual tolerance.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

pub fn surface_check(cfg: &RunConfig, args: &SurfaceArgs) -> anyhow::Result<Outcome> {
    let h = args.h.unwrap_or(cfg.surfaces.h);
    let half_width = args.half_width.unwrap_or(cfg.surfaces.half_width);
    let tol = args.tolerance.unwrap_or(cfg.surfaces.gauss_tol);
    if !(tol > 0.0) {
        bail!("tolerance must be positive, got {tol}");
    }
    let (surface, source) = match &args.csv {
        Some(p) => {
            let file = std::fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
            let s = read_surface(file, cfg.tau_point).with_context(|| format!("reading {}", p.display()))?;
            (s, json!({ "kind": "csv", "path": p.display().to_string() }))
        }
        None => {
            let name = args.fixture.clone().unwrap_or_else(|| cfg.surfaces.fixture.clone());
            let fx: SurfaceFixture = name.parse()?;
            let mut src = serde_json::to_value(fx)?;
            src["h"] = json!(h);
            src["half_width"] = json!(half_width);
            (fx.surface_with(half_width, h)?, src)
        }
    };

    let forms = fundamental_forms(&surface)?;
    let pc = principal_curvatures(&forms)?;
    let k = intrinsic_curvature(&forms)?;
    let residual = gauss_residual_from(&k, &pc);
    let opts = CertificateOptions {
        probes: args.probes.unwrap_or(cfg.surfaces.probes),
        seed: cfg.seed,
        tolerance: None,
    };
    let cert = small_curvature_certificate_with(&surface, &opts)?;
    let passed = residual < tol;

    let g = surface.grid();
    let report = json!({
        "command": "surface-check",
        "surface": source,
        "grid": { "nu": g.nu, "nv": g.nv, "du": g.du, "dv": g.dv },
        "lambda1_range": [pc.lambda1.min(), pc.lambda1.max()],
        "lambda2_range": [pc.lambda2.min(), pc.lambda2.max()],
        "intrinsic_curvature_range": [k.min(), k.max()],
        "second_form_asymmetry": forms.asymmetry(),
        "gauss_residual": residual,
        "certificate": {
            "max_abs_principal": cert.max_abs_principal,
            "quasi_constant": cert.quasi_constant,
            "probe_tolerance": cert.probe_tolerance,
            "probes_hold": cert.probes_hold(),
            "max_probe_kappa": cert.max_probe_kappa(),
            "probes": cert.probes.iter().map(|p| json!({
                "start": p.start,
                "angle": p.angle,
                "samples": p.samples,
                "max_kappa": p.max_kappa,
            })).collect::<Vec<_>>(),
        },
        "tolerances": { "gauss_residual": tol },
        "pass": passed,
    });

    let mut table = Table::new(&["i", "j", "u", "v", "lambda1", "lambda2", "intrinsic_curvature"]);
    for i in 0..g.nu {
        for j in 0..g.nv {
            if let (Some(l1), Some(l2), Some(kf)) = (pc.lambda1.get(i, j), pc.lambda2.get(i, j), k.get(i, j)) {
                table.push(vec![
                    i.to_string(),
                    j.to_string(),
                    fmt_float(g.u(i)),
                    fmt_float(g.v(j)),
                    fmt_float(l1),
                    fmt_float(l2),
                    fmt_float(kf),
                ]);
            }
        }
    }
    Ok(Outcome { report, table, passed })
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct TubeArgs {
    /// Meridian length; `min` for e³π.
    #[arg(long, default_value = "100")]
    pub l: String,
    /// exponential | smoothstep
    #[arg(long, default_value = "exponential")]
    pub bump: String,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Also write `(r, k_ff, k_gg, k_fg)` rows here.
    #[arg(long)]
    pub curve_csv: Option<PathBuf>,
    /// Rows in the curvature table.
    #[arg(long, default_value_t = 1001)]
    pub curve_samples: usize,
}

pub fn parse_meridian_length(s: &str) -> anyhow::Result<f64> {
    match s.trim() {
        "min" | "e3pi" => Ok(min_meridian_length()),
        t => t.parse().map_err(|_| anyhow!("meridian length {s:?} is not a number")),
    }
}

pub fn tube(cfg: &RunConfig, args: &TubeArgs) -> anyhow::Result<Outcome> {
    let l = parse_meridian_length(&args.l)?;
    let bump = StandardBump::parse(&args.bump)
        .ok_or_else(|| anyhow!("unknown bump {:?}; expected exponential or smoothstep", args.bump))?;
    let samples = args.samples.unwrap_or(cfg.tube.samples);
    let m = build_tube_metric(l, bump)?;
    let rep = pinching_verify(&m, samples)?;
    let bf = boundary_form_check(&m, 1001);
    let (btol, etol) = (cfg.tube.boundary_tol, cfg.tube.endpoint_tol);
    let endpoints_ok = (bf.f_at_0 - l).abs() <= etol
        && (bf.g_at_0 - 1.0).abs() <= etol
        && bf.f_at_r0.abs() <= etol
        && (bf.df_at_r0 - 2.0 * std::f64::consts::PI).abs() <= etol;
    let passed = rep.holds() && rep.exact_region_deviation < btol && bf.max_deviation() < btol && endpoints_ok;
    let report = json!({
        "command": "tube",
        "l": l,
        "r0": rep.r0,
        "bump": rep.bump,
        "samples": rep.samples,
        "L_emp": rep.l_emp,
        "L_formula": rep.l_formula,
        "argmax_r": rep.argmax_r,
        "exact_region_deviation": rep.exact_region_deviation,
        "boundary": {
            "cusp_f": bf.cusp_f,
            "cusp_g": bf.cusp_g,
            "core_f": bf.core_f,
            "core_g": bf.core_g,
            "f_at_0": bf.f_at_0,
            "g_at_0": bf.g_at_0,
            "f_at_r0": bf.f_at_r0,
            "df_at_r0": bf.df_at_r0,
        },
        "tolerances": { "boundary": btol, "endpoints": etol },
        "pass": passed,
    });
    let mut table = Table::new(&["r", "k_ff", "k_gg", "k_fg"]);
    for (r, t) in curvature_table(&m, args.curve_samples)? {
        table.push(vec![
            fmt_float(r),
            fmt_float(t.k_ff),
            fmt_float(t.k_gg),
            fmt_float(t.k_fg),
        ]);
    }
    Ok(Outcome { report, table, passed })
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct SurgeryArgs {
    /// Move script (JSON); the bundled slope-sequence script when absent.
    #[arg(long)]
    pub script: Option<PathBuf>,
    /// Parameter override `name=integer`; repeatable.
    #[arg(long = "param", value_name = "NAME=INT")]
    pub params: Vec<String>,
}

pub const BUNDLED_SCRIPT_NAME: &str = "slopeseqn.json";

fn parse_param(s: &str) -> anyhow::Result<(String, BigInt)> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| anyhow!("parameter {s:?} is not NAME=INT"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() {
        bail!("parameter {s:?} has an empty name");
    }
    let v = v
        .parse()
        .map_err(|_| anyhow!("parameter {k}: {v:?} is not an integer"))?;
    Ok((k.to_string(), v))
}

fn load_script(path: Option<&Path>) -> anyhow::Result<(MoveScript, String)> {
    match path {
        None => Ok((
            MoveScript::from_json(SLOPESEQN_SCRIPT)?,
            format!("bundled:{BUNDLED_SCRIPT_NAME}"),
        )),
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Ok((MoveScript::from_json(&text)?, p.display().to_string()))
        }
    }
}

pub fn surgery(_cfg: &RunConfig, args: &SurgeryArgs) -> anyhow::Result<Outcome> {
    let (script, name) = load_script(args.script.as_deref())?;
    let overrides = args
        .params
        .iter()
        .map(|s| parse_param(s))
        .collect::<anyhow::Result<Vec<_>>>()?;
    let spec = run_script(&script, &overrides)?;
    let normalized = spec.normalized()?;
    let mut params: BTreeMap<String, BigInt> = script.params.clone();
    params.extend(overrides);
    let report = json!({
        "command": "surgery",
        "script": name,
        "params": params.iter().map(|(k, v)| (k.clone(), int_to_value(v))).collect::<serde_json::Map<_, _>>(),
        "filling": filling_to_value(&spec),
        "normalized": filling_to_value(&normalized),
        "pass": true,
    });
    let mut table = Table::new(&["cusp", "filled", "d", "p", "q"]);
    for (k, e) in spec.entries.iter().enumerate() {
        let row = match e {
            FillingEntry::Unfilled => vec![
                (k + 1).to_string(),
                "false".into(),
                String::new(),
                String::new(),
                String::new(),
            ],
            FillingEntry::Filled { d, class } => vec![
                (k + 1).to_string(),
                "true".into(),
                d.to_string(),
                class.p.to_string(),
                class.q.to_string(),
            ],
        };
        table.push(row);
    }
    Ok(Outcome {
        report,
        table,
        passed: true,
    })
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct GenusArgs {
    /// Cover degree.
    #[arg(long)]
    pub p: u64,
    /// Base surface: sphere, torus, or a genus.
    #[arg(long, default_value = "sphere")]
    pub base: String,
    #[arg(long)]
    pub branch_points: u64,
    /// Also count components of the lift of a curve with this linking number.
    #[arg(long, allow_hyphen_values = true)]
    pub lk: Option<i64>,
}

pub fn parse_base_genus(s: &str) -> anyhow::Result<u64> {
    match s.trim() {
        "sphere" => Ok(0),
        "torus" => Ok(1),
        t => t
            .parse()
            .map_err(|_| anyhow!("base {s:?} is not sphere, torus or a genus")),
    }
}

pub fn genus(_cfg: &RunConfig, args: &GenusArgs) -> anyhow::Result<Outcome> {
    let base = parse_base_genus(&args.base)?;
    let g = riemann_hurwitz_genus(args.p, base, args.branch_points)?;
    let components = args.lk.map(|lk| branched_cover_components(args.p, lk)).transpose()?;
    let report = json!({
        "command": "genus",
        "p": args.p,
        "base_genus": base,
        "branch_points": args.branch_points,
        "genus": int_to_value(&g),
        "lk": args.lk,
        "components": components,
        "pass": true,
    });
    let mut table = Table::new(&["p", "base_genus", "branch_points", "genus", "lk", "components"]);
    table.push(vec![
        args.p.to_string(),
        base.to_string(),
        args.branch_points.to_string(),
        g.to_string(),
        args.lk.map(|v| v.to_string()).unwrap_or_default(),
        components.map(|v| v.to_string()).unwrap_or_default(),
    ]);
    Ok(Outcome {
        report,
        table,
        passed: true,
    })
}

#[derive(Debug, Clone, Default, clap::Args)]
pub struct TriangleArgs {
    /// Three cone orders, each an integer >= 2 or `inf`.
    #[arg(num_args = 3, required = true)]
    pub orders: Vec<String>,
}

pub fn triangle(_cfg: &RunConfig, args: &TriangleArgs) -> anyhow::Result<Outcome> {
    let orders: Vec<ConeOrder> = args.orders.iter().map(|s| s.parse()).collect::<Result<_, _>>()?;
    let orders: [ConeOrder; 3] = orders
        .try_into()
        .map_err(|v: Vec<_>| anyhow!("need exactly three cone orders, got {}", v.len()))?;
    let geometry = triangle_orbifold_geometry(orders)?;
    let names: Vec<String> = orders
        .iter()
        .map(|o| match o {
            ConeOrder::Finite(n) => n.to_string(),
            ConeOrder::Infinite => "inf".into(),
        })
        .collect();
    let report = json!({
        "command": "triangle",
        "orders": names,
        "geometry": geometry,
        "hyperbolic": geometry == OrbifoldGeometry::Hyperbolic,
        "pass": true,
    });
    let mut table = Table::new(&["p1", "p2", "p3", "geometry"]);
    let mut row = names.clone();
    row.push(report["geometry"].as_str().unwrap_or_default().to_string());
    table.push(row);
    Ok(Outcome {
        report,
        table,
        passed: true,
    })
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}
