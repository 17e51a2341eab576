//! Command-line surface for the doubling-chain pipeline.

use chaincover_core::analysis::{
    doubling_constant, run_scaling_study, DoublingQuery, GridDomain, StudyConfig,
};
use chaincover_core::chain::{build_chain, verify_chain, ChainConfig, ChainError, DoublingChain};
use chaincover_core::clearball::{find_clear_ball, vitushkin_count};
use chaincover_core::multipoly::{MultiPoly, PolyJson};
use chaincover_core::punctured::{build_disk_chain, find_path_adaptive, audit_cover, PuncturedDisk};
use chaincover_core::svg::render_cover;
use chaincover_core::C64;
use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "chaincover", version, about = "Doubling chains in complements of algebraic hypersurfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Seed for all randomized choices (mandatory for reproducibility).
    #[arg(long, env = "CHAINCOVER_SEED", default_value_t = 0)]
    seed: u64,
    /// Sampling budget for grid clearance certificates.
    #[arg(long, env = "CHAINCOVER_BUDGET", default_value_t = 4096)]
    budget: usize,
    /// Rasterization resolution for path finding.
    #[arg(long, env = "CHAINCOVER_RESOLUTION", default_value_t = 2048)]
    resolution: usize,
    /// Worker cap; results are independent of this value.
    #[arg(long, env = "CHAINCOVER_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Primary JSON output path (stdout when omitted).
    #[arg(long, env = "CHAINCOVER_OUT")]
    out: Option<PathBuf>,
    /// Optional SVG output path.
    #[arg(long, env = "CHAINCOVER_SVG")]
    svg: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Build a certified doubling chain between two points.
    Build {
        #[arg(long, env = "CHAINCOVER_POLY")]
        poly: PathBuf,
        /// First endpoint as comma-separated re,im pairs.
        #[arg(long, allow_hyphen_values = true)]
        v1: String,
        /// Second endpoint as comma-separated re,im pairs.
        #[arg(long, allow_hyphen_values = true)]
        v2: String,
        #[arg(long, env = "CHAINCOVER_DELTA")]
        delta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Independently audit a chain file.
    Verify {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, env = "CHAINCOVER_POLY")]
        poly: PathBuf,
        #[arg(long, env = "CHAINCOVER_DELTA")]
        delta: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Build and audit a disk cover in a punctured disk.
    Cover {
        /// Punctures as semicolon-separated re,im pairs (may be empty).
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        punctures: String,
        /// Removed-neighborhood radius.
        #[arg(long, env = "CHAINCOVER_DELTA")]
        delta: f64,
        /// Path start, re,im.
        #[arg(long, allow_hyphen_values = true)]
        from: String,
        /// Path end, re,im.
        #[arg(long, allow_hyphen_values = true)]
        to: String,
        #[command(flatten)]
        common: Common,
    },
    /// Find a certified clear ball.
    Ball {
        #[arg(long, env = "CHAINCOVER_POLY")]
        poly: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Count epsilon-cubes meeting the hypersurface.
    Vitushkin {
        #[arg(long, env = "CHAINCOVER_POLY")]
        poly: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Doubling constant of 1/P between the delta sublevel grid and a ball.
    Dc {
        #[arg(long, env = "CHAINCOVER_POLY")]
        poly: PathBuf,
        #[arg(long, env = "CHAINCOVER_DELTA")]
        delta: f64,
        /// Ball center, comma-separated re,im pairs.
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long, default_value_t = 128)]
        grid_density: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Delta-sweep scaling study.
    Study {
        #[arg(long, env = "CHAINCOVER_POLY")]
        poly: PathBuf,
        /// Far point, comma-separated re,im pairs.
        #[arg(long, allow_hyphen_values = true)]
        v_far: String,
        /// Strictly decreasing comma-separated delta list.
        #[arg(long, allow_hyphen_values = true)]
        deltas: String,
        #[arg(long, default_value_t = 128)]
        grid_density: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(diag) => {
            eprintln!("{}", diag);
            ExitCode::FAILURE
        }
    }
}

fn diagnostic(kind: &str, detail: serde_json::Value) -> String {
    serde_json::json!({ "error": kind, "detail": detail }).to_string()
}

fn parse_point(text: &str) -> Result<Vec<C64>, String> {
    let nums: Result<Vec<f64>, _> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect();
    let nums = nums.map_err(|e| diagnostic("bad_point", serde_json::json!(e.to_string())))?;
    if nums.is_empty() || nums.len() % 2 != 0 {
        return Err(diagnostic(
            "bad_point",
            serde_json::json!("expected an even number of coordinates"),
        ));
    }
    Ok(nums.chunks(2).map(|c| C64::new(c[0], c[1])).collect())
}

fn parse_punctures(text: &str) -> Result<Vec<C64>, String> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    text.split(';')
        .map(|p| parse_point(p).map(|v| v[0]))
        .collect()
}

fn load_poly(path: &PathBuf) -> Result<MultiPoly, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| diagnostic("io", serde_json::json!(e.to_string())))?;
    let json: PolyJson = serde_json::from_str(&text)
        .map_err(|e| diagnostic("poly_parse", serde_json::json!(e.to_string())))?;
    MultiPoly::from_json(&json).map_err(|e| diagnostic("poly_invalid", serde_json::json!(e.to_string())))
}

fn emit(common: &Common, text: &str) -> Result<(), String> {
    match &common.out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| diagnostic("io", serde_json::json!(e.to_string()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn chain_config(common: &Common) -> ChainConfig {
    ChainConfig {
        seed: common.seed,
        budget: common.budget,
        resolution: common.resolution,
        workers: common.workers.max(1),
        ..ChainConfig::default()
    }
}

fn chain_error_diag(err: ChainError) -> String {
    match err {
        ChainError::EndpointWithinDelta { witness, dist } => diagnostic(
            "endpoint_within_delta",
            serde_json::json!({
                "witness": witness.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "dist": dist,
            }),
        ),
        other => diagnostic("chain_build", serde_json::json!(other.to_string())),
    }
}

fn run(cli: Cli) -> Result<bool, String> {
    match cli.command {
        Command::Build { poly, v1, v2, delta, common } => {
            let p = load_poly(&poly)?;
            let v1 = parse_point(&v1)?;
            let v2 = parse_point(&v2)?;
            let chain = build_chain(&p, &v1, &v2, delta, &chain_config(&common))
                .map_err(chain_error_diag)?;
            let all = chain.report.as_ref().map(|r| r.all_certified).unwrap_or(false);
            emit(&common, &chain.to_json())?;
            if let (Some(svg_path), Some(pd_cover)) = (&common.svg, chain.covers.first()) {
                let pd = PuncturedDisk::new(
                    C64::new(0.0, 0.0),
                    pd_cover.r_max * 8.0,
                    Vec::new(),
                    chain.delta,
                );
                std::fs::write(svg_path, render_cover(&pd, pd_cover))
                    .map_err(|e| diagnostic("io", serde_json::json!(e.to_string())))?;
            }
            Ok(all)
        }
        Command::Verify { chain, poly, delta, common } => {
            let p = load_poly(&poly)?;
            let text = std::fs::read_to_string(&chain)
                .map_err(|e| diagnostic("io", serde_json::json!(e.to_string())))?;
            let chain: DoublingChain = DoublingChain::from_json(&text)
                .map_err(|e| diagnostic("chain_parse", serde_json::json!(e.to_string())))?;
            let report = verify_chain(&chain, &p, delta);
            let all = report.all_certified;
            emit(
                &common,
                &serde_json::to_string_pretty(&report).expect("report serializes"),
            )?;
            Ok(all)
        }
        Command::Cover { punctures, delta, from, to, common } => {
            let punctures = parse_punctures(&punctures)?;
            let v1 = parse_point(&from)?[0];
            let v2 = parse_point(&to)?[0];
            let pd = PuncturedDisk::new(C64::new(0.0, 0.0), 1.0, punctures, delta);
            let path = find_path_adaptive(&pd, v1, v2, common.resolution)
                .map_err(|e| diagnostic("path", serde_json::json!(e.to_string())))?;
            let cover = build_disk_chain(&pd, &path)
                .map_err(|e| diagnostic("cover", serde_json::json!(e.to_string())))?;
            let audit = audit_cover(&cover, &pd);
            let all = audit.all_pass();
            let out = serde_json::json!({ "cover": cover, "audit": audit });
            emit(&common, &serde_json::to_string_pretty(&out).expect("serializes"))?;
            if let Some(svg_path) = &common.svg {
                std::fs::write(svg_path, render_cover(&pd, &cover))
                    .map_err(|e| diagnostic("io", serde_json::json!(e.to_string())))?;
            }
            Ok(all)
        }
        Command::Ball { poly, common } => {
            let p = load_poly(&poly)?
                .normalize()
                .map_err(|e| diagnostic("poly_invalid", serde_json::json!(e.to_string())))?;
            let ball = find_clear_ball(&p, common.seed)
                .map_err(|e| diagnostic("ball", serde_json::json!(e.to_string())))?;
            let out = serde_json::json!({
                "center": ball.center.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "radius": ball.radius,
                "margin": ball.certificate.margin(),
            });
            emit(&common, &serde_json::to_string_pretty(&out).expect("serializes"))?;
            Ok(ball.certificate.certified)
        }
        Command::Vitushkin { poly, epsilon, common } => {
            let p = load_poly(&poly)?;
            let report = vitushkin_count(&p, epsilon, common.seed)
                .map_err(|e| diagnostic("vitushkin", serde_json::json!(e.to_string())))?;
            let ok = (report.count as f64) <= report.bound;
            emit(
                &common,
                &serde_json::to_string_pretty(&report).expect("serializes"),
            )?;
            Ok(ok)
        }
        Command::Dc { poly, delta, center, grid_density, common } => {
            let p = load_poly(&poly)?
                .normalize()
                .map_err(|e| diagnostic("poly_invalid", serde_json::json!(e.to_string())))?;
            let center = parse_point(&center)?;
            let dc = dc_command(&p, delta, &center, grid_density)
                .map_err(|e| diagnostic("dc", serde_json::json!(e.to_string())))?;
            emit(
                &common,
                &serde_json::to_string_pretty(&serde_json::json!({ "dc": dc }))
                    .expect("serializes"),
            )?;
            Ok(true)
        }
        Command::Study { poly, v_far, deltas, grid_density, common } => {
            let p = load_poly(&poly)?;
            let v_far = parse_point(&v_far)?;
            let deltas: Result<Vec<f64>, _> =
                deltas.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let deltas =
                deltas.map_err(|e| diagnostic("bad_deltas", serde_json::json!(e.to_string())))?;
            let cfg = StudyConfig { chain: chain_config(&common), grid_density };
            let study = run_scaling_study(&p, &v_far, &deltas, &cfg)
                .map_err(|e| diagnostic("study", serde_json::json!(e.to_string())))?;
            let all = study.rows.iter().all(|r| r.certified);
            emit(
                &common,
                &serde_json::to_string_pretty(&study).expect("serializes"),
            )?;
            Ok(all)
        }
    }
}

fn dc_command(
    p: &MultiPoly,
    delta: f64,
    center: &[C64],
    grid_density: usize,
) -> Result<f64, chaincover_core::analysis::AnalysisError> {
    use chaincover_core::clearball::rho_const;
    let n = p.dim();
    let m = grid_density.max(8);
    let g_domain = GridDomain::SubLevel { p: p.clone(), tau: delta };
    let per_axis = if n == 1 { m } else { m.min(24) };
    let mut g_points: Vec<Vec<C64>> = Vec::new();
    let total = (per_axis as u64).pow(2 * n as u32);
    for idx in 0..total {
        let mut rem = idx;
        let mut z = vec![C64::new(0.0, 0.0); n];
        for zi in z.iter_mut() {
            let a = (rem % per_axis as u64) as f64;
            rem /= per_axis as u64;
            let b = (rem % per_axis as u64) as f64;
            rem /= per_axis as u64;
            *zi = C64::new(a / (per_axis - 1) as f64, b / (per_axis - 1) as f64);
        }
        if g_domain.contains_point(&z) {
            g_points.push(z);
        }
    }
    let rho = rho_const(n as u32, p.degree().max(1));
    let radius = (rho / 10.0).max(1e-6);
    let omega_domain = GridDomain::Ball { center: center.to_vec(), radius };
    let mut omega_points = Vec::new();
    for k in 0..16usize {
        let angle = 2.0 * std::f64::consts::PI * k as f64 / 16.0;
        let z: Vec<C64> = center
            .iter()
            .map(|c| c + C64::new(angle.cos(), angle.sin()) * (radius / 2.0 / (n as f64).sqrt()))
            .collect();
        if omega_domain.contains_point(&z) && g_domain.contains_point(&z) {
            omega_points.push(z);
        }
    }
    omega_points.push(center.to_vec());
    g_points.extend(omega_points.iter().cloned());
    let query = DoublingQuery::new(
        MultiPoly::constant(n, C64::new(1.0, 0.0)),
        p.clone(),
        1,
        g_points,
        omega_points,
        g_domain,
        omega_domain,
        center.to_vec(),
        radius,
        1.0 / (per_axis - 1) as f64,
    )?;
    doubling_constant(&query)
}
