//! Command-line surface.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error.

use crate::experiments::{
    self, ablate_determinant, build_case_scene, loss_sweep, optimize_translation, run_comparison,
    CaseSetting, Variant,
};
use crate::integrator::{render_gradient, render_image, GradImage, IntegratorConfig, Method};
use crate::io::{self, write_png_radiance, write_png_signed, write_records, ImageBuffer};
use crate::scene::Scene;
use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};

#[derive(Parser, Debug)]
#[command(
    name = "diffrt",
    about = "Differentiable path tracer with surface-form path replay backpropagation",
    version,
    disable_help_subcommand = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    /// Scene file (JSON)
    #[arg(long, global = true)]
    scene: Option<PathBuf>,
    /// Samples per pixel
    #[arg(long, global = true)]
    spp: Option<u32>,
    /// Resolution WxH (e.g. 64x64)
    #[arg(long, global = true)]
    res: Option<String>,
    /// RNG seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Maximum path depth
    #[arg(long, global = true)]
    max_depth: Option<u32>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Gradient channel for metrics and visualization
    #[arg(long, global = true, default_value = "r")]
    channel: String,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Forward-render the scene
    Render {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Render a gradient image with one method
    Grad {
        #[command(flatten)]
        common: CommonArgs,
        /// prb_threepoint | ad_threepoint | ad_spherical | prb_classic | fd
        #[arg(long)]
        method: String,
        /// Finite-difference step (fd only)
        #[arg(long)]
        fd_eps: Option<f64>,
        /// Colormap scale for the PNG sidecar (default: auto)
        #[arg(long)]
        png_scale: Option<f64>,
    },
    /// Compare all methods against the finite-difference oracle on a
    /// built-in case study
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        setting: u8,
        #[arg(long, default_value = "occluding")]
        variant: String,
        /// Oracle samples per pixel (default 4× spp)
        #[arg(long)]
        fd_spp: Option<u32>,
    },
    /// Determinant-derivative ablation on a built-in case study
    Ablate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        setting: u8,
        #[arg(long, default_value = "occluding")]
        variant: String,
        #[arg(long)]
        fd_spp: Option<u32>,
    },
    /// Gradient-descent depth recovery on a built-in case study
    Optimize {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1)]
        setting: u8,
        #[arg(long, default_value = "occluding")]
        variant: String,
        #[arg(long, default_value_t = 0.0)]
        target_pi: f64,
        #[arg(long, default_value_t = 0.5)]
        init_offset: f64,
        #[arg(long, default_value_t = 100)]
        steps: u32,
        #[arg(long, default_value_t = 1.2)]
        lr: f64,
        /// prb_threepoint or prb_classic
        #[arg(long, default_value = "prb_threepoint")]
        method: String,
    },
}

fn usage(e: anyhow::Error) -> anyhow::Error {
    UsageError(e).into()
}

fn parse_channel(s: &str) -> Result<usize> {
    match s {
        "r" => Ok(0),
        "g" => Ok(1),
        "b" => Ok(2),
        _ => Err(usage(anyhow!("unknown channel {s:?} (expected r, g, or b)"))),
    }
}

fn parse_res(s: &str) -> Result<(u32, u32)> {
    let (w, h) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| usage(anyhow!("resolution must look like 64x64, got {s:?}")))?;
    Ok((
        w.parse().map_err(|_| usage(anyhow!("bad width in {s:?}")))?,
        h.parse().map_err(|_| usage(anyhow!("bad height in {s:?}")))?,
    ))
}

fn parse_method(s: &str) -> Result<Method> {
    Method::parse(s).ok_or_else(|| {
        usage(anyhow!(
            "unknown method {s:?} (expected one of {})",
            Method::ALL.map(|m| m.name()).join(", ")
        ))
    })
}

fn parse_variant(s: &str) -> Result<Variant> {
    Variant::parse(s).ok_or_else(|| usage(anyhow!("unknown variant {s:?} (occluding | fully_visible)")))
}

/// Loads the scene file and applies CLI overrides.
fn load_scene(common: &CommonArgs) -> Result<(Scene, IntegratorConfig)> {
    let path = common
        .scene
        .as_ref()
        .ok_or_else(|| usage(anyhow!("--scene is required for this subcommand")))?;
    let (scene, file) = io::parse_scene(path).with_context(|| format!("loading {path:?}"))?;
    let mut cfg = IntegratorConfig {
        spp: file.render.spp,
        max_depth: file.render.max_depth,
        seed: file.render.seed,
        ..Default::default()
    };
    apply_overrides(&mut cfg, common)?;
    let scene = apply_resolution(scene, common)?;
    Ok((scene, cfg))
}

fn case_scene(common: &CommonArgs, setting: u8, variant: &str) -> Result<(Scene, CaseSetting, IntegratorConfig)> {
    if !(1..=3).contains(&setting) {
        return Err(usage(anyhow!("setting must be 1, 2, or 3")));
    }
    let setting = CaseSetting { id: setting, variant: parse_variant(variant)? };
    let res = match &common.res {
        Some(r) => parse_res(r)?.0,
        None => 64,
    };
    let scene = build_case_scene(setting, res);
    let mut cfg = IntegratorConfig::default();
    apply_overrides(&mut cfg, common)?;
    Ok((scene, setting, cfg))
}

fn apply_overrides(cfg: &mut IntegratorConfig, common: &CommonArgs) -> Result<()> {
    if let Some(spp) = common.spp {
        cfg.spp = spp;
    }
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(d) = common.max_depth {
        cfg.max_depth = d;
    }
    Ok(())
}

fn apply_resolution(scene: Scene, common: &CommonArgs) -> Result<Scene> {
    match &common.res {
        Some(r) => {
            let (w, h) = parse_res(r)?;
            let cam = scene.camera.with_resolution(w, h);
            Ok(scene.with_camera(cam))
        }
        None => Ok(scene),
    }
}

fn save_gradient(img: &GradImage, channel: usize, scale: Option<f64>, dir: &Path, stem: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let pfm = ImageBuffer::from_f64(img.width, img.height, &img.data);
    io::write_pfm(&pfm, &dir.join(format!("{stem}.pfm")))?;
    let s = scale.unwrap_or_else(|| io::auto_scale(img, channel));
    write_png_signed(img, channel, s, &dir.join(format!("{stem}.png")))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Render { common } => {
            let (scene, cfg) = load_scene(&common)?;
            let img = render_image(&scene, &cfg);
            std::fs::create_dir_all(&common.out)?;
            let pfm = ImageBuffer::from_f64(img.width, img.height, &img.data);
            io::write_pfm(&pfm, &common.out.join("render.pfm"))?;
            write_png_radiance(&img, &common.out.join("render.png"))?;
            println!("wrote {}", common.out.join("render.pfm").display());
            Ok(())
        }
        Command::Grad { common, method, fd_eps, png_scale } => {
            let method = parse_method(&method)?;
            if fd_eps.is_some() && method != Method::Fd {
                // flag validation is a usage error, raised before any work
                return Err(usage(anyhow!("--fd-eps applies to the fd method only")));
            }
            let channel = parse_channel(&common.channel)?;
            let (scene, mut cfg) = load_scene(&common)?;
            cfg.fd_eps = fd_eps;
            let img = render_gradient(&scene, method, &cfg)?;
            save_gradient(&img, channel, png_scale, &common.out, &format!("grad_{}", method.name()))?;
            println!("wrote {}", common.out.join(format!("grad_{}.pfm", method.name())).display());
            Ok(())
        }
        Command::Compare { common, setting, variant, fd_spp } => {
            let channel = parse_channel(&common.channel)?;
            let (scene, setting, cfg) = case_scene(&common, setting, &variant)?;
            let fd_spp = fd_spp.unwrap_or_else(|| experiments::fd_oracle_spp_default(&cfg));
            let methods = [
                Method::PrbThreepoint,
                Method::AdThreepoint,
                Method::AdSpherical,
                Method::PrbClassic,
            ];
            let (report, images) = run_comparison(&scene, setting, &methods, &cfg, fd_spp, channel)?;
            std::fs::create_dir_all(&common.out)?;
            for (m, img) in &images {
                save_gradient(img, channel, None, &common.out, &format!("grad_{}", m.name()))?;
            }
            write_records(&report.methods, &common.out.join("report.jsonl"))?;
            println!("setting {} ({})", report.setting, report.variant);
            for m in &report.methods {
                println!(
                    "  {:<16} relL1={:.4} L1={:.4} mae={:.6} sign={:.3} [{:.2}s]",
                    m.method, m.rel_l1_vs_fd, m.grad_l1_norm, m.mae, m.sign_agreement, m.runtime_seconds
                );
            }
            println!("  fd L1 norm: {:.4}", report.fd_l1_norm);
            Ok(())
        }
        Command::Ablate { common, setting, variant, fd_spp } => {
            let channel = parse_channel(&common.channel)?;
            let (scene, setting, cfg) = case_scene(&common, setting, &variant)?;
            let fd_spp = fd_spp.unwrap_or_else(|| experiments::fd_oracle_spp_default(&cfg));
            let report = ablate_determinant(&scene, setting, &cfg, fd_spp, channel)?;
            std::fs::create_dir_all(&common.out)?;
            write_records(&[report.clone()], &common.out.join("ablation.jsonl"))?;
            println!(
                "setting {} ({}): full relL1={:.4}, determinant-ablated relL1={:.4}",
                report.setting, report.variant, report.full_rel_l1, report.ablated_rel_l1
            );
            Ok(())
        }
        Command::Optimize {
            common,
            setting,
            variant,
            target_pi,
            init_offset,
            steps,
            lr,
            method,
        } => {
            let method = parse_method(&method)?;
            let (scene, _, cfg) = case_scene(&common, setting, &variant)?;
            let trace =
                optimize_translation(&scene, method, target_pi, target_pi + init_offset, steps, lr, &cfg)?;
            std::fs::create_dir_all(&common.out)?;
            write_records(&trace.steps, &common.out.join("optimize.jsonl"))?;
            let sweep = loss_sweep(&scene, target_pi, target_pi - 0.6, target_pi + 0.6, 101, &cfg);
            let sweep_records: Vec<serde_json::Value> = sweep
                .iter()
                .map(|(pi, loss)| serde_json::json!({ "pi": pi, "loss": loss }))
                .collect();
            write_records(&sweep_records, &common.out.join("loss_sweep.jsonl"))?;
            println!(
                "final pi = {:.5} (target {:.5}, |err| = {:.5}, diverged = {})",
                trace.final_pi,
                target_pi,
                (trace.final_pi - target_pi).abs(),
                trace.diverged
            );
            Ok(())
        }
    }
}

/// Marker for argument-validation failures discovered after clap parsing.
#[derive(Debug)]
struct UsageError(anyhow::Error);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for UsageError {}

/// Entry point returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap prints help/version on stdout with success
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{e}");
            return 1;
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            if e.downcast_ref::<UsageError>().is_some() {
                eprintln!("usage error: {e}");
                1
            } else {
                eprintln!("error: {e:#}");
                2
            }
        }
    }
}
