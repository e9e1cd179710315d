use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use isi_dmt::codec::effective_rate;
use isi_dmt::experiment::{estimate_diversity, read_curve_csv, theoretical_bounds, Layer};

use crate::failure::{CmdResult, Failure};
use crate::simulate::{RunManifest, MANIFEST_FILE};

#[derive(clap::Args)]
pub struct Args {
    /// Curve CSV written by `simulate`.
    #[arg(long)]
    curve: PathBuf,
    /// Fit window in dB as `lo,hi`. Defaults to the run's window when a
    /// manifest sits next to the curve, else to the whole grid.
    #[arg(long, value_parser = parse_window)]
    window: Option<(f64, f64)>,
    #[arg(long, value_enum, default_value_t = LayerArg::High)]
    layer: LayerArg,
    /// Allowed distance from the bracket for the pass/fail line.
    #[arg(long, default_value_t = 0.4)]
    tolerance: f64,
    /// Print the estimate as JSON instead of text.
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum LayerArg {
    High,
    Low,
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected lo,hi")?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
    if lo > hi {
        return Err(format!("empty window {lo},{hi}"));
    }
    Ok((lo, hi))
}

pub fn run(a: Args) -> CmdResult {
    let file = fs::File::open(&a.curve).map_err(|e| Failure::io(format!("opening {}", a.curve.display()), e))?;
    let curve = read_curve_csv(file)?;
    if curve.points.is_empty() {
        return Err(Failure::usage(format!("{} has no data rows", a.curve.display())));
    }

    let manifest_path = a.curve.with_file_name(MANIFEST_FILE);
    let manifest: Option<RunManifest> = match fs::read_to_string(&manifest_path) {
        Ok(text) => Some(
            serde_json::from_str(&text)
                .map_err(|e| Failure::usage(format!("{}: {e}", manifest_path.display())))?,
        ),
        Err(_) => None,
    };

    let grid = curve.snr_grid_db();
    let window = a
        .window
        .or_else(|| manifest.as_ref().and_then(|m| m.config_echo.fit_window_db))
        .unwrap_or((grid[0], grid[grid.len() - 1]));
    let layer = match a.layer {
        LayerArg::High => Layer::High,
        LayerArg::Low => Layer::Low,
    };
    let est = estimate_diversity(&curve, window, layer)?;

    if a.json {
        println!("{}", serde_json::to_string_pretty(&est).expect("estimate serializes"));
    } else {
        println!(
            "slope {:.3}  stderr {:.3}  points {}  window [{}, {}] dB",
            est.slope, est.stderr, est.points_used, window.0, window.1
        );
    }

    if let Some(m) = manifest {
        let cfg = &m.config_echo;
        let (r_h, r_l) = cfg.rate_mode.rate_exponents();
        let r_l = if cfg.scheme.layers() == 2 { r_l } else { 0.0 };
        let (high, low) = theoretical_bounds(effective_rate(r_h, cfg.shape), effective_rate(r_l, cfg.shape), cfg.shape)?;
        let b = match layer {
            Layer::High => high,
            Layer::Low => low,
        };
        let pass = est.slope >= b.lower - a.tolerance && est.slope <= b.upper + a.tolerance;
        println!("bracket [{:.3}, {:.3}] at r = {:.4}, tolerance {}", b.lower, b.upper, b.rate, a.tolerance);
        println!("{}", if pass { "PASS" } else { "FAIL" });
    }
    Ok(ExitCode::SUCCESS)
}
