use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::{SecondsFormat, Utc};
use isi_dmt::codec::effective_rate;
use isi_dmt::experiment::{
    estimate_diversity, run_sweep, theoretical_bounds, write_curve_csv, BoundsReport, CurvePoint,
    DiversityEstimate, Layer, SweepConfig,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::failure::{CmdResult, Failure, USAGE};
use crate::overrides;

#[derive(clap::Args)]
pub struct Args {
    /// Sweep configuration (JSON), or a manifest.json from an earlier run.
    #[arg(long)]
    config: PathBuf,
    /// Override one field, e.g. `--set trials.max_trials=100000` or
    /// `--set snr_grid_db=[10,15,20]`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Output directory.
    #[arg(long, default_value_os_t = crate::default_out())]
    out: PathBuf,
    /// Replaces `master_seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads. Affects speed only.
    #[arg(long)]
    workers: Option<usize>,
}

pub const CURVE_FILE: &str = "curve.csv";
pub const REPORT_FILE: &str = "report.json";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything needed to reproduce a run's outputs.
#[derive(Serialize, Deserialize)]
pub struct RunManifest {
    /// The resolved configuration, defaults included.
    pub config_echo: SweepConfig,
    pub tool_version: String,
    pub master_seed: u64,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<PathBuf>,
}

#[derive(Serialize)]
struct Fit {
    estimate: Option<DiversityEstimate>,
    error: Option<String>,
}

impl Fit {
    fn of(r: isi_dmt::Result<DiversityEstimate>) -> Self {
        match r {
            Ok(e) => Fit {
                estimate: Some(e),
                error: None,
            },
            Err(e) => Fit {
                estimate: None,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Serialize)]
struct Report<'a> {
    config: &'a SweepConfig,
    points: &'a [CurvePoint],
    fit_high: Fit,
    fit_low: Option<Fit>,
    bracket_high: BoundsReport,
    bracket_low: Option<BoundsReport>,
}

/// Reads a config or manifest, applies overrides and validates.
pub fn load_config(path: &Path, sets: &[String], seed: Option<u64>) -> Result<SweepConfig, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("reading {}", path.display()), e))?;
    let shown = path.display();
    let mut doc: Value =
        serde_json::from_str(&text).map_err(|e| Failure::usage(format!("{shown}: {e}")))?;

    let is_manifest = doc.get("config_echo").is_some();
    let parsed = if !is_manifest && sets.is_empty() && seed.is_none() {
        // straight from the text so errors carry line and column
        let de = &mut serde_json::Deserializer::from_str(&text);
        serde_path_to_error::deserialize::<_, SweepConfig>(de)
    } else {
        if is_manifest {
            doc = doc["config_echo"].take();
        }
        for s in sets {
            overrides::apply(&mut doc, s)?;
        }
        if let Some(seed) = seed {
            overrides::apply(&mut doc, &format!("master_seed={seed}"))?;
        }
        serde_path_to_error::deserialize::<_, SweepConfig>(doc)
    };
    let cfg = parsed.map_err(|e| {
        let field = e.path().to_string();
        Failure::usage(format!("{shown}: field `{field}`: {}", e.into_inner()))
    })?;
    Ok(cfg.resolved()?)
}

pub fn run(args: Args) -> CmdResult {
    let cfg = load_config(&args.config, &args.sets, args.seed)?;
    let workers = args
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let started = Utc::now();
    let curve = run_sweep(&cfg, workers)?;
    let finished = Utc::now();

    let out = &args.out;
    fs::create_dir_all(out).map_err(|e| Failure::io(format!("creating {}", out.display()), e))?;
    let write = |name: &str, bytes: &[u8]| {
        let p = out.join(name);
        fs::write(&p, bytes).map_err(|e| Failure::io(format!("writing {}", p.display()), e))
    };

    let mut csv = Vec::new();
    write_curve_csv(&mut csv, &curve)?;
    write(CURVE_FILE, &csv)?;

    let window = cfg.fit_window_db.expect("resolved config has a window");
    let two_layer = cfg.scheme.layers() == 2;
    let (r_h, r_l) = cfg.rate_mode.rate_exponents();
    let r_l = if two_layer { r_l } else { 0.0 };
    let (bracket_high, bracket_low) =
        theoretical_bounds(effective_rate(r_h, cfg.shape), effective_rate(r_l, cfg.shape), cfg.shape)?;
    let report = Report {
        config: &cfg,
        points: &curve.points,
        fit_high: Fit::of(estimate_diversity(&curve, window, Layer::High)),
        fit_low: two_layer.then(|| Fit::of(estimate_diversity(&curve, window, Layer::Low))),
        bracket_high,
        bracket_low: two_layer.then_some(bracket_low),
    };
    write(REPORT_FILE, &to_json(&report)?)?;

    let manifest = RunManifest {
        config_echo: cfg.clone(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: cfg.master_seed,
        started: started.to_rfc3339_opts(SecondsFormat::Millis, true),
        finished: finished.to_rfc3339_opts(SecondsFormat::Millis, true),
        outputs: [CURVE_FILE, REPORT_FILE].iter().map(|f| out.join(f)).collect(),
    };
    write(MANIFEST_FILE, &to_json(&manifest)?)?;

    for p in &curve.points {
        println!(
            "{:>7.2} dB  trials {:>9}  errors {:>6}/{:<6}  p_high {:.3e}  p_low {:.3e}",
            p.snr_db, p.trials, p.errors_high, p.errors_low, p.p_high, p.p_low
        );
    }
    match &report.fit_high.estimate {
        Some(d) => println!("slope (high) {:.3} ± {:.3} over {:?} dB", d.slope, d.stderr, window),
        None => println!("slope (high) unavailable: {}", report.fit_high.error.as_deref().unwrap_or("")),
    }
    println!("wrote {}", out.display());
    Ok(ExitCode::SUCCESS)
}

fn to_json<T: Serialize>(v: &T) -> Result<Vec<u8>, Failure> {
    let mut s = serde_json::to_vec_pretty(v).map_err(|e| Failure::new(USAGE, e))?;
    s.push(b'\n');
    Ok(s)
}
