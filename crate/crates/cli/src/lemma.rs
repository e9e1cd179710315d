use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use isi_dmt::channel::{sample_channel, BlockShape};
use isi_dmt::rng::trial_rng;
use isi_dmt::spectral::{check_structural_lemma, structural_bound_constant, write_lemma_csv, LemmaReport};

use crate::failure::{CmdResult, Failure, RUNTIME};

#[derive(clap::Args)]
pub struct Args {
    /// Channel memories: `1-3`, `0,2` or `1`.
    #[arg(long, default_value = "1-3")]
    nu: String,
    /// Block sizes, same syntax.
    #[arg(long, default_value = "2-13")]
    n: String,
    /// Receive antenna counts, same syntax.
    #[arg(long = "m-rx", default_value = "1")]
    m_rx: String,
    /// Channel draws per shape.
    #[arg(long, default_value_t = 100_000)]
    draws: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write `lemma_summary.csv` (and per-trial files with `--detail`) here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// One CSV row per draw and antenna, per shape. Needs `--out`.
    #[arg(long, requires = "out")]
    detail: bool,
}

/// Parses `a-b`, `a,b,c` and mixtures such as `1,3-5`.
pub fn parse_list(s: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::usage(format!("cannot parse {s:?}; expected e.g. 2-13 or 1,2,3"));
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim) {
        match part.split_once('-') {
            Some((a, b)) => {
                let a: usize = a.trim().parse().map_err(|_| bad())?;
                let b: usize = b.trim().parse().map_err(|_| bad())?;
                if a > b {
                    return Err(bad());
                }
                out.extend(a..=b);
            }
            None => out.push(part.parse().map_err(|_| bad())?),
        }
    }
    Ok(out)
}

struct Row {
    nu: usize,
    n: usize,
    m_rx: usize,
    c_max: f64,
    max_below: usize,
    violations: u64,
}

pub fn run(a: Args) -> CmdResult {
    let nus = parse_list(&a.nu)?;
    let ns = parse_list(&a.n)?;
    let ms = parse_list(&a.m_rx)?;
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| Failure::io(format!("creating {}", dir.display()), e))?;
    }

    println!("{:>3} {:>3} {:>4} {:>9} {:>10} {:>9} {:>5} {:>10}", "nu", "N", "M_r", "draws", "C_max", "max_below", "bound", "violations");
    let mut rows = Vec::new();
    for &nu in &nus {
        for &n in &ns {
            for &m in &ms {
                let shape = BlockShape::new(n, nu, m)?;
                let c_max = structural_bound_constant(shape)?;
                let point = ((nu as u64) << 40) | ((n as u64) << 20) | m as u64;
                let mut row = Row {
                    nu,
                    n,
                    m_rx: m,
                    c_max,
                    max_below: 0,
                    violations: 0,
                };
                let mut detail: Vec<(u64, LemmaReport)> = Vec::new();
                for t in 0..a.draws {
                    let ch = sample_channel(&mut trial_rng(a.seed, point, t), shape);
                    let report = check_structural_lemma(&ch)?;
                    for ant in &report.antennas {
                        row.max_below = row.max_below.max(ant.count_below());
                    }
                    row.violations += report.violations().count() as u64;
                    if a.detail {
                        detail.push((t, report));
                    }
                }
                println!(
                    "{:>3} {:>3} {:>4} {:>9} {:>10.4} {:>9} {:>5} {:>10}",
                    nu, n, m, a.draws, c_max, row.max_below, nu, row.violations
                );
                if let (true, Some(dir)) = (a.detail, &a.out) {
                    let p = dir.join(format!("lemma_nu{nu}_n{n}_m{m}.csv"));
                    let f = fs::File::create(&p).map_err(|e| Failure::io(format!("creating {}", p.display()), e))?;
                    write_lemma_csv(f, detail.iter().map(|(t, r)| (*t, r)))?;
                }
                rows.push(row);
            }
        }
    }

    if let Some(dir) = &a.out {
        let mut body = String::from("nu,n_data,m_rx,draws,c_max,max_below,bound,violations\n");
        for r in &rows {
            body.push_str(&format!(
                "{},{},{},{},{:.16e},{},{},{}\n",
                r.nu, r.n, r.m_rx, a.draws, r.c_max, r.max_below, r.nu, r.violations
            ));
        }
        let p = dir.join("lemma_summary.csv");
        fs::write(&p, body).map_err(|e| Failure::io(format!("writing {}", p.display()), e))?;
    }

    let total: u64 = rows.iter().map(|r| r.violations).sum();
    if total > 0 {
        return Err(Failure::new(
            RUNTIME,
            anyhow::anyhow!("{total} violation(s): the implementation is wrong somewhere"),
        ));
    }
    println!("all {} shape(s) pass", rows.len());
    Ok(ExitCode::SUCCESS)
}
