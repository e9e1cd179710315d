use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use isi_dmt::channel::BlockShape;
use isi_dmt::experiment::theoretical_bounds;

use crate::failure::{CmdResult, Failure};

#[derive(clap::Args)]
pub struct Args {
    /// High-layer multiplexing gain.
    #[arg(long)]
    rh: f64,
    /// Low-layer multiplexing gain.
    #[arg(long, default_value_t = 0.0)]
    rl: f64,
    /// Data symbols per block.
    #[arg(long)]
    n: usize,
    /// Channel memory.
    #[arg(long)]
    nu: usize,
    /// Receive antennas.
    #[arg(long = "m-rx", default_value_t = 1)]
    m_rx: usize,
    /// Also write the table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

pub fn run(a: Args) -> CmdResult {
    let shape = BlockShape::new(a.n, a.nu, a.m_rx)?;
    let (high, low) = theoretical_bounds(a.rh, a.rl, shape)?;
    println!("N = {}, nu = {}, M_r = {}", a.n, a.nu, a.m_rx);
    println!("high: [{:.3}, {:.3}]  at r = {}", high.lower, high.upper, high.rate);
    println!("low:  [{:.3}, {:.3}]  at r = {}", low.lower, low.upper, low.rate);
    if let Some(path) = &a.csv {
        let body = format!(
            "layer,rate,lower,upper\nhigh,{},{},{}\nlow,{},{},{}\n",
            high.rate, high.lower, high.upper, low.rate, low.lower, low.upper
        );
        fs::write(path, body).map_err(|e| Failure::io(format!("writing {}", path.display()), e))?;
    }
    Ok(ExitCode::SUCCESS)
}
