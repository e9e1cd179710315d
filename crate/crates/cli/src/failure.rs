use std::fmt::Display;

/// An error paired with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

/// Bad configuration, rates, or input schema.
pub const USAGE: u8 = 2;
/// A run the exhaustive detector refuses to attempt.
pub const BUDGET: u8 = 3;
/// Everything else: file system trouble and lemma violations.
pub const RUNTIME: u8 = 1;

impl Failure {
    pub fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Failure {
            code,
            error: error.into(),
        }
    }

    pub fn usage(msg: impl Display) -> Self {
        Failure::new(USAGE, anyhow::anyhow!("{msg}"))
    }

    pub fn io(context: impl Display, e: impl Into<anyhow::Error>) -> Self {
        Failure::new(RUNTIME, e.into().context(context.to_string()))
    }
}

impl From<isi_dmt::Error> for Failure {
    fn from(e: isi_dmt::Error) -> Self {
        let code = match e {
            isi_dmt::Error::BudgetExceeded { .. } => BUDGET,
            isi_dmt::Error::Io(_) => RUNTIME,
            _ => USAGE,
        };
        Failure::new(code, e)
    }
}

pub type CmdResult = Result<std::process::ExitCode, Failure>;
