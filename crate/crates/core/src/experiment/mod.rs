//! Monte Carlo sweeps and everything needed to read them: outage-set
//! classification, Wilson intervals, log-log slope fits, the closed-form
//! diversity brackets, and CSV/JSON output.

mod bounds;
mod config;
mod outage;
mod report;
mod stats;
mod sweep;

pub use bounds::{theoretical_bounds, theoretical_bounds_exact, BoundsReport, ExactBracket};
pub use config::{RateMode, Scheme, SweepConfig, TrialBudget};
pub use outage::{classify_outage, outage_curve};
pub use report::{
    read_curve_csv, refinement_report, write_curve_csv, RefinementSummary, CURVE_COLUMNS,
};
pub use stats::{
    estimate_diversity, wilson_interval, wilson_stderr, DiversityEstimate, Layer, MIN_FIT_ERRORS,
    WILSON_Z,
};
pub use sweep::{run_sweep, CurvePoint, ErrorCurve};
