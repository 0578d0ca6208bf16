use std::path::PathBuf;

use clap::Args;

use crate::error::{CliError, CliResult};
use crate::format::fixed6;
use crate::table1::evaluate;

pub const HEADER: &str = "experiment,protocol,clock_hz,length_km,loss_db,key_rate,finite_size,plob_absolute,plob_with_detector,beats_absolute,beats_with_detector";

#[derive(Debug, Args)]
pub struct Table1Args {
    /// Fiber loss in dB/km for experiments quoted as a length.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    pub detector_efficiency: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

pub fn run(args: &Table1Args) -> CliResult<String> {
    if !(args.alpha > 0.0 && args.alpha.is_finite()) {
        return Err(CliError::Usage("--alpha must be positive".into()));
    }
    if !(args.detector_efficiency > 0.0 && args.detector_efficiency <= 1.0) {
        return Err(CliError::Usage("--detector-efficiency must lie in (0, 1]".into()));
    }
    let mut out = format!("{HEADER}\n");
    for r in evaluate(args.alpha, args.detector_efficiency) {
        let cells = [
            r.label,
            r.protocol,
            fixed6(r.clock_hz),
            r.length_km.map(fixed6).unwrap_or_default(),
            fixed6(r.loss_db),
            fixed6(r.key_rate),
            r.finite_size.to_string(),
            fixed6(r.plob_absolute),
            fixed6(r.plob_with_detector),
            r.beats_absolute.to_string(),
            r.beats_with_detector.to_string(),
        ];
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}
