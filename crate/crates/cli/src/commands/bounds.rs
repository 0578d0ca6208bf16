use clap::Args;
use twinfield::bounds::BoundKind;
use twinfield::channel_transmittance;

use crate::error::{CliError, CliResult};
use crate::format::fixed6;

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Channel transmittance in (0, 1); evaluated strictly.
    #[arg(long, conflicts_with = "length", required_unless_present = "length")]
    pub eta: Option<f64>,
    /// Fiber length in km; 0 km gives unbounded values.
    #[arg(long)]
    pub length: Option<f64>,
    /// Fiber loss in dB/km, used with --length.
    #[arg(long, default_value_t = 0.2)]
    pub alpha: f64,
    #[arg(long, value_delimiter = ',', default_value = "plob,srb,tgw,rci")]
    pub bounds: Vec<BoundKind>,
}

pub fn run(args: &BoundsArgs) -> CliResult<String> {
    let rows: Vec<(BoundKind, f64)>;
    let eta = match (args.eta, args.length) {
        (Some(eta), _) => {
            rows = args.bounds.iter().map(|&b| b.evaluate(eta).map(|v| (b, v))).collect::<Result<_, _>>()?;
            eta
        }
        (None, Some(length)) => {
            if !(length >= 0.0 && length.is_finite()) || !(args.alpha >= 0.0 && args.alpha.is_finite()) {
                return Err(CliError::Usage("--length and --alpha must be finite and non-negative".into()));
            }
            let eta = channel_transmittance(length, args.alpha);
            rows = args.bounds.iter().map(|&b| (b, b.curve_value(eta))).collect();
            eta
        }
        (None, None) => return Err(CliError::Usage("one of --eta or --length is required".into())),
    };
    let mut out = String::from("bound,eta,value\n");
    for (bound, value) in rows {
        out.push_str(&format!("{},{},{}\n", bound.name(), fixed6(eta), fixed6(value)));
    }
    Ok(out)
}
