use std::path::PathBuf;

use mesofrac::postproc::{channel_index, read_curve_csv, CHANNELS};
use mesofrac::raster::encode_pgm;

use super::data::load_tensor;
use crate::error::{read_file, CliError, CliResult};
use crate::manifest::write_atomic;

pub struct PlotArgs {
    pub tensor: Option<PathBuf>,
    pub curve: Option<PathBuf>,
    pub frame: usize,
    pub channel: String,
    /// Gray-scale range; the data range when absent.
    pub range: Option<(f64, f64)>,
    pub out: PathBuf,
}

pub fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected LO,HI")?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad number `{lo}`"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad number `{hi}`"))?;
    if !(lo < hi) {
        return Err(format!("empty range {lo},{hi}"));
    }
    Ok((lo, hi))
}

pub fn run(args: &PlotArgs) -> CliResult<()> {
    match (&args.tensor, &args.curve) {
        (Some(path), None) => {
            let k = channel_index(&args.channel).ok_or_else(|| {
                CliError::config(format!("unknown channel `{}` (expected one of {})", args.channel, CHANNELS.join(", ")))
            })?;
            let tensor = load_tensor(path)?;
            if args.frame >= tensor.frames {
                return Err(CliError::config(format!(
                    "frame {} out of range (tensor has {} frames)",
                    args.frame, tensor.frames
                )));
            }
            let values: Vec<f64> = tensor.channel(args.frame, k).iter().map(|&v| f64::from(v)).collect();
            let (lo, hi) = args.range.unwrap_or_else(|| {
                let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if lo < hi { (lo, hi) } else { (lo, lo + 1.0) }
            });
            write_atomic(&args.out, &encode_pgm(&values, tensor.n, tensor.n, lo, hi))?;
            println!("{}: {} frame {} over [{lo}, {hi}]", args.out.display(), CHANNELS[k], args.frame);
            Ok(())
        }
        (None, Some(path)) => {
            let bytes = read_file(path)?;
            let (curve, _) = read_curve_csv(bytes.as_slice()).map_err(|e| CliError::from(e).context(path.display()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let csv_err = |e: csv::Error| CliError::io(e.to_string());
            w.write_record(["strain", "stress_MPa"]).map_err(csv_err)?;
            for (e, s) in curve.points() {
                w.write_record([e.to_string(), s.to_string()]).map_err(csv_err)?;
            }
            let out = w.into_inner().map_err(|e| CliError::io(e.to_string()))?;
            write_atomic(&args.out, &out)?;
            println!("{}: {} curve points", args.out.display(), curve.points().len());
            Ok(())
        }
        _ => Err(CliError::config("plot needs exactly one of --tensor and --curve")),
    }
}
