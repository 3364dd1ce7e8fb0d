use std::path::PathBuf;

use mesofrac::eval::{compare_damage_with, write_f1_csv, F1Report, Percentile};
use mesofrac::postproc::channel_index;
use serde::Serialize;

use super::data::load_tensor;
use crate::error::{CliError, CliResult};
use crate::manifest::write_atomic;

/// Which frames to score.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FrameSelection {
    All,
    Final,
    List(Vec<usize>),
}

impl std::str::FromStr for FrameSelection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "all" => Ok(FrameSelection::All),
            "final" => Ok(FrameSelection::Final),
            _ => s
                .split(',')
                .map(|t| t.trim().parse::<usize>().map_err(|_| format!("bad frame index `{t}`")))
                .collect::<Result<Vec<_>, _>>()
                .map(FrameSelection::List),
        }
    }
}

impl FrameSelection {
    pub fn resolve(&self, frames: usize) -> CliResult<Vec<usize>> {
        if frames == 0 {
            return Err(CliError::config("tensor has no frames"));
        }
        match self {
            FrameSelection::All => Ok((0..frames).collect()),
            FrameSelection::Final => Ok(vec![frames - 1]),
            FrameSelection::List(list) => {
                if let Some(&bad) = list.iter().find(|&&f| f >= frames) {
                    return Err(CliError::config(format!("frame {bad} out of range (tensor has {frames} frames)")));
                }
                Ok(list.clone())
            }
        }
    }
}

#[derive(Serialize)]
struct Summary {
    percentile: Percentile,
    frames: usize,
    mean_f1: f64,
    final_frame: usize,
    final_report: F1Report,
}

pub struct EvaluateArgs {
    pub truth: PathBuf,
    pub pred: PathBuf,
    pub frames: FrameSelection,
    pub percentile: Percentile,
    pub out: Option<PathBuf>,
    pub summary: Option<PathBuf>,
}

pub fn run(args: &EvaluateArgs) -> CliResult<()> {
    let truth = load_tensor(&args.truth)?;
    let pred = load_tensor(&args.pred)?;
    if truth.dims() != pred.dims() {
        return Err(CliError::config(format!(
            "shape mismatch: truth {:?}, prediction {:?}",
            truth.dims(),
            pred.dims()
        )));
    }
    let phi = channel_index("phi").expect("phi channel");
    let frames = args.frames.resolve(truth.frames)?;
    let mut rows = Vec::with_capacity(frames.len());
    for &f in &frames {
        let t: Vec<f64> = truth.channel(f, phi).iter().map(|&v| f64::from(v)).collect();
        let p: Vec<f64> = pred.channel(f, phi).iter().map(|&v| f64::from(v)).collect();
        rows.push((f, compare_damage_with(&t, &p, args.percentile)?));
    }
    let mut csv = Vec::new();
    write_f1_csv(&mut csv, &rows)?;
    match &args.out {
        Some(out) => write_atomic(out, &csv)?,
        None => print!("{}", String::from_utf8_lossy(&csv)),
    }
    if let Some(path) = &args.summary {
        let (final_frame, final_report) = *rows.last().expect("at least one frame");
        let summary = Summary {
            percentile: args.percentile,
            frames: rows.len(),
            mean_f1: rows.iter().map(|(_, r)| r.f1).sum::<f64>() / rows.len() as f64,
            final_frame,
            final_report,
        };
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_selection() {
        assert_eq!("all".parse::<FrameSelection>().unwrap().resolve(3).unwrap(), vec![0, 1, 2]);
        assert_eq!("final".parse::<FrameSelection>().unwrap().resolve(3).unwrap(), vec![2]);
        assert_eq!("0, 2".parse::<FrameSelection>().unwrap().resolve(3).unwrap(), vec![0, 2]);
        assert!("3".parse::<FrameSelection>().unwrap().resolve(3).is_err());
        assert!("x".parse::<FrameSelection>().is_err());
    }
}
