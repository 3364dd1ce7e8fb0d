//! Damage-map and curve comparison.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::postproc::{PostprocError, StressStrainCurve};

/// Quantile of the truth map used to binarise both maps.
pub const DAMAGE_PERCENTILE: f64 = 0.99;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("shape mismatch: {truth} truth cells, {pred} predicted cells")]
    ShapeMismatch { truth: usize, pred: usize },
    #[error("empty map")]
    EmptyMap,
    #[error("{0} of the reference curve is zero")]
    ZeroReference(&'static str),
    #[error(transparent)]
    Postproc(#[from] PostprocError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Percentile {
    /// Linear interpolation between order statistics at rank `(n + 1) p`,
    /// clamped to the sample range.
    #[default]
    Linear,
    /// The smallest value with at least `p n` values at or below it.
    NearestRank,
}

pub fn percentile(values: &[f64], p: f64, method: Percentile) -> Result<f64, EvalError> {
    if values.is_empty() {
        return Err(EvalError::EmptyMap);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Ok(match method {
        Percentile::Linear => {
            let rank = ((n + 1) as f64 * p).clamp(1.0, n as f64);
            let k = rank.floor() as usize;
            let frac = rank - k as f64;
            if k >= n {
                v[n - 1]
            } else {
                v[k - 1] + frac * (v[k] - v[k - 1])
            }
        }
        Percentile::NearestRank => {
            let k = ((p * n as f64).ceil() as usize).clamp(1, n);
            v[k - 1]
        }
    })
}

/// 99th percentile of the reference damage map.
pub fn damage_threshold(truth: &[f64]) -> Result<f64, EvalError> {
    percentile(truth, DAMAGE_PERCENTILE, Percentile::Linear)
}

/// 1 where the value exceeds the threshold strictly.
pub fn binarize(map: &[f64], threshold: f64) -> Vec<u8> {
    map.iter().map(|&v| u8::from(v > threshold)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct F1Report {
    /// Damage level used for binarisation, when the report came from raw maps.
    pub threshold: Option<f64>,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
}

pub fn f1_score(truth: &[u8], pred: &[u8]) -> Result<F1Report, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::ShapeMismatch { truth: truth.len(), pred: pred.len() });
    }
    let (mut tp, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for (&t, &p) in truth.iter().zip(pred) {
        match (t != 0, p != 0) {
            (true, true) => tp += 1,
            (false, true) => fp += 1,
            (true, false) => fn_ += 1,
            (false, false) => {}
        }
    }
    // Empty denominators score 0, including two empty masks: undamaged
    // frames carry no information about crack prediction.
    let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    Ok(F1Report {
        threshold: None,
        precision,
        recall,
        f1,
        true_positives: tp,
        false_positives: fp,
        false_negatives: fn_,
    })
}

/// Threshold both maps at the truth map's 99th percentile and score them.
pub fn compare_damage(truth: &[f64], pred: &[f64]) -> Result<F1Report, EvalError> {
    compare_damage_with(truth, pred, Percentile::Linear)
}

pub fn compare_damage_with(truth: &[f64], pred: &[f64], method: Percentile) -> Result<F1Report, EvalError> {
    if truth.len() != pred.len() {
        return Err(EvalError::ShapeMismatch { truth: truth.len(), pred: pred.len() });
    }
    let threshold = percentile(truth, DAMAGE_PERCENTILE, method)?;
    let report = f1_score(&binarize(truth, threshold), &binarize(pred, threshold))?;
    Ok(F1Report { threshold: Some(threshold), ..report })
}

/// `frame,threshold,precision,recall,f1`
pub fn write_f1_csv<W: Write>(writer: W, rows: &[(usize, F1Report)]) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    let to_io = |e: csv::Error| EvalError::Io(e.into());
    w.write_record(["frame", "threshold", "precision", "recall", "f1"]).map_err(to_io)?;
    for (frame, r) in rows {
        let threshold = r.threshold.map(|t| t.to_string()).unwrap_or_default();
        w.write_record([frame.to_string(), threshold, r.precision.to_string(), r.recall.to_string(), r.f1.to_string()])
            .map_err(to_io)?;
    }
    w.flush()?;
    Ok(())
}

/// Relative errors of a predicted curve against a reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveMetrics {
    pub peak_stress_error: f64,
    pub fracture_energy_error: f64,
}

pub fn curve_metrics(truth: &StressStrainCurve, pred: &StressStrainCurve) -> Result<CurveMetrics, EvalError> {
    let (pt, pp) = (truth.peak_stress(), pred.peak_stress());
    let (wt, wp) = (truth.fracture_energy()?, pred.fracture_energy()?);
    if pt == 0.0 {
        return Err(EvalError::ZeroReference("peak stress"));
    }
    if wt == 0.0 {
        return Err(EvalError::ZeroReference("fracture energy"));
    }
    Ok(CurveMetrics { peak_stress_error: ((pp - pt) / pt).abs(), fracture_energy_error: ((wp - wt) / wt).abs() })
}
