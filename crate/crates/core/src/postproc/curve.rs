use std::io::{Read, Write};
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::PostprocError;
use crate::solver::StepRecord;

/// Nominal stress against nominal strain, starting at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct StressStrainCurve {
    points: Vec<(f64, f64)>,
}

impl StressStrainCurve {
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self, PostprocError> {
        let Some(&first) = points.first() else {
            return Err(PostprocError::InvalidCurve("no points".into()));
        };
        if first != (0.0, 0.0) {
            return Err(PostprocError::InvalidCurve(format!("first point is {first:?}, not the origin")));
        }
        for (k, w) in points.windows(2).enumerate() {
            if !(w[1].0 > w[0].0) {
                return Err(PostprocError::InvalidCurve(format!(
                    "strain not strictly increasing at point {}",
                    k + 1
                )));
            }
        }
        if let Some((k, p)) = points.iter().enumerate().find(|(_, p)| !(p.0.is_finite() && p.1.is_finite())) {
            return Err(PostprocError::InvalidCurve(format!("non-finite point {k}: {p:?}")));
        }
        Ok(StressStrainCurve { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn peak_stress(&self) -> f64 {
        self.points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn fracture_energy(&self) -> Result<f64, PostprocError> {
        fracture_energy(self)
    }

    /// Same curve with every stress multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> StressStrainCurve {
        StressStrainCurve { points: self.points.iter().map(|&(e, s)| (e, s * factor)).collect() }
    }
}

/// Stress `F / L` (unit thickness) against strain `u / L`.
pub fn build_curve(reactions: &[f64], displacements: &[f64], length: f64) -> Result<StressStrainCurve, PostprocError> {
    if reactions.len() != displacements.len() {
        return Err(PostprocError::LengthMismatch {
            what: "reactions",
            expected: displacements.len(),
            found: reactions.len(),
        });
    }
    if !(length > 0.0) {
        return Err(PostprocError::InvalidCurve(format!("side length must be positive, got {length}")));
    }
    StressStrainCurve::new(reactions.iter().zip(displacements).map(|(f, u)| (u / length, f / length)).collect())
}

/// Area under the curve by the composite trapezoid rule, MPa.
pub fn fracture_energy(curve: &StressStrainCurve) -> Result<f64, PostprocError> {
    let p = curve.points();
    if p.len() < 2 {
        return Err(PostprocError::TooFewPoints { needed: 2, found: p.len() });
    }
    Ok(p.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum())
}

/// One line of the curve CSV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub step: usize,
    pub strain: f64,
    #[serde(rename = "stress_MPa")]
    pub stress_mpa: f64,
    pub converged_flag: u8,
}

pub fn write_curve_csv<W: Write>(writer: W, records: &[StepRecord], length: f64) -> Result<(), PostprocError> {
    let path = PathBuf::from("<curve>");
    let mut w = csv::Writer::from_writer(writer);
    for r in records {
        let row = CurveRow {
            step: r.step,
            strain: r.displacement / length,
            stress_mpa: r.reaction_right / length,
            converged_flag: u8::from(r.converged),
        };
        w.serialize(row).map_err(|source| PostprocError::Csv { path: path.clone(), source })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_curve_csv<R: Read>(reader: R) -> Result<(StressStrainCurve, Vec<CurveRow>), PostprocError> {
    let path = PathBuf::from("<curve>");
    let mut r = csv::Reader::from_reader(reader);
    let rows = r
        .deserialize()
        .collect::<Result<Vec<CurveRow>, _>>()
        .map_err(|source| PostprocError::Csv { path, source })?;
    let curve = StressStrainCurve::new(rows.iter().map(|r| (r.strain, r.stress_mpa)).collect())?;
    Ok((curve, rows))
}
