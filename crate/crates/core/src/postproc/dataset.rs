use std::io::Write;
use std::path::{Path, PathBuf};

use super::interp::{GridInterpolator, Method};
use super::tensor::{DatasetTensor, CHANNELS};
use super::PostprocError;
use crate::raster::{GridSpec, MaterialFieldMaps};
use crate::solver::Frame;

const FIELD_COLUMNS: [&str; 7] = ["x_mm", "y_mm", "eps_x", "eps_y", "sig_x", "sig_y", "phi"];
const MATERIAL_COLUMNS: [&str; 3] = ["E_MPa", "sig_u_MPa", "Gc_N_mm"];

/// Pack one solver frame together with the material maps.
pub fn dataset_frame(frame: &Frame, maps: &MaterialFieldMaps) -> Result<Vec<f32>, PostprocError> {
    let cells = maps.n * maps.n;
    let fields = [&frame.strain_x, &frame.strain_y, &frame.stress_x, &frame.stress_y, &frame.damage];
    if let Some(bad) = fields.iter().find(|f| f.len() != cells) {
        return Err(PostprocError::GridMismatch { expected: cells, found: bad.len() });
    }
    let mut out = Vec::with_capacity(CHANNELS.len() * cells);
    for channel in [&maps.e, &maps.sigma_u, &maps.gc].into_iter().chain(fields) {
        out.extend(channel.iter().map(|&v| v as f32));
    }
    Ok(out)
}

/// Stack solver frames into the dataset tensor.
pub fn assemble_dataset(frames: &[Frame], maps: &MaterialFieldMaps) -> Result<DatasetTensor, PostprocError> {
    let mut data = Vec::with_capacity(frames.len() * CHANNELS.len() * maps.n * maps.n);
    for f in frames {
        data.extend(dataset_frame(f, maps)?);
    }
    Ok(DatasetTensor { frames: frames.len(), n: maps.n, data })
}

/// One line of an external FE export, sampled at an element centroid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeRow {
    pub x: f64,
    pub y: f64,
    pub fields: [f64; 5],
    /// `E`, `sigma_u`, `Gc`; present in the first frame only.
    pub material: Option<[f64; 3]>,
}

/// Cell-centre rows of a solver frame, in the FE export layout.
pub fn frame_to_fe_rows(frame: &Frame, grid: &GridSpec, maps: Option<&MaterialFieldMaps>) -> Vec<FeRow> {
    let n = grid.n_cells;
    (0..n * n)
        .map(|c| {
            let p = grid.cell_center(c % n, c / n);
            FeRow {
                x: p.x,
                y: p.y,
                fields: [frame.strain_x[c], frame.strain_y[c], frame.stress_x[c], frame.stress_y[c], frame.damage[c]],
                material: maps.map(|m| [m.e[c], m.sigma_u[c], m.gc[c]]),
            }
        })
        .collect()
}

pub fn write_fe_csv<W: Write>(writer: W, rows: &[FeRow]) -> Result<(), PostprocError> {
    let path = PathBuf::from("<fe export>");
    let csv_err = |source| PostprocError::Csv { path: path.clone(), source };
    let with_material = rows.first().is_some_and(|r| r.material.is_some());
    let mut w = csv::Writer::from_writer(writer);
    let mut head: Vec<&str> = FIELD_COLUMNS.to_vec();
    if with_material {
        head.extend(MATERIAL_COLUMNS);
    }
    w.write_record(&head).map_err(csv_err)?;
    for r in rows {
        let mut rec: Vec<String> = [r.x, r.y].iter().chain(&r.fields).map(|v| v.to_string()).collect();
        if with_material {
            let m = r.material.ok_or(PostprocError::LengthMismatch { what: "material columns", expected: 3, found: 0 })?;
            rec.extend(m.iter().map(|v| v.to_string()));
        }
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn read_fe_csv(path: &Path, with_material: bool) -> Result<Vec<FeRow>, PostprocError> {
    let csv_err = |source| PostprocError::Csv { path: path.to_path_buf(), source };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let headers = reader.headers().map_err(csv_err)?.clone();
    let mut wanted: Vec<&str> = FIELD_COLUMNS.to_vec();
    if with_material {
        wanted.extend(MATERIAL_COLUMNS);
    }
    let columns = wanted
        .iter()
        .map(|name| {
            headers.iter().position(|h| h.trim() == *name).ok_or_else(|| PostprocError::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
        })
        .collect::<Result<Vec<usize>, _>>()?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(csv_err)?;
        let line = record.position().map_or(0, |p| p.line());
        let mut vals = [0.0; 10];
        for (k, &col) in columns.iter().enumerate() {
            let bad = |message: String| PostprocError::BadValue {
                path: path.to_path_buf(),
                line,
                column: wanted[k].to_string(),
                message,
            };
            let text = record.get(col).ok_or_else(|| bad("missing field".into()))?.trim();
            let v: f64 = text.parse().map_err(|_| bad(format!("cannot parse {text:?}")))?;
            if !v.is_finite() {
                return Err(bad(format!("non-finite value {text}")));
            }
            vals[k] = v;
        }
        rows.push(FeRow {
            x: vals[0],
            y: vals[1],
            fields: [vals[2], vals[3], vals[4], vals[5], vals[6]],
            material: with_material.then(|| [vals[7], vals[8], vals[9]]),
        });
    }
    Ok(rows)
}

/// Build a dataset tensor from per-frame FE exports. Material channels
/// come from the first file by nearest-neighbour lookup; the field
/// channels are resampled with the cubic method, and damage is clamped
/// to `[0, 1]` afterwards.
pub fn ingest_fe_csv<P: AsRef<Path>>(
    paths: &[P],
    grid: &GridSpec,
    expected_frames: Option<usize>,
) -> Result<DatasetTensor, PostprocError> {
    if let Some(expected) = expected_frames {
        if paths.len() != expected {
            return Err(PostprocError::FrameCount { expected, found: paths.len() });
        }
    }
    if paths.is_empty() {
        return Err(PostprocError::FrameCount { expected: expected_frames.unwrap_or(1), found: 0 });
    }
    let n = grid.n_cells;
    let cells = n * n;
    let mut tensor = DatasetTensor::zeros(paths.len(), n);
    let mut material: Vec<Vec<f64>> = Vec::new();
    let mut plan: Option<(Vec<[f64; 2]>, GridInterpolator)> = None;

    for (f, path) in paths.iter().enumerate() {
        let rows = read_fe_csv(path.as_ref(), f == 0)?;
        let points: Vec<[f64; 2]> = rows.iter().map(|r| [r.x, r.y]).collect();
        if f == 0 {
            let nearest = GridInterpolator::new(points.clone(), grid, Method::Nearest)?;
            for k in 0..3 {
                let values: Vec<f64> = rows.iter().map(|r| r.material.expect("first frame has materials")[k]).collect();
                material.push(nearest.interpolate(&values)?);
            }
        }
        let reuse = plan.as_ref().is_some_and(|(p, _)| *p == points);
        if !reuse {
            let interp = GridInterpolator::new(points.clone(), grid, Method::Cubic)?;
            plan = Some((points, interp));
        }
        let interp = &plan.as_ref().unwrap().1;
        for (k, m) in material.iter().enumerate() {
            tensor.channel_mut(f, k).iter_mut().zip(m).for_each(|(o, &v)| *o = v as f32);
        }
        for k in 0..5 {
            let values: Vec<f64> = rows.iter().map(|r| r.fields[k]).collect();
            let grid_values = interp.interpolate(&values)?;
            debug_assert_eq!(grid_values.len(), cells);
            let clamp = k == 4;
            tensor.channel_mut(f, 3 + k).iter_mut().zip(&grid_values).for_each(|(o, &v)| {
                *o = if clamp { v.clamp(0.0, 1.0) as f32 } else { v as f32 };
            });
        }
    }
    Ok(tensor)
}
