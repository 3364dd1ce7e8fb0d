//! Curves, scattered-data resampling and the dataset tensor.

mod cubic;
mod curve;
mod dataset;
mod kdtree;
mod interp;
mod mesh;
mod tensor;

use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub use curve::{build_curve, fracture_energy, read_curve_csv, write_curve_csv, CurveRow, StressStrainCurve};
pub use dataset::{assemble_dataset, dataset_frame, frame_to_fe_rows, ingest_fe_csv, write_fe_csv, FeRow};
pub use interp::{scattered_to_grid, GridInterpolator, Method, ScatterCloud};
pub use kdtree::KdTree;
pub use tensor::{
    channel_index, read_tensor, write_tensor, DatasetTensor, TensorManifest, TensorWriter, CHANNELS, CHANNEL_UNITS,
    MAGIC, TENSOR_FORMAT,
};

#[derive(Debug, Error)]
pub enum PostprocError {
    #[error("length mismatch: {what} has {found} entries, expected {expected}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("need at least {needed} points, got {found}")]
    TooFewPoints { needed: usize, found: usize },
    #[error("degenerate point cloud: {0}")]
    DegenerateCloud(String),
    #[error("non-finite value {value} at point {index}")]
    NonFiniteValue { index: usize, value: f64 },
    #[error("bad magic bytes {0:?}")]
    BadMagic([u8; 8]),
    #[error("tensor dimensions {0:?} overflow the addressable size")]
    DimOverflow([u32; 4]),
    #[error("tensor truncated: expected {expected} bytes of data, found {found}")]
    Truncated { expected: u64, found: u64 },
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: PathBuf, column: String },
    #[error("{path}: line {line}: column `{column}`: {message}")]
    BadValue { path: PathBuf, line: u64, column: String, message: String },
    #[error("expected {expected} frames, found {found}")]
    FrameCount { expected: usize, found: usize },
    #[error("expected {expected} cells, found {found}")]
    GridMismatch { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Io(#[from] io::Error),
}
