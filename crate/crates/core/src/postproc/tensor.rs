use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::PostprocError;

pub const MAGIC: [u8; 8] = *b"MFRC0001";
pub const TENSOR_FORMAT: &str = "mesofrac-tensor/1";

/// Channel order of every frame.
pub const CHANNELS: [&str; 8] = ["E", "sigma_uts", "Gc", "eps_x", "eps_y", "sig_x", "sig_y", "phi"];
pub const CHANNEL_UNITS: [&str; 8] = ["MPa", "MPa", "N/mm", "1", "1", "MPa", "MPa", "1"];

pub fn channel_index(name: &str) -> Option<usize> {
    CHANNELS.iter().position(|c| *c == name)
}

/// `frames x 8 x n x n` single-precision samples, frame-major then
/// channel-major, each channel a row-major grid whose first row is the
/// bottom edge of the domain.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetTensor {
    pub frames: usize,
    pub n: usize,
    pub data: Vec<f32>,
}

impl DatasetTensor {
    pub fn zeros(frames: usize, n: usize) -> Self {
        DatasetTensor { frames, n, data: vec![0.0; frames * CHANNELS.len() * n * n] }
    }

    pub fn channel(&self, frame: usize, channel: usize) -> &[f32] {
        let len = self.n * self.n;
        let start = (frame * CHANNELS.len() + channel) * len;
        &self.data[start..start + len]
    }

    pub fn channel_mut(&mut self, frame: usize, channel: usize) -> &mut [f32] {
        let len = self.n * self.n;
        let start = (frame * CHANNELS.len() + channel) * len;
        &mut self.data[start..start + len]
    }

    pub fn dims(&self) -> [u32; 4] {
        [self.frames as u32, CHANNELS.len() as u32, self.n as u32, self.n as u32]
    }
}

fn header(frames: usize, n: usize) -> Result<[u8; 24], PostprocError> {
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| PostprocError::InvalidTensor(format!("dimension {v} too large")));
    let dims = [to_u32(frames)?, CHANNELS.len() as u32, to_u32(n)?, to_u32(n)?];
    let mut h = [0u8; 24];
    h[..8].copy_from_slice(&MAGIC);
    for (k, d) in dims.iter().enumerate() {
        h[8 + 4 * k..12 + 4 * k].copy_from_slice(&d.to_le_bytes());
    }
    Ok(h)
}

pub fn write_tensor<W: Write>(writer: W, tensor: &DatasetTensor) -> Result<(), PostprocError> {
    let expected = tensor.frames * CHANNELS.len() * tensor.n * tensor.n;
    if tensor.data.len() != expected {
        return Err(PostprocError::LengthMismatch { what: "tensor data", expected, found: tensor.data.len() });
    }
    let mut w = TensorWriter::new(writer, tensor.frames, tensor.n)?;
    let frame_len = CHANNELS.len() * tensor.n * tensor.n;
    for f in 0..tensor.frames {
        w.write_frame(&tensor.data[f * frame_len..(f + 1) * frame_len])?;
    }
    w.finish()?;
    Ok(())
}

/// Streams a tensor frame by frame without holding it in memory.
pub struct TensorWriter<W: Write> {
    inner: W,
    frames: usize,
    n: usize,
    written: usize,
    buffer: Vec<u8>,
}

impl<W: Write> TensorWriter<W> {
    pub fn new(mut inner: W, frames: usize, n: usize) -> Result<Self, PostprocError> {
        inner.write_all(&header(frames, n)?)?;
        Ok(TensorWriter { inner, frames, n, written: 0, buffer: Vec::new() })
    }

    /// Append one frame of `8 n^2` values.
    pub fn write_frame(&mut self, values: &[f32]) -> Result<(), PostprocError> {
        let expected = CHANNELS.len() * self.n * self.n;
        if values.len() != expected {
            return Err(PostprocError::LengthMismatch { what: "frame", expected, found: values.len() });
        }
        if self.written == self.frames {
            return Err(PostprocError::FrameCount { expected: self.frames, found: self.written + 1 });
        }
        self.buffer.clear();
        self.buffer.extend(values.iter().flat_map(|v| v.to_le_bytes()));
        self.inner.write_all(&self.buffer)?;
        self.written += 1;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W, PostprocError> {
        if self.written != self.frames {
            return Err(PostprocError::FrameCount { expected: self.frames, found: self.written });
        }
        self.inner.flush()?;
        Ok(self.inner)
    }
}

pub fn read_tensor<R: Read>(mut reader: R) -> Result<DatasetTensor, PostprocError> {
    let mut head = [0u8; 24];
    let got = read_full(&mut reader, &mut head)?;
    if got < 8 || head[..8] != MAGIC {
        let mut magic = [0u8; 8];
        magic[..got.min(8)].copy_from_slice(&head[..got.min(8)]);
        return Err(PostprocError::BadMagic(magic));
    }
    if got < 24 {
        return Err(PostprocError::Truncated { expected: 24, found: got as u64 });
    }
    let dims: [u32; 4] = std::array::from_fn(|k| u32::from_le_bytes(head[8 + 4 * k..12 + 4 * k].try_into().unwrap()));
    if dims[1] as usize != CHANNELS.len() || dims[2] != dims[3] {
        return Err(PostprocError::InvalidTensor(format!("expected frames x 8 x n x n, found {dims:?}")));
    }
    let count = dims
        .iter()
        .try_fold(1usize, |acc, &d| acc.checked_mul(d as usize))
        .filter(|c| c.checked_mul(4).is_some_and(|b| b <= isize::MAX as usize))
        .ok_or(PostprocError::DimOverflow(dims))?;
    let mut bytes = Vec::new();
    reader.by_ref().take(4 * count as u64).read_to_end(&mut bytes)?;
    if bytes.len() != 4 * count {
        return Err(PostprocError::Truncated { expected: 4 * count as u64, found: bytes.len() as u64 });
    }
    let mut extra = [0u8; 1];
    if read_full(&mut reader, &mut extra)? != 0 {
        return Err(PostprocError::InvalidTensor("trailing bytes after tensor data".into()));
    }
    let data = bytes.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
    Ok(DatasetTensor { frames: dims[0] as usize, n: dims[2] as usize, data })
}

fn read_full<R: Read>(reader: &mut R, buf: &mut [u8]) -> Result<usize, PostprocError> {
    let mut got = 0;
    while got < buf.len() {
        match reader.read(&mut buf[got..]) {
            Ok(0) => break,
            Ok(k) => got += k,
            Err(e) if e.kind() == std::io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(got)
}

/// Sidecar JSON describing a tensor file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorManifest {
    pub format: String,
    pub dims: [u32; 4],
    pub channels: Vec<String>,
    pub units: Vec<String>,
    pub unit_system: String,
    /// Lower-left origin; rows run along +y.
    pub row_order: String,
    pub seed: Option<u64>,
    /// Frame index to load step.
    pub steps: Vec<usize>,
    pub configs: serde_json::Value,
}

impl TensorManifest {
    pub fn new(dims: [u32; 4], seed: Option<u64>, steps: Vec<usize>, configs: serde_json::Value) -> Self {
        TensorManifest {
            format: TENSOR_FORMAT.into(),
            dims,
            channels: CHANNELS.iter().map(|s| s.to_string()).collect(),
            units: CHANNEL_UNITS.iter().map(|s| s.to_string()).collect(),
            unit_system: "mm-N-MPa".into(),
            row_order: "bottom_to_top".into(),
            seed,
            steps,
            configs,
        }
    }
}
