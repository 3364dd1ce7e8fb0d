use std::io::Write;

/// Binary 16-bit PGM (P5, maxval 65535, big-endian samples).
///
/// `values` is a row-major `width * height` grid with row 0 at the bottom;
/// image rows are written top-down so the picture has the usual orientation.
/// Values are mapped linearly from `[lo, hi]` to `[0, 65535]` and clamped.
/// The range is recorded in a comment line.
pub fn encode_pgm(values: &[f64], width: usize, height: usize, lo: f64, hi: f64) -> Vec<u8> {
    assert_eq!(values.len(), width * height, "value count must match image size");
    let mut out = format!("P5\n# range {lo:e} {hi:e}\n{width} {height}\n65535\n").into_bytes();
    out.reserve(2 * values.len());
    let span = hi - lo;
    for row in (0..height).rev() {
        for &v in &values[row * width..(row + 1) * width] {
            let t = if span > 0.0 { (v - lo) / span } else { 0.0 };
            let level = if t.is_nan() { 0 } else { (t.clamp(0.0, 1.0) * 65535.0).round() as u16 };
            out.extend_from_slice(&level.to_be_bytes());
        }
    }
    out
}

pub fn write_pgm<W: Write>(
    mut w: W,
    values: &[f64],
    width: usize,
    height: usize,
    lo: f64,
    hi: f64,
) -> std::io::Result<()> {
    w.write_all(&encode_pgm(values, width, height, lo, hi))
}
