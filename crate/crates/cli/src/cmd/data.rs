use std::path::{Path, PathBuf};

use mesofrac::postproc::{
    ingest_fe_csv, read_curve_csv, read_tensor, write_fe_csv, write_tensor, DatasetTensor, FeRow, TensorManifest,
};
use mesofrac::raster::GridSpec;
use serde::Serialize;
use serde_json::json;

use super::create_dir;
use crate::error::{read_file, CliError, CliResult};
use crate::manifest::write_atomic;

pub fn load_tensor(path: &Path) -> CliResult<DatasetTensor> {
    let bytes = read_file(path)?;
    read_tensor(bytes.as_slice()).map_err(|e| CliError::from(e).context(path.display()))
}

#[derive(Debug, Serialize)]
struct CurveSummary {
    steps: usize,
    all_converged: bool,
    peak_stress_mpa: f64,
    strain_at_peak: f64,
    final_stress_mpa: f64,
    /// Area under the curve, MPa (energy per unit volume).
    fracture_energy_mpa: f64,
}

pub struct PostprocessArgs {
    pub curve: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub tensor: Option<PathBuf>,
    pub fe_out: Option<PathBuf>,
    pub domain: f64,
}

pub fn run_postprocess(args: &PostprocessArgs) -> CliResult<()> {
    if args.curve.is_none() && args.tensor.is_none() {
        return Err(CliError::config("postprocess needs --curve and/or --tensor"));
    }
    if let Some(path) = &args.curve {
        let bytes = read_file(path)?;
        let (curve, rows) = read_curve_csv(bytes.as_slice()).map_err(|e| CliError::from(e).context(path.display()))?;
        let (strain_at_peak, peak) =
            curve.points().iter().copied().fold((0.0, f64::NEG_INFINITY), |a, p| if p.1 > a.1 { p } else { a });
        let summary = CurveSummary {
            steps: rows.len().saturating_sub(1),
            all_converged: rows.iter().all(|r| r.converged_flag != 0),
            peak_stress_mpa: peak,
            strain_at_peak,
            final_stress_mpa: curve.points().last().map_or(0.0, |p| p.1),
            fracture_energy_mpa: curve.fracture_energy()?,
        };
        let mut text = serde_json::to_string_pretty(&summary).expect("summary serializes");
        text.push('\n');
        match &args.out {
            Some(out) => write_atomic(out, text.as_bytes())?,
            None => print!("{text}"),
        }
    }
    if let Some(path) = &args.tensor {
        let dir = args.fe_out.as_ref().ok_or_else(|| CliError::config("--tensor needs --fe-out"))?;
        let tensor = load_tensor(path)?;
        let grid = GridSpec::new(tensor.n, args.domain)?;
        create_dir(dir)?;
        for f in 0..tensor.frames {
            let rows = fe_rows(&tensor, f, &grid);
            let mut bytes = Vec::new();
            write_fe_csv(&mut bytes, &rows)?;
            write_atomic(&dir.join(format!("frame_{f:04}.csv")), &bytes)?;
        }
        println!("{}: {} frames exported", dir.display(), tensor.frames);
    }
    Ok(())
}

/// Cell-centre rows of one tensor frame; materials go with frame 0 only.
fn fe_rows(tensor: &DatasetTensor, frame: usize, grid: &GridSpec) -> Vec<FeRow> {
    let n = tensor.n;
    let ch = |k: usize| tensor.channel(frame, k);
    (0..n * n)
        .map(|c| {
            let p = grid.cell_center(c % n, c / n);
            let field = |k: usize| f64::from(ch(k)[c]);
            FeRow {
                x: p.x,
                y: p.y,
                fields: [field(3), field(4), field(5), field(6), field(7)],
                material: (frame == 0).then(|| [field(0), field(1), field(2)]),
            }
        })
        .collect()
}

pub struct IngestArgs {
    pub files: Vec<PathBuf>,
    pub dir: Option<PathBuf>,
    pub grid: usize,
    pub domain: f64,
    pub expected_frames: Option<usize>,
    pub out: PathBuf,
}

pub fn run_ingest(args: &IngestArgs) -> CliResult<()> {
    let mut files = args.files.clone();
    if let Some(dir) = &args.dir {
        let entries = std::fs::read_dir(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
        let mut found = Vec::new();
        for entry in entries {
            let p = entry?.path();
            if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
                found.push(p);
            }
        }
        found.sort();
        files.extend(found);
    }
    if files.is_empty() {
        return Err(CliError::config("no FE frame files given"));
    }
    if let Some(missing) = files.iter().find(|p| !p.is_file()) {
        return Err(CliError::io(format!("{}: no such file", missing.display())));
    }
    let grid = GridSpec::new(args.grid, args.domain)?;
    let tensor = ingest_fe_csv(&files, &grid, args.expected_frames)?;
    let mut bytes = Vec::new();
    write_tensor(&mut bytes, &tensor)?;
    write_atomic(&args.out, &bytes)?;
    let sources: Vec<String> = files.iter().map(|p| p.display().to_string()).collect();
    let sidecar = TensorManifest::new(
        tensor.dims(),
        None,
        (0..tensor.frames).collect(),
        json!({ "grid": grid, "ingested_from": sources, "fields": "cubic", "materials": "nearest" }),
    );
    let mut text = serde_json::to_string_pretty(&sidecar).expect("manifest serializes");
    text.push('\n');
    write_atomic(&args.out.with_extension("json"), text.as_bytes())?;
    println!("{}: {} frames on a {}x{} grid", args.out.display(), tensor.frames, tensor.n, tensor.n);
    Ok(())
}
