use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use mesofrac::geometry::{parse_mesostructure, Mesostructure};
use mesofrac::postproc::{dataset_frame, write_curve_csv, write_tensor, DatasetTensor, TensorManifest, TensorWriter};
use mesofrac::raster::{assign_materials, encode_pgm, rasterize, GridSpec, MaterialFieldMaps, MaterialTable, Phase};
use mesofrac::solver::{Frame, Simulation, SolverConfig};
use serde_json::json;

use super::{create_dir, numbered_samples, run_jobs, MESOSTRUCTURE_FILE};
use crate::config;
use crate::error::{read_file, CliError, CliResult};
use crate::manifest::{combined_hash, write_atomic, RunManifest, TOOL_VERSION};

pub const PHASE_IMAGE: &str = "phase.pgm";
pub const MATERIAL_TENSOR: &str = "materials.mfrc";
pub const CURVE_FILE: &str = "curve.csv";
pub const DATASET_FILE: &str = "dataset.mfrc";
pub const DATASET_MANIFEST: &str = "dataset.json";

/// Grid, material and solver settings shared by every sample of a run.
pub struct Setup {
    pub grid: GridSpec,
    /// True when the grid came from defaults, so its domain may follow the
    /// mesostructure.
    pub grid_is_default: bool,
    pub materials: MaterialTable,
    pub solver: SolverConfig,
}

pub struct SetupArgs {
    pub grid_config: Option<PathBuf>,
    pub grid: Option<usize>,
    pub materials: Option<PathBuf>,
    pub solver_config: Option<PathBuf>,
    pub steps: Option<usize>,
    pub u_max: Option<f64>,
    pub lc: Option<f64>,
}

impl SetupArgs {
    pub fn load(&self) -> CliResult<Setup> {
        let mut grid = config::grid(self.grid_config.as_deref())?;
        if let Some(n) = self.grid {
            grid.n_cells = n;
        }
        grid.validate()?;
        let mut solver = config::solver(self.solver_config.as_deref())?;
        if let Some(s) = self.steps {
            solver.n_load_steps = s;
        }
        if let Some(u) = self.u_max {
            solver.u_max = u;
        }
        if let Some(lc) = self.lc {
            solver.lc = lc;
        }
        Ok(Setup {
            grid,
            grid_is_default: self.grid_config.is_none(),
            materials: config::materials(self.materials.as_deref())?,
            solver,
        })
    }
}

impl Setup {
    fn grid_for(&self, meso: &Mesostructure) -> CliResult<GridSpec> {
        let l = meso.config.domain_length;
        if self.grid_is_default {
            return Ok(GridSpec::new(self.grid.n_cells, l)?);
        }
        if (self.grid.domain_length - l).abs() > 1e-9 * l {
            return Err(CliError::config(format!(
                "grid domain {} mm does not match the mesostructure domain {l} mm",
                self.grid.domain_length
            )));
        }
        Ok(self.grid)
    }
}

/// Mesostructure files named by `input`: a file, a sample directory, or a
/// directory of numbered samples.
pub fn resolve_inputs(input: &Path) -> CliResult<Vec<PathBuf>> {
    if input.is_file() {
        return Ok(vec![input.to_path_buf()]);
    }
    if !input.is_dir() {
        return Err(CliError::io(format!("{}: no such file or directory", input.display())));
    }
    let own = input.join(MESOSTRUCTURE_FILE);
    if own.is_file() {
        return Ok(vec![own]);
    }
    let samples = numbered_samples(input)?;
    if samples.is_empty() {
        return Err(CliError::io(format!("{}: no {MESOSTRUCTURE_FILE} and no numbered sample directories", input.display())));
    }
    Ok(samples.into_iter().map(|d| d.join(MESOSTRUCTURE_FILE)).collect())
}

fn parent_dir(path: &Path) -> PathBuf {
    path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new(".")).to_path_buf()
}

/// Where each sample's outputs go.
fn output_dirs(inputs: &[PathBuf], out_dir: Option<&Path>) -> Vec<PathBuf> {
    match out_dir {
        None => inputs.iter().map(|p| parent_dir(p)).collect(),
        Some(o) if inputs.len() == 1 => vec![o.to_path_buf()],
        Some(o) => inputs
            .iter()
            .map(|p| o.join(parent_dir(p).file_name().unwrap_or_default()))
            .collect(),
    }
}

fn load_mesostructure(path: &Path) -> CliResult<(Vec<u8>, Mesostructure)> {
    let bytes = read_file(path)?;
    let text = String::from_utf8(bytes.clone()).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    let meso = parse_mesostructure(&text).map_err(|e| CliError::from(e).context(path.display()))?;
    Ok((bytes, meso))
}

/// Phase image plus the material channels as a one-frame tensor.
fn write_raster(dir: &Path, maps: &MaterialFieldMaps) -> CliResult<()> {
    let n = maps.n;
    let codes: Vec<f64> = maps.phase.labels.iter().map(|p| f64::from(p.code())).collect();
    write_atomic(&dir.join(PHASE_IMAGE), &encode_pgm(&codes, n, n, 0.0, 2.0))?;
    let zero = Frame {
        step: 0,
        strain_x: vec![0.0; n * n],
        strain_y: vec![0.0; n * n],
        stress_x: vec![0.0; n * n],
        stress_y: vec![0.0; n * n],
        damage: vec![0.0; n * n],
    };
    let tensor = DatasetTensor { frames: 1, n, data: dataset_frame(&zero, maps)? };
    let mut bytes = Vec::new();
    write_tensor(&mut bytes, &tensor)?;
    write_atomic(&dir.join(MATERIAL_TENSOR), &bytes)
}

pub struct RasterizeArgs {
    pub input: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub setup: SetupArgs,
}

pub fn run_rasterize(args: &RasterizeArgs) -> CliResult<()> {
    let setup = args.setup.load()?;
    let inputs = resolve_inputs(&args.input)?;
    let outs = output_dirs(&inputs, args.out_dir.as_deref());
    for (input, out) in inputs.iter().zip(&outs) {
        let (_, meso) = load_mesostructure(input)?;
        let grid = setup.grid_for(&meso)?;
        let maps = assign_materials(&rasterize(&meso, &grid), &setup.materials)?;
        create_dir(out)?;
        write_raster(out, &maps)?;
        let counts: Vec<String> = Phase::ALL.iter().map(|&p| format!("{p} {}", maps.phase.count(p))).collect();
        println!("{}: {} cells ({})", out.display(), grid.cell_count(), counts.join(", "));
    }
    Ok(())
}

pub struct SimulateArgs {
    pub input: PathBuf,
    pub out_dir: Option<PathBuf>,
    pub setup: SetupArgs,
    pub jobs: usize,
}

pub fn run_simulate(args: &SimulateArgs) -> CliResult<()> {
    let setup = args.setup.load()?;
    let inputs = resolve_inputs(&args.input)?;
    let outs = output_dirs(&inputs, args.out_dir.as_deref());
    let pairs: Vec<(PathBuf, PathBuf)> = inputs.into_iter().zip(outs).collect();
    run_jobs(&pairs, args.jobs, |(input, out)| simulate_one(input, out, &setup))
}

fn simulate_one(input: &Path, dir: &Path, setup: &Setup) -> CliResult<()> {
    let (meso_bytes, meso) = load_mesostructure(input)?;
    let grid = setup.grid_for(&meso)?;
    setup.solver.validate(grid.cell_size())?;
    create_dir(dir)?;
    let name = dir.file_name().map_or_else(|| dir.display().to_string(), |n| n.to_string_lossy().into_owned());

    let grid_json = config::canonical(&grid);
    let materials_json = setup.materials.to_json();
    let solver_json = config::canonical(&setup.solver);
    let mut manifest = RunManifest::load_or_new(dir, Some(meso.config.seed))?;
    manifest.configs.insert("grid".into(), config::digest(&grid));
    manifest.configs.insert("materials".into(), crate::manifest::sha256_hex(materials_json.as_bytes()));
    manifest.configs.insert("solver".into(), config::digest(&setup.solver));

    let raster_inputs = combined_hash(&[
        ("tool", TOOL_VERSION.as_bytes()),
        ("mesostructure", &meso_bytes),
        ("grid", grid_json.as_bytes()),
        ("materials", materials_json.as_bytes()),
    ]);
    let maps = assign_materials(&rasterize(&meso, &grid), &setup.materials)?;
    if manifest.is_current(dir, "rasterize", &raster_inputs) {
        manifest.mark_skipped("rasterize");
        println!("{name}: rasterize skipped");
    } else {
        write_raster(dir, &maps)?;
        manifest.record(dir, "rasterize", raster_inputs, &[PHASE_IMAGE, MATERIAL_TENSOR])?;
        println!("{name}: rasterize done");
    }
    manifest.save(dir)?;

    let solve_inputs = combined_hash(&[
        ("tool", TOOL_VERSION.as_bytes()),
        ("mesostructure", &meso_bytes),
        ("grid", grid_json.as_bytes()),
        ("materials", materials_json.as_bytes()),
        ("solver", solver_json.as_bytes()),
    ]);
    if manifest.is_current(dir, "solve", &solve_inputs) {
        manifest.mark_skipped("solve");
        manifest.save(dir)?;
        println!("{name}: solve skipped");
        return Ok(());
    }
    match solve(dir, &grid, &maps, setup, meso.config.seed) {
        Ok(steps) => {
            manifest.record(dir, "solve", solve_inputs, &[CURVE_FILE, DATASET_FILE, DATASET_MANIFEST])?;
            manifest.save(dir)?;
            println!("{name}: solve done ({steps} steps)");
            Ok(())
        }
        Err(e) => {
            let e = e.context(format!("{name}: solve"));
            manifest.record_failure("solve", solve_inputs, &e);
            manifest.save(dir)?;
            Err(e)
        }
    }
}

/// Run the load schedule, streaming frames into the dataset tensor.
fn solve(dir: &Path, grid: &GridSpec, maps: &MaterialFieldMaps, setup: &Setup, seed: u64) -> CliResult<usize> {
    let cfg = &setup.solver;
    let mut sim = Simulation::from_maps(maps, grid, cfg.clone())?;
    let frame_count = cfg.frame_steps().count();
    let partial = dir.join(format!(".{DATASET_FILE}.partial"));
    let io = |e: std::io::Error| CliError::io(format!("{}: {e}", partial.display()));
    let file = BufWriter::new(File::create(&partial).map_err(io)?);
    let mut writer = TensorWriter::new(file, frame_count, grid.n_cells)?;
    let mut frame_steps = Vec::with_capacity(frame_count);

    let mut failure = None;
    loop {
        for f in sim.take_frames() {
            writer.write_frame(&dataset_frame(&f, maps)?)?;
            frame_steps.push(f.step);
        }
        if sim.is_finished() {
            break;
        }
        if let Err(e) = sim.advance() {
            failure = Some(CliError::from(e).context(format!("step {}", sim.state().step + 1)));
            break;
        }
    }

    let mut curve = Vec::new();
    write_curve_csv(&mut curve, sim.records(), grid.domain_length)?;
    write_atomic(&dir.join(CURVE_FILE), &curve)?;
    if let Some(e) = failure {
        drop(writer);
        let _ = std::fs::remove_file(&partial);
        return Err(e);
    }
    writer.finish()?.into_inner().map_err(|e| io(e.into_error()))?.sync_all().map_err(io)?;
    std::fs::rename(&partial, dir.join(DATASET_FILE)).map_err(io)?;

    let dims = [frame_count as u32, 8, grid.n_cells as u32, grid.n_cells as u32];
    let configs = json!({
        "grid": grid,
        "solver": cfg,
        "materials": serde_json::from_str::<serde_json::Value>(&setup.materials.to_json()).expect("valid json"),
    });
    let sidecar = TensorManifest::new(dims, Some(seed), frame_steps, configs);
    let mut text = serde_json::to_string_pretty(&sidecar).expect("manifest serializes");
    text.push('\n');
    write_atomic(&dir.join(DATASET_MANIFEST), text.as_bytes())?;
    Ok(sim.records().len() - 1)
}
