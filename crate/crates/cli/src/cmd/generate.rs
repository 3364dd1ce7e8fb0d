use std::path::{Path, PathBuf};

use mesofrac::geometry::{generate_mesostructure, serialize_mesostructure, GeometryConfig};
use mesofrac::rng::derive_seed;

use super::{create_dir, run_jobs, sample_dir_name, MESOSTRUCTURE_FILE};
use crate::config;
use crate::error::CliResult;
use crate::manifest::{combined_hash, write_atomic, RunManifest, TOOL_VERSION};

pub struct GenerateArgs {
    pub seed: Option<u64>,
    pub count: usize,
    pub config: Option<PathBuf>,
    pub target_vf: Option<f64>,
    pub out_dir: PathBuf,
    pub jobs: usize,
}

pub fn run(args: &GenerateArgs) -> CliResult<()> {
    let mut base = config::geometry(args.config.as_deref())?;
    if let Some(seed) = args.seed {
        base.seed = seed;
    }
    if let Some(vf) = args.target_vf {
        base.target_volume_fraction = vf;
    }
    base.validate()?;
    if args.count == 0 {
        return Ok(());
    }
    create_dir(&args.out_dir)?;
    let indices: Vec<usize> = (1..=args.count).collect();
    run_jobs(&indices, args.jobs, |&i| {
        // Sample i draws from its own stream, so results do not depend on
        // the job count or on which samples already exist.
        let cfg = GeometryConfig { seed: derive_seed(base.seed, i as u64), ..base.clone() };
        one(&args.out_dir.join(sample_dir_name(i)), &cfg)
    })
}

fn one(dir: &Path, cfg: &GeometryConfig) -> CliResult<()> {
    create_dir(dir)?;
    let name = dir.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let config_json = config::canonical(cfg);
    let inputs = combined_hash(&[("tool", TOOL_VERSION.as_bytes()), ("geometry", config_json.as_bytes())]);
    let mut manifest = RunManifest::load_or_new(dir, Some(cfg.seed))?;
    manifest.configs.insert("geometry".into(), config::digest(cfg));
    if manifest.is_current(dir, "generate", &inputs) {
        manifest.mark_skipped("generate");
        manifest.save(dir)?;
        println!("{name}: generate skipped");
        return Ok(());
    }
    let meso = match generate_mesostructure(cfg) {
        Ok(m) => m,
        Err(e) => {
            let err = crate::error::CliError::from(e).context(format!("{name}: generate"));
            manifest.record_failure("generate", inputs, &err);
            manifest.save(dir)?;
            return Err(err);
        }
    };
    write_atomic(&dir.join(MESOSTRUCTURE_FILE), serialize_mesostructure(&meso).as_bytes())?;
    manifest.record(dir, "generate", inputs, &[MESOSTRUCTURE_FILE])?;
    manifest.save(dir)?;
    println!(
        "{name}: generate done ({} aggregates, vf {:.4})",
        meso.aggregates.len(),
        meso.achieved_volume_fraction
    );
    Ok(())
}
