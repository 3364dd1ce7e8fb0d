pub mod data;
pub mod evaluate;
pub mod generate;
pub mod plot;
pub mod simulate;

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{CliError, CliResult};

pub const MESOSTRUCTURE_FILE: &str = "mesostructure.json";

/// Directory name of the `index`-th sample (1-based).
pub fn sample_dir_name(index: usize) -> String {
    format!("{index:06}")
}

/// Numbered sample directories directly under `root`, in order.
pub fn numbered_samples(root: &Path) -> CliResult<Vec<PathBuf>> {
    let entries = std::fs::read_dir(root).map_err(|e| CliError::io(format!("{}: {e}", root.display())))?;
    let mut dirs = Vec::new();
    for entry in entries {
        let entry = entry?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.len() == 6 && name.bytes().all(|b| b.is_ascii_digit()) && entry.path().join(MESOSTRUCTURE_FILE).is_file() {
            dirs.push(entry.path());
        }
    }
    dirs.sort();
    Ok(dirs)
}

pub fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

/// Run `task` over `items` on at most `jobs` worker threads. Every item is
/// attempted; the first error in item order is returned.
pub fn run_jobs<T: Sync>(items: &[T], jobs: usize, task: impl Fn(&T) -> CliResult<()> + Sync) -> CliResult<()> {
    let next = AtomicUsize::new(0);
    let errors: Mutex<Vec<(usize, CliError)>> = Mutex::new(Vec::new());
    let workers = jobs.clamp(1, items.len().max(1));
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(i) else { break };
                if let Err(e) = task(item) {
                    errors.lock().unwrap_or_else(|p| p.into_inner()).push((i, e));
                }
            });
        }
    });
    let mut errors = errors.into_inner().unwrap_or_else(|p| p.into_inner());
    errors.sort_by_key(|(i, _)| *i);
    match errors.into_iter().next() {
        Some((_, e)) => Err(e),
        None => Ok(()),
    }
}
