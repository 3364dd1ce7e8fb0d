use std::fmt;
use std::path::Path;

use mesofrac::eval::EvalError;
use mesofrac::geometry::GeometryError;
use mesofrac::postproc::PostprocError;
use mesofrac::raster::RasterError;
use mesofrac::solver::{SimulationFailure, SolverError};

/// Failure class; the discriminant is the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Config = 2,
    Numerical = 3,
    Io = 4,
}

impl Kind {
    pub fn code(self) -> i32 {
        self as i32
    }

    fn label(self) -> &'static str {
        match self {
            Kind::Config => "config",
            Kind::Numerical => "numerical",
            Kind::Io => "io",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub struct CliError {
    pub kind: Kind,
    pub message: String,
}

impl fmt::Display for CliError {
    /// `E<code> <kind>: <message>` on one line.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let flat: Vec<&str> = self.message.split_whitespace().collect();
        write!(f, "E{} {}: {}", self.kind.code(), self.kind.label(), flat.join(" "))
    }
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError { kind: Kind::Config, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError { kind: Kind::Io, message: message.into() }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError { kind: Kind::Numerical, message: message.into() }
    }

    /// Prefix the message with a stage or file name.
    pub fn context(mut self, what: impl fmt::Display) -> Self {
        self.message = format!("{what}: {}", self.message);
        self
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    std::fs::read(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        match e {
            // Malformed input files count as unreadable, like corrupt tensors.
            GeometryError::Parse { .. } => CliError::io(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<RasterError> for CliError {
    fn from(e: RasterError) -> Self {
        match e {
            RasterError::Io(_) => CliError::io(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        if e.is_numerical() {
            CliError::numerical(e.to_string())
        } else {
            CliError::config(e.to_string())
        }
    }
}

impl From<SimulationFailure> for CliError {
    fn from(e: SimulationFailure) -> Self {
        let step = e.step;
        CliError::from(e.error).context(format!("step {step}"))
    }
}

impl From<PostprocError> for CliError {
    fn from(e: PostprocError) -> Self {
        use PostprocError as P;
        match e {
            P::Io(_)
            | P::Csv { .. }
            | P::BadMagic(_)
            | P::Truncated { .. }
            | P::InvalidTensor(_)
            | P::DimOverflow(_)
            | P::MissingColumn { .. }
            | P::BadValue { .. } => CliError::io(e.to_string()),
            _ => CliError::config(e.to_string()),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Io(_) => CliError::io(e.to_string()),
            EvalError::Postproc(p) => p.into(),
            _ => CliError::config(e.to_string()),
        }
    }
}
