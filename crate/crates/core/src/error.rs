use thiserror::Error;

use crate::evolution::PropagationRecord;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid medium parameters: {0}")]
    InvalidParams(String),

    #[error("material response is singular at omega = {omega}")]
    Singularity { omega: f64 },

    #[error("omega = {omega} lies in the evanescent band ({lo}, {hi})")]
    Evanescent { omega: f64, lo: f64, hi: f64 },

    #[error("omega = {omega} is outside the lower propagating band (0, {edge})")]
    OutsideLowerBand { omega: f64, edge: f64 },

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("grid is not admissible for {operator}: bin omega = {omega} ({reason})")]
    InadmissibleGrid {
        operator: &'static str,
        omega: f64,
        reason: &'static str,
    },

    #[error("length mismatch: expected {expected} samples, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("operands live on different time grids")]
    GridMismatch,

    #[error("non-finite value produced by {0}")]
    NonFinite(&'static str),

    #[error("real-to-real operator left imaginary residue {residue:e} (relative to peak)")]
    ImaginaryResidue { residue: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("propagation blew up at x = {x}; last valid station retained")]
    BlowUp {
        x: f64,
        record: Box<PropagationRecord>,
    },

    #[error("FDTD instability: field magnitude {magnitude:e} exceeded limit {limit:e} at step {step}")]
    Unstable {
        step: usize,
        magnitude: f64,
        limit: f64,
    },

    #[error("probe at x = {x} lies outside the FDTD grid [0, {length}]")]
    ProbeOutsideGrid { x: f64, length: f64 },

    #[error("boundary reflections reach x = {x} at t = {arrival:e} s, before the run ends at {duration:e} s")]
    Contamination { x: f64, arrival: f64, duration: f64 },

    #[error("pulse rejected: {0}")]
    Pulse(String),

    #[error("sample file line {line}: {message}")]
    SampleFile { line: usize, message: String },

    #[error(transparent)]
    Config(#[from] crate::scenario::ConfigErrors),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
