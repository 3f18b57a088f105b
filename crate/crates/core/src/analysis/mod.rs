//! Layer sweeps, accuracy curves, PCA and rotation trajectories.

mod pca;
mod sweep;
mod trajectory;

pub use pca::{pca, PcaResult};
pub use sweep::{
    compare_pooling, curve_csv, curve_svg, parse_curve_csv, ChartOptions, LayerPoint, LayerSweep, PoolingComparison,
    PoolingRow, CURVE_CSV_HEADER,
};
pub use trajectory::{circular_rank_correlation, rotation_trajectory, RotationTrajectory};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("{len} values do not form {rows} rows of dimension {dim}")]
    ShapeMismatch { rows: usize, dim: usize, len: usize },
    #[error("need at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("requested {k} components, at most {max} available")]
    TooManyComponents { k: usize, max: usize },
    #[error("non-finite value in row {row}")]
    NonFinite { row: usize },
    #[error("layers must be contiguous from 0: expected {expected}, found {found}")]
    LayerGap { expected: u32, found: u32 },
    #[error("empty sweep")]
    EmptySweep,
    #[error("sweeps have {left} and {right} layers")]
    SweepLengthMismatch { left: usize, right: usize },
    #[error("curve CSV line {line}: {reason}")]
    Csv { line: usize, reason: &'static str },
}
