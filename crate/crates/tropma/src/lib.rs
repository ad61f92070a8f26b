//! IO, file formats, verification battery and pipeline glue for the
//! torus Monge-Ampère / discrete-measure toolkit in `tropma-core`.

pub mod expr;
pub mod format;
pub mod grid;
pub mod par;
pub mod pipeline;
pub mod verify;

/// Errors carry their process exit code: 2 for input problems, 3 for
/// convergence/refinement failures.
#[derive(Debug, Clone, PartialEq)]
pub enum AppError {
    Input(String),
    Convergence(String),
}

impl AppError {
    pub fn input(msg: String) -> Self {
        AppError::Input(msg)
    }

    pub fn convergence(msg: String) -> Self {
        AppError::Convergence(msg)
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Input(_) => 2,
            AppError::Convergence(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            AppError::Input(m) | AppError::Convergence(m) => m,
        }
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message())
    }
}

impl std::error::Error for AppError {}

impl From<tropma_core::green::GreenError> for AppError {
    fn from(e: tropma_core::green::GreenError) -> Self {
        AppError::input(format!("{e}"))
    }
}

impl From<tropma_core::plapprox::PlError> for AppError {
    fn from(e: tropma_core::plapprox::PlError) -> Self {
        use tropma_core::plapprox::PlError::*;
        match &e {
            RefineN { .. } | UnboundedCell { .. } => AppError::convergence(format!("{e}")),
            _ => AppError::input(format!("{e}")),
        }
    }
}

impl From<tropma_core::clmeasure::MeasureError> for AppError {
    fn from(e: tropma_core::clmeasure::MeasureError) -> Self {
        use tropma_core::clmeasure::MeasureError::*;
        match &e {
            Pl(p) => AppError::from(p.clone()),
            DegenerateDual { .. } => AppError::convergence(format!("{e}")),
            _ => AppError::input(format!("{e}")),
        }
    }
}

impl From<tropma_core::masolver::MaError> for AppError {
    fn from(e: tropma_core::masolver::MaError) -> Self {
        use tropma_core::masolver::MaError::*;
        match &e {
            StepFailure { .. } | NonConvergence { .. } | RefineGrid => {
                AppError::convergence(format!("{e}"))
            }
            _ => AppError::input(format!("{e}")),
        }
    }
}
