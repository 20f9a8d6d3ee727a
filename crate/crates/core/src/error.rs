use serde::Serialize;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Machine-readable reasons a mesh fails validation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeshErrorCode {
    Empty,
    IndexOutOfRange,
    RepeatedIndex,
    NonManifoldEdge,
    InconsistentOrientation,
    NonManifoldVertex,
    DegenerateFace,
    IsolatedVertex,
    NonFinitePosition,
    MeshQuality,
}

impl MeshErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            MeshErrorCode::Empty => "empty",
            MeshErrorCode::IndexOutOfRange => "index-out-of-range",
            MeshErrorCode::RepeatedIndex => "repeated-index",
            MeshErrorCode::NonManifoldEdge => "non-manifold-edge",
            MeshErrorCode::InconsistentOrientation => "inconsistent-orientation",
            MeshErrorCode::NonManifoldVertex => "non-manifold-vertex",
            MeshErrorCode::DegenerateFace => "degenerate-face",
            MeshErrorCode::IsolatedVertex => "isolated-vertex",
            MeshErrorCode::NonFinitePosition => "non-finite-position",
            MeshErrorCode::MeshQuality => "mesh-quality",
        }
    }
}

impl std::fmt::Display for MeshErrorCode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("point ({0}, {1}, {2}) lies outside the chart domain")]
    Domain(f64, f64, f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("mesh validation failed [{code}]: {detail}")]
    Mesh { code: MeshErrorCode, detail: String },
    #[error("mesh is not connected ({components} components)")]
    Disconnected { components: usize },
    #[error("gate violation: {0}")]
    GateViolation(String),
    #[error("construction failed: {0}")]
    Construction(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn mesh(code: MeshErrorCode, detail: impl Into<String>) -> Self {
        Error::Mesh { code, detail: detail.into() }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Stable short code for reports and exit diagnostics.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain(..) => "domain",
            Error::InvalidInput(_) => "invalid-input",
            Error::Unsupported(_) => "unsupported",
            Error::Mesh { code, .. } => code.as_str(),
            Error::Disconnected { .. } => "disconnected",
            Error::GateViolation(_) => "gate-violation",
            Error::Construction(_) => "construction",
            Error::Parse { .. } => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
