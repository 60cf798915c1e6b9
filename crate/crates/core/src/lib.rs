//! Exact-arithmetic machinery of non-semisimple 3d TFTs: coend Hopf-algebra data,
//! ribbon/bichrome graph evaluation, renormalised Lyubashenko invariants, modified
//! traces, TFT state spaces, gluing morphisms and anomaly arithmetic, for finite
//! ribbon categories presented as modules over finite-dimensional ribbon Hopf
//! algebras. All scalars live in a cyclotomic field Q(zeta_N); nothing is rounded.

pub mod scalar;
pub mod linalg;
pub mod hopf;
pub mod repcat;
pub mod coend;
pub mod diagram;
pub mod mfld;
pub mod tft;
pub mod io;
pub mod selftest;

use thiserror::Error as ThisError;

#[derive(Debug, Clone, ThisError)]
pub enum Error {
    #[error("order mismatch: cyclotomic orders {0} and {1} are incompatible")]
    OrderMismatch(u32, u32),
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("schema error at {path}: {msg}")]
    Schema { path: String, msg: String },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("axioms violated: {0}")]
    AxiomsViolated(String),
    #[error("no ribbon element over the session field (try enlarging the cyclotomic order)")]
    NoRibbonElement,
    #[error("unknown builtin name: {0}")]
    UnknownName(String),
    #[error("type error at layer {layer}, position {pos}: {reason}")]
    TypeError { layer: usize, pos: usize, reason: String },
    #[error("red component touches the boundary; closed evaluation unsupported")]
    RedComponentOpen,
    #[error("intermediate dimension {0} exceeds the configured bound {1}")]
    DimensionBlowup(usize, usize),
    #[error("category is not modular: {0}")]
    NotModular(String),
    #[error("integral/cointegral space is not one-dimensional (dim {0})")]
    NonUniqueIntegral(usize),
    #[error("modified trace space is not one-dimensional (dim {0})")]
    NonUniqueTrace(usize),
    #[error("presentation not admissible: {0}")]
    NotAdmissible(String),
    #[error("no square root of {value} in Q(zeta_{order}){hint}")]
    NoSquareRoot { value: String, order: u32, hint: String },
    #[error("Lagrangian condition violated: {0}")]
    NotLagrangian(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
