use num_complex::Complex64;
use thiserror::Error;

use crate::profile::Classification;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("quadrature did not converge: estimated error {estimate:.3e} after {evaluations} evaluations")]
    Quadrature { estimate: f64, evaluations: usize },

    #[error("ode integration failed at x = {x}: {reason}")]
    Integration { x: f64, reason: String },

    #[error("profile Newton iteration did not converge (iterations {iterations}, residual {residual:.3e})")]
    NewtonFailed {
        iterations: usize,
        residual: f64,
        last_iterate: Option<Box<crate::profile::ProfileSolution>>,
    },

    #[error("profile truncation too short: endpoint errors ({left:.3e}, {right:.3e}) with L = [{l_minus}, {l_plus}]; enlarge L")]
    Truncation {
        left: f64,
        right: f64,
        l_minus: f64,
        l_plus: f64,
    },

    #[error("mesh refinement exhausted: residual {residual:.3e} with {nodes} nodes")]
    MeshExhausted { residual: f64, nodes: usize },

    #[error("shooting orbit left the admissible box at v = {v}, w = {w}")]
    OrbitEscaped { v: f64, w: f64 },

    #[error("classification mismatch: grid says {detected:?}, d <= d* predicts {predicted:?} (resolvable: {resolvable})")]
    ClassificationMismatch {
        detected: Classification,
        predicted: Classification,
        resolvable: bool,
    },

    #[error("consistent splitting violated at lambda = {lambda}: {unstable_minus} unstable modes at -inf, {stable_plus} stable at +inf")]
    Splitting {
        lambda: Complex64,
        unstable_minus: usize,
        stable_plus: usize,
    },

    #[error("dominant mode not simple at lambda = {lambda} (gap {gap:.3e})")]
    Degenerate { lambda: Complex64, gap: f64 },

    #[error("rescaled Evans trajectory norm ratio {ratio:.3e} outside guard at lambda = {lambda}")]
    NormGuard { lambda: Complex64, ratio: f64 },

    #[error("|D| = {modulus:.3e} at lambda = {lambda}: zero on or near the contour")]
    NearZero { lambda: Complex64, modulus: f64 },

    #[error("phase increment {increment:.3} unresolved after {depth} bisections near lambda = {lambda}")]
    UnresolvedPhase {
        lambda: Complex64,
        increment: f64,
        depth: usize,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
