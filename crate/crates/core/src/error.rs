use std::path::PathBuf;

/// Errors produced by graph construction, the solvers and the imaging pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("graph must have at least one node")]
    EmptyGraph,

    #[error("node index {index} out of range for a graph with {node_count} nodes")]
    NodeOutOfRange { index: usize, node_count: usize },

    #[error("self-loop at node {0}")]
    SelfLoop(usize),

    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),

    #[error("asymmetric weight on edge ({i}, {j}): {forward} vs {backward}")]
    AsymmetricWeight {
        i: usize,
        j: usize,
        forward: f64,
        backward: f64,
    },

    #[error("weight {weight} on edge ({i}, {j}) is outside (0, 1]")]
    InvalidWeight { i: usize, j: usize, weight: f64 },

    #[error("graph is disconnected: node {unreachable} is not reachable from node 0")]
    Disconnected { unreachable: usize },

    #[error("node {0} has no neighbors")]
    IsolatedNode(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),

    #[error("function disagrees with the boundary values at node {0}")]
    BoundaryMismatch(usize),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("nothing to extend: every node is a boundary node")]
    NothingToExtend,

    #[error("lipschitz profiles have different lengths ({0} vs {1})")]
    ProfileLength(usize, usize),

    #[error("normal matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("iterative solve did not reach tolerance: relative residual {residual:e} after {iterations} iterations")]
    LinearSolve { iterations: usize, residual: f64 },

    #[error("threshold root finding failed: K={active}, bracket [{lo}, {hi}], g(tau)={value:e}")]
    RootFinding {
        active: usize,
        lo: f64,
        hi: f64,
        value: f64,
    },

    #[error("oracle search space has {dim} free coordinates, limit is {limit}")]
    OracleTooLarge { dim: usize, limit: usize },

    #[error("cannot read image {path}: {message}")]
    ImageRead { path: PathBuf, message: String },

    #[error("cannot write image {path}: {message}")]
    ImageWrite { path: PathBuf, message: String },

    #[error("mask is {mask_width}x{mask_height} but image is {width}x{height}")]
    MaskSize {
        width: u32,
        height: u32,
        mask_width: u32,
        mask_height: u32,
    },

    #[error("mask pixel ({x}, {y}) has value {value}; only 0 (known) and 255 (missing) are allowed")]
    MaskValue { x: u32, y: u32, value: u16 },

    #[error("invalid image: {0}")]
    InvalidImage(String),

    #[error("every pixel is missing")]
    NoKnownPixels,

    #[error("inpainting stalled with {} unreachable pixels (first: {:?})", unreachable.len(), unreachable.first())]
    Stalled { unreachable: Vec<usize> },

    #[error("{context}: solver did not converge")]
    NotConverged { context: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
