//! Lipschitz extensions on weighted graphs.

pub mod error;
pub mod graph;
pub mod graph_io;
pub mod infinity;
pub mod imaging;
pub mod linalg;
pub mod oracle;
pub mod tight;

pub use error::{Error, Result};
pub use graph::{
    is_tighter, lex_compare, lipschitz_profile, local_lipschitz, BoundaryProblem, LipschitzProfile,
    VertexFunction, WeightedGraph,
};
pub use infinity::{
    divergence_demo, extend_componentwise, extend_inf_harmonic, graph_inf_laplacian, Init,
    IterationConfig, IterationReport,
};
pub use tight::{energy_is, energy_logexp, minimize_is, tight_extension, AdmmConfig};
pub use imaging::{inpaint, ImageGrid, InpaintConfig};
pub use oracle::{brute_force_is, brute_force_prox, verify_tight, OracleConfig};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/graphs.md")]
    mod graphs {}
    #[doc = include_str!("../../../book/src/infinity.md")]
    mod infinity {}
    #[doc = include_str!("../../../book/src/tight.md")]
    mod tight {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/inpainting.md")]
    mod inpainting {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
