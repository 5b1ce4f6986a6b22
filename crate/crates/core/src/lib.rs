//! Spectral geometry on triangle meshes.

pub mod curvature;
pub mod error;
pub mod geodesic;
pub mod lbo;
pub mod linalg;
pub mod matrix_io;
pub mod mds;
pub mod mesh;
pub mod rpca;
pub mod sampling;
pub mod sparse;
pub mod spectral;

pub use error::{Error, Result};

// the guide's code blocks run as doc-tests
#[cfg(doctest)]
mod guide {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/meshes.md")]
    mod meshes {}
    #[doc = include_str!("../../../book/src/metrics.md")]
    mod metrics {}
    #[doc = include_str!("../../../book/src/spectral-basis.md")]
    mod spectral_basis {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/canonical-forms.md")]
    mod canonical_forms {}
    #[doc = include_str!("../../../book/src/rpca.md")]
    mod rpca {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
}
