//! Shape-based image retrieval from sketches.
//!
//! Images are reduced offline to a few contour chains, each described by a
//! similarity-invariant sequence of joint features. Chains are compared by a
//! local alignment with penalized skips and a global angle check, indexed in
//! a hierarchical k-medoids tree, and database images are ranked against a
//! sketch by how consistently several chain matches agree in layout.

pub mod corpus;
pub mod descriptor;
pub mod error;
pub mod eval;
pub mod extraction;
pub mod index;
pub mod matcher;
pub mod model;
pub mod params;
pub mod retrieval;
pub mod synth;
pub mod wire;

pub use error::{Error, Result};
pub use model::{
    Chain, ChainDescriptor, ChainSource, FlipVariant, ImageRecord, MatchResult, Point2, FRAME_SIZE,
};
pub use params::Params;
