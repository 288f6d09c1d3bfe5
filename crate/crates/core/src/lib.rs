//! True-diversity (Hill number) measures over meta-path constrained random walks on
//! heterogeneous information networks.
//!
//! * [`divmath`]: true diversities, relative true diversities and classic indices.
//! * [`hin`]: the typed multigraph, its schema and sink augmentation.
//! * [`walk`]: meta paths, exact walk propagation and path-count projection.
//! * [`netdiv`]: collective, individual, backward, relative and projected diversities.
//! * [`io`]: schema and edge-list ingestion, meta-path expressions, report and histogram files.

pub mod divmath;
pub mod error;
pub mod hin;
pub mod io;
pub mod netdiv;
pub mod walk;

pub use divmath::{AlphaOrder, Distribution};
pub use error::{Error, Result};
pub use hin::{
    build_hin, Direction, EdgeRecord, EdgeStep, EdgeTypeDecl, EdgeTypeId, Hin, HinBuilder,
    Schema, VertexId, VertexTypeDecl, VertexTypeId,
};
pub use netdiv::{DiversityReport, MeasureKind, NetworkDiversity, SinkPolicy, Start};
pub use walk::{MetaPath, VertexDistribution};
