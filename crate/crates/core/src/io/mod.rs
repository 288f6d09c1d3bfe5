//! File formats: network ingestion, meta-path expressions, reports and histograms.

pub mod histogram;
pub mod metapath;
pub mod network;
pub mod report;

pub use histogram::{histogram, volume_curve, write_histogram, BinSpec, Bin, VolumeBucket};
pub use metapath::parse_metapath_expr;
pub use network::{load_network, read_schema, write_network, LoadedNetwork, SchemaFile, VertexNames};
pub use report::{read_reports, write_reports, ReportFormat, ReportRecord};
