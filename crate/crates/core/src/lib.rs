//! Street network simplification that keeps continuity of through streets.
//!
//! The pipeline repairs topology, finds artifact faces by shape, classifies
//! them by how continuous streets cross their boundary, and replaces them
//! with simpler geometry. The [`evaluation`] module compares two networks on
//! a hexagonal grid.
//!
//! ```
//! use netsimp::{fixtures, simplify, SimplifyParams};
//!
//! let case = fixtures::generate("Roundabouts").unwrap();
//! let (out, report) = simplify(&case.input, &SimplifyParams::default()).unwrap();
//! assert!(case.predicates.check(&out).is_empty());
//! assert_eq!(report.loops[0].artifacts, 1);
//! ```

pub mod artifacts;
pub mod classification;
pub mod clustering;
pub mod continuity;
pub mod error;
pub mod evaluation;
pub mod faces;
pub mod fixtures;
pub mod geom;
pub mod io;
pub mod network;
pub mod pipeline;
pub mod replacement;
pub mod topology;

pub use artifacts::{detect_artifacts, DetectionParams};
pub use classification::{classify, GroupKind};
pub use continuity::{detect_strokes, ContinuityParams, StrokeSet};
pub use error::{Error, Result};
pub use evaluation::{chatterjee_xi, compare_networks, euclidean_distance, GridParams, Metric, MetricSeries};
pub use geom::{Coord, Region};
pub use network::{EdgeId, EdgeRecord, EdgeStatus, Network};
pub use pipeline::{simplify, RunReport, SimplifyParams};
pub use topology::{consolidate_nodes, fix_topology, ConsolidationParams};
