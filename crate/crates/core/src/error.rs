use thiserror::Error;

use crate::network::EdgeId;

#[derive(Debug, Error)]
pub enum Error {
    #[error("feature {feature} has a non-finite coordinate")]
    NonFiniteCoordinate { feature: String },

    #[error("coordinates look geographic (degrees); reproject to a metric CRS first")]
    GeographicCrs,

    #[error("CRS mismatch: {0} vs {1}")]
    CrsMismatch(String, String),

    #[error("edge {a:?} ends on the interior of edge {b:?} without a shared node")]
    UnnodedTouch { a: EdgeId, b: EdgeId },

    #[error("degenerate face: area {area}")]
    DegenerateFace { area: f64 },

    #[error("too few faces ({0}) to derive an artifact threshold; pass one explicitly")]
    TooFewFaces(usize),

    #[error("face artifact index distribution has no valley; pass a threshold explicitly")]
    NoValley,

    #[error("edge {0:?} is not on the artifact boundary")]
    NotOnBoundary(EdgeId),

    #[error("skeleton: {0}")]
    Skeleton(String),

    #[error("grid mismatch between metric series")]
    GridMismatch,

    #[error("need at least {needed} paired observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("empty or degenerate extent")]
    EmptyExtent,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown fixture {0:?}")]
    UnknownFixture(String),

    #[error("invalid GeoJSON: {0}")]
    GeoJson(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
