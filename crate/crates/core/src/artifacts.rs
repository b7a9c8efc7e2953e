//! Face artifact detection.
//!
//! The face artifact index (FAI) is `log10(area * 4πA/P²)`. Street blocks
//! score high, the slivers and rings left by dual carriageways, roundabouts
//! and slip lanes score low. The cut-off is the density valley between the
//! two dominant modes of the FAI distribution.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::faces::{FaceId, FacePolygon};
use crate::geom::Region;

/// Used when no threshold is given and none can be derived.
pub const DEFAULT_THRESHOLD_FALLBACK: f64 = 3.4;

/// Below this many faces the density estimate is not trusted.
pub const MIN_FACES_FOR_THRESHOLD: usize = 30;

pub fn fai(area: f64, perimeter: f64) -> Result<f64> {
    if !(area > 0.0) || !(perimeter > 0.0) || !area.is_finite() {
        return Err(Error::DegenerateFace { area });
    }
    let iq = 4.0 * PI * area / (perimeter * perimeter);
    Ok((area * iq).log10())
}

pub fn face_artifact_index(face: &FacePolygon) -> Result<f64> {
    fai(face.area, face.perimeter)
}

fn silverman_bandwidth(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mean = sorted.iter().sum::<f64>() / n;
    let var = sorted.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let q = |p: f64| {
        let h = (n - 1.0) * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 {
        var.sqrt().min(iqr / 1.34)
    } else {
        var.sqrt()
    };
    0.9 * spread * n.powf(-0.2)
}

/// Gaussian kernel density at `x`, unnormalised.
fn density(values: &[f64], h: f64, x: f64) -> f64 {
    values
        .iter()
        .map(|v| {
            let z = (x - v) / h;
            (-0.5 * z * z).exp()
        })
        .sum()
}

const GRID: usize = 2048;

/// Location of the density minimum between the two highest density peaks.
pub fn derive_threshold(values: &[f64]) -> Result<f64> {
    if values.len() < MIN_FACES_FOR_THRESHOLD {
        return Err(Error::TooFewFaces(values.len()));
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = silverman_bandwidth(&sorted);
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::NoValley);
    }
    let lo = sorted[0] - 3.0 * h;
    let hi = sorted[sorted.len() - 1] + 3.0 * h;
    let step = (hi - lo) / (GRID - 1) as f64;
    let xs: Vec<f64> = (0..GRID).map(|i| lo + step * i as f64).collect();
    let ds: Vec<f64> = xs.iter().map(|&x| density(&sorted, h, x)).collect();

    // local maxima; plateaus count once at their first sample
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < GRID {
        if ds[i] > ds[i - 1] {
            let mut j = i;
            while j + 1 < GRID && ds[j + 1] == ds[i] {
                j += 1;
            }
            if j + 1 < GRID && ds[j + 1] < ds[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    if peaks.len() < 2 {
        return Err(Error::NoValley);
    }
    peaks.sort_by(|&a, &b| ds[b].total_cmp(&ds[a]).then(a.cmp(&b)));
    let (a, b) = (peaks[0].min(peaks[1]), peaks[0].max(peaks[1]));
    let valley = (a..=b)
        .min_by(|&p, &q| ds[p].total_cmp(&ds[q]))
        .expect("non-empty range");
    Ok(refine_minimum(&sorted, h, xs[valley] - step, xs[valley] + step))
}

/// Golden-section search for the density minimum inside one grid cell pair.
fn refine_minimum(values: &[f64], h: f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if density(values, h, c) <= density(values, h, d) {
            b = d;
        } else {
            a = c;
        }
    }
    (a + b) / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlaggedBy {
    Threshold,
    NeighborPostprocess,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdSource {
    Explicit,
    Derived,
    Fallback,
}

#[derive(Debug, Clone, Serialize)]
pub struct FaceArtifact {
    pub face: FaceId,
    pub fai: f64,
    pub is_artifact: bool,
    pub flagged_by: Option<FlaggedBy>,
    /// Touches an exclusion-mask polygon.
    pub masked: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionParams {
    pub threshold: Option<f64>,
    /// Relative margin above the threshold within which a face touching an
    /// artifact is flagged too.
    pub neighbor_similarity: f64,
    /// Used when the threshold cannot be derived; `None` makes that an error.
    pub threshold_fallback: Option<f64>,
    #[serde(default)]
    pub exclusion_mask: Vec<Region>,
}

impl Default for DetectionParams {
    fn default() -> Self {
        DetectionParams {
            threshold: None,
            neighbor_similarity: 0.1,
            threshold_fallback: Some(DEFAULT_THRESHOLD_FALLBACK),
            exclusion_mask: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Detection {
    pub threshold: f64,
    pub threshold_source: ThresholdSource,
    /// One entry per input face, same order.
    pub faces: Vec<FaceArtifact>,
}

impl Detection {
    pub fn artifact_ids(&self) -> BTreeSet<FaceId> {
        self.faces.iter().filter(|f| f.is_artifact).map(|f| f.face).collect()
    }

    pub fn artifact_count(&self) -> usize {
        self.faces.iter().filter(|f| f.is_artifact).count()
    }
}

/// Resolves the threshold: explicit, derived, or fallback, in that order.
pub fn resolve_threshold(values: &[f64], params: &DetectionParams) -> Result<(f64, ThresholdSource)> {
    if let Some(t) = params.threshold {
        return Ok((t, ThresholdSource::Explicit));
    }
    match derive_threshold(values) {
        Ok(t) => Ok((t, ThresholdSource::Derived)),
        Err(e @ (Error::TooFewFaces(_) | Error::NoValley)) => match params.threshold_fallback {
            Some(t) => {
                log::info!("{e}; using fallback threshold {t}");
                Ok((t, ThresholdSource::Fallback))
            }
            None => Err(e),
        },
        Err(e) => Err(e),
    }
}

/// Flags artifact faces. `faces[i].id` must equal `FaceId(i)`.
pub fn detect_artifacts(faces: &[FacePolygon], params: &DetectionParams) -> Result<Detection> {
    if params.neighbor_similarity < 0.0 {
        return Err(Error::InvalidParameter("neighbor similarity must be >= 0".into()));
    }
    let values = faces.iter().map(face_artifact_index).collect::<Result<Vec<f64>>>()?;
    let (threshold, threshold_source) = resolve_threshold(&values, params)?;

    let masked: Vec<bool> = faces
        .iter()
        .map(|f| params.exclusion_mask.iter().any(|m| f.region.intersects(m)))
        .collect();
    let mut flagged: Vec<Option<FlaggedBy>> = values
        .iter()
        .zip(&masked)
        .map(|(&v, &m)| (!m && v < threshold).then_some(FlaggedBy::Threshold))
        .collect();

    let ceiling = threshold + params.neighbor_similarity * threshold.abs();
    let mut frontier: Vec<usize> = (0..faces.len()).filter(|&i| flagged[i].is_some()).collect();
    while let Some(i) = frontier.pop() {
        for &FaceId(j) in &faces[i].neighbors {
            if flagged[j].is_none() && !masked[j] && values[j] <= ceiling {
                flagged[j] = Some(FlaggedBy::NeighborPostprocess);
                frontier.push(j);
            }
        }
    }

    Ok(Detection {
        threshold,
        threshold_source,
        faces: faces
            .iter()
            .enumerate()
            .map(|(i, f)| FaceArtifact {
                face: f.id,
                fai: values[i],
                is_artifact: flagged[i].is_some(),
                flagged_by: flagged[i],
                masked: masked[i],
            })
            .collect(),
    })
}
