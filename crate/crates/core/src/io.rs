//! GeoJSON reading and writing.
//!
//! Networks are FeatureCollections of LineString features. Edge status is
//! carried in the `_status` property; all other properties form the
//! attribute bag. Output is deterministic: features in edge id order,
//! attribute keys sorted, shortest round-trip float formatting.

use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::geom::{Coord, Region};
use crate::network::{build_network, EdgeId, EdgeRecord, EdgeStatus, Network, DEFAULT_SNAP_EPSILON};

pub const STATUS_PROPERTY: &str = "_status";

/// CRS names treated as geographic (degrees).
const GEOGRAPHIC_CRS: &[&str] = &[
    "4326", "4258", "4269", "4267", "4230", "4283", "crs84", "crs83", "crs27",
];

pub fn is_geographic_crs(name: &str) -> bool {
    let lower = name.to_ascii_lowercase();
    let code = lower.rsplit([':', '/']).next().unwrap_or("");
    GEOGRAPHIC_CRS.contains(&code)
}

fn bad(msg: impl Into<String>) -> Error {
    Error::GeoJson(msg.into())
}

fn coord(v: &Value) -> Result<Coord> {
    let arr = v.as_array().ok_or_else(|| bad("position is not an array"))?;
    if arr.len() < 2 {
        return Err(bad("position needs two numbers"));
    }
    let x = arr[0].as_f64().ok_or_else(|| bad("non-numeric x"))?;
    let y = arr[1].as_f64().ok_or_else(|| bad("non-numeric y"))?;
    Ok(Coord::new(x, y))
}

fn line(v: &Value) -> Result<Vec<Coord>> {
    v.as_array()
        .ok_or_else(|| bad("coordinates are not an array"))?
        .iter()
        .map(coord)
        .collect()
}

fn features(doc: &Value) -> Result<&Vec<Value>> {
    match doc.get("type").and_then(Value::as_str) {
        Some("FeatureCollection") => doc
            .get("features")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("FeatureCollection without a features array")),
        Some(t) => Err(bad(format!("expected a FeatureCollection, found {t}"))),
        None => Err(bad("missing type member")),
    }
}

/// CRS name from the (legacy) `crs` member, if any.
fn crs_name(doc: &Value) -> Option<String> {
    doc.get("crs")?
        .get("properties")?
        .get("name")?
        .as_str()
        .map(str::to_owned)
}

/// Parsed line features and the declared CRS.
#[derive(Debug, Clone, PartialEq)]
pub struct LineCollection {
    pub records: Vec<EdgeRecord>,
    pub crs: Option<String>,
}

pub fn parse_lines(text: &str) -> Result<LineCollection> {
    let doc: Value = serde_json::from_str(text)?;
    let feats = features(&doc)?;
    let mut records = Vec::with_capacity(feats.len());
    let mut pending = Vec::new();
    for (i, f) in feats.iter().enumerate() {
        let geom = f
            .get("geometry")
            .ok_or_else(|| bad(format!("feature {i} has no geometry")))?;
        let kind = geom.get("type").and_then(Value::as_str).unwrap_or("null");
        let coords = geom.get("coordinates").unwrap_or(&Value::Null);
        let parts = match kind {
            "LineString" => vec![line(coords)?],
            "MultiLineString" => coords
                .as_array()
                .ok_or_else(|| bad("coordinates are not an array"))?
                .iter()
                .map(line)
                .collect::<Result<Vec<_>>>()?,
            other => return Err(bad(format!("feature {i}: expected LineString, found {other}"))),
        };
        let mut attributes = match f.get("properties") {
            Some(Value::Object(m)) => m.clone(),
            Some(Value::Null) | None => Map::new(),
            Some(_) => return Err(bad(format!("feature {i}: properties is not an object"))),
        };
        let status = match attributes.remove(STATUS_PROPERTY) {
            None => EdgeStatus::Original,
            Some(v) => serde_json::from_value(v).map_err(|e| bad(format!("feature {i}: {e}")))?,
        };
        let id = f.get("id").and_then(Value::as_u64);
        let single = parts.len() == 1;
        for geometry in parts {
            let rec = EdgeRecord {
                id: EdgeId(0),
                geometry,
                status,
                attributes: attributes.clone(),
            };
            match id {
                Some(id) if single => {
                    records.push(EdgeRecord { id: EdgeId(id), ..rec });
                }
                _ => pending.push((records.len() + pending.len(), rec)),
            }
        }
    }
    let mut used: std::collections::HashSet<u64> = std::collections::HashSet::new();
    for r in &records {
        if !used.insert(r.id.0) {
            return Err(bad(format!("duplicate feature id {}", r.id.0)));
        }
    }
    // features without a usable id get fresh ids after the largest one
    let next = records.iter().map(|r| r.id.0 + 1).max().unwrap_or(0);
    for ((pos, mut rec), id) in pending.into_iter().zip(next..) {
        rec.id = EdgeId(id);
        records.insert(pos, rec);
    }
    Ok(LineCollection {
        records,
        crs: crs_name(&doc),
    })
}

/// Parses and validates a network: rejects geographic CRS declarations and
/// degree-valued coordinates.
pub fn network_from_geojson(text: &str) -> Result<Network> {
    let lc = parse_lines(text)?;
    if lc.crs.as_deref().is_some_and(is_geographic_crs) {
        return Err(Error::GeographicCrs);
    }
    Ok(build_network(lc.records, DEFAULT_SNAP_EPSILON)?.with_crs(lc.crs))
}

pub fn read_network(path: impl AsRef<Path>) -> Result<Network> {
    network_from_geojson(&fs::read_to_string(path)?)
}

fn position(c: Coord) -> Value {
    json!([c.x, c.y])
}

/// One feature per line; members in a fixed order.
fn collection(features: Vec<Value>, crs: Option<&str>) -> Result<String> {
    let mut s = String::from("{\"type\":\"FeatureCollection\",");
    if let Some(name) = crs {
        let member = json!({"type": "name", "properties": {"name": name}});
        s.push_str(&format!("\"crs\":{},", serde_json::to_string(&member)?));
    }
    s.push_str("\"features\":[");
    for (i, f) in features.iter().enumerate() {
        s.push_str(if i == 0 { "\n" } else { ",\n" });
        s.push_str(&serde_json::to_string(f)?);
    }
    s.push_str("\n]}\n");
    Ok(s)
}

pub fn records_to_geojson(records: &[EdgeRecord], crs: Option<&str>) -> Result<String> {
    let mut sorted: Vec<&EdgeRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.id);
    let features = sorted
        .into_iter()
        .map(|r| {
            let mut props = r.attributes.clone();
            props.insert(STATUS_PROPERTY.into(), json!(r.status.as_str()));
            json!({
                "type": "Feature",
                "id": r.id.0,
                "geometry": {
                    "type": "LineString",
                    "coordinates": r.geometry.iter().map(|&c| position(c)).collect::<Vec<_>>(),
                },
                "properties": props,
            })
        })
        .collect();
    collection(features, crs)
}

pub fn network_to_geojson(net: &Network) -> Result<String> {
    records_to_geojson(&net.records(), net.crs())
}

pub fn write_network(net: &Network, path: impl AsRef<Path>) -> Result<()> {
    Ok(fs::write(path, network_to_geojson(net)?)?)
}

fn polygon(rings: &Value) -> Result<Region> {
    let rings = rings
        .as_array()
        .ok_or_else(|| bad("polygon rings are not an array"))?
        .iter()
        .map(line)
        .collect::<Result<Vec<_>>>()?;
    Ok(Region::new(rings))
}

/// Polygon and MultiPolygon features as regions (one per polygon).
pub fn parse_regions(text: &str) -> Result<Vec<Region>> {
    let doc: Value = serde_json::from_str(text)?;
    if crs_name(&doc).as_deref().is_some_and(is_geographic_crs) {
        return Err(Error::GeographicCrs);
    }
    let mut out = Vec::new();
    for (i, f) in features(&doc)?.iter().enumerate() {
        let geom = f.get("geometry").unwrap_or(&Value::Null);
        let coords = geom.get("coordinates").unwrap_or(&Value::Null);
        match geom.get("type").and_then(Value::as_str) {
            Some("Polygon") => out.push(polygon(coords)?),
            Some("MultiPolygon") => {
                for p in coords.as_array().ok_or_else(|| bad("coordinates are not an array"))? {
                    out.push(polygon(p)?);
                }
            }
            other => {
                return Err(bad(format!(
                    "mask feature {i}: expected Polygon, found {}",
                    other.unwrap_or("null")
                )))
            }
        }
    }
    Ok(out)
}

pub fn read_regions(path: impl AsRef<Path>) -> Result<Vec<Region>> {
    parse_regions(&fs::read_to_string(path)?)
}

/// Regions as Polygon features with the given properties.
pub fn regions_to_geojson(regions: &[(Region, Map<String, Value>)], crs: Option<&str>) -> Result<String> {
    let features = regions
        .iter()
        .map(|(r, props)| {
            let rings: Vec<Vec<Value>> = r
                .rings
                .iter()
                .map(|ring| ring.iter().map(|&c| position(c)).collect())
                .collect();
            json!({
                "type": "Feature",
                "geometry": {"type": "Polygon", "coordinates": rings},
                "properties": props,
            })
        })
        .collect();
    collection(features, crs)
}
