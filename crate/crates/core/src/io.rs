//! File formats: annotation and prediction JSON, and the little-endian
//! binary containers for feature sequences (`LFSQ`) and depth maps (`LDPM`).
//!
//! Binary layout of both containers: 4-byte magic, two `u32` dimensions,
//! then `f32` values. `LFSQ` stores `N` columns of `D` channels, column after
//! column; `LDPM` stores an `H × W` map row after row.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::avg::FeatureSequence;
use crate::error::{Error, Result};
use crate::geometry::{DepthSequence, HeightSequence, LayoutAnnotation, PoseLabel};
use crate::metrics::DepthMap;
use crate::polygon::Vec2;

pub const LFSQ_MAGIC: [u8; 4] = *b"LFSQ";
pub const LDPM_MAGIC: [u8; 4] = *b"LDPM";

const ANNOTATION_KEYS: [&str; 5] = ["id", "vertices", "camera_height", "ceiling_height", "pose"];
const PREDICTION_KEYS: [&str; 3] = ["id", "depths", "heights"];

#[derive(Deserialize)]
struct RawAnnotation {
    id: String,
    vertices: Vec<Vec2>,
    camera_height: f64,
    ceiling_height: f64,
    pose: PoseLabel,
}

/// Predicted boundary of one room: horizon depths and heights on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutPrediction {
    pub id: String,
    pub depths: Vec<f64>,
    pub heights: Vec<f64>,
}

impl LayoutPrediction {
    pub fn new(id: impl Into<String>, depths: &DepthSequence, heights: &HeightSequence) -> Self {
        Self {
            id: id.into(),
            depths: depths.values().to_vec(),
            heights: heights.values().to_vec(),
        }
    }

    /// Validated sequences; both must have the same positive length.
    pub fn sequences(&self) -> Result<(DepthSequence, HeightSequence)> {
        if self.depths.len() != self.heights.len() {
            return Err(Error::Parse(format!(
                "{}: {} depths but {} heights",
                self.id,
                self.depths.len(),
                self.heights.len()
            )));
        }
        let wrap = |e: Error| Error::Parse(format!("{}: {e}", self.id));
        Ok((
            DepthSequence::new(self.depths.clone()).map_err(wrap)?,
            HeightSequence::new(self.heights.clone()).map_err(wrap)?,
        ))
    }
}

/// A parsed document plus the unknown top-level keys that were ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct Parsed<T> {
    pub value: T,
    pub unknown_keys: Vec<String>,
}

fn split_known(text: &str, known: &[&str], strict: bool) -> Result<(Value, Vec<String>)> {
    let mut value: Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let map = value
        .as_object_mut()
        .ok_or_else(|| Error::Parse("top-level JSON value must be an object".into()))?;
    let unknown: Vec<String> = map.keys().filter(|k| !known.contains(&k.as_str())).cloned().collect();
    if strict && !unknown.is_empty() {
        return Err(Error::Parse(format!("unknown keys: {}", unknown.join(", "))));
    }
    for k in &unknown {
        map.remove(k);
    }
    Ok((value, unknown))
}

/// Parses an annotation document. With `strict`, unknown keys are an error;
/// otherwise they are dropped and reported.
pub fn parse_annotation(text: &str, strict: bool) -> Result<Parsed<LayoutAnnotation>> {
    let (value, unknown_keys) = split_known(text, &ANNOTATION_KEYS, strict)?;
    let raw: RawAnnotation = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    let value = LayoutAnnotation::new(raw.id, raw.vertices, raw.camera_height, raw.ceiling_height, raw.pose)?;
    Ok(Parsed { value, unknown_keys })
}

pub fn parse_prediction(text: &str, strict: bool) -> Result<Parsed<LayoutPrediction>> {
    let (value, unknown_keys) = split_known(text, &PREDICTION_KEYS, strict)?;
    let value: LayoutPrediction = serde_json::from_value(value).map_err(|e| Error::Parse(e.to_string()))?;
    value.sequences()?;
    Ok(Parsed { value, unknown_keys })
}

pub fn annotation_to_json(layout: &LayoutAnnotation) -> String {
    serde_json::to_string_pretty(layout).expect("annotation serializes")
}

pub fn prediction_to_json(pred: &LayoutPrediction) -> String {
    serde_json::to_string_pretty(pred).expect("prediction serializes")
}

pub fn read_annotation(path: &Path, strict: bool) -> Result<Parsed<LayoutAnnotation>> {
    let text = std::fs::read_to_string(path)?;
    parse_annotation(&text, strict).map_err(|e| with_path(path, e))
}

pub fn read_prediction(path: &Path, strict: bool) -> Result<Parsed<LayoutPrediction>> {
    let text = std::fs::read_to_string(path)?;
    parse_prediction(&text, strict).map_err(|e| with_path(path, e))
}

fn with_path(path: &Path, e: Error) -> Error {
    let p = path.display();
    match e {
        Error::Parse(m) => Error::Parse(format!("{p}: {m}")),
        Error::InconsistentAnnotation(m) => Error::InconsistentAnnotation(format!("{p}: {m}")),
        Error::Format(m) => Error::Format(format!("{p}: {m}")),
        other => other,
    }
}

fn write_header<W: Write>(w: &mut W, magic: [u8; 4], a: usize, b: usize) -> Result<()> {
    let dim = |x: usize| u32::try_from(x).map_err(|_| Error::Format(format!("dimension {x} exceeds u32")));
    w.write_all(&magic)?;
    w.write_all(&dim(a)?.to_le_bytes())?;
    w.write_all(&dim(b)?.to_le_bytes())?;
    Ok(())
}

fn write_f32s<W: Write>(w: &mut W, values: &[f64]) -> Result<()> {
    let mut buf = Vec::with_capacity(values.len() * 4);
    for v in values {
        buf.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Reads magic, both dimensions and `a·b` values, rejecting trailing bytes.
fn read_container<R: Read>(r: &mut R, magic: [u8; 4]) -> Result<(usize, usize, Vec<f64>)> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let name = String::from_utf8_lossy(&magic).into_owned();
    if bytes.len() < 12 {
        return Err(Error::Format(format!(
            "{name}: truncated header ({} bytes)",
            bytes.len()
        )));
    }
    if bytes[..4] != magic {
        return Err(Error::Format(format!(
            "expected magic {name}, found {:?}",
            String::from_utf8_lossy(&bytes[..4])
        )));
    }
    let a = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let b = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let expected = a
        .checked_mul(b)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| Error::Format(format!("{name}: dimensions {a}x{b} overflow")))?;
    let body = &bytes[12..];
    if body.len() != expected {
        return Err(Error::Format(format!(
            "{name}: {a}x{b} payload needs {expected} bytes, found {}",
            body.len()
        )));
    }
    let values = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64)
        .collect();
    Ok((a, b, values))
}

pub fn write_lfsq<W: Write>(w: &mut W, features: &FeatureSequence) -> Result<()> {
    write_header(w, LFSQ_MAGIC, features.columns(), features.channels())?;
    write_f32s(w, features.data())
}

pub fn read_lfsq<R: Read>(r: &mut R) -> Result<FeatureSequence> {
    let (n, d, values) = read_container(r, LFSQ_MAGIC)?;
    FeatureSequence::new(n, d, values).map_err(|e| Error::Format(format!("LFSQ: {e}")))
}

pub fn write_ldpm<W: Write>(w: &mut W, map: &DepthMap) -> Result<()> {
    write_header(w, LDPM_MAGIC, map.height(), map.width())?;
    write_f32s(w, map.values())
}

pub fn read_ldpm<R: Read>(r: &mut R) -> Result<DepthMap> {
    let (h, w, values) = read_container(r, LDPM_MAGIC)?;
    DepthMap::new(h, w, values).map_err(|e| Error::Format(format!("LDPM: {e}")))
}

pub fn read_lfsq_file(path: &Path) -> Result<FeatureSequence> {
    read_lfsq(&mut std::fs::File::open(path)?).map_err(|e| with_path(path, e))
}

pub fn write_lfsq_file(path: &Path, features: &FeatureSequence) -> Result<()> {
    let mut buf = Vec::new();
    write_lfsq(&mut buf, features)?;
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn read_ldpm_file(path: &Path) -> Result<DepthMap> {
    read_ldpm(&mut std::fs::File::open(path)?).map_err(|e| with_path(path, e))
}

pub fn write_ldpm_file(path: &Path, map: &DepthMap) -> Result<()> {
    let mut buf = Vec::new();
    write_ldpm(&mut buf, map)?;
    std::fs::write(path, buf)?;
    Ok(())
}
