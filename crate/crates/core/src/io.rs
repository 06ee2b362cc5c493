//! CSV and JSON formats shared by the command-line tools.
//!
//! Surface points are CSV rows `face,b0,b1,b2`; vectors are rows `x,y,z`.
//! JSON documents carry `schema` and `version` fields.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::SurfacePoint;
use crate::tracer::GeodesicTrace;
use crate::Vec3;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct PointRow {
    face: usize,
    b0: f64,
    b1: f64,
    b2: f64,
}

#[derive(Serialize, Deserialize)]
struct VectorRow {
    x: f64,
    y: f64,
    z: f64,
}

pub fn read_points_csv<R: Read>(reader: R) -> Result<Vec<SurfacePoint>> {
    csv::Reader::from_reader(reader)
        .deserialize::<PointRow>()
        .map(|r| r.map(|r| SurfacePoint { face: r.face, bary: [r.b0, r.b1, r.b2] }).map_err(Error::from))
        .collect()
}

pub fn write_points_csv<W: Write>(writer: W, points: &[SurfacePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for p in points {
        w.serialize(PointRow { face: p.face, b0: p.bary[0], b1: p.bary[1], b2: p.bary[2] })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_vectors_csv<R: Read>(reader: R) -> Result<Vec<Vec3>> {
    csv::Reader::from_reader(reader)
        .deserialize::<VectorRow>()
        .map(|r| r.map(|r| Vec3::new(r.x, r.y, r.z)).map_err(Error::from))
        .collect()
}

pub fn write_vectors_csv<W: Write>(writer: W, vectors: &[Vec3]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for v in vectors {
        w.serialize(VectorRow { x: v.x, y: v.y, z: v.z })?;
    }
    w.flush()?;
    Ok(())
}

/// JSON envelope `{"schema": ..., "version": ..., <body fields>}`.
#[derive(Debug, Serialize, Deserialize)]
pub struct Document<T> {
    pub schema: String,
    pub version: u32,
    #[serde(flatten)]
    pub body: T,
}

impl<T> Document<T> {
    pub fn new(schema: &str, body: T) -> Self {
        Self { schema: schema.to_string(), version: SCHEMA_VERSION, body }
    }
}

pub fn write_json<W: Write, T: Serialize>(mut writer: W, schema: &str, body: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, &Document::new(schema, body))?;
    writeln!(writer)?;
    Ok(())
}

/// One element of a trace batch: the trace or the reason it failed.
#[derive(Debug, Serialize, Deserialize)]
pub struct TraceRecord {
    pub index: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<GeodesicTrace>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ErrorRecord {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        Self { kind: e.kind().to_string(), message: e.to_string() }
    }
}

pub fn trace_records(results: Vec<Result<GeodesicTrace>>) -> Vec<TraceRecord> {
    results
        .into_iter()
        .enumerate()
        .map(|(index, r)| match r {
            Ok(t) => TraceRecord { index, trace: Some(t), error: None },
            Err(e) => TraceRecord { index, trace: None, error: Some(ErrorRecord::from(&e)) },
        })
        .collect()
}
