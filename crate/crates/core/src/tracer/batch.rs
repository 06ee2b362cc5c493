use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::{trace_with_payload, GeodesicTrace, TraceConfig};
use crate::error::Result;
use crate::mesh::{Mesh, SurfacePoint};
use crate::Vec3;

/// One element of a batch: start point, initial vector, optional payload.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRequest {
    pub start: SurfacePoint,
    pub dir: Vec3,
    pub payload: Option<Vec3>,
}

impl TraceRequest {
    pub fn new(start: SurfacePoint, dir: Vec3) -> Self {
        Self { start, dir, payload: None }
    }

    pub fn with_payload(start: SurfacePoint, dir: Vec3, payload: Vec3) -> Self {
        Self { start, dir, payload: Some(payload) }
    }
}

/// Resolves the worker count: explicit value, else `DIGEO_WORKERS`, else all cores.
pub fn worker_count(requested: Option<usize>) -> usize {
    let max = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
    requested
        .or_else(|| std::env::var("DIGEO_WORKERS").ok().and_then(|s| s.trim().parse().ok()))
        .filter(|&n| n > 0)
        .unwrap_or(max)
}

fn pool(workers: usize) -> Arc<rayon::ThreadPool> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS.get_or_init(Default::default).lock().unwrap();
    pools
        .entry(workers)
        .or_insert_with(|| {
            Arc::new(rayon::ThreadPoolBuilder::new().num_threads(workers).build().expect("thread pool"))
        })
        .clone()
}

/// Traces every request independently over the shared mesh.
///
/// Each geodesic is one task; results are stored at their request index and
/// do not depend on the number of workers. A failing element does not affect
/// the others.
pub fn trace_batch(
    mesh: &Mesh,
    requests: &[TraceRequest],
    cfg: &TraceConfig,
    workers: Option<usize>,
) -> Vec<Result<GeodesicTrace>> {
    let n = worker_count(workers);
    let run = |r: &TraceRequest| trace_with_payload(mesh, &r.start, &r.dir, r.payload.or(cfg.transport_payload), cfg);
    if n == 1 {
        return requests.iter().map(run).collect();
    }
    pool(n).install(|| requests.par_iter().map(run).collect())
}

/// Traces requests addressed to several meshes in one batch.
///
/// The meshes are merged with offset face indices; each request gives its
/// mesh index and a point local to that mesh. Returned points are local again.
pub fn trace_batch_merged(
    meshes: &[&Mesh],
    requests: &[(usize, TraceRequest)],
    cfg: &TraceConfig,
    workers: Option<usize>,
) -> Result<Vec<Result<GeodesicTrace>>> {
    let (merged, offsets) = Mesh::merge(meshes)?;
    let shifted: Vec<TraceRequest> = requests
        .iter()
        .map(|(m, r)| TraceRequest { start: SurfacePoint::new(r.start.face + offsets[*m], r.start.bary), ..*r })
        .collect();
    let out = trace_batch(&merged, &shifted, cfg, workers);
    Ok(out
        .into_iter()
        .zip(requests)
        .map(|(res, (m, _))| {
            res.map(|mut t| {
                let off = offsets[*m];
                t.final_point.face -= off;
                for p in t.points.iter_mut() {
                    p.face -= off;
                }
                t
            })
        })
        .collect())
}
