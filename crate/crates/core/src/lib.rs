//! Differentiable straightest geodesics on triangle meshes.
//!
//! - [`mesh`]: immutable meshes, surface points, OBJ input/output
//! - [`tracer`]: straightest-geodesic tracing, parallel transport, batches
//! - [`diff`]: Jacobians of the exponential map (extrinsic proxy, geodesic finite differences)
//! - [`oracles`]: sphere/torus closed forms, projection integration, mesh generators
//! - [`opt`]: Riemannian L-BFGS and Lloyd iterations for geodesic centroidal Voronoi tessellation
//! - [`sampling`]: seeded random surface points and exponential-map inputs
//! - [`io`]: CSV and JSON formats
//! - [`eval`]: oracle comparisons, gradient checks, timings, optimiser comparisons

pub mod diff;
pub mod error;
pub mod eval;
pub mod io;
pub mod mesh;
pub mod opt;
pub mod oracles;
pub mod sampling;
pub mod tracer;

pub use error::{Error, Result};
pub use mesh::{Location, Mesh, SurfacePoint, TangentVector};
pub use tracer::{trace, trace_batch, GeodesicTrace, Termination, TraceConfig, TraceRequest};

/// Ambient 3-vector.
pub type Vec3 = nalgebra::Vector3<f64>;
