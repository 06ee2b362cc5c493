use std::collections::VecDeque;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use super::{exp_seeds, Objective, SeedSet};
use crate::error::Result;
use crate::mesh::Mesh;
use crate::Vec3;

/// Product-manifold inner product: sum of per-seed Euclidean dot products.
pub fn inner(a: &[Vec3], b: &[Vec3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn axpy(alpha: f64, x: &[Vec3], y: &[Vec3]) -> Vec<Vec3> {
    x.iter().zip(y).map(|(x, y)| x * alpha + y).collect()
}

/// Per-seed linear maps between tangent spaces of two seed sets.
#[derive(Clone, Debug, PartialEq)]
pub struct Transport {
    pub mats: Vec<Matrix3<f64>>,
}

impl Transport {
    pub fn identity(n: usize) -> Self {
        Self { mats: vec![Matrix3::identity(); n] }
    }

    pub fn apply(&self, v: &[Vec3]) -> Vec<Vec3> {
        self.mats.iter().zip(v).map(|(m, x)| m * x).collect()
    }

    /// Adjoint for the product metric (per-seed transpose).
    pub fn adjoint(&self, v: &[Vec3]) -> Vec<Vec3> {
        self.mats.iter().zip(v).map(|(m, x)| m.transpose() * x).collect()
    }

    /// `next` after `self`.
    pub fn then(&self, next: &Transport) -> Transport {
        Transport { mats: self.mats.iter().zip(&next.mats).map(|(a, b)| b * a).collect() }
    }
}

#[derive(Clone, Debug)]
struct Pair {
    a: Vec<Vec3>,
    b: Vec<Vec3>,
    /// From the previous pair's seeds to this pair's seeds.
    link: Transport,
}

/// Limited L-BFGS memory of step/gradient-difference pairs, each stored in
/// the tangent space where it was formed.
#[derive(Clone, Debug)]
pub struct LbfgsMemory {
    pairs: VecDeque<Pair>,
    /// From the newest pair's seeds to the current seeds, when the latest
    /// pairs were skipped.
    pending: Option<Transport>,
    pub h_diag: f64,
    pub depth: usize,
}

impl LbfgsMemory {
    pub fn new(depth: usize) -> Self {
        Self { pairs: VecDeque::new(), pending: None, h_diag: 1.0, depth }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Stores `(A, B)` formed at the seeds reached through `step`. Pairs
    /// with `<A, B> <= 1e-12 |A| |B|` are skipped; returns whether the pair
    /// was kept.
    pub fn push(&mut self, a: Vec<Vec3>, b: Vec<Vec3>, step: &Transport) -> bool {
        let link = match self.pending.take() {
            Some(p) => p.then(step),
            None => step.clone(),
        };
        let ab = inner(&a, &b);
        let bb = inner(&b, &b);
        if !(ab > 1e-12 * (inner(&a, &a) * bb).sqrt()) {
            self.pending = Some(link);
            return false;
        }
        self.h_diag = ab / bb;
        self.pairs.push_back(Pair { a, b, link });
        if self.pairs.len() > self.depth {
            self.pairs.pop_front();
        }
        true
    }

    pub fn reset(&mut self) {
        self.pairs.clear();
        self.pending = None;
        self.h_diag = 1.0;
    }
}

/// Quasi-Newton direction from `V` using the newest `t` stored pairs.
///
/// Each level applies the two-sided inverse BFGS update of its pair around
/// the recursive call, which runs at the previous seeds after the adjoint
/// transport. `t = 0` gives `H_diag V`.
pub fn desc(v: &[Vec3], t: usize, mem: &LbfgsMemory) -> Vec<Vec3> {
    let t = t.min(mem.len());
    if t == 0 {
        return v.iter().map(|x| x * mem.h_diag).collect();
    }
    let base = mem.len() - t;
    match &mem.pending {
        Some(p) => p.apply(&level(&p.adjoint(v), t, base, mem)),
        None => level(v, t, base, mem),
    }
}

fn level(v: &[Vec3], t: usize, base: usize, mem: &LbfgsMemory) -> Vec<Vec3> {
    if t == 0 {
        return v.iter().map(|x| x * mem.h_diag).collect();
    }
    let pair = &mem.pairs[base + t - 1];
    let (a, b) = (&pair.a, &pair.b);
    let rho = 1.0 / inner(b, a);
    let av = inner(a, v);
    let tilde = axpy(-rho * av, b, v);
    let hat = pair.link.apply(&level(&pair.link.adjoint(&tilde), t - 1, base, mem));
    let bh = inner(b, &hat);
    axpy(rho * av, a, &axpy(-rho * bh, a, &hat))
}

#[derive(Clone, Copy, Debug)]
pub struct LbfgsConfig {
    /// Largest candidate step `eta_0`; the line search also tries `0.1 eta_0` and `0.01 eta_0`.
    pub rate: f64,
    pub depth: usize,
    pub iterations: usize,
    /// Sufficient-decrease constant.
    pub c1: f64,
    /// Curvature constant, only reported.
    pub c2: f64,
    /// Stop when the gradient norm falls below this.
    pub tolerance: f64,
}

impl Default for LbfgsConfig {
    fn default() -> Self {
        Self { rate: 0.5, depth: 8, iterations: 50, c1: 1e-4, c2: 0.9, tolerance: 0.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LbfgsStep {
    pub energy: f64,
    /// Function calls made so far, this iterate included.
    pub calls: usize,
    /// Accepted step (0 for the initial point).
    pub alpha: f64,
    /// Whether the accepted step met the sufficient-decrease condition
    /// (false when the line search fell back to the best decreasing candidate).
    pub armijo: bool,
    /// Curvature condition along the transported direction.
    pub curvature: Option<bool>,
    /// The memory was discarded because the direction was not a descent direction.
    pub memory_reset: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LbfgsStatus {
    Iterations,
    Converged,
    /// No candidate step decreased the objective.
    LineSearchFailed,
}

#[derive(Clone, Debug)]
pub struct LbfgsRun {
    pub seeds: SeedSet,
    pub trajectory: Vec<LbfgsStep>,
    pub status: LbfgsStatus,
}

/// Riemannian L-BFGS over the seeds. `objective` supplies values and
/// gradients; steps follow the product exponential map and memory pairs are
/// carried by the parallel transport along each step.
pub fn mesh_lbfgs(mesh: &Mesh, objective: &dyn Objective, seeds0: &SeedSet, cfg: &LbfgsConfig) -> Result<LbfgsRun> {
    let mut seeds = seeds0.seeds.clone();
    let (mut f, mut g) = objective.evaluate(&seeds)?;
    let mut calls = 1;
    let mut trajectory =
        vec![LbfgsStep { energy: f, calls, alpha: 0.0, armijo: true, curvature: None, memory_reset: false }];
    let mut mem = LbfgsMemory::new(cfg.depth);
    let mut status = LbfgsStatus::Iterations;

    for _ in 0..cfg.iterations {
        if inner(&g, &g).sqrt() <= cfg.tolerance {
            status = LbfgsStatus::Converged;
            break;
        }
        let neg: Vec<Vec3> = g.iter().map(|x| -x).collect();
        let mut v = desc(&neg, mem.len(), &mem);
        let mut slope = inner(&g, &v);
        let mut memory_reset = false;
        if !(slope < 0.0) {
            mem.reset();
            v = neg;
            slope = inner(&g, &v);
            memory_reset = true;
        }

        let mut accepted = None;
        let mut fallback: Option<(f64, Vec<_>, Transport, f64, Vec<Vec3>)> = None;
        for k in 0..3 {
            let alpha = cfg.rate * 0.1f64.powi(k);
            let step: Vec<Vec3> = v.iter().map(|x| x * alpha).collect();
            let (next, transport) = exp_seeds(mesh, &seeds, &step)?;
            let (f_next, g_next) = objective.evaluate(&next)?;
            calls += 1;
            if f_next <= f + cfg.c1 * alpha * slope {
                accepted = Some((alpha, next, transport, f_next, g_next));
                break;
            }
            if f_next < f && fallback.as_ref().map_or(true, |b| f_next < b.3) {
                fallback = Some((alpha, next, transport, f_next, g_next));
            }
        }
        let armijo = accepted.is_some();
        let Some((alpha, next, transport, f_next, g_next)) = accepted.or(fallback) else {
            status = LbfgsStatus::LineSearchFailed;
            break;
        };

        let moved = transport.apply(&v);
        let curvature = Some(inner(&g_next, &moved) >= cfg.c2 * slope);
        let a: Vec<Vec3> = moved.iter().map(|x| x * alpha).collect();
        let b = axpy(-1.0, &transport.apply(&g), &g_next);
        mem.push(a, b, &transport);

        seeds = next;
        f = f_next;
        g = g_next;
        trajectory.push(LbfgsStep { energy: f, calls, alpha, armijo, curvature, memory_reset });
    }
    Ok(LbfgsRun { seeds: SeedSet { seeds }, trajectory, status })
}
