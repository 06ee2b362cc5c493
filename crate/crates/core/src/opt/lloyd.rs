use super::{exp_seeds, Objective, SeedSet};
use crate::error::Result;
use crate::mesh::Mesh;

#[derive(Clone, Copy, Debug)]
pub struct LloydConfig {
    /// Step scale applied to the Karcher direction.
    pub rate: f64,
    pub iterations: usize,
}

impl Default for LloydConfig {
    fn default() -> Self {
        Self { rate: 1.0, iterations: 50 }
    }
}

/// One Lloyd update `s_i <- Exp_{s_i}(rate v_i)`; returns the new seeds and
/// the energy of the input seeds (one function call).
pub fn lloyd_step(mesh: &Mesh, objective: &dyn Objective, seeds: &SeedSet, rate: f64) -> Result<(SeedSet, f64)> {
    let (f, grad) = objective.evaluate(&seeds.seeds)?;
    let steps: Vec<_> = grad.iter().map(|g| -g * rate).collect();
    let (next, _) = exp_seeds(mesh, &seeds.seeds, &steps)?;
    Ok((SeedSet { seeds: next }, f))
}

/// Runs Lloyd iterations and returns the final seeds together with the
/// energy after each step (entry 0 is the initial energy). Entry `k` costs
/// `k + 1` function calls.
pub fn lloyd(mesh: &Mesh, objective: &dyn Objective, seeds0: &SeedSet, cfg: &LloydConfig) -> Result<(SeedSet, Vec<f64>)> {
    let mut seeds = seeds0.clone();
    let mut energies = Vec::with_capacity(cfg.iterations + 1);
    for _ in 0..cfg.iterations {
        let (next, f) = lloyd_step(mesh, objective, &seeds, cfg.rate)?;
        energies.push(f);
        seeds = next;
    }
    energies.push(objective.evaluate(&seeds.seeds)?.0);
    Ok((seeds, energies))
}
