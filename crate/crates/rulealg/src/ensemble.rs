//! Parallel SSA ensembles with order-independent results.
//!
//! Each run draws from its own ChaCha stream `(seed, run)`, and the
//! statistics are accumulated in run order after the parallel phase, so the
//! output does not depend on the number of worker threads.

use rayon::prelude::*;
use rulealg_core::model::ModelSpec;
use rulealg_core::ssa::{Simulator, SsaConfig, Trajectory};
use rulealg_core::{Graph, ModelError};

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleConfig {
    pub runs: u64,
    pub seed: u64,
    pub t_max: f64,
    pub grid: Vec<f64>,
    /// Full trajectories kept for the first `keep` runs.
    pub keep: u64,
    pub record_events: bool,
    pub audit: bool,
}

/// Per grid point and observable: mean, sample variance and standard error.
#[derive(Clone, Debug, PartialEq)]
pub struct Ensemble {
    pub names: Vec<String>,
    pub grid: Vec<f64>,
    pub runs: u64,
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
    pub se: Vec<Vec<f64>>,
    pub kept: Vec<Trajectory>,
}

/// `0, step, 2·step, …` up to and including `t_max` (with a tolerance of
/// a millionth of a step).
pub fn uniform_grid(t_max: f64, step: f64) -> Vec<f64> {
    let n = (t_max / step + 1e-6).floor() as usize;
    (0..=n).map(|k| k as f64 * step).collect()
}

pub fn run_ensemble(model: &ModelSpec, x0: &Graph, cfg: &EnsembleConfig) -> Result<Ensemble, ModelError> {
    let sim = Simulator::new(model)?;
    let ssa = SsaConfig { t_max: cfg.t_max, grid: cfg.grid.clone(), record_events: cfg.record_events, audit: cfg.audit };
    let results: Vec<(Vec<Vec<f64>>, Option<Trajectory>)> = (0..cfg.runs)
        .into_par_iter()
        .map(|run| {
            let mut t = sim.run(x0, &ssa, cfg.seed, run)?;
            let samples = std::mem::take(&mut t.samples);
            let kept = (run < cfg.keep).then(|| Trajectory { samples: samples.clone(), ..t });
            Ok((samples, kept))
        })
        .collect::<Result<_, ModelError>>()?;

    let names: Vec<String> = model.observables.iter().map(|o| o.name.clone()).collect();
    let grid: Vec<f64> = cfg.grid.iter().copied().filter(|&t| t <= cfg.t_max).collect();
    let (k, m) = (grid.len(), names.len());
    let mut sum = vec![vec![0.0; m]; k];
    for (samples, _) in &results {
        for (row, s) in sum.iter_mut().zip(samples) {
            for (acc, x) in row.iter_mut().zip(s) {
                *acc += x;
            }
        }
    }
    let n = results.len() as f64;
    let mean: Vec<Vec<f64>> = sum.iter().map(|row| row.iter().map(|s| s / n).collect()).collect();
    // two-pass variance for accuracy
    let mut sq = vec![vec![0.0; m]; k];
    for (samples, _) in &results {
        for ((row, s), mu) in sq.iter_mut().zip(samples).zip(&mean) {
            for ((acc, x), mu) in row.iter_mut().zip(s).zip(mu) {
                *acc += (x - mu) * (x - mu);
            }
        }
    }
    let var: Vec<Vec<f64>> = sq.iter().map(|row| row.iter().map(|s| if n > 1.0 { s / (n - 1.0) } else { f64::NAN }).collect()).collect();
    let se = var.iter().map(|row| row.iter().map(|v| (v / n).sqrt()).collect()).collect();
    let kept = results.into_iter().filter_map(|(_, t)| t).collect();
    Ok(Ensemble { names, grid, runs: cfg.runs, mean, var, se, kept })
}

impl Ensemble {
    /// `t`, the means, then `_se` and `_var` columns, observables in
    /// declaration order.
    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string()];
        h.extend(self.names.iter().cloned());
        h.extend(self.names.iter().map(|n| format!("{}_se", n)));
        h.extend(self.names.iter().map(|n| format!("{}_var", n)));
        h
    }

    /// Empty when there were no runs.
    pub fn rows(&self) -> Vec<Vec<String>> {
        if self.runs == 0 {
            return Vec::new();
        }
        (0..self.grid.len())
            .map(|k| {
                let mut row = vec![crate::io::float(self.grid[k])];
                for block in [&self.mean, &self.se, &self.var] {
                    row.extend(block[k].iter().map(|&x| crate::io::float(x)));
                }
                row
            })
            .collect()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Index of the grid point closest to `t`.
    pub fn at(&self, t: f64) -> usize {
        let mut best = 0;
        for (k, &g) in self.grid.iter().enumerate() {
            if (g - t).abs() < (self.grid[best] - t).abs() {
                best = k;
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_the_end_point() {
        assert_eq!(uniform_grid(1.0, 0.25), vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        assert_eq!(uniform_grid(1.0, 0.1).len(), 11);
        assert_eq!(uniform_grid(0.0, 0.1), vec![0.0]);
    }
}
