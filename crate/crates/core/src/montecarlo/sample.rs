use std::path::Path;

use serde::Serialize;

use crate::error::{LabError, Result};
use crate::output::{write_csv, write_json};
use crate::rng::SeedStream;

/// Parameters shared by every simulator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimConfig {
    pub n: u64,
    pub reps: usize,
    pub seed: SeedStream,
    /// Small-jump cutoff `ε` for the compound-Poisson limit simulator.
    pub cutoff: f64,
}

impl SimConfig {
    pub fn new(n: u64, reps: usize, seed: SeedStream) -> Self {
        Self {
            n,
            reps,
            seed,
            cutoff: 1e-4,
        }
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(LabError::param("n", "must be at least 1"));
        }
        if self.reps == 0 {
            return Err(LabError::param("reps", "must be at least 1"));
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(LabError::param(
                "cutoff",
                format!("{} not in (0,1)", self.cutoff),
            ));
        }
        Ok(())
    }
}

/// Sorted Monte Carlo draws of one statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    pub n_meta: Option<u64>,
    pub law_meta: String,
}

impl EmpiricalSample {
    pub fn new(mut values: Vec<f64>, n_meta: Option<u64>, law_meta: impl Into<String>) -> Self {
        values.sort_by(f64::total_cmp);
        Self {
            values,
            n_meta,
            law_meta: law_meta.into(),
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Fraction of draws `≤ x`.
    pub fn ecdf(&self, x: f64) -> f64 {
        if self.values.is_empty() {
            return 0.0;
        }
        self.values.partition_point(|&v| v <= x) as f64 / self.values.len() as f64
    }

    /// Lower empirical quantile: smallest draw whose ECDF is `≥ p`.
    pub fn quantile(&self, p: f64) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return f64::NAN;
        }
        let k = ((p * n as f64).ceil() as usize).clamp(1, n);
        self.values[k - 1]
    }

    pub fn median(&self) -> f64 {
        let n = self.values.len();
        if n == 0 {
            return f64::NAN;
        }
        if n % 2 == 1 {
            self.values[n / 2]
        } else {
            0.5 * (self.values[n / 2 - 1] + self.values[n / 2])
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn variance(&self) -> f64 {
        let n = self.values.len() as f64;
        let m = self.mean();
        self.values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0)
    }

    /// Write `value` rows plus a `.json` sidecar carrying `meta`.
    pub fn write_csv<M: Serialize>(
        &self,
        path: &Path,
        comments: &[String],
        meta: &M,
    ) -> Result<()> {
        write_csv(path, comments, &["value"], &[&self.values])?;
        write_json(&path.with_extension("json"), meta)
    }
}

/// Aligned draws of `(W₁, W₂)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairSample {
    pub w1: Vec<f64>,
    pub w2: Vec<f64>,
    pub n_meta: Option<u64>,
    pub law_meta: String,
    /// Upper bound on the mean of the discarded small jumps in `(W₁, W₂)`.
    pub truncation_bias: Option<[f64; 2]>,
}

impl PairSample {
    pub fn len(&self) -> usize {
        self.w1.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w1.is_empty()
    }

    /// `W₁/W₂` per draw, `0/0 := 0`.
    pub fn ratio(&self) -> EmpiricalSample {
        let r = self
            .w1
            .iter()
            .zip(&self.w2)
            .map(|(&a, &b)| if b == 0.0 && a == 0.0 { 0.0 } else { a / b })
            .collect();
        EmpiricalSample::new(r, self.n_meta, self.law_meta.clone())
    }

    pub fn w2_sample(&self) -> EmpiricalSample {
        EmpiricalSample::new(self.w2.clone(), self.n_meta, self.law_meta.clone())
    }

    pub fn w1_sample(&self) -> EmpiricalSample {
        EmpiricalSample::new(self.w1.clone(), self.n_meta, self.law_meta.clone())
    }

    pub fn write_csv<M: Serialize>(
        &self,
        path: &Path,
        comments: &[String],
        meta: &M,
    ) -> Result<()> {
        write_csv(path, comments, &["w1", "w2"], &[&self.w1, &self.w2])?;
        write_json(&path.with_extension("json"), meta)
    }
}
