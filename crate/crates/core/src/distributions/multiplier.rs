use rand::Rng;
use rand_distr::{Distribution, Exp1, Open01};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::rng::SeedStream;
use crate::special::exp_over_square_integral;

/// Built-in laws for the non-negative multipliers `Y_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MultiplierKind {
    /// `P{Y > y} = min(1, y^{-beta})`.
    Pareto {
        beta: f64,
    },
    /// `P{Y > y} = min(1, 1/ln y)`.
    SlowlyVarying,
    Exponential {
        rate: f64,
    },
    Uniform01,
}

/// Finite-mean laws accepted by [`make_finite_mean_multiplier`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FiniteMeanKind {
    Exponential { rate: f64 },
    Uniform01,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailClass {
    Pareto { beta: f64 },
    SlowlyVarying,
    FiniteMean,
}

/// The law `G` of the multipliers, optionally rescaled to `c·Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierLaw {
    kind: MultiplierKind,
    scale: f64,
}

pub fn make_pareto_multiplier(beta: f64) -> Result<MultiplierLaw> {
    if !(beta > 0.0 && beta < 2.0) {
        return Err(LabError::param("beta", format!("{beta} not in (0,2)")));
    }
    Ok(MultiplierLaw {
        kind: MultiplierKind::Pareto { beta },
        scale: 1.0,
    })
}

pub fn make_slowly_varying_multiplier() -> MultiplierLaw {
    MultiplierLaw {
        kind: MultiplierKind::SlowlyVarying,
        scale: 1.0,
    }
}

pub fn make_finite_mean_multiplier(kind: FiniteMeanKind) -> Result<MultiplierLaw> {
    let kind = match kind {
        FiniteMeanKind::Exponential { rate } => {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(LabError::param("rate", format!("{rate} must be positive")));
            }
            MultiplierKind::Exponential { rate }
        }
        FiniteMeanKind::Uniform01 => MultiplierKind::Uniform01,
    };
    Ok(MultiplierLaw { kind, scale: 1.0 })
}

impl MultiplierLaw {
    /// Build from a kind, validating parameters.
    pub fn from_kind(kind: MultiplierKind) -> Result<Self> {
        match kind {
            MultiplierKind::Pareto { beta } => make_pareto_multiplier(beta),
            MultiplierKind::SlowlyVarying => Ok(make_slowly_varying_multiplier()),
            MultiplierKind::Exponential { rate } => {
                make_finite_mean_multiplier(FiniteMeanKind::Exponential { rate })
            }
            MultiplierKind::Uniform01 => make_finite_mean_multiplier(FiniteMeanKind::Uniform01),
        }
    }

    /// Law of `c·Y`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c > 0.0 && c.is_finite()) {
            return Err(LabError::param("scale", format!("{c} must be positive")));
        }
        Ok(Self {
            kind: self.kind,
            scale: self.scale * c,
        })
    }

    pub fn kind(&self) -> MultiplierKind {
        self.kind
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn name(&self) -> String {
        let base = match self.kind {
            MultiplierKind::Pareto { beta } => format!("pareto({beta})"),
            MultiplierKind::SlowlyVarying => "slowly_varying".to_string(),
            MultiplierKind::Exponential { rate } => format!("exponential({rate})"),
            MultiplierKind::Uniform01 => "uniform01".to_string(),
        };
        if self.scale == 1.0 {
            base
        } else {
            format!("{}*{base}", self.scale)
        }
    }

    pub fn tail_class(&self) -> TailClass {
        match self.kind {
            MultiplierKind::Pareto { beta } => TailClass::Pareto { beta },
            MultiplierKind::SlowlyVarying => TailClass::SlowlyVarying,
            _ => TailClass::FiniteMean,
        }
    }

    /// Infimum of the support.
    pub fn support_lo(&self) -> f64 {
        self.scale
            * match self.kind {
                MultiplierKind::Pareto { .. } => 1.0,
                MultiplierKind::SlowlyVarying => std::f64::consts::E,
                _ => 0.0,
            }
    }

    /// `EY`.
    pub fn mean(&self) -> f64 {
        self.scale
            * match self.kind {
                MultiplierKind::Pareto { beta } if beta > 1.0 => beta / (beta - 1.0),
                MultiplierKind::Pareto { .. } | MultiplierKind::SlowlyVarying => f64::INFINITY,
                MultiplierKind::Exponential { rate } => 1.0 / rate,
                MultiplierKind::Uniform01 => 0.5,
            }
    }

    /// `Ḡ(y) = P{Y > y}`.
    pub fn survival(&self, y: f64) -> f64 {
        let y = y / self.scale;
        match self.kind {
            MultiplierKind::Pareto { beta } => {
                if y <= 1.0 {
                    1.0
                } else {
                    y.powf(-beta)
                }
            }
            MultiplierKind::SlowlyVarying => {
                if y <= std::f64::consts::E {
                    1.0
                } else {
                    1.0 / y.ln()
                }
            }
            MultiplierKind::Exponential { rate } => {
                if y <= 0.0 {
                    1.0
                } else {
                    (-rate * y).exp()
                }
            }
            MultiplierKind::Uniform01 => (1.0 - y).clamp(0.0, 1.0),
        }
    }

    /// `Ḡ(e^t)`, usable where `e^t` overflows.
    pub fn survival_ln(&self, t: f64) -> f64 {
        let t = t - self.scale.ln();
        match self.kind {
            MultiplierKind::Pareto { beta } => {
                if t <= 0.0 {
                    1.0
                } else {
                    (-beta * t).exp()
                }
            }
            MultiplierKind::SlowlyVarying => {
                if t <= 1.0 {
                    1.0
                } else {
                    1.0 / t
                }
            }
            MultiplierKind::Exponential { rate } => (-rate * t.exp()).exp(),
            MultiplierKind::Uniform01 => (1.0 - t.exp()).clamp(0.0, 1.0),
        }
    }

    /// Density `g(y)`.
    pub fn density(&self, y: f64) -> f64 {
        let c = self.scale;
        let y = y / c;
        let g = match self.kind {
            MultiplierKind::Pareto { beta } => {
                if y < 1.0 {
                    0.0
                } else {
                    beta * y.powf(-beta - 1.0)
                }
            }
            MultiplierKind::SlowlyVarying => {
                if y < std::f64::consts::E {
                    0.0
                } else {
                    let l = y.ln();
                    1.0 / (y * l * l)
                }
            }
            MultiplierKind::Exponential { rate } => {
                if y < 0.0 {
                    0.0
                } else {
                    rate * (-rate * y).exp()
                }
            }
            MultiplierKind::Uniform01 => {
                if (0.0..=1.0).contains(&y) {
                    1.0
                } else {
                    0.0
                }
            }
        };
        g / c
    }

    /// `E[Y · I(Y ≤ x)]`.
    pub fn trunc_mean(&self, x: f64) -> f64 {
        let c = self.scale;
        let x = x / c;
        let m = match self.kind {
            MultiplierKind::Pareto { beta } => {
                if x <= 1.0 {
                    0.0
                } else if (beta - 1.0).abs() < 1e-12 {
                    x.ln()
                } else {
                    beta * (x.powf(1.0 - beta) - 1.0) / (1.0 - beta)
                }
            }
            MultiplierKind::SlowlyVarying => {
                if x <= std::f64::consts::E {
                    0.0
                } else {
                    exp_over_square_integral(1.0, x.ln())
                }
            }
            MultiplierKind::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let rx = rate * x;
                    (1.0 - (-rx).exp() * (1.0 + rx)) / rate
                }
            }
            MultiplierKind::Uniform01 => {
                let m = x.clamp(0.0, 1.0);
                0.5 * m * m
            }
        };
        c * m
    }

    /// `E[Y² · I(Y ≤ x)]`.
    pub fn trunc_second(&self, x: f64) -> f64 {
        let c = self.scale;
        let x = x / c;
        let m = match self.kind {
            MultiplierKind::Pareto { beta } => {
                if x <= 1.0 {
                    0.0
                } else {
                    beta * (x.powf(2.0 - beta) - 1.0) / (2.0 - beta)
                }
            }
            MultiplierKind::SlowlyVarying => {
                if x <= std::f64::consts::E {
                    0.0
                } else {
                    exp_over_square_integral(2.0, x.ln())
                }
            }
            MultiplierKind::Exponential { rate } => {
                if x <= 0.0 {
                    0.0
                } else {
                    let rx = rate * x;
                    (2.0 - (-rx).exp() * (rx * rx + 2.0 * rx + 2.0)) / (rate * rate)
                }
            }
            MultiplierKind::Uniform01 => {
                let m = x.clamp(0.0, 1.0);
                m * m * m / 3.0
            }
        };
        c * c * m
    }

    /// `ln a_n`.
    ///
    /// Heavy-tailed laws use the upper `1/n` quantile (`n^{1/β}` for
    /// Pareto, `e^n` for the slowly varying law); finite-mean laws use
    /// `a_n = n·EY`, the sequence under which `ΣY_i/a_n → 1`.
    pub fn log_norming(&self, n: u64) -> f64 {
        let n = n.max(1) as f64;
        let base = match self.kind {
            MultiplierKind::Pareto { beta } => n.ln() / beta,
            MultiplierKind::SlowlyVarying => n,
            _ => return (n * self.mean()).ln(),
        };
        base + self.scale.ln()
    }

    /// `a_n`; may be `+∞` when it overflows (slowly varying law).
    pub fn norming(&self, n: u64) -> f64 {
        match self.kind {
            MultiplierKind::Pareto { beta } => self.scale * (n.max(1) as f64).powf(1.0 / beta),
            MultiplierKind::Exponential { .. } | MultiplierKind::Uniform01 => {
                n.max(1) as f64 * self.mean()
            }
            MultiplierKind::SlowlyVarying => self.log_norming(n).exp(),
        }
    }

    /// `Ḡ(a_n · v)`, falling back to log space when `a_n` overflows.
    pub fn survival_at_normed(&self, n: u64, v: f64) -> f64 {
        let a = self.norming(n);
        let y = a * v;
        if y.is_finite() && y > 0.0 {
            self.survival(y)
        } else {
            self.survival_ln(self.log_norming(n) + v.ln())
        }
    }

    /// Draw `ln Y`.
    pub fn sample_ln<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let t = match self.kind {
            MultiplierKind::Pareto { beta } => {
                let u: f64 = Open01.sample(rng);
                -u.ln() / beta
            }
            MultiplierKind::SlowlyVarying => {
                let u: f64 = Open01.sample(rng);
                1.0 / u
            }
            MultiplierKind::Exponential { rate } => {
                let e: f64 = Exp1.sample(rng);
                (e / rate).ln()
            }
            MultiplierKind::Uniform01 => {
                let u: f64 = Open01.sample(rng);
                u.ln()
            }
        };
        if self.scale == 1.0 {
            t
        } else {
            t + self.scale.ln()
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sample_ln(rng).exp()
    }

    pub fn sample_batch(&self, stream: SeedStream, count: usize) -> Vec<f64> {
        let mut rng = stream.rng();
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }

    pub fn sample_ln_batch(&self, stream: SeedStream, count: usize) -> Vec<f64> {
        let mut rng = stream.rng();
        (0..count).map(|_| self.sample_ln(&mut rng)).collect()
    }
}
