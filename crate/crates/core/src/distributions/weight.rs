use rand::Rng;
use rand_distr::{Distribution, Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{LabError, Result};
use crate::rng::SeedStream;
use crate::special::{normal_cdf, normal_pdf};

/// Built-in laws for the weight variable `X`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightKind {
    Uniform01,
    StandardGaussian,
    Rademacher,
    PointMass {
        c: f64,
    },
    /// `x1` with probability `p`, otherwise `x0`.
    Bernoulli {
        p: f64,
        x0: f64,
        x1: f64,
    },
    /// `±P` with a fair sign and `P{P > x} = x^{-gamma}` on `[1, ∞)`.
    SymmetricPareto {
        gamma: f64,
    },
    /// One-sided Pareto on `[1, ∞)`; the absolute value of `SymmetricPareto`.
    Pareto {
        gamma: f64,
    },
}

/// A point carrying positive probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: f64,
    pub mass: f64,
}

/// The law `F` of the weights `X_i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightLaw {
    kind: WeightKind,
}

/// Validate `kind` and build the law.
pub fn make_weight_law(kind: WeightKind) -> Result<WeightLaw> {
    match kind {
        WeightKind::PointMass { c } if !c.is_finite() => {
            return Err(LabError::param("c", "point mass location must be finite"))
        }
        WeightKind::Bernoulli { p, x0, x1 } => {
            if !(p > 0.0 && p < 1.0) {
                return Err(LabError::param("p", format!("{p} not in (0,1)")));
            }
            if !(x0.is_finite() && x1.is_finite()) || x0 == x1 {
                return Err(LabError::param(
                    "x0/x1",
                    "atoms must be finite and distinct",
                ));
            }
        }
        WeightKind::SymmetricPareto { gamma } | WeightKind::Pareto { gamma }
            if !(gamma > 0.0 && gamma < 2.0) =>
        {
            return Err(LabError::param("gamma", format!("{gamma} not in (0,2)")));
        }
        _ => {}
    }
    Ok(WeightLaw { kind })
}

impl WeightLaw {
    pub fn kind(&self) -> WeightKind {
        self.kind
    }

    pub fn name(&self) -> String {
        match self.kind {
            WeightKind::Uniform01 => "uniform01".into(),
            WeightKind::StandardGaussian => "standard_gaussian".into(),
            WeightKind::Rademacher => "rademacher".into(),
            WeightKind::PointMass { c } => format!("point_mass({c})"),
            WeightKind::Bernoulli { p, x0, x1 } => format!("bernoulli({p},{x0},{x1})"),
            WeightKind::SymmetricPareto { gamma } => format!("symmetric_pareto({gamma})"),
            WeightKind::Pareto { gamma } => format!("pareto({gamma})"),
        }
    }

    /// Law of `|X|`, when it is again a built-in law.
    pub fn abs(&self) -> Result<WeightLaw> {
        let kind = match self.kind {
            WeightKind::Uniform01 | WeightKind::Pareto { .. } => self.kind,
            WeightKind::SymmetricPareto { gamma } => WeightKind::Pareto { gamma },
            WeightKind::Rademacher => WeightKind::PointMass { c: 1.0 },
            WeightKind::PointMass { c } => WeightKind::PointMass { c: c.abs() },
            WeightKind::Bernoulli { p, x0, x1 } if x0.abs() != x1.abs() => WeightKind::Bernoulli {
                p,
                x0: x0.abs(),
                x1: x1.abs(),
            },
            WeightKind::Bernoulli { x0, .. } => WeightKind::PointMass { c: x0.abs() },
            WeightKind::StandardGaussian => {
                return Err(LabError::param(
                    "kind",
                    "|standard_gaussian| is not a built-in law",
                ))
            }
        };
        make_weight_law(kind)
    }

    pub fn degenerate(&self) -> bool {
        matches!(self.kind, WeightKind::PointMass { .. })
    }

    pub fn atoms(&self) -> Vec<Atom> {
        match self.kind {
            WeightKind::Rademacher => vec![
                Atom {
                    location: -1.0,
                    mass: 0.5,
                },
                Atom {
                    location: 1.0,
                    mass: 0.5,
                },
            ],
            WeightKind::PointMass { c } => vec![Atom {
                location: c,
                mass: 1.0,
            }],
            WeightKind::Bernoulli { p, x0, x1 } => {
                let mut a = vec![
                    Atom {
                        location: x0,
                        mass: 1.0 - p,
                    },
                    Atom {
                        location: x1,
                        mass: p,
                    },
                ];
                a.sort_by(|l, r| l.location.total_cmp(&r.location));
                a
            }
            _ => Vec::new(),
        }
    }

    /// Right-continuous CDF `F(x) = P{X ≤ x}`.
    pub fn cdf(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::Uniform01 => x.clamp(0.0, 1.0),
            WeightKind::StandardGaussian => normal_cdf(x),
            WeightKind::SymmetricPareto { gamma } => {
                if x >= 1.0 {
                    1.0 - 0.5 * x.powf(-gamma)
                } else if x > -1.0 {
                    0.5
                } else {
                    0.5 * (-x).powf(-gamma)
                }
            }
            WeightKind::Pareto { gamma } => {
                if x >= 1.0 {
                    1.0 - x.powf(-gamma)
                } else {
                    0.0
                }
            }
            _ => self
                .atoms()
                .iter()
                .filter(|a| a.location <= x)
                .map(|a| a.mass)
                .sum(),
        }
    }

    /// Left limit `F(x-) = P{X < x}`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::PointMass { .. }
            | WeightKind::Rademacher
            | WeightKind::Bernoulli { .. } => self
                .atoms()
                .iter()
                .filter(|a| a.location < x)
                .map(|a| a.mass)
                .sum(),
            _ => self.cdf(x),
        }
    }

    /// `F̄(x) = 1 - F(x)`.
    pub fn survival(&self, x: f64) -> f64 {
        match self.kind {
            WeightKind::Pareto { gamma } if x >= 1.0 => x.powf(-gamma),
            WeightKind::SymmetricPareto { gamma } if x >= 1.0 => 0.5 * x.powf(-gamma),
            WeightKind::StandardGaussian => normal_cdf(-x),
            _ => 1.0 - self.cdf(x),
        }
    }

    /// Density of the absolutely continuous laws, `None` for atomic ones.
    pub fn density(&self, x: f64) -> Option<f64> {
        match self.kind {
            WeightKind::Uniform01 => Some(if (0.0..=1.0).contains(&x) { 1.0 } else { 0.0 }),
            WeightKind::StandardGaussian => Some(normal_pdf(x)),
            WeightKind::SymmetricPareto { gamma } => Some(if x.abs() >= 1.0 {
                0.5 * gamma * x.abs().powf(-gamma - 1.0)
            } else {
                0.0
            }),
            WeightKind::Pareto { gamma } => Some(if x >= 1.0 {
                gamma * x.powf(-gamma - 1.0)
            } else {
                0.0
            }),
            _ => None,
        }
    }

    /// Closed support `[lo, hi]` of the law (possibly infinite).
    pub fn support(&self) -> (f64, f64) {
        match self.kind {
            WeightKind::Uniform01 => (0.0, 1.0),
            WeightKind::StandardGaussian | WeightKind::SymmetricPareto { .. } => {
                (f64::NEG_INFINITY, f64::INFINITY)
            }
            WeightKind::Pareto { .. } => (1.0, f64::INFINITY),
            _ => {
                let a = self.atoms();
                (a[0].location, a[a.len() - 1].location)
            }
        }
    }

    /// Points where `F` jumps or loses smoothness.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self.kind {
            WeightKind::Uniform01 => vec![0.0, 1.0],
            WeightKind::StandardGaussian => Vec::new(),
            WeightKind::SymmetricPareto { .. } => vec![-1.0, 1.0],
            WeightKind::Pareto { .. } => vec![1.0],
            _ => self.atoms().iter().map(|a| a.location).collect(),
        }
    }

    /// `EX`; `NaN` when the expectation is undefined, `±∞` when it diverges.
    pub fn mean(&self) -> f64 {
        match self.kind {
            WeightKind::Uniform01 => 0.5,
            WeightKind::StandardGaussian | WeightKind::Rademacher => 0.0,
            WeightKind::PointMass { c } => c,
            WeightKind::Bernoulli { p, x0, x1 } => (1.0 - p) * x0 + p * x1,
            WeightKind::SymmetricPareto { gamma } => {
                if gamma > 1.0 {
                    0.0
                } else {
                    f64::NAN
                }
            }
            WeightKind::Pareto { gamma } => pareto_moment(gamma, 1.0),
        }
    }

    /// `E|X|`.
    pub fn abs_mean(&self) -> f64 {
        match self.kind {
            WeightKind::Uniform01 => 0.5,
            WeightKind::StandardGaussian => (2.0 / std::f64::consts::PI).sqrt(),
            WeightKind::SymmetricPareto { gamma } | WeightKind::Pareto { gamma } => {
                pareto_moment(gamma, 1.0)
            }
            _ => self.atoms().iter().map(|a| a.mass * a.location.abs()).sum(),
        }
    }

    /// `EX²`.
    pub fn second_moment(&self) -> f64 {
        match self.kind {
            WeightKind::Uniform01 => 1.0 / 3.0,
            WeightKind::StandardGaussian => 1.0,
            WeightKind::SymmetricPareto { gamma } | WeightKind::Pareto { gamma } => {
                pareto_moment(gamma, 2.0)
            }
            _ => self
                .atoms()
                .iter()
                .map(|a| a.mass * a.location * a.location)
                .sum(),
        }
    }

    /// `∫_{(0,∞)} x^β F(dx)`.
    pub fn beta_moment_pos(&self, beta: f64) -> f64 {
        match self.kind {
            WeightKind::Uniform01 => 1.0 / (beta + 1.0),
            WeightKind::StandardGaussian => half_gaussian_moment(beta),
            WeightKind::SymmetricPareto { gamma } => 0.5 * pareto_moment(gamma, beta),
            WeightKind::Pareto { gamma } => pareto_moment(gamma, beta),
            _ => self
                .atoms()
                .iter()
                .filter(|a| a.location > 0.0)
                .map(|a| a.mass * a.location.powf(beta))
                .sum(),
        }
    }

    /// `∫_{(-∞,0)} (-x)^β F(dx)`.
    pub fn beta_moment_neg(&self, beta: f64) -> f64 {
        match self.kind {
            WeightKind::Uniform01 | WeightKind::Pareto { .. } => 0.0,
            WeightKind::StandardGaussian => half_gaussian_moment(beta),
            WeightKind::SymmetricPareto { gamma } => 0.5 * pareto_moment(gamma, beta),
            _ => self
                .atoms()
                .iter()
                .filter(|a| a.location < 0.0)
                .map(|a| a.mass * (-a.location).powf(beta))
                .sum(),
        }
    }

    /// `E[X^p · I(|X| ≤ c)]` for `p ∈ {0, 1, 2}`.
    pub fn trunc_moment(&self, p: u32, c: f64) -> f64 {
        assert!(p <= 2, "only moments up to order 2 are tabulated");
        if c < 0.0 {
            return 0.0;
        }
        match self.kind {
            WeightKind::Uniform01 => {
                let m = c.min(1.0);
                m.powi(p as i32 + 1) / (p as f64 + 1.0)
            }
            WeightKind::StandardGaussian => match p {
                0 => 2.0 * normal_cdf(c) - 1.0,
                1 => 0.0,
                _ => 2.0 * normal_cdf(c) - 1.0 - 2.0 * c * normal_pdf(c),
            },
            WeightKind::SymmetricPareto { gamma } => {
                if p == 1 {
                    0.0
                } else {
                    pareto_trunc(gamma, p as f64, c)
                }
            }
            WeightKind::Pareto { gamma } => pareto_trunc(gamma, p as f64, c),
            _ => self
                .atoms()
                .iter()
                .filter(|a| a.location.abs() <= c)
                .map(|a| a.mass * a.location.powi(p as i32))
                .sum(),
        }
    }

    /// `E[|X| · I(|X| ≤ c)]`.
    pub fn trunc_abs_moment(&self, c: f64) -> f64 {
        if c < 0.0 {
            return 0.0;
        }
        match self.kind {
            WeightKind::StandardGaussian => {
                (2.0 / std::f64::consts::PI).sqrt() * (1.0 - (-0.5 * c * c).exp())
            }
            WeightKind::SymmetricPareto { gamma } | WeightKind::Pareto { gamma } => {
                pareto_trunc(gamma, 1.0, c)
            }
            WeightKind::Uniform01 => self.trunc_moment(1, c),
            _ => self
                .atoms()
                .iter()
                .filter(|a| a.location.abs() <= c)
                .map(|a| a.mass * a.location.abs())
                .sum(),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self.kind {
            WeightKind::Uniform01 => rng.random::<f64>(),
            WeightKind::StandardGaussian => StandardNormal.sample(rng),
            WeightKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            WeightKind::PointMass { c } => c,
            WeightKind::Bernoulli { p, x0, x1 } => {
                if rng.random::<f64>() < p {
                    x1
                } else {
                    x0
                }
            }
            WeightKind::SymmetricPareto { gamma } => {
                let u: f64 = Open01.sample(rng);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * (-u.ln() / gamma).exp()
            }
            WeightKind::Pareto { gamma } => {
                let u: f64 = Open01.sample(rng);
                (-u.ln() / gamma).exp()
            }
        }
    }

    pub fn sample_batch(&self, stream: SeedStream, count: usize) -> Vec<f64> {
        let mut rng = stream.rng();
        (0..count).map(|_| self.sample(&mut rng)).collect()
    }
}

/// `E P^q` for `P{P > x} = x^{-γ}` on `[1, ∞)`.
fn pareto_moment(gamma: f64, q: f64) -> f64 {
    if q < gamma {
        gamma / (gamma - q)
    } else {
        f64::INFINITY
    }
}

/// `E[P^q I(P ≤ c)]` for the same Pareto variable.
fn pareto_trunc(gamma: f64, q: f64, c: f64) -> f64 {
    if c < 1.0 {
        return 0.0;
    }
    if q == 0.0 {
        return 1.0 - c.powf(-gamma);
    }
    let e = q - gamma;
    if e.abs() < 1e-12 {
        gamma * c.ln()
    } else {
        gamma * (c.powf(e) - 1.0) / e
    }
}

/// `E[X^β; X > 0]` for standard Gaussian `X`.
fn half_gaussian_moment(beta: f64) -> f64 {
    2f64.powf(beta / 2.0) * gamma((beta + 1.0) / 2.0) / (2.0 * std::f64::consts::PI.sqrt())
}
