//! Special functions not provided by `statrs`.

use statrs::function::erf::erfc;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_860_606_512_090_082;

/// Standard normal CDF.
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Exponential integral `Ei(x)` for `x > 0`.
pub fn ei(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x <= 50.0 {
        let mut term = 1.0;
        let mut sum = 0.0;
        let mut k = 1.0;
        loop {
            term *= x / k;
            let add = term / k;
            sum += add;
            if add < sum * 1e-17 {
                break;
            }
            k += 1.0;
        }
        EULER_GAMMA + x.ln() + sum
    } else {
        // asymptotic series, truncated before the terms start to grow
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 1.0;
        while k < x {
            let next = term * k / x;
            if next > term {
                break;
            }
            term = next;
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
            k += 1.0;
        }
        x.exp() / x * sum
    }
}

/// `∫_1^t e^{k s} / s² ds` for `k > 0`, `t ≥ 1`.
pub(crate) fn exp_over_square_integral(k: f64, t: f64) -> f64 {
    if t <= 1.0 {
        return 0.0;
    }
    (k.exp() - (k * t).exp() / t) + k * (ei(k * t) - ei(k))
}
