//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Infinite endpoints are mapped onto `(0, 1]` with `x = a + (1 - t) / t`,
//! the same transformation QUADPACK's `qagi` uses. Integrands may have
//! integrable endpoint singularities because the rule never evaluates the
//! interval ends.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{LabError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// A quadrature result with its absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_err: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            abs_err: 0.0,
        }
    }
}

impl std::ops::Add for Estimate {
    type Output = Estimate;
    fn add(self, rhs: Estimate) -> Estimate {
        Estimate {
            value: self.value + rhs.value,
            abs_err: self.abs_err + rhs.abs_err,
        }
    }
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut scaled = err.abs();
    if res_asc != 0.0 && scaled != 0.0 {
        let scale = (200.0 * scaled / res_asc).powf(1.5);
        scaled = if scale < 1.0 {
            res_asc * scale
        } else {
            res_asc
        };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        scaled = scaled.max(50.0 * f64::EPSILON * res_abs);
    }
    scaled
}

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let f_center = f(center);
    let mut res_k = f_center * WGK[7];
    let mut res_g = f_center * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = res_k * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let err = rescale_error(
        (res_k - res_g) * half,
        res_abs * half.abs(),
        res_asc * half.abs(),
    );
    if !value.is_finite() || !err.is_finite() {
        return Err(LabError::Quadrature {
            partial: value,
            error: f64::INFINITY,
            lo,
            hi,
        });
    }
    Ok(Segment { lo, hi, value, err })
}

impl Quadrature {
    pub fn with_abs_tol(abs_tol: f64) -> Self {
        Self {
            abs_tol,
            ..Self::default()
        }
    }

    /// Integrate `f` over `[a, b]`; either bound may be infinite.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        self.integrate_pieces(f, &[a, b])
    }

    /// Integrate over the union of consecutive pieces `[p0,p1], [p1,p2], ...`.
    ///
    /// Points should include every known kink or jump of the integrand.
    /// They are sorted and deduplicated; only the first and last may be
    /// infinite.
    pub fn integrate_pieces<F: Fn(f64) -> f64>(&self, f: F, points: &[f64]) -> Result<Estimate> {
        let mut pts: Vec<f64> = points.iter().copied().filter(|p| !p.is_nan()).collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        if pts.len() < 2 {
            return Ok(Estimate::exact(0.0));
        }
        if pts.len() == 2 && pts[0] == f64::NEG_INFINITY && pts[1] == f64::INFINITY {
            pts.insert(1, 0.0);
        }
        let lo = pts[0];
        let hi = pts[pts.len() - 1];

        // Every piece is mapped to a finite t-interval; the mapped integrand
        // is dispatched per piece kind.
        #[derive(Clone, Copy)]
        enum Kind {
            Finite,
            Upper(f64),
            Lower(f64),
        }
        let mut pieces: Vec<(Kind, f64, f64)> = Vec::new();
        for w in pts.windows(2) {
            let (a, b) = (w[0], w[1]);
            match (a.is_infinite(), b.is_infinite()) {
                (false, false) => pieces.push((Kind::Finite, a, b)),
                (false, true) => pieces.push((Kind::Upper(a), 0.0, 1.0)),
                (true, false) => pieces.push((Kind::Lower(b), 0.0, 1.0)),
                (true, true) => unreachable!(),
            }
        }
        let mapped = |kind: Kind, t: f64| -> f64 {
            match kind {
                Kind::Finite => f(t),
                Kind::Upper(a) => {
                    let x = a + (1.0 - t) / t;
                    let v = f(x) / (t * t);
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                }
                Kind::Lower(b) => {
                    let x = b - (1.0 - t) / t;
                    let v = f(x) / (t * t);
                    if v.is_finite() {
                        v
                    } else {
                        0.0
                    }
                }
            }
        };

        let mut heaps: Vec<BinaryHeap<Segment>> = Vec::with_capacity(pieces.len());
        for &(kind, a, b) in &pieces {
            let mut heap = BinaryHeap::new();
            heap.push(gk15(&|t| mapped(kind, t), a, b)?);
            heaps.push(heap);
        }
        let mut intervals = pieces.len();
        loop {
            let (total, err) = heaps
                .iter()
                .flat_map(|h| h.iter())
                .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.err));
            let tol = self.abs_tol.max(self.rel_tol * total.abs());
            if err <= tol {
                return Ok(Estimate {
                    value: total,
                    abs_err: err,
                });
            }
            if intervals >= self.max_intervals {
                return Err(LabError::Quadrature {
                    partial: total,
                    error: err,
                    lo,
                    hi,
                });
            }
            // bisect the worst segment over all pieces
            let (idx, _) = heaps
                .iter()
                .enumerate()
                .filter_map(|(i, h)| h.peek().map(|s| (i, s.err)))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("at least one segment");
            let kind = pieces[idx].0;
            let worst = heaps[idx].pop().expect("non-empty");
            let mid = 0.5 * (worst.lo + worst.hi);
            if mid <= worst.lo || mid >= worst.hi {
                // segment cannot be split further in floating point
                let total_err = err;
                return Err(LabError::Quadrature {
                    partial: total,
                    error: total_err,
                    lo,
                    hi,
                });
            }
            let left = gk15(&|t| mapped(kind, t), worst.lo, mid)?;
            let right = gk15(&|t| mapped(kind, t), mid, worst.hi)?;
            heaps[idx].push(left);
            heaps[idx].push(right);
            intervals += 1;
        }
    }
}
