//! Globally adaptive Gauss–Kronrod (7/15) quadrature in one and two dimensions.
//!
//! The one-dimensional integrator keeps a heap of subintervals and always
//! bisects the one with the largest error estimate, stopping once the summed
//! error drops below `max(abs_tol, rel_tol * |I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Result, RisError};

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

// Gauss weights for the odd Kronrod nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// Tolerances and subdivision budget.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            rel_tol: 1e-12,
            max_intervals: 2000,
        }
    }
}

impl QuadOptions {
    pub fn tight() -> Self {
        Self {
            abs_tol: 1e-15,
            rel_tol: 1e-14,
            max_intervals: 4000,
        }
    }
}

/// Value, error estimate and bookkeeping of one integration.
#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

/// One 15-point Kronrod rule on `[a, b]`, returning (estimate, error, ∫|f|).
fn qk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = fc.abs() * WGK[7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (f1, f2) = (f(center - dx), f(center + dx));
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let err = ((resk - resg) * half).abs();
    (resk * half, err, resabs * half.abs())
}

// Error estimates below this multiple of ε·∫|f| are roundoff.
const ROUNDOFF_FACTOR: f64 = 50.0 * f64::EPSILON;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
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
        self.error.total_cmp(&other.error)
    }
}

/// Integrate `f` over `[a, b]`.
///
/// Refinement also stops once the error estimate is at the roundoff level of
/// ∫|f|, since further bisection cannot improve it.
pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    opts: QuadOptions,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let (value, error, abs_value) = qk15(&mut f, a, b);
    let mut evaluations = 15;
    let mut heap = BinaryHeap::new();
    heap.push(Segment {
        a,
        b,
        value,
        error,
        abs_value,
    });
    let mut total = value;
    let mut total_err = error;
    let mut total_abs = abs_value;
    loop {
        let tol = opts
            .abs_tol
            .max(opts.rel_tol * total.abs())
            .max(ROUNDOFF_FACTOR * total_abs);
        if total_err <= tol {
            break;
        }
        if heap.len() >= opts.max_intervals {
            return Err(RisError::Quadrature {
                estimate: total,
                error: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        // The worst interval is too narrow to bisect in floating point.
        if mid <= worst.a || mid >= worst.b {
            return Err(RisError::Quadrature {
                estimate: total,
                error: total_err,
                intervals: heap.len() + 1,
            });
        }
        let (v1, e1, r1) = qk15(&mut f, worst.a, mid);
        let (v2, e2, r2) = qk15(&mut f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_abs += r1 + r2 - worst.abs_value;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: v1,
            error: e1,
            abs_value: r1,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: v2,
            error: e2,
            abs_value: r2,
        });
    }
    // Re-sum to shed accumulated update roundoff.
    let value = heap.iter().map(|s| s.value).sum();
    let abs_error = heap.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        abs_error,
        evaluations,
    })
}

/// Iterated integral of `f(x, y)` over `[ax, bx] × [ay, by]`.
///
/// The inner integrals run at a tolerance tighter than the outer one so the
/// inner error does not dominate.
pub fn integrate_2d<F: FnMut(f64, f64) -> f64>(
    mut f: F,
    (ax, bx): (f64, f64),
    (ay, by): (f64, f64),
    opts: QuadOptions,
) -> Result<Integral> {
    let inner_opts = QuadOptions {
        abs_tol: opts.abs_tol * 1e-2,
        rel_tol: opts.rel_tol * 1e-2,
        max_intervals: opts.max_intervals,
    };
    let mut inner_failure = None;
    let mut evaluations = 0;
    let mut inner_err = 0.0_f64;
    let outer = integrate(
        |x| match integrate(|y| f(x, y), ay, by, inner_opts) {
            Ok(r) => {
                evaluations += r.evaluations;
                inner_err = inner_err.max(r.abs_error);
                r.value
            }
            Err(e) => {
                inner_failure.get_or_insert(e);
                f64::NAN
            }
        },
        ax,
        bx,
        opts,
    );
    if let Some(e) = inner_failure {
        return Err(e);
    }
    let outer = outer?;
    Ok(Integral {
        value: outer.value,
        abs_error: outer.abs_error + inner_err * (bx - ax).abs(),
        evaluations,
    })
}
