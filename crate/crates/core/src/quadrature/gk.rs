//! Gauss–Kronrod 7/15 rule with adaptive bisection.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::sum::CompensatedSum;

// Kronrod abscissae; the odd-indexed ones are the 7-point Gauss nodes.
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

/// One 15-point Kronrod estimate and the difference to the embedded Gauss rule.
pub fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut g = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let pair = f(c - dx) + f(c + dx);
        k += WGK[j] * pair;
        if j % 2 == 1 {
            g += WG[j / 2] * pair;
        }
    }
    (k * h, ((k - g) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Adaptive result on one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub value: f64,
    pub err: f64,
    pub intervals: usize,
}

/// Adaptive GK15 over the subintervals given by sorted `breaks`.
///
/// Stops when the summed error estimate is below `max(abs_tol, rel_tol·|I|)`.
/// With `strict` false the last estimate is returned on budget exhaustion
/// instead of an error.
pub fn adaptive_breaks<F: Fn(f64) -> f64>(
    f: &F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
    strict: bool,
) -> Result<Adaptive> {
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, err) = gk15(f, w[0], w[1]);
            heap.push(Piece {
                a: w[0],
                b: w[1],
                value,
                err,
            });
        }
    }
    let totals = |heap: &BinaryHeap<Piece>| {
        let mut v = CompensatedSum::new();
        let mut e = CompensatedSum::new();
        for p in heap.iter() {
            v.add(p.value);
            e.add(p.err);
        }
        (v.value(), e.value())
    };
    let (mut value, mut err) = totals(&heap);
    while err > abs_tol.max(rel_tol * value.abs()) {
        if heap.len() >= max_intervals {
            if strict {
                return Err(Error::NoConvergence(format!(
                    "adaptive quadrature: error estimate {err:e} after {max_intervals} intervals"
                )));
            }
            break;
        }
        let worst = heap.pop().expect("non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            heap.push(worst);
            break;
        }
        value -= worst.value;
        err -= worst.err;
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (v, e) = gk15(f, a, b);
            value += v;
            err += e;
            heap.push(Piece { a, b, value: v, err: e });
        }
        // running totals drift, so refresh them periodically
        if heap.len() % 64 == 0 {
            (value, err) = totals(&heap);
        }
    }
    // fixed left-to-right reduction order
    let mut pieces = heap.into_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let intervals = pieces.len();
    let mut v = CompensatedSum::new();
    let mut e = CompensatedSum::new();
    for p in &pieces {
        v.add(p.value);
        e.add(p.err);
    }
    Ok(Adaptive {
        value: v.value(),
        err: e.value(),
        intervals,
    })
}

pub fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> Result<Adaptive> {
    adaptive_breaks(f, &[a, b], abs_tol, rel_tol, 4000, true)
}
