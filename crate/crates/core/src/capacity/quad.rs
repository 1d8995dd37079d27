use super::CapacityError;
use std::collections::BinaryHeap;

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

const MAX_PIECES: usize = 10_000;
const MAX_LEVELS: usize = 24;

/// Kronrod 15-point value and its distance to the embedded Gauss 7-point value.
fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let s = f(c - r * XGK[i]) + f(c + r * XGK[i]);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (r * k, (r * (k - g)).abs())
}

struct Piece {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Piece {
    fn eq(&self, o: &Self) -> bool {
        self.err == o.err
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, o: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Piece {
    fn cmp(&self, o: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&o.err).then(o.a.total_cmp(&self.a))
    }
}

/// Globally adaptive Gauss–Kronrod 7/15: bisects the interval with the
/// largest error until the summed error is below `tol`.
/// Returns the value, the error estimate and the number of intervals.
pub(super) fn gauss_kronrod(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, f64, usize), CapacityError> {
    let (value, err) = gk15(f, a, b);
    let mut heap = BinaryHeap::from([Piece { err, a, b, value }]);
    loop {
        let (total, err): (f64, f64) = heap.iter().fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
        if !total.is_finite() || !err.is_finite() {
            return Err(CapacityError::Quadrature("non-finite integrand".into()));
        }
        if err <= tol {
            return Ok((total, err, heap.len()));
        }
        if heap.len() >= MAX_PIECES {
            return Err(CapacityError::Quadrature(format!("{MAX_PIECES} intervals, error {err:e}")));
        }
        let p = heap.pop().unwrap();
        let m = 0.5 * (p.a + p.b);
        for (x, y) in [(p.a, m), (m, p.b)] {
            let (value, err) = gk15(f, x, y);
            heap.push(Piece { err, a: x, b: y, value });
        }
    }
}

/// Romberg extrapolation of the trapezoid rule; stops when two successive
/// diagonal entries agree within `tol / 10`. Returns the value and the
/// number of levels.
pub(super) fn romberg(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<(f64, usize), CapacityError> {
    let mut prev: Vec<f64> = vec![0.5 * (b - a) * (f(a) + f(b))];
    let mut n = 1usize;
    for level in 1..MAX_LEVELS {
        let h = (b - a) / (2 * n) as f64;
        let mid: f64 = (0..n).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        n *= 2;
        let mut row = vec![0.5 * prev[0] + h * mid];
        let mut p4 = 1.0;
        for k in 1..=level {
            p4 *= 4.0;
            row.push(row[k - 1] + (row[k - 1] - prev[k - 1]) / (p4 - 1.0));
        }
        let (new, old) = (row[level], prev[level - 1]);
        if !new.is_finite() {
            return Err(CapacityError::Quadrature("non-finite integrand".into()));
        }
        if level >= 4 && (new - old).abs() <= tol / 10.0 {
            return Ok((new, level));
        }
        prev = row;
    }
    Err(CapacityError::Quadrature(format!("Romberg did not converge in {MAX_LEVELS} levels")))
}
