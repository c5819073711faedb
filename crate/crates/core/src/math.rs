//! Small floating-point helpers shared across the crate.

/// Compensated (Kahan) accumulator for long sums of small increments.
///
/// The model accumulates O(c) increments of size O(1/c); plain summation
/// noise would drown the O(1/c) deviations this crate measures at large c.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    compensation: f64,
}

impl KahanSum {
    pub fn new(value: f64) -> Self {
        Self {
            sum: value,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let y = value - self.compensation;
        let t = self.sum + y;
        let c = (t - self.sum) - y;
        // once the sum saturates to infinity the correction is inf - inf;
        // drop it so the accumulator stays at inf instead of turning NaN
        self.compensation = if c.is_finite() { c } else { 0.0 };
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum
    }
}

/// Sum an iterator with compensation.
pub fn kahan_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut acc = KahanSum::new(0.0);
    for v in iter {
        acc.add(v);
    }
    acc.value()
}

/// Units-in-the-last-place distance between two finite doubles.
///
/// Zero means bit-identical (treating +0.0 and -0.0 as equal), one means
/// adjacent representable values, and so on.
pub fn ulp_distance(a: f64, b: f64) -> u64 {
    assert!(a.is_finite() && b.is_finite(), "ulp distance of non-finite");
    monotone_key(a).abs_diff(monotone_key(b))
}

// Order-preserving map from f64 to i64: negative floats (sign bit set) are
// reflected so the integer order matches the numeric order.
fn monotone_key(x: f64) -> i64 {
    let bits = x.to_bits() as i64;
    if bits < 0 {
        i64::MIN - bits
    } else {
        bits
    }
}

/// Relative gap |a - b| / max(|a|, |b|), zero when both are zero.
pub fn rel_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Least-squares line fit `y = intercept + slope * x`.
///
/// Panics if fewer than two points are supplied.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    assert!(xs.len() >= 2, "line fit needs at least two points");
    let n = xs.len() as f64;
    let mean_x = kahan_sum(xs.iter().copied()) / n;
    let mean_y = kahan_sum(ys.iter().copied()) / n;
    let sxy = kahan_sum(xs.iter().zip(ys).map(|(x, y)| (x - mean_x) * (y - mean_y)));
    let sxx = kahan_sum(xs.iter().map(|x| (x - mean_x) * (x - mean_x)));
    let slope = sxy / sxx;
    (slope, mean_y - slope * mean_x)
}
