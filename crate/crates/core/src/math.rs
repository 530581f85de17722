//! Float helpers routed through `libm` so results do not depend on `std`.

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub(crate) fn lgamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// ln B(a, b).
#[inline]
pub(crate) fn ln_beta(a: f64, b: f64) -> f64 {
    lgamma(a) + lgamma(b) - lgamma(a + b)
}

/// Shannon entropy in nats, with 0 ln 0 = 0.
pub(crate) fn entropy(p: &[f64]) -> f64 {
    let mut h = 0.0;
    for &x in p {
        if x > 0.0 {
            h -= x * ln(x);
        }
    }
    h
}

/// Normalizes log-weights in place into a probability vector.
pub(crate) fn softmax_in_place(w: &mut [f64]) {
    let max = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        let u = 1.0 / w.len() as f64;
        w.iter_mut().for_each(|x| *x = u);
        return;
    }
    let mut sum = 0.0;
    for x in w.iter_mut() {
        *x = exp(*x - max);
        sum += *x;
    }
    for x in w.iter_mut() {
        *x /= sum;
    }
}

/// Fixed-point real accumulator with 2^-64 resolution.
///
/// Integer addition makes merges associative and commutative bit for bit,
/// which plain `f64` sums are not.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FixedSum(i128);

const FIXED_SCALE: f64 = 18_446_744_073_709_551_616.0; // 2^64

impl FixedSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        self.0 += (x * FIXED_SCALE) as i128;
    }

    #[inline]
    pub fn merge(&mut self, other: FixedSum) {
        self.0 += other.0;
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0 as f64 / FIXED_SCALE
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_of_uniform_and_point_mass() {
        assert!((entropy(&[0.5, 0.5]) - ln(2.0)).abs() < 1e-15);
        assert_eq!(entropy(&[1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn softmax_handles_neg_infinity() {
        let mut w = [f64::NEG_INFINITY, 0.0, 0.0];
        softmax_in_place(&mut w);
        assert_eq!(w, [0.0, 0.5, 0.5]);
    }

    #[test]
    fn fixed_sum_is_order_independent() {
        let xs = [0.1, 1e-9, 0.7, 0.333333, 1.0, 0.25];
        let mut a = FixedSum::default();
        for &x in &xs {
            a.add(x);
        }
        let mut b = FixedSum::default();
        for &x in xs.iter().rev() {
            b.add(x);
        }
        assert_eq!(a, b);
        assert!((a.value() - xs.iter().sum::<f64>()).abs() < 1e-15);
    }
}
