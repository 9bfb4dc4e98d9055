//! Error-free transformations and compensated summation.
//!
//! Used where an identity must hold to ~1e-12 relative even when the
//! right-hand side is small compared with the individual terms.

/// `a + b = s + e` exactly (Knuth's TwoSum).
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// `a * b = p + e` exactly, via fused multiply-add.
#[inline]
pub fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// Running sum carrying its rounding error (Ogita–Rump–Oishi `Sum2`).
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    err: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let (s, e) = two_sum(self.sum, x);
        self.sum = s;
        self.err += e;
    }

    /// Adds the exact product `a * b`.
    #[inline]
    pub fn add_product(&mut self, a: f64, b: f64) {
        let (p, ep) = two_prod(a, b);
        self.add(p);
        self.err += ep;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.err
    }
}

/// Compensated sum of a slice.
pub fn sum2(xs: &[f64]) -> f64 {
    let mut acc = CompensatedSum::new();
    xs.iter().for_each(|&x| acc.add(x));
    acc.value()
}

/// Compensated dot product (`Dot2`): as accurate as if computed in twice the
/// working precision, then rounded.
pub fn dot2(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = CompensatedSum::new();
    for (&x, &y) in a.iter().zip(b) {
        acc.add_product(x, y);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sum_is_exact() {
        let (s, e) = two_sum(1.0, 1e-20);
        assert_eq!(s, 1.0);
        assert_eq!(e, 1e-20);
    }

    #[test]
    fn dot2_recovers_cancelled_terms() {
        // naive evaluation returns 0; the exact answer is 1
        let a = [1e16, 1.0, -1e16];
        let b = [1.0, 1.0, 1.0];
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert_eq!(naive, 0.0);
        assert_eq!(dot2(&a, &b), 1.0);
        assert_eq!(sum2(&a), 1.0);
    }
}
