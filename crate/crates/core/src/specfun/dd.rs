//! Minimal double-double arithmetic (~31 significant digits).
//!
//! The exponential-integral power series loses ~e^|x| of relative precision
//! to cancellation; evaluating it in plain f64 caps the series branch at
//! roughly 1e-8 relative error near |x| = 15. Carrying the summation, the
//! Euler constant and ln|x| in hi/lo pairs keeps the branch accurate to
//! better than 1e-12 over its whole range.

#[derive(Debug, Clone, Copy)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

/// Euler–Mascheroni constant as a hi/lo pair.
pub(crate) const EULER: Dd = Dd { hi: 0.577_215_664_901_532_9, lo: -4.942_915_152_430_612e-18 };
/// ln 2 as a hi/lo pair.
pub(crate) const LN2: Dd = Dd { hi: 0.693_147_180_559_945_3, lo: 2.319_046_813_846_3e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let v = s - a;
    (s, (a - (s - v)) + (b - v))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl Dd {
    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.hi + self.lo
    }

    pub fn add(self, other: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, other.hi);
        let (hi, lo) = quick_two_sum(s, e + self.lo + other.lo);
        Dd { hi, lo }
    }

    pub fn sub(self, other: Dd) -> Dd {
        self.add(Dd { hi: -other.hi, lo: -other.lo })
    }

    pub fn mul(self, other: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, other.hi);
        let e = e + self.hi * other.lo + self.lo * other.hi;
        let (hi, lo) = quick_two_sum(p, e);
        Dd { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Dd {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Dd { hi, lo }
    }

    pub fn div_f64(self, b: f64) -> Dd {
        let q1 = self.hi / b;
        let (p, e) = two_prod(q1, b);
        let r = (self.hi - p - e + self.lo) / b;
        let (hi, lo) = quick_two_sum(q1, r);
        Dd { hi, lo }
    }

    pub fn div(self, other: Dd) -> Dd {
        let q1 = self.hi / other.hi;
        let r = self.sub(other.mul_f64(q1));
        let q2 = r.hi / other.hi;
        let r = r.sub(other.mul_f64(q2));
        let q3 = r.hi / other.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo }.add(Dd::from_f64(q3))
    }

    pub fn scale_pow2(self, k: i32) -> Dd {
        let f = (2.0f64).powi(k);
        Dd { hi: self.hi * f, lo: self.lo * f }
    }
}

/// exp of a double-double, by ln2 range reduction and a Taylor tail.
pub(crate) fn dd_exp(a: Dd) -> Dd {
    let k = (a.hi / LN2.hi).round();
    let r = a.sub(LN2.mul_f64(k));
    // |r| <= ln2/2; the series reaches dd precision in ~25 terms.
    let mut term = Dd::from_f64(1.0);
    let mut sum = Dd::from_f64(1.0);
    for n in 1..40 {
        term = term.mul(r).div_f64(n as f64);
        sum = sum.add(term);
        if term.hi.abs() < 1e-35 * sum.hi.abs() {
            break;
        }
    }
    sum.scale_pow2(k as i32)
}

/// Natural log of a positive f64 to double-double accuracy: one Newton
/// correction of the hardware log against `dd_exp`.
pub(crate) fn dd_ln(x: f64) -> Dd {
    debug_assert!(x > 0.0);
    let y0 = x.ln();
    let e = dd_exp(Dd::from_f64(y0));
    // r = x/e - 1 is ~1e-16, so ln(1+r) = r - r^2/2 suffices at dd precision.
    let r = Dd::from_f64(x).div(e).sub(Dd::from_f64(1.0));
    let corr = r.sub(r.mul(r).div_f64(2.0));
    Dd::from_f64(y0).add(corr)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_matches_known_pairs() {
        let l2 = dd_ln(2.0);
        assert!((l2.hi - LN2.hi).abs() < 1e-16);
        assert!((l2.value() - (LN2.hi + LN2.lo)).abs() < 1e-30);
    }

    #[test]
    fn exp_of_one() {
        let e = dd_exp(Dd::from_f64(1.0));
        assert!((e.value() - std::f64::consts::E).abs() < 1e-15);
        // the lo part must actually refine the hi part
        assert!((e.hi - std::f64::consts::E).abs() <= f64::EPSILON * std::f64::consts::E);
    }

    #[test]
    fn mul_div_roundtrip() {
        let a = Dd::from_f64(std::f64::consts::PI);
        let b = a.mul_f64(7.0).div_f64(7.0);
        assert!((b.value() - a.value()).abs() < 1e-30);
    }
}
