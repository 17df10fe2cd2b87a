//! Truncated power series over a finite field.

use crate::gf::{Fe, Field};

/// `Σ coeffs[k] t^k  mod t^coeffs.len()`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Series {
    pub coeffs: Vec<Fe>,
}

impl Series {
    pub fn zero(prec: usize) -> Series {
        Series {
            coeffs: vec![Fe::ZERO; prec],
        }
    }

    pub fn constant(c: Fe, prec: usize) -> Series {
        let mut s = Series::zero(prec);
        if prec > 0 {
            s.coeffs[0] = c;
        }
        s
    }

    /// `c + t`.
    pub fn affine(c: Fe, prec: usize) -> Series {
        let mut s = Series::constant(c, prec);
        if prec > 1 {
            s.coeffs[1] = Fe::ONE;
        }
        s
    }

    pub fn prec(&self) -> usize {
        self.coeffs.len()
    }

    pub fn truncate(&self, prec: usize) -> Series {
        Series {
            coeffs: self.coeffs[..prec.min(self.prec())].to_vec(),
        }
    }

    /// Index of the first nonzero coefficient within the known precision.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|c| !c.is_zero())
    }

    pub fn add(&self, f: &Field, other: &Series) -> Series {
        let n = self.prec().min(other.prec());
        Series {
            coeffs: (0..n).map(|k| f.add(self.coeffs[k], other.coeffs[k])).collect(),
        }
    }

    pub fn sub(&self, f: &Field, other: &Series) -> Series {
        let n = self.prec().min(other.prec());
        Series {
            coeffs: (0..n).map(|k| f.sub(self.coeffs[k], other.coeffs[k])).collect(),
        }
    }

    pub fn scale(&self, f: &Field, c: Fe) -> Series {
        Series {
            coeffs: self.coeffs.iter().map(|&a| f.mul(a, c)).collect(),
        }
    }

    /// `self += c · other` over the common precision.
    pub fn add_scaled(&mut self, f: &Field, c: Fe, other: &Series) {
        if c.is_zero() {
            return;
        }
        let n = self.prec().min(other.prec());
        self.coeffs.truncate(n);
        for (a, &b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            if !b.is_zero() {
                *a = f.add(*a, f.mul(c, b));
            }
        }
    }

    pub fn mul(&self, f: &Field, other: &Series) -> Series {
        let n = self.prec().min(other.prec());
        let mut out = vec![Fe::ZERO; n];
        for (i, &a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    out[i + j] = f.add(out[i + j], f.mul(a, b));
                }
            }
        }
        Series { coeffs: out }
    }

    /// Multiplicative inverse; the constant term must be nonzero.
    pub fn inv(&self, f: &Field) -> Option<Series> {
        let n = self.prec();
        if n == 0 {
            return Some(Series::zero(0));
        }
        let c0 = f.inv(self.coeffs[0]).ok()?;
        let mut out = vec![Fe::ZERO; n];
        out[0] = c0;
        for k in 1..n {
            let mut acc = Fe::ZERO;
            for j in 1..=k {
                acc = f.add(acc, f.mul(self.coeffs[j], out[k - j]));
            }
            out[k] = f.neg(f.mul(acc, c0));
        }
        Some(Series { coeffs: out })
    }

    /// Formal derivative; precision drops by one.
    pub fn derivative(&self, f: &Field) -> Series {
        Series {
            coeffs: (1..self.prec())
                .map(|k| f.mul(self.coeffs[k], f.from_int(k as i64)))
                .collect(),
        }
    }

    /// Drops the first `v` coefficients (division by `t^v`).
    pub fn shift_down(&self, v: usize) -> Series {
        Series {
            coeffs: self.coeffs[v.min(self.prec())..].to_vec(),
        }
    }

    pub fn pow(&self, f: &Field, e: usize) -> Series {
        let mut acc = Series::constant(Fe::ONE, self.prec());
        for _ in 0..e {
            acc = acc.mul(f, self);
        }
        acc
    }
}

/// A Laurent series `t^val · (c0 + c1 t + …)`, known up to absolute order
/// `val + coeffs.len()` (exclusive).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Laurent {
    pub val: i64,
    pub coeffs: Vec<Fe>,
}

impl Laurent {
    /// Coefficient of `t^k`, or `None` beyond the known precision.
    pub fn coeff(&self, k: i64) -> Option<Fe> {
        if k < self.val {
            return Some(Fe::ZERO);
        }
        self.coeffs.get((k - self.val) as usize).copied()
    }

    /// Absolute precision: coefficients below this order are known.
    pub fn abs_prec(&self) -> i64 {
        self.val + self.coeffs.len() as i64
    }
}

/// `num / den` as a Laurent series, both given as power series with the same
/// precision. Returns `None` when `den` vanishes to the full precision.
pub fn quotient(f: &Field, num: &Series, den: &Series) -> Option<Laurent> {
    let n = num.prec().min(den.prec());
    let v = den.truncate(n).valuation()?;
    let unit = den.truncate(n).shift_down(v);
    let inv = unit.inv(f)?;
    let prod = num.truncate(n - v).mul(f, &inv);
    Some(Laurent {
        val: -(v as i64),
        coeffs: prod.coeffs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::FieldSpec;

    fn f16() -> Field {
        Field::new(FieldSpec::new(2, &[1, 1, 0, 0, 1])).unwrap()
    }

    #[test]
    fn inverse_roundtrip() {
        let f = f16();
        let s = Series {
            coeffs: (1..12).map(|k| f.alpha_pow(k)).collect(),
        };
        let inv = s.inv(&f).unwrap();
        let one = s.mul(&f, &inv);
        assert_eq!(one, Series::constant(Fe::ONE, 11));
        assert!(Series::affine(Fe::ZERO, 5).inv(&f).is_none());
    }

    #[test]
    fn quotient_of_t_powers() {
        let f = f16();
        // (t^2 + t^3) / t^3 = t^-1 + 1
        let mut num = Series::zero(8);
        num.coeffs[2] = Fe::ONE;
        num.coeffs[3] = Fe::ONE;
        let mut den = Series::zero(8);
        den.coeffs[3] = Fe::ONE;
        let q = quotient(&f, &num, &den).unwrap();
        assert_eq!(q.val, -3);
        assert_eq!(q.coeff(-1), Some(Fe::ONE));
        assert_eq!(q.coeff(0), Some(Fe::ONE));
        assert_eq!(q.coeff(-2), Some(Fe::ZERO));
        assert_eq!(q.abs_prec(), 2);
        assert!(quotient(&f, &num, &Series::zero(8)).is_none());
    }

    #[test]
    fn derivative_in_char_two() {
        let f = f16();
        let s = Series {
            coeffs: vec![Fe::ONE; 5],
        };
        let d = s.derivative(&f);
        assert_eq!(d.coeffs, vec![Fe::ONE, Fe::ZERO, Fe::ONE, Fe::ZERO]);
    }
}
