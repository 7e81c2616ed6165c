//! Rational functions: reduced fractions of multivariate polynomials.

use crate::gcd::poly_gcd;
use crate::poly::{MultiPoly, VarList};
use crate::scalar::GaussianRational;
use std::fmt;
use std::sync::Arc;

/// A fraction `num/den` with `den` nonzero and monic and `gcd(num, den)`
/// constant. Construction canonicalizes.
#[derive(Clone, PartialEq, Eq)]
pub struct RationalFunction {
    num: MultiPoly,
    den: MultiPoly,
}

impl RationalFunction {
    pub fn new(num: MultiPoly, den: MultiPoly) -> RationalFunction {
        assert!(!den.is_zero(), "rational function with zero denominator");
        let (num, den) = MultiPoly::unify(&num, &den);
        if num.is_zero() {
            return RationalFunction {
                den: MultiPoly::one(num.vars()),
                num,
            };
        }
        let g = poly_gcd(&num, &den);
        let (mut num, mut den) = if g.is_one() {
            (num, den)
        } else {
            (
                num.exact_divide(&g).expect("gcd divides"),
                den.exact_divide(&g).expect("gcd divides"),
            )
        };
        let lc = den.leading_coeff();
        if !lc.is_one() {
            let inv = lc.inverse();
            num = num.mul_scalar(&inv);
            den = den.mul_scalar(&inv);
        }
        RationalFunction { num, den }
    }

    pub fn from_poly(p: MultiPoly) -> RationalFunction {
        let den = MultiPoly::one(p.vars());
        RationalFunction { num: p, den }
    }

    pub fn zero(vars: &Arc<VarList>) -> RationalFunction {
        RationalFunction {
            num: MultiPoly::zero(vars),
            den: MultiPoly::one(vars),
        }
    }

    pub fn one(vars: &Arc<VarList>) -> RationalFunction {
        RationalFunction {
            num: MultiPoly::one(vars),
            den: MultiPoly::one(vars),
        }
    }

    pub fn constant(vars: &Arc<VarList>, c: GaussianRational) -> RationalFunction {
        RationalFunction {
            num: MultiPoly::constant(vars, c),
            den: MultiPoly::one(vars),
        }
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_constant(&self) -> Option<GaussianRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn vars(&self) -> &Arc<VarList> {
        self.num.vars()
    }

    pub fn remap(&self, target: &Arc<VarList>) -> RationalFunction {
        RationalFunction {
            num: self.num.remap(target),
            den: self.den.remap(target),
        }
    }

    pub fn add(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(
            self.num.mul(&other.den).add(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn sub(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(
            self.num.mul(&other.den).sub(&other.num.mul(&self.den)),
            self.den.mul(&other.den),
        )
    }

    pub fn neg(&self) -> RationalFunction {
        RationalFunction {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &RationalFunction) -> RationalFunction {
        RationalFunction::new(self.num.mul(&other.num), self.den.mul(&other.den))
    }

    pub fn mul_poly(&self, p: &MultiPoly) -> RationalFunction {
        RationalFunction::new(self.num.mul(p), self.den.clone())
    }

    pub fn div(&self, other: &RationalFunction) -> RationalFunction {
        assert!(!other.is_zero(), "division by zero rational function");
        RationalFunction::new(self.num.mul(&other.den), self.den.mul(&other.num))
    }

    pub fn inverse(&self) -> RationalFunction {
        assert!(!self.is_zero(), "inverse of zero rational function");
        RationalFunction::new(self.den.clone(), self.num.clone())
    }

    pub fn pow(&self, n: i64) -> RationalFunction {
        let m = n.unsigned_abs() as u32;
        let base = RationalFunction {
            num: self.num.pow(m),
            den: self.den.pow(m),
        };
        if n < 0 {
            base.inverse()
        } else {
            base
        }
    }

    /// Formal partial derivative via the quotient rule; treats every
    /// variable as independent.
    pub fn partial_derivative(&self, idx: usize) -> RationalFunction {
        let dn = self.num.partial_derivative(idx);
        let dd = self.den.partial_derivative(idx);
        if dd.is_zero() {
            return RationalFunction::new(dn, self.den.clone());
        }
        RationalFunction::new(
            dn.mul(&self.den).sub(&self.num.mul(&dd)),
            self.den.mul(&self.den),
        )
    }
}

impl fmt::Display for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            return write!(f, "{}", self.num);
        }
        let num = if self.num.term_count() > 1 {
            format!("({})", self.num)
        } else {
            format!("{}", self.num)
        };
        let den = if self.den.term_count() > 1 {
            format!("({})", self.den)
        } else {
            format!("{}", self.den)
        };
        write!(f, "{num}/{den}")
    }
}

impl fmt::Debug for RationalFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}
