//! A function field for exact zero-testing of output expressions.
//!
//! Expressions are rationalized over a growing set of kernel variables
//! `w1, w2, ...`: one per distinct `ln`/`sin`/`cos`/`tan` argument, one per
//! exponential *atom*, one per root `p^(1/b)`, and one per unevaluated
//! integral. Each variable carries exact `d/dx` and `d/dy` entries, so a
//! formal total derivative exists for every rational combination.
//!
//! Exponentials are atomized so that multiplicative relations hold by
//! plain polynomial algebra: `exp(A)` with `A = sum c_t * B_t` (terms over
//! a common denominator) becomes `prod exp(B_t')^{k_t}` with integer `k_t`,
//! where each atom argument is content- and sign-normalized. This makes
//! `exp(y) * exp(-y - 1/x) = exp(-1/x)` an identity of the model rather
//! than a missed simplification.
//!
//! Roots keep their defining relation `w^b = p`; numerators are reduced by
//! these relations before the zero test.

use crate::error::{Error, Result};
use crate::expr::{Expr, FuncKind};
use crate::poly::{MultiPoly, VarList};
use crate::ratfunc::RationalFunction;
use crate::scalar::GaussianRational;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

#[derive(Clone, Debug, PartialEq)]
enum Kernel {
    /// Atomic exponential `exp(arg)`.
    Exp(RationalFunction),
    Ln(RationalFunction),
    Sin(RationalFunction),
    Cos(RationalFunction),
    Tan(RationalFunction),
    /// `p^(1/b)`, with the relation `w^b = p`.
    Root(MultiPoly, u32),
    /// Unevaluated integral of the rationalized integrand with respect to
    /// `x` or `y`.
    Integral(RationalFunction, bool /* with respect to x */),
}

#[derive(Clone, Debug)]
struct Entry {
    kernel: Kernel,
    dx: RationalFunction,
    dy: RationalFunction,
}

/// The rationalization context. Mutable because expressions introduce new
/// kernels as they are processed.
pub struct FuncField {
    indep: String,
    dep: String,
    vars: Arc<VarList>,
    entries: Vec<Entry>,
}

impl FuncField {
    pub fn new(indep: &str, dep: &str) -> FuncField {
        FuncField {
            indep: indep.to_string(),
            dep: dep.to_string(),
            vars: VarList::new(&["x", "y"]),
            entries: Vec::new(),
        }
    }

    pub fn for_table(table: &crate::basis::BasisTable) -> FuncField {
        FuncField::new(&table.indep, &table.dep)
    }

    fn var_name(idx: usize) -> String {
        format!("w{}", idx + 1)
    }

    fn entry_var(&self, idx: usize) -> RationalFunction {
        RationalFunction::from_poly(MultiPoly::var(&self.vars, &Self::var_name(idx)))
    }

    fn add_entry(&mut self, kernel: Kernel, dx: RationalFunction, dy: RationalFunction) -> usize {
        let idx = self.entries.len();
        self.entries.push(Entry { kernel, dx, dy });
        idx
    }

    fn lookup(&self, k: &Kernel) -> Option<usize> {
        self.entries.iter().position(|e| &e.kernel == k)
    }

    /// Total derivative of a rational function with respect to `x` or `y`,
    /// chaining through every kernel entry.
    pub fn total_derivative(&self, r: &RationalFunction, wrt_x: bool) -> RationalFunction {
        let r = r.remap(&self.vars);
        let num = r.num();
        let den = r.den();
        let dnum = self.total_derivative_poly(num, wrt_x);
        if den.is_one() {
            return dnum;
        }
        let dden = self.total_derivative_poly(den, wrt_x);
        // (n/d)' = (n' d - n d')/d^2
        let den_rf = RationalFunction::from_poly(den.clone());
        dnum.div(&den_rf)
            .sub(&dden.mul_poly(num).div(&den_rf.mul(&den_rf)))
    }

    fn total_derivative_poly(&self, p: &MultiPoly, wrt_x: bool) -> RationalFunction {
        let p = p.remap(&self.vars);
        let mut out = RationalFunction::zero(&self.vars);
        for (i, name) in self.vars.names().iter().enumerate() {
            let partial = p.partial_derivative(i);
            if partial.is_zero() {
                continue;
            }
            let dv = if name == "x" {
                if wrt_x {
                    RationalFunction::one(&self.vars)
                } else {
                    continue;
                }
            } else if name == "y" {
                if wrt_x {
                    continue;
                } else {
                    RationalFunction::one(&self.vars)
                }
            } else {
                let idx: usize = name[1..].parse::<usize>().unwrap() - 1;
                let e = &self.entries[idx];
                let d = if wrt_x { &e.dx } else { &e.dy };
                d.remap(&self.vars)
            };
            if dv.is_zero() {
                continue;
            }
            out = out.add(&dv.mul_poly(&partial));
        }
        out
    }

    /// Rewrites an expression as a rational function over the field
    /// variables, registering kernels on the way.
    pub fn rationalize(&mut self, e: &Expr) -> Result<RationalFunction> {
        match e {
            Expr::Num(n) => Ok(RationalFunction::constant(
                &self.vars,
                GaussianRational::from_rational(n.clone()),
            )),
            Expr::ImagUnit => Ok(RationalFunction::constant(&self.vars, GaussianRational::i())),
            Expr::Var(v) => {
                let name = if *v == self.indep {
                    "x"
                } else if *v == self.dep {
                    "y"
                } else {
                    return Err(Error::UnknownVariable(v.clone()));
                };
                Ok(RationalFunction::from_poly(MultiPoly::var(&self.vars, name)))
            }
            Expr::Add(a, b) => {
                let a = self.rationalize(a)?;
                let b = self.rationalize(b)?;
                Ok(a.remap(&self.vars).add(&b.remap(&self.vars)))
            }
            Expr::Sub(a, b) => {
                let a = self.rationalize(a)?;
                let b = self.rationalize(b)?;
                Ok(a.remap(&self.vars).sub(&b.remap(&self.vars)))
            }
            Expr::Mul(a, b) => {
                let a = self.rationalize(a)?;
                let b = self.rationalize(b)?;
                Ok(a.remap(&self.vars).mul(&b.remap(&self.vars)))
            }
            Expr::Div(a, b) => {
                let a = self.rationalize(a)?;
                let b = self.rationalize(b)?;
                if b.is_zero() {
                    return Err(Error::BadInput("division by zero expression".into()));
                }
                Ok(a.remap(&self.vars).div(&b.remap(&self.vars)))
            }
            Expr::Neg(a) => Ok(self.rationalize(a)?.neg()),
            Expr::Pow(b, r) => {
                let base = self.rationalize(b)?;
                if r.denom().is_one() {
                    let k = i64::try_from(r.numer().clone())
                        .map_err(|_| Error::BadInput("power exponent too large".into()))?;
                    if base.is_zero() && k < 0 {
                        return Err(Error::BadInput("zero to a negative power".into()));
                    }
                    return Ok(base.pow(k));
                }
                let a = i64::try_from(r.numer().clone())
                    .map_err(|_| Error::BadInput("power exponent too large".into()))?;
                let b_den = u32::try_from(r.denom().clone())
                    .map_err(|_| Error::BadInput("power exponent too large".into()))?;
                let num_atom = self.ensure_root(base.num().clone(), b_den);
                let mut out = num_atom.pow(a);
                if !base.den().is_one() {
                    let den_atom = self.ensure_root(base.den().clone(), b_den);
                    out = out.div(&den_atom.pow(a));
                }
                Ok(out)
            }
            Expr::Func(kind, arg) => {
                let a = self.rationalize(arg)?;
                match kind {
                    FuncKind::Exp => Ok(self.ensure_exp(&a)),
                    FuncKind::Ln => Ok(self.ensure_simple(Kernel::Ln(a.remap(&self.vars)))),
                    FuncKind::Sin | FuncKind::Cos | FuncKind::Tan => {
                        Ok(self.ensure_trig(*kind, &a))
                    }
                }
            }
            Expr::Int(integrand, v) => {
                let wrt_x = if *v == self.indep {
                    true
                } else if *v == self.dep {
                    false
                } else {
                    return Err(Error::UnknownVariable(v.clone()));
                };
                let f = self.rationalize(integrand)?.remap(&self.vars);
                let kernel = Kernel::Integral(f.clone(), wrt_x);
                if let Some(idx) = self.lookup(&kernel) {
                    return Ok(self.entry_var(idx));
                }
                let zero = RationalFunction::zero(&self.vars);
                let (dx, dy) = if wrt_x {
                    (f, zero)
                } else {
                    (zero, f)
                };
                let idx = self.add_entry(kernel, dx, dy);
                self.vars = self.vars.with_var(&Self::var_name(idx));
                Ok(self.entry_var(idx))
            }
        }
    }

    /// Registers a non-exponential kernel whose derivative rule needs no
    /// partner, computing the chain-rule entries.
    fn ensure_simple(&mut self, kernel: Kernel) -> RationalFunction {
        if let Some(idx) = self.lookup(&kernel) {
            return self.entry_var(idx);
        }
        let arg = match &kernel {
            Kernel::Ln(a) | Kernel::Tan(a) => a.clone(),
            _ => unreachable!("ensure_simple handles ln and tan"),
        };
        let ax = self.total_derivative(&arg, true);
        let ay = self.total_derivative(&arg, false);
        let idx = self.entries.len();
        self.vars = self.vars.with_var(&Self::var_name(idx));
        let (ax, ay) = (ax.remap(&self.vars), ay.remap(&self.vars));
        let u = RationalFunction::from_poly(MultiPoly::var(&self.vars, &Self::var_name(idx)));
        let (dx, dy) = match &kernel {
            Kernel::Ln(a) => {
                let a = a.remap(&self.vars);
                (ax.div(&a), ay.div(&a))
            }
            Kernel::Tan(_) => {
                let sec2 = RationalFunction::one(&self.vars).add(&u.mul(&u));
                (ax.mul(&sec2), ay.mul(&sec2))
            }
            _ => unreachable!(),
        };
        self.add_entry(kernel, dx, dy);
        self.entry_var(idx)
    }

    fn ensure_trig(&mut self, kind: FuncKind, arg: &RationalFunction) -> RationalFunction {
        let arg = arg.remap(&self.vars);
        // sign normalization: sin(-g) = -sin(g), cos(-g) = cos(g),
        // tan(-g) = -tan(g)
        let negative = arg.num().leading_coeff().is_sign_negative();
        let a = if negative { arg.neg() } else { arg };
        match kind {
            FuncKind::Tan => {
                let v = self.ensure_simple(Kernel::Tan(a));
                if negative {
                    v.neg()
                } else {
                    v
                }
            }
            FuncKind::Sin | FuncKind::Cos => {
                let sin_k = Kernel::Sin(a.clone());
                let cos_k = Kernel::Cos(a.clone());
                if self.lookup(&sin_k).is_none() {
                    // register the pair together: each derivative needs the
                    // other variable
                    let ax = self.total_derivative(&a, true);
                    let ay = self.total_derivative(&a, false);
                    let sin_idx = self.entries.len();
                    let cos_idx = sin_idx + 1;
                    self.vars = self.vars.with_var(&Self::var_name(sin_idx));
                    self.vars = self.vars.with_var(&Self::var_name(cos_idx));
                    let ax = ax.remap(&self.vars);
                    let ay = ay.remap(&self.vars);
                    let sin_v =
                        RationalFunction::from_poly(MultiPoly::var(&self.vars, &Self::var_name(sin_idx)));
                    let cos_v =
                        RationalFunction::from_poly(MultiPoly::var(&self.vars, &Self::var_name(cos_idx)));
                    self.add_entry(sin_k.clone(), ax.mul(&cos_v), ay.mul(&cos_v));
                    self.add_entry(cos_k, ax.mul(&sin_v).neg(), ay.mul(&sin_v).neg());
                }
                let wanted = if kind == FuncKind::Sin {
                    sin_k
                } else {
                    Kernel::Cos(a)
                };
                let idx = self.lookup(&wanted).expect("pair registered");
                let v = self.entry_var(idx);
                if negative && kind == FuncKind::Sin {
                    v.neg()
                } else {
                    v
                }
            }
            _ => unreachable!(),
        }
    }

    /// Atomizes `exp(arg)` into a product of integer powers of atomic
    /// exponentials.
    fn ensure_exp(&mut self, arg: &RationalFunction) -> RationalFunction {
        let arg = arg.remap(&self.vars);
        if arg.is_zero() {
            return RationalFunction::one(&self.vars);
        }
        let mut out = RationalFunction::one(&self.vars);
        let den = arg.den().clone();
        let terms: Vec<(crate::poly::Monomial, GaussianRational)> = arg
            .num()
            .terms()
            .map(|(m, c)| (m.clone(), c.clone()))
            .collect();
        for (m, c) in terms {
            // c = sign * (p/q) * e with e a primitive, sign-normalized
            // Gaussian integer
            let (sign, p, q, e) = decompose_coeff(&c);
            let m_poly = MultiPoly::from_terms(&self.vars, vec![(m, GaussianRational::one())]);
            let scale = GaussianRational::new(
                BigRational::new(BigInt::one(), q.clone()),
                BigRational::zero(),
            );
            let atom_arg = RationalFunction::new(m_poly.mul_scalar(&(&e * &scale)), den.clone());
            let v = self.ensure_exp_atom(atom_arg);
            let k = i64::try_from(p).expect("exponent numerator fits in i64");
            out = out.mul(&v.pow(sign * k));
        }
        out
    }

    fn ensure_exp_atom(&mut self, arg: RationalFunction) -> RationalFunction {
        let kernel = Kernel::Exp(arg.clone());
        if let Some(idx) = self.lookup(&kernel) {
            return self.entry_var(idx);
        }
        let ax = self.total_derivative(&arg, true);
        let ay = self.total_derivative(&arg, false);
        let idx = self.entries.len();
        self.vars = self.vars.with_var(&Self::var_name(idx));
        let u = RationalFunction::from_poly(MultiPoly::var(&self.vars, &Self::var_name(idx)));
        let dx = ax.remap(&self.vars).mul(&u);
        let dy = ay.remap(&self.vars).mul(&u);
        self.add_entry(kernel, dx, dy);
        self.entry_var(idx)
    }

    fn ensure_root(&mut self, base: MultiPoly, b: u32) -> RationalFunction {
        let base = base.remap(&self.vars);
        let kernel = Kernel::Root(base.clone(), b);
        if let Some(idx) = self.lookup(&kernel) {
            return self.entry_var(idx);
        }
        let base_rf = RationalFunction::from_poly(base.clone());
        let px = self.total_derivative(&base_rf, true);
        let py = self.total_derivative(&base_rf, false);
        let idx = self.entries.len();
        self.vars = self.vars.with_var(&Self::var_name(idx));
        let u = RationalFunction::from_poly(MultiPoly::var(&self.vars, &Self::var_name(idx)));
        let scale = RationalFunction::constant(
            &self.vars,
            GaussianRational::from_ratio(1, b as i64),
        );
        let base_rf = base_rf.remap(&self.vars);
        let dx = scale.mul(&u).mul(&px.remap(&self.vars)).div(&base_rf);
        let dy = scale.mul(&u).mul(&py.remap(&self.vars)).div(&base_rf);
        self.add_entry(kernel, dx, dy);
        self.entry_var(idx)
    }

    /// Reduces a polynomial by the root relations `w^b = p`.
    fn reduce_by_relations(&self, p: &MultiPoly) -> MultiPoly {
        let mut p = p.remap(&self.vars);
        loop {
            let mut changed = false;
            for (i, e) in self.entries.iter().enumerate() {
                if let Kernel::Root(base, b) = &e.kernel {
                    let w_idx = match self.vars.index_of(&Self::var_name(i)) {
                        Some(ix) => ix,
                        None => continue,
                    };
                    if p.degree_in(w_idx) >= *b {
                        // substitute w^b -> base once per pass
                        let base = base.remap(&self.vars);
                        let mut items = Vec::new();
                        let mut rewrote = false;
                        for (m, c) in p.terms() {
                            let k = m.exponent_of(w_idx);
                            if k >= *b && !rewrote {
                                let mut exps: Vec<(u32, u32)> = m
                                    .exps()
                                    .iter()
                                    .cloned()
                                    .filter(|&(v, _)| v as usize != w_idx)
                                    .collect();
                                if k - b > 0 {
                                    exps.push((w_idx as u32, k - b));
                                }
                                let rest = crate::poly::Monomial::from_exps(exps);
                                let part =
                                    base.mul_monomial(&rest, c);
                                for (m2, c2) in part.terms() {
                                    items.push((m2.clone(), c2.clone()));
                                }
                                rewrote = true;
                            } else {
                                items.push((m.clone(), c.clone()));
                            }
                        }
                        if rewrote {
                            p = MultiPoly::from_terms(&self.vars, items);
                            changed = true;
                        }
                    }
                }
            }
            if !changed {
                return p;
            }
        }
    }

    /// Exact zero test for an expression.
    pub fn is_zero_expr(&mut self, e: &Expr) -> Result<bool> {
        let r = self.rationalize(e)?;
        Ok(self.reduce_by_relations(r.num()).is_zero())
    }

    /// True when the expression has zero total derivative with respect to
    /// the chosen variable (a semantic freeness test).
    pub fn is_independent_of(&mut self, e: &Expr, wrt_x: bool) -> Result<bool> {
        let r = self.rationalize(e)?;
        let d = self.total_derivative(&r, wrt_x);
        Ok(self.reduce_by_relations(d.num()).is_zero())
    }
}

/// Splits a Gaussian rational into `sign * (p/q) * e` with `p/q` a positive
/// rational in lowest terms and `e` a primitive Gaussian integer whose
/// leading sign is canonical.
fn decompose_coeff(c: &GaussianRational) -> (i64, BigInt, BigInt, GaussianRational) {
    let re = c.re();
    let im = c.im();
    //共 denominator
    let q0 = re.denom().lcm(im.denom());
    let a = (re * BigRational::from_integer(q0.clone())).to_integer();
    let b = (im * BigRational::from_integer(q0.clone())).to_integer();
    let g = a.gcd(&b);
    debug_assert!(!g.is_zero());
    let mut e_re = &a / &g;
    let mut e_im = &b / &g;
    let mut sign = 1i64;
    let neg = e_re.is_negative() || (e_re.is_zero() && e_im.is_negative());
    if neg {
        e_re = -e_re;
        e_im = -e_im;
        sign = -1;
    }
    (
        sign,
        g,
        q0,
        GaussianRational::new(
            BigRational::from_integer(e_re),
            BigRational::from_integer(e_im),
        ),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_expr;

    fn zero(text: &str) -> bool {
        let mut f = FuncField::new("x", "y");
        let e = parse_expr(text).unwrap();
        f.is_zero_expr(&e).unwrap()
    }

    #[test]
    fn exponential_atom_relations() {
        assert!(zero("exp(x)*exp(-x) - 1"));
        assert!(zero("exp(2*x) - exp(x)^2"));
        assert!(zero("exp(x + y)*exp(-y) - exp(x)"));
        assert!(zero("exp(y)*exp(-y - 1/x) - exp(-1/x)"));
        assert!(!zero("exp(x) - exp(y)"));
        assert!(!zero("exp(x) + exp(-x)"));
    }

    #[test]
    fn derivative_based_constancy() {
        let mut f = FuncField::new("x", "y");
        // sin^2 + cos^2 has zero derivative even without the identity
        let e = parse_expr("sin(x)^2 + cos(x)^2").unwrap();
        assert!(f.is_independent_of(&e, true).unwrap());
        let e2 = parse_expr("sin(x)^2").unwrap();
        assert!(!f.is_independent_of(&e2, true).unwrap());
        // x-free but y-dependent
        let e3 = parse_expr("y*exp(y)").unwrap();
        assert!(f.is_independent_of(&e3, true).unwrap());
        assert!(!f.is_independent_of(&e3, false).unwrap());
    }

    #[test]
    fn integral_nodes_differentiate_formally() {
        let mut f = FuncField::new("x", "y");
        let e = parse_expr("Int(exp(-cos(x)), x)").unwrap();
        let r = f.rationalize(&e).unwrap();
        let dx = f.total_derivative(&r, true);
        // d/dx Int(f, x) = f
        let back = f.rationalize(&parse_expr("exp(-cos(x))").unwrap()).unwrap();
        assert!(dx.sub(&back.remap(dx.vars())).is_zero());
        let dy = f.total_derivative(&r, false);
        assert!(dy.is_zero());
    }

    #[test]
    fn root_relations_reduce() {
        // (x^(1/2))^2 - x = 0
        assert!(zero("(x^(1/2))^2 - x"));
        assert!(zero("x^(3/2) - x*x^(1/2)"));
        assert!(!zero("x^(1/2) - x"));
    }

    #[test]
    fn ln_and_trig_kernels() {
        assert!(zero("ln(x*y) - ln(x*y)"));
        assert!(zero("sin(-x) + sin(x)"));
        assert!(zero("cos(-x) - cos(x)"));
        assert!(zero("tan(-x) + tan(x)"));
        assert!(!zero("ln(x) + ln(y) - ln(x*y)")); // no log expansion by design
    }

    #[test]
    fn first_integral_identity_kamke() {
        // F = e^{-cos x}/(y - sin x) + Int(e^{-cos x}, x) satisfies
        // N F_x + M F_y = 0 for y' = y^2 - y sin x + cos x
        let f_expr = parse_expr("exp(-cos(x))/(y - sin(x)) + Int(exp(-cos(x)), x)").unwrap();
        let m = parse_expr("y^2 - y*sin(x) + cos(x)").unwrap();
        let fx = f_expr.derivative("x");
        let fy = f_expr.derivative("y");
        let identity = Expr::add(fx, Expr::mul(m, fy));
        let mut field = FuncField::new("x", "y");
        assert!(field.is_zero_expr(&identity).unwrap());
    }
}
