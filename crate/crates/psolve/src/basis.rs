//! The basis of functions: elementary kernels collected from an ODE and
//! closed under differentiation.
//!
//! Every function application in the equation (`exp`, `ln`, `sin`, `cos`,
//! `tan`, rational powers) becomes a fresh variable `u_i`. Differentiating a
//! kernel may reference further kernels (`sin` needs `cos`) and may produce
//! rational entries (`ln(g)` has denominator `g`); the table records the
//! derivative of every `u_i` with respect to `x` and `y` as rational
//! functions in `(x, y, u1..um)` together with the set of denominators that
//! the derivative rules introduced.
//!
//! Inside the polynomial layer the independent and dependent variables are
//! always named `x` and `y`; the table remembers the user-facing names and
//! `unsubstitute` translates back.

use crate::error::{Error, Result};
use crate::expr::{Expr, FuncKind};
use crate::gcd::coprime_insert;
use crate::parse::OdeSpec;
use crate::poly::{MultiPoly, VarList};
use crate::ratfunc::RationalFunction;
use crate::scalar::GaussianRational;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::fmt;
use std::sync::Arc;

pub const DEFAULT_KERNEL_CAP: usize = 25;

/// An elementary function kernel with a canonical polynomial argument.
#[derive(Clone, PartialEq, Debug)]
pub enum FunctionKernel {
    /// `exp(arg)` with the argument sign-normalized (occurrences of
    /// `exp(-arg)` map to `u^-1`).
    Exp(MultiPoly),
    Ln(MultiPoly),
    /// `sin(arg)`, argument sign-normalized (`sin(-g)` maps to `-u`).
    Sin(MultiPoly),
    Cos(MultiPoly),
    Tan(MultiPoly),
    /// `base^(num/den)`; the exponent is in lowest terms with den > 1.
    RationalPower(MultiPoly, BigRational),
}

impl FunctionKernel {
    fn arg(&self) -> &MultiPoly {
        match self {
            FunctionKernel::Exp(a)
            | FunctionKernel::Ln(a)
            | FunctionKernel::Sin(a)
            | FunctionKernel::Cos(a)
            | FunctionKernel::Tan(a)
            | FunctionKernel::RationalPower(a, _) => a,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BasisEntry {
    /// Variable name, `u1`, `u2`, ...
    pub var: String,
    pub kernel: FunctionKernel,
    /// Total derivative of the kernel with respect to `x`, over the table
    /// variables.
    pub dx: RationalFunction,
    /// Total derivative with respect to `y`.
    pub dy: RationalFunction,
}

/// The closed basis for one ODE.
#[derive(Clone, Debug)]
pub struct BasisTable {
    pub indep: String,
    pub dep: String,
    entries: Vec<BasisEntry>,
    vars: Arc<VarList>,
    denominators: Vec<MultiPoly>,
}

impl BasisTable {
    pub fn entries(&self) -> &[BasisEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Full variable list `[x, y, u1..um]`.
    pub fn vars(&self) -> &Arc<VarList> {
        &self.vars
    }

    /// Normalized, pairwise coprime denominator factors introduced by the
    /// derivative rules.
    pub fn denominators(&self) -> &[MultiPoly] {
        &self.denominators
    }

    pub fn entry_for_var(&self, name: &str) -> Option<&BasisEntry> {
        self.entries.iter().find(|e| e.var == name)
    }

    /// Derivative equations in table order: `(u_i, du_i/dx, du_i/dy)`.
    pub fn dbasis(&self) -> Vec<(String, RationalFunction, RationalFunction)> {
        self.entries
            .iter()
            .map(|e| (e.var.clone(), e.dx.clone(), e.dy.clone()))
            .collect()
    }

    /// The kernel expression of one entry, with the user's variable names.
    pub fn kernel_expr(&self, idx: usize) -> Expr {
        let e = &self.entries[idx];
        match &e.kernel {
            FunctionKernel::Exp(a) => Expr::func(FuncKind::Exp, self.poly_to_expr(a)),
            FunctionKernel::Ln(a) => Expr::func(FuncKind::Ln, self.poly_to_expr(a)),
            FunctionKernel::Sin(a) => Expr::func(FuncKind::Sin, self.poly_to_expr(a)),
            FunctionKernel::Cos(a) => Expr::func(FuncKind::Cos, self.poly_to_expr(a)),
            FunctionKernel::Tan(a) => Expr::func(FuncKind::Tan, self.poly_to_expr(a)),
            FunctionKernel::RationalPower(p, r) => {
                Expr::pow(self.poly_to_expr(p), r.clone())
            }
        }
    }

    /// Replaces every `u_i` by its kernel expression.
    pub fn poly_to_expr(&self, p: &MultiPoly) -> Expr {
        let mut terms = Vec::new();
        for (m, c) in p.terms().collect::<Vec<_>>().into_iter().rev() {
            let neg = c.is_sign_negative();
            let c_abs = if neg { -c } else { c.clone() };
            let mut factors = Vec::new();
            if !c_abs.is_one() || m.is_one() {
                factors.push(coeff_expr(&c_abs));
            }
            for &(i, e) in m.exps() {
                let name = p.vars().name(i as usize);
                let base = self.var_expr(name);
                factors.push(Expr::pow_int(base, e as i64));
            }
            if neg {
                // negate the first factor so products print as -a*b*c
                factors[0] = Expr::neg(factors[0].clone());
            }
            terms.push(Expr::product(factors));
        }
        Expr::sum(terms)
    }

    fn var_expr(&self, name: &str) -> Expr {
        match name {
            "x" => Expr::var(&self.indep),
            "y" => Expr::var(&self.dep),
            _ => {
                let idx = self
                    .entries
                    .iter()
                    .position(|e| e.var == name)
                    .unwrap_or_else(|| panic!("unknown basis variable {name}"));
                self.kernel_expr(idx)
            }
        }
    }

    pub fn ratfunc_to_expr(&self, r: &RationalFunction) -> Expr {
        if r.is_polynomial() {
            self.poly_to_expr(r.num())
        } else {
            Expr::div(self.poly_to_expr(r.num()), self.poly_to_expr(r.den()))
        }
    }
}

impl fmt::Display for BasisTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, e)| format!("{} = {}", e.var, self.kernel_expr(i)))
            .collect();
        write!(f, "[{}]", items.join(", "))
    }
}

fn coeff_expr(c: &GaussianRational) -> Expr {
    let re = c.re().clone();
    let im = c.im().clone();
    let re_e = Expr::Num(re.clone());
    if im.is_zero() {
        return re_e;
    }
    let im_e = if im.is_one() {
        Expr::ImagUnit
    } else if (-im.clone()).is_one() {
        Expr::neg(Expr::ImagUnit)
    } else {
        Expr::mul(Expr::Num(im.clone()), Expr::ImagUnit)
    };
    if re.is_zero() {
        im_e
    } else if im.is_negative() {
        Expr::sub(re_e, match im_e {
            Expr::Neg(inner) => *inner,
            other => Expr::neg(other),
        })
    } else {
        Expr::add(re_e, im_e)
    }
}

/// Replaces basis variables in `p` by their kernel expressions.
pub fn unsubstitute(p: &MultiPoly, table: &BasisTable) -> Result<Expr> {
    for idx in 0..p.vars().len() {
        if p.contains_var(idx) {
            let name = p.vars().name(idx);
            if name != "x" && name != "y" && table.entry_for_var(name).is_none() {
                return Err(Error::UnknownVariable(name.to_string()));
            }
        }
    }
    Ok(table.poly_to_expr(p))
}

pub fn unsubstitute_ratfunc(r: &RationalFunction, table: &BasisTable) -> Result<Expr> {
    let num = unsubstitute(r.num(), table)?;
    if r.is_polynomial() {
        return Ok(num);
    }
    let den = unsubstitute(r.den(), table)?;
    Ok(Expr::div(num, den))
}

// ---------------------------------------------------------------------------
// Closure
// ---------------------------------------------------------------------------

struct Builder {
    indep: String,
    dep: String,
    kernels: Vec<FunctionKernel>,
    vars: Arc<VarList>,
    cap: usize,
}

impl Builder {
    fn lookup(&self, k: &FunctionKernel) -> Option<usize> {
        self.kernels.iter().position(|e| e == k)
    }

    fn register(&mut self, k: FunctionKernel) -> Result<usize> {
        if let Some(i) = self.lookup(&k) {
            return Ok(i);
        }
        if self.kernels.len() >= self.cap {
            return Err(Error::KernelCapExceeded(self.cap));
        }
        let idx = self.kernels.len();
        let name = format!("u{}", idx + 1);
        self.vars = self.vars.with_var(&name);
        self.kernels.push(k.clone());
        // sin and cos close over each other; register the partner right
        // away so table order stays deterministic
        match k {
            FunctionKernel::Sin(a) => {
                self.register(FunctionKernel::Cos(a))?;
            }
            FunctionKernel::Cos(a) => {
                self.register(FunctionKernel::Sin(a))?;
            }
            _ => {}
        }
        Ok(idx)
    }

    fn var_name(&self, idx: usize) -> String {
        format!("u{}", idx + 1)
    }

    /// Rewrites an expression as a rational function over the current
    /// variables, registering kernels on the way when `collect` is true.
    fn to_ratfunc(&mut self, e: &Expr, collect: bool) -> Result<RationalFunction> {
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
            Expr::Add(a, b) => Ok(self.to_ratfunc(a, collect)?.add(&self.to_ratfunc(b, collect)?)),
            Expr::Sub(a, b) => Ok(self.to_ratfunc(a, collect)?.sub(&self.to_ratfunc(b, collect)?)),
            Expr::Mul(a, b) => Ok(self.to_ratfunc(a, collect)?.mul(&self.to_ratfunc(b, collect)?)),
            Expr::Div(a, b) => {
                let num = self.to_ratfunc(a, collect)?;
                let den = self.to_ratfunc(b, collect)?;
                if den.is_zero() {
                    return Err(Error::BadInput("division by zero in input".into()));
                }
                Ok(num.div(&den))
            }
            Expr::Neg(a) => Ok(self.to_ratfunc(a, collect)?.neg()),
            Expr::Pow(b, r) => {
                let base = self.to_ratfunc(b, collect)?;
                if r.denom().is_one() {
                    let k = i64::try_from(r.numer().clone())
                        .map_err(|_| Error::BadInput("power exponent too large".into()))?;
                    if base.is_zero() && k < 0 {
                        return Err(Error::BadInput("division by zero in input".into()));
                    }
                    return Ok(base.pow(k));
                }
                // rational power: one kernel for the numerator, one for the
                // denominator when it is nontrivial
                let mut out = self.pow_kernel(base.num(), r, collect)?;
                if !base.den().is_one() {
                    let den_k = self.pow_kernel(base.den(), r, collect)?;
                    out = out.div(&den_k);
                }
                Ok(out)
            }
            Expr::Func(kind, arg) => {
                let g = self.to_ratfunc(arg, collect)?;
                if !g.is_polynomial() {
                    return Err(Error::NotPolynomialOverBasis(format!(
                        "argument of {} is not polynomial over the basis: {arg}",
                        kind.name()
                    )));
                }
                let g = g.num().clone();
                self.func_kernel(*kind, g, collect)
            }
            Expr::Int(..) => Err(Error::BadInput(
                "integral nodes are not allowed in ODE input".into(),
            )),
        }
    }

    fn pow_kernel(
        &mut self,
        base: &MultiPoly,
        r: &BigRational,
        collect: bool,
    ) -> Result<RationalFunction> {
        if let Some(c) = base.as_constant() {
            // constant^ (a/b) stays symbolic unless the constant is 0 or 1
            if c.is_zero() {
                return Ok(RationalFunction::zero(&self.vars));
            }
            if c.is_one() {
                return Ok(RationalFunction::one(&self.vars));
            }
        }
        // exponent a/b reduced; the kernel is base^(1/b), occurrences get
        // integer power a
        let unit = BigRational::new(num_bigint::BigInt::from(1), r.denom().clone());
        let kernel = FunctionKernel::RationalPower(base.remap(&self.vars), unit.clone());
        let idx = if collect {
            self.register(kernel)?
        } else {
            self.lookup(&kernel).ok_or_else(|| {
                Error::NotPolynomialOverBasis(format!(
                    "kernel {base}^({unit}) missing from the closed basis"
                ))
            })?
        };
        let v = MultiPoly::var(&self.vars, &self.var_name(idx));
        let a = i64::try_from(r.numer().clone())
            .map_err(|_| Error::BadInput("power exponent too large".into()))?;
        Ok(RationalFunction::from_poly(v).pow(a))
    }

    fn func_kernel(
        &mut self,
        kind: FuncKind,
        g: MultiPoly,
        collect: bool,
    ) -> Result<RationalFunction> {
        let g = g.remap(&self.vars);
        // sign normalization: exp(-g) = exp(g)^-1, sin(-g) = -sin(g),
        // cos(-g) = cos(g), tan(-g) = -tan(g)
        let negative = g.leading_coeff().is_sign_negative();
        let (kernel, flip_sign, invert) = match kind {
            FuncKind::Exp => {
                let arg = if negative { g.neg() } else { g };
                (FunctionKernel::Exp(arg), false, negative)
            }
            FuncKind::Ln => (FunctionKernel::Ln(g), false, false),
            FuncKind::Sin => {
                let arg = if negative { g.neg() } else { g };
                (FunctionKernel::Sin(arg), negative, false)
            }
            FuncKind::Cos => {
                let arg = if negative { g.neg() } else { g };
                (FunctionKernel::Cos(arg), false, false)
            }
            FuncKind::Tan => {
                let arg = if negative { g.neg() } else { g };
                (FunctionKernel::Tan(arg), negative, false)
            }
        };
        let idx = if collect {
            self.register(kernel)?
        } else {
            self.lookup(&kernel).ok_or_else(|| {
                Error::NotPolynomialOverBasis(format!(
                    "kernel {} missing from the closed basis",
                    kind.name()
                ))
            })?
        };
        let v = RationalFunction::from_poly(MultiPoly::var(&self.vars, &self.var_name(idx)));
        let v = if invert { v.inverse() } else { v };
        Ok(if flip_sign { v.neg() } else { v })
    }
}

/// Collects the kernels of `spec.rhs` and closes the set under
/// differentiation, with the default kernel cap.
pub fn close_basis(spec: &OdeSpec) -> Result<BasisTable> {
    close_basis_with_cap(spec, DEFAULT_KERNEL_CAP)
}

pub fn close_basis_with_cap(spec: &OdeSpec, cap: usize) -> Result<BasisTable> {
    let mut b = Builder {
        indep: spec.indep.clone(),
        dep: spec.dep.clone(),
        kernels: Vec::new(),
        vars: VarList::new(&["x", "y"]),
        cap,
    };
    b.to_ratfunc(&spec.rhs, true)?;
    let vars = b.vars.clone();
    // derivative entries, in table order
    let mut entries: Vec<BasisEntry> = Vec::new();
    for (i, kernel) in b.kernels.iter().enumerate() {
        let var = format!("u{}", i + 1);
        let u = RationalFunction::from_poly(MultiPoly::var(&vars, &var));
        let x_idx = vars.index_of("x").unwrap();
        let y_idx = vars.index_of("y").unwrap();
        let arg = kernel.arg().remap(&vars);
        let gx = total_derivative(&arg, x_idx, &entries, &vars);
        let gy = total_derivative(&arg, y_idx, &entries, &vars);
        let (dx, dy) = match kernel {
            FunctionKernel::Exp(_) => (gx.mul(&u), gy.mul(&u)),
            FunctionKernel::Ln(g) => {
                let g = RationalFunction::from_poly(g.remap(&vars));
                (gx.div(&g), gy.div(&g))
            }
            FunctionKernel::Sin(g) => {
                let cos_idx = b
                    .lookup(&FunctionKernel::Cos(g.clone()))
                    .expect("cos partner is always registered");
                let cos_v =
                    RationalFunction::from_poly(MultiPoly::var(&vars, &b.var_name(cos_idx)));
                (gx.mul(&cos_v), gy.mul(&cos_v))
            }
            FunctionKernel::Cos(g) => {
                let sin_idx = b
                    .lookup(&FunctionKernel::Sin(g.clone()))
                    .expect("sin partner is always registered");
                let sin_v =
                    RationalFunction::from_poly(MultiPoly::var(&vars, &b.var_name(sin_idx)));
                (gx.mul(&sin_v).neg(), gy.mul(&sin_v).neg())
            }
            FunctionKernel::Tan(_) => {
                let sec2 = RationalFunction::one(&vars).add(&u.mul(&u));
                (gx.mul(&sec2), gy.mul(&sec2))
            }
            FunctionKernel::RationalPower(p, unit) => {
                // d(p^(1/b)) = (1/b) * u * p' / p
                let p_rf = RationalFunction::from_poly(p.remap(&vars));
                let px = total_derivative(&p.remap(&vars), x_idx, &entries, &vars);
                let py = total_derivative(&p.remap(&vars), y_idx, &entries, &vars);
                let scale = RationalFunction::constant(
                    &vars,
                    GaussianRational::from_rational(unit.clone()),
                );
                (
                    scale.mul(&u).mul(&px).div(&p_rf),
                    scale.mul(&u).mul(&py).div(&p_rf),
                )
            }
        };
        entries.push(BasisEntry {
            var,
            kernel: kernel.clone(),
            dx,
            dy,
        });
    }
    // denominator set: every entry denominator, split pairwise coprime
    let mut denominators = Vec::new();
    for e in &entries {
        for d in [e.dx.den(), e.dy.den()] {
            if !d.is_one() {
                coprime_insert(&mut denominators, d);
            }
        }
    }
    Ok(BasisTable {
        indep: spec.indep.clone(),
        dep: spec.dep.clone(),
        entries,
        vars,
        denominators,
    })
}

/// Chain-rule derivative of a polynomial argument through the entries built
/// so far: d(g)/dv = dg/dv + sum_j du_j/dv * dg/du_j.
fn total_derivative(
    g: &MultiPoly,
    v_idx: usize,
    entries: &[BasisEntry],
    vars: &Arc<VarList>,
) -> RationalFunction {
    let mut out = RationalFunction::from_poly(g.partial_derivative(v_idx));
    for (j, e) in entries.iter().enumerate() {
        let u_idx = vars
            .index_of(&format!("u{}", j + 1))
            .expect("entry variable present");
        let partial = g.partial_derivative(u_idx);
        if partial.is_zero() {
            continue;
        }
        let dv = if vars.name(v_idx) == "x" { &e.dx } else { &e.dy };
        out = out.add(&dv.mul_poly(&partial));
    }
    out
}

/// Total derivative of a polynomial over the table variables, with the
/// chain rule through every basis entry.
pub fn total_derivative_poly(
    p: &MultiPoly,
    wrt_x: bool,
    table: &BasisTable,
) -> RationalFunction {
    let vars = table.vars();
    let v_idx = vars
        .index_of(if wrt_x { "x" } else { "y" })
        .expect("x and y are always present");
    total_derivative(&p.remap(vars), v_idx, table.entries(), vars)
}

/// Total derivative of a rational function via the quotient rule.
pub fn total_derivative_ratfunc(
    r: &RationalFunction,
    wrt_x: bool,
    table: &BasisTable,
) -> RationalFunction {
    let r = r.remap(table.vars());
    let dnum = total_derivative_poly(r.num(), wrt_x, table);
    if r.den().is_one() {
        return dnum;
    }
    let dden = total_derivative_poly(r.den(), wrt_x, table);
    let den_rf = RationalFunction::from_poly(r.den().clone());
    dnum.div(&den_rf)
        .sub(&dden.mul_poly(r.num()).div(&den_rf.mul(&den_rf)))
}

/// Rewrites the right-hand side over the closed basis as `M/N` with
/// `gcd(M, N)` constant and `N` monic.
pub fn polynomialize(spec: &OdeSpec, table: &BasisTable) -> Result<(MultiPoly, MultiPoly)> {
    let mut b = Builder {
        indep: spec.indep.clone(),
        dep: spec.dep.clone(),
        kernels: table.entries.iter().map(|e| e.kernel.clone()).collect(),
        vars: table.vars.clone(),
        cap: table.entries.len(),
    };
    let rf = b.to_ratfunc(&spec.rhs, false)?;
    Ok((rf.num().remap(&table.vars), rf.den().remap(&table.vars)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::parse_ode;

    fn kernel_names(t: &BasisTable) -> Vec<String> {
        (0..t.len()).map(|i| t.kernel_expr(i).to_string()).collect()
    }

    #[test]
    fn closes_ln_sin_example() {
        // {ln x, sin x} closes to {ln x, sin x, cos x} with denominator {x}
        let ode = parse_ode("y' = (ln(x)+sin(x))/y").unwrap();
        let t = close_basis(&ode).unwrap();
        assert_eq!(kernel_names(&t), vec!["ln(x)", "sin(x)", "cos(x)"]);
        assert_eq!(t.denominators().len(), 1);
        assert_eq!(t.denominators()[0].to_string(), "x");
        // du1/dx = 1/x
        assert_eq!(t.entries()[0].dx.to_string(), "1/x");
        assert!(t.entries()[0].dy.is_zero());
        // du2/dx = u3, du3/dx = -u2
        assert_eq!(t.entries()[1].dx.to_string(), "u3");
        assert_eq!(t.entries()[2].dx.to_string(), "-u2");
    }

    #[test]
    fn simple_example_basis_order() {
        // cos first (paired with sin), then exp(x) from the normalized e^-x
        let ode = parse_ode("y' = y*(cos(x)+y*exp(-x)+1)/cos(x)").unwrap();
        let t = close_basis(&ode).unwrap();
        assert_eq!(kernel_names(&t), vec!["cos(x)", "sin(x)", "exp(x)"]);
        assert!(t.denominators().is_empty());
        // du1/dx = -u2, du2/dx = u1, du3/dx = u3, all d/dy = 0
        assert_eq!(t.entries()[0].dx.to_string(), "-u2");
        assert_eq!(t.entries()[1].dx.to_string(), "u1");
        assert_eq!(t.entries()[2].dx.to_string(), "u3");
        assert!(t.entries().iter().all(|e| e.dy.is_zero()));
    }

    #[test]
    fn tan_closes_without_growth() {
        let ode = parse_ode("y' = tan(x)").unwrap();
        let t = close_basis(&ode).unwrap();
        assert_eq!(kernel_names(&t), vec!["tan(x)"]);
        assert!(t.denominators().is_empty());
        assert_eq!(t.entries()[0].dx.to_string(), "u1^2 + 1");
    }

    #[test]
    fn exp_of_y() {
        let ode = parse_ode("y' = exp(y)").unwrap();
        let t = close_basis(&ode).unwrap();
        assert_eq!(kernel_names(&t), vec!["exp(y)"]);
        assert!(t.entries()[0].dx.is_zero());
        assert_eq!(t.entries()[0].dy.to_string(), "u1");
    }

    #[test]
    fn closure_is_idempotent() {
        let ode = parse_ode("y' = sin(x)*cos(x) + sin(x)").unwrap();
        let t = close_basis(&ode).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn polynomialize_ln_sin_example() {
        let ode = parse_ode("y' = (ln(x)+sin(x))/y").unwrap();
        let t = close_basis(&ode).unwrap();
        let (m, n) = polynomialize(&ode, &t).unwrap();
        assert_eq!(m.to_string(), "u1 + u2");
        assert_eq!(n.to_string(), "y");
    }

    #[test]
    fn polynomialize_clears_exp_minus_x() {
        // y*(cos x + y e^-x + 1)/cos x becomes y(u1 u3 + y + u3)/(u1 u3)
        let ode = parse_ode("y' = y*(cos(x)+y*exp(-x)+1)/cos(x)").unwrap();
        let t = close_basis(&ode).unwrap();
        let (m, n) = polynomialize(&ode, &t).unwrap();
        assert_eq!(n.to_string(), "u1*u3");
        let y = MultiPoly::var(t.vars(), "y");
        let u1 = MultiPoly::var(t.vars(), "u1");
        let u3 = MultiPoly::var(t.vars(), "u3");
        let expect = y.mul(&u1.mul(&u3).add(&y).add(&u3));
        assert_eq!(m, expect);
    }

    #[test]
    fn polynomialize_zero_rhs() {
        let ode = parse_ode("y' = 0").unwrap();
        let t = close_basis(&ode).unwrap();
        let (m, n) = polynomialize(&ode, &t).unwrap();
        assert!(m.is_zero());
        assert!(n.is_one());
    }

    #[test]
    fn kamke_21_basis() {
        let ode = parse_ode("y' = y^2 - y*sin(x) + cos(x)").unwrap();
        let t = close_basis(&ode).unwrap();
        assert_eq!(kernel_names(&t), vec!["sin(x)", "cos(x)"]);
        let (m, n) = polynomialize(&ode, &t).unwrap();
        assert!(n.is_one());
        assert_eq!(m.to_string(), "y^2 - y*u1 + u2");
    }

    #[test]
    fn rational_power_kernel() {
        let ode = parse_ode("y' = (x^2+1)^(1/2)").unwrap();
        let t = close_basis(&ode).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(kernel_names(&t), vec!["(x^2 + 1)^(1/2)"]);
        // du/dx = (1/2) u (2x)/(x^2+1) = x*u/(x^2+1)
        let e = &t.entries()[0];
        assert_eq!(e.dx.to_string(), "x*u1/(x^2 + 1)");
        assert_eq!(t.denominators().len(), 1);
        assert_eq!(t.denominators()[0].to_string(), "x^2 + 1");
    }

    #[test]
    fn unsubstitute_round_trip() {
        let ode = parse_ode("y' = y*(cos(x)+y*exp(-x)+1)/cos(x)").unwrap();
        let t = close_basis(&ode).unwrap();
        // u1*u3 -> cos(x)*exp(x)
        let p = MultiPoly::var(t.vars(), "u1").mul(&MultiPoly::var(t.vars(), "u3"));
        assert_eq!(unsubstitute(&p, &t).unwrap().to_string(), "cos(x)*exp(x)");
        // plain x + y stays put
        let q = MultiPoly::var(t.vars(), "x").add(&MultiPoly::var(t.vars(), "y"));
        assert_eq!(unsubstitute(&q, &t).unwrap().to_string(), "x + y");
        // -u1*u2*u3 -> -cos(x)*sin(x)*exp(x)
        let r = p.mul(&MultiPoly::var(t.vars(), "u2")).neg();
        assert_eq!(
            unsubstitute(&r, &t).unwrap().to_string(),
            "-cos(x)*sin(x)*exp(x)"
        );
    }

    #[test]
    fn differential_consistency() {
        // unsubstituting the stored dx entry equals the direct chain-rule
        // derivative of the kernel expression
        for text in [
            "y' = (ln(x)+sin(x))/y",
            "y' = y*(cos(x)+y*exp(-x)+1)/cos(x)",
            "y' = exp(y) + tan(x)",
        ] {
            let ode = parse_ode(text).unwrap();
            let t = close_basis(&ode).unwrap();
            for i in 0..t.len() {
                let direct = t.kernel_expr(i).derivative("x");
                let stored = t.ratfunc_to_expr(&t.entries()[i].dx);
                // compare by re-polynomializing both sides over the table
                let spec_a = OdeSpec {
                    rhs: direct.clone(),
                    indep: "x".into(),
                    dep: "y".into(),
                };
                let spec_b = OdeSpec {
                    rhs: stored.clone(),
                    indep: "x".into(),
                    dep: "y".into(),
                };
                let (ma, na) = polynomialize(&spec_a, &t).unwrap();
                let (mb, nb) = polynomialize(&spec_b, &t).unwrap();
                // cross-multiplied equality ma*nb == mb*na
                assert_eq!(ma.mul(&nb), mb.mul(&na), "entry {i} of {text}");
            }
        }
    }

    #[test]
    fn kernel_cap_gives_clean_error() {
        let ode = parse_ode("y' = sin(x) + sin(2*x) + sin(3*x)").unwrap();
        let err = close_basis_with_cap(&ode, 3).unwrap_err();
        assert!(matches!(err, Error::KernelCapExceeded(3)));
    }
}
