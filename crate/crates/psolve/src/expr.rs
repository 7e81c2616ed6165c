//! Expression trees for ODE input and solution output.
//!
//! The node set is deliberately small: literals, the imaginary unit `I`,
//! variables, the four arithmetic operations, powers with exact rational
//! exponents, the five supported function kernels, and an unevaluated
//! integral node `Int(integrand, var)` that only ever appears in output.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use std::fmt;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash)]
pub enum FuncKind {
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
}

impl FuncKind {
    pub fn name(self) -> &'static str {
        match self {
            FuncKind::Exp => "exp",
            FuncKind::Ln => "ln",
            FuncKind::Sin => "sin",
            FuncKind::Cos => "cos",
            FuncKind::Tan => "tan",
        }
    }

    pub fn from_name(name: &str) -> Option<FuncKind> {
        match name {
            "exp" => Some(FuncKind::Exp),
            "ln" => Some(FuncKind::Ln),
            "sin" => Some(FuncKind::Sin),
            "cos" => Some(FuncKind::Cos),
            "tan" => Some(FuncKind::Tan),
            _ => None,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
pub enum Expr {
    /// Exact rational literal.
    Num(BigRational),
    /// The imaginary unit, spelled `I`.
    ImagUnit,
    Var(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    /// Power with a nonzero reduced rational exponent.
    Pow(Box<Expr>, BigRational),
    Func(FuncKind, Box<Expr>),
    /// Unevaluated integral of the expression with respect to the variable.
    Int(Box<Expr>, String),
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn rational(num: i64, den: i64) -> Expr {
        Expr::Num(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(n) if n.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(n) if n.is_one())
    }

    /// Addition with literal folding; negative-leading right operands fold
    /// into subtraction.
    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x + y),
            (a, b) if a.is_zero() => b,
            (a, b) if b.is_zero() => a,
            (a, b) => match strip_leading_minus(&b) {
                Some(pos) => Expr::Sub(Box::new(a), Box::new(pos)),
                None => Expr::Add(Box::new(a), Box::new(b)),
            },
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x - y),
            (a, b) if b.is_zero() => a,
            (a, b) if a.is_zero() => Expr::neg(b),
            (a, Expr::Neg(b)) => Expr::Add(Box::new(a), b),
            (a, b) => Expr::Sub(Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (Expr::Num(x), Expr::Num(y)) => Expr::Num(x * y),
            (a, b) if a.is_zero() || b.is_zero() => Expr::int(0),
            (a, b) if a.is_one() => b,
            (a, b) if b.is_one() => a,
            (a, b) => Expr::Mul(Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a, b) {
            (a, b) if b.is_one() => a,
            (Expr::Num(x), Expr::Num(y)) if !y.is_zero() => Expr::Num(x / y),
            (a, _b) if a.is_zero() => Expr::int(0),
            (a, b) => Expr::Div(Box::new(a), Box::new(b)),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a {
            Expr::Num(x) => Expr::Num(-x),
            Expr::Neg(inner) => *inner,
            a => Expr::Neg(Box::new(a)),
        }
    }

    pub fn pow(base: Expr, exp: BigRational) -> Expr {
        if exp.is_zero() {
            return Expr::int(1);
        }
        if exp.is_one() {
            return base;
        }
        if let Expr::Num(ref n) = base {
            if exp.denom().is_one() && !n.is_zero() {
                let k = exp.numer();
                if let Ok(k) = i32::try_from(k.clone()) {
                    let m = k.unsigned_abs() as usize;
                    let mut acc = BigRational::one();
                    for _ in 0..m {
                        acc *= n;
                    }
                    if k < 0 {
                        acc = acc.recip();
                    }
                    return Expr::Num(acc);
                }
            }
        }
        Expr::Pow(Box::new(base), exp)
    }

    pub fn pow_int(base: Expr, k: i64) -> Expr {
        Expr::pow(base, BigRational::from_integer(BigInt::from(k)))
    }

    pub fn func(kind: FuncKind, arg: Expr) -> Expr {
        Expr::Func(kind, Box::new(arg))
    }

    pub fn integral(integrand: Expr, var: &str) -> Expr {
        Expr::Int(Box::new(integrand), var.to_string())
    }

    /// Sum of a list of expressions (empty sum is 0).
    pub fn sum(items: Vec<Expr>) -> Expr {
        let mut it = items.into_iter().filter(|e| !e.is_zero());
        let first = match it.next() {
            None => return Expr::int(0),
            Some(e) => e,
        };
        it.fold(first, Expr::add)
    }

    /// Product of a list of expressions (empty product is 1).
    pub fn product(items: Vec<Expr>) -> Expr {
        let mut it = items.into_iter().filter(|e| !e.is_one());
        let first = match it.next() {
            None => return Expr::int(1),
            Some(e) => e,
        };
        it.fold(first, Expr::mul)
    }

    pub fn contains_integral(&self) -> bool {
        match self {
            Expr::Int(..) => true,
            Expr::Num(_) | Expr::ImagUnit | Expr::Var(_) => false,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.contains_integral() || b.contains_integral()
            }
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => a.contains_integral(),
        }
    }

    /// Formal derivative with respect to `var`. Function kernels follow the
    /// chain rule; an integral node differentiates to its integrand with
    /// respect to its own variable and to zero with respect to any other.
    pub fn derivative(&self, var: &str) -> Expr {
        match self {
            Expr::Num(_) | Expr::ImagUnit => Expr::int(0),
            Expr::Var(v) => {
                if v == var {
                    Expr::int(1)
                } else {
                    Expr::int(0)
                }
            }
            Expr::Add(a, b) => Expr::add(a.derivative(var), b.derivative(var)),
            Expr::Sub(a, b) => Expr::sub(a.derivative(var), b.derivative(var)),
            Expr::Neg(a) => Expr::neg(a.derivative(var)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.derivative(var), (**b).clone()),
                Expr::mul((**a).clone(), b.derivative(var)),
            ),
            Expr::Div(a, b) => {
                // (a/b)' = (a'b - ab')/b^2
                let num = Expr::sub(
                    Expr::mul(a.derivative(var), (**b).clone()),
                    Expr::mul((**a).clone(), b.derivative(var)),
                );
                Expr::div(num, Expr::pow_int((**b).clone(), 2))
            }
            Expr::Pow(b, r) => {
                let db = b.derivative(var);
                if db.is_zero() {
                    return Expr::int(0);
                }
                let r1 = r - BigRational::one();
                Expr::product(vec![Expr::Num(r.clone()), Expr::pow((**b).clone(), r1), db])
            }
            Expr::Func(kind, g) => {
                let dg = g.derivative(var);
                if dg.is_zero() {
                    return Expr::int(0);
                }
                let outer = match kind {
                    FuncKind::Exp => Expr::func(FuncKind::Exp, (**g).clone()),
                    FuncKind::Ln => {
                        return Expr::div(dg, (**g).clone());
                    }
                    FuncKind::Sin => Expr::func(FuncKind::Cos, (**g).clone()),
                    FuncKind::Cos => {
                        return Expr::neg(Expr::mul(dg, Expr::func(FuncKind::Sin, (**g).clone())));
                    }
                    FuncKind::Tan => Expr::add(
                        Expr::int(1),
                        Expr::pow_int(Expr::func(FuncKind::Tan, (**g).clone()), 2),
                    ),
                };
                Expr::mul(dg, outer)
            }
            Expr::Int(integrand, v) => {
                if v == var {
                    (**integrand).clone()
                } else {
                    Expr::int(0)
                }
            }
        }
    }

    /// JSON tree encoding. Schema: `{"op": "+", "args": [...]}` with leaves
    /// `{"var": "x"}`, `{"int": "5"}`, `{"rat": ["p","q"]}`,
    /// `{"fn": "sin", "arg": ...}` and
    /// `{"Int": {"integrand": ..., "var": "x"}}`.
    pub fn to_json(&self) -> Value {
        match self {
            Expr::Num(n) => {
                if n.denom().is_one() {
                    json!({ "int": n.numer().to_string() })
                } else {
                    json!({ "rat": [n.numer().to_string(), n.denom().to_string()] })
                }
            }
            Expr::ImagUnit => json!({ "var": "I" }),
            Expr::Var(v) => json!({ "var": v }),
            Expr::Add(a, b) => json!({ "op": "+", "args": [a.to_json(), b.to_json()] }),
            Expr::Sub(a, b) => json!({ "op": "-", "args": [a.to_json(), b.to_json()] }),
            Expr::Mul(a, b) => json!({ "op": "*", "args": [a.to_json(), b.to_json()] }),
            Expr::Div(a, b) => json!({ "op": "/", "args": [a.to_json(), b.to_json()] }),
            Expr::Neg(a) => json!({ "op": "neg", "args": [a.to_json()] }),
            Expr::Pow(b, r) => {
                let e = Expr::Num(r.clone());
                json!({ "op": "^", "args": [b.to_json(), e.to_json()] })
            }
            Expr::Func(kind, arg) => json!({ "fn": kind.name(), "arg": arg.to_json() }),
            Expr::Int(integrand, v) => {
                json!({ "Int": { "integrand": integrand.to_json(), "var": v } })
            }
        }
    }

    pub fn from_json(v: &Value) -> Result<Expr> {
        let obj = v
            .as_object()
            .ok_or_else(|| Error::BadInput(format!("expression node must be an object: {v}")))?;
        if let Some(i) = obj.get("int") {
            let s = i
                .as_str()
                .ok_or_else(|| Error::BadInput("'int' must be a string".into()))?;
            let n: BigInt = s
                .parse()
                .map_err(|_| Error::BadInput(format!("bad integer literal {s}")))?;
            return Ok(Expr::Num(BigRational::from_integer(n)));
        }
        if let Some(r) = obj.get("rat") {
            let arr = r
                .as_array()
                .filter(|a| a.len() == 2)
                .ok_or_else(|| Error::BadInput("'rat' must be a two-element array".into()))?;
            let p: BigInt = arr[0]
                .as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::BadInput("bad rational numerator".into()))?;
            let q: BigInt = arr[1]
                .as_str()
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| Error::BadInput("bad rational denominator".into()))?;
            if q.is_zero() {
                return Err(Error::BadInput("zero denominator in rational".into()));
            }
            return Ok(Expr::Num(BigRational::new(p, q)));
        }
        if let Some(name) = obj.get("var") {
            let s = name
                .as_str()
                .ok_or_else(|| Error::BadInput("'var' must be a string".into()))?;
            return Ok(if s == "I" {
                Expr::ImagUnit
            } else {
                Expr::Var(s.to_string())
            });
        }
        if let Some(f) = obj.get("fn") {
            let name = f
                .as_str()
                .ok_or_else(|| Error::BadInput("'fn' must be a string".into()))?;
            let kind = FuncKind::from_name(name).ok_or_else(|| Error::UnsupportedFunction {
                name: name.to_string(),
            })?;
            let arg = obj
                .get("arg")
                .ok_or_else(|| Error::BadInput("function node missing 'arg'".into()))?;
            return Ok(Expr::func(kind, Expr::from_json(arg)?));
        }
        if let Some(int_node) = obj.get("Int") {
            let integrand = int_node
                .get("integrand")
                .ok_or_else(|| Error::BadInput("Int node missing 'integrand'".into()))?;
            let var = int_node
                .get("var")
                .and_then(|s| s.as_str())
                .ok_or_else(|| Error::BadInput("Int node missing 'var'".into()))?;
            return Ok(Expr::integral(Expr::from_json(integrand)?, var));
        }
        if let Some(op) = obj.get("op") {
            let op = op
                .as_str()
                .ok_or_else(|| Error::BadInput("'op' must be a string".into()))?;
            let args = obj
                .get("args")
                .and_then(|a| a.as_array())
                .ok_or_else(|| Error::BadInput("operator node missing 'args'".into()))?;
            let parsed: Result<Vec<Expr>> = args.iter().map(Expr::from_json).collect();
            let mut parsed = parsed?;
            return match (op, parsed.len()) {
                ("neg", 1) => Ok(Expr::Neg(Box::new(parsed.pop().unwrap()))),
                ("+", 2) | ("-", 2) | ("*", 2) | ("/", 2) | ("^", 2) => {
                    let b = parsed.pop().unwrap();
                    let a = parsed.pop().unwrap();
                    match op {
                        "+" => Ok(Expr::Add(Box::new(a), Box::new(b))),
                        "-" => Ok(Expr::Sub(Box::new(a), Box::new(b))),
                        "*" => Ok(Expr::Mul(Box::new(a), Box::new(b))),
                        "/" => Ok(Expr::Div(Box::new(a), Box::new(b))),
                        _ => {
                            let r = match b {
                                Expr::Num(n) => n,
                                Expr::Neg(inner) => match *inner {
                                    Expr::Num(n) => -n,
                                    _ => {
                                        return Err(Error::BadInput(
                                            "power exponent must be rational".into(),
                                        ))
                                    }
                                },
                                _ => {
                                    return Err(Error::BadInput(
                                        "power exponent must be rational".into(),
                                    ))
                                }
                            };
                            Ok(Expr::Pow(Box::new(a), r))
                        }
                    }
                }
                _ => Err(Error::BadInput(format!(
                    "unknown operator '{op}' with {} args",
                    parsed.len()
                ))),
            };
        }
        Err(Error::BadInput(format!("unrecognized expression node: {v}")))
    }
}

/// When `e` carries a leading minus (a negation, a negative literal, or a
/// product/quotient whose head does), returns it with the sign flipped.
fn strip_leading_minus(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Neg(inner) => Some((**inner).clone()),
        Expr::Num(n) if n.is_negative() => Some(Expr::Num(-n.clone())),
        Expr::Mul(a, b) => {
            strip_leading_minus(a).map(|pos| Expr::Mul(Box::new(pos), b.clone()))
        }
        Expr::Div(a, b) => {
            strip_leading_minus(a).map(|pos| Expr::Div(Box::new(pos), b.clone()))
        }
        _ => None,
    }
}

// ---------------------------------------------------------------------------
// Text printing. The output re-parses to an equal tree; parenthesization
// follows the grammar precedence `^` > unary minus > `*`,`/` > `+`,`-`.
// ---------------------------------------------------------------------------

#[derive(PartialEq, PartialOrd, Clone, Copy)]
enum Prec {
    Sum = 1,
    Product = 2,
    Unary = 3,
    Power = 4,
    Atom = 5,
}

fn prec(e: &Expr) -> Prec {
    match e {
        Expr::Add(..) | Expr::Sub(..) => Prec::Sum,
        Expr::Mul(..) | Expr::Div(..) => Prec::Product,
        Expr::Neg(..) => Prec::Unary,
        Expr::Pow(..) => Prec::Power,
        Expr::Num(n) => {
            if n.is_negative() {
                Prec::Unary
            } else if n.denom().is_one() {
                Prec::Atom
            } else {
                Prec::Product // prints as p/q
            }
        }
        Expr::ImagUnit | Expr::Var(_) | Expr::Func(..) | Expr::Int(..) => Prec::Atom,
    }
}

fn write_prec(e: &Expr, min: Prec, out: &mut String) {
    let p = prec(e);
    let need = (p as u8) < (min as u8);
    if need {
        out.push('(');
    }
    write_expr(e, out);
    if need {
        out.push(')');
    }
}

fn write_expr(e: &Expr, out: &mut String) {
    match e {
        Expr::Num(n) => {
            if n.denom().is_one() {
                out.push_str(&n.numer().to_string());
            } else {
                out.push_str(&format!("{}/{}", n.numer(), n.denom()));
            }
        }
        Expr::ImagUnit => out.push('I'),
        Expr::Var(v) => out.push_str(v),
        Expr::Add(a, b) => {
            write_prec(a, Prec::Sum, out);
            out.push_str(" + ");
            write_prec(b, Prec::Product, out);
        }
        Expr::Sub(a, b) => {
            write_prec(a, Prec::Sum, out);
            out.push_str(" - ");
            write_prec(b, Prec::Product, out);
        }
        Expr::Mul(a, b) => {
            write_prec(a, Prec::Product, out);
            out.push('*');
            write_prec(b, Prec::Unary, out);
        }
        Expr::Div(a, b) => {
            write_prec(a, Prec::Product, out);
            out.push('/');
            write_prec(b, Prec::Unary, out);
        }
        Expr::Neg(a) => {
            out.push('-');
            write_prec(a, Prec::Power, out);
        }
        Expr::Pow(b, r) => {
            write_prec(b, Prec::Atom, out);
            out.push('^');
            if r.denom().is_one() && !r.is_negative() {
                out.push_str(&r.numer().to_string());
            } else if r.denom().is_one() {
                out.push_str(&format!("({})", r.numer()));
            } else {
                out.push_str(&format!("({}/{})", r.numer(), r.denom()));
            }
        }
        Expr::Func(kind, arg) => {
            out.push_str(kind.name());
            out.push('(');
            write_expr(arg, out);
            out.push(')');
        }
        Expr::Int(integrand, v) => {
            out.push_str("Int(");
            write_expr(integrand, out);
            out.push_str(", ");
            out.push_str(v);
            out.push(')');
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        write_expr(self, &mut s);
        write!(f, "{s}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn print_simple_sum() {
        let e = Expr::add(
            Expr::mul(Expr::int(2), Expr::var("x")),
            Expr::var("y"),
        );
        assert_eq!(e.to_string(), "2*x + y");
    }

    #[test]
    fn print_integrating_factor_form() {
        // exp(-cos(x))/(y - sin(x))^2
        let e = Expr::div(
            Expr::func(FuncKind::Exp, Expr::neg(Expr::func(FuncKind::Cos, Expr::var("x")))),
            Expr::pow_int(
                Expr::sub(Expr::var("y"), Expr::func(FuncKind::Sin, Expr::var("x"))),
                2,
            ),
        );
        assert_eq!(e.to_string(), "exp(-cos(x))/(y - sin(x))^2");
    }

    #[test]
    fn print_integral_node() {
        let e = Expr::integral(
            Expr::func(FuncKind::Exp, Expr::neg(Expr::func(FuncKind::Cos, Expr::var("x")))),
            "x",
        );
        assert_eq!(e.to_string(), "Int(exp(-cos(x)), x)");
    }

    #[test]
    fn derivative_chain_rule() {
        // d/dx exp(x^2) = 2*x^1*exp(x^2) after folding
        let e = Expr::func(FuncKind::Exp, Expr::pow_int(Expr::var("x"), 2));
        let d = e.derivative("x");
        assert_eq!(d.to_string(), "2*x*exp(x^2)");
        assert!(e.derivative("y").is_zero());
    }

    #[test]
    fn derivative_of_integral_node() {
        let e = Expr::integral(Expr::func(FuncKind::Exp, Expr::var("x")), "x");
        assert_eq!(e.derivative("x").to_string(), "exp(x)");
        assert!(e.derivative("y").is_zero());
    }

    #[test]
    fn json_round_trip() {
        let e = Expr::div(
            Expr::add(
                Expr::func(FuncKind::Ln, Expr::var("x")),
                Expr::mul(Expr::rational(1, 2), Expr::ImagUnit),
            ),
            Expr::pow(Expr::var("y"), BigRational::new(BigInt::from(3), BigInt::from(2))),
        );
        let j = e.to_json();
        let back = Expr::from_json(&j).unwrap();
        assert_eq!(e, back);
    }

    #[test]
    fn json_integral_round_trip() {
        let e = Expr::integral(Expr::func(FuncKind::Exp, Expr::neg(Expr::var("x"))), "x");
        assert_eq!(Expr::from_json(&e.to_json()).unwrap(), e);
    }
}
