//! Recursive-descent parser for ODE input and expressions.
//!
//! Grammar (precedence `^` > unary minus > `*`,`/` > `+`,`-`):
//!
//! ```text
//! ode   := ( name "'" | "diff" "(" name "," name ")" ) "=" expr
//! expr  := term  (("+"|"-") term)*
//! term  := unary (("*"|"/") unary)*
//! unary := "-" unary | power
//! power := atom [ "^" exponent ]
//! atom  := number | "I" | name | name "(" expr ")"
//!        | "Int" "(" expr "," name ")" | "(" expr ")"
//! ```
//!
//! Exponents must be exact rationals: an integer, a negated integer, or a
//! parenthesized constant expression such as `(1/2)`. Implicit
//! multiplication is not accepted.

use crate::error::{Error, Result};
use crate::expr::{Expr, FuncKind};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// A parsed first-order ODE `dep' = rhs(indep, dep)`.
#[derive(Clone, Debug)]
pub struct OdeSpec {
    pub rhs: Expr,
    pub indep: String,
    pub dep: String,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Name(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    Equals,
    Prime,
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
            line: 1,
            col: 1,
        }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.src.get(self.pos).copied();
        if let Some(b) = b {
            self.pos += 1;
            if b == b'\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
        b
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn tokens(mut self) -> Result<Vec<Token>> {
        let mut out = Vec::new();
        loop {
            while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
                self.bump();
            }
            let (line, col) = (self.line, self.col);
            let b = match self.bump() {
                None => {
                    out.push(Token {
                        tok: Tok::End,
                        line,
                        col,
                    });
                    return Ok(out);
                }
                Some(b) => b,
            };
            let tok = match b {
                b'+' => Tok::Plus,
                b'-' => Tok::Minus,
                b'*' => Tok::Star,
                b'/' => Tok::Slash,
                b'^' => Tok::Caret,
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                b',' => Tok::Comma,
                b'=' => Tok::Equals,
                b'\'' => Tok::Prime,
                b'0'..=b'9' => {
                    let start = self.pos - 1;
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    Tok::Num(text.parse().unwrap())
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let start = self.pos - 1;
                    while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_')
                    {
                        self.bump();
                    }
                    let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                    Tok::Name(text.to_string())
                }
                other => {
                    return Err(Error::Parse {
                        line,
                        col,
                        msg: format!("unexpected character '{}'", other as char),
                    })
                }
            };
            out.push(Token { tok, line, col });
        }
    }
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    allow_integral: bool,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        let (line, col) = self.here();
        Error::Parse {
            line,
            col,
            msg: msg.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek() == &tok {
            self.bump();
            Ok(())
        } else {
            Err(self.err(format!("expected {what}")))
        }
    }

    fn expect_name(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Name(n) => {
                self.bump();
                Ok(n)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    e = Expr::Add(Box::new(e), Box::new(rhs));
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    e = Expr::Sub(Box::new(e), Box::new(rhs));
                }
                _ => return Ok(e),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    e = Expr::Mul(Box::new(e), Box::new(rhs));
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    e = Expr::Div(Box::new(e), Box::new(rhs));
                }
                _ => return Ok(e),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == &Tok::Minus {
            self.bump();
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() != &Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let exp = self.exponent()?;
        if self.peek() == &Tok::Caret {
            return Err(self.err("chained powers need parentheses"));
        }
        if exp.is_zero() {
            return Err(self.err("zero exponent is not allowed; use an explicit constant"));
        }
        Ok(Expr::Pow(Box::new(base), exp))
    }

    fn exponent(&mut self) -> Result<BigRational> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(BigRational::from_integer(n))
            }
            Tok::Minus => {
                self.bump();
                match self.peek().clone() {
                    Tok::Num(n) => {
                        self.bump();
                        Ok(-BigRational::from_integer(n))
                    }
                    _ => Err(self.err("expected integer after '-' in exponent")),
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                eval_const(&e).ok_or_else(|| self.err("power exponent must be an exact rational"))
            }
            _ => Err(self.err("expected exponent: integer or parenthesized rational")),
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok(Expr::Num(BigRational::from_integer(n)))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Name(name) => {
                self.bump();
                if self.peek() == &Tok::LParen {
                    if name == "Int" {
                        if !self.allow_integral {
                            return Err(self.err("integral nodes are not allowed in ODE input"));
                        }
                        self.bump();
                        let integrand = self.expr()?;
                        self.expect(Tok::Comma, "',' in Int(...)")?;
                        let var = self.expect_name("integration variable")?;
                        self.expect(Tok::RParen, "')'")?;
                        return Ok(Expr::Int(Box::new(integrand), var));
                    }
                    let kind = FuncKind::from_name(&name)
                        .ok_or(Error::UnsupportedFunction { name: name.clone() })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::Func(kind, Box::new(arg)));
                }
                if name == "I" {
                    Ok(Expr::ImagUnit)
                } else {
                    Ok(Expr::Var(name))
                }
            }
            _ => Err(self.err("expected a number, variable, function call, or '('")),
        }
    }
}

/// Folds a constant expression to a rational, or None when it is not an
/// exact rational constant.
fn eval_const(e: &Expr) -> Option<BigRational> {
    match e {
        Expr::Num(n) => Some(n.clone()),
        Expr::Neg(a) => eval_const(a).map(|v| -v),
        Expr::Add(a, b) => Some(eval_const(a)? + eval_const(b)?),
        Expr::Sub(a, b) => Some(eval_const(a)? - eval_const(b)?),
        Expr::Mul(a, b) => Some(eval_const(a)? * eval_const(b)?),
        Expr::Div(a, b) => {
            let d = eval_const(b)?;
            if d.is_zero() {
                None
            } else {
                Some(eval_const(a)? / d)
            }
        }
        Expr::Pow(a, r) => {
            if !r.denom().is_one() {
                return None;
            }
            let base = eval_const(a)?;
            let k = i32::try_from(r.numer().clone()).ok()?;
            if base.is_zero() && k < 0 {
                return None;
            }
            let mut acc = BigRational::one();
            for _ in 0..k.unsigned_abs() {
                acc *= &base;
            }
            Some(if k < 0 { acc.recip() } else { acc })
        }
        _ => None,
    }
}

fn make_parser(text: &str, allow_integral: bool) -> Result<Parser> {
    let toks = Lexer::new(text).tokens()?;
    Ok(Parser {
        toks,
        pos: 0,
        allow_integral,
    })
}

/// Parses a bare expression. Integral nodes are accepted (this entry point
/// serves output re-parsing and corpus expectation fields).
pub fn parse_expr(text: &str) -> Result<Expr> {
    let mut p = make_parser(text, true)?;
    let e = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

/// Parses an ODE of the form `y' = <expr>` or `diff(y,x) = <expr>`.
pub fn parse_ode(text: &str) -> Result<OdeSpec> {
    let mut p = make_parser(text, false)?;
    let (dep, indep) = match p.peek().clone() {
        Tok::Name(n) if n == "diff" => {
            p.bump();
            p.expect(Tok::LParen, "'(' after diff")?;
            let dep = p.expect_name("dependent variable")?;
            p.expect(Tok::Comma, "',' in diff(y,x)")?;
            let indep = p.expect_name("independent variable")?;
            p.expect(Tok::RParen, "')'")?;
            (dep, indep)
        }
        Tok::Name(n) => {
            p.bump();
            if p.peek() == &Tok::Prime {
                p.bump();
                (n, "x".to_string())
            } else {
                return Err(p.err("expected y' = ... or diff(y,x) = ..."));
            }
        }
        _ => return Err(p.err("expected y' = ... or diff(y,x) = ...")),
    };
    if dep == indep {
        return Err(p.err("dependent and independent variables must differ"));
    }
    p.expect(Tok::Equals, "'='")?;
    let rhs = p.expr()?;
    if p.peek() != &Tok::End {
        return Err(p.err("unexpected trailing input"));
    }
    check_vars(&rhs, &dep, &indep)?;
    Ok(OdeSpec { rhs, indep, dep })
}

fn check_vars(e: &Expr, dep: &str, indep: &str) -> Result<()> {
    match e {
        Expr::Var(v) => {
            if v != dep && v != indep {
                Err(Error::UnknownVariable(v.clone()))
            } else {
                Ok(())
            }
        }
        Expr::Num(_) | Expr::ImagUnit => Ok(()),
        Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
            check_vars(a, dep, indep)?;
            check_vars(b, dep, indep)
        }
        Expr::Neg(a) | Expr::Pow(a, _) | Expr::Func(_, a) => check_vars(a, dep, indep),
        Expr::Int(..) => Err(Error::BadInput(
            "integral nodes are not allowed in ODE input".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_paper_input() {
        let ode = parse_ode("y' = (ln(x)+sin(x))/y").unwrap();
        assert_eq!(ode.dep, "y");
        assert_eq!(ode.indep, "x");
        assert_eq!(ode.rhs.to_string(), "(ln(x) + sin(x))/y");
    }

    #[test]
    fn parses_diff_form() {
        let ode = parse_ode("diff(y,x) = y^2 - y*sin(x) + cos(x)").unwrap();
        assert_eq!(ode.rhs.to_string(), "y^2 - y*sin(x) + cos(x)");
    }

    #[test]
    fn parses_zero_rhs() {
        let ode = parse_ode("y' = 0").unwrap();
        assert!(ode.rhs.is_zero());
    }

    #[test]
    fn rejects_unsupported_function() {
        let err = parse_ode("y' = Bessel(x)").unwrap_err();
        assert!(matches!(err, Error::UnsupportedFunction { name } if name == "Bessel"));
    }

    #[test]
    fn rejects_unknown_variable() {
        let err = parse_ode("y' = z + 1").unwrap_err();
        assert!(matches!(err, Error::UnknownVariable(v) if v == "z"));
    }

    #[test]
    fn reports_position() {
        let err = parse_ode("y' = (x + ").unwrap_err();
        match err {
            Error::Parse { line, col, .. } => {
                assert_eq!(line, 1);
                assert!(col >= 10);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn precedence_unary_minus_vs_power() {
        // -x^2 parses as -(x^2)
        let e = parse_expr("-x^2").unwrap();
        assert_eq!(
            e,
            Expr::Neg(Box::new(Expr::Pow(
                Box::new(Expr::var("x")),
                BigRational::from_integer(BigInt::from(2))
            )))
        );
        // -x*y parses as (-x)*y
        let e = parse_expr("-x*y").unwrap();
        assert_eq!(
            e,
            Expr::Mul(
                Box::new(Expr::Neg(Box::new(Expr::var("x")))),
                Box::new(Expr::var("y"))
            )
        );
    }

    #[test]
    fn rational_powers() {
        let e = parse_expr("x^(1/2)").unwrap();
        assert_eq!(
            e,
            Expr::Pow(
                Box::new(Expr::var("x")),
                BigRational::new(BigInt::from(1), BigInt::from(2))
            )
        );
        let e = parse_expr("x^-2").unwrap();
        assert_eq!(e.to_string(), "x^(-2)");
    }

    #[test]
    fn integral_only_in_expressions() {
        assert!(parse_expr("Int(exp(-cos(x)), x)").is_ok());
        assert!(parse_ode("y' = Int(exp(x), x)").is_err());
    }

    #[test]
    fn print_parse_round_trip() {
        for text in [
            "2*x + y",
            "exp(-cos(x))/(y - sin(x))^2",
            "Int(exp(-cos(x)), x)",
            "(ln(x) + sin(x))/y",
            "y^2 - y*sin(x) + cos(x)",
            "1/2*x - 3/4",
            "-(x + y)*x",
            "x^(3/2) + I*y",
        ] {
            let e = parse_expr(text).unwrap();
            let printed = e.to_string();
            let back = parse_expr(&printed).unwrap();
            assert_eq!(e, back, "round trip changed {text} -> {printed}");
        }
    }
}
