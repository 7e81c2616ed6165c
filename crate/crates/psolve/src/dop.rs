//! The denominator-cleared derivation associated with an ODE.
//!
//! For `y' = M/N` over a closed basis, the derivation is
//!
//! ```text
//! D = delta * [ N*(d/dx + sum u_ix d/du_i) + M*(d/dy + sum u_iy d/du_i) ]
//! ```
//!
//! where `delta` is a product of denominator factors chosen so every
//! coefficient is polynomial. For a rational ODE (empty basis) this reduces
//! to `D = N d/dx + M d/dy` with `delta = 1`. The matching cleared
//! divergence `T = delta * [(d/dx + ...)N + (d/dy + ...)M]` is the
//! right-hand side of the exponent equation `sum n_i g_i = -T`.

use crate::basis::BasisTable;
use crate::error::{Error, Result};
use crate::poly::{MultiPoly, VarList};
use crate::ratfunc::RationalFunction;
use std::fmt;
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct DOperator {
    pub coeff_x: MultiPoly,
    pub coeff_y: MultiPoly,
    /// One coefficient per basis entry, in table order.
    pub coeff_u: Vec<MultiPoly>,
    /// The clearing product.
    pub delta: MultiPoly,
    vars: Arc<VarList>,
}

impl DOperator {
    pub fn vars(&self) -> &Arc<VarList> {
        &self.vars
    }

    /// All coefficients paired with their variable indices, x and y first.
    pub fn coefficients(&self) -> Vec<(usize, &MultiPoly)> {
        let mut out = Vec::with_capacity(2 + self.coeff_u.len());
        out.push((self.vars.index_of("x").unwrap(), &self.coeff_x));
        out.push((self.vars.index_of("y").unwrap(), &self.coeff_y));
        for (i, c) in self.coeff_u.iter().enumerate() {
            let idx = self
                .vars
                .index_of(&format!("u{}", i + 1))
                .expect("basis variable present");
            out.push((idx, c));
        }
        out
    }

    /// Largest total degree among the coefficients.
    pub fn max_coeff_degree(&self) -> u32 {
        self.coefficients()
            .iter()
            .map(|(_, c)| c.total_degree())
            .max()
            .unwrap_or(0)
    }

    /// Applies the derivation: `sum_v coeff_v * dp/dv`.
    pub fn try_apply(&self, p: &MultiPoly) -> Result<MultiPoly> {
        for (i, name) in p.vars().names().iter().enumerate() {
            if p.contains_var(i) && self.vars.index_of(name).is_none() {
                return Err(Error::UnknownVariable(name.clone()));
            }
        }
        let p = p.remap(&self.vars);
        let mut out = MultiPoly::zero(&self.vars);
        for (idx, coeff) in self.coefficients() {
            let d = p.partial_derivative(idx);
            if !d.is_zero() {
                out = out.add(&coeff.mul(&d));
            }
        }
        Ok(out)
    }

    pub fn apply(&self, p: &MultiPoly) -> MultiPoly {
        self.try_apply(p).expect("polynomial over operator variables")
    }
}

impl fmt::Display for DOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (idx, c) in self.coefficients() {
            if c.is_zero() {
                continue;
            }
            let name = self.vars.name(idx);
            let cs = if c.term_count() > 1 {
                format!("({c})")
            } else {
                format!("{c}")
            };
            parts.push(format!("{cs}*d/d{name}"));
        }
        if parts.is_empty() {
            return write!(f, "0");
        }
        write!(f, "{}", parts.join(" + "))
    }
}

const MAX_CLEARING_RETRIES: usize = 4;

struct Cleared {
    delta: MultiPoly,
    coeff_x: MultiPoly,
    coeff_y: MultiPoly,
    coeff_u: Vec<MultiPoly>,
    divergence: MultiPoly,
}

/// Computes the shared clearing product and every cleared object at once, so
/// the operator and the divergence always use the same `delta`.
fn clear_all(m: &MultiPoly, n: &MultiPoly, table: &BasisTable) -> Result<Cleared> {
    let vars = table.vars().clone();
    let m = m.remap(&vars);
    let n = n.remap(&vars);
    let x_idx = vars.index_of("x").unwrap();
    let y_idx = vars.index_of("y").unwrap();

    // rational targets before clearing
    let mut targets: Vec<RationalFunction> = Vec::new();
    for e in table.entries() {
        // coefficient of d/du_i: N*u_ix + M*u_iy
        targets.push(e.dx.mul_poly(&n).add(&e.dy.mul_poly(&m)));
    }
    // divergence: (d/dx + sum u_ix d/du_i)N + (d/dy + sum u_iy d/du_i)M
    let mut div = RationalFunction::from_poly(
        n.partial_derivative(x_idx).add(&m.partial_derivative(y_idx)),
    );
    for (j, e) in table.entries().iter().enumerate() {
        let u_idx = vars
            .index_of(&format!("u{}", j + 1))
            .expect("basis variable present");
        let dn = n.partial_derivative(u_idx);
        if !dn.is_zero() {
            div = div.add(&e.dx.mul_poly(&dn));
        }
        let dm = m.partial_derivative(u_idx);
        if !dm.is_zero() {
            div = div.add(&e.dy.mul_poly(&dm));
        }
    }

    let mut delta = MultiPoly::one(&vars);
    for d in table.denominators() {
        delta = delta.mul(d);
    }
    for _ in 0..=MAX_CLEARING_RETRIES {
        let delta_rf = RationalFunction::from_poly(delta.clone());
        let mut cleared: Vec<MultiPoly> = Vec::new();
        let mut offender: Option<MultiPoly> = None;
        for t in targets.iter().chain(std::iter::once(&div)) {
            let scaled = t.mul(&delta_rf);
            if scaled.is_polynomial() {
                cleared.push(scaled.num().remap(&vars));
            } else {
                offender = Some(scaled.den().clone());
                break;
            }
        }
        match offender {
            None => {
                let divergence = cleared.pop().expect("divergence is the last target");
                return Ok(Cleared {
                    coeff_x: n.mul(&delta),
                    coeff_y: m.mul(&delta),
                    coeff_u: cleared,
                    delta,
                    divergence,
                });
            }
            Some(extra) => {
                delta = delta.mul(&extra);
            }
        }
    }
    Err(Error::ClearingFailed(format!(
        "denominators kept appearing after {MAX_CLEARING_RETRIES} retries (delta = {delta})"
    )))
}

/// Builds the cleared derivation for `y' = M/N` over the closed basis.
pub fn build_operator(m: &MultiPoly, n: &MultiPoly, table: &BasisTable) -> Result<DOperator> {
    let c = clear_all(m, n, table)?;
    Ok(DOperator {
        coeff_x: c.coeff_x,
        coeff_y: c.coeff_y,
        coeff_u: c.coeff_u,
        delta: c.delta,
        vars: table.vars().clone(),
    })
}

/// The cleared divergence `T`; the exponent equation is `sum n_i g_i = -T`.
pub fn divergence(m: &MultiPoly, n: &MultiPoly, table: &BasisTable) -> Result<MultiPoly> {
    Ok(clear_all(m, n, table)?.divergence)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{close_basis, polynomialize};
    use crate::parse::parse_ode;
    use crate::scalar::GaussianRational;

    fn setup(text: &str) -> (MultiPoly, MultiPoly, BasisTable) {
        let ode = parse_ode(text).unwrap();
        let table = close_basis(&ode).unwrap();
        let (m, n) = polynomialize(&ode, &table).unwrap();
        (m, n, table)
    }

    #[test]
    fn rational_ode_reduces_to_plain_derivation() {
        let (m, n, table) = setup("y' = y/x");
        let op = build_operator(&m, &n, &table).unwrap();
        assert!(op.delta.is_one());
        assert!(op.coeff_u.is_empty());
        assert_eq!(op.coeff_x, n);
        assert_eq!(op.coeff_y, m);
        assert_eq!(op.to_string(), "x*d/dx + y*d/dy");
    }

    #[test]
    fn simple_example_operator() {
        // D = u1u3 dx + y(u1u3+y+u3) dy - u2u1u3 du1 + u1^2u3 du2 + u3^2u1 du3
        let (m, n, table) = setup("y' = y*(cos(x)+y*exp(-x)+1)/cos(x)");
        let op = build_operator(&m, &n, &table).unwrap();
        assert!(op.delta.is_one());
        assert_eq!(op.coeff_x.to_string(), "u1*u3");
        assert_eq!(op.coeff_y.to_string(), "y*u1*u3 + y^2 + y*u3");
        assert_eq!(op.coeff_u[0].to_string(), "-u1*u2*u3");
        assert_eq!(op.coeff_u[1].to_string(), "u1^2*u3");
        assert_eq!(op.coeff_u[2].to_string(), "u1*u3^2");
    }

    #[test]
    fn ln_sin_example_cleared_by_x() {
        // delta = x; D = xy dx + x(u1+u2) dy + y du1 + xyu3 du2 - xyu2 du3
        let (m, n, table) = setup("y' = (ln(x)+sin(x))/y");
        let op = build_operator(&m, &n, &table).unwrap();
        assert_eq!(op.delta.to_string(), "x");
        assert_eq!(op.coeff_x.to_string(), "x*y");
        assert_eq!(op.coeff_y.to_string(), "x*u1 + x*u2");
        assert_eq!(op.coeff_u[0].to_string(), "y");
        assert_eq!(op.coeff_u[1].to_string(), "x*y*u3");
        assert_eq!(op.coeff_u[2].to_string(), "-x*y*u2");
    }

    #[test]
    fn apply_reproduces_basis_derivatives() {
        let (m, n, table) = setup("y' = y*(cos(x)+y*exp(-x)+1)/cos(x)");
        let op = build_operator(&m, &n, &table).unwrap();
        // D[u1] = -u2*u1*u3
        let u1 = MultiPoly::var(table.vars(), "u1");
        assert_eq!(op.apply(&u1).to_string(), "-u1*u2*u3");
        // D[y] = y*(u1u3 + y + u3)
        let y = MultiPoly::var(table.vars(), "y");
        assert_eq!(op.apply(&y), op.coeff_y);
        // D kills constants
        let c = MultiPoly::constant(table.vars(), GaussianRational::from_int(7));
        assert!(op.apply(&c).is_zero());
    }

    #[test]
    fn divergence_simple_example() {
        let (m, n, table) = setup("y' = y*(cos(x)+y*exp(-x)+1)/cos(x)");
        let t = divergence(&m, &n, &table).unwrap();
        // oracle: direct chain-rule differentiation of N = u1u3,
        // M = yu1u3 + y^2 + yu3
        assert_eq!(t.to_string(), "2*u1*u3 - u2*u3 + 2*y + u3");
    }

    #[test]
    fn divergence_kamke_21() {
        let (m, n, table) = setup("y' = y^2 - y*sin(x) + cos(x)");
        let t = divergence(&m, &n, &table).unwrap();
        assert_eq!(t.to_string(), "2*y - u1");
        assert!(n.is_one());
        drop(m);
    }

    #[test]
    fn divergence_exact_ode_is_zero() {
        let (m, n, table) = setup("y' = -x/y");
        let t = divergence(&m, &n, &table).unwrap();
        assert!(t.is_zero());
    }

    #[test]
    fn derivation_property_and_linearity() {
        let (m, n, table) = setup("y' = (ln(x)+sin(x))/y");
        let op = build_operator(&m, &n, &table).unwrap();
        let vars = table.vars();
        let p = MultiPoly::var(vars, "x")
            .mul(&MultiPoly::var(vars, "u1"))
            .add(&MultiPoly::var(vars, "y"));
        let q = MultiPoly::var(vars, "u2").add(&MultiPoly::one(vars));
        // Leibniz: D[pq] = p D[q] + q D[p]
        let lhs = op.apply(&p.mul(&q));
        let rhs = p.mul(&op.apply(&q)).add(&q.mul(&op.apply(&p)));
        assert_eq!(lhs, rhs);
        // linearity with constants 3 and -2
        let a = GaussianRational::from_int(3);
        let b = GaussianRational::from_int(-2);
        let lin = op.apply(&p.mul_scalar(&a).add(&q.mul_scalar(&b)));
        let expect = op.apply(&p).mul_scalar(&a).add(&op.apply(&q).mul_scalar(&b));
        assert_eq!(lin, expect);
    }

    #[test]
    fn apply_rejects_foreign_variables() {
        let (m, n, table) = setup("y' = y/x");
        let op = build_operator(&m, &n, &table).unwrap();
        let foreign = MultiPoly::var(&VarList::new(&["x", "y", "u1"]), "u1");
        assert!(op.try_apply(&foreign).is_err());
    }
}
