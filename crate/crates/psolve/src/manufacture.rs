//! Manufactured rational ODEs with a known integrating factor, for oracle
//! testing of the Darboux search and the exponent solver.
//!
//! Construction: pick 1-3 pairwise coprime polynomials `f_i` over `(x, y)`
//! and rational weights `lambda_i`, set `W = sum lambda_i ln f_i` and
//!
//! ```text
//! M = -h * dW/dx,   N = h * dW/dy,   h = h0 * prod f_i^{m_i},  m_i >= 1
//! ```
//!
//! Then `y' = M/N` has the first integral `W` and the integrating factor
//! `R = -1/h = c * prod f_i^{-m_i}`: every planted `f_i` is a Darboux
//! polynomial of the associated derivation.

use crate::corpus::{CorpusEntry, Expectation};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::gcd::poly_gcd;
use crate::poly::{Monomial, MultiPoly, VarList};
use crate::ratfunc::RationalFunction;
use crate::scalar::GaussianRational;
use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

/// A manufactured ODE together with what was planted in it.
#[derive(Clone, Debug)]
pub struct Manufactured {
    pub entry: CorpusEntry,
    pub factors: Vec<MultiPoly>,
    /// Exponents of the planted integrating factor `prod f_i^{n_i}`.
    pub exponents: Vec<i64>,
    pub m: MultiPoly,
    pub n: MultiPoly,
}

const MAX_REDRAWS: usize = 60;

/// Deterministically generates one manufactured ODE from a seed.
pub fn manufacture(seed: u64, degree: u32) -> Result<Manufactured> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars = VarList::new(&["x", "y"]);
    for _ in 0..MAX_REDRAWS {
        if let Some(made) = try_draw(&mut rng, &vars, degree) {
            return Ok(made);
        }
    }
    Err(Error::Internal(format!(
        "no usable manufactured ODE after {MAX_REDRAWS} draws (seed {seed})"
    )))
}

fn try_draw(rng: &mut ChaCha8Rng, vars: &Arc<VarList>, degree: u32) -> Option<Manufactured> {
    let count = rng.gen_range(1..=3usize);
    let mut factors: Vec<MultiPoly> = Vec::new();
    for _ in 0..count {
        let f = random_poly(rng, vars, degree)?;
        // pairwise coprime keeps the recovery oracle unambiguous
        if factors.iter().any(|g| !poly_gcd(&f, g).is_one()) {
            return None;
        }
        factors.push(f);
    }
    // at least one factor must involve y, otherwise dW/dy vanishes
    let y_idx = vars.index_of("y").unwrap();
    if !factors.iter().any(|f| f.contains_var(y_idx)) {
        return None;
    }
    let x_idx = vars.index_of("x").unwrap();
    let mults: Vec<u32> = (0..count).map(|_| rng.gen_range(1..=2u32)).collect();
    let lambdas: Vec<BigRational> = (0..count)
        .map(|_| {
            let num = *[-2i64, -1, 1, 2, 3].get(rng.gen_range(0..5)).unwrap();
            let den = *[1i64, 1, 2].get(rng.gen_range(0..3)).unwrap();
            BigRational::new(BigInt::from(num), BigInt::from(den))
        })
        .collect();
    let h0 = if rng.gen_bool(0.3) {
        random_poly(rng, vars, 1)?
    } else {
        MultiPoly::one(vars)
    };

    // M = -h0 * sum lambda_i f_i' f_i^{m_i - 1} prod_{j != i} f_j^{m_j}
    let mut m = MultiPoly::zero(vars);
    let mut n = MultiPoly::zero(vars);
    for i in 0..count {
        let mut term = MultiPoly::one(vars);
        for (j, f) in factors.iter().enumerate() {
            let e = if i == j { mults[j] - 1 } else { mults[j] };
            term = term.mul(&f.pow(e));
        }
        let scale = GaussianRational::from_rational(lambdas[i].clone());
        let fx = factors[i].partial_derivative(x_idx);
        let fy = factors[i].partial_derivative(y_idx);
        m = m.sub(&term.mul(&fx).mul_scalar(&scale));
        n = n.add(&term.mul(&fy).mul_scalar(&scale));
    }
    m = m.mul(&h0);
    n = n.mul(&h0);
    if m.is_zero() || n.is_zero() {
        return None;
    }
    // the pipeline reduces M/N to lowest terms, and an integrating factor
    // belongs to a specific (M, N) pair: R for (M, N) turns into R*g for
    // (M/g, N/g). Emit the reduced form and the matching factor.
    let g = poly_gcd(&m, &n);
    let m = m.exact_divide(&g).expect("gcd divides");
    let n = n.exact_divide(&g).expect("gcd divides");
    // clear rational scalar content so the printed ODE has integer
    // coefficients
    let denom_scale = {
        use num_integer::Integer;
        common_denominator(&m).lcm(&common_denominator(&n))
    };
    let scale = GaussianRational::from_rational(BigRational::from_integer(denom_scale));
    let m = m.mul_scalar(&scale);
    let n = n.mul_scalar(&scale);

    let ode = format!("y' = ({})/({})", plain_expr(&m), plain_expr(&n));
    if crate::parse::parse_ode(&ode).is_err() {
        return None;
    }
    // expected R = g / (h0 * prod f_i^{m_i}), reduced
    let mut h = h0.clone();
    for (f, mult) in factors.iter().zip(&mults) {
        h = h.mul(&f.pow(*mult));
    }
    let r_rf = RationalFunction::new(g, h);
    let expected_r = if r_rf.num().is_one() {
        Expr::div(Expr::int(1), plain_expr(r_rf.den()))
    } else if r_rf.is_polynomial() {
        plain_expr(r_rf.num())
    } else {
        Expr::div(plain_expr(r_rf.num()), plain_expr(r_rf.den()))
    };
    let entry = CorpusEntry {
        id: format!("manufactured-{}", fingerprint(&factors, &mults)),
        ode,
        degree: degree.max(factors.iter().map(|f| f.total_degree()).max().unwrap_or(1)),
        numberf: crate::intfact::NumberF::All,
        all_solutions: true,
        extended: false,
        guess: false,
        expected_r: Some(expected_r.to_string()),
        expected_solution: None,
        expect: Expectation::Solved,
    };
    Some(Manufactured {
        entry,
        exponents: mults.iter().map(|&m| -(m as i64)).collect(),
        factors,
        m,
        n,
    })
}

fn fingerprint(factors: &[MultiPoly], mults: &[u32]) -> String {
    let parts: Vec<String> = factors
        .iter()
        .zip(mults)
        .map(|(f, m)| format!("{f}^{m}"))
        .collect();
    let joined = parts.join("*");
    // short stable tag
    let mut acc: u64 = 1469598103934665603;
    for b in joined.bytes() {
        acc ^= b as u64;
        acc = acc.wrapping_mul(1099511628211);
    }
    format!("{acc:016x}")
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &Arc<VarList>, degree: u32) -> Option<MultiPoly> {
    let mons = MultiPoly::monomials_up_to(vars, degree.max(1));
    let mut items: Vec<(Monomial, GaussianRational)> = Vec::new();
    for m in &mons {
        if m.total_degree() == 0 {
            if rng.gen_bool(0.5) {
                let c = *[-2i64, -1, 1, 2].get(rng.gen_range(0..4)).unwrap();
                items.push((m.clone(), GaussianRational::from_int(c)));
            }
            continue;
        }
        if rng.gen_bool(0.45) {
            // real rational coefficients keep planted factors canonical
            // under the conjugate-pair folding of the search
            let re = *[-2i64, -1, 1, 2, 3].get(rng.gen_range(0..5)).unwrap();
            items.push((m.clone(), GaussianRational::from_int(re)));
        }
    }
    let p = MultiPoly::from_terms(vars, items);
    if p.is_constant() {
        return None;
    }
    Some(p.normalize())
}

fn common_denominator(p: &MultiPoly) -> BigInt {
    use num_integer::Integer;
    let mut lcm = BigInt::from(1);
    for (_, c) in p.terms() {
        lcm = lcm.lcm(c.re().denom());
        lcm = lcm.lcm(c.im().denom());
    }
    lcm
}

/// Prints a polynomial over bare `x`, `y` as an expression (no basis
/// variables involved).
pub fn plain_expr(p: &MultiPoly) -> Expr {
    let mut terms = Vec::new();
    for (m, c) in p.terms().collect::<Vec<_>>().into_iter().rev() {
        let neg = c.is_sign_negative();
        let c_abs = if neg { -c } else { c.clone() };
        let mut factors = Vec::new();
        if !c_abs.is_one() || m.is_one() {
            factors.push(coeff_to_expr(&c_abs));
        }
        for &(i, e) in m.exps() {
            factors.push(Expr::pow_int(
                Expr::var(p.vars().name(i as usize)),
                e as i64,
            ));
        }
        if neg {
            factors[0] = Expr::neg(factors[0].clone());
        }
        terms.push(Expr::product(factors));
    }
    Expr::sum(terms)
}

fn coeff_to_expr(c: &GaussianRational) -> Expr {
    use num_traits::{One, Signed, Zero};
    let re = Expr::Num(c.re().clone());
    if c.im().is_zero() {
        return re;
    }
    let im_abs = c.im().abs();
    let im_e = if im_abs.is_one() {
        Expr::ImagUnit
    } else {
        Expr::mul(Expr::Num(im_abs), Expr::ImagUnit)
    };
    if c.re().is_zero() {
        return if c.im().is_negative() {
            Expr::neg(im_e)
        } else {
            im_e
        };
    }
    if c.im().is_negative() {
        Expr::sub(re, im_e)
    } else {
        Expr::add(re, im_e)
    }
}

/// Planted-factor recovery: the manufactured ODE's integrating factor data
/// for direct pipeline-level assertions.
pub fn planted_log_derivative(made: &Manufactured) -> RationalFunction {
    // d/dx log R = sum n_i f_i'/f_i, a convenience for tests
    let vars = made.m.vars().clone();
    let x_idx = vars.index_of("x").unwrap();
    let mut out = RationalFunction::zero(&vars);
    for (f, &n) in made.factors.iter().zip(&made.exponents) {
        let scale = GaussianRational::from_int(n);
        out = out.add(&RationalFunction::new(
            f.partial_derivative(x_idx).mul_scalar(&scale),
            f.clone(),
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_per_seed() {
        let a = manufacture(7, 2).unwrap();
        let b = manufacture(7, 2).unwrap();
        assert_eq!(a.entry.ode, b.entry.ode);
        assert_eq!(a.entry.expected_r, b.entry.expected_r);
        let c = manufacture(8, 2).unwrap();
        assert!(a.entry.ode != c.entry.ode || a.entry.id != c.entry.id);
    }

    #[test]
    fn planted_factor_is_darboux() {
        for seed in 0..20u64 {
            let made = manufacture(seed, 2).unwrap();
            let ode = crate::parse::parse_ode(&made.entry.ode).unwrap();
            let table = crate::basis::close_basis(&ode).unwrap();
            let (m, n) = crate::basis::polynomialize(&ode, &table).unwrap();
            let op = crate::dop::build_operator(&m, &n, &table).unwrap();
            for f in &made.factors {
                let df = op.apply(&f.remap(table.vars()));
                assert!(
                    df.is_zero() || df.exact_divide(&f.remap(table.vars())).is_some(),
                    "seed {seed}: planted factor {f} is not Darboux"
                );
            }
        }
    }

    #[test]
    fn factors_are_coprime_and_contain_y() {
        let made = manufacture(42, 2).unwrap();
        let y_idx = made.m.vars().index_of("y").unwrap();
        assert!(made.factors.iter().any(|f| f.contains_var(y_idx)));
        for (i, a) in made.factors.iter().enumerate() {
            for b in made.factors.iter().skip(i + 1) {
                assert!(poly_gcd(a, b).is_one());
            }
        }
    }
}
