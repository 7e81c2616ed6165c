//! Multivariate polynomial gcd by recursive primitive-part
//! pseudo-remainder sequences.
//!
//! The coefficient field is Q(i), so scalar content is irrelevant; the
//! recursion treats a polynomial as univariate in a chosen main variable
//! with polynomial coefficients, splits content from primitive part, and
//! runs a primitive PRS on the primitive parts. Results are normalized to
//! leading coefficient 1.

use crate::poly::{Monomial, MultiPoly, VarList};
use num_traits::{One, Zero};
use std::sync::Arc;

/// Normalized gcd. `gcd(a, 0)` is the normalization of `a`; the gcd of two
/// zero polynomials is zero.
pub fn poly_gcd(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    let (a, b) = MultiPoly::unify(a, b);
    gcd_inner(&a, &b).normalize()
}

fn gcd_inner(a: &MultiPoly, b: &MultiPoly) -> MultiPoly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    if a.is_constant() || b.is_constant() {
        return MultiPoly::one(a.vars());
    }
    // Highest-index variable present in either operand.
    let v = (0..a.vars().len())
        .rev()
        .find(|&i| a.contains_var(i) || b.contains_var(i))
        .expect("nonconstant polynomials must contain a variable");
    if !a.contains_var(v) {
        return gcd_inner(a, &content(b, v));
    }
    if !b.contains_var(v) {
        return gcd_inner(&content(a, v), b);
    }
    let cont_a = content(a, v);
    let cont_b = content(b, v);
    let cont_gcd = gcd_inner(&cont_a, &cont_b);
    let mut f = a
        .exact_divide(&cont_a)
        .expect("content divides its polynomial");
    let mut g = b
        .exact_divide(&cont_b)
        .expect("content divides its polynomial");
    if f.degree_in(v) < g.degree_in(v) {
        std::mem::swap(&mut f, &mut g);
    }
    cont_gcd.mul(&subresultant_gcd(f, g, v))
}

/// Gcd of two polynomials that are primitive in `v`, by the subresultant
/// pseudo-remainder sequence. Growth is controlled by exact divisions
/// instead of per-step content computation.
fn subresultant_gcd(mut f2: MultiPoly, mut f1: MultiPoly, v: usize) -> MultiPoly {
    debug_assert!(f2.degree_in(v) >= f1.degree_in(v));
    let one = MultiPoly::one(f2.vars());
    let mut n2 = f2.degree_in(v);
    let mut n1 = f1.degree_in(v);
    let mut a2 = one.clone();
    let mut c2 = one.clone();
    loop {
        let r = prem_exact(&f2, &f1, v);
        if r.is_zero() {
            return primitive_part(&f1, v);
        }
        // divisor = -a2 * (-c2)^(n2 - n1)
        let divisor = a2.mul(&c2.neg().pow(n2 - n1)).neg();
        let fi = r
            .exact_divide(&divisor)
            .expect("subresultant divisor divides the pseudo-remainder");
        if fi.degree_in(v) == 0 {
            // a v-free remainder: the primitive parts are coprime
            return one;
        }
        let a1 = univariate_lead(&f1, v);
        // c1 = a1^(n2 - n1) * c2^(n1 + 1 - n2), the negative power being an
        // exact division
        let c1 = apply_signed_power(a1.pow(n2 - n1), &c2, n1 + 1, n2);
        let ni = fi.degree_in(v);
        f2 = f1;
        f1 = fi;
        n2 = n1;
        n1 = ni;
        a2 = a1;
        c2 = c1;
    }
}

/// `factor * base^(pos - neg)`, with negative exponents applied as exact
/// divisions.
fn apply_signed_power(factor: MultiPoly, base: &MultiPoly, pos: u32, neg: u32) -> MultiPoly {
    if pos >= neg {
        factor.mul(&base.pow(pos - neg))
    } else {
        factor
            .exact_divide(&base.pow(neg - pos))
            .expect("subresultant power bookkeeping is exact")
    }
}

/// Exact pseudo-remainder: `lc(q)^(deg p - deg q + 1) * p mod q` in `v`.
/// Unlike the gcd-only variant this keeps the precise scaling the
/// subresultant sequence requires.
fn prem_exact(p: &MultiPoly, q: &MultiPoly, v: usize) -> MultiPoly {
    let dq = q.degree_in(v);
    let dp = p.degree_in(v);
    debug_assert!(dq >= 1 && dp >= dq);
    let lq = univariate_lead(q, v);
    let mut r = p.clone();
    let mut scale_left = dp - dq + 1;
    while !r.is_zero() {
        let dr = r.degree_in(v);
        if dr < dq {
            break;
        }
        let lr = univariate_lead(&r, v);
        let shift = Monomial::from_exps(vec![(v as u32, dr - dq)]);
        r = r
            .mul(&lq)
            .sub(&q.mul_monomial(&shift, &crate::scalar::GaussianRational::one()).mul(&lr));
        scale_left -= 1;
        debug_assert!(r.is_zero() || r.degree_in(v) < dr);
    }
    if scale_left > 0 && !r.is_zero() {
        r = r.mul(&lq.pow(scale_left));
    }
    r
}

/// Divides out the positive rational scalar content, keeping coefficient
/// sizes under control through the remainder sequences.
fn strip_scalar(p: &MultiPoly) -> MultiPoly {
    let c = p.scalar_content();
    if c.is_zero() || c.is_one() {
        return p.clone();
    }
    let inv = crate::scalar::GaussianRational::from_rational(c.recip());
    p.mul_scalar(&inv)
}

/// Gcd of the coefficients of `p` viewed as univariate in variable `v`.
pub fn content(p: &MultiPoly, v: usize) -> MultiPoly {
    let mut acc = MultiPoly::zero(p.vars());
    for c in univariate_coeffs(p, v) {
        if c.is_zero() {
            continue;
        }
        acc = strip_scalar(&gcd_inner(&acc, &c));
        if acc.is_constant() && !acc.is_zero() {
            return MultiPoly::one(p.vars());
        }
    }
    acc.normalize()
}

/// `p` divided by its content in variable `v`, with scalar content
/// stripped as well.
pub fn primitive_part(p: &MultiPoly, v: usize) -> MultiPoly {
    let c = content(p, v);
    if c.is_one() {
        return strip_scalar(p);
    }
    strip_scalar(&p.exact_divide(&c).expect("content divides its polynomial"))
}

/// Coefficient of the highest power of `v`.
fn univariate_lead(p: &MultiPoly, v: usize) -> MultiPoly {
    let d = p.degree_in(v);
    univariate_coeff(p, v, d)
}

/// Coefficient of `v^k` in `p`, as a polynomial over the same variable list.
pub fn univariate_coeff(p: &MultiPoly, v: usize, k: u32) -> MultiPoly {
    let mut items = Vec::new();
    for (m, c) in p.terms() {
        if m.exponent_of(v) == k {
            let rest = Monomial::from_exps(
                m.exps()
                    .iter()
                    .filter(|&&(i, _)| i as usize != v)
                    .cloned()
                    .collect(),
            );
            items.push((rest, c.clone()));
        }
    }
    MultiPoly::from_terms(p.vars(), items)
}

fn univariate_coeffs(p: &MultiPoly, v: usize) -> Vec<MultiPoly> {
    let d = p.degree_in(v);
    (0..=d).map(|k| univariate_coeff(p, v, k)).collect()
}

/// Squarefree decomposition `p = c * prod a_i^i` with the `a_i` squarefree
/// and pairwise coprime (Yun's algorithm, applied per variable). The
/// returned factors are normalized; the constant is dropped.
pub fn squarefree_decompose(p: &MultiPoly) -> Vec<(MultiPoly, u32)> {
    let mut out: Vec<(MultiPoly, u32)> = Vec::new();
    decompose_inner(&p.normalize(), 1, &mut out);
    out.sort_by(|a, b| a.0.to_string().cmp(&b.0.to_string()).then(a.1.cmp(&b.1)));
    out
}

fn push_factor(out: &mut Vec<(MultiPoly, u32)>, f: MultiPoly, mult: u32) {
    if f.is_constant() {
        return;
    }
    let f = f.normalize();
    match out.iter_mut().find(|(g, m)| *g == f && *m == mult) {
        Some(_) => {
            // same factor at the same multiplicity appears once per branch
        }
        None => out.push((f, mult)),
    }
}

fn decompose_inner(p: &MultiPoly, outer_mult: u32, out: &mut Vec<(MultiPoly, u32)>) {
    if p.is_constant() {
        return;
    }
    let v = (0..p.vars().len())
        .find(|&i| p.contains_var(i))
        .expect("nonconstant polynomial has a variable");
    let cont = content(p, v);
    let pp = p.exact_divide(&cont).expect("content divides");
    if !cont.is_constant() {
        decompose_inner(&cont, outer_mult, out);
    }
    // Yun's algorithm on pp, univariate in v
    let dp = pp.partial_derivative(v);
    if dp.is_zero() {
        push_factor(out, pp, outer_mult);
        return;
    }
    let g = poly_gcd(&pp, &dp);
    if g.is_constant() {
        push_factor(out, pp, outer_mult);
        return;
    }
    let mut w = pp.exact_divide(&g).expect("gcd divides");
    let y = dp.exact_divide(&g).expect("gcd divides");
    let mut z = y.sub(&w.partial_derivative(v));
    let mut i = 1u32;
    while !z.is_zero() {
        let a = poly_gcd(&w, &z);
        if !a.is_constant() {
            push_factor(out, a.clone(), i * outer_mult);
        }
        w = w.exact_divide(&a).expect("gcd divides");
        let ynext = z.exact_divide(&a).expect("gcd divides");
        z = ynext.sub(&w.partial_derivative(v));
        i += 1;
    }
    if !w.is_constant() {
        push_factor(out, w, i * outer_mult);
    }
}

/// Refines `set` with `p` so the result stays pairwise coprime and every
/// element of the old set (and `p`) is a product of result elements times a
/// constant. Constant inputs are ignored. All elements are normalized.
pub fn coprime_insert(set: &mut Vec<MultiPoly>, p: &MultiPoly) {
    let mut queue = vec![p.normalize()];
    while let Some(mut q) = queue.pop() {
        if q.is_constant() {
            continue;
        }
        let mut i = 0;
        let mut absorbed = false;
        while i < set.len() {
            let g = poly_gcd(&q, &set[i]);
            if g.is_constant() {
                i += 1;
                continue;
            }
            // split set[i] into g and the cofactor
            let e = set[i].clone();
            let cof = e.exact_divide(&g).expect("gcd divides");
            set.remove(i);
            if !cof.is_constant() {
                queue.push(cof.normalize());
            }
            if !set.iter().any(|s| *s == g) {
                set.push(g.clone());
            }
            let qcof = q.exact_divide(&g).expect("gcd divides").normalize();
            if qcof.is_constant() {
                absorbed = true;
                break;
            }
            q = qcof;
            i = 0;
        }
        if !absorbed && !q.is_constant() && !set.iter().any(|s| *s == q) {
            set.push(q);
        }
    }
    set.sort_by(|a, b| a.to_string().cmp(&b.to_string()));
}

/// Strips the monomial content of `p`: returns the variables that divide
/// every term (as polynomials) together with the cofactor.
pub fn split_monomial_content(p: &MultiPoly) -> (Vec<MultiPoly>, MultiPoly) {
    if p.is_zero() {
        return (Vec::new(), p.clone());
    }
    let vars: Arc<VarList> = p.vars().clone();
    let mut common: Option<Vec<(u32, u32)>> = None;
    for (m, _) in p.terms() {
        let exps: Vec<(u32, u32)> = m.exps().to_vec();
        common = Some(match common {
            None => exps,
            Some(prev) => {
                let mut out = Vec::new();
                for &(i, e) in &prev {
                    if let Some(&(_, e2)) = exps.iter().find(|&&(j, _)| j == i) {
                        out.push((i, e.min(e2)));
                    }
                }
                out
            }
        });
    }
    let common = common.unwrap_or_default();
    let mut factors = Vec::new();
    let mut divisor = Monomial::one();
    for &(i, e) in &common {
        if e > 0 {
            factors.push(MultiPoly::var(&vars, vars.name(i as usize)));
            divisor = divisor.mul(&Monomial::from_exps(vec![(i, e)]));
        }
    }
    let rest = if divisor.is_one() {
        p.clone()
    } else {
        let div_poly = MultiPoly::from_terms(
            &vars,
            vec![(divisor, crate::scalar::GaussianRational::one())],
        );
        p.exact_divide(&div_poly).expect("monomial content divides")
    };
    (factors, rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::GaussianRational;

    fn build(vars: &Arc<VarList>, items: &[(i64, &[(&str, u32)])]) -> MultiPoly {
        MultiPoly::from_terms(
            vars,
            items
                .iter()
                .map(|&(c, exps)| {
                    (
                        Monomial::from_exps(
                            exps.iter()
                                .map(|&(n, e)| (vars.index_of(n).unwrap() as u32, e))
                                .collect(),
                        ),
                        GaussianRational::from_int(c),
                    )
                })
                .collect(),
        )
    }

    #[test]
    fn gcd_difference_of_squares() {
        let v = VarList::new(&["x", "y"]);
        let a = build(&v, &[(1, &[("x", 2)]), (-1, &[("y", 2)])]);
        let b = build(&v, &[(1, &[("x", 1)]), (-1, &[("y", 1)])]);
        assert_eq!(poly_gcd(&a, &b), b);
    }

    #[test]
    fn gcd_coprime_vars() {
        let v = VarList::new(&["x", "y"]);
        let a = build(&v, &[(1, &[("x", 1)])]);
        let b = build(&v, &[(1, &[("y", 1)])]);
        assert!(poly_gcd(&a, &b).is_one());
    }

    #[test]
    fn gcd_strips_content() {
        let v = VarList::new(&["x", "y"]);
        let a = build(&v, &[(2, &[("x", 1)]), (2, &[("y", 1)])]);
        let b = build(&v, &[(4, &[("x", 1)]), (4, &[("y", 1)])]);
        let expect = build(&v, &[(1, &[("x", 1)]), (1, &[("y", 1)])]);
        assert_eq!(poly_gcd(&a, &b), expect);
    }

    #[test]
    fn gcd_with_zero() {
        let v = VarList::new(&["x"]);
        let a = build(&v, &[(3, &[("x", 1)]), (3, &[])]);
        let z = MultiPoly::zero(&v);
        let expect = build(&v, &[(1, &[("x", 1)]), (1, &[])]);
        assert_eq!(poly_gcd(&a, &z), expect);
        assert_eq!(poly_gcd(&z, &a), expect);
    }

    #[test]
    fn gcd_multivariate_common_factor() {
        let v = VarList::new(&["x", "y", "u1"]);
        let f = build(&v, &[(1, &[("y", 3)]), (-3, &[("u1", 1)])]);
        let a = f.mul(&build(&v, &[(1, &[("x", 1)]), (1, &[])]));
        let b = f.mul(&build(&v, &[(1, &[("y", 1)]), (2, &[("u1", 1)])]));
        assert_eq!(poly_gcd(&a, &b), f.normalize());
    }

    #[test]
    fn coprime_refinement() {
        let v = VarList::new(&["x", "y"]);
        let xy = build(&v, &[(1, &[("x", 1), ("y", 1)])]);
        let x = build(&v, &[(1, &[("x", 1)])]);
        let mut set = Vec::new();
        coprime_insert(&mut set, &xy);
        coprime_insert(&mut set, &x);
        // xy splits into x and y
        assert_eq!(set.len(), 2);
        assert!(set.iter().all(|p| p.total_degree() == 1));
        for a in &set {
            for b in &set {
                if a != b {
                    assert!(poly_gcd(a, b).is_one());
                }
            }
        }
    }

    #[test]
    fn monomial_content_split() {
        let v = VarList::new(&["x", "y", "u1"]);
        // y^5 - 3*u1*y^2 = y^2*(y^3 - 3u1)
        let p = build(&v, &[(1, &[("y", 5)]), (-3, &[("u1", 1), ("y", 2)])]);
        let (factors, rest) = split_monomial_content(&p);
        assert_eq!(factors.len(), 1);
        assert_eq!(factors[0], build(&v, &[(1, &[("y", 1)])]));
        assert_eq!(rest, build(&v, &[(1, &[("y", 3)]), (-3, &[("u1", 1)])]));
    }
}
