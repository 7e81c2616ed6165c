//! Sparse multivariate polynomials over Q(i).
//!
//! Polynomials are maps from monomials to nonzero coefficients, kept in
//! canonical form at all times: graded lexicographic term order over a fixed
//! ordered variable list (`x < y < u1 < u2 < ...`), no zero coefficients
//! stored. Two polynomials over different variable lists compare equal when
//! they agree after merging the lists by name.

use crate::scalar::GaussianRational;
use num_rational::BigRational;
use num_traits::Zero;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Canonical precedence of variable names: `x`, then `y`, then `u<k>` by
/// numeric index, then anything else alphabetically.
fn var_rank(name: &str) -> (u8, u64, &str) {
    match name {
        "x" => (0, 0, ""),
        "y" => (1, 0, ""),
        _ => {
            if let Some(rest) = name.strip_prefix('u') {
                if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                    if let Ok(k) = rest.parse::<u64>() {
                        return (2, k, "");
                    }
                }
            }
            (3, 0, name)
        }
    }
}

/// An ordered list of variable names shared by a family of polynomials.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct VarList {
    names: Vec<String>,
}

impl VarList {
    /// Builds a list sorted by canonical precedence. Duplicates are removed.
    pub fn new<S: AsRef<str>>(names: &[S]) -> Arc<VarList> {
        let mut v: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        v.sort_by(|a, b| var_rank(a).cmp(&var_rank(b)));
        v.dedup();
        Arc::new(VarList { names: v })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Merged list containing every name from both inputs.
    pub fn merge(a: &Arc<VarList>, b: &Arc<VarList>) -> Arc<VarList> {
        if a == b {
            return a.clone();
        }
        let mut all: Vec<&str> = a.names.iter().map(|s| s.as_str()).collect();
        all.extend(b.names.iter().map(|s| s.as_str()));
        VarList::new(&all)
    }

    /// Extends the list with one more name, returning the new list.
    pub fn with_var(self: &Arc<VarList>, name: &str) -> Arc<VarList> {
        let mut all: Vec<&str> = self.names.iter().map(|s| s.as_str()).collect();
        all.push(name);
        VarList::new(&all)
    }
}

/// A power product of variables; exponents are stored sparsely, never zero.
#[derive(Clone, PartialEq, Eq, Debug, Hash)]
pub struct Monomial {
    deg: u32,
    exps: Vec<(u32, u32)>, // (variable index, exponent), ascending by index
}

impl Monomial {
    pub fn one() -> Monomial {
        Monomial {
            deg: 0,
            exps: Vec::new(),
        }
    }

    pub fn var(idx: usize) -> Monomial {
        Monomial {
            deg: 1,
            exps: vec![(idx as u32, 1)],
        }
    }

    pub fn from_exps(mut exps: Vec<(u32, u32)>) -> Monomial {
        exps.retain(|&(_, e)| e != 0);
        exps.sort_by_key(|&(i, _)| i);
        let deg = exps.iter().map(|&(_, e)| e).sum();
        Monomial { deg, exps }
    }

    pub fn total_degree(&self) -> u32 {
        self.deg
    }

    pub fn exponent_of(&self, idx: usize) -> u32 {
        self.exps
            .iter()
            .find(|&&(i, _)| i as usize == idx)
            .map(|&(_, e)| e)
            .unwrap_or(0)
    }

    pub fn exps(&self) -> &[(u32, u32)] {
        &self.exps
    }

    pub fn is_one(&self) -> bool {
        self.exps.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut exps = Vec::with_capacity(self.exps.len() + other.exps.len());
        let (mut i, mut j) = (0, 0);
        while i < self.exps.len() && j < other.exps.len() {
            let (ia, ea) = self.exps[i];
            let (ib, eb) = other.exps[j];
            match ia.cmp(&ib) {
                Ordering::Less => {
                    exps.push((ia, ea));
                    i += 1;
                }
                Ordering::Greater => {
                    exps.push((ib, eb));
                    j += 1;
                }
                Ordering::Equal => {
                    exps.push((ia, ea + eb));
                    i += 1;
                    j += 1;
                }
            }
        }
        exps.extend_from_slice(&self.exps[i..]);
        exps.extend_from_slice(&other.exps[j..]);
        Monomial {
            deg: self.deg + other.deg,
            exps,
        }
    }

    /// Componentwise quotient, or None when `other` does not divide `self`.
    pub fn div(&self, other: &Monomial) -> Option<Monomial> {
        let mut exps = Vec::with_capacity(self.exps.len());
        let mut j = 0;
        for &(i, e) in &self.exps {
            let mut rem = e;
            while j < other.exps.len() && other.exps[j].0 < i {
                return None; // other has a variable self lacks
            }
            if j < other.exps.len() && other.exps[j].0 == i {
                let eo = other.exps[j].1;
                if eo > e {
                    return None;
                }
                rem = e - eo;
                j += 1;
            }
            if rem != 0 {
                exps.push((i, rem));
            }
        }
        if j < other.exps.len() {
            return None;
        }
        Some(Monomial {
            deg: self.deg - other.deg,
            exps,
        })
    }

    /// Remaps variable indices through `map` (old index -> new index).
    fn remap(&self, map: &[u32]) -> Monomial {
        let mut exps: Vec<(u32, u32)> = self
            .exps
            .iter()
            .map(|&(i, e)| (map[i as usize], e))
            .collect();
        exps.sort_by_key(|&(i, _)| i);
        Monomial {
            deg: self.deg,
            exps,
        }
    }
}

/// Graded lexicographic order: higher total degree first, ties broken by
/// exponent of the earliest variable.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.deg.cmp(&other.deg) {
            Ordering::Equal => {}
            ord => return ord,
        }
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.exps.get(i), other.exps.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some(&(ia, ea)), Some(&(ib, eb))) => match ia.cmp(&ib) {
                    // nonzero exponent at an earlier position wins
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match ea.cmp(&eb) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        ord => return ord,
                    },
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A multivariate polynomial in canonical form.
#[derive(Clone)]
pub struct MultiPoly {
    vars: Arc<VarList>,
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl MultiPoly {
    pub fn zero(vars: &Arc<VarList>) -> MultiPoly {
        MultiPoly {
            vars: vars.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(vars: &Arc<VarList>, c: GaussianRational) -> MultiPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        MultiPoly {
            vars: vars.clone(),
            terms,
        }
    }

    pub fn one(vars: &Arc<VarList>) -> MultiPoly {
        MultiPoly::constant(vars, GaussianRational::one())
    }

    pub fn var(vars: &Arc<VarList>, name: &str) -> MultiPoly {
        let idx = vars
            .index_of(name)
            .unwrap_or_else(|| panic!("variable {name} not in varlist"));
        let mut terms = BTreeMap::new();
        terms.insert(Monomial::var(idx), GaussianRational::one());
        MultiPoly {
            vars: vars.clone(),
            terms,
        }
    }

    pub fn from_terms(
        vars: &Arc<VarList>,
        items: Vec<(Monomial, GaussianRational)>,
    ) -> MultiPoly {
        let mut terms: BTreeMap<Monomial, GaussianRational> = BTreeMap::new();
        for (m, c) in items {
            if c.is_zero() {
                continue;
            }
            match terms.entry(m) {
                std::collections::btree_map::Entry::Vacant(e) => {
                    e.insert(c);
                }
                std::collections::btree_map::Entry::Occupied(mut e) => {
                    let s = e.get() + &c;
                    if s.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = s;
                    }
                }
            }
        }
        MultiPoly {
            vars: vars.clone(),
            terms,
        }
    }

    pub fn vars(&self) -> &Arc<VarList> {
        &self.vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    pub fn as_constant(&self) -> Option<GaussianRational> {
        if self.terms.is_empty() {
            return Some(GaussianRational::zero());
        }
        if self.terms.len() == 1 {
            if let Some(c) = self.terms.get(&Monomial::one()) {
                return Some(c.clone());
            }
        }
        None
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().map(|c| c.is_one()).unwrap_or(false)
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms
            .keys()
            .map(|m| m.total_degree())
            .max()
            .unwrap_or(0)
    }

    pub fn degree_in(&self, idx: usize) -> u32 {
        self.terms
            .keys()
            .map(|m| m.exponent_of(idx))
            .max()
            .unwrap_or(0)
    }

    pub fn contains_var(&self, idx: usize) -> bool {
        self.terms.keys().any(|m| m.exponent_of(idx) > 0)
    }

    /// Leading term in graded lex order.
    pub fn leading(&self) -> Option<(&Monomial, &GaussianRational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_coeff(&self) -> GaussianRational {
        self.leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(GaussianRational::zero)
    }

    pub fn coeff_of(&self, m: &Monomial) -> GaussianRational {
        self.terms
            .get(m)
            .cloned()
            .unwrap_or_else(GaussianRational::zero)
    }

    /// Rewrites the polynomial over `target`, which must contain every
    /// variable of the current list.
    pub fn remap(&self, target: &Arc<VarList>) -> MultiPoly {
        if &self.vars == target {
            return self.clone();
        }
        let map: Vec<u32> = self
            .vars
            .names()
            .iter()
            .map(|n| {
                target
                    .index_of(n)
                    .unwrap_or_else(|| panic!("variable {n} missing from target varlist"))
                    as u32
            })
            .collect();
        let terms = self
            .terms
            .iter()
            .map(|(m, c)| (m.remap(&map), c.clone()))
            .collect();
        MultiPoly {
            vars: target.clone(),
            terms,
        }
    }

    /// Brings two polynomials onto a shared variable list.
    pub fn unify(a: &MultiPoly, b: &MultiPoly) -> (MultiPoly, MultiPoly) {
        if a.vars == b.vars {
            return (a.clone(), b.clone());
        }
        let merged = VarList::merge(&a.vars, &b.vars);
        (a.remap(&merged), b.remap(&merged))
    }

    fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiPoly) -> MultiPoly {
        let (mut a, b) = MultiPoly::unify(self, other);
        for (m, c) in b.terms {
            a.add_term(m, c);
        }
        a
    }

    pub fn sub(&self, other: &MultiPoly) -> MultiPoly {
        let (mut a, b) = MultiPoly::unify(self, other);
        for (m, c) in b.terms {
            a.add_term(m, -c);
        }
        a
    }

    pub fn neg(&self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn mul(&self, other: &MultiPoly) -> MultiPoly {
        let (a, b) = MultiPoly::unify(self, other);
        let mut out = MultiPoly::zero(&a.vars);
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }

    pub fn mul_scalar(&self, c: &GaussianRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &GaussianRational) -> MultiPoly {
        if c.is_zero() {
            return MultiPoly::zero(&self.vars);
        }
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(mm, k)| (mm.mul(m), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut out = MultiPoly::one(&self.vars);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                out = out.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Coefficient-wise complex conjugation.
    pub fn conjugate(&self) -> MultiPoly {
        MultiPoly {
            vars: self.vars.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c.conjugate()))
                .collect(),
        }
    }

    /// True when some coefficient has a nonzero imaginary part.
    pub fn has_complex_coeff(&self) -> bool {
        self.terms.values().any(|c| !c.im().is_zero())
    }

    /// Formal partial derivative with respect to the variable at `idx`.
    pub fn partial_derivative(&self, idx: usize) -> MultiPoly {
        let mut out = MultiPoly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.exponent_of(idx);
            if e == 0 {
                continue;
            }
            let mut exps: Vec<(u32, u32)> = m.exps().to_vec();
            for pair in exps.iter_mut() {
                if pair.0 as usize == idx {
                    pair.1 -= 1;
                }
            }
            let dm = Monomial::from_exps(exps);
            out.add_term(dm, c * &GaussianRational::from_int(e as i64));
        }
        out
    }

    /// Exact division: returns `q` with `self = q * f`, or None when `f`
    /// does not divide `self`. Division by the zero polynomial panics; the
    /// public entry point in `ops` turns that into an error.
    pub fn exact_divide(&self, f: &MultiPoly) -> Option<MultiPoly> {
        assert!(!f.is_zero(), "exact_divide by zero polynomial");
        let (mut r, f) = MultiPoly::unify(self, f);
        let mut q = MultiPoly::zero(&r.vars);
        let (lm_f, lc_f) = {
            let (m, c) = f.leading().unwrap();
            (m.clone(), c.clone())
        };
        while !r.is_zero() {
            let (lm_r, lc_r) = {
                let (m, c) = r.leading().unwrap();
                (m.clone(), c.clone())
            };
            let m = lm_r.div(&lm_f)?;
            let c = &lc_r / &lc_f;
            q.add_term(m.clone(), c.clone());
            r = r.sub(&f.mul_monomial(&m, &c));
        }
        Some(q)
    }

    /// Divides by the leading coefficient so the leading coefficient is 1.
    /// Returns the zero polynomial unchanged.
    pub fn normalize(&self) -> MultiPoly {
        match self.leading() {
            None => self.clone(),
            Some((_, c)) => {
                if c.is_one() {
                    self.clone()
                } else {
                    let inv = c.inverse();
                    self.mul_scalar(&inv)
                }
            }
        }
    }

    /// Substitutes a polynomial for one variable.
    pub fn substitute(&self, idx: usize, value: &MultiPoly) -> MultiPoly {
        let value = value.remap(&VarList::merge(&self.vars, value.vars()));
        let vars = value.vars().clone();
        let max_pow = self.degree_in(idx);
        let mut powers: Vec<MultiPoly> = Vec::with_capacity(max_pow as usize + 1);
        powers.push(MultiPoly::one(&vars));
        for k in 1..=max_pow {
            let next = powers[(k - 1) as usize].mul(&value);
            powers.push(next);
        }
        let mut out = MultiPoly::zero(&vars);
        for (m, c) in &self.terms {
            let e = m.exponent_of(idx);
            let rest = Monomial::from_exps(
                m.exps()
                    .iter()
                    .filter(|&&(i, _)| i as usize != idx)
                    .cloned()
                    .collect(),
            );
            let contrib = powers[e as usize].mul_monomial(&rest, c);
            out = out.add(&contrib);
        }
        out.remap(&vars)
    }

    /// Splits every term into (monomial over `keep`, residual monomial), and
    /// groups coefficients by the `keep` part. Used to coefficient-match a
    /// polynomial identity in a subset of the variables.
    pub fn collect_by(&self, keep: &[usize]) -> BTreeMap<Monomial, MultiPoly> {
        let keep_set: Vec<bool> = (0..self.vars.len()).map(|i| keep.contains(&i)).collect();
        let mut out: BTreeMap<Monomial, MultiPoly> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut kept = Vec::new();
            let mut rest = Vec::new();
            for &(i, e) in m.exps() {
                if keep_set[i as usize] {
                    kept.push((i, e));
                } else {
                    rest.push((i, e));
                }
            }
            let kept = Monomial::from_exps(kept);
            let rest = Monomial::from_exps(rest);
            out.entry(kept)
                .or_insert_with(|| MultiPoly::zero(&self.vars))
                .add_term(rest, c.clone());
        }
        out
    }

    /// Gaussian-rational "scalar content": positive rational g such that all
    /// coefficient components divided by g are coprime integers. Zero for
    /// the zero polynomial.
    pub fn scalar_content(&self) -> BigRational {
        use num_bigint::BigInt;
        use num_integer::Integer;
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = num_bigint::BigInt::from(1);
        for c in self.terms.values() {
            for part in [c.re(), c.im()] {
                if part.is_zero() {
                    continue;
                }
                num_gcd = num_gcd.gcd(part.numer());
                den_lcm = den_lcm.lcm(part.denom());
            }
        }
        if num_gcd.is_zero() {
            return BigRational::zero();
        }
        BigRational::new(num_gcd, den_lcm)
    }

    /// All monomials of total degree at most `max_deg` over the variables of
    /// `vars`, in ascending graded lex order.
    pub fn monomials_up_to(vars: &Arc<VarList>, max_deg: u32) -> Vec<Monomial> {
        let n = vars.len();
        let mut out = vec![Monomial::one()];
        let mut frontier = vec![vec![0u32; n]];
        for _ in 0..max_deg {
            let mut next = Vec::new();
            for exps in &frontier {
                // extend only at or after the last incremented position to
                // enumerate each multiset once
                let start = exps
                    .iter()
                    .rposition(|&e| e > 0)
                    .unwrap_or(0);
                for i in start..n {
                    let mut e2 = exps.clone();
                    e2[i] += 1;
                    next.push(e2);
                }
            }
            for e in &next {
                out.push(Monomial::from_exps(
                    e.iter()
                        .enumerate()
                        .filter(|&(_, &x)| x > 0)
                        .map(|(i, &x)| (i as u32, x))
                        .collect(),
                ));
            }
            frontier = next;
        }
        out.sort();
        out.dedup();
        out
    }
}

impl PartialEq for MultiPoly {
    fn eq(&self, other: &Self) -> bool {
        if self.vars == other.vars {
            return self.terms == other.terms;
        }
        let (a, b) = MultiPoly::unify(self, other);
        a.terms == b.terms
    }
}

impl Eq for MultiPoly {}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.terms.iter().rev() {
            let neg = c.is_sign_negative();
            let c_abs = if neg { -c } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mono = monomial_string(m, &self.vars);
            let mixed = !c_abs.re().is_zero() && !c_abs.im().is_zero();
            if mono.is_empty() {
                if mixed && self.terms.len() > 1 {
                    write!(f, "({c_abs})")?;
                } else {
                    write!(f, "{c_abs}")?;
                }
            } else if c_abs.is_one() {
                write!(f, "{mono}")?;
            } else if mixed {
                write!(f, "({c_abs})*{mono}")?;
            } else {
                write!(f, "{c_abs}*{mono}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

fn monomial_string(m: &Monomial, vars: &VarList) -> String {
    let mut parts = Vec::new();
    for &(i, e) in m.exps() {
        let name = vars.name(i as usize);
        if e == 1 {
            parts.push(name.to_string());
        } else {
            parts.push(format!("{name}^{e}"));
        }
    }
    parts.join("*")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars_xyu() -> Arc<VarList> {
        VarList::new(&["x", "y", "u1", "u2", "u3"])
    }

    fn g(n: i64) -> GaussianRational {
        GaussianRational::from_int(n)
    }

    /// Term builder: exps listed as (name, exp).
    fn t(vars: &Arc<VarList>, c: GaussianRational, exps: &[(&str, u32)]) -> (Monomial, GaussianRational) {
        let m = Monomial::from_exps(
            exps.iter()
                .map(|&(n, e)| (vars.index_of(n).unwrap() as u32, e))
                .collect(),
        );
        (m, c)
    }

    fn p(vars: &Arc<VarList>, items: &[(i64, &[(&str, u32)])]) -> MultiPoly {
        MultiPoly::from_terms(
            vars,
            items.iter().map(|&(c, e)| t(vars, g(c), e)).collect(),
        )
    }

    #[test]
    fn varlist_order_is_canonical() {
        let v = VarList::new(&["u2", "y", "u10", "x", "u1"]);
        assert_eq!(v.names(), &["x", "y", "u1", "u2", "u10"]);
    }

    #[test]
    fn add_cancellation() {
        let v = vars_xyu();
        let a = p(&v, &[(1, &[("x", 1)]), (1, &[("y", 1)])]);
        let b = p(&v, &[(1, &[("x", 1)]), (-1, &[("y", 1)])]);
        let sum = a.add(&b);
        assert_eq!(sum, p(&v, &[(2, &[("x", 1)])]));
        assert_eq!(sum.to_string(), "2*x");
    }

    #[test]
    fn difference_of_squares() {
        let v = vars_xyu();
        let a = p(&v, &[(1, &[("y", 1)]), (-1, &[("u2", 1)])]);
        let b = p(&v, &[(1, &[("y", 1)]), (1, &[("u2", 1)])]);
        assert_eq!(
            a.mul(&b),
            p(&v, &[(1, &[("y", 2)]), (-1, &[("u2", 2)])])
        );
    }

    #[test]
    fn product_matches_darboux_pair_expansion() {
        // (y + u3)*(y + u1*u3) = y^2 + y*u1*u3 + y*u3 + u1*u3^2
        let v = vars_xyu();
        let a = p(&v, &[(1, &[("y", 1)]), (1, &[("u3", 1)])]);
        let b = p(&v, &[(1, &[("y", 1)]), (1, &[("u1", 1), ("u3", 1)])]);
        let expect = p(
            &v,
            &[
                (1, &[("y", 2)]),
                (1, &[("y", 1), ("u1", 1), ("u3", 1)]),
                (1, &[("y", 1), ("u3", 1)]),
                (1, &[("u1", 1), ("u3", 2)]),
            ],
        );
        assert_eq!(a.mul(&b), expect);
    }

    #[test]
    fn exact_divide_recovers_cofactor() {
        let v = vars_xyu();
        let prod = p(
            &v,
            &[
                (1, &[("y", 2)]),
                (1, &[("y", 1), ("u1", 1), ("u3", 1)]),
                (1, &[("y", 1), ("u3", 1)]),
                (1, &[("u1", 1), ("u3", 2)]),
            ],
        );
        let f = p(&v, &[(1, &[("y", 1)]), (1, &[("u3", 1)])]);
        let q = prod.exact_divide(&f).expect("divides");
        assert_eq!(q, p(&v, &[(1, &[("y", 1)]), (1, &[("u1", 1), ("u3", 1)])]));
    }

    #[test]
    fn exact_divide_rejects_nondivisor() {
        let v = VarList::new(&["x"]);
        let a = p(&v, &[(1, &[("x", 2)]), (1, &[])]);
        let f = p(&v, &[(1, &[("x", 1)]), (1, &[])]);
        assert!(a.exact_divide(&f).is_none());
    }

    #[test]
    fn exact_divide_gaussian_factor() {
        // x^2 + 1 = (x + I)(x - I)
        let v = VarList::new(&["x"]);
        let a = p(&v, &[(1, &[("x", 2)]), (1, &[])]);
        let f = MultiPoly::from_terms(
            &v,
            vec![
                t(&v, g(1), &[("x", 1)]),
                t(&v, GaussianRational::i(), &[]),
            ],
        );
        let q = a.exact_divide(&f).expect("divides over Q(i)");
        let expect = MultiPoly::from_terms(
            &v,
            vec![
                t(&v, g(1), &[("x", 1)]),
                t(&v, -GaussianRational::i(), &[]),
            ],
        );
        assert_eq!(q, expect);
    }

    #[test]
    fn partial_derivatives() {
        let v = vars_xyu();
        let a = p(&v, &[(1, &[("x", 2), ("y", 1)])]);
        assert_eq!(
            a.partial_derivative(v.index_of("x").unwrap()),
            p(&v, &[(2, &[("x", 1), ("y", 1)])])
        );
        let b = p(&v, &[(1, &[("u1", 1), ("u3", 1)])]);
        assert!(b.partial_derivative(v.index_of("u2").unwrap()).is_zero());
        // d/dy (y^2 - y*u2 + u1) = 2y - u2
        let c = p(
            &v,
            &[(1, &[("y", 2)]), (-1, &[("y", 1), ("u2", 1)]), (1, &[("u1", 1)])],
        );
        assert_eq!(
            c.partial_derivative(v.index_of("y").unwrap()),
            p(&v, &[(2, &[("y", 1)]), (-1, &[("u2", 1)])])
        );
    }

    #[test]
    fn graded_lex_leading_term() {
        let v = vars_xyu();
        // x > y > u1 within degree 1; degree dominates
        let a = p(&v, &[(1, &[("x", 1)]), (1, &[("y", 2)])]);
        assert_eq!(a.leading().unwrap().0, &t(&v, g(1), &[("y", 2)]).0);
        let b = p(&v, &[(1, &[("x", 1)]), (1, &[("u3", 1)])]);
        assert_eq!(b.leading().unwrap().0, &t(&v, g(1), &[("x", 1)]).0);
    }

    #[test]
    fn unify_across_varlists() {
        let va = VarList::new(&["x"]);
        let vb = VarList::new(&["x", "y"]);
        let a = p(&va, &[(1, &[("x", 1)])]);
        let b = p(&vb, &[(1, &[("x", 1)])]);
        assert_eq!(a, b);
        let sum = a.add(&p(&vb, &[(1, &[("y", 1)])]));
        assert_eq!(sum.vars().names(), &["x", "y"]);
    }

    #[test]
    fn substitute_variable() {
        let v = VarList::new(&["x", "y"]);
        let a = p(&v, &[(1, &[("x", 2)]), (1, &[("y", 1)])]);
        let val = p(&v, &[(1, &[("y", 1)]), (1, &[])]); // x := y + 1
        let out = a.substitute(v.index_of("x").unwrap(), &val);
        let expect = p(&v, &[(1, &[("y", 2)]), (3, &[("y", 1)]), (1, &[])]);
        assert_eq!(out, expect);
    }

    #[test]
    fn monomial_enumeration() {
        let v = VarList::new(&["x", "y"]);
        let ms = MultiPoly::monomials_up_to(&v, 2);
        // 1, x, y, x^2, xy, y^2
        assert_eq!(ms.len(), 6);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn display_canonical() {
        let v = vars_xyu();
        let a = MultiPoly::from_terms(
            &v,
            vec![
                t(&v, g(1), &[("u1", 1)]),
                t(&v, -GaussianRational::i(), &[("u2", 1)]),
            ],
        );
        assert_eq!(a.to_string(), "u1 - I*u2");
        let b = p(&v, &[(-1, &[("x", 1)]), (2, &[])]);
        assert_eq!(b.to_string(), "-x + 2");
    }
}
