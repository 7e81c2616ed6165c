//! Search for Darboux polynomials: nonconstant `f` with `D[f] = g*f`.
//!
//! The search fixes a leading monomial `nu` of the candidate `f` (graded
//! lex), normalizes its coefficient to 1, and writes
//! `f = m_nu + sum_{a < nu} c_a m_a` and `g = sum_b d_b m_b` with
//! undetermined coefficients, `deg g <= max deg of the operator
//! coefficients - 1`. Coefficient-matching `D[f] - g*f = 0` gives a system
//! that is linear in the `d`s (each `d_b` appears with constant coefficient
//! `-1` once `c_nu = 1` is substituted) and polynomial in the `c`s. The
//! system is solved by elimination with case splits:
//!
//! 1. pivots that appear linearly with a nonzero constant coefficient are
//!    substituted away outright (`d`-unknowns first);
//! 2. equations in a single unknown are branched over their exact Q(i)
//!    roots (quadratic formula with Gaussian square roots, rational-root
//!    enumeration over Z\[i\] for higher degree);
//! 3. in `All` mode only, an unknown that appears linearly with a
//!    polynomial coefficient `A` is split into the branches `A = 0` and
//!    `A != 0, z = -B/A`.
//!
//! Remaining free unknowns are set to zero, every candidate solution is
//! re-checked against the original equations, and each emitted pair
//! re-asserts `g = D[f]/f` by exact division.

use crate::dop::DOperator;
use crate::error::{Error, Result};
use crate::gcd::{coprime_insert, poly_gcd, split_monomial_content, univariate_coeff};
use crate::poly::{Monomial, MultiPoly, VarList};
use crate::scalar::GaussianRational;
use num_bigint::BigInt;
use num_integer::{Integer, Roots};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

/// A Darboux pair: `D[f] = g*f` exactly, `f` nonconstant and monic.
#[derive(Clone, Debug, PartialEq)]
pub struct DarbouxPair {
    pub f: MultiPoly,
    pub g: MultiPoly,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum SearchMode {
    /// Only constant pivots and single-unknown root branching.
    Fast,
    /// Additionally splits on polynomial pivot coefficients.
    All,
}

#[derive(Clone, Debug)]
pub struct SearchConfig {
    pub max_degree: u32,
    pub mode: SearchMode,
    pub candidate_cap: usize,
    pub branch_depth: u32,
    pub deadline: Option<Instant>,
}

impl SearchConfig {
    pub fn new(max_degree: u32) -> SearchConfig {
        SearchConfig {
            max_degree,
            mode: SearchMode::Fast,
            candidate_cap: 200,
            branch_depth: 12,
            deadline: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// Pairs sorted ascending by `size_metric`, deduplicated.
    pub pairs: Vec<DarbouxPair>,
    /// True when a cap or an undecidable branch cut the search short.
    pub truncated: bool,
}

/// Ordering key: (total degree, term count, coefficient digit lengths),
/// made strict by the canonical printed form.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct SizeKey {
    pub degree: u32,
    pub terms: usize,
    pub digits: u64,
    pub repr: String,
}

pub fn size_metric(f: &MultiPoly) -> SizeKey {
    SizeKey {
        degree: f.total_degree(),
        terms: f.term_count(),
        digits: f.terms().map(|(_, c)| c.digit_len()).sum(),
        repr: f.to_string(),
    }
}

/// Finds Darboux pairs of degree up to `cfg.max_degree`, plus any validated
/// `seeds` (used by the guess heuristic; their degree may exceed the bound).
pub fn eigenpol_search(
    op: &DOperator,
    cfg: &SearchConfig,
    seeds: &[MultiPoly],
) -> Result<SearchOutcome> {
    let vars = op.vars().clone();
    let mut found: Vec<DarbouxPair> = Vec::new();
    let mut truncated = false;

    // validated seeds first; they are cheap
    for s in seeds {
        if let Some(pair) = validate_candidate(op, s) {
            push_unique(&mut found, pair);
        }
    }

    let g_deg = op.max_coeff_degree().max(1) - 1;
    for stage in 1..=cfg.max_degree {
        let stage_mons: Vec<Monomial> = MultiPoly::monomials_up_to(&vars, stage)
            .into_iter()
            .filter(|m| m.total_degree() == stage)
            .collect();
        for nu in stage_mons {
            check_deadline(cfg)?;
            let before = found.len();
            let solutions = solve_for_leading(op, &nu, g_deg, cfg, &mut truncated)?;
            for f in solutions {
                let pair = validate_candidate(op, &f).unwrap_or_else(|| {
                    panic!("solver produced a non-Darboux candidate {f}")
                });
                push_unique(&mut found, pair);
            }
            let _ = before;
            if found.len() > cfg.candidate_cap {
                truncated = true;
                break;
            }
        }
        if found.len() > cfg.candidate_cap {
            break;
        }
    }

    found.sort_by_key(|p| size_metric(&p.f));
    // complex solutions come in conjugate pairs for real operators; keep
    // one member per pair, preferring a negative imaginary part in the
    // first complex coefficient
    let mut kept: Vec<DarbouxPair> = Vec::new();
    for pair in found {
        if pair.f.has_complex_coeff() {
            let conj = pair.f.conjugate().normalize();
            if let Some(pos) = kept.iter().position(|p| p.f == conj) {
                if prefers_conjugate(&pair.f) {
                    kept.remove(pos);
                    kept.push(pair);
                }
                continue;
            }
        }
        kept.push(pair);
    }
    kept.sort_by_key(|p| size_metric(&p.f));
    let found = kept;
    // drop pairs implied as products of smaller accepted factors
    let mut accepted: Vec<DarbouxPair> = Vec::new();
    for pair in found {
        let mut residual = pair.f.clone();
        let mut changed = true;
        while changed {
            changed = false;
            for a in &accepted {
                if let Some(q) = residual.exact_divide(&a.f) {
                    residual = q;
                    changed = true;
                }
            }
        }
        if !residual.is_constant() {
            accepted.push(pair);
        }
        if accepted.len() >= cfg.candidate_cap {
            truncated = true;
            break;
        }
    }
    Ok(SearchOutcome {
        pairs: accepted,
        truncated,
    })
}

/// Recomputes the cofactor by exact division and re-asserts the identity.
pub fn validate_candidate(op: &DOperator, f: &MultiPoly) -> Option<DarbouxPair> {
    let f = f.remap(op.vars()).normalize();
    if f.is_constant() || f.is_zero() {
        return None;
    }
    let df = op.try_apply(&f).ok()?;
    let g = if df.is_zero() {
        MultiPoly::zero(op.vars())
    } else {
        df.exact_divide(&f)?
    };
    debug_assert_eq!(op.apply(&f), g.mul(&f));
    Some(DarbouxPair { f, g })
}

/// Canonical member of a conjugate pair: the first complex coefficient,
/// scanning from the leading term, has negative imaginary part.
fn prefers_conjugate(f: &MultiPoly) -> bool {
    for (_, c) in f.terms().collect::<Vec<_>>().into_iter().rev() {
        if !c.im().is_zero() {
            return c.im().is_negative();
        }
    }
    false
}

fn push_unique(found: &mut Vec<DarbouxPair>, pair: DarbouxPair) {
    if !found.iter().any(|p| p.f == pair.f) {
        found.push(pair);
    }
}

fn check_deadline(cfg: &SearchConfig) -> Result<()> {
    if let Some(deadline) = cfg.deadline {
        if Instant::now() >= deadline {
            return Err(Error::TimeLimit);
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Ansatz construction for a fixed leading monomial
// ---------------------------------------------------------------------------

fn solve_for_leading(
    op: &DOperator,
    nu: &Monomial,
    g_deg: u32,
    cfg: &SearchConfig,
    truncated: &mut bool,
) -> Result<Vec<MultiPoly>> {
    let geo_vars = op.vars().clone();
    let f_mons: Vec<Monomial> = MultiPoly::monomials_up_to(&geo_vars, nu.total_degree())
        .into_iter()
        .filter(|m| m < nu)
        .collect();
    let g_mons = MultiPoly::monomials_up_to(&geo_vars, g_deg);

    // combined ring: geometry variables plus one unknown per coefficient
    let mut names: Vec<String> = geo_vars.names().to_vec();
    let c_names: Vec<String> = (0..f_mons.len()).map(|i| format!("c{i:04}")).collect();
    let d_names: Vec<String> = (0..g_mons.len()).map(|i| format!("d{i:04}")).collect();
    names.extend(c_names.iter().cloned());
    names.extend(d_names.iter().cloned());
    let big: Arc<VarList> = VarList::new(&names);
    let geo_idx: Vec<usize> = geo_vars
        .names()
        .iter()
        .map(|n| big.index_of(n).unwrap())
        .collect();

    // f = m_nu + sum c_a m_a
    let mut f_terms = vec![(nu.clone(), GaussianRational::one())];
    let mut f_sym = MultiPoly::from_terms(&MultiPoly::zero(&geo_vars).vars().clone(), f_terms.clone());
    f_sym = f_sym.remap(&big);
    for (i, m) in f_mons.iter().enumerate() {
        let c = MultiPoly::var(&big, &c_names[i]);
        f_sym = f_sym.add(&c.mul_monomial(&m.remap_into(&geo_vars, &big), &GaussianRational::one()));
    }
    f_terms.clear();

    let mut g_sym = MultiPoly::zero(&big);
    for (i, m) in g_mons.iter().enumerate() {
        let d = MultiPoly::var(&big, &d_names[i]);
        g_sym = g_sym.add(&d.mul_monomial(&m.remap_into(&geo_vars, &big), &GaussianRational::one()));
    }

    // D[f] - g*f over the big ring
    let mut df = MultiPoly::zero(&big);
    for (v_idx, coeff) in op.coefficients() {
        let name = geo_vars.name(v_idx);
        let big_idx = big.index_of(name).unwrap();
        let d = f_sym.partial_derivative(big_idx);
        if !d.is_zero() {
            df = df.add(&coeff.remap(&big).mul(&d));
        }
    }
    let identity = df.sub(&g_sym.mul(&f_sym));

    // coefficient-match per geometry monomial
    let eqs: Vec<MultiPoly> = identity
        .collect_by(&geo_idx)
        .into_values()
        .filter(|e| !e.is_zero())
        .collect();

    // unknown indices in the big ring; d-unknowns carry elimination priority
    let c_idx: Vec<usize> = c_names.iter().map(|n| big.index_of(n).unwrap()).collect();
    let d_idx: Vec<usize> = d_names.iter().map(|n| big.index_of(n).unwrap()).collect();
    let mut solver = Solver {
        cfg,
        d_set: d_idx.iter().copied().collect(),
        original: eqs.clone(),
        solutions: Vec::new(),
        truncated,
        unknowns: c_idx.iter().chain(d_idx.iter()).copied().collect(),
        big: big.clone(),
    };
    solver.run(eqs, Vec::new(), cfg.branch_depth)?;
    let assignments = solver.solutions;

    // rebuild f from each assignment
    let mut out = Vec::new();
    for a in assignments {
        let mut items = vec![(nu.clone(), GaussianRational::one())];
        for (i, m) in f_mons.iter().enumerate() {
            let v = a.get(&c_idx[i]).cloned().unwrap_or_else(GaussianRational::zero);
            if !v.is_zero() {
                items.push((m.clone(), v));
            }
        }
        out.push(MultiPoly::from_terms(&geo_vars, items));
    }
    Ok(out)
}

// helper: remap a monomial built over one varlist into a superset list
trait RemapInto {
    fn remap_into(&self, from: &Arc<VarList>, to: &Arc<VarList>) -> Monomial;
}

impl RemapInto for Monomial {
    fn remap_into(&self, from: &Arc<VarList>, to: &Arc<VarList>) -> Monomial {
        Monomial::from_exps(
            self.exps()
                .iter()
                .map(|&(i, e)| (to.index_of(from.name(i as usize)).unwrap() as u32, e))
                .collect(),
        )
    }
}

// ---------------------------------------------------------------------------
// Case-splitting solver
// ---------------------------------------------------------------------------

enum Solved {
    /// z = polynomial in later unknowns
    Poly(usize, MultiPoly),
    /// z = num/den under the assumption den != 0
    Ratio(usize, MultiPoly, MultiPoly),
}

struct Solver<'a> {
    cfg: &'a SearchConfig,
    d_set: std::collections::BTreeSet<usize>,
    original: Vec<MultiPoly>,
    solutions: Vec<BTreeMap<usize, GaussianRational>>,
    truncated: &'a mut bool,
    unknowns: Vec<usize>,
    big: Arc<VarList>,
}

impl<'a> Solver<'a> {
    fn run(&mut self, eqs: Vec<MultiPoly>, solved: Vec<Solved>, depth: u32) -> Result<()> {
        check_deadline(self.cfg)?;
        let mut eqs = simplify(eqs);
        if eqs.iter().any(|e| is_nonzero_constant(e)) {
            return Ok(()); // contradictory branch
        }
        let mut solved = solved;

        // rule 1: constant-coefficient linear pivots, d-unknowns first
        loop {
            eqs = simplify(eqs);
            if eqs.iter().any(|e| is_nonzero_constant(e)) {
                return Ok(());
            }
            match self.find_constant_pivot(&eqs) {
                None => break,
                Some((eq_i, z)) => {
                    let (a, b) = linear_split(&eqs[eq_i], z);
                    let a_const = a.as_constant().expect("constant pivot");
                    let value = b.mul_scalar(&a_const.inverse()).neg();
                    eqs.remove(eq_i);
                    for e in eqs.iter_mut() {
                        *e = e.substitute(z, &value).remap(&self.big);
                    }
                    solved.push(Solved::Poly(z, value));
                }
            }
        }

        if eqs.is_empty() {
            self.emit(&solved);
            return Ok(());
        }

        // rule 2: univariate equations, branch over exact roots
        if let Some((eq_i, z)) = self.find_univariate(&eqs) {
            let coeffs = univariate_scalar_coeffs(&eqs[eq_i], z);
            match gaussian_roots(&coeffs) {
                None => {
                    *self.truncated = true;
                    return Ok(());
                }
                Some(roots) => {
                    if roots.len() > 1 && depth == 0 {
                        *self.truncated = true;
                        return Ok(());
                    }
                    let next_depth = if roots.len() > 1 { depth - 1 } else { depth };
                    for r in roots {
                        let mut eqs2 = eqs.clone();
                        eqs2.remove(eq_i);
                        let value = MultiPoly::constant(&self.big, r);
                        for e in eqs2.iter_mut() {
                            *e = e.substitute(z, &value).remap(&self.big);
                        }
                        let mut solved2: Vec<Solved> = Vec::new();
                        solved2.extend(solved.iter().map(clone_solved));
                        solved2.push(Solved::Poly(z, value));
                        self.run(eqs2, solved2, next_depth)?;
                    }
                    return Ok(());
                }
            }
        }

        // rule 3 (All mode): linear occurrence with polynomial coefficient
        if self.cfg.mode == SearchMode::All {
            if let Some((eq_i, z)) = self.find_linear_any(&eqs) {
                if depth == 0 {
                    *self.truncated = true;
                    return Ok(());
                }
                let (a, b) = linear_split(&eqs[eq_i], z);
                // branch A = 0 (and then B = 0)
                {
                    let mut eqs2 = eqs.clone();
                    eqs2.remove(eq_i);
                    eqs2.push(a.clone());
                    eqs2.push(b.clone());
                    let solved2: Vec<Solved> = solved.iter().map(clone_solved).collect();
                    self.run(eqs2, solved2, depth - 1)?;
                }
                // branch A != 0: substitute z = -B/A, clearing denominators
                {
                    let mut eqs2 = Vec::new();
                    for (i, e) in eqs.iter().enumerate() {
                        if i == eq_i {
                            continue;
                        }
                        eqs2.push(substitute_ratio(e, z, &b.neg(), &a, &self.big));
                    }
                    let mut solved2: Vec<Solved> = solved.iter().map(clone_solved).collect();
                    solved2.push(Solved::Ratio(z, b.neg(), a.clone()));
                    self.run(eqs2, solved2, depth - 1)?;
                }
                return Ok(());
            }
        }

        // stuck: no rule applies
        *self.truncated = true;
        Ok(())
    }

    fn emit(&mut self, solved: &[Solved]) {
        // free unknowns default to zero, then walk the solved stack backwards
        let mut vals: BTreeMap<usize, GaussianRational> = BTreeMap::new();
        for &z in &self.unknowns {
            vals.insert(z, GaussianRational::zero());
        }
        for s in solved.iter().rev() {
            match s {
                Solved::Poly(z, p) => {
                    let v = eval_poly(p, &vals);
                    vals.insert(*z, v);
                }
                Solved::Ratio(z, num, den) => {
                    let d = eval_poly(den, &vals);
                    if d.is_zero() {
                        return; // assumption violated by the zero defaults
                    }
                    let n = eval_poly(num, &vals);
                    vals.insert(*z, &n / &d);
                }
            }
        }
        // final soundness check against the original system
        for e in &self.original {
            if !eval_poly(e, &vals).is_zero() {
                return;
            }
        }
        if !self.solutions.contains(&vals) {
            self.solutions.push(vals);
        }
    }

    fn find_constant_pivot(&self, eqs: &[MultiPoly]) -> Option<(usize, usize)> {
        // prefer d-unknowns, then smaller equations
        let mut order: Vec<usize> = (0..eqs.len()).collect();
        order.sort_by_key(|&i| (eqs[i].term_count(), i));
        for want_d in [true, false] {
            for &i in &order {
                for &z in &self.unknowns {
                    if self.d_set.contains(&z) != want_d {
                        continue;
                    }
                    if eqs[i].degree_in(z) == 1 {
                        let (a, _) = linear_split(&eqs[i], z);
                        if let Some(c) = a.as_constant() {
                            if !c.is_zero() {
                                return Some((i, z));
                            }
                        }
                    }
                }
            }
        }
        None
    }

    fn find_univariate(&self, eqs: &[MultiPoly]) -> Option<(usize, usize)> {
        let mut best: Option<(u32, usize, usize, usize)> = None;
        for (i, e) in eqs.iter().enumerate() {
            let present: Vec<usize> = self
                .unknowns
                .iter()
                .copied()
                .filter(|&z| e.contains_var(z))
                .collect();
            if present.len() == 1 {
                let z = present[0];
                let key = (e.degree_in(z), e.term_count(), i, z);
                if best.map(|b| key < b).unwrap_or(true) {
                    best = Some(key);
                }
            }
        }
        best.map(|(_, _, i, z)| (i, z))
    }

    fn find_linear_any(&self, eqs: &[MultiPoly]) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..eqs.len()).collect();
        order.sort_by_key(|&i| (eqs[i].total_degree(), eqs[i].term_count(), i));
        for &i in &order {
            for &z in &self.unknowns {
                if eqs[i].degree_in(z) == 1 {
                    return Some((i, z));
                }
            }
        }
        None
    }
}

fn clone_solved(s: &Solved) -> Solved {
    match s {
        Solved::Poly(z, p) => Solved::Poly(*z, p.clone()),
        Solved::Ratio(z, n, d) => Solved::Ratio(*z, n.clone(), d.clone()),
    }
}

fn simplify(eqs: Vec<MultiPoly>) -> Vec<MultiPoly> {
    let mut out: Vec<MultiPoly> = Vec::new();
    for e in eqs {
        if e.is_zero() {
            continue;
        }
        let e = e.normalize();
        if !out.iter().any(|f| *f == e) {
            out.push(e);
        }
    }
    out
}

fn is_nonzero_constant(e: &MultiPoly) -> bool {
    e.as_constant().map(|c| !c.is_zero()).unwrap_or(false)
}

/// Splits `e` as `A*z + B` where `z` has degree exactly 1 in `e`.
fn linear_split(e: &MultiPoly, z: usize) -> (MultiPoly, MultiPoly) {
    let a = univariate_coeff(e, z, 1);
    let b = univariate_coeff(e, z, 0);
    (a, b)
}

/// Substitutes `z = num/den` into `e`, multiplying by `den^deg_z(e)`.
fn substitute_ratio(
    e: &MultiPoly,
    z: usize,
    num: &MultiPoly,
    den: &MultiPoly,
    vars: &Arc<VarList>,
) -> MultiPoly {
    let k = e.degree_in(z);
    let mut out = MultiPoly::zero(vars);
    for j in 0..=k {
        let coeff = univariate_coeff(e, z, j);
        if coeff.is_zero() {
            continue;
        }
        out = out.add(&coeff.mul(&num.pow(j)).mul(&den.pow(k - j)));
    }
    out.remap(vars)
}

fn eval_poly(p: &MultiPoly, vals: &BTreeMap<usize, GaussianRational>) -> GaussianRational {
    let mut acc = GaussianRational::zero();
    for (m, c) in p.terms() {
        let mut term = c.clone();
        for &(i, e) in m.exps() {
            let v = vals
                .get(&(i as usize))
                .unwrap_or_else(|| panic!("unassigned variable index {i} in evaluation"));
            for _ in 0..e {
                term = &term * v;
            }
        }
        acc = &acc + &term;
    }
    acc
}

fn univariate_scalar_coeffs(e: &MultiPoly, z: usize) -> Vec<GaussianRational> {
    let d = e.degree_in(z);
    (0..=d)
        .map(|k| {
            univariate_coeff(e, z, k)
                .as_constant()
                .expect("equation is univariate in z")
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Exact roots of univariate polynomials over Q(i)
// ---------------------------------------------------------------------------

/// All roots in Q(i) of the polynomial with the given coefficients
/// (ascending powers). Returns None when completeness cannot be decided
/// (oversized coefficients in the rational-root enumeration).
fn gaussian_roots(coeffs: &[GaussianRational]) -> Option<Vec<GaussianRational>> {
    let mut cs: Vec<GaussianRational> = coeffs.to_vec();
    while cs.last().map(|c| c.is_zero()).unwrap_or(false) {
        cs.pop();
    }
    if cs.is_empty() {
        return Some(Vec::new()); // identically zero: callers never pass this
    }
    let mut roots: Vec<GaussianRational> = Vec::new();
    // strip zero roots
    let mut low = 0;
    while cs[low].is_zero() {
        low += 1;
    }
    if low > 0 {
        roots.push(GaussianRational::zero());
        cs.drain(..low);
    }
    match cs.len() {
        1 => {}
        2 => {
            // a1 z + a0 = 0
            roots.push(&(-&cs[0]) / &cs[1]);
        }
        3 => {
            // quadratic formula over Q(i)
            let a = &cs[2];
            let b = &cs[1];
            let c = &cs[0];
            let disc = &(b * b) - &(&(&GaussianRational::from_int(4) * a) * c);
            if let Some(s) = gaussian_sqrt(&disc) {
                let two_a = &GaussianRational::from_int(2) * a;
                let r1 = &(&(-b) + &s) / &two_a;
                let r2 = &(&(-b) - &s) / &two_a;
                if !roots.contains(&r1) {
                    roots.push(r1);
                }
                if !roots.contains(&r2) {
                    roots.push(r2);
                }
            }
        }
        _ => {
            let extra = rational_root_candidates(&cs)?;
            for r in extra {
                if eval_univariate(&cs, &r).is_zero() && !roots.contains(&r) {
                    roots.push(r);
                }
            }
        }
    }
    Some(roots)
}

fn eval_univariate(cs: &[GaussianRational], z: &GaussianRational) -> GaussianRational {
    let mut acc = GaussianRational::zero();
    for c in cs.iter().rev() {
        acc = &(&acc * z) + c;
    }
    acc
}

/// Square root in Q(i), when one exists.
fn gaussian_sqrt(c: &GaussianRational) -> Option<GaussianRational> {
    if c.is_zero() {
        return Some(GaussianRational::zero());
    }
    let a = c.re().clone();
    let b = c.im().clone();
    // |c| must be rational: (x^2+y^2)^2 = a^2 + b^2
    let s = rational_sqrt(&(&a * &a + &b * &b))?;
    let two = BigRational::from_integer(BigInt::from(2));
    // x^2 = (a + s)/2
    let x2 = (&a + &s) / &two;
    if b.is_zero() {
        return if a.is_negative() {
            // sqrt(a) = i*sqrt(-a)
            let y = rational_sqrt(&(-a))?;
            Some(GaussianRational::new(BigRational::zero(), y))
        } else {
            let x = rational_sqrt(&a)?;
            Some(GaussianRational::new(x, BigRational::zero()))
        };
    }
    let x = rational_sqrt(&x2)?;
    if x.is_zero() {
        return None; // b != 0 requires x != 0
    }
    let y = &b / &(&two * &x);
    let cand = GaussianRational::new(x, y);
    if &(&cand * &cand) == c {
        Some(cand)
    } else {
        None
    }
}

fn rational_sqrt(r: &BigRational) -> Option<BigRational> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(BigRational::new(n, d))
    } else {
        None
    }
}

/// Rational-root candidates p/q (times units) for a polynomial over Q(i),
/// via divisor enumeration in Z\[i\]. None when coefficients are too large
/// to enumerate reliably.
fn rational_root_candidates(cs: &[GaussianRational]) -> Option<Vec<GaussianRational>> {
    // clear denominators to Z[i]
    let mut lcm = BigInt::one();
    for c in cs {
        lcm = lcm.lcm(c.re().denom());
        lcm = lcm.lcm(c.im().denom());
    }
    let scale = BigRational::from_integer(lcm);
    let ints: Vec<(BigInt, BigInt)> = cs
        .iter()
        .map(|c| {
            let re = c.re() * &scale;
            let im = c.im() * &scale;
            (re.to_integer(), im.to_integer())
        })
        .collect();
    let a0 = ints.first().unwrap();
    let an = ints.last().unwrap();
    let p_div = gaussian_divisors(a0)?;
    let q_div = gaussian_divisors(an)?;
    let units = [
        GaussianRational::one(),
        GaussianRational::i(),
        -GaussianRational::one(),
        -GaussianRational::i(),
    ];
    let mut out = Vec::new();
    for p in &p_div {
        for q in &q_div {
            let base = p / q;
            for u in &units {
                let cand = &base * u;
                if !out.contains(&cand) {
                    out.push(cand);
                }
            }
        }
    }
    Some(out)
}

/// Nonzero divisors of a Gaussian integer up to units, as Q(i) values.
fn gaussian_divisors(z: &(BigInt, BigInt)) -> Option<Vec<GaussianRational>> {
    let norm = &z.0 * &z.0 + &z.1 * &z.1;
    if norm.is_zero() {
        return Some(vec![GaussianRational::one()]);
    }
    if norm > BigInt::from(1_000_000_000_000u64) {
        return None;
    }
    let n = u64::try_from(norm.clone()).ok()?;
    let mut norm_divs: Vec<u64> = Vec::new();
    let mut k = 1u64;
    while k * k <= n {
        if n % k == 0 {
            norm_divs.push(k);
            norm_divs.push(n / k);
        }
        k += 1;
    }
    norm_divs.sort_unstable();
    norm_divs.dedup();
    let zq = GaussianRational::new(
        BigRational::from_integer(z.0.clone()),
        BigRational::from_integer(z.1.clone()),
    );
    let mut out = Vec::new();
    for m in norm_divs {
        // all w = a+bi with a^2+b^2 = m
        let mut a = 0u64;
        while a * a <= m {
            let b2 = m - a * a;
            let b = b2.sqrt();
            if b * b == b2 {
                for (aa, bb) in [(a as i64, b as i64), (a as i64, -(b as i64))] {
                    if aa == 0 && bb == 0 {
                        continue;
                    }
                    let w = GaussianRational::new(
                        BigRational::from_integer(BigInt::from(aa)),
                        BigRational::from_integer(BigInt::from(bb)),
                    );
                    // check w | z exactly in Z[i]
                    let q = &zq / &w;
                    if q.re().denom().is_one() && q.im().denom().is_one() {
                        let canon = canonical_unit(&w);
                        if !out.contains(&canon) {
                            out.push(canon);
                        }
                    }
                }
            }
            a += 1;
        }
    }
    Some(out)
}

/// Normalizes a Gaussian integer by units so enumeration stays small.
fn canonical_unit(w: &GaussianRational) -> GaussianRational {
    let mut v = w.clone();
    for _ in 0..3 {
        if v.re().is_positive() && !v.im().is_negative() {
            return v;
        }
        v = &v * &GaussianRational::i();
    }
    v
}

// ---------------------------------------------------------------------------
// Guess heuristic
// ---------------------------------------------------------------------------

/// Heuristic seed polynomials for the Darboux search: factors extracted
/// from `M`, `N`, and the divergence by gcd splitting, simple differences
/// `y^k - c*u_j`, and the clearing product's factors. Every seed is
/// validated by exact division before use; invalid guesses are dropped.
pub fn guess_candidates(
    m: &MultiPoly,
    n: &MultiPoly,
    table: &crate::basis::BasisTable,
    max_degree: u32,
) -> Vec<MultiPoly> {
    let vars = table.vars().clone();
    let t = match crate::dop::divergence(m, n, table) {
        Ok(t) => t,
        Err(_) => MultiPoly::zero(&vars),
    };
    let mut set: Vec<MultiPoly> = Vec::new();
    for p in [m, n, &t] {
        if p.is_zero() || p.is_constant() {
            continue;
        }
        let p = p.remap(&vars);
        let (mono_factors, rest) = split_monomial_content(&p);
        for f in mono_factors {
            coprime_insert(&mut set, &f);
        }
        if !rest.is_constant() {
            coprime_insert(&mut set, &rest);
            // square-ish factors via gcd with partial derivatives
            for v in 0..vars.len() {
                let d = rest.partial_derivative(v);
                if d.is_zero() {
                    continue;
                }
                let g = poly_gcd(&rest, &d);
                if !g.is_constant() {
                    coprime_insert(&mut set, &g);
                }
            }
        }
    }
    // differences y - c*u_j and y^k - c*u_j
    let y = MultiPoly::var(&vars, "y");
    for e in table.entries() {
        let u = MultiPoly::var(&vars, &e.var);
        for k in 1..=max_degree.max(1) {
            let yk = y.pow(k);
            for sign in [1i64, -1] {
                let c = GaussianRational::from_int(sign);
                let cand = yk.sub(&u.mul_scalar(&c));
                if !set.iter().any(|s| *s == cand) {
                    set.push(cand);
                }
            }
        }
    }
    // clearing product factors
    for d in table.denominators() {
        if !set.iter().any(|s| *s == *d) {
            set.push(d.clone());
        }
    }
    set.sort_by_key(size_metric);
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{close_basis, polynomialize};
    use crate::dop::build_operator;
    use crate::parse::parse_ode;

    fn search(text: &str, degree: u32, mode: SearchMode) -> (SearchOutcome, DOperator) {
        let ode = parse_ode(text).unwrap();
        let table = close_basis(&ode).unwrap();
        let (m, n) = polynomialize(&ode, &table).unwrap();
        let op = build_operator(&m, &n, &table).unwrap();
        let mut cfg = SearchConfig::new(degree);
        cfg.mode = mode;
        let out = eigenpol_search(&op, &cfg, &[]).unwrap();
        (out, op)
    }

    fn fs(out: &SearchOutcome) -> Vec<String> {
        out.pairs.iter().map(|p| p.f.to_string()).collect()
    }

    #[test]
    fn linear_ode_finds_x_and_y() {
        let (out, _) = search("y' = y/x", 1, SearchMode::Fast);
        assert_eq!(fs(&out), vec!["x", "y"]);
        for p in &out.pairs {
            assert!(p.g.is_one());
        }
    }

    #[test]
    fn simple_example_full_eigenpol_set() {
        // expected: y, e^x, cos x, y + e^x, cos x - I sin x (any order)
        let (out, op) = search("y' = y*(cos(x)+y*exp(-x)+1)/cos(x)", 1, SearchMode::Fast);
        let names = fs(&out);
        assert!(names.contains(&"y".to_string()), "{names:?}");
        assert!(names.contains(&"u3".to_string()), "{names:?}");
        assert!(names.contains(&"u1".to_string()), "{names:?}");
        assert!(names.contains(&"y + u3".to_string()), "{names:?}");
        assert!(names.contains(&"u1 - I*u2".to_string()), "{names:?}");
        // the conjugate u1 + I*u2 is folded into its pair partner
        assert!(!names.contains(&"u1 + I*u2".to_string()), "{names:?}");
        assert_eq!(out.pairs.len(), 5, "{names:?}");
        // paper's cofactors, via the identity D[f] = g f re-raised here
        for p in &out.pairs {
            assert_eq!(op.apply(&p.f), p.g.mul(&p.f));
        }
        let lookup = |f: &str| -> String {
            out.pairs
                .iter()
                .find(|p| p.f.to_string() == f)
                .unwrap()
                .g
                .to_string()
        };
        assert_eq!(lookup("y"), "u1*u3 + y + u3");
        assert_eq!(lookup("u3"), "u1*u3");
        assert_eq!(lookup("u1"), "-u2*u3");
        assert_eq!(lookup("y + u3"), "u1*u3 + y");
        assert_eq!(lookup("u1 - I*u2"), "-I*u1*u3");
    }

    #[test]
    fn kamke_21_pair() {
        let (out, op) = search("y' = y^2 - y*sin(x) + cos(x)", 1, SearchMode::Fast);
        let names = fs(&out);
        assert!(names.contains(&"y - u1".to_string()), "{names:?}");
        let pair = out
            .pairs
            .iter()
            .find(|p| p.f.to_string() == "y - u1")
            .unwrap();
        assert_eq!(pair.g.to_string(), "y");
        drop(op);
    }

    #[test]
    fn size_metric_ordering() {
        let v = VarList::new(&["x", "y", "u3"]);
        let y = MultiPoly::var(&v, "y");
        let y_plus = y.add(&MultiPoly::var(&v, "u3"));
        assert!(size_metric(&y) < size_metric(&y_plus));
        let x2 = MultiPoly::var(&v, "x").pow(2);
        let xy = MultiPoly::var(&v, "x").add(&y);
        assert!(size_metric(&xy) < size_metric(&x2));
    }

    #[test]
    fn guess_includes_kamke_factor() {
        let ode = parse_ode("y' = y^2 - y*sin(x) + cos(x)").unwrap();
        let table = close_basis(&ode).unwrap();
        let (m, n) = polynomialize(&ode, &table).unwrap();
        let seeds = guess_candidates(&m, &n, &table, 1);
        let strs: Vec<String> = seeds.iter().map(|p| p.to_string()).collect();
        assert!(strs.contains(&"y - u1".to_string()), "{strs:?}");
    }

    #[test]
    fn guess_finds_high_degree_factor() {
        // y' = e^x/y^2 + 9 e^2x/y^2 - 6 y e^x + y^4 has the degree-3 factor
        // y^3 - 3 e^x, reachable from the divergence by splitting
        let ode = parse_ode("y' = exp(x)/y^2 + 9*exp(x)^2/y^2 - 6*y*exp(x) + y^4").unwrap();
        let table = close_basis(&ode).unwrap();
        let (m, n) = polynomialize(&ode, &table).unwrap();
        let seeds = guess_candidates(&m, &n, &table, 1);
        let strs: Vec<String> = seeds.iter().map(|p| p.to_string()).collect();
        assert!(strs.contains(&"y^3 - 3*u1".to_string()), "{strs:?}");
        // and it validates as a Darboux pair
        let op = build_operator(&m, &n, &table).unwrap();
        let f = seeds
            .iter()
            .find(|p| p.to_string() == "y^3 - 3*u1")
            .unwrap();
        // D[f] = 3y^2 (y^3 - 3u1)^2, so g = 3y^2 (y^3 - 3u1)
        let pair = validate_candidate(&op, f).expect("seed is Darboux");
        assert_eq!(pair.g.to_string(), "3*y^5 - 9*y^2*u1");
    }

    #[test]
    fn product_duplicates_are_dropped() {
        // at degree 2 for y' = y/x the products x^2, x*y, y^2 are implied
        let (out, _) = search("y' = y/x", 2, SearchMode::All);
        assert_eq!(fs(&out), vec!["x", "y"]);
    }

    #[test]
    fn soundness_on_every_returned_pair() {
        for text in [
            "y' = y/x",
            "y' = y^2 - y*sin(x) + cos(x)",
            "y' = y*(cos(x)+y*exp(-x)+1)/cos(x)",
            "y' = (ln(x)+sin(x))/y",
            "y' = (y+1+exp(y)*x^4)/(x^2*y)",
        ] {
            let (out, op) = search(text, 1, SearchMode::All);
            for p in &out.pairs {
                let df = op.apply(&p.f);
                assert_eq!(df.exact_divide(&p.f).expect("divides"), p.g, "{text}");
            }
        }
    }

    #[test]
    fn gaussian_sqrt_cases() {
        let i = GaussianRational::i();
        // sqrt(-4) = 2i
        assert_eq!(
            gaussian_sqrt(&GaussianRational::from_int(-4)),
            Some(&GaussianRational::from_int(2) * &i)
        );
        // sqrt(2i) = 1 + i
        let arg = &GaussianRational::from_int(2) * &i;
        let s = gaussian_sqrt(&arg).unwrap();
        assert_eq!(&s * &s, arg);
        // sqrt(2) is not in Q(i)
        assert_eq!(gaussian_sqrt(&GaussianRational::from_int(2)), None);
    }

    #[test]
    fn univariate_roots_exact() {
        // z^2 - z = 0 -> {0, 1}
        let cs = vec![
            GaussianRational::zero(),
            GaussianRational::from_int(-1),
            GaussianRational::one(),
        ];
        let mut roots = gaussian_roots(&cs).unwrap();
        roots.sort_by_key(|r| r.to_string());
        assert_eq!(roots.len(), 2);
        // z^2 + 1 = 0 -> {i, -i}
        let cs = vec![
            GaussianRational::one(),
            GaussianRational::zero(),
            GaussianRational::one(),
        ];
        let roots = gaussian_roots(&cs).unwrap();
        assert!(roots.contains(&GaussianRational::i()));
        assert!(roots.contains(&(-GaussianRational::i())));
        // cubic with roots 1, 2, 3: z^3 - 6z^2 + 11z - 6
        let cs = vec![
            GaussianRational::from_int(-6),
            GaussianRational::from_int(11),
            GaussianRational::from_int(-6),
            GaussianRational::one(),
        ];
        let roots = gaussian_roots(&cs).unwrap();
        assert_eq!(roots.len(), 3);
        for k in [1, 2, 3] {
            assert!(roots.contains(&GaussianRational::from_int(k)));
        }
    }
}
