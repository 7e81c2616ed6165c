use psolve::*;

fn main() {
    let made = manufacture::manufacture(3, 2).unwrap();
    eprintln!("ode: {}", made.entry.ode);
    eprintln!("expected_R: {:?}", made.entry.expected_r);
    eprintln!("factors: {:?}", made.factors);
    eprintln!("exponents: {:?}", made.exponents);
    let ode = parse::parse_ode(&made.entry.ode).unwrap();
    let table = basis::close_basis(&ode).unwrap();
    let (m, n) = basis::polynomialize(&ode, &table).unwrap();
    eprintln!("M = {m}\nN = {n}");
    eprintln!("made.m = {}\nmade.n = {}", made.m, made.n);
    let op = dop::build_operator(&m, &n, &table).unwrap();
    let t = dop::divergence(&m, &n, &table).unwrap();
    // assemble the planted factor directly and verify
    let mut parts = Vec::new();
    for (f, &e) in made.factors.iter().zip(&made.exponents) {
        let df = op.apply(&f.remap(table.vars()));
        let g = df.exact_divide(&f.remap(table.vars())).expect("darboux");
        parts.push(intfact::DarbouxFactor {
            f: f.remap(table.vars()),
            exponent: num_rational::BigRational::from_integer(e.into()),
            g,
        });
    }
    let r = intfact::IntegratingFactor {
        darboux_part: parts,
        exp_part: vec![],
        numberf_used: 0,
        extended: false,
    };
    eprintln!("planted verify: {}", intfact::verify(&r, &op, &t));
    let ok = solve::check_integrating_factor(&made.entry.ode, made.entry.expected_r.as_ref().unwrap());
    eprintln!("expr-level check: {ok:?}");
}
