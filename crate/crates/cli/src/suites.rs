//! Verification suites: exact identities and oracle comparisons over
//! enumerated and seeded random corpora.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use torus_ksys::families::{generate, FamilyKind, FamilySpec};
use torus_ksys::hyperbolic::{
    covering_check, covering_constant, geometric_horoball, height_bound_constant, horoball_distance,
};
use torus_ksys::ksystem::{accounting_check, branch_profile, cross_intersection, kappa};
use torus_ksys::numtheory::gamma_graph;
use torus_ksys::triangulation::{
    default_labelling, enumerate, intersection_via_labels, intersection_via_tree,
    random_triangulation,
};
use torus_ksys::{iota, Result, Slope, Triangulation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Farey,
    Accounting,
    Hyperbolic,
    Gamma,
}

#[derive(Debug, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(suite: &'static str, name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        suite,
        name,
        passed,
        detail,
    }
}

/// Every triangulation with `n ≤ max_n`, followed by `random` random ones
/// with `n ≤ random_n`.
fn corpus(max_n: usize, random: usize, random_n: usize, seed: u64) -> Result<Vec<Triangulation>> {
    let mut out = Vec::new();
    for n in 3..=max_n {
        out.extend(enumerate(n, false)?);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..random {
        let n = rng.random_range(3..=random_n);
        out.push(random_triangulation(n, &mut rng));
    }
    Ok(out)
}

fn farey(seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for h in 3..=10u64 {
        let (t, _) = generate(&FamilySpec::new(FamilyKind::Farey, h)?)?;
        if kappa(&t) != BigUint::from(h * h - 2 * h) {
            bad.push(h);
        }
    }
    out.push(check(
        "farey",
        "kappa of Far(h) is h^2 - 2h",
        bad.is_empty(),
        format!("h = 3..10, failures at {bad:?}"),
    ));

    let ach = |n: u64| -> Result<BigUint> {
        Ok(kappa(
            &generate(&FamilySpec::new(FamilyKind::Achain, n)?)?.0,
        ))
    };
    let mut ok = true;
    for n in 8..=20 {
        ok &= ach(n)? == ach(n - 1)? + ach(n - 2)?;
    }
    for r in 2..=5 {
        ok &= kappa(&generate(&FamilySpec::new(FamilyKind::Regular, r)?)?.0) == ach(2 * r + 1)?;
    }
    out.push(check(
        "farey",
        "fibonacci families",
        ok,
        "ach recurrence for n = 8..20, reg(r) = ach(2r+1) for r = 2..5".into(),
    ));

    let triangulations = corpus(9, 500, 12, seed)?;
    let mut mismatches = 0;
    for t in &triangulations {
        let l = default_labelling(t);
        l.check_against(t)?;
        for u in 0..t.n() {
            for v in u + 1..t.n() {
                if intersection_via_tree(t, u, v)? != intersection_via_labels(&l, u, v) {
                    mismatches += 1;
                }
            }
        }
    }
    out.push(check(
        "farey",
        "dual tree walk matches labels",
        mismatches == 0,
        format!(
            "{} triangulations, {mismatches} mismatches",
            triangulations.len()
        ),
    ));
    Ok(out)
}

fn accounting(seed: u64) -> Result<Vec<Check>> {
    let triangulations = corpus(9, 500, 12, seed)?;
    let (mut pairs, mut violations) = (0, 0);
    let (mut crosses, mut magnitude, mut signs) = (0, 0, 0);
    for t in &triangulations {
        for v in 0..t.n() {
            let p = branch_profile(t, v)?;
            pairs += 1;
            if !accounting_check(&p).holds {
                violations += 1;
            }
            for k in 1..=p.height {
                for k2 in 1..=p.height {
                    let Ok(c) = cross_intersection(&p, k, k2) else {
                        continue;
                    };
                    crosses += 1;
                    if c.formula.unsigned_abs() != c.direct {
                        magnitude += 1;
                    } else if !c.agrees() {
                        signs += 1;
                    }
                }
            }
        }
    }
    Ok(vec![
        check(
            "accounting",
            "per-height counting bound reaches n - 2",
            violations == 0,
            format!("{pairs} (triangulation, horoball) pairs, {violations} violations"),
        ),
        check(
            "accounting",
            "cross intersection formula matches direct iota",
            magnitude == 0,
            format!("{crosses} pairs, {magnitude} mismatches in magnitude, {signs} sign flips"),
        ),
    ])
}

fn hyperbolic(seed: u64) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    while pairs < 10_000 {
        let mut slope = || loop {
            let p: i64 = rng.random_range(-1_000_000..1_000_000);
            let q: i64 = rng.random_range(0..1_000_000);
            if let Ok(s) = Slope::new(p, q) {
                return s;
            }
        };
        let (a, b) = (slope(), slope());
        if a == b {
            continue;
        }
        let i: f64 = iota(&a, &b).to_string().parse().unwrap();
        worst = worst.max((horoball_distance(&a, &b)? - 2.0 * i.ln()).abs());
        pairs += 1;
    }
    let cover = covering_check(100 * 100);
    let c = height_bound_constant();
    let mut ratio = 0.0f64;
    let mut over = 0;
    for t in corpus(9, 0, 3, seed)? {
        let g = geometric_horoball(&t, &default_labelling(&t))?;
        ratio = ratio.max(g.ratio());
        if g.ratio() > c {
            over += 1;
        }
    }
    Ok(vec![
        check(
            "hyperbolic",
            "horoball distance is 2 ln iota",
            worst <= 1e-9,
            format!("10^4 pairs, max error {worst:.2e}"),
        ),
        check(
            "hyperbolic",
            "ford circles cover within ln(2/sqrt 3)",
            cover.max <= covering_constant() + 1e-6,
            format!("max {:.9} on {} samples", cover.max, cover.samples),
        ),
        check(
            "hyperbolic",
            "geometric horoball height bound",
            over == 0,
            format!("max ht/sqrt(kappa) = {ratio:.4}, constant {c:.4}"),
        ),
    ])
}

fn gamma() -> Result<Vec<Check>> {
    let mut failures = Vec::new();
    for h in 2..=400 {
        if let Err(e) = gamma_graph(h) {
            failures.push(e.to_string());
        }
    }
    Ok(vec![check(
        "gamma",
        "degrees are totients and weights sum to 1",
        failures.is_empty(),
        if failures.is_empty() {
            "h = 2..400".into()
        } else {
            failures.join("; ")
        },
    )])
}

pub fn run(suite: Suite, seed: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::All | Suite::Farey) {
        out.extend(farey(seed)?);
    }
    if matches!(suite, Suite::All | Suite::Accounting) {
        out.extend(accounting(seed)?);
    }
    if matches!(suite, Suite::All | Suite::Hyperbolic) {
        out.extend(hyperbolic(seed)?);
    }
    if matches!(suite, Suite::All | Suite::Gamma) {
        out.extend(gamma()?);
    }
    Ok(out)
}
