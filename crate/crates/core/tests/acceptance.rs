//! Acceptance criteria. Prints one PASS/FAIL line per criterion and fails
//! if any criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use etopacity::arith::{build_div_formula, check_smt, emit_smt, eval_div_formula, interval_star, DivFormula, PeriodicSet};
use etopacity::geometry::{rat, Constraint as C, LinExpr as E, PolySet, Polyhedron, Rational};
use etopacity::model::{build_private_projection, build_public_projection, Valuation};
use etopacity::opacity::{check_valuation, CheckMode, ExactAnalysis, Pets, Side};
use etopacity::pet::{build_zone_automaton, evaluate_at, pet_semialg, pet_zones};
use etopacity::zonegraph::{ExplorationBudget, Status};
use proptest::test_runner::{Config, TestCaseError, TestRunner};

use common::*;

type Outcome = Result<(), String>;

fn v(n: &str) -> E {
    E::var(n)
}

fn k(c: i64) -> E {
    E::int(c)
}

fn poly(vars: &[&str], cs: &[C]) -> Polyhedron {
    Polyhedron::new(vars, cs).unwrap()
}

fn set(vars: &[&str], ps: Vec<Polyhedron>) -> PolySet {
    PolySet::new(vars, ps).unwrap()
}

fn expect_equal(what: &str, got: &PolySet, want: &PolySet) -> Outcome {
    if got.equal(want).map_err(|e| e.to_string())? {
        Ok(())
    } else {
        Err(format!("{what}: got {got}, expected {want}"))
    }
}

fn within(what: &str, limit: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let t = Instant::now();
    f()?;
    let el = t.elapsed();
    if el > limit {
        return Err(format!("{what} took {el:?}, limit {limit:?}"));
    }
    Ok(())
}

fn val(pairs: &[(&str, u64)]) -> Valuation {
    pairs.iter().map(|(p, x)| (p.to_string(), *x)).collect()
}

fn runner() -> TestRunner {
    TestRunner::new(Config { cases: 500, failure_persistence: None, ..Config::default() })
}

fn fail(msg: String) -> TestCaseError {
    TestCaseError::fail(msg)
}

// 1

fn running_regressions() -> Outcome {
    let limit = Duration::from_secs(5);
    let a = load("running.pta");
    let b = ExplorationBudget::default();
    const PD: [&str; 3] = ["p1", "p2", "d"];
    const P: [&str; 2] = ["p1", "p2"];
    let pd = |cs: &[C]| poly(&PD, cs);

    within("PET", limit, || {
        let (pet, st) = pet_semialg(&a, b).map_err(|e| e.to_string())?;
        if st != Status::Complete {
            return Err("PET incomplete".into());
        }
        let want = set(
            &PD,
            vec![
                pd(&[C::le(v("d"), k(3)), C::ge(v("p1"), k(0)), C::ge(v("p2"), k(0))]),
                pd(&[C::ge(v("p1"), k(0)), C::le(v("p1"), k(3)), C::le(v("p1"), v("d")), C::le(v("d"), v("p2"))]),
            ],
        );
        expect_equal("PET", &pet, &want)
    })?;

    within("projection PETs", limit, || {
        let (private, _) = pet_semialg(&build_private_projection(&a).unwrap(), b).map_err(|e| e.to_string())?;
        let want = set(&PD, vec![pd(&[C::ge(v("p1"), k(0)), C::le(v("p1"), k(3)), C::le(v("p1"), v("d")), C::le(v("d"), v("p2"))])]);
        expect_equal("private PET", &private, &want)?;
        let (public, _) = pet_semialg(&build_public_projection(&a).unwrap(), b).map_err(|e| e.to_string())?;
        let want = set(&PD, vec![pd(&[C::ge(v("d"), k(0)), C::le(v("d"), k(3)), C::ge(v("p1"), k(0)), C::ge(v("p2"), k(0))])]);
        expect_equal("public PET", &public, &want)
    })?;

    within("synthesis", limit, || {
        let p = etopacity::opacity::pets(&a, b).map_err(|e| e.to_string())?;
        let eos = set(&PD, vec![pd(&[C::ge(v("p1"), k(0)), C::le(v("p1"), v("d")), C::le(v("d"), v("p2")), C::le(v("d"), k(3))])]);
        expect_equal("d-eos", &p.d_eos().unwrap(), &eos)?;
        let diff = set(
            &PD,
            vec![
                pd(&[C::ge(v("p1"), k(0)), C::le(v("p1"), k(3)), C::lt(k(3), v("d")), C::le(v("d"), v("p2"))]),
                pd(&[C::ge(v("d"), k(0)), C::le(v("d"), k(3)), C::lt(v("d"), v("p1")), C::ge(v("p2"), k(0))]),
                pd(&[C::ge(v("p2"), k(0)), C::lt(v("p2"), v("d")), C::le(v("d"), k(3)), C::ge(v("p1"), k(0))]),
            ],
        );
        let got = p.diff().unwrap();
        expect_equal("diff", &got, &diff)?;
        let proj = set(
            &P,
            vec![
                poly(&P, &[C::ge(v("p1"), k(0)), C::le(v("p1"), k(3)), C::lt(k(3), v("p2"))]),
                poly(&P, &[C::lt(k(0), v("p1")), C::ge(v("p2"), k(0))]),
                poly(&P, &[C::ge(v("p2"), k(0)), C::lt(v("p2"), k(3)), C::ge(v("p1"), k(0))]),
            ],
        );
        expect_equal("projected diff", &got.project(&P).unwrap(), &proj)?;
        let dfos = set(&PD, vec![pd(&[C::eq(v("p1"), k(0)), C::ge(v("d"), k(0)), C::le(v("d"), v("p2")), C::eq(v("p2"), k(3))])]);
        expect_equal("d-fos", &p.d_fos().unwrap(), &dfos)?;
        let eos_p = set(&P, vec![poly(&P, &[C::ge(v("p1"), k(0)), C::le(v("p1"), v("p2")), C::le(v("p1"), k(3))])]);
        expect_equal("eos", &p.eos().unwrap(), &eos_p)?;
        let fos = set(&P, vec![poly(&P, &[C::eq(v("p1"), k(0)), C::eq(v("p2"), k(3))])]);
        expect_equal("fos", &p.fos().unwrap(), &fos)
    })
}

/// Projection PETs of a one-parameter model given directly.
fn three_valuation_pets() -> Outcome {
    const PD: [&str; 2] = ["p", "d"];
    let band = |p: i64, lo: C, hi: C| poly(&PD, &[C::eq(v("p"), k(p)), lo, hi]);
    let closed = |p: i64, a: i64, b: i64| band(p, C::le(k(a), v("d")), C::le(v("d"), k(b)));
    let pets = Pets {
        private: set(&PD, vec![closed(1, 0, 3), closed(2, 0, 5), closed(3, 0, 5)]),
        public: set(&PD, vec![closed(1, 5, 10), closed(2, 3, 10), closed(3, 0, 5)]),
        status: Status::Complete,
    };
    let diff = set(
        &PD,
        vec![
            closed(1, 0, 3),
            closed(1, 5, 10),
            band(2, C::le(k(0), v("d")), C::lt(v("d"), k(3))),
            band(2, C::lt(k(5), v("d")), C::le(v("d"), k(10))),
        ],
    );
    let got = pets.diff().map_err(|e| e.to_string())?;
    expect_equal("diff", &got, &diff)?;
    let proj = set(&["p"], vec![poly(&["p"], &[C::eq(v("p"), k(1))]), poly(&["p"], &[C::eq(v("p"), k(2))])]);
    expect_equal("projected diff", &got.project(&["p"]).unwrap(), &proj)?;
    expect_equal("d-eos", &pets.d_eos().unwrap(), &set(&PD, vec![closed(2, 3, 5), closed(3, 0, 5)]))?;
    expect_equal("d-fos", &pets.d_fos().unwrap(), &set(&PD, vec![closed(3, 0, 5)]))
}

fn self_loop_closed_form() -> Outcome {
    let a = load("self_loop.pta");
    let za = build_zone_automaton(&a, ExplorationBudget::default()).map_err(|e| e.to_string())?;
    const PQD: [&str; 3] = ["p", "q", "d"];
    let loop_label = set(&PQD, vec![poly(&PQD, &[C::eq(v("d"), v("p")), C::ge(v("q"), k(0))])]);
    let exit_label = set(&PQD, vec![poly(&PQD, &[C::le(v("q"), v("d")), C::le(v("d"), v("p")), C::ge(v("q"), k(0))])]);
    expect_equal("loop label", za.label("l0", "l0").ok_or("no loop label")?, &loop_label)?;
    expect_equal("exit label", za.label("l0", "l1").ok_or("no exit label")?, &exit_label)?;
    let z = pet_zones(&a, ExplorationBudget::default()).map_err(|e| e.to_string())?;
    for p in 0..=6u64 {
        for q in 0..=6u64 {
            let got = evaluate_at(&z.terms, &val(&[("p", p), ("q", q)])).map_err(|e| e.to_string())?;
            let closed: BTreeSet<u64> =
                (0..=40).filter(|&d| (0..=40).any(|kk| q + kk * p <= d && d <= (kk + 1) * p)).collect();
            if got.elements_upto(40) != closed {
                return Err(format!("p={p} q={q}: {got} vs {closed:?}"));
            }
        }
    }
    Ok(())
}

// 2

fn running_verdicts() -> Outcome {
    let a = load("running.pta");
    let b = ExplorationBudget::default();
    let limit = Duration::from_secs(1);
    let v14 = val(&[("p1", 1), ("p2", 4)]);
    within("exist (1,4)", limit, || {
        let r = check_valuation(&a, &v14, CheckMode::Exist, b).map_err(|e| e.to_string())?;
        if r.opaque { Ok(()) } else { Err(format!("exist (1,4): {r:?}")) }
    })?;
    within("full (1,4)", limit, || {
        let r = check_valuation(&a, &v14, CheckMode::Full, b).map_err(|e| e.to_string())?;
        if r.opaque || r.side != Some(Side::PublicOnly) || r.duration.as_ref().is_none_or(|d| *d >= rat(1)) {
            return Err(format!("full (1,4): {r:?}"));
        }
        // one-sided durations, in half units
        let (private, public) = ExactAnalysis::new(&a, b).unwrap().durations(&v14).unwrap();
        let (pr, pu) = (private.elements_upto(40), public.elements_upto(40));
        let public_only: Vec<u64> = pu.difference(&pr).copied().collect();
        let private_only: Vec<u64> = pr.difference(&pu).copied().collect();
        if public_only.iter().any(|&d| d >= 2) || private_only.iter().any(|&d| d <= 6) || public_only.is_empty() || private_only.is_empty() {
            return Err(format!("one-sided durations: public {public_only:?}, private {private_only:?}"));
        }
        Ok(())
    })?;
    within("full (0,3)", limit, || {
        let r = check_valuation(&a, &val(&[("p1", 0), ("p2", 3)]), CheckMode::Full, b).map_err(|e| e.to_string())?;
        if r.opaque { Ok(()) } else { Err(format!("full (0,3): {r:?}")) }
    })
}

// 3

fn oracle_cross_validation() -> Outcome {
    within("oracle suite", Duration::from_secs(60), || {
        let corpus = corpus();
        if corpus.len() < 10 {
            return Err(format!("corpus has {} models", corpus.len()));
        }
        for (name, pta) in &corpus {
            if pta.clocks.len() != 1 {
                return Err(format!("{name} has {} clocks", pta.clocks.len()));
            }
            cross_validate(name, pta, 4, 40)?;
        }
        Ok(())
    })
}

// 4

fn geometry_properties() -> Outcome {
    let mut r = runner();
    r.run(&poly_pair(), |(a, b)| {
        let ab = a.build().intersect(&b.build()).unwrap();
        for pt in half_grid(&a.vars) {
            if ab.contains(&pt).unwrap() != (a.holds(&pt) && b.holds(&pt)) {
                return Err(fail(format!("intersect at {pt:?}")));
            }
        }
        Ok(())
    })
    .map_err(|e| format!("intersect: {e}"))?;

    r.run(&poly_pair(), |(a, b)| {
        let d = PolySet::from_polyhedron(a.build()).difference(&PolySet::from_polyhedron(b.build())).unwrap();
        for pt in half_grid(&a.vars) {
            if d.contains(&pt).unwrap() != (a.holds(&pt) && !b.holds(&pt)) {
                return Err(fail(format!("difference at {pt:?}")));
            }
        }
        Ok(())
    })
    .map_err(|e| format!("difference: {e}"))?;

    r.run(&rand_poly(), |a| {
        let te = a.build().time_elapse(&["x"]).unwrap();
        let dir: BTreeMap<String, Rational> = [("x".to_string(), rat(-1))].into();
        for pt in half_grid(&a.vars) {
            if te.contains(&pt).unwrap() != exists_along(&a.constraints, &pt, &dir, true) {
                return Err(fail(format!("time elapse at {pt:?}")));
            }
        }
        Ok(())
    })
    .map_err(|e| format!("time_elapse: {e}"))?;

    r.run(&rand_poly(), |a| {
        let rs = a.build().reset_clocks(&["x"]).unwrap();
        let dir: BTreeMap<String, Rational> = [("x".to_string(), rat(1))].into();
        for pt in half_grid(&a.vars) {
            let want = pt["x"] == rat(0) && exists_along(&a.constraints, &pt, &dir, false);
            if rs.contains(&pt).unwrap() != want {
                return Err(fail(format!("reset at {pt:?}")));
            }
        }
        Ok(())
    })
    .map_err(|e| format!("reset: {e}"))?;

    r.run(&rand_poly(), |a| {
        let (keep, last) = a.vars.split_at(a.vars.len() - 1);
        let last = &last[0];
        let pr = a.build().project(keep).unwrap();
        let dir: BTreeMap<String, Rational> = [(last.clone(), rat(1))].into();
        for pt in half_grid(keep) {
            let mut full = pt.clone();
            full.insert(last.clone(), rat(0));
            if pr.contains(&pt).unwrap() != exists_along(&a.constraints, &full, &dir, false) {
                return Err(fail(format!("project at {pt:?}")));
            }
        }
        Ok(())
    })
    .map_err(|e| format!("project: {e}"))?;

    r.run(&rand_poly(), |a| {
        let p = a.build();
        for n in 0..a.vars.len() {
            let keep = &a.vars[..n];
            let once = p.project(keep).unwrap();
            if !once.project(keep).unwrap().same_set(&once).unwrap() {
                return Err(fail(format!("projection onto {keep:?} not idempotent")));
            }
            let looser = RandPoly { vars: a.vars.clone(), constraints: a.constraints[1..].to_vec() }.build();
            if !looser.project(keep).unwrap().includes(&once).unwrap() {
                return Err(fail(format!("projection onto {keep:?} not monotone")));
            }
        }
        Ok(())
    })
    .map_err(|e| format!("projection laws: {e}"))
}

// 5

fn periodic_properties() -> Outcome {
    let mut r = runner();
    r.run(&(periodic(), periodic()), |(a, b)| {
        let (ea, eb) = (enumerate(&a), enumerate(&b));
        if enumerate(&a.union(&b)) != ea.union(&eb).copied().collect() {
            return Err(fail(format!("union of {a} and {b}")));
        }
        if enumerate(&a.sum(&b)) != brute_sum(&ea, &eb) {
            return Err(fail(format!("sum of {a} and {b}")));
        }
        Ok(())
    })
    .map_err(|e| format!("union/sum: {e}"))?;

    r.run(&periodic(), |a| {
        if enumerate(&a.star()) != brute_star(&enumerate(&a)) {
            return Err(fail(format!("star of {a}")));
        }
        Ok(())
    })
    .map_err(|e| format!("star: {e}"))?;

    r.run(&(periodic(), periodic(), 0u64..20, 1u64..4, proptest::bool::ANY), |(a, b, shift, mult, same)| {
        let b = if same {
            PeriodicSet::from_fn(a.threshold() + shift, a.period().max(1) * mult, |x| a.contains(x))
        } else {
            b
        };
        if (a == b) != (enumerate(&a) == enumerate(&b)) {
            return Err(fail(format!("equality of {a} and {b}")));
        }
        Ok(())
    })
    .map_err(|e| format!("equality: {e}"))?;

    for b in 0..=10u64 {
        for c in 0..=10u64 {
            let band: BTreeSet<u64> = (b..=c).collect();
            if enumerate(&interval_star(b, c)) != brute_star(&band) {
                return Err(format!("interval_star({b}, {c}) = {}", interval_star(b, c)));
            }
        }
    }
    Ok(())
}

// 6

fn div_formula_soundness() -> Outcome {
    for (name, pta) in corpus() {
        let exact = ExactAnalysis::new(&pta, ExplorationBudget::default()).map_err(|e| format!("{name}: {e}"))?;
        for terms in [&exact.private.terms, &exact.public.terms] {
            let f = build_div_formula(terms).map_err(|e| format!("{name}: {e}"))?;
            for v in grid(&pta.params, 4) {
                let s = evaluate_at(terms, &v).map_err(|e| format!("{name}: {e}"))?;
                for d in 0..=40u64 {
                    let mut at: BTreeMap<String, u64> = v.clone();
                    at.insert("d".into(), d);
                    let got = eval_div_formula(&f, &at, d).map_err(|e| format!("{name}: {e}"))?;
                    if got != s.contains(d) {
                        return Err(format!("{name} {v:?} d={d}: formula {got}, durations {s}"));
                    }
                }
            }
        }
    }

    let exact = ExactAnalysis::new(&load("running.pta"), ExplorationBudget::default()).map_err(|e| e.to_string())?;
    let f = DivFormula::and(vec![
        build_div_formula(&exact.private.terms).map_err(|e| e.to_string())?,
        build_div_formula(&exact.public.terms).map_err(|e| e.to_string())?,
    ]);
    let text = emit_smt(&f);
    check_smt(&text).map_err(|e| format!("malformed SMT script: {e}"))?;
    match run_solver(&text) {
        Some(out) if out.trim_start().starts_with("sat") => {}
        Some(out) => return Err(format!("solver answered {out}")),
        None => println!("note: no SMT solver on PATH, satisfiability check skipped"),
    }
    Ok(())
}

fn run_solver(script: &str) -> Option<String> {
    use std::io::Write;
    use std::process::{Command, Stdio};
    let mut child = Command::new("z3").arg("-in").stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().ok()?;
    child.stdin.take()?.write_all(script.as_bytes()).ok()?;
    let out = child.wait_with_output().ok()?;
    Some(String::from_utf8_lossy(&out.stdout).into_owned())
}

fn main() -> std::process::ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1a running example PET and synthesis, exact", running_regressions),
        ("1b three-valuation PETs, exact", three_valuation_pets),
        ("1c parametric loop closed form, p,q <= 6, d <= 40", self_loop_closed_form),
        ("2  per-valuation verdicts, < 1 s each", running_verdicts),
        ("3  oracle cross-validation, 100% on the corpus, < 60 s", oracle_cross_validation),
        ("4  geometry vs grid sampling, 500 cases per operation", geometry_properties),
        ("5  periodic sets vs enumeration, 500 cases, interval star b,c <= 10", periodic_properties),
        ("6  divisibility formula vs durations, SMT well-formed", div_formula_soundness),
    ];
    let mut failed = Vec::new();
    for (name, f) in criteria {
        let t = Instant::now();
        let r = f();
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(()) => println!("PASS  {name}  ({secs:.2} s)"),
            Err(e) => {
                println!("FAIL  {name}  ({secs:.2} s): {e}");
                failed.push(name);
            }
        }
    }
    if failed.is_empty() {
        std::process::ExitCode::SUCCESS
    } else {
        eprintln!("failed criteria: {failed:?}");
        std::process::ExitCode::FAILURE
    }
}
