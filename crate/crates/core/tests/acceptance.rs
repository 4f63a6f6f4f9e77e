//! One pass/fail line per acceptance criterion. Every comparison is exact
//! equality; each criterion also carries a runtime bound.

mod common;

use std::time::{Duration, Instant};

use num::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ratmodel::cdga::{cohomology, truncate, FreeCDGA, TruncatedDGA};
use ratmodel::exactlin::Rational;
use ratmodel::fixtures::{
    circle_from_interval, circle_system, compare_instance, cpn, product_projection, sphere_bundle, suspension_system, torus,
};
use ratmodel::gluing::{fiber_product, mayer_vietoris, suspension_model, suspension_triple, theta_equivalence_check};
use ratmodel::graded::Monomial;
use ratmodel::localsys::global_sections;
use ratmodel::polyforms::{check_admissible_axioms, ComplexForms, PolyForm};
use ratmodel::simplicial::SimplicialComplexK;
use ratmodel::specseq::{e2_check, einfty_vs_target, triple_morphism_pages};
use ratmodel::sullivan::{loop_model, minimal_model, minimality_check};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: ratmodel::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn torus_cohomology() -> Outcome {
    let t = truncate(&torus(), 3);
    let h = lib(cohomology(&t, 2))?;
    ensure(h.dims() == vec![1, 2, 1], || format!("dims {:?}", h.dims()))?;
    let prod = h.product(1, 0, 1, 1).ok_or("product outside truncation")?;
    ensure(prod.iter().any(|x| !x.is_zero()), || "[t1][t2] = 0".into())?;
    Ok(format!("dims {:?}, [t1][t2] = {:?}", h.dims(), prod.iter().map(ToString::to_string).collect::<Vec<_>>()))
}

fn cpn_minimal_models() -> Outcome {
    let mut notes = Vec::new();
    for n in 1..=3u32 {
        let target = cpn(n, 2 * n as usize + 3);
        let r = lib(minimal_model(&target, 2 * n as usize + 2))?;
        let alg = r.model.algebra();
        ensure(alg.ngens() == 2, || format!("n = {n}: {} generators", alg.ngens()))?;
        ensure(alg.gen_degree(0) == 2 && alg.gen_degree(1) == 2 * n + 1, || format!("n = {n}: wrong degrees"))?;
        let expected = ratmodel::graded::Element::monomial(Monomial::from_exponents(vec![n + 1]), Rational::one());
        ensure(*r.model.generator_differential(1) == expected, || {
            format!("n = {n}: dy = {}", alg.format_element(r.model.generator_differential(1)))
        })?;
        ensure(minimality_check(&r.model).minimal, || format!("n = {n}: not minimal"))?;
        notes.push(format!("n={n}: dy = {}", alg.format_element(r.model.generator_differential(1))));
    }
    Ok(notes.join("; "))
}

/// Rank of a dense rational matrix by plain Gaussian elimination.
fn brute_rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let mut rank = 0;
    let cols = rows.first().map_or(0, Vec::len);
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank][c].clone();
        for r in 0..rows.len() {
            if r != rank && !rows[r][c].is_zero() {
                let f = &rows[r][c] / &pivot;
                let prow = rows[rank].clone();
                for (x, y) in rows[r].iter_mut().zip(prow) {
                    *x -= &f * y;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Cohomology of a free CDGA through `upto` from its monomial bases.
fn brute_cohomology(f: &FreeCDGA, upto: u32) -> Vec<usize> {
    let alg = f.algebra();
    let bases: Vec<Vec<Monomial>> = (0..=upto + 1).map(|k| alg.basis_in_degree(k)).collect();
    let rank_out = |k: usize| {
        let rows: Vec<Vec<Rational>> = bases[k]
            .iter()
            .map(|m| {
                let dm = f.d(&ratmodel::graded::Element::monomial(m.clone(), Rational::one()));
                bases[k + 1].iter().map(|t| dm.coefficient(t)).collect()
            })
            .collect();
        brute_rank(rows)
    };
    let ranks: Vec<usize> = (0..=upto as usize).map(rank_out).collect();
    (0..=upto as usize).map(|k| bases[k].len() - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 }).collect()
}

fn loop_models() -> Outcome {
    for n in 1..=2u32 {
        let base = FreeCDGA::parse(&[("x", 2), ("y", 2 * n + 1)], &[("y", &format!("x^{}", n + 1))]).map_err(|e| e.to_string())?;
        let l = lib(loop_model(&base))?;
        let alg = l.algebra();
        let names: Vec<(&str, u32)> = alg.generators().iter().map(|g| (g.name.as_str(), g.degree)).collect();
        ensure(names == vec![("x", 2), ("y", 2 * n + 1), ("x_bar", 1), ("y_bar", 2 * n)], || format!("n = {n}: generators {names:?}"))?;
        let expect = |s: &str| alg.parse_element(s).map_err(|e| e.to_string());
        ensure(l.generator_differential(0).is_zero() && l.generator_differential(2).is_zero(), || "d x or d x_bar nonzero".into())?;
        ensure(*l.generator_differential(1) == expect(&format!("x^{}", n + 1))?, || "wrong d y".into())?;
        let dyb = if n == 1 { "2*x*x_bar".to_string() } else { format!("{}*x^{n}*x_bar", n + 1) };
        ensure(*l.generator_differential(3) == expect(&dyb)?, || {
            format!("n = {n}: d y_bar = {}", alg.format_element(l.generator_differential(3)))
        })?;
        if n == 1 {
            let dims = lib(cohomology(&truncate(&l, 5), 4))?.dims();
            let brute = brute_cohomology(&l, 4);
            ensure(dims == vec![1, 1, 1, 1, 1] && brute == dims, || format!("dims {dims:?}, brute force {brute:?}"))?;
        }
    }
    Ok("four generators for n = 1, 2; H^0..4 = (1,1,1,1,1) twice".into())
}

fn suspension_theorem() -> Outcome {
    let algebras: Vec<(&str, TruncatedDGA)> = vec![("S2", cpn(1, 7)), ("T2", truncate(&torus(), 7)), ("CP2", cpn(2, 7))];
    for (name, m) in algebras {
        let hm = lib(cohomology(&m, 5))?;
        let sm = lib(suspension_model(&m))?;
        let hs = lib(cohomology(sm.carrier(), 6))?;
        ensure(hs.dim(0) == 1, || format!("{name}: H^0 = {}", hs.dim(0)))?;
        for k in 0..=5 {
            let reduced = hm.dim(k) - usize::from(k == 0);
            ensure(hs.dim(k + 1) == reduced, || format!("{name}: H^{} = {} but reduced H^{k} = {reduced}", k + 1, hs.dim(k + 1)))?;
        }
        for i in 1..=6 {
            for j in 1..=6 - i {
                for a in 0..hs.dim(i) {
                    for b in 0..hs.dim(j) {
                        if let Some(p) = hs.product(i, a, j, b) {
                            ensure(p.iter().all(Zero::is_zero), || format!("{name}: nonzero product in degrees {i}, {j}"))?;
                        }
                    }
                }
            }
        }
    }
    Ok("S2, T2, CP2: H^{k+1} = reduced H^k, positive products vanish".into())
}

fn suspension_fiber_product() -> Outcome {
    let m = cpn(1, 7);
    let sm = lib(suspension_model(&m))?;
    let tri = lib(suspension_triple(&m, 2))?;
    let fp = lib(fiber_product(&tri.f, &tri.g, 6))?;
    let xi = lib(tri.suspension_inclusion(&sm, &fp))?;
    lib(xi.validate())?;
    ensure(lib(theta_equivalence_check(&fp, sm.carrier(), &xi, 6))?, || "inclusion is not a quasi-isomorphism".into())?;
    Ok("inclusion into the fiber product is a quasi-isomorphism through degree 6".into())
}

fn mayer_vietoris_exactness() -> Outcome {
    let circle = lib(circle_from_interval(2, 3))?;
    let mv = lib(mayer_vietoris(&circle, 2))?;
    ensure(mv.all_exact(), || format!("circle: inexact at {:?}", mv.nodes.iter().filter(|n| !n.exact).collect::<Vec<_>>()))?;
    let ranks: usize = mv.connecting_ranks().iter().sum();
    ensure(ranks == 1, || format!("circle: connecting ranks {:?}", mv.connecting_ranks()))?;
    let tri = lib(suspension_triple(&cpn(1, 6), 2))?;
    let fp = lib(fiber_product(&tri.f, &tri.g, 5))?;
    let smv = lib(mayer_vietoris(&fp, 5))?;
    ensure(smv.all_exact(), || "suspension: inexact node".into())?;
    Ok(format!("circle nodes {} exact, connecting rank 1; suspension nodes {} exact", mv.nodes.len(), smv.nodes.len()))
}

fn admissibility() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let rep = check_admissible_axioms(3, 20, &mut rng);
    for c in &rep.checks {
        ensure(c.passed, || format!("axiom ({}) failed: {}", c.axiom, c.detail))?;
    }
    let sampled = rep.get("v").map_or(0, |c| c.cases);
    ensure(sampled >= 20, || format!("only {sampled} samples for axiom (v)"))?;
    // Stokes: the integral of dω over Δ[n] is the alternating sum over faces
    let mut cases = 0;
    for i in 0..100 {
        let n = 1 + i % 3;
        let w = PolyForm::random(&mut rng, n, n - 1, 3);
        let lhs = lib(w.d().integrate())?;
        let mut rhs = Rational::zero();
        for f in 0..=n {
            let v = lib(w.face(f).integrate())?;
            rhs += if f % 2 == 0 { v } else { -v };
        }
        ensure(lhs == rhs, || format!("Stokes fails on Δ[{n}]"))?;
        cases += 1;
    }
    Ok(format!("axioms (i)-(v) pass, {sampled} samples for (v), Stokes on {cases} forms"))
}

fn gamma_forms() -> Outcome {
    let (total, e) = lib(product_projection(3, 4))?;
    let gs = lib(global_sections(&e, 3))?;
    let forms = lib(ComplexForms::new(&total, 3, 4))?;
    let lhs: Vec<usize> = gs.dims()[..=3].to_vec();
    let rhs: Vec<usize> = forms.dims()[..=3].to_vec();
    ensure(lhs == rhs, || format!("sections {lhs:?} vs forms {rhs:?}"))?;
    Ok(format!("dims {lhs:?} on both sides"))
}

fn e2_theorem() -> Outcome {
    let plain = lib(circle_system(false, 1, 7))?;
    let twisted = lib(circle_system(true, 1, 7))?;
    let s2 = SimplicialComplexK::boundary_of_simplex(3);
    let (_, susp) = lib(suspension_system(&s2, &cpn(1, 7), 2, 1, 6))?;
    let mut notes = Vec::new();
    for (name, e, upto) in [("constant", &plain, 6), ("twisted", &twisted, 6), ("suspension", susp.system(), 6)] {
        let rep = lib(e2_check(e, 2, 4))?;
        ensure(rep.passed(), || format!("{name}: E2 {:?} vs local {:?}", rep.spectral, rep.local))?;
        let inf = lib(einfty_vs_target(e, upto))?;
        ensure(inf.passed(), || format!("{name}: E_inf totals {:?} vs {:?}", inf.spectral_totals, inf.target))?;
        notes.push(format!("{name} E2 {:?}", rep.spectral));
    }
    let twisted_rows = lib(e2_check(&twisted, 2, 4))?.spectral;
    ensure(twisted_rows.iter().all(|row| row[2] == 0), || "twisted bidegrees do not vanish".into())?;
    let bundle = lib(sphere_bundle(2, 5))?;
    let inf = lib(einfty_vs_target(&bundle, 4))?;
    ensure(inf.passed(), || format!("bundle E_inf {:?} vs {:?}", inf.spectral_totals, inf.target))?;
    Ok(notes.join("; "))
}

fn naturality() -> Outcome {
    let inst = lib(compare_instance(&SimplicialComplexK::cycle(3), 1, 3))?;
    let pm = lib(triple_morphism_pages(inst.source.system(), inst.target.system(), &inst.morphism, 3, 3))?;
    ensure(pm.commutes, || "Psi_r does not commute with d_r".into())?;
    ensure(pm.natural, || "Psi_{r+1} is not induced by Psi_r".into())?;
    let k = inst.xi_degree;
    let src = pm.source.page(2).dim_pk(0, k);
    ensure(src == 1, || format!("E2^(0,{k}) of the source has dimension {src}"))?;
    let psi = pm.map(2, 0, k).ok_or("no Psi_2 at (0, 2)")?;
    ensure(!psi.is_zero(), || "Psi_2(1 ⊗ xi) = 0".into())?;
    let image: Vec<String> = psi.column(0).iter().map(ToString::to_string).collect();
    Ok(format!("Psi_r commutes with d_r for r <= 3; Psi_2(1 ⊗ xi) = {image:?}"))
}

fn property_suites() -> Outcome {
    let results = common::run_all();
    for (name, r) in &results {
        ensure(r.is_ok(), || format!("{name}: {}", r.as_ref().unwrap_err()))?;
    }
    Ok(format!("{} suites x {} cases", results.len(), common::CASES))
}

#[test]
fn acceptance() {
    let criteria: Vec<(&str, fn() -> Outcome, u64)> = vec![
        ("1 torus cohomology", torus_cohomology, 1),
        ("2 CP^n minimal models", cpn_minimal_models, 5),
        ("3 loop model of CP^n", loop_models, 10),
        ("4 suspension theorem", suspension_theorem, 5),
        ("5 suspension via fiber product", suspension_fiber_product, 5),
        ("6 Mayer-Vietoris exactness", mayer_vietoris_exactness, 2),
        ("7 admissibility suite", admissibility, 30),
        ("8 sections vs forms", gamma_forms, 10),
        ("9 E2 theorem", e2_theorem, 60),
        ("10 naturality and comparison", naturality, 30),
        ("11 property suites", property_suites, 60),
    ];
    let mut failed = Vec::new();
    for (name, run, secs) in criteria {
        let start = Instant::now();
        let out = run();
        let elapsed = start.elapsed();
        let in_time = elapsed <= Duration::from_secs(secs);
        let verdict = match (&out, in_time) {
            (Ok(_), true) => "PASS",
            _ => "FAIL",
        };
        let detail = match &out {
            Ok(s) => s.clone(),
            Err(s) => s.clone(),
        };
        let timing = format!("{:.2}s of {secs}s", elapsed.as_secs_f64());
        println!("criterion {name}: {verdict} ({timing}) {detail}");
        if verdict == "FAIL" {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
