//! One function per task. Each returns machine-readable results, named
//! verdicts and human-readable lines.

use anyhow::{bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Map, Value};

use ratmodel::cdga::{cohomology, truncate, GradedCohomology, TruncatedDGA};
use ratmodel::exactlin::format_rational;
use ratmodel::gluing::{fiber_product, mayer_vietoris, suspension_model, suspension_triple, theta_equivalence_check};
use ratmodel::localsys::global_sections;
use ratmodel::polyforms::check_admissible_axioms;
use ratmodel::specseq::{e2_check, einfty_vs_target, pages, skeletal_filtration};
use ratmodel::sullivan::{loop_model, minimal_model, minimality_check};
use ratmodel::Rational;

use crate::problem::{explicit_spec, free_spec, input_error, render_matrix, render_vector, required, Resolver};

/// Flags shared by every task.
pub struct Options {
    pub upto: Option<usize>,
    pub verify: bool,
}

#[derive(Default)]
pub struct Outcome {
    pub results: Map<String, Value>,
    pub verdicts: Vec<(String, bool)>,
    pub human: Vec<String>,
}

impl Outcome {
    fn put(&mut self, key: &str, v: impl Into<Value>) {
        self.results.insert(key.to_string(), v.into());
    }

    fn verdict(&mut self, name: &str, ok: bool) {
        self.verdicts.push((name.to_string(), ok));
    }

    fn say(&mut self, line: impl Into<String>) {
        self.human.push(line.into());
    }
}

pub fn run(task: &str, r: &Resolver, opts: &Options) -> Result<Outcome> {
    match task {
        "cohomology" => cohomology_task(r, opts),
        "minimal-model" => minimal_model_task(r, opts),
        "loop-model" => loop_model_task(r, opts),
        "suspend" => suspend_task(r, opts),
        "glue" => glue_task(r, opts),
        "gamma" => gamma_task(r, opts),
        "ss" => ss_task(r, opts),
        "check-admissible" => admissible_task(r, opts),
        other => Err(input_error(format!("unknown task {other:?}"))),
    }
}

fn upto(r: &Resolver, opts: &Options) -> Option<usize> {
    opts.upto.or(r.problem.params.upto)
}

/// `c₁·label₁ + c₂·label₂ + ...` over a basis.
fn combination(labels: &[String], v: &[Rational]) -> String {
    let mut out = String::new();
    for (l, c) in labels.iter().zip(v) {
        if c == &Rational::default() {
            continue;
        }
        let neg = c < &Rational::default();
        let abs = if neg { -c.clone() } else { c.clone() };
        out.push_str(match (out.is_empty(), neg) {
            (true, false) => "",
            (true, true) => "-",
            (false, false) => " + ",
            (false, true) => " - ",
        });
        if abs != Rational::from_integer(1.into()) {
            out.push_str(&format_rational(&abs));
            out.push('*');
        }
        out.push_str(l);
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn class_names(k: usize, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("h{k}_{i}")).collect()
}

/// Dimensions, representatives and the product table of `H(a)` through
/// `upto`.
fn describe_cohomology(a: &TruncatedDGA, h: &GradedCohomology, out: &mut Outcome) {
    let upto = h.upto();
    out.put("dims", h.dims());
    out.say(format!("dims {:?}", h.dims()));
    let mut classes = Vec::new();
    for k in 0..=upto {
        for (i, rep) in h.reps(k).iter().enumerate() {
            let name = format!("h{k}_{i}");
            let text = combination(a.labels(k), rep);
            out.say(format!("  {name} = [{text}]"));
            classes.push(json!({ "name": name, "degree": k, "representative": text, "coordinates": render_vector(rep) }));
        }
    }
    out.put("classes", classes);
    let mut products = Vec::new();
    for i in 1..=upto {
        for j in i..=upto - i {
            for x in 0..h.dim(i) {
                for y in 0..h.dim(j) {
                    let Some(c) = h.product(i, x, j, y) else { continue };
                    if c.iter().all(|v| v == &Rational::default()) {
                        continue;
                    }
                    let value = combination(&class_names(i + j, h.dim(i + j)), c);
                    out.say(format!("  h{i}_{x} * h{j}_{y} = {value}"));
                    products.push(json!({ "left": format!("h{i}_{x}"), "right": format!("h{j}_{y}"), "value": value }));
                }
            }
        }
    }
    out.put("products", products);
}

/// `dim Z^k - dim B^k` from ranks of the differential alone.
fn brute_dims(a: &TruncatedDGA, upto: usize) -> Result<Vec<usize>> {
    let mut ranks = Vec::new();
    for k in 0..=upto {
        ranks.push(a.d_matrix(k)?.rank());
    }
    Ok((0..=upto).map(|k| a.dim(k) - ranks[k] - if k > 0 { ranks[k - 1] } else { 0 }).collect())
}

fn cohomology_task(r: &Resolver, opts: &Options) -> Result<Outcome> {
    let name = required(&r.problem.params.algebra, "algebra")?;
    let a = r.truncated(name)?;
    let upto = upto(r, opts).unwrap_or(a.cutoff().saturating_sub(1));
    let h = cohomology(&a, upto)?;
    let mut out = Outcome::default();
    out.put("algebra", name);
    out.put("upto", upto);
    describe_cohomology(&a, &h, &mut out);
    if opts.verify {
        let brute = brute_dims(&a, upto)?;
        out.verdict("independent rank count", brute == h.dims());
    }
    Ok(out)
}

fn minimal_model_task(r: &Resolver, opts: &Options) -> Result<Outcome> {
    let name = required(&r.problem.params.algebra, "algebra")?;
    let a = r.truncated(name)?;
    let upto = upto(r, opts).unwrap_or(a.cutoff().saturating_sub(1));
    let mm = minimal_model(&a, upto)?;
    let mut out = Outcome::default();
    out.put("algebra", name);
    out.put("upto", upto);
    let spec = free_spec(&mm.model, None);
    for (g, d) in &spec.generators {
        match spec.differentials.get(g) {
            Some(dg) => out.say(format!("{g} ({d}), d{g} = {dg}")),
            None => out.say(format!("{g} ({d}), d{g} = 0")),
        }
    }
    out.put("model", serde_json::to_value(&spec)?);
    out.verdict("minimal", minimality_check(&mm.model).minimal);
    if opts.verify && upto > 0 {
        let q = mm.comparison.is_quasi_iso(upto - 1)?;
        out.verdict("comparison is a quasi-isomorphism below upto", q.is_quasi_iso);
    }
    Ok(out)
}

fn loop_model_task(r: &Resolver, opts: &Options) -> Result<Outcome> {
    let name = required(&r.problem.params.algebra, "algebra")?;
    let base = r.free(name)?;
    let l = loop_model(&base)?;
    let mut out = Outcome::default();
    out.put("algebra", name);
    let spec = free_spec(&l, None);
    for (g, d) in &spec.generators {
        out.say(format!("{g} ({d}), d{g} = {}", spec.differentials.get(g).map_or("0", String::as_str)));
    }
    out.put("model", serde_json::to_value(&spec)?);
    if let Some(n) = upto(r, opts) {
        let t = truncate(&l, n + 1);
        let h = cohomology(&t, n)?;
        out.put("upto", n);
        out.put("dims", h.dims());
        out.say(format!("dims {:?}", h.dims()));
        if opts.verify {
            out.verdict("independent rank count", brute_dims(&t, n)? == h.dims());
        }
    }
    Ok(out)
}

fn suspend_task(r: &Resolver, opts: &Options) -> Result<Outcome> {
    let name = required(&r.problem.params.algebra, "algebra")?;
    let m = r.truncated(name)?;
    let sm = suspension_model(&m)?;
    let carrier = sm.carrier();
    let upto = upto(r, opts).unwrap_or(carrier.cutoff().saturating_sub(1));
    let h = cohomology(carrier, upto)?;
    let mut out = Outcome::default();
    out.put("algebra", name);
    out.put("upto", upto);
    describe_cohomology(carrier, &h, &mut out);
    out.put("model", serde_json::to_value(explicit_spec(carrier)?)?);
    if opts.verify {
        let fp_upto = upto.min(m.cutoff().saturating_sub(1));
        let tri = suspension_triple(&m, 2)?;
        let fp = fiber_product(&tri.f, &tri.g, fp_upto)?;
        let xi = tri.suspension_inclusion(&sm, &fp)?;
        out.verdict("inclusion into the fiber product is a quasi-isomorphism", theta_equivalence_check(&fp, carrier, &xi, fp_upto)?);
    }
    Ok(out)
}

fn glue_task(r: &Resolver, opts: &Options) -> Result<Outcome> {
    let p = &r.problem.params;
    let f = r.morphism(required(&p.f, "f")?)?;
    let g = r.morphism(required(&p.g, "g")?)?;
    if !ratmodel::cdga::same_algebra(f.target(), g.target()) {
        bail!(input_error("f and g must have the same target"));
    }
    let n = f.top_degree().min(g.top_degree());
    let upto = upto(r, opts).unwrap_or(n.saturating_sub(1));
    let fp = fiber_product(&f, &g, upto)?;
    let mv = mayer_vietoris(&fp, upto)?;
    let mut out = Outcome::default();
    out.put("upto", upto);
    out.put("dims", mv.dims_fiber_product.clone());
    out.put("dims_sum", mv.dims_sum.clone());
    out.put("dims_base", mv.dims_base.clone());
    out.put("connecting_ranks", mv.connecting_ranks());
    out.put("connecting_maps", mv.delta.iter().map(render_matrix).collect::<Vec<_>>());
    out.say(format!("H(P) {:?}, H(A)+H(B) {:?}, H(C) {:?}", mv.dims_fiber_product, mv.dims_sum, mv.dims_base));
    out.say(format!("connecting ranks {:?}", mv.connecting_ranks()));
    for node in mv.nodes.iter().filter(|n| !n.exact) {
        out.say(format!("  not exact at {} in degree {}", node.label, node.degree));
    }
    out.put("model", serde_json::to_value(explicit_spec(fp.carrier())?)?);
    out.verdict("Mayer-Vietoris sequence exact", mv.all_exact());
    Ok(out)
}

fn gamma_task(r: &Resolver, opts: &Options) -> Result<Outcome> {
    let name = required(&r.problem.params.system, "system")?;
    let e = r.system(name)?;
    let upto = upto(r, opts).unwrap_or(e.cutoff().saturating_sub(1));
    let gs = global_sections(&e, upto)?;
    let mut out = Outcome::default();
    out.put("system", name);
    out.put("upto", upto);
    out.put("section_dims", gs.dims());
    out.say(format!("section dims {:?}", gs.dims()));
    let dga = gs.to_dga()?;
    let h = cohomology(&dga, dga.cutoff().saturating_sub(1))?;
    describe_cohomology(&dga, &h, &mut out);
    out.put("model", serde_json::to_value(explicit_spec(&dga)?)?);
    if opts.verify {
        out.verdict("independent rank count", gs.cohomology_dims()[..h.dims().len()] == h.dims()[..]);
    }
    Ok(out)
}

fn ss_task(r: &Resolver, opts: &Options) -> Result<Outcome> {
    let p = &r.problem.params;
    let name = required(&p.system, "system")?;
    let e = r.system(name)?;
    let p_max = p.p_max.unwrap_or(e.base().dim());
    let q_max = p.q_max.or(upto(r, opts)).unwrap_or(e.cutoff().saturating_sub(1));
    let rep = e2_check(&e, p_max, q_max)?;
    let mut out = Outcome::default();
    out.put("system", name);
    out.put("p_max", p_max);
    out.put("q_max", q_max);
    out.put("e2", rep.spectral.clone());
    out.put("local_coefficients", rep.local.clone());
    out.put("mismatches", rep.mismatches.iter().map(|(p, q)| vec![*p, *q]).collect::<Vec<_>>());
    out.say("E2 rows p, columns q:");
    for (p, row) in rep.spectral.iter().enumerate() {
        out.say(format!("  p={p} {row:?}"));
    }
    out.verdict("E2 equals cohomology with local coefficients", rep.passed());
    let total = p_max + q_max;
    if total < e.cutoff() {
        let inf = einfty_vs_target(&e, total)?;
        out.put("e_infinity_totals", inf.spectral_totals.clone());
        out.put("section_cohomology", inf.target.clone());
        out.say(format!("E_inf totals {:?}, sections {:?}", inf.spectral_totals, inf.target));
        out.verdict("E_inf totals match the sections", inf.passed());
    }
    if opts.verify {
        let fc = skeletal_filtration(&e, total.min(e.cutoff().saturating_sub(1)))?;
        let ss = pages(&fc, fc.length() + 1)?;
        out.verdict("page tower consistent", ss.check_tower().is_ok());
    }
    Ok(out)
}

fn admissible_task(r: &Resolver, opts: &Options) -> Result<Outcome> {
    let p = &r.problem.params;
    let n_max = upto(r, opts).unwrap_or(3);
    let samples = p.samples.unwrap_or(20);
    let seed = p.seed.unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rep = check_admissible_axioms(n_max, samples, &mut rng);
    let mut out = Outcome::default();
    out.put("n_max", n_max);
    out.put("samples", samples);
    out.put("seed", seed);
    let mut checks = Vec::new();
    for c in &rep.checks {
        let status = if c.passed { "holds" } else { "FAILS" };
        let detail = if c.detail.is_empty() { String::new() } else { format!(": {}", c.detail) };
        out.say(format!("({}) {status} on {} cases{detail}", c.axiom, c.cases));
        checks.push(json!({ "axiom": c.axiom, "passed": c.passed, "cases": c.cases, "detail": c.detail }));
        out.verdict(&format!("axiom ({})", c.axiom), c.passed);
    }
    out.put("checks", checks);
    Ok(out)
}
