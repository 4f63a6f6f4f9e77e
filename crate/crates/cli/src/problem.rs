//! Problem files: a versioned JSON document naming algebras, morphisms,
//! simplicial complexes and local systems, plus the task to run on them.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use ratmodel::cdga::{quotient_by_monomials, truncate, DGMorphism, FreeCDGA, TruncatedDGA};
use ratmodel::exactlin::{format_rational, parse_rational, QMatrix, QVector};
use ratmodel::graded::Monomial;
use ratmodel::localsys::{constant_system, forms_system, FiniteLocalSystem};
use ratmodel::simplicial::{face, SimplicialComplexK};
use ratmodel::Rational;

pub const PROBLEM_VERSION: &str = "ratmodel-problem/1";

pub const TASKS: &[&str] = &["cohomology", "minimal-model", "loop-model", "suspend", "glue", "gamma", "ss", "check-admissible"];

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub version: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub task: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub algebras: BTreeMap<String, AlgebraSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub morphisms: BTreeMap<String, MorphismSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub complexes: BTreeMap<String, ComplexSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub systems: BTreeMap<String, SystemSpec>,
    #[serde(default)]
    pub params: Params,
}

/// Either generators with differentials (a free algebra, optionally divided
/// by monomials), or a finite basis with explicit structure tables.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlgebraSpec {
    Free(FreeSpec),
    Explicit(ExplicitSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FreeSpec {
    pub generators: Vec<(String, u32)>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub differentials: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub relations: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
}

/// `basis[k]` labels degree `k`; `differential[k]` maps degree `k` to
/// `k + 1`; products not listed are zero unless marked `undefined`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitSpec {
    pub basis: Vec<Vec<String>>,
    pub unit: Vec<Value>,
    pub differential: Vec<Vec<Vec<Value>>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub products: Vec<ProductEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<[usize; 4]>,
}

/// Basis element `a` of degree `i` times basis element `b` of degree `j`,
/// written `at: [i, a, j, b]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductEntry {
    pub at: [usize; 4],
    pub value: Vec<Value>,
}

/// Degreewise matrices with entries written as rational strings.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismSpec {
    pub source: String,
    pub target: String,
    pub matrices: Vec<Vec<Vec<Value>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexSpec {
    pub vertices: usize,
    pub simplices: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Every fiber the algebra, every restriction the identity.
    Constant { base: String, fiber: String },
    /// Polynomial forms of bounded weight tensored with the fiber, with
    /// fiber automorphisms across chosen edges.
    Forms {
        base: String,
        fiber: String,
        weight: usize,
        #[serde(default)]
        twists: Vec<Twist>,
    },
    /// One algebra per simplex and one morphism per face; face `i` omits
    /// vertex `i`.
    Explicit { base: String, fibers: Vec<FiberEntry>, faces: Vec<FaceEntry> },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Twist {
    pub edge: (usize, usize),
    pub morphism: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberEntry {
    pub simplex: Vec<usize>,
    pub algebra: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FaceEntry {
    pub simplex: Vec<usize>,
    pub face: usize,
    pub morphism: String,
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default)]
    pub algebra: Option<String>,
    #[serde(default)]
    pub system: Option<String>,
    #[serde(default)]
    pub f: Option<String>,
    #[serde(default)]
    pub g: Option<String>,
    #[serde(default)]
    pub upto: Option<usize>,
    #[serde(default)]
    pub p_max: Option<usize>,
    #[serde(default)]
    pub q_max: Option<usize>,
    #[serde(default)]
    pub samples: Option<usize>,
    #[serde(default)]
    pub seed: Option<u64>,
}

/// An input problem that failed to parse or validate.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(InputError(msg.into()))
}

pub fn parse(text: &str) -> Result<ProblemFile> {
    let p: ProblemFile =
        serde_json::from_str(text).map_err(|e| input_error(e.to_string()))?;
    if p.version != PROBLEM_VERSION {
        bail!(input_error(format!("unsupported version {:?}, expected {PROBLEM_VERSION:?}", p.version)));
    }
    if let Some(t) = &p.task {
        if !TASKS.contains(&t.as_str()) {
            bail!(input_error(format!("unknown task {t:?}")));
        }
    }
    Ok(p)
}

/// Parses a rational entry; only strings `"p"` or `"p/q"` are accepted.
pub fn rational(v: &Value) -> Result<Rational> {
    match v {
        Value::String(s) => parse_rational(s).map_err(|e| input_error(format!("{s:?}: {e}"))),
        other => Err(input_error(format!("rational entries must be strings such as \"3/4\", got {other}"))),
    }
}

fn vector(v: &[Value], len: usize) -> Result<QVector> {
    if v.len() != len {
        bail!(input_error(format!("expected {len} entries, got {}", v.len())));
    }
    v.iter().map(rational).collect()
}

fn matrix(rows: &[Vec<Value>], nrows: usize, ncols: usize) -> Result<QMatrix> {
    if rows.len() != nrows {
        bail!(input_error(format!("expected {nrows} rows, got {}", rows.len())));
    }
    let dense = rows.iter().map(|r| vector(r, ncols)).collect::<Result<Vec<_>>>()?;
    Ok(QMatrix::from_dense(nrows, ncols, &dense))
}

pub fn render_vector(v: &[Rational]) -> Vec<Value> {
    v.iter().map(|x| Value::String(format_rational(x))).collect()
}

pub fn render_matrix(m: &QMatrix) -> Vec<Vec<Value>> {
    m.to_dense().iter().map(|r| render_vector(r)).collect()
}

/// The schema form of a free algebra, for re-ingestion.
pub fn free_spec(f: &FreeCDGA, cutoff: Option<usize>) -> FreeSpec {
    let gens = f.algebra().generators();
    FreeSpec {
        generators: gens.iter().map(|g| (g.name.clone(), g.degree)).collect(),
        differentials: gens
            .iter()
            .enumerate()
            .filter(|(i, _)| !f.generator_differential(*i).is_zero())
            .map(|(i, g)| (g.name.clone(), f.algebra().format_element(f.generator_differential(i))))
            .collect(),
        relations: Vec::new(),
        cutoff,
    }
}

/// The schema form of a truncated algebra, listing every nonzero product.
pub fn explicit_spec(a: &TruncatedDGA) -> Result<ExplicitSpec> {
    let n = a.cutoff();
    let mut products = Vec::new();
    let mut undefined = Vec::new();
    for i in 0..=n {
        for j in 0..=n - i {
            for x in 0..a.dim(i) {
                for y in 0..a.dim(j) {
                    match a.basis_product(i, x, j, y)? {
                        Some(v) if v.iter().any(|c| c != &Rational::default()) => {
                            products.push(ProductEntry { at: [i, x, j, y], value: render_vector(&v) })
                        }
                        Some(_) => {}
                        None => undefined.push([i, x, j, y]),
                    }
                }
            }
        }
    }
    Ok(ExplicitSpec {
        basis: (0..=n).map(|k| a.labels(k).to_vec()).collect(),
        unit: render_vector(a.unit()),
        differential: (0..n).map(|k| a.d_matrix(k).map(render_matrix)).collect::<ratmodel::Result<_>>()?,
        products,
        undefined,
    })
}

fn explicit_algebra(spec: &ExplicitSpec) -> Result<TruncatedDGA> {
    if spec.basis.is_empty() {
        bail!(input_error("basis needs at least degree 0"));
    }
    let dims: Vec<usize> = spec.basis.iter().map(Vec::len).collect();
    let n = dims.len() - 1;
    let unit = vector(&spec.unit, dims[0]).context("unit")?;
    if spec.differential.len() != n {
        bail!(input_error(format!("expected {n} differential matrices, got {}", spec.differential.len())));
    }
    let diff = (0..n)
        .map(|k| matrix(&spec.differential[k], dims[k + 1], dims[k]).with_context(|| format!("differential out of degree {k}")))
        .collect::<Result<Vec<_>>>()?;
    let mut table: BTreeMap<[usize; 4], Option<QVector>> = BTreeMap::new();
    let in_range = |[i, x, j, y]: [usize; 4]| i + j <= n && x < dims[i] && y < dims[j];
    for e in &spec.products {
        if !in_range(e.at) {
            bail!(input_error(format!("product entry {:?} is out of range", e.at)));
        }
        let v = vector(&e.value, dims[e.at[0] + e.at[2]]).with_context(|| format!("product entry {:?}", e.at))?;
        if table.insert(e.at, Some(v)).is_some() {
            bail!(input_error(format!("product entry {:?} is listed twice", e.at)));
        }
    }
    for at in &spec.undefined {
        if !in_range(*at) || table.insert(*at, None).is_some() {
            bail!(input_error(format!("undefined entry {at:?} is out of range or listed twice")));
        }
    }
    let a = TruncatedDGA::from_fn(spec.basis.clone(), unit, diff, |i, x, j, y| {
        Ok(match table.get(&[i, x, j, y]) {
            Some(v) => v.clone(),
            None => Some(vec![Rational::default(); dims[i + j]]),
        })
    })?;
    a.validate().map_err(|e| input_error(e.to_string()))?;
    Ok(a)
}

/// Resolves names against a parsed problem; `cutoff_override` replaces the
/// cutoff of every algebra given by generators.
pub struct Resolver<'a> {
    pub problem: &'a ProblemFile,
    pub cutoff_override: Option<usize>,
    algebras: RefCell<BTreeMap<String, Arc<TruncatedDGA>>>,
}

impl<'a> Resolver<'a> {
    pub fn new(problem: &'a ProblemFile, cutoff_override: Option<usize>) -> Self {
        Resolver { problem, cutoff_override, algebras: RefCell::default() }
    }

    pub fn algebra_spec(&self, name: &str) -> Result<&'a AlgebraSpec> {
        self.problem.algebras.get(name).ok_or_else(|| input_error(format!("unknown algebra {name:?}")))
    }

    /// The free algebra behind `name`, ignoring relations and cutoff.
    pub fn free(&self, name: &str) -> Result<FreeCDGA> {
        let AlgebraSpec::Free(spec) = self.algebra_spec(name)? else {
            bail!(input_error(format!("algebra {name:?} is not given by generators")));
        };
        let gens: Vec<(&str, u32)> = spec.generators.iter().map(|(n, d)| (n.as_str(), *d)).collect();
        let diffs: Vec<(&str, &str)> = spec.differentials.iter().map(|(n, e)| (n.as_str(), e.as_str())).collect();
        FreeCDGA::parse(&gens, &diffs).map_err(|e| input_error(format!("algebra {name:?}: {e}")))
    }

    pub fn truncated(&self, name: &str) -> Result<Arc<TruncatedDGA>> {
        if let Some(a) = self.algebras.borrow().get(name) {
            return Ok(a.clone());
        }
        let alg = match self.algebra_spec(name)? {
            AlgebraSpec::Free(spec) => {
                let free = self.free(name)?;
                let n = self
                    .cutoff_override
                    .or(spec.cutoff)
                    .ok_or_else(|| input_error(format!("algebra {name:?} needs a cutoff, in the file or through --cutoff")))?;
                if spec.relations.is_empty() {
                    truncate(&free, n)
                } else {
                    let killed = spec
                        .relations
                        .iter()
                        .map(|r| {
                            let e = free.algebra().parse_element(r).map_err(|e| input_error(format!("relation {r:?}: {e}")))?;
                            let mut terms = e.terms();
                            match (terms.next(), terms.next()) {
                                (Some((m, _)), None) => Ok(m.clone()),
                                _ => Err(input_error(format!("relation {r:?} is not a single monomial"))),
                            }
                        })
                        .collect::<Result<Vec<Monomial>>>()?;
                    quotient_by_monomials(&free, &killed, n).map_err(|e| input_error(format!("algebra {name:?}: {e}")))?
                }
            }
            AlgebraSpec::Explicit(spec) => explicit_algebra(spec).with_context(|| format!("algebra {name:?}"))?,
        };
        let alg = Arc::new(alg);
        self.algebras.borrow_mut().insert(name.to_string(), alg.clone());
        Ok(alg)
    }

    pub fn morphism(&self, name: &str) -> Result<DGMorphism> {
        let spec = self.problem.morphisms.get(name).ok_or_else(|| input_error(format!("unknown morphism {name:?}")))?;
        let (src, tgt) = (self.truncated(&spec.source)?, self.truncated(&spec.target)?);
        let n = src.cutoff().min(tgt.cutoff());
        if spec.matrices.len() != n + 1 {
            bail!(input_error(format!("morphism {name:?} needs matrices for degrees 0..={n}, got {}", spec.matrices.len())));
        }
        let maps = spec
            .matrices
            .iter()
            .enumerate()
            .map(|(k, rows)| matrix(rows, tgt.dim(k), src.dim(k)).with_context(|| format!("morphism {name:?}, degree {k}")))
            .collect::<Result<Vec<_>>>()?;
        let m = DGMorphism::new(src, tgt, maps).map_err(|e| input_error(format!("morphism {name:?}: {e}")))?;
        m.validate().map_err(|e| input_error(format!("morphism {name:?}: {e}")))?;
        Ok(m)
    }

    pub fn complex(&self, name: &str) -> Result<SimplicialComplexK> {
        let spec = self.problem.complexes.get(name).ok_or_else(|| input_error(format!("unknown complex {name:?}")))?;
        SimplicialComplexK::from_simplices(spec.vertices, &spec.simplices).map_err(|e| input_error(format!("complex {name:?}: {e}")))
    }

    pub fn system(&self, name: &str) -> Result<FiniteLocalSystem> {
        let spec = self.problem.systems.get(name).ok_or_else(|| input_error(format!("unknown system {name:?}")))?;
        let built = match spec {
            SystemSpec::Constant { base, fiber } => constant_system(&self.complex(base)?, self.truncated(fiber)?)?,
            SystemSpec::Forms { base, fiber, weight, twists } => {
                let f = self.truncated(fiber)?;
                let mut tw = BTreeMap::new();
                for t in twists {
                    let m = self.morphism(&t.morphism)?;
                    let m = DGMorphism::new(f.clone(), f.clone(), m.matrices().to_vec())
                        .map_err(|e| input_error(format!("twist {:?} is not an endomorphism of the fiber: {e}", t.morphism)))?;
                    if tw.insert(t.edge, m).is_some() {
                        bail!(input_error(format!("edge {:?} is twisted twice", t.edge)));
                    }
                }
                forms_system(&self.complex(base)?, *weight, &f, &tw)?
            }
            SystemSpec::Explicit { base, fibers, faces } => self.explicit_system(&self.complex(base)?, fibers, faces)?,
        };
        let report = built.validate();
        if let Some(v) = report.violations.first() {
            bail!(input_error(format!("system {name:?} is not functorial at {:?}, faces {:?}: {}", v.simplex, v.faces, v.reason)));
        }
        Ok(built)
    }

    fn explicit_system(&self, base: &SimplicialComplexK, fibers: &[FiberEntry], faces: &[FaceEntry]) -> Result<FiniteLocalSystem> {
        let slot = |s: &[usize]| -> Result<(usize, usize)> {
            let idx = base.index_of(s).ok_or_else(|| input_error(format!("{s:?} is not a simplex of the base")))?;
            Ok((s.len() - 1, idx))
        };
        let mut fib: Vec<Vec<Option<Arc<TruncatedDGA>>>> = (0..=base.dim()).map(|d| vec![None; base.count(d)]).collect();
        for e in fibers {
            let (d, j) = slot(&e.simplex)?;
            if fib[d][j].replace(self.truncated(&e.algebra)?).is_some() {
                bail!(input_error(format!("two fibers over {:?}", e.simplex)));
            }
        }
        let fib = fib
            .into_iter()
            .enumerate()
            .map(|(d, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, f)| f.ok_or_else(|| input_error(format!("no fiber over {:?}", base.simplices(d)[j]))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut maps: Vec<Vec<Vec<Option<DGMorphism>>>> =
            (0..=base.dim()).map(|d| vec![vec![None; if d == 0 { 0 } else { d + 1 }]; base.count(d)]).collect();
        for e in faces {
            let (d, j) = slot(&e.simplex)?;
            if e.face >= maps[d][j].len() {
                bail!(input_error(format!("{:?} has no face {}", e.simplex, e.face)));
            }
            let (_, t) = slot(&face(&e.simplex, e.face))?;
            let m = self.morphism(&e.morphism)?;
            let m = DGMorphism::new(fib[d][j].clone(), fib[d - 1][t].clone(), m.matrices().to_vec())
                .map_err(|err| input_error(format!("face {} of {:?}: {err}", e.face, e.simplex)))?;
            if maps[d][j][e.face].replace(m).is_some() {
                bail!(input_error(format!("face {} of {:?} is given twice", e.face, e.simplex)));
            }
        }
        let maps = maps
            .into_iter()
            .enumerate()
            .map(|(d, row)| {
                row.into_iter()
                    .enumerate()
                    .map(|(j, ms)| {
                        ms.into_iter()
                            .enumerate()
                            .map(|(i, m)| m.ok_or_else(|| input_error(format!("face {i} of {:?} has no morphism", base.simplices(d)[j]))))
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        FiniteLocalSystem::new(base.clone(), fib, maps).map_err(|e| input_error(e.to_string()))
    }
}

pub fn required<'b>(v: &'b Option<String>, what: &str) -> Result<&'b str> {
    v.as_deref().ok_or_else(|| input_error(format!("params.{what} is required for this task")))
}
