//! Seeded instance generators and the randomized regression suite.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::Zero;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::bialgebra::{
    self, dualize, is_metaflat, is_metaflat_diagonal, metaflat_normal_form, schouten_structured, verify_main_theorem,
    xi_on_d, xi_on_s, Block, MetaflatReport, StructuredBivector, TheoremReport,
};
use crate::cocycle::{coboundary, cocycle_check, dual_bracket, dual_cocycle};
use crate::exterior::Multivector;
use crate::flat::{check_ndeg_for_basis, classify_degeneracy, DegeneracyReport, FlatModel};
use crate::format::{Instance, InstanceFile};
use crate::geometry::{self, milnor_verify};
use crate::lie::{jacobi_check, schouten, LieAlgebra};
use crate::linalg::Matrix;
use crate::scalar::{self, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("unsatisfiable request: {0}")]
    Unsatisfiable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Degenerate,
    Nondegenerate,
    Any,
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "degenerate" => Ok(Mode::Degenerate),
            "nondegenerate" => Ok(Mode::Nondegenerate),
            "any" => Ok(Mode::Any),
            _ => Err(format!("unknown mode {s:?} (degenerate, nondegenerate, any)")),
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mode::Degenerate => "degenerate",
            Mode::Nondegenerate => "nondegenerate",
            Mode::Any => "any",
        })
    }
}

/// Everything needed to regenerate one instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct InstanceSpec {
    pub seed: u64,
    pub k0: usize,
    pub l0: usize,
    pub m: usize,
    pub mode: Mode,
    /// Numerators lie in `[-bound, bound]`, denominators in `[1, bound]`.
    pub bound: i64,
}

// Independent streams of one seed.
const MODEL_STREAM: u64 = 0;
const BIVECTOR_STREAM: u64 = 1;
const CHECK_STREAM: u64 = 2;

pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn random_scalar(rng: &mut impl Rng, bound: i64) -> Scalar {
    let bound = bound.max(1);
    scalar::ratio(rng.gen_range(-bound..=bound), rng.gen_range(1..=bound))
}

fn nonzero_scalar(rng: &mut impl Rng, bound: i64) -> Scalar {
    loop {
        let v = random_scalar(rng, bound);
        if !v.is_zero() {
            return v;
        }
    }
}

fn random_column(rng: &mut impl Rng, k0: usize, bound: i64) -> Vec<Scalar> {
    loop {
        let col: Vec<Scalar> = (0..k0).map(|_| random_scalar(rng, bound)).collect();
        if col.iter().any(|c| !c.is_zero()) {
            return col;
        }
    }
}

fn lambda_from_columns(k0: usize, cols: &[Vec<Scalar>]) -> Matrix {
    Matrix::from_fn(k0, cols.len(), |i, j| cols[j][i].clone())
}

/// A flat model of the requested class, reproducible from `spec.seed`.
pub fn gen_flat_model(spec: &InstanceSpec) -> Result<FlatModel, HarnessError> {
    let InstanceSpec { k0, l0, m, bound, .. } = *spec;
    if m == 0 || k0 == 0 {
        return Err(HarnessError::Unsatisfiable(format!(
            "k0 = {k0}, m = {m}: a nonabelian model needs k0 ≥ 1 and m ≥ 1"
        )));
    }
    let mut rng = rng_for(spec.seed, MODEL_STREAM);
    let mode = match spec.mode {
        Mode::Any if m >= 2 && rng.gen_bool(0.5) => Mode::Degenerate,
        Mode::Any => Mode::Nondegenerate,
        other => other,
    };
    if mode == Mode::Degenerate {
        if m < 2 {
            return Err(HarnessError::Unsatisfiable(
                "a degenerate model needs two columns (m ≥ 2)".into(),
            ));
        }
        let mut cols: Vec<Vec<Scalar>> = (0..m).map(|_| random_column(&mut rng, k0, bound)).collect();
        let i = rng.gen_range(0..m);
        let mut j = rng.gen_range(0..m - 1);
        if j >= i {
            j += 1;
        }
        cols[j] = if rng.gen_bool(0.5) {
            cols[i].clone()
        } else {
            cols[i].iter().map(|c| -c.clone()).collect()
        };
        let model = FlatModel::new(k0, l0, m, lambda_from_columns(k0, &cols)).expect("nonzero columns");
        debug_assert!(classify_degeneracy(&model).is_degenerate());
        return Ok(model);
    }
    for _ in 0..10_000 {
        let cols: Vec<Vec<Scalar>> = (0..m).map(|_| random_column(&mut rng, k0, bound)).collect();
        let model = FlatModel::new(k0, l0, m, lambda_from_columns(k0, &cols)).expect("nonzero columns");
        if !classify_degeneracy(&model).is_degenerate() {
            return Ok(model);
        }
    }
    Err(HarnessError::Unsatisfiable(format!(
        "no nondegenerate λ found with bound {bound}"
    )))
}

/// A bivector in metaflat normal form for `model`; occasionally zero.
pub fn gen_conforming_bivector(model: &FlatModel, spec: &InstanceSpec) -> StructuredBivector {
    let mut rng = rng_for(spec.seed, BIVECTOR_STREAM);
    conforming_bivector(model, &mut rng, spec.bound)
}

pub fn conforming_bivector(model: &FlatModel, rng: &mut impl Rng, bound: i64) -> StructuredBivector {
    let mut r = StructuredBivector::for_model(model);
    if rng.gen_ratio(1, 16) {
        return r;
    }
    let (k0, l0, m) = (model.k0(), model.l0(), model.m());
    let put = |r: &mut StructuredBivector, b, i, j, v| r.set(b, i, j, v).expect("in shape");
    for i in 0..k0 {
        for j in i + 1..k0 {
            put(&mut r, Block::A, i, j, random_scalar(rng, bound));
        }
        for j in 0..l0 {
            put(&mut r, Block::B, i, j, random_scalar(rng, bound));
        }
    }
    for i in 0..l0 {
        for j in i + 1..l0 {
            put(&mut r, Block::F, i, j, random_scalar(rng, bound));
        }
    }
    for i in 0..m {
        put(&mut r, Block::N, i, i, random_scalar(rng, bound));
        for j in i + 1..m {
            if let Some(eps) = model.column_relation(i, j) {
                let mij = random_scalar(rng, bound);
                let nij = random_scalar(rng, bound);
                put(&mut r, Block::P, i, j, eps.apply(&mij));
                put(&mut r, Block::M, i, j, mij);
                put(&mut r, Block::N, j, i, eps.apply(&nij));
                put(&mut r, Block::N, i, j, nij);
            }
        }
    }
    r
}

/// Every block drawn independently, each entry zero with probability 1/2.
pub fn random_bivector(model: &FlatModel, rng: &mut impl Rng, bound: i64) -> StructuredBivector {
    let (k0, l0, m) = (model.k0(), model.l0(), model.m());
    let mut r = StructuredBivector::for_model(model);
    for b in Block::ALL {
        let (rows, cols) = b.shape(k0, l0, m);
        for i in 0..rows {
            for j in 0..cols {
                if (b.is_strict() && i >= j) || rng.gen_bool(0.5) {
                    continue;
                }
                r.set(b, i, j, nonzero_scalar(rng, bound)).expect("in shape");
            }
        }
    }
    r
}

pub fn random_invertible(rng: &mut impl Rng, n: usize, bound: i64) -> Matrix {
    loop {
        let m = Matrix::from_fn(n, n, |_, _| scalar::int(rng.gen_range(-bound..=bound)));
        if !m.determinant().expect("square").is_zero() {
            return m;
        }
    }
}

/// A random valid Lie algebra of dimension at most 6: catalog algebras,
/// small flat models, direct sums, all under a random change of basis.
pub fn random_lie_algebra(rng: &mut impl Rng) -> LieAlgebra {
    fn piece(rng: &mut impl Rng, max_dim: usize) -> LieAlgebra {
        loop {
            let alg = match rng.gen_range(0..5) {
                0 => LieAlgebra::so3(),
                1 => LieAlgebra::sl2(),
                2 => LieAlgebra::heisenberg(),
                3 => LieAlgebra::abelian(rng.gen_range(1..=2)),
                _ => {
                    let l0 = rng.gen_range(0..=1);
                    let lambda = Matrix::from_fn(1, 1, |_, _| nonzero_scalar(rng, 3));
                    FlatModel::new(1, l0, 1, lambda).expect("nonzero").expand()
                }
            };
            if alg.dim() <= max_dim {
                return alg;
            }
        }
    }
    let first = piece(rng, 4);
    let alg = if first.dim() <= 3 && rng.gen_bool(0.5) {
        let rest = 6 - first.dim();
        first.direct_sum(&piece(rng, rest))
    } else {
        first
    };
    let p = random_invertible(rng, alg.dim(), 2);
    alg.change_basis(&p).expect("invertible")
}

fn random_generic_bivector(rng: &mut impl Rng, n: usize, bound: i64) -> Multivector {
    let mut terms = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.6) {
                terms.push((vec![i, j], random_scalar(rng, bound)));
            }
        }
    }
    Multivector::from_terms(n, 2, terms).expect("in range")
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub count: usize,
    pub seed: u64,
    /// Upper bounds for `(k0, l0, m)`.
    pub dims: (usize, usize, usize),
    pub mode: Mode,
    pub bound: i64,
    /// Random basis changes tried per degenerate instance.
    pub basis_trials: usize,
    /// Replace the closed-form `ξ(d)` by a sign-flipped shadow.
    pub self_test: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            count: 1000,
            seed: 7,
            dims: (3, 2, 3),
            mode: Mode::Any,
            bound: 5,
            basis_trials: 20,
            self_test: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub index: usize,
    pub seed: u64,
    pub spec: InstanceSpec,
    pub check: String,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<InstanceFile>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CheckTally {
    pub passed: usize,
    pub failed: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteSummary {
    pub count: usize,
    pub seed: u64,
    pub dims: (usize, usize, usize),
    pub mode: Mode,
    pub self_test: bool,
    pub degenerate_instances: usize,
    pub golden: Vec<(String, bool)>,
    pub checks: BTreeMap<String, CheckTally>,
    pub failures: Vec<Failure>,
}

impl SuiteSummary {
    pub fn success(&self) -> bool {
        self.failures.is_empty() && self.golden.iter().all(|(_, ok)| *ok)
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "instances {} seed {} dims ≤ {:?} mode {}{}",
            self.count,
            self.seed,
            self.dims,
            self.mode,
            if self.self_test { " (self-test)" } else { "" }
        );
        let _ = writeln!(s, "degenerate instances {}", self.degenerate_instances);
        for (name, ok) in &self.golden {
            let _ = writeln!(s, "golden {name}: {}", if *ok { "pass" } else { "FAIL" });
        }
        for (name, t) in &self.checks {
            let _ = writeln!(s, "check {name}: passed {} failed {}", t.passed, t.failed);
        }
        for f in &self.failures {
            let _ = writeln!(
                s,
                "failure instance {} seed {} dims ({},{},{}) {}: {}: {}",
                f.index, f.seed, f.spec.k0, f.spec.l0, f.spec.m, f.spec.mode, f.check, f.detail
            );
        }
        let _ = writeln!(s, "result {}", if self.success() { "PASS" } else { "FAIL" });
        s
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

struct Outcome {
    degenerate: bool,
    results: Vec<(&'static str, Result<(), String>, Option<StructuredBivector>)>,
}

/// The per-instance seed for position `index` of a suite seeded with `seed`.
pub fn instance_seed(seed: u64, index: usize) -> u64 {
    rng_for(seed, 1_000 + index as u64).next_u64()
}

/// Dimensions and class for one suite instance.
pub fn instance_spec(config: &SuiteConfig, index: usize) -> InstanceSpec {
    let seed = instance_seed(config.seed, index);
    let mut rng = rng_for(seed, CHECK_STREAM + 1);
    let (kmax, lmax, mmax) = config.dims;
    let mode = match config.mode {
        Mode::Any if mmax >= 2 && rng.gen_bool(0.5) => Mode::Degenerate,
        Mode::Any => Mode::Nondegenerate,
        other => other,
    };
    let m_lo = if mode == Mode::Degenerate && mmax >= 2 { 2 } else { 1 };
    InstanceSpec {
        seed,
        k0: rng.gen_range(1..=kmax.max(1)),
        l0: rng.gen_range(0..=lmax),
        m: rng.gen_range(m_lo..=mmax.max(1)),
        mode,
        bound: config.bound,
    }
}

type Generated = Result<(Outcome, FlatModel), String>;

pub fn run_suite(config: &SuiteConfig) -> SuiteSummary {
    let outcomes: Vec<(InstanceSpec, Generated)> = (0..config.count)
        .into_par_iter()
        .map(|index| {
            let spec = instance_spec(config, index);
            match gen_flat_model(&spec) {
                Ok(model) => {
                    let out = run_instance(&model, &spec, config);
                    (spec, Ok((out, model)))
                }
                Err(e) => (spec, Err(e.to_string())),
            }
        })
        .collect();

    let mut checks: BTreeMap<String, CheckTally> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut degenerate_instances = 0;
    for (index, (spec, outcome)) in outcomes.into_iter().enumerate() {
        let (outcome, model) = match outcome {
            Ok(o) => o,
            Err(detail) => {
                checks.entry("generate".into()).or_default().failed += 1;
                failures.push(Failure {
                    index,
                    seed: spec.seed,
                    spec,
                    check: "generate".into(),
                    detail,
                    instance: None,
                });
                continue;
            }
        };
        degenerate_instances += usize::from(outcome.degenerate);
        for (name, res, r) in outcome.results {
            let tally = checks.entry(name.to_string()).or_default();
            match res {
                Ok(()) => tally.passed += 1,
                Err(detail) => {
                    tally.failed += 1;
                    let mut inst = Instance::new(model.clone());
                    inst.bivector = r;
                    inst.metadata = Some(serde_json::json!({
                        "seed": spec.seed,
                        "check": name,
                    }));
                    failures.push(Failure {
                        index,
                        seed: spec.seed,
                        spec,
                        check: name.to_string(),
                        detail,
                        instance: Some(inst.to_file()),
                    });
                }
            }
        }
    }
    SuiteSummary {
        count: config.count,
        seed: config.seed,
        dims: config.dims,
        mode: config.mode,
        self_test: config.self_test,
        degenerate_instances,
        golden: golden_suite(),
        checks,
        failures,
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn run_instance(model: &FlatModel, spec: &InstanceSpec, config: &SuiteConfig) -> Outcome {
    let mut rng = rng_for(spec.seed, CHECK_STREAM);
    let bound = spec.bound;
    let alg = Arc::new(model.expand());
    let labels = alg.labels().to_vec();
    let show = |v: &Multivector| v.display_with(&labels);
    let conforming = gen_conforming_bivector(model, spec);
    let random = random_bivector(model, &mut rng, bound);
    let mut results = Vec::new();

    let degeneracy = classify_degeneracy(model);
    results.push((
        "degeneracy",
        degeneracy_check(model, &degeneracy, spec.mode, config.basis_trials, &mut rng),
        None,
    ));

    results.push((
        "geometry",
        (|| {
            ensure(jacobi_check(&alg).passed(), || "Jacobi fails".into())?;
            ensure(geometry::is_flat(&alg).expect("metric"), || "curvature nonzero".into())?;
            let rep = milnor_verify(&alg, &model.split());
            ensure(rep.passed(), || format!("{:?}", rep.violations))?;
            (0..alg.dim()).try_for_each(|i| {
                let t = alg.trace_ad(&Multivector::basis(alg.dim(), i)).expect("dims");
                ensure(t.is_zero(), || {
                    format!("trace ad_{} = {}", labels[i], scalar::format(&t))
                })
            })
        })(),
        None,
    ));

    results.push((
        "theorem",
        match verify_main_theorem(model, &conforming) {
            Ok(TheoremReport::Verified) => Ok(()),
            Ok(TheoremReport::HypothesisNotMet(w)) => {
                Err(format!("conforming bivector not metaflat: {}", w.describe(&labels)))
            }
            Ok(TheoremReport::Violation(v)) => Err(format!("{v:?}")),
            Err(e) => Err(e.to_string()),
        },
        Some(conforming.clone()),
    ));

    results.push((
        "closed-form-xi",
        xi_check(model, &alg, &random, config.self_test, &show),
        Some(random.clone()),
    ));

    let mut no_cegh = random.clone();
    for (b, i, j, _) in random.entries() {
        if matches!(b, Block::C | Block::E | Block::G | Block::H) {
            no_cegh.set(b, i, j, scalar::zero()).expect("in shape");
        }
    }
    results.push((
        "structured-schouten",
        (|| {
            let v = no_cegh.to_multivector(model).map_err(|e| e.to_string())?;
            let generic = schouten(&alg, &v, &v).map_err(|e| e.to_string())?;
            let closed = schouten_structured(model, &no_cegh).map_err(|e| e.to_string())?;
            ensure(closed == generic, || {
                format!("closed {} vs generic {}", show(&closed), show(&generic))
            })
        })(),
        Some(no_cegh.clone()),
    ));

    let other = random_bivector(model, &mut rng, bound);
    results.push((
        "schouten-symmetry",
        (|| {
            let p = random.to_multivector(model).map_err(|e| e.to_string())?;
            let q = other.to_multivector(model).map_err(|e| e.to_string())?;
            let pq = schouten(&alg, &p, &q).map_err(|e| e.to_string())?;
            let qp = schouten(&alg, &q, &p).map_err(|e| e.to_string())?;
            ensure(pq == qp, || format!("[P,Q] = {} but [Q,P] = {}", show(&pq), show(&qp)))
        })(),
        Some(random.clone()),
    ));

    results.push((
        "dual-tables",
        dual_check(model, &alg, &conforming),
        Some(conforming.clone()),
    ));

    // one perturbed entry usually breaks conformity, sometimes not
    let mut perturbed = conforming.clone();
    let b = Block::ALL[rng.gen_range(0..Block::ALL.len())];
    let (rows, cols) = b.shape(model.k0(), model.l0(), model.m());
    if rows > 0 && cols > 0 {
        let i = rng.gen_range(0..rows);
        let j = rng.gen_range(0..cols);
        if !(b.is_strict() && i >= j) {
            perturbed
                .set(b, i, j, random_scalar(&mut rng, bound))
                .expect("in shape");
        }
    }
    for (name, r) in [("normal-form", &random), ("normal-form-perturbed", &perturbed)] {
        results.push((name, normal_form_check(model, &alg, r), Some(r.clone())));
    }

    results.push((
        "coboundary-cocycle",
        (|| {
            let xi = coboundary(&alg, &random.to_multivector(model).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            ensure(cocycle_check(&xi).passed(), || "flat model".into())?;
            let g = Arc::new(random_lie_algebra(&mut rng));
            ensure(jacobi_check(&g).passed(), || {
                format!("generated algebra not Lie: {g:?}")
            })?;
            let r = random_generic_bivector(&mut rng, g.dim(), bound);
            let xi = coboundary(&g, &r).map_err(|e| e.to_string())?;
            ensure(cocycle_check(&xi).passed(), || {
                format!("algebra {g:?}, r = {}", r.display_with(g.labels()))
            })
        })(),
        Some(random.clone()),
    ));

    results.push((
        "double-dual",
        (|| {
            let back = dual_bracket(&dual_cocycle(&alg)).map_err(|e| e.to_string())?;
            ensure(same_structure(&back, &alg), || {
                "dual of dual cocycle differs from 𝔤".into()
            })?;
            let xi = coboundary(&alg, &conforming.to_multivector(model).map_err(|e| e.to_string())?)
                .map_err(|e| e.to_string())?;
            let d = dual_bracket(&xi).map_err(|e| e.to_string())?;
            ensure(dual_cocycle(&d).matrix() == xi.matrix(), || {
                "ξ not recovered from 𝔤*".into()
            })
        })(),
        Some(conforming),
    ));

    Outcome {
        degenerate: degeneracy.is_degenerate(),
        results,
    }
}

/// Structure constants agree; labels and metrics are ignored.
pub fn same_structure(a: &LieAlgebra, b: &LieAlgebra) -> bool {
    let n = a.dim();
    n == b.dim() && (0..n).all(|i| (i + 1..n).all(|j| a.basis_bracket(i, j) == b.basis_bracket(i, j)))
}

fn degeneracy_check(
    model: &FlatModel,
    report: &DegeneracyReport,
    mode: Mode,
    trials: usize,
    rng: &mut impl Rng,
) -> Result<(), String> {
    ensure(report.validate(model), || {
        format!("report does not validate: {report:?}")
    })?;
    match (mode, report) {
        (Mode::Degenerate, DegeneracyReport::Nondegenerate { .. }) => {
            return Err("requested degenerate, classified nondegenerate".into())
        }
        (Mode::Nondegenerate, DegeneracyReport::Degenerate { .. }) => {
            return Err("requested nondegenerate, classified degenerate".into())
        }
        _ => {}
    }
    match report {
        DegeneracyReport::Nondegenerate { basis, .. } => {
            ensure(check_ndeg_for_basis(model, basis).map_err(|e| e.to_string())?, || {
                "certificate basis fails the condition".into()
            })
        }
        DegeneracyReport::Degenerate { .. } => (0..trials).try_for_each(|_| {
            let b = random_invertible(rng, model.k0(), 3);
            ensure(!check_ndeg_for_basis(model, &b).map_err(|e| e.to_string())?, || {
                format!("basis {b:?} satisfies the condition")
            })
        }),
    }
}

fn xi_check(
    model: &FlatModel,
    alg: &Arc<LieAlgebra>,
    r: &StructuredBivector,
    corrupt: bool,
    show: &dyn Fn(&Multivector) -> String,
) -> Result<(), String> {
    let xi = coboundary(alg, &r.to_multivector(model).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    for k in 0..model.k0() {
        let closed = xi_on_s(model, r, k).map_err(|e| e.to_string())?;
        let generic = xi.image(model.s(k));
        ensure(closed == generic, || {
            format!("ξ(s{}) closed {} vs generic {}", k + 1, show(&closed), show(&generic))
        })?;
    }
    for k in 0..model.m() {
        let (mut odd, mut even) = xi_on_d(model, r, k).map_err(|e| e.to_string())?;
        if corrupt {
            odd = -&odd;
            even = -&even;
        }
        for (closed, idx, name) in [(odd, model.d_odd(k), 2 * k + 1), (even, model.d_even(k), 2 * k + 2)] {
            let generic = xi.image(idx);
            ensure(closed == generic, || {
                format!("ξ(d{name}) closed {} vs generic {}", show(&closed), show(&generic))
            })?;
        }
    }
    Ok(())
}

fn dual_check(model: &FlatModel, alg: &Arc<LieAlgebra>, r: &StructuredBivector) -> Result<(), String> {
    let dual = dualize(model, r).map_err(|e| e.to_string())?;
    let xi = coboundary(alg, &r.to_multivector(model).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let generic = dual_bracket(&xi).map_err(|e| e.to_string())?;
    ensure(same_structure(&dual.algebra, &generic), || {
        format!("closed {:?} vs generic {:?}", dual.algebra, generic)
    })?;
    ensure(dual.cocycle.matrix() == dual_cocycle(alg).matrix(), || {
        "ξ* differs from the transpose of the bracket".into()
    })?;
    ensure(cocycle_check(&dual.cocycle).passed(), || {
        "ξ* is not a cocycle on 𝔤*".into()
    })?;
    let n = model.dim();
    let expanded = dual.model.expand();
    let map = &dual.basis_map;
    for a in 0..n {
        for b in a + 1..n {
            let got = dual.algebra.basis_bracket(map[a], map[b]);
            let want = expanded.basis_bracket(a, b);
            ensure((0..n).all(|c| got.coeff(&[map[c]]) == want.coeff(&[c])), || {
                format!("dual model disagrees on [{a},{b}]")
            })?;
        }
    }
    ensure(is_metaflat(&dual.model, &dual.model_cocycle()).passed(), || {
        "dual model cocycle not metaflat".into()
    })
}

fn normal_form_check(model: &FlatModel, alg: &Arc<LieAlgebra>, r: &StructuredBivector) -> Result<(), String> {
    let xi = coboundary(alg, &r.to_multivector(model).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let full = is_metaflat(model, &xi);
    let diag = is_metaflat_diagonal(model, &xi);
    let nf = metaflat_normal_form(model, r).map_err(|e| e.to_string())?;
    ensure(full.passed() == diag.passed(), || {
        format!("mixed {} vs diagonal {}", full.passed(), diag.passed())
    })?;
    ensure(full.passed() == nf.conforming(), || {
        format!("metaflat {} vs normal form {:?}", full.passed(), nf.violations)
    })?;
    if full.passed() {
        for k in 0..model.k0() {
            ensure(xi.image(model.s(k)).is_zero(), || {
                format!("metaflat but ξ(s{}) ≠ 0", k + 1)
            })?;
        }
    }
    Ok(())
}

/// Golden fixtures shipped with the crate, as `(name, file contents)`.
pub const FIXTURES: [(&str, &str); 5] = [
    ("ex1", include_str!("../fixtures/ex1.json")),
    ("ex1-general", include_str!("../fixtures/ex1-general.json")),
    ("ex2", include_str!("../fixtures/ex2.json")),
    ("ex3", include_str!("../fixtures/ex3.json")),
    ("ex4", include_str!("../fixtures/ex4.json")),
];

fn golden(name: &str) -> Result<(), String> {
    let text = FIXTURES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or("missing fixture")?;
    let inst = crate::format::parse_instance(text).map_err(|e| e.to_string())?;
    let model = &inst.model;
    let r = inst.bivector_or_zero();
    let alg = Arc::new(model.expand());
    let rv = r.to_multivector(model).map_err(|e| e.to_string())?;
    let cybe = bialgebra::cybe_check(&alg, &rv).map_err(|e| e.to_string())?;
    let theorem = verify_main_theorem(model, &r).map_err(|e| e.to_string())?;
    match name {
        "ex1" | "ex3" => {
            ensure(cybe.is_zero(), || "[r,r] ≠ 0".into())?;
            ensure(theorem == TheoremReport::Verified, || format!("{theorem:?}"))
        }
        "ex1-general" => {
            let (a, b) = (r.get(Block::C, 0, 0), r.get(Block::E, 0, 0));
            let want = Multivector::monomial(3, &[0, 1, 2], scalar::int(2) * (&a * &a + &b * &b))
                .map_err(|e| e.to_string())?;
            ensure(cybe == bialgebra::CybeReport::Nonzero(want), || format!("{cybe:?}"))?;
            ensure(matches!(theorem, TheoremReport::HypothesisNotMet(_)), || {
                format!("{theorem:?}")
            })
        }
        "ex2" => {
            ensure(cybe.is_zero(), || "[r,r] ≠ 0".into())?;
            let TheoremReport::HypothesisNotMet(w) = &theorem else {
                return Err(format!("{theorem:?}"));
            };
            let want = Multivector::monomial(4, &[1, 3], scalar::int(-1)).map_err(|e| e.to_string())?;
            ensure(
                matches!(w, MetaflatReport::Fail { value, .. } if *value == want),
                || w.describe(alg.labels()),
            )
        }
        "ex4" => {
            ensure(cybe.is_zero(), || "[r,r] ≠ 0".into())?;
            ensure(theorem == TheoremReport::Verified, || format!("{theorem:?}"))?;
            let dual = dualize(model, &r).map_err(|e| e.to_string())?;
            ensure(dual.algebra.is_abelian(), || "dual not abelian".into())
        }
        _ => Err("no golden expectation".into()),
    }
}

/// Runs every shipped golden fixture against its expected verdicts.
pub fn golden_suite() -> Vec<(String, bool)> {
    FIXTURES
        .iter()
        .map(|(name, _)| (name.to_string(), golden(name).is_ok()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(seed: u64, k0: usize, l0: usize, m: usize, mode: Mode) -> InstanceSpec {
        InstanceSpec {
            seed,
            k0,
            l0,
            m,
            mode,
            bound: 5,
        }
    }

    #[test]
    fn generators_respect_mode() {
        let nd = gen_flat_model(&spec(1, 1, 0, 2, Mode::Nondegenerate)).unwrap();
        assert_ne!(nd.lam(0, 0) * nd.lam(0, 0), nd.lam(0, 1) * nd.lam(0, 1));
        let dg = gen_flat_model(&spec(2, 2, 1, 2, Mode::Degenerate)).unwrap();
        assert!(classify_degeneracy(&dg).is_degenerate());
        assert!(gen_flat_model(&spec(3, 1, 0, 1, Mode::Degenerate)).is_err());
        assert_eq!(
            gen_flat_model(&spec(9, 3, 2, 3, Mode::Any)).unwrap(),
            gen_flat_model(&spec(9, 3, 2, 3, Mode::Any)).unwrap()
        );
    }

    #[test]
    fn conforming_bivectors_shapes() {
        for seed in 0..40 {
            let s = spec(seed, 2, 1, 3, Mode::Nondegenerate);
            let m = gen_flat_model(&s).unwrap();
            let r = gen_conforming_bivector(&m, &s);
            assert!(r
                .entries()
                .all(|(b, i, j, _)| matches!(b, Block::A | Block::B | Block::F) || (b == Block::N && i == j)));
            let s = spec(seed, 2, 1, 3, Mode::Degenerate);
            let m = gen_flat_model(&s).unwrap();
            let r = gen_conforming_bivector(&m, &s);
            assert!(metaflat_normal_form(&m, &r).unwrap().conforming());
        }
    }

    #[test]
    fn golden_fixtures_pass() {
        for (name, ok) in golden_suite() {
            assert!(ok, "{name}: {:?}", golden(&name));
        }
    }

    #[test]
    fn small_suite_is_deterministic() {
        let cfg = SuiteConfig {
            count: 12,
            ..SuiteConfig::default()
        };
        let a = run_suite(&cfg);
        assert!(a.success(), "{}", a.to_text());
        assert_eq!(a.to_text(), run_suite(&cfg).to_text());
        let empty = run_suite(&SuiteConfig {
            count: 0,
            ..SuiteConfig::default()
        });
        assert!(empty.success() && empty.checks.is_empty());
    }

    #[test]
    fn self_test_reports_seeds() {
        let cfg = SuiteConfig {
            count: 8,
            self_test: true,
            ..SuiteConfig::default()
        };
        let s = run_suite(&cfg);
        assert!(!s.success());
        assert!(s.failures.iter().all(|f| f.check == "closed-form-xi"));
        assert!(s.failures.iter().all(|f| f.seed == instance_seed(cfg.seed, f.index)));
    }
}
