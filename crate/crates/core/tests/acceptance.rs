//! Acceptance gate: one PASS/FAIL line per criterion, exact comparisons only.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;

use metaflat::bialgebra::{
    cybe_check, dualize, is_metaflat, metaflat_normal_form, verify_main_theorem, xi_on_d, xi_on_s, MetaflatReport,
    StructuredBivector, TheoremReport,
};
use metaflat::cocycle::{coboundary, cocycle_check, dual_bracket, dual_cocycle};
use metaflat::exterior::Multivector;
use metaflat::flat::{check_ndeg_for_basis, classify_degeneracy, DegeneracyReport, FlatModel};
use metaflat::format::{read_instance, Instance};
use metaflat::geometry::{curvature, is_flat, levi_civita, milnor_verify};
use metaflat::harness::{
    gen_conforming_bivector, gen_flat_model, instance_spec, random_bivector, random_invertible, random_scalar, rng_for,
    run_suite, same_structure, InstanceSpec, Mode, SuiteConfig,
};
use metaflat::lie::{ad_multivector, jacobi_check, schouten, LieAlgebra};
use metaflat::linalg::Matrix;
use metaflat::scalar::{self, Scalar};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(format!("{name}.json"))
}

fn load(name: &str) -> Instance {
    read_instance(&fixture(name)).expect("fixture parses")
}

fn mono(n: usize, idx: &[usize], c: Scalar) -> Multivector {
    Multivector::monomial(n, idx, c).unwrap()
}

fn criterion_1() -> Outcome {
    let model = FlatModel::from_i64(1, 0, 1, &[&[1]]).unwrap();
    let alg = Arc::new(model.expand());
    let (s, d1, d2) = (0, 1, 2);
    let mut rng = rng_for(101, 0);
    let mut zero_ab = 0;
    for t in 0..50 {
        let (a, b) = if t < 5 {
            (scalar::zero(), scalar::zero())
        } else {
            (random_scalar(&mut rng, 9), random_scalar(&mut rng, 9))
        };
        let c = random_scalar(&mut rng, 9);
        let r = &(&mono(3, &[s, d1], a.clone()) + &mono(3, &[s, d2], b.clone())) + &mono(3, &[d1, d2], c.clone());
        let rr = schouten(&alg, &r, &r).unwrap();
        let want = mono(3, &[s, d1, d2], scalar::int(2) * (&a * &a + &b * &b));
        check(rr == want, || format!("[r,r] = {rr} for a={a}, b={b}"))?;
        let xi = coboundary(&alg, &r).unwrap();
        let expect = [
            &mono(3, &[s, d1], -b.clone()) + &mono(3, &[s, d2], a.clone()),
            mono(3, &[d1, d2], a.clone()),
            mono(3, &[d1, d2], b.clone()),
        ];
        for (x, e) in expect.iter().enumerate() {
            check(xi.image(x) == *e, || {
                format!("ξ(e{x}) = {} for a={a}, b={b}", xi.image(x))
            })?;
        }
        let ab_zero = a.is_zero() && b.is_zero();
        zero_ab += usize::from(ab_zero);
        let meta = is_metaflat(&model, &xi).passed();
        let cybe = cybe_check(&alg, &r).unwrap().is_zero();
        check(meta == ab_zero && cybe == ab_zero, || {
            format!("a={a}, b={b}: metaflat {meta}, cybe zero {cybe}")
        })?;
    }
    Ok(format!("50 samples, {zero_ab} with a = b = 0"))
}

fn criterion_2() -> Outcome {
    let inst = load("ex2");
    let model = &inst.model;
    let alg = Arc::new(model.expand());
    let r = inst.bivector_or_zero().to_multivector(model).unwrap();
    check(r == mono(4, &[1, 2], scalar::one()), || format!("fixture r = {r}"))?;
    check(cybe_check(&alg, &r).unwrap().is_zero(), || "[r,r] ≠ 0".into())?;
    let xi = coboundary(&alg, &r).unwrap();
    let report = is_metaflat(model, &xi);
    let MetaflatReport::Fail { x, y, z, value } = &report else {
        return Err("metaflat unexpectedly".into());
    };
    check((*x, *y, *z) == (0, 0, 0), || format!("witness at {:?}", (x, y, z)))?;
    check(*value == mono(4, &[1, 3], scalar::int(-1)), || {
        format!("witness {value}")
    })?;
    let s = Multivector::basis(4, 0);
    let direct = ad_multivector(&alg, &s, &ad_multivector(&alg, &s, &xi.image(0)).unwrap()).unwrap();
    check(direct == *value, || format!("direct ad_s² ξ(s) = {direct}"))?;
    Ok(report.describe(alg.labels()))
}

fn dual_verdicts(name: &str) -> Result<LieAlgebra, String> {
    let inst = load(name);
    let model = &inst.model;
    let r = inst.bivector_or_zero();
    let alg = Arc::new(model.expand());
    let rv = r.to_multivector(model).unwrap();
    check(metaflat_normal_form(model, &r).unwrap().conforming(), || {
        format!("{name}: not in normal form")
    })?;
    check(is_metaflat(model, &coboundary(&alg, &rv).unwrap()).passed(), || {
        format!("{name}: not metaflat")
    })?;
    check(cybe_check(&alg, &rv).unwrap().is_zero(), || {
        format!("{name}: [r,r] ≠ 0")
    })?;
    let dual = dualize(model, &r).map_err(|e| e.to_string())?;
    let expanded = dual.model.expand();
    check(dual.flat && is_flat(&expanded).unwrap(), || {
        format!("{name}: dual not flat")
    })?;
    check(milnor_verify(&expanded, &dual.model.split()).passed(), || {
        format!("{name}: dual split")
    })?;
    let xi_star = dual.model_cocycle();
    check(cocycle_check(&xi_star).passed(), || format!("{name}: ξ* not a cocycle"))?;
    check(is_metaflat(&dual.model, &xi_star).passed(), || {
        format!("{name}: dual not metaflat")
    })?;
    check(
        verify_main_theorem(model, &r).unwrap() == TheoremReport::Verified,
        || format!("{name}: theorem"),
    )?;
    Ok(dual.algebra)
}

fn criterion_3() -> Outcome {
    let d3 = dual_verdicts("ex3")?;
    let d4 = dual_verdicts("ex4")?;
    let n = d4.dim();
    let all_zero = (0..n).all(|i| (0..n).all(|j| (0..n).all(|k| d4.constant(i, j, k).is_zero())));
    check(all_zero, || "ex4 dual has a nonzero structure constant".into())?;
    Ok(format!(
        "ex3 dual abelian: {}, ex4 dual abelian: {all_zero}",
        d3.is_abelian()
    ))
}

fn criterion_4() -> Outcome {
    let config = SuiteConfig {
        count: 1000,
        seed: 7,
        dims: (3, 2, 3),
        mode: Mode::Any,
        ..SuiteConfig::default()
    };
    let start = std::time::Instant::now();
    let summary = run_suite(&config);
    let elapsed = start.elapsed();
    let theorem = &summary.checks["theorem"];
    check(theorem.passed == 1000 && theorem.failed == 0, || summary.to_text())?;
    check(summary.success(), || summary.to_text())?;
    let deg = summary.degenerate_instances;
    check(deg > 0 && deg < 1000, || {
        format!("only one degeneracy class drawn ({deg} degenerate)")
    })?;
    Ok(format!(
        "1000 instances, {deg} degenerate, {:.1}s",
        elapsed.as_secs_f64()
    ))
}

fn criterion_5() -> Outcome {
    let config = SuiteConfig {
        seed: 55,
        dims: (3, 2, 3),
        ..SuiteConfig::default()
    };
    let mut entries = 0usize;
    for index in 0..500 {
        let spec = instance_spec(&config, index);
        let model = gen_flat_model(&spec).map_err(|e| e.to_string())?;
        let n = model.dim();
        let alg = Arc::new(model.expand());
        let mut rng = rng_for(spec.seed, 9);
        let r = random_bivector(&model, &mut rng, spec.bound);
        let rv = r.to_multivector(&model).unwrap();
        let generic = |x: usize| ad_multivector(&alg, &Multivector::basis(n, x), &rv).unwrap();
        for k in 0..model.k0() {
            check(xi_on_s(&model, &r, k).unwrap() == generic(model.s(k)), || {
                format!("seed {} ξ(s{k})", spec.seed)
            })?;
            entries += 1;
        }
        for k in 0..model.m() {
            let (odd, even) = xi_on_d(&model, &r, k).unwrap();
            check(
                odd == generic(model.d_odd(k)) && even == generic(model.d_even(k)),
                || format!("seed {} ξ(d) pair {k}", spec.seed),
            )?;
            entries += 2;
        }
        let conforming = gen_conforming_bivector(&model, &spec);
        let dual = dualize(&model, &conforming).map_err(|e| format!("seed {}: {e}", spec.seed))?;
        let xi = coboundary(&alg, &conforming.to_multivector(&model).unwrap()).unwrap();
        let transpose = dual_bracket(&xi).unwrap();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    check(dual.algebra.constant(a, b, c) == transpose.constant(a, b, c), || {
                        format!("seed {} dual constant ({a},{b},{c})", spec.seed)
                    })?;
                }
            }
        }
        check(dual.cocycle.matrix() == dual_cocycle(&alg).matrix(), || {
            format!("seed {} ξ*", spec.seed)
        })?;
    }
    Ok(format!(
        "500 instances, {entries} closed-form images, dual tables equal"
    ))
}

fn criterion_6() -> Outcome {
    let verdict = |rows: &[&[i64]], m| classify_degeneracy(&FlatModel::from_i64(rows.len(), 0, m, rows).unwrap());
    check(!verdict(&[&[1, 2]], 2).is_degenerate(), || "[[1,2]] degenerate".into())?;
    check(!verdict(&[&[1, 0], &[0, 1]], 2).is_degenerate(), || {
        "[[1,0],[0,1]] degenerate".into()
    })?;
    match verdict(&[&[1, 1]], 2) {
        DegeneracyReport::Degenerate { i: 0, j: 1, eps } if eps.value().is_one() => {}
        other => return Err(format!("[[1,1]]: {other:?}")),
    }
    let id = FlatModel::from_i64(2, 0, 2, &[&[1, 0], &[0, 1]]).unwrap();
    check(check_ndeg_for_basis(&id, &Matrix::identity(2)).unwrap(), || {
        "identity basis fails".into()
    })?;
    check(
        !check_ndeg_for_basis(&id, &Matrix::from_i64(&[&[1, 1], &[1, -1]])).unwrap(),
        || "s1 ± s2 basis passes".into(),
    )?;

    let mut models = vec![FlatModel::from_i64(1, 0, 2, &[&[1, 1]]).unwrap()];
    for seed in 0..20 {
        let k0 = 1 + (seed as usize % 3);
        let spec = InstanceSpec {
            seed,
            k0,
            l0: 0,
            m: 2 + (seed as usize % 2),
            mode: Mode::Degenerate,
            bound: 5,
        };
        models.push(gen_flat_model(&spec).map_err(|e| e.to_string())?);
    }
    let mut rng = rng_for(606, 0);
    for model in &models {
        check(classify_degeneracy(model).is_degenerate(), || {
            format!("{:?} not degenerate", model.lambda())
        })?;
        for _ in 0..200 {
            let b = random_invertible(&mut rng, model.k0(), 4);
            check(!check_ndeg_for_basis(model, &b).unwrap(), || {
                format!("basis {b:?} separates {:?}", model.lambda())
            })?;
        }
    }
    Ok(format!(
        "3 verdicts, {} degenerate models × 200 basis changes",
        models.len()
    ))
}

/// Orthonormal-basis Levi-Civita: ∇_x y = ½([x,y] − ad_x* y − ad_y* x), with ad* the transpose.
fn oracle_curvature(c: &dyn Fn(usize, usize, usize) -> Scalar, n: usize) -> Vec<Vec<Vec<Vec<Scalar>>>> {
    let half = scalar::ratio(1, 2);
    // nabla[i][j][k]: coefficient of e_k in ∇_{e_i} e_j
    let nabla: Vec<Vec<Vec<Scalar>>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| &half * (c(i, j, k) - c(i, k, j) - c(j, k, i))).collect())
                .collect()
        })
        .collect();
    let apply = |i: usize, v: &[Scalar]| -> Vec<Scalar> {
        (0..n)
            .map(|k| (0..n).fold(scalar::zero(), |acc, j| acc + &v[j] * &nabla[i][j][k]))
            .collect()
    };
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|l| {
                            let e: Vec<Scalar> = (0..n)
                                .map(|t| if t == l { scalar::one() } else { scalar::zero() })
                                .collect();
                            let bracket_term: Vec<Scalar> = (0..n)
                                .map(|k| (0..n).fold(scalar::zero(), |acc, p| acc + c(i, j, p) * &nabla[p][l][k]))
                                .collect();
                            let ij = apply(i, &apply(j, &e));
                            let ji = apply(j, &apply(i, &e));
                            (0..n).map(|k| &bracket_term[k] - &ij[k] + &ji[k]).collect()
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let mut models: Vec<FlatModel> = vec![
        FlatModel::from_i64(1, 0, 1, &[&[1]]).unwrap(),
        FlatModel::from_i64(1, 0, 2, &[&[1, 2]]).unwrap(),
        FlatModel::from_i64(1, 1, 1, &[&[1]]).unwrap(),
    ];
    let config = SuiteConfig {
        seed: 77,
        ..SuiteConfig::default()
    };
    for index in 0..100 {
        models.push(gen_flat_model(&instance_spec(&config, index)).map_err(|e| e.to_string())?);
    }
    for model in &models {
        let alg = model.expand();
        let n = alg.dim();
        check(jacobi_check(&alg).passed(), || format!("{:?}: Jacobi", model.lambda()))?;
        let curv = curvature(&alg, &levi_civita(&alg).unwrap());
        check(curv.is_flat(), || {
            format!("{:?}: curvature {:?}", model.lambda(), curv.first_nonzero())
        })?;
        check(milnor_verify(&alg, &model.split()).passed(), || {
            format!("{:?}: split", model.lambda())
        })?;
        for x in 0..n {
            let t = alg.trace_ad(&Multivector::basis(n, x)).unwrap();
            check(t.is_zero(), || format!("{:?}: trace ad_{x} = {t}", model.lambda()))?;
        }
        let c = |i, j, k| alg.constant(i, j, k);
        let oracle = oracle_curvature(&c, n);
        let all_zero = oracle.iter().flatten().flatten().flatten().all(|v| v.is_zero());
        check(all_zero, || format!("{:?}: oracle curvature nonzero", model.lambda()))?;
    }

    let so3 = LieAlgebra::so3().with_metric(Matrix::identity(3)).unwrap();
    let c = |i, j, k| so3.constant(i, j, k);
    let oracle = oracle_curvature(&c, 3);
    check(
        oracle[0][1][1] == vec![scalar::ratio(-1, 4), scalar::zero(), scalar::zero()],
        || format!("oracle R(e1,e2)e2 = {:?}", oracle[0][1][1]),
    )?;
    let curv = curvature(&so3, &levi_civita(&so3).unwrap());
    check(!curv.is_flat(), || "so(3) reported flat".into())?;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                let v = curv.value(i, j, k);
                for l in 0..3 {
                    check(v.coeff(&[l]) == oracle[i][j][k][l], || {
                        format!("so(3) R({i},{j}){k} differs")
                    })?;
                }
            }
        }
    }
    Ok(format!("{} flat models; so(3) R(e1,e2)e2 = -1/4 e1", models.len()))
}

fn criterion_8() -> Outcome {
    let summary = run_suite(&SuiteConfig {
        count: 300,
        seed: 88,
        ..SuiteConfig::default()
    });
    for name in ["coboundary-cocycle", "schouten-symmetry", "double-dual"] {
        let t = &summary.checks[name];
        check(t.passed == 300 && t.failed == 0, || format!("{name}: {t:?}"))?;
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bin = env!("CARGO_BIN_EXE_metaflat");
    let mut rounds = 0;
    for name in ["ex1", "ex3", "ex4"] {
        let out = dir.path().join(format!("{name}-dual.json"));
        let status = Command::new(bin)
            .args([
                "dualize",
                fixture(name).to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ])
            .output()
            .map_err(|e| e.to_string())?;
        check(status.status.code() == Some(0), || {
            format!("dualize {name}: {status:?}")
        })?;
        for which in ["flat", "metaflat", "cocycle"] {
            let run = Command::new(bin)
                .args(["check", out.to_str().unwrap(), which])
                .output()
                .map_err(|e| e.to_string())?;
            check(run.status.code() == Some(0), || {
                format!("check {which} on dual of {name}: {run:?}")
            })?;
            rounds += 1;
        }
        let back = read_instance(&out).map_err(|e| e.to_string())?;
        check(back.cocycle.is_some(), || format!("dual of {name} has no cocycle"))?;
    }
    let ex2 = Command::new(bin)
        .args([
            "dualize",
            fixture("ex2").to_str().unwrap(),
            "--out",
            dir.path().join("x.json").to_str().unwrap(),
        ])
        .output()
        .map_err(|e| e.to_string())?;
    check(ex2.status.code() == Some(1), || format!("dualize ex2: {ex2:?}"))?;
    // generic flat model cocycles also survive the file boundary
    let mut rng = rng_for(808, 0);
    for _ in 0..20 {
        let spec = InstanceSpec {
            seed: rng.gen(),
            k0: 2,
            l0: 1,
            m: 2,
            mode: Mode::Any,
            bound: 5,
        };
        let model = gen_flat_model(&spec).map_err(|e| e.to_string())?;
        let r: StructuredBivector = gen_conforming_bivector(&model, &spec);
        let mut inst = Instance::new(model.clone());
        inst.bivector = Some(r.clone());
        let back = metaflat::format::parse_instance(&inst.to_json()).map_err(|e| e.to_string())?;
        check(back.bivector_or_zero() == r && back.model == model, || {
            "instance round-trip".into()
        })?;
        let d = dualize(&model, &r).map_err(|e| e.to_string())?;
        check(
            same_structure(&dual_bracket(&dual_cocycle(&d.algebra)).unwrap(), &d.algebra),
            || "double dual of 𝔤*".into(),
        )?;
        check(d.psi.iter().all(|col| col.len() == model.k0()), || "Ψ shape".into())?;
    }
    Ok(format!("300-instance property suite, {rounds} CLI round-trip checks"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("golden example 1 over 50 random (a, b, c)", criterion_1),
        ("golden example 2 witness", criterion_2),
        ("golden examples 3 and 4 dual verdicts", criterion_3),
        ("main theorem fuzz, 1000 instances", criterion_4),
        ("closed-form vs generic oracle, 500 instances", criterion_5),
        ("degeneracy verdicts and basis changes", criterion_6),
        ("geometry regression and so(3) control", criterion_7),
        ("property suites and CLI round-trip", criterion_8),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        match outcome {
            Ok(detail) => println!("criterion {} PASS: {name} ({detail})", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} FAIL: {name}: {detail}", k + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
