//! Command-line front end. Exit codes: 0 holds, 1 fails, 2 invalid input.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use crate::bialgebra::{
    cybe_check, dualize, is_metaflat, verify_main_theorem, BialgebraError, CybeReport, TheoremReport,
};
use crate::cocycle::{coboundary, cocycle_check, Cocycle, CocycleReport};
use crate::flat::{classify_degeneracy, DegeneracyReport};
use crate::format::{read_instance, Instance};
use crate::geometry::{curvature, levi_civita, milnor_verify};
use crate::harness::{run_suite, Mode, SuiteConfig};
use crate::lie::LieAlgebra;
use crate::scalar;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAIL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "metaflat",
    version,
    about = "Exact checks for flat Lie algebras and coboundary bialgebras"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one check on an instance file.
    Check { path: PathBuf, which: Which },
    /// Build the dual bialgebra of a metaflat instance.
    Dualize {
        path: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline: metaflat hypothesis, CYBE, dual flat and metaflat.
    Verify { path: PathBuf },
    /// Randomized regression suite.
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Upper bounds `k0,l0,m`.
        #[arg(long, default_value = "3,2,3", value_parser = parse_dims)]
        dims: (usize, usize, usize),
        #[arg(long, default_value_t = Mode::Any)]
        mode: Mode,
        /// Integer bound on numerators and denominators.
        #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(i64).range(1..))]
        bound: i64,
        /// Basis changes tried per degenerate instance.
        #[arg(long, default_value_t = 20)]
        basis_trials: usize,
        /// JSON report path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sign-flip a shadow closed form; the run must fail.
        #[arg(long)]
        self_test: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Flat,
    Degeneracy,
    Metaflat,
    Cybe,
    Cocycle,
}

fn parse_dims(s: &str) -> Result<(usize, usize, usize), String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let [k0, l0, m] = parts.as_slice() else {
        return Err(format!("expected k0,l0,m, got {s:?}"));
    };
    let p = |x: &str| x.parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((p(k0)?, p(l0)?, p(m)?))
}

/// Parses `args` and runs the command, writing reports to `out` and `err`.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(code) => code,
        Err(msg) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_INPUT
        }
    }
}

fn load(path: &Path) -> Result<Instance, String> {
    read_instance(path).map_err(|e| format!("{}: {e}", path.display()))
}

/// The file's cocycle, or the coboundary of its bivector.
fn cocycle_of(inst: &Instance, alg: &Arc<LieAlgebra>) -> Result<Cocycle, String> {
    if let Some(xi) = inst.cocycle_on(Arc::clone(alg)) {
        return Ok(xi);
    }
    let r = inst
        .bivector_or_zero()
        .to_multivector(&inst.model)
        .map_err(|e| e.to_string())?;
    coboundary(alg, &r).map_err(|e| e.to_string())
}

fn execute(cmd: &Command, out: &mut dyn Write) -> Result<u8, String> {
    let mut say = |line: String| {
        let _ = writeln!(out, "{line}");
    };
    match cmd {
        Command::Check { path, which } => {
            let inst = load(path)?;
            let alg = Arc::new(inst.model.expand());
            let labels = alg.labels().to_vec();
            match which {
                Which::Flat => {
                    let conn = levi_civita(&alg).map_err(|e| e.to_string())?;
                    let curv = curvature(&alg, &conn);
                    let milnor = milnor_verify(&alg, &inst.model.split());
                    match curv.first_nonzero() {
                        Some(((i, j, k), v)) => {
                            say(format!(
                                "not flat: R({}, {}){} = {}",
                                labels[i],
                                labels[j],
                                labels[k],
                                v.display_with(&labels)
                            ));
                            Ok(EXIT_FAIL)
                        }
                        None if !milnor.passed() => {
                            say(format!("flat, but the decomposition fails: {:?}", milnor.violations));
                            Ok(EXIT_FAIL)
                        }
                        None => {
                            say("flat: curvature vanishes and the s, z, d decomposition holds".into());
                            Ok(EXIT_OK)
                        }
                    }
                }
                Which::Degeneracy => {
                    let report = classify_degeneracy(&inst.model);
                    match &report {
                        DegeneracyReport::Degenerate { i, j, eps } => say(format!(
                            "degenerate: column {} = {}column {}",
                            i + 1,
                            if eps.value() == scalar::one() { "" } else { "-" },
                            j + 1
                        )),
                        DegeneracyReport::Nondegenerate { basis, .. } => {
                            let rows: Vec<String> = basis
                                .row_vecs()
                                .iter()
                                .map(|r| format!("[{}]", r.iter().map(scalar::format).collect::<Vec<_>>().join(", ")))
                                .collect();
                            say(format!("nondegenerate: separating basis {}", rows.join(" ")));
                        }
                    }
                    Ok(EXIT_OK)
                }
                Which::Metaflat => {
                    let xi = cocycle_of(&inst, &alg)?;
                    let report = is_metaflat(&inst.model, &xi);
                    if report.passed() {
                        say("metaflat".into());
                        Ok(EXIT_OK)
                    } else {
                        say(format!("not metaflat: {}", report.describe(&labels)));
                        Ok(EXIT_FAIL)
                    }
                }
                Which::Cybe => {
                    if inst.cocycle.is_some() {
                        return Err("cybe needs a bivector, the file gives a cocycle".into());
                    }
                    let r = inst
                        .bivector_or_zero()
                        .to_multivector(&inst.model)
                        .map_err(|e| e.to_string())?;
                    match cybe_check(&alg, &r).map_err(|e| e.to_string())? {
                        CybeReport::Zero => {
                            say("[r,r] = 0".into());
                            Ok(EXIT_OK)
                        }
                        CybeReport::Nonzero(v) => {
                            say(format!("[r,r] = {}", v.display_with(&labels)));
                            Ok(EXIT_FAIL)
                        }
                    }
                }
                Which::Cocycle => {
                    let xi = cocycle_of(&inst, &alg)?;
                    match cocycle_check(&xi) {
                        CocycleReport::Pass => {
                            say("cocycle".into());
                            Ok(EXIT_OK)
                        }
                        CocycleReport::Fail { pair: (x, y), lhs, rhs } => {
                            say(format!(
                                "not a cocycle at ({}, {}): ξ([x,y]) = {} but ad_x ξ(y) - ad_y ξ(x) = {}",
                                labels[x],
                                labels[y],
                                lhs.display_with(&labels),
                                rhs.display_with(&labels)
                            ));
                            Ok(EXIT_FAIL)
                        }
                    }
                }
            }
        }
        Command::Dualize { path, out: out_path } => {
            let inst = load(path)?;
            if inst.cocycle.is_some() {
                return Err("dualize needs a bivector, the file gives a cocycle".into());
            }
            let r = inst.bivector_or_zero();
            let dual = match dualize(&inst.model, &r) {
                Ok(d) => d,
                Err(BialgebraError::NotMetaflat(w)) => {
                    let labels = inst.model.labels();
                    say(format!("hypothesis not met, no dual emitted: {}", w.describe(&labels)));
                    return Ok(EXIT_FAIL);
                }
                Err(e) => return Err(e.to_string()),
            };
            let table = |rows: &Vec<Vec<scalar::Scalar>>| -> Vec<Vec<String>> {
                rows.iter().map(|r| r.iter().map(scalar::format).collect()).collect()
            };
            let xi = dual.model_cocycle();
            let mut doc = Instance::new(dual.model.clone());
            doc.cocycle = Some((0..xi.dim()).map(|x| xi.image(x)).collect());
            doc.metadata = Some(json!({
                "source": path.display().to_string(),
                "phi": table(&dual.phi),
                "psi": table(&dual.psi),
                "basis_map": dual.basis_map.iter().map(|a| a + 1).collect::<Vec<_>>(),
                "abelian": dual.algebra.is_abelian(),
                "flat": dual.flat,
                "metaflat": dual.metaflat.passed(),
                "milnor": dual.milnor.passed(),
            }));
            std::fs::write(out_path, doc.to_json()).map_err(|e| format!("{}: {e}", out_path.display()))?;
            let verdict = |ok: bool| if ok { "pass" } else { "FAIL" };
            say(format!(
                "dual model k0 = {}, l0 = {}, m = {}{}",
                dual.model.k0(),
                dual.model.l0(),
                dual.model.m(),
                if dual.algebra.is_abelian() { " (abelian)" } else { "" }
            ));
            say(format!("dual flat: {}", verdict(dual.flat)));
            say(format!("dual metaflat: {}", verdict(dual.metaflat.passed())));
            say(format!("dual decomposition: {}", verdict(dual.milnor.passed())));
            say(format!("written {}", out_path.display()));
            let ok = dual.flat && dual.metaflat.passed() && dual.milnor.passed();
            Ok(if ok { EXIT_OK } else { EXIT_FAIL })
        }
        Command::Verify { path } => {
            let inst = load(path)?;
            if inst.cocycle.is_some() {
                return Err("verify needs a bivector, the file gives a cocycle".into());
            }
            let labels = inst.model.labels();
            match verify_main_theorem(&inst.model, &inst.bivector_or_zero()).map_err(|e| e.to_string())? {
                TheoremReport::Verified => {
                    say("metaflat; [r,r] = 0; dual flat and metaflat".into());
                    Ok(EXIT_OK)
                }
                TheoremReport::HypothesisNotMet(w) => {
                    say(format!("hypothesis not met: {}", w.describe(&labels)));
                    Ok(EXIT_FAIL)
                }
                TheoremReport::Violation(v) => {
                    say(format!("VIOLATION: {v:?}"));
                    Ok(EXIT_FAIL)
                }
            }
        }
        Command::Fuzz {
            count,
            seed,
            dims,
            mode,
            bound,
            basis_trials,
            out: report,
            self_test,
        } => {
            let config = SuiteConfig {
                count: *count,
                seed: *seed,
                dims: *dims,
                mode: *mode,
                bound: *bound,
                basis_trials: *basis_trials,
                self_test: *self_test,
            };
            let summary = run_suite(&config);
            let _ = write!(out, "{}", summary.to_text());
            if let Some(p) = report {
                std::fs::write(p, summary.to_json()).map_err(|e| format!("{}: {e}", p.display()))?;
            }
            Ok(if summary.success() { EXIT_OK } else { EXIT_FAIL })
        }
    }
}
