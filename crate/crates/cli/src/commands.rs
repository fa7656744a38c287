use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use csym_core::csym::{
    c_selfadjoint_residual, c_symmetry_residual, domain_criterion_report, is_c_selfadjoint, is_c_symmetric,
    weak_symmetry_residual,
};
use csym_core::doubling::{
    build_doubled, deficiency, race_decomposition, verify_symmetry_equivalence, vn_decomposition, DoubledProblem,
};
use csym_core::extensions::{
    admissible_parameter, brute_force_extensions, canonical_extension, extension_from_parameter, l_manifolds,
    parameter_collisions, recover_parameter, ExtensionParameter, ExtensionResult, BRUTE_FORCE_MAX_DIM,
};
use csym_core::fixtures::Problem;
use csym_core::linalg::spectral_norm;
use csym_core::polar::{cjt_factorization, conjugation_covariance, polar, takagi, CjtOutcome};
use csym_core::powers::{doubled_power_blocks, power_norm_identities, qa_partial_sums};
use csym_core::random::Sampler;
use csym_core::{Check, CsymError, LinearRelation, Tolerance};
use serde_json::{json, Map, Value};

use crate::error::{CliError, Result};
use crate::report::{sha256_hex, timestamp, CheckEntry, CheckList, Report};
use crate::spec::{matrix_json, parse_any_matrix, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Deficiency,
    Extend,
    Enumerate,
    Polar,
    Takagi,
    Powers,
    VerifyAll,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Check,
        Command::Deficiency,
        Command::Extend,
        Command::Enumerate,
        Command::Polar,
        Command::Takagi,
        Command::Powers,
        Command::VerifyAll,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Deficiency => "deficiency",
            Command::Extend => "extend",
            Command::Enumerate => "enumerate",
            Command::Polar => "polar",
            Command::Takagi => "takagi",
            Command::Powers => "powers",
            Command::VerifyAll => "verify-all",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| CliError::schema("/command", format!("unknown command \"{s}\"")))
    }
}

pub const DEFAULT_ENUMERATE_BUDGET: usize = 10_000;
pub const DEFAULT_VERIFY_BUDGET: usize = 40;
pub const DEFAULT_MAX_POWER: usize = 3;
const ADMISSIBLE_SAMPLES: usize = 3;
const COLLISION_SAMPLES: usize = 8;
const ROUNDTRIP_BOUND: f64 = 1e-9;

#[derive(Debug, Clone, Default)]
pub struct Flags {
    pub tol: Option<f64>,
    pub seed: u64,
    pub budget: Option<usize>,
    pub param: Option<PathBuf>,
    pub swap: bool,
    pub max_power: Option<usize>,
}

/// Reads an extension parameter: `{"kind": "unitary" | "onb" | "conjugation", "matrix": rows}`.
pub fn parse_parameter(text: &str) -> Result<ExtensionParameter> {
    let v: Value =
        serde_json::from_str(text).map_err(|e| CliError::schema("", format!("invalid parameter JSON: {e}")))?;
    let obj = v
        .as_object()
        .ok_or_else(|| CliError::schema("", "expected an object"))?;
    let kind = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| CliError::schema("/kind", "expected \"unitary\", \"onb\" or \"conjugation\""))?;
    let m = parse_any_matrix(
        obj.get("matrix")
            .ok_or_else(|| CliError::schema("", "missing field \"matrix\""))?,
        "/matrix",
    )?;
    match kind {
        "unitary" => Ok(ExtensionParameter::Unitary(m)),
        "onb" => Ok(ExtensionParameter::Onb(m)),
        "conjugation" => Ok(ExtensionParameter::Conjugation(m)),
        other => Err(CliError::schema("/kind", format!("unknown parameter kind \"{other}\""))),
    }
}

pub fn parameter_json(p: &ExtensionParameter) -> Value {
    let m = match p {
        ExtensionParameter::Unitary(m) | ExtensionParameter::Onb(m) | ExtensionParameter::Conjugation(m) => m,
    };
    json!({"kind": p.kind(), "matrix": matrix_json(m)})
}

fn relation_json(r: &LinearRelation) -> Result<Value> {
    Ok(json!({
        "graph_dim": r.graph_dim(),
        "domain_dim": r.domain().dim(),
        "multivalued_dim": r.multivalued_part().dim(),
        "regime": r.regime().as_str(),
        "matrix": if r.is_matrix() { matrix_json(&r.to_matrix()?) } else { Value::Null },
    }))
}

type Section = (Value, Vec<Check>);

fn check_section(p: &Problem) -> Result<Section> {
    let a = &p.relation;
    let c = &p.conjugation;
    let sym = is_c_symmetric(a, c)?;
    let sa = is_c_selfadjoint(a, c)?;
    let weak = weak_symmetry_residual(&p.operator, c)?;
    let dc = domain_criterion_report(a, a, c)?;
    let dp = build_doubled(a, c)?;
    let eq = verify_symmetry_equivalence(&dp)?;
    let tol = a.tol();
    let mut checks = dp.checks.clone();
    checks.push(Check::flag("doubling.symmetry_equivalence", eq.c_symmetric == eq.frak_symmetric));
    checks.push(Check::flag(
        "doubling.selfadjoint_equivalence",
        eq.c_selfadjoint == eq.frak_selfadjoint,
    ));
    checks.push(Check::flag("csym.weak_symmetry_agrees", (weak <= tol.eps) == sym));
    let crit = Check::flag("csym.domain_criterion", dc.agree());
    checks.push(if sym && dc.within_b_star && dc.regime == csym_core::Regime::Operator {
        crit
    } else {
        crit.report_only().with_note("outside the hypotheses: report only")
    });
    let results = json!({
        "c_symmetric": sym,
        "c_symmetry_residual": c_symmetry_residual(a, c)?,
        "weak_symmetry_residual": weak,
        "c_selfadjoint": sa,
        "c_selfadjoint_residual": c_selfadjoint_residual(a, c)?,
        "domain_criterion": {
            "criterion": dc.criterion,
            "c_selfadjoint": dc.c_selfadjoint,
            "within_b_star": dc.within_b_star,
            "agree": dc.agree(),
        },
        "doubled": {
            "symmetric": eq.frak_symmetric,
            "selfadjoint": eq.frak_selfadjoint,
        },
        "relation": relation_json(a)?,
    });
    Ok((results, checks))
}

fn require_c_symmetric(p: &Problem) -> Result<()> {
    if !is_c_symmetric(&p.relation, &p.conjugation)? {
        return Err(CsymError::precondition("the operator is not C-symmetric").into());
    }
    Ok(())
}

fn deficiency_section(dp: &DoubledProblem) -> Result<Section> {
    let def = deficiency(dp)?;
    let mut checks = dp.checks.clone();
    checks.extend(def.checks.iter().cloned());
    let results = json!({
        "n_plus": def.n_plus.dim(),
        "n_minus": def.n_minus.dim(),
        "graph_a": dp.pair.a.graph_dim(),
        "graph_b_star": dp.pair.b_star.graph_dim(),
        "defect": dp.defect(),
    });
    Ok((results, checks))
}

fn decomposition_section(p: &Problem, dp: &DoubledProblem) -> Result<Section> {
    let vn = vn_decomposition(&dp.frak_a)?;
    let race = race_decomposition(&p.relation, &p.conjugation)?;
    let mut checks = vn.checks.clone();
    checks.extend(race.checks.iter().cloned());
    let results = json!({
        "von_neumann": {
            "regime": vn.regime.as_str(),
            "n_plus": vn.n_plus.dim(),
            "n_minus": vn.n_minus.dim(),
            "kernel_dim": vn.kernel.dim(),
        },
        "race": {
            "regime": race.regime.as_str(),
            "refusal": race.refusal,
            "graph_m_dim": race.graph_m.dim(),
            "c_selfadjoint": race.c_selfadjoint,
            "corollary_predicts_selfadjoint": race.corollary_predicts_selfadjoint,
        },
    });
    Ok((results, checks))
}

fn extension_json(res: &ExtensionResult) -> Result<Value> {
    let d = &res.diagnostics.dims;
    Ok(json!({
        "parameter": {"kind": "conjugation", "matrix": matrix_json(&res.parameter)},
        "is_operator": res.diagnostics.is_operator,
        "is_c_selfadjoint": res.diagnostics.is_c_selfadjoint,
        "dims": {
            "graph_a": d.graph_a,
            "graph_ext": d.graph_ext,
            "graph_b_star": d.graph_b_star,
            "n_plus": d.n_plus,
            "l": d.l,
        },
        "extension": relation_json(&res.a_ext)?,
    }))
}

fn extend_section(p: &Problem, dp: &DoubledProblem, param: Option<&ExtensionParameter>, swap: bool) -> Result<Section> {
    let res = match param {
        Some(x) => extension_from_parameter(dp, x)?,
        None => canonical_extension(dp, swap)?,
    };
    let l = l_manifolds(&res, dp)?;
    let dc = domain_criterion_report(&res.a_ext, &p.relation, &p.conjugation)?;
    let mut checks = res.checks.clone();
    checks.extend(l.checks.iter().cloned());
    checks.push(Check::flag("csym.domain_criterion_extension", dc.within_b_star && dc.agree()));
    let mut results = extension_json(&res)?;
    results["source"] = json!(match param {
        Some(x) => format!("parameter ({})", x.kind()),
        None if swap => "canonical (swapped)".to_string(),
        None => "canonical".to_string(),
    });
    results["l_manifold_dims"] = json!({"l_a": l.l_a.dim(), "l_astar": l.l_astar.dim()});
    Ok((results, checks))
}

fn enumerate_section(dp: &DoubledProblem, budget: usize, seed: u64) -> Result<Section> {
    let bf = brute_force_extensions(dp, budget, seed)?;
    let mut recovered = 0usize;
    let mut worst: f64 = 0.0;
    let mut failures = Vec::new();
    let mut operators = 0usize;
    for (i, hit) in bf.hits.iter().enumerate() {
        if hit.is_operator() {
            operators += 1;
        }
        let trip = recover_parameter(dp, hit)
            .and_then(|x| extension_from_parameter(dp, &x))
            .and_then(|res| res.a_ext.distance(hit));
        match trip {
            Ok(d) => {
                worst = worst.max(d);
                if d <= ROUNDTRIP_BOUND {
                    recovered += 1;
                } else {
                    failures.push(json!({"hit": i, "distance": d}));
                }
            }
            Err(e) => {
                worst = f64::INFINITY;
                failures.push(json!({"hit": i, "error": e.to_string()}));
            }
        }
    }
    let hits = bf.hits.len();
    let summary = if recovered == hits {
        format!("all hits recovered ({hits} of {hits})")
    } else {
        format!("{recovered} of {hits} hits recovered")
    };
    let col = parameter_collisions(dp, COLLISION_SAMPLES, seed)?;
    let checks = vec![
        Check::residual("enumerate.roundtrip", if hits == 0 { 0.0 } else { worst }, ROUNDTRIP_BOUND),
        Check::flag("enumerate.all_recovered", recovered == hits),
        Check::flag("enumerate.injective_sample", col.collisions == 0)
            .report_only()
            .with_note(format!("{} collisions among {} pairs", col.collisions, col.pairs)),
    ];
    let results = json!({
        "budget": budget,
        "candidates": bf.candidates,
        "structured": bf.structured,
        "hits": hits,
        "operator_hits": operators,
        "multivalued_hits": hits - operators,
        "recovered": recovered,
        "max_roundtrip_distance": if hits == 0 { 0.0 } else { worst },
        "failures": failures,
        "summary": summary,
        "collisions": {"samples": col.samples, "pairs": col.pairs, "collisions": col.collisions},
    });
    Ok((results, checks))
}

fn require_matrix(p: &Problem) -> Result<csym_core::CMat> {
    if !p.relation.is_matrix() {
        return Err(CsymError::precondition("this command needs an everywhere-defined operator").into());
    }
    Ok(p.relation.to_matrix()?)
}

fn polar_section(p: &Problem, tol: Tolerance) -> Result<Section> {
    let a = require_matrix(p)?;
    let c = &p.conjugation;
    let pf = polar(&a, tol)?;
    let cov = conjugation_covariance(&a, c, tol)?;
    let cjt = cjt_factorization(&a, c, tol)?;
    let mut checks = pf.checks.clone();
    checks.extend(cov.checks.iter().cloned());
    let cjt_json = match &cjt {
        CjtOutcome::Factorized(f) => {
            checks.extend(f.checks.iter().cloned());
            json!({"status": "factorized", "j_rank": f.j.initial_space().dim()})
        }
        CjtOutcome::Refused(cl) => json!({
            "status": "refused",
            "reason": "A is not C-self-adjoint",
            "selfadjoint_residual": cl.selfadjoint_residual,
            "phase_residual": cl.phase_residual,
            "modulus_residual": cl.modulus_residual,
        }),
    };
    let results = json!({
        "rank": pf.rank,
        "covariance": {
            "modulus_residual": cov.modulus_residual,
            "phase_residual": cov.phase_residual,
            "c_real_residual": cov.c_real_residual,
        },
        "cjt": cjt_json,
    });
    Ok((results, checks))
}

fn takagi_section(p: &Problem, tol: Tolerance) -> Result<Section> {
    let a = require_matrix(p)?;
    let c = &p.conjugation;
    if !is_c_selfadjoint(&p.relation, c)? {
        return Err(CsymError::precondition("takagi needs a C-self-adjoint matrix").into());
    }
    // K* A is complex symmetric whenever A is C-self-adjoint.
    let (s, input) = if c.is_entrywise() {
        (a, "A")
    } else {
        (c.matrix().adjoint() * a, "K*A")
    };
    let t = takagi(&s, tol)?;
    let results = json!({
        "input": input,
        "singular_values": t.sigma,
    });
    Ok((results, t.checks))
}

fn powers_section(p: &Problem, max_power: usize, seed: u64, tol: Tolerance) -> Result<Section> {
    let a = require_matrix(p)?;
    let c = &p.conjugation;
    if max_power == 0 {
        return Err(CliError::schema("/max_power", "must be at least 1"));
    }
    let pr = doubled_power_blocks(&a, c, max_power)?;
    let n = a.nrows();
    let mut rng = Sampler::new(seed);
    let x = rng.unit_vector(n);
    let y = rng.unit_vector(n);
    let base = 1.0 + spectral_norm(&a);
    let mut identities = Vec::new();
    let mut worst_even: f64 = 0.0;
    let mut worst_odd: f64 = 0.0;
    for k in 1..=max_power {
        let (even, odd) = power_norm_identities(&a, c, &x, &y, k)?;
        let scale = base.powi(2 * k as i32 + 1);
        worst_even = worst_even.max(even / scale);
        worst_odd = worst_odd.max(odd / scale);
        identities.push(json!({"n": k, "even": even, "odd": odd}));
    }
    let qa = qa_partial_sums(&a, c, &x, 2 * max_power + 1, tol)?;
    let checks = vec![
        Check::residual("powers.block_formula", pr.max_block_residual(), 1e-9),
        Check::residual(
            "powers.structural_zero",
            pr.steps.iter().map(|s| s.structural_zero).fold(0.0, f64::max),
            1e-9,
        ),
        Check::residual("powers.path_agreement", pr.max_path_disagreement(), 1e-10),
        Check::residual("powers.norm_identity_even", worst_even, 1e-9),
        Check::residual("powers.norm_identity_odd", worst_odd, 1e-9),
    ];
    let steps: Vec<Value> = pr
        .steps
        .iter()
        .map(|s| {
            json!({
                "k": s.k,
                "block_residual": s.block_residual,
                "structural_zero": s.structural_zero,
                "path_agreement": s.path_agreement,
            })
        })
        .collect();
    let results = json!({
        "max_power": max_power,
        "steps": steps,
        "norm_identities": identities,
        "quasi_analytic": {
            "partial_sums": qa.partial_sums,
            "diverged_at": qa.diverged_at,
            "analytic_bound": qa.analytic_bound,
        },
    });
    Ok((results, checks))
}

/// A section result, with property violations folded into a failed check.
fn settle(out: Result<Section>, list: &mut CheckList) -> Result<Value> {
    match out {
        Ok((v, checks)) => {
            list.extend(&checks);
            Ok(v)
        }
        Err(CliError::Core(CsymError::PropertyViolation { key, message, residual })) => {
            list.push(CheckEntry {
                key,
                passed: false,
                residual,
                mode: "assert".into(),
                note: message.clone(),
            });
            Ok(json!({"error": message}))
        }
        Err(e) => Err(e),
    }
}

fn skipped(reason: impl Into<String>) -> Value {
    json!({"skipped": reason.into()})
}

/// Runs every applicable group; inapplicable groups are recorded as skipped.
fn verify_all(p: &Problem, tol: Tolerance, flags: &Flags, list: &mut CheckList) -> Result<Value> {
    let mut out = Map::new();
    out.insert("check".into(), settle(check_section(p), list)?);
    let c_symmetric = is_c_symmetric(&p.relation, &p.conjugation)?;
    if c_symmetric {
        let dp = build_doubled(&p.relation, &p.conjugation)?;
        out.insert("deficiency".into(), settle(deficiency_section(&dp), list)?);
        out.insert("decompositions".into(), settle(decomposition_section(p, &dp), list)?);
        let mut ext = Vec::new();
        for swap in [false, true] {
            ext.push(settle(extend_section(p, &dp, None, swap), list)?);
        }
        let mut rng = Sampler::new(flags.seed);
        for _ in 0..ADMISSIBLE_SAMPLES {
            let x = admissible_parameter(&dp, &mut rng)?;
            let forms = [x.clone(), x.to_unitary(&dp)?, x.to_onb(&dp)?];
            let base = extension_from_parameter(&dp, &forms[0])?;
            let mut spread: f64 = 0.0;
            for f in &forms[1..] {
                spread = spread.max(extension_from_parameter(&dp, f)?.a_ext.distance(&base.a_ext)?);
            }
            list.push((&Check::residual("extension.parameter_forms_agree", spread, tol.eps)).into());
            ext.push(settle(extend_section(p, &dp, Some(&x), false), list)?);
        }
        out.insert("extensions".into(), Value::Array(ext));
        if dp.defect() <= BRUTE_FORCE_MAX_DIM {
            let budget = flags.budget.unwrap_or(DEFAULT_VERIFY_BUDGET);
            out.insert("enumerate".into(), settle(enumerate_section(&dp, budget, flags.seed), list)?);
        } else {
            out.insert(
                "enumerate".into(),
                skipped(format!("dim M = {} exceeds {BRUTE_FORCE_MAX_DIM}", dp.defect())),
            );
        }
    } else {
        for key in ["deficiency", "decompositions", "extensions", "enumerate"] {
            out.insert(key.into(), skipped("the operator is not C-symmetric"));
        }
    }
    if p.relation.is_matrix() {
        out.insert("polar".into(), settle(polar_section(p, tol), list)?);
        out.insert(
            "takagi".into(),
            if is_c_selfadjoint(&p.relation, &p.conjugation)? {
                settle(takagi_section(p, tol), list)?
            } else {
                skipped("the matrix is not C-self-adjoint")
            },
        );
        let max_power = flags.max_power.unwrap_or(DEFAULT_MAX_POWER);
        out.insert("powers".into(), settle(powers_section(p, max_power, flags.seed, tol), list)?);
    } else {
        for key in ["polar", "takagi", "powers"] {
            out.insert(key.into(), skipped("the operator is not everywhere defined"));
        }
    }
    Ok(Value::Object(out))
}

fn inputs_digest(cmd: Command, spec: &ProblemSpec, flags: &Flags, param: Option<&str>) -> String {
    let param: Value = param
        .and_then(|t| serde_json::from_str(t).ok())
        .unwrap_or(Value::Null);
    let doc = json!({
        "command": cmd.name(),
        "spec": spec.to_json(),
        "flags": {
            "tol": flags.tol,
            "seed": flags.seed,
            "budget": flags.budget,
            "swap": flags.swap,
            "max_power": flags.max_power,
        },
        "param": param,
    });
    sha256_hex(doc.to_string().as_bytes())
}

/// Runs `cmd` on `spec`. Failed property checks yield a report with
/// `passed = false`; malformed input yields an error.
pub fn run_command(cmd: Command, spec: &ProblemSpec, flags: &Flags) -> Result<Report> {
    let tol = spec.tolerance(flags.tol)?;
    let (problem, warnings) = spec.build(tol)?;
    let param_text = match &flags.param {
        Some(path) => Some(std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?),
        None => None,
    };
    let param = param_text.as_deref().map(parse_parameter).transpose()?;
    let mut list = CheckList::default();
    let p = &problem;
    let results = match cmd {
        Command::Check => settle(check_section(p), &mut list)?,
        Command::Deficiency => {
            require_c_symmetric(p)?;
            let dp = build_doubled(&p.relation, &p.conjugation)?;
            settle(deficiency_section(&dp), &mut list)?
        }
        Command::Extend => {
            require_c_symmetric(p)?;
            let dp = build_doubled(&p.relation, &p.conjugation)?;
            settle(extend_section(p, &dp, param.as_ref(), flags.swap), &mut list)?
        }
        Command::Enumerate => {
            require_c_symmetric(p)?;
            let dp = build_doubled(&p.relation, &p.conjugation)?;
            let budget = flags.budget.unwrap_or(DEFAULT_ENUMERATE_BUDGET);
            settle(enumerate_section(&dp, budget, flags.seed), &mut list)?
        }
        Command::Polar => settle(polar_section(p, tol), &mut list)?,
        Command::Takagi => settle(takagi_section(p, tol), &mut list)?,
        Command::Powers => settle(
            powers_section(p, flags.max_power.unwrap_or(DEFAULT_MAX_POWER), flags.seed, tol),
            &mut list,
        )?,
        Command::VerifyAll => verify_all(p, tol, flags, &mut list)?,
    };
    let passed = list.all_ok();
    Ok(Report {
        command: cmd.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        inputs_digest: inputs_digest(cmd, spec, flags, param_text.as_deref()),
        label: spec.label.clone(),
        regime: problem.relation.regime().as_str().into(),
        seed: flags.seed,
        tol: tol.eps,
        passed,
        results,
        check_list: list.into_vec(),
        warnings,
        timestamp: timestamp(),
    })
}
