//! Subcommands.  Each returns a JSON report or an error carrying its exit
//! code.

use crate::error::{CliError, Result};
use crate::parse::{parse_problem, CdpFile, Convention};
use crate::report::{insert, mat, num, nums, obj, rational};
use ibl_core::condition_c::{check_condition_c, exponent_ledger, CandidateOptions, CriticalKind, LedgerEntry, Verdict};
use ibl_core::field::Scalar;
use ibl_core::gaussian::{
    cdp_check, geometric_check, objective, solve_d, stationarity_residual, GaussTuple, SolveOptions, SolveResult,
    SolveStatus,
};
use ibl_core::linalg::exact::Q;
use ibl_core::quadrature::{
    grid_search_d, quadrature_j, random_probe, Grid, GridSearchOptions, QuadratureResult, TestFunction,
};
use ibl_core::rank_one::{
    build_graph, cone_feasible, membership, membership_with_kernel, replay_certificate, replay_violation, Graph,
    Membership, RankOneData, Route, Violation,
};
use ibl_core::{classify, decompose, validate, Case, Classification, NormalizedProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

pub fn load(text: &str, convention: Convention) -> Result<NormalizedProblem> {
    let p = parse_problem(text, convention)?;
    validate(&p).map_err(CliError::Validation)
}

fn classification_json(np: &NormalizedProblem, c: &Classification) -> Value {
    obj([
        ("case", Value::String(format!("{:?}", c.case))),
        ("label", Value::String(c.case.label().into())),
        ("consequences", Value::Array(c.consequences.iter().map(|s| Value::String((*s).into())).collect())),
        ("pd_on_ker_bplus", Value::Bool(c.pd_on_ker_bplus)),
        ("dim_condition", Value::Bool(c.dim_condition)),
        ("bplus_onto", Value::Bool(c.bplus_onto)),
        (
            "signature",
            obj([
                ("plus", c.signature.plus.into()),
                ("minus", c.signature.minus.into()),
                ("zero", c.signature.zero.into()),
            ]),
        ),
        ("dim", np.dim().into()),
        ("m", np.factors().len().into()),
        ("m_plus", np.m_plus().into()),
    ])
}

fn decomposition_json(np: &NormalizedProblem, c: &Classification) -> Result<Value> {
    if c.case != Case::Case11 {
        return Ok(Value::Null);
    }
    let d = decompose(np, c).map_err(|e| CliError::from_core("decomposition", e))?;
    Ok(obj([
        ("b0", mat(&d.b0)),
        ("q_plus", mat(&d.q_plus)),
        ("b_last", mat(&d.b_last)),
        ("q_minus", mat(&d.q_minus)),
        ("residual", num(d.residual)),
    ]))
}

fn base_report(command: &str, np: &NormalizedProblem) -> Result<(Value, Classification)> {
    let c = classify(np);
    let report = obj([
        ("command", Value::String(command.into())),
        ("classification", classification_json(np, &c)),
        ("decomposition", decomposition_json(np, &c)?),
    ]);
    Ok((report, c))
}

pub fn cmd_classify(np: &NormalizedProblem) -> Result<Value> {
    Ok(base_report("classify", np)?.0)
}

fn solve_json(s: &SolveResult) -> Value {
    obj([
        ("status", Value::String(s.status.label().into())),
        ("d", num(s.d)),
        ("inf_cg", num(s.inf_cg)),
        ("dual_constant", num(s.d.sqrt())),
        ("residual", num(s.residual)),
        ("iterations", s.iterations.into()),
        ("starts", s.starts.into()),
        ("argmax", s.argmax.as_ref().map_or(Value::Null, |t| Value::Array(t.mats.iter().map(mat).collect()))),
        ("certificate", s.certificate.as_ref().map_or(Value::Null, |c| obj([("slopes", nums(&c.slopes))]))),
    ])
}

fn run_solve(np: &NormalizedProblem, c: &Classification, opts: &SolveOptions) -> Result<SolveResult> {
    solve_d(np, c, opts).map_err(|e| CliError::from_core("solver", e))
}

pub fn cmd_solve(np: &NormalizedProblem, opts: &SolveOptions) -> Result<Value> {
    let (mut r, c) = base_report("solve", np)?;
    let s = run_solve(np, &c, opts)?;
    insert(&mut r, "solve", solve_json(&s));
    Ok(r)
}

trait Json {
    fn json(&self) -> Value;
}

impl Json for f64 {
    fn json(&self) -> Value {
        num(*self)
    }
}

impl Json for Q {
    fn json(&self) -> Value {
        rational(self)
    }
}

fn violation_json<S: Json>(v: &Violation<S>) -> Value {
    let set = |s: &[usize]| Value::Array(s.iter().map(|&x| x.into()).collect());
    match v {
        Violation::Sign { k } => obj([("kind", "sign".into()), ("factor", (*k).into())]),
        Violation::LowerBound { i, value } => {
            obj([("kind", "lower-bound".into()), ("factor", (*i).into()), ("value", value.json())])
        }
        Violation::Homogeneity { sum, expected } => {
            obj([("kind", "homogeneity".into()), ("sum", sum.json()), ("expected", expected.json())])
        }
        Violation::Subset { set: s, lhs, rhs } => {
            obj([("kind", "subset".into()), ("set", set(s)), ("lhs", lhs.json()), ("rhs", rhs.json())])
        }
        Violation::Coset { set: s, lhs, rhs } => {
            obj([("kind", "coset".into()), ("set", set(s)), ("lhs", lhs.json()), ("rhs", rhs.json())])
        }
        Violation::Cut { set: s, excess } => obj([("kind", "cut".into()), ("set", set(s)), ("excess", excess.json())]),
    }
}

fn rank_one_json<S: Scalar + Json>(c: &[S], g: &Graph, exact: bool) -> Result<Value> {
    let m: Membership<S> = if g.has_kernel() { membership_with_kernel(c, g) } else { membership(c, g) }
        .map_err(|e| CliError::from_core("rank-one domain", e))?;
    let cone = cone_feasible(c, g).map_err(|e| CliError::from_core("rank-one domain", e))?;
    let replays = match (&m.plan, &m.violation) {
        (Some(p), _) => replay_certificate(c, g, p),
        (None, Some(v)) => replay_violation(c, g, v),
        (None, None) => false,
    };
    let edges = Value::Array(g.edges.iter().map(|&(i, j)| Value::Array(vec![i.into(), j.into()])).collect());
    let plan = m.plan.as_ref().map_or(Value::Null, |p| {
        Value::Array(
            p.flows
                .iter()
                .map(|(i, j, f)| obj([("from", (*i).into()), ("to", (*j).into()), ("mass", f.json())]))
                .collect(),
        )
    });
    Ok(obj([
        ("method", "rank-one".into()),
        ("exact", exact.into()),
        ("member", m.member.into()),
        ("route", if m.route == Route::Subsets { "subsets" } else { "flow" }.into()),
        ("graph", obj([("edges", edges), ("has_source", g.has_source.into()), ("has_sink", g.has_sink.into())])),
        ("plan", plan),
        ("violation", m.violation.as_ref().map_or(Value::Null, violation_json)),
        ("certificate_replays", replays.into()),
        ("cone_agrees", (cone.is_some() == m.member).into()),
        ("kernel_vertices_isolated", m.kernel_vertices_isolated.into()),
    ]))
}

fn is_rank_one(np: &NormalizedProblem, c: &Classification) -> bool {
    c.case == Case::Case11
        && np.factors().iter().all(|f| f.target_dim() == 1)
        && c.signature.plus <= 1
        && c.signature.minus <= 1
}

fn ledger_json(l: &LedgerEntry) -> Value {
    match l {
        LedgerEntry::LowerBound { i, value, holds } => {
            obj([("kind", "lower-bound".into()), ("factor", (*i).into()), ("value", num(*value)), ("holds", (*holds).into())])
        }
        LedgerEntry::Homogeneity { sum, dim, holds } => {
            obj([("kind", "homogeneity".into()), ("sum", num(*sum)), ("dim", (*dim).into()), ("holds", (*holds).into())])
        }
        LedgerEntry::CriticalWhole { b0_trivial, b_last_trivial, refutes } => obj([
            ("kind", "critical-whole-space".into()),
            ("b0_trivial", (*b0_trivial).into()),
            ("b_last_trivial", (*b_last_trivial).into()),
            ("refutes", (*refutes).into()),
        ]),
    }
}

fn kind_label(k: CriticalKind) -> &'static str {
    match k {
        CriticalKind::Subspace => "subspace",
        CriticalKind::Quotient => "quotient",
    }
}

fn condition_c_json(np: &NormalizedProblem, c: &Classification) -> Result<Value> {
    let d = decompose(np, c).map_err(|e| CliError::from_core("decomposition", e))?;
    let r = check_condition_c(np, &d, &CandidateOptions::default())
        .map_err(|e| CliError::from_core("condition C", e))?;
    let witness = r.witness.as_ref().map_or(Value::Null, |w| {
        obj([
            ("basis", mat(&w.basis.transpose())),
            ("clause", kind_label(w.clause).into()),
            ("lhs", num(w.lhs)),
            ("rhs", num(w.rhs)),
            ("confirmed", r.witness_confirmed.map_or(Value::Null, Value::Bool)),
        ])
    });
    let ledger = exponent_ledger(np, &d);
    let refuted = ledger.iter().any(|l| matches!(l, LedgerEntry::CriticalWhole { refutes: true, .. }));
    let criticals = Value::Array(
        r.criticals
            .iter()
            .map(|(b, k)| obj([("basis", mat(&b.transpose())), ("clause", kind_label(*k).into())]))
            .collect(),
    );
    Ok(obj([
        ("method", "condition-c".into()),
        ("exact", r.exact.into()),
        (
            "verdict",
            match r.verdict {
                Verdict::HoldsOnCandidates => "holds-on-candidates",
                Verdict::Violated => "violated",
            }
            .into(),
        ),
        ("witness", witness),
        ("criticals", criticals),
        ("candidates", r.candidates.into()),
        ("admissible", r.admissible.into()),
        ("truncated", r.truncated.into()),
        ("ledger", Value::Array(ledger.iter().map(ledger_json).collect())),
        ("ledger_refutes", refuted.into()),
    ]))
}

/// Rank-one data go through the exact domain description, the rest through
/// the subspace condition.
pub fn cmd_domain(np: &NormalizedProblem) -> Result<Value> {
    let (mut r, c) = base_report("domain", np)?;
    let domain = if is_rank_one(np, &c) {
        match np.exact() {
            Some(e) => {
                let data = RankOneData::from_exact(np).map_err(|e| CliError::from_core("rank-one domain", e))?;
                let g = build_graph(&data).map_err(|e| CliError::from_core("rank-one domain", e))?;
                rank_one_json(&e.exponents, &g, true)?
            }
            None => {
                let data = RankOneData::from_problem(np).map_err(|e| CliError::from_core("rank-one domain", e))?;
                let g = build_graph(&data).map_err(|e| CliError::from_core("rank-one domain", e))?;
                rank_one_json(&np.problem().exponents(), &g, false)?
            }
        }
    } else if c.case == Case::Case11 {
        condition_c_json(np, &c)?
    } else {
        obj([
            ("method", "none".into()),
            ("reason", format!("positivity is settled by the case: {}", c.case.label()).into()),
        ])
    };
    insert(&mut r, "domain", domain);
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub grid: Option<usize>,
    pub radius: Option<f64>,
    pub probes: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { grid: None, radius: None, probes: 200, seed: 0 }
    }
}

/// Slack allowed below the Gaussian constant on top of the quadrature error.
pub const LOWER_BOUND_SLACK: f64 = 1e-6;

fn quadrature_json(name: &str, q: &QuadratureResult, inf_cg: f64) -> (Value, bool) {
    let holds = q.value >= inf_cg - (q.error_bound + LOWER_BOUND_SLACK);
    let v = obj([
        ("functions", name.into()),
        ("value", num(q.value)),
        ("error_bound", num(q.error_bound)),
        ("radius", num(q.radius)),
        ("points", q.points.into()),
        ("radius_capped", q.radius_capped.into()),
        ("overflow", q.overflow.clone().map_or(Value::Null, Value::String)),
        ("holds", holds.into()),
    ]);
    (v, holds)
}

/// Boxes on positive factors and Cauchy products on the others, with
/// seeded shifts and scales.
pub fn box_cauchy_tuple(np: &NormalizedProblem, rng: &mut impl Rng) -> Vec<TestFunction> {
    np.factors()
        .iter()
        .map(|f| {
            let d = f.target_dim();
            let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let tf = if f.exponent > 0.0 {
                let w: f64 = rng.random_range(0.5..2.0);
                TestFunction::boxed(vec![-w / 2.0; d], vec![w / 2.0; d])
            } else {
                TestFunction::cauchy(d, rng.random_range(0.5..2.0))
            };
            tf.and_then(|t| t.shifted(shift)).expect("valid test function")
        })
        .collect()
}

/// Gaussians at the maximiser, floored by a small Cauchy tail on the
/// factors with non-positive exponent.
fn gaussian_tuple(np: &NormalizedProblem, t: &GaussTuple) -> Vec<TestFunction> {
    np.factors()
        .iter()
        .zip(&t.mats)
        .map(|(f, a)| {
            if f.exponent > 0.0 {
                TestFunction::gaussian(a.clone())
            } else {
                TestFunction::gaussian_floor(a.clone(), 1e-6)
            }
            .expect("admissible tuple")
        })
        .collect()
}

pub fn cmd_verify(np: &NormalizedProblem, sopts: &SolveOptions, vopts: &VerifyOptions) -> Result<Value> {
    let (mut r, c) = base_report("verify", np)?;
    if c.case != Case::Case11 {
        insert(&mut r, "verify", obj([("skipped", format!("needs Case 1.1, datum is {}", c.case.label()).into())]));
        return Ok(r);
    }
    let s = run_solve(np, &c, sopts)?;
    insert(&mut r, "solve", solve_json(&s));
    let bounded = s.status == SolveStatus::Optimal || s.status == SolveStatus::MaxIter;
    let inf_cg = if bounded { s.inf_cg } else { 0.0 };
    let mut all = true;
    let mut verify = obj([]);

    if (1..=3).contains(&np.dim()) {
        let grid = Grid { radius: vopts.radius, points: vopts.grid };
        let mut rng = ChaCha8Rng::seed_from_u64(vopts.seed);
        let mut runs = Vec::new();
        let mut tuples = vec![("box-cauchy", box_cauchy_tuple(np, &mut rng))];
        if let Some(t) = s.argmax.as_ref().filter(|_| bounded) {
            tuples.push(("gaussian-at-argmax", gaussian_tuple(np, t)));
        }
        for (name, fs) in tuples {
            let q = quadrature_j(np, &fs, &grid).map_err(|e| CliError::from_core("quadrature", e))?;
            let (v, holds) = quadrature_json(name, &q, inf_cg);
            all &= holds;
            runs.push(v);
        }
        insert(&mut verify, "quadrature", Value::Array(runs));
    } else {
        insert(&mut verify, "quadrature", Value::Null);
    }

    let params: usize = np.factors().iter().map(|f| f.target_dim()).sum();
    if params <= ibl_core::quadrature::MAX_GRID_PARAMETERS {
        // 25 values per axis up to four parameters, 9 beyond.
        let points = if params <= 4 { 25 } else { 9 };
        let g = grid_search_d(np, &GridSearchOptions { points, ..Default::default() })
            .map_err(|e| CliError::from_core("grid search", e))?;
        let holds = !bounded || g.best <= s.d * (1.0 + 1e-6) + 1e-9;
        all &= holds;
        insert(
            &mut verify,
            "grid_search",
            obj([("best", num(g.best)), ("points", points.into()), ("feasible", g.feasible.into()), ("holds", holds.into())]),
        );
    } else {
        insert(&mut verify, "grid_search", Value::Null);
    }

    let p = random_probe(np, vopts.probes, vopts.seed).map_err(|e| CliError::from_core("probes", e))?;
    let holds = p.min >= inf_cg - 1e-6 * (1.0 + inf_cg);
    all &= holds;
    insert(
        &mut verify,
        "probes",
        obj([
            ("min", num(p.min)),
            ("samples", p.samples.into()),
            ("attempts", p.attempts.into()),
            ("suspect_infeasible", p.suspect_infeasible.into()),
            ("holds", holds.into()),
        ]),
    );
    insert(&mut verify, "all_hold", all.into());
    insert(&mut r, "verify", verify);
    Ok(r)
}

pub fn cmd_geometric(np: &NormalizedProblem) -> Result<Value> {
    let (mut r, _) = base_report("geometric", np)?;
    let g = geometric_check(np);
    let id = GaussTuple::identity(np);
    let phi = objective(np, &id).map_err(|e| CliError::from_core("geometric", e))?;
    let stat = match phi {
        Some(_) => num(stationarity_residual(np, &id).map_err(|e| CliError::from_core("geometric", e))?),
        None => Value::Null,
    };
    insert(
        &mut r,
        "geometric",
        obj([
            ("geometric", g.is_geometric().into()),
            ("isometries", g.isometries.into()),
            ("identity_sum", g.identity_sum.into()),
            ("dim_condition", g.dim_condition.into()),
            ("residual", num(g.residual)),
            ("ratio_at_identity", phi.map_or(Value::Null, |p| num(p.exp()))),
            ("stationarity_at_identity", stat),
        ]),
    );
    Ok(r)
}

pub fn cmd_cdp(file: &CdpFile, sopts: &SolveOptions) -> Result<Value> {
    let rep = cdp_check(&file.sigma, &file.blocks, &file.p).map_err(CliError::Validation)?;
    let c = classify(&rep.problem);
    let solve = if c.case == Case::Case11 { Some(run_solve(&rep.problem, &c, sopts)?) } else { None };
    let factors = Value::Array(
        rep.problem
            .factors()
            .iter()
            .map(|f| obj([("c", num(f.exponent)), ("map", mat(&f.map))]))
            .collect(),
    );
    Ok(obj([
        ("command", "cdp".into()),
        (
            "cdp",
            obj([
                ("holds", rep.holds.into()),
                ("min_eigenvalue", num(rep.min_eigenvalue)),
                ("dim_condition", rep.dim_condition.into()),
                ("order", Value::Array(rep.order.iter().map(|&k| (k + 1).into()).collect())),
            ]),
        ),
        ("datum", obj([("factors", factors), ("kernel", mat(rep.problem.kernel().matrix()))])),
        ("classification", classification_json(&rep.problem, &c)),
        ("solve", solve.as_ref().map_or(Value::Null, solve_json)),
    ]))
}
