use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, ValueEnum};
use densetest::bounds::{
    c_pi_of_eps_vector, cq_constant, density_limit, eps_nu_of_m, size_lower_bound, tower_params,
    tower_tester_size_estimate, BoundReport, TowerRoute,
};
use densetest::constructions::{execute, plan_with, preset_eps_vector, PlanVerdict, Preset, RouteChoice};
use densetest::gf::PolyRing;
use densetest::irreducibles::{count_irreducibles, first_m_irreducibles, nth_irreducible, IrreducibleRecord};
use densetest::rational::{format_rational, Rational};
use densetest::tester::{from_json, to_json, Domain, Family, Tester, Value, SCHEMA_VERSION};
use densetest::verify::{is_tester, Grid, DEFAULT_BUDGET};
use densetest::{Error, UnconstructibleReason};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value as Json};

use crate::{RouteArg, TargetArgs};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_UNCONSTRUCTIBLE: u8 = 3;

/// Exit code, stdout payload and a one-line summary for stderr.
pub struct CommandResult {
    pub code: u8,
    pub payload: String,
    pub summary: String,
}

impl CommandResult {
    fn ok(payload: Json, summary: impl Into<String>) -> Self {
        CommandResult { code: EXIT_OK, payload: render(payload), summary: summary.into() }
    }

    fn with_code(code: u8, payload: Json, summary: impl Into<String>) -> Self {
        CommandResult { code, payload: render(payload), summary: summary.into() }
    }

    pub fn emit(self) -> ExitCode {
        if !self.payload.is_empty() {
            println!("{}", self.payload);
        }
        if !self.summary.is_empty() {
            eprintln!("{}", self.summary);
        }
        ExitCode::from(self.code)
    }
}

fn render(mut payload: Json) -> String {
    if let Json::Object(map) = &mut payload {
        map.insert("schema_version".into(), json!(SCHEMA_VERSION));
    }
    serde_json::to_string_pretty(&payload).expect("JSON values always serialize")
}

impl From<Error> for CommandResult {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Unconstructible { .. } => EXIT_UNCONSTRUCTIBLE,
            Error::InvalidArgument(_) | Error::InvalidEpsilon(_) | Error::OutOfRange(_) | Error::IndexOutOfRange { .. } => {
                EXIT_USAGE
            }
            _ => EXIT_FAILED,
        };
        let mut payload = json!({"error": error_kind(&e), "message": e.to_string()});
        if let Error::Unconstructible { reason, .. } = &e {
            payload["reason"] = json!(reason.to_string());
        }
        CommandResult::with_code(code, payload, format!("error: {e}"))
    }
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::NotPrime(_) => "not_prime",
        Error::NotIrreducible => "not_irreducible",
        Error::InvalidModulus(_) => "invalid_modulus",
        Error::DivisionByZero => "division_by_zero",
        Error::LevelMismatch { .. } => "level_mismatch",
        Error::IndexOutOfRange { .. } => "index_out_of_range",
        Error::Exhausted(_) => "exhausted",
        Error::Overflow(_) => "overflow",
        Error::InvalidEpsilon(_) => "invalid_epsilon",
        Error::ClassMismatch(_) => "class_mismatch",
        Error::MalformedInput { .. } => "malformed_input",
        Error::Unconstructible { .. } => "unconstructible",
        Error::SearchExhausted { .. } => "search_exhausted",
        Error::BudgetExceeded { .. } => "budget_exceeded",
        Error::HypothesisViolated(_) => "hypothesis_violated",
        Error::InvalidEpsVector(_) => "invalid_eps_vector",
        Error::OutOfRange(_) => "out_of_range",
        Error::InvalidArgument(_) => "invalid_argument",
    }
}

/// Runs `f`, turning library errors into results.
fn attempt(f: impl FnOnce() -> Result<CommandResult, Error>) -> CommandResult {
    f().unwrap_or_else(CommandResult::from)
}

fn route_choice(r: RouteArg) -> RouteChoice {
    match r {
        RouteArg::Auto => RouteChoice::Auto,
        RouteArg::Eval => RouteChoice::Eval,
        RouteArg::Crt => RouteChoice::Crt,
        RouteArg::T1 => RouteChoice::T1,
    }
}

fn plan_for(target: &TargetArgs, route: RouteArg) -> Result<PlanVerdict, Error> {
    plan_with(target.q, target.d, target.t, &target.eps, target.class, route_choice(route))
}

fn unconstructible(verdict: &PlanVerdict) -> Option<CommandResult> {
    match verdict {
        PlanVerdict::Unconstructible { reason, citation, detail } => Some(CommandResult::with_code(
            EXIT_UNCONSTRUCTIBLE,
            verdict.to_json(),
            format!("unconstructible ({reason}): {detail}; {citation}"),
        )),
        PlanVerdict::Feasible(_) => None,
    }
}

pub fn build(target: &TargetArgs, route: RouteArg, out: Option<&Path>) -> CommandResult {
    attempt(|| {
        let verdict = plan_for(target, route)?;
        if let Some(r) = unconstructible(&verdict) {
            return Ok(r);
        }
        let PlanVerdict::Feasible(p) = verdict else { unreachable!() };
        if !p.constructive {
            return Ok(CommandResult::with_code(
                EXIT_UNCONSTRUCTIBLE,
                json!({"error": "unconstructible", "reason": UnconstructibleReason::NoRoute.to_string(), "plan": p.to_json()}),
                format!("{} plan is not constructive ({}); nothing to build", p.route, p.notes.join("; ")),
            ));
        }
        let tester = execute(&p)?;
        let summary = format!(
            "built {} tester: size {}, eps {}; {}",
            p.route,
            tester.size(),
            format_rational(tester.epsilon()),
            p.citation
        );
        let doc = to_json(&tester);
        match out {
            Some(path) => {
                let text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
                fs::write(path, text + "\n")
                    .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))?;
                Ok(CommandResult::ok(
                    json!({
                        "route": p.route.to_string(),
                        "size": tester.size().to_string(),
                        "epsilon": format_rational(tester.epsilon()),
                        "citation": p.citation,
                        "out": path.display().to_string(),
                    }),
                    summary,
                ))
            }
            None => Ok(CommandResult::ok(doc, summary)),
        }
    })
}

pub fn plan(target: &TargetArgs, route: RouteArg) -> CommandResult {
    attempt(|| {
        let verdict = plan_for(target, route)?;
        if let Some(r) = unconstructible(&verdict) {
            return Ok(r);
        }
        let PlanVerdict::Feasible(p) = &verdict else { unreachable!() };
        let size = p.predicted_size.map_or_else(|| format!("~{:.3e}", p.predicted_value), |s| s.to_string());
        let summary = format!("{}: size {size}, declared eps {}; {}", p.route, format_rational(&p.declared_epsilon), p.citation);
        Ok(CommandResult::ok(verdict.to_json(), summary))
    })
}

fn load(path: &Path) -> Result<Tester, Error> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
    from_json(&text)
}

fn parse_coords(s: &str) -> Result<Vec<u32>, Error> {
    s.split(',')
        .map(|c| c.trim().parse::<u32>().map_err(|_| Error::InvalidArgument(format!("bad coordinate {c:?} in {s:?}"))))
        .collect()
}

/// Pads `coords` to `width` prime-field coordinates.
fn padded(mut coords: Vec<u32>, width: usize) -> Result<Vec<u32>, Error> {
    if coords.len() > width {
        return Err(Error::InvalidArgument(format!("{} coordinates given, the element has {width}", coords.len())));
    }
    coords.resize(width, 0);
    Ok(coords)
}

fn parse_element(domain: &Domain, s: &str) -> Result<Value, Error> {
    let coords = parse_coords(s)?;
    let f = domain.field();
    let tw = &f.tower;
    let width = tw.width(f.level);
    match domain {
        Domain::Field(_) => Ok(Value::Elem(tw.from_flat(f.level, padded(coords, width)?)?)),
        Domain::Poly { coeff, len } => {
            let flat = padded(coords, width * len)?;
            let coeffs = flat
                .chunks(width)
                .map(|c| tw.from_flat(coeff.level, c.to_vec()))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Value::Poly(PolyRing::new(tw, coeff.level).from_coeffs(coeffs)?))
        }
    }
}

fn value_json(tester: &Tester, v: &Value) -> Json {
    let tw = tester.target().tower();
    match v {
        Value::Elem(e) => json!({"coords": e.flat(), "index": tw.index_of(e).to_string()}),
        Value::Poly(z) => json!({"coefficients": z.coeffs().iter().map(|c| c.flat().to_vec()).collect::<Vec<_>>()}),
    }
}

pub fn entry(path: &Path, index: u128, block: usize, element: &str) -> CommandResult {
    attempt(|| {
        let tester = load(path)?;
        let v = parse_element(tester.source(), element)?;
        let image = tester.apply(index, block, &v)?;
        Ok(CommandResult::ok(
            json!({
                "index": index.to_string(),
                "block": block,
                "input": value_json(&tester, &v)["coords"].clone(),
                "value": value_json(&tester, &image),
                "source": tester.source().to_string(),
                "target": tester.target().to_string(),
            }),
            format!("entry {index}, block {block}: {image}"),
        ))
    })
}

pub struct VerifyOptions {
    pub n: usize,
    pub exact: bool,
    pub cap: Option<u64>,
    pub seed: u64,
    pub budget: Option<u128>,
    pub family: Option<Family>,
}

fn env_budget() -> Result<Option<u128>, Error> {
    match std::env::var("DENSETEST_BUDGET") {
        Ok(s) => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| Error::InvalidArgument(format!("DENSETEST_BUDGET={s:?} is not an integer"))),
        Err(_) => Ok(None),
    }
}

pub fn verify(path: &Path, opts: VerifyOptions) -> CommandResult {
    attempt(|| {
        let tester = load(path)?;
        let mut grid = Grid {
            n: opts.n,
            exact: opts.exact,
            seed: opts.seed,
            family: opts.family,
            budget: opts.budget.or(env_budget()?).unwrap_or(DEFAULT_BUDGET),
            ..Grid::default()
        };
        if let Some(cap) = opts.cap {
            grid.class_cap = cap;
            grid.assignment_cap = cap;
        }
        let report = is_tester(&tester, &grid)?;
        let summary = format!(
            "verdict {}: worst failure {} vs declared {} ({}, {} polynomials x {} assignments)",
            report.verdict,
            format_rational(&report.worst_failure),
            format_rational(&report.declared_epsilon),
            if report.exact { "exact" } else { "sampled" },
            report.polys_checked,
            report.assignments_checked
        );
        let code = if report.verdict { EXIT_OK } else { EXIT_FAILED };
        Ok(CommandResult::with_code(code, report.to_json(), summary))
    })
}

#[derive(Clone, Copy, ValueEnum)]
pub enum BoundKindArg {
    SizeLb,
    Density,
    Cq,
    T1Consts,
    EpsNu,
    Tower,
    TowerEstimate,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum TowerRouteArg {
    Cvaff3,
    Lt01,
    Lt02,
    Lt03,
}

#[derive(Args)]
pub struct BoundsArgs {
    #[arg(long, value_enum)]
    kind: BoundKindArg,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long, value_parser = crate::rational_arg)]
    eps: Option<Rational>,
    #[arg(long, value_parser = crate::class_arg)]
    class: Option<Family>,
    /// Series precision for `cq`.
    #[arg(long, default_value_t = 1e-9)]
    precision: f64,
    /// Index for `eps-nu`.
    #[arg(long)]
    m: Option<u64>,
    /// Tower level for `tower` and the tower routes.
    #[arg(long)]
    k: Option<u32>,
    /// Pipeline preset for `t1-consts`: density2 or co1:M.
    #[arg(long, default_value = "density2")]
    preset: String,
    /// Route for `tower-estimate`.
    #[arg(long, value_enum)]
    route: Option<TowerRouteArg>,
    /// Place count for the `cvaff3` route.
    #[arg(long)]
    s: Option<u128>,
}

fn need<T: Clone>(v: &Option<T>, name: &str) -> Result<T, Error> {
    v.clone().ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for this kind")))
}

fn report_result(r: BoundReport) -> CommandResult {
    let summary = format!("{}: {}; {}", r.kind, r.value, r.citation);
    CommandResult::ok(r.to_json(), summary)
}

pub fn bounds(a: &BoundsArgs) -> CommandResult {
    attempt(|| {
        Ok(match a.kind {
            BoundKindArg::SizeLb => report_result(size_lower_bound(
                need(&a.q, "q")?,
                need(&a.d, "d")?,
                need(&a.t, "t")?,
                &need(&a.eps, "eps")?,
                need(&a.class, "class")?,
            )?),
            BoundKindArg::Density => {
                report_result(density_limit(need(&a.q, "q")?, need(&a.d, "d")?, need(&a.t, "t")?, need(&a.class, "class")?)?)
            }
            BoundKindArg::Cq => report_result(cq_constant(need(&a.q, "q")?, a.precision)?),
            BoundKindArg::T1Consts => {
                let (q, d) = (need(&a.q, "q")?, need(&a.d, "d")?);
                let preset = Preset::parse(&a.preset)?;
                let eps = preset_eps_vector(q, d, preset)?;
                let c = c_pi_of_eps_vector(q, d, &eps)?;
                let payload = json!({
                    "kind": "t1-consts",
                    "preset": preset.to_string(),
                    "etas": eps.etas.iter().map(|e| e.to_string()).collect::<Vec<_>>(),
                    "eps_r": format_rational(&eps.eps_r),
                    "c": c.c,
                    "pi": c.pi,
                    "eps_star": format_rational(&c.eps_star),
                    "density_star": format_rational(&c.density_star),
                    "density_lower_bound": c.density_lower_bound,
                    "size_exponent": c.size_exponent,
                    "citation": c.citation,
                    "notes": ["size bound constant left symbolic: size <= Theta(d^5) 2^(c d) t"],
                });
                CommandResult::ok(payload, format!("c = {:.9}, pi = {:.9}, eps* = {}; {}", c.c, c.pi, format_rational(&c.eps_star), c.citation))
            }
            BoundKindArg::EpsNu => {
                let v = eps_nu_of_m(need(&a.q, "q")?, need(&a.m, "m")?)?;
                let payload = json!({
                    "kind": "eps-nu",
                    "eps": v.eps,
                    "nu": v.nu,
                    "eps_exact": v.eps_exact.as_ref().map(format_rational),
                    "nu_exact": v.nu_exact.map(|n| n.to_string()),
                    "citation": "eps(m) = (1-m/(q+1))^(1/m), nu(m) = (q+1)^(1/m)",
                });
                CommandResult::ok(payload, format!("eps = {:.12}, nu = {:.12}", v.eps, v.nu))
            }
            BoundKindArg::Tower => {
                let tp = tower_params(need(&a.q, "q")?, need(&a.k, "k")?)?;
                let payload = json!({
                    "kind": "tower",
                    "genus": tp.genus.to_string(),
                    "places": tp.places.to_string(),
                    "places_is_lower_bound": tp.places_is_lower_bound,
                    "citation": "g_k = q^k-2q^(k/2)+1 (k even), q^k-q^((k+1)/2)-q^((k-1)/2)+1 (k odd); \
                                 N_k = (q^2-q)q^(k-1)+2q (odd q) or +2q^2 (even q) for k >= 3",
                });
                let rel = if tp.places_is_lower_bound { ">=" } else { "=" };
                CommandResult::ok(payload, format!("g = {}, N {rel} {}", tp.genus, tp.places))
            }
            BoundKindArg::TowerEstimate => {
                let route = match need(&a.route, "route")? {
                    TowerRouteArg::Cvaff3 => TowerRoute::Cvaff3 { k: need(&a.k, "k")?, s: a.s },
                    TowerRouteArg::Lt01 => TowerRoute::Lt01 { k: need(&a.k, "k")? },
                    TowerRouteArg::Lt02 => TowerRoute::Lt02 { k: need(&a.k, "k")? },
                    TowerRouteArg::Lt03 => TowerRoute::Lt03,
                };
                let r = tower_tester_size_estimate(need(&a.q, "q")?, need(&a.d, "d")?, need(&a.t, "t")?, &need(&a.eps, "eps")?, route);
                match r {
                    Ok(r) => report_result(r),
                    Err(e @ Error::HypothesisViolated(_)) => CommandResult::with_code(
                        EXIT_UNCONSTRUCTIBLE,
                        json!({"error": "hypothesis_violated", "message": e.to_string()}),
                        format!("error: {e}"),
                    ),
                    Err(e) => return Err(e),
                }
            }
        })
    })
}

fn record_json(r: &IrreducibleRecord) -> Json {
    let ring = PolyRing::new(&r.tower, r.ground);
    json!({
        "index": r.index.to_string(),
        "poly": ring.to_indices(&r.poly).iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "root": r.root.flat(),
        "schema_version": SCHEMA_VERSION,
    })
}

/// One compact JSON record per line.
fn lines(records: &[IrreducibleRecord], summary: String) -> CommandResult {
    let payload = records.iter().map(|r| record_json(r).to_string()).collect::<Vec<_>>().join("\n");
    CommandResult { code: EXIT_OK, payload, summary }
}

pub fn irr_count(q: u64, k: usize) -> CommandResult {
    attempt(|| {
        let n = count_irreducibles(q, k)?;
        Ok(CommandResult::ok(json!({"q": q, "k": k, "count": n.to_string()}), format!("N_{q}({k}) = {n}")))
    })
}

pub fn irr_nth(q: u64, t: usize, m: u128) -> CommandResult {
    attempt(|| {
        let rec = nth_irreducible(q, t, m)?;
        Ok(lines(&[rec], format!("irreducible {m} of degree {t} over F_{q}")))
    })
}

pub fn irr_first(q: u64, t: usize, m: usize) -> CommandResult {
    attempt(|| {
        let recs = first_m_irreducibles(q, t, m)?;
        let n = recs.len();
        Ok(lines(&recs, format!("{n} irreducibles of degree {t} over F_{q}")))
    })
}

/// Least-squares slope of `ys` against `xs`.
fn slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return None;
    }
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

pub fn bench(q: u64, d: usize, eps: &Rational, class: Family, t_max: usize, samples: usize, seed: u64) -> CommandResult {
    attempt(|| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = vec!["t,route,size,build_us,entry_ns".to_string()];
        let (mut sizes, mut builds, mut entries) = (Vec::new(), Vec::new(), Vec::new());
        let mut t = 2;
        while t <= t_max {
            let p = match plan_with(q, d, t, eps, class, RouteChoice::Auto) {
                Ok(PlanVerdict::Feasible(p)) if p.constructive => p,
                Ok(_) => {
                    rows.push(format!("{t},none,,,"));
                    t *= 2;
                    continue;
                }
                Err(e) => {
                    rows.push(format!("{t},error: {},,,", error_kind(&e)));
                    t *= 2;
                    continue;
                }
            };
            let start = Instant::now();
            let tester = match execute(&p) {
                Ok(t) => t,
                Err(e) => {
                    rows.push(format!("{t},error: {},,,", error_kind(&e)));
                    t *= 2;
                    continue;
                }
            };
            let build = start.elapsed();
            let f = tester.source().field().clone();
            let card = f.cardinality();
            let inputs = (0..samples.max(1))
                .map(|_| Ok((rng.gen_range(0..tester.size()), Value::Elem(f.tower.from_index(f.level, rng.gen_range(0..card))?))))
                .collect::<Result<Vec<_>, Error>>()?;
            let start = Instant::now();
            for (i, v) in &inputs {
                std::hint::black_box(tester.apply(*i, 0, v)?);
            }
            let per_entry = start.elapsed().as_nanos() / inputs.len() as u128;
            rows.push(format!("{t},{},{},{},{per_entry}", p.route, tester.size(), build.as_micros()));
            sizes.push(tester.size() as f64);
            builds.push(build.as_secs_f64().max(1e-9));
            entries.push(per_entry.max(1) as f64);
            t *= 2;
        }
        let ln = |v: &[f64]| v.iter().map(|x| x.ln()).collect::<Vec<_>>();
        let fmt = |s: Option<f64>| s.map_or_else(|| "n/a".into(), |v| format!("{v:.3}"));
        let build_exp = slope(&ln(&sizes), &ln(&builds));
        let log_sizes: Vec<f64> = sizes.iter().map(|s| s.log2().max(1.0)).collect();
        let entry_exp = slope(&ln(&log_sizes), &ln(&entries));
        rows.push(format!("# build_time ~ size^{}", fmt(build_exp)));
        rows.push(format!("# entry_time ~ log2(size)^{}", fmt(entry_exp)));
        Ok(CommandResult {
            code: EXIT_OK,
            payload: rows.join("\n"),
            summary: format!("{} rows", sizes.len()),
        })
    })
}
