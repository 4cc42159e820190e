use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use ultrastab::exec::Execution;
use ultrastab::group::MatrixGroupElement;
use ultrastab::harness::{verify, verify_chain, HarnessConfig, Setup};
use ultrastab::padic::{format_rational, parse_rational};
use ultrastab::reynolds::{
    check_star, check_star_star, coefficient_function, dot, project_k, weight_decompose, CoeffModule,
    CoefficientMode, OmegaSet, RepSpec,
};
use ultrastab::selftest::{run_selftest, SelftestScale};
use ultrastab::torus::{check_midpoint_convexity, ApartmentPoint, LaurentPolynomial, TorusElement};
use ultrastab::tree::{
    convex_hull, decompose_g, default_window, distance, fixed_locus_window, fixed_point_in_hull, geodesic, orbit,
    to_dot, y_membership, CompactGroupSpec, LatticeClass, VertexSet,
};
use ultrastab::{Error, Prime, Rational};

use crate::manifest::RunManifest;
use crate::{Cli, Command, Common, GraphFormat, GroupChoice, RepCmd, SampleFormat, StabilityCmd, TreeCmd, TropicalCmd};

#[derive(Debug)]
pub enum CliError {
    Domain(Error),
    Io { path: PathBuf, message: String },
}

impl CliError {
    pub fn precondition(&self) -> &'static str {
        match self {
            CliError::Domain(e) => e.precondition(),
            CliError::Io { .. } => "accessible-path",
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            message: e.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Domain(e) => write!(f, "{e}"),
            CliError::Io { path, message } => write!(f, "{}: {message}", path.display()),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

enum Output {
    Json(Value),
    Text(String),
}

struct Outcome {
    output: Output,
    ok: bool,
    config: Option<HarnessConfig>,
}

impl Outcome {
    fn json(v: Value) -> Self {
        Outcome {
            output: Output::Json(v),
            ok: true,
            config: None,
        }
    }

    fn text(s: String) -> Self {
        Outcome {
            output: Output::Text(s),
            ok: true,
            config: None,
        }
    }

    fn ok(mut self, ok: bool) -> Self {
        self.ok = ok;
        self
    }

    fn with_config(mut self, c: &HarnessConfig) -> Self {
        self.config = Some(c.clone());
        self
    }
}

fn to_json<T: Serialize>(x: &T) -> Result<Value> {
    serde_json::to_value(x).map_err(|e| Error::Parse(format!("cannot encode output: {e}")).into())
}

fn parse_json<T: DeserializeOwned>(s: &str, what: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(format!("{what}: {e}")).into())
}

fn parse_rationals(s: &str) -> Result<Vec<Rational>> {
    if s.trim().is_empty() {
        return Err(Error::EmptyInput.into());
    }
    Ok(s.split(',').map(parse_rational).collect::<ultrastab::Result<_>>()?)
}

fn parse_vertex(s: &str, p: Prime) -> Result<LatticeClass> {
    if s.trim_start().starts_with('{') {
        let l: LatticeClass = parse_json(s, "vertex")?;
        return Ok(LatticeClass::new(l.a(), l.b().clone(), l.prime()));
    }
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| Error::Parse(format!("vertex {s:?} is not `a,b`")))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("vertex level {a:?} is not an integer")))?;
    Ok(LatticeClass::new(a, parse_rational(b)?, p))
}

fn parse_element(s: &str) -> Result<MatrixGroupElement> {
    parse_json(s, "group element")
}

/// Defaults, then the config file, then environment and flags.
pub fn harness_config(common: &Common) -> Result<HarnessConfig> {
    let mut c = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            parse_json(&text, &path.display().to_string())?
        }
        None => HarnessConfig::default(),
    };
    if let Some(p) = common.p {
        c.p = p;
    }
    if let Some(r) = common.rep {
        c.rep = r;
    }
    if let Some(l) = common.level {
        c.level_cap = l;
    }
    if let Some(w) = common.window {
        c.window_radius = Some(w);
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(n) = common.samples {
        c.samples = n;
    }
    c.validate()?;
    Ok(c)
}

fn window(c: &HarnessConfig) -> Result<VertexSet> {
    let p = Prime::new(c.p)?;
    Ok(match c.window_radius {
        None => default_window(p)?,
        Some(r) => fixed_locus_window(&CompactGroupSpec::torus(p), r)?,
    })
}

fn vertices_json(set: impl IntoIterator<Item = LatticeClass>) -> Result<Value> {
    to_json(&set.into_iter().collect::<Vec<_>>())
}

fn tropical(cmd: &TropicalCmd) -> Result<Outcome> {
    Ok(match cmd {
        TropicalCmd::Eval { poly, point } => {
            let f: LaurentPolynomial = parse_json(poly, "polynomial")?;
            let l = ApartmentPoint(parse_rationals(point)?);
            let v = f.gauss_eval(&l)?;
            Outcome::json(json!({ "point": to_json(&l)?, "valuation": to_json(&v)? }))
        }
        TropicalCmd::Pieces { poly } => {
            let f: LaurentPolynomial = parse_json(poly, "polynomial")?;
            Outcome::json(to_json(&f.tropicalize()?)?)
        }
        TropicalCmd::Convexity { poly, from, to } => {
            let f: LaurentPolynomial = parse_json(poly, "polynomial")?;
            let (a, b) = (ApartmentPoint(parse_rationals(from)?), ApartmentPoint(parse_rationals(to)?));
            let holds = check_midpoint_convexity(&f, &a, &b)?;
            let m = a.midpoint(&b);
            Outcome::json(json!({
                "holds": holds,
                "from": to_json(&f.gauss_eval(&a)?)?,
                "midpoint": to_json(&f.gauss_eval(&m)?)?,
                "to": to_json(&f.gauss_eval(&b)?)?,
            }))
            .ok(holds)
        }
    })
}

fn tree(cmd: &TreeCmd, config: &HarnessConfig) -> Result<Outcome> {
    let p = Prime::new(config.p)?;
    Ok(match cmd {
        TreeCmd::Distance { from, to } => {
            let (a, b) = (parse_vertex(from, p)?, parse_vertex(to, p)?);
            let d = distance(&a, &b)?;
            Outcome::json(json!({ "from": to_json(&a)?, "to": to_json(&b)?, "distance": d }))
        }
        TreeCmd::Path { from, to, format } => {
            let path = geodesic(&parse_vertex(from, p)?, &parse_vertex(to, p)?)?;
            match format {
                GraphFormat::Json => Outcome::json(vertices_json(path)?),
                GraphFormat::Dot => Outcome::text(to_dot(&path.into_iter().collect())),
            }
        }
        TreeCmd::Hull { vertices, format } => {
            let set = vertices.iter().map(|s| parse_vertex(s, p)).collect::<Result<VertexSet>>()?;
            let hull = convex_hull(&set)?;
            match format {
                GraphFormat::Json => Outcome::json(vertices_json(hull)?),
                GraphFormat::Dot => Outcome::text(to_dot(&hull)),
            }
        }
        TreeCmd::Orbit { vertex, group } => {
            let l = parse_vertex(vertex, p)?;
            let k = match group {
                GroupChoice::Torus => CompactGroupSpec::torus(l.prime()),
                GroupChoice::Special => CompactGroupSpec::special(l.prime()),
            }
            .with_level(config.level_cap);
            let o = orbit(&k, &l)?;
            Outcome::json(json!({ "vertex": to_json(&l)?, "size": o.len(), "orbit": vertices_json(o)? }))
        }
        TreeCmd::Fixed { vertex } => {
            let l = parse_vertex(vertex, p)?;
            let k = CompactGroupSpec::torus(l.prime()).with_level(config.level_cap);
            let hull = convex_hull(&orbit(&k, &l)?)?;
            let fixed = fixed_point_in_hull(&k, &hull)?;
            Outcome::json(json!({ "vertex": to_json(&l)?, "hull_size": hull.len(), "fixed_point": to_json(&fixed)? }))
        }
        TreeCmd::Ymember { element } => {
            let g = parse_element(element)?;
            let k = CompactGroupSpec::torus(g.prime()).with_level(config.level_cap);
            let m = y_membership(&g, &window(config)?, &k)?;
            Outcome::json(to_json(&m)?)
        }
    })
}

fn rep(cmd: &RepCmd, config: &HarnessConfig) -> Result<Outcome> {
    let p = Prime::new(config.p)?;
    let rho = RepSpec::sl2(config.rep, p);
    Ok(match cmd {
        RepCmd::Decompose => {
            let wd = weight_decompose(&rho);
            let spaces: Vec<Value> = wd
                .spaces
                .iter()
                .map(|(chi, entries)| json!({ "weight": chi.0, "entries": entries }))
                .collect();
            Outcome::json(json!({
                "rep": to_json(&rho)?,
                "weights": rho.weights().iter().map(|c| c.0.clone()).collect::<Vec<_>>(),
                "spaces": spaces,
                "centralizer_dim": wd.zero_space().len(),
            }))
        }
        RepCmd::Reynolds { element, vector, covector } => {
            let g = parse_element(element)?;
            let (v, phi) = (parse_rationals(vector)?, parse_rationals(covector)?);
            let f = coefficient_function(&rho, &g, &v, &phi, CoefficientMode::Conjugation)?;
            let averaged = project_k(&CoeffModule::torus(&rho), &f)?;
            let z = weight_decompose(&rho).project_z(&rho.rho_matrix(&g)?)?;
            let projected = dot(&phi, &z.mul_vec(&v)?);
            let equal = averaged == projected;
            Outcome::json(json!({
                "averaged_coefficient": format_rational(&averaged),
                "projected_coefficient": format_rational(&projected),
                "equal": equal,
            }))
            .ok(equal)
        }
        RepCmd::Star { omega } => {
            let module = CoeffModule::torus(&rho);
            let set = match omega {
                None => OmegaSet::centered(p, module.dim())?,
                Some(s) => OmegaSet::new(
                    s.split(',')
                        .map(|j| {
                            j.trim()
                                .parse()
                                .map(|j| TorusElement::sl2_power(j, p))
                                .map_err(|_| Error::Parse(format!("exponent {j:?} is not an integer")))
                        })
                        .collect::<ultrastab::Result<_>>()?,
                )?,
            };
            let star = check_star(&set, &module)?;
            let star_star = check_star_star(&rho)?;
            let ok = star.holds && star_star.holds;
            Outcome::json(json!({ "omega": to_json(&set)?, "star": to_json(&star)?, "star_star": to_json(&star_star)? }))
                .ok(ok)
        }
    })
}

fn stability(cmd: &StabilityCmd, config: &HarnessConfig, exec: Execution) -> Result<Outcome> {
    if let StabilityCmd::Decompose { element } = cmd {
        let g = parse_element(element)?;
        return Ok(Outcome::json(to_json(&decompose_g(&g, &window(config)?)?)?).with_config(config));
    }
    let setup = Setup::new(config)?;
    let out = match cmd {
        StabilityCmd::Constants => {
            let summary: Vec<Value> = setup
                .constants
                .summary()
                .into_iter()
                .map(|(name, c)| Ok(json!({ "name": name, "constant": to_json(&c)? })))
                .collect::<Result<_>>()?;
            Outcome::json(json!({ "constants": to_json(&setup.constants)?, "summary": summary }))
        }
        StabilityCmd::Verify { format } => {
            let report = verify(&setup, exec)?;
            let ok = report.violations == 0;
            match format {
                SampleFormat::Json => Outcome::json(to_json(&report)?),
                SampleFormat::Csv => Outcome::text(report.to_csv()),
            }
            .ok(ok)
        }
        StabilityCmd::Chain { chain_samples } => {
            let sweeps = verify_chain(&setup, chain_samples.unwrap_or(config.chain_samples), exec)?;
            let ok = sweeps.iter().all(|s| s.passed());
            Outcome::json(to_json(&sweeps)?).ok(ok)
        }
        StabilityCmd::Report => {
            let report = verify(&setup, exec)?;
            let sweeps = verify_chain(&setup, config.chain_samples, exec)?;
            let ok = report.violations == 0 && sweeps.iter().all(|s| s.passed());
            Outcome::json(json!({ "verification": to_json(&report)?, "chain": to_json(&sweeps)? })).ok(ok)
        }
        StabilityCmd::Decompose { .. } => unreachable!("handled above"),
    };
    Ok(out.with_config(config))
}

fn selftest(cli: &Cli, quick: bool, as_json: bool, exec: Execution) -> Result<Outcome> {
    let c = &cli.common;
    let mut scale = SelftestScale::default();
    if let Some(p) = c.p {
        Prime::new(p)?;
        scale.primes = vec![p];
    }
    if let Some(r) = c.rep {
        scale.reps = vec![r];
    }
    if let Some(s) = c.seed {
        scale.seed = s;
    }
    if quick {
        scale = scale.reduced(10);
    }
    let report = run_selftest(&scale, exec)?;
    let ok = report.passed();
    Ok(if as_json {
        Outcome::json(to_json(&report)?)
    } else {
        let verdict = if ok { "all properties hold" } else { "some properties FAILED" };
        Outcome::text(format!("{}{verdict}\n", report.to_table()))
    }
    .ok(ok))
}

pub fn run(cli: &Cli) -> Result<ExitCode> {
    let exec = if cli.common.sequential {
        Execution::Sequential
    } else {
        Execution::default()
    };
    let outcome = match &cli.command {
        Command::Tropical(cmd) => tropical(cmd)?,
        Command::Tree(cmd) => {
            let c = harness_config(&cli.common)?;
            tree(cmd, &c)?.with_config(&c)
        }
        Command::Rep(cmd) => {
            let c = harness_config(&cli.common)?;
            rep(cmd, &c)?.with_config(&c)
        }
        Command::Stability(cmd) => stability(cmd, &harness_config(&cli.common)?, exec)?,
        Command::Selftest(args) => selftest(cli, args.quick, args.json, exec)?,
    };
    emit(cli, &outcome)?;
    Ok(if outcome.ok { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<()> {
    let text = match &outcome.output {
        Output::Json(v) => {
            let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Parse(e.to_string()))?;
            s.push('\n');
            s
        }
        Output::Text(s) => s.clone(),
    };
    let Some(out) = &cli.common.out else {
        print!("{text}");
        return Ok(());
    };
    fs::write(out, &text).map_err(|e| CliError::io(out, e))?;
    let mut parameters = to_json(&cli.common)?;
    if let Value::Object(m) = &mut parameters {
        m.remove("out");
        m.remove("sequential");
        if let Some(c) = &outcome.config {
            m.insert("resolved".into(), to_json(c)?);
        }
    }
    let manifest_path = PathBuf::from(format!("{}.manifest.json", out.display()));
    let manifest = RunManifest::new(
        to_json(&cli.command)?,
        parameters,
        outcome.config.as_ref().map(|c| c.seed).or(cli.common.seed),
        vec![out.display().to_string(), manifest_path.display().to_string()],
    );
    let mut body = serde_json::to_string_pretty(&manifest).map_err(|e| Error::Parse(e.to_string()))?;
    body.push('\n');
    fs::write(&manifest_path, body).map_err(|e| CliError::io(&manifest_path, e))?;
    Ok(())
}
