//! `rellich`: constants, identity suites, quadrature and sharpness experiments as tables.
//!
//! Exit status: 0 success, 1 I/O or invalid input, 2 hypothesis violation (unless
//! `--allow-star-violation`), 3 quadrature non-convergence.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rellich::iterlog::tabulate;
use rellich::params::{parse_rational, parse_scale};
use rellich::prober::{
    d_scale_sweep, family_sides, sharpness_a_sweep, sharpness_b_schedule, InnerLimit, SharpnessBConfig,
};
use rellich::quadrature::{gamma_ij, QuadConfig};
use rellich::radial_calculus::CutoffSpec;
use rellich::real::{precision_digits, set_precision_digits};
use rellich::sharp_constants::{
    sharp_constants, verify_constant_identities, verify_proof_coefficients, verify_radio, verify_recursions, IdentityReport,
};
use rellich::{Error, InequalityParams, Real};
use rug::Rational;

use output::{schema_docs, schema_of, Format, Provenance, Table};

#[derive(Parser, Debug)]
#[command(name = "rellich", version, about = "Sharp constants and sharpness experiments for weighted higher-order Rellich inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Working precision in decimal digits (at least 30).
    #[arg(long, global = true, default_value_t = 60)]
    precision: u32,

    /// Absolute and relative quadrature tolerance.
    #[arg(long, global = true, default_value = "1e-20")]
    tol: String,

    /// Output file (standard output when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Seed for random parameter grids.
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Exit 0 even when k − γ − mp ≤ 0 or the (p, γ) condition fails.
    #[arg(long, global = true)]
    allow_star_violation: bool,
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    /// Order: Δ^{m/2} for even m, ∇Δ^{(m−1)/2} for odd m.
    #[arg(long, default_value_t = 2)]
    m: u32,
    #[arg(long, default_value = "2")]
    p: String,
    #[arg(long, default_value = "0")]
    gamma: String,
    /// Codimension of the singular set.
    #[arg(long, default_value = "12")]
    k: String,
    /// Log-normalization scale: a decimal, e, e^x or c*e^x.
    #[arg(long = "D", default_value = "e")]
    d_scale: String,
    /// Radius of the domain.
    #[arg(long = "R", default_value = "1")]
    radius: String,
}

impl ParamArgs {
    fn build(&self) -> Result<InequalityParams, Error> {
        InequalityParams::parse(self.m, &self.p, &self.gamma, &self.k)?
            .with_domain(parse_scale(&self.radius)?, parse_scale(&self.d_scale)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum InnerMode {
    Exact,
    Richardson,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// A', A'', A, B, Q and the parameter condition.
    Constants(ParamArgs),
    /// Randomized exact and high-precision identity suite.
    Identities {
        #[arg(long, default_value_t = 8)]
        max_m: u32,
        #[arg(long, default_value_t = 50)]
        trials: usize,
    },
    /// t, X_1..X_r, η, ζ, θ on a log grid t = e^{−ℓ}.
    TabulateIterlog {
        #[arg(long, default_value_t = 3)]
        r: usize,
        #[arg(long, default_value = "1")]
        ell_min: String,
        #[arg(long, default_value = "30")]
        ell_max: String,
        #[arg(long, default_value_t = 30)]
        points: usize,
    },
    /// Γ_ij = ∫ t^{ε_0−1}∏X_l^{−1+ε_l}·X_1²⋯X_i²X_{i+1}⋯X_j dt on (0, R].
    Integrate {
        #[command(flatten)]
        params: ParamArgs,
        /// ε_0, …, ε_r.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.1,0.1")]
        eps: Vec<String>,
        /// i (and j unless given).
        #[arg(long, default_value_t = 0)]
        depth: usize,
        #[arg(long)]
        j: Option<usize>,
        /// Multiply by χ^p for the standard cutoff.
        #[arg(long)]
        cutoff: bool,
    },
    /// Both sides and the remainder for one member of the extremal family.
    CheckInequality {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 2)]
        r: usize,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "0.3,0.3,0.3")]
        eps: Vec<String>,
    },
    /// lhs/t0 for u = χ·d^{s_0} along a decreasing ε_0 grid.
    SharpnessA {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_delimiter = ',', default_value = "1e-2,1e-3")]
        eps: Vec<String>,
    },
    /// Remainder quotient along an ε_r schedule, plus the θ-exponent probe.
    SharpnessB {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, default_value_t = 1)]
        r: usize,
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
        eps: Vec<String>,
        #[arg(long, value_enum, default_value_t = InnerMode::Exact)]
        inner: InnerMode,
        /// The two inner ε values for --inner richardson.
        #[arg(long, value_delimiter = ',', default_value = "1e-3,1e-4")]
        inner_eps: Vec<String>,
        #[arg(long, default_value = "1")]
        theta: String,
        /// Diagonal ε values for the θ probe.
        #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3")]
        theta_eps: Vec<String>,
        #[arg(long)]
        no_theta: bool,
    },
    /// Remainder of probe functions as D varies.
    DSweep {
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long = "D-grid", value_delimiter = ',', default_value = "e,e^2,e^4")]
        d_grid: Vec<String>,
        #[arg(long, default_value_t = 2)]
        r: usize,
        /// ε list of one probe (repeatable).
        #[arg(long)]
        probe: Vec<String>,
    },
    /// Column schemas of every command.
    Schema,
}

enum Status {
    Ok,
    Hypothesis,
    NoConvergence,
}

enum Failure {
    Io(std::io::Error),
    Input(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

fn rationals(v: &[String]) -> Result<Vec<Rational>, Error> {
    v.iter().map(|s| parse_rational(s)).collect()
}

fn dec(x: &Real) -> String {
    x.to_decimal()
}

fn joined(v: &[Real]) -> String {
    v.iter().map(dec).collect::<Vec<_>>().join(";")
}

fn random_rational(rng: &mut ChaCha8Rng, lo: i64, hi: i64, max_den: i64) -> Rational {
    let den = rng.gen_range(1..=max_den);
    let num = rng.gen_range(lo * den..=hi * den);
    Rational::from((num, den))
}

struct Ctx {
    cfg: QuadConfig,
    provenance: Provenance,
}

fn hypothesis_status(params: &InequalityParams) -> Status {
    let star = rellich::sharp_constants::star_condition(params);
    if params.satisfies_hypothesis() && star.ok {
        Status::Ok
    } else {
        Status::Hypothesis
    }
}

fn add_params(ctx: &mut Ctx, params: &InequalityParams) {
    let s = params.summary();
    for (k, v) in [("m", s.m.to_string()), ("p", s.p), ("gamma", s.gamma), ("k", s.k), ("D", s.d_scale), ("R", s.radius)] {
        ctx.provenance.push((k.into(), v));
    }
}

fn run_constants(ctx: &mut Ctx, args: &ParamArgs) -> Result<(Table, Status), Failure> {
    let params = args.build()?;
    add_params(ctx, &params);
    let c = sharp_constants(&params)?;
    let opt = |x: &Option<Real>| x.as_ref().map(dec).unwrap_or_default();
    let (a_prime, a_dd, a, b) = match &c.exact {
        Some(e) => (e.a_prime.to_string(), e.a_double_prime.to_string(), e.a.to_string(), e.b.as_ref().map(|b| b.to_string()).unwrap_or_default()),
        None => (opt(&c.a_prime), opt(&c.a_double_prime), opt(&c.a), opt(&c.b)),
    };
    let mut t = Table::new(schema_of("constants"));
    t.push(vec![
        params.m.to_string(),
        params.p.to_string(),
        params.gamma.to_string(),
        params.k.to_string(),
        a_prime,
        a_dd,
        a,
        b,
        dec(&c.abs_a),
        opt(&c.abs_b),
        c.q.to_string(),
        c.star.ok.to_string(),
        c.star.gamma_crit.to_string(),
        params.satisfies_hypothesis().to_string(),
    ]);
    Ok((t, hypothesis_status(&params)))
}

fn run_identities(ctx: &mut Ctx, max_m: u32, trials: usize, seed: u64) -> Result<(Table, Status), Failure> {
    if max_m == 0 {
        return Err(Failure::Input("--max-m must be at least 1".into()));
    }
    ctx.provenance.push(("max_m".into(), max_m.to_string()));
    ctx.provenance.push(("trials".into(), trials.to_string()));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = IdentityReport::default();
    let mut done = 0;
    while done < trials {
        let p = Rational::from(rng.gen_range(2..=3));
        let m = rng.gen_range(1..=max_m);
        let gamma = random_rational(&mut rng, 0, 6, 7);
        let k = random_rational(&mut rng, 1, 40, 5);
        let Ok(params) = InequalityParams::new(m, p, gamma, k) else { continue };
        done += 1;
        rep.extend(verify_constant_identities(&params));
        rep.extend(verify_recursions(&params)?);
    }
    for m in 1..=2u32 {
        for p in ["2", "5/2", "3"] {
            for k in ["8", "12", "20"] {
                rep.extend(verify_radio(m, &parse_rational(p)?, &parse_rational(k)?)?);
            }
        }
    }
    let mut done = 0;
    while done < trials {
        let p = random_rational(&mut rng, 1, 4, 4);
        let gamma = random_rational(&mut rng, 0, 5, 6);
        let k = random_rational(&mut rng, 1, 40, 3);
        let Ok(params) = InequalityParams::new(2, p, gamma, k) else { continue };
        if !params.satisfies_hypothesis() {
            continue;
        }
        let beta = random_rational(&mut rng, -3, 3, 5);
        let mu = random_rational(&mut rng, -3, 3, 5);
        let Ok(r) = verify_proof_coefficients(&params, &beta, &mu) else { continue };
        done += 1;
        rep.extend(r);
    }
    let mut t = Table::new(schema_of("identities"));
    for r in &rep.records {
        let tol = if r.exact { 0.0 } else { 1e-12 };
        t.push(vec![
            r.identity.clone(),
            r.params.clone(),
            r.lhs.clone(),
            r.rhs.clone(),
            dec(&r.abs_err),
            dec(&r.rel_err),
            r.exact.to_string(),
            r.holds(tol).to_string(),
        ]);
    }
    Ok((t, Status::Ok))
}

fn run_tabulate(ctx: &mut Ctx, r: usize, ell_min: &str, ell_max: &str, points: usize) -> Result<(Table, Status), Failure> {
    let lo = Real::from_rational(&parse_rational(ell_min)?);
    let hi = Real::from_rational(&parse_rational(ell_max)?);
    if points < 2 || !lo.is_positive() || hi <= lo {
        return Err(Failure::Input("need 0 < ell-min < ell-max and at least two points".into()));
    }
    ctx.provenance.push(("r".into(), r.to_string()));
    let ratio = (&hi / &lo).ln();
    let ts: Vec<Real> = (0..points)
        .map(|i| {
            let ell = &lo * (&ratio * Real::ratio(i as i64, points as i64 - 1)).exp();
            (-ell).exp()
        })
        .collect();
    let tol = Real::from(10f64).powi(-(precision_digits() as i32));
    let rows = tabulate(&ts, r, &tol)?;
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=r).map(|i| format!("X{i}")));
    cols.extend(["eta", "zeta", "theta"].map(String::from));
    let mut t = Table::new(cols);
    for row in rows {
        let mut v = vec![dec(&row.t)];
        v.extend(row.x.iter().map(dec));
        v.extend([dec(&row.eta), dec(&row.zeta), dec(&row.theta)]);
        t.push(v);
    }
    Ok((t, Status::Ok))
}

fn run_integrate(ctx: &mut Ctx, args: &ParamArgs, eps: &[String], depth: usize, j: Option<usize>, cutoff: bool) -> Result<(Table, Status), Failure> {
    let params = args.build()?;
    add_params(ctx, &params);
    let eps = rationals(eps)?;
    let j = j.unwrap_or(depth);
    let cut = cutoff.then(|| CutoffSpec::standard(&params.radius));
    let res = gamma_ij(&params, &eps, depth, j, cut.as_ref(), &ctx.cfg)?;
    let mut t = Table::new(schema_of("integrate"));
    t.push(vec![
        depth.to_string(),
        j.to_string(),
        eps.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(";"),
        dec(&res.value),
        dec(&res.err_estimate),
        res.panels.to_string(),
        res.evaluations.to_string(),
        serde_json::to_value(res.substitution).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        res.converged.to_string(),
    ]);
    Ok((t, if res.converged { Status::Ok } else { Status::NoConvergence }))
}

fn run_check(ctx: &mut Ctx, args: &ParamArgs, r: usize, eps: &[String]) -> Result<(Table, Status), Failure> {
    let params = args.build()?;
    add_params(ctx, &params);
    let eps = rationals(eps)?;
    let cut = CutoffSpec::standard(&params.radius);
    let rep = family_sides(&params, &eps, Some(&cut), r, None, &ctx.cfg)?;
    let s = &rep.params;
    let mut t = Table::new(schema_of("check-inequality"));
    t.push(vec![
        s.m.to_string(),
        s.p.clone(),
        s.gamma.clone(),
        s.k.clone(),
        s.d_scale.clone(),
        s.radius.clone(),
        rep.r.to_string(),
        dec(&rep.lhs),
        dec(&rep.t0),
        joined(&rep.series_terms),
        dec(&rep.remainder),
        dec(&rep.quotient),
        dec(&rep.error_budget),
        rep.hypothesis_ok.to_string(),
        rep.star_ok.to_string(),
        rep.converged.to_string(),
    ]);
    let status = if !rep.converged {
        Status::NoConvergence
    } else {
        hypothesis_status(&params)
    };
    Ok((t, status))
}

fn run_sharpness_a(ctx: &mut Ctx, args: &ParamArgs, eps: &[String]) -> Result<(Table, Status), Failure> {
    let params = args.build()?;
    add_params(ctx, &params);
    let rep = sharpness_a_sweep(&params, &rationals(eps)?, &ctx.cfg)?;
    let mut t = Table::new(schema_of("sharpness-a"));
    for row in &rep.rows {
        t.push(vec![
            "sample".into(),
            dec(&row.eps_0),
            dec(&row.quotient_a),
            dec(&row.gap),
            row.gap_ratio.as_ref().map(dec).unwrap_or_default(),
            dec(&row.err),
        ]);
    }
    t.push(vec!["extrapolated".into(), "0".into(), dec(&rep.extrapolated), dec(&(&rep.extrapolated - &rep.reference)), String::new(), String::new()]);
    t.push(vec!["reference".into(), "0".into(), dec(&rep.reference), "0".into(), String::new(), String::new()]);
    Ok((t, hypothesis_status(&params)))
}

#[allow(clippy::too_many_arguments)]
fn run_sharpness_b(
    ctx: &mut Ctx,
    args: &ParamArgs,
    r: usize,
    eps: &[String],
    inner: InnerMode,
    inner_eps: &[String],
    theta: &str,
    theta_eps: &[String],
    no_theta: bool,
) -> Result<(Table, Status), Failure> {
    let params = args.build()?;
    add_params(ctx, &params);
    let inner = match inner {
        InnerMode::Exact => InnerLimit::Exact,
        InnerMode::Richardson => {
            let v = rationals(inner_eps)?;
            if v.len() != 2 {
                return Err(Failure::Input("--inner-eps takes exactly two values".into()));
            }
            InnerLimit::Richardson { eps_hi: v[0].clone(), eps_lo: v[1].clone() }
        }
    };
    ctx.provenance.push(("r".into(), r.to_string()));
    ctx.provenance.push(("inner".into(), format!("{inner:?}")));
    let config = SharpnessBConfig {
        schedule: rationals(eps)?,
        inner,
        theta: parse_rational(theta)?,
        theta_schedule: if no_theta { Vec::new() } else { rationals(theta_eps)? },
    };
    let rep = sharpness_b_schedule(&params, r, &config, &ctx.cfg)?;
    let mut t = Table::new(schema_of("sharpness-b"));
    for row in &rep.rows {
        t.push(vec!["sample".into(), dec(&row.eps_r), dec(&row.quotient), dec(&row.numerator), dec(&row.denominator), dec(&row.err)]);
    }
    let blank = || vec![String::new(), String::new(), String::new()];
    let mut ex = vec!["extrapolated".into(), "0".into(), dec(&rep.extrapolated)];
    ex.extend(blank());
    t.push(ex);
    let mut re = vec!["reference".into(), "0".into(), dec(&rep.reference)];
    re.extend(blank());
    t.push(re);
    for row in &rep.theta_rows {
        t.push(vec!["theta".into(), dec(&row.eps), dec(&row.quotient), String::new(), String::new(), dec(&row.err)]);
    }
    Ok((t, hypothesis_status(&params)))
}

fn run_d_sweep(ctx: &mut Ctx, args: &ParamArgs, d_grid: &[String], r: usize, probes: &[String]) -> Result<(Table, Status), Failure> {
    let params = args.build()?;
    add_params(ctx, &params);
    let grid: Vec<Real> = d_grid.iter().map(|s| parse_scale(s)).collect::<Result<_, _>>()?;
    let probes: Vec<Vec<Rational>> = if probes.is_empty() {
        ["0.1,0.2,0.3", "0.3,0.3,0.3", "0.5,0.1,0.2"].iter().map(|s| rationals(&split(s))).collect::<Result<_, _>>()?
    } else {
        probes.iter().map(|s| rationals(&split(s))).collect::<Result<_, _>>()?
    };
    let rep = d_scale_sweep(&params, &probes, &grid, r, &ctx.cfg)?;
    let mut t = Table::new(schema_of("d-sweep"));
    for row in &rep.rows {
        t.push(vec![
            "sample".into(),
            dec(&row.d_scale),
            row.probe.to_string(),
            dec(&row.remainder),
            dec(&row.error_budget),
            joined(&row.series_terms),
        ]);
    }
    if let Some(th) = &rep.threshold {
        t.push(vec!["threshold".into(), dec(th), String::new(), String::new(), String::new(), String::new()]);
    }
    Ok((t, hypothesis_status(&params)))
}

fn split(s: &str) -> Vec<String> {
    s.split(',').map(|x| x.trim().to_string()).collect()
}

fn run(cli: &Cli) -> Result<Status, Failure> {
    if cli.precision < 30 {
        return Err(Failure::Input("--precision must be at least 30".into()));
    }
    set_precision_digits(cli.precision);
    let tol = Real::from_rational(&parse_rational(&cli.tol)?);
    if !tol.is_positive() {
        return Err(Failure::Input("--tol must be positive".into()));
    }
    let name = match &cli.command {
        Command::Schema => {
            print!("{}", schema_docs());
            return Ok(Status::Ok);
        }
        Command::Constants(_) => "constants",
        Command::Identities { .. } => "identities",
        Command::TabulateIterlog { .. } => "tabulate-iterlog",
        Command::Integrate { .. } => "integrate",
        Command::CheckInequality { .. } => "check-inequality",
        Command::SharpnessA { .. } => "sharpness-a",
        Command::SharpnessB { .. } => "sharpness-b",
        Command::DSweep { .. } => "d-sweep",
    };
    let mut ctx = Ctx {
        cfg: QuadConfig::with_tol(&tol),
        provenance: vec![
            ("tool".into(), format!("rellich {}", env!("CARGO_PKG_VERSION"))),
            ("command".into(), name.into()),
            ("precision_digits".into(), cli.precision.to_string()),
            ("tol".into(), cli.tol.clone()),
            ("seed".into(), cli.seed.to_string()),
        ],
    };
    let (table, status) = match &cli.command {
        Command::Constants(a) => run_constants(&mut ctx, a)?,
        Command::Identities { max_m, trials } => run_identities(&mut ctx, *max_m, *trials, cli.seed)?,
        Command::TabulateIterlog { r, ell_min, ell_max, points } => run_tabulate(&mut ctx, *r, ell_min, ell_max, *points)?,
        Command::Integrate { params, eps, depth, j, cutoff } => run_integrate(&mut ctx, params, eps, *depth, *j, *cutoff)?,
        Command::CheckInequality { params, r, eps } => run_check(&mut ctx, params, *r, eps)?,
        Command::SharpnessA { params, eps } => run_sharpness_a(&mut ctx, params, eps)?,
        Command::SharpnessB { params, r, eps, inner, inner_eps, theta, theta_eps, no_theta } => {
            run_sharpness_b(&mut ctx, params, *r, eps, *inner, inner_eps, theta, theta_eps, *no_theta)?
        }
        Command::DSweep { params, d_grid, r, probe } => run_d_sweep(&mut ctx, params, d_grid, *r, probe)?,
        Command::Schema => unreachable!("handled above"),
    };
    output::write(&table, &ctx.provenance, cli.format, cli.out.as_deref())?;
    Ok(match status {
        Status::Hypothesis if cli.allow_star_violation => Status::Ok,
        s => s,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::Hypothesis) => {
            eprintln!("warning: hypothesis violated (k − γ − mp ≤ 0 or the (p, γ) condition fails); pass --allow-star-violation to accept");
            ExitCode::from(2)
        }
        Ok(Status::NoConvergence) => {
            eprintln!("error: quadrature did not converge to the requested tolerance");
            ExitCode::from(3)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Convergence(_) => 3,
                Error::NotIntegrable(_) => 2,
                _ => 1,
            })
        }
    }
}
