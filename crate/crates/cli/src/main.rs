use std::process::ExitCode;
use std::time::Instant;

use bdeform::coeff::parse_rational;
use bdeform::constraints::{
    build_d, build_dtilde, build_l, verify_a3_closed_form, verify_m13_closed_form, verify_simplified, verify_theorem,
    Family, Model, Prop, Report, TGradedOp,
};
use bdeform::currents::{build_a, build_m, current, Charge};
use bdeform::jack::{jack_with_bound, oracle_check, OracleReport, Partition, DEFAULT_BOUND};
use bdeform::tau::{check_constraints, check_rooted_fixed_point, tau_evolve, SeriesReport};
use bdeform::{Error, WeylOp};
use clap::{Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde_json::{json, Value};

const SCHEMA: &str = "bdeform/1";

#[derive(Parser)]
#[command(name = "bdeform", version, about = "Exact checks of b-deformed constraint algebras")]
struct Cli {
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the commutation relations of the constraints or of a proposition family.
    Verify(VerifyArgs),
    /// Integrate the tau series and optionally check it.
    Tau(TauArgs),
    /// Print one operator.
    Dump(DumpArgs),
    /// Print a Jack symmetric function.
    Jack(JackArgs),
    /// Compare the Jack expansion of the tau series with the evolved series.
    Oracle(OracleArgs),
}

#[derive(clap::Args)]
struct VerifyArgs {
    #[arg(long, value_parser = parse_model, default_value = "bip")]
    model: Model,
    #[arg(long)]
    imax: u32,
    #[arg(long, default_value_t = 10)]
    deg: u32,
    /// Check a proposition relation instead of the model's commutator.
    #[arg(long, value_parser = parse_prop)]
    prop: Option<Prop>,
    /// Family for --prop and --closed-form.
    #[arg(long, value_parser = parse_family, default_value = "a")]
    family: Family,
    /// Check the closed form of [X_i(3), X_j(3)] for the family.
    #[arg(long, conflicts_with = "prop")]
    closed_form: bool,
    /// Evaluate b at this rational before comparing.
    #[arg(long, value_parser = parse_b)]
    b_eval: Option<BigRational>,
}

#[derive(clap::Args)]
struct TauArgs {
    #[arg(long, value_parser = parse_model)]
    model: Model,
    #[arg(long)]
    order: u32,
    /// Check L_i τ = 0 for i up to this bound.
    #[arg(long, value_name = "IMAX")]
    check_constraints: Option<u32>,
    /// Check the rooted fixed point for i up to this bound.
    #[arg(long, value_name = "IMAX")]
    fixed_point: Option<u32>,
    /// Compare with the Jack expansion.
    #[arg(long)]
    oracle: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum OpKind {
    J,
    A,
    M,
    L,
    D,
    Dtilde,
}

#[derive(Clone, Copy, ValueEnum)]
enum ChargeKind {
    Zero,
    U,
}

#[derive(clap::Args)]
struct DumpArgs {
    #[arg(long, value_enum, ignore_case = true)]
    op: OpKind,
    #[arg(long, allow_hyphen_values = true)]
    i: i64,
    #[arg(long, allow_hyphen_values = true)]
    j: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    l: Option<i64>,
    #[arg(long)]
    s: Option<u32>,
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, value_parser = parse_model)]
    model: Option<Model>,
    #[arg(long, default_value_t = 6)]
    deg: u32,
    /// Zero mode of J.
    #[arg(long, value_enum, default_value = "zero")]
    charge: ChargeKind,
}

#[derive(clap::Args)]
struct JackArgs {
    #[arg(long, value_parser = parse_partition)]
    lambda: Partition,
    /// List every power-sum coefficient on its own line.
    #[arg(long)]
    dump: bool,
    #[arg(long, default_value_t = DEFAULT_BOUND)]
    bound: u32,
}

#[derive(clap::Args)]
struct OracleArgs {
    #[arg(long, value_parser = parse_model)]
    model: Model,
    #[arg(long)]
    order: u32,
}

fn parse_model(s: &str) -> Result<Model, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_prop(s: &str) -> Result<Prop, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_b(s: &str) -> Result<BigRational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn parse_partition(s: &str) -> Result<Partition, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Outcome of a command: the document to print and whether all checks passed.
struct Outcome {
    text: String,
    json: Value,
    passed: bool,
}

/// A request the engine cannot serve; reported with exit code 2.
struct Failure(String);

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure(e.to_string())
    }
}

fn report_text(report: &Report) -> String {
    let mut out = String::new();
    for item in &report.items {
        out.push_str(&format!("{item}\n"));
    }
    let failed = report.failures().count();
    out.push_str(&format!(
        "{}: {} ({} of {} instances passed)\n",
        report.check,
        if report.passed() { "PASS" } else { "FAIL" },
        report.items.len() - failed,
        report.items.len()
    ));
    out
}

fn series_text(report: &SeriesReport) -> String {
    let mut out = String::new();
    for f in &report.failures {
        out.push_str(&format!("{f}\n"));
    }
    out.push_str(&format!(
        "{} (i <= {}, through t^{}): {}\n",
        report.check,
        report.imax,
        report.order,
        if report.passed() { "PASS" } else { "FAIL" }
    ));
    out
}

fn oracle_text(report: &OracleReport) -> String {
    let mut out = String::new();
    for (convention, detail) in &report.mismatches {
        out.push_str(&format!("{} content: {detail}\n", convention.name()));
    }
    match report.convention {
        Some(c) => out.push_str(&format!(
            "jack oracle for {} through t^{}: PASS ({} content)\n",
            report.model, report.order, c.name()
        )),
        None => out.push_str(&format!("jack oracle for {} through t^{}: FAIL\n", report.model, report.order)),
    }
    out
}

fn verify(args: &VerifyArgs) -> Result<Outcome, Failure> {
    if args.imax == 0 {
        return Err(Failure("--imax must be at least 1".into()));
    }
    let report = match (args.prop, args.closed_form) {
        (Some(prop), _) => verify_simplified(args.family, prop, args.imax, args.deg)?,
        (None, true) => match args.family {
            Family::A => verify_a3_closed_form(args.imax, args.deg)?,
            Family::M1 => verify_m13_closed_form(args.imax, args.deg)?,
        },
        (None, false) => verify_theorem(&args.model, args.imax, args.deg, args.b_eval.as_ref())?,
    };
    let mut json = report.to_json();
    json["schema"] = json!(SCHEMA);
    json["command"] = json!("verify");
    Ok(Outcome { text: report_text(&report), passed: report.passed(), json })
}

fn tau(args: &TauArgs) -> Result<Outcome, Failure> {
    let series = tau_evolve(&args.model, args.order)?;
    let mut text = series.to_string();
    let mut passed = true;
    let mut checks = serde_json::Map::new();
    if let Some(imax) = args.check_constraints {
        let r = check_constraints(&series, imax)?;
        text.push_str(&series_text(&r));
        passed &= r.passed();
        checks.insert("constraints".into(), r.to_json());
    }
    if let Some(imax) = args.fixed_point {
        let r = check_rooted_fixed_point(&series, imax)?;
        text.push_str(&series_text(&r));
        passed &= r.passed();
        checks.insert("fixed_point".into(), r.to_json());
    }
    if args.oracle {
        let r = oracle_check(&args.model, args.order)?;
        text.push_str(&oracle_text(&r));
        passed &= r.passed();
        checks.insert("oracle".into(), r.to_json());
    }
    let json = json!({
        "schema": SCHEMA,
        "command": "tau",
        "params": {"model": args.model.name(), "order": args.order},
        "series": series.to_json(),
        "checks": checks,
        "passed": passed,
    });
    Ok(Outcome { text, json, passed })
}

fn need<T>(v: Option<T>, flag: &str, op: &str) -> Result<T, Failure> {
    v.ok_or_else(|| Failure(format!("--{flag} is required for --op {op}")))
}

fn graded_text(op: &TGradedOp) -> String {
    let mut out = String::new();
    for (n, piece) in op.pieces() {
        out.push_str(&format!("t^{n}: {piece}\n"));
    }
    if out.is_empty() {
        out.push_str("0\n");
    }
    out
}

fn dump(args: &DumpArgs) -> Result<Outcome, Failure> {
    let (name, params, op): (&str, Value, Result<WeylOp, TGradedOp>) = match args.op {
        OpKind::J => {
            let charge = match args.charge {
                ChargeKind::Zero => Charge::zero(),
                ChargeKind::U => Charge::u(),
            };
            ("J", json!({"i": args.i}), Ok(current(args.i, &charge, args.deg)))
        }
        OpKind::A => {
            let s = need(args.s, "s", "A")?;
            if args.i < 1 {
                return Err(Failure("A_i needs i >= 1".into()));
            }
            ("A", json!({"i": args.i, "s": s}), Ok(build_a(args.i as u32, s, args.deg)))
        }
        OpKind::M => {
            let m = need(args.m, "m", "M")?;
            let k = match (args.k, &args.model) {
                (Some(k), _) => k,
                (None, Some(model)) => model.k(),
                (None, None) => return Err(Failure("--k or --model is required for --op M".into())),
            };
            if args.i < 1 || m < 1 {
                return Err(Failure("M^(k,m)_i needs i >= 1 and m >= 1".into()));
            }
            ("M", json!({"i": args.i, "k": k, "m": m}), Ok(build_m(k, m, args.i as u32, args.deg)?))
        }
        OpKind::L => {
            let model = need(args.model.clone(), "model", "L")?;
            if args.i < 1 {
                return Err(Failure("L_i needs i >= 1".into()));
            }
            ("L", json!({"i": args.i, "model": model.name()}), Err(build_l(&model, args.i, args.deg)?))
        }
        OpKind::D => {
            let s = need(args.s, "s", "D")?;
            let (j, l) = (need(args.j, "j", "D")?, need(args.l, "l", "D")?);
            let x = build_d(s, args.i, j, l)?;
            ("D", json!({"i": args.i, "j": j, "l": l, "s": s}), Ok(x.to_weyl(args.deg)))
        }
        OpKind::Dtilde => {
            let m = need(args.m, "m", "Dtilde")?;
            let (j, l) = (need(args.j, "j", "Dtilde")?, need(args.l, "l", "Dtilde")?);
            let x = build_dtilde(m, args.i, j, l)?;
            ("Dtilde", json!({"i": args.i, "j": j, "l": l, "m": m}), Ok(x.to_weyl(args.deg)))
        }
    };
    let (text, body) = match &op {
        Ok(w) => (format!("{w}\n"), w.to_json()),
        Err(t) => (graded_text(t), t.to_json()),
    };
    let json = json!({
        "schema": SCHEMA,
        "command": "dump",
        "op": name,
        "params": params,
        "deg": args.deg,
        "operator": body,
    });
    Ok(Outcome { text, json, passed: true })
}

fn jack_cmd(args: &JackArgs) -> Result<Outcome, Failure> {
    let j = jack_with_bound(&args.lambda, args.bound)?;
    let norm = j.inner(&j);
    let mut text = String::new();
    if args.dump {
        for (mu, c) in j.expansion.iter().rev() {
            text.push_str(&format!("p{mu}: {c}\n"));
        }
    } else {
        text.push_str(&format!("J{} = {j}\n", args.lambda));
    }
    text.push_str(&format!("<J,J> = {norm}\n"));
    let mut body = j.to_json();
    body["norm_alpha_coeffs"] = json!(norm.coeffs().iter().map(|c| c.to_string()).collect::<Vec<_>>());
    let json = json!({"schema": SCHEMA, "command": "jack", "jack": body});
    Ok(Outcome { text, json, passed: true })
}

fn oracle(args: &OracleArgs) -> Result<Outcome, Failure> {
    let report = oracle_check(&args.model, args.order)?;
    let mut json = report.to_json();
    json["schema"] = json!(SCHEMA);
    json["command"] = json!("oracle");
    Ok(Outcome { text: oracle_text(&report), passed: report.passed(), json })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = match &cli.command {
        Command::Verify(a) => verify(a),
        Command::Tau(a) => tau(a),
        Command::Dump(a) => dump(a),
        Command::Jack(a) => jack_cmd(a),
        Command::Oracle(a) => oracle(a),
    };
    eprintln!("elapsed: {:.3}s", start.elapsed().as_secs_f64());
    match result {
        Ok(outcome) => {
            if cli.json {
                println!("{}", serde_json::to_string_pretty(&outcome.json).expect("serializable"));
            } else {
                print!("{}", outcome.text);
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
