//! Command-line interface: compute digit-restricted harmonic sums with
//! certified digits, print rigorous bounds, sweep excluded sets, check the
//! asymptotic expansions, and run the cross-method verification suite.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use kempner::asymptotics::{
    expansion_top_excluded, expansion_zero_excluded, fit_decay_order, zero_excluded_bracket,
};
use kempner::ball::certified_decimal;
use kempner::engine::{
    kempner_bounds, kempner_series, kempner_via_u, tolerance_from_digits, KempnerResult, Method,
    SeriesOptions, DEFAULT_TERM_CAP,
};
use kempner::measure::{build_truncated_measure, oracle_k_loglike, DEFAULT_ATOM_BUDGET};
use kempner::verify::run_suite;
use kempner::{make_problem, Ball, Dyadic, Error, Precision, ProblemSpec};

#[derive(Parser)]
#[command(
    name = "kempner",
    version,
    about = "Certified computation of digit-restricted harmonic sums K(b,E)"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct SpecArgs {
    /// Integer base, at least 2
    #[arg(long)]
    base: u32,
    /// Excluded digits, comma separated or repeated
    #[arg(long, value_delimiter = ',', num_args = 1.., action = clap::ArgAction::Append)]
    exclude: Vec<u32>,
}

impl SpecArgs {
    fn spec(&self) -> Result<ProblemSpec, Error> {
        make_problem(self.base, &self.exclude)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Series,
    ViaU,
    Oracle,
    All,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Plain,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    Zero,
    Top,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute K(b,E) and print only certified digits
    Compute {
        #[command(flatten)]
        spec: SpecArgs,
        /// Target precision 10^-digits
        #[arg(long, default_value_t = 15)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = MethodArg::Series)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
        format: FormatArg,
        /// Maximum number of series terms (overrides KEMPNER_TERM_CAP)
        #[arg(long)]
        term_cap: Option<u64>,
        /// Proceed even when the series converges very slowly
        #[arg(long)]
        allow_slow: bool,
    },
    /// Per-digit digamma bounds and the rigorous aggregate enclosure
    Bounds {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 15)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
        format: FormatArg,
    },
    /// Sweep every excluded set of a given cardinality and mark the maximizer
    Table {
        #[arg(long)]
        base: u32,
        #[arg(long)]
        cardinality: u32,
        #[arg(long, default_value_t = 10)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
        format: FormatArg,
    },
    /// Expansion defects across bases and the fitted decay order
    Asymptotic {
        #[arg(long, value_enum, default_value_t = FamilyArg::Zero)]
        family: FamilyArg,
        #[arg(long, value_delimiter = ',', default_values_t = vec![50u32, 100, 200, 400])]
        bases: Vec<u32>,
        #[arg(long, default_value_t = 15)]
        digits: u32,
        #[arg(long, value_enum, default_value_t = FormatArg::Plain)]
        format: FormatArg,
    },
    /// Cross-method invariant suite for one problem instance
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        #[arg(long, default_value_t = 10)]
        digits: u32,
    },
}

fn env_u64(name: &str) -> Option<u64> {
    std::env::var(name).ok().and_then(|v| v.parse().ok())
}

fn effective_term_cap(flag: Option<u64>) -> u64 {
    flag.or_else(|| env_u64("KEMPNER_TERM_CAP")).unwrap_or(DEFAULT_TERM_CAP)
}

fn effective_atom_budget() -> u64 {
    env_u64("KEMPNER_ATOM_BUDGET").unwrap_or(DEFAULT_ATOM_BUDGET)
}

fn value_string(value: &Ball, digits: u32) -> String {
    certified_decimal(value, digits).unwrap_or_else(|| "<no certified digits>".to_string())
}

fn print_result(r: &KempnerResult, digits: u32, format: FormatArg) {
    match format {
        FormatArg::Plain => {
            println!("{} = {}", r.spec.label(), value_string(&r.value, digits));
            println!(
                "  radius <= {}   terms = {}   method = {}",
                kempner::ball::radius_decimal(r.value.rad()),
                r.terms_used,
                r.method.as_str()
            );
        }
        FormatArg::Json => println!("{}", r.to_json(digits)),
        FormatArg::Csv => {
            println!("b,E,value,radius,terms,method");
            println!("{}", csv_row(r, digits));
        }
    }
}

fn csv_row(r: &KempnerResult, digits: u32) -> String {
    let e: Vec<String> = r.spec.excluded().iter().map(|d| d.to_string()).collect();
    format!(
        "{},\"{}\",{},{},{},{}",
        r.spec.base(),
        e.join(","),
        value_string(&r.value, digits),
        kempner::ball::radius_decimal(r.value.rad()),
        r.terms_used,
        r.method.as_str()
    )
}

fn oracle_result(spec: &ProblemSpec, budget: u64) -> Result<KempnerResult, Error> {
    // depth limited by the atom budget; the bound is geometric in depth
    let n = spec.n_admissible() as u64;
    let mut depth = 0u32;
    if n > 1 {
        let mut atoms: u64 = 1;
        while atoms.saturating_mul(n) < budget / 2 {
            atoms = atoms.saturating_mul(n);
            depth += 1;
        }
    } else {
        depth = 24;
    }
    let tm = build_truncated_measure(spec, depth, budget)?;
    let (value, _) = oracle_k_loglike(&tm, 96);
    Ok(KempnerResult {
        spec: spec.clone(),
        value,
        terms_used: depth as u64,
        tail_bound: Dyadic::zero(),
        method: Method::Oracle,
    })
}

fn run_compute(
    spec: &ProblemSpec,
    digits: u32,
    method: MethodArg,
    format: FormatArg,
    opts: &SeriesOptions,
) -> Result<(), Error> {
    let tol = tolerance_from_digits(digits);
    let results: Vec<KempnerResult> = match method {
        MethodArg::Series => vec![kempner_series(spec, &tol, opts)?],
        MethodArg::ViaU => vec![kempner_via_u(spec, &tol, opts)?],
        MethodArg::Oracle => vec![oracle_result(spec, effective_atom_budget())?],
        MethodArg::All => vec![
            kempner_series(spec, &tol, opts)?,
            kempner_via_u(spec, &tol, opts)?,
            oracle_result(spec, effective_atom_budget())?,
        ],
    };
    if format == FormatArg::Csv {
        println!("b,E,value,radius,terms,method");
        for r in &results {
            println!("{}", csv_row(r, digits));
        }
    } else {
        for r in &results {
            print_result(r, digits, format);
        }
    }
    Ok(())
}

fn run_bounds(spec: &ProblemSpec, digits: u32, format: FormatArg) -> Result<(), Error> {
    let bounds = kempner_bounds(spec, &Precision::decimal(digits))?;
    match format {
        FormatArg::Plain => {
            println!("per-digit contribution bounds for {}:", spec.label());
            for d in &bounds.per_digit {
                println!("  a = {:>3}:  [{:.12e}, {:.12e})", d.a, d.lo.to_f64(), d.hi.to_f64());
            }
            println!(
                "aggregate: [{}, {})",
                value_string(&bounds.lo_total, digits),
                value_string(&bounds.hi_total, digits)
            );
        }
        FormatArg::Json => {
            let per: Vec<serde_json::Value> = bounds
                .per_digit
                .iter()
                .map(|d| {
                    serde_json::json!({
                        "a": d.a,
                        "lo": value_string(&d.lo, digits),
                        "hi": value_string(&d.hi, digits),
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::json!({
                    "b": spec.base(),
                    "E": spec.excluded(),
                    "per_digit": per,
                    "lo": value_string(&bounds.lo_total, digits),
                    "hi": value_string(&bounds.hi_total, digits),
                })
            );
        }
        FormatArg::Csv => {
            println!("a,lo,hi");
            for d in &bounds.per_digit {
                println!("{},{:e},{:e}", d.a, d.lo.to_f64(), d.hi.to_f64());
            }
        }
    }
    Ok(())
}

fn combinations(base: u32, cardinality: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(cardinality as usize);
    fn rec(start: u32, base: u32, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for d in start..=(base - left) {
            cur.push(d);
            rec(d + 1, base, left - 1, cur, out);
            cur.pop();
        }
    }
    rec(0, base, cardinality, &mut cur, &mut out);
    out
}

fn run_table(base: u32, cardinality: u32, digits: u32, format: FormatArg) -> Result<(), Error> {
    if cardinality == 0 || cardinality >= base {
        return Err(Error::DigitOutOfRange { digit: cardinality, base });
    }
    let tol = tolerance_from_digits(digits);
    // cap the series cheaply; the U-sum path converges geometrically at 1/2
    // or better, so it covers every excluded set the series handles poorly
    let opts = SeriesOptions { term_cap: 120, allow_slow: false };
    let u_opts = SeriesOptions::default();
    use rayon::prelude::*;
    let rows: Result<Vec<KempnerResult>, Error> = combinations(base, cardinality)
        .par_iter()
        .map(|e| {
            let spec = make_problem(base, e)?;
            match kempner_series(&spec, &tol, &opts) {
                Ok(r) => Ok(r),
                Err(Error::SlowConvergence { .. }) | Err(Error::TermCapExceeded { .. }) => {
                    kempner_via_u(&spec, &tol, &u_opts)
                }
                Err(e) => Err(e),
            }
        })
        .collect();
    let rows = rows?;
    let best = rows
        .iter()
        .enumerate()
        .max_by(|(_, a), (_, b)| a.value.mid().cmp_val(b.value.mid()))
        .map(|(i, _)| i)
        .unwrap();
    match format {
        FormatArg::Plain => {
            for (i, r) in rows.iter().enumerate() {
                let mark = if i == best { " *max*" } else { "" };
                println!("{} = {}{}", r.spec.label(), value_string(&r.value, digits), mark);
            }
        }
        FormatArg::Json => {
            let items: Vec<serde_json::Value> = rows
                .iter()
                .enumerate()
                .map(|(i, r)| {
                    let mut j = r.to_json(digits);
                    j["max"] = serde_json::json!(i == best);
                    j
                })
                .collect();
            println!("{}", serde_json::Value::Array(items));
        }
        FormatArg::Csv => {
            println!("b,E,value,radius,terms,method");
            for r in &rows {
                println!("{}", csv_row(r, digits));
            }
        }
    }
    Ok(())
}

fn run_asymptotic(
    family: FamilyArg,
    bases: &[u32],
    digits: u32,
    format: FormatArg,
) -> Result<(), Error> {
    let tol = tolerance_from_digits(digits);
    let prec = Precision::decimal(digits + 5);
    let opts = SeriesOptions::default();
    use rayon::prelude::*;
    let samples: Result<Vec<(u32, Ball)>, Error> = bases
        .par_iter()
        .map(|&b| {
            let (spec, exp) = match family {
                FamilyArg::Zero => {
                    (make_problem(b, &[0])?, expansion_zero_excluded(b, &prec)?)
                }
                FamilyArg::Top => {
                    (make_problem(b, &[b - 1])?, expansion_top_excluded(b, &prec)?)
                }
            };
            let k = kempner_series(&spec, &tol, &opts)?;
            Ok((b, k.value.sub(&exp.partial, prec.bits())))
        })
        .collect();
    let samples = samples?;
    if format == FormatArg::Csv {
        print!("{}", kempner::asymptotics::defects_csv(&samples));
    } else {
        for (b, defect) in &samples {
            println!(
                "b = {:>5}: defect {:+.6e} (radius {:.2e})",
                b,
                defect.to_f64(),
                defect.rad_f64()
            );
        }
    }
    match fit_decay_order(&samples) {
        Ok(slope) => println!("fitted decay order: {slope:.4} (claimed -3)"),
        Err(e) => println!("fitted decay order: {e}"),
    }
    if matches!(family, FamilyArg::Zero) && format == FormatArg::Plain {
        for &b in bases {
            let (lo, hi) = zero_excluded_bracket(b, &prec)?;
            println!(
                "b = {:>5}: alternating-series bracket [{:.10e}, {:.10e}]",
                b,
                lo.to_f64(),
                hi.to_f64()
            );
        }
    }
    Ok(())
}

fn run_verify(spec: &ProblemSpec, digits: u32) -> Result<bool, Error> {
    let report = run_suite(spec, digits, effective_atom_budget())?;
    for c in &report.checks {
        let tag = if c.passed { "PASS" } else { "FAIL" };
        println!("[{tag}] {} — {}", c.name, c.detail);
    }
    Ok(report.all_passed())
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.cmd {
        Cmd::Compute { spec, digits, method, format, term_cap, allow_slow } => {
            let opts =
                SeriesOptions { term_cap: effective_term_cap(term_cap), allow_slow };
            run_compute(&spec.spec()?, digits, method, format, &opts)?;
            Ok(true)
        }
        Cmd::Bounds { spec, digits, format } => {
            run_bounds(&spec.spec()?, digits, format)?;
            Ok(true)
        }
        Cmd::Table { base, cardinality, digits, format } => {
            run_table(base, cardinality, digits, format)?;
            Ok(true)
        }
        Cmd::Asymptotic { family, bases, digits, format } => {
            run_asymptotic(family, &bases, digits, format)?;
            Ok(true)
        }
        Cmd::Verify { spec, digits } => run_verify(&spec.spec()?, digits),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
