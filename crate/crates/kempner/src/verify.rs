//! Cross-method invariant suite for one problem instance: every independent
//! computation path must agree with every other within its stated error
//! bounds.  This is what the CLI `verify` subcommand runs.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive};

use crate::ball::{Ball, Precision};
use crate::engine::{
    kempner_bounds, kempner_series, kempner_via_u, stieltjes_u, SeriesOptions,
};
use crate::error::Error;
use crate::measure::{
    build_truncated_measure, oracle_k_loglike, oracle_moment, oracle_theorem_main,
};
use crate::moments::{moment_table, moment_table_alt};
use crate::problem::ProblemSpec;
use crate::specfun;

#[derive(Clone, Debug)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

pub struct VerifyReport {
    pub spec: ProblemSpec,
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn push(checks: &mut Vec<CheckOutcome>, name: &'static str, passed: bool, detail: String) {
    checks.push(CheckOutcome { name, passed, detail });
}

/// Pick a truncation depth so the geometric oracle tail stays below `target`,
/// without enumerating more than `atom_cap` strings.
fn oracle_depth(spec: &ProblemSpec, target: f64, atom_cap: u64) -> u32 {
    let n = spec.n_admissible() as f64;
    let b = spec.base() as f64;
    if spec.n_admissible() == 0 {
        return 1;
    }
    let ratio = n / b;
    let mut depth = 1u32;
    let mut tail = ratio * ratio / (1.0 - ratio);
    let mut atoms = n;
    while tail > target && atoms * n < atom_cap as f64 / 2.0 {
        depth += 1;
        tail *= ratio;
        atoms *= n;
    }
    depth
}

/// Run the full cross-method suite at roughly `digits` certified digits.
pub fn run_suite(spec: &ProblemSpec, digits: u32, budget: u64) -> Result<VerifyReport, Error> {
    let tol = crate::engine::tolerance_from_digits(digits);
    let opts = SeriesOptions::default();
    let prec = Precision::decimal(digits + 5);
    let bits = prec.bits();
    let mut checks = Vec::new();

    let series = kempner_series(spec, &tol, &opts)?;
    let via_u = kempner_via_u(spec, &tol, &opts)?;
    push(
        &mut checks,
        "series/via-U agreement",
        series.value.overlaps(&via_u.value),
        format!("series {:.6e}, via_U {:.6e}", series.value.to_f64(), via_u.value.to_f64()),
    );

    // the oracles target a few confirmed digits, not production precision
    let oracle_bits = 64;
    let depth = oracle_depth(spec, 1e-4, budget.min(300_000));
    let tm = build_truncated_measure(spec, depth, budget)?;
    let (loglike, loglike_bound) = oracle_k_loglike(&tm, oracle_bits);
    push(
        &mut checks,
        "series/log-like oracle agreement",
        loglike.overlaps(&series.value),
        format!(
            "oracle {:.6e} +- {:.2e} at depth {depth}",
            loglike.to_f64(),
            loglike_bound.to_f64().unwrap_or(f64::NAN)
        ),
    );

    // the digamma integrand is costly per atom; a much shallower truncation
    // still confirms a few digits
    let main_depth = oracle_depth(spec, 1e-3, budget.min(60_000));
    let tm_main = build_truncated_measure(spec, main_depth, budget)?;
    let main = oracle_theorem_main(&tm_main, oracle_bits)?;
    push(
        &mut checks,
        "series/digamma-integral oracle agreement",
        main.overlaps(&series.value),
        format!("oracle {:.6e} +- {:.2e}", main.to_f64(), main.rad_f64()),
    );

    let bounds = kempner_bounds(spec, &prec)?;
    let inside = if spec.is_degenerate() {
        // lower bound is attained: K = 0 = lo_total
        bounds.lo_total.contains_zero() && bounds.hi_total.upper().is_positive()
    } else {
        series.value.mid().cmp_val(&bounds.lo_total.lower()) == std::cmp::Ordering::Greater
            && series.value.mid().cmp_val(&bounds.hi_total.upper()) == std::cmp::Ordering::Less
    };
    push(
        &mut checks,
        "per-digit bounds contain the value",
        inside,
        format!("[{:.6e}, {:.6e})", bounds.lo_total.to_f64(), bounds.hi_total.to_f64()),
    );

    // ceiling: K < (b/p) log b except for E = {0}, where K > b log b
    let mass = BigRational::new(BigInt::from(spec.base()), BigInt::from(spec.p_excluded()));
    let ceiling = specfun::hp_log_bits(&BigRational::from_integer(BigInt::from(spec.base())), bits)?
        .mul_rational(&mass, bits);
    let ceiling_ok = if spec.excluded() == [0] {
        series.value.mid().cmp_val(&ceiling.upper()) == std::cmp::Ordering::Greater
    } else {
        series.value.mid().cmp_val(&ceiling.lower()) == std::cmp::Ordering::Less
    };
    push(
        &mut checks,
        "ceiling property vs (b/p) log b",
        ceiling_ok,
        format!("K {:.6e}, ceiling {:.6e}", series.value.to_f64(), ceiling.to_f64()),
    );

    // both moment recurrences, every relevant shift
    let order = 30;
    let mut shifts: Vec<u32> = spec.shifts().to_vec();
    for extra in [0u32, 1] {
        if !shifts.contains(&extra) {
            shifts.push(extra);
        }
    }
    let mut recurrence_ok = true;
    for &d in &shifts {
        if moment_table(spec, d, order).values != moment_table_alt(spec, d, order).values {
            recurrence_ok = false;
        }
    }
    push(
        &mut checks,
        "cross-recurrence moment equality",
        recurrence_ok,
        format!("shifts {:?}, order {order}", shifts),
    );

    let mut oracle_ok = true;
    for &d in &shifts {
        let exact = moment_table(spec, d, 6);
        for m in 0..=6u32 {
            let (v, bound) = oracle_moment(&tm_main, d, m);
            if (&v - &exact.values[m as usize]).abs() > bound {
                oracle_ok = false;
            }
        }
    }
    push(
        &mut checks,
        "measure oracle brackets exact moments",
        oracle_ok,
        format!("depth {main_depth}, orders 0..6"),
    );

    if !spec.is_degenerate() {
        let mut u_ok = true;
        let u_tol = &tol * BigRational::new(BigInt::one(), BigInt::from(spec.base()));
        for n in 1..=5u64 {
            let lhs = stieltjes_u(spec, n, &u_tol, &opts)?;
            let mut rhs = Ball::from_rational(
                &BigRational::new(BigInt::one(), BigInt::from(n)),
                bits,
            );
            for &a in spec.admissible() {
                let u = stieltjes_u(spec, n * spec.base() as u64 + a as u64, &u_tol, &opts)?;
                rhs = rhs.add(&u, bits);
            }
            if !lhs.overlaps(&rhs) {
                u_ok = false;
            }
        }
        push(&mut checks, "U-recursion identity", u_ok, "n = 1..5".to_string());
    }

    Ok(VerifyReport { spec: spec.clone(), checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::DEFAULT_ATOM_BUDGET;
    use crate::problem::make_problem;

    #[test]
    fn suite_passes_on_classic_cases() {
        for (b, e) in [(10u32, vec![9u32]), (10, vec![0, 9]), (3, vec![1])] {
            let spec = make_problem(b, &e).unwrap();
            let report = run_suite(&spec, 10, DEFAULT_ATOM_BUDGET).unwrap();
            for c in &report.checks {
                assert!(c.passed, "{}: {} failed ({})", spec.label(), c.name, c.detail);
            }
        }
    }

    #[test]
    fn suite_passes_on_degenerate_case() {
        let spec = make_problem(2, &[1]).unwrap();
        let report = run_suite(&spec, 10, DEFAULT_ATOM_BUDGET).unwrap();
        assert!(report.all_passed());
        // the degenerate spec skips the U-recursion block
        assert!(report.checks.iter().all(|c| c.name != "U-recursion identity"));
    }
}
