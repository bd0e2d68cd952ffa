//! Production computation of K(b,E): the zeta series with a rigorous
//! truncation bound, per-digit digamma bounds, and the Stieltjes-transform
//! path summing U(a) over positive admissible digits.

use num::bigint::BigInt;
use num::{BigRational, One, Signed, ToPrimitive, Zero};

use crate::ball::{certified_decimal, radius_decimal, Ball, Dyadic, Precision};
use crate::error::Error;
use crate::moments::{raw_moment_table, RawMomentTable};
use crate::problem::ProblemSpec;
use crate::specfun;

pub const DEFAULT_TERM_CAP: u64 = 20_000;

/// Above this ratio max(F)/b the series is declared poorly convergent and the
/// caller must opt in explicitly.
const SLOW_RATIO: f64 = 1.0 - 1.0 / 64.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Series,
    ViaU,
    Oracle,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::ViaU => "via_U",
            Method::Oracle => "oracle",
        }
    }
}

#[derive(Clone, Debug)]
pub struct KempnerResult {
    pub spec: ProblemSpec,
    pub value: Ball,
    pub terms_used: u64,
    /// Truncation-tail part of the radius, kept separately for reporting.
    pub tail_bound: Dyadic,
    pub method: Method,
}

impl KempnerResult {
    /// {"b":…, "E":[…], "value":"…", "radius":"…", "terms":…, "method":"…"};
    /// the value string carries exactly the certified digits.
    pub fn to_json(&self, max_digits: u32) -> serde_json::Value {
        serde_json::json!({
            "b": self.spec.base(),
            "E": self.spec.excluded(),
            "value": certified_decimal(&self.value, max_digits)
                .unwrap_or_else(|| "?".to_string()),
            "radius": radius_decimal(self.value.rad()),
            "terms": self.terms_used,
            "method": self.method.as_str(),
        })
    }
}

#[derive(Clone, Copy, Debug)]
pub struct SeriesOptions {
    pub term_cap: u64,
    pub allow_slow: bool,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { term_cap: DEFAULT_TERM_CAP, allow_slow: false }
    }
}

/// 10^-digits as an exact rational.
pub fn tolerance_from_digits(digits: u32) -> BigRational {
    BigRational::new(BigInt::one(), BigInt::from(10u32).pow(digits))
}

fn check_tolerance(tol: &BigRational) -> Result<(), Error> {
    if tol.is_positive() {
        Ok(())
    } else {
        Err(Error::BadTolerance)
    }
}

/// ceil(log2(1/tol)), clamped to at least 1.
fn tol_bits(tol: &BigRational) -> u32 {
    let d = tol.denom().bits() as i64 - tol.numer().bits() as i64 + 2;
    d.clamp(1, u32::MAX as i64) as u32
}

fn dyadic_upper(r: &BigRational) -> Dyadic {
    let (d, e) = Dyadic::from_rational_nearest(r, 32);
    d.add(&e).round_up_coarse()
}

fn zero_result(spec: &ProblemSpec, method: Method) -> KempnerResult {
    KempnerResult {
        spec: spec.clone(),
        value: Ball::zero(),
        terms_used: 0,
        tail_bound: Dyadic::zero(),
        method,
    }
}

// ---------------------------------------------------------------------------
// Zeta series
// ---------------------------------------------------------------------------

/// Exact upper bound on the series tail past term M, using zeta(2) <= 329/200
/// and |v_m(d)| <= (b/p) d^m for d >= 1, |v_m(0)| <= b/p:
/// sum_{m>M} <= zeta(2) (b/p) [ sum_{d in F, d>=1} (d/b)^{M+1}/(b-d)
///                              + [0 in F] b^{-M-1}/(b-1) ].
fn series_tail(spec: &ProblemSpec, m: u64) -> BigRational {
    let b = BigInt::from(spec.base());
    let bpow = b.pow(m as u32 + 1);
    let mut s = BigRational::zero();
    for &d in spec.shifts() {
        if d == 0 {
            s += BigRational::new(BigInt::one(), &bpow * (&b - BigInt::one()));
        } else {
            s += BigRational::new(
                BigInt::from(d).pow(m as u32 + 1),
                &bpow * (&b - BigInt::from(d)),
            );
        }
    }
    let z2_cap = BigRational::new(BigInt::from(329), BigInt::from(200));
    let mass = BigRational::new(b, BigInt::from(spec.p_excluded()));
    z2_cap * mass * s
}

/// Smallest M with series_tail(M) <= half, estimated in log space and then
/// verified exactly.
fn series_terms_needed(spec: &ProblemSpec, half: &BigRational) -> u64 {
    let b = spec.base() as f64;
    let mass = b / spec.p_excluded() as f64;
    let log_half = half.numer().to_f64().map_or(f64::MIN, |n| n.ln())
        - half.denom().bits() as f64 * std::f64::consts::LN_2;
    let tail_log = |m: f64| -> f64 {
        let mut acc = f64::NEG_INFINITY;
        for &d in spec.shifts() {
            let (lead, ratio) = if d == 0 {
                (1.0 / (b - 1.0), 1.0 / b)
            } else {
                (1.0 / (b - d as f64), d as f64 / b)
            };
            let t = (1.645 * mass * lead).ln() + (m + 1.0) * ratio.ln();
            acc = if acc == f64::NEG_INFINITY { t } else { acc.max(t) + (1.0 + (acc.min(t) - acc.max(t)).exp()).ln() };
        }
        acc
    };
    let mut lo = 1u64;
    let mut hi = 1u64;
    while tail_log(hi as f64) > log_half && hi < (1 << 40) {
        lo = hi;
        hi *= 2;
    }
    while lo + 1 < hi {
        let mid = (lo + hi) / 2;
        if tail_log(mid as f64) > log_half {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut m = hi;
    while &series_tail(spec, m) > half {
        m += (m / 16).max(1);
    }
    m
}

/// K(b,E) through Theorem-style zeta series assembly:
/// (b/p) log b - sum_{m=1}^{M} zeta(m+1) (sum_{d in F} v_m(d)) / b^{m+1},
/// with exact rational moments and an explicit tail bound in the radius.
pub fn kempner_series(
    spec: &ProblemSpec,
    tol: &BigRational,
    opts: &SeriesOptions,
) -> Result<KempnerResult, Error> {
    check_tolerance(tol)?;
    if spec.is_degenerate() {
        return Ok(zero_result(spec, Method::Series));
    }
    let half = tol / BigRational::from_integer(BigInt::from(2));
    let m_max = series_terms_needed(spec, &half);
    let ratio = *spec.shifts().last().unwrap() as f64 / spec.base() as f64;
    if m_max > opts.term_cap {
        return Err(Error::TermCapExceeded { cap: opts.term_cap, ratio });
    }
    if ratio > SLOW_RATIO && !opts.allow_slow {
        return Err(Error::SlowConvergence { estimated_terms: m_max, ratio });
    }

    let tail = series_tail(spec, m_max);
    let tail_dy = dyadic_upper(&tail);
    let base_bits = tol_bits(tol) + 32 + 64 - (m_max + 2).leading_zeros();
    let b = BigInt::from(spec.base());
    let mass = BigRational::new(b.clone(), BigInt::from(spec.p_excluded()));

    let tables: Vec<RawMomentTable> = spec
        .shifts()
        .iter()
        .map(|&d| raw_moment_table(spec, d, m_max as usize))
        .collect();

    let mut attempt = 0u32;
    loop {
        let bits = base_bits + 64 * attempt;
        let mut value = specfun::hp_log_bits(&BigRational::from_integer(b.clone()), bits)?
            .mul_rational(&mass, bits);
        let mut bpow = b.clone(); // b^{m+1}
        for m in 1..=m_max as usize {
            bpow *= &b;
            let mut num = BigInt::zero();
            for t in &tables {
                num += &t.numerators[m];
            }
            if num.is_zero() {
                continue;
            }
            let coeff = BigRational::new(num, &tables[0].denominators[m] * &bpow);
            let term = specfun::hp_zeta_bits(m as u32 + 1, bits)?.mul_rational(&coeff, bits);
            value = value.sub(&term, bits);
        }
        value = value.add_rad(&tail_dy);
        if &value.rad().to_rational() <= tol || attempt >= 1 {
            return Ok(KempnerResult {
                spec: spec.clone(),
                value,
                terms_used: m_max,
                tail_bound: tail_dy,
                method: Method::Series,
            });
        }
        attempt += 1;
    }
}

// ---------------------------------------------------------------------------
// Per-digit digamma bounds
// ---------------------------------------------------------------------------

/// Bounds on the contribution of one digit a in E1: since psi is increasing
/// and the measure has mass b/p on [0,1),
/// (psi(a/b) - psi(1))/p <= s(a) <= (psi((a+1)/b) - psi(1))/p.
#[derive(Clone, Debug)]
pub struct DigitBound {
    pub a: u32,
    pub lo: Ball,
    pub hi: Ball,
}

#[derive(Clone, Debug)]
pub struct BoundsResult {
    pub spec: ProblemSpec,
    pub per_digit: Vec<DigitBound>,
    pub lo_total: Ball,
    pub hi_total: Ball,
}

pub fn kempner_bounds(spec: &ProblemSpec, prec: &Precision) -> Result<BoundsResult, Error> {
    let bits = prec.bits();
    let b = spec.base();
    let p = BigRational::new(BigInt::one(), BigInt::from(spec.p_excluded()));
    let psi1 = specfun::hp_psi_one(prec);
    let mut per_digit = Vec::with_capacity(spec.e1().len());
    let mut lo_sum = Ball::zero();
    let mut hi_sum = Ball::zero();
    for &a in spec.e1() {
        let lo = specfun::hp_digamma(&BigRational::new(BigInt::from(a), BigInt::from(b)), prec)?
            .sub(&psi1, bits)
            .mul_rational(&p, bits);
        let hi = specfun::hp_digamma(
            &BigRational::new(BigInt::from(a + 1), BigInt::from(b)),
            prec,
        )?
        .sub(&psi1, bits)
        .mul_rational(&p, bits);
        lo_sum = lo_sum.add(&lo, bits);
        hi_sum = hi_sum.add(&hi, bits);
        per_digit.push(DigitBound { a, lo, hi });
    }
    let mass = BigRational::new(BigInt::from(b), BigInt::from(spec.p_excluded()));
    let base = specfun::hp_log_bits(&BigRational::from_integer(BigInt::from(b)), bits)?
        .mul_rational(&mass, bits);
    Ok(BoundsResult {
        spec: spec.clone(),
        per_digit,
        lo_total: base.add(&lo_sum, bits),
        hi_total: base.add(&hi_sum, bits),
    })
}

// ---------------------------------------------------------------------------
// Stieltjes transform path
// ---------------------------------------------------------------------------

/// Smallest M with (b/p)/((n+1)^{M+1} n) <= half.
fn u_terms_needed(
    spec: &ProblemSpec,
    n: u64,
    half: &BigRational,
    cap: u64,
) -> Result<u64, Error> {
    let mass = BigRational::new(BigInt::from(spec.base()), BigInt::from(spec.p_excluded()));
    let np1 = BigInt::from(n + 1);
    let mut pow = np1.clone(); // (n+1)^{M+1}
    let mut m = 0u64;
    loop {
        let tail = &mass / BigRational::from_integer(&pow * BigInt::from(n));
        if &tail <= half {
            return Ok(m);
        }
        m += 1;
        pow *= &np1;
        if m > cap {
            return Err(Error::TermCapExceeded { cap, ratio: 1.0 / (n + 1) as f64 });
        }
    }
}

fn u_tail(spec: &ProblemSpec, n: u64, m: u64) -> BigRational {
    let mass = BigRational::new(BigInt::from(spec.base()), BigInt::from(spec.p_excluded()));
    mass / BigRational::from_integer(BigInt::from(n + 1).pow(m as u32 + 1) * BigInt::from(n))
}

/// sum_{m<=M} v_m(1)/(n+1)^{m+1} as an exact rational, plus the tail bound.
fn stieltjes_u_from_table(
    table: &RawMomentTable,
    spec: &ProblemSpec,
    n: u64,
    m_max: u64,
    bits: u32,
) -> Ball {
    let np1 = BigInt::from(n + 1);
    let mut pow = np1.clone();
    let mut sum = BigRational::zero();
    for m in 0..=m_max as usize {
        sum += BigRational::new(table.numerators[m].clone(), &table.denominators[m] * &pow);
        pow *= &np1;
    }
    Ball::from_rational(&sum, bits).add_rad(&dyadic_upper(&u_tail(spec, n, m_max)))
}

/// U(n) = integral of dmu(x)/(n+x), expanded about x = 1 with geometric ratio
/// 1/(n+1); K(b,E) is the sum of U(a) over positive admissible digits.
pub fn stieltjes_u(
    spec: &ProblemSpec,
    n: u64,
    tol: &BigRational,
    opts: &SeriesOptions,
) -> Result<Ball, Error> {
    check_tolerance(tol)?;
    if n == 0 {
        return Err(Error::NonPositiveArgument);
    }
    let half = tol / BigRational::from_integer(BigInt::from(2));
    let m_max = u_terms_needed(spec, n, &half, opts.term_cap)?;
    let bits = tol_bits(tol) + 32 + 64 - (m_max + 2).leading_zeros();
    let table = raw_moment_table(spec, 1, m_max as usize);
    Ok(stieltjes_u_from_table(&table, spec, n, m_max, bits))
}

pub fn kempner_via_u(
    spec: &ProblemSpec,
    tol: &BigRational,
    opts: &SeriesOptions,
) -> Result<KempnerResult, Error> {
    check_tolerance(tol)?;
    if spec.is_degenerate() {
        return Ok(zero_result(spec, Method::ViaU));
    }
    let positives: Vec<u64> =
        spec.admissible().iter().filter(|&&a| a > 0).map(|&a| a as u64).collect();
    let per = tol / BigRational::from_integer(BigInt::from(2 * positives.len() as u64));
    let mut m_max = 0u64;
    let mut per_a = Vec::with_capacity(positives.len());
    for &a in &positives {
        let m = u_terms_needed(spec, a, &per, opts.term_cap)?;
        m_max = m_max.max(m);
        per_a.push(m);
    }
    let bits =
        tol_bits(tol) + 32 + 64 - (m_max + 2).leading_zeros() + positives.len().ilog2();
    let table = raw_moment_table(spec, 1, m_max as usize);
    let mut value = Ball::zero();
    let mut tail = BigRational::zero();
    for (&a, &m) in positives.iter().zip(&per_a) {
        value = value.add(&stieltjes_u_from_table(&table, spec, a, m, bits), bits);
        tail += u_tail(spec, a, m);
    }
    Ok(KempnerResult {
        spec: spec.clone(),
        value,
        terms_used: m_max,
        tail_bound: dyadic_upper(&tail),
        method: Method::ViaU,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::make_problem;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn assert_close(result: &KempnerResult, decimal: &str, tol: &BigRational) {
        let neg = decimal.starts_with('-');
        let s = decimal.trim_start_matches('-');
        let (ip, fp) = s.split_once('.').unwrap_or((s, ""));
        let num: BigInt = format!("{ip}{fp}").parse().unwrap();
        let den = BigInt::from(10u32).pow(fp.len() as u32);
        let mut r = BigRational::new(num, den);
        if neg {
            r = -r;
        }
        let d = (result.value.mid().to_rational() - &r).abs();
        assert!(
            d <= tol + result.value.rad().to_rational(),
            "{}: got {} (off by {:.3e})",
            result.spec.label(),
            result.value.to_f64(),
            d.to_f64().unwrap()
        );
    }

    #[test]
    fn classic_two_digit_exclusion() {
        let spec = make_problem(10, &[0, 9]).unwrap();
        let tol = tolerance_from_digits(12);
        let r = kempner_series(&spec, &tol, &SeriesOptions::default()).unwrap();
        assert_close(&r, "11.490785103824471", &tol);
        assert!(r.value.rad().to_rational() <= tol);
        assert_eq!(r.method, Method::Series);
    }

    #[test]
    fn erdos_borwein_constant() {
        let spec = make_problem(2, &[0]).unwrap();
        let tol = tolerance_from_digits(10);
        let r = kempner_series(&spec, &tol, &SeriesOptions::default()).unwrap();
        assert_close(&r, "1.60669515241529", &tol);
    }

    #[test]
    fn degenerate_specs_are_exactly_zero() {
        for e in [vec![1u32], vec![0, 1]] {
            let spec = make_problem(2, &e).unwrap();
            let tol = tolerance_from_digits(10);
            let r = kempner_series(&spec, &tol, &SeriesOptions::default()).unwrap();
            assert!(r.value.is_exact_zero());
            let r = kempner_via_u(&spec, &tol, &SeriesOptions::default()).unwrap();
            assert!(r.value.is_exact_zero());
        }
    }

    #[test]
    fn via_u_agrees_with_series() {
        for (b, e) in [(10u32, vec![9u32]), (10, vec![0, 9]), (2, vec![0]), (7, vec![2, 4])] {
            let spec = make_problem(b, &e).unwrap();
            let tol = tolerance_from_digits(10);
            let s = kempner_series(&spec, &tol, &SeriesOptions::default()).unwrap();
            let u = kempner_via_u(&spec, &tol, &SeriesOptions::default()).unwrap();
            assert!(s.value.overlaps(&u.value), "{}", spec.label());
            assert!(u.value.rad().to_rational() <= tol);
        }
    }

    #[test]
    fn series_value_respects_digamma_bounds() {
        for (b, e) in [(10u32, vec![0u32]), (10, vec![5]), (4, vec![1, 2])] {
            let spec = make_problem(b, &e).unwrap();
            let tol = tolerance_from_digits(12);
            let k = kempner_series(&spec, &tol, &SeriesOptions::default()).unwrap();
            let bounds = kempner_bounds(&spec, &Precision::decimal(20)).unwrap();
            assert!(
                k.value.mid().cmp_val(&bounds.lo_total.lower()) == std::cmp::Ordering::Greater,
                "{} below lo",
                spec.label()
            );
            assert!(
                k.value.mid().cmp_val(&bounds.hi_total.upper()) == std::cmp::Ordering::Less,
                "{} above hi",
                spec.label()
            );
        }
    }

    #[test]
    fn slow_convergence_is_guarded() {
        // 1 in E puts b-1 in F; at b = 128 the ratio 127/128 exceeds the guard
        let spec = make_problem(128, &[1]).unwrap();
        let tol = tolerance_from_digits(8);
        let err = kempner_series(&spec, &tol, &SeriesOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SlowConvergence { .. }));
    }

    #[test]
    fn term_cap_is_enforced() {
        let spec = make_problem(10, &[1]).unwrap();
        let tol = tolerance_from_digits(12);
        let opts = SeriesOptions { term_cap: 10, allow_slow: false };
        let err = kempner_series(&spec, &tol, &opts).unwrap_err();
        assert!(matches!(err, Error::TermCapExceeded { cap: 10, .. }));
    }

    #[test]
    fn u_identity_holds() {
        // U(n) = 1/n + sum_{a in A} U(nb + a)
        let spec = make_problem(10, &[9]).unwrap();
        let tol = tolerance_from_digits(14);
        let opts = SeriesOptions::default();
        let bits = 96;
        for n in 1..=5u64 {
            let lhs = stieltjes_u(&spec, n, &tol, &opts).unwrap();
            let mut rhs = Ball::from_rational(&rat(1, n as i64), bits);
            for &a in spec.admissible() {
                let u = stieltjes_u(&spec, n * 10 + a as u64, &tol, &opts).unwrap();
                rhs = rhs.add(&u, bits);
            }
            assert!(lhs.overlaps(&rhs), "n={n}");
        }
    }

    #[test]
    fn u_rejects_zero_argument() {
        let spec = make_problem(10, &[9]).unwrap();
        let tol = tolerance_from_digits(10);
        assert!(stieltjes_u(&spec, 0, &tol, &SeriesOptions::default()).is_err());
    }

    #[test]
    fn json_shape() {
        let spec = make_problem(10, &[9]).unwrap();
        let tol = tolerance_from_digits(10);
        let r = kempner_series(&spec, &tol, &SeriesOptions::default()).unwrap();
        let j = r.to_json(10);
        assert_eq!(j["b"], 10);
        assert_eq!(j["method"], "series");
        assert!(j["value"].as_str().unwrap().starts_with("22.92067"));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let spec = make_problem(10, &[9]).unwrap();
        let err = kempner_series(&spec, &BigRational::zero(), &SeriesOptions::default());
        assert!(matches!(err, Err(Error::BadTolerance)));
    }
}
