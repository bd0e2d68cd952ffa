//! Leading asymptotic expansions of K(b,{0}) and K(b,{b-1}) in the base, an
//! empirical decay-order fit for the remainders, and the two-sided bracket
//! coming from the alternating zeta series at E = {0}.

use num::bigint::BigInt;
use num::BigRational;

use crate::ball::{Ball, Precision};
use crate::error::Error;
use crate::moments::moment_table;
use crate::problem::ProblemSpec;
use crate::specfun;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpansionFamily {
    ZeroExcluded,
    TopExcluded,
    SingleDigit(u32),
}

impl ExpansionFamily {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExpansionFamily::ZeroExcluded => "zero-excluded",
            ExpansionFamily::TopExcluded => "top-excluded",
            ExpansionFamily::SingleDigit(_) => "single-digit",
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExpansionResult {
    pub b: u32,
    pub family: ExpansionFamily,
    /// Expansion through the implemented terms; built from log b, zeta(2),
    /// zeta(3) balls and exact rationals only.
    pub partial: Ball,
    /// Claimed exponent k of the O(b^-k) remainder.
    pub remainder_order: u32,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn b_log_b(b: u32, bits: u32) -> Result<Ball, Error> {
    Ok(specfun::hp_log_bits(&BigRational::from_integer(BigInt::from(b)), bits)?
        .mul_rational(&BigRational::from_integer(BigInt::from(b)), bits))
}

/// K(b,{0}) = b log b + zeta(2)/(2b) - zeta(3)/(3b^2) + O(b^-3).
pub fn expansion_zero_excluded(b: u32, prec: &Precision) -> Result<ExpansionResult, Error> {
    if b < 2 {
        return Err(Error::BaseTooSmall(b));
    }
    let bits = prec.bits();
    let z2 = specfun::hp_zeta_bits(2, bits)?.mul_rational(&rat(1, 2 * b as i64), bits);
    let z3 = specfun::hp_zeta_bits(3, bits)?
        .mul_rational(&rat(1, 3 * (b as i64) * (b as i64)), bits);
    let partial = b_log_b(b, bits)?.add(&z2, bits).sub(&z3, bits);
    Ok(ExpansionResult { b, family: ExpansionFamily::ZeroExcluded, partial, remainder_order: 3 })
}

/// K(b,{b-1}) = b log b - zeta(2)/(2b) - (3 zeta(2) + zeta(3))/(3b^2) + O(b^-3).
pub fn expansion_top_excluded(b: u32, prec: &Precision) -> Result<ExpansionResult, Error> {
    if b < 2 {
        return Err(Error::BaseTooSmall(b));
    }
    let bits = prec.bits();
    let z2 = specfun::hp_zeta_bits(2, bits)?;
    let z3 = specfun::hp_zeta_bits(3, bits)?;
    let second = z2
        .mul_rational(&rat(3, 1), bits)
        .add(&z3, bits)
        .mul_rational(&rat(1, 3 * (b as i64) * (b as i64)), bits);
    let partial = b_log_b(b, bits)?
        .sub(&z2.mul_rational(&rat(1, 2 * b as i64), bits), bits)
        .sub(&second, bits);
    Ok(ExpansionResult { b, family: ExpansionFamily::TopExcluded, partial, remainder_order: 3 })
}

/// K(b,{d}) = b log b - b log(1 + 1/d) + (d + 1/2)(zeta(2) - d^-2)/b + O(b^-2)
/// for a fixed excluded digit d >= 1; a loose sanity check, not a tight bound.
pub fn expansion_single_digit(b: u32, d: u32, prec: &Precision) -> Result<ExpansionResult, Error> {
    if b < 2 {
        return Err(Error::BaseTooSmall(b));
    }
    if d == 0 || d >= b {
        return Err(Error::DigitOutOfRange { digit: d, base: b });
    }
    let bits = prec.bits();
    let log_term = specfun::hp_log_bits(&rat(d as i64 + 1, d as i64), bits)?
        .mul_rational(&BigRational::from_integer(BigInt::from(b)), bits);
    let first = specfun::hp_zeta_bits(2, bits)?
        .sub(&Ball::from_rational(&rat(1, (d as i64) * (d as i64)), bits), bits)
        .mul_rational(&(rat(2 * d as i64 + 1, 2) / BigRational::from_integer(BigInt::from(b))), bits);
    let partial = b_log_b(b, bits)?.sub(&log_term, bits).add(&first, bits);
    Ok(ExpansionResult {
        b,
        family: ExpansionFamily::SingleDigit(d),
        partial,
        remainder_order: 2,
    })
}

/// Two-sided bracket from truncating the alternating series at E = {0}:
/// b log b + zeta(2) u1/b^2 - zeta(3) u2/b^3 < K(b,{0})
///   < b log b + zeta(2) u1/b^2 - zeta(3) u2/b^3 + zeta(4) u3/b^4,
/// with the exact moments u_m = (-1)^m v_m(0).
pub fn zero_excluded_bracket(b: u32, prec: &Precision) -> Result<(Ball, Ball), Error> {
    let bits = prec.bits();
    let spec = ProblemSpec::new(b, &[0])?;
    let t = moment_table(&spec, 0, 3);
    let bpow = |k: u32| BigRational::from_integer(BigInt::from(b).pow(k));
    let u1 = -t.values[1].clone() / bpow(2);
    let u2 = t.values[2].clone() / bpow(3);
    let u3 = -t.values[3].clone() / bpow(4);
    let lo = b_log_b(b, bits)?
        .add(&specfun::hp_zeta_bits(2, bits)?.mul_rational(&u1, bits), bits)
        .sub(&specfun::hp_zeta_bits(3, bits)?.mul_rational(&u2, bits), bits);
    let hi = lo.add(&specfun::hp_zeta_bits(4, bits)?.mul_rational(&u3, bits), bits);
    Ok((lo, hi))
}

/// Least-squares slope of log|defect| against log b.  Samples whose defect is
/// not at least 10x the ball radius are discarded as numerically unresolved.
pub fn fit_decay_order(samples: &[(u32, Ball)]) -> Result<f64, Error> {
    if samples.len() < 3 {
        return Err(Error::TooFewSamples(samples.len()));
    }
    let mut points = Vec::with_capacity(samples.len());
    for (b, defect) in samples {
        let mag = defect.mid().abs();
        let resolved = !mag.is_zero()
            && mag.cmp_val(&defect.rad().shl(3).add(&defect.rad().shl(1)))
                == std::cmp::Ordering::Greater;
        if resolved {
            points.push(((*b as f64).ln(), mag.to_f64().ln()));
        }
    }
    if points.len() < 3 {
        return Err(Error::InconclusiveOrder);
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// CSV rows "b,defect,radius" for external plotting.
pub fn defects_csv(samples: &[(u32, Ball)]) -> String {
    let mut out = String::from("b,defect,radius\n");
    for (b, defect) in samples {
        out.push_str(&format!("{},{:e},{:e}\n", b, defect.to_f64(), defect.rad_f64()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ball::Dyadic;
    use crate::engine::{kempner_series, tolerance_from_digits, SeriesOptions};
    use crate::problem::make_problem;
    use num::{One, Signed};

    #[test]
    fn zero_excluded_partial_at_base_ten() {
        // 10 log 10 + zeta(2)/20 - zeta(3)/300
        let r = expansion_zero_excluded(10, &Precision::decimal(20)).unwrap();
        let v = r.partial.to_f64();
        assert!((v - (23.025851 + 0.082247 - 0.004007)).abs() < 1e-4);
        assert_eq!(r.remainder_order, 3);
    }

    #[test]
    fn defect_shrinks_like_b_cubed() {
        let prec = Precision::decimal(25);
        let tol = tolerance_from_digits(20);
        let opts = SeriesOptions::default();
        let mut prev_scaled: Option<f64> = None;
        for b in [20u32, 40, 80] {
            let k = kempner_series(&make_problem(b, &[0]).unwrap(), &tol, &opts).unwrap();
            let e = expansion_zero_excluded(b, &prec).unwrap();
            let defect = k.value.sub(&e.partial, prec.bits());
            let scaled = defect.to_f64().abs() * (b as f64).powi(3);
            // b^3-scaled defect should be roughly stable (within a factor 2)
            if let Some(p) = prev_scaled {
                assert!(scaled < 2.0 * p && scaled > p / 2.0, "b={b}: {scaled} vs {p}");
            }
            prev_scaled = Some(scaled);
        }
    }

    #[test]
    fn top_excluded_defect_small_at_base_ten() {
        let prec = Precision::decimal(20);
        let tol = tolerance_from_digits(15);
        let k = kempner_series(&make_problem(10, &[9]).unwrap(), &tol, &SeriesOptions::default())
            .unwrap();
        let e = expansion_top_excluded(10, &prec).unwrap();
        let defect = k.value.sub(&e.partial, prec.bits()).to_f64().abs();
        assert!(defect < 1e-2, "defect {defect}");
        assert!(defect > 1e-5);
    }

    #[test]
    fn bracket_contains_k_of_b_zero() {
        let prec = Precision::decimal(25);
        let tol = tolerance_from_digits(20);
        for b in [3u32, 10, 25] {
            let k = kempner_series(&make_problem(b, &[0]).unwrap(), &tol, &SeriesOptions::default())
                .unwrap();
            let (lo, hi) = zero_excluded_bracket(b, &prec).unwrap();
            assert!(
                k.value.mid().cmp_val(&lo.upper()) == std::cmp::Ordering::Greater,
                "b={b} below bracket"
            );
            assert!(
                k.value.mid().cmp_val(&hi.lower()) == std::cmp::Ordering::Less,
                "b={b} above bracket"
            );
        }
    }

    #[test]
    fn fit_recovers_synthetic_power_law() {
        let samples: Vec<(u32, Ball)> = [10u32, 20, 40, 80]
            .iter()
            .map(|&b| {
                let v = BigRational::new(BigInt::one(), BigInt::from(b).pow(3));
                (b, Ball::from_rational(&v, 64))
            })
            .collect();
        let slope = fit_decay_order(&samples).unwrap();
        assert!((slope + 3.0).abs() < 1e-9, "slope {slope}");
    }

    #[test]
    fn fit_flags_constant_defects() {
        let samples: Vec<(u32, Ball)> = [10u32, 20, 40, 80]
            .iter()
            .map(|&b| (b, Ball::from_rational(&rat(1, 7), 64)))
            .collect();
        let slope = fit_decay_order(&samples).unwrap();
        assert!(slope.abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_unresolved_or_few_samples() {
        assert!(matches!(fit_decay_order(&[]), Err(Error::TooFewSamples(0))));
        let noisy: Vec<(u32, Ball)> = [10u32, 20, 40]
            .iter()
            .map(|&b| {
                (b, Ball::new(Dyadic::pow2(-30), Dyadic::pow2(-28)))
            })
            .collect();
        assert!(matches!(fit_decay_order(&noisy), Err(Error::InconclusiveOrder)));
    }

    #[test]
    fn single_digit_expansion_is_coarse_at_moderate_base() {
        let prec = Precision::decimal(20);
        let tol = tolerance_from_digits(10);
        let b = 30u32;
        // the series ratio 29/30 is poor here; the U-sum path is geometric 1/2
        let k = crate::engine::kempner_via_u(
            &make_problem(b, &[1]).unwrap(),
            &tol,
            &SeriesOptions::default(),
        )
        .unwrap();
        let e = expansion_single_digit(b, 1, &prec).unwrap();
        let defect = k.value.sub(&e.partial, prec.bits()).to_f64().abs();
        assert!(defect < 10.0 / (b as f64 * b as f64), "defect {defect}");
    }

    #[test]
    fn moment_limits_feeding_the_expansions() {
        // u1/b^2 - 1/(2b) = O(b^-3) and v1/b^2 - 1/(2b) - 1/b^2 = O(b^-3)
        for b in [8u32, 16, 32, 64] {
            let b3 = BigRational::from_integer(BigInt::from(b).pow(3));
            let (_, u1, _) =
                crate::moments::closed_form_low_moments(&make_problem(b, &[0]).unwrap()).unwrap();
            let du = (u1 - rat(1, 2 * b as i64)).abs() * &b3;
            assert!(du < BigRational::from_integer(BigInt::one()), "b={b}");
            let (_, v1, _) =
                crate::moments::closed_form_low_moments(&make_problem(b, &[b - 1]).unwrap())
                    .unwrap();
            let dv = (v1 - rat(1, 2 * b as i64) - rat(1, (b as i64) * (b as i64))).abs() * &b3;
            assert!(dv < BigRational::from_integer(BigInt::from(2)), "b={b}");
        }
    }

    #[test]
    fn csv_shape() {
        let s = defects_csv(&[(10, Ball::from_rational(&rat(1, 1000), 64))]);
        assert!(s.starts_with("b,defect,radius\n10,"));
    }
}
