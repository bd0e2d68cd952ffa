//! Exact dyadic numbers and rigorous ball arithmetic.
//!
//! A [`Dyadic`] is `mant * 2^exp` with an arbitrary-precision mantissa; all
//! dyadic operations here are exact, and rounding to a working precision is
//! explicit and returns the rounding error.  A [`Ball`] is a midpoint plus a
//! nonnegative radius; every operation keeps the guarantee that the true value
//! lies in `[mid - rad, mid + rad]`.

use std::cmp::Ordering;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};

use crate::error::Error;

/// Bits kept in a radius mantissa; radii are always rounded *up* to this width.
const RAD_BITS: u64 = 32;

/// Target decimal digits plus guard bits, the knob every high-precision
/// routine takes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Precision {
    digits: u32,
    guard: u32,
}

impl Precision {
    pub fn decimal(digits: u32) -> Self {
        Self::with_guard(digits, 64)
    }

    pub fn with_guard(digits: u32, guard: u32) -> Self {
        Precision { digits: digits.max(1), guard: guard.max(32) }
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Working precision: digits * log2(10), plus the guard.
    pub fn bits(&self) -> u32 {
        (self.digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + self.guard
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn new(mant: BigInt, exp: i64) -> Self {
        Dyadic { mant, exp }.normalized()
    }

    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn pow2(exp: i64) -> Self {
        Dyadic { mant: BigInt::one(), exp }
    }

    pub fn from_bigint(n: BigInt) -> Self {
        Dyadic::new(n, 0)
    }

    pub fn from_i64(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    fn normalized(mut self) -> Self {
        if self.mant.is_zero() {
            self.exp = 0;
            return self;
        }
        if let Some(tz) = self.mant.trailing_zeros() {
            if tz > 0 {
                self.mant >>= tz;
                self.exp += tz as i64;
            }
        }
        self
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    pub fn bits(&self) -> u64 {
        self.mant.bits()
    }

    pub fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << (self.exp - e) as u64;
        let b = &other.mant << (other.exp - e) as u64;
        Dyadic::new(a + b, e)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Self) -> Self {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn shl(&self, k: i64) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    pub fn cmp_val(&self, other: &Self) -> Ordering {
        let d = self.sub(other);
        if d.mant.is_zero() {
            Ordering::Equal
        } else if d.mant.is_negative() {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }

    /// Round to `prec` mantissa bits (round half up in magnitude direction of
    /// the shift); returns the rounded value and an error bound.
    pub fn round_nearest(&self, prec: u32) -> (Self, Self) {
        let bits = self.bits();
        if bits <= prec as u64 {
            return (self.clone(), Dyadic::zero());
        }
        let s = bits - prec as u64;
        let half = BigInt::one() << (s - 1);
        // floor((mant + half) / 2^s): round-half-up for either sign,
        // error at most 2^(exp + s - 1).
        let q = (&self.mant + half) >> s;
        (Dyadic::new(q, self.exp + s as i64), Dyadic::pow2(self.exp + s as i64 - 1))
    }

    /// An upper bound for |self| with a mantissa of at most `RAD_BITS` bits.
    pub fn round_up_coarse(&self) -> Self {
        if self.is_zero() {
            return Dyadic::zero();
        }
        let m = self.mant.abs();
        let bits = m.bits();
        if bits <= RAD_BITS {
            return Dyadic { mant: m, exp: self.exp };
        }
        let s = bits - RAD_BITS;
        Dyadic::new((m >> s) + 1, self.exp + s as i64)
    }

    /// Upper bound for num/den, for nonnegative num and positive den.
    pub fn div_up(num: &Self, den: &Self) -> Self {
        assert!(!num.is_negative() && den.is_positive());
        if num.is_zero() {
            return Dyadic::zero();
        }
        let shift =
            (RAD_BITS as i64 + 16 + den.bits() as i64 - num.bits() as i64).max(0) as u64;
        let q = (&num.mant << shift) / &den.mant;
        Dyadic::new(q + 1, num.exp - den.exp - shift as i64).round_up_coarse()
    }

    /// Nearest dyadic approximation of num/den at roughly `prec` bits, plus an
    /// error bound.  `den` must be positive.
    pub fn from_ratio_nearest(num: &BigInt, den: &BigInt, prec: u32) -> (Self, Self) {
        assert!(den.is_positive());
        if num.is_zero() {
            return (Dyadic::zero(), Dyadic::zero());
        }
        let shift =
            (prec as i64 + 1 + den.bits() as i64 - num.bits() as i64).max(0) as u64;
        let neg = num.is_negative();
        let scaled = num.abs() << shift;
        let (mut q, r) = num::Integer::div_rem(&scaled, den);
        if &r * 2 >= *den {
            q += 1;
        }
        if neg {
            q = -q;
        }
        let exp = -(shift as i64);
        (Dyadic::new(q, exp), Dyadic::pow2(exp - 1))
    }

    pub fn from_rational_nearest(r: &BigRational, prec: u32) -> (Self, Self) {
        Self::from_ratio_nearest(r.numer(), r.denom(), prec)
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as u64)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as u64)
        }
    }

    /// floor(self * 10^k) as an exact integer.
    pub fn floor_scale10(&self, k: u32) -> BigInt {
        let scaled = &self.mant * BigInt::from(10u32).pow(k);
        if self.exp >= 0 {
            scaled << self.exp as u64
        } else {
            // BigInt shr rounds toward negative infinity, which is floor.
            scaled >> (-self.exp) as u64
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let bits = self.bits();
        if bits <= 52 {
            self.mant.to_string().parse::<f64>().unwrap() * 2f64.powi(self.exp as i32)
        } else {
            let s = bits - 52;
            let top: BigInt = &self.mant >> s;
            let exp = self.exp + s as i64;
            let m = top.to_string().parse::<f64>().unwrap();
            if exp > 1_000_000 {
                if m > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY }
            } else if exp < -1_100 {
                0.0
            } else {
                m * 2f64.powi(exp as i32)
            }
        }
    }
}

/// Midpoint-radius interval; the true value is guaranteed to lie inside.
#[derive(Clone, Debug)]
pub struct Ball {
    mid: Dyadic,
    rad: Dyadic,
}

impl Ball {
    pub fn zero() -> Self {
        Ball { mid: Dyadic::zero(), rad: Dyadic::zero() }
    }

    pub fn exact_dyadic(mid: Dyadic) -> Self {
        Ball { mid, rad: Dyadic::zero() }
    }

    pub fn exact_i64(n: i64) -> Self {
        Ball::exact_dyadic(Dyadic::from_i64(n))
    }

    pub fn new(mid: Dyadic, rad: Dyadic) -> Self {
        debug_assert!(!rad.is_negative());
        Ball { mid, rad }
    }

    pub fn from_rational(r: &BigRational, prec: u32) -> Self {
        let (mid, err) = Dyadic::from_rational_nearest(r, prec);
        Ball { mid, rad: err }
    }

    pub fn mid(&self) -> &Dyadic {
        &self.mid
    }

    pub fn rad(&self) -> &Dyadic {
        &self.rad
    }

    pub fn is_exact_zero(&self) -> bool {
        self.mid.is_zero() && self.rad.is_zero()
    }

    pub fn neg(&self) -> Self {
        Ball { mid: self.mid.neg(), rad: self.rad.clone() }
    }

    pub fn add(&self, other: &Self, prec: u32) -> Self {
        let (mid, err) = self.mid.add(&other.mid).round_nearest(prec);
        let rad = self.rad.add(&other.rad).add(&err).round_up_coarse();
        Ball { mid, rad }
    }

    pub fn sub(&self, other: &Self, prec: u32) -> Self {
        self.add(&other.neg(), prec)
    }

    pub fn mul(&self, other: &Self, prec: u32) -> Self {
        let (mid, err) = self.mid.mul(&other.mid).round_nearest(prec);
        let rad = self
            .mid
            .abs()
            .mul(&other.rad)
            .add(&other.mid.abs().mul(&self.rad))
            .add(&self.rad.mul(&other.rad))
            .add(&err)
            .round_up_coarse();
        Ball { mid, rad }
    }

    /// Multiply by an exact rational.
    pub fn mul_rational(&self, r: &BigRational, prec: u32) -> Self {
        if r.is_zero() || self.is_exact_zero() {
            return Ball::zero();
        }
        let num = r.numer();
        let den = r.denom();
        let scaled_mant = &self.mid.mant * num;
        let (mut mid, mut err) = Dyadic::from_ratio_nearest(&scaled_mant, den, prec);
        mid = mid.shl(self.mid.exp);
        err = err.shl(self.mid.exp);
        let rad_num = self.rad.mul(&Dyadic::from_bigint(num.abs()));
        let rad = Dyadic::div_up(&rad_num, &Dyadic::from_bigint(den.clone()))
            .add(&err)
            .round_up_coarse();
        Ball { mid, rad }
    }

    pub fn div(&self, other: &Self, prec: u32) -> Result<Self, Error> {
        let bm = other.mid.abs();
        if bm.cmp_val(&other.rad) != Ordering::Greater {
            return Err(Error::BallDivisionByZero);
        }
        let (mut mid, mut err) =
            Dyadic::from_ratio_nearest(&self.mid.mant, &other.mid.mant.abs(), prec);
        if other.mid.is_negative() {
            mid = mid.neg();
        }
        mid = mid.shl(self.mid.exp - other.mid.exp);
        err = err.shl(self.mid.exp - other.mid.exp);
        // |x/y - mid(a)/mid(b)| <= (rad_a |mid_b| + |mid_a| rad_b) / (|mid_b| (|mid_b| - rad_b))
        let num = self.rad.mul(&bm).add(&self.mid.abs().mul(&other.rad));
        let den = bm.mul(&bm.sub(&other.rad));
        let rad = Dyadic::div_up(&num, &den).add(&err).round_up_coarse();
        Ok(Ball { mid, rad })
    }

    pub fn add_rad(&self, extra: &Dyadic) -> Self {
        debug_assert!(!extra.is_negative());
        Ball { mid: self.mid.clone(), rad: self.rad.add(extra).round_up_coarse() }
    }

    pub fn shl(&self, k: i64) -> Self {
        Ball { mid: self.mid.shl(k), rad: self.rad.shl(k) }
    }

    pub fn upper(&self) -> Dyadic {
        self.mid.add(&self.rad)
    }

    pub fn lower(&self) -> Dyadic {
        self.mid.sub(&self.rad)
    }

    /// Upper bound for |value|.
    pub fn mag_upper(&self) -> Dyadic {
        self.mid.abs().add(&self.rad)
    }

    pub fn overlaps(&self, other: &Self) -> bool {
        let d = self.mid.sub(&other.mid).abs();
        d.cmp_val(&self.rad.add(&other.rad)) != Ordering::Greater
    }

    pub fn contains_rational(&self, r: &BigRational) -> bool {
        let d = (self.mid.to_rational() - r).abs();
        d <= self.rad.to_rational()
    }

    pub fn contains_zero(&self) -> bool {
        self.mid.abs().cmp_val(&self.rad) != Ordering::Greater
    }

    pub fn to_f64(&self) -> f64 {
        self.mid.to_f64()
    }

    pub fn rad_f64(&self) -> f64 {
        self.rad.to_f64()
    }
}

/// Render the longest certified prefix of the ball's decimal expansion, at
/// most `max_sig` significant digits.  A digit is certified when perturbing
/// the midpoint by the radius cannot change it, hence reruns at higher
/// precision extend but never contradict the output.  Returns `None` when not
/// even the integer part is certain.
pub fn certified_decimal(ball: &Ball, max_sig: u32) -> Option<String> {
    if ball.is_exact_zero() {
        return Some("0".to_string());
    }
    let lo = ball.lower();
    let hi = ball.upper();
    let int_part = ball.mid().floor_scale10(0).magnitude().to_string();
    let int_len = if int_part == "0" { 1 } else { int_part.len() as u32 };
    let max_frac = max_sig.saturating_sub(int_len);
    for k in (0..=max_frac).rev() {
        let a = lo.floor_scale10(k);
        let b = hi.floor_scale10(k);
        if a == b {
            let neg = a.is_negative();
            let mut digits = a.magnitude().to_string();
            if (digits.len() as u32) <= k {
                digits = format!("{}{}", "0".repeat((k + 1 - digits.len() as u32) as usize), digits);
            }
            let split = digits.len() - k as usize;
            let (ip, fp) = digits.split_at(split);
            let body = if fp.is_empty() { ip.to_string() } else { format!("{ip}.{fp}") };
            return Some(if neg { format!("-{body}") } else { body });
        }
    }
    None
}

/// Short decimal upper bound for a radius, e.g. `"8.3e-16"`.
pub fn radius_decimal(rad: &Dyadic) -> String {
    if rad.is_zero() {
        return "0".to_string();
    }
    let v = rad.to_f64();
    if v.is_finite() && v > 0.0 {
        // nudge upward so the printed value stays an upper bound
        return format!("{:.2e}", v * (1.0 + 1e-12));
    }
    // fall back to a power-of-two bound for extreme exponents
    let e = rad.exp + rad.bits() as i64;
    format!("2^{e}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::FromPrimitive;
    use proptest::prelude::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn dyadic_roundtrip_and_ops() {
        let a = Dyadic::from_i64(6); // 3 * 2^1
        assert_eq!(a.bits(), 2);
        let b = Dyadic::new(BigInt::from(5), -3); // 0.625
        assert_eq!(a.add(&b).to_rational(), rat(53, 8));
        assert_eq!(a.mul(&b).to_rational(), rat(15, 4));
        assert_eq!(a.sub(&b).to_rational(), rat(43, 8));
    }

    #[test]
    fn rounding_error_is_bounded() {
        let x = Dyadic::new(BigInt::from(0b1011_0110_1101i64), -7);
        let (r, e) = x.round_nearest(5);
        let diff = (x.to_rational() - r.to_rational()).abs();
        assert!(diff <= e.to_rational());
    }

    #[test]
    fn from_ratio_is_within_error() {
        for (n, d) in [(1i64, 3i64), (-7, 11), (355, 113), (1, 1_000_000)] {
            let (v, e) = Dyadic::from_ratio_nearest(&BigInt::from(n), &BigInt::from(d), 64);
            let diff = (v.to_rational() - rat(n, d)).abs();
            assert!(diff <= e.to_rational(), "n={n} d={d}");
        }
    }

    #[test]
    fn certified_decimal_truncates() {
        let (mid, _) = Dyadic::from_ratio_nearest(
            &BigInt::from(11_490_785_103_824_471i64),
            &BigInt::from(1_000_000_000_000_000i64),
            128,
        );
        let ball = Ball::new(mid, Dyadic::pow2(-40));
        let s = certified_decimal(&ball, 15).unwrap();
        assert!(s.starts_with("11.49078510"), "{s}");
        // wider radius certifies fewer digits but the same prefix
        let coarse = Ball::new(ball.mid().clone(), Dyadic::pow2(-20));
        let t = certified_decimal(&coarse, 15).unwrap();
        assert!(s.starts_with(&t), "{s} vs {t}");
    }

    #[test]
    fn certified_decimal_zero() {
        assert_eq!(certified_decimal(&Ball::zero(), 10).unwrap(), "0");
    }

    proptest! {
        #[test]
        fn ball_ops_contain_exact_value(
            an in -1000i64..1000, ad in 1i64..1000,
            bn in -1000i64..1000, bd in 1i64..1000,
            prec in 16u32..96,
        ) {
            let ra = rat(an, ad);
            let rb = rat(bn, bd);
            let a = Ball::from_rational(&ra, prec);
            let b = Ball::from_rational(&rb, prec);
            prop_assert!(a.add(&b, prec).contains_rational(&(&ra + &rb)));
            prop_assert!(a.sub(&b, prec).contains_rational(&(&ra - &rb)));
            prop_assert!(a.mul(&b, prec).contains_rational(&(&ra * &rb)));
            prop_assert!(a.mul_rational(&rb, prec).contains_rational(&(&ra * &rb)));
            if bn != 0 {
                let q = a.div(&b, prec);
                if let Ok(q) = q {
                    prop_assert!(q.contains_rational(&(&ra / &rb)));
                }
            }
        }

        #[test]
        fn certified_decimal_is_a_floor_of_the_true_value(
            n in 0i64..10_000_000, k in 0u32..12,
        ) {
            let v = BigRational::new(BigInt::from(n), BigInt::from(10u64.pow(6)));
            let ball = Ball::from_rational(&v, 96).add_rad(&Dyadic::pow2(-(k as i64) - 30));
            if let Some(s) = certified_decimal(&ball, 14) {
                let printed: f64 = s.parse().unwrap();
                let truth = BigRational::from_f64(printed).unwrap();
                prop_assert!(&truth <= &v);
                prop_assert!((&v - &truth) < rat(1, 10i64.pow(s.split('.').nth(1).map_or(0, |f| f.len() as u32))) );
            }
        }
    }
}
