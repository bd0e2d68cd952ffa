//! Error-bounded high-precision evaluation of log, integer zeta values, and
//! digamma at positive rationals.  Every result is a ball guaranteed to
//! contain the true value; every series truncation carries an explicit
//! remainder bound folded into the radius.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::sync::Mutex;
use std::sync::OnceLock;

use num::bigint::BigInt;
use num::{BigRational, One, Signed, Zero};

use crate::ball::{Ball, Dyadic, Precision};
use crate::error::Error;

fn rat_u64(n: u64, d: u64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

// ---------------------------------------------------------------------------
// Bernoulli numbers
// ---------------------------------------------------------------------------

static BERNOULLI: OnceLock<Mutex<Vec<BigRational>>> = OnceLock::new();

/// Exact Bernoulli number B_n (B_1 = -1/2 convention).
pub fn bernoulli(n: usize) -> BigRational {
    let cache = BERNOULLI.get_or_init(|| {
        Mutex::new(vec![
            BigRational::one(),
            BigRational::new(BigInt::from(-1), BigInt::from(2)),
        ])
    });
    let mut v = cache.lock().unwrap();
    while v.len() <= n {
        let m = v.len();
        if m % 2 == 1 {
            v.push(BigRational::zero());
            continue;
        }
        // sum_{j=0}^{m} C(m+1,j) B_j = 0
        let mut acc = BigRational::zero();
        let mut binom = BigInt::one(); // C(m+1, 0)
        for (j, bj) in v.iter().enumerate() {
            if !bj.is_zero() {
                acc += bj * BigRational::from_integer(binom.clone());
            }
            // C(m+1, j+1) = C(m+1, j) * (m+1-j)/(j+1)
            binom = binom * BigInt::from(m + 1 - j) / BigInt::from(j + 1);
        }
        let bm = -acc / BigRational::from_integer(BigInt::from(m as u64 + 1));
        v.push(bm);
    }
    v[n].clone()
}

// ---------------------------------------------------------------------------
// Logarithm
// ---------------------------------------------------------------------------

/// atanh of a small ball, |u| <= 0.34; tail bounded geometrically.
fn atanh_ball(u: &Ball, bits: u32) -> Ball {
    let target = Dyadic::pow2(-(bits as i64) - 4);
    let usq = u.mul(u, bits);
    let mut pow = u.clone();
    let mut sum = u.clone();
    let mut k: u64 = 1;
    loop {
        pow = pow.mul(&usq, bits);
        let term = pow.mul_rational(&rat_u64(1, 2 * k + 1), bits);
        sum = sum.add(&term, bits);
        if pow.mag_upper().cmp_val(&target) == Ordering::Less {
            break;
        }
        k += 1;
    }
    // remaining terms start at u^(2k+3); for |u| <= 0.34 their sum is below
    // |u|^(2k+1) * u^2/(1-u^2) <= mag(pow) / 4
    sum.add_rad(&pow.mag_upper().shl(-2))
}

static LN2: OnceLock<Mutex<HashMap<u32, Ball>>> = OnceLock::new();

pub fn ln2(bits: u32) -> Ball {
    let cache = LN2.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().unwrap().get(&bits) {
        return b.clone();
    }
    // log 2 = 2 atanh(1/3)
    let third = Ball::from_rational(&rat_u64(1, 3), bits + 8);
    let v = atanh_ball(&third, bits + 8).shl(1);
    cache.lock().unwrap().insert(bits, v.clone());
    v
}

/// Ball containing log(x) for a positive rational x.
pub fn hp_log(x: &BigRational, prec: &Precision) -> Result<Ball, Error> {
    hp_log_bits(x, prec.bits())
}

pub fn hp_log_bits(x: &BigRational, bits: u32) -> Result<Ball, Error> {
    if !x.is_positive() {
        return Err(Error::NonPositiveArgument);
    }
    if x.is_one() {
        return Ok(Ball::zero());
    }
    // write x = t * 2^e with t in [1,2)
    let mut tn = x.numer().clone();
    let mut td = x.denom().clone();
    let mut e: i64 = tn.bits() as i64 - td.bits() as i64;
    if e >= 0 {
        td <<= e as u64;
    } else {
        tn <<= (-e) as u64;
    }
    while tn >= (&td << 1u8) {
        td <<= 1u8;
        e += 1;
    }
    while tn < td {
        tn <<= 1u8;
        e -= 1;
    }
    let work = bits + 8;
    let mut res = if tn == td {
        Ball::zero()
    } else {
        // log t = 2 atanh((t-1)/(t+1)), argument in (0, 1/3)
        let u = BigRational::new(&tn - &td, &tn + &td);
        atanh_ball(&Ball::from_rational(&u, work), work).shl(1)
    };
    if e != 0 {
        let l2 = ln2(work).mul_rational(&BigRational::from_integer(BigInt::from(e)), work);
        res = res.add(&l2, work);
    }
    Ok(res)
}

pub fn hp_log_u64(x: u64, prec: &Precision) -> Result<Ball, Error> {
    hp_log(&BigRational::from_integer(BigInt::from(x)), prec)
}

// ---------------------------------------------------------------------------
// Pi (used by identity checks: zeta(2) vs pi^2/6 etc.)
// ---------------------------------------------------------------------------

/// arctan(1/x) for integer x >= 2; alternating series, tail <= first omitted.
fn atan_inv(x: u64, bits: u32) -> Ball {
    let target = Dyadic::pow2(-(bits as i64) - 4);
    let xinv = Ball::from_rational(&rat_u64(1, x), bits);
    let xinv2 = xinv.mul(&xinv, bits).neg(); // -1/x^2
    let mut pow = xinv.clone();
    let mut sum = xinv;
    let mut k: u64 = 1;
    loop {
        pow = pow.mul(&xinv2, bits);
        let term = pow.mul_rational(&rat_u64(1, 2 * k + 1), bits);
        sum = sum.add(&term, bits);
        if pow.mag_upper().cmp_val(&target) == Ordering::Less {
            break;
        }
        k += 1;
    }
    sum.add_rad(&pow.mag_upper())
}

static PI: OnceLock<Mutex<HashMap<u32, Ball>>> = OnceLock::new();

pub fn hp_pi(prec: &Precision) -> Ball {
    let bits = prec.bits();
    let cache = PI.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().unwrap().get(&bits) {
        return b.clone();
    }
    // Machin: pi = 16 atan(1/5) - 4 atan(1/239)
    let work = bits + 8;
    let v = atan_inv(5, work)
        .shl(4)
        .sub(&atan_inv(239, work).shl(2), work);
    cache.lock().unwrap().insert(bits, v.clone());
    v
}

// ---------------------------------------------------------------------------
// Zeta at integers
// ---------------------------------------------------------------------------

static ZETA: OnceLock<Mutex<HashMap<(u32, u32), Ball>>> = OnceLock::new();

/// Ball containing zeta(n) for integer n >= 2.
pub fn hp_zeta(n: u32, prec: &Precision) -> Result<Ball, Error> {
    hp_zeta_bits(n, prec.bits())
}

pub fn hp_zeta_bits(n: u32, bits: u32) -> Result<Ball, Error> {
    if n < 2 {
        return Err(Error::ZetaArgumentTooSmall(n));
    }
    let cache = ZETA.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(b) = cache.lock().unwrap().get(&(n, bits)) {
        return Ok(b.clone());
    }
    let v = if n > 16 {
        let need_bits = (bits as f64 + 2.0) / (n as f64 - 1.0);
        if need_bits <= 17.0 {
            zeta_direct(n, bits)
        } else {
            zeta_euler_maclaurin(n, bits)
        }
    } else {
        zeta_euler_maclaurin(n, bits)
    };
    cache.lock().unwrap().insert((n, bits), v.clone());
    Ok(v)
}

/// Direct summation with an integral tail bound; used when few terms suffice.
fn zeta_direct(n: u32, bits: u32) -> Ball {
    let work = bits + 8;
    let cut = 2f64.powf((bits as f64 + 2.0) / (n as f64 - 1.0)).ceil() as u64 + 1;
    let mut sum = Ball::exact_i64(1);
    for k in 2..=cut {
        let kn = BigInt::from(k).pow(n);
        sum = sum.add(&Ball::from_rational(&BigRational::new(BigInt::one(), kn), work), work);
    }
    // sum_{k>N} k^-n < integral_N^inf x^-n dx = N^(1-n)/(n-1)
    let tail = BigRational::new(
        BigInt::one(),
        BigInt::from(n - 1) * BigInt::from(cut).pow(n - 1),
    );
    let (tail_dy, tail_err) = Dyadic::from_rational_nearest(&tail, 32);
    sum.add_rad(&tail_dy.add(&tail_err))
}

/// Euler-Maclaurin with the remainder bounded by the first omitted correction
/// term (valid since x^-n is completely monotone on [N, inf)).
fn zeta_euler_maclaurin(n: u32, bits: u32) -> Ball {
    let work = bits + 16;
    let mut cut: u64 = (n as u64 + 1).max((0.12 * bits as f64) as u64 + 8);
    let target = BigRational::new(BigInt::one(), BigInt::one() << (bits as u64 + 2));
    'restart: loop {
        let mut sum = Ball::zero();
        for k in 1..cut {
            let kn = BigInt::from(k).pow(n);
            sum = sum.add(&Ball::from_rational(&BigRational::new(BigInt::one(), kn), work), work);
        }
        // N^(1-n)/(n-1) + N^(-n)/2
        let npow = BigInt::from(cut).pow(n - 1);
        let mid_terms = BigRational::new(BigInt::one(), BigInt::from(n - 1) * &npow)
            + BigRational::new(BigInt::one(), BigInt::from(2 * cut) * &npow);
        sum = sum.add(&Ball::from_rational(&mid_terms, work), work);

        // correction terms t_j = B_{2j}/(2j)! * n(n+1)...(n+2j-2) * N^(1-n-2j)
        let mut rising = BigInt::from(n); // product of 2j-1 factors n..n+2j-2
        let mut fact = BigInt::from(2u32); // (2j)!
        let mut npow_j = BigInt::from(cut).pow(n + 1); // N^(n+2j-1)
        let mut prev_mag: Option<BigRational> = None;
        let mut j: usize = 1;
        loop {
            let tj = bernoulli(2 * j) * BigRational::from_integer(rising.clone())
                / BigRational::from_integer(&fact * &npow_j);
            let mag = tj.abs();
            if mag <= target {
                let (d, e) = Dyadic::from_rational_nearest(&mag, 32);
                return sum.add_rad(&d.add(&e));
            }
            if let Some(p) = &prev_mag {
                if &mag > p {
                    // asymptotic series stopped improving before the target
                    cut *= 2;
                    continue 'restart;
                }
            }
            sum = sum.add(&Ball::from_rational(&tj, work), work);
            prev_mag = Some(mag);
            let m2 = 2 * j as u32;
            rising *= BigInt::from(n + m2 - 1) * BigInt::from(n + m2);
            fact *= BigInt::from(m2 + 1) * BigInt::from(m2 + 2);
            npow_j *= BigInt::from(cut) * BigInt::from(cut);
            j += 1;
        }
    }
}

// ---------------------------------------------------------------------------
// Digamma at positive rationals
// ---------------------------------------------------------------------------

/// Ball containing psi(x) for a positive rational x.
///
/// The argument is shifted upward with psi(x+1) = psi(x) + 1/x until it is
/// large enough for the asymptotic series, whose remainder is bounded by the
/// first omitted term.
pub fn hp_digamma(x: &BigRational, prec: &Precision) -> Result<Ball, Error> {
    hp_digamma_bits(x, prec.bits())
}

pub fn hp_digamma_bits(x: &BigRational, bits: u32) -> Result<Ball, Error> {
    if !x.is_positive() {
        return Err(Error::NonPositiveArgument);
    }
    let work = bits + 16;
    let target = BigRational::new(BigInt::one(), BigInt::one() << (bits as u64 + 2));
    let mut threshold: u64 = 10u64.max((0.13 * bits as f64) as u64 + 4);
    'restart: loop {
        let floor_x = x.floor().to_integer();
        let shift: u64 = if floor_x < BigInt::from(threshold) {
            let f: i64 = num::ToPrimitive::to_i64(&floor_x).unwrap_or(0);
            (threshold as i64 - f).max(0) as u64
        } else {
            0
        };
        let y = x + BigRational::from_integer(BigInt::from(shift));

        // psi(y) = log y - 1/(2y) - sum_j B_{2j}/(2j y^{2j}) + R
        let mut asymp = hp_log_bits(&y, work)?;
        asymp = asymp.sub(
            &Ball::from_rational(&(BigRational::from_integer(BigInt::from(2)) * &y).recip(), work),
            work,
        );
        let y2inv = (&y * &y).recip();
        let mut ypow = y2inv.clone(); // y^(-2j)
        let mut prev_mag: Option<BigRational> = None;
        let mut j: u64 = 1;
        loop {
            let tj = bernoulli(2 * j as usize) * &ypow
                / BigRational::from_integer(BigInt::from(2 * j));
            let mag = tj.abs();
            if mag <= target {
                let (d, e) = Dyadic::from_rational_nearest(&mag, 32);
                asymp = asymp.add_rad(&d.add(&e));
                break;
            }
            if let Some(p) = &prev_mag {
                if &mag > p {
                    threshold += threshold / 2 + 4;
                    continue 'restart;
                }
            }
            asymp = asymp.sub(&Ball::from_rational(&tj, work), work);
            prev_mag = Some(mag);
            ypow *= &y2inv;
            j += 1;
        }

        // undo the shift: psi(x) = psi(y) - sum_{i=0}^{shift-1} 1/(x+i)
        if shift > 0 {
            let mut harmonic = BigRational::zero();
            for i in 0..shift {
                harmonic += (x + BigRational::from_integer(BigInt::from(i))).recip();
            }
            asymp = asymp.sub(&Ball::from_rational(&harmonic, work), work);
        }
        return Ok(asymp);
    }
}

/// psi(p/q) for positive integers p, q.
pub fn hp_digamma_rational(p: u64, q: u64, prec: &Precision) -> Result<Ball, Error> {
    if p == 0 || q == 0 {
        return Err(Error::NonPositiveArgument);
    }
    hp_digamma(&rat_u64(p, q), prec)
}

/// psi(1) = -gamma.
pub fn hp_psi_one(prec: &Precision) -> Ball {
    hp_digamma(&BigRational::one(), prec).expect("psi(1) is in the domain")
}
