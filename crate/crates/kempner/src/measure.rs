//! Explicit truncation of the discrete digit measure, used as a brute-force
//! oracle for moments, the log-like integral, and the digamma integrand.
//! Convergence is geometric with ratio #A/b, so this is a cross-check path,
//! never a production one.

use std::collections::BTreeMap;

use num::bigint::BigInt;
use num::{BigRational, One, Zero};

use crate::ball::{Ball, Dyadic};
use crate::error::Error;
use crate::problem::ProblemSpec;
use crate::specfun;

pub const DEFAULT_ATOM_BUDGET: u64 = 10_000_000;

/// Weighted atoms from all admissible strings of length at most `max_len`,
/// merged by position, plus an exact geometric bound on the omitted mass.
#[derive(Clone, Debug)]
pub struct TruncatedMeasure {
    pub spec: ProblemSpec,
    pub max_len: u32,
    /// (point in [0,1), weight), points strictly increasing.
    pub atoms: Vec<(BigRational, BigRational)>,
    pub tail_mass: BigRational,
}

impl TruncatedMeasure {
    pub fn total_weight(&self) -> BigRational {
        self.atoms.iter().map(|(_, w)| w).sum()
    }

    /// Debug dump, one `point,weight` line per atom.
    pub fn atoms_csv(&self) -> String {
        let mut out = String::from("point,weight\n");
        for (x, w) in &self.atoms {
            out.push_str(&format!("{x},{w}\n"));
        }
        out
    }
}

pub fn build_truncated_measure(
    spec: &ProblemSpec,
    max_len: u32,
    budget: u64,
) -> Result<TruncatedMeasure, Error> {
    let n = spec.n_admissible() as u128;
    // total string count sum_{l<=L} N^l against the budget
    let mut count: u128 = 1;
    let mut level: u128 = 1;
    for _ in 1..=max_len {
        level = level.checked_mul(n).unwrap_or(u128::MAX);
        count = count.saturating_add(level);
        if count > budget as u128 {
            return Err(Error::AtomBudgetExceeded { strings: count, budget });
        }
    }

    let b = BigInt::from(spec.base());
    // merge on the integer key n(X) * b^(L - |X|), i.e. the point scaled by
    // b^L; weights stay exact with denominators dividing b^L
    let full_denom = b.pow(max_len);
    let mut merged: BTreeMap<BigInt, BigRational> = BTreeMap::new();
    // the empty string: point 0, weight 1
    merged.insert(BigInt::zero(), BigRational::one());

    // level l integers are n*b + a over level l-1 integers; point n(X)/b^l
    let mut current: Vec<BigInt> = vec![BigInt::zero()];
    let mut denom = BigInt::one();
    for level in 1..=max_len {
        denom *= &b;
        let weight = BigRational::new(BigInt::one(), denom.clone());
        let scale = b.pow(max_len - level);
        let mut next = Vec::with_capacity(current.len() * spec.admissible().len());
        for nx in &current {
            for &a in spec.admissible() {
                next.push(nx * &b + BigInt::from(a));
            }
        }
        for nx in &next {
            *merged.entry(nx * &scale).or_insert_with(BigRational::zero) += &weight;
        }
        current = next;
        if current.is_empty() {
            break;
        }
    }
    let atoms: Vec<(BigRational, BigRational)> = merged
        .into_iter()
        .map(|(key, w)| (BigRational::new(key, full_denom.clone()), w))
        .collect();

    // tail = sum_{l>L} (N/b)^l = (N/b)^{L+1} / (1 - N/b)
    let n_big = BigInt::from(spec.n_admissible());
    let tail_mass = if n_big.is_zero() {
        BigRational::zero()
    } else {
        let r = BigRational::new(n_big.clone(), BigInt::from(spec.base()));
        let mut num = BigRational::one();
        for _ in 0..=max_len {
            num *= &r;
        }
        num / (BigRational::one() - &r)
    };

    Ok(TruncatedMeasure { spec: spec.clone(), max_len, atoms, tail_mass })
}

/// Riemann-Stieltjes sum for v_m(d) with a guaranteed error bound:
/// |value - v_m(d)| <= d^m * tail_mass (or tail_mass when d = 0).
pub fn oracle_moment(
    tm: &TruncatedMeasure,
    shift: u32,
    m: u32,
) -> (BigRational, BigRational) {
    let d = BigRational::from_integer(BigInt::from(shift));
    let mut value = BigRational::zero();
    for (x, w) in &tm.atoms {
        let base = &d - x;
        let mut pw = BigRational::one();
        for _ in 0..m {
            pw *= &base;
        }
        value += w * pw;
    }
    let bound = if shift >= 1 {
        BigRational::from_integer(BigInt::from(shift).pow(m)) * &tm.tail_mass
    } else {
        tm.tail_mass.clone()
    };
    (value, bound)
}

/// The log-like integral: sum of weight/point over atoms with point >= 1/b.
/// Converges to K(b,E) from below; the integrand is bounded by b on [1/b, 1),
/// giving the stated error bound.
pub fn oracle_k_loglike(tm: &TruncatedMeasure, bits: u32) -> (Ball, BigRational) {
    let cutoff = BigRational::new(BigInt::one(), BigInt::from(tm.spec.base()));
    // summed in ball arithmetic: the exact rational sum would accumulate an
    // lcm over millions of unrelated denominators
    let mut value = Ball::zero();
    for (x, w) in &tm.atoms {
        if x >= &cutoff {
            value = value.add(&Ball::from_rational(&(w / x), bits), bits);
        }
    }
    let bound = BigRational::from_integer(BigInt::from(tm.spec.base())) * &tm.tail_mass;
    let (d, e) = Dyadic::from_rational_nearest(&bound, 32);
    (value.add_rad(&d.add(&e)), bound)
}

/// Direct numerical evaluation of the digamma integral representation:
/// (b/p) log b + (1/b) sum_atoms w * sum_{a in E1} (psi((a+x)/b) - psi(1)).
pub fn oracle_theorem_main(tm: &TruncatedMeasure, bits: u32) -> Result<Ball, Error> {
    let prec = crate::ball::Precision::with_guard(1, bits);
    let b = tm.spec.base();
    let b_rat = BigRational::from_integer(BigInt::from(b));
    let psi1 = specfun::hp_psi_one(&prec);
    let mut integral = Ball::zero();
    for (x, w) in &tm.atoms {
        let mut inner = Ball::zero();
        for &a in tm.spec.e1() {
            let arg = (x + BigRational::from_integer(BigInt::from(a))) / &b_rat;
            let psi = specfun::hp_digamma(&arg, &prec)?;
            inner = inner.add(&psi.sub(&psi1, bits), bits);
        }
        integral = integral.add(&inner.mul_rational(w, bits), bits);
    }
    let log_b = specfun::hp_log(&b_rat, &prec)?;
    let mass = BigRational::new(BigInt::from(b), BigInt::from(tm.spec.p_excluded()));
    let mut value = log_b
        .mul_rational(&mass, bits)
        .add(&integral.mul_rational(&BigRational::new(BigInt::one(), BigInt::from(b)), bits), bits);
    // omitted strings: psi is monotone, so on x in [0,1) the integrand for
    // digit a is bounded by its value at an endpoint of [a/b, (a+1)/b]
    if !tm.tail_mass.is_zero() {
        let mut sup = Dyadic::zero();
        for &a in tm.spec.e1() {
            for arg in [
                BigRational::new(BigInt::from(a), BigInt::from(b)),
                BigRational::new(BigInt::from(a + 1), BigInt::from(b)),
            ] {
                let m = specfun::hp_digamma(&arg, &prec)?.sub(&psi1, bits).mag_upper();
                if m.cmp_val(&sup) == std::cmp::Ordering::Greater {
                    sup = m;
                }
            }
        }
        let (tail_dy, tail_err) = Dyadic::from_rational_nearest(
            &(&tm.tail_mass / BigRational::from_integer(BigInt::from(b))),
            32,
        );
        value = value.add_rad(
            &tail_dy
                .add(&tail_err)
                .mul(&Dyadic::from_bigint(BigInt::from(tm.spec.e1().len() as u64)))
                .mul(&sup)
                .round_up_coarse(),
        );
    }
    Ok(value)
}
