//! Exact rational shifted moments v_m(d) of the digit measure, computed by
//! two independent linear recurrences, plus closed forms for the low-order
//! moments in the two singleton families E = {0} and E = {b-1}.

use num::bigint::BigInt;
use num::{BigRational, One, Zero};
use serde::Serialize;

use crate::error::Error;
use crate::problem::ProblemSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RecurrenceMethod {
    Primary,
    Alternate,
    Special,
}

/// Exact sequence v_0(d)..v_M(d) for one shift d, values reduced.
#[derive(Clone, Debug)]
pub struct MomentTable {
    pub spec: ProblemSpec,
    pub shift: u32,
    pub values: Vec<BigRational>,
    pub method: RecurrenceMethod,
}

impl MomentTable {
    pub fn order(&self) -> usize {
        self.values.len() - 1
    }

    /// JSON export: {"b":…,"E":[…],"d":…,"values":["num/den",…],"method":…}.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "b": self.spec.base(),
            "E": self.spec.excluded(),
            "d": self.shift,
            "values": self.values.iter().map(|v| format!("{}/{}", v.numer(), v.denom()))
                .collect::<Vec<_>>(),
            "method": match self.method {
                RecurrenceMethod::Primary => "primary",
                RecurrenceMethod::Alternate => "alternate",
                RecurrenceMethod::Special => "special",
            },
        })
    }
}

/// Moments held over the common denominator D_m = prod_{i<=m} (b^{i+1} - #A),
/// with no gcd reduction.  This is the fast path the series engine consumes;
/// `moment_table` reduces it into a [`MomentTable`].
#[derive(Clone, Debug)]
pub struct RawMomentTable {
    pub numerators: Vec<BigInt>,
    pub denominators: Vec<BigInt>,
}

impl RawMomentTable {
    pub fn value(&self, m: usize) -> BigRational {
        BigRational::new(self.numerators[m].clone(), self.denominators[m].clone())
    }
}

/// Primary recurrence (integer form):
/// (b^{m+1} - #A) v_m(d) = b^{m+1} d^m + sum_j C(m,j) S_j v_{m-j}(d)
/// with S_j = sum_{a in A} (bd - a - d)^j.
pub fn raw_moment_table(spec: &ProblemSpec, shift: u32, order: usize) -> RawMomentTable {
    let b = BigInt::from(spec.base());
    let n_adm = BigInt::from(spec.n_admissible());
    let d = BigInt::from(shift);

    // bases (bd - a - d) for a in A and their running powers
    let bases: Vec<BigInt> = spec
        .admissible()
        .iter()
        .map(|&a| &b * &d - BigInt::from(a) - &d)
        .collect();
    let mut powers: Vec<BigInt> = bases.iter().map(|_| BigInt::one()).collect();
    // S_j for j = 1..order
    let mut power_sums: Vec<BigInt> = Vec::with_capacity(order + 1);
    power_sums.push(BigInt::from(spec.n_admissible())); // S_0, unused
    for _ in 1..=order {
        let mut s = BigInt::zero();
        for (p, base) in powers.iter_mut().zip(&bases) {
            *p *= base;
            s += &*p;
        }
        power_sums.push(s);
    }

    // q_m = b^{m+1} - #A; D_m = prod_{i<=m} q_i; w_m = v_m(d) * D_m
    let mut bp = b.clone(); // b^{m+1}
    let mut q: Vec<BigInt> = vec![&bp - &n_adm];
    let mut dens: Vec<BigInt> = vec![q[0].clone()];
    let mut nums: Vec<BigInt> = vec![b.clone()]; // v_0 = b/p, D_0 = p
    let mut dpow = BigInt::one(); // d^m

    for m in 1..=order {
        bp *= &b;
        let qm = &bp - &n_adm;
        dpow *= &d;
        // w_m = D_{m-1} b^{m+1} d^m + sum_j C(m,j) S_j w_{m-j} * (D_{m-1}/D_{m-j})
        let mut acc = &dens[m - 1] * &bp * &dpow;
        let mut binom = BigInt::one(); // C(m, j)
        let mut ratio = BigInt::one(); // D_{m-1}/D_{m-j} = prod_{i=m-j+1}^{m-1} q_i
        for j in 1..=m {
            binom = binom * BigInt::from(m - j + 1) / BigInt::from(j);
            if !power_sums[j].is_zero() {
                acc += &binom * &power_sums[j] * &nums[m - j] * &ratio;
            }
            if j < m {
                ratio *= &q[m - j];
            }
        }
        dens.push(&dens[m - 1] * &qm);
        q.push(qm);
        nums.push(acc);
    }
    RawMomentTable { numerators: nums, denominators: dens }
}

/// Exact moment table via the primary recurrence, values in lowest terms.
pub fn moment_table(spec: &ProblemSpec, shift: u32, order: usize) -> MomentTable {
    let raw = raw_moment_table(spec, shift, order);
    let values = (0..=order).map(|m| raw.value(m)).collect();
    MomentTable { spec: spec.clone(), shift, values, method: RecurrenceMethod::Primary }
}

/// Independent alternate recurrence:
/// (m+1)(b^{m+1} - #A) v_m(d) = b((db+1)^{m+1} - (db)^{m+1})
///   - sum_j C(m+1,j+1) [ b^{m+1-j} - (bd+1-d)^{j+1} + (b-1)^{j+1}(d-1)^{j+1}
///       + sum_{a in E} ((bd-a-d+1)^{j+1} - (bd-a-d)^{j+1}) ] v_{m-j}(d).
/// Sums run over E, not A; this shares no derivation path with the primary.
pub fn moment_table_alt(spec: &ProblemSpec, shift: u32, order: usize) -> MomentTable {
    let b = BigInt::from(spec.base());
    let n_adm = BigInt::from(spec.n_admissible());
    let d = BigInt::from(shift);
    let db = &d * &b;

    // j-dependent pieces cached per j (everything except b^{m+1-j})
    let g = &db + BigInt::one() - &d; // bd + 1 - d
    let h = (&b - BigInt::one()) * (&d - BigInt::one()); // (b-1)(d-1)
    let excl_bases: Vec<(BigInt, BigInt)> = spec
        .excluded()
        .iter()
        .map(|&a| {
            let t = &db - BigInt::from(a) - &d;
            (&t + BigInt::one(), t)
        })
        .collect();
    let mut gp = g.clone();
    let mut hp = h.clone();
    let mut excl_p: Vec<(BigInt, BigInt)> = excl_bases.clone();
    let mut piece: Vec<BigInt> = vec![BigInt::zero()]; // index j, 1-based
    for _ in 1..=order {
        gp *= &g;
        hp *= &h;
        let mut e_sum = BigInt::zero();
        for (i, (p_hi, p_lo)) in excl_p.iter_mut().enumerate() {
            *p_hi *= &excl_bases[i].0;
            *p_lo *= &excl_bases[i].1;
            e_sum += &*p_hi - &*p_lo;
        }
        piece.push(-&gp + &hp + e_sum);
    }

    let mut values: Vec<BigRational> =
        vec![BigRational::new(b.clone(), BigInt::from(spec.p_excluded()))];
    let mut bp = b.clone(); // b^{m+1}
    let mut db1p = (&db + BigInt::one()) * (&db + BigInt::one()); // (db+1)^{m+1}
    let mut dbp = &db * &db; // (db)^{m+1}
    for m in 1..=order {
        bp *= &b;
        let mut acc = BigRational::from_integer(&b * (&db1p - &dbp));
        let mut binom = BigInt::from(m + 1); // C(m+1, j+1) starting at j=1: C(m+1,2)
        binom = binom * BigInt::from(m) / BigInt::from(2);
        // b^{m+1-j} for j = 1
        let mut bmj = bp.clone() / &b;
        for j in 1..=m {
            let coef = &bmj + &piece[j];
            acc -= BigRational::from_integer(&binom * coef) * &values[m - j];
            // C(m+1, j+2) = C(m+1, j+1) * (m-j)/(j+2)
            binom = binom * BigInt::from(m - j) / BigInt::from(j + 2);
            bmj /= &b;
        }
        let divisor = BigInt::from(m as u64 + 1) * (&bp - &n_adm);
        values.push(acc / BigRational::from_integer(divisor));
        db1p *= &db + BigInt::one();
        dbp *= &db;
    }
    MomentTable { spec: spec.clone(), shift, values, method: RecurrenceMethod::Alternate }
}

/// Fischer-style relations for c_m = v_m(1) with E = {b-1}:
/// sum_{j=1}^{m} C(m,j)(b^{m+1-j} - b^j + 1) c_{m-j} = b((b+1)^m - b^m),
/// the m-th relation determining c_{m-1}; c_0 = b.
pub fn special_c_table(base: u32, order: usize) -> Result<MomentTable, Error> {
    if base < 2 {
        return Err(Error::BaseTooSmall(base));
    }
    let spec = ProblemSpec::new(base, &[base - 1])?;
    let b = BigInt::from(base);
    let mut c: Vec<BigRational> = vec![BigRational::from_integer(b.clone())];
    for m in 2..=(order + 1) {
        // solve relation m for c_{m-1}; the j=1 coefficient is m (b^m - b + 1)
        let bm = b.pow(m as u32);
        let rhs = &b * ((&b + BigInt::one()).pow(m as u32) - &bm);
        let mut acc = BigRational::from_integer(rhs);
        let mut binom = BigInt::from(m); // C(m, j)
        for j in 2..=m {
            binom = binom * BigInt::from(m - j + 1) / BigInt::from(j);
            let coef = b.pow((m + 1 - j) as u32) - b.pow(j as u32) + BigInt::one();
            acc -= BigRational::from_integer(&binom * coef) * &c[m - j];
        }
        let lead = BigInt::from(m as u64) * (&bm - &b + BigInt::one());
        c.push(acc / BigRational::from_integer(lead));
    }
    Ok(MomentTable { spec, shift: 1, values: c, method: RecurrenceMethod::Special })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MomentFamily {
    /// E = {0}: returns (u_1/b^2, u_2/b^3)
    ZeroExcluded,
    /// E = {b-1}: returns (v_1/b^2, v_2/b^3)
    TopExcluded,
}

/// The paper's printed closed forms for the first two moments, valid only for
/// E = {0} and E = {b-1}.
pub fn closed_form_low_moments(
    spec: &ProblemSpec,
) -> Result<(MomentFamily, BigRational, BigRational), Error> {
    let b = BigInt::from(spec.base());
    let one = BigInt::one();
    let q2 = &b * &b - &b + &one; // b^2 - b + 1
    let q3 = &b * &b * &b - &b + &one; // b^3 - b + 1
    if spec.excluded() == [0] {
        // u1/b^2 = 1/(2b) - 1/(2b(b^2-b+1))
        let m1 = BigRational::new(one.clone(), BigInt::from(2) * &b)
            - BigRational::new(one.clone(), BigInt::from(2) * &b * &q2);
        // u2/b^3 = 1/(3b^2) - (5b^2-5b+2)/(6b^2(b^2-b+1)(b^3-b+1))
        let m2 = BigRational::new(one.clone(), BigInt::from(3) * &b * &b)
            - BigRational::new(
                BigInt::from(5) * &b * &b - BigInt::from(5) * &b + BigInt::from(2),
                BigInt::from(6) * &b * &b * &q2 * &q3,
            );
        Ok((MomentFamily::ZeroExcluded, m1, m2))
    } else if spec.excluded() == [spec.base() - 1] {
        // v1/b^2 = 1/(2b) + (2b-1)/(2b(b^2-b+1))
        let m1 = BigRational::new(one.clone(), BigInt::from(2) * &b)
            + BigRational::new(BigInt::from(2) * &b - &one, BigInt::from(2) * &b * &q2);
        // v2/b^3 = 1/(3b^2) + (6b^4-5b^2+5b-2)/(6b^2(b^2-b+1)(b^3-b+1))
        let b2 = &b * &b;
        let m2 = BigRational::new(one.clone(), BigInt::from(3) * &b2)
            + BigRational::new(
                BigInt::from(6) * &b2 * &b2 - BigInt::from(5) * &b2 + BigInt::from(5) * &b
                    - BigInt::from(2),
                BigInt::from(6) * &b2 * &q2 * &q3,
            );
        Ok((MomentFamily::TopExcluded, m1, m2))
    } else {
        let digits: Vec<String> = spec.excluded().iter().map(|d| d.to_string()).collect();
        Err(Error::UnsupportedExcludedSet(digits.join(",")))
    }
}
