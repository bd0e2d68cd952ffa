//! Digit-set problem instances and the derived index sets used by every formula.

use crate::error::Error;

/// A base together with an excluded digit set and everything derived from it.
///
/// `E1` is `E` with the digit 0 replaced by `b`, and `F = { b - a : a in E1 }`
/// is the set of shifts indexing the zeta series.  All digit sequences are
/// kept sorted ascending so downstream iteration order is deterministic.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProblemSpec {
    base: u32,
    excluded: Vec<u32>,
    admissible: Vec<u32>,
    e1: Vec<u32>,
    shifts: Vec<u32>,
}

impl ProblemSpec {
    pub fn new(base: u32, excluded_digits: &[u32]) -> Result<Self, Error> {
        if base < 2 {
            return Err(Error::BaseTooSmall(base));
        }
        if excluded_digits.is_empty() {
            return Err(Error::EmptyExcludedSet);
        }
        let mut excluded: Vec<u32> = excluded_digits.to_vec();
        excluded.sort_unstable();
        excluded.dedup();
        for &d in &excluded {
            if d >= base {
                return Err(Error::DigitOutOfRange { digit: d, base });
            }
        }
        let admissible: Vec<u32> = (0..base).filter(|d| !excluded.contains(d)).collect();
        let mut e1: Vec<u32> = excluded
            .iter()
            .map(|&d| if d == 0 { base } else { d })
            .collect();
        e1.sort_unstable();
        let mut shifts: Vec<u32> = e1.iter().map(|&a| base - a).collect();
        shifts.sort_unstable();
        Ok(ProblemSpec { base, excluded, admissible, e1, shifts })
    }

    pub fn base(&self) -> u32 {
        self.base
    }

    /// Excluded digits E, ascending.
    pub fn excluded(&self) -> &[u32] {
        &self.excluded
    }

    /// Admissible digits A = {0..b-1} \ E, ascending.
    pub fn admissible(&self) -> &[u32] {
        &self.admissible
    }

    /// E with 0 replaced by b; every element lies in {1..b}.
    pub fn e1(&self) -> &[u32] {
        &self.e1
    }

    /// F = { b - a : a in E1 }, the shifts indexing the zeta series.
    pub fn shifts(&self) -> &[u32] {
        &self.shifts
    }

    /// #A
    pub fn n_admissible(&self) -> u32 {
        self.admissible.len() as u32
    }

    /// p = #E
    pub fn p_excluded(&self) -> u32 {
        self.excluded.len() as u32
    }

    /// True when A is empty or {0}; then K(b,E) is an empty sum and equals 0.
    pub fn is_degenerate(&self) -> bool {
        self.admissible.iter().all(|&a| a == 0)
    }

    /// Compact display form like `K(10,{0,9})`.
    pub fn label(&self) -> String {
        let digits: Vec<String> = self.excluded.iter().map(|d| d.to_string()).collect();
        format!("K({},{{{}}})", self.base, digits.join(","))
    }
}

pub fn make_problem(base: u32, excluded_digits: &[u32]) -> Result<ProblemSpec, Error> {
    ProblemSpec::new(base, excluded_digits)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn classic_kempner() {
        let s = make_problem(10, &[9]).unwrap();
        assert_eq!(s.admissible(), (0..9).collect::<Vec<_>>());
        assert_eq!(s.e1(), &[9]);
        assert_eq!(s.shifts(), &[1]);
        assert_eq!(s.n_admissible(), 9);
        assert_eq!(s.p_excluded(), 1);
        assert!(!s.is_degenerate());
    }

    #[test]
    fn zero_excluded_maps_to_base() {
        let s = make_problem(10, &[0]).unwrap();
        assert_eq!(s.e1(), &[10]);
        assert_eq!(s.shifts(), &[0]);
        assert_eq!(s.n_admissible(), 9);
    }

    #[test]
    fn all_digits_excluded_in_base_two() {
        let s = make_problem(2, &[0, 1]).unwrap();
        assert!(s.admissible().is_empty());
        assert_eq!(s.e1(), &[1, 2]);
        assert_eq!(s.shifts(), &[0, 1]);
        assert_eq!(s.n_admissible(), 0);
        assert_eq!(s.p_excluded(), 2);
        assert!(s.is_degenerate());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(make_problem(1, &[0]), Err(Error::BaseTooSmall(1))));
        assert!(matches!(make_problem(10, &[]), Err(Error::EmptyExcludedSet)));
        assert!(matches!(
            make_problem(10, &[10]),
            Err(Error::DigitOutOfRange { digit: 10, base: 10 })
        ));
    }

    #[test]
    fn zero_in_f_iff_zero_in_e() {
        for b in 2..12 {
            for mask in 1u32..(1 << b) {
                let e: Vec<u32> = (0..b).filter(|d| mask & (1 << d) != 0).collect();
                let s = make_problem(b, &e).unwrap();
                assert_eq!(s.shifts().contains(&0), e.contains(&0));
            }
        }
    }

    proptest! {
        #[test]
        fn e1_and_f_are_bijective_images(b in 2u32..20, seed in 0u32..u32::MAX) {
            let mask = seed % ((1u32 << b.min(20)) - 1) + 1;
            let e: Vec<u32> = (0..b).filter(|d| mask & (1u32 << (d % 20)) != 0).collect();
            prop_assume!(!e.is_empty());
            let s = make_problem(b, &e).unwrap();
            prop_assert_eq!(s.e1().len(), e.len());
            prop_assert_eq!(s.shifts().len(), e.len());
            for &a in s.e1() {
                prop_assert!(a >= 1 && a <= b);
            }
            for &d in s.shifts() {
                prop_assert!(d < b);
            }
            // identical inputs give identical outputs
            let s2 = make_problem(b, &e).unwrap();
            prop_assert_eq!(s, s2);
        }
    }
}
