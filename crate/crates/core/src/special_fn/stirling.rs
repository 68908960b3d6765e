use serde::Serialize;

use crate::error::{Error, Result};

/// Largest order for which the tables are built. Every entry of both kinds
/// fits comfortably in an `i128` here (the largest is |s(30,1)| = 29!).
pub const STIRLING_MAX_ORDER: usize = 30;

/// Stirling numbers of both kinds up to a fixed order, stored as exact integers.
///
/// `second_kind[l][j]` is S(l, j), the number of partitions of an l-set into j
/// blocks; `first_kind_signed[l][j]` is s(l, j), the coefficient of λ^j in the
/// falling factorial (λ)_l.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StirlingTable {
    max_order: usize,
    second_kind: Vec<Vec<i128>>,
    first_kind_signed: Vec<Vec<i128>>,
}

impl StirlingTable {
    pub fn new(l_max: usize) -> Result<Self> {
        if l_max > STIRLING_MAX_ORDER {
            return Err(Error::Capacity(format!(
                "Stirling tables are limited to order {STIRLING_MAX_ORDER}, requested {l_max}"
            )));
        }
        let overflow = || Error::Capacity("Stirling recurrence overflowed".into());
        let mut second = vec![vec![0i128; l_max + 1]; l_max + 1];
        let mut first = vec![vec![0i128; l_max + 1]; l_max + 1];
        second[0][0] = 1;
        first[0][0] = 1;
        for l in 1..=l_max {
            let prev = (l - 1) as i128;
            for j in 1..=l {
                // S(l,j) = j S(l-1,j) + S(l-1,j-1)
                second[l][j] = (j as i128)
                    .checked_mul(second[l - 1][j])
                    .and_then(|v| v.checked_add(second[l - 1][j - 1]))
                    .ok_or_else(overflow)?;
                // s(l,j) = s(l-1,j-1) - (l-1) s(l-1,j)
                first[l][j] = prev
                    .checked_mul(first[l - 1][j])
                    .and_then(|v| first[l - 1][j - 1].checked_sub(v))
                    .ok_or_else(overflow)?;
            }
        }
        Ok(StirlingTable { max_order: l_max, second_kind: second, first_kind_signed: first })
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// S(l, j); zero outside 0 <= j <= l.
    pub fn second(&self, l: usize, j: usize) -> i128 {
        if l > self.max_order || j > l {
            return 0;
        }
        self.second_kind[l][j]
    }

    /// s(l, j); zero outside 0 <= j <= l.
    pub fn first_signed(&self, l: usize, j: usize) -> i128 {
        if l > self.max_order || j > l {
            return 0;
        }
        self.first_kind_signed[l][j]
    }

    pub fn second_row(&self, l: usize) -> &[i128] {
        &self.second_kind[l][..=l]
    }

    pub fn first_signed_row(&self, l: usize) -> &[i128] {
        &self.first_kind_signed[l][..=l]
    }

    pub(crate) fn require(&self, order: usize) -> Result<()> {
        if order > self.max_order {
            return Err(Error::Capacity(format!(
                "Stirling table covers order {}, need {order}",
                self.max_order
            )));
        }
        Ok(())
    }
}

/// Monomial coefficients of the falling factorial (λ)_l = λ(λ-1)...(λ-l+1),
/// lowest degree first, by direct polynomial multiplication.
pub fn falling_factorial_coeffs(l: usize) -> Result<Vec<i128>> {
    if l > STIRLING_MAX_ORDER {
        return Err(Error::Capacity(format!(
            "falling factorials are limited to order {STIRLING_MAX_ORDER}, requested {l}"
        )));
    }
    let mut poly = vec![1i128];
    for j in 0..l {
        let shift = j as i128;
        let mut next = vec![0i128; poly.len() + 1];
        for (deg, &c) in poly.iter().enumerate() {
            next[deg + 1] += c;
            next[deg] -= shift * c;
        }
        poly = next;
    }
    Ok(poly)
}

/// Binomial coefficient C(n, k) as an exact integer.
pub fn binomial(n: usize, k: usize) -> i128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: i128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as i128 / (i + 1) as i128;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell_triangle(n: usize) -> Vec<i128> {
        // Bell numbers B_0..=B_n via the Aitken array
        let mut bells = vec![1i128];
        let mut row = vec![1i128];
        for _ in 0..n {
            let mut next = vec![*row.last().unwrap()];
            for &v in &row {
                let last = *next.last().unwrap();
                next.push(last + v);
            }
            bells.push(next[0]);
            row = next;
        }
        bells
    }

    #[test]
    fn small_values() {
        let t = StirlingTable::new(5).unwrap();
        assert_eq!(t.second(0, 0), 1);
        assert_eq!(t.second(3, 2), 3);
        assert_eq!(t.first_signed(3, 2), -3);
        assert_eq!(t.second(4, 7), 0);
        assert_eq!(t.first_signed_row(3), &[0, 2, -3, 1]);
    }

    #[test]
    fn diagonals_and_vanishing_above() {
        let t = StirlingTable::new(STIRLING_MAX_ORDER).unwrap();
        for l in 0..=STIRLING_MAX_ORDER {
            assert_eq!(t.second(l, l), 1);
            assert_eq!(t.first_signed(l, l), 1);
            assert_eq!(t.second(l, l + 1), 0);
        }
    }

    #[test]
    fn inversion_is_exact() {
        let t = StirlingTable::new(20).unwrap();
        for l in 0..=20 {
            for m in 0..=20 {
                let sum: i128 = (0..=20).map(|j| t.first_signed(l, j) * t.second(j, m)).sum();
                assert_eq!(sum, i128::from(l == m), "l={l} m={m}");
            }
        }
    }

    #[test]
    fn row_sums_are_bell_numbers() {
        let t = StirlingTable::new(STIRLING_MAX_ORDER).unwrap();
        let bells = bell_triangle(STIRLING_MAX_ORDER);
        for (l, bell) in bells.iter().enumerate() {
            assert_eq!(t.second_row(l).iter().sum::<i128>(), *bell, "l={l}");
        }
    }

    #[test]
    fn falling_factorials_match_first_kind_rows() {
        assert_eq!(falling_factorial_coeffs(0).unwrap(), vec![1]);
        assert_eq!(falling_factorial_coeffs(2).unwrap(), vec![0, -1, 1]);
        assert_eq!(falling_factorial_coeffs(3).unwrap(), vec![0, 2, -3, 1]);
        let t = StirlingTable::new(STIRLING_MAX_ORDER).unwrap();
        for l in 0..=STIRLING_MAX_ORDER {
            assert_eq!(falling_factorial_coeffs(l).unwrap(), t.first_signed_row(l));
        }
    }

    #[test]
    fn first_kind_evaluates_falling_factorial() {
        let t = StirlingTable::new(12).unwrap();
        for l in 0..=12usize {
            for m in -3i128..=12 {
                let poly: i128 = (0..=l).map(|j| t.first_signed(l, j) * m.pow(j as u32)).sum();
                let direct: i128 = (0..l as i128).map(|j| m - j).product();
                assert_eq!(poly, direct);
            }
        }
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(StirlingTable::new(STIRLING_MAX_ORDER + 1), Err(Error::Capacity(_))));
        assert!(falling_factorial_coeffs(STIRLING_MAX_ORDER + 1).is_err());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(30, 15), 155_117_520);
    }
}
