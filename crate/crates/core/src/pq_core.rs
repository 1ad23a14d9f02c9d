//! (p,q)-integers, factorials, binomial coefficients and the (p,q)-power
//! `(1-x)^n_{p,q}`.
//!
//! Every routine here is total on its documented domain. `[n]_{p,q}` is
//! always evaluated as the homogeneous sum `p^{n-1} + p^{n-2} q + ... +
//! q^{n-1}`; the quotient `(p^n - q^n)/(p - q)` is never used because it
//! cancels catastrophically as `q -> p`.

use serde::Serialize;

use crate::compensated::{DoubleDouble, NeumaierSum};
use crate::error::{Error, Result};

/// Which branch of the piecewise `[n]_{p,q}` definition applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PairMode {
    /// `q < p`.
    Strict,
    /// `q = p < 1`; `[n] = n p^{n-1}`.
    Equal,
    /// `p = q = 1`; `[n] = n`.
    Classical,
}

/// A validated deformation pair with `0 < q <= p <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PQPair {
    p: f64,
    q: f64,
    mode: PairMode,
}

impl PQPair {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p.is_finite() && q.is_finite()) || q <= 0.0 || q > p || p > 1.0 {
            return Err(Error::InvalidPair { p, q });
        }
        let mode = if q < p {
            PairMode::Strict
        } else if p == 1.0 {
            PairMode::Classical
        } else {
            PairMode::Equal
        };
        Ok(Self { p, q, mode })
    }

    pub fn classical() -> Self {
        Self {
            p: 1.0,
            q: 1.0,
            mode: PairMode::Classical,
        }
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn q(&self) -> f64 {
        self.q
    }

    #[inline]
    pub fn mode(&self) -> PairMode {
        self.mode
    }

    /// `p - q`, exactly zero outside strict mode.
    #[inline]
    pub fn gap(&self) -> f64 {
        match self.mode {
            PairMode::Strict => self.p - self.q,
            _ => 0.0,
        }
    }
}

/// `[n]_{p,q}` together with its index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PQInteger {
    pub n: usize,
    pub value: f64,
}

impl PQInteger {
    pub fn new(n: usize, pq: PQPair) -> Self {
        Self {
            n,
            value: pq_int(n, pq),
        }
    }
}

#[inline]
pub(crate) fn powi(base: f64, exp: usize) -> f64 {
    match i32::try_from(exp) {
        Ok(e) => base.powi(e),
        Err(_) => base.powf(exp as f64),
    }
}

#[inline]
pub(crate) fn triangular(m: usize) -> usize {
    if m == 0 {
        0
    } else {
        m * (m - 1) / 2
    }
}

/// `sum_{i=0}^{n-1} p^{n-1-i} q^i` by compensated summation, with no branch
/// shortcuts. The general route behind [`pq_int`].
pub fn homogeneous_sum(n: usize, p: f64, q: f64) -> f64 {
    (0..n)
        .map(|i| powi(p, n - 1 - i) * powi(q, i))
        .collect::<NeumaierSum>()
        .total()
}

/// The (p,q)-integer `[n]_{p,q}`, honoring all four branches of its
/// piecewise definition.
pub fn pq_int(n: usize, pq: PQPair) -> f64 {
    if n == 0 {
        return 0.0;
    }
    match pq.mode {
        PairMode::Classical => n as f64,
        PairMode::Equal => n as f64 * powi(pq.p, n - 1),
        PairMode::Strict if pq.p == 1.0 => homogeneous_sum(n, 1.0, pq.q),
        PairMode::Strict => homogeneous_sum(n, pq.p, pq.q),
    }
}

/// `[0], [1], ..., [n]`.
pub fn pq_int_table(n: usize, pq: PQPair) -> Vec<f64> {
    (0..=n).map(|k| pq_int(k, pq)).collect()
}

/// `[n]_{p,q}! = [1][2]...[n]`, with `[0]! = 1`.
pub fn pq_factorial(n: usize, pq: PQPair) -> f64 {
    (1..=n).map(|i| pq_int(i, pq)).product()
}

/// The (p,q)-binomial coefficient, evaluated by the multiplicative
/// recurrence `prod_{i=1}^{k} [n-k+i]/[i]` over the shorter side.
pub fn pq_binomial(n: usize, k: usize, pq: PQPair) -> Result<f64> {
    if k > n {
        return Err(Error::BinomialIndex { n, k });
    }
    let k = k.min(n - k);
    let ints = pq_int_table(n, pq);
    Ok(binomial_from_table(&ints, n, k))
}

fn binomial_from_table(ints: &[f64], n: usize, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * (ints[n - k + i] / ints[i]))
}

/// Full row `[n choose 0..=n]_{p,q}`.
pub fn pq_binomial_row(n: usize, pq: PQPair) -> Vec<f64> {
    let ints = pq_int_table(n, pq);
    (0..=n)
        .map(|k| binomial_from_table(&ints, n, k.min(n - k)))
        .collect()
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(x))
    }
}

/// `(1-x)^n_{p,q} = prod_{s=0}^{n-1} (p^s - q^s x)`.
///
/// Each factor is formed with a single rounding (`fma`) and is nonnegative
/// on the domain since `p^s >= q^s` and `x <= 1`.
pub fn pq_one_minus_x_pow(n: usize, x: f64, pq: PQPair) -> Result<f64> {
    check_unit(x)?;
    Ok(one_minus_x_pow_unchecked(n, x, pq))
}

pub(crate) fn one_minus_x_pow_unchecked(n: usize, x: f64, pq: PQPair) -> f64 {
    (0..n)
        .map(|s| (-powi(pq.q, s)).mul_add(x, powi(pq.p, s)).max(0.0))
        .product()
}

/// Alternating-sum expansion
/// `sum_k (-1)^k p^{(n-k)(n-k-1)/2} q^{k(k-1)/2} [n choose k]_{p,q} x^k`
/// of `(1-x)^n_{p,q}`.
///
/// This is an independent route to the same value as
/// [`pq_one_minus_x_pow`] and exists to cross-check it. Terms reach ~5e6 at
/// `p = q = 1, n = 25`, so the binomials (built by the (p,q)-Pascal rule
/// `[m+1 choose k] = p^{m+1-k} [m choose k-1] + q^k [m choose k]`), powers
/// and the sum are all carried in double-double.
pub fn pq_one_minus_x_expansion(n: usize, x: f64, pq: PQPair) -> Result<f64> {
    check_unit(x)?;
    let p = DoubleDouble::from(pq.p);
    let q = DoubleDouble::from(pq.q);
    let ppow: Vec<DoubleDouble> = (0..=n).map(|s| p.powi(s as u32)).collect();
    let qpow: Vec<DoubleDouble> = (0..=n).map(|s| q.powi(s as u32)).collect();

    let mut row = vec![DoubleDouble::ONE];
    for m in 0..n {
        let mut next = vec![DoubleDouble::ONE; m + 2];
        for k in 1..=m {
            next[k] = ppow[m + 1 - k] * row[k - 1] + qpow[k] * row[k];
        }
        row = next;
    }

    let xd = DoubleDouble::from(x);
    let mut total = DoubleDouble::ZERO;
    for (k, binom) in row.iter().enumerate() {
        let term = p.powi(triangular(n - k) as u32)
            * q.powi(triangular(k) as u32)
            * *binom
            * xd.powi(k as u32);
        total = if k % 2 == 0 {
            total + term
        } else {
            total - term
        };
    }
    Ok(total.to_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn pair(p: f64, q: f64) -> PQPair {
        PQPair::new(p, q).unwrap()
    }

    #[test]
    fn pair_validation() {
        assert_eq!(pair(0.9, 0.8).mode(), PairMode::Strict);
        assert_eq!(pair(0.7, 0.7).mode(), PairMode::Equal);
        assert_eq!(pair(1.0, 1.0).mode(), PairMode::Classical);
        assert_eq!(pair(1.0, 0.5).mode(), PairMode::Strict);
        for (p, q) in [
            (0.8, 0.9),
            (1.1, 0.5),
            (0.5, 0.0),
            (0.5, -0.1),
            (f64::NAN, 0.5),
        ] {
            assert!(matches!(PQPair::new(p, q), Err(Error::InvalidPair { .. })));
        }
        assert_eq!(pair(0.7, 0.7).gap(), 0.0);
    }

    #[test]
    fn pq_int_examples() {
        assert_eq!(pq_int(0, pair(0.9, 0.8)), 0.0);
        assert_eq!(pq_int(5, PQPair::classical()), 5.0);
        // 0.81 + 0.72 + 0.64; high-precision quotient (p^3-q^3)/(p-q) = 2.17.
        assert_relative_eq!(pq_int(3, pair(0.9, 0.8)), 2.17, max_relative = 1e-15);
        assert_relative_eq!(pq_int(4, pair(1.0, 0.5)), 1.875, max_relative = 1e-15);
    }

    #[test]
    fn pq_int_equal_branch_matches_sum() {
        for p in [0.3, 0.7, 0.95, 0.999_999] {
            for n in 1..=200 {
                let branch = pq_int(n, pair(p, p));
                let summed = homogeneous_sum(n, p, p);
                assert_relative_eq!(branch, summed, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn pq_int_is_stable_as_q_approaches_p() {
        // The quotient form would return garbage here.
        let p = 0.9;
        let q = 0.9 - 1e-13;
        let v = pq_int(10, pair(p, q));
        let limit = 10.0 * p.powi(9);
        assert_relative_eq!(v, limit, max_relative = 1e-11);
    }

    #[test]
    fn pq_int_is_not_monotone_for_p_below_one() {
        // [n+1] - [n] = p^n - (1-q)[n], and [n] -> 0 as n grows when p < 1.
        let pq = pair(0.9, 0.8);
        let table = pq_int_table(60, pq);
        let peak = (1..=60)
            .max_by(|&a, &b| table[a].total_cmp(&table[b]))
            .unwrap();
        assert!(peak > 1 && peak < 60);
        assert!(table[60] < table[peak]);
    }

    #[test]
    fn factorial_examples() {
        assert_eq!(pq_factorial(0, pair(0.9, 0.8)), 1.0);
        assert_eq!(pq_factorial(3, PQPair::classical()), 6.0);
        assert_relative_eq!(pq_factorial(3, pair(0.9, 0.8)), 3.689, max_relative = 1e-15);
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(pq_binomial(4, 0, pair(0.9, 0.8)).unwrap(), 1.0);
        assert_eq!(pq_binomial(3, 1, PQPair::classical()).unwrap(), 3.0);
        assert_relative_eq!(
            pq_binomial(2, 1, pair(0.9, 0.8)).unwrap(),
            1.7,
            max_relative = 1e-15
        );
        assert!(matches!(
            pq_binomial(3, 4, PQPair::classical()),
            Err(Error::BinomialIndex { n: 3, k: 4 })
        ));
    }

    #[test]
    fn binomial_matches_factorial_quotient() {
        for (p, q) in [
            (1.0, 1.0),
            (1.0, 0.9),
            (0.95, 0.9),
            (0.9, 0.8),
            (0.7, 0.7),
            (0.6, 0.2),
        ] {
            let pq = pair(p, q);
            for n in 0..=20 {
                for k in 0..=n {
                    let direct =
                        pq_factorial(n, pq) / (pq_factorial(k, pq) * pq_factorial(n - k, pq));
                    assert_relative_eq!(
                        pq_binomial(n, k, pq).unwrap(),
                        direct,
                        max_relative = 1e-11
                    );
                }
            }
        }
    }

    #[test]
    fn classical_binomial_is_integer() {
        let mut row = vec![1u64];
        for n in 1..=30usize {
            let mut next = vec![1u64; n + 1];
            for k in 1..n {
                next[k] = row[k - 1] + row[k];
            }
            row = next;
            let ours = pq_binomial_row(n, PQPair::classical());
            for k in 0..=n {
                let exact = row[k] as f64;
                assert!((ours[k] - exact).abs() <= 0.5 * exact * f64::EPSILON * n as f64);
                assert_eq!(ours[k].round(), exact);
            }
        }
    }

    #[test]
    fn one_minus_x_examples() {
        let pq = pair(0.9, 0.8);
        assert_eq!(pq_one_minus_x_pow(0, 0.7, pq).unwrap(), 1.0);
        assert_relative_eq!(
            pq_one_minus_x_pow(2, 0.5, pq).unwrap(),
            0.25,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            pq_one_minus_x_pow(3, 0.0, pq).unwrap(),
            0.9f64.powi(3),
            max_relative = 1e-15
        );
        assert_relative_eq!(
            pq_one_minus_x_expansion(2, 0.5, pq).unwrap(),
            0.25,
            max_relative = 1e-12
        );
        assert_eq!(pq_one_minus_x_expansion(0, 0.3, pq).unwrap(), 1.0);
        assert_relative_eq!(
            pq_one_minus_x_expansion(1, 0.3, pq).unwrap(),
            0.7,
            max_relative = 1e-15
        );
        assert!(pq_one_minus_x_pow(2, 1.5, pq).is_err());
        assert!(pq_one_minus_x_expansion(2, -0.1, pq).is_err());
    }

    fn admissible_pair() -> impl Strategy<Value = PQPair> {
        (0.05f64..=1.0, 0.0f64..=1.0, 0u8..4).prop_map(|(p, t, kind)| match kind {
            0 => PQPair::classical(),
            1 => pair(p, p),
            _ => pair(p, (p * t).max(1e-3 * p)),
        })
    }

    proptest! {
        #[test]
        fn product_and_expansion_agree(pq in admissible_pair(), n in 0usize..=25, i in 0usize..=100) {
            let x = i as f64 / 100.0;
            let prod = pq_one_minus_x_pow(n, x, pq).unwrap();
            let sum = pq_one_minus_x_expansion(n, x, pq).unwrap();
            prop_assert!(prod >= 0.0);
            prop_assert!((prod - sum).abs() <= 1e-10 * prod.abs().max(1.0),
                "n={} x={} prod={} sum={}", n, x, prod, sum);
        }

        #[test]
        fn pq_int_strictly_increasing_when_p_is_one(q in 0.01f64..=1.0, n in 0usize..500) {
            let pq = pair(1.0, q);
            // The increment q^n vanishes below an ulp of [n].
            if q.powi(n as i32) > 1e-15 {
                prop_assert!(pq_int(n + 1, pq) > pq_int(n, pq));
            } else {
                prop_assert!(pq_int(n + 1, pq) >= pq_int(n, pq));
            }
        }

        #[test]
        fn binomial_is_symmetric(pq in admissible_pair(), n in 0usize..40, k in 0usize..40) {
            prop_assume!(k <= n);
            let a = pq_binomial(n, k, pq).unwrap();
            let b = pq_binomial(n, n - k, pq).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
