//! Alternative printed forms of three closed-form expressions, kept so
//! their numerical disagreement with the implemented forms can be measured
//! and reported. None of these are used by the operators themselves.
//!
//! All of them coincide with the implemented forms when `p = 1`.

use crate::error::{Error, Result};
use crate::operators::king_condition;
use crate::pq_core::{powi, pq_int, PQPair};

/// Lupaş second moment with the correction denominator read as
/// `p(1 - x + qx)` instead of `p(1-x) + qx`.
pub fn lupas_second_moment_printed(n: usize, pq: PQPair, x: f64) -> f64 {
    let (p, q) = (pq.p(), pq.q());
    let a = powi(p, n - 1) / pq_int(n, pq);
    x * x + x * (1.0 - x) * a - x * x * pq.gap() * (1.0 - x) / (p * (1.0 - x + q * x)) * (1.0 - a)
}

fn printed_parts(n: usize, pq: PQPair, x: f64, inner: f64) -> (f64, f64) {
    let (p, q) = (pq.p(), pq.q());
    let big_n = pq_int(n, pq);
    let gap = pq.gap();
    let pn = powi(p, n);
    let lead = pn + x * x * big_n * gap;
    let radicand = pn * pn + powi(x, 4) * big_n * big_n * gap * gap + 2.0 * x * x * big_n * inner;
    let den = 2.0 * (powi(p, n - 1) * q - pn + q * q * pq_int(n - 1, pq));
    ((-lead + radicand.sqrt()) / den, den)
}

fn admissible(n: usize, pq: PQPair) -> Result<()> {
    if king_condition(n, pq)? {
        Ok(())
    } else {
        let (lhs, rhs) = crate::operators::king_condition_sides(n, pq);
        Err(Error::KingCondition {
            n,
            p: pq.p(),
            q: pq.q(),
            lhs,
            rhs,
        })
    }
}

/// The root formula with discriminant term
/// `2x^2[n](2pq([n]-1) - p^n(p-q))`. Preserves `e2` only when `p = 1`.
pub fn king_rn_printed(n: usize, pq: PQPair, x: f64) -> Result<f64> {
    admissible(n, pq)?;
    let (p, q) = (pq.p(), pq.q());
    let inner = 2.0 * p * q * (pq_int(n, pq) - 1.0) - powi(p, n) * pq.gap();
    Ok(printed_parts(n, pq, x, inner).0)
}

/// Modulus argument for the King bound written as
/// `sqrt(2x^2 + x * (bracket))`, the bracket being the negated root formula
/// with inner term `2pq([n]-1) - p^n(p-q)`.
pub fn king_delta_printed_long(n: usize, pq: PQPair, x: f64) -> Result<f64> {
    let r = king_rn_printed(n, pq, x)?;
    Ok((2.0 * x * x - x * r).max(0.0).sqrt())
}

/// Same with the inner term read as `p^n(p-q)` alone.
pub fn king_delta_printed_short(n: usize, pq: PQPair, x: f64) -> Result<f64> {
    admissible(n, pq)?;
    let inner = powi(pq.p(), n) * pq.gap();
    let r = printed_parts(n, pq, x, inner).0;
    Ok((2.0 * x * x - x * r).max(0.0).sqrt())
}
