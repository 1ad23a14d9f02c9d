//! Moments `L(e_j; x)` for `j = 0, 1, 2`, both by direct evaluation and in
//! closed form, and the second central moment that drives the error bounds.

use rayon::prelude::*;
use serde::Serialize;

use crate::audit;
use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::functions::TargetFunction;
use crate::operators::{king_rn, Family, Operator, OperatorSpec};
use crate::output::{num, Tabular};
use crate::pq_core::{powi, pq_int, PQPair};

fn check_order(j: u32) -> Result<()> {
    if j <= 2 {
        Ok(())
    } else {
        Err(Error::MomentOrder(j))
    }
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(x))
    }
}

/// The operator of `spec` applied to `e_j` at `x`.
pub fn moment_numeric(spec: &OperatorSpec, j: u32, x: f64) -> Result<f64> {
    check_order(j)?;
    Operator::new(*spec)?.apply(&TargetFunction::monomial(j), x)
}

/// Closed-form Lupaş moments:
///
/// ```text
/// L(e0) = 1,  L(e1) = x,
/// L(e2) = x^2 + x(1-x) p^{n-1}/[n]
///             - x^2 (p-q)(1-x) / (p(1-x) + qx) * (1 - p^{n-1}/[n])
/// ```
pub fn moment_closed_lupas(n: usize, pq: PQPair, j: u32, x: f64) -> Result<f64> {
    check_order(j)?;
    check_unit(x)?;
    if n == 0 {
        return Err(Error::InvalidDegree {
            family: Family::PqLupas,
            n,
            min: 1,
            max: crate::operators::MAX_DEGREE,
        });
    }
    Ok(match j {
        0 => 1.0,
        1 => x,
        _ => lupas_second_moment(n, pq, x),
    })
}

fn lupas_second_moment(n: usize, pq: PQPair, x: f64) -> f64 {
    let (p, q) = (pq.p(), pq.q());
    let a = powi(p, n - 1) / pq_int(n, pq);
    let y = 1.0 - x;
    let base = x * x + x * y * a;
    let gap = pq.gap();
    if gap == 0.0 {
        return base;
    }
    base - x * x * gap * y / (p * y + q * x) * (1.0 - a)
}

/// Closed-form moments of the King-modified operator: the Lupaş closed
/// forms evaluated at `r_n(x)`. The second one equals `x^2`.
pub fn moment_closed_king(n: usize, pq: PQPair, j: u32, x: f64) -> Result<f64> {
    check_order(j)?;
    let r = king_rn(n, pq, x)?;
    moment_closed_lupas(n, pq, j, r)
}

/// `L((t-x)^2; x) = m2 - 2x m1 + x^2 m0`, from numerically evaluated moments.
pub fn second_central_moment(spec: &OperatorSpec, x: f64) -> Result<f64> {
    let op = Operator::new(*spec)?;
    central_with(&op, x)
}

pub(crate) fn central_with(op: &Operator, x: f64) -> Result<f64> {
    let m = numeric_moments(op, x)?;
    Ok(m[2] - 2.0 * x * m[1] + x * x * m[0])
}

fn numeric_moments(op: &Operator, x: f64) -> Result<[f64; 3]> {
    let w = op.weights(x)?;
    let mut acc = [NeumaierSum::new(); 3];
    for (wk, t) in w.iter().zip(op.nodes()) {
        acc[0].add(*wk);
        acc[1].add(wk * t);
        acc[2].add(wk * t * t);
    }
    Ok(acc.map(|a| a.total()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentRecord {
    pub x: f64,
    pub numeric_m0: f64,
    pub numeric_m1: f64,
    pub numeric_m2: f64,
    pub closed_m0: f64,
    pub closed_m1: f64,
    pub closed_m2: f64,
    pub second_central: f64,
}

impl MomentRecord {
    pub fn max_discrepancy(&self) -> f64 {
        (self.numeric_m0 - self.closed_m0)
            .abs()
            .max((self.numeric_m1 - self.closed_m1).abs())
            .max((self.numeric_m2 - self.closed_m2).abs())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MomentReport {
    pub spec: OperatorSpec,
    pub x_grid: Vec<f64>,
    pub records: Vec<MomentRecord>,
    pub max_abs_discrepancy: f64,
}

/// Numeric versus closed-form moments over `grid`.
pub fn moment_report(spec: &OperatorSpec, grid: &[f64]) -> Result<MomentReport> {
    let closed: fn(usize, PQPair, u32, f64) -> Result<f64> = match spec.family() {
        Family::PqLupas => moment_closed_lupas,
        Family::KingLupas => moment_closed_king,
        Family::PqBernstein => return Err(Error::NoClosedForm(spec.family())),
    };
    let op = Operator::new(*spec)?;
    let (n, pq) = (spec.n(), spec.pq());
    let records = grid
        .par_iter()
        .map(|&x| {
            let m = numeric_moments(&op, x)?;
            Ok(MomentRecord {
                x,
                numeric_m0: m[0],
                numeric_m1: m[1],
                numeric_m2: m[2],
                closed_m0: closed(n, pq, 0, x)?,
                closed_m1: closed(n, pq, 1, x)?,
                closed_m2: closed(n, pq, 2, x)?,
                second_central: m[2] - 2.0 * x * m[1] + x * x * m[0],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_abs_discrepancy = records
        .iter()
        .map(MomentRecord::max_discrepancy)
        .fold(0.0, f64::max);
    Ok(MomentReport {
        spec: *spec,
        x_grid: grid.to_vec(),
        records,
        max_abs_discrepancy,
    })
}

impl Tabular for MomentReport {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "x",
            "m0_num",
            "m1_num",
            "m2_num",
            "m0_cf",
            "m1_cf",
            "m2_cf",
            "central2",
            "discrepancy",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                [
                    r.x,
                    r.numeric_m0,
                    r.numeric_m1,
                    r.numeric_m2,
                    r.closed_m0,
                    r.closed_m1,
                    r.closed_m2,
                    r.second_central,
                    r.max_discrepancy(),
                ]
                .into_iter()
                .map(num)
                .collect()
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RnRecord {
    pub x: f64,
    pub r: f64,
    /// The alternative printed root; agrees with `r` only when `p = 1`.
    pub r_printed: f64,
    /// `L*(e2; x) - x^2` by direct summation.
    pub e2_residual: f64,
    pub second_central: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RnReport {
    pub n: usize,
    pub pq: PQPair,
    pub records: Vec<RnRecord>,
}

/// The King substitution `r_n` over `grid` with its `e2` residual.
pub fn rn_report(n: usize, pq: PQPair, grid: &[f64]) -> Result<RnReport> {
    let op = Operator::new(OperatorSpec::new(Family::KingLupas, n, pq)?)?;
    let records = grid
        .par_iter()
        .map(|&x| {
            let m = numeric_moments(&op, x)?;
            Ok(RnRecord {
                x,
                r: king_rn(n, pq, x)?,
                r_printed: audit::king_rn_printed(n, pq, x)?,
                e2_residual: m[2] - x * x,
                second_central: m[2] - 2.0 * x * m[1] + x * x * m[0],
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RnReport { n, pq, records })
}

impl Tabular for RnReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["x", "r", "r_printed", "e2_residual", "central2"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                [r.x, r.r, r.r_printed, r.e2_residual, r.second_central]
                    .into_iter()
                    .map(num)
                    .collect()
            })
            .collect()
    }
}
