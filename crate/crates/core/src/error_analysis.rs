//! Modulus of continuity, quantitative error bounds for the Lupaş and King
//! operators, and the pointwise comparison of their bound arguments.
//!
//! For a positive operator `L` with `L(1) = 1`,
//! `|L(f;x) - f(x)| <= w(f;d) (1 + sqrt(L((t-x)^2;x)) / d)` for every
//! `d > 0`. Choosing `d` as the square root of the second central moment
//! gives `2 w(f;d)`, which is the form every bound here reduces to.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::TargetFunction;
use crate::operators::{king_condition, king_rn, Family, Operator, OperatorSpec};
use crate::output::{num, opt_num, Tabular};
use crate::pq_core::{pq_int, PQPair};

/// Default number of grid points for modulus estimation.
pub const DEFAULT_MODULUS_GRID: usize = 2001;
/// Slack used for the `satisfied` flag of a bound record.
pub const SATISFIED_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModulusEstimate {
    pub delta: f64,
    pub value: f64,
    pub grid_resolution: usize,
}

/// Grid estimate of `w(f; .)` for one function.
///
/// `lag_max[d]` holds `max_{i, e <= d} |f(x_{i+e}) - f(x_i)|` on a uniform
/// grid, so a query is a table lookup and the estimate is nondecreasing in
/// `delta` by construction. Pairs are restricted to grid points, so the
/// value never exceeds the true supremum: it is a lower estimate.
#[derive(Debug, Clone)]
pub struct ModulusTable {
    resolution: usize,
    lag_max: Vec<f64>,
}

impl ModulusTable {
    pub fn new(f: &TargetFunction, grid_resolution: usize) -> Result<Self> {
        if grid_resolution < 2 {
            return Err(Error::GridTooSmall(grid_resolution));
        }
        let last = (grid_resolution - 1) as f64;
        let values = (0..grid_resolution)
            .map(|i| f.eval(i as f64 / last))
            .collect::<Result<Vec<_>>>()?;
        let mut lag_max: Vec<f64> = (0..grid_resolution)
            .into_par_iter()
            .map(|d| {
                values
                    .iter()
                    .zip(&values[d..])
                    .map(|(a, b)| (b - a).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        for d in 1..lag_max.len() {
            lag_max[d] = lag_max[d].max(lag_max[d - 1]);
        }
        Ok(Self {
            resolution: grid_resolution,
            lag_max,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Largest grid lag `d` with `d h <= delta`.
    fn lag(&self, delta: f64) -> usize {
        let steps = delta * (self.resolution - 1) as f64;
        // A delta that is a grid multiple must not lose its last step to rounding.
        let lag = (steps * (1.0 + 1e-12)).floor();
        if lag >= (self.resolution - 1) as f64 {
            self.resolution - 1
        } else {
            lag as usize
        }
    }

    pub fn value(&self, delta: f64) -> Result<f64> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::NonPositiveDelta(delta));
        }
        Ok(self.lag_max[self.lag(delta)])
    }

    pub fn estimate(&self, delta: f64) -> Result<ModulusEstimate> {
        Ok(ModulusEstimate {
            delta,
            value: self.value(delta)?,
            grid_resolution: self.resolution,
        })
    }

    /// `w(f;delta) (delta_c/delta + 1)` with `delta_c = sqrt(x(1-x)/[n])`.
    pub fn classical_bound(&self, n: usize, pq: PQPair, x: f64, delta: f64) -> Result<f64> {
        let dc = delta_classical(n, pq, x)?;
        Ok(self.value(delta)? * (dc / delta + 1.0))
    }

    /// `2 w(f; delta)`; zero when `delta = 0`, where the operators
    /// interpolate exactly.
    pub fn two_omega(&self, delta: f64) -> Result<f64> {
        if delta == 0.0 {
            Ok(0.0)
        } else {
            Ok(2.0 * self.value(delta)?)
        }
    }

    /// `2 w(f; delta_king(n,p,q,x))`.
    pub fn king_bound(&self, n: usize, pq: PQPair, x: f64) -> Result<f64> {
        self.two_omega(delta_king(n, pq, x)?)
    }
}

/// Grid estimate of `w(f;delta) = sup_{|t-x| <= delta} |f(t) - f(x)|`.
pub fn modulus_of_continuity(
    f: &TargetFunction,
    delta: f64,
    grid_resolution: usize,
) -> Result<ModulusEstimate> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::NonPositiveDelta(delta));
    }
    ModulusTable::new(f, grid_resolution)?.estimate(delta)
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(x))
    }
}

/// `sqrt(x(1-x)/[n])`.
pub fn delta_classical(n: usize, pq: PQPair, x: f64) -> Result<f64> {
    check_unit(x)?;
    if n == 0 {
        return Err(Error::InvalidDegree {
            family: Family::PqLupas,
            n,
            min: 1,
            max: crate::operators::MAX_DEGREE,
        });
    }
    Ok((x * (1.0 - x) / pq_int(n, pq)).sqrt())
}

/// `sqrt(2x(x - r_n(x)))`, the square root of the King operator's second
/// central moment.
pub fn delta_king(n: usize, pq: PQPair, x: f64) -> Result<f64> {
    let r = king_rn(n, pq, x)?;
    Ok((2.0 * x * (x - r)).max(0.0).sqrt())
}

pub fn classical_bound(
    f: &TargetFunction,
    n: usize,
    pq: PQPair,
    x: f64,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::NonPositiveDelta(delta));
    }
    ModulusTable::new(f, DEFAULT_MODULUS_GRID)?.classical_bound(n, pq, x, delta)
}

pub fn king_bound(f: &TargetFunction, n: usize, pq: PQPair, x: f64) -> Result<f64> {
    let delta = delta_king(n, pq, x)?;
    if delta == 0.0 {
        return Ok(0.0);
    }
    ModulusTable::new(f, DEFAULT_MODULUS_GRID)?.two_omega(delta)
}

/// Bound argument for `spec`: `delta_king` for the King family,
/// `delta_classical` otherwise.
pub fn bound_delta(spec: &OperatorSpec, x: f64) -> Result<f64> {
    match spec.family() {
        Family::KingLupas => delta_king(spec.n(), spec.pq(), x),
        _ => delta_classical(spec.n(), spec.pq(), x),
    }
}

/// `M delta^rho` for `f ∈ Lip_M(rho)`.
pub fn lipschitz_bound(f: &TargetFunction, spec: &OperatorSpec, x: f64) -> Result<f64> {
    let lip = f
        .lipschitz()
        .ok_or_else(|| Error::MissingLipschitz(f.tag().to_string()))?;
    Ok(lip.m * bound_delta(spec, x)?.powf(lip.rho))
}

/// Which bound a [`BoundReport`] checks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// `2 w(f; delta)` with the family's delta.
    Modulus,
    /// `M delta^rho`.
    Lipschitz,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRecord {
    pub x: f64,
    pub actual_error: f64,
    pub bound_value: f64,
    pub satisfied: bool,
    /// `bound_value - actual_error`
    pub margin: f64,
    pub delta_classical: f64,
    /// Present when the King condition holds at this degree.
    pub delta_king: Option<f64>,
    pub king_wins: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub spec: OperatorSpec,
    pub f_tag: String,
    pub kind: BoundKind,
    pub records: Vec<BoundRecord>,
    pub min_margin: f64,
    pub all_satisfied: bool,
}

/// Pointwise actual error of `spec`'s operator on `f` against the bound of
/// `kind`, over `grid`.
pub fn bound_report(
    f: &TargetFunction,
    spec: &OperatorSpec,
    grid: &[f64],
    kind: BoundKind,
    modulus: &ModulusTable,
) -> Result<BoundReport> {
    let op = Operator::new(*spec)?;
    let (n, pq) = (spec.n(), spec.pq());
    let king_ok = n >= 2 && king_condition(n, pq)?;
    let records = grid
        .par_iter()
        .map(|&x| {
            let actual_error = (op.apply(f, x)? - f.eval(x)?).abs();
            let dc = delta_classical(n, pq, x)?;
            let dk = if king_ok {
                Some(delta_king(n, pq, x)?)
            } else {
                None
            };
            let bound_value = match kind {
                BoundKind::Modulus => modulus.two_omega(bound_delta(spec, x)?)?,
                BoundKind::Lipschitz => lipschitz_bound(f, spec, x)?,
            };
            let margin = bound_value - actual_error;
            Ok(BoundRecord {
                x,
                actual_error,
                bound_value,
                satisfied: actual_error <= bound_value + SATISFIED_SLACK,
                margin,
                delta_classical: dc,
                delta_king: dk,
                king_wins: dk.map(|d| d <= dc),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_margin = records
        .iter()
        .map(|r| r.margin)
        .fold(f64::INFINITY, f64::min);
    let all_satisfied = records.iter().all(|r| r.satisfied);
    Ok(BoundReport {
        spec: *spec,
        f_tag: f.tag().to_string(),
        kind,
        records,
        min_margin,
        all_satisfied,
    })
}

impl Tabular for BoundReport {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "x",
            "actual",
            "bound",
            "margin",
            "delta_classical",
            "delta_king",
            "king_wins",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                vec![
                    num(r.x),
                    num(r.actual_error),
                    num(r.bound_value),
                    num(r.margin),
                    num(r.delta_classical),
                    opt_num(r.delta_king),
                    r.king_wins.map(|w| w.to_string()).unwrap_or_default(),
                ]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompareRecord {
    pub x: f64,
    pub delta_classical: f64,
    pub delta_king: f64,
    pub king_wins: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompareReport {
    pub n: usize,
    pub pq: PQPair,
    pub records: Vec<CompareRecord>,
    /// Maximal runs `[first x, last x]` of consecutive grid points where
    /// the King argument is no larger than the classical one.
    pub win_intervals: Vec<[f64; 2]>,
}

impl CompareReport {
    /// Right end of the win interval that starts at the first grid point.
    pub fn initial_win_endpoint(&self) -> Option<f64> {
        let first = self.records.first()?.x;
        self.win_intervals
            .first()
            .filter(|iv| iv[0] == first)
            .map(|iv| iv[1])
    }
}

/// Pointwise comparison of `delta_king` against `delta_classical`.
pub fn subinterval_compare(n: usize, pq: PQPair, grid: &[f64]) -> Result<CompareReport> {
    OperatorSpec::new(Family::KingLupas, n, pq)?;
    let records = grid
        .par_iter()
        .map(|&x| {
            let delta_classical = delta_classical(n, pq, x)?;
            let delta_king = delta_king(n, pq, x)?;
            Ok(CompareRecord {
                x,
                delta_classical,
                delta_king,
                king_wins: delta_king <= delta_classical,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut win_intervals = Vec::new();
    let mut open: Option<[f64; 2]> = None;
    for r in &records {
        match (&mut open, r.king_wins) {
            (Some(iv), true) => iv[1] = r.x,
            (None, true) => open = Some([r.x, r.x]),
            (Some(_), false) => win_intervals.extend(open.take()),
            (None, false) => {}
        }
    }
    win_intervals.extend(open);
    Ok(CompareReport {
        n,
        pq,
        records,
        win_intervals,
    })
}

impl Tabular for CompareReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["x", "delta_classical", "delta_king", "king_wins"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                vec![
                    num(r.x),
                    num(r.delta_classical),
                    num(r.delta_king),
                    r.king_wins.to_string(),
                ]
            })
            .collect()
    }
}
