//! Natural density, finite-prefix statistical convergence diagnostics,
//! parameter sequences `(p_n, q_n)` and the statistical rate checks.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::error_analysis::ModulusTable;
use crate::functions::TargetFunction;
use crate::moments::central_with;
use crate::operators::{king_condition, Family, Operator, OperatorSpec};
use crate::output::{num, opt_num, Tabular};
use crate::pq_core::{pq_int, PQPair};

/// Prefix lengths used for density trajectories.
pub const DEFAULT_DENSITY_SCHEDULE: [u64; 4] = [1_000, 10_000, 100_000, 1_000_000];
/// A trajectory ending below this is read as density zero.
pub const DENSITY_ZERO_THRESHOLD: f64 = 1e-2;

/// A subset of the positive integers given by its membership predicate.
#[derive(Clone)]
pub struct IndexSet {
    name: String,
    membership: Arc<dyn Fn(u64) -> bool + Send + Sync>,
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IndexSet")
            .field("name", &self.name)
            .finish()
    }
}

impl IndexSet {
    pub fn new<F>(name: impl Into<String>, membership: F) -> Self
    where
        F: Fn(u64) -> bool + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            membership: Arc::new(membership),
        }
    }

    pub fn naturals() -> Self {
        Self::new("naturals", |_| true)
    }

    pub fn evens() -> Self {
        Self::new("evens", |k| k % 2 == 0)
    }

    pub fn squares() -> Self {
        Self::new("squares", is_perfect_square)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn contains(&self, k: u64) -> bool {
        (self.membership)(k)
    }
}

pub fn is_perfect_square(k: u64) -> bool {
    let r = k.isqrt();
    r * r == k
}

/// `#{k <= n : k in set} / n`.
pub fn natural_density(set: &IndexSet, n: u64) -> Result<f64> {
    if n == 0 {
        return Err(Error::EmptyPrefix);
    }
    let count = (1..=n).filter(|&k| set.contains(k)).count();
    Ok(count as f64 / n as f64)
}

/// Prefix density of `{k <= n : |x_k - l| >= epsilon}`.
pub fn is_statistically_convergent(
    x: impl Fn(u64) -> f64,
    l: f64,
    epsilon: f64,
    n: u64,
) -> Result<f64> {
    Ok(exception_trajectory(x, l, epsilon, &[n])?.points[0].density)
}

/// `l1` on the perfect squares, `l2` elsewhere. Statistically convergent
/// to `l2` while not convergent in the ordinary sense when `l1 != l2`.
pub fn square_indicator_sequence(l1: f64, l2: f64) -> impl Fn(u64) -> f64 + Clone {
    move |k| if is_perfect_square(k) { l1 } else { l2 }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityPoint {
    pub n: u64,
    pub exceptions: u64,
    pub density: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityTrajectory {
    pub limit: f64,
    pub epsilon: f64,
    pub points: Vec<DensityPoint>,
    /// Non-increasing over the schedule and final density below
    /// [`DENSITY_ZERO_THRESHOLD`].
    pub consistent: bool,
}

/// Exception densities at each prefix length of `schedule`, from one pass.
pub fn exception_trajectory(
    x: impl Fn(u64) -> f64,
    l: f64,
    epsilon: f64,
    schedule: &[u64],
) -> Result<DensityTrajectory> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::NonPositiveEpsilon(epsilon));
    }
    if schedule.contains(&0) || schedule.is_empty() {
        return Err(Error::EmptyPrefix);
    }
    let mut sorted = schedule.to_vec();
    sorted.sort_unstable();
    sorted.dedup();

    let mut points = Vec::with_capacity(sorted.len());
    let mut exceptions = 0u64;
    let mut k = 0u64;
    for &n in &sorted {
        while k < n {
            k += 1;
            if (x(k) - l).abs() >= epsilon {
                exceptions += 1;
            }
        }
        points.push(DensityPoint {
            n,
            exceptions,
            density: exceptions as f64 / n as f64,
        });
    }
    let consistent = points.windows(2).all(|w| w[1].density <= w[0].density)
        && points
            .last()
            .is_some_and(|p| p.density < DENSITY_ZERO_THRESHOLD);
    Ok(DensityTrajectory {
        limit: l,
        epsilon,
        points,
        consistent,
    })
}

/// Several trajectories rendered as one table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityReport {
    pub trajectories: Vec<DensityTrajectory>,
}

impl Tabular for DensityReport {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "limit",
            "epsilon",
            "n",
            "exceptions",
            "density",
            "consistent",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.trajectories
            .iter()
            .flat_map(|t| {
                t.points.iter().map(move |p| {
                    vec![
                        num(t.limit),
                        num(t.epsilon),
                        p.n.to_string(),
                        p.exceptions.to_string(),
                        num(p.density),
                        t.consistent.to_string(),
                    ]
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    /// `p_n = 1`, `q_n = 1 - 1/n^2`
    Default,
    /// `p_n = 1 - 1/(2n^2)`, `q_n = 1 - 1/n^2`
    PowerDecay,
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequenceKind::Default => "default",
            SequenceKind::PowerDecay => "power_decay",
        })
    }
}

impl FromStr for SequenceKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "default" => Ok(SequenceKind::Default),
            "power_decay" => Ok(SequenceKind::PowerDecay),
            other => Err(format!(
                "unknown sequence `{other}` (expected default or power_decay)"
            )),
        }
    }
}

/// Degree-indexed parameters `(p_n, q_n)` with `q_n^n -> 1` and
/// `p_n^n -> 1`, so that `[n]_{p_n,q_n}` grows without bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ParamSequence {
    pub kind: SequenceKind,
}

pub fn remark_sequence(kind: SequenceKind) -> ParamSequence {
    ParamSequence { kind }
}

impl ParamSequence {
    pub fn description(&self) -> &'static str {
        match self.kind {
            SequenceKind::Default => "p_n = 1, q_n = 1 - 1/n^2",
            SequenceKind::PowerDecay => "p_n = 1 - 1/(2n^2), q_n = 1 - 1/n^2",
        }
    }

    pub fn at(&self, n: usize) -> Result<PQPair> {
        if n < 2 {
            return Err(Error::InvalidDegree {
                family: Family::KingLupas,
                n,
                min: 2,
                max: crate::operators::MAX_DEGREE,
            });
        }
        let inv = 1.0 / (n as f64 * n as f64);
        let q = 1.0 - inv;
        let p = match self.kind {
            SequenceKind::Default => 1.0,
            SequenceKind::PowerDecay => 1.0 - 0.5 * inv,
        };
        PQPair::new(p, q)
    }

    pub fn king_admissible(&self, n: usize) -> Result<bool> {
        king_condition(n, self.at(n)?)
    }

    /// First `n` in `2..=n_max` where the King condition holds.
    pub fn first_king_admissible(&self, n_max: usize) -> Option<usize> {
        (2..=n_max).find(|&n| self.king_admissible(n).unwrap_or(false))
    }
}

/// `sqrt(2 / (9 [n]))`.
pub fn stat_delta(n: usize, pq: PQPair) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDegree {
            family: Family::PqLupas,
            n,
            min: 1,
            max: crate::operators::MAX_DEGREE,
        });
    }
    Ok((2.0 / (9.0 * pq_int(n, pq))).sqrt())
}

/// `sqrt(1 / (4 [n]))`, the supremum over `x` of `sqrt(x(1-x)/[n])`.
pub fn stat_delta_alt(n: usize, pq: PQPair) -> Result<f64> {
    Ok(stat_delta(n, pq)? * (9.0f64 / 8.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatBoundRow {
    pub n: usize,
    pub p: f64,
    pub q: f64,
    pub sup_error: f64,
    pub sup_error_x: f64,
    /// Smallest pointwise margin of `2 w(f; sqrt(central moment))`.
    pub pointwise_min_margin: f64,
    pub pointwise_holds: bool,
    pub uniform_bound: f64,
    pub uniform_holds: bool,
    pub uniform_bound_alt: f64,
    pub uniform_alt_holds: bool,
    pub lipschitz_bound: Option<f64>,
    pub lipschitz_holds: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatBoundReport {
    pub family: Family,
    pub sequence: ParamSequence,
    pub f_tag: String,
    pub rows: Vec<StatBoundRow>,
}

/// Margin below which a bound counts as violated.
pub const STAT_BOUND_SLACK: f64 = 1e-10;

/// Per degree `n` of `schedule`, the sup-grid error of the operator built
/// from `(p_n, q_n)` against three bounds: pointwise `2 w(f; sqrt(m2))`,
/// uniform `2 w(f; stat_delta)` (and the `sqrt(1/(4[n]))` variant), and
/// `M stat_delta^rho` when `f` carries Lipschitz metadata.
pub fn statistical_bound_check(
    f: &TargetFunction,
    family: Family,
    seq: &ParamSequence,
    schedule: &[usize],
    grid: &[f64],
    modulus: &ModulusTable,
) -> Result<StatBoundReport> {
    let fx = grid
        .iter()
        .map(|&x| f.eval(x))
        .collect::<Result<Vec<_>>>()?;
    let rows = schedule
        .iter()
        .map(|&n| {
            let pq = seq.at(n)?;
            let op = Operator::new(OperatorSpec::new(family, n, pq)?)?;
            let pointwise = grid
                .par_iter()
                .zip(&fx)
                .map(|(&x, &v)| {
                    let err = (op.apply(f, x)? - v).abs();
                    let bound = modulus.two_omega(central_with(&op, x)?.max(0.0).sqrt())?;
                    Ok((x, err, bound - err))
                })
                .collect::<Result<Vec<_>>>()?;
            let (sup_error_x, sup_error) =
                pointwise
                    .iter()
                    .fold((f64::NAN, f64::NEG_INFINITY), |acc, &(x, e, _)| {
                        if e > acc.1 {
                            (x, e)
                        } else {
                            acc
                        }
                    });
            let pointwise_min_margin = pointwise.iter().map(|t| t.2).fold(f64::INFINITY, f64::min);

            let delta = stat_delta(n, pq)?;
            let uniform_bound = modulus.two_omega(delta)?;
            let uniform_bound_alt = modulus.two_omega(stat_delta_alt(n, pq)?)?;
            let lipschitz_bound = f.lipschitz().map(|l| l.m * delta.powf(l.rho));
            let holds = |b: f64| sup_error <= b + STAT_BOUND_SLACK;
            Ok(StatBoundRow {
                n,
                p: pq.p(),
                q: pq.q(),
                sup_error,
                sup_error_x,
                pointwise_min_margin,
                pointwise_holds: pointwise_min_margin >= -STAT_BOUND_SLACK,
                uniform_bound,
                uniform_holds: holds(uniform_bound),
                uniform_bound_alt,
                uniform_alt_holds: holds(uniform_bound_alt),
                lipschitz_bound,
                lipschitz_holds: lipschitz_bound.map(holds),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StatBoundReport {
        family,
        sequence: *seq,
        f_tag: f.tag().to_string(),
        rows,
    })
}

impl Tabular for StatBoundReport {
    fn header(&self) -> Vec<&'static str> {
        vec![
            "n",
            "p",
            "q",
            "sup_error",
            "sup_error_x",
            "pointwise_min_margin",
            "pointwise_holds",
            "uniform_bound",
            "uniform_holds",
            "uniform_bound_alt",
            "uniform_alt_holds",
            "lipschitz_bound",
            "lipschitz_holds",
        ]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.n.to_string(),
                    num(r.p),
                    num(r.q),
                    num(r.sup_error),
                    num(r.sup_error_x),
                    num(r.pointwise_min_margin),
                    r.pointwise_holds.to_string(),
                    num(r.uniform_bound),
                    r.uniform_holds.to_string(),
                    num(r.uniform_bound_alt),
                    r.uniform_alt_holds.to_string(),
                    opt_num(r.lipschitz_bound),
                    r.lipschitz_holds.map(|h| h.to_string()).unwrap_or_default(),
                ]
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergencePoint {
    pub n: usize,
    pub x0: f64,
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub family: Family,
    pub sequence: ParamSequence,
    pub f_tag: String,
    pub points: Vec<ConvergencePoint>,
}

impl ConvergenceReport {
    /// Errors at `x0` in schedule order.
    pub fn errors_at(&self, x0: f64) -> Vec<(usize, f64)> {
        self.points
            .iter()
            .filter(|p| p.x0 == x0)
            .map(|p| (p.n, p.error))
            .collect()
    }
}

/// Pointwise errors `|L_n(f; x0) - f(x0)|` along `seq` for each `n` of
/// `schedule` and each `x0`.
pub fn convergence_trajectory(
    f: &TargetFunction,
    family: Family,
    seq: &ParamSequence,
    schedule: &[usize],
    x0s: &[f64],
) -> Result<ConvergenceReport> {
    let mut points = Vec::with_capacity(schedule.len() * x0s.len());
    for &x0 in x0s {
        let target = f.eval(x0)?;
        for &n in schedule {
            let op = Operator::new(OperatorSpec::new(family, n, seq.at(n)?)?)?;
            let value = op.apply(f, x0)?;
            points.push(ConvergencePoint {
                n,
                x0,
                value,
                error: (value - target).abs(),
            });
        }
    }
    Ok(ConvergenceReport {
        family,
        sequence: *seq,
        f_tag: f.tag().to_string(),
        points,
    })
}

impl Tabular for ConvergenceReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["n", "x0", "value", "error"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.points
            .iter()
            .map(|p| vec![p.n.to_string(), num(p.x0), num(p.value), num(p.error)])
            .collect()
    }
}
