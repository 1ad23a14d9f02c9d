//! The three operator families: (p,q)-Bernstein, (p,q)-Lupaş, and the
//! King-type modification of (p,q)-Lupaş that reproduces `e0` and `e2`.
//!
//! The Lupaş basis is
//!
//! ```text
//! b_k(x) = [n k] p^{(n-k)(n-k-1)/2} q^{k(k-1)/2} x^k (1-x)^{n-k}
//!          / prod_{j=1}^{n} (p^{j-1}(1-x) + q^{j-1} x)
//! ```
//!
//! with nodes `p^{n-k}[k]/[n]`. The King operator is the Lupaş operator with
//! its basis argument replaced by `r_n(x)`.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::compensated::NeumaierSum;
use crate::error::{Error, Result};
use crate::functions::TargetFunction;
use crate::output::{num, Tabular};
use crate::pq_core::{powi, pq_binomial_row, pq_int, pq_int_table, triangular, PQPair, PairMode};

/// Largest degree evaluated with the direct product formula.
pub const DIRECT_MAX_DEGREE: usize = 60;
/// Largest degree accepted for the Lupaş and King families.
pub const MAX_DEGREE: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    PqBernstein,
    PqLupas,
    KingLupas,
}

impl Family {
    pub fn min_degree(self) -> usize {
        match self {
            Family::KingLupas => 2,
            _ => 1,
        }
    }

    pub fn max_degree(self) -> usize {
        match self {
            Family::PqBernstein => DIRECT_MAX_DEGREE,
            _ => MAX_DEGREE,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::PqBernstein => "pq-bernstein",
            Family::PqLupas => "pq-lupas",
            Family::KingLupas => "king-lupas",
        })
    }
}

/// Operator family at a degree with a parameter pair. Construction enforces
/// the degree range and, for [`Family::KingLupas`], the King condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatorSpec {
    family: Family,
    n: usize,
    pq: PQPair,
}

impl OperatorSpec {
    pub fn new(family: Family, n: usize, pq: PQPair) -> Result<Self> {
        if n < family.min_degree() || n > family.max_degree() {
            return Err(Error::InvalidDegree {
                family,
                n,
                min: family.min_degree(),
                max: family.max_degree(),
            });
        }
        if family == Family::KingLupas {
            require_king_condition(n, pq)?;
        }
        Ok(Self { family, n, pq })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pq(&self) -> PQPair {
        self.pq
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BasisValue {
    pub k: usize,
    pub weight: f64,
    pub node: f64,
}

fn check_unit(x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(Error::OutOfDomain(x))
    }
}

fn check_degree(family: Family, n: usize) -> Result<()> {
    if n < family.min_degree() || n > family.max_degree() {
        Err(Error::InvalidDegree {
            family,
            n,
            min: family.min_degree(),
            max: family.max_degree(),
        })
    } else {
        Ok(())
    }
}

/// `p^{n-k} [k] / [n]`, which equals `(1 - s^k)/(1 - s^n)` with `s = q/p`.
/// The quotient form is monotone in `k` under rounding and never exceeds 1.
fn lupas_nodes(n: usize, pq: PQPair) -> Vec<f64> {
    if pq.mode() != PairMode::Strict {
        return (0..=n).map(|k| k as f64 / n as f64).collect();
    }
    let ln_s = ((pq.q() - pq.p()) / pq.p()).ln_1p();
    let den = (n as f64 * ln_s).exp_m1();
    (0..=n)
        .map(|k| {
            if k == n {
                1.0
            } else {
                ((k as f64 * ln_s).exp_m1() / den).min(1.0)
            }
        })
        .collect()
}

/// `ln [i]_{p,q}` without forming `[i]` when it would underflow.
fn ln_pq_int(i: usize, value: f64, pq: PQPair) -> f64 {
    if value > 1e-290 {
        return value.ln();
    }
    // [i] = p^{i-1} (1 - s^i)/(1 - s) with s = q/p < 1.
    let ln_s = ((pq.q() - pq.p()) / pq.p()).ln_1p();
    let ratio = (i as f64 * ln_s).exp_m1() / ln_s.exp_m1();
    (i - 1) as f64 * pq.p().ln() + ratio.ln()
}

#[inline]
fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

#[derive(Debug, Clone)]
enum Coefficients {
    /// `[n k] p^{(n-k)(n-k-1)/2} q^{k(k-1)/2}` as plain doubles.
    Direct(Vec<f64>),
    /// Natural logs of the same quantities.
    Log(Vec<f64>),
}

/// Per-`(n, p, q)` precomputation for the Lupaş basis. Reusable across any
/// number of evaluation points.
#[derive(Debug, Clone)]
pub struct LupasKernel {
    n: usize,
    pq: PQPair,
    nodes: Vec<f64>,
    coeffs: Coefficients,
}

impl LupasKernel {
    pub fn new(n: usize, pq: PQPair) -> Result<Self> {
        check_degree(Family::PqLupas, n)?;
        let ints = pq_int_table(n, pq);
        let nodes = lupas_nodes(n, pq);

        let direct = if n <= DIRECT_MAX_DEGREE {
            let row = pq_binomial_row(n, pq);
            let c: Vec<f64> = (0..=n)
                .map(|k| row[k] * powi(pq.p(), triangular(n - k)) * powi(pq.q(), triangular(k)))
                .collect();
            // The denominator is bounded below by q^{n(n-1)/2}.
            let safe = powi(pq.q(), triangular(n)) > 1e-280
                && c.iter().all(|v| v.is_normal() && *v < 1e280);
            safe.then_some(c)
        } else {
            None
        };

        let coeffs = match direct {
            Some(c) => Coefficients::Direct(c),
            None => Coefficients::Log(Self::log_coefficients(n, pq, &ints)),
        };
        Ok(Self {
            n,
            pq,
            nodes,
            coeffs,
        })
    }

    fn log_coefficients(n: usize, pq: PQPair, ints: &[f64]) -> Vec<f64> {
        let ln_ints: Vec<f64> = (0..=n)
            .map(|i| {
                if i == 0 {
                    0.0
                } else {
                    ln_pq_int(i, ints[i], pq)
                }
            })
            .collect();
        let (ln_p, ln_q) = (pq.p().ln(), pq.q().ln());
        (0..=n)
            .map(|k| {
                let kk = k.min(n - k);
                let ln_binom: f64 = (1..=kk).map(|i| ln_ints[n - kk + i] - ln_ints[i]).sum();
                ln_binom + triangular(n - k) as f64 * ln_p + triangular(k) as f64 * ln_q
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pq(&self) -> PQPair {
        self.pq
    }

    /// Whether the log-space path is in use.
    pub fn is_log_space(&self) -> bool {
        matches!(self.coeffs, Coefficients::Log(_))
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn node(&self, k: usize) -> f64 {
        self.nodes[k]
    }

    /// `prod_{j=1}^{n} (p^{j-1}(1-x) + q^{j-1} x)`.
    pub fn denominator(&self, x: f64) -> f64 {
        (0..self.n)
            .map(|j| powi(self.pq.p(), j).mul_add(1.0 - x, powi(self.pq.q(), j) * x))
            .product()
    }

    /// Basis weights `b_0(x) .. b_n(x)`.
    pub fn weights(&self, x: f64) -> Result<Vec<f64>> {
        check_unit(x)?;
        let n = self.n;
        let mut w = vec![0.0; n + 1];
        if x == 0.0 {
            w[0] = 1.0;
            return Ok(w);
        }
        if x == 1.0 {
            w[n] = 1.0;
            return Ok(w);
        }
        match &self.coeffs {
            Coefficients::Direct(c) => {
                let den = self.denominator(x);
                let y = 1.0 - x;
                for (k, wk) in w.iter_mut().enumerate() {
                    *wk = c[k] * powi(x, k) * powi(y, n - k) / den;
                }
            }
            Coefficients::Log(lc) => {
                let (ln_x, ln_y) = (x.ln(), (-x).ln_1p());
                let (ln_p, ln_q) = (self.pq.p().ln(), self.pq.q().ln());
                let ln_den: f64 = (0..n)
                    .map(|j| log_add_exp(j as f64 * ln_p + ln_y, j as f64 * ln_q + ln_x))
                    .collect::<NeumaierSum>()
                    .total();
                for (k, wk) in w.iter_mut().enumerate() {
                    *wk = (lc[k] + k as f64 * ln_x + (n - k) as f64 * ln_y - ln_den).exp();
                }
            }
        }
        Ok(w)
    }

    pub fn basis(&self, x: f64) -> Result<Vec<BasisValue>> {
        Ok(self
            .weights(x)?
            .into_iter()
            .enumerate()
            .map(|(k, weight)| BasisValue {
                k,
                weight,
                node: self.nodes[k],
            })
            .collect())
    }

    /// `sum_k f(node_k) b_k(x)` with compensated accumulation.
    pub fn apply(&self, f: &TargetFunction, x: f64) -> Result<f64> {
        let w = self.weights(x)?;
        let mut acc = NeumaierSum::new();
        for (k, wk) in w.iter().enumerate() {
            if *wk != 0.0 {
                acc.add(f.eval(self.nodes[k])? * wk);
            }
        }
        finite(acc.total(), f, x)
    }
}

fn finite(value: f64, f: &TargetFunction, x: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite {
            what: format!("operator applied to {}", f.tag()),
            x,
            value,
        })
    }
}

/// Per-`(n, p, q)` precomputation for the (p,q)-Bernstein operator.
#[derive(Debug, Clone)]
pub struct BernsteinKernel {
    n: usize,
    pq: PQPair,
    nodes: Vec<f64>,
    /// `[n k] p^{k(k-1)/2} / p^{n(n-1)/2}`
    coeffs: Vec<f64>,
}

impl BernsteinKernel {
    pub fn new(n: usize, pq: PQPair) -> Result<Self> {
        check_degree(Family::PqBernstein, n)?;
        let ints = pq_int_table(n, pq);
        let row = pq_binomial_row(n, pq);
        let nodes = (0..=n)
            .map(|k| {
                if k == n {
                    1.0
                } else {
                    ints[k] / (powi(pq.p(), k) / powi(pq.p(), n) * ints[n])
                }
            })
            .collect();
        let coeffs = (0..=n)
            .map(|k| row[k] / powi(pq.p(), triangular(n) - triangular(k)))
            .collect();
        Ok(Self {
            n,
            pq,
            nodes,
            coeffs,
        })
    }

    pub fn weights(&self, x: f64) -> Result<Vec<f64>> {
        check_unit(x)?;
        let n = self.n;
        let mut w = vec![0.0; n + 1];
        if x == 0.0 {
            w[0] = 1.0;
            return Ok(w);
        }
        if x == 1.0 {
            w[n] = 1.0;
            return Ok(w);
        }
        // prefix[m] = prod_{s=0}^{m-1} (p^s - q^s x)
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(1.0);
        for s in 0..n {
            let factor = (-powi(self.pq.q(), s))
                .mul_add(x, powi(self.pq.p(), s))
                .max(0.0);
            prefix.push(prefix[s] * factor);
        }
        for (k, wk) in w.iter_mut().enumerate() {
            *wk = self.coeffs[k] * powi(x, k) * prefix[n - k];
        }
        Ok(w)
    }

    pub fn apply(&self, f: &TargetFunction, x: f64) -> Result<f64> {
        let w = self.weights(x)?;
        let mut acc = NeumaierSum::new();
        for (k, wk) in w.iter().enumerate() {
            if *wk != 0.0 {
                acc.add(f.eval(self.nodes[k])? * wk);
            }
        }
        finite(acc.total(), f, x)
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Lupas(LupasKernel),
    Bernstein(BernsteinKernel),
}

/// A ready-to-evaluate operator for one [`OperatorSpec`].
#[derive(Debug, Clone)]
pub struct Operator {
    spec: OperatorSpec,
    kernel: Kernel,
}

impl Operator {
    pub fn new(spec: OperatorSpec) -> Result<Self> {
        let kernel = match spec.family {
            Family::PqBernstein => Kernel::Bernstein(BernsteinKernel::new(spec.n, spec.pq)?),
            Family::PqLupas | Family::KingLupas => {
                Kernel::Lupas(LupasKernel::new(spec.n, spec.pq)?)
            }
        };
        Ok(Self { spec, kernel })
    }

    pub fn spec(&self) -> OperatorSpec {
        self.spec
    }

    /// The point at which the basis is evaluated: `r_n(x)` for the King
    /// family, `x` otherwise.
    pub fn argument(&self, x: f64) -> Result<f64> {
        check_unit(x)?;
        match self.spec.family {
            Family::KingLupas => king_rn(self.spec.n, self.spec.pq, x),
            _ => Ok(x),
        }
    }

    pub fn nodes(&self) -> &[f64] {
        match &self.kernel {
            Kernel::Lupas(k) => &k.nodes,
            Kernel::Bernstein(k) => &k.nodes,
        }
    }

    pub fn weights(&self, x: f64) -> Result<Vec<f64>> {
        let arg = self.argument(x)?;
        match &self.kernel {
            Kernel::Lupas(k) => k.weights(arg),
            Kernel::Bernstein(k) => k.weights(arg),
        }
    }

    pub fn apply(&self, f: &TargetFunction, x: f64) -> Result<f64> {
        let arg = self.argument(x)?;
        self.apply_substituted(f, arg)
    }

    /// Evaluates the basis at an explicit argument, bypassing `r_n`.
    pub fn apply_substituted(&self, f: &TargetFunction, arg: f64) -> Result<f64> {
        match &self.kernel {
            Kernel::Lupas(k) => k.apply(f, arg),
            Kernel::Bernstein(k) => k.apply(f, arg),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvalRecord {
    pub x: f64,
    /// `r_n(x)` for the King family, `x` otherwise.
    pub argument: f64,
    pub value: f64,
    pub target: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvalReport {
    pub spec: OperatorSpec,
    pub f_tag: String,
    pub records: Vec<EvalRecord>,
}

/// `L(f; x)` against `f(x)` over `grid`.
pub fn eval_report(f: &TargetFunction, spec: &OperatorSpec, grid: &[f64]) -> Result<EvalReport> {
    let op = Operator::new(*spec)?;
    let records = grid
        .par_iter()
        .map(|&x| {
            let value = op.apply(f, x)?;
            let target = f.eval(x)?;
            Ok(EvalRecord {
                x,
                argument: op.argument(x)?,
                value,
                target,
                error: (value - target).abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EvalReport {
        spec: *spec,
        f_tag: f.tag().to_string(),
        records,
    })
}

impl Tabular for EvalReport {
    fn header(&self) -> Vec<&'static str> {
        vec!["x", "argument", "value", "target", "error"]
    }

    fn rows(&self) -> Vec<Vec<String>> {
        self.records
            .iter()
            .map(|r| {
                [r.x, r.argument, r.value, r.target, r.error]
                    .into_iter()
                    .map(num)
                    .collect()
            })
            .collect()
    }
}

fn expect_family(spec: &OperatorSpec, family: Family) -> Result<()> {
    if spec.family == family {
        Ok(())
    } else {
        Err(Error::WrongFamily {
            expected: family,
            got: spec.family,
        })
    }
}

/// Single Lupaş basis function `b_{n,k}(x)`.
pub fn lupas_basis(n: usize, k: usize, pq: PQPair, x: f64) -> Result<f64> {
    if k > n {
        return Err(Error::BinomialIndex { n, k });
    }
    Ok(LupasKernel::new(n, pq)?.weights(x)?[k])
}

/// Lupaş node `p^{n-k}[k]/[n]`.
pub fn lupas_node(n: usize, k: usize, pq: PQPair) -> Result<f64> {
    check_degree(Family::PqLupas, n)?;
    if k > n {
        return Err(Error::BinomialIndex { n, k });
    }
    Ok(lupas_nodes(n, pq)[k])
}

/// (p,q)-Lupaş operator `L_n(f; x)`.
pub fn lupas_eval(f: &TargetFunction, spec: &OperatorSpec, x: f64) -> Result<f64> {
    expect_family(spec, Family::PqLupas)?;
    Operator::new(*spec)?.apply(f, x)
}

/// (p,q)-Bernstein operator `B_n(f; x)`.
pub fn pq_bernstein_eval(f: &TargetFunction, spec: &OperatorSpec, x: f64) -> Result<f64> {
    expect_family(spec, Family::PqBernstein)?;
    Operator::new(*spec)?.apply(f, x)
}

/// King-modified operator `L*_n(f; x)`.
pub fn king_eval(f: &TargetFunction, spec: &OperatorSpec, x: f64) -> Result<f64> {
    expect_family(spec, Family::KingLupas)?;
    Operator::new(*spec)?.apply(f, x)
}

/// Both sides of the King condition: `(pq([n]-1), p^n (p-q))`.
pub fn king_condition_sides(n: usize, pq: PQPair) -> (f64, f64) {
    let lhs = pq.p() * pq.q() * (pq_int(n, pq) - 1.0);
    let rhs = powi(pq.p(), n) * pq.gap();
    (lhs, rhs)
}

/// Admissibility for the King modification: `pq([n]-1) > p^n (p-q)`.
pub fn king_condition(n: usize, pq: PQPair) -> Result<bool> {
    check_degree(Family::KingLupas, n)?;
    let (lhs, rhs) = king_condition_sides(n, pq);
    Ok(lhs > rhs)
}

fn require_king_condition(n: usize, pq: PQPair) -> Result<()> {
    if king_condition(n, pq)? {
        Ok(())
    } else {
        let (lhs, rhs) = king_condition_sides(n, pq);
        Err(Error::KingCondition {
            n,
            p: pq.p(),
            q: pq.q(),
            lhs,
            rhs,
        })
    }
}

/// Coefficients of the quadratic `D r^2 + B r - C = 0` whose root in [0,1]
/// makes the modified operator reproduce `x^2`:
///
/// * `D = q[n] - p^n = p^{n-1} q - p^n + q^2 [n-1]`
/// * `B = p^n + x^2 [n] (p-q)`
/// * `C = p [n] x^2`
///
/// Obtained by setting the Lupaş second moment at `r` equal to `x^2` and
/// clearing its denominator `p(1-r) + qr`; the cubic terms cancel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct KingQuadratic {
    pub d: f64,
    pub b: f64,
    pub c: f64,
}

impl KingQuadratic {
    pub(crate) fn new(n: usize, pq: PQPair, x: f64) -> Self {
        let (p, q) = (pq.p(), pq.q());
        let big_n = pq_int(n, pq);
        let gap = pq.gap();
        let pn1 = powi(p, n - 1);
        let d = match pq.mode() {
            PairMode::Strict => q * q * pq_int(n - 1, pq) - pn1 * gap,
            _ => q * q * pq_int(n - 1, pq),
        };
        let x2 = x * x;
        Self {
            d,
            b: pn1 * p + x2 * big_n * gap,
            c: p * big_n * x2,
        }
    }

    /// Root via `2C / (B + sqrt(B^2 + 4DC))`, which avoids subtracting
    /// nearly equal quantities when `x` is small.
    pub(crate) fn root(&self) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        let disc = self.b.mul_add(self.b, 4.0 * self.d * self.c);
        2.0 * self.c / (self.b + disc.sqrt())
    }
}

/// The King substitution `r_n(x) ∈ [0,1]`, chosen so that
/// `L*_n(e2; x) = x^2`.
pub fn king_rn(n: usize, pq: PQPair, x: f64) -> Result<f64> {
    check_degree(Family::KingLupas, n)?;
    require_king_condition(n, pq)?;
    check_unit(x)?;
    if x == 1.0 {
        return Ok(1.0);
    }
    let quad = KingQuadratic::new(n, pq, x);
    if quad.d <= 0.0 {
        let (lhs, rhs) = king_condition_sides(n, pq);
        return Err(Error::KingCondition {
            n,
            p: pq.p(),
            q: pq.q(),
            lhs,
            rhs,
        });
    }
    Ok(quad.root().clamp(0.0, 1.0))
}
