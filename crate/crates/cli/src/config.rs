use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use pqapprox::error_analysis::BoundKind;
use pqapprox::statconv::{remark_sequence, ParamSequence, SequenceKind};
use pqapprox::{Builtin, Family, OperatorSpec, PQPair};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Operator value and pointwise error on the grid
    Eval,
    /// Numeric against closed-form moments
    Moments,
    /// King substitution r_n(x) and its e2 residual
    Rn,
    /// Actual error against the modulus or Lipschitz bound
    Bounds,
    /// King against classical bound arguments, with win intervals
    Compare,
    /// Sup errors and statistical rate checks over a degree schedule
    Converge,
    /// Exception-density trajectories of the squares-indicator sequence
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FamilyArg {
    PqBernstein,
    PqLupas,
    KingLupas,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::PqBernstein => Family::PqBernstein,
            FamilyArg::PqLupas => Family::PqLupas,
            FamilyArg::KingLupas => Family::KingLupas,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeqArg {
    Default,
    #[value(alias = "power_decay")]
    PowerDecay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundArg {
    Modulus,
    Lipschitz,
}

fn parse_builtin(s: &str) -> Result<Builtin, String> {
    s.parse()
}

/// Experiments with (p,q)-Lupaş and King-type operators.
///
/// Output goes to stdout unless --out is given. Numbers are written with
/// 17 significant digits; reruns with the same flags are byte-identical.
#[derive(Parser, Debug)]
#[command(name = "pqapprox", version, about)]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Command,

    /// Operator family (rn and compare always use king-lupas)
    #[arg(long, value_enum, default_value_t = FamilyArg::PqLupas)]
    pub family: FamilyArg,

    /// Degree
    #[arg(long)]
    pub n: Option<usize>,

    /// Largest degree of the converge schedule 2, 4, 8, ...
    #[arg(long, default_value_t = 256)]
    pub n_max: usize,

    #[arg(long, conflicts_with = "seq")]
    pub p: Option<f64>,

    #[arg(long, conflicts_with = "seq")]
    pub q: Option<f64>,

    /// Parameter sequence (p_n, q_n) instead of a fixed pair
    #[arg(long, value_enum)]
    pub seq: Option<SeqArg>,

    /// Number of uniform grid points on [0,1]
    #[arg(long, default_value_t = 101)]
    pub grid: usize,

    /// Target function: const, id, square, cube, absdev, runge
    #[arg(long = "fn", value_parser = parse_builtin, default_value = "square")]
    pub function: Builtin,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Exception threshold for the density command
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,

    /// Longest prefix for the density command
    #[arg(long, default_value_t = 1_000_000)]
    pub big_n: u64,

    /// Bound checked by the bounds command
    #[arg(long, value_enum, default_value_t = BoundArg::Modulus)]
    pub bound: BoundArg,
}

/// What to run, fully validated.
#[derive(Debug, Clone)]
pub enum Experiment {
    Eval(OperatorSpec),
    Moments(OperatorSpec),
    Rn {
        n: usize,
        pq: PQPair,
    },
    Bounds(OperatorSpec, BoundKind),
    Compare {
        n: usize,
        pq: PQPair,
    },
    Converge {
        family: Family,
        seq: ParamSequence,
        schedule: Vec<usize>,
    },
    Density {
        epsilon: f64,
        schedule: Vec<u64>,
    },
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub grid: usize,
    pub function: Builtin,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl Args {
    fn degree(&self) -> Result<usize, CliError> {
        self.n.ok_or_else(|| {
            CliError::Usage(
                format!("--n is required for --command {:?}", self.command).to_lowercase(),
            )
        })
    }

    fn sequence(&self) -> Option<ParamSequence> {
        self.seq.map(|s| {
            remark_sequence(match s {
                SeqArg::Default => SequenceKind::Default,
                SeqArg::PowerDecay => SequenceKind::PowerDecay,
            })
        })
    }

    fn pair(&self, n: usize) -> Result<PQPair, CliError> {
        match self.sequence() {
            Some(seq) => Ok(seq.at(n)?),
            None => Ok(PQPair::new(self.p.unwrap_or(1.0), self.q.unwrap_or(1.0))?),
        }
    }

    fn spec(&self, family: Family) -> Result<OperatorSpec, CliError> {
        let n = self.degree()?;
        Ok(OperatorSpec::new(family, n, self.pair(n)?)?)
    }

    /// Checks everything that can be checked before computing.
    pub fn validate(&self) -> Result<ExperimentConfig, CliError> {
        if self.grid < 2 {
            return Err(CliError::Core(pqapprox::Error::GridTooSmall(self.grid)));
        }
        let family = Family::from(self.family);
        let experiment = match self.command {
            Command::Eval => Experiment::Eval(self.spec(family)?),
            Command::Moments => {
                if family == Family::PqBernstein {
                    return Err(pqapprox::Error::NoClosedForm(family).into());
                }
                Experiment::Moments(self.spec(family)?)
            }
            Command::Rn | Command::Compare => {
                let spec = self.spec(Family::KingLupas)?;
                let (n, pq) = (spec.n(), spec.pq());
                if self.command == Command::Rn {
                    Experiment::Rn { n, pq }
                } else {
                    Experiment::Compare { n, pq }
                }
            }
            Command::Bounds => {
                let kind = match self.bound {
                    BoundArg::Modulus => BoundKind::Modulus,
                    BoundArg::Lipschitz => BoundKind::Lipschitz,
                };
                Experiment::Bounds(self.spec(family)?, kind)
            }
            Command::Converge => {
                if self.p.is_some() || self.q.is_some() {
                    return Err(CliError::Usage(
                        "--command converge takes --seq, not --p/--q".to_string(),
                    ));
                }
                if self.n_max < 2 {
                    return Err(CliError::Usage(format!(
                        "--n-max must be at least 2, got {}",
                        self.n_max
                    )));
                }
                let seq = self
                    .sequence()
                    .unwrap_or(remark_sequence(SequenceKind::Default));
                let schedule = doubling_schedule(self.n_max);
                for &n in &schedule {
                    OperatorSpec::new(family, n, seq.at(n)?)?;
                }
                Experiment::Converge {
                    family,
                    seq,
                    schedule,
                }
            }
            Command::Density => {
                if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
                    return Err(pqapprox::Error::NonPositiveEpsilon(self.epsilon).into());
                }
                if self.big_n == 0 {
                    return Err(pqapprox::Error::EmptyPrefix.into());
                }
                Experiment::Density {
                    epsilon: self.epsilon,
                    schedule: decade_schedule(self.big_n),
                }
            }
        };
        Ok(ExperimentConfig {
            experiment,
            grid: self.grid,
            function: self.function,
            format: self.format,
            out: self.out.clone(),
        })
    }
}

/// `2, 4, 8, ...` up to `n_max`, with `n_max` itself appended.
pub fn doubling_schedule(n_max: usize) -> Vec<usize> {
    let mut out: Vec<usize> = std::iter::successors(Some(2usize), |n| n.checked_mul(2))
        .take_while(|&n| n <= n_max)
        .collect();
    if out.last() != Some(&n_max) {
        out.push(n_max);
    }
    out
}

/// `10^3, 10^4, ...` up to `big_n`, with `big_n` itself appended.
pub fn decade_schedule(big_n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(1_000u64), |n| n.checked_mul(10))
        .take_while(|&n| n <= big_n)
        .collect();
    if out.last() != Some(&big_n) {
        out.push(big_n);
    }
    out
}
