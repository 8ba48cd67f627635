//! Local deterministic bound of the Bell sum.
//!
//! A deterministic local strategy fixes Bob's answers `a` (for `A`) and `a′`
//! (for `A′`) and, independently, which of Alice's `d²` binary measurements
//! answer "yes". Unfired measurements contribute nothing. A fired `m_kl`
//! contributes `±1` against each of Bob's bases, depending on whether `k = a`
//! and `l = a′`; so `+2`, `0` or `−2`. Only `m_{a a′}` is positive, hence the
//! bound `2`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::states::{self, TargetSet};

/// Exhaustive scans are limited to `d² ≤ 16` fire bits.
pub const MAX_ENUMERATION_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct LhvStrategy {
    pub a: usize,
    pub a_prime: usize,
    /// Bit `k·d + l` set iff `m_kl` answers "yes".
    pub fires: u64,
}

impl LhvStrategy {
    pub fn new(a: usize, a_prime: usize, fires: u64, d: usize) -> Result<Self> {
        states::check_dim(d)?;
        if a >= d || a_prime >= d {
            return Err(Error::Index {
                k: a,
                l: a_prime,
                d,
            });
        }
        if d * d < 64 && fires >> (d * d) != 0 {
            return Err(Error::Invalid(format!(
                "fire mask {fires:#x} wider than {} bits",
                d * d
            )));
        }
        Ok(Self { a, a_prime, fires })
    }

    pub fn fires_at(&self, target: TargetSet, d: usize) -> bool {
        self.fires >> target.index(d) & 1 == 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum LhvMode {
    #[serde(rename = "enumerate")]
    Exhaustive,
    #[serde(rename = "analytic")]
    Analytic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LhvResult {
    pub d: usize,
    pub max_value: i64,
    pub argmax: LhvStrategy,
    pub strategies_scanned: u64,
    pub mode: LhvMode,
}

#[inline]
fn sign(matches: bool) -> i64 {
    if matches {
        1
    } else {
        -1
    }
}

/// Contribution of `m_kl` if it fires, against answers `(a, a′)`.
fn contribution(target: TargetSet, a: usize, a_prime: usize) -> i64 {
    sign(target.k == a) + sign(target.l == a_prime)
}

pub fn score_strategy(s: &LhvStrategy, d: usize) -> i64 {
    TargetSet::all(d)
        .filter(|t| s.fires_at(*t, d))
        .map(|t| contribution(t, s.a, s.a_prime))
        .sum()
}

/// Value of a probabilistic mixture of deterministic strategies.
pub fn mixture_score(mixture: &[(f64, LhvStrategy)], d: usize) -> f64 {
    mixture
        .iter()
        .map(|(w, s)| w * score_strategy(s, d) as f64)
        .sum()
}

/// Scans all `d²·2^{d²}` deterministic strategies. Ties resolve to the
/// lexicographically smallest `(a, a′, fires)`.
pub fn enumerate_max(d: usize) -> Result<LhvResult> {
    states::check_dim(d)?;
    let bits = d * d;
    if d > MAX_ENUMERATION_DIM {
        return Err(Error::TooLargeForEnumeration {
            d,
            strategies: (bits as u128) << bits,
        });
    }
    let masks = 1u64 << bits;

    let best = (0..bits)
        .into_par_iter()
        .map(|answers| {
            let (a, a_prime) = (answers / d, answers % d);
            let table: Vec<i64> = TargetSet::all(d)
                .map(|t| contribution(t, a, a_prime))
                .collect();
            let mut best = (i64::MIN, 0u64);
            for fires in 0..masks {
                let mut value = 0;
                let mut m = fires;
                while m != 0 {
                    value += table[m.trailing_zeros() as usize];
                    m &= m - 1;
                }
                if value > best.0 {
                    best = (value, fires);
                }
            }
            (
                best.0,
                LhvStrategy {
                    a,
                    a_prime,
                    fires: best.1,
                },
            )
        })
        .reduce(
            || {
                (
                    i64::MIN,
                    LhvStrategy {
                        a: usize::MAX,
                        a_prime: 0,
                        fires: 0,
                    },
                )
            },
            |x, y| {
                if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) {
                    y
                } else {
                    x
                }
            },
        );

    Ok(LhvResult {
        d,
        max_value: best.0,
        argmax: best.1,
        strategies_scanned: bits as u64 * masks,
        mode: LhvMode::Exhaustive,
    })
}

/// For each answer pair, fire exactly the measurements with non-negative
/// contribution; that mask is optimal for those answers.
pub fn analytic_max(d: usize) -> Result<LhvResult> {
    states::check_dim(d)?;
    let mut best: Option<(i64, LhvStrategy)> = None;
    for a in 0..d {
        for a_prime in 0..d {
            let mut fires = 0u64;
            let mut value = 0;
            for t in TargetSet::all(d) {
                let c = contribution(t, a, a_prime);
                if c >= 0 {
                    fires |= 1 << t.index(d);
                    value += c;
                }
            }
            if best.is_none_or(|(v, _)| value > v) {
                best = Some((value, LhvStrategy { a, a_prime, fires }));
            }
        }
    }
    let (max_value, argmax) = best.expect("d ≥ 2");
    Ok(LhvResult {
        d,
        max_value,
        argmax,
        strategies_scanned: (d * d) as u64,
        mode: LhvMode::Analytic,
    })
}

/// Exhaustive when feasible, analytic otherwise.
pub fn classical_bound(d: usize) -> Result<LhvResult> {
    if d <= MAX_ENUMERATION_DIM {
        enumerate_max(d)
    } else {
        analytic_max(d)
    }
}
