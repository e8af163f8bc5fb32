//! Search spaces and the route decoder each one uses.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::balas_simonetti::{bs_fixed_point, BsError, BsLayeredGraph, DEFAULT_MAX_PASSES};
use crate::exact_tsp::{solve_exact, DEFAULT_MAX_EXACT};
use crate::instance_io::DistanceMatrix;
use crate::model::Tour;

/// Largest `k` tried for the fallback of oversized exact routes.
const FALLBACK_K_CAP: usize = 8;
/// Budget on DP states per pass for the fallback.
const FALLBACK_STATE_BUDGET: usize = 4_000_000;

/// How a route's cost is evaluated during the search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Space {
    /// Route cost in the given visiting order.
    Classic,
    /// Cost after reaching a Balas-Simonetti fixed point with window `k`.
    Bs(usize),
    /// Optimal TSP cost of the route's customer set.
    Exact,
}

impl Space {
    pub fn label(&self) -> &'static str {
        match self {
            Space::Classic => "classic",
            Space::Bs(_) => "bs",
            Space::Exact => "exact",
        }
    }

    /// Window size reported for the space; `None` for the exact space.
    pub fn k(&self) -> Option<usize> {
        match self {
            Space::Classic => Some(0),
            Space::Bs(k) => Some(*k),
            Space::Exact => None,
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Space::Classic => write!(f, "classic"),
            Space::Bs(k) => write!(f, "bs:{k}"),
            Space::Exact => write!(f, "exact"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid space `{0}`, expected classic, bs:K or exact")]
pub struct SpaceParseError(String);

impl FromStr for Space {
    type Err = SpaceParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        match t.as_str() {
            "classic" => Ok(Space::Classic),
            "exact" => Ok(Space::Exact),
            _ => t
                .strip_prefix("bs:")
                .and_then(|k| k.parse().ok())
                .map(Space::Bs)
                .ok_or_else(|| SpaceParseError(s.to_string())),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecodeError {
    #[error(transparent)]
    Bs(#[from] BsError),
}

/// Counters updated by [`Decoder::decode`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecodeStats {
    pub decoder_calls: u64,
    pub bs_passes: u64,
    pub exact_calls: u64,
    pub exact_fallbacks: u64,
}

/// Route decoder for one space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoder {
    Identity,
    Bs { k: usize, max_passes: usize },
    Exact { max_exact: usize, max_passes: usize },
}

impl Decoder {
    pub fn for_space(space: Space) -> Self {
        match space {
            Space::Classic => Decoder::Identity,
            Space::Bs(0) => Decoder::Identity,
            Space::Bs(k) => Decoder::Bs {
                k,
                max_passes: DEFAULT_MAX_PASSES,
            },
            Space::Exact => Decoder::Exact {
                max_exact: DEFAULT_MAX_EXACT,
                max_passes: DEFAULT_MAX_PASSES,
            },
        }
    }

    /// True when the output depends only on the customer set.
    pub fn is_set_function(&self, len: usize) -> bool {
        matches!(self, Decoder::Exact { max_exact, .. } if len <= *max_exact)
    }

    pub fn decode(&self, visits: &[usize], dm: &DistanceMatrix, stats: &mut DecodeStats) -> Result<Tour, DecodeError> {
        match *self {
            Decoder::Identity => Ok(Tour::new(visits.to_vec(), dm)),
            Decoder::Bs { k, max_passes } => {
                stats.decoder_calls += 1;
                let out = bs_fixed_point(visits, k, dm, max_passes)?;
                stats.bs_passes += out.passes as u64;
                Ok(out.tour)
            }
            Decoder::Exact { max_exact, max_passes } => {
                stats.decoder_calls += 1;
                match solve_exact(visits, dm, max_exact) {
                    Ok(t) => {
                        stats.exact_calls += 1;
                        Ok(t)
                    }
                    Err(_) => {
                        if stats.exact_fallbacks == 0 {
                            log::warn!(
                                "route with {} customers exceeds the exact limit {max_exact}; using a window decoder instead",
                                visits.len()
                            );
                        }
                        stats.exact_fallbacks += 1;
                        let k = affordable_k(visits.len());
                        let out = bs_fixed_point(visits, k, dm, max_passes)?;
                        stats.bs_passes += out.passes as u64;
                        Ok(out.tour)
                    }
                }
            }
        }
    }
}

/// Largest window whose state space fits the fallback budget.
pub fn affordable_k(len: usize) -> usize {
    (1..=FALLBACK_K_CAP)
        .rev()
        .find(|&k| {
            let g = BsLayeredGraph::new(len, k);
            (len + 1) * (1usize << g.k()) * (2 * g.k() + 2) <= FALLBACK_STATE_BUDGET
        })
        .unwrap_or(1)
}
