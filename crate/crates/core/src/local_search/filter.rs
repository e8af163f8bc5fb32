//! Move filter on the classical cost of the candidate solution.
//!
//! A move with classical cost `z_new` is filtered when `z_new > (1 + psi) z`.
//! In adaptive mode `psi` is rescaled after every window of checks from the
//! filtered fraction `xi`: multiplied by `alpha` when `xi <= lo`, divided by
//! `alpha` when `xi >= hi`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::model::Cost;

pub const DEFAULT_PSI0: f64 = 0.10;
pub const DEFAULT_ALPHA: f64 = 0.9;
pub const DEFAULT_WINDOW: u64 = 1000;
pub const DEFAULT_XI_LO: f64 = 0.90;
pub const DEFAULT_XI_HI: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    pub psi0: f64,
    pub alpha: f64,
    pub lo: f64,
    pub hi: f64,
    pub window: u64,
}

impl Default for AdaptiveParams {
    fn default() -> Self {
        AdaptiveParams {
            psi0: DEFAULT_PSI0,
            alpha: DEFAULT_ALPHA,
            lo: DEFAULT_XI_LO,
            hi: DEFAULT_XI_HI,
            window: DEFAULT_WINDOW,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FilterConfig {
    /// `psi = infinity`: nothing is filtered.
    Off,
    /// `psi = 0`: only moves that do not increase the classical cost pass.
    Strict,
    Adaptive(AdaptiveParams),
}

impl fmt::Display for FilterConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FilterConfig::Off => write!(f, "off"),
            FilterConfig::Strict => write!(f, "strict"),
            FilterConfig::Adaptive(p) => write!(f, "adaptive:{},{}", p.lo, p.hi),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("invalid filter `{0}`, expected off, strict or adaptive:LO,HI")]
pub struct FilterParseError(String);

impl FromStr for FilterConfig {
    type Err = FilterParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || FilterParseError(s.to_string());
        match s.trim() {
            "off" => Ok(FilterConfig::Off),
            "strict" => Ok(FilterConfig::Strict),
            "adaptive" => Ok(FilterConfig::Adaptive(AdaptiveParams::default())),
            t => {
                let rest = t.strip_prefix("adaptive:").ok_or_else(err)?;
                let (lo, hi) = rest.split_once(',').ok_or_else(err)?;
                let lo: f64 = lo.trim().parse().map_err(|_| err())?;
                let hi: f64 = hi.trim().parse().map_err(|_| err())?;
                if !(0.0..=1.0).contains(&lo) || !(0.0..=1.0).contains(&hi) || lo > hi {
                    return Err(err());
                }
                Ok(FilterConfig::Adaptive(AdaptiveParams {
                    lo,
                    hi,
                    ..AdaptiveParams::default()
                }))
            }
        }
    }
}

/// Summary of the filter threshold over a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PsiSummary {
    pub initial: f64,
    pub min: f64,
    pub max: f64,
    pub last: f64,
    pub windows: u64,
}

#[derive(Debug, Clone)]
pub struct CostFilter {
    config: FilterConfig,
    psi: f64,
    in_window: u64,
    filtered_in_window: u64,
    filtered_total: u64,
    checked_total: u64,
    xi_history: Vec<f64>,
    summary: PsiSummary,
}

impl CostFilter {
    pub fn new(config: FilterConfig) -> Self {
        let psi = match config {
            FilterConfig::Off => f64::INFINITY,
            FilterConfig::Strict => 0.0,
            FilterConfig::Adaptive(p) => p.psi0,
        };
        CostFilter {
            config,
            psi,
            in_window: 0,
            filtered_in_window: 0,
            filtered_total: 0,
            checked_total: 0,
            xi_history: Vec::new(),
            summary: PsiSummary {
                initial: psi,
                min: psi,
                max: psi,
                last: psi,
                windows: 0,
            },
        }
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    /// True when the filter can never reject.
    pub fn is_off(&self) -> bool {
        matches!(self.config, FilterConfig::Off)
    }

    /// Returns true when the move passes. Only adaptive mode keeps windows.
    pub fn check(&mut self, z: Cost, z_new: Cost) -> bool {
        if self.is_off() {
            return true;
        }
        let pass = passes(z, z_new, self.psi);
        self.checked_total += 1;
        if !pass {
            self.filtered_total += 1;
        }
        if let FilterConfig::Adaptive(p) = self.config {
            self.in_window += 1;
            if !pass {
                self.filtered_in_window += 1;
            }
            if self.in_window >= p.window {
                let xi = self.filtered_in_window as f64 / self.in_window as f64;
                self.update_psi(xi, &p);
                self.in_window = 0;
                self.filtered_in_window = 0;
            }
        }
        pass
    }

    fn update_psi(&mut self, xi: f64, p: &AdaptiveParams) {
        if xi <= p.lo {
            self.psi *= p.alpha;
        } else if xi >= p.hi {
            self.psi /= p.alpha;
        }
        self.xi_history.push(xi);
        let s = &mut self.summary;
        s.windows += 1;
        s.min = s.min.min(self.psi);
        s.max = s.max.max(self.psi);
        s.last = self.psi;
    }

    /// Filtered fraction of each completed window.
    pub fn xi_history(&self) -> &[f64] {
        &self.xi_history
    }

    pub fn filtered_total(&self) -> u64 {
        self.filtered_total
    }

    pub fn checked_total(&self) -> u64 {
        self.checked_total
    }

    pub fn summary(&self) -> PsiSummary {
        self.summary
    }
}

/// `z_new <= (1 + psi) z`.
pub fn passes(z: Cost, z_new: Cost, psi: f64) -> bool {
    if psi.is_infinite() {
        return true;
    }
    if psi == 0.0 {
        return z_new <= z;
    }
    (z_new as f64) <= (1.0 + psi) * z as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn threshold_boundary() {
        assert!(passes(1000, 1050, 0.05));
        assert!(!passes(1000, 1051, 0.05));
        assert!(passes(1000, 1000, 0.0));
        assert!(!passes(1000, 1001, 0.0));
        assert!(passes(1000, i64::MAX / 2, f64::INFINITY));
    }

    #[test]
    fn adaptive_rescales_per_window() {
        let params = AdaptiveParams {
            window: 10,
            ..Default::default()
        };
        let mut f = CostFilter::new(FilterConfig::Adaptive(params));
        // Nothing filtered: psi shrinks.
        for _ in 0..10 {
            assert!(f.check(1000, 1001));
        }
        assert!((f.psi() - 0.09).abs() < 1e-12);
        // Everything filtered: psi grows back.
        for _ in 0..10 {
            f.check(1000, 5000);
        }
        assert!((f.psi() - 0.10).abs() < 1e-12);
        assert_eq!(f.xi_history(), &[0.0, 1.0]);
        assert_eq!(f.summary().windows, 2);
    }

    #[test]
    fn parse_filter() {
        assert_eq!("off".parse::<FilterConfig>().unwrap(), FilterConfig::Off);
        assert_eq!("strict".parse::<FilterConfig>().unwrap(), FilterConfig::Strict);
        match "adaptive:0.8,0.9".parse::<FilterConfig>().unwrap() {
            FilterConfig::Adaptive(p) => assert_eq!((p.lo, p.hi), (0.8, 0.9)),
            other => panic!("{other:?}"),
        }
        assert!("adaptive:0.9,0.8".parse::<FilterConfig>().is_err());
        assert!("loose".parse::<FilterConfig>().is_err());
    }
}
