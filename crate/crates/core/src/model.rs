//! Routes, solutions, feasibility checks and the gap metric.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance_io::{DistanceMatrix, Instance};

pub type Cost = i64;
pub type Load = u32;

/// A depot-anchored visiting order with its cost.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tour {
    pub visits: Vec<usize>,
    pub cost: Cost,
}

impl Tour {
    pub fn new(visits: Vec<usize>, dm: &DistanceMatrix) -> Self {
        let cost = dm.tour_cost(&visits);
        Tour { visits, cost }
    }
}

/// A single vehicle route; `visits` excludes the depot at both ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub visits: Vec<usize>,
    pub load: Load,
    pub cost: Cost,
}

impl Route {
    pub fn new(visits: Vec<usize>, inst: &Instance, dm: &DistanceMatrix) -> Self {
        let load = visits.iter().map(|&v| inst.demands[v]).sum();
        let cost = dm.tour_cost(&visits);
        Route { visits, load, cost }
    }

    pub fn len(&self) -> usize {
        self.visits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.visits.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub cost: Cost,
}

impl Solution {
    /// Builds a solution from visit lists, dropping empty ones.
    pub fn from_visits(routes: Vec<Vec<usize>>, inst: &Instance, dm: &DistanceMatrix) -> Self {
        let routes: Vec<Route> = routes
            .into_iter()
            .filter(|r| !r.is_empty())
            .map(|r| Route::new(r, inst, dm))
            .collect();
        let cost = routes.iter().map(|r| r.cost).sum();
        Solution { routes, cost }
    }

    pub fn num_customers(&self) -> usize {
        self.routes.iter().map(|r| r.len()).sum()
    }

    /// Recomputes route loads and costs from scratch and returns the total.
    pub fn refresh(&mut self, inst: &Instance, dm: &DistanceMatrix) -> Cost {
        for r in &mut self.routes {
            r.load = r.visits.iter().map(|&v| inst.demands[v]).sum();
            r.cost = dm.tour_cost(&r.visits);
        }
        self.cost = self.routes.iter().map(|r| r.cost).sum();
        self.cost
    }
}

/// Total cost recomputed from the matrix, ignoring cached values.
pub fn solution_cost(sol: &Solution, dm: &DistanceMatrix) -> Cost {
    sol.routes.iter().map(|r| dm.tour_cost(&r.visits)).sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct FeasibilityReport {
    pub missing: Vec<usize>,
    pub duplicated: Vec<usize>,
    /// Vertex ids that are the depot or out of range.
    pub invalid: Vec<usize>,
    /// `(route index, load)` for every overloaded route.
    pub overloaded: Vec<(usize, u64)>,
    pub empty_routes: Vec<usize>,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.missing.is_empty()
            && self.duplicated.is_empty()
            && self.invalid.is_empty()
            && self.overloaded.is_empty()
            && self.empty_routes.is_empty()
    }
}

/// Checks that every customer is visited exactly once and no route is overloaded.
pub fn check_feasibility(sol: &Solution, inst: &Instance) -> FeasibilityReport {
    let nv = inst.num_vertices();
    let mut seen = vec![0usize; nv];
    let mut rep = FeasibilityReport::default();
    for (ri, r) in sol.routes.iter().enumerate() {
        if r.visits.is_empty() {
            rep.empty_routes.push(ri);
        }
        let mut load = 0u64;
        for &v in &r.visits {
            if v == 0 || v >= nv {
                rep.invalid.push(v);
                continue;
            }
            seen[v] += 1;
            load += inst.demands[v] as u64;
        }
        if load > inst.capacity as u64 {
            rep.overloaded.push((ri, load));
        }
    }
    for (v, &count) in seen.iter().enumerate().skip(1) {
        match count {
            0 => rep.missing.push(v),
            1 => {}
            _ => rep.duplicated.push(v),
        }
    }
    rep
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("best known cost must be positive, got {0}")]
    NonPositiveBks(Cost),
}

/// Relative gap in percent: `100 (z - bks) / bks`.
pub fn gap_to_bks(z: Cost, bks: Cost) -> Result<f64, GapError> {
    if bks <= 0 {
        return Err(GapError::NonPositiveBks(bks));
    }
    Ok(100.0 * (z - bks) as f64 / bks as f64)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolutionParseError {
    #[error("line {0}: {1}")]
    Syntax(usize, String),
}

/// Writes `Route #k: v1 v2 ...` lines followed by `Cost z`.
pub fn write_solution(sol: &Solution) -> String {
    let mut s = String::new();
    for (i, r) in sol.routes.iter().enumerate() {
        let vs: Vec<String> = r.visits.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(s, "Route #{}: {}", i + 1, vs.join(" "));
    }
    let _ = writeln!(s, "Cost {}", sol.cost);
    s
}

/// Parses solution text into visit lists and the stated cost, if any.
pub fn parse_solution(text: &str) -> Result<(Vec<Vec<usize>>, Option<Cost>), SolutionParseError> {
    let mut routes = Vec::new();
    let mut cost = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("Route") {
            let (_, body) = rest
                .split_once(':')
                .ok_or_else(|| SolutionParseError::Syntax(idx + 1, "missing `:`".into()))?;
            let visits = body
                .split_whitespace()
                .map(|t| t.parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|e| SolutionParseError::Syntax(idx + 1, e.to_string()))?;
            routes.push(visits);
        } else if let Some(rest) = line.strip_prefix("Cost") {
            let c = rest
                .trim()
                .parse::<f64>()
                .map_err(|e| SolutionParseError::Syntax(idx + 1, e.to_string()))?;
            cost = Some(c.round() as Cost);
        }
    }
    Ok((routes, cost))
}
