//! First-improvement granular local search over a chosen evaluation space.
//!
//! Candidate moves are built from neighbor lists and scanned in a random
//! order each sweep. A candidate is rejected by the O(1) capacity check,
//! then by the cost filter on its classical cost, and finally evaluated by
//! decoding the changed routes. It is applied when the decoded cost of the
//! changed routes is strictly lower than before. The search stops after a
//! sweep without improvement, or when the time or evaluation budget runs out.

pub mod filter;
pub mod moves;

use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::instance_io::{DistanceMatrix, Instance, NeighborLists};
use crate::model::{Cost, Load, Route, Solution};
use crate::route_memory::{GlobalMemory, MemoryStats};
use crate::seq_concat::{HashParams, SeqMeta, SubseqTable};
use crate::space::{DecodeError, DecodeStats, Decoder};

pub use filter::{AdaptiveParams, CostFilter, FilterConfig, PsiSummary};
pub use moves::{materialize, resolve, Move, MoveKind, NewRoute, NewRoutes, Piece, Pieces, Positions};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SearchError {
    #[error(transparent)]
    Decode(#[from] DecodeError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsConfig {
    pub filter: FilterConfig,
    pub time_limit: Option<Duration>,
    /// Upper bound on the number of evaluated candidates.
    pub max_evaluations: Option<u64>,
    /// Keep a record of every applied move.
    pub record_trace: bool,
}

impl Default for LsConfig {
    fn default() -> Self {
        LsConfig {
            filter: FilterConfig::Adaptive(AdaptiveParams::default()),
            time_limit: None,
            max_evaluations: None,
            record_trace: false,
        }
    }
}

/// One applied move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AppliedMove {
    pub mv: Move,
    /// Decoded cost of the changed routes before the move.
    pub before: Cost,
    /// Decoded cost of the replacement routes.
    pub after: Cost,
    /// Solution cost after the move.
    pub total: Cost,
    /// Replacement routes, empty ones included.
    pub routes: Vec<Vec<usize>>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LsStats {
    pub sweeps: u64,
    pub evaluations: u64,
    pub capacity_rejects: u64,
    pub filtered: u64,
    pub decoded_moves: u64,
    pub applied: u64,
    pub decode: DecodeStats,
    pub memory: MemoryStats,
    pub psi: PsiSummary,
    pub xi_history: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LsOutcome {
    pub solution: Solution,
    /// False when a budget stopped the search before a local minimum.
    pub converged: bool,
    pub stats: LsStats,
    pub trace: Vec<AppliedMove>,
}

/// Classical evaluation of a move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicalEval {
    pub loads: Vec<Load>,
    pub costs: Vec<Cost>,
    pub capacity_ok: bool,
}

/// Working solution with position indexes and subsequence metadata.
#[derive(Debug, Clone)]
pub struct SearchState<'a> {
    inst: &'a Instance,
    dm: &'a DistanceMatrix,
    params: HashParams,
    routes: Vec<Route>,
    table: SubseqTable,
    route_of: Vec<usize>,
    pos_of: Vec<usize>,
    total: Cost,
}

impl Positions for SearchState<'_> {
    #[inline]
    fn route_of(&self, v: usize) -> usize {
        self.route_of[v]
    }
    #[inline]
    fn pos_of(&self, v: usize) -> usize {
        self.pos_of[v]
    }
    #[inline]
    fn route_len(&self, r: usize) -> usize {
        self.routes[r].visits.len()
    }
    #[inline]
    fn visit(&self, r: usize, pos: usize) -> usize {
        self.routes[r].visits[pos - 1]
    }
}

impl<'a> SearchState<'a> {
    /// Takes the solution as given; route costs are recomputed in their current order.
    pub fn new(inst: &'a Instance, dm: &'a DistanceMatrix, sol: &Solution) -> Self {
        let params = HashParams::new(inst.num_customers());
        let visits: Vec<Vec<usize>> = sol.routes.iter().filter(|r| !r.is_empty()).map(|r| r.visits.clone()).collect();
        let table = SubseqTable::new(&visits, &inst.demands, dm, &params);
        let routes: Vec<Route> = visits.into_iter().map(|v| Route::new(v, inst, dm)).collect();
        let mut s = SearchState {
            inst,
            dm,
            params,
            route_of: vec![usize::MAX; inst.num_vertices()],
            pos_of: vec![0; inst.num_vertices()],
            total: routes.iter().map(|r| r.cost).sum(),
            routes,
            table,
        };
        for r in 0..s.routes.len() {
            s.index_route(r);
        }
        s
    }

    fn index_route(&mut self, r: usize) {
        for (i, &v) in self.routes[r].visits.iter().enumerate() {
            self.route_of[v] = r;
            self.pos_of[v] = i + 1;
        }
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn total(&self) -> Cost {
        self.total
    }

    pub fn params(&self) -> &HashParams {
        &self.params
    }

    pub fn solution(&self) -> Solution {
        Solution {
            routes: self.routes.clone(),
            cost: self.total,
        }
    }

    #[inline]
    fn piece_meta(&self, p: &Piece) -> SeqMeta {
        match *p {
            Piece::Fwd { r, a, b } => *self.table.route(r).fwd(a, b),
            Piece::Rev { r, a, b } => *self.table.route(r).rev(a, b),
            Piece::Single(v) => *self.table.single(v),
        }
    }

    /// Metadata of the closed route `[0, pieces.., 0]`.
    pub fn closed_meta(&self, pieces: &[Piece]) -> SeqMeta {
        let depot = *self.table.single(0);
        let mut acc = depot;
        for p in pieces {
            acc = acc.concat(&self.piece_meta(p), self.dm, &self.params);
        }
        acc.concat(&depot, self.dm, &self.params)
    }

    /// Loads and classical costs of the routes produced by `mv`.
    pub fn classical_eval(&self, mv: &Move) -> Option<ClassicalEval> {
        let nr = resolve(self, mv)?;
        let mut e = ClassicalEval {
            loads: Vec::new(),
            costs: Vec::new(),
            capacity_ok: true,
        };
        for r in &nr {
            let m = self.closed_meta(&r.pieces);
            e.loads.push(m.q);
            e.costs.push(m.c);
            e.capacity_ok &= m.q <= self.inst.capacity;
        }
        Some(e)
    }

    /// Replacement visit lists for `mv` in classical order.
    pub fn new_visits(&self, mv: &Move) -> Option<Vec<(usize, Vec<usize>)>> {
        let nr = resolve(self, mv)?;
        Some(
            nr.iter()
                .map(|r| {
                    let mut v = Vec::new();
                    materialize(self, &r.pieces, &mut v);
                    (r.route, v)
                })
                .collect(),
        )
    }

    /// Replaces routes with new visit orders and removes emptied ones.
    pub fn replace_routes(&mut self, changes: Vec<(usize, Vec<usize>)>) {
        let mut touched: Vec<usize> = Vec::with_capacity(changes.len());
        for (r, visits) in changes {
            let old = self.routes[r].cost;
            self.routes[r] = Route::new(visits, self.inst, self.dm);
            self.total += self.routes[r].cost - old;
            touched.push(r);
        }
        for &r in &touched {
            self.table
                .rebuild(r, &self.routes[r].visits, &self.inst.demands, self.dm, &self.params);
            self.index_route(r);
        }
        touched.sort_unstable_by(|a, b| b.cmp(a));
        touched.dedup();
        for r in touched {
            if self.routes[r].is_empty() {
                self.routes.swap_remove(r);
                self.table.swap_remove(r);
                if r < self.routes.len() {
                    self.index_route(r);
                }
            }
        }
    }
}

/// Decodes every route of `sol` through the memory.
pub fn decode_solution(
    sol: &Solution,
    inst: &Instance,
    dm: &DistanceMatrix,
    decoder: &Decoder,
    memory: &mut GlobalMemory,
    dstats: &mut DecodeStats,
) -> Result<Solution, DecodeError> {
    let params = HashParams::new(inst.num_customers());
    let mut routes = Vec::with_capacity(sol.routes.len());
    for r in sol.routes.iter().filter(|r| !r.is_empty()) {
        let t = if *decoder == Decoder::Identity && !memory.config().tunneling {
            crate::model::Tour::new(r.visits.clone(), dm)
        } else {
            let mut seq = Vec::with_capacity(r.visits.len() + 2);
            seq.push(0);
            seq.extend_from_slice(&r.visits);
            seq.push(0);
            let meta = crate::seq_concat::meta_of(&seq, &inst.demands, dm, &params);
            memory.decode_with_tunneling(&r.visits, &meta, decoder, dm, dstats)?
        };
        routes.push(Route::new(t.visits, inst, dm));
    }
    let cost = routes.iter().map(|r| r.cost).sum();
    Ok(Solution { routes, cost })
}

/// Every `(kind, u, v, at_start)` candidate derived from the neighbor lists.
pub fn candidate_moves(nl: &NeighborLists) -> Vec<Move> {
    let mut out = Vec::new();
    for u in 1..nl.len() {
        for &v in nl.of(u) {
            for kind in MoveKind::ALL {
                out.push(Move { kind, u, v, at_start: false });
                if kind.has_start_variant() {
                    out.push(Move { kind, u, v, at_start: true });
                }
            }
        }
    }
    out
}

/// Same candidate set in a uniformly shuffled order.
pub fn enumerate_moves<R: Rng + ?Sized>(nl: &NeighborLists, rng: &mut R) -> Vec<Move> {
    let mut c = candidate_moves(nl);
    c.shuffle(rng);
    c
}

enum Verdict {
    Void,
    Capacity,
    Filtered,
    Rejected,
    Improving { before: Cost, after: Cost },
}

struct Evaluator<'m> {
    decoder: Decoder,
    memory: &'m mut GlobalMemory,
    filter: CostFilter,
    dstats: DecodeStats,
    scratch: Vec<usize>,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, s: &SearchState, mv: &Move) -> Result<Verdict, SearchError> {
        let Some(nr) = resolve(s, mv) else {
            return Ok(Verdict::Void);
        };
        let mut metas: smallvec::SmallVec<[SeqMeta; 2]> = smallvec::SmallVec::new();
        let mut before = 0;
        for r in &nr {
            let m = s.closed_meta(&r.pieces);
            if m.q > s.inst.capacity {
                return Ok(Verdict::Capacity);
            }
            before += s.routes[r.route].cost;
            metas.push(m);
        }
        let classical: Cost = metas.iter().map(|m| m.c).sum();
        if !self.filter.check(s.total, s.total - before + classical) {
            return Ok(Verdict::Filtered);
        }
        let after = if self.decoder == Decoder::Identity && !self.memory.config().tunneling {
            classical
        } else {
            let mut after = 0;
            for (r, m) in nr.iter().zip(&metas) {
                if r.pieces.is_empty() {
                    continue;
                }
                self.scratch.clear();
                materialize(s, &r.pieces, &mut self.scratch);
                after += self
                    .memory
                    .decode_cost(&self.scratch, m, &self.decoder, s.dm, &mut self.dstats)?;
                if after >= before {
                    break;
                }
            }
            after
        };
        Ok(if after < before {
            Verdict::Improving { before, after }
        } else {
            Verdict::Rejected
        })
    }

    fn decoded_changes(&mut self, s: &SearchState, mv: &Move) -> Result<Vec<(usize, Vec<usize>)>, SearchError> {
        let nr = resolve(s, mv).expect("applied move must resolve");
        let mut out = Vec::with_capacity(nr.len());
        for r in &nr {
            let mut visits = Vec::new();
            materialize(s, &r.pieces, &mut visits);
            if !visits.is_empty() && !(self.decoder == Decoder::Identity && !self.memory.config().tunneling) {
                let m = s.closed_meta(&r.pieces);
                visits = self
                    .memory
                    .decode_with_tunneling(&visits, &m, &self.decoder, s.dm, &mut self.dstats)?
                    .visits;
            }
            out.push((r.route, visits));
        }
        Ok(out)
    }
}

/// Runs the search from `init`, whose routes should already be decoded for `decoder`.
#[allow(clippy::too_many_arguments)]
pub fn run_local_search<R: Rng + ?Sized>(
    inst: &Instance,
    dm: &DistanceMatrix,
    nl: &NeighborLists,
    init: &Solution,
    decoder: Decoder,
    memory: &mut GlobalMemory,
    cfg: &LsConfig,
    rng: &mut R,
) -> Result<LsOutcome, SearchError> {
    let start = Instant::now();
    let deadline = cfg.time_limit.map(|t| start + t);
    let mut state = SearchState::new(inst, dm, init);
    let mut ev = Evaluator {
        decoder,
        memory,
        filter: CostFilter::new(cfg.filter),
        dstats: DecodeStats::default(),
        scratch: Vec::new(),
    };
    let mut stats = LsStats::default();
    let mut trace = Vec::new();
    let mut candidates = candidate_moves(nl);
    let mut converged = false;

    'outer: loop {
        candidates.shuffle(rng);
        stats.sweeps += 1;
        let mut improved = false;
        for mv in &candidates {
            if stats.evaluations % 256 == 0 {
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        break 'outer;
                    }
                }
            }
            if cfg.max_evaluations.is_some_and(|b| stats.evaluations >= b) {
                break 'outer;
            }
            stats.evaluations += 1;
            match ev.evaluate(&state, mv)? {
                Verdict::Void => stats.evaluations -= 1,
                Verdict::Capacity => stats.capacity_rejects += 1,
                Verdict::Filtered => stats.filtered += 1,
                Verdict::Rejected => stats.decoded_moves += 1,
                Verdict::Improving { before, after } => {
                    stats.decoded_moves += 1;
                    let changes = ev.decoded_changes(&state, mv)?;
                    let routes: Vec<Vec<usize>> = if cfg.record_trace {
                        changes.iter().map(|(_, v)| v.clone()).collect()
                    } else {
                        Vec::new()
                    };
                    state.replace_routes(changes);
                    stats.applied += 1;
                    improved = true;
                    if cfg.record_trace {
                        trace.push(AppliedMove {
                            mv: *mv,
                            before,
                            after,
                            total: state.total,
                            routes,
                        });
                    }
                }
            }
        }
        if !improved {
            converged = true;
            break;
        }
    }

    stats.decode = ev.dstats;
    stats.memory = *ev.memory.stats();
    stats.psi = ev.filter.summary();
    stats.xi_history = ev.filter.xi_history().to_vec();
    Ok(LsOutcome {
        solution: state.solution(),
        converged,
        stats,
        trace,
    })
}
