//! Local search for the capacitated vehicle routing problem where each route
//! can be evaluated in its given order, after Balas-Simonetti reordering with
//! a window `k`, or by an exact TSP solve.
//!
//! The usual entry point is [`harness::solve`] for a single run or
//! [`harness::run_benchmark`] for batches.

pub mod balas_simonetti;
pub mod constructive;
pub mod exact_tsp;
pub mod harness;
pub mod instance_io;
pub mod local_search;
pub mod model;
pub mod route_memory;
pub mod seq_concat;
pub mod space;

pub use balas_simonetti::{bs_brute_oracle, bs_fixed_point, bs_pass, BsError, BsOutcome};
pub use constructive::clarke_wright;
pub use exact_tsp::{solve_exact, ExactError};
pub use harness::{run_benchmark, solve, ReportFormat, RunConfig, RunReport};
pub use instance_io::{load_instance, parse_cvrplib, DistanceMatrix, Instance, NeighborLists, ParseError};
pub use local_search::{run_local_search, FilterConfig, LsConfig, LsOutcome, Move, MoveKind, SearchError};
pub use model::{check_feasibility, gap_to_bks, Cost, Load, Route, Solution, Tour};
pub use route_memory::{GlobalMemory, MemoryConfig};
pub use space::{Decoder, Space};
