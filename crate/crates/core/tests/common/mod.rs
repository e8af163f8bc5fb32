#![allow(dead_code)]

use bsls_core::local_search::{Move, MoveKind};
use bsls_core::{Cost, DistanceMatrix, Instance, Solution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Customers uniform on a square, depot at the center, demands 1..=10.
pub fn euclid_instance(n: usize, capacity: u32, seed: u64) -> Instance {
    let mut r = rng(seed);
    let mut coords = vec![(500.0, 500.0)];
    let mut demands = vec![0];
    for _ in 0..n {
        coords.push((r.gen_range(0..1000) as f64, r.gen_range(0..1000) as f64));
        demands.push(r.gen_range(1..=10));
    }
    Instance::from_coords(format!("euc-{n}-{seed}"), capacity, coords, demands).unwrap()
}

/// Random integer matrix over `n + 1` vertices, symmetric or not.
pub fn random_matrix(n: usize, symmetric: bool, seed: u64) -> DistanceMatrix {
    let mut r = rng(seed);
    let nv = n + 1;
    let mut rows = vec![vec![0 as Cost; nv]; nv];
    for i in 0..nv {
        for j in 0..nv {
            if i == j {
                continue;
            }
            if symmetric && j < i {
                rows[i][j] = rows[j][i];
            } else {
                rows[i][j] = r.gen_range(1..100);
            }
        }
    }
    DistanceMatrix::from_rows(&rows)
}

pub fn matrix_instance(n: usize, capacity: u32, symmetric: bool, seed: u64) -> Instance {
    let dm = random_matrix(n, symmetric, seed);
    let rows: Vec<Vec<Cost>> = (0..=n).map(|i| (0..=n).map(|j| dm.get(i, j)).collect()).collect();
    let mut r = rng(seed ^ 0x5eed);
    let mut demands = vec![0];
    demands.extend((0..n).map(|_| r.gen_range(1..=5)));
    Instance::from_matrix(format!("mat-{n}-{seed}"), capacity, &rows, demands).unwrap()
}

/// Random partition of all customers into `k` non-empty routes, ignoring capacity.
pub fn random_partition(n: usize, k: usize, r: &mut impl Rng) -> Vec<Vec<usize>> {
    let mut cs: Vec<usize> = (1..=n).collect();
    cs.shuffle(r);
    let k = k.clamp(1, n);
    let mut cuts: Vec<usize> = (1..n).collect();
    cuts.shuffle(r);
    let mut cuts: Vec<usize> = cuts.into_iter().take(k - 1).collect();
    cuts.sort();
    let mut out = Vec::new();
    let mut prev = 0;
    for c in cuts.into_iter().chain(std::iter::once(n)) {
        out.push(cs[prev..c].to_vec());
        prev = c;
    }
    out
}

/// Routes of `customers` greedily filled in the given order up to capacity.
pub fn greedy_routes(inst: &Instance, order: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![Vec::new()];
    let mut load = 0;
    for &v in order {
        let q = inst.demands[v];
        if load + q > inst.capacity {
            out.push(Vec::new());
            load = 0;
        }
        out.last_mut().unwrap().push(v);
        load += q;
    }
    out
}

pub fn locate(routes: &[Vec<usize>], v: usize) -> (usize, usize) {
    for (r, route) in routes.iter().enumerate() {
        if let Some(p) = route.iter().position(|&x| x == v) {
            return (r, p);
        }
    }
    panic!("vertex {v} not found");
}

/// Applies a move directly on visit vectors. Returns the replacement routes
/// (route index, new visits) or `None` when the move is void.
pub fn naive_apply(routes: &[Vec<usize>], mv: &Move) -> Option<Vec<(usize, Vec<usize>)>> {
    let (u, v) = (mv.u, mv.v);
    if u == v {
        return None;
    }
    let (ru, iu) = locate(routes, u);
    let (rv, iv) = locate(routes, v);
    if mv.at_start && iv != 0 {
        return None;
    }
    match mv.kind {
        MoveKind::Relocate1 | MoveKind::Relocate2 => {
            let w = if mv.kind == MoveKind::Relocate1 { 1 } else { 2 };
            if iu + w > routes[ru].len() {
                return None;
            }
            let block: Vec<usize> = routes[ru][iu..iu + w].to_vec();
            if block.contains(&v) && !mv.at_start {
                return None;
            }
            let mut work: Vec<Vec<usize>> = routes.to_vec();
            work[ru].drain(iu..iu + w);
            // Insertion index in the (possibly shortened) target route.
            let at = if mv.at_start {
                0
            } else {
                work[rv].iter().position(|&x| x == v).unwrap() + 1
            };
            if ru == rv && at == iu {
                return None;
            }
            for (off, &b) in block.iter().enumerate() {
                work[rv].insert(at + off, b);
            }
            Some(changes(&work, ru, rv))
        }
        MoveKind::Swap11 | MoveKind::Swap21 | MoveKind::Swap22 => {
            if mv.at_start {
                return None;
            }
            let wu = if mv.kind == MoveKind::Swap11 { 1 } else { 2 };
            let wv = if mv.kind == MoveKind::Swap22 { 2 } else { 1 };
            if iu + wu > routes[ru].len() || iv + wv > routes[rv].len() {
                return None;
            }
            let mut work: Vec<Vec<usize>> = routes.to_vec();
            if ru != rv {
                let a: Vec<usize> = work[ru].splice(iu..iu + wu, Vec::new()).collect();
                let b: Vec<usize> = work[rv].splice(iv..iv + wv, a).collect();
                work[ru].splice(iu..iu, b);
            } else {
                let (x, wx, y, wy) = if iu < iv { (iu, wu, iv, wv) } else { (iv, wv, iu, wu) };
                if x + wx > y {
                    return None;
                }
                let r = &routes[ru];
                let mut out = r[..x].to_vec();
                out.extend_from_slice(&r[y..y + wy]);
                out.extend_from_slice(&r[x + wx..y]);
                out.extend_from_slice(&r[x..x + wx]);
                out.extend_from_slice(&r[y + wy..]);
                work[ru] = out;
            }
            Some(changes(&work, ru, rv))
        }
        MoveKind::TwoOpt => {
            if ru != rv {
                return None;
            }
            // Segment strictly after the earlier anchor up to the later anchor.
            let (lo, hi) = if mv.at_start {
                (0, iu + 1)
            } else if iu < iv {
                (iu + 1, iv + 1)
            } else {
                (iv + 1, iu + 1)
            };
            if hi < lo + 2 {
                return None;
            }
            let mut work: Vec<Vec<usize>> = routes.to_vec();
            work[ru][lo..hi].reverse();
            Some(changes(&work, ru, rv))
        }
        MoveKind::TwoOptStar => {
            if ru == rv {
                return None;
            }
            let cut_v = if mv.at_start { 0 } else { iv + 1 };
            if iu + 1 == routes[ru].len() && cut_v == routes[rv].len() {
                return None;
            }
            let mut work: Vec<Vec<usize>> = routes.to_vec();
            let tail_u: Vec<usize> = work[ru].split_off(iu + 1);
            let tail_v: Vec<usize> = work[rv].split_off(cut_v);
            work[ru].extend(tail_v);
            work[rv].extend(tail_u);
            Some(changes(&work, ru, rv))
        }
    }
}

fn changes(work: &[Vec<usize>], ru: usize, rv: usize) -> Vec<(usize, Vec<usize>)> {
    if ru == rv {
        vec![(ru, work[ru].clone())]
    } else {
        vec![(ru, work[ru].clone()), (rv, work[rv].clone())]
    }
}

/// All permutations of `items` in lexicographic order of index.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Optimal TSP cost over all orders of `customers`.
pub fn brute_tsp(customers: &[usize], dm: &DistanceMatrix) -> Cost {
    permutations(customers).iter().map(|p| dm.tour_cost(p)).min().unwrap_or(0)
}

pub fn solution_from(routes: Vec<Vec<usize>>, inst: &Instance, dm: &DistanceMatrix) -> Solution {
    Solution::from_visits(routes, inst, dm)
}
