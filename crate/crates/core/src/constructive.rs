//! Clarke-Wright parallel savings construction.

use crate::instance_io::{DistanceMatrix, Instance};
use crate::model::{Cost, Solution};

/// Parallel savings heuristic.
///
/// Savings are `s(i, j) = d(i, 0) + d(0, j) - d(i, j)`, processed in
/// decreasing order with ties broken by `(i, j)`; negative savings are
/// skipped. A merge joins the route ending at `i` with the route starting at
/// `j` when the combined load fits. On symmetric matrices a route may be
/// reversed to bring `i` or `j` to the right end.
pub fn clarke_wright(inst: &Instance, dm: &DistanceMatrix) -> Solution {
    let n = inst.num_customers();
    let symmetric = dm.is_symmetric();
    let mut savings: Vec<(Cost, usize, usize)> = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            if i == j || (symmetric && j < i) {
                continue;
            }
            let s = dm.get(i, 0) + dm.get(0, j) - dm.get(i, j);
            if s >= 0 {
                savings.push((s, i, j));
            }
        }
    }
    savings.sort_unstable_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let mut routes: Vec<Vec<usize>> = (0..=n).map(|v| if v == 0 { Vec::new() } else { vec![v] }).collect();
    let mut loads: Vec<u64> = inst.demands.iter().map(|&q| q as u64).collect();
    let mut owner: Vec<usize> = (0..=n).collect();
    let cap = inst.capacity as u64;

    for (_, i, j) in savings {
        let (a, b) = (owner[i], owner[j]);
        if a == b || loads[a] + loads[b] > cap {
            continue;
        }
        let (ra, rb) = (&routes[a], &routes[b]);
        let i_tail = *ra.last().unwrap() == i;
        let i_head = ra[0] == i;
        let j_head = rb[0] == j;
        let j_tail = *rb.last().unwrap() == j;
        let (rev_a, rev_b) = if i_tail && j_head {
            (false, false)
        } else if !symmetric {
            continue;
        } else if i_head && j_head {
            (true, false)
        } else if i_tail && j_tail {
            (false, true)
        } else if i_head && j_tail {
            (true, true)
        } else {
            continue;
        };
        let mut tail = std::mem::take(&mut routes[b]);
        if rev_b {
            tail.reverse();
        }
        if rev_a {
            routes[a].reverse();
        }
        for &v in &tail {
            owner[v] = a;
        }
        routes[a].extend(tail);
        loads[a] += loads[b];
        loads[b] = 0;
    }
    Solution::from_visits(routes, inst, dm)
}
