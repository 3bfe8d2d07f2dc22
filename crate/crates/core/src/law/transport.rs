//! Dense discrete optimal transport by successive shortest paths.
//!
//! Sources carry integer supplies, sinks integer demands with the same total.
//! Each round runs Dijkstra on reduced costs (Johnson potentials) over the
//! residual graph `S → sources → sinks → T`, with backward sink→source arcs
//! for positive flow, and pushes the bottleneck along the shortest path.
//! With unit supplies this is an exact assignment solver, `O(n³)`.

const NONE: usize = usize::MAX;

pub(crate) struct Plan {
    /// `Σ flow_ij · cost_ij`.
    pub total_cost: f64,
    /// Row-major `n × m` flows.
    #[cfg_attr(not(test), allow(dead_code))]
    pub flow: Vec<i64>,
}

/// Minimum of `Σ flow_ij cost_ij` subject to row sums `supply` and column
/// sums `demand`. `cost` is row-major `n × m` and nonnegative.
pub(crate) fn solve(cost: &[f64], supply: &[i64], demand: &[i64]) -> Plan {
    let n = supply.len();
    let m = demand.len();
    debug_assert_eq!(cost.len(), n * m);
    debug_assert_eq!(supply.iter().sum::<i64>(), demand.iter().sum::<i64>());
    // vertex ids: S = 0, source i = 1 + i, sink j = 1 + n + j, T = 1 + n + m
    let v_count = n + m + 2;
    let t_id = v_count - 1;
    let src = |i: usize| 1 + i;
    let snk = |j: usize| 1 + n + j;

    let mut flow = vec![0i64; n * m];
    let mut rem_s = supply.to_vec();
    let mut rem_d = demand.to_vec();
    let mut pot = vec![0.0f64; v_count];
    let mut dist = vec![f64::INFINITY; v_count];
    let mut prev = vec![NONE; v_count];
    let mut done = vec![false; v_count];
    let mut left: i64 = supply.iter().sum();

    while left > 0 {
        dist.iter_mut().for_each(|d| *d = f64::INFINITY);
        prev.iter_mut().for_each(|p| *p = NONE);
        done.iter_mut().for_each(|d| *d = false);
        dist[0] = 0.0;
        loop {
            let mut u = NONE;
            let mut best = f64::INFINITY;
            for (v, (&d, &fin)) in dist.iter().zip(&done).enumerate() {
                if !fin && d < best {
                    best = d;
                    u = v;
                }
            }
            if u == NONE || u == t_id {
                break;
            }
            done[u] = true;
            let du = dist[u];
            let relax = |v: usize, reduced: f64, dist: &mut [f64], prev: &mut [usize]| {
                let cand = du + reduced;
                if cand < dist[v] {
                    dist[v] = cand;
                    prev[v] = u;
                }
            };
            if u == 0 {
                for i in 0..n {
                    if rem_s[i] > 0 {
                        relax(src(i), pot[0] - pot[src(i)], &mut dist, &mut prev);
                    }
                }
            } else if u <= n {
                let i = u - 1;
                let row = &cost[i * m..(i + 1) * m];
                for (j, &c) in row.iter().enumerate() {
                    let v = snk(j);
                    if !done[v] {
                        relax(v, c + pot[u] - pot[v], &mut dist, &mut prev);
                    }
                }
            } else {
                let j = u - 1 - n;
                for i in 0..n {
                    if flow[i * m + j] > 0 && !done[src(i)] {
                        relax(src(i), -cost[i * m + j] + pot[u] - pot[src(i)], &mut dist, &mut prev);
                    }
                }
                if rem_d[j] > 0 {
                    relax(t_id, pot[u] - pot[t_id], &mut dist, &mut prev);
                }
            }
        }
        let reach = dist[t_id];
        assert!(reach.is_finite(), "transport residual graph disconnected");
        for v in 0..v_count {
            pot[v] += dist[v].min(reach);
        }
        // Walk back T ← sink ← source ← sink ← … ← source ← S.
        let mut bottleneck = i64::MAX;
        let mut v = t_id;
        while v != 0 {
            let u = prev[v];
            if u == 0 {
                bottleneck = bottleneck.min(rem_s[v - 1]);
            } else if v == t_id {
                bottleneck = bottleneck.min(rem_d[u - 1 - n]);
            } else if u > n {
                // backward arc sink u → source v
                bottleneck = bottleneck.min(flow[(v - 1) * m + (u - 1 - n)]);
            }
            v = u;
        }
        let mut v = t_id;
        while v != 0 {
            let u = prev[v];
            if u == 0 {
                rem_s[v - 1] -= bottleneck;
            } else if v == t_id {
                rem_d[u - 1 - n] -= bottleneck;
            } else if u > n {
                flow[(v - 1) * m + (u - 1 - n)] -= bottleneck;
            } else {
                flow[(u - 1) * m + (v - 1 - n)] += bottleneck;
            }
            v = u;
        }
        left -= bottleneck;
    }
    let total_cost = flow
        .iter()
        .zip(cost)
        .filter(|(f, _)| **f > 0)
        .map(|(&f, &c)| f as f64 * c)
        .sum();
    Plan { total_cost, flow }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// All permutations, for tiny assignment problems.
    fn brute_assignment(cost: &[f64], n: usize) -> f64 {
        fn rec(cost: &[f64], n: usize, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == n {
                *best = best.min(acc);
                return;
            }
            for j in 0..n {
                if !used[j] {
                    used[j] = true;
                    rec(cost, n, row + 1, used, acc + cost[row * n + j], best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, n, 0, &mut vec![false; n], 0.0, &mut best);
        best
    }

    #[test]
    fn matches_brute_force_assignment() {
        let mut state = 12345u64;
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        for n in 1..=7 {
            for _ in 0..20 {
                let cost: Vec<f64> = (0..n * n).map(|_| next()).collect();
                let plan = solve(&cost, &vec![1; n], &vec![1; n]);
                let brute = brute_assignment(&cost, n);
                assert!((plan.total_cost - brute).abs() < 1e-12, "{n}");
                for i in 0..n {
                    assert_eq!(plan.flow[i * n..(i + 1) * n].iter().sum::<i64>(), 1);
                }
            }
        }
    }

    #[test]
    fn unbalanced_counts() {
        // two points of mass 3 each against three points of mass 2 on a line
        let xs = [0.0, 1.0];
        let ys = [0.0, 0.5, 1.0];
        let cost: Vec<f64> = xs
            .iter()
            .flat_map(|x| ys.iter().map(move |y| (x - y) * (x - y)))
            .collect();
        let plan = solve(&cost, &[3, 3], &[2, 2, 2]);
        // 0 → {0 (2), 0.5 (1)}, 1 → {1 (2), 0.5 (1)}
        assert!((plan.total_cost - 0.5).abs() < 1e-12);
        for j in 0..3 {
            assert_eq!(plan.flow[j] + plan.flow[3 + j], 2);
        }
    }
}
