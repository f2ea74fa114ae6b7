//! Independent reference computations used by the integration and acceptance
//! tests. Nothing here calls into the library's fitting or simulation code.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Sum of squared vertical offsets from `y = a + b·x`, computed directly.
pub fn vertical_sse(points: &[(f64, f64)], a: f64, b: f64) -> f64 {
    points.iter().map(|&(x, y)| (y - a - b * x).powi(2)).sum()
}

/// Sum of squared perpendicular distances to the line through `(px, py)`
/// with direction angle `theta`.
pub fn perpendicular_sse_at_angle(points: &[(f64, f64)], px: f64, py: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    points
        .iter()
        .map(|&(x, y)| (-s * (x - px) + c * (y - py)).powi(2))
        .sum()
}

/// Minimum of `vertical_sse` over an `(a, b)` grid of `2k+1` points per axis
/// with spacing `step`, centered on `(a0, b0)`.
pub fn vertical_grid_min(points: &[(f64, f64)], a0: f64, b0: f64, step: f64, k: i32) -> f64 {
    let mut best = f64::INFINITY;
    for i in -k..=k {
        for j in -k..=k {
            let v = vertical_sse(points, a0 + i as f64 * step, b0 + j as f64 * step);
            best = best.min(v);
        }
    }
    best
}

/// Brute-force orthogonal fit: sweep the direction angle over `[0, π)` with
/// the line pinned to the centroid. Returns `(best angle, best residual)`.
pub fn perpendicular_sweep(points: &[(f64, f64)], step: f64) -> (f64, f64) {
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let cy = points.iter().map(|p| p.1).sum::<f64>() / n;
    let steps = (std::f64::consts::PI / step).ceil() as usize;
    let mut best = (0.0, f64::INFINITY);
    for i in 0..steps {
        let theta = i as f64 * step;
        let r = perpendicular_sse_at_angle(points, cx, cy, theta);
        if r < best.1 {
            best = (theta, r);
        }
    }
    best
}

pub fn random_points(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| (rng.gen_range(lo..hi), rng.gen_range(lo..hi)))
        .collect()
}

/// Centered sums computed with the textbook raw-sum formulas, as an
/// independent check on the library's centered accumulation.
pub fn raw_sums(points: &[(f64, f64)]) -> (f64, f64, f64, f64, f64) {
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let syy: f64 = points.iter().map(|p| p.1 * p.1).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    let (mx, my) = (sx / n, sy / n);
    (
        mx,
        my,
        sxx - n * mx * mx,
        syy - n * my * my,
        sxy - n * mx * my,
    )
}

/// A script step in plain data: `(is_join, cell, node)`.
pub type Step = (bool, u32, String);

/// Reference model of the join/leave rules, tracking join order explicitly.
#[derive(Debug, Clone, Default)]
pub struct ReplayCell {
    /// `(node, join sequence number)`
    pub members: Vec<(String, u64)>,
    pub leader: Option<String>,
    pub joins: u64,
    pub assigned: BTreeMap<String, u32>,
    pub free: Vec<u32>,
}

#[derive(Debug, Clone)]
pub struct Replay {
    pub cells: Vec<ReplayCell>,
    seq: u64,
}

impl Replay {
    /// `cells` cells with `per_cell` addresses each, numbered from 0 globally.
    pub fn new(cells: u32, per_cell: u32) -> Self {
        let cells = (0..cells)
            .map(|c| ReplayCell {
                free: (c * per_cell..(c + 1) * per_cell).collect(),
                ..Default::default()
            })
            .collect();
        Self { cells, seq: 0 }
    }

    pub fn step(&mut self, (is_join, cell, node): &Step) {
        self.seq += 1;
        let c = &mut self.cells[*cell as usize];
        if *is_join {
            if c.members.is_empty() {
                c.leader = Some(node.clone());
            }
            c.members.push((node.clone(), self.seq));
            let ip = c.free.remove(0);
            c.assigned.insert(node.clone(), ip);
            c.joins += 1;
        } else {
            c.members.retain(|(m, _)| m != node);
            let ip = c.assigned.remove(node).expect("leaving node is a member");
            c.free.push(ip);
            if c.leader.as_deref() == Some(node.as_str()) {
                c.leader = c
                    .members
                    .iter()
                    .max_by_key(|(_, s)| *s)
                    .map(|(m, _)| m.clone());
            }
        }
    }
}

/// A random script that is valid by construction: joins only target cells
/// with free addresses and nodes not present anywhere; leaves only target
/// current members.
pub fn random_script(
    rng: &mut ChaCha8Rng,
    max_events: usize,
    cells: u32,
    per_cell: u32,
) -> Vec<Step> {
    let len = rng.gen_range(0..=max_events);
    let mut present: BTreeMap<String, u32> = BTreeMap::new();
    let mut occupancy = vec![0u32; cells as usize];
    let mut fresh = 0u32;
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let open: Vec<u32> = (0..cells)
            .filter(|&c| occupancy[c as usize] < per_cell)
            .collect();
        let do_join = !open.is_empty() && (present.is_empty() || rng.gen_bool(0.6));
        if do_join {
            let cell = open[rng.gen_range(0..open.len())];
            let absent: BTreeSet<String> = (0..fresh)
                .map(|i| format!("n{i}"))
                .filter(|n| !present.contains_key(n))
                .collect();
            let node = if !absent.is_empty() && rng.gen_bool(0.3) {
                absent
                    .iter()
                    .nth(rng.gen_range(0..absent.len()))
                    .unwrap()
                    .clone()
            } else {
                fresh += 1;
                format!("n{}", fresh - 1)
            };
            present.insert(node.clone(), cell);
            occupancy[cell as usize] += 1;
            out.push((true, cell, node));
        } else if !present.is_empty() {
            let idx = rng.gen_range(0..present.len());
            let (node, cell) = present
                .iter()
                .nth(idx)
                .map(|(n, c)| (n.clone(), *c))
                .unwrap();
            present.remove(&node);
            occupancy[cell as usize] -= 1;
            out.push((false, cell, node));
        }
    }
    out
}
