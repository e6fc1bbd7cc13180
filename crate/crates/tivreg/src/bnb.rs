//! Best-first branch-and-bound over cubic branches of a 3D parameter space.
//!
//! Both the rotation and the translation search share this skeleton: a
//! max-priority queue of cubes keyed on their upper bound, octant
//! subdivision, and pruning of children whose bound cannot beat the
//! incumbent. Child centers are evaluated exactly when the child is
//! created, which both updates the incumbent as early as possible and
//! yields a secondary queue key: among equal upper bounds the cube whose
//! center already scores best is expanded first, so saturated bound
//! plateaus are traversed as a guided dive instead of a breadth sweep. A
//! child's bound is capped by its parent's, so the sequence of popped upper
//! bounds never increases and the final `upper - best <= gap` certificate
//! is sound.

use std::collections::BinaryHeap;
use std::time::Instant;

use serde::Serialize;

use crate::geometry::Vec3;

/// Cubic branch of a 3D search space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cube {
    pub center: Vec3,
    pub half_side: f64,
    pub depth: u32,
}

impl Cube {
    pub fn new(center: Vec3, half_side: f64, depth: u32) -> Self {
        Cube { center, half_side, depth }
    }

    /// Half of the main diagonal.
    pub fn half_diagonal(&self) -> f64 {
        self.half_side * 3f64.sqrt()
    }

    /// The eight octant children, in a fixed deterministic order.
    pub fn children(&self) -> [Cube; 8] {
        let h = self.half_side / 2.0;
        let d = self.depth + 1;
        std::array::from_fn(|i| {
            let sx = if i & 1 != 0 { h } else { -h };
            let sy = if i & 2 != 0 { h } else { -h };
            let sz = if i & 4 != 0 { h } else { -h };
            Cube::new(self.center + Vec3::new(sx, sy, sz), h, d)
        })
    }

    /// Distance from the origin to the closest point of the cube.
    pub fn distance_to_origin(&self) -> f64 {
        let mut d2 = 0.0;
        for a in 0..3 {
            let c = 0f64.clamp(self.center[a] - self.half_side, self.center[a] + self.half_side);
            d2 += c * c;
        }
        d2.sqrt()
    }
}

/// Whether the search exited with its optimality certificate intact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchStatus {
    /// `final_upper_bound - best_count <= gap` holds.
    Certified,
    /// The depth safeguard dropped branches whose bound still exceeded the
    /// incumbent by more than the gap.
    BestEffort,
}

/// One queue-pop observation: wall-clock offset, the popped (global) upper
/// bound and the incumbent at that point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TraceSample {
    pub elapsed_s: f64,
    pub upper: usize,
    pub lower: usize,
}

/// A concrete search space: bounds and center evaluation per branch.
pub trait BranchProblem {
    fn root(&self) -> Cube;

    /// False when no admissible parameter lies in the cube; such branches
    /// are dropped without bound evaluation.
    fn admit(&self, cube: &Cube) -> bool {
        let _ = cube;
        true
    }

    /// Upper bound on the objective over the whole cube. May stop early and
    /// return any valid over-estimate that is `<= prune_below`, since such
    /// branches are discarded without entering the queue.
    fn upper_bound(&self, cube: &Cube, prune_below: usize) -> usize;

    /// An admissible parameter for the cube (normally its center, projected
    /// if needed) together with its exact objective value.
    fn evaluate_center(&self, cube: &Cube) -> (Vec3, usize);

    /// Exploration heuristic for ordering branches whose upper bounds tie:
    /// typically the branch center scored at a threshold matched to the
    /// branch scale, which still discriminates where both the bound and the
    /// exact-threshold count saturate.
    fn guide_score(&self, cube: &Cube) -> usize;

    /// Secondary objective deciding between incumbents of equal objective
    /// value: typically the consensus at half the threshold, which peaks
    /// nearer the center of the optimal plateau than its first-found edge.
    fn refine_score(&self, point: &Vec3) -> usize;
}

#[derive(Debug, Clone)]
pub struct EngineOutcome {
    pub best_point: Vec3,
    pub best_count: usize,
    pub final_upper_bound: usize,
    pub iterations: u64,
    pub status: SearchStatus,
    pub trace: Vec<TraceSample>,
}

struct Entry {
    upper: usize,
    guide: usize,
    cube: Cube,
    seq: u64,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == std::cmp::Ordering::Equal
    }
}
impl Eq for Entry {}
impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Entry {
    // Max-heap on the upper bound. Ties prefer the best guide score, then
    // the deeper cube, then FIFO.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.upper
            .cmp(&other.upper)
            .then_with(|| self.guide.cmp(&other.guide))
            .then_with(|| self.cube.depth.cmp(&other.cube.depth))
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

/// Runs the search to the `gap` certificate or queue exhaustion.
pub fn best_first_search(
    problem: &impl BranchProblem,
    gap: usize,
    max_depth: u32,
    record_trace: bool,
) -> EngineOutcome {
    let start = Instant::now();
    let root = problem.root();

    let (root_point, root_count) = problem.evaluate_center(&root);
    let mut best_point = root_point;
    let mut best_count = root_count;
    let mut best_refine = problem.refine_score(&root_point);

    let mut heap = BinaryHeap::new();
    let mut seq: u64 = 0;
    heap.push(Entry {
        upper: problem.upper_bound(&root, usize::MAX),
        guide: root_count,
        cube: root,
        seq,
    });

    let mut iterations: u64 = 0;
    let mut trace = Vec::new();
    // Largest bound among branches dropped by the depth safeguard.
    let mut dropped_upper: usize = 0;
    let mut top_at_exit: usize = 0;

    while let Some(entry) = heap.pop() {
        if entry.upper <= best_count.saturating_add(gap) {
            top_at_exit = entry.upper;
            break;
        }
        iterations += 1;

        let (point, count) = problem.evaluate_center(&entry.cube);
        if count > best_count {
            best_count = count;
            best_point = point;
            best_refine = problem.refine_score(&point);
        } else if count == best_count {
            let refine = problem.refine_score(&point);
            if refine > best_refine {
                best_point = point;
                best_refine = refine;
            }
        }
        if record_trace {
            trace.push(TraceSample {
                elapsed_s: start.elapsed().as_secs_f64(),
                upper: entry.upper,
                lower: best_count,
            });
        }

        if entry.cube.depth >= max_depth {
            dropped_upper = dropped_upper.max(entry.upper);
            continue;
        }

        for child in entry.cube.children() {
            if !problem.admit(&child) {
                continue;
            }
            let upper = problem.upper_bound(&child, best_count).min(entry.upper);
            if upper > best_count {
                seq += 1;
                heap.push(Entry { upper, guide: problem.guide_score(&child), cube: child, seq });
            }
        }
    }

    let final_upper_bound = best_count.max(top_at_exit).max(dropped_upper);
    let status = if final_upper_bound - best_count <= gap {
        SearchStatus::Certified
    } else {
        SearchStatus::BestEffort
    };
    EngineOutcome { best_point, best_count, final_upper_bound, iterations, status, trace }
}
