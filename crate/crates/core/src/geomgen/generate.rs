//! Rejection-sampled construction of Shepard-Metzler shapes.
//!
//! A shape is grown from straight segments. The first segment starts at the
//! origin; every later segment starts at an existing *anchor* cell and runs
//! orthogonally to all segments already meeting there:
//!
//! - a free end (one incident segment) continues the chain with a turn;
//! - a joint (two or more incident segments) receives a branch, allowed while
//!   `incident - 2 < max_branch_degree`.
//!
//! Each growth step draws, in this order: branch-or-continue
//! (`branch_probability`, only if a joint is eligible), the anchor (uniform in
//! creation order), the direction (uniform over allowed signed axes) and the
//! length. An attempt that overlaps itself, overshoots `max_cubes`, fails to
//! span all axes, or is achiral is discarded.

use alloc::collections::BTreeSet;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{is_mirror_symmetric, spans_all_axes, Axis, Cell, Polycube, Segment};
use crate::rng::Rng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub min_cubes: u32,
    pub max_cubes: u32,
    pub min_seg: u8,
    pub max_seg: u8,
    /// Extra segments allowed at one joint beyond a plain corner.
    pub max_branch_degree: u32,
    /// Whether segments grown from a branch may branch again.
    pub nested_branches: bool,
    /// Chance that a growth step branches when a joint is eligible.
    pub branch_probability: f64,
    pub max_attempts: u32,
    pub rng_seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            min_cubes: 5,
            max_cubes: 9,
            min_seg: 2,
            max_seg: 4,
            max_branch_degree: 1,
            nested_branches: false,
            branch_probability: 0.25,
            max_attempts: 10_000,
            rng_seed: 0,
        }
    }
}

impl GenConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.min_cubes == 0 || self.min_cubes > self.max_cubes {
            return Err(GenError::InvalidConfig("cube range must satisfy 1 <= min <= max"));
        }
        if self.min_seg < 2 || self.min_seg > self.max_seg {
            return Err(GenError::InvalidConfig("segment range must satisfy 2 <= min <= max"));
        }
        if !(0.0..=1.0).contains(&self.branch_probability) {
            return Err(GenError::InvalidConfig("branch_probability must lie in [0, 1]"));
        }
        if self.max_attempts == 0 {
            return Err(GenError::InvalidConfig("max_attempts must be positive"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum GenError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(&'static str),
    #[error("no valid shape found in {attempts} attempts")]
    GenerationExhausted { attempts: u32 },
}

/// Generates one chiral shape spanning all three axes. Deterministic in
/// `cfg` (including `rng_seed`).
pub fn generate(cfg: &GenConfig) -> Result<Polycube, GenError> {
    cfg.validate()?;
    let mut rng = Rng::new(cfg.rng_seed);
    for _ in 0..cfg.max_attempts {
        if let Some(p) = attempt(cfg, &mut rng) {
            return Ok(p);
        }
    }
    Err(GenError::GenerationExhausted {
        attempts: cfg.max_attempts,
    })
}

struct Growth {
    cells: Vec<Cell>,
    occupied: BTreeSet<Cell>,
    segments: Vec<Segment>,
    in_branch: Vec<bool>,
}

impl Growth {
    /// Segments whose start or end is `c`.
    fn incident(&self, c: Cell) -> impl Iterator<Item = usize> + '_ {
        self.segments
            .iter()
            .enumerate()
            .filter(move |(_, s)| s.start == c || s.end() == c)
            .map(|(i, _)| i)
    }

    /// Endpoint cells in creation order, without repeats.
    fn endpoints(&self) -> Vec<Cell> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for s in &self.segments {
            for c in [s.start, s.end()] {
                if seen.insert(c) {
                    out.push(c);
                }
            }
        }
        out
    }

    fn push(&mut self, seg: Segment, branch: bool) -> bool {
        let skip = usize::from(seg.parent.is_some());
        for c in seg.cells().skip(skip) {
            if !self.occupied.insert(c) {
                return false;
            }
            self.cells.push(c);
        }
        self.segments.push(seg);
        self.in_branch.push(branch);
        true
    }
}

fn draw_length(cfg: &GenConfig, rng: &mut Rng) -> u8 {
    rng.range_inclusive(cfg.min_seg as u32, cfg.max_seg as u32) as u8
}

fn draw_sign(rng: &mut Rng) -> i8 {
    if rng.coin() {
        1
    } else {
        -1
    }
}

fn attempt(cfg: &GenConfig, rng: &mut Rng) -> Option<Polycube> {
    let target = rng.range_inclusive(cfg.min_cubes, cfg.max_cubes) as usize;
    let mut g = Growth {
        cells: Vec::new(),
        occupied: BTreeSet::new(),
        segments: Vec::new(),
        in_branch: Vec::new(),
    };
    let first = Segment {
        start: Cell::ORIGIN,
        axis: Axis::from_index(rng.index(3)),
        sign: draw_sign(rng),
        length: draw_length(cfg, rng),
        parent: None,
    };
    g.push(first, false);

    while g.cells.len() < target {
        let mut free_ends = Vec::new();
        let mut joints = Vec::new();
        for c in g.endpoints() {
            let inc: Vec<usize> = g.incident(c).collect();
            match inc.len() {
                0 => {}
                1 => free_ends.push((c, inc)),
                n => {
                    let nested_ok = cfg.nested_branches || inc.iter().all(|&i| !g.in_branch[i]);
                    if ((n - 2) as u32) < cfg.max_branch_degree && nested_ok {
                        joints.push((c, inc));
                    }
                }
            }
        }
        let branching = !joints.is_empty() && rng.bernoulli(cfg.branch_probability);
        let pool = if branching { &joints } else { &free_ends };
        if pool.is_empty() {
            return None;
        }
        let (anchor, incident) = pool[rng.index(pool.len())].clone();

        let used: BTreeSet<Axis> = incident.iter().map(|&i| g.segments[i].axis).collect();
        let dirs: Vec<(Axis, i8)> = Axis::ALL
            .iter()
            .filter(|a| !used.contains(a))
            .flat_map(|&a| [(a, 1i8), (a, -1i8)])
            .collect();
        if dirs.is_empty() {
            return None;
        }
        let (axis, sign) = dirs[rng.index(dirs.len())];
        let seg = Segment {
            start: anchor,
            axis,
            sign,
            length: draw_length(cfg, rng),
            parent: Some(incident[0]),
        };
        let in_branch = branching || g.in_branch[incident[0]];
        if !g.push(seg, in_branch) {
            return None;
        }
    }

    if g.cells.len() > cfg.max_cubes as usize {
        return None;
    }
    let p = Polycube::from_parts(g.cells, g.segments);
    if !spans_all_axes(&p) || is_mirror_symmetric(&p) {
        return None;
    }
    Some(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn too_few_cubes_exhausts() {
        let cfg = GenConfig {
            min_cubes: 3,
            max_cubes: 3,
            max_attempts: 500,
            ..GenConfig::default()
        };
        assert_eq!(generate(&cfg), Err(GenError::GenerationExhausted { attempts: 500 }));
    }

    #[test]
    fn same_seed_same_shape() {
        let a = generate(&GenConfig::with_seed(42)).unwrap();
        let b = generate(&GenConfig::with_seed(42)).unwrap();
        assert_eq!(a, b);
        assert!(a.violations(&GenConfig::default()).is_empty());
    }

    #[test]
    fn rejects_bad_ranges() {
        let cfg = GenConfig {
            min_seg: 1,
            ..GenConfig::default()
        };
        assert!(matches!(generate(&cfg), Err(GenError::InvalidConfig(_))));
        let cfg = GenConfig {
            min_cubes: 10,
            ..GenConfig::default()
        };
        assert!(matches!(generate(&cfg), Err(GenError::InvalidConfig(_))));
    }

    #[test]
    fn chains_only_without_branching() {
        let cfg = GenConfig {
            max_branch_degree: 0,
            ..GenConfig::default()
        };
        for seed in 0..200 {
            let p = generate(&GenConfig { rng_seed: seed, ..cfg.clone() }).unwrap();
            for c in p.cells() {
                let meeting = p
                    .segments()
                    .iter()
                    .filter(|s| s.start == *c || s.end() == *c)
                    .count();
                assert!(meeting <= 2, "seed {seed}: branch at {c:?}");
            }
        }
    }

    #[test]
    fn branch_degree_is_bounded() {
        for seed in 0..500 {
            let p = generate(&GenConfig::with_seed(seed)).unwrap();
            for c in p.cells() {
                let meeting = p
                    .segments()
                    .iter()
                    .filter(|s| s.start == *c || s.end() == *c)
                    .count();
                assert!(meeting <= 3, "seed {seed}: {meeting} segments at {c:?}");
            }
        }
    }
}
