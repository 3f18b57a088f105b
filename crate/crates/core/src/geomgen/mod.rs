//! Shepard-Metzler polycubes: lattice cells, the cube rotation group,
//! canonical forms, mirroring and chirality.
//!
//! Two polycubes are rotation-equivalent iff their canonical cell sets are
//! equal. A shape is kept by the generator only if it is chiral, i.e. its
//! mirror image is not rotation-equivalent to it.

mod generate;
mod rotation;

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use generate::{generate, GenConfig, GenError};
pub use rotation::{rotation_group, LatticeRotation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
    pub z: i32,
}

impl Cell {
    pub const ORIGIN: Cell = Cell { x: 0, y: 0, z: 0 };

    pub const fn new(x: i32, y: i32, z: i32) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn coord(&self, axis: Axis) -> i32 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    #[inline]
    pub fn step(&self, axis: Axis, delta: i32) -> Cell {
        let mut c = *self;
        match axis {
            Axis::X => c.x += delta,
            Axis::Y => c.y += delta,
            Axis::Z => c.z += delta,
        }
        c
    }

    pub fn neighbors(&self) -> [Cell; 6] {
        [
            self.step(Axis::X, 1),
            self.step(Axis::X, -1),
            self.step(Axis::Y, 1),
            self.step(Axis::Y, -1),
            self.step(Axis::Z, 1),
            self.step(Axis::Z, -1),
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Axis {
        Self::ALL[i]
    }
}

/// A straight run of `length` cells starting at `start` (the joint it grew
/// from) and heading in direction `sign * e_axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Cell,
    pub axis: Axis,
    pub sign: i8,
    pub length: u8,
    /// Segment this one grew from; `None` for the first.
    pub parent: Option<usize>,
}

impl Segment {
    pub fn end(&self) -> Cell {
        self.start
            .step(self.axis, self.sign as i32 * (self.length as i32 - 1))
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.length as i32).map(move |k| self.start.step(self.axis, self.sign as i32 * k))
    }
}

/// A finite face-connected set of unit cubes. Cells are kept sorted and
/// unique; `segments` records how the shape was grown, if known.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polycube {
    cells: Vec<Cell>,
    segments: Vec<Segment>,
}

impl Polycube {
    /// Builds a shape from raw cells (sorted, duplicates dropped), with no
    /// construction history.
    pub fn from_cells(cells: impl IntoIterator<Item = Cell>) -> Self {
        let set: BTreeSet<Cell> = cells.into_iter().collect();
        Self {
            cells: set.into_iter().collect(),
            segments: Vec::new(),
        }
    }

    pub(crate) fn from_parts(cells: Vec<Cell>, segments: Vec<Segment>) -> Self {
        let mut p = Self::from_cells(cells);
        p.segments = segments;
        p
    }

    /// Cells in lexicographic order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        self.cells.binary_search(&c).is_ok()
    }

    /// Inclusive `(min, max)` corner cells; `None` for an empty shape.
    pub fn bounding_box(&self) -> Option<(Cell, Cell)> {
        let first = *self.cells.first()?;
        Some(self.cells.iter().fold((first, first), |(lo, hi), c| {
            (
                Cell::new(lo.x.min(c.x), lo.y.min(c.y), lo.z.min(c.z)),
                Cell::new(hi.x.max(c.x), hi.y.max(c.y), hi.z.max(c.z)),
            )
        }))
    }

    /// Number of cells spanned along each axis.
    pub fn extent(&self) -> [i32; 3] {
        match self.bounding_box() {
            Some((lo, hi)) => [hi.x - lo.x + 1, hi.y - lo.y + 1, hi.z - lo.z + 1],
            None => [0; 3],
        }
    }

    pub fn is_connected(&self) -> bool {
        let Some(&first) = self.cells.first() else {
            return false;
        };
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        seen.insert(first);
        queue.push_back(first);
        while let Some(c) = queue.pop_front() {
            for n in c.neighbors() {
                if self.contains(n) && seen.insert(n) {
                    queue.push_back(n);
                }
            }
        }
        seen.len() == self.cells.len()
    }

    pub fn translated(&self, dx: i32, dy: i32, dz: i32) -> Polycube {
        let shift = |c: Cell| Cell::new(c.x + dx, c.y + dy, c.z + dz);
        Polycube {
            cells: self.cells.iter().map(|&c| shift(c)).collect(),
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    start: shift(s.start),
                    ..*s
                })
                .collect(),
        }
    }

    /// Moves the bounding-box minimum corner to the origin.
    pub fn normalized(&self) -> Polycube {
        match self.bounding_box() {
            Some((lo, _)) => self.translated(-lo.x, -lo.y, -lo.z),
            None => self.clone(),
        }
    }

    pub fn rotated(&self, r: &LatticeRotation) -> Polycube {
        let segments = self
            .segments
            .iter()
            .map(|s| {
                let (axis, sign) = r.apply_direction(s.axis, s.sign);
                Segment {
                    start: r.apply(s.start),
                    axis,
                    sign,
                    ..*s
                }
            })
            .collect();
        Polycube::from_parts(self.cells.iter().map(|&c| r.apply(c)).collect(), segments)
    }
}

/// Sorted cells of `p` rotated by `r` and moved to the origin.
fn oriented_cells(p: &Polycube, r: &LatticeRotation) -> Vec<Cell> {
    let mut cells: Vec<Cell> = p.cells.iter().map(|&c| r.apply(c)).collect();
    if let Some(lo) = cells.iter().copied().reduce(|a, b| {
        Cell::new(a.x.min(b.x), a.y.min(b.y), a.z.min(b.z))
    }) {
        for c in &mut cells {
            *c = Cell::new(c.x - lo.x, c.y - lo.y, c.z - lo.z);
        }
    }
    cells.sort_unstable();
    cells
}

/// Rotation index and cells of the canonical orientation.
///
/// Orientations are compared as sorted `(z, y, x)` tuples, so the canonical
/// form prefers extent along `x` (a straight bar canonicalizes along `x`).
fn canonical_rotation(p: &Polycube) -> (usize, Vec<Cell>) {
    let key = |cells: &[Cell]| {
        let mut k: Vec<(i32, i32, i32)> = cells.iter().map(|c| (c.z, c.y, c.x)).collect();
        k.sort_unstable();
        k
    };
    let mut best: Option<(usize, Vec<(i32, i32, i32)>, Vec<Cell>)> = None;
    for r in rotation_group() {
        let cells = oriented_cells(p, r);
        let k = key(&cells);
        if best.as_ref().is_none_or(|(_, b, _)| k < *b) {
            best = Some((r.index as usize, k, cells));
        }
    }
    let (index, _, cells) = best.expect("rotation group is nonempty");
    (index, cells)
}

/// Canonical cell set (sorted `(x, y, z)`) of the rotation class of `p`.
pub fn canonical_cells(p: &Polycube) -> Vec<Cell> {
    canonical_rotation(p).1
}

/// Canonical representative of the rotation class of `p`, carrying its
/// construction segments through the same transform.
pub fn canonicalize(p: &Polycube) -> Polycube {
    let (index, _) = canonical_rotation(p);
    p.rotated(&rotation_group()[index]).normalized()
}

pub fn rotation_equivalent(a: &Polycube, b: &Polycube) -> bool {
    a.len() == b.len() && canonical_cells(a) == canonical_cells(b)
}

/// Negates the `plane` coordinate of every cell.
pub fn mirror(p: &Polycube, plane: Axis) -> Polycube {
    let flip = |c: Cell| match plane {
        Axis::X => Cell::new(-c.x, c.y, c.z),
        Axis::Y => Cell::new(c.x, -c.y, c.z),
        Axis::Z => Cell::new(c.x, c.y, -c.z),
    };
    let segments = p
        .segments
        .iter()
        .map(|s| Segment {
            start: flip(s.start),
            sign: if s.axis == plane { -s.sign } else { s.sign },
            ..*s
        })
        .collect();
    Polycube::from_parts(p.cells.iter().map(|&c| flip(c)).collect(), segments)
}

/// True iff the mirror image is rotation-equivalent to `p` (achirality).
/// The result does not depend on the mirror plane.
pub fn is_mirror_symmetric(p: &Polycube) -> bool {
    canonical_cells(&mirror(p, Axis::X)) == canonical_cells(p)
}

/// True iff the bounding box is at least 2 cells deep along every axis.
pub fn spans_all_axes(p: &Polycube) -> bool {
    p.extent().iter().all(|&e| e >= 2)
}

/// Structural problems found by [`Polycube::violations`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    CubeCount(usize),
    Disconnected,
    SegmentLength { segment: usize, length: u8 },
    NotOrthogonal { segment: usize },
    SegmentOverlap { segment: usize },
    DetachedSegment { segment: usize },
    CellsDisagreeWithSegments,
    NotSpanning,
    MirrorSymmetric,
}

impl Polycube {
    /// Every rule of `cfg` the shape breaks. Segment rules are only checked
    /// when construction history is present.
    pub fn violations(&self, cfg: &GenConfig) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.len();
        if n < cfg.min_cubes as usize || n > cfg.max_cubes as usize {
            out.push(Violation::CubeCount(n));
        }
        if !self.is_connected() {
            out.push(Violation::Disconnected);
        }
        if !self.segments.is_empty() {
            let mut covered = BTreeSet::new();
            for (i, s) in self.segments.iter().enumerate() {
                if s.length < cfg.min_seg || s.length > cfg.max_seg {
                    out.push(Violation::SegmentLength {
                        segment: i,
                        length: s.length,
                    });
                }
                match s.parent {
                    Some(pi) => {
                        let parent = self.segments.get(pi).filter(|_| pi < i);
                        match parent {
                            Some(parent) => {
                                if parent.axis == s.axis {
                                    out.push(Violation::NotOrthogonal { segment: i });
                                }
                                if !covered.contains(&s.start) {
                                    out.push(Violation::DetachedSegment { segment: i });
                                }
                            }
                            None => out.push(Violation::DetachedSegment { segment: i }),
                        }
                        // All cells past the joint must be new.
                        if s.cells().skip(1).any(|c| !covered.insert(c)) {
                            out.push(Violation::SegmentOverlap { segment: i });
                        }
                    }
                    None => {
                        if i != 0 {
                            out.push(Violation::DetachedSegment { segment: i });
                        }
                        if s.cells().any(|c| !covered.insert(c)) {
                            out.push(Violation::SegmentOverlap { segment: i });
                        }
                    }
                }
            }
            if covered.into_iter().collect::<Vec<_>>() != self.cells {
                out.push(Violation::CellsDisagreeWithSegments);
            }
        }
        if !spans_all_axes(self) {
            out.push(Violation::NotSpanning);
        }
        if is_mirror_symmetric(self) {
            out.push(Violation::MirrorSymmetric);
        }
        out
    }
}
