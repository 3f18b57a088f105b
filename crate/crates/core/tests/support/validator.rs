//! Brute-force polycube checks that share no code with the library: the
//! rotations come from closing two quarter turns under composition, and
//! chirality is decided by exhaustive comparison.

use std::collections::{BTreeSet, VecDeque};

use mentrot_core::geomgen::{Cell, Polycube};
use mentrot_core::rng::Rng;

pub type M = [[i32; 3]; 3];
pub type P = (i32, i32, i32);

pub fn mul(a: &M, b: &M) -> M {
    let mut c = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

pub fn brute_rotations() -> Vec<M> {
    let qx = [[1, 0, 0], [0, 0, -1], [0, 1, 0]];
    let qz = [[0, -1, 0], [1, 0, 0], [0, 0, 1]];
    let id = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];
    let mut seen = BTreeSet::from([id]);
    let mut queue = VecDeque::from([id]);
    while let Some(m) = queue.pop_front() {
        for g in [&qx, &qz] {
            let n = mul(g, &m);
            if seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.into_iter().collect()
}

pub fn normalize(cells: &[P]) -> Vec<P> {
    let mx = cells.iter().map(|c| c.0).min().unwrap();
    let my = cells.iter().map(|c| c.1).min().unwrap();
    let mz = cells.iter().map(|c| c.2).min().unwrap();
    let mut v: Vec<P> = cells.iter().map(|c| (c.0 - mx, c.1 - my, c.2 - mz)).collect();
    v.sort();
    v
}

pub fn rotate(m: &M, cells: &[P]) -> Vec<P> {
    cells
        .iter()
        .map(|&(x, y, z)| {
            let r = |i: usize| m[i][0] * x + m[i][1] * y + m[i][2] * z;
            (r(0), r(1), r(2))
        })
        .collect()
}

pub struct Validator {
    pub rotations: Vec<M>,
}

impl Validator {
    pub fn new() -> Self {
        let rotations = brute_rotations();
        assert_eq!(rotations.len(), 24);
        Self { rotations }
    }

    pub fn connected(cells: &[P]) -> bool {
        let set: BTreeSet<P> = cells.iter().copied().collect();
        let mut seen = BTreeSet::from([cells[0]]);
        let mut stack = vec![cells[0]];
        while let Some((x, y, z)) = stack.pop() {
            for n in [(x + 1, y, z), (x - 1, y, z), (x, y + 1, z), (x, y - 1, z), (x, y, z + 1), (x, y, z - 1)] {
                if set.contains(&n) && seen.insert(n) {
                    stack.push(n);
                }
            }
        }
        seen.len() == set.len()
    }

    pub fn spans_all_axes(cells: &[P]) -> bool {
        let span = |f: fn(&P) -> i32| {
            let (lo, hi) = cells.iter().map(f).fold((i32::MAX, i32::MIN), |(l, h), v| (l.min(v), h.max(v)));
            hi > lo
        };
        span(|c| c.0) && span(|c| c.1) && span(|c| c.2)
    }

    /// True when some rotation of the x-mirror equals the shape up to translation.
    pub fn achiral(&self, cells: &[P]) -> bool {
        let target = normalize(cells);
        let mirrored: Vec<P> = cells.iter().map(|&(x, y, z)| (-x, y, z)).collect();
        self.rotations.iter().any(|m| normalize(&rotate(m, &mirrored)) == target)
    }
}

pub fn tuples(p: &Polycube) -> Vec<P> {
    p.cells().iter().map(|c| (c.x, c.y, c.z)).collect()
}

pub fn random_walk(rng: &mut Rng, n: usize) -> Polycube {
    let mut cells = vec![Cell { x: 0, y: 0, z: 0 }];
    while cells.len() < n {
        let from = cells[rng.index(cells.len())];
        let next = from.neighbors()[rng.index(6)];
        if !cells.contains(&next) {
            cells.push(next);
        }
    }
    Polycube::from_cells(cells)
}

