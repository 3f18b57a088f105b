//! The 24 proper rotations of the cube as signed permutation matrices.

use super::{Axis, Cell};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LatticeRotation {
    pub index: u8,
    /// Row-major; `matrix[row][col]`.
    pub matrix: [[i8; 3]; 3],
}

const PERMS: [[usize; 3]; 6] = [
    [0, 1, 2],
    [0, 2, 1],
    [1, 0, 2],
    [1, 2, 0],
    [2, 0, 1],
    [2, 1, 0],
];

const fn det3(m: &[[i8; 3]; 3]) -> i32 {
    let m = [
        [m[0][0] as i32, m[0][1] as i32, m[0][2] as i32],
        [m[1][0] as i32, m[1][1] as i32, m[1][2] as i32],
        [m[2][0] as i32, m[2][1] as i32, m[2][2] as i32],
    ];
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

const fn build_group() -> [LatticeRotation; 24] {
    let mut out = [LatticeRotation {
        index: 0,
        matrix: [[0; 3]; 3],
    }; 24];
    let mut n = 0;
    let mut p = 0;
    while p < 6 {
        let mut s = 0;
        while s < 8 {
            let mut m = [[0i8; 3]; 3];
            let mut row = 0;
            while row < 3 {
                let sign = if (s >> row) & 1 == 1 { -1 } else { 1 };
                m[row][PERMS[p][row]] = sign;
                row += 1;
            }
            if det3(&m) == 1 {
                out[n] = LatticeRotation {
                    index: n as u8,
                    matrix: m,
                };
                n += 1;
            }
            s += 1;
        }
        p += 1;
    }
    out
}

static GROUP: [LatticeRotation; 24] = build_group();

/// All proper rotations; index 0 is the identity.
pub fn rotation_group() -> &'static [LatticeRotation; 24] {
    &GROUP
}

impl LatticeRotation {
    pub fn identity() -> Self {
        GROUP[0]
    }

    pub fn by_index(index: usize) -> Option<Self> {
        GROUP.get(index).copied()
    }

    pub fn determinant(&self) -> i32 {
        det3(&self.matrix)
    }

    #[inline]
    pub fn apply(&self, c: Cell) -> Cell {
        let v = [c.x, c.y, c.z];
        let row = |r: usize| {
            self.matrix[r][0] as i32 * v[0] + self.matrix[r][1] as i32 * v[1] + self.matrix[r][2] as i32 * v[2]
        };
        Cell::new(row(0), row(1), row(2))
    }

    /// Image of the signed unit vector `sign * e_axis`.
    pub fn apply_direction(&self, axis: Axis, sign: i8) -> (Axis, i8) {
        let col = axis.index();
        for r in 0..3 {
            let e = self.matrix[r][col];
            if e != 0 {
                return (Axis::from_index(r), e * sign);
            }
        }
        unreachable!("rotation matrix column without a nonzero entry")
    }

    pub fn compose(&self, other: &LatticeRotation) -> [[i8; 3]; 3] {
        let mut m = [[0i8; 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = (0..3).map(|k| self.matrix[i][k] * other.matrix[k][j]).sum();
            }
        }
        m
    }
}
