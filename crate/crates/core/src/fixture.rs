//! Built-in reference example: ten problems, four representative students
//! (S32, S40, S58, S63), their learned connection matrix and its fixed points.

use crate::hopfield::{self, BipolarState, ConnectionMatrix};

pub const REPRESENTATIVE_IDS: [&str; 4] = ["S32", "S40", "S58", "S63"];

pub const REPRESENTATIVES: [[u8; 10]; 4] = [
    [1, 0, 1, 0, 0, 0, 0, 1, 1, 1],
    [0, 0, 0, 1, 1, 0, 1, 0, 1, 0],
    [0, 1, 0, 1, 1, 1, 1, 1, 1, 1],
    [0, 0, 1, 0, 0, 1, 0, 0, 0, 0],
];

/// Reference matrix as originally published. Entries (1,5) and (1,8) carry
/// the wrong sign: the matrix is not symmetric and disagrees with the
/// Hebbian rule there.
pub const PUBLISHED_WEIGHTS: [[i32; 10]; 10] = [
    [0, 0, 2, -2, 2, -2, -2, -2, 0, 2],
    [0, 0, -2, 2, 2, 2, 2, 2, 0, 2],
    [2, -2, 0, -4, -4, 0, -4, 0, -2, 0],
    [-2, 2, -4, 0, 4, 0, 4, 0, 2, 0],
    [-2, 2, -4, 4, 0, 0, 4, 0, 2, 0],
    [-2, 2, 0, 0, 0, 0, 0, 0, -2, 0],
    [-2, 2, -4, 4, 4, 0, 0, 0, 2, 0],
    [2, 2, 0, 0, 0, 0, 0, 0, 2, 4],
    [0, 0, -2, 2, 2, -2, 2, 2, 0, 2],
    [2, 2, 0, 0, 0, 0, 0, 4, 2, 0],
];

/// Published matrix with row 1 mirrored from column 1.
pub const REFERENCE_WEIGHTS: [[i32; 10]; 10] = [
    [0, 0, 2, -2, -2, -2, -2, 2, 0, 2],
    [0, 0, -2, 2, 2, 2, 2, 2, 0, 2],
    [2, -2, 0, -4, -4, 0, -4, 0, -2, 0],
    [-2, 2, -4, 0, 4, 0, 4, 0, 2, 0],
    [-2, 2, -4, 4, 0, 0, 4, 0, 2, 0],
    [-2, 2, 0, 0, 0, 0, 0, 0, -2, 0],
    [-2, 2, -4, 4, 4, 0, 0, 0, 2, 0],
    [2, 2, 0, 0, 0, 0, 0, 0, 2, 4],
    [0, 0, -2, 2, 2, -2, 2, 2, 0, 2],
    [2, 2, 0, 0, 0, 0, 0, 4, 2, 0],
];

pub const FIXED_POINTS: [[u8; 10]; 4] = [
    [1, 0, 1, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 1, 0, 0, 0, 0, 1, 0, 1],
    [0, 1, 0, 1, 1, 1, 1, 1, 1, 1],
    [0, 1, 0, 1, 1, 1, 1, 0, 1, 0],
];

fn matrix(rows: &[[i32; 10]; 10]) -> ConnectionMatrix {
    let rows: Vec<Vec<i32>> = rows.iter().map(|r| r.to_vec()).collect();
    ConnectionMatrix::from_rows(&rows).expect("square")
}

pub fn reference_weights() -> ConnectionMatrix {
    matrix(&REFERENCE_WEIGHTS)
}

pub fn published_weights() -> ConnectionMatrix {
    matrix(&PUBLISHED_WEIGHTS)
}

/// 1-indexed `(i, j, expected, actual)` for every entry where `actual`
/// differs from `expected`.
pub fn matrix_diff(
    expected: &ConnectionMatrix,
    actual: &ConnectionMatrix,
) -> Vec<(usize, usize, i32, i32)> {
    let n = expected.size().min(actual.size());
    let mut diff = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if expected.get(i, j) != actual.get(i, j) {
                diff.push((i + 1, j + 1, expected.get(i, j), actual.get(i, j)));
            }
        }
    }
    diff
}

/// Outcome of checking a set of representatives against the reference data.
#[derive(Debug, Clone)]
pub struct FixtureCheck {
    pub weights: ConnectionMatrix,
    pub weight_mismatches: Vec<(usize, usize, i32, i32)>,
    pub published_mismatches: Vec<(usize, usize, i32, i32)>,
    pub fixed_points: Vec<BipolarState>,
    pub missing_fixed_points: Vec<[u8; 10]>,
}

impl FixtureCheck {
    pub fn passed(&self) -> bool {
        self.weight_mismatches.is_empty() && self.missing_fixed_points.is_empty()
    }
}

/// Learns weights from `representatives`, compares them with the reference
/// matrix and checks that every reference fixed point is found.
pub fn check(representatives: &[[u8; 10]]) -> crate::Result<FixtureCheck> {
    let weights = hopfield::hebbian_learn(representatives)?;
    let fixed_points = hopfield::enumerate_fixed_points(&weights)?;
    let missing_fixed_points = FIXED_POINTS
        .iter()
        .filter(|p| !fixed_points.contains(&BipolarState::from_binary(&p[..])))
        .copied()
        .collect();
    Ok(FixtureCheck {
        weight_mismatches: matrix_diff(&reference_weights(), &weights),
        published_mismatches: matrix_diff(&published_weights(), &weights),
        weights,
        fixed_points,
        missing_fixed_points,
    })
}
