//! Discrete-time recurrent network with bipolar states and signum units.
//!
//! Neurons are updated one at a time in ascending order; a full pass over
//! all `N` neurons is a sweep, and the sweep map is the vector map `F`.
//! With a symmetric, zero-diagonal connection matrix every trajectory ends
//! in a fixed point. All arithmetic is integer, so results are exact.

use std::collections::BTreeSet;

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Default sweep budget for [`converge`].
pub const DEFAULT_MAX_SWEEPS: usize = 1000;

/// Largest `N` accepted by [`enumerate_fixed_points`].
pub const MAX_ENUMERATION_N: usize = 20;

/// Largest `N` accepted by [`basin_map`].
pub const MAX_BASIN_N: usize = 16;

/// Signum with `sgn(0) = +1`.
#[inline]
pub fn sgn(x: i64) -> i8 {
    if x >= 0 {
        1
    } else {
        -1
    }
}

/// Network state: one value in `{-1, +1}` per neuron.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BipolarState(Vec<i8>);

impl BipolarState {
    pub fn new(values: Vec<i8>) -> Result<Self> {
        if let Some(&v) = values.iter().find(|&&v| v != 1 && v != -1) {
            return Err(Error::NotBipolar(v));
        }
        Ok(Self(values))
    }

    /// Maps `d` to `2d - 1`. Any nonzero input counts as 1.
    pub fn from_binary(bits: &[u8]) -> Self {
        Self(bits.iter().map(|&b| if b == 0 { -1 } else { 1 }).collect())
    }

    /// Inverse of [`BipolarState::from_binary`]: `+1 -> 1`, `-1 -> 0`.
    pub fn to_binary(&self) -> Vec<u8> {
        self.0.iter().map(|&x| u8::from(x > 0)).collect()
    }

    /// Binary image as a `0`/`1` string, e.g. `"1010000000"`.
    pub fn to_bit_string(&self) -> String {
        self.0
            .iter()
            .map(|&x| if x > 0 { '1' } else { '0' })
            .collect()
    }

    /// State whose neuron `j` is `+1` iff bit `j` of `code` is set.
    pub fn from_code(code: u32, n: usize) -> Self {
        Self(
            (0..n)
                .map(|j| if code >> j & 1 == 1 { 1 } else { -1 })
                .collect(),
        )
    }

    pub fn to_code(&self) -> u32 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &x)| x > 0)
            .fold(0, |acc, (j, _)| acc | 1 << j)
    }

    pub fn values(&self) -> &[i8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn negated(&self) -> Self {
        Self(self.0.iter().map(|&x| -x).collect())
    }
}

/// Square integer connection matrix, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConnectionMatrix {
    n: usize,
    w: Vec<i32>,
}

impl ConnectionMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            w: vec![0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<i32>]) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().find(|r| r.len() != n) {
            return Err(Error::NotSquare {
                rows: n,
                cols: bad.len(),
            });
        }
        Ok(Self {
            n,
            w: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i32 {
        self.w[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: i32) {
        self.w[i * self.n + j] = value;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[i32] {
        &self.w[i * self.n..(i + 1) * self.n]
    }

    pub fn to_rows(&self) -> Vec<Vec<i32>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }

    /// Checks `w_ij = w_ji` and `w_ii = 0`, the condition under which
    /// asynchronous dynamics always reach a fixed point.
    pub fn check_stability_condition(&self) -> Result<()> {
        for i in 0..self.n {
            if self.get(i, i) != 0 {
                return Err(Error::NonzeroDiagonal { i: i + 1 });
            }
            for j in i + 1..self.n {
                if self.get(i, j) != self.get(j, i) {
                    return Err(Error::NotSymmetric { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(())
    }
}

impl std::fmt::Display for ConnectionMatrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let width = self
            .w
            .iter()
            .map(|v| v.to_string().len())
            .max()
            .unwrap_or(1);
        for i in 0..self.n {
            let cells: Vec<String> = self.row(i).iter().map(|v| format!("{v:>width$}")).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// Correlation (Hebbian) learning:
/// `w_ij = sum_l (2 r_li - 1)(2 r_lj - 1)` for `i != j`, `w_ii = 0`.
pub fn hebbian_learn<P: AsRef<[u8]>>(patterns: &[P]) -> Result<ConnectionMatrix> {
    let first = patterns.first().ok_or(Error::NoPatterns)?;
    let n = first.as_ref().len();
    let mut w = ConnectionMatrix::zeros(n);
    for pattern in patterns {
        let bits = pattern.as_ref();
        if bits.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: bits.len(),
            });
        }
        let x = BipolarState::from_binary(bits);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    w.w[i * n + j] += i32::from(x.0[i] * x.0[j]);
                }
            }
        }
    }
    Ok(w)
}

/// Input to neuron `i` (0-based): `sum_k w_ik x_k`.
#[inline]
pub fn local_field(state: &BipolarState, w: &ConnectionMatrix, i: usize) -> i64 {
    w.row(i)
        .iter()
        .zip(&state.0)
        .map(|(&wik, &xk)| i64::from(wik) * i64::from(xk))
        .sum()
}

/// Updates neuron `i` in place; returns whether it flipped.
#[inline]
pub fn update_neuron(state: &mut BipolarState, w: &ConnectionMatrix, i: usize) -> bool {
    let next = sgn(local_field(state, w, i));
    let flipped = state.0[i] != next;
    state.0[i] = next;
    flipped
}

/// One full asynchronous pass, neurons `1..N` in order; returns the number
/// of flips.
pub fn sweep_in_place(state: &mut BipolarState, w: &ConnectionMatrix) -> usize {
    (0..state.len())
        .filter(|&i| update_neuron(state, w, i))
        .count()
}

/// The sweep map `F`. The flag is true iff any neuron flipped.
pub fn sweep(state: &BipolarState, w: &ConnectionMatrix) -> (BipolarState, bool) {
    let mut next = state.clone();
    let flips = sweep_in_place(&mut next, w);
    (next, flips > 0)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConvergenceResult {
    /// Final state; a fixed point when `converged` is set.
    pub fixed_point: BipolarState,
    /// Sweeps performed, including the final sweep that changed nothing.
    pub sweeps_used: usize,
    pub converged: bool,
}

/// Sweeps until a sweep changes nothing or `max_sweeps` is spent.
///
/// The matrix is validated first: without symmetry and a zero diagonal,
/// termination is not guaranteed. Budget exhaustion is reported through
/// `converged = false`.
pub fn converge(
    state0: &BipolarState,
    w: &ConnectionMatrix,
    max_sweeps: usize,
) -> Result<ConvergenceResult> {
    if max_sweeps == 0 {
        return Err(Error::InvalidParameter(
            "max_sweeps must be at least 1".into(),
        ));
    }
    if state0.len() != w.size() {
        return Err(Error::LengthMismatch {
            expected: w.size(),
            found: state0.len(),
        });
    }
    w.check_stability_condition()?;
    Ok(converge_unchecked(state0.clone(), w, max_sweeps))
}

/// [`converge`] without validation, for callers that validated `w` once.
pub(crate) fn converge_unchecked(
    mut state: BipolarState,
    w: &ConnectionMatrix,
    max_sweeps: usize,
) -> ConvergenceResult {
    for sweeps in 1..=max_sweeps {
        if sweep_in_place(&mut state, w) == 0 {
            return ConvergenceResult {
                fixed_point: state,
                sweeps_used: sweeps,
                converged: true,
            };
        }
    }
    ConvergenceResult {
        fixed_point: state,
        sweeps_used: max_sweeps,
        converged: false,
    }
}

/// `E = -1/2 sum_i sum_j w_ij x_i x_j`.
pub fn energy(state: &BipolarState, w: &ConnectionMatrix) -> f64 {
    let double: i64 = (0..state.len())
        .map(|i| i64::from(state.0[i]) * local_field(state, w, i))
        .sum();
    -(double as f64) / 2.0
}

fn is_fixed(state: &BipolarState, w: &ConnectionMatrix) -> bool {
    (0..state.len()).all(|i| sgn(local_field(state, w, i)) == state.0[i])
}

/// Every state left unchanged by a sweep, by exhaustive search over all
/// `2^N` states, ordered by state code.
///
/// A state is unchanged by a sweep iff every neuron agrees with the sign of
/// its field, since the first disagreeing neuron would flip.
pub fn enumerate_fixed_points(w: &ConnectionMatrix) -> Result<Vec<BipolarState>> {
    let n = w.size();
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_ENUMERATION_N,
        });
    }
    Ok((0..1u32 << n)
        .into_par_iter()
        .map(|code| BipolarState::from_code(code, n))
        .filter(|s| is_fixed(s, w))
        .collect())
}

/// Terminal fixed point of every state, indexed by state code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasinMap {
    n: usize,
    targets: Vec<u32>,
}

impl BasinMap {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn target_code(&self, code: u32) -> u32 {
        self.targets[code as usize]
    }

    pub fn fixed_point_of(&self, state: &BipolarState) -> BipolarState {
        BipolarState::from_code(self.target_code(state.to_code()), self.n)
    }

    /// Distinct fixed points reached from at least one state, by code.
    pub fn attractors(&self) -> Vec<BipolarState> {
        let codes: BTreeSet<u32> = self.targets.iter().copied().collect();
        codes
            .into_iter()
            .map(|c| BipolarState::from_code(c, self.n))
            .collect()
    }

    /// States in the basin of `fixed_point`, by code.
    pub fn basin(&self, fixed_point: &BipolarState) -> Vec<BipolarState> {
        let target = fixed_point.to_code();
        self.targets
            .iter()
            .enumerate()
            .filter(|(_, &t)| t == target)
            .map(|(c, _)| BipolarState::from_code(c as u32, self.n))
            .collect()
    }
}

/// Runs [`converge`] from each of the `2^N` states.
pub fn basin_map(w: &ConnectionMatrix, max_sweeps: usize) -> Result<BasinMap> {
    let n = w.size();
    if n > MAX_BASIN_N {
        return Err(Error::TooLarge {
            n,
            max: MAX_BASIN_N,
        });
    }
    w.check_stability_condition()?;
    let targets = (0..1u32 << n)
        .into_par_iter()
        .map(|code| {
            let r = converge_unchecked(BipolarState::from_code(code, n), w, max_sweeps);
            if r.converged {
                Ok(r.fixed_point.to_code())
            } else {
                Err(Error::ConvergenceFailure {
                    student: code as usize,
                    max_sweeps,
                })
            }
        })
        .collect::<Result<Vec<u32>>>()?;
    Ok(BasinMap { n, targets })
}
