//! Synthetic charts for the three chart types.
//!
//! Cell `(i, j)` is correct with probability `logistic(a_i - b_j)`, where the
//! ability `a_i ~ Normal(ABILITY_MEAN[type], 1)` and the difficulty
//! `b_j ~ Normal(0, 1)`, re-centred to mean zero over the drawn problems so
//! the mean rate is governed by the ability offset alone. Afterwards each
//! cell is flipped with probability `noise`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::spchart::{ChartType, SpChart};

/// Mean ability for test, drill and pre-test charts.
pub const TEST_ABILITY_MEAN: f64 = 0.0;
pub const DRILL_ABILITY_MEAN: f64 = 2.0;
pub const PRETEST_ABILITY_MEAN: f64 = -2.0;
pub const ABILITY_SD: f64 = 1.0;
pub const DIFFICULTY_SD: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenSpec {
    pub chart_type: ChartType,
    pub students: usize,
    pub problems: usize,
    pub seed: u64,
    /// Per-cell flip probability in `[0, 0.5]`.
    pub noise: f64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.students == 0 || self.problems == 0 {
            return Err(Error::InvalidParameter(
                "students and problems must be at least 1".into(),
            ));
        }
        if !(0.0..=0.5).contains(&self.noise) {
            return Err(Error::InvalidParameter(format!(
                "noise {} outside [0, 0.5]",
                self.noise
            )));
        }
        Ok(())
    }
}

fn ability_mean(t: ChartType) -> f64 {
    match t {
        ChartType::Test => TEST_ABILITY_MEAN,
        ChartType::Drill => DRILL_ABILITY_MEAN,
        ChartType::PreTest => PRETEST_ABILITY_MEAN,
    }
}

fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

pub fn generate_chart(spec: &GenSpec) -> Result<SpChart> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let ability = Normal::new(ability_mean(spec.chart_type), ABILITY_SD).expect("finite sd");
    let difficulty = Normal::new(0.0, DIFFICULTY_SD).expect("finite sd");

    let mut difficulties: Vec<f64> = (0..spec.problems)
        .map(|_| difficulty.sample(&mut rng))
        .collect();
    let centre = difficulties.iter().sum::<f64>() / spec.problems as f64;
    difficulties.iter_mut().for_each(|b| *b -= centre);

    let matrix = (0..spec.students)
        .map(|_| {
            let a = ability.sample(&mut rng);
            difficulties
                .iter()
                .map(|b| {
                    let correct = rng.random_bool(logistic(a - b));
                    let flip = spec.noise > 0.0 && rng.random_bool(spec.noise);
                    u8::from(correct != flip)
                })
                .collect()
        })
        .collect();
    SpChart::from_matrix(matrix)
}
