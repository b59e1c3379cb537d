//! Attractor-based clustering of S-P charts.
//!
//! `M` representative students are drawn at random, a network is trained on
//! their score vectors with the Hebbian rule, and every student is run from
//! its own score vector to a fixed point. Students reaching the same fixed
//! point form one cluster. Clusterings are scored by `f1`, the shortfall of
//! the `M`-th largest cluster from the ideal size `L/M`, and `f2`, the
//! largest per-cluster average caution index.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hopfield::{self, BipolarState, DEFAULT_MAX_SWEEPS};
use crate::spchart::{self, SpChart};

#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Student (row) indices into the source chart, ascending.
    pub members: Vec<usize>,
    /// Binary image of the attractor; `None` for clusters not produced by
    /// the network.
    pub fixed_point: Option<Vec<u8>>,
    /// Average caution index of the members against the cluster's own rates.
    pub gamma: f64,
}

impl Cluster {
    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Partition of a chart's students.
#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    pub clusters: Vec<Cluster>,
    /// `L` of the source chart.
    pub students: usize,
    /// Representative student indices; empty for the score baseline.
    pub representatives: Vec<usize>,
}

impl Clustering {
    /// Builds clusters from member groups, computing each cluster's gamma.
    fn from_groups(
        chart: &SpChart,
        groups: Vec<(Vec<usize>, Option<Vec<u8>>)>,
        representatives: Vec<usize>,
    ) -> Self {
        let clusters = groups
            .into_iter()
            .map(|(members, fixed_point)| Cluster {
                gamma: cluster_gamma(chart, &members),
                members,
                fixed_point,
            })
            .collect();
        Self {
            clusters,
            students: chart.students(),
            representatives,
        }
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.clusters.iter().map(Cluster::size).collect()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.gamma).collect()
    }

    /// Cluster index of each student.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![usize::MAX; self.students];
        for (k, c) in self.clusters.iter().enumerate() {
            for &i in &c.members {
                labels[i] = k;
            }
        }
        labels
    }
}

fn cluster_gamma(chart: &SpChart, members: &[usize]) -> f64 {
    let sub = chart.select_rows(members).expect("members index the chart");
    spchart::average_caution(&sub)
}

/// Draws `m` distinct student indices uniformly without replacement.
pub fn select_representatives<R: Rng + ?Sized>(
    students: usize,
    m: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    if m == 0 {
        return Err(Error::InvalidParameter(
            "number of clusters must be at least 1".into(),
        ));
    }
    if m > students {
        return Err(Error::MTooLarge { m, l: students });
    }
    Ok(rand::seq::index::sample(rng, students, m).into_vec())
}

/// Clustering plus the number of sweeps each student needed.
#[derive(Debug, Clone, PartialEq)]
pub struct RnnOutcome {
    pub clustering: Clustering,
    /// Sweeps used -> number of students.
    pub sweeps_histogram: BTreeMap<usize, usize>,
}

/// Trains the network on the representatives' rows and groups students by
/// the fixed point their trajectory reaches. Clusters are numbered in order
/// of first discovery while scanning students by index.
pub fn rnn_cluster(chart: &SpChart, representatives: &[usize]) -> Result<Clustering> {
    rnn_cluster_detailed(chart, representatives, DEFAULT_MAX_SWEEPS).map(|o| o.clustering)
}

pub fn rnn_cluster_detailed(
    chart: &SpChart,
    representatives: &[usize],
    max_sweeps: usize,
) -> Result<RnnOutcome> {
    if let Some(&bad) = representatives.iter().find(|&&i| i >= chart.students()) {
        return Err(Error::InvalidParameter(format!(
            "representative index {bad} out of range for {} students",
            chart.students()
        )));
    }
    let patterns: Vec<&[u8]> = representatives.iter().map(|&i| chart.row(i)).collect();
    let w = hopfield::hebbian_learn(&patterns)?;
    w.check_stability_condition()?;

    let mut by_attractor: HashMap<BipolarState, usize> = HashMap::new();
    let mut groups: Vec<(Vec<usize>, Option<Vec<u8>>)> = Vec::new();
    let mut sweeps_histogram = BTreeMap::new();
    for i in 0..chart.students() {
        let start = BipolarState::from_binary(chart.row(i));
        let result = hopfield::converge_unchecked(start, &w, max_sweeps);
        if !result.converged {
            return Err(Error::ConvergenceFailure {
                student: i + 1,
                max_sweeps,
            });
        }
        *sweeps_histogram.entry(result.sweeps_used).or_insert(0) += 1;
        let k = *by_attractor
            .entry(result.fixed_point.clone())
            .or_insert_with(|| {
                groups.push((Vec::new(), Some(result.fixed_point.to_binary())));
                groups.len() - 1
            });
        groups[k].0.push(i);
    }
    Ok(RnnOutcome {
        clustering: Clustering::from_groups(chart, groups, representatives.to_vec()),
        sweeps_histogram,
    })
}

/// `f1 = (L/M - L_M) / (L/M)` where `L_M` is the size of the `M`-th largest
/// cluster, or 0 when there are fewer than `M` clusters.
pub fn f1_from_sizes(sizes: &[usize], students: usize, m: usize) -> f64 {
    let desired = students as f64 / m as f64;
    let mut sorted = sizes.to_vec();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    let mth = sorted.get(m - 1).copied().unwrap_or(0) as f64;
    (desired - mth) / desired
}

/// `f2 = max_l gamma_l`.
pub fn f2_from_gammas(gammas: &[f64]) -> Result<f64> {
    gammas
        .iter()
        .copied()
        .reduce(f64::max)
        .ok_or(Error::EmptyClustering)
}

pub fn f1(c: &Clustering, m: usize) -> f64 {
    f1_from_sizes(&c.sizes(), c.students, m)
}

pub fn f2(c: &Clustering) -> Result<f64> {
    f2_from_gammas(&c.gammas())
}

/// Score-ordered split into `m` contiguous groups of near-equal size; the
/// first `L mod m` groups take one extra student.
pub fn score_baseline(chart: &SpChart, m: usize) -> Result<Clustering> {
    let l = chart.students();
    if m == 0 {
        return Err(Error::InvalidParameter(
            "number of clusters must be at least 1".into(),
        ));
    }
    if m > l {
        return Err(Error::MTooLarge { m, l });
    }
    let order = spchart::rearrange(chart).row_perm;
    let (base, extra) = (l / m, l % m);
    let mut groups = Vec::with_capacity(m);
    let mut start = 0;
    for k in 0..m {
        let len = base + usize::from(k < extra);
        groups.push((order[start..start + len].to_vec(), None));
        start += len;
    }
    Ok(Clustering::from_groups(chart, groups, Vec::new()))
}

/// Ordering used to pick the best trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Objective {
    /// Lowest `f2`, then lowest `f1`.
    #[default]
    F2ThenF1,
    /// Lowest `f1`, then lowest `f2`.
    F1ThenF2,
}

impl Objective {
    fn key(self, f1: f64, f2: f64) -> (f64, f64) {
        match self {
            Objective::F2ThenF1 => (f2, f1),
            Objective::F1ThenF2 => (f1, f2),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialConfig {
    pub clusters: usize,
    pub trials: usize,
    pub master_seed: u64,
    pub objective: Objective,
    pub max_sweeps: usize,
    /// Only trials with at most `clusters` clusters compete for best, unless
    /// no trial qualifies. Extra spurious attractors otherwise win on `f2`
    /// by splitting off tiny homogeneous clusters.
    pub cap_clusters: bool,
    /// Worker threads; `None` uses the global pool. Results do not depend on it.
    pub workers: Option<usize>,
}

impl TrialConfig {
    pub fn new(clusters: usize, trials: usize, master_seed: u64) -> Self {
        Self {
            clusters,
            trials,
            master_seed,
            objective: Objective::default(),
            max_sweeps: DEFAULT_MAX_SWEEPS,
            cap_clusters: true,
            workers: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialReport {
    pub clustering: Clustering,
    pub f1: f64,
    pub f2: f64,
    /// Master seed; trial `t` draws from stream `t` of a generator seeded with it.
    pub seed: u64,
    pub trial_index: usize,
    pub sweeps_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrialOutcome {
    Completed { f1: f64, f2: f64, clusters: usize },
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialSummary {
    pub trial_index: usize,
    pub outcome: TrialOutcome,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    pub best: TrialReport,
    pub summaries: Vec<TrialSummary>,
}

/// Random source for trial `t`: a ChaCha stream keyed by the master seed, so
/// every trial is reproducible on its own.
pub fn trial_rng(master_seed: u64, trial_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index as u64);
    rng
}

/// One full pass: draw representatives, cluster, score.
pub fn run_trial(chart: &SpChart, config: &TrialConfig, trial_index: usize) -> Result<TrialReport> {
    let mut rng = trial_rng(config.master_seed, trial_index);
    let reps = select_representatives(chart.students(), config.clusters, &mut rng)?;
    let outcome = rnn_cluster_detailed(chart, &reps, config.max_sweeps)?;
    let clustering = outcome.clustering;
    Ok(TrialReport {
        f1: f1(&clustering, config.clusters),
        f2: f2(&clustering)?,
        clustering,
        seed: config.master_seed,
        trial_index,
        sweeps_histogram: outcome.sweeps_histogram,
    })
}

/// Runs `config.trials` independent trials and keeps the best under
/// `config.objective`, ties going to the lower trial index. Failed trials are
/// recorded in the summaries. See [`TrialConfig::cap_clusters`] for which
/// trials are eligible.
pub fn run_trials(chart: &SpChart, config: &TrialConfig) -> Result<TrialRun> {
    if config.trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if config.clusters == 0 {
        return Err(Error::InvalidParameter(
            "number of clusters must be at least 1".into(),
        ));
    }
    if config.clusters > chart.students() {
        return Err(Error::MTooLarge {
            m: config.clusters,
            l: chart.students(),
        });
    }

    let evaluate = || -> Vec<Result<TrialReport>> {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_trial(chart, config, t))
            .collect()
    };
    let results = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?
            .install(evaluate),
        None => evaluate(),
    };

    let summaries = results
        .iter()
        .enumerate()
        .map(|(t, r)| TrialSummary {
            trial_index: t,
            outcome: match r {
                Ok(rep) => TrialOutcome::Completed {
                    f1: rep.f1,
                    f2: rep.f2,
                    clusters: rep.clustering.clusters.len(),
                },
                Err(e) => TrialOutcome::Failed(e.to_string()),
            },
        })
        .collect();

    let completed: Vec<TrialReport> = results.into_iter().flatten().collect();
    let eligible =
        |r: &TrialReport| !config.cap_clusters || r.clustering.clusters.len() <= config.clusters;
    let pool: Vec<TrialReport> = if completed.iter().any(eligible) {
        completed.into_iter().filter(eligible).collect()
    } else {
        completed
    };
    let best = pool
        .into_iter()
        .reduce(|best, next| {
            let (a, b) = (
                config.objective.key(best.f1, best.f2),
                config.objective.key(next.f1, next.f2),
            );
            let ord = b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1));
            if ord.is_lt() {
                next
            } else {
                best
            }
        })
        .ok_or(Error::AllTrialsFailed {
            trials: config.trials,
        })?;
    Ok(TrialRun { best, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixture;

    fn chart(m: Vec<Vec<u8>>) -> SpChart {
        SpChart::from_matrix(m).unwrap()
    }

    #[test]
    fn f1_reference_values() {
        assert!((f1_from_sizes(&[28, 26, 23, 23], 100, 4) - 0.08).abs() < 1e-12);
        assert_eq!(f1_from_sizes(&[25, 25, 25, 25], 100, 4), 0.0);
        assert_eq!(f1_from_sizes(&[60, 40], 100, 4), 1.0);
        // L/M need not be integral
        assert!(
            (f1_from_sizes(&[4, 3, 3], 10, 3) - (10.0 / 3.0 - 3.0) / (10.0 / 3.0)).abs() < 1e-15
        );
    }

    #[test]
    fn f2_reference_values() {
        assert_eq!(
            f2_from_gammas(&[0.382, 0.387, 0.392, 0.390]).unwrap(),
            0.392
        );
        assert_eq!(
            f2_from_gammas(&[0.404, 0.454, 0.458, 0.348]).unwrap(),
            0.458
        );
        assert_eq!(f2_from_gammas(&[]), Err(Error::EmptyClustering));
    }

    #[test]
    fn homogeneous_clusters_have_zero_f2() {
        let c = chart(vec![
            vec![1, 0, 1],
            vec![1, 0, 1],
            vec![0, 1, 1],
            vec![0, 1, 1],
        ]);
        let clustering =
            Clustering::from_groups(&c, vec![(vec![0, 1], None), (vec![2, 3], None)], vec![]);
        assert_eq!(f2(&clustering).unwrap(), 0.0);
    }

    #[test]
    fn representatives_full_draw_and_determinism() {
        let mut rng = trial_rng(9, 0);
        let mut all = select_representatives(7, 7, &mut rng).unwrap();
        all.sort_unstable();
        assert_eq!(all, (0..7).collect::<Vec<_>>());

        let a = select_representatives(50, 4, &mut trial_rng(3, 1)).unwrap();
        let b = select_representatives(50, 4, &mut trial_rng(3, 1)).unwrap();
        assert_eq!(a, b);
        assert_ne!(
            a,
            select_representatives(50, 4, &mut trial_rng(3, 2)).unwrap()
        );

        assert_eq!(
            select_representatives(3, 4, &mut rng),
            Err(Error::MTooLarge { m: 4, l: 3 })
        );
        assert!(select_representatives(3, 0, &mut rng).is_err());
    }

    #[test]
    fn single_draw_is_uniform() {
        // chi-square style check: each count within 3 sigma of n/10
        let draws = 100_000;
        let mut counts = [0usize; 10];
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..draws {
            counts[select_representatives(10, 1, &mut rng).unwrap()[0]] += 1;
        }
        let expected = draws as f64 / 10.0;
        let sigma = (draws as f64 * 0.1 * 0.9).sqrt();
        for c in counts {
            assert!((c as f64 - expected).abs() <= 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn identical_rows_collapse_to_one_cluster() {
        let b = vec![1, 0, 0, 1, 1, 0];
        let c = chart(vec![b.clone(); 5]);
        let clustering = rnn_cluster(&c, &[0, 3]).unwrap();
        assert_eq!(clustering.clusters.len(), 1);
        assert_eq!(clustering.clusters[0].members, [0, 1, 2, 3, 4]);
        assert_eq!(clustering.clusters[0].gamma, 0.0);
    }

    #[test]
    fn reference_rows_land_on_reference_fixed_points() {
        let c = chart(
            fixture::REPRESENTATIVES
                .iter()
                .map(|r| r.to_vec())
                .collect(),
        );
        let clustering = rnn_cluster(&c, &[0, 1, 2, 3]).unwrap();
        let reference: Vec<Vec<u8>> = fixture::FIXED_POINTS.iter().map(|p| p.to_vec()).collect();
        for cl in &clustering.clusters {
            assert!(reference.contains(cl.fixed_point.as_ref().unwrap()));
        }
        let labels = clustering.labels();
        let third = &clustering.clusters[labels[2]];
        assert_eq!(
            third.fixed_point.as_deref(),
            Some(&fixture::FIXED_POINTS[2][..])
        );
        assert_eq!(clustering.sizes().iter().sum::<usize>(), 4);
    }

    #[test]
    fn out_of_range_representative() {
        let c = chart(vec![vec![1, 0]]);
        assert!(matches!(
            rnn_cluster(&c, &[1]),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn baseline_shapes() {
        let rows: Vec<Vec<u8>> = (0..10u8)
            .map(|i| vec![u8::from(i % 2 == 0), u8::from(i < 5)])
            .collect();
        let c = chart(rows);
        let b = score_baseline(&c, 3).unwrap();
        assert_eq!(b.sizes(), [4, 3, 3]);
        assert!(b.clusters.iter().all(|c| c.fixed_point.is_none()));

        let c = chart(vec![vec![0, 0], vec![1, 1], vec![1, 0], vec![0, 1]]);
        let b = score_baseline(&c, 4).unwrap();
        let members: Vec<Vec<usize>> = b.clusters.iter().map(|c| c.members.clone()).collect();
        assert_eq!(members, [vec![1], vec![2], vec![3], vec![0]]);
        assert_eq!(score_baseline(&c, 5), Err(Error::MTooLarge { m: 5, l: 4 }));
    }

    fn sample_chart() -> SpChart {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        chart(
            (0..30)
                .map(|_| (0..8).map(|_| rng.random_range(0..2u8)).collect())
                .collect(),
        )
    }

    #[test]
    fn single_trial_is_the_best() {
        let c = sample_chart();
        let cfg = TrialConfig::new(3, 1, 42);
        let run = run_trials(&c, &cfg).unwrap();
        assert_eq!(run.best, run_trial(&c, &cfg, 0).unwrap());
        assert_eq!(run.summaries.len(), 1);
    }

    #[test]
    fn trials_are_deterministic_across_worker_counts() {
        let c = sample_chart();
        let mut cfg = TrialConfig::new(4, 64, 7);
        cfg.workers = Some(1);
        let serial = run_trials(&c, &cfg).unwrap();
        cfg.workers = Some(4);
        let parallel = run_trials(&c, &cfg).unwrap();
        assert_eq!(serial, parallel);
    }

    #[test]
    fn best_dominates_all_eligible_summaries() {
        let c = sample_chart();
        let run = run_trials(&c, &TrialConfig::new(4, 200, 5)).unwrap();
        assert!(run.best.clustering.clusters.len() <= 4);
        for s in &run.summaries {
            if let TrialOutcome::Completed {
                f1,
                f2,
                clusters: 1..=4,
            } = s.outcome
            {
                assert!(run.best.f2 <= f2);
                if f2 == run.best.f2 {
                    assert!(run.best.f1 <= f1);
                }
            }
        }
        let mut cfg = TrialConfig::new(4, 200, 5);
        cfg.objective = Objective::F1ThenF2;
        let by_f1 = run_trials(&c, &cfg).unwrap();
        assert!(run.summaries.iter().all(|s| match s.outcome {
            TrialOutcome::Completed { f1, clusters, .. } => clusters > 4 || by_f1.best.f1 <= f1,
            TrialOutcome::Failed(_) => true,
        }));
    }

    #[test]
    fn uncapped_best_dominates_every_trial() {
        let c = sample_chart();
        let mut cfg = TrialConfig::new(2, 200, 5);
        cfg.cap_clusters = false;
        let run = run_trials(&c, &cfg).unwrap();
        for s in &run.summaries {
            if let TrialOutcome::Completed { f2, .. } = s.outcome {
                assert!(run.best.f2 <= f2);
            }
        }
    }

    #[test]
    fn cap_falls_back_when_no_trial_qualifies() {
        // two distinct rows, one representative: two attractors always
        let c = chart(vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1], vec![1, 1, 0, 0]]);
        let w = hopfield::hebbian_learn(&[c.row(0)]).unwrap();
        assert!(hopfield::enumerate_fixed_points(&w).unwrap().len() >= 2);
        let run = run_trials(&c, &TrialConfig::new(1, 4, 0)).unwrap();
        assert_eq!(run.best.clustering.clusters.len(), 2);
    }

    #[test]
    fn all_trials_failing_is_an_error() {
        let c = sample_chart();
        let mut cfg = TrialConfig::new(4, 3, 1);
        // a single sweep cannot both move and confirm a state off a fixed point
        cfg.max_sweeps = 1;
        match run_trials(&c, &cfg) {
            Err(Error::AllTrialsFailed { trials: 3 }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn trial_parameters_are_validated() {
        let c = sample_chart();
        assert!(run_trials(&c, &TrialConfig::new(4, 0, 1)).is_err());
        assert!(run_trials(&c, &TrialConfig::new(0, 1, 1)).is_err());
        assert_eq!(
            run_trials(&c, &TrialConfig::new(31, 1, 1)),
            Err(Error::MTooLarge { m: 31, l: 30 })
        );
    }
}
