//! Versioned JSON report for clustering runs.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::clustering::{Clustering, Objective, TrialOutcome, TrialRun};
use crate::spchart::{self, ChartType, SpChart, TypeThresholds};

pub const FORMAT_VERSION: &str = "1.0";

/// `sha256:<hex>` of the raw input bytes.
pub fn input_digest(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub format_version: String,
    pub command: String,
    pub input_digest: String,
    pub students: usize,
    pub problems: usize,
    pub parameters: Parameters,
    pub whole_chart_average_caution: f64,
    pub whole_chart_type: ChartType,
    pub best: BestClustering,
    pub trials: Vec<TrialRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    pub clusters: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trials: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub objective: Option<Objective>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_sweeps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cap_clusters: Option<bool>,
    pub thresholds: TypeThresholds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestClustering {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trial_index: Option<usize>,
    pub representatives: Vec<String>,
    pub f1: f64,
    pub f2: f64,
    pub clusters: Vec<ClusterEntry>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty", default)]
    pub sweeps_histogram: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterEntry {
    /// 1-based cluster number.
    pub cluster: usize,
    pub size: usize,
    pub gamma: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fixed_point: Option<String>,
    pub chart_type: ChartType,
    pub student_ids: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub trial_index: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub f2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cluster_count: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

pub fn cluster_entries(
    chart: &SpChart,
    clustering: &Clustering,
    thresholds: TypeThresholds,
) -> Vec<ClusterEntry> {
    clustering
        .clusters
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let sub = chart
                .select_rows(&c.members)
                .expect("members index the chart");
            ClusterEntry {
                cluster: k + 1,
                size: c.size(),
                gamma: c.gamma,
                fixed_point: c
                    .fixed_point
                    .as_ref()
                    .map(|p| p.iter().map(|b| char::from(b'0' + b)).collect()),
                chart_type: spchart::classify_type_with(&sub, thresholds),
                student_ids: sub.student_ids().map(str::to_string).collect(),
            }
        })
        .collect()
}

pub fn trial_rows(run: &TrialRun) -> Vec<TrialRow> {
    run.summaries
        .iter()
        .map(|s| match &s.outcome {
            TrialOutcome::Completed { f1, f2, clusters } => TrialRow {
                trial_index: s.trial_index,
                f1: Some(*f1),
                f2: Some(*f2),
                cluster_count: Some(*clusters),
                error: None,
            },
            TrialOutcome::Failed(e) => TrialRow {
                trial_index: s.trial_index,
                f1: None,
                f2: None,
                cluster_count: None,
                error: Some(e.clone()),
            },
        })
        .collect()
}

impl ReportDocument {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    /// Per-cluster table: cluster names, sizes and average caution indices.
    pub fn summary_table(&self) -> String {
        let clusters = &self.best.clusters;
        let mut names = vec!["Cluster".to_string()];
        let mut sizes = vec!["# students".to_string()];
        let mut gammas = vec!["Caution".to_string()];
        let mut types = vec!["Type".to_string()];
        for c in clusters {
            names.push(format!("C{}", c.cluster));
            sizes.push(c.size.to_string());
            gammas.push(format!("{:.3}", c.gamma));
            types.push(c.chart_type.to_string());
        }
        let widths: Vec<usize> = (0..names.len())
            .map(|k| {
                [&names, &sizes, &gammas, &types]
                    .iter()
                    .map(|r| r[k].len())
                    .max()
                    .unwrap_or(0)
            })
            .collect();
        let line = |row: &[String]| -> String {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(k, (c, &w))| {
                    if k == 0 {
                        format!("{c:<w$}")
                    } else {
                        format!("{c:>w$}")
                    }
                })
                .collect();
            format!("| {} |\n", cells.join(" | "))
        };
        let mut out = format!(
            "f1(C) = {:.3}, f2(C) = {:.3}, whole-chart caution = {:.3}\n",
            self.best.f1, self.best.f2, self.whole_chart_average_caution
        );
        for row in [&names, &sizes, &gammas, &types] {
            out.push_str(&line(row));
        }
        out
    }
}
