//! Student-problem (S-P) charts.
//!
//! A chart is an `L x N` binary matrix: row `i` holds the answers of one
//! student, column `j` one problem, `1` for a correct answer. Charts are
//! immutable once constructed and every operation here is a pure function.

use std::collections::HashSet;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One student's answers.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ScoreVector {
    pub student_id: String,
    bits: Vec<u8>,
}

impl ScoreVector {
    pub fn new(student_id: impl Into<String>, bits: Vec<u8>) -> Result<Self> {
        if let Some(col) = bits.iter().position(|&b| b > 1) {
            return Err(Error::NonBinaryCell {
                row: 1,
                col: col + 1,
            });
        }
        Ok(Self {
            student_id: student_id.into(),
            bits,
        })
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// Total number of correct answers, `S(i)`.
    pub fn score(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpChart {
    rows: Vec<ScoreVector>,
    problem_ids: Vec<String>,
}

impl SpChart {
    /// Builds a chart, checking shape, binarity and label uniqueness.
    pub fn new(rows: Vec<ScoreVector>, problem_ids: Vec<String>) -> Result<Self> {
        if rows.is_empty() || problem_ids.is_empty() {
            return Err(Error::EmptyInput);
        }
        let n = problem_ids.len();
        for (i, row) in rows.iter().enumerate() {
            if row.bits.len() != n {
                return Err(Error::RaggedRows {
                    expected: n,
                    found: row.bits.len(),
                });
            }
            if let Some(col) = row.bits.iter().position(|&b| b > 1) {
                return Err(Error::NonBinaryCell {
                    row: i + 1,
                    col: col + 1,
                });
            }
        }
        ensure_unique("problem", problem_ids.iter())?;
        ensure_unique("student", rows.iter().map(|r| &r.student_id))?;
        Ok(Self { rows, problem_ids })
    }

    /// Builds a chart from a bare matrix with labels `S1..SL` and `P1..PN`.
    pub fn from_matrix(matrix: Vec<Vec<u8>>) -> Result<Self> {
        let n = matrix.first().map(Vec::len).ok_or(Error::EmptyInput)?;
        let rows = matrix
            .into_iter()
            .enumerate()
            .map(|(i, bits)| ScoreVector {
                student_id: format!("S{}", i + 1),
                bits,
            })
            .collect();
        Self::new(rows, default_problem_ids(n))
    }

    pub fn rows(&self) -> &[ScoreVector] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.rows[i].bits
    }

    pub fn problem_ids(&self) -> &[String] {
        &self.problem_ids
    }

    pub fn student_ids(&self) -> impl Iterator<Item = &str> {
        self.rows.iter().map(|r| r.student_id.as_str())
    }

    /// Number of students, `L`.
    pub fn students(&self) -> usize {
        self.rows.len()
    }

    /// Number of problems, `N`.
    pub fn problems(&self) -> usize {
        self.problem_ids.len()
    }

    pub fn matrix(&self) -> Vec<Vec<u8>> {
        self.rows.iter().map(|r| r.bits.clone()).collect()
    }

    /// Sub-chart holding the given rows in the given order, all problems kept.
    pub fn select_rows(&self, indices: &[usize]) -> Result<Self> {
        let rows = indices.iter().map(|&i| self.rows[i].clone()).collect();
        Self::new(rows, self.problem_ids.clone())
    }

    /// Serializes to the CSV layout accepted by [`parse_chart`]: a header of
    /// `student` followed by problem labels, then one labelled row per student.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let header = std::iter::once("student").chain(self.problem_ids.iter().map(String::as_str));
        writer.write_record(header).expect("in-memory write");
        for row in &self.rows {
            let cells = std::iter::once(row.student_id.clone())
                .chain(row.bits.iter().map(|b| b.to_string()));
            writer.write_record(cells).expect("in-memory write");
        }
        String::from_utf8(writer.into_inner().expect("in-memory flush")).expect("utf-8 labels")
    }
}

fn ensure_unique<'a>(kind: &'static str, labels: impl Iterator<Item = &'a String>) -> Result<()> {
    let mut seen = HashSet::new();
    for label in labels {
        if !seen.insert(label.as_str()) {
            return Err(Error::DuplicateLabel {
                kind,
                label: label.clone(),
            });
        }
    }
    Ok(())
}

fn default_problem_ids(n: usize) -> Vec<String> {
    (1..=n).map(|j| format!("P{j}")).collect()
}

fn is_numeric(cell: &str) -> bool {
    cell.parse::<f64>().is_ok()
}

/// A header has a non-numeric cell past the first position, or is a single
/// non-numeric cell. The first cell alone may be a student label.
fn is_header(record: &csv::StringRecord) -> bool {
    match record.len() {
        1 => !is_numeric(&record[0]),
        _ => record.iter().skip(1).any(|c| !is_numeric(c)),
    }
}

/// Parses a chart from CSV.
///
/// The first record is a header of problem labels if any cell after its
/// first is non-numeric, so problem labels must not look like numbers. A
/// data row starts with a student label if the first cell of the first data
/// row is non-numeric; that choice then applies to every row.
/// A header may either include a corner cell above the label column or not.
/// Missing labels are generated as `S1..SL` / `P1..PN`.
pub fn parse_chart<R: Read>(input: R) -> Result<SpChart> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);

    let mut records = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Csv(e.to_string()))?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        records.push(record);
    }
    let mut records = records.into_iter().peekable();

    let header = match records.peek() {
        None => return Err(Error::EmptyInput),
        Some(first) if is_header(first) => records.next(),
        Some(_) => None,
    };

    let mut data = records.peekable();
    let labelled = match data.peek() {
        None => return Err(Error::EmptyInput),
        Some(first) => first.get(0).is_some_and(|c| !is_numeric(c)),
    };

    let mut rows = Vec::new();
    let mut width: Option<usize> = None;
    for (i, record) in data.enumerate() {
        let cells: Vec<&str> = record.iter().collect();
        let (label, cells) = if labelled {
            (cells[0].to_string(), &cells[1..])
        } else {
            (format!("S{}", i + 1), &cells[..])
        };
        let expected = *width.get_or_insert(cells.len());
        if cells.len() != expected {
            return Err(Error::RaggedRows {
                expected,
                found: cells.len(),
            });
        }
        let bits = cells
            .iter()
            .enumerate()
            .map(|(j, c)| match *c {
                "0" => Ok(0),
                "1" => Ok(1),
                _ => Err(Error::NonBinaryCell {
                    row: i + 1,
                    col: j + 1,
                }),
            })
            .collect::<Result<Vec<u8>>>()?;
        rows.push(ScoreVector {
            student_id: label,
            bits,
        });
    }

    let n = width.unwrap_or(0);
    if n == 0 {
        return Err(Error::EmptyInput);
    }
    let problem_ids = match header {
        None => default_problem_ids(n),
        Some(h) => {
            let labels: Vec<String> = h.iter().map(str::to_string).collect();
            if labels.len() == n {
                labels
            } else if labelled && labels.len() == n + 1 {
                labels[1..].to_vec()
            } else {
                return Err(Error::RaggedRows {
                    expected: n,
                    found: labels.len(),
                });
            }
        }
    };
    SpChart::new(rows, problem_ids)
}

/// A chart with students sorted by score and problems by number of correct
/// answers, both descending, together with the permutations that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RearrangedChart {
    pub chart: SpChart,
    /// `row_perm[k]` is the original index of the student now at position `k`.
    pub row_perm: Vec<usize>,
    /// `col_perm[k]` is the original index of the problem now at position `k`.
    pub col_perm: Vec<usize>,
    /// `S(i)` for the rearranged rows, non-increasing.
    pub s_totals: Vec<usize>,
    /// `P(j)` for the rearranged columns, non-increasing.
    pub p_totals: Vec<usize>,
}

/// Sorts rows by score and columns by correct count, both descending. Ties
/// keep their original order.
pub fn rearrange(chart: &SpChart) -> RearrangedChart {
    let row_sums: Vec<usize> = chart.rows.iter().map(ScoreVector::score).collect();
    let col_sums = column_sums(chart);

    let mut row_perm: Vec<usize> = (0..chart.students()).collect();
    row_perm.sort_by_key(|&i| std::cmp::Reverse(row_sums[i]));
    let mut col_perm: Vec<usize> = (0..chart.problems()).collect();
    col_perm.sort_by_key(|&j| std::cmp::Reverse(col_sums[j]));

    let rows = row_perm
        .iter()
        .map(|&i| {
            let src = &chart.rows[i];
            ScoreVector {
                student_id: src.student_id.clone(),
                bits: col_perm.iter().map(|&j| src.bits[j]).collect(),
            }
        })
        .collect();
    let problem_ids = col_perm
        .iter()
        .map(|&j| chart.problem_ids[j].clone())
        .collect();

    RearrangedChart {
        chart: SpChart { rows, problem_ids },
        s_totals: row_perm.iter().map(|&i| row_sums[i]).collect(),
        p_totals: col_perm.iter().map(|&j| col_sums[j]).collect(),
        row_perm,
        col_perm,
    }
}

pub type SCurve = Vec<(usize, usize)>;
pub type PCurve = Vec<(usize, usize)>;

/// S-curve points `(i, S(i))` and P-curve points `(P(j), j)`, 1-indexed.
pub fn curves(rc: &RearrangedChart) -> (SCurve, PCurve) {
    let s = rc
        .s_totals
        .iter()
        .enumerate()
        .map(|(i, &s)| (i + 1, s))
        .collect();
    let p = rc
        .p_totals
        .iter()
        .enumerate()
        .map(|(j, &p)| (p, j + 1))
        .collect();
    (s, p)
}

fn column_sums(chart: &SpChart) -> Vec<usize> {
    let mut sums = vec![0usize; chart.problems()];
    for row in &chart.rows {
        for (s, &b) in sums.iter_mut().zip(&row.bits) {
            *s += b as usize;
        }
    }
    sums
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChartType {
    Test,
    Drill,
    #[serde(rename = "pretest")]
    PreTest,
}

impl std::fmt::Display for ChartType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ChartType::Test => "test",
            ChartType::Drill => "drill",
            ChartType::PreTest => "pretest",
        })
    }
}

impl std::str::FromStr for ChartType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "test" => Ok(ChartType::Test),
            "drill" => Ok(ChartType::Drill),
            "pretest" | "pre-test" => Ok(ChartType::PreTest),
            other => Err(Error::InvalidParameter(format!(
                "unknown chart type `{other}`"
            ))),
        }
    }
}

/// Cutoffs on the mean correct-answer rate used by [`classify_type_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TypeThresholds {
    /// Mean rate at or above which a chart is a drill.
    pub drill: f64,
    /// Mean rate at or below which a chart is a pre-test.
    pub pretest: f64,
}

impl Default for TypeThresholds {
    fn default() -> Self {
        Self {
            drill: 0.65,
            pretest: 0.35,
        }
    }
}

pub fn classify_type(chart: &SpChart) -> ChartType {
    classify_type_with(chart, TypeThresholds::default())
}

pub fn classify_type_with(chart: &SpChart, thresholds: TypeThresholds) -> ChartType {
    let rates = correct_rates(chart);
    let mean = rates.iter().sum::<f64>() / rates.len() as f64;
    if mean >= thresholds.drill {
        ChartType::Drill
    } else if mean <= thresholds.pretest {
        ChartType::PreTest
    } else {
        ChartType::Test
    }
}

/// Per-problem correct-answer rate `mu_j = (sum_i d_ij) / L`.
pub fn correct_rates(chart: &SpChart) -> Vec<f64> {
    let l = chart.students() as f64;
    column_sums(chart)
        .into_iter()
        .map(|s| s as f64 / l)
        .collect()
}

/// Caution index of one answer row: mean absolute deviation from `rates`.
pub fn caution_index(bits: &[u8], rates: &[f64]) -> Result<f64> {
    if bits.len() != rates.len() {
        return Err(Error::LengthMismatch {
            expected: rates.len(),
            found: bits.len(),
        });
    }
    let total: f64 = bits
        .iter()
        .zip(rates)
        .map(|(&d, &mu)| (d as f64 - mu).abs())
        .sum();
    Ok(total / bits.len() as f64)
}

/// Mean caution index over all rows, measured against the chart's own rates.
/// A single-student chart scores 0.
pub fn average_caution(chart: &SpChart) -> f64 {
    let rates = correct_rates(chart);
    let total: f64 = chart
        .rows
        .iter()
        .map(|r| caution_index(&r.bits, &rates).expect("rows match chart width"))
        .sum();
    total / chart.students() as f64
}
