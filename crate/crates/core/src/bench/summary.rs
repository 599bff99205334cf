use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use super::{AlgorithmName, BenchError, TrialRecord, TrialStatus};

pub const SUMMARY_CSV_HEADER: [&str; 7] = [
    "algorithm",
    "map_set",
    "metric",
    "mean",
    "std",
    "n",
    "improvement_vs_rrtstar_pct",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Metric {
    /// Solved trials only.
    PathLength,
    TimeCost,
    Iterations,
    /// Fraction of solved trials; every trial counts.
    SuccessRate,
}

impl Metric {
    pub const ALL: [Metric; 4] = [
        Self::PathLength,
        Self::TimeCost,
        Self::Iterations,
        Self::SuccessRate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::PathLength => "path_length",
            Self::TimeCost => "time_cost",
            Self::Iterations => "iterations",
            Self::SuccessRate => "success_rate",
        }
    }

    fn has_improvement(self) -> bool {
        matches!(self, Self::TimeCost | Self::Iterations)
    }

    fn sample(self, r: &TrialRecord) -> Option<f64> {
        match self {
            Self::PathLength => r.path_length,
            Self::TimeCost => r.time_s,
            Self::Iterations => Some(r.iterations as f64),
            Self::SuccessRate => Some(if r.status == TrialStatus::Solved { 1.0 } else { 0.0 }),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| format!("unknown metric {s:?}"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub algorithm: String,
    pub map_set: String,
    pub metric: Metric,
    pub mean: f64,
    /// Sample standard deviation (n - 1); absent for n < 2.
    pub std: Option<f64>,
    pub n: usize,
    /// `100 * (mean_rrt_star - mean) / mean` for time and iteration metrics.
    pub improvement_vs_rrtstar_pct: Option<f64>,
}

fn mean_std(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.len() >= 2)
        .then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

/// Per-(algorithm, metric) statistics over `records`, all labelled with `map_set`.
///
/// Algorithms appear in order of first occurrence. Metrics with no samples (e.g. time
/// when timing was suppressed) produce no row.
pub fn summarize(records: &[TrialRecord], map_set: &str) -> Result<Vec<SummaryRow>, BenchError> {
    if records.is_empty() {
        return Err(BenchError::EmptyInput);
    }
    let mut labels: Vec<String> = Vec::new();
    for r in records {
        let label = r.label();
        if !labels.contains(&label) {
            labels.push(label);
        }
    }
    let baseline = |metric: Metric| -> Option<f64> {
        let xs: Vec<f64> = records
            .iter()
            .filter(|r| r.algorithm == AlgorithmName::RrtStar)
            .filter_map(|r| metric.sample(r))
            .collect();
        (!xs.is_empty()).then(|| mean_std(&xs).0)
    };

    let mut rows = Vec::new();
    for label in &labels {
        for metric in Metric::ALL {
            let xs: Vec<f64> = records
                .iter()
                .filter(|r| &r.label() == label)
                .filter_map(|r| metric.sample(r))
                .collect();
            if xs.is_empty() {
                continue;
            }
            let (mean, std) = mean_std(&xs);
            let improvement = if metric.has_improvement() && label != AlgorithmName::RrtStar.as_str() {
                baseline(metric)
                    .filter(|_| mean != 0.0)
                    .map(|base| 100.0 * (base - mean) / mean)
            } else {
                None
            };
            rows.push(SummaryRow {
                algorithm: label.clone(),
                map_set: map_set.to_owned(),
                metric,
                mean,
                std,
                n: xs.len(),
                improvement_vs_rrtstar_pct: improvement,
            });
        }
    }
    Ok(rows)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn write_summary_csv<W: Write>(rows: &[SummaryRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.algorithm.clone(),
            r.map_set.clone(),
            r.metric.to_string(),
            r.mean.to_string(),
            opt(r.std),
            r.n.to_string(),
            opt(r.improvement_vs_rrtstar_pct),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_summary_csv<R: Read>(input: R) -> Result<Vec<SummaryRow>, BenchError> {
    let mut rdr = csv::Reader::from_reader(input);
    if rdr.headers()?.iter().ne(SUMMARY_CSV_HEADER) {
        return Err(BenchError::Parse {
            line: 1,
            message: "unexpected summary header".into(),
        });
    }
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let err = |m: String| BenchError::Parse { line, message: m };
        let num = |s: &str| s.parse::<f64>().map_err(|e| err(format!("{e} ({s:?})")));
        let opt_num = |s: &str| if s.is_empty() { Ok(None) } else { num(s).map(Some) };
        rows.push(SummaryRow {
            algorithm: rec[0].to_owned(),
            map_set: rec[1].to_owned(),
            metric: rec[2].parse().map_err(err)?,
            mean: num(&rec[3])?,
            std: opt_num(&rec[4])?,
            n: rec[5].parse().map_err(|e| err(format!("{e}")))?,
            improvement_vs_rrtstar_pct: opt_num(&rec[6])?,
        });
    }
    Ok(rows)
}
