use std::fmt::Display;
use std::io::{Read, Write};
use std::str::FromStr;

use super::{AlgorithmName, BenchError};

pub const TRIAL_CSV_HEADER: [&str; 10] = [
    "map_id",
    "algorithm",
    "tau",
    "trial",
    "seed",
    "status",
    "path_length",
    "time_s",
    "iterations",
    "iters_to_first",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrialStatus {
    Solved,
    BudgetExhausted,
    /// The planner rejected the run (bad guidance, no valid parent, ...).
    Error,
}

impl TrialStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Solved => "solved",
            Self::BudgetExhausted => "budget_exhausted",
            Self::Error => "error",
        }
    }
}

impl FromStr for TrialStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "solved" => Ok(Self::Solved),
            "budget_exhausted" => Ok(Self::BudgetExhausted),
            "error" => Ok(Self::Error),
            _ => Err(format!("unknown status {s:?}")),
        }
    }
}

/// Outcome of a single planning run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialRecord {
    pub map_id: String,
    pub algorithm: AlgorithmName,
    pub tau: Option<f64>,
    pub trial: usize,
    pub seed: u64,
    pub status: TrialStatus,
    /// Present iff `status == Solved`.
    pub path_length: Option<f64>,
    pub time_s: Option<f64>,
    pub iterations: usize,
    pub iters_to_first: Option<usize>,
}

impl TrialRecord {
    pub fn label(&self) -> String {
        super::label_for(self.algorithm, self.tau)
    }
}

fn opt<T: Display>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes the raw trial CSV. With `include_timing = false` the `time_s` column is left
/// empty so reruns are byte-identical.
pub fn write_trials_csv<W: Write>(
    records: &[TrialRecord],
    out: W,
    include_timing: bool,
) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TRIAL_CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.map_id.clone(),
            r.algorithm.to_string(),
            opt(r.tau),
            r.trial.to_string(),
            r.seed.to_string(),
            r.status.as_str().to_owned(),
            opt(r.path_length),
            if include_timing { opt(r.time_s) } else { String::new() },
            r.iterations.to_string(),
            opt(r.iters_to_first),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field<T: FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T, BenchError>
where
    T::Err: Display,
{
    let raw = rec.get(i).unwrap_or("");
    raw.parse().map_err(|e| BenchError::Parse {
        line,
        message: format!("{}: {e} ({raw:?})", TRIAL_CSV_HEADER[i]),
    })
}

fn opt_field<T: FromStr>(
    rec: &csv::StringRecord,
    i: usize,
    line: usize,
) -> Result<Option<T>, BenchError>
where
    T::Err: Display,
{
    match rec.get(i) {
        None | Some("") => Ok(None),
        Some(_) => field(rec, i, line).map(Some),
    }
}

pub fn read_trials_csv<R: Read>(input: R) -> Result<Vec<TrialRecord>, BenchError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers()?.clone();
    if header.iter().ne(TRIAL_CSV_HEADER) {
        return Err(BenchError::Parse {
            line: 1,
            message: format!("unexpected header {:?}", header.iter().collect::<Vec<_>>()),
        });
    }
    let mut out = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = k + 2;
        let algorithm: AlgorithmName = rec[1].parse().map_err(|e: BenchError| BenchError::Parse {
            line,
            message: e.to_string(),
        })?;
        out.push(TrialRecord {
            map_id: rec[0].to_owned(),
            algorithm,
            tau: opt_field(&rec, 2, line)?,
            trial: field(&rec, 3, line)?,
            seed: field(&rec, 4, line)?,
            status: field(&rec, 5, line)?,
            path_length: opt_field(&rec, 6, line)?,
            time_s: opt_field(&rec, 7, line)?,
            iterations: field(&rec, 8, line)?,
            iters_to_first: opt_field(&rec, 9, line)?,
        });
    }
    Ok(out)
}
