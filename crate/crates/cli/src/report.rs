//! Output records and the readers that parse them back.

use std::io::Read;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use zenolink_core::{EnsembleStats, OptimizationResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Envelope<T> {
    pub schema_version: u32,
    pub command: String,
    pub result: T,
}

/// Optimizer output, with wall-clock figures when a round-trip time is known.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeReport {
    #[serde(flatten)]
    pub result: OptimizationResult,
    #[serde(rename = "T_c", default, skip_serializing_if = "Option::is_none")]
    pub t_c: Option<f64>,
    #[serde(rename = "T_min", default, skip_serializing_if = "Option::is_none")]
    pub t_min: Option<f64>,
}

/// The single CSV row written by `optimize`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizeRow {
    pub q: f64,
    #[serde(rename = "P")]
    pub p: f64,
    #[serde(rename = "M_max")]
    pub m_max: u64,
    #[serde(rename = "N_max")]
    pub n_max: u64,
    pub zeta_min: u64,
    #[serde(rename = "M_star")]
    pub m_star: u64,
    #[serde(rename = "N_star")]
    pub n_star: u64,
    pub x: u64,
    pub eta_min: u64,
    #[serde(rename = "T_min_over_Tc")]
    pub t_min_over_tc: f64,
    pub delta_max: f64,
    #[serde(rename = "T_c")]
    pub t_c: Option<f64>,
    #[serde(rename = "T_min")]
    pub t_min: Option<f64>,
}

impl From<&OptimizeReport> for OptimizeRow {
    fn from(r: &OptimizeReport) -> Self {
        let o = &r.result;
        Self {
            q: o.spec.q,
            p: o.spec.p,
            m_max: o.spec.m_max,
            n_max: o.spec.n_max,
            zeta_min: o.zeta_min,
            m_star: o.m_star,
            n_star: o.n_star,
            x: o.x_star,
            eta_min: o.eta_min,
            t_min_over_tc: o.t_min_over_tc,
            delta_max: o.delta_max,
            t_c: r.t_c,
            t_min: r.t_min,
        }
    }
}

/// One row of the `simulate` CSV table.
///
/// `record` is one of `event`, `epsilon`, `f`, `success_f`, `trials`, `seed`.
/// Event rows carry the terminal label in `key`; histogram rows carry the
/// interrogation count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateRow {
    pub record: String,
    pub key: String,
    pub erasure_known_by: Option<String>,
    pub exact: Option<f64>,
    pub count: Option<u64>,
    pub frequency: Option<f64>,
    pub std_error: Option<f64>,
    pub z_score: Option<f64>,
}

impl SimulateRow {
    fn tally(record: &str, key: impl ToString, count: u64) -> Self {
        Self {
            record: record.into(),
            key: key.to_string(),
            erasure_known_by: None,
            exact: None,
            count: Some(count),
            frequency: None,
            std_error: None,
            z_score: None,
        }
    }
}

pub fn simulate_rows(stats: &EnsembleStats) -> Vec<SimulateRow> {
    let mut rows = vec![
        SimulateRow::tally("trials", "", stats.trials),
        SimulateRow::tally("seed", "", stats.master_seed),
    ];
    rows.extend(stats.events.iter().map(|e| SimulateRow {
        record: "event".into(),
        key: e.event.label.as_str().into(),
        erasure_known_by: Some(e.event.erasure_known_by.as_str().into()),
        exact: Some(e.exact),
        count: Some(e.count),
        frequency: Some(e.frequency),
        std_error: Some(e.std_error),
        z_score: e.z_score,
    }));
    rows.push(SimulateRow {
        record: "epsilon".into(),
        key: String::new(),
        erasure_known_by: None,
        exact: Some(stats.epsilon_exact),
        count: None,
        frequency: Some(stats.epsilon_hat),
        std_error: Some(stats.epsilon_std_error),
        z_score: None,
    });
    rows.extend(
        stats
            .f_histogram
            .iter()
            .map(|(f, c)| SimulateRow::tally("f", f, *c)),
    );
    rows.extend(
        stats
            .success_f_histogram
            .iter()
            .map(|(f, c)| SimulateRow::tally("success_f", f, *c)),
    );
    rows
}

pub fn to_json<T: Serialize>(command: &str, result: &T) -> serde_json::Result<Vec<u8>> {
    let env = Envelope {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        result,
    };
    let mut out = serde_json::to_vec_pretty(&env)?;
    out.push(b'\n');
    Ok(out)
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> csv::Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row)?;
    }
    w.into_inner().map_err(|e| e.into_error().into())
}

#[derive(Debug)]
pub struct SchemaMismatch(pub u32);

impl std::fmt::Display for SchemaMismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "unsupported schema_version {} (expected {SCHEMA_VERSION})",
            self.0
        )
    }
}

impl std::error::Error for SchemaMismatch {}

/// Parses a JSON document written by any subcommand.
pub fn read_json<T: DeserializeOwned>(input: impl Read) -> anyhow::Result<Envelope<T>> {
    let env: Envelope<T> = serde_json::from_reader(input)?;
    if env.schema_version != SCHEMA_VERSION {
        return Err(SchemaMismatch(env.schema_version).into());
    }
    Ok(env)
}

/// Parses a CSV table written by any subcommand.
pub fn read_csv<T: DeserializeOwned>(input: impl Read) -> anyhow::Result<Vec<T>> {
    csv::Reader::from_reader(input)
        .deserialize()
        .collect::<Result<_, _>>()
        .map_err(Into::into)
}
