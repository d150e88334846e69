//! CSV output: one row per (cell, trial), then a summary block, then a fit
//! block, separated by blank lines.

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::GridCell;
use crate::runner::{axis_fits, summarize_records, sweep_fit, Axis, AxisFit, CellSummary, ExperimentResult, TrialRecord};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("no trial rows found")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub cell: usize,
    pub trial: usize,
    pub protocol: String,
    pub mode: String,
    pub generator: String,
    pub partition: String,
    pub n: usize,
    pub d: f64,
    pub k: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub seed: u64,
    pub edges: usize,
    pub average_degree: f64,
    pub has_triangle: bool,
    pub found: bool,
    pub correct: bool,
    pub bits: u64,
    pub max_player_bits: u64,
    pub rounds: u32,
    pub capped_messages: u64,
    pub cap_hits: u64,
}

#[derive(Serialize)]
struct SummaryRow {
    block: &'static str,
    cell: usize,
    n: usize,
    d: f64,
    k: usize,
    trials: usize,
    positives: usize,
    detection_rate: Option<f64>,
    negatives: usize,
    negative_correct_rate: Option<f64>,
    success_rate: f64,
    mean_bits: f64,
    max_bits: u64,
    mean_rounds: f64,
    cap_hit_rate: f64,
}

impl From<&CellSummary> for SummaryRow {
    fn from(c: &CellSummary) -> Self {
        SummaryRow {
            block: "summary",
            cell: c.cell,
            n: c.n,
            d: c.d,
            k: c.k,
            trials: c.trials,
            positives: c.positives,
            detection_rate: c.detection_rate,
            negatives: c.negatives,
            negative_correct_rate: c.negative_correct_rate,
            success_rate: c.success_rate,
            mean_bits: c.mean_bits,
            max_bits: c.max_bits,
            mean_rounds: c.mean_rounds,
            cap_hit_rate: c.cap_hit_rate,
        }
    }
}

#[derive(Serialize)]
struct FitRow {
    block: &'static str,
    axis: &'static str,
    cells: String,
    slope: f64,
    stderr: f64,
    intercept: f64,
    points: usize,
}

fn tag<T: Serialize>(value: &T, field: Option<&str>) -> String {
    let v = serde_json::to_value(value).expect("plain enum");
    let v = match field {
        Some(f) => v[f].clone(),
        None => v,
    };
    v.as_str().unwrap_or_default().to_string()
}

pub fn rows(result: &ExperimentResult) -> Vec<Row> {
    let c = &result.config;
    let (protocol, mode) = (c.protocol.to_string(), c.mode().to_string());
    let generator = tag(&c.generator, Some("family"));
    let partition = tag(&c.partition, None);
    result
        .records
        .iter()
        .map(|r| Row {
            cell: r.cell,
            trial: r.trial,
            protocol: protocol.clone(),
            mode: mode.clone(),
            generator: generator.clone(),
            partition: partition.clone(),
            n: r.n,
            d: r.d,
            k: r.k,
            epsilon: c.epsilon,
            delta: c.delta,
            seed: r.seed,
            edges: r.edges,
            average_degree: r.average_degree,
            has_triangle: r.has_triangle,
            found: r.found,
            correct: r.correct,
            bits: r.bits,
            max_player_bits: r.max_player_bits,
            rounds: r.rounds,
            capped_messages: r.capped_messages,
            cap_hits: r.cap_hits,
        })
        .collect()
}

fn block<T: Serialize>(items: impl IntoIterator<Item = T>) -> Result<Vec<u8>, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for item in items {
        w.serialize(item)?;
    }
    w.into_inner().map_err(|e| ReportError::Io(e.into_error()))
}

fn fit_rows(fits: &[AxisFit]) -> Vec<FitRow> {
    fits.iter()
        .map(|f| FitRow {
            block: "fit",
            axis: f.axis.as_str(),
            cells: f.cells.iter().map(usize::to_string).collect::<Vec<_>>().join(";"),
            slope: f.fit.slope,
            stderr: f.fit.stderr,
            intercept: f.fit.intercept,
            points: f.fit.points,
        })
        .collect()
}

pub fn write_csv(result: &ExperimentResult, mut out: impl Write) -> Result<(), ReportError> {
    out.write_all(&block(rows(result))?)?;
    out.write_all(b"\n")?;
    out.write_all(&block(result.cells.iter().map(SummaryRow::from))?)?;
    if !result.fits.is_empty() {
        out.write_all(b"\n")?;
        out.write_all(&block(fit_rows(&result.fits))?)?;
    }
    Ok(())
}

pub fn to_csv_string(result: &ExperimentResult) -> String {
    let mut buf = Vec::new();
    write_csv(result, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is utf-8")
}

/// Trial rows of a CSV written by [`write_csv`]; later blocks are ignored.
pub fn read_rows(text: &str) -> Result<Vec<Row>, ReportError> {
    let first = text.split("\n\n").next().unwrap_or_default();
    let mut r = csv::Reader::from_reader(first.as_bytes());
    let rows = r.deserialize().collect::<Result<Vec<Row>, _>>()?;
    if rows.is_empty() {
        return Err(ReportError::Empty);
    }
    Ok(rows)
}

/// Recomputes the per-cell summary and fits from trial rows; with `sweep`
/// the fit runs along that axis over every cell.
pub fn refit(rows: &[Row], sweep: Option<Axis>) -> (Vec<CellSummary>, Vec<AxisFit>) {
    let records: Vec<(GridCell, TrialRecord)> = rows
        .iter()
        .map(|r| {
            let grid = GridCell { n: r.n, d: r.d, k: r.k };
            let rec = TrialRecord {
                cell: r.cell,
                trial: r.trial,
                n: r.n,
                d: r.d,
                k: r.k,
                seed: r.seed,
                edges: r.edges,
                average_degree: r.average_degree,
                has_triangle: r.has_triangle,
                found: r.found,
                correct: r.correct,
                bits: r.bits,
                max_player_bits: r.max_player_bits,
                rounds: r.rounds,
                capped_messages: r.capped_messages,
                cap_hits: r.cap_hits,
            };
            (grid, rec)
        })
        .collect();
    let cells = summarize_records(&records);
    let fits = match sweep {
        Some(axis) => sweep_fit(&cells, axis).into_iter().collect(),
        None => axis_fits(&cells),
    };
    (cells, fits)
}

pub fn fits_to_csv(fits: &[AxisFit]) -> String {
    String::from_utf8(block(fit_rows(fits)).expect("writing to memory")).expect("csv is utf-8")
}
