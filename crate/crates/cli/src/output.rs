use std::io::{Read, Write};
use std::path::Path;

use anyhow::{Context, Result};
use hocbf::sim::TrajectoryLog;
use serde::{Deserialize, Serialize};

pub const COLUMNS: [&str; 13] = [
    "t", "x", "y", "v", "theta", "phi", "u1", "u2", "nu", "delta", "b", "b_T", "qp_status",
];

/// One line of `trajectory.csv`. `nu` is empty outside integral mode.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub v: f64,
    pub theta: f64,
    pub phi: f64,
    pub u1: f64,
    pub u2: f64,
    pub nu: Option<f64>,
    pub delta: f64,
    pub b: f64,
    #[serde(rename = "b_T")]
    pub b_t: f64,
    pub qp_status: String,
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits()
}

// NaN barrier values compare equal to themselves here.
impl PartialEq for TrajectoryRow {
    fn eq(&self, o: &Self) -> bool {
        let nu = match (self.nu, o.nu) {
            (Some(a), Some(b)) => same(a, b),
            (None, None) => true,
            _ => false,
        };
        [
            (self.t, o.t),
            (self.x, o.x),
            (self.y, o.y),
            (self.v, o.v),
            (self.theta, o.theta),
            (self.phi, o.phi),
            (self.u1, o.u1),
            (self.u2, o.u2),
            (self.delta, o.delta),
            (self.b, o.b),
            (self.b_t, o.b_t),
        ]
        .iter()
        .all(|&(a, b)| same(a, b))
            && nu
            && self.qp_status == o.qp_status
    }
}

pub fn rows(log: &TrajectoryLog) -> Vec<TrajectoryRow> {
    log.steps
        .iter()
        .map(|s| TrajectoryRow {
            t: s.t,
            x: s.state[0],
            y: s.state[1],
            v: s.state[2],
            theta: s.state[3],
            phi: s.state[4],
            u1: s.applied[0],
            u2: s.applied[1],
            nu: s.nu.first().copied(),
            delta: s.delta,
            b: s.b,
            b_t: s.b_t,
            qp_status: s.status.as_str().to_string(),
        })
        .collect()
}

/// 17 significant digits, enough to recover every `f64` exactly.
fn num(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn write_csv<W: Write>(out: W, rows: &[TrajectoryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(COLUMNS)?;
    for r in rows {
        let mut record: Vec<String> = [r.t, r.x, r.y, r.v, r.theta, r.phi, r.u1, r.u2]
            .into_iter()
            .map(num)
            .collect();
        record.push(r.nu.map(num).unwrap_or_default());
        record.extend([r.delta, r.b, r.b_t].into_iter().map(num));
        record.push(r.qp_status.clone());
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<TrajectoryRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    anyhow::ensure!(header == COLUMNS, "unexpected trajectory columns {header:?}");
    r.deserialize().map(|row| Ok(row?)).collect()
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut w = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(path: &Path, rows: &[TrajectoryRow]) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(std::io::BufWriter::new(file), rows)
}
