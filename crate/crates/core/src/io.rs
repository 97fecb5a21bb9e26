//! CSV interchange formats and CLI grid specifications.
//!
//! Every CSV has a header row, uses `.` as decimal separator and `\n` line
//! endings. Floats are written in Rust's shortest round-trip form so output is
//! byte-stable. Missing values are empty fields.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::estimators::MplEstimate;
use crate::harness::{ArePoint, EfficiencyReport, MplPoint};
use crate::ranking::RankedSetSample;

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(w)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Reads a `cycle,rank,value` CSV. Every (cycle, rank) pair of the implied
/// `m x k` grid must appear exactly once.
pub fn read_rss_csv<R: Read>(r: R) -> Result<RankedSetSample> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["cycle", "rank", "value"] {
        return Err(Error::Parse(format!(
            "expected header 'cycle,rank,value', got '{}'",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| rec.get(i).unwrap_or("");
        let int = |i: usize| {
            field(i)
                .parse::<usize>()
                .map_err(|e| Error::Parse(format!("row {}: bad integer '{}': {e}", line + 2, field(i))))
        };
        let (cycle, rank) = (int(0)?, int(1)?);
        let value = field(2)
            .parse::<f64>()
            .map_err(|e| Error::Parse(format!("row {}: bad value '{}': {e}", line + 2, field(2))))?;
        if cycle == 0 || rank == 0 {
            return Err(Error::Parse(format!("row {}: cycles and ranks start at 1", line + 2)));
        }
        if cells.insert((cycle, rank), value).is_some() {
            return Err(Error::Parse(format!("duplicate entry for cycle {cycle}, rank {rank}")));
        }
    }
    if cells.is_empty() {
        return Err(Error::EmptySample);
    }
    let m = cells.keys().map(|c| c.0).max().unwrap_or(0);
    let k = cells.keys().map(|c| c.1).max().unwrap_or(0);
    if cells.len() != m * k {
        return Err(Error::Parse(format!(
            "incomplete design: {} entries for {m} cycles x {k} ranks",
            cells.len()
        )));
    }
    let rows = (1..=k)
        .map(|r| (1..=m).map(|j| cells[&(j, r)]).collect())
        .collect();
    RankedSetSample::from_rank_rows(rows)
}

pub fn write_rss_csv<W: Write>(w: W, sample: &RankedSetSample) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["cycle", "rank", "value"])?;
    for (j, r, v) in sample.entries() {
        wr.write_record([j.to_string(), r.to_string(), v.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_estimates_csv<W: Write>(w: W, estimates: &[MplEstimate]) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["t", "estimate", "count", "variance", "ci_lower", "ci_upper"])?;
    for e in estimates {
        wr.write_record([
            e.t.to_string(),
            e.value.to_string(),
            e.count_at_risk.to_string(),
            opt(e.variance),
            opt(e.ci.map(|c| c.0)),
            opt(e.ci.map(|c| c.1)),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_mpl_csv<W: Write>(w: W, points: &[MplPoint]) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["q", "t", "K"])?;
    for p in points {
        wr.write_record([p.q.to_string(), p.t.to_string(), p.k.to_string()])?;
    }
    wr.flush()?;
    Ok(())
}

/// Rows of `dist,model,p,k,q,t,avar_srs,avar_rss,are`.
pub fn write_are_csv<W: Write>(w: W, dist: &str, model: &str, p: f64, k: usize, points: &[ArePoint]) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record(["dist", "model", "p", "k", "q", "t", "avar_srs", "avar_rss", "are"])?;
    for pt in points {
        wr.write_record([
            dist.to_string(),
            model.to_string(),
            p.to_string(),
            k.to_string(),
            pt.q.to_string(),
            pt.t.to_string(),
            pt.avar_srs.to_string(),
            pt.avar_rss.to_string(),
            pt.are.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn write_report_csv<W: Write>(w: W, report: &EfficiencyReport) -> Result<()> {
    let mut wr = writer(w);
    wr.write_record([
        "q",
        "t",
        "k_exact",
        "mse_srs",
        "mse_rss",
        "re",
        "re_stderr",
        "zero_frac_srs",
        "zero_frac_rss",
    ])?;
    for r in &report.rows {
        wr.write_record([
            r.q.to_string(),
            r.t.to_string(),
            r.k_exact.to_string(),
            r.mse_srs.to_string(),
            r.mse_rss.to_string(),
            r.re.to_string(),
            r.re_stderr.to_string(),
            r.zero_frac_srs.to_string(),
            r.zero_frac_rss.to_string(),
        ])?;
    }
    wr.flush()?;
    Ok(())
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|e| Error::Parse(format!("bad number '{s}': {e}")))
}

fn split3(spec: &str) -> Result<[&str; 3]> {
    let parts: Vec<&str> = spec.split(':').collect();
    <[&str; 3]>::try_from(parts)
        .map_err(|_| Error::Parse(format!("expected 'a:b:c', got '{spec}'")))
}

// Snaps accumulated grid values to 12 decimals so `0.05 + i * 0.05` prints as
// the intended decimal.
fn snap(x: f64) -> f64 {
    (x * 1e12).round() / 1e12
}

/// `start:stop:step`, inclusive of `stop` when it lands on the lattice.
pub fn parse_step_grid(spec: &str) -> Result<Vec<f64>> {
    let [a, b, s] = split3(spec)?;
    let (a, b, step) = (parse_f64(a)?, parse_f64(b)?, parse_f64(s)?);
    if !(step > 0.0) || !(a <= b) {
        return Err(Error::Parse(format!("grid '{spec}' needs start <= stop and step > 0")));
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| snap(a + step * i as f64)).collect())
}

/// `start:stop:count` equally spaced points, endpoints included.
pub fn parse_count_grid(spec: &str) -> Result<Vec<f64>> {
    let [a, b, c] = split3(spec)?;
    let (a, b) = (parse_f64(a)?, parse_f64(b)?);
    let count: usize = c
        .trim()
        .parse()
        .map_err(|e| Error::Parse(format!("bad count '{c}': {e}")))?;
    if count == 0 || !(a <= b) {
        return Err(Error::Parse(format!("grid '{spec}' needs start <= stop and count >= 1")));
    }
    if count == 1 {
        return Ok(vec![a]);
    }
    let step = (b - a) / (count - 1) as f64;
    Ok((0..count)
        .map(|i| if i + 1 == count { b } else { a + step * i as f64 })
        .collect())
}
