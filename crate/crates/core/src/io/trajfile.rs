//! Delimited-text trajectory files.
//!
//! ```text
//! # nrswarm trajectory
//! # scenario: "fig6"
//! # ...one `# key: <json>` line per metadata field
//! step,time,agent_id,is_red,x,y
//! 0,0.0,0,1,1.000412,-0.000233
//! ```
//! Floats are written in shortest round-trip form, so reading a file back
//! reproduces the record exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::trajectory::{Sample, TrajectoryMeta, TrajectoryRecord};
use crate::vec2::Vec2;

const MAGIC: &str = "# nrswarm trajectory";
const HEADER: [&str; 6] = ["step", "time", "agent_id", "is_red", "x", "y"];

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

pub fn write_trajectory_to(traj: &TrajectoryRecord, out: &mut impl Write) -> std::io::Result<()> {
    writeln!(out, "{MAGIC}")?;
    let meta = serde_json::to_value(&traj.meta).map_err(std::io::Error::other)?;
    if let serde_json::Value::Object(map) = meta {
        for (k, v) in map {
            writeln!(out, "# {k}: {v}")?;
        }
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    let red = traj.meta.red_index;
    for s in traj.samples() {
        let (step, time) = (s.step.to_string(), fmt_f64(s.time));
        for (i, p) in s.positions.iter().enumerate() {
            w.write_record([
                step.as_str(),
                time.as_str(),
                &i.to_string(),
                if i == red { "1" } else { "0" },
                &fmt_f64(p.x),
                &fmt_f64(p.y),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_trajectory(traj: &TrajectoryRecord, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_trajectory_to(traj, &mut out)
        .and_then(|_| out.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn read_trajectory(path: &Path) -> Result<TrajectoryRecord> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_trajectory_from(BufReader::new(file), path)
}

pub fn read_trajectory_from(reader: impl BufRead, path: &Path) -> Result<TrajectoryRecord> {
    let bad = |message: String| Error::Format {
        path: path.to_path_buf(),
        message,
    };
    let mut meta = serde_json::Map::new();
    let mut body = String::new();
    let mut saw_magic = false;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if let Some(comment) = line.strip_prefix('#') {
            if line == MAGIC {
                saw_magic = true;
                continue;
            }
            let (k, v) = comment
                .trim_start()
                .split_once(": ")
                .ok_or_else(|| bad(format!("line {}: malformed header `{line}`", lineno + 1)))?;
            let value = serde_json::from_str(v).map_err(|e| bad(format!("line {}: {e}", lineno + 1)))?;
            meta.insert(k.to_string(), value);
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    if !saw_magic {
        return Err(bad("missing `# nrswarm trajectory` header".into()));
    }
    let meta: TrajectoryMeta =
        serde_json::from_value(serde_json::Value::Object(meta)).map_err(|e| bad(format!("metadata: {e}")))?;

    let mut rdr = csv::Reader::from_reader(body.as_bytes());
    let headers = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if headers.iter().ne(HEADER) {
        return Err(bad(format!("unexpected columns {headers:?}")));
    }
    let mut samples: Vec<Sample> = Vec::new();
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let num = |i: usize| -> Result<f64> {
            field(i)
                .parse::<f64>()
                .map_err(|_| bad(format!("row {}: `{}` is not a number", row + 1, field(i))))
        };
        let int = |i: usize| -> Result<u64> {
            field(i)
                .parse::<u64>()
                .map_err(|_| bad(format!("row {}: `{}` is not an integer", row + 1, field(i))))
        };
        let (step, time, agent) = (int(0)?, num(1)?, int(2)? as usize);
        let p = Vec2::new(num(4)?, num(5)?);
        match samples.last_mut() {
            Some(s) if s.step == step => {
                if agent != s.positions.len() || s.time != time {
                    return Err(bad(format!("row {}: agent rows out of order", row + 1)));
                }
                s.positions.push(p);
            }
            _ => {
                if agent != 0 {
                    return Err(bad(format!("row {}: sample must start with agent 0", row + 1)));
                }
                samples.push(Sample::new(step, time, vec![p]));
            }
        }
    }
    TrajectoryRecord::new(samples, meta).map_err(|e| bad(e.to_string()))
}
