use std::fmt::Write as _;
use std::path::Path;

use super::types::{ActivitySpace, SensorReading, SparseSegment};
use crate::report::write_atomic;
use crate::{Error, Result};

const MAGIC: &str = "sparse-har-segments v1";

/// Segments plus the metadata needed to interpret them.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentArchive {
    pub space: ActivitySpace,
    pub dim: usize,
    pub segments: Vec<SparseSegment>,
}

impl SegmentArchive {
    /// Text form:
    ///
    /// ```text
    /// sparse-har-segments v1,d=3,activities=walk|sit|lie
    /// segment,<window_start>,<window_len>,<label>,<m>
    /// <timestamp>,<c1>,...,<cd>        (m rows)
    /// ```
    ///
    /// Floats use the shortest representation that parses back bit-exactly.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{MAGIC},d={},activities={}",
            self.dim,
            self.space.names().join("|")
        );
        for s in &self.segments {
            let _ = writeln!(
                out,
                "segment,{:?},{:?},{},{}",
                s.window_start,
                s.window_len,
                s.label,
                s.len()
            );
            for r in &s.readings {
                let _ = write!(out, "{:?}", r.timestamp);
                for v in &r.channels {
                    let _ = write!(out, ",{v:?}");
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_csv().as_bytes())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or("empty archive")?;
        let rest = header
            .strip_prefix(MAGIC)
            .and_then(|r| r.strip_prefix(",d="))
            .ok_or("missing archive header")?;
        let (d, acts) = rest.split_once(",activities=").ok_or("header lacks activities")?;
        let dim: usize = d.parse().map_err(|_| format!("bad dimension {d:?}"))?;
        let space = ActivitySpace::new(acts.split('|')).map_err(|e| e.to_string())?;

        let num = |s: &str, line: usize| -> std::result::Result<f64, String> {
            s.parse::<f64>()
                .map_err(|_| format!("line {}: bad number {s:?}", line + 1))
        };
        let mut segments = Vec::new();
        while let Some((ln, line)) = lines.next() {
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 5 || f[0] != "segment" {
                return Err(format!("line {}: expected segment record", ln + 1));
            }
            let window_start = num(f[1], ln)?;
            let window_len = num(f[2], ln)?;
            let label: usize = f[3].parse().map_err(|_| format!("line {}: bad label", ln + 1))?;
            if label >= space.len() {
                return Err(format!("line {}: label {label} outside activity space", ln + 1));
            }
            let m: usize = f[4].parse().map_err(|_| format!("line {}: bad count", ln + 1))?;
            let mut readings = Vec::with_capacity(m);
            for _ in 0..m {
                let (ln, line) = lines.next().ok_or("archive truncated")?;
                let vals = line
                    .split(',')
                    .map(|v| num(v, ln))
                    .collect::<std::result::Result<Vec<f64>, String>>()?;
                if vals.len() != dim + 1 {
                    return Err(format!(
                        "line {}: expected {} values, got {}",
                        ln + 1,
                        dim + 1,
                        vals.len()
                    ));
                }
                readings.push(SensorReading::new(vals[0], vals[1..].to_vec()));
            }
            segments.push(SparseSegment {
                readings,
                window_start,
                window_len,
                label,
            });
        }
        Ok(Self { space, dim, segments })
    }
}
