use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::{ActivitySpace, SensorReading, SensorStream};
use crate::{Error, Result};

/// Column mapping for a sensor CSV file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    /// Skip the first non-empty line.
    #[serde(default)]
    pub has_header: bool,
    pub subject_col: usize,
    pub activity_col: usize,
    pub timestamp_col: usize,
    pub channel_cols: Vec<usize>,
    /// Multiplier turning raw timestamps into seconds (1e-9 for nanoseconds).
    #[serde(default = "one")]
    pub timestamp_scale: f64,
    pub nominal_rate_hz: f64,
    /// Fixed activity space; rows naming other activities are skipped. When
    /// absent, activities are collected in order of first appearance.
    #[serde(default)]
    pub activities: Option<Vec<String>>,
}

fn one() -> f64 {
    1.0
}

impl CsvSchema {
    /// Raw WISDM v1.1 layout: `user,activity,timestamp_ns,x,y,z;`
    pub fn wisdm() -> Self {
        Self {
            has_header: false,
            subject_col: 0,
            activity_col: 1,
            timestamp_col: 2,
            channel_cols: vec![3, 4, 5],
            timestamp_scale: 1e-9,
            nominal_rate_hz: 20.0,
            activities: Some(
                [
                    "Walking",
                    "Jogging",
                    "Upstairs",
                    "Downstairs",
                    "Sitting",
                    "Standing",
                ]
                .map(String::from)
                .to_vec(),
            ),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.channel_cols.is_empty() {
            return Err(Error::Config("schema needs at least one channel column".into()));
        }
        if !(self.nominal_rate_hz > 0.0) || !(self.timestamp_scale > 0.0) {
            return Err(Error::Config(
                "schema rate and timestamp scale must be positive".into(),
            ));
        }
        Ok(())
    }

    fn width(&self) -> usize {
        self.channel_cols
            .iter()
            .chain([&self.subject_col, &self.activity_col, &self.timestamp_col])
            .max()
            .map_or(0, |m| m + 1)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestStats {
    pub records_read: usize,
    pub records_skipped: usize,
    pub streams: usize,
}

#[derive(Debug, Clone)]
pub struct Ingested {
    pub space: ActivitySpace,
    pub streams: Vec<SensorStream>,
    pub stats: IngestStats,
}

/// Reads a sensor CSV into one stream per subject.
///
/// Records are separated by newlines or `;`. Records with the wrong field
/// count, blank fields, unparsable numbers, negative timestamps or unknown
/// activities are skipped and counted. Each stream is stably sorted by time.
pub fn ingest_csv(path: &Path, schema: &CsvSchema) -> Result<Ingested> {
    schema.validate()?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_csv(&text, schema).map_err(|e| match e {
        Error::EmptyInput(_) => Error::EmptyInput(path.display().to_string()),
        other => other,
    })
}

pub(crate) fn parse_csv(text: &str, schema: &CsvSchema) -> Result<Ingested> {
    let mut stats = IngestStats::default();
    let mut names: Vec<String> = schema.activities.clone().unwrap_or_default();
    let fixed_space = schema.activities.is_some();
    let mut subjects: Vec<String> = Vec::new();
    let mut subject_index: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<Vec<(SensorReading, usize)>> = Vec::new();

    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    if schema.has_header {
        lines.next();
    }
    let width = schema.width();
    for line in lines {
        for record in line.split(';').map(str::trim).filter(|r| !r.is_empty()) {
            stats.records_read += 1;
            let Some((subject, activity, reading)) = parse_record(record, schema, width) else {
                stats.records_skipped += 1;
                continue;
            };
            let label = match names.iter().position(|n| n == activity) {
                Some(i) => i,
                None if !fixed_space => {
                    names.push(activity.to_string());
                    names.len() - 1
                }
                None => {
                    stats.records_skipped += 1;
                    continue;
                }
            };
            let s = *subject_index.entry(subject.to_string()).or_insert_with(|| {
                subjects.push(subject.to_string());
                rows.push(Vec::new());
                subjects.len() - 1
            });
            rows[s].push((reading, label));
        }
    }

    if rows.is_empty() {
        return Err(Error::EmptyInput("csv text".into()));
    }
    let space = ActivitySpace::new(names)?;
    let streams: Vec<SensorStream> = subjects
        .into_iter()
        .zip(rows)
        .map(|(subject, mut recs)| {
            // stable: equal timestamps keep file order
            recs.sort_by(|a, b| a.0.timestamp.total_cmp(&b.0.timestamp));
            let (readings, labels) = recs.into_iter().unzip();
            SensorStream {
                subject,
                readings,
                labels,
                nominal_rate_hz: schema.nominal_rate_hz,
            }
        })
        .collect();
    stats.streams = streams.len();
    Ok(Ingested {
        space,
        streams,
        stats,
    })
}

fn parse_record<'a>(
    record: &'a str,
    schema: &CsvSchema,
    width: usize,
) -> Option<(&'a str, &'a str, SensorReading)> {
    let fields: Vec<&str> = record.split(',').map(str::trim).collect();
    if fields.len() != width || fields.iter().any(|f| f.is_empty()) {
        return None;
    }
    let timestamp = fields[schema.timestamp_col].parse::<f64>().ok()? * schema.timestamp_scale;
    if !timestamp.is_finite() || timestamp < 0.0 {
        return None;
    }
    let channels = schema
        .channel_cols
        .iter()
        .map(|&c| fields[c].parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<Vec<f64>>>()?;
    Some((
        fields[schema.subject_col],
        fields[schema.activity_col],
        SensorReading::new(timestamp, channels),
    ))
}
