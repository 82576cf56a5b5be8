use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// One timestamped multi-channel measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorReading {
    /// Seconds.
    pub timestamp: f64,
    pub channels: Vec<f64>,
}

impl SensorReading {
    pub fn new(timestamp: f64, channels: Vec<f64>) -> Self {
        Self { timestamp, channels }
    }

    pub fn dim(&self) -> usize {
        self.channels.len()
    }
}

/// Ordered list of activity names; a label is an index into it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct ActivitySpace {
    names: Vec<String>,
}

impl ActivitySpace {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.len() < 2 {
            return Err(Error::Config(format!(
                "activity space needs at least two activities, got {}",
                names.len()
            )));
        }
        for (i, n) in names.iter().enumerate() {
            if n.is_empty() || n.contains([',', '|', '\n', '\r', ';']) {
                return Err(Error::Config(format!(
                    "activity name {n:?} must be nonempty and free of , | ; and newlines"
                )));
            }
            if names[..i].contains(n) {
                return Err(Error::Config(format!("duplicate activity name {n:?}")));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.names.get(index).map(String::as_str)
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl TryFrom<Vec<String>> for ActivitySpace {
    type Error = Error;

    fn try_from(names: Vec<String>) -> Result<Self> {
        Self::new(names)
    }
}

impl From<ActivitySpace> for Vec<String> {
    fn from(space: ActivitySpace) -> Self {
        space.names
    }
}

/// Readings of one subject in time order, each with an activity label.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorStream {
    pub subject: String,
    pub readings: Vec<SensorReading>,
    pub labels: Vec<usize>,
    pub nominal_rate_hz: f64,
}

impl SensorStream {
    /// Checks label/reading alignment, channel count, time order and label range.
    pub fn validate(&self, space: &ActivitySpace) -> Result<()> {
        if self.labels.len() != self.readings.len() {
            return Err(Error::dim(format!(
                "stream {} has {} readings but {} labels",
                self.subject,
                self.readings.len(),
                self.labels.len()
            )));
        }
        let d = self.readings.first().map_or(0, SensorReading::dim);
        let mut prev = 0.0;
        for (i, r) in self.readings.iter().enumerate() {
            if r.dim() != d {
                return Err(Error::dim(format!(
                    "stream {} reading {i} has {} channels, expected {d}",
                    self.subject,
                    r.dim()
                )));
            }
            if !(r.timestamp >= prev) {
                return Err(Error::Config(format!(
                    "stream {} timestamps must be nonnegative and nondecreasing (reading {i})",
                    self.subject
                )));
            }
            prev = r.timestamp;
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= space.len()) {
            return Err(Error::Index(format!(
                "label {bad} outside activity space of size {}",
                space.len()
            )));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.readings.first().map_or(0, SensorReading::dim)
    }

    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }
}

/// The readings that fell inside one window, treated as an unordered set,
/// plus the window's activity label.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSegment {
    pub readings: Vec<SensorReading>,
    pub window_start: f64,
    pub window_len: f64,
    pub label: usize,
}

impl SparseSegment {
    /// Cardinality `m`.
    pub fn len(&self) -> usize {
        self.readings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.readings.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.readings.first().map_or(0, SensorReading::dim)
    }

    pub fn window_end(&self) -> f64 {
        self.window_start + self.window_len
    }
}
