use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use super::types::{ActivitySpace, SensorReading, SensorStream};
use crate::{Error, Result};

/// Shape of the gamma distribution used for activity dwell times.
const DWELL_SHAPE: f64 = 4.0;

/// Sinusoidal component added to every channel while an activity is active.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Oscillation {
    pub amplitude: f64,
    pub frequency_hz: f64,
}

/// Generator settings for a synthetic sparse stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub activities: Vec<String>,
    /// One channel-mean vector per activity.
    pub means: Vec<Vec<f64>>,
    /// Gaussian noise standard deviation.
    pub noise_scale: f64,
    /// Optional per-activity override of `noise_scale`.
    #[serde(default)]
    pub activity_noise: Option<Vec<f64>>,
    /// Optional per-activity oscillation.
    #[serde(default)]
    pub oscillations: Option<Vec<Oscillation>>,
    /// Mean inter-arrival time in seconds.
    pub mean_gap: f64,
    /// Total stream duration in seconds.
    pub duration: f64,
    /// Mean time spent in one activity before switching.
    pub mean_dwell: f64,
    /// Upper bound on the sampling rate; gaps are never shorter than `1/f`.
    pub nominal_rate_hz: f64,
    /// Sample exactly every `1/f` seconds instead of at random gaps.
    #[serde(default)]
    pub regular: bool,
}

/// One contiguous stretch of a single activity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Episode {
    pub activity: usize,
    pub start: f64,
    pub end: f64,
}

#[derive(Debug, Clone)]
pub struct SynthOutput {
    pub stream: SensorStream,
    pub episodes: Vec<Episode>,
}

impl SynthConfig {
    pub fn space(&self) -> Result<ActivitySpace> {
        ActivitySpace::new(self.activities.clone())
    }

    pub fn dim(&self) -> usize {
        self.means.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        let space = self.space()?;
        if self.means.len() != space.len() {
            return Err(Error::Config(format!(
                "{} mean vectors for {} activities",
                self.means.len(),
                space.len()
            )));
        }
        let d = self.dim();
        if d == 0 || self.means.iter().any(|m| m.len() != d) {
            return Err(Error::Config("mean vectors must share a nonzero length".into()));
        }
        for (name, v) in [
            ("mean_gap", self.mean_gap),
            ("duration", self.duration),
            ("mean_dwell", self.mean_dwell),
            ("nominal_rate_hz", self.nominal_rate_hz),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if !(self.noise_scale >= 0.0) {
            return Err(Error::Config("noise_scale must be nonnegative".into()));
        }
        if let Some(n) = &self.activity_noise {
            if n.len() != space.len() || n.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Config(
                    "activity_noise needs one nonnegative value per activity".into(),
                ));
            }
        }
        if let Some(o) = &self.oscillations {
            if o.len() != space.len() {
                return Err(Error::Config("oscillations need one entry per activity".into()));
            }
        }
        Ok(())
    }

    fn noise_for(&self, activity: usize) -> f64 {
        self.activity_noise
            .as_ref()
            .map_or(self.noise_scale, |n| n[activity])
    }
}

/// Generates one labelled stream: semi-Markov activity switching with
/// gamma-distributed dwell times, exponential inter-arrival gaps bounded
/// below by `1/f`, and readings equal to the activity mean plus optional
/// oscillation and Gaussian noise.
pub fn synth_sparse_stream(config: &SynthConfig, seed: u64) -> Result<SensorStream> {
    Ok(synth_with_episodes(config, seed, "synthetic")?.stream)
}

pub fn synth_with_episodes(config: &SynthConfig, seed: u64, subject: &str) -> Result<SynthOutput> {
    config.validate()?;
    let c = config.activities.len();
    let d = config.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dwell = Gamma::new(DWELL_SHAPE, config.mean_dwell / DWELL_SHAPE)
        .map_err(|e| Error::Config(format!("dwell distribution: {e}")))?;
    let gap = Exp::new(1.0 / config.mean_gap).map_err(|e| Error::Config(format!("gap distribution: {e}")))?;
    let min_gap = 1.0 / config.nominal_rate_hz;

    let mut episodes = Vec::new();
    let mut t = 0.0;
    let mut activity = rng.gen_range(0..c);
    while t < config.duration {
        let len: f64 = dwell.sample(&mut rng);
        episodes.push(Episode {
            activity,
            start: t,
            end: (t + len).min(config.duration),
        });
        t += len;
        // switch to a different activity, uniformly
        let next = rng.gen_range(0..c - 1);
        activity = if next >= activity { next + 1 } else { next };
    }
    // per-episode phase keeps oscillating activities from being phase-locked
    let phases: Vec<f64> = episodes.iter().map(|_| rng.gen_range(0.0..TAU)).collect();

    let mut readings = Vec::new();
    let mut labels = Vec::new();
    let mut ep = 0;
    let mut k: u64 = 0;
    let mut t = 0.0;
    while t < config.duration {
        while episodes[ep].end <= t && ep + 1 < episodes.len() {
            ep += 1;
        }
        let a = episodes[ep].activity;
        let noise = config.noise_for(a);
        let mut channels = config.means[a].clone();
        if let Some(osc) = config.oscillations.as_ref().map(|o| o[a]) {
            if osc.amplitude != 0.0 {
                for (j, v) in channels.iter_mut().enumerate() {
                    let phase = phases[ep] + j as f64 * TAU / d as f64;
                    *v += osc.amplitude * (TAU * osc.frequency_hz * t + phase).sin();
                }
            }
        }
        if noise > 0.0 {
            for v in channels.iter_mut() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += noise * z;
            }
        }
        readings.push(SensorReading::new(t, channels));
        labels.push(a);

        k += 1;
        t = if config.regular {
            k as f64 / config.nominal_rate_hz
        } else {
            t + gap.sample(&mut rng).max(min_gap)
        };
    }

    Ok(SynthOutput {
        stream: SensorStream {
            subject: subject.to_string(),
            readings,
            labels,
            nominal_rate_hz: config.nominal_rate_hz,
        },
        episodes,
    })
}
