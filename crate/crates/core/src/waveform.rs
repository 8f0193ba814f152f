//! Piecewise-constant voltage programs.
//!
//! A [`Waveform`] is a sorted list of non-overlapping constant segments and
//! is 0 V everywhere else. Segments are closed on the left and open on the
//! right, so evaluation exactly at an edge returns the value that starts
//! there.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numfmt::sig9;
use crate::thermal::MtjState;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Polarity {
    Positive,
    Negative,
}

impl Polarity {
    pub fn sign(self) -> f64 {
        match self {
            Polarity::Positive => 1.0,
            Polarity::Negative => -1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Positive => Polarity::Negative,
            Polarity::Negative => Polarity::Positive,
        }
    }

    pub fn from_sign(sign: f64) -> Self {
        if sign < 0.0 {
            Polarity::Negative
        } else {
            Polarity::Positive
        }
    }
}

impl TryFrom<i8> for Polarity {
    type Error = String;
    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Polarity::Positive),
            -1 => Ok(Polarity::Negative),
            other => Err(format!("polarity must be 1 or -1, got {other}")),
        }
    }
}

impl From<Polarity> for i8 {
    fn from(p: Polarity) -> i8 {
        match p {
            Polarity::Positive => 1,
            Polarity::Negative => -1,
        }
    }
}

/// Rectangular pulse.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    /// V, non-negative
    pub amplitude: f64,
    /// s
    pub duration: f64,
    pub polarity: Polarity,
}

impl PulseSpec {
    pub fn new(amplitude: f64, duration: f64, polarity: Polarity) -> Self {
        Self {
            amplitude,
            duration,
            polarity,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude >= 0.0 && self.amplitude.is_finite()) {
            return Err(Error::config(format!(
                "pulse amplitude must be >= 0 V, got {}",
                self.amplitude
            )));
        }
        if !(self.duration > 0.0 && self.duration.is_finite()) {
            return Err(Error::config(format!(
                "pulse duration must be > 0, got {}",
                self.duration
            )));
        }
        Ok(())
    }

    /// Signed voltage.
    pub fn voltage(&self) -> f64 {
        self.amplitude * self.polarity.sign()
    }

    pub fn with_polarity(self, polarity: Polarity) -> Self {
        Self { polarity, ..self }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }
}

/// Spike shape emitted by a neuron onto its line: switching pulse first,
/// then the heating pulse after `gap`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NeuronPulseSpec {
    pub switching: PulseSpec,
    pub heating: PulseSpec,
    /// s
    pub gap: f64,
}

impl NeuronPulseSpec {
    pub fn validate(&self) -> Result<()> {
        self.switching.validate()?;
        self.heating.validate()?;
        if !(self.gap >= 0.0) {
            return Err(Error::config(format!("gap must be >= 0, got {}", self.gap)));
        }
        Ok(())
    }

    /// Offset of the heating pulse start from the spike time.
    pub fn heating_offset(&self) -> f64 {
        self.switching.duration + self.gap
    }

    /// Offset of the heating pulse end from the spike time.
    pub fn heating_end_offset(&self) -> f64 {
        self.heating_offset() + self.heating.duration
    }

    pub fn duration(&self) -> f64 {
        self.heating_end_offset()
    }
}

/// Switching direction of a protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "AP_to_P")]
    ApToP,
    #[serde(rename = "P_to_AP")]
    PToAp,
}

impl Direction {
    pub fn initial_state(self) -> MtjState {
        match self {
            Direction::ApToP => MtjState::AP,
            Direction::PToAp => MtjState::P,
        }
    }

    pub fn final_state(self) -> MtjState {
        self.initial_state().toggled()
    }

    /// Sign of the device voltage (pinned side minus free side) that
    /// drives this direction. Negative voltage favors P.
    pub fn drive_polarity(self) -> Polarity {
        match self {
            Direction::ApToP => Polarity::Negative,
            Direction::PToAp => Polarity::Positive,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Direction::ApToP => "AP_to_P",
            Direction::PToAp => "P_to_AP",
        }
    }
}

/// How the heating-pulse polarity is chosen in pair protocols.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeatingPolarity {
    /// Heating torque opposes the switching direction that follows.
    #[default]
    OpposeSwitching,
    /// Use the polarity stored in the heating [`PulseSpec`].
    AsSpecified,
}

impl HeatingPolarity {
    pub fn resolve(self, heating: PulseSpec, direction: Direction) -> PulseSpec {
        match self {
            HeatingPolarity::OpposeSwitching => {
                heating.with_polarity(direction.drive_polarity().flipped())
            }
            HeatingPolarity::AsSpecified => heating,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: f64,
    pub end: f64,
    pub voltage: f64,
}

impl Segment {
    pub fn duration(&self) -> f64 {
        self.end - self.start
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Waveform {
    segments: Vec<Segment>,
}

impl Waveform {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for s in &segments {
            if !(s.start.is_finite() && s.end.is_finite() && s.voltage.is_finite()) {
                return Err(Error::config("waveform segment has non-finite fields"));
            }
            if !(s.end > s.start) {
                return Err(Error::config(format!(
                    "segment end {} must exceed start {}",
                    s.end, s.start
                )));
            }
        }
        for w in segments.windows(2) {
            if w[1].start < w[0].end {
                return Err(Error::config(format!(
                    "waveform segments overlap or are unsorted at t = {}",
                    w[1].start
                )));
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    /// End of the last segment, 0 for an empty waveform.
    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.end)
    }

    pub fn support_length(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// Right-continuous value at `t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let idx = self.segments.partition_point(|s| s.start <= t);
        if idx == 0 {
            return 0.0;
        }
        let s = &self.segments[idx - 1];
        if t < s.end {
            s.voltage
        } else {
            0.0
        }
    }

    pub fn shifted(&self, offset: f64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    start: s.start + offset,
                    end: s.end + offset,
                    voltage: s.voltage,
                })
                .collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    voltage: s.voltage * factor,
                    ..*s
                })
                .collect(),
        }
    }

    /// Linear superposition. The result is canonical: zero-voltage spans
    /// are dropped and touching equal-voltage spans merged.
    pub fn superpose(parts: &[&Waveform]) -> Self {
        let mut edges: Vec<f64> = parts
            .iter()
            .flat_map(|w| w.segments.iter().flat_map(|s| [s.start, s.end]))
            .collect();
        edges.sort_by(f64::total_cmp);
        edges.dedup();
        let mut out: Vec<Segment> = Vec::new();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let v: f64 = parts.iter().map(|p| p.value_at(a)).sum();
            if v == 0.0 {
                continue;
            }
            match out.last_mut() {
                Some(last) if last.end == a && last.voltage == v => last.end = b,
                _ => out.push(Segment {
                    start: a,
                    end: b,
                    voltage: v,
                }),
            }
        }
        Self { segments: out }
    }

    /// `self - other`, canonical.
    pub fn difference(&self, other: &Waveform) -> Self {
        let neg = other.scaled(-1.0);
        Self::superpose(&[self, &neg])
    }

    /// `(t, V)` CSV sampled every `dt` on `[0, horizon)`.
    pub fn to_csv(&self, dt: f64, horizon: f64) -> String {
        let n = (horizon / dt).round() as usize;
        let mut out = String::from("t_ns,voltage_V\n");
        let mut cursor = self.cursor();
        for k in 0..n {
            let t = k as f64 * dt;
            let v = cursor.value_at(t + 0.5 * dt);
            let _ = writeln!(out, "{},{}", sig9(t * 1e9), sig9(v));
        }
        out
    }

    pub fn cursor(&self) -> WaveformCursor<'_> {
        WaveformCursor {
            segments: &self.segments,
            idx: 0,
        }
    }
}

/// Sequential evaluator for non-decreasing query times.
#[derive(Clone, Debug)]
pub struct WaveformCursor<'a> {
    segments: &'a [Segment],
    idx: usize,
}

impl WaveformCursor<'_> {
    #[inline]
    pub fn value_at(&mut self, t: f64) -> f64 {
        while self.idx < self.segments.len() && self.segments[self.idx].end <= t {
            self.idx += 1;
        }
        match self.segments.get(self.idx) {
            Some(s) if s.start <= t => s.voltage,
            _ => 0.0,
        }
    }
}

/// Heating pulse on `[0, t1]`, then the switching pulse after `delta_t` on
/// `[t1 + Δt, t1 + Δt + t2]`, polarity set by `direction`. The heating
/// segment uses `heating.polarity` as given.
pub fn pair_protocol(
    delta_t: f64,
    heating: &PulseSpec,
    switching: &PulseSpec,
    direction: Direction,
) -> Result<Waveform> {
    heating.validate()?;
    switching.validate()?;
    if !(delta_t >= 0.0) {
        return Err(Error::config(format!(
            "pair protocol needs Δt >= 0, got {delta_t}; negative intervals use the mirrored protocol"
        )));
    }
    let t1 = heating.duration;
    let start = t1 + delta_t;
    let v_switch = switching.amplitude * direction.drive_polarity().sign();
    Waveform::new(vec![
        Segment {
            start: 0.0,
            end: t1,
            voltage: heating.voltage(),
        },
        Segment {
            start,
            end: start + switching.duration,
            voltage: v_switch,
        },
    ])
}

/// Line voltage of one neuron spike.
pub fn neuron_waveform(spike_time: f64, spec: &NeuronPulseSpec) -> Result<Waveform> {
    spec.validate()?;
    if !(spike_time >= 0.0) {
        return Err(Error::config(format!("spike time must be >= 0, got {spike_time}")));
    }
    let sw_end = spike_time + spec.switching.duration;
    let h_start = spike_time + spec.heating_offset();
    Waveform::new(vec![
        Segment {
            start: spike_time,
            end: sw_end,
            voltage: spec.switching.voltage(),
        },
        Segment {
            start: h_start,
            end: h_start + spec.heating.duration,
            voltage: spec.heating.voltage(),
        },
    ])
}

/// Superposed line voltage of a whole spike train.
pub fn neuron_train(spike_times: &[f64], spec: &NeuronPulseSpec) -> Result<Waveform> {
    let spikes = spike_times
        .iter()
        .map(|&t| neuron_waveform(t, spec))
        .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Waveform> = spikes.iter().collect();
    Ok(Waveform::superpose(&refs))
}

/// Voltage across the junction: pre (pinned-layer terminal) minus post
/// (free-layer terminal).
pub fn device_voltage(pre: &Waveform, post: &Waveform, t: f64) -> f64 {
    pre.value_at(t) - post.value_at(t)
}
