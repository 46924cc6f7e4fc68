use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::signal::{Spike, SpikeTrain};

/// Largest valid encoded value plus one: 8 neuron bits, 2 chip bits, 4 mask bits.
pub const MAX_ENCODED: u32 = 1 << 14;

/// One virtual-neuron spike addressed to a set of cores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct DynapseEvent {
    pub neuron_id: u8,
    pub chip_id: u8,
    pub core_mask: u8,
}

impl DynapseEvent {
    pub fn new(neuron_id: u8, chip_id: u8, core_mask: u8) -> Result<Self> {
        if chip_id > 3 {
            return Err(Error::invalid(format!("chip id {chip_id} outside 0..=3")));
        }
        if core_mask == 0 || core_mask > 0b1111 {
            return Err(Error::invalid(format!("core mask {core_mask:#b} must be 4-bit and nonzero")));
        }
        Ok(Self {
            neuron_id,
            chip_id,
            core_mask,
        })
    }
}

pub fn encode_event(e: &DynapseEvent) -> Result<u32> {
    DynapseEvent::new(e.neuron_id, e.chip_id, e.core_mask)?;
    Ok((u32::from(e.neuron_id) << 6) | (u32::from(e.chip_id) << 4) | u32::from(e.core_mask))
}

pub fn decode_event(v: u32) -> Result<DynapseEvent> {
    if v >= MAX_ENCODED {
        return Err(Error::invalid(format!("encoded event {v} exceeds 14 bits")));
    }
    DynapseEvent::new((v >> 6) as u8, ((v >> 4) & 0b11) as u8, (v & 0b1111) as u8)
}

/// Wait time in 1 µs units (90 ISI-bases), rounded to nearest.
pub fn seconds_to_units(dt: f64) -> Result<u64> {
    if !(dt >= 0.0) || !dt.is_finite() {
        return Err(Error::invalid(format!("wait time {dt} must be finite and nonnegative")));
    }
    Ok((dt * 1e6).round() as u64)
}

pub fn units_to_seconds(units: u64) -> f64 {
    units as f64 * 1e-6
}

/// One `E,T` line: encoded address and wait since the previous line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpikeFileEntry {
    pub encoded: u32,
    pub wait_units: u64,
}

pub fn write_spike_file(entries: &[SpikeFileEntry]) -> String {
    let mut out = String::new();
    for e in entries {
        let _ = writeln!(out, "{},{}", e.encoded, e.wait_units);
    }
    out
}

pub fn parse_spike_file(text: &str) -> Result<Vec<SpikeFileEntry>> {
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let (e, t) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(lineno, "expected `E,T`"))?;
        let encoded: u32 = e
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad event `{e}`")))?;
        decode_event(encoded).map_err(|err| Error::parse(lineno, err.to_string()))?;
        let wait_units: u64 = t
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad wait `{t}`")))?;
        out.push(SpikeFileEntry {
            encoded,
            wait_units,
        });
    }
    Ok(out)
}

/// Converts a spike train to file entries. Neuron `i` maps to virtual neuron
/// `i % 256` on chip `i / 256`, targeting `core_mask`. Waits are differences
/// of the rounded absolute times, so rounding never accumulates.
pub fn spikes_to_events(spikes: &SpikeTrain, core_mask: u8) -> Result<Vec<SpikeFileEntry>> {
    let mut prev = 0u64;
    let mut out = Vec::with_capacity(spikes.len());
    for s in spikes.events() {
        if s.neuron >= 1024 {
            return Err(Error::invalid(format!("neuron {} exceeds 4 virtual chips", s.neuron)));
        }
        let ev = DynapseEvent::new((s.neuron % 256) as u8, (s.neuron / 256) as u8, core_mask)?;
        let abs = seconds_to_units(s.time)?;
        out.push(SpikeFileEntry {
            encoded: encode_event(&ev)?,
            wait_units: abs - prev,
        });
        prev = abs;
    }
    Ok(out)
}

/// Inverse of [`spikes_to_events`]; returns the events alongside the train.
pub fn events_to_spikes(entries: &[SpikeFileEntry]) -> Result<(SpikeTrain, Vec<DynapseEvent>)> {
    let mut clock = 0u64;
    let mut spikes = Vec::with_capacity(entries.len());
    let mut events = Vec::with_capacity(entries.len());
    for e in entries {
        clock += e.wait_units;
        let ev = decode_event(e.encoded)?;
        spikes.push(Spike {
            neuron: usize::from(ev.chip_id) * 256 + usize::from(ev.neuron_id),
            time: units_to_seconds(clock),
        });
        events.push(ev);
    }
    Ok((SpikeTrain::from_events(spikes)?, events))
}
