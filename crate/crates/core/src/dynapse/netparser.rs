use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// Per-neuron CAM slots shared by fan-in and fan-out.
pub const CAM_LIMIT: u32 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NeuronAddress {
    pub chip: u8,
    pub core: u8,
    pub neuron: u8,
}

impl NeuronAddress {
    pub fn new(chip: u8, core: u8, neuron: u8) -> Result<Self> {
        if chip > 3 || core > 3 {
            return Err(Error::invalid(format!("chip {chip} / core {core} outside 0..=3")));
        }
        Ok(Self { chip, core, neuron })
    }

    pub fn index(&self) -> usize {
        usize::from(self.chip) * 1024 + usize::from(self.core) * 256 + usize::from(self.neuron)
    }
}

impl fmt::Display for NeuronAddress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "U{:02}-C{:02}-N{:03}", self.chip, self.core, self.neuron)
    }
}

/// Flat index `i` to chip `i / 1024`, core `(i / 256) % 4`, neuron `i % 256`.
pub fn neuron_address(i: usize) -> Result<NeuronAddress> {
    if i >= 4096 {
        return Err(Error::invalid(format!("neuron index {i} exceeds 4 chips")));
    }
    NeuronAddress::new((i / 1024) as u8, ((i / 256) % 4) as u8, (i % 256) as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SynapseType {
    SlowInhibitory = 0,
    FastInhibitory = 1,
    SlowExcitatory = 2,
    FastExcitatory = 3,
}

impl SynapseType {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        Ok(match code {
            0 => Self::SlowInhibitory,
            1 => Self::FastInhibitory,
            2 => Self::SlowExcitatory,
            3 => Self::FastExcitatory,
            other => return Err(Error::invalid(format!("synapse type {other} outside 0..=3"))),
        })
    }

    pub fn is_excitatory(self) -> bool {
        matches!(self, Self::SlowExcitatory | Self::FastExcitatory)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Role {
    Input,
    Recurrent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Speed {
    Fast,
    Slow,
}

/// Inputs ride fast synapses, reservoir connections slow ones.
pub fn synapse_speed_assign(role: Role) -> Speed {
    match role {
        Role::Input => Speed::Fast,
        Role::Recurrent => Speed::Slow,
    }
}

pub fn synapse_type(role: Role, excitatory: bool) -> SynapseType {
    match (synapse_speed_assign(role), excitatory) {
        (Speed::Fast, true) => SynapseType::FastExcitatory,
        (Speed::Fast, false) => SynapseType::FastInhibitory,
        (Speed::Slow, true) => SynapseType::SlowExcitatory,
        (Speed::Slow, false) => SynapseType::SlowInhibitory,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ConnectionLine {
    pub pre: NeuronAddress,
    pub synapse_type: SynapseType,
    pub cams: u8,
    pub post: NeuronAddress,
}

impl ConnectionLine {
    pub fn new(pre: NeuronAddress, synapse_type: SynapseType, cams: u8, post: NeuronAddress) -> Result<Self> {
        if cams == 0 || u32::from(cams) > CAM_LIMIT {
            return Err(Error::invalid(format!("cams {cams} outside 1..=64")));
        }
        Ok(Self {
            pre,
            synapse_type,
            cams,
            post,
        })
    }
}

impl fmt::Display for ConnectionLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}->{}-{}-{}",
            self.pre,
            self.synapse_type.code(),
            self.cams,
            self.post
        )
    }
}

pub fn write_netparser(lines: &[ConnectionLine]) -> String {
    let mut out = String::new();
    for l in lines {
        let _ = writeln!(out, "{l}");
    }
    out
}

/// Cursor over one line; every field must match the canonical rendering.
struct Cursor<'a> {
    s: &'a [u8],
    pos: usize,
    line: usize,
}

impl Cursor<'_> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.line, format!("column {}: {}", self.pos + 1, msg.into()))
    }

    fn literal(&mut self, lit: &str) -> Result<()> {
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.err(format!("expected `{lit}`")))
        }
    }

    fn fixed_digits(&mut self, width: usize) -> Result<u32> {
        let end = self.pos + width;
        if end > self.s.len() || !self.s[self.pos..end].iter().all(u8::is_ascii_digit) {
            return Err(self.err(format!("expected {width} digits")));
        }
        let v = self.s[self.pos..end]
            .iter()
            .fold(0u32, |acc, d| acc * 10 + u32::from(d - b'0'));
        self.pos = end;
        Ok(v)
    }

    /// Decimal without leading zeros.
    fn number(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() && self.pos - start < 6 {
            self.pos += 1;
        }
        let digits = &self.s[start..self.pos];
        if digits.is_empty() || (digits.len() > 1 && digits[0] == b'0') {
            self.pos = start;
            return Err(self.err("expected a decimal number"));
        }
        Ok(digits.iter().fold(0u32, |acc, d| acc * 10 + u32::from(d - b'0')))
    }

    fn address(&mut self) -> Result<NeuronAddress> {
        self.literal("U")?;
        let chip = self.fixed_digits(2)?;
        self.literal("-C")?;
        let core = self.fixed_digits(2)?;
        self.literal("-N")?;
        let neuron = self.fixed_digits(3)?;
        if chip > 3 || core > 3 || neuron > 255 {
            return Err(self.err(format!("address U{chip:02}-C{core:02}-N{neuron:03} out of range")));
        }
        NeuronAddress::new(chip as u8, core as u8, neuron as u8)
    }
}

fn parse_line(line: &str, lineno: usize) -> Result<ConnectionLine> {
    let mut c = Cursor {
        s: line.as_bytes(),
        pos: 0,
        line: lineno,
    };
    let pre = c.address()?;
    c.literal("->")?;
    let ty = c.number()?;
    let synapse_type = u8::try_from(ty)
        .map_err(|_| c.err("synapse type out of range"))
        .and_then(|t| SynapseType::from_code(t).map_err(|e| c.err(e.to_string())))?;
    c.literal("-")?;
    let cams = c.number()?;
    if cams == 0 || cams > CAM_LIMIT {
        return Err(c.err(format!("cams {cams} outside 1..=64")));
    }
    c.literal("-")?;
    let post = c.address()?;
    if c.pos != c.s.len() {
        return Err(c.err("trailing characters"));
    }
    ConnectionLine::new(pre, synapse_type, cams as u8, post)
}

pub fn parse_netparser(text: &str) -> Result<Vec<ConnectionLine>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| parse_line(l, i + 1))
        .collect()
}

/// One line per nonzero `w[post][pre]`: sign picks excitatory or inhibitory,
/// `role` picks the speed, and `|w| / cam_unit` (rounded, at least 1) the CAM
/// count.
pub fn weights_to_lines(w: &DMatrix<f64>, role: Role, cam_unit: f64) -> Result<Vec<ConnectionLine>> {
    if !(cam_unit > 0.0) {
        return Err(Error::invalid("cam_unit must be positive"));
    }
    let mut out = Vec::new();
    for pre in 0..w.ncols() {
        for post in 0..w.nrows() {
            let v = w[(post, pre)];
            if v == 0.0 {
                continue;
            }
            let cams = (v.abs() / cam_unit).round().max(1.0);
            if cams > f64::from(CAM_LIMIT) {
                return Err(Error::invalid(format!(
                    "weight {v} at ({post},{pre}) needs {cams} CAMs"
                )));
            }
            out.push(ConnectionLine::new(
                neuron_address(pre)?,
                synapse_type(role, v > 0.0),
                cams as u8,
                neuron_address(post)?,
            )?);
        }
    }
    Ok(out)
}

/// Inverse of [`weights_to_lines`] onto an `n × n` matrix. Repeated lines
/// between the same pair accumulate.
pub fn lines_to_weights(lines: &[ConnectionLine], n: usize, cam_unit: f64) -> Result<DMatrix<f64>> {
    let mut w = DMatrix::zeros(n, n);
    for l in lines {
        let (pre, post) = (l.pre.index(), l.post.index());
        if pre >= n || post >= n {
            return Err(Error::invalid(format!("{} -> {} outside {n} neurons", l.pre, l.post)));
        }
        let sign = if l.synapse_type.is_excitatory() { 1.0 } else { -1.0 };
        w[(post, pre)] += sign * f64::from(l.cams) * cam_unit;
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CamUsage {
    pub fan_in: u32,
    pub fan_out: u32,
}

impl CamUsage {
    pub fn total(&self) -> u32 {
        self.fan_in + self.fan_out
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CamReport {
    pub usage: BTreeMap<NeuronAddress, CamUsage>,
    pub violations: Vec<NeuronAddress>,
}

impl CamReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn check_cam_budget(lines: &[ConnectionLine]) -> CamReport {
    let mut usage: BTreeMap<NeuronAddress, CamUsage> = BTreeMap::new();
    for l in lines {
        usage.entry(l.post).or_default().fan_in += u32::from(l.cams);
        usage.entry(l.pre).or_default().fan_out += u32::from(l.cams);
    }
    let violations = usage
        .iter()
        .filter(|(_, u)| u.total() > CAM_LIMIT)
        .map(|(a, _)| *a)
        .collect();
    CamReport { usage, violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = "U00-C01-N002->0-5-U02-C03-N004";

    #[test]
    fn example_line() {
        let lines = parse_netparser(EXAMPLE).unwrap();
        assert_eq!(lines.len(), 1);
        let l = lines[0];
        assert_eq!(l.pre, NeuronAddress::new(0, 1, 2).unwrap());
        assert_eq!(l.synapse_type, SynapseType::SlowInhibitory);
        assert_eq!(l.cams, 5);
        assert_eq!(l.post, NeuronAddress::new(2, 3, 4).unwrap());
        assert_eq!(l.to_string(), EXAMPLE);
        assert!(check_cam_budget(&lines).ok());
    }

    #[test]
    fn rejects_bad_grammar() {
        for bad in [
            "U00-C01-N002->0-65-U02-C03-N004",
            "U00-C01-N002->0-0-U02-C03-N004",
            "U00-C01-N002->4-5-U02-C03-N004",
            "U00-C04-N002->0-5-U02-C03-N004",
            "U00-C01-N256->0-5-U02-C03-N004",
            "U0-C01-N002->0-5-U02-C03-N004",
            "U00-C01-N002->0-05-U02-C03-N004",
            "U00-C01-N002->0-5-U02-C03-N004 ",
            "U00-C01-N002-0-5-U02-C03-N004",
        ] {
            assert!(parse_netparser(bad).is_err(), "{bad}");
        }
        match parse_netparser(&format!("{EXAMPLE}\nbad\n")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn speed_heuristic() {
        assert_eq!(synapse_type(Role::Input, true).code(), 3);
        assert_eq!(synapse_type(Role::Recurrent, false).code(), 0);
        assert_eq!(synapse_type(Role::Recurrent, true).code(), 2);
        assert_eq!(synapse_type(Role::Input, false).code(), 1);
    }

    #[test]
    fn budget_flags_overflow() {
        let a = neuron_address(0).unwrap();
        let b = neuron_address(1).unwrap();
        let c = neuron_address(2).unwrap();
        let lines = vec![
            ConnectionLine::new(b, SynapseType::SlowExcitatory, 33, a).unwrap(),
            ConnectionLine::new(c, SynapseType::SlowExcitatory, 33, a).unwrap(),
        ];
        let report = check_cam_budget(&lines);
        assert_eq!(report.violations, vec![a]);
        assert_eq!(report.usage[&a].fan_in, 66);
        assert!(check_cam_budget(&[]).ok());
    }

    #[test]
    fn addresses() {
        assert_eq!(neuron_address(0).unwrap().to_string(), "U00-C00-N000");
        assert_eq!(neuron_address(1300).unwrap().to_string(), "U01-C01-N020");
        assert_eq!(neuron_address(1300).unwrap().index(), 1300);
        assert!(neuron_address(4096).is_err());
    }

    #[test]
    fn weights_round_trip() {
        let w = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, -1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0]);
        let lines = weights_to_lines(&w, Role::Recurrent, 1.0).unwrap();
        assert_eq!(lines.len(), 4);
        let text = write_netparser(&lines);
        let back = lines_to_weights(&parse_netparser(&text).unwrap(), 3, 1.0).unwrap();
        assert_eq!(back, w);
    }
}
