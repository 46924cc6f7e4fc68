//! Beat annotations and their CSV form (`time,label`).

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::SampledSignal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BeatLabel {
    Normal,
    Pvc,
}

impl BeatLabel {
    pub fn symbol(self) -> &'static str {
        match self {
            BeatLabel::Normal => "N",
            BeatLabel::Pvc => "V",
        }
    }

    /// MIT-BIH beat symbols map to normal or PVC; non-beat annotation
    /// symbols give `None`.
    pub fn from_symbol(s: &str) -> Result<Option<Self>> {
        Ok(match s {
            "V" | "pvc" => Some(BeatLabel::Pvc),
            "N" | "normal" | "L" | "R" | "B" | "A" | "a" | "J" | "S" | "j" | "e" | "n" | "F"
            | "E" | "/" | "f" | "Q" | "r" => Some(BeatLabel::Normal),
            "+" | "~" | "|" | "\"" | "x" | "[" | "]" | "!" | "s" | "T" | "*" | "D" | "=" | "p"
            | "t" | "u" | "^" | "@" | "?" => None,
            other => return Err(Error::invalid(format!("unknown beat label `{other}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beat {
    pub time: f64,
    pub label: BeatLabel,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BeatAnnotations {
    pub beats: Vec<Beat>,
}

impl BeatAnnotations {
    pub fn new(beats: Vec<Beat>) -> Result<Self> {
        if let Some(w) = beats.windows(2).position(|w| !(w[1].time > w[0].time)) {
            return Err(Error::invalid(format!(
                "beat times must increase strictly (beat {})",
                w + 1
            )));
        }
        Ok(Self { beats })
    }

    pub fn len(&self) -> usize {
        self.beats.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beats.is_empty()
    }

    pub fn pvc_count(&self) -> usize {
        self.beats.iter().filter(|b| b.label == BeatLabel::Pvc).count()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,label\n");
        for b in &self.beats {
            let _ = writeln!(out, "{},{}", b.time, b.label.symbol());
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut beats = Vec::new();
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == "time,label" => {}
            _ => return Err(Error::parse(1, "expected header `time,label`")),
        }
        for (idx, line) in lines {
            let lineno = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let (t, l) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(lineno, "expected `time,label`"))?;
            let time: f64 = t
                .trim()
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::parse(lineno, format!("bad time `{t}`")))?;
            let label = BeatLabel::from_symbol(l.trim()).map_err(|e| Error::parse(lineno, e.to_string()))?;
            if let Some(label) = label {
                if let Some(prev) = beats.last().map(|b: &Beat| b.time) {
                    if !(time > prev) {
                        return Err(Error::parse(lineno, "beat times must increase strictly"));
                    }
                }
                beats.push(Beat { time, label });
            }
        }
        if beats.is_empty() {
            return Err(Error::InsufficientData("annotation file has no beats".into()));
        }
        Ok(Self { beats })
    }
}

/// Single-channel `time,value` CSV.
pub fn signal_to_csv(signal: &SampledSignal) -> String {
    let mut out = String::from("time,value\n");
    for k in 0..signal.len() {
        let _ = writeln!(out, "{},{}", signal.time(k), signal.values[(0, k)]);
    }
    out
}

/// Parses `time,value` rows; the sampling period comes from the first two
/// rows and every later row must sit on that grid.
pub fn signal_from_csv(text: &str) -> Result<SampledSignal> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == "time,value" => {}
        _ => return Err(Error::parse(1, "expected header `time,value`")),
    }
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (t, v) = line
            .split_once(',')
            .ok_or_else(|| Error::parse(lineno, "expected `time,value`"))?;
        let parse = |s: &str, what: &str| {
            s.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(lineno, format!("bad {what} `{s}`")))
        };
        let t = parse(t, "time")?;
        let v = parse(v, "value")?;
        if times.len() >= 2 {
            let t0: f64 = times[0];
            let dt: f64 = times[1] - t0;
            let expected = t0 + times.len() as f64 * dt;
            if (t - expected).abs() > 1e-3 * dt {
                return Err(Error::parse(lineno, format!("time {t} off the sampling grid")));
            }
        } else if times.len() == 1 && !(t > times[0]) {
            return Err(Error::parse(lineno, "times must increase"));
        }
        times.push(t);
        values.push(v);
    }
    if times.len() < 2 {
        return Err(Error::InsufficientData("signal needs at least two samples".into()));
    }
    let dt = times[1] - times[0];
    SampledSignal::from_channels(times[0], dt, &[values])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_line_fixture() {
        let a = BeatAnnotations::from_csv("time,label\n0.5,N\n1.2,V\n").unwrap();
        assert_eq!(
            a.beats,
            vec![
                Beat { time: 0.5, label: BeatLabel::Normal },
                Beat { time: 1.2, label: BeatLabel::Pvc }
            ]
        );
        let s = signal_from_csv("time,value\n0,1.5\n0.5,-2\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dt, 0.5);
        assert_eq!(s.values[(0, 1)], -2.0);
    }

    #[test]
    fn schema_errors_carry_lines() {
        assert!(matches!(
            BeatAnnotations::from_csv("time,label\n"),
            Err(Error::InsufficientData(_))
        ));
        assert!(matches!(
            BeatAnnotations::from_csv("time,label\n1,N\n0.5,N\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert!(matches!(
            BeatAnnotations::from_csv("time,label\n1,Z\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(matches!(
            signal_from_csv("time,value\n0,1\n1,2\n2.5,3\n"),
            Err(Error::Parse { line: 4, .. })
        ));
        assert!(signal_from_csv("t,v\n0,1\n").is_err());
    }

    #[test]
    fn rhythm_annotations_skipped() {
        let a = BeatAnnotations::from_csv("time,label\n0.1,+\n0.5,N\n").unwrap();
        assert_eq!(a.len(), 1);
    }
}
