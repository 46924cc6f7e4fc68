use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

/// Parameter names in table order.
pub const BIAS_NAMES: [&str; 25] = [
    "IF_AHTAU_N",
    "IF_AHTHR_N",
    "IF_AHW_P",
    "IF_BUF_P",
    "IF_CASC_N",
    "IF_DC_P",
    "IF_NMDA_N",
    "IF_RFR_N",
    "IF_TAU1_N",
    "IF_TAU2_N",
    "IF_THR_N",
    "NPDPIE_TAU_F_P",
    "NPDPIE_TAU_S_P",
    "NPDPIE_THR_F_P",
    "NPDPIE_THR_S_P",
    "NPDPII_TAU_F_P",
    "NPDPII_TAU_S_P",
    "NPDPII_THR_F_P",
    "NPDPII_THR_S_P",
    "PS_WEIGHT_EXC_F_N",
    "PS_WEIGHT_EXC_S_N",
    "PS_WEIGHT_INH_F_N",
    "PS_WEIGHT_INH_S_N",
    "PULSE_PWLK_P",
    "R2R_P",
];

const DEFAULT_VALUES: [(u8, u8); 25] = [
    (7, 35),
    (7, 1),
    (7, 1),
    (3, 80),
    (7, 1),
    (7, 0),
    (7, 0),
    (4, 60),
    (7, 130),
    (0, 100),
    (7, 130),
    (4, 36),
    (5, 38),
    (2, 200),
    (2, 200),
    (5, 41),
    (5, 41),
    (0, 150),
    (7, 150),
    (0, 30),
    (0, 100),
    (0, 100),
    (0, 114),
    (2, 112),
    (4, 85),
];

/// Fast-synapse threshold and time-constant currents, driven to their
/// minimum by heuristic 1.
pub const HEURISTIC1_PARAMS: [&str; 4] = [
    "NPDPIE_TAU_F_P",
    "NPDPIE_THR_F_P",
    "NPDPII_TAU_F_P",
    "NPDPII_THR_F_P",
];

const HEURISTIC1_VALUE: (u8, u8) = (7, 0);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BiasEntry {
    pub name: String,
    pub coarse: u8,
    pub fine: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BiasTable {
    pub entries: Vec<BiasEntry>,
}

impl BiasTable {
    pub fn get(&self, name: &str) -> Option<(u8, u8)> {
        self.entries
            .iter()
            .find(|e| e.name == name)
            .map(|e| (e.coarse, e.fine))
    }

    pub fn set(&mut self, name: &str, coarse: u8, fine: u8) -> Result<()> {
        if coarse > 7 {
            return Err(Error::invalid(format!("coarse value {coarse} outside 0..=7")));
        }
        let entry = self
            .entries
            .iter_mut()
            .find(|e| e.name == name)
            .ok_or_else(|| Error::invalid(format!("unknown bias `{name}`")))?;
        entry.coarse = coarse;
        entry.fine = fine;
        Ok(())
    }

    /// Names whose values differ, in table order.
    pub fn diff(&self, other: &BiasTable) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| other.get(&e.name) != Some((e.coarse, e.fine)))
            .map(|e| e.name.clone())
            .collect()
    }
}

pub fn bias_preset(name: &str) -> Result<BiasTable> {
    let default = BiasTable {
        entries: BIAS_NAMES
            .iter()
            .zip(DEFAULT_VALUES)
            .map(|(n, (coarse, fine))| BiasEntry {
                name: (*n).to_string(),
                coarse,
                fine,
            })
            .collect(),
    };
    match name {
        "default" => Ok(default),
        "tuned" => Ok(apply_heuristic1(&default)),
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

pub fn apply_heuristic1(table: &BiasTable) -> BiasTable {
    let mut out = table.clone();
    for e in out.entries.iter_mut() {
        if HEURISTIC1_PARAMS.contains(&e.name.as_str()) {
            (e.coarse, e.fine) = HEURISTIC1_VALUE;
        }
    }
    out
}

/// `NAME,coarse,fine` per line, table order.
pub fn write_bias_file(table: &BiasTable) -> String {
    let mut out = String::new();
    for e in &table.entries {
        let _ = writeln!(out, "{},{},{}", e.name, e.coarse, e.fine);
    }
    out
}

pub fn parse_bias_file(text: &str) -> Result<BiasTable> {
    let mut entries: Vec<BiasEntry> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(lineno, "expected `NAME,coarse,fine`"));
        }
        let name = fields[0];
        if !BIAS_NAMES.contains(&name) {
            return Err(Error::parse(lineno, format!("unknown bias `{name}`")));
        }
        if entries.iter().any(|e| e.name == name) {
            return Err(Error::parse(lineno, format!("duplicate bias `{name}`")));
        }
        let coarse: u8 = fields[1]
            .parse()
            .ok()
            .filter(|c| *c <= 7)
            .ok_or_else(|| Error::parse(lineno, format!("coarse `{}` outside 0..=7", fields[1])))?;
        let fine: u8 = fields[2]
            .parse()
            .map_err(|_| Error::parse(lineno, format!("fine `{}` outside 0..=255", fields[2])))?;
        entries.push(BiasEntry {
            name: name.to_string(),
            coarse,
            fine,
        });
    }
    Ok(BiasTable { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_spot_checks() {
        let d = bias_preset("default").unwrap();
        let t = bias_preset("tuned").unwrap();
        assert_eq!(d.get("NPDPIE_TAU_F_P"), Some((4, 36)));
        assert_eq!(t.get("NPDPIE_TAU_F_P"), Some((7, 0)));
        assert_eq!(d.diff(&t).len(), 4);
        assert!(bias_preset("fancy").is_err());
    }

    #[test]
    fn file_round_trip_and_errors() {
        let d = bias_preset("default").unwrap();
        let text = write_bias_file(&d);
        assert_eq!(parse_bias_file(&text).unwrap(), d);
        assert!(parse_bias_file("IF_DC_P,8,0\n").is_err());
        assert!(parse_bias_file("IF_DC_P,1,256\n").is_err());
        assert!(parse_bias_file("NOPE,1,1\n").is_err());
    }

    #[test]
    fn set_validates() {
        let mut d = bias_preset("default").unwrap();
        assert!(d.set("IF_DC_P", 8, 0).is_err());
        assert!(d.set("NOPE", 1, 0).is_err());
        d.set("IF_DC_P", 1, 2).unwrap();
        assert_eq!(d.get("IF_DC_P"), Some((1, 2)));
    }
}
