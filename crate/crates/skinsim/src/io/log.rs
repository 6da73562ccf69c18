//! Chronologically merged JSON-lines sample log.

use serde::{Deserialize, Serialize};
use skinsim_core::sc::ScSample;
use skinsim_core::simulate::Record;
use skinsim_core::tof::TofFrame;

use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Sc { site_id: u32, t: f64, counts: u64 },
    Tof { sensor_id: u32, t: f64, d: Vec<Option<f64>>, valid: Vec<bool> },
}

pub fn write_log(records: &[Record]) -> String {
    let mut out = String::new();
    for r in records {
        let line = match r {
            Record::Sc(s) => Line::Sc { site_id: s.site_id, t: s.timestamp, counts: s.counts },
            Record::Tof(f) => Line::Tof { sensor_id: f.sensor_id, t: f.timestamp, d: f.distances.clone(), valid: f.valid().collect() },
        };
        out.push_str(&serde_json::to_string(&line).expect("plain data"));
        out.push('\n');
    }
    out
}

pub fn parse_log(text: &str) -> Result<Vec<Record>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            let line: Line = serde_json::from_str(l).map_err(|e| Error::format(format!("log line {}: {e}", k + 1)))?;
            Ok(match line {
                Line::Sc { site_id, t, counts } => Record::Sc(ScSample { site_id, timestamp: t, counts }),
                Line::Tof { sensor_id, t, d, valid } => {
                    if d.len() != valid.len() {
                        return Err(Error::format(format!("log line {}: d and valid differ in length", k + 1)));
                    }
                    let distances = d.into_iter().zip(valid).map(|(d, v)| d.filter(|_| v)).collect();
                    Record::Tof(TofFrame { sensor_id, timestamp: t, distances })
                }
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_round_trip() {
        let recs = vec![
            Record::Sc(ScSample { site_id: 2, timestamp: 0.0, counts: 1601 }),
            Record::Tof(TofFrame { sensor_id: 2, timestamp: 0.0, distances: vec![Some(1.25), None] }),
        ];
        let text = write_log(&recs);
        assert!(text.starts_with(r#"{"type":"sc","site_id":2,"t":0.0,"counts":1601}"#));
        assert!(text.contains(r#""d":[1.25,null],"valid":[true,false]"#));
        assert_eq!(parse_log(&text).unwrap(), recs);
        assert!(parse_log("{\"type\":\"x\"}").is_err());
    }

    #[test]
    fn timestamps_parse_back_bit_exact() {
        let mut t = 0.0f64;
        let recs: Vec<Record> = (0..2000)
            .map(|k| {
                t += 1.0 / (42.0 + (k % 7) as f64 * 0.31);
                Record::Sc(ScSample { site_id: 0, timestamp: t, counts: k })
            })
            .collect();
        assert_eq!(parse_log(&write_log(&recs)).unwrap(), recs);
    }
}
