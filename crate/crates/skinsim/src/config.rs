//! TOML run configuration with dotted `key=value` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use skinsim_core::analysis::{Covering, EvaluationOptions, TABLE1};
use skinsim_core::layout::SkinParams;
use skinsim_core::protocol::CalibrationInput;
use skinsim_core::sc::{ElectrodeModel, MeasurementSpec};
use skinsim_core::simulate::PressEvent;
use skinsim_core::tof::TofSpec;
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::io::mesh::Units;
use crate::io::ply::PlyFormat;

/// Prefix for shell meshes built in rather than read from disk.
pub const BUILTIN: &str = "builtin:";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub seed: u64,
    pub output: PathBuf,
    pub generate: GenerateConfig,
    pub tof: TofSpec,
    pub measurement: MeasurementSpec,
    /// Fixed electrode; when absent the electrode and noise come from the
    /// calibration section.
    pub electrode: Option<ElectrodeParams>,
    pub calibration: CalibrationConfig,
    pub simulate: SimulateConfig,
    pub reconstruct: ReconstructConfig,
    pub analysis: AnalysisConfig,
    pub snr: SnrConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output: PathBuf::from("out"),
            generate: GenerateConfig::default(),
            tof: TofSpec::default(),
            measurement: MeasurementSpec::default(),
            electrode: None,
            calibration: CalibrationConfig::default(),
            simulate: SimulateConfig::default(),
            reconstruct: ReconstructConfig::default(),
            analysis: AnalysisConfig::default(),
            snr: SnrConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    /// Mesh path (STL/OBJ) or `builtin:cube` / `builtin:arm_links`.
    pub input: String,
    pub units: Units,
    pub skin: SkinParams,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self { input: format!("{BUILTIN}cube"), units: Units::M, skin: SkinParams::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElectrodeParams {
    pub base_capacitance: f64,
    pub coupling: f64,
    pub standoff: f64,
    pub covering_thickness: f64,
    pub max_compression: f64,
}

impl ElectrodeParams {
    pub fn model(&self, site_id: u32) -> ElectrodeModel {
        ElectrodeModel {
            site_id,
            base_capacitance: self.base_capacitance,
            coupling: self.coupling,
            standoff: self.standoff,
            covering_thickness: self.covering_thickness,
            compression: 0.0,
            max_compression: self.max_compression,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub targets: [[f64; 3]; 2],
    pub signal_delta: f64,
    pub base_capacitance: f64,
    pub standoff: f64,
    /// Monte-Carlo check run by `calibrate --verify`.
    pub verify_seeds: u64,
    pub rings: u32,
    pub samples: usize,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        let d = CalibrationInput::default();
        Self {
            targets: TABLE1,
            signal_delta: d.signal_delta,
            base_capacitance: d.base_capacitance,
            standoff: d.standoff,
            verify_seeds: 20,
            rings: 3,
            samples: 1000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulateConfig {
    pub manifest: Option<PathBuf>,
    pub chain: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub scene: Option<PathBuf>,
    pub duration: f64,
    pub tof_enabled: bool,
    /// Covering state of every ring when the electrode is calibrated.
    pub covering: Covering,
    /// Sites with an imager; all manifest sites when absent.
    pub tof_sites: Option<Vec<u32>>,
    /// Sites with an SC ring; all manifest sites when absent.
    pub sc_sites: Option<Vec<u32>>,
    pub presses: Vec<PressEvent>,
}

impl Default for SimulateConfig {
    fn default() -> Self {
        Self {
            manifest: None,
            chain: None,
            trajectory: None,
            scene: None,
            duration: 1.0,
            tof_enabled: true,
            covering: Covering::Rest,
            tof_sites: None,
            sc_sites: None,
            presses: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ReconstructConfig {
    pub log: Option<PathBuf>,
    pub chain: Option<PathBuf>,
    pub trajectory: Option<PathBuf>,
    pub manifest: Option<PathBuf>,
    pub format: PlyFormat,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub threshold: f64,
    pub min_samples: usize,
    pub min_rings: usize,
    /// Confidence for the squeeze-above-rest test.
    pub confidence: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        let d = EvaluationOptions::default();
        Self { threshold: d.threshold, min_samples: d.min_samples, min_rings: d.min_rings, confidence: 0.99 }
    }
}

impl AnalysisConfig {
    pub fn options(&self) -> EvaluationOptions {
        EvaluationOptions { threshold: self.threshold, min_samples: self.min_samples, min_rings: self.min_rings }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SnrConfig {
    /// Log per configuration, keyed by labels such as `with_tof:rest`.
    pub logs: BTreeMap<String, PathBuf>,
    pub labels: Option<PathBuf>,
}

impl RunConfig {
    pub fn calibration_input(&self) -> CalibrationInput {
        let c = &self.calibration;
        CalibrationInput {
            targets: c.targets,
            signal_delta: c.signal_delta,
            base_capacitance: c.base_capacitance,
            standoff: c.standoff,
            measurement: self.measurement,
        }
    }

    /// Defaults, then the file at `path`, then `overrides` in order.
    /// Relative paths resolve against the file's directory, or `cwd`.
    pub fn load(path: Option<&Path>, overrides: &[String], cwd: &Path) -> Result<Self> {
        let mut value = Value::try_from(RunConfig::default()).map_err(|e| Error::validation(format!("config: {e}")))?;
        let base = match path {
            Some(p) => {
                let text = crate::io::read_text(p)?;
                let file: Table = text.parse().map_err(|e| Error::format(format!("{}: {e}", p.display())))?;
                merge(&mut value, Value::Table(file));
                match p.parent().filter(|d| !d.as_os_str().is_empty()) {
                    Some(d) => cwd.join(d),
                    None => cwd.to_path_buf(),
                }
            }
            None => cwd.to_path_buf(),
        };
        for o in overrides {
            apply_override(&mut value, o)?;
        }
        let mut cfg: RunConfig = value.clone().try_into().map_err(|e| Error::validation(format!("config: {e}")))?;
        let round = Value::try_from(&cfg).map_err(|e| Error::validation(format!("config: {e}")))?;
        if let Some(key) = unknown_key(&value, &round, "") {
            return Err(Error::validation(format!("config: unknown key '{key}'")));
        }
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let fix_opt = |p: &mut Option<PathBuf>| {
            if let Some(p) = p {
                fix(p)
            }
        };
        if !self.generate.input.starts_with(BUILTIN) {
            let p = Path::new(&self.generate.input);
            if p.is_relative() {
                self.generate.input = base.join(p).to_string_lossy().into_owned();
            }
        }
        fix(&mut self.output);
        let s = &mut self.simulate;
        [&mut s.manifest, &mut s.chain, &mut s.trajectory, &mut s.scene].into_iter().for_each(fix_opt);
        let r = &mut self.reconstruct;
        [&mut r.log, &mut r.chain, &mut r.trajectory, &mut r.manifest].into_iter().for_each(fix_opt);
        self.snr.logs.values_mut().for_each(fix);
        fix_opt(&mut self.snr.labels);
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::validation(format!("config: {e}")))
    }
}

fn merge(base: &mut Value, over: Value) {
    match (base, over) {
        (Value::Table(b), Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// `a.b.c=value`; the value is read as TOML and falls back to a bare string.
pub fn apply_override(root: &mut Value, spec: &str) -> Result<()> {
    let (key, raw) = spec.split_once('=').ok_or_else(|| Error::validation(format!("--set '{spec}': expected key=value")))?;
    let parts: Vec<&str> = key.trim().split('.').collect();
    if parts.iter().any(|p| p.is_empty()) {
        return Err(Error::validation(format!("--set '{spec}': empty key segment")));
    }
    let value = format!("v = {}", raw.trim())
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.trim().to_string()));
    let mut node = root;
    for p in &parts[..parts.len() - 1] {
        let Value::Table(t) = node else {
            return Err(Error::validation(format!("--set '{spec}': '{p}' is not a table")));
        };
        node = t.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
    }
    let Value::Table(t) = node else {
        return Err(Error::validation(format!("--set '{spec}': parent is not a table")));
    };
    t.insert(parts[parts.len() - 1].to_string(), value);
    Ok(())
}

fn unknown_key(given: &Value, known: &Value, prefix: &str) -> Option<String> {
    let (Value::Table(g), Value::Table(k)) = (given, known) else {
        return None;
    };
    for (key, v) in g {
        let path = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
        match k.get(key) {
            None => return Some(path),
            // map-valued sections accept any key
            Some(kv) if path != "snr.logs" => {
                if let Some(bad) = unknown_key(v, kv, &path) {
                    return Some(bad);
                }
            }
            Some(_) => {}
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = RunConfig::default();
        let text = cfg.to_toml().unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn file_then_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(&path, "seed = 4\n[simulate]\nduration = 2.5\nscene = \"scene.json\"\n[tof]\ncols = 4\n").unwrap();
        let sets = ["seed=9".to_string(), "tof.rows=2".to_string(), "generate.input=builtin:arm_links".to_string()];
        let cfg = RunConfig::load(Some(&path), &sets, Path::new("/elsewhere")).unwrap();
        assert_eq!(cfg.seed, 9);
        assert_eq!((cfg.tof.cols, cfg.tof.rows), (4, 2));
        assert_eq!(cfg.simulate.duration, 2.5);
        assert_eq!(cfg.simulate.scene.unwrap(), dir.path().join("scene.json"));
        assert_eq!(cfg.generate.input, "builtin:arm_links");
        assert_eq!(cfg.tof.fov_x_deg, 45.0);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        let cwd = Path::new("/");
        assert!(RunConfig::load(None, &["simulate.durration=1".into()], cwd).is_err());
        assert!(RunConfig::load(None, &["tof.colz=1".into()], cwd).is_err());
        assert!(RunConfig::load(None, &["seed=abc".into()], cwd).is_err());
        assert!(RunConfig::load(None, &["seed".into()], cwd).is_err());
        let cfg = RunConfig::load(None, &["snr.logs.no_tof:rest=a.jsonl".into()], cwd).unwrap();
        assert_eq!(cfg.snr.logs["no_tof:rest"], Path::new("/a.jsonl"));
    }
}
