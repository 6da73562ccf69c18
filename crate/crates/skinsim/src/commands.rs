//! Subcommand bodies. Each reads its inputs from a resolved [`RunConfig`] and
//! writes artifacts under `config.output`, returning the paths written.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use skinsim_core::analysis::stats::{mean, sample_std};
use skinsim_core::analysis::{evaluate_configurations, table1, Cell, ConfigurationTable, RingLog};
use skinsim_core::fixtures;
use skinsim_core::geometry::{primitives, validate_mesh, Material, TriMesh};
use skinsim_core::kinematics::Scene;
use skinsim_core::math::Vec3;
use skinsim_core::protocol::{calibrate, cell_log, predicted_error, ring_logs, simulate_cell, Calibration};
use skinsim_core::simulate::{split_records, Record, Simulation};

use crate::config::{RunConfig, BUILTIN};
use crate::error::{Error, Result};
use crate::io::formats::{ChainFile, Manifest, ManifestFiles, SceneFile};
use crate::io::log::{parse_log, write_log};
use crate::io::mesh::{obj_string, read_mesh, stl_binary};
use crate::io::ply::write_ply;
use crate::io::tables::{labels_csv, parse_labels, parse_trajectory, snr_csv, table_summary};
use crate::io::{read_json, read_text, write_file};

fn required<'a>(p: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    p.as_deref().ok_or_else(|| Error::validation(format!("missing input: set {key}")))
}

fn load_shell(cfg: &RunConfig) -> Result<TriMesh> {
    let input = &cfg.generate.input;
    match input.strip_prefix(BUILTIN) {
        Some("cube") => Ok(primitives::box_mesh(Vec3::repeat(0.1), Material::Structural)),
        Some("arm_links") => Ok(fixtures::arm_links()),
        Some(other) => Err(Error::validation(format!("unknown builtin mesh '{other}'"))),
        None => read_mesh(Path::new(input), cfg.generate.units),
    }
}

/// Per-material STL, a combined OBJ and `manifest.json`. An invalid input
/// mesh writes `validation.json` and fails.
pub fn generate(cfg: &RunConfig, strict: bool) -> Result<Vec<PathBuf>> {
    let out = &cfg.output;
    let shell = load_shell(cfg)?;
    let report = validate_mesh(&shell);
    if !report.is_valid() {
        let details = serde_json::to_value(&report).map_err(|e| Error::validation(e.to_string()))?;
        write_file(&out.join("validation.json"), format!("{details:#}\n"))?;
        return Err(Error::validation("input mesh failed validation").with_details(details));
    }
    let skin = skinsim_core::layout::generate_skin(&shell, &cfg.generate.skin, cfg.seed, strict)?;
    let a = &skin.assembly;
    let files = ManifestFiles {
        structural: "skin_structural.stl".into(),
        conductive: "skin_conductive.stl".into(),
        flexible: "skin_flexible.stl".into(),
        obj: "skin.obj".into(),
    };
    let meshes = a.material_meshes();
    let mut written = Vec::new();
    for ((_, mesh), name) in meshes.iter().zip([&files.structural, &files.conductive, &files.flexible]) {
        let p = out.join(name);
        write_file(&p, stl_binary(mesh))?;
        written.push(p);
    }
    let p = out.join(&files.obj);
    write_file(&p, obj_string(&TriMesh::merge(meshes.iter().map(|(_, m)| m))))?;
    written.push(p);
    let manifest = Manifest {
        seed: cfg.seed,
        sites: a.sites.clone(),
        ring: a.ring_spec,
        mount: a.mount_spec,
        support_count: a.supports.len(),
        files,
        warnings: skin.warnings,
    };
    let p = out.join("manifest.json");
    write_file(&p, json_pretty(&manifest)?)?;
    written.push(p);
    Ok(written)
}

fn json_pretty<T: serde::Serialize>(v: &T) -> Result<String> {
    serde_json::to_string_pretty(v).map(|s| s + "\n").map_err(|e| Error::validation(e.to_string()))
}

/// Merged SC + ToF log `log.jsonl`.
pub fn simulate(cfg: &RunConfig, strict: bool) -> Result<Vec<PathBuf>> {
    let s = &cfg.simulate;
    let manifest: Manifest = read_json(required(&s.manifest, "simulate.manifest")?)?;
    let chain_file: ChainFile = read_json(required(&s.chain, "simulate.chain")?)?;
    let chain = chain_file.build(&manifest.sites)?;
    let trajectory = parse_trajectory(&read_text(required(&s.trajectory, "simulate.trajectory")?)?)?;
    let scene = match &s.scene {
        Some(p) => read_json::<SceneFile>(p)?.build(p.parent().unwrap_or(Path::new(".")))?,
        None => Scene::default(),
    };
    let all: Vec<u32> = manifest.sites.iter().map(|x| x.site_id).collect();
    let sc_sites = s.sc_sites.clone().unwrap_or_else(|| all.clone());
    let tof_sensors = s.tof_sites.clone().unwrap_or(all);
    let (measurement, electrodes) = match &cfg.electrode {
        Some(e) => (cfg.measurement, sc_sites.iter().map(|&id| e.model(id)).collect()),
        None => {
            let cal = calibrate(&cfg.calibration_input(), strict)?;
            (cal.measurement, sc_sites.iter().map(|&id| cal.electrode_for(s.covering, id)).collect())
        }
    };
    let sim = Simulation {
        chain,
        trajectory,
        scene,
        electrodes,
        tof_sensors,
        tof: cfg.tof,
        measurement,
        tof_enabled: s.tof_enabled,
        presses: s.presses.clone(),
        duration: s.duration,
        seed: cfg.seed,
    };
    let records = sim.run()?;
    let p = cfg.output.join("log.jsonl");
    write_file(&p, write_log(&records))?;
    Ok(vec![p])
}

/// World-frame point cloud `cloud.ply` from the ToF frames of a log.
pub fn reconstruct(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let r = &cfg.reconstruct;
    let records = parse_log(&read_text(required(&r.log, "reconstruct.log")?)?)?;
    let (_, frames) = split_records(&records);
    let sites = match &r.manifest {
        Some(p) => read_json::<Manifest>(p)?.sites,
        None => Vec::new(),
    };
    let chain = read_json::<ChainFile>(required(&r.chain, "reconstruct.chain")?)?.build(&sites)?;
    let trajectory = parse_trajectory(&read_text(required(&r.trajectory, "reconstruct.trajectory")?)?)?;
    let cloud = skinsim_core::analysis::reconstruct(&frames, &chain, &trajectory, &cfg.tof)?;
    let p = cfg.output.join("cloud.ply");
    write_file(&p, write_ply(&cloud, r.format))?;
    Ok(vec![p])
}

/// Per-ring `snr.csv` and the summary `table1.txt`. Configurations or
/// rings that cannot be evaluated are listed as omitted rather than failing
/// the run.
pub fn snr(cfg: &RunConfig) -> Result<(Vec<PathBuf>, ConfigurationTable)> {
    let labels = parse_labels(&read_text(required(&cfg.snr.labels, "snr.labels")?)?)?;
    if cfg.snr.logs.is_empty() {
        return Err(Error::validation("no logs given: pass --log CONFIG=PATH"));
    }
    let opts = cfg.analysis.options();
    let mut omitted = Vec::new();
    let mut inputs: Vec<(Cell, Vec<RingLog>)> = Vec::new();
    for (key, path) in &cfg.snr.logs {
        let cell = Cell::parse(key).ok_or_else(|| Error::validation(format!("unknown configuration '{key}'")))?;
        let (samples, _) = split_records(&parse_log(&read_text(path)?)?);
        let Some(cell_labels) = labels.get(&Some(cell)).or_else(|| labels.get(&None)) else {
            omitted.push(format!("{key}: no labels"));
            continue;
        };
        let sites: BTreeSet<u32> = samples.iter().map(|s| s.site_id).collect();
        for id in &sites {
            if !cell_labels.iter().any(|l| l.site_id == *id) {
                omitted.push(format!("{key}: site {id} has no labels"));
            }
        }
        let mut usable = Vec::new();
        for ring in ring_logs(&samples, cell_labels) {
            let got = ring.inactive.len().min(ring.active.len());
            if !sites.contains(&ring.site_id) {
                omitted.push(format!("{key}: site {} is labeled but absent from the log", ring.site_id));
            } else if got < opts.min_samples {
                omitted.push(format!("{key}: site {} has {got} labeled samples per phase, need {}", ring.site_id, opts.min_samples));
            } else {
                usable.push(ring);
            }
        }
        if usable.len() < opts.min_rings {
            omitted.push(format!("{key}: {} usable rings, need {}", usable.len(), opts.min_rings));
            continue;
        }
        inputs.push((cell, usable));
    }
    for cell in Cell::ALL {
        if !cfg.snr.logs.contains_key(&cell.label()) {
            omitted.push(format!("{}: no log", cell.label()));
        }
    }
    let table = evaluate_configurations(&inputs, &opts)?;
    let rows: Vec<_> = table.cells.iter().flat_map(|c| c.rings.iter().map(move |r| (c.cell, *r))).collect();
    let csv_path = cfg.output.join("snr.csv");
    write_file(&csv_path, snr_csv(&rows))?;
    let txt_path = cfg.output.join("table1.txt");
    write_file(&txt_path, table_summary(&table, &omitted))?;
    Ok((vec![csv_path, txt_path], table))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CalibrateOptions {
    pub verify: bool,
    pub emit_logs: bool,
}

/// Result of replaying every configuration over several seeds.
#[derive(Clone, Debug)]
pub struct Verification {
    /// Mean and std of the cell SNR across seeds, canonical cell order.
    pub cells: Vec<(Cell, f64, f64)>,
    pub orderings_held: u64,
    pub seeds: u64,
}

impl Verification {
    pub fn worst_relative_error(&self) -> f64 {
        self.cells.iter().map(|(c, m, _)| ((m - table1(*c)) / table1(*c)).abs()).fold(0.0, f64::max)
    }
}

pub fn verify_calibration(cal: &Calibration, cfg: &RunConfig) -> Result<Verification> {
    let c = &cfg.calibration;
    let mut per_cell = vec![Vec::new(); Cell::ALL.len()];
    let mut held = 0;
    for k in 0..c.verify_seeds {
        let seed = cfg.seed.wrapping_add(k);
        let logs: Vec<_> = Cell::ALL.iter().map(|&cell| (cell, simulate_cell(cal, cell, c.rings, c.samples, seed))).collect();
        let table = evaluate_configurations(&logs, &cfg.analysis.options())?;
        held += u64::from(table.checks.all_hold());
        for r in &table.cells {
            per_cell[r.cell.index()].push(r.snr);
        }
    }
    let cells = Cell::ALL
        .iter()
        .zip(&per_cell)
        .map(|(&cell, v)| (cell, mean(v), if v.len() > 1 { sample_std(v) } else { 0.0 }))
        .collect();
    Ok(Verification { cells, orderings_held: held, seeds: c.verify_seeds })
}

fn verification_csv(cal: &Calibration, v: &Verification) -> String {
    let mut out = String::from("config,target,predicted,mean_snr,std_snr,relative_error\n");
    for (cell, m, s) in &v.cells {
        let target = table1(*cell);
        let _ = writeln!(out, "{},{target},{},{m},{s},{}", cell.label(), cal.predicted(*cell), (m - target) / target);
    }
    out
}

/// `calibration.json`; with options, a multi-seed verification table and
/// the six protocol logs with their labels.
pub fn calibrate_cmd(cfg: &RunConfig, strict: bool, opts: CalibrateOptions) -> Result<(Vec<PathBuf>, Option<Verification>)> {
    let out = &cfg.output;
    let cal = calibrate(&cfg.calibration_input(), strict)?;
    let mut written = Vec::new();
    let doc = serde_json::json!({ "calibration": cal, "max_predicted_error": predicted_error(&cal) });
    let p = out.join("calibration.json");
    write_file(&p, json_pretty(&doc)?)?;
    written.push(p);
    let mut verification = None;
    if opts.verify {
        let v = verify_calibration(&cal, cfg)?;
        let p = out.join("verification.csv");
        write_file(&p, verification_csv(&cal, &v))?;
        written.push(p);
        verification = Some(v);
    }
    if opts.emit_logs {
        let c = &cfg.calibration;
        let mut label_sets = Vec::new();
        for cell in Cell::ALL {
            let (samples, labels) = cell_log(&cal, cell, c.rings, c.samples, cfg.seed);
            let records: Vec<Record> = samples.into_iter().map(Record::Sc).collect();
            let p = out.join("logs").join(format!("{}.jsonl", cell.label().replace(':', "_")));
            write_file(&p, write_log(&records))?;
            written.push(p);
            label_sets.push((cell, labels));
        }
        let rows: Vec<_> = label_sets.iter().flat_map(|(c, ls)| ls.iter().map(move |l| (Some(*c), l))).collect();
        let p = out.join("logs").join("labels.csv");
        write_file(&p, labels_csv(&rows))?;
        written.push(p);
    }
    Ok((written, verification))
}
