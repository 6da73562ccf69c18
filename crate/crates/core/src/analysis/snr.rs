//! Contact SNR, per-configuration aggregation, and pressure response.

use alloc::vec::Vec;

use super::stats::{mean, sample_std, welch_greater, WelchTest};
use super::AnalysisError;
use crate::sc::ScSample;

pub const DEFAULT_CONTACT_THRESHOLD: f64 = 7.0;
pub const DEFAULT_MIN_SAMPLES: usize = 1000;
pub const DEFAULT_MIN_RINGS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SnrReport {
    pub site_id: u32,
    pub mu_n: f64,
    pub sigma_n: f64,
    pub mu: f64,
    pub snr: f64,
    pub contact: bool,
}

/// `|μn − μ| / σn` with the unbiased inactive standard deviation.
pub fn snr(inactive: &[f64], active: &[f64], threshold: f64) -> Result<SnrReport, AnalysisError> {
    if inactive.len() < 2 {
        return Err(AnalysisError::InsufficientSamples { needed: 2, got: inactive.len() });
    }
    if active.is_empty() {
        return Err(AnalysisError::InsufficientSamples { needed: 1, got: 0 });
    }
    let mu_n = mean(inactive);
    let sigma_n = sample_std(inactive);
    if !(sigma_n > 0.0) {
        return Err(AnalysisError::DegenerateSignal);
    }
    let mu = mean(active);
    let value = (mu_n - mu).abs() / sigma_n;
    Ok(SnrReport { site_id: 0, mu_n, sigma_n, mu, snr: value, contact: value >= threshold })
}

pub fn snr_counts(site_id: u32, inactive: &[u64], active: &[u64], threshold: f64) -> Result<SnrReport, AnalysisError> {
    let a: Vec<f64> = inactive.iter().map(|&c| c as f64).collect();
    let b: Vec<f64> = active.iter().map(|&c| c as f64).collect();
    Ok(SnrReport { site_id, ..snr(&a, &b, threshold)? })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum TofMode {
    WithTof,
    NoTof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Covering {
    None,
    Rest,
    Squeeze,
}

/// One of the six measurement configurations: ToF on/off × covering state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Cell {
    pub tof: TofMode,
    pub covering: Covering,
}

impl TofMode {
    pub const ALL: [TofMode; 2] = [TofMode::WithTof, TofMode::NoTof];

    pub fn name(self) -> &'static str {
        match self {
            TofMode::WithTof => "with_tof",
            TofMode::NoTof => "no_tof",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.name() == s)
    }

    pub fn active(self) -> bool {
        self == TofMode::WithTof
    }
}

impl Covering {
    pub const ALL: [Covering; 3] = [Covering::None, Covering::Rest, Covering::Squeeze];

    pub fn name(self) -> &'static str {
        match self {
            Covering::None => "none",
            Covering::Rest => "rest",
            Covering::Squeeze => "squeeze",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

impl Cell {
    pub const ALL: [Cell; 6] = [
        Cell { tof: TofMode::WithTof, covering: Covering::None },
        Cell { tof: TofMode::WithTof, covering: Covering::Rest },
        Cell { tof: TofMode::WithTof, covering: Covering::Squeeze },
        Cell { tof: TofMode::NoTof, covering: Covering::None },
        Cell { tof: TofMode::NoTof, covering: Covering::Rest },
        Cell { tof: TofMode::NoTof, covering: Covering::Squeeze },
    ];

    pub fn new(tof: TofMode, covering: Covering) -> Self {
        Self { tof, covering }
    }

    /// `"with_tof:rest"` style label.
    pub fn label(&self) -> alloc::string::String {
        alloc::format!("{}:{}", self.tof.name(), self.covering.name())
    }

    pub fn parse(s: &str) -> Option<Self> {
        let (t, c) = s.split_once(':')?;
        Some(Self { tof: TofMode::from_name(t)?, covering: Covering::from_name(c)? })
    }

    pub fn index(&self) -> usize {
        (self.tof as usize) * 3 + self.covering as usize
    }
}

/// Published average contact SNRs, rows with/without ToF, columns no
/// covering / covering at rest / covering squeezed.
pub const TABLE1: [[f64; 3]; 2] = [[50.0, 13.0, 22.0], [120.0, 37.0, 45.0]];

pub fn table1(cell: Cell) -> f64 {
    TABLE1[cell.tof as usize][cell.covering as usize]
}

/// Samples of one ring in one configuration.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct RingLog {
    pub site_id: u32,
    pub inactive: Vec<f64>,
    pub active: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvaluationOptions {
    pub threshold: f64,
    pub min_samples: usize,
    pub min_rings: usize,
}

impl Default for EvaluationOptions {
    fn default() -> Self {
        Self { threshold: DEFAULT_CONTACT_THRESHOLD, min_samples: DEFAULT_MIN_SAMPLES, min_rings: DEFAULT_MIN_RINGS }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CellReport {
    pub cell: Cell,
    pub rings: Vec<SnrReport>,
    /// Mean SNR over rings.
    pub snr: f64,
    /// Standard deviation of the SNR over rings.
    pub snr_spread: f64,
    pub contact: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OrderingChecks {
    /// Per covering column: no-ToF SNR above with-ToF SNR (`None` if a cell is missing).
    pub tof_degrades: [Option<bool>; 3],
    /// Per ToF row: squeeze SNR above rest SNR.
    pub squeeze_exceeds_rest: [Option<bool>; 2],
    pub all_above_threshold: bool,
}

impl OrderingChecks {
    pub fn all_hold(&self) -> bool {
        self.tof_degrades.iter().chain(self.squeeze_exceeds_rest.iter()).all(|c| *c == Some(true)) && self.all_above_threshold
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ConfigurationTable {
    pub cells: Vec<CellReport>,
    pub checks: OrderingChecks,
}

impl ConfigurationTable {
    pub fn get(&self, cell: Cell) -> Option<&CellReport> {
        self.cells.iter().find(|c| c.cell == cell)
    }

    /// Largest relative deviation from the published table over present cells.
    pub fn worst_relative_error(&self) -> f64 {
        self.cells.iter().map(|c| (c.snr - table1(c.cell)).abs() / table1(c.cell)).fold(0.0, f64::max)
    }
}

/// Per-cell SNR averaged over rings, plus the published ordering checks.
/// Cells are reported in canonical order.
pub fn evaluate_configurations(logs: &[(Cell, Vec<RingLog>)], opts: &EvaluationOptions) -> Result<ConfigurationTable, AnalysisError> {
    let mut cells: Vec<CellReport> = Vec::new();
    for (cell, rings) in logs {
        if rings.len() < opts.min_rings {
            return Err(AnalysisError::InsufficientRings { cell: *cell, needed: opts.min_rings, got: rings.len() });
        }
        if cells.iter().any(|c| c.cell == *cell) {
            return Err(AnalysisError::DuplicateCell(*cell));
        }
        let mut reports = Vec::with_capacity(rings.len());
        for r in rings {
            let got = r.inactive.len().min(r.active.len());
            if got < opts.min_samples {
                return Err(AnalysisError::InsufficientSamples { needed: opts.min_samples, got });
            }
            reports.push(SnrReport { site_id: r.site_id, ..snr(&r.inactive, &r.active, opts.threshold)? });
        }
        let values: Vec<f64> = reports.iter().map(|r| r.snr).collect();
        let m = mean(&values);
        let spread = if values.len() > 1 { sample_std(&values) } else { 0.0 };
        cells.push(CellReport { cell: *cell, rings: reports, snr: m, snr_spread: spread, contact: m >= opts.threshold });
    }
    cells.sort_by_key(|c| c.cell.index());
    let get = |cell: Cell| cells.iter().find(|c| c.cell == cell).map(|c| c.snr);
    let cmp = |a: Option<f64>, b: Option<f64>| Some(a? > b?);
    let mut tof_degrades = [None; 3];
    for (k, cov) in Covering::ALL.into_iter().enumerate() {
        tof_degrades[k] = cmp(get(Cell::new(TofMode::NoTof, cov)), get(Cell::new(TofMode::WithTof, cov)));
    }
    let mut squeeze_exceeds_rest = [None; 2];
    for (k, tof) in TofMode::ALL.into_iter().enumerate() {
        squeeze_exceeds_rest[k] = cmp(get(Cell::new(tof, Covering::Squeeze)), get(Cell::new(tof, Covering::Rest)));
    }
    let all_above_threshold = !cells.is_empty() && cells.iter().all(|c| c.snr >= opts.threshold);
    Ok(ConfigurationTable { checks: OrderingChecks { tof_degrades, squeeze_exceeds_rest, all_above_threshold }, cells })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Activity {
    Inactive,
    ActiveRest,
    ActiveSqueeze,
}

impl Activity {
    pub fn name(self) -> &'static str {
        match self {
            Activity::Inactive => "inactive",
            Activity::ActiveRest => "active_rest",
            Activity::ActiveSqueeze => "active_squeeze",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Activity::Inactive, Activity::ActiveRest, Activity::ActiveSqueeze].into_iter().find(|a| a.name() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Interval {
    pub start: f64,
    pub end: f64,
    pub state: Activity,
}

/// Half-open `[start, end)` intervals, sorted and non-overlapping.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ActivityLabel {
    pub site_id: u32,
    intervals: Vec<Interval>,
}

impl ActivityLabel {
    pub fn new(site_id: u32, intervals: Vec<Interval>) -> Result<Self, AnalysisError> {
        if intervals.iter().any(|i| !(i.end > i.start)) {
            return Err(AnalysisError::InvalidLabels("interval end must follow its start"));
        }
        if intervals.windows(2).any(|w| w[1].start < w[0].end) {
            return Err(AnalysisError::InvalidLabels("intervals must be increasing and non-overlapping"));
        }
        Ok(Self { site_id, intervals })
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn state_at(&self, t: f64) -> Option<Activity> {
        let k = self.intervals.partition_point(|i| i.end <= t);
        self.intervals.get(k).filter(|i| i.start <= t).map(|i| i.state)
    }
}

/// Samples of one site split by labeled state.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LabeledCounts {
    pub inactive: Vec<f64>,
    pub rest: Vec<f64>,
    pub squeeze: Vec<f64>,
    pub unlabeled: usize,
}

impl LabeledCounts {
    pub fn active(&self) -> Vec<f64> {
        self.rest.iter().chain(self.squeeze.iter()).copied().collect()
    }
}

pub fn split_by_label(samples: &[ScSample], label: &ActivityLabel) -> LabeledCounts {
    let mut out = LabeledCounts::default();
    for s in samples.iter().filter(|s| s.site_id == label.site_id) {
        let c = s.counts as f64;
        match label.state_at(s.timestamp) {
            Some(Activity::Inactive) => out.inactive.push(c),
            Some(Activity::ActiveRest) => out.rest.push(c),
            Some(Activity::ActiveSqueeze) => out.squeeze.push(c),
            None => out.unlabeled += 1,
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum PressureVerdict {
    /// squeeze > rest > inactive at the requested confidence
    Monotone,
    NotMonotone,
    /// no contact in the labeled window
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PressureReport {
    pub site_id: u32,
    pub inactive_mean: Option<f64>,
    pub rest_mean: Option<f64>,
    pub squeeze_mean: Option<f64>,
    pub rest_vs_inactive: Option<WelchTest>,
    pub squeeze_vs_rest: Option<WelchTest>,
    pub confidence: f64,
    pub verdict: PressureVerdict,
}

/// Tests the ordering squeeze > rest > inactive with one-sided Welch tests.
/// States absent from the labels are skipped; a label set with no active
/// state is not applicable.
pub fn pressure_series(samples: &[ScSample], label: &ActivityLabel, confidence: f64) -> Result<PressureReport, AnalysisError> {
    let split = split_by_label(samples, label);
    let present = |s: Activity| label.intervals.iter().any(|i| i.state == s);
    let nonempty_mean = |xs: &[f64]| (!xs.is_empty()).then(|| mean(xs));
    let mut report = PressureReport {
        site_id: label.site_id,
        inactive_mean: nonempty_mean(&split.inactive),
        rest_mean: nonempty_mean(&split.rest),
        squeeze_mean: nonempty_mean(&split.squeeze),
        rest_vs_inactive: None,
        squeeze_vs_rest: None,
        confidence,
        verdict: PressureVerdict::NotApplicable,
    };
    if !present(Activity::ActiveRest) && !present(Activity::ActiveSqueeze) {
        return Ok(report);
    }
    let need = |xs: &[f64], s: Activity| {
        if present(s) && xs.len() < 2 {
            Err(AnalysisError::InsufficientSamples { needed: 2, got: xs.len() })
        } else {
            Ok(())
        }
    };
    need(&split.inactive, Activity::Inactive)?;
    need(&split.rest, Activity::ActiveRest)?;
    need(&split.squeeze, Activity::ActiveSqueeze)?;
    let ordered: [&[f64]; 3] = [&split.inactive, &split.rest, &split.squeeze];
    let levels: Vec<&[f64]> = ordered.into_iter().filter(|x| !x.is_empty()).collect();
    report.rest_vs_inactive = welch_greater(&split.inactive, &split.rest);
    report.squeeze_vs_rest = welch_greater(&split.rest, &split.squeeze);
    let monotone = levels.windows(2).all(|w| welch_greater(w[0], w[1]).is_some_and(|t| t.significant(confidence)));
    report.verdict = if levels.len() < 2 {
        PressureVerdict::NotApplicable
    } else if monotone {
        PressureVerdict::Monotone
    } else {
        PressureVerdict::NotMonotone
    };
    Ok(report)
}

/// Means of consecutive windows of `window` samples of one site (a trailing
/// partial window is dropped).
pub fn windowed_means(samples: &[ScSample], site_id: u32, window: usize) -> Vec<f64> {
    let counts: Vec<f64> = samples.iter().filter(|s| s.site_id == site_id).map(|s| s.counts as f64).collect();
    if window == 0 {
        return Vec::new();
    }
    counts.chunks_exact(window).map(mean).collect()
}
