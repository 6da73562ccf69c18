//! Contact-SNR measurement protocol: noise calibration against the published
//! table and Monte-Carlo replay of the six configurations.

use alloc::vec::Vec;

use crate::analysis::{
    split_by_label, table1, Activity, ActivityLabel, Cell, Covering, Interval, RingLog, TofMode, TABLE1,
};
use crate::rng::{stream_rng, Stream};
use crate::sc::{calibrate_interference, capacitance, measure_counts, ElectrodeModel, MeasurementSpec, ScError, ScSample};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CalibrationInput {
    /// Target SNRs, rows with/without ToF, columns none/rest/squeeze.
    pub targets: [[f64; 3]; 2],
    /// Count change for a palm touching the bare electrode.
    pub signal_delta: f64,
    pub base_capacitance: f64,
    pub standoff: f64,
    /// Front end; its noise fields are replaced by the fit.
    pub measurement: MeasurementSpec,
}

impl Default for CalibrationInput {
    fn default() -> Self {
        Self {
            targets: TABLE1,
            signal_delta: 600.0,
            base_capacitance: 10e-12,
            standoff: 0.002,
            measurement: MeasurementSpec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Calibration {
    pub measurement: MeasurementSpec,
    /// Covered electrode at rest; `max_compression` is the squeeze depth.
    pub electrode: ElectrodeModel,
    /// Noise-free SNR per cell implied by the fitted model.
    pub predicted: [[f64; 3]; 2],
}

impl Calibration {
    pub fn electrode_for(&self, covering: Covering, site_id: u32) -> ElectrodeModel {
        let e = ElectrodeModel { site_id, ..self.electrode };
        match covering {
            Covering::None => e.bare(),
            Covering::Rest => e,
            Covering::Squeeze => ElectrodeModel { compression: e.max_compression, ..e },
        }
    }

    pub fn predicted(&self, cell: Cell) -> f64 {
        self.predicted[cell.tof as usize][cell.covering as usize]
    }
}

/// Fits the noise levels from the uncovered pair of cells and places the
/// covering so the covered cells land on the geometric mean of their two
/// targets after the fixed ToF noise ratio.
///
/// With `σ_no = Δ / snr_no` and `σ_tof` from [`calibrate_interference`], the
/// ratio `r = σ_with / σ_no` is shared by all columns, so a covered column
/// with targets `(a, b)` is best matched in relative error by a no-ToF SNR of
/// `√(a·b·r)`. The covering thickness and squeeze depth follow from the
/// inverse-distance capacitance law.
pub fn calibrate(input: &CalibrationInput, strict: bool) -> Result<Calibration, ScError> {
    let [with, without] = input.targets;
    let delta = input.signal_delta;
    let sigma_tof = calibrate_interference(with[0], without[0], delta, strict)?;
    let sigma_base = delta / without[0];
    let measurement = MeasurementSpec { sigma_base, sigma_tof, ..input.measurement };
    measurement.check()?;
    let ratio = measurement.noise_sigma(true) / measurement.noise_sigma(false);
    let column = |k: usize| libm::sqrt(with[k] * without[k] * ratio);
    let (x_none, x_rest, x_squeeze) = (without[0], column(1), column(2));
    if !(x_rest < x_squeeze && x_squeeze < x_none) {
        return Err(ScError::CalibrationInput("targets must satisfy rest < squeeze < uncovered"));
    }
    let d0 = input.standoff;
    let gain = measurement.gain();
    let coupling = delta * d0 / gain;
    let covering_thickness = d0 * (x_none / x_rest - 1.0);
    let squeeze = covering_thickness + d0 - d0 * x_none / x_squeeze;
    let electrode = ElectrodeModel {
        site_id: 0,
        base_capacitance: input.base_capacitance,
        coupling,
        standoff: d0,
        covering_thickness,
        compression: 0.0,
        max_compression: squeeze,
    };
    electrode.check()?;
    let mut cal = Calibration { measurement, electrode, predicted: [[0.0; 3]; 2] };
    for cell in Cell::ALL {
        let e = cal.electrode_for(cell.covering, 0);
        let signal = gain * (capacitance(&e, Some(0.0), true) - e.base_capacitance);
        cal.predicted[cell.tof as usize][cell.covering as usize] = signal / measurement.noise_sigma(cell.tof.active());
    }
    Ok(cal)
}

/// Largest relative gap between the fitted model and the reference table
/// [`TABLE1`], whatever targets the calibration was fitted to.
pub fn predicted_error(cal: &Calibration) -> f64 {
    Cell::ALL
        .into_iter()
        .map(|c| (cal.predicted(c) - table1(c)).abs() / table1(c))
        .fold(0.0, f64::max)
}

/// Contact state that drives an electrode during one protocol phase.
fn counts_for(electrode: &ElectrodeModel, state: Activity, cal: &Calibration, tof: bool, rng: &mut crate::rng::SimRng) -> u64 {
    let c = match state {
        Activity::Inactive => capacitance(electrode, None, true),
        Activity::ActiveRest => capacitance(&ElectrodeModel { compression: 0.0, ..*electrode }, Some(0.0), true),
        Activity::ActiveSqueeze => capacitance(&ElectrodeModel { compression: electrode.max_compression, ..*electrode }, Some(0.0), true),
    };
    measure_counts(c, &cal.measurement, tof, rng)
}

/// Timestamped samples of one ring running through consecutive phases, each
/// of a fixed sample count, with matching labels.
pub fn phase_log(
    cal: &Calibration,
    electrode: &ElectrodeModel,
    tof: TofMode,
    phases: &[(Activity, usize)],
    seed: u64,
    stream_id: u64,
) -> (Vec<ScSample>, ActivityLabel) {
    use rand::Rng;
    let mut noise = stream_rng(seed, Stream::Experiment, 2 * stream_id);
    let mut clock = stream_rng(seed, Stream::Experiment, 2 * stream_id + 1);
    let spec = &cal.measurement;
    let mut gap = || {
        let (lo, hi) = (spec.rate_hz - spec.rate_jitter_hz, spec.rate_hz + spec.rate_jitter_hz);
        1.0 / if hi > lo { clock.random_range(lo..=hi) } else { spec.rate_hz }
    };
    let mut samples = Vec::new();
    let mut intervals = Vec::new();
    let mut t = 0.0;
    for &(state, n) in phases {
        if n == 0 {
            continue;
        }
        let start = t;
        for _ in 0..n {
            let counts = counts_for(electrode, state, cal, tof.active(), &mut noise);
            samples.push(ScSample { site_id: electrode.site_id, timestamp: t, counts });
            t += gap();
        }
        intervals.push(Interval { start, end: t, state });
    }
    let label = ActivityLabel::new(electrode.site_id, intervals).expect("phases are consecutive");
    (samples, label)
}

/// Stream id for one ring of one configuration.
fn cell_stream(cell: Cell, ring: u32) -> u64 {
    ((cell.tof as u64) * 3 + cell.covering as u64) * 64 + ring as u64
}

/// Protocol log of one configuration: every ring idles for `samples`
/// readings, then the palm rests (or squeezes) for `samples` readings.
pub fn cell_log(cal: &Calibration, cell: Cell, rings: u32, samples: usize, seed: u64) -> (Vec<ScSample>, Vec<ActivityLabel>) {
    let active = if cell.covering == Covering::Squeeze { Activity::ActiveSqueeze } else { Activity::ActiveRest };
    let mut all = Vec::new();
    let mut labels = Vec::new();
    for ring in 0..rings {
        let e = cal.electrode_for(cell.covering, ring);
        let (s, l) = phase_log(cal, &e, cell.tof, &[(Activity::Inactive, samples), (active, samples)], seed, cell_stream(cell, ring));
        all.extend(s);
        labels.push(l);
    }
    all.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp).then(a.site_id.cmp(&b.site_id)));
    (all, labels)
}

/// Splits a labeled configuration log into per-ring inactive/active sets.
pub fn ring_logs(samples: &[ScSample], labels: &[ActivityLabel]) -> Vec<RingLog> {
    labels
        .iter()
        .map(|l| {
            let split = split_by_label(samples, l);
            RingLog { site_id: l.site_id, active: split.active(), inactive: split.inactive }
        })
        .collect()
}

/// Monte-Carlo replay of one configuration.
pub fn simulate_cell(cal: &Calibration, cell: Cell, rings: u32, samples: usize, seed: u64) -> Vec<RingLog> {
    let (s, l) = cell_log(cal, cell, rings, samples, seed);
    ring_logs(&s, &l)
}

/// Squeeze ramp: `steps` compression levels from 0 to the maximum,
/// `per_step` readings each, palm in contact throughout.
pub fn squeeze_ramp(cal: &Calibration, tof: TofMode, steps: usize, per_step: usize, seed: u64) -> Vec<ScSample> {
    let mut out = Vec::new();
    let mut t = 0.0;
    let mut rng = stream_rng(seed, Stream::Experiment, u64::MAX >> 16);
    let period = 1.0 / cal.measurement.rate_hz;
    for k in 0..steps {
        let delta = if steps > 1 { cal.electrode.max_compression * k as f64 / (steps - 1) as f64 } else { 0.0 };
        let e = ElectrodeModel { compression: delta, ..cal.electrode };
        let c = capacitance(&e, Some(0.0), true);
        for _ in 0..per_step {
            out.push(ScSample { site_id: 0, timestamp: t, counts: measure_counts(c, &cal.measurement, tof.active(), &mut rng) });
            t += period;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{evaluate_configurations, windowed_means, EvaluationOptions};

    #[test]
    fn calibration_noise_levels() {
        let cal = calibrate(&CalibrationInput::default(), true).unwrap();
        assert!((cal.measurement.sigma_base - 5.0).abs() < 1e-12);
        assert!((cal.measurement.sigma_tof - 10.908712114635714).abs() < 1e-9);
        // k = Δ·d0 / (f·R) = 600 · 0.002 / 160 = 7.5e-3 pF·m
        assert!((cal.electrode.coupling - 7.5e-15).abs() < 1e-24);
        assert!((cal.predicted(Cell::ALL[0]) - 50.0).abs() < 1e-9);
        assert!((cal.predicted(Cell::ALL[3]) - 120.0).abs() < 1e-9);
        assert!(predicted_error(&cal) < 0.09);
    }

    #[test]
    fn covered_column_is_geometric_mean() {
        let cal = calibrate(&CalibrationInput::default(), true).unwrap();
        let rest = cal.predicted(Cell::new(TofMode::NoTof, Covering::Rest));
        let squeeze = cal.predicted(Cell::new(TofMode::NoTof, Covering::Squeeze));
        assert!((rest - libm::sqrt(37.0 * 13.0 * 2.4)).abs() < 1e-9);
        assert!((squeeze - libm::sqrt(45.0 * 22.0 * 2.4)).abs() < 1e-9);
        assert!(cal.electrode.max_compression < cal.electrode.covering_thickness);
    }

    #[test]
    fn inconsistent_targets_rejected() {
        let input = CalibrationInput { targets: [[50.0, 13.0, 22.0], [50.0, 37.0, 45.0]], ..Default::default() };
        assert!(calibrate(&input, true).is_err());
        let input = CalibrationInput { targets: [[50.0, 30.0, 22.0], [120.0, 37.0, 45.0]], ..Default::default() };
        assert!(calibrate(&input, true).is_err());
    }

    #[test]
    fn one_seed_reproduces_table() {
        let cal = calibrate(&CalibrationInput::default(), true).unwrap();
        let logs: Vec<_> = Cell::ALL.into_iter().map(|c| (c, simulate_cell(&cal, c, 3, 1000, 1))).collect();
        let table = evaluate_configurations(&logs, &EvaluationOptions::default()).unwrap();
        assert!(table.worst_relative_error() < 0.15, "{}", table.worst_relative_error());
        assert!(table.checks.all_hold());
    }

    #[test]
    fn noiseless_ramp_is_strictly_increasing() {
        let mut cal = calibrate(&CalibrationInput::default(), true).unwrap();
        cal.measurement.sigma_base = 0.0;
        cal.measurement.sigma_tof = 0.0;
        let s = squeeze_ramp(&cal, TofMode::WithTof, 10, 5, 0);
        let means = windowed_means(&s, 0, 5);
        assert_eq!(means.len(), 10);
        assert!(means.windows(2).all(|w| w[1] > w[0]), "{means:?}");
    }
}
