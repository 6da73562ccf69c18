//! Self-capacitance electrodes: proximity/pressure capacitance model, RC
//! charge-time counting, sampling schedule, and ToF-induced noise.

use alloc::vec::Vec;

use rand::Rng;
use rand_distr::{Distribution, Normal};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScError {
    #[error("invalid electrode: {0}")]
    InvalidElectrode(&'static str),
    #[error("invalid measurement spec: {0}")]
    InvalidMeasurement(&'static str),
    #[error("no positive interference variance: SNR with ToF {with_tof} must be below SNR without {without_tof}")]
    Calibration { with_tof: f64, without_tof: f64 },
    #[error("calibration input invalid: {0}")]
    CalibrationInput(&'static str),
}

/// One conductive ring. `C = C0 + k / (d_eff + d0)` for conductive objects,
/// with `d_eff = max(distance, t_cov - δ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ElectrodeModel {
    pub site_id: u32,
    /// C0, farads.
    pub base_capacitance: f64,
    /// k, farad-meters.
    pub coupling: f64,
    /// d0, meters.
    pub standoff: f64,
    /// t_cov, meters; zero for a bare electrode.
    pub covering_thickness: f64,
    /// δ, meters.
    pub compression: f64,
    /// δ_max, meters.
    pub max_compression: f64,
}

impl ElectrodeModel {
    pub fn check(&self) -> Result<(), ScError> {
        if !(self.base_capacitance > 0.0 && self.base_capacitance.is_finite()) {
            return Err(ScError::InvalidElectrode("base capacitance must be > 0"));
        }
        if !(self.coupling >= 0.0 && self.coupling.is_finite()) {
            return Err(ScError::InvalidElectrode("coupling must be >= 0"));
        }
        if !(self.standoff > 0.0 && self.standoff.is_finite()) {
            return Err(ScError::InvalidElectrode("standoff must be > 0"));
        }
        if !(self.covering_thickness >= 0.0 && self.covering_thickness.is_finite()) {
            return Err(ScError::InvalidElectrode("covering thickness must be >= 0"));
        }
        if !(0.0 <= self.compression && self.compression <= self.max_compression) {
            return Err(ScError::InvalidElectrode("compression must lie in [0, max_compression]"));
        }
        let bare = self.covering_thickness == 0.0 && self.max_compression == 0.0;
        if !bare && !(self.max_compression < self.covering_thickness) {
            return Err(ScError::InvalidElectrode("max compression must be below covering thickness"));
        }
        Ok(())
    }

    pub fn with_compression(mut self, compression: f64) -> Result<Self, ScError> {
        self.compression = compression;
        self.check()?;
        Ok(self)
    }

    /// Same electrode with the covering removed.
    pub fn bare(mut self) -> Self {
        self.covering_thickness = 0.0;
        self.compression = 0.0;
        self.max_compression = 0.0;
        self
    }

    /// Closest a conductive object can get to the electrode.
    pub fn contact_floor(&self) -> f64 {
        (self.covering_thickness - self.compression).max(0.0)
    }
}

/// Electrode capacitance in farads for an object at `object_distance`
/// meters (`None`: nothing in range).
pub fn capacitance(model: &ElectrodeModel, object_distance: Option<f64>, conductive: bool) -> f64 {
    match object_distance {
        Some(d) if conductive => {
            let d_eff = d.max(0.0).max(model.contact_floor());
            model.base_capacitance + model.coupling / (d_eff + model.standoff)
        }
        _ => model.base_capacitance,
    }
}

/// RC charge-time measurement front end.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MeasurementSpec {
    /// Charging resistor, ohms.
    pub resistance: f64,
    /// Counter clock, Hz.
    pub clock_hz: f64,
    /// Vth / Vdd at which the count stops.
    pub threshold_ratio: f64,
    pub rate_hz: f64,
    pub rate_jitter_hz: f64,
    /// Count noise without ToF imagers, counts.
    pub sigma_base: f64,
    /// Extra count noise while ToF imagers are running, counts.
    pub sigma_tof: f64,
}

impl Default for MeasurementSpec {
    fn default() -> Self {
        Self {
            resistance: 1e6,
            clock_hz: 160e6,
            threshold_ratio: 1.0 - libm::exp(-1.0),
            rate_hz: 42.0,
            rate_jitter_hz: 2.0,
            sigma_base: 5.0,
            sigma_tof: libm::sqrt(119.0),
        }
    }
}

impl MeasurementSpec {
    pub fn check(&self) -> Result<(), ScError> {
        let pos = |x: f64| x > 0.0 && x.is_finite();
        if !pos(self.resistance) || !pos(self.clock_hz) || !pos(self.rate_hz) {
            return Err(ScError::InvalidMeasurement("resistance, clock and rate must be > 0"));
        }
        if !(self.threshold_ratio > 0.0 && self.threshold_ratio < 1.0) {
            return Err(ScError::InvalidMeasurement("threshold ratio must lie in (0, 1)"));
        }
        if !(self.rate_jitter_hz >= 0.0 && self.rate_jitter_hz < self.rate_hz) {
            return Err(ScError::InvalidMeasurement("rate jitter must lie in [0, rate)"));
        }
        if !(self.sigma_base >= 0.0 && self.sigma_tof >= 0.0) {
            return Err(ScError::InvalidMeasurement("noise must be >= 0"));
        }
        Ok(())
    }

    /// Counts per farad: `f_clk · R · ln(1 / (1 − Vth/Vdd))`.
    pub fn gain(&self) -> f64 {
        self.clock_hz * self.resistance * libm::log(1.0 / (1.0 - self.threshold_ratio))
    }

    pub fn noise_sigma(&self, tof_active: bool) -> f64 {
        let tof = if tof_active { self.sigma_tof } else { 0.0 };
        libm::sqrt(self.sigma_base * self.sigma_base + tof * tof)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScSample {
    pub site_id: u32,
    pub timestamp: f64,
    pub counts: u64,
}

/// Noise-free count `round(gain · C)`.
pub fn ideal_counts(c: f64, spec: &MeasurementSpec) -> u64 {
    libm::round(spec.gain() * c).max(0.0) as u64
}

/// One charge-time reading: the ideal count plus zero-mean Gaussian noise,
/// rounded and clamped at zero.
pub fn measure_counts(c: f64, spec: &MeasurementSpec, tof_active: bool, rng: &mut impl Rng) -> u64 {
    let n = ideal_counts(c, spec) as f64;
    let sigma = spec.noise_sigma(tof_active);
    let noisy = if sigma > 0.0 {
        n + Normal::new(0.0, sigma).expect("finite sigma").sample(rng)
    } else {
        n
    };
    libm::round(noisy).max(0.0) as u64
}

/// SC sample times with gaps of `1/r`, `r ~ U[rate − jitter, rate + jitter]`,
/// starting at zero.
pub fn sc_times(duration: f64, spec: &MeasurementSpec, rng: &mut impl Rng) -> Vec<f64> {
    let mut out = Vec::new();
    let mut t = 0.0;
    while t < duration {
        out.push(t);
        let lo = spec.rate_hz - spec.rate_jitter_hz;
        let hi = spec.rate_hz + spec.rate_jitter_hz;
        let rate = if hi > lo { rng.random_range(lo..=hi) } else { spec.rate_hz };
        t += 1.0 / rate;
    }
    out
}

/// Independent SC (jittered) and ToF (periodic) timestamp streams over
/// `[0, duration)`. The ToF stream consumes no randomness.
pub fn schedule_streams(
    duration: f64,
    sc: &MeasurementSpec,
    tof: &crate::tof::TofSpec,
    rng: &mut impl Rng,
) -> (Vec<f64>, Vec<f64>) {
    (sc_times(duration, sc, rng), crate::tof::frame_times(duration, tof))
}

/// Interference noise σ_tof from a pair of SNRs measured with and without
/// the imagers for the same signal `Δ`: `σ_no = Δ/snr_without`,
/// `σ_with = Δ/snr_with`, `σ_tof = √(σ_with² − σ_no²)`. Equal SNRs give 0
/// unless `strict`.
pub fn calibrate_interference(snr_with_tof: f64, snr_without_tof: f64, signal_delta: f64, strict: bool) -> Result<f64, ScError> {
    if !(signal_delta > 0.0 && signal_delta.is_finite()) {
        return Err(ScError::CalibrationInput("signal delta must be > 0"));
    }
    if !(snr_with_tof > 0.0 && snr_without_tof > 0.0) {
        return Err(ScError::CalibrationInput("SNRs must be > 0"));
    }
    let err = ScError::Calibration { with_tof: snr_with_tof, without_tof: snr_without_tof };
    if snr_with_tof > snr_without_tof || (strict && snr_with_tof == snr_without_tof) {
        return Err(err);
    }
    let sigma_no = signal_delta / snr_without_tof;
    let sigma_with = signal_delta / snr_with_tof;
    Ok(libm::sqrt((sigma_with * sigma_with - sigma_no * sigma_no).max(0.0)))
}
