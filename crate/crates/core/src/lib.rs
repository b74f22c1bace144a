//! Energy-constrained information storage on self-directed channel (SDC)
//! memristors.
//!
//! The crate is organised along the measurement-to-capacity chain:
//!
//! * [`device`] - VI/state model and the minimum-variance state estimator.
//! * [`signal`] - waveform synthesis, measurement-frame conversion, time
//!   alignment, quadrant offset correction, cycle segmentation, pulse energy.
//! * [`energy`] - logarithmic programming-energy cost and its least-squares fit.
//! * [`drift`] - delay-conditioned drift channel: reference mean-reverting
//!   drift, sample interchange, quantisation, channel estimation.
//! * [`capacity`] - mutual information and cost-constrained Blahut-Arimoto.

pub mod capacity;
pub mod device;
pub mod drift;
pub mod energy;
mod error;
pub(crate) mod fmt;
pub mod signal;

pub use error::{Error, Result, RowError};

pub use capacity::{
    blahut_arimoto, capacity_cost_curve, delay_sweep, mutual_information, BaOptions,
    CapacityCurvePoint, ChannelSpec, DelayCurve, SGrid, SSpacing,
};
pub use device::{diode_current, estimate_state, memristor_current, DeviceParams, StateEstimate};
pub use drift::{
    estimate_channel, make_grid, quantise_value, reference_drift_sample, DriftChannelMatrix,
    DriftSample, DriftSampler, QuantisationGrid, ReferenceDriftParams, RetentionSeries,
};
pub use energy::{energy_cost, fit_energy_model, EnergyCostModel, EnergyObservation};
pub use signal::{MeasurementRecord, VITrace};
