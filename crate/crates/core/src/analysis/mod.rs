//! Spectral, clock-domain and observable validation.

mod clock;
mod compare;
mod psd;

pub use clock::{allan_deviation, fit_clock_drift, octave_taus, ClockFit, ClockSeries};
pub use compare::{compare_observables, ObservableComparison, ObservableError, PrnSummary, Stats, EPOCH_MATCH_TOL};
pub use psd::{bpsk_nulls, estimate_psd, NullReport, Psd, PsdParams};
