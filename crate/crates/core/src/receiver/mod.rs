//! Software receiver: acquisition, tracking loops, C/N0 and jitter statistics.

mod acquisition;
mod cn0;
mod discriminators;
mod engine;
mod jitter;
mod loops;
mod tracking;

pub use acquisition::{acquire, AcquisitionParams, AcquisitionResult};
pub use cn0::{cn0_from_ratio, estimate_cn0, power_ratio, MIN_CN0_WINDOW};
pub use discriminators::{dll_discriminator, fll_discriminator, pll_discriminator};
pub use engine::{EpochSet, Receiver, ReceiverConfig, ReceiverOutput};
pub use jitter::{jitter_report, std_dev, JitterReport, JitterThresholds, MIN_JITTER_SAMPLES};
pub use loops::{CarrierLoop, CodeLoop};
pub use tracking::{ChannelEpoch, NavBit, StepOutput, TelemetryRow, TrackingChannel, TrackingParams, TrackingStage};
