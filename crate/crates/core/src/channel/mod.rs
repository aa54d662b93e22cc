//! Geometry, atmosphere and link budget combined into per-satellite truth.

pub mod atmosphere;
mod geometry;
mod link;
mod truth;

pub use atmosphere::{
    klobuchar_delay, klobuchar_slant_factor, saastamoinen_ztd, saastamoinen_ztd_with, slant_tropo, MappingFunction,
    SimpleObliquity, TROPO_MASK_DEG,
};
pub use geometry::{los_doppler, propagation_delay, sagnac_rotate};
pub use link::{carrier_power_for_cn0, free_space_loss_db, received_power, AntennaPattern, LinkBudget};
pub use truth::{
    DelayKnot, DelayState, DelayTrack, TruthModel, TruthObservable, TruthPoint, TruthSettings, KNOT_INTERVAL,
};
