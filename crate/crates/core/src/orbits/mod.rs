//! Broadcast orbit evaluation, satellite clock corrections and frame utilities.

mod frames;
mod kepler;

pub use frames::{
    ecef_to_enu_matrix, ecef_to_geodetic, elevation_azimuth, enu_to_ecef_matrix, geodetic_to_ecef, Geodetic,
};
pub use kepler::{sat_state_at, SatState, FIT_WINDOW_S};
