//! Navigation message decoding, pseudorange formation and PVT.

mod decode;
mod engine;
mod errors;
mod pseudorange;
mod pvt;
mod records;
mod truth;

pub use decode::{decode_subframes, DecodeEvent, NavDecoder, TowAnchor};
pub use engine::{NavigationConfig, NavigationEngine, NavigationOutput};
pub use errors::{position_errors, EnuError, PositionSummary};
pub use pseudorange::{form_pseudoranges, transmit_time, HatchFilter, MAX_TOW_SPREAD};
pub use pvt::{dops, geometry_row, line_of_sight, solve_pvt, Dops, PvtConfig};
pub use records::{ObservableRecord, ObservableSource, PvtSolution};
pub use truth::{truth_observables, truth_solutions};
