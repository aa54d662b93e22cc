//! File formats: versioned CSV tables, IF sample files and their sidecar metadata.

mod iffile;
mod rows;
mod table;

pub use iffile::{IfMetadata, IfReader, IfWriter, IF_FORMAT, IF_FORMAT_VERSION};
pub use rows::{schema, AllanRow, PsdRow, PvtRow};
pub use table::{read_csv, schema_line, write_atomic, write_csv, CsvSink, SCHEMA_VERSION};
