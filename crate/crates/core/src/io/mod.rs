//! File formats: `key = value` documents, CSV tables and the binary event
//! format.

pub mod events;
pub mod keyvalue;
pub mod tables;

pub use events::{read_events, read_events_csv, write_events, write_events_csv, EVENT_MAGIC, EVENT_RECORD_LEN};
pub use keyvalue::Document;
pub use tables::format_sig9;
