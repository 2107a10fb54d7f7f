//! Event files.
//!
//! Binary layout: the 6-byte magic `RDUO1\n`, then one 16-byte little-endian
//! record per event:
//!
//! | offset | size | field                      |
//! |--------|------|----------------------------|
//! | 0      | 8    | `t_us` (u64)               |
//! | 8      | 2    | `x` (u16)                  |
//! | 10     | 2    | `y` (u16)                  |
//! | 12     | 1    | polarity (1 = ON, 0 = OFF) |
//! | 13     | 3    | zero padding               |
//!
//! The CSV mirror has the header `t_us,x,y,polarity`.

use std::io::{Read, Write};

use crate::channels::{Event, Polarity};
use crate::error::{Error, Result};

pub const EVENT_MAGIC: &[u8; 6] = b"RDUO1\n";
pub const EVENT_RECORD_LEN: usize = 16;

pub fn encode_record(e: &Event) -> [u8; EVENT_RECORD_LEN] {
    let mut rec = [0u8; EVENT_RECORD_LEN];
    rec[0..8].copy_from_slice(&e.t_us.to_le_bytes());
    rec[8..10].copy_from_slice(&e.x.to_le_bytes());
    rec[10..12].copy_from_slice(&e.y.to_le_bytes());
    rec[12] = e.polarity.as_u8();
    rec
}

pub fn decode_record(rec: &[u8; EVENT_RECORD_LEN], index: usize) -> Result<Event> {
    let bad = |message: String| Error::Parse { line: index + 1, message };
    let polarity = Polarity::from_u8(rec[12]).ok_or_else(|| bad(format!("invalid polarity byte {}", rec[12])))?;
    if rec[13..] != [0, 0, 0] {
        return Err(bad("non-zero padding".into()));
    }
    Ok(Event {
        t_us: u64::from_le_bytes(rec[0..8].try_into().unwrap()),
        x: u16::from_le_bytes([rec[8], rec[9]]),
        y: u16::from_le_bytes([rec[10], rec[11]]),
        polarity,
    })
}

pub fn write_events<W: Write>(mut w: W, events: &[Event]) -> Result<()> {
    w.write_all(EVENT_MAGIC)?;
    for e in events {
        w.write_all(&encode_record(e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_events<R: Read>(mut r: R) -> Result<Vec<Event>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    let body = bytes
        .strip_prefix(EVENT_MAGIC.as_slice())
        .ok_or_else(|| Error::Parse { line: 0, message: "missing RDUO1 header".into() })?;
    if body.len() % EVENT_RECORD_LEN != 0 {
        return Err(Error::Parse {
            line: 0,
            message: format!("truncated record ({} trailing bytes)", body.len() % EVENT_RECORD_LEN),
        });
    }
    body.chunks_exact(EVENT_RECORD_LEN)
        .enumerate()
        .map(|(i, chunk)| decode_record(chunk.try_into().unwrap(), i))
        .collect()
}

pub fn write_events_csv<W: Write>(w: W, events: &[Event]) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["t_us", "x", "y", "polarity"])?;
    for e in events {
        out.write_record([e.t_us.to_string(), e.x.to_string(), e.y.to_string(), e.polarity.as_u8().to_string()])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_events_csv<R: Read>(r: R) -> Result<Vec<Event>> {
    let mut reader = csv::Reader::from_reader(r);
    let mut events = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let field = |k: usize| rec.get(k).ok_or_else(|| Error::Parse { line, message: format!("missing column {k}") });
        let bad = |what: &str| Error::Parse { line, message: format!("invalid {what}") };
        let polarity: u8 = field(3)?.parse().map_err(|_| bad("polarity"))?;
        events.push(Event {
            t_us: field(0)?.parse().map_err(|_| bad("t_us"))?,
            x: field(1)?.parse().map_err(|_| bad("x"))?,
            y: field(2)?.parse().map_err(|_| bad("y"))?,
            polarity: Polarity::from_u8(polarity).ok_or_else(|| bad("polarity"))?,
        });
    }
    Ok(events)
}
