//! Append-only session logs.
//!
//! `<dir>/<id>.events.jsonl` holds every stored event, one per line, and
//! `<dir>/<id>.json` the latest [`SessionRecord`], rewritten at each round end.

use std::fs::{self, File, OpenOptions};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::session::SessionRecord;
use crate::wire::StoredEvent;

pub struct LogSink {
    events: BufWriter<File>,
    record_path: PathBuf,
}

impl LogSink {
    pub fn create(dir: &Path, session_id: &str) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        let events = OpenOptions::new()
            .create(true)
            .append(true)
            .open(dir.join(format!("{session_id}.events.jsonl")))?;
        Ok(LogSink {
            events: BufWriter::new(events),
            record_path: dir.join(format!("{session_id}.json")),
        })
    }

    pub fn append(&mut self, event: &StoredEvent) -> io::Result<()> {
        serde_json::to_writer(&mut self.events, event)?;
        self.events.write_all(b"\n")?;
        self.events.flush()
    }

    pub fn write_record(&mut self, record: &SessionRecord) -> io::Result<()> {
        let tmp = self.record_path.with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(record)?)?;
        fs::rename(tmp, &self.record_path)
    }
}

pub fn read_events(path: &Path) -> io::Result<Vec<StoredEvent>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(io::Error::from))
        .collect()
}

pub fn read_record(path: &Path) -> io::Result<SessionRecord> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}
