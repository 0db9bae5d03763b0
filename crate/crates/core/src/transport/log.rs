use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::MessageKind;

/// One line of the session log.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionLogRecord {
    pub round: u32,
    pub sender: u32,
    pub receiver: u32,
    pub kind: MessageKind,
    pub bytes: u64,
}

/// Line-delimited JSON, one record per frame.
pub struct SessionLog {
    out: BufWriter<File>,
}

impl SessionLog {
    pub fn create(path: impl AsRef<Path>) -> io::Result<Self> {
        Ok(Self { out: BufWriter::new(File::create(path)?) })
    }

    pub fn append(&mut self, rec: &SessionLogRecord) -> io::Result<()> {
        serde_json::to_writer(&mut self.out, rec)?;
        self.out.write_all(b"\n")
    }

    pub fn flush(&mut self) -> io::Result<()> {
        self.out.flush()
    }
}

pub fn read_session_log(path: impl AsRef<Path>) -> io::Result<Vec<SessionLogRecord>> {
    BufReader::new(File::open(path)?)
        .lines()
        .filter(|l| l.as_ref().map_or(true, |l| !l.trim().is_empty()))
        .map(|l| Ok(serde_json::from_str(&l?)?))
        .collect()
}
