//! Binary experiment log (`GRLG`) and its JSON-lines mirror.

use byteorder::{LittleEndian as LE, ReadBytesExt, WriteBytesExt};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::Cursor;

use super::channels::{ChannelInfo, ChannelKind};
use super::config::{ChannelSchedule, SimConfig};
use super::record::{Payload, Record};
use super::SimError;

pub const MAGIC: &[u8; 4] = b"GRLG";
pub const FORMAT_VERSION: u16 = 1;
/// channel (2) + index (8) + sim_time (8)
const FRAME_FIXED: usize = 18;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LogHeader {
    pub config: SimConfig,
    pub schedule: ChannelSchedule,
    pub physics_rate: u32,
    /// Experiment start time; record `k` of a channel at rate `r` is stamped `start_offset + k / r`.
    pub start_offset: f64,
    /// Hex SHA-256 of the scene manifest file.
    pub manifest_sha256: String,
    pub robots: Vec<String>,
    pub channels: Vec<ChannelInfo>,
}

impl LogHeader {
    pub fn channel(&self, id: u16) -> Option<&ChannelInfo> {
        self.channels.get(id as usize)
    }

    pub fn channel_by_name(&self, name: &str) -> Option<&ChannelInfo> {
        self.channels.iter().find(|c| c.name == name)
    }

    /// Canonical stamp of record `index` on `ch`.
    pub fn canonical_time(&self, ch: &ChannelInfo, index: u64) -> f64 {
        if ch.rate == 0 {
            self.start_offset
        } else {
            self.start_offset + index as f64 / ch.rate as f64
        }
    }

    /// Physics step (from experiment start) at which record `index` of `ch` is due.
    pub fn step_of(&self, ch: &ChannelInfo, index: u64) -> u64 {
        self.physics_rate.checked_div(ch.rate).map_or(0, |p| index * p as u64)
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.channels.iter().enumerate().any(|(i, c)| c.id as usize != i) {
            return Err(SimError::Log("channel ids must be 0..n in order".into()));
        }
        if self.physics_rate == 0 || self.channels.iter().any(|c| c.rate != 0 && !self.physics_rate.is_multiple_of(c.rate)) {
            return Err(SimError::Log("channel rate does not divide the physics rate".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordLog {
    pub header: LogHeader,
    pub records: Vec<Record>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TextHeader {
    format: String,
    version: u16,
    header: LogHeader,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TextRecord {
    channel: String,
    id: u16,
    index: u64,
    time: f64,
    payload: Payload,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

impl RecordLog {
    pub fn new(header: LogHeader) -> Self {
        Self { header, records: Vec::new() }
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.write_u16::<LE>(FORMAT_VERSION).unwrap();
        let h = serde_json::to_vec(&self.header).expect("header serializes");
        out.write_u32::<LE>(h.len() as u32).unwrap();
        out.extend_from_slice(&h);
        let mut payload = Vec::new();
        for r in &self.records {
            payload.clear();
            r.payload.encode(&mut payload);
            out.write_u32::<LE>((FRAME_FIXED + payload.len()) as u32).unwrap();
            out.write_u16::<LE>(r.channel).unwrap();
            out.write_u64::<LE>(r.index).unwrap();
            out.write_f64::<LE>(r.sim_time).unwrap();
            out.extend_from_slice(&payload);
        }
        out
    }

    /// Strict parse; any incomplete trailing frame is an error.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self, SimError> {
        let (log, truncated) = Self::from_bytes_lenient(bytes)?;
        if truncated {
            return Err(SimError::Log("truncated record at end of log".into()));
        }
        Ok(log)
    }

    /// Parses whole frames and reports whether an incomplete frame was dropped.
    pub fn from_bytes_lenient(bytes: &[u8]) -> Result<(Self, bool), SimError> {
        let bad = |m: &str| SimError::Log(m.to_string());
        if bytes.len() < 10 || &bytes[..4] != MAGIC {
            return Err(bad("not a GRLG log"));
        }
        let mut c = Cursor::new(bytes);
        c.set_position(4);
        let version = c.read_u16::<LE>().map_err(|_| bad("short header"))?;
        if version != FORMAT_VERSION {
            return Err(SimError::Log(format!("unsupported log version {version}")));
        }
        let hlen = c.read_u32::<LE>().map_err(|_| bad("short header"))? as usize;
        let start = c.position() as usize;
        let hbytes = bytes.get(start..start + hlen).ok_or_else(|| bad("short header"))?;
        let header: LogHeader = serde_json::from_slice(hbytes).map_err(|e| SimError::Log(format!("header: {e}")))?;
        header.validate()?;
        let mut pos = start + hlen;
        let mut records = Vec::new();
        let mut truncated = false;
        while pos < bytes.len() {
            let Some(len_bytes) = bytes.get(pos..pos + 4) else {
                truncated = true;
                break;
            };
            let len = u32::from_le_bytes(len_bytes.try_into().unwrap()) as usize;
            if len < FRAME_FIXED {
                return Err(bad("frame shorter than its fixed fields"));
            }
            let Some(frame) = bytes.get(pos + 4..pos + 4 + len) else {
                truncated = true;
                break;
            };
            let channel = u16::from_le_bytes([frame[0], frame[1]]);
            let index = u64::from_le_bytes(frame[2..10].try_into().unwrap());
            let sim_time = f64::from_le_bytes(frame[10..18].try_into().unwrap());
            let ch = header.channel(channel).ok_or_else(|| SimError::Log(format!("unknown channel id {channel}")))?;
            let payload = Payload::decode(ch.kind, &frame[FRAME_FIXED..])?;
            records.push(Record {
                channel,
                index,
                sim_time,
                payload,
            });
            pos += 4 + len;
        }
        Ok((Self { header, records }, truncated))
    }

    pub fn sha256(&self) -> String {
        sha256_hex(&self.to_bytes())
    }

    /// Lossless text mirror: a header line, then one JSON object per record.
    pub fn to_json_lines(&self) -> String {
        let mut s = serde_json::to_string(&TextHeader {
            format: "GRLG".into(),
            version: FORMAT_VERSION,
            header: self.header.clone(),
        })
        .expect("header serializes");
        s.push('\n');
        for r in &self.records {
            let name = self.header.channel(r.channel).map_or("?", |c| c.name.as_str());
            let line = serde_json::to_string(&TextRecord {
                channel: name.to_string(),
                id: r.channel,
                index: r.index,
                time: r.sim_time,
                payload: r.payload.clone(),
            })
            .expect("record serializes");
            s.push_str(&line);
            s.push('\n');
        }
        s
    }

    pub fn from_json_lines(text: &str) -> Result<Self, SimError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let first = lines.next().ok_or_else(|| SimError::Log("empty text log".into()))?;
        let th: TextHeader = serde_json::from_str(first).map_err(|e| SimError::Log(format!("text header: {e}")))?;
        if th.format != "GRLG" || th.version != FORMAT_VERSION {
            return Err(SimError::Log("unsupported text log".into()));
        }
        th.header.validate()?;
        let mut records = Vec::new();
        for (n, l) in lines.enumerate() {
            let tr: TextRecord = serde_json::from_str(l).map_err(|e| SimError::Log(format!("text record {}: {e}", n + 1)))?;
            let ch = th
                .header
                .channel(tr.id)
                .ok_or_else(|| SimError::Log(format!("unknown channel id {}", tr.id)))?;
            if ch.name != tr.channel || !tr.payload.kind_matches(ch.kind) {
                return Err(SimError::Log(format!("text record {} does not match channel {}", n + 1, ch.name)));
            }
            records.push(Record {
                channel: tr.id,
                index: tr.index,
                sim_time: tr.time,
                payload: tr.payload,
            });
        }
        Ok(Self { header: th.header, records })
    }

    pub fn records_on(&self, channel: u16) -> impl Iterator<Item = &Record> {
        self.records.iter().filter(move |r| r.channel == channel)
    }

    /// Record count per channel name, including empty channels.
    pub fn counts(&self) -> BTreeMap<String, usize> {
        let mut per_id = vec![0usize; self.header.channels.len()];
        for r in &self.records {
            if let Some(c) = per_id.get_mut(r.channel as usize) {
                *c += 1;
            }
        }
        self.header.channels.iter().map(|c| (c.name.clone(), per_id[c.id as usize])).collect()
    }

    /// Expected record count of a channel for the configured record duration.
    pub fn expected_count(&self, ch: &ChannelInfo) -> Result<u64, SimError> {
        if ch.kind == ChannelKind::StartExperiment {
            return Ok(1);
        }
        let steps = self.header.config.record_steps()?;
        let period = (self.header.physics_rate / ch.rate) as u64;
        Ok(steps.div_ceil(period))
    }

    /// Checks that every channel's indices run 0, 1, 2, … with no gap.
    pub fn check_gaps(&self) -> Result<(), SimError> {
        let mut next = vec![0u64; self.header.channels.len()];
        for r in &self.records {
            let slot = next
                .get_mut(r.channel as usize)
                .ok_or_else(|| SimError::Log(format!("unknown channel id {}", r.channel)))?;
            if r.index != *slot {
                let name = self.header.channels[r.channel as usize].name.clone();
                return Err(SimError::Gap { channel: name, index: *slot });
            }
            *slot += 1;
        }
        Ok(())
    }

    /// Keeps only records on the named channels; the header is unchanged.
    pub fn filter_channels(&self, names: &[&str]) -> RecordLog {
        let keep: Vec<bool> = self.header.channels.iter().map(|c| names.contains(&c.name.as_str())).collect();
        RecordLog {
            header: self.header.clone(),
            records: self.records.iter().filter(|r| keep.get(r.channel as usize) == Some(&true)).cloned().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::test_support::run_short;
    use super::*;

    #[test]
    fn binary_round_trip() {
        let log = run_short(0.5);
        let bytes = log.to_bytes();
        let back = RecordLog::from_bytes(&bytes).unwrap();
        assert_eq!(back, log);
        assert_eq!(back.to_bytes(), bytes);
    }

    #[test]
    fn text_mirror_is_lossless() {
        let log = run_short(0.5);
        let back = RecordLog::from_json_lines(&log.to_json_lines()).unwrap();
        assert_eq!(back.to_bytes(), log.to_bytes());
    }

    #[test]
    fn truncated_tail() {
        let log = run_short(0.25);
        let mut bytes = log.to_bytes();
        bytes.truncate(bytes.len() - 5);
        assert!(RecordLog::from_bytes(&bytes).is_err());
        let (partial, truncated) = RecordLog::from_bytes_lenient(&bytes).unwrap();
        assert!(truncated);
        assert_eq!(partial.records.len(), log.records.len() - 1);
    }

    #[test]
    fn rejects_foreign_bytes() {
        assert!(RecordLog::from_bytes(b"nope").is_err());
        assert!(RecordLog::from_bytes(b"GRLG\x02\x00\x00\x00\x00\x00").is_err());
    }

    #[test]
    fn gap_is_named() {
        let mut log = run_short(0.25);
        let imu = log.header.channel_by_name("robot_0/imu_body").unwrap().id;
        let pos = log.records.iter().position(|r| r.channel == imu && r.index == 3).unwrap();
        log.records.remove(pos);
        let e = log.check_gaps().unwrap_err();
        assert_eq!(e.to_string(), "gap in channel robot_0/imu_body at index 3");
    }

    #[test]
    fn filtering_keeps_header() {
        let log = run_short(0.25);
        let f = log.filter_channels(&["clock"]);
        assert_eq!(f.header, log.header);
        assert_eq!(f.records.len(), 60);
    }
}
