use crate::sim::{RecordLog, SimError};

/// Rewrites every stamp to `start_offset + index / rate` (the start record
/// gets `start_offset`). Everything else is kept.
pub fn reindex_log(log: &RecordLog) -> Result<RecordLog, SimError> {
    log.check_gaps()?;
    let mut out = log.clone();
    for r in &mut out.records {
        let ch = log.header.channel(r.channel).ok_or_else(|| SimError::Log(format!("unknown channel id {}", r.channel)))?;
        r.sim_time = log.header.canonical_time(ch, r.index);
    }
    Ok(out)
}
