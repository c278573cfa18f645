use super::{ChannelId, MonitorError, MonitorMode, ProtocolViolation, ViolationKind};
use crate::arch::FilterSim;
use crate::sim::{LogicLevel, SimTime};

/// Token presence and register contents of every stage at one instant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenMap {
    pub time: SimTime,
    pub tokens: Vec<bool>,
    pub words: Vec<i64>,
}

/// Reads tokens (token C-element output High) and register words. Only
/// valid when no events are pending.
pub fn snapshot_tokens(sim: &mut FilterSim) -> Result<TokenMap, MonitorError> {
    if sim.kernel.next_event_time().is_some() {
        return Err(MonitorError::NotQuiescent(sim.kernel.now()));
    }
    let tokens = sim
        .fc
        .stages
        .iter()
        .map(|s| {
            s.token_net
                .is_some_and(|n| sim.kernel.value(n).level() == LogicLevel::High)
        })
        .collect();
    Ok(TokenMap {
        time: sim.kernel.now(),
        tokens,
        words: sim.register_words(),
    })
}

/// Compares register words around one injection of `injected`.
///
/// After a correct shift stage 0 holds the new sample and stage `k` holds
/// what stage `k - 1` held before. A stage `k >= 1` that newly holds the
/// injected word although neither it nor its predecessor held it before
/// means the sample reached more than one stage. The violation kind follows
/// the monitor mode: `TokenFlood` for the ungated pipeline,
/// `DataCorruption` for the gated one.
pub fn detect_flood(
    before: &TokenMap,
    after: &TokenMap,
    injected: i64,
    mode: MonitorMode,
) -> Option<ProtocolViolation> {
    let hits: Vec<usize> = (1..after.words.len().min(before.words.len()))
        .filter(|&k| {
            after.words[k] == injected
                && before.words[k] != injected
                && before.words[k - 1] != injected
        })
        .collect();
    let first = *hits.first()?;
    let kind = match mode {
        MonitorMode::Original => ViolationKind::TokenFlood,
        MonitorMode::Modified => ViolationKind::DataCorruption,
    };
    let list: Vec<String> = hits.iter().map(usize::to_string).collect();
    Some(ProtocolViolation {
        kind,
        channel: ChannelId::Stage(first),
        time: after.time,
        detail: format!(
            "sample {injected} also reached stages {} of {}",
            list.join(","),
            after.words.len()
        ),
    })
}
