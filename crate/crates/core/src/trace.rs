use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partial::PartialInjection;

/// A word as it entered a construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledWord {
    pub id: usize,
    pub text: String,
    pub entry: usize,
}

/// One action of a staged construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub stage: usize,
    pub step: String,
    pub var: usize,
    pub pair: (u64, u64),
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub fp: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub stages: usize,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub schedule: Vec<ScheduledWord>,
    pub records: Vec<TraceRecord>,
}

impl Trace {
    pub fn push(&mut self, stage: usize, step: &str, var: usize, pair: (u64, u64)) -> &mut TraceRecord {
        self.records.push(TraceRecord { stage, step: step.into(), var, pair, fp: BTreeMap::new(), note: None });
        self.records.last_mut().expect("just pushed")
    }

    pub fn arity(&self) -> usize {
        self.records.iter().map(|r| r.var + 1).max().unwrap_or(0)
    }

    /// Rebuilds the maps from the records of stages `< upto`.
    pub fn replay_until(&self, nvars: usize, upto: usize) -> Result<Vec<PartialInjection>> {
        let mut maps = vec![PartialInjection::new(); nvars];
        for r in self.records.iter().filter(|r| r.stage < upto) {
            let m = maps.get_mut(r.var).ok_or(Error::ArityMismatch { needed: r.var + 1, given: nvars })?;
            m.insert(r.pair.0, r.pair.1)?;
        }
        Ok(maps)
    }

    pub fn replay(&self, nvars: usize) -> Result<Vec<PartialInjection>> {
        self.replay_until(nvars, usize::MAX)
    }

    /// Replays as a plain function (values may repeat).
    pub fn replay_function(&self) -> Result<BTreeMap<u64, u64>> {
        let mut g = BTreeMap::new();
        for r in &self.records {
            if g.insert(r.pair.0, r.pair.1).is_some() {
                return Err(Error::Invalid(format!("trace defines {} twice", r.pair.0)));
            }
        }
        Ok(g)
    }

    /// One JSON object per record.
    pub fn to_json_lines(&self) -> String {
        self.records.iter().map(|r| serde_json::to_string(r).expect("record serializes") + "\n").collect()
    }

    pub fn entry_of(&self, text: &str) -> Option<usize> {
        self.schedule.iter().find(|s| s.text == text).map(|s| s.entry)
    }
}
