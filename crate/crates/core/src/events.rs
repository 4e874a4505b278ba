//! The JSON-lines event log.
//!
//! One JSON object per line, tagged by `event`. The schema is stable:
//!
//! ```text
//! {"event":"delivery","step":N,"from":I,"to":J,"fitness":F}     (fitness omitted without a task)
//! {"event":"store","step":N,"robot":I,"sender":J,"transmit_step":T}
//! {"event":"replacement","step":N,"robot":I,"trigger":"fixed|limited|event_based",
//!  "parents":[{"sender":J,"lineage":L,"transmit_step":T}],
//!  "operator":"mutation|crossover_mutation","lineage":L}
//! {"event":"death","step":N,"robot":I}
//! {"event":"revival","step":N,"robot":I,"donor":J,"lineage":L}
//! ```
//!
//! `delivery` and `store` lines are high-volume and only emitted at the
//! `full` log level; the default level records replacements, deaths, and
//! revivals.

use serde::{Deserialize, Serialize};
use std::io::Write;

/// How much to write to the event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EventLevel {
    Off,
    /// Replacements, deaths, and revivals.
    #[default]
    Replacements,
    /// Everything, including per-tick deliveries and stores.
    Full,
}

/// Which rule fired a replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementTrigger {
    Fixed,
    Limited,
    EventBased,
}

/// Variation applied to the selected parents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariationOp {
    Mutation,
    CrossoverMutation,
}

/// Provenance of one selected parent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParentRecord {
    pub sender: u32,
    pub lineage: u64,
    pub transmit_step: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Delivery {
        step: u64,
        from: u32,
        to: u32,
        #[serde(skip_serializing_if = "Option::is_none")]
        fitness: Option<f64>,
    },
    Store {
        step: u64,
        robot: u32,
        sender: u32,
        transmit_step: u64,
    },
    Replacement {
        step: u64,
        robot: u32,
        trigger: ReplacementTrigger,
        parents: Vec<ParentRecord>,
        operator: VariationOp,
        lineage: u64,
    },
    Death {
        step: u64,
        robot: u32,
    },
    Revival {
        step: u64,
        robot: u32,
        donor: u32,
        lineage: u64,
    },
}

impl Event {
    fn is_high_volume(&self) -> bool {
        matches!(self, Event::Delivery { .. } | Event::Store { .. })
    }
}

/// Filters events by level and writes them as JSON lines.
pub struct EventLog<W: Write> {
    level: EventLevel,
    out: Option<W>,
}

impl<W: Write> EventLog<W> {
    pub fn new(level: EventLevel, out: Option<W>) -> Self {
        Self { level, out: if level == EventLevel::Off { None } else { out } }
    }

    pub fn record(&mut self, event: &Event) -> std::io::Result<()> {
        let Some(out) = self.out.as_mut() else {
            return Ok(());
        };
        if self.level != EventLevel::Full && event.is_high_volume() {
            return Ok(());
        }
        serde_json::to_writer(&mut *out, event)?;
        out.write_all(b"\n")
    }

    pub fn finish(mut self) -> std::io::Result<()> {
        if let Some(out) = self.out.as_mut() {
            out.flush()?;
        }
        Ok(())
    }
}
