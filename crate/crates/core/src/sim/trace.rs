//! Line-delimited trace records and the metric fold over them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::model::{TargetId, EPS_GEOM};

/// State at the end of a tick. `odo` holds the cumulative UAV and UGV distances.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TickRecord {
    pub t: f64,
    pub uav: [f64; 2],
    pub fuel: f64,
    pub ugv: [f64; 2],
    pub seg: usize,
    pub site: [f64; 2],
    pub mode: String,
    pub odo: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum Event {
    /// Case label of a finished segment.
    Case {
        segment: usize,
        case: u8,
    },
    Refuel {
        segment: usize,
        site: [f64; 2],
        fuel: f64,
    },
    Skip {
        segment: usize,
        target: TargetId,
    },
    Abandon {
        segment: usize,
        target: TargetId,
        deferred: Vec<TargetId>,
    },
    /// A target finished processing.
    Complete {
        segment: usize,
        target: TargetId,
    },
    /// A segment was activated with its terminal site pulled back.
    Repair {
        segment: usize,
        backtracked: f64,
        shed: Vec<TargetId>,
    },
    /// The UAV is back at the depot with every target processed.
    Finish {
        segments: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t: f64,
    #[serde(flatten)]
    pub event: Event,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TraceRecord {
    Tick(TickRecord),
    Event(EventRecord),
}

impl TraceRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("trace records serialize")
    }
}

pub fn write_trace<W: Write>(mut w: W, records: &[TraceRecord]) -> io::Result<()> {
    for r in records {
        writeln!(w, "{}", r.to_json_line())?;
    }
    Ok(())
}

pub fn trace_to_string(records: &[TraceRecord]) -> String {
    let mut s = String::new();
    for r in records {
        s.push_str(&r.to_json_line());
        s.push('\n');
    }
    s
}

pub fn read_trace<R: BufRead>(r: R) -> io::Result<Vec<TraceRecord>> {
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| {
            io::Error::new(io::ErrorKind::InvalidData, format!("line {}: {e}", n + 1))
        })?;
        out.push(rec);
    }
    Ok(out)
}

/// Aggregate mission metrics. Always a pure fold of the trace; see [`MetricsFold`].
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Metrics {
    pub uav_distance: f64,
    pub ugv_distance: f64,
    pub mission_time: f64,
    pub backtrack_episodes: u64,
    pub targets_deferred: u64,
    pub abandonments: u64,
    pub rendezvous_count: u64,
    pub case_histogram: BTreeMap<u8, u64>,
}

impl Metrics {
    pub fn from_trace(records: &[TraceRecord]) -> Metrics {
        let mut fold = MetricsFold::default();
        for r in records {
            fold.push(r);
        }
        fold.finish()
    }

    pub fn case_count(&self, case: u8) -> u64 {
        self.case_histogram.get(&case).copied().unwrap_or(0)
    }

    /// Flat `(name, value)` list in alphabetical order.
    pub fn fields(&self) -> Vec<(String, f64)> {
        let mut v = vec![
            ("abandonments".to_string(), self.abandonments as f64),
            (
                "backtrack_episodes".to_string(),
                self.backtrack_episodes as f64,
            ),
        ];
        for c in 1..=5u8 {
            v.push((format!("case_{c}"), self.case_count(c) as f64));
        }
        v.extend([
            ("mission_time".to_string(), self.mission_time),
            ("rendezvous_count".to_string(), self.rendezvous_count as f64),
            ("targets_deferred".to_string(), self.targets_deferred as f64),
            ("uav_distance".to_string(), self.uav_distance),
            ("ugv_distance".to_string(), self.ugv_distance),
        ]);
        v
    }

    pub fn field_names() -> Vec<String> {
        Metrics::default()
            .fields()
            .into_iter()
            .map(|f| f.0)
            .collect()
    }

    /// `key = value` lines.
    pub fn to_summary(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.fields() {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }
}

/// Incremental form of [`Metrics::from_trace`], so runs need not keep their trace.
#[derive(Clone, Debug, Default)]
pub struct MetricsFold {
    m: Metrics,
    prev: Option<(usize, [f64; 2])>,
    backtracking: bool,
}

impl MetricsFold {
    pub fn push(&mut self, rec: &TraceRecord) {
        match rec {
            TraceRecord::Tick(t) => {
                // a site moves within a segment only by backtracking
                let moved = match self.prev {
                    Some((seg, site)) if seg == t.seg => {
                        (site[0] - t.site[0]).hypot(site[1] - t.site[1]) > EPS_GEOM
                    }
                    _ => false,
                };
                if moved && !self.backtracking {
                    self.m.backtrack_episodes += 1;
                }
                self.backtracking = moved;
                self.prev = Some((t.seg, t.site));
                self.m.uav_distance = t.odo[0];
                self.m.ugv_distance = t.odo[1];
                self.m.mission_time = t.t;
            }
            TraceRecord::Event(e) => {
                self.m.mission_time = self.m.mission_time.max(e.t);
                match &e.event {
                    Event::Case { case, .. } => {
                        *self.m.case_histogram.entry(*case).or_default() += 1;
                    }
                    Event::Refuel { .. } => self.m.rendezvous_count += 1,
                    Event::Skip { .. } => self.m.targets_deferred += 1,
                    Event::Abandon { deferred, .. } => {
                        self.m.abandonments += 1;
                        self.m.targets_deferred += deferred.len() as u64;
                    }
                    Event::Repair { shed, .. } => self.m.targets_deferred += shed.len() as u64,
                    Event::Complete { .. } | Event::Finish { .. } => {}
                }
            }
        }
    }

    pub fn finish(&self) -> Metrics {
        let mut m = self.m.clone();
        for c in 1..=5u8 {
            m.case_histogram.entry(c).or_default();
        }
        m
    }
}
