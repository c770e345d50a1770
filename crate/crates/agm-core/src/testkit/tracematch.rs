//! Matching expected interactions against a recorded trace.
//!
//! Loose mode: the expected list must be an ordered subsequence of the
//! trace's call events. Strict mode: after restricting the trace to calls
//! whose sender and receiver both appear somewhere in the expected list,
//! the restricted sequence must equal the expected list exactly.

use super::types::DriverMode;
use crate::ocl::Value;
use crate::runtime::{ObjectRef, ObjectSpace, Trace};
use std::collections::BTreeSet;

/// One resolved expected message. `sender` is `None` for TESTER; `args` is
/// `None` when the expectation leaves arguments unconstrained.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedMsg {
    pub sender: Option<ObjectRef>,
    pub receiver: ObjectRef,
    pub method: String,
    pub args: Option<Vec<Value>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TraceMatch {
    Match,
    Divergence { position: usize, reason: String },
}

impl TraceMatch {
    pub fn is_match(&self) -> bool {
        matches!(self, TraceMatch::Match)
    }
}

type CallView<'t> = (Option<ObjectRef>, ObjectRef, &'t str, &'t [Value]);

fn matches_call(expected: &ExpectedMsg, call: &CallView) -> bool {
    expected.sender == call.0
        && expected.receiver == call.1
        && expected.method == call.2
        && expected.args.as_ref().map(|a| a.as_slice() == call.3).unwrap_or(true)
}

fn render_call(space: &ObjectSpace, call: &CallView) -> String {
    let sender = call.0.map(|r| space.label_of(r)).unwrap_or_else(|| "TESTER".into());
    format!("{sender} -> {}.{}", space.label_of(call.1), call.2)
}

fn render_expected(space: &ObjectSpace, msg: &ExpectedMsg) -> String {
    let sender = msg.sender.map(|r| space.label_of(r)).unwrap_or_else(|| "TESTER".into());
    format!("{sender} -> {}.{}", space.label_of(msg.receiver), msg.method)
}

pub fn match_trace(expected: &[ExpectedMsg], trace: &Trace, mode: DriverMode, space: &ObjectSpace) -> TraceMatch {
    let calls: Vec<CallView> =
        trace.calls().map(|(caller, callee, method, args)| (*caller, *callee, method, args)).collect();
    match mode {
        DriverMode::Loose => {
            let mut cursor = 0usize;
            for (i, msg) in expected.iter().enumerate() {
                let found = calls[cursor..].iter().position(|call| matches_call(msg, call));
                match found {
                    Some(offset) => cursor += offset + 1,
                    None => {
                        return TraceMatch::Divergence {
                            position: i + 1,
                            reason: format!("expected {} was never observed in order", render_expected(space, msg)),
                        };
                    }
                }
            }
            TraceMatch::Match
        }
        DriverMode::Strict => {
            // Every object mentioned anywhere in the expected list is a
            // participant; TESTER participates when listed as a sender.
            let mut participants: BTreeSet<Option<ObjectRef>> = BTreeSet::new();
            for msg in expected {
                participants.insert(msg.sender);
                participants.insert(Some(msg.receiver));
            }
            let filtered: Vec<&CallView> = calls
                .iter()
                .filter(|call| participants.contains(&call.0) && participants.contains(&Some(call.1)))
                .collect();
            for (i, msg) in expected.iter().enumerate() {
                match filtered.get(i) {
                    Some(call) if matches_call(msg, call) => {}
                    Some(call) => {
                        return TraceMatch::Divergence {
                            position: i + 1,
                            reason: format!(
                                "expected {} but observed {}",
                                render_expected(space, msg),
                                render_call(space, call)
                            ),
                        };
                    }
                    None => {
                        return TraceMatch::Divergence {
                            position: i + 1,
                            reason: format!("expected {} but the trace ended", render_expected(space, msg)),
                        };
                    }
                }
            }
            if filtered.len() > expected.len() {
                return TraceMatch::Divergence {
                    position: expected.len() + 1,
                    reason: format!(
                        "unexpected interaction {} between observed participants",
                        render_call(space, filtered[expected.len()])
                    ),
                };
            }
            TraceMatch::Match
        }
    }
}
