use std::fmt;

use crate::circuit::Var;

/// Which rule produced a decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PolicyTag {
    Deterministic,
    Random,
    Scripted,
}

impl fmt::Display for PolicyTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyTag::Deterministic => "det",
            PolicyTag::Random => "rand",
            PolicyTag::Scripted => "script",
        })
    }
}

/// One solver step, in execution order.
///
/// Text form (one event per line):
/// `SET y3=1`, `DEL 7,8,9`, `FORCE y1=1 G3 r10`, `DECIDE x1=1 G1 det`,
/// `DEFAULT x5=0`, `MARK G4 y4=0`, `CONTRADICTION G2`, `FAIL <reason>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TraceEvent {
    Set {
        var: Var,
        bit: bool,
    },
    Delete {
        rows: Vec<u32>,
    },
    Force {
        var: Var,
        bit: bool,
        gate: u32,
        row: u32,
    },
    Decide {
        var: Var,
        bit: bool,
        gate: Option<u32>,
        policy: PolicyTag,
    },
    Default {
        var: Var,
    },
    Mark {
        gate: u32,
        bit: bool,
    },
    Contradiction {
        gate: u32,
    },
    Fail {
        reason: String,
    },
}

impl TraceEvent {
    /// The assignment this event performs, if any.
    pub fn assignment(&self) -> Option<(Var, bool)> {
        match *self {
            TraceEvent::Set { var, bit }
            | TraceEvent::Force { var, bit, .. }
            | TraceEvent::Decide { var, bit, .. } => Some((var, bit)),
            TraceEvent::Default { var } => Some((var, false)),
            TraceEvent::Mark { gate, bit } => Some((Var::Gate(gate), bit)),
            _ => None,
        }
    }
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TraceEvent::Set { var, bit } => write!(f, "SET {var}={}", *bit as u8),
            TraceEvent::Delete { rows } => {
                let ids: Vec<String> = rows.iter().map(|r| r.to_string()).collect();
                write!(f, "DEL {}", ids.join(","))
            }
            TraceEvent::Force {
                var,
                bit,
                gate,
                row,
            } => {
                write!(f, "FORCE {var}={} G{gate} r{row}", *bit as u8)
            }
            TraceEvent::Decide {
                var,
                bit,
                gate,
                policy,
            } => {
                write!(f, "DECIDE {var}={} ", *bit as u8)?;
                match gate {
                    Some(g) => write!(f, "G{g} {policy}"),
                    None => write!(f, "- {policy}"),
                }
            }
            TraceEvent::Default { var } => write!(f, "DEFAULT {var}=0"),
            TraceEvent::Mark { gate, bit } => write!(f, "MARK G{gate} y{gate}={}", *bit as u8),
            TraceEvent::Contradiction { gate } => write!(f, "CONTRADICTION G{gate}"),
            TraceEvent::Fail { reason } => write!(f, "FAIL {reason}"),
        }
    }
}

/// Renders a trace, one event per line.
pub fn format_trace(events: &[TraceEvent]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&e.to_string());
        out.push('\n');
    }
    out
}
