use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::Serialize;

use super::store::Store;
use crate::ids::ObjectId;

/// One rule application inside a round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Firing {
    pub rule: String,
    pub element: String,
    pub tuple: Vec<String>,
    /// Fresh elements copied from the rule's glue.
    pub added: Vec<String>,
}

/// Round 0 is the initial repair; round `k > 0` fires the `k`-th frontier of
/// unsatisfied matches and repairs again.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceRound {
    pub round: usize,
    pub firings: Vec<Firing>,
    /// Elements created in this round, including the ones in `firings`.
    pub added: usize,
    /// `(kept, merged)` element names.
    pub identifications: Vec<(String, String)>,
    pub sizes: BTreeMap<ObjectId, usize>,
    /// False when the round stopped before completing cones.
    pub complete: bool,
}

impl TraceRound {
    pub(crate) fn from_changes(round: usize, firings: Vec<Firing>, st: &mut Store, complete: bool) -> Self {
        let changes = st.take_changes();
        let identifications =
            changes.identified.iter().map(|&(k, m)| (st.name(k).to_owned(), st.name(m).to_owned())).collect();
        Self { round, firings, added: changes.added.len(), identifications, sizes: st.sizes(), complete }
    }
}

/// Everything a chase run did, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub rounds: Vec<TraceRound>,
}

impl Trace {
    pub fn firings(&self) -> impl Iterator<Item = &Firing> {
        self.rounds.iter().flat_map(|r| &r.firings)
    }

    /// Line-oriented log: one line per firing, identification and round
    /// summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for r in &self.rounds {
            for f in &r.firings {
                let _ = writeln!(
                    out,
                    "round {} fire {} at {} ({}) added {}",
                    r.round,
                    f.rule,
                    f.element,
                    f.tuple.join(","),
                    f.added.join(" ")
                );
            }
            for (k, m) in &r.identifications {
                let _ = writeln!(out, "round {} identify {m} = {k}", r.round);
            }
            let sizes: Vec<String> = r.sizes.iter().map(|(o, n)| format!("{o}={n}")).collect();
            let _ = writeln!(
                out,
                "round {} done added={} identified={}{} sizes {}",
                r.round,
                r.added,
                r.identifications.len(),
                if r.complete { "" } else { " partial" },
                sizes.join(" ")
            );
        }
        out
    }
}

impl fmt::Display for Trace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}
