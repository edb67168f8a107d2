//! Machine-readable reports (`--json`), schema version "1".
//!
//! Rationals are written as strings (`"3"`, `"5/2"`). Traces are cut to
//! each pair's stabilization index plus two worlds.

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::agent::{AgentError, AgentTable};
use crate::arena::{MatchResult, Payoffs, Rank0Report, SearchBounds, SearchOutcome, TournamentReport};
use crate::solver::Action;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportDocument {
    pub schema_version: String,
    pub command: Vec<String>,
    pub agents: Vec<AgentEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub matches: Vec<MatchEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoffs: Option<PayoffEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scores: Option<Vec<ScoreEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentEntry {
    pub name: String,
    pub kind: AgentKind,
    /// Canonical formula; for a family, that of its `K = 0` instance.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    /// Family body or syntactic source, verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Modal,
    Family,
    Syntactic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchEntry {
    pub agents: [String; 2],
    pub actions: [Action; 2],
    pub proof_levels: [Option<usize>; 2],
    pub payoffs: [String; 2],
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sides: Vec<SideEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SideEntry {
    pub pair: String,
    pub stabilization: usize,
    pub trace: Vec<bool>,
    pub normal_form: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PayoffEntry {
    #[serde(rename = "T")]
    pub t: String,
    #[serde(rename = "R")]
    pub r: String,
    #[serde(rename = "P")]
    pub p: String,
    #[serde(rename = "S")]
    pub s: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub agent: String,
    pub score: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchEntry {
    pub kind: String,
    pub targets: Vec<String>,
    pub max_rank: u32,
    pub sub_agents: Vec<String>,
    pub max_nodes: usize,
    pub dedup: bool,
    pub candidates: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub found: Option<FoundEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub premise_holds: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub violations: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoundEntry {
    pub name: String,
    pub formula: String,
}

pub fn rational(r: Rational64) -> String {
    r.to_string()
}

impl PayoffEntry {
    pub fn from_payoffs(p: &Payoffs) -> Self {
        PayoffEntry {
            t: rational(p.t),
            r: rational(p.r),
            p: rational(p.p),
            s: rational(p.s),
        }
    }
}

impl MatchEntry {
    pub fn from_result(m: &MatchResult) -> Self {
        let mut sides = Vec::new();
        if let Some((a, b)) = &m.detail {
            for (side, level) in [(a, m.proof_levels.0), (b, m.proof_levels.1)] {
                let d = level.unwrap_or(0);
                let shown = (d + 2).min(side.trace.len());
                sides.push(SideEntry {
                    pair: side.pair.to_string(),
                    stabilization: d,
                    trace: side.trace[..shown].to_vec(),
                    normal_form: side.normal_form.to_string(),
                });
            }
        }
        MatchEntry {
            agents: [m.agents.0.clone(), m.agents.1.clone()],
            actions: [m.actions.0, m.actions.1],
            proof_levels: [m.proof_levels.0, m.proof_levels.1],
            payoffs: [rational(m.payoffs.0), rational(m.payoffs.1)],
            sides,
        }
    }
}

impl ReportDocument {
    pub fn new(command: Vec<String>) -> Self {
        ReportDocument {
            schema_version: SCHEMA_VERSION.to_string(),
            command,
            agents: Vec::new(),
            matches: Vec::new(),
            payoffs: None,
            scores: None,
            search: None,
            warnings: Vec::new(),
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Entry for one named agent; families are listed by bare name.
    pub fn agent_entry(table: &AgentTable, name: &str) -> Result<AgentEntry, AgentError> {
        if table.is_family(name) {
            let fam = table.families().find(|f| f.name == name).expect("family exists");
            let k0 = table.instantiate_family(name, 0)?;
            return Ok(AgentEntry {
                name: format!("{name}<{}>", fam.param),
                kind: AgentKind::Family,
                formula: Some(k0.written.to_string()),
                rank: Some(table.rank(&k0.name)?),
                parameter: Some(fam.param.clone()),
                source: Some(fam.body.trim().to_string()),
            });
        }
        if let Ok(def) = crate::agent::AgentSource::agent(table, name) {
            return Ok(AgentEntry {
                name: name.to_string(),
                kind: AgentKind::Modal,
                formula: Some(def.written.to_string()),
                rank: Some(table.rank(name)?),
                parameter: None,
                source: None,
            });
        }
        let source = table
            .syntactic_source(name)
            .map(str::to_string)
            .or_else(|| (name == "CliqueBot").then(|| crate::arena::CLIQUE_BOT_SOURCE.to_string()))
            .ok_or_else(|| AgentError::NoSuchAgent(name.to_string()))?;
        Ok(AgentEntry {
            name: name.to_string(),
            kind: AgentKind::Syntactic,
            formula: None,
            rank: None,
            parameter: None,
            source: Some(source),
        })
    }

    /// Every agent, family and syntactic agent declared in `table`.
    pub fn table_entries(table: &AgentTable) -> Result<Vec<AgentEntry>, AgentError> {
        let mut names: Vec<String> = table.agents().map(|d| d.name.clone()).collect();
        names.extend(table.families().map(|f| f.name.clone()));
        names.extend(table.syntactic_agents().map(|(n, _)| n.to_string()));
        names.sort();
        names.iter().map(|n| Self::agent_entry(table, n)).collect()
    }

    pub fn set_tournament(&mut self, t: &TournamentReport) {
        for (i, row) in t.matrix.iter().enumerate() {
            for m in &row[i..] {
                self.matches.push(MatchEntry::from_result(m));
            }
        }
        self.scores = Some(
            t.agents
                .iter()
                .zip(&t.scores)
                .map(|(a, s)| ScoreEntry {
                    agent: a.clone(),
                    score: rational(*s),
                })
                .collect(),
        );
    }

    pub fn set_search(
        &mut self,
        kind: &str,
        targets: &[String],
        bounds: &SearchBounds,
        outcome: &SearchOutcome,
    ) {
        self.search = Some(SearchEntry {
            kind: kind.to_string(),
            targets: targets.to_vec(),
            max_rank: bounds.max_rank,
            sub_agents: bounds.sub_agents.clone(),
            max_nodes: bounds.max_nodes,
            dedup: bounds.dedup,
            candidates: outcome.candidates,
            found: outcome.found.as_ref().map(|d| FoundEntry {
                name: d.name.clone(),
                formula: d.written.to_string(),
            }),
            premise_holds: None,
            violations: None,
        });
    }

    pub fn set_rank0(&mut self, max_nodes: usize, r: &Rank0Report) {
        self.search = Some(SearchEntry {
            kind: "rank0-theorem".to_string(),
            targets: vec!["FairBot".into(), "CooperateBot".into()],
            max_rank: 0,
            sub_agents: Vec::new(),
            max_nodes,
            dedup: false,
            candidates: r.checked,
            found: None,
            premise_holds: Some(r.premise_holds),
            violations: Some(r.violations.clone()),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::builtin_library;
    use crate::arena::play_names;
    use crate::parse::parse_formula;

    #[test]
    fn play_report_round_trips() {
        let lib = builtin_library();
        let m = play_names("PrudentBot", "CooperateBot", &lib, &Payoffs::default()).unwrap();
        let mut doc = ReportDocument::new(vec!["play".into(), "PrudentBot".into(), "CooperateBot".into()]);
        doc.agents
            .push(ReportDocument::agent_entry(&lib, "PrudentBot").unwrap());
        doc.agents
            .push(ReportDocument::agent_entry(&lib, "CooperateBot").unwrap());
        doc.matches.push(MatchEntry::from_result(&m));
        doc.payoffs = Some(PayoffEntry::from_payoffs(&Payoffs::default()));
        let json = doc.to_json();
        let back = ReportDocument::from_json(&json).unwrap();
        assert_eq!(back, doc);
        assert_eq!(back.to_json(), json);
        assert_eq!(back.schema_version, "1");

        let side = &back.matches[0].sides[0];
        assert_eq!(side.pair, "PrudentBot(CooperateBot)");
        assert_eq!(side.trace, vec![true, true, false, false]);
        assert!(side.trace.len() >= side.stabilization);
        parse_formula(&side.normal_form).unwrap();
        for a in &back.agents {
            parse_formula(a.formula.as_ref().unwrap()).unwrap();
        }
    }

    #[test]
    fn table_listing() {
        let lib = builtin_library();
        let entries = ReportDocument::table_entries(&lib).unwrap();
        assert_eq!(entries.len(), 8);
        let wfb = entries.iter().find(|e| e.kind == AgentKind::Family).unwrap();
        assert_eq!(wfb.name, "WaitFairBot<K>");
        assert_eq!(wfb.rank, Some(0));
        let clique = ReportDocument::agent_entry(&lib, "CliqueBot").unwrap();
        assert_eq!(clique.kind, AgentKind::Syntactic);
    }
}
