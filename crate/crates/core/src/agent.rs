//! Modal agents: definitions, agent files, validation and the builtin
//! library.
//!
//! An agent is a fully modalized formula over four kinds of atom, read
//! against an arbitrary opponent `Opp`:
//!
//! * `Opp(Self)`: the opponent's action against this agent,
//! * `Self(Opp)`: this agent's own action against the opponent,
//! * `Opp(A)`: the opponent's action against a simpler agent `A`,
//! * `A(Opp)`: a simpler agent's action against the opponent.
//!
//! References to other agents must be acyclic, which gives every agent a
//! rank: 0 with no references, else one more than the highest referenced
//! rank.

use std::borrow::Cow;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::formula::{render_path, Formula};
use crate::parse::{lex, ParseError, Parser, RawAtom, Tok};

/// Largest accepted family parameter.
pub const FAMILY_PARAM_CAP: u64 = 64;

/// Longest chain of agent references followed before giving up.
const MAX_REFERENCE_DEPTH: usize = 256;

pub const BUILTIN_SOURCE: &str = include_str!("../agents/builtin.agents");

const RESERVED: &[&str] = &["Self", "box", "provable", "agent", "syntactic", "true", "false"];

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TemplateAtom {
    OppVsSelf,
    SelfVsOpp,
    OppVs(String),
    VsOpp(String),
}

impl TemplateAtom {
    pub fn referenced(&self) -> Option<&str> {
        match self {
            TemplateAtom::OppVs(s) | TemplateAtom::VsOpp(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for TemplateAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TemplateAtom::OppVsSelf => f.write_str("Opp(Self)"),
            TemplateAtom::SelfVsOpp => f.write_str("Self(Opp)"),
            TemplateAtom::OppVs(s) => write!(f, "Opp({s})"),
            TemplateAtom::VsOpp(s) => write!(f, "{s}(Opp)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AgentError {
    #[error("syntax error at {0}")]
    Syntax(#[from] ParseError),
    #[error("line {line}: duplicate agent name `{name}`")]
    DuplicateAgent { name: String, line: usize },
    #[error("agent `{referenced_by}` references undeclared agent `{name}`")]
    UnknownAgent { name: String, referenced_by: String },
    #[error("unknown agent `{0}`")]
    NoSuchAgent(String),
    #[error("agent `{agent}` is not fully modalized: atoms outside every box at {}", .atoms.join(", "))]
    NotFullyModalized { agent: String, atoms: Vec<String> },
    #[error("cyclic reference between agents: {}", .cycle.join(" -> "))]
    CyclicReference { cycle: Vec<String> },
    #[error(
        "agent `{agent}`: bad atom shape `{atom}` (allowed: {opp}(Self), Self({opp}), {opp}(A), A({opp}))"
    )]
    BadAtomShape {
        agent: String,
        atom: String,
        opp: String,
    },
    #[error("`{0}` is reserved and cannot name an agent or opponent")]
    ReservedName(String),
    #[error("family parameter {k} for `{name}` exceeds the cap of {cap}")]
    ParameterTooLarge { name: String, k: u64, cap: u64 },
    #[error("`{0}` is not an agent family")]
    NotAFamily(String),
}

/// A modal agent, ready to be grounded against opponents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentDef {
    pub name: String,
    /// Family argument when this agent is an instance such as `WaitFairBot<2>`.
    pub param: Option<u64>,
    /// The formula as written, possibly with `provable<n>` sugar.
    pub written: Formula<TemplateAtom>,
    /// The sugar-free cooperation condition.
    pub template: Formula<TemplateAtom>,
    /// Agents named in the template, sorted and deduplicated.
    pub references: Vec<String>,
}

impl AgentDef {
    pub fn new(name: impl Into<String>, written: Formula<TemplateAtom>) -> Self {
        let template = desugar_provable(&written);
        let references = references_of(&template);
        AgentDef {
            name: name.into(),
            param: None,
            written,
            template,
            references,
        }
    }
}

fn references_of(f: &Formula<TemplateAtom>) -> Vec<String> {
    f.atoms()
        .into_iter()
        .filter_map(|a| a.referenced().map(str::to_string))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect()
}

/// A parameterized agent such as `WaitFairBot<K>`. The body is kept as text
/// and re-parsed with the parameter bound on each instantiation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentFamily {
    pub name: String,
    pub param: String,
    pub opponent: String,
    pub body: String,
    line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidatedAgent {
    pub def: AgentDef,
    pub rank: u32,
}

/// Rewrites `provable<n>(φ)` as `[](~box^n false -> φ)`, and `provable<0>(φ)`
/// as `[]φ`.
pub fn desugar_provable<A: Clone>(f: &Formula<A>) -> Formula<A> {
    match f {
        Formula::Top => Formula::Top,
        Formula::Bottom => Formula::Bottom,
        Formula::Atom(a) => Formula::Atom(a.clone()),
        Formula::Not(c) => Formula::not(desugar_provable(c)),
        Formula::Box(c) => Formula::boxed(desugar_provable(c)),
        Formula::And(l, r) => Formula::and(desugar_provable(l), desugar_provable(r)),
        Formula::Or(l, r) => Formula::or(desugar_provable(l), desugar_provable(r)),
        Formula::Implies(l, r) => Formula::implies(desugar_provable(l), desugar_provable(r)),
        Formula::Iff(l, r) => Formula::iff(desugar_provable(l), desugar_provable(r)),
        Formula::Provable(0, c) => Formula::boxed(desugar_provable(c)),
        Formula::Provable(n, c) => Formula::boxed(Formula::implies(
            Formula::not(Formula::boxes(*n, Formula::Bottom)),
            desugar_provable(c),
        )),
    }
}

/// Anything that can resolve agent names, including family instances.
pub trait AgentSource {
    fn agent(&self, name: &str) -> Result<Cow<'_, AgentDef>, AgentError>;
}

/// Named agents plus families and non-modal (syntactic) agents.
#[derive(Debug, Clone, Default)]
pub struct AgentTable {
    agents: BTreeMap<String, AgentDef>,
    families: BTreeMap<String, AgentFamily>,
    ranks: BTreeMap<String, u32>,
    syntactic: BTreeMap<String, String>,
    warnings: Vec<String>,
}

impl AgentSource for AgentTable {
    fn agent(&self, name: &str) -> Result<Cow<'_, AgentDef>, AgentError> {
        if let Some(def) = self.agents.get(name) {
            return Ok(Cow::Borrowed(def));
        }
        match split_instance(name) {
            Some((family, k)) => Ok(Cow::Owned(self.instantiate_family(family, k)?)),
            None => Err(AgentError::NoSuchAgent(name.to_string())),
        }
    }
}

/// `Name<k>` into its parts.
fn split_instance(name: &str) -> Option<(&str, u64)> {
    let (family, rest) = name.split_once('<')?;
    let k = rest.strip_suffix('>')?.parse().ok()?;
    Some((family, k))
}

impl AgentTable {
    pub fn agents(&self) -> impl Iterator<Item = &AgentDef> {
        self.agents.values()
    }

    pub fn families(&self) -> impl Iterator<Item = &AgentFamily> {
        self.families.values()
    }

    pub fn syntactic_agents(&self) -> impl Iterator<Item = (&str, &str)> {
        self.syntactic.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    pub fn syntactic_source(&self, name: &str) -> Option<&str> {
        self.syntactic.get(name).map(String::as_str)
    }

    /// Shadowing notices collected while loading.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn contains(&self, name: &str) -> bool {
        self.agent(name).is_ok()
    }

    pub fn is_family(&self, name: &str) -> bool {
        self.families.contains_key(name)
    }

    pub fn rank(&self, name: &str) -> Result<u32, AgentError> {
        if let Some(r) = self.ranks.get(name) {
            return Ok(*r);
        }
        let def = self.agent(name)?;
        rank_of(self, &def, &mut Vec::new())
    }

    pub fn instantiate_family(&self, name: &str, k: u64) -> Result<AgentDef, AgentError> {
        let family = self
            .families
            .get(name)
            .ok_or_else(|| AgentError::NotAFamily(name.to_string()))?;
        if k > FAMILY_PARAM_CAP {
            return Err(AgentError::ParameterTooLarge {
                name: name.to_string(),
                k,
                cap: FAMILY_PARAM_CAP,
            });
        }
        let instance = format!("{name}<{k}>");
        let toks = lex(&family.body, family.line)?;
        let mut parser = Parser::new(toks, Some((family.param.as_str(), k)));
        let raw = parser.formula()?;
        parser.expect_eof()?;
        let written = to_template(&instance, &family.opponent, &raw)?;
        let mut def = AgentDef::new(instance, written);
        def.param = Some(k);
        check_modalized(&def)?;
        Ok(def)
    }

    /// Checks `def` against this table: full modalization, resolvable and
    /// acyclic references. Computes the rank.
    pub fn validate_agent(&self, def: &AgentDef) -> Result<ValidatedAgent, AgentError> {
        check_modalized(def)?;
        for r in &def.references {
            if r == &def.name {
                return Err(AgentError::CyclicReference {
                    cycle: vec![def.name.clone(), def.name.clone()],
                });
            }
            if !self.contains(r) {
                return Err(AgentError::UnknownAgent {
                    name: r.clone(),
                    referenced_by: def.name.clone(),
                });
            }
        }
        let rank = rank_of(self, def, &mut Vec::new())?;
        Ok(ValidatedAgent {
            def: def.clone(),
            rank,
        })
    }

    /// Loads an agent file on top of `base`. Redefining an agent from `base`
    /// replaces it; a warning is recorded unless the definition is identical.
    pub fn load(base: Option<&AgentTable>, text: &str) -> Result<AgentTable, AgentError> {
        let mut table = base.cloned().unwrap_or_default();
        table.warnings.clear();
        let mut declared = BTreeSet::new();

        for (idx, line) in text.lines().enumerate() {
            let lineno = idx + 1;
            let toks = lex(line, lineno)?;
            if toks.len() == 1 {
                continue;
            }
            let item = parse_item(line, toks, lineno)?;
            let name = item.name().to_string();
            if !declared.insert(name.clone()) {
                return Err(AgentError::DuplicateAgent { name, line: lineno });
            }
            let shadowed = table.agents.contains_key(&name)
                || table.families.contains_key(&name)
                || table.syntactic.contains_key(&name);
            if shadowed && !table.same_definition(&item) {
                table
                    .warnings
                    .push(format!("line {lineno}: `{name}` shadows a builtin definition"));
            }
            table.agents.remove(&name);
            table.families.remove(&name);
            table.syntactic.remove(&name);
            match item {
                Item::Agent(def) => {
                    table.agents.insert(name, def);
                }
                Item::Family(fam) => {
                    table.families.insert(name, fam);
                }
                Item::Syntactic(_, source) => {
                    table.syntactic.insert(name, source);
                }
            }
        }
        table.finish()?;
        Ok(table)
    }

    fn same_definition(&self, item: &Item) -> bool {
        match item {
            Item::Agent(def) => self.agents.get(&def.name) == Some(def),
            Item::Family(fam) => self.families.get(&fam.name).is_some_and(|old| {
                old.param == fam.param && old.opponent == fam.opponent && old.body == fam.body
            }),
            Item::Syntactic(name, src) => self.syntactic.get(name) == Some(src),
        }
    }

    /// Validates every entry and caches ranks.
    fn finish(&mut self) -> Result<(), AgentError> {
        self.ranks.clear();
        for def in self.agents.values() {
            check_modalized(def)?;
            for r in &def.references {
                if !self.contains(r) {
                    return Err(AgentError::UnknownAgent {
                        name: r.clone(),
                        referenced_by: def.name.clone(),
                    });
                }
            }
        }
        for fam in self.families.values() {
            let def = self.instantiate_family(&fam.name, 0)?;
            for r in &def.references {
                if !self.contains(r) {
                    return Err(AgentError::UnknownAgent {
                        name: r.clone(),
                        referenced_by: fam.name.clone(),
                    });
                }
            }
            rank_of(self, &def, &mut Vec::new())?;
        }
        let mut ranks = BTreeMap::new();
        for def in self.agents.values() {
            ranks.insert(def.name.clone(), rank_of(self, def, &mut Vec::new())?);
        }
        self.ranks = ranks;
        Ok(())
    }
}

fn check_modalized(def: &AgentDef) -> Result<(), AgentError> {
    let bad = def.template.unguarded_atoms();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(AgentError::NotFullyModalized {
            agent: def.name.clone(),
            atoms: bad
                .into_iter()
                .map(|(path, atom)| format!("{} ({atom})", render_path(&path)))
                .collect(),
        })
    }
}

fn rank_of(source: &impl AgentSource, def: &AgentDef, stack: &mut Vec<String>) -> Result<u32, AgentError> {
    if let Some(pos) = stack.iter().position(|n| n == &def.name) {
        let mut cycle = stack[pos..].to_vec();
        cycle.push(def.name.clone());
        return Err(AgentError::CyclicReference { cycle });
    }
    if stack.len() >= MAX_REFERENCE_DEPTH {
        let mut cycle = stack.clone();
        cycle.push(def.name.clone());
        return Err(AgentError::CyclicReference { cycle });
    }
    stack.push(def.name.clone());
    let mut rank = 0;
    for r in &def.references {
        let sub = source.agent(r).map_err(|e| match e {
            AgentError::NoSuchAgent(name) => AgentError::UnknownAgent {
                name,
                referenced_by: def.name.clone(),
            },
            other => other,
        })?;
        rank = rank.max(1 + rank_of(source, &sub, stack)?);
    }
    stack.pop();
    Ok(rank)
}

enum Item {
    Agent(AgentDef),
    Family(AgentFamily),
    Syntactic(String, String),
}

impl Item {
    fn name(&self) -> &str {
        match self {
            Item::Agent(d) => &d.name,
            Item::Family(f) => &f.name,
            Item::Syntactic(n, _) => n,
        }
    }
}

fn check_name(name: &str) -> Result<(), AgentError> {
    if RESERVED.contains(&name) {
        Err(AgentError::ReservedName(name.to_string()))
    } else {
        Ok(())
    }
}

/// One agent-file line:
/// `agent NAME ("<" PARAM ">")? "(" OPP ")" ":=" formula` or
/// `syntactic NAME ":=" STRING`.
fn parse_item(line: &str, toks: Vec<(Tok, crate::parse::Pos)>, lineno: usize) -> Result<Item, AgentError> {
    let mut p = Parser::new(toks, None);
    let keyword = p.expect_ident("`agent` or `syntactic`")?;
    match keyword.as_str() {
        "agent" => {}
        "syntactic" => {
            let name = p.expect_ident("agent name")?;
            check_name(&name)?;
            p.expect(Tok::Assign)?;
            let source = match p.advance() {
                Tok::Str(s) => s,
                _ => return Err(p.error("expected a string literal", &["string literal"]).into()),
            };
            p.expect_eof()?;
            return Ok(Item::Syntactic(name, source));
        }
        other => {
            return Err(ParseError {
                line: lineno,
                column: 1,
                message: format!("unexpected name `{other}`"),
                expected: vec!["`agent`".into(), "`syntactic`".into()],
            }
            .into())
        }
    }
    let name = p.expect_ident("agent name")?;
    check_name(&name)?;
    let param = if *p.peek() == Tok::Lt {
        p.advance();
        let param = p.expect_ident("parameter name")?;
        p.expect(Tok::Gt)?;
        Some(param)
    } else {
        None
    };
    p.expect(Tok::LParen)?;
    let opponent = p.expect_ident("opponent name")?;
    check_name(&opponent)?;
    p.expect(Tok::RParen)?;
    let assign_col = p.pos().column;
    p.expect(Tok::Assign)?;

    match param {
        Some(param) => {
            let body: String = line.chars().skip(assign_col + 1).collect();
            // Parsed for syntax now; validated at the first instantiation.
            let toks = lex(&body, lineno)?;
            let mut bp = Parser::new(toks, Some((param.as_str(), 0)));
            bp.formula()?;
            bp.expect_eof()?;
            Ok(Item::Family(AgentFamily {
                name,
                param,
                opponent,
                body,
                line: lineno,
            }))
        }
        None => {
            let raw = p.formula()?;
            p.expect_eof()?;
            let written = to_template(&name, &opponent, &raw)?;
            Ok(Item::Agent(AgentDef::new(name, written)))
        }
    }
}

fn to_template(
    agent: &str,
    opponent: &str,
    raw: &Formula<RawAtom>,
) -> Result<Formula<TemplateAtom>, AgentError> {
    raw.try_map_atoms(&mut |a: &RawAtom| {
        let bad = || AgentError::BadAtomShape {
            agent: agent.to_string(),
            atom: a.to_string(),
            opp: opponent.to_string(),
        };
        let is_concrete = |n: &str| n != "Self" && n != opponent;
        if a.caller == opponent && a.callee == "Self" {
            Ok(TemplateAtom::OppVsSelf)
        } else if a.caller == "Self" && a.callee == opponent {
            Ok(TemplateAtom::SelfVsOpp)
        } else if a.caller == opponent && is_concrete(&a.callee) {
            Ok(TemplateAtom::OppVs(a.callee.clone()))
        } else if a.callee == opponent && is_concrete(&a.caller) {
            Ok(TemplateAtom::VsOpp(a.caller.clone()))
        } else {
            Err(bad())
        }
    })
}

/// Parses an agent file on top of the builtin library.
pub fn parse_agent_file(text: &str) -> Result<AgentTable, AgentError> {
    AgentTable::load(Some(&builtin_library()), text)
}

pub fn builtin_library() -> AgentTable {
    AgentTable::load(None, BUILTIN_SOURCE).expect("builtin agent library is valid")
}

/// Free-function form of [`AgentTable::validate_agent`].
pub fn validate_agent(def: &AgentDef, table: &AgentTable) -> Result<ValidatedAgent, AgentError> {
    table.validate_agent(def)
}

/// Free-function form of [`AgentTable::instantiate_family`], against the
/// builtin library.
pub fn instantiate_family(name: &str, k: u64) -> Result<AgentDef, AgentError> {
    builtin_library().instantiate_family(name, k)
}

/// Resolves `base` plus one extra agent that is not in the table, such as a
/// candidate produced by enumeration.
pub struct WithAgent<'a, S: ?Sized> {
    pub base: &'a S,
    pub extra: &'a AgentDef,
}

impl<S: AgentSource + ?Sized> AgentSource for WithAgent<'_, S> {
    fn agent(&self, name: &str) -> Result<Cow<'_, AgentDef>, AgentError> {
        if name == self.extra.name {
            Ok(Cow::Borrowed(self.extra))
        } else {
            self.base.agent(name)
        }
    }
}
