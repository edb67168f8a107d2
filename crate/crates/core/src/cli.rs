//! The `modalpd` command line.
//!
//! Exit codes: 0 success, 1 input or validation error, 2 internal error.

use std::fmt::Write as _;
use std::fs;

use clap::{Args, Parser, Subcommand};

use crate::agent::{builtin_library, parse_agent_file, AgentError, AgentTable};
use crate::arena::{
    check_rank0_theorem, find_distinguisher, find_exploiter, play_names, round_robin, ArenaError,
    MatchResult, Payoffs, SearchBounds, SearchOutcome,
};
use crate::report::{rational, MatchEntry, PayoffEntry, ReportDocument};
use crate::solver::SolverError;

#[derive(Debug, Parser)]
#[command(
    name = "modalpd",
    version,
    about = "Modal agents in the one-shot Prisoner's Dilemma"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and validate an agent file; list agents with ranks and formulas.
    Check {
        file: String,
        #[arg(long)]
        json: bool,
    },
    /// Play two agents against each other.
    Play {
        x: String,
        y: String,
        #[command(flatten)]
        common: Common,
        /// Show each side's world-by-world trace.
        #[arg(long)]
        trace: bool,
        /// Show each side's letterless normal form.
        #[arg(long = "normal-form")]
        normal_form: bool,
    },
    /// Round-robin tournament, self-matches included.
    Tournament {
        /// Agent file; the builtin library when omitted.
        file: Option<String>,
        /// Comma-separated agent names; defaults to every modal agent in the file.
        #[arg(long, value_delimiter = ',')]
        roster: Vec<String>,
        #[arg(long)]
        json: bool,
        #[arg(long, default_value = "5,3,1,0")]
        payoffs: String,
    },
    /// Bounded searches over enumerated modal agents.
    Search {
        #[command(subcommand)]
        kind: SearchKind,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// Agent file loaded on top of the builtin library.
    #[arg(long)]
    pub file: Option<String>,
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value = "5,3,1,0")]
    pub payoffs: String,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[arg(long)]
    pub file: Option<String>,
    #[arg(long)]
    pub json: bool,
    #[arg(long = "max-nodes", default_value_t = 7)]
    pub max_nodes: usize,
    #[arg(long = "max-rank", default_value_t = 1)]
    pub max_rank: u32,
    #[arg(
        long = "sub-agents",
        value_delimiter = ',',
        default_value = "CooperateBot,DefectBot,FairBot"
    )]
    pub sub_agents: Vec<String>,
    /// Skip agents whose verdicts against the probe set repeat an earlier agent's.
    #[arg(long)]
    pub dedup: bool,
}

impl BoundArgs {
    fn bounds(&self) -> SearchBounds {
        SearchBounds {
            max_rank: self.max_rank,
            sub_agents: self.sub_agents.clone(),
            max_nodes: self.max_nodes,
            dedup: self.dedup,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum SearchKind {
    /// Find an agent that defects against X while X cooperates.
    Exploiter {
        x: String,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Find an agent that treats X and Y differently.
    Distinguisher {
        x: String,
        y: String,
        #[command(flatten)]
        bounds: BoundArgs,
    },
    /// Check that rank-0 agents provably cooperating with FairBot also
    /// provably cooperate with CooperateBot.
    #[command(name = "rank0-theorem")]
    Rank0Theorem {
        #[command(flatten)]
        bounds: BoundArgs,
    },
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Internal(String),
}

impl From<AgentError> for Failure {
    fn from(e: AgentError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<SolverError> for Failure {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Agent(a) => a.into(),
            SolverError::UnknownPair(_) => Failure::Input(e.to_string()),
            SolverError::InternalNonStabilization { .. } | SolverError::InternalUnguardedAtom(_) => {
                Failure::Internal(e.to_string())
            }
        }
    }
}

impl From<ArenaError> for Failure {
    fn from(e: ArenaError) -> Self {
        match e {
            ArenaError::Agent(a) => a.into(),
            ArenaError::Solver(s) => s.into(),
            ArenaError::FixedPointViolation(..) => Failure::Internal(e.to_string()),
            other => Failure::Input(other.to_string()),
        }
    }
}

/// Runs the CLI on `args` (without the program name).
pub fn run(args: &[String]) -> Outcome {
    let argv = std::iter::once("modalpd".to_string()).chain(args.iter().cloned());
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: 1,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                }
            };
        }
    };
    let mut out = String::new();
    let mut err = String::new();
    let code = match dispatch(cli.command, args, &mut out, &mut err) {
        Ok(()) => 0,
        Err(Failure::Input(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Internal(m)) => {
            let _ = writeln!(err, "{m}");
            2
        }
    };
    Outcome {
        code,
        stdout: out,
        stderr: err,
    }
}

fn load_table(file: Option<&str>) -> Result<AgentTable, Failure> {
    match file {
        None => Ok(builtin_library()),
        Some(path) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read `{path}`: {e}")))?;
            Ok(parse_agent_file(&text)?)
        }
    }
}

fn parse_payoffs(text: &str, warnings: &mut Vec<String>) -> Result<Payoffs, Failure> {
    let p: Payoffs = text.parse()?;
    warnings.extend(p.warnings());
    Ok(p)
}

fn dispatch(cmd: Command, args: &[String], out: &mut String, err: &mut String) -> Result<(), Failure> {
    let mut doc = ReportDocument::new(args.to_vec());
    match cmd {
        Command::Check { file, json } => {
            let table = load_table(Some(&file))?;
            doc.warnings = table.warnings().to_vec();
            doc.agents = ReportDocument::table_entries(&table)?;
            if json {
                out.push_str(&doc.to_json());
            } else {
                for w in &doc.warnings {
                    let _ = writeln!(err, "warning: {w}");
                }
                let width = doc.agents.iter().map(|a| a.name.len()).max().unwrap_or(4).max(5);
                let _ = writeln!(out, "{:width$}  {:4}  formula", "agent", "rank");
                for a in &doc.agents {
                    let rank = a.rank.map_or("-".to_string(), |r| r.to_string());
                    let body = match (&a.parameter, &a.source, &a.formula) {
                        (Some(_), Some(src), _) => src.clone(),
                        (None, Some(src), None) => format!("syntactic {src:?}"),
                        (_, _, Some(f)) => f.clone(),
                        _ => String::new(),
                    };
                    let _ = writeln!(out, "{:width$}  {:4}  {}", a.name, rank, body);
                }
                let _ = writeln!(out, "{} agents OK", doc.agents.len());
            }
        }
        Command::Play {
            x,
            y,
            common,
            trace,
            normal_form,
        } => {
            let table = load_table(common.file.as_deref())?;
            doc.warnings = table.warnings().to_vec();
            let payoffs = parse_payoffs(&common.payoffs, &mut doc.warnings)?;
            let m = play_names(&x, &y, &table, &payoffs)?;
            if common.json {
                doc.agents.push(ReportDocument::agent_entry(&table, &x)?);
                if y != x {
                    doc.agents.push(ReportDocument::agent_entry(&table, &y)?);
                }
                doc.payoffs = Some(PayoffEntry::from_payoffs(&payoffs));
                doc.matches.push(MatchEntry::from_result(&m));
                out.push_str(&doc.to_json());
            } else {
                for w in &doc.warnings {
                    let _ = writeln!(err, "warning: {w}");
                }
                write_match(out, &m, trace, normal_form);
            }
        }
        Command::Tournament {
            file,
            roster,
            json,
            payoffs,
        } => {
            let table = load_table(file.as_deref())?;
            doc.warnings = table.warnings().to_vec();
            let payoffs = parse_payoffs(&payoffs, &mut doc.warnings)?;
            let roster = if roster.is_empty() {
                table.agents().map(|d| d.name.clone()).collect()
            } else {
                roster
            };
            let report = round_robin(&roster, &table, &payoffs)?;
            if json {
                for name in &roster {
                    doc.agents.push(ReportDocument::agent_entry(&table, name)?);
                }
                doc.payoffs = Some(PayoffEntry::from_payoffs(&payoffs));
                doc.set_tournament(&report);
                out.push_str(&doc.to_json());
            } else {
                for w in &doc.warnings {
                    let _ = writeln!(err, "warning: {w}");
                }
                let width = roster.iter().map(String::len).max().unwrap_or(0);
                let _ = write!(out, "{:width$}", "");
                for (j, _) in roster.iter().enumerate() {
                    let _ = write!(out, "  {:>3}", j + 1);
                }
                let _ = writeln!(out, "  score");
                for (i, row) in report.matrix.iter().enumerate() {
                    let _ = write!(out, "{:width$}", roster[i]);
                    for m in row {
                        let _ = write!(out, "  {:>3}", m.actions.0.to_string());
                    }
                    let _ = writeln!(out, "  {}", rational(report.scores[i]));
                }
                let _ = writeln!(out);
                for (j, name) in roster.iter().enumerate() {
                    let _ = writeln!(out, "{:>3} = {name}", j + 1);
                }
            }
        }
        Command::Search { kind } => {
            let (targets, b, kind_name) = match &kind {
                SearchKind::Exploiter { x, bounds } => (vec![x.clone()], bounds, "exploiter"),
                SearchKind::Distinguisher { x, y, bounds } => {
                    (vec![x.clone(), y.clone()], bounds, "distinguisher")
                }
                SearchKind::Rank0Theorem { bounds } => (Vec::new(), bounds, "rank0-theorem"),
            };
            let table = load_table(b.file.as_deref())?;
            doc.warnings = table.warnings().to_vec();
            let bounds = b.bounds();
            if let SearchKind::Rank0Theorem { .. } = kind {
                let r = check_rank0_theorem(bounds.max_nodes, &table)?;
                doc.set_rank0(bounds.max_nodes, &r);
                if !b.json {
                    let _ = writeln!(
                        out,
                        "{} violations / {} agents ({} provably cooperate with FairBot)",
                        r.violations.len(),
                        r.checked,
                        r.premise_holds
                    );
                    for v in &r.violations {
                        let _ = writeln!(out, "  violation: {v}");
                    }
                }
            } else {
                let outcome = match kind {
                    SearchKind::Exploiter { .. } => find_exploiter(&targets[0], &bounds, &table)?,
                    _ => find_distinguisher(&targets[0], &targets[1], &bounds, &table)?,
                };
                doc.set_search(kind_name, &targets, &bounds, &outcome);
                if !b.json {
                    write_search(out, &outcome);
                }
            }
            if b.json {
                out.push_str(&doc.to_json());
            } else {
                for w in &doc.warnings {
                    let _ = writeln!(err, "warning: {w}");
                }
            }
        }
    }
    Ok(())
}

fn provability(level: Option<usize>) -> String {
    match level {
        None => "by source comparison".to_string(),
        Some(0) => "PA ⊢".to_string(),
        Some(n) => format!("PA+{n} ⊢"),
    }
}

fn write_match(out: &mut String, m: &MatchResult, trace: bool, normal_form: bool) {
    let (a, b) = &m.agents;
    let levels = if m.proof_levels.0 == m.proof_levels.1 {
        format!("{} both", provability(m.proof_levels.0))
    } else {
        format!(
            "{} {a}, {} {b}",
            provability(m.proof_levels.0),
            provability(m.proof_levels.1)
        )
    };
    let _ = writeln!(out, "{a} vs {b}: {} {}, {levels}", m.actions.0, m.actions.1);
    let sides = [
        (a, b, m.actions.0, m.proof_levels.0, m.payoffs.0),
        (b, a, m.actions.1, m.proof_levels.1, m.payoffs.1),
    ];
    for (i, (x, y, act, level, pay)) in sides.into_iter().enumerate() {
        let _ = writeln!(
            out,
            "  {} [{x}({y})={act}]   payoff {}",
            provability(level),
            rational(pay)
        );
        let Some(detail) = &m.detail else { continue };
        let side = if i == 0 { &detail.0 } else { &detail.1 };
        if trace {
            let shown = (level.unwrap_or(0) + 2).min(side.trace.len());
            let bits: Vec<&str> = side.trace[..shown]
                .iter()
                .map(|&v| if v { "T" } else { "F" })
                .collect();
            let _ = writeln!(out, "    trace {}: {}, ...", side.pair, bits.join(","));
        }
        if normal_form {
            let _ = writeln!(out, "    normal form {}: {}", side.pair, side.normal_form);
        }
    }
}

fn write_search(out: &mut String, outcome: &SearchOutcome) {
    match &outcome.found {
        None => {
            let _ = writeln!(out, "none found ({} candidates)", outcome.candidates);
        }
        Some(def) => {
            let _ = writeln!(
                out,
                "found {} := {} (candidate {} of the enumeration)",
                def.name, def.written, outcome.candidates
            );
        }
    }
}
