//! Modal agents for the one-shot Prisoner's Dilemma with source-code
//! exchange.
//!
//! An agent's cooperation condition is a fully modalized formula of
//! provability logic. Playing two agents against each other grounds their
//! conditions into a closed system of modal equations, which is solved by
//! evaluation on the ω-chain Kripke frame. From the solution we read each
//! side's action, the least `PA+n` that proves it, and a letterless normal
//! form.

pub mod agent;
pub mod arena;
pub mod cli;
pub mod formula;
pub mod kripke;
pub mod parse;
pub mod report;
pub mod solver;

pub use agent::{
    builtin_library, desugar_provable, instantiate_family, parse_agent_file, validate_agent, AgentDef,
    AgentError, AgentSource, AgentTable, TemplateAtom,
};
pub use formula::{render_formula, Formula};
pub use kripke::{height_semantics_crosscheck, Frame, FrameError};
pub use parse::{parse_formula, ParseError, RawAtom};
pub use solver::{
    build_equation_system, normal_form, solve, verdict, verify_fixed_point, Action, EquationSystem, MatchVar,
    SolutionTrace, SolverError, Verdict,
};
