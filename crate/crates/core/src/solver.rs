//! Grounding a matchup into a closed system of modal equations and solving
//! it on the ω-chain Kripke frame.
//!
//! World `n` of the chain sees exactly the worlds `m < n`, so `box^n false`
//! holds exactly at the worlds below `n`. A sentence is provable in PA+n iff
//! it holds at every world from `n` on, and its value in the standard model
//! is its eventual (stable) value on the chain.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::{AgentError, AgentSource, TemplateAtom};
use crate::formula::{eval_on_chain, Formula};

/// The proposition "`agent` cooperates when playing against `opponent`".
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MatchVar {
    pub agent: String,
    pub opponent: String,
}

impl MatchVar {
    pub fn new(agent: impl Into<String>, opponent: impl Into<String>) -> Self {
        MatchVar {
            agent: agent.into(),
            opponent: opponent.into(),
        }
    }

    pub fn flipped(&self) -> MatchVar {
        MatchVar::new(self.opponent.clone(), self.agent.clone())
    }
}

impl fmt::Display for MatchVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.agent, self.opponent)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    C,
    D,
}

impl Action {
    pub fn from_cooperates(c: bool) -> Action {
        if c {
            Action::C
        } else {
            Action::D
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::C => "C",
            Action::D => "D",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error("`{0}` is not a variable of the equation system")]
    UnknownPair(MatchVar),
    #[error("internal error: no stabilization after {worlds} worlds with {boxes} box subformulas")]
    InternalNonStabilization { worlds: usize, boxes: usize },
    #[error("internal error: equation for `{0}` is not fully modalized")]
    InternalUnguardedAtom(MatchVar),
}

/// One grounded, fully modalized equation per matchup variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquationSystem {
    pub roots: (String, String),
    pub equations: BTreeMap<MatchVar, Formula<MatchVar>>,
}

impl EquationSystem {
    pub fn variables(&self) -> impl Iterator<Item = &MatchVar> {
        self.equations.keys()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Distinct box subformulas across all right-hand sides.
    pub fn box_subformulas(&self) -> Vec<Formula<MatchVar>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for rhs in self.equations.values() {
            for b in rhs.box_subformulas() {
                if seen.insert(b.clone()) {
                    out.push(b);
                }
            }
        }
        out
    }
}

/// Grounds the matchup `x` vs `y`. The variable set is the least set holding
/// `(x, y)` and `(y, x)` and closed under: for `(a, b)` and every agent `s`
/// referenced by `a`, both `(b, s)` and `(s, b)`.
pub fn build_equation_system(
    x: &str,
    y: &str,
    source: &(impl AgentSource + ?Sized),
) -> Result<EquationSystem, SolverError> {
    let mut equations = BTreeMap::new();
    let mut queue = VecDeque::from([MatchVar::new(x, y), MatchVar::new(y, x)]);
    while let Some(var) = queue.pop_front() {
        if equations.contains_key(&var) {
            continue;
        }
        let def = source.agent(&var.agent)?;
        let (a, b) = (&var.agent, &var.opponent);
        let rhs = def.template.map_atoms(&mut |atom| match atom {
            TemplateAtom::OppVsSelf => MatchVar::new(b.clone(), a.clone()),
            TemplateAtom::SelfVsOpp => MatchVar::new(a.clone(), b.clone()),
            TemplateAtom::OppVs(s) => MatchVar::new(b.clone(), s.clone()),
            TemplateAtom::VsOpp(s) => MatchVar::new(s.clone(), b.clone()),
        });
        for s in &def.references {
            queue.push_back(MatchVar::new(b.clone(), s.clone()));
            queue.push_back(MatchVar::new(s.clone(), b.clone()));
        }
        queue.push_back(var.flipped());
        equations.insert(var, rhs);
    }
    Ok(EquationSystem {
        roots: (x.to_string(), y.to_string()),
        equations,
    })
}

/// Per-variable truth values on worlds `0..worlds()` of the chain. Values
/// beyond the last recorded world repeat the last one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionTrace {
    index: BTreeMap<MatchVar, usize>,
    rows: Vec<Vec<bool>>,
    box_rows: Vec<Vec<bool>>,
    stabilization: usize,
}

impl SolutionTrace {
    /// A candidate trace from explicit rows; all rows must share a length
    /// of at least one world.
    pub fn from_rows(rows: BTreeMap<MatchVar, Vec<bool>>) -> SolutionTrace {
        let worlds = rows.values().map(Vec::len).max().unwrap_or(0);
        assert!(worlds > 0 && rows.values().all(|r| r.len() == worlds));
        let mut index = BTreeMap::new();
        let mut out = Vec::new();
        for (i, (var, row)) in rows.into_iter().enumerate() {
            index.insert(var, i);
            out.push(row);
        }
        let stabilization = out.iter().map(|r| constant_from(r)).max().unwrap_or(0);
        SolutionTrace {
            index,
            rows: out,
            box_rows: Vec::new(),
            stabilization,
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &MatchVar> {
        self.index.keys()
    }

    /// Number of worlds evaluated.
    pub fn worlds(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// Least world from which every variable is constant.
    pub fn stabilization(&self) -> usize {
        self.stabilization
    }

    pub fn row(&self, var: &MatchVar) -> Result<&[bool], SolverError> {
        self.index
            .get(var)
            .map(|&i| self.rows[i].as_slice())
            .ok_or_else(|| SolverError::UnknownPair(var.clone()))
    }

    pub fn value(&self, var: &MatchVar, world: usize) -> Option<bool> {
        let row = self.row(var).ok()?;
        row.get(world).or(row.last()).copied()
    }

    pub fn stable_value(&self, var: &MatchVar) -> Result<bool, SolverError> {
        Ok(*self.row(var)?.last().expect("rows are non-empty"))
    }

    /// Least world from which `var` is constant.
    pub fn level(&self, var: &MatchVar) -> Result<usize, SolverError> {
        Ok(constant_from(self.row(var)?))
    }

    /// Truth of every box subformula per world, as tracked by the solver.
    pub fn box_rows(&self) -> &[Vec<bool>] {
        &self.box_rows
    }
}

fn constant_from(row: &[bool]) -> usize {
    let Some(&last) = row.last() else { return 0 };
    row.iter().rposition(|&v| v != last).map_or(0, |i| i + 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    Top,
    Bottom,
    Var(usize),
    Not(usize),
    And(usize, usize),
    Or(usize, usize),
    Implies(usize, usize),
    Iff(usize, usize),
    Box(usize),
}

/// Hash-consed DAG of all right-hand sides; children precede parents.
struct Dag {
    nodes: Vec<Node>,
    interned: HashMap<Node, usize>,
    boxes: Vec<usize>,
}

impl Dag {
    fn intern(&mut self, node: Node) -> usize {
        if let Some(&id) = self.interned.get(&node) {
            return id;
        }
        let id = self.nodes.len();
        self.nodes.push(node);
        self.interned.insert(node, id);
        if let Node::Box(_) = node {
            self.boxes.push(id);
        }
        id
    }

    fn add(&mut self, f: &Formula<MatchVar>, vars: &BTreeMap<&MatchVar, usize>) -> usize {
        let node = match f {
            Formula::Top => Node::Top,
            Formula::Bottom => Node::Bottom,
            Formula::Atom(v) => Node::Var(vars[v]),
            Formula::Not(c) => Node::Not(self.add(c, vars)),
            Formula::Box(c) => Node::Box(self.add(c, vars)),
            Formula::And(l, r) => Node::And(self.add(l, vars), self.add(r, vars)),
            Formula::Or(l, r) => Node::Or(self.add(l, vars), self.add(r, vars)),
            Formula::Implies(l, r) => Node::Implies(self.add(l, vars), self.add(r, vars)),
            Formula::Iff(l, r) => Node::Iff(self.add(l, vars), self.add(r, vars)),
            Formula::Provable(..) => {
                let plain = crate::agent::desugar_provable(f);
                return self.add(&plain, vars);
            }
        };
        self.intern(node)
    }
}

/// Evaluates the system world by world.
///
/// Each box subformula carries a flag "its body held at every world so
/// far"; flags only ever go from true to false. Variable values at a world
/// depend on the flags alone (every atom is under a box), so once a world
/// leaves all flags unchanged every later world is identical to it.
pub fn solve(system: &EquationSystem) -> Result<SolutionTrace, SolverError> {
    let vars: Vec<&MatchVar> = system.equations.keys().collect();
    let var_index: BTreeMap<&MatchVar, usize> = vars.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    for rhs in system.equations.values() {
        for atom in rhs.atoms() {
            if !var_index.contains_key(atom) {
                return Err(SolverError::UnknownPair(atom.clone()));
            }
        }
    }

    let mut dag = Dag {
        nodes: Vec::new(),
        interned: HashMap::new(),
        boxes: Vec::new(),
    };
    let roots: Vec<usize> = system
        .equations
        .values()
        .map(|rhs| dag.add(rhs, &var_index))
        .collect();
    let mut box_slot = vec![usize::MAX; dag.nodes.len()];
    for (slot, &id) in dag.boxes.iter().enumerate() {
        box_slot[id] = slot;
    }
    let cap = dag.boxes.len() + 2;

    let mut flags = vec![true; dag.boxes.len()];
    let mut rows: Vec<Vec<bool>> = vec![Vec::new(); vars.len()];
    let mut box_rows: Vec<Vec<bool>> = vec![Vec::new(); dag.boxes.len()];
    let mut partial: Vec<Option<bool>> = vec![None; dag.nodes.len()];
    let mut full = vec![false; dag.nodes.len()];
    let mut var_values = vec![false; vars.len()];

    for world in 0.. {
        if world >= cap {
            return Err(SolverError::InternalNonStabilization {
                worlds: world,
                boxes: dag.boxes.len(),
            });
        }
        // Pass 1: outside every box, only flags matter.
        for (id, node) in dag.nodes.iter().enumerate() {
            let p = &partial;
            partial[id] = match *node {
                Node::Top => Some(true),
                Node::Bottom => Some(false),
                Node::Var(_) => None,
                Node::Box(_) => Some(flags[box_slot[id]]),
                Node::Not(c) => p[c].map(|v| !v),
                Node::And(l, r) => p[l].zip(p[r]).map(|(a, b)| a && b),
                Node::Or(l, r) => p[l].zip(p[r]).map(|(a, b)| a || b),
                Node::Implies(l, r) => p[l].zip(p[r]).map(|(a, b)| !a || b),
                Node::Iff(l, r) => p[l].zip(p[r]).map(|(a, b)| a == b),
            };
        }
        for (i, &root) in roots.iter().enumerate() {
            var_values[i] =
                partial[root].ok_or_else(|| SolverError::InternalUnguardedAtom(vars[i].clone()))?;
            rows[i].push(var_values[i]);
        }
        // Pass 2: everything, now that this world's variables are known.
        for (id, node) in dag.nodes.iter().enumerate() {
            let v = &full;
            full[id] = match *node {
                Node::Top => true,
                Node::Bottom => false,
                Node::Var(i) => var_values[i],
                Node::Box(_) => flags[box_slot[id]],
                Node::Not(c) => !v[c],
                Node::And(l, r) => v[l] && v[r],
                Node::Or(l, r) => v[l] || v[r],
                Node::Implies(l, r) => !v[l] || v[r],
                Node::Iff(l, r) => v[l] == v[r],
            };
        }
        let mut changed = false;
        for (slot, &id) in dag.boxes.iter().enumerate() {
            box_rows[slot].push(flags[slot]);
            let Node::Box(body) = dag.nodes[id] else {
                unreachable!()
            };
            if flags[slot] && !full[body] {
                flags[slot] = false;
                changed = true;
            }
        }
        if !changed {
            // Record one repeat of the fixed world so the stable tail shows.
            for (i, row) in rows.iter_mut().enumerate() {
                row.push(var_values[i]);
            }
            for (slot, row) in box_rows.iter_mut().enumerate() {
                row.push(flags[slot]);
            }
            break;
        }
    }

    let index = vars.iter().enumerate().map(|(i, v)| ((*v).clone(), i)).collect();
    let stabilization = rows.iter().map(|r| constant_from(r)).max().unwrap_or(0);
    Ok(SolutionTrace {
        index,
        rows,
        box_rows,
        stabilization,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Verdict {
    pub action: Action,
    /// Least `n` such that PA+n proves the action.
    pub proof_level: usize,
}

impl Verdict {
    /// `PA` for level 0, else `PA+n`.
    pub fn system_name(&self) -> String {
        match self.proof_level {
            0 => "PA".to_string(),
            n => format!("PA+{n}"),
        }
    }
}

pub fn verdict(trace: &SolutionTrace, pair: &MatchVar) -> Result<Verdict, SolverError> {
    Ok(Verdict {
        action: Action::from_cooperates(trace.stable_value(pair)?),
        proof_level: trace.level(pair)?,
    })
}

/// A letterless formula whose chain values reproduce `pair`'s trace: one
/// disjunct `box^(n+1) false & ~box^n false` (true exactly at world `n`) per
/// cooperating world before the variable stabilizes, plus
/// `~box^d false` when the stable value is true.
pub fn normal_form(trace: &SolutionTrace, pair: &MatchVar) -> Result<Formula<MatchVar>, SolverError> {
    let row = trace.row(pair)?;
    let d = constant_from(row);
    let mut disjuncts = Vec::new();
    for (n, &v) in row.iter().enumerate().take(d) {
        if v {
            let exactly_here = if n == 0 {
                Formula::boxed(Formula::Bottom)
            } else {
                Formula::and(
                    Formula::boxes(n as u32 + 1, Formula::Bottom),
                    Formula::not(Formula::boxes(n as u32, Formula::Bottom)),
                )
            };
            disjuncts.push(exactly_here);
        }
    }
    if *row.last().expect("rows are non-empty") {
        disjuncts.push(if d == 0 {
            Formula::Top
        } else {
            Formula::not(Formula::boxes(d as u32, Formula::Bottom))
        });
    }
    Ok(disjuncts
        .into_iter()
        .reduce(Formula::or)
        .unwrap_or(Formula::Bottom))
}

/// Re-evaluates every right-hand side against `trace` at every recorded
/// world, using the direct chain semantics rather than the solver's flags.
pub fn verify_fixed_point(system: &EquationSystem, trace: &SolutionTrace) -> bool {
    let known = |v: &MatchVar| trace.value(v, 0).is_some();
    if !system
        .equations
        .iter()
        .all(|(var, rhs)| known(var) && rhs.atoms().into_iter().all(known))
    {
        return false;
    }
    let lookup = |atom: &MatchVar, m: usize| trace.value(atom, m).unwrap_or(false);
    system.equations.iter().all(|(var, rhs)| {
        (0..trace.worlds()).all(|n| eval_on_chain(rhs, n, &lookup) == trace.value(var, n).unwrap_or(false))
    })
}
