//! Modal formulas over an arbitrary atom type.
//!
//! The same tree is used for agent templates (atoms are positions such as
//! `Opp(Self)`), for freshly parsed text (atoms are raw `caller(callee)`
//! pairs) and for grounded equation systems (atoms are matchup variables).
//! Equality is structural throughout.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula<A> {
    Top,
    Bottom,
    Atom(A),
    Not(Box<Formula<A>>),
    And(Box<Formula<A>>, Box<Formula<A>>),
    Or(Box<Formula<A>>, Box<Formula<A>>),
    Implies(Box<Formula<A>>, Box<Formula<A>>),
    Iff(Box<Formula<A>>, Box<Formula<A>>),
    /// Provability: `[]φ`.
    Box(Box<Formula<A>>),
    /// `provable<n>(φ)`, provability in PA+n. Surface sugar produced by the
    /// parser; [`crate::agent::desugar_provable`] removes it.
    Provable(u32, Box<Formula<A>>),
}

/// One step on the way from the root of a formula to a subformula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PathStep {
    Left,
    Right,
    Under,
}

impl fmt::Display for PathStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PathStep::Left => "left",
            PathStep::Right => "right",
            PathStep::Under => "under",
        })
    }
}

/// Renders a path as `root.left.under...`.
pub fn render_path(path: &[PathStep]) -> String {
    let mut out = String::from("root");
    for step in path {
        out.push('.');
        out.push_str(&step.to_string());
    }
    out
}

impl<A> Formula<A> {
    pub fn atom(a: A) -> Self {
        Formula::Atom(a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Self) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Self, r: Self) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: Self, r: Self) -> Self {
        Formula::Or(Box::new(l), Box::new(r))
    }

    pub fn implies(l: Self, r: Self) -> Self {
        Formula::Implies(Box::new(l), Box::new(r))
    }

    pub fn iff(l: Self, r: Self) -> Self {
        Formula::Iff(Box::new(l), Box::new(r))
    }

    pub fn boxed(f: Self) -> Self {
        Formula::Box(Box::new(f))
    }

    /// `n` nested boxes around `f`; `boxes(0, f) == f`.
    pub fn boxes(n: u32, mut f: Self) -> Self {
        for _ in 0..n {
            f = Formula::boxed(f);
        }
        f
    }

    pub fn provable(level: u32, f: Self) -> Self {
        Formula::Provable(level, Box::new(f))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => 1,
            Formula::Not(c) | Formula::Box(c) | Formula::Provable(_, c) => 1 + c.size(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                1 + l.size() + r.size()
            }
        }
    }

    /// Maximum number of nested boxes along any root-to-leaf path. A
    /// `provable<n>(φ)` node counts as its expansion `[](~box^n false -> φ)`.
    pub fn modal_depth(&self) -> u32 {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => 0,
            Formula::Not(c) => c.modal_depth(),
            Formula::Box(c) => 1 + c.modal_depth(),
            Formula::Provable(n, c) => 1 + (*n).max(c.modal_depth()),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.modal_depth().max(r.modal_depth())
            }
        }
    }

    /// True iff every atom occurrence sits under at least one box.
    pub fn is_fully_modalized(&self) -> bool {
        self.unguarded_atoms().is_empty()
    }

    /// Paths to every atom occurrence that is not under a box.
    pub fn unguarded_atoms(&self) -> Vec<(Vec<PathStep>, &A)> {
        fn walk<'a, A>(f: &'a Formula<A>, path: &mut Vec<PathStep>, out: &mut Vec<(Vec<PathStep>, &'a A)>) {
            match f {
                Formula::Top | Formula::Bottom | Formula::Box(_) | Formula::Provable(..) => {}
                Formula::Atom(a) => out.push((path.clone(), a)),
                Formula::Not(c) => {
                    path.push(PathStep::Under);
                    walk(c, path, out);
                    path.pop();
                }
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                    path.push(PathStep::Left);
                    walk(l, path, out);
                    path.pop();
                    path.push(PathStep::Right);
                    walk(r, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut Vec::new(), &mut out);
        out
    }

    /// All atom occurrences, left to right.
    pub fn atoms(&self) -> Vec<&A> {
        fn walk<'a, A>(f: &'a Formula<A>, out: &mut Vec<&'a A>) {
            match f {
                Formula::Top | Formula::Bottom => {}
                Formula::Atom(a) => out.push(a),
                Formula::Not(c) | Formula::Box(c) | Formula::Provable(_, c) => walk(c, out),
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    pub fn has_atoms(&self) -> bool {
        !self.atoms().is_empty()
    }

    pub fn has_sugar(&self) -> bool {
        match self {
            Formula::Top | Formula::Bottom | Formula::Atom(_) => false,
            Formula::Provable(..) => true,
            Formula::Not(c) | Formula::Box(c) => c.has_sugar(),
            Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                l.has_sugar() || r.has_sugar()
            }
        }
    }

    /// Rebuilds the tree with every atom transformed by `f`.
    pub fn map_atoms<B>(&self, f: &mut impl FnMut(&A) -> B) -> Formula<B> {
        match self.try_map_atoms(&mut |a| Ok::<B, std::convert::Infallible>(f(a))) {
            Ok(g) => g,
            Err(never) => match never {},
        }
    }

    pub fn try_map_atoms<B, E>(&self, f: &mut impl FnMut(&A) -> Result<B, E>) -> Result<Formula<B>, E> {
        Ok(match self {
            Formula::Top => Formula::Top,
            Formula::Bottom => Formula::Bottom,
            Formula::Atom(a) => Formula::Atom(f(a)?),
            Formula::Not(c) => Formula::not(c.try_map_atoms(f)?),
            Formula::Box(c) => Formula::boxed(c.try_map_atoms(f)?),
            Formula::Provable(n, c) => Formula::provable(*n, c.try_map_atoms(f)?),
            Formula::And(l, r) => Formula::and(l.try_map_atoms(f)?, r.try_map_atoms(f)?),
            Formula::Or(l, r) => Formula::or(l.try_map_atoms(f)?, r.try_map_atoms(f)?),
            Formula::Implies(l, r) => Formula::implies(l.try_map_atoms(f)?, r.try_map_atoms(f)?),
            Formula::Iff(l, r) => Formula::iff(l.try_map_atoms(f)?, r.try_map_atoms(f)?),
        })
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Iff(..) => 1,
            Formula::Implies(..) => 2,
            Formula::Or(..) => 3,
            Formula::And(..) => 4,
            Formula::Not(_) | Formula::Box(_) => 5,
            Formula::Top | Formula::Bottom | Formula::Atom(_) | Formula::Provable(..) => 6,
        }
    }
}

impl<A: Clone + Eq + Hash> Formula<A> {
    /// Every distinct subtree rooted at a box, in post-order of first
    /// occurrence (inner boxes before the boxes containing them).
    pub fn box_subformulas(&self) -> Vec<Formula<A>> {
        fn walk<'a, A: Eq + Hash>(
            f: &'a Formula<A>,
            seen: &mut HashSet<&'a Formula<A>>,
            out: &mut Vec<&'a Formula<A>>,
        ) {
            match f {
                Formula::Top | Formula::Bottom | Formula::Atom(_) => {}
                Formula::Not(c) | Formula::Provable(_, c) => walk(c, seen, out),
                Formula::Box(c) => {
                    walk(c, seen, out);
                    if seen.insert(f) {
                        out.push(f);
                    }
                }
                Formula::And(l, r) | Formula::Or(l, r) | Formula::Implies(l, r) | Formula::Iff(l, r) => {
                    walk(l, seen, out);
                    walk(r, seen, out);
                }
            }
        }
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        walk(self, &mut seen, &mut out);
        out.into_iter().cloned().collect()
    }

    /// Replaces every atom bound in `bindings` by its bound formula.
    pub fn substitute(&self, bindings: &HashMap<A, Formula<A>>) -> Formula<A> {
        match self {
            Formula::Atom(a) => bindings.get(a).cloned().unwrap_or_else(|| self.clone()),
            Formula::Top => Formula::Top,
            Formula::Bottom => Formula::Bottom,
            Formula::Not(c) => Formula::not(c.substitute(bindings)),
            Formula::Box(c) => Formula::boxed(c.substitute(bindings)),
            Formula::Provable(n, c) => Formula::provable(*n, c.substitute(bindings)),
            Formula::And(l, r) => Formula::and(l.substitute(bindings), r.substitute(bindings)),
            Formula::Or(l, r) => Formula::or(l.substitute(bindings), r.substitute(bindings)),
            Formula::Implies(l, r) => Formula::implies(l.substitute(bindings), r.substitute(bindings)),
            Formula::Iff(l, r) => Formula::iff(l.substitute(bindings), r.substitute(bindings)),
        }
    }
}

impl<A: fmt::Display> Formula<A> {
    fn write_at(&self, min: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parens = self.precedence() < min;
        if parens {
            out.write_str("(")?;
        }
        match self {
            Formula::Top => out.write_str("true")?,
            Formula::Bottom => out.write_str("false")?,
            Formula::Atom(a) => write!(out, "{a}")?,
            Formula::Not(c) => {
                out.write_str("~")?;
                c.write_at(5, out)?;
            }
            Formula::Box(c) => {
                out.write_str("[]")?;
                c.write_at(5, out)?;
            }
            Formula::Provable(n, c) => {
                write!(out, "provable<{n}>(")?;
                c.write_at(0, out)?;
                out.write_str(")")?;
            }
            Formula::Iff(l, r) => binary(out, l, " <-> ", r, 1, 2)?,
            Formula::Implies(l, r) => binary(out, l, " -> ", r, 3, 2)?,
            Formula::Or(l, r) => binary(out, l, " | ", r, 3, 4)?,
            Formula::And(l, r) => binary(out, l, " & ", r, 4, 5)?,
        }
        if parens {
            out.write_str(")")?;
        }
        Ok(())
    }
}

fn binary<A: fmt::Display>(
    out: &mut fmt::Formatter<'_>,
    l: &Formula<A>,
    op: &str,
    r: &Formula<A>,
    left_min: u8,
    right_min: u8,
) -> fmt::Result {
    l.write_at(left_min, out)?;
    out.write_str(op)?;
    r.write_at(right_min, out)
}

/// Canonical ASCII rendering with minimal parentheses.
impl<A: fmt::Display> fmt::Display for Formula<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(0, f)
    }
}

pub fn render_formula<A: fmt::Display>(f: &Formula<A>) -> String {
    f.to_string()
}

/// Truth of `f` at world `world` of the ω-chain, where world `n` sees
/// exactly the worlds below it. `atom(a, m)` gives the atom's value at `m`.
///
/// This is the direct, memo-free definition; the solver uses an incremental
/// evaluation instead and tests compare the two.
pub fn eval_on_chain<A>(f: &Formula<A>, world: usize, atom: &impl Fn(&A, usize) -> bool) -> bool {
    match f {
        Formula::Top => true,
        Formula::Bottom => false,
        Formula::Atom(a) => atom(a, world),
        Formula::Not(c) => !eval_on_chain(c, world, atom),
        Formula::And(l, r) => eval_on_chain(l, world, atom) && eval_on_chain(r, world, atom),
        Formula::Or(l, r) => eval_on_chain(l, world, atom) || eval_on_chain(r, world, atom),
        Formula::Implies(l, r) => !eval_on_chain(l, world, atom) || eval_on_chain(r, world, atom),
        Formula::Iff(l, r) => eval_on_chain(l, world, atom) == eval_on_chain(r, world, atom),
        Formula::Box(c) => (0..world).all(|m| eval_on_chain(c, m, atom)),
        // provable<n>(φ) = [](~box^n false -> φ); box^n false holds below n.
        Formula::Provable(n, c) => (0..world)
            .filter(|&m| m >= *n as usize)
            .all(|m| eval_on_chain(c, m, atom)),
    }
}

/// Chain value of a formula without atoms.
pub fn eval_letterless<A>(f: &Formula<A>, world: usize) -> bool {
    eval_on_chain(f, world, &|_, _| {
        panic!("eval_letterless called on a formula with atoms")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type F = Formula<&'static str>;

    fn a() -> F {
        Formula::atom("a")
    }

    #[test]
    fn depth_examples() {
        assert_eq!(F::Top.modal_depth(), 0);
        assert_eq!(F::boxes(2, F::Bottom).modal_depth(), 2);
        // shape of the PrudentBot condition
        let prudent = F::and(
            F::boxed(a()),
            F::boxed(F::implies(F::not(F::boxed(F::Bottom)), a())),
        );
        assert_eq!(prudent.modal_depth(), 2);
        assert_eq!(F::provable(3, a()).modal_depth(), 4);
        assert_eq!(F::provable(0, F::boxed(F::boxed(a()))).modal_depth(), 3);
    }

    #[test]
    fn box_subformulas_examples() {
        assert_eq!(F::boxed(a()).box_subformulas(), vec![F::boxed(a())]);
        let twice = F::and(F::boxed(F::Bottom), F::boxed(F::Bottom));
        assert_eq!(twice.box_subformulas().len(), 1);
        let wait_fair = F::and(
            F::not(F::boxes(2, F::Bottom)),
            F::boxed(F::implies(F::not(F::boxed(F::Bottom)), a())),
        );
        assert_eq!(
            wait_fair.box_subformulas(),
            vec![
                F::boxed(F::Bottom),
                F::boxes(2, F::Bottom),
                F::boxed(F::implies(F::not(F::boxed(F::Bottom)), a())),
            ]
        );
    }

    #[test]
    fn full_modalization() {
        assert!(F::boxed(a()).is_fully_modalized());
        assert!(!a().is_fully_modalized());
        let mixed = F::and(F::boxed(a()), Formula::atom("b"));
        assert!(!mixed.is_fully_modalized());
        let bad = mixed.unguarded_atoms();
        assert_eq!(bad.len(), 1);
        assert_eq!(render_path(&bad[0].0), "root.right");
        assert!(F::provable(1, a()).is_fully_modalized());
        assert!(F::Top.is_fully_modalized());
    }

    #[test]
    fn substitution() {
        let mut b = HashMap::new();
        b.insert("a", F::Top);
        assert_eq!(F::boxed(a()).substitute(&b), F::boxed(F::Top));
        assert_eq!(a().substitute(&HashMap::new()), a());
        let mut b = HashMap::new();
        b.insert("a", F::Bottom);
        assert_eq!(
            F::and(a(), Formula::atom("b")).substitute(&b),
            F::and(F::Bottom, Formula::atom("b"))
        );
    }

    #[test]
    fn rendering() {
        assert_eq!(F::boxed(a()).to_string(), "[]a");
        assert_eq!(F::boxes(2, F::Bottom).to_string(), "[][]false");
        assert_eq!(F::and(F::Top, F::Bottom).to_string(), "true & false");
        assert_eq!(F::implies(F::implies(a(), a()), a()).to_string(), "(a -> a) -> a");
        assert_eq!(F::implies(a(), F::implies(a(), a())).to_string(), "a -> a -> a");
        assert_eq!(F::and(F::or(a(), a()), a()).to_string(), "(a | a) & a");
        assert_eq!(F::not(F::and(a(), a())).to_string(), "~(a & a)");
        assert_eq!(F::iff(a(), F::iff(a(), a())).to_string(), "a <-> (a <-> a)");
        assert_eq!(F::provable(2, F::not(a())).to_string(), "provable<2>(~a)");
    }

    #[test]
    fn chain_values() {
        // box^n false holds exactly below world n
        for n in 0..5u32 {
            for w in 0..8 {
                assert_eq!(eval_letterless(&F::boxes(n, F::Bottom), w), w < n as usize);
            }
        }
        let sugar = F::provable(2, F::Bottom);
        let expanded = F::boxed(F::implies(F::not(F::boxes(2, F::Bottom)), F::Bottom));
        for w in 0..8 {
            assert_eq!(eval_letterless(&sugar, w), eval_letterless(&expanded, w));
        }
    }
}
