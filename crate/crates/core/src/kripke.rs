//! Finite Kripke frames for GL and a cross-check of the chain reduction.
//!
//! On a finite transitive irreflexive frame, a letterless formula holds at a
//! world iff it holds at the world of the ω-chain whose index is the
//! world's height (length of the longest path leaving it). The solver only
//! ever evaluates on the chain; [`height_semantics_crosscheck`] compares the
//! two directly.

use thiserror::Error;

use crate::formula::{eval_letterless, Formula};

/// Largest frame accepted by the cross-check.
pub const MAX_FRAME_WORLDS: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrameError {
    #[error("frame has {0} worlds; at most {MAX_FRAME_WORLDS} are supported")]
    TooLarge(usize),
    #[error("world {0} sees itself")]
    Reflexive(usize),
    #[error("not transitive: {0} -> {1} -> {2} without {0} -> {2}")]
    NotTransitive(usize, usize, usize),
    #[error("edge {0} -> {1} leaves the frame")]
    EdgeOutOfRange(usize, usize),
    #[error("formula has atoms; only letterless formulas can be checked")]
    NotLetterless,
}

/// A finite frame given by its accessibility relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    sees: Vec<Vec<bool>>,
}

impl Frame {
    pub fn new(worlds: usize, edges: &[(usize, usize)]) -> Result<Frame, FrameError> {
        if worlds > MAX_FRAME_WORLDS {
            return Err(FrameError::TooLarge(worlds));
        }
        let mut sees = vec![vec![false; worlds]; worlds];
        for &(a, b) in edges {
            if a >= worlds || b >= worlds {
                return Err(FrameError::EdgeOutOfRange(a, b));
            }
            sees[a][b] = true;
        }
        let frame = Frame { sees };
        frame.check()?;
        Ok(frame)
    }

    /// Frame with worlds `0..n` where `i` sees every `j < i`.
    pub fn chain(n: usize) -> Result<Frame, FrameError> {
        let edges: Vec<_> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
        Frame::new(n, &edges)
    }

    fn check(&self) -> Result<(), FrameError> {
        let n = self.len();
        for a in 0..n {
            if self.sees[a][a] {
                return Err(FrameError::Reflexive(a));
            }
            for b in 0..n {
                if !self.sees[a][b] {
                    continue;
                }
                for c in 0..n {
                    if self.sees[b][c] && !self.sees[a][c] {
                        return Err(FrameError::NotTransitive(a, b, c));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.sees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sees.is_empty()
    }

    pub fn sees(&self, a: usize, b: usize) -> bool {
        self.sees[a][b]
    }

    /// Length of the longest path leaving `w`. Transitive and irreflexive
    /// implies acyclic, so this terminates.
    pub fn height(&self, w: usize) -> usize {
        (0..self.len())
            .filter(|&v| self.sees[w][v])
            .map(|v| 1 + self.height(v))
            .max()
            .unwrap_or(0)
    }

    /// Standard Kripke truth of a letterless formula at `w`.
    pub fn holds<A>(&self, f: &Formula<A>, w: usize) -> bool {
        match f {
            Formula::Top => true,
            Formula::Bottom => false,
            Formula::Atom(_) => panic!("Frame::holds called on a formula with atoms"),
            Formula::Not(c) => !self.holds(c, w),
            Formula::And(l, r) => self.holds(l, w) && self.holds(r, w),
            Formula::Or(l, r) => self.holds(l, w) || self.holds(r, w),
            Formula::Implies(l, r) => !self.holds(l, w) || self.holds(r, w),
            Formula::Iff(l, r) => self.holds(l, w) == self.holds(r, w),
            Formula::Box(c) => (0..self.len()).all(|v| !self.sees[w][v] || self.holds(c, v)),
            Formula::Provable(n, c) => {
                let guard: Formula<A> = Formula::boxes(*n, Formula::Bottom);
                (0..self.len()).all(|v| !self.sees[w][v] || self.holds(&guard, v) || self.holds(c, v))
            }
        }
    }
}

/// True iff at every world of `frame`, `f` has the same value as on the
/// chain at that world's height.
pub fn height_semantics_crosscheck<A>(f: &Formula<A>, frame: &Frame) -> Result<bool, FrameError> {
    if f.has_atoms() {
        return Err(FrameError::NotLetterless);
    }
    frame.check()?;
    Ok((0..frame.len()).all(|w| frame.holds(f, w) == eval_letterless(f, frame.height(w))))
}
