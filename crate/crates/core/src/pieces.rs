//! Piece and essential-piece machinery: piece tests, maximal piece
//! prefixes, minimal piece decompositions, piece distance, and supports.
//!
//! Two oracles are provided. [`PieceIndex`] works on an explicit reduced
//! labelled graph via the fiber product of the graph with itself (walks are
//! deterministic in a reduced graph, so occurrence sets are start-vertex
//! sets). [`ClassicalPieces`] works word-level on a symmetrized relator
//! family kept run-length encoded, which is what makes the exponential
//! relator families tractable.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::graph::{validate_reduced, AutGroup, LabelledGraph, PathSpec, Step};
use crate::words::{cyclic_reduce, is_proper_power, CyclicWord, Letter, Presentation, Word, WordError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PieceError {
    #[error("graph labelling is not reduced (vertex {vertex}, label sym {sym})")]
    NotReduced { vertex: u32, sym: u32 },
    #[error("search exceeded the configured budget")]
    TooLarge,
    #[error(transparent)]
    Word(#[from] WordError),
}

impl From<crate::graph::GraphError> for PieceError {
    fn from(e: crate::graph::GraphError) -> Self {
        match e {
            crate::graph::GraphError::TooLarge => PieceError::TooLarge,
            crate::graph::GraphError::Parse(p) => panic!("unexpected parse error: {p}"),
        }
    }
}

// ---------------------------------------------------------------------------
// Graph-level oracle
// ---------------------------------------------------------------------------

/// Piece tables for a reduced labelled graph.
///
/// In a reduced graph two equally-labelled walks either coincide or differ
/// in every step, so an occurrence is identified with its start vertex and
/// the fiber product with a path collapses to tracking the surviving start
/// set.
pub struct PieceIndex {
    aut: AutGroup,
    orbit: Vec<u32>,
}

impl PieceIndex {
    pub fn automorphisms(&self) -> &AutGroup {
        &self.aut
    }

    pub fn vertex_orbit(&self, v: u32) -> u32 {
        self.orbit[v as usize]
    }
}

pub fn build_piece_index(g: &LabelledGraph) -> Result<PieceIndex, PieceError> {
    let verdict = validate_reduced(g);
    if let Some((vertex, letter)) = verdict.witness {
        return Err(PieceError::NotReduced { vertex, sym: letter.sym });
    }
    let aut = crate::graph::automorphism_group(g)?;
    let orbit = aut.vertex_orbits(g.vertex_count());
    Ok(PieceIndex { aut, orbit })
}

impl PieceIndex {
    /// Is the path (given by its steps from `start`) an (essential) piece?
    pub fn is_piece(&self, g: &LabelledGraph, p: &PathSpec, essential: bool) -> bool {
        if p.is_empty() {
            return false;
        }
        self.max_piece_prefix(g, &p.steps, essential) == p.steps.len()
    }

    /// Largest `n` such that the first `n` steps form an (essential) piece.
    ///
    /// Both properties are closed under subpaths on reduced graphs, so the
    /// answer is a prefix length.
    pub fn max_piece_prefix(&self, g: &LabelledGraph, steps: &[Step], essential: bool) -> usize {
        // Survivors: start vertices whose deterministic walk has matched all
        // steps so far, with their current positions.
        let mut survivors: Vec<(u32, u32)> =
            (0..g.vertex_count() as u32).map(|v| (v, v)).collect();
        let mut best = 0;
        for (i, &step) in steps.iter().enumerate() {
            let letter = g.step_label(step);
            survivors = survivors
                .into_iter()
                .filter_map(|(s, at)| g.step_unique(at, letter).map(|st| (s, g.step_target(st))))
                .collect();
            let ok = if essential {
                let mut orbits = BTreeSet::new();
                for (s, _) in &survivors {
                    orbits.insert(self.orbit[*s as usize]);
                }
                orbits.len() >= 2
            } else {
                survivors.len() >= 2
            };
            if ok {
                best = i + 1;
            } else {
                break;
            }
        }
        best
    }
}

/// One piece of a decomposition: a subpath of the decomposed path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecompPiece {
    pub path: PathSpec,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Decomposition {
    Decomposed {
        count: usize,
        pieces: Vec<DecompPiece>,
        /// Rotation offset used for closed paths.
        rotation: usize,
    },
    /// Some edge of the path lies on no piece.
    NotDecomposable { offending: Step },
}

impl Decomposition {
    pub fn count(&self) -> Option<usize> {
        match self {
            Decomposition::Decomposed { count, .. } => Some(*count),
            Decomposition::NotDecomposable { .. } => None,
        }
    }
}

fn greedy_open(
    idx: &PieceIndex,
    g: &LabelledGraph,
    start: u32,
    steps: &[Step],
    essential: bool,
) -> Decomposition {
    let mut pieces = Vec::new();
    let mut pos = 0;
    let mut at = start;
    while pos < steps.len() {
        let n = idx.max_piece_prefix(g, &steps[pos..], essential);
        if n == 0 {
            return Decomposition::NotDecomposable { offending: steps[pos] };
        }
        let segment = steps[pos..pos + n].to_vec();
        pieces.push(DecompPiece { path: PathSpec { start: at, steps: segment } });
        for &s in &steps[pos..pos + n] {
            at = g.step_target(s);
        }
        pos += n;
    }
    Decomposition::Decomposed { count: pieces.len(), pieces, rotation: 0 }
}

/// Minimal number of (essential) pieces whose concatenation is `p`.
///
/// Piece sets are closed under subpaths, so greedy maximal stepping is an
/// optimal interval cover; closed paths are minimized over all rotations.
pub fn min_piece_decomposition(
    g: &LabelledGraph,
    idx: &PieceIndex,
    p: &PathSpec,
    essential: bool,
) -> Decomposition {
    assert!(g.path_is_valid(p), "path not valid in graph");
    if p.is_empty() {
        return Decomposition::Decomposed { count: 0, pieces: Vec::new(), rotation: 0 };
    }
    let closed = g.path_end(p) == p.start;
    if !closed {
        return greedy_open(idx, g, p.start, &p.steps, essential);
    }
    // Closed path: any single step off every piece makes it not
    // decomposable in any rotation.
    for (i, &s) in p.steps.iter().enumerate() {
        if idx.max_piece_prefix(g, &p.steps[i..i + 1], essential) == 0 {
            return Decomposition::NotDecomposable { offending: s };
        }
    }
    let n = p.steps.len();
    let mut best: Option<Decomposition> = None;
    let mut best_count = usize::MAX;
    let mut at = p.start;
    for rot in 0..n {
        let rotated: Vec<Step> =
            p.steps[rot..].iter().chain(p.steps[..rot].iter()).copied().collect();
        if let Decomposition::Decomposed { count, pieces, .. } =
            greedy_open(idx, g, at, &rotated, essential)
        {
            if count < best_count {
                best_count = count;
                best = Some(Decomposition::Decomposed { count, pieces, rotation: rot });
            }
        }
        at = g.step_target(p.steps[rot]);
    }
    best.expect("closed path with every edge on a piece must decompose")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PieceDistance {
    Finite(usize),
    Infinite,
}

/// Piece distance on a cycle component: least number of (essential) pieces
/// concatenating to one of the two arcs from `x` to `y`.
pub fn piece_distance(
    g: &LabelledGraph,
    idx: &PieceIndex,
    x: u32,
    y: u32,
    essential: bool,
) -> PieceDistance {
    assert_eq!(g.component_of(x), g.component_of(y), "vertices on different components");
    if x == y {
        return PieceDistance::Finite(0);
    }
    // Walk the cycle forward from x to y, and backward.
    let arcs = cycle_arcs(g, x, y);
    let mut best = PieceDistance::Infinite;
    for arc in arcs {
        if let Decomposition::Decomposed { count, .. } =
            greedy_open(idx, g, x, &arc, essential)
        {
            match best {
                PieceDistance::Finite(b) if b <= count => {}
                _ => best = PieceDistance::Finite(count),
            }
        }
    }
    best
}

/// The two arcs from `x` to `y` along a cycle component (as step lists).
fn cycle_arcs(g: &LabelledGraph, x: u32, y: u32) -> Vec<Vec<Step>> {
    let hs = g.half_edges(x);
    assert_eq!(hs.len(), 2, "piece_distance requires a cycle component");
    let mut arcs = Vec::new();
    for h in hs {
        let mut steps = Vec::new();
        let mut step = Step { edge: h.edge, dir: h.dir };
        let mut at = x;
        loop {
            steps.push(step);
            let prev = at;
            at = g.step_target(step);
            if at == y {
                arcs.push(steps);
                break;
            }
            if at == x {
                // Came back around without meeting y; only possible if y not
                // on this cycle, which the component check excludes.
                unreachable!("cycle arc wrapped past start");
            }
            let next = g
                .half_edges(at)
                .iter()
                .map(|h2| Step { edge: h2.edge, dir: h2.dir })
                .find(|s| !(s.edge == step.edge && g.step_target(*s) == prev))
                .expect("cycle vertex has a continuation");
            step = next;
        }
    }
    arcs
}

/// Signed labels of length-1 paths starting at `v`.
pub fn support(g: &LabelledGraph, v: u32) -> BTreeSet<Letter> {
    g.half_edges(v).iter().map(|h| g.signed_label(*h)).collect()
}

// ---------------------------------------------------------------------------
// Word-level (classical) oracle
// ---------------------------------------------------------------------------

/// A cyclic run decomposition of a cyclically reduced word: maximal runs
/// with their start positions, merging the wrap-around run.
#[derive(Debug, Clone)]
struct CyclicRuns {
    /// (letter, count, start position) per maximal cyclic run.
    runs: Vec<(Letter, u64, u64)>,
    len: u64,
    /// Whole word is a single letter power.
    uniform: Option<Letter>,
}

impl CyclicRuns {
    fn new(w: &Word) -> CyclicRuns {
        let syls = w.syllables();
        let len = w.len();
        if syls.len() == 1 {
            return CyclicRuns {
                runs: vec![(syls[0].letter, syls[0].count, 0)],
                len,
                uniform: Some(syls[0].letter),
            };
        }
        let mut runs: Vec<(Letter, u64, u64)> = Vec::new();
        let mut pos = 0u64;
        for s in syls {
            runs.push((s.letter, s.count, pos));
            pos += s.count;
        }
        // Merge the wrap-around run: the merged run starts at the start of
        // the final syllable.
        if runs.len() >= 2 && runs[0].0 == runs[runs.len() - 1].0 {
            let last = runs.pop().unwrap();
            runs[0].1 += last.1;
            runs[0].2 = last.2;
        }
        CyclicRuns { runs, len, uniform: None }
    }
}

/// One `[·]`-class of a symmetrized relator family.
#[derive(Debug, Clone)]
pub struct RelatorClass {
    /// Canonical (shortlex-least) class representative.
    pub rep: CyclicWord,
    /// Length of the primitive root (equals `len` when not a proper power).
    pub root_len: u64,
    runs: CyclicRuns,
    runs_inv: CyclicRuns,
}

/// Word-level piece oracle over a symmetrized relator family.
///
/// Classical pieces of a presentation are exactly the essential pieces of
/// the relator graph, and occurrence orbits can be counted by run-length
/// matching against each class representative and its inverse.
pub struct ClassicalPieces {
    classes: Vec<RelatorClass>,
}

impl ClassicalPieces {
    /// Builds the oracle from the presentation's relators (symmetrization
    /// is implicit in class counting).
    pub fn new(p: &Presentation) -> Result<ClassicalPieces, WordError> {
        let mut reps: BTreeSet<Word> = BTreeSet::new();
        for r in &p.relators {
            let (core, _) = cyclic_reduce(r)?;
            reps.insert(core.class_rep());
        }
        let classes = reps
            .into_iter()
            .map(|rep| {
                let cw = CyclicWord::new(rep).unwrap();
                let root_len = match is_proper_power(&cw) {
                    Some((root, _)) => root.len(),
                    None => cw.len(),
                };
                let inv = cw.word().inverse();
                RelatorClass {
                    runs: CyclicRuns::new(cw.word()),
                    runs_inv: CyclicRuns::new(&inv),
                    root_len,
                    rep: cw,
                }
            })
            .collect();
        Ok(ClassicalPieces { classes })
    }

    pub fn classes(&self) -> &[RelatorClass] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    /// Number of occurrences of `u` (≥ 1 letters, freely reduced) on the
    /// relator graph, counted up to the rotation symmetry of each class
    /// when `essential` is set, stopping early at `cap`.
    pub fn occurrence_count(&self, u: &Word, essential: bool, cap: u64) -> u64 {
        debug_assert!(!u.is_empty() && u.is_freely_reduced());
        let mut total = 0u64;
        for class in &self.classes {
            let window = if essential { class.root_len } else { class.rep.len() };
            total += count_matches(u, &class.runs, window);
            if total >= cap {
                return total;
            }
            total += count_matches(u, &class.runs_inv, window);
            if total >= cap {
                return total;
            }
        }
        total
    }

    /// Is `u` a piece of the family (classical when `essential`)?
    pub fn is_piece_word(&self, u: &Word, essential: bool) -> bool {
        !u.is_empty() && self.occurrence_count(u, essential, 2) >= 2
    }

    /// Largest prefix length `n ≤ cap` such that `w[pos .. pos+n]` (read
    /// cyclically in `host`) is a piece. Monotone, so binary search.
    pub fn max_piece_factor(
        &self,
        host: &Word,
        pos: u64,
        cap: u64,
        essential: bool,
    ) -> u64 {
        if cap == 0 {
            return 0;
        }
        let test = |n: u64| -> bool {
            let sub = host.cyclic_factor(pos, n);
            self.is_piece_word(&sub, essential)
        };
        if !test(1) {
            return 0;
        }
        let mut lo = 1; // piece
        let mut hi = cap;
        if test(hi) {
            return hi;
        }
        // Invariant: test(lo) holds, test(hi) fails.
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if test(mid) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    }

    /// Greedy minimal piece cover of the factor `host[pos .. pos+len]`,
    /// anchored at its start. Returns piece lengths, or the offset of a
    /// letter lying on no piece.
    pub fn greedy_cover(
        &self,
        host: &Word,
        pos: u64,
        len: u64,
        essential: bool,
    ) -> Result<Vec<u64>, u64> {
        let mut covered = 0u64;
        let mut pieces = Vec::new();
        while covered < len {
            let n = self.max_piece_factor(host, pos + covered, len - covered, essential);
            if n == 0 {
                return Err(covered);
            }
            pieces.push(n);
            covered += n;
        }
        Ok(pieces)
    }
}

/// Matches of `u` against the bi-infinite periodic reading of the cyclic
/// word with runs `x`, counting start positions in `[0, window)`.
fn count_matches(u: &Word, x: &CyclicRuns, window: u64) -> u64 {
    let usyls = u.syllables();
    if let Some(letter) = x.uniform {
        // Host is s^len as a cycle: any power of s matches everywhere.
        if usyls.len() == 1 && usyls[0].letter == letter {
            return window;
        }
        return 0;
    }
    if usyls.len() == 1 {
        let (ul, uc) = (usyls[0].letter, usyls[0].count);
        let mut total = 0;
        for &(l, c, start) in &x.runs {
            if l == ul && c >= uc {
                // Start offsets start .. start + (c - uc), positions mod len.
                for t in 0..=(c - uc) {
                    let p = (start + t) % x.len;
                    if p < window {
                        total += 1;
                    }
                }
            }
        }
        return total;
    }
    // Multi-run pattern: the first run must be a suffix of a host run, the
    // interior runs must match exactly, the last must be a prefix.
    let q = x.runs.len();
    let m = usyls.len();
    let mut total = 0;
    'align: for j in 0..q {
        let (l0, c0, _s0) = x.runs[j];
        if l0 != usyls[0].letter || c0 < usyls[0].count {
            continue;
        }
        for t in 1..m - 1 {
            let (lt, ct, _) = x.runs[(j + t) % q];
            if lt != usyls[t].letter || ct != usyls[t].count {
                continue 'align;
            }
        }
        let (lm, cm, _) = x.runs[(j + m - 1) % q];
        if lm != usyls[m - 1].letter || cm < usyls[m - 1].count {
            continue;
        }
        let (_, c0, s0) = x.runs[j];
        let i = (s0 + c0 - usyls[0].count) % x.len;
        if i < window {
            total += 1;
        }
    }
    total
}
