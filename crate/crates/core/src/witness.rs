//! Witness construction for the free-subgroup embedding data: selection of
//! sixteen (relator class, x, y) tuples with large piece distance and
//! chained disjoint supports, the W-sets over two fresh symbols, and the
//! extended presentation.
//!
//! The classical search runs word-level on run-length encoded relators so
//! that families with exponential power blocks stay tractable; the
//! graphical search works on a free-product completion. Both searches
//! explore in canonical order, so identical inputs yield identical
//! packages, and every emitted package re-verifies through the piece
//! oracles alone.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::completion::{
    component_has_nontrivial_pi1, component_subgraph, vertex_sheets, check_gr_star,
    is_interior_vertex, Completion,
};
use crate::conditions::check_c_classical;
use crate::graph::{isomorphism, LabelledGraph, PathSpec, Step};
use crate::pieces::{build_piece_index, ClassicalPieces, PieceIndex};
use crate::words::{Alphabet, Letter, Presentation, Word, WordError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WitnessError {
    #[error("need at least 16 relator classes, found {0}")]
    InsufficientRelators(usize),
    #[error("no witness assignment exists for the supplied classes")]
    SearchExhausted,
    #[error("need at least 16 qualifying components, found {0}")]
    InsufficientComponents(usize),
    #[error("component {0} has no qualifying interior vertex")]
    NoInteriorVertex(u32),
    #[error("symbol `{0}` clashes with the presentation alphabet")]
    SymbolClash(String),
    #[error("input fails the required small cancellation condition")]
    NotSmallCancellation,
    #[error("search exceeded the configured budget")]
    Budget,
    #[error(transparent)]
    Word(#[from] WordError),
}

pub const ALPHA_NAMES: [&str; 2] = ["alpha1", "alpha2"];

/// One selected tuple: a relator class (classical) or completion component
/// (graphical), with the two chosen vertices. Classical vertices are
/// positions on the class cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WitnessTuple {
    pub home: u32,
    pub x: u64,
    pub y: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WitnessMode {
    Classical,
    Graphical,
}

#[derive(Debug, Clone)]
pub struct WitnessPackage {
    pub mode: WitnessMode,
    pub tuples: Vec<WitnessTuple>,
    pub w1: Vec<Word>,
    pub w2: Vec<Word>,
    /// Presentation over the enlarged alphabet with relators `W ∪ R`.
    pub extended: Presentation,
    pub truncation: Option<String>,
    pub notes: Vec<String>,
}

impl WitnessPackage {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(match self.mode {
            WitnessMode::Classical => "mode: classical\n",
            WitnessMode::Graphical => "mode: graphical\n",
        });
        if let Some(t) = &self.truncation {
            out.push_str(&format!("truncation: {t}\n"));
        }
        for (i, t) in self.tuples.iter().enumerate() {
            out.push_str(&format!(
                "tuple {}: home {} x {} y {}\n",
                i + 1,
                t.home,
                t.x,
                t.y
            ));
        }
        let alpha = &self.extended.alphabet;
        for (name, set) in [("W1", &self.w1), ("W2", &self.w2)] {
            out.push_str(&format!("{name}: {} words\n", set.len()));
            for w in set {
                out.push_str(&format!("  {}\n", alpha.display_word(w)));
            }
        }
        for n in &self.notes {
            out.push_str(&format!("note: {n}\n"));
        }
        out
    }
}

// ---------------------------------------------------------------------------
// Classical selection
// ---------------------------------------------------------------------------

/// Support of a position on a class cycle: the inverse of the incoming
/// letter and the outgoing letter.
fn class_support(rep: &Word, pos: u64) -> BTreeSet<Letter> {
    let n = rep.len();
    let incoming = rep.letter_at((pos + n - 1) % n);
    let outgoing = rep.letter_at(pos);
    BTreeSet::from([incoming.inverse(), outgoing])
}

/// Farthest cyclic offset reachable from `pos` with at most two pieces
/// along the forward reading (0 when the first letter is on no piece).
fn reach_two(oracle: &ClassicalPieces, rep: &Word, pos: u64, cap: u64) -> u64 {
    let a1 = oracle.max_piece_factor(rep, pos, cap, true);
    if a1 == 0 || a1 == cap {
        return a1;
    }
    a1 + oracle.max_piece_factor(rep, (pos + a1) % rep.len(), cap - a1, true)
}

/// Is the essential-piece distance from `x` to `y` on the class cycle at
/// least 3? Both arcs must fail to be covered by two pieces.
fn dp_at_least_3(oracle: &ClassicalPieces, rep: &Word, x: u64, y: u64) -> bool {
    if x == y {
        return false;
    }
    let n = rep.len();
    let fwd_len = (y + n - x) % n;
    if reach_two(oracle, rep, x, fwd_len) >= fwd_len {
        return false;
    }
    // Backward arc: the inverse reading from x.
    let back = rep.cyclic_factor(y, n - fwd_len).inverse();
    let blen = back.len();
    let b1 = oracle.max_piece_factor(&back, 0, blen, true);
    if b1 >= blen {
        return false;
    }
    if b1 > 0 {
        let b2 = oracle.max_piece_factor(&back, b1, blen - b1, true);
        if b1 + b2 >= blen {
            return false;
        }
    }
    true
}

/// Candidate positions on a class cycle: run boundaries plus one interior
/// representative per run. The guaranteed-success construction places its
/// vertices at block junctions, which this superset covers.
fn candidate_positions(rep: &Word) -> Vec<u64> {
    let mut out = Vec::new();
    let mut pos = 0u64;
    for s in rep.syllables() {
        out.push(pos);
        if s.count > 1 {
            out.push(pos + s.count / 2);
        }
        pos += s.count;
    }
    out
}

/// Sixteen tuples per the selection lemma: distinct classes, essential
/// piece distance at least 3 within each tuple, and disjoint supports
/// between consecutive tuples except across the 8/9 seam and after 16.
pub fn select_witnesses_classical(p: &Presentation) -> Result<WitnessPackage, WitnessError> {
    let refined = crate::words::tietze_reduce(&crate::words::concise_refinement(p)?);
    let oracle = ClassicalPieces::new(&refined)?;
    let n_classes = oracle.class_count();
    if n_classes < 16 {
        return Err(WitnessError::InsufficientRelators(n_classes));
    }
    match check_c_classical(&refined, 6) {
        Ok(r) if r.passed() => {}
        Ok(_) => return Err(WitnessError::NotSmallCancellation),
        Err(crate::conditions::ConditionError::Budget) => return Err(WitnessError::Budget),
        Err(crate::conditions::ConditionError::Word(e)) => return Err(WitnessError::Word(e)),
        Err(_) => return Err(WitnessError::NotSmallCancellation),
    }

    // Precompute per-class candidates.
    let candidates: Vec<Vec<u64>> = oracle
        .classes()
        .iter()
        .map(|c| candidate_positions(c.rep.word()))
        .collect();
    // Achievable supports per class (for constraint propagation).
    let supports: Vec<BTreeSet<BTreeSet<Letter>>> = oracle
        .classes()
        .iter()
        .zip(&candidates)
        .map(|(c, cands)| {
            cands.iter().map(|&pos| class_support(c.rep.word(), pos)).collect()
        })
        .collect();

    let needs_link = |k: usize| k != 7 && k != 15; // link tuple k to k+1 (0-indexed)
    let mut tuples: Vec<WitnessTuple> = Vec::new();
    let mut used: BTreeSet<usize> = BTreeSet::new();

    fn search(
        oracle: &ClassicalPieces,
        candidates: &[Vec<u64>],
        supports: &[BTreeSet<BTreeSet<Letter>>],
        needs_link: &dyn Fn(usize) -> bool,
        tuples: &mut Vec<WitnessTuple>,
        used: &mut BTreeSet<usize>,
    ) -> bool {
        let k = tuples.len();
        if k == 16 {
            return true;
        }
        let prev_support: Option<BTreeSet<Letter>> = if k > 0 && needs_link(k - 1) {
            let t = tuples[k - 1];
            Some(class_support(
                oracle.classes()[t.home as usize].rep.word(),
                t.y,
            ))
        } else {
            None
        };
        for ci in 0..oracle.class_count() {
            if used.contains(&ci) {
                continue;
            }
            let rep = oracle.classes()[ci].rep.word().clone();
            for &x in &candidates[ci] {
                if let Some(ps) = &prev_support {
                    if !class_support(&rep, x).is_disjoint(ps) {
                        continue;
                    }
                }
                for &y in &candidates[ci] {
                    if !dp_at_least_3(oracle, &rep, x, y) {
                        continue;
                    }
                    // Constraint propagation: the chosen y must leave some
                    // achievable disjoint support in an unused class.
                    if needs_link(k) {
                        let ys = class_support(&rep, y);
                        let feasible = (0..oracle.class_count()).any(|cj| {
                            cj != ci
                                && !used.contains(&cj)
                                && supports[cj].iter().any(|s| s.is_disjoint(&ys))
                        });
                        if !feasible {
                            continue;
                        }
                    }
                    tuples.push(WitnessTuple { home: ci as u32, x, y });
                    used.insert(ci);
                    if search(oracle, candidates, supports, needs_link, tuples, used) {
                        return true;
                    }
                    used.remove(&ci);
                    tuples.pop();
                }
            }
        }
        false
    }

    if !search(&oracle, &candidates, &supports, &needs_link, &mut tuples, &mut used) {
        return Err(WitnessError::SearchExhausted);
    }

    let (w1, w2, extended) = build_classical_package(p, &oracle, &tuples)?;
    Ok(WitnessPackage {
        mode: WitnessMode::Classical,
        tuples,
        w1,
        w2,
        extended,
        truncation: Some(format!("N={}", p.relators.len())),
        notes: vec![format!(
            "selection over the Tietze-reduced concise refinement ({n_classes} classes)"
        )],
    })
}

/// The two arc words from x to y on a class cycle, both read from x.
fn arc_words(rep: &Word, x: u64, y: u64) -> [Word; 2] {
    let n = rep.len();
    let fwd_len = (y + n - x) % n;
    let fwd = rep.cyclic_factor(x, fwd_len);
    let bwd = rep.cyclic_factor(y, n - fwd_len).inverse();
    [fwd, bwd]
}

fn extend_alphabet(p: &Presentation) -> Result<(Alphabet, Letter, Letter), WitnessError> {
    let mut alphabet = p.alphabet.clone();
    let a1 = alphabet
        .add(ALPHA_NAMES[0])
        .map_err(|_| WitnessError::SymbolClash(ALPHA_NAMES[0].into()))?;
    let a2 = alphabet
        .add(ALPHA_NAMES[1])
        .map_err(|_| WitnessError::SymbolClash(ALPHA_NAMES[1].into()))?;
    Ok((alphabet, Letter::pos(a1), Letter::pos(a2)))
}

fn build_classical_package(
    p: &Presentation,
    oracle: &ClassicalPieces,
    tuples: &[WitnessTuple],
) -> Result<(Vec<Word>, Vec<Word>, Presentation), WitnessError> {
    let (alphabet, alpha1, alpha2) = extend_alphabet(p)?;
    let blocks: Vec<[Word; 2]> = tuples
        .iter()
        .map(|t| arc_words(oracle.classes()[t.home as usize].rep.word(), t.x, t.y))
        .collect();
    let mut sets = Vec::new();
    for (alpha, range) in [(alpha1, 0..8), (alpha2, 8..16)] {
        let mut words = vec![{
            let mut w = Word::empty();
            w.push(alpha.inverse());
            w
        }];
        for k in range {
            let mut next = Vec::with_capacity(words.len() * 2);
            for w in &words {
                for choice in &blocks[k] {
                    next.push(w.concat(choice));
                }
            }
            words = next;
        }
        words.sort();
        words.dedup();
        sets.push(words);
    }
    let w2 = sets.pop().unwrap();
    let w1 = sets.pop().unwrap();
    let mut relators: Vec<Word> = w1.iter().chain(w2.iter()).cloned().collect();
    relators.extend(p.relators.iter().cloned());
    let extended = Presentation::new(alphabet, relators);
    Ok((w1, w2, extended))
}

// ---------------------------------------------------------------------------
// Graphical selection
// ---------------------------------------------------------------------------

const PIECE_WALK_BUDGET: usize = 200_000;

/// Vertices reachable from `v` by a single essential piece: depth-first
/// extension of walks while they remain essential pieces (prefix-closed).
fn one_piece_reach(
    g: &LabelledGraph,
    idx: &PieceIndex,
    v: u32,
    budget: &mut usize,
) -> Result<BTreeSet<u32>, WitnessError> {
    let mut out = BTreeSet::new();
    // State: current walk as steps plus the survivor set of equally-reading
    // walks (start, current) pairs.
    let init: Vec<(u32, u32)> = (0..g.vertex_count() as u32).map(|u| (u, u)).collect();
    let mut stack: Vec<(u32, Vec<(u32, u32)>, usize)> = vec![(v, init, 0)];
    while let Some((at, survivors, depth)) = stack.pop() {
        *budget = budget.checked_sub(1).ok_or(WitnessError::Budget)?;
        if depth > 2 * g.vertex_count() {
            // Winding pieces longer than twice the graph cannot reach new
            // endpoints.
            continue;
        }
        for h in g.half_edges(at) {
            let step = Step { edge: h.edge, dir: h.dir };
            if g.step_source(step) != at {
                continue;
            }
            let letter = g.step_label(step);
            let next: Vec<(u32, u32)> = survivors
                .iter()
                .filter_map(|&(s, cur)| {
                    g.step_unique(cur, letter).map(|st| (s, g.step_target(st)))
                })
                .collect();
            let mut orbits = BTreeSet::new();
            for (s, _) in &next {
                orbits.insert(idx.vertex_orbit(*s));
            }
            if orbits.len() >= 2 {
                let to = g.step_target(step);
                out.insert(to);
                stack.push((to, next, depth + 1));
            }
        }
    }
    Ok(out)
}

/// Vertices within essential-piece distance ≤ 2 of `v`.
fn two_piece_reach(
    g: &LabelledGraph,
    idx: &PieceIndex,
    v: u32,
) -> Result<BTreeSet<u32>, WitnessError> {
    let mut budget = PIECE_WALK_BUDGET;
    let r1 = one_piece_reach(g, idx, v, &mut budget)?;
    let mut out = r1.clone();
    for &u in &r1 {
        out.extend(one_piece_reach(g, idx, u, &mut budget)?);
    }
    out.insert(v);
    Ok(out)
}

/// Sixteen tuples from pairwise non-isomorphic finite components of a
/// completion: x arbitrary, y an interior sheet vertex with essential
/// piece distance at least 3, consecutive tuples landing in sheets of
/// different factors.
pub fn select_witnesses_graphical(c: &Completion) -> Result<WitnessPackage, WitnessError> {
    match check_gr_star(c, 6, true) {
        Ok(r) if r.passed() => {}
        Ok(_) => return Err(WitnessError::NotSmallCancellation),
        Err(_) => return Err(WitnessError::Budget),
    }
    let g = &c.graph;
    let idx = build_piece_index(g).map_err(|_| WitnessError::Budget)?;
    // Qualifying components: nontrivial fundamental group, pairwise
    // non-isomorphic.
    let mut qualifying: Vec<u32> = Vec::new();
    let mut reps: Vec<LabelledGraph> = Vec::new();
    for comp in 0..g.component_count() {
        if !component_has_nontrivial_pi1(c, comp) {
            continue;
        }
        let sub = component_subgraph(g, comp);
        let fresh = reps
            .iter()
            .all(|r| !matches!(isomorphism(r, &sub), Ok(Some(_))));
        if fresh {
            qualifying.push(comp);
            reps.push(sub);
        }
    }
    if qualifying.len() < 16 {
        return Err(WitnessError::InsufficientComponents(qualifying.len()));
    }

    // Per component: x = least vertex; y candidates = interior sheet
    // vertices at piece distance ≥ 3, annotated with their sheet's factor.
    struct CompData {
        comp: u32,
        x: u32,
        x_factors: BTreeSet<usize>,
        ys: Vec<(u32, usize)>,
    }
    let mut data: Vec<CompData> = Vec::new();
    for &comp in qualifying.iter().take(30) {
        let verts = g.component_vertices(comp);
        let x = verts[0];
        let reach = two_piece_reach(g, &idx, x)?;
        let mut ys = Vec::new();
        for &v in &verts {
            if reach.contains(&v) || !is_interior_vertex(c, v) {
                continue;
            }
            let sheet = vertex_sheets(c, v)[0];
            ys.push((v, c.sheets[sheet as usize].factor));
        }
        if ys.is_empty() {
            return Err(WitnessError::NoInteriorVertex(comp));
        }
        let x_factors: BTreeSet<usize> = vertex_sheets(c, x)
            .iter()
            .map(|&s| c.sheets[s as usize].factor)
            .collect();
        data.push(CompData { comp, x, x_factors, ys });
    }

    // Backtracking over component order and y choices; the consecutive
    // constraint is factor disjointness of y_k's sheet from x_{k+1}'s
    // sheets.
    let needs_link = |k: usize| k != 7 && k != 15;
    let mut chosen: Vec<(usize, usize)> = Vec::new(); // (data idx, y idx)
    fn search(
        data: &[CompData],
        needs_link: &dyn Fn(usize) -> bool,
        chosen: &mut Vec<(usize, usize)>,
        used: &mut BTreeSet<usize>,
    ) -> bool {
        let k = chosen.len();
        if k == 16 {
            return true;
        }
        let prev_factor: Option<usize> = if k > 0 && needs_link(k - 1) {
            let (di, yi) = chosen[k - 1];
            Some(data[di].ys[yi].1)
        } else {
            None
        };
        for di in 0..data.len() {
            if used.contains(&di) {
                continue;
            }
            if let Some(pf) = prev_factor {
                if data[di].x_factors.contains(&pf) {
                    continue;
                }
            }
            for yi in 0..data[di].ys.len() {
                // If this tuple links forward, prefer y whose factor leaves
                // options; the backtracking handles failures anyway.
                chosen.push((di, yi));
                used.insert(di);
                if search(data, needs_link, chosen, used) {
                    return true;
                }
                used.remove(&di);
                chosen.pop();
            }
        }
        false
    }
    let mut used = BTreeSet::new();
    if !search(&data, &needs_link, &mut chosen, &mut used) {
        return Err(WitnessError::SearchExhausted);
    }
    let tuples: Vec<WitnessTuple> = chosen
        .iter()
        .map(|&(di, yi)| WitnessTuple {
            home: data[di].comp,
            x: data[di].x as u64,
            y: data[di].ys[yi].0 as u64,
        })
        .collect();

    // W sets from all simple paths x → y per component.
    let pres = Presentation::new(g.alphabet().clone(), Vec::new());
    let (alphabet, alpha1, alpha2) = extend_alphabet(&pres)?;
    let mut sets = Vec::new();
    for (alpha, range) in [(alpha1, 0..8), (alpha2, 8..16)] {
        let mut words = vec![{
            let mut w = Word::empty();
            w.push(alpha.inverse());
            w
        }];
        for k in range.clone() {
            let t = tuples[k];
            let paths = simple_paths(g, t.x as u32, t.y as u32);
            let mut next = Vec::new();
            for w in &words {
                for p in &paths {
                    next.push(w.concat(&g.path_label(p)));
                }
            }
            words = next;
        }
        words.sort();
        words.dedup();
        sets.push(words);
    }
    let w2 = sets.pop().unwrap();
    let w1 = sets.pop().unwrap();
    // Extended presentation: W plus the labels of simple closed paths of
    // the completion (the relator set at this truncation).
    let mut relators: Vec<Word> = w1.iter().chain(w2.iter()).cloned().collect();
    for cy in crate::graph::simple_cycles(g, None) {
        relators.push(g.path_label(&cy));
    }
    let extended = Presentation::new(alphabet, relators);
    Ok(WitnessPackage {
        mode: WitnessMode::Graphical,
        tuples,
        w1,
        w2,
        extended,
        truncation: c.truncated.map(|r| format!("radius={r}")),
        notes: vec!["graphical W-sets restricted to simple paths".into()],
    })
}

/// All vertex-simple paths between two vertices.
fn simple_paths(g: &LabelledGraph, from: u32, to: u32) -> Vec<PathSpec> {
    let mut out = Vec::new();
    let mut stack: Vec<(u32, Vec<Step>, BTreeSet<u32>)> =
        vec![(from, Vec::new(), BTreeSet::from([from]))];
    while let Some((at, steps, visited)) = stack.pop() {
        if at == to && !steps.is_empty() {
            out.push(PathSpec { start: from, steps });
            continue;
        }
        for h in g.half_edges(at) {
            let step = Step { edge: h.edge, dir: h.dir };
            if g.step_source(step) != at {
                continue;
            }
            let next = g.step_target(step);
            if visited.contains(&next) && next != to {
                continue;
            }
            if next == to && steps.is_empty() && from == to {
                continue;
            }
            let mut v2 = visited.clone();
            v2.insert(next);
            let mut s2 = steps.clone();
            s2.push(step);
            if next == to {
                out.push(PathSpec { start: from, steps: s2 });
            } else {
                stack.push((next, s2, v2));
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

// ---------------------------------------------------------------------------
// W sets and the extended presentation as standalone operations
// ---------------------------------------------------------------------------

/// Classical W sets from tuples over a relator oracle: each block has
/// exactly the two arc choices, so each set has 2^8 words.
pub fn build_w_sets_classical(
    p: &Presentation,
    tuples: &[WitnessTuple],
) -> Result<(Vec<Word>, Vec<Word>), WitnessError> {
    assert_eq!(tuples.len(), 16, "expected 16 tuples");
    let refined = crate::words::tietze_reduce(&crate::words::concise_refinement(p)?);
    let oracle = ClassicalPieces::new(&refined)?;
    let (w1, w2, _) = build_classical_package(p, &oracle, tuples)?;
    Ok((w1, w2))
}

/// `⟨S | R⟩ → ⟨S, α | W, R⟩` with fresh symbols α₁, α₂.
pub fn extended_presentation(
    p: &Presentation,
    w1: &[Word],
    w2: &[Word],
) -> Result<Presentation, WitnessError> {
    let (alphabet, _, _) = extend_alphabet(p)?;
    let mut relators: Vec<Word> = w1.iter().chain(w2.iter()).cloned().collect();
    relators.extend(p.relators.iter().cloned());
    Ok(Presentation::new(alphabet, relators))
}

// ---------------------------------------------------------------------------
// Post-hoc verification
// ---------------------------------------------------------------------------

/// Re-checks every invariant of a classical package using only the piece
/// oracle, independently of the search that produced it.
pub fn verify_classical_package(
    p: &Presentation,
    pkg: &WitnessPackage,
) -> Result<(), String> {
    let refined = crate::words::tietze_reduce(
        &crate::words::concise_refinement(p).map_err(|e| e.to_string())?,
    );
    let oracle = ClassicalPieces::new(&refined).map_err(|e| e.to_string())?;
    if pkg.tuples.len() != 16 {
        return Err(format!("expected 16 tuples, got {}", pkg.tuples.len()));
    }
    // Classes pairwise distinct.
    let homes: BTreeSet<u32> = pkg.tuples.iter().map(|t| t.home).collect();
    if homes.len() != 16 {
        return Err("tuple classes not pairwise distinct".into());
    }
    for (k, t) in pkg.tuples.iter().enumerate() {
        let class = oracle
            .classes()
            .get(t.home as usize)
            .ok_or_else(|| format!("tuple {k} references unknown class"))?;
        let rep = class.rep.word();
        if t.x >= rep.len() || t.y >= rep.len() {
            return Err(format!("tuple {k} positions out of range"));
        }
        if !dp_at_least_3(&oracle, rep, t.x, t.y) {
            return Err(format!("tuple {k} violates d_p ≥ 3"));
        }
        if k != 7 && k != 15 && k + 1 < 16 {
            let next = pkg.tuples[k + 1];
            let next_rep = oracle.classes()[next.home as usize].rep.word();
            let sy = class_support(rep, t.y);
            let sx = class_support(next_rep, next.x);
            if !sy.is_disjoint(&sx) {
                return Err(format!("supports of y_{} and x_{} intersect", k + 1, k + 2));
            }
        }
    }
    // W sets: 2^8 words each, starting with the fresh inverse symbol,
    // composed of 8 arc blocks with no cancellation at the joints.
    if pkg.w1.len() != 256 || pkg.w2.len() != 256 {
        return Err(format!("|W1| = {}, |W2| = {}, expected 256", pkg.w1.len(), pkg.w2.len()));
    }
    let alpha = &pkg.extended.alphabet;
    let a1 = alpha.index(ALPHA_NAMES[0]).ok_or("missing alpha1")?;
    let a2 = alpha.index(ALPHA_NAMES[1]).ok_or("missing alpha2")?;
    for (set, sym, range) in [(&pkg.w1, a1, 0..8), (&pkg.w2, a2, 8..16)] {
        for w in set.iter() {
            if w.first() != Some(Letter::neg(sym)) {
                return Err("W word does not start with the inverse fresh symbol".into());
            }
            // Recover the block split: greedily match arc words.
            let mut rest = Word::from_syllables(
                w.syllables().iter().skip(1).map(|s| (s.letter, s.count)),
            );
            // The first syllable may still contain copies of the alpha
            // letter only if a block started with it, which cannot happen.
            let mut blocks = 0;
            let mut prev_last: Option<Letter> = None;
            for k in range.clone() {
                let t = pkg.tuples[k];
                let arcs = arc_words(oracle.classes()[t.home as usize].rep.word(), t.x, t.y);
                let matched = arcs.iter().find(|arc| {
                    let al = arc.len();
                    al <= rest.len() && rest.cyclic_factor(0, al) == **arc
                });
                match matched {
                    Some(arc) => {
                        if let (Some(pl), Some(f)) = (prev_last, arc.first()) {
                            if pl == f.inverse() {
                                return Err("free cancellation at block joint".into());
                            }
                        }
                        prev_last = arc.last();
                        let al = arc.len();
                        rest = rest.cyclic_factor(al % rest.len().max(1), rest.len() - al);
                        blocks += 1;
                    }
                    None => return Err("W word block does not match an arc".into()),
                }
            }
            if blocks != 8 || !rest.is_empty() {
                return Err("W word does not decompose into 8 blocks".into());
            }
        }
    }
    // Extended presentation: original relators preserved, alphabet +2.
    if pkg.extended.alphabet.len() != p.alphabet.len() + 2 {
        return Err("extended alphabet size wrong".into());
    }
    for r in &p.relators {
        if !pkg.extended.relators.contains(r) {
            return Err("original relator missing from extended presentation".into());
        }
    }
    if pkg.extended.relators.len() != p.relators.len() + 512 {
        return Err("extended relator count wrong".into());
    }
    Ok(())
}

/// Re-checks a graphical package against its completion.
pub fn verify_graphical_package(c: &Completion, pkg: &WitnessPackage) -> Result<(), String> {
    let g = &c.graph;
    let idx = build_piece_index(g).map_err(|e| e.to_string())?;
    if pkg.tuples.len() != 16 {
        return Err("expected 16 tuples".into());
    }
    let homes: BTreeSet<u32> = pkg.tuples.iter().map(|t| t.home).collect();
    if homes.len() != 16 {
        return Err("components not pairwise distinct".into());
    }
    let mut comp_map: BTreeMap<u32, LabelledGraph> = BTreeMap::new();
    for t in &pkg.tuples {
        comp_map
            .entry(t.home)
            .or_insert_with(|| component_subgraph(g, t.home));
    }
    let comps: Vec<&LabelledGraph> = comp_map.values().collect();
    for i in 0..comps.len() {
        for j in i + 1..comps.len() {
            if matches!(isomorphism(comps[i], comps[j]), Ok(Some(_))) {
                return Err("two chosen components are isomorphic".into());
            }
        }
    }
    for (k, t) in pkg.tuples.iter().enumerate() {
        let (x, y) = (t.x as u32, t.y as u32);
        if g.component_of(x) != t.home || g.component_of(y) != t.home {
            return Err(format!("tuple {k} vertices outside the component"));
        }
        if !is_interior_vertex(c, y) {
            return Err(format!("tuple {k}: y is not interior to a sheet"));
        }
        let reach = two_piece_reach(g, &idx, x).map_err(|e| format!("{e:?}"))?;
        if reach.contains(&y) {
            return Err(format!("tuple {k} violates piece distance ≥ 3"));
        }
        if k != 7 && k != 15 && k + 1 < 16 {
            let next = pkg.tuples[k + 1];
            let fy = c.sheets[vertex_sheets(c, y)[0] as usize].factor;
            let next_factors: BTreeSet<usize> = vertex_sheets(c, next.x as u32)
                .iter()
                .map(|&s| c.sheets[s as usize].factor)
                .collect();
            if next_factors.contains(&fy) {
                return Err(format!("tuples {} and {} share a factor", k + 1, k + 2));
            }
        }
    }
    Ok(())
}
