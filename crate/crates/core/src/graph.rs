//! Oriented S-labelled graphs, paths, label-preserving morphisms and
//! automorphism groups, the relator graph construction, and simple-cycle
//! enumeration.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use thiserror::Error;

use crate::words::{Alphabet, CyclicWord, Letter, ParseError, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("search exceeded the configured node budget")]
    TooLarge,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dir {
    Fwd,
    Bwd,
}

impl Dir {
    pub fn flip(self) -> Dir {
        match self {
            Dir::Fwd => Dir::Bwd,
            Dir::Bwd => Dir::Fwd,
        }
    }
}

/// One traversal step: an edge together with the direction it is crossed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Step {
    pub edge: u32,
    pub dir: Dir,
}

impl Step {
    pub fn fwd(edge: u32) -> Step {
        Step { edge, dir: Dir::Fwd }
    }

    pub fn bwd(edge: u32) -> Step {
        Step { edge, dir: Dir::Bwd }
    }

    pub fn flip(self) -> Step {
        Step { edge: self.edge, dir: self.dir.flip() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EdgeRec {
    pub source: u32,
    pub target: u32,
    pub label: u32,
}

/// A path given by its start vertex and traversal steps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathSpec {
    pub start: u32,
    pub steps: Vec<Step>,
}

impl PathSpec {
    pub fn empty(start: u32) -> PathSpec {
        PathSpec { start, steps: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// The image data of a labelled path embedded in a graph.
pub type Occurrence = PathSpec;

/// A label- and orientation-preserving graph homomorphism given by total
/// vertex and edge maps.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Morphism {
    pub vertex_map: Vec<u32>,
    pub edge_map: Vec<u32>,
}

impl Morphism {
    pub fn identity(g: &LabelledGraph) -> Morphism {
        Morphism {
            vertex_map: (0..g.vertex_count() as u32).collect(),
            edge_map: (0..g.edge_count() as u32).collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.vertex_map.iter().enumerate().all(|(i, &v)| i as u32 == v)
            && self.edge_map.iter().enumerate().all(|(i, &e)| i as u32 == e)
    }

    pub fn apply_path(&self, p: &PathSpec) -> PathSpec {
        PathSpec {
            start: self.vertex_map[p.start as usize],
            steps: p
                .steps
                .iter()
                .map(|s| Step { edge: self.edge_map[s.edge as usize], dir: s.dir })
                .collect(),
        }
    }

    pub fn compose(&self, inner: &Morphism) -> Morphism {
        Morphism {
            vertex_map: inner.vertex_map.iter().map(|&v| self.vertex_map[v as usize]).collect(),
            edge_map: inner.edge_map.iter().map(|&e| self.edge_map[e as usize]).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HalfEdge {
    pub edge: u32,
    pub dir: Dir,
}

/// An oriented graph with edges labelled by alphabet symbols. Parallel
/// edges and loops are permitted. Immutable once built; component ids are
/// computed eagerly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelledGraph {
    alphabet: Alphabet,
    vertex_names: Vec<String>,
    edges: Vec<EdgeRec>,
    adj: Vec<Vec<HalfEdge>>,
    component: Vec<u32>,
    n_components: u32,
}

impl LabelledGraph {
    pub fn new(alphabet: Alphabet, vertex_names: Vec<String>, edges: Vec<EdgeRec>) -> Self {
        let n = vertex_names.len();
        for e in &edges {
            assert!((e.source as usize) < n && (e.target as usize) < n, "edge endpoint out of range");
            assert!((e.label as usize) < alphabet.len(), "edge label outside alphabet");
        }
        let mut adj: Vec<Vec<HalfEdge>> = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adj[e.source as usize].push(HalfEdge { edge: i as u32, dir: Dir::Fwd });
            adj[e.target as usize].push(HalfEdge { edge: i as u32, dir: Dir::Bwd });
        }
        let (component, n_components) = components(n, &edges);
        LabelledGraph { alphabet, vertex_names, edges, adj, component, n_components }
    }

    pub fn with_numbered_vertices(alphabet: Alphabet, n: usize, edges: Vec<EdgeRec>) -> Self {
        let names = (0..n).map(|i| format!("v{i}")).collect();
        LabelledGraph::new(alphabet, names, edges)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[EdgeRec] {
        &self.edges
    }

    pub fn edge(&self, e: u32) -> EdgeRec {
        self.edges[e as usize]
    }

    pub fn vertex_name(&self, v: u32) -> &str {
        &self.vertex_names[v as usize]
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn component_of(&self, v: u32) -> u32 {
        self.component[v as usize]
    }

    pub fn component_count(&self) -> u32 {
        self.n_components
    }

    pub fn component_vertices(&self, c: u32) -> Vec<u32> {
        (0..self.vertex_count() as u32).filter(|&v| self.component_of(v) == c).collect()
    }

    /// Half-edges incident at `v` (one per edge end; loops contribute two).
    pub fn half_edges(&self, v: u32) -> &[HalfEdge] {
        &self.adj[v as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    /// The signed label read when crossing `h` away from its base vertex.
    pub fn signed_label(&self, h: HalfEdge) -> Letter {
        let e = self.edges[h.edge as usize];
        Letter::new(e.label, h.dir == Dir::Bwd)
    }

    pub fn step_source(&self, s: Step) -> u32 {
        let e = self.edges[s.edge as usize];
        match s.dir {
            Dir::Fwd => e.source,
            Dir::Bwd => e.target,
        }
    }

    pub fn step_target(&self, s: Step) -> u32 {
        let e = self.edges[s.edge as usize];
        match s.dir {
            Dir::Fwd => e.target,
            Dir::Bwd => e.source,
        }
    }

    pub fn step_label(&self, s: Step) -> Letter {
        self.signed_label(HalfEdge { edge: s.edge, dir: s.dir })
    }

    /// All half-edges at `v` reading `letter`.
    pub fn steps_from(&self, v: u32, letter: Letter) -> Vec<Step> {
        self.adj[v as usize]
            .iter()
            .filter(|h| self.signed_label(**h) == letter)
            .map(|h| Step { edge: h.edge, dir: h.dir })
            .collect()
    }

    /// The unique continuation in a reduced graph, if any.
    pub fn step_unique(&self, v: u32, letter: Letter) -> Option<Step> {
        self.adj[v as usize]
            .iter()
            .find(|h| self.signed_label(**h) == letter)
            .map(|h| Step { edge: h.edge, dir: h.dir })
    }

    pub fn path_is_valid(&self, p: &PathSpec) -> bool {
        if (p.start as usize) >= self.vertex_count() {
            return false;
        }
        let mut at = p.start;
        for s in &p.steps {
            if (s.edge as usize) >= self.edge_count() || self.step_source(*s) != at {
                return false;
            }
            at = self.step_target(*s);
        }
        true
    }

    pub fn path_end(&self, p: &PathSpec) -> u32 {
        p.steps.last().map(|&s| self.step_target(s)).unwrap_or(p.start)
    }

    pub fn path_label(&self, p: &PathSpec) -> Word {
        Word::from_letters(p.steps.iter().map(|&s| self.step_label(s)))
    }

    pub fn path_reverse(&self, p: &PathSpec) -> PathSpec {
        PathSpec {
            start: self.path_end(p),
            steps: p.steps.iter().rev().map(|s| s.flip()).collect(),
        }
    }
}

fn components(n: usize, edges: &[EdgeRec]) -> (Vec<u32>, u32) {
    let mut comp = vec![u32::MAX; n];
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n];
    for e in edges {
        adj[e.source as usize].push(e.target);
        adj[e.target as usize].push(e.source);
    }
    let mut next = 0u32;
    for v in 0..n {
        if comp[v] != u32::MAX {
            continue;
        }
        let mut queue = VecDeque::from([v as u32]);
        comp[v] = next;
        while let Some(u) = queue.pop_front() {
            for &w in &adj[u as usize] {
                if comp[w as usize] == u32::MAX {
                    comp[w as usize] = next;
                    queue.push_back(w);
                }
            }
        }
        next += 1;
    }
    (comp, next)
}

/// Verdict of the reduced-labelling check with a witness on failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedVerdict {
    pub reduced: bool,
    /// Offending vertex and signed label presented by two distinct edge ends.
    pub witness: Option<(u32, Letter)>,
}

/// A labelling is reduced iff no vertex presents the same signed label on
/// two distinct incident edge ends.
pub fn validate_reduced(g: &LabelledGraph) -> ReducedVerdict {
    for v in 0..g.vertex_count() as u32 {
        let mut seen = BTreeSet::new();
        for h in g.half_edges(v) {
            let l = g.signed_label(*h);
            if !seen.insert(l) {
                return ReducedVerdict { reduced: false, witness: Some((v, l)) };
            }
        }
    }
    ReducedVerdict { reduced: true, witness: None }
}

/// The labelled cycle graph reading `w`: `|w|` vertices and edges.
pub fn cycle_graph(alphabet: &Alphabet, w: &CyclicWord) -> LabelledGraph {
    let n = w.len() as usize;
    let mut edges = Vec::with_capacity(n);
    for (i, l) in w.word().letters().enumerate() {
        let j = ((i + 1) % n) as u32;
        let i = i as u32;
        if l.neg {
            edges.push(EdgeRec { source: j, target: i, label: l.sym });
        } else {
            edges.push(EdgeRec { source: i, target: j, label: l.sym });
        }
    }
    LabelledGraph::with_numbered_vertices(alphabet.clone(), n, edges)
}

/// Disjoint union of one cycle graph per `[·]`-class, together with the
/// class representatives in component order.
pub fn gamma_r(
    alphabet: &Alphabet,
    relators: &BTreeSet<CyclicWord>,
) -> (LabelledGraph, Vec<CyclicWord>) {
    let mut classes: BTreeSet<Word> = BTreeSet::new();
    for r in relators {
        classes.insert(r.class_rep());
    }
    let reps: Vec<CyclicWord> =
        classes.into_iter().map(|w| CyclicWord::new(w).unwrap()).collect();
    let mut names = Vec::new();
    let mut edges = Vec::new();
    let mut base = 0u32;
    for (ci, rep) in reps.iter().enumerate() {
        let n = rep.len() as u32;
        for i in 0..n {
            names.push(format!("c{ci}.{i}"));
        }
        for (i, l) in rep.word().letters().enumerate() {
            let i = i as u32;
            let j = (i + 1) % n;
            if l.neg {
                edges.push(EdgeRec { source: base + j, target: base + i, label: l.sym });
            } else {
                edges.push(EdgeRec { source: base + i, target: base + j, label: l.sym });
            }
        }
        base += n;
    }
    (LabelledGraph::new(alphabet.clone(), names, edges), reps)
}

/// All occurrences of `w` in `g`: walks reading `w`. The empty word has one
/// occurrence per vertex.
pub fn find_occurrences(w: &Word, g: &LabelledGraph) -> Vec<Occurrence> {
    assert!(w.is_freely_reduced(), "find_occurrences expects a freely reduced word");
    if w.is_empty() {
        return (0..g.vertex_count() as u32).map(PathSpec::empty).collect();
    }
    let letters: Vec<Letter> = w.letters().collect();
    let mut out = Vec::new();
    for start in 0..g.vertex_count() as u32 {
        // Depth-first matching; graphs need not be reduced, so there may be
        // branching.
        let mut stack: Vec<(u32, usize, Vec<Step>)> = vec![(start, 0, Vec::new())];
        while let Some((at, pos, steps)) = stack.pop() {
            if pos == letters.len() {
                out.push(PathSpec { start, steps });
                continue;
            }
            for s in g.steps_from(at, letters[pos]) {
                let mut next = steps.clone();
                next.push(s);
                stack.push((g.step_target(s), pos + 1, next));
            }
        }
    }
    out.sort();
    out
}

const DEFAULT_BUDGET: u64 = 10_000_000;

/// All label-preserving isomorphisms `g1 → g2` (automorphisms when the
/// graphs coincide), by backtracking over vertex images with
/// signature pruning and deterministic edge matching.
fn isomorphisms_into(
    g1: &LabelledGraph,
    g2: &LabelledGraph,
    budget: u64,
    stop_after_first: bool,
) -> Result<Vec<Morphism>, GraphError> {
    if g1.vertex_count() != g2.vertex_count() || g1.edge_count() != g2.edge_count() {
        return Ok(Vec::new());
    }
    let n = g1.vertex_count();
    if n == 0 {
        return Ok(vec![Morphism { vertex_map: vec![], edge_map: vec![] }]);
    }
    let sig = |g: &LabelledGraph, v: u32| -> Vec<Letter> {
        let mut s: Vec<Letter> = g.half_edges(v).iter().map(|h| g.signed_label(*h)).collect();
        s.sort();
        s
    };
    let sig1: Vec<Vec<Letter>> = (0..n as u32).map(|v| sig(g1, v)).collect();
    let sig2: Vec<Vec<Letter>> = (0..n as u32).map(|v| sig(g2, v)).collect();

    // Vertex order: BFS per component so that most assignments are forced.
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    for v in 0..n {
        if seen[v] {
            continue;
        }
        seen[v] = true;
        let mut queue = VecDeque::from([v as u32]);
        while let Some(u) = queue.pop_front() {
            order.push(u);
            for h in g1.half_edges(u) {
                let s = Step { edge: h.edge, dir: h.dir };
                let w = g1.step_target(s);
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    queue.push_back(w);
                }
            }
        }
    }

    let mut results = Vec::new();
    let mut vmap = vec![u32::MAX; n];
    let mut used = vec![false; n];
    let mut nodes = 0u64;

    struct Ctx<'a> {
        g1: &'a LabelledGraph,
        g2: &'a LabelledGraph,
        order: &'a [u32],
        sig1: &'a [Vec<Letter>],
        sig2: &'a [Vec<Letter>],
        budget: u64,
        stop_after_first: bool,
    }

    fn consistent(ctx: &Ctx, vmap: &[u32], v: u32, u: u32) -> bool {
        if ctx.sig1[v as usize] != ctx.sig2[u as usize] {
            return false;
        }
        // Every edge of g1 at v with both endpoints assigned must be matched
        // in multiplicity by edges of g2 at u.
        let mut need: BTreeMap<(u32, Letter), i64> = BTreeMap::new();
        for h in ctx.g1.half_edges(v) {
            let s = Step { edge: h.edge, dir: h.dir };
            let w = ctx.g1.step_target(s);
            let img = if w == v { u } else { vmap[w as usize] };
            if img != u32::MAX {
                *need.entry((img, ctx.g1.signed_label(*h))).or_insert(0) += 1;
            }
        }
        let mut have: BTreeMap<(u32, Letter), i64> = BTreeMap::new();
        for h in ctx.g2.half_edges(u) {
            let s = Step { edge: h.edge, dir: h.dir };
            let w = ctx.g2.step_target(s);
            *have.entry((w, ctx.g2.signed_label(*h))).or_insert(0) += 1;
        }
        need.iter().all(|(k, c)| have.get(k).copied().unwrap_or(0) >= *c)
    }

    fn recurse(
        ctx: &Ctx,
        idx: usize,
        vmap: &mut Vec<u32>,
        used: &mut Vec<bool>,
        nodes: &mut u64,
        results: &mut Vec<Morphism>,
    ) -> Result<(), GraphError> {
        if ctx.stop_after_first && !results.is_empty() {
            return Ok(());
        }
        if idx == ctx.order.len() {
            if let Some(emap) = edge_map(ctx.g1, ctx.g2, vmap) {
                results.push(Morphism { vertex_map: vmap.clone(), edge_map: emap });
            }
            return Ok(());
        }
        let v = ctx.order[idx];
        // Candidates: if a BFS-earlier neighbor is assigned, images are
        // constrained to matching continuations; otherwise all vertices.
        let mut candidates: Vec<u32> = Vec::new();
        let mut constrained = false;
        for h in ctx.g1.half_edges(v) {
            let s = Step { edge: h.edge, dir: h.dir };
            let w = ctx.g1.step_target(s);
            if w != v && vmap[w as usize] != u32::MAX {
                // v --s--> w, so images of v must reach vmap[w] by the same
                // signed label.
                let lab = ctx.g1.signed_label(*h);
                let targets: Vec<u32> = ctx
                    .g2
                    .half_edges(vmap[w as usize])
                    .iter()
                    .filter(|h2| ctx.g2.signed_label(**h2) == lab.inverse())
                    .map(|h2| ctx.g2.step_target(Step { edge: h2.edge, dir: h2.dir }))
                    .collect();
                if constrained {
                    candidates.retain(|c| targets.contains(c));
                } else {
                    candidates = targets;
                    constrained = true;
                }
            }
        }
        if !constrained {
            candidates = (0..ctx.g2.vertex_count() as u32).collect();
        }
        candidates.sort_unstable();
        candidates.dedup();
        for u in candidates {
            if used[u as usize] {
                continue;
            }
            *nodes += 1;
            if *nodes > ctx.budget {
                return Err(GraphError::TooLarge);
            }
            if !consistent(ctx, vmap, v, u) {
                continue;
            }
            vmap[v as usize] = u;
            used[u as usize] = true;
            recurse(ctx, idx + 1, vmap, used, nodes, results)?;
            vmap[v as usize] = u32::MAX;
            used[u as usize] = false;
        }
        Ok(())
    }

    let ctx = Ctx { g1, g2, order: &order, sig1: &sig1, sig2: &sig2, budget, stop_after_first };
    recurse(&ctx, 0, &mut vmap, &mut used, &mut nodes, &mut results)?;
    results.sort();
    Ok(results)
}

/// Extends a vertex bijection to an edge bijection if possible. Parallel
/// edges with identical labels are paired in index order.
fn edge_map(g1: &LabelledGraph, g2: &LabelledGraph, vmap: &[u32]) -> Option<Vec<u32>> {
    let mut buckets: BTreeMap<(u32, u32, u32), Vec<u32>> = BTreeMap::new();
    for (i, e) in g2.edges().iter().enumerate() {
        buckets.entry((e.source, e.target, e.label)).or_default().push(i as u32);
    }
    let mut emap = vec![u32::MAX; g1.edge_count()];
    for (i, e) in g1.edges().iter().enumerate() {
        let key = (vmap[e.source as usize], vmap[e.target as usize], e.label);
        let bucket = buckets.get_mut(&key)?;
        emap[i] = bucket.pop()?;
    }
    Some(emap)
}

/// The full label-preserving automorphism group: all elements, a reduced
/// generating set, and the group order.
#[derive(Debug, Clone)]
pub struct AutGroup {
    pub generators: Vec<Morphism>,
    pub order: u64,
    elements: Vec<Morphism>,
}

impl AutGroup {
    pub fn elements(&self) -> &[Morphism] {
        &self.elements
    }

    /// Orbit id per vertex under the group action.
    pub fn vertex_orbits(&self, n: usize) -> Vec<u32> {
        let mut orbit = vec![u32::MAX; n];
        let mut next = 0u32;
        for v in 0..n {
            if orbit[v] != u32::MAX {
                continue;
            }
            for m in &self.elements {
                orbit[m.vertex_map[v] as usize] = next;
            }
            orbit[v] = next;
            next += 1;
        }
        orbit
    }
}

pub fn automorphism_group(g: &LabelledGraph) -> Result<AutGroup, GraphError> {
    automorphism_group_budgeted(g, DEFAULT_BUDGET)
}

pub fn automorphism_group_budgeted(g: &LabelledGraph, budget: u64) -> Result<AutGroup, GraphError> {
    let elements = isomorphisms_into(g, g, budget, false)?;
    let order = elements.len() as u64;
    // Greedy reduced generating set: add elements (in canonical order) that
    // enlarge the generated subgroup.
    let mut generators: Vec<Morphism> = Vec::new();
    let mut generated: BTreeSet<Vec<u32>> = BTreeSet::new();
    generated.insert(Morphism::identity(g).vertex_map);
    for m in &elements {
        if generated.contains(&m.vertex_map) {
            continue;
        }
        generators.push(m.clone());
        // Closure under the current generators.
        let by_vmap: BTreeMap<Vec<u32>, &Morphism> =
            elements.iter().map(|e| (e.vertex_map.clone(), e)).collect();
        let mut frontier: Vec<Vec<u32>> = generated.iter().cloned().collect();
        while let Some(v) = frontier.pop() {
            for gen in &generators {
                let m1 = by_vmap[&v];
                let prod = gen.compose(m1);
                if generated.insert(prod.vertex_map.clone()) {
                    frontier.push(prod.vertex_map);
                }
            }
        }
    }
    Ok(AutGroup { generators, order, elements })
}

/// Label-preserving isomorphism between two graphs, if one exists.
pub fn isomorphism(g1: &LabelledGraph, g2: &LabelledGraph) -> Result<Option<Morphism>, GraphError> {
    let all = isomorphisms_into(g1, g2, DEFAULT_BUDGET, true)?;
    Ok(all.into_iter().next())
}

/// Every vertex-simple closed path, up to rotation and reversal, in
/// canonical rotation (least vertex first, lexicographically least step
/// sequence). Loops and 2-cycles through parallel edges are included.
pub fn simple_cycles(g: &LabelledGraph, max_len: Option<usize>) -> Vec<PathSpec> {
    let cap = max_len.unwrap_or(usize::MAX);
    let mut out: BTreeSet<PathSpec> = BTreeSet::new();
    for s in 0..g.vertex_count() as u32 {
        // DFS over vertex-simple paths using only vertices >= s.
        let mut stack: Vec<(u32, Vec<Step>, BTreeSet<u32>)> =
            vec![(s, Vec::new(), BTreeSet::from([s]))];
        while let Some((at, steps, visited)) = stack.pop() {
            if steps.len() >= cap {
                continue;
            }
            for h in g.half_edges(at) {
                let step = Step { edge: h.edge, dir: h.dir };
                if g.step_source(step) != at {
                    continue;
                }
                let to = g.step_target(step);
                if to == s {
                    // Closing: no immediate edge backtrack for length-2; a
                    // loop traversed once is fine.
                    if let Some(first) = steps.first() {
                        if steps.len() == 1 && first.edge == step.edge {
                            continue;
                        }
                    } else if at == s && g.edge(step.edge).source != g.edge(step.edge).target {
                        // Single non-loop step cannot close.
                        continue;
                    }
                    let mut cycle = steps.clone();
                    cycle.push(step);
                    let fwd = PathSpec { start: s, steps: cycle };
                    let rev = g.path_reverse(&fwd);
                    out.insert(if fwd <= rev { fwd } else { rev });
                    continue;
                }
                if to < s || visited.contains(&to) {
                    continue;
                }
                let mut next_steps = steps.clone();
                next_steps.push(step);
                let mut next_visited = visited.clone();
                next_visited.insert(to);
                stack.push((to, next_steps, next_visited));
            }
        }
    }
    out.into_iter().collect()
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// Parses the graph text format: `#` comments, an `alphabet:` header,
/// optional `vertex <name>` lines, and one `source target label` line per
/// edge. Vertex names are opaque and mapped to dense ids in order of first
/// appearance.
pub fn parse_graph(text: &str) -> Result<LabelledGraph, ParseError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut names: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, u32> = BTreeMap::new();
    let mut edges: Vec<EdgeRec> = Vec::new();
    let intern = |name: &str, names: &mut Vec<String>, index: &mut BTreeMap<String, u32>| {
        if let Some(&i) = index.get(name) {
            return i;
        }
        let i = names.len() as u32;
        names.push(name.to_string());
        index.insert(name.to_string(), i);
        i
    };
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("alphabet:") {
            if alphabet.is_some() {
                return Err(ParseError { line: line_no, col: 1, msg: "duplicate alphabet header".into() });
            }
            let syms: Vec<&str> = rest.split_whitespace().collect();
            if syms.is_empty() {
                return Err(ParseError { line: line_no, col: 1, msg: "empty alphabet".into() });
            }
            alphabet = Some(Alphabet::new(syms));
            continue;
        }
        let alpha = alphabet.as_ref().ok_or(ParseError {
            line: line_no,
            col: 1,
            msg: "line before alphabet header".into(),
        })?;
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks[0] == "vertex" {
            if toks.len() != 2 {
                return Err(ParseError { line: line_no, col: 1, msg: "expected `vertex <name>`".into() });
            }
            intern(toks[1], &mut names, &mut index);
            continue;
        }
        if toks.len() != 3 {
            return Err(ParseError {
                line: line_no,
                col: 1,
                msg: "expected `source target label`".into(),
            });
        }
        let label = alpha.index(toks[2]).ok_or(ParseError {
            line: line_no,
            col: 3,
            msg: format!("unknown label `{}`", toks[2]),
        })?;
        let s = intern(toks[0], &mut names, &mut index);
        let t = intern(toks[1], &mut names, &mut index);
        edges.push(EdgeRec { source: s, target: t, label });
    }
    let alphabet = alphabet.ok_or(ParseError { line: 1, col: 1, msg: "missing `alphabet:` header".into() })?;
    Ok(LabelledGraph::new(alphabet, names, edges))
}

/// Writes the canonical graph text format; `parse_graph` inverts it exactly.
pub fn write_graph(g: &LabelledGraph) -> String {
    let mut out = String::new();
    out.push_str("alphabet:");
    for n in g.alphabet().names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    // Vertex lines keep the id order stable regardless of edge order.
    for v in g.vertex_names() {
        out.push_str("vertex ");
        out.push_str(v);
        out.push('\n');
    }
    for e in g.edges() {
        out.push_str(&format!(
            "{} {} {}\n",
            g.vertex_name(e.source),
            g.vertex_name(e.target),
            g.alphabet().name(e.label)
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::cyclic_reduce;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"])
    }

    fn cw(alpha: &Alphabet, s: &str) -> CyclicWord {
        cyclic_reduce(&alpha.parse_word(s).unwrap()).unwrap().0
    }

    #[test]
    fn cycle_graph_shapes() {
        let a = ab();
        let g = cycle_graph(&a, &cw(&a, "a b"));
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edge_count(), 2);

        let g = cycle_graph(&a, &cw(&a, "a"));
        assert_eq!(g.vertex_count(), 1);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.edge(0).source, g.edge(0).target);
    }

    #[test]
    fn reduced_check() {
        let a = ab();
        let g = cycle_graph(&a, &cw(&a, "a b"));
        assert!(validate_reduced(&g).reduced);

        // Two outgoing a-edges at one vertex.
        let g = LabelledGraph::with_numbered_vertices(
            ab(),
            3,
            vec![
                EdgeRec { source: 0, target: 1, label: 0 },
                EdgeRec { source: 0, target: 2, label: 0 },
            ],
        );
        let v = validate_reduced(&g);
        assert!(!v.reduced);
        assert_eq!(v.witness, Some((0, Letter::pos(0))));
    }

    #[test]
    fn gamma_r_components() {
        let a = ab();
        let closure = crate::words::symmetrized_closure(&[a.parse_word("a b").unwrap()]).unwrap();
        let (g, reps) = gamma_r(&a, &closure);
        assert_eq!(reps.len(), 1);
        assert_eq!(g.component_count(), 1);
        assert_eq!(g.vertex_count(), 2);

        let abcd = Alphabet::new(["a", "b", "c", "d"]);
        let closure = crate::words::symmetrized_closure(&[
            abcd.parse_word("a b").unwrap(),
            abcd.parse_word("c d").unwrap(),
        ])
        .unwrap();
        let (g, reps) = gamma_r(&abcd, &closure);
        assert_eq!(reps.len(), 2);
        assert_eq!(g.component_count(), 2);
    }

    #[test]
    fn occurrences_examples() {
        let abc = Alphabet::new(["a", "b", "c"]);
        let closure = crate::words::symmetrized_closure(&[
            abc.parse_word("a b").unwrap(),
            abc.parse_word("a c").unwrap(),
        ])
        .unwrap();
        let (g, _) = gamma_r(&abc, &closure);
        let occ = find_occurrences(&abc.parse_word("a").unwrap(), &g);
        assert_eq!(occ.len(), 2);

        let empty = find_occurrences(&Word::empty(), &g);
        assert_eq!(empty.len(), g.vertex_count());

        let a = ab();
        let g = cycle_graph(&a, &cw(&a, "a b a b"));
        let occ = find_occurrences(&a.parse_word("a b").unwrap(), &g);
        assert_eq!(occ.len(), 2);
    }

    #[test]
    fn occurrence_labels_read_back() {
        let a = ab();
        let g = cycle_graph(&a, &cw(&a, "a b a b"));
        let w = a.parse_word("a b a").unwrap();
        for occ in find_occurrences(&w, &g) {
            assert!(g.path_is_valid(&occ));
            assert_eq!(g.path_label(&occ), w);
        }
    }

    #[test]
    fn reverse_label_inverse() {
        let a = ab();
        let g = cycle_graph(&a, &cw(&a, "a a b"));
        let p = PathSpec { start: 0, steps: vec![Step::fwd(0), Step::fwd(1)] };
        let r = g.path_reverse(&p);
        assert_eq!(g.path_label(&r), g.path_label(&p).inverse());
        assert!(g.path_is_valid(&r));
    }

    #[test]
    fn automorphism_orders() {
        let a = ab();
        let g = cycle_graph(&a, &cw(&a, "a b a b"));
        let aut = automorphism_group(&g).unwrap();
        assert_eq!(aut.order, 2);

        let g = cycle_graph(&a, &cw(&a, "a b"));
        assert_eq!(automorphism_group(&g).unwrap().order, 1);

        let g = LabelledGraph::with_numbered_vertices(
            ab(),
            2,
            vec![EdgeRec { source: 0, target: 1, label: 0 }],
        );
        assert_eq!(automorphism_group(&g).unwrap().order, 1);
    }

    #[test]
    fn automorphism_brute_force_small() {
        // Compare against brute-force enumeration of vertex bijections.
        let a = ab();
        let graphs = vec![
            cycle_graph(&a, &cw(&a, "a b a b")),
            cycle_graph(&a, &cw(&a, "a a a")),
            cycle_graph(&a, &cw(&a, "a b a a b")),
        ];
        for g in graphs {
            let n = g.vertex_count();
            let mut count = 0u64;
            let mut perm: Vec<u32> = (0..n as u32).collect();
            // Heap's algorithm over permutations.
            fn heaps(perm: &mut Vec<u32>, k: usize, g: &LabelledGraph, count: &mut u64) {
                if k == 1 {
                    if is_label_preserving(g, perm) {
                        *count += 1;
                    }
                    return;
                }
                for i in 0..k {
                    heaps(perm, k - 1, g, count);
                    if k % 2 == 0 {
                        perm.swap(i, k - 1);
                    } else {
                        perm.swap(0, k - 1);
                    }
                }
            }
            fn is_label_preserving(g: &LabelledGraph, perm: &[u32]) -> bool {
                // Every edge must map to an edge with same label/orientation.
                let mut remaining: Vec<EdgeRec> = g.edges().to_vec();
                for e in g.edges() {
                    let img = EdgeRec {
                        source: perm[e.source as usize],
                        target: perm[e.target as usize],
                        label: e.label,
                    };
                    match remaining.iter().position(|r| *r == img) {
                        Some(i) => {
                            remaining.remove(i);
                        }
                        None => return false,
                    }
                }
                true
            }
            heaps(&mut perm, n, &g, &mut count);
            let aut = automorphism_group(&g).unwrap();
            assert_eq!(aut.order, count);
        }
    }

    #[test]
    fn simple_cycles_examples() {
        let a = ab();
        let g = cycle_graph(&a, &cw(&a, "a b a b a")).clone();
        assert_eq!(simple_cycles(&g, None).len(), 1);

        // Theta graph: two vertices, three parallel arcs (as single edges
        // with distinct labels to stay a multigraph).
        let abc = Alphabet::new(["a", "b", "c"]);
        let g = LabelledGraph::with_numbered_vertices(
            abc,
            2,
            vec![
                EdgeRec { source: 0, target: 1, label: 0 },
                EdgeRec { source: 0, target: 1, label: 1 },
                EdgeRec { source: 0, target: 1, label: 2 },
            ],
        );
        assert_eq!(simple_cycles(&g, None).len(), 3);

        // Forest.
        let g = LabelledGraph::with_numbered_vertices(
            ab(),
            3,
            vec![
                EdgeRec { source: 0, target: 1, label: 0 },
                EdgeRec { source: 1, target: 2, label: 1 },
            ],
        );
        assert!(simple_cycles(&g, None).is_empty());
    }

    #[test]
    fn simple_cycles_brute_force() {
        // Edge-subset oracle: a simple cycle support is a connected edge
        // subset in which every touched vertex has subset-degree exactly 2.
        let a = Alphabet::new(["a", "b", "c"]);
        let graphs = vec![
            LabelledGraph::with_numbered_vertices(
                a.clone(),
                4,
                vec![
                    EdgeRec { source: 0, target: 1, label: 0 },
                    EdgeRec { source: 1, target: 2, label: 1 },
                    EdgeRec { source: 2, target: 0, label: 2 },
                    EdgeRec { source: 2, target: 3, label: 0 },
                    EdgeRec { source: 3, target: 0, label: 1 },
                    EdgeRec { source: 1, target: 3, label: 2 },
                ],
            ),
            LabelledGraph::with_numbered_vertices(
                a.clone(),
                3,
                vec![
                    EdgeRec { source: 0, target: 0, label: 0 },
                    EdgeRec { source: 0, target: 1, label: 1 },
                    EdgeRec { source: 1, target: 2, label: 2 },
                    EdgeRec { source: 2, target: 0, label: 0 },
                    EdgeRec { source: 1, target: 2, label: 1 },
                ],
            ),
        ];
        for g in graphs {
            let m = g.edge_count();
            let mut oracle = 0u64;
            for mask in 1u32..(1 << m) {
                let subset: Vec<u32> =
                    (0..m as u32).filter(|e| mask & (1 << e) != 0).collect();
                let mut deg: BTreeMap<u32, u32> = BTreeMap::new();
                for &e in &subset {
                    let er = g.edge(e);
                    *deg.entry(er.source).or_insert(0) += 1;
                    *deg.entry(er.target).or_insert(0) += 1;
                }
                if !deg.values().all(|&d| d == 2) {
                    continue;
                }
                // Connectivity of the subset.
                let verts: Vec<u32> = deg.keys().copied().collect();
                let mut seen = BTreeSet::from([verts[0]]);
                let mut frontier = vec![verts[0]];
                while let Some(v) = frontier.pop() {
                    for &e in &subset {
                        let er = g.edge(e);
                        for (x, y) in [(er.source, er.target), (er.target, er.source)] {
                            if x == v && !seen.contains(&y) {
                                seen.insert(y);
                                frontier.push(y);
                            }
                        }
                    }
                }
                if seen.len() == verts.len() {
                    oracle += 1;
                }
            }
            assert_eq!(simple_cycles(&g, None).len() as u64, oracle);
        }
    }

    #[test]
    fn graph_format_roundtrip() {
        let text = "alphabet: a b\nvertex u\nvertex v\nu v a\nv u b\nu u a\n";
        let g = parse_graph(text).unwrap();
        assert_eq!(write_graph(&g), text);
        let g2 = parse_graph(&write_graph(&g)).unwrap();
        assert_eq!(g, g2);
    }

    #[test]
    fn isomorphism_examples() {
        let a = ab();
        let g1 = cycle_graph(&a, &cw(&a, "a b")); // class of ab
        let g2 = cycle_graph(&a, &cw(&a, "b a"));
        assert!(isomorphism(&g1, &g2).unwrap().is_some());
        let g3 = cycle_graph(&a, &cw(&a, "a b a b"));
        assert!(isomorphism(&g1, &g3).unwrap().is_none());
    }
}
