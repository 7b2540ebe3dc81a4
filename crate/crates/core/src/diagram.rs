//! Combinatorial planar/spherical diagrams as rotation systems: curvature
//! audits, reduction moves (boundary folding, inverse-face cancellation,
//! identity-edge cleanup), degree computations, and shape predicates.
//!
//! A diagram is a set of darts with an opposite involution and a cyclic
//! next-around-vertex rotation. Faces are the orbits of `σ ∘ α`; the
//! sphere/disk distinction is the Euler invariant plus, for disks, a
//! distinguished outer face. Moves mutate a diagram under exclusive
//! access; audits are pure.

use std::collections::{BTreeMap, BTreeSet};

use num_rational::Ratio;
use thiserror::Error;

use crate::completion::{locally_geodesic, Completion};
use crate::graph::{find_occurrences, LabelledGraph};
use crate::pieces::build_piece_index;
use crate::words::{Alphabet, Letter, ParseError, Word};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DiagramError {
    #[error("invalid map: {0}")]
    InvalidMap(String),
    #[error("boundary word is cyclically reduced; nothing to fold")]
    NothingToFold,
    #[error("face labels are not freely inverse from any shared corner")]
    NotFreelyInverse,
    #[error("no lift: face word `{0}` is not the label of a closed path in the host")]
    NoLift(String),
    #[error("operation requires a disk diagram")]
    NotADisk,
    #[error("operation requires a sphere diagram")]
    NotASphere,
    #[error(transparent)]
    Parse(#[from] ParseError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Topology {
    Sphere,
    /// Disk: a sphere map with a distinguished outer face, named by one of
    /// its darts.
    Disk { outer_dart: u32 },
}

/// A finite combinatorial map with labelled darts. `label = None` marks an
/// identity-labelled edge (used transiently by the reduction moves).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagram {
    alphabet: Alphabet,
    /// Origin vertex of each dart.
    vertex: Vec<u32>,
    /// σ: next dart counterclockwise around the same vertex.
    next: Vec<u32>,
    /// α: the opposite dart (other side of the same edge).
    opposite: Vec<u32>,
    /// Label read when crossing the dart away from its origin vertex.
    label: Vec<Option<Letter>>,
    n_vertices: u32,
    topology: Topology,
}

/// One step of a face cycle used by the face-list constructor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaceStep {
    pub from: u32,
    pub to: u32,
    pub label: Option<Letter>,
}

impl FaceStep {
    pub fn new(from: u32, to: u32, letter: Letter) -> FaceStep {
        FaceStep { from, to, label: Some(letter) }
    }
}

impl Diagram {
    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn dart_count(&self) -> usize {
        self.next.len()
    }

    pub fn edge_count(&self) -> usize {
        self.next.len() / 2
    }

    pub fn vertex_count(&self) -> usize {
        self.n_vertices as usize
    }

    pub fn dart_vertex(&self, d: u32) -> u32 {
        self.vertex[d as usize]
    }

    pub fn opposite_dart(&self, d: u32) -> u32 {
        self.opposite[d as usize]
    }

    pub fn dart_label(&self, d: u32) -> Option<Letter> {
        self.label[d as usize]
    }

    pub fn face_next(&self, d: u32) -> u32 {
        self.next[self.opposite[d as usize] as usize]
    }

    /// Builds a map from explicit face cycles. Every directed edge-side
    /// must appear exactly once; sides are paired as `(from, to, l)` with
    /// `(to, from, l⁻¹)` in encounter order.
    pub fn from_face_cycles(
        alphabet: Alphabet,
        faces: &[Vec<FaceStep>],
        topology_outer: Option<usize>,
    ) -> Result<Diagram, DiagramError> {
        let mut vertex = Vec::new();
        let mut label: Vec<Option<Letter>> = Vec::new();
        let mut phi = Vec::new(); // face-next by construction
        let mut dart_of: Vec<Vec<u32>> = Vec::new();
        let mut n_vertices = 0u32;
        for cycle in faces {
            if cycle.is_empty() {
                return Err(DiagramError::InvalidMap("empty face cycle".into()));
            }
            let base = vertex.len() as u32;
            let mut ids = Vec::new();
            for (i, s) in cycle.iter().enumerate() {
                let next_step = cycle[(i + 1) % cycle.len()];
                if s.to != next_step.from {
                    return Err(DiagramError::InvalidMap("face cycle not closed".into()));
                }
                let d = base + i as u32;
                vertex.push(s.from);
                label.push(s.label);
                phi.push(base + ((i + 1) % cycle.len()) as u32);
                n_vertices = n_vertices.max(s.from + 1).max(s.to + 1);
                ids.push(d);
            }
            dart_of.push(ids);
        }
        let nd = vertex.len();
        // Pair opposite sides.
        let mut opposite = vec![u32::MAX; nd];
        let mut pool: BTreeMap<(u32, u32, Option<Letter>), Vec<u32>> = BTreeMap::new();
        let to_of = |d: usize, faces: &[Vec<FaceStep>], dart_of: &[Vec<u32>]| -> (u32, u32, Option<Letter>) {
            for (fi, ids) in dart_of.iter().enumerate() {
                if let Some(pos) = ids.iter().position(|&x| x == d as u32) {
                    let s = faces[fi][pos];
                    return (s.from, s.to, s.label);
                }
            }
            unreachable!()
        };
        for d in 0..nd {
            let (from, to, l) = to_of(d, faces, &dart_of);
            let inv = l.map(Letter::inverse);
            if let Some(partners) = pool.get_mut(&(to, from, inv)) {
                if let Some(p) = partners.pop() {
                    opposite[d] = p;
                    opposite[p as usize] = d as u32;
                    continue;
                }
            }
            pool.entry((from, to, l)).or_default().push(d as u32);
        }
        if opposite.iter().any(|&o| o == u32::MAX) {
            return Err(DiagramError::InvalidMap("unmatched edge side".into()));
        }
        // σ = φ ∘ α.
        let mut next = vec![0u32; nd];
        for d in 0..nd {
            next[d] = phi[opposite[d] as usize];
        }
        let topology = match topology_outer {
            None => Topology::Sphere,
            Some(fi) => Topology::Disk { outer_dart: dart_of[fi][0] },
        };
        let d = Diagram { alphabet, vertex, next, opposite, label, n_vertices, topology };
        d.validate()?;
        Ok(d)
    }

    /// Structural validity: involutions, rotations staying at their
    /// vertex, one rotation cycle per vertex, inverse labels across edges,
    /// connectedness, and Euler characteristic 2.
    pub fn validate(&self) -> Result<(), DiagramError> {
        let nd = self.next.len();
        if nd % 2 != 0 {
            return Err(DiagramError::InvalidMap("odd number of darts".into()));
        }
        if nd == 0 {
            if self.n_vertices != 1 {
                return Err(DiagramError::InvalidMap(
                    "empty diagram must have exactly one vertex".into(),
                ));
            }
            return Ok(());
        }
        let mut seen_next = vec![false; nd];
        for d in 0..nd as u32 {
            let o = self.opposite[d as usize];
            if o as usize >= nd || self.opposite[o as usize] != d || o == d {
                return Err(DiagramError::InvalidMap("bad opposite involution".into()));
            }
            match (self.label[d as usize], self.label[o as usize]) {
                (None, None) => {}
                (Some(a), Some(b)) if a == b.inverse() => {}
                _ => return Err(DiagramError::InvalidMap("labels not inverse across edge".into())),
            }
            let n = self.next[d as usize];
            if n as usize >= nd {
                return Err(DiagramError::InvalidMap("rotation out of range".into()));
            }
            if self.vertex[n as usize] != self.vertex[d as usize] {
                return Err(DiagramError::InvalidMap("rotation leaves vertex".into()));
            }
            if seen_next[n as usize] {
                return Err(DiagramError::InvalidMap("rotation not a permutation".into()));
            }
            seen_next[n as usize] = true;
        }
        // One rotation orbit per vertex.
        let mut orbit = vec![u32::MAX; nd];
        let mut orbits = 0u32;
        for d in 0..nd as u32 {
            if orbit[d as usize] != u32::MAX {
                continue;
            }
            let mut cur = d;
            loop {
                orbit[cur as usize] = orbits;
                cur = self.next[cur as usize];
                if cur == d {
                    break;
                }
            }
            orbits += 1;
        }
        let used_vertices: BTreeSet<u32> = self.vertex.iter().copied().collect();
        if orbits as usize != used_vertices.len() {
            return Err(DiagramError::InvalidMap("vertex darts split into several cycles".into()));
        }
        // Connectivity over darts via σ and α.
        let mut seen = vec![false; nd];
        let mut stack = vec![0u32];
        seen[0] = true;
        let mut count = 1;
        while let Some(d) = stack.pop() {
            for n in [self.next[d as usize], self.opposite[d as usize]] {
                if !seen[n as usize] {
                    seen[n as usize] = true;
                    count += 1;
                    stack.push(n);
                }
            }
        }
        if count != nd {
            return Err(DiagramError::InvalidMap("diagram not connected".into()));
        }
        if self.n_vertices as usize != used_vertices.len() {
            return Err(DiagramError::InvalidMap("isolated vertex in non-empty diagram".into()));
        }
        // Euler characteristic.
        let v = used_vertices.len() as i64;
        let e = (nd / 2) as i64;
        let f = self.face_cycles().len() as i64;
        if v - e + f != 2 {
            return Err(DiagramError::InvalidMap(format!(
                "Euler characteristic {} != 2",
                v - e + f
            )));
        }
        if let Topology::Disk { outer_dart } = self.topology {
            if outer_dart as usize >= nd {
                return Err(DiagramError::InvalidMap("outer dart out of range".into()));
            }
        }
        Ok(())
    }

    /// Faces as dart cycles (orbits of `σ ∘ α`).
    pub fn face_cycles(&self) -> Vec<Vec<u32>> {
        let nd = self.next.len();
        let mut seen = vec![false; nd];
        let mut out = Vec::new();
        for d in 0..nd as u32 {
            if seen[d as usize] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut cur = d;
            loop {
                seen[cur as usize] = true;
                cycle.push(cur);
                cur = self.face_next(cur);
                if cur == d {
                    break;
                }
            }
            out.push(cycle);
        }
        out
    }

    /// Index of the face containing a dart, under the current face list.
    pub fn face_of(&self, faces: &[Vec<u32>], d: u32) -> usize {
        faces.iter().position(|f| f.contains(&d)).expect("dart in some face")
    }

    /// Word read along a dart cycle, skipping identity darts.
    pub fn cycle_word(&self, cycle: &[u32]) -> Word {
        Word::from_letters(cycle.iter().filter_map(|&d| self.label[d as usize]))
    }

    pub fn outer_dart(&self) -> Result<u32, DiagramError> {
        match self.topology {
            Topology::Disk { outer_dart } => Ok(outer_dart),
            Topology::Sphere => Err(DiagramError::NotADisk),
        }
    }

    /// Boundary word of a disk, read along the outer face from its
    /// distinguished dart.
    pub fn boundary_word(&self) -> Result<Word, DiagramError> {
        let od = self.outer_dart()?;
        if self.dart_count() == 0 {
            return Ok(Word::empty());
        }
        let mut cycle = Vec::new();
        let mut cur = od;
        loop {
            cycle.push(cur);
            cur = self.face_next(cur);
            if cur == od {
                break;
            }
        }
        Ok(self.cycle_word(&cycle))
    }

    pub fn degree_of_vertex(&self, v: u32) -> usize {
        self.vertex.iter().filter(|&&x| x == v).count()
    }

    // -- surgery helpers ----------------------------------------------------

    fn prev_dart(&self, d: u32) -> u32 {
        let mut cur = d;
        loop {
            let n = self.next[cur as usize];
            if n == d {
                return cur;
            }
            cur = n;
        }
    }

    /// Removes darts, compacting ids; keeps the topology marker on a
    /// surviving outer dart (the caller provides the replacement).
    fn remove_darts(&mut self, dead: &BTreeSet<u32>, new_outer: Option<u32>) {
        let nd = self.next.len();
        let mut remap = vec![u32::MAX; nd];
        let mut kept = 0u32;
        for d in 0..nd as u32 {
            if !dead.contains(&d) {
                remap[d as usize] = kept;
                kept += 1;
            }
        }
        let mut vertex = Vec::with_capacity(kept as usize);
        let mut next = Vec::with_capacity(kept as usize);
        let mut opposite = Vec::with_capacity(kept as usize);
        let mut label = Vec::with_capacity(kept as usize);
        for d in 0..nd as u32 {
            if dead.contains(&d) {
                continue;
            }
            vertex.push(self.vertex[d as usize]);
            next.push(remap[self.next[d as usize] as usize]);
            opposite.push(remap[self.opposite[d as usize] as usize]);
            label.push(self.label[d as usize]);
        }
        // Compact vertex ids.
        let used: BTreeSet<u32> = vertex.iter().copied().collect();
        let vmap: BTreeMap<u32, u32> =
            used.iter().enumerate().map(|(i, &v)| (v, i as u32)).collect();
        for v in vertex.iter_mut() {
            *v = vmap[v];
        }
        self.n_vertices = if vertex.is_empty() { 1 } else { used.len() as u32 };
        self.vertex = vertex;
        self.next = next;
        self.opposite = opposite;
        self.label = label;
        if let Topology::Disk { outer_dart } = self.topology {
            match new_outer {
                Some(od) => {
                    assert!(!dead.contains(&od), "outer dart removed without replacement");
                    self.topology = Topology::Disk { outer_dart: remap[od as usize] };
                }
                None => {
                    assert!(
                        self.next.is_empty(),
                        "outer face lost while darts remain"
                    );
                    self.topology = Topology::Disk { outer_dart: 0 };
                    let _ = outer_dart;
                }
            }
        }
    }

    /// Unlinks `d` from its rotation (σ only; does not delete it).
    fn unlink(&mut self, d: u32) {
        let p = self.prev_dart(d);
        if p == d {
            return; // last dart at the vertex
        }
        self.next[p as usize] = self.next[d as usize];
    }

    /// Renames the origin vertex of every dart in a rotation chain.
    fn set_vertex_of_cycle(&mut self, start: u32, v: u32) {
        let mut cur = start;
        loop {
            self.vertex[cur as usize] = v;
            cur = self.next[cur as usize];
            if cur == start {
                break;
            }
        }
    }

    /// Folds the face corner at `p`: `q = face_next(p)` must carry the
    /// inverse label. Identifies the two edges (or removes a spur) and
    /// shortens the face by two darts.
    pub fn face_fold(&mut self, p: u32) -> Result<(), DiagramError> {
        let q = self.face_next(p);
        match (self.label[p as usize], self.label[q as usize]) {
            (a, b) if a == b.map(Letter::inverse) || (a.is_none() && b.is_none()) => {}
            _ => return Err(DiagramError::InvalidMap("corner labels not inverse".into())),
        }
        let ap = self.opposite[p as usize];
        let aq = self.opposite[q as usize];
        // The outer survivor must be picked while the face structure is
        // intact; dead darts keep stale pointers after the surgery.
        let dead = BTreeSet::from([p, q]);
        let new_outer = self.pick_surviving_outer(&dead);
        if matches!(self.topology, Topology::Disk { .. })
            && new_outer.is_none()
            && self.dart_count() > 2
        {
            // Folding the last boundary corner of a freely trivial boundary
            // would close the disk into a sphere.
            return Err(DiagramError::InvalidMap(
                "fold would eliminate the boundary while faces remain".into(),
            ));
        }
        if q == ap {
            // Spur: the edge is traversed out and back; its far vertex has
            // only this edge. Remove the edge and the far vertex.
            self.unlink(p);
            self.remove_darts(&dead, new_outer);
            return Ok(());
        }
        let u = self.vertex[p as usize];
        let w = self.vertex[aq as usize];
        if u == w {
            // Parallel edges between u and the corner vertex. Identifying
            // them closes the pocket between; the faces beyond the two
            // edges merge through the surviving edge.
            let x = self.prev_dart(p);
            let y = self.next[p as usize];
            if x == p || y == p {
                return Err(DiagramError::InvalidMap(
                    "degenerate parallel fold".into(),
                ));
            }
            if y == aq {
                // p and α(q) adjacent in the rotation: plain removal.
                self.unlink(p);
            } else {
                // Darts between p and α(q) hang inside the pocket: the
                // rotation splits, moving the pocket fan onto a new vertex.
                let w1 = self.next[aq as usize];
                if w1 == p {
                    self.unlink(p);
                } else {
                    self.next[x as usize] = w1;
                    self.next[aq as usize] = y;
                    let v2 = self.n_vertices;
                    self.n_vertices += 1;
                    self.set_vertex_of_cycle(aq, v2);
                }
            }
            self.unlink(q);
            self.opposite[ap as usize] = aq;
            self.opposite[aq as usize] = ap;
            self.remove_darts(&dead, new_outer);
            return Ok(());
        }
        // σ at u: replace p by the rotation of w entered after α(q).
        let x = self.prev_dart(p);
        let y = self.next[p as usize];
        let w1 = self.next[aq as usize];
        if x == p {
            // p was alone at u: u's rotation becomes w's rotation.
        } else {
            self.next[x as usize] = if w1 == aq && self.vertex[w1 as usize] == w {
                // w's rotation is just α(q).
                aq
            } else {
                w1
            };
            self.next[aq as usize] = y;
        }
        if x == p {
            // Nothing at u except p; w's rotation keeps its own cycle.
        }
        // Move w's darts to u.
        self.set_vertex_of_cycle(aq, u);
        // σ at v: drop q (σ(α(p)) becomes old σ(q)).
        self.unlink(q);
        // Re-pair the surviving sides.
        self.opposite[ap as usize] = aq;
        self.opposite[aq as usize] = ap;
        self.remove_darts(&dead, new_outer);
        Ok(())
    }

    fn pick_surviving_outer(&self, dead: &BTreeSet<u32>) -> Option<u32> {
        match self.topology {
            Topology::Sphere => None,
            Topology::Disk { outer_dart } => {
                if !dead.contains(&outer_dart) {
                    return Some(outer_dart);
                }
                // Walk the outer face for a survivor; none means the
                // diagram is being emptied entirely.
                let mut cur = self.face_next(outer_dart);
                while cur != outer_dart {
                    if !dead.contains(&cur) {
                        return Some(cur);
                    }
                    cur = self.face_next(cur);
                }
                None
            }
        }
    }

    /// Replaces a 2-gon face (labels mutually inverse) by a single edge.
    /// One of the paper's 0-face elimination steps, also used with real
    /// labels.
    pub fn collapse_bigon(&mut self, p: u32) -> Result<(), DiagramError> {
        let q = self.face_next(p);
        if self.face_next(q) != p {
            return Err(DiagramError::InvalidMap("not a bigon".into()));
        }
        match (self.label[p as usize], self.label[q as usize]) {
            (a, b) if a == b.map(Letter::inverse) || (a.is_none() && b.is_none()) => {}
            _ => return Err(DiagramError::InvalidMap("bigon labels not inverse".into())),
        }
        let ap = self.opposite[p as usize];
        let aq = self.opposite[q as usize];
        if ap == q {
            return Err(DiagramError::InvalidMap("degenerate single-edge sphere".into()));
        }
        let dead = BTreeSet::from([p, q]);
        let new_outer = self.pick_surviving_outer(&dead);
        self.unlink(p);
        self.unlink(q);
        self.opposite[ap as usize] = aq;
        self.opposite[aq as usize] = ap;
        self.remove_darts(&dead, new_outer);
        Ok(())
    }

    /// Contracts an identity-labelled edge with distinct endpoints
    /// (0-face elimination step 1).
    pub fn contract_identity_edge(&mut self, d: u32) -> Result<(), DiagramError> {
        if self.label[d as usize].is_some() {
            return Err(DiagramError::InvalidMap("edge not identity-labelled".into()));
        }
        let ad = self.opposite[d as usize];
        let u = self.vertex[d as usize];
        let v = self.vertex[ad as usize];
        if u == v {
            return Err(DiagramError::InvalidMap("identity edge is a loop; use removal".into()));
        }
        // Splice the two rotations: σ(prev(d)) = σ(ad), σ(prev(ad)) = σ(d).
        let dead = BTreeSet::from([d, ad]);
        let new_outer = self.pick_surviving_outer(&dead);
        let pd = self.prev_dart(d);
        let pad = self.prev_dart(ad);
        let nd_ = self.next[d as usize];
        let nad = self.next[ad as usize];
        if pd == d && pad == ad {
            // Edge alone: contracting leaves an isolated vertex; only valid
            // for the 2-dart diagram.
            self.remove_darts(&dead, new_outer);
            return Ok(());
        }
        if pd == d {
            // d alone at u: v's rotation minus ad survives.
            self.next[pad as usize] = nad;
        } else if pad == ad {
            self.next[pd as usize] = nd_;
        } else {
            self.next[pd as usize] = nad;
            self.next[pad as usize] = nd_;
        }
        self.set_vertex_of_cycle(if pd == d { nad } else { self.next[pd as usize] }, u);
        // All former v darts now sit at u; normalize any stragglers.
        for i in 0..self.vertex.len() {
            if self.vertex[i] == v {
                self.vertex[i] = u;
            }
        }
        self.remove_darts(&dead, new_outer);
        Ok(())
    }

    /// Removes an identity-labelled loop together with the subdiagram it
    /// encloses (0-face elimination step 2). The enclosed side is the one
    /// not containing the outer face; for spheres only an empty side is
    /// supported.
    pub fn remove_identity_loop(&mut self, d: u32) -> Result<(), DiagramError> {
        if self.label[d as usize].is_some() {
            return Err(DiagramError::InvalidMap("edge not identity-labelled".into()));
        }
        let ad = self.opposite[d as usize];
        if self.vertex[d as usize] != self.vertex[ad as usize] {
            return Err(DiagramError::InvalidMap("identity edge is not a loop".into()));
        }
        // Tentatively unlink both darts and check the split.
        let mut scratch = self.clone();
        scratch.unlink(d);
        // After removing d from the rotation, ad may have moved relative
        // positions; unlink on the scratch copy.
        scratch.unlink(ad);
        let dead = BTreeSet::from([d, ad]);
        // Reachability from the outer dart (disk) over σ and α, ignoring
        // the dead darts.
        let keep_seed = match self.topology {
            Topology::Disk { outer_dart } => {
                if dead.contains(&outer_dart) {
                    self.pick_surviving_outer(&dead).ok_or(DiagramError::NotADisk)?
                } else {
                    outer_dart
                }
            }
            Topology::Sphere => {
                // Only the empty-enclosure case: σ(d) == ad or σ(ad) == d.
                if self.next[d as usize] != ad && self.next[ad as usize] != d {
                    return Err(DiagramError::InvalidMap(
                        "identity loop encloses content on a sphere".into(),
                    ));
                }
                let dead2 = dead.clone();
                let new_outer = None;
                self.remove_darts(&dead2, new_outer);
                return Ok(());
            }
        };
        let nd = scratch.next.len();
        let mut keep = vec![false; nd];
        keep[keep_seed as usize] = true;
        let mut stack = vec![keep_seed];
        while let Some(x) = stack.pop() {
            for n in [scratch.next[x as usize], scratch.opposite[x as usize]] {
                if !dead.contains(&n) && !keep[n as usize] {
                    keep[n as usize] = true;
                    stack.push(n);
                }
            }
        }
        let mut dead_all = dead;
        for x in 0..nd as u32 {
            if !keep[x as usize] {
                dead_all.insert(x);
            }
        }
        *self = scratch;
        // The seed is a surviving outer dart chosen before the surgery.
        self.remove_darts(&dead_all, Some(keep_seed));
        Ok(())
    }

    /// Blows up a vertex: splits it along two corners (darts `c1`, `c2` at
    /// the same vertex in different faces), inserting an identity edge
    /// between the halves.
    pub fn blow_up_vertex(&mut self, c1: u32, c2: u32) -> Result<(u32, u32), DiagramError> {
        let v = self.vertex[c1 as usize];
        if self.vertex[c2 as usize] != v || c1 == c2 {
            return Err(DiagramError::InvalidMap("corners must be distinct darts at one vertex".into()));
        }
        let x = self.next.len() as u32;
        let y = x + 1;
        let v2 = self.n_vertices;
        self.n_vertices += 1;
        self.vertex.push(v); // x stays at v
        self.vertex.push(v2); // y at the new vertex
        self.label.push(None);
        self.label.push(None);
        self.opposite.push(y);
        self.opposite.push(x);
        self.next.push(0);
        self.next.push(0);
        // Rotation at v was: [c1 ... pre_c2, c2 ... pre_c1] (cyclic). After:
        // v:  [c1 ... pre_c2, x], v2: [c2 ... pre_c1, y].
        let pre_c1 = self.prev_dart(c1);
        let pre_c2 = self.prev_dart(c2);
        self.next[pre_c2 as usize] = x;
        self.next[x as usize] = c1;
        self.next[pre_c1 as usize] = y;
        self.next[y as usize] = c2;
        // Move the arc c2..pre_c1 to the new vertex.
        self.set_vertex_of_cycle(y, v2);
        self.vertex[x as usize] = v;
        Ok((x, y))
    }

    /// Removes an interior edge separating two distinct faces, merging
    /// them. Rejects edges on the outer face and edges with one face on
    /// both sides.
    pub fn remove_interior_edge(&mut self, d: u32) -> Result<(), DiagramError> {
        let ad = self.opposite[d as usize];
        let faces = self.face_cycles();
        let fd = self.face_of(&faces, d);
        let fad = self.face_of(&faces, ad);
        if fd == fad {
            return Err(DiagramError::InvalidMap("edge bounded by one face on both sides".into()));
        }
        if let Topology::Disk { outer_dart } = self.topology {
            let fo = self.face_of(&faces, outer_dart);
            if fd == fo || fad == fo {
                return Err(DiagramError::InvalidMap("edge lies on the outer face".into()));
            }
        }
        let dead = BTreeSet::from([d, ad]);
        let new_outer = self.pick_surviving_outer(&dead);
        self.unlink(d);
        self.unlink(ad);
        self.remove_darts(&dead, new_outer);
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Audits and predicates
// ---------------------------------------------------------------------------

/// The spherical curvature sum `Σ(3−d(v)) + ½Σ(6−d(Π))`, exactly. Equals 6
/// on every valid spherical map.
pub fn curvature_audit(d: &Diagram) -> Result<Ratio<i64>, DiagramError> {
    if d.topology() != Topology::Sphere {
        return Err(DiagramError::NotASphere);
    }
    d.validate()?;
    let mut total = Ratio::from_integer(0);
    if d.dart_count() == 0 {
        // One vertex, one face.
        return Ok(Ratio::from_integer(3) + Ratio::new(6, 2));
    }
    let mut deg: BTreeMap<u32, i64> = BTreeMap::new();
    for v in &d.vertex {
        *deg.entry(*v).or_insert(0) += 1;
    }
    for (_, dv) in deg {
        total += Ratio::from_integer(3 - dv);
    }
    for f in d.face_cycles() {
        total += Ratio::new(6 - f.len() as i64, 2);
    }
    Ok(total)
}

/// Closes a disk by reinterpreting it as a sphere (the outer face becomes
/// an ordinary face with the boundary word as its label).
pub fn close_disk(d: &Diagram) -> Result<Diagram, DiagramError> {
    d.outer_dart()?;
    let mut s = d.clone();
    s.topology = Topology::Sphere;
    Ok(s)
}

/// One boundary fold: two adjacent mutually inverse boundary edges are
/// identified; the boundary word shortens by two letters.
pub fn fold_boundary(d: &mut Diagram) -> Result<(), DiagramError> {
    let od = d.outer_dart()?;
    if d.dart_count() == 0 {
        return Err(DiagramError::NothingToFold);
    }
    let mut cur = od;
    loop {
        let nxt = d.face_next(cur);
        let (a, b) = (d.label[cur as usize], d.label[nxt as usize]);
        let foldable = match (a, b) {
            (Some(x), Some(y)) => x == y.inverse(),
            (None, None) => true,
            _ => false,
        };
        if foldable && nxt != cur {
            return d.face_fold(cur);
        }
        cur = nxt;
        if cur == od {
            return Err(DiagramError::NothingToFold);
        }
    }
}

/// Cancels two faces sharing a vertex whose labels multiply to a freely
/// trivial word: the faces are merged (removing a shared edge, or blowing
/// up a shared vertex and removing the inserted identity edge) and the
/// merged face is zipped away by folds and a final bigon collapse. The
/// diagram's boundary word is unchanged and the face count drops by two.
pub fn cancel_inverse_faces(d: &mut Diagram, f1_dart: u32, f2_dart: u32) -> Result<(), DiagramError> {
    let faces = d.face_cycles();
    let f1 = d.face_of(&faces, f1_dart);
    let f2 = d.face_of(&faces, f2_dart);
    if f1 == f2 {
        return Err(DiagramError::InvalidMap("expected two distinct faces".into()));
    }
    if let Topology::Disk { outer_dart } = d.topology {
        let fo = d.face_of(&faces, outer_dart);
        if f1 == fo || f2 == fo {
            return Err(DiagramError::InvalidMap("cannot cancel the outer face".into()));
        }
    }
    let before_boundary = d.boundary_word().ok();
    let before_faces = faces.len();

    // Case 1: shared edge with trivial merged word.
    let mut merged_dart: Option<u32> = None;
    'search: for &p in &faces[f1] {
        let ap = d.opposite[p as usize];
        if faces[f2].contains(&ap) {
            // Merged word: f1 read after p, then f2 read after α(p).
            let mut w = Word::empty();
            let mut cur = d.face_next(p);
            while cur != p {
                if let Some(l) = d.label[cur as usize] {
                    w.push(l);
                }
                cur = d.face_next(cur);
            }
            let mut cur = d.face_next(ap);
            while cur != ap {
                if let Some(l) = d.label[cur as usize] {
                    w.push(l);
                }
                cur = d.face_next(cur);
            }
            if w.free_reduce().is_empty() {
                // Dart ids compact after the removal of p and α(p).
                let keep = d.face_next(p);
                let (r1, r2) = (p.min(ap), p.max(ap));
                let mut k = keep;
                assert!(k != r1 && k != r2, "merged face vanished with the edge");
                if k > r2 {
                    k -= 2;
                } else if k > r1 {
                    k -= 1;
                }
                d.remove_interior_edge(p)?;
                merged_dart = Some(k);
                break 'search;
            }
        }
    }

    // Case 2: shared vertex; blow up and remove the identity edge.
    if merged_dart.is_none() {
        'corner: for &c1 in &faces[f1] {
            for &c2 in &faces[f2] {
                if d.vertex[c1 as usize] != d.vertex[c2 as usize] {
                    continue;
                }
                // ℓ(f1 from c1) · ℓ(f2 from c2) must be freely trivial.
                let mut w = read_from(d, &faces[f1], c1);
                w.extend_word(&read_from(d, &faces[f2], c2));
                if !w.free_reduce().is_empty() {
                    continue;
                }
                let (x, _y) = d.blow_up_vertex(c1, c2)?;
                let keep = c1;
                d.remove_interior_edge(x)?;
                merged_dart = Some(keep);
                break 'corner;
            }
        }
    }
    let merged_dart = merged_dart.ok_or(DiagramError::NotFreelyInverse)?;

    // Zip the merged face (its word is freely trivial) down to nothing.
    let mut guard = d.dart_count() + 4;
    let mut probe = merged_dart;
    loop {
        guard -= 1;
        if guard == 0 {
            return Err(DiagramError::InvalidMap("zip did not terminate".into()));
        }
        // Recompute the face containing the probe dart.
        let mut cycle = Vec::new();
        let mut cur = probe;
        loop {
            cycle.push(cur);
            cur = d.face_next(cur);
            if cur == probe {
                break;
            }
        }
        if cycle.len() == 2 {
            d.collapse_bigon(cycle[0])?;
            break;
        }
        // Find a foldable corner.
        let mut folded = false;
        for &p in &cycle {
            let q = d.face_next(p);
            let foldable = match (d.label[p as usize], d.label[q as usize]) {
                (Some(x), Some(y)) => x == y.inverse(),
                (None, None) => true,
                _ => false,
            };
            if foldable {
                // Track a dart of this face that survives the fold.
                let survivor = cycle
                    .iter()
                    .copied()
                    .find(|&s| s != p && s != q)
                    .expect("face longer than 2 has a survivor");
                // Dart ids shift after removal: capture by re-deriving via
                // position counting. remove_darts remaps by order, so ids
                // above removed ones shift down.
                let (rp, rq) = (p.min(q), p.max(q));
                d.face_fold(p)?;
                let mut s = survivor;
                if s > rq {
                    s -= 2;
                } else if s > rp {
                    s -= 1;
                }
                probe = s;
                folded = true;
                break;
            }
        }
        if !folded {
            return Err(DiagramError::InvalidMap(
                "freely trivial face without a reducible corner".into(),
            ));
        }
    }

    // Identity-edge cleanup (contract non-loops, remove empty loops).
    loop {
        let mut acted = false;
        for dart in 0..d.dart_count() as u32 {
            if d.label[dart as usize].is_none() {
                let ad = d.opposite[dart as usize];
                if d.vertex[dart as usize] == d.vertex[ad as usize] {
                    d.remove_identity_loop(dart)?;
                } else {
                    d.contract_identity_edge(dart)?;
                }
                acted = true;
                break;
            }
        }
        if !acted {
            break;
        }
    }

    d.validate()?;
    let after_faces = d.face_cycles().len();
    if after_faces + 2 != before_faces {
        return Err(DiagramError::InvalidMap(format!(
            "face count went {before_faces} -> {after_faces}, expected -2"
        )));
    }
    if let Some(before) = before_boundary {
        let after = d.boundary_word()?;
        if before != after {
            return Err(DiagramError::InvalidMap("boundary word changed".into()));
        }
    }
    Ok(())
}

fn read_from(d: &Diagram, face: &[u32], from: u32) -> Word {
    let pos = face.iter().position(|&x| x == from).expect("dart on face");
    let mut w = Word::empty();
    for i in 0..face.len() {
        if let Some(l) = d.label[face[(pos + i) % face.len()] as usize] {
            w.push(l);
        }
    }
    w
}

// ---------------------------------------------------------------------------
// Arc decomposition and degrees
// ---------------------------------------------------------------------------

/// Arc decomposition: each edge is assigned an arc id; arcs are maximal
/// chains through degree-2 vertices (a full circle of degree-2 vertices is
/// one arc).
pub struct Arcs {
    pub arc_of_edge: Vec<u32>,
    pub arc_count: u32,
    /// Arc lies on the disk boundary.
    pub boundary: Vec<bool>,
}

pub fn arcs(d: &Diagram) -> Result<Arcs, DiagramError> {
    let od = d.outer_dart()?;
    let ne = d.dart_count() / 2;
    // Edge id = dart index of the smaller dart of the pair.
    let edge_id = |dart: u32| -> u32 { dart.min(d.opposite[dart as usize]) };
    let mut deg: BTreeMap<u32, usize> = BTreeMap::new();
    for v in &d.vertex {
        *deg.entry(*v).or_insert(0) += 1;
    }
    let mut arc_of: BTreeMap<u32, u32> = BTreeMap::new();
    let mut next_arc = 0u32;
    for dart in 0..d.dart_count() as u32 {
        let e = edge_id(dart);
        if arc_of.contains_key(&e) {
            continue;
        }
        // Grow the chain in both directions through degree-2 vertices.
        let mut chain = vec![e];
        for dir_start in [dart, d.opposite[dart as usize]] {
            let mut cur = dir_start;
            loop {
                // Move across the far endpoint of `cur` if it has degree 2.
                let far = d.opposite[cur as usize];
                let v = d.vertex[far as usize];
                if deg[&v] != 2 {
                    break;
                }
                let cont = d.next[far as usize];
                if cont == far {
                    break;
                }
                let ce = edge_id(cont);
                if chain.contains(&ce) {
                    break; // closed circle
                }
                chain.push(ce);
                cur = cont;
            }
        }
        for e in chain {
            arc_of.insert(e, next_arc);
        }
        next_arc += 1;
    }
    // Boundary arcs: edges with a dart on the outer face.
    let mut boundary = vec![false; next_arc as usize];
    let mut cur = od;
    loop {
        boundary[arc_of[&edge_id(cur)] as usize] = true;
        cur = d.face_next(cur);
        if cur == od {
            break;
        }
    }
    let mut arc_of_edge = vec![u32::MAX; ne * 2];
    for (e, a) in arc_of {
        arc_of_edge[e as usize] = a;
    }
    Ok(Arcs { arc_of_edge, arc_count: next_arc, boundary })
}

/// Exterior and interior degrees of a disk face: boundary arcs counted
/// once, interior arc traversals counted with multiplicity.
pub fn degrees(d: &Diagram, face_dart: u32) -> Result<(usize, usize), DiagramError> {
    let a = arcs(d)?;
    let edge_id = |dart: u32| -> u32 { dart.min(d.opposite[dart as usize]) };
    let mut cycle = Vec::new();
    let mut cur = face_dart;
    loop {
        cycle.push(cur);
        cur = d.face_next(cur);
        if cur == face_dart {
            break;
        }
    }
    // Group consecutive darts by arc id (cyclically).
    let ids: Vec<u32> = cycle.iter().map(|&x| a.arc_of_edge[edge_id(x) as usize]).collect();
    let n = ids.len();
    let mut traversals: Vec<u32> = Vec::new();
    let mut start = 0;
    // Find a group boundary to start from.
    while start < n && ids[(start + n - 1) % n] == ids[start] && n > 1 {
        start += 1;
        if start == n {
            // Entire cycle is one arc.
            traversals.push(ids[0]);
            break;
        }
    }
    if traversals.is_empty() {
        let mut i = start % n;
        let mut count = 0;
        while count < n {
            let id = ids[i];
            traversals.push(id);
            while count < n && ids[i] == id {
                i = (i + 1) % n;
                count += 1;
                if ids[i] != id {
                    break;
                }
            }
        }
    }
    let mut exterior: BTreeSet<u32> = BTreeSet::new();
    let mut interior = 0usize;
    for t in traversals {
        if a.boundary[t as usize] {
            exterior.insert(t);
        } else {
            interior += 1;
        }
    }
    Ok((exterior.len(), interior))
}

/// Every interior face has interior degree at least 7; returns the first
/// violator otherwise.
pub fn is_37_diagram(d: &Diagram) -> Result<Result<(), u32>, DiagramError> {
    let od = d.outer_dart()?;
    let faces = d.face_cycles();
    let fo = d.face_of(&faces, od);
    let a = arcs(d)?;
    let edge_id = |dart: u32| -> u32 { dart.min(d.opposite[dart as usize]) };
    for (fi, f) in faces.iter().enumerate() {
        if fi == fo {
            continue;
        }
        let is_interior =
            f.iter().all(|&dart| !a.boundary[a.arc_of_edge[edge_id(dart) as usize] as usize]);
        if is_interior {
            let (_, i) = degrees(d, f[0])?;
            if i < 7 {
                return Ok(Err(f[0]));
            }
        }
    }
    Ok(Ok(()))
}

/// Shape I₁: the faces form a linear chain with two extremal faces of
/// exterior degree 1 and middle faces of exterior degree 2 with exactly
/// two interior arc traversals. A single-face disk passes.
pub fn shape_i1(d: &Diagram) -> Result<bool, DiagramError> {
    let od = d.outer_dart()?;
    let faces = d.face_cycles();
    let fo = d.face_of(&faces, od);
    let inner: Vec<usize> = (0..faces.len()).filter(|&i| i != fo).collect();
    if inner.len() <= 1 {
        return Ok(true);
    }
    let a = arcs(d)?;
    let edge_id = |dart: u32| -> u32 { dart.min(d.opposite[dart as usize]) };
    let mut ends = 0;
    for &fi in &inner {
        let (e, i) = degrees(d, faces[fi][0])?;
        match (e, i) {
            (1, 1) => ends += 1,
            (2, 2) => {}
            _ => return Ok(false),
        }
    }
    if ends != 2 {
        return Ok(false);
    }
    // Adjacency over interior arcs must form a path.
    let mut adj: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for arc in 0..a.arc_count {
        if a.boundary[arc as usize] {
            continue;
        }
        // The two faces bounding this arc.
        let mut bound: BTreeSet<usize> = BTreeSet::new();
        for dart in 0..d.dart_count() as u32 {
            if a.arc_of_edge[edge_id(dart) as usize] == arc {
                bound.insert(d.face_of(&faces, dart));
            }
        }
        let bs: Vec<usize> = bound.into_iter().collect();
        if bs.len() == 2 {
            adj.entry(bs[0]).or_default().insert(bs[1]);
            adj.entry(bs[1]).or_default().insert(bs[0]);
        } else {
            return Ok(false); // arc bounded by one face on both sides
        }
    }
    let mut deg1 = 0;
    for &fi in &inner {
        match adj.get(&fi).map(|s| s.len()).unwrap_or(0) {
            1 => deg1 += 1,
            2 => {}
            _ => return Ok(false),
        }
    }
    Ok(deg1 == 2)
}

// ---------------------------------------------------------------------------
// Lifting diagrams to host graphs
// ---------------------------------------------------------------------------

pub enum Host<'a> {
    Classical(&'a LabelledGraph),
    Completed(&'a Completion),
}

/// Checks that every face label lifts to a closed path in the host, that
/// no interior arc essentially originates (the two face-side lifts are
/// never automorphism-translates), and, over completions, that interior
/// arcs are locally geodesic.
pub fn validate_over_graph(d: &Diagram, host: &Host) -> Result<(), DiagramError> {
    let g: &LabelledGraph = match host {
        Host::Classical(g) => g,
        Host::Completed(c) => &c.graph,
    };
    let idx = build_piece_index(g)
        .map_err(|e| DiagramError::InvalidMap(format!("host graph not indexable: {e}")))?;
    let od = d.outer_dart()?;
    let faces = d.face_cycles();
    let fo = d.face_of(&faces, od);
    // Every face word must lift to a closed path.
    for (fi, f) in faces.iter().enumerate() {
        if fi == fo {
            continue;
        }
        let word = d.cycle_word(f);
        let lifts = find_occurrences(&word, g)
            .into_iter()
            .any(|p| g.path_end(&p) == p.start);
        if !lifts {
            return Err(DiagramError::NoLift(d.alphabet.display_word(&word)));
        }
    }
    // Interior arcs: the lifts from the two sides must be essentially
    // distinct. In a reduced host, a closed face lift is determined by its
    // start vertex, and the arc's lift is the walk it induces; two arc
    // lifts essentially coincide iff their aligned start vertices share an
    // automorphism orbit.
    let a = arcs(d)?;
    let edge_id = |dart: u32| -> u32 { dart.min(d.opposite[dart as usize]) };
    let aut = idx.automorphisms();
    let orbits = aut.vertex_orbits(g.vertex_count());
    let trace = |from: u32, w: &Word| -> Option<u32> {
        let mut at = from;
        for l in w.letters() {
            at = g.step_target(g.step_unique(at, l)?);
        }
        Some(at)
    };
    for arc in 0..a.arc_count {
        if a.boundary[arc as usize] {
            continue;
        }
        let dart = (0..d.dart_count() as u32)
            .find(|&x| a.arc_of_edge[edge_id(x) as usize] == arc)
            .unwrap();
        // The two sides of the arc as runs in their face cycles.
        let run_a = arc_run(d, &a, &faces, dart);
        let run_b = arc_run(d, &a, &faces, d.opposite[dart as usize]);
        let u = Word::from_letters(run_a.darts.iter().filter_map(|&x| d.label[x as usize]));
        // Side A lifts: start vertices of closed face lifts anchored at the
        // run start; the arc lift starts there.
        let starts_a = closed_lift_starts(d, g, &faces[run_a.face], run_a.offset);
        // Side B traverses the arc backwards: anchor its run, then advance
        // by the arc word to align with side A's direction.
        let starts_b_raw = closed_lift_starts(d, g, &faces[run_b.face], run_b.offset);
        let mut starts_b = BTreeSet::new();
        for y in starts_b_raw {
            // The B-side run reads u⁻¹; its end vertex is where the
            // A-aligned walk starts.
            if let Some(end) = trace(y, &u.inverse()) {
                starts_b.insert(end);
            }
        }
        for &x in &starts_a {
            for &y in &starts_b {
                if orbits[x as usize] == orbits[y as usize] {
                    return Err(DiagramError::InvalidMap(format!(
                        "interior arc {arc} essentially originates from the host"
                    )));
                }
            }
        }
        if let Host::Completed(c) = host {
            for occ in find_occurrences(&u, &c.graph) {
                if !locally_geodesic(c, &occ) {
                    return Err(DiagramError::InvalidMap(format!(
                        "interior arc {arc} lifts to a non-geodesic path"
                    )));
                }
            }
        }
    }
    Ok(())
}

struct ArcRun {
    face: usize,
    offset: usize,
    darts: Vec<u32>,
}

/// The maximal run of face darts along the arc containing `dart`.
fn arc_run(d: &Diagram, a: &Arcs, faces: &[Vec<u32>], dart: u32) -> ArcRun {
    let edge_id = |x: u32| -> u32 { x.min(d.opposite[x as usize]) };
    let arc = a.arc_of_edge[edge_id(dart) as usize];
    let fi = faces.iter().position(|f| f.contains(&dart)).unwrap();
    let f = &faces[fi];
    let n = f.len();
    let pos = f.iter().position(|&x| x == dart).unwrap();
    let on_arc = |x: u32| a.arc_of_edge[edge_id(x) as usize] == arc;
    // Walk back to the run start.
    let mut start = pos;
    while on_arc(f[(start + n - 1) % n]) && (pos + n - start) % n < n - 1 {
        start = (start + n - 1) % n;
    }
    let mut darts = Vec::new();
    let mut i = start;
    loop {
        darts.push(f[i]);
        i = (i + 1) % n;
        if !on_arc(f[i]) || darts.len() == n {
            break;
        }
    }
    ArcRun { face: fi, offset: start, darts }
}

/// Start vertices of closed lifts of a face word anchored at `offset`.
fn closed_lift_starts(
    d: &Diagram,
    g: &LabelledGraph,
    face: &[u32],
    offset: usize,
) -> BTreeSet<u32> {
    let word = rotate_cycle_word(d, face, offset);
    find_occurrences(&word, g)
        .into_iter()
        .filter(|p| g.path_end(p) == p.start)
        .map(|p| p.start)
        .collect()
}

fn rotate_cycle_word(d: &Diagram, cycle: &[u32], off: usize) -> Word {
    Word::from_letters(
        (0..cycle.len()).filter_map(|i| d.label[cycle[(off + i) % cycle.len()] as usize]),
    )
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

/// Diagram text format:
///
/// ```text
/// alphabet: s t
/// topology sphere | topology disk <outer-dart>
/// vertex <id>: <darts ccw>
/// edge <dart> <opposite> <label|1>
/// ```
pub fn parse_diagram(text: &str) -> Result<Diagram, DiagramError> {
    let mut alphabet: Option<Alphabet> = None;
    let mut topology: Option<Topology> = None;
    let mut rotations: Vec<(u32, Vec<u32>)> = Vec::new();
    let mut edges: Vec<(u32, u32, Option<Letter>)> = Vec::new();
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
        let perr = |msg: String| DiagramError::Parse(ParseError { line: line_no, col: 1, msg });
        if let Some(rest) = line.strip_prefix("alphabet:") {
            alphabet = Some(Alphabet::new(rest.split_whitespace().collect::<Vec<_>>()));
            continue;
        }
        if let Some(rest) = line.strip_prefix("topology") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            topology = Some(match toks.first() {
                Some(&"sphere") => Topology::Sphere,
                Some(&"disk") => Topology::Disk {
                    outer_dart: toks
                        .get(1)
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| perr("disk needs an outer dart".into()))?,
                },
                _ => return Err(perr("expected sphere or disk".into())),
            });
            continue;
        }
        if let Some(rest) = line.strip_prefix("vertex") {
            let (id, darts) =
                rest.split_once(':').ok_or_else(|| perr("expected `vertex <id>: ...`".into()))?;
            let id: u32 = id.trim().parse().map_err(|_| perr("bad vertex id".into()))?;
            let darts: Result<Vec<u32>, _> =
                darts.split_whitespace().map(|s| s.parse()).collect();
            rotations.push((id, darts.map_err(|_| perr("bad dart id".into()))?));
            continue;
        }
        if let Some(rest) = line.strip_prefix("edge") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 3 {
                return Err(perr("expected `edge <dart> <opposite> <label>`".into()));
            }
            let a: u32 = toks[0].parse().map_err(|_| perr("bad dart id".into()))?;
            let b: u32 = toks[1].parse().map_err(|_| perr("bad dart id".into()))?;
            let l = if toks[2] == "1" {
                None
            } else {
                let alpha = alphabet.as_ref().ok_or_else(|| perr("edge before alphabet".into()))?;
                let w = alpha
                    .parse_word(toks[2])
                    .map_err(DiagramError::Parse)?;
                let mut ls = w.letters();
                let l = ls.next().ok_or_else(|| perr("empty label".into()))?;
                if ls.next().is_some() {
                    return Err(perr("label must be a single letter".into()));
                }
                Some(l)
            };
            edges.push((a, b, l));
            continue;
        }
        return Err(perr(format!("unknown directive `{line}`")));
    }
    let alphabet = alphabet.ok_or(DiagramError::Parse(ParseError {
        line: 1,
        col: 1,
        msg: "missing alphabet".into(),
    }))?;
    let nd = rotations.iter().map(|(_, ds)| ds.len()).sum::<usize>();
    let mut vertex = vec![u32::MAX; nd];
    let mut next = vec![u32::MAX; nd];
    for (v, darts) in &rotations {
        for (i, &d) in darts.iter().enumerate() {
            if (d as usize) >= nd {
                return Err(DiagramError::InvalidMap("dart id out of range".into()));
            }
            vertex[d as usize] = *v;
            next[d as usize] = darts[(i + 1) % darts.len()];
        }
    }
    let mut opposite = vec![u32::MAX; nd];
    let mut label = vec![None; nd];
    for (a, b, l) in edges {
        opposite[a as usize] = b;
        opposite[b as usize] = a;
        label[a as usize] = l;
        label[b as usize] = l.map(Letter::inverse);
    }
    let n_vertices = vertex.iter().copied().max().map(|m| m + 1).unwrap_or(1);
    let d = Diagram {
        alphabet,
        vertex,
        next,
        opposite,
        label,
        n_vertices,
        topology: topology.unwrap_or(Topology::Sphere),
    };
    d.validate()?;
    Ok(d)
}

pub fn write_diagram(d: &Diagram) -> String {
    let mut out = String::new();
    out.push_str("alphabet:");
    for n in d.alphabet.names() {
        out.push(' ');
        out.push_str(n);
    }
    out.push('\n');
    match d.topology {
        Topology::Sphere => out.push_str("topology sphere\n"),
        Topology::Disk { outer_dart } => out.push_str(&format!("topology disk {outer_dart}\n")),
    }
    // Rotations grouped by vertex, in dart order.
    let mut by_vertex: BTreeMap<u32, u32> = BTreeMap::new();
    for dart in 0..d.dart_count() as u32 {
        by_vertex.entry(d.vertex[dart as usize]).or_insert(dart);
    }
    for (v, start) in by_vertex {
        out.push_str(&format!("vertex {v}:"));
        let mut cur = start;
        loop {
            out.push_str(&format!(" {cur}"));
            cur = d.next[cur as usize];
            if cur == start {
                break;
            }
        }
        out.push('\n');
    }
    for dart in 0..d.dart_count() as u32 {
        let o = d.opposite[dart as usize];
        if dart < o {
            let l = match d.label[dart as usize] {
                None => "1".to_string(),
                Some(l) => {
                    let mut w = Word::empty();
                    w.push(l);
                    d.alphabet.display_word(&w)
                }
            };
            out.push_str(&format!("edge {dart} {o} {l}\n"));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Stock diagrams
// ---------------------------------------------------------------------------

/// Ready-made maps: platonic spheres, simple disks, chains and tripods.
pub mod fixtures {
    use super::*;

    fn s() -> Letter {
        Letter::pos(0)
    }

    /// Sphere from undirected face lists (vertex cycles); every edge is
    /// labelled by the single letter `s`, oriented low→high vertex id.
    pub fn sphere_from_faces(face_vertices: &[Vec<u32>]) -> Diagram {
        let alphabet = Alphabet::new(["s"]);
        let faces: Vec<Vec<FaceStep>> = face_vertices
            .iter()
            .map(|f| {
                (0..f.len())
                    .map(|i| {
                        let (a, b) = (f[i], f[(i + 1) % f.len()]);
                        let letter = if a < b { s() } else { s().inverse() };
                        FaceStep { from: a, to: b, label: Some(letter) }
                    })
                    .collect()
            })
            .collect();
        Diagram::from_face_cycles(alphabet, &faces, None).expect("valid sphere")
    }

    pub fn tetrahedron() -> Diagram {
        sphere_from_faces(&[
            vec![0, 1, 2],
            vec![0, 3, 1],
            vec![1, 3, 2],
            vec![2, 3, 0],
        ])
    }

    pub fn cube() -> Diagram {
        sphere_from_faces(&[
            vec![0, 1, 2, 3],
            vec![0, 4, 5, 1],
            vec![1, 5, 6, 2],
            vec![2, 6, 7, 3],
            vec![3, 7, 4, 0],
            vec![4, 7, 6, 5],
        ])
    }

    pub fn dodecahedron() -> Diagram {
        // Standard vertex labelling 0..19.
        sphere_from_faces(&[
            vec![0, 1, 2, 3, 4],
            vec![0, 5, 10, 6, 1],
            vec![1, 6, 11, 7, 2],
            vec![2, 7, 12, 8, 3],
            vec![3, 8, 13, 9, 4],
            vec![4, 9, 14, 5, 0],
            vec![5, 14, 19, 15, 10],
            vec![6, 10, 15, 16, 11],
            vec![7, 11, 16, 17, 12],
            vec![8, 12, 17, 18, 13],
            vec![9, 13, 18, 19, 14],
            vec![15, 19, 18, 17, 16],
        ])
    }

    /// Extracts the face lists (as vertex cycles) of a sphere.
    pub fn face_vertex_cycles(d: &Diagram) -> Vec<Vec<u32>> {
        d.face_cycles()
            .iter()
            .map(|f| f.iter().map(|&dart| d.dart_vertex(dart)).collect())
            .collect()
    }

    /// Subdivides the chosen face of a sphere by a new central vertex
    /// joined to every corner; rebuilds the map.
    pub fn subdivide_face(d: &Diagram, face_idx: usize) -> Diagram {
        let faces = face_vertex_cycles(d);
        let center = d.vertex_count() as u32;
        let mut out: Vec<Vec<u32>> = Vec::new();
        for (i, f) in faces.iter().enumerate() {
            if i == face_idx {
                for j in 0..f.len() {
                    out.push(vec![f[j], f[(j + 1) % f.len()], center]);
                }
            } else {
                out.push(f.clone());
            }
        }
        sphere_from_faces(&out)
    }

    /// Disk with one face whose boundary reads `w`.
    pub fn single_face_disk(alphabet: &Alphabet, w: &Word) -> Diagram {
        let letters: Vec<Letter> = w.letters().collect();
        let n = letters.len();
        assert!(n > 0);
        let inner: Vec<FaceStep> = (0..n)
            .map(|i| FaceStep {
                from: i as u32,
                to: ((i + 1) % n) as u32,
                label: Some(letters[i]),
            })
            .collect();
        let outer: Vec<FaceStep> = (0..n)
            .rev()
            .map(|i| FaceStep {
                from: ((i + 1) % n) as u32,
                to: i as u32,
                label: Some(letters[i].inverse()),
            })
            .collect();
        Diagram::from_face_cycles(alphabet.clone(), &[inner, outer], Some(1))
            .expect("valid single-face disk")
    }

    /// A linear chain of `k` quadrilateral faces (shape I₁ when `k ≥ 2`).
    pub fn chain_disk(k: usize) -> Diagram {
        assert!(k >= 1);
        let alphabet = Alphabet::new(["s"]);
        // Top vertices 0..=k, bottom vertices k+1..=2k+1.
        let bot = |i: usize| (k + 1 + i) as u32;
        let mut faces: Vec<Vec<FaceStep>> = Vec::new();
        for i in 0..k {
            faces.push(vec![
                FaceStep::new(i as u32, (i + 1) as u32, s()),
                FaceStep::new((i + 1) as u32, bot(i + 1), s()),
                FaceStep::new(bot(i + 1), bot(i), s()),
                FaceStep { from: bot(i), to: i as u32, label: Some(s().inverse()) },
            ]);
        }
        // Outer face: top run right-to-left, down the left side, bottom
        // run, up the right side.
        let mut outer = Vec::new();
        for i in (0..k).rev() {
            outer.push(FaceStep {
                from: (i + 1) as u32,
                to: i as u32,
                label: Some(s().inverse()),
            });
        }
        outer.push(FaceStep { from: 0, to: bot(0), label: Some(s()) });
        for i in 0..k {
            outer.push(FaceStep { from: bot(i), to: bot(i + 1), label: Some(s().inverse()) });
        }
        outer.push(FaceStep { from: bot(k), to: k as u32, label: Some(s().inverse()) });
        let oi = faces.len();
        faces.push(outer);
        Diagram::from_face_cycles(alphabet, &faces, Some(oi)).expect("valid chain disk")
    }

    /// Three quadrilateral faces around a central interior vertex of
    /// degree 3 (fails shape I₁).
    pub fn tripod_disk() -> Diagram {
        let alphabet = Alphabet::new(["s"]);
        // Center 0; spokes to 1, 2, 3; rim vertices 4, 5, 6 between
        // them. Faces close via the next spoke traversed backwards so that
        // shared spokes pair.
        let f = |a: u32, rim: u32, b: u32| {
            vec![
                FaceStep::new(0, a, s()),
                FaceStep::new(a, rim, s()),
                FaceStep::new(rim, b, s()),
                FaceStep { from: b, to: 0, label: Some(s().inverse()) },
            ]
        };
        let mut faces = vec![f(1, 4, 2), f(2, 5, 3), f(3, 6, 1)];
        // Outer face: rim 1 -> 4 -> 2 -> 5 -> 3 -> 6 -> 1 reversed edges.
        let outer = vec![
            FaceStep { from: 1, to: 6, label: Some(s().inverse()) },
            FaceStep { from: 6, to: 3, label: Some(s().inverse()) },
            FaceStep { from: 3, to: 5, label: Some(s().inverse()) },
            FaceStep { from: 5, to: 2, label: Some(s().inverse()) },
            FaceStep { from: 2, to: 4, label: Some(s().inverse()) },
            FaceStep { from: 4, to: 1, label: Some(s().inverse()) },
        ];
        let oi = faces.len();
        faces.push(outer);
        Diagram::from_face_cycles(alphabet, &faces, Some(oi)).expect("valid tripod disk")
    }
}
