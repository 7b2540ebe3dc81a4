//! Acceptance suite: each test prints one pass/fail line for its
//! criterion. All tolerances are exact (integer or rational); there is no
//! floating point anywhere.

use std::collections::BTreeSet;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use smallcancel::completion::{
    build_completion, check_gr_star, cyclic_group, is_embedded_sheets, Factor, FactorKind,
};
use smallcancel::conditions::{
    check_c_classical, check_cprime_classical, check_gr, parse_lambda,
    revalidate_classical_witness, FailWitness, Scope,
};
use smallcancel::diagram::{
    arcs, cancel_inverse_faces, close_disk, curvature_audit, degrees, fixtures, fold_boundary,
    is_37_diagram, shape_i1, Diagram, DiagramError, FaceStep, Topology,
};
use smallcancel::distortion::{classify_case, gen_distorted_family, short_witness, CaseTag};
use smallcancel::graph::{
    cycle_graph, find_occurrences, isomorphism, parse_graph, EdgeRec, LabelledGraph, Morphism,
    PathSpec,
};
use smallcancel::pieces::{build_piece_index, ClassicalPieces};
use smallcancel::witness::{
    select_witnesses_classical, verify_classical_package, WitnessError,
};
use smallcancel::words::{
    concise_refinement, cyclic_reduce, symmetrized_closure, tietze_reduce, Alphabet, CyclicWord,
    Letter, Presentation, Word,
};

fn pass(criterion: usize, what: &str) {
    println!("PASS criterion {criterion}: {what}");
}

// -- 1 -----------------------------------------------------------------------

#[test]
fn criterion_01_curvature_identity() {
    let start = Instant::now();
    let six = Ratio::from_integer(6);
    for (name, d) in [
        ("tetrahedron", fixtures::tetrahedron()),
        ("cube", fixtures::cube()),
        ("dodecahedron", fixtures::dodecahedron()),
    ] {
        assert_eq!(curvature_audit(&d).unwrap(), six, "{name}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut d = fixtures::tetrahedron();
    for _ in 0..100 {
        let nf = d.face_cycles().len();
        d = fixtures::subdivide_face(&d, rng.gen_range(0..nf));
        assert_eq!(curvature_audit(&d).unwrap(), six);
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "curvature audits took {elapsed:?}");
    pass(1, "curvature is exactly 6 on platonic solids and 100 random sphere subdivisions");
}

// -- 2 -----------------------------------------------------------------------

fn random_reduced_graph(rng: &mut ChaCha8Rng) -> LabelledGraph {
    let alphabet = Alphabet::new(["a", "b"]);
    let n = rng.gen_range(2..=8u32);
    let mut edges: Vec<EdgeRec> = Vec::new();
    let mut out_used: BTreeSet<(u32, u32)> = BTreeSet::new();
    let mut in_used: BTreeSet<(u32, u32)> = BTreeSet::new();
    for _ in 0..60 {
        if edges.len() == 16 {
            break;
        }
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        let l = rng.gen_range(0..2u32);
        if out_used.contains(&(u, l)) || in_used.contains(&(v, l)) {
            continue;
        }
        // A loop uses both the out- and in-slot of the same vertex.
        out_used.insert((u, l));
        in_used.insert((v, l));
        edges.push(EdgeRec { source: u, target: v, label: l });
    }
    if edges.is_empty() {
        edges.push(EdgeRec { source: 0, target: 1 % n, label: 0 });
    }
    LabelledGraph::with_numbered_vertices(alphabet, n as usize, edges)
}

fn brute_force_automorphisms(g: &LabelledGraph) -> Vec<Morphism> {
    let n = g.vertex_count();
    let mut out = Vec::new();
    let mut perm: Vec<u32> = (0..n as u32).collect();
    fn edge_map_for(g: &LabelledGraph, perm: &[u32]) -> Option<Vec<u32>> {
        let mut remaining: Vec<(usize, EdgeRec)> = g.edges().iter().copied().enumerate().collect();
        let mut emap = vec![u32::MAX; g.edge_count()];
        for (i, e) in g.edges().iter().enumerate() {
            let img = EdgeRec {
                source: perm[e.source as usize],
                target: perm[e.target as usize],
                label: e.label,
            };
            match remaining.iter().position(|(_, r)| *r == img) {
                Some(k) => {
                    emap[i] = remaining[k].0 as u32;
                    remaining.remove(k);
                }
                None => return None,
            }
        }
        Some(emap)
    }
    fn heaps(
        perm: &mut Vec<u32>,
        k: usize,
        g: &LabelledGraph,
        out: &mut Vec<Morphism>,
    ) {
        if k == 1 {
            if let Some(emap) = edge_map_for(g, perm) {
                out.push(Morphism { vertex_map: perm.clone(), edge_map: emap });
            }
            return;
        }
        for i in 0..k {
            heaps(perm, k - 1, g, out);
            if k % 2 == 0 {
                perm.swap(i, k - 1);
            } else {
                perm.swap(0, k - 1);
            }
        }
    }
    heaps(&mut perm, n, g, &mut out);
    out
}

#[test]
fn criterion_02_piece_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let letters = [Letter::pos(0), Letter::neg(0), Letter::pos(1), Letter::neg(1)];
    let mut checked = 0u64;
    for _ in 0..50 {
        let g = random_reduced_graph(&mut rng);
        assert!(g.edge_count() <= 20);
        let idx = build_piece_index(&g).unwrap();
        let auts = brute_force_automorphisms(&g);
        let orbit_of = |v: u32| -> u32 {
            auts.iter().map(|m| m.vertex_map[v as usize]).min().unwrap()
        };
        // All freely reduced words of length 1..=8.
        let mut stack: Vec<Vec<Letter>> = letters.iter().map(|&l| vec![l]).collect();
        while let Some(ls) = stack.pop() {
            let w = Word::from_letters(ls.iter().copied());
            let occs = find_occurrences(&w, &g);
            if let Some(first) = occs.first() {
                checked += 1;
                // Brute force: at least two distinct maps; essential: at
                // least two automorphism orbits of maps.
                let brute_piece = occs.len() >= 2;
                let orbits: BTreeSet<u32> = occs.iter().map(|p| orbit_of(p.start)).collect();
                let brute_essential = orbits.len() >= 2;
                assert_eq!(idx.is_piece(&g, first, false), brute_piece, "plain piece mismatch");
                assert_eq!(
                    idx.is_piece(&g, first, true),
                    brute_essential,
                    "essential piece mismatch"
                );
            }
            if ls.len() < 8 {
                for &l in &letters {
                    if *ls.last().unwrap() != l.inverse() {
                        let mut next = ls.clone();
                        next.push(l);
                        stack.push(next);
                    }
                }
            }
        }
    }
    assert!(checked > 1000, "oracle comparison exercised only {checked} paths");
    pass(2, "fiber-product piece verdicts match brute-force double-occurrence search");
}

// -- 3 -----------------------------------------------------------------------

#[test]
fn criterion_03_distorted_family() {
    for p in 7..=12u32 {
        for n in 1..=5u32 {
            let fam = gen_distorted_family(p, n);
            let report = check_c_classical(&fam, p as usize).unwrap();
            assert!(report.passed(), "C({p}) on the family at N={n}");
            // Every piece contains at most one letter a: the maximal piece
            // from each position carries at most one a.
            let oracle = ClassicalPieces::new(&fam).unwrap();
            for class in oracle.classes() {
                let rep = class.rep.word();
                let len = rep.len();
                for pos in 0..len {
                    let m = oracle.max_piece_factor(rep, pos, len, true);
                    if m > 0 {
                        let piece = rep.cyclic_factor(pos, m);
                        let a_count: u64 = piece
                            .syllables()
                            .iter()
                            .filter(|s| s.letter.sym == 0)
                            .map(|s| s.count)
                            .sum();
                        assert!(a_count <= 1, "piece with {a_count} letters a at p={p} n={n}");
                    }
                }
            }
        }
    }
    // C'(1/6) fails at truncation N = 8 for p = 7 with a b-block witness.
    let fam = gen_distorted_family(7, 8);
    let report = check_cprime_classical(&fam, parse_lambda("1/6").unwrap()).unwrap();
    assert!(!report.passed());
    match &report.witness {
        Some(FailWitness::LongPiece { piece_label, .. }) => {
            assert!(
                piece_label.syllables().iter().all(|s| s.letter.sym == 1),
                "witness must be a b-block"
            );
        }
        w => panic!("expected a long-piece witness, got {w:?}"),
    }
    assert!(revalidate_classical_witness(&fam, &report));
    pass(3, "C(p) passes with single-a pieces for p in 7..=12, N <= 5; C'(1/6) fails at N=8 with a b-block");
}

// -- 4 -----------------------------------------------------------------------

#[test]
fn criterion_04_commutator_presentation() {
    let a = Alphabet::new(["a", "b"]);
    let p = Presentation::new(a.clone(), vec![a.parse_word("a b A B").unwrap()]);
    assert!(check_c_classical(&p, 4).unwrap().passed());
    let r6 = check_c_classical(&p, 6).unwrap();
    assert!(!r6.passed());
    match &r6.witness {
        Some(FailWitness::FewPieces { count, piece_labels, .. }) => {
            assert_eq!(*count, 4);
            assert!(piece_labels.iter().all(|w| w.len() == 1));
        }
        w => panic!("unexpected witness {w:?}"),
    }
    assert!(revalidate_classical_witness(&p, &r6), "witness must re-validate");
    pass(4, "commutator: C(4) passes, C(6) fails with a re-validating 4-piece witness");
}

// -- 5 -----------------------------------------------------------------------

fn z_factor(id: &str, gen: &str, radius: u32) -> Factor {
    Factor { id: id.into(), kind: FactorKind::CyclicZ { radius }, gens: vec![(gen.into(), 1)] }
}

#[test]
fn criterion_05_completion_fixtures() {
    // Figure "choices": the two graphs have isomorphic completions.
    let left = parse_graph("alphabet: s s2 t\nB A t\nBC B s\nB C s\n").unwrap();
    let right = parse_graph("alphabet: s s2 t\nB A t\nBC C s2\nB C s\n").unwrap();
    let factors = [
        Factor {
            id: "G1".into(),
            kind: FactorKind::Finite { order: 3, mul: cyclic_group(3) },
            gens: vec![("s".into(), 1), ("s2".into(), 2)],
        },
        Factor {
            id: "G2".into(),
            kind: FactorKind::Finite { order: 2, mul: cyclic_group(2) },
            gens: vec![("t".into(), 1)],
        },
    ];
    let cl = build_completion(&left, &factors).unwrap();
    let cr = build_completion(&right, &factors).unwrap();
    assert!(isomorphism(&cl.graph, &cr.graph).unwrap().is_some());

    // Figure "example_free_product": the completion reproduces the depicted
    // structure, and its bounded-length relator set is consistent with
    // {s^3, t^2, (st)^2}.
    let square =
        parse_graph("alphabet: e1 s s2 e2 t\nB A t\nBC B s\nC BC s\nA D s2\nD C t\n").unwrap();
    let sq_factors = [
        Factor {
            id: "G1".into(),
            kind: FactorKind::Finite { order: 3, mul: cyclic_group(3) },
            gens: vec![("e1".into(), 0), ("s".into(), 1), ("s2".into(), 2)],
        },
        Factor {
            id: "G2".into(),
            kind: FactorKind::Finite { order: 2, mul: cyclic_group(2) },
            gens: vec![("e2".into(), 0), ("t".into(), 1)],
        },
    ];
    let c = build_completion(&square, &sq_factors).unwrap();
    assert!(is_embedded_sheets(&c).embedded);
    assert_eq!(c.graph.vertex_count(), 6);
    assert_eq!(c.graph.edge_count(), 26);
    // Consistency in S3 = <s,t | s^3, t^2, (st)^2>.
    let s3_mul = |x: [u8; 3], y: [u8; 3]| [y[x[0] as usize], y[x[1] as usize], y[x[2] as usize]];
    let s3_of = |name: &str| -> [u8; 3] {
        match name {
            "s" => [1, 2, 0],
            "s2" => [2, 0, 1],
            "t" => [1, 0, 2],
            _ => [0, 1, 2],
        }
    };
    for cy in smallcancel::graph::simple_cycles(&c.graph, None) {
        let w = c.graph.path_label(&cy);
        let mut acc = [0u8, 1, 2];
        for l in w.letters() {
            let mut base = s3_of(c.graph.alphabet().name(l.sym));
            if l.neg {
                let mut inv = [0u8; 3];
                for (i, &b) in base.iter().enumerate() {
                    inv[b as usize] = i as u8;
                }
                base = inv;
            }
            acc = s3_mul(acc, base);
        }
        assert_eq!(acc, [0, 1, 2], "closed-path label must be trivial in S3");
    }
    for rel in ["s s s", "t t", "s t s t"] {
        let w = c.graph.alphabet().parse_word(rel).unwrap();
        assert!(
            find_occurrences(&w, &c.graph).iter().any(|p| c.graph.path_end(p) == p.start),
            "expected a closed path labelled {rel}"
        );
    }

    // Figure "differences": Gr(6) passes on the hexagon, Gr_*(6) fails on
    // the completion with the witness pieces a²b and a⁻¹b⁻².
    let hexagon =
        parse_graph("alphabet: a b\nA B a\nB C a\nC D b\nE D a\nF E b\nA F b\n").unwrap();
    assert!(check_gr(&hexagon, 6, true, Scope::SimpleCycles).unwrap().passed());
    let hz = build_completion(&hexagon, &[z_factor("Za", "a", 3), z_factor("Zb", "b", 3)]).unwrap();
    let report = check_gr_star(&hz, 6, true).unwrap();
    assert!(!report.passed());
    match &report.witness {
        Some(FailWitness::FewPieces { count, piece_labels, .. }) => {
            assert_eq!(*count, 2);
            let mut labels: Vec<String> = piece_labels
                .iter()
                .map(|w| hz.graph.alphabet().display_word(w))
                .collect();
            labels.sort();
            assert_eq!(labels, vec!["a^-1 b^-2".to_string(), "a^2 b".to_string()]);
        }
        w => panic!("unexpected witness {w:?}"),
    }
    pass(5, "choices completions isomorphic; free-product square matches {s3,t2,(st)2}; differences passes Gr(6) and fails Gr*(6) with the a2b / a-1b-2 pair");
}

// -- 6 -----------------------------------------------------------------------

#[test]
fn criterion_06_witness_construction() {
    let fam = gen_distorted_family(7, 30);
    let pkg = select_witnesses_classical(&fam).expect("selection succeeds at N=30");
    verify_classical_package(&fam, &pkg).expect("post-hoc verification");
    assert_eq!(pkg.w1.len(), 256);
    assert_eq!(pkg.w2.len(), 256);

    let short = gen_distorted_family(7, 15);
    match select_witnesses_classical(&short) {
        Err(WitnessError::InsufficientRelators(15)) => {}
        other => panic!("expected InsufficientRelators(15), got {other:?}"),
    }
    pass(6, "witness selection succeeds and re-verifies at (p=7, N=30); 15 classes are rejected; |W1| = |W2| = 256");
}

// -- 7 -----------------------------------------------------------------------

#[test]
fn criterion_07_distortion_certificates() {
    let a = Alphabet::new(["a", "b"]);
    let g = cycle_graph(&a, &cyclic_reduce(&a.parse_word("a^7 b").unwrap()).unwrap().0);

    let w = cyclic_reduce(&a.parse_word("a").unwrap()).unwrap().0;
    let cert = classify_case(&g, &w, false).unwrap();
    assert_eq!(cert.case, CaseTag::Case2b);
    assert_eq!(cert.c0, Some(7));
    assert_eq!(cert.lower_bound, Some(Ratio::new(1, 7)));
    assert_eq!(cert.hausdorff, Some(43));
    assert!(
        cert.case2b_witnesses.iter().all(|w| w.all_pass()),
        "every emitted case-2b witness passes all inequality audits"
    );
    // a^7 b is not Gr'(1/6); the failed audits are retained as downgrade
    // evidence rather than emitted as witnesses.
    assert!(!cert.small_cancellation_ok);
    assert!(cert.downgraded());

    let w = cyclic_reduce(&a.parse_word("a b").unwrap()).unwrap().0;
    let cert = classify_case(&g, &w, false).unwrap();
    assert_eq!(cert.case, CaseTag::Case2a);
    assert_eq!(cert.c0, Some(3));
    assert_eq!(cert.lower_bound, Some(Ratio::new(1, 3)));
    assert_eq!(cert.hausdorff, Some(20));
    pass(7, "a^7b certificates: w=a gives case 2b (C0=7, 1/7, 43); w=ab gives case 2a (C0=3, 1/3, 20); audits pass on all emitted witnesses");
}

// -- 8 -----------------------------------------------------------------------

#[test]
fn criterion_08_short_witness_identity() {
    for p in 2..=9u32 {
        for n in 1..=10u32 {
            let fam = gen_distorted_family(p, n);
            let r_n = &fam.relators[(n - 1) as usize];
            let u = short_witness(p, n).inverse();
            let mut rebuilt = u.clone();
            rebuilt.push_run(Letter::pos(1), 1u64 << n);
            assert_eq!(&rebuilt, r_n, "u_n · b^(2^n) ≡ r_n at p={p}, n={n}");
            let expect =
                (p as u64 + 1) + 2 * (n as u64) * (p as u64).pow(2) + (p as u64).pow(2);
            assert_eq!(u.len(), expect, "|u_n| formula at p={p}, n={n}");
        }
    }
    pass(8, "u_n · b^(2^n) is letter-by-letter r_n and |u_n| = (p+1) + 2np^2 + p^2 for p <= 9, n <= 10");
}

// -- 9 -----------------------------------------------------------------------

fn random_word(rng: &mut ChaCha8Rng, alpha_n: u32, len: usize, reduced: bool) -> Word {
    let mut w = Word::empty();
    let mut last: Option<Letter> = None;
    for _ in 0..len {
        loop {
            let l = Letter::new(rng.gen_range(0..alpha_n), rng.gen_bool(0.5));
            if reduced {
                if let Some(pl) = last {
                    if pl == l.inverse() {
                        continue;
                    }
                }
            }
            w.push(l);
            last = Some(l);
            break;
        }
    }
    w
}

/// Two-face disk: a polygon face reading `r` and its mirror sharing the
/// first edge, with the outer face chained around.
fn doubled_polygon(alpha: &Alphabet, r: &Word) -> Diagram {
    let letters: Vec<Letter> = r.letters().collect();
    let n = letters.len();
    assert!(n >= 2);
    // face1: vertices 0..n; face2 shares edge (0,1) and runs through fresh
    // vertices n..2n-2 (total fresh n-2).
    let f1: Vec<FaceStep> = (0..n)
        .map(|i| FaceStep { from: i as u32, to: ((i + 1) % n) as u32, label: Some(letters[i]) })
        .collect();
    // face2 boundary word from vertex 1: r₀⁻¹ r_{n-1}⁻¹ … r₁⁻¹ (freely
    // inverse to r read from vertex 1).
    let fresh = |k: usize| -> u32 {
        // k = 1..n-1 mapping to fresh ids; k = 0 is vertex 0, k = n-1 wraps
        // to vertex 1.
        (n + k - 1) as u32
    };
    let mut f2: Vec<FaceStep> = Vec::new();
    f2.push(FaceStep { from: 1, to: 0, label: Some(letters[0].inverse()) });
    for k in 0..n - 1 {
        let from = if k == 0 { 0 } else { fresh(k) };
        let to = if k == n - 2 { 1 } else { fresh(k + 1) };
        f2.push(FaceStep { from, to, label: Some(letters[n - 1 - k].inverse()) });
    }
    // Outer face: complement sides chained into one cycle.
    let mut sides: Vec<FaceStep> = Vec::new();
    for f in [&f1, &f2] {
        for s in f {
            sides.push(FaceStep { from: s.to, to: s.from, label: s.label.map(Letter::inverse) });
        }
    }
    // Remove the two sides that are matched internally: edge (0,1) has both
    // sides used by f1 and f2.
    sides.retain(|s| {
        !((s.from == 0 && s.to == 1 && s.label == Some(letters[0]))
            || (s.from == 1 && s.to == 0 && s.label == Some(letters[0].inverse())))
    });
    // Chain the remaining sides into a cycle.
    let mut outer: Vec<FaceStep> = vec![sides.pop().unwrap()];
    while !sides.is_empty() {
        let at = outer.last().unwrap().to;
        let k = sides
            .iter()
            .position(|s| s.from == at)
            .expect("outer boundary chains up");
        outer.push(sides.remove(k));
    }
    assert_eq!(outer.last().unwrap().to, outer[0].from);
    let faces = vec![f1, f2, outer];
    Diagram::from_face_cycles(alpha.clone(), &faces, Some(2)).expect("valid doubled polygon")
}

#[test]
fn criterion_09_diagram_moves() {
    let alpha = Alphabet::new(["s", "t", "u"]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut fixtures_checked = 0;

    // Folding: random single-face disks with partially unreduced boundary
    // words; each fold removes exactly the first adjacent inverse pair, and
    // repeated folding terminates with a cyclically reduced boundary.
    for _ in 0..60 {
        // Build w with guaranteed nonempty cyclically reduced core.
        let core = {
            let mut c;
            loop {
                let len = rng.gen_range(2..6);
                c = random_word(&mut rng, 3, len, true);
                let cr = cyclic_reduce(&c);
                if let Ok((cw, conj)) = cr {
                    if conj.is_empty() && cw.word() == &c {
                        break;
                    }
                }
            }
            c
        };
        // Insert cancelling pairs.
        let mut w = Word::empty();
        for l in core.letters() {
            w.push(l);
            if rng.gen_bool(0.4) {
                let x = Letter::new(rng.gen_range(0..3), rng.gen_bool(0.5));
                w.push(x);
                w.push(x.inverse());
            }
        }
        let mut d = fixtures::single_face_disk(&alpha, &w);
        let mut guard = w.len() + 2;
        loop {
            let before = d.boundary_word().unwrap();
            match fold_boundary(&mut d) {
                Ok(()) => {
                    d.validate().unwrap();
                    let after = d.boundary_word().unwrap();
                    assert_eq!(after.len() + 2, before.len(), "fold shortens by 2");
                    // The fold removes the first adjacent inverse pair: the
                    // result is a rotation of the excised word.
                    let expected = excise_first_pair(&before);
                    assert!(
                        is_rotation_of(&after, &expected),
                        "fold result must be the excised boundary"
                    );
                }
                Err(DiagramError::NothingToFold) => break,
                Err(e) => panic!("unexpected fold error {e}"),
            }
            guard -= 1;
            assert!(guard > 0, "folding did not terminate");
        }
        let bw = d.boundary_word().unwrap();
        if !bw.is_empty() {
            assert!(bw.is_freely_reduced());
            if bw.len() > 1 {
                assert!(bw.first().unwrap() != bw.last().unwrap().inverse());
            }
        }
        fixtures_checked += 1;
    }

    // Cancellation: doubled polygons; the boundary word is unchanged
    // byte-for-byte and the face count drops by two.
    for _ in 0..40 {
        let len = rng.gen_range(2..7);
        let r = random_word(&mut rng, 3, len, true);
        let mut d = doubled_polygon(&alpha, &r);
        d.validate().unwrap();
        let before = d.boundary_word().unwrap();
        let faces = d.face_cycles();
        let before_count = faces.len();
        let od = d.outer_dart().unwrap();
        let fo = d.face_of(&faces, od);
        let inner: Vec<usize> = (0..faces.len()).filter(|&i| i != fo).collect();
        cancel_inverse_faces(&mut d, faces[inner[0]][0], faces[inner[1]][0]).unwrap();
        d.validate().unwrap();
        assert_eq!(d.boundary_word().unwrap(), before, "cancel preserves the boundary word");
        assert_eq!(d.face_cycles().len() + 2, before_count);
        fixtures_checked += 1;
    }
    assert!(fixtures_checked >= 100);

    // Shape predicates against hand-classified fixtures.
    assert!(shape_i1(&fixtures::single_face_disk(&alpha, &alpha.parse_word("s t u").unwrap())).unwrap());
    assert!(shape_i1(&fixtures::chain_disk(2)).unwrap());
    for k in 3..=6 {
        assert!(shape_i1(&fixtures::chain_disk(k)).unwrap());
    }
    assert!(!shape_i1(&fixtures::tripod_disk()).unwrap());
    assert!(is_37_diagram(&fixtures::chain_disk(4)).unwrap().is_ok());
    assert!(is_37_diagram(&fixtures::tripod_disk()).unwrap().is_ok());
    pass(9, "folding and cancellation behave as contracted on 100 random fixtures; shape predicates match hand classifications");
}

fn excise_first_pair(w: &Word) -> Word {
    let letters: Vec<Letter> = w.letters().collect();
    let n = letters.len();
    let i = (0..n)
        .find(|&i| letters[i].inverse() == letters[(i + 1) % n])
        .expect("boundary had a foldable pair");
    let mut out = Word::empty();
    for k in 0..n {
        if k != i && k != (i + 1) % n {
            out.push(letters[k]);
        }
    }
    out
}

fn is_rotation_of(a: &Word, b: &Word) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    (0..b.len()).any(|k| &b.rotated(k) == a)
}

// -- 10 ----------------------------------------------------------------------

#[test]
fn criterion_10_presentation_simplification() {
    let a = Alphabet::new(["a", "b"]);
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..30 {
        let k = rng.gen_range(1..4);
        let mut rels = Vec::new();
        for _ in 0..k {
            loop {
                let len = rng.gen_range(1..=10);
                let w = random_word(&mut rng, 2, len, true);
                if cyclic_reduce(&w).is_ok() {
                    rels.push(w);
                    break;
                }
            }
        }
        let p = Presentation::new(a.clone(), rels.clone());
        let refined = concise_refinement(&p).unwrap();
        // Brute-force class partition oracle.
        let closure = symmetrized_closure(&rels).unwrap();
        let mut classes: Vec<BTreeSet<Word>> = Vec::new();
        for cw in &closure {
            let mut members = BTreeSet::new();
            for rot in CyclicWord::new(cw.word().clone()).unwrap().rotations() {
                members.insert(rot.clone());
                members.insert(rot.inverse());
            }
            if !classes.contains(&members) {
                classes.push(members);
            }
        }
        assert_eq!(refined.relators.len(), classes.len(), "one representative per class");
        for r in &refined.relators {
            let class = classes.iter().find(|c| c.contains(r)).expect("rep lies in its class");
            assert_eq!(r, class.iter().min().unwrap(), "shortlex-least representative");
        }
    }

    // Tietze reduction on the three worked examples.
    let p = Presentation::new(a.clone(), vec![a.parse_word("a b").unwrap()]);
    let t = tietze_reduce(&p);
    assert_eq!(t.alphabet.names(), &["a".to_string()]);
    assert!(t.relators.is_empty());

    let one = Alphabet::new(["a"]);
    let p = Presentation::new(one.clone(), vec![one.parse_word("a a").unwrap()]);
    assert_eq!(tietze_reduce(&p), p);

    let p = Presentation::new(a.clone(), vec![a.parse_word("a b A B").unwrap()]);
    assert_eq!(tietze_reduce(&p), p);
    pass(10, "concise refinement matches the brute-force class partition; Tietze reduction matches the worked examples");
}

// -- supporting identities used by several criteria ---------------------------

#[test]
fn disk_closure_audits_to_six() {
    // Gluing a face onto a disk's boundary and auditing as a sphere yields
    // exactly 6 on random disks.
    let alpha = Alphabet::new(["s", "t", "u"]);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let len = rng.gen_range(1..8);
        let w = random_word(&mut rng, 3, len, false);
        if w.is_empty() {
            continue;
        }
        let d = fixtures::single_face_disk(&alpha, &w);
        let s = close_disk(&d).unwrap();
        assert_eq!(curvature_audit(&s).unwrap(), Ratio::from_integer(6));
    }
    for k in 1..=5 {
        let s = close_disk(&fixtures::chain_disk(k)).unwrap();
        assert_eq!(curvature_audit(&s).unwrap(), Ratio::from_integer(6));
    }
}

#[test]
fn degree_identities() {
    // Chain interior faces have e = 2, i = 2; extremal e = 1, i = 1; the
    // arc-count identity holds.
    for k in [2usize, 3, 5] {
        let d = fixtures::chain_disk(k);
        let faces = d.face_cycles();
        let od = d.outer_dart().unwrap();
        let fo = d.face_of(&faces, od);
        let a = arcs(&d).unwrap();
        let n_boundary = (0..a.arc_count).filter(|&x| a.boundary[x as usize]).count();
        let n_interior = a.arc_count as usize - n_boundary;
        let mut ends = 0;
        let mut sums = (0, 0);
        for (fi, f) in faces.iter().enumerate() {
            if fi == fo {
                continue;
            }
            let (e, i) = degrees(&d, f[0]).unwrap();
            sums.0 += e;
            sums.1 += i;
            match (e, i) {
                (1, 1) => ends += 1,
                (2, 2) => {}
                other => panic!("unexpected degrees {other:?} in chain {k}"),
            }
        }
        assert_eq!(ends, 2);
        assert_eq!(sums.0, n_boundary);
        assert_eq!(sums.1, 2 * n_interior);
        assert!(matches!(d.topology(), Topology::Disk { .. }));
    }
}
