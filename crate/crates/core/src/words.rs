//! Free-monoid words over a signed alphabet, free and cyclic reduction,
//! symmetrized closures, and presentation-level simplification.
//!
//! Words are stored run-length encoded: the relator families of interest
//! contain power blocks like `b^(2^n)` whose explicit expansion is
//! infeasible, while their syllable form has a handful of entries.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("word reduces to the empty word")]
    EmptyAfterReduction,
    #[error("symbol `{0}` clashes with an existing alphabet symbol")]
    SymbolClash(String),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("parse error at line {line}, column {col}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl ParseError {
    fn new(line: usize, col: usize, msg: impl Into<String>) -> Self {
        ParseError { line, col, msg: msg.into() }
    }
}

/// A generator symbol with a sign. `neg == true` means the formal inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub sym: u32,
    pub neg: bool,
}

impl Letter {
    pub fn new(sym: u32, neg: bool) -> Self {
        Letter { sym, neg }
    }

    pub fn pos(sym: u32) -> Self {
        Letter { sym, neg: false }
    }

    pub fn neg(sym: u32) -> Self {
        Letter { sym, neg: true }
    }

    pub fn inverse(self) -> Self {
        Letter { sym: self.sym, neg: !self.neg }
    }
}

/// A maximal run of one letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Syllable {
    pub letter: Letter,
    pub count: u64,
}

/// A word in the free monoid on `S ⊔ S⁻¹`, run-length encoded.
///
/// Equality is letter-by-letter equality; no reduction is implied.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Word {
    syls: Vec<Syllable>,
}

impl Word {
    pub fn empty() -> Self {
        Word { syls: Vec::new() }
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(letters: I) -> Self {
        let mut w = Word::empty();
        for l in letters {
            w.push(l);
        }
        w
    }

    pub fn from_syllables<I: IntoIterator<Item = (Letter, u64)>>(syls: I) -> Self {
        let mut w = Word::empty();
        for (l, c) in syls {
            w.push_run(l, c);
        }
        w
    }

    pub fn push(&mut self, letter: Letter) {
        self.push_run(letter, 1);
    }

    pub fn push_run(&mut self, letter: Letter, count: u64) {
        if count == 0 {
            return;
        }
        if let Some(last) = self.syls.last_mut() {
            if last.letter == letter {
                last.count += count;
                return;
            }
        }
        self.syls.push(Syllable { letter, count });
    }

    pub fn extend_word(&mut self, other: &Word) {
        for s in &other.syls {
            self.push_run(s.letter, s.count);
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        w.extend_word(other);
        w
    }

    pub fn len(&self) -> u64 {
        self.syls.iter().map(|s| s.count).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.syls.is_empty()
    }

    pub fn syllables(&self) -> &[Syllable] {
        &self.syls
    }

    /// Iterates over the expanded letters. Only use on words known small.
    pub fn letters(&self) -> impl Iterator<Item = Letter> + '_ {
        self.syls.iter().flat_map(|s| std::iter::repeat(s.letter).take(s.count as usize))
    }

    pub fn letter_at(&self, pos: u64) -> Letter {
        let mut acc = 0;
        for s in &self.syls {
            acc += s.count;
            if pos < acc {
                return s.letter;
            }
        }
        panic!("letter_at out of range");
    }

    pub fn first(&self) -> Option<Letter> {
        self.syls.first().map(|s| s.letter)
    }

    pub fn last(&self) -> Option<Letter> {
        self.syls.last().map(|s| s.letter)
    }

    pub fn inverse(&self) -> Word {
        Word {
            syls: self
                .syls
                .iter()
                .rev()
                .map(|s| Syllable { letter: s.letter.inverse(), count: s.count })
                .collect(),
        }
    }

    /// The factor of the cyclic reading of `self` starting at `start`
    /// (mod `len`) of length `len_out`. May wind around several times.
    pub fn cyclic_factor(&self, start: u64, len_out: u64) -> Word {
        let n = self.len();
        assert!(n > 0, "cyclic_factor of empty word");
        let mut w = Word::empty();
        let mut pos = start % n;
        let mut remaining = len_out;
        // Locate the syllable containing `pos`.
        let mut idx = 0;
        let mut acc = 0;
        for (i, s) in self.syls.iter().enumerate() {
            if pos < acc + s.count {
                idx = i;
                break;
            }
            acc += s.count;
        }
        let mut offset = pos - acc;
        while remaining > 0 {
            let s = self.syls[idx];
            let take = (s.count - offset).min(remaining);
            w.push_run(s.letter, take);
            remaining -= take;
            offset = 0;
            idx += 1;
            if idx == self.syls.len() {
                idx = 0;
            }
            pos = 0;
            let _ = pos;
        }
        w
    }

    /// Cyclic rotation: the word starting at letter `k` of the cyclic reading.
    pub fn rotated(&self, k: u64) -> Word {
        if self.is_empty() {
            return Word::empty();
        }
        self.cyclic_factor(k, self.len())
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.syls.windows(2).all(|w| w[0].letter != w[1].letter.inverse())
    }

    /// The unique freely reduced word equal to `self` in the free group.
    pub fn free_reduce(&self) -> Word {
        let mut stack: Vec<Syllable> = Vec::new();
        for &syl in &self.syls {
            let mut cur = syl;
            loop {
                match stack.last_mut() {
                    Some(top) if top.letter == cur.letter.inverse() => {
                        let cancel = top.count.min(cur.count);
                        top.count -= cancel;
                        cur.count -= cancel;
                        if top.count == 0 {
                            stack.pop();
                        }
                        if cur.count == 0 {
                            break;
                        }
                    }
                    Some(top) if top.letter == cur.letter => {
                        top.count += cur.count;
                        break;
                    }
                    _ => {
                        stack.push(cur);
                        break;
                    }
                }
            }
        }
        Word { syls: stack }
    }

    /// Shortlex order: length first, then letter-lexicographic with
    /// `(sym, sign)` order (positive before negative).
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        match self.len().cmp(&other.len()) {
            Ordering::Equal => self.lex_cmp(other),
            ord => ord,
        }
    }

    /// Letter-lexicographic comparison of the expansions, without
    /// expanding: walk the syllable streams in parallel.
    pub fn lex_cmp(&self, other: &Word) -> Ordering {
        let mut i = 0;
        let mut j = 0;
        let mut ci = 0u64; // consumed inside syllable i
        let mut cj = 0u64;
        loop {
            match (self.syls.get(i), other.syls.get(j)) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(a), Some(b)) => {
                    match a.letter.cmp(&b.letter) {
                        Ordering::Equal => {
                            let step = (a.count - ci).min(b.count - cj);
                            ci += step;
                            cj += step;
                            if ci == a.count {
                                i += 1;
                                ci = 0;
                            }
                            if cj == b.count {
                                j += 1;
                                cj = 0;
                            }
                        }
                        ord => return ord,
                    }
                }
            }
        }
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.shortlex_cmp(other)
    }
}

/// A cyclically reduced word standing for a relator up to nothing: the
/// representative is literal. Use [`CyclicWord::class_rep`] for the
/// canonical representative of its conjugacy-and-inversion class.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CyclicWord {
    rep: Word,
}

impl CyclicWord {
    /// Wraps a word that must already be cyclically reduced.
    pub fn new(rep: Word) -> Result<Self, WordError> {
        if rep.is_empty() {
            return Err(WordError::EmptyAfterReduction);
        }
        assert!(rep.is_freely_reduced(), "CyclicWord requires a freely reduced word");
        if rep.len() > 1 {
            assert!(
                rep.first().unwrap() != rep.last().unwrap().inverse(),
                "CyclicWord requires a cyclically reduced word"
            );
        }
        Ok(CyclicWord { rep })
    }

    pub fn word(&self) -> &Word {
        &self.rep
    }

    pub fn len(&self) -> u64 {
        self.rep.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Lexicographically least rotation of the underlying word.
    ///
    /// When the word has at least two syllables, a rotation equal to the
    /// least one must start at a run boundary of the least letter, so only
    /// those candidates are compared; single-syllable words are rotation
    /// invariant.
    pub fn least_rotation(&self) -> Word {
        let w = &self.rep;
        if w.syls.len() <= 1 {
            return w.clone();
        }
        let min_letter = w.syls.iter().map(|s| s.letter).min().unwrap();
        let mut best: Option<Word> = None;
        let mut start = 0u64;
        for s in &w.syls {
            if s.letter == min_letter {
                let cand = w.rotated(start);
                match &best {
                    Some(b) if b.lex_cmp(&cand) != Ordering::Greater => {}
                    _ => best = Some(cand),
                }
            }
            start += s.count;
        }
        best.unwrap()
    }

    /// Canonical representative of the `[·]`-class (all cyclic conjugates
    /// and their inverses): the shortlex-least element.
    pub fn class_rep(&self) -> Word {
        let a = self.least_rotation();
        let b = CyclicWord { rep: self.rep.inverse() }.least_rotation();
        if a.lex_cmp(&b) == Ordering::Greater {
            b
        } else {
            a
        }
    }

    /// All distinct cyclic rotations, expanded. Only for small words.
    pub fn rotations(&self) -> Vec<Word> {
        (0..self.len()).map(|k| self.rep.rotated(k)).collect()
    }
}

/// `w = conjugator · core · conjugator⁻¹` with `core` cyclically reduced.
pub fn cyclic_reduce(w: &Word) -> Result<(CyclicWord, Word), WordError> {
    let red = w.free_reduce();
    if red.is_empty() {
        return Err(WordError::EmptyAfterReduction);
    }
    let mut syls = red.syls.clone();
    let mut conj = Word::empty();
    loop {
        if syls.len() < 2 {
            break;
        }
        let first = syls[0];
        let last = *syls.last().unwrap();
        if first.letter != last.letter.inverse() {
            break;
        }
        let peel = first.count.min(last.count);
        conj.push_run(first.letter, peel);
        syls[0].count -= peel;
        let li = syls.len() - 1;
        syls[li].count -= peel;
        if syls[li].count == 0 {
            syls.pop();
        }
        if syls[0].count == 0 {
            syls.remove(0);
        }
    }
    let core = CyclicWord::new(Word { syls })?;
    Ok((core, conj))
}

pub fn free_reduce(w: &Word) -> Word {
    w.free_reduce()
}

/// Smallest-period root: `Some((u, k))` with `w = u^k`, `k ≥ 2`, or `None`.
pub fn is_proper_power(w: &CyclicWord) -> Option<(Word, u32)> {
    let word = w.word();
    let syls = word.syllables();
    if syls.len() == 1 {
        let s = syls[0];
        if s.count >= 2 {
            return Some((Word::from_letters([s.letter]), s.count as u32));
        }
        return None;
    }
    // A rotation symmetry maps the set B of cyclic run boundaries to itself,
    // so every symmetry is a difference of two elements of B. B has at most
    // one entry per syllable, so this stays cheap on run-length encoded
    // words.
    let n = word.len();
    let mut boundaries: Vec<u64> = Vec::new();
    let mut prefix = 0u64;
    for j in 0..syls.len() {
        if j == 0 {
            if syls[0].letter != syls[syls.len() - 1].letter {
                boundaries.push(0);
            }
        } else {
            boundaries.push(prefix);
        }
        prefix += syls[j].count;
    }
    let b0 = boundaries[0];
    let mut candidates: Vec<u64> =
        boundaries.iter().map(|&b| (b + n - b0) % n).filter(|&d| d != 0).collect();
    candidates.sort_unstable();
    for d in candidates {
        if n % d == 0 && word.rotated(d) == *word {
            return Some((word.cyclic_factor(0, d), (n / d) as u32));
        }
    }
    None
}

/// Smallest superset of the cyclically-reduced inputs closed under cyclic
/// conjugation and inversion. Materializes the closure; intended for small
/// inputs.
pub fn symmetrized_closure(relators: &[Word]) -> Result<BTreeSet<CyclicWord>, WordError> {
    let mut out = BTreeSet::new();
    for r in relators {
        let (core, _) = cyclic_reduce(r)?;
        for rot in core.rotations() {
            out.insert(CyclicWord::new(rot.clone()).unwrap());
            out.insert(CyclicWord::new(rot.inverse()).unwrap());
        }
    }
    Ok(out)
}

/// A finite alphabet of named generators.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>, I: IntoIterator<Item = S>>(names: I) -> Self {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        for n in &names {
            assert!(seen.insert(n.clone()), "duplicate alphabet symbol `{n}`");
        }
        Alphabet { names }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, sym: u32) -> &str {
        &self.names[sym as usize]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index(&self, name: &str) -> Option<u32> {
        self.names.iter().position(|n| n == name).map(|i| i as u32)
    }

    pub fn add(&mut self, name: impl Into<String>) -> Result<u32, WordError> {
        let name = name.into();
        if self.index(&name).is_some() {
            return Err(WordError::SymbolClash(name));
        }
        self.names.push(name);
        Ok(self.names.len() as u32 - 1)
    }

    fn resolve_ident(&self, tok: &str) -> Option<Letter> {
        if let Some(sym) = self.index(tok) {
            return Some(Letter::pos(sym));
        }
        if tok.chars().count() == 1 {
            let c = tok.chars().next().unwrap();
            if c.is_ascii_uppercase() {
                let lower = c.to_ascii_lowercase().to_string();
                if let Some(sym) = self.index(&lower) {
                    return Some(Letter::neg(sym));
                }
            }
        }
        None
    }

    /// Parses one whitespace-separated token into letters.
    ///
    /// Accepted forms: `name`, `name^k` (k a nonzero integer; negative means
    /// the inverse), single-char uppercase for the inverse of a declared
    /// lowercase generator, and compact strings of single-char generators
    /// such as `abAB`.
    fn parse_token(&self, tok: &str, line: usize, col: usize) -> Result<Word, ParseError> {
        let (base, exp) = match tok.split_once('^') {
            Some((b, e)) => {
                let exp: i64 = e.parse().map_err(|_| {
                    ParseError::new(line, col, format!("bad exponent `{e}` in `{tok}`"))
                })?;
                if exp == 0 {
                    return Err(ParseError::new(line, col, format!("zero exponent in `{tok}`")));
                }
                (b, exp)
            }
            None => (tok, 1),
        };
        if let Some(letter) = self.resolve_ident(base) {
            let l = if exp < 0 { letter.inverse() } else { letter };
            let mut w = Word::empty();
            w.push_run(l, exp.unsigned_abs());
            return Ok(w);
        }
        // Compact single-char form.
        let mut w = Word::empty();
        for c in base.chars() {
            match self.resolve_ident(&c.to_string()) {
                Some(l) => w.push(l),
                None => {
                    return Err(ParseError::new(
                        line,
                        col,
                        format!("unknown generator `{c}` in `{tok}`"),
                    ))
                }
            }
        }
        if w.is_empty() {
            return Err(ParseError::new(line, col, "empty token"));
        }
        if exp != 1 {
            let base_w = w;
            let mut out = Word::empty();
            for _ in 0..exp.unsigned_abs() {
                if exp < 0 {
                    out.extend_word(&base_w.inverse());
                } else {
                    out.extend_word(&base_w);
                }
            }
            w = out;
        }
        Ok(w)
    }

    /// Parses a whitespace-separated sequence of tokens as a word.
    pub fn parse_word(&self, s: &str) -> Result<Word, ParseError> {
        self.parse_word_at(s, 0)
    }

    fn parse_word_at(&self, s: &str, line: usize) -> Result<Word, ParseError> {
        let mut w = Word::empty();
        for (ti, tok) in s.split_whitespace().enumerate() {
            let part = self.parse_token(tok, line, ti + 1)?;
            w.extend_word(&part);
        }
        Ok(w)
    }

    /// Renders a word in the presentation text format.
    pub fn display_word(&self, w: &Word) -> String {
        if w.is_empty() {
            return String::new();
        }
        let mut out = String::new();
        for (i, s) in w.syllables().iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let name = self.name(s.letter.sym);
            let exp: i64 = if s.letter.neg { -(s.count as i64) } else { s.count as i64 };
            if exp == 1 {
                out.push_str(name);
            } else {
                let _ = write!(out, "{name}^{exp}");
            }
        }
        out
    }
}

/// A group presentation: a declared alphabet plus a list of relators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Presentation {
    pub alphabet: Alphabet,
    pub relators: Vec<Word>,
}

impl Presentation {
    pub fn new(alphabet: Alphabet, relators: Vec<Word>) -> Self {
        for r in &relators {
            for s in r.syllables() {
                assert!(
                    (s.letter.sym as usize) < alphabet.len(),
                    "relator letter outside alphabet"
                );
            }
        }
        Presentation { alphabet, relators }
    }

    /// Text format: `#` comments, a header line `alphabet: a b c`, then one
    /// relator per line.
    pub fn parse(text: &str) -> Result<Presentation, ParseError> {
        let mut alphabet: Option<Alphabet> = None;
        let mut relators = Vec::new();
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
                    return Err(ParseError::new(line_no, 1, "duplicate alphabet header"));
                }
                let names: Vec<&str> = rest.split_whitespace().collect();
                if names.is_empty() {
                    return Err(ParseError::new(line_no, 1, "empty alphabet"));
                }
                let mut seen = BTreeSet::new();
                for n in &names {
                    if !seen.insert(*n) {
                        return Err(ParseError::new(
                            line_no,
                            1,
                            format!("duplicate alphabet symbol `{n}`"),
                        ));
                    }
                }
                alphabet = Some(Alphabet::new(names));
                continue;
            }
            let alpha = alphabet.as_ref().ok_or_else(|| {
                ParseError::new(line_no, 1, "relator before alphabet header")
            })?;
            relators.push(alpha.parse_word_at(line, line_no)?);
        }
        let alphabet = alphabet
            .ok_or_else(|| ParseError::new(1, 1, "missing `alphabet:` header"))?;
        Ok(Presentation { alphabet, relators })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("alphabet:");
        for n in self.alphabet.names() {
            out.push(' ');
            out.push_str(n);
        }
        out.push('\n');
        for r in &self.relators {
            out.push_str(&self.alphabet.display_word(r));
            out.push('\n');
        }
        out
    }
}

/// One shortlex-least representative per `[·]`-class of the (conceptually
/// symmetrized) relator set. Relators are cyclically reduced first.
pub fn concise_refinement(p: &Presentation) -> Result<Presentation, WordError> {
    let mut reps = BTreeSet::new();
    for r in &p.relators {
        let (core, _) = cyclic_reduce(r)?;
        reps.insert(core.class_rep());
    }
    Ok(Presentation { alphabet: p.alphabet.clone(), relators: reps.into_iter().collect() })
}

/// Counts of each signed letter per relator, run-length aware.
fn signed_counts(p: &Presentation) -> Vec<std::collections::BTreeMap<Letter, u64>> {
    p.relators
        .iter()
        .map(|r| {
            let mut m = std::collections::BTreeMap::new();
            for s in r.syllables() {
                *m.entry(s.letter).or_insert(0) += s.count;
            }
            m
        })
        .collect()
}

/// One simultaneous Tietze-reduction pass.
///
/// A relator is redundant if it contains `s^ε` occurring exactly once in it
/// and in no other relator, with `s^(−ε)` occurring in no relator. All
/// redundant relators are removed simultaneously, and for each one
/// redundant generator occurring in it is removed (the largest symbol when
/// there is a choice). The pass is not iterated.
pub fn tietze_reduce(p: &Presentation) -> Presentation {
    let counts = signed_counts(p);
    let mut total: std::collections::BTreeMap<Letter, u64> = std::collections::BTreeMap::new();
    for m in &counts {
        for (&l, &c) in m {
            *total.entry(l).or_insert(0) += c;
        }
    }
    let occurs = |l: Letter| total.get(&l).copied().unwrap_or(0);

    let mut removed_relators = Vec::new();
    let mut removed_syms: BTreeSet<u32> = BTreeSet::new();
    for (i, m) in counts.iter().enumerate() {
        let mut redundant_syms: Vec<u32> = Vec::new();
        for (&l, &c) in m {
            if c == 1 && occurs(l) == 1 && occurs(l.inverse()) == 0 {
                redundant_syms.push(l.sym);
            }
        }
        if !redundant_syms.is_empty() {
            removed_relators.push(i);
            removed_syms.insert(*redundant_syms.iter().max().unwrap());
        }
    }

    let kept_relators: Vec<&Word> = p
        .relators
        .iter()
        .enumerate()
        .filter(|(i, _)| !removed_relators.contains(i))
        .map(|(_, r)| r)
        .collect();

    // Rebuild the alphabet without the removed generators and remap symbols.
    let mut new_names = Vec::new();
    let mut remap = vec![u32::MAX; p.alphabet.len()];
    for (sym, name) in p.alphabet.names().iter().enumerate() {
        if !removed_syms.contains(&(sym as u32)) {
            remap[sym] = new_names.len() as u32;
            new_names.push(name.clone());
        }
    }
    let alphabet = Alphabet::new(new_names);
    let relators = kept_relators
        .into_iter()
        .map(|r| {
            Word::from_syllables(r.syllables().iter().map(|s| {
                let sym = remap[s.letter.sym as usize];
                assert!(sym != u32::MAX, "kept relator uses a removed generator");
                (Letter::new(sym, s.letter.neg), s.count)
            }))
        })
        .collect();
    Presentation { alphabet, relators }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(["a", "b"])
    }

    fn w(alpha: &Alphabet, s: &str) -> Word {
        alpha.parse_word(s).unwrap()
    }

    #[test]
    fn free_reduce_examples() {
        let a = ab();
        assert_eq!(w(&a, "a b B a").free_reduce(), w(&a, "a a"));
        assert_eq!(Word::empty().free_reduce(), Word::empty());
        let st = Alphabet::new(["s", "t"]);
        assert_eq!(w(&st, "s t T S").free_reduce(), Word::empty());
    }

    #[test]
    fn free_reduce_idempotent_and_no_adjacent_inverse() {
        let a = ab();
        for s in ["a b B a", "a A", "b a A B b b", "a b a B A"] {
            let r = w(&a, s).free_reduce();
            assert!(r.is_freely_reduced());
            assert_eq!(r.free_reduce(), r);
            assert!(r.len() <= w(&a, s).len());
        }
    }

    #[test]
    fn cyclic_reduce_examples() {
        let a = ab();
        let (core, conj) = cyclic_reduce(&w(&a, "a b A")).unwrap();
        assert_eq!(core.word(), &w(&a, "b"));
        assert_eq!(conj, w(&a, "a"));

        let (core, conj) = cyclic_reduce(&w(&a, "a b")).unwrap();
        assert_eq!(core.word(), &w(&a, "a b"));
        assert!(conj.is_empty());

        let (core, conj) = cyclic_reduce(&w(&a, "a a b A A")).unwrap();
        assert_eq!(core.word(), &w(&a, "b"));
        assert_eq!(conj, w(&a, "a a"));

        assert_eq!(cyclic_reduce(&w(&a, "a A")), Err(WordError::EmptyAfterReduction));
    }

    #[test]
    fn closure_examples() {
        let a = ab();
        let c = symmetrized_closure(&[w(&a, "a b")]).unwrap();
        let words: BTreeSet<Word> = c.iter().map(|cw| cw.word().clone()).collect();
        let expect: BTreeSet<Word> =
            ["a b", "b a", "B A", "A B"].iter().map(|s| w(&a, s)).collect();
        assert_eq!(words, expect);

        let c = symmetrized_closure(&[w(&a, "a")]).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn closure_idempotent() {
        let a = ab();
        let base = [w(&a, "a b"), w(&a, "a a b")];
        let c1 = symmetrized_closure(&base).unwrap();
        let words: Vec<Word> = c1.iter().map(|cw| cw.word().clone()).collect();
        let c2 = symmetrized_closure(&words).unwrap();
        assert_eq!(c1, c2);
    }

    #[test]
    fn proper_power_examples() {
        let a = ab();
        let cw = |s: &str| CyclicWord::new(w(&a, s)).unwrap();
        assert_eq!(is_proper_power(&cw("a b a b")), Some((w(&a, "a b"), 2)));
        assert_eq!(is_proper_power(&cw("a b")), None);
        assert_eq!(is_proper_power(&cw("a a a")), Some((w(&a, "a"), 3)));
        assert_eq!(is_proper_power(&cw("a b a b a b")), Some((w(&a, "a b"), 3)));
        assert_eq!(is_proper_power(&cw("a b a a b")), None);
    }

    #[test]
    fn proper_power_matches_period_scan() {
        let a = ab();
        // Brute-force period scan oracle on all words over {a,b,A,B} up to
        // length 6 that are cyclically reduced.
        let letters =
            [Letter::pos(0), Letter::neg(0), Letter::pos(1), Letter::neg(1)];
        let mut stack: Vec<Vec<Letter>> = letters.iter().map(|&l| vec![l]).collect();
        while let Some(ls) = stack.pop() {
            let word = Word::from_letters(ls.iter().copied());
            if word.is_freely_reduced()
                && ls.first().unwrap() != &ls.last().unwrap().inverse()
            {
                let cw = CyclicWord::new(word.clone()).unwrap();
                let got = is_proper_power(&cw);
                // Oracle: smallest d dividing n with w == rotated(d).
                let n = ls.len() as u64;
                let mut oracle = None;
                for d in 1..n {
                    if n % d == 0 && word.rotated(d) == word {
                        oracle = Some((word.cyclic_factor(0, d), (n / d) as u32));
                        break;
                    }
                }
                assert_eq!(got, oracle, "word {}", a.display_word(&word));
            }
            if ls.len() < 6 {
                for &l in &letters {
                    let mut next = ls.clone();
                    next.push(l);
                    stack.push(next);
                }
            }
        }
    }

    #[test]
    fn concise_refinement_examples() {
        let a = ab();
        let p = Presentation::new(ab(), vec![w(&a, "a b"), w(&a, "b a")]);
        let c = concise_refinement(&p).unwrap();
        assert_eq!(c.relators.len(), 1);

        let p = Presentation::new(ab(), vec![]);
        assert!(concise_refinement(&p).unwrap().relators.is_empty());

        // Refinement of a symmetrized closure recovers the closure.
        let closure = symmetrized_closure(&[w(&a, "a a b")]).unwrap();
        let p = Presentation::new(
            ab(),
            closure.iter().map(|cw| cw.word().clone()).collect(),
        );
        let c = concise_refinement(&p).unwrap();
        assert_eq!(c.relators.len(), 1);
        let re_closed = symmetrized_closure(&c.relators).unwrap();
        assert_eq!(re_closed, closure);
    }

    #[test]
    fn tietze_examples() {
        let a = ab();
        let p = Presentation::new(ab(), vec![w(&a, "a b")]);
        let t = tietze_reduce(&p);
        assert_eq!(t.alphabet.names(), &["a".to_string()]);
        assert!(t.relators.is_empty());

        let one = Alphabet::new(["a"]);
        let p = Presentation::new(one.clone(), vec![one.parse_word("a a").unwrap()]);
        let t = tietze_reduce(&p);
        assert_eq!(t, p);

        let p = Presentation::new(ab(), vec![w(&a, "a b A B")]);
        let t = tietze_reduce(&p);
        assert_eq!(t, p);
    }

    #[test]
    fn presentation_roundtrip() {
        let text = "alphabet: a b\na b^15 a b^17\na b^-3\n";
        let p = Presentation::parse(text).unwrap();
        assert_eq!(p.to_text(), text);
        let p2 = Presentation::parse(&p.to_text()).unwrap();
        assert_eq!(p, p2);
    }

    #[test]
    fn parse_errors_carry_position() {
        let err = Presentation::parse("alphabet: a\nx y\n").unwrap_err();
        assert_eq!(err.line, 2);
        let err = Presentation::parse("a b\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn cyclic_factor_winds() {
        let a = ab();
        let word = w(&a, "a b");
        assert_eq!(word.cyclic_factor(0, 4), w(&a, "a b a b"));
        assert_eq!(word.cyclic_factor(1, 3), w(&a, "b a b"));
    }

    #[test]
    fn class_rep_is_least_of_class() {
        let a = ab();
        for s in ["a b", "b a", "a a b", "b A A"] {
            let cw = CyclicWord::new(w(&a, s)).unwrap();
            let rep = cw.class_rep();
            // Brute force over the materialized class.
            let class = symmetrized_closure(std::slice::from_ref(cw.word())).unwrap();
            let least = class.iter().map(|c| c.word().clone()).min().unwrap();
            assert_eq!(rep, least, "class of {s}");
        }
    }
}
