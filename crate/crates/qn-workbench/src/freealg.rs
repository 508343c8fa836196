//! Free associative algebras on a finite ordered alphabet.
//!
//! Two kinds of alphabet are supported: the subset alphabet `{ r_A : A a
//! nonempty subset of {1..n} }` with its bespoke generator order (smaller
//! subsets first; among equal sizes, the set whose least differing element is
//! larger comes first), and an opaque alphabet whose order is simply the
//! listing order. Words are compared degree-lexicographically: first by
//! length, then letter by letter. Polynomials are kept in canonical form —
//! terms strictly descending in the word order, no zero coefficients.

use crate::scalar::{FieldSpec, Scalar};
use smallvec::SmallVec;
use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

pub type GenId = u16;

/// A generator `r_A` indexed by a nonempty subset `A` of `{1..n}`, stored as
/// a bitmask (bit `i-1` set iff `i` is in `A`).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct SubsetGen {
    mask: u32,
}

impl SubsetGen {
    pub fn new(mask: u32) -> SubsetGen {
        assert!(mask != 0, "generator subset must be nonempty");
        SubsetGen { mask }
    }

    pub fn from_elems(elems: &[u32]) -> SubsetGen {
        let mut mask = 0u32;
        for &e in elems {
            assert!((1..=32).contains(&e), "element {e} out of range");
            mask |= 1 << (e - 1);
        }
        SubsetGen::new(mask)
    }

    pub fn mask(&self) -> u32 {
        self.mask
    }

    pub fn size(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn contains(&self, e: u32) -> bool {
        e >= 1 && self.mask & (1 << (e - 1)) != 0
    }

    pub fn is_subset_of(&self, other: &SubsetGen) -> bool {
        self.mask & !other.mask == 0
    }

    /// Elements in increasing order.
    pub fn elements(&self) -> Vec<u32> {
        (1..=32).filter(|&e| self.contains(e)).collect()
    }

    pub fn min_element(&self) -> u32 {
        self.mask.trailing_zeros() + 1
    }

    /// `A minus {e}`, or `None` when the difference is empty.
    pub fn remove(&self, e: u32) -> Option<SubsetGen> {
        assert!(self.contains(e), "removing absent element {e}");
        let m = self.mask & !(1 << (e - 1));
        (m != 0).then(|| SubsetGen::new(m))
    }

    /// `A minus B` as a mask operation; `None` when empty.
    pub fn diff_mask(&self, mask: u32) -> Option<SubsetGen> {
        let m = self.mask & !mask;
        (m != 0).then(|| SubsetGen::new(m))
    }
}

impl Ord for SubsetGen {
    /// `r_A < r_B` iff `|A| < |B|`, or the sizes agree and at the first
    /// position where the sorted element lists differ, `A`'s element is the
    /// larger. Equivalently: among equal sizes, the set containing the least
    /// element of the symmetric difference is the greater generator.
    fn cmp(&self, other: &Self) -> Ordering {
        self.size().cmp(&other.size()).then_with(|| {
            let d = self.mask ^ other.mask;
            if d == 0 {
                Ordering::Equal
            } else if self.mask & (d & d.wrapping_neg()) != 0 {
                Ordering::Greater
            } else {
                Ordering::Less
            }
        })
    }
}

impl PartialOrd for SubsetGen {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for SubsetGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let elems: Vec<String> = self.elements().iter().map(|e| e.to_string()).collect();
        write!(f, "r{{{}}}", elems.join(","))
    }
}

/// Parse a generator label of the form `r{1,3}`.
pub fn parse_subset_label(s: &str) -> Result<SubsetGen, ParseError> {
    let inner = s
        .strip_prefix("r{")
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| ParseError::BadGenerator(s.to_string()))?;
    let mut elems = Vec::new();
    for part in inner.split(',') {
        let e: u32 = part
            .trim()
            .parse()
            .map_err(|_| ParseError::BadGenerator(s.to_string()))?;
        if !(1..=16).contains(&e) {
            return Err(ParseError::BadGenerator(s.to_string()));
        }
        elems.push(e);
    }
    if elems.is_empty() {
        return Err(ParseError::BadGenerator(s.to_string()));
    }
    Ok(SubsetGen::from_elems(&elems))
}

struct SubsetData {
    n: u8,
    masks: Vec<u32>,
    by_mask: HashMap<u32, GenId>,
}

/// A finite ordered alphabet. Generator ids are assigned in increasing
/// generator order, so comparing ids compares generators.
pub struct Alphabet {
    labels: Vec<String>,
    weights: Vec<u32>,
    by_label: HashMap<String, GenId>,
    subsets: Option<SubsetData>,
}

impl Alphabet {
    /// The alphabet of all nonempty subsets of `{1..n}`, ordered by the
    /// subset generator order. The weight of `r_A` is `|A|`.
    pub fn subset_gens(n: u8) -> Alphabet {
        assert!((1..=16).contains(&n), "n must be in 1..=16");
        let mut gens: Vec<SubsetGen> = (1u32..(1 << n)).map(SubsetGen::new).collect();
        gens.sort();
        let mut labels = Vec::with_capacity(gens.len());
        let mut weights = Vec::with_capacity(gens.len());
        let mut masks = Vec::with_capacity(gens.len());
        let mut by_label = HashMap::new();
        let mut by_mask = HashMap::new();
        for (i, g) in gens.iter().enumerate() {
            labels.push(g.to_string());
            weights.push(g.size());
            masks.push(g.mask());
            by_label.insert(g.to_string(), i as GenId);
            by_mask.insert(g.mask(), i as GenId);
        }
        Alphabet {
            labels,
            weights,
            by_label,
            subsets: Some(SubsetData { n, masks, by_mask }),
        }
    }

    /// An alphabet of named generators ordered by listing position, each of
    /// weight 1. Labels must be distinct and free of `*`, `+`, `-`, and
    /// whitespace so that rendered polynomials parse back unambiguously.
    pub fn opaque(labels: Vec<String>) -> Alphabet {
        let mut by_label = HashMap::new();
        for (i, l) in labels.iter().enumerate() {
            assert!(
                !l.is_empty()
                    && !l.contains(['*', '+', '-', ' ', '\t', '\n'])
                    && !l.chars().next().unwrap().is_ascii_digit(),
                "invalid generator label '{l}'"
            );
            let prev = by_label.insert(l.clone(), i as GenId);
            assert!(prev.is_none(), "duplicate generator label '{l}'");
        }
        let weights = vec![1; labels.len()];
        Alphabet { labels, weights, by_label, subsets: None }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, id: GenId) -> &str {
        &self.labels[id as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weight_of(&self, id: GenId) -> u32 {
        self.weights[id as usize]
    }

    pub fn id_of_label(&self, label: &str) -> Option<GenId> {
        self.by_label.get(label).copied()
    }

    /// Ambient `n` for a subset alphabet.
    pub fn subset_n(&self) -> Option<u8> {
        self.subsets.as_ref().map(|s| s.n)
    }

    pub fn subset_of(&self, id: GenId) -> Option<SubsetGen> {
        self.subsets
            .as_ref()
            .map(|s| SubsetGen::new(s.masks[id as usize]))
    }

    pub fn id_of_subset(&self, g: SubsetGen) -> Option<GenId> {
        self.subsets.as_ref().and_then(|s| s.by_mask.get(&g.mask()).copied())
    }

    pub fn id_of_mask(&self, mask: u32) -> Option<GenId> {
        self.subsets.as_ref().and_then(|s| s.by_mask.get(&mask).copied())
    }
}

/// A word in the free algebra: a (possibly empty) sequence of generator ids.
/// The empty word is the unit. Ordered degree-lexicographically.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Word {
    letters: SmallVec<[GenId; 8]>,
}

impl Word {
    pub fn unit() -> Word {
        Word { letters: SmallVec::new() }
    }

    pub fn letter(g: GenId) -> Word {
        let mut letters = SmallVec::new();
        letters.push(g);
        Word { letters }
    }

    pub fn from_ids(ids: &[GenId]) -> Word {
        Word { letters: SmallVec::from_slice(ids) }
    }

    pub fn degree(&self) -> usize {
        self.letters.len()
    }

    pub fn is_unit(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[GenId] {
        &self.letters
    }

    pub fn first(&self) -> Option<GenId> {
        self.letters.first().copied()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    pub fn push(&mut self, g: GenId) {
        self.letters.push(g);
    }

    pub fn slice(&self, start: usize, end: usize) -> Word {
        Word::from_ids(&self.letters[start..end])
    }

    /// Total weight with respect to an alphabet's generator weights.
    pub fn weight(&self, alph: &Alphabet) -> u32 {
        self.letters.iter().map(|&g| alph.weight_of(g)).sum()
    }

    /// Leftmost position where `f` occurs as a factor, if any.
    pub fn find_factor(&self, f: &Word) -> Option<usize> {
        let (n, m) = (self.letters.len(), f.letters.len());
        if m == 0 || m > n {
            return (m == 0).then_some(0);
        }
        (0..=n - m).find(|&i| self.letters[i..i + m] == f.letters[..])
    }

    pub fn has_factor(&self, f: &Word) -> bool {
        self.find_factor(f).is_some()
    }

    pub fn display<'a>(&'a self, alph: &'a Alphabet) -> WordDisplay<'a> {
        WordDisplay { word: self, alph }
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.letters
            .len()
            .cmp(&other.letters.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub struct WordDisplay<'a> {
    word: &'a Word,
    alph: &'a Alphabet,
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_unit() {
            return write!(f, "1");
        }
        for (i, &g) in self.word.letters().iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            write!(f, "{}", self.alph.label(g))?;
        }
        Ok(())
    }
}

/// A polynomial in canonical form: terms strictly descending by word, all
/// coefficients nonzero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Polynomial {
    terms: Vec<(Word, Scalar)>,
}

impl Polynomial {
    pub fn zero() -> Polynomial {
        Polynomial { terms: Vec::new() }
    }

    pub fn monomial(w: Word, c: Scalar) -> Polynomial {
        if c.is_zero() {
            Polynomial::zero()
        } else {
            Polynomial { terms: vec![(w, c)] }
        }
    }

    /// Canonicalize an arbitrary term list: sort descending, merge equal
    /// words, drop zero coefficients.
    pub fn from_terms(mut terms: Vec<(Word, Scalar)>) -> Polynomial {
        terms.sort_by(|a, b| b.0.cmp(&a.0));
        let mut out: Vec<(Word, Scalar)> = Vec::with_capacity(terms.len());
        for (w, c) in terms {
            if let Some(last) = out.last_mut() {
                if last.0 == w {
                    last.1 = last.1.add(&c);
                    continue;
                }
            }
            out.push((w, c));
        }
        out.retain(|(_, c)| !c.is_zero());
        Polynomial { terms: out }
    }

    pub fn terms(&self) -> &[(Word, Scalar)] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Leading (greatest) term. `None` for the zero polynomial.
    pub fn leading(&self) -> Option<(&Word, &Scalar)> {
        self.terms.first().map(|(w, c)| (w, c))
    }

    /// Degree shared by all terms when the polynomial is homogeneous;
    /// `None` for the zero polynomial or an inhomogeneous one.
    pub fn homogeneous_degree(&self) -> Option<usize> {
        let (w0, _) = self.terms.first()?;
        let d = w0.degree();
        self.terms
            .iter()
            .all(|(w, _)| w.degree() == d)
            .then_some(d)
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(w, c)| (w.clone(), c.neg())).collect(),
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        // merge two descending term lists
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        while i < self.terms.len() && j < other.terms.len() {
            match self.terms[i].0.cmp(&other.terms[j].0) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(other.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = self.terms[i].1.add(&other.terms[j].1);
                    if !c.is_zero() {
                        out.push((self.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        out.extend_from_slice(&other.terms[j..]);
        Polynomial { terms: out }
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Scalar) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(w, a)| (w.clone(), a.mul(c))).collect(),
        }
    }

    /// Product `pre * self * post` with monomials on both sides. Scaling a
    /// canonical term list by fixed outer words preserves the order, so the
    /// result needs no re-sort.
    pub fn sandwich(&self, pre: &Word, post: &Word) -> Polynomial {
        Polynomial {
            terms: self
                .terms
                .iter()
                .map(|(w, c)| (pre.concat(w).concat(post), c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut terms = Vec::with_capacity(self.terms.len() * other.terms.len());
        for (w1, c1) in &self.terms {
            for (w2, c2) in &other.terms {
                terms.push((w1.concat(w2), c1.mul(c2)));
            }
        }
        Polynomial::from_terms(terms)
    }

    /// Divide by the leading coefficient. Panics on zero.
    pub fn monicized(&self) -> Polynomial {
        let (_, c) = self.leading().expect("monicizing the zero polynomial");
        if c.is_one() {
            return self.clone();
        }
        self.scale(&c.inv())
    }

    /// The terms of maximal weight (the associated-graded image of the
    /// polynomial). `None` for the zero polynomial.
    pub fn weight_top_part(&self, alph: &Alphabet) -> Option<Polynomial> {
        if self.terms.is_empty() {
            return None;
        }
        let top = self.terms.iter().map(|(w, _)| w.weight(alph)).max().unwrap();
        Some(Polynomial {
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| w.weight(alph) == top)
                .cloned()
                .collect(),
        })
    }

    pub fn display<'a>(&'a self, alph: &'a Alphabet) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, alph }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Polynomial,
    alph: &'a Alphabet,
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        for (i, (w, c)) in self.poly.terms().iter().enumerate() {
            let (sign_neg, mag) = match c {
                Scalar::Rat(r) if r.numer().sign() == num_bigint::Sign::Minus => {
                    (true, c.neg())
                }
                _ => (false, c.clone()),
            };
            if i == 0 {
                if sign_neg {
                    write!(f, "-")?;
                }
            } else if sign_neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if w.is_unit() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", w.display(self.alph))?;
            } else {
                write!(f, "{}*{}", mag, w.display(self.alph))?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("unrecognized generator label '{0}'")]
    BadGenerator(String),
    #[error("unknown generator '{0}' for this alphabet")]
    UnknownGenerator(String),
    #[error("malformed coefficient '{0}'")]
    BadCoefficient(String),
    #[error("malformed polynomial near '{0}'")]
    BadSyntax(String),
}

/// Parse a polynomial in the rendered format: terms joined by ` + ` / ` - `,
/// each term an optional coefficient and a `*`-joined word, e.g.
/// `r{1,2}*r{1} - r{1,2}*r{2} + 2*r{1}`.
pub fn parse_poly(s: &str, alph: &Alphabet, field: FieldSpec) -> Result<Polynomial, ParseError> {
    let tokens: Vec<&str> = s.split_whitespace().collect();
    if tokens.is_empty() {
        return Err(ParseError::BadSyntax(s.to_string()));
    }
    let mut terms: Vec<(Word, Scalar)> = Vec::new();
    let mut i = 0;
    let mut negate = false;
    while i < tokens.len() {
        let tok = if i == 0 {
            tokens[0]
        } else {
            match tokens[i] {
                "+" => negate = false,
                "-" => negate = true,
                other => return Err(ParseError::BadSyntax(other.to_string())),
            }
            i += 1;
            if i >= tokens.len() {
                return Err(ParseError::BadSyntax(s.to_string()));
            }
            tokens[i]
        };
        let (word, coeff) = parse_term(tok, alph, field)?;
        terms.push((word, if negate { coeff.neg() } else { coeff }));
        negate = false;
        i += 1;
    }
    Ok(Polynomial::from_terms(terms))
}

fn parse_term(
    tok: &str,
    alph: &Alphabet,
    field: FieldSpec,
) -> Result<(Word, Scalar), ParseError> {
    let (body, neg) = match tok.strip_prefix('-') {
        Some(rest) => (rest, true),
        None => (tok, false),
    };
    if body.is_empty() {
        return Err(ParseError::BadSyntax(tok.to_string()));
    }
    let mut coeff = field.one();
    let mut word = Word::unit();
    for seg in body.split('*') {
        if seg.is_empty() {
            return Err(ParseError::BadSyntax(tok.to_string()));
        }
        if seg.chars().next().unwrap().is_ascii_digit() {
            coeff = coeff.mul(&parse_number(seg, field)?);
        } else {
            let id = alph
                .id_of_label(seg)
                .ok_or_else(|| ParseError::UnknownGenerator(seg.to_string()))?;
            word.push(id);
        }
    }
    if neg {
        coeff = coeff.neg();
    }
    Ok((word, coeff))
}

fn parse_number(seg: &str, field: FieldSpec) -> Result<Scalar, ParseError> {
    let bad = || ParseError::BadCoefficient(seg.to_string());
    match seg.split_once('/') {
        None => {
            let v: i64 = seg.parse().map_err(|_| bad())?;
            Ok(field.integer(v))
        }
        Some((num, den)) => {
            let a: i64 = num.parse().map_err(|_| bad())?;
            let b: i64 = den.parse().map_err(|_| bad())?;
            if b == 0 {
                return Err(bad());
            }
            Ok(field.integer(a).div(&field.integer(b)))
        }
    }
}
