//! Hilbert series, presentations as data, and quadratic duality.
//!
//! Dimension counting never enumerates normal words: the leading words of a
//! reduced rewrite system are pairwise factor-free, so the normal words are
//! the words avoiding them as factors, and those are counted by a finite
//! automaton on proper prefixes. Quadratic duals are computed literally: the
//! dual relation space is the kernel of the relation-coefficient matrix on
//! pairs of generators, echelonized so the output presentation is canonical.

use crate::freealg::{parse_poly, Alphabet, GenId, Polynomial, Word};
use crate::groebner::RewriteSystem;
use crate::linalg::SparseMatrix;
use crate::scalar::FieldSpec;
use crate::Error;
use serde::Serialize;
use std::collections::HashMap;
use std::fmt;

/// Dimensions by degree, starting at degree 0.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct SeriesVector(pub Vec<u64>);

impl SeriesVector {
    pub fn dims(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl std::ops::Index<usize> for SeriesVector {
    type Output = u64;
    fn index(&self, d: usize) -> &u64 {
        &self.0[d]
    }
}

impl fmt::Display for SeriesVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// A presentation: an ordered alphabet and a list of homogeneous relations.
pub struct Presentation {
    pub alphabet: Alphabet,
    pub relations: Vec<Polynomial>,
    pub field: FieldSpec,
}

impl Presentation {
    /// Standard text form: a `generators:` line, then one relation per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("generators: {}\n", self.alphabet.labels().join(", ")));
        for r in &self.relations {
            out.push_str(&format!("{}\n", r.display(&self.alphabet)));
        }
        out
    }

    /// Parse the standard text form. The listing order of the `generators:`
    /// line defines the generator order; blank lines and `#` comments are
    /// ignored.
    pub fn parse(text: &str, field: FieldSpec) -> Result<Presentation, Error> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'));
        let head = lines
            .next()
            .ok_or_else(|| Error::Presentation("empty presentation".into()))?;
        let labels_str = head
            .strip_prefix("generators:")
            .ok_or_else(|| Error::Presentation("first line must start with 'generators:'".into()))?;
        // split on commas outside braces, so labels like r{1,2} survive
        let mut labels: Vec<String> = Vec::new();
        let mut depth = 0usize;
        let mut cur = String::new();
        for ch in labels_str.chars() {
            match ch {
                '{' => depth += 1,
                '}' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    labels.push(std::mem::take(&mut cur));
                    continue;
                }
                _ => {}
            }
            cur.push(ch);
        }
        labels.push(cur);
        let labels: Vec<String> = labels
            .into_iter()
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        if labels.is_empty() {
            return Err(Error::Presentation("no generators listed".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if l.contains(['*', '+', '-', ' ', '\t'])
                || l.chars().next().unwrap().is_ascii_digit()
            {
                return Err(Error::Presentation(format!("invalid generator label '{l}'")));
            }
            if !seen.insert(l.clone()) {
                return Err(Error::Presentation(format!("duplicate generator label '{l}'")));
            }
        }
        let alphabet = Alphabet::opaque(labels);
        let mut relations = Vec::new();
        for line in lines {
            relations.push(parse_poly(line, &alphabet, field)?);
        }
        Ok(Presentation { alphabet, relations, field })
    }
}

/// Count words avoiding the given factors, degree by degree. The factors
/// must be pairwise factor-free (true for the leading words of any reduced
/// rewrite system). Counting runs on the automaton whose states are proper
/// prefixes of the forbidden words.
pub fn forbidden_factor_counts(
    leads: &[Word],
    n_gens: usize,
    max_degree: usize,
) -> SeriesVector {
    debug_assert!(
        leads
            .iter()
            .enumerate()
            .all(|(i, u)| leads
                .iter()
                .enumerate()
                .all(|(j, v)| i == j || !u.has_factor(v))),
        "forbidden factors must be pairwise factor-free"
    );
    // states: proper prefixes of leads (the empty prefix is state 0)
    let mut prefix_index: HashMap<Vec<GenId>, usize> = HashMap::new();
    prefix_index.insert(Vec::new(), 0);
    let mut prefixes: Vec<Vec<GenId>> = vec![Vec::new()];
    let mut lead_set: std::collections::HashSet<Vec<GenId>> = Default::default();
    for lead in leads {
        lead_set.insert(lead.letters().to_vec());
        for k in 1..lead.degree() {
            let p = lead.letters()[..k].to_vec();
            if !prefix_index.contains_key(&p) {
                prefix_index.insert(p.clone(), prefixes.len());
                prefixes.push(p);
            }
        }
    }
    let n_states = prefixes.len();
    // transition: longest suffix of (state + letter) that is a prefix or a
    // forbidden word; forbidden means the word just died
    let mut trans: Vec<Vec<Option<usize>>> = vec![vec![None; n_gens]; n_states];
    for (s, prefix) in prefixes.iter().enumerate() {
        for g in 0..n_gens {
            let mut w: Vec<GenId> = prefix.clone();
            w.push(g as GenId);
            let mut dead = false;
            let target = loop {
                if lead_set.contains(&w) {
                    dead = true;
                    break 0;
                }
                if let Some(&t) = prefix_index.get(&w) {
                    break t;
                }
                w.remove(0);
            };
            trans[s][g] = if dead { None } else { Some(target) };
        }
    }
    let mut counts = vec![0u64; n_states];
    counts[0] = 1;
    let mut series = Vec::with_capacity(max_degree + 1);
    series.push(1u64);
    for _ in 1..=max_degree {
        let mut next = vec![0u64; n_states];
        for (s, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for g in 0..n_gens {
                if let Some(t) = trans[s][g] {
                    next[t] = next[t].checked_add(c).expect("series overflow");
                }
            }
        }
        counts = next;
        series.push(counts.iter().try_fold(0u64, |a, &b| a.checked_add(b)).expect("series overflow"));
    }
    SeriesVector(series)
}

/// Hilbert series of the quotient by the homogeneous relations, computed
/// from the completed rewrite system's leading words.
pub fn hilbert_series(pres: &Presentation, max_degree: usize) -> Result<SeriesVector, Error> {
    let rs = RewriteSystem::complete(&pres.relations, max_degree.max(2), pres.field)?;
    let leads: Vec<Word> = rs.leading_words().cloned().collect();
    Ok(forbidden_factor_counts(&leads, pres.alphabet.len(), max_degree))
}

/// The relation-coefficient matrix: one row per relation, one column per
/// ordered pair of generators (column `i * g + j` is the word `x_i x_j`).
pub fn relation_matrix(pres: &Presentation) -> Result<SparseMatrix, Error> {
    let g = pres.alphabet.len();
    let mut triplets = Vec::new();
    for (k, r) in pres.relations.iter().enumerate() {
        if r.homogeneous_degree() != Some(2) {
            return Err(Error::NotQuadratic(k));
        }
        for (w, c) in r.terms() {
            let l = w.letters();
            let col = l[0] as usize * g + l[1] as usize;
            triplets.push((k as u32, col as u32, c.clone()));
        }
    }
    Ok(SparseMatrix::from_triplets(pres.relations.len(), g * g, triplets))
}

/// The quadratic dual: generators are dual to the originals (labels gain a
/// `!`), and the relations are the canonical echelonized basis of the
/// orthogonal complement of the relation span inside pairs of generators,
/// under the plain pairing `<x_i x_j, x_a! x_b!> = [i=a][j=b]`.
pub fn quadratic_dual(pres: &Presentation) -> Result<Presentation, Error> {
    let g = pres.alphabet.len();
    let m = relation_matrix(pres)?;
    let kernel = m.kernel_basis();
    let dual_labels: Vec<String> = pres
        .alphabet
        .labels()
        .iter()
        .map(|l| format!("{l}!"))
        .collect();
    let dual_alph = Alphabet::opaque(dual_labels);
    let relations: Vec<Polynomial> = kernel
        .into_iter()
        .map(|v| {
            Polynomial::from_terms(
                v.into_iter()
                    .map(|(col, c)| {
                        let (i, j) = ((col as usize / g) as GenId, (col as usize % g) as GenId);
                        (Word::from_ids(&[i, j]), c)
                    })
                    .collect(),
            )
        })
        .collect();
    Ok(Presentation { alphabet: dual_alph, relations, field: pres.field })
}

/// Result of the alternating convolution check
/// `sum_{i+j=d} (-1)^j h[i] * h_dual[j] = [d = 0]`.
#[derive(Debug, Serialize)]
pub struct FrobergReport {
    pub max_degree: usize,
    pub convolution: Vec<i128>,
    pub first_failure: Option<usize>,
    pub ok: bool,
}

/// Convolve the two series with alternating signs through `max_degree`.
/// Both series must reach that degree.
pub fn froberg_check(h: &SeriesVector, h_dual: &SeriesVector, max_degree: usize) -> FrobergReport {
    assert!(
        h.len() > max_degree && h_dual.len() > max_degree,
        "series too short for the requested degree"
    );
    let mut convolution = Vec::with_capacity(max_degree + 1);
    let mut first_failure = None;
    for d in 0..=max_degree {
        let mut c: i128 = 0;
        for j in 0..=d {
            let sign = if j % 2 == 0 { 1i128 } else { -1 };
            c += sign * h[d - j] as i128 * h_dual[j] as i128;
        }
        let expected = if d == 0 { 1 } else { 0 };
        if c != expected && first_failure.is_none() {
            first_failure = Some(d);
        }
        convolution.push(c);
    }
    FrobergReport {
        max_degree,
        convolution,
        first_failure,
        ok: first_failure.is_none(),
    }
}

/// Result of checking that a quadratic dual is finite-dimensional with top
/// degree exactly `n`.
#[derive(Debug, Serialize)]
pub struct DualPolyReport {
    pub n: u8,
    pub max_degree: usize,
    pub dual_dims: SeriesVector,
    pub nonzero_through_n: bool,
    pub zero_beyond_n: bool,
    pub ok: bool,
}

/// Verify that the dual of the `Q_n` presentation vanishes above degree `n`
/// and is nonzero through degree `n`. Requires `max_degree >= n + 2` so the
/// vanishing is visible beyond the top degree.
pub fn dual_polynomial_check(
    n: u8,
    max_degree: usize,
    field: FieldSpec,
) -> Result<DualPolyReport, Error> {
    if max_degree < n as usize + 2 {
        return Err(Error::InsufficientTruncation { need: n as usize + 2, have: max_degree });
    }
    let pres = crate::qn::presentation(n, crate::qn::Variant::Q, field)?;
    let dual = quadratic_dual(&pres)?;
    let dims = hilbert_series(&dual, max_degree)?;
    let nonzero_through_n = (0..=n as usize).all(|d| dims[d] > 0);
    let zero_beyond_n = (n as usize + 1..=max_degree).all(|d| dims[d] == 0);
    Ok(DualPolyReport {
        n,
        max_degree,
        dual_dims: dims,
        nonzero_through_n,
        zero_beyond_n,
        ok: nonzero_through_n && zero_beyond_n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: FieldSpec = FieldSpec::Rational;

    fn pres(gens: &[&str], rels: &[&str]) -> Presentation {
        let alphabet = Alphabet::opaque(gens.iter().map(|s| s.to_string()).collect());
        let relations = rels
            .iter()
            .map(|r| parse_poly(r, &alphabet, F).unwrap())
            .collect();
        Presentation { alphabet, relations, field: F }
    }

    #[test]
    fn free_algebra_counts_are_powers() {
        let s = forbidden_factor_counts(&[], 3, 4);
        assert_eq!(s.dims(), &[1, 3, 9, 27, 81]);
    }

    #[test]
    fn avoiding_a_square_gives_fibonacci() {
        // words over {x, y} without the factor xx
        let xx = Word::from_ids(&[0, 0]);
        let s = forbidden_factor_counts(&[xx], 2, 6);
        assert_eq!(s.dims(), &[1, 2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn commutative_polynomial_ring_dimensions() {
        let p = pres(&["x", "y"], &["y*x - x*y"]);
        let s = hilbert_series(&p, 5).unwrap();
        assert_eq!(s.dims(), &[1, 2, 3, 4, 5, 6]);
    }

    #[test]
    fn graded_family_dimensions_are_frozen() {
        let p = crate::qn::presentation(2, crate::qn::Variant::Gr, F).unwrap();
        let s = hilbert_series(&p, 6).unwrap();
        assert_eq!(s.dims(), &[1, 3, 8, 21, 55, 144, 377]);
        // the ungraded algebra has the same dimensions
        let p = crate::qn::presentation(2, crate::qn::Variant::Q, F).unwrap();
        let s = hilbert_series(&p, 6).unwrap();
        assert_eq!(s.dims(), &[1, 3, 8, 21, 55, 144, 377]);
    }

    #[test]
    fn dual_of_commutative_ring_is_exterior() {
        let p = pres(&["x", "y"], &["y*x - x*y"]);
        let d = quadratic_dual(&p).unwrap();
        assert_eq!(d.alphabet.labels(), &["x!".to_string(), "y!".to_string()]);
        // kernel of a 1x4 matrix is 3-dimensional
        assert_eq!(d.relations.len(), 3);
        let s = hilbert_series(&d, 4).unwrap();
        assert_eq!(s.dims(), &[1, 2, 1, 0, 0]);
    }

    #[test]
    fn dual_of_free_algebra_is_trivial_extension() {
        let p = pres(&["x", "y"], &[]);
        let d = quadratic_dual(&p).unwrap();
        assert_eq!(d.relations.len(), 4); // everything is orthogonal to nothing
        let s = hilbert_series(&d, 3).unwrap();
        assert_eq!(s.dims(), &[1, 2, 0, 0]);
    }

    #[test]
    fn double_dual_restores_the_relation_space() {
        for (n, variant) in [(2u8, crate::qn::Variant::Gr), (3, crate::qn::Variant::Q)] {
            let p = crate::qn::presentation(n, variant, F).unwrap();
            let dd = quadratic_dual(&quadratic_dual(&p).unwrap()).unwrap();
            // compare canonical kernels of the relation matrices: equal
            // relation spans have equal (echelonized) orthogonal complements
            let k1 = relation_matrix(&p).unwrap().kernel_basis();
            let k2 = relation_matrix(&dd).unwrap().kernel_basis();
            assert_eq!(k1, k2, "n={n}");
        }
    }

    #[test]
    fn non_quadratic_input_is_rejected() {
        let p = pres(&["x", "y"], &["y*x*x - x*x*y"]);
        assert!(matches!(quadratic_dual(&p), Err(Error::NotQuadratic(0))));
        let p = pres(&["x", "y"], &["x"]);
        assert!(matches!(relation_matrix(&p), Err(Error::NotQuadratic(0))));
    }

    #[test]
    fn alternating_convolution_detects_mismatch() {
        let p = crate::qn::presentation(2, crate::qn::Variant::Gr, F).unwrap();
        let h = hilbert_series(&p, 5).unwrap();
        let hd = hilbert_series(&quadratic_dual(&p).unwrap(), 5).unwrap();
        let rep = froberg_check(&h, &hd, 5);
        assert!(rep.ok, "convolution: {:?}", rep.convolution);
        assert_eq!(rep.convolution, vec![1, 0, 0, 0, 0, 0]);
        // perturb one coefficient: the first failing degree is reported
        let mut bad = hd.clone();
        bad.0[2] += 1;
        let rep = froberg_check(&h, &bad, 5);
        assert!(!rep.ok);
        assert_eq!(rep.first_failure, Some(2));
    }

    #[test]
    fn dual_vanishes_above_n() {
        let rep = dual_polynomial_check(2, 4, F).unwrap();
        assert!(rep.ok);
        assert_eq!(rep.dual_dims.dims(), &[1, 3, 1, 0, 0]);
        assert!(matches!(
            dual_polynomial_check(3, 4, F),
            Err(Error::InsufficientTruncation { need: 5, have: 4 })
        ));
    }

    #[test]
    fn presentation_text_round_trip() {
        let p = pres(&["x", "y"], &["y*x - x*y", "x*x"]);
        let text = p.render();
        assert!(text.starts_with("generators: x, y\n"));
        let q = Presentation::parse(&text, F).unwrap();
        assert_eq!(q.alphabet.labels(), p.alphabet.labels());
        assert_eq!(q.relations, p.relations);
        // listing order defines the generator order
        let r = Presentation::parse("generators: y, x\ny*x", F).unwrap();
        assert_eq!(r.alphabet.label(0), "y");
        // malformed inputs
        assert!(Presentation::parse("", F).is_err());
        assert!(Presentation::parse("gens: x", F).is_err());
        assert!(Presentation::parse("generators: x, x", F).is_err());
        assert!(Presentation::parse("generators: x\nx*q", F).is_err());
    }

    #[test]
    fn subset_presentation_round_trips_as_opaque() {
        let p = crate::qn::presentation(2, crate::qn::Variant::Q, F).unwrap();
        let q = Presentation::parse(&p.render(), F).unwrap();
        assert_eq!(q.alphabet.labels(), p.alphabet.labels());
        assert_eq!(hilbert_series(&q, 4).unwrap(), hilbert_series(&p, 4).unwrap());
    }
}
