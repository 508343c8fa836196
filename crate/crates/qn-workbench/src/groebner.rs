//! Noncommutative Groebner bases for homogeneous two-sided ideals, truncated
//! by degree.
//!
//! A `RewriteSystem` is a reduced, monic set of rewrite rules `lead -> tail`
//! whose leading words are pairwise factor-free. `complete` runs overlap
//! completion (Buchberger-style, driven by suffix/prefix overlaps of leading
//! words) up to a degree bound; because the input is homogeneous, an overlap
//! word of degree above the bound can only ever produce relations above the
//! bound, so the truncated system is a genuine Groebner basis through that
//! degree.
//!
//! `normal_form` uses a fixed, documented strategy — rewrite the greatest
//! reducible word first, at its leftmost reducible position, with the
//! smallest applicable rule index — so results are reproducible even for
//! systems that are not yet confluent.

use crate::freealg::{parse_poly, Alphabet, GenId, Polynomial, Word};
use crate::scalar::{FieldSpec, Scalar};
use crate::util::atomic_write;
use crate::Error;
use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap};
use std::path::Path;

/// One critical-pair position between two leading words `u` and `v`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Overlap {
    /// The last `len` letters of `u` equal the first `len` letters of `v`
    /// (`0 < len`, proper on both sides).
    SuffixPrefix { len: usize },
    /// `v` occurs inside `u` starting at `pos` (with `|v| < |u|`).
    Containment { pos: usize },
}

/// All overlap descriptors of `u` against `v` in that orientation.
pub fn overlaps(u: &Word, v: &Word) -> Vec<Overlap> {
    let (lu, lv) = (u.degree(), v.degree());
    let mut out = Vec::new();
    if lu == 0 || lv == 0 {
        return out;
    }
    for k in 1..lu.min(lv) {
        if u.letters()[lu - k..] == v.letters()[..k] {
            out.push(Overlap::SuffixPrefix { len: k });
        }
    }
    if lv < lu {
        for pos in 0..=lu - lv {
            if u.letters()[pos..pos + lv] == v.letters()[..] {
                out.push(Overlap::Containment { pos });
            }
        }
    }
    out
}

/// The s-polynomial of `f` and `g` at a declared overlap of their leading
/// words: the difference of the two one-step reductions of the overlap word.
/// Both inputs are used in monic form. The result's leading word (when the
/// result is nonzero) is strictly below the overlap word.
pub fn s_polynomial(f: &Polynomial, g: &Polynomial, ov: &Overlap) -> Result<Polynomial, Error> {
    let (u, _) = f.leading().ok_or(Error::InvalidOverlap)?;
    let (v, _) = g.leading().ok_or(Error::InvalidOverlap)?;
    let fm = f.monicized();
    let gm = g.monicized();
    match *ov {
        Overlap::SuffixPrefix { len } => {
            let (lu, lv) = (u.degree(), v.degree());
            if len == 0
                || len >= lu
                || len >= lv
                || u.letters()[lu - len..] != v.letters()[..len]
            {
                return Err(Error::InvalidOverlap);
            }
            let a = u.slice(0, lu - len);
            let b = v.slice(len, lv);
            // overlap word w = a*c*b; reducing by f then g leaves a*g - f*b
            Ok(gm.sandwich(&a, &Word::unit()).sub(&fm.sandwich(&Word::unit(), &b)))
        }
        Overlap::Containment { pos } => {
            let (lu, lv) = (u.degree(), v.degree());
            if lv >= lu || pos + lv > lu || u.letters()[pos..pos + lv] != v.letters()[..] {
                return Err(Error::InvalidOverlap);
            }
            let a = u.slice(0, pos);
            let b = u.slice(pos + lv, lu);
            Ok(gm.sandwich(&a, &b).sub(&fm))
        }
    }
}

/// One recorded rewrite: the reduced polynomial lost `coeff * pre * rule * post`.
#[derive(Clone, Debug)]
pub struct TraceStep {
    pub coeff: Scalar,
    pub pre: Word,
    pub rule: usize,
    pub post: Word,
}

/// A monic, inter-reduced rewrite system, complete (all overlaps resolved)
/// through words of degree `max_degree`.
pub struct RewriteSystem {
    field: FieldSpec,
    max_degree: usize,
    rules: Vec<Polynomial>,
    lead_index: HashMap<Word, usize>,
    lead_lengths: Vec<usize>,
}

impl RewriteSystem {
    /// Overlap-complete the homogeneous `relations` through `max_degree`.
    pub fn complete(
        relations: &[Polynomial],
        max_degree: usize,
        field: FieldSpec,
    ) -> Result<RewriteSystem, Error> {
        if max_degree < 2 {
            return Err(Error::BadDegree { min: 2, got: max_degree });
        }
        for (i, r) in relations.iter().enumerate() {
            if r.is_zero() {
                return Err(Error::ZeroRelation(i));
            }
            let d = r.homogeneous_degree().ok_or(Error::NonHomogeneous(i))?;
            if d == 0 {
                return Err(Error::ConstantRelation(i));
            }
            if d > max_degree {
                return Err(Error::InsufficientTruncation { need: d, have: max_degree });
            }
        }
        let mut state = Completion {
            rules: Vec::new(),
            lead_index: HashMap::new(),
            length_counts: BTreeMap::new(),
            pending: BinaryHeap::new(),
            max_degree,
        };
        for r in relations {
            state.insert_cascading(r.clone());
        }
        while let Some(Reverse(task)) = state.pending.pop() {
            let (Some(&fi), Some(&gi)) = (
                state.lead_index.get(&task.u),
                state.lead_index.get(&task.v),
            ) else {
                continue; // one of the rules was displaced; pair is obsolete
            };
            let ov = Overlap::SuffixPrefix { len: task.k };
            let s = s_polynomial(&state.rules[fi].clone().unwrap(), &state.rules[gi].clone().unwrap(), &ov)
                .expect("enqueued overlap is valid");
            state.insert_cascading(s);
        }
        Ok(state.finish(field))
    }

    pub fn field(&self) -> FieldSpec {
        self.field
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// The rules, monic and sorted by increasing leading word.
    pub fn rules(&self) -> &[Polynomial] {
        &self.rules
    }

    pub fn leading_words(&self) -> impl Iterator<Item = &Word> {
        self.rules.iter().map(|r| r.leading().unwrap().0)
    }

    /// True when no rule's leading word occurs in `w`.
    pub fn is_normal(&self, w: &Word) -> bool {
        self.find_site(w).is_none()
    }

    /// Leftmost reducible position in `w` together with the applicable rule
    /// of smallest index there.
    pub fn find_site(&self, w: &Word) -> Option<(usize, usize)> {
        let n = w.degree();
        for pos in 0..n {
            let mut best: Option<usize> = None;
            for &len in &self.lead_lengths {
                if pos + len > n {
                    break;
                }
                let sub = w.slice(pos, pos + len);
                if let Some(&idx) = self.lead_index.get(&sub) {
                    best = Some(best.map_or(idx, |b: usize| b.min(idx)));
                }
            }
            if let Some(idx) = best {
                return Some((pos, idx));
            }
        }
        None
    }

    /// All normal words of the exact given degree, in increasing word order.
    /// Words are grown letter by letter; a word dies as soon as a leading
    /// word appears as a suffix, so the whole search visits only normal
    /// prefixes. Requires `degree <= max_degree`.
    pub fn normal_words(&self, n_gens: usize, degree: usize) -> Vec<Word> {
        assert!(
            degree <= self.max_degree,
            "normal words of degree {degree} need truncation {degree}, have {}",
            self.max_degree
        );
        let mut out = Vec::new();
        let mut stack: Vec<GenId> = Vec::with_capacity(degree);
        self.normal_words_rec(n_gens, degree, &mut stack, &mut out);
        out
    }

    fn normal_words_rec(
        &self,
        n_gens: usize,
        degree: usize,
        stack: &mut Vec<GenId>,
        out: &mut Vec<Word>,
    ) {
        if stack.len() == degree {
            out.push(Word::from_ids(stack));
            return;
        }
        'next: for g in 0..n_gens as GenId {
            stack.push(g);
            for &len in &self.lead_lengths {
                if len > stack.len() {
                    break;
                }
                let tail = Word::from_ids(&stack[stack.len() - len..]);
                if self.lead_index.contains_key(&tail) {
                    stack.pop();
                    continue 'next;
                }
            }
            self.normal_words_rec(n_gens, degree, stack, out);
            stack.pop();
        }
    }

    /// Fully reduce `p`. Requires `deg p <= max_degree`; beyond the
    /// truncation the system makes no confluence promise.
    pub fn normal_form(&self, p: &Polynomial) -> Polynomial {
        self.reduce(p, None)
    }

    /// Reduce while recording each rewrite, so that
    /// `p = nf + sum coeff * pre * rules[rule] * post` exactly.
    pub fn normal_form_traced(&self, p: &Polynomial) -> (Polynomial, Vec<TraceStep>) {
        let mut trace = Vec::new();
        let nf = self.reduce(p, Some(&mut trace));
        (nf, trace)
    }

    pub fn normal_form_word(&self, w: &Word) -> Polynomial {
        self.normal_form(&Polynomial::monomial(w.clone(), self.field.one()))
    }

    fn reduce(&self, p: &Polynomial, mut trace: Option<&mut Vec<TraceStep>>) -> Polynomial {
        if let Some((w, _)) = p.leading() {
            debug_assert!(
                w.degree() <= self.max_degree,
                "normal form requested beyond the truncation degree"
            );
        }
        let mut work: BTreeMap<Word, Scalar> = BTreeMap::new();
        for (w, c) in p.terms() {
            work.insert(w.clone(), c.clone());
        }
        let mut done: Vec<(Word, Scalar)> = Vec::new();
        while let Some((w, c)) = work.pop_last() {
            debug_assert!(!c.is_zero());
            let Some((pos, ridx)) = self.find_site(&w) else {
                done.push((w, c));
                continue;
            };
            let rule = &self.rules[ridx];
            let lead_len = rule.leading().unwrap().0.degree();
            let pre = w.slice(0, pos);
            let post = w.slice(pos + lead_len, w.degree());
            if let Some(t) = trace.as_deref_mut() {
                t.push(TraceStep {
                    coeff: c.clone(),
                    pre: pre.clone(),
                    rule: ridx,
                    post: post.clone(),
                });
            }
            for (tw, tc) in &rule.terms()[1..] {
                let nw = pre.concat(tw).concat(&post);
                debug_assert!(nw < w, "rewriting must strictly decrease words");
                let nc = c.mul(tc).neg();
                match work.entry(nw) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let merged = e.get().add(&nc);
                        if merged.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = merged;
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(nc);
                    }
                }
            }
        }
        // popped in strictly decreasing order, so this is canonical already
        Polynomial::from_terms(done)
    }

    /// Reduction with randomly chosen sites and rules (for confluence
    /// checking): on a complete system the result must match `normal_form`.
    #[doc(hidden)]
    pub fn normal_form_randomized(&self, p: &Polynomial, seed: u64) -> Polynomial {
        let mut rng = seed | 1;
        let mut step = move |m: usize| -> usize {
            // xorshift64*; plenty for picking test sites
            rng ^= rng << 13;
            rng ^= rng >> 7;
            rng ^= rng << 17;
            (rng.wrapping_mul(0x2545F4914F6CDD1D) >> 33) as usize % m
        };
        let mut acc = p.clone();
        loop {
            let mut sites: Vec<(Word, Scalar, usize, usize)> = Vec::new();
            for (w, c) in acc.terms() {
                let n = w.degree();
                for pos in 0..n {
                    for &len in &self.lead_lengths {
                        if pos + len > n {
                            break;
                        }
                        if let Some(&idx) = self.lead_index.get(&w.slice(pos, pos + len)) {
                            sites.push((w.clone(), c.clone(), pos, idx));
                        }
                    }
                }
            }
            if sites.is_empty() {
                return acc;
            }
            let (w, c, pos, ridx) = sites[step(sites.len())].clone();
            let rule = &self.rules[ridx];
            let lead_len = rule.leading().unwrap().0.degree();
            let pre = w.slice(0, pos);
            let post = w.slice(pos + lead_len, w.degree());
            acc = acc.sub(&rule.sandwich(&pre, &post).scale(&c));
        }
    }

    /// Render to the cache format (plain text, one rule per line).
    pub fn render_cache(&self, header: &CacheHeader, alph: &Alphabet) -> String {
        let mut out = String::new();
        out.push_str("# groebner cache v1\n");
        out.push_str(&format!("n: {}\n", header.n));
        out.push_str(&format!("algebra: {}\n", header.algebra));
        out.push_str(&format!("max_degree: {}\n", self.max_degree));
        out.push_str(&format!("field: {}\n", self.field));
        out.push_str(&format!("rules: {}\n", self.rules.len()));
        for r in &self.rules {
            out.push_str(&format!("{}\n", r.display(alph)));
        }
        out
    }

    pub fn write_cache(
        &self,
        header: &CacheHeader,
        alph: &Alphabet,
        path: &Path,
    ) -> Result<(), Error> {
        atomic_write(path, &self.render_cache(header, alph))?;
        Ok(())
    }

    /// Parse a cache file. The rule set is trusted as-is (it is re-validated
    /// structurally: monic, homogeneous, factor-free leading words).
    pub fn read_cache(path: &Path, alph: &Alphabet) -> Result<(CacheHeader, RewriteSystem), Error> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_cache(&text, alph)
    }

    pub fn parse_cache(text: &str, alph: &Alphabet) -> Result<(CacheHeader, RewriteSystem), Error> {
        let mut lines = text.lines();
        let magic = lines.next().unwrap_or_default();
        if magic.trim() != "# groebner cache v1" {
            return Err(Error::Cache("missing magic line".into()));
        }
        let mut take = |key: &str| -> Result<String, Error> {
            let line = lines
                .next()
                .ok_or_else(|| Error::Cache(format!("missing '{key}' line")))?;
            line.strip_prefix(&format!("{key}: "))
                .map(|s| s.trim().to_string())
                .ok_or_else(|| Error::Cache(format!("malformed '{key}' line")))
        };
        let n: u8 = take("n")?
            .parse()
            .map_err(|_| Error::Cache("bad n".into()))?;
        let algebra = take("algebra")?;
        let max_degree: usize = take("max_degree")?
            .parse()
            .map_err(|_| Error::Cache("bad max_degree".into()))?;
        let field = FieldSpec::parse(&take("field")?).map_err(Error::Cache)?;
        let count: usize = take("rules")?
            .parse()
            .map_err(|_| Error::Cache("bad rule count".into()))?;
        let mut rules = Vec::with_capacity(count);
        for _ in 0..count {
            let line = lines
                .next()
                .ok_or_else(|| Error::Cache("truncated rule list".into()))?;
            rules.push(parse_poly(line, alph, field)?);
        }
        let rs = RewriteSystem::from_reduced_rules(rules, max_degree, field)?;
        Ok((CacheHeader { n, algebra, max_degree, field }, rs))
    }

    /// Assemble a system from rules that are already reduced; validates the
    /// structural invariants instead of re-running completion.
    pub fn from_reduced_rules(
        rules: Vec<Polynomial>,
        max_degree: usize,
        field: FieldSpec,
    ) -> Result<RewriteSystem, Error> {
        let mut rules = rules;
        for (i, r) in rules.iter_mut().enumerate() {
            if r.is_zero() {
                return Err(Error::ZeroRelation(i));
            }
            if r.homogeneous_degree().is_none() {
                return Err(Error::NonHomogeneous(i));
            }
            *r = r.monicized();
        }
        rules.sort_by(|a, b| a.leading().unwrap().0.cmp(b.leading().unwrap().0));
        let mut lead_index = HashMap::new();
        let mut lengths = BTreeSet::new();
        for (i, r) in rules.iter().enumerate() {
            let lead = r.leading().unwrap().0.clone();
            lengths.insert(lead.degree());
            if lead_index.insert(lead, i).is_some() {
                return Err(Error::Cache("duplicate leading word".into()));
            }
        }
        for (i, r) in rules.iter().enumerate() {
            let lead = r.leading().unwrap().0;
            for (j, other) in rules.iter().enumerate() {
                if i != j && lead.has_factor(other.leading().unwrap().0) {
                    return Err(Error::Cache("leading words are not factor-free".into()));
                }
            }
        }
        Ok(RewriteSystem {
            field,
            max_degree,
            rules,
            lead_index,
            lead_lengths: lengths.into_iter().collect(),
        })
    }
}

/// Identifying data carried alongside a cached system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CacheHeader {
    pub n: u8,
    pub algebra: String,
    pub max_degree: usize,
    pub field: FieldSpec,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct Task {
    deg: usize,
    u: Word,
    v: Word,
    k: usize,
}

/// Mutable completion state. Rules live in slots; a displaced slot is `None`
/// and pending tasks that mention its leading word are dropped when popped.
struct Completion {
    rules: Vec<Option<Polynomial>>,
    lead_index: HashMap<Word, usize>,
    length_counts: BTreeMap<usize, usize>,
    pending: BinaryHeap<Reverse<Task>>,
    max_degree: usize,
}

impl Completion {
    /// Reduce `p` against the current rules and install it (monic) if it
    /// does not vanish. Rules whose leading word contains the new leading
    /// word are displaced and re-inserted; every surviving rule gets its
    /// tail re-reduced so the system stays inter-reduced throughout.
    fn insert_cascading(&mut self, p: Polynomial) {
        let mut todo = vec![p];
        while let Some(q) = todo.pop() {
            let nf = self.normal_form_now(&q);
            if nf.is_zero() {
                continue;
            }
            let nf = nf.monicized();
            let lead = nf.leading().unwrap().0.clone();
            debug_assert!(nf.homogeneous_degree().is_some());
            // displace rules whose lead contains the new lead
            let displaced: Vec<usize> = self
                .lead_index
                .iter()
                .filter(|(w, _)| w.has_factor(&lead))
                .map(|(_, &i)| i)
                .collect();
            for i in displaced {
                let old = self.rules[i].take().unwrap();
                let old_lead = old.leading().unwrap().0.clone();
                self.lead_index.remove(&old_lead);
                self.dec_length(old_lead.degree());
                todo.push(old);
            }
            let idx = self.rules.len();
            self.rules.push(Some(nf));
            self.lead_index.insert(lead.clone(), idx);
            *self.length_counts.entry(lead.degree()).or_insert(0) += 1;
            // re-reduce tails that mention the new lead (their own leads are
            // factor-free of it, so they stay put)
            for i in 0..idx {
                let Some(r) = &self.rules[i] else { continue };
                if r.terms()[1..].iter().any(|(w, _)| w.has_factor(&lead)) {
                    let r = self.rules[i].take().unwrap();
                    let (head, tail) = split_leading(&r);
                    let reduced = head.add(&self.normal_form_now(&tail));
                    debug_assert_eq!(
                        reduced.leading().unwrap().0,
                        head.leading().unwrap().0
                    );
                    self.rules[i] = Some(reduced);
                }
            }
            // enqueue new overlap tasks
            let partners: Vec<(Word, usize)> = self
                .lead_index
                .iter()
                .map(|(w, &i)| (w.clone(), i))
                .collect();
            for (w, _) in partners {
                self.enqueue_overlaps(&lead, &w);
                if w != lead {
                    self.enqueue_overlaps(&w, &lead);
                }
            }
        }
    }

    fn enqueue_overlaps(&mut self, u: &Word, v: &Word) {
        let (lu, lv) = (u.degree(), v.degree());
        for k in 1..lu.min(lv) {
            if u.letters()[lu - k..] == v.letters()[..k] {
                let deg = lu + lv - k;
                if deg <= self.max_degree {
                    self.pending.push(Reverse(Task {
                        deg,
                        u: u.clone(),
                        v: v.clone(),
                        k,
                    }));
                }
            }
        }
    }

    fn dec_length(&mut self, len: usize) {
        let c = self.length_counts.get_mut(&len).unwrap();
        *c -= 1;
        if *c == 0 {
            self.length_counts.remove(&len);
        }
    }

    /// Normal form against the current (possibly not yet confluent) rules,
    /// with the same fixed strategy as the finished system.
    fn normal_form_now(&self, p: &Polynomial) -> Polynomial {
        let mut work: BTreeMap<Word, Scalar> = BTreeMap::new();
        for (w, c) in p.terms() {
            work.insert(w.clone(), c.clone());
        }
        let mut done: Vec<(Word, Scalar)> = Vec::new();
        while let Some((w, c)) = work.pop_last() {
            let mut site: Option<(usize, usize)> = None;
            'scan: for pos in 0..w.degree() {
                let mut best: Option<usize> = None;
                for (&len, _) in &self.length_counts {
                    if pos + len > w.degree() {
                        break;
                    }
                    if let Some(&idx) = self.lead_index.get(&w.slice(pos, pos + len)) {
                        best = Some(best.map_or(idx, |b: usize| b.min(idx)));
                    }
                }
                if let Some(idx) = best {
                    site = Some((pos, idx));
                    break 'scan;
                }
            }
            let Some((pos, ridx)) = site else {
                done.push((w, c));
                continue;
            };
            let rule = self.rules[ridx].as_ref().unwrap();
            let lead_len = rule.leading().unwrap().0.degree();
            let pre = w.slice(0, pos);
            let post = w.slice(pos + lead_len, w.degree());
            for (tw, tc) in &rule.terms()[1..] {
                let nw = pre.concat(tw).concat(&post);
                let nc = c.mul(tc).neg();
                match work.entry(nw) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        let merged = e.get().add(&nc);
                        if merged.is_zero() {
                            e.remove();
                        } else {
                            *e.get_mut() = merged;
                        }
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(nc);
                    }
                }
            }
        }
        Polynomial::from_terms(done)
    }

    fn finish(mut self, field: FieldSpec) -> RewriteSystem {
        // final tail normalization to a fixpoint (leads are already
        // pairwise factor-free and stay fixed)
        loop {
            let mut changed = false;
            for i in 0..self.rules.len() {
                let Some(r) = self.rules[i].clone() else { continue };
                let (head, tail) = split_leading(&r);
                let reduced = head.add(&self.normal_form_now(&tail));
                if reduced != r {
                    self.rules[i] = Some(reduced);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let rules: Vec<Polynomial> = self.rules.into_iter().flatten().collect();
        RewriteSystem::from_reduced_rules(rules, self.max_degree, field)
            .expect("completion output satisfies the reduced-system invariants")
    }
}

fn split_leading(p: &Polynomial) -> (Polynomial, Polynomial) {
    let (w, c) = p.leading().unwrap();
    let head = Polynomial::monomial(w.clone(), c.clone());
    (head.clone(), p.sub(&head))
}
