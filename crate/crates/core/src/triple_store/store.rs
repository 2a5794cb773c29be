use std::collections::{BTreeSet, HashMap};
use std::ops::Bound;

use super::term::Term;

pub type TermId = u32;
type Key = (TermId, TermId, TermId);

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("subject must be an IRI, found {0}")]
    SubjectNotIri(Term),
    #[error("predicate must be an IRI, found {0}")]
    PredicateNotIri(Term),
    #[error("IRI must not be empty")]
    EmptyIri,
}

/// In-memory RDF graph with set semantics and three covering indexes.
///
/// Terms are interned; every triple is stored as `(s, p, o)` in SPO, `(p, o, s)`
/// in POS and `(o, s, p)` in OSP, so any pattern with a bound prefix is a
/// range scan.
#[derive(Debug, Default, Clone)]
pub struct TripleSet {
    terms: Vec<Term>,
    ids: HashMap<Term, TermId>,
    spo: BTreeSet<Key>,
    pos: BTreeSet<Key>,
    osp: BTreeSet<Key>,
}

impl TripleSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a triple; returns `false` when it was already present.
    pub fn insert(&mut self, s: Term, p: Term, o: Term) -> Result<bool, StoreError> {
        match &s {
            Term::Iri(v) if v.is_empty() => return Err(StoreError::EmptyIri),
            Term::Iri(_) => {}
            other => return Err(StoreError::SubjectNotIri(other.clone())),
        }
        match &p {
            Term::Iri(v) if v.is_empty() => return Err(StoreError::EmptyIri),
            Term::Iri(_) => {}
            other => return Err(StoreError::PredicateNotIri(other.clone())),
        }
        if matches!(&o, Term::Iri(v) if v.is_empty()) {
            return Err(StoreError::EmptyIri);
        }
        let (s, p, o) = (self.intern(s), self.intern(p), self.intern(o));
        if !self.spo.insert((s, p, o)) {
            return Ok(false);
        }
        self.pos.insert((p, o, s));
        self.osp.insert((o, s, p));
        Ok(true)
    }

    fn intern(&mut self, term: Term) -> TermId {
        if let Some(&id) = self.ids.get(&term) {
            return id;
        }
        let id = TermId::try_from(self.terms.len()).expect("term table overflow");
        self.terms.push(term.clone());
        self.ids.insert(term, id);
        id
    }

    pub fn len(&self) -> usize {
        self.spo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spo.is_empty()
    }

    pub fn id_of(&self, term: &Term) -> Option<TermId> {
        self.ids.get(term).copied()
    }

    pub fn term(&self, id: TermId) -> &Term {
        &self.terms[id as usize]
    }

    pub fn contains(&self, s: &Term, p: &Term, o: &Term) -> bool {
        match (self.id_of(s), self.id_of(p), self.id_of(o)) {
            (Some(s), Some(p), Some(o)) => self.spo.contains(&(s, p, o)),
            _ => false,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Term, &Term, &Term)> + '_ {
        self.spo
            .iter()
            .map(|&(s, p, o)| (self.term(s), self.term(p), self.term(o)))
    }

    /// All stored triples matching the bound positions, as `(s, p, o)` ids.
    pub fn matching(
        &self,
        s: Option<TermId>,
        p: Option<TermId>,
        o: Option<TermId>,
    ) -> Box<dyn Iterator<Item = Key> + '_> {
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                Box::new(self.spo.contains(&(s, p, o)).then_some((s, p, o)).into_iter())
            }
            (Some(s), Some(p), None) => Box::new(prefix2(&self.spo, s, p)),
            (Some(s), None, None) => Box::new(prefix1(&self.spo, s)),
            (None, Some(p), Some(o)) => Box::new(prefix2(&self.pos, p, o).map(|(p, o, s)| (s, p, o))),
            (None, Some(p), None) => Box::new(prefix1(&self.pos, p).map(|(p, o, s)| (s, p, o))),
            (Some(s), None, Some(o)) => Box::new(prefix2(&self.osp, o, s).map(|(o, s, p)| (s, p, o))),
            (None, None, Some(o)) => Box::new(prefix1(&self.osp, o).map(|(o, s, p)| (s, p, o))),
            (None, None, None) => Box::new(self.spo.iter().copied()),
        }
    }

    /// Number of triples matching the bound positions.
    pub fn count_matching(&self, s: Option<TermId>, p: Option<TermId>, o: Option<TermId>) -> usize {
        self.matching(s, p, o).count()
    }

    /// Distinct objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(&'a self, subject: &Term, predicate: &Term) -> Vec<&'a Term> {
        match (self.id_of(subject), self.id_of(predicate)) {
            (Some(s), Some(p)) => self.matching(Some(s), Some(p), None).map(|(_, _, o)| self.term(o)).collect(),
            _ => Vec::new(),
        }
    }

    /// Distinct subjects of `(?, predicate, object)`.
    pub fn subjects<'a>(&'a self, predicate: &Term, object: &Term) -> Vec<&'a Term> {
        match (self.id_of(predicate), self.id_of(object)) {
            (Some(p), Some(o)) => self.matching(None, Some(p), Some(o)).map(|(s, _, _)| self.term(s)).collect(),
            _ => Vec::new(),
        }
    }

    /// Sanity check used by tests: all three indexes hold the same triples.
    pub fn indexes_consistent(&self) -> bool {
        self.spo.len() == self.pos.len()
            && self.spo.len() == self.osp.len()
            && self.pos.iter().all(|&(p, o, s)| self.spo.contains(&(s, p, o)))
            && self.osp.iter().all(|&(o, s, p)| self.spo.contains(&(s, p, o)))
    }
}

impl PartialEq for TripleSet {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len() && self.iter().all(|(s, p, o)| other.contains(s, p, o))
    }
}

impl Eq for TripleSet {}

fn prefix1(index: &BTreeSet<Key>, a: TermId) -> impl Iterator<Item = Key> + '_ {
    index
        .range((Bound::Included((a, 0, 0)), Bound::Included((a, TermId::MAX, TermId::MAX))))
        .copied()
}

fn prefix2(index: &BTreeSet<Key>, a: TermId, b: TermId) -> impl Iterator<Item = Key> + '_ {
    index
        .range((Bound::Included((a, b, 0)), Bound::Included((a, b, TermId::MAX))))
        .copied()
}
