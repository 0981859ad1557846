//! Semi-automaton core: states, letters, the transition relation, word
//! application, and the JSON/DOT interchange formats.
//!
//! An [`Nfa`] is an edge-labelled directed graph with no initial or final
//! states. DFAs and total DFAs are not separate types; [`Nfa::is_dfa`] and
//! [`Nfa::is_total_dfa`] are refinement predicates that gate the operations
//! that need them. All values are immutable after construction and every
//! operation is a pure function.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::digraph::Digraph;
use crate::error::Error;

/// Display name of a letter index: `a`..`z` for the first 26, `l<k>` beyond.
pub fn letter_name(index: usize) -> String {
    if index < 26 {
        ((b'a' + index as u8) as char).to_string()
    } else {
        format!("l{index}")
    }
}

/// A word over letter indices.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: usize) {
        self.0.push(letter);
    }

    pub fn extend(&mut self, other: &Word) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.clone();
        out.extend(other);
        out
    }

    /// Parses a word written with single-character letter names (`a`..`z`).
    pub fn parse(text: &str) -> Result<Word, Error> {
        let mut letters = Vec::with_capacity(text.len());
        for ch in text.chars() {
            if ch.is_ascii_lowercase() {
                letters.push((ch as u8 - b'a') as usize);
            } else {
                return Err(Error::input(format!(
                    "cannot parse letter {ch:?} in word {text:?}"
                )));
            }
        }
        Ok(Word(letters))
    }
}

impl From<Vec<usize>> for Word {
    fn from(letters: Vec<usize>) -> Self {
        Word(letters)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&x| x < 26) {
            for &x in &self.0 {
                write!(f, "{}", letter_name(x))?;
            }
        } else {
            let names: Vec<String> = self.0.iter().map(|&x| letter_name(x)).collect();
            write!(f, "{}", names.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// A subset of the state range of some automaton, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct StateSet {
    n_states: usize,
    blocks: Vec<u64>,
}

impl StateSet {
    pub fn empty(n_states: usize) -> Self {
        StateSet {
            n_states,
            blocks: vec![0; n_states.div_ceil(64)],
        }
    }

    pub fn full(n_states: usize) -> Self {
        let mut set = StateSet::empty(n_states);
        for q in 0..n_states {
            set.insert(q);
        }
        set
    }

    pub fn singleton(n_states: usize, state: usize) -> Self {
        let mut set = StateSet::empty(n_states);
        set.insert(state);
        set
    }

    pub fn from_states<I: IntoIterator<Item = usize>>(n_states: usize, states: I) -> Self {
        let mut set = StateSet::empty(n_states);
        for q in states {
            set.insert(q);
        }
        set
    }

    /// Size of the state range this set draws from (not the cardinality).
    pub fn capacity(&self) -> usize {
        self.n_states
    }

    pub fn insert(&mut self, state: usize) {
        assert!(
            state < self.n_states,
            "state {state} out of range {}",
            self.n_states
        );
        self.blocks[state / 64] |= 1 << (state % 64);
    }

    pub fn contains(&self, state: usize) -> bool {
        state < self.n_states && self.blocks[state / 64] >> (state % 64) & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn union_with(&mut self, other: &StateSet) {
        assert_eq!(self.n_states, other.n_states);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a |= b;
        }
    }

    pub fn is_subset_of(&self, other: &StateSet) -> bool {
        self.n_states == other.n_states
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a & !b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n_states).filter(move |&q| self.contains(q))
    }
}

impl fmt::Debug for StateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A nondeterministic finite semi-automaton.
///
/// Successor lists are kept duplicate-free and in ascending order, so equal
/// automata compare equal and serialization is canonical.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WireNfa", into = "WireNfa")]
pub struct Nfa {
    n_states: usize,
    n_letters: usize,
    delta: Vec<Vec<Vec<usize>>>,
}

impl Nfa {
    /// An automaton with the empty transition relation.
    pub fn new(n_states: usize, n_letters: usize) -> Result<Nfa, Error> {
        if n_states == 0 {
            return Err(Error::input("an automaton needs at least one state"));
        }
        if n_letters == 0 {
            return Err(Error::input("an automaton needs at least one letter"));
        }
        Ok(Nfa {
            n_states,
            n_letters,
            delta: vec![vec![Vec::new(); n_letters]; n_states],
        })
    }

    pub fn from_transitions<I>(
        n_states: usize,
        n_letters: usize,
        transitions: I,
    ) -> Result<Nfa, Error>
    where
        I: IntoIterator<Item = (usize, usize, usize)>,
    {
        let mut nfa = Nfa::new(n_states, n_letters)?;
        for (p, x, q) in transitions {
            nfa.add_transition(p, x, q)?;
        }
        Ok(nfa)
    }

    pub fn add_transition(&mut self, from: usize, letter: usize, to: usize) -> Result<(), Error> {
        if from >= self.n_states || to >= self.n_states {
            return Err(Error::input(format!(
                "transition ({from}, {letter}, {to}) outside state range 0..{}",
                self.n_states
            )));
        }
        if letter >= self.n_letters {
            return Err(Error::input(format!(
                "transition ({from}, {letter}, {to}) outside letter range 0..{}",
                self.n_letters
            )));
        }
        let succ = &mut self.delta[from][letter];
        if let Err(pos) = succ.binary_search(&to) {
            succ.insert(pos, to);
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_letters(&self) -> usize {
        self.n_letters
    }

    pub fn successors(&self, state: usize, letter: usize) -> &[usize] {
        &self.delta[state][letter]
    }

    pub fn transitions(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.delta.iter().enumerate().flat_map(|(p, per_letter)| {
            per_letter
                .iter()
                .enumerate()
                .flat_map(move |(x, succ)| succ.iter().map(move |&q| (p, x, q)))
        })
    }

    /// Image of a set of states under one letter. No validation.
    pub(crate) fn step(&self, src: &StateSet, letter: usize) -> StateSet {
        let mut out = StateSet::empty(self.n_states);
        for q in src.iter() {
            for &p in &self.delta[q][letter] {
                out.insert(p);
            }
        }
        out
    }

    /// Image of `src` under `word`. The empty image is allowed: a word whose
    /// image of the full state set is empty kills the automaton.
    pub fn apply(&self, src: &StateSet, word: &Word) -> Result<StateSet, Error> {
        if src.capacity() != self.n_states {
            return Err(Error::input(format!(
                "state set over 0..{} applied to automaton with {} states",
                src.capacity(),
                self.n_states
            )));
        }
        for &x in word.letters() {
            if x >= self.n_letters {
                return Err(Error::input(format!(
                    "letter index {x} outside letter range 0..{}",
                    self.n_letters
                )));
            }
        }
        let mut cur = src.clone();
        for &x in word.letters() {
            cur = self.step(&cur, x);
        }
        Ok(cur)
    }

    /// True iff every (state, letter) pair has at most one successor.
    pub fn is_dfa(&self) -> bool {
        self.delta
            .iter()
            .all(|per_letter| per_letter.iter().all(|succ| succ.len() <= 1))
    }

    /// True iff every (state, letter) pair has exactly one successor.
    pub fn is_total_dfa(&self) -> bool {
        self.delta
            .iter()
            .all(|per_letter| per_letter.iter().all(|succ| succ.len() == 1))
    }

    /// The automaton with every transition turned around.
    pub fn reverse(&self) -> Nfa {
        let mut rev = Nfa::new(self.n_states, self.n_letters).expect("dimensions already valid");
        for (p, x, q) in self.transitions() {
            rev.add_transition(q, x, p).expect("indices already valid");
        }
        rev
    }

    /// The digraph obtained by forgetting transition labels. Parallel edges
    /// collapse; multiplicities are a digraph-level concept only.
    pub fn underlying_digraph(&self) -> Digraph {
        let mut edges = BTreeSet::new();
        for (p, _, q) in self.transitions() {
            edges.insert((p, q));
        }
        Digraph::from_edges(self.n_states, edges.into_iter().collect())
            .expect("indices already valid")
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("automaton serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Nfa, Error> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("automaton JSON: {e}")))
    }

    /// DOT rendering. Letter 0 is drawn solid, letter 1 dashed and letter 2
    /// dotted, the usual drawing convention for small alphabets.
    pub fn to_dot(&self, state_names: Option<&[String]>) -> String {
        let mut out = String::from("digraph automaton {\n  rankdir=LR;\n  node [shape=circle];\n");
        for q in 0..self.n_states {
            let label = match state_names {
                Some(names) => names[q].clone(),
                None => q.to_string(),
            };
            out.push_str(&format!("  q{q} [label=\"{label}\"];\n"));
        }
        for (p, x, q) in self.transitions() {
            let style = match x {
                0 => "",
                1 => ", style=dashed",
                2 => ", style=dotted",
                _ => "",
            };
            out.push_str(&format!(
                "  q{p} -> q{q} [label=\"{}\"{style}];\n",
                letter_name(x)
            ));
        }
        out.push_str("}\n");
        out
    }
}

impl fmt::Debug for Nfa {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "Nfa({} states, {} letters",
            self.n_states, self.n_letters
        )?;
        for (p, x, q) in self.transitions() {
            write!(f, ", {p}-{}->{q}", letter_name(x))?;
        }
        write!(f, ")")
    }
}

#[derive(Serialize, Deserialize)]
struct WireNfa {
    states: usize,
    letters: Vec<String>,
    delta: Vec<Vec<Vec<usize>>>,
}

impl From<Nfa> for WireNfa {
    fn from(nfa: Nfa) -> WireNfa {
        WireNfa {
            states: nfa.n_states,
            letters: (0..nfa.n_letters).map(letter_name).collect(),
            delta: nfa.delta,
        }
    }
}

impl TryFrom<WireNfa> for Nfa {
    type Error = Error;

    fn try_from(wire: WireNfa) -> Result<Nfa, Error> {
        let mut nfa = Nfa::new(wire.states, wire.letters.len())?;
        if wire.delta.len() != wire.states {
            return Err(Error::input(format!(
                "delta lists {} states, header says {}",
                wire.delta.len(),
                wire.states
            )));
        }
        for (p, per_letter) in wire.delta.iter().enumerate() {
            if per_letter.len() != wire.letters.len() {
                return Err(Error::input(format!(
                    "state {p} lists {} letters, header says {}",
                    per_letter.len(),
                    wire.letters.len()
                )));
            }
            for (x, succ) in per_letter.iter().enumerate() {
                for &q in succ {
                    nfa.add_transition(p, x, q)?;
                }
            }
        }
        Ok(nfa)
    }
}
