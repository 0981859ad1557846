//! Variable-length codes through their automaton presentations: first return
//! words of a state, code and prefix-code checks on truncated enumerations,
//! and completeness/synchronisation of a code via the presenting automaton.
//!
//! Codes are handled only through automata plus truncated enumeration; there
//! is no symbolic regular-language representation here. Maximality of prefix
//! codes is only certified structurally (total + strongly connected
//! presenting DFA), since truncation cannot decide the word-level definition.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::collections::VecDeque;

use crate::analysis::{self, Completeness};
use crate::error::Error;
use crate::nfa::{Nfa, StateSet, Word};

/// A finite, length-truncated sample of a code.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FiniteCodeSample {
    words: Vec<Word>,
    length_bound: usize,
    n_letters: usize,
}

impl FiniteCodeSample {
    pub fn new(words: Vec<Word>, length_bound: usize, n_letters: usize) -> Result<Self, Error> {
        let mut sorted: Vec<Word> = words;
        sorted.sort();
        sorted.dedup();
        if let Some(long) = sorted.iter().find(|w| w.len() > length_bound) {
            return Err(Error::input(format!(
                "word {long} exceeds the length bound {length_bound}"
            )));
        }
        if let Some(bad) = sorted
            .iter()
            .flat_map(|w| w.letters())
            .find(|&&x| x >= n_letters)
        {
            return Err(Error::input(format!(
                "letter index {bad} outside letter range 0..{n_letters}"
            )));
        }
        Ok(FiniteCodeSample {
            words: sorted,
            length_bound,
            n_letters,
        })
    }

    pub fn words(&self) -> &[Word] {
        &self.words
    }

    pub fn length_bound(&self) -> usize {
        self.length_bound
    }

    pub fn n_letters(&self) -> usize {
        self.n_letters
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// JSON list of the words written with letter names.
    pub fn to_json(&self) -> String {
        let strings: Vec<String> = self.words.iter().map(|w| w.to_string()).collect();
        let mut text = serde_json::to_string_pretty(&strings).expect("strings serialize");
        text.push('\n');
        text
    }
}

/// Exact enumeration of the first return words of `q` up to `length_bound`:
/// labels of paths that start and end in `q` without visiting `q` in
/// between. For a strongly connected unambiguous automaton this is a
/// truncation of a code.
pub fn first_return_words(
    nfa: &Nfa,
    q: usize,
    length_bound: usize,
) -> Result<FiniteCodeSample, Error> {
    if q >= nfa.n_states() {
        return Err(Error::input(format!(
            "state {q} outside range 0..{}",
            nfa.n_states()
        )));
    }
    if length_bound == 0 {
        return Err(Error::input("the enumeration bound must be at least one"));
    }

    let mut words = Vec::new();
    // Depth-first over word prefixes; the carried set holds the endpoints of
    // q-avoiding paths for the current prefix.
    let mut stack: Vec<(Word, Vec<usize>)> = vec![(Word::empty(), vec![q])];
    while let Some((prefix, ends)) = stack.pop() {
        for x in (0..nfa.n_letters()).rev() {
            let mut image: Vec<usize> = ends
                .iter()
                .flat_map(|&v| nfa.successors(v, x).iter().copied())
                .collect();
            image.sort_unstable();
            image.dedup();
            let mut word = prefix.clone();
            word.push(x);
            if image.binary_search(&q).is_ok() {
                words.push(word.clone());
            }
            let survivors: Vec<usize> = image.into_iter().filter(|&v| v != q).collect();
            if !survivors.is_empty() && word.len() < length_bound {
                stack.push((word, survivors));
            }
        }
    }
    FiniteCodeSample::new(words, length_bound, nfa.n_letters())
}

/// Two distinct factorisations of the same word over a sample.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DoubleFactorisation {
    pub word: Word,
    pub first: Vec<Word>,
    pub second: Vec<Word>,
}

#[derive(Clone, Debug)]
pub struct CodeVerdict {
    pub code: bool,
    pub counterexample: Option<DoubleFactorisation>,
}

/// Checks that no word of length at most `test_bound` has two factorisations
/// over the sample, by dynamic programming over concatenations. A subset of
/// a code is a code, so a truncated sample of a genuine code passes at every
/// bound.
pub fn is_code_up_to(sample: &FiniteCodeSample, test_bound: usize) -> CodeVerdict {
    if sample.words.iter().any(|w| w.is_empty()) {
        // The empty word factorises everything twice over.
        return CodeVerdict {
            code: false,
            counterexample: Some(DoubleFactorisation {
                word: Word::empty(),
                first: vec![],
                second: vec![Word::empty()],
            }),
        };
    }

    // factorisations[w] holds up to two distinct factor sequences for w.
    let mut factorisations: BTreeMap<Word, Vec<Vec<Word>>> =
        BTreeMap::from([(Word::empty(), vec![vec![]])]);
    let mut frontier: VecDeque<Word> = VecDeque::from([Word::empty()]);
    while let Some(prefix) = frontier.pop_front() {
        let seqs = factorisations[&prefix].clone();
        for x in &sample.words {
            let extended = prefix.concat(x);
            if extended.len() > test_bound {
                continue;
            }
            let entry = factorisations.entry(extended.clone()).or_default();
            let fresh = entry.is_empty();
            for seq in &seqs {
                if entry.len() >= 2 {
                    break;
                }
                let mut longer = seq.clone();
                longer.push(x.clone());
                entry.push(longer);
            }
            if entry.len() >= 2 {
                return CodeVerdict {
                    code: false,
                    counterexample: Some(DoubleFactorisation {
                        word: extended,
                        first: entry[0].clone(),
                        second: entry[1].clone(),
                    }),
                };
            }
            if fresh {
                frontier.push_back(extended);
            }
        }
    }
    CodeVerdict {
        code: true,
        counterexample: None,
    }
}

/// True iff no word of the sample is a proper prefix of another.
pub fn is_prefix_code(sample: &FiniteCodeSample) -> bool {
    // After sorting, any prefix pair has an adjacent prefix pair.
    sample.words.windows(2).all(|pair| {
        let (a, b) = (&pair[0], &pair[1]);
        !(a.len() < b.len() && b.letters()[..a.len()] == *a.letters())
    })
}

/// Completeness of the code presented as the first return words of `q`:
/// equivalent to completeness of the presenting automaton, which must be
/// strongly connected and unambiguous for the correspondence to apply.
pub fn code_complete(nfa: &Nfa, q: usize) -> Result<Completeness, Error> {
    if q >= nfa.n_states() {
        return Err(Error::input(format!(
            "state {q} outside range 0..{}",
            nfa.n_states()
        )));
    }
    if !analysis::is_strongly_connected(nfa) {
        return Err(Error::contract(
            "the code correspondence needs a strongly connected automaton",
        ));
    }
    if !analysis::is_unambiguous(nfa) {
        return Err(Error::contract(
            "the code correspondence needs an unambiguous automaton",
        ));
    }
    analysis::is_complete(nfa)
}

/// A word `w` with `Q . w = {q}` in a strongly connected total DFA: a reset
/// word extended by a path into `q`. Every word ending with `w` then
/// factorises over the prefix code presented by `q`. `None` iff the DFA is
/// not synchronising.
pub fn code_synchronizing_word(dfa: &Nfa, q: usize) -> Result<Option<Word>, Error> {
    if q >= dfa.n_states() {
        return Err(Error::input(format!(
            "state {q} outside range 0..{}",
            dfa.n_states()
        )));
    }
    if !dfa.is_total_dfa() {
        return Err(Error::contract("code synchronisation needs a total DFA"));
    }
    if !analysis::is_strongly_connected(dfa) {
        return Err(Error::contract(
            "code synchronisation needs a strongly connected DFA",
        ));
    }
    let sync = analysis::is_synchronising(dfa)?;
    let reset = match sync.reset_word {
        Some(w) => w,
        None => return Ok(None),
    };
    let landing = dfa
        .apply(&StateSet::full(dfa.n_states()), &reset)
        .expect("reset word is valid")
        .iter()
        .next()
        .expect("reset image is a singleton");
    let into_q = dfa_path_word(dfa, landing, q).expect("strongly connected");
    Ok(Some(reset.concat(&into_q)))
}

/// Shortest word labelling a path between two states of a total DFA.
fn dfa_path_word(dfa: &Nfa, from: usize, to: usize) -> Option<Word> {
    let mut parents: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    let mut seen = BTreeSet::from([from]);
    let mut queue = VecDeque::from([from]);
    while let Some(p) = queue.pop_front() {
        if p == to {
            let mut letters = Vec::new();
            let mut cur = p;
            while cur != from {
                let (prev, x) = parents[&cur];
                letters.push(x);
                cur = prev;
            }
            letters.reverse();
            return Some(Word::new(letters));
        }
        for x in 0..dfa.n_letters() {
            let next = dfa.successors(p, x)[0];
            if seen.insert(next) {
                parents.insert(next, (p, x));
                queue.push_back(next);
            }
        }
    }
    None
}
