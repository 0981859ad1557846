//! Exhaustive reference implementations over the power set of states.
//!
//! Everything here is exponential in the worst case and guarded by a state
//! count limit; the point is to certify the polynomial procedures in
//! [`crate::analysis`] and the ground truths of generated instances at desk
//! scale. Searches are breadth-first so returned witnesses are shortest,
//! which keeps regression diffs stable.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::analysis::Diamond;
use crate::error::Error;
use crate::nfa::{Nfa, Word};

/// Default cap for power-set searches (about a million subsets).
pub const DEFAULT_MAX_STATES: usize = 20;

fn guard(nfa: &Nfa, max_states: usize, operation: &str) -> Result<(), Error> {
    let n = nfa.n_states();
    if n > max_states {
        return Err(Error::resource(format!(
            "{operation} refuses {n} states (limit {max_states})"
        )));
    }
    if n > 64 {
        return Err(Error::resource(format!(
            "{operation} caps at 64 states, got {n}"
        )));
    }
    Ok(())
}

/// Per-letter, per-state successor bitmasks.
fn letter_masks(nfa: &Nfa) -> Vec<Vec<u64>> {
    (0..nfa.n_letters())
        .map(|x| {
            (0..nfa.n_states())
                .map(|q| nfa.successors(q, x).iter().fold(0u64, |m, &p| m | 1 << p))
                .collect()
        })
        .collect()
}

fn step_mask(masks: &[Vec<u64>], letter: usize, mut mask: u64) -> u64 {
    let per_state = &masks[letter];
    let mut out = 0u64;
    while mask != 0 {
        let q = mask.trailing_zeros() as usize;
        mask &= mask - 1;
        out |= per_state[q];
    }
    out
}

fn reconstruct(parents: &HashMap<u64, (u64, usize)>, start: u64, mut end: u64) -> Word {
    let mut letters = Vec::new();
    while end != start {
        let (prev, x) = parents[&end];
        letters.push(x);
        end = prev;
    }
    letters.reverse();
    Word::new(letters)
}

/// BFS from `start` until `stop` holds; returns the shortest word reaching a
/// stopping mask together with that mask.
fn bfs_until(nfa: &Nfa, start: u64, mut stop: impl FnMut(u64) -> bool) -> Option<(Word, u64)> {
    let masks = letter_masks(nfa);
    if stop(start) {
        return Some((Word::empty(), start));
    }
    let mut seen = HashSet::from([start]);
    let mut parents: HashMap<u64, (u64, usize)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    while let Some(mask) = queue.pop_front() {
        for x in 0..nfa.n_letters() {
            let next = step_mask(&masks, x, mask);
            if seen.insert(next) {
                parents.insert(next, (mask, x));
                if stop(next) {
                    return Some((reconstruct(&parents, start, next), next));
                }
                queue.push_back(next);
            }
        }
    }
    None
}

/// Visits every mask reachable from `start`.
fn bfs_all(nfa: &Nfa, start: u64, mut visit: impl FnMut(u64)) {
    let masks = letter_masks(nfa);
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    visit(start);
    while let Some(mask) = queue.pop_front() {
        for x in 0..nfa.n_letters() {
            let next = step_mask(&masks, x, mask);
            if seen.insert(next) {
                visit(next);
                queue.push_back(next);
            }
        }
    }
}

fn full_mask(nfa: &Nfa) -> u64 {
    if nfa.n_states() == 64 {
        u64::MAX
    } else {
        (1u64 << nfa.n_states()) - 1
    }
}

/// Shortest word killing every state, or `None` when the automaton is
/// complete.
pub fn shortest_mortal_word(nfa: &Nfa, max_states: usize) -> Result<Option<Word>, Error> {
    guard(nfa, max_states, "mortal-word search")?;
    Ok(bfs_until(nfa, full_mask(nfa), |m| m == 0).map(|(w, _)| w))
}

/// Shortest word mapping all states of a total DFA to a single state, or
/// `None` when the DFA is not synchronising.
pub fn shortest_reset_word(dfa: &Nfa, max_states: usize) -> Result<Option<Word>, Error> {
    if !dfa.is_total_dfa() {
        return Err(Error::contract("reset-word search needs a total DFA"));
    }
    guard(dfa, max_states, "reset-word search")?;
    Ok(bfs_until(dfa, full_mask(dfa), |m| m.count_ones() == 1).map(|(w, _)| w))
}

/// Minimum image size of the full state set of a total DFA over all words.
pub fn rank(dfa: &Nfa, max_states: usize) -> Result<usize, Error> {
    if !dfa.is_total_dfa() {
        return Err(Error::contract("rank is defined for total DFAs"));
    }
    guard(dfa, max_states, "rank search")?;
    let mut best = dfa.n_states();
    bfs_all(dfa, full_mask(dfa), |m| {
        best = best.min(m.count_ones() as usize)
    });
    Ok(best)
}

/// Largest image of any single state over all reachable words.
pub fn image_size_frontier(nfa: &Nfa, max_states: usize) -> Result<usize, Error> {
    guard(nfa, max_states, "image-size search")?;
    let mut best = 0usize;
    for q in 0..nfa.n_states() {
        bfs_all(nfa, 1u64 << q, |m| best = best.max(m.count_ones() as usize));
    }
    Ok(best)
}

/// Number of labelled paths from `start` to each state under `word`,
/// saturating at `u64::MAX`.
pub fn count_paths(nfa: &Nfa, start: usize, word: &Word) -> Result<Vec<u64>, Error> {
    if start >= nfa.n_states() {
        return Err(Error::input(format!(
            "state {start} outside range 0..{}",
            nfa.n_states()
        )));
    }
    let mut counts = vec![0u64; nfa.n_states()];
    counts[start] = 1;
    for &x in word.letters() {
        if x >= nfa.n_letters() {
            return Err(Error::input(format!(
                "letter index {x} outside letter range 0..{}",
                nfa.n_letters()
            )));
        }
        let mut next = vec![0u64; nfa.n_states()];
        for (q, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &p in nfa.successors(q, x) {
                next[p] = next[p].saturating_add(c);
            }
        }
        counts = next;
    }
    Ok(counts)
}

/// Exhaustive diamond search over all words of length at most `max_len`.
///
/// Tracks path-count matrices with entries capped at two; capping commutes
/// with products as far as the "at least two paths" question is concerned,
/// so deduplicating capped matrices loses nothing. A diamond is exactly an
/// entry of value two.
pub fn diamond_search_bounded(nfa: &Nfa, max_len: usize) -> Option<Diamond> {
    let n = nfa.n_states();
    let letter_mats: Vec<Vec<u8>> = (0..nfa.n_letters())
        .map(|x| {
            let mut m = vec![0u8; n * n];
            for p in 0..n {
                for &q in nfa.successors(p, x) {
                    m[p * n + q] = 1;
                }
            }
            m
        })
        .collect();

    let capped_mul = |a: &[u8], b: &[u8]| -> Vec<u8> {
        let mut out = vec![0u8; n * n];
        for i in 0..n {
            for k in 0..n {
                let aik = a[i * n + k];
                if aik == 0 {
                    continue;
                }
                for j in 0..n {
                    let v = &mut out[i * n + j];
                    *v = (*v + aik * b[k * n + j]).min(2);
                }
            }
        }
        out
    };

    let witness = |m: &[u8], word: Word| -> Option<Diamond> {
        let cell = m.iter().position(|&v| v >= 2)?;
        Some(Diamond {
            start: cell / n,
            end: cell % n,
            word,
        })
    };

    let mut seen: HashSet<Vec<u8>> = HashSet::new();
    let mut queue: VecDeque<(Vec<u8>, Word)> = VecDeque::new();
    for (x, m) in letter_mats.iter().enumerate() {
        if max_len == 0 {
            break;
        }
        if let Some(d) = witness(m, Word::new(vec![x])) {
            return Some(d);
        }
        if seen.insert(m.clone()) {
            queue.push_back((m.clone(), Word::new(vec![x])));
        }
    }
    while let Some((m, word)) = queue.pop_front() {
        if word.len() >= max_len {
            continue;
        }
        for (x, lm) in letter_mats.iter().enumerate() {
            let next = capped_mul(&m, lm);
            let mut next_word = word.clone();
            next_word.push(x);
            if let Some(d) = witness(&next, next_word.clone()) {
                return Some(d);
            }
            if seen.insert(next.clone()) {
                queue.push_back((next, next_word));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nfa::StateSet;

    fn diamond_nfa() -> Nfa {
        Nfa::from_transitions(
            3,
            2,
            [(0, 0, 0), (0, 0, 1), (2, 0, 0), (0, 1, 2), (1, 1, 2)],
        )
        .unwrap()
    }

    /// Three-state rotation plus a letter that merges two states; the
    /// shortest reset word has length (n-1)^2 = 4.
    fn cerny_three() -> Nfa {
        Nfa::from_transitions(
            3,
            2,
            [
                (0, 0, 1),
                (1, 0, 2),
                (2, 0, 0),
                (0, 1, 1),
                (1, 1, 1),
                (2, 1, 2),
            ],
        )
        .unwrap()
    }

    #[test]
    fn mortal_word_of_the_diamond_nfa_is_bb() {
        let w = shortest_mortal_word(&diamond_nfa(), 20).unwrap().unwrap();
        assert_eq!(w.to_string(), "bb");
    }

    #[test]
    fn total_dfa_has_no_mortal_word() {
        let dfa = Nfa::from_transitions(2, 1, [(0, 0, 1), (1, 0, 0)]).unwrap();
        assert_eq!(shortest_mortal_word(&dfa, 20).unwrap(), None);
    }

    #[test]
    fn mortal_word_guard_names_the_limit() {
        let err = shortest_mortal_word(&diamond_nfa(), 2).unwrap_err();
        assert!(matches!(err, Error::Resource(ref m) if m.contains("limit 2")));
    }

    #[test]
    fn merge_dfa_resets_with_one_letter() {
        let dfa =
            Nfa::from_transitions(2, 2, [(0, 0, 0), (1, 0, 0), (0, 1, 1), (1, 1, 1)]).unwrap();
        let w = shortest_reset_word(&dfa, 20).unwrap().unwrap();
        assert_eq!(w.to_string(), "a");
    }

    #[test]
    fn cerny_style_dfa_needs_four_letters() {
        let w = shortest_reset_word(&cerny_three(), 20).unwrap().unwrap();
        assert_eq!(w.len(), 4);
        let nfa = cerny_three();
        let image = nfa.apply(&StateSet::full(3), &w).unwrap();
        assert_eq!(image.len(), 1);
    }

    #[test]
    fn period_two_rotation_never_resets() {
        let dfa = Nfa::from_transitions(2, 1, [(0, 0, 1), (1, 0, 0)]).unwrap();
        assert_eq!(shortest_reset_word(&dfa, 20).unwrap(), None);
        assert_eq!(rank(&dfa, 20).unwrap(), 2);
    }

    #[test]
    fn reset_word_needs_a_total_dfa() {
        assert!(matches!(
            shortest_reset_word(&diamond_nfa(), 20).unwrap_err(),
            Error::Contract(_)
        ));
    }

    #[test]
    fn rank_of_synchronising_dfa_is_one() {
        assert_eq!(rank(&cerny_three(), 20).unwrap(), 1);
    }

    #[test]
    fn rank_of_identity_actions_is_the_state_count() {
        let dfa = Nfa::from_transitions(3, 1, [(0, 0, 0), (1, 0, 1), (2, 0, 2)]).unwrap();
        assert_eq!(rank(&dfa, 20).unwrap(), 3);
    }

    #[test]
    fn diamond_search_finds_the_shortest_diamond() {
        let d = diamond_search_bounded(&diamond_nfa(), 2).unwrap();
        assert_eq!((d.start, d.end, d.word.to_string()), (0, 2, "ab".into()));
    }

    #[test]
    fn diamond_search_is_empty_on_dfas() {
        assert!(diamond_search_bounded(&cerny_three(), 9).is_none());
    }

    #[test]
    fn image_frontier_of_a_dfa_is_one() {
        assert_eq!(image_size_frontier(&cerny_three(), 20).unwrap(), 1);
    }

    #[test]
    fn one_letter_chorded_cycle_grows_images() {
        // Cycle 0 -> 1 -> 2 -> 3 -> 0 with an extra self-loop on 0: the only
        // nondeterministic state, yet images grow past two.
        let nfa = Nfa::from_transitions(
            4,
            1,
            [(0, 0, 0), (0, 0, 1), (1, 0, 2), (2, 0, 3), (3, 0, 0)],
        )
        .unwrap();
        assert!(image_size_frontier(&nfa, 20).unwrap() >= 3);
    }

    #[test]
    fn count_paths_sees_both_diamond_paths() {
        let counts = count_paths(&diamond_nfa(), 0, &Word::parse("ab").unwrap()).unwrap();
        assert_eq!(counts[2], 2);
    }
}
