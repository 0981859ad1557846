//! Polynomial-time decision procedures: strong connectivity, completeness
//! (with per-class dispatch), synchronisation, unambiguity, image bounds and
//! the digraph period.
//!
//! Completeness of a general NFA is the one place where no polynomial route
//! exists; that path falls back to a guarded power-set search and refuses
//! large inputs unless forced.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::digraph::strongly_connected_components;
use crate::error::Error;
use crate::nfa::{Nfa, StateSet, Word};
use crate::oracles;

/// True iff the underlying digraph is a single strongly connected component.
pub fn is_strongly_connected(nfa: &Nfa) -> bool {
    strongly_connected_components(&nfa.underlying_digraph()).len() == 1
}

/// Which procedure decided completeness.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CompletenessRoute {
    /// Token elimination on a DFA.
    Dfa,
    /// Pair-killing procedure for 2-image-bounded NFAs.
    TwoImageBounded,
    /// Guarded power-set search.
    PowerSet,
}

impl CompletenessRoute {
    pub fn name(&self) -> &'static str {
        match self {
            CompletenessRoute::Dfa => "dfa-token-elimination",
            CompletenessRoute::TwoImageBounded => "two-image-bounded-pairs",
            CompletenessRoute::PowerSet => "power-set",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Completeness {
    pub complete: bool,
    /// A word killing every state, when incomplete.
    pub mortal_word: Option<Word>,
    pub route: CompletenessRoute,
}

/// Cap for the exponential completeness fallback.
#[derive(Clone, Copy, Debug)]
pub struct ExhaustiveLimit {
    pub max_states: usize,
    pub force: bool,
}

impl Default for ExhaustiveLimit {
    fn default() -> Self {
        ExhaustiveLimit {
            max_states: 22,
            force: false,
        }
    }
}

/// Decides completeness, dispatching on the input class: DFAs get the token
/// elimination check, 2-image-bounded NFAs the pair-killing procedure, and
/// everything else a guarded power-set search.
pub fn is_complete(nfa: &Nfa) -> Result<Completeness, Error> {
    is_complete_with(nfa, &ExhaustiveLimit::default())
}

pub fn is_complete_with(nfa: &Nfa, limit: &ExhaustiveLimit) -> Result<Completeness, Error> {
    if nfa.is_dfa() {
        return Ok(is_complete_dfa(nfa));
    }
    if image_bound_check(nfa, 2)?.bounded {
        return is_complete_2ib_unchecked(nfa);
    }
    let cap = if limit.force { 64 } else { limit.max_states };
    let mortal = oracles::shortest_mortal_word(nfa, cap)?;
    Ok(Completeness {
        complete: mortal.is_none(),
        mortal_word: mortal,
        route: CompletenessRoute::PowerSet,
    })
}

/// A DFA is incomplete iff every state can reach a state with a missing
/// transition; moving the tokens there one by one then kills them all.
fn is_complete_dfa(dfa: &Nfa) -> Completeness {
    let n = dfa.n_states();
    let deficient: Vec<usize> = (0..n)
        .filter(|&q| (0..dfa.n_letters()).any(|x| dfa.successors(q, x).is_empty()))
        .collect();

    let mut reaches = vec![false; n];
    let mut queue: VecDeque<usize> = deficient.iter().copied().collect();
    for &q in &deficient {
        reaches[q] = true;
    }
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (p, _, q) in dfa.transitions() {
        rev[q].push(p);
    }
    while let Some(q) = queue.pop_front() {
        for &p in &rev[q] {
            if !reaches[p] {
                reaches[p] = true;
                queue.push_back(p);
            }
        }
    }

    if !reaches.iter().all(|&r| r) {
        return Completeness {
            complete: true,
            mortal_word: None,
            route: CompletenessRoute::Dfa,
        };
    }

    // Kill the tokens: repeatedly drive the smallest surviving state into a
    // missing transition.
    let mut word = Word::empty();
    let mut alive = StateSet::full(n);
    while !alive.is_empty() {
        let start = alive.iter().next().expect("nonempty");
        let killer = shortest_killing_word(dfa, start).expect("every state reaches a deficiency");
        alive = dfa.apply(&alive, &killer).expect("word is valid");
        word.extend(&killer);
    }
    Completeness {
        complete: false,
        mortal_word: Some(word),
        route: CompletenessRoute::Dfa,
    }
}

/// Shortest word whose application kills `start` in a DFA.
fn shortest_killing_word(dfa: &Nfa, start: usize) -> Option<Word> {
    let missing_letter = |q: usize| (0..dfa.n_letters()).find(|&x| dfa.successors(q, x).is_empty());
    let mut parents: HashMap<usize, (usize, usize)> = HashMap::new();
    let mut seen = vec![false; dfa.n_states()];
    seen[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(q) = queue.pop_front() {
        if let Some(x) = missing_letter(q) {
            let mut letters = vec![x];
            let mut cur = q;
            while cur != start {
                let (prev, step) = parents[&cur];
                letters.push(step);
                cur = prev;
            }
            letters.reverse();
            return Some(Word::new(letters));
        }
        for x in 0..dfa.n_letters() {
            for &p in dfa.successors(q, x) {
                if !seen[p] {
                    seen[p] = true;
                    parents.insert(p, (q, x));
                    queue.push_back(p);
                }
            }
        }
    }
    None
}

/// Completeness of a 2-image-bounded NFA via the pair characterisation: the
/// automaton is incomplete iff every pair of states (including equal pairs)
/// can be killed by a common word. Checks the bound first and rejects inputs
/// that violate it.
pub fn is_complete_2ib(nfa: &Nfa) -> Result<Completeness, Error> {
    let bound = image_bound_check(nfa, 2)?;
    if !bound.bounded {
        let (state, word) = bound
            .violation
            .expect("unbounded check carries a violation");
        return Err(Error::contract(format!(
            "not 2-image-bounded: state {state} reaches an image of size > 2 under {word}"
        )));
    }
    is_complete_2ib_unchecked(nfa)
}

fn is_complete_2ib_unchecked(nfa: &Nfa) -> Result<Completeness, Error> {
    let n = nfa.n_states();
    let mut kill_words: HashMap<(usize, usize), Word> = HashMap::new();
    for p in 0..n {
        for q in p..n {
            match pair_kill_word(nfa, p, q) {
                Some(w) => {
                    kill_words.insert((p, q), w);
                }
                None => {
                    return Ok(Completeness {
                        complete: true,
                        mortal_word: None,
                        route: CompletenessRoute::TwoImageBounded,
                    });
                }
            }
        }
    }

    // All pairs die, so the whole automaton does: kill the surviving image of
    // each state in turn. Images stay at size <= 2 throughout.
    let mut word = Word::empty();
    for q in 0..n {
        let image = nfa
            .apply(&StateSet::singleton(n, q), &word)
            .expect("word is valid");
        let states: Vec<usize> = image.iter().collect();
        let key = match states.as_slice() {
            [] => continue,
            [a] => (*a, *a),
            [a, b] => (*a, *b),
            more => {
                return Err(Error::certification(format!(
                    "image {more:?} exceeds the 2-image bound during witness assembly"
                )))
            }
        };
        word.extend(&kill_words[&key]);
    }
    debug_assert!(nfa
        .apply(&StateSet::full(n), &word)
        .expect("word is valid")
        .is_empty());
    Ok(Completeness {
        complete: false,
        mortal_word: Some(word),
        route: CompletenessRoute::TwoImageBounded,
    })
}

/// Shortest word killing both states of a pair, tracked through the union of
/// the two images (at most four states at any point for 2-image-bounded
/// inputs; both images are empty iff the union is).
fn pair_kill_word(nfa: &Nfa, p: usize, q: usize) -> Option<Word> {
    let start: Vec<usize> = if p == q { vec![p] } else { vec![p, q] };
    if start.is_empty() {
        return Some(Word::empty());
    }
    let step = |set: &[usize], x: usize| -> Vec<usize> {
        let mut out: Vec<usize> = set
            .iter()
            .flat_map(|&v| nfa.successors(v, x).iter().copied())
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    };
    let mut seen: HashSet<Vec<usize>> = HashSet::from([start.clone()]);
    let mut parents: HashMap<Vec<usize>, (Vec<usize>, usize)> = HashMap::new();
    let mut queue = VecDeque::from([start.clone()]);
    while let Some(set) = queue.pop_front() {
        for x in 0..nfa.n_letters() {
            let next = step(&set, x);
            if seen.insert(next.clone()) {
                parents.insert(next.clone(), (set.clone(), x));
                if next.is_empty() {
                    let mut letters = Vec::new();
                    let mut cur: Vec<usize> = Vec::new();
                    while cur != start {
                        let (prev, step) = parents[&cur].clone();
                        letters.push(step);
                        cur = prev;
                    }
                    letters.reverse();
                    return Some(Word::new(letters));
                }
                queue.push_back(next);
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct Synchronisation {
    pub synchronising: bool,
    /// A word mapping every state to one state, when synchronising. Built by
    /// greedy pair merging; existence is what matters, not length.
    pub reset_word: Option<Word>,
}

/// Decides synchronisation of a total DFA through pair reachability: the DFA
/// is synchronising iff every pair of states can be mapped to a single state.
pub fn is_synchronising(dfa: &Nfa) -> Result<Synchronisation, Error> {
    if !dfa.is_total_dfa() {
        return Err(Error::contract("synchronisation is defined for total DFAs"));
    }
    let n = dfa.n_states();
    let succ = |q: usize, x: usize| dfa.successors(q, x)[0];

    // Backward reachability from merged pairs in the pair automaton.
    let pair_id = |p: usize, q: usize| p.min(q) * n + p.max(q);
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); n * n];
    let mut mergeable = vec![false; n * n];
    let mut queue = VecDeque::new();
    for p in 0..n {
        for q in p + 1..n {
            for x in 0..dfa.n_letters() {
                let (p2, q2) = (succ(p, x), succ(q, x));
                if p2 == q2 {
                    if !mergeable[pair_id(p, q)] {
                        mergeable[pair_id(p, q)] = true;
                        queue.push_back(pair_id(p, q));
                    }
                } else {
                    rev[pair_id(p2, q2)].push(pair_id(p, q));
                }
            }
        }
    }
    while let Some(id) = queue.pop_front() {
        for &prev in &rev[id] {
            if !mergeable[prev] {
                mergeable[prev] = true;
                queue.push_back(prev);
            }
        }
    }
    let all_mergeable = (0..n).all(|p| (p + 1..n).all(|q| mergeable[pair_id(p, q)]));
    if !all_mergeable {
        return Ok(Synchronisation {
            synchronising: false,
            reset_word: None,
        });
    }

    // Greedy reset word: repeatedly merge the two smallest surviving states.
    let mut word = Word::empty();
    let mut alive = StateSet::full(n);
    while alive.len() > 1 {
        let (p, q) = {
            let mut it = alive.iter();
            (
                it.next().expect("at least two states"),
                it.next().expect("at least two states"),
            )
        };
        let merger = pair_merge_word(dfa, p, q).expect("all pairs mergeable");
        alive = dfa.apply(&alive, &merger).expect("word is valid");
        word.extend(&merger);
    }
    Ok(Synchronisation {
        synchronising: true,
        reset_word: Some(word),
    })
}

/// Shortest word mapping the pair {p, q} of a total DFA to a single state.
fn pair_merge_word(dfa: &Nfa, p: usize, q: usize) -> Option<Word> {
    let succ = |q: usize, x: usize| dfa.successors(q, x)[0];
    let norm = |a: usize, b: usize| (a.min(b), a.max(b));
    let start = norm(p, q);
    if start.0 == start.1 {
        return Some(Word::empty());
    }
    let mut seen = HashSet::from([start]);
    let mut parents: HashMap<(usize, usize), ((usize, usize), usize)> = HashMap::new();
    let mut queue = VecDeque::from([start]);
    while let Some((a, b)) = queue.pop_front() {
        for x in 0..dfa.n_letters() {
            let next = norm(succ(a, x), succ(b, x));
            if seen.insert(next) {
                parents.insert(next, ((a, b), x));
                if next.0 == next.1 {
                    let mut letters = Vec::new();
                    let mut cur = next;
                    while cur != start {
                        let (prev, step) = parents[&cur];
                        letters.push(step);
                        cur = prev;
                    }
                    letters.reverse();
                    return Some(Word::new(letters));
                }
                queue.push_back(next);
            }
        }
    }
    None
}

/// Two distinct runs over the same word between the same pair of states.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Diamond {
    pub start: usize,
    pub end: usize,
    pub word: Word,
}

/// Searches the product automaton for a diamond: an off-diagonal pair that is
/// reachable from the diagonal and reaches the diagonal again.
pub fn find_diamond(nfa: &Nfa) -> Option<Diamond> {
    let n = nfa.n_states();
    let id = |a: usize, b: usize| a * n + b;

    // Forward labelled BFS from all diagonal pairs.
    let mut fwd_parent: Vec<Option<(usize, usize)>> = vec![None; n * n];
    let mut fwd_seen = vec![false; n * n];
    let mut fwd_source = vec![usize::MAX; n * n];
    let mut queue = VecDeque::new();
    for p in 0..n {
        fwd_seen[id(p, p)] = true;
        fwd_source[id(p, p)] = p;
        queue.push_back(id(p, p));
    }
    while let Some(cur) = queue.pop_front() {
        let (a, b) = (cur / n, cur % n);
        for x in 0..nfa.n_letters() {
            for &a2 in nfa.successors(a, x) {
                for &b2 in nfa.successors(b, x) {
                    let next = id(a2, b2);
                    if !fwd_seen[next] {
                        fwd_seen[next] = true;
                        fwd_source[next] = fwd_source[cur];
                        fwd_parent[next] = Some((cur, x));
                        queue.push_back(next);
                    }
                }
            }
        }
    }

    // Backward labelled BFS towards the diagonal.
    let mut bwd_next: Vec<Option<(usize, usize)>> = vec![None; n * n];
    let mut bwd_seen = vec![false; n * n];
    let mut bwd_target = vec![usize::MAX; n * n];
    let mut queue = VecDeque::new();
    for q in 0..n {
        bwd_seen[id(q, q)] = true;
        bwd_target[id(q, q)] = q;
        queue.push_back(id(q, q));
    }
    // Reverse product edges: (a,b) -x-> (a2,b2) iff a2 in a.x and b2 in b.x.
    let rev = nfa.reverse();
    while let Some(cur) = queue.pop_front() {
        let (a2, b2) = (cur / n, cur % n);
        for x in 0..nfa.n_letters() {
            for &a in rev.successors(a2, x) {
                for &b in rev.successors(b2, x) {
                    let prev = id(a, b);
                    if !bwd_seen[prev] {
                        bwd_seen[prev] = true;
                        bwd_target[prev] = bwd_target[cur];
                        bwd_next[prev] = Some((cur, x));
                        queue.push_back(prev);
                    }
                }
            }
        }
    }

    for a in 0..n {
        for b in 0..n {
            if a == b || !fwd_seen[id(a, b)] || !bwd_seen[id(a, b)] {
                continue;
            }
            let cell = id(a, b);
            let mut letters = Vec::new();
            let mut cur = cell;
            while let Some((prev, x)) = fwd_parent[cur] {
                letters.push(x);
                cur = prev;
            }
            letters.reverse();
            let mut cur = cell;
            while let Some((next, x)) = bwd_next[cur] {
                letters.push(x);
                cur = next;
            }
            return Some(Diamond {
                start: fwd_source[cell],
                end: bwd_target[cell],
                word: Word::new(letters),
            });
        }
    }
    None
}

pub fn is_unambiguous(nfa: &Nfa) -> bool {
    find_diamond(nfa).is_none()
}

#[derive(Clone, Debug)]
pub struct ImageBound {
    pub bounded: bool,
    /// A state and a word taking it to an image larger than the bound.
    pub violation: Option<(usize, Word)>,
}

/// Checks that every image of every single state stays within `k` states,
/// aborting at the first oversized image. When the bound holds, the search
/// visits at most the number of subsets of size at most `k` per start state.
pub fn image_bound_check(nfa: &Nfa, k: usize) -> Result<ImageBound, Error> {
    if k == 0 {
        return Err(Error::input("image bounds start at k = 1"));
    }
    for start in 0..nfa.n_states() {
        let root = vec![start];
        let mut seen: HashSet<Vec<usize>> = HashSet::from([root.clone()]);
        let mut parents: HashMap<Vec<usize>, (Vec<usize>, usize)> = HashMap::new();
        let mut queue = VecDeque::from([root.clone()]);
        while let Some(set) = queue.pop_front() {
            for x in 0..nfa.n_letters() {
                let mut next: Vec<usize> = set
                    .iter()
                    .flat_map(|&q| nfa.successors(q, x).iter().copied())
                    .collect();
                next.sort_unstable();
                next.dedup();
                if seen.insert(next.clone()) {
                    parents.insert(next.clone(), (set.clone(), x));
                    if next.len() > k {
                        let mut letters = Vec::new();
                        let mut cur = next;
                        while cur != root {
                            let (prev, step) = parents[&cur].clone();
                            letters.push(step);
                            cur = prev;
                        }
                        letters.reverse();
                        return Ok(ImageBound {
                            bounded: false,
                            violation: Some((start, Word::new(letters))),
                        });
                    }
                    queue.push_back(next);
                }
            }
        }
    }
    Ok(ImageBound {
        bounded: true,
        violation: None,
    })
}

/// Period of the underlying digraph: the gcd of all cycle lengths, taken per
/// strongly connected component as the gcd of level discrepancies along
/// internal edges. Zero when the digraph is acyclic.
pub fn period(nfa: &Nfa) -> usize {
    let g = nfa.underlying_digraph();
    let adj = g.adjacency();
    let mut overall = 0usize;
    for component in strongly_connected_components(&g) {
        let has_cycle = component.len() > 1 || adj[component[0]].contains(&component[0]);
        if !has_cycle {
            continue;
        }
        let inside: HashSet<usize> = component.iter().copied().collect();
        let mut level: HashMap<usize, usize> = HashMap::new();
        level.insert(component[0], 0);
        let mut queue = VecDeque::from([component[0]]);
        while let Some(u) = queue.pop_front() {
            let lu = level[&u];
            for &v in &adj[u] {
                if inside.contains(&v) && !level.contains_key(&v) {
                    level.insert(v, lu + 1);
                    queue.push_back(v);
                }
            }
        }
        let mut g_comp = 0usize;
        for &u in &component {
            for &v in &adj[u] {
                if inside.contains(&v) {
                    let diff = (level[&u] + 1).abs_diff(level[&v]);
                    g_comp = gcd(g_comp, diff);
                }
            }
        }
        overall = gcd(overall, g_comp);
    }
    overall
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
