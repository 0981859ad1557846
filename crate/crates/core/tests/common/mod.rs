//! Shared fixtures, seeded generators and test-side oracles. The oracles
//! here are deliberately naive (recursive enumeration) and independent of
//! the library's search code.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use semiautomata::analysis;
use semiautomata::digraph::{st_path_lengths, verify_promises, ConstrainedInstance, Digraph};
use semiautomata::matrices::{Matrix, MatrixSet};
use semiautomata::nfa::Nfa;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// The worked three-state automaton with a diamond on `ab` and the mortal
/// word `bb`.
pub fn diamond_nfa() -> Nfa {
    Nfa::from_transitions(
        3,
        2,
        [(0, 0, 0), (0, 0, 1), (2, 0, 0), (0, 1, 2), (1, 1, 2)],
    )
    .unwrap()
}

/// The two-matrix set whose positivity pattern is [`diamond_nfa`].
pub fn diamond_matrices() -> MatrixSet {
    MatrixSet::new(vec![
        Matrix::from_rows(vec![vec![2, 1, 0], vec![0, 0, 0], vec![4, 0, 0]]).unwrap(),
        Matrix::from_rows(vec![vec![0, 0, 1], vec![0, 0, 7], vec![0, 0, 0]]).unwrap(),
    ])
    .unwrap()
}

/// Three vertices in a path 0 -> 1 -> 2.
pub fn svt_path() -> Digraph {
    Digraph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap()
}

pub fn svt_instance(n: usize) -> ConstrainedInstance {
    ConstrainedInstance::new(svt_path(), 0, 2, n).unwrap()
}

/// Arbitrary digraph: cycles, self-loops and parallel edges allowed,
/// outdegrees up to three so the tree reduction gets exercised.
pub fn random_digraph(rng: &mut ChaCha8Rng, max_vertices: usize) -> Digraph {
    let n = rng.gen_range(2..=max_vertices);
    let mut g = Digraph::new(n).unwrap();
    for u in 0..n {
        let out = rng.gen_range(0..=3);
        for _ in 0..out {
            let v = rng.gen_range(0..n);
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

/// Forward-edge DAG with outdegrees up to two; the last vertex is a sink and
/// some earlier vertices may be dead ends, so reachability varies.
pub fn random_dag(rng: &mut ChaCha8Rng, max_vertices: usize) -> Digraph {
    let n = rng.gen_range(2..=max_vertices);
    let mut g = Digraph::new(n).unwrap();
    for u in 0..n - 1 {
        let out = rng.gen_range(0..=2);
        for _ in 0..out {
            let v = rng.gen_range(u + 1..n);
            g.add_edge(u, v).unwrap();
        }
    }
    g
}

/// A constrained instance with all five promises holding, built by pruning a
/// random DAG to the part that reaches the sink and then reading the length
/// parameter off the achievable path lengths. Roughly half the instances
/// carry a shortcut. Occasionally emits the degenerate single-vertex
/// instance.
pub fn random_constrained_instance(
    rng: &mut ChaCha8Rng,
    max_vertices: usize,
) -> ConstrainedInstance {
    loop {
        if rng.gen_ratio(1, 20) {
            return ConstrainedInstance::new(Digraph::new(1).unwrap(), 0, 0, 1).unwrap();
        }
        let g = random_dag(rng, max_vertices);
        let n = g.n_vertices();
        let (s, t) = (0, n - 1);

        // Keep only vertices with a path to t.
        let mut reaches = vec![false; n];
        reaches[t] = true;
        loop {
            let mut changed = false;
            for &(u, v) in g.edges() {
                if reaches[v] && !reaches[u] {
                    reaches[u] = true;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if !reaches[s] {
            continue;
        }
        let mut new_index = vec![usize::MAX; n];
        let mut kept = 0;
        for v in 0..n {
            if reaches[v] {
                new_index[v] = kept;
                kept += 1;
            }
        }
        let edges: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .filter(|&&(u, v)| reaches[u] && reaches[v])
            .map(|&(u, v)| (new_index[u], new_index[v]))
            .collect();
        let pruned = Digraph::from_edges(kept, edges).unwrap();
        let (s, t) = (new_index[s], new_index[t]);

        let lengths: Vec<usize> = st_path_lengths(&pruned, s, t)
            .unwrap()
            .into_iter()
            .collect();
        let n_param = match lengths.as_slice() {
            [l] => l + rng.gen_range(0..=1),
            [l, m] if *m == l + 1 => *m,
            _ => continue,
        };
        if n_param == 0 {
            continue;
        }
        let inst = ConstrainedInstance::new(pruned, s, t, n_param).unwrap();
        debug_assert!(verify_promises(&inst).all_hold());
        return inst;
    }
}

/// Random NFA with a per-automaton transition density.
pub fn random_nfa(rng: &mut ChaCha8Rng, max_states: usize, max_letters: usize) -> Nfa {
    let n = rng.gen_range(1..=max_states);
    let k = rng.gen_range(1..=max_letters);
    let density = rng.gen_range(0.05..0.5);
    let mut nfa = Nfa::new(n, k).unwrap();
    for q in 0..n {
        for x in 0..k {
            for p in 0..n {
                if rng.gen_bool(density) {
                    nfa.add_transition(q, x, p).unwrap();
                }
            }
        }
    }
    nfa
}

pub fn random_total_dfa(rng: &mut ChaCha8Rng, max_states: usize, max_letters: usize) -> Nfa {
    let n = rng.gen_range(1..=max_states);
    let k = rng.gen_range(1..=max_letters);
    let mut dfa = Nfa::new(n, k).unwrap();
    for q in 0..n {
        for x in 0..k {
            dfa.add_transition(q, x, rng.gen_range(0..n)).unwrap();
        }
    }
    dfa
}

pub fn random_partial_dfa(rng: &mut ChaCha8Rng, max_states: usize, max_letters: usize) -> Nfa {
    let n = rng.gen_range(1..=max_states);
    let k = rng.gen_range(1..=max_letters);
    let mut dfa = Nfa::new(n, k).unwrap();
    for q in 0..n {
        for x in 0..k {
            if rng.gen_bool(0.8) {
                dfa.add_transition(q, x, rng.gen_range(0..n)).unwrap();
            }
        }
    }
    dfa
}

/// Random 2-image-bounded NFA: a partial DFA with a few doubled transitions,
/// kept only if the bound survives the doubling.
pub fn random_2ib_nfa(rng: &mut ChaCha8Rng, max_states: usize, max_letters: usize) -> Nfa {
    loop {
        let mut nfa = random_partial_dfa(rng, max_states, max_letters);
        let extras = rng.gen_range(0..=2);
        for _ in 0..extras {
            let q = rng.gen_range(0..nfa.n_states());
            let x = rng.gen_range(0..nfa.n_letters());
            let p = rng.gen_range(0..nfa.n_states());
            nfa.add_transition(q, x, p).unwrap();
        }
        if analysis::image_bound_check(&nfa, 2).unwrap().bounded {
            return nfa;
        }
    }
}

pub fn random_sc_total_dfa(rng: &mut ChaCha8Rng, max_states: usize, max_letters: usize) -> Nfa {
    loop {
        let dfa = random_total_dfa(rng, max_states, max_letters);
        if analysis::is_strongly_connected(&dfa) {
            return dfa;
        }
    }
}

/// Strongly connected unambiguous NFA: either a strongly connected total DFA
/// or, when the dice cooperate, a sparse nondeterministic automaton that
/// happens to be diamond-free.
pub fn random_sc_unambiguous_nfa(rng: &mut ChaCha8Rng, max_states: usize) -> Nfa {
    for _ in 0..50 {
        if rng.gen_bool(0.5) {
            return random_sc_total_dfa(rng, max_states, 3);
        }
        let nfa = random_nfa(rng, max_states, 2);
        if analysis::is_strongly_connected(&nfa) && analysis::is_unambiguous(&nfa) {
            return nfa;
        }
    }
    random_sc_total_dfa(rng, max_states, 3)
}

/// Plain recursive reachability over the edge list, independent of the
/// library's breadth-first search.
pub fn dfs_reaches(g: &Digraph, from: usize, to: usize) -> bool {
    fn go(g: &Digraph, cur: usize, to: usize, seen: &mut Vec<bool>) -> bool {
        if cur == to {
            return true;
        }
        seen[cur] = true;
        for &(u, v) in g.edges() {
            if u == cur && !seen[v] && go(g, v, to, seen) {
                return true;
            }
        }
        false
    }
    go(g, from, to, &mut vec![false; g.n_vertices()])
}

/// Exhaustive enumeration of (s,t)-path lengths by walking every simple
/// path. Exact on acyclic inputs, which is where it is used.
pub fn enumerate_path_lengths(g: &Digraph, s: usize, t: usize) -> BTreeSet<usize> {
    fn go(
        g: &Digraph,
        cur: usize,
        t: usize,
        len: usize,
        on_path: &mut Vec<bool>,
        out: &mut BTreeSet<usize>,
    ) {
        if cur == t {
            out.insert(len);
            return;
        }
        on_path[cur] = true;
        for &(u, v) in g.edges() {
            if u == cur && !on_path[v] {
                go(g, v, t, len + 1, on_path, out);
            }
        }
        on_path[cur] = false;
    }
    let mut out = BTreeSet::new();
    go(g, s, t, 0, &mut vec![false; g.n_vertices()], &mut out);
    out
}
