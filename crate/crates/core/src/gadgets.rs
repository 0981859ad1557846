//! Instance factories for the reduction constructions: the layered
//! constrained-reachability reduction, the two introductory DFA gadgets, the
//! three main gadget families (synchronisation, completeness, unambiguity),
//! the binary-alphabet encoding, and a certifier that re-derives every
//! claimed label.
//!
//! All generators are deterministic: identical inputs produce bit-identical
//! serialized outputs. Edge labelling follows one canonical rule throughout:
//! the out-edges of a vertex are sorted by (target, position) and the first
//! slot becomes letter `a`, the second letter `b`.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis;
use crate::digraph::{
    outdegree_reduce, saturate_outdegree_two, verify_promises, ConstrainedInstance, Digraph,
};
use crate::error::Error;
use crate::nfa::{Nfa, StateSet, Word};
use crate::oracles;

/// The gadget families exposed by the generators.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GadgetFamily {
    IntroCompleteness,
    IntroSync,
    Sync,
    Completeness,
    Unambiguity,
}

impl GadgetFamily {
    pub fn name(&self) -> &'static str {
        match self {
            GadgetFamily::IntroCompleteness => "intro-complete",
            GadgetFamily::IntroSync => "intro-sync",
            GadgetFamily::Sync => "sync",
            GadgetFamily::Completeness => "complete",
            GadgetFamily::Unambiguity => "unambiguous",
        }
    }

    pub fn parse(name: &str) -> Result<GadgetFamily, Error> {
        match name {
            "intro-complete" => Ok(GadgetFamily::IntroCompleteness),
            "intro-sync" => Ok(GadgetFamily::IntroSync),
            "sync" => Ok(GadgetFamily::Sync),
            "complete" => Ok(GadgetFamily::Completeness),
            "unambiguous" => Ok(GadgetFamily::Unambiguity),
            other => Err(Error::input(format!("unknown gadget family {other:?}"))),
        }
    }
}

/// The property a gadget's ground truth talks about.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Property {
    Synchronising,
    Complete,
    Unambiguous,
}

impl Property {
    pub fn name(&self) -> &'static str {
        match self {
            Property::Synchronising => "synchronising",
            Property::Complete => "complete",
            Property::Unambiguous => "unambiguous",
        }
    }

    pub fn parse(name: &str) -> Result<Property, Error> {
        match name {
            "synchronising" => Ok(Property::Synchronising),
            "complete" => Ok(Property::Complete),
            "unambiguous" => Ok(Property::Unambiguous),
            other => Err(Error::input(format!("unknown property {other:?}"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GadgetParams {
    pub family: GadgetFamily,
    pub source: Digraph,
    pub s: usize,
    pub t: usize,
    /// Length parameter of the constrained instance; absent for the
    /// introductory families, where the shortcut notion degenerates to plain
    /// reachability.
    pub n: Option<usize>,
}

/// A generated automaton together with its labelled ground truth, the
/// shortcut flag it was derived from, the witness needed to certify the
/// label, and a role tag for every state.
#[derive(Clone, Debug)]
pub struct GadgetInstance {
    pub automaton: Nfa,
    pub property: Property,
    pub ground_truth: bool,
    pub shortcut_exists: bool,
    pub witness: Option<Word>,
    pub state_names: Vec<String>,
    pub params: GadgetParams,
}

impl GadgetInstance {
    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn metadata(&self) -> GadgetMetadata {
        GadgetMetadata {
            property: self.property.name().to_string(),
            ground_truth: self.ground_truth,
            shortcut_exists: self.shortcut_exists,
            witness: self.witness.as_ref().map(|w| w.to_string()),
            state_names: self
                .state_names
                .iter()
                .enumerate()
                .map(|(i, n)| (i, n.clone()))
                .collect(),
            family: self.params.family.name().to_string(),
            params: MetadataParams {
                s: self.params.s,
                t: self.params.t,
                n: self.params.n,
                source: self.params.source.clone(),
            },
        }
    }

    pub fn metadata_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(&self.metadata()).expect("metadata serializes");
        text.push('\n');
        text
    }

    /// Reassembles an instance from an automaton and its metadata sidecar.
    pub fn from_parts(automaton: Nfa, meta: GadgetMetadata) -> Result<GadgetInstance, Error> {
        let family = GadgetFamily::parse(&meta.family)?;
        let property = Property::parse(&meta.property)?;
        let mut state_names = vec![String::new(); automaton.n_states()];
        for (index, name) in &meta.state_names {
            if *index >= automaton.n_states() {
                return Err(Error::input(format!(
                    "state name index {index} outside range 0..{}",
                    automaton.n_states()
                )));
            }
            state_names[*index] = name.clone();
        }
        let witness = meta.witness.as_deref().map(Word::parse).transpose()?;
        Ok(GadgetInstance {
            automaton,
            property,
            ground_truth: meta.ground_truth,
            shortcut_exists: meta.shortcut_exists,
            witness,
            state_names,
            params: GadgetParams {
                family,
                source: meta.params.source,
                s: meta.params.s,
                t: meta.params.t,
                n: meta.params.n,
            },
        })
    }
}

/// Sidecar metadata, serialized next to the automaton file.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GadgetMetadata {
    pub property: String,
    pub ground_truth: bool,
    pub shortcut_exists: bool,
    pub witness: Option<String>,
    pub state_names: BTreeMap<usize, String>,
    pub family: String,
    pub params: MetadataParams,
}

impl GadgetMetadata {
    pub fn from_json(text: &str) -> Result<GadgetMetadata, Error> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("metadata JSON: {e}")))
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MetadataParams {
    pub s: usize,
    pub t: usize,
    pub n: Option<usize>,
    pub source: Digraph,
}

fn check_endpoints(g: &Digraph, s: usize, t: usize) -> Result<(), Error> {
    if s >= g.n_vertices() || t >= g.n_vertices() {
        return Err(Error::input(format!(
            "endpoints ({s}, {t}) outside vertex range 0..{}",
            g.n_vertices()
        )));
    }
    Ok(())
}

fn drop_out_edges(g: &Digraph, vertex: usize) -> Digraph {
    Digraph::from_edges(
        g.n_vertices(),
        g.edges()
            .iter()
            .copied()
            .filter(|&(u, _)| u != vertex)
            .collect(),
    )
    .expect("same vertex range")
}

/// Out-neighbour slots of a vertex under the canonical labelling rule.
fn sorted_slots(g: &Digraph, v: usize) -> Vec<usize> {
    let mut slots: Vec<usize> = g.out_neighbours(v).collect();
    slots.sort_unstable();
    slots
}

/// Reduces plain (s,t)-reachability to constrained reachability by layering:
/// `n` copies of the vertex set plus a fresh target, where entering the
/// target vertex skips one layer. The output satisfies all five promises and
/// has an (s', t')-path of length n-1 iff the input has any (s,t)-path.
///
/// The input may be an arbitrary digraph (cycles are fine; layering removes
/// them); out-edges of `t` are dropped and large outdegrees are tree-reduced
/// first. The endpoints must differ: with `s = t` only the self-advancing
/// track exists and the length-(n-1) equivalence cannot hold.
pub fn layered_reduction(g0: &Digraph, s: usize, t: usize) -> Result<ConstrainedInstance, Error> {
    check_endpoints(g0, s, t)?;
    if s == t {
        return Err(Error::input("layered reduction needs distinct endpoints"));
    }
    let g1 = drop_out_edges(g0, t);
    let (g, _) = outdegree_reduce(&g1, t);
    let n = g.n_vertices();
    let copy = |i: usize, v: usize| (i - 1) * n + v;
    let t_prime = n * n;
    let outdeg: Vec<usize> = (0..n).map(|v| g.outdegree(v)).collect();

    let mut edges = Vec::new();
    for i in 1..n {
        for &(u, v) in g.edges() {
            debug_assert_ne!(u, t, "out-edges of t were dropped");
            if v != t {
                edges.push((copy(i, u), copy(i + 1, v)));
            } else {
                let target = if i + 2 <= n { copy(i + 2, t) } else { t_prime };
                edges.push((copy(i, u), target));
            }
        }
        for (v, &degree) in outdeg.iter().enumerate() {
            if degree == 0 {
                edges.push((copy(i, v), copy(i + 1, v)));
            }
        }
    }
    for u in 0..n {
        edges.push((copy(n, u), t_prime));
    }
    let graph = Digraph::from_edges(n * n + 1, edges)?;
    ConstrainedInstance::new(graph, s, t_prime, n)
}

/// Normalizes an acyclic input for the introductory gadgets: out-edges of
/// `t` are dropped, outdegrees reduced to at most two, and every vertex of
/// indegree zero other than `s` is arranged to have outdegree exactly one
/// (isolated vertices point at `t`, busier ones get a fresh parent). A
/// source `s` of outdegree zero gets a fresh sink child so it survives the
/// sink merge. None of this changes whether `s` reaches `t`.
fn normalize_intro(
    g0: &Digraph,
    s: usize,
    t: usize,
) -> Result<(Digraph, Vec<Option<usize>>), Error> {
    if let Err(cycle) = g0.topological_order() {
        return Err(Error::contract(format!(
            "introductory gadgets need an acyclic input, found cycle {cycle:?}"
        )));
    }
    let g1 = drop_out_edges(g0, t);
    let (g2, mut origin) = outdegree_reduce(&g1, t);

    let mut n = g2.n_vertices();
    let mut edges: Vec<(usize, usize)> = g2.edges().to_vec();
    let mut indeg = vec![0usize; g2.n_vertices()];
    for &(_, v) in g2.edges() {
        indeg[v] += 1;
    }
    for (v, &incoming) in indeg.iter().enumerate() {
        if v == t {
            continue;
        }
        let outdeg = g2.outdegree(v);
        if v == s {
            if outdeg == 0 {
                let sink = n;
                n += 1;
                origin.push(None);
                edges.push((s, sink));
            }
            continue;
        }
        if incoming == 0 {
            match outdeg {
                0 => edges.push((v, t)),
                1 => {}
                _ => {
                    let parent = n;
                    n += 1;
                    origin.push(None);
                    edges.push((parent, v));
                }
            }
        }
    }
    Ok((Digraph::from_edges(n, edges)?, origin))
}

fn vertex_tag(v: usize, s: usize, t: usize) -> String {
    if v == s && v == t {
        "st".to_string()
    } else if v == s {
        "s".to_string()
    } else if v == t {
        "t".to_string()
    } else {
        format!("v{v}")
    }
}

fn intro_gadget(
    g0: &Digraph,
    s: usize,
    t: usize,
    family: GadgetFamily,
) -> Result<GadgetInstance, Error> {
    check_endpoints(g0, s, t)?;
    let reaches = g0.reachable(s)?.contains(&t);
    let (g, origin) = normalize_intro(g0, s, t)?;

    // Merge all sinks other than t into one vertex.
    let sinks: Vec<usize> = (0..g.n_vertices())
        .filter(|&v| v != t && g.outdegree(v) == 0)
        .collect();
    let representative = sinks.first().copied();
    let merged: BTreeSet<usize> = sinks.iter().skip(1).copied().collect();
    let mut new_index = vec![usize::MAX; g.n_vertices()];
    let mut kept = 0usize;
    for (v, slot) in new_index.iter_mut().enumerate() {
        if !merged.contains(&v) {
            *slot = kept;
            kept += 1;
        }
    }
    for &v in &merged {
        new_index[v] = new_index[representative.expect("merged vertices imply a representative")];
    }
    let s_new = new_index[s];
    let t_new = new_index[t];
    let t_prime = representative.map(|r| new_index[r]);

    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(u, v)| (new_index[u], new_index[v]))
        .collect();
    if let Some(tp) = t_prime {
        edges.push((tp, s_new));
    }
    let mut indeg = vec![0usize; kept];
    for &(_, v) in &edges {
        indeg[v] += 1;
    }
    let sources: Vec<usize> = indeg
        .iter()
        .enumerate()
        .filter(|&(v, &d)| d == 0 && v != s_new && v != t_new)
        .map(|(v, _)| v)
        .collect();
    edges.extend(sources.into_iter().map(|v| (v, t_new)));
    let merged_graph = Digraph::from_edges(kept, edges)?;

    let total = family == GadgetFamily::IntroSync;
    let mut nfa = Nfa::new(kept, 2)?;
    for v in 0..kept {
        if v == t_new {
            continue;
        }
        let slots = sorted_slots(&merged_graph, v);
        match slots.as_slice() {
            [only] => {
                nfa.add_transition(v, 0, *only)?;
                nfa.add_transition(v, 1, *only)?;
            }
            [first, second] => {
                nfa.add_transition(v, 0, *first)?;
                nfa.add_transition(v, 1, *second)?;
            }
            other => {
                return Err(Error::certification(format!(
                    "vertex {v} ended with {} out-edges after normalization",
                    other.len()
                )))
            }
        }
    }
    if total {
        nfa.add_transition(t_new, 0, t_new)?;
        nfa.add_transition(t_new, 1, t_new)?;
    }

    let mut state_names = vec![String::new(); kept];
    for v in 0..g.n_vertices() {
        if merged.contains(&v) {
            continue;
        }
        let idx = new_index[v];
        state_names[idx] = if Some(v) == representative {
            "t'".to_string()
        } else {
            match origin[v] {
                Some(k) => vertex_tag(k, s, t),
                None => format!("u{idx}"),
            }
        };
    }

    let (property, ground_truth) = match family {
        GadgetFamily::IntroCompleteness => (Property::Complete, !reaches),
        GadgetFamily::IntroSync => (Property::Synchronising, reaches),
        _ => unreachable!("intro builder only serves the introductory families"),
    };
    let witness = match family {
        GadgetFamily::IntroCompleteness if !ground_truth => {
            analysis::is_complete(&nfa)?.mortal_word
        }
        GadgetFamily::IntroSync if ground_truth => analysis::is_synchronising(&nfa)?.reset_word,
        _ => None,
    };

    Ok(GadgetInstance {
        automaton: nfa,
        property,
        ground_truth,
        shortcut_exists: reaches,
        witness,
        state_names,
        params: GadgetParams {
            family,
            source: g0.clone(),
            s,
            t,
            n: None,
        },
    })
}

/// Binary partial DFA that is complete iff the input has no (s,t)-path:
/// sinks other than `t` merge into `t'`, `t'` loops back to `s`, sources
/// other than `s` point at `t`, and the only place a run can die is `t`.
pub fn intro_dfa_completeness_gadget(
    g: &Digraph,
    s: usize,
    t: usize,
) -> Result<GadgetInstance, Error> {
    intro_gadget(g, s, t, GadgetFamily::IntroCompleteness)
}

/// The same construction made total by self-loops on `t`; synchronising iff
/// the input has an (s,t)-path.
pub fn intro_sync_gadget(g: &Digraph, s: usize, t: usize) -> Result<GadgetInstance, Error> {
    intro_gadget(g, s, t, GadgetFamily::IntroSync)
}

fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// Children of internal node `m` in the canonical heap-shaped tree of depth
/// `d`: either two internal nodes or two leaf slots.
enum TreeChild {
    Internal(usize),
    LeafSlot(usize),
}

fn tree_children(d: usize, m: usize) -> (TreeChild, TreeChild) {
    let first_leaf_parent = (1usize << (d - 1)) - 1;
    if m < first_leaf_parent {
        (
            TreeChild::Internal(2 * m + 1),
            TreeChild::Internal(2 * m + 2),
        )
    } else {
        let slot = 2 * (m - first_leaf_parent);
        (TreeChild::LeafSlot(slot), TreeChild::LeafSlot(slot + 1))
    }
}

fn require_promises(inst: &ConstrainedInstance) -> Result<(), Error> {
    let report = verify_promises(inst);
    if !report.all_hold() {
        return Err(Error::contract(format!(
            "constrained instance violates promises: {:?}",
            report.failures()
        )));
    }
    Ok(())
}

/// A path from s to t with exactly `len` edges, following the canonical slot
/// order; `None` when no such length is achievable.
fn exact_length_path(g: &Digraph, s: usize, t: usize, len: usize) -> Option<Vec<usize>> {
    let order = g.topological_order().ok()?;
    let mut to_target: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.n_vertices()];
    to_target[t].insert(0);
    for &u in order.iter().rev() {
        let mut mine = BTreeSet::new();
        for v in g.out_neighbours(u) {
            for &l in &to_target[v] {
                mine.insert(l + 1);
            }
        }
        to_target[u].extend(mine);
    }
    if !to_target[s].contains(&len) {
        return None;
    }
    let mut path = vec![s];
    let mut cur = s;
    let mut remaining = len;
    while remaining > 0 {
        let next = sorted_slots(g, cur)
            .into_iter()
            .find(|&v| to_target[v].contains(&(remaining - 1)))
            .expect("a continuation exists by the length sets");
        path.push(next);
        cur = next;
        remaining -= 1;
    }
    Some(path)
}

/// Letters labelling `path` under the canonical slot rule of `g`.
fn path_label(g: &Digraph, path: &[usize]) -> Word {
    let mut word = Word::empty();
    for pair in path.windows(2) {
        let slots = sorted_slots(g, pair[0]);
        let letter = if slots[0] == pair[1] { 0 } else { 1 };
        word.push(letter);
    }
    word
}

/// The synchronisation gadget: two mirror-image halves, each carrying a copy
/// of the instance graph fed by a deterministic binary tree, plus a timer of
/// length `n` in the second half. The output is a binary total DFA that is
/// synchronising iff the instance has a shortcut, and its rank is at most
/// two either way.
pub fn sync_gadget(inst: &ConstrainedInstance) -> Result<GadgetInstance, Error> {
    require_promises(inst)?;
    let g = saturate_outdegree_two(&inst.graph, inst.t)?;
    let nv = g.n_vertices();
    let n = inst.n;
    let depth = ceil_log2(nv);
    let internal = (1usize << depth) - 1;

    let r1 = 0;
    let q1 = 1;
    let r2 = 2;
    let q2 = 3;
    let v_base = [4, 4 + nv];
    let tree_base = [4 + 2 * nv, 4 + 2 * nv + internal];
    let p_base = 4 + 2 * nv + 2 * internal;
    let v_state = |copy: usize, v: usize| v_base[copy] + v;

    let mut nfa = Nfa::new(p_base + n, 2)?;
    nfa.add_transition(r1, 0, r2)?;
    nfa.add_transition(r2, 0, r1)?;
    nfa.add_transition(r1, 1, q1)?;
    nfa.add_transition(r2, 1, q2)?;
    nfa.add_transition(q1, 0, v_state(0, inst.s))?;
    nfa.add_transition(q2, 0, p_base)?;
    for half in 0..2 {
        let q = [q1, q2][half];
        let root = if internal > 0 {
            tree_base[half]
        } else {
            v_state(half, 0)
        };
        nfa.add_transition(q, 1, root)?;
        for m in 0..internal {
            let (left, right) = tree_children(depth, m);
            let resolve = |child: TreeChild| match child {
                TreeChild::Internal(c) => tree_base[half] + c,
                TreeChild::LeafSlot(slot) => v_state(half, slot % nv),
            };
            nfa.add_transition(tree_base[half] + m, 0, resolve(left))?;
            nfa.add_transition(tree_base[half] + m, 1, resolve(right))?;
        }
        for v in 0..nv {
            let state = v_state(half, v);
            if v == inst.t {
                let r = [r1, r2][half];
                nfa.add_transition(state, 0, r)?;
                nfa.add_transition(state, 1, r)?;
            } else {
                let slots = sorted_slots(&g, v);
                nfa.add_transition(state, 0, v_state(half, slots[0]))?;
                nfa.add_transition(state, 1, v_state(half, slots[1]))?;
            }
        }
    }
    for i in 0..n {
        let cur = p_base + i;
        let next = if i + 1 < n {
            cur + 1
        } else {
            v_state(1, inst.t)
        };
        nfa.add_transition(cur, 0, next)?;
        nfa.add_transition(cur, 1, next)?;
    }
    debug_assert!(nfa.is_total_dfa());

    let shortcut = inst.shortcut_exists()?;
    let witness = if shortcut {
        let path = exact_length_path(&g, inst.s, inst.t, n - 1).expect("shortcut length present");
        let mut w = Word::new(vec![1, 0]);
        w.extend(&path_label(&g, &path));
        w.push(0);
        w.push(0);
        Some(w)
    } else {
        None
    };

    let mut names = vec!["r1".into(), "q1".into(), "r2".into(), "q2".into()];
    for half in 1..=2 {
        for v in 0..nv {
            names.push(format!("V{half}:{}", vertex_tag(v, inst.s, inst.t)));
        }
    }
    for half in 1..=2 {
        for m in 0..internal {
            names.push(format!("T{half}:n{m}"));
        }
    }
    for i in 1..=n {
        names.push(format!("p{i}"));
    }

    Ok(GadgetInstance {
        automaton: nfa,
        property: Property::Synchronising,
        ground_truth: shortcut,
        shortcut_exists: shortcut,
        witness,
        state_names: names,
        params: GadgetParams {
            family: GadgetFamily::Sync,
            source: inst.graph.clone(),
            s: inst.s,
            t: inst.t,
            n: Some(n),
        },
    })
}

/// The completeness gadget: two identically labelled copies of the instance
/// graph (the target of the second copy deleted with all incoming
/// transitions), a deterministic tree whose leaves fan out into both copies,
/// a timer of length n+1, and a letter `c` that funnels everything back to
/// the tree root. The ternary NFA is strongly connected, unambiguous and
/// 2-image-bounded, and it is complete iff the instance has no shortcut; on
/// a shortcut, `c w c c w c` with `w` the shortcut label is a mortal word.
pub fn completeness_gadget(inst: &ConstrainedInstance) -> Result<GadgetInstance, Error> {
    require_promises(inst)?;
    let g = saturate_outdegree_two(&inst.graph, inst.t)?;
    let nv = g.n_vertices();
    let n = inst.n;
    let depth = ceil_log2(nv);
    let internal = (1usize << depth) - 1;

    let v1 = |v: usize| v;
    let v2_base = nv;
    let v2 = |v: usize| {
        debug_assert_ne!(v, inst.t, "the second target copy is deleted");
        if v < inst.t {
            v2_base + v
        } else {
            v2_base + v - 1
        }
    };
    let tree_base = 2 * nv - 1;
    let leaf_base = tree_base + internal;
    let p_base = leaf_base + nv;
    let f = if internal > 0 { tree_base } else { leaf_base };

    let mut nfa = Nfa::new(p_base + n + 1, 3)?;
    for v in 0..nv {
        if v == inst.t {
            nfa.add_transition(v1(v), 0, v1(v))?;
            nfa.add_transition(v1(v), 1, v1(v))?;
            continue;
        }
        let slots = sorted_slots(&g, v);
        for (letter, &target) in slots.iter().enumerate() {
            nfa.add_transition(v1(v), letter, v1(target))?;
            if target != inst.t {
                nfa.add_transition(v2(v), letter, v2(target))?;
            }
        }
    }
    for m in 0..internal {
        let (left, right) = tree_children(depth, m);
        let resolve = |child: TreeChild| match child {
            TreeChild::Internal(c) => tree_base + c,
            TreeChild::LeafSlot(slot) => leaf_base + slot % nv,
        };
        nfa.add_transition(tree_base + m, 0, resolve(left))?;
        nfa.add_transition(tree_base + m, 1, resolve(right))?;
    }
    for v in 0..nv {
        let leaf = leaf_base + v;
        for letter in 0..2 {
            nfa.add_transition(leaf, letter, v1(v))?;
            if v != inst.t {
                nfa.add_transition(leaf, letter, v2(v))?;
            }
        }
    }
    for i in 0..=n {
        let cur = p_base + i;
        let next = if i < n { cur + 1 } else { cur };
        nfa.add_transition(cur, 0, next)?;
        nfa.add_transition(cur, 1, next)?;
    }
    // Letter c: f spawns the second copy and the timer; the tree, the second
    // copy, the first target copy and the final timer state return to f.
    if inst.s != inst.t {
        nfa.add_transition(f, 2, v2(inst.s))?;
    }
    nfa.add_transition(f, 2, p_base)?;
    for m in 0..internal {
        if tree_base + m != f {
            nfa.add_transition(tree_base + m, 2, f)?;
        }
    }
    for v in 0..nv {
        if leaf_base + v != f {
            nfa.add_transition(leaf_base + v, 2, f)?;
        }
        if v != inst.t {
            nfa.add_transition(v2(v), 2, f)?;
        }
    }
    nfa.add_transition(v1(inst.t), 2, f)?;
    nfa.add_transition(p_base + n, 2, f)?;

    let shortcut = inst.shortcut_exists()?;
    let witness = if shortcut {
        let path = exact_length_path(&g, inst.s, inst.t, n - 1).expect("shortcut length present");
        let label = path_label(&g, &path);
        let mut w = Word::new(vec![2]);
        w.extend(&label);
        w.push(2);
        w.push(2);
        w.extend(&label);
        w.push(2);
        Some(w)
    } else {
        None
    };

    let mut names = Vec::new();
    for v in 0..nv {
        names.push(format!("V1:{}", vertex_tag(v, inst.s, inst.t)));
    }
    for v in 0..nv {
        if v != inst.t {
            names.push(format!("V2:{}", vertex_tag(v, inst.s, inst.t)));
        }
    }
    for m in 0..internal {
        names.push(if m == 0 {
            "f".to_string()
        } else {
            format!("T:n{m}")
        });
    }
    for v in 0..nv {
        let leaf = leaf_base + v;
        names.push(if leaf == f {
            "f".to_string()
        } else {
            format!("T:L{v}")
        });
    }
    for i in 1..=n + 1 {
        names.push(format!("p{i}"));
    }

    Ok(GadgetInstance {
        automaton: nfa,
        property: Property::Complete,
        ground_truth: !shortcut,
        shortcut_exists: shortcut,
        witness,
        state_names: names,
        params: GadgetParams {
            family: GadgetFamily::Completeness,
            source: inst.graph.clone(),
            s: inst.s,
            t: inst.t,
            n: Some(n),
        },
    })
}

/// The unambiguity gadget: the two-copy frame of the completeness gadget
/// (identically labelled copies, the target of the second copy deleted, a
/// deterministic tree fanning out into both copies) with a timer whose last
/// state dies under `a` and `b`, every timer state returning to `f` under
/// `c`, and `f` spawning the first copy. The ternary NFA is strongly
/// connected and complete, and unambiguous iff the instance has no shortcut:
/// the two `c`-branches out of `f` can only reunite at `f` itself, which
/// needs the first-copy walk to sit on the absorbing target while the timer
/// is still alive. On a shortcut, `c w c` labels two distinct paths from `f`
/// to itself.
pub fn unambiguity_gadget(inst: &ConstrainedInstance) -> Result<GadgetInstance, Error> {
    require_promises(inst)?;
    let g = saturate_outdegree_two(&inst.graph, inst.t)?;
    let nv = g.n_vertices();
    let n = inst.n;
    let depth = ceil_log2(nv);
    let internal = (1usize << depth) - 1;

    let v1 = |v: usize| v;
    let v2_base = nv;
    let v2 = |v: usize| {
        debug_assert_ne!(v, inst.t, "the second target copy is deleted");
        if v < inst.t {
            v2_base + v
        } else {
            v2_base + v - 1
        }
    };
    let tree_base = 2 * nv - 1;
    let leaf_base = tree_base + internal;
    let p_base = leaf_base + nv;
    let f = if internal > 0 { tree_base } else { leaf_base };

    let mut nfa = Nfa::new(p_base + n, 3)?;
    for v in 0..nv {
        if v == inst.t {
            nfa.add_transition(v1(v), 0, v1(v))?;
            nfa.add_transition(v1(v), 1, v1(v))?;
            continue;
        }
        let slots = sorted_slots(&g, v);
        for (letter, &target) in slots.iter().enumerate() {
            nfa.add_transition(v1(v), letter, v1(target))?;
            if target != inst.t {
                nfa.add_transition(v2(v), letter, v2(target))?;
            }
        }
    }
    for m in 0..internal {
        let (left, right) = tree_children(depth, m);
        let resolve = |child: TreeChild| match child {
            TreeChild::Internal(c) => tree_base + c,
            TreeChild::LeafSlot(slot) => leaf_base + slot % nv,
        };
        nfa.add_transition(tree_base + m, 0, resolve(left))?;
        nfa.add_transition(tree_base + m, 1, resolve(right))?;
    }
    for v in 0..nv {
        let leaf = leaf_base + v;
        for letter in 0..2 {
            nfa.add_transition(leaf, letter, v1(v))?;
            if v != inst.t {
                nfa.add_transition(leaf, letter, v2(v))?;
            }
        }
    }
    for i in 0..n {
        let cur = p_base + i;
        if i + 1 < n {
            nfa.add_transition(cur, 0, cur + 1)?;
            nfa.add_transition(cur, 1, cur + 1)?;
        }
        // p_n dies under a and b; a live timer is what certifies short words.
    }
    // Letter c: f spawns the first copy of s and the timer; the rest of the
    // tree, the whole second copy, the absorbing target and every timer
    // state return to f. The first copy dies, so a c-round-trip back to f
    // certifies either a target visit or a live timer.
    nfa.add_transition(f, 2, v1(inst.s))?;
    nfa.add_transition(f, 2, p_base)?;
    for m in 0..internal {
        if tree_base + m != f {
            nfa.add_transition(tree_base + m, 2, f)?;
        }
    }
    for v in 0..nv {
        if leaf_base + v != f {
            nfa.add_transition(leaf_base + v, 2, f)?;
        }
        if v != inst.t {
            nfa.add_transition(v2(v), 2, f)?;
        }
    }
    nfa.add_transition(v1(inst.t), 2, f)?;
    for i in 0..n {
        nfa.add_transition(p_base + i, 2, f)?;
    }

    let shortcut = inst.shortcut_exists()?;
    let witness = if shortcut {
        let path = exact_length_path(&g, inst.s, inst.t, n - 1).expect("shortcut length present");
        let mut w = Word::new(vec![2]);
        w.extend(&path_label(&g, &path));
        w.push(2);
        Some(w)
    } else {
        None
    };

    let mut names = Vec::new();
    for v in 0..nv {
        names.push(format!("V1:{}", vertex_tag(v, inst.s, inst.t)));
    }
    for v in 0..nv {
        if v != inst.t {
            names.push(format!("V2:{}", vertex_tag(v, inst.s, inst.t)));
        }
    }
    for m in 0..internal {
        names.push(if m == 0 {
            "f".to_string()
        } else {
            format!("T:n{m}")
        });
    }
    for v in 0..nv {
        let leaf = leaf_base + v;
        names.push(if leaf == f {
            "f".to_string()
        } else {
            format!("T:L{v}")
        });
    }
    for i in 1..=n {
        names.push(format!("p{i}"));
    }

    Ok(GadgetInstance {
        automaton: nfa,
        property: Property::Unambiguous,
        ground_truth: !shortcut,
        shortcut_exists: shortcut,
        witness,
        state_names: names,
        params: GadgetParams {
            family: GadgetFamily::Unambiguity,
            source: inst.graph.clone(),
            s: inst.s,
            t: inst.t,
            n: Some(n),
        },
    })
}

/// Encodes letters over at most four letters into letter pairs over a binary
/// alphabet: a -> xx, b -> xy, c -> yx, c' -> yy.
pub fn binary_encode(word: &Word) -> Word {
    let mut out = Word::empty();
    for &l in word.letters() {
        debug_assert!(l < 4);
        out.push(l >> 1);
        out.push(l & 1);
    }
    out
}

/// Replaces an alphabet of at most four letters by a binary one, spending
/// two intermediate states per original state (a depth-two tree). Alphabets
/// smaller than four are padded by repeating the last letter, so the ternary
/// gadgets get the usual doubled `c`. An intermediate state is created only
/// when the pair of images behind it is nonempty, which is what keeps strong
/// connectivity intact. Completeness, unambiguity and strong connectivity
/// all carry over.
pub fn binarize(nfa: &Nfa) -> Result<Nfa, Error> {
    let k = nfa.n_letters();
    if k > 4 {
        return Err(Error::contract(format!(
            "binary encoding handles at most four letters, got {k}"
        )));
    }
    let pad = |slot: usize| slot.min(k - 1);
    let n = nfa.n_states();
    let mut x_node = vec![None; n];
    let mut y_node = vec![None; n];
    let mut next = n;
    for q in 0..n {
        if !nfa.successors(q, pad(0)).is_empty() || !nfa.successors(q, pad(1)).is_empty() {
            x_node[q] = Some(next);
            next += 1;
        }
        if !nfa.successors(q, pad(2)).is_empty() || !nfa.successors(q, pad(3)).is_empty() {
            y_node[q] = Some(next);
            next += 1;
        }
    }
    let mut out = Nfa::new(next, 2)?;
    for q in 0..n {
        if let Some(mid) = x_node[q] {
            out.add_transition(q, 0, mid)?;
            for &p in nfa.successors(q, pad(0)) {
                out.add_transition(mid, 0, p)?;
            }
            for &p in nfa.successors(q, pad(1)) {
                out.add_transition(mid, 1, p)?;
            }
        }
        if let Some(mid) = y_node[q] {
            out.add_transition(q, 1, mid)?;
            for &p in nfa.successors(q, pad(2)) {
                out.add_transition(mid, 0, p)?;
            }
            for &p in nfa.successors(q, pad(3)) {
                out.add_transition(mid, 1, p)?;
            }
        }
    }
    Ok(out)
}

/// One named check of a certificate.
#[derive(Clone, Debug)]
pub struct Claim {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of re-certifying a gadget instance.
#[derive(Clone, Debug, Default)]
pub struct CertificateReport {
    pub claims: Vec<Claim>,
}

impl CertificateReport {
    fn push(&mut self, name: &'static str, passed: bool, detail: impl Into<String>) {
        self.claims.push(Claim {
            name,
            passed,
            detail: detail.into(),
        });
    }

    pub fn all_passed(&self) -> bool {
        self.claims.iter().all(|c| c.passed)
    }

    pub fn violated(&self) -> Vec<&'static str> {
        self.claims
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name)
            .collect()
    }
}

/// Re-derives the ground truth of a gadget instance with the exhaustive
/// oracles and checks the structural side conditions of its family, plus the
/// replay of any witness it carries. The automaton must fit the oracle
/// guard.
pub fn verify_gadget(inst: &GadgetInstance, max_states: usize) -> Result<CertificateReport, Error> {
    let a = &inst.automaton;
    if a.n_states() > max_states {
        return Err(Error::resource(format!(
            "gadget verification refuses {} states (limit {max_states})",
            a.n_states()
        )));
    }
    let full = StateSet::full(a.n_states());
    let mut report = CertificateReport::default();

    let names_ok = inst.state_names.len() == a.n_states() && {
        let unique: BTreeSet<&String> = inst.state_names.iter().collect();
        unique.len() == inst.state_names.len()
    };
    report.push(
        "state-names-total-injective",
        names_ok,
        format!(
            "{} names for {} states",
            inst.state_names.len(),
            a.n_states()
        ),
    );

    let expected_property = match inst.params.family {
        GadgetFamily::IntroCompleteness | GadgetFamily::Completeness => Property::Complete,
        GadgetFamily::IntroSync | GadgetFamily::Sync => Property::Synchronising,
        GadgetFamily::Unambiguity => Property::Unambiguous,
    };
    report.push(
        "property-matches-family",
        inst.property == expected_property,
        format!(
            "{} for family {}",
            inst.property.name(),
            inst.params.family.name()
        ),
    );

    let polarity = match inst.params.family {
        GadgetFamily::IntroSync | GadgetFamily::Sync => inst.shortcut_exists,
        _ => !inst.shortcut_exists,
    };
    report.push(
        "ground-truth-shortcut-consistency",
        inst.ground_truth == polarity,
        format!(
            "ground truth {} with shortcut {}",
            inst.ground_truth, inst.shortcut_exists
        ),
    );

    match inst.params.family {
        GadgetFamily::IntroCompleteness => {
            report.push(
                "binary-alphabet",
                a.n_letters() == 2,
                format!("{} letters", a.n_letters()),
            );
            report.push(
                "deterministic",
                a.is_dfa(),
                "at most one successor per state and letter",
            );
            let mortal = oracles::shortest_mortal_word(a, max_states)?;
            report.push(
                "completeness-matches-oracle",
                mortal.is_none() == inst.ground_truth,
                format!("oracle mortal word: {mortal:?}"),
            );
            report.push(
                "witness-presence",
                inst.witness.is_some() == !inst.ground_truth,
                "mortal witness iff incomplete",
            );
            if let Some(w) = &inst.witness {
                let dead = a.apply(&full, w)?.is_empty();
                report.push("mortal-witness-replays", dead, format!("word {w}"));
            }
        }
        GadgetFamily::IntroSync => {
            report.push(
                "binary-alphabet",
                a.n_letters() == 2,
                format!("{} letters", a.n_letters()),
            );
            report.push(
                "total-deterministic",
                a.is_total_dfa(),
                "exactly one successor everywhere",
            );
            if !a.is_total_dfa() {
                return Ok(report);
            }
            let reset = oracles::shortest_reset_word(a, max_states)?;
            report.push(
                "synchronisation-matches-oracle",
                reset.is_some() == inst.ground_truth,
                format!("oracle reset word: {reset:?}"),
            );
            report.push(
                "witness-presence",
                inst.witness.is_some() == inst.ground_truth,
                "reset witness iff synchronising",
            );
            if let Some(w) = &inst.witness {
                let merged = a.apply(&full, w)?.len() == 1;
                report.push("reset-witness-replays", merged, format!("word {w}"));
            }
        }
        GadgetFamily::Sync => {
            report.push(
                "binary-alphabet",
                a.n_letters() == 2,
                format!("{} letters", a.n_letters()),
            );
            report.push(
                "total-deterministic",
                a.is_total_dfa(),
                "exactly one successor everywhere",
            );
            if !a.is_total_dfa() {
                return Ok(report);
            }
            report.push(
                "strongly-connected",
                analysis::is_strongly_connected(a),
                "one strongly connected component",
            );
            let rank = oracles::rank(a, max_states)?;
            report.push("rank-at-most-two", rank <= 2, format!("rank {rank}"));
            let reset = oracles::shortest_reset_word(a, max_states)?;
            report.push(
                "synchronisation-matches-oracle",
                reset.is_some() == inst.ground_truth,
                format!("oracle reset word: {reset:?}"),
            );
            report.push(
                "witness-presence",
                inst.witness.is_some() == inst.ground_truth,
                "merge witness iff synchronising",
            );
            if let Some(w) = &inst.witness {
                match (inst.state_index("r1"), inst.state_index("r2")) {
                    (Some(p), Some(q)) => {
                        let pair = StateSet::from_states(a.n_states(), [p, q]);
                        let merged = a.apply(&pair, w)?.len() == 1;
                        report.push(
                            "merge-witness-replays",
                            merged,
                            format!("word {w} on the symmetric states"),
                        );
                    }
                    _ => report.push("merge-witness-replays", false, "symmetric states not named"),
                }
            }
        }
        GadgetFamily::Completeness => {
            report.push(
                "ternary-alphabet",
                a.n_letters() == 3,
                format!("{} letters", a.n_letters()),
            );
            report.push(
                "strongly-connected",
                analysis::is_strongly_connected(a),
                "one strongly connected component",
            );
            report.push(
                "unambiguous",
                analysis::is_unambiguous(a),
                "no diamond in the product",
            );
            report.push(
                "two-image-bounded",
                analysis::image_bound_check(a, 2)?.bounded,
                "all singleton images stay within two states",
            );
            let mortal = oracles::shortest_mortal_word(a, max_states)?;
            report.push(
                "completeness-matches-oracle",
                mortal.is_none() == inst.ground_truth,
                format!("oracle mortal word: {mortal:?}"),
            );
            report.push(
                "witness-presence",
                inst.witness.is_some() == !inst.ground_truth,
                "mortal witness iff incomplete",
            );
            if let Some(w) = &inst.witness {
                let dead = a.apply(&full, w)?.is_empty();
                report.push("mortal-witness-replays", dead, format!("word {w}"));
            }
        }
        GadgetFamily::Unambiguity => {
            report.push(
                "ternary-alphabet",
                a.n_letters() == 3,
                format!("{} letters", a.n_letters()),
            );
            report.push(
                "strongly-connected",
                analysis::is_strongly_connected(a),
                "one strongly connected component",
            );
            let mortal = oracles::shortest_mortal_word(a, max_states)?;
            report.push(
                "complete",
                mortal.is_none(),
                format!("oracle mortal word: {mortal:?}"),
            );
            let diamond = analysis::find_diamond(a);
            let verdict_ok = diamond.is_none() == inst.ground_truth;
            let detail = match &diamond {
                Some(d) => format!("diamond ({}, {}, {})", d.start, d.end, d.word),
                None => "no diamond".to_string(),
            };
            report.push("unambiguity-matches-search", verdict_ok, detail);
            if let Some(d) = &diamond {
                let counts = oracles::count_paths(a, d.start, &d.word)?;
                report.push(
                    "found-diamond-replays",
                    counts[d.end] >= 2,
                    format!("{} paths", counts[d.end]),
                );
            }
            report.push(
                "witness-presence",
                inst.witness.is_some() == !inst.ground_truth,
                "diamond witness iff ambiguous",
            );
            if let Some(w) = &inst.witness {
                match inst.state_index("f") {
                    Some(f) => {
                        let counts = oracles::count_paths(a, f, w)?;
                        report.push(
                            "witness-diamond-replays",
                            counts[f] >= 2,
                            format!("{} paths from the root to itself", counts[f]),
                        );
                    }
                    None => report.push("witness-diamond-replays", false, "root state not named"),
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::digraph::st_path_lengths;
    use crate::oracles::DEFAULT_MAX_STATES;

    fn svt_path() -> Digraph {
        Digraph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap()
    }

    fn svt_instance(n: usize) -> ConstrainedInstance {
        ConstrainedInstance::new(svt_path(), 0, 2, n).unwrap()
    }

    fn single_vertex_instance() -> ConstrainedInstance {
        ConstrainedInstance::new(Digraph::new(1).unwrap(), 0, 0, 1).unwrap()
    }

    #[test]
    fn layered_reduction_of_the_path_is_pinned() {
        let inst = layered_reduction(&svt_path(), 0, 2).unwrap();
        assert_eq!(inst.n, 3);
        assert_eq!(inst.s, 0);
        assert_eq!(inst.t, 9);
        let expected: BTreeSet<(usize, usize)> = [
            (0, 4),
            (1, 8),
            (2, 5),
            (3, 7),
            (4, 9),
            (5, 8),
            (6, 9),
            (7, 9),
            (8, 9),
        ]
        .into_iter()
        .collect();
        let got: BTreeSet<(usize, usize)> = inst.graph.edges().iter().copied().collect();
        assert_eq!(got, expected);
        assert_eq!(
            st_path_lengths(&inst.graph, inst.s, inst.t).unwrap(),
            BTreeSet::from([2])
        );
        assert!(inst.shortcut_exists().unwrap());
        assert!(verify_promises(&inst).all_hold());
    }

    #[test]
    fn layered_reduction_of_the_edgeless_pair_is_a_no_instance() {
        let g = Digraph::new(2).unwrap();
        let inst = layered_reduction(&g, 0, 1).unwrap();
        assert_eq!(inst.n, 2);
        assert_eq!(
            st_path_lengths(&inst.graph, inst.s, inst.t).unwrap(),
            BTreeSet::from([2])
        );
        assert!(!inst.shortcut_exists().unwrap());
        assert!(verify_promises(&inst).all_hold());
    }

    #[test]
    fn layered_reduction_handles_cyclic_inputs() {
        let g = Digraph::from_edges(3, vec![(0, 1), (1, 0), (1, 2), (2, 0)]).unwrap();
        let inst = layered_reduction(&g, 0, 2).unwrap();
        assert!(verify_promises(&inst).all_hold());
        assert!(
            inst.shortcut_exists().unwrap(),
            "0 reaches 2, so a shortcut must exist"
        );
    }

    #[test]
    fn layered_reduction_rejects_equal_endpoints() {
        let err = layered_reduction(&svt_path(), 1, 1).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }

    #[test]
    fn intro_completeness_merges_sinks_and_stays_deterministic() {
        // Two sinks besides t merge into t'; the source of indegree zero
        // other than s gets an edge to t.
        let g = Digraph::from_edges(6, vec![(0, 1), (1, 3), (2, 5), (1, 5)]).unwrap();
        let inst = intro_dfa_completeness_gadget(&g, 0, 4).unwrap();
        let a = &inst.automaton;
        assert!(a.is_dfa());
        assert!(!a.is_total_dfa());
        assert_eq!(a.n_states(), 5);
        assert_eq!(inst.state_names, vec!["s", "v1", "v2", "t'", "t"]);
        assert_eq!(a.successors(0, 0), &[1]);
        assert_eq!(a.successors(0, 1), &[1]);
        assert_eq!(a.successors(1, 0), &[3]);
        assert_eq!(a.successors(1, 1), &[3]);
        assert_eq!(a.successors(2, 0), &[3]);
        assert_eq!(a.successors(2, 1), &[4]);
        assert_eq!(a.successors(3, 0), &[0]);
        assert_eq!(a.successors(3, 1), &[0]);
        assert!(a.successors(4, 0).is_empty() && a.successors(4, 1).is_empty());

        assert!(
            inst.ground_truth,
            "s cannot reach t, so the DFA is complete"
        );
        assert!(!inst.shortcut_exists);
        let verdict = analysis::is_complete(a).unwrap();
        assert!(verdict.complete);
    }

    #[test]
    fn intro_completeness_with_reachable_target_is_incomplete() {
        let g = Digraph::from_edges(2, vec![(0, 1)]).unwrap();
        let inst = intro_dfa_completeness_gadget(&g, 0, 1).unwrap();
        assert!(!inst.ground_truth);
        let w = inst.witness.clone().unwrap();
        let full = StateSet::full(inst.automaton.n_states());
        assert!(inst.automaton.apply(&full, &w).unwrap().is_empty());
        let report = verify_gadget(&inst, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn intro_sync_matches_reachability() {
        let reachable = Digraph::from_edges(2, vec![(0, 1)]).unwrap();
        let yes = intro_sync_gadget(&reachable, 0, 1).unwrap();
        assert!(yes.ground_truth);
        assert!(yes.automaton.is_total_dfa());
        let w = yes.witness.clone().unwrap();
        let full = StateSet::full(yes.automaton.n_states());
        assert_eq!(yes.automaton.apply(&full, &w).unwrap().len(), 1);

        let unreachable = Digraph::from_edges(3, vec![(0, 1), (2, 1)]).unwrap();
        let no = intro_sync_gadget(&unreachable, 0, 2).unwrap();
        assert!(!no.ground_truth);
        assert_eq!(
            oracles::shortest_reset_word(&no.automaton, DEFAULT_MAX_STATES).unwrap(),
            None
        );
    }

    #[test]
    fn intro_gadgets_reject_cycles() {
        let g = Digraph::from_edges(2, vec![(0, 1), (1, 0)]).unwrap();
        assert!(matches!(
            intro_dfa_completeness_gadget(&g, 0, 1).unwrap_err(),
            Error::Contract(_)
        ));
    }

    #[test]
    fn sync_gadget_with_shortcut_synchronises() {
        let inst = svt_instance(3);
        let gadget = sync_gadget(&inst).unwrap();
        let a = &gadget.automaton;
        assert_eq!(a.n_states(), 19);
        assert!(a.is_total_dfa());
        assert!(gadget.ground_truth);
        assert!(analysis::is_strongly_connected(a));
        assert_eq!(analysis::period(a), 1);
        assert!(oracles::shortest_reset_word(a, DEFAULT_MAX_STATES)
            .unwrap()
            .is_some());
        assert!(oracles::rank(a, DEFAULT_MAX_STATES).unwrap() <= 2);

        // The witness merges the two symmetric states.
        let w = gadget.witness.clone().unwrap();
        assert_eq!(w.to_string(), "baaaaa");
        let r1 = gadget.state_index("r1").unwrap();
        let r2 = gadget.state_index("r2").unwrap();
        let pair = StateSet::from_states(a.n_states(), [r1, r2]);
        assert_eq!(a.apply(&pair, &w).unwrap().len(), 1);

        let report = verify_gadget(&gadget, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn sync_gadget_without_shortcut_does_not_synchronise() {
        let inst = svt_instance(2);
        let gadget = sync_gadget(&inst).unwrap();
        assert!(!gadget.ground_truth);
        assert!(gadget.witness.is_none());
        assert_eq!(
            oracles::shortest_reset_word(&gadget.automaton, DEFAULT_MAX_STATES).unwrap(),
            None
        );
        assert!(oracles::rank(&gadget.automaton, DEFAULT_MAX_STATES).unwrap() <= 2);
        let report = verify_gadget(&gadget, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn sync_gadget_accepts_the_degenerate_instance() {
        let gadget = sync_gadget(&single_vertex_instance()).unwrap();
        assert_eq!(gadget.automaton.n_states(), 7);
        assert!(gadget.ground_truth);
        let report = verify_gadget(&gadget, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn sync_gadget_rejects_broken_promises() {
        let g = Digraph::from_edges(3, vec![(0, 2)]).unwrap();
        let inst = ConstrainedInstance::new(g, 0, 2, 1).unwrap();
        assert!(matches!(
            sync_gadget(&inst).unwrap_err(),
            Error::Contract(_)
        ));
    }

    #[test]
    fn completeness_gadget_with_shortcut_is_mortal() {
        let inst = svt_instance(3);
        let gadget = completeness_gadget(&inst).unwrap();
        let a = &gadget.automaton;
        assert_eq!(a.n_letters(), 3);
        assert!(!gadget.ground_truth);
        let w = gadget.witness.clone().unwrap();
        assert_eq!(w.to_string(), "caaccaac");
        assert!(a
            .apply(&StateSet::full(a.n_states()), &w)
            .unwrap()
            .is_empty());
        assert!(analysis::is_strongly_connected(a));
        assert!(analysis::is_unambiguous(a));
        assert!(analysis::image_bound_check(a, 2).unwrap().bounded);
        assert_eq!(
            oracles::image_size_frontier(a, DEFAULT_MAX_STATES).unwrap(),
            2
        );
        let report = verify_gadget(&gadget, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn completeness_gadget_without_shortcut_is_complete() {
        let inst = svt_instance(2);
        let gadget = completeness_gadget(&inst).unwrap();
        assert!(gadget.ground_truth);
        assert!(gadget.witness.is_none());
        assert_eq!(
            oracles::shortest_mortal_word(&gadget.automaton, DEFAULT_MAX_STATES).unwrap(),
            None
        );
        let report = verify_gadget(&gadget, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn completeness_gadget_accepts_the_degenerate_instance() {
        let gadget = completeness_gadget(&single_vertex_instance()).unwrap();
        let a = &gadget.automaton;
        assert!(
            !gadget.ground_truth,
            "the singleton instance always has the shortcut"
        );
        let w = gadget.witness.clone().unwrap();
        assert_eq!(w.to_string(), "cccc");
        assert!(a
            .apply(&StateSet::full(a.n_states()), &w)
            .unwrap()
            .is_empty());
        let report = verify_gadget(&gadget, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn unambiguity_gadget_with_shortcut_has_the_root_diamond() {
        let inst = svt_instance(3);
        let gadget = unambiguity_gadget(&inst).unwrap();
        let a = &gadget.automaton;
        assert!(!gadget.ground_truth);
        let w = gadget.witness.clone().unwrap();
        assert_eq!(w.to_string(), "caac");
        let f = gadget.state_index("f").unwrap();
        let counts = oracles::count_paths(a, f, &w).unwrap();
        assert!(counts[f] >= 2, "two labelled paths from the root to itself");
        assert!(analysis::is_strongly_connected(a));
        assert_eq!(
            oracles::shortest_mortal_word(a, DEFAULT_MAX_STATES).unwrap(),
            None
        );
        let report = verify_gadget(&gadget, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn unambiguity_gadget_without_shortcut_is_unambiguous() {
        let inst = svt_instance(2);
        let gadget = unambiguity_gadget(&inst).unwrap();
        assert!(gadget.ground_truth);
        assert!(analysis::is_unambiguous(&gadget.automaton));
        assert!(oracles::diamond_search_bounded(&gadget.automaton, 8).is_none());
        let report = verify_gadget(&gadget, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn binarize_of_a_one_letter_loop_stays_connected_and_complete() {
        let nfa = Nfa::from_transitions(1, 1, [(0, 0, 0)]).unwrap();
        let bin = binarize(&nfa).unwrap();
        assert_eq!(bin.n_states(), 3);
        assert_eq!(bin.n_letters(), 2);
        assert!(analysis::is_strongly_connected(&bin));
        assert_eq!(
            oracles::shortest_mortal_word(&bin, DEFAULT_MAX_STATES).unwrap(),
            None
        );
    }

    #[test]
    fn binarize_preserves_the_gadget_verdicts() {
        let inst = svt_instance(3);
        let gadget = completeness_gadget(&inst).unwrap();
        let bin = binarize(&gadget.automaton).unwrap();
        assert!(analysis::is_strongly_connected(&bin));
        assert!(analysis::is_unambiguous(&bin));
        let verdict = analysis::is_complete(&bin).unwrap();
        assert!(!verdict.complete, "incompleteness carries over");

        // An encoded mortal word stated twice around a spacer letter kills
        // the binary automaton: the first round kills the original states,
        // the spacer steps the leftover intermediates down, the second round
        // finishes them.
        let w = gadget.witness.unwrap();
        let encoded = binary_encode(&w);
        let mut doubled = encoded.clone();
        doubled.push(0);
        doubled.extend(&encoded);
        let full = StateSet::full(bin.n_states());
        assert!(bin.apply(&full, &doubled).unwrap().is_empty());
    }

    #[test]
    fn binarize_rejects_five_letters() {
        let nfa = Nfa::new(1, 5).unwrap();
        assert!(matches!(binarize(&nfa).unwrap_err(), Error::Contract(_)));
    }

    #[test]
    fn binarize_keeps_four_letters_distinct() {
        // A rotation where every letter moves to a different state: the
        // fourth letter is a real letter here, not a doubled third one.
        let nfa = Nfa::from_transitions(
            4,
            4,
            [(0, 0, 1), (1, 0, 2), (2, 0, 3), (3, 0, 0), (0, 1, 2), (0, 2, 3), (0, 3, 0)],
        )
        .unwrap();
        let bin = binarize(&nfa).unwrap();
        let from_zero = |pair: &[usize]| {
            bin.apply(&StateSet::singleton(bin.n_states(), 0), &Word::new(pair.to_vec()))
                .unwrap()
                .iter()
                .collect::<Vec<_>>()
        };
        assert_eq!(from_zero(&[0, 0]), vec![1], "first letter encodes as xx");
        assert_eq!(from_zero(&[0, 1]), vec![2], "second letter encodes as xy");
        assert_eq!(from_zero(&[1, 0]), vec![3], "third letter encodes as yx");
        assert_eq!(from_zero(&[1, 1]), vec![0], "fourth letter encodes as yy");
    }

    #[test]
    fn intro_gadget_handles_isolated_vertices() {
        // Everything except t is isolated: s gets a fresh sink child (merged
        // into t'), the other isolated vertex points at t, and the labelled
        // result is still a DFA with the right ground truth.
        let g = Digraph::new(3).unwrap();
        let inst = intro_dfa_completeness_gadget(&g, 0, 2).unwrap();
        let a = &inst.automaton;
        assert!(a.is_dfa());
        assert!(inst.ground_truth, "s cannot reach t");
        assert!(!inst.shortcut_exists);
        assert!(analysis::is_complete(a).unwrap().complete);
        let report = verify_gadget(&inst, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());

        let sync = intro_sync_gadget(&g, 0, 2).unwrap();
        assert!(sync.automaton.is_total_dfa());
        assert!(!sync.ground_truth);
        let report = verify_gadget(&sync, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed(), "violated: {:?}", report.violated());
    }

    #[test]
    fn tampered_metadata_fails_certification() {
        let gadget = sync_gadget(&svt_instance(3)).unwrap();
        let mut tampered = gadget.clone();
        tampered.ground_truth = false;
        tampered.witness = None;
        let report = verify_gadget(&tampered, DEFAULT_MAX_STATES).unwrap();
        assert!(!report.all_passed());
        assert!(report
            .violated()
            .contains(&"synchronisation-matches-oracle"));
    }

    #[test]
    fn tampered_transition_fails_certification() {
        let gadget = completeness_gadget(&svt_instance(2)).unwrap();
        let mut broken = gadget.clone();
        // Redirect one transition of the first copy into the tree root.
        let f = gadget.state_index("f").unwrap();
        let mut nfa = Nfa::new(broken.automaton.n_states(), 3).unwrap();
        let mut first = true;
        for (p, x, q) in broken.automaton.transitions() {
            if first && x == 0 && p == 0 {
                nfa.add_transition(p, x, f).unwrap();
                first = false;
            } else {
                nfa.add_transition(p, x, q).unwrap();
            }
        }
        broken.automaton = nfa;
        let report = verify_gadget(&broken, DEFAULT_MAX_STATES).unwrap();
        assert!(!report.all_passed());
    }

    #[test]
    fn metadata_round_trips_through_json() {
        let gadget = sync_gadget(&svt_instance(3)).unwrap();
        let meta = GadgetMetadata::from_json(&gadget.metadata_json()).unwrap();
        let rebuilt = GadgetInstance::from_parts(gadget.automaton.clone(), meta).unwrap();
        assert_eq!(rebuilt.state_names, gadget.state_names);
        assert_eq!(rebuilt.witness, gadget.witness);
        assert_eq!(rebuilt.ground_truth, gadget.ground_truth);
        let report = verify_gadget(&rebuilt, DEFAULT_MAX_STATES).unwrap();
        assert!(report.all_passed());
    }
}
