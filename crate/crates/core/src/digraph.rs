//! Directed multigraphs, reachability utilities, and the constrained
//! (s,t)-reachability instance with its five checkable promises.
//!
//! Edges form a multiset and their order is preserved: parallel edges are
//! meaningful here (outdegree saturation duplicates edges on purpose), unlike
//! at the automaton level where the relation is a set.

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "WireDigraph", into = "WireDigraph")]
pub struct Digraph {
    n_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Digraph {
    pub fn new(n_vertices: usize) -> Result<Digraph, Error> {
        if n_vertices == 0 {
            return Err(Error::input("a digraph needs at least one vertex"));
        }
        Ok(Digraph {
            n_vertices,
            edges: Vec::new(),
        })
    }

    pub fn from_edges(n_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Digraph, Error> {
        let mut g = Digraph::new(n_vertices)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, from: usize, to: usize) -> Result<(), Error> {
        if from >= self.n_vertices || to >= self.n_vertices {
            return Err(Error::input(format!(
                "edge ({from}, {to}) outside vertex range 0..{}",
                self.n_vertices
            )));
        }
        self.edges.push((from, to));
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Out-neighbours of `from` in edge-insertion order, multiplicities kept.
    pub fn out_neighbours(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .iter()
            .filter(move |(u, _)| *u == from)
            .map(|&(_, v)| v)
    }

    pub fn outdegree(&self, from: usize) -> usize {
        self.out_neighbours(from).count()
    }

    pub fn indegree(&self, to: usize) -> usize {
        self.edges.iter().filter(|(_, v)| *v == to).count()
    }

    /// Adjacency lists with parallel edges collapsed.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); self.n_vertices];
        for &(u, v) in &self.edges {
            adj[u].insert(v);
        }
        adj.into_iter()
            .map(|set| set.into_iter().collect())
            .collect()
    }

    /// Vertices reachable from `from`, including `from` itself.
    pub fn reachable(&self, from: usize) -> Result<BTreeSet<usize>, Error> {
        if from >= self.n_vertices {
            return Err(Error::input(format!(
                "vertex {from} outside range 0..{}",
                self.n_vertices
            )));
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n_vertices];
        let mut queue = VecDeque::from([from]);
        seen[from] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        Ok((0..self.n_vertices).filter(|&v| seen[v]).collect())
    }

    /// A topological order, or a directed cycle if none exists. The cycle is
    /// the one closed by the first back edge the DFS encounters.
    pub fn topological_order(&self) -> Result<Vec<usize>, Vec<usize>> {
        let adj = self.adjacency();
        // 0 = unseen, 1 = on the current DFS path, 2 = finished
        let mut color = vec![0u8; self.n_vertices];
        let mut order = Vec::with_capacity(self.n_vertices);
        let mut path = Vec::new();
        for root in 0..self.n_vertices {
            if color[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            color[root] = 1;
            path.push(root);
            while let Some(&mut (u, ref mut next)) = stack.last_mut() {
                if let Some(&v) = adj[u].get(*next) {
                    *next += 1;
                    match color[v] {
                        0 => {
                            color[v] = 1;
                            path.push(v);
                            stack.push((v, 0));
                        }
                        1 => {
                            let start = path.iter().position(|&w| w == v).expect("v is on path");
                            return Err(path[start..].to_vec());
                        }
                        _ => {}
                    }
                } else {
                    color[u] = 2;
                    path.pop();
                    order.push(u);
                    stack.pop();
                }
            }
        }
        order.reverse();
        Ok(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("digraph serializes");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<Digraph, Error> {
        serde_json::from_str(text).map_err(|e| Error::input(format!("digraph JSON: {e}")))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph g {\n  rankdir=LR;\n  node [shape=circle];\n");
        for v in 0..self.n_vertices {
            out.push_str(&format!("  v{v} [label=\"{v}\"];\n"));
        }
        for &(u, v) in &self.edges {
            out.push_str(&format!("  v{u} -> v{v};\n"));
        }
        out.push_str("}\n");
        out
    }
}

impl std::fmt::Debug for Digraph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Digraph({} vertices, edges {:?})",
            self.n_vertices, self.edges
        )
    }
}

#[derive(Serialize, Deserialize)]
struct WireDigraph {
    vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl From<Digraph> for WireDigraph {
    fn from(g: Digraph) -> WireDigraph {
        WireDigraph {
            vertices: g.n_vertices,
            edges: g.edges,
        }
    }
}

impl TryFrom<WireDigraph> for Digraph {
    type Error = Error;

    fn try_from(wire: WireDigraph) -> Result<Digraph, Error> {
        Digraph::from_edges(wire.vertices, wire.edges)
    }
}

/// Exact set of lengths of (s,t)-paths in an acyclic digraph, by a dynamic
/// program over a topological order. On a DAG each per-vertex length set has
/// at most `n_vertices` elements, so the program is polynomial.
pub fn st_path_lengths(g: &Digraph, s: usize, t: usize) -> Result<BTreeSet<usize>, Error> {
    if s >= g.n_vertices() || t >= g.n_vertices() {
        return Err(Error::input(format!(
            "vertices ({s}, {t}) outside range 0..{}",
            g.n_vertices()
        )));
    }
    let order = g.topological_order().map_err(|cycle| {
        Error::contract(format!(
            "path-length sets need an acyclic digraph, found cycle {cycle:?}"
        ))
    })?;
    let mut lengths: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); g.n_vertices()];
    lengths[s].insert(0);
    for &u in &order {
        if lengths[u].is_empty() {
            continue;
        }
        let reached: Vec<usize> = lengths[u].iter().copied().collect();
        for v in g.out_neighbours(u).collect::<BTreeSet<_>>() {
            for &l in &reached {
                lengths[v].insert(l + 1);
            }
        }
    }
    Ok(std::mem::take(&mut lengths[t]))
}

/// A constrained (s,t)-reachability instance: a digraph together with the
/// two endpoints and the length parameter `n`. The five promises are not
/// assumed; [`verify_promises`] checks each one and reports a witness on
/// failure.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct ConstrainedInstance {
    pub graph: Digraph,
    pub s: usize,
    pub t: usize,
    pub n: usize,
}

impl ConstrainedInstance {
    pub fn new(graph: Digraph, s: usize, t: usize, n: usize) -> Result<ConstrainedInstance, Error> {
        if s >= graph.n_vertices() || t >= graph.n_vertices() {
            return Err(Error::input(format!(
                "endpoints ({s}, {t}) outside vertex range 0..{}",
                graph.n_vertices()
            )));
        }
        if n == 0 {
            return Err(Error::input("the length parameter n must be positive"));
        }
        Ok(ConstrainedInstance { graph, s, t, n })
    }

    /// True iff some (s,t)-path has length exactly `n - 1`.
    pub fn shortcut_exists(&self) -> Result<bool, Error> {
        Ok(st_path_lengths(&self.graph, self.s, self.t)?.contains(&(self.n - 1)))
    }
}

/// Outcome of checking the five promises of a constrained instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PromiseReport {
    pub acyclic: bool,
    pub cycle: Option<Vec<usize>>,
    pub target_is_sink: bool,
    pub target_out_edge: Option<(usize, usize)>,
    pub outdegrees_bounded: bool,
    pub outdegree_offender: Option<usize>,
    pub path_lengths_constrained: bool,
    pub offending_length: Option<usize>,
    pub all_reach_target: bool,
    pub stranded_vertex: Option<usize>,
}

impl PromiseReport {
    pub fn all_hold(&self) -> bool {
        self.acyclic
            && self.target_is_sink
            && self.outdegrees_bounded
            && self.path_lengths_constrained
            && self.all_reach_target
    }

    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if !self.acyclic {
            out.push("acyclic");
        }
        if !self.target_is_sink {
            out.push("target-outdegree-zero");
        }
        if !self.outdegrees_bounded {
            out.push("outdegree-at-most-two");
        }
        if !self.path_lengths_constrained {
            out.push("path-lengths-n-minus-one-or-n");
        }
        if !self.all_reach_target {
            out.push("every-vertex-reaches-target");
        }
        out
    }
}

/// Checks the five promises of a constrained instance one by one:
/// acyclicity, the target being a sink, outdegrees at most two elsewhere,
/// every (s,t)-path having length n-1 or n, and every vertex reaching the
/// target. Multiplicities count towards outdegrees.
pub fn verify_promises(inst: &ConstrainedInstance) -> PromiseReport {
    let g = &inst.graph;
    let (acyclic, cycle) = match g.topological_order() {
        Ok(_) => (true, None),
        Err(cycle) => (false, Some(cycle)),
    };

    let target_out_edge = g.out_neighbours(inst.t).next().map(|v| (inst.t, v));
    let target_is_sink = target_out_edge.is_none();

    let outdegree_offender = (0..g.n_vertices()).find(|&v| v != inst.t && g.outdegree(v) > 2);
    let outdegrees_bounded = outdegree_offender.is_none();

    let (path_lengths_constrained, offending_length) = if acyclic {
        let lengths = st_path_lengths(g, inst.s, inst.t).expect("acyclicity just checked");
        match lengths.iter().find(|&&l| l != inst.n - 1 && l != inst.n) {
            Some(&bad) => (false, Some(bad)),
            None => (true, None),
        }
    } else {
        (false, None)
    };

    // Reaching t is co-reachability: chase edges backwards from t.
    let mut reaches = vec![false; g.n_vertices()];
    reaches[inst.t] = true;
    let mut rev: Vec<Vec<usize>> = vec![Vec::new(); g.n_vertices()];
    for &(u, v) in g.edges() {
        rev[v].push(u);
    }
    let mut queue = VecDeque::from([inst.t]);
    while let Some(v) = queue.pop_front() {
        for &u in &rev[v] {
            if !reaches[u] {
                reaches[u] = true;
                queue.push_back(u);
            }
        }
    }
    let stranded_vertex = (0..g.n_vertices()).find(|&v| !reaches[v]);
    let all_reach_target = stranded_vertex.is_none();

    PromiseReport {
        acyclic,
        cycle,
        target_is_sink,
        target_out_edge,
        outdegrees_bounded,
        outdegree_offender,
        path_lengths_constrained,
        offending_length,
        all_reach_target,
        stranded_vertex,
    }
}

/// Replaces the out-edges of every vertex with more than two of them by a
/// binary tree of fresh vertices, leaving reachability among the original
/// vertices untouched. Trees are built by pairing successors in ascending
/// target order, so the output is deterministic.
///
/// Returns the new digraph and a map from new vertex index to the original
/// index it carries over (`None` for fresh tree vertices). Original vertices
/// keep their indices.
pub fn outdegree_reduce(g: &Digraph, protected: usize) -> (Digraph, Vec<Option<usize>>) {
    let n = g.n_vertices();
    let mut vertex_map: Vec<Option<usize>> = (0..n).map(Some).collect();
    let mut edges: Vec<(usize, usize)> = Vec::new();
    let mut next_fresh = n;

    for u in 0..n {
        let mut targets: Vec<usize> = g.out_neighbours(u).collect();
        if u == protected || targets.len() <= 2 {
            edges.extend(targets.into_iter().map(|v| (u, v)));
            continue;
        }
        targets.sort_unstable();
        // Pair adjacent nodes level by level until two remain under the root.
        let mut level = targets;
        while level.len() > 2 {
            let mut next_level = Vec::with_capacity(level.len() / 2 + 1);
            let mut chunks = level.chunks_exact(2);
            for pair in &mut chunks {
                let fresh = next_fresh;
                next_fresh += 1;
                vertex_map.push(None);
                edges.push((fresh, pair[0]));
                edges.push((fresh, pair[1]));
                next_level.push(fresh);
            }
            next_level.extend(chunks.remainder().iter().copied());
            level = next_level;
        }
        edges.extend(level.into_iter().map(|v| (u, v)));
    }

    let mut out = Digraph::new(next_fresh).expect("at least the original vertices");
    for (u, v) in edges {
        out.add_edge(u, v)
            .expect("indices in range by construction");
    }
    (out, vertex_map)
}

/// Duplicates edges until every vertex except `exempt` has outdegree exactly
/// two. Requires all non-exempt outdegrees to be one or two already.
pub fn saturate_outdegree_two(g: &Digraph, exempt: usize) -> Result<Digraph, Error> {
    let mut out = g.clone();
    for v in 0..g.n_vertices() {
        if v == exempt {
            continue;
        }
        match g.outdegree(v) {
            2 => {}
            1 => {
                let target = g.out_neighbours(v).next().expect("outdegree one");
                out.add_edge(v, target)?;
            }
            0 => {
                return Err(Error::contract(format!(
                    "vertex {v} has outdegree zero and is not exempt from saturation"
                )));
            }
            d => {
                return Err(Error::contract(format!(
                    "vertex {v} has outdegree {d}, expected at most two"
                )));
            }
        }
    }
    Ok(out)
}

/// Strongly connected components in reverse topological order of the
/// condensation. Iterative Tarjan, so deep graphs cannot overflow the stack.
pub fn strongly_connected_components(g: &Digraph) -> Vec<Vec<usize>> {
    let n = g.n_vertices();
    let adj = g.adjacency();
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut components = Vec::new();

    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call_stack: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut next)) = call_stack.last_mut() {
            if let Some(&w) = adj[v].get(*next) {
                *next += 1;
                if index[w] == usize::MAX {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call_stack.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                if low[v] == index[v] {
                    let mut component = Vec::new();
                    loop {
                        let w = stack.pop().expect("component stack nonempty");
                        on_stack[w] = false;
                        component.push(w);
                        if w == v {
                            break;
                        }
                    }
                    component.sort_unstable();
                    components.push(component);
                }
                call_stack.pop();
                if let Some(&(parent, _)) = call_stack.last() {
                    low[parent] = low[parent].min(low[v]);
                }
            }
        }
    }
    components
}
