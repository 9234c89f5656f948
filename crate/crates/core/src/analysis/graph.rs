use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::model::{Position, Rule, Schema};

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    /// Vertices in schema order.
    pub positions: Vec<Position>,
    pub normal_edges: BTreeSet<(Position, Position)>,
    pub special_edges: BTreeSet<(Position, Position)>,
}

impl DependencyGraph {
    /// Adds every position of `schema` not yet present as an isolated vertex.
    pub fn add_schema(&mut self, schema: &Schema) {
        for p in schema.positions() {
            if !self.positions.contains(&p) {
                self.positions.push(p);
            }
        }
    }

    /// Positions reachable from `start` along normal edges, including the
    /// start positions themselves.
    pub fn normal_closure(&self, start: impl IntoIterator<Item = Position>) -> BTreeSet<Position> {
        let mut adj: BTreeMap<&Position, Vec<&Position>> = BTreeMap::new();
        for (a, b) in &self.normal_edges {
            adj.entry(a).or_default().push(b);
        }
        let mut seen: BTreeSet<Position> = start.into_iter().collect();
        let mut stack: Vec<Position> = seen.iter().cloned().collect();
        while let Some(p) = stack.pop() {
            for &q in adj.get(&p).into_iter().flatten() {
                if seen.insert(q.clone()) {
                    stack.push(q.clone());
                }
            }
        }
        seen
    }
}

/// Builds the dependency graph over the positions of `rules`.
///
/// For every head variable `x` that also occurs at body position π: a
/// normal edge from π to each head position of `x`, and a special edge from
/// π to each head position of an existential variable.
pub fn build_dependency_graph(rules: &[Rule]) -> DependencyGraph {
    let mut schema = Schema::default();
    for a in rules.iter().flat_map(Rule::atoms) {
        // arity conflicts are reported by the parser; keep the first here
        let _ = schema.add(a);
    }
    let mut g = DependencyGraph::default();
    g.add_schema(&schema);
    for rule in rules {
        let existential_positions: Vec<Position> = rule
            .head
            .slots()
            .filter(|(_, t)| t.var_name().is_some_and(|v| rule.is_existential(v)))
            .map(|(p, _)| p)
            .collect();
        for x in rule.frontier() {
            let targets = rule.head_positions_of(&x);
            for pi in rule.body_positions_of(&x) {
                for t in &targets {
                    g.normal_edges.insert((pi.clone(), t.clone()));
                }
                for z in &existential_positions {
                    g.special_edges.insert((pi.clone(), z.clone()));
                }
            }
        }
    }
    g
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rank {
    Finite(usize),
    Infinite,
}

impl Rank {
    pub fn is_finite(self) -> bool {
        matches!(self, Rank::Finite(_))
    }
}

impl fmt::Display for Rank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rank::Finite(n) => write!(f, "{n}"),
            Rank::Infinite => f.write_str("inf"),
        }
    }
}

/// Rank of every position: the largest number of special edges on a path
/// ending there, or infinite when that number is unbounded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RankMap {
    order: Vec<Position>,
    rank: HashMap<Position, Rank>,
}

impl RankMap {
    pub fn rank(&self, p: &Position) -> Option<Rank> {
        self.rank.get(p).copied()
    }

    /// Unknown positions (no rule mentions them) have rank 0.
    pub fn is_finite(&self, p: &Position) -> bool {
        self.rank(p).is_none_or(Rank::is_finite)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Position, Rank)> + '_ {
        self.order.iter().map(|p| (p, self.rank[p]))
    }

    pub fn finite(&self) -> Vec<Position> {
        self.iter()
            .filter(|(_, r)| r.is_finite())
            .map(|(p, _)| p.clone())
            .collect()
    }

    pub fn infinite(&self) -> Vec<Position> {
        self.iter()
            .filter(|(_, r)| !r.is_finite())
            .map(|(p, _)| p.clone())
            .collect()
    }
}

/// Ranks via strongly connected components. A component with an internal
/// special edge makes everything reachable from it infinite; the remaining
/// ranks are longest special-edge counts over the condensation.
pub fn compute_ranks(g: &DependencyGraph) -> RankMap {
    let mut graph: DiGraph<(), bool> = DiGraph::new();
    let mut node: HashMap<&Position, NodeIndex> = HashMap::new();
    for p in &g.positions {
        node.insert(p, graph.add_node(()));
    }
    let mut ensure = |graph: &mut DiGraph<(), bool>, p| -> NodeIndex {
        *node.entry(p).or_insert_with(|| graph.add_node(()))
    };
    let mut extra: Vec<&Position> = Vec::new();
    for (edges, special) in [(&g.normal_edges, false), (&g.special_edges, true)] {
        for (a, b) in edges {
            for p in [a, b] {
                if !g.positions.contains(p) && !extra.contains(&p) {
                    extra.push(p);
                }
            }
            let (na, nb) = (ensure(&mut graph, a), ensure(&mut graph, b));
            graph.add_edge(na, nb, special);
        }
    }

    // tarjan_scc yields components in reverse topological order
    let mut sccs = tarjan_scc(&graph);
    sccs.reverse();
    let mut comp = vec![0usize; graph.node_count()];
    for (c, members) in sccs.iter().enumerate() {
        for n in members {
            comp[n.index()] = c;
        }
    }
    let mut comp_rank: Vec<Rank> = vec![Rank::Finite(0); sccs.len()];
    for (c, members) in sccs.iter().enumerate() {
        let mut rank = comp_rank[c];
        for &n in members {
            for e in graph.edges_directed(n, petgraph::Direction::Incoming) {
                use petgraph::visit::EdgeRef;
                let from = comp[e.source().index()];
                let special = *e.weight();
                let incoming = if from == c {
                    if special {
                        Rank::Infinite
                    } else {
                        continue;
                    }
                } else {
                    match comp_rank[from] {
                        Rank::Infinite => Rank::Infinite,
                        Rank::Finite(k) => Rank::Finite(k + usize::from(special)),
                    }
                };
                rank = rank.max(incoming);
            }
        }
        comp_rank[c] = rank;
    }

    let mut order: Vec<Position> = g.positions.clone();
    order.extend(extra.into_iter().cloned());
    let rank = order
        .iter()
        .map(|p| (p.clone(), comp_rank[comp[node[p].index()]]))
        .collect();
    RankMap { order, rank }
}
