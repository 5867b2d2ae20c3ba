//! CLDs as signed graphs: path polarity, feedback loops, implied links and
//! pattern matching where a pattern edge may land on a whole path.

use std::collections::{BTreeSet, HashSet};

use crate::cset::{AttrValue, CSetInstance, Sign};
use crate::error::{Error, Result};
use crate::schemas::{build_cld, sign_at};

/// Vertices by name and signed edges between vertex indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedGraph {
    pub names: Vec<String>,
    pub edges: Vec<(usize, usize, Sign)>,
}

impl SignedGraph {
    pub fn new(names: Vec<String>, edges: Vec<(usize, usize, Sign)>) -> SignedGraph {
        SignedGraph { names, edges }
    }

    /// One edge per `L` row, in row order.
    pub fn from_cld(cld: &CSetInstance) -> Result<SignedGraph> {
        cld.ensure_valid()?;
        let names = (0..cld.nparts("V")).map(|v| cld.name_of(v, "vname").to_string()).collect();
        let edges = (0..cld.nparts("L"))
            .map(|l| {
                let s = sign_at(cld, l, "polarity").ok_or_else(|| Error::BrokenPath(format!("link {} has no sign", l + 1)))?;
                Ok((cld.subpart(l, "src"), cld.subpart(l, "tgt"), s))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SignedGraph { names, edges })
    }

    pub fn to_cld(&self) -> Result<CSetInstance> {
        let names: Vec<&str> = self.names.iter().map(String::as_str).collect();
        let mut cld = build_cld(&names, &[])?;
        for &(s, t, sign) in &self.edges {
            let l = cld.add_part("L")?;
            cld.set_subpart(&l, "src", &crate::cset::PartId::new("V", s))?;
            cld.set_subpart(&l, "tgt", &crate::cset::PartId::new("V", t))?;
            let a = (0..2)
                .find(|&a| cld.attr(a, "sgn").and_then(AttrValue::as_sign) == Some(sign))
                .expect("both signs present");
            cld.set_subpart(&l, "polarity", &crate::cset::PartId::new("A", a))?;
        }
        Ok(cld)
    }

    pub fn nvertices(&self) -> usize {
        self.names.len()
    }

    /// Outgoing edge indices per vertex, in edge order.
    fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.names.len()];
        for (i, &(s, _, _)) in self.edges.iter().enumerate() {
            out[s].push(i);
        }
        out
    }
}

/// A walk given by its start vertex and edge indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignedPath {
    pub start: usize,
    pub edges: Vec<usize>,
}

impl SignedPath {
    pub fn empty(v: usize) -> SignedPath {
        SignedPath { start: v, edges: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn end(&self, g: &SignedGraph) -> usize {
        self.edges.last().map_or(self.start, |&e| g.edges[e].1)
    }

    /// Vertex sequence, including both endpoints.
    pub fn vertices(&self, g: &SignedGraph) -> Vec<usize> {
        std::iter::once(self.start).chain(self.edges.iter().map(|&e| g.edges[e].1)).collect()
    }

    /// Concatenation; `other` must start where `self` ends.
    pub fn then(&self, g: &SignedGraph, other: &SignedPath) -> Result<SignedPath> {
        if self.end(g) != other.start {
            return Err(Error::BrokenPath("paths are not adjacent".into()));
        }
        let mut edges = self.edges.clone();
        edges.extend(&other.edges);
        Ok(SignedPath { start: self.start, edges })
    }

    pub fn render(&self, g: &SignedGraph) -> String {
        let mut s = g.names[self.start].clone();
        for &e in &self.edges {
            let (_, t, sign) = g.edges[e];
            s.push_str(&format!(" -({sign})-> {}", g.names[t]));
        }
        s
    }
}

/// Product of signs; the empty product is `+`.
pub fn sign_product(signs: impl IntoIterator<Item = Sign>) -> Sign {
    signs.into_iter().fold(Sign::Pos, Sign::mul)
}

/// Net sign of a path. Fails when consecutive edges do not meet.
pub fn path_sign(g: &SignedGraph, p: &SignedPath) -> Result<Sign> {
    let mut at = p.start;
    if at >= g.nvertices() {
        return Err(Error::BrokenPath(format!("no vertex {}", at + 1)));
    }
    let mut sign = Sign::Pos;
    for &e in &p.edges {
        let &(s, t, es) = g
            .edges
            .get(e)
            .ok_or_else(|| Error::BrokenPath(format!("no edge {}", e + 1)))?;
        if s != at {
            return Err(Error::BrokenPath(format!(
                "edge {} leaves {} but the path is at {}",
                e + 1,
                g.names[s],
                g.names[at]
            )));
        }
        sign = sign.mul(es);
        at = t;
    }
    Ok(sign)
}

fn sorted_cycles(mut cycles: Vec<SignedPath>, g: &SignedGraph) -> Vec<SignedPath> {
    cycles.sort_by_cached_key(|c| (c.vertices(g), c.edges.clone()));
    cycles.dedup();
    cycles
}

/// Simple cycles of length at most `max_len` by depth-first search from each
/// vertex through larger-indexed vertices only. Each cycle starts at its
/// smallest vertex.
pub fn simple_cycles_dfs(g: &SignedGraph, max_len: usize) -> Vec<SignedPath> {
    let out = g.out_edges();
    let n = g.nvertices();
    let mut cycles = Vec::new();
    let mut on_path = vec![false; n];
    let mut edges = Vec::new();
    fn go(
        g: &SignedGraph,
        out: &[Vec<usize>],
        s: usize,
        v: usize,
        max_len: usize,
        on_path: &mut [bool],
        edges: &mut Vec<usize>,
        cycles: &mut Vec<SignedPath>,
    ) {
        for &e in &out[v] {
            let t = g.edges[e].1;
            if t == s {
                let mut c = edges.clone();
                c.push(e);
                cycles.push(SignedPath { start: s, edges: c });
            } else if t > s && !on_path[t] && edges.len() + 1 < max_len {
                on_path[t] = true;
                edges.push(e);
                go(g, out, s, t, max_len, on_path, edges, cycles);
                edges.pop();
                on_path[t] = false;
            }
        }
    }
    if max_len == 0 {
        return cycles;
    }
    for s in 0..n {
        on_path[s] = true;
        go(g, &out, s, s, max_len, &mut on_path, &mut edges, &mut cycles);
        on_path[s] = false;
    }
    sorted_cycles(cycles, g)
}

/// All simple cycles by Johnson's algorithm on the underlying simple digraph,
/// expanded over parallel edges.
pub fn simple_cycles_johnson(g: &SignedGraph) -> Vec<SignedPath> {
    let n = g.nvertices();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(s, t, _) in &g.edges {
        adj[s].insert(t);
    }
    let adj: Vec<Vec<usize>> = adj.into_iter().map(|s| s.into_iter().collect()).collect();

    struct State<'a> {
        adj: &'a [Vec<usize>],
        s: usize,
        blocked: Vec<bool>,
        b: Vec<HashSet<usize>>,
        stack: Vec<usize>,
        found: Vec<Vec<usize>>,
    }
    impl State<'_> {
        fn unblock(&mut self, u: usize) {
            self.blocked[u] = false;
            let ws: Vec<usize> = self.b[u].drain().collect();
            for w in ws {
                if self.blocked[w] {
                    self.unblock(w);
                }
            }
        }
        fn circuit(&mut self, v: usize) -> bool {
            let mut f = false;
            self.stack.push(v);
            self.blocked[v] = true;
            for i in 0..self.adj[v].len() {
                let w = self.adj[v][i];
                if w < self.s {
                    continue;
                }
                if w == self.s {
                    self.found.push(self.stack.clone());
                    f = true;
                } else if !self.blocked[w] && self.circuit(w) {
                    f = true;
                }
            }
            if f {
                self.unblock(v);
            } else {
                for i in 0..self.adj[v].len() {
                    let w = self.adj[v][i];
                    if w >= self.s {
                        self.b[w].insert(v);
                    }
                }
            }
            self.stack.pop();
            f
        }
    }

    let mut vertex_cycles = Vec::new();
    for s in 0..n {
        let mut st = State {
            adj: &adj,
            s,
            blocked: vec![false; n],
            b: vec![HashSet::new(); n],
            stack: Vec::new(),
            found: Vec::new(),
        };
        st.circuit(s);
        vertex_cycles.extend(st.found);
    }

    let mut cycles = Vec::new();
    for vc in vertex_cycles {
        let hops: Vec<Vec<usize>> = (0..vc.len())
            .map(|i| {
                let (a, b) = (vc[i], vc[(i + 1) % vc.len()]);
                (0..g.edges.len()).filter(|&e| g.edges[e].0 == a && g.edges[e].1 == b).collect()
            })
            .collect();
        let mut choice = vec![0usize; hops.len()];
        loop {
            cycles.push(SignedPath {
                start: vc[0],
                edges: hops.iter().zip(&choice).map(|(h, &c)| h[c]).collect(),
            });
            let mut i = 0;
            while i < hops.len() {
                choice[i] += 1;
                if choice[i] < hops[i].len() {
                    break;
                }
                choice[i] = 0;
                i += 1;
            }
            if i == hops.len() {
                break;
            }
        }
    }
    sorted_cycles(cycles, g)
}

/// Simple cycles up to `max_len`; Johnson's algorithm when the bound cannot
/// cut any cycle, bounded search otherwise.
pub fn simple_cycles(g: &SignedGraph, max_len: usize) -> Vec<SignedPath> {
    if max_len >= g.nvertices() {
        simple_cycles_johnson(g)
    } else {
        simple_cycles_dfs(g, max_len)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackLoop {
    pub path: SignedPath,
    pub sign: Sign,
}

/// Simple cycles of length at most `max_len` whose net sign is `want`.
pub fn find_feedback_loops(g: &SignedGraph, want: Sign, max_len: usize) -> Vec<FeedbackLoop> {
    simple_cycles(g, max_len)
        .into_iter()
        .filter_map(|path| {
            let sign = path_sign(g, &path).expect("enumerated paths are adjacent");
            (sign == want).then_some(FeedbackLoop { path, sign })
        })
        .collect()
}

/// Simple paths (no repeated vertex) of length `min_len..=max_len` from `s`,
/// in depth-first edge order. When `closed` is set, paths returning to `s`
/// are included as well.
fn paths_from(g: &SignedGraph, out: &[Vec<usize>], s: usize, min_len: usize, max_len: usize, closed: bool) -> Vec<SignedPath> {
    let mut found = Vec::new();
    let mut on_path = vec![false; g.nvertices()];
    let mut edges = Vec::new();
    #[allow(clippy::too_many_arguments)]
    fn go(
        g: &SignedGraph,
        out: &[Vec<usize>],
        s: usize,
        v: usize,
        bounds: (usize, usize),
        closed: bool,
        on_path: &mut [bool],
        edges: &mut Vec<usize>,
        found: &mut Vec<SignedPath>,
    ) {
        if edges.len() == bounds.1 {
            return;
        }
        for &e in &out[v] {
            let t = g.edges[e].1;
            if t == s {
                if closed && edges.len() + 1 >= bounds.0 {
                    let mut c = edges.clone();
                    c.push(e);
                    found.push(SignedPath { start: s, edges: c });
                }
                continue;
            }
            if on_path[t] {
                continue;
            }
            edges.push(e);
            if edges.len() >= bounds.0 {
                found.push(SignedPath { start: s, edges: edges.clone() });
            }
            on_path[t] = true;
            go(g, out, s, t, bounds, closed, on_path, edges, found);
            on_path[t] = false;
            edges.pop();
        }
    }
    on_path[s] = true;
    go(g, out, s, s, (min_len.max(1), max_len), closed, &mut on_path, &mut edges, &mut found);
    found
}

/// A composite of primitive links.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImpliedLink {
    pub src: usize,
    pub tgt: usize,
    pub sign: Sign,
    pub path: SignedPath,
}

/// Every simple open path of length `2..=max_len`, ordered by source,
/// target, then edge sequence.
pub fn enumerate_implied_links(g: &SignedGraph, max_len: usize) -> Vec<ImpliedLink> {
    let out = g.out_edges();
    let mut links: Vec<ImpliedLink> = (0..g.nvertices())
        .flat_map(|s| paths_from(g, &out, s, 2, max_len, false))
        .map(|path| ImpliedLink {
            src: path.start,
            tgt: path.end(g),
            sign: path_sign(g, &path).expect("enumerated paths are adjacent"),
            path,
        })
        .collect();
    links.sort_by(|a, b| (a.src, a.tgt, &a.path.edges).cmp(&(b.src, b.tgt, &b.path.edges)));
    links
}

/// A pattern vertex map together with a target path for every pattern edge.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PathPatternMatch {
    pub vertex_map: Vec<usize>,
    pub edge_paths: Vec<SignedPath>,
}

impl PathPatternMatch {
    /// Target edges covered by the match.
    pub fn image_edges(&self) -> BTreeSet<usize> {
        self.edge_paths.iter().flat_map(|p| p.edges.iter().copied()).collect()
    }

    pub fn uses_implied_paths(&self) -> usize {
        self.edge_paths.iter().filter(|p| p.len() >= 2).count()
    }
}

/// Number of distinct target sub-diagrams (vertex and edge images) hit by
/// the matches.
pub fn distinct_occurrences(matches: &[PathPatternMatch]) -> usize {
    matches
        .iter()
        .map(|m| {
            let verts: BTreeSet<usize> = m.vertex_map.iter().copied().collect();
            (verts, m.image_edges())
        })
        .collect::<BTreeSet<_>>()
        .len()
}

/// Matches sending each pattern edge to a simple target path of length
/// `1..=max_path_len` with the same net sign between the mapped endpoints.
/// When both endpoints map to one vertex the path is a simple cycle through
/// it. With `injective`, distinct pattern vertices map to distinct targets.
pub fn match_signed_pattern(
    pattern: &SignedGraph,
    target: &SignedGraph,
    max_path_len: usize,
    injective: bool,
) -> Vec<PathPatternMatch> {
    let n = target.nvertices();
    let out = target.out_edges();
    // paths[u][v][sign]
    let mut paths: Vec<Vec<[Vec<SignedPath>; 2]>> = vec![vec![[Vec::new(), Vec::new()]; n]; n];
    for u in 0..n {
        for p in paths_from(target, &out, u, 1, max_path_len, true) {
            let v = p.end(target);
            let s = path_sign(target, &p).expect("enumerated paths are adjacent");
            paths[u][v][(s == Sign::Neg) as usize].push(p);
        }
    }
    let pn = pattern.nvertices();
    let mut results = Vec::new();
    let mut vmap = vec![usize::MAX; pn];
    let mut used = vec![false; n];

    #[allow(clippy::too_many_arguments)]
    fn assign(
        i: usize,
        pattern: &SignedGraph,
        paths: &[Vec<[Vec<SignedPath>; 2]>],
        n: usize,
        injective: bool,
        vmap: &mut Vec<usize>,
        used: &mut Vec<bool>,
        results: &mut Vec<PathPatternMatch>,
    ) {
        if i == pattern.nvertices() {
            let options: Vec<&Vec<SignedPath>> = pattern
                .edges
                .iter()
                .map(|&(a, b, s)| &paths[vmap[a]][vmap[b]][(s == Sign::Neg) as usize])
                .collect();
            if options.iter().any(|o| o.is_empty()) {
                return;
            }
            let mut choice = vec![0usize; options.len()];
            loop {
                results.push(PathPatternMatch {
                    vertex_map: vmap.clone(),
                    edge_paths: options.iter().zip(&choice).map(|(o, &c)| o[c].clone()).collect(),
                });
                let mut k = options.len();
                loop {
                    if k == 0 {
                        return;
                    }
                    k -= 1;
                    choice[k] += 1;
                    if choice[k] < options[k].len() {
                        break;
                    }
                    choice[k] = 0;
                }
            }
        }
        for t in 0..n {
            if injective && used[t] {
                continue;
            }
            vmap[i] = t;
            let feasible = pattern.edges.iter().all(|&(a, b, s)| {
                a > i || b > i || !paths[vmap[a]][vmap[b]][(s == Sign::Neg) as usize].is_empty()
            });
            if feasible {
                used[t] = true;
                assign(i + 1, pattern, paths, n, injective, vmap, used, results);
                used[t] = false;
            }
        }
        vmap[i] = usize::MAX;
    }
    if max_path_len == 0 {
        return results;
    }
    assign(0, pattern, &paths, n, injective, &mut vmap, &mut used, &mut results);
    results.sort();
    results
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(usize, usize, Sign)]) -> SignedGraph {
        SignedGraph::new((0..n).map(|i| format!("v{i}")).collect(), edges.to_vec())
    }

    use Sign::{Neg, Pos};

    #[test]
    fn signs() {
        let gr = g(3, &[(0, 1, Pos), (1, 2, Neg)]);
        assert_eq!(path_sign(&gr, &SignedPath { start: 0, edges: vec![0] }).unwrap(), Pos);
        assert_eq!(path_sign(&gr, &SignedPath { start: 0, edges: vec![0, 1] }).unwrap(), Neg);
        assert_eq!(path_sign(&gr, &SignedPath::empty(2)).unwrap(), Pos);
        assert!(path_sign(&gr, &SignedPath { start: 1, edges: vec![0] }).is_err());
        assert_eq!(sign_product([Pos, Pos]), Pos);
        assert_eq!(sign_product([Pos, Neg]), Neg);
        assert_eq!(sign_product([]), Pos);
    }

    #[test]
    fn loops_by_sign() {
        let tri = g(3, &[(0, 1, Pos), (1, 2, Pos), (2, 0, Neg)]);
        assert_eq!(find_feedback_loops(&tri, Neg, 8).len(), 1);
        assert!(find_feedback_loops(&tri, Pos, 8).is_empty());
        assert!(find_feedback_loops(&tri, Neg, 2).is_empty());
        let dag = g(3, &[(0, 1, Pos), (1, 2, Pos), (0, 2, Neg)]);
        assert!(simple_cycles(&dag, 8).is_empty());
    }

    #[test]
    fn johnson_matches_dfs_with_multi_edges() {
        let gr = g(3, &[(0, 1, Pos), (0, 1, Neg), (1, 0, Pos), (1, 2, Pos), (2, 0, Pos), (2, 2, Neg)]);
        let j = simple_cycles_johnson(&gr);
        let d = simple_cycles_dfs(&gr, 3);
        assert_eq!(j, d);
        assert_eq!(j.len(), 5);
    }

    #[test]
    fn implied_links() {
        let single = g(2, &[(0, 1, Pos)]);
        assert!(enumerate_implied_links(&single, 8).is_empty());
        let par = g(4, &[(0, 1, Pos), (1, 3, Pos), (0, 2, Pos), (2, 3, Neg)]);
        let links = enumerate_implied_links(&par, 8);
        assert_eq!(links.len(), 2);
        assert_eq!(links[0].sign, Pos);
        assert_eq!(links[1].sign, Neg);
    }

    #[test]
    fn pattern_into_itself_has_identity() {
        let p = g(2, &[(0, 1, Pos), (1, 0, Neg)]);
        let ms = match_signed_pattern(&p, &p, 3, false);
        assert!(ms.iter().any(|m| m.vertex_map == vec![0, 1] && m.edge_paths.iter().all(|e| e.len() == 1)));
    }

    #[test]
    fn negative_self_loop_not_found_in_positive_cycle() {
        let p = g(1, &[(0, 0, Neg)]);
        let t = g(2, &[(0, 1, Neg), (1, 0, Neg)]);
        assert!(match_signed_pattern(&p, &t, 8, false).is_empty());
        let pos = g(1, &[(0, 0, Pos)]);
        assert_eq!(match_signed_pattern(&pos, &t, 8, false).len(), 2);
    }

    #[test]
    fn cld_round_trip() {
        let gr = g(2, &[(0, 1, Neg), (1, 1, Pos)]);
        let back = SignedGraph::from_cld(&gr.to_cld().unwrap()).unwrap();
        assert_eq!(back, gr);
    }
}
