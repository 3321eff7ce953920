//! Finite realizations of the random tree.
//!
//! A ball of radius `R` is grown breadth first from vertex 0: the root gets
//! `D_0` children, every other vertex above the cut gets `D_i - 1`, and
//! vertices at depth `R` keep their sampled `D_i` but no children. Vertices
//! are numbered in BFS order, so each generation is a contiguous index range.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::io::Write;

use rand::Rng;

use crate::degree_dist::DegreeDistribution;
use crate::error::{Error, Result};

pub const DEFAULT_MAX_VERTICES: usize = 5_000_000;

const NO_PARENT: u32 = u32::MAX;

/// A finite tree with per-vertex depth and target degree, plus the set of
/// vertices whose arrivals are suppressed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeInstance {
    offsets: Vec<u32>,
    neighbors: Vec<u32>,
    depth: Vec<u32>,
    target_degree: Vec<u32>,
    radius: u32,
    blocked: Vec<bool>,
}

impl TreeInstance {
    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &[u32] {
        let v = v as usize;
        &self.neighbors[self.offsets[v] as usize..self.offsets[v + 1] as usize]
    }

    pub fn degree(&self, v: u32) -> usize {
        self.neighbors(v).len()
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    pub fn target_degree(&self, v: u32) -> u32 {
        self.target_degree[v as usize]
    }

    /// Truncation depth, measured from vertex 0.
    pub fn radius(&self) -> u32 {
        self.radius
    }

    #[inline]
    pub fn is_blocked(&self, v: u32) -> bool {
        self.blocked[v as usize]
    }

    pub fn blocked(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.len() as u32).filter(|&v| self.blocked[v as usize])
    }

    /// Each edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.len() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&v| u < v)
                .map(move |&v| (u, v))
        })
    }

    /// Copy with `extra` added to the blocked set.
    pub fn with_blocked(&self, extra: &[u32]) -> Result<Self> {
        let mut out = self.clone();
        for &v in extra {
            if v as usize >= self.len() {
                return Err(Error::Domain(format!(
                    "vertex {v} is not in a tree with {} vertices",
                    self.len()
                )));
            }
            out.blocked[v as usize] = true;
        }
        Ok(out)
    }

    /// Builds a tree from an undirected edge list over ids `0..n`, where `n`
    /// is one more than the largest id (a lone vertex if there are no edges).
    /// Depths come from BFS at vertex 0 and target degrees are the realized
    /// degrees.
    pub fn from_edges(edges: &[(u32, u32)]) -> Result<Self> {
        let n = edges
            .iter()
            .map(|&(u, v)| u.max(v) as usize + 1)
            .max()
            .unwrap_or(1);
        if edges.len() != n - 1 {
            return Err(Error::InvalidTree(format!(
                "{} edges over {n} vertices (a tree needs {})",
                edges.len(),
                n - 1
            )));
        }
        let mut degree = vec![0u32; n];
        for &(u, v) in edges {
            if u == v {
                return Err(Error::InvalidTree(format!("self-loop at vertex {u}")));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0u32);
        for &d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..n].to_vec();
        let mut neighbors = vec![0u32; offsets[n] as usize];
        for &(u, v) in edges {
            neighbors[fill[u as usize] as usize] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize] as usize] = u;
            fill[v as usize] += 1;
        }

        let mut depth = vec![u32::MAX; n];
        depth[0] = 0;
        let mut queue = VecDeque::from([0u32]);
        while let Some(u) = queue.pop_front() {
            for &w in &neighbors[offsets[u as usize] as usize..offsets[u as usize + 1] as usize] {
                if depth[w as usize] == u32::MAX {
                    depth[w as usize] = depth[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        if let Some(v) = depth.iter().position(|&d| d == u32::MAX) {
            // n - 1 edges and disconnected means there is a cycle somewhere.
            return Err(Error::InvalidTree(format!(
                "vertex {v} is unreachable from vertex 0 (cycle or missing edge)"
            )));
        }
        let radius = depth.iter().copied().max().unwrap_or(0);

        Ok(Self {
            offsets,
            neighbors,
            depth,
            target_degree: degree,
            radius,
            blocked: vec![false; n],
        })
    }

    /// Parses the edge-list text format: `#` lines are comments, data lines
    /// are `u v` with nonnegative integer ids.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 2 {
                return Err(parse_err(format!("expected \"u v\", got {line:?}")));
            }
            let id = |s: &str| {
                s.parse::<u32>()
                    .map_err(|_| parse_err(format!("{s:?} is not a nonnegative integer vertex id")))
            };
            edges.push((id(fields[0])?, id(fields[1])?));
        }
        Self::from_edges(&edges)
    }

    /// Writes the debug edge-list dump: header `# radius=R seed=S`, then one
    /// `u v` line per edge.
    pub fn write_edge_list<W: Write>(&self, mut out: W, seed: Option<u64>) -> Result<()> {
        let mut text = String::new();
        match seed {
            Some(s) => writeln!(text, "# radius={} seed={s}", self.radius),
            None => writeln!(text, "# radius={} seed=none", self.radius),
        }
        .expect("writing to a String cannot fail");
        for (u, v) in self.edges() {
            writeln!(text, "{u} {v}").expect("writing to a String cannot fail");
        }
        out.write_all(text.as_bytes())?;
        Ok(())
    }

    /// Checks the tree invariants: `n - 1` edges, connected, BFS depths.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        if self.neighbors.len() != 2 * (n.saturating_sub(1)) {
            return Err(Error::InvalidTree("edge count is not n - 1".into()));
        }
        let mut seen = vec![u32::MAX; n];
        seen[0] = 0;
        let mut queue = VecDeque::from([0u32]);
        while let Some(u) = queue.pop_front() {
            for &w in self.neighbors(u) {
                if seen[w as usize] == u32::MAX {
                    seen[w as usize] = seen[u as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        if seen.contains(&u32::MAX) {
            return Err(Error::InvalidTree("not connected".into()));
        }
        if seen != self.depth {
            return Err(Error::InvalidTree("depth labels disagree with BFS".into()));
        }
        Ok(())
    }
}

/// Breadth-first builder shared by the ball and half-tree samplers.
struct Growth {
    parent: Vec<u32>,
    depth: Vec<u32>,
    target: Vec<u32>,
    child_start: Vec<u32>,
    child_count: Vec<u32>,
}

impl Growth {
    fn with_root(root_target: u32) -> Self {
        Self {
            parent: vec![NO_PARENT],
            depth: vec![0],
            target: vec![root_target],
            child_start: Vec::new(),
            child_count: Vec::new(),
        }
    }

    fn push(&mut self, parent: u32, target: u32) {
        let d = self.depth[parent as usize] + 1;
        self.parent.push(parent);
        self.depth.push(d);
        self.target.push(target);
    }

    /// Expands every vertex from `first` on in BFS order until depth
    /// `max_depth`, drawing degrees from `degree`.
    fn expand<F: FnMut() -> u32>(
        &mut self,
        first: usize,
        max_depth: u32,
        max_vertices: usize,
        mut degree: F,
    ) -> Result<()> {
        self.child_start.resize(first, 0);
        self.child_count.resize(first, 0);
        let mut v = first;
        while v < self.parent.len() {
            let start = self.parent.len() as u32;
            let mut count = 0u32;
            if self.depth[v] < max_depth {
                let has_parent = self.parent[v] != NO_PARENT;
                count = self.target[v] - u32::from(has_parent);
                if self.parent.len() + count as usize > max_vertices {
                    return Err(Error::GrowthCap {
                        depth: self.depth[v] + 1,
                        max_vertices,
                    });
                }
                for _ in 0..count {
                    let d = degree();
                    self.push(v as u32, d);
                }
            }
            self.child_start.push(start);
            self.child_count.push(count);
            v += 1;
        }
        Ok(())
    }

    fn finish(self, radius: u32, blocked: &[u32]) -> TreeInstance {
        let n = self.parent.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut neighbors = Vec::with_capacity(2 * n.saturating_sub(1));
        offsets.push(0u32);
        for v in 0..n {
            if self.parent[v] != NO_PARENT {
                neighbors.push(self.parent[v]);
            }
            let start = self.child_start[v];
            neighbors.extend(start..start + self.child_count[v]);
            offsets.push(neighbors.len() as u32);
        }
        let mut blocked_mask = vec![false; n];
        for &b in blocked {
            blocked_mask[b as usize] = true;
        }
        TreeInstance {
            offsets,
            neighbors,
            depth: self.depth,
            target_degree: self.target,
            radius,
            blocked: blocked_mask,
        }
    }
}

fn check_sizes(radius: u32, max_vertices: usize) -> Result<()> {
    if radius < 1 {
        return Err(Error::Domain("radius must be at least 1".into()));
    }
    if max_vertices < 1 {
        return Err(Error::Domain("max_vertices must be at least 1".into()));
    }
    Ok(())
}

/// Ball of radius `radius` around the root of the random tree.
pub fn sample_ball<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    radius: u32,
    rng: &mut R,
    max_vertices: usize,
) -> Result<TreeInstance> {
    check_sizes(radius, max_vertices)?;
    let mut growth = Growth::with_root(dist.sample(rng));
    growth.expand(0, radius, max_vertices, || dist.sample(rng))?;
    Ok(growth.finish(radius, &[]))
}

/// Rooted half-tree: a blocked vertex 0 attached to vertex 1, which has
/// `D_1 - 1` children, and so on down to distance `radius` from vertex 1.
///
/// Depths are still measured from vertex 0, so the stored radius is
/// `radius + 1`. Vertex 0 is given target degree 1.
pub fn sample_rooted_half_tree<R: Rng + ?Sized>(
    dist: &DegreeDistribution,
    radius: u32,
    rng: &mut R,
    max_vertices: usize,
) -> Result<TreeInstance> {
    check_sizes(radius, max_vertices)?;
    if max_vertices < 2 {
        return Err(Error::GrowthCap {
            depth: 1,
            max_vertices,
        });
    }
    let mut growth = Growth::with_root(1);
    growth.push(0, dist.sample(rng));
    growth.child_start.push(1);
    growth.child_count.push(1);
    growth.expand(1, radius + 1, max_vertices, || dist.sample(rng))?;
    Ok(growth.finish(radius + 1, &[0]))
}

/// Deterministic ball of the `degree`-regular tree.
pub fn regular_ball(degree: u32, radius: u32) -> Result<TreeInstance> {
    regular_ball_capped(degree, radius, DEFAULT_MAX_VERTICES)
}

pub fn regular_ball_capped(degree: u32, radius: u32, max_vertices: usize) -> Result<TreeInstance> {
    if degree < 2 {
        return Err(Error::Domain(format!("degree must be at least 2, got {degree}")));
    }
    check_sizes(radius, max_vertices)?;
    let mut growth = Growth::with_root(degree);
    growth.expand(0, radius, max_vertices, || degree)?;
    Ok(growth.finish(radius, &[]))
}

/// Uniform random recursive tree on `n` vertices: vertex `v` attaches to a
/// uniformly chosen earlier vertex. Used for fuzzing and oracle checks.
pub fn random_recursive_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<TreeInstance> {
    if n == 0 {
        return Err(Error::Domain("a tree needs at least one vertex".into()));
    }
    let edges: Vec<(u32, u32)> = (1..n as u32)
        .map(|v| (rng.random_range(0..v), v))
        .collect();
    TreeInstance::from_edges(&edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    fn reg(d: u32) -> DegreeDistribution {
        DegreeDistribution::regular(d).unwrap()
    }

    #[test]
    fn degree_two_ball_is_a_path() {
        let t = sample_ball(&reg(2), 5, &mut seeded(0), 100).unwrap();
        assert_eq!(t.len(), 11);
        assert_eq!(t.degree(0), 2);
        assert!((0..11).all(|v| t.degree(v) <= 2));
        assert_eq!((0..11).filter(|&v| t.degree(v) == 1).count(), 2);
        t.validate().unwrap();
    }

    #[test]
    fn cubic_ball_sizes() {
        let t = sample_ball(&reg(3), 2, &mut seeded(0), 100).unwrap();
        assert_eq!(t.len(), 10);
        assert_eq!(regular_ball(3, 3).unwrap().len(), 22);
        let path = regular_ball(2, 10).unwrap();
        assert_eq!(path.len(), 21);
        assert!((0..21).all(|v| path.degree(v) <= 2));
        let star = regular_ball(4, 1).unwrap();
        assert_eq!(star.len(), 5);
        assert_eq!(star.neighbors(0), &[1, 2, 3, 4]);
        assert_eq!(regular_ball(3, 3).unwrap(), sample_ball(&reg(3), 3, &mut seeded(77), 1000).unwrap());
    }

    #[test]
    fn half_tree_shapes() {
        let t = sample_rooted_half_tree(&reg(2), 3, &mut seeded(0), 100).unwrap();
        let edges: Vec<_> = t.edges().collect();
        assert_eq!(edges, vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert_eq!(t.blocked().collect::<Vec<_>>(), vec![0]);
        assert_eq!(t.radius(), 4);

        let t = sample_rooted_half_tree(&reg(3), 1, &mut seeded(0), 100).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.neighbors(1), &[0, 2, 3]);
        assert_eq!(t.blocked().collect::<Vec<_>>(), vec![0]);
        t.validate().unwrap();
    }

    #[test]
    fn growth_cap_names_depth() {
        match regular_ball_capped(3, 4, 20) {
            Err(Error::GrowthCap { depth, max_vertices }) => {
                assert_eq!(max_vertices, 20);
                assert_eq!(depth, 3);
            }
            other => panic!("expected growth cap, got {other:?}"),
        }
        assert!(regular_ball(1, 3).is_err());
        assert!(regular_ball(3, 0).is_err());
    }

    #[test]
    fn edge_list_round_trip() {
        let t = sample_ball(&DegreeDistribution::geometric_shifted(0.6).unwrap(), 3, &mut seeded(5), 10_000).unwrap();
        let mut buf = Vec::new();
        t.write_edge_list(&mut buf, Some(5)).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# radius=3 seed=5\n"));
        let back = TreeInstance::parse_edge_list(&text).unwrap();
        assert_eq!(back.len(), t.len());
        assert_eq!(back.edges().collect::<Vec<_>>(), t.edges().collect::<Vec<_>>());
        assert!((0..t.len() as u32).all(|v| back.depth(v) == t.depth(v)));
    }

    #[test]
    fn edge_list_errors() {
        match TreeInstance::parse_edge_list("# c\n0 1\n1 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        assert!(matches!(TreeInstance::parse_edge_list("0 1 2\n"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(TreeInstance::parse_edge_list("0 -1\n"), Err(Error::Parse { .. })));
        // triangle plus isolated vertex: 3 edges, 4 vertices, disconnected
        assert!(matches!(
            TreeInstance::parse_edge_list("0 1\n1 2\n2 0\n3 3\n"),
            Err(Error::InvalidTree(_))
        ));
        assert!(matches!(TreeInstance::parse_edge_list("1 2\n2 1\n"), Err(Error::InvalidTree(_))));
        let single = TreeInstance::parse_edge_list("# just a vertex\n").unwrap();
        assert_eq!(single.len(), 1);
    }

    #[test]
    fn recursive_trees_are_trees() {
        let mut rng = seeded(8);
        for n in 1..40 {
            let t = random_recursive_tree(n, &mut rng).unwrap();
            assert_eq!(t.len(), n);
            t.validate().unwrap();
        }
        assert!(random_recursive_tree(0, &mut rng).is_err());
    }

    #[test]
    fn with_blocked_checks_range() {
        let t = regular_ball(3, 1).unwrap();
        let b = t.with_blocked(&[0, 2]).unwrap();
        assert_eq!(b.blocked().collect::<Vec<_>>(), vec![0, 2]);
        assert!(t.with_blocked(&[4]).is_err());
    }
}
