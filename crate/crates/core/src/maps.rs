//! Ribbon and Möbius graphs as rotation systems on darts.
//!
//! `sigma` cycles are vertices in cyclic order, `alpha` pairs darts into
//! edges, and each edge carries a twist bit (always 0 in ribbon mode).
//! Isolated vertices (no darts) arise from contracting a lone edge and are
//! tracked as a separate count.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Ribbon,
    Moebius,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Ribbon => "ribbon",
            Mode::Moebius => "moebius",
        })
    }
}

impl std::str::FromStr for Mode {
    type Err = MapError;
    fn from_str(s: &str) -> Result<Self, MapError> {
        match s {
            "ribbon" => Ok(Mode::Ribbon),
            "moebius" | "mobius" => Ok(Mode::Moebius),
            _ => Err(MapError::Malformed(format!("unknown mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MapError {
    #[error("sigma is not a permutation of the darts")]
    BadSigma,
    #[error("alpha must be a fixed-point-free involution")]
    BadAlpha,
    #[error("twist list has {got} entries for {edges} edges")]
    TwistCount { got: usize, edges: usize },
    #[error("ribbon graphs carry no twists")]
    RibbonTwisted,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("graph is empty")]
    Empty,
    #[error("edge at dart {0} is a loop")]
    LoopEdge(usize),
    #[error("no edge at dart {0}")]
    NoSuchEdge(usize),
    #[error("no vertex {0}")]
    NoSuchVertex(usize),
    #[error("operation requires a {0} graph")]
    WrongMode(Mode),
    #[error("no one-vertex standard graph for type {0}")]
    NoStandardGraph(String),
    #[error("graph is not orientable")]
    NotOrientable,
    #[error("malformed graph data: {0}")]
    Malformed(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MapGraph {
    sigma: Vec<usize>,
    alpha: Vec<usize>,
    /// per dart; both darts of an edge agree
    twist: Vec<bool>,
    mode: Mode,
    isolated: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TopType {
    pub orientable: bool,
    /// genus if orientable, cross-cap number otherwise
    pub genus_or_crosscaps: u32,
    pub faces: u32,
}

impl TopType {
    pub fn euler_characteristic(&self) -> i64 {
        let h = self.genus_or_crosscaps as i64;
        if self.orientable {
            2 - 2 * h
        } else {
            2 - h
        }
    }
}

impl fmt::Display for TopType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.orientable {
            write!(f, "or(g={},f={})", self.genus_or_crosscaps, self.faces)
        } else {
            write!(f, "nor(k={},f={})", self.genus_or_crosscaps, self.faces)
        }
    }
}

/// A flag is a dart with a side, encoded as `2 * dart + (side == minus)`.
pub type Flag = (usize, bool);

fn invert_perm(p: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; p.len()];
    for (i, &x) in p.iter().enumerate() {
        inv[x] = i;
    }
    inv
}

fn is_perm(p: &[usize]) -> bool {
    let mut seen = vec![false; p.len()];
    p.iter().all(|&x| x < p.len() && !std::mem::replace(&mut seen[x], true))
}

impl MapGraph {
    /// `edge_twists` lists one bit per edge, ordered by the lower dart of
    /// each alpha-pair.
    pub fn new(sigma: Vec<usize>, alpha: Vec<usize>, edge_twists: Vec<bool>, mode: Mode) -> Result<Self, MapError> {
        let n = sigma.len();
        if !is_perm(&sigma) {
            return Err(MapError::BadSigma);
        }
        if alpha.len() != n || !is_perm(&alpha) || (0..n).any(|d| alpha[d] == d || alpha[alpha[d]] != d) {
            return Err(MapError::BadAlpha);
        }
        if edge_twists.len() != n / 2 {
            return Err(MapError::TwistCount { got: edge_twists.len(), edges: n / 2 });
        }
        if mode == Mode::Ribbon && edge_twists.iter().any(|&t| t) {
            return Err(MapError::RibbonTwisted);
        }
        let mut twist = vec![false; n];
        for (e, d) in (0..n).filter(|&d| d < alpha[d]).enumerate() {
            twist[d] = edge_twists[e];
            twist[alpha[d]] = edge_twists[e];
        }
        Ok(MapGraph { sigma, alpha, twist, mode, isolated: 0 })
    }

    pub fn with_isolated(mut self, count: usize) -> Self {
        self.isolated = count;
        self
    }

    /// A graph with no darts and `count` isolated vertices.
    pub fn isolated_only(count: usize, mode: Mode) -> Self {
        MapGraph { sigma: Vec::new(), alpha: Vec::new(), twist: Vec::new(), mode, isolated: count }
    }

    pub fn darts(&self) -> usize {
        self.sigma.len()
    }

    pub fn sigma(&self, d: usize) -> usize {
        self.sigma[d]
    }

    pub fn alpha(&self, d: usize) -> usize {
        self.alpha[d]
    }

    pub fn is_twisted(&self, d: usize) -> bool {
        self.twist[d]
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn isolated_vertices(&self) -> usize {
        self.isolated
    }

    pub fn sigma_perm(&self) -> &[usize] {
        &self.sigma
    }

    pub fn alpha_perm(&self) -> &[usize] {
        &self.alpha
    }

    /// Lower darts of the edges, ascending.
    pub fn edges(&self) -> Vec<usize> {
        (0..self.darts()).filter(|&d| d < self.alpha[d]).collect()
    }

    pub fn edge_twists(&self) -> Vec<bool> {
        self.edges().into_iter().map(|d| self.twist[d]).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.darts() / 2
    }

    pub fn has_twists(&self) -> bool {
        self.twist.iter().any(|&t| t)
    }

    /// Vertex cycles starting at their least dart, ordered by that dart.
    /// Isolated vertices are not listed.
    pub fn vertices(&self) -> Vec<Vec<usize>> {
        let n = self.darts();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for d in 0..n {
            if seen[d] {
                continue;
            }
            let mut cycle = vec![d];
            seen[d] = true;
            let mut x = self.sigma[d];
            while x != d {
                seen[x] = true;
                cycle.push(x);
                x = self.sigma[x];
            }
            out.push(cycle);
        }
        out
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices().len() + self.isolated
    }

    /// Index into [`Self::vertices`] for each dart.
    pub fn vertex_of(&self) -> Vec<usize> {
        let mut v = vec![0; self.darts()];
        for (i, cycle) in self.vertices().iter().enumerate() {
            for &d in cycle {
                v[d] = i;
            }
        }
        v
    }

    /// `v_j` counts, index `j - 1`, trimmed to the largest degree present.
    pub fn degree_vector(&self) -> Vec<usize> {
        let mut v = Vec::new();
        for cycle in self.vertices() {
            let j = cycle.len();
            if v.len() < j {
                v.resize(j, 0);
            }
            v[j - 1] += 1;
        }
        v
    }

    /// Dart sets of connected components, ordered by least dart.
    pub fn dart_components(&self) -> Vec<Vec<usize>> {
        let n = self.darts();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut i = 0;
            while i < members.len() {
                let x = members[i];
                for y in [self.sigma[x], self.alpha[x]] {
                    if comp[y] == usize::MAX {
                        comp[y] = id;
                        members.push(y);
                    }
                }
                i += 1;
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn component_count(&self) -> usize {
        self.dart_components().len() + self.isolated
    }

    /// The empty graph counts as disconnected (it has no component).
    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Boundary walks as flag sequences. Flags are glued by the corner
    /// involution `(d,+) ~ (sigma d, -)` and the edge involution
    /// `(d,s) ~ (alpha d, -s)`, or `(alpha d, s)` across a twisted edge.
    /// Each isolated vertex contributes one empty walk.
    pub fn faces(&self) -> Vec<Vec<Flag>> {
        let n = self.darts();
        let sinv = invert_perm(&self.sigma);
        let idx = |(d, minus): Flag| 2 * d + minus as usize;
        let corner = |(d, minus): Flag| if minus { (sinv[d], false) } else { (self.sigma[d], true) };
        let edge = |(d, minus): Flag| (self.alpha[d], minus ^ !self.twist[d]);
        let mut seen = vec![false; 2 * n];
        let mut walks = Vec::new();
        for start in 0..2 * n {
            if seen[start] {
                continue;
            }
            let first: Flag = (start / 2, start % 2 == 1);
            let mut walk = Vec::new();
            let mut f = first;
            loop {
                seen[idx(f)] = true;
                walk.push(f);
                let g = edge(f);
                seen[idx(g)] = true;
                walk.push(g);
                f = corner(g);
                if f == first {
                    break;
                }
            }
            walks.push(walk);
        }
        walks.extend(std::iter::repeat_with(Vec::new).take(self.isolated));
        walks
    }

    pub fn face_count(&self) -> usize {
        self.faces().len()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64 + self.face_count() as i64
    }

    /// Per-vertex flips that untwist every edge, if one exists.
    pub fn orientation(&self) -> Option<Vec<bool>> {
        let vof = self.vertex_of();
        let verts = self.vertices();
        let mut flip: Vec<Option<bool>> = vec![None; verts.len()];
        for root in 0..verts.len() {
            if flip[root].is_some() {
                continue;
            }
            flip[root] = Some(false);
            let mut queue = VecDeque::from([root]);
            while let Some(u) = queue.pop_front() {
                let fu = flip[u].expect("visited");
                for &d in &verts[u] {
                    let w = vof[self.alpha[d]];
                    let want = fu ^ self.twist[d];
                    match flip[w] {
                        None => {
                            flip[w] = Some(want);
                            queue.push_back(w);
                        }
                        Some(fw) if fw != want => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(flip.into_iter().map(|f| f.expect("all visited")).collect())
    }

    pub fn is_orientable(&self) -> bool {
        self.orientation().is_some()
    }

    pub fn topological_type(&self) -> Result<TopType, MapError> {
        if !self.is_connected() {
            return Err(if self.component_count() == 0 { MapError::Empty } else { MapError::Disconnected });
        }
        let chi = self.euler_characteristic();
        let faces = self.face_count() as u32;
        Ok(if self.is_orientable() {
            TopType { orientable: true, genus_or_crosscaps: ((2 - chi) / 2) as u32, faces }
        } else {
            TopType { orientable: false, genus_or_crosscaps: (2 - chi) as u32, faces }
        })
    }

    fn flip_cycle(&self, cycle: &[usize]) -> MapGraph {
        let sinv = invert_perm(&self.sigma);
        let mut g = self.clone();
        let mut inside = vec![false; self.darts()];
        for &x in cycle {
            inside[x] = true;
        }
        for &x in cycle {
            g.sigma[x] = sinv[x];
            if !inside[self.alpha[x]] {
                g.twist[x] = !g.twist[x];
                let y = self.alpha[x];
                g.twist[y] = !g.twist[y];
            }
        }
        g
    }

    /// Reverses the cyclic order at vertex `v` (an index into
    /// [`Self::vertices`]) and toggles the twist of each incident non-loop edge.
    pub fn flip_vertex(&self, v: usize) -> Result<MapGraph, MapError> {
        if self.mode != Mode::Moebius {
            return Err(MapError::WrongMode(Mode::Moebius));
        }
        let verts = self.vertices();
        let cycle = verts.get(v).ok_or(MapError::NoSuchVertex(v))?;
        Ok(self.flip_cycle(cycle))
    }

    /// Flips vertices to remove all twists and relabels as a ribbon graph.
    pub fn to_ribbon(&self) -> Result<MapGraph, MapError> {
        let flips = self.orientation().ok_or(MapError::NotOrientable)?;
        let mut g = self.clone();
        for (cycle, flip) in self.vertices().iter().zip(flips) {
            if flip {
                g = g.flip_cycle(cycle);
            }
        }
        debug_assert!(!g.has_twists());
        g.mode = Mode::Ribbon;
        Ok(g)
    }

    pub fn as_moebius(&self) -> MapGraph {
        let mut g = self.clone();
        g.mode = Mode::Moebius;
        g
    }

    /// The mirror ribbon graph: every cyclic order reversed.
    pub fn mirror(&self) -> MapGraph {
        let mut g = self.clone();
        g.sigma = invert_perm(&self.sigma);
        g
    }

    /// Contracts the edge at dart `d`, flipping one endpoint first if the
    /// edge is twisted. Contracting a lone edge leaves an isolated vertex.
    pub fn contract_edge(&self, d: usize) -> Result<MapGraph, MapError> {
        if d >= self.darts() {
            return Err(MapError::NoSuchEdge(d));
        }
        let a = d;
        let b = self.alpha[d];
        let vof = self.vertex_of();
        if vof[a] == vof[b] {
            return Err(MapError::LoopEdge(a.min(b)));
        }
        let g = if self.twist[a] { self.flip_vertex(vof[b])? } else { self.clone() };
        let sinv = invert_perm(&g.sigma);
        let mut sigma = g.sigma.clone();
        let mut isolated = g.isolated;
        match (g.sigma[a] == a, g.sigma[b] == b) {
            (true, true) => isolated += 1,
            (true, false) => sigma[sinv[b]] = g.sigma[b],
            (false, true) => sigma[sinv[a]] = g.sigma[a],
            (false, false) => {
                sigma[sinv[a]] = g.sigma[b];
                sigma[sinv[b]] = g.sigma[a];
            }
        }
        let keep: Vec<usize> = (0..g.darts()).filter(|&x| x != a && x != b).collect();
        let mut new_index = vec![usize::MAX; g.darts()];
        for (i, &x) in keep.iter().enumerate() {
            new_index[x] = i;
        }
        Ok(MapGraph {
            sigma: keep.iter().map(|&x| new_index[sigma[x]]).collect(),
            alpha: keep.iter().map(|&x| new_index[g.alpha[x]]).collect(),
            twist: keep.iter().map(|&x| g.twist[x]).collect(),
            mode: g.mode,
            isolated,
        })
    }

    /// `|Aut_R|` in ribbon mode, `|Aut_M|` in Möbius mode.
    pub fn aut_order(&self) -> u64 {
        match self.mode {
            Mode::Ribbon => self.count_flag_automorphisms(false),
            Mode::Moebius => self.count_flag_automorphisms(true),
        }
    }

    /// Dart permutations commuting with sigma and alpha.
    pub fn aut_order_ribbon(&self) -> Result<u64, MapError> {
        if self.mode != Mode::Ribbon {
            return Err(MapError::WrongMode(Mode::Ribbon));
        }
        Ok(self.count_flag_automorphisms(false))
    }

    /// Signed-dart bijections commuting with rotation, edge crossing and the
    /// side swap.
    pub fn aut_order_moebius(&self) -> Result<u64, MapError> {
        if self.mode != Mode::Moebius {
            return Err(MapError::WrongMode(Mode::Moebius));
        }
        Ok(self.count_flag_automorphisms(true))
    }

    fn flag_ops(&self, signed: bool) -> (usize, Vec<Vec<usize>>) {
        let n = self.darts();
        let sinv = invert_perm(&self.sigma);
        if !signed {
            return (n, vec![self.sigma.clone(), sinv, self.alpha.clone()]);
        }
        // flag 2d + s, s = 1 for the minus side
        let rho: Vec<usize> =
            (0..2 * n).map(|f| if f % 2 == 0 { 2 * self.sigma[f / 2] } else { 2 * sinv[f / 2] + 1 }).collect();
        let rho_inv = invert_perm(&rho);
        let eps: Vec<usize> = (0..2 * n).map(|f| 2 * self.alpha[f / 2] + ((f % 2 == 1) ^ self.twist[f / 2]) as usize).collect();
        let mirror: Vec<usize> = (0..2 * n).map(|f| f ^ 1).collect();
        (2 * n, vec![rho, rho_inv, eps, mirror])
    }

    fn count_flag_automorphisms(&self, signed: bool) -> u64 {
        let (n, ops) = self.flag_ops(signed);
        // one base flag per orbit of the generated group
        let mut orbit = vec![usize::MAX; n];
        let mut bases = Vec::new();
        for f in 0..n {
            if orbit[f] != usize::MAX {
                continue;
            }
            orbit[f] = bases.len();
            let mut stack = vec![f];
            while let Some(x) = stack.pop() {
                for op in &ops {
                    if orbit[op[x]] == usize::MAX {
                        orbit[op[x]] = bases.len();
                        stack.push(op[x]);
                    }
                }
            }
            bases.push(f);
        }
        let mut image = vec![usize::MAX; n];
        let mut used = vec![false; n];
        let count = count_extensions(&ops, &bases, &mut image, &mut used);
        count * factorial(self.isolated as u64)
    }

    /// Canonical form: least encoding over all BFS relabelings, componentwise.
    pub fn canonical_form(&self) -> CanonicalForm {
        let mut parts: Vec<Vec<u16>> =
            self.dart_components().iter().map(|c| self.component_encoding(c[0], c).0).collect();
        parts.sort();
        let mut code = vec![self.mode as u16, self.isolated as u16];
        for p in parts {
            code.push(p.len() as u16);
            code.extend(p);
        }
        CanonicalForm(code)
    }

    /// For a connected graph with darts, the number of starts achieving the
    /// least encoding. Equals the automorphism count.
    pub fn minimizing_starts(&self) -> Result<usize, MapError> {
        if !self.is_connected() || self.darts() == 0 {
            return Err(MapError::Disconnected);
        }
        let all: Vec<usize> = (0..self.darts()).collect();
        Ok(self.component_encoding(0, &all).1)
    }

    fn component_encoding(&self, _base: usize, darts: &[usize]) -> (Vec<u16>, usize) {
        let sides: &[bool] = match self.mode {
            Mode::Ribbon => &[false],
            Mode::Moebius => &[false, true],
        };
        let sinv = invert_perm(&self.sigma);
        let mut best: Option<Vec<u16>> = None;
        let mut ties = 0;
        for &d0 in darts {
            for &s0 in sides {
                let code = self.encode_from(d0, s0, darts.len(), &sinv);
                match &best {
                    Some(b) if code > *b => {}
                    Some(b) if code == *b => ties += 1,
                    _ => {
                        best = Some(code);
                        ties = 1;
                    }
                }
            }
        }
        (best.unwrap_or_default(), ties)
    }

    fn encode_from(&self, d0: usize, s0: bool, size: usize, sinv: &[usize]) -> Vec<u16> {
        let n = self.darts();
        let mut label = vec![usize::MAX; n];
        let mut reversed = vec![false; n];
        let mut order = Vec::with_capacity(size);
        let step = |x: usize, rev: bool| if rev { sinv[x] } else { self.sigma[x] };
        let visit = |entry: usize, rev: bool, label: &mut [usize], reversed: &mut [bool], order: &mut Vec<usize>| {
            let mut x = entry;
            loop {
                label[x] = order.len();
                reversed[x] = rev;
                order.push(x);
                x = step(x, rev);
                if x == entry {
                    break;
                }
            }
        };
        visit(d0, s0, &mut label, &mut reversed, &mut order);
        let mut i = 0;
        while i < order.len() {
            let x = order[i];
            let y = self.alpha[x];
            if label[y] == usize::MAX {
                let rev = reversed[x] ^ self.twist[x];
                visit(y, rev, &mut label, &mut reversed, &mut order);
            }
            i += 1;
        }
        let mut code = Vec::with_capacity(3 * size);
        code.extend(order.iter().map(|&x| label[step(x, reversed[x])] as u16));
        code.extend(order.iter().map(|&x| label[self.alpha[x]] as u16));
        code.extend(
            order.iter().map(|&x| (self.twist[x] ^ reversed[x] ^ reversed[self.alpha[x]]) as u16),
        );
        code
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn count_extensions(ops: &[Vec<usize>], bases: &[usize], image: &mut [usize], used: &mut [bool]) -> u64 {
    let Some((&base, rest)) = bases.split_first() else {
        return 1;
    };
    let n = image.len();
    let mut total = 0;
    for target in 0..n {
        if used[target] {
            continue;
        }
        let mut assigned = Vec::new();
        if propagate(ops, base, target, image, used, &mut assigned) {
            total += count_extensions(ops, rest, image, used);
        }
        for x in assigned {
            used[image[x]] = false;
            image[x] = usize::MAX;
        }
    }
    total
}

fn propagate(
    ops: &[Vec<usize>],
    base: usize,
    target: usize,
    image: &mut [usize],
    used: &mut [bool],
    assigned: &mut Vec<usize>,
) -> bool {
    let mut stack = vec![(base, target)];
    while let Some((x, y)) = stack.pop() {
        if image[x] != usize::MAX {
            if image[x] != y {
                return false;
            }
            continue;
        }
        if used[y] {
            return false;
        }
        image[x] = y;
        used[y] = true;
        assigned.push(x);
        for op in ops {
            stack.push((op[x], op[y]));
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalForm(pub Vec<u16>);

impl fmt::Display for CanonicalForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u16::to_string).collect();
        f.write_str(&parts.join("."))
    }
}

/// One-vertex graph `p1 q1 p1' q1' ... r1 r1' ...` of type `(g, f)`.
pub fn standard_orientable(g: u32, f: u32) -> Result<MapGraph, MapError> {
    if f == 0 || (g == 0 && f == 1) {
        return Err(MapError::NoStandardGraph(format!("or(g={g},f={f})")));
    }
    let (g, f) = (g as usize, f as usize);
    let n = 4 * g + 2 * (f - 1);
    let sigma = (0..n).map(|d| (d + 1) % n).collect();
    let mut alpha = vec![0; n];
    for i in 0..g {
        let b = 4 * i;
        alpha[b] = b + 2;
        alpha[b + 2] = b;
        alpha[b + 1] = b + 3;
        alpha[b + 3] = b + 1;
    }
    for m in 0..f - 1 {
        let b = 4 * g + 2 * m;
        alpha[b] = b + 1;
        alpha[b + 1] = b;
    }
    MapGraph::new(sigma, alpha, vec![false; n / 2], Mode::Ribbon)
}

/// One-vertex graph `s1 s1' ... sk sk' r1 r1' ...` with twisted s-loops.
pub fn standard_nonorientable(k: u32, f: u32) -> Result<MapGraph, MapError> {
    if k == 0 || f == 0 {
        return Err(MapError::NoStandardGraph(format!("nor(k={k},f={f})")));
    }
    let (k, f) = (k as usize, f as usize);
    let n = 2 * (k + f - 1);
    let sigma = (0..n).map(|d| (d + 1) % n).collect();
    let alpha = (0..n).map(|d| d ^ 1).collect();
    let twists = (0..n / 2).map(|e| e < k).collect();
    MapGraph::new(sigma, alpha, twists, Mode::Moebius)
}

/// A fully labeled Wick configuration: vertices with fixed cyclic orders,
/// a perfect matching of darts, and per-edge twist bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    /// degree of each vertex, ascending
    pub degrees: Vec<usize>,
    pub matching: Vec<usize>,
    /// per edge, ordered by lower dart
    pub twists: Vec<bool>,
}

impl Configuration {
    pub fn to_graph(&self, mode: Mode) -> MapGraph {
        let n = self.matching.len();
        let mut sigma = Vec::with_capacity(n);
        let mut start = 0;
        for &j in &self.degrees {
            sigma.extend((0..j).map(|p| start + (p + 1) % j));
            start += j;
        }
        let twists = if self.twists.is_empty() { vec![false; n / 2] } else { self.twists.clone() };
        MapGraph::new(sigma, self.matching.clone(), twists, mode).expect("configuration encodes a valid graph")
    }
}

/// Vertex degrees in order for a `v_j` vector (index `j - 1`).
pub fn degrees_of(degree_sequence: &[usize]) -> Vec<usize> {
    degree_sequence.iter().enumerate().flat_map(|(i, &v)| std::iter::repeat(i + 1).take(v)).collect()
}

pub fn weighted_degree(degree_sequence: &[usize]) -> usize {
    degree_sequence.iter().enumerate().map(|(i, &v)| (i + 1) * v).sum()
}

/// Lazy stream over all labeled configurations. Matchings always pair the
/// smallest unmatched dart first; twist masks vary fastest.
pub struct Configurations {
    degrees: Vec<usize>,
    n: usize,
    choices: Vec<usize>,
    twist_mask: u64,
    with_twists: bool,
    done: bool,
}

pub fn enumerate_configurations(degree_sequence: &[usize], with_twists: bool) -> Configurations {
    let degrees = degrees_of(degree_sequence);
    let n: usize = degrees.iter().sum();
    Configurations { degrees, n, choices: vec![0; n / 2], twist_mask: 0, with_twists, done: n % 2 == 1 }
}

impl Configurations {
    fn matching(&self) -> Vec<usize> {
        let mut free: Vec<usize> = (0..self.n).collect();
        let mut m = vec![0; self.n];
        for &c in &self.choices {
            let a = free.remove(0);
            let b = free.remove(c);
            m[a] = b;
            m[b] = a;
        }
        m
    }

    fn advance_matching(&mut self) -> bool {
        for t in (0..self.choices.len()).rev() {
            let radix = self.n - 2 * t - 1;
            if self.choices[t] + 1 < radix {
                self.choices[t] += 1;
                return true;
            }
            self.choices[t] = 0;
        }
        false
    }
}

impl Iterator for Configurations {
    type Item = Configuration;

    fn next(&mut self) -> Option<Configuration> {
        if self.done {
            return None;
        }
        let e = self.n / 2;
        let twists: Vec<bool> = if self.with_twists {
            (0..e).map(|i| (self.twist_mask >> i) & 1 == 1).collect()
        } else {
            vec![false; e]
        };
        let item = Configuration { degrees: self.degrees.clone(), matching: self.matching(), twists };
        if self.with_twists && self.twist_mask + 1 < (1u64 << e) {
            self.twist_mask += 1;
        } else {
            self.twist_mask = 0;
            if !self.advance_matching() {
                self.done = true;
            }
        }
        Some(item)
    }
}

/// Uniformly random labeled configuration on the given degree sequence.
pub fn random_configuration<R: Rng>(rng: &mut R, degree_sequence: &[usize], with_twists: bool) -> Option<Configuration> {
    let degrees = degrees_of(degree_sequence);
    let n: usize = degrees.iter().sum();
    if n % 2 == 1 {
        return None;
    }
    let mut darts: Vec<usize> = (0..n).collect();
    darts.shuffle(rng);
    let mut matching = vec![0; n];
    for pair in darts.chunks(2) {
        matching[pair[0]] = pair[1];
        matching[pair[1]] = pair[0];
    }
    let twists = (0..n / 2).map(|_| with_twists && rng.gen_bool(0.5)).collect();
    Some(Configuration { degrees, matching, twists })
}

#[derive(Debug, Clone)]
pub struct ClassRecord {
    pub form: CanonicalForm,
    pub representative: MapGraph,
    pub labeled_count: u64,
    pub connected: bool,
    pub aut: u64,
}

/// Groups configurations by isomorphism class, sorted by canonical form.
pub fn classify<I: IntoIterator<Item = Configuration>>(configs: I, mode: Mode) -> Vec<ClassRecord> {
    let mut classes: BTreeMap<CanonicalForm, (MapGraph, u64)> = BTreeMap::new();
    for c in configs {
        let g = c.to_graph(mode);
        classes.entry(g.canonical_form()).or_insert_with(|| (g, 0)).1 += 1;
    }
    classes
        .into_iter()
        .map(|(form, (g, count))| ClassRecord {
            connected: g.is_connected(),
            aut: g.aut_order(),
            form,
            representative: g,
            labeled_count: count,
        })
        .collect()
}

/// `prod_j v_j! j^{v_j}` (ribbon) or `prod_j v_j! (2j)^{v_j}` (Möbius).
pub fn labeled_group_order(degree_sequence: &[usize], mode: Mode) -> u64 {
    degree_sequence
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let j = (i + 1) as u64 * if mode == Mode::Moebius { 2 } else { 1 };
            factorial(v as u64) * j.pow(v as u32)
        })
        .product()
}

/// All `v_j` vectors (length `w`) with weighted degree at most `w`,
/// in lexicographic order. Includes the empty sequence.
pub fn degree_sequences(w: usize) -> Vec<Vec<usize>> {
    fn rec(j: usize, w: usize, budget: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if j > w {
            out.push(cur.clone());
            return;
        }
        for v in 0..=budget / j {
            cur.push(v);
            rec(j + 1, w, budget - v * j, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, w, w, &mut Vec::new(), &mut out);
    out
}

/// Graph file format.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub darts: usize,
    pub sigma: Vec<usize>,
    pub alpha: Vec<usize>,
    pub twist: Vec<u8>,
    pub mode: Mode,
    #[serde(default)]
    pub isolated: usize,
}

impl MapGraph {
    pub fn from_json(j: &GraphJson) -> Result<Self, MapError> {
        if j.sigma.len() != j.darts || j.alpha.len() != j.darts {
            return Err(MapError::Malformed(format!("expected {} darts", j.darts)));
        }
        if let Some(t) = j.twist.iter().find(|&&t| t > 1) {
            return Err(MapError::Malformed(format!("twist value {t}")));
        }
        let twists = j.twist.iter().map(|&t| t == 1).collect();
        Ok(MapGraph::new(j.sigma.clone(), j.alpha.clone(), twists, j.mode)?.with_isolated(j.isolated))
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            darts: self.darts(),
            sigma: self.sigma.clone(),
            alpha: self.alpha.clone(),
            twist: self.edge_twists().into_iter().map(u8::from).collect(),
            mode: self.mode,
            isolated: self.isolated,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn loop_graph(twisted: bool) -> MapGraph {
        let mode = if twisted { Mode::Moebius } else { Mode::Ribbon };
        MapGraph::new(vec![1, 0], vec![1, 0], vec![twisted], mode).unwrap()
    }

    fn single_edge() -> MapGraph {
        MapGraph::new(vec![0, 1], vec![1, 0], vec![false], Mode::Ribbon).unwrap()
    }

    fn torus() -> MapGraph {
        MapGraph::new(vec![1, 2, 3, 0], vec![2, 3, 0, 1], vec![false, false], Mode::Ribbon).unwrap()
    }

    /// Two loops joined by a bridge: vertex A = (0 1 2), vertex B = (3 4 5),
    /// loops (0 1), (4 5), bridge (2 3).
    fn dumbbell(mode: Mode, bridge_twist: bool) -> MapGraph {
        MapGraph::new(vec![1, 2, 0, 4, 5, 3], vec![1, 0, 3, 2, 5, 4], vec![false, bridge_twist, false], mode)
            .unwrap()
    }

    #[test]
    fn rejects_invalid_data() {
        assert_eq!(MapGraph::new(vec![0, 0], vec![1, 0], vec![false], Mode::Ribbon), Err(MapError::BadSigma));
        assert_eq!(MapGraph::new(vec![0, 1], vec![0, 1], vec![false], Mode::Ribbon), Err(MapError::BadAlpha));
        assert_eq!(MapGraph::new(vec![0], vec![0], vec![], Mode::Ribbon), Err(MapError::BadAlpha));
        assert_eq!(MapGraph::new(vec![1, 0], vec![1, 0], vec![true], Mode::Ribbon), Err(MapError::RibbonTwisted));
    }

    #[test]
    fn face_examples() {
        assert_eq!(loop_graph(false).face_count(), 2);
        assert_eq!(loop_graph(true).face_count(), 1);
        assert_eq!(single_edge().face_count(), 1);
        assert_eq!(torus().face_count(), 1);
    }

    #[test]
    fn twist_free_faces_are_cycles_of_sigma_alpha() {
        for cfg in enumerate_configurations(&[0, 1, 0, 1], false) {
            let g = cfg.to_graph(Mode::Ribbon);
            let composed: Vec<usize> = (0..g.darts()).map(|d| g.sigma(g.alpha(d))).collect();
            let cycles = MapGraph::new(composed, g.alpha_perm().to_vec(), vec![false; g.edge_count()], Mode::Ribbon)
                .unwrap()
                .vertices()
                .len();
            assert_eq!(g.face_count(), cycles);
        }
    }

    #[test]
    fn topological_type_examples() {
        let sphere = TopType { orientable: true, genus_or_crosscaps: 0, faces: 2 };
        assert_eq!(loop_graph(false).topological_type().unwrap(), sphere);
        let rp2 = TopType { orientable: false, genus_or_crosscaps: 1, faces: 1 };
        assert_eq!(loop_graph(true).topological_type().unwrap(), rp2);
        let t = torus().topological_type().unwrap();
        assert_eq!((t.orientable, t.genus_or_crosscaps, t.faces), (true, 1, 1));
        let two_edges = MapGraph::new(vec![0, 1, 2, 3], vec![1, 0, 3, 2], vec![false, false], Mode::Ribbon).unwrap();
        assert_eq!(two_edges.topological_type(), Err(MapError::Disconnected));
    }

    #[test]
    fn flip_examples() {
        let g = dumbbell(Mode::Moebius, false);
        let f = g.flip_vertex(0).unwrap();
        assert!(f.is_twisted(2) && f.is_twisted(3));
        assert!(!f.is_twisted(0));
        assert_eq!(f.flip_vertex(0).unwrap(), g);
        let t = loop_graph(true);
        assert!(t.flip_vertex(0).unwrap().is_twisted(0));
        assert_eq!(loop_graph(false).flip_vertex(0), Err(MapError::WrongMode(Mode::Moebius)));
        assert_eq!(g.flip_vertex(7), Err(MapError::NoSuchVertex(7)));
    }

    #[test]
    fn contraction_examples() {
        let g = dumbbell(Mode::Ribbon, false);
        let c = g.contract_edge(2).unwrap();
        assert_eq!(c.vertex_count(), 1);
        assert_eq!(c.edge_count(), 2);
        assert_eq!(c.face_count(), g.face_count());
        assert_eq!(c.topological_type().unwrap(), g.topological_type().unwrap());
        let twisted = dumbbell(Mode::Moebius, true);
        let ct = twisted.contract_edge(3).unwrap();
        assert_eq!(ct.canonical_form(), c.as_moebius().canonical_form());
        assert_eq!(g.contract_edge(0), Err(MapError::LoopEdge(0)));
        let iso = single_edge().contract_edge(0).unwrap();
        assert_eq!((iso.darts(), iso.vertex_count(), iso.face_count()), (0, 1, 1));
        assert_eq!(iso.topological_type().unwrap(), TopType { orientable: true, genus_or_crosscaps: 0, faces: 1 });
    }

    #[test]
    fn automorphism_examples() {
        assert_eq!(loop_graph(false).aut_order_ribbon(), Ok(2));
        assert_eq!(torus().aut_order_ribbon(), Ok(4));
        let petals = MapGraph::new(vec![1, 2, 3, 0], vec![1, 0, 3, 2], vec![false, false], Mode::Ribbon).unwrap();
        assert_eq!(petals.aut_order_ribbon(), Ok(2));
        assert_eq!(loop_graph(false).as_moebius().aut_order_moebius(), Ok(4));
        assert_eq!(loop_graph(true).aut_order_moebius(), Ok(4));
        assert_eq!(single_edge().aut_order_ribbon(), Ok(2));
        assert_eq!(loop_graph(true).aut_order_ribbon(), Err(MapError::WrongMode(Mode::Ribbon)));
    }

    #[test]
    fn standard_graphs() {
        assert_eq!(standard_orientable(1, 1).unwrap(), torus());
        assert_eq!(standard_orientable(0, 2).unwrap(), loop_graph(false));
        let g2 = standard_orientable(2, 1).unwrap();
        assert_eq!((g2.darts(), g2.face_count()), (8, 1));
        assert!(standard_orientable(0, 1).is_err());
        for g in 0..3 {
            for f in 1..4 {
                if let Ok(s) = standard_orientable(g, f) {
                    assert_eq!(s.topological_type().unwrap(), TopType { orientable: true, genus_or_crosscaps: g, faces: f });
                }
            }
        }
        assert_eq!(standard_nonorientable(1, 1).unwrap(), loop_graph(true));
        let kb = standard_nonorientable(2, 1).unwrap();
        assert_eq!((kb.euler_characteristic(), kb.face_count()), (0, 1));
        let s12 = standard_nonorientable(1, 2).unwrap();
        assert_eq!((s12.euler_characteristic(), s12.face_count()), (1, 2));
        assert!(standard_nonorientable(0, 1).is_err());
        for k in 1..5 {
            for f in 1..4 {
                let s = standard_nonorientable(k, f).unwrap();
                assert_eq!(s.topological_type().unwrap(), TopType { orientable: false, genus_or_crosscaps: k, faces: f });
            }
        }
    }

    #[test]
    fn configuration_counts() {
        assert_eq!(enumerate_configurations(&[0, 1], false).count(), 1);
        assert_eq!(enumerate_configurations(&[0, 0, 0, 1], false).count(), 3);
        assert_eq!(enumerate_configurations(&[0, 1], true).count(), 2);
        assert_eq!(enumerate_configurations(&[0, 0, 1], false).count(), 0);
        assert_eq!(enumerate_configurations(&[2, 0, 0, 0, 0, 1], false).count(), 105);
        assert_eq!(enumerate_configurations(&[0, 0, 0, 0, 0, 0, 0, 1], true).count(), 105 * 16);
        assert_eq!(enumerate_configurations(&[], false).count(), 1);
    }

    #[test]
    fn classify_examples() {
        let classes = classify(enumerate_configurations(&[0, 0, 0, 1], false), Mode::Ribbon);
        assert_eq!(classes.len(), 2);
        let mut summary: Vec<(u64, u64, u32)> = classes
            .iter()
            .map(|c| (c.labeled_count, c.aut, c.representative.topological_type().unwrap().genus_or_crosscaps))
            .collect();
        summary.sort();
        assert_eq!(summary, vec![(1, 4, 1), (2, 2, 0)]);

        let loops = classify(enumerate_configurations(&[0, 1], true), Mode::Moebius);
        assert_eq!(loops.len(), 2);
        assert!(loops.iter().all(|c| c.labeled_count == 1 && c.aut == 4));

        let edge = classify(enumerate_configurations(&[2], false), Mode::Ribbon);
        assert_eq!(edge.len(), 1);
        assert_eq!(edge[0].labeled_count * edge[0].aut, labeled_group_order(&[2], Mode::Ribbon));
    }

    #[test]
    fn orbit_stabilizer_small() {
        for mode in [Mode::Ribbon, Mode::Moebius] {
            for seq in degree_sequences(6) {
                let total = labeled_group_order(&seq, mode);
                for c in classify(enumerate_configurations(&seq, mode == Mode::Moebius), mode) {
                    assert_eq!(c.labeled_count * c.aut, total, "{seq:?} {mode}");
                }
            }
        }
    }

    #[test]
    fn minimizing_starts_equal_aut() {
        for mode in [Mode::Ribbon, Mode::Moebius] {
            for seq in degree_sequences(6) {
                for c in classify(enumerate_configurations(&seq, mode == Mode::Moebius), mode) {
                    if c.connected {
                        assert_eq!(c.representative.minimizing_starts().unwrap() as u64, c.aut);
                    }
                }
            }
        }
    }

    #[test]
    fn aut_dichotomy() {
        for seq in degree_sequences(6) {
            for c in classify(enumerate_configurations(&seq, true), Mode::Moebius) {
                if !c.connected {
                    continue;
                }
                let Ok(r) = c.representative.to_ribbon() else { continue };
                let ar = r.aut_order();
                let self_mirror = r.canonical_form() == r.mirror().canonical_form();
                assert_eq!(c.aut, if self_mirror { 2 * ar } else { ar }, "{seq:?}");
            }
        }
    }

    #[test]
    fn degree_sequence_listing() {
        let seqs = degree_sequences(3);
        assert_eq!(seqs.len(), 7);
        assert!(seqs.iter().all(|s| weighted_degree(s) <= 3));
    }

    #[test]
    fn json_roundtrip() {
        let g = dumbbell(Mode::Moebius, true).with_isolated(1);
        let back = MapGraph::from_json(&serde_json::from_str(&serde_json::to_string(&g.to_json()).unwrap()).unwrap());
        assert_eq!(back.unwrap(), g);
    }

    fn random_graph(seed: u64, mode: Mode) -> MapGraph {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        loop {
            let seq: Vec<usize> = (0..4).map(|_| rng.gen_range(0..3)).collect();
            let w = weighted_degree(&seq);
            if w == 0 || w > 10 {
                continue;
            }
            if let Some(c) = random_configuration(&mut rng, &seq, mode == Mode::Moebius) {
                return c.to_graph(mode);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn euler_and_flip_invariance(seed in any::<u64>(), v in 0usize..8) {
            let g = random_graph(seed, Mode::Moebius);
            let v = v % g.vertices().len();
            let f = g.flip_vertex(v).unwrap();
            prop_assert_eq!(f.flip_vertex(v).unwrap(), g.clone());
            prop_assert_eq!(f.face_count(), g.face_count());
            prop_assert_eq!(f.aut_order(), g.aut_order());
            prop_assert_eq!(f.canonical_form(), g.canonical_form());
            if g.is_connected() {
                let t = g.topological_type().unwrap();
                prop_assert_eq!(t.euler_characteristic(), g.euler_characteristic());
                prop_assert_eq!(f.topological_type().unwrap(), t);
            }
        }

        #[test]
        fn contraction_preserves_type(seed in any::<u64>(), pick in any::<usize>(), moebius in any::<bool>()) {
            let mode = if moebius { Mode::Moebius } else { Mode::Ribbon };
            let g = random_graph(seed, mode);
            let vof = g.vertex_of();
            let bridges: Vec<usize> = g.edges().into_iter().filter(|&d| vof[d] != vof[g.alpha(d)]).collect();
            prop_assume!(!bridges.is_empty());
            let d = bridges[pick % bridges.len()];
            let c = g.contract_edge(d).unwrap();
            prop_assert_eq!(c.face_count(), g.face_count());
            prop_assert_eq!(c.component_count(), g.component_count());
            prop_assert_eq!(c.euler_characteristic(), g.euler_characteristic());
            if g.is_connected() {
                prop_assert_eq!(c.topological_type().unwrap(), g.topological_type().unwrap());
            }
        }

        #[test]
        fn relabeling_preserves_canonical_form(seed in any::<u64>(), moebius in any::<bool>(), perm_seed in any::<u64>()) {
            let mode = if moebius { Mode::Moebius } else { Mode::Ribbon };
            let g = random_graph(seed, mode);
            let n = g.darts();
            let mut p: Vec<usize> = (0..n).collect();
            p.shuffle(&mut ChaCha8Rng::seed_from_u64(perm_seed));
            let inv = invert_perm(&p);
            let sigma = (0..n).map(|x| p[g.sigma(inv[x])]).collect();
            let alpha = (0..n).map(|x| p[g.alpha(inv[x])]).collect::<Vec<_>>();
            let tw_dart: Vec<bool> = (0..n).map(|x| g.is_twisted(inv[x])).collect();
            let twists = (0..n).filter(|&x| x < alpha[x]).map(|x| tw_dart[x]).collect();
            let h = MapGraph::new(sigma, alpha, twists, mode).unwrap();
            prop_assert_eq!(h.canonical_form(), g.canonical_form());
            prop_assert_eq!(h.aut_order(), g.aut_order());
        }
    }
}
