//! Gaussian moments over a *-algebra by Wick pairing, and the same numbers
//! as weighted sums over ribbon and Möbius graphs.
//!
//! Both sides reduce to one primitive: a product of vertex traces summed
//! over index assignments of edge tensors ([`word_sum`]). The moment
//! oracle pairs dual-basis letters through the trace bilinear form; the
//! graph side uses Gram-inverse tensors, so the two routes share no tensor
//! data.

use std::collections::HashMap;
use std::sync::Mutex;

use rayon::prelude::*;

use crate::algebra::{AlgebraError, FieldCase, Sparse, StarAlgebra};
use crate::maps::{
    classify, degree_sequences, enumerate_configurations, labeled_group_order, CanonicalForm, MapError, MapGraph,
    Mode, TopType,
};
use crate::scalar::{Rational, Scalar};
use crate::series::TruncatedSeries;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WickError {
    #[error("moment is for a {spec} algebra but the algebra is {algebra}")]
    FieldMismatch { spec: FieldCase, algebra: FieldCase },
    #[error("twisted edges need a real algebra")]
    TwistedComplex,
    #[error("non-orientable invariants need a real algebra")]
    NonOrientableComplex,
    #[error("cross-cap number must be at least 1")]
    ZeroCrosscaps,
    #[error("face count must be at least 1")]
    ZeroFaces,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Map(#[from] MapError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeKind {
    Straight,
    Twisted,
}

/// One summand `w * x (x) y` of an edge tensor; `ends[0]` sits at the first
/// dart of the edge, `ends[1]` at the second.
#[derive(Debug, Clone)]
pub struct TensorEntry {
    pub weight: Scalar,
    pub ends: [Sparse; 2],
}

/// `sum_{j,k} (G^-1)_{jk} b_j* (x) b_k` (straight) or `... b_j* (x) b_k*`
/// (twisted).
#[derive(Debug, Clone)]
pub struct EdgeTensor {
    pub kind: EdgeKind,
    pub entries: Vec<TensorEntry>,
}

impl EdgeTensor {
    pub fn new(alg: &StarAlgebra, kind: EdgeKind) -> Result<Self, WickError> {
        let ginv = alg.gram_inverse()?;
        let n = alg.dim();
        let mut entries = Vec::new();
        for (j, row) in ginv.iter().enumerate() {
            for (k, w) in row.iter().enumerate().take(n) {
                if w.is_zero() {
                    continue;
                }
                let second = match kind {
                    EdgeKind::Straight => vec![(k, Scalar::one())],
                    EdgeKind::Twisted => alg.basis_star(k).clone(),
                };
                entries.push(TensorEntry { weight: w.clone(), ends: [alg.basis_star(j).clone(), second] });
            }
        }
        Ok(EdgeTensor { kind, entries })
    }
}

/// Covariance tensor of the oracle: `sum_{i,h} P_ih b_i^# (x) b_h^#` with
/// `P_ih = <b_i b_h>` (complex) or `<b_i b_h> + <b_i b_h*>` (real).
fn propagator_tensor(alg: &StarAlgebra) -> Result<Vec<TensorEntry>, WickError> {
    let dual = alg.dual_basis()?;
    let n = alg.dim();
    let mut entries = Vec::new();
    for i in 0..n {
        for h in 0..n {
            let mut p = alg.trace_sparse(alg.basis_product(i, h));
            if alg.field() == FieldCase::Real {
                p += alg.trace_sparse(&alg.mul_sparse(&[(i, Scalar::one())], alg.basis_star(h)));
            }
            if !p.is_zero() {
                entries.push(TensorEntry { weight: p, ends: [dual[i].clone(), dual[h].clone()] });
            }
        }
    }
    Ok(entries)
}

/// `(edge, end)` for each slot of a vertex word, in cyclic order.
pub type VertexSlots = Vec<(usize, usize)>;

/// `sum over entry choices per edge of prod(weights) * prod_v <word_v>`.
/// An empty vertex contributes `<1>`.
pub fn word_sum(alg: &StarAlgebra, vertices: &[VertexSlots], tensors: &[&[TensorEntry]]) -> Scalar {
    struct Search<'a> {
        alg: &'a StarAlgebra,
        vertices: &'a [VertexSlots],
        tensors: &'a [&'a [TensorEntry]],
        choice: Vec<Option<usize>>,
        unit_trace: Scalar,
        total: Scalar,
    }

    impl Search<'_> {
        fn run(&mut self, v: usize, slot: usize, prefix: Option<Sparse>, acc: Scalar) {
            if v == self.vertices.len() {
                self.total += &acc;
                return;
            }
            let slots = &self.vertices[v];
            if slot == slots.len() {
                let t = match &prefix {
                    None => self.unit_trace.clone(),
                    Some(p) => self.alg.trace_sparse(p),
                };
                if !t.is_zero() {
                    self.run(v + 1, 0, None, &acc * &t);
                }
                return;
            }
            let (e, end) = slots[slot];
            let extend = |alg: &StarAlgebra, letter: &Sparse| match &prefix {
                None => letter.clone(),
                Some(p) => alg.mul_sparse(p, letter),
            };
            match self.choice[e] {
                Some(c) => {
                    let next = extend(self.alg, &self.tensors[e][c].ends[end]);
                    if !next.is_empty() {
                        self.run(v, slot + 1, Some(next), acc);
                    }
                }
                None => {
                    for c in 0..self.tensors[e].len() {
                        let entry = &self.tensors[e][c];
                        let next = extend(self.alg, &entry.ends[end]);
                        if next.is_empty() {
                            continue;
                        }
                        self.choice[e] = Some(c);
                        self.run(v, slot + 1, Some(next), &acc * &entry.weight);
                    }
                    self.choice[e] = None;
                }
            }
        }
    }

    let mut s = Search {
        alg,
        vertices,
        tensors,
        choice: vec![None; tensors.len()],
        unit_trace: alg.trace(&alg.unit()),
        total: Scalar::zero(),
    };
    s.run(0, 0, None, Scalar::one());
    s.total
}

/// Degree multiset `v_j` (index `j - 1`) and field case of a moment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MomentSpec {
    pub degrees: Vec<usize>,
    pub field: FieldCase,
}

/// Evaluation context for one algebra, with tensors built once and
/// contributions cached by class and by topological type.
pub struct WickEvaluator<'a> {
    alg: &'a StarAlgebra,
    straight: EdgeTensor,
    twisted: Option<EdgeTensor>,
    propagator: Vec<TensorEntry>,
    graph_cache: Mutex<HashMap<CanonicalForm, Scalar>>,
    closed_cache: Mutex<HashMap<TopType, Scalar>>,
}

impl<'a> WickEvaluator<'a> {
    pub fn new(alg: &'a StarAlgebra) -> Result<Self, WickError> {
        let twisted = match alg.field() {
            FieldCase::Real => Some(EdgeTensor::new(alg, EdgeKind::Twisted)?),
            FieldCase::Complex => None,
        };
        Ok(WickEvaluator {
            alg,
            straight: EdgeTensor::new(alg, EdgeKind::Straight)?,
            twisted,
            propagator: propagator_tensor(alg)?,
            graph_cache: Mutex::new(HashMap::new()),
            closed_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn algebra(&self) -> &StarAlgebra {
        self.alg
    }

    fn mode(&self) -> Mode {
        match self.alg.field() {
            FieldCase::Real => Mode::Moebius,
            FieldCase::Complex => Mode::Ribbon,
        }
    }

    /// Labeled Wick sum: every perfect matching of the vertex darts,
    /// propagator per pair, vertex words in dual-basis letters.
    pub fn gaussian_moment(&self, degrees: &[usize]) -> Scalar {
        let mut total = Scalar::zero();
        for cfg in enumerate_configurations(degrees, false) {
            let n = cfg.matching.len();
            let mut edge_of = vec![(0, 0); n];
            let mut edges = 0;
            for d in 0..n {
                if d < cfg.matching[d] {
                    edge_of[d] = (edges, 0);
                    edge_of[cfg.matching[d]] = (edges, 1);
                    edges += 1;
                }
            }
            let mut vertices = Vec::with_capacity(cfg.degrees.len());
            let mut start = 0;
            for &j in &cfg.degrees {
                vertices.push((start..start + j).map(|d| edge_of[d]).collect());
                start += j;
            }
            let tensors = vec![self.propagator.as_slice(); edges];
            total += word_sum(self.alg, &vertices, &tensors);
        }
        total
    }

    pub fn graph_contribution(&self, g: &MapGraph) -> Result<Scalar, WickError> {
        let twisted = match (&self.twisted, g.has_twists()) {
            (None, true) => return Err(WickError::TwistedComplex),
            (t, _) => t,
        };
        let form = g.canonical_form();
        if let Some(v) = self.graph_cache.lock().expect("cache lock").get(&form) {
            return Ok(v.clone());
        }
        let edges = g.edges();
        let mut slot_of = vec![(0, 0); g.darts()];
        for (e, &d) in edges.iter().enumerate() {
            slot_of[d] = (e, 0);
            slot_of[g.alpha(d)] = (e, 1);
        }
        let mut vertices: Vec<VertexSlots> =
            g.vertices().iter().map(|cycle| cycle.iter().map(|&d| slot_of[d]).collect()).collect();
        vertices.extend(std::iter::repeat_with(Vec::new).take(g.isolated_vertices()));
        let tensors: Vec<&[TensorEntry]> = edges
            .iter()
            .map(|&d| match (g.is_twisted(d), twisted) {
                (true, Some(t)) => t.entries.as_slice(),
                _ => self.straight.entries.as_slice(),
            })
            .collect();
        let value = word_sum(self.alg, &vertices, &tensors);
        self.graph_cache.lock().expect("cache lock").insert(form, value.clone());
        Ok(value)
    }

    /// Surface invariant of type `(g, f)` from the word
    /// `[p1,q1]...[pg,qg] r1 r1' ... r_{f-1} r_{f-1}'`.
    pub fn closed_form_or(&self, genus: u32, faces: u32) -> Result<Scalar, WickError> {
        if faces == 0 {
            return Err(WickError::ZeroFaces);
        }
        let key = TopType { orientable: true, genus_or_crosscaps: genus, faces };
        if let Some(v) = self.closed_cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let mut slots = Vec::new();
        let mut edges = 0;
        for _ in 0..genus {
            let (p, q) = (edges, edges + 1);
            slots.extend([(p, 1), (q, 1), (p, 0), (q, 0)]);
            edges += 2;
        }
        for _ in 1..faces {
            slots.extend([(edges, 1), (edges, 0)]);
            edges += 1;
        }
        let tensors = vec![self.straight.entries.as_slice(); edges];
        let value = word_sum(self.alg, &[slots], &tensors);
        self.closed_cache.lock().expect("cache lock").insert(key, value.clone());
        Ok(value)
    }

    /// Surface invariant of type `(k, f)` from the word
    /// `s1 s1' ... sk sk' r1 r1' ...` with twisted s-pairs.
    pub fn closed_form_nor(&self, crosscaps: u32, faces: u32) -> Result<Scalar, WickError> {
        let Some(twisted) = &self.twisted else {
            return Err(WickError::NonOrientableComplex);
        };
        if crosscaps == 0 {
            return Err(WickError::ZeroCrosscaps);
        }
        if faces == 0 {
            return Err(WickError::ZeroFaces);
        }
        let key = TopType { orientable: false, genus_or_crosscaps: crosscaps, faces };
        if let Some(v) = self.closed_cache.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let mut slots = Vec::new();
        let mut tensors = Vec::new();
        for e in 0..crosscaps as usize {
            slots.extend([(e, 1), (e, 0)]);
            tensors.push(twisted.entries.as_slice());
        }
        for _ in 1..faces {
            let e = tensors.len();
            slots.extend([(e, 1), (e, 0)]);
            tensors.push(self.straight.entries.as_slice());
        }
        let value = word_sum(self.alg, &[slots], &tensors);
        self.closed_cache.lock().expect("cache lock").insert(key, value.clone());
        Ok(value)
    }

    /// `prod_j v_j! j^{v_j}` (complex) or `prod_j v_j! (2j)^{v_j}` (real).
    pub fn moment_normalizer(&self, degrees: &[usize]) -> Rational {
        Rational::from_integer(labeled_group_order(degrees, self.mode()).into())
    }

    /// `sum_v gaussian_moment(v) / normalizer(v) * t^v`.
    pub fn series_wick(&self, w: usize) -> TruncatedSeries {
        let seqs = degree_sequences(w);
        let coeffs: Vec<Scalar> = seqs
            .par_iter()
            .map(|v| self.gaussian_moment(v).scale(&(Rational::from_integer(1.into()) / self.moment_normalizer(v))))
            .collect();
        collect_series(w, &seqs, coeffs)
    }

    /// Sum over isomorphism classes of weighted degree at most `w` of
    /// `contribution / |Aut|`, optionally connected classes only.
    pub fn series_graph(&self, w: usize, connected_only: bool) -> TruncatedSeries {
        self.series_graph_scaled(w, connected_only, &Scalar::one(), &Scalar::one())
    }

    /// As [`Self::series_graph`] with an extra per-class factor
    /// `alpha^{-e} beta^{v}`.
    pub fn series_graph_scaled(&self, w: usize, connected_only: bool, alpha: &Scalar, beta: &Scalar) -> TruncatedSeries {
        let seqs = degree_sequences(w);
        let coeffs: Vec<Scalar> = seqs
            .par_iter()
            .map(|v| self.class_sum(v, connected_only, alpha, beta).expect("mode matches algebra"))
            .collect();
        collect_series(w, &seqs, coeffs)
    }

    /// `sum_classes contribution / |Aut|` for one degree sequence.
    pub fn class_sum(&self, degrees: &[usize], connected_only: bool, alpha: &Scalar, beta: &Scalar) -> Result<Scalar, WickError> {
        let mode = self.mode();
        let mut total = Scalar::zero();
        for class in classify(enumerate_configurations(degrees, mode == Mode::Moebius), mode) {
            if connected_only && !class.connected {
                continue;
            }
            let g = &class.representative;
            let factor = alpha.pow(-(g.edge_count() as i64)).expect("alpha nonzero")
                * beta.pow(g.vertex_count() as i64).expect("nonnegative power");
            let c = self.graph_contribution(g)?;
            total += (c * factor).scale(&(Rational::from_integer(1.into()) / Rational::from_integer(class.aut.into())));
        }
        Ok(total)
    }
}

fn collect_series(w: usize, seqs: &[Vec<usize>], coeffs: Vec<Scalar>) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(w);
    for (v, c) in seqs.iter().zip(coeffs) {
        let v: Vec<u32> = v.iter().map(|&x| x as u32).collect();
        s.add_term(&v, c);
    }
    s
}

pub fn gaussian_moment(alg: &StarAlgebra, m: &MomentSpec) -> Result<Scalar, WickError> {
    if m.field != alg.field() {
        return Err(WickError::FieldMismatch { spec: m.field, algebra: alg.field() });
    }
    Ok(WickEvaluator::new(alg)?.gaussian_moment(&m.degrees))
}

pub fn graph_contribution(alg: &StarAlgebra, g: &MapGraph) -> Result<Scalar, WickError> {
    WickEvaluator::new(alg)?.graph_contribution(g)
}

pub fn closed_form_or(alg: &StarAlgebra, genus: u32, faces: u32) -> Result<Scalar, WickError> {
    WickEvaluator::new(alg)?.closed_form_or(genus, faces)
}

pub fn closed_form_nor(alg: &StarAlgebra, crosscaps: u32, faces: u32) -> Result<Scalar, WickError> {
    WickEvaluator::new(alg)?.closed_form_nor(crosscaps, faces)
}

pub fn series_wick(alg: &StarAlgebra, w: usize) -> Result<TruncatedSeries, WickError> {
    Ok(WickEvaluator::new(alg)?.series_wick(w))
}

pub fn series_graph(alg: &StarAlgebra, w: usize, connected_only: bool) -> Result<TruncatedSeries, WickError> {
    Ok(WickEvaluator::new(alg)?.series_graph(w, connected_only))
}
