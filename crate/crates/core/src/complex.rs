//! Simplicial complexes with an intrinsic simplex order, filtration values,
//! and the simplex indexings they induce.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A simplex as a strictly increasing, non-empty list of vertex labels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Simplex(Vec<u64>);

impl Simplex {
    /// Sorts the labels; fails on an empty list or a repeated label.
    pub fn new(mut vertices: Vec<u64>) -> Result<Self> {
        vertices.sort_unstable();
        if vertices.is_empty() {
            return Err(Error::InvalidComplex("empty simplex".into()));
        }
        if vertices.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidComplex(format!("repeated vertex in {vertices:?}")));
        }
        Ok(Simplex(vertices))
    }

    pub fn vertices(&self) -> &[u64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in the order obtained by dropping each vertex in turn.
    pub fn facets(&self) -> impl Iterator<Item = Simplex> + '_ {
        let n = if self.0.len() > 1 { self.0.len() } else { 0 };
        (0..n).map(move |skip| {
            Simplex(
                self.0
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != skip)
                    .map(|(_, &v)| v)
                    .collect(),
            )
        })
    }

    pub fn is_proper_face_of(&self, other: &Simplex) -> bool {
        self.0.len() < other.0.len() && self.0.iter().all(|v| other.0.binary_search(v).is_ok())
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, v) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "]")
    }
}

/// One problem found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `simplex` is listed but its face `face` is not.
    MissingFace { simplex: usize, face: Simplex },
    /// The face is listed after one of its cofaces.
    FaceAfterCoface { face: usize, coface: usize },
    Duplicate { first: usize, second: usize },
    /// `value(face) > value(coface)`.
    NonMonotone { face: usize, coface: usize },
    /// The value table does not have one entry per simplex.
    ValueCount { expected: usize, found: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::MissingFace { simplex, face } => {
                write!(f, "simplex {simplex} is missing its face {face}")
            }
            Violation::FaceAfterCoface { face, coface } => {
                write!(f, "face {face} is listed after its coface {coface}")
            }
            Violation::Duplicate { first, second } => {
                write!(f, "simplices {first} and {second} are the same")
            }
            Violation::NonMonotone { face, coface } => {
                write!(f, "face {face} has a larger value than its coface {coface}")
            }
            Violation::ValueCount { expected, found } => {
                write!(f, "expected {expected} filtration values, found {found}")
            }
        }
    }
}

/// Checks face closure, face-before-coface listing, duplicates, and (when values are
/// given) monotonicity. Returns every violation found; empty means valid.
pub fn validate(simplices: &[Simplex], values: Option<&[Rational]>) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut position: HashMap<&Simplex, usize> = HashMap::new();
    for (i, s) in simplices.iter().enumerate() {
        if let Some(&first) = position.get(s) {
            out.push(Violation::Duplicate { first, second: i });
        } else {
            position.insert(s, i);
        }
    }
    for (i, s) in simplices.iter().enumerate() {
        for facet in s.facets() {
            match position.get(&facet) {
                None => out.push(Violation::MissingFace { simplex: i, face: facet }),
                Some(&j) if j > i => out.push(Violation::FaceAfterCoface { face: j, coface: i }),
                Some(_) => {}
            }
        }
    }
    if let Some(values) = values {
        if values.len() != simplices.len() {
            out.push(Violation::ValueCount {
                expected: simplices.len(),
                found: values.len(),
            });
        } else {
            for (i, s) in simplices.iter().enumerate() {
                for facet in s.facets() {
                    if let Some(&j) = position.get(&facet) {
                        if values[j] > values[i] {
                            out.push(Violation::NonMonotone { face: j, coface: i });
                        }
                    }
                }
            }
        }
    }
    out
}

/// A finite simplicial complex whose listing order is the intrinsic order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    simplices: Vec<Simplex>,
    /// Facet indices of each simplex, ascending.
    boundary: Vec<Vec<usize>>,
    lookup: HashMap<Simplex, usize>,
}

impl SimplicialComplex {
    pub fn new(simplices: Vec<Simplex>) -> Result<Self> {
        if let Some(v) = validate(&simplices, None).into_iter().next() {
            return Err(Error::InvalidComplex(v.to_string()));
        }
        let lookup: HashMap<Simplex, usize> =
            simplices.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let boundary = simplices
            .iter()
            .map(|s| {
                let mut b: Vec<usize> = s.facets().map(|f| lookup[&f]).collect();
                b.sort_unstable();
                b
            })
            .collect();
        Ok(SimplicialComplex {
            simplices,
            boundary,
            lookup,
        })
    }

    /// Convenience constructor from raw vertex lists.
    pub fn from_lists<I, V>(lists: I) -> Result<Self>
    where
        I: IntoIterator<Item = V>,
        V: IntoIterator<Item = u64>,
    {
        let simplices = lists
            .into_iter()
            .map(|l| Simplex::new(l.into_iter().collect()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(simplices)
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn simplices(&self) -> &[Simplex] {
        &self.simplices
    }

    pub fn simplex(&self, i: usize) -> &Simplex {
        &self.simplices[i]
    }

    pub fn dim(&self, i: usize) -> usize {
        self.simplices[i].dim()
    }

    pub fn max_dim(&self) -> Option<usize> {
        self.simplices.iter().map(Simplex::dim).max()
    }

    pub fn boundary(&self, i: usize) -> &[usize] {
        &self.boundary[i]
    }

    pub fn index_of(&self, s: &Simplex) -> Option<usize> {
        self.lookup.get(s).copied()
    }

    pub fn is_proper_face(&self, face: usize, coface: usize) -> bool {
        self.simplices[face].is_proper_face_of(&self.simplices[coface])
    }

    fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange { index: i, len: self.len() })
        }
    }
}

/// One exact value per simplex, indexed by intrinsic position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiltrationValues(Vec<Rational>);

impl FiltrationValues {
    /// Checks the length and monotonicity against `complex`.
    pub fn new(complex: &SimplicialComplex, values: Vec<Rational>) -> Result<Self> {
        if values.len() != complex.len() {
            return Err(Error::InvalidArgument(format!(
                "expected {} filtration values, found {}",
                complex.len(),
                values.len()
            )));
        }
        for (i, bd) in complex.boundary.iter().enumerate() {
            for &j in bd {
                if values[j] > values[i] {
                    return Err(Error::NonMonotone {
                        face: j,
                        coface: i,
                        face_value: rational::format(&values[j]),
                        coface_value: rational::format(&values[i]),
                    });
                }
            }
        }
        Ok(FiltrationValues(values))
    }

    /// Wraps values without checking monotonicity.
    pub fn unchecked(values: Vec<Rational>) -> Self {
        FiltrationValues(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> &Rational {
        &self.0[i]
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<Rational> {
        self.0
    }
}

/// Compares `f(σ_i)` with `f(σ_j)`: the strict simplex order plus equality.
pub fn simplex_order_compare(f: &FiltrationValues, i: usize, j: usize) -> Result<Ordering> {
    for k in [i, j] {
        if k >= f.len() {
            return Err(Error::IndexOutOfRange { index: k, len: f.len() });
        }
    }
    Ok(f.get(i).cmp(f.get(j)))
}

/// A bijection between simplices and positions `0..N` in a refined total order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SimplexIndexing {
    /// `order[p]` is the simplex at position `p`.
    order: Vec<usize>,
    /// `position[s]` is the position of simplex `s`.
    position: Vec<usize>,
}

impl SimplexIndexing {
    /// Builds an indexing from the simplex sequence; fails unless it is a permutation.
    pub fn from_order(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (p, &s) in order.iter().enumerate() {
            if s >= n || position[s] != usize::MAX {
                return Err(Error::IncompatibleIndexing(format!(
                    "{order:?} is not a permutation"
                )));
            }
            position[s] = p;
        }
        Ok(SimplexIndexing { order, position })
    }

    pub fn identity(n: usize) -> Self {
        SimplexIndexing {
            order: (0..n).collect(),
            position: (0..n).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn position(&self, simplex: usize) -> usize {
        self.position[simplex]
    }

    pub fn simplex_at(&self, position: usize) -> usize {
        self.order[position]
    }

    /// Every simplex comes after all of its facets.
    pub fn is_compatible(&self, complex: &SimplicialComplex) -> bool {
        self.len() == complex.len()
            && (0..complex.len()).all(|s| {
                complex
                    .boundary(s)
                    .iter()
                    .all(|&f| self.position[f] < self.position[s])
            })
    }

    pub(crate) fn check_compatible(&self, complex: &SimplicialComplex) -> Result<()> {
        if self.len() != complex.len() {
            return Err(Error::IncompatibleIndexing(format!(
                "indexing has {} entries, complex has {}",
                self.len(),
                complex.len()
            )));
        }
        for s in 0..complex.len() {
            if let Some(&f) = complex.boundary(s).iter().find(|&&f| self.position[f] > self.position[s]) {
                return Err(Error::IncompatibleIndexing(format!(
                    "face {f} is placed after its coface {s}"
                )));
            }
        }
        Ok(())
    }

    /// Swaps the simplices at positions `k` and `k + 1`.
    pub fn transposed(&self, k: usize) -> Self {
        let mut next = self.clone();
        next.order.swap(k, k + 1);
        next.position[next.order[k]] = k;
        next.position[next.order[k + 1]] = k + 1;
        next
    }
}

/// The indexing induced by `f`: sort by value, ties broken by intrinsic index.
pub fn induced_indexing(f: &FiltrationValues, complex: &SimplicialComplex) -> Result<SimplexIndexing> {
    let checked = FiltrationValues::new(complex, f.0.clone())?;
    Ok(induced_indexing_unchecked(&checked))
}

pub(crate) fn induced_indexing_unchecked(f: &FiltrationValues) -> SimplexIndexing {
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&i, &j| f.get(i).cmp(f.get(j)).then(i.cmp(&j)));
    let mut position = vec![0; order.len()];
    for (p, &s) in order.iter().enumerate() {
        position[s] = p;
    }
    SimplexIndexing { order, position }
}

/// The full simplex order as a sign table over unordered pairs `(i, j)`, `i < j`.
pub fn order_signature(f: &FiltrationValues) -> Vec<Ordering> {
    let n = f.len();
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            out.push(f.get(i).cmp(f.get(j)));
        }
    }
    out
}

impl SimplicialComplex {
    /// Checks that `i` names a simplex of this complex.
    pub fn require(&self, i: usize) -> Result<()> {
        self.check_index(i)
    }
}
