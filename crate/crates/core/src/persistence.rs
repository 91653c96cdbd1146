//! Z/2 persistent homology by column reduction, persistence diagrams, and a
//! rank-based oracle that shares no code with the reduction.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::{FiltrationValues, SimplexIndexing, SimplicialComplex};
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// A (birth, death) simplex pair; `death == None` marks an essential class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Pair {
    pub birth: usize,
    pub death: Option<usize>,
}

impl Pair {
    pub fn finite(birth: usize, death: usize) -> Self {
        Pair { birth, death: Some(death) }
    }

    pub fn essential(birth: usize) -> Self {
        Pair { birth, death: None }
    }

    /// Replaces `a` by `b` and `b` by `a` wherever they occur.
    pub fn swapped(self, a: usize, b: usize) -> Self {
        let sw = |x: usize| if x == a { b } else if x == b { a } else { x };
        Pair {
            birth: sw(self.birth),
            death: self.death.map(sw),
        }
    }

    pub fn contains(&self, s: usize) -> bool {
        self.birth == s || self.death == Some(s)
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.death {
            Some(d) => write!(f, "({}, {})", self.birth, d),
            None => write!(f, "({}, inf)", self.birth),
        }
    }
}

/// The (birth, death) simplex pairs of one filtration, all degrees together.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PairSet {
    pairs: BTreeSet<(usize, usize)>,
    essential: BTreeSet<usize>,
}

impl PairSet {
    pub fn from_elements(elements: impl IntoIterator<Item = Pair>) -> Self {
        let mut out = PairSet::default();
        for p in elements {
            match p.death {
                Some(d) => out.pairs.insert((p.birth, d)),
                None => out.essential.insert(p.birth),
            };
        }
        out
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn essential(&self) -> impl Iterator<Item = usize> + '_ {
        self.essential.iter().copied()
    }

    /// Finite pairs followed by essential classes, each sorted.
    pub fn elements(&self) -> Vec<Pair> {
        let mut out: Vec<Pair> = self.pairs().map(|(b, d)| Pair::finite(b, d)).collect();
        out.extend(self.essential().map(Pair::essential));
        out.sort();
        out
    }

    /// Elements whose birth simplex has dimension `q`.
    pub fn degree(&self, q: usize, complex: &SimplicialComplex) -> Vec<Pair> {
        self.elements()
            .into_iter()
            .filter(|p| complex.dim(p.birth) == q)
            .collect()
    }

    pub fn contains(&self, p: &Pair) -> bool {
        match p.death {
            Some(d) => self.pairs.contains(&(p.birth, d)),
            None => self.essential.contains(&p.birth),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len() + self.essential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Checks the structural invariants against the indexing the pairs came from.
    pub fn check(&self, complex: &SimplicialComplex, idx: &SimplexIndexing) -> Result<()> {
        let mut seen = vec![false; complex.len()];
        let mut mark = |s: usize| -> Result<()> {
            if s >= seen.len() || std::mem::replace(&mut seen[s], true) {
                return Err(Error::Invariant(format!("simplex {s} appears twice in the pair set")));
            }
            Ok(())
        };
        for &(b, d) in &self.pairs {
            mark(b)?;
            mark(d)?;
            if complex.dim(d) != complex.dim(b) + 1 || idx.position(b) >= idx.position(d) {
                return Err(Error::Invariant(format!("malformed pair ({b}, {d})")));
            }
        }
        for &b in &self.essential {
            mark(b)?;
        }
        if 2 * self.pairs.len() + self.essential.len() != complex.len() {
            return Err(Error::Invariant("pair set does not cover every simplex".into()));
        }
        Ok(())
    }
}

/// Symmetric difference of two ascending lists (column addition over Z/2).
fn add_columns(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Standard left-to-right reduction of the boundary matrix ordered by `idx`.
pub fn reduce(complex: &SimplicialComplex, idx: &SimplexIndexing) -> Result<PairSet> {
    idx.check_compatible(complex)?;
    Ok(reduce_unchecked(complex, idx))
}

pub(crate) fn reduce_unchecked(complex: &SimplicialComplex, idx: &SimplexIndexing) -> PairSet {
    let n = complex.len();
    let mut columns: Vec<Vec<usize>> = Vec::with_capacity(n);
    // pivot_of[row] = column whose lowest one sits in that row
    let mut pivot_of = vec![usize::MAX; n];
    let mut out = PairSet::default();
    for j in 0..n {
        let s = idx.simplex_at(j);
        let mut col: Vec<usize> = complex.boundary(s).iter().map(|&f| idx.position(f)).collect();
        col.sort_unstable();
        while let Some(&low) = col.last() {
            let other = pivot_of[low];
            if other == usize::MAX {
                pivot_of[low] = j;
                out.pairs.insert((idx.simplex_at(low), s));
                break;
            }
            col = add_columns(&col, &columns[other]);
        }
        columns.push(col);
    }
    for j in 0..n {
        if columns[j].is_empty() && pivot_of[j] == usize::MAX {
            out.essential.insert(idx.simplex_at(j));
        }
    }
    out
}

/// One diagram point together with the simplices that produced it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DiagramPoint {
    pub birth: Rational,
    /// `None` is an infinite death.
    pub death: Option<Rational>,
    pub pair: Pair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PersistenceDiagram {
    pub degree: usize,
    pub points: Vec<DiagramPoint>,
}

impl PersistenceDiagram {
    /// The multiset of `(birth, death)` values, sorted, without simplex labels.
    pub fn multiset(&self) -> Vec<(Rational, Option<Rational>)> {
        let mut v: Vec<_> = self
            .points
            .iter()
            .map(|p| (p.birth.clone(), p.death.clone()))
            .collect();
        v.sort();
        v
    }

    /// Points strictly off the diagonal (including essential ones).
    pub fn off_diagonal(&self) -> Vec<(Rational, Option<Rational>)> {
        self.multiset()
            .into_iter()
            .filter(|(b, d)| d.as_ref() != Some(b))
            .collect()
    }
}

/// Degree-`q` diagram: `(f(σ_b), f(σ_d))` per pair and `(f(σ_b), ∞)` per essential birth.
pub fn diagram(
    pairs: &PairSet,
    f: &FiltrationValues,
    q: usize,
    complex: &SimplicialComplex,
) -> PersistenceDiagram {
    let mut points: Vec<DiagramPoint> = pairs
        .degree(q, complex)
        .into_iter()
        .map(|p| DiagramPoint {
            birth: f.get(p.birth).clone(),
            death: p.death.map(|d| f.get(d).clone()),
            pair: p,
        })
        .collect();
    points.sort();
    PersistenceDiagram { degree: q, points }
}

/// Dense Z/2 vector.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn zeros(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }
    fn get(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    fn xor(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
    fn first_one(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, w)| **w != 0)
            .map(|(k, w)| k * 64 + w.trailing_zeros() as usize)
    }
}

/// Rank of a set of row vectors by Gaussian elimination.
fn rank(mut rows: Vec<Bits>) -> usize {
    let mut r = 0;
    let mut k = 0;
    while k < rows.len() {
        let Some(pivot) = rows[k].first_one() else {
            rows.swap_remove(k);
            continue;
        };
        let row = rows[k].clone();
        for other in rows.iter_mut().skip(k + 1) {
            if other.get(pivot) {
                other.xor(&row);
            }
        }
        r += 1;
        k += 1;
    }
    r
}

/// Kernel basis of the matrix whose columns are `columns` (each a vector over `rows` entries),
/// via reduced row-echelon form of the row space.
fn kernel(columns: &[Bits], rows: usize) -> Vec<Bits> {
    let n = columns.len();
    let mut mat: Vec<Bits> = (0..rows)
        .map(|r| {
            let mut row = Bits::zeros(n);
            for (c, col) in columns.iter().enumerate() {
                if col.get(r) {
                    row.flip(c);
                }
            }
            row
        })
        .collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut top = 0;
    for c in 0..n {
        let Some(p) = (top..mat.len()).find(|&r| mat[r].get(c)) else {
            continue;
        };
        mat.swap(top, p);
        let row = mat[top].clone();
        for (r, other) in mat.iter_mut().enumerate() {
            if r != top && other.get(c) {
                other.xor(&row);
            }
        }
        pivots.push(c);
        top += 1;
    }
    let is_pivot: BTreeSet<usize> = pivots.iter().copied().collect();
    (0..n)
        .filter(|c| !is_pivot.contains(c))
        .map(|free| {
            let mut v = Bits::zeros(n);
            v.flip(free);
            for (r, &pc) in pivots.iter().enumerate() {
                if mat[r].get(free) {
                    v.flip(pc);
                }
            }
            v
        })
        .collect()
}

/// Rank of `H_q(K_r) -> H_q(K_s)` by direct linear algebra over Z/2.
pub fn persistent_betti(
    complex: &SimplicialComplex,
    f: &FiltrationValues,
    q: usize,
    r: &Rational,
    s: &Rational,
) -> Result<usize> {
    if r > s {
        return Err(Error::InvalidArgument(format!(
            "threshold r = {} exceeds s = {}",
            rational::format(r),
            rational::format(s)
        )));
    }
    let of_dim = |d: usize| -> Vec<usize> { (0..complex.len()).filter(|&i| complex.dim(i) == d).collect() };
    let q_simplices = of_dim(q);
    let local = |i: usize| q_simplices.binary_search(&i).ok();
    let nq = q_simplices.len();

    // cycles of K_r, expressed over all q-simplices
    let in_r: Vec<usize> = q_simplices.iter().copied().filter(|&i| f.get(i) <= r).collect();
    let cycles: Vec<Bits> = if q == 0 {
        in_r.iter()
            .map(|&i| {
                let mut v = Bits::zeros(nq);
                v.flip(local(i).unwrap());
                v
            })
            .collect()
    } else {
        let lower = of_dim(q - 1);
        let columns: Vec<Bits> = in_r
            .iter()
            .map(|&i| {
                let mut v = Bits::zeros(lower.len());
                for &fct in complex.boundary(i) {
                    v.flip(lower.binary_search(&fct).unwrap());
                }
                v
            })
            .collect();
        kernel(&columns, lower.len())
            .into_iter()
            .map(|k| {
                let mut v = Bits::zeros(nq);
                for (c, &i) in in_r.iter().enumerate() {
                    if k.get(c) {
                        v.flip(local(i).unwrap());
                    }
                }
                v
            })
            .collect()
    };

    let boundaries: Vec<Bits> = of_dim(q + 1)
        .into_iter()
        .filter(|&i| f.get(i) <= s)
        .map(|i| {
            let mut v = Bits::zeros(nq);
            for &fct in complex.boundary(i) {
                v.flip(local(fct).unwrap());
            }
            v
        })
        .collect();

    let rank_b = rank(boundaries.clone());
    let mut both = boundaries;
    both.extend(cycles);
    Ok(rank(both) - rank_b)
}

/// Vietoris–Rips complex on `points` up to dimension `max_dim`, with
/// `f(σ) = ½ · max pairwise distance` converted exactly from `f64`.
pub fn vietoris_rips(points: &[Vec<f64>], max_dim: usize) -> Result<(SimplicialComplex, FiltrationValues)> {
    let n = points.len();
    let dist = |i: usize, j: usize| -> f64 {
        points[i]
            .iter()
            .zip(&points[j])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    let mut lists: Vec<Vec<u64>> = Vec::new();
    let mut layer: Vec<Vec<u64>> = (0..n as u64).map(|v| vec![v]).collect();
    for _ in 0..=max_dim {
        if layer.is_empty() {
            break;
        }
        lists.extend(layer.iter().cloned());
        let mut next = Vec::new();
        for s in &layer {
            for v in s.last().unwrap() + 1..n as u64 {
                let mut t = s.clone();
                t.push(v);
                next.push(t);
            }
        }
        layer = next;
    }
    let values = lists
        .iter()
        .map(|s| {
            let mut m = 0.0f64;
            for (a, &i) in s.iter().enumerate() {
                for &j in &s[a + 1..] {
                    m = m.max(dist(i as usize, j as usize));
                }
            }
            rational::from_f64(0.5 * m)
        })
        .collect::<Result<Vec<_>>>()?;
    let complex = SimplicialComplex::from_lists(lists)?;
    let f = FiltrationValues::new(&complex, values)?;
    Ok((complex, f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::induced_indexing;
    use crate::rational::{int, ratio};

    fn monodromy_at(fa: Rational, fb: Rational, fc: Rational, fd: Rational) -> (SimplicialComplex, FiltrationValues) {
        let k = SimplicialComplex::from_lists(vec![
            vec![0], vec![1], vec![2], vec![3],
            vec![1, 2], vec![2, 3], vec![0, 3],
            vec![0, 1], vec![0, 2], vec![0, 1, 2], vec![0, 2, 3],
        ])
        .unwrap();
        let mut v = vec![int(0); 11];
        v[7] = fa;
        v[8] = fb;
        v[9] = fc;
        v[10] = fd;
        let f = FiltrationValues::new(&k, v).unwrap();
        (k, f)
    }

    #[test]
    fn single_vertex() {
        let k = SimplicialComplex::from_lists(vec![vec![0]]).unwrap();
        let p = reduce(&k, &SimplexIndexing::identity(1)).unwrap();
        assert_eq!(p.elements(), vec![Pair::essential(0)]);
    }

    #[test]
    fn quadrant_one_and_three_pairs() {
        // (1/2, 1/2): f(a)=5/2, f(b)=3/2, f(c)=21/2, f(d)=19/2
        let (k, f) = monodromy_at(ratio(5, 2), ratio(3, 2), ratio(21, 2), ratio(19, 2));
        let pairs = reduce(&k, &induced_indexing(&f, &k).unwrap()).unwrap();
        assert_eq!(pairs.degree(1, &k), vec![Pair::finite(7, 9), Pair::finite(8, 10)]);
        let dgm = diagram(&pairs, &f, 1, &k);
        assert_eq!(
            dgm.multiset(),
            vec![(ratio(3, 2), Some(ratio(19, 2))), (ratio(5, 2), Some(ratio(21, 2)))]
        );

        // (-1/2, -1/2): f(a)=3/2, f(b)=5/2, f(c)=19/2, f(d)=21/2
        let (k, f) = monodromy_at(ratio(3, 2), ratio(5, 2), ratio(19, 2), ratio(21, 2));
        let idx = induced_indexing(&f, &k).unwrap();
        let pairs = reduce(&k, &idx).unwrap();
        assert_eq!(pairs.degree(1, &k), vec![Pair::finite(7, 10), Pair::finite(8, 9)]);
        pairs.check(&k, &idx).unwrap();
    }

    #[test]
    fn empty_and_diagonal_points() {
        let k = SimplicialComplex::from_lists(vec![vec![0], vec![1], vec![0, 1]]).unwrap();
        let f = FiltrationValues::new(&k, vec![int(0), int(1), int(1)]).unwrap();
        let pairs = reduce(&k, &induced_indexing(&f, &k).unwrap()).unwrap();
        assert!(diagram(&pairs, &f, 1, &k).points.is_empty());
        let d0 = diagram(&pairs, &f, 0, &k);
        // vertex 1 is killed by the edge at the same value: a diagonal point that is kept
        assert_eq!(d0.multiset(), vec![(int(0), None), (int(1), Some(int(1)))]);
        assert_eq!(d0.off_diagonal(), vec![(int(0), None)]);
        assert!(diagram(&PairSet::default(), &f, 0, &k).points.is_empty());
    }

    #[test]
    fn reduce_rejects_incompatible_indexing() {
        let k = SimplicialComplex::from_lists(vec![vec![0], vec![1], vec![0, 1]]).unwrap();
        let idx = SimplexIndexing::from_order(vec![2, 0, 1]).unwrap();
        assert!(matches!(reduce(&k, &idx), Err(Error::IncompatibleIndexing(_))));
    }

    #[test]
    fn betti_of_empty_and_circle() {
        let k = SimplicialComplex::from_lists(vec![
            vec![0], vec![1], vec![2], vec![0, 1], vec![1, 2], vec![0, 2],
        ])
        .unwrap();
        let f = FiltrationValues::new(&k, vec![int(0), int(0), int(0), int(1), int(1), int(1)]).unwrap();
        assert_eq!(persistent_betti(&k, &f, 0, &int(-1), &int(-1)).unwrap(), 0);
        assert_eq!(persistent_betti(&k, &f, 1, &int(1), &int(1)).unwrap(), 1);
        assert_eq!(persistent_betti(&k, &f, 0, &int(0), &int(0)).unwrap(), 3);
        assert_eq!(persistent_betti(&k, &f, 0, &int(0), &int(1)).unwrap(), 1);
        assert!(persistent_betti(&k, &f, 0, &int(2), &int(1)).is_err());
    }

    #[test]
    fn kernel_of_triangle_boundary() {
        // columns: edges 01, 12, 02 over vertices 0, 1, 2
        let mk = |ones: &[usize]| {
            let mut b = Bits::zeros(3);
            for &o in ones {
                b.flip(o);
            }
            b
        };
        let ker = kernel(&[mk(&[0, 1]), mk(&[1, 2]), mk(&[0, 2])], 3);
        assert_eq!(ker, vec![mk(&[0, 1, 2])]);
        assert_eq!(rank(vec![mk(&[0, 1]), mk(&[1, 2]), mk(&[0, 2])]), 2);
    }

    #[test]
    fn rips_builder_values() {
        let (k, f) = vietoris_rips(&[vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 1.0]], 2).unwrap();
        assert_eq!(k.len(), 7);
        let e01 = k.index_of(&crate::complex::Simplex::new(vec![0, 1]).unwrap()).unwrap();
        assert_eq!(f.get(e01), &int(1));
        assert_eq!(f.get(6), &rational::from_f64(0.5 * 5f64.sqrt()).unwrap());
    }
}
