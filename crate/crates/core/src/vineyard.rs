//! Update bijections between pair sets when the simplex indexing changes, and
//! vines along sampled one-parameter paths.
//!
//! A single adjacent transposition `(σ, τ)` either leaves every pair alone or swaps
//! `σ` and `τ` inside the pairs that contain them. Which case applies is read off
//! the two pair sets: when they are equal the map is the identity, otherwise it is
//! the swap (and the swapped set must equal the new one). Longer moves compose
//! transpositions along a fixed bubble-sort sequence, so the result is deterministic
//! even though it depends on the sequence.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::complex::{induced_indexing, FiltrationValues, SimplexIndexing, SimplicialComplex};
use crate::error::{Error, Result};
use crate::persistence::{reduce, reduce_unchecked, Pair, PairSet};
use crate::rational::{self, Rational};

/// A bijection from the elements of one pair set to those of another.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PairBijection {
    map: BTreeMap<Pair, Pair>,
}

impl PairBijection {
    pub fn identity(elements: impl IntoIterator<Item = Pair>) -> Self {
        PairBijection {
            map: elements.into_iter().map(|p| (p, p)).collect(),
        }
    }

    /// Fails unless the entries are injective.
    pub fn from_entries(entries: impl IntoIterator<Item = (Pair, Pair)>) -> Result<Self> {
        let map: BTreeMap<Pair, Pair> = entries.into_iter().collect();
        let mut targets: Vec<&Pair> = map.values().collect();
        targets.sort();
        if targets.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Invariant("pair map is not injective".into()));
        }
        Ok(PairBijection { map })
    }

    pub fn apply(&self, p: &Pair) -> Option<Pair> {
        self.map.get(p).copied()
    }

    pub fn inverse(&self) -> PairBijection {
        PairBijection {
            map: self.map.iter().map(|(a, b)| (*b, *a)).collect(),
        }
    }

    /// `self` followed by `next`; elements `next` does not know are dropped.
    pub fn then(&self, next: &PairBijection) -> PairBijection {
        PairBijection {
            map: self
                .map
                .iter()
                .filter_map(|(a, b)| next.apply(b).map(|c| (*a, c)))
                .collect(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.map.iter().all(|(a, b)| a == b)
    }

    pub fn entries(&self) -> impl Iterator<Item = (Pair, Pair)> + '_ {
        self.map.iter().map(|(a, b)| (*a, *b))
    }

    pub fn source(&self) -> Vec<Pair> {
        self.map.keys().copied().collect()
    }

    pub fn target(&self) -> Vec<Pair> {
        let mut v: Vec<Pair> = self.map.values().copied().collect();
        v.sort();
        v
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Keeps only the source elements accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(&Pair) -> bool) -> PairBijection {
        PairBijection {
            map: self
                .map
                .iter()
                .filter(|(a, _)| keep(a))
                .map(|(a, b)| (*a, *b))
                .collect(),
        }
    }

    /// Elements that are not fixed.
    pub fn moved(&self) -> Vec<(Pair, Pair)> {
        self.entries().filter(|(a, b)| a != b).collect()
    }
}

/// Transposes positions `k`, `k + 1` given the pair set under `idx`.
fn step(
    complex: &SimplicialComplex,
    idx: &SimplexIndexing,
    pairs: &PairSet,
    k: usize,
) -> Result<(SimplexIndexing, PairSet, PairBijection)> {
    if k + 1 >= idx.len() {
        return Err(Error::InvalidArgument(format!(
            "no adjacent position after {k} in an indexing of length {}",
            idx.len()
        )));
    }
    let sigma = idx.simplex_at(k);
    let tau = idx.simplex_at(k + 1);
    if complex.is_proper_face(sigma, tau) {
        return Err(Error::FaceOrderViolation { face: sigma, coface: tau });
    }
    let next = idx.transposed(k);
    let next_pairs = reduce_unchecked(complex, &next);
    let elements = pairs.elements();
    if next_pairs == *pairs {
        return Ok((next, next_pairs, PairBijection::identity(elements)));
    }
    let swapped = PairSet::from_elements(elements.iter().map(|p| p.swapped(sigma, tau)));
    if swapped != next_pairs {
        return Err(Error::Invariant(format!(
            "transposing {sigma} and {tau} changed the pairs in a way that is not a swap"
        )));
    }
    let bij = PairBijection::from_entries(elements.iter().map(|p| (*p, p.swapped(sigma, tau))))?;
    Ok((next, next_pairs, bij))
}

/// Transposes positions `k` and `k + 1` of `idx` and returns the update bijection.
pub fn transposition_update(
    complex: &SimplicialComplex,
    idx: &SimplexIndexing,
    k: usize,
) -> Result<(SimplexIndexing, PairBijection)> {
    let pairs = reduce(complex, idx)?;
    let (next, _, bij) = step(complex, idx, &pairs, k)?;
    Ok((next, bij))
}

/// The canonical adjacent-transposition sequence from `from` to `to`: repeatedly swap
/// the out-of-order adjacent pair with the smallest position.
pub fn transposition_sequence(from: &SimplexIndexing, to: &SimplexIndexing) -> Vec<usize> {
    let mut current: Vec<usize> = from.order().to_vec();
    let mut seq = Vec::new();
    let mut p = 0;
    while p + 1 < current.len() {
        if to.position(current[p]) > to.position(current[p + 1]) {
            current.swap(p, p + 1);
            seq.push(p);
            p = p.saturating_sub(1);
        } else {
            p += 1;
        }
    }
    seq
}

/// Composes the single-transposition bijections along `sequence`, starting at `from`.
pub fn bijection_along(
    complex: &SimplicialComplex,
    from: &SimplexIndexing,
    sequence: &[usize],
) -> Result<(SimplexIndexing, PairBijection)> {
    let mut idx = from.clone();
    let mut pairs = reduce(complex, from)?;
    let mut total = PairBijection::identity(pairs.elements());
    for &k in sequence {
        let (next, next_pairs, bij) = step(complex, &idx, &pairs, k)?;
        total = total.then(&bij);
        idx = next;
        pairs = next_pairs;
    }
    Ok((idx, total))
}

/// The update bijection from the pairs under `from` to the pairs under `to`,
/// following [`transposition_sequence`].
pub fn composed_bijection(
    complex: &SimplicialComplex,
    from: &SimplexIndexing,
    to: &SimplexIndexing,
) -> Result<PairBijection> {
    to.check_compatible(complex)?;
    let seq = transposition_sequence(from, to);
    let (end, bij) = bijection_along(complex, from, &seq)?;
    if end != *to {
        return Err(Error::Invariant("bubble sort did not reach the target indexing".into()));
    }
    Ok(bij)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VineSample {
    pub t: Rational,
    pub birth: Rational,
    /// `None` for an infinite death.
    pub death: Option<Rational>,
    /// The simplex pair carrying the vine at this sample.
    pub pair: Pair,
}

/// The track of one pair through a sampled path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vine {
    pub id: usize,
    /// Homology degree (dimension of the birth simplex).
    pub degree: usize,
    pub samples: Vec<VineSample>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vineyard {
    pub vines: Vec<Vine>,
    /// Composition of every step, from the first sample's pairs to the last sample's.
    pub loop_permutation: PairBijection,
}

/// Follows every pair of the first sample through consecutive update bijections.
pub fn path_vineyard(
    complex: &SimplicialComplex,
    samples: &[(Rational, FiltrationValues)],
) -> Result<Vineyard> {
    let Some((t0, f0)) = samples.first() else {
        return Err(Error::InvalidArgument("a vineyard needs at least one sample".into()));
    };
    if let Some(w) = samples.windows(2).find(|w| w[0].0 >= w[1].0) {
        return Err(Error::InvalidArgument(format!(
            "path parameters must increase strictly ({} then {})",
            rational::format(&w[0].0),
            rational::format(&w[1].0)
        )));
    }
    let mut idx = induced_indexing(f0, complex)?;
    let start = reduce(complex, &idx)?.elements();
    let record = |t: &Rational, f: &FiltrationValues, p: Pair| VineSample {
        t: t.clone(),
        birth: f.get(p.birth).clone(),
        death: p.death.map(|d| f.get(d).clone()),
        pair: p,
    };
    let mut vines: Vec<Vine> = start
        .iter()
        .enumerate()
        .map(|(id, &p)| Vine {
            id,
            degree: complex.dim(p.birth),
            samples: vec![record(t0, f0, p)],
        })
        .collect();
    let mut total = PairBijection::identity(start.iter().copied());
    for (t, f) in &samples[1..] {
        let next = induced_indexing(f, complex)?;
        let bij = composed_bijection(complex, &idx, &next)?;
        total = total.then(&bij);
        for vine in &mut vines {
            let current = vine.samples.last().unwrap().pair;
            let p = bij
                .apply(&current)
                .ok_or_else(|| Error::Invariant(format!("pair {current} lost along the path")))?;
            vine.samples.push(record(t, f, p));
        }
        idx = next;
    }
    Ok(Vineyard {
        vines,
        loop_permutation: total,
    })
}

/// CSV with columns `vine_id,t,birth,death`; values as exact `p/q`, infinite deaths as `inf`.
pub fn vines_csv<'a>(vines: impl IntoIterator<Item = &'a Vine>) -> String {
    let mut out = String::from("vine_id,t,birth,death\n");
    for vine in vines {
        for s in &vine.samples {
            let death = s.death.as_ref().map_or_else(|| "inf".to_string(), rational::format);
            let _ = writeln!(
                out,
                "{},{},{},{}",
                vine.id,
                rational::format(&s.t),
                rational::format(&s.birth),
                death
            );
        }
    }
    out
}
