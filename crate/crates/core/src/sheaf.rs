//! The cellular sheaf of simplex pairs over the cell graph of a stratification.
//!
//! Every cell is a vertex whose stalk is its pair set in one homology degree. Every
//! face relation `β ≤ α` is an edge carrying the update bijection from the pairs of
//! `β` to the pairs of `α`. Sections choose one pair per cell consistently.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigUint;
use num_traits::{One, Signed};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::complex::FiltrationValues;
use crate::error::{Error, Result};
use crate::persistence::Pair;
use crate::rational::{self, Rational};
use crate::stratify::{orient, PLFibration, Point, Stratification};
use crate::vineyard::{composed_bijection, PairBijection};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheafEdge {
    pub face: usize,
    pub coface: usize,
    /// From the face stalk onto the coface stalk.
    pub morphism: PairBijection,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellularSheaf {
    pub degree: usize,
    stalks: BTreeMap<usize, Vec<Pair>>,
    dims: BTreeMap<usize, usize>,
    edges: Vec<SheafEdge>,
    inverses: Vec<PairBijection>,
    adjacency: BTreeMap<usize, Vec<usize>>,
    edge_index: BTreeMap<(usize, usize), usize>,
}

impl CellularSheaf {
    /// Assembles a sheaf, checking that every morphism is a bijection between the stalks
    /// of its endpoints. `dims` gives the cell dimension of each vertex.
    pub fn from_parts(
        degree: usize,
        stalks: BTreeMap<usize, Vec<Pair>>,
        dims: BTreeMap<usize, usize>,
        edges: Vec<SheafEdge>,
    ) -> Result<Self> {
        let mut stalks = stalks;
        for s in stalks.values_mut() {
            s.sort();
        }
        if stalks.keys().ne(dims.keys()) {
            return Err(Error::InvalidArgument("stalks and dimensions cover different cells".into()));
        }
        let mut adjacency: BTreeMap<usize, Vec<usize>> = stalks.keys().map(|&c| (c, Vec::new())).collect();
        let mut edge_index = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            let (Some(from), Some(to)) = (stalks.get(&e.face), stalks.get(&e.coface)) else {
                return Err(Error::InvalidArgument(format!("edge {}->{} leaves the sheaf", e.face, e.coface)));
            };
            if e.face == e.coface || edge_index.insert((e.face.min(e.coface), e.face.max(e.coface)), i).is_some() {
                return Err(Error::InvalidArgument(format!("edge {}->{} is a loop or repeated", e.face, e.coface)));
            }
            if e.morphism.source() != *from || e.morphism.target() != *to {
                return Err(Error::Invariant(format!(
                    "morphism on edge {}->{} is not a bijection between the stalks",
                    e.face, e.coface
                )));
            }
            adjacency.get_mut(&e.face).unwrap().push(i);
            adjacency.get_mut(&e.coface).unwrap().push(i);
        }
        let inverses = edges.iter().map(|e| e.morphism.inverse()).collect();
        Ok(CellularSheaf {
            degree,
            stalks,
            dims,
            edges,
            inverses,
            adjacency,
            edge_index,
        })
    }

    pub fn stalk(&self, cell: usize) -> Option<&[Pair]> {
        self.stalks.get(&cell).map(Vec::as_slice)
    }

    pub fn stalks(&self) -> &BTreeMap<usize, Vec<Pair>> {
        &self.stalks
    }

    pub fn cells(&self) -> impl Iterator<Item = usize> + '_ {
        self.stalks.keys().copied()
    }

    pub fn dim(&self, cell: usize) -> Option<usize> {
        self.dims.get(&cell).copied()
    }

    pub fn edges(&self) -> &[SheafEdge] {
        &self.edges
    }

    pub fn edge_between(&self, a: usize, b: usize) -> Option<&SheafEdge> {
        self.edge_index.get(&(a.min(b), a.max(b))).map(|&i| &self.edges[i])
    }

    /// True when every edge joins two distinct vertices; then the composition
    /// condition has nothing to check since there are no chains of length two.
    pub fn is_graph(&self) -> bool {
        self.edges.iter().all(|e| {
            e.face != e.coface && self.stalks.contains_key(&e.face) && self.stalks.contains_key(&e.coface)
        })
    }

    /// The subsheaf on the cells accepted by `keep`.
    pub fn restrict(&self, keep: impl Fn(usize) -> bool) -> CellularSheaf {
        let stalks = self.stalks.iter().filter(|(c, _)| keep(**c)).map(|(c, s)| (*c, s.clone())).collect();
        let dims = self.dims.iter().filter(|(c, _)| keep(**c)).map(|(c, d)| (*c, *d)).collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| keep(e.face) && keep(e.coface))
            .cloned()
            .collect();
        CellularSheaf::from_parts(self.degree, stalks, dims, edges).expect("restriction of a valid sheaf")
    }

    /// Moves `x` from `from` across edge `e`.
    fn push(&self, e: usize, from: usize, x: &Pair) -> Result<(usize, Pair)> {
        let edge = &self.edges[e];
        let (to, map) = if edge.face == from {
            (edge.coface, &edge.morphism)
        } else {
            (edge.face, &self.inverses[e])
        };
        let y = map
            .apply(x)
            .ok_or_else(|| Error::Invariant(format!("{x} is not in the stalk of cell {from}")))?;
        Ok((to, y))
    }

    /// Connected components, each sorted, ordered by smallest cell.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for &start in self.stalks.keys() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for &e in &self.adjacency[&u] {
                    let w = if self.edges[e].face == u { self.edges[e].coface } else { self.edges[e].face };
                    if seen.insert(w) {
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// A consistent choice of one pair per cell of a connected set.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Section {
    pub assignment: BTreeMap<usize, Pair>,
}

impl Section {
    /// Checks every edge with both ends assigned.
    pub fn check(&self, sheaf: &CellularSheaf) -> Result<()> {
        for e in sheaf.edges() {
            if let (Some(x), Some(y)) = (self.assignment.get(&e.face), self.assignment.get(&e.coface)) {
                if e.morphism.apply(x).as_ref() != Some(y) {
                    return Err(Error::Invariant(format!(
                        "section maps {x} at {} but holds {y} at {}",
                        e.face, e.coface
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Propagation {
    Section(Section),
    /// A closed walk `c0, c1, ..., c0` along which the constraints disagree.
    Obstruction { cycle: Vec<usize> },
}

impl Propagation {
    pub fn section(&self) -> Option<&Section> {
        match self {
            Propagation::Section(s) => Some(s),
            Propagation::Obstruction { .. } => None,
        }
    }
}

/// Propagates `x0` from `v0` over its connected component.
///
/// Cells of dimension at least one are visited first, so a conflict found there yields a
/// witness cycle that avoids 0-cells and winds around them.
pub fn propagate(sheaf: &CellularSheaf, v0: usize, x0: Pair) -> Result<Propagation> {
    run(sheaf, v0, x0, None)
}

/// [`propagate`] with neighbours visited in a random order.
pub fn propagate_shuffled(sheaf: &CellularSheaf, v0: usize, x0: Pair, seed: u64) -> Result<Propagation> {
    run(sheaf, v0, x0, Some(ChaCha8Rng::seed_from_u64(seed)))
}

fn run(sheaf: &CellularSheaf, v0: usize, x0: Pair, mut rng: Option<ChaCha8Rng>) -> Result<Propagation> {
    let stalk = sheaf
        .stalk(v0)
        .ok_or_else(|| Error::InvalidArgument(format!("cell {v0} is not in the sheaf")))?;
    if !stalk.contains(&x0) {
        return Err(Error::NotInStalk { cell: v0 });
    }
    let mut assign: BTreeMap<usize, Pair> = BTreeMap::from([(v0, x0)]);
    let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
    let mut order = vec![v0];
    for phase in 0..2 {
        let allowed = |w: usize| phase == 1 || w == v0 || sheaf.dims[&w] > 0;
        let mut queue: VecDeque<usize> = order.iter().copied().collect();
        while let Some(u) = queue.pop_front() {
            let mut nbrs = sheaf.adjacency[&u].clone();
            if let Some(r) = rng.as_mut() {
                nbrs.shuffle(r);
            }
            let x = assign[&u];
            for e in nbrs {
                let (w, y) = sheaf.push(e, u, &x)?;
                if !allowed(w) {
                    continue;
                }
                match assign.get(&w) {
                    Some(z) if *z != y => {
                        return Ok(Propagation::Obstruction {
                            cycle: close_cycle(&parent, u, w),
                        })
                    }
                    Some(_) => {}
                    None => {
                        assign.insert(w, y);
                        parent.insert(w, u);
                        order.push(w);
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    Ok(Propagation::Section(Section { assignment: assign }))
}

/// Tree paths from `u` and `w` to their lowest common ancestor, closed by the edge `u-w`.
fn close_cycle(parent: &BTreeMap<usize, usize>, u: usize, w: usize) -> Vec<usize> {
    let up = |mut v: usize| {
        let mut path = vec![v];
        while let Some(&p) = parent.get(&v) {
            path.push(p);
            v = p;
        }
        path
    };
    let pu = up(u);
    let pw = up(w);
    let on_u: BTreeSet<usize> = pu.iter().copied().collect();
    let lca_w = pw.iter().position(|v| on_u.contains(v)).expect("common root");
    let lca = pw[lca_w];
    let lca_u = pu.iter().position(|&v| v == lca).unwrap();
    let mut cycle: Vec<usize> = pu[..=lca_u].iter().rev().copied().collect();
    cycle.extend(pw[..=lca_w].iter().copied());
    cycle
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSections {
    pub cells: Vec<usize>,
    pub root: usize,
    pub sections: Vec<Section>,
    /// Root stalk elements with no extension, with their witness cycles.
    pub obstructed: Vec<(Pair, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalSections {
    pub components: Vec<ComponentSections>,
}

impl GlobalSections {
    /// Number of global sections: the product over components.
    pub fn count(&self) -> BigUint {
        self.components
            .iter()
            .fold(BigUint::one(), |acc, c| acc * BigUint::from(c.sections.len()))
    }

    /// Every global section, combining components; `None` if there are more than `limit`.
    pub fn combined(&self, limit: usize) -> Option<Vec<Section>> {
        if self.count() > BigUint::from(limit) {
            return None;
        }
        let mut out = vec![Section::default()];
        for comp in &self.components {
            out = out
                .iter()
                .flat_map(|s| {
                    comp.sections.iter().map(move |t| {
                        let mut a = s.assignment.clone();
                        a.extend(t.assignment.iter().map(|(k, v)| (*k, *v)));
                        Section { assignment: a }
                    })
                })
                .collect();
        }
        if self.components.is_empty() {
            return Some(Vec::new());
        }
        Some(out)
    }
}

/// Tries every element of one root stalk per component.
pub fn enumerate_global_sections(sheaf: &CellularSheaf) -> Result<GlobalSections> {
    let mut components = Vec::new();
    for cells in sheaf.components() {
        let root = cells[0];
        let mut sections = Vec::new();
        let mut obstructed = Vec::new();
        for &x in sheaf.stalk(root).unwrap() {
            match propagate(sheaf, root, x)? {
                Propagation::Section(s) => sections.push(s),
                Propagation::Obstruction { cycle } => obstructed.push((x, cycle)),
            }
        }
        components.push(ComponentSections {
            cells,
            root,
            sections,
            obstructed,
        });
    }
    Ok(GlobalSections { components })
}

/// Composition of the edge maps (or their inverses) along a closed walk, as a
/// permutation of the stalk of the first cell.
pub fn loop_monodromy(sheaf: &CellularSheaf, cycle: &[usize]) -> Result<PairBijection> {
    let Some(&start) = cycle.first() else {
        return Err(Error::InvalidArgument("empty cycle".into()));
    };
    if cycle.last() != Some(&start) {
        return Err(Error::InvalidArgument("cycle must end where it starts".into()));
    }
    let stalk = sheaf
        .stalk(start)
        .ok_or_else(|| Error::InvalidArgument(format!("cell {start} is not in the sheaf")))?;
    let mut total = PairBijection::identity(stalk.iter().copied());
    for w in cycle.windows(2) {
        let (u, v) = (w[0], w[1]);
        if u == v {
            continue;
        }
        let &e = sheaf.edge_index.get(&(u.min(v), u.max(v))).ok_or(Error::NotAdjacent(u, v))?;
        let map = if sheaf.edges[e].face == u { &sheaf.edges[e].morphism } else { &sheaf.inverses[e] };
        total = total.then(map);
    }
    if total.len() != stalk.len() {
        return Err(Error::Invariant("loop composition lost stalk elements".into()));
    }
    Ok(total)
}

/// Builds the sheaf of degree-`degree` pairs over the cells of `strat`.
pub fn build_sheaf(strat: &Stratification, fib: &PLFibration, degree: usize) -> Result<CellularSheaf> {
    let k = &fib.complex;
    let in_degree = |p: &Pair| k.dim(p.birth) == degree;
    let stalks: BTreeMap<usize, Vec<Pair>> = strat
        .cells
        .iter()
        .map(|c| (c.id, c.pairs.elements().into_iter().filter(in_degree).collect()))
        .collect();
    let dims = strat.cells.iter().map(|c| (c.id, c.dim)).collect();
    let relations: Vec<(usize, usize)> = strat
        .cells
        .iter()
        .flat_map(|c| c.faces.iter().map(move |&f| (f, c.id)))
        .collect();
    let edges = relations
        .into_par_iter()
        .map(|(face, coface)| {
            let full = composed_bijection(k, &strat.cells[face].indexing, &strat.cells[coface].indexing)?;
            let morphism = full.restrict(in_degree);
            if morphism.entries().any(|(_, y)| !in_degree(&y)) {
                return Err(Error::Invariant(format!("edge {face}->{coface} changes homology degree")));
            }
            Ok(SheafEdge { face, coface, morphism })
        })
        .collect::<Result<Vec<_>>>()?;
    CellularSheaf::from_parts(degree, stalks, dims, edges)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopReport {
    pub center: usize,
    /// Alternating 2-cells and 1-cells around `center`, counter-clockwise, closed.
    pub cycle: Vec<usize>,
    pub permutation: PairBijection,
    pub nontrivial: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonodromyReport {
    pub loops: Vec<LoopReport>,
    /// Root stalk elements (per component) that admit no global section.
    pub obstructed_seeds: Vec<(usize, Pair)>,
}

impl MonodromyReport {
    pub fn nontrivial(&self) -> impl Iterator<Item = &LoopReport> {
        self.loops.iter().filter(|l| l.nontrivial)
    }
}

/// The counter-clockwise ring of 2- and 1-cells around an interior 0-cell.
pub fn link_cycle(strat: &Stratification, center: usize) -> Option<Vec<usize>> {
    let c = strat.cell(center);
    if c.dim != 0 {
        return None;
    }
    let origin = &c.representative;
    let around: BTreeSet<usize> = c.cofaces.iter().copied().collect();
    let faces_of = |e: usize| -> Vec<usize> {
        strat.cell(e).cofaces.iter().copied().filter(|f| strat.cell(*f).dim == 2 && around.contains(f)).collect()
    };
    let edges_of = |f: usize| -> Vec<usize> {
        strat.cell(f).faces.iter().copied().filter(|e| strat.cell(*e).dim == 1 && around.contains(e)).collect()
    };
    let edges: Vec<usize> = around.iter().copied().filter(|&e| strat.cell(e).dim == 1).collect();
    if edges.is_empty() || edges.iter().any(|&e| faces_of(e).len() != 2) {
        return None;
    }
    let f0 = *around.iter().find(|&&f| strat.cell(f).dim == 2)?;
    let start_edges = edges_of(f0);
    if start_edges.len() != 2 {
        return None;
    }
    let rep0 = &strat.cell(f0).representative;
    let e0 = *start_edges
        .iter()
        .find(|&&e| orient(origin, rep0, &strat.cell(e).representative).is_positive())?;
    let mut cycle = vec![f0, e0];
    let (mut face, mut edge) = (f0, e0);
    for _ in 0..=around.len() {
        let next_face = *faces_of(edge).iter().find(|&&f| f != face)?;
        cycle.push(next_face);
        if next_face == f0 {
            return (cycle.len() == around.len() + 1).then_some(cycle);
        }
        let next_edges = edges_of(next_face);
        if next_edges.len() != 2 {
            return None;
        }
        edge = *next_edges.iter().find(|&&e| e != edge)?;
        face = next_face;
        cycle.push(edge);
    }
    None
}

/// Loop monodromy around every interior 0-cell, plus the seeds with no global section.
pub fn monodromy_scan(sheaf: &CellularSheaf, strat: &Stratification) -> Result<MonodromyReport> {
    let mut loops = Vec::new();
    for c in strat.of_dim(0) {
        if sheaf.stalk(c.id).is_none() {
            continue;
        }
        let Some(cycle) = link_cycle(strat, c.id) else { continue };
        if cycle.iter().any(|x| sheaf.stalk(*x).is_none()) {
            continue;
        }
        let permutation = loop_monodromy(sheaf, &cycle)?;
        loops.push(LoopReport {
            center: c.id,
            nontrivial: !permutation.is_identity(),
            cycle,
            permutation,
        });
    }
    let sections = enumerate_global_sections(sheaf)?;
    let obstructed_seeds = sections
        .components
        .iter()
        .flat_map(|c| c.obstructed.iter().map(move |(x, _)| (c.root, *x)))
        .collect();
    Ok(MonodromyReport { loops, obstructed_seeds })
}

fn eval_pair(f: &FiltrationValues, p: &Pair) -> (Rational, Option<Rational>) {
    (f.get(p.birth).clone(), p.death.map(|d| f.get(d).clone()))
}

fn show_values(v: &(Rational, Option<Rational>)) -> String {
    let d = v.1.as_ref().map_or_else(|| "inf".to_string(), rational::format);
    format!("({}, {})", rational::format(&v.0), d)
}

/// Points of the relative interior of `cell`: the representative, then random samples.
fn cell_samples(strat: &Stratification, cell: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Point> {
    let c = strat.cell(cell);
    let mut out = vec![c.representative.clone()];
    if c.dim > 0 {
        for i in 1..k {
            out.push(c.pieces[i % c.pieces.len()].sample(rng));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleSample {
    pub cell: usize,
    pub point: Point,
    pub birth: Rational,
    pub death: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BundleSection {
    pub samples: Vec<BundleSample>,
    /// Number of (edge, boundary point) checks that passed.
    pub certified_points: usize,
}

/// Evaluates a section on sampled points of each cell and certifies that neighbouring
/// cells agree on shared boundary points.
pub fn bundle_section(
    sheaf: &CellularSheaf,
    section: &Section,
    strat: &Stratification,
    fib: &PLFibration,
    samples_per_cell: usize,
    seed: u64,
) -> Result<BundleSection> {
    if samples_per_cell == 0 {
        return Err(Error::InvalidArgument("samples per cell must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut samples = Vec::new();
    for (&cell, pair) in &section.assignment {
        for p in cell_samples(strat, cell, samples_per_cell, &mut rng) {
            let (birth, death) = eval_pair(&fib.filtration_at(&p)?, pair);
            samples.push(BundleSample { cell, point: p, birth, death });
        }
    }
    let mut certified = 0;
    for e in sheaf.edges() {
        let (Some(x), Some(y)) = (section.assignment.get(&e.face), section.assignment.get(&e.coface)) else {
            continue;
        };
        for p in cell_samples(strat, e.face, samples_per_cell, &mut rng) {
            let f = fib.filtration_at(&p)?;
            let (a, b) = (eval_pair(&f, x), eval_pair(&f, y));
            if a != b {
                return Err(violation(e, &p, &a, &b));
            }
            certified += 1;
        }
    }
    Ok(BundleSection {
        samples,
        certified_points: certified,
    })
}

fn violation(e: &SheafEdge, p: &Point, a: &(Rational, Option<Rational>), b: &(Rational, Option<Rational>)) -> Error {
    Error::ContinuityViolation {
        face: e.face,
        coface: e.coface,
        x: rational::format(&p.x),
        y: rational::format(&p.y),
        face_values: show_values(a),
        coface_values: show_values(b),
    }
}

/// Checks that every edge map preserves birth and death values on its face cell, at
/// `samples` points per face. Returns the number of checks made.
pub fn verify_edge_values(
    sheaf: &CellularSheaf,
    strat: &Stratification,
    fib: &PLFibration,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    let mut by_face: BTreeMap<usize, Vec<&SheafEdge>> = BTreeMap::new();
    for e in sheaf.edges() {
        by_face.entry(e.face).or_default().push(e);
    }
    let by_face: Vec<(usize, Vec<&SheafEdge>)> = by_face.into_iter().collect();
    let checks: Vec<Result<usize>> = by_face
        .par_iter()
        .map(|(face, edges)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (*face as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let mut n = 0;
            for p in cell_samples(strat, *face, samples, &mut rng) {
                let f = fib.filtration_at(&p)?;
                for e in edges {
                    for (x, y) in e.morphism.entries() {
                        if f.get(x.birth) != f.get(y.birth) || x.death.map(|d| f.get(d)) != y.death.map(|d| f.get(d)) {
                            return Err(violation(e, &p, &eval_pair(&f, &x), &eval_pair(&f, &y)));
                        }
                        n += 1;
                    }
                }
            }
            Ok(n)
        })
        .collect();
    checks.into_iter().sum()
}

/// Signed area check used by tests: is the closed walk's representative polygon
/// wound around `center`?
pub fn winds_around(strat: &Stratification, cycle: &[usize], center: &Point) -> bool {
    let pts: Vec<Point> = cycle.iter().map(|&c| strat.cell(c).representative.clone()).collect();
    crate::stratify::geometry::winding_number(&pts, center) != 0
}
