//! Exact stratification of a triangulated planar base by the order of simplex values.
//!
//! Inside each base triangle every simplex function is affine, so two simplices tie
//! along at most a line. Cutting each triangle by all such lines leaves convex faces
//! on which the simplex order is constant. Faces, their edges and their vertices are
//! glued across triangles into a single cell list with a face relation.

mod arrangement;
pub mod geometry;

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::complex::{induced_indexing_unchecked, order_signature, FiltrationValues, SimplexIndexing, SimplicialComplex};
use crate::error::{Error, Result};
use crate::persistence::{reduce_unchecked, PairSet};
use crate::rational::{self, Rational};

pub use geometry::{orient, Point};
use geometry::{barycentric, on_segment, strictly_inside_convex, strictly_inside_segment};

/// A planar triangle mesh with rational coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseMesh {
    pub vertices: Vec<Point>,
    pub triangles: Vec<[usize; 3]>,
}

impl BaseMesh {
    pub fn new(vertices: Vec<Point>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidMesh(m));
        if triangles.is_empty() {
            return bad("mesh has no triangles".into());
        }
        let distinct: BTreeSet<&Point> = vertices.iter().collect();
        if distinct.len() != vertices.len() {
            return bad("two mesh vertices share coordinates".into());
        }
        for (t, tri) in triangles.iter().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= vertices.len()) {
                return bad(format!("triangle {t} uses missing vertex {v}"));
            }
            let [a, b, c] = tri.map(|v| &vertices[v]);
            if orient(a, b, c).is_zero() {
                return bad(format!("triangle {t} is degenerate"));
            }
        }
        let mesh = BaseMesh { vertices, triangles };
        for ((u, v), users) in mesh.edges() {
            if users.len() > 2 {
                return bad(format!("edge ({u}, {v}) is shared by {} triangles", users.len()));
            }
            if let [s, t] = users[..] {
                let apex = |t: usize| mesh.triangles[t].into_iter().find(|&w| w != u && w != v).unwrap();
                let (a, b) = (&mesh.vertices[u], &mesh.vertices[v]);
                let side = |t: usize| orient(a, b, &mesh.vertices[apex(t)]);
                if side(s).is_positive() == side(t).is_positive() {
                    return bad(format!("triangles {s} and {t} overlap across edge ({u}, {v})"));
                }
            }
        }
        Ok(mesh)
    }

    /// Corners in stored order.
    pub fn corners(&self, t: usize) -> [Point; 3] {
        self.triangles[t].map(|v| self.vertices[v].clone())
    }

    /// Corners in counter-clockwise order.
    pub fn ccw_corners(&self, t: usize) -> [Point; 3] {
        let [a, b, c] = self.corners(t);
        if orient(&a, &b, &c).is_positive() {
            [a, b, c]
        } else {
            [a, c, b]
        }
    }

    /// Undirected edges `(u, v)` with `u < v`, mapped to the triangles using them.
    pub fn edges(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut edges: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let (u, v) = (tri[i], tri[(i + 1) % 3]);
                edges.entry((u.min(v), u.max(v))).or_default().push(t);
            }
        }
        edges
    }

    /// Triangles whose closure contains `p`.
    pub fn containing_triangles(&self, p: &Point) -> Vec<usize> {
        (0..self.triangles.len())
            .filter(|&t| barycentric(&self.corners(t), p).iter().all(|l| !l.is_negative()))
            .collect()
    }

    /// True if `p` lies on an edge used by only one triangle.
    pub fn on_boundary(&self, p: &Point) -> bool {
        self.edges()
            .into_iter()
            .any(|((u, v), users)| users.len() == 1 && on_segment(&self.vertices[u], &self.vertices[v], p))
    }
}

/// Simplex values given at mesh vertices and interpolated affinely over each triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLFibration {
    pub complex: SimplicialComplex,
    pub mesh: BaseMesh,
    /// `values[simplex][mesh vertex]`.
    pub values: Vec<Vec<Rational>>,
}

impl PLFibration {
    pub fn new(complex: SimplicialComplex, mesh: BaseMesh, values: Vec<Vec<Rational>>) -> Result<Self> {
        if values.len() != complex.len() {
            return Err(Error::Schema(format!(
                "{} value rows for {} simplices",
                values.len(),
                complex.len()
            )));
        }
        if let Some(s) = values.iter().position(|row| row.len() != mesh.vertices.len()) {
            return Err(Error::Schema(format!(
                "simplex {s} has {} values for {} mesh vertices",
                values[s].len(),
                mesh.vertices.len()
            )));
        }
        for coface in 0..complex.len() {
            for &face in complex.boundary(coface) {
                for (lo, hi) in values[face].iter().zip(&values[coface]) {
                    if lo > hi {
                        return Err(Error::NonMonotone {
                            face,
                            coface,
                            face_value: rational::format(lo),
                            coface_value: rational::format(hi),
                        });
                    }
                }
            }
        }
        Ok(PLFibration { complex, mesh, values })
    }

    /// The filtration stored at mesh vertex `v`.
    pub fn at_vertex(&self, v: usize) -> FiltrationValues {
        FiltrationValues::unchecked(self.values.iter().map(|row| row[v].clone()).collect())
    }

    /// Affine interpolation over triangle `t` (no containment check).
    pub fn in_triangle(&self, t: usize, p: &Point) -> FiltrationValues {
        self.blend(t, &barycentric(&self.mesh.corners(t), p))
    }

    fn blend(&self, t: usize, l: &[Rational; 3]) -> FiltrationValues {
        let tri = self.mesh.triangles[t];
        FiltrationValues::unchecked(
            self.values
                .iter()
                .map(|row| &l[0] * &row[tri[0]] + &l[1] * &row[tri[1]] + &l[2] * &row[tri[2]])
                .collect(),
        )
    }

    /// The filtration at `p`.
    pub fn filtration_at(&self, p: &Point) -> Result<FiltrationValues> {
        for t in 0..self.mesh.triangles.len() {
            let l = barycentric(&self.mesh.corners(t), p);
            if l.iter().all(|w| !w.is_negative()) {
                return Ok(self.blend(t, &l));
            }
        }
        Err(Error::OutsideMesh {
            x: rational::format(&p.x),
            y: rational::format(&p.y),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TraceKind {
    Empty,
    /// Distinct endpoints on the closed triangle.
    Segment(Point, Point),
    WholeTriangle,
    VertexOnly(Point),
}

/// Where two simplex functions agree on one base triangle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionTrace {
    pub kind: TraceKind,
    pub sigma: usize,
    pub tau: usize,
    pub triangle: usize,
}

pub fn intersection_trace(fib: &PLFibration, sigma: usize, tau: usize, triangle: usize) -> Result<IntersectionTrace> {
    fib.complex.require(sigma)?;
    fib.complex.require(tau)?;
    if sigma == tau {
        return Err(Error::InvalidArgument("a trace needs two different simplices".into()));
    }
    if triangle >= fib.mesh.triangles.len() {
        return Err(Error::InvalidArgument(format!("no triangle {triangle}")));
    }
    let tri = fib.mesh.triangles[triangle];
    let d = [0, 1, 2].map(|i| &fib.values[sigma][tri[i]] - &fib.values[tau][tri[i]]);
    Ok(IntersectionTrace {
        kind: arrangement::classify(&fib.mesh.corners(triangle), &d),
        sigma,
        tau,
        triangle,
    })
}

/// Every non-trivial trace of the fibration.
pub fn all_traces(fib: &PLFibration) -> Vec<IntersectionTrace> {
    (0..fib.mesh.triangles.len())
        .into_par_iter()
        .flat_map_iter(|t| arrangement::traces(fib, t))
        .filter(|tr| tr.kind != TraceKind::Empty)
        .collect()
}

/// One connected piece of a cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Geometry {
    Point(Point),
    Segment(Point, Point),
    /// Convex, counter-clockwise.
    Polygon(Vec<Point>),
}

impl Geometry {
    pub fn dim(&self) -> usize {
        match self {
            Geometry::Point(_) => 0,
            Geometry::Segment(..) => 1,
            Geometry::Polygon(_) => 2,
        }
    }

    /// A point of the relative interior.
    pub fn representative(&self) -> Point {
        match self {
            Geometry::Point(p) => p.clone(),
            Geometry::Segment(a, b) => a.midpoint(b),
            Geometry::Polygon(v) => Point::centroid(v),
        }
    }

    /// True if `p` is in the relative interior.
    pub fn contains(&self, p: &Point) -> bool {
        match self {
            Geometry::Point(q) => p == q,
            Geometry::Segment(a, b) => strictly_inside_segment(a, b, p),
            Geometry::Polygon(v) => strictly_inside_convex(v, p),
        }
    }

    /// A random point of the relative interior.
    pub fn sample(&self, rng: &mut impl Rng) -> Point {
        match self {
            Geometry::Point(p) => p.clone(),
            Geometry::Segment(a, b) => a.lerp(b, &rational::ratio(rng.gen_range(1..1000), 1000)),
            Geometry::Polygon(v) => {
                let w: Vec<i64> = v.iter().map(|_| rng.gen_range(1..=1000)).collect();
                let total = rational::int(w.iter().sum());
                let (mut x, mut y) = (Rational::zero(), Rational::zero());
                for (p, wi) in v.iter().zip(&w) {
                    x += &p.x * rational::int(*wi);
                    y += &p.y * rational::int(*wi);
                }
                Point::new(x / &total, y / total)
            }
        }
    }

    pub fn points(&self) -> Vec<Point> {
        match self {
            Geometry::Point(p) => vec![p.clone()],
            Geometry::Segment(a, b) => vec![a.clone(), b.clone()],
            Geometry::Polygon(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cell {
    pub id: usize,
    pub dim: usize,
    /// Usually one piece; several after merging.
    pub pieces: Vec<Geometry>,
    pub representative: Point,
    /// Smallest-index mesh triangle containing the representative piece.
    pub triangle: usize,
    /// All cells in the closure, sorted.
    pub faces: Vec<usize>,
    /// All cells whose closure contains this one, sorted.
    pub cofaces: Vec<usize>,
    pub indexing: SimplexIndexing,
    pub pairs: PairSet,
}

impl Cell {
    pub fn geometry(&self) -> &Geometry {
        &self.pieces[0]
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.pieces.iter().any(|g| g.contains(p))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratification {
    pub cells: Vec<Cell>,
    mesh: BaseMesh,
    triangle_cells: Vec<Vec<usize>>,
    merged: bool,
}

impl Stratification {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn cell(&self, id: usize) -> &Cell {
        &self.cells[id]
    }

    pub fn mesh(&self) -> &BaseMesh {
        &self.mesh
    }

    pub fn is_merged(&self) -> bool {
        self.merged
    }

    pub fn is_face(&self, face: usize, coface: usize) -> bool {
        self.cells[coface].faces.binary_search(&face).is_ok()
    }

    /// Cells of a given dimension.
    pub fn of_dim(&self, dim: usize) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(move |c| c.dim == dim)
    }

    /// The unique cell whose relative interior contains `p`.
    pub fn locate(&self, p: &Point) -> Result<usize> {
        let outside = || Error::OutsideMesh {
            x: rational::format(&p.x),
            y: rational::format(&p.y),
        };
        let t = *self.mesh.containing_triangles(p).first().ok_or_else(outside)?;
        self.triangle_cells[t]
            .iter()
            .copied()
            .find(|&c| self.cells[c].contains(p))
            .ok_or_else(|| Error::Invariant(format!("no cell contains {p}")))
    }

    /// Merges neighbouring cells with equal indexing: interior edges between two equal
    /// faces, vertices surrounded by one merged face, and vertices joining two equal edges.
    pub fn merge_equal_order(&self) -> Stratification {
        let n = self.cells.len();
        let mut uf = UnionFind::new(n);
        let same = |a: usize, b: usize| self.cells[a].indexing == self.cells[b].indexing;
        let co2 = |c: usize| -> Vec<usize> {
            self.cells[c].cofaces.iter().copied().filter(|&x| self.cells[x].dim == 2).collect()
        };
        for e in self.of_dim(1).map(|c| c.id) {
            if let [f, g] = co2(e)[..] {
                if same(e, f) && same(e, g) {
                    uf.union(e, f);
                    uf.union(e, g);
                }
            }
        }
        for v in self.of_dim(0).map(|c| c.id) {
            let cof = &self.cells[v].cofaces;
            if cof.is_empty() {
                continue;
            }
            let root = uf.find(cof[0]);
            let face_group = cof.iter().any(|&c| self.cells[c].dim == 2);
            if face_group && cof.iter().all(|&c| uf.find(c) == root && same(v, c)) {
                uf.union(v, cof[0]);
            }
        }
        let mut in_face = vec![false; n];
        for f in self.of_dim(2).map(|c| c.id) {
            let r = uf.find(f);
            in_face[r] = true;
        }
        let mut absorbed = vec![false; n];
        for (c, a) in absorbed.iter_mut().enumerate() {
            *a = in_face[uf.find(c)];
        }
        for v in self.of_dim(0).map(|c| c.id) {
            if absorbed[v] {
                continue;
            }
            let cof = &self.cells[v].cofaces;
            let open_edges: Vec<usize> = cof
                .iter()
                .copied()
                .filter(|&c| self.cells[c].dim == 1 && !absorbed[c])
                .collect();
            if let [e1, e2] = open_edges[..] {
                let covered = co2(v).iter().all(|&f| {
                    self.cells[f].faces.contains(&e1) || self.cells[f].faces.contains(&e2)
                });
                if covered && same(v, e1) && same(v, e2) {
                    uf.union(v, e1);
                    uf.union(v, e2);
                }
            }
        }
        self.regroup(&mut uf)
    }

    fn regroup(&self, uf: &mut UnionFind) -> Stratification {
        let n = self.cells.len();
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for c in 0..n {
            members.entry(uf.find(c)).or_default().push(c);
        }
        // leader: highest-dimension member with the smallest id
        let mut groups: Vec<(usize, usize, Vec<usize>)> = members
            .into_values()
            .map(|m| {
                let dim = m.iter().map(|&c| self.cells[c].dim).max().unwrap();
                let leader = *m.iter().find(|&&c| self.cells[c].dim == dim).unwrap();
                (dim, leader, m)
            })
            .collect();
        groups.sort_by_key(|g| (g.0, g.1));
        let mut group_of = vec![0; n];
        for (g, (_, _, m)) in groups.iter().enumerate() {
            for &c in m {
                group_of[c] = g;
            }
        }
        let direct: Vec<BTreeSet<usize>> = groups
            .iter()
            .enumerate()
            .map(|(g, (_, _, m))| {
                m.iter()
                    .flat_map(|&c| self.cells[c].faces.iter().map(|&f| group_of[f]))
                    .filter(|&h| h != g)
                    .collect()
            })
            .collect();
        let faces: Vec<Vec<usize>> = (0..groups.len())
            .map(|g| {
                let mut seen = BTreeSet::new();
                let mut stack: Vec<usize> = direct[g].iter().copied().collect();
                while let Some(h) = stack.pop() {
                    if h != g && seen.insert(h) {
                        stack.extend(direct[h].iter().copied());
                    }
                }
                seen.into_iter().collect()
            })
            .collect();
        let cells: Vec<Cell> = groups
            .iter()
            .enumerate()
            .map(|(g, (dim, leader, m))| {
                let lead = &self.cells[*leader];
                let mut pieces = vec![lead.geometry().clone()];
                pieces.extend(m.iter().filter(|&c| c != leader).flat_map(|&c| self.cells[c].pieces.clone()));
                Cell {
                    id: g,
                    dim: *dim,
                    pieces,
                    representative: lead.representative.clone(),
                    triangle: lead.triangle,
                    faces: faces[g].clone(),
                    cofaces: Vec::new(),
                    indexing: lead.indexing.clone(),
                    pairs: lead.pairs.clone(),
                }
            })
            .collect();
        let triangle_cells = self
            .triangle_cells
            .iter()
            .map(|list| {
                let set: BTreeSet<usize> = list.iter().map(|&c| group_of[c]).collect();
                set.into_iter().collect()
            })
            .collect();
        let mut out = Stratification {
            cells,
            mesh: self.mesh.clone(),
            triangle_cells,
            merged: true,
        };
        out.fill_cofaces();
        out
    }

    fn fill_cofaces(&mut self) {
        let mut cofaces = vec![Vec::new(); self.cells.len()];
        for c in &self.cells {
            for &f in &c.faces {
                cofaces[f].push(c.id);
            }
        }
        for (c, mut list) in self.cells.iter_mut().zip(cofaces) {
            list.sort_unstable();
            c.cofaces = list;
        }
    }
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut y = x;
        while self.parent[y] != r {
            let next = self.parent[y];
            self.parent[y] = r;
            y = next;
        }
        r
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (big, small) = if self.size[ra] >= self.size[rb] { (ra, rb) } else { (rb, ra) };
            self.parent[small] = big;
            self.size[big] += self.size[small];
        }
    }
}

/// Inserts the points of `on_edge` lying strictly between consecutive polygon
/// vertices that share a triangle edge.
fn refine_polygon(polygon: &[Point], corners: &[Point; 3], on_edge: &[BTreeSet<Point>; 3]) -> Vec<Point> {
    let mut out = Vec::with_capacity(polygon.len());
    let n = polygon.len();
    for i in 0..n {
        let (p, q) = (&polygon[i], &polygon[(i + 1) % n]);
        out.push(p.clone());
        for k in 0..3 {
            let (a, b) = (&corners[k], &corners[(k + 1) % 3]);
            if on_segment(a, b, p) && on_segment(a, b, q) {
                let mut between: Vec<&Point> = on_edge[k]
                    .iter()
                    .filter(|r| strictly_inside_segment(p, q, r))
                    .collect();
                between.sort_by_key(|r| geometry::dot(p, q, r));
                out.extend(between.into_iter().cloned());
                break;
            }
        }
    }
    out
}

/// Builds the refined stratification of the base.
pub fn build_stratification(fib: &PLFibration) -> Result<Stratification> {
    let mesh = &fib.mesh;
    let nt = mesh.triangles.len();
    let faces: Vec<Vec<Vec<Point>>> = (0..nt)
        .into_par_iter()
        .map(|t| arrangement::triangle_faces(fib, t))
        .collect();

    // points on each mesh edge, from every triangle touching it
    let edge_key = |t: usize, k: usize| {
        let tri = mesh.triangles[t];
        let (u, v) = (tri[k], tri[(k + 1) % 3]);
        (u.min(v), u.max(v))
    };
    let mut edge_points: BTreeMap<(usize, usize), BTreeSet<Point>> = BTreeMap::new();
    for (t, polys) in faces.iter().enumerate() {
        let c = mesh.corners(t);
        for k in 0..3 {
            let set = edge_points.entry(edge_key(t, k)).or_default();
            for p in polys.iter().flatten() {
                if on_segment(&c[k], &c[(k + 1) % 3], p) {
                    set.insert(p.clone());
                }
            }
        }
    }
    let polygons: Vec<(usize, Vec<Point>)> = (0..nt)
        .into_par_iter()
        .flat_map_iter(|t| {
            let c = mesh.corners(t);
            let on_edge = [0, 1, 2].map(|k| edge_points[&edge_key(t, k)].clone());
            faces[t]
                .iter()
                .map(|poly| (t, refine_polygon(poly, &c, &on_edge)))
                .collect::<Vec<_>>()
        })
        .collect();

    let points: BTreeSet<Point> = polygons.iter().flat_map(|(_, p)| p.iter().cloned()).collect();
    let point_id: BTreeMap<&Point, usize> = points.iter().enumerate().map(|(i, p)| (p, i)).collect();
    let n0 = point_id.len();
    let mut edge_owner: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut vertex_owner = vec![usize::MAX; n0];
    for (t, poly) in &polygons {
        let ids: Vec<usize> = poly.iter().map(|p| point_id[p]).collect();
        for i in 0..ids.len() {
            let (a, b) = (ids[i], ids[(i + 1) % ids.len()]);
            let o = edge_owner.entry((a.min(b), a.max(b))).or_insert(*t);
            *o = (*o).min(*t);
            vertex_owner[a] = vertex_owner[a].min(*t);
        }
    }
    let edge_id: BTreeMap<(usize, usize), usize> =
        edge_owner.keys().enumerate().map(|(i, k)| (*k, n0 + i)).collect();
    let n1 = edge_id.len();

    let mut two: Vec<(usize, Point, Vec<Point>)> = polygons
        .into_iter()
        .map(|(t, poly)| (t, Point::centroid(&poly), poly))
        .collect();
    two.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));

    let point_list: Vec<Point> = points.iter().cloned().collect();
    let mut proto: Vec<(usize, Geometry, usize, Vec<usize>)> = Vec::with_capacity(n0 + n1 + two.len());
    for (i, p) in point_list.iter().enumerate() {
        proto.push((0, Geometry::Point(p.clone()), vertex_owner[i], Vec::new()));
    }
    for (&(a, b), &t) in &edge_owner {
        let g = Geometry::Segment(point_list[a].clone(), point_list[b].clone());
        proto.push((1, g, t, vec![a, b]));
    }
    for (t, _, poly) in two {
        let ids: Vec<usize> = poly.iter().map(|p| point_id[p]).collect();
        let mut faces: Vec<usize> = ids.clone();
        for i in 0..ids.len() {
            let (a, b) = (ids[i], ids[(i + 1) % ids.len()]);
            faces.push(edge_id[&(a.min(b), a.max(b))]);
        }
        faces.sort_unstable();
        proto.push((2, Geometry::Polygon(poly), t, faces));
    }

    let cells: Vec<Cell> = proto
        .into_par_iter()
        .enumerate()
        .map(|(id, (dim, geometry, triangle, faces))| {
            let representative = geometry.representative();
            let f = fib.in_triangle(triangle, &representative);
            let indexing = induced_indexing_unchecked(&f);
            let pairs = reduce_unchecked(&fib.complex, &indexing);
            Cell {
                id,
                dim,
                pieces: vec![geometry],
                representative,
                triangle,
                faces,
                cofaces: Vec::new(),
                indexing,
                pairs,
            }
        })
        .collect();

    let mut triangle_cells: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); nt];
    for c in cells.iter().filter(|c| c.dim == 2) {
        triangle_cells[c.triangle].insert(c.id);
        triangle_cells[c.triangle].extend(c.faces.iter().copied());
    }
    let mut strat = Stratification {
        cells,
        mesh: mesh.clone(),
        triangle_cells: triangle_cells.into_iter().map(|s| s.into_iter().collect()).collect(),
        merged: false,
    };
    strat.fill_cofaces();
    Ok(strat)
}

pub fn representative_point(cell: &Cell) -> Point {
    cell.representative.clone()
}

/// Samples `k` relative-interior points of `cell` and returns the first whose simplex
/// order differs from the order at the representative point.
pub fn order_constancy_check(
    fib: &PLFibration,
    cell: &Cell,
    k: usize,
    seed: u64,
) -> Result<Option<Point>> {
    if k == 0 {
        return Err(Error::InvalidArgument("sample count must be positive".into()));
    }
    let reference = order_signature(&fib.filtration_at(&cell.representative)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..k {
        let piece = &cell.pieces[rng.gen_range(0..cell.pieces.len())];
        let p = piece.sample(&mut rng);
        if order_signature(&fib.filtration_at(&p)?) != reference {
            return Ok(Some(p));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::induced_indexing;
    use crate::persistence::reduce;
    use crate::rational::{int, ratio};

    fn one_triangle(values: Vec<[i64; 3]>, complex: SimplicialComplex) -> PLFibration {
        let mesh = BaseMesh::new(
            vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(0, 1)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let values = values.into_iter().map(|v| v.iter().map(|&x| int(x)).collect()).collect();
        PLFibration::new(complex, mesh, values).unwrap()
    }

    fn two_vertices() -> SimplicialComplex {
        SimplicialComplex::from_lists(vec![vec![0], vec![1]]).unwrap()
    }

    #[test]
    fn trace_cases() {
        let fib = one_triangle(vec![[0, 2, 0], [0, 0, 2], ], two_vertices());
        let tr = intersection_trace(&fib, 0, 1, 0).unwrap();
        assert_eq!(tr.kind, TraceKind::Segment(Point::ints(0, 0), Point::new(ratio(1, 2), ratio(1, 2))));
        let same = one_triangle(vec![[1, 2, 3], [1, 2, 3]], two_vertices());
        assert_eq!(intersection_trace(&same, 0, 1, 0).unwrap().kind, TraceKind::WholeTriangle);
        let apart = one_triangle(vec![[1, 2, 3], [4, 5, 6]], two_vertices());
        assert_eq!(intersection_trace(&apart, 0, 1, 0).unwrap().kind, TraceKind::Empty);
        let touch = one_triangle(vec![[1, 2, 3], [1, 5, 6]], two_vertices());
        assert_eq!(intersection_trace(&touch, 0, 1, 0).unwrap().kind, TraceKind::VertexOnly(Point::ints(0, 0)));
        let edge = one_triangle(vec![[1, 2, 3], [1, 2, 6]], two_vertices());
        assert_eq!(
            intersection_trace(&edge, 0, 1, 0).unwrap().kind,
            TraceKind::Segment(Point::ints(0, 0), Point::ints(1, 0))
        );
        assert!(intersection_trace(&edge, 0, 0, 0).is_err());
    }

    #[test]
    fn one_crossing_segment() {
        let fib = one_triangle(vec![[0, 2, 0], [0, 0, 2]], two_vertices());
        let s = build_stratification(&fib).unwrap();
        let dims: Vec<usize> = s.cells.iter().map(|c| c.dim).collect();
        // corners + midpoint of the hypotenuse; 2 legs + 2 halves + the cut; two faces
        assert_eq!(dims.iter().filter(|&&d| d == 0).count(), 4);
        assert_eq!(dims.iter().filter(|&&d| d == 1).count(), 5);
        assert_eq!(dims.iter().filter(|&&d| d == 2).count(), 2);
        let seg = s
            .of_dim(1)
            .find(|c| c.geometry() == &Geometry::Segment(Point::ints(0, 0), Point::new(ratio(1, 2), ratio(1, 2))))
            .unwrap();
        assert_eq!(seg.cofaces.len(), 2);
        for c in &s.cells {
            for &f in &c.faces {
                assert!(s.cells[f].dim < c.dim);
                assert!(s.cells[f].cofaces.contains(&c.id));
            }
        }
        // brute-force point location agrees with the recomputed pairs
        for i in 1..20 {
            for j in 1..20 - i {
                let p = Point::new(ratio(i, 20), ratio(j, 20));
                let c = s.locate(&p).unwrap();
                let f = fib.filtration_at(&p).unwrap();
                let pairs = reduce(&fib.complex, &induced_indexing(&f, &fib.complex).unwrap()).unwrap();
                assert_eq!(pairs, s.cells[c].pairs);
            }
        }
        let merged = s.merge_equal_order();
        assert_eq!(merged.of_dim(2).count(), 2);
        assert!(merged.len() < s.len());
        for c in &merged.cells {
            assert_eq!(order_constancy_check(&fib, c, 20, 3).unwrap(), None);
        }
    }

    #[test]
    fn constant_fibration_has_one_face_per_triangle() {
        let mesh = BaseMesh::new(
            vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(1, 1), Point::ints(0, 1)],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        let values = vec![vec![int(1); 4], vec![int(2); 4]];
        let fib = PLFibration::new(two_vertices(), mesh, values).unwrap();
        let s = build_stratification(&fib).unwrap();
        assert_eq!(s.of_dim(2).count(), 2);
        assert!(s.cells.iter().all(|c| c.indexing == s.cells[0].indexing));
        let merged = s.merge_equal_order();
        assert_eq!(merged.of_dim(2).count(), 1);
        // the boundary closes up into a single loop
        assert_eq!(merged.of_dim(1).count(), 1);
        assert_eq!(merged.of_dim(0).count(), 0);
        assert_eq!(merged.cells[1].faces, vec![0]);
        for p in [Point::new(ratio(1, 2), ratio(1, 2)), Point::new(ratio(1, 3), ratio(1, 5)), Point::ints(1, 1)] {
            let c = merged.locate(&p).unwrap();
            assert!(merged.cells[c].contains(&p));
        }
        assert!(s.locate(&Point::ints(2, 2)).is_err());
    }

    #[test]
    fn representative_points() {
        let seg = Geometry::Segment(Point::ints(0, 0), Point::ints(1, 0));
        assert_eq!(seg.representative(), Point::new(ratio(1, 2), int(0)));
        assert_eq!(Geometry::Point(Point::ints(0, 0)).representative(), Point::ints(0, 0));
        let tri = Geometry::Polygon(vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(0, 1)]);
        assert_eq!(tri.representative(), Point::new(ratio(1, 3), ratio(1, 3)));
    }

    #[test]
    fn merged_across_trace_fails_constancy() {
        let fib = one_triangle(vec![[0, 2, 0], [0, 0, 2]], two_vertices());
        let s = build_stratification(&fib).unwrap();
        let mut faces = s.of_dim(2).cloned();
        let mut bad = faces.next().unwrap();
        bad.pieces.extend(faces.next().unwrap().pieces);
        assert!(order_constancy_check(&fib, &bad, 50, 1).unwrap().is_some());
        for c in &s.cells {
            assert_eq!(order_constancy_check(&fib, c, 10, 7).unwrap(), None);
        }
    }

    #[test]
    fn mesh_validation() {
        let v = vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(0, 1), Point::ints(2, 0)];
        assert!(BaseMesh::new(v.clone(), vec![[0, 1, 3]]).is_err());
        assert!(BaseMesh::new(v.clone(), vec![[0, 1, 2], [0, 1, 2]]).is_err());
        assert!(BaseMesh::new(v.clone(), vec![[0, 1, 7]]).is_err());
        assert!(BaseMesh::new(v, vec![[0, 1, 2]]).is_ok());
    }

    #[test]
    fn non_monotone_fibration_is_rejected() {
        let k = SimplicialComplex::from_lists(vec![vec![0], vec![1], vec![0, 1]]).unwrap();
        let mesh = BaseMesh::new(vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(0, 1)], vec![[0, 1, 2]]).unwrap();
        let values = vec![vec![int(0); 3], vec![int(0), int(5), int(0)], vec![int(1); 3]];
        assert!(matches!(PLFibration::new(k, mesh, values), Err(Error::NonMonotone { face: 1, coface: 2, .. })));
    }
}
