//! Example fibrations: the monodromy square, its scaled instability variant, image
//! channel blends from a PPM file, and random small fibrations.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::complex::{FiltrationValues, SimplicialComplex};
use crate::error::{Error, Result};
use crate::rational::{self, int, ratio, Rational};
use crate::stratify::{BaseMesh, PLFibration, Point};
use crate::vineyard::{path_vineyard, Vine};

/// Index of the edge `a = [0,1]` in [`monodromy_complex`].
pub const A: usize = 7;
/// Index of the edge `b = [0,2]`.
pub const B: usize = 8;
/// Index of the triangle `c = [0,1,2]`.
pub const C: usize = 9;
/// Index of the triangle `d = [0,2,3]`.
pub const D: usize = 10;

/// Four vertices, five edges and the two triangles `c`, `d` glued along `b`.
pub fn monodromy_complex() -> SimplicialComplex {
    SimplicialComplex::from_lists(vec![
        vec![0],
        vec![1],
        vec![2],
        vec![3],
        vec![1, 2],
        vec![2, 3],
        vec![0, 3],
        vec![0, 1],
        vec![0, 2],
        vec![0, 1, 2],
        vec![0, 2, 3],
    ])
    .expect("fixed complex")
}

/// The square `[-1, 1]^2` as eight triangles around the origin. Triangle `i` lies
/// between ring vertices `i + 1` and `i + 2`, starting in the first quadrant.
pub fn fan_mesh() -> BaseMesh {
    let ring = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];
    let mut vertices = vec![Point::ints(0, 0)];
    vertices.extend(ring.iter().map(|&(x, y)| Point::ints(x, y)));
    let triangles = (0..8).map(|i| [0, i + 1, (i + 1) % 8 + 1]).collect();
    BaseMesh::new(vertices, triangles).expect("fixed mesh")
}

/// Values of the scaled monodromy family at `(x, y)`:
/// `a = (M+1) + M y`, `b = (M+1) - M y`, `c = (3M+7) + M x`, `d = (3M+7) - M x`, others 0.
pub fn scaled_values(gap: &Rational, p: &Point) -> Vec<Rational> {
    let base_ab = gap + int(1);
    let base_cd = gap * int(3) + int(7);
    let mut v = vec![Rational::zero(); 11];
    v[A] = &base_ab + gap * &p.y;
    v[B] = &base_ab - gap * &p.y;
    v[C] = &base_cd + gap * &p.x;
    v[D] = &base_cd - gap * &p.x;
    v
}

/// The scaled monodromy fibration on [`fan_mesh`].
pub fn scaled_monodromy(gap: &Rational) -> Result<PLFibration> {
    if gap.is_negative() {
        return Err(Error::InvalidArgument("gap must not be negative".into()));
    }
    let mesh = fan_mesh();
    let per_vertex: Vec<Vec<Rational>> = mesh.vertices.iter().map(|p| scaled_values(gap, p)).collect();
    let values = (0..11).map(|s| per_vertex.iter().map(|row| row[s].clone()).collect()).collect();
    PLFibration::new(monodromy_complex(), mesh, values)
}

/// The monodromy fibration `a = 2+y, b = 2-y, c = 10+x, d = 10-x`, after checking its
/// quadrant sign conditions on a grid.
pub fn monodromy_fibration() -> Result<PLFibration> {
    let fib = scaled_monodromy(&int(1))?;
    check_sign_conditions(&fib)?;
    Ok(fib)
}

/// `a > b` iff `y > 0`, `c > d` iff `x > 0`, and `c, d > a, b > 0` on a grid over the square.
pub fn check_sign_conditions(fib: &PLFibration) -> Result<()> {
    for i in -8..=8 {
        for j in -8..=8 {
            let p = Point::new(ratio(i, 8), ratio(j, 8));
            let f = fib.filtration_at(&p)?;
            let v = |s: usize| f.get(s);
            let ok = (v(A) > v(B)) == p.y.is_positive()
                && (v(C) > v(D)) == p.x.is_positive()
                && v(C).min(v(D)) > v(A).max(v(B))
                && v(A).min(v(B)).is_positive();
            if !ok {
                return Err(Error::Invariant(format!("sign conditions fail at {p}")));
            }
        }
    }
    Ok(())
}

/// Rational stand-in for `sqrt(2)/2`.
pub fn half_sqrt2() -> Rational {
    ratio(408, 577)
}

/// Nine points around the unit circle at angles `k pi / 4`, `k = 0..=8`, with rational
/// coordinates; the first and last coincide.
pub fn circle_points() -> Vec<Point> {
    let s = half_sqrt2();
    let z = Rational::zero();
    let one = int(1);
    let dirs: [(Rational, Rational); 8] = [
        (one.clone(), z.clone()),
        (s.clone(), s.clone()),
        (z.clone(), one.clone()),
        (-&s, s.clone()),
        (-&one, z.clone()),
        (-&s, -&s),
        (z.clone(), -&one),
        (s.clone(), -s),
    ];
    let mut pts: Vec<Point> = dirs.into_iter().map(|(x, y)| Point::new(x, y)).collect();
    pts.push(pts[0].clone());
    pts
}

/// `(t, f(t))` samples of a fibration along a polyline, `t = k / (n - 1)`.
pub fn path_samples(fib: &PLFibration, points: &[Point]) -> Result<Vec<(Rational, FiltrationValues)>> {
    let last = points.len().saturating_sub(1).max(1) as i64;
    points
        .iter()
        .enumerate()
        .map(|(k, p)| Ok((ratio(k as i64, last), fib.filtration_at(p)?)))
        .collect()
}

/// The two instability paths at parameter `t`.
pub fn gamma(plus: bool, delta: &Rational, t: &Rational) -> Point {
    if t.abs() >= *delta {
        return Point::new(t.clone(), t.clone());
    }
    let two_t = t * int(2);
    let neg = t.is_negative();
    match (plus, neg) {
        (true, true) => Point::new(-delta, delta + two_t),
        (true, false) => Point::new(-delta + two_t, delta.clone()),
        (false, true) => Point::new(delta + two_t, -delta),
        (false, false) => Point::new(delta.clone(), -delta + two_t),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstabilityReport {
    pub epsilon: Rational,
    pub gap: Rational,
    pub delta: Rational,
    pub parameters: Vec<Rational>,
    /// Largest `|f+(s, t) - f-(s, t)|` over simplices and samples.
    pub sup_distance: Rational,
    /// Largest sup-norm distance between matched vines, for the identity and the swap.
    pub matching_distances: [Rational; 2],
    pub min_over_bijections: Rational,
    pub vines_plus: Vec<Vine>,
    pub vines_minus: Vec<Vine>,
    pub warning: Option<String>,
}

/// Two `epsilon`-close one-parameter filtrations whose degree-1 vines stay at least
/// `gap` apart under either matching.
pub fn instability(epsilon: &Rational, gap: &Rational) -> Result<InstabilityReport> {
    if !epsilon.is_positive() {
        return Err(Error::InvalidArgument("epsilon must be positive".into()));
    }
    if gap.is_negative() {
        return Err(Error::InvalidArgument("gap must not be negative".into()));
    }
    let half = ratio(1, 2);
    let delta = if gap.is_zero() {
        half.clone()
    } else {
        (epsilon / (gap * int(3))).min(half.clone())
    };
    // |f(s, p) - f(s, 0)| <= M |p| < eps / 2 whenever |p| < sqrt(2) delta
    if gap * gap * &delta * &delta * int(2) >= epsilon * epsilon / int(4) && !gap.is_zero() {
        return Err(Error::Invariant("delta is too large for epsilon".into()));
    }
    let mut ts: BTreeSet<Rational> = (-20..=20).map(|k| ratio(k, 20)).collect();
    for k in [-4, -3, -2, -1, 0, 1, 2, 3, 4] {
        ts.insert(&delta * ratio(k, 4));
    }
    let parameters: Vec<Rational> = ts.into_iter().collect();
    let k = monodromy_complex();
    let sample = |plus: bool| -> Result<Vec<(Rational, FiltrationValues)>> {
        parameters
            .iter()
            .map(|t| {
                let v = scaled_values(gap, &gamma(plus, &delta, t));
                Ok((t.clone(), FiltrationValues::new(&k, v)?))
            })
            .collect()
    };
    let plus = sample(true)?;
    let minus = sample(false)?;
    let mut sup = Rational::zero();
    for ((_, fp), (_, fm)) in plus.iter().zip(&minus) {
        for (x, y) in fp.as_slice().iter().zip(fm.as_slice()) {
            sup = sup.max((x - y).abs());
        }
    }
    let degree1 = |samples: &[(Rational, FiltrationValues)]| -> Result<Vec<Vine>> {
        Ok(path_vineyard(&k, samples)?.vines.into_iter().filter(|v| v.degree == 1).collect())
    };
    let vp = degree1(&plus)?;
    let vm = degree1(&minus)?;
    if vp.len() != 2 || vm.len() != 2 {
        return Err(Error::Invariant("expected two degree-1 vines on each path".into()));
    }
    let dist = |u: &Vine, w: &Vine| -> Rational {
        u.samples
            .iter()
            .zip(&w.samples)
            .map(|(s, r)| {
                let db = (&s.birth - &r.birth).abs();
                let dd = match (&s.death, &r.death) {
                    (Some(x), Some(y)) => (x - y).abs(),
                    _ => Rational::zero(),
                };
                db.max(dd)
            })
            .max()
            .unwrap_or_else(Rational::zero)
    };
    let identity = dist(&vp[0], &vm[0]).max(dist(&vp[1], &vm[1]));
    let swap = dist(&vp[0], &vm[1]).max(dist(&vp[1], &vm[0]));
    let min = identity.clone().min(swap.clone());
    let warning = if gap.is_zero() {
        Some("gap is zero: the vines coincide and the separation check is skipped".to_string())
    } else {
        if sup >= *epsilon || min < *gap {
            return Err(Error::Invariant(format!(
                "instability not witnessed: sup distance {}, vine distance {}",
                rational::format(&sup),
                rational::format(&min)
            )));
        }
        None
    };
    Ok(InstabilityReport {
        epsilon: epsilon.clone(),
        gap: gap.clone(),
        delta,
        parameters,
        sup_distance: sup,
        matching_distances: [identity, swap],
        min_over_bijections: min,
        vines_plus: vp,
        vines_minus: vm,
        warning,
    })
}

/// A plain-text (P3) PPM image.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub maxval: u32,
    /// Row-major `[r, g, b]`.
    pub pixels: Vec<[u32; 3]>,
}

impl Image {
    pub fn parse_ppm(text: &str) -> Result<Image> {
        let mut tokens = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or(""))
            .flat_map(str::split_whitespace);
        let bad = |m: &str| Error::Parse(format!("malformed PPM: {m}"));
        if tokens.next() != Some("P3") {
            return Err(bad("expected the P3 magic number"));
        }
        let mut number = |what: &str| -> Result<u32> {
            tokens
                .next()
                .ok_or_else(|| bad(&format!("missing {what}")))?
                .parse::<u32>()
                .map_err(|_| bad(&format!("bad {what}")))
        };
        let width = number("width")? as usize;
        let height = number("height")? as usize;
        let maxval = number("maxval")?;
        if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
            return Err(bad("dimensions and maxval must be positive"));
        }
        let mut pixels = Vec::with_capacity(width * height);
        for _ in 0..width * height {
            let px = [number("sample")?, number("sample")?, number("sample")?];
            if px.iter().any(|&c| c > maxval) {
                return Err(bad("sample above maxval"));
            }
            pixels.push(px);
        }
        if tokens.next().is_some() {
            return Err(bad("trailing data"));
        }
        Ok(Image { width, height, maxval, pixels })
    }

    pub fn to_ppm(&self) -> String {
        let mut out = format!("P3\n{} {}\n{}\n", self.width, self.height, self.maxval);
        for row in self.pixels.chunks(self.width) {
            let line: Vec<String> = row.iter().map(|p| format!("{} {} {}", p[0], p[1], p[2])).collect();
            out.push_str(&line.join("  "));
            out.push('\n');
        }
        out
    }
}

/// Pixel grid complex: grid vertex `(i, j)` is `i (w + 1) + j`; each pixel is split
/// along its top-left to bottom-right diagonal. Also returns, per triangle, its pixel.
pub fn pixel_complex(width: usize, height: usize) -> (SimplicialComplex, Vec<(Vec<u64>, usize)>) {
    let v = |i: usize, j: usize| (i * (width + 1) + j) as u64;
    let mut triangles = Vec::new();
    for i in 0..height {
        for j in 0..width {
            let (tl, tr, bl, br) = (v(i, j), v(i, j + 1), v(i + 1, j), v(i + 1, j + 1));
            let pixel = i * width + j;
            let mut t1 = vec![tl, tr, br];
            let mut t2 = vec![tl, bl, br];
            t1.sort_unstable();
            t2.sort_unstable();
            triangles.push((t1, pixel));
            triangles.push((t2, pixel));
        }
    }
    triangles.sort();
    let mut edges = BTreeSet::new();
    for (t, _) in &triangles {
        edges.insert(vec![t[0], t[1]]);
        edges.insert(vec![t[0], t[2]]);
        edges.insert(vec![t[1], t[2]]);
    }
    let nv = (width + 1) * (height + 1);
    let mut lists: Vec<Vec<u64>> = (0..nv as u64).map(|x| vec![x]).collect();
    lists.extend(edges);
    lists.extend(triangles.iter().map(|(t, _)| t.clone()));
    (SimplicialComplex::from_lists(lists).expect("grid complex"), triangles)
}

/// The base triangle of the image blend: red at `(1, 0)`, green at `(0, 1)`, blue at `(0, 0)`.
pub fn image_base() -> BaseMesh {
    BaseMesh::new(vec![Point::ints(1, 0), Point::ints(0, 1), Point::ints(0, 0)], vec![[0, 1, 2]]).expect("fixed mesh")
}

/// Describes how lower simplices are encoded by [`image_fibration`].
pub const IMAGE_ENCODING_NOTE: &str = "triangle values are the weighted channel blend w1*r + w2*g + (1-w1-w2)*b; \
each lower simplex stores, at each corner, the minimum channel value over the triangles containing it, \
which equals the minimum over cofaces at the three corners but can exceed it at interior weights";

/// Blend of the red, green and blue sublevel filtrations over the weight triangle.
pub fn image_fibration(image: &Image) -> Result<PLFibration> {
    let (k, triangles) = pixel_complex(image.width, image.height);
    let n = k.len();
    let mut values: Vec<Vec<Option<u32>>> = vec![vec![None; 3]; n];
    let first_triangle = n - triangles.len();
    for (offset, (_, pixel)) in triangles.iter().enumerate() {
        let s = first_triangle + offset;
        values[s] = image.pixels[*pixel].iter().map(|&c| Some(c)).collect();
    }
    // push minima down from triangles to edges, then edges to vertices
    for s in (0..n).rev() {
        let row = values[s].clone();
        for &f in k.boundary(s) {
            for ch in 0..3 {
                let cur = values[f][ch];
                values[f][ch] = match (cur, row[ch]) {
                    (Some(a), Some(b)) => Some(a.min(b)),
                    (None, x) => x,
                    (x, None) => x,
                };
            }
        }
    }
    let values = values
        .into_iter()
        .map(|row| row.into_iter().map(|c| int(c.unwrap_or(0) as i64)).collect())
        .collect();
    PLFibration::new(k, image_base(), values)
}

/// A random fibration over a jittered grid mesh with at most `max_triangles` triangles,
/// on a random complex with at most `max_simplices` simplices and values in `0..=spread`
/// above the faces.
pub fn random_fibration(rng: &mut impl Rng, max_simplices: usize, max_triangles: usize, spread: i64) -> PLFibration {
    let complex = random_complex(rng, max_simplices);
    let mesh = random_mesh(rng, max_triangles);
    let mut values = vec![Vec::with_capacity(mesh.vertices.len()); complex.len()];
    for _ in 0..mesh.vertices.len() {
        let mut col: Vec<i64> = Vec::with_capacity(complex.len());
        for s in 0..complex.len() {
            let floor = complex.boundary(s).iter().map(|&f| col[f]).max().unwrap_or(0);
            col.push(floor + rng.gen_range(0..=spread));
        }
        for (s, v) in col.into_iter().enumerate() {
            values[s].push(int(v));
        }
    }
    PLFibration::new(complex, mesh, values).expect("random fibration is valid")
}

/// A random simplicial complex of dimension at most 2 with at most `max` simplices.
pub fn random_complex(rng: &mut impl Rng, max: usize) -> SimplicialComplex {
    let nv = rng.gen_range(2..=7u64).min(max as u64);
    let mut set: BTreeSet<(usize, Vec<u64>)> = (0..nv).map(|v| (1, vec![v])).collect();
    for _ in 0..2 * max {
        let size = rng.gen_range(2..=3usize);
        let mut verts: Vec<u64> = (0..nv).filter(|_| rng.gen_bool(0.5)).take(size).collect();
        verts.sort_unstable();
        if verts.len() < 2 {
            continue;
        }
        let mut closure: Vec<Vec<u64>> = vec![verts.clone()];
        if verts.len() == 3 {
            closure.extend([vec![verts[0], verts[1]], vec![verts[0], verts[2]], vec![verts[1], verts[2]]]);
        }
        let new: Vec<(usize, Vec<u64>)> = closure
            .into_iter()
            .map(|s| (s.len(), s))
            .filter(|s| !set.contains(s))
            .collect();
        if set.len() + new.len() <= max {
            set.extend(new);
        }
    }
    SimplicialComplex::from_lists(set.into_iter().map(|(_, s)| s)).expect("closed by construction")
}

/// A grid of `cols x rows` squares (two triangles each), spacing 4, interior vertices
/// jittered by up to 1 in each coordinate, random diagonals.
pub fn random_mesh(rng: &mut impl Rng, max_triangles: usize) -> BaseMesh {
    let shapes: Vec<(usize, usize)> = [(1, 1), (2, 1), (1, 2), (2, 2), (3, 1), (1, 3), (4, 1)]
        .into_iter()
        .filter(|(c, r)| 2 * c * r <= max_triangles.max(2))
        .collect();
    let (cols, rows) = shapes[rng.gen_range(0..shapes.len())];
    let mut vertices = Vec::new();
    for j in 0..=rows {
        for i in 0..=cols {
            let interior = i > 0 && i < cols && j > 0 && j < rows;
            let jitter = |rng: &mut dyn rand::RngCore| {
                if interior {
                    ratio(rng.gen_range(-2..=2), 2)
                } else {
                    Rational::zero()
                }
            };
            let x = int(4 * i as i64) + jitter(rng);
            let y = int(4 * j as i64) + jitter(rng);
            vertices.push(Point::new(x, y));
        }
    }
    let id = |i: usize, j: usize| j * (cols + 1) + i;
    let mut triangles = Vec::new();
    for j in 0..rows {
        for i in 0..cols {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
            if rng.gen_bool(0.5) {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    BaseMesh::new(vertices, triangles).expect("jittered grid is valid")
}
