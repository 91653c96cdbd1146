//! Per-triangle subdivision by the loci where two simplex functions agree.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};

use super::geometry::{Line, Point};
use super::{IntersectionTrace, PLFibration, TraceKind};
use crate::rational::Rational;

/// Zero set of the affine function with values `d` at the corners `t`.
pub(crate) fn classify(t: &[Point; 3], d: &[Rational; 3]) -> TraceKind {
    let zeros: Vec<usize> = (0..3).filter(|&i| d[i].is_zero()).collect();
    match zeros.len() {
        3 => TraceKind::WholeTriangle,
        2 => TraceKind::Segment(t[zeros[0]].clone(), t[zeros[1]].clone()),
        1 => {
            let z = zeros[0];
            let (i, j) = ((z + 1) % 3, (z + 2) % 3);
            if d[i].is_positive() == d[j].is_positive() {
                TraceKind::VertexOnly(t[z].clone())
            } else {
                TraceKind::Segment(t[z].clone(), crossing(&t[i], &t[j], &d[i], &d[j]))
            }
        }
        _ => {
            let pos = d.iter().filter(|v| v.is_positive()).count();
            if pos == 0 || pos == 3 {
                return TraceKind::Empty;
            }
            // the odd one out sits across the line from the other two
            let odd = (0..3)
                .find(|&i| (pos == 1) == d[i].is_positive())
                .expect("mixed signs");
            let (i, j) = ((odd + 1) % 3, (odd + 2) % 3);
            TraceKind::Segment(
                crossing(&t[odd], &t[i], &d[odd], &d[i]),
                crossing(&t[odd], &t[j], &d[odd], &d[j]),
            )
        }
    }
}

fn crossing(p: &Point, q: &Point, dp: &Rational, dq: &Rational) -> Point {
    p.lerp(q, &(dp / (dp - dq)))
}

/// All traces between distinct simplex functions on triangle `t`.
pub(crate) fn traces(fib: &PLFibration, t: usize) -> Vec<IntersectionTrace> {
    let corners = fib.mesh.corners(t);
    let tri = fib.mesh.triangles[t];
    let n = fib.complex.len();
    let mut out = Vec::new();
    for s in 0..n {
        for u in s + 1..n {
            let d = [0, 1, 2].map(|i| &fib.values[s][tri[i]] - &fib.values[u][tri[i]]);
            out.push(IntersectionTrace {
                kind: classify(&corners, &d),
                sigma: s,
                tau: u,
                triangle: t,
            });
        }
    }
    out
}

/// Convex counter-clockwise faces of triangle `t` cut by every trace segment.
pub(crate) fn triangle_faces(fib: &PLFibration, t: usize) -> Vec<Vec<Point>> {
    let corners = fib.mesh.ccw_corners(t);
    let tri = fib.mesh.triangles[t];
    // simplices with identical functions on this triangle produce the same lines
    let distinct: BTreeSet<[&Rational; 3]> = fib
        .values
        .iter()
        .map(|v| [&v[tri[0]], &v[tri[1]], &v[tri[2]]])
        .collect();
    let distinct: Vec<[&Rational; 3]> = distinct.into_iter().collect();
    let plain = fib.mesh.corners(t);
    let mut lines = BTreeSet::new();
    for (i, f) in distinct.iter().enumerate() {
        for g in &distinct[i + 1..] {
            let d = [0, 1, 2].map(|k| f[k] - g[k]);
            if let TraceKind::Segment(p, q) = classify(&plain, &d) {
                lines.insert(Line::through(&p, &q));
            }
        }
    }
    let mut faces = vec![corners.to_vec()];
    for line in &lines {
        let mut next = Vec::with_capacity(faces.len() + 1);
        for face in faces {
            match line.split(&face) {
                Some((a, b)) => {
                    next.push(a);
                    next.push(b);
                }
                None => next.push(face),
            }
        }
        faces = next;
    }
    faces
}
