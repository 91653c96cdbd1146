//! Exact planar predicates on rational points.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::rational::{self, Rational};

/// A point with exact rational coordinates, ordered lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point {
    pub x: Rational,
    pub y: Rational,
}

impl Point {
    pub fn new(x: Rational, y: Rational) -> Self {
        Point { x, y }
    }

    pub fn ints(x: i64, y: i64) -> Self {
        Point::new(rational::int(x), rational::int(y))
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        let half = rational::ratio(1, 2);
        Point::new((&self.x + &other.x) * &half, (&self.y + &other.y) * &half)
    }

    /// `self + t (other - self)`.
    pub fn lerp(&self, other: &Point, t: &Rational) -> Point {
        Point::new(
            &self.x + t * (&other.x - &self.x),
            &self.y + t * (&other.y - &self.y),
        )
    }

    /// Average of a non-empty point list.
    pub fn centroid(points: &[Point]) -> Point {
        let n = rational::int(points.len() as i64);
        let (sx, sy) = points.iter().fold((Rational::zero(), Rational::zero()), |(sx, sy), p| {
            (sx + &p.x, sy + &p.y)
        });
        Point::new(sx / &n, sy / n)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (rational::to_f64(&self.x), rational::to_f64(&self.y))
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", rational::format(&self.x), rational::format(&self.y))
    }
}

/// Twice the signed area of `abc`; positive when counter-clockwise.
pub fn orient(a: &Point, b: &Point, c: &Point) -> Rational {
    (&b.x - &a.x) * (&c.y - &a.y) - (&b.y - &a.y) * (&c.x - &a.x)
}

/// True if `p` lies on the closed segment `ab`.
pub fn on_segment(a: &Point, b: &Point, p: &Point) -> bool {
    orient(a, b, p).is_zero() && dot(a, b, p) >= Rational::zero() && dot(b, a, p) >= Rational::zero()
}

/// True if `p` lies on the open segment `ab` (`a != b`).
pub fn strictly_inside_segment(a: &Point, b: &Point, p: &Point) -> bool {
    on_segment(a, b, p) && p != a && p != b
}

/// `(b - a) . (p - a)`.
pub fn dot(a: &Point, b: &Point, p: &Point) -> Rational {
    (&b.x - &a.x) * (&p.x - &a.x) + (&b.y - &a.y) * (&p.y - &a.y)
}

/// Barycentric coordinates of `p` in the non-degenerate triangle `t`.
pub fn barycentric(t: &[Point; 3], p: &Point) -> [Rational; 3] {
    let area = orient(&t[0], &t[1], &t[2]);
    [
        orient(p, &t[1], &t[2]) / &area,
        orient(&t[0], p, &t[2]) / &area,
        orient(&t[0], &t[1], p) / area,
    ]
}

/// A line `a x + b y + c = 0` with coprime integer coefficients, first nonzero positive.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Line {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl Line {
    /// The line through two distinct points.
    pub fn through(p: &Point, q: &Point) -> Line {
        let a = &q.y - &p.y;
        let b = &p.x - &q.x;
        let c = -(&a * &p.x + &b * &p.y);
        let l = [&a, &b, &c]
            .iter()
            .fold(BigInt::one(), |l, r| l.lcm(r.denom()));
        let mut coeffs = [&a, &b, &c].map(|r| (r * Rational::from_integer(l.clone())).to_integer());
        rational::primitive(&mut coeffs);
        let [a, b, c] = coeffs;
        Line { a, b, c }
    }

    pub fn eval(&self, p: &Point) -> Rational {
        Rational::from_integer(self.a.clone()) * &p.x
            + Rational::from_integer(self.b.clone()) * &p.y
            + Rational::from_integer(self.c.clone())
    }

    /// Splits a convex counter-clockwise polygon into its parts on the positive and
    /// negative side. Returns `None` unless the line strictly separates two vertices.
    pub fn split(&self, polygon: &[Point]) -> Option<(Vec<Point>, Vec<Point>)> {
        let values: Vec<Rational> = polygon.iter().map(|p| self.eval(p)).collect();
        if !values.iter().any(|v| v.is_positive()) || !values.iter().any(|v| v.is_negative()) {
            return None;
        }
        let (mut pos, mut neg) = (Vec::new(), Vec::new());
        let n = polygon.len();
        for i in 0..n {
            let j = (i + 1) % n;
            let (p, vp, vq) = (&polygon[i], &values[i], &values[j]);
            if !vp.is_negative() {
                pos.push(p.clone());
            }
            if !vp.is_positive() {
                neg.push(p.clone());
            }
            if (vp.is_positive() && vq.is_negative()) || (vp.is_negative() && vq.is_positive()) {
                let t = vp / (vp - vq);
                let cut = p.lerp(&polygon[j], &t);
                pos.push(cut.clone());
                neg.push(cut);
            }
        }
        Some((pos, neg))
    }
}

/// True if `p` lies strictly inside the convex counter-clockwise polygon.
pub fn strictly_inside_convex(polygon: &[Point], p: &Point) -> bool {
    let n = polygon.len();
    (0..n).all(|i| orient(&polygon[i], &polygon[(i + 1) % n], p).is_positive())
}

/// Winding number of a closed polyline around `center` (which must not lie on it).
pub fn winding_number(points: &[Point], center: &Point) -> i64 {
    let mut w = 0;
    let n = points.len();
    for i in 0..n {
        let a = &points[i];
        let b = &points[(i + 1) % n];
        if a.y <= center.y {
            if b.y > center.y && orient(a, b, center).is_positive() {
                w += 1;
            }
        } else if b.y <= center.y && orient(a, b, center).is_negative() {
            w -= 1;
        }
    }
    w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    #[test]
    fn canonical_line_is_independent_of_points() {
        let l1 = Line::through(&Point::ints(0, 0), &Point::ints(2, 4));
        let l2 = Line::through(&Point::new(ratio(1, 2), int(1)), &Point::ints(-1, -2));
        assert_eq!(l1, l2);
        assert_eq!((l1.a.clone(), l1.b.clone(), l1.c.clone()), (BigInt::from(2), BigInt::from(-1), BigInt::from(0)));
    }

    #[test]
    fn split_square_by_diagonal() {
        let sq = vec![Point::ints(0, 0), Point::ints(1, 0), Point::ints(1, 1), Point::ints(0, 1)];
        let l = Line::through(&Point::ints(0, 0), &Point::ints(1, 1));
        let (pos, neg) = l.split(&sq).unwrap();
        assert_eq!(pos.len(), 3);
        assert_eq!(neg.len(), 3);
        let edge = Line::through(&Point::ints(0, 0), &Point::ints(1, 0));
        assert!(edge.split(&sq).is_none());
        let mid = Line::through(&Point::new(ratio(1, 2), int(0)), &Point::new(ratio(1, 2), int(1)));
        let (a, b) = mid.split(&sq).unwrap();
        assert_eq!((a.len(), b.len()), (4, 4));
    }

    #[test]
    fn predicates() {
        let a = Point::ints(0, 0);
        let b = Point::ints(2, 0);
        assert!(on_segment(&a, &b, &Point::ints(1, 0)));
        assert!(on_segment(&a, &b, &b));
        assert!(!strictly_inside_segment(&a, &b, &b));
        assert!(!on_segment(&a, &b, &Point::ints(3, 0)));
        let tri = [a.clone(), b.clone(), Point::ints(0, 2)];
        assert_eq!(barycentric(&tri, &Point::ints(1, 0)), [ratio(1, 2), ratio(1, 2), int(0)]);
        let square = [Point::ints(1, 1), Point::ints(-1, 1), Point::ints(-1, -1), Point::ints(1, -1)];
        assert_eq!(winding_number(&square, &a), 1);
        assert_eq!(winding_number(&square, &Point::ints(5, 0)), 0);
    }
}
