//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeSet;
use std::io::Write;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use pdbundle::generators::{
    circle_points, image_fibration, instability, monodromy_fibration, path_samples, pixel_complex, random_complex,
    random_fibration, Image, A, B, C, D,
};
use pdbundle::persistence::vietoris_rips;
use pdbundle::rational::{int, ratio, Rational};
use pdbundle::sheaf::verify_edge_values;
use pdbundle::stratify::geometry::Point;
use pdbundle::{
    build_sheaf, build_stratification, diagram, induced_indexing, path_vineyard, persistent_betti, reduce,
    FiltrationValues, Pair, PairSet, SimplicialComplex,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pdbundle")
}

fn run_cli(args: &[&str], stdin: &str) -> Result<String, String> {
    let mut child = Command::new(bin())
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| e.to_string())?;
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).map_err(|e| e.to_string())?;
    let out = child.wait_with_output().map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!("{args:?} failed: {}", String::from_utf8_lossy(&out.stderr)));
    }
    String::from_utf8(out.stdout).map_err(|e| e.to_string())
}

fn pairs_at(fib: &pdbundle::PLFibration, p: &Point) -> Result<PairSet, String> {
    let f = fib.filtration_at(p).map_err(|e| e.to_string())?;
    let idx = induced_indexing(&f, &fib.complex).map_err(|e| e.to_string())?;
    reduce(&fib.complex, &idx).map_err(|e| e.to_string())
}

fn degree_set(pairs: &PairSet, q: usize, k: &SimplicialComplex) -> BTreeSet<Pair> {
    pairs.degree(q, k).into_iter().collect()
}

fn pair_list(v: &Value) -> Vec<(u64, u64)> {
    v.as_array()
        .into_iter()
        .flatten()
        .filter_map(|p| Some((p.get(0)?.as_u64()?, p.get(1)?.as_u64()?)))
        .collect()
}

fn monodromy_reproduction() -> Outcome {
    let fib_text = run_cli(&["gen-monodromy"], "")?;
    let sections: Value = serde_json::from_str(&run_cli(&["sections"], &fib_text)?).map_err(|e| e.to_string())?;
    ensure!(sections["count"] == "0", "expected no global sections, got {}", sections["count"]);
    ensure!(sections["sections"].as_array().is_some_and(|s| s.is_empty()), "section list not empty");
    let report: Value = serde_json::from_str(&run_cli(&["monodromy"], &fib_text)?).map_err(|e| e.to_string())?;
    ensure!(report["nontrivial_count"] == 1, "expected one nontrivial loop, got {}", report["nontrivial_count"]);
    let twisted: Vec<&Value> = report["loops"].as_array().unwrap().iter().filter(|l| l["nontrivial"] == true).collect();
    let center = &twisted[0]["center_point"];
    ensure!(center == &serde_json::json!(["0", "0"]), "loop centered at {center}, not the origin");
    let moved: Vec<(Vec<(u64, u64)>, usize)> = twisted[0]["permutation"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (pair_list(e), 0))
        .collect();
    let (a, b, c, d) = (A as u64, B as u64, C as u64, D as u64);
    let expected = vec![(vec![(a, c), (b, d)], 0), (vec![(b, d), (a, c)], 0)];
    ensure!(moved == expected, "permutation {} is not (a,c)<->(b,d)", twisted[0]["permutation"]);
    Ok("0 sections; one twisted loop at the origin swapping (a,c) and (b,d)".into())
}

fn quadrant_pairs() -> Outcome {
    let fib = monodromy_fibration().map_err(|e| e.to_string())?;
    let strat = build_stratification(&fib).map_err(|e| e.to_string())?;
    let k = &fib.complex;
    let first: BTreeSet<Pair> = [Pair::finite(A, C), Pair::finite(B, D)].into();
    let third: BTreeSet<Pair> = [Pair::finite(A, D), Pair::finite(B, C)].into();
    for (name, x, y, want) in [
        ("Q1", 1, 1, &first),
        ("Q2", -1, 1, &first),
        ("Q3", -1, -1, &third),
        ("Q4", 1, -1, &first),
    ] {
        let p = Point::new(ratio(x, 2), ratio(y, 3));
        let direct = degree_set(&pairs_at(&fib, &p)?, 1, k);
        ensure!(&direct == want, "{name}: {direct:?}");
        let cell = strat.locate(&p).map_err(|e| e.to_string())?;
        let stored = degree_set(&strat.cell(cell).pairs, 1, k);
        ensure!(&stored == want, "{name} cell {cell}: {stored:?}");
    }
    Ok("Q1, Q2, Q4 pair (a,c),(b,d); Q3 pairs (a,d),(b,c)".into())
}

fn circle_restriction() -> Outcome {
    let fib = monodromy_fibration().map_err(|e| e.to_string())?;
    let samples = path_samples(&fib, &circle_points()).map_err(|e| e.to_string())?;
    ensure!(samples.len() == 9, "{} samples", samples.len());
    ensure!(samples[0].1 == samples[8].1, "loop does not close");
    let vy = path_vineyard(&fib.complex, &samples).map_err(|e| e.to_string())?;
    let deg1 = vy.loop_permutation.restrict(|p| fib.complex.dim(p.birth) == 1);
    let want = vec![(Pair::finite(A, C), Pair::finite(B, D)), (Pair::finite(B, D), Pair::finite(A, C))];
    ensure!(deg1.moved() == want, "loop permutation {:?}", deg1.moved());
    Ok("gamma(u0) != gamma(u8): the two degree-1 pairs trade places".into())
}

fn monotone_values(rng: &mut impl Rng, k: &SimplicialComplex) -> Vec<Rational> {
    let mut v: Vec<Rational> = Vec::with_capacity(k.len());
    for s in 0..k.len() {
        let floor = k.boundary(s).iter().map(|&f| v[f].clone()).max().unwrap_or_else(|| int(-3));
        v.push(floor + ratio(rng.gen_range(0..5), rng.gen_range(1..5)));
    }
    v
}

fn order_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut largest = 0;
    for trial in 0..100 {
        let k = random_complex(&mut rng, 40);
        largest = largest.max(k.len());
        let values = monotone_values(&mut rng, &k);
        let (a, b) = (int(rng.gen_range(1..6)), int(rng.gen_range(-5..5)));
        // strictly increasing: x -> x^3 + a x + b
        let g: Vec<Rational> = values.iter().map(|x| x * x * x + &a * x + &b).collect();
        let f = FiltrationValues::new(&k, values).map_err(|e| e.to_string())?;
        let g = FiltrationValues::new(&k, g).map_err(|e| format!("trial {trial}: {e}"))?;
        let pf = reduce(&k, &induced_indexing(&f, &k).unwrap()).unwrap();
        let pg = reduce(&k, &induced_indexing(&g, &k).unwrap()).unwrap();
        ensure!(pf == pg, "trial {trial}: pair sets differ");
    }
    Ok(format!("100 complexes up to {largest} simplices"))
}

fn betti_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut checks = 0;
    for trial in 0..50 {
        let n = rng.gen_range(3..=8);
        let points: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..4.0), rng.gen_range(0.0..4.0)]).collect();
        let (k, f) = vietoris_rips(&points, 2).map_err(|e| e.to_string())?;
        let pairs = reduce(&k, &induced_indexing(&f, &k).unwrap()).unwrap();
        let mut levels: Vec<Rational> = f.as_slice().to_vec();
        levels.sort();
        levels.dedup();
        for q in 0..=2 {
            let qp = pairs.degree(q, &k);
            for (i, r) in levels.iter().enumerate() {
                for s in &levels[i..] {
                    let from_pairs = qp
                        .iter()
                        .filter(|p| f.get(p.birth) <= r && p.death.is_none_or(|d| f.get(d) > s))
                        .count();
                    let rank = persistent_betti(&k, &f, q, r, s).map_err(|e| e.to_string())?;
                    ensure!(from_pairs == rank, "trial {trial}, q={q}: {from_pairs} vs rank {rank}");
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("{checks} (q, r, s) thresholds on 50 Rips complexes"))
}

fn random_point_on(a: &Point, b: &Point, rng: &mut impl Rng) -> Point {
    let den = rng.gen_range(1..=12);
    a.lerp(b, &ratio(rng.gen_range(0..=den), den))
}

/// Criteria 6 and 7 share their fibrations; returns each outcome with its own time.
fn partition_and_edges(points_per_fibration: usize) -> ((Outcome, Duration), (Outcome, Duration)) {
    let (mut partition_time, mut edge_time) = (Duration::ZERO, Duration::ZERO);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut located, mut edge_checks, mut sheaves) = (0usize, 0usize, 0usize);
    let mut partition: Outcome = Ok(String::new());
    let mut edges: Outcome = Ok(String::new());
    for trial in 0..20 {
        let start = Instant::now();
        let fib = random_fibration(&mut rng, 15, 8, 3);
        let strat = match build_stratification(&fib) {
            Ok(s) => s,
            Err(e) => {
                let none = Duration::ZERO;
                return ((Err(format!("trial {trial}: {e}")), none), (Err("stratification failed".into()), none));
            }
        };
        let xs: Vec<&Rational> = fib.mesh.vertices.iter().map(|p| &p.x).collect();
        let ys: Vec<&Rational> = fib.mesh.vertices.iter().map(|p| &p.y).collect();
        let whole = |r: &Rational| -> i64 { r.to_integer().try_into().unwrap() };
        let (x0, x1) = (whole(xs.iter().min().unwrap()), whole(xs.iter().max().unwrap()));
        let (y0, y1) = (whole(ys.iter().min().unwrap()), whole(ys.iter().max().unwrap()));
        let mesh_edges: Vec<(usize, usize)> = fib.mesh.edges().into_keys().collect();
        let one_cells: Vec<&pdbundle::stratify::Cell> = strat.of_dim(1).collect();
        for i in 0..points_per_fibration {
            let p = match i % 3 {
                0 => {
                    let den = rng.gen_range(1..=16i64);
                    let mut along = |lo: i64, hi: i64| int(lo) + ratio(rng.gen_range(0..=den * (hi - lo)), den);
                    Point::new(along(x0, x1), along(y0, y1))
                }
                1 => {
                    let (u, v) = mesh_edges[rng.gen_range(0..mesh_edges.len())];
                    random_point_on(&fib.mesh.vertices[u], &fib.mesh.vertices[v], &mut rng)
                }
                _ => one_cells[rng.gen_range(0..one_cells.len())].geometry().sample(&mut rng),
            };
            let expected = match pairs_at(&fib, &p) {
                Ok(e) => e,
                Err(e) => {
                    partition = Err(format!("trial {trial}: {e}"));
                    break;
                }
            };
            let cell = match strat.locate(&p) {
                Ok(c) => c,
                Err(e) => {
                    partition = Err(format!("trial {trial}: locate {p}: {e}"));
                    break;
                }
            };
            if strat.cell(cell).pairs != expected {
                partition = Err(format!("trial {trial}: cell {cell} disagrees with recomputation at {p}"));
                break;
            }
            located += 1;
        }
        partition_time += start.elapsed();
        let start = Instant::now();
        for q in 0..=fib.complex.max_dim().unwrap_or(0) {
            let result = build_sheaf(&strat, &fib, q).and_then(|sheaf| verify_edge_values(&sheaf, &strat, &fib, 5, trial));
            match result {
                Ok(n) => {
                    edge_checks += n;
                    sheaves += 1;
                }
                Err(e) => {
                    edges = Err(format!("trial {trial}, degree {q}: {e}"));
                }
            }
        }
        edge_time += start.elapsed();
    }
    if partition.is_ok() {
        partition = Ok(format!("{located} located points on 20 fibrations agree with recomputation"));
    }
    if edges.is_ok() {
        edges = Ok(format!("{edge_checks} exact value checks on the edges of {sheaves} sheaves"));
    }
    ((partition, partition_time), (edges, edge_time))
}

fn vineyard_instability() -> Outcome {
    let r = instability(&ratio(1, 10), &int(10)).map_err(|e| e.to_string())?;
    ensure!(r.sup_distance < ratio(1, 10), "sup distance {}", r.sup_distance);
    ensure!(r.min_over_bijections >= int(10), "min over bijections {}", r.min_over_bijections);
    Ok(format!(
        "sup distance {} < 1/10; vines stay {} apart under both matchings",
        r.sup_distance, r.min_over_bijections
    ))
}

/// Channel value of every simplex of the pixel complex, straight from the pixels: the
/// minimum over pixel triangles containing it.
fn channel_values(image: &Image, k: &SimplicialComplex, ch: usize) -> Vec<Rational> {
    let w = image.width as u64;
    let mut tris: Vec<(BTreeSet<u64>, u32)> = Vec::new();
    for i in 0..image.height as u64 {
        for j in 0..w {
            let v = |a: u64, b: u64| a * (w + 1) + b;
            let value = image.pixels[(i * w + j) as usize][ch];
            tris.push(([v(i, j), v(i, j + 1), v(i + 1, j + 1)].into(), value));
            tris.push(([v(i, j), v(i + 1, j), v(i + 1, j + 1)].into(), value));
        }
    }
    k.simplices()
        .iter()
        .map(|s| {
            let verts: BTreeSet<u64> = s.vertices().iter().copied().collect();
            let m = tris.iter().filter(|(t, _)| verts.is_subset(t)).map(|(_, v)| *v).min().unwrap();
            int(m as i64)
        })
        .collect()
}

fn image_corners() -> Outcome {
    let mut ppm = String::from("P3\n4 4\n255\n");
    for i in 0..4 {
        for j in 0..4 {
            ppm.push_str(&format!("{} {} {}\n", 40 * i + 10 * j, 200 - 30 * j - 5 * i, (37 * (i + 2 * j)) % 101));
        }
    }
    let text = run_cli(&["gen-image"], &ppm)?;
    let fib = pdbundle::io::fibration_from_json(&pdbundle::io::parse_json(&text).unwrap()).map_err(|e| e.to_string())?;
    let image = Image::parse_ppm(&ppm).map_err(|e| e.to_string())?;
    let direct = image_fibration(&image).map_err(|e| e.to_string())?;
    ensure!(fib == direct, "CLI output differs from the library fibration");
    let (k, _) = pixel_complex(4, 4);
    ensure!(k == fib.complex, "unexpected complex");
    let mut checks = 0;
    for (name, corner, ch) in [("red", Point::ints(1, 0), 0), ("green", Point::ints(0, 1), 1), ("blue", Point::ints(0, 0), 2)] {
        let f = fib.filtration_at(&corner).map_err(|e| e.to_string())?;
        let oracle = FiltrationValues::new(&k, channel_values(&image, &k, ch)).map_err(|e| e.to_string())?;
        ensure!(f == oracle, "{name} corner filtration differs from the channel values");
        let pairs = pairs_at(&fib, &corner)?;
        let mut levels: Vec<Rational> = oracle.as_slice().to_vec();
        levels.sort();
        levels.dedup();
        for q in 0..=2 {
            let pd = diagram(&pairs, &f, q, &k);
            let points = pd.multiset();
            for (i, r) in levels.iter().enumerate() {
                for s in &levels[i..] {
                    let from_pd = points.iter().filter(|(b, d)| b <= r && d.as_ref().is_none_or(|d| d > s)).count();
                    let rank = persistent_betti(&k, &oracle, q, r, s).map_err(|e| e.to_string())?;
                    ensure!(from_pd == rank, "{name}, q={q}, r={r}, s={s}: {from_pd} vs {rank}");
                    checks += 1;
                }
            }
        }
    }
    Ok(format!("red, green and blue corner diagrams match {checks} single-channel ranks"))
}

struct Criterion {
    number: usize,
    name: &'static str,
    limit: Option<Duration>,
}

fn report(c: &Criterion, outcome: Outcome, elapsed: Duration) -> bool {
    let late = c.limit.is_some_and(|l| elapsed > l);
    let (ok, detail) = match outcome {
        Ok(_) if late => (false, format!("took longer than {:?}", c.limit.unwrap())),
        Ok(d) => (true, d),
        Err(e) => (false, e),
    };
    println!(
        "[{}] criterion {} {} ({:.2}s): {}",
        if ok { "PASS" } else { "FAIL" },
        c.number,
        c.name,
        elapsed.as_secs_f64(),
        detail
    );
    ok
}

fn timed(f: impl FnOnce() -> Outcome) -> (Outcome, Duration) {
    let start = Instant::now();
    let out = f();
    (out, start.elapsed())
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let criteria = [
        Criterion { number: 1, name: "monodromy reproduction", limit: secs(1) },
        Criterion { number: 2, name: "quadrant pair sets", limit: None },
        Criterion { number: 3, name: "circle restriction", limit: None },
        Criterion { number: 4, name: "pairs depend only on order", limit: secs(10) },
        Criterion { number: 5, name: "persistent Betti oracle", limit: secs(60) },
        Criterion { number: 6, name: "stratification partition oracle", limit: secs(120) },
        Criterion { number: 7, name: "edge value certificate", limit: None },
        Criterion { number: 8, name: "vineyard instability", limit: secs(5) },
        Criterion { number: 9, name: "image corners", limit: None },
    ];
    let mut all = true;
    // warm the binary so process start-up is not charged to the first criterion
    let _ = run_cli(&["--help"], "");
    let (o, t) = timed(monodromy_reproduction);
    all &= report(&criteria[0], o, t);
    let (o, t) = timed(quadrant_pairs);
    all &= report(&criteria[1], o, t);
    let (o, t) = timed(circle_restriction);
    all &= report(&criteria[2], o, t);
    let (o, t) = timed(order_invariance);
    all &= report(&criteria[3], o, t);
    let (o, t) = timed(betti_oracle);
    all &= report(&criteria[4], o, t);
    let ((partition, t6), (edges, t7)) = partition_and_edges(1000);
    all &= report(&criteria[5], partition, t6);
    all &= report(&criteria[6], edges, t7);
    let (o, t) = timed(vineyard_instability);
    all &= report(&criteria[7], o, t);
    let (o, t) = timed(image_corners);
    all &= report(&criteria[8], o, t);
    if !all {
        std::process::exit(1);
    }
}
