//! Test-only helpers that avoid the crate's own linear algebra.
#![allow(dead_code)]

use mbqc_core::stabilizer::graph_state_tableau;
use mbqc_core::{BitMat, Frame, GraphSpec, Tableau};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Plain Gaussian elimination on byte rows.
pub fn rank_u8(mut rows: Vec<Vec<u8>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][c] == 1) else {
            continue;
        };
        rows.swap(rank, p);
        for i in 0..rows.len() {
            if i != rank && rows[i][c] == 1 {
                for j in 0..cols {
                    rows[i][j] ^= rows[rank][j];
                }
            }
        }
        rank += 1;
    }
    rank
}

pub fn columns_u8(m: &BitMat, cols: &[usize]) -> Vec<Vec<u8>> {
    (0..m.nrows())
        .map(|r| cols.iter().map(|&c| m.get(r, c) as u8).collect())
        .collect()
}

/// Every size-`rows` column subset of full rank, in lexicographic order.
pub fn brute_force_bases(m: &BitMat) -> Vec<Vec<usize>> {
    let r = m.nrows();
    let c = m.ncols();
    let mut out = Vec::new();
    for mask in 0u32..(1 << c) {
        if mask.count_ones() as usize != r {
            continue;
        }
        let cols: Vec<usize> = (0..c).filter(|&j| mask >> j & 1 == 1).collect();
        if rank_u8(columns_u8(m, &cols)) == r {
            out.push(cols);
        }
    }
    out.sort();
    out
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> BitMat {
    let data: Vec<Vec<u8>> = (0..rows)
        .map(|_| (0..cols).map(|_| rng.random_bool(0.5) as u8).collect())
        .collect();
    let mut m = BitMat::zeros(rows, cols);
    for (i, r) in data.iter().enumerate() {
        for (j, &v) in r.iter().enumerate() {
            m.set(i, j, v == 1);
        }
    }
    m
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> GraphSpec {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) {
                edges.push((a, b));
            }
        }
    }
    GraphSpec::new(n, edges).unwrap()
}

pub const ALL_FRAMES: [&str; 6] = ["XY", "YX", "YZ", "ZY", "ZX", "XZ"];

pub fn random_frames(rng: &mut ChaCha8Rng, n: usize, equatorial_only: bool) -> Vec<Frame> {
    (0..n)
        .map(|_| {
            let choices: &[&str] = if equatorial_only { &ALL_FRAMES[..2] } else { &ALL_FRAMES };
            choices[rng.random_range(0..choices.len())].parse().unwrap()
        })
        .collect()
}

/// Seeded suite of graph states with `1 <= n <= max_n`.
pub fn suite(seed: u64, count: usize, max_n: usize, equatorial_only: bool) -> Vec<(GraphSpec, Tableau)> {
    let mut rng = rng(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(1..=max_n);
            let g = random_graph(&mut rng, n, 0.5);
            let frames = random_frames(&mut rng, n, equatorial_only);
            let t = graph_state_tableau(&g, &frames).unwrap();
            (g, t)
        })
        .collect()
}

pub fn random_angles(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.random_range(-std::f64::consts::FRAC_PI_2..std::f64::consts::FRAC_PI_2))
        .collect()
}

/// Random influence matrix with zero diagonal.
pub fn random_zero_diag(rng: &mut ChaCha8Rng, n: usize, p: f64) -> BitMat {
    let mut t = BitMat::zeros(n, n);
    for b in 0..n {
        for a in 0..n {
            if a != b && rng.random_bool(p) {
                t.set(b, a, true);
            }
        }
    }
    t
}

/// Reachability by depth-first search, independent of boolean squaring.
pub fn reachability(t: &BitMat) -> Vec<Vec<bool>> {
    let n = t.nrows();
    let mut reach = vec![vec![false; n]; n];
    for start in 0..n {
        let mut stack: Vec<usize> = (0..n).filter(|&b| t.get(b, start)).collect();
        while let Some(v) = stack.pop() {
            if reach[start][v] {
                continue;
            }
            reach[start][v] = true;
            stack.extend((0..n).filter(|&b| t.get(b, v)));
        }
    }
    reach
}

pub fn cluster3() -> Tableau {
    graph_state_tableau(&GraphSpec::path(3), &[Frame::XY; 3]).unwrap()
}

pub fn ghz3() -> Tableau {
    Tableau::from_paulis(&["ZIZ", "IZZ", "XXX"], vec![Frame::XY; 3]).unwrap()
}
