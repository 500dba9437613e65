mod common;

use common::{random_zero_diag, reachability, rng};
use mbqc_core::temporal::{closure, cones, io_sets, transitive_closure, OrderKind};
use mbqc_core::BitMat;
use rand::Rng;

#[test]
fn closure_matches_dfs_reachability() {
    let mut r = rng(7);
    for _ in 0..200 {
        let n = r.random_range(1..=8);
        let mut t = random_zero_diag(&mut r, n, 0.2);
        if r.random_bool(0.3) {
            let a = r.random_range(0..n);
            t.set(a, a, true);
        }
        let c = transitive_closure(&t);
        let reach = reachability(&t);
        for a in 0..n {
            for b in 0..n {
                assert_eq!(c.get(b, a), reach[a][b]);
            }
        }
        let rel = closure(&t);
        assert_eq!(closure(&rel.closure).closure, rel.closure);
        match &rel.kind {
            OrderKind::PartialOrder { rounds } => {
                let mut round_of = vec![usize::MAX; n];
                for (k, layer) in rounds.iter().enumerate() {
                    for &q in layer {
                        assert_eq!(round_of[q], usize::MAX);
                        round_of[q] = k;
                    }
                }
                assert!(round_of.iter().all(|&k| k != usize::MAX));
                for b in 0..n {
                    for a in t.row(b).ones() {
                        assert!(round_of[a] < round_of[b]);
                    }
                }
            }
            OrderKind::Ctc { witness } => {
                assert!((0..n).any(|a| reach[a][a]));
                let len = witness.len();
                for i in 0..len {
                    assert!(t.get(witness[(i + 1) % len], witness[i]));
                }
                let shortest = (1..=n)
                    .find(|&l| {
                        let mut p = t.clone();
                        for _ in 1..l {
                            p = p.bool_mul(&t);
                        }
                        !p.diagonal().is_zero()
                    })
                    .unwrap();
                assert_eq!(len, shortest);
            }
        }
    }
}

#[test]
fn cones_are_consistent() {
    let mut r = rng(8);
    for _ in 0..50 {
        let n = r.random_range(1..=8);
        let t = random_zero_diag(&mut r, n, 0.3);
        let (fc, bc) = cones(&t);
        for a in 0..n {
            for b in 0..n {
                assert_eq!(fc[a].get(b), bc[b].get(a));
            }
        }
    }
}

#[test]
fn full_first_column() {
    let mut t = BitMat::zeros(3, 3);
    t.set(1, 0, true);
    t.set(2, 0, true);
    let (i, o) = io_sets(&t);
    assert_eq!(i, vec![0]);
    assert_eq!(o, vec![1, 2]);
}
