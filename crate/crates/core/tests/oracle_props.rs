mod common;

use common::{random_angles, rng, suite};
use mbqc_core::oracle::{
    all_gauges, branches, randomness_check, run_exact, run_exact_with_order, run_postselected, verify_determinism,
    MbqcProgram, OracleError,
};
use mbqc_core::processing::enumerate_pairs;
use mbqc_core::temporal::closure;
use mbqc_core::transforms::{flip_plane, flipped_angle};
use mbqc_core::Bits;

/// Partial-order programs from the random suite, with random angles.
fn programs(seed: u64, count: usize) -> Vec<MbqcProgram> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    for (_, t) in suite(seed, count, 4, false) {
        for (_, rel) in enumerate_pairs(&t, Some(6)) {
            if closure(&rel.t).is_partial_order() {
                let angles = random_angles(&mut r, t.n());
                out.push(MbqcProgram::new(t.clone(), angles, rel).unwrap());
            }
        }
    }
    out
}

#[test]
fn gauge_invariance_and_normalization() {
    for prog in programs(21, 25) {
        let k = prog.gauge_len();
        let reference = run_exact(&prog, &Bits::zeros(k)).unwrap();
        assert!((reference.total() - 1.0).abs() < 1e-10);
        for g in all_gauges(k) {
            let d = run_exact(&prog, &g).unwrap();
            assert!(d.distance(&reference) < 1e-10);
        }
    }
}

#[test]
fn determinism_of_enumerated_programs() {
    for prog in programs(22, 25) {
        let rep = verify_determinism(&prog).unwrap();
        assert!(rep.deterministic, "deviation {}", rep.max_deviation);
    }
}

#[test]
fn order_invariance() {
    for prog in programs(23, 25) {
        let rel = closure(&prog.relations.t);
        let rounds = rel.rounds().unwrap();
        let reversed: Vec<usize> = rounds.iter().flat_map(|r| r.iter().rev().copied()).collect();
        let g = Bits::zeros(prog.gauge_len());
        let a = run_exact(&prog, &g).unwrap();
        let b = run_exact_with_order(&prog, &g, &reversed).unwrap();
        assert!(a.distance(&b) < 1e-10);
    }
}

#[test]
fn flipped_programs_have_same_output() {
    let mut checked = 0;
    for prog in programs(24, 25) {
        for a in 0..prog.n() {
            let Ok(rep) = flip_plane(&prog.relations, a) else { continue };
            if !closure(&rep.relations.t).is_partial_order() {
                continue;
            }
            let mut angles = prog.angles.clone();
            angles[a] = flipped_angle(angles[a]);
            let flipped = MbqcProgram::new(prog.tableau.flip_frame(a), angles, rep.relations).unwrap();
            for g in all_gauges(prog.gauge_len()) {
                let d1 = run_exact(&prog, &g).unwrap();
                let d2 = run_exact(&flipped, &g).unwrap();
                assert!(d1.distance(&d2) < 1e-10, "site {a}: {d1:?} vs {d2:?}");
            }
            checked += 1;
        }
    }
    assert!(checked > 20);
}

#[test]
fn gauge_relabeling_preserves_branch_weights() {
    // Multiplying a generator into the state maps branch (s, g) to
    // (s + Δs, g + Δg) with equal probability.
    use mbqc_core::transforms::gauge_action;
    for prog in programs(25, 10) {
        let order = closure(&prog.relations.t).linear_extension().unwrap();
        let k = prog.gauge_len();
        let table: Vec<Vec<(Bits, f64)>> = all_gauges(k)
            .map(|g| {
                branches(&prog, &g, &order, &[])
                    .unwrap()
                    .into_iter()
                    .map(|b| (b.s, b.prob))
                    .collect()
            })
            .collect();
        let lookup = |g: &Bits, s: &Bits| -> f64 {
            let gi = g.to_u64() as usize;
            table[gi].iter().find(|(x, _)| x == s).map_or(0.0, |(_, p)| *p)
        };
        for row in 0..prog.n() {
            let act = gauge_action(&prog.tableau, &prog.relations.pair, &[row]);
            for g in all_gauges(k) {
                for (s, p) in &table[g.to_u64() as usize] {
                    let p2 = lookup(&g.xor(&act.delta_g), &s.xor(&act.delta_s));
                    assert!((p - p2).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn postselection_is_trivial_on_partial_orders() {
    for prog in programs(26, 10) {
        let g = Bits::zeros(prog.gauge_len());
        let ps = run_postselected(&prog, &g).unwrap();
        assert!((ps.success_prob - 1.0).abs() < 1e-10);
        assert!(ps.distribution.distance(&run_exact(&prog, &g).unwrap()) < 1e-10);
    }
}

fn cluster_program(angles: Vec<f64>) -> MbqcProgram {
    use mbqc_core::processing::relations_for_pair;
    let t = common::cluster3();
    let rel = relations_for_pair(&t, &mbqc_core::ExtremalPair::new(vec![0], vec![2])).unwrap();
    MbqcProgram::new(t, angles, rel).unwrap()
}

#[test]
fn single_qubit_overlap() {
    use mbqc_core::{BitMat, Frame, Tableau};
    let t = Tableau::new(BitMat::identity(1), BitMat::zeros(1, 1), vec![Frame::XY]).unwrap();
    let (pair, rel) = enumerate_pairs(&t, None).next().unwrap();
    assert_eq!(pair.i_gauge, vec![0]);
    for phi in [0.0, 0.4, -1.2, 1.5] {
        let prog = MbqcProgram::new(t.clone(), vec![phi], rel.clone()).unwrap();
        let p0: f64 = branches(&prog, &Bits::zeros(1), &[0], &[])
            .unwrap()
            .iter()
            .filter(|b| !b.s.get(0))
            .map(|b| b.prob)
            .sum();
        assert!((p0 - (1.0 + f64::cos(phi)) / 2.0).abs() < 1e-12);
    }
}

#[test]
fn dropping_a_compensated_outcome_breaks_determinism() {
    let mut r = rng(27);
    for _ in 0..5 {
        let mut prog = cluster_program(random_angles(&mut r, 3));
        prog.relations.z = mbqc_core::BitMat::from_u8_rows(&[[0, 0, 1]]);
        let rep = verify_determinism(&prog).unwrap();
        assert!(!rep.deterministic && rep.max_deviation > 1e-3);
    }
}

#[test]
fn ghz_full_parity_is_deterministic() {
    use mbqc_core::processing::relations_for_pair;
    let t = common::ghz3();
    let rel = relations_for_pair(&t, &mbqc_core::ExtremalPair::new(vec![0], vec![2])).unwrap();
    assert_eq!(rel.z, mbqc_core::BitMat::from_u8_rows(&[[1, 1, 1]]));
    let mut r = rng(28);
    for _ in 0..5 {
        let prog = MbqcProgram::new(t.clone(), random_angles(&mut r, 3), rel.clone()).unwrap();
        assert!(verify_determinism(&prog).unwrap().deterministic);
        let p = randomness_check(&prog, &Bits::from_u8(&[1, 0, 0]), &Bits::zeros(1)).unwrap();
        assert!((p - 0.5).abs() < 1e-10);
    }
}

#[test]
fn invariant_bits_are_rejected() {
    let prog = cluster_program(vec![0.3, 0.1, -0.2]);
    assert_eq!(
        randomness_check(&prog, &Bits::from_u8(&[1, 0, 1]), &Bits::zeros(1)),
        Err(OracleError::InvariantBit)
    );
}

#[test]
fn mutual_loop_runs_only_postselected() {
    use mbqc_core::{BitMat, Frame, Tableau};
    let target = BitMat::from_u8_rows(&[[0, 1], [1, 0]]);
    let mut found = None;
    'search: for code in 0u32..256 {
        let bit = |j: u32| ((code >> j) & 1) as u8;
        let phi = BitMat::from_u8_rows(&[[bit(0), bit(1)], [bit(2), bit(3)]]);
        let s = BitMat::from_u8_rows(&[[bit(4), bit(5)], [bit(6), bit(7)]]);
        let Ok(t) = Tableau::new(phi, s, vec![Frame::XY; 2]) else { continue };
        for (_, rel) in enumerate_pairs(&t, None) {
            if rel.t == target {
                found = Some((t, rel));
                break 'search;
            }
        }
    }
    let (t, rel) = found.expect("a mutual-loop instance exists");
    let prog = MbqcProgram::new(t, vec![0.7, -0.4], rel).unwrap();
    let g = Bits::zeros(prog.gauge_len());
    assert_eq!(run_exact(&prog, &g), Err(OracleError::NeedsPostSelection));
    let ps = run_postselected(&prog, &g).unwrap();
    assert!(ps.success_prob > 0.0 && ps.success_prob < 1.0);
    assert!((ps.distribution.total() - 1.0).abs() < 1e-10);
}
