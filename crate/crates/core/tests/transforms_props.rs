mod common;

use common::{random_zero_diag, reachability, rng, suite};
use mbqc_core::processing::{enumerate_pairs, relations_for_pair};
use mbqc_core::temporal::transitive_closure;
use mbqc_core::transforms::{
    extended_influence, flip_plane, flip_rule, modified_flip, remove_ctc1, same_relation, split_extended,
};
use mbqc_core::BitMat;
use rand::Rng;

fn same_reach(a: &BitMat, b: &BitMat) -> bool {
    reachability(a) == reachability(b)
}

#[test]
fn flips_preserve_temporal_relation() {
    let mut r = rng(31);
    for _ in 0..500 {
        let n = r.random_range(1..=8);
        let t = random_zero_diag(&mut r, n, 0.25);
        let i = r.random_range(0..n);
        let rel = mbqc_core::ProcessingRelations {
            pair: mbqc_core::ExtremalPair::new(vec![], vec![]),
            t: t.clone(),
            h: BitMat::zeros(n, 0),
            z: BitMat::zeros(0, n),
            r: BitMat::zeros(0, 0),
        };
        let f = flip_plane(&rel, i).unwrap();
        assert!(same_reach(&t, &f.relations.t));
        assert!(same_relation(&t, &f.relations.t));
        assert_eq!(flip_plane(&f.relations, i).unwrap().relations.t, t);
        let m = modified_flip(&t, i).unwrap();
        assert!(m.t.diagonal().is_zero());
        assert!(same_reach(&t, &m.t));
    }
}

#[test]
fn plane_flip_matches_rederived_normal_form() {
    let mut checked = 0;
    for (_, t) in suite(32, 60, 5, false) {
        for (pair, rel) in enumerate_pairs(&t, None) {
            for a in 0..t.n() {
                match flip_plane(&rel, a) {
                    Ok(rep) => {
                        let direct = relations_for_pair(&t.flip_frame(a), &pair).unwrap();
                        assert_eq!(rep.relations, direct);
                        assert_eq!(flip_plane(&rep.relations, a).unwrap().relations, rel);
                        checked += 1;
                    }
                    Err(_) => assert!(rel.t.get(a, a)),
                }
            }
        }
    }
    assert!(checked > 500);
}

#[test]
fn extended_matrix_agrees_blockwise() {
    for (_, t) in suite(33, 60, 5, false) {
        for (pair, rel) in enumerate_pairs(&t, None) {
            let ext = extended_influence(&rel);
            let k = pair.i_gauge.len();
            for a in (0..t.n()).filter(|&a| !rel.t.get(a, a)) {
                let via_ext = split_extended(&flip_rule(&ext, k + a), &pair, t.n());
                assert_eq!(via_ext, flip_plane(&rel, a).unwrap().relations);
            }
        }
    }
}

#[test]
fn ctc_removal_reduces_closure_self_loops() {
    let mut removed = 0;
    for (_, t) in suite(34, 60, 5, false) {
        for (pair, rel) in enumerate_pairs(&t, None) {
            for i in 0..t.n() {
                if !rel.t.get(i, i) || pair.i_gauge.contains(&i) || pair.o_comp.contains(&i) {
                    continue;
                }
                let rep = remove_ctc1(&t, &rel, i).unwrap();
                let new = &rep.relations;
                assert!(new.pair.i_gauge.contains(&i) && new.pair.o_comp.contains(&i));
                assert!(new.t.row(i).is_zero() && new.t.col(i).is_zero());
                let before = transitive_closure(&rel.t).diagonal().weight();
                let after = transitive_closure(&new.t).diagonal().weight();
                assert!(after < before, "{before} -> {after}");
                removed += 1;
            }
        }
    }
    assert!(removed > 20);
}
