use newform_core::bessel::AddChar;
use newform_core::characters::gl2_cuspidal_oracle_all;
use newform_core::cosets::{binomial, MackeyEngine, Truncation};
use newform_core::newform::DepthZeroRep;
use newform_core::whittaker::WhittakerNewform;
use newform_core::{character_table, GroupContext};

#[test]
fn table_shapes() {
    for (n, q, rows, cusp) in [(2, 2, 3, 1), (2, 3, 8, 3), (3, 2, 6, 2), (1, 3, 2, 2)] {
        let ctx = GroupContext::from_order(n, q).unwrap();
        let t = character_table(&ctx, 0).unwrap();
        assert_eq!((t.rows(), t.cuspidal_rows().len()), (rows, cusp), "GL_{n}(F_{q})");
        t.verify(&ctx).unwrap();
    }
}

#[test]
fn gl2_cuspidals_match_classical_values() {
    for q in [2, 3, 4] {
        let ctx = GroupContext::from_order(2, q).unwrap();
        let t = character_table(&ctx, 1).unwrap();
        let mut rows: Vec<Vec<u64>> = t.cuspidal_rows().iter().map(|&r| t.values[r].clone()).collect();
        rows.sort();
        assert_eq!(rows, gl2_cuspidal_oracle_all(&ctx).unwrap());
    }
}

#[test]
fn oldform_binomials() {
    let ctx = GroupContext::from_order(2, 3).unwrap();
    let t = character_table(&ctx, 0).unwrap();
    let row = t.cuspidal_rows()[0];
    let mut e = MackeyEngine::new(&ctx, &t, row).unwrap();
    for m in 0..=5u32 {
        let d = e.oldform_dimension(m, &Truncation::for_level(m)).unwrap().dimension;
        assert_eq!(d, if m == 0 { 0 } else { binomial(m as i64 - 1, 1) }, "m = {m}");
    }
}

#[test]
fn whittaker_normalized_at_identity() {
    let ctx = GroupContext::from_order(2, 2).unwrap();
    let t = character_table(&ctx, 0).unwrap();
    let rep = DepthZeroRep::new(&ctx, &t, t.cuspidal_rows()[0], AddChar::new(&ctx, 1).unwrap(), 2).unwrap();
    let w = WhittakerNewform::new(&rep).unwrap();
    let id = rep.ring.identity(2);
    assert_eq!(w.via_coefficient(&id).unwrap(), 1);
    assert_eq!(w.via_gelfand(&id).unwrap(), 1);
}

#[test]
fn newform_rejects_gl1() {
    let ctx = GroupContext::from_order(1, 3).unwrap();
    let t = character_table(&ctx, 0).unwrap();
    assert!(DepthZeroRep::new(&ctx, &t, 0, AddChar::new(&ctx, 1).unwrap(), 1).is_err());
}
