use std::sync::Arc;

use newform_core::cache::{cache_key, Cache, CacheKind};
use newform_core::cosets::{binomial, d_family, is_strict_chain};
use newform_core::field::FieldDescriptor;
use newform_core::local::{LMat, LocalRing, Ls, PatternGroup, Window};
use newform_core::minimax::{Basis, Stratum};
use newform_core::modp::ComputationField;
use newform_core::newform::sample_generic;
use newform_core::report::{sha256_hex, Report, RunConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn field(q: u64) -> Arc<FieldDescriptor> {
    Arc::new(FieldDescriptor::from_order(q).unwrap())
}

fn ring(q: u64) -> LocalRing {
    LocalRing::new(field(q), Window { b: 6, n: 8 }).unwrap()
}

fn zero_mod_prec(r: &LocalRing, a: &Ls, b: &Ls) -> bool {
    r.sub(a, b).unwrap().is_known_zero()
}

fn mats_agree(r: &LocalRing, a: &LMat, b: &LMat) -> bool {
    a.e.iter().zip(&b.e).all(|(x, y)| zero_mod_prec(r, x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn fq_field_laws(q in prop::sample::select(vec![2u64, 4, 8, 9, 25, 27]), a in 0u32..1000, b in 0u32..1000, c in 0u32..1000) {
        let f = field(q);
        let (a, b, c) = (a % f.q(), b % f.q(), c % f.q());
        prop_assert_eq!(f.mul(a, f.add(b, c)), f.add(f.mul(a, b), f.mul(a, c)));
        prop_assert_eq!(f.frobenius(f.add(a, b)), f.add(f.frobenius(a), f.frobenius(b)));
        prop_assert_eq!(f.pow(a, q), a);
        if a != 0 {
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }

    #[test]
    fn computation_field_roots(n in 1usize..4, q in prop::sample::select(vec![2u64, 3, 4, 5])) {
        let f = field(q);
        let cf = ComputationField::for_group(n, &f).unwrap();
        prop_assert_eq!(cf.pow(cf.zeta, cf.order), 1);
        let p = f.p() as u64;
        let z = cf.root_of_unity(p).unwrap();
        prop_assert_eq!(cf.pow(z, p), 1);
        prop_assert_ne!(z, 1);
    }

    #[test]
    fn laurent_ring_laws(q in prop::sample::select(vec![2u64, 3, 4]), seed in any::<u64>()) {
        let r = ring(q);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = r.random(&mut rng, -2, 3).unwrap();
        let b = r.random(&mut rng, -1, 3).unwrap();
        let c = r.random(&mut rng, 0, 3).unwrap();
        prop_assert!(zero_mod_prec(&r, &r.mul(&a, &b).unwrap(), &r.mul(&b, &a).unwrap()));
        let lhs = r.mul(&a, &r.add(&b, &c).unwrap()).unwrap();
        let rhs = r.add(&r.mul(&a, &b).unwrap(), &r.mul(&a, &c).unwrap()).unwrap();
        prop_assert!(zero_mod_prec(&r, &lhs, &rhs));
        let u = r.random_unit(&mut rng, 3).unwrap();
        prop_assert!(zero_mod_prec(&r, &r.mul(&u, &r.inv(&u).unwrap()).unwrap(), &r.one()));
    }

    #[test]
    fn matrix_inverse(q in prop::sample::select(vec![2u64, 3]), n in 2usize..4, seed in any::<u64>()) {
        let r = LocalRing::new(field(q), Window { b: 12, n: 16 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = sample_generic(&r, n, -1, 1, &mut rng).unwrap();
        let gi = r.mat_inv(&g).unwrap();
        prop_assert!(mats_agree(&r, &r.mat_mul(&g, &gi).unwrap(), &r.identity(n)));
    }

    #[test]
    fn pattern_groups_are_closed(n in 2usize..4, level in 1i32..4, seed in any::<u64>()) {
        let r = LocalRing::new(field(2), Window { b: 12, n: 16 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = PatternGroup::k_level(n, level);
        let a = p.sample(&r, &mut rng, 3).unwrap();
        let b = p.sample(&r, &mut rng, 3).unwrap();
        prop_assert!(p.contains(&r, &r.mat_mul(&a, &b).unwrap()).unwrap());
        prop_assert!(p.contains(&r, &r.mat_inv(&a).unwrap()).unwrap());
    }

    #[test]
    fn chains_are_counted(n in 2usize..6, m in 0u32..12) {
        let d = d_family(n, m);
        prop_assert_eq!(d.len() as u64, binomial(m as i64 - 1, n as i64 - 1));
        prop_assert!(d.iter().all(|a| is_strict_chain(a, m)));
    }

    #[test]
    fn payload_hash_ignores_metadata(xs in prop::collection::vec(any::<u32>(), 0..20), t in any::<u32>(), seed in any::<u64>()) {
        let cfg = RunConfig { seed, ..Default::default() };
        let a = Report::new("p", &cfg, xs.clone(), std::time::SystemTime::now(), std::time::Duration::from_millis(t as u64)).unwrap();
        let b = Report::new("p", &cfg, xs.clone(), std::time::UNIX_EPOCH, std::time::Duration::ZERO).unwrap();
        prop_assert_eq!(&a.payload_sha256, &b.payload_sha256);
        prop_assert_eq!(a.payload_sha256, sha256_hex(&serde_json::to_vec(&xs).unwrap()));
    }

    #[test]
    fn cache_keys_separate_parameters(a in "[a-z]{1,6}", v in 0u64..1000, w in 0u64..1000) {
        let p1 = vec![(a.clone(), v.to_string())];
        let p2 = vec![(a.clone(), w.to_string())];
        let k1 = cache_key(CacheKind::BesselTable, &p1);
        prop_assert_eq!(&k1, &cache_key(CacheKind::BesselTable, &p1));
        prop_assert_eq!(v == w, k1 == cache_key(CacheKind::BesselTable, &p2));
        prop_assert_ne!(k1, cache_key(CacheKind::Transversal, &p1));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn psi_beta_is_a_character(q in prop::sample::select(vec![2u64, 3]), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = Stratum::random(field(q), 2, 1, &mut rng).unwrap();
        let us = st.filtration(st.s(), Basis::Bprime);
        let x = us.sample(&st.ring, &mut rng, 4).unwrap();
        let y = us.sample(&st.ring, &mut rng, 4).unwrap();
        let p = st.ring.field.p();
        let ex = st.psi_beta_exp(&x, Basis::Bprime).unwrap();
        let ey = st.psi_beta_exp(&y, Basis::Bprime).unwrap();
        let exy = st.psi_beta_exp(&st.ring.mat_mul(&x, &y).unwrap(), Basis::Bprime).unwrap();
        prop_assert_eq!(exy, (ex + ey) % p);
        prop_assert_eq!(ex, st.psi_beta_formula_exp(&x, Basis::Bprime).unwrap());
    }

    #[test]
    fn ul_factor_reassembles(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let st = Stratum::random(field(2), 3, 1, &mut rng).unwrap();
        let x = PatternGroup::principal(3, 1).sample(&st.ring, &mut rng, 4).unwrap();
        let (u, l) = st.ul_factor(&x).unwrap();
        let r = &st.ring;
        prop_assert!(mats_agree(r, &r.mat_mul(&u, &l).unwrap(), &x));
        for i in 0..3 {
            prop_assert!(zero_mod_prec(r, u.at(i, i), &r.one()));
            for j in 0..i {
                prop_assert!(u.at(i, j).is_known_zero());
                prop_assert!(l.at(j, i).is_known_zero());
            }
        }
    }

    #[test]
    fn cache_round_trip(xs in prop::collection::vec(any::<u64>(), 0..30), tag in "[a-z]{1,4}") {
        let dir = tempfile::tempdir().unwrap();
        let c = Cache::new(dir.path()).unwrap();
        let params = vec![("tag".to_string(), tag)];
        c.store(CacheKind::BesselTable, &params, &xs).unwrap();
        prop_assert_eq!(c.load::<Vec<u64>>(CacheKind::BesselTable, &params).unwrap(), Some(xs));
        let other = vec![("tag".to_string(), "other-key".to_string())];
        prop_assert_eq!(c.load::<Vec<u64>>(CacheKind::BesselTable, &other).unwrap(), None);
    }
}
