use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Pow;
use proptest::prelude::*;
use sepkit::actions::{decode_n_adic, encode_n_adic, unzigzag, zigzag, Perm};
use sepkit::group::{BsWord, FreeWord, Letter};
use sepkit::stallings::{graph_from_generators, hall_complete, member, separate};

fn letters(rank: u32, max_len: usize) -> impl Strategy<Value = Vec<Letter>> {
    prop::collection::vec((1..=rank, any::<bool>()).prop_map(|(i, inv)| Letter::new(i, inv)), 0..max_len)
}

fn word(rank: u32, max_len: usize) -> impl Strategy<Value = FreeWord> {
    letters(rank, max_len).prop_map(FreeWord::reduce)
}

proptest! {
    #[test]
    fn free_words_are_reduced(ls in letters(3, 24)) {
        let w = FreeWord::reduce(ls.clone());
        prop_assert!(w.letters().windows(2).all(|p| p[0] != p[1].inverse()));
        prop_assert!(w.len() <= ls.len());
        prop_assert_eq!(w.len() % 2, ls.len() % 2);
    }

    #[test]
    fn free_group_laws(x in word(2, 12), y in word(2, 12), z in word(2, 12)) {
        prop_assert_eq!(x.mul(&y).mul(&z), x.mul(&y.mul(&z)));
        prop_assert!(x.mul(&x.inverse()).is_identity());
        prop_assert_eq!(x.mul(&y).inverse(), y.inverse().mul(&x.inverse()));
        prop_assert_eq!(x.mul(&FreeWord::identity()), x);
    }

    #[test]
    fn bs_normal_form_is_a_homomorphism(n in 2u32..5, u in letters(2, 10), v in letters(2, 10)) {
        let a = BsWord::normal_form(n, &u).unwrap();
        let b = BsWord::normal_form(n, &v).unwrap();
        let joined: Vec<Letter> = u.iter().chain(&v).copied().collect();
        prop_assert_eq!(BsWord::normal_form(n, &joined).unwrap(), a.mul(&b).unwrap());
        prop_assert!(a.mul(&a.inverse()).unwrap().is_identity());
        prop_assert_eq!(BsWord::from_affine(n, &a.affine()).unwrap(), a);
    }

    #[test]
    fn zigzag_round_trips(z in -1_000_000_000i64..1_000_000_000) {
        prop_assert_eq!(unzigzag(zigzag(z)), z);
    }

    #[test]
    fn n_adic_codes_round_trip(n in 2u32..6, m in -5000i64..5000, k in 0u32..6) {
        let r = BigRational::new(BigInt::from(m), BigInt::from(n).pow(k));
        let code = encode_n_adic(n, &r).unwrap();
        prop_assert_eq!(decode_n_adic(n, code), r);
    }

    #[test]
    fn generators_are_members(gens in prop::collection::vec(word(2, 6), 1..4), pick in word(2, 4)) {
        let h = graph_from_generators(2, &gens).unwrap();
        for g in &gens {
            prop_assert!(member(g, &h));
            prop_assert!(member(&g.inverse(), &h));
        }
        // products of generators stay inside
        let prod = gens.iter().fold(FreeWord::identity(), |acc, g| acc.mul(g));
        prop_assert!(member(&prod, &h));
        // the Hall completion contains H and agrees with it on members
        let full = hall_complete(&h);
        prop_assert!(gens.iter().all(|g| full.contains(g)));
        if member(&pick, &h) {
            prop_assert!(full.contains(&pick));
        }
    }

    #[test]
    fn separation_excludes_exactly_what_it_should(gens in prop::collection::vec(word(2, 5), 0..4), g in word(2, 8)) {
        let h = graph_from_generators(2, &gens).unwrap();
        prop_assume!(!member(&g, &h));
        let k = separate(&h, &g).unwrap();
        prop_assert!(gens.iter().all(|w| k.contains(w)));
        prop_assert!(!k.contains(&g));
    }

    #[test]
    fn perm_inverse_undoes(points in prop::collection::btree_set(0u64..50, 2..10), x in 0u64..60) {
        let cycle: Vec<u64> = points.into_iter().collect();
        let p = Perm::cycle(&cycle).unwrap();
        prop_assert_eq!(p.apply_inverse(p.apply(x)), x);
        prop_assert_eq!(p.inverse().apply(p.apply(x)), x);
        prop_assert_eq!(p.support().len(), cycle.len());
    }
}
