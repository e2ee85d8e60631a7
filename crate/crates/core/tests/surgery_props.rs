use num_bigint::BigInt;
use num_traits::Zero;
use proptest::prelude::*;

use hyperfill::surgery::script::{run_script, MoveScript, SLOPESEQN_SCRIPT};
use hyperfill::surgery::*;

fn pair(p: i64, q: i64) -> IntPair {
    IntPair::new(p, q)
}

/// The ten-cusp tuple written out entry by entry.
fn slope_tuple(r: [i64; 5]) -> Vec<Option<(i64, i64)>> {
    let [r1, r2, r3, r4, r5] = r;
    vec![
        Some((1 + r1, -r1)),
        Some((1, -r2)),
        Some((1 - r1, r1)),
        Some((1, r2)),
        Some((1, r3)),
        Some((1, r4)),
        Some((1, -r3 - 1)),
        Some((1, -r4)),
        Some((1, r5)),
        None,
    ]
}

fn primitive() -> impl Strategy<Value = IntPair> {
    (-50i64..50, -50i64..50)
        .prop_filter("primitive", |(p, q)| num_integer::gcd(*p, *q) == 1)
        .prop_map(|(p, q)| pair(p, q))
}

fn twist(cusps: usize) -> impl Strategy<Value = TwistMove> {
    let annulus = (1..=cusps, 1..=cusps, primitive(), primitive(), -20i64..20)
        .prop_filter("distinct cusps", |(i, j, ..)| i != j)
        .prop_map(|(i, j, xi, xj, r)| TwistMove::annulus(i, j, xi, xj, r));
    let disk = (1..=cusps, -20i64..20).prop_map(|(i, r)| TwistMove::disk(i, r));
    prop_oneof![annulus, disk]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn slope_tuple_reproduced(r in prop::array::uniform5(-1000i64..1000)) {
        let rs = r.map(BigInt::from);
        let spec = reproduce_slopeseqn(&rs, &BigInt::from(-r[2] - 1)).unwrap();
        let want = slope_tuple(r);
        prop_assert_eq!(spec.entries.len(), want.len());
        for (got, want) in spec.entries.iter().zip(&want) {
            match (got, want) {
                (FillingEntry::Filled { d: 1, class }, Some((p, q))) => prop_assert_eq!(class, &pair(*p, *q)),
                (FillingEntry::Unfilled, None) => {}
                other => prop_assert!(false, "{:?}", other),
            }
        }
    }

    #[test]
    fn constraint_is_enforced(r in prop::array::uniform5(-100i64..100), off in 1i64..50) {
        let rs = r.map(BigInt::from);
        prop_assert!(reproduce_slopeseqn(&rs, &BigInt::from(-r[2] - 1 + off)).is_err());
    }

    #[test]
    fn twist_then_inverse_is_identity(moves in prop::collection::vec(twist(6), 1..8)) {
        let start = CuspState::standard(6);
        let mut state = start.clone();
        for mv in &moves {
            state = apply_twist(&state, mv).unwrap();
        }
        for mv in moves.iter().rev() {
            state = apply_twist(&state, &mv.inverse()).unwrap();
        }
        prop_assert_eq!(state, start);
    }

    #[test]
    fn disjoint_moves_commute(a in twist(6), b in twist(6), warmup in twist(6)) {
        let sa = a.support();
        prop_assume!(b.support().iter().all(|i| !sa.contains(i)));
        let s = apply_twist(&CuspState::standard(6), &warmup).unwrap();
        let ab = apply_twist(&apply_twist(&s, &a).unwrap(), &b).unwrap();
        let ba = apply_twist(&apply_twist(&s, &b).unwrap(), &a).unwrap();
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn normalize_is_idempotent(c in primitive()) {
        let once = normalize_pair(&c).unwrap();
        let twice = normalize_pair(once.class()).unwrap();
        prop_assert_eq!(&once, &twice);
        let neg = normalize_pair(&c.scaled(&BigInt::from(-1))).unwrap();
        prop_assert_eq!(once, neg);
    }

    #[test]
    fn intersection_is_antisymmetric(a in primitive(), b in primitive()) {
        prop_assert_eq!(intersection(&a, &b), -intersection(&b, &a));
        prop_assert!(intersection(&a, &a).is_zero());
    }

    #[test]
    fn twists_preserve_longitudes_and_meridian_pairing(mv in twist(4)) {
        let s = CuspState::standard(4);
        let t = apply_twist(&s, &mv).unwrap();
        prop_assert_eq!(t.longitudes(), s.longitudes());
        if let TwistKind::Disk { i } = &mv.kind {
            prop_assert_eq!(intersection(t.meridian(*i), &t.longitudes()[*i - 1]), BigInt::from(1));
        }
    }

    #[test]
    fn filling_notation_round_trips(entries in prop::collection::vec(
        prop_oneof![
            Just(None),
            (1u64..6, primitive()).prop_map(Some),
        ], 1..6)) {
        let spec = FillingSpec {
            entries: entries
                .into_iter()
                .map(|e| match e {
                    None => FillingEntry::Unfilled,
                    Some((d, c)) => {
                        let s = normalize_pair(&c).unwrap();
                        FillingEntry::Filled { d, class: s.class().clone() }
                    }
                })
                .collect(),
        };
        let text = format_filling(&spec);
        let back = parse_filling(&text).unwrap();
        prop_assert_eq!(back.normalized().unwrap(), spec.normalized().unwrap(), "{}", text);
    }

    #[test]
    fn genus_is_monotone_in_degree(g in 1u64..6, b in 1u64..8, p in 2u64..40) {
        let lo = riemann_hurwitz_genus(p, g, b);
        let hi = riemann_hurwitz_genus(p + 1, g, b);
        if let (Ok(lo), Ok(hi)) = (lo, hi) {
            prop_assert!(hi >= lo);
        }
    }
}

/// Number of cycles of `k ↦ k + lk (mod p)` on `{0, …, p−1}`.
fn orbit_count(p: u64, lk: i64) -> u64 {
    let mut seen = vec![false; p as usize];
    let mut orbits = 0;
    for start in 0..p as usize {
        if seen[start] {
            continue;
        }
        orbits += 1;
        let mut k = start;
        while !seen[k] {
            seen[k] = true;
            k = (k as i64 + lk).rem_euclid(p as i64) as usize;
        }
    }
    orbits
}

#[test]
fn components_match_orbit_count() {
    for p in 2..=30u64 {
        for lk in -30..=30i64 {
            assert_eq!(
                branched_cover_components(p, lk).unwrap(),
                orbit_count(p, lk),
                "p = {p}, lk = {lk}"
            );
        }
    }
}

#[test]
fn genus_of_small_covers() {
    for p in [3u64, 5, 7, 9] {
        assert_eq!(riemann_hurwitz_genus(p, 1, 2).unwrap(), BigInt::from(p));
        assert_eq!(riemann_hurwitz_genus(p, 0, 4).unwrap(), BigInt::from(p - 1));
    }
}

#[test]
fn triangle_families() {
    use ConeOrder::*;
    for p in 3..60 {
        assert_eq!(
            triangle_orbifold_geometry([Finite(p), Finite(p), Infinite]).unwrap(),
            OrbifoldGeometry::Hyperbolic
        );
    }
    assert_eq!(
        triangle_orbifold_geometry([Finite(2), Finite(2), Infinite]).unwrap(),
        OrbifoldGeometry::Euclidean
    );
    for (a, b, c, want) in [
        (2, 3, 7, OrbifoldGeometry::Hyperbolic),
        (2, 4, 4, OrbifoldGeometry::Euclidean),
        (3, 3, 3, OrbifoldGeometry::Euclidean),
        (2, 2, 100, OrbifoldGeometry::Spherical),
        (2, 3, 4, OrbifoldGeometry::Spherical),
    ] {
        assert_eq!(
            triangle_orbifold_geometry([Finite(a), Finite(b), Finite(c)]).unwrap(),
            want
        );
    }
}

#[test]
fn bundled_script_matches_direct_route() {
    let script = MoveScript::from_json(SLOPESEQN_SCRIPT).unwrap();
    let overrides: Vec<(String, BigInt)> = [("r1", 7), ("r2", -3), ("r3", 11), ("r4", 0), ("r5", 2), ("r", -12)]
        .iter()
        .map(|(k, v)| (k.to_string(), BigInt::from(*v)))
        .collect();
    let via_script = run_script(&script, &overrides).unwrap();
    let direct = reproduce_slopeseqn(&[7, -3, 11, 0, 2].map(BigInt::from), &BigInt::from(-12)).unwrap();
    assert_eq!(via_script, direct);
}

#[test]
fn big_parameters_stay_exact() {
    let huge: BigInt = "123456789012345678901234567890".parse().unwrap();
    let rs = [huge.clone(), huge.clone(), huge.clone(), huge.clone(), huge.clone()];
    let r = -&huge - 1;
    let spec = reproduce_slopeseqn(&rs, &r).unwrap();
    match &spec.entries[0] {
        FillingEntry::Filled { class, .. } => {
            assert_eq!(class.p, &huge + 1);
            assert_eq!(class.q, -huge.clone());
        }
        other => panic!("{other:?}"),
    }
    assert!(!spec.entries[0].normalized().unwrap().unwrap().slope.p().is_zero());
}
