use proptest::prelude::*;

use quadmod::channel::*;
use quadmod::constellation::*;

// Q(x) to 20 digits from a 40-digit erfc evaluation
const Q_TABLE: &[(f64, f64)] = &[
    (0.0, 0.5),
    (0.5, 0.308_537_538_725_986_9),
    (1.0, 0.158_655_253_931_457_05),
    (2.0, 0.022_750_131_948_179_21),
    (3.0, 0.001_349_898_031_630_094_6),
    (5.0, 2.866_515_718_791_939e-7),
    (8.0, 6.220_960_574_271_784e-16),
    (12.0, 1.776_482_112_077_679e-33),
    (20.0, 2.753_624_118_606_233_7e-89),
    (30.0, 4.906_713_927_148_187e-198),
];

fn exact_dual_qpsk(esn0_db: f64) -> f64 {
    let q = q_function((db_to_lin(esn0_db) / 2.0).sqrt());
    dual_error_compose(2.0 * q - q * q).unwrap()
}

#[test]
fn q_function_matches_table() {
    for &(x, want) in Q_TABLE {
        let got = q_function(x);
        assert!(((got - want) / want).abs() < 1e-12, "Q({x}) = {got:e}, want {want:e}");
    }
}

#[test]
fn dual_qpsk_oracle_values() {
    for (db, want) in [
        (8.0, 0.143_027_276_534_682_5),
        (10.0, 0.049_739_024_365_262_85),
        (12.0, 0.009_718_526_827_055_804),
    ] {
        assert!(((exact_dual_qpsk(db) - want) / want).abs() < 1e-12);
    }
}

#[test]
fn snr_conversions() {
    let s = SnrSpec::new(0.0, SnrConvention::Snr);
    let es = convert_snr(s, SnrConvention::EsN0).unwrap();
    assert!((es.value_db - 3.010_299_956_639_812).abs() < 1e-12);
    let eb = convert_snr(s.with_bits(4.0), SnrConvention::EbN0).unwrap();
    assert!((eb.value_db + 3.010_299_956_639_812).abs() < 1e-12);
    let x = SnrSpec::new(10.0, SnrConvention::EsN0).with_bits(8.0);
    let eb = convert_snr(x, SnrConvention::EbN0).unwrap();
    assert!((eb.value_db - (10.0 - 10.0 * 8f64.log10())).abs() < 1e-12);
    assert!(matches!(
        convert_snr(s, SnrConvention::EbN0),
        Err(quadmod::Error::MissingBits)
    ));
}

#[test]
fn noiseless_channel_is_transparent() {
    let c = generate_classic_dual(ClassicKind::Qam16);
    let t = awgn_transmit(&c, 1000, f64::INFINITY, &RngStream::new(1, 0));
    for (k, r) in t.indices.iter().zip(&t.received) {
        assert_eq!(&c.points()[*k], r);
    }
}

#[test]
fn noise_moments() {
    let c = generate_classic_dual(ClassicKind::Qpsk);
    let esn0_db = 7.0;
    let n = 250_000;
    let t = awgn_transmit(&c, n, esn0_db, &RngStream::new(3, 9));
    let half_n0 = 1.0 / db_to_lin(esn0_db) / 2.0;
    let mut sum = 0.0;
    let mut es = 0.0;
    for (k, r) in t.indices.iter().zip(&t.received) {
        let s = c.points()[*k];
        let (a, b) = (s.coords(), r.coords());
        sum += (0..4).map(|i| (b[i] - a[i]).powi(2)).sum::<f64>();
        es += s.energy();
    }
    let samples = 4.0 * n as f64;
    let var = sum / samples;
    // chi-square: std of the variance estimate is sqrt(2/samples) relative
    assert!((var / half_n0 - 1.0).abs() < 3.0 * (2.0 / samples).sqrt());
    assert!((es / n as f64 - 1.0).abs() < 1e-12);
}

#[test]
fn detection_examples() {
    let c = generate_d4_lam(&LatticeCarveSpec::new(88)).unwrap();
    for (k, p) in c.points().iter().enumerate() {
        assert_eq!(detect_ml(&c, p), k);
    }
    // midway between two dual-QPSK points that differ in X only
    let q = generate_classic_dual(ClassicKind::Qpsk);
    let pts = q.points();
    let (i, j) = (0..pts.len())
        .flat_map(|i| (i + 1..pts.len()).map(move |j| (i, j)))
        .find(|&(i, j)| pts[i].y == pts[j].y && (pts[i].x - pts[j].x).norm() < 1.5)
        .unwrap();
    let mid = Symbol4D::new((pts[i].x + pts[j].x) / 2.0, pts[i].y);
    assert_eq!(detect_ml(&q, &mid), i.min(j));
}

#[test]
fn ml_detector_matches_exhaustive_scan() {
    let cons = [
        generate_d4_lam(&LatticeCarveSpec::new(256)).unwrap(),
        generate_hex_cylinder_psk(64, 1.0, 1.0).unwrap(),
        generate_classic_dual(ClassicKind::Apsk16),
        generate_classic_dual(ClassicKind::HexQam8),
    ];
    for (s, c) in cons.iter().enumerate() {
        let t = awgn_transmit(c, 100_000, 12.0, &RngStream::new(5, s as u64));
        for r in &t.received {
            assert_eq!(detect_ml(c, r), detect_exhaustive(c, r), "{}", c.name());
        }
    }
}

#[test]
fn very_high_snr_has_no_errors() {
    let c = generate_d4_lam(&LatticeCarveSpec::new(88)).unwrap();
    let e = simulate_ser(&c, 60.0, &StopRule::new(200_000, 10), &RngStream::new(1, 1));
    assert_eq!(e.errors, 0);
    assert!(e.underresolved);
}

#[test]
fn dual_qpsk_ser_matches_closed_form() {
    let c = generate_classic_dual(ClassicKind::Qpsk);
    for (i, db) in [6.0, 9.0, 12.0].into_iter().enumerate() {
        let e = simulate_ser(&c, db, &StopRule::new(50_000_000, 2000), &RngStream::new(11, i as u64));
        let want = exact_dual_qpsk(db);
        assert!((e.ser - want).abs() < 3.0 * e.ci95_halfwidth, "{db} dB: {} vs {want}", e.ser);
    }
}

#[test]
fn union_bound_examples() {
    let a = Constellation::joint(
        "antipodal",
        vec![
            Symbol4D::from_coords([1.0, 0.0, 0.0, 0.0]),
            Symbol4D::from_coords([-1.0, 0.0, 0.0, 0.0]),
        ],
    )
    .unwrap();
    for db in [0.0, 5.0, 10.0] {
        let sigma = noise_sigma(1.0, db);
        let want = q_function(2.0 / (2.0 * sigma));
        assert!((union_bound(&a, db) / want - 1.0).abs() < 1e-14);
    }
    let q = generate_classic_dual(ClassicKind::Qpsk);
    for db in [10.0, 12.0, 14.0] {
        let ub = union_bound(&q, db);
        let exact = exact_dual_qpsk(db);
        assert!(ub >= exact && ub <= 2.0 * exact);
    }
}

#[test]
fn snr_at_ser_examples() {
    assert_eq!(snr_at_ser(&[(10.0, 1e-3), (11.0, 1e-4), (12.0, 1e-5)], 1e-4).unwrap(), 11.0);
    let x = snr_at_ser(&[(10.0, 1e-3), (12.0, 1e-5)], 1e-4).unwrap();
    assert!((x - 11.0).abs() < 1e-12);
    assert!(matches!(
        snr_at_ser(&[(10.0, 1e-2), (12.0, 1e-3)], 1e-4),
        Err(quadmod::Error::NoBracket { .. })
    ));
    // closed-form dual QPSK curve on a 0.25 dB grid against bisection on the formula
    let curve: Vec<(f64, f64)> = (0..=40).map(|k| 10.0 + 0.25 * k as f64).map(|x| (x, exact_dual_qpsk(x))).collect();
    let (mut lo, mut hi) = (10.0, 20.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if exact_dual_qpsk(mid) > 1e-4 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((snr_at_ser(&curve, 1e-4).unwrap() - lo).abs() < 0.05);
}

#[test]
fn dual_compose_examples() {
    assert_eq!(dual_error_compose(0.0).unwrap(), 0.0);
    assert_eq!(dual_error_compose(1.0).unwrap(), 1.0);
    assert_eq!(dual_error_compose(0.5).unwrap(), 0.75);
    assert!(dual_error_compose(-0.1).is_err());
    assert!(dual_error_compose(1.5).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_compose_identity_and_monotone(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
        let d = dual_error_compose(p).unwrap();
        prop_assert!((1.0 - d - (1.0 - p).powi(2)).abs() < 1e-15);
        let (lo, hi) = if p <= q { (p, q) } else { (q, p) };
        prop_assert!(dual_error_compose(lo).unwrap() <= dual_error_compose(hi).unwrap());
    }

    #[test]
    fn union_bound_monotone(a in -5.0f64..30.0, step in 0.01f64..5.0, idx in 0usize..4) {
        let c = match idx {
            0 => generate_classic_dual(ClassicKind::Psk8),
            1 => generate_classic_dual(ClassicKind::Qam16),
            2 => generate_biorthogonal(true),
            _ => generate_hex_cylinder_psk(16, 1.0, 1.0).unwrap(),
        };
        prop_assert!(union_bound(&c, a + step) < union_bound(&c, a));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn partition_merge_is_deterministic(cuts in prop::collection::vec(1u64..15, 1..5), seed in 0u64..1000) {
        let c = generate_classic_dual(ClassicKind::Psk8);
        let stop = StopRule { max_symbols: u64::MAX, min_errors: u64::MAX, block_size: 512 };
        let rng = RngStream::new(seed, 2);
        let whole = simulate_ser_blocks(&c, 14.0, &rng, 0..16, &stop);
        let mut bounds: Vec<u64> = cuts;
        bounds.push(0);
        bounds.push(16);
        bounds.sort();
        let mut acc = SerEstimate::from_counts(0, 0, 1);
        for w in bounds.windows(2) {
            let (e, t) = simulate_ser_blocks(&c, 14.0, &rng, w[0]..w[1], &stop);
            acc = acc.merge(&SerEstimate::from_counts(e, t, 1), 1);
        }
        prop_assert_eq!((acc.errors, acc.trials), whole);
    }

    #[test]
    fn decisions_invariant_under_rotation_and_scaling(
        angles in prop::array::uniform6(-3.2f64..3.2),
        k in 0.05f64..20.0,
        seed in 0u64..1000,
    ) {
        let c = generate_d4_lam(&LatticeCarveSpec::new(88)).unwrap();
        let rot = Rotation4::from_angles(angles);
        let rc = c.rotated(&rot);
        let sc = c.scaled(k);
        let t = awgn_transmit(&c, 2000, 14.0, &RngStream::new(seed, 0));
        for r in &t.received {
            let d = detect_ml(&c, r);
            prop_assert_eq!(detect_ml(&rc, &rot.apply(r)), d);
            prop_assert_eq!(detect_ml(&sc, &r.scale(k)), d);
        }
    }

    #[test]
    fn same_seed_same_estimate(seed in 0u64..1000) {
        let c = generate_classic_dual(ClassicKind::Qpsk);
        let stop = StopRule::new(400_000, 50);
        let a = simulate_ser(&c, 9.0, &stop, &RngStream::new(seed, 1));
        let b = simulate_ser(&c, 9.0, &stop, &RngStream::new(seed, 1));
        prop_assert_eq!(a, b);
    }
}
