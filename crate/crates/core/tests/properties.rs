use std::f64::consts::PI;

use mecs_core::measures::{parity_reflection, split_concurrence_numeric, three_tangle_numeric};
use mecs_core::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn label() -> impl Strategy<Value = CoherentLabel> {
    (-2.0..2.0f64, -2.0..2.0f64)
        .prop_map(|(re, im)| CoherentLabel::new(Complex64::new(re, im)).unwrap())
}

fn superposition(modes: usize) -> impl Strategy<Value = MultimodeSuperposition> {
    prop::collection::vec(
        (
            (-1.0..1.0f64, -1.0..1.0f64),
            prop::collection::vec(label(), modes),
        ),
        1..4,
    )
    .prop_filter_map("zero coefficients", move |terms| {
        let terms = terms
            .into_iter()
            .map(|((re, im), labels)| Term::new(Complex64::new(re, im), labels))
            .collect();
        MultimodeSuperposition::new(modes, terms).ok()
    })
}

fn spec_strategy(max_n: usize) -> impl Strategy<Value = MecsSpec> {
    (0.0..0.999f64, 0.0..2.0 * PI, 2..=max_n)
        .prop_map(|(p, t, n)| MecsSpec::from_overlap(p, t, n).unwrap())
}

proptest! {
    #[test]
    fn overlap_is_conjugate_symmetric_and_bounded(a in label(), b in label()) {
        let ab = overlap(a, b);
        let ba = overlap(b, a);
        prop_assert!((ab - ba.conj()).norm() < 1e-14);
        prop_assert!(ab.norm() <= 1.0 + 1e-15);
        prop_assert!((overlap(a, a).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inner_product_is_sesquilinear(
        x in superposition(2),
        y in superposition(2),
        z in superposition(2),
        c in (-1.0..1.0f64, -1.0..1.0f64),
    ) {
        let c = Complex64::new(c.0, c.1);
        prop_assume!(c.norm() > 1e-3);
        let yz = y.plus_scaled(c, &z).unwrap();
        let lhs = inner_product(&x, &yz).unwrap();
        let rhs = inner_product(&x, &y).unwrap() + c * inner_product(&x, &z).unwrap();
        prop_assert!((lhs - rhs).norm() < 1e-10 * (1.0 + rhs.norm()));
        let left = inner_product(&x.scaled(c), &y).unwrap();
        prop_assert!((left - c.conj() * inner_product(&x, &y).unwrap()).norm() < 1e-10);
        let xy = inner_product(&x, &y).unwrap();
        let yx = inner_product(&y, &x).unwrap();
        prop_assert!((xy - yx.conj()).norm() < 1e-12 * (1.0 + xy.norm()));
    }

    #[test]
    fn annihilation_scales_product_labels(labels in prop::collection::vec(label(), 1..5)) {
        let x = MultimodeSuperposition::product(labels.clone()).unwrap();
        let ax = apply_annihilation_all(&x);
        let want: Complex64 = labels.iter().map(|l| l.value()).product();
        prop_assert!((ax.terms()[0].coeff - want).norm() < 1e-12 * (1.0 + want.norm()));
        prop_assert_eq!(&ax.terms()[0].labels, &labels);
    }

    #[test]
    fn mecs_is_normalized(a in 0.05..2.0f64, t in 0.0..2.0 * PI, n in 2usize..8) {
        let spec = MecsSpec::from_alpha(CoherentLabel::real(a).unwrap(), t, n).unwrap();
        prop_assume!(spec.norm_base() > 1e-6);
        let s = build_mecs(&spec).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn embedding_preserves_inner_products(
        a in 0.1..1.5f64,
        t1 in 0.0..2.0 * PI,
        t2 in 0.0..2.0 * PI,
        n in 2usize..6,
    ) {
        let alpha = CoherentLabel::real(a).unwrap();
        let s1 = MecsSpec::from_alpha(alpha, t1, n).unwrap();
        let s2 = MecsSpec::from_alpha(alpha, t2, n).unwrap();
        prop_assume!(s1.norm_base() > 1e-6 && s2.norm_base() > 1e-6);
        let coherent = inner_product(&build_mecs(&s1).unwrap(), &build_mecs(&s2).unwrap()).unwrap();
        let qubit = embed_as_qubits(&s1).unwrap().inner(&embed_as_qubits(&s2).unwrap());
        prop_assert!((coherent - qubit).norm() < 1e-10, "{coherent} vs {qubit}");
    }

    #[test]
    fn small_overlap_approaches_ghz(p in 1e-4..0.1f64, t in 0.0..2.0 * PI, n in 2usize..7) {
        let e = embed_as_qubits(&MecsSpec::from_overlap(p, t, n).unwrap()).unwrap();
        let g = ghz_state(n, t).unwrap();
        prop_assert!(e.distance(&g) < 10.0 * p, "distance {}", e.distance(&g));
    }

    #[test]
    fn odd_party_tangle_vanishes(
        n in prop::sample::select(vec![3usize, 5]),
        seed in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 32),
    ) {
        let amps = seed[..1 << n].iter().map(|&(re, im)| Complex64::new(re, im)).collect();
        prop_assume!(seed[..1 << n].iter().any(|&(re, im)| re.abs() + im.abs() > 1e-3));
        let psi = QubitState::from_unnormalized(n, amps).unwrap();
        prop_assert!(n_tangle_numeric(&psi).unwrap() < 1e-12);
    }

    #[test]
    fn printed_pair_density_matches_partial_trace(spec in spec_strategy(6)) {
        prop_assume!(spec.parties() >= 2 && spec.norm_base() > 1e-9);
        let psi = embed_as_qubits(&spec).unwrap();
        let flipped = psi.apply_local(1, &parity_reflection(spec.p()).unwrap());
        let brute = flipped.reduced(&[0, 1]).unwrap();
        let printed = reduced_pair_density(&spec).unwrap();
        let diff = (brute.matrix() - printed.matrix()).camax();
        prop_assert!(diff < 1e-12, "max deviation {diff:e}");
    }

    #[test]
    fn pair_density_has_two_vanishing_lambdas(spec in spec_strategy(10)) {
        prop_assume!(spec.norm_base() > 1e-9);
        let d = wootters_concurrence(&reduced_pair_density(&spec).unwrap()).unwrap();
        prop_assert!(d.lambdas[2] < 1e-10 && d.lambdas[3] < 1e-10, "{:?}", d.lambdas);
    }

    #[test]
    fn split_closed_matches_marginal_purity(spec in spec_strategy(6), k in 1usize..6) {
        let n = spec.parties();
        prop_assume!(k < n && spec.norm_base() > 1e-9);
        let split = SplitSpec::new(k, n).unwrap();
        let psi = embed_as_qubits(&spec).unwrap();
        let numeric = split_concurrence_numeric(&psi, split).unwrap();
        let closed = split_concurrence_closed(&spec, split).unwrap();
        prop_assert!((numeric - closed).abs() < 1e-9, "{numeric} vs {closed}");
    }

    #[test]
    fn three_party_hyperdeterminant_matches(spec in spec_strategy(3)) {
        let spec = spec.with_parties(3).unwrap();
        prop_assume!(spec.norm_base() > 1e-9);
        let psi = embed_as_qubits(&spec).unwrap();
        let numeric = three_tangle_numeric(&psi).unwrap();
        prop_assert!((numeric - three_tangle(&spec).unwrap()).abs() < 1e-9);
    }
}

#[test]
fn w_fidelity_grows_toward_unit_overlap() {
    for n in [3, 4, 5] {
        let w = w_state(n).unwrap();
        let mut last = 0.0;
        for i in 0..=100 {
            let p = 0.9 + (0.9999 - 0.9) * i as f64 / 100.0;
            let e = embed_as_qubits(&MecsSpec::from_overlap(p, PI, n).unwrap()).unwrap();
            let f = e.fidelity(&w);
            assert!(f > last, "N={n} p={p}: {f} <= {last}");
            last = f;
        }
        assert!(last > 0.999);
    }
}

fn grid() -> impl Iterator<Item = (f64, f64)> {
    (0..20).flat_map(|i| (0..=12).map(move |j| (i as f64 / 20.0, PI * j as f64 / 6.0)))
}

#[test]
fn measures_stay_in_unit_interval() {
    for n in 2..=8 {
        for (p, t) in grid() {
            let spec = MecsSpec::from_overlap(p, t, n).unwrap();
            let c = pair_concurrence_closed(&spec).unwrap();
            assert!((0.0..=1.0).contains(&c), "C12 {c} at {p} {t} {n}");
            for k in 1..n {
                let s = split_concurrence_closed(&spec, SplitSpec::new(k, n).unwrap()).unwrap();
                assert!(
                    (0.0..=1.0 + 1e-15).contains(&s),
                    "split {s} at {p} {t} {n} {k}"
                );
            }
            if n % 2 == 0 || n == 3 {
                let tau = n_tangle_closed(&spec).unwrap();
                assert!(
                    (0.0..=1.0 + 1e-15).contains(&tau),
                    "tangle {tau} at {p} {t} {n}"
                );
            }
        }
    }
}

#[test]
fn split_is_maximal_only_for_balanced_odd_phase() {
    for n in [2, 4, 6, 8] {
        for i in 1..20 {
            let p = i as f64 / 20.0;
            for j in 0..=12 {
                let t = PI * j as f64 / 6.0;
                let spec = MecsSpec::from_overlap(p, t, n).unwrap();
                for k in 1..n {
                    let c = split_concurrence_closed(&spec, SplitSpec::new(k, n).unwrap()).unwrap();
                    if j == 6 && 2 * k == n {
                        assert_eq!(c, 1.0, "p={p} N={n} k={k}");
                    } else {
                        assert!(c < 1.0, "p={p} theta={t} N={n} k={k}: {c}");
                    }
                }
            }
        }
    }
}

#[test]
fn pair_concurrence_dies_with_many_parties() {
    for t in [0.0, 1.0, PI / 2.0, PI] {
        let c = pair_concurrence_closed(&MecsSpec::from_overlap(0.5, t, 200).unwrap()).unwrap();
        assert!(c < 1e-12);
    }
}
