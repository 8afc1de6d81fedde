use catswap::optics::{apply_balanced_bs, apply_lossy_bs};
use catswap::states::{
    coherent_overlap, inner_product, trace_to_qubits, CoherentTerm, ComplexAmp, ModeId, PureState,
    Registry,
};
use proptest::prelude::*;

const Q1: ModeId = ModeId::dv("Q1");
const Q2: ModeId = ModeId::dv("Q2");
const S: ModeId = ModeId::cv("S");
const E: ModeId = ModeId::cv("E");
const X: ModeId = ModeId::cv("X");

fn amp(r: f64) -> impl Strategy<Value = ComplexAmp> {
    (-r..r, -r..r).prop_map(|(a, b)| ComplexAmp::new(a, b))
}

fn term(vacuum_env: bool) -> impl Strategy<Value = CoherentTerm> {
    (0u8..2, 0u8..2, amp(2.0), amp(2.0), amp(1.0)).prop_map(move |(b1, b2, s, e, k)| {
        let e = if vacuum_env {
            ComplexAmp::new(0.0, 0.0)
        } else {
            e
        };
        CoherentTerm::new(vec![b1, b2], vec![s, e], k)
    })
}

fn state(vacuum_env: bool) -> impl Strategy<Value = PureState> {
    prop::collection::vec(term(vacuum_env), 1..7)
        .prop_map(|terms| {
            PureState::new(Registry::new(vec![Q1, Q2, S, E]).unwrap(), terms).unwrap()
        })
        .prop_filter("non-zero state", |s| s.squared_norm() > 1e-6)
}

fn close(a: ComplexAmp, b: ComplexAmp, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn inner_product_is_conjugate_symmetric(s1 in state(false), s2 in state(false)) {
        let ab = inner_product(&s1, &s2).unwrap();
        let ba = inner_product(&s2, &s1).unwrap();
        prop_assert!(close(ab, ba.conj(), 1e-13));
    }

    #[test]
    fn self_inner_product_is_real_nonnegative(s in state(false)) {
        let n = inner_product(&s, &s).unwrap();
        prop_assert!(n.re >= 0.0 && n.im.abs() <= 1e-12 * (1.0 + n.re));
    }

    #[test]
    fn overlap_product_is_real_nonnegative(b in amp(3.0), g in amp(3.0)) {
        let p = coherent_overlap(b, g) * coherent_overlap(g, b);
        prop_assert!(p.re >= 0.0 && p.im.abs() < 1e-15);
        prop_assert!(coherent_overlap(b, g).norm() <= 1.0 + 1e-15);
    }

    #[test]
    fn reduced_density_is_physical(s in state(false)) {
        let rho = trace_to_qubits(&s, [Q1, Q2], &[S, E]).unwrap();
        prop_assert!(rho.hermiticity_error() <= 1e-12);
        prop_assert!((rho.trace().re - 1.0).abs() <= 1e-10);
        prop_assert!(rho.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn vacuum_ancilla_leaves_inner_products(s1 in state(false), s2 in state(false)) {
        let plain = inner_product(&s1, &s2).unwrap();
        let padded = inner_product(&s1.with_vacuum_mode(X).unwrap(), &s2.with_vacuum_mode(X).unwrap()).unwrap();
        prop_assert!(close(plain, padded, 1e-14));
    }

    #[test]
    fn balanced_splitter_is_unitary(s1 in state(false), s2 in state(false)) {
        let before = inner_product(&s1, &s2).unwrap();
        let u1 = apply_balanced_bs(&s1, S, E).unwrap();
        let u2 = apply_balanced_bs(&s2, S, E).unwrap();
        prop_assert!(close(inner_product(&u1, &u2).unwrap(), before, 1e-12));
    }

    #[test]
    fn lossy_splitter_is_unitary(s1 in state(true), s2 in state(true), t in 0.0f64..=1.0) {
        let before = inner_product(&s1, &s2).unwrap();
        let u1 = apply_lossy_bs(&s1, S, E, t).unwrap();
        let u2 = apply_lossy_bs(&s2, S, E, t).unwrap();
        prop_assert!(close(inner_product(&u1, &u2).unwrap(), before, 1e-12));
        prop_assert!((u1.squared_norm() - s1.squared_norm()).abs() <= 1e-12 * (1.0 + s1.squared_norm()));
    }
}

#[test]
fn balanced_splitter_twice_swaps_with_sign() {
    let (bi, bj) = (ComplexAmp::new(0.7, -0.2), ComplexAmp::new(-1.1, 0.4));
    let s = PureState::new(
        Registry::new(vec![S, E]).unwrap(),
        vec![CoherentTerm::new(
            vec![],
            vec![bi, bj],
            ComplexAmp::new(1.0, 0.0),
        )],
    )
    .unwrap();
    let twice = apply_balanced_bs(&apply_balanced_bs(&s, S, E).unwrap(), S, E).unwrap();
    let a = twice.terms()[0].amps();
    assert!((a[0] + bj).norm() < 1e-15);
    assert!((a[1] - bi).norm() < 1e-15);
    assert!((twice.squared_norm() - 1.0).abs() < 1e-12);
}
