use premax::symbolic::{
    delta_for_window, random_presentation, sft_closure, shift_metric,
    stabilization_check, symbolic_shadow, PeriodicWord, Sft, Symbol, SymbolicPseudoOrbit,
};
use proptest::prelude::*;

fn word_strategy(alphabet: Symbol) -> impl Strategy<Value = PeriodicWord> {
    let sym = move || prop::collection::vec(0..alphabet, 1..4);
    (sym(), prop::collection::vec(0..alphabet, 0..5), sym(), -4i64..4).prop_map(
        |(l, c, r, z)| PeriodicWord::new(l, c, r, z).expect("valid word"),
    )
}

fn far_replaced(a: &PeriodicWord, m: i64, b: &PeriodicWord, c: &PeriodicWord) -> PeriodicWord {
    // b on i < -m, a on [-m, m], c on i > m
    PeriodicWord::splice(&PeriodicWord::splice(b, -m, a), m + 1, c)
}

fn full_sft(alphabet: Symbol, k: usize) -> Sft {
    let words = (0..(alphabet as usize).pow(k as u32))
        .map(|mut x| {
            (0..k)
                .map(|_| {
                    let s = (x % alphabet as usize) as Symbol;
                    x /= alphabet as usize;
                    s
                })
                .collect()
        })
        .collect();
    Sft::new(alphabet as usize, k, words).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn metric_axioms_exact(
        a in word_strategy(3),
        b in word_strategy(3),
        c in word_strategy(3),
    ) {
        let p = 30;
        let ab = shift_metric(&a, &b, p);
        prop_assert_eq!(ab, shift_metric(&b, &a, p));
        prop_assert_eq!(shift_metric(&a, &a, p).upper(), 0.0);
        prop_assert_eq!(ab.upper() == 0.0, a == b);
        // truncated sums are dyadic, so the comparison is exact
        let ac = shift_metric(&a, &c, p).value;
        prop_assert!(ac <= ab.value + shift_metric(&b, &c, p).value);
    }

    #[test]
    fn text_roundtrip(a in word_strategy(3)) {
        let back: PeriodicWord = a.to_string().parse().unwrap();
        prop_assert_eq!(&back, &a);
        let json = serde_json::to_string(&a).unwrap();
        prop_assert_eq!(serde_json::from_str::<PeriodicWord>(&json).unwrap(), a);
    }

    #[test]
    fn shift_is_a_group_action(a in word_strategy(2), n in -6i64..6, m in -6i64..6) {
        prop_assert_eq!(a.shift(n).shift(m), a.shift(n + m));
        for i in -8..8 {
            prop_assert_eq!(a.shift(n).at(i), a.at(i + n));
        }
    }

    #[test]
    fn closure_is_extensive_and_idempotent(seed in 0u64..10_000, k in 1usize..5) {
        let s = random_presentation(seed, 2).unwrap();
        let t = sft_closure(&s, k).unwrap();
        for g in s.generators() {
            prop_assert!(t.is_member(g));
        }
        prop_assert!(stabilization_check(&s, k).unwrap());
    }

    #[test]
    fn closure_is_monotone_in_k(seed in 0u64..10_000, k in 1usize..4) {
        let s = random_presentation(seed, 2).unwrap();
        let coarse = sft_closure(&s, k).unwrap();
        let fine = sft_closure(&s, k + 1).unwrap();
        for c in fine.periodic_points(2 * (k + 1)) {
            prop_assert!(coarse.is_member(&PeriodicWord::periodic(c).unwrap()));
        }
    }

    #[test]
    fn shadow_stays_within_two_delta(
        a in word_strategy(2),
        noise in prop::collection::vec((word_strategy(2), word_strategy(2)), 12),
        k in 1usize..4,
        start in -5i64..5,
        n in -7i64..7,
    ) {
        let t = full_sft(2, k);
        let delta = delta_for_window(k);
        // corrupting |i| > m costs at most 2^-(m-1) per step
        let m = k as i64 + 4;
        let words = noise
            .iter()
            .enumerate()
            .map(|(j, (b, c))| far_replaced(&a.shift(start + j as i64), m, b, c))
            .collect();
        let pseudo = SymbolicPseudoOrbit::new(start, words);
        prop_assert!(pseudo.defect() < delta);
        let s = symbolic_shadow(&t, &pseudo, delta).unwrap();
        prop_assert!(t.is_member(&s));
        for (j, w) in pseudo.words.iter().enumerate() {
            let d = shift_metric(&s.shift(start + j as i64), w, 48).upper();
            prop_assert!(d <= 2.0 * delta, "j {} d {}", j, d);
        }
        prop_assert_eq!(symbolic_shadow(&t, &pseudo.shifted(n), delta).unwrap(), s.shift(n));
    }
}

/// Exact local product structure: two members agreeing on `[0, k-1]` splice
/// into a member.
#[test]
fn symbolic_bracket_stays_in_the_sft() {
    let mut checked = 0;
    for seed in 0..60 {
        let s = random_presentation(seed, 2).unwrap();
        for k in 1..=3 {
            let t: Sft = sft_closure(&s, k).unwrap();
            let orbit: Vec<PeriodicWord> = s
                .generators()
                .iter()
                .flat_map(|g| (-8..8).map(move |n| g.shift(n)))
                .collect();
            for a in &orbit {
                for b in &orbit {
                    if a.window(0, k as i64) != b.window(0, k as i64) {
                        continue;
                    }
                    let spliced = PeriodicWord::splice(b, 0, a);
                    assert!(t.is_member(&spliced), "seed {seed} k {k}: {b} | {a}");
                    checked += 1;
                }
            }
        }
    }
    assert!(checked > 1000);
}
