use nemesys::ground::{IndexTensor, BOT, TOP};
use nemesys::infer::{forward_step, gather_eval, infer, softor, softor_raw, ReasonerConfig, RuleWeights};
use proptest::prelude::*;

/// `(v0, rules)` over `g` atoms with random groundings.
fn program() -> impl Strategy<Value = (Vec<f64>, Vec<IndexTensor>)> {
    (4usize..10, 1usize..4).prop_flat_map(|(g, c)| {
        let v0 = prop::collection::vec(0.0f64..=1.0, g);
        let rule = (1usize..4, 1usize..4).prop_flat_map(move |(s, l)| {
            prop::collection::vec((2..g, prop::collection::vec(0..g, 1..=l)), 0..(g - 2) * s).prop_map(move |gs| (s, l, gs))
        });
        (v0, prop::collection::vec(rule, c)).prop_map(move |(mut v0, rules)| {
            v0[TOP] = 1.0;
            v0[BOT] = 0.0;
            let tensors = rules
                .into_iter()
                .enumerate()
                .map(|(i, (s, l, gs))| {
                    // Keep at most `s` substitutions per head.
                    let mut used = vec![0; g];
                    let gs: Vec<_> = gs.into_iter().filter(|(h, _)| { used[*h] += 1; used[*h] <= s }).collect();
                    IndexTensor::build(i, g, s, l, &gs)
                })
                .collect();
            (v0, tensors)
        })
    })
}

fn weights(c: usize) -> impl Strategy<Value = RuleWeights> {
    (1usize..=c).prop_flat_map(move |m| prop::collection::vec(-3.0f64..3.0, m * c).prop_map(move |l| RuleWeights::new(m, c, l)))
}

fn cfg(t: usize) -> ReasonerConfig {
    ReasonerConfig { t, gamma: 0.01, clamp: true, trace: false }
}

proptest! {
    #[test]
    fn softor_is_bracketed(xs in prop::collection::vec(0.0f64..=1.0, 1..12), gamma in 0.001f64..0.5) {
        let mx = xs.iter().cloned().fold(f64::MIN, f64::max);
        let raw = softor_raw(&xs, gamma);
        prop_assert!(mx <= raw + 1e-12);
        prop_assert!(raw <= mx + gamma * (xs.len() as f64).ln() + 1e-12);
        prop_assert!(softor(&xs, gamma) <= 1.0);
    }

    #[test]
    fn steps_are_monotone_and_bounded((v0, rules) in program(), seed in 0u64..1000) {
        let c = rules.len();
        let w = RuleWeights::new(1, c, (0..c).map(|i| ((seed + i as u64) % 5) as f64 - 2.0).collect());
        let mut v = v0;
        for _ in 0..4 {
            let (next, _) = forward_step(&v, &rules, &[], &w, &cfg(1));
            for j in 0..v.len() {
                prop_assert!(next[j] >= v[j] || j == BOT, "atom {} fell from {} to {}", j, v[j], next[j]);
                prop_assert!((0.0..=1.0).contains(&next[j]));
            }
            prop_assert_eq!(next[TOP], 1.0);
            prop_assert_eq!(next[BOT], 0.0);
            v = next;
        }
    }

    #[test]
    fn permuting_rules_with_weight_columns_is_invisible((v0, rules) in program(), w in weights(3), rot in 0usize..3) {
        let c = rules.len();
        let w = RuleWeights::new(w.m, c, (0..w.m).flat_map(|m| w.logits[m * w.c..m * w.c + c].to_vec()).collect());
        let perm: Vec<usize> = (0..c).map(|i| (i + rot) % c).collect();
        let rules_p: Vec<IndexTensor> = perm.iter().map(|&i| rules[i].clone()).collect();
        let logits_p = (0..w.m).flat_map(|m| perm.iter().map(move |&i| (m, i))).map(|(m, i)| w.logits[m * c + i]).collect();
        let wp = RuleWeights::new(w.m, c, logits_p);
        let (a, _) = infer(&v0, &rules, &[], &w, &cfg(3));
        let (b, _) = infer(&v0, &rules_p, &[], &wp, &cfg(3));
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
    }

    #[test]
    fn softmax_rows_sum_to_one(w in weights(7)) {
        let s = w.softmax();
        for m in 0..w.m {
            let row: f64 = s[m * w.c..(m + 1) * w.c].iter().sum();
            prop_assert!((row - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn gather_reads_exact_entries((v0, rules) in program()) {
        for t in &rules {
            let b = gather_eval(&v0, t);
            for j in 0..t.g {
                for k in 0..t.s {
                    let want: f64 = (0..t.l).map(|p| v0[t.get(j, k, p)]).product();
                    prop_assert_eq!(b[j * t.s + k].to_bits(), want.to_bits());
                }
            }
        }
    }
}

#[test]
fn padding_is_neutral() {
    // Atoms: 0 ⊤, 1 ⊥, 2..=4 ordinary.
    let v = vec![1.0, 0.0, 0.7, 0.4, 0.0];
    let t = IndexTensor::build(0, 5, 3, 3, &[(4, vec![2]), (4, vec![2, 3])]);
    let b = gather_eval(&v, &t);
    // Unused body positions hold ⊤ and multiply by 1.
    assert_eq!(b[4 * 3], 0.7);
    assert_eq!(b[4 * 3 + 1], 0.7 * 0.4);
    // The unused third substitution holds ⊥ and scores 0.
    assert_eq!(b[4 * 3 + 2], 0.0);
    // A head with no groundings is all ⊥.
    assert!(b[2 * 3..3 * 3].iter().all(|&x| x == 0.0));
    assert_eq!(t.live(4), 2);
    assert_eq!(t.live(2), 0);
}

#[test]
fn boolean_chain_reaches_the_end() {
    // 2 -> 3 -> 4 with one rule each step.
    let v0 = vec![1.0, 0.0, 1.0, 0.0, 0.0];
    let r = IndexTensor::build(0, 5, 1, 1, &[(3, vec![2]), (4, vec![3])]);
    let (v, _) = infer(&v0, &[r], &[], &RuleWeights::identity(1), &cfg(2));
    assert!(v[3] > 0.99 && v[4] > 0.99);
    assert!(v[1] == 0.0);
}
