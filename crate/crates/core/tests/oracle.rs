use causalfair_core::decomposition::nested_mediator_term;
use causalfair_core::scm::{mediator_order_construction, random_sfm_scm, NestedQuery, RandomScmConfig, Scm};
use causalfair_core::*;

fn exact_estimator(m: &Scm) -> SfmEstimator {
    m.exact_observational()
        .unwrap()
        .estimator(m.roles(), DEFAULT_CAP)
        .unwrap()
}

#[test]
fn identification_matches_ground_truth_on_random_models() {
    for seed in 0..60 {
        let spec = random_sfm_scm(seed, &RandomScmConfig::random(seed)).unwrap();
        let m = Scm::new(spec).unwrap();
        let e = exact_estimator(&m);
        for y in e.y_states().to_vec() {
            let c = Contrast::new("0", "1", y);
            let truth = m.ground_truth_ledger(&c).unwrap();
            let est = effect_ledger(&e, &c).unwrap();
            for k in EffectKind::ALL {
                let gap = (truth.get(k) - est.get(k)).abs();
                assert!(gap < 1e-9, "seed {seed} {k:?}: {} vs {}", truth.get(k), est.get(k));
            }
        }
    }
}

#[test]
fn nested_terms_match_oracle_with_two_mediators() {
    for seed in 0..30 {
        let cfg = RandomScmConfig {
            mediators: 2,
            confounders: (seed % 3) as usize,
            max_card: 3,
            y_card: 2,
            shared_xz: seed % 2 == 0,
        };
        let m = Scm::new(random_sfm_scm(seed, &cfg).unwrap()).unwrap();
        let e = exact_estimator(&m);
        for i in 0..=2 {
            // W¹ (then W²) respond to x₁ in the world built so far.
            let mut q = NestedQuery::new("y", "1").set("x", "0");
            for (j, w) in ["w1", "w2"].into_iter().enumerate() {
                q = q.natural(w, "x", if j < i { "1" } else { "0" });
            }
            let truth = m.counterfactual_prob(&q).unwrap();
            let est = nested_mediator_term(&e, "0", "1", "1", &["w1", "w2"], i).unwrap();
            assert!((truth - est).abs() < 1e-9, "seed {seed} i {i}: {truth} vs {est}");
        }
    }
}

#[test]
fn composition_axiom() {
    for seed in 0..20 {
        let m = Scm::new(random_sfm_scm(seed, &RandomScmConfig::random(seed)).unwrap()).unwrap();
        let ws: Vec<String> = m.roles().w.clone();
        for x in ["0", "1"] {
            for y in ["0", "1"] {
                let plain = m.counterfactual_prob(&NestedQuery::new("y", y).set("x", x)).unwrap();
                let mut q = NestedQuery::new("y", y).set("x", x);
                for w in &ws {
                    q = q.natural(w.as_str(), "x", x);
                }
                assert!((plain - m.counterfactual_prob(&q).unwrap()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn additive_construction_is_order_invariant_and_linear() {
    for seed in 0..10 {
        let m = Scm::new(mediator_order_construction(seed, false)).unwrap();
        let e = exact_estimator(&m);
        for c in [Contrast::new("0", "1", "1"), Contrast::new("1", "0", "1")] {
            let rep = ordering_sensitivity(&e, &c, SensitivityKind::Mediator).unwrap();
            assert!(rep.max_spread() < 1e-9, "seed {seed}: spread {}", rep.max_spread());
            let l = effect_ledger(&e, &c).unwrap();
            assert!((l.te - (l.de + l.ie)).abs() < 1e-9);
        }
    }
}

#[test]
fn interaction_construction_breaks_order_invariance() {
    let worst = (0..10)
        .map(|seed| {
            let m = Scm::new(mediator_order_construction(seed, true)).unwrap();
            let e = exact_estimator(&m);
            ordering_sensitivity(&e, &Contrast::new("1", "0", "1"), SensitivityKind::Mediator)
                .unwrap()
                .max_spread()
        })
        .fold(0.0, f64::max);
    assert!(worst > 1e-4, "largest spread {worst}");
}

#[test]
fn finite_sample_converges() {
    let spec = random_sfm_scm(11, &RandomScmConfig::default()).unwrap();
    let m = Scm::new(spec).unwrap();
    let c = Contrast::new("0", "1", "1");
    let truth = m.ground_truth_ledger(&c).unwrap();
    let d = m.sample(100_000, 5).unwrap();
    let e = SfmEstimator::fit(&d, m.roles(), 1.0).unwrap();
    let est = effect_ledger(&e, &c).unwrap();
    for k in EffectKind::ALL {
        assert!((truth.get(k) - est.get(k)).abs() < 0.03, "{k:?}");
    }
}
