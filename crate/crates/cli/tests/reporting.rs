use causalfair::bundle::{Metadata, Num, OrderedMap, OutcomeType, ReportBundle, IE_DIRECTION};
use causalfair::prompt::assemble_prompts;
use causalfair::sankey::{sankey_export, Sign};
use causalfair_core::effects::LedgerMetadata;
use causalfair_core::{ConfounderDecomposition, Contrast, EffectLedger, MediatorDecomposition, SfmRoles};

fn roles() -> SfmRoles {
    SfmRoles::new("sex", "income")
        .confounders(["relationship", "native-country"])
        .mediators(["hours", "occupation"])
        .groups(["male"], ["female"])
        .target("<=50K")
}

fn ledger(tv: f64, te: f64, de: f64, ie_rev: f64) -> EffectLedger {
    let meta = LedgerMetadata {
        n_rows: 100,
        alpha: 1.0,
        roles_digest: roles().digest(),
    };
    EffectLedger::from_parts(
        tv,
        te,
        de,
        -ie_rev,
        ie_rev,
        Contrast::new("male", "female", "<=50K"),
        meta,
    )
    .unwrap()
}

fn meta() -> Metadata {
    Metadata {
        n_rows: 100,
        dropped_rows: 0,
        alpha: Num(1.0),
        roles: roles(),
        dataset_digest: "0000000000000000".into(),
        ie_direction: IE_DIRECTION.into(),
    }
}

fn mediators(v: [f64; 2]) -> MediatorDecomposition {
    MediatorDecomposition {
        order: vec!["hours".into(), "occupation".into()],
        components: v.to_vec(),
        total_ie: v[0] + v[1],
        residual: 0.0,
    }
}

fn confounders(v: [f64; 2]) -> ConfounderDecomposition {
    ConfounderDecomposition {
        order: vec!["relationship".into(), "native-country".into()],
        components: v.to_vec(),
        total_se: v[0] + v[1],
        residual: 0.0,
    }
}

/// Published values of the complete Adult decomposition.
fn table_one() -> (EffectLedger, MediatorDecomposition, ConfounderDecomposition) {
    (
        ledger(0.1736, 0.0053, -0.0051, -0.0104),
        mediators([-0.0027, -0.0077]),
        confounders([0.1685, -0.0002]),
    )
}

#[test]
fn ledger_only_bundle_has_explicit_nulls() {
    let b = ReportBundle::minimal(&ledger(0.2, 0.05, 0.03, -0.02), &roles(), OutcomeType::Binary, meta());
    let v: serde_json::Value = serde_json::from_str(&b.to_json().unwrap()).unwrap();
    for key in [
        "x_specific",
        "z_specific",
        "ie_by_mediator",
        "se_by_confounder",
        "threshold_curve",
    ] {
        assert!(v[key].is_null(), "{key}");
    }
    assert_eq!(v["stepwise"], serde_json::json!({"enabled": false}));
    assert_eq!(v["schema_version"], "1");
}

#[test]
fn table_one_bundle_carries_published_values() {
    let (l, m, c) = table_one();
    let mut b = ReportBundle::minimal(&l, &roles(), OutcomeType::Binary, meta());
    b.ie_by_mediator = Some(OrderedMap(
        m.order
            .iter()
            .cloned()
            .zip(m.components.iter().map(|v| Num(*v)))
            .collect(),
    ));
    b.se_by_confounder = Some(OrderedMap(
        c.order
            .iter()
            .cloned()
            .zip(c.components.iter().map(|v| Num(*v)))
            .collect(),
    ));
    let json = b.to_json().unwrap();
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["effects"]["tv"], 0.1736);
    assert_eq!(v["effects"]["ie"], -0.0104);
    assert_eq!(v["se_by_confounder"]["relationship"], 0.1685);
    // Keys keep role order rather than sorting.
    assert!(json.find("\"relationship\"").unwrap() < json.find("\"native-country\"").unwrap());
    assert_eq!(ReportBundle::from_json(&json).unwrap(), b);
}

#[test]
fn values_are_rounded_on_serialization_only() {
    let l = ledger(0.00533, 0.00533, 0.00533, 0.0);
    let b = ReportBundle::minimal(&l, &roles(), OutcomeType::Binary, meta());
    assert_eq!(b.effects.te.0, 0.00533);
    let v: serde_json::Value = serde_json::from_str(&b.to_json().unwrap()).unwrap();
    assert_eq!(v["effects"]["te"].to_string(), "0.0053");
}

#[test]
fn breached_identity_is_rejected_before_serialization() {
    let mut b = ReportBundle::minimal(&ledger(0.2, 0.05, 0.03, -0.02), &roles(), OutcomeType::Binary, meta());
    b.effects.se = Num(0.2);
    let e = b.to_json().unwrap_err();
    assert!(e.to_string().contains("/effects/se"), "{e}");
}

#[test]
fn enabled_stepwise_needs_steps() {
    let json = ReportBundle::minimal(&ledger(0.2, 0.05, 0.03, -0.02), &roles(), OutcomeType::Binary, meta())
        .to_json()
        .unwrap()
        .replace(r#""enabled": false"#, r#""enabled": true"#);
    let e = ReportBundle::from_json(&json).unwrap_err();
    assert!(e.to_string().contains("/stepwise/effects_by_step"), "{e}");
}

#[test]
fn prompts_depend_on_the_bundle_only_through_the_user_part() {
    let a = ReportBundle::minimal(&ledger(0.2, 0.05, 0.03, -0.02), &roles(), OutcomeType::Binary, meta());
    let b = ReportBundle::minimal(&ledger(0.2, 0.06, 0.03, -0.03), &roles(), OutcomeType::Binary, meta());
    let (pa, pa2, pb) = (
        assemble_prompts(&a).unwrap(),
        assemble_prompts(&a).unwrap(),
        assemble_prompts(&b).unwrap(),
    );
    assert_eq!(pa, pa2);
    assert_eq!(pa.system, pb.system);
    assert_ne!(pa.user, pb.user);
    let user: serde_json::Value = serde_json::from_str(&pa.user).unwrap();
    assert_eq!(user["stepwise"]["enabled"], false);
}

#[test]
fn sankey_of_all_positive_effects_is_a_flow() {
    // Single confounder and mediator on Adult: every descriptor is positive.
    let l = ledger(0.1939, 0.0225, 0.0473, 0.0248);
    let s = sankey_export(&l, None, None);
    assert!(s.renderable_as_flow);
    let tv_se = s.links.iter().find(|k| k.target == "se").unwrap();
    let tv_te = s.links.iter().find(|k| k.target == "te").unwrap();
    assert!(tv_se.value.0 > tv_te.value.0, "SE is the dominant branch");
    // Children sum to their parent.
    let te_children: f64 = s.links.iter().filter(|k| k.source == "te").map(|k| k.value.0).sum();
    assert!((te_children - l.te).abs() < 1e-12);
}

#[test]
fn sankey_of_mixed_signs_is_not_a_flow() {
    let (l, m, c) = table_one();
    let s = sankey_export(&l, Some(&m), Some(&c));
    assert!(!s.renderable_as_flow);
    assert_eq!(s.nodes.len(), 9);
    let leaf = s.links.iter().find(|k| k.target == "ie:occupation").unwrap();
    assert_eq!((leaf.value.0, leaf.sign), (0.0077, Sign::Positive));
    let ie_sum: f64 = s.links.iter().filter(|k| k.source == "ie").map(|k| k.value.0).sum();
    let te_ie = s.links.iter().find(|k| k.target == "ie").unwrap();
    assert!((ie_sum - te_ie.value.0).abs() < 1e-12);
}

#[test]
fn sankey_of_zero_ledger_is_all_zero_and_renderable() {
    let s = sankey_export(&ledger(0.0, 0.0, 0.0, 0.0), Some(&mediators([0.0, 0.0])), None);
    assert!(s.renderable_as_flow);
    assert!(s.links.iter().all(|k| k.sign == Sign::Zero && k.value.0 == 0.0));
    let json = serde_json::to_string(&s).unwrap();
    assert!(json.contains(r#""sign":"0""#));
}
