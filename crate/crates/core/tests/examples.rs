use grac::bloch::BlochVector;
use grac::channels::{
    critical_depolarizing, crossing_window, dephasing_sweep, depolarizing_sweep, uniform_grid,
    ChannelError, CURVE_TOL,
};
use grac::classical::{
    best_rac_lift, classical_optimum, evaluate_classical, lift_rac_strategy, majority_identity,
    Success,
};
use grac::eacc::{eacc_seesaw, embed_classical as embed_eacc, evaluate_eacc, EaccConfig};
use grac::mubs::{full_mubs, select_set, subsets, FunctionSet};
use grac::quantum::{
    embed_classical as embed_pm, evaluate_pm, seesaw, theorem2_bound, SeesawConfig,
};
use grac::report::{reproduce_table, ReportConfig, TableId};

fn set(labels: &str) -> FunctionSet {
    labels.parse().unwrap()
}

fn x_axis() -> BlochVector {
    BlochVector::new(1.0, 0.0, 0.0)
}

#[test]
fn qubit_optimum_dominates_classical_on_every_set() {
    let cfg = SeesawConfig::default();
    for k in 1..=7 {
        for s in subsets(3, k).unwrap() {
            let sc = classical_optimum(&s, 1).unwrap().value.value();
            let sq = seesaw(&s, &cfg, None).unwrap().value;
            assert!(sq >= sc - 1e-9, "{s}: {sq} < {sc}");
            assert!(sq <= theorem2_bound(k) + 1e-12, "{s}: {sq}");
        }
    }
}

#[test]
fn classical_strategies_embed_exactly() {
    for k in [2, 4, 7] {
        for s in subsets(3, k).unwrap().take(5) {
            let opt = classical_optimum(&s, 4).unwrap();
            for strat in &opt.strategies {
                let pm = embed_pm(strat, &s).unwrap();
                assert!((evaluate_pm(&pm, &s).unwrap() - opt.value.value()).abs() < 1e-12);
                let ea = embed_eacc(strat, &s).unwrap();
                assert!((evaluate_eacc(&ea, &s).unwrap() - opt.value.value()).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn entanglement_assisted_dominates_classical() {
    let cfg = EaccConfig {
        restarts: 8,
        ..EaccConfig::default()
    };
    for selector in ["k=2", "k=3", "k=4:xor-closed", "k=4:open", "k=7"] {
        let s = select_set(3, selector).unwrap();
        let rep = eacc_seesaw(&s, &cfg).unwrap();
        let sc = classical_optimum(&s, 1).unwrap().value.value();
        assert!(rep.value >= sc - 1e-9, "{selector}");
        assert!(rep.monotone, "{selector}");
        assert!(rep.completeness_error < 1e-10, "{selector}");
        assert!((evaluate_eacc(&rep.strategy, &s).unwrap() - rep.value).abs() < 1e-10);
    }
}

#[test]
fn dephasing_sweep_of_open_quadruple() {
    let quad = select_set(3, "k=4:open").unwrap();
    let grid = uniform_grid(0.5, 26);
    let cfg = SeesawConfig::default();
    let sweep = dephasing_sweep(&quad, x_axis(), &grid, &cfg).unwrap();
    let noiseless = seesaw(&quad, &cfg, None).unwrap().value;
    assert!((sweep.values[0] - noiseless).abs() < 1e-9);
    let sc = sweep.classical.value();
    assert!(sweep.classical.equals(11, 16));
    assert!(*sweep.values.last().unwrap() >= sc - 1e-8);
    for v in &sweep.values {
        assert!(*v >= sc - 1e-8 && *v <= theorem2_bound(4) + 1e-12);
    }
    for w in sweep.values.windows(2) {
        assert!(w[1] <= w[0] + CURVE_TOL, "{w:?}");
    }
    let csv = sweep.to_csv();
    assert!(csv.starts_with("lambda,one_minus_lambda,quantum_value,classical_value,ratio\n"));
    assert_eq!(csv.lines().count(), grid.len() + 1);
}

#[test]
fn depolarizing_sweep_crosses_classical_at_threshold() {
    let cfg = SeesawConfig::default();
    let s = set("100,010,001");
    let crit = critical_depolarizing(&s, &cfg).unwrap();
    let grid = uniform_grid(1.0, 41);
    let sweep = depolarizing_sweep(&s, &grid, &cfg).unwrap();
    for (l, v) in grid.iter().zip(&sweep.values) {
        let expected = 0.5 + (1.0 - l) * (crit.quantum - 0.5);
        assert!((v - expected).abs() < 1e-9, "lambda {l}: {v} vs {expected}");
        if *l < crit.lambda_crit - 1e-9 {
            assert!(*v > crit.classical.value());
        }
    }
}

#[test]
fn crossing_window_rejects_dominated_pairs() {
    let cfg = SeesawConfig::default();
    let grid = uniform_grid(0.5, 11);
    let quad = select_set(3, "k=4:open").unwrap();
    let err = crossing_window(&quad, &quad, x_axis(), &grid, 1e-4, &cfg).unwrap_err();
    assert!(matches!(err, ChannelError::NoCrossing), "{err}");
    let pair = set("100,010");
    let full = full_mubs(3).unwrap();
    let err = crossing_window(&pair, &full, x_axis(), &grid, 1e-4, &cfg).unwrap_err();
    assert!(matches!(err, ChannelError::NoCrossing), "{err}");
}

#[test]
fn crossing_window_for_quintuple_against_quadruple() {
    let cfg = SeesawConfig::default();
    let grid = uniform_grid(0.5, 101);
    let w = crossing_window(
        &set("100,010,001,110,101"),
        &set("100,010,001,110"),
        x_axis(),
        &grid,
        1e-4,
        &cfg,
    )
    .unwrap();
    assert!(
        (w.low - 0.5).abs() < 0.01 && (w.high - 0.871).abs() < 0.01,
        "{w:?}"
    );
}

#[test]
fn lifted_rac_examples() {
    let rac2 = majority_identity(&FunctionSet::rac(2).unwrap()).unwrap();
    let pair = set("110,011");
    let lifted = lift_rac_strategy(&rac2, &pair, &[0, 1]).unwrap();
    assert_eq!(
        evaluate_classical(&lifted, &pair).unwrap(),
        Success::new(12, 16)
    );

    let rac3 = majority_identity(&FunctionSet::rac(3).unwrap()).unwrap();
    for s in subsets(3, 3).unwrap() {
        let (_, _, value) = best_rac_lift(&rac3, &s).unwrap();
        assert!(classical_optimum(&s, 1).unwrap().value >= value, "{s}");
    }
    assert!(lift_rac_strategy(&rac3, &pair, &[0, 1]).is_err());
    assert!(lift_rac_strategy(&rac2, &pair, &[0, 0]).is_err());
}

#[test]
fn seesaw_is_deterministic_for_a_seed() {
    let s = full_mubs(3).unwrap();
    let cfg = SeesawConfig::with_seed(7);
    let a = seesaw(&s, &cfg, None).unwrap();
    let b = seesaw(&s, &cfg, None).unwrap();
    assert_eq!(a, b);
}

#[test]
fn quantum_and_threshold_tables_reproduce() {
    let cfg = ReportConfig::default();
    for id in [TableId::Q, TableId::III] {
        let t = reproduce_table(id, &cfg).unwrap();
        assert!(t.passed(), "{t}");
    }
}

#[test]
fn entanglement_table_reproduces_with_larger_open_dimension() {
    let t = reproduce_table(TableId::IV, &ReportConfig::default()).unwrap();
    assert!(t.passed(), "{t}");
}
