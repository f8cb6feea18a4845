use normal_bandits::bounds::m_bk;
use normal_bandits::report::{to_bytes, write_traces};
use normal_bandits::{run_experiment, BanditInstance, ExperimentConfig, PolicySpec};

fn config(instance: BanditInstance, policies: Vec<PolicySpec>, seed: u64) -> ExperimentConfig {
    ExperimentConfig::new(instance, policies, 2000, 40, seed, vec![]).unwrap()
}

#[test]
fn concurrent_callers_get_sequential_results() {
    let a = config(
        BanditInstance::table1(),
        vec![PolicySpec::Chk, PolicySpec::Greedy],
        1,
    );
    let b = config(
        BanditInstance::table2(),
        vec![PolicySpec::Thompson { alpha: -1.0 }],
        2,
    );
    let expected_a = run_experiment(&a).unwrap();
    let expected_b = run_experiment(&b).unwrap();
    let (got_a, got_b) = std::thread::scope(|s| {
        let ha = s.spawn(|| run_experiment(&a).unwrap());
        let hb = s.spawn(|| run_experiment(&b).unwrap());
        (ha.join().unwrap(), hb.join().unwrap())
    });
    assert_eq!(got_a, expected_a);
    assert_eq!(got_b, expected_b);
}

#[test]
fn seed_changes_output() {
    let inst = BanditInstance::table1();
    let bytes = |seed| {
        let t = run_experiment(&config(inst.clone(), vec![PolicySpec::Chk], seed)).unwrap();
        to_bytes(|b| write_traces(b, &t)).unwrap()
    };
    assert_eq!(bytes(4), bytes(4));
    assert_ne!(bytes(4), bytes(5));
}

#[test]
fn index_policies_beat_greedy_when_greedy_locks_in() {
    // a low first draw from the noisy best arm leaves greedy on the other arm for good
    let inst = BanditInstance::new(vec![1.0, 0.0], vec![4.0, 0.25]).unwrap();
    let traces = run_experiment(
        &ExperimentConfig::new(
            inst,
            vec![PolicySpec::Chk, PolicySpec::Bk, PolicySpec::Greedy],
            5000,
            200,
            8,
            vec![],
        )
        .unwrap(),
    )
    .unwrap();
    let last = |i: usize| *traces[i].mean_regret.last().unwrap();
    assert!(last(2) > 500.0, "greedy {}", last(2));
    assert!(
        last(0) < last(2) / 5.0,
        "chk {} greedy {}",
        last(0),
        last(2)
    );
    assert!(last(1) < last(2) / 5.0, "bk {} greedy {}", last(1), last(2));
}

#[test]
fn known_variance_regret_is_logarithmic_scale() {
    let inst = BanditInstance::new(vec![1.0, 0.0], vec![1.0, 1.0]).unwrap();
    let traces = run_experiment(
        &ExperimentConfig::new(
            inst.clone(),
            vec![
                PolicySpec::KnownVariance {
                    sigmas: vec![1.0, 1.0],
                },
                PolicySpec::Chk,
            ],
            5000,
            200,
            3,
            vec![],
        )
        .unwrap(),
    )
    .unwrap();
    let ln_n = 5000f64.ln();
    for t in &traces {
        let r = *t.mean_regret.last().unwrap();
        assert!(
            r > 0.0 && r < 10.0 * m_bk(&inst) * ln_n,
            "{}: {r}",
            t.policy.label()
        );
    }
}
