use d2p_core::bloch::{apply_schedule, make_initial_state};
use d2p_core::montecarlo::{run_schedule, run_trial};
use d2p_core::noise::perturb;
use d2p_core::schedules::{d2p_schedule, improved_schedule, original_schedule, positioned_schedule};
use d2p_core::statevector::full_simulate;
use d2p_core::{Lambda, NoiseSpec, RngStream};

fn lam(x: f64) -> Lambda {
    Lambda::new(x).unwrap()
}

#[test]
fn noisy_trial_agrees_with_full_statevector() {
    let spec: NoiseSpec = "oracle=gaussian:mu=0,var=0.04;reflection=uniform:a=-0.1,b=0.2@both".parse().unwrap();
    let marked = [3, 17, 40];
    let lambda = lam(3.0 / 64.0);
    for schedule in [
        original_schedule(lambda),
        improved_schedule(lambda).unwrap(),
        d2p_schedule(lambda, 6).unwrap(),
        positioned_schedule(lambda, 2).unwrap(),
    ] {
        for index in 0..20 {
            let stream = RngStream::new(9, index);
            let offsets = perturb(&schedule, &spec, &stream);
            let reduced = apply_schedule(&schedule, make_initial_state(lambda), &offsets).unwrap().success_probability();
            assert_eq!(reduced, run_trial(&schedule, &spec, &stream));
            let full = full_simulate(6, &marked, &schedule, &offsets).unwrap();
            assert!((full - reduced).abs() < 1e-10, "{:?} trial {index}: {full} vs {reduced}", schedule.kind);
        }
    }
}

#[test]
fn designed_schedules_beat_original_under_small_noise() {
    let spec: NoiseSpec = "gaussian:mu=0,var=0.0004@reflection".parse().unwrap();
    for x in [0.01, 0.04, 0.1] {
        let lambda = lam(x);
        let original = run_schedule(&original_schedule(lambda), &spec, 2000, 1);
        let improved = run_schedule(&improved_schedule(lambda).unwrap(), &spec, 2000, 1);
        assert!(improved.mean > 0.99, "lambda {x}: {}", improved.mean);
        assert!(improved.mean > original.mean - 3.0 * improved.combined_stderr(&original), "lambda {x}");
    }
}

#[test]
fn noise_spec_round_trips_through_text() {
    for text in [
        "none",
        "gaussian:mu=0.03,var=0.01@reflection",
        "poisson:rate=0.04@oracle",
        "uniform:a=-0.1,b=0.2@both",
        "oracle=gaussian:mu=0,var=0.04;reflection=gaussian:mu=0.03,var=0.01@both",
    ] {
        let spec: NoiseSpec = text.parse().unwrap();
        let again: NoiseSpec = spec.to_string().parse().unwrap();
        assert_eq!(spec, again, "{text}");
    }
}
