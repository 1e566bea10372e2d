use blowuplab_core::report::{read_csv, to_csv_string, SweepCsvRow};
use blowuplab_core::simulator::{
    convergence_test, detect_blowup, run, sweep_p, time_refinement_ratio, ConvergenceOptions, SimManufactured,
};
use blowuplab_core::{Gaussian, InitialData, ProblemSpec, SimSpec, SimVerdict, TraceRow};
use proptest::prelude::*;

fn pulse(amplitude: f64) -> InitialData {
    InitialData { u0: Gaussian::default(), u1: Gaussian::new(amplitude, 1.0) }
}

fn t_star(spec: &SimSpec) -> f64 {
    run(spec).unwrap().verdict.t_star().expect("blow-up")
}

#[test]
fn amplitude_five_blows_up_at_two_resolutions() {
    let coarse = SimSpec::new(ProblemSpec::unit(1, 1.5), pulse(5.0), 50.0);
    let t1 = t_star(&coarse);
    let mut fine = coarse;
    let m = run(&coarse).unwrap().mesh;
    fine.r_max = Some(m.r_max);
    fine.cells = Some(2 * m.cells);
    let t2 = t_star(&fine);
    assert!(t1 < 50.0);
    assert!((t1 - t2).abs() <= 0.1 * t2, "{t1} vs {t2}");
}

#[test]
fn doubling_amplitude_shortens_lifespan() {
    let a = t_star(&SimSpec::new(ProblemSpec::unit(1, 1.5), pulse(5.0), 50.0));
    let b = t_star(&SimSpec::new(ProblemSpec::unit(1, 1.5), pulse(10.0), 50.0));
    assert!(b < a, "{b} vs {a}");
}

#[test]
fn zero_amplitude_sweep_survives() {
    let spec = SimSpec::new(ProblemSpec::unit(1, 1.5), pulse(0.0), 30.0);
    let rep = sweep_p(&spec, &[1.2, 1.5, 2.0]).unwrap();
    assert!(rep.rows.iter().all(|r| matches!(r.verdict, SimVerdict::Survived { .. })));
}

#[test]
fn small_data_lifespan_grows_with_p() {
    // survival up to t_max counts as t* >= t_max
    let spec = SimSpec::new(ProblemSpec::unit(1, 1.5), pulse(0.05), 400.0);
    let rep = sweep_p(&spec, &[1.2, 1.5, 2.0]).unwrap();
    let life: Vec<f64> = rep.rows.iter().map(|r| r.verdict.time()).collect();
    assert!(life.windows(2).all(|w| w[0] <= w[1] * 1.1), "{life:?}");
    assert!(rep.warning.is_none());
}

#[test]
fn lifespan_is_insensitive_to_the_threshold() {
    for p in [1.5, 2.0] {
        let base = SimSpec::new(ProblemSpec::unit(1, p), pulse(5.0), 50.0);
        let mut high = base;
        high.blowup_threshold = 1e8;
        let (a, b) = (t_star(&base), t_star(&high));
        assert!((b - a).abs() < 0.02 * a, "p = {p}: {a} vs {b}");
    }
}

#[test]
fn manufactured_solution_converges_at_second_order() {
    let rep = convergence_test(SimManufactured::DecayingGaussian, &ConvergenceOptions::default()).unwrap();
    assert!((rep.observed - 2.0).abs() <= 0.2, "{rep:?}");
    assert!(rep.errors.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn halving_dt_alone_quarters_the_temporal_error() {
    let ratio = time_refinement_ratio(SimManufactured::DecayingGaussian, &ConvergenceOptions::default(), 1024, 128)
        .unwrap();
    assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
}

#[test]
fn convergence_holds_in_three_dimensions_with_decaying_speed() {
    let mut opts = ConvergenceOptions::default();
    opts.problem = ProblemSpec::unit(3, 2.0);
    opts.problem.alpha = 0.5;
    let rep = convergence_test(SimManufactured::DecayingGaussian, &opts).unwrap();
    assert!((rep.observed - 2.0).abs() <= 0.2, "{rep:?}");
}

#[test]
fn sweep_csv_round_trips() {
    let spec = SimSpec::new(ProblemSpec::unit(1, 1.5), pulse(5.0), 50.0);
    let rep = sweep_p(&spec, &[1.2, 2.0]).unwrap();
    let rows: Vec<SweepCsvRow> = rep.rows.iter().map(SweepCsvRow::from).collect();
    let text = to_csv_string(&rows).unwrap();
    assert_eq!(read_csv::<SweepCsvRow, _>(text.as_bytes()).unwrap(), rows);
    assert_eq!(to_csv_string(&rows).unwrap(), text);
}

#[test]
fn trace_crossing_agrees_with_run_verdict() {
    let mut spec = SimSpec::new(ProblemSpec::unit(1, 2.0), pulse(5.0), 50.0);
    spec.record_every = 1;
    let out = run(&spec).unwrap();
    let from_trace = detect_blowup(&out.trace, spec.blowup_threshold).unwrap().unwrap();
    assert_eq!(Some(from_trace), out.verdict.t_star());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn linear_scheme_is_linear(a0 in -2.0f64..2.0, a1 in -2.0f64..2.0, k in 0.25f64..4.0) {
        let data = InitialData { u0: Gaussian::new(a0, 1.0), u1: Gaussian::new(a1, 0.8) };
        let mut one = SimSpec::new(ProblemSpec::unit(2, 2.0), data, 4.0);
        one.nonlinear = false;
        one.r_max = Some(16.0);
        one.cells = Some(256);
        let mut scaled = one;
        scaled.data.u0.amplitude *= k;
        scaled.data.u1.amplitude *= k;
        let (_, u) = blowuplab_core::simulator::final_profile(&one).unwrap();
        let (_, v) = blowuplab_core::simulator::final_profile(&scaled).unwrap();
        let scale = u.iter().fold(0.0f64, |s, x| s.max(x.abs())).max(1e-300);
        for (x, y) in u.iter().zip(&v) {
            prop_assert!((k * x - y).abs() <= 1e-10 * k * scale);
        }
    }

    #[test]
    fn detect_blowup_finds_first_crossing(samples in prop::collection::vec(0.0f64..10.0, 2..40), thr in 0.5f64..9.5) {
        let trace: Vec<TraceRow> = samples
            .iter()
            .enumerate()
            .map(|(k, &s)| TraceRow { t: k as f64, sup_norm: s, energy: 0.0 })
            .collect();
        match detect_blowup(&trace, thr).unwrap() {
            None => prop_assert!(samples.iter().all(|&s| s < thr)),
            Some(t) => {
                let first = samples.iter().position(|&s| s >= thr).unwrap();
                prop_assert!(t <= first as f64 && (first == 0 || t >= first as f64 - 1.0));
                prop_assert!(samples[..first].iter().all(|&s| s < thr));
            }
        }
    }
}
