mod common;

use blowuplab_core::exponents::p_crit_for;
use blowuplab_core::functional::scan_condition;
use blowuplab_core::report::{read_csv, to_csv_string};
use blowuplab_core::{AuxOptions, AuxRow, AuxTable, DampingModel, ProblemSpec, ScanOptions, ScanRow, TermFit, Verdict};

use common::{closed_form, rel_err};

fn radii() -> Vec<f64> {
    (3..=8).map(|k| 2f64.powi(k)).collect()
}

#[test]
fn scan_verdict_tracks_the_critical_exponent() {
    let families = [
        DampingModel::Constant { mu: 1.0 },
        DampingModel::PowerLaw { mu: 1.0, kappa: 0.5 },
        DampingModel::PowerLaw { mu: 1.0, kappa: -0.5 },
    ];
    for damping in families {
        for (alpha, gamma, n) in [(0.0, 0.0, 1usize), (-0.5, 0.0, 1), (0.0, 1.0, 2)] {
            let mut spec = ProblemSpec::unit(n, 2.0);
            spec.damping = damping;
            spec.alpha = alpha;
            spec.gamma = gamma;
            let p_c = p_crit_for(&spec).unwrap().p_crit;
            for (p, expected) in [(p_c - 0.6, Verdict::Bounded), (p_c + 1.0, Verdict::Growing)] {
                if p <= 1.0 {
                    continue;
                }
                spec.p = p;
                let res = scan_condition(&spec, &radii(), &ScanOptions::default()).unwrap();
                assert_eq!(res.verdict, expected, "{damping:?} alpha {alpha} gamma {gamma} n {n} p {p}: {:?}", res.fits);
                for f in &res.fits {
                    assert!((f.fitted - f.predicted).abs() < 0.1, "{damping:?} p {p}: {f:?}");
                }
            }
        }
    }
}

#[test]
fn scan_tables_round_trip_and_repeat() {
    let spec = ProblemSpec::unit(1, 3.0);
    let a = scan_condition(&spec, &radii(), &ScanOptions::default()).unwrap();
    let b = scan_condition(&spec, &radii(), &ScanOptions::default()).unwrap();
    let text = to_csv_string(&a.rows).unwrap();
    assert_eq!(text, to_csv_string(&b.rows).unwrap());
    assert_eq!(read_csv::<ScanRow, _>(text.as_bytes()).unwrap(), a.rows);
    let fits = to_csv_string(&a.fits).unwrap();
    assert_eq!(read_csv::<TermFit, _>(fits.as_bytes()).unwrap(), a.fits);
}

#[test]
fn aux_rows_match_closed_forms_after_round_trip() {
    let m = DampingModel::PowerLaw { mu: 1.0, kappa: 0.5 };
    let aux = AuxTable::build(m, 500.0, AuxOptions::default()).unwrap();
    let rows = aux.rows();
    let text = to_csv_string(&rows).unwrap();
    assert!(text.starts_with("t,B,beta,Gamma,g\n"));
    let back: Vec<AuxRow> = read_csv(text.as_bytes()).unwrap();
    assert_eq!(back, rows);
    for r in back.iter().filter(|r| r.t <= 500.0) {
        let (b, beta, gamma, g) = closed_form(&m, r.t).unwrap();
        assert!(rel_err(r.big_b, b) < 1e-9);
        assert!(rel_err(r.beta, beta) < 1e-9);
        assert!(rel_err(r.big_gamma, gamma) < 1e-9);
        assert!(rel_err(r.g, g) < 1e-9);
    }
}

#[test]
fn strong_logarithmic_damping_matches_its_closed_form() {
    let m = DampingModel::PowerLaw { mu: 3.0, kappa: 1.0 };
    let aux = AuxTable::build(m, 1e4, AuxOptions::default()).unwrap();
    for t in [0.0, 1.0, 37.5, 999.0, 1e4] {
        let (_, _, gamma, g) = closed_form(&m, t).unwrap();
        assert!(rel_err(aux.g(t).unwrap(), g) < 1e-9, "t = {t}");
        assert!(rel_err(aux.big_gamma(t).unwrap(), gamma) < 1e-9, "t = {t}");
    }
}
