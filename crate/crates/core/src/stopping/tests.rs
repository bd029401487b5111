use proptest::prelude::*;

use super::*;
use crate::solvers::{IterateRecord, Termination, UnsketchedMetrics};

fn metrics(residual_norm: f64, normal_ratio: f64, stale: bool) -> UnsketchedMetrics {
    UnsketchedMetrics {
        residual_norm,
        normal_norm: normal_ratio * residual_norm,
        normal_ratio,
        image_ratio: 1.0,
        stale,
    }
}

fn rec(k: usize, sketched_ratio: Option<f64>, m: Option<UnsketchedMetrics>) -> IterateRecord {
    IterateRecord {
        k,
        sketched_residual_norm: 1.0,
        sketched_normal_residual_norm: sketched_ratio.unwrap_or(1.0),
        sketched_normal_ratio: sketched_ratio,
        unsketched: m,
        x_snapshot: None,
    }
}

fn residual_trace(values: &[f64]) -> Vec<IterateRecord> {
    values
        .iter()
        .enumerate()
        .map(|(i, &v)| rec(i + 1, None, Some(metrics(v, 0.5, false))))
        .collect()
}

fn online(trace: &[IterateRecord], policy: &StoppingPolicy) -> Option<(usize, Fired)> {
    let mut c = StopController::new(policy.clone());
    for r in trace {
        if let Some(f) = c.update(r).unwrap() {
            return Some((r.k, f));
        }
    }
    None
}

#[test]
fn traditional_examples() {
    assert!(traditional_decision(&rec(1, Some(0.0), None), 1e-12));
    assert!(traditional_decision(&rec(1, Some(1e-3), None), 0.1 * 0.2));
    assert!(!traditional_decision(&rec(1, Some(0.5), None), 1e-8));
    assert!(!traditional_decision(&rec(1, None, None), 1.0));
}

#[test]
fn epsilon_threshold_defers_on_stale() {
    assert_eq!(epsilon_threshold_decision(&rec(1, None, Some(metrics(1.0, 0.01, false))), 0.2), Some(true));
    assert_eq!(epsilon_threshold_decision(&rec(1, None, Some(metrics(1.0, 0.5, false))), 0.2), Some(false));
    assert_eq!(epsilon_threshold_decision(&rec(1, None, Some(metrics(1.0, 0.01, true))), 0.2), None);
    assert_eq!(epsilon_threshold_decision(&rec(1, None, None), 0.2), None);
}

#[test]
fn stabilization_examples() {
    assert!(stabilization_decision(&[2.0; 6], 5, DEFAULT_BAND).unwrap());
    let halving: Vec<f64> = (0..6).map(|i| 0.5f64.powi(i)).collect();
    assert!(!stabilization_decision(&halving, 5, DEFAULT_BAND).unwrap());
    assert!(!stabilization_decision(&[1.0; 5], 5, DEFAULT_BAND).unwrap());
    assert!(matches!(
        stabilization_decision(&[1.0, 0.0, 1.0, 1.0, 1.0, 1.0], 5, DEFAULT_BAND),
        Err(crate::Error::NonPositiveMetric(_))
    ));
}

#[test]
fn stabilization_uses_endpoints_only() {
    // interior excursion does not matter
    let h = [1.0, 10.0, 0.01, 5.0, 3.0, 1.0];
    assert!(stabilization_decision(&h, 5, DEFAULT_BAND).unwrap());
}

#[test]
fn band_edges() {
    let l = 5;
    let lo = 0.99f64.powi(l);
    assert!(stabilization_decision(&[1.0, 1.0, 1.0, 1.0, 1.0, lo], 5, DEFAULT_BAND).unwrap());
    assert!(!stabilization_decision(&[1.0, 1.0, 1.0, 1.0, 1.0, lo * 0.999], 5, DEFAULT_BAND).unwrap());
}

#[test]
fn band_validation() {
    assert!(Band::new(0.99, 1.01).is_ok());
    assert!(Band::new(1.0, 1.0).is_ok());
    assert!(Band::new(0.0, 1.0).is_err());
    assert!(Band::new(1.1, 1.2).is_err());
    assert!(Band::new(0.5, 0.9).is_err());
    assert!(StoppingPolicy::stabilize_residual().with_window(0).validate().is_err());
}

#[test]
fn recommended_modes() {
    assert_eq!(recommend_policy(SolverKind::Lsmr), StopMode::StabilizeNormalRatio);
    assert_eq!(recommend_policy(SolverKind::Lsqr), StopMode::StabilizeResidual);
}

#[test]
fn mode_names_roundtrip() {
    for m in [
        StopMode::Traditional,
        StopMode::EpsilonThreshold,
        StopMode::StabilizeNormalRatio,
        StopMode::StabilizeResidual,
        StopMode::Never,
    ] {
        assert_eq!(m.as_str().parse::<StopMode>().unwrap(), m);
    }
    assert!("stab".parse::<StopMode>().is_err());
}

#[test]
fn controller_reports_window_start() {
    let mut v: Vec<f64> = (0..10).map(|i| 0.5f64.powi(i)).collect();
    v.extend(std::iter::repeat_n(v[9], 8));
    let trace = residual_trace(&v);
    let (k, f) = online(&trace, &StoppingPolicy::stabilize_residual()).unwrap();
    // first flat window is iterations 10..=15
    assert_eq!(k, 15);
    assert_eq!(f.window_start, Some(10));
    assert_eq!(f.termination, Termination::StabilizedResidual);
}

#[test]
fn stale_records_are_skipped() {
    let mut trace = residual_trace(&[1.0; 12]);
    for (i, r) in trace.iter_mut().enumerate() {
        if i % 2 == 1 {
            r.unsketched.as_mut().unwrap().stale = true;
        }
    }
    let (k, f) = online(&trace, &StoppingPolicy::stabilize_residual()).unwrap();
    // fresh iterations 1,3,5,7,9,11
    assert_eq!(k, 11);
    assert_eq!(f.window_start, Some(1));
}

#[test]
fn persistence_waits_for_consecutive_windows() {
    let trace = residual_trace(&[1.0; 10]);
    let mut p = StoppingPolicy::stabilize_residual();
    p.persistence = 3;
    assert_eq!(online(&trace, &p).unwrap().0, 8);
    assert_eq!(scan_trace(&trace, &p).unwrap().unwrap().0, 8);
}

#[test]
fn stabilization_without_observer_is_an_error() {
    let mut c = StopController::new(StoppingPolicy::stabilize_normal_ratio());
    assert!(c.update(&rec(1, None, None)).is_err());
}

#[test]
fn iterate_reading_watches_image_ratio() {
    let mut p = StoppingPolicy::stabilize_normal_ratio();
    p.reading = NormalRatioReading::Iterate;
    let mut m = metrics(1.0, 0.3, false);
    m.image_ratio = 7.0;
    assert_eq!(p.stabilized_metric(&rec(1, None, Some(m))), Some(7.0));
    p.reading = NormalRatioReading::Residual;
    assert_eq!(p.stabilized_metric(&rec(1, None, Some(m))), Some(0.3));
}

fn arb_history() -> impl Strategy<Value = Vec<(f64, bool)>> {
    prop::collection::vec((0.5f64..1.5, prop::bool::weighted(0.2)), 1..60)
}

proptest! {
    #[test]
    fn online_matches_offline(
        steps in arb_history(),
        window in 1usize..7,
        lo in 0.9f64..1.0,
        hi in 1.0f64..1.1,
        persistence in 1usize..3,
        residual in any::<bool>(),
    ) {
        let mut v = 1.0;
        let trace: Vec<IterateRecord> = steps
            .iter()
            .enumerate()
            .map(|(i, &(f, stale))| {
                v *= f;
                rec(i + 1, None, Some(metrics(v, v / 3.0, stale && i > 0)))
            })
            .collect();
        let mut p = if residual {
            StoppingPolicy::stabilize_residual()
        } else {
            StoppingPolicy::stabilize_normal_ratio()
        };
        p.window = window;
        p.band = Band::new(lo, hi).unwrap();
        p.persistence = persistence;
        prop_assert_eq!(online(&trace, &p), scan_trace(&trace, &p).unwrap());
    }

    #[test]
    fn unit_band_never_fires_on_decreasing(values in prop::collection::vec(0.01f64..0.999, 1..50), window in 1usize..6) {
        let mut v = 1.0;
        let hist: Vec<f64> = values.iter().map(|f| { v *= f; v }).collect();
        let trace = residual_trace(&hist);
        let p = StoppingPolicy::stabilize_residual()
            .with_window(window)
            .with_band(Band::new(1.0, 1.0).unwrap());
        prop_assert!(online(&trace, &p).is_none());
    }

    #[test]
    fn constant_history_fires_at_first_full_window(c in 1e-6f64..1e6, window in 1usize..8, extra in 0usize..5) {
        let trace = residual_trace(&vec![c; window + 1 + extra]);
        let p = StoppingPolicy::stabilize_residual().with_window(window);
        let (k, f) = online(&trace, &p).unwrap();
        prop_assert_eq!(k, window + 1);
        prop_assert_eq!(f.window_start, Some(1));
    }
}
