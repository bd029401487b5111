use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use super::*;
use crate::embed::{build_sketch, exact_distortion, SketchKind};
use crate::matio::{solve_dense_ls, solve_ls_oracle, synth, synthesize_problem, MatrixHandle};
use crate::stopping::StoppingPolicy;
use crate::vecops::{dist, norm2};

/// Keeps every iterate.
#[derive(Default)]
struct Recorder {
    xs: Vec<Vec<f64>>,
}

impl IterateObserver for Recorder {
    fn observe(&mut self, k: usize, x: &[f64]) -> Option<UnsketchedMetrics> {
        assert_eq!(k, self.xs.len() + 1);
        self.xs.push(x.to_vec());
        None
    }
}

fn run(kind: SolverKind, op: &DMatrix<f64>, rhs: &[f64], max_iter: usize) -> (SolveResult, Vec<Vec<f64>>) {
    let mut rec = Recorder::default();
    let res = solve(
        kind,
        op,
        rhs,
        &mut rec,
        &StoppingPolicy::never().with_max_iter(max_iter),
        &SolveOptions::default(),
    )
    .unwrap();
    (res, rec.xs)
}

fn rhs_for(m: usize, seed: u64) -> Vec<f64> {
    crate::rng::standard_normal_vec(&mut crate::rng::stream(seed, crate::rng::Purpose::Probe), m)
}

#[test]
fn identity_operator_converges_in_one_step() {
    let op = DMatrix::<f64>::identity(4, 4);
    let rhs = [1.0, 0.0, 0.0, 0.0];
    for kind in SolverKind::ALL {
        let (res, _) = run(kind, &op, &rhs, 10);
        assert_eq!(res.iterations, 1, "{kind}");
        assert_eq!(res.termination, Termination::Breakdown);
        assert!(dist(&res.x, &rhs) < 1e-15);
    }
}

#[test]
fn zero_rhs_returns_zero_without_iterating() {
    let op = synth::gaussian_matrix(8, 3, 1);
    for kind in SolverKind::ALL {
        let (res, xs) = run(kind, &op, &[0.0; 8], 10);
        assert_eq!(res.iterations, 0);
        assert!(xs.is_empty());
        assert_eq!(res.x, vec![0.0; 3]);
    }
}

#[test]
fn six_by_two_terminates_after_two_steps() {
    let op = synth::conditioned_matrix(6, 2, 3.0, 4);
    let rhs = rhs_for(6, 4);
    let want = solve_dense_ls(&op, &rhs).unwrap();
    let (qr, _) = run(SolverKind::Lsqr, &op, &rhs, 2);
    let (mr, _) = run(SolverKind::Lsmr, &op, &rhs, 2);
    assert!(dist(&qr.x, &want) <= 1e-10 * norm2(&want));
    assert!(dist(&mr.x, &want) <= 1e-10 * norm2(&want));
    assert!(dist(&qr.x, &mr.x) <= 1e-9 * norm2(&want));
}

#[test]
fn observer_called_once_per_iteration() {
    let op = synth::gaussian_matrix(40, 8, 2);
    let rhs = rhs_for(40, 2);
    for kind in SolverKind::ALL {
        let (res, xs) = run(kind, &op, &rhs, 5);
        assert_eq!(res.iterations, 5);
        assert_eq!(res.trace.len(), 5);
        assert_eq!(xs.len(), 5);
        assert_eq!(res.termination, Termination::MaxIterations);
        assert_eq!(xs.last().unwrap(), &res.x);
        assert!(res.trace.iter().enumerate().all(|(i, r)| r.k == i + 1));
    }
}

#[test]
fn default_max_iter_is_min_of_twice_cols_and_rows() {
    assert_eq!(default_max_iter(30, 10), 20);
    assert_eq!(default_max_iter(15, 10), 15);
    let op = synth::conditioned_matrix(30, 10, 1e6, 5);
    let rhs = rhs_for(30, 5);
    let res = lsqr(&op, &rhs, &mut SketchedOnly, &StoppingPolicy::never(), &SolveOptions::default()).unwrap();
    assert!(res.iterations <= 20);
}

#[test]
fn traditional_rule_estimates_norm_when_missing() {
    let op = synth::conditioned_matrix(60, 6, 10.0, 6);
    let rhs = rhs_for(60, 6);
    let res = lsmr(
        &op,
        &rhs,
        &mut SketchedOnly,
        &StoppingPolicy::traditional(1e-6).with_max_iter(50),
        &SolveOptions::default(),
    )
    .unwrap();
    let svd_norm = op.singular_values().max();
    assert!((res.op_norm.unwrap() - svd_norm).abs() <= 1e-8 * svd_norm);
    assert_eq!(res.termination, Termination::ToleranceMet);
    assert!(res.last().unwrap().sketched_normal_ratio.unwrap() <= 1e-6);
}

#[test]
fn dimension_mismatch_rejected() {
    let op = synth::gaussian_matrix(10, 3, 1);
    let err = lsqr(&op, &[1.0; 9], &mut SketchedOnly, &StoppingPolicy::never(), &SolveOptions::default());
    assert!(matches!(err, Err(crate::Error::Dimension { .. })));
}

fn recurrence_floor(op: &DMatrix<f64>, x: &[f64], rhs: &[f64]) -> f64 {
    let na = op.singular_values().max();
    f64::EPSILON * 10.0 * na * (na * norm2(x) + norm2(rhs))
}

#[test]
fn recurrences_match_explicit_norms() {
    for seed in 0..5 {
        let op = synth::conditioned_matrix(80, 10, 1e3, seed);
        let mut rhs = op.clone() * DVector::from_column_slice(&rhs_for(10, seed + 100));
        rhs += DVector::from_column_slice(&rhs_for(80, seed)) * 1e-2;
        let rhs = rhs.as_slice().to_vec();
        for kind in SolverKind::ALL {
            let (res, xs) = run(kind, &op, &rhs, 20);
            for (rec, x) in res.trace.iter().zip(&xs) {
                let r = op.clone() * DVector::from_column_slice(x) - DVector::from_column_slice(&rhs);
                let atr = op.transpose() * &r;
                let floor = recurrence_floor(&op, x, &rhs);
                let (rn, an) = (r.norm(), atr.norm());
                match kind {
                    SolverKind::Lsqr => {
                        assert!((rec.sketched_residual_norm - rn).abs() <= 1e-8 * rn + floor);
                        assert!((rec.sketched_normal_residual_norm - an).abs() <= 1e-8 * an + floor * 10.0);
                    }
                    SolverKind::Lsmr => {
                        assert!((rec.sketched_normal_residual_norm - an).abs() <= 1e-8 * an + floor * 10.0);
                        assert!((rec.sketched_residual_norm - rn).abs() <= 1e-8 * rn + floor);
                    }
                }
            }
        }
    }
}

#[test]
fn reorthogonalization_matches_plain_run_on_easy_problem() {
    let op = synth::conditioned_matrix(50, 6, 5.0, 8);
    let rhs = rhs_for(50, 8);
    for kind in SolverKind::ALL {
        let pol = StoppingPolicy::never().with_max_iter(6);
        let plain = solve(kind, &op, &rhs, &mut SketchedOnly, &pol, &SolveOptions::default()).unwrap();
        let opts = SolveOptions {
            reorthogonalize: true,
            ..Default::default()
        };
        let ro = solve(kind, &op, &rhs, &mut SketchedOnly, &pol, &opts).unwrap();
        assert!(dist(&plain.x, &ro.x) <= 1e-10 * norm2(&ro.x));
    }
}

#[test]
fn sandwich_at_convergence_on_sketched_problem() {
    let a = std::sync::Arc::new(MatrixHandle::dense(synth::gaussian_matrix(600, 6, 3)));
    let p = synthesize_problem(a.clone(), 3, 1e-3).unwrap();
    let o = solve_ls_oracle(&a, &p.b).unwrap();
    let na = a.spectral_norms().unwrap().norm;
    for kind in SketchKind::RANDOM {
        let s = build_sketch(kind, 160, 600, 3).unwrap();
        let dr = exact_distortion(&s, &a, &p.b).unwrap();
        assert!(dr.epsilon_exact < 1.0);
        let sp = s.sketch_problem(&a, &p.b).unwrap();
        for solver in SolverKind::ALL {
            let mut obs = Unsketched::new(&a, &p.b, na, 1);
            let res = solve(
                solver,
                &sp.sa,
                &sp.sb,
                &mut obs,
                &StoppingPolicy::never().with_max_iter(11),
                &SolveOptions::default(),
            )
            .unwrap();
            let rn = res.last().unwrap().unsketched_residual_norm().unwrap();
            assert!(rn >= o.r_ls_norm * (1.0 - 1e-10));
            assert!(rn <= dr.sandwich_factor() * o.r_ls_norm * (1.0 + 1e-6), "{kind} {solver}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monotone_recurrences(seed in 0u64..10_000, m in 12usize..60, n in 2usize..10, logc in 0.0f64..6.0) {
        let op = synth::conditioned_matrix(m, n, 10f64.powf(logc), seed);
        let rhs = rhs_for(m, seed);
        let (qr, _) = run(SolverKind::Lsqr, &op, &rhs, 3 * n);
        for w in qr.trace.windows(2) {
            prop_assert!(w[1].sketched_residual_norm <= w[0].sketched_residual_norm * (1.0 + 1e-12));
        }
        let (mr, _) = run(SolverKind::Lsmr, &op, &rhs, 3 * n);
        for w in mr.trace.windows(2) {
            prop_assert!(w[1].sketched_normal_residual_norm <= w[0].sketched_normal_residual_norm * (1.0 + 1e-12));
        }
    }

    #[test]
    fn krylov_finite_termination(seed in 0u64..10_000, m in 8usize..50, n in 1usize..7) {
        let op = synth::conditioned_matrix(m, n, 10.0, seed);
        let rhs = rhs_for(m, seed);
        let na = op.singular_values().max();
        let want = solve_dense_ls(&op, &rhs).unwrap();
        for kind in SolverKind::ALL {
            let (res, _) = run(kind, &op, &rhs, n + 5);
            let hit = res.trace.iter().position(|r| {
                r.sketched_normal_residual_norm <= 1e-10 * na * norm2(&rhs)
            });
            prop_assert!(hit.is_some(), "{kind} never reached the floor");
            prop_assert!(dist(&res.x, &want) <= 1e-8 * norm2(&want));
        }
    }

    #[test]
    fn observed_stride_counts_evaluations(stride in 1usize..5, iters in 1usize..12) {
        let a = MatrixHandle::dense(synth::gaussian_matrix(40, 12, 9));
        let b = rhs_for(40, 9);
        let mut obs = Unsketched::new(&a, &b, 1.0, stride);
        let res = lsqr(&a.to_dense(), &b, &mut obs, &StoppingPolicy::never().with_max_iter(iters), &SolveOptions::default()).unwrap();
        prop_assert_eq!(res.iterations, iters);
        prop_assert_eq!(obs.evaluations(), (iters - 1) / stride + 1);
        let fresh = res.trace.iter().filter(|r| !r.is_stale()).count();
        prop_assert_eq!(fresh, obs.evaluations());
    }
}
