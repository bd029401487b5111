use crate::matio::MatrixHandle;
use crate::vecops::norm2;

/// Metrics of an iterate measured on the original, unsketched problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnsketchedMetrics {
    /// `||A x_k - b||`
    pub residual_norm: f64,
    /// `||Aᵀ(A x_k - b)||`
    pub normal_norm: f64,
    /// `||Aᵀ r_k|| / (||A|| ||r_k||)`
    pub normal_ratio: f64,
    /// `||A x_k|| / ||x_k||`, zero for `x_k = 0`.
    pub image_ratio: f64,
    /// Carried forward from an earlier iteration rather than evaluated.
    pub stale: bool,
}

/// `r = A x - b` and `Aᵀ r` by two explicit products.
pub fn observe_metrics(a: &MatrixHandle, b: &[f64], x: &[f64], norm_a: f64) -> UnsketchedMetrics {
    let mut r = a.mul_vec(x);
    let ax_norm = norm2(&r);
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri -= bi;
    }
    let residual_norm = norm2(&r);
    let normal_norm = norm2(&a.tr_mul_vec(&r));
    let normal_ratio = if residual_norm == 0.0 {
        0.0
    } else {
        normal_norm / (norm_a * residual_norm)
    };
    let xn = norm2(x);
    UnsketchedMetrics {
        residual_norm,
        normal_norm,
        normal_ratio,
        image_ratio: if xn == 0.0 { 0.0 } else { ax_norm / xn },
        stale: false,
    }
}

/// Called by the solvers once per iteration with the current iterate.
pub trait IterateObserver {
    /// `k` counts from 1.
    fn observe(&mut self, k: usize, x: &[f64]) -> Option<UnsketchedMetrics>;

    fn wants_snapshots(&self) -> bool {
        false
    }
}

/// Observes nothing beyond the solver's own recurrences.
#[derive(Debug, Default, Clone, Copy)]
pub struct SketchedOnly;

impl IterateObserver for SketchedOnly {
    fn observe(&mut self, _k: usize, _x: &[f64]) -> Option<UnsketchedMetrics> {
        None
    }
}

/// Evaluates [`observe_metrics`] on iterations `1, 1 + stride, 1 + 2 stride, ...`
/// and repeats the last values, flagged stale, in between.
#[derive(Debug)]
pub struct Unsketched<'a> {
    a: &'a MatrixHandle,
    b: &'a [f64],
    norm_a: f64,
    stride: usize,
    last: Option<UnsketchedMetrics>,
    evaluations: usize,
    snapshots: bool,
}

impl<'a> Unsketched<'a> {
    /// `stride` below 1 is treated as 1.
    pub fn new(a: &'a MatrixHandle, b: &'a [f64], norm_a: f64, stride: usize) -> Self {
        Unsketched {
            a,
            b,
            norm_a,
            stride: stride.max(1),
            last: None,
            evaluations: 0,
            snapshots: false,
        }
    }

    /// Keep a copy of every iterate in the trace.
    pub fn with_snapshots(mut self) -> Self {
        self.snapshots = true;
        self
    }

    /// Number of explicit evaluations so far; each costs two products with `A`.
    pub fn evaluations(&self) -> usize {
        self.evaluations
    }
}

impl IterateObserver for Unsketched<'_> {
    fn observe(&mut self, k: usize, x: &[f64]) -> Option<UnsketchedMetrics> {
        if k.saturating_sub(1).is_multiple_of(self.stride) || self.last.is_none() {
            let m = observe_metrics(self.a, self.b, x, self.norm_a);
            self.evaluations += 1;
            self.last = Some(m);
            Some(m)
        } else {
            self.last.map(|m| UnsketchedMetrics { stale: true, ..m })
        }
    }

    fn wants_snapshots(&self) -> bool {
        self.snapshots
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::{solve_ls_oracle, synth};

    #[test]
    fn zero_iterate_sees_rhs() {
        let a = MatrixHandle::dense(synth::gaussian_matrix(12, 3, 1));
        let b: Vec<f64> = (0..12).map(|i| i as f64).collect();
        let m = observe_metrics(&a, &b, &[0.0; 3], 1.0);
        assert_eq!(m.residual_norm, norm2(&b));
        assert_eq!(m.image_ratio, 0.0);
    }

    #[test]
    fn oracle_iterate_is_orthogonal() {
        let a = MatrixHandle::dense(synth::gaussian_matrix(40, 4, 2));
        let b: Vec<f64> = (0..40).map(|i| (i as f64).cos()).collect();
        let o = solve_ls_oracle(&a, &b).unwrap();
        let na = a.spectral_norms().unwrap().norm;
        let m = observe_metrics(&a, &b, &o.x_ls, na);
        assert!(m.normal_ratio <= 1e-10);
    }

    #[test]
    fn stride_marks_carried_values_stale() {
        let a = MatrixHandle::identity(3);
        let b = [1.0, 2.0, 3.0];
        let mut obs = Unsketched::new(&a, &b, 1.0, 3);
        let flags: Vec<bool> = (1..=7)
            .map(|k| obs.observe(k, &[k as f64, 0.0, 0.0]).unwrap().stale)
            .collect();
        assert_eq!(flags, [false, true, true, false, true, true, false]);
        assert_eq!(obs.evaluations(), 3);
        let m = obs.observe(8, &[9.0, 9.0, 9.0]).unwrap();
        // value of the k = 7 evaluation
        assert_eq!(m.residual_norm, norm2(&[6.0, -2.0, -3.0]));
    }
}
