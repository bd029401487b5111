use crate::error::Result;
use crate::solvers::bidiag::{sym_ortho, GolubKahan};
use crate::solvers::{
    Driver, IterateObserver, LinearOperator, SolveOptions, SolveResult, SolverKind, Step, Termination,
};
use crate::stopping::StoppingPolicy;
use crate::vecops::axpy;

/// LSQR (Paige and Saunders) for `min ||Op x - rhs||`.
///
/// The recurrence gives `||r_k|| = phibar_k` and
/// `||Opᵀ r_k|| = phibar_k alpha_{k+1} |c_k|`; the first is nonincreasing.
pub fn lsqr<O: LinearOperator + ?Sized>(
    op: &O,
    rhs: &[f64],
    observer: &mut dyn IterateObserver,
    stop: &StoppingPolicy,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let mut drv = Driver::new(SolverKind::Lsqr, op, rhs, observer, stop, opts)?;
    let n = op.ncols();
    let mut x = vec![0.0; n];
    let mut gk = GolubKahan::start(op, rhs, opts.reorthogonalize);
    if gk.beta == 0.0 || gk.alpha == 0.0 {
        return Ok(drv.finish(x, Termination::Breakdown, None));
    }
    let mut w = gk.v.clone();
    let mut phibar = gk.beta;
    let mut rhobar = gk.alpha;
    let mut k = 0;
    loop {
        k += 1;
        gk.step(op);
        let (c, s, rho) = sym_ortho(rhobar, gk.beta);
        let theta = s * gk.alpha;
        rhobar = -c * gk.alpha;
        let phi = c * phibar;
        phibar *= s;

        axpy(phi / rho, &w, &mut x);
        let t2 = -theta / rho;
        for (wi, vi) in w.iter_mut().zip(&gk.v) {
            *wi = vi + t2 * *wi;
        }

        let rnorm = phibar.abs();
        let arnorm = phibar.abs() * gk.alpha * c.abs();
        let exhausted = gk.beta == 0.0 || gk.alpha == 0.0;
        if let Step::Stop(t, win) = drv.record(k, &x, rnorm, arnorm, exhausted)? {
            return Ok(drv.finish(x, t, win));
        }
    }
}
