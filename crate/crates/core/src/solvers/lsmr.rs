use crate::error::Result;
use crate::solvers::bidiag::{sym_ortho, GolubKahan};
use crate::solvers::{
    Driver, IterateObserver, LinearOperator, SolveOptions, SolveResult, SolverKind, Step, Termination,
};
use crate::stopping::StoppingPolicy;
use crate::vecops::axpy;

/// LSMR (Fong and Saunders) for `min ||Op x - rhs||`.
///
/// MINRES on the normal equation: `||Opᵀ r_k|| = |zetabar_k|` is
/// nonincreasing. `||r_k||` follows the Fong-Saunders estimate.
pub fn lsmr<O: LinearOperator + ?Sized>(
    op: &O,
    rhs: &[f64],
    observer: &mut dyn IterateObserver,
    stop: &StoppingPolicy,
    opts: &SolveOptions,
) -> Result<SolveResult> {
    let mut drv = Driver::new(SolverKind::Lsmr, op, rhs, observer, stop, opts)?;
    let n = op.ncols();
    let mut x = vec![0.0; n];
    let mut gk = GolubKahan::start(op, rhs, opts.reorthogonalize);
    if gk.beta == 0.0 || gk.alpha == 0.0 {
        return Ok(drv.finish(x, Termination::Breakdown, None));
    }

    let mut zetabar = gk.alpha * gk.beta;
    let mut alphabar = gk.alpha;
    let mut rho = 1.0;
    let mut rhobar = 1.0;
    let mut cbar = 1.0;
    let mut sbar = 0.0;
    let mut h = gk.v.clone();
    let mut hbar = vec![0.0; n];

    // ||r_k|| estimate
    let mut betadd = gk.beta;
    let mut betad = 0.0;
    let mut rhodold = 1.0;
    let mut tautildeold = 0.0;
    let mut thetatilde = 0.0;
    let mut zeta = 0.0;

    let mut k = 0;
    loop {
        k += 1;
        gk.step(op);

        let rhoold = rho;
        let (c, s, r) = sym_ortho(alphabar, gk.beta);
        rho = r;
        let thetanew = s * gk.alpha;
        alphabar = c * gk.alpha;

        let rhobarold = rhobar;
        let zetaold = zeta;
        let thetabar = sbar * rho;
        let (cb, sb, rb) = sym_ortho(cbar * rho, thetanew);
        cbar = cb;
        sbar = sb;
        rhobar = rb;
        zeta = cbar * zetabar;
        zetabar *= -sbar;

        let f = thetabar * rho / (rhoold * rhobarold);
        for (hb, hi) in hbar.iter_mut().zip(&h) {
            *hb = hi - f * *hb;
        }
        axpy(zeta / (rho * rhobar), &hbar, &mut x);
        let g = thetanew / rho;
        for (hi, vi) in h.iter_mut().zip(&gk.v) {
            *hi = vi - g * *hi;
        }

        let betahat = c * betadd;
        betadd *= -s;
        let thetatildeold = thetatilde;
        let (ctildeold, stildeold, rhotildeold) = sym_ortho(rhodold, thetabar);
        thetatilde = stildeold * rhobar;
        rhodold = ctildeold * rhobar;
        betad = -stildeold * betad + ctildeold * betahat;
        tautildeold = (zetaold - thetatildeold * tautildeold) / rhotildeold;
        let taud = (zeta - thetatilde * tautildeold) / rhodold;
        let rnorm = ((betad - taud).powi(2) + betadd * betadd).sqrt();
        let arnorm = zetabar.abs();

        let exhausted = gk.beta == 0.0 || gk.alpha == 0.0;
        if let Step::Stop(t, win) = drv.record(k, &x, rnorm, arnorm, exhausted)? {
            return Ok(drv.finish(x, t, win));
        }
    }
}
