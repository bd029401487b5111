use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::embed::fwht::{fwht, hadamard_entry};
use crate::error::{Error, Result};
use crate::matio::{MatrixHandle, Storage};
use crate::rng::{self, Purpose};

/// Largest `d * m` accepted by [`SketchOperator::materialize`].
pub const MATERIALIZE_GUARD: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SketchKind {
    Gaussian,
    Srht,
    Sparse,
    /// `S = I` with `d = m`; zero distortion. Used as a test double.
    Identity,
}

impl SketchKind {
    pub const RANDOM: [SketchKind; 3] = [SketchKind::Gaussian, SketchKind::Srht, SketchKind::Sparse];

    pub fn as_str(self) -> &'static str {
        match self {
            SketchKind::Gaussian => "gaussian",
            SketchKind::Srht => "srht",
            SketchKind::Sparse => "sparse",
            SketchKind::Identity => "identity",
        }
    }
}

impl fmt::Display for SketchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SketchKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "gaussian" => Ok(SketchKind::Gaussian),
            "srht" => Ok(SketchKind::Srht),
            "sparse" | "countsketch" => Ok(SketchKind::Sparse),
            "identity" | "identity-double" => Ok(SketchKind::Identity),
            other => Err(Error::invalid(format!("unknown embedding kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Dense `d x m` matrix with `N(0, 1/d)` entries.
    Gaussian(DMatrix<f64>),
    /// `S = sqrt(1/d) P H D` over the zero-padded length `padded_len`.
    Srht {
        padded_len: usize,
        /// Rademacher diagonal of `D`, length `padded_len`.
        signs: Vec<f64>,
        /// Distinct rows of `H D x` kept by `P`, sorted.
        rows: Vec<usize>,
    },
    /// One `±1` per column: column `j` maps to row `rows[j]` with `signs[j]`.
    Sparse { rows: Vec<usize>, signs: Vec<f64> },
    Identity,
}

/// A `d x m` random embedding. Immutable once built; the payload is a pure
/// function of `(kind, d, m, seed)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchOperator {
    kind: SketchKind,
    d: usize,
    m: usize,
    seed: u64,
    payload: Payload,
}

fn rademacher(g: &mut impl Rng, len: usize) -> Vec<f64> {
    (0..len)
        .map(|_| if g.random::<bool>() { 1.0 } else { -1.0 })
        .collect()
}

/// Builds an embedding of kind `kind` from `R^m` to `R^d`.
pub fn build_sketch(kind: SketchKind, d: usize, m: usize, seed: u64) -> Result<SketchOperator> {
    if kind == SketchKind::Identity {
        if d != m || m == 0 {
            return Err(Error::invalid(format!("identity sketch needs d == m >= 1, got d={d}, m={m}")));
        }
        return Ok(SketchOperator::identity(m));
    }
    if d < 1 {
        return Err(Error::invalid("sketch needs at least one row"));
    }
    if d >= m {
        return Err(Error::invalid(format!("sketch needs d < m, got d={d}, m={m}")));
    }
    let payload = match kind {
        SketchKind::Gaussian => {
            let mut g = rng::stream(seed, Purpose::GaussianEntries);
            let sd = (1.0 / d as f64).sqrt();
            // column-major fill: column j is S e_j
            let data: Vec<f64> = (0..d * m)
                .map(|_| sd * g.sample::<f64, _>(StandardNormal))
                .collect();
            Payload::Gaussian(DMatrix::from_vec(d, m, data))
        }
        SketchKind::Srht => {
            let padded_len = m.next_power_of_two();
            let signs = rademacher(&mut rng::stream(seed, Purpose::SrhtSigns), padded_len);
            let mut rows =
                rand::seq::index::sample(&mut rng::stream(seed, Purpose::SrhtRows), padded_len, d)
                    .into_vec();
            rows.sort_unstable();
            Payload::Srht {
                padded_len,
                signs,
                rows,
            }
        }
        SketchKind::Sparse => {
            let mut g = rng::stream(seed, Purpose::SparseRows);
            let rows = (0..m).map(|_| g.random_range(0..d)).collect();
            let signs = rademacher(&mut rng::stream(seed, Purpose::SparseSigns), m);
            Payload::Sparse { rows, signs }
        }
        SketchKind::Identity => unreachable!(),
    };
    Ok(SketchOperator {
        kind,
        d,
        m,
        seed,
        payload,
    })
}

impl SketchOperator {
    pub fn identity(m: usize) -> Self {
        SketchOperator {
            kind: SketchKind::Identity,
            d: m,
            m,
            seed: 0,
            payload: Payload::Identity,
        }
    }

    pub fn kind(&self) -> SketchKind {
        self.kind
    }

    /// Target dimension.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Source dimension.
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn payload(&self) -> &Payload {
        &self.payload
    }

    fn check_len(&self, got: usize, expected: usize) -> Result<()> {
        if got != expected {
            Err(Error::Dimension { expected, got })
        } else {
            Ok(())
        }
    }

    /// `S x` for `x` of length `m`.
    pub fn apply_vec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len(), self.m)?;
        Ok(match &self.payload {
            Payload::Gaussian(s) => {
                let mut y = vec![0.0; self.d];
                for (j, &xj) in x.iter().enumerate() {
                    if xj != 0.0 {
                        crate::vecops::axpy(xj, s.column(j).as_slice(), &mut y);
                    }
                }
                y
            }
            Payload::Srht {
                padded_len,
                signs,
                rows,
            } => {
                let mut w = vec![0.0; *padded_len];
                for (j, &xj) in x.iter().enumerate() {
                    w[j] = signs[j] * xj;
                }
                fwht(&mut w)?;
                let sc = (1.0 / self.d as f64).sqrt();
                rows.iter().map(|&r| sc * w[r]).collect()
            }
            Payload::Sparse { rows, signs } => {
                let mut y = vec![0.0; self.d];
                for j in 0..self.m {
                    y[rows[j]] += signs[j] * x[j];
                }
                y
            }
            Payload::Identity => x.to_vec(),
        })
    }

    /// `Sᵀ z` for `z` of length `d`.
    pub fn apply_adjoint_vec(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check_len(z.len(), self.d)?;
        Ok(match &self.payload {
            Payload::Gaussian(s) => (0..self.m)
                .map(|j| crate::vecops::dot(s.column(j).as_slice(), z))
                .collect(),
            Payload::Srht {
                padded_len,
                signs,
                rows,
            } => {
                let sc = (1.0 / self.d as f64).sqrt();
                let mut w = vec![0.0; *padded_len];
                for (&r, &zi) in rows.iter().zip(z) {
                    w[r] = sc * zi;
                }
                // H is symmetric
                fwht(&mut w)?;
                (0..self.m).map(|j| signs[j] * w[j]).collect()
            }
            Payload::Sparse { rows, signs } => (0..self.m).map(|j| signs[j] * z[rows[j]]).collect(),
            Payload::Identity => z.to_vec(),
        })
    }

    /// `S X` for a dense `X` with `m` rows.
    pub fn apply_dense(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check_len(x.nrows(), self.m)?;
        let k = x.ncols();
        Ok(match &self.payload {
            Payload::Gaussian(s) => s * x,
            Payload::Srht { .. } => {
                let mut out = DMatrix::zeros(self.d, k);
                for j in 0..k {
                    let y = self.apply_vec(x.column(j).as_slice())?;
                    out.column_mut(j).copy_from_slice(&y);
                }
                out
            }
            Payload::Sparse { rows, signs } => {
                let mut out = DMatrix::zeros(self.d, k);
                for j in 0..k {
                    let col = x.column(j);
                    let mut o = out.column_mut(j);
                    for i in 0..self.m {
                        o[rows[i]] += signs[i] * col[i];
                    }
                }
                out
            }
            Payload::Identity => x.clone(),
        })
    }

    /// `S A` as a dense `d x n` matrix; CSR input is never densified for the
    /// Gaussian and sparse kinds.
    pub fn apply_matrix(&self, a: &MatrixHandle) -> Result<DMatrix<f64>> {
        self.check_len(a.nrows(), self.m)?;
        match (a.storage(), &self.payload) {
            (Storage::Dense(x), _) => self.apply_dense(x),
            (Storage::Sparse(csr), Payload::Gaussian(s)) => {
                let mut out = DMatrix::zeros(self.d, csr.ncols());
                for (i, j, v) in csr.triplets() {
                    let src = s.column(i);
                    let mut dst = out.column_mut(j);
                    dst.axpy(v, &src, 1.0);
                }
                Ok(out)
            }
            (Storage::Sparse(csr), Payload::Sparse { rows, signs }) => {
                let mut out = DMatrix::zeros(self.d, csr.ncols());
                for (i, j, v) in csr.triplets() {
                    out[(rows[i], j)] += signs[i] * v;
                }
                Ok(out)
            }
            (Storage::Sparse(csr), _) => self.apply_dense(&csr.to_dense()),
        }
    }

    /// Explicit `d x m` matrix of the operator, evaluated from its defining
    /// formula rather than through [`apply_vec`](Self::apply_vec).
    pub fn materialize(&self) -> Result<DMatrix<f64>> {
        let size = self.d.saturating_mul(self.m);
        if size > MATERIALIZE_GUARD {
            return Err(Error::SizeGuard {
                what: "d*m",
                size,
                limit: MATERIALIZE_GUARD,
            });
        }
        Ok(match &self.payload {
            Payload::Gaussian(s) => s.clone(),
            Payload::Srht { signs, rows, .. } => {
                let sc = (1.0 / self.d as f64).sqrt();
                DMatrix::from_fn(self.d, self.m, |i, j| sc * hadamard_entry(rows[i], j) * signs[j])
            }
            Payload::Sparse { rows, signs } => {
                let mut s = DMatrix::zeros(self.d, self.m);
                for j in 0..self.m {
                    s[(rows[j], j)] = signs[j];
                }
                s
            }
            Payload::Identity => DMatrix::identity(self.m, self.m),
        })
    }

    /// Sketches the pair `(A, b)`.
    pub fn sketch_problem(&self, a: &MatrixHandle, b: &[f64]) -> Result<SketchedProblem> {
        Ok(SketchedProblem {
            sa: self.apply_matrix(a)?,
            sb: self.apply_vec(b)?,
        })
    }

    /// `kind`, `d`, `m`, `seed` as `key=value` lines; the payload is
    /// regenerated on load.
    pub fn to_kv(&self) -> String {
        format!(
            "kind={}\nd={}\nm={}\nseed={}\n",
            self.kind, self.d, self.m, self.seed
        )
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        let (mut kind, mut d, mut m, mut seed) = (None, None, None, None);
        for line in text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')) {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected key=value, got `{line}`")))?;
            let v = v.trim();
            let num = |v: &str| {
                v.parse::<u64>()
                    .map_err(|e| Error::invalid(format!("bad number `{v}`: {e}")))
            };
            match k.trim() {
                "kind" => kind = Some(v.parse::<SketchKind>()?),
                "d" => d = Some(num(v)? as usize),
                "m" => m = Some(num(v)? as usize),
                "seed" => seed = Some(num(v)?),
                other => return Err(Error::invalid(format!("unknown key `{other}`"))),
            }
        }
        match (kind, d, m, seed) {
            (Some(k), Some(d), Some(m), Some(s)) => build_sketch(k, d, m, s),
            _ => Err(Error::invalid("sketch block needs kind, d, m and seed")),
        }
    }
}

/// The sketched least-squares pair `(SA, Sb)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SketchedProblem {
    pub sa: DMatrix<f64>,
    pub sb: Vec<f64>,
}

impl SketchedProblem {
    /// Exact minimizer of `||SA x - Sb||` by dense pivoted QR.
    pub fn solve_dense(&self) -> Result<Vec<f64>> {
        crate::matio::solve_dense_ls(&self.sa, &self.sb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matio::{synth, CsrMatrix};

    fn basis(m: usize, j: usize) -> Vec<f64> {
        let mut e = vec![0.0; m];
        e[j] = 1.0;
        e
    }

    #[test]
    fn sparse_has_one_signed_unit_per_column() {
        let s = build_sketch(SketchKind::Sparse, 4, 10, 7).unwrap();
        let dense = s.materialize().unwrap();
        for j in 0..10 {
            let col = dense.column(j);
            assert_eq!(col.iter().filter(|v| **v != 0.0).count(), 1);
            assert_eq!(col.iter().map(|v| v.abs()).sum::<f64>(), 1.0);
        }
        assert_eq!(dense.iter().filter(|v| **v != 0.0).count(), 10);
    }

    #[test]
    fn srht_pads_and_samples_distinct_rows() {
        let s = build_sketch(SketchKind::Srht, 4, 6, 3).unwrap();
        let Payload::Srht { padded_len, rows, signs } = s.payload() else {
            panic!()
        };
        assert_eq!(*padded_len, 8);
        assert_eq!(signs.len(), 8);
        assert_eq!(rows.len(), 4);
        assert!(rows.windows(2).all(|w| w[0] < w[1]));
        assert!(rows.iter().all(|&r| r < 8));
    }

    #[test]
    fn build_is_deterministic() {
        for kind in SketchKind::RANDOM {
            let a = build_sketch(kind, 5, 13, 42).unwrap();
            let b = build_sketch(kind, 5, 13, 42).unwrap();
            assert_eq!(a, b);
            let c = build_sketch(kind, 5, 13, 43).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn rejects_bad_row_counts() {
        for kind in SketchKind::RANDOM {
            assert!(build_sketch(kind, 10, 10, 1).is_err());
            assert!(build_sketch(kind, 0, 10, 1).is_err());
        }
        assert!(build_sketch(SketchKind::Identity, 4, 5, 1).is_err());
    }

    #[test]
    fn srht_on_first_basis_vector_hand_computed() {
        // m = m' = 4: S e_1 = sqrt(1/d) * D_11 * (H e_1)[rows] = sqrt(1/d) * D_11 * 1
        let s = build_sketch(SketchKind::Srht, 2, 4, 5).unwrap();
        let Payload::Srht { signs, .. } = s.payload() else { panic!() };
        let y = s.apply_vec(&basis(4, 0)).unwrap();
        let want = (0.5f64).sqrt() * signs[0];
        assert_eq!(y, vec![want, want]);
        // e_2: column 1 of H is (1,-1,1,-1)
        let Payload::Srht { rows, .. } = s.payload() else { panic!() };
        let y = s.apply_vec(&basis(4, 1)).unwrap();
        for (k, &r) in rows.iter().enumerate() {
            let h = if r % 2 == 0 { 1.0 } else { -1.0 };
            assert_eq!(y[k], (0.5f64).sqrt() * signs[1] * h);
        }
    }

    #[test]
    fn sparse_on_ones_is_signed_bucket_count() {
        let s = build_sketch(SketchKind::Sparse, 4, 10, 8).unwrap();
        let Payload::Sparse { rows, signs } = s.payload() else { panic!() };
        let y = s.apply_vec(&[1.0; 10]).unwrap();
        let mut want = [0.0; 4];
        for j in 0..10 {
            want[rows[j]] += signs[j];
        }
        assert_eq!(y, want.to_vec());
        let dense = s.materialize().unwrap();
        let yd = &dense * nalgebra::DVector::from_element(10, 1.0);
        assert_eq!(yd.as_slice(), y.as_slice());
    }

    #[test]
    fn apply_matches_materialize_on_basis_vectors() {
        for kind in SketchKind::RANDOM {
            for (d, m) in [(4, 6), (5, 16), (7, 23)] {
                let s = build_sketch(kind, d, m, 17).unwrap();
                let dense = s.materialize().unwrap();
                for j in 0..m {
                    let y = s.apply_vec(&basis(m, j)).unwrap();
                    for i in 0..d {
                        let want = dense[(i, j)];
                        assert!((y[i] - want).abs() <= 1e-13 * want.abs().max(1.0), "{kind} {d}x{m}");
                    }
                }
            }
        }
    }

    #[test]
    fn adjoint_matches_transpose() {
        for kind in SketchKind::RANDOM {
            let s = build_sketch(kind, 6, 21, 4).unwrap();
            let dense = s.materialize().unwrap();
            let z: Vec<f64> = (0..6).map(|i| (i as f64 * 0.7).cos()).collect();
            let got = s.apply_adjoint_vec(&z).unwrap();
            let want = dense.transpose() * nalgebra::DVector::from_column_slice(&z);
            for (g, w) in got.iter().zip(want.iter()) {
                assert!((g - w).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn sparse_and_dense_inputs_agree() {
        let csr = synth::sparse_random(40, 5, 3, 2);
        let a_sparse = MatrixHandle::sparse(csr.clone());
        let a_dense = MatrixHandle::dense(CsrMatrix::to_dense(&csr));
        for kind in SketchKind::RANDOM {
            let s = build_sketch(kind, 12, 40, 6).unwrap();
            let x = s.apply_matrix(&a_sparse).unwrap();
            let y = s.apply_matrix(&a_dense).unwrap();
            assert!((x - y).abs().max() < 1e-12);
        }
    }

    #[test]
    fn identity_is_exact() {
        let s = SketchOperator::identity(5);
        let x = [1.0, -2.0, 3.0, 0.5, 0.0];
        assert_eq!(s.apply_vec(&x).unwrap(), x.to_vec());
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let s = build_sketch(SketchKind::Gaussian, 3, 8, 1).unwrap();
        assert!(matches!(s.apply_vec(&[0.0; 7]), Err(Error::Dimension { .. })));
    }

    #[test]
    fn kv_roundtrip_rebuilds_payload() {
        let s = build_sketch(SketchKind::Srht, 9, 30, 99).unwrap();
        let t = SketchOperator::from_kv(&s.to_kv()).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn materialize_guard() {
        let s = build_sketch(SketchKind::Sparse, 4000, 4000 * 4, 1).unwrap();
        assert!(matches!(s.materialize(), Err(Error::SizeGuard { .. })));
    }
}
