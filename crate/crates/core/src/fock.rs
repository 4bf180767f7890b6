//! Truncated tensor-product Fock spaces.
//!
//! Basis states are ordered with the *first* mode as the most significant
//! digit: for dims `[d0, d1, ..., dk]` the product state `|n0 n1 ... nk>` sits
//! at index `((n0 * d1 + n1) * d2 + n2) ...`. Equivalently, an operator acting
//! on mode `m` is embedded as `I ⊗ ... ⊗ op ⊗ ... ⊗ I` with `op` in slot `m`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Default upper bound on the total dimension of a [`HilbertSpace`].
pub const DEFAULT_DIMENSION_CAP: usize = 4096;

/// Ordered list of per-mode truncation dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    dims: Vec<usize>,
    total: usize,
}

impl HilbertSpace {
    pub fn new(dims: &[usize]) -> Result<Self> {
        Self::with_cap(dims, DEFAULT_DIMENSION_CAP)
    }

    pub fn with_cap(dims: &[usize], cap: usize) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::config("Hilbert space needs at least one mode"));
        }
        if let Some((i, d)) = dims.iter().enumerate().find(|(_, &d)| d < 2) {
            return Err(Error::config(format!(
                "mode {i} has truncation dimension {d}; every mode needs at least 2 levels"
            )));
        }
        let mut total: usize = 1;
        for &d in dims {
            total = total
                .checked_mul(d)
                .filter(|&t| t <= cap)
                .ok_or(Error::DimensionCap {
                    total: dims.iter().fold(1usize, |a, &d| a.saturating_mul(d)),
                    cap,
                })?;
        }
        Ok(Self {
            dims: dims.to_vec(),
            total,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn mode_count(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.total
    }

    /// Flat basis index of the product state with the given occupations.
    pub fn index_of(&self, occupations: &[usize]) -> Result<usize> {
        if occupations.len() != self.dims.len() {
            return Err(Error::config(format!(
                "expected {} occupation numbers, got {}",
                self.dims.len(),
                occupations.len()
            )));
        }
        let mut idx = 0;
        for (m, (&n, &d)) in occupations.iter().zip(&self.dims).enumerate() {
            if n >= d {
                return Err(Error::config(format!(
                    "occupation {n} of mode {m} exceeds truncation {d}"
                )));
            }
            idx = idx * d + n;
        }
        Ok(idx)
    }

    /// Occupation numbers of the product state at a flat basis index.
    pub fn occupations(&self, mut index: usize) -> Vec<usize> {
        let mut occ = vec![0; self.dims.len()];
        for (slot, &d) in occ.iter_mut().zip(&self.dims).rev() {
            *slot = index % d;
            index /= d;
        }
        occ
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.dims.len() {
            return Err(Error::config(format!(
                "mode index {mode} out of range for {} mode(s)",
                self.dims.len()
            )));
        }
        Ok(())
    }

    /// Embeds a single-mode matrix into the full space.
    pub fn embed(&self, mode: usize, local: &CMatrix) -> Result<CMatrix> {
        self.check_mode(mode)?;
        let d = self.dims[mode];
        if local.nrows() != d || local.ncols() != d {
            return Err(Error::config(format!(
                "local operator is {}x{}, mode {mode} has dimension {d}",
                local.nrows(),
                local.ncols()
            )));
        }
        let mut out = CMatrix::identity(1, 1);
        for (m, &dm) in self.dims.iter().enumerate() {
            out = if m == mode {
                out.kronecker(local)
            } else {
                out.kronecker(&CMatrix::identity(dm, dm))
            };
        }
        Ok(out)
    }

    pub fn identity(&self) -> CMatrix {
        CMatrix::identity(self.total, self.total)
    }
}

/// Dense operator on a [`HilbertSpace`].
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    space: HilbertSpace,
    matrix: CMatrix,
}

impl OperatorMatrix {
    pub fn new(space: HilbertSpace, matrix: CMatrix) -> Result<Self> {
        let n = space.total_dim();
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::config(format!(
                "operator is {}x{}, space dimension is {n}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { space, matrix })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `max |M - M^H|` over all elements.
    pub fn hermitian_defect(&self) -> f64 {
        hermitian_defect(&self.matrix)
    }

    /// Operator product `self · rhs`.
    pub fn compose(&self, rhs: &OperatorMatrix) -> Result<Self> {
        if self.space != rhs.space {
            return Err(Error::config("operators live on different spaces"));
        }
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn commutator(&self, rhs: &OperatorMatrix) -> Result<Self> {
        let ab = self.compose(rhs)?;
        let ba = rhs.compose(self)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: ab.matrix - ba.matrix,
        })
    }
}

pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn local_lowering(d: usize) -> CMatrix {
    let mut a = CMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Lowering operator of one mode embedded in the full space.
pub fn lowering_operator(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let m = space.embed(mode, &local_lowering(space.dims[mode]))?;
    OperatorMatrix::new(space.clone(), m)
}

pub fn raising_operator(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    Ok(lowering_operator(space, mode)?.adjoint())
}

/// `a† a` for one mode: diagonal with the mode occupation on the diagonal.
pub fn number_operator(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let d = space.dims[mode];
    let local = CMatrix::from_diagonal(&CVector::from_fn(d, |n, _| C64::new(n as f64, 0.0)));
    OperatorMatrix::new(space.clone(), space.embed(mode, &local)?)
}

/// Projector onto a single level of one mode.
pub fn level_projector(space: &HilbertSpace, mode: usize, level: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let d = space.dims[mode];
    if level >= d {
        return Err(Error::config(format!(
            "level {level} outside truncation {d} of mode {mode}"
        )));
    }
    let mut local = CMatrix::zeros(d, d);
    local[(level, level)] = C64::new(1.0, 0.0);
    OperatorMatrix::new(space.clone(), space.embed(mode, &local)?)
}

/// Swaps levels 0 and 1 of one mode, identity on the remaining levels.
pub fn level_flip(space: &HilbertSpace, mode: usize) -> Result<OperatorMatrix> {
    space.check_mode(mode)?;
    let d = space.dims[mode];
    let mut local = CMatrix::identity(d, d);
    local[(0, 0)] = C64::new(0.0, 0.0);
    local[(1, 1)] = C64::new(0.0, 0.0);
    local[(0, 1)] = C64::new(1.0, 0.0);
    local[(1, 0)] = C64::new(1.0, 0.0);
    OperatorMatrix::new(space.clone(), space.embed(mode, &local)?)
}

/// Eigenvalues (ascending) and matching orthonormal eigenvectors (columns).
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Tolerance on `max |M - M^H|` accepted by the eigensolver.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Diagonalizes a Hermitian operator.
///
/// Backed by nalgebra's symmetric eigensolver; when every imaginary part is
/// exactly zero the cheaper real path is taken.
pub fn eigendecompose_hermitian(op: &OperatorMatrix) -> Result<HermitianEigen> {
    eigendecompose_matrix(&op.matrix)
}

pub fn eigendecompose_matrix(m: &CMatrix) -> Result<HermitianEigen> {
    if m.nrows() != m.ncols() {
        return Err(Error::config("eigendecomposition needs a square matrix"));
    }
    let asym = hermitian_defect(m);
    if asym > HERMITIAN_TOLERANCE {
        return Err(Error::NotHermitian { asymmetry: asym });
    }
    if m.iter().all(|z| z.im == 0.0) {
        let real = m.map(|z| z.re);
        let eig = eigh_real(&real)?;
        return Ok(HermitianEigen {
            values: eig.0,
            vectors: eig.1.map(|x| C64::new(x, 0.0)),
        });
    }
    let sym = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::numerical("Hermitian eigensolver did not converge"))?;
    let order = ascending_order(sym.eigenvalues.as_slice());
    let values = order.iter().map(|&i| sym.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), m.ncols(), |r, c| sym.eigenvectors[(r, order[c])]);
    Ok(HermitianEigen { values, vectors })
}

/// Real symmetric eigendecomposition, ascending.
pub(crate) fn eigh_real(m: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let sym = nalgebra::SymmetricEigen::try_new(m.clone(), f64::EPSILON, 0)
        .ok_or_else(|| Error::numerical("symmetric eigensolver did not converge"))?;
    let order = ascending_order(sym.eigenvalues.as_slice());
    let values = order.iter().map(|&i| sym.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| sym.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    order
}
