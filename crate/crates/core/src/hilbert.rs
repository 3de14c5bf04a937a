//! Finite-dimensional operator algebra.
//!
//! Two elementary spaces are supported: a bosonic Fock space truncated at a
//! cutoff `n_c` (dimension `n_c + 1`) and the symmetric Dicke sector of `N`
//! spin-1/2 particles (dimension `N + 1`). Joint spaces are built with
//! [`tensor`], where the **first factor is the slow (outer) index**. All
//! cavity-atom operators in this crate are written as `fock ⊗ dicke`, so the
//! joint basis index of `|n⟩|p⟩` is `n * (N + 1) + p`.
//!
//! Dicke basis vectors are ordered `|j, m⟩` with `m = j, j-1, …, -j`; index
//! `p` corresponds to `m = j - p`.

use faer::{Mat, MatRef, Side};
use serde::Serialize;

use crate::error::{Error, Result};

pub use faer::c64;

/// Largest joint dimension [`tensor`] will build unless told otherwise.
pub const DEFAULT_MAX_DIM: usize = 16_384;

/// Tolerance on `max |M - M†|`, relative to `max(1, max |M|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Tolerance on `max |U†U - I|`.
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct FockSpace {
    cutoff: usize,
}

impl FockSpace {
    pub fn new(cutoff: usize) -> Result<Self> {
        if cutoff < 1 {
            return Err(Error::InvalidSpace("Fock cutoff must be at least 1".into()));
        }
        Ok(Self { cutoff })
    }

    /// Highest retained Fock index.
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn dim(&self) -> usize {
        self.cutoff + 1
    }
}

/// Symmetric `j = N/2` sector of `N` two-level atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DickeSpace {
    n_atoms: usize,
}

impl DickeSpace {
    pub fn new(n_atoms: usize) -> Result<Self> {
        if n_atoms < 1 {
            return Err(Error::InvalidSpace("atom number must be at least 1".into()));
        }
        Ok(Self { n_atoms })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.n_atoms + 1
    }

    pub fn j(&self) -> f64 {
        self.n_atoms as f64 / 2.0
    }

    /// Magnetic quantum number of basis index `p`.
    pub fn m(&self, p: usize) -> f64 {
        self.j() - p as f64
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Space {
    Fock(FockSpace),
    Dicke(DickeSpace),
    /// `outer ⊗ inner`, outer index slow.
    Tensor(Box<Space>, Box<Space>),
    /// Unstructured space of the given dimension (blocks, test matrices).
    Plain(usize),
}

impl Space {
    pub fn dim(&self) -> usize {
        match self {
            Space::Fock(f) => f.dim(),
            Space::Dicke(d) => d.dim(),
            Space::Tensor(a, b) => a.dim() * b.dim(),
            Space::Plain(n) => *n,
        }
    }

    pub fn joint(fock: FockSpace, dicke: DickeSpace) -> Space {
        Space::Tensor(Box::new(Space::Fock(fock)), Box::new(Space::Dicke(dicke)))
    }
}

impl From<FockSpace> for Space {
    fn from(f: FockSpace) -> Self {
        Space::Fock(f)
    }
}

impl From<DickeSpace> for Space {
    fn from(d: DickeSpace) -> Self {
        Space::Dicke(d)
    }
}

/// Dense complex matrix on a declared space.
///
/// The `hermitian` and `unitary` flags are only ever set after the property
/// has been checked against [`HERMITIAN_TOL`] / [`UNITARY_TOL`].
#[derive(Clone, Debug)]
pub struct OperatorMatrix {
    space: Space,
    elements: Mat<c64>,
    hermitian: bool,
    unitary: bool,
}

impl OperatorMatrix {
    /// Wraps a square matrix without asserting any structure.
    pub fn new(space: Space, elements: Mat<c64>) -> Result<Self> {
        check_shape(&space, elements.as_ref())?;
        Ok(Self { space, elements, hermitian: false, unitary: false })
    }

    /// Wraps a matrix that must be Hermitian. The stored copy is exactly
    /// symmetrized so downstream eigensolvers see a self-adjoint input.
    pub fn hermitian(space: Space, elements: Mat<c64>) -> Result<Self> {
        check_shape(&space, elements.as_ref())?;
        let residual = hermitian_residual(elements.as_ref());
        let scale = max_abs(elements.as_ref()).max(1.0);
        if residual > HERMITIAN_TOL * scale {
            return Err(Error::NotHermitian { residual });
        }
        let n = elements.nrows();
        let sym = Mat::from_fn(n, n, |i, j| (elements[(i, j)] + elements[(j, i)].conj()) * 0.5);
        Ok(Self { space, elements: sym, hermitian: true, unitary: false })
    }

    /// Wraps a matrix that must be unitary.
    pub fn unitary(space: Space, elements: Mat<c64>) -> Result<Self> {
        check_shape(&space, elements.as_ref())?;
        let residual = unitary_residual(elements.as_ref());
        if residual > UNITARY_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self { space, elements, hermitian: false, unitary: true })
    }

    pub fn identity(space: Space) -> Self {
        let n = space.dim();
        Self { space, elements: Mat::identity(n, n), hermitian: true, unitary: true }
    }

    pub fn zeros(space: Space) -> Self {
        let n = space.dim();
        Self { space, elements: Mat::zeros(n, n), hermitian: true, unitary: false }
    }

    /// Real diagonal matrix; always Hermitian.
    pub fn from_real_diagonal(space: Space, diagonal: &[f64]) -> Result<Self> {
        if diagonal.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: diagonal.len() });
        }
        let n = diagonal.len();
        let elements = Mat::from_fn(n, n, |i, j| if i == j { c64::new(diagonal[i], 0.0) } else { c64::new(0.0, 0.0) });
        Ok(Self { space, elements, hermitian: true, unitary: false })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn elements(&self) -> MatRef<'_, c64> {
        self.elements.as_ref()
    }

    pub fn into_elements(self) -> Mat<c64> {
        self.elements
    }

    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_unitary(&self) -> bool {
        self.unitary
    }

    pub fn get(&self, row: usize, col: usize) -> c64 {
        self.elements[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            elements: self.elements.adjoint().to_owned(),
            hermitian: self.hermitian,
            unitary: self.unitary,
        }
    }

    /// Matrix product `self · rhs`. Flags are dropped except unitarity of a
    /// product of unitaries.
    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        self.same_dim(rhs)?;
        Ok(Self {
            space: self.space.clone(),
            elements: &self.elements * &rhs.elements,
            hermitian: false,
            unitary: self.unitary && rhs.unitary,
        })
    }

    /// `self + rhs`; Hermiticity is preserved.
    pub fn add(&self, rhs: &Self) -> Result<Self> {
        self.same_dim(rhs)?;
        Ok(Self {
            space: self.space.clone(),
            elements: &self.elements + &rhs.elements,
            hermitian: self.hermitian && rhs.hermitian,
            unitary: false,
        })
    }

    /// Multiplication by a real scalar; Hermiticity is preserved.
    pub fn scale(&self, k: f64) -> Self {
        let n = self.dim();
        Self {
            space: self.space.clone(),
            elements: Mat::from_fn(n, n, |i, j| self.elements[(i, j)] * k),
            hermitian: self.hermitian,
            unitary: false,
        }
    }

    /// Multiplication by a complex scalar; drops all flags.
    pub fn scale_complex(&self, k: c64) -> Self {
        let n = self.dim();
        Self {
            space: self.space.clone(),
            elements: Mat::from_fn(n, n, |i, j| self.elements[(i, j)] * k),
            hermitian: false,
            unitary: false,
        }
    }

    /// `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &[c64]) -> Result<c64> {
        let mv = self.apply(v)?;
        Ok(v.iter().zip(&mv).map(|(a, b)| a.conj() * b).sum())
    }

    /// `M|v⟩`.
    pub fn apply(&self, v: &[c64]) -> Result<Vec<c64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: v.len() });
        }
        let n = self.dim();
        let mut out = vec![c64::new(0.0, 0.0); n];
        for j in 0..n {
            let vj = v[j];
            if vj == c64::new(0.0, 0.0) {
                continue;
            }
            let col = self.elements.col(j);
            for i in 0..n {
                out[i] += col[i] * vj;
            }
        }
        Ok(out)
    }

    fn same_dim(&self, rhs: &Self) -> Result<()> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: rhs.dim() });
        }
        Ok(())
    }
}

fn check_shape(space: &Space, m: MatRef<'_, c64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidSpace(format!("matrix is {}x{}, not square", m.nrows(), m.ncols())));
    }
    if m.nrows() != space.dim() {
        return Err(Error::DimensionMismatch { expected: space.dim(), found: m.nrows() });
    }
    Ok(())
}

pub fn max_abs(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            best = best.max(m[(i, j)].norm());
        }
    }
    best
}

/// `max |A - B|` entrywise.
pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut best = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            best = best.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    best
}

pub fn hermitian_residual(m: MatRef<'_, c64>) -> f64 {
    let mut best = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..=j.min(m.nrows() - 1) {
            best = best.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    best
}

pub fn unitary_residual(m: MatRef<'_, c64>) -> f64 {
    let n = m.nrows();
    let prod = m.adjoint() * m;
    max_abs_diff(prod.as_ref(), Mat::<c64>::identity(n, n).as_ref())
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<Mat<c64>> {
    a.same_dim(b)?;
    Ok(&a.elements * &b.elements - &b.elements * &a.elements)
}

/// Ladder and number operators of a truncated mode.
#[derive(Clone, Debug)]
pub struct FockOperators {
    pub a: OperatorMatrix,
    pub a_dagger: OperatorMatrix,
    pub number: OperatorMatrix,
}

pub fn fock_operators(space: FockSpace) -> FockOperators {
    let n = space.dim();
    let zero = c64::new(0.0, 0.0);
    // ⟨k-1| a |k⟩ = √k; the truncation removes a†|n_c⟩.
    let a = Mat::from_fn(n, n, |i, j| if j == i + 1 { c64::new((j as f64).sqrt(), 0.0) } else { zero });
    let a_dagger = a.adjoint().to_owned();
    let number = Mat::from_fn(n, n, |i, j| if i == j { c64::new(i as f64, 0.0) } else { zero });
    let s = Space::Fock(space);
    FockOperators {
        a: OperatorMatrix { space: s.clone(), elements: a, hermitian: false, unitary: false },
        a_dagger: OperatorMatrix { space: s.clone(), elements: a_dagger, hermitian: false, unitary: false },
        number: OperatorMatrix { space: s, elements: number, hermitian: true, unitary: false },
    }
}

/// Collective angular-momentum operators on the Dicke sector.
#[derive(Clone, Debug)]
pub struct SpinOperators {
    pub jx: OperatorMatrix,
    pub jy: OperatorMatrix,
    pub jz: OperatorMatrix,
    /// `J+ = Jx + iJy`
    pub jp: OperatorMatrix,
    /// `J- = Jx - iJy`
    pub jm: OperatorMatrix,
}

pub fn spin_operators(space: DickeSpace) -> SpinOperators {
    let n = space.dim();
    let j = space.j();
    let zero = c64::new(0.0, 0.0);
    // J+|j,m⟩ = √(j(j+1) - m(m+1)) |j,m+1⟩ and m+1 sits at index p-1.
    let jp = Mat::from_fn(n, n, |row, col| {
        if col == row + 1 {
            let m = space.m(col);
            c64::new((j * (j + 1.0) - m * (m + 1.0)).max(0.0).sqrt(), 0.0)
        } else {
            zero
        }
    });
    let jm = jp.adjoint().to_owned();
    let jx = Mat::from_fn(n, n, |r, c| (jp[(r, c)] + jm[(r, c)]) * 0.5);
    let jy = Mat::from_fn(n, n, |r, c| (jp[(r, c)] - jm[(r, c)]) * c64::new(0.0, -0.5));
    let jz = Mat::from_fn(n, n, |r, c| if r == c { c64::new(space.m(r), 0.0) } else { zero });
    let s = Space::Dicke(space);
    let op = |m: Mat<c64>, herm: bool| OperatorMatrix { space: s.clone(), elements: m, hermitian: herm, unitary: false };
    SpinOperators {
        jx: op(jx, true),
        jy: op(jy, true),
        jz: op(jz, true),
        jp: op(jp, false),
        jm: op(jm, false),
    }
}

/// Kronecker product `A ⊗ B` with `A`'s index slow, limited to
/// [`DEFAULT_MAX_DIM`].
pub fn tensor(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    tensor_with_limit(a, b, DEFAULT_MAX_DIM)
}

pub fn tensor_with_limit(a: &OperatorMatrix, b: &OperatorMatrix, max_dim: usize) -> Result<OperatorMatrix> {
    let (da, db) = (a.dim(), b.dim());
    let dim = da.checked_mul(db).ok_or(Error::DimensionLimit { dim: usize::MAX, max: max_dim })?;
    if dim > max_dim {
        return Err(Error::DimensionLimit { dim, max: max_dim });
    }
    let elements = Mat::from_fn(dim, dim, |r, c| a.elements[(r / db, c / db)] * b.elements[(r % db, c % db)]);
    Ok(OperatorMatrix {
        space: Space::Tensor(Box::new(a.space.clone()), Box::new(b.space.clone())),
        elements,
        hermitian: a.hermitian && b.hermitian,
        unitary: a.unitary && b.unitary,
    })
}

/// `|a⟩ ⊗ |b⟩` with `a`'s index slow.
pub fn kron_vec(a: &[c64], b: &[c64]) -> Vec<c64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Eigendecomposition of a Hermitian operator.
#[derive(Clone, Debug)]
pub struct Eigh {
    /// Ascending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the order of `values`.
    pub vectors: Mat<c64>,
}

pub fn eigh(h: &OperatorMatrix) -> Result<Eigh> {
    if !h.hermitian {
        return Err(Error::NotHermitian { residual: hermitian_residual(h.elements()) });
    }
    let evd = h
        .elements
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let s = evd.S().column_vector();
    let values: Vec<f64> = (0..s.nrows()).map(|i| s[i].re).collect();
    Ok(Eigh { values, vectors: evd.U().to_owned() })
}

/// `exp(-i H t)` through the eigendecomposition of `H`.
pub fn expm_i(h: &OperatorMatrix, t: f64) -> Result<OperatorMatrix> {
    let eig = eigh(h)?;
    let u = phase_evolve(&eig, t);
    OperatorMatrix::unitary(h.space.clone(), u)
}

/// `V diag(exp(-i λ t)) V†` for an existing decomposition.
pub fn phase_evolve(eig: &Eigh, t: f64) -> Mat<c64> {
    let v = &eig.vectors;
    let n = v.nrows();
    let phases: Vec<c64> = eig.values.iter().map(|&l| c64::from_polar(1.0, -l * t)).collect();
    let scaled = Mat::from_fn(n, n, |i, k| v[(i, k)] * phases[k]);
    &scaled * v.adjoint()
}

/// Something that maps state vectors on a space of fixed dimension.
pub trait LinearOperator {
    fn dim(&self) -> usize;

    /// Applies the operator to every column of `states`.
    fn apply_columns(&self, states: MatRef<'_, c64>) -> Mat<c64>;
}

impl LinearOperator for OperatorMatrix {
    fn dim(&self) -> usize {
        self.elements.nrows()
    }

    fn apply_columns(&self, states: MatRef<'_, c64>) -> Mat<c64> {
        &self.elements * states
    }
}

/// Real diagonal operator stored by its diagonal only.
#[derive(Clone, Debug)]
pub struct DiagonalOperator {
    space: Space,
    diagonal: Vec<f64>,
}

impl DiagonalOperator {
    pub fn new(space: Space, diagonal: Vec<f64>) -> Result<Self> {
        if diagonal.len() != space.dim() {
            return Err(Error::DimensionMismatch { expected: space.dim(), found: diagonal.len() });
        }
        Ok(Self { space, diagonal })
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    pub fn to_dense(&self) -> OperatorMatrix {
        OperatorMatrix::from_real_diagonal(self.space.clone(), &self.diagonal).expect("length checked in new")
    }
}

impl LinearOperator for DiagonalOperator {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn apply_columns(&self, states: MatRef<'_, c64>) -> Mat<c64> {
        Mat::from_fn(states.nrows(), states.ncols(), |i, k| states[(i, k)] * self.diagonal[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> c64 {
        c64::new(re, 0.0)
    }

    fn plain_diag(vals: &[f64]) -> OperatorMatrix {
        OperatorMatrix::from_real_diagonal(Space::Plain(vals.len()), vals).unwrap()
    }

    #[test]
    fn fock_cutoff_one_annihilator() {
        let ops = fock_operators(FockSpace::new(1).unwrap());
        assert_eq!(ops.a.get(0, 1), c(1.0));
        assert_eq!(ops.a.get(0, 0), c(0.0));
        assert_eq!(ops.a.get(1, 0), c(0.0));
        assert_eq!(ops.a.get(1, 1), c(0.0));
    }

    #[test]
    fn fock_ladder_element() {
        let ops = fock_operators(FockSpace::new(2).unwrap());
        assert!((ops.a.get(1, 2).re - 2f64.sqrt()).abs() < 1e-15);
        assert!((ops.a_dagger.get(2, 1).re - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(ops.number.get(2, 2), c(2.0));
    }

    #[test]
    fn zero_cutoff_rejected() {
        assert!(FockSpace::new(0).is_err());
        assert!(DickeSpace::new(0).is_err());
    }

    #[test]
    fn truncated_commutator_is_identity_below_edge() {
        let space = FockSpace::new(50).unwrap();
        let ops = fock_operators(space);
        let comm = commutator(&ops.a, &ops.a_dagger).unwrap();
        let mut worst = 0.0f64;
        for i in 0..50 {
            for j in 0..50 {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((comm[(i, j)] - c(target)).norm());
            }
        }
        assert!(worst <= 1e-12, "{worst}");
        // the edge row carries the truncation artefact -n_c
        assert!((comm[(50, 50)].re + 50.0).abs() < 1e-12);
    }

    #[test]
    fn single_spin_jz() {
        let ops = spin_operators(DickeSpace::new(1).unwrap());
        assert_eq!(ops.jz.get(0, 0), c(0.5));
        assert_eq!(ops.jz.get(1, 1), c(-0.5));
    }

    #[test]
    fn spin_one_raising_element() {
        let ops = spin_operators(DickeSpace::new(2).unwrap());
        // ⟨1,1|J+|1,0⟩: m=1 is index 0, m=0 is index 1
        assert!((ops.jp.get(0, 1).re - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn su2_algebra_closes() {
        for n in 1..=64 {
            let ops = spin_operators(DickeSpace::new(n).unwrap());
            let xy = commutator(&ops.jx, &ops.jy).unwrap();
            let yz = commutator(&ops.jy, &ops.jz).unwrap();
            let zx = commutator(&ops.jz, &ops.jx).unwrap();
            let i_jz = ops.jz.scale_complex(c64::new(0.0, 1.0));
            let i_jx = ops.jx.scale_complex(c64::new(0.0, 1.0));
            let i_jy = ops.jy.scale_complex(c64::new(0.0, 1.0));
            assert!(max_abs_diff(xy.as_ref(), i_jz.elements()) <= 1e-12, "N={n}");
            assert!(max_abs_diff(yz.as_ref(), i_jx.elements()) <= 1e-12, "N={n}");
            assert!(max_abs_diff(zx.as_ref(), i_jy.elements()) <= 1e-12, "N={n}");
            let zp = commutator(&ops.jz, &ops.jp).unwrap();
            assert!(max_abs_diff(zp.as_ref(), ops.jp.elements()) <= 1e-12);
            let zm = commutator(&ops.jz, &ops.jm).unwrap();
            assert!(max_abs_diff(zm.as_ref(), ops.jm.scale(-1.0).elements()) <= 1e-12);
        }
    }

    #[test]
    fn casimir_is_scalar() {
        for n in [1, 2, 5, 12, 33] {
            let space = DickeSpace::new(n).unwrap();
            let ops = spin_operators(space);
            let sq = |o: &OperatorMatrix| o.matmul(o).unwrap();
            let j2 = sq(&ops.jx).add(&sq(&ops.jy)).unwrap().add(&sq(&ops.jz)).unwrap();
            let j = space.j();
            let target = OperatorMatrix::identity(space.into()).scale(j * (j + 1.0));
            assert!(max_abs_diff(j2.elements(), target.elements()) <= 1e-10);
        }
    }

    #[test]
    fn tensor_identities() {
        let i2 = OperatorMatrix::identity(Space::Plain(2));
        let i3 = OperatorMatrix::identity(Space::Plain(3));
        let i6 = tensor(&i2, &i3).unwrap();
        assert_eq!(max_abs_diff(i6.elements(), Mat::<c64>::identity(6, 6).as_ref()), 0.0);
        assert!(i6.is_unitary() && i6.is_hermitian());

        let d = tensor(&plain_diag(&[0.0, 1.0]), &plain_diag(&[2.5, -3.0])).unwrap();
        let expected = [0.0, 0.0, 2.5, -3.0];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(d.get(k, k), c(*e));
        }
    }

    #[test]
    fn tensor_ordering_fock_outer() {
        let fock = fock_operators(FockSpace::new(1).unwrap());
        let spin = spin_operators(DickeSpace::new(1).unwrap());
        let nz = tensor(&fock.number, &spin.jz).unwrap();
        let expected = [0.0, 0.0, 0.5, -0.5];
        for (k, e) in expected.iter().enumerate() {
            assert_eq!(nz.get(k, k), c(*e));
        }
    }

    #[test]
    fn tensor_dimension_guard() {
        let a = OperatorMatrix::identity(Space::Plain(100));
        let err = tensor_with_limit(&a, &a, 5_000).unwrap_err();
        assert_eq!(err, Error::DimensionLimit { dim: 10_000, max: 5_000 });
    }

    #[test]
    fn eigh_diagonal_sorted() {
        let e = eigh(&plain_diag(&[3.0, 1.0, 2.0])).unwrap();
        for (got, want) in e.values.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn eigh_pauli_x() {
        let m = Mat::from_fn(2, 2, |i, j| if i != j { c(1.0) } else { c(0.0) });
        let h = OperatorMatrix::hermitian(Space::Plain(2), m).unwrap();
        let e = eigh(&h).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = Mat::from_fn(2, 2, |i, j| if i < j { c(1.0) } else { c(0.0) });
        assert!(matches!(OperatorMatrix::hermitian(Space::Plain(2), m.clone()), Err(Error::NotHermitian { .. })));
        let op = OperatorMatrix::new(Space::Plain(2), m).unwrap();
        assert!(matches!(eigh(&op), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expm_zero_is_identity() {
        let u = expm_i(&OperatorMatrix::zeros(Space::Plain(4)), 1.3).unwrap();
        assert!(max_abs_diff(u.elements(), Mat::<c64>::identity(4, 4).as_ref()) < 1e-14);
    }

    #[test]
    fn expm_single_spin_jz() {
        let ops = spin_operators(DickeSpace::new(1).unwrap());
        let u = expm_i(&ops.jz, PI).unwrap();
        assert!((u.get(0, 0) - c64::from_polar(1.0, -PI / 2.0)).norm() < 1e-14);
        assert!((u.get(1, 1) - c64::from_polar(1.0, PI / 2.0)).norm() < 1e-14);
        assert!(u.get(0, 1).norm() < 1e-14);
    }

    #[test]
    fn diagonal_operator_matches_dense() {
        let d = DiagonalOperator::new(Space::Plain(3), vec![1.0, -2.0, 0.5]).unwrap();
        let states = Mat::from_fn(3, 2, |i, k| c64::new(i as f64 + 1.0, k as f64));
        let dense = d.to_dense();
        let a = d.apply_columns(states.as_ref());
        let b = dense.apply_columns(states.as_ref());
        assert!(max_abs_diff(a.as_ref(), b.as_ref()) < 1e-15);
    }
}
