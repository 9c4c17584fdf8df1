use super::{column_space, hstack, null_space, Mat};

/// A subspace of `R^n` stored through an orthonormal basis (columns).
#[derive(Debug, Clone)]
pub struct Subspace {
    basis: Mat,
}

impl Subspace {
    pub fn zero(n: usize) -> Self {
        Subspace { basis: Mat::zeros(n, 0) }
    }

    pub fn full(n: usize) -> Self {
        Subspace { basis: Mat::identity(n, n) }
    }

    /// Span of the columns of `m`.
    pub fn span(m: &Mat) -> Self {
        Subspace { basis: column_space(m) }
    }

    /// Wraps columns that are already orthonormal.
    pub(crate) fn from_orthonormal(basis: Mat) -> Self {
        Subspace { basis }
    }

    pub fn kernel(m: &Mat) -> Self {
        if m.ncols() == 0 {
            return Subspace::zero(0);
        }
        Subspace { basis: null_space(m) }
    }

    pub fn image(m: &Mat) -> Self {
        Self::span(m)
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Mat {
        &self.basis * self.basis.transpose()
    }

    pub fn orth_complement(&self) -> Self {
        let n = self.ambient();
        if self.dim() == 0 {
            return Subspace::full(n);
        }
        Subspace { basis: null_space(&self.basis.transpose()) }
    }

    pub fn sum(&self, other: &Self) -> Self {
        let n = self.ambient();
        Self::span(&hstack(&[&self.basis, &other.basis], n))
    }

    pub fn intersect(&self, other: &Self) -> Self {
        self.orth_complement()
            .sum(&other.orth_complement())
            .orth_complement()
    }

    /// `{ x : m x in w }` for a map `m` into the ambient space of `w`.
    pub fn preimage(m: &Mat, w: &Subspace) -> Self {
        let perp = w.orth_complement();
        if perp.dim() == 0 {
            return Subspace::full(m.ncols());
        }
        Subspace::kernel(&(perp.basis.transpose() * m))
    }

    pub fn contains(&self, other: &Self) -> bool {
        self.sum(other).dim() == self.dim()
    }

    pub fn same_as(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.contains(other)
    }

    /// `dim m(self)`.
    pub fn image_dim(&self, m: &Mat) -> usize {
        if self.dim() == 0 {
            return 0;
        }
        super::rank(&(m * &self.basis))
    }
}
