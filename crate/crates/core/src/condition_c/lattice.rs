use crate::linalg::exact::{RatMatrix, RatSubspace, Q};
use crate::linalg::{Mat, Subspace};
use core::fmt::Debug;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Subspaces of a fixed ambient space with the operations the subspace
/// condition needs.
pub trait Lattice {
    type Space: Clone + Debug;

    fn ambient(&self) -> usize;
    fn zero(&self) -> Self::Space;
    fn full(&self) -> Self::Space;
    fn dim(&self, v: &Self::Space) -> usize;
    fn sum(&self, a: &Self::Space, b: &Self::Space) -> Self::Space;
    fn intersect(&self, a: &Self::Space, b: &Self::Space) -> Self::Space;
    fn same(&self, a: &Self::Space, b: &Self::Space) -> bool;
    fn random(&self, rng: &mut ChaCha8Rng, dim: usize) -> Self::Space;
    /// Basis as float columns, for reports.
    fn basis_f64(&self, v: &Self::Space) -> Mat;

    fn contains(&self, a: &Self::Space, b: &Self::Space) -> bool {
        self.dim(&self.sum(a, b)) == self.dim(a)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FloatLattice(pub usize);

impl Lattice for FloatLattice {
    type Space = Subspace;

    fn ambient(&self) -> usize {
        self.0
    }
    fn zero(&self) -> Subspace {
        Subspace::zero(self.0)
    }
    fn full(&self) -> Subspace {
        Subspace::full(self.0)
    }
    fn dim(&self, v: &Subspace) -> usize {
        v.dim()
    }
    fn sum(&self, a: &Subspace, b: &Subspace) -> Subspace {
        a.sum(b)
    }
    fn intersect(&self, a: &Subspace, b: &Subspace) -> Subspace {
        a.intersect(b)
    }
    fn same(&self, a: &Subspace, b: &Subspace) -> bool {
        a.same_as(b)
    }
    fn random(&self, rng: &mut ChaCha8Rng, dim: usize) -> Subspace {
        Subspace::span(&Mat::from_fn(self.0, dim, |_, _| StandardNormal.sample(rng)))
    }
    fn basis_f64(&self, v: &Subspace) -> Mat {
        v.basis().clone()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExactLattice(pub usize);

impl Lattice for ExactLattice {
    type Space = RatSubspace;

    fn ambient(&self) -> usize {
        self.0
    }
    fn zero(&self) -> RatSubspace {
        RatSubspace::zero(self.0)
    }
    fn full(&self) -> RatSubspace {
        RatSubspace::full(self.0)
    }
    fn dim(&self, v: &RatSubspace) -> usize {
        v.dim()
    }
    fn sum(&self, a: &RatSubspace, b: &RatSubspace) -> RatSubspace {
        a.sum(b)
    }
    fn intersect(&self, a: &RatSubspace, b: &RatSubspace) -> RatSubspace {
        a.intersect(b)
    }
    fn same(&self, a: &RatSubspace, b: &RatSubspace) -> bool {
        a == b
    }
    fn random(&self, rng: &mut ChaCha8Rng, dim: usize) -> RatSubspace {
        let data = (0..self.0 * dim).map(|_| Q::from_integer(rng.random_range(-3i64..=3).into())).collect();
        RatSubspace::span(&RatMatrix::from_rows(self.0, dim, data))
    }
    fn basis_f64(&self, v: &RatSubspace) -> Mat {
        v.basis().to_f64()
    }
}
