//! Exact integer lattices and their cosets.
//!
//! The support of a lattice-valued observable is a translated subgroup
//! `V + r` of `Z^d`. [`AffineLattice`] stores `V` through a canonical
//! Hermite normal form basis and `r` through its unique reduced
//! representative, so two supports are equal exactly when the structs are.
//!
//! Only `d <= 2` is needed here, which lets [`LatticeVec`] be `Copy`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

/// Largest ambient dimension supported.
pub const MAX_DIM: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("no samples")]
    NoSamples,
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0} (must be 1..={MAX_DIM})")]
    UnsupportedDimension(usize),
}

/// An integer vector in `Z^d`, `d <= MAX_DIM`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVec {
    dim: u8,
    coords: [i64; MAX_DIM],
}

impl LatticeVec {
    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "unsupported dimension {dim}");
        LatticeVec {
            dim: dim as u8,
            coords: [0; MAX_DIM],
        }
    }

    /// Builds a vector from a coordinate slice of length 1 or 2.
    pub fn new(coords: &[i64]) -> Self {
        let mut v = LatticeVec::zero(coords.len());
        v.coords[..coords.len()].copy_from_slice(coords);
        v
    }

    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords[..self.dim()]
    }

    pub fn is_zero(&self) -> bool {
        self.coords().iter().all(|&c| c == 0)
    }

    fn zip_with(self, rhs: Self, f: impl Fn(i64, i64) -> i64) -> Self {
        assert_eq!(self.dim, rhs.dim, "lattice vector dimension mismatch");
        let mut out = self;
        for i in 0..self.dim() {
            out.coords[i] = f(self.coords[i], rhs.coords[i]);
        }
        out
    }
}

impl From<[i64; 1]> for LatticeVec {
    fn from(c: [i64; 1]) -> Self {
        LatticeVec::new(&c)
    }
}

impl From<[i64; 2]> for LatticeVec {
    fn from(c: [i64; 2]) -> Self {
        LatticeVec::new(&c)
    }
}

impl fmt::Debug for LatticeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.coords())
    }
}

impl fmt::Display for LatticeVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.coords().iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for LatticeVec {
    type Output = LatticeVec;
    fn add(self, rhs: Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for LatticeVec {
    type Output = LatticeVec;
    fn sub(self, rhs: Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for LatticeVec {
    type Output = LatticeVec;
    fn neg(self) -> Self {
        LatticeVec::zero(self.dim()) - self
    }
}

impl Mul<LatticeVec> for i64 {
    type Output = LatticeVec;
    fn mul(self, rhs: LatticeVec) -> LatticeVec {
        let mut out = rhs;
        for c in &mut out.coords[..rhs.dim()] {
            *c *= self;
        }
        out
    }
}

/// Index of a sublattice in `Z^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeIndex {
    Finite(u64),
    Infinite,
}

impl fmt::Display for LatticeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LatticeIndex::Finite(n) => write!(f, "{n}"),
            LatticeIndex::Infinite => write!(f, "infinite"),
        }
    }
}

fn pivot_column(v: &LatticeVec) -> Option<usize> {
    v.coords().iter().position(|&c| c != 0)
}

/// Canonical Hermite normal form basis of the lattice generated by `vectors`.
///
/// Rows are in echelon form with strictly increasing pivot columns, every
/// pivot is positive, and entries above a pivot lie in `[0, pivot)`.
pub fn hnf_basis(dim: usize, vectors: &[LatticeVec]) -> Result<Vec<LatticeVec>, LatticeError> {
    if !(1..=MAX_DIM).contains(&dim) {
        return Err(LatticeError::UnsupportedDimension(dim));
    }
    if let Some(v) = vectors.iter().find(|v| v.dim() != dim) {
        return Err(LatticeError::DimensionMismatch {
            expected: dim,
            got: v.dim(),
        });
    }
    let mut rest: Vec<LatticeVec> = vectors.iter().copied().filter(|v| !v.is_zero()).collect();
    let mut basis: Vec<LatticeVec> = Vec::new();

    for col in 0..dim {
        // Euclid on column `col` across the remaining rows.
        loop {
            let Some(p) = rest
                .iter()
                .enumerate()
                .filter(|(_, v)| v.coords[col] != 0)
                .min_by_key(|(_, v)| v.coords[col].abs())
                .map(|(i, _)| i)
            else {
                break;
            };
            let pivot = rest[p];
            for (i, v) in rest.iter_mut().enumerate() {
                if i != p && v.coords[col] != 0 {
                    let q = v.coords[col].div_euclid(pivot.coords[col]);
                    *v = *v - q * pivot;
                }
            }
            if rest.iter().enumerate().all(|(i, v)| i == p || v.coords[col] == 0) {
                let mut row = rest.swap_remove(p);
                if row.coords[col] < 0 {
                    row = -row;
                }
                basis.push(row);
                break;
            }
        }
        rest.retain(|v| !v.is_zero());
    }
    debug_assert!(rest.iter().all(|v| v.is_zero()));

    // Reduce entries above each pivot into [0, pivot).
    for i in 0..basis.len() {
        let row = basis[i];
        let c = pivot_column(&row).expect("basis rows are nonzero");
        let p = row.coords[c];
        for j in 0..i {
            let q = basis[j].coords[c].div_euclid(p);
            basis[j] = basis[j] - q * row;
        }
    }
    Ok(basis)
}

/// A translated integer lattice `V + r`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AffineLattice {
    dim: usize,
    basis: Vec<LatticeVec>,
    translation: LatticeVec,
}

impl AffineLattice {
    /// The lattice spanned by `vectors`, with zero translation.
    pub fn span(dim: usize, vectors: &[LatticeVec]) -> Result<Self, LatticeError> {
        let basis = hnf_basis(dim, vectors)?;
        Ok(AffineLattice {
            dim,
            basis,
            translation: LatticeVec::zero(dim),
        })
    }

    /// `Z^d` itself.
    pub fn full(dim: usize) -> Self {
        let units: Vec<LatticeVec> = (0..dim)
            .map(|i| {
                let mut v = LatticeVec::zero(dim);
                v.coords[i] = 1;
                v
            })
            .collect();
        AffineLattice::span(dim, &units).expect("unit vectors")
    }

    /// Returns `self` translated by `shift`, with the translation re-reduced.
    pub fn translated(&self, shift: LatticeVec) -> Self {
        let translation = self.reduce(self.translation + shift);
        AffineLattice {
            translation,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[LatticeVec] {
        &self.basis
    }

    pub fn translation(&self) -> LatticeVec {
        self.translation
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    /// Reduces `v` modulo `V` into the fundamental cell of the HNF basis.
    pub fn reduce(&self, v: LatticeVec) -> LatticeVec {
        let mut v = v;
        for row in &self.basis {
            let c = pivot_column(row).expect("basis rows are nonzero");
            let q = v.coords[c].div_euclid(row.coords[c]);
            v = v - q * *row;
        }
        v
    }

    /// Whether `v` lies in the linear part `V`.
    pub fn contains_linear(&self, v: LatticeVec) -> bool {
        self.reduce(v).is_zero()
    }

    /// Whether `v` lies in the coset `V + r`.
    pub fn contains(&self, v: LatticeVec) -> bool {
        self.reduce(v) == self.translation
    }

    /// The `n`-fold sum coset `V + n r`.
    pub fn n_fold(&self, n: i64) -> Self {
        AffineLattice {
            translation: self.reduce(n * self.translation),
            ..self.clone()
        }
    }

    /// Number of cosets of `V` in `Z^d`.
    pub fn index(&self) -> LatticeIndex {
        lattice_index(self)
    }
}

impl fmt::Display for AffineLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "span{{")?;
        for (i, b) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "}} + {}", self.translation)
    }
}

/// Smallest translated lattice containing every point.
pub fn affine_support(points: &[LatticeVec]) -> Result<AffineLattice, LatticeError> {
    let first = *points.first().ok_or(LatticeError::NoSamples)?;
    let dim = first.dim();
    let diffs: Vec<LatticeVec> = points
        .iter()
        .map(|p| {
            if p.dim() != dim {
                Err(LatticeError::DimensionMismatch {
                    expected: dim,
                    got: p.dim(),
                })
            } else {
                Ok(*p - first)
            }
        })
        .collect::<Result<_, _>>()?;
    let lat = AffineLattice::span(dim, &diffs)?;
    Ok(lat.translated(first))
}

/// `|det|` of the basis when the lattice has full rank.
pub fn lattice_index(lat: &AffineLattice) -> LatticeIndex {
    if lat.rank() < lat.dim() {
        return LatticeIndex::Infinite;
    }
    // Echelon form with full rank is square upper triangular.
    let det: i64 = lat
        .basis
        .iter()
        .enumerate()
        .map(|(i, row)| row.coords[i])
        .product();
    LatticeIndex::Finite(det.unsigned_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v2(x: i64, y: i64) -> LatticeVec {
        LatticeVec::from([x, y])
    }

    /// Exhaustive search for integer coefficients in [-bound, bound].
    fn brute_force_member(gens: &[LatticeVec], target: LatticeVec, bound: i64) -> bool {
        fn rec(gens: &[LatticeVec], acc: LatticeVec, target: LatticeVec, bound: i64) -> bool {
            match gens.split_first() {
                None => acc == target,
                Some((g, tail)) => (-bound..=bound).any(|c| rec(tail, acc + c * *g, target, bound)),
            }
        }
        rec(gens, LatticeVec::zero(target.dim()), target, bound)
    }

    #[test]
    fn checkerboard_basis() {
        let gens = [v2(2, 0), v2(0, 2), v2(1, 1)];
        let basis = hnf_basis(2, &gens).unwrap();
        assert_eq!(basis, vec![v2(1, 1), v2(0, 2)]);
        let lat = AffineLattice::span(2, &gens).unwrap();
        assert_eq!(lat.index(), LatticeIndex::Finite(2));
        for x in -4..=4 {
            for y in -4..=4 {
                let v = v2(x, y);
                assert_eq!(lat.contains_linear(v), brute_force_member(&gens, v, 8), "{v}");
            }
        }
    }

    #[test]
    fn identity_and_empty() {
        let basis = hnf_basis(2, &[v2(1, 0), v2(0, 1)]).unwrap();
        assert_eq!(basis, vec![v2(1, 0), v2(0, 1)]);
        assert_eq!(AffineLattice::full(2).index(), LatticeIndex::Finite(1));
        let empty = AffineLattice::span(2, &[]).unwrap();
        assert_eq!(empty.rank(), 0);
        assert!(empty.basis().is_empty());
        assert_eq!(empty.index(), LatticeIndex::Infinite);
    }

    #[test]
    fn rank_one_in_plane_is_infinite_index() {
        let lat = AffineLattice::span(2, &[v2(2, 4), v2(-3, -6)]).unwrap();
        assert_eq!(lat.rank(), 1);
        assert_eq!(lat.basis(), &[v2(1, 2)]);
        assert_eq!(lattice_index(&lat), LatticeIndex::Infinite);
    }

    #[test]
    fn ssrw_steps_support() {
        let steps = [v2(1, 0), v2(-1, 0), v2(0, 1), v2(0, -1)];
        let s = affine_support(&steps).unwrap();
        assert_eq!(s.basis(), &[v2(1, 1), v2(0, 2)]);
        // (1,0) reduces to (0,1) in the HNF fundamental cell; same coset
        assert_eq!(s.translation(), v2(0, 1));
        assert!(s.contains(v2(1, 0)));
        // every step has odd coordinate sum
        for x in -3..=3i64 {
            for y in -3..=3i64 {
                assert_eq!(s.contains(v2(x, y)), (x + y).rem_euclid(2) == 1);
            }
        }
    }

    #[test]
    fn single_point_support() {
        let s = affine_support(&[LatticeVec::from([0])]).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(s.translation(), LatticeVec::from([0]));
        let s = affine_support(&[LatticeVec::from([7]), LatticeVec::from([7])]).unwrap();
        assert_eq!(s.translation(), LatticeVec::from([7]));
    }

    #[test]
    fn empty_support_is_an_error() {
        assert_eq!(affine_support(&[]), Err(LatticeError::NoSamples));
    }

    #[test]
    fn one_dimensional_translation_is_reduced() {
        let s = affine_support(&[LatticeVec::from([5]), LatticeVec::from([-1])]).unwrap();
        assert_eq!(s.basis(), &[LatticeVec::from([6])]);
        assert_eq!(s.translation(), LatticeVec::from([5]));
        let s = affine_support(&[LatticeVec::from([1]), LatticeVec::from([-1])]).unwrap();
        assert_eq!(s.translation(), LatticeVec::from([1]));
        assert_eq!(s.index(), LatticeIndex::Finite(2));
    }

    #[test]
    fn dimension_mismatch() {
        let r = affine_support(&[LatticeVec::from([1]), v2(1, 1)]);
        assert!(matches!(r, Err(LatticeError::DimensionMismatch { .. })));
    }

    fn small_vecs() -> impl Strategy<Value = Vec<LatticeVec>> {
        prop::collection::vec((-6i64..=6, -6i64..=6).prop_map(|(x, y)| v2(x, y)), 0..5)
    }

    proptest! {
        #[test]
        fn hnf_is_idempotent(gens in small_vecs()) {
            let b = hnf_basis(2, &gens).unwrap();
            prop_assert_eq!(hnf_basis(2, &b).unwrap(), b);
        }

        #[test]
        fn hnf_is_canonical(gens in small_vecs()) {
            let b = hnf_basis(2, &gens).unwrap();
            let mut last = None;
            for (i, row) in b.iter().enumerate() {
                let c = pivot_column(row).unwrap();
                prop_assert!(row.coords[c] > 0);
                if let Some(l) = last { prop_assert!(c > l); }
                last = Some(c);
                for above in &b[..i] {
                    prop_assert!(above.coords[c] >= 0 && above.coords[c] < row.coords[c]);
                }
            }
        }

        #[test]
        fn membership_matches_brute_force(gens in prop::collection::vec((-3i64..=3, -3i64..=3).prop_map(|(x, y)| v2(x, y)), 1..3),
                                          x in -4i64..=4, y in -4i64..=4) {
            let lat = AffineLattice::span(2, &gens).unwrap();
            let target = v2(x, y);
            // |coefficients| <= |adj| * |target| <= 24 for two generators with entries in [-3, 3]
            prop_assert_eq!(lat.contains_linear(target), brute_force_member(&gens, target, 40));
        }

        #[test]
        fn generators_are_members_and_reduction_is_a_coset_map(gens in small_vecs(), x in -20i64..=20, y in -20i64..=20) {
            let lat = AffineLattice::span(2, &gens).unwrap();
            for g in &gens { prop_assert!(lat.contains_linear(*g)); }
            let v = v2(x, y);
            let r = lat.reduce(v);
            prop_assert!(lat.contains_linear(v - r));
            prop_assert_eq!(lat.reduce(r), r);
        }

        #[test]
        fn coset_shift_law(points in prop::collection::vec((-5i64..=5, -5i64..=5).prop_map(|(x, y)| v2(x, y)), 1..5)) {
            let s = affine_support(&points).unwrap();
            let mut sums = Vec::new();
            for p in &points { for q in &points { sums.push(*p + *q); } }
            let s2 = affine_support(&sums).unwrap();
            prop_assert_eq!(s2, s.n_fold(2));
            let mut triples = Vec::new();
            for a in &sums { for p in &points { triples.push(*a + *p); } }
            prop_assert_eq!(affine_support(&triples).unwrap(), s.n_fold(3));
        }
    }
}
