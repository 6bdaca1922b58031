//! Graded rings, graded modules, Hilbert data, and submodule points.
//!
//! Everything is truncated to a finite degree window: ring components live in
//! degrees `[0, top]`, module components in `[floor, top]`, and all products
//! landing above `top` are zero.  Degree-0 multiplication is the implicit
//! unit (`dim A_0 = 1` is required) and is never stored.
//!
//! This module also carries the deformation-theoretic oracles that the rest
//! of the crate is checked against: the submodule generated by a seed, the
//! generation-surjectivity profile, and the space of degree-0 A-linear maps
//! S -> M/S computed as a bare linear system.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::matrix::SparseMat;
use crate::scalar::Field;

/// A graded ring given by dimension tables and multiplication tensors.
///
/// `mult[(s1, s2)]` is the matrix of `A_{s1} (x) A_{s2} -> A_{s1+s2}` with
/// columns indexed by `i1 * dim(s2) + i2`; it is present exactly when
/// `s1, s2 >= 1` and `s1 + s2 <= top`.
#[derive(Clone, Debug)]
pub struct GradedRing<F: Field> {
    field: F,
    top: i64,
    dims: Vec<usize>,
    mult: BTreeMap<(i64, i64), SparseMat<F>>,
    generated_in_degree_one: bool,
}

impl<F: Field> GradedRing<F> {
    /// Builds from raw tables.  `dims[0]` must be 1 (the unit line) and the
    /// tensors must be closed under associativity; both are verified.
    pub fn from_raw(
        field: F,
        dims: Vec<usize>,
        mult: BTreeMap<(i64, i64), SparseMat<F>>,
        generated_in_degree_one: bool,
    ) -> Result<Self, Error> {
        if dims.is_empty() || dims[0] != 1 {
            return Err(Error::Invalid(
                "graded ring must have a one-dimensional degree-0 component".into(),
            ));
        }
        let top = dims.len() as i64 - 1;
        let ring = GradedRing {
            field,
            top,
            dims,
            mult,
            generated_in_degree_one,
        };
        for s1 in 1..=top {
            for s2 in 1..=(top - s1) {
                let m = ring.mult.get(&(s1, s2)).ok_or(Error::Invalid(
                    "missing multiplication tensor inside the window".into(),
                ))?;
                if m.rows() != ring.dim(s1 + s2) || m.cols() != ring.dim(s1) * ring.dim(s2) {
                    return Err(Error::DimensionMismatch {
                        context: "multiplication tensor shape",
                        expected: ring.dim(s1 + s2) * ring.dim(s1) * ring.dim(s2),
                        found: m.rows() * m.cols(),
                    });
                }
            }
        }
        ring.check_associativity()?;
        if ring.generated_in_degree_one {
            ring.check_degree_one_generation()?;
        }
        Ok(ring)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn top(&self) -> i64 {
        self.top
    }

    pub fn generated_in_degree_one(&self) -> bool {
        self.generated_in_degree_one
    }

    /// Dimension of `A_s`; zero outside `[0, top]`.
    pub fn dim(&self, s: i64) -> usize {
        if (0..=self.top).contains(&s) {
            self.dims[s as usize]
        } else {
            0
        }
    }

    /// The multiplication tensor for positive degrees, `None` when the
    /// product degree is truncated away.
    pub fn mult_map(&self, s1: i64, s2: i64) -> Option<&SparseMat<F>> {
        self.mult.get(&(s1, s2))
    }

    /// Product of basis elements, as a sparse vector in the `A_{s1+s2}`
    /// basis.  Empty when the product degree exceeds the window.
    pub fn mul_basis(&self, s1: i64, i: usize, s2: i64, j: usize) -> Vec<(usize, F::Elem)> {
        let Some(m) = self.mult.get(&(s1, s2)) else {
            return Vec::new();
        };
        let col = i * self.dim(s2) + j;
        m.entries()
            .filter(|&(_, c, _)| c == col)
            .map(|(r, _, v)| (r, v.clone()))
            .collect()
    }

    /// `(a b) c = a (b c)` on all basis triples within the window.
    pub fn check_associativity(&self) -> Result<(), Error> {
        let f = &self.field;
        for s1 in 1..=self.top {
            for s2 in 1..=(self.top - s1) {
                for s3 in 1..=(self.top - s1 - s2) {
                    let out_dim = self.dim(s1 + s2 + s3);
                    for i in 0..self.dim(s1) {
                        for j in 0..self.dim(s2) {
                            for l in 0..self.dim(s3) {
                                let mut lhs = vec![f.zero(); out_dim];
                                for (p, v) in self.mul_basis(s1, i, s2, j) {
                                    for (r, w) in self.mul_basis(s1 + s2, p, s3, l) {
                                        lhs[r] = f.axpy(&lhs[r], &v, &w);
                                    }
                                }
                                let mut rhs = vec![f.zero(); out_dim];
                                for (p, v) in self.mul_basis(s2, j, s3, l) {
                                    for (r, w) in self.mul_basis(s1, i, s2 + s3, p) {
                                        rhs[r] = f.axpy(&rhs[r], &v, &w);
                                    }
                                }
                                if lhs != rhs {
                                    return Err(Error::Invalid(
                                        "ring multiplication is not associative".into(),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn check_degree_one_generation(&self) -> Result<(), Error> {
        for s in 1..self.top {
            let Some(m) = self.mult.get(&(1, s)) else {
                continue;
            };
            if m.rank() < self.dim(s + 1) {
                return Err(Error::Invalid(
                    "ring is not generated in degree one".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Exponent tuples of total degree `d` in `n` variables, lexicographically
/// descending, so x^2 > xy > y^2.  This is the monomial basis order.
fn exponents_desc(n: usize, d: u32) -> Vec<Vec<u32>> {
    if n == 1 {
        return vec![vec![d]];
    }
    let mut out = Vec::new();
    for first in (0..=d).rev() {
        for mut rest in exponents_desc(n - 1, d - first) {
            let mut e = Vec::with_capacity(n);
            e.push(first);
            e.append(&mut rest);
            out.push(e);
        }
    }
    out
}

/// The polynomial ring on `num_vars` variables, truncated at `t_max`, with
/// the lexicographically descending monomial basis in each degree.
pub fn build_polynomial_ring<F: Field>(field: F, num_vars: usize, t_max: i64) -> GradedRing<F> {
    assert!(num_vars >= 1, "polynomial ring needs a variable");
    assert!(t_max >= 0);
    let mut bases: Vec<Vec<Vec<u32>>> = Vec::new();
    let mut lookup: Vec<BTreeMap<Vec<u32>, usize>> = Vec::new();
    for d in 0..=t_max as u32 {
        let basis = exponents_desc(num_vars, d);
        lookup.push(basis.iter().cloned().zip(0..).collect());
        bases.push(basis);
    }
    let dims: Vec<usize> = bases.iter().map(Vec::len).collect();
    let mut mult = BTreeMap::new();
    for s1 in 1..=t_max {
        for s2 in 1..=(t_max - s1) {
            let (n1, n2) = (dims[s1 as usize], dims[s2 as usize]);
            let mut triplets = Vec::new();
            for (i, e1) in bases[s1 as usize].iter().enumerate() {
                for (j, e2) in bases[s2 as usize].iter().enumerate() {
                    let prod: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                    let r = lookup[(s1 + s2) as usize][&prod];
                    triplets.push((r, i * n2 + j, field.one()));
                }
            }
            let m = SparseMat::from_triplets(
                field.clone(),
                dims[(s1 + s2) as usize],
                n1 * n2,
                triplets,
            )
            .unwrap();
            mult.insert((s1, s2), m);
        }
    }
    GradedRing {
        field,
        top: t_max,
        dims,
        mult,
        generated_in_degree_one: true,
    }
}

/// A graded module over a [`GradedRing`], truncated to `[floor, top]`.
///
/// `action[(d, s)]` is `A_d (x) M_s -> M_{d+s}` with columns indexed by
/// `i * dim M_s + j`, present exactly when `d >= 1`, `s >= floor`, and
/// `d + s <= top`.  Degree-0 action is the implicit identity.
#[derive(Clone, Debug)]
pub struct GradedModule<F: Field> {
    field: F,
    floor: i64,
    top: i64,
    dims: Vec<usize>,
    action: BTreeMap<(i64, i64), SparseMat<F>>,
}

impl<F: Field> GradedModule<F> {
    pub fn from_raw(
        ring: &GradedRing<F>,
        floor: i64,
        dims: Vec<usize>,
        action: BTreeMap<(i64, i64), SparseMat<F>>,
    ) -> Result<Self, Error> {
        let top = floor + dims.len() as i64 - 1;
        let module = GradedModule {
            field: ring.field().clone(),
            floor,
            top,
            dims,
            action,
        };
        for d in 1..=(top - floor) {
            for s in floor..=(top - d) {
                let m = module.action.get(&(d, s)).ok_or(Error::Invalid(
                    "missing action tensor inside the window".into(),
                ))?;
                if m.rows() != module.dim(d + s) || m.cols() != ring.dim(d) * module.dim(s) {
                    return Err(Error::DimensionMismatch {
                        context: "action tensor shape",
                        expected: module.dim(d + s) * ring.dim(d) * module.dim(s),
                        found: m.rows() * m.cols(),
                    });
                }
            }
        }
        module.check_action_associativity(ring)?;
        Ok(module)
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn floor(&self) -> i64 {
        self.floor
    }

    pub fn top(&self) -> i64 {
        self.top
    }

    /// Dimension of `M_s`; zero outside `[floor, top]`.
    pub fn dim(&self, s: i64) -> usize {
        if (self.floor..=self.top).contains(&s) {
            self.dims[(s - self.floor) as usize]
        } else {
            0
        }
    }

    pub fn action_map(&self, d: i64, s: i64) -> Option<&SparseMat<F>> {
        self.action.get(&(d, s))
    }

    /// Action of a ring basis element on a module vector:
    /// `(basis i of A_d) . v` for `v` in `M_s` coordinates.
    pub fn act_vec(&self, d: i64, i: usize, s: i64, v: &[F::Elem]) -> Vec<F::Elem> {
        let f = &self.field;
        let out_dim = self.dim(d + s);
        let mut out = vec![f.zero(); out_dim];
        let Some(m) = self.action.get(&(d, s)) else {
            return out;
        };
        let ms = self.dim(s);
        debug_assert_eq!(v.len(), ms);
        for (r, c, e) in m.entries() {
            if c / ms == i && !f.is_zero(&v[c % ms]) {
                out[r] = f.axpy(&out[r], e, &v[c % ms]);
            }
        }
        out
    }

    /// `(a b) m = a (b m)` on all basis triples within the window.
    pub fn check_action_associativity(&self, ring: &GradedRing<F>) -> Result<(), Error> {
        let f = &self.field;
        for d1 in 1..=(self.top - self.floor) {
            for d2 in 1..=(self.top - self.floor - d1) {
                for s in self.floor..=(self.top - d1 - d2) {
                    for i in 0..ring.dim(d1) {
                        for j in 0..ring.dim(d2) {
                            for l in 0..self.dim(s) {
                                let mut unit = vec![f.zero(); self.dim(s)];
                                unit[l] = f.one();
                                // a (b m)
                                let bm = self.act_vec(d2, j, s, &unit);
                                let rhs = self.act_vec(d1, i, d2 + s, &bm);
                                // (a b) m
                                let out_dim = self.dim(d1 + d2 + s);
                                let mut lhs = vec![f.zero(); out_dim];
                                for (p, v) in ring.mul_basis(d1, i, d2, j) {
                                    let pm = self.act_vec(d1 + d2, p, s, &unit);
                                    for (r, w) in pm.iter().enumerate() {
                                        if !f.is_zero(w) {
                                            lhs[r] = f.axpy(&lhs[r], &v, w);
                                        }
                                    }
                                }
                                if lhs != rhs {
                                    return Err(Error::Invalid(
                                        "module action is not associative".into(),
                                    ));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// The free module `A^rank` with generators in degree 0, truncated to
/// `[floor, top]`.  Basis order in degree s: generator-major, so basis
/// element `r * dim A_s + i` is (generator r) * (monomial i).
pub fn build_free_module<F: Field>(
    ring: &GradedRing<F>,
    rank: usize,
    floor: i64,
    top: i64,
) -> GradedModule<F> {
    assert!(floor >= 0 && top <= ring.top() && floor <= top);
    let field = ring.field().clone();
    let dims: Vec<usize> = (floor..=top).map(|s| rank * ring.dim(s)).collect();
    let mut action = BTreeMap::new();
    for d in 1..=(top - floor) {
        for s in floor..=(top - d) {
            let (na, ms, mo) = (ring.dim(d), rank * ring.dim(s), rank * ring.dim(d + s));
            let mut triplets = Vec::new();
            if let Some(mult) = ring.mult_map(d, s) {
                for (r, c, v) in mult.entries() {
                    let (i, j) = (c / ring.dim(s), c % ring.dim(s));
                    for g in 0..rank {
                        triplets.push((
                            g * ring.dim(d + s) + r,
                            i * ms + (g * ring.dim(s) + j),
                            v.clone(),
                        ));
                    }
                }
            } else if s == 0 {
                // Degree-0 module component: the action is multiplication by
                // the unit times the monomial, i.e. the identity pairing.
                for i in 0..na {
                    for g in 0..rank {
                        triplets.push((g * ring.dim(d) + i, i * ms + g, field.one()));
                    }
                }
            }
            let m = SparseMat::from_triplets(field.clone(), mo, na * ms, triplets).unwrap();
            action.insert((d, s), m);
        }
    }
    GradedModule {
        field,
        floor,
        top,
        dims,
        action,
    }
}

/// Hilbert values on a window `[a, top]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HilbertData {
    a: i64,
    values: Vec<usize>,
}

impl HilbertData {
    /// `values[i]` is `h(a + i)`.  Each value must fit inside the module:
    /// `h(s) <= dim M_s`.
    pub fn new<F: Field>(
        a: i64,
        values: Vec<usize>,
        module: &GradedModule<F>,
    ) -> Result<Self, Error> {
        if a < module.floor() {
            return Err(Error::Invalid(
                "hilbert window starts below the module floor".into(),
            ));
        }
        for (i, &h) in values.iter().enumerate() {
            let s = a + i as i64;
            if h > module.dim(s) {
                return Err(Error::HilbertExceedsModule { degree: s });
            }
        }
        Ok(HilbertData { a, values })
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn top(&self) -> i64 {
        self.a + self.values.len() as i64 - 1
    }

    /// `h(s)`; zero outside the window.
    pub fn h(&self, s: i64) -> usize {
        if (self.a..=self.top()).contains(&s) {
            self.values[(s - self.a) as usize]
        } else {
            0
        }
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    /// Restriction to a smaller ceiling.
    pub fn truncate(&self, new_top: i64) -> HilbertData {
        assert!((self.a..=self.top()).contains(&new_top));
        HilbertData {
            a: self.a,
            values: self.values[..=(new_top - self.a) as usize].to_vec(),
        }
    }
}

/// An explicit graded submodule `S <= M`: one basis matrix per degree, whose
/// columns are independent vectors of `M_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubmodulePoint<F: Field> {
    a: i64,
    basis: Vec<SparseMat<F>>,
}

impl<F: Field> SubmodulePoint<F> {
    pub fn new(a: i64, basis: Vec<SparseMat<F>>) -> Self {
        SubmodulePoint { a, basis }
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn top(&self) -> i64 {
        self.a + self.basis.len() as i64 - 1
    }

    /// Basis matrix of `S_s` (columns), `None` outside the window.
    pub fn basis(&self, s: i64) -> Option<&SparseMat<F>> {
        if (self.a..=self.top()).contains(&s) {
            Some(&self.basis[(s - self.a) as usize])
        } else {
            None
        }
    }

    pub fn dim(&self, s: i64) -> usize {
        self.basis(s).map_or(0, SparseMat::cols)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.basis.iter().map(SparseMat::cols).collect()
    }

    /// Checks `A_d . S_s <= S_{s+d}` for every degree pair in the window
    /// (only `d = 1` when the ring is generated in degree one).  The error
    /// names the first violating degree and basis column.
    pub fn check_closed(
        &self,
        ring: &GradedRing<F>,
        module: &GradedModule<F>,
    ) -> Result<(), Error> {
        let max_d = if ring.generated_in_degree_one() {
            1
        } else {
            self.top() - self.a
        };
        for d in 1..=max_d {
            for s in self.a..=(self.top() - d) {
                let b = &self.basis[(s - self.a) as usize];
                let target = &self.basis[(s + d - self.a) as usize];
                let base_rank = target.rank();
                for i in 0..ring.dim(d) {
                    for j in 0..b.cols() {
                        let img = module.act_vec(d, i, s, &b.col(j));
                        let img_mat =
                            SparseMat::from_cols(self.field(module), module.dim(s + d), &[img]);
                        if target.hstack(&img_mat)?.rank() > base_rank {
                            return Err(Error::NotClosed {
                                degree: s + d,
                                column: j,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn field<'a>(&self, module: &'a GradedModule<F>) -> F {
        module.field().clone()
    }

    /// Checks column independence and, against `h`, the fiber dimensions.
    pub fn check_dims(&self, h: &HilbertData) -> Result<(), Error> {
        for s in self.a..=self.top() {
            let b = &self.basis[(s - self.a) as usize];
            if b.rank() != b.cols() {
                return Err(Error::Invalid(
                    "submodule basis columns are dependent".into(),
                ));
            }
            if b.cols() != h.h(s) {
                return Err(Error::WrongFiberDimension {
                    degree: s,
                    expected: h.h(s),
                    found: b.cols(),
                });
            }
        }
        Ok(())
    }
}

/// The `A_+`-submodule of `M` generated by a seed subspace of `M_a`,
/// computed degree by degree: component `s` is the span of all
/// `A_d . (component s-d)` together with the seed at `s = a`.
///
/// Returns the exact dimension profile and the submodule with canonical
/// (column-reduced) bases.
pub fn generated_submodule<F: Field>(
    seed: &SparseMat<F>,
    ring: &GradedRing<F>,
    module: &GradedModule<F>,
    a: i64,
    top: i64,
) -> (Vec<usize>, SubmodulePoint<F>) {
    let f = module.field().clone();
    let mut basis: Vec<SparseMat<F>> = Vec::new();
    for s in a..=top {
        let mut cols: Vec<Vec<F::Elem>> = Vec::new();
        if s == a {
            for j in 0..seed.cols() {
                cols.push(seed.col(j));
            }
        }
        for d in 1..=(s - a) {
            let lower = &basis[(s - d - a) as usize];
            for i in 0..ring.dim(d) {
                for j in 0..lower.cols() {
                    cols.push(module.act_vec(d, i, s - d, &lower.col(j)));
                }
            }
        }
        let raw = SparseMat::from_cols(f.clone(), module.dim(s), &cols);
        basis.push(raw.column_reduced());
    }
    let point = SubmodulePoint::new(a, basis);
    (point.dims(), point)
}

/// Generation-surjectivity profile: `dim S_s = h(s)` at every window degree
/// and `A_1 . S_s` spans `S_{s+1}` for every `s` up to the ceiling.
pub fn check_a_regular_profile<F: Field>(
    sub: &SubmodulePoint<F>,
    h: &HilbertData,
    ring: &GradedRing<F>,
    module: &GradedModule<F>,
) -> bool {
    for s in sub.a()..=sub.top() {
        if sub.dim(s) != h.h(s) {
            return false;
        }
    }
    let f = module.field().clone();
    for s in sub.a()..sub.top() {
        let b = sub.basis(s).unwrap();
        let mut cols = Vec::new();
        for i in 0..ring.dim(1) {
            for j in 0..b.cols() {
                cols.push(module.act_vec(1, i, s, &b.col(j)));
            }
        }
        let image = SparseMat::from_cols(f.clone(), module.dim(s + 1), &cols);
        if image.rank() != sub.dim(s + 1) {
            return false;
        }
    }
    true
}

/// Coordinates for the quotient `M_s / S_s`: a complement of `S_s` spanned
/// by standard basis vectors, selected canonically from the echelon form of
/// the submodule basis.
struct QuotientChart<F: Field> {
    /// Standard basis positions spanning the complement.
    free_rows: Vec<usize>,
    /// (dim M_s) x (dim M_s) inverse of [S-basis | complement]: top rows give
    /// S-coordinates, bottom rows quotient coordinates.
    inverse: SparseMat<F>,
    sub_dim: usize,
}

impl<F: Field> QuotientChart<F> {
    fn new(field: &F, sub_basis: &SparseMat<F>, ambient_dim: usize) -> Self {
        let rref = sub_basis.transpose().rref();
        let mut is_pivot = vec![false; ambient_dim];
        for &c in &rref.pivot_cols {
            is_pivot[c] = true;
        }
        let free_rows: Vec<usize> = (0..ambient_dim).filter(|&r| !is_pivot[r]).collect();
        let mut cols: Vec<Vec<F::Elem>> = Vec::new();
        for j in 0..sub_basis.cols() {
            cols.push(sub_basis.col(j));
        }
        for &r in &free_rows {
            let mut e = vec![field.zero(); ambient_dim];
            e[r] = field.one();
            cols.push(e);
        }
        let square = SparseMat::from_cols(field.clone(), ambient_dim, &cols);
        let inverse = square.inverse().expect("basis plus complement is a basis");
        QuotientChart {
            free_rows,
            inverse,
            sub_dim: sub_basis.cols(),
        }
    }

    fn quotient_dim(&self) -> usize {
        self.free_rows.len()
    }

    /// Splits `v in M_s` into (S-coordinates, quotient coordinates).
    fn split(&self, v: &[F::Elem]) -> (Vec<F::Elem>, Vec<F::Elem>) {
        let coords = self.inverse.mul_dense_vec(v).unwrap();
        let (s, q) = coords.split_at(self.sub_dim);
        (s.to_vec(), q.to_vec())
    }

    /// Lifts quotient coordinates to the complement inside `M_s`.
    fn lift(&self, field: &F, q: &[F::Elem], ambient_dim: usize) -> Vec<F::Elem> {
        let mut v = vec![field.zero(); ambient_dim];
        for (&r, x) in self.free_rows.iter().zip(q) {
            v[r] = x.clone();
        }
        v
    }
}

/// Dimension and basis of the degree-0 A-linear maps `S -> M/S` within the
/// window, computed as the kernel of the naturality system
/// `f_{s+1}(a x) = a f_s(x)` over all degree-1 ring elements.
///
/// The unknown vector stacks the matrices `f_s` (quotient dim x sub dim) in
/// degree order, each row-major by submodule basis column then quotient
/// coordinate.  Requires a ring generated in degree one.
pub fn hom_quotient_oracle<F: Field>(
    sub: &SubmodulePoint<F>,
    ring: &GradedRing<F>,
    module: &GradedModule<F>,
) -> (usize, SparseMat<F>) {
    assert!(
        ring.generated_in_degree_one(),
        "oracle needs a degree-one generated ring"
    );
    let f = module.field().clone();
    let a = sub.a();
    let top = sub.top();
    let mut charts: Vec<QuotientChart<F>> = Vec::new();
    let mut offsets: Vec<usize> = Vec::new();
    let mut total = 0usize;
    for s in a..=top {
        let chart = QuotientChart::new(&f, sub.basis(s).unwrap(), module.dim(s));
        offsets.push(total);
        total += chart.quotient_dim() * sub.dim(s);
        charts.push(chart);
    }
    let unknown = |s: i64, j: usize, i: usize| -> usize {
        let idx = (s - a) as usize;
        offsets[idx] + j * charts[idx].quotient_dim() + i
    };
    let mut triplets: Vec<(usize, usize, F::Elem)> = Vec::new();
    let mut row = 0usize;
    for s in a..top {
        let b = sub.basis(s).unwrap();
        let next_chart = &charts[(s + 1 - a) as usize];
        let q_next = next_chart.quotient_dim();
        for ai in 0..ring.dim(1) {
            for j in 0..b.cols() {
                // sigma: coordinates of (a x_j) in the S_{s+1} basis; the
                // quotient part must vanish for a closed submodule.
                let ax = module.act_vec(1, ai, s, &b.col(j));
                let (sigma, leak) = next_chart.split(&ax);
                assert!(
                    leak.iter().all(|v| f.is_zero(v)),
                    "submodule is not closed under the action"
                );
                // Rows: for each quotient coordinate of degree s+1, the
                // equation  sum_jp f_{s+1}[i, jp] sigma[jp]
                //         - (quotient part of a . lift(f_s[:, j])) [i] = 0.
                for i in 0..q_next {
                    for (jp, c) in sigma.iter().enumerate() {
                        if !f.is_zero(c) {
                            triplets.push((row + i, unknown(s + 1, jp, i), c.clone()));
                        }
                    }
                }
                // The action of a on each quotient basis vector of degree s.
                let chart = &charts[(s - a) as usize];
                for qi in 0..chart.quotient_dim() {
                    let mut e = vec![f.zero(); chart.quotient_dim()];
                    e[qi] = f.one();
                    let lifted = chart.lift(&f, &e, module.dim(s));
                    let acted = module.act_vec(1, ai, s, &lifted);
                    let (_, qpart) = next_chart.split(&acted);
                    for (i, v) in qpart.iter().enumerate() {
                        if !f.is_zero(v) {
                            triplets.push((row + i, unknown(s, j, qi), f.neg(v)));
                        }
                    }
                }
                row += q_next;
            }
        }
    }
    let system = SparseMat::from_triplets(f, row, total, triplets).unwrap();
    let (_, kernel) = system.rank_kernel();
    (kernel.cols(), kernel)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{PrimeField, Rationals};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ring_i1(top: i64) -> GradedRing<Rationals> {
        build_polynomial_ring(Rationals, 2, top)
    }

    fn ring_i2(top: i64) -> GradedRing<Rationals> {
        build_polynomial_ring(Rationals, 3, top)
    }

    #[test]
    fn polynomial_ring_dimensions() {
        assert_eq!(ring_i1(3).dims, vec![1, 2, 3, 4]);
        assert_eq!(build_polynomial_ring(Rationals, 1, 2).dims, vec![1, 1, 1]);
        assert_eq!(build_polynomial_ring(Rationals, 3, 2).dims, vec![1, 3, 6]);
    }

    #[test]
    fn polynomial_ring_is_associative_and_generated() {
        let r = ring_i1(4);
        assert!(r.check_associativity().is_ok());
        assert!(r.check_degree_one_generation().is_ok());
        let r3 = ring_i2(3);
        assert!(r3.check_associativity().is_ok());
    }

    #[test]
    fn monomial_order_is_lex_descending() {
        // Degree 2 in x, y: x^2, xy, y^2; so x*y lands at index 1.
        let r = ring_i1(2);
        let prod = r.mul_basis(1, 0, 1, 1);
        assert_eq!(prod, vec![(1, Rationals.one())]);
        // y*y at index 2.
        assert_eq!(r.mul_basis(1, 1, 1, 1), vec![(2, Rationals.one())]);
    }

    #[test]
    fn free_module_matches_ring() {
        let r = ring_i1(3);
        let m = build_free_module(&r, 1, 1, 3);
        assert_eq!(m.dim(1), 2);
        assert_eq!(m.dim(2), 3);
        assert_eq!(m.dim(3), 4);
        assert_eq!(m.dim(0), 0);
        assert!(m.check_action_associativity(&r).is_ok());
        let m2 = build_free_module(&r, 2, 1, 3);
        assert_eq!(m2.dim(2), 6);
    }

    #[test]
    fn hilbert_validation() {
        let r = ring_i1(3);
        let m = build_free_module(&r, 1, 1, 3);
        assert!(HilbertData::new(1, vec![1, 2, 3], &m).is_ok());
        // Equality with the module dimension is allowed.
        assert!(HilbertData::new(1, vec![2, 3, 4], &m).is_ok());
        let err = HilbertData::new(1, vec![3, 2, 3], &m).unwrap_err();
        assert!(matches!(err, Error::HilbertExceedsModule { degree: 1 }));
    }

    fn seed_x(f: &Rationals, m: &GradedModule<Rationals>) -> SparseMat<Rationals> {
        // x is monomial index 0 of degree 1.
        let mut col = vec![f.zero(); m.dim(1)];
        col[0] = f.one();
        SparseMat::from_cols(f.clone(), m.dim(1), &[col])
    }

    #[test]
    fn generated_submodule_of_x() {
        let f = Rationals;
        let r = ring_i1(3);
        let m = build_free_module(&r, 1, 1, 3);
        let (dims, sub) = generated_submodule(&seed_x(&f, &m), &r, &m, 1, 3);
        assert_eq!(dims, vec![1, 2, 3]);
        assert!(sub.check_closed(&r, &m).is_ok());
    }

    #[test]
    fn generated_submodule_of_zero_seed() {
        let f = Rationals;
        let r = ring_i1(3);
        let m = build_free_module(&r, 1, 1, 3);
        let empty = SparseMat::zero(f, m.dim(1), 0);
        let (dims, _) = generated_submodule(&empty, &r, &m, 1, 3);
        assert_eq!(dims, vec![0, 0, 0]);
    }

    #[test]
    fn generated_submodule_of_two_planes() {
        // Seed {y, z} in three variables: complements the powers of x.
        let f = Rationals;
        let r = ring_i2(3);
        let m = build_free_module(&r, 1, 1, 3);
        let mut y = vec![f.zero(); 3];
        y[1] = f.one();
        let mut z = vec![f.zero(); 3];
        z[2] = f.one();
        let seed = SparseMat::from_cols(f.clone(), 3, &[y, z]);
        let (dims, _) = generated_submodule(&seed, &r, &m, 1, 3);
        assert_eq!(dims, vec![2, 5, 9]);
    }

    #[test]
    fn closure_check_reports_degree_and_column() {
        let f = Rationals;
        let r = ring_i1(2);
        let m = build_free_module(&r, 1, 1, 2);
        // S_1 = span{x}, S_2 = 0: x*x escapes.
        let sub = SubmodulePoint::new(1, vec![seed_x(&f, &m), SparseMat::zero(f, m.dim(2), 0)]);
        let err = sub.check_closed(&r, &m).unwrap_err();
        assert!(matches!(err, Error::NotClosed { degree: 2, column: 0 }));
    }

    #[test]
    fn regular_profile_on_point_ideal() {
        let f = Rationals;
        let r = ring_i1(4);
        let m = build_free_module(&r, 1, 1, 4);
        let (_, sub) = generated_submodule(&seed_x(&f, &m), &r, &m, 1, 4);
        let h = HilbertData::new(1, vec![1, 2, 3, 4], &m).unwrap();
        assert!(check_a_regular_profile(&sub, &h, &r, &m));
        // Wrong fiber dimension at the top.
        let h_bad = HilbertData::new(1, vec![1, 2, 3, 3], &m).unwrap();
        assert!(!check_a_regular_profile(&sub, &h_bad, &r, &m));
    }

    #[test]
    fn regular_profile_in_higher_floor() {
        // Window [2, 3] with S_2 = all of degree 2: generation fills degree 3.
        let f = Rationals;
        let r = ring_i1(3);
        let m = build_free_module(&r, 1, 2, 3);
        let seed = SparseMat::identity(f.clone(), 3);
        let (dims, sub) = generated_submodule(&seed, &r, &m, 2, 3);
        assert_eq!(dims, vec![3, 4]);
        let h_full = HilbertData::new(2, vec![3, 4], &m).unwrap();
        assert!(check_a_regular_profile(&sub, &h_full, &r, &m));
        // h(3) = 3 contradicts the generated dimension 4.
        let h_small = HilbertData::new(2, vec![3, 3], &m).unwrap();
        assert!(!check_a_regular_profile(&sub, &h_small, &r, &m));
    }

    #[test]
    fn full_module_profile_is_regular() {
        let f = Rationals;
        let r = ring_i1(3);
        let m = build_free_module(&r, 1, 1, 3);
        let basis: Vec<SparseMat<Rationals>> =
            (1..=3).map(|s| SparseMat::identity(f.clone(), m.dim(s))).collect();
        let sub = SubmodulePoint::new(1, basis);
        let h = HilbertData::new(1, vec![2, 3, 4], &m).unwrap();
        assert!(check_a_regular_profile(&sub, &h, &r, &m));
        // And the quotient is zero, so the oracle finds nothing.
        let (dim, _) = hom_quotient_oracle(&sub, &r, &m);
        assert_eq!(dim, 0);
    }

    #[test]
    fn hom_quotient_on_point_of_the_line() {
        // S = (x) inside two variables: maps S -> M/S correspond to the
        // degree-1 part of the quotient ring in the remaining variable.
        let f = Rationals;
        let r = ring_i1(4);
        let m = build_free_module(&r, 1, 1, 4);
        let (_, sub) = generated_submodule(&seed_x(&f, &m), &r, &m, 1, 4);
        let (dim, _) = hom_quotient_oracle(&sub, &r, &m);
        assert_eq!(dim, 1);
    }

    #[test]
    fn hom_quotient_on_point_of_the_plane() {
        let f = Rationals;
        let r = ring_i2(3);
        let m = build_free_module(&r, 1, 1, 3);
        let mut y = vec![f.zero(); 3];
        y[1] = f.one();
        let mut z = vec![f.zero(); 3];
        z[2] = f.one();
        let seed = SparseMat::from_cols(f.clone(), 3, &[y, z]);
        let (_, sub) = generated_submodule(&seed, &r, &m, 1, 3);
        let (dim, _) = hom_quotient_oracle(&sub, &r, &m);
        assert_eq!(dim, 2);
    }

    #[test]
    fn hom_quotient_is_basis_independent() {
        use rand::RngCore;
        let f = Rationals;
        let r = ring_i1(3);
        let m = build_free_module(&r, 1, 1, 3);
        let (_, sub) = generated_submodule(&seed_x(&f, &m), &r, &m, 1, 3);
        let (dim0, _) = hom_quotient_oracle(&sub, &r, &m);
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10 {
            // Random invertible change of basis per degree.
            let mut basis = Vec::new();
            for s in 1..=3 {
                let b = sub.basis(s).unwrap();
                let n = b.cols();
                let g = loop {
                    let mut data = Vec::new();
                    for _ in 0..n {
                        let mut rowv = Vec::new();
                        for _ in 0..n {
                            rowv.push(f.from_i64((rng.next_u32() % 7) as i64 - 3));
                        }
                        data.push(rowv);
                    }
                    let cand = SparseMat::from_dense(f.clone(), &data);
                    if cand.rank() == n {
                        break cand;
                    }
                };
                basis.push(b.mul(&g).unwrap());
            }
            let moved = SubmodulePoint::new(1, basis);
            let (dim, _) = hom_quotient_oracle(&moved, &r, &m);
            assert_eq!(dim, dim0);
        }
    }

    #[test]
    fn hom_quotient_stabilizes_along_the_window() {
        let f = Rationals;
        let mut dims = Vec::new();
        for t in 1..=5 {
            let r = ring_i1(t);
            let m = build_free_module(&r, 1, 1, t);
            let (_, sub) = generated_submodule(&seed_x(&f, &m), &r, &m, 1, t);
            let (dim, _) = hom_quotient_oracle(&sub, &r, &m);
            dims.push(dim);
        }
        // Non-increasing in the ceiling and eventually constant.
        for w in dims.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(dims, vec![1, 1, 1, 1, 1]);
    }

    #[test]
    fn oracle_works_over_prime_fields() {
        let f = PrimeField::new(2);
        let r = build_polynomial_ring(f.clone(), 2, 3);
        let m = build_free_module(&r, 1, 1, 3);
        let mut col = vec![f.zero(); 2];
        col[0] = f.one();
        let seed = SparseMat::from_cols(f.clone(), 2, &[col]);
        let (dims, sub) = generated_submodule(&seed, &r, &m, 1, 3);
        assert_eq!(dims, vec![1, 2, 3]);
        let (dim, _) = hom_quotient_oracle(&sub, &r, &m);
        assert_eq!(dim, 1);
    }
}
