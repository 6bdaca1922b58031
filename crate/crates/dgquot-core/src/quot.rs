//! Gauge symmetry, invariant coordinates, rank stratification, and the
//! finite-field comparisons between the three quotient loci.
//!
//! The gauge group is the product of GL(h(s)) over the window degrees,
//! acting on a strict degree-1 pair (phi, psi) on the right: phi inputs are
//! twisted by g, phi outputs by g^{-1}, and psi is pre-composed with g.
//! Orbits of Maurer-Cartan pairs with injective psi are classical points of
//! the quotient; we enumerate them over a prime field by listing chains of
//! subspaces in reduced column echelon form, one canonical representative
//! per orbit, so "counting up to gauge" is literal counting.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::RngCore;

use crate::dgla::{Elt, Sort, StretchAlgebra};
use crate::error::Error;
use crate::graded::{generated_submodule, GradedModule, GradedRing, HilbertData, SubmodulePoint};
use crate::index::{compositions, MixedRadix};
use crate::matrix::SparseMat;
use crate::scalar::Field;

/// One element of the gauge group: an invertible block per window degree.
#[derive(Clone, Debug)]
pub struct GroupElement<F: Field> {
    a: i64,
    /// (g_s, g_s^{-1}) for s = a..=t.
    blocks: Vec<(SparseMat<F>, SparseMat<F>)>,
}

impl<F: Field> GroupElement<F> {
    /// Wraps per-degree blocks for s = a, a+1, ...; fails on a singular
    /// block.
    pub fn from_blocks(a: i64, blocks: Vec<SparseMat<F>>) -> Result<Self, Error> {
        let mut out = Vec::with_capacity(blocks.len());
        for (i, b) in blocks.into_iter().enumerate() {
            let inv = b.inverse().ok_or(Error::NonInvertibleBlock {
                degree: a + i as i64,
            })?;
            out.push((b, inv));
        }
        Ok(GroupElement { a, blocks: out })
    }

    pub fn identity(field: &F, h: &HilbertData, a: i64, t: i64) -> Self {
        let blocks = (a..=t)
            .map(|s| {
                let id = SparseMat::identity(field.clone(), h.h(s));
                (id.clone(), id)
            })
            .collect();
        GroupElement { a, blocks }
    }

    /// Identity below `lo`, uniformly random invertible blocks on [lo, t].
    pub fn random(
        field: &F,
        h: &HilbertData,
        a: i64,
        t: i64,
        lo: i64,
        rng: &mut dyn RngCore,
    ) -> Self {
        let mut blocks = Vec::with_capacity((t - a + 1) as usize);
        for s in a..=t {
            let n = h.h(s);
            if s < lo {
                let id = SparseMat::identity(field.clone(), n);
                blocks.push((id.clone(), id));
                continue;
            }
            loop {
                let mut entries = Vec::new();
                for r in 0..n {
                    for c in 0..n {
                        let v = field.sample(rng);
                        if !field.is_zero(&v) {
                            entries.push((r, c, v));
                        }
                    }
                }
                let m = SparseMat::from_triplets(field.clone(), n, n, entries).unwrap();
                if let Some(inv) = m.inverse() {
                    blocks.push((m, inv));
                    break;
                }
            }
        }
        GroupElement { a, blocks }
    }

    pub fn a(&self) -> i64 {
        self.a
    }

    pub fn top(&self) -> i64 {
        self.a + self.blocks.len() as i64 - 1
    }

    pub fn block(&self, s: i64) -> &SparseMat<F> {
        &self.blocks[(s - self.a) as usize].0
    }

    pub fn block_inverse(&self, s: i64) -> &SparseMat<F> {
        &self.blocks[(s - self.a) as usize].1
    }

    /// Pointwise product (self * other)_s = self_s * other_s.
    pub fn compose(&self, other: &Self) -> Self {
        assert_eq!(self.a, other.a);
        assert_eq!(self.blocks.len(), other.blocks.len());
        let blocks = self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|((g1, g1i), (g2, g2i))| {
                (g1.mul(g2).unwrap(), g2i.mul(g1i).unwrap())
            })
            .collect();
        GroupElement { a: self.a, blocks }
    }
}

/// Kronecker product with the usual row-major index pairing:
/// entry ((ra, rb), (ca, cb)) = a[ra,ca] * b[rb,cb].
fn kron<F: Field>(a: &SparseMat<F>, b: &SparseMat<F>) -> SparseMat<F> {
    let f = a.field().clone();
    let mut entries = Vec::new();
    for (ra, ca, va) in a.entries() {
        for (rb, cb, vb) in b.entries() {
            entries.push((ra * b.rows() + rb, ca * b.cols() + cb, f.mul(va, vb)));
        }
    }
    SparseMat::from_triplets(f, a.rows() * b.rows(), a.cols() * b.cols(), entries).unwrap()
}

fn kron_identity_left<F: Field>(field: &F, n: usize, m: &SparseMat<F>) -> SparseMat<F> {
    kron(&SparseMat::identity(field.clone(), n), m)
}

/// Right action of the gauge group on a strict degree-1 element.
/// Non-phi/psi coefficients pass through untouched.
pub fn act<F: Field>(alg: &StretchAlgebra<F>, g: &GroupElement<F>, gamma: &Elt<F>) -> Elt<F> {
    assert_eq!(gamma.k, 1, "the action is defined on degree-1 pairs");
    let mut out = gamma.clone();
    for comp in alg.components(1) {
        match comp.sort {
            Sort::Phi => {
                let s_in = comp.profile[1];
                let s = comp.s_out;
                let m = alg.component_matrix(gamma, comp);
                let twisted = g
                    .block_inverse(s)
                    .mul(&m)
                    .unwrap()
                    .mul(&kron_identity_left(alg.field(), comp.in_dims[0], g.block(s_in)))
                    .unwrap();
                alg.set_component_matrix(&mut out, comp, &twisted);
            }
            Sort::Psi => {
                let s = comp.profile[0];
                let m = alg.component_matrix(gamma, comp);
                let twisted = m.mul(g.block(s)).unwrap();
                alg.set_component_matrix(&mut out, comp, &twisted);
            }
            _ => {}
        }
    }
    out
}

/// The three nested rank conditions cutting out the quotient loci.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LocusFlags {
    /// psi_s injective for every window degree.
    pub in_m: bool,
    /// psi_s injective for s in [a, b] only.
    pub in_v: bool,
    /// in_m plus surjectivity of every phi step out of degrees >= b.
    pub in_x: bool,
}

fn psi_rank<F: Field>(alg: &StretchAlgebra<F>, gamma: &Elt<F>, s: i64) -> usize {
    match alg.component(Sort::Psi, 1, s, &[s]) {
        Some(c) => alg.component_matrix(gamma, c).rank(),
        None => 0,
    }
}

fn phi_matrix<F: Field>(alg: &StretchAlgebra<F>, gamma: &Elt<F>, d: i64, s_in: i64) -> SparseMat<F> {
    match alg.component(Sort::Phi, 1, s_in + d, &[d, s_in]) {
        Some(c) => alg.component_matrix(gamma, c),
        None => SparseMat::zero(
            alg.field().clone(),
            alg.h().h(s_in + d),
            alg.ring().dim(d) * alg.h().h(s_in),
        ),
    }
}

pub fn rank_locus_predicates<F: Field>(
    alg: &StretchAlgebra<F>,
    gamma: &Elt<F>,
    b: i64,
) -> LocusFlags {
    let (a, t) = alg.window();
    assert!((a..=t).contains(&b));
    let h = alg.h();
    let injective = |s: i64| psi_rank(alg, gamma, s) == h.h(s);
    let in_v = (a..=b).all(injective);
    let in_m = in_v && ((b + 1)..=t).all(injective);
    let mut surjective = true;
    'surj: for s_in in b..t {
        if s_in < a {
            continue;
        }
        for s in (s_in + 1)..=t {
            if phi_matrix(alg, gamma, s - s_in, s_in).rank() != h.h(s) {
                surjective = false;
                break 'surj;
            }
        }
    }
    LocusFlags {
        in_m,
        in_v,
        in_x: in_m && surjective,
    }
}

/// The composite-map coordinates of the algebraic quotient: for every ring
/// degree profile (s_1..s_k), start s' <= b, and end s = s' + sum > b, the
/// matrix of psi_s . phi(s_1) . ... . phi(s_k) on A_{s_1} x..x A_{s_k} x
/// S_{s'}, indexed row-major with the S factor fastest.
#[derive(Clone, Debug)]
pub struct InvariantCoordinates<F: Field> {
    pub b: i64,
    /// Keyed by (ring degree profile, s'); the end degree is determined.
    pub coords: BTreeMap<(Vec<i64>, i64), SparseMat<F>>,
}

/// The nested composite for one profile; defined for any strict degree-1
/// element, Maurer-Cartan or not.
pub fn coordinate_matrix<F: Field>(
    alg: &StretchAlgebra<F>,
    gamma: &Elt<F>,
    profile: &[i64],
    s_prime: i64,
) -> SparseMat<F> {
    let f = alg.field().clone();
    let h = alg.h();
    assert!(!profile.is_empty() && profile.iter().all(|&d| d >= 1));
    let mut degree = s_prime;
    let mut composite = SparseMat::identity(f.clone(), h.h(s_prime));
    for &d in profile.iter().rev() {
        let step = phi_matrix(alg, gamma, d, degree);
        composite = step
            .mul(&kron_identity_left(&f, alg.ring().dim(d), &composite))
            .unwrap();
        degree += d;
    }
    let psi = match alg.component(Sort::Psi, 1, degree, &[degree]) {
        Some(c) => alg.component_matrix(gamma, c),
        None => SparseMat::zero(f, alg.module().dim(degree), h.h(degree)),
    };
    psi.mul(&composite).unwrap()
}

/// The same coordinate with the ring factors at `pos`, `pos+1` multiplied
/// in the ring first.  On Maurer-Cartan points this equals the nested
/// version; comparing the two is the order-independence check.
pub fn coordinate_collapsed_at<F: Field>(
    alg: &StretchAlgebra<F>,
    gamma: &Elt<F>,
    profile: &[i64],
    s_prime: i64,
    pos: usize,
) -> SparseMat<F> {
    assert!(pos + 1 < profile.len());
    let f = alg.field().clone();
    let mut merged: Vec<i64> = profile.to_vec();
    let d1 = merged[pos];
    let d2 = merged.remove(pos + 1);
    merged[pos] = d1 + d2;
    let coarse = coordinate_matrix(alg, gamma, &merged, s_prime);
    let mult = alg
        .ring()
        .mult_map(d1, d2)
        .cloned()
        .unwrap_or_else(|| SparseMat::zero(f.clone(), 0, alg.ring().dim(d1) * alg.ring().dim(d2)));
    let pre: usize = profile[..pos].iter().map(|&d| alg.ring().dim(d)).product();
    let post: usize = profile[pos + 2..]
        .iter()
        .map(|&d| alg.ring().dim(d))
        .product::<usize>()
        * alg.h().h(s_prime);
    let spread = kron(
        &SparseMat::identity(f.clone(), pre),
        &kron(&mult, &SparseMat::identity(f, post)),
    );
    coarse.mul(&spread).unwrap()
}

/// All coordinates at a Maurer-Cartan point.  A nonzero residual is an
/// error: the coordinates would depend on the nesting order.
pub fn invariant_coordinates<F: Field>(
    alg: &StretchAlgebra<F>,
    gamma: &Elt<F>,
    b: i64,
) -> Result<InvariantCoordinates<F>, Error> {
    let (a, t) = alg.window();
    assert!((a..=t).contains(&b));
    let residual = alg.mc_residual(gamma);
    if let Some((&idx, _)) = residual.coeffs.iter().next() {
        return Err(Error::ResidualNonzero {
            label: alg.label_of(2, idx).to_string(),
        });
    }
    let mut coords = BTreeMap::new();
    for s_prime in a..=b {
        for s in (b + 1)..=t {
            let total = s - s_prime;
            for k in 1..=(total as usize) {
                for profile in compositions(k, total, 1, total) {
                    let m = coordinate_matrix(alg, gamma, &profile, s_prime);
                    coords.insert((profile, s_prime), m);
                }
            }
        }
    }
    Ok(InvariantCoordinates { b, coords })
}

impl<F: Field> InvariantCoordinates<F> {
    /// Every coordinate factors through S at its end degree, so its rank is
    /// bounded by h there; this verifies the bound matrix by matrix.
    pub fn rank_bounds_hold(&self, h: &HilbertData) -> bool {
        self.coords.iter().all(|((profile, s_prime), m)| {
            let s = s_prime + profile.iter().sum::<i64>();
            m.rank() <= h.h(s)
        })
    }

    /// The open stratum: every coordinate at its maximal possible rank.
    pub fn geometric_locus(&self, h: &HilbertData) -> bool {
        self.coords.iter().all(|((profile, s_prime), m)| {
            let s = s_prime + profile.iter().sum::<i64>();
            m.rank() == h.h(s)
        })
    }
}

fn field_elements<F: Field>(field: &F) -> Vec<F::Elem> {
    let q = field
        .modulus()
        .expect("point enumeration requires a prime field");
    (0..q as i64).map(|i| field.from_i64(i)).collect()
}

fn combinations(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(d);
    fn rec(start: usize, n: usize, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == d {
            out.push(cur.clone());
            return;
        }
        let need = d - cur.len();
        for i in start..=(n - need) {
            cur.push(i);
            rec(i + 1, n, d, cur, out);
            cur.pop();
        }
    }
    if d <= n {
        rec(0, n, d, &mut cur, &mut out);
    }
    out
}

/// Every d-dimensional subspace of F_q^n, one reduced-column-echelon basis
/// each: pivot rows ascending, unit at the pivot, the remaining freedom in
/// the non-pivot rows below.  Deterministic order: pivot sets
/// lexicographically, then free entries in counter order.
pub fn all_subspaces<F: Field>(field: &F, n: usize, d: usize) -> Vec<SparseMat<F>> {
    let elems = field_elements(field);
    let q = elems.len();
    let mut out = Vec::new();
    for pivots in combinations(n, d) {
        let mut is_pivot = alloc::vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<(usize, usize)> = (0..d)
            .flat_map(|j| {
                let p = pivots[j];
                let is_pivot = &is_pivot;
                ((p + 1)..n)
                    .filter(move |&r| !is_pivot[r])
                    .map(move |r| (r, j))
            })
            .collect();
        let counter = MixedRadix::new(alloc::vec![q; free.len()]);
        for idx in 0..counter.len() {
            let digits = counter.digits_of(idx);
            let mut entries: Vec<(usize, usize, F::Elem)> = pivots
                .iter()
                .enumerate()
                .map(|(j, &p)| (p, j, field.one()))
                .collect();
            for (slot, &(r, j)) in free.iter().enumerate() {
                let v = &elems[digits[slot]];
                if !field.is_zero(v) {
                    entries.push((r, j, v.clone()));
                }
            }
            out.push(SparseMat::from_triplets(field.clone(), n, d, entries).unwrap());
        }
    }
    out
}

/// Every d-dimensional subspace containing the column space of `base`
/// (a reduced-column-echelon basis), canonically reduced.
pub fn subspaces_containing<F: Field>(base: &SparseMat<F>, d: usize) -> Vec<SparseMat<F>> {
    let field = base.field().clone();
    let n = base.rows();
    let r = base.cols();
    if d < r {
        return Vec::new();
    }
    if d == r {
        return alloc::vec![base.clone()];
    }
    let mut pivot_row = alloc::vec![usize::MAX; r];
    for (row, col, _) in base.entries() {
        pivot_row[col] = pivot_row[col].min(row);
    }
    let mut is_pivot = alloc::vec![false; n];
    for &p in &pivot_row {
        is_pivot[p] = true;
    }
    let free_rows: Vec<usize> = (0..n).filter(|&row| !is_pivot[row]).collect();
    all_subspaces(&field, n - r, d - r)
        .into_iter()
        .map(|q_basis| {
            let lifted_entries: Vec<(usize, usize, F::Elem)> = q_basis
                .entries()
                .map(|(row, col, v)| (free_rows[row], col, v.clone()))
                .collect();
            let lifted =
                SparseMat::from_triplets(field.clone(), n, d - r, lifted_entries).unwrap();
            base.hstack(&lifted).unwrap().column_reduced()
        })
        .collect()
}

/// All chains U_a c M_a, ..., U_b c M_b with dims h(s), each U closed into
/// the next under the ring action; these are the classical points of the
/// window-[a,b] locus, one per gauge orbit.  Chains that fail full closure
/// (possible only for rings not generated in degree 1) are dropped.
pub fn enumerate_chains<F: Field>(
    ring: &GradedRing<F>,
    module: &GradedModule<F>,
    h: &HilbertData,
    a: i64,
    b: i64,
) -> Vec<SubmodulePoint<F>> {
    let field = module.field().clone();
    let mut partial: Vec<Vec<SparseMat<F>>> = all_subspaces(&field, module.dim(a), h.h(a))
        .into_iter()
        .map(|m| alloc::vec![m])
        .collect();
    for s in (a + 1)..=b {
        let mut next = Vec::new();
        for chain in &partial {
            let mut image_cols: Vec<Vec<F::Elem>> = Vec::new();
            for d in 1..=(s - a) {
                let u = &chain[(s - d - a) as usize];
                for c in 0..u.cols() {
                    let col = u.col(c);
                    for i in 0..ring.dim(d) {
                        image_cols.push(module.act_vec(d, i, s - d, &col));
                    }
                }
            }
            let span = SparseMat::from_cols(field.clone(), module.dim(s), &image_cols)
                .column_reduced();
            if span.cols() > h.h(s) {
                continue;
            }
            for u_s in subspaces_containing(&span, h.h(s)) {
                let mut extended = chain.clone();
                extended.push(u_s);
                next.push(extended);
            }
        }
        partial = next;
    }
    partial
        .into_iter()
        .map(|basis| SubmodulePoint::new(a, basis))
        .filter(|sp| sp.check_closed(ring, module).is_ok())
        .collect()
}

/// Outcome of the stabilization-degree search.
#[derive(Clone, Debug)]
pub struct StabilizationSearch<F: Field> {
    /// Least b <= cap such that every window-[a,b] chain's degree-a seed
    /// generates the full h-profile up to h's ceiling; None if no b works.
    pub b: Option<i64>,
    /// (candidate b, distinct seeds tried, seeds passing).
    pub trials: Vec<(i64, usize, usize)>,
    /// The passing seeds at the returned b.
    pub witness_seeds: Vec<SparseMat<F>>,
}

fn matrix_key<F: Field>(m: &SparseMat<F>) -> Vec<(usize, usize, String)> {
    let f = m.field();
    m.entries().map(|(r, c, v)| (r, c, f.format(v))).collect()
}

/// Finds the least degree b at which the chain data up to b pins down the
/// whole submodule: every seed subspace arising from a window-[a,b] chain
/// must generate dims equal to h all the way to h's ceiling.
pub fn find_b<F: Field>(
    ring: &GradedRing<F>,
    module: &GradedModule<F>,
    h: &HilbertData,
    cap: i64,
) -> StabilizationSearch<F> {
    let a = h.a();
    let top = h.top();
    let mut trials = Vec::new();
    for b in a..=cap.min(top) {
        let chains = enumerate_chains(ring, module, &h.truncate(b), a, b);
        let mut seeds: BTreeMap<Vec<(usize, usize, String)>, SparseMat<F>> = BTreeMap::new();
        for chain in &chains {
            let seed = chain.basis(a).unwrap();
            seeds.entry(matrix_key(seed)).or_insert_with(|| seed.clone());
        }
        let mut passing = Vec::new();
        for seed in seeds.values() {
            let (dims, _) = generated_submodule(seed, ring, module, a, top);
            if dims == h.values() {
                passing.push(seed.clone());
            }
        }
        let all = passing.len() == seeds.len();
        trials.push((b, seeds.len(), passing.len()));
        if all {
            return StabilizationSearch {
                b: Some(b),
                trials,
                witness_seeds: passing,
            };
        }
    }
    StabilizationSearch {
        b: None,
        trials,
        witness_seeds: Vec::new(),
    }
}

/// Tally of the injectivity-propagation experiment.
#[derive(Clone, Debug, Default)]
pub struct PropagationReport {
    /// Classical points from chain enumeration at the given b.
    pub enumerated_points: usize,
    /// Gauge twists applied across those points.
    pub gauge_twists: usize,
    /// Raw (phi, psi) samples drawn.
    pub samples: usize,
    /// Samples whose phi satisfied associativity.
    pub assoc_passing: usize,
    /// Maurer-Cartan points found with psi injective on [a, b].
    pub sampled_points: usize,
    /// Points violating full injectivity, dumped verbatim.  Emptiness is
    /// evidence for the propagation claim, not a proof.
    pub counterexamples: Vec<String>,
}

fn dump_point<F: Field>(alg: &StretchAlgebra<F>, gamma: &Elt<F>, context: &str) -> String {
    let f = alg.field();
    let mut out = String::new();
    out.push_str(context);
    for (&i, v) in &gamma.coeffs {
        out.push_str("\n  ");
        out.push_str(&alg.label_of(1, i).to_string());
        out.push_str(" = ");
        out.push_str(&f.format(v));
    }
    out
}

/// Whether phi(a, phi(b, x)) agrees with phi(ab, x) for all single steps;
/// the phi-sort half of the Maurer-Cartan equation for a strict pair.
pub fn phi_associative<F: Field>(alg: &StretchAlgebra<F>, gamma: &Elt<F>) -> bool {
    let (a, t) = alg.window();
    let f = alg.field();
    for s_in in a..=t {
        for d2 in 1..=(t - s_in) {
            let mid = s_in + d2;
            let inner = phi_matrix(alg, gamma, d2, s_in);
            for d1 in 1..=(t - mid) {
                let nested = phi_matrix(alg, gamma, d1, mid)
                    .mul(&kron_identity_left(f, alg.ring().dim(d1), &inner))
                    .unwrap();
                let mult = alg.ring().mult_map(d1, d2).unwrap();
                let collapsed = phi_matrix(alg, gamma, d1 + d2, s_in)
                    .mul(&kron(
                        mult,
                        &SparseMat::identity(f.clone(), alg.h().h(s_in)),
                    ))
                    .unwrap();
                if nested.add(&collapsed.neg()).unwrap().entries().next().is_some() {
                    return false;
                }
            }
        }
    }
    true
}

/// Linear system whose kernel is the space of psi making (phi, psi) a
/// Maurer-Cartan pair, given phi; unknowns are the psi_s entries
/// column-major per degree, equations run over all single action steps.
fn psi_naturality_system<F: Field>(alg: &StretchAlgebra<F>, gamma: &Elt<F>) -> SparseMat<F> {
    let (a, t) = alg.window();
    let f = alg.field();
    let h = alg.h();
    let module = alg.module();
    let mut offsets = BTreeMap::new();
    let mut total = 0usize;
    for s in a..=t {
        offsets.insert(s, total);
        total += module.dim(s) * h.h(s);
    }
    let unknown =
        |s: i64, row: usize, col: usize| offsets[&s] + col * module.dim(s) + row;
    let mut entries: Vec<(usize, usize, F::Elem)> = Vec::new();
    let mut eq = 0usize;
    for s_in in a..=t {
        for d in 1..=(t - s_in) {
            let s = s_in + d;
            let phi = phi_matrix(alg, gamma, d, s_in);
            for ai in 0..alg.ring().dim(d) {
                // a_i acting on each M_{s_in} basis vector, as columns.
                let act_cols: Vec<Vec<F::Elem>> = (0..module.dim(s_in))
                    .map(|m| {
                        let mut unit = alloc::vec![f.zero(); module.dim(s_in)];
                        unit[m] = f.one();
                        module.act_vec(d, ai, s_in, &unit)
                    })
                    .collect();
                for x in 0..h.h(s_in) {
                    let phi_col = phi.col(ai * h.h(s_in) + x);
                    for r in 0..module.dim(s) {
                        // psi_s(phi(a, x))[r] - (a . psi_{s_in}(x))[r] = 0
                        for (j, v) in phi_col.iter().enumerate() {
                            if !f.is_zero(v) {
                                entries.push((eq, unknown(s, r, j), v.clone()));
                            }
                        }
                        for (m, col) in act_cols.iter().enumerate() {
                            if !f.is_zero(&col[r]) {
                                entries.push((eq, unknown(s_in, m, x), f.neg(&col[r])));
                            }
                        }
                        eq += 1;
                    }
                }
            }
        }
    }
    SparseMat::from_triplets(f.clone(), eq, total, entries).unwrap()
}

fn psi_from_vector<F: Field>(alg: &StretchAlgebra<F>, gamma: &mut Elt<F>, x: &[F::Elem]) {
    let (a, t) = alg.window();
    let f = alg.field();
    let h = alg.h();
    let module = alg.module();
    let mut off = 0usize;
    for s in a..=t {
        let rows = module.dim(s);
        let cols_n = h.h(s);
        let col_vecs: Vec<Vec<F::Elem>> = (0..cols_n)
            .map(|j| x[off + j * rows..off + (j + 1) * rows].to_vec())
            .collect();
        off += rows * cols_n;
        let m = SparseMat::from_cols(f.clone(), rows, &col_vecs);
        if let Some(comp) = alg.component(Sort::Psi, 1, s, &[s]) {
            alg.set_component_matrix(gamma, comp, &m);
        }
    }
}

/// The injectivity-propagation experiment: every Maurer-Cartan point whose
/// psi is injective on [a, b] should be injective everywhere.  Searches by
/// (i) enumerating chain points and twisting them by random gauge supported
/// above b, and (ii) rejection-sampling raw pairs over the prime field.
pub fn propagation_check<F: Field>(
    alg: &StretchAlgebra<F>,
    b: i64,
    twists: usize,
    samples: usize,
    rng: &mut dyn RngCore,
) -> PropagationReport {
    let (a, t) = alg.window();
    let h = alg.h();
    let field = alg.field().clone();
    let mut report = PropagationReport::default();

    // Phase (i): enumerated points, then gauge twists.
    let chains = enumerate_chains(alg.ring(), alg.module(), &h.truncate(b), a, b);
    let mut points = Vec::new();
    for chain in &chains {
        let seed = chain.basis(a).unwrap();
        let (dims, sub) = generated_submodule(seed, alg.ring(), alg.module(), a, t);
        if dims != h.values() {
            continue;
        }
        let gamma = alg
            .classical_point(&sub)
            .expect("generated submodule with the right dims is a point");
        report.enumerated_points += 1;
        if !rank_locus_predicates(alg, &gamma, b).in_m {
            report
                .counterexamples
                .push(dump_point(alg, &gamma, "enumerated point not injective:"));
        }
        points.push(gamma);
    }
    if !points.is_empty() {
        for i in 0..twists {
            let gamma = &points[i % points.len()];
            let g = GroupElement::random(&field, h, a, t, b + 1, rng);
            let moved = act(alg, &g, gamma);
            report.gauge_twists += 1;
            if !rank_locus_predicates(alg, &moved, b).in_m {
                report
                    .counterexamples
                    .push(dump_point(alg, &moved, "gauge twist broke injectivity:"));
            }
        }
    }

    // Phase (ii): rejection sampling of raw pairs.
    let phi_comps: Vec<_> = alg
        .components(1)
        .iter()
        .filter(|c| c.sort == Sort::Phi)
        .cloned()
        .collect();
    for _ in 0..samples {
        report.samples += 1;
        let mut gamma: Elt<F> = Elt::zero(1);
        for comp in &phi_comps {
            let mut entries = Vec::new();
            for r in 0..comp.out_dim {
                for c in 0..comp.in_len() {
                    let v = field.sample(rng);
                    if !field.is_zero(&v) {
                        entries.push((r, c, v));
                    }
                }
            }
            let m =
                SparseMat::from_triplets(field.clone(), comp.out_dim, comp.in_len(), entries)
                    .unwrap();
            alg.set_component_matrix(&mut gamma, comp, &m);
        }
        if !phi_associative(alg, &gamma) {
            continue;
        }
        report.assoc_passing += 1;
        let system = psi_naturality_system(alg, &gamma);
        let (_, kernel) = system.rank_kernel();
        for _ in 0..4 {
            let coeffs: Vec<F::Elem> = (0..kernel.cols()).map(|_| field.sample(rng)).collect();
            let x = kernel.mul_dense_vec(&coeffs).unwrap();
            let mut candidate = gamma.clone();
            psi_from_vector(alg, &mut candidate, &x);
            let flags = rank_locus_predicates(alg, &candidate, b);
            if !flags.in_v {
                continue;
            }
            report.sampled_points += 1;
            assert!(
                alg.mc_residual(&candidate).coeffs.is_empty(),
                "solved pair must satisfy Maurer-Cartan"
            );
            if !flags.in_m {
                report
                    .counterexamples
                    .push(dump_point(alg, &candidate, "sampled point not injective:"));
            }
        }
    }
    report
}

/// Cardinalities and implication checks across the three loci, over the
/// chain enumeration.
#[derive(Clone, Debug)]
pub struct ComparisonReport {
    pub chain_points: usize,
    pub v_count: usize,
    pub x_count: usize,
    pub geometric_count: usize,
    /// (in_V and Maurer-Cartan) implied in_X on every enumerated point.
    pub v_implies_x: bool,
    /// in_X implied the geometric stratum on every enumerated point.
    pub x_implies_geometric: bool,
    /// Every coordinate matrix respected rank <= h(end degree).
    pub rank_bounds: bool,
}

pub fn quotient_comparison<F: Field>(alg: &StretchAlgebra<F>, b: i64) -> ComparisonReport {
    let (a, t) = alg.window();
    let h = alg.h();
    let chains = enumerate_chains(alg.ring(), alg.module(), h, a, t);
    let mut report = ComparisonReport {
        chain_points: 0,
        v_count: 0,
        x_count: 0,
        geometric_count: 0,
        v_implies_x: true,
        x_implies_geometric: true,
        rank_bounds: true,
    };
    for chain in &chains {
        let Ok(gamma) = alg.classical_point(chain) else {
            continue;
        };
        report.chain_points += 1;
        let mc = alg.mc_residual(&gamma).coeffs.is_empty();
        let flags = rank_locus_predicates(alg, &gamma, b);
        let coords = invariant_coordinates(alg, &gamma, b)
            .expect("chain points satisfy Maurer-Cartan");
        let geo = coords.geometric_locus(h);
        if !coords.rank_bounds_hold(h) {
            report.rank_bounds = false;
        }
        if flags.in_v {
            report.v_count += 1;
        }
        if flags.in_x {
            report.x_count += 1;
        }
        if geo {
            report.geometric_count += 1;
        }
        if flags.in_v && mc && !flags.in_x {
            report.v_implies_x = false;
        }
        if flags.in_x && !geo {
            report.x_implies_geometric = false;
        }
    }
    report
}
