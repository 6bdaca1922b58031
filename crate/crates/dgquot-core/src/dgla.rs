//! The finite-window deformation complex of a graded module quotient.
//!
//! Fix a ring A, a module M, a dimension profile h, and a degree window
//! [a, t].  The ambient complex collects four sorts of multilinear maps, all
//! homogeneous of degree 0 with output degree s in [a, t]:
//!
//! * `rho_k`: Hom(A_+^(k+1), A_s)           (ring directions)
//! * `phi_k`: Hom(A_+^k (x) S_s', S_s)       (module structures on S)
//! * `psi_k`: Hom(A_+^(k-1) (x) S_s', M_s)   (maps into M)
//! * `mu_k` : Hom(A_+^k (x) M_m, M_s)        (module directions)
//!
//! where S_s is an abstract space of dimension h(s).  All four sorts sit in
//! homological degree k; every component vanishes for k > t - a + 1, so the
//! algebra is nilpotent.  Degree 0 holds the gauge level, End(S_s) only.
//!
//! The bracket comes from insertion: composing g into the i-th slot of f
//! carries the sign (-1)^(deg g * (slots of f before i)), the composition is
//! the signed sum over matching slots, and [f, g] = f o g - (-1)^(|f||g|)
//! g o f.  The distinguished degree-1 element delta collects the ring
//! multiplication and the module action clipped to the window; [delta, -] is
//! the differential.  For floors a <= 2 it squares to zero; higher floors
//! clip products out of the window and `delta_square` reports the defect.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::graded::{GradedModule, GradedRing, HilbertData, SubmodulePoint};
use crate::index::{compositions, tensor_hom_dims, MixedRadix};
use crate::matrix::SparseMat;
use crate::scalar::Field;

/// The four map sorts, in canonical enumeration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Sort {
    Rho,
    Phi,
    Psi,
    Mu,
}

impl Sort {
    pub fn tag(self) -> &'static str {
        match self {
            Sort::Rho => "rho",
            Sort::Phi => "phi",
            Sort::Psi => "psi",
            Sort::Mu => "mu",
        }
    }

    pub fn from_tag(s: &str) -> Option<Sort> {
        match s {
            "rho" => Some(Sort::Rho),
            "phi" => Some(Sort::Phi),
            "psi" => Some(Sort::Psi),
            "mu" => Some(Sort::Mu),
            _ => None,
        }
    }
}

/// What a slot accepts / what a sort outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Ring,
    Sub,
    Mod,
}

impl Sort {
    fn output_kind(self) -> Kind {
        match self {
            Sort::Rho => Kind::Ring,
            Sort::Phi => Kind::Sub,
            Sort::Psi | Sort::Mu => Kind::Mod,
        }
    }

    /// Kind of input slot `i` out of `n`; only the last slot of phi/psi/mu
    /// is special.
    fn slot_kind(self, i: usize, n: usize) -> Kind {
        if i + 1 == n {
            match self {
                Sort::Rho => Kind::Ring,
                Sort::Phi | Sort::Psi => Kind::Sub,
                Sort::Mu => Kind::Mod,
            }
        } else {
            Kind::Ring
        }
    }
}

/// One Hom-space of the complex.  Basis elements are indexed row-major over
/// input digits then the output digit (output fastest); the global index
/// within the homological degree is `offset` plus that radix index.
#[derive(Clone, Debug)]
pub struct Component {
    pub sort: Sort,
    pub k: usize,
    pub s_out: i64,
    /// Input degrees in slot order; the last entry of phi/psi is the
    /// S-degree and of mu the M-degree.
    pub profile: Vec<i64>,
    pub in_dims: Vec<usize>,
    pub out_dim: usize,
    pub offset: usize,
    radix: MixedRadix,
    in_radix: MixedRadix,
}

impl Component {
    pub fn basis_len(&self) -> usize {
        self.radix.len()
    }

    fn slots(&self) -> usize {
        self.profile.len()
    }

    pub fn in_len(&self) -> usize {
        self.in_radix.len()
    }

    /// Whether some input slot of `self` can receive the output of `g`.
    /// Insertion of a basis element of `g` into one of `self` is possible
    /// only when this holds; useful for pruning pair loops.
    pub fn accepts(&self, g: &Component) -> bool {
        let n = self.slots();
        let kind = g.sort.output_kind();
        (0..n).any(|p| self.slot_kind_at(p) == kind && self.profile[p] == g.s_out)
    }
}

/// Fully resolved name of one basis element.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Label {
    pub sort: Sort,
    pub k: usize,
    pub s_out: i64,
    pub profile: Vec<i64>,
    /// Input basis positions in slot order, then the output basis position.
    pub digits: Vec<usize>,
}

impl core::fmt::Display for Label {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "{}:{}:{}:", self.sort.tag(), self.k, self.s_out)?;
        for (i, p) in self.profile.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, ":")?;
        for (i, d) in self.digits.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

type LookupKey = (Sort, i64, Vec<i64>);

struct Level {
    components: Vec<Component>,
    lookup: BTreeMap<LookupKey, usize>,
    dim: usize,
    /// Size of the rho block; the phi+psi block follows it contiguously.
    rho_dim: usize,
    /// Size of the phi+psi block (the deformation directions).
    l_dim: usize,
}

/// An element of the complex: homological degree plus sparse coefficients
/// over the global basis of that degree.
#[derive(Clone, Debug, PartialEq)]
pub struct Elt<F: Field> {
    pub k: usize,
    pub coeffs: BTreeMap<usize, F::Elem>,
}

impl<F: Field> Elt<F> {
    pub fn zero(k: usize) -> Self {
        Elt {
            k,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }
}

/// The window complex with its precomputed basis tables.
pub struct StretchAlgebra<F: Field> {
    field: F,
    ring: GradedRing<F>,
    module: GradedModule<F>,
    h: HilbertData,
    a: i64,
    t: i64,
    /// levels[k] for k = 0..=k_max; level 0 is the gauge level End(S_s).
    levels: Vec<Level>,
    delta: Elt<F>,
}

impl<F: Field> StretchAlgebra<F> {
    pub fn build(
        ring: GradedRing<F>,
        module: GradedModule<F>,
        h: HilbertData,
        a: i64,
        t: i64,
    ) -> Result<Self, Error> {
        if a < module.floor() {
            return Err(Error::Invalid(
                "window floor lies below the module floor".into(),
            ));
        }
        if a < 1 || t < a {
            return Err(Error::Invalid("window must satisfy 1 <= a <= t".into()));
        }
        if t > ring.top() || t > module.top() || t > h.top() || a < h.a() {
            return Err(Error::Invalid(
                "window exceeds the ring, module, or profile range".into(),
            ));
        }
        let k_max = (t - a + 1) as usize;
        let mut levels = Vec::with_capacity(k_max + 1);
        for k in 0..=k_max {
            levels.push(Self::enumerate_level(&ring, &module, &h, a, t, k));
        }
        let field = ring.field().clone();
        let mut alg = StretchAlgebra {
            field,
            ring,
            module,
            h,
            a,
            t,
            levels,
            delta: Elt::zero(1),
        };
        alg.delta = alg.build_delta();
        Ok(alg)
    }

    fn enumerate_level(
        ring: &GradedRing<F>,
        module: &GradedModule<F>,
        h: &HilbertData,
        a: i64,
        t: i64,
        k: usize,
    ) -> Level {
        let mut components = Vec::new();
        let mut lookup = BTreeMap::new();
        let mut offset = 0usize;
        let mut rho_dim = 0usize;
        let mut l_dim = 0usize;
        let push = |sort: Sort,
                        s_out: i64,
                        profile: Vec<i64>,
                        in_dims: Vec<usize>,
                        out_dim: usize,
                        components: &mut Vec<Component>,
                        lookup: &mut BTreeMap<LookupKey, usize>,
                        offset: &mut usize| {
            let len = tensor_hom_dims(&in_dims, out_dim);
            if len == 0 {
                return 0;
            }
            let mut radix_dims = in_dims.clone();
            radix_dims.push(out_dim);
            lookup.insert((sort, s_out, profile.clone()), components.len());
            components.push(Component {
                sort,
                k,
                s_out,
                profile,
                in_radix: MixedRadix::new(in_dims.clone()),
                in_dims,
                out_dim,
                offset: *offset,
                radix: MixedRadix::new(radix_dims),
            });
            *offset += len;
            len
        };
        if k == 0 {
            // Gauge level: End(S_s) only.
            for s in a..=t {
                l_dim += push(
                    Sort::Phi,
                    s,
                    vec![s],
                    vec![h.h(s)],
                    h.h(s),
                    &mut components,
                    &mut lookup,
                    &mut offset,
                );
            }
            return Level {
                components,
                lookup,
                dim: offset,
                rho_dim: 0,
                l_dim,
            };
        }
        // rho_k: k+1 ring inputs.
        for s_out in a..=t {
            for profile in compositions(k + 1, s_out, 1, s_out) {
                let in_dims: Vec<usize> = profile.iter().map(|&d| ring.dim(d)).collect();
                rho_dim += push(
                    Sort::Rho,
                    s_out,
                    profile,
                    in_dims,
                    ring.dim(s_out),
                    &mut components,
                    &mut lookup,
                    &mut offset,
                );
            }
        }
        // phi_k: k ring inputs and one S input (last).
        for s_out in a..=t {
            for profile in compositions(k + 1, s_out, 1, s_out) {
                if profile[k] < a {
                    continue;
                }
                let mut in_dims: Vec<usize> =
                    profile[..k].iter().map(|&d| ring.dim(d)).collect();
                in_dims.push(h.h(profile[k]));
                l_dim += push(
                    Sort::Phi,
                    s_out,
                    profile,
                    in_dims,
                    h.h(s_out),
                    &mut components,
                    &mut lookup,
                    &mut offset,
                );
            }
        }
        // psi_k: k-1 ring inputs and one S input (last).
        for s_out in a..=t {
            for profile in compositions(k, s_out, 1, s_out) {
                if profile[k - 1] < a {
                    continue;
                }
                let mut in_dims: Vec<usize> =
                    profile[..k - 1].iter().map(|&d| ring.dim(d)).collect();
                in_dims.push(h.h(profile[k - 1]));
                l_dim += push(
                    Sort::Psi,
                    s_out,
                    profile,
                    in_dims,
                    module.dim(s_out),
                    &mut components,
                    &mut lookup,
                    &mut offset,
                );
            }
        }
        // mu_k: k ring inputs and one M input (last), down to the module floor.
        for s_out in a..=t {
            for profile in compositions(k + 1, s_out, 1, s_out) {
                if profile[k] < module.floor() {
                    continue;
                }
                let mut in_dims: Vec<usize> =
                    profile[..k].iter().map(|&d| ring.dim(d)).collect();
                in_dims.push(module.dim(profile[k]));
                push(
                    Sort::Mu,
                    s_out,
                    profile,
                    in_dims,
                    module.dim(s_out),
                    &mut components,
                    &mut lookup,
                    &mut offset,
                );
            }
        }
        Level {
            components,
            lookup,
            dim: offset,
            rho_dim,
            l_dim,
        }
    }

    fn build_delta(&self) -> Elt<F> {
        let mut coeffs = BTreeMap::new();
        for comp in &self.levels[1].components {
            match comp.sort {
                Sort::Rho => {
                    let (d1, d2) = (comp.profile[0], comp.profile[1]);
                    if let Some(m) = self.ring.mult_map(d1, d2) {
                        let n2 = self.ring.dim(d2);
                        for (r, c, v) in m.entries() {
                            let idx = comp.offset
                                + comp.radix.index_of(&[c / n2, c % n2, r]);
                            coeffs.insert(idx, v.clone());
                        }
                    }
                }
                Sort::Mu => {
                    let (d, m_deg) = (comp.profile[0], comp.profile[1]);
                    if let Some(m) = self.module.action_map(d, m_deg) {
                        let n2 = self.module.dim(m_deg);
                        for (r, c, v) in m.entries() {
                            let idx = comp.offset
                                + comp.radix.index_of(&[c / n2, c % n2, r]);
                            coeffs.insert(idx, v.clone());
                        }
                    }
                }
                _ => {}
            }
        }
        Elt { k: 1, coeffs }
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn ring(&self) -> &GradedRing<F> {
        &self.ring
    }

    pub fn module(&self) -> &GradedModule<F> {
        &self.module
    }

    pub fn h(&self) -> &HilbertData {
        &self.h
    }

    pub fn window(&self) -> (i64, i64) {
        (self.a, self.t)
    }

    /// Largest homological degree with any component.
    pub fn k_max(&self) -> usize {
        self.levels.len() - 1
    }

    /// Total basis size of the ambient degree-k level (gauge for k = 0).
    pub fn ambient_dim(&self, k: usize) -> usize {
        self.levels.get(k).map_or(0, |l| l.dim)
    }

    /// Size of the phi+psi block: the deformation directions.  For k = 0
    /// this is the gauge dimension.
    pub fn l_dim(&self, k: usize) -> usize {
        self.levels.get(k).map_or(0, |l| l.l_dim)
    }

    /// Global index range of the phi+psi block within degree k.
    pub fn l_range(&self, k: usize) -> core::ops::Range<usize> {
        match self.levels.get(k) {
            Some(l) => l.rho_dim..(l.rho_dim + l.l_dim),
            None => 0..0,
        }
    }

    pub fn components(&self, k: usize) -> &[Component] {
        self.levels
            .get(k)
            .map_or(&[][..], |l| l.components.as_slice())
    }

    pub fn component(
        &self,
        sort: Sort,
        k: usize,
        s_out: i64,
        profile: &[i64],
    ) -> Option<&Component> {
        let level = self.levels.get(k)?;
        let idx = level.lookup.get(&(sort, s_out, profile.to_vec()))?;
        Some(&level.components[*idx])
    }

    /// Component owning a global basis index.
    pub fn component_of(&self, k: usize, index: usize) -> &Component {
        let level = &self.levels[k];
        debug_assert!(index < level.dim);
        let pos = level
            .components
            .partition_point(|c| c.offset <= index)
            .saturating_sub(1);
        &level.components[pos]
    }

    pub fn label_of(&self, k: usize, index: usize) -> Label {
        let comp = self.component_of(k, index);
        Label {
            sort: comp.sort,
            k,
            s_out: comp.s_out,
            profile: comp.profile.clone(),
            digits: comp.radix.digits_of(index - comp.offset),
        }
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        let comp = self.component(label.sort, label.k, label.s_out, &label.profile)?;
        if label.digits.len() != comp.profile.len() + 1 {
            return None;
        }
        for (d, &n) in label.digits.iter().zip(comp.radix.dims()) {
            if *d >= n {
                return None;
            }
        }
        Some(comp.offset + comp.radix.index_of(&label.digits))
    }

    /// All insertion composites of two basis elements, as (global index,
    /// sign) pairs in degree k_f + k_g.  Distinct insertions can land on the
    /// same basis element; the result is merged and zero entries dropped.
    pub fn compose_basis(&self, kf: usize, f: usize, kg: usize, g: usize) -> Vec<(usize, i64)> {
        let k_out = kf + kg;
        if k_out >= self.levels.len() {
            return Vec::new();
        }
        let fc = self.component_of(kf, f);
        let gc = self.component_of(kg, g);
        let out_kind = gc.sort.output_kind();
        let fd = fc.radix.digits_of(f - fc.offset);
        let gd = gc.radix.digits_of(g - gc.offset);
        let g_out_digit = gd[gd.len() - 1];
        let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
        let nf = fc.slots();
        for p in 0..nf {
            if fc.slot_kind_at(p) != out_kind
                || fc.profile[p] != gc.s_out
                || fd[p] != g_out_digit
            {
                continue;
            }
            let sort = match (fc.sort, gc.sort) {
                (Sort::Mu, Sort::Psi) => Sort::Psi,
                (s, _) => s,
            };
            let mut profile = Vec::with_capacity(nf - 1 + gc.slots());
            profile.extend_from_slice(&fc.profile[..p]);
            profile.extend_from_slice(&gc.profile);
            profile.extend_from_slice(&fc.profile[p + 1..]);
            let mut digits = Vec::with_capacity(profile.len() + 1);
            digits.extend_from_slice(&fd[..p]);
            digits.extend_from_slice(&gd[..gd.len() - 1]);
            digits.extend_from_slice(&fd[p + 1..nf]);
            digits.push(fd[nf]);
            let level = &self.levels[k_out];
            let comp_idx = level
                .lookup
                .get(&(sort, fc.s_out, profile))
                .expect("composite component exists");
            let comp = &level.components[*comp_idx];
            let idx = comp.offset + comp.radix.index_of(&digits);
            let sign = if kg % 2 == 1 && p % 2 == 1 { -1 } else { 1 };
            *acc.entry(idx).or_insert(0) += sign;
        }
        acc.into_iter().filter(|&(_, c)| c != 0).collect()
    }

    /// [f, g] on basis elements with integer coefficients.
    pub fn bracket_basis(&self, kf: usize, f: usize, kg: usize, g: usize) -> Vec<(usize, i64)> {
        let mut acc: BTreeMap<usize, i64> = BTreeMap::new();
        for (i, c) in self.compose_basis(kf, f, kg, g) {
            *acc.entry(i).or_insert(0) += c;
        }
        let flip = if (kf * kg) % 2 == 1 { 1 } else { -1 };
        for (i, c) in self.compose_basis(kg, g, kf, f) {
            *acc.entry(i).or_insert(0) += flip * c;
        }
        acc.into_iter().filter(|&(_, c)| c != 0).collect()
    }

    pub fn compose(&self, x: &Elt<F>, y: &Elt<F>) -> Elt<F> {
        let f = &self.field;
        let mut out: BTreeMap<usize, F::Elem> = BTreeMap::new();
        for (&i, xi) in &x.coeffs {
            for (&j, yj) in &y.coeffs {
                let prod = f.mul(xi, yj);
                if f.is_zero(&prod) {
                    continue;
                }
                for (w, sign) in self.compose_basis(x.k, i, y.k, j) {
                    let term = if sign == 1 {
                        prod.clone()
                    } else {
                        f.neg(&prod)
                    };
                    let entry = out.entry(w).or_insert_with(|| f.zero());
                    *entry = f.add(entry, &term);
                }
            }
        }
        out.retain(|_, v| !f.is_zero(v));
        Elt {
            k: x.k + y.k,
            coeffs: out,
        }
    }

    pub fn bracket(&self, x: &Elt<F>, y: &Elt<F>) -> Elt<F> {
        let f = &self.field;
        let mut out = self.compose(x, y);
        let flip = (x.k * y.k) % 2 == 1;
        for (&j, yj) in &y.coeffs {
            for (&i, xi) in &x.coeffs {
                let prod = f.mul(yj, xi);
                if f.is_zero(&prod) {
                    continue;
                }
                for (w, sign) in self.compose_basis(y.k, j, x.k, i) {
                    // - (-1)^(kx ky) (y o x)
                    let neg = (sign == 1) != flip;
                    let term = if neg { f.neg(&prod) } else { prod.clone() };
                    let entry = out.coeffs.entry(w).or_insert_with(|| f.zero());
                    *entry = f.add(entry, &term);
                }
            }
        }
        out.coeffs.retain(|_, v| !f.is_zero(v));
        out
    }

    pub fn delta(&self) -> &Elt<F> {
        &self.delta
    }

    /// delta o delta.  Zero exactly when the window keeps every intermediate
    /// product; floors a >= 3 clip A_1 A_1 -> A_2 and this reports the loss.
    pub fn delta_square(&self) -> Elt<F> {
        self.compose(&self.delta, &self.delta)
    }

    /// d(x) = [delta, x].
    pub fn differential(&self, x: &Elt<F>) -> Elt<F> {
        self.bracket(&self.delta, x)
    }

    /// d(gamma) + gamma o gamma: vanishes exactly at the Maurer-Cartan
    /// points.  Over fields of characteristic zero this equals
    /// d(gamma) + [gamma, gamma]/2; the composition form avoids the half
    /// and is the one used in characteristic two.
    pub fn mc_residual(&self, gamma: &Elt<F>) -> Elt<F> {
        assert_eq!(gamma.k, 1, "Maurer-Cartan elements have degree 1");
        self.add(&self.differential(gamma), &self.compose(gamma, gamma))
    }

    pub fn add(&self, x: &Elt<F>, y: &Elt<F>) -> Elt<F> {
        assert_eq!(x.k, y.k);
        let f = &self.field;
        let mut coeffs = x.coeffs.clone();
        for (&i, v) in &y.coeffs {
            let entry = coeffs.entry(i).or_insert_with(|| f.zero());
            *entry = f.add(entry, v);
        }
        coeffs.retain(|_, v| !f.is_zero(v));
        Elt { k: x.k, coeffs }
    }

    pub fn neg(&self, x: &Elt<F>) -> Elt<F> {
        let f = &self.field;
        Elt {
            k: x.k,
            coeffs: x.coeffs.iter().map(|(&i, v)| (i, f.neg(v))).collect(),
        }
    }

    pub fn sub(&self, x: &Elt<F>, y: &Elt<F>) -> Elt<F> {
        self.add(x, &self.neg(y))
    }

    pub fn scale(&self, c: &F::Elem, x: &Elt<F>) -> Elt<F> {
        let f = &self.field;
        let mut coeffs = BTreeMap::new();
        for (&i, v) in &x.coeffs {
            let w = f.mul(c, v);
            if !f.is_zero(&w) {
                coeffs.insert(i, w);
            }
        }
        Elt { k: x.k, coeffs }
    }

    /// Coefficient matrix of one component of an element: out_dim rows,
    /// one column per input multi-index.
    pub fn component_matrix(&self, x: &Elt<F>, comp: &Component) -> SparseMat<F> {
        let mut triplets = Vec::new();
        for (&i, v) in x.coeffs.range(comp.offset..comp.offset + comp.basis_len()) {
            let digits = comp.radix.digits_of(i - comp.offset);
            let row = digits[digits.len() - 1];
            let col = comp.in_radix.index_of(&digits[..digits.len() - 1]);
            triplets.push((row, col, v.clone()));
        }
        SparseMat::from_triplets(self.field.clone(), comp.out_dim, comp.in_len(), triplets)
            .unwrap()
    }

    /// Overwrites one component of an element from a coefficient matrix.
    pub fn set_component_matrix(&self, x: &mut Elt<F>, comp: &Component, m: &SparseMat<F>) {
        assert_eq!(comp.k, x.k);
        assert_eq!((m.rows(), m.cols()), (comp.out_dim, comp.in_len()));
        let f = &self.field;
        let keys: Vec<usize> = x
            .coeffs
            .range(comp.offset..comp.offset + comp.basis_len())
            .map(|(&i, _)| i)
            .collect();
        for i in keys {
            x.coeffs.remove(&i);
        }
        for (r, c, v) in m.entries() {
            if f.is_zero(v) {
                continue;
            }
            let mut digits = comp.in_radix.digits_of(c);
            digits.push(r);
            x.coeffs
                .insert(comp.offset + comp.radix.index_of(&digits), v.clone());
        }
    }

    /// The strict degree-1 element of a closed submodule: phi is the
    /// restricted action in the chosen bases, psi the inclusion into M.
    pub fn classical_point(&self, sub: &SubmodulePoint<F>) -> Result<Elt<F>, Error> {
        if sub.a() != self.a || sub.top() != self.t {
            return Err(Error::AlgebraMismatch);
        }
        for s in self.a..=self.t {
            if sub.dim(s) != self.h.h(s) {
                return Err(Error::WrongFiberDimension {
                    degree: s,
                    expected: self.h.h(s),
                    found: sub.dim(s),
                });
            }
        }
        sub.check_closed(&self.ring, &self.module)?;
        let f = self.field.clone();
        let mut gamma = Elt::zero(1);
        for comp in &self.levels[1].components {
            match comp.sort {
                Sort::Phi => {
                    let (d, s_in) = (comp.profile[0], comp.profile[1]);
                    let b_in = sub.basis(s_in).unwrap();
                    let b_out = sub.basis(comp.s_out).unwrap();
                    let mut triplets = Vec::new();
                    for i in 0..self.ring.dim(d) {
                        for j in 0..b_in.cols() {
                            let img = self.module.act_vec(d, i, s_in, &b_in.col(j));
                            let sigma = b_out
                                .solve(&img)
                                .expect("shape")
                                .expect("closure puts the image in the span");
                            for (w, v) in sigma.iter().enumerate() {
                                if !f.is_zero(v) {
                                    triplets.push((w, i * b_in.cols() + j, v.clone()));
                                }
                            }
                        }
                    }
                    let m = SparseMat::from_triplets(
                        f.clone(),
                        comp.out_dim,
                        comp.in_len(),
                        triplets,
                    )
                    .unwrap();
                    self.set_component_matrix(&mut gamma, comp, &m);
                }
                Sort::Psi => {
                    let s = comp.s_out;
                    let b = sub.basis(s).unwrap().clone();
                    self.set_component_matrix(&mut gamma, comp, &b);
                }
                _ => {}
            }
        }
        Ok(gamma)
    }

    /// Matrix of [delta + gamma, -] from the phi+psi block of degree k to
    /// the phi+psi block of degree k+1.  For k = 0 the source is the gauge
    /// level, giving (up to sign) the infinitesimal action of the gauge
    /// group at gamma.
    pub fn twisted_matrix(&self, gamma: &Elt<F>, k: usize) -> SparseMat<F> {
        assert_eq!(gamma.k, 1);
        let f = &self.field;
        let src = self.l_range(k);
        let dst = self.l_range(k + 1);
        let dst_start = dst.start;
        let total = self.add(&self.delta, gamma);
        let mut triplets = Vec::new();
        for (col, u) in src.clone().enumerate() {
            let mut unit = Elt::zero(k);
            unit.coeffs.insert(u, f.one());
            let image = self.bracket(&total, &unit);
            for (&w, v) in &image.coeffs {
                debug_assert!(self.l_range(k + 1).contains(&w));
                triplets.push((w - dst_start, col, v.clone()));
            }
        }
        SparseMat::from_triplets(f.clone(), dst.len(), src.len(), triplets).unwrap()
    }

    /// Infinitesimal gauge action xi -> (xi o phi - phi o (1 (x) xi),
    /// -psi o xi), which equals -[delta + gamma, xi].
    pub fn gauge_action_matrix(&self, gamma: &Elt<F>) -> SparseMat<F> {
        self.twisted_matrix(gamma, 0).neg()
    }

    /// Cohomology dimensions of the twisted complex at gamma, reported as
    /// (cohomological degree j, dimension) with the complex placed so that
    /// degree j holds the phi+psi block of homological degree j+1.  With
    /// `augmented` the gauge level enters in degree -1.
    pub fn tangent_cohomology(&self, gamma: &Elt<F>, augmented: bool) -> Vec<(i64, usize)> {
        let k_max = self.k_max();
        let j_min: i64 = if augmented { -1 } else { 0 };
        // rank of D_j for j = j_min..=k_max-1 (beyond that everything is 0).
        let mut ranks: BTreeMap<i64, usize> = BTreeMap::new();
        for j in j_min..=(k_max as i64 - 1) {
            let k = (j + 1) as usize;
            if self.l_dim(k) == 0 || self.l_dim(k + 1) == 0 {
                ranks.insert(j, 0);
                continue;
            }
            ranks.insert(j, self.twisted_matrix(gamma, k).rank());
        }
        let mut out = Vec::new();
        for j in j_min..=(k_max as i64 - 1) {
            let dim_c = self.l_dim((j + 1) as usize);
            let r_here = ranks.get(&j).copied().unwrap_or(0);
            let r_prev = if j == j_min {
                0
            } else {
                ranks.get(&(j - 1)).copied().unwrap_or(0)
            };
            out.push((j, dim_c - r_here - r_prev));
        }
        out
    }

    /// First basis element whose differential fails d(d(u)) = 0, if any.
    pub fn d_squared_defect(&self) -> Option<Label> {
        for k in 1..=self.k_max() {
            for u in 0..self.ambient_dim(k) {
                let mut unit = Elt::zero(k);
                unit.coeffs.insert(u, self.field.one());
                let dd = self.differential(&self.differential(&unit));
                if !dd.is_zero() {
                    return Some(self.label_of(k, u));
                }
            }
        }
        None
    }

    /// Restriction of an element to a smaller window ceiling: coefficients
    /// whose labels survive map across by label identity, the rest vanish.
    pub fn project_to(&self, target: &StretchAlgebra<F>, x: &Elt<F>) -> Elt<F> {
        assert_eq!(self.a, target.a);
        assert!(target.t <= self.t);
        let mut out = Elt::zero(x.k);
        for (&i, v) in &x.coeffs {
            let label = self.label_of(x.k, i);
            if let Some(j) = target.index_of(&label) {
                out.coeffs.insert(j, v.clone());
            }
        }
        out
    }
}

impl Component {
    fn slot_kind_at(&self, i: usize) -> Kind {
        self.sort.slot_kind(i, self.slots())
    }
}
