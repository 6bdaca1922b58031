//! Exhaustive axiom suite over the window complex: graded antisymmetry, the
//! graded Jacobi identity, d squared, and the Leibniz rule, each checked on
//! every basis tuple with exact arithmetic.  Structure constants of the
//! bracket are integers, so antisymmetry and Jacobi run on `i64` tables and
//! only d-based checks touch field elements.

use std::collections::BTreeMap;

use dgquot_core::dgla::{Elt, StretchAlgebra};
use dgquot_core::scalar::Field;

pub struct AxiomOutcome {
    pub antisymmetry_pairs: usize,
    pub jacobi_triples: usize,
    pub leibniz_pairs: usize,
    /// Human-readable descriptions of the first few failures, empty on pass.
    pub failures: Vec<String>,
}

impl AxiomOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

const FAILURE_CAP: usize = 5;

type BracketTable = Vec<Vec<Vec<(usize, i64)>>>;

fn bracket_table<F: Field>(alg: &StretchAlgebra<F>, k1: usize, k2: usize) -> BracketTable {
    (0..alg.ambient_dim(k1))
        .map(|f| {
            (0..alg.ambient_dim(k2))
                .map(|g| alg.bracket_basis(k1, f, k2, g))
                .collect()
        })
        .collect()
}

pub fn run_axioms<F: Field>(alg: &StretchAlgebra<F>) -> AxiomOutcome {
    let k_max = alg.k_max();
    let mut failures = Vec::new();

    // Antisymmetry: [f, g] = -(-1)^(k1 k2) [g, f] on every basis pair,
    // including pairs whose bracket lands above the window (both sides empty).
    let mut antisymmetry_pairs = 0;
    'anti: for k1 in 1..=k_max {
        for k2 in 1..=k_max {
            for f in 0..alg.ambient_dim(k1) {
                for g in 0..alg.ambient_dim(k2) {
                    antisymmetry_pairs += 1;
                    let fg = alg.bracket_basis(k1, f, k2, g);
                    let gf = alg.bracket_basis(k2, g, k1, f);
                    let sign: i64 = if (k1 * k2) % 2 == 1 { 1 } else { -1 };
                    let flipped: Vec<(usize, i64)> =
                        gf.into_iter().map(|(i, c)| (i, sign * c)).collect();
                    if fg != flipped {
                        failures.push(format!(
                            "antisymmetry fails at k1={k1} f={f} k2={k2} g={g}"
                        ));
                        if failures.len() >= FAILURE_CAP {
                            break 'anti;
                        }
                    }
                }
            }
        }
    }

    // Jacobi: [x,[y,z]] - [[x,y],z] - (-1)^(kx ky) [y,[x,z]] accumulates to
    // zero for every basis triple in every live degree combination.
    let mut tables: BTreeMap<(usize, usize), BracketTable> = BTreeMap::new();
    let mut table = |alg: &StretchAlgebra<F>, k1: usize, k2: usize| -> BracketTable {
        tables
            .entry((k1, k2))
            .or_insert_with(|| bracket_table(alg, k1, k2))
            .clone()
    };
    let mut jacobi_triples = 0;
    'jac: for kx in 1..=k_max {
        for ky in 1..=k_max {
            for kz in 1..=k_max {
                if kx + ky + kz > k_max {
                    continue;
                }
                let t_yz = table(alg, ky, kz);
                let t_xy = table(alg, kx, ky);
                let t_xz = table(alg, kx, kz);
                let t_x_yz = table(alg, kx, ky + kz);
                let t_xy_z = table(alg, kx + ky, kz);
                let t_y_xz = table(alg, ky, kx + kz);
                let third_sign: i64 = if (kx * ky) % 2 == 1 { 1 } else { -1 };
                let n_out = alg.ambient_dim(kx + ky + kz);
                let mut acc = vec![0i64; n_out];
                for x in 0..alg.ambient_dim(kx) {
                    for y in 0..alg.ambient_dim(ky) {
                        let xy = &t_xy[x][y];
                        for z in 0..alg.ambient_dim(kz) {
                            jacobi_triples += 1;
                            for &(w, c) in &t_yz[y][z] {
                                for &(r, c2) in &t_x_yz[x][w] {
                                    acc[r] += c * c2;
                                }
                            }
                            for &(w, c) in xy {
                                for &(r, c2) in &t_xy_z[w][z] {
                                    acc[r] -= c * c2;
                                }
                            }
                            for &(w, c) in &t_xz[x][z] {
                                for &(r, c2) in &t_y_xz[y][w] {
                                    acc[r] += third_sign * c * c2;
                                }
                            }
                            if acc.iter().any(|&v| v != 0) {
                                failures.push(format!(
                                    "jacobi fails at kx={kx} x={x} ky={ky} y={y} kz={kz} z={z}"
                                ));
                                if failures.len() >= FAILURE_CAP {
                                    break 'jac;
                                }
                                acc.iter_mut().for_each(|v| *v = 0);
                            }
                        }
                    }
                }
            }
        }
    }
    // d squared on every basis element of every degree.
    if !alg.delta_square().is_zero() {
        failures.push("d_squared fails: the structure differential does not square to zero".into());
    } else if let Some(label) = alg.d_squared_defect() {
        failures.push(format!("d_squared fails at basis element {label}"));
    }

    // Leibniz: d[u, v] = [du, v] + (-1)^k1 [u, dv] on every basis pair.
    let field = alg.field().clone();
    let unit = |k: usize, i: usize| {
        let mut e: Elt<F> = Elt::zero(k);
        e.coeffs.insert(i, field.one());
        e
    };
    let mut leibniz_pairs = 0;
    'leib: for k1 in 1..=k_max {
        for k2 in 1..=k_max {
            for i in 0..alg.ambient_dim(k1) {
                let u = unit(k1, i);
                let du = alg.differential(&u);
                for j in 0..alg.ambient_dim(k2) {
                    leibniz_pairs += 1;
                    let v = unit(k2, j);
                    let lhs = alg.differential(&alg.bracket(&u, &v));
                    let mut rhs = alg.bracket(&du, &v);
                    let second = alg.bracket(&u, &alg.differential(&v));
                    rhs = if k1 % 2 == 1 {
                        alg.sub(&rhs, &second)
                    } else {
                        alg.add(&rhs, &second)
                    };
                    if lhs != rhs {
                        failures.push(format!("leibniz fails at k1={k1} i={i} k2={k2} j={j}"));
                        if failures.len() >= FAILURE_CAP {
                            break 'leib;
                        }
                    }
                }
            }
        }
    }

    AxiomOutcome {
        antisymmetry_pairs,
        jacobi_triples,
        leibniz_pairs,
        failures,
    }
}
