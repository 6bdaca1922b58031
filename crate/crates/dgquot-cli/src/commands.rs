//! One function per CLI subcommand.  Every function is generic over the
//! scalar field, takes an already-instantiated config, and returns the
//! report text; artifact-producing commands write their files themselves.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use dgquot_core::cdga::emit_cdga;
use dgquot_core::dgla::{Elt, StretchAlgebra};
use dgquot_core::graded::{generated_submodule, hom_quotient_oracle, SubmodulePoint};
use dgquot_core::matrix::SparseMat;
use dgquot_core::quot::{
    act, find_b, invariant_coordinates, propagation_check, quotient_comparison,
    rank_locus_predicates, GroupElement,
};
use dgquot_core::scalar::Field;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{hex_sha256, Instance, InstanceConfig};
use crate::formats::{
    format_cdga, format_matrix, load_submodule, parse_cdga_body, parse_cdga_header, CdgaHeader,
};
use crate::report::Report;
use crate::verify::run_axioms;

/// Resolve the window argument against the configured one.
pub fn pick_window<F: Field>(inst: &Instance<F>, window: Option<(i64, i64)>) -> (i64, i64) {
    window.unwrap_or((inst.a, inst.ceiling))
}

/// Turn a submodule file into a point of the window complex.  A file holding
/// only the floor degree is extended by generation and must hit the Hilbert
/// profile; a file covering the whole window is taken as given.
pub fn resolve_point<F: Field>(
    alg: &StretchAlgebra<F>,
    floor: i64,
    mats: Vec<SparseMat<F>>,
) -> Result<(SubmodulePoint<F>, Elt<F>)> {
    let (a, t) = alg.window();
    if floor != a {
        bail!("submodule floor {floor} does not match the window floor {a}");
    }
    let sub = if mats.len() as i64 == t - a + 1 {
        SubmodulePoint::new(a, mats)
    } else if mats.len() == 1 {
        let (dims, sub) = generated_submodule(&mats[0], alg.ring(), alg.module(), a, t);
        if dims != alg.h().values() {
            bail!(
                "generated submodule dimensions {dims:?} do not match the hilbert profile {:?}",
                alg.h().values()
            );
        }
        sub
    } else {
        bail!("submodule file must cover the full window or only the floor degree");
    };
    let gamma = alg.classical_point(&sub).map_err(|e| anyhow!("{e}"))?;
    Ok((sub, gamma))
}

fn load_point<F: Field>(
    alg: &StretchAlgebra<F>,
    path: &Path,
) -> Result<(SubmodulePoint<F>, Elt<F>)> {
    let (floor, mats) = load_submodule(alg.field(), path)?;
    resolve_point(alg, floor, mats)
}

fn require_prime<F: Field>(inst: &Instance<F>) -> Result<()> {
    if inst.field.modulus().is_none() {
        bail!("subspace enumeration requires a prime field; set `field = prime <q>`");
    }
    Ok(())
}

fn require_degree_one<F: Field>(inst: &Instance<F>) -> Result<()> {
    if !inst.ring.generated_in_degree_one() {
        bail!("{}", dgquot_core::Error::NotDegreeOneGenerated);
    }
    Ok(())
}

fn dims_line(dims: &[usize]) -> String {
    dims.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn instance_validate<F: Field>(cfg: &InstanceConfig, inst: &Instance<F>) -> Result<String> {
    let mut r = Report::new("instance validate");
    r.kv("instance", &inst.hash);
    r.kv("field", cfg.field.canonical());
    r.kv("window", format!("{} {}", inst.a, inst.ceiling));
    let ring_dims: Vec<usize> = (0..=inst.ceiling).map(|s| inst.ring.dim(s)).collect();
    r.kv("ring.dims", dims_line(&ring_dims));
    let module_dims: Vec<usize> = (inst.module.floor()..=inst.ceiling)
        .map(|s| inst.module.dim(s))
        .collect();
    r.kv("module.floor", inst.module.floor());
    r.kv("module.dims", dims_line(&module_dims));
    r.kv("hilbert", dims_line(inst.h.values()));
    inst.ring
        .check_associativity()
        .map_err(|e| anyhow!("{e}"))?;
    r.kv("checks.ring_associative", "pass");
    inst.module
        .check_action_associativity(&inst.ring)
        .map_err(|e| anyhow!("{e}"))?;
    r.kv("checks.module_action_associative", "pass");
    r.kv("checks.hilbert_within_module", "pass");
    r.kv(
        "ring.generated_in_degree_one",
        inst.ring.generated_in_degree_one(),
    );
    r.kv("seed", inst.seed);
    r.kv("valid", true);
    Ok(r.finish())
}

pub fn dgla_build<F: Field>(inst: &Instance<F>, window: Option<(i64, i64)>) -> Result<String> {
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    let mut r = Report::new("dgla build");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("k_max", alg.k_max());
    for k in 0..=alg.k_max() {
        r.kv(&format!("ambient[{k}]"), alg.ambient_dim(k));
        r.kv(&format!("dim[{k}]"), alg.l_dim(k));
        r.kv(&format!("components[{k}]"), alg.components(k).len());
    }
    r.kv("delta.support", alg.delta().support_len());
    Ok(r.finish())
}

pub fn dgla_verify<F: Field>(inst: &Instance<F>, window: Option<(i64, i64)>) -> Result<String> {
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    let outcome = run_axioms(&alg);
    if !outcome.passed() {
        bail!("axiom suite failed:\n{}", outcome.failures.join("\n"));
    }
    let mut r = Report::new("dgla verify");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv(
        "antisymmetry",
        format!("pass (pairs = {})", outcome.antisymmetry_pairs),
    );
    r.kv(
        "jacobi",
        format!("pass (triples = {})", outcome.jacobi_triples),
    );
    r.kv("d_squared", "pass");
    r.kv(
        "leibniz",
        format!("pass (pairs = {})", outcome.leibniz_pairs),
    );
    Ok(r.finish())
}

fn residual_lines<F: Field>(
    r: &mut Report,
    alg: &StretchAlgebra<F>,
    residual: &Elt<F>,
) {
    r.kv("residual.support", residual.support_len());
    for (&i, c) in &residual.coeffs {
        r.kv(
            &format!("residual[{}]", alg.label_of(residual.k, i)),
            alg.field().format(c),
        );
    }
}

pub fn mc_residual<F: Field>(
    inst: &Instance<F>,
    window: Option<(i64, i64)>,
    submodule: &Path,
) -> Result<String> {
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    let (sub, gamma) = load_point(&alg, submodule)?;
    let residual = alg.mc_residual(&gamma);
    let mut r = Report::new("mc residual");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("submodule.dims", dims_line(&sub.dims()));
    r.kv("gamma.support", gamma.support_len());
    residual_lines(&mut r, &alg, &residual);
    r.kv("residual_zero", residual.is_zero());
    Ok(r.finish())
}

pub fn mc_certify<F: Field>(
    inst: &Instance<F>,
    window: Option<(i64, i64)>,
    submodule: &Path,
) -> Result<String> {
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    let (sub, gamma) = load_point(&alg, submodule)?;
    sub.check_dims(alg.h()).map_err(|e| anyhow!("{e}"))?;
    let residual = alg.mc_residual(&gamma);
    if !residual.is_zero() {
        let (&i, c) = residual.coeffs.iter().next().expect("nonzero residual");
        bail!(
            "maurer-cartan residual is nonzero at {} (value {})",
            alg.label_of(residual.k, i),
            alg.field().format(c)
        );
    }
    let mut r = Report::new("mc certify");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("submodule.dims", dims_line(&sub.dims()));
    r.kv("gamma.support", gamma.support_len());
    r.kv("residual", 0);
    r.kv("certified", true);
    Ok(r.finish())
}

pub fn tangent_cohomology<F: Field>(
    inst: &Instance<F>,
    window: Option<(i64, i64)>,
    augmented: bool,
    submodule: &Path,
) -> Result<String> {
    require_degree_one(inst)?;
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    let (sub, gamma) = load_point(&alg, submodule)?;
    let dims = alg.tangent_cohomology(&gamma, augmented);
    let (oracle, _) = hom_quotient_oracle(&sub, &inst.ring, &inst.module);
    let mut r = Report::new("tangent cohomology");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("augmented", augmented);
    for (j, dim) in &dims {
        r.kv(&format!("h[{j}]"), dim);
    }
    r.kv("oracle", oracle);
    Ok(r.finish())
}

/// One sweep row: the ceiling, cohomology dims for depths `0..=depth`, and
/// the independent Hom-quotient oracle dimension.
pub struct SweepRow {
    pub t: i64,
    pub dims: Vec<usize>,
    pub oracle: usize,
}

pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// `stable[j]` = least ceiling from which the rows for depths `0..=j`
    /// all stay constant, observed on at least two sweep points.
    pub stable: Vec<Option<i64>>,
}

pub fn stabilization_table<F: Field>(
    inst: &Instance<F>,
    floor: i64,
    mats: &[SparseMat<F>],
    t_from: i64,
    t_to: i64,
    depth: usize,
    augmented: bool,
) -> Result<SweepTable> {
    require_degree_one(inst)?;
    if t_from < inst.a || t_to > inst.ceiling || t_from > t_to {
        bail!(
            "sweep range [{t_from}, {t_to}] must lie inside [{}, {}]",
            inst.a,
            inst.ceiling
        );
    }
    let mut rows = Vec::new();
    for t in t_from..=t_to {
        let alg = inst.algebra(inst.a, t)?;
        let keep = (t - floor + 1).max(1) as usize;
        let (sub, gamma) = resolve_point(&alg, floor, mats[..keep.min(mats.len())].to_vec())?;
        let table: BTreeMap<i64, usize> =
            alg.tangent_cohomology(&gamma, augmented).into_iter().collect();
        let dims: Vec<usize> = (0..=depth as i64)
            .map(|j| table.get(&(-j)).copied().unwrap_or(0))
            .collect();
        let (oracle, _) = hom_quotient_oracle(&sub, &inst.ring, &inst.module);
        rows.push(SweepRow { t, dims, oracle });
    }
    let mut stable = Vec::new();
    for j in 0..=depth {
        let mut worst: Option<i64> = None;
        for jp in 0..=j {
            let row: Vec<usize> = rows.iter().map(|r| r.dims[jp]).collect();
            let mut from = row.len() - 1;
            while from > 0 && row[from - 1] == row[from] {
                from -= 1;
            }
            // A row changing at the last point, or a single-point sweep,
            // shows no evidence of settling.
            if from + 1 >= row.len() {
                worst = None;
                break;
            }
            let t_here = t_from + from as i64;
            worst = Some(worst.map_or(t_here, |w: i64| w.max(t_here)));
        }
        stable.push(worst);
    }
    Ok(SweepTable { rows, stable })
}

pub fn tangent_sweep<F: Field>(
    inst: &Instance<F>,
    t_from: i64,
    t_to: i64,
    depth: usize,
    augmented: bool,
    submodule: &Path,
) -> Result<String> {
    let (floor, mats) = load_submodule(&inst.field, submodule)?;
    if mats.len() != 1 {
        bail!("the sweep extends a floor-degree seed; give a single-degree submodule file");
    }
    let table = stabilization_table(inst, floor, &mats, t_from, t_to, depth, augmented)?;
    let mut r = Report::new("tangent sweep");
    r.kv("instance", &inst.hash);
    r.kv("t_from", t_from);
    r.kv("t_to", t_to);
    r.kv("depth", depth);
    r.kv("augmented", augmented);
    for row in &table.rows {
        for (j, dim) in row.dims.iter().enumerate() {
            r.kv(&format!("h[{},{j}]", row.t), dim);
        }
        r.kv(&format!("oracle[{}]", row.t), row.oracle);
    }
    for (j, n) in table.stable.iter().enumerate() {
        match n {
            Some(t) => r.kv(&format!("n[{j}]"), t),
            None => r.kv(&format!("n[{j}]"), "not stabilized in range"),
        };
    }
    Ok(r.finish())
}

pub fn cdga_emit<F: Field>(
    cfg: &InstanceConfig,
    inst: &Instance<F>,
    window: Option<(i64, i64)>,
    out: &Path,
) -> Result<String> {
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    let pres = emit_cdga(&alg);
    let header = CdgaHeader {
        instance: inst.hash.clone(),
        window: (a, t),
        field: cfg.field,
    };
    let text = format_cdga(&header, &pres);
    std::fs::write(out, &text).map_err(|e| anyhow!("cannot write {}: {e}", out.display()))?;
    let mut counts: BTreeMap<i64, usize> = BTreeMap::new();
    for g in pres.generators() {
        *counts.entry(g.degree).or_insert(0) += 1;
    }
    let mut r = Report::new("cdga emit");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("generators", pres.len());
    for (deg, n) in counts {
        r.kv(&format!("generators[{deg}]"), n);
    }
    r.kv("bytes", text.len());
    r.kv("sha256", hex_sha256(text.as_bytes()));
    Ok(r.finish())
}

pub fn cdga_check<F: Field>(
    cfg: &InstanceConfig,
    inst: &Instance<F>,
    file: &Path,
) -> Result<String> {
    let text =
        std::fs::read_to_string(file).map_err(|e| anyhow!("cannot read {}: {e}", file.display()))?;
    let header = parse_cdga_header(&text)?;
    if header.instance != inst.hash {
        bail!(
            "file was emitted from instance {}, the config describes {}",
            header.instance,
            inst.hash
        );
    }
    if header.field != cfg.field {
        bail!("file field does not match the config field");
    }
    let (a, t) = header.window;
    let pres = parse_cdga_body(inst.field.clone(), &text)?;
    for (id, g) in pres.generators().iter().enumerate() {
        if g.degree != 1 - g.label.k as i64 {
            bail!("generator {id} has degree {} but its label sits in homological degree {}",
                g.degree, g.label.k);
        }
    }
    if let Some(id) = pres.d_squared_defect() {
        bail!("d squared is nonzero on generator {id}");
    }
    let round_trip = format_cdga(&header, &pres);
    if round_trip != text {
        bail!("parse followed by emit does not reproduce the file");
    }
    let alg = inst.algebra(a, t)?;
    let fresh = format_cdga(&header, &emit_cdga(&alg));
    if fresh != text {
        bail!("file differs from a fresh emission for this instance and window");
    }
    let mut r = Report::new("cdga check");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("generators", pres.len());
    r.kv("labels", "consistent");
    r.kv("d_squared", "pass");
    r.kv("round_trip", "identical");
    r.kv("matches_instance", true);
    Ok(r.finish())
}

pub fn quot_find_b<F: Field>(inst: &Instance<F>, cap: Option<i64>) -> Result<String> {
    require_prime(inst)?;
    let cap = cap.unwrap_or(inst.ceiling);
    let search = find_b(&inst.ring, &inst.module, &inst.h, cap);
    let mut r = Report::new("quot find-b");
    r.kv("instance", &inst.hash);
    r.kv("cap", cap);
    for (b, seeds, passing) in &search.trials {
        r.kv(
            &format!("trial[{b}]"),
            format!("seeds {seeds}, passing {passing}"),
        );
    }
    match search.b {
        Some(b) => r.kv("b", b),
        None => r.kv("b", "none"),
    };
    r.kv("witnesses", search.witness_seeds.len());
    for (i, m) in search.witness_seeds.iter().enumerate() {
        r.kv(&format!("witness[{i}]"), format_matrix(&inst.field, m));
    }
    Ok(r.finish())
}

pub fn quot_propagation<F: Field>(
    inst: &Instance<F>,
    window: Option<(i64, i64)>,
    b: i64,
    twists: usize,
    samples: usize,
) -> Result<String> {
    require_prime(inst)?;
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    if b < a || b > t {
        bail!("b = {b} must lie inside the window [{a}, {t}]");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);
    let report = propagation_check(&alg, b, twists, samples, &mut rng);
    let mut r = Report::new("quot propagation");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("b", b);
    r.kv("enumerated_points", report.enumerated_points);
    r.kv("gauge_twists", report.gauge_twists);
    r.kv("samples", report.samples);
    r.kv("assoc_passing", report.assoc_passing);
    r.kv("sampled_points", report.sampled_points);
    r.kv("counterexamples", report.counterexamples.len());
    for (i, dump) in report.counterexamples.iter().enumerate() {
        for line in dump.lines() {
            r.raw(format!("counterexample[{i}] {line}"));
        }
    }
    r.kv(
        "verdict",
        if report.counterexamples.is_empty() {
            "no counterexample found (evidence, not proof)"
        } else {
            "COUNTEREXAMPLES FOUND"
        },
    );
    Ok(r.finish())
}

pub fn quot_compare<F: Field>(
    inst: &Instance<F>,
    window: Option<(i64, i64)>,
    b: i64,
) -> Result<String> {
    require_prime(inst)?;
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    if b < a || b > t {
        bail!("b = {b} must lie inside the window [{a}, {t}]");
    }
    let report = quotient_comparison(&alg, b);
    let mut r = Report::new("quot compare");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("b", b);
    r.kv("chain_points", report.chain_points);
    r.kv("v_locus", report.v_count);
    r.kv("x_locus", report.x_count);
    r.kv("geometric_locus", report.geometric_count);
    r.kv("v_and_mc_implies_x", report.v_implies_x);
    r.kv("x_implies_geometric", report.x_implies_geometric);
    r.kv("rank_bounds", report.rank_bounds);
    Ok(r.finish())
}

pub fn quot_invariants<F: Field>(
    inst: &Instance<F>,
    window: Option<(i64, i64)>,
    b: i64,
    submodule: &Path,
) -> Result<String> {
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    if b < a || b > t {
        bail!("b = {b} must lie inside the window [{a}, {t}]");
    }
    let (_, gamma) = load_point(&alg, submodule)?;
    let coords = invariant_coordinates(&alg, &gamma, b).map_err(|e| anyhow!("{e}"))?;
    let mut r = Report::new("quot invariants");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("b", b);
    r.kv("coordinates", coords.coords.len());
    for ((profile, s_prime), m) in &coords.coords {
        let profile_text = profile
            .iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(",");
        let key = format!("[{profile_text}; {s_prime}]");
        r.kv(&format!("coord{key}"), format_matrix(&inst.field, m));
        r.kv(&format!("rank{key}"), m.rank());
    }
    r.kv("rank_bounds", coords.rank_bounds_hold(alg.h()));
    r.kv("geometric", coords.geometric_locus(alg.h()));
    Ok(r.finish())
}

pub fn quot_action_check<F: Field>(
    inst: &Instance<F>,
    window: Option<(i64, i64)>,
    b: i64,
    pairs: usize,
    elements: usize,
    submodule: &Path,
) -> Result<String> {
    let (a, t) = pick_window(inst, window);
    let alg = inst.algebra(a, t)?;
    if b < a || b > t {
        bail!("b = {b} must lie inside the window [{a}, {t}]");
    }
    let (_, gamma) = load_point(&alg, submodule)?;
    let f = inst.field.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed);

    for i in 0..pairs {
        let g1 = GroupElement::random(&f, alg.h(), a, t, a, &mut rng);
        let g2 = GroupElement::random(&f, alg.h(), a, t, a, &mut rng);
        let stepwise = act(&alg, &g2, &act(&alg, &g1, &gamma));
        let composed = act(&alg, &g1.compose(&g2), &gamma);
        if stepwise != composed {
            bail!("right-action law fails on pair {i}");
        }
    }

    let flags = rank_locus_predicates(&alg, &gamma, b);
    let base_coords = invariant_coordinates(&alg, &gamma, b).map_err(|e| anyhow!("{e}"))?;
    let base_text: BTreeMap<_, String> = base_coords
        .coords
        .iter()
        .map(|(k, m)| (k.clone(), format_matrix(&f, m)))
        .collect();

    for i in 0..elements {
        let g = GroupElement::random(&f, alg.h(), a, t, a, &mut rng);
        let moved = act(&alg, &g, &gamma);
        if !alg.mc_residual(&moved).is_zero() {
            bail!("maurer-cartan locus is not preserved by element {i}");
        }
        let moved_flags = rank_locus_predicates(&alg, &moved, b);
        if moved_flags != flags {
            bail!("locus membership changes under element {i}");
        }
    }

    for i in 0..elements {
        let g = GroupElement::random(&f, alg.h(), a, t, b + 1, &mut rng);
        let moved = act(&alg, &g, &gamma);
        let coords = invariant_coordinates(&alg, &moved, b).map_err(|e| anyhow!("{e}"))?;
        if coords.coords.len() != base_text.len() {
            bail!("coordinate count changes under element {i} supported above b");
        }
        for (k, m) in &coords.coords {
            if base_text.get(k).map(String::as_str) != Some(format_matrix(&f, m).as_str()) {
                bail!(
                    "coordinate [{:?}; {}] changes under element {i} supported above b",
                    k.0,
                    k.1
                );
            }
        }
    }

    let mut r = Report::new("quot action-check");
    r.kv("instance", &inst.hash);
    r.kv("window", format!("{a} {t}"));
    r.kv("b", b);
    r.kv("pairs", pairs);
    r.kv("right_action_law", "pass");
    r.kv("elements", elements);
    r.kv("mc_preserved", "pass");
    r.kv("loci_invariant", "pass");
    r.kv("coordinates_invariant_above_b", "pass");
    Ok(r.finish())
}
