//! Instance description files.
//!
//! The grammar is line-based `key = value` text.  Blank lines and lines
//! starting with `#` are ignored; every other line must carry exactly one
//! `=`.  Keys may take arguments on the left of the `=`, as in
//! `ring_mult 1 2 = (...)`.  Parse and validation errors cite the offending
//! line so a config can be fixed without guesswork.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{anyhow, bail, Result};
use dgquot_core::dgla::StretchAlgebra;
use dgquot_core::graded::{
    build_free_module, build_polynomial_ring, GradedModule, GradedRing, HilbertData,
};
use dgquot_core::matrix::SparseMat;
use dgquot_core::scalar::{Field, PrimeField, Rationals};
use sha2::{Digest, Sha256};

use crate::formats::{format_matrix_text, parse_matrix_text, MatrixText};

/// Scalar field named by the config; `prime q` requires q prime.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldSpec {
    Rational,
    Prime(u32),
}

impl FieldSpec {
    pub fn canonical(&self) -> String {
        match self {
            FieldSpec::Rational => "rational".into(),
            FieldSpec::Prime(q) => format!("prime {q}"),
        }
    }

    pub fn parse(value: &str) -> Result<FieldSpec, String> {
        let toks: Vec<&str> = value.split_whitespace().collect();
        match toks.as_slice() {
            ["rational"] => Ok(FieldSpec::Rational),
            ["prime", q] => {
                let q: u32 = q
                    .parse()
                    .map_err(|_| format!("`{q}` is not a valid modulus"))?;
                if !is_prime(q) {
                    return Err(format!("field modulus {q} is not prime"));
                }
                Ok(FieldSpec::Prime(q))
            }
            _ => Err(format!(
                "expected `rational` or `prime <q>`, found `{value}`"
            )),
        }
    }
}

fn is_prime(q: u32) -> bool {
    if q < 2 {
        return false;
    }
    let mut d = 2u64;
    let q = q as u64;
    while d * d <= q {
        if q % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

#[derive(Clone, Debug)]
pub enum RingSpec {
    Polynomial {
        vars: usize,
    },
    Raw {
        dims: Vec<usize>,
        mult: BTreeMap<(i64, i64), MatrixText>,
        degree_one_generated: bool,
    },
}

#[derive(Clone, Debug)]
pub enum ModuleSpec {
    Free {
        rank: usize,
        floor: i64,
    },
    Raw {
        floor: i64,
        dims: Vec<usize>,
        action: BTreeMap<(i64, i64), MatrixText>,
    },
}

/// Parsed instance description: everything a command needs to rebuild the
/// ring, module, Hilbert profile, and sampling seed.
#[derive(Clone, Debug)]
pub struct InstanceConfig {
    pub field: FieldSpec,
    pub ring: RingSpec,
    pub module: ModuleSpec,
    pub floor: i64,
    pub ceiling: i64,
    pub hilbert: Vec<usize>,
    pub seed: u64,
}

/// One parsed value together with the 1-based line it came from, so
/// cross-key validation can still cite a location.
struct Keyed<T> {
    line: usize,
    value: T,
}

struct RawKeys {
    field: Option<Keyed<FieldSpec>>,
    ring: Option<Keyed<Vec<String>>>,
    ring_dims: Option<Keyed<Vec<usize>>>,
    ring_mult: BTreeMap<(i64, i64), Keyed<MatrixText>>,
    ring_degree_one: Option<Keyed<bool>>,
    module: Option<Keyed<Vec<String>>>,
    module_dims: Option<Keyed<Vec<usize>>>,
    module_action: BTreeMap<(i64, i64), Keyed<MatrixText>>,
    floor: Option<Keyed<i64>>,
    ceiling: Option<Keyed<i64>>,
    hilbert: Option<Keyed<Vec<usize>>>,
    seed: Option<Keyed<u64>>,
}

impl InstanceConfig {
    pub fn parse_file(path: &Path) -> Result<InstanceConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| anyhow!("cannot read {}: {e}", path.display()))?;
        InstanceConfig::parse(&path.display().to_string(), &text)
    }

    /// Parse config text; `origin` names the source in diagnostics.
    pub fn parse(origin: &str, text: &str) -> Result<InstanceConfig> {
        let mut raw = RawKeys {
            field: None,
            ring: None,
            ring_dims: None,
            ring_mult: BTreeMap::new(),
            ring_degree_one: None,
            module: None,
            module_dims: None,
            module_action: BTreeMap::new(),
            floor: None,
            ceiling: None,
            hilbert: None,
            seed: None,
        };
        for (idx, line) in text.lines().enumerate() {
            let no = idx + 1;
            let at = |msg: String| anyhow!("{origin}:{no}: {msg}");
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, value) = line
                .split_once('=')
                .ok_or_else(|| at("expected `key = value`".into()))?;
            let value = value.trim();
            let mut lhs_tokens = lhs.split_whitespace();
            let key = lhs_tokens
                .next()
                .ok_or_else(|| at("missing key before `=`".into()))?;
            let args: Vec<&str> = lhs_tokens.collect();
            let no_args = |raw_args: &[&str]| -> Result<()> {
                if raw_args.is_empty() {
                    Ok(())
                } else {
                    Err(at(format!("key `{key}` takes no arguments")))
                }
            };
            match key {
                "field" => {
                    no_args(&args)?;
                    let spec = FieldSpec::parse(value).map_err(&at)?;
                    put(&mut raw.field, key, no, spec, origin)?;
                }
                "ring" => {
                    no_args(&args)?;
                    let toks: Vec<String> =
                        value.split_whitespace().map(str::to_owned).collect();
                    put(&mut raw.ring, key, no, toks, origin)?;
                }
                "ring_dims" => {
                    no_args(&args)?;
                    let dims = parse_usize_list(value).map_err(&at)?;
                    put(&mut raw.ring_dims, key, no, dims, origin)?;
                }
                "ring_mult" => {
                    let (s1, s2) = two_int_args(&args).map_err(&at)?;
                    let m = parse_matrix_text(value).map_err(&at)?;
                    if raw.ring_mult.insert((s1, s2), Keyed { line: no, value: m }).is_some() {
                        bail!("{origin}:{no}: duplicate key `ring_mult {s1} {s2}`");
                    }
                }
                "ring_generated_in_degree_one" => {
                    no_args(&args)?;
                    let b = parse_bool(value).map_err(&at)?;
                    put(&mut raw.ring_degree_one, key, no, b, origin)?;
                }
                "module" => {
                    no_args(&args)?;
                    let toks: Vec<String> =
                        value.split_whitespace().map(str::to_owned).collect();
                    put(&mut raw.module, key, no, toks, origin)?;
                }
                "module_dims" => {
                    no_args(&args)?;
                    let dims = parse_usize_list(value).map_err(&at)?;
                    put(&mut raw.module_dims, key, no, dims, origin)?;
                }
                "module_action" => {
                    let (d, s) = two_int_args(&args).map_err(&at)?;
                    let m = parse_matrix_text(value).map_err(&at)?;
                    if raw.module_action.insert((d, s), Keyed { line: no, value: m }).is_some() {
                        bail!("{origin}:{no}: duplicate key `module_action {d} {s}`");
                    }
                }
                "floor" => {
                    no_args(&args)?;
                    let v = value
                        .parse()
                        .map_err(|_| at(format!("expected an integer, found `{value}`")))?;
                    put(&mut raw.floor, key, no, v, origin)?;
                }
                "ceiling" => {
                    no_args(&args)?;
                    let v = value
                        .parse()
                        .map_err(|_| at(format!("expected an integer, found `{value}`")))?;
                    put(&mut raw.ceiling, key, no, v, origin)?;
                }
                "hilbert" => {
                    no_args(&args)?;
                    let vals = parse_usize_list(value).map_err(&at)?;
                    put(&mut raw.hilbert, key, no, vals, origin)?;
                }
                "seed" => {
                    no_args(&args)?;
                    let v = value
                        .parse()
                        .map_err(|_| at(format!("expected an unsigned integer, found `{value}`")))?;
                    put(&mut raw.seed, key, no, v, origin)?;
                }
                other => bail!("{origin}:{no}: unknown key `{other}`"),
            }
        }
        assemble(origin, raw)
    }

    /// Fixed-layout re-serialization; scalar entries inside raw tensors are
    /// normalized through the bound field, so two files describing the same
    /// instance canonicalize (and hash) identically.
    pub fn canonical_text<F: Field>(&self, field: &F) -> Result<String> {
        let mut out = String::new();
        let _ = writeln!(out, "field = {}", self.field.canonical());
        match &self.ring {
            RingSpec::Polynomial { vars } => {
                let _ = writeln!(out, "ring = polynomial {vars}");
            }
            RingSpec::Raw {
                dims,
                mult,
                degree_one_generated,
            } => {
                let _ = writeln!(out, "ring = raw");
                let _ = writeln!(out, "ring_dims = {}", join_usizes(dims));
                let _ = writeln!(out, "ring_generated_in_degree_one = {degree_one_generated}");
                for ((s1, s2), m) in mult {
                    let _ = writeln!(
                        out,
                        "ring_mult {s1} {s2} = {}",
                        canonical_matrix_text(field, m)?
                    );
                }
            }
        }
        match &self.module {
            ModuleSpec::Free { rank, floor } => {
                let _ = writeln!(out, "module = free {rank} {floor}");
            }
            ModuleSpec::Raw {
                floor,
                dims,
                action,
            } => {
                let _ = writeln!(out, "module = raw {floor}");
                let _ = writeln!(out, "module_dims = {}", join_usizes(dims));
                for ((d, s), m) in action {
                    let _ = writeln!(
                        out,
                        "module_action {d} {s} = {}",
                        canonical_matrix_text(field, m)?
                    );
                }
            }
        }
        let _ = writeln!(out, "floor = {}", self.floor);
        let _ = writeln!(out, "ceiling = {}", self.ceiling);
        let _ = writeln!(out, "hilbert = {}", join_usizes(&self.hilbert));
        let _ = writeln!(out, "seed = {}", self.seed);
        Ok(out)
    }

    /// Bind the field and build the graded data.  Invariant violations come
    /// back as errors naming the violated invariant.
    pub fn instantiate(&self) -> Result<AnyInstance> {
        match self.field {
            FieldSpec::Rational => Ok(AnyInstance::Rational(build_instance(self, Rationals)?)),
            FieldSpec::Prime(q) => Ok(AnyInstance::Prime(build_instance(
                self,
                PrimeField::new(q),
            )?)),
        }
    }
}

fn put<T>(slot: &mut Option<Keyed<T>>, key: &str, line: usize, value: T, origin: &str) -> Result<()> {
    if slot.is_some() {
        bail!("{origin}:{line}: duplicate key `{key}`");
    }
    *slot = Some(Keyed { line, value });
    Ok(())
}

fn two_int_args(args: &[&str]) -> Result<(i64, i64), String> {
    match args {
        [a, b] => {
            let a = a
                .parse()
                .map_err(|_| format!("`{a}` is not a valid integer argument"))?;
            let b = b
                .parse()
                .map_err(|_| format!("`{b}` is not a valid integer argument"))?;
            Ok((a, b))
        }
        _ => Err("expected exactly two integer arguments".into()),
    }
}

fn parse_usize_list(value: &str) -> Result<Vec<usize>, String> {
    value
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| format!("`{t}` is not a valid non-negative integer"))
        })
        .collect()
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected `true` or `false`, found `{value}`")),
    }
}

fn join_usizes(v: &[usize]) -> String {
    v.iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn canonical_matrix_text<F: Field>(field: &F, m: &MatrixText) -> Result<String> {
    let mut entries = Vec::with_capacity(m.2.len());
    for (r, c, v) in &m.2 {
        let e = field
            .parse(v)
            .map_err(|_| anyhow!("matrix entry `{v}` does not parse over the field"))?;
        entries.push((*r, *c, field.format(&e)));
    }
    entries.sort();
    Ok(format_matrix_text(m.0, m.1, &entries))
}

fn require<T>(slot: Option<Keyed<T>>, key: &str, origin: &str) -> Result<Keyed<T>> {
    slot.ok_or_else(|| anyhow!("{origin}: missing required key `{key}`"))
}

fn forbid<T>(slot: &Option<Keyed<T>>, key: &str, reason: &str, origin: &str) -> Result<()> {
    if let Some(k) = slot {
        bail!("{origin}:{}: key `{key}` {reason}", k.line);
    }
    Ok(())
}

fn assemble(origin: &str, raw: RawKeys) -> Result<InstanceConfig> {
    let field = require(raw.field, "field", origin)?.value;
    let floor_k = require(raw.floor, "floor", origin)?;
    let floor = floor_k.value;
    if floor < 1 {
        bail!("{origin}:{}: floor must be at least 1", floor_k.line);
    }
    let ceiling_k = require(raw.ceiling, "ceiling", origin)?;
    let ceiling = ceiling_k.value;
    if ceiling < floor {
        bail!(
            "{origin}:{}: ceiling must be at least the floor {floor}",
            ceiling_k.line
        );
    }
    let hilbert_k = require(raw.hilbert, "hilbert", origin)?;
    let expected = (ceiling - floor + 1) as usize;
    if hilbert_k.value.len() != expected {
        bail!(
            "{origin}:{}: hilbert needs {expected} values for degrees {floor}..{ceiling}, found {}",
            hilbert_k.line,
            hilbert_k.value.len()
        );
    }
    let seed = require(raw.seed, "seed", origin)?.value;

    let ring_k = require(raw.ring, "ring", origin)?;
    let ring_toks: Vec<&str> = ring_k.value.iter().map(String::as_str).collect();
    let ring = match ring_toks.as_slice() {
        ["polynomial", n] => {
            let vars: usize = n.parse().map_err(|_| {
                anyhow!(
                    "{origin}:{}: `{n}` is not a valid variable count",
                    ring_k.line
                )
            })?;
            forbid(&raw.ring_dims, "ring_dims", "requires `ring = raw`", origin)?;
            forbid(
                &raw.ring_degree_one,
                "ring_generated_in_degree_one",
                "requires `ring = raw`",
                origin,
            )?;
            if let Some(((s1, s2), k)) = raw.ring_mult.iter().next() {
                bail!(
                    "{origin}:{}: key `ring_mult {s1} {s2}` requires `ring = raw`",
                    k.line
                );
            }
            RingSpec::Polynomial { vars }
        }
        ["raw"] => {
            let dims_k = require(raw.ring_dims, "ring_dims", origin)?;
            if dims_k.value.first() != Some(&1) {
                bail!(
                    "{origin}:{}: ring_dims must start with 1 (the degree-0 component)",
                    dims_k.line
                );
            }
            if (dims_k.value.len() as i64 - 1) < ceiling {
                bail!(
                    "{origin}:{}: ring_dims must reach the ceiling {ceiling}",
                    dims_k.line
                );
            }
            let degree_one_generated = raw.ring_degree_one.map_or(true, |k| k.value);
            let mult = raw
                .ring_mult
                .into_iter()
                .map(|(k, v)| (k, v.value))
                .collect();
            RingSpec::Raw {
                dims: dims_k.value,
                mult,
                degree_one_generated,
            }
        }
        _ => bail!(
            "{origin}:{}: expected `polynomial <vars>` or `raw`",
            ring_k.line
        ),
    };

    let module_k = require(raw.module, "module", origin)?;
    let module_toks: Vec<&str> = module_k.value.iter().map(String::as_str).collect();
    let module = match module_toks.as_slice() {
        ["free", rest @ ..] => {
            forbid(
                &raw.module_dims,
                "module_dims",
                "requires `module = raw`",
                origin,
            )?;
            if let Some(((d, s), k)) = raw.module_action.iter().next() {
                bail!(
                    "{origin}:{}: key `module_action {d} {s}` requires `module = raw`",
                    k.line
                );
            }
            let (rank, mfloor) = match rest {
                [r] => (r, floor),
                [r, f] => (
                    r,
                    f.parse().map_err(|_| {
                        anyhow!(
                            "{origin}:{}: `{f}` is not a valid module floor",
                            module_k.line
                        )
                    })?,
                ),
                _ => bail!(
                    "{origin}:{}: expected `free <rank> [<floor>]`",
                    module_k.line
                ),
            };
            let rank: usize = rank.parse().map_err(|_| {
                anyhow!("{origin}:{}: `{rank}` is not a valid rank", module_k.line)
            })?;
            ModuleSpec::Free {
                rank,
                floor: mfloor,
            }
        }
        ["raw", f] => {
            let mfloor: i64 = f.parse().map_err(|_| {
                anyhow!(
                    "{origin}:{}: `{f}` is not a valid module floor",
                    module_k.line
                )
            })?;
            let dims_k = require(raw.module_dims, "module_dims", origin)?;
            if mfloor + dims_k.value.len() as i64 - 1 < ceiling {
                bail!(
                    "{origin}:{}: module_dims must reach the ceiling {ceiling}",
                    dims_k.line
                );
            }
            let action = raw
                .module_action
                .into_iter()
                .map(|(k, v)| (k, v.value))
                .collect();
            ModuleSpec::Raw {
                floor: mfloor,
                dims: dims_k.value,
                action,
            }
        }
        _ => bail!(
            "{origin}:{}: expected `free <rank> [<floor>]` or `raw <floor>`",
            module_k.line
        ),
    };

    Ok(InstanceConfig {
        field,
        ring,
        module,
        floor,
        ceiling,
        hilbert: hilbert_k.value,
        seed,
    })
}

/// A config bound to a concrete field, with the graded data built out to the
/// window ceiling and the canonical instance hash computed.
pub struct Instance<F: Field> {
    pub field: F,
    pub ring: GradedRing<F>,
    pub module: GradedModule<F>,
    pub h: HilbertData,
    pub a: i64,
    pub ceiling: i64,
    pub seed: u64,
    pub hash: String,
}

impl<F: Field> Instance<F> {
    /// The window complex on `[a, t]`; both bounds may narrow the config
    /// window but must stay inside it.
    pub fn algebra(&self, a: i64, t: i64) -> Result<StretchAlgebra<F>> {
        if a < self.a || t > self.ceiling || a > t {
            bail!(
                "window [{a}, {t}] must lie inside the configured window [{}, {}]",
                self.a,
                self.ceiling
            );
        }
        StretchAlgebra::build(
            self.ring.clone(),
            self.module.clone(),
            self.h.truncate(t),
            a,
            t,
        )
        .map_err(|e| anyhow!("{e}"))
    }
}

pub enum AnyInstance {
    Rational(Instance<Rationals>),
    Prime(Instance<PrimeField>),
}

fn build_instance<F: Field>(cfg: &InstanceConfig, field: F) -> Result<Instance<F>> {
    let ring = match &cfg.ring {
        RingSpec::Polynomial { vars } => build_polynomial_ring(field.clone(), *vars, cfg.ceiling),
        RingSpec::Raw {
            dims,
            mult,
            degree_one_generated,
        } => {
            let mut maps = BTreeMap::new();
            for (&(s1, s2), m) in mult {
                maps.insert((s1, s2), realize_matrix(&field, m)?);
            }
            GradedRing::from_raw(field.clone(), dims.clone(), maps, *degree_one_generated)
                .map_err(|e| anyhow!("{e}"))?
        }
    };
    let module = match &cfg.module {
        ModuleSpec::Free { rank, floor } => build_free_module(&ring, *rank, *floor, cfg.ceiling),
        ModuleSpec::Raw {
            floor,
            dims,
            action,
        } => {
            let mut maps = BTreeMap::new();
            for (&(d, s), m) in action {
                maps.insert((d, s), realize_matrix(&field, m)?);
            }
            GradedModule::from_raw(&ring, *floor, dims.clone(), maps)
                .map_err(|e| anyhow!("{e}"))?
        }
    };
    if cfg.floor < module.floor() {
        bail!(
            "floor {} lies below the module floor {}",
            cfg.floor,
            module.floor()
        );
    }
    let h = HilbertData::new(cfg.floor, cfg.hilbert.clone(), &module).map_err(|e| anyhow!("{e}"))?;
    let canonical = cfg.canonical_text(&field)?;
    let hash = hex_sha256(canonical.as_bytes());
    Ok(Instance {
        field,
        ring,
        module,
        h,
        a: cfg.floor,
        ceiling: cfg.ceiling,
        seed: cfg.seed,
        hash,
    })
}

fn realize_matrix<F: Field>(field: &F, m: &MatrixText) -> Result<SparseMat<F>> {
    let mut entries = Vec::with_capacity(m.2.len());
    for (r, c, v) in &m.2 {
        if *r >= m.0 || *c >= m.1 {
            bail!(
                "matrix entry ({r}, {c}) lies outside the {} x {} shape",
                m.0,
                m.1
            );
        }
        let e = field
            .parse(v)
            .map_err(|_| anyhow!("matrix entry `{v}` does not parse over the field"))?;
        entries.push((*r, *c, e));
    }
    SparseMat::from_triplets(field.clone(), m.0, m.1, entries).map_err(|e| anyhow!("{e}"))
}

pub fn hex_sha256(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = write!(out, "{b:02x}");
    }
    out
}
