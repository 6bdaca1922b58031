//! Config parsing, file formats, and command plumbing.
//!
//! Library-level tests drive `config`/`formats`/`commands` directly; the
//! handful of process-level tests at the bottom pin exit codes and stderr
//! shapes of the installed binary.

use std::path::PathBuf;
use std::process::Command;

use dgquot_cli::commands;
use dgquot_cli::config::{AnyInstance, Instance, InstanceConfig};
use dgquot_cli::formats::{
    format_cdga, format_matrix_text, format_submodule, load_submodule, parse_cdga_body,
    parse_cdga_header, parse_label, parse_matrix_text, CdgaHeader,
};
use dgquot_core::cdga::emit_cdga;
use dgquot_core::scalar::{Field, PrimeField, Rationals};

const I1: &str = "field = rational\nring = polynomial 2\nmodule = free 1 1\nfloor = 1\nceiling = 4\nhilbert = 1 2 3 4\nseed = 42\n";

fn parse_err(text: &str) -> String {
    format!("{:#}", InstanceConfig::parse("t.cfg", text).unwrap_err())
}

fn rational_instance(text: &str) -> Instance<Rationals> {
    let cfg = InstanceConfig::parse("t.cfg", text).unwrap();
    match cfg.instantiate().unwrap() {
        AnyInstance::Rational(inst) => inst,
        AnyInstance::Prime(_) => panic!("expected a rational instance"),
    }
}

/// Unique scratch path; tests run in parallel inside one process.
fn scratch(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("dgquot-test-{}-{name}", std::process::id()))
}

#[test]
fn unknown_and_duplicate_keys_are_cited_by_line() {
    let e = parse_err("field = rational\nring = polynomial 2\nmodule = free 1\nfloor = 1\nflor = 2\n");
    assert_eq!(e, "t.cfg:5: unknown key `flor`");
    let e = parse_err("field = rational\nfield = rational\n");
    assert_eq!(e, "t.cfg:2: duplicate key `field`");
}

#[test]
fn missing_required_keys_are_named() {
    let e = parse_err(&I1.replace("seed = 42\n", ""));
    assert_eq!(e, "t.cfg: missing required key `seed`");
}

#[test]
fn hilbert_length_must_cover_the_window() {
    let e = parse_err(&I1.replace("hilbert = 1 2 3 4", "hilbert = 1 2 3"));
    assert_eq!(
        e,
        "t.cfg:6: hilbert needs 4 values for degrees 1..4, found 3"
    );
}

#[test]
fn composite_moduli_are_rejected() {
    let e = parse_err(&I1.replace("field = rational", "field = prime 6"));
    assert_eq!(e, "t.cfg:1: field modulus 6 is not prime");
}

#[test]
fn floor_and_ceiling_bounds_are_enforced() {
    let e = parse_err(&I1.replace("floor = 1", "floor = 0"));
    assert_eq!(e, "t.cfg:4: floor must be at least 1");
    let e = parse_err(&I1.replace("ceiling = 4", "ceiling = 0"));
    assert_eq!(e, "t.cfg:5: ceiling must be at least the floor 1");
}

#[test]
fn raw_only_keys_need_a_raw_ring_or_module() {
    let e = parse_err(&format!("{I1}ring_dims = 1 2 3 4 5\n"));
    assert_eq!(e, "t.cfg:8: key `ring_dims` requires `ring = raw`");
    let e = parse_err(&format!("{I1}module_action 1 1 = (3, 2, [])\n"));
    assert_eq!(e, "t.cfg:8: key `module_action 1 1` requires `ring = raw`".replace("ring = raw", "module = raw"));
}

#[test]
fn oversized_hilbert_values_are_rejected_at_instantiation() {
    // dim M_1 = 2 here, so h(1) = 3 breaks the profile invariant.
    let cfg =
        InstanceConfig::parse("t.cfg", &I1.replace("hilbert = 1 2 3 4", "hilbert = 3 2 3 4"))
            .unwrap();
    let e = match cfg.instantiate() {
        Ok(_) => panic!("oversized profile must be rejected"),
        Err(e) => format!("{e:#}"),
    };
    assert!(
        e.contains("hilbert exceeds module dimension at degree 1"),
        "got: {e}"
    );
}

#[test]
fn equivalent_layouts_hash_identically() {
    let inst = rational_instance(I1);
    let shuffled = "seed = 42\n\nhilbert = 1   2 3 4\nmodule = free 1 1\nceiling = 4\nfloor = 1\nring = polynomial 2\nfield = rational\n";
    assert_eq!(inst.hash, rational_instance(shuffled).hash);
    let reseeded = rational_instance(&I1.replace("seed = 42", "seed = 43"));
    assert_ne!(inst.hash, reseeded.hash);
}

#[test]
fn matrix_text_round_trips() {
    for text in ["(3, 2, [(0, 0, 1/1), (1, 1, -2/3)])", "(2, 0, [])", "(0, 0, [])"] {
        let m = parse_matrix_text(text).unwrap();
        assert_eq!(format_matrix_text(m.0, m.1, &m.2), text);
    }
    assert!(parse_matrix_text("(3, 2, [(0 0 1)])").is_err());
    assert!(parse_matrix_text("(3, 2)").is_err());
}

#[test]
fn labels_round_trip_through_display() {
    for text in [
        "phi:1:2:1,1:0,0,0",
        "psi:2:3:1,2:0,4,11",
        "rho:1:2:1,1:0,1,2",
        "mu:0:2:2:1,2",
    ] {
        let label = parse_label(text).unwrap();
        assert_eq!(label.to_string(), text);
    }
    assert!(parse_label("eta:1:2:1:0").is_err());
    assert!(parse_label("phi:1:2").is_err());
}

#[test]
fn submodule_files_round_trip() {
    let inst = rational_instance(I1);
    let f = inst.field.clone();
    let x = dgquot_core::matrix::SparseMat::from_triplets(f.clone(), 2, 1, vec![(0, 0, f.one())])
        .unwrap();
    let text = format_submodule(&f, 1, &[x.clone()]);
    let path = scratch("round.sub");
    std::fs::write(&path, &text).unwrap();
    let (floor, mats) = load_submodule(&f, &path).unwrap();
    assert_eq!(floor, 1);
    assert_eq!(mats.len(), 1);
    assert_eq!(format_submodule(&f, floor, &mats), text);
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn cdga_files_round_trip_bitwise() {
    let inst = rational_instance(I1);
    let alg = inst.algebra(1, 2).unwrap();
    let header = CdgaHeader {
        instance: inst.hash.clone(),
        window: (1, 2),
        field: dgquot_cli::config::FieldSpec::Rational,
    };
    let text = format_cdga(&header, &emit_cdga(&alg));
    let parsed_header = parse_cdga_header(&text).unwrap();
    assert_eq!(parsed_header.instance, inst.hash);
    assert_eq!(parsed_header.window, (1, 2));
    let pres = parse_cdga_body(Rationals, &text).unwrap();
    assert_eq!(format_cdga(&parsed_header, &pres), text);
    // Generator ids are positional; renumbering must fail the parse.
    assert!(parse_cdga_body(Rationals, &text.replacen("g 0 ", "g 9 ", 1)).is_err());
    assert!(parse_cdga_body(Rationals, &format!("{text}junk\n")).is_err());
}

#[test]
fn cdga_files_round_trip_over_a_prime_field() {
    let cfg = InstanceConfig::parse("t.cfg", &I1.replace("field = rational", "field = prime 5"))
        .unwrap();
    let AnyInstance::Prime(inst) = cfg.instantiate().unwrap() else {
        panic!("expected a prime instance");
    };
    let alg = inst.algebra(1, 2).unwrap();
    let header = CdgaHeader {
        instance: inst.hash.clone(),
        window: (1, 2),
        field: dgquot_cli::config::FieldSpec::Prime(5),
    };
    let text = format_cdga(&header, &emit_cdga(&alg));
    let pres = parse_cdga_body(PrimeField::new(5), &text).unwrap();
    assert_eq!(format_cdga(&header, &pres), text);
}

#[test]
fn cdga_check_requires_the_matching_instance() {
    let inst = rational_instance(I1);
    let other = rational_instance(&I1.replace("seed = 42", "seed = 43"));
    let cfg = InstanceConfig::parse("t.cfg", I1).unwrap();
    let path = scratch("check.cdga");
    commands::cdga_emit(&cfg, &inst, Some((1, 2)), &path).unwrap();
    let report = commands::cdga_check(&cfg, &inst, &path).unwrap();
    assert!(report.contains("round_trip = identical"));
    assert!(report.contains("matches_instance = true"));
    let e = format!("{:#}", commands::cdga_check(&cfg, &other, &path).unwrap_err());
    assert!(e.contains("file was emitted from instance"), "got: {e}");
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn zero_hilbert_profiles_stabilize_at_the_floor() {
    let inst = rational_instance(&I1
        .replace("ceiling = 4", "ceiling = 2")
        .replace("hilbert = 1 2 3 4", "hilbert = 0 0"));
    let sub = scratch("zero.sub");
    std::fs::write(&sub, "submodule v1\nfloor = 1\nbasis 1 = (2, 0, [])\n").unwrap();
    let report = commands::tangent_sweep(&inst, 1, 2, 1, true, &sub).unwrap();
    for line in ["h[1,0] = 0", "h[2,1] = 0", "oracle[2] = 0", "n[0] = 1", "n[1] = 1"] {
        assert!(report.contains(line), "missing `{line}` in:\n{report}");
    }
    std::fs::remove_file(&sub).unwrap();
}

#[test]
fn single_point_sweeps_claim_no_stabilization() {
    let inst = rational_instance(I1);
    let sub = scratch("one.sub");
    std::fs::write(&sub, "submodule v1\nfloor = 1\nbasis 1 = (2, 1, [(0, 0, 1)])\n").unwrap();
    let report = commands::tangent_sweep(&inst, 3, 3, 0, true, &sub).unwrap();
    assert!(report.contains("n[0] = not stabilized in range"), "{report}");
    std::fs::remove_file(&sub).unwrap();
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dgquot"))
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

#[test]
fn the_binary_cites_the_offending_config_line() {
    let path = scratch("bad.cfg");
    std::fs::write(&path, I1.replace("floor = 1", "flor = 1")).unwrap();
    let out = bin().arg("--config").arg(&path).args(["instance", "validate"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains(":4: unknown key `flor`"), "got: {err}");
    std::fs::remove_file(&path).unwrap();
}

#[test]
fn the_binary_names_violated_invariants() {
    let path = scratch("fat.cfg");
    std::fs::write(&path, I1.replace("hilbert = 1 2 3 4", "hilbert = 3 2 3 4")).unwrap();
    let out = bin().arg("--config").arg(&path).args(["instance", "validate"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("hilbert exceeds module dimension at degree 1"), "got: {err}");
    std::fs::remove_file(&path).unwrap();

    // A full-profile submodule that multiplication does not preserve.
    let sub = scratch("open.sub");
    std::fs::write(
        &sub,
        "submodule v1\nfloor = 1\nbasis 1 = (2, 1, [(0, 0, 1)])\nbasis 2 = (3, 2, [(0, 0, 1), (2, 1, 1)])\n",
    )
    .unwrap();
    let out = bin()
        .arg("--config")
        .arg(fixture("i1.cfg"))
        .args(["mc", "certify", "--window", "1", "2", "--submodule"])
        .arg(&sub)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("submodule not closed under the action at degree 2"), "got: {err}");
    std::fs::remove_file(&sub).unwrap();
}

#[test]
fn windows_outside_the_configured_range_are_rejected() {
    let out = bin()
        .arg("--config")
        .arg(fixture("i1.cfg"))
        .args(["dgla", "build", "--window", "1", "9"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(
        err.contains("window [1, 9] must lie inside the configured window [1, 4]"),
        "got: {err}"
    );
}

#[test]
fn commands_do_not_mutate_the_instance_file() {
    let before = std::fs::read(fixture("i1.cfg")).unwrap();
    for args in [
        vec!["instance", "validate"],
        vec!["dgla", "build", "--window", "1", "2"],
        vec!["tangent", "cohomology", "--window", "1", "2", "--augmented", "--submodule"],
    ] {
        let mut cmd = bin();
        cmd.arg("--config").arg(fixture("i1.cfg")).args(&args);
        if args.last() == Some(&"--submodule") {
            cmd.arg(fixture("i1.sub"));
        }
        let out = cmd.output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(before, std::fs::read(fixture("i1.cfg")).unwrap());
}

#[test]
fn validate_reports_the_instance_shape() {
    let out = bin()
        .arg("--config")
        .arg(fixture("i1.cfg"))
        .args(["instance", "validate"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let report = String::from_utf8(out.stdout).unwrap();
    for line in [
        "command = instance validate",
        "field = rational",
        "window = 1 4",
        "ring.dims = 1 2 3 4 5",
        "module.dims = 2 3 4 5",
        "hilbert = 1 2 3 4",
        "checks.ring_associative = pass",
        "checks.module_action_associative = pass",
        "checks.hilbert_within_module = pass",
        "ring.generated_in_degree_one = true",
        "valid = true",
    ] {
        assert!(report.contains(line), "missing `{line}` in:\n{report}");
    }
}
