use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use dgquot_cli::commands;
use dgquot_cli::config::{AnyInstance, Instance, InstanceConfig};
use dgquot_core::scalar::Field;

/// Exact deformation computations for graded module quotients on a finite
/// degree window: the window complex, its Maurer-Cartan locus, tangent
/// cohomology, the dual CDGA presentation, and the gauge-quotient
/// experiments.
#[derive(Parser)]
#[command(name = "dgquot", version)]
struct Cli {
    /// Instance description file.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct WindowArg {
    /// Sub-window [A, T] of the configured window; defaults to all of it.
    #[arg(long, num_args = 2, value_names = ["A", "T"], allow_negative_numbers = true)]
    window: Option<Vec<i64>>,
}

impl WindowArg {
    fn get(&self) -> Option<(i64, i64)> {
        self.window.as_ref().map(|w| (w[0], w[1]))
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Instance description checks.
    Instance {
        #[command(subcommand)]
        cmd: InstanceCmd,
    },
    /// The window complex and its axioms.
    Dgla {
        #[command(subcommand)]
        cmd: DglaCmd,
    },
    /// Maurer-Cartan residuals of submodule points.
    Mc {
        #[command(subcommand)]
        cmd: McCmd,
    },
    /// Tangent cohomology at a point, single window or ceiling sweep.
    Tangent {
        #[command(subcommand)]
        cmd: TangentCmd,
    },
    /// The dual commutative dg algebra presentation.
    Cdga {
        #[command(subcommand)]
        cmd: CdgaCmd,
    },
    /// Gauge action, invariant coordinates, and locus experiments.
    Quot {
        #[command(subcommand)]
        cmd: QuotCmd,
    },
}

#[derive(Subcommand)]
enum InstanceCmd {
    /// Parse the config, build the graded data, and check every invariant.
    Validate,
}

#[derive(Subcommand)]
enum DglaCmd {
    /// Build the complex and report its dimensions.
    Build {
        #[command(flatten)]
        window: WindowArg,
    },
    /// Exhaustive axiom suite: antisymmetry, Jacobi, d squared, Leibniz.
    Verify {
        #[command(flatten)]
        window: WindowArg,
    },
}

#[derive(Subcommand)]
enum McCmd {
    /// Report the Maurer-Cartan residual of a submodule point.
    Residual {
        /// Submodule basis file.
        #[arg(long, value_name = "FILE")]
        submodule: PathBuf,
        #[command(flatten)]
        window: WindowArg,
    },
    /// Require the residual to vanish exactly; nonzero exit otherwise.
    Certify {
        /// Submodule basis file.
        #[arg(long, value_name = "FILE")]
        submodule: PathBuf,
        #[command(flatten)]
        window: WindowArg,
    },
}

#[derive(Subcommand)]
enum TangentCmd {
    /// Cohomology of the twisted complex at a submodule point.
    Cohomology {
        #[command(flatten)]
        window: WindowArg,
        /// Adjoin the gauge algebra in degree -1.
        #[arg(long)]
        augmented: bool,
        /// Submodule basis file.
        #[arg(long, value_name = "FILE")]
        submodule: PathBuf,
    },
    /// Stabilization sweep across window ceilings.
    Sweep {
        #[arg(long, value_name = "T")]
        t_from: i64,
        #[arg(long, value_name = "T")]
        t_to: i64,
        /// Track H^{-j} for j up to this depth.
        #[arg(long, default_value_t = 0)]
        depth: usize,
        /// Adjoin the gauge algebra in degree -1.
        #[arg(long)]
        augmented: bool,
        /// Floor-degree seed file, extended by generation at each ceiling.
        #[arg(long, value_name = "FILE")]
        submodule: PathBuf,
    },
}

#[derive(Subcommand)]
enum CdgaCmd {
    /// Emit the dual presentation to a file.
    Emit {
        #[command(flatten)]
        window: WindowArg,
        /// Output path for the CDGA file.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
    },
    /// Check an emitted file: d squared, round trip, instance match.
    Check {
        /// CDGA file to check.
        file: PathBuf,
    },
}

#[derive(Subcommand)]
enum QuotCmd {
    /// Verify the right-action law and the invariance properties.
    ActionCheck {
        /// Submodule basis file.
        #[arg(long, value_name = "FILE")]
        submodule: PathBuf,
        /// Partial-quotient cut degree.
        #[arg(long)]
        b: i64,
        /// Random pairs for the action law.
        #[arg(long, default_value_t = 20)]
        pairs: usize,
        /// Random elements for the invariance checks.
        #[arg(long, default_value_t = 100)]
        elements: usize,
        #[command(flatten)]
        window: WindowArg,
    },
    /// Invariant coordinate matrices of a point.
    Invariants {
        /// Submodule basis file.
        #[arg(long, value_name = "FILE")]
        submodule: PathBuf,
        /// Partial-quotient cut degree.
        #[arg(long)]
        b: i64,
        #[command(flatten)]
        window: WindowArg,
    },
    /// Least cut degree whose chains all generate the full profile.
    FindB {
        /// Largest cut degree to try; defaults to the ceiling.
        #[arg(long)]
        cap: Option<i64>,
    },
    /// Search for points violating injectivity propagation.
    Propagation {
        /// Cut degree: injectivity is imposed on [floor, b] only.
        #[arg(long)]
        b: i64,
        /// Gauge twists across the enumerated points.
        #[arg(long, default_value_t = 500)]
        twists: usize,
        /// Rejection samples of raw component data.
        #[arg(long, default_value_t = 10000)]
        samples: usize,
        #[command(flatten)]
        window: WindowArg,
    },
    /// Cardinalities and implications across the three loci.
    Compare {
        /// Partial-quotient cut degree.
        #[arg(long)]
        b: i64,
        #[command(flatten)]
        window: WindowArg,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(report) => print!("{report}"),
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> Result<String> {
    let cfg = InstanceConfig::parse_file(&cli.config)?;
    match cfg.instantiate()? {
        AnyInstance::Rational(inst) => dispatch(&cfg, &inst, &cli.command),
        AnyInstance::Prime(inst) => dispatch(&cfg, &inst, &cli.command),
    }
}

fn dispatch<F: Field>(cfg: &InstanceConfig, inst: &Instance<F>, cmd: &Cmd) -> Result<String> {
    match cmd {
        Cmd::Instance {
            cmd: InstanceCmd::Validate,
        } => commands::instance_validate(cfg, inst),
        Cmd::Dgla {
            cmd: DglaCmd::Build { window },
        } => commands::dgla_build(inst, window.get()),
        Cmd::Dgla {
            cmd: DglaCmd::Verify { window },
        } => commands::dgla_verify(inst, window.get()),
        Cmd::Mc {
            cmd: McCmd::Residual { submodule, window },
        } => commands::mc_residual(inst, window.get(), submodule),
        Cmd::Mc {
            cmd: McCmd::Certify { submodule, window },
        } => commands::mc_certify(inst, window.get(), submodule),
        Cmd::Tangent {
            cmd:
                TangentCmd::Cohomology {
                    window,
                    augmented,
                    submodule,
                },
        } => commands::tangent_cohomology(inst, window.get(), *augmented, submodule),
        Cmd::Tangent {
            cmd:
                TangentCmd::Sweep {
                    t_from,
                    t_to,
                    depth,
                    augmented,
                    submodule,
                },
        } => commands::tangent_sweep(inst, *t_from, *t_to, *depth, *augmented, submodule),
        Cmd::Cdga {
            cmd: CdgaCmd::Emit { window, out },
        } => commands::cdga_emit(cfg, inst, window.get(), out),
        Cmd::Cdga {
            cmd: CdgaCmd::Check { file },
        } => commands::cdga_check(cfg, inst, file),
        Cmd::Quot {
            cmd:
                QuotCmd::ActionCheck {
                    submodule,
                    b,
                    pairs,
                    elements,
                    window,
                },
        } => commands::quot_action_check(inst, window.get(), *b, *pairs, *elements, submodule),
        Cmd::Quot {
            cmd:
                QuotCmd::Invariants {
                    submodule,
                    b,
                    window,
                },
        } => commands::quot_invariants(inst, window.get(), *b, submodule),
        Cmd::Quot {
            cmd: QuotCmd::FindB { cap },
        } => commands::quot_find_b(inst, *cap),
        Cmd::Quot {
            cmd:
                QuotCmd::Propagation {
                    b,
                    twists,
                    samples,
                    window,
                },
        } => commands::quot_propagation(inst, window.get(), *b, *twists, *samples),
        Cmd::Quot {
            cmd: QuotCmd::Compare { b, window },
        } => commands::quot_compare(inst, window.get(), *b),
    }
}
