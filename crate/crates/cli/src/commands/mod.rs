//! One module per experiment family. Every subcommand is a pure function of
//! its [`RunConfig`] returning tables, JSON documents and checks.

pub mod psl2;
pub mod qm;
pub mod top;
pub mod torus;

use crate::config::RunConfig;
use crate::error::CliResult;
use crate::output::Output;

pub struct CommandSpec {
    pub name: &'static str,
    pub about: &'static str,
    /// Subcommand-specific keys accepted as `--key value` or in a config file.
    pub keys: &'static [&'static str],
    pub run: fn(&RunConfig) -> CliResult<Output>,
}

pub const COMMANDS: &[CommandSpec] = &[
    CommandSpec {
        name: "torus-weyl",
        about: "Weyl sums and 1-d star discrepancy of kicked Kronecker orbits",
        keys: torus::WEYL_KEYS,
        run: torus::weyl,
    },
    CommandSpec {
        name: "torus-meansquare",
        about: "Mean square of Weyl sums over a tau interval",
        keys: torus::MEANSQUARE_KEYS,
        run: torus::meansquare,
    },
    CommandSpec {
        name: "torus-burago",
        about: "Valuation kicks: exact hits at 0 and the equidistribution verdict",
        keys: torus::BURAGO_KEYS,
        run: torus::burago,
    },
    CommandSpec {
        name: "psl2-evolve",
        about: "Norms and traces of f^(k)(tau) in PSL(2,R)",
        keys: psl2::EVOLVE_KEYS,
        run: psl2::evolve,
    },
    CommandSpec {
        name: "psl2-schrodinger",
        about: "Entry recursion, Schrodinger solutions and monotonicity for unipotent kicks",
        keys: psl2::SCHRODINGER_KEYS,
        run: psl2::schrodinger,
    },
    CommandSpec {
        name: "psl2-trace",
        about: "Exact trace polynomial of random rational kicks",
        keys: psl2::TRACE_KEYS,
        run: psl2::trace,
    },
    CommandSpec {
        name: "psl2-escape-scan",
        about: "Escape to infinity and gauge growth over seeds and tau values",
        keys: psl2::ESCAPE_KEYS,
        run: psl2::escape_scan,
    },
    CommandSpec {
        name: "psl2-intervals",
        about: "Interval-cover kicks and their covering multiplicities",
        keys: psl2::INTERVALS_KEYS,
        run: psl2::intervals,
    },
    CommandSpec {
        name: "qm-parabolic",
        about: "Quasi-morphism from a cusp form on PSL(2,Z)",
        keys: qm::PARABOLIC_KEYS,
        run: qm::parabolic,
    },
    CommandSpec {
        name: "qm-hyperbolic",
        about: "Quasi-morphism from a tube form around a hyperbolic axis",
        keys: qm::HYPERBOLIC_KEYS,
        run: qm::hyperbolic,
    },
    CommandSpec {
        name: "top-scan",
        about: "Recurrence ratios of the kicked top over a tau grid",
        keys: top::SCAN_KEYS,
        run: top::scan,
    },
    CommandSpec {
        name: "top-timereversal",
        about: "Time-reversal check and 2-periodic return on the sphere or flat torus",
        keys: top::TIMEREVERSAL_KEYS,
        run: top::timereversal,
    },
    CommandSpec {
        name: "torus-hamiltonian",
        about: "Randomizing schedule and non-mixing witness on the flat torus",
        keys: top::HAMILTONIAN_KEYS,
        run: top::flat_hamiltonian,
    },
];

pub fn find(name: &str) -> Option<&'static CommandSpec> {
    COMMANDS.iter().find(|c| c.name == name)
}
