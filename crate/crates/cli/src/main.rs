mod commands;
mod report;

use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use emeasure::Error;

use report::Format;

#[derive(Parser, Debug)]
#[command(name = "emeasure", version, about = "Hermite-Pade systems and explicit transcendence measures for e")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Working precision for parsed inputs and ball arithmetic.
    #[arg(long, global = true, default_value_t = 128, value_parser = clap::value_parser!(u32).range(32..=16384))]
    precision_bits: u32,

    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct ML {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub l: u32,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Normalized approximants B*_{k,j} of the system for (m, l).
    Approx(ML),
    /// Determinant of the approximant matrix.
    Det(ML),
    /// Guaranteed and exact common factor of the system.
    Factor(ML),
    /// κ_m, or the limit constant with --limit.
    Kappa {
        #[arg(long, required_unless_present = "limit")]
        m: Option<u32>,
        #[arg(long)]
        limit: bool,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// κ_m for m = 2..=m-max next to the published values.
    KappaTable {
        #[arg(long, default_value_t = 14)]
        m_max: u32,
    },
    /// f(m) and its comparison product for m = 5..=14.
    FmTable,
    /// Generic and closed-form lower bounds for |Λ| at a given log H.
    Bound {
        #[arg(long)]
        m: u32,
        #[arg(long = "logH")]
        log_h: String,
    },
    /// Upper bound for the measure exponent ω(m, H).
    Omega {
        #[arg(long)]
        m: u32,
        #[arg(long = "loglogH")]
        loglog_h: String,
    },
    /// Exponent bound for sparse polynomials in e.
    Sparse {
        #[arg(long)]
        m1: u32,
        #[arg(long)]
        m2: u32,
        #[arg(long = "loglogH")]
        loglog_h: String,
    },
    /// Exponent bound for linear forms in 1, e^d, …, e^{md}.
    Power {
        #[arg(long)]
        dexp: u32,
        #[arg(long)]
        m: u32,
        #[arg(long = "loglogH")]
        loglog_h: String,
    },
    /// Certify |λ_0 + λ_1 e + … + λ_m e^m| against the measure bound.
    Verify {
        /// Comma-separated integers λ_0,…,λ_m.
        #[arg(long, allow_hyphen_values = true)]
        lambda: String,
        #[arg(long = "logH")]
        log_h: String,
    },
    /// Growth bounds |B_{k,0}(1)| ≤ Q(l) and Σ_j |L_{k,j}| ≤ R(l).
    QrCheck {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        l: u32,
        /// Allow the m = 4 check (about 1.5 minutes in a release build).
        #[arg(long)]
        opt_in_heavy: bool,
    },
    /// Exhaustive minimum of |Λ| with |λ_j| ≤ box for j ≥ 1.
    Search {
        #[arg(long)]
        m: usize,
        #[arg(long = "box")]
        bx: u32,
    },
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Precondition(_) | Error::ResourceLimit(_) => 2,
        Error::Falsified(_) | Error::Consistency(_) => 3,
        Error::PrecisionCap { .. } | Error::NonConvergence(_) => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let prec = cli.precision_bits;
    let result = match cli.command {
        Command::Approx(a) => commands::approx(&a),
        Command::Det(a) => commands::det(&a),
        Command::Factor(a) => commands::factor(&a),
        Command::Kappa { m, limit, tol } => commands::kappa(m, limit, tol, prec),
        Command::KappaTable { m_max } => commands::kappa_table(m_max),
        Command::FmTable => commands::fm_table(),
        Command::Bound { m, log_h } => commands::bound(m, &log_h, prec),
        Command::Omega { m, loglog_h } => commands::omega(m, &loglog_h, prec),
        Command::Sparse { m1, m2, loglog_h } => commands::sparse(m1, m2, &loglog_h, prec),
        Command::Power { dexp, m, loglog_h } => commands::power(dexp, m, &loglog_h, prec),
        Command::Verify { lambda, log_h } => commands::verify(&lambda, &log_h, prec),
        Command::QrCheck { m, l, opt_in_heavy } => commands::qr_check(m, l, opt_in_heavy),
        Command::Search { m, bx } => commands::search(m, bx),
    };
    match result {
        Ok((report, status)) => {
            let stdout = std::io::stdout();
            let mut out = stdout.lock();
            if let Err(e) = report.write(cli.format, &mut out).and_then(|_| out.flush()) {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::from(status)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
