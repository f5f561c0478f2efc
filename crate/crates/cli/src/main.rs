use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gv_cli::{run, RunConfig};

const OUTPUT_HELP: &str = "\
CSV goes to --out (or stdout). A JSON summary with sorted keys and
\"schemaVersion\": 1 goes next to it with a .json extension (or to stderr).

CSV columns:
  tau                 n,tau
  second-moment       X,moment,ratio
  sign-scan           X,windowEnd,changes,firstChange
  short-interval      X,halfWidth,average,normalized
  count-circle        R,count,discrepancy
  mean-square-p2      X,meanSquare
  hardy               R,series,discrepancy,error
  count-hyperboloid   R,count
  smooth-hyperboloid  X,value
  short-hyperboloid   X,width,sum,normalized,concentratedLowerBound,dominates
  divisor-identity    R,lhs,rhs,lhsAllZ,identityEqual,direct,combined,combinationEqual
  gauss-sums          check,cases,maxResidual,tolerance,pass
  eisenstein-check    identity,h,k,w,residual,bound,pass
  kernels-verify      identity,a,b,contour,closed,residual,tolerance,pass
  fit                 term,exponent,logPower,coefficient

Exit codes: 0 ok, 1 runtime error, 2 bad configuration, 3 table too short,
4 a built-in check failed (only with --check).

Grids: 2^a..2^b, a:b:step, or a comma list. GV_CACHE overrides --cache.";

#[derive(Parser)]
#[command(name = "gv", version, about = "Lattice counts, cusp-form moments and smoothing kernels", after_help = OUTPUT_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Ramanujan tau table with multiplicativity checks
    Tau(Flags),
    /// Exponentially smoothed second moment of Delta against the Rankin constant
    SecondMoment(Flags),
    /// Sign changes of normalized partial sums of Delta
    SignScan(Flags),
    /// Short-interval averages of Delta partial sums
    ShortInterval(Flags),
    /// Lattice points in d-dimensional balls
    CountCircle(Flags),
    /// Mean square of the circle-problem error
    MeanSquareP2(Flags),
    /// Truncated Hardy series against the circle discrepancy
    Hardy(Flags),
    /// Sharp hyperboloid counts and the log-term verdict
    CountHyperboloid(Flags),
    /// Kernel-smoothed hyperboloid counts
    SmoothHyperboloid(Flags),
    /// Hyperboloid counts in short shells
    ShortHyperboloid(Flags),
    /// Divisor-sum identities for the three-variable hyperboloid
    DivisorIdentity(Flags),
    /// Gauss-sum identity suite
    GaussSums(Flags),
    /// Eisenstein coefficient reduction and factorisation checks
    EisensteinCheck(Flags),
    /// Contour integrals of the kernels against closed forms
    KernelsVerify(Flags),
    /// Least-squares fit of an imported (x, value) CSV
    Fit(Flags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    nu: Option<String>,
    /// exp, cesaro:k, conc:Y or compact:Y
    #[arg(long)]
    kernel: Option<String>,
    #[arg(long = "table-size")]
    table_size: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    #[arg(long = "R")]
    big_r: Option<String>,
    #[arg(long)]
    terms: Option<String>,
    /// Window exponent for sign-scan
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    input: Option<String>,
    /// Comma list of exponent:logPower terms
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    without: Option<String>,
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 4 if a built-in check fails
    #[arg(long)]
    check: bool,
}

fn main() {
    let cli = Cli::parse();
    let (name, flags) = match cli.command {
        Command::Tau(f) => ("tau", f),
        Command::SecondMoment(f) => ("second-moment", f),
        Command::SignScan(f) => ("sign-scan", f),
        Command::ShortInterval(f) => ("short-interval", f),
        Command::CountCircle(f) => ("count-circle", f),
        Command::MeanSquareP2(f) => ("mean-square-p2", f),
        Command::Hardy(f) => ("hardy", f),
        Command::CountHyperboloid(f) => ("count-hyperboloid", f),
        Command::SmoothHyperboloid(f) => ("smooth-hyperboloid", f),
        Command::ShortHyperboloid(f) => ("short-hyperboloid", f),
        Command::DivisorIdentity(f) => ("divisor-identity", f),
        Command::GaussSums(f) => ("gauss-sums", f),
        Command::EisensteinCheck(f) => ("eisenstein-check", f),
        Command::KernelsVerify(f) => ("kernels-verify", f),
        Command::Fit(f) => ("fit", f),
    };
    let mut cfg = RunConfig::new(name);
    let pairs = [
        ("d", flags.d),
        ("h", flags.h),
        ("grid", flags.grid),
        ("nu", flags.nu),
        ("kernel", flags.kernel),
        ("table-size", flags.table_size),
        ("seed", flags.seed),
        ("R", flags.big_r),
        ("terms", flags.terms),
        ("r", flags.r),
        ("input", flags.input),
        ("model", flags.model),
        ("without", flags.without),
    ];
    for (k, v) in pairs {
        if let Some(v) = v {
            cfg.params.insert(k.to_string(), v);
        }
    }
    cfg.output = flags.out;
    cfg.cache_dir = flags.cache;
    cfg.check = flags.check;
    std::process::exit(run(&cfg));
}
