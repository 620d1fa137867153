use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Integer flag values; scientific notation such as `1e7` is accepted when
/// it denotes an exact non-negative integer.
pub fn parse_int(s: &str) -> Result<u64, String> {
    let s = s.trim().replace('_', "");
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !f.is_finite() || f < 0.0 || f.fract() != 0.0 || f > u64::MAX as f64 {
        return Err(format!("not a non-negative integer: {s:?}"));
    }
    Ok(f as u64)
}

pub fn parse_usize(s: &str) -> Result<usize, String> {
    parse_int(s).and_then(|v| usize::try_from(v).map_err(|e| e.to_string()))
}

pub fn parse_real(s: &str) -> Result<f64, String> {
    let f: f64 = s.trim().parse().map_err(|_| format!("not a number: {s:?}"))?;
    if !f.is_finite() {
        return Err(format!("not a finite number: {s:?}"));
    }
    Ok(f)
}

#[derive(Debug, Parser)]
#[command(name = "gpylab", version, about = "Numerical laboratory for the GPY prime-tuples sieve")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads; the GPY_JOBS environment variable takes precedence.
    #[arg(long, global = true, value_parser = parse_usize)]
    pub jobs: Option<usize>,
    /// Omit the runtime so identical runs produce identical bytes.
    #[arg(long, global = true)]
    pub stable: bool,
    #[arg(long, global = true, value_parser = parse_int, default_value = "0")]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Primes in a range, θ sums and progression errors.
    Primes(PrimesArgs),
    #[command(subcommand)]
    Tuple(TupleCmd),
    #[command(subcommand)]
    Singular(SingularCmd),
    #[command(subcommand)]
    Gpy(GpyCmd),
    #[command(subcommand)]
    Combi(CombiCmd),
    #[command(subcommand)]
    Oracle(OracleCmd),
    #[command(subcommand)]
    Bv(BvCmd),
    #[command(subcommand)]
    Seq(SeqCmd),
    #[command(subcommand)]
    Verify(VerifyCmd),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PrimesArgs {
    #[arg(long, value_parser = parse_int, default_value = "0")]
    pub lo: u64,
    #[arg(long, value_parser = parse_int)]
    pub hi: u64,
    /// Modulus for θ(x; q, a) and E(x; q, a), with x = hi.
    #[arg(long, value_parser = parse_int)]
    pub q: Option<u64>,
    #[arg(long, value_parser = parse_int)]
    pub a: Option<u64>,
    /// Report E*(hi, q) instead of a single class.
    #[arg(long)]
    pub star: bool,
    /// Include the list of primes in the report.
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ShiftsArg {
    /// Comma-separated shifts, or @FILE for the first tuple of a tuple file.
    #[arg(long)]
    pub shifts: String,
}

#[derive(Debug, Subcommand)]
pub enum TupleCmd {
    /// Admissibility and ν_p, optionally ν̄_p against a second tuple and ν*_p.
    Check(TupleCheckArgs),
    /// The discriminant Π_{i<j} |h_i − h_j|.
    Discriminant(ShiftsArg),
    /// Regular classes modulo P = Π_{p ≤ V} p.
    Regular(TupleRegularArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TupleCheckArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: ShiftsArg,
    /// Prime for the ν values; defaults to every prime ≤ |H|.
    #[arg(long, value_parser = parse_int)]
    pub p: Option<u64>,
    #[arg(long)]
    pub h2: Option<String>,
    #[arg(long, value_parser = parse_int)]
    pub h0: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TupleRegularArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: ShiftsArg,
    #[arg(long, value_parser = parse_int)]
    pub v: u64,
    /// Include the class list (otherwise only the count).
    #[arg(long)]
    pub list: bool,
}

#[derive(Debug, Subcommand)]
pub enum SingularCmd {
    /// 𝔖(H), or 𝔖(H ∪ {h0}) with --h0.
    Value(SingularValueArgs),
    /// B_𝒜(k) and S*(k).
    Average(AverageArgs),
    /// S*(k+1)/S*(k) for k < k_max.
    Monotone(MonotoneArgs),
    /// Exact density of n with P_H(n) free of primes ≤ z.
    Quasidensity(QuasidensityArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SingularValueArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: ShiftsArg,
    #[arg(long, value_parser = parse_int)]
    pub h0: Option<u64>,
    #[arg(long, value_parser = parse_int)]
    pub cutoff: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct AverageArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: ShiftsArg,
    #[arg(long, value_parser = parse_usize)]
    pub k: usize,
    #[arg(long, value_parser = parse_int, default_value = "100000")]
    pub cutoff: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MonotoneArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: ShiftsArg,
    #[arg(long, value_parser = parse_usize)]
    pub k_max: usize,
    #[arg(long, value_parser = parse_int, default_value = "100000")]
    pub cutoff: u64,
    #[arg(long, value_parser = parse_real, default_value = "0.95")]
    pub floor: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct QuasidensityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: ShiftsArg,
    #[arg(long, value_parser = parse_int)]
    pub z: u64,
}

#[derive(Debug, Subcommand)]
pub enum GpyCmd {
    /// Λ_R(n; H, ℓ) and P_H(n).
    Lambda(LambdaArgs),
    /// Σ Λ_R(n;H1,ℓ1)Λ_R(n;H2,ℓ2) against its predicted main term.
    Moment1(MomentArgs),
    /// The same sum weighted by θ(n + h0), against its predicted main term.
    Moment2(MomentArgs),
    /// The detector sum S'_R(N, K, ℓ, P).
    Detector(DetectorArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct LambdaArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: ShiftsArg,
    #[arg(long, value_parser = parse_int)]
    pub n: u64,
    #[arg(long, value_parser = parse_usize, default_value = "0")]
    pub ell: usize,
    #[arg(long, value_parser = parse_real)]
    pub r: f64,
}

/// R is given directly (--r) or as R = (3N)^θ (--theta).
#[derive(Debug, Clone, Args, Serialize)]
pub struct LevelArgs {
    #[arg(long, value_parser = parse_real, conflicts_with = "theta")]
    pub r: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub theta: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Direct,
    Divisor,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MomentArgs {
    #[arg(long)]
    pub h1: String,
    #[arg(long)]
    pub h2: String,
    /// ℓ for both tuples unless --ell1/--ell2 are given.
    #[arg(long, value_parser = parse_usize, default_value = "0")]
    pub ell: usize,
    #[arg(long, value_parser = parse_usize)]
    pub ell1: Option<usize>,
    #[arg(long, value_parser = parse_usize)]
    pub ell2: Option<usize>,
    #[arg(long, value_parser = parse_int)]
    pub n: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub level: LevelArgs,
    #[arg(long, value_parser = parse_int, default_value = "5")]
    pub v: u64,
    /// Extra shift (moment2 only).
    #[arg(long, value_parser = parse_int)]
    pub h0: Option<u64>,
    /// Restrict to one regular class a mod P and compare per class.
    #[arg(long, value_parser = parse_int)]
    pub class: Option<u64>,
    /// Summation route for moment1.
    #[arg(long, value_enum, default_value_t = Strategy::Direct)]
    pub strategy: Strategy,
    #[arg(long, value_parser = parse_int)]
    pub cutoff: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DetectorArgs {
    /// The set 𝒜.
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: ShiftsArg,
    #[arg(long, value_parser = parse_usize)]
    pub k: usize,
    #[arg(long, value_parser = parse_usize, default_value = "0")]
    pub ell: usize,
    #[arg(long, value_parser = parse_int)]
    pub n: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub level: LevelArgs,
    #[arg(long, value_parser = parse_int, default_value = "2")]
    pub v: u64,
}

#[derive(Debug, Subcommand)]
pub enum CombiCmd {
    /// Z_sum = Z_closed over a grid, or at one triplet with --d --u --y.
    Lemma2(Lemma2Args),
    /// Coefficient identities over a grid, or the ratio check at --d --u --v.
    Coeffs(CoeffsArgs),
    /// Σ_{q ≤ x} μ²(q) d_m(q) against x(1 + log x)^m, or d_m(q) with --q.
    DivisorMean(DivisorMeanArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Lemma2Args {
    #[arg(long, value_parser = parse_int, default_value = "25")]
    pub max: u64,
    #[arg(long, value_parser = parse_int, requires_all = ["u", "y"])]
    pub d: Option<u64>,
    #[arg(long, value_parser = parse_int)]
    pub u: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub y: Option<i64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CoeffsArgs {
    #[arg(long, value_parser = parse_int, default_value = "12")]
    pub max: u64,
    #[arg(long, value_parser = parse_int, requires_all = ["u", "v"])]
    pub d: Option<u64>,
    #[arg(long, value_parser = parse_int)]
    pub u: Option<u64>,
    #[arg(long, value_parser = parse_int)]
    pub v: Option<u64>,
    /// With --d --u --v: also print A_{j,ν} at this j and ν.
    #[arg(long, value_parser = parse_int, requires = "nu")]
    pub j: Option<u64>,
    #[arg(long, value_parser = parse_int)]
    pub nu: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DivisorMeanArgs {
    #[arg(long, value_parser = parse_int)]
    pub x: Option<u64>,
    #[arg(long, value_parser = parse_int)]
    pub m: u64,
    #[arg(long, value_parser = parse_int, conflicts_with = "x")]
    pub q: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Aggregate and per-class main terms of the pair sum.
    T4(OracleArgs),
    /// Main term of the θ-weighted pair sum.
    T5(OracleArgs),
    /// G(0,0) = 𝔖(H)·P/|A(H)|.
    G00(G00Args),
    /// Scan of |W(it)| against e^{t²/6} and t^{2/3}, or W at one --t.
    Wscan(WscanArgs),
    /// J(t, X) = Π_{p ≤ X} |1 − p^{−1−it}|/(1 − 1/p).
    Jprod(JprodArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OracleArgs {
    #[arg(long)]
    pub h1: String,
    #[arg(long)]
    pub h2: String,
    #[arg(long, value_parser = parse_usize, default_value = "0")]
    pub ell1: usize,
    #[arg(long, value_parser = parse_usize, default_value = "0")]
    pub ell2: usize,
    #[arg(long, value_parser = parse_int)]
    pub n: u64,
    #[command(flatten)]
    #[serde(flatten)]
    pub level: LevelArgs,
    #[arg(long, value_parser = parse_int, default_value = "5")]
    pub v: u64,
    #[arg(long, value_parser = parse_int)]
    pub h0: Option<u64>,
    #[arg(long, value_parser = parse_int)]
    pub cutoff: Option<u64>,
    /// Compare this empirical value against the prediction.
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    pub empirical: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct G00Args {
    #[command(flatten)]
    #[serde(flatten)]
    pub tuple: ShiftsArg,
    #[arg(long, value_parser = parse_int)]
    pub v: u64,
    #[arg(long, value_parser = parse_int)]
    pub cutoff: Option<u64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct WscanArgs {
    #[arg(long, value_parser = parse_real, default_value = "100")]
    pub t_max: f64,
    #[arg(long, value_parser = parse_real, default_value = "0.01")]
    pub step: f64,
    /// Evaluate W(it) at a single t instead of scanning.
    #[arg(long, value_parser = parse_real, allow_hyphen_values = true)]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct JprodArgs {
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub t: f64,
    /// One or more X values, comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_int, required = true)]
    pub x: Vec<u64>,
}

#[derive(Debug, Subcommand)]
pub enum BvCmd {
    /// Σ_{q ≤ Q} max_a |θ(N; q, a) − N/φ(q)|.
    Classic(BvArgs),
    /// Moduli Pq over (N, 2N] with (q, P) = 1; --m gives P.
    Restricted(BvArgs),
    /// Σ_{q ≤ Q, (q,M)=1} E*(N, Mq).
    Estar(BvArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BvArgs {
    #[arg(long, value_parser = parse_int)]
    pub n: u64,
    /// Defaults to max(1, ⌊√N/(log N)^5⌋).
    #[arg(long, value_parser = parse_int)]
    pub q: Option<u64>,
    #[arg(long, value_parser = parse_int, default_value = "1")]
    pub m: u64,
    /// estar only: take x = N instead of the max over x ≤ N.
    #[arg(long)]
    pub endpoint: bool,
    #[arg(long)]
    pub squarefree: bool,
    /// With --y: also report sum / (X/M·(log X)^15·exp(−c log X/log Y)).
    #[arg(long, value_parser = parse_real, requires = "y")]
    pub c: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub y: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum SeqCmd {
    /// Write 𝒜 ∩ [1, N] for one of the standard families.
    Generate(SeqArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeqKind {
    Interval,
    PowersK,
    PowersKSumTwoSquares,
    CustomExponents,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SeqArgs {
    #[arg(long, value_enum)]
    pub kind: SeqKind,
    /// Length of the interval {1, …, h}.
    #[arg(long, value_parser = parse_int)]
    pub h: Option<u64>,
    #[arg(long, value_parser = parse_int)]
    pub k: Option<u64>,
    /// Upper bound N.
    #[arg(long, value_parser = parse_int)]
    pub n: Option<u64>,
    /// Exponents r_j for custom_exponents, comma-separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_int)]
    pub exponents: Vec<u64>,
    /// Constant C in the threshold C·√(log N)·(log log N)².
    #[arg(long, value_parser = parse_real, default_value = "1")]
    pub c: f64,
    /// Write the set as a tuple file.
    #[arg(long)]
    pub tuple_file: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCmd {
    /// Quick self-checks across all modules.
    All,
    /// Z_sum = Z_closed on the grid d, u ≤ max.
    Lemma2 {
        #[arg(long, value_parser = parse_int, default_value = "25")]
        max: u64,
    },
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scientific_integers() {
        assert_eq!(parse_int("1e7"), Ok(10_000_000));
        assert_eq!(parse_int("2.5e3"), Ok(2500));
        assert_eq!(parse_int("1_000"), Ok(1000));
        assert!(parse_int("1.5").is_err());
        assert!(parse_int("-3").is_err());
        assert!(parse_int("abc").is_err());
        assert_eq!(parse_real("2e-1"), Ok(0.2));
        assert!(parse_real("nan").is_err());
    }

    #[test]
    fn command_tree_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
