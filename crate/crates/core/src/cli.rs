//! `stackshift` command-line front end.
//!
//! Exit codes: 0 all pass, 1 any fail, 2 usage or budget error, 3 when the
//! only non-passing reports are inconclusive.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

use crate::indexcalc::{sequences, sequences_within, trajectory, IndexError, SequenceTable, StepBudget};
use crate::measures::MeasureSpec;
use crate::polyexact::{parse_rational, Rational};
use crate::verify::{
    overall, real_string, reports_to_json, reports_to_tsv, run_suite, CheckParams, Context,
    Eq21Side, Registry, Status, SuiteConfig, VerificationReport, VerifyError,
};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stackshift", version, about = "Stack-and-shift tables, sequences and inequality checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Progress and per-report lines on stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the configurations U_1..U_m.
    Table {
        #[arg(long, default_value_t = 6)]
        steps: u64,
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Block sequences r_k, R_k, zeta_k, gamma_k, d_k, e_{R_k}.
    Sequences {
        /// Number of blocks; all blocks within the step budget when omitted.
        #[arg(long)]
        kmax: Option<u64>,
        #[arg(long, value_enum, default_value_t = TableFormat::Text)]
        format: TableFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run checks and emit their reports.
    Verify {
        #[arg(long = "check", required_unless_present = "all", conflicts_with = "all")]
        checks: Vec<String>,
        #[arg(long)]
        all: bool,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep one parameter of a check and emit `param, lhs, rhs, margin`.
    Plotdata {
        #[arg(long)]
        check: String,
        /// Swept parameter: T, W, S or gamma.
        #[arg(long, default_value = "T")]
        param: String,
        #[arg(long, default_value_t = 0.1)]
        from: f64,
        #[arg(long, default_value_t = 10.0)]
        to: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        /// Logarithmic spacing.
        #[arg(long)]
        log: bool,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the registered check ids.
    Checks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TableFormat {
    Text,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Lower,
    Upper,
}

/// Check parameters. Anything left unset keeps the value of the check's
/// default grid.
#[derive(Debug, Clone, Default, Args)]
pub struct ParamArgs {
    /// e.g. "gaussian:sigma=1.0", "atoms:a=1.0", "triangle", "dirac", "bspline:J=3".
    #[arg(long)]
    pub measure: Option<String>,
    #[arg(long = "T")]
    pub t: Option<String>,
    #[arg(long = "W")]
    pub w: Option<f64>,
    #[arg(long = "S")]
    pub s: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long)]
    pub kappa: Option<u32>,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub m: Option<u64>,
    /// p5 mode: exact or sampled.
    #[arg(long)]
    pub mode: Option<String>,
    /// Grid points of the sampled p5 mode.
    #[arg(long)]
    pub grid_points: Option<usize>,
    #[arg(long = "H", allow_hyphen_values = true)]
    pub h: Option<String>,
    #[arg(long = "A")]
    pub a: Option<String>,
    #[arg(long = "B")]
    pub b: Option<String>,
    /// Comma-separated ascending rationals.
    #[arg(long)]
    pub a_list: Option<String>,
    #[arg(long = "J")]
    pub j: Option<u32>,
    #[arg(long, value_enum)]
    pub side: Option<SideArg>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Added to the dyadic exponent of the p6 and theorem constants.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub exponent_offset: i64,
}

/// Exact decimal or `p/q` rational.
pub fn parse_exact(s: &str) -> Result<Rational, VerifyError> {
    let s = s.trim();
    let bad = || VerifyError::Usage(format!("not a rational number: {s:?}"));
    if s.contains('/') {
        return parse_rational(s).map_err(|_| bad());
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() {
        return Err(bad());
    }
    if !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{int}{frac}").parse().map_err(|_| bad())?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    let r = Rational::new(digits, den);
    Ok(if neg { -r } else { r })
}

impl ParamArgs {
    pub fn to_params(&self) -> Result<CheckParams, VerifyError> {
        let measure = self
            .measure
            .as_deref()
            .map(|m| m.parse::<MeasureSpec>())
            .transpose()?;
        let t_rat = self.t.as_deref().map(parse_exact).transpose()?;
        let t = t_rat.as_ref().map(|r| r.to_f64().unwrap_or(f64::NAN));
        let a_list = self
            .a_list
            .as_deref()
            .map(|l| l.split(',').map(parse_exact).collect::<Result<Vec<_>, _>>())
            .transpose()?;
        Ok(CheckParams {
            measure,
            t,
            t_rat,
            w: self.w,
            s: self.s,
            gamma: self.gamma,
            k: self.k,
            kappa: self.kappa,
            epsilon: self.epsilon,
            m: self.m,
            mode: self.mode.clone(),
            points: self.grid_points,
            h: self.h.as_deref().map(parse_exact).transpose()?,
            a: self.a.as_deref().map(parse_exact).transpose()?,
            b: self.b.as_deref().map(parse_exact).transpose()?,
            a_list,
            j: self.j,
            side: self.side.map(|s| match s {
                SideArg::Lower => Eq21Side::Lower,
                SideArg::Upper => Eq21Side::Upper,
            }),
            seed: self.seed,
            pairs: self.pairs,
        })
    }
}

/// Text lines `U_1..U_m`, or TSV with block boundaries.
pub fn table_output(steps: u64, format: TableFormat, budget: StepBudget) -> Result<String, IndexError> {
    let states = trajectory(steps, budget)?;
    let mut out = String::new();
    match format {
        TableFormat::Text => out.push_str("m\tU_m\n"),
        TableFormat::Tsv => out.push_str("m\tk\tblock_end\tgamma\td\tU_m\n"),
    }
    for (m, st) in states.iter().enumerate().skip(1) {
        match format {
            TableFormat::Text => writeln!(out, "{m}\t{}", st.row()).unwrap(),
            TableFormat::Tsv => {
                let k = st.block();
                let end = st.min_index() != k;
                writeln!(
                    out,
                    "{m}\t{k}\t{}\t{}\t{}\t{}",
                    u8::from(end),
                    st.gamma(),
                    st.weighted_degree(),
                    st.row()
                )
                .unwrap()
            }
        }
    }
    Ok(out)
}

fn join<T: ToString>(xs: impl IntoIterator<Item = T>) -> String {
    xs.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// One labelled row per sequence.
pub fn sequences_text(table: &SequenceTable) -> String {
    let b = &table.blocks;
    let mut out = String::new();
    writeln!(out, "k\t{}", join(b.iter().map(|x| x.k))).unwrap();
    writeln!(out, "r\t{}", join(b.iter().map(|x| x.r))).unwrap();
    writeln!(out, "R\t{}", join(b.iter().map(|x| x.big_r))).unwrap();
    writeln!(out, "zeta\t{}", join(b.iter().map(|x| x.zeta))).unwrap();
    writeln!(out, "gamma\t{}", join(b.iter().map(|x| &x.gamma))).unwrap();
    writeln!(out, "d\t{}", join(b.iter().map(|x| &x.degree))).unwrap();
    writeln!(out, "e_R\t{}", join(b.iter().map(|x| &x.exponent))).unwrap();
    let c = b.iter().map(|x| match x.exponent.to_u32() {
        Some(e) if e <= 64 => (num_bigint::BigUint::one() << e).to_string(),
        _ => format!("2^{}", x.exponent),
    });
    writeln!(out, "C_R\t{}", join(c)).unwrap();
    out
}

fn sequences_output(kmax: Option<u64>, format: TableFormat, budget: StepBudget) -> Result<String, IndexError> {
    let table = match kmax {
        Some(k) => sequences(k, budget)?,
        None => sequences_within(budget)?,
    };
    Ok(match format {
        TableFormat::Text => sequences_text(&table),
        TableFormat::Tsv => table.to_tsv(),
    })
}

pub fn exit_code(reports: &[VerificationReport]) -> i32 {
    match overall(reports) {
        Status::Pass => EXIT_PASS,
        Status::Fail => EXIT_FAIL,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn error_code(e: &VerifyError) -> i32 {
    match e {
        VerifyError::Construction(_) => EXIT_FAIL,
        _ => EXIT_USAGE,
    }
}

/// Evenly or log-spaced sweep values.
pub fn sweep(from: f64, to: f64, points: usize, log: bool) -> Result<Vec<f64>, VerifyError> {
    if !(from.is_finite() && to.is_finite()) {
        return Err(VerifyError::Usage("sweep bounds must be finite".into()));
    }
    if log && !(from > 0.0 && to > 0.0) {
        return Err(VerifyError::Usage("log sweep needs positive bounds".into()));
    }
    let (a, b) = if log { (from.ln(), to.ln()) } else { (from, to) };
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                return from;
            }
            if i + 1 == points {
                return to;
            }
            let u = a + (b - a) * i as f64 / (points - 1) as f64;
            if log {
                u.exp()
            } else {
                u
            }
        })
        .collect())
}

/// One row per sweep value; parameters not given take the first grid point
/// of the check, and eq21 reports its upper side unless `--side` is set.
pub fn plotdata_output(
    registry: &Registry,
    check_id: &str,
    param: &str,
    values: &[f64],
    fixed: &CheckParams,
    context: Context,
) -> Result<String, VerifyError> {
    let check = registry
        .get(check_id)
        .ok_or_else(|| VerifyError::UnknownCheck(check_id.to_string()))?;
    let mut base = check.grid().into_iter().next().unwrap_or_default().overlay(fixed);
    if check_id == "eq21" && base.side.is_none() {
        base.side = Some(Eq21Side::Upper);
    }
    let mut out = format!("{param}\tlhs\trhs\tmargin\n");
    for &v in values {
        let mut p = base.clone();
        match param {
            "T" => {
                p.t = Some(v);
                p.t_rat = None;
            }
            "W" => p.w = Some(v),
            "S" => p.s = Some(v),
            "gamma" => p.gamma = Some(v),
            other => return Err(VerifyError::Usage(format!("cannot sweep {other:?}; use T, W, S or gamma"))),
        }
        for r in check.run(&p, &context)? {
            writeln!(
                out,
                "{}\t{}\t{}\t{}",
                real_string(v),
                real_string(r.lhs),
                real_string(r.rhs),
                real_string(r.margin)
            )
            .unwrap();
        }
    }
    Ok(out)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| format!("{}: {e}", path.display())),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| e.to_string()),
    }
}

fn fail(code: i32, msg: impl std::fmt::Display) -> i32 {
    eprintln!("stackshift: {msg}");
    code
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: Cli) -> i32 {
    let budget = match StepBudget::from_env() {
        Ok(b) => b,
        Err(e) => return fail(EXIT_USAGE, e),
    };
    let registry = Registry::standard();
    match cli.command {
        Command::Table { steps, format, out } => match table_output(steps, format, budget) {
            Ok(text) => emit(&out, &text).map_or_else(|e| fail(EXIT_USAGE, e), |_| EXIT_PASS),
            Err(e) => fail(EXIT_USAGE, e),
        },
        Command::Sequences { kmax, format, out } => match sequences_output(kmax, format, budget) {
            Ok(text) => emit(&out, &text).map_or_else(|e| fail(EXIT_USAGE, e), |_| EXIT_PASS),
            Err(e) => fail(EXIT_USAGE, e),
        },
        Command::Verify {
            checks,
            all,
            params,
            format,
            out,
        } => {
            let overrides = match params.to_params() {
                Ok(p) => p,
                Err(e) => return fail(EXIT_USAGE, e),
            };
            let config = SuiteConfig {
                ids: if all { Vec::new() } else { checks },
                overrides,
                context: Context {
                    budget,
                    exponent_offset: params.exponent_offset,
                },
            };
            let reports = match run_suite(&registry, &config) {
                Ok(r) => r,
                Err(e) => return fail(error_code(&e), e),
            };
            if cli.verbose {
                for r in &reports {
                    eprintln!("{}\t{}\t{:?}", r.check_id, r.status, r.inputs);
                }
            }
            let text = match format {
                ReportFormat::Json => reports_to_json(&reports),
                ReportFormat::Tsv => reports_to_tsv(&reports),
            };
            if let Err(e) = emit(&out, &text) {
                return fail(EXIT_USAGE, e);
            }
            exit_code(&reports)
        }
        Command::Plotdata {
            check,
            param,
            from,
            to,
            points,
            log,
            params,
            out,
        } => {
            let result = params.to_params().and_then(|fixed| {
                let values = sweep(from, to, points, log)?;
                let context = Context {
                    budget,
                    exponent_offset: params.exponent_offset,
                };
                plotdata_output(&registry, &check, &param, &values, &fixed, context)
            });
            match result {
                Ok(text) => emit(&out, &text).map_or_else(|e| fail(EXIT_USAGE, e), |_| EXIT_PASS),
                Err(e) => fail(error_code(&e), e),
            }
        }
        Command::Checks => {
            let mut text = String::new();
            for c in registry.iter() {
                writeln!(text, "{}\t{}", c.id(), c.description()).unwrap();
            }
            emit(&None, &text).map_or_else(|e| fail(EXIT_USAGE, e), |_| EXIT_PASS)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polyexact::rat;

    #[test]
    fn exact_decimals() {
        assert_eq!(parse_exact("0.3").unwrap(), rat(3, 10));
        assert_eq!(parse_exact("-5/2").unwrap(), rat(-5, 2));
        assert_eq!(parse_exact("2").unwrap(), rat(2, 1));
        assert_eq!(parse_exact(".5").unwrap(), rat(1, 2));
        for bad in ["", ".", "1e3", "a", "1/0"] {
            assert!(parse_exact(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn exit_codes_follow_overall_status() {
        use std::collections::BTreeMap;
        let pass = VerificationReport::exact("a", BTreeMap::new(), 0.0, 1.0, true);
        let fail = VerificationReport::exact("a", BTreeMap::new(), 1.0, 0.0, false);
        let open = VerificationReport::inconclusive("a", BTreeMap::new(), "x".into());
        assert_eq!(exit_code(&[pass.clone()]), EXIT_PASS);
        assert_eq!(exit_code(&[pass.clone(), open.clone()]), EXIT_INCONCLUSIVE);
        assert_eq!(exit_code(&[open, fail, pass]), EXIT_FAIL);
    }

    #[test]
    fn sweep_spacing() {
        assert_eq!(sweep(1.0, 3.0, 3, false).unwrap(), vec![1.0, 2.0, 3.0]);
        let v = sweep(0.1, 10.0, 3, true).unwrap();
        assert!((v[1] - 1.0).abs() < 1e-12);
        assert!(sweep(1.0, 2.0, 0, false).unwrap().is_empty());
        assert!(sweep(0.0, 2.0, 3, true).is_err());
    }
}
