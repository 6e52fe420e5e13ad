//! Command-line front end. Every report is CSV with a header row; notes
//! go to standard error.
//!
//! Exit codes: 0 success, 1 usage or validation error, 2 infeasible
//! request (rank-deficient decode, no repair pair, unschedulable repair).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::anchors::validate_anchors;
use crate::bandwidth::{self, BandwidthError};
use crate::codec::{CodeParams, CodecError};
use crate::resilience::{self, AvailabilityModel};
use crate::scheduler::{baselines, makespan_lower_bound, schedule_repairs, verify_schedule};
use crate::store::{self, StoreError};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hsrc", version, about = "Homomorphic self-repairing codes: encode, repair, decode and analyse")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CodeArgs {
    /// Symbol alphabet size (power of two)
    #[arg(long, default_value_t = 2)]
    pub q: u64,
    /// Fragments needed to decode
    #[arg(long, default_value_t = 3)]
    pub k: usize,
    /// Encoded fragments, n = q^e - 1
    #[arg(long, default_value_t = 15)]
    pub n: usize,
    /// Symbols per slice (object size per codeword), a multiple of k
    #[arg(long = "M", visible_alias = "slice-size", default_value_t = 48)]
    pub m: usize,
}

impl CodeArgs {
    fn code(&self) -> Result<CodeParams, CodecError> {
        CodeParams::new(self.q, self.k, self.m, self.n)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encode a file into n fragment files inside --out
    Encode {
        input: PathBuf,
        #[command(flatten)]
        code: CodeArgs,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Rebuild the original file from fragment files
    Decode {
        fragments: Vec<PathBuf>,
        /// Output file
        #[arg(long)]
        out: PathBuf,
    },
    /// Regenerate one fragment file from two others
    Repair {
        /// Index of the lost fragment
        #[arg(long)]
        index: usize,
        fragments: Vec<PathBuf>,
        /// Output fragment file
        #[arg(long)]
        out: PathBuf,
    },
    /// Object availability under i.i.d. node availability.
    /// CSV columns: n,k,q,p_node,p_obj_hsrc,p_obj_mds, and with --trials
    /// also p_obj_mc,mc_stderr,trials,seed
    Resilience {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        q: u64,
        /// Node availability, one value or a comma-separated list
        #[arg(long, value_delimiter = ',', required = true)]
        pnode: Vec<f64>,
        /// Monte Carlo trials (0 disables simulation)
        #[arg(long, default_value_t = 0)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Probability that x random fragments decode.
    /// CSV columns: x,rho_x,one_minus_rho_x,rho_x_mds
    Profile {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        q: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repair traffic per lost fragment in units of B/k.
    /// CSV columns: x_th,gamma_egr,gamma_prl,gamma_seq,gamma_eclazy,
    /// gamma_msrgc_d{d}; with --xth a single strategy row with columns
    /// x_th,x_c,d_x,d_x_exact,d_prl,d_seq,d_seq_to_n_minus_1,d_egr,d_eclazy
    Bandwidth {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        /// Live nodes contacted by the regenerating-code baseline
        #[arg(long, value_delimiter = ',')]
        dcontact: Vec<usize>,
        /// Lazy repair threshold
        #[arg(long)]
        xth: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Slot-by-slot parallel repair under unit link capacity.
    /// CSV columns: slot,downloader_target,uploader_source
    Schedule {
        #[command(flatten)]
        code: CodeArgs,
        /// Lost fragment indices; defaults to the points w^0..w^6
        #[arg(long, value_delimiter = ',')]
        missing: Vec<usize>,
        /// Live fragment indices; defaults to every other point
        #[arg(long, value_delimiter = ',')]
        available: Vec<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recheck the reference values for small codes
    Validate,
}

#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn invalid(message: impl ToString) -> Self {
        Failure { code: EXIT_INVALID, message: message.to_string() }
    }

    fn infeasible(message: impl ToString) -> Self {
        Failure { code: EXIT_INFEASIBLE, message: message.to_string() }
    }
}

impl From<CodecError> for Failure {
    fn from(e: CodecError) -> Self {
        match e {
            CodecError::RankDeficient { .. } | CodecError::PairRepairInfeasible { .. } => Failure::infeasible(e),
            _ => Failure::invalid(e),
        }
    }
}

impl From<StoreError> for Failure {
    fn from(e: StoreError) -> Self {
        match e {
            StoreError::Codec(c) => c.into(),
            StoreError::NoRepairPair { .. } => Failure::infeasible(e),
            _ => Failure::invalid(e),
        }
    }
}

impl From<BandwidthError> for Failure {
    fn from(e: BandwidthError) -> Self {
        match e {
            BandwidthError::RgcInfeasible { .. } => Failure::infeasible(e),
            _ => Failure::invalid(e),
        }
    }
}

impl From<resilience::ResilienceError> for Failure {
    fn from(e: resilience::ResilienceError) -> Self {
        Failure::invalid(e)
    }
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INVALID } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { stderr.write_all(text.as_bytes()) } else { stdout.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn emit(text: &str, out: Option<&PathBuf>, stdout: &mut dyn Write) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::invalid(format!("{}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(Failure::invalid),
    }
}

fn execute(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Encode { input, code, out } => {
            let len = std::fs::metadata(&input).map_err(|e| Failure::invalid(format!("{}: {e}", input.display())))?.len();
            if len == 0 {
                return Err(Failure::invalid("empty input"));
            }
            let plan = store::plan_slices(len, code.q, code.k, code.m, code.n)?;
            let paths = store::encode_file(&input, &plan, &out)?;
            let _ = writeln!(
                stderr,
                "{} bytes in {} slices of {} symbols, {} padding symbols",
                len, plan.slice_count, code.m, plan.padding_symbols
            );
            let mut text = String::from("index,path\n");
            for (i, p) in paths.iter().enumerate() {
                writeln!(text, "{i},{}", p.display()).unwrap();
            }
            emit(&text, None, stdout)
        }
        Command::Decode { fragments, out } => {
            if fragments.is_empty() {
                return Err(Failure::invalid("no fragment files given"));
            }
            let n = store::decode_file(&fragments, &out)?;
            let _ = writeln!(stderr, "wrote {n} bytes to {}", out.display());
            Ok(())
        }
        Command::Repair { index, fragments, out } => {
            if fragments.is_empty() {
                return Err(Failure::invalid("no fragment files given"));
            }
            let r = store::repair_file(index, &fragments, &out)?;
            let text = format!(
                "target,source_a,source_b,downloads\n{},{},{},{}\n",
                index, r.pair.beta, r.pair.gamma, r.downloads
            );
            emit(&text, None, stdout)
        }
        Command::Resilience { n, k, q, pnode, trials, seed, threads, out } => {
            let mut text = String::from("n,k,q,p_node,p_obj_hsrc,p_obj_mds");
            if trials > 0 {
                text.push_str(",p_obj_mc,mc_stderr,trials,seed");
            }
            text.push('\n');
            for p in pnode {
                let model = AvailabilityModel::new(n, k, q, p)?;
                let hsrc = resilience::p_obj_hsrc(&model)?;
                let mds = resilience::p_obj_mds(n, k, p)?;
                write!(text, "{n},{k},{q},{p},{hsrc:.10},{mds:.10}").unwrap();
                if trials > 0 {
                    let mc = resilience::simulate_p_obj_threaded(&model, trials, seed, threads)?;
                    write!(text, ",{:.10},{:.10},{trials},{seed}", mc.estimate, mc.stderr).unwrap();
                }
                text.push('\n');
            }
            emit(&text, out.as_ref(), stdout)
        }
        Command::Profile { n, k, q, out } => {
            let prof = resilience::retrieval_profile(n, k, q)?;
            let mut text = String::from("x,rho_x,one_minus_rho_x,rho_x_mds\n");
            for row in &prof.rows {
                writeln!(text, "{},{:.6},{:.4},{}", row.x, row.rho_x_f64(), row.one_minus_rho_x(), row.mds).unwrap();
            }
            let _ = writeln!(stderr, "decodable {k}-subsets: {}", prof.decodable_k_subsets);
            emit(&text, out.as_ref(), stdout)
        }
        Command::Bandwidth { n, k, dcontact, xth, out } => {
            let text = match xth {
                None => bandwidth::traffic_table(n, k, &dcontact)?.to_csv(),
                Some(x) => {
                    let t = bandwidth::strategy_totals(n, k, x)?;
                    let dx = bandwidth::expected_downloads(x, n, k)?;
                    let agg = bandwidth::aggregate_costs(x, n, k)?;
                    for &d in &dcontact {
                        bandwidth::rgc_baselines(k as f64, k, d, 1)?;
                    }
                    format!(
                        "x_th,x_c,d_x,d_x_exact,d_prl,d_seq,d_seq_to_n_minus_1,d_egr,d_eclazy\n{x},{},{},{},{},{},{},{},{}\n",
                        t.critical,
                        bandwidth::fmt_f(dx.value),
                        dx.exact,
                        bandwidth::fmt_f(agg.parallel),
                        bandwidth::fmt_f(agg.sequential),
                        bandwidth::fmt_f(agg.sequential_to_n_minus_1),
                        t.eager,
                        t.ec_lazy
                    )
                }
            };
            emit(&text, out.as_ref(), stdout)
        }
        Command::Schedule { code, missing, available, out } => {
            let c = code.code()?;
            let missing = if missing.is_empty() {
                (0..7u64)
                    .map(|i| c.index_of_power(i).ok_or_else(|| Failure::invalid(format!("w^{i} is not an evaluation point"))))
                    .collect::<Result<Vec<_>, _>>()?
            } else {
                missing
            };
            if let Some(&bad) = missing.iter().chain(&available).find(|&&i| i >= c.n()) {
                return Err(Failure::invalid(format!("index {bad} is out of range for n = {}", c.n())));
            }
            let available = if available.is_empty() {
                (0..c.n()).filter(|i| !missing.contains(i)).collect()
            } else {
                available
            };
            let s = schedule_repairs(&c, &missing, &available)?;
            let violations = verify_schedule(&s, &c);
            let b = baselines(c.k(), missing.len());
            let _ = writeln!(
                stderr,
                "makespan {} (lower bound {}), {} of {} repairs done by slot 2, hybrid baseline {}, erasure baseline {}",
                s.makespan,
                makespan_lower_bound(s.tasks.len(), s.available.len()),
                s.completed_by(2),
                s.tasks.len(),
                b.hybrid,
                b.erasure
            );
            for v in &violations {
                let _ = writeln!(stderr, "violation: {v}");
            }
            emit(&s.to_csv(), out.as_ref(), stdout)?;
            if !s.infeasible.is_empty() {
                return Err(Failure::infeasible(format!("no repair pair for {:?}", s.infeasible)));
            }
            Ok(())
        }
        Command::Validate => {
            let report = validate_anchors();
            let mut text = String::from("anchor,result,detail\n");
            for a in &report {
                writeln!(text, "{},{},\"{}\"", a.name, if a.passed { "pass" } else { "FAIL" }, a.detail.replace('"', "'")).unwrap();
            }
            let passed = report.iter().filter(|a| a.passed).count();
            let _ = writeln!(stderr, "{passed} of {} anchors pass", report.len());
            emit(&text, None, stdout)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["hsrc"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let (code, _, err) = call(&["profile", "--n", "31", "--k", "5", "--bogus"]);
        assert_eq!(code, 1);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn profile_row() {
        let (code, out, _) = call(&["profile", "--n", "31", "--k", "5", "--q", "2"]);
        assert_eq!(code, 0);
        assert!(out.lines().any(|l| l.starts_with("5,") && l.contains(",0.5096,")));
    }

    #[test]
    fn resilience_row() {
        let (code, out, _) = call(&["resilience", "--n", "31", "--k", "5", "--q", "2", "--pnode", "0.7"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("n,k,q,p_node,p_obj_hsrc,p_obj_mds\n31,5,2,0.7,"));
    }

    #[test]
    fn invalid_shape() {
        let (code, _, err) = call(&["schedule", "--n", "16"]);
        assert_eq!(code, 1);
        assert!(err.contains("n <= q^(M/k) - 1 violated") || err.contains("not a power"));
    }

    #[test]
    fn rgc_infeasible_exit_code() {
        let (code, _, err) = call(&["bandwidth", "--n", "15", "--k", "3", "--dcontact", "2"]);
        assert_eq!(code, 2);
        assert!(err.contains("RGC repair infeasible"));
    }
}
