//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 bad input, 2 layout failure, 3 numerical failure,
//! 4 precondition failure. Tolerances are overridden with `--tol-KEY VAL`
//! for any key in [`Tolerances::KEYS`].

use crate::classify::{full_spectrum, SpectrumReport};
use crate::discriminant::{build_qpoly, discriminant_report, DiscriminantReport, Which};
use crate::error::{Error, Result};
use crate::gradients::{gradcheck, GradCheck, Target};
use crate::oracle::{compare, OracleComparison, OracleSpectrum};
use crate::pathfinder::{perturb_path, samples_csv, straight_path, DeformedPath, PathOptions};
use crate::potential::Potential;
use crate::rootfinder::select_r;
use crate::serial::csv_complex;
use crate::tolerances::Tolerances;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Relative error accepted by `gradcheck` for a zero exit.
pub const GRADCHECK_EXIT_TOL: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(name = "zs-spectral", version, about = "Periodic and Dirichlet spectra of Zakharov-Shabat operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify the periodic and Dirichlet spectrum.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long = "R")]
        r: Option<usize>,
    },
    /// Check L²-gradients against central differences.
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        lambda: Complex64,
        /// delta, chiD or floquet (trace is also accepted).
        #[arg(long, default_value = "floquet")]
        kind: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        directions: usize,
    },
    /// Sylvester discriminant of the polynomial carrying the eigenvalues in B_R.
    Discriminant {
        #[command(flatten)]
        common: Common,
        #[arg(long = "R")]
        r: Option<usize>,
        /// periodic or dirichlet.
        #[arg(long, default_value = "periodic")]
        kind: String,
    },
    /// Compare the numerical spectrum of a constant potential with its closed form.
    OracleCompare {
        #[command(flatten)]
        common: Common,
        #[arg(long = "R")]
        r: Option<usize>,
        #[arg(long, default_value_t = 1e-7)]
        value_tol: f64,
    },
    /// Metrics along the straight path between two potentials, then a random
    /// deformation of its interior.
    Deform {
        #[command(flatten)]
        common: Common,
        /// Second endpoint.
        #[arg(long)]
        to: PathBuf,
        #[arg(long, default_value_t = 33)]
        samples: usize,
        #[arg(long, default_value_t = 0.3)]
        magnitude: f64,
        #[arg(long, default_value_t = 20)]
        max_tries: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    potential: PathBuf,
    #[arg(long = "n-scan", default_value_t = 8)]
    n_scan: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

/// `RE,IM`, `a+bi` or a bare real number.
pub fn parse_complex(s: &str) -> std::result::Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|e| format!("bad number {t:?}: {e}"));
    match parts.as_slice() {
        [z] => z.parse::<Complex64>().map_err(|_| format!("bad number {z:?}")),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected RE,IM, got {s:?}")),
    }
}

/// Splits `--tol-KEY VAL` (or `--tol-KEY=VAL`) out of the argument list.
fn extract_tolerances(args: Vec<String>) -> Result<(Vec<String>, Tolerances)> {
    let mut tol = Tolerances::default();
    let mut rest = Vec::with_capacity(args.len());
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(spec) = arg.strip_prefix("--tol-") else {
            rest.push(arg);
            continue;
        };
        let (key, value) = match spec.split_once('=') {
            Some((k, v)) => (k.to_string(), v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| Error::InvalidInput(format!("--tol-{spec} needs a value")))?;
                (spec.to_string(), v)
            }
        };
        let value: f64 =
            value.parse().map_err(|e| Error::InvalidInput(format!("--tol-{key}: bad value {value:?}: {e}")))?;
        tol.set(&key, value)?;
    }
    tol.validate()?;
    Ok((rest, tol))
}

fn read_potential(path: &Path) -> Result<Potential> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    Potential::from_json(&text)
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(text.as_bytes()).map_err(|e| Error::InvalidInput(format!("stdout: {e}"))),
    }
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

fn parse_targets(kind: &str) -> Result<Vec<Target>> {
    Ok(match kind.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
        "delta" => vec![Target::Delta],
        "trace" => vec![Target::Trace],
        "chid" => vec![Target::ChiD],
        "floquet" => (0..4).map(Target::Floquet).collect(),
        _ => return Err(Error::InvalidInput(format!("unknown gradient kind {kind:?}"))),
    })
}

fn spectrum_text(report: &SpectrumReport, format: Format) -> String {
    match format {
        Format::Json => json(report),
        Format::Csv => report.to_csv(),
    }
}

fn gradcheck_text(check: &GradCheck, format: Format) -> String {
    match format {
        Format::Json => json(check),
        Format::Csv => {
            let mut s = String::from("target,direction,analytic,finite_difference,rel_error,pass\n");
            for r in &check.rows {
                s.push_str(&format!(
                    "{},{},{},{},{:e},{}\n",
                    r.target,
                    r.direction,
                    csv_complex(r.analytic),
                    csv_complex(r.finite_difference),
                    r.rel_error,
                    r.pass
                ));
            }
            s
        }
    }
}

fn discriminant_text(rep: &DiscriminantReport, format: Format) -> String {
    match format {
        Format::Json => json(rep),
        Format::Csv => format!(
            "R,which,scale,discriminant,indicator,coefficient_indicator,imaginary_part,multiple\n{},{},{},{},{:e},{:e},{:e},{}\n",
            rep.r,
            rep.which,
            rep.scale,
            csv_complex(rep.discriminant),
            rep.indicator,
            rep.coefficient_indicator,
            rep.imaginary_part,
            rep.multiple
        ),
    }
}

fn oracle_text(cmp: &OracleComparison, format: Format) -> String {
    match format {
        Format::Json => json(cmp),
        Format::Csv => {
            let opt_c = |z: Option<Complex64>| z.map(csv_complex).unwrap_or_default();
            let opt = |v: Option<String>| v.unwrap_or_default();
            let mut s = String::from(
                "parity,oracle,numeric,value_error,m_alg_oracle,m_alg_numeric,m_geom_oracle,m_geom_numeric,pass\n",
            );
            for r in &cmp.rows {
                s.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{}\n",
                    r.parity.name(),
                    opt_c(r.oracle),
                    opt_c(r.numeric),
                    opt(r.value_error.map(|e| format!("{e:e}"))),
                    opt(r.m_alg_oracle.map(|m| m.to_string())),
                    opt(r.m_alg_numeric.map(|m| m.to_string())),
                    opt(r.m_geom_oracle.map(|m| m.to_string())),
                    opt(r.m_geom_numeric.map(|m| m.to_string())),
                    r.pass
                ));
            }
            s
        }
    }
}

fn deform_text(path: &DeformedPath, format: Format) -> String {
    match format {
        Format::Json => json(path),
        Format::Csv => samples_csv(&path.samples),
    }
}

fn dispatch(cli: Cli, tol: &Tolerances, stdout: &mut dyn Write) -> Result<i32> {
    match cli.command {
        Command::Spectrum { common, r } => {
            let p = read_potential(&common.potential)?;
            let report = full_spectrum(&p, r, common.n_scan, tol)?;
            emit(&common.out, &spectrum_text(&report, common.format), stdout)?;
            Ok(0)
        }
        Command::Gradcheck { common, lambda, kind, seed, directions } => {
            let p = read_potential(&common.potential)?;
            let targets = parse_targets(&kind)?;
            let check = gradcheck(&p, lambda, &targets, directions, seed, tol)?;
            emit(&common.out, &gradcheck_text(&check, common.format), stdout)?;
            Ok(if check.max_rel_error < GRADCHECK_EXIT_TOL { 0 } else { 3 })
        }
        Command::Discriminant { common, r, kind } => {
            let p = read_potential(&common.potential)?;
            let which: Which = kind.parse()?;
            let r = match r {
                Some(r) => r,
                None => select_r(&p, common.n_scan, tol)?,
            };
            let rep = discriminant_report(&build_qpoly(&p, r, which, tol)?)?;
            emit(&common.out, &discriminant_text(&rep, common.format), stdout)?;
            Ok(0)
        }
        Command::OracleCompare { common, r, value_tol } => {
            let p = read_potential(&common.potential)?;
            let Potential::Constant { a, k } = p else {
                return Err(Error::Precondition("oracle-compare needs a constant potential".into()));
            };
            let report = full_spectrum(&p, r, common.n_scan, tol)?;
            let oracle = OracleSpectrum::new(a, k, common.n_scan + k.unsigned_abs() as usize + 4);
            let cmp = compare(&report, &oracle, value_tol);
            emit(&common.out, &oracle_text(&cmp, common.format), stdout)?;
            Ok(if cmp.pass { 0 } else { 3 })
        }
        Command::Deform { common, to, samples, magnitude, max_tries, seed } => {
            let start = read_potential(&common.potential)?;
            let end = read_potential(&to)?;
            let opts = PathOptions { samples, n_scan: common.n_scan, refine: false };
            let path = straight_path(&start, &end, &opts, tol)?;
            let deformed = perturb_path(&path, magnitude, seed, max_tries, &opts, tol)?;
            emit(&common.out, &deform_text(&deformed, common.format), stdout)?;
            Ok(if deformed.score.is_simple() { 0 } else { 3 })
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn run(args: Vec<String>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let (args, tol) = match extract_tolerances(args) {
        Ok(v) => v,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli, &tol, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_arguments() {
        assert_eq!(parse_complex("1.5,-2").unwrap(), Complex64::new(1.5, -2.0));
        assert_eq!(parse_complex("-3").unwrap(), Complex64::new(-3.0, 0.0));
        assert_eq!(parse_complex("1.2-0.3i").unwrap(), Complex64::new(1.2, -0.3));
        assert!(parse_complex("1,2,3").is_err());
        assert!(parse_complex("x").is_err());
    }

    #[test]
    fn tolerance_flags() {
        let args = ["zs", "spectrum", "--tol-residual", "1e-6", "--tol-pairing=2e-7", "--potential", "p.json"]
            .map(String::from)
            .to_vec();
        let (rest, tol) = extract_tolerances(args).unwrap();
        assert_eq!(rest, ["zs", "spectrum", "--potential", "p.json"]);
        assert_eq!(tol.residual, 1e-6);
        assert_eq!(tol.pairing, 2e-7);
        assert!(extract_tolerances(vec!["--tol-nope".into(), "1".into()]).is_err());
        assert!(extract_tolerances(vec!["--tol-residual".into(), "-1".into()]).is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(vec!["zs".into(), "bogus".into()], &mut out, &mut err), 1);
        assert_eq!(run(vec!["zs".into(), "--help".into()], &mut out, &mut err), 0);
        let missing = ["zs", "spectrum", "--potential", "/nonexistent.json"].map(String::from).to_vec();
        assert_eq!(run(missing, &mut out, &mut err), 1);
    }
}
