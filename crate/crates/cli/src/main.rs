//! Command-line surface: catalog export, jamming analysis with
//! certificates, N_min scans, RUM spectrum CSV, pentagon analytics, and
//! certificate re-verification.
//!
//! Exit codes: 0 positive verdict, 10 negative verdict, 2 input error,
//! 3 numerical failure.

mod format;
mod report;

use std::fs;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use num_complex::Complex;

use perijam::jamming::{
    self, collectively_jammed, consistency_report, strictly_jammed, NMin,
};
use perijam::pentagon;
use perijam::spectrum;
use perijam::Error as CoreError;

use format::PackingFile;
use report::{CertificateJson, ReportJson};

const EXIT_POSITIVE: i32 = 0;
const EXIT_NEGATIVE: i32 = 10;
const EXIT_INPUT: i32 = 2;
const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser)]
#[command(
    name = "perijam",
    version,
    about = "Rigidity and jamming analysis for periodic ball packings"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the built-in packings.
    List,
    /// Write a built-in packing to a packing file.
    Export { name: String, path: PathBuf },
    /// Collective jamming verdict with a stress or flex certificate.
    Analyze {
        path: PathBuf,
        /// Contact detection tolerance (default: 1e-9 times the mean
        /// radius).
        #[arg(long)]
        tol: Option<f64>,
        /// Emit the full report as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Strict jamming verdict with stress and affine-flex certificates.
    Strict {
        path: PathBuf,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Smallest unjamming sublattice index up to a bound.
    Nmin {
        path: PathBuf,
        #[arg(long = "max-index")]
        max_index: i64,
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// RUM spectrum scan over the phase torus, as CSV.
    Rum {
        path: PathBuf,
        /// Samples per axis.
        #[arg(long)]
        grid: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Relative sigma threshold for counting a nullity.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
    },
    /// Twenty-disk pentagon analytics.
    Pentagon {
        /// Find symmetric-pentagon angles attaining this shape constant.
        #[arg(long)]
        x: Option<f64>,
        /// Bracket for the root search in alpha.
        #[arg(
            long,
            num_args = 2,
            value_names = ["LO", "HI"],
            allow_negative_numbers = true,
            default_values_t = [-0.05, 0.005]
        )]
        bracket: Vec<f64>,
        /// Check the closure, shape constant, rigidity and derivative of
        /// the worked realization.
        #[arg(long)]
        check_realization: bool,
        /// Compare determinant and ratio flex tests on N random phases.
        #[arg(long)]
        scan_phases: Option<usize>,
    },
    /// Re-check the certificates in an emitted report.
    Verify { path: PathBuf },
}

fn main() {
    // die quietly when a pipe closes under us, like any other line tool
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            classify_error(&err)
        }
    };
    std::process::exit(code);
}

fn classify_error(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(CoreError::LpNonConvergence) = cause.downcast_ref::<CoreError>() {
            return EXIT_NUMERICAL;
        }
    }
    EXIT_INPUT
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::List => {
            for entry in perijam::catalog::list_catalog() {
                println!("{:22} {}", entry.name, entry.description);
            }
            Ok(EXIT_POSITIVE)
        }
        Command::Export { name, path } => {
            let packing = perijam::catalog::get_packing(&name).map_err(|e| anyhow!("{e}"))?;
            let file = PackingFile::from_packing(&packing);
            fs::write(&path, file.to_json() + "\n")
                .with_context(|| format!("writing {}", path.display()))?;
            println!("wrote {}", path.display());
            Ok(EXIT_POSITIVE)
        }
        Command::Analyze { path, tol, json } => cmd_analyze(&path, tol, json),
        Command::Strict { path, tol, json } => cmd_strict(&path, tol, json),
        Command::Nmin {
            path,
            max_index,
            tol,
            json,
        } => cmd_nmin(&path, max_index, tol, json),
        Command::Rum {
            path,
            grid,
            out,
            tol,
            threads,
        } => cmd_rum(&path, grid, out.as_deref(), tol, threads),
        Command::Pentagon {
            x,
            bracket,
            check_realization,
            scan_phases,
        } => cmd_pentagon(x, &bracket, check_realization, scan_phases),
        Command::Verify { path } => cmd_verify(&path),
    }
}

fn load(
    path: &std::path::Path,
    tol: Option<f64>,
) -> Result<(PackingFile, perijam::framework::Tensegrity)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let file = PackingFile::parse(&text)?;
    let packing = file.to_packing()?;
    let tol = tol.unwrap_or_else(|| packing.default_contact_tol());
    let violations = packing.validate(tol.max(0.0)).map_err(|e| anyhow!("{e}"))?;
    if !violations.is_empty() {
        let mut msg = String::from("packing has overlapping disks:");
        for v in violations.iter().take(5) {
            msg.push_str(&format!(
                "\n  disks {} and {} at offset {:?} overlap by {:.3e}",
                v.i, v.j, v.offset, v.depth
            ));
        }
        bail!(msg);
    }
    let t = file.to_tensegrity(tol)?;
    Ok((file, t))
}

fn cmd_analyze(path: &std::path::Path, tol: Option<f64>, json: bool) -> Result<i32> {
    let (file, t) = load(path, tol)?;
    let (jammed, cert) = collectively_jammed(&t).map_err(|e| anyhow!("{e}"))?;
    let report = ReportJson {
        command: "analyze".into(),
        packing: file,
        verdict: if jammed { "jammed" } else { "unjammed" }.into(),
        collective: Some(jammed),
        strict: None,
        affine_nullity: None,
        n_min: None,
        tested_index_bound: None,
        certificates: vec![report::collective_certificate_json(&cert)],
        first_unjammed: None,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!("contacts: {}", t.num_contacts());
        match &cert {
            jamming::CollectiveCertificate::Stress(s) => {
                println!("collectively jammed: yes");
                println!("equilibrium stress: {:?}", rounded(&s.per_contact));
            }
            jamming::CollectiveCertificate::Flex(_) => {
                println!("collectively jammed: no (flex certificate attached)");
            }
        }
    }
    Ok(if jammed { EXIT_POSITIVE } else { EXIT_NEGATIVE })
}

fn cmd_strict(path: &std::path::Path, tol: Option<f64>, json: bool) -> Result<i32> {
    let (file, t) = load(path, tol)?;
    let outcome = strictly_jammed(&t).map_err(|e| anyhow!("{e}"))?;
    let mut certificates = Vec::new();
    if let Some(s) = &outcome.stress {
        certificates.push(CertificateJson::StrictStress(report::stress_json(s)));
    }
    if let Some(f) = &outcome.affine_flex {
        certificates.push(CertificateJson::AffineFlex(report::flex_json(f)));
    }
    let report = ReportJson {
        command: "strict".into(),
        packing: file,
        verdict: if outcome.strict {
            "strictly jammed"
        } else {
            "not strictly jammed"
        }
        .into(),
        collective: None,
        strict: Some(outcome.strict),
        affine_nullity: Some(outcome.affine_nullity),
        n_min: None,
        tested_index_bound: None,
        certificates,
        first_unjammed: None,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        println!(
            "strictly jammed: {}",
            if outcome.strict { "yes" } else { "no" }
        );
        println!(
            "affinely rigid bars: {} (nullity {})",
            if outcome.affinely_rigid { "yes" } else { "no" },
            outcome.affine_nullity
        );
        match &outcome.stress {
            Some(s) => println!("strict stress: {:?}", rounded(&s.per_contact)),
            None => println!("strict stress: none"),
        }
        if let Some(f) = &outcome.affine_flex {
            if let Some(a) = &f.affine {
                println!("affine flex deformation: {a:.6}");
            }
        }
    }
    Ok(if outcome.strict {
        EXIT_POSITIVE
    } else {
        EXIT_NEGATIVE
    })
}

fn cmd_nmin(path: &std::path::Path, max_index: i64, tol: Option<f64>, json: bool) -> Result<i32> {
    if max_index < 1 {
        bail!("--max-index must be at least 1, got {max_index}");
    }
    let (file, t) = load(path, tol)?;
    let rep = consistency_report(&t, max_index).map_err(|e| anyhow!("{e}"))?;
    let mut certificates = vec![report::collective_certificate_json(&rep.collective_certificate)];
    if let Some(s) = &rep.strict_outcome.stress {
        certificates.push(CertificateJson::StrictStress(report::stress_json(s)));
    }
    let first_unjammed = rep.first_unjammed.as_ref().map(|w| report::SublatticeJson {
        columns: (0..w.sublattice.dim())
            .map(|j| w.sublattice.column(j))
            .collect(),
        characters: report::characters_json(&w.characters),
    });
    let report_json = ReportJson {
        command: "nmin".into(),
        packing: file,
        verdict: format!("n_min {}", rep.n_min),
        collective: Some(rep.collective),
        strict: Some(rep.strict),
        affine_nullity: Some(rep.strict_outcome.affine_nullity),
        n_min: Some(report::n_min_string(&rep.n_min)),
        tested_index_bound: Some(max_index),
        certificates,
        first_unjammed,
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&report_json)?);
    } else {
        println!("collectively jammed: {}", yes_no(rep.collective));
        println!("strictly jammed: {}", yes_no(rep.strict));
        println!("n_min: {}", rep.n_min);
        if rep.consistent_strict_up_to_bound {
            println!("consistently strictly jammed up to index {max_index}");
        } else if rep.consistent_collective_up_to_bound {
            println!("consistently collectively jammed up to index {max_index}");
        }
        if let Some(w) = &rep.first_unjammed {
            println!(
                "first unjammed sublattice columns: {:?}, {:?} ({} flexing characters)",
                w.sublattice.column(0),
                w.sublattice.column(1),
                w.characters.len()
            );
        }
    }
    Ok(match rep.n_min {
        NMin::AtLeast(_) => EXIT_POSITIVE,
        NMin::Finite(_) => EXIT_NEGATIVE,
    })
}

fn cmd_rum(
    path: &std::path::Path,
    grid: usize,
    out: Option<&std::path::Path>,
    tol: f64,
    threads: usize,
) -> Result<i32> {
    let (_, t) = load(path, None)?;
    let scan = spectrum::rum_scan(&t, grid, tol, threads).map_err(|e| anyhow!("{e}"))?;
    match out {
        Some(p) => {
            let mut buf = Vec::new();
            scan.write_csv(&mut buf)?;
            fs::write(p, buf).with_context(|| format!("writing {}", p.display()))?;
            println!("wrote {} samples to {}", scan.samples.len(), p.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            if let Err(e) = scan.write_csv(&mut stdout) {
                if e.kind() != std::io::ErrorKind::BrokenPipe {
                    return Err(e.into());
                }
            }
        }
    }
    Ok(EXIT_POSITIVE)
}

fn cmd_pentagon(
    x: Option<f64>,
    bracket: &[f64],
    check_realization: bool,
    scan_phases: Option<usize>,
) -> Result<i32> {
    let mut did_something = false;
    let mut all_good = true;

    if check_realization {
        did_something = true;
        let p = pentagon::reference_realization();
        let closure = p.closure_residual();
        let x0 = pentagon::shape_constant(&p).map_err(|e| anyhow!("{e}"))?;
        let rigid = pentagon::realization_rigidity_check(&p).map_err(|e| anyhow!("{e}"))?;
        let dx = pentagon::shape_derivative(&p).map_err(|e| anyhow!("{e}"))?;
        println!("closure residual: {closure:.3e}");
        println!("shape constant x: {x0:.6}");
        println!("tour system rigid: {}", yes_no(rigid));
        println!("dx/dalpha along the symmetric family: {dx:.6}");
        all_good &= closure <= 1e-12 && (x0 - 1.619).abs() < 1e-3 && rigid && dx.abs() > 1e-6;
    }

    if let Some(target) = x {
        did_something = true;
        if bracket.len() != 2 {
            bail!("--bracket wants two values");
        }
        match pentagon::find_shape_for_x(target, (bracket[0], bracket[1]))
            .map_err(|e| anyhow!("{e}"))?
        {
            Some(angles) => {
                println!(
                    "alpha {:+.9} beta {:+.9} gamma {:+.9} delta {:+.9} phi {:+.9}",
                    angles.alpha, angles.beta, angles.gamma, angles.delta, angles.phi
                );
                println!(
                    "shape constant: {:.9}",
                    pentagon::shape_constant(&angles).map_err(|e| anyhow!("{e}"))?
                );
            }
            None => {
                println!("no symmetric pentagon attains x = {target} in the bracket");
                all_good = false;
            }
        }
    }

    if let Some(n) = scan_phases {
        did_something = true;
        let p = pentagon::reference_realization();
        let mut agree = 0;
        let mut state = 0x243f6a8885a308d3u64;
        let mut next_angle = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * std::f64::consts::TAU
        };
        for _ in 0..n {
            let mu = Complex::from_polar(1.0, next_angle());
            let mu_p = Complex::from_polar(1.0, next_angle());
            let det_zero = pentagon::flex_determinant(&p, mu, mu_p).norm() <= 1e-8;
            let predicate = pentagon::phase_flex_predicate(&p, mu, mu_p)
                .map_err(|e| anyhow!("{e}"))?;
            if det_zero == predicate {
                agree += 1;
            }
        }
        println!("determinant/formula agreement: {agree}/{n}");
        all_good &= agree == n;
    }

    if !did_something {
        bail!("pentagon wants at least one of --x, --check-realization, --scan-phases");
    }
    Ok(if all_good { EXIT_POSITIVE } else { EXIT_NEGATIVE })
}

fn cmd_verify(path: &std::path::Path) -> Result<i32> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let report: ReportJson = serde_json::from_str(&text).context("report is not valid JSON")?;
    let failures = report::verify_report(&report)?;
    if failures.is_empty() {
        println!(
            "verified {} certificate(s) against the embedded packing",
            report.certificates.len()
        );
        Ok(EXIT_POSITIVE)
    } else {
        for f in &failures {
            eprintln!("verification failed: {f}");
        }
        Ok(EXIT_NEGATIVE)
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn rounded(values: &[f64]) -> Vec<f64> {
    values.iter().map(|v| (v * 1e9).round() / 1e9).collect()
}
