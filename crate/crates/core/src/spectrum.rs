//! Rigid-unit-mode spectrum scans over the phase torus and the 1 x k
//! diagonal-sublattice sweep.

use num_rational::Ratio;
use std::io::Write;

use crate::error::{Error, Result};
use crate::framework::Tensegrity;
use crate::lattice::{enumerate_characters, smith_normal_form, QuotientCharacter, Sublattice};
use crate::numkernel::rank_nullspace;

/// Default relative threshold under which a sampled phase counts as in
/// the spectrum.
pub const DEFAULT_SPECTRUM_TOL: f64 = 1e-8;

/// One sampled phase point; mu_m = exp(i theta_m).
#[derive(Debug, Clone)]
pub struct SpectrumSample {
    pub thetas: Vec<f64>,
    pub sigma_min: f64,
    pub nullity: usize,
}

#[derive(Debug, Clone)]
pub struct SpectrumGrid {
    pub resolution: usize,
    pub samples: Vec<SpectrumSample>,
}

impl SpectrumGrid {
    /// Samples with a nontrivial nullspace at the scan tolerance; the
    /// trivial point always qualifies through its translations.
    pub fn in_spectrum(&self) -> Vec<&SpectrumSample> {
        self.samples.iter().filter(|s| s.nullity > 0).collect()
    }

    /// CSV export: `theta1,theta2,sigma_min,nullity`, one row per sample in
    /// row-major grid order, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        let dim = self.samples.first().map_or(2, |s| s.thetas.len());
        let header: Vec<String> = (1..=dim).map(|i| format!("theta{i}")).collect();
        writeln!(out, "{},sigma_min,nullity", header.join(","))?;
        for s in &self.samples {
            let angles: Vec<String> = s.thetas.iter().map(|t| format!("{t:.16e}")).collect();
            writeln!(
                out,
                "{},{:.16e},{}",
                angles.join(","),
                s.sigma_min,
                s.nullity
            )?;
        }
        Ok(())
    }
}

/// Scan sigma_min of the bar phase matrix over the uniform grid of exact
/// rational phases (2 pi j / resolution per axis). Nullity counts singular
/// values below `tol_factor` times each point's largest singular value.
/// Grid points are evaluated in row-major order (thread workers merge
/// back deterministically).
pub fn rum_scan(
    t: &Tensegrity,
    resolution: usize,
    tol_factor: f64,
    threads: usize,
) -> Result<SpectrumGrid> {
    if resolution < 2 {
        return Err(Error::BadResolution(resolution));
    }
    let d = t.dim();
    let total = resolution.pow(d as u32);
    let bars = t.as_bars();
    let evaluate = |flat: usize| -> Result<SpectrumSample> {
        let mut digits = Vec::with_capacity(d);
        let mut rest = flat;
        for _ in 0..d {
            digits.push(rest % resolution);
            rest /= resolution;
        }
        digits.reverse(); // row-major: first axis varies slowest
        let turns: Vec<Ratio<i64>> = digits
            .iter()
            .map(|&j| Ratio::new(j as i64, resolution as i64))
            .collect();
        let chi = QuotientCharacter::from_turns(turns);
        let m = bars.phase_matrix(&chi);
        let r = rank_nullspace(&m, tol_factor)?;
        let sigma_min = r.singular_values.last().copied().unwrap_or(0.0);
        let thetas = digits
            .iter()
            .map(|&j| std::f64::consts::TAU * j as f64 / resolution as f64)
            .collect();
        Ok(SpectrumSample {
            thetas,
            sigma_min,
            nullity: r.nullity,
        })
    };

    let workers = threads.max(1).min(total);
    let samples = if workers == 1 {
        (0..total).map(evaluate).collect::<Result<Vec<_>>>()?
    } else {
        let mut slots: Vec<Option<SpectrumSample>> = vec![None; total];
        std::thread::scope(|scope| -> Result<()> {
            let mut handles = Vec::new();
            for w in 0..workers {
                let evaluate = &evaluate;
                handles.push(scope.spawn(move || -> Result<Vec<(usize, SpectrumSample)>> {
                    let mut chunk = Vec::new();
                    let mut flat = w;
                    while flat < total {
                        chunk.push((flat, evaluate(flat)?));
                        flat += workers;
                    }
                    Ok(chunk)
                }));
            }
            for h in handles {
                for (flat, sample) in h.join().expect("worker panicked")? {
                    slots[flat] = Some(sample);
                }
            }
            Ok(())
        })?;
        slots.into_iter().map(|s| s.expect("all slots filled")).collect()
    };

    Ok(SpectrumGrid {
        resolution,
        samples,
    })
}

/// Verdict of the 1 x k sweep at one k.
#[derive(Debug, Clone)]
pub struct LineSweepEntry {
    pub k: i64,
    pub jammed: bool,
    /// Orders of the second-generator root of unity that admit flexes.
    pub flexing_root_orders: Vec<i64>,
}

/// Test the diagonal sublattices diag(1, k) for k = 1..=k_max through their
/// characters (mu = 1, mu' a k-th root of unity).
pub fn line_sweep_1xk(t: &Tensegrity, k_max: i64) -> Result<Vec<LineSweepEntry>> {
    let bars = t.as_bars();
    let mut out = Vec::new();
    for k in 1..=k_max {
        let s = Sublattice::from_columns(&[&[1, 0], &[0, k]])?;
        let q = smith_normal_form(&s)?;
        let mut flexing = Vec::new();
        for chi in enumerate_characters(&q, &s) {
            if chi.is_trivial() {
                continue;
            }
            let m = bars.phase_matrix(&chi);
            let r = rank_nullspace(&m, crate::numkernel::DEFAULT_RANK_TOL)?;
            if r.nullity > 0 {
                let turn = chi.turns()[1];
                flexing.push(*turn.denom());
            }
        }
        flexing.sort_unstable();
        flexing.dedup();
        out.push(LineSweepEntry {
            k,
            jammed: flexing.is_empty(),
            flexing_root_orders: flexing,
        });
    }
    Ok(out)
}
