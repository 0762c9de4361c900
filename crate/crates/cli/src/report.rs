//! Report JSON: schema-stable verdicts with re-verifiable certificates.
//! Every report embeds the packing it was computed from, so `verify` can
//! rebuild the tensegrity and re-check the certificate from scratch.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use perijam::framework::{FlexVector, Tensegrity};
use perijam::jamming::{self, CollectiveCertificate, NMin, StressVector};
use perijam::lattice::QuotientCharacter;

use crate::format::PackingFile;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StressJson {
    pub per_contact: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FlexJson {
    pub per_vertex: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affine: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CertificateJson {
    Stress(StressJson),
    StrictStress(StressJson),
    Flex(FlexJson),
    AffineFlex(FlexJson),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SublatticeJson {
    /// Generator columns in lattice coordinates.
    pub columns: Vec<Vec<i64>>,
    /// Flexing characters as (re, im) phases per lattice generator.
    pub characters: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportJson {
    pub command: String,
    pub packing: PackingFile,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub collective: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub affine_nullity: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_min: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tested_index_bound: Option<i64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub certificates: Vec<CertificateJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_unjammed: Option<SublatticeJson>,
}

pub fn stress_json(s: &StressVector) -> StressJson {
    StressJson {
        per_contact: s.per_contact.clone(),
    }
}

pub fn flex_json(f: &FlexVector) -> FlexJson {
    FlexJson {
        per_vertex: f
            .per_vertex
            .iter()
            .map(|v| v.iter().copied().collect())
            .collect(),
        affine: f.affine.as_ref().map(|a| {
            (0..a.nrows())
                .map(|r| (0..a.ncols()).map(|c| a[(r, c)]).collect())
                .collect()
        }),
    }
}

pub fn collective_certificate_json(cert: &CollectiveCertificate) -> CertificateJson {
    match cert {
        CollectiveCertificate::Stress(s) => CertificateJson::Stress(stress_json(s)),
        CollectiveCertificate::Flex(f) => CertificateJson::Flex(flex_json(f)),
    }
}

pub fn characters_json(chars: &[QuotientCharacter]) -> Vec<Vec<[f64; 2]>> {
    chars
        .iter()
        .map(|c| c.generator_phases().iter().map(|p| [p.re, p.im]).collect())
        .collect()
}

pub fn n_min_string(n: &NMin) -> String {
    n.to_string()
}

/// Re-check every certificate in a report against the embedded packing.
/// Returns a list of failures, empty when everything re-verifies.
pub fn verify_report(report: &ReportJson) -> Result<Vec<String>> {
    let tol = jamming::CERT_TOL;
    let t: Tensegrity = report
        .packing
        .to_tensegrity(1e-9)
        .context("rebuilding the tensegrity from the embedded packing")?;
    let mut failures = Vec::new();
    if report.certificates.is_empty() {
        bail!("report carries no certificates to verify");
    }
    for (idx, cert) in report.certificates.iter().enumerate() {
        match cert {
            CertificateJson::Stress(s) => {
                let stress = StressVector {
                    per_contact: s.per_contact.clone(),
                };
                if stress.per_contact.len() != t.num_contacts() {
                    failures.push(format!("certificate {idx}: stress length mismatch"));
                    continue;
                }
                let residual = stress.equilibrium_residual(&t);
                if residual > tol {
                    failures.push(format!(
                        "certificate {idx}: equilibrium residual {residual:.3e}"
                    ));
                }
                if !stress.signs_ok(&t) {
                    failures.push(format!("certificate {idx}: stress signs violate kinds"));
                }
            }
            CertificateJson::StrictStress(s) => {
                let stress = StressVector {
                    per_contact: s.per_contact.clone(),
                };
                if stress.per_contact.len() != t.num_contacts() {
                    failures.push(format!("certificate {idx}: stress length mismatch"));
                    continue;
                }
                let eq = stress.equilibrium_residual(&t);
                let strict = stress.strict_residual(&t);
                if eq > tol || strict > tol {
                    failures.push(format!(
                        "certificate {idx}: residuals eq {eq:.3e} strict {strict:.3e}"
                    ));
                }
                if !stress.signs_ok(&t) {
                    failures.push(format!("certificate {idx}: stress signs violate kinds"));
                }
            }
            CertificateJson::Flex(f) => {
                let flex = flex_from_json(f, t.dim())?;
                let m = t.rigidity_matrix();
                let col = flex.to_column();
                if col.len() != m.ncols() {
                    failures.push(format!("certificate {idx}: flex length mismatch"));
                    continue;
                }
                let image = m * &col;
                let min = image.iter().cloned().fold(f64::INFINITY, f64::min);
                if min < -tol {
                    failures.push(format!(
                        "certificate {idx}: strut constraint violated by {min:.3e}"
                    ));
                }
                let deflated = perijam::framework::deflate(&col, &t.translation_flexes());
                if deflated.norm() <= 1e-9 {
                    failures.push(format!("certificate {idx}: flex is a bare translation"));
                }
            }
            CertificateJson::AffineFlex(f) => {
                let flex = flex_from_json(f, t.dim())?;
                if flex.affine.is_none() {
                    failures.push(format!("certificate {idx}: affine flex without A block"));
                    continue;
                }
                let m = t.as_bars().affine_rigidity_matrix();
                let col = flex.to_column();
                if col.len() != m.ncols() {
                    failures.push(format!("certificate {idx}: flex length mismatch"));
                    continue;
                }
                let residual = (m * &col).amax();
                if residual > tol {
                    failures.push(format!(
                        "certificate {idx}: affine flex residual {residual:.3e}"
                    ));
                }
                let trivial = t.affine_trivial_flexes();
                let deflated = perijam::framework::deflate(&col, &trivial);
                if deflated.norm() <= 1e-9 {
                    failures.push(format!("certificate {idx}: affine flex is trivial"));
                }
            }
        }
    }
    Ok(failures)
}

fn flex_from_json(f: &FlexJson, dim: usize) -> Result<FlexVector> {
    use nalgebra::{DMatrix, DVector};
    let per_vertex = f
        .per_vertex
        .iter()
        .map(|v| DVector::from_column_slice(v))
        .collect();
    let affine = match &f.affine {
        Some(rows) => {
            let mut a = DMatrix::zeros(dim, dim);
            for (r, row) in rows.iter().enumerate() {
                for (c, &v) in row.iter().enumerate() {
                    a[(r, c)] = v;
                }
            }
            Some(a)
        }
        None => None,
    };
    Ok(FlexVector { per_vertex, affine })
}

#[cfg(test)]
mod tests {
    use super::*;
    use perijam::jamming::collectively_jammed;

    #[test]
    fn a_fresh_stress_report_verifies() {
        let p = perijam::catalog::get_packing("one_disk_square").unwrap();
        let file = PackingFile::from_packing(&p);
        let t = file.to_tensegrity(1e-9).unwrap();
        let (jammed, cert) = collectively_jammed(&t).unwrap();
        assert!(jammed);
        let report = ReportJson {
            command: "analyze".into(),
            packing: file,
            verdict: "jammed".into(),
            collective: Some(true),
            strict: None,
            affine_nullity: None,
            n_min: None,
            tested_index_bound: None,
            certificates: vec![collective_certificate_json(&cert)],
            first_unjammed: None,
        };
        let failures = verify_report(&report).unwrap();
        assert!(failures.is_empty(), "{failures:?}");
        // corrupting the stress must break verification
        let mut bad = report.clone();
        if let CertificateJson::Stress(s) = &mut bad.certificates[0] {
            s.per_contact[0] = 5.0;
        }
        assert!(!verify_report(&bad).unwrap().is_empty());
    }
}
