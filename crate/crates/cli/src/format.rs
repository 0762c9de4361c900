//! The packing file format: JSON with the lattice given as columns of
//! generators, disks as center/radius pairs, and an optional explicit
//! contact list that overrides detection.

use anyhow::{anyhow, bail, Context, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use perijam::framework::{Contact, ContactKind, Tensegrity};
use perijam::lattice::Lattice;
use perijam::packing::{Disk, PeriodicPacking};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DiskFile {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ContactFile {
    pub i: usize,
    pub j: usize,
    pub offset: Vec<i64>,
    pub kind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PackingFile {
    pub dim: usize,
    /// Generator columns of the period lattice.
    pub lattice: Vec<Vec<f64>>,
    pub disks: Vec<DiskFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub contacts: Option<Vec<ContactFile>>,
}

impl PackingFile {
    pub fn from_packing(p: &PeriodicPacking) -> Self {
        let d = p.dim();
        let lattice = (0..d)
            .map(|j| p.lattice.generator(j).iter().copied().collect())
            .collect();
        let disks = p
            .disks
            .iter()
            .map(|disk| DiskFile {
                center: disk.center.iter().copied().collect(),
                radius: disk.radius,
            })
            .collect();
        PackingFile {
            dim: d,
            lattice,
            disks,
            contacts: None,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let file: PackingFile =
            serde_json::from_str(text).context("packing file is not valid JSON")?;
        file.check_shape()?;
        Ok(file)
    }

    fn check_shape(&self) -> Result<()> {
        if self.dim == 0 {
            bail!("dim must be at least 1");
        }
        if self.lattice.len() != self.dim {
            bail!(
                "lattice must list {} generator columns, found {}",
                self.dim,
                self.lattice.len()
            );
        }
        for (j, col) in self.lattice.iter().enumerate() {
            if col.len() != self.dim {
                bail!("lattice generator {j} must have {} entries", self.dim);
            }
        }
        if self.disks.is_empty() {
            bail!("a packing needs at least one disk");
        }
        for (i, disk) in self.disks.iter().enumerate() {
            if disk.center.len() != self.dim {
                bail!("disk {i} center must have {} entries", self.dim);
            }
        }
        if let Some(contacts) = &self.contacts {
            for (k, c) in contacts.iter().enumerate() {
                if c.offset.len() != self.dim {
                    bail!("contact {k} offset must have {} entries", self.dim);
                }
                parse_kind(&c.kind).with_context(|| format!("contact {k}"))?;
            }
        }
        Ok(())
    }

    pub fn to_packing(&self) -> Result<PeriodicPacking> {
        let mut basis = DMatrix::zeros(self.dim, self.dim);
        for (j, col) in self.lattice.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                basis[(i, j)] = v;
            }
        }
        let lattice = Lattice::new(basis).map_err(|e| anyhow!("{e}"))?;
        let disks = self
            .disks
            .iter()
            .map(|d| Disk {
                center: DVector::from_column_slice(&d.center),
                radius: d.radius,
            })
            .collect();
        Ok(PeriodicPacking::new(lattice, disks))
    }

    /// The strut tensegrity: explicit contacts when the file carries them,
    /// detection otherwise.
    pub fn to_tensegrity(&self, tol: f64) -> Result<Tensegrity> {
        let packing = self.to_packing()?;
        match &self.contacts {
            Some(list) => {
                let contacts = list
                    .iter()
                    .map(|c| {
                        Ok(Contact {
                            i: c.i,
                            j: c.j,
                            offset: c.offset.clone(),
                            kind: parse_kind(&c.kind)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let vertices = packing.disks.iter().map(|d| d.center.clone()).collect();
                Tensegrity::new(packing.lattice.clone(), vertices, contacts)
                    .map_err(|e| anyhow!("{e}"))
            }
            None => packing.detect_contacts(tol).map_err(|e| anyhow!("{e}")),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("packing files always serialize")
    }
}

pub fn parse_kind(kind: &str) -> Result<ContactKind> {
    match kind {
        "bar" => Ok(ContactKind::Bar),
        "cable" => Ok(ContactKind::Cable),
        "strut" => Ok(ContactKind::Strut),
        other => bail!("unknown contact kind `{other}` (want bar|cable|strut)"),
    }
}
