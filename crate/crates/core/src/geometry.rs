//! Molecular geometry: point nuclei with charges, positions and region labels.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Minimum separation below which two nuclei are treated as coincident (bohr).
const COINCIDENT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct Nucleus {
    pub charge: f64,
    pub position: Vec3,
}

/// Input description of one nucleus, as it appears in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NucleusSpec {
    pub charge: f64,
    pub position: [f64; 3],
    pub region: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometrySpec {
    pub nuclei: Vec<NucleusSpec>,
}

/// Validated molecule. Region labels are kept in first-appearance order, and
/// `assignment[i]` indexes into `regions`.
#[derive(Debug, Clone, PartialEq)]
pub struct Molecule {
    nuclei: Vec<Nucleus>,
    regions: Vec<String>,
    assignment: Vec<usize>,
}

impl Molecule {
    pub fn nuclei(&self) -> &[Nucleus] {
        &self.nuclei
    }

    pub fn regions(&self) -> &[String] {
        &self.regions
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    /// Region index of nucleus `i`.
    pub fn region_of_nucleus(&self, i: usize) -> usize {
        self.assignment[i]
    }

    pub fn region_index(&self, label: &str) -> Option<usize> {
        self.regions.iter().position(|r| r == label)
    }

    /// Indices of the nuclei assigned to region `region`.
    pub fn nuclei_in_region(&self, region: usize) -> Vec<usize> {
        (0..self.nuclei.len())
            .filter(|&i| self.assignment[i] == region)
            .collect()
    }

    /// Total nuclear charge; the electron count of the neutral molecule.
    pub fn total_charge(&self) -> f64 {
        self.nuclei.iter().map(|n| n.charge).sum()
    }

    pub fn nuclear_repulsion(&self) -> f64 {
        let mut e = 0.0;
        for (i, a) in self.nuclei.iter().enumerate() {
            for b in &self.nuclei[i + 1..] {
                e += a.charge * b.charge / (a.position - b.position).norm();
            }
        }
        e
    }

    /// Share of the nuclear repulsion assigned to `region` by the symmetric
    /// pair projector: a pair with both nuclei in the region counts fully, a
    /// pair straddling two regions counts one half.
    pub fn nuclear_repulsion_share(&self, region: usize) -> f64 {
        let mut e = 0.0;
        for i in 0..self.nuclei.len() {
            for j in i + 1..self.nuclei.len() {
                let w = 0.5
                    * ((self.assignment[i] == region) as u8 as f64
                        + (self.assignment[j] == region) as u8 as f64);
                if w > 0.0 {
                    let (a, b) = (&self.nuclei[i], &self.nuclei[j]);
                    e += w * a.charge * b.charge / (a.position - b.position).norm();
                }
            }
        }
        e
    }

    /// Centroid of the nuclei in a region (unweighted).
    pub fn region_centroid(&self, region: usize) -> Vec3 {
        let idx = self.nuclei_in_region(region);
        let sum: Vec3 = idx.iter().map(|&i| self.nuclei[i].position).sum();
        sum / idx.len() as f64
    }

    /// Rigidly translated copy.
    pub fn translated(&self, shift: &Vec3) -> Molecule {
        let mut m = self.clone();
        for n in &mut m.nuclei {
            n.position += shift;
        }
        m
    }

    /// Copy with positions mapped through `f` (used for rigid rotations).
    pub fn mapped(&self, f: impl Fn(&Vec3) -> Vec3) -> Molecule {
        let mut m = self.clone();
        for n in &mut m.nuclei {
            n.position = f(&n.position);
        }
        m
    }

    /// Sub-molecule containing only the nuclei of one region.
    pub fn fragment(&self, region: usize) -> Molecule {
        let idx = self.nuclei_in_region(region);
        Molecule {
            nuclei: idx.iter().map(|&i| self.nuclei[i].clone()).collect(),
            regions: vec![self.regions[region].clone()],
            assignment: vec![0; idx.len()],
        }
    }
}

/// Validates a geometry description and builds a [`Molecule`].
pub fn build_molecule(spec: &GeometrySpec) -> Result<Molecule> {
    if spec.nuclei.is_empty() {
        return Err(Error::Geometry("at least one nucleus is required".into()));
    }
    let mut nuclei = Vec::with_capacity(spec.nuclei.len());
    let mut regions: Vec<String> = Vec::new();
    let mut assignment = Vec::with_capacity(spec.nuclei.len());
    for (i, n) in spec.nuclei.iter().enumerate() {
        if !(n.charge > 0.0) || !n.charge.is_finite() {
            return Err(Error::Geometry(format!(
                "nucleus {i}: charge must be positive, got {}",
                n.charge
            )));
        }
        if n.position.iter().any(|x| !x.is_finite()) {
            return Err(Error::Geometry(format!("nucleus {i}: non-finite position")));
        }
        let label = n
            .region
            .as_deref()
            .filter(|l| !l.trim().is_empty())
            .ok_or_else(|| Error::Geometry(format!("nucleus {i}: missing region label")))?;
        let r = match regions.iter().position(|x| x == label) {
            Some(r) => r,
            None => {
                regions.push(label.to_string());
                regions.len() - 1
            }
        };
        let position = Vec3::from(n.position);
        if let Some(j) = nuclei
            .iter()
            .position(|m: &Nucleus| (m.position - position).norm() < COINCIDENT_TOL)
        {
            return Err(Error::Geometry(format!(
                "nuclei {j} and {i} share the same position"
            )));
        }
        nuclei.push(Nucleus {
            charge: n.charge,
            position,
        });
        assignment.push(r);
    }
    Ok(Molecule {
        nuclei,
        regions,
        assignment,
    })
}

impl GeometrySpec {
    /// Hydrogen atoms at the given positions, each labelled by `regions[i]`.
    pub fn hydrogens(positions: &[[f64; 3]], regions: &[&str]) -> GeometrySpec {
        GeometrySpec {
            nuclei: positions
                .iter()
                .zip(regions)
                .map(|(p, r)| NucleusSpec {
                    charge: 1.0,
                    position: *p,
                    region: Some(r.to_string()),
                })
                .collect(),
        }
    }

    /// H2 along z with atom A at the origin and atom B at `(0, 0, r)`.
    pub fn h2(r: f64) -> GeometrySpec {
        Self::hydrogens(&[[0.0, 0.0, 0.0], [0.0, 0.0, r]], &["A", "B"])
    }

    /// Two parallel H2 molecules with bonds along x (length `bond`) and
    /// centres separated by `separation` along z; molecule A at the origin.
    pub fn h2_dimer(bond: f64, separation: f64) -> GeometrySpec {
        let h = 0.5 * bond;
        Self::hydrogens(
            &[
                [-h, 0.0, 0.0],
                [h, 0.0, 0.0],
                [-h, 0.0, separation],
                [h, 0.0, separation],
            ],
            &["A", "A", "B", "B"],
        )
    }

    /// Two H2 molecules on a common z axis, centres `separation` apart;
    /// molecule A centred at the origin.
    pub fn h2_dimer_collinear(bond: f64, separation: f64) -> GeometrySpec {
        let h = 0.5 * bond;
        Self::hydrogens(
            &[
                [0.0, 0.0, -h],
                [0.0, 0.0, h],
                [0.0, 0.0, separation - h],
                [0.0, 0.0, separation + h],
            ],
            &["A", "A", "B", "B"],
        )
    }
}
