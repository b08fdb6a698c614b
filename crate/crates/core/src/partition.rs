//! Sharp spatial regions: every point of space belongs to exactly one region.

use crate::error::{Error, Result};
use crate::geometry::{Molecule, Vec3};

/// Points within this distance of a cell boundary go to the lowest index.
pub const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum PartitionKind {
    /// One region covering all space.
    Whole,
    /// Two half-spaces; region 0 is `normal · x - offset <= 0`.
    Plane { normal: Vec3, offset: f64 },
    /// Nearest-centroid cells.
    Voronoi { centroids: Vec<Vec3> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub labels: Vec<String>,
    pub kind: PartitionKind,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    /// `(normal, offset)` when the partition is a single dividing plane.
    pub fn plane(&self) -> Option<(Vec3, f64)> {
        match &self.kind {
            PartitionKind::Plane { normal, offset } => Some((*normal, *offset)),
            _ => None,
        }
    }

    pub fn region_of(&self, x: &Vec3) -> usize {
        match &self.kind {
            PartitionKind::Whole => 0,
            PartitionKind::Plane { normal, offset } => {
                if normal.dot(x) - offset <= BOUNDARY_TOL {
                    0
                } else {
                    1
                }
            }
            PartitionKind::Voronoi { centroids } => {
                let mut best = 0;
                let mut best_d = (x - centroids[0]).norm();
                for (k, c) in centroids.iter().enumerate().skip(1) {
                    let d = (x - c).norm();
                    if d < best_d - BOUNDARY_TOL {
                        best = k;
                        best_d = d;
                    }
                }
                best
            }
        }
    }

    pub fn describe(&self) -> String {
        match &self.kind {
            PartitionKind::Whole => "whole-space".into(),
            PartitionKind::Plane { normal, offset } => format!(
                "plane n=({:.6},{:.6},{:.6}) offset={:.6}",
                normal.x, normal.y, normal.z, offset
            ),
            PartitionKind::Voronoi { centroids } => {
                format!("voronoi over {} centroids", centroids.len())
            }
        }
    }
}

/// Voronoi cells of the per-region nuclear centroids. Two regions give the
/// perpendicular bisector plane of the two centroids.
pub fn build_partition(molecule: &Molecule) -> Result<Partition> {
    let labels = molecule.regions().to_vec();
    let centroids: Vec<Vec3> = (0..labels.len())
        .map(|r| molecule.region_centroid(r))
        .collect();
    for i in 0..centroids.len() {
        for j in i + 1..centroids.len() {
            if (centroids[i] - centroids[j]).norm() < 1e-8 {
                return Err(Error::Partition(format!(
                    "regions `{}` and `{}` have coincident centroids",
                    labels[i], labels[j]
                )));
            }
        }
    }
    let kind = match centroids.len() {
        1 => PartitionKind::Whole,
        2 => {
            let d = centroids[1] - centroids[0];
            let normal = d / d.norm();
            let offset = normal.dot(&(0.5 * (centroids[0] + centroids[1])));
            PartitionKind::Plane { normal, offset }
        }
        _ => PartitionKind::Voronoi { centroids },
    };
    Ok(Partition { labels, kind })
}

/// Explicit dividing plane for a two-region molecule; region 0 (the first
/// label) lies on the side `normal · x < offset`.
pub fn plane_partition(molecule: &Molecule, normal: Vec3, offset: f64) -> Result<Partition> {
    if molecule.region_count() != 2 {
        return Err(Error::Partition(format!(
            "a dividing plane needs exactly two regions, molecule has {}",
            molecule.region_count()
        )));
    }
    let len = normal.norm();
    if !(len > 1e-12) || !offset.is_finite() {
        return Err(Error::Partition("plane normal must be non-zero and finite".into()));
    }
    let normal = normal / len;
    let offset = offset / len;
    let p = Partition {
        labels: molecule.regions().to_vec(),
        kind: PartitionKind::Plane { normal, offset },
    };
    for (i, n) in molecule.nuclei().iter().enumerate() {
        let r = molecule.region_of_nucleus(i);
        if p.region_of(&n.position) != r {
            log::warn!(
                "nucleus {i} (region `{}`) lies on the other side of the dividing plane",
                p.labels[r]
            );
        }
    }
    Ok(p)
}
