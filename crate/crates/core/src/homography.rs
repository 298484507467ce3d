//! Projective mapping from image pixels to table-surface coordinates.

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::segment::PitchEvent;

const DET_EPS: f64 = 1e-12;
const W_EPS: f64 = 1e-12;
const COLLINEAR_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HomographyError {
    #[error("correspondences are degenerate: {0}")]
    Degenerate(String),
    #[error("homography is singular")]
    Singular,
    #[error("point maps to infinity (w = {0:e})")]
    AtInfinity(f64),
}

/// A pixel <-> table-surface point pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Correspondence {
    pub pixel: [f64; 2],
    pub table: [f64; 2],
}

/// JSON sidecar holding the four table-corner correspondences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrespondenceFile {
    pub correspondences: Vec<Correspondence>,
}

/// 3x3 projective matrix normalized so that `h[2][2] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Homography(Matrix3<f64>);

impl Homography {
    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn from_matrix(m: [[f64; 3]; 3]) -> Result<Self, HomographyError> {
        let m = Matrix3::from_fn(|r, c| m[r][c]);
        let scale = m[(2, 2)];
        if scale.abs() < DET_EPS {
            return Err(HomographyError::Singular);
        }
        let m = m / scale;
        if m.determinant().abs() <= DET_EPS {
            return Err(HomographyError::Singular);
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> [[f64; 3]; 3] {
        let m = &self.0;
        [0, 1, 2].map(|r| [0, 1, 2].map(|c| m[(r, c)]))
    }

    /// Solves the 8-unknown linear system exactly for four correspondences.
    pub fn fit(pairs: &[Correspondence]) -> Result<Self, HomographyError> {
        let [a, b, c, d] = pairs else {
            return Err(HomographyError::Degenerate(format!(
                "exactly 4 correspondences required, got {}",
                pairs.len()
            )));
        };
        let quad = [a, b, c, d];
        for side in [|p: &Correspondence| p.pixel, |p: &Correspondence| p.table] {
            let pts = quad.map(side);
            if let Some(triple) = collinear_triple(&pts) {
                return Err(HomographyError::Degenerate(format!("points {triple:?} are collinear")));
            }
        }

        let mut sys = SMatrix::<f64, 8, 8>::zeros();
        let mut rhs = SVector::<f64, 8>::zeros();
        for (i, p) in quad.iter().enumerate() {
            let ([x, y], [u, v]) = (p.pixel, p.table);
            let r = 2 * i;
            sys.row_mut(r).copy_from_slice(&[x, y, 1.0, 0.0, 0.0, 0.0, -u * x, -u * y]);
            sys.row_mut(r + 1).copy_from_slice(&[0.0, 0.0, 0.0, x, y, 1.0, -v * x, -v * y]);
            rhs[r] = u;
            rhs[r + 1] = v;
        }
        let h = sys.lu().solve(&rhs).ok_or(HomographyError::Singular)?;
        Self::from_matrix([[h[0], h[1], h[2]], [h[3], h[4], h[5]], [h[6], h[7], 1.0]])
    }

    pub fn apply(&self, x: f64, y: f64) -> Result<(f64, f64), HomographyError> {
        let p = self.0 * Vector3::new(x, y, 1.0);
        if p.z.abs() < W_EPS {
            return Err(HomographyError::AtInfinity(p.z));
        }
        Ok((p.x / p.z, p.y / p.z))
    }
}

/// Index triple of three collinear points, if any.
fn collinear_triple(pts: &[[f64; 2]; 4]) -> Option<[usize; 3]> {
    const TRIPLES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    let scale = pts
        .iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    TRIPLES.into_iter().find(|&[i, j, k]| {
        let (a, b, c) = (pts[i], pts[j], pts[k]);
        let cross = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        cross.abs() <= COLLINEAR_EPS * scale * scale
    })
}

/// Table-surface coordinates (meters) of a detected pitch.
pub fn pitch_table_position(pitch: &PitchEvent, h: &Homography) -> Result<(f64, f64), HomographyError> {
    h.apply(pitch.x, pitch.y)
}
