use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::Error;
use crate::geometry::Point;

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
pub(crate) type Rect = [f64; 4];

/// Computational domain.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    /// `(0, 1)²`.
    UnitSquare,
    /// `(-1, 1)² ∖ [0, 1] × [-1, 0]`.
    LShape,
    /// `(0, 3/2) × (0, 3) ∖ ([1/2, 1] × [0, 5/4] ∪ [1/2, 1] × [15/8, 3])`.
    HShape,
    /// Mesh read from a `.poly` file.
    FromFile(PathBuf),
}

impl DomainSpec {
    /// Disjoint rectangles whose union is the closure of the domain.
    pub(crate) fn rectangles(&self) -> Option<Vec<Rect>> {
        match self {
            Self::UnitSquare => Some(vec![[0.0, 1.0, 0.0, 1.0]]),
            Self::LShape => Some(vec![[-1.0, 1.0, 0.0, 1.0], [-1.0, 0.0, -1.0, 0.0]]),
            Self::HShape => Some(vec![[0.0, 0.5, 0.0, 3.0], [1.0, 1.5, 0.0, 3.0], [0.5, 1.0, 1.25, 1.875]]),
            Self::FromFile(_) => None,
        }
    }

    /// Counter-clockwise boundary polygon.
    pub fn boundary_polygon(&self) -> Option<Vec<Point<f64>>> {
        match self {
            Self::UnitSquare => Some(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
            Self::LShape => Some(vec![[-1.0, -1.0], [0.0, -1.0], [0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [-1.0, 1.0]]),
            Self::HShape => Some(vec![
                [0.0, 0.0],
                [0.5, 0.0],
                [0.5, 1.25],
                [1.0, 1.25],
                [1.0, 0.0],
                [1.5, 0.0],
                [1.5, 3.0],
                [1.0, 3.0],
                [1.0, 1.875],
                [0.5, 1.875],
                [0.5, 3.0],
                [0.0, 3.0],
            ]),
            Self::FromFile(_) => None,
        }
    }

    pub fn area(&self) -> Option<f64> {
        self.rectangles().map(|rs| rs.iter().map(|r| (r[1] - r[0]) * (r[3] - r[2])).sum())
    }

    /// Non-convex boundary corners where eigenfunctions are singular.
    pub fn reentrant_corners(&self) -> Vec<Point<f64>> {
        match self {
            Self::UnitSquare | Self::FromFile(_) => Vec::new(),
            Self::LShape => vec![[0.0, 0.0]],
            Self::HShape => vec![[0.5, 1.25], [1.0, 1.25], [1.0, 1.875], [0.5, 1.875]],
        }
    }

    /// Closed-domain membership with absolute tolerance `tol`.
    pub fn contains(&self, p: Point<f64>, tol: f64) -> bool {
        self.rectangles().is_some_and(|rs| {
            rs.iter().any(|r| p[0] >= r[0] - tol && p[0] <= r[1] + tol && p[1] >= r[2] - tol && p[1] <= r[3] + tol)
        })
    }

    /// Coarsest lattice spacing on which every domain corner is a grid point.
    pub(crate) fn lattice_unit(&self) -> f64 {
        match self {
            Self::HShape => 0.125,
            _ => 1.0,
        }
    }
}

impl FromStr for DomainSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "unit-square" | "square" | "unitsquare" => Ok(Self::UnitSquare),
            "l-shape" | "lshape" | "l" => Ok(Self::LShape),
            "h-shape" | "hshape" | "h" => Ok(Self::HShape),
            other => Err(Error::InvalidArgument(format!(
                "unknown domain '{other}' (expected unit-square, lshape or hshape)"
            ))),
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::UnitSquare => f.write_str("unit-square"),
            Self::LShape => f.write_str("lshape"),
            Self::HShape => f.write_str("hshape"),
            Self::FromFile(p) => write!(f, "file:{}", p.display()),
        }
    }
}
