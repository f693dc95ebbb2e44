use serde::{Deserialize, Serialize};

use super::{Side, GeometryError, KINK_TOL};

/// Default lower bound on `1 − |f′|` for leaves.
pub const DEFAULT_MARGIN: f64 = 0.02;

/// Shape of a single spacelike leaf `t = f(x)` in 1+1 dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum LeafShape {
    /// `t = height`.
    Flat { height: f64 },
    /// Continuous piecewise-linear graph through `vertices` (sorted by x),
    /// extended linearly beyond both ends. Interior vertices are kinks.
    Polyline { vertices: Vec<[f64; 2]> },
    /// Smooth bump `t = offset + amplitude · exp(−(x − center)² / width²)`.
    Gaussian {
        offset: f64,
        amplitude: f64,
        center: f64,
        width: f64,
    },
}

/// A spacelike Cauchy leaf given as a graph, with its kink loci.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafWithKinks {
    shape: LeafShape,
    margin: f64,
    kinks: Vec<f64>,
    max_slope: f64,
}

impl LeafWithKinks {
    pub fn new(shape: LeafShape, margin: f64) -> Result<Self, GeometryError> {
        if !(margin > 0.0 && margin < 1.0) {
            return Err(GeometryError::InvalidLeaf(format!("margin {margin} outside (0, 1)")));
        }
        let (kinks, max_slope) = match &shape {
            LeafShape::Flat { .. } => (Vec::new(), 0.0),
            LeafShape::Polyline { vertices } => {
                if vertices.len() < 2 {
                    return Err(GeometryError::InvalidLeaf("polyline needs two vertices".into()));
                }
                if vertices.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(GeometryError::InvalidLeaf(
                        "polyline abscissas must increase".into(),
                    ));
                }
                let slopes: Vec<f64> = vertices
                    .windows(2)
                    .map(|w| (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]))
                    .collect();
                let kinks = vertices[1..vertices.len() - 1]
                    .iter()
                    .zip(slopes.windows(2))
                    .filter(|(_, s)| s[0] != s[1])
                    .map(|(v, _)| v[0])
                    .collect();
                (kinks, slopes.iter().fold(0.0_f64, |m, s| m.max(s.abs())))
            }
            LeafShape::Gaussian { amplitude, width, .. } => {
                if *width <= 0.0 {
                    return Err(GeometryError::InvalidLeaf("gaussian width must be positive".into()));
                }
                // max |f'| attained at |x - center| = width / sqrt(2)
                let m = amplitude.abs() * std::f64::consts::SQRT_2 / width * (-0.5_f64).exp();
                (Vec::new(), m)
            }
        };
        if max_slope > 1.0 - margin {
            return Err(GeometryError::SpacelikeViolation {
                slope: max_slope,
                margin,
            });
        }
        Ok(Self {
            shape,
            margin,
            kinks,
            max_slope,
        })
    }

    pub fn flat(height: f64) -> Self {
        Self::new(LeafShape::Flat { height }, DEFAULT_MARGIN).expect("flat leaf is spacelike")
    }

    /// `t = apex_t + slope·|x − apex_x|`; negative slope gives a ∧, positive a ∨.
    pub fn wedge(apex_x: f64, apex_t: f64, slope: f64, margin: f64) -> Result<Self, GeometryError> {
        Self::new(
            LeafShape::Polyline {
                vertices: vec![
                    [apex_x - 1.0, apex_t + slope],
                    [apex_x, apex_t],
                    [apex_x + 1.0, apex_t + slope],
                ],
            },
            margin,
        )
    }

    pub fn shape(&self) -> &LeafShape {
        &self.shape
    }

    pub fn margin(&self) -> f64 {
        self.margin
    }

    pub fn kink_loci(&self) -> &[f64] {
        &self.kinks
    }

    /// Supremum of `|f′|` over the leaf.
    pub fn max_abs_slope(&self) -> f64 {
        self.max_slope
    }

    pub fn height(&self, x: f64) -> f64 {
        match &self.shape {
            LeafShape::Flat { height } => *height,
            LeafShape::Polyline { vertices } => {
                let i = segment_index(vertices, x);
                let (a, b) = (vertices[i], vertices[i + 1]);
                a[1] + (b[1] - a[1]) * (x - a[0]) / (b[0] - a[0])
            }
            LeafShape::Gaussian {
                offset,
                amplitude,
                center,
                width,
            } => {
                let u = (x - center) / width;
                offset + amplitude * (-u * u).exp()
            }
        }
    }

    /// One-sided spatial derivative. At a kink an untagged request is an error.
    pub fn slope(&self, x: f64, side: Side) -> Result<f64, GeometryError> {
        match &self.shape {
            LeafShape::Flat { .. } => Ok(0.0),
            LeafShape::Polyline { vertices } => {
                let at_kink = self
                    .kinks
                    .iter()
                    .find(|k| (x - *k).abs() <= KINK_TOL * k.abs().max(1.0));
                let i = match (at_kink, side) {
                    (Some(_), Side::Smooth) => return Err(GeometryError::KinkWithoutSide { s: 0.0, x }),
                    (Some(k), Side::Left) => segment_index(vertices, *k - 1e-9 * k.abs().max(1.0)),
                    (Some(k), Side::Right) => segment_index(vertices, *k + 1e-9 * k.abs().max(1.0)),
                    (None, _) => segment_index(vertices, x),
                };
                let (a, b) = (vertices[i], vertices[i + 1]);
                Ok((b[1] - a[1]) / (b[0] - a[0]))
            }
            LeafShape::Gaussian {
                amplitude,
                center,
                width,
                ..
            } => {
                let u = (x - center) / width;
                Ok(-2.0 * amplitude * u / width * (-u * u).exp())
            }
        }
    }

    /// Left and right slope limits at each kink.
    pub fn one_sided_slopes(&self) -> Vec<(f64, f64)> {
        self.kinks
            .iter()
            .map(|&k| {
                (
                    self.slope(k, Side::Left).expect("tagged slope"),
                    self.slope(k, Side::Right).expect("tagged slope"),
                )
            })
            .collect()
    }
}

fn segment_index(vertices: &[[f64; 2]], x: f64) -> usize {
    let last = vertices.len() - 2;
    vertices[1..=last]
        .iter()
        .position(|v| x < v[0])
        .unwrap_or(last)
}
