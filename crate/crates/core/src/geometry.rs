//! Array layout and spherical-wavefront channel quantities.
//!
//! The ULA lies on the x-axis, centred on the origin. User positions are
//! polar points measured from the array centre with the angle taken from the
//! positive x-axis, so `(r, θ)` maps to `(r cos θ, r sin θ)`. Distances to the
//! individual elements are exact Euclidean distances; no Fresnel or planar
//! expansion is applied anywhere.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::units::SPEED_OF_LIGHT;
use crate::{csv, Error, Result, C64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cartesian {
    pub x: f64,
    pub y: f64,
}

impl Cartesian {
    pub fn distance(&self, other: &Cartesian) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Uniform linear array: `n_elements` antennas spaced `spacing` metres apart.
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayGeometry {
    n_elements: usize,
    carrier_freq: f64,
    spacing: f64,
    wavelength: f64,
    element_positions: Vec<Cartesian>,
}

impl ArrayGeometry {
    pub fn new(n_elements: usize, carrier_freq: f64, spacing: f64) -> Result<Self> {
        if n_elements == 0 {
            return Err(Error::param("n_elements", "must be at least 1"));
        }
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(Error::param(
                "carrier_freq",
                format!("must be positive, got {carrier_freq}"),
            ));
        }
        if !(spacing.is_finite() && spacing > 0.0) {
            return Err(Error::param("spacing", format!("must be positive, got {spacing}")));
        }
        let wavelength = SPEED_OF_LIGHT / carrier_freq;
        let centre = (n_elements as f64 + 1.0) / 2.0;
        let element_positions = (1..=n_elements)
            .map(|k| Cartesian {
                x: (k as f64 - centre) * spacing,
                y: 0.0,
            })
            .collect();
        Ok(ArrayGeometry {
            n_elements,
            carrier_freq,
            spacing,
            wavelength,
            element_positions,
        })
    }

    /// Array with half-wavelength element spacing.
    pub fn half_wavelength(n_elements: usize, carrier_freq: f64) -> Result<Self> {
        if !(carrier_freq.is_finite() && carrier_freq > 0.0) {
            return Err(Error::param(
                "carrier_freq",
                format!("must be positive, got {carrier_freq}"),
            ));
        }
        Self::new(n_elements, carrier_freq, SPEED_OF_LIGHT / carrier_freq / 2.0)
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn carrier_freq(&self) -> f64 {
        self.carrier_freq
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn element_positions(&self) -> &[Cartesian] {
        &self.element_positions
    }

    /// Distance between the first and last element.
    pub fn aperture(&self) -> f64 {
        (self.n_elements - 1) as f64 * self.spacing
    }
}

/// A location in polar coordinates around the array centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    radius: f64,
    angle: f64,
}

impl PolarPoint {
    /// `radius` must be positive (the path loss is singular at the array
    /// centre) and `angle` must lie in `[0, π]`.
    pub fn new(radius: f64, angle: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::param("radius", format!("must be positive, got {radius}")));
        }
        if !(0.0..=PI).contains(&angle) {
            return Err(Error::param("angle", format!("must lie in [0, pi], got {angle}")));
        }
        Ok(PolarPoint { radius, angle })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn to_cartesian(&self) -> Cartesian {
        Cartesian {
            x: self.radius * self.angle.cos(),
            y: self.radius * self.angle.sin(),
        }
    }
}

/// Spherical-wavefront channel `h = √N α b(ψ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector {
    pub coeffs: DVector<C64>,
    /// `√N α`, the norm of `coeffs`.
    pub gain_scale: f64,
}

/// Unit-norm steering vector; entry `n` is `exp(-j 2π |ψ - ψ_n| / λ) / √N`.
pub fn steering_vector(geom: &ArrayGeometry, p: &PolarPoint) -> DVector<C64> {
    let target = p.to_cartesian();
    let scale = 1.0 / (geom.n_elements as f64).sqrt();
    let k = 2.0 * PI / geom.wavelength;
    DVector::from_iterator(
        geom.n_elements,
        geom.element_positions.iter().map(|e| {
            let phase = -k * target.distance(e);
            C64::from_polar(scale, phase)
        }),
    )
}

/// Free-space amplitude loss `λ / (4π r)` to the array centre.
pub fn path_loss(geom: &ArrayGeometry, p: &PolarPoint) -> f64 {
    geom.wavelength / (4.0 * PI * p.radius)
}

pub fn channel(geom: &ArrayGeometry, p: &PolarPoint) -> ChannelVector {
    let gain_scale = (geom.n_elements as f64).sqrt() * path_loss(geom, p);
    ChannelVector {
        coeffs: steering_vector(geom, p) * C64::new(gain_scale, 0.0),
        gain_scale,
    }
}

/// Beamfocusing resolution `|b(p1)ᴴ b(p2)|²`.
pub fn resolution(geom: &ArrayGeometry, p1: &PolarPoint, p2: &PolarPoint) -> f64 {
    steering_vector(geom, p1).dotc(&steering_vector(geom, p2)).norm_sqr()
}

/// Evenly spaced samples `start, …, stop` (inclusive), `steps` of them.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinSpace {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl LinSpace {
    pub fn samples(&self) -> Vec<f64> {
        match self.steps {
            0 => Vec::new(),
            1 => vec![self.start],
            n => {
                let step = (self.stop - self.start) / (n - 1) as f64;
                (0..n).map(|i| self.start + step * i as f64).collect()
            }
        }
    }
}

/// Radial × angular sampling grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
}

impl PolarGrid {
    pub fn new(radii: Vec<f64>, angles: Vec<f64>) -> Result<Self> {
        if radii.is_empty() || angles.is_empty() {
            return Err(Error::param("grid", "radial and angular samples must be non-empty"));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::param("grid", format!("radius {r} is not positive")));
        }
        if let Some(a) = angles.iter().find(|a| !(0.0..=PI).contains(*a)) {
            return Err(Error::param("grid", format!("angle {a} outside [0, pi]")));
        }
        Ok(PolarGrid { radii, angles })
    }

    pub fn from_ranges(radius: LinSpace, angle: LinSpace) -> Result<Self> {
        Self::new(radius.samples(), angle.samples())
    }
}

/// Row-major map over a [`PolarGrid`]: row `i` is radius `i`, column `j` is
/// angle `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolutionMap {
    pub radii: Vec<f64>,
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
}

impl ResolutionMap {
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.angles.len() + col]
    }

    /// `(row, col, value)` of the global maximum; first occurrence wins.
    pub fn peak(&self) -> (usize, usize, f64) {
        let cols = self.angles.len();
        let (idx, v) = self
            .values
            .iter()
            .copied()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |best, (i, v)| if v > best.1 { (i, v) } else { best },
            );
        (idx / cols, idx % cols, v)
    }

    /// Header row holds the angular samples, the first column the radii.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut header = String::from("radius_m\\angle_rad");
        for a in &self.angles {
            header.push(',');
            header.push_str(&csv::fmt_f64(*a));
        }
        writeln!(out, "{header}")?;
        let cols = self.angles.len();
        for (i, r) in self.radii.iter().enumerate() {
            let mut line = csv::fmt_f64(*r);
            for v in &self.values[i * cols..(i + 1) * cols] {
                line.push(',');
                line.push_str(&csv::fmt_f64(*v));
            }
            writeln!(out, "{line}")?;
        }
        Ok(())
    }
}

/// Accumulated beam magnitude `|Σ_m b(focus_m)ᴴ b(grid point)|²` on every
/// grid cell. With a single focus this is the resolution `Δ` itself.
pub fn resolution_grid(geom: &ArrayGeometry, foci: &[PolarPoint], grid: &PolarGrid) -> Result<ResolutionMap> {
    if foci.is_empty() {
        return Err(Error::param("foci", "at least one focus point is required"));
    }
    let combined = foci
        .iter()
        .map(|p| steering_vector(geom, p))
        .fold(DVector::<C64>::zeros(geom.n_elements), |acc, b| acc + b);
    let values = grid
        .radii
        .par_iter()
        .flat_map_iter(|&r| {
            let combined = &combined;
            grid.angles.iter().map(move |&a| {
                // grid samples were validated on construction
                let p = PolarPoint { radius: r, angle: a };
                combined.dotc(&steering_vector(geom, &p)).norm_sqr()
            })
        })
        .collect();
    Ok(ResolutionMap {
        radii: grid.radii.clone(),
        angles: grid.angles.clone(),
        values,
    })
}
