//! Domain types shared by every other module: the grid cell, the dropped
//! shape, the embedding dimension, and the length-regime classification.
//!
//! A grid cell is the rectangle between two adjacent lines of each family,
//! `a` wide and `b` tall, held in canonical form `a >= b`. The intersection
//! probability is symmetric under swapping the two line families (the pose
//! measure is uniform in both coordinates and in orientation), so the swap
//! loses nothing and halves the number of formula branches downstream.

use std::fmt;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A grid dimension or a spherocylinder diameter was zero, negative,
    /// NaN, or infinite.
    NonPositiveDimension { what: &'static str, value: f64 },
    /// A shape length was negative or NaN.
    NegativeLength { value: f64 },
    /// A parameter was NaN or infinite where a finite value is required.
    NonFinite { what: &'static str, value: f64 },
    /// Regime classification is undefined when the cap diameter reaches the
    /// cell height; probability evaluation short-circuits to 1 instead.
    SigmaExceedsCell { sigma: f64, b: f64 },
    /// An argument fell outside the mathematical domain of an operation.
    Domain { what: String },
    /// The refined Simpson sums did not settle within the refinement cap.
    NoConvergence { refinements: u32, last_delta: f64 },
    /// A structural feature of the probability landscape that the search
    /// relies on never appeared on the scanned interval.
    StructureNotFound { what: String },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonPositiveDimension { what, value } => {
                write!(f, "{what} must be positive and finite, got {value}")
            }
            Error::NegativeLength { value } => {
                write!(f, "shape length must be nonnegative, got {value}")
            }
            Error::NonFinite { what, value } => {
                write!(f, "{what} must be finite, got {value}")
            }
            Error::SigmaExceedsCell { sigma, b } => write!(
                f,
                "regime classification undefined for sigma = {sigma} >= b = {b} \
                 (probability is identically 1 there)"
            ),
            Error::Domain { what } => write!(f, "domain error: {what}"),
            Error::NoConvergence { refinements, last_delta } => write!(
                f,
                "quadrature did not converge after {refinements} refinements \
                 (last delta {last_delta:e})"
            ),
            Error::StructureNotFound { what } => write!(f, "structure not found: {what}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;

fn require_finite(what: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NonFinite { what, value })
    }
}

/// One rectangular cell of the line grid, canonicalized so that `a >= b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    a: f64,
    b: f64,
}

impl GridCell {
    /// Builds a canonical cell from the two line spacings, swapping them if
    /// needed so that `a >= b`. Both must be positive and finite.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !a.is_finite() || a <= 0.0 {
            return Err(Error::NonPositiveDimension { what: "grid width a", value: a });
        }
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::NonPositiveDimension { what: "grid height b", value: b });
        }
        if a >= b {
            Ok(GridCell { a, b })
        } else {
            Ok(GridCell { a: b, b: a })
        }
    }

    /// Longer spacing.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Shorter spacing.
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Cell diagonal: the longest segment that fits in the cell, and hence
    /// the certainty threshold for a needle.
    pub fn diagonal(&self) -> f64 {
        self.a.hypot(self.b)
    }

    /// Diagonal of the cell shrunk by `sigma` on each side: the certainty
    /// threshold for a spherocylinder of cap diameter `sigma`.
    pub fn shrunken_diagonal(&self, sigma: f64) -> f64 {
        (self.a - sigma).hypot(self.b - sigma)
    }

    /// Cell aspect ratio `a / b >= 1`.
    pub fn aspect_ratio(&self) -> f64 {
        self.a / self.b
    }
}

/// The dropped object: a zero-width needle or a spherocylinder whose planar
/// footprint is a rectangle capped by two semicircles of diameter `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Shape {
    Needle { length: f64 },
    Spherocylinder { length: f64, diameter: f64 },
}

impl Shape {
    pub fn needle(length: f64) -> Result<Self> {
        require_finite("needle length", length)?;
        if length < 0.0 || length.is_nan() {
            return Err(Error::NegativeLength { value: length });
        }
        Ok(Shape::Needle { length })
    }

    /// A spherocylinder with `diameter == 0` degenerates to a needle and is
    /// normalized as such; a negative diameter is rejected.
    pub fn spherocylinder(length: f64, diameter: f64) -> Result<Self> {
        require_finite("spherocylinder length", length)?;
        require_finite("spherocylinder diameter", diameter)?;
        if length < 0.0 || length.is_nan() {
            return Err(Error::NegativeLength { value: length });
        }
        if diameter == 0.0 {
            return Ok(Shape::Needle { length });
        }
        if diameter < 0.0 || diameter.is_nan() {
            return Err(Error::NonPositiveDimension {
                what: "spherocylinder diameter",
                value: diameter,
            });
        }
        Ok(Shape::Spherocylinder { length, diameter })
    }

    pub fn length(&self) -> f64 {
        match *self {
            Shape::Needle { length } | Shape::Spherocylinder { length, .. } => length,
        }
    }

    /// Cap diameter; zero for a needle.
    pub fn diameter(&self) -> f64 {
        match *self {
            Shape::Needle { .. } => 0.0,
            Shape::Spherocylinder { diameter, .. } => diameter,
        }
    }
}

/// Whether the object is dropped in the grid plane or tilts out of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Embedding {
    TwoD,
    ThreeD,
}

/// One of the four problem variants, i.e. a shape kind crossed with an
/// embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Needle2D,
    Spherocylinder2D,
    Needle3D,
    Spherocylinder3D,
}

impl Variant {
    pub fn embedding(&self) -> Embedding {
        match self {
            Variant::Needle2D | Variant::Spherocylinder2D => Embedding::TwoD,
            Variant::Needle3D | Variant::Spherocylinder3D => Embedding::ThreeD,
        }
    }

    pub fn is_spherocylinder(&self) -> bool {
        matches!(self, Variant::Spherocylinder2D | Variant::Spherocylinder3D)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Variant::Needle2D => "2d-needle",
            Variant::Spherocylinder2D => "2d-sc",
            Variant::Needle3D => "3d-needle",
            Variant::Spherocylinder3D => "3d-sc",
        };
        f.write_str(s)
    }
}

/// Which of the four length intervals a (shape, grid) pair falls in.
///
/// For a needle the separating thresholds are `(b, a, L)` with `L` the cell
/// diagonal; for a spherocylinder they shift to `(b - sigma, a - sigma,
/// L_hat)` with `L_hat` the shrunken diagonal. A length exactly on a
/// threshold belongs to the lower interval; the adjacent closed forms agree
/// there, so the tie-break is observationally irrelevant (and tested).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RegimeKind {
    Short,
    MidB,
    MidA,
    Long,
}

impl fmt::Display for RegimeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RegimeKind::Short => "Short",
            RegimeKind::MidB => "MidB",
            RegimeKind::MidA => "MidA",
            RegimeKind::Long => "Long",
        };
        f.write_str(s)
    }
}

/// A regime kind together with the half-open length interval it covers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regime {
    pub kind: RegimeKind,
    /// Lower end of the interval (exclusive except for `Short`, which is
    /// closed at 0).
    pub lower: f64,
    /// Upper end of the interval (inclusive; `+inf` for `Long`).
    pub upper: f64,
}

/// An intersection probability together with the regime that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probability {
    value: f64,
    regime: RegimeKind,
}

impl Probability {
    /// Wraps a computed probability, absorbing float noise just outside
    /// [0, 1]. Anything beyond noise level is a bug in a closed form.
    pub(crate) fn new(value: f64, regime: RegimeKind) -> Self {
        debug_assert!(
            (-1e-9..=1.0 + 1e-9).contains(&value),
            "probability {value} out of range in regime {regime}"
        );
        Probability { value: value.clamp(0.0, 1.0), regime }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn regime(&self) -> RegimeKind {
        self.regime
    }
}

/// Validates raw user parameters and brings them to canonical form: the
/// grid is swapped to `a >= b` and a zero-diameter spherocylinder becomes a
/// needle. The shape is otherwise unchanged.
pub fn validate_and_canonicalize(a: f64, b: f64, shape: Shape) -> Result<(GridCell, Shape)> {
    let grid = GridCell::new(a, b)?;
    let shape = match shape {
        Shape::Needle { length } => Shape::needle(length)?,
        Shape::Spherocylinder { length, diameter } => Shape::spherocylinder(length, diameter)?,
    };
    Ok((grid, shape))
}

/// Classifies the length regime of a shape on a canonical grid.
///
/// For spherocylinders this requires `sigma < b`; with the cap diameter at
/// or above the cell height no regime algebra applies (the probability
/// operations short-circuit to 1 instead of calling this).
pub fn classify_regime(shape: &Shape, grid: &GridCell) -> Result<Regime> {
    let sigma = shape.diameter();
    if let Shape::Spherocylinder { diameter, .. } = *shape {
        if diameter >= grid.b() {
            return Err(Error::SigmaExceedsCell { sigma: diameter, b: grid.b() });
        }
    }
    let l = shape.length();
    if l < 0.0 || l.is_nan() {
        return Err(Error::NegativeLength { value: l });
    }
    let t1 = grid.b() - sigma;
    let t2 = grid.a() - sigma;
    let t3 = grid.shrunken_diagonal(sigma);
    let regime = if l <= t1 {
        Regime { kind: RegimeKind::Short, lower: 0.0, upper: t1 }
    } else if l <= t2 {
        Regime { kind: RegimeKind::MidB, lower: t1, upper: t2 }
    } else if l <= t3 {
        Regime { kind: RegimeKind::MidA, lower: t2, upper: t3 }
    } else {
        Regime { kind: RegimeKind::Long, lower: t3, upper: f64::INFINITY }
    };
    Ok(regime)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalize_swaps_to_a_ge_b() {
        let (grid, shape) =
            validate_and_canonicalize(2.0, 5.0, Shape::needle(1.0).unwrap()).unwrap();
        assert_eq!((grid.a(), grid.b()), (5.0, 2.0));
        assert_eq!(shape, Shape::Needle { length: 1.0 });
    }

    #[test]
    fn canonicalize_zero_diameter_sc_becomes_needle() {
        let sc = Shape::Spherocylinder { length: 1.0, diameter: 0.0 };
        let (grid, shape) = validate_and_canonicalize(5.0, 2.0, sc).unwrap();
        assert_eq!((grid.a(), grid.b()), (5.0, 2.0));
        assert_eq!(shape, Shape::Needle { length: 1.0 });
    }

    #[test]
    fn canonicalize_rejects_negative_length() {
        let err = validate_and_canonicalize(5.0, 2.0, Shape::Needle { length: -1.0 });
        assert_eq!(err.unwrap_err(), Error::NegativeLength { value: -1.0 });
    }

    #[test]
    fn canonicalize_rejects_bad_dimensions() {
        let needle = Shape::Needle { length: 1.0 };
        assert!(matches!(
            validate_and_canonicalize(0.0, 2.0, needle),
            Err(Error::NonPositiveDimension { .. })
        ));
        assert!(matches!(
            validate_and_canonicalize(f64::NAN, 2.0, needle),
            Err(Error::NonPositiveDimension { .. })
        ));
        assert!(matches!(
            validate_and_canonicalize(f64::INFINITY, 2.0, needle),
            Err(Error::NonPositiveDimension { .. })
        ));
        assert!(matches!(
            Shape::spherocylinder(1.0, -0.5),
            Err(Error::NonPositiveDimension { .. })
        ));
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let (grid, shape) =
            validate_and_canonicalize(2.0, 5.0, Shape::needle(1.5).unwrap()).unwrap();
        let (grid2, shape2) = validate_and_canonicalize(grid.a(), grid.b(), shape).unwrap();
        assert_eq!(grid, grid2);
        assert_eq!(shape, shape2);
    }

    #[test]
    fn classify_needle_short() {
        let grid = GridCell::new(4.0, 3.0).unwrap();
        let r = classify_regime(&Shape::needle(1.0).unwrap(), &grid).unwrap();
        assert_eq!(r.kind, RegimeKind::Short);
        assert_eq!((r.lower, r.upper), (0.0, 3.0));
    }

    #[test]
    fn classify_boundary_lengths_take_lower_regime() {
        let grid = GridCell::new(4.0, 3.0).unwrap();
        // L = 5 exactly: the diagonal belongs to MidA, not Long.
        let r = classify_regime(&Shape::needle(5.0).unwrap(), &grid).unwrap();
        assert_eq!(r.kind, RegimeKind::MidA);
        assert_eq!(r.upper, 5.0);

        let r = classify_regime(&Shape::needle(3.0).unwrap(), &grid).unwrap();
        assert_eq!(r.kind, RegimeKind::Short);
        let r = classify_regime(&Shape::needle(4.0).unwrap(), &grid).unwrap();
        assert_eq!(r.kind, RegimeKind::MidB);

        // sigma-shifted thresholds: l = b - sigma stays Short.
        let sc = Shape::spherocylinder(2.5, 0.5).unwrap();
        let r = classify_regime(&sc, &grid).unwrap();
        assert_eq!(r.kind, RegimeKind::Short);
        assert_eq!((r.lower, r.upper), (0.0, 2.5));
    }

    #[test]
    fn classify_rejects_sigma_at_or_above_cell_height() {
        let grid = GridCell::new(4.0, 3.0).unwrap();
        let sc = Shape::spherocylinder(1.0, 3.0).unwrap();
        assert!(matches!(
            classify_regime(&sc, &grid),
            Err(Error::SigmaExceedsCell { .. })
        ));
    }

    #[test]
    fn regimes_partition_all_lengths() {
        let grid = GridCell::new(4.0, 3.0).unwrap();
        let mut last = RegimeKind::Short;
        let mut l = 0.0;
        while l < 8.0 {
            let r = classify_regime(&Shape::needle(l).unwrap(), &grid).unwrap();
            assert!(l > r.lower || (l == 0.0 && r.lower == 0.0));
            assert!(l <= r.upper);
            // monotone: the kind never steps backwards as l grows
            let order = |k: RegimeKind| match k {
                RegimeKind::Short => 0,
                RegimeKind::MidB => 1,
                RegimeKind::MidA => 2,
                RegimeKind::Long => 3,
            };
            assert!(order(r.kind) >= order(last));
            last = r.kind;
            l += 0.01;
        }
        assert_eq!(last, RegimeKind::Long);
    }

    #[test]
    fn square_cell_has_empty_mid_b() {
        let grid = GridCell::new(3.0, 3.0).unwrap();
        for l in [0.5, 3.0, 3.5, 4.2, 5.0] {
            let r = classify_regime(&Shape::needle(l).unwrap(), &grid).unwrap();
            assert_ne!(r.kind, RegimeKind::MidB, "MidB interval (3, 3] is empty");
        }
    }
}
