//! Error types shared by all modules.

use thiserror::Error;

/// Everything that can go wrong while validating a table or running the
/// dynamics at a point where no sensible value exists.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum SinaiError {
    /// Closures of two scatterers (including periodic images) intersect.
    #[error("scatterers {0} and {1} have intersecting closures (clearance {2:.6e})")]
    OverlappingScatterers(usize, usize, f64),

    /// A free flight exceeded the asserted horizon cap.
    #[error("free flight exceeded the horizon cap {cap} (flight ≥ {flight})")]
    HorizonViolated { cap: f64, flight: f64 },

    /// A free flight segment passes through a scatterer; the caller violated
    /// a precondition on the flight time.
    #[error("free flight of length {0} crosses a scatterer")]
    FlightThroughScatterer(f64),

    /// A trajectory must cross a grazing collision to continue.
    #[error("trajectory crosses a grazing collision (|φ| within {0:.3e} of π/2)")]
    DegenerateGrazing(f64),

    /// Tangent data requested at a grazing collision where 1/cos φ blows up.
    #[error("derivative blows up at grazing collision (cos φ = {0:.3e})")]
    GrazingDerivativeBlowup(f64),

    /// Wavefront curvature recursion hit a focal point, 1 - τB = 0.
    #[error("focal singularity in wavefront recursion (1 - τB = {0:.3e})")]
    FocalSingularity(f64),

    /// Adaptive refinement exceeded its budget before meeting the resolution.
    #[error("resolution budget exhausted ({spent} of {budget})")]
    ResolutionInsufficient { budget: usize, spent: usize },

    /// A chart was requested too close to the boundary or to a cone
    /// discontinuity surface.
    #[error("point too close to a singular surface for a chart of scale {0:.3e}")]
    TooCloseToSingularSurface(f64),

    /// Seeding scale violates the standing assumptions of the foliation
    /// construction.
    #[error("foliation standing assumption violated: {0}")]
    StandingAssumptionViolated(&'static str),

    /// Gap interpolation produced a tangent outside the unstable cone.
    #[error("interpolated gap leaf leaves the unstable cone (c1 = {0})")]
    ConeViolationInGap(f64),

    /// A leaf does not cross the requested transversal.
    #[error("foliation leaf does not cross the transversal")]
    LeafDoesNotCross,

    /// Too few usable points to fit a decay rate.
    #[error("insufficient signal: {usable} usable points, need {needed}")]
    InsufficientSignal { usable: usize, needed: usize },

    /// The exponential-fit pencil is numerically rank deficient.
    #[error("ill-conditioned pencil (condition {condition:.3e}, order {order})")]
    IllConditionedPencil { condition: f64, order: usize },

    /// Generic invalid-argument error for configuration values.
    #[error("invalid configuration: {0}")]
    InvalidConfig(&'static str),
}
