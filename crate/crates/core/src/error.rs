use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("alpha must lie in (0, 1), got {0}")]
    AlphaOutOfRange(f64),
    #[error("strict regime requires alpha in (3/4, 1), got {0}")]
    OutsideStrictRegime(f64),
    #[error("alpha^2 + 2*alpha - 2 must be positive (alpha > sqrt(3) - 1), got alpha = {0}")]
    NonpositiveDiscriminant(f64),
    #[error("value {0} lies outside [0, 1]")]
    ValueOutOfDomain(f64),
    #[error("point ({0}, {1}) lies outside the unit square beyond tolerance")]
    PointOutOfDomain(f64, f64),
    #[error("direction-map denominator {0} vanishes")]
    DirectionSingularity(f64),
    #[error("direction with slope parameter {0} lies outside the required cone")]
    DirectionOutsideCone(f64),
    #[error("past is inadmissible: empty preimage region for the {0}-branch prefix")]
    InadmissiblePast(usize),
    #[error("depth {depth} exceeds the recorded past length {len}")]
    DepthExceedsPast { depth: usize, len: usize },
    #[error("segment of length {0} is too short to refine")]
    DegenerateSegment(f64),
    #[error("tube half-width {halfwidth} too large for a fiber of length {length}")]
    TubeTooWide { halfwidth: f64, length: f64 },
    #[error("tube acceptance rate {0} too low for a conclusive probe")]
    InconclusiveProbe(f64),
}

pub type Result<T> = std::result::Result<T, Error>;
