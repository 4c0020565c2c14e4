pub mod bogo;
pub mod chi;
pub mod matloc;
pub mod params;
pub mod pipeline;
pub mod scatter;
