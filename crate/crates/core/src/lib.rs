pub mod clustering;
pub mod data;
pub mod history;
pub mod lbae;
pub mod metrics;
pub mod pipeline;
pub mod rbm;
pub mod samplers;
mod scalar;

pub use scalar::Scalar;

pub type Rbm = rbm::RbmModel<f64>;
pub type Qubo = samplers::QuboProblem<f64>;
pub type Samples = samplers::SampleSet<f64>;
pub type Autoencoder = lbae::Lbae<f64>;

pub type Rbm32 = rbm::RbmModel<f32>;
pub type Qubo32 = samplers::QuboProblem<f32>;
pub type Samples32 = samplers::SampleSet<f32>;
pub type Autoencoder32 = lbae::Lbae<f32>;
