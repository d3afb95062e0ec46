//! Design and evaluation of double-protograph LDPC joint source-channel
//! codes with triangular source-to-channel links.

pub mod analysis;
pub mod catalog;
pub mod codec;
pub mod codefile;
pub mod exit;
pub mod gf2;
pub mod lifting;
pub mod optimize;
pub mod protograph;
pub mod scalar;
pub mod sim;

pub use protograph::{CodeError, JointCode, Orientation, Protomatrix, TriangularLink};
pub use scalar::Real;

pub type Decoder = codec::BpDecoder<f64>;
pub type Decoder32 = codec::BpDecoder<f32>;
pub type Frame = codec::Frame<f64>;
pub type Frame32 = codec::Frame<f32>;
pub type Pexit = exit::Pexit<f64>;
pub type Pexit32 = exit::Pexit<f32>;
pub type JTable = exit::JTable<f64>;
