//! Minimal double-precision tensor engine with reverse-mode automatic
//! differentiation.
//!
//! The operator set is exactly what the deep models need: 1-D (grouped,
//! dilated) convolution and its transpose, elementwise arithmetic with
//! trailing-dimension broadcast, PReLU/sigmoid/ReLU, reductions, and the
//! two loss primitives. Every operator's gradient is verified against
//! central finite differences (see [`gradcheck`]).
//!
//! Graph construction and backward are single-threaded per model instance;
//! tensors are immutable once created and no operation mutates its inputs.

mod adam;
mod dwt;
pub mod gradcheck;
mod ops;
mod tensor;

pub use adam::{adam_step, AdamState};
pub use dwt::{read_dwt, read_dwt_from, write_dwt, write_dwt_to, WeightRecord};
pub use ops::global_layer_norm;
pub use tensor::{backward, Tensor};

#[cfg(test)]
mod tests;
