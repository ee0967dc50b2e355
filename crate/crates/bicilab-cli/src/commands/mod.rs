pub mod encode;
pub mod eval;
pub mod report;
pub mod scenes;
pub mod synth;
pub mod train;
