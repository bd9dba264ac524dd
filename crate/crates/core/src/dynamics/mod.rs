//! Numerical integration and phase-portrait rendering.

pub mod integrate;
pub mod portrait;

pub use integrate::{integrate, integrate_backward, Mode, Termination, Trajectory};
pub use portrait::{portrait, render_portrait, Glyph, GlyphShape, Portrait, PortraitSpec, Window};
