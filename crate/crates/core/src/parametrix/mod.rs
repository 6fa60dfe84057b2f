//! Fourier-side parametrix: the oscillator symbol `S`, the Duhamel operator
//! `U`, and the zeroth iterate of the fixed-point scheme.

pub mod apply;
pub mod symbol;
pub mod zeroth;

pub use apply::{ApplyOptions, EnvelopeCheck, Parametrix, RhoModel, SourceSample, UValue};
pub use symbol::{BoundReport, BoundSample, SymbolRow, SymbolS};
pub use zeroth::{residual_slice, residual_source, zeroth_iterate, ZerothIterate, ZerothOptions};
