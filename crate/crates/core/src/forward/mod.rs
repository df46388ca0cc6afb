//! Parametric model of the two conformal frequency-diverse apertures.
//!
//! Each aperture is a semicircular guided-wave structure fed at its arc midpoint. The guided
//! wave travels away from the feed in both directions and is depleted as it passes each
//! Lorentzian element; every element re-radiates with its own embedded pattern, and the port
//! voltage is the superposition of all element contributions.

mod aperture;
mod element;
mod layout;

pub use aperture::{
    element_gain, guided_amplitude, guided_wavenumber, pattern_sweep, received_signal,
    ApertureConfig, ApertureGeometry, GainModel, PortId, SourceSpec,
};
pub use element::{
    lorentzian_response, radiated_fraction, transmission, FeedSide, MetaElement,
};
pub use layout::LayoutParams;
