//! Karoubi envelope and decoherence-labeled theory (populated below).
