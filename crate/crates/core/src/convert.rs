//! Resource convertibility (populated below).
