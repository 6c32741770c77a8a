//! Free-set membership oracles (populated below).
