namespace conic_bnb {}
