#include "silab/rng.hpp"

namespace silab {

static_assert(derive_replica_seed(1, 0) != derive_replica_seed(1, 1));
static_assert(mix64(0) == 0xe220a8397b1dcdafULL);

}  // namespace silab
