#pragma once

#include "conic_bnb/types.hpp"

namespace conic_bnb {

/// Which dual sign convention an iterate carries.
///
/// Splitting (operator-splitting method, OSM): stationarity reads
///   Px + q + G'z - A'y + y_b = 0  with y in the polar cone K°.
/// Interior point (IPM): stationarity reads
///   Px + q + G'z + A'y + y_plus - y_minus = 0  with y in the dual cone K*
/// and y_plus, y_minus >= 0. Mapping y -> -y carries one into the other, and
/// y_b = y_plus - y_minus.
enum class Convention { OSM, IPM };

struct DualIterate {
  Convention convention = Convention::IPM;
  int iter = 0;
  Vec x;       // n primal
  Vec s;       // m cone slack
  Vec y;       // m cone multiplier (K° for OSM, K* for IPM)
  Vec y_b;     // n box multiplier, = y_plus - y_minus
  Vec y_plus;  // n
  Vec y_minus; // n
  Vec z;       // p equality multiplier
};

} // namespace conic_bnb
