#pragma once

#include "ripa/operator.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ripa {

enum class Property {
  ResolventEquation,
  FirmNonexpansive,
  Cocoercive,
  Lipschitz,
  GraphConsistency,
  ZeroSetInvariance,
  VariationBound,
};

const char* to_string(Property p);
const std::vector<Property>& all_properties();

/// Outcome of one randomized audit. `worst` is the largest excess over the
/// inequality in the units `tolerance` is expressed in; the audit passes when
/// worst <= tolerance.
struct PropertyResult {
  Property property = Property::ResolventEquation;
  std::size_t samples = 0;
  double worst = 0.0;
  double tolerance = 0.0;
  /// False when the property does not apply (graph consistency on a
  /// non-affine operator, zero-set checks without a known zero).
  bool applicable = true;
  bool passed() const { return !applicable || worst <= tolerance; }
};

/// Indices log-uniform in [1e-3, 1e3], points uniform in [-10, 10]^n.
///
///   ResolventEquation  J_{mu A_lambda}(x) via the view shortcut against the
///                      resolvent of A_lambda computed directly;  / (1 + ||x||)  <= 1e-10
///   FirmNonexpansive   ||dJ||^2 - <dJ, dx>                                        <= 1e-12
///   Cocoercive         lambda ||dA||^2 - <dA, dx>   / max(1, ||dx||^2 / lambda)   <= 1e-12
///   Lipschitz          lambda ||dA|| / ||dx|| - 1                                 <= 1e-12
///   GraphConsistency   ||A_lambda x - (M J x + q)|| / max(1, ||x|| / lambda)     <= 1e-12
///   ZeroSetInvariance  ||A_lambda(z)||                                            <= 1e-12
///   VariationBound     ||g A_g x - d A_d y|| - 2||x - y|| - 2||x - z|| |g - d| / g <= 1e-10
PropertyResult audit_property(const Operator& op, Property property, std::size_t samples,
                              std::uint64_t seed);

std::vector<PropertyResult> audit_operator(const Operator& op, std::size_t samples,
                                           std::uint64_t seed);

struct CatalogEntry {
  std::string name;
  Operator op;
};

/// Zero, identity, diag(1, 0), a random monotone affine map, the planar
/// rotation, the three prox rules and the 1-D saddle example; every entry has
/// a known zero.
std::vector<CatalogEntry> operator_catalog(std::uint64_t seed);

}  // namespace ripa
