#include "volterra/kernels.hpp"

#include <cmath>

namespace volterra {

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::SumPolynomial: return "sum";
    case KernelFamily::InhomogeneousPolynomial: return "inhomogeneous";
    case KernelFamily::Exponential: return "exponential";
    case KernelFamily::Gaussian: return "gaussian";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "sum") return KernelFamily::SumPolynomial;
  if (name == "inhomogeneous") return KernelFamily::InhomogeneousPolynomial;
  if (name == "exponential") return KernelFamily::Exponential;
  if (name == "gaussian") return KernelFamily::Gaussian;
  throw Error(ErrorKind::InvalidArgument, "unknown kernel family '" + std::string(name) + "'");
}

void KernelSpec::validate() const {
  if (is_polynomial() && order < 0) {
    throw Error(ErrorKind::InvalidArgument, "polynomial kernel order must be >= 0");
  }
  if (family == KernelFamily::Gaussian && !(sigma > 0.0 && std::isfinite(sigma))) {
    throw Error(ErrorKind::InvalidArgument, "gaussian kernel width must be positive");
  }
}

std::int64_t feature_dimension(int memory, int order) {
  if (memory < 1) throw Error(ErrorKind::InvalidMemory, "memory must be >= 1");
  if (order < 0) throw Error(ErrorKind::InvalidArgument, "order must be >= 0");
  std::int64_t block = 1;
  std::int64_t total = 1;
  for (int n = 1; n <= order; ++n) {
    if (block > kMaxMonomialBlock / memory) {
      throw Error(ErrorKind::FeatureSpaceTooLarge,
                  std::to_string(memory) + "^" + std::to_string(order) + " ordered monomials");
    }
    block *= memory;
    total += block;
  }
  return total;
}

}  // namespace volterra
