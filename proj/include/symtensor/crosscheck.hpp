#pragma once

#include <cstdint>

#include "symtensor/jet.hpp"
#include "symtensor/report.hpp"
#include "symtensor/tensor.hpp"

namespace symt {

/// Compare symbolic Christoffel symbols and curvature of g against the
/// jet-oracle values at `npoints` random rational points (numerators and
/// denominators of height <= 100, poles rejected). All comparisons are exact.
/// Free symbols in the metric entries are sampled like extra coordinates.
/// The seed and the sampled points are recorded in the report notes.
Report jet_symbolic_crosscheck(const MetricField& g, std::size_t npoints, std::uint64_t seed,
                               const FunctionSamples& samples = {});

}  // namespace symt
