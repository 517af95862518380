#pragma once

// Empirical audit of the uniform W1 contraction of the one-step kernel.

#include <cstdint>
#include <vector>

#include "wasslearn/chain.hpp"
#include "wasslearn/rng.hpp"
#include "wasslearn/transport.hpp"

namespace wasslearn {

struct ContractionRow {
  double x1 = 0.0;
  double x2 = 0.0;
  double rho = 0.0;
  double w1 = 0.0;
  double ratio = 0.0;
};

struct ContractionAudit {
  double sup_ratio = 0.0;
  StatePoint worst_z1;
  StatePoint worst_z2;
  std::vector<ContractionRow> rows;
};

inline ContractionRow contraction_ratio(const ContractiveChain& chain, double x1, double x2) {
  const auto& f = chain.target();
  const StatePoint z1 = graph_point(x1, f);
  const StatePoint z2 = graph_point(x2, f);
  const double d = rho(z1, z2);
  if (d == 0.0) throw DomainError("contraction_ratio: degenerate pair z1 == z2");
  const double w = wasserstein1_exact(one_step_kernel(chain, z1), one_step_kernel(chain, z2)).distance;
  return {x1, x2, d, w, w / d};
}

/// sup over sampled pairs of W1(P(z1,.), P(z2,.)) / rho(z1, z2). Coincident
/// draws are resampled.
inline ContractionAudit contraction_audit(const ContractiveChain& chain, int pair_count,
                                          CounterRng& rng) {
  if (pair_count < 1) throw DomainError("contraction_audit: pair_count must be >= 1");
  ContractionAudit out;
  out.rows.reserve(static_cast<std::size_t>(pair_count));
  for (int p = 0; p < pair_count; ++p) {
    double x1 = rng.uniform();
    double x2 = rng.uniform();
    while (x1 == x2) x2 = rng.uniform();
    const auto row = contraction_ratio(chain, x1, x2);
    if (row.ratio > out.sup_ratio || out.rows.empty()) {
      out.sup_ratio = row.ratio;
      out.worst_z1 = graph_point(x1, chain.target());
      out.worst_z2 = graph_point(x2, chain.target());
    }
    out.rows.push_back(row);
  }
  return out;
}

}  // namespace wasslearn
