#include "lowsync/reduction_ledger.hpp"

namespace lowsync {

std::string_view to_string(ReductionKind kind) {
  switch (kind) {
  case ReductionKind::mdot: return "mdot";
  case ReductionKind::norm: return "norm";
  case ReductionKind::fused_mdot_norm: return "fused_mdot_norm";
  case ReductionKind::dot: return "dot";
  }
  return "unknown";
}

std::size_t ReductionLedger::count_in_iteration(std::size_t iteration) const {
  std::size_t count = 0;
  for (const auto &e : events_)
    if (e.iteration == iteration) ++count;
  return count;
}

std::size_t ReductionLedger::count_of_kind(ReductionKind kind) const {
  std::size_t count = 0;
  for (const auto &e : events_)
    if (e.kind == kind) ++count;
  return count;
}

std::map<std::size_t, std::size_t> ReductionLedger::per_iteration() const {
  std::map<std::size_t, std::size_t> counts;
  for (const auto &e : events_) ++counts[e.iteration];
  return counts;
}

double ReductionLedger::overlap_fraction(std::size_t first_iteration) const {
  std::size_t total = 0, eligible = 0;
  for (const auto &e : events_) {
    if (e.iteration < first_iteration) continue;
    ++total;
    if (e.overlap_eligible) ++eligible;
  }
  return total == 0 ? 0.0 : static_cast<double>(eligible) / static_cast<double>(total);
}

} // namespace lowsync
