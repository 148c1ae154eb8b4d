#pragma once

#include <cstddef>
#include <map>
#include <string_view>
#include <vector>

namespace lowsync {

enum class ReductionKind { mdot, norm, fused_mdot_norm, dot };

std::string_view to_string(ReductionKind kind);

struct ReductionEvent {
  std::size_t iteration;
  ReductionKind kind;
  std::size_t scalar_count;
  /// Issued while the SpMV output for a later basis column already exists,
  /// so a non-blocking reduction could hide behind it.
  bool overlap_eligible = false;
};

/// Append-only log of global-reduction events.
///
/// Every reduction-shaped kernel appends exactly one event, regardless of how
/// many scalars it sums. This is the stand-in for counting MPI_Allreduce calls.
class ReductionLedger {
public:
  void set_iteration(std::size_t iteration) { iteration_ = iteration; }
  std::size_t iteration() const { return iteration_; }

  /// Events recorded while this is set are tagged overlap-eligible.
  void set_overlap_window(bool open) { overlap_window_ = open; }

  void record(ReductionKind kind, std::size_t scalar_count) {
    events_.push_back({iteration_, kind, scalar_count, overlap_window_});
  }

  const std::vector<ReductionEvent> &events() const { return events_; }
  std::size_t size() const { return events_.size(); }

  std::size_t count_in_iteration(std::size_t iteration) const;
  std::size_t count_of_kind(ReductionKind kind) const;
  std::map<std::size_t, std::size_t> per_iteration() const;
  double overlap_fraction(std::size_t first_iteration = 0) const;

private:
  std::size_t iteration_ = 0;
  bool overlap_window_ = false;
  std::vector<ReductionEvent> events_;
};

} // namespace lowsync
