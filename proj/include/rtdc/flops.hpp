#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <string_view>

namespace rtdc {

/// Coarse solver phases that floating-point work is attributed to.
enum class Phase : std::size_t { subproblems = 0, deflate, secular, vectors, other };

inline constexpr std::size_t kPhaseCount = 5;

std::string_view phase_name(Phase p);

struct FlopTally {
  std::uint64_t adds = 0;
  std::uint64_t muls = 0;
  std::uint64_t divs = 0;
  std::uint64_t sqrts = 0;

  std::uint64_t total() const noexcept { return adds + muls + divs + sqrts; }
  FlopTally& operator+=(const FlopTally& o) noexcept {
    adds += o.adds;
    muls += o.muls;
    divs += o.divs;
    sqrts += o.sqrts;
    return *this;
  }
  friend bool operator==(const FlopTally&, const FlopTally&) = default;
};

/// Per-phase operation counts. Kernels report their work in bulk through
/// flops::count while a counter is active on the calling thread; counts are
/// integers so totals do not depend on thread scheduling.
class FlopCounter {
 public:
  FlopCounter() = default;
  FlopCounter(const FlopCounter&) = delete;
  FlopCounter& operator=(const FlopCounter&) = delete;

  void add(Phase p, const FlopTally& t) noexcept;
  FlopTally phase(Phase p) const noexcept;
  /// subproblems + deflate + secular: the work needed for eigenvalues alone.
  std::uint64_t eigenvalue_flops() const noexcept;
  std::uint64_t total_flops() const noexcept;

 private:
  struct Slot {
    std::atomic<std::uint64_t> adds{0}, muls{0}, divs{0}, sqrts{0};
  };
  std::array<Slot, kPhaseCount> slots_;
};

namespace flops {

/// Attributes `t` to the active counter and phase of this thread, if any.
void count(const FlopTally& t) noexcept;

FlopCounter* active_counter() noexcept;
Phase current_phase() noexcept;

/// Installs a counter on the current thread for the lifetime of the scope.
class CounterScope {
 public:
  explicit CounterScope(FlopCounter* counter) noexcept;
  ~CounterScope();
  CounterScope(const CounterScope&) = delete;
  CounterScope& operator=(const CounterScope&) = delete;

 private:
  FlopCounter* previous_;
};

/// Sets the phase for the lifetime of the scope. A pinned phase cannot be
/// overridden by nested scopes, so work done by a helper algorithm is charged
/// to the caller's phase.
class PhaseScope {
 public:
  explicit PhaseScope(Phase p, bool pin = false) noexcept;
  ~PhaseScope();
  PhaseScope(const PhaseScope&) = delete;
  PhaseScope& operator=(const PhaseScope&) = delete;

 private:
  Phase previous_;
  bool previous_pinned_;
};

/// Captures the calling thread's counter and phase so work launched on
/// another thread is charged the same way.
struct Context {
  FlopCounter* counter = nullptr;
  Phase phase = Phase::other;
  bool pinned = false;

  static Context capture() noexcept;
};

class ContextScope {
 public:
  explicit ContextScope(const Context& ctx) noexcept;
  ~ContextScope();
  ContextScope(const ContextScope&) = delete;
  ContextScope& operator=(const ContextScope&) = delete;

 private:
  Context previous_;
};

}  // namespace flops
}  // namespace rtdc
