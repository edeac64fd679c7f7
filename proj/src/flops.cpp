#include "rtdc/flops.hpp"

namespace rtdc {

std::string_view phase_name(Phase p) {
  switch (p) {
    case Phase::subproblems: return "subproblems";
    case Phase::deflate: return "deflate";
    case Phase::secular: return "secular";
    case Phase::vectors: return "vectors";
    case Phase::other: return "other";
  }
  return "unknown";
}

void FlopCounter::add(Phase p, const FlopTally& t) noexcept {
  auto& s = slots_[static_cast<std::size_t>(p)];
  s.adds.fetch_add(t.adds, std::memory_order_relaxed);
  s.muls.fetch_add(t.muls, std::memory_order_relaxed);
  s.divs.fetch_add(t.divs, std::memory_order_relaxed);
  s.sqrts.fetch_add(t.sqrts, std::memory_order_relaxed);
}

FlopTally FlopCounter::phase(Phase p) const noexcept {
  const auto& s = slots_[static_cast<std::size_t>(p)];
  return {s.adds.load(std::memory_order_relaxed), s.muls.load(std::memory_order_relaxed),
          s.divs.load(std::memory_order_relaxed), s.sqrts.load(std::memory_order_relaxed)};
}

std::uint64_t FlopCounter::eigenvalue_flops() const noexcept {
  return phase(Phase::subproblems).total() + phase(Phase::deflate).total() +
         phase(Phase::secular).total();
}

std::uint64_t FlopCounter::total_flops() const noexcept {
  std::uint64_t t = 0;
  for (std::size_t p = 0; p < kPhaseCount; ++p) t += phase(static_cast<Phase>(p)).total();
  return t;
}

namespace flops {
namespace {
thread_local FlopCounter* tl_counter = nullptr;
thread_local Phase tl_phase = Phase::other;
thread_local bool tl_pinned = false;
}  // namespace

void count(const FlopTally& t) noexcept {
  if (tl_counter != nullptr) tl_counter->add(tl_phase, t);
}

FlopCounter* active_counter() noexcept { return tl_counter; }
Phase current_phase() noexcept { return tl_phase; }

CounterScope::CounterScope(FlopCounter* counter) noexcept : previous_(tl_counter) {
  tl_counter = counter;
}
CounterScope::~CounterScope() { tl_counter = previous_; }

PhaseScope::PhaseScope(Phase p, bool pin) noexcept
    : previous_(tl_phase), previous_pinned_(tl_pinned) {
  if (!tl_pinned) {
    tl_phase = p;
    tl_pinned = pin;
  }
}
PhaseScope::~PhaseScope() {
  tl_phase = previous_;
  tl_pinned = previous_pinned_;
}

Context Context::capture() noexcept { return {tl_counter, tl_phase, tl_pinned}; }

ContextScope::ContextScope(const Context& ctx) noexcept : previous_(Context::capture()) {
  tl_counter = ctx.counter;
  tl_phase = ctx.phase;
  tl_pinned = ctx.pinned;
}
ContextScope::~ContextScope() {
  tl_counter = previous_.counter;
  tl_phase = previous_.phase;
  tl_pinned = previous_.pinned;
}

}  // namespace flops
}  // namespace rtdc
