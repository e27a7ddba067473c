#include "antcsp/error.hpp"

namespace antcsp::budget {

namespace {
std::atomic<std::uint64_t> g_limit{0};
std::atomic<std::uint64_t> g_used{0};
}  // namespace

void set_limit(std::uint64_t limit) { g_limit.store(limit); }
std::uint64_t limit() { return g_limit.load(); }
std::uint64_t used() { return g_used.load(); }
void reset_usage() { g_used.store(0); }

void charge(std::uint64_t n) {
  std::uint64_t now = g_used.fetch_add(n, std::memory_order_relaxed) + n;
  std::uint64_t cap = g_limit.load(std::memory_order_relaxed);
  if (cap != 0 && now > cap)
    throw BudgetExceeded("budget exceeded: more than " + std::to_string(cap) +
                         " search nodes");
}

Scope::Scope(std::uint64_t limit)
    : saved_limit_(g_limit.load()), saved_used_(g_used.load()) {
  g_limit.store(limit);
  g_used.store(0);
}

Scope::~Scope() {
  g_limit.store(saved_limit_);
  g_used.store(saved_used_);
}

}  // namespace antcsp::budget
