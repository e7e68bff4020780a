#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "gls/extended.hpp"
#include "gls/interval.hpp"

namespace gls {

enum class LayerStatus { interior, boundary, empty_layer };

constexpr const char* to_string(LayerStatus s) noexcept {
  switch (s) {
    case LayerStatus::interior: return "interior";
    case LayerStatus::boundary: return "boundary";
    case LayerStatus::empty_layer: return "empty-layer";
  }
  return "unknown";
}

/// Result of minimizing the bound over one layer {q in D : Theta(q) = p}.
struct LayerSolution {
  double p = 1.0;
  ExtendedReal kappa = ExtendedReal::infinity();
  std::vector<double> argmin_q;
  LayerStatus status = LayerStatus::empty_layer;
};

/// Something that produces kappa(p) by an inner minimization. Results are
/// memoized per exponent; the cache is guarded so one source can be shared
/// by concurrent evaluations.
class KappaSource {
 public:
  virtual ~KappaSource() = default;

  [[nodiscard]] LayerSolution solve(double p) const {
    {
      std::lock_guard lock(mutex_);
      if (auto it = cache_.find(p); it != cache_.end()) return it->second;
    }
    LayerSolution s = compute(p);
    std::lock_guard lock(mutex_);
    if (cache_.size() >= kMaxCache) cache_.clear();
    cache_.emplace(p, s);
    return s;
  }

  [[nodiscard]] virtual PInterval domain() const = 0;
  [[nodiscard]] virtual std::string describe() const = 0;

 protected:
  [[nodiscard]] virtual LayerSolution compute(double p) const = 0;

 private:
  static constexpr std::size_t kMaxCache = 1 << 16;
  mutable std::mutex mutex_;
  mutable std::map<double, LayerSolution> cache_;
};

}  // namespace gls
