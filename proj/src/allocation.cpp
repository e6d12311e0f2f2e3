#include "cglo/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cglo {

int BudgetState::min_reps(std::size_t n_points) const {
  // Guard against 0.1 * 30 = 3.0000000000000004 rounding up to 4.
  return static_cast<int>(std::ceil(kappa_coef * static_cast<double>(n_points) - 1e-9));
}

std::vector<int> largest_remainder(const std::vector<double>& shares, long long total) {
  std::vector<int> out(shares.size(), 0);
  if (shares.empty() || total <= 0) return out;
  const double sum = std::accumulate(shares.begin(), shares.end(), 0.0);
  std::vector<double> rem(shares.size(), 0.0);
  long long assigned = 0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double exact = sum > 0.0 ? static_cast<double>(total) * shares[i] / sum
                                   : static_cast<double>(total) / static_cast<double>(shares.size());
    out[i] = static_cast<int>(std::floor(exact));
    rem[i] = exact - out[i];
    assigned += out[i];
  }
  std::vector<std::size_t> order(shares.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
  for (std::size_t j = 0; assigned < total; j = (j + 1) % order.size()) {
    ++out[order[j]];
    ++assigned;
  }
  return out;
}

std::vector<int> min_rep_topup(const Dataset& data, const BudgetState& bs) {
  const int target = bs.min_reps(data.size());
  std::vector<int> plan(data.size(), 0);
  long long need = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    plan[i] = std::max(0, target - data.points[i].reps);
    need += plan[i];
  }
  const long long budget = bs.remaining();
  if (need <= budget) return plan;
  std::vector<double> shares(plan.begin(), plan.end());
  return largest_remainder(shares, budget);
}

std::vector<double> ocba_shares(const std::vector<OcbaEntry>& entries) {
  if (entries.empty()) throw std::invalid_argument("ocba: no design points");
  const std::size_t n = entries.size();
  std::size_t b = 0;
  for (std::size_t i = 1; i < n; ++i) {
    const auto& e = entries[i];
    if (e.mean < entries[b].mean || (e.mean == entries[b].mean && e.id < entries[b].id)) b = i;
  }
  std::vector<double> w(n, 0.0);
  if (n == 1) {
    w[0] = 1.0;
    return w;
  }
  double tail = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == b) continue;
    const double sd = std::max(entries[i].sd, kOcbaFloor);
    const double delta = std::max(entries[i].mean - entries[b].mean, kOcbaFloor);
    w[i] = (sd / delta) * (sd / delta);
    tail += (w[i] / sd) * (w[i] / sd);
  }
  w[b] = std::max(entries[b].sd, kOcbaFloor) * std::sqrt(tail);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& v : w) v /= total;
  return w;
}

std::vector<int> ocba_allocate(const std::vector<OcbaEntry>& entries, int b2) {
  if (b2 <= 0) throw std::invalid_argument("ocba_allocate: budget must be positive");
  return largest_remainder(ocba_shares(entries), b2);
}

long long apply_plan(const StochasticObjective& objective, Dataset& data, const std::vector<int>& plan) {
  if (plan.size() != data.size()) throw std::invalid_argument("apply_plan: plan size mismatch");
  long long used = 0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan[i] <= 0) continue;
    auto& p = data.points[i];
    const auto r = objective.evaluate(p.x, plan[i], p.reps);
    p.merge(r.count, r.sample_mean, r.sample_var);
    used += r.count;
  }
  return used;
}

}  // namespace cglo
