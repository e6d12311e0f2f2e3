#include "cglo/dataset.hpp"

#include <algorithm>

namespace cglo {

void DesignPoint::merge(int count, double batch_mean, double batch_var) {
  if (count <= 0) return;
  const double n_a = reps;
  const double n_b = count;
  const double n = n_a + n_b;
  const double m2_a = reps >= 2 ? sample_var * (n_a - 1.0) : 0.0;
  const double m2_b = count >= 2 ? batch_var * (n_b - 1.0) : 0.0;
  const double delta = batch_mean - sample_mean;
  const double mean = sample_mean + delta * n_b / n;
  const double m2 = m2_a + m2_b + delta * delta * n_a * n_b / n;
  reps += count;
  sample_mean = mean;
  sample_var = reps >= 2 ? m2 / (n - 1.0) : 0.0;
}

Matrix Dataset::x() const {
  Matrix out(to_index(points.size()), to_index(dim));
  for (std::size_t i = 0; i < points.size(); ++i) out.row(to_index(i)) = points[i].x.transpose();
  return out;
}

Vector Dataset::y() const {
  Vector out(to_index(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out[to_index(i)] = points[i].sample_mean;
  return out;
}

double Dataset::prior_noise_var() const {
  std::vector<double> v;
  for (const auto& p : points) {
    if (p.reps >= 2) v.push_back(p.sample_var);
  }
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  if (v.size() % 2 == 1) return *mid;
  const double upper = *mid;
  const double lower = *std::max_element(v.begin(), mid);
  return 0.5 * (lower + upper);
}

Vector Dataset::mean_noise_var() const {
  const double prior = prior_noise_var();
  Vector out(to_index(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    const double var = p.reps >= 2 ? p.sample_var : prior;
    out[to_index(i)] = var / std::max(1, p.reps);
  }
  return out;
}

std::vector<std::size_t> Dataset::members(RegionId k) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].region == k) out.push_back(i);
  }
  return out;
}

std::size_t Dataset::best_index() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < points.size(); ++i) {
    if (points[i].sample_mean < points[best].sample_mean) best = i;
  }
  return best;
}

long long Dataset::total_reps() const {
  long long s = 0;
  for (const auto& p : points) s += p.reps;
  return s;
}

}  // namespace cglo
