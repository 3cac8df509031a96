//
// Copyright 2026 The BVFL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "bvfl/metrics/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bvfl/common/error.h"

namespace bvfl {
namespace {

void CheckLengths(std::size_t n, std::span<const double> times,
                  std::span<const int> events) {
  if (times.size() != n || events.size() != n) {
    throw DimensionError("metric inputs differ in length");
  }
  if (n == 0) throw PreconditionError("metric inputs are empty");
}

// Counts over integer ranks.
class Fenwick {
 public:
  explicit Fenwick(std::size_t n) : tree_(n + 1, 0) {}
  void Add(std::size_t i) {
    for (++i; i < tree_.size(); i += i & (~i + 1)) ++tree_[i];
  }
  // Number of inserted ranks < i.
  std::int64_t Below(std::size_t i) const {
    std::int64_t s = 0;
    for (; i > 0; i -= i & (~i + 1)) s += tree_[i];
    return s;
  }

 private:
  std::vector<std::int64_t> tree_;
};

std::vector<std::size_t> DenseRanks(std::span<const double> v) {
  std::vector<double> sorted(v.begin(), v.end());
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<std::size_t> r(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    r[i] = std::lower_bound(sorted.begin(), sorted.end(), v[i]) - sorted.begin();
  }
  return r;
}

double Ratio(std::int64_t concordant, std::int64_t ties,
             std::int64_t comparable) {
  if (comparable == 0) {
    throw UndefinedMetricError("no comparable pairs");
  }
  return (static_cast<double>(concordant) + 0.5 * static_cast<double>(ties)) /
         static_cast<double>(comparable);
}

double ClipProb(double s) { return std::clamp(s, 1e-7, 1.0 - 1e-7); }

// Integrates pointwise IPCW scores over the interior grid.
template <typename Term>
IpcwScore IntegrateIpcw(const Tensor& survival, std::span<const double> times,
                        std::span<const int> events, const TimeGrid& grid,
                        Term term) {
  CheckLengths(survival.rows(), times, events);
  if (survival.ndim() != 2 || survival.cols() != grid.intervals()) {
    throw DimensionError("survival matrix does not match the grid");
  }
  std::vector<int> flipped(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) flipped[i] = events[i] ? 0 : 1;
  const StepFunction g = KaplanMeier(times, flipped);
  const std::span<const double> pts = grid.interior();
  const std::size_t n = survival.rows();
  IpcwScore out;
  std::vector<double> vals(pts.size());
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const double t = pts[k];
    const double g_t = g(t);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      // Interior point k is cut k, so the curve value there is column k.
      const double s = survival.at(i, k);
      if (times[i] <= t && events[i]) {
        const double w = g.LeftLimit(times[i]);
        if (w <= 0.0) { ++out.dropped; continue; }
        acc += term(s, true) / w;
      } else if (times[i] > t) {
        if (g_t <= 0.0) { ++out.dropped; continue; }
        acc += term(s, false) / g_t;
      }
    }
    vals[k] = acc / static_cast<double>(n);
  }
  if (pts.empty()) {
    throw PreconditionError("integrated scores need at least two intervals");
  }
  if (pts.size() == 1) {
    out.value = vals[0];
    return out;
  }
  double area = 0.0;
  for (std::size_t k = 1; k < pts.size(); ++k) {
    area += 0.5 * (vals[k] + vals[k - 1]) * (pts[k] - pts[k - 1]);
  }
  out.value = area / (pts.back() - pts.front());
  return out;
}

}  // namespace

StepFunction::StepFunction(double initial, std::vector<double> knots,
                           std::vector<double> values)
    : initial_(initial), knots_(std::move(knots)), values_(std::move(values)) {
  if (knots_.size() != values_.size()) {
    throw DimensionError("step function knots and values differ in length");
  }
  if (!std::is_sorted(knots_.begin(), knots_.end())) {
    throw PreconditionError("step function knots must be sorted");
  }
}

double StepFunction::operator()(double t) const {
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

double StepFunction::LeftLimit(double t) const {
  const auto it = std::lower_bound(knots_.begin(), knots_.end(), t);
  if (it == knots_.begin()) return initial_;
  return values_[static_cast<std::size_t>(it - knots_.begin()) - 1];
}

StepFunction KaplanMeier(std::span<const double> times,
                         std::span<const int> events) {
  CheckLengths(times.size(), times, events);
  std::vector<std::size_t> order(times.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
  for (double t : times) {
    if (!(t >= 0)) throw PreconditionError("negative time in Kaplan-Meier");
  }
  std::vector<double> knots, values;
  double s = 1.0;
  std::size_t at_risk = times.size();
  for (std::size_t k = 0; k < order.size();) {
    const double t = times[order[k]];
    std::size_t d = 0, m = 0;
    while (k < order.size() && times[order[k]] == t) {
      d += events[order[k]] ? 1 : 0;
      ++m;
      ++k;
    }
    if (d > 0) {
      s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
      knots.push_back(t);
      values.push_back(s);
    }
    at_risk -= m;
  }
  return StepFunction(1.0, std::move(knots), std::move(values));
}

StepFunction CurveFromMatrix(const Tensor& survival, std::size_t row,
                             const TimeGrid& grid) {
  const auto r = survival.row(row);
  return StepFunction(1.0, grid.cuts(), std::vector<double>(r.begin(), r.end()));
}

std::vector<double> RiskScores(const Tensor& survival) {
  std::vector<double> out(survival.rows());
  for (std::size_t i = 0; i < survival.rows(); ++i) {
    double sum = 0.0;
    for (double v : survival.row(i)) sum += v;
    out[i] = 1.0 - sum / static_cast<double>(survival.cols());
  }
  return out;
}

double Concordance(std::span<const double> risks, std::span<const double> times,
                   std::span<const int> events) {
  CheckLengths(risks.size(), times, events);
  const std::size_t n = risks.size();
  const std::vector<std::size_t> rank = DenseRanks(risks);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return times[a] > times[b]; });
  Fenwick tree(n);
  std::int64_t concordant = 0, ties = 0, comparable = 0, inserted = 0;
  for (std::size_t k = 0; k < n;) {
    std::size_t end = k;
    while (end < n && times[order[end]] == times[order[k]]) ++end;
    // Everything inserted so far has a strictly later time.
    for (std::size_t q = k; q < end; ++q) {
      const std::size_t i = order[q];
      if (!events[i]) continue;
      const std::int64_t below = tree.Below(rank[i]);
      const std::int64_t equal = tree.Below(rank[i] + 1) - below;
      concordant += below;
      ties += equal;
      comparable += inserted;
    }
    for (std::size_t q = k; q < end; ++q) {
      tree.Add(rank[order[q]]);
      ++inserted;
    }
    k = end;
  }
  return Ratio(concordant, ties, comparable);
}

double TdConcordance(const Tensor& survival, std::span<const double> times,
                     std::span<const int> events, const TimeGrid& grid) {
  CheckLengths(survival.rows(), times, events);
  if (survival.cols() != grid.intervals()) {
    throw DimensionError("survival matrix does not match the grid");
  }
  const std::size_t n = survival.rows();
  // Column of the curve at time t, or npos before the first cut.
  const auto& cuts = grid.cuts();
  auto column = [&](double t) -> std::ptrdiff_t {
    return (std::upper_bound(cuts.begin(), cuts.end(), t) - cuts.begin()) - 1;
  };
  auto value = [&](std::size_t i, std::ptrdiff_t c) {
    return c < 0 ? 1.0 : survival.at(i, static_cast<std::size_t>(c));
  };
  std::vector<std::size_t> by_time(n);
  std::iota(by_time.begin(), by_time.end(), 0);
  std::sort(by_time.begin(), by_time.end(),
            [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });

  std::int64_t concordant = 0, ties = 0, comparable = 0;
  std::vector<double> later;
  for (std::size_t k = 0; k < n;) {
    std::size_t end = k;
    while (end < n && times[by_time[end]] == times[by_time[k]]) ++end;
    bool any_event = false;
    for (std::size_t q = k; q < end; ++q) any_event |= events[by_time[q]] != 0;
    if (any_event && end < n) {
      const std::ptrdiff_t c = column(times[by_time[k]]);
      later.clear();
      for (std::size_t q = end; q < n; ++q) later.push_back(value(by_time[q], c));
      std::sort(later.begin(), later.end());
      for (std::size_t q = k; q < end; ++q) {
        const std::size_t i = by_time[q];
        if (!events[i]) continue;
        const double si = value(i, c);
        const auto lo = std::lower_bound(later.begin(), later.end(), si);
        const auto hi = std::upper_bound(lo, later.end(), si);
        concordant += later.end() - hi;
        ties += hi - lo;
        comparable += static_cast<std::int64_t>(later.size());
      }
    }
    k = end;
  }
  return Ratio(concordant, ties, comparable);
}

IpcwScore BrierAt(const Tensor& survival, std::span<const double> times,
                  std::span<const int> events, const TimeGrid& grid,
                  const StepFunction& censoring, double t) {
  CheckLengths(survival.rows(), times, events);
  const auto& cuts = grid.cuts();
  const std::ptrdiff_t c =
      (std::upper_bound(cuts.begin(), cuts.end(), t) - cuts.begin()) - 1;
  IpcwScore out;
  double acc = 0.0;
  const double g_t = censoring(t);
  for (std::size_t i = 0; i < survival.rows(); ++i) {
    const double s = c < 0 ? 1.0 : survival.at(i, static_cast<std::size_t>(c));
    if (times[i] <= t && events[i]) {
      const double w = censoring.LeftLimit(times[i]);
      if (w <= 0.0) { ++out.dropped; continue; }
      acc += s * s / w;
    } else if (times[i] > t) {
      if (g_t <= 0.0) { ++out.dropped; continue; }
      acc += (1.0 - s) * (1.0 - s) / g_t;
    }
  }
  out.value = acc / static_cast<double>(survival.rows());
  return out;
}

IpcwScore IntegratedBrier(const Tensor& survival, std::span<const double> times,
                          std::span<const int> events, const TimeGrid& grid) {
  return IntegrateIpcw(survival, times, events, grid,
                       [](double s, bool failed) {
                         return failed ? s * s : (1.0 - s) * (1.0 - s);
                       });
}

IpcwScore Inbll(const Tensor& survival, std::span<const double> times,
                std::span<const int> events, const TimeGrid& grid) {
  IpcwScore out = IntegrateIpcw(
      survival, times, events, grid, [](double s, bool failed) {
        const double c = ClipProb(s);
        return failed ? std::log1p(-c) : std::log(c);
      });
  out.value = -out.value;
  return out;
}

std::string MetricsReport::ToText() const {
  std::ostringstream os;
  os.precision(17);
  os << "cindex=" << cindex << "\n"
     << "td_cindex=" << td_cindex << "\n"
     << "ibs=" << ibs << "\n"
     << "inbll=" << inbll << "\n"
     << "ipcw_dropped=" << ipcw_dropped << "\n";
  return os.str();
}

MetricsReport EvaluateSurvival(const Tensor& survival,
                               std::span<const double> times,
                               std::span<const int> events,
                               const TimeGrid& grid) {
  MetricsReport r;
  const std::vector<double> risks = RiskScores(survival);
  r.cindex = Concordance(risks, times, events);
  r.td_cindex = TdConcordance(survival, times, events, grid);
  const IpcwScore ibs = IntegratedBrier(survival, times, events, grid);
  const IpcwScore nbll = Inbll(survival, times, events, grid);
  r.ibs = ibs.value;
  r.inbll = nbll.value;
  r.ipcw_dropped = ibs.dropped;
  return r;
}

}  // namespace bvfl
