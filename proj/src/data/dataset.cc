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

#include "bvfl/data/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include "bvfl/common/error.h"
#include "bvfl/common/rng.h"

namespace bvfl {
namespace {

namespace fs = std::filesystem;

std::string FormatDouble(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double ParseNumber(const std::string& s, const std::string& file,
                   std::size_t row, std::size_t col) {
  if (s.empty()) return NAN;
  double v = 0.0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw DataError(file + ": cannot parse '" + s + "' at row " +
                    std::to_string(row) + ", column " + std::to_string(col));
  }
  return v;
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

Table ReadCsv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty file");
  t.header = SplitLine(line);
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") continue;
    auto cells = SplitLine(line);
    if (cells.size() != t.header.size()) {
      throw DataError(path.string() + ": row " + std::to_string(row) + " has " +
                      std::to_string(cells.size()) + " columns, expected " +
                      std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

// Random loading matrix with unit-variance rows.
Tensor Loadings(std::size_t rows, std::size_t latent, CounterRng& rng) {
  Tensor a({rows, latent});
  const double s = 1.0 / std::sqrt(static_cast<double>(latent));
  for (double& v : a.mutable_data()) v = s * rng.Normal();
  return a;
}

double CensoredFraction(std::span<const double> event_times,
                        std::span<const double> exp_draws, double rate) {
  std::size_t censored = 0;
  for (std::size_t i = 0; i < event_times.size(); ++i) {
    if (exp_draws[i] / rate < event_times[i]) ++censored;
  }
  return static_cast<double>(censored) / static_cast<double>(event_times.size());
}

}  // namespace

const char* SplitName(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kVal: return "val";
    case Split::kTest: return "test";
  }
  return "?";
}

Split ParseSplit(const std::string& s) {
  if (s == "train") return Split::kTrain;
  if (s == "val") return Split::kVal;
  if (s == "test") return Split::kTest;
  throw DataError("unknown split '" + s + "'");
}

std::vector<std::size_t> Dataset::Indices(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < splits.size(); ++i) {
    if (splits[i] == s) out.push_back(i);
  }
  return out;
}

Tensor Dataset::Rows(std::size_t k, std::span<const std::size_t> rows) const {
  const Tensor& f = modalities.at(k).features;
  Tensor out({rows.size(), f.cols()});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = f.row(rows[r]);
    std::copy(src.begin(), src.end(), out.mutable_row(r).begin());
  }
  return out;
}

std::vector<double> Dataset::Times(std::span<const std::size_t> rows) const {
  std::vector<double> out;
  for (std::size_t r : rows) out.push_back(times[r]);
  return out;
}

std::vector<int> Dataset::Events(std::span<const std::size_t> rows) const {
  std::vector<int> out;
  for (std::size_t r : rows) out.push_back(events[r]);
  return out;
}

std::size_t Dataset::ModalityIndex(const std::string& name) const {
  for (std::size_t k = 0; k < modalities.size(); ++k) {
    if (modalities[k].spec.name == name) return k;
  }
  throw DataError("dataset has no modality '" + name + "'");
}

Dataset Dataset::Select(std::span<const std::string> names) const {
  Dataset out = *this;
  out.modalities.clear();
  for (const std::string& n : names) out.modalities.push_back(modalities[ModalityIndex(n)]);
  return out;
}

Dataset Dataset::Subset(std::span<const std::size_t> rows) const {
  Dataset out;
  for (std::size_t r : rows) {
    if (r >= size()) throw PreconditionError("subset row out of range");
    out.ids.push_back(ids[r]);
    out.times.push_back(times[r]);
    out.events.push_back(events[r]);
    out.splits.push_back(splits[r]);
  }
  for (std::size_t k = 0; k < modalities.size(); ++k) {
    ModalityData md;
    md.spec = modalities[k].spec;
    md.features = Rows(k, rows);
    for (std::size_t r : rows) md.present.push_back(modalities[k].present[r]);
    out.modalities.push_back(std::move(md));
  }
  return out;
}

std::uint64_t SubjectKey(const std::string& id) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

void CohortSpec::Validate() const {
  if (subjects < 3) throw PreconditionError("cohort needs at least 3 subjects");
  if (modalities.empty()) throw PreconditionError("cohort needs a modality");
  if (!(censoring >= 0 && censoring < 1)) {
    throw PreconditionError("censoring fraction must be in [0, 1)");
  }
  if (!(weibull_shape > 0 && weibull_scale > 0)) {
    throw PreconditionError("Weibull parameters must be positive");
  }
  if (!(train_fraction > 0 && val_fraction >= 0 &&
        train_fraction + val_fraction < 1)) {
    throw PreconditionError("invalid split fractions");
  }
  if (latent_per_modality == 0) throw PreconditionError("latent dimension is zero");
  for (const auto& m : modalities) {
    if (!(m.signal >= 0)) throw PreconditionError(m.name + ": negative signal");
    if (!(m.missing >= 0 && m.missing < 1)) {
      throw PreconditionError(m.name + ": missing probability out of range");
    }
    if (m.kind == ModalityKind::kDense && m.width == 0) {
      throw PreconditionError(m.name + ": zero width");
    }
    if (m.kind == ModalityKind::kClinical && m.vocab.empty() && m.continuous == 0) {
      throw PreconditionError(m.name + ": no clinical columns");
    }
    for (std::size_t v : m.vocab) {
      if (v < 2) throw PreconditionError(m.name + ": vocabulary below 2");
    }
  }
}

CohortSpec DefaultCohortSpec(bool reduced) {
  CohortSpec s;
  GeneratedModality clinical;
  clinical.name = "clinical";
  clinical.kind = ModalityKind::kClinical;
  clinical.vocab = {2, 3, 4, 5, 3, 2, 4, 3, 5};
  clinical.continuous = 1;
  clinical.cell_missing = 0.02;
  GeneratedModality mirna;
  mirna.name = "mirna";
  mirna.width = reduced ? 64 : 1881;
  GeneratedModality dnam;
  dnam.name = "dnam";
  dnam.width = reduced ? 128 : 3774;
  s.modalities = {clinical, mirna, dnam};
  return s;
}

Dataset GenerateCohort(const CohortSpec& spec) {
  spec.Validate();
  const std::size_t n = spec.subjects;
  const std::size_t m = spec.modalities.size();
  const std::size_t l = spec.latent_per_modality;
  CounterRng latent_rng(DeriveKey(spec.seed, "data-latent"));
  CounterRng param_rng(DeriveKey(spec.seed, "data-params"));
  CounterRng noise_rng(DeriveKey(spec.seed, "data-noise"));
  CounterRng time_rng(DeriveKey(spec.seed, "data-time"));
  CounterRng split_rng(DeriveKey(spec.seed, "data-split"));

  Tensor u({n, m * l});
  for (double& v : u.mutable_data()) v = latent_rng.Normal();

  // Log-risk: each modality contributes through its own latent block.
  std::vector<double> eta(n, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    std::vector<double> beta(l);
    double norm = 0.0;
    for (double& b : beta) { b = param_rng.Normal(); norm += b * b; }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < l; ++j) s += beta[j] / norm * u.at(i, k * l + j);
      eta[i] += spec.risk_scale * spec.modalities[k].signal * s;
    }
  }

  Dataset d;
  d.ids.resize(n);
  d.times.resize(n);
  d.events.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "P%06zu", i);
    d.ids[i] = buf;
  }
  std::vector<double> event_time(n), exp_draw(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::pow(-std::log(time_rng.Uniform()), 1.0 / spec.weibull_shape);
    event_time[i] = spec.weibull_scale * std::exp(-eta[i] / spec.weibull_shape) * w;
    exp_draw[i] = -std::log(time_rng.Uniform());
  }
  double rate = 0.0;
  if (spec.censoring > 0.0) {
    // Censored fraction increases with the censoring rate.
    double lo = -30.0, hi = 10.0;
    const double target = spec.censoring;
    if (CensoredFraction(event_time, exp_draw, std::exp(hi)) < target) {
      throw DataError("censoring target is unreachable");
    }
    for (int it = 0; it < 100; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (CensoredFraction(event_time, exp_draw, std::exp(mid)) < target) lo = mid;
      else hi = mid;
    }
    rate = std::exp(hi);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double c = rate > 0 ? exp_draw[i] / rate : INFINITY;
    d.events[i] = event_time[i] <= c ? 1 : 0;
    d.times[i] = std::max(std::min(event_time[i], c), 1e-3);
  }

  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(perm[i], perm[split_rng.UniformIndex(i + 1)]);
  }
  const std::size_t n_train = static_cast<std::size_t>(std::round(spec.train_fraction * n));
  const std::size_t n_val = static_cast<std::size_t>(std::round(spec.val_fraction * n));
  d.splits.assign(n, Split::kTest);
  for (std::size_t r = 0; r < n; ++r) {
    if (r < n_train) d.splits[perm[r]] = Split::kTrain;
    else if (r < n_train + n_val) d.splits[perm[r]] = Split::kVal;
  }

  for (std::size_t k = 0; k < m; ++k) {
    const GeneratedModality& g = spec.modalities[k];
    ModalityData md;
    md.spec.name = g.name;
    md.spec.kind = g.kind;
    if (g.kind == ModalityKind::kDense) {
      md.spec.width = g.width;
      md.spec.hidden_layers = 3;
    } else {
      md.spec.vocab = g.vocab;
      md.spec.width = g.vocab.size() + g.continuous;
    }
    const std::size_t w = md.spec.width;
    const Tensor a = Loadings(w, l, param_rng);
    md.features = Tensor::Zeros({n, w});
    md.present.assign(n, true);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < w; ++c) {
        double z = 0.0;
        for (std::size_t j = 0; j < l; ++j) z += a.at(c, j) * u.at(i, k * l + j);
        z += g.noise * noise_rng.Normal();
        if (c < g.vocab.size()) {
          // Thresholds evenly spaced over [-1, 1].
          const std::size_t v = g.vocab[c];
          std::size_t level = 0;
          for (std::size_t t = 1; t < v; ++t) {
            if (z > -1.0 + 2.0 * static_cast<double>(t) / static_cast<double>(v)) ++level;
          }
          z = static_cast<double>(level);
        }
        md.features.at(i, c) = z;
      }
      if (g.missing > 0 && noise_rng.Uniform() < g.missing) md.present[i] = false;
    }
    if (g.cell_missing > 0) {
      // Blank cells are imputed again on load; mark them with NaN here and
      // impute in memory so generated and loaded data agree.
      for (double& v : md.features.mutable_data()) {
        if (noise_rng.Uniform() < g.cell_missing) v = NAN;
      }
      std::vector<ColumnKind> kinds(w, ColumnKind::kContinuous);
      for (std::size_t c = 0; c < g.vocab.size(); ++c) kinds[c] = ColumnKind::kCategorical;
      Impute(md.features, kinds);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (!md.present[i]) {
        for (double& v : md.features.mutable_row(i)) v = 0.0;
      }
    }
    d.modalities.push_back(std::move(md));
  }
  return d;
}

void WriteDataset(const Dataset& data, const std::string& dir) {
  fs::create_directories(dir);
  {
    std::ofstream out(fs::path(dir) / "labels.csv");
    if (!out) throw DataError("cannot write " + dir + "/labels.csv");
    out << "patient_id,event,time,split\n";
    for (std::size_t i = 0; i < data.size(); ++i) {
      out << data.ids[i] << ',' << data.events[i] << ','
          << FormatDouble(data.times[i]) << ',' << SplitName(data.splits[i]) << '\n';
    }
  }
  std::ofstream list(fs::path(dir) / "modalities.txt");
  for (const ModalityData& md : data.modalities) {
    list << md.spec.name << '\n';
    std::ofstream out(fs::path(dir) / (md.spec.name + ".csv"));
    if (!out) throw DataError("cannot write modality " + md.spec.name);
    out << "patient_id";
    const std::size_t ncat = md.spec.categorical();
    for (std::size_t c = 0; c < md.spec.width; ++c) {
      if (md.spec.kind == ModalityKind::kClinical) {
        out << ',' << (c < ncat ? "cat_" + std::to_string(c)
                                : "num_" + std::to_string(c - ncat));
      } else {
        out << ",f" << c;
      }
    }
    out << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!md.present[i]) continue;
      out << data.ids[i];
      for (double v : md.features.row(i)) out << ',' << FormatDouble(v);
      out << '\n';
    }
  }
}

Dataset LoadDataset(const std::string& dir, const LoadOptions& options) {
  const fs::path root(dir);
  Dataset d;
  const Table labels = ReadCsv(root / "labels.csv");
  if (labels.header != std::vector<std::string>{"patient_id", "event", "time", "split"}) {
    throw DataError("labels.csv: header must be patient_id,event,time,split");
  }
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t r = 0; r < labels.rows.size(); ++r) {
    const auto& row = labels.rows[r];
    if (!index.emplace(row[0], r).second) {
      throw DataError("labels.csv: duplicate patient_id " + row[0]);
    }
    d.ids.push_back(row[0]);
    const double e = ParseNumber(row[1], "labels.csv", r + 2, 2);
    if (e != 0.0 && e != 1.0) {
      throw DataError("labels.csv: event must be 0 or 1 at row " + std::to_string(r + 2));
    }
    const double t = ParseNumber(row[2], "labels.csv", r + 2, 3);
    if (!(t > 0) || !std::isfinite(t)) {
      throw DataError("labels.csv: time must be positive at row " + std::to_string(r + 2));
    }
    d.events.push_back(static_cast<int>(e));
    d.times.push_back(t);
    d.splits.push_back(ParseSplit(row[3]));
  }

  std::vector<std::string> names = options.modalities;
  if (names.empty()) {
    std::ifstream list(root / "modalities.txt");
    std::string line;
    while (std::getline(list, line)) {
      if (!line.empty()) names.push_back(line);
    }
    if (names.empty()) {
      for (const auto& entry : fs::directory_iterator(root)) {
        const std::string stem = entry.path().stem().string();
        if (entry.path().extension() == ".csv" && stem != "labels") names.push_back(stem);
      }
      std::sort(names.begin(), names.end());
    }
  }

  for (const std::string& name : names) {
    const std::string file = name + ".csv";
    const Table t = ReadCsv(root / file);
    if (t.header.empty() || t.header[0] != "patient_id") {
      throw DataError(file + ": first column must be patient_id");
    }
    const std::size_t w = t.header.size() - 1;
    ModalityData md;
    md.spec.name = name;
    std::vector<ColumnKind> kinds(w, ColumnKind::kContinuous);
    std::size_t ncat = 0;
    for (std::size_t c = 0; c < w; ++c) {
      if (t.header[c + 1].rfind("cat_", 0) == 0) {
        if (ncat != c) throw DataError(file + ": categorical columns must lead");
        kinds[c] = ColumnKind::kCategorical;
        ++ncat;
      }
    }
    md.spec.kind = ncat > 0 ? ModalityKind::kClinical : ModalityKind::kDense;
    md.spec.width = w;
    Tensor raw = Tensor::Full({std::max<std::size_t>(t.rows.size(), 1), w}, NAN);
    std::vector<std::size_t> owner;
    std::vector<bool> seen(d.size(), false);
    std::size_t kept = 0;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
      const auto it = index.find(t.rows[r][0]);
      if (it == index.end()) continue;  // not in the labels cohort
      if (seen[it->second]) throw DataError(file + ": duplicate patient_id " + t.rows[r][0]);
      seen[it->second] = true;
      for (std::size_t c = 0; c < w; ++c) {
        raw.at(kept, c) = ParseNumber(t.rows[r][c + 1], file, r + 2, c + 2);
      }
      owner.push_back(it->second);
      ++kept;
    }
    Tensor present_rows({std::max<std::size_t>(kept, 1), w});
    std::copy_n(raw.data().begin(), kept * w, present_rows.mutable_data().begin());
    if (kept > 0) Impute(present_rows, kinds);
    for (std::size_t c = 0; c < ncat; ++c) {
      double mx = 0.0;
      for (std::size_t r = 0; r < kept; ++r) {
        const double v = present_rows.at(r, c);
        if (v < 0 || v != std::floor(v)) {
          throw DataError(file + ": categorical value must be a non-negative integer");
        }
        mx = std::max(mx, v);
      }
      md.spec.vocab.push_back(static_cast<std::size_t>(mx) + 1);
    }
    md.features = Tensor::Zeros({d.size(), w});
    md.present.assign(d.size(), false);
    for (std::size_t r = 0; r < kept; ++r) {
      md.present[owner[r]] = true;
      std::copy_n(present_rows.row(r).begin(), w, md.features.mutable_row(owner[r]).begin());
    }
    if (options.top_variance > 0 && md.spec.kind == ModalityKind::kDense &&
        options.top_variance < w) {
      const auto cols = TopVarianceColumns(present_rows, options.top_variance);
      Tensor f({d.size(), cols.size()});
      for (std::size_t i = 0; i < d.size(); ++i) {
        for (std::size_t c = 0; c < cols.size(); ++c) f.at(i, c) = md.features.at(i, cols[c]);
      }
      md.features = std::move(f);
      md.spec.width = cols.size();
    }
    d.modalities.push_back(std::move(md));
  }
  return d;
}

void Impute(Tensor& matrix, std::span<const ColumnKind> kinds) {
  if (matrix.ndim() != 2 || kinds.size() != matrix.cols()) {
    throw DimensionError("impute: one column kind per column required");
  }
  for (std::size_t c = 0; c < matrix.cols(); ++c) {
    std::vector<double> vals;
    bool missing = false;
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      const double v = matrix.at(r, c);
      if (std::isnan(v)) missing = true;
      else vals.push_back(v);
    }
    if (!missing) continue;
    if (vals.empty()) {
      throw DataError("impute: column " + std::to_string(c) + " has no values");
    }
    std::sort(vals.begin(), vals.end());
    double fill = 0.0;
    if (kinds[c] == ColumnKind::kCategorical) {
      std::size_t best = 0;
      for (std::size_t i = 0; i < vals.size();) {
        std::size_t j = i;
        while (j < vals.size() && vals[j] == vals[i]) ++j;
        // Strictly greater keeps the smallest value on ties.
        if (j - i > best) {
          best = j - i;
          fill = vals[i];
        }
        i = j;
      }
    } else {
      const std::size_t h = vals.size() / 2;
      fill = vals.size() % 2 ? vals[h] : 0.5 * (vals[h - 1] + vals[h]);
    }
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      if (std::isnan(matrix.at(r, c))) matrix.at(r, c) = fill;
    }
  }
}

std::vector<std::size_t> TopVarianceColumns(const Tensor& matrix,
                                            std::size_t k) {
  const std::size_t w = matrix.cols();
  std::vector<double> var(w, 0.0);
  for (std::size_t c = 0; c < w; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < matrix.rows(); ++r) mean += matrix.at(r, c);
    mean /= static_cast<double>(matrix.rows());
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
      const double d = matrix.at(r, c) - mean;
      var[c] += d * d;
    }
  }
  std::vector<std::size_t> order(w);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return var[a] > var[b]; });
  order.resize(std::min(k, w));
  std::sort(order.begin(), order.end());
  return order;
}

}  // namespace bvfl
