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

#ifndef BVFL_DATA_DATASET_H_
#define BVFL_DATA_DATASET_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bvfl/autodiff/tensor.h"
#include "bvfl/model/model.h"

namespace bvfl {

enum class Split { kTrain, kVal, kTest };
const char* SplitName(Split s);
Split ParseSplit(const std::string& s);

// One modality's features aligned to the cohort order.
struct ModalityData {
  ModalitySpec spec;
  Tensor features;            // N x width; zero rows where absent
  std::vector<bool> present;  // row present in the modality file
};

struct Dataset {
  std::vector<std::string> ids;
  std::vector<double> times;
  std::vector<int> events;
  std::vector<Split> splits;
  std::vector<ModalityData> modalities;

  std::size_t size() const { return ids.size(); }
  std::vector<std::size_t> Indices(Split s) const;
  // Rows of modality k.
  Tensor Rows(std::size_t k, std::span<const std::size_t> rows) const;
  std::vector<double> Times(std::span<const std::size_t> rows) const;
  std::vector<int> Events(std::span<const std::size_t> rows) const;
  // Index of modality `name`, or throws DataError.
  std::size_t ModalityIndex(const std::string& name) const;
  // Copy keeping only the named modalities, in the given order.
  Dataset Select(std::span<const std::string> names) const;
  // Copy keeping only the given subjects (rows), in the given order.
  Dataset Subset(std::span<const std::size_t> rows) const;
};

// Stable 64-bit subject identifier used on the wire.
std::uint64_t SubjectKey(const std::string& id);

struct GeneratedModality {
  std::string name;
  ModalityKind kind = ModalityKind::kDense;
  std::size_t width = 64;                   // dense only
  std::vector<std::size_t> vocab;           // clinical only
  std::size_t continuous = 1;               // clinical only
  double signal = 1.0;                      // weight of this modality's risk
  double missing = 0.0;                     // probability a row is absent
  double cell_missing = 0.0;                // probability a cell is blank
  double noise = 0.5;                       // feature noise std
};

struct CohortSpec {
  std::size_t subjects = 2000;
  std::vector<GeneratedModality> modalities;
  std::size_t latent_per_modality = 4;
  double weibull_shape = 1.5;
  double weibull_scale = 1000.0;  // days
  // Standard deviation of the log-risk contributed by a unit-signal modality.
  double risk_scale = 1.0;
  double censoring = 0.3;
  double train_fraction = 0.8;
  double val_fraction = 0.1;
  std::uint64_t seed = 1;

  void Validate() const;
};

// Clinical (9 categorical + 1 continuous), "mirna" and "dnam" dense blocks.
// `reduced` picks the 64/128 test widths instead of 1881/3774.
CohortSpec DefaultCohortSpec(bool reduced = true);

Dataset GenerateCohort(const CohortSpec& spec);

// labels.csv plus <modality>.csv per modality, and modalities.txt listing
// names and kinds.
void WriteDataset(const Dataset& data, const std::string& dir);

struct LoadOptions {
  // Nonzero: keep only the k highest-variance columns of dense modalities.
  std::size_t top_variance = 0;
  // Empty: every modality listed in modalities.txt.
  std::vector<std::string> modalities;
};
Dataset LoadDataset(const std::string& dir, const LoadOptions& options = {});

enum class ColumnKind { kCategorical, kContinuous };
// Fills NaN cells: categorical columns with the mode (smallest value on a
// tie), continuous columns with the median.
void Impute(Tensor& matrix, std::span<const ColumnKind> kinds);

// Indices of the k columns with the largest variance, in column order.
std::vector<std::size_t> TopVarianceColumns(const Tensor& matrix,
                                            std::size_t k);

}  // namespace bvfl

#endif  // BVFL_DATA_DATASET_H_
