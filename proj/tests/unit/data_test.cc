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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include <gtest/gtest.h>

#include "bvfl/common/error.h"
#include "bvfl/data/dataset.h"

namespace bvfl {
namespace {

namespace fs = std::filesystem;

fs::path TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("bvfl_data_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void WriteFile(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

CohortSpec SmallSpec() {
  CohortSpec s = DefaultCohortSpec(true);
  s.subjects = 300;
  s.modalities[1].width = 8;
  s.modalities[2].width = 12;
  s.modalities[2].missing = 0.2;
  return s;
}

TEST(CohortTest, ShapesAndSplits) {
  const Dataset d = GenerateCohort(SmallSpec());
  ASSERT_EQ(d.size(), 300u);
  ASSERT_EQ(d.modalities.size(), 3u);
  EXPECT_EQ(d.modalities[0].spec.kind, ModalityKind::kClinical);
  EXPECT_EQ(d.modalities[0].features.cols(), 10u);
  EXPECT_EQ(d.Indices(Split::kTrain).size(), 240u);
  EXPECT_EQ(d.Indices(Split::kVal).size(), 30u);
  EXPECT_EQ(d.Indices(Split::kTest).size(), 30u);
  for (double t : d.times) EXPECT_GT(t, 0.0);
}

TEST(CohortTest, CensoringFractionMatchesTarget) {
  CohortSpec s = SmallSpec();
  s.subjects = 2000;
  const Dataset d = GenerateCohort(s);
  double censored = 0;
  for (int e : d.events) censored += e == 0;
  EXPECT_NEAR(censored / 2000.0, 0.3, 0.002);
  s.censoring = 0.0;
  for (int e : GenerateCohort(s).events) EXPECT_EQ(e, 1);
}

TEST(CohortTest, DeterministicInSeed) {
  const Dataset a = GenerateCohort(SmallSpec());
  const Dataset b = GenerateCohort(SmallSpec());
  EXPECT_EQ(a.times, b.times);
  EXPECT_EQ(a.modalities[1].features, b.modalities[1].features);
  CohortSpec s = SmallSpec();
  s.seed = 2;
  EXPECT_NE(GenerateCohort(s).times, a.times);
}

TEST(CohortTest, MissingRowsAreZero) {
  const Dataset d = GenerateCohort(SmallSpec());
  const ModalityData& m = d.modalities[2];
  std::size_t absent = 0;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (m.present[i]) continue;
    ++absent;
    for (double v : m.features.row(i)) EXPECT_EQ(v, 0.0);
  }
  EXPECT_GT(absent, 30u);
  EXPECT_LT(absent, 90u);
}

TEST(CohortTest, CategoricalCodesInVocabulary) {
  const Dataset d = GenerateCohort(SmallSpec());
  const ModalityData& c = d.modalities[0];
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = 0; j < c.spec.vocab.size(); ++j) {
      const double v = c.features.at(i, j);
      EXPECT_EQ(v, std::floor(v));
      EXPECT_GE(v, 0.0);
      EXPECT_LT(v, static_cast<double>(c.spec.vocab[j]));
    }
  }
}

TEST(CohortTest, RejectsBadSpec) {
  CohortSpec s = SmallSpec();
  s.censoring = 1.0;
  EXPECT_THROW(GenerateCohort(s), PreconditionError);
  s = SmallSpec();
  s.modalities.clear();
  EXPECT_THROW(GenerateCohort(s), PreconditionError);
}

TEST(DatasetIoTest, RoundTripIsExact) {
  const fs::path dir = TempDir("roundtrip");
  const Dataset d = GenerateCohort(SmallSpec());
  WriteDataset(d, dir.string());
  const Dataset r = LoadDataset(dir.string());
  EXPECT_EQ(r.ids, d.ids);
  EXPECT_EQ(r.times, d.times);
  EXPECT_EQ(r.events, d.events);
  EXPECT_EQ(r.splits, d.splits);
  ASSERT_EQ(r.modalities.size(), d.modalities.size());
  for (std::size_t k = 0; k < d.modalities.size(); ++k) {
    EXPECT_EQ(r.modalities[k].spec.name, d.modalities[k].spec.name);
    EXPECT_EQ(r.modalities[k].spec.kind, d.modalities[k].spec.kind);
    EXPECT_EQ(r.modalities[k].present, d.modalities[k].present);
    EXPECT_EQ(r.modalities[k].features, d.modalities[k].features);
  }
}

TEST(DatasetIoTest, AlignsByIdAndImputes) {
  const fs::path dir = TempDir("align");
  WriteFile(dir / "labels.csv",
            "patient_id,event,time,split\na,1,10,train\nb,0,20,val\nc,1,5,test\n");
  WriteFile(dir / "clin.csv",
            "patient_id,cat_0,num_0\nc,2,7.5\nz,1,1\na,,2.5\nb,2,\n");
  WriteFile(dir / "omics.csv", "patient_id,f0,f1\nb,1,2\n");
  WriteFile(dir / "modalities.txt", "clin\nomics\n");
  const Dataset d = LoadDataset(dir.string());
  ASSERT_EQ(d.size(), 3u);
  const ModalityData& c = d.modalities[0];
  EXPECT_EQ(c.spec.kind, ModalityKind::kClinical);
  EXPECT_EQ(c.spec.vocab, std::vector<std::size_t>{3});
  EXPECT_EQ(c.features.at(0, 0), 2.0);  // mode of {2, 2}
  EXPECT_EQ(c.features.at(1, 1), 5.0);  // median of {7.5, 2.5}
  EXPECT_EQ(c.features.at(2, 1), 7.5);
  const ModalityData& o = d.modalities[1];
  EXPECT_EQ(o.present, (std::vector<bool>{false, true, false}));
  EXPECT_EQ(o.features.at(1, 1), 2.0);
  EXPECT_EQ(o.features.at(0, 0), 0.0);
}

TEST(DatasetIoTest, ReportsMalformedInput) {
  const fs::path dir = TempDir("bad");
  WriteFile(dir / "labels.csv", "patient_id,event,time,split\na,1,10,train\na,1,3,val\n");
  WriteFile(dir / "modalities.txt", "");
  EXPECT_THROW(LoadDataset(dir.string()), DataError);
  WriteFile(dir / "labels.csv", "patient_id,event,time,split\na,1,1x,train\n");
  try {
    LoadDataset(dir.string());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos);
  }
  WriteFile(dir / "labels.csv", "patient_id,event,time,split\na,2,1,train\n");
  EXPECT_THROW(LoadDataset(dir.string()), DataError);
  WriteFile(dir / "labels.csv", "patient_id,event,time,split\na,1,1,holdout\n");
  EXPECT_THROW(LoadDataset(dir.string()), DataError);
  EXPECT_THROW(LoadDataset((dir / "missing").string()), DataError);
}

TEST(ImputeTest, ModeTiesPickSmallest) {
  Tensor m = Tensor::FromRows({{3, 1}, {1, NAN}, {NAN, 4}, {3, 2}, {1, 9}});
  Impute(m, std::vector<ColumnKind>{ColumnKind::kCategorical, ColumnKind::kContinuous});
  EXPECT_EQ(m.at(2, 0), 1.0);
  EXPECT_EQ(m.at(1, 1), 3.0);
}

TEST(ImputeTest, AllMissingColumnFails) {
  Tensor m = Tensor::FromRows({{NAN}, {NAN}});
  EXPECT_THROW(Impute(m, std::vector<ColumnKind>{ColumnKind::kContinuous}), DataError);
}

TEST(TopVarianceTest, KeepsHighestInOriginalOrder) {
  Tensor m = Tensor::FromRows({{0, 5, 1, 0}, {0, -5, 2, 10}, {0, 5, 3, -10}});
  EXPECT_EQ(TopVarianceColumns(m, 2), (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(TopVarianceColumns(m, 9).size(), 4u);
}

TEST(SubjectKeyTest, StableAndDistinct) {
  EXPECT_EQ(SubjectKey("P000001"), SubjectKey("P000001"));
  std::set<std::uint64_t> keys;
  for (int i = 0; i < 5000; ++i) keys.insert(SubjectKey("P" + std::to_string(i)));
  EXPECT_EQ(keys.size(), 5000u);
  EXPECT_EQ(SubjectKey(""), 1469598103934665603ULL);
}

}  // namespace
}  // namespace bvfl
