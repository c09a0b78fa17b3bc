/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "causalnet/delay_ingest.hpp"
#include "causalnet/error.hpp"

namespace causalnet {
namespace {

constexpr std::int64_t kBase = 480000 * 60;  // minute of some hour boundary

FlightRecord flight(const std::string& airport, std::int64_t sched, std::optional<std::int64_t> actual,
                    bool cancelled = false) {
  return {airport, sched, actual, cancelled};
}

DelayMatrix matrix_of(const Eigen::MatrixXd& values) {
  DelayMatrix m;
  for (Eigen::Index i = 0; i < values.rows(); ++i) m.airports.push_back("A" + std::to_string(i));
  m.values = values;
  m.mask = MaskMatrix::Constant(values.rows(), values.cols(), true);
  return m;
}

TEST(BinDelaysTest, CancellationChargedAtRho) {
  // 9 flights with 60 total minutes of delay, 1 cancelled.
  std::vector<FlightRecord> records;
  for (int k = 0; k < 9; ++k) records.push_back(flight("X", kBase + k, kBase + k + (k < 6 ? 10 : 0)));
  records.push_back(flight("X", kBase + 30, std::nullopt, true));
  const std::vector<std::string> airports{"X"};
  const auto res = bin_delays(records, airports, {kBase / 60, kBase / 60 + 1}, 180.0);
  EXPECT_DOUBLE_EQ(res.matrix.values(0, 0), 24.0);
  EXPECT_TRUE(res.matrix.mask(0, 0));
  EXPECT_EQ(res.rejected, 0u);
}

TEST(BinDelaysTest, EmptyHourIsZeroAndUnmasked) {
  const std::vector<FlightRecord> records{flight("X", kBase, kBase + 5)};
  const std::vector<std::string> airports{"X", "Y"};
  const auto res = bin_delays(records, airports, {kBase / 60, kBase / 60 + 2});
  EXPECT_EQ(res.matrix.values(0, 1), 0.0);
  EXPECT_FALSE(res.matrix.mask(0, 1));
  EXPECT_FALSE(res.matrix.mask(1, 0));
  EXPECT_EQ(res.matrix.values(0, 0), 5.0);
}

TEST(BinDelaysTest, OnTimeGivesZero) {
  std::vector<FlightRecord> records;
  for (int k = 0; k < 4; ++k) records.push_back(flight("X", kBase + 10 * k, kBase + 10 * k));
  // Early departures count as zero delay.
  records.push_back(flight("X", kBase + 50, kBase + 40));
  const std::vector<std::string> airports{"X"};
  const auto res = bin_delays(records, airports, {kBase / 60, kBase / 60 + 1});
  EXPECT_EQ(res.matrix.values(0, 0), 0.0);
  EXPECT_TRUE(res.matrix.mask(0, 0));
}

TEST(BinDelaysTest, InvalidRecordsAreCounted) {
  const std::vector<FlightRecord> records{
      flight("X", kBase, kBase + 1, true),      // cancelled with actual time
      flight("X", kBase + 1, std::nullopt),     // not cancelled, no actual time
      flight("X", kBase + 2, kBase - 2000),     // departs > 24h early
      flight("X", kBase + 3, kBase + 13)};
  const std::vector<std::string> airports{"X"};
  const auto res = bin_delays(records, airports, {kBase / 60, kBase / 60 + 1});
  EXPECT_EQ(res.rejected, 3u);
  EXPECT_EQ(res.matrix.values(0, 0), 10.0);
}

TEST(BinDelaysTest, Errors) {
  const std::vector<std::string> none;
  const std::vector<FlightRecord> records{flight("X", kBase, kBase), flight("X", kBase, kBase)};
  EXPECT_THROW(bin_delays({}, none, {0, 1}), Error);
  const std::vector<std::string> airports{"X"};
  try {
    bin_delays(records, airports, {kBase / 60, kBase / 60 + 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("X@"), std::string::npos);
  }
  const std::vector<FlightRecord> stranger{flight("Q", kBase, kBase)};
  EXPECT_THROW(bin_delays(stranger, airports, {kBase / 60, kBase / 60 + 1}), Error);
}

TEST(RemoveOutliersTest, ClipsAboveQuantile) {
  Eigen::MatrixXd v(1, 100);
  for (int k = 0; k < 100; ++k) v(0, k) = k + 1;
  const auto res = remove_outliers(matrix_of(v), 0.95);
  // Linear interpolation between order statistics 94 and 95 (0-based).
  const double q = 95.0 + 0.05 * (96.0 - 95.0);
  EXPECT_NEAR(res.thresholds[0], q, 1e-12);
  for (int k = 0; k < 100; ++k) EXPECT_DOUBLE_EQ(res.matrix.values(0, k), std::min<double>(k + 1, q));
  EXPECT_DOUBLE_EQ(res.clipped_fraction, 0.05);
}

TEST(RemoveOutliersTest, ConstantSeriesUnchanged) {
  const Eigen::MatrixXd v = Eigen::MatrixXd::Constant(2, 30, 7.0);
  const auto res = remove_outliers(matrix_of(v), 0.9);
  EXPECT_EQ(res.matrix.values, v);
  EXPECT_EQ(res.clipped_fraction, 0.0);
}

TEST(RemoveOutliersTest, UniformClipsAboutTenPercent) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  Eigen::MatrixXd v(5, 1000);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = u(rng);
  const auto res = remove_outliers(matrix_of(v), 0.9);
  EXPECT_NEAR(res.clipped_fraction, 0.1, 0.02);
}

TEST(RemoveOutliersTest, IgnoresUnmaskedAndRejectsEmptyAirport) {
  DelayMatrix m = matrix_of(Eigen::MatrixXd::Constant(2, 4, 1.0));
  m.values(0, 3) = 1000.0;
  m.mask(0, 3) = false;
  const auto res = remove_outliers(m, 0.5);
  EXPECT_EQ(res.matrix.values(0, 3), 1000.0);
  EXPECT_EQ(res.thresholds[0], 1.0);
  m.mask.row(1).setConstant(false);
  try {
    remove_outliers(m, 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("A1"), std::string::npos);
  }
}

TEST(ZScoreTest, ClosedForm) {
  const DelayMatrix m = matrix_of(Eigen::RowVector3d(1, 2, 3));
  const ZScoreParams p = zscore_fit(m);
  EXPECT_DOUBLE_EQ(p.mean, 2.0);
  EXPECT_NEAR(p.std, std::sqrt(2.0 / 3.0), 1e-15);
  const Eigen::MatrixXd z = zscore_apply(p, m.values);
  EXPECT_NEAR(z(0, 0), -1.224744871391589, 1e-12);
  EXPECT_NEAR(z(0, 1), 0.0, 1e-15);
  EXPECT_NEAR(z(0, 2), 1.224744871391589, 1e-12);
}

TEST(ZScoreTest, RoundTripAndMaskedFit) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(10.0, 5.0);
  Eigen::MatrixXd v(4, 50);
  for (Eigen::Index i = 0; i < v.size(); ++i) v.data()[i] = g(rng);
  DelayMatrix m = matrix_of(v);
  const ZScoreParams p = zscore_fit(m);
  EXPECT_LT((zscore_invert(p, zscore_apply(p, v)) - v).cwiseAbs().maxCoeff(), 1e-12);

  m.mask(0, 0) = false;
  m.values(0, 0) = 1e9;
  const ZScoreParams q = zscore_fit(m);
  EXPECT_LT(std::fabs(q.mean), 100.0);
}

TEST(ZScoreTest, ConstantDataIsAnError) {
  EXPECT_THROW(zscore_fit(matrix_of(Eigen::MatrixXd::Constant(2, 5, 5.0))), Error);
}

TEST(SplitTest, SeventyFifteenFifteen) {
  const WindowSplit s = split_windows(100, {}, 3, 3);
  EXPECT_EQ(s.train.begin, 0u);
  EXPECT_EQ(s.train.end, 70u);
  EXPECT_EQ(s.validation.begin, 70u);
  EXPECT_EQ(s.validation.end, 85u);
  EXPECT_EQ(s.test.begin, 85u);
  EXPECT_EQ(s.test.end, 100u);
  EXPECT_EQ(s.train.anchors.front(), 3u);
  EXPECT_EQ(s.train.anchors.back(), 66u);
}

TEST(SplitTest, NoSampleStraddlesBoundary) {
  for (std::size_t hours : {60u, 100u, 333u, 1440u}) {
    for (std::size_t r : {0u, 2u, 5u}) {
      for (std::size_t h : {1u, 3u}) {
        const WindowSplit s = split_windows(hours, {}, r, h);
        for (const Segment* seg : {&s.train, &s.validation, &s.test}) {
          ASSERT_FALSE(seg->anchors.empty());
          for (std::size_t t : seg->anchors) {
            EXPECT_GE(t, seg->begin + r);
            EXPECT_LT(t + h, seg->end);
          }
          EXPECT_EQ(seg->anchors.size(), seg->end - seg->begin - r - h);
        }
        EXPECT_EQ(s.train.end, s.validation.begin);
        EXPECT_EQ(s.validation.end, s.test.begin);
      }
    }
  }
}

TEST(SplitTest, DegenerateWindowPairsConsecutiveHours) {
  const WindowSplit s = split_windows(100, {}, 0, 1);
  EXPECT_EQ(s.train.anchors.front(), 0u);
  EXPECT_EQ(s.train.anchors.size(), 69u);
}

TEST(SplitTest, TooShortNamesMinimum) {
  try {
    split_windows(10, {}, 5, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("at least"), std::string::npos);
  }
  EXPECT_THROW(split_windows(100, {0.5, 0.5, 0.5}, 1, 1), Error);
}

TEST(SliceTest, KeepsStartHour) {
  DelayMatrix m = matrix_of(Eigen::MatrixXd::Random(2, 10));
  m.start_hour = 100;
  const DelayMatrix s = slice_hours(m, 3, 7);
  EXPECT_EQ(s.start_hour, 103);
  EXPECT_EQ(s.hours(), 4u);
  EXPECT_EQ(s.values, m.values.middleCols(3, 4));
  EXPECT_THROW(slice_hours(m, 5, 11), Error);
}

}  // namespace
}  // namespace causalnet
