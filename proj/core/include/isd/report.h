// Copyright 2026 The isd-evo Authors.
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
#ifndef ISD_REPORT_H_
#define ISD_REPORT_H_

// Population-level summaries of evolved reward networks and SVG training
// curves from a run's episode log.

#include <filesystem>
#include <string>
#include <vector>

#include "isd/evolution.h"

namespace isd {

inline constexpr const char* kWeightReportSchema = "# isd-weight-report v1";
inline constexpr int kHistogramBins = 10;

// One row per reward-network parameter across the population, plus
// magnitude rows abs_v1 and abs_v2. Row order: v1, v2, abs_v1, abs_v2, b1,
// b2, then Wj_k for input j and hidden unit k (1-based).
struct WeightSummaryRow {
  std::string parameter;
  std::string layer;  // "2" for v and b, "1" for W
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation
  double min = 0.0;
  double q25 = 0.0;
  double median = 0.0;
  double q75 = 0.0;
  double max = 0.0;
  double hist_lo = 0.0;
  double hist_hi = 0.0;
  std::vector<std::size_t> hist;  // kHistogramBins equal-width bins on [lo, hi]
};

std::vector<WeightSummaryRow> summarize_weights(const std::vector<RewardIndividual>& population,
                                                int num_players);

// An empty population yields the full row set with count 0 and zero stats.
std::vector<WeightSummaryRow> report_weights(const std::filesystem::path& checkpoint);

std::string weight_report_csv(const std::vector<WeightSummaryRow>& rows);

struct MetricSeries {
  std::vector<double> collective_return;
  std::vector<double> equality;
  std::vector<double> tagging;
  std::vector<double> sustainability;
};

// Reads episodes.csv. Throws IntegrityError on a missing file or a schema
// line it does not recognize.
MetricSeries load_metric_series(const std::filesystem::path& run_dir);

// Trailing moving average; window < 1 is treated as 1.
std::vector<double> moving_average(const std::vector<double>& values, int window);

std::string render_svg(const MetricSeries& series, int window);

// Writes run_dir/metrics.svg and returns its path.
std::filesystem::path plot_run(const std::filesystem::path& run_dir);

}  // namespace isd

#endif  // ISD_REPORT_H_
