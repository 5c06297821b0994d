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
#include "isd/report.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "isd/checkpoint.h"
#include "isd/errors.h"
#include "isd/experiment.h"

namespace isd {

namespace fs = std::filesystem;

namespace {

double quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

WeightSummaryRow summarize(std::string name, std::string layer, std::vector<double> values) {
  WeightSummaryRow row;
  row.parameter = std::move(name);
  row.layer = std::move(layer);
  row.count = values.size();
  row.hist.assign(kHistogramBins, 0);
  if (values.empty()) return row;
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  row.mean = sum / values.size();
  double ss = 0.0;
  for (double v : values) ss += (v - row.mean) * (v - row.mean);
  row.std = std::sqrt(ss / values.size());
  row.min = values.front();
  row.max = values.back();
  row.q25 = quantile(values, 0.25);
  row.median = quantile(values, 0.5);
  row.q75 = quantile(values, 0.75);
  row.hist_lo = row.min;
  row.hist_hi = row.max;
  const double width = (row.max - row.min) / kHistogramBins;
  for (double v : values) {
    int bin = width > 0.0 ? static_cast<int>((v - row.min) / width) : 0;
    row.hist[std::clamp(bin, 0, kHistogramBins - 1)] += 1;
  }
  return row;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

std::vector<WeightSummaryRow> summarize_weights(const std::vector<RewardIndividual>& population,
                                                int num_players) {
  auto collect = [&](auto&& get) {
    std::vector<double> out;
    for (const auto& ind : population) out.push_back(get(ind.theta));
    return out;
  };
  std::vector<WeightSummaryRow> rows;
  for (int k = 0; k < kRewardHidden; ++k) {
    rows.push_back(summarize("v" + std::to_string(k + 1), "2",
                             collect([k](const RewardNetParams& t) { return t.v[k]; })));
  }
  for (int k = 0; k < kRewardHidden; ++k) {
    rows.push_back(summarize("abs_v" + std::to_string(k + 1), "2", collect([k](const RewardNetParams& t) {
                               return std::abs(t.v[k]);
                             })));
  }
  for (int k = 0; k < kRewardHidden; ++k) {
    rows.push_back(summarize("b" + std::to_string(k + 1), "2",
                             collect([k](const RewardNetParams& t) { return t.b[k]; })));
  }
  for (int j = 0; j < num_players; ++j) {
    for (int k = 0; k < kRewardHidden; ++k) {
      rows.push_back(summarize(
          "W" + std::to_string(j + 1) + "_" + std::to_string(k + 1), "1",
          collect([j, k](const RewardNetParams& t) { return t.weight(j, k); })));
    }
  }
  return rows;
}

std::vector<WeightSummaryRow> report_weights(const fs::path& checkpoint) {
  const Checkpoint ckpt = read_checkpoint(checkpoint.string());
  return summarize_weights(ckpt.pops.rewards, ckpt.num_players);
}

std::string weight_report_csv(const std::vector<WeightSummaryRow>& rows) {
  std::ostringstream out;
  out << kWeightReportSchema << '\n'
      << "parameter,layer,count,mean,std,min,q25,median,q75,max,hist_lo,hist_hi,hist\n";
  for (const auto& r : rows) {
    out << r.parameter << ',' << r.layer << ',' << r.count << ',' << num(r.mean) << ','
        << num(r.std) << ',' << num(r.min) << ',' << num(r.q25) << ',' << num(r.median)
        << ',' << num(r.q75) << ',' << num(r.max) << ',' << num(r.hist_lo) << ','
        << num(r.hist_hi) << ',';
    for (std::size_t i = 0; i < r.hist.size(); ++i) out << (i ? ";" : "") << r.hist[i];
    out << '\n';
  }
  return out.str();
}

MetricSeries load_metric_series(const fs::path& run_dir) {
  const fs::path path = run_dir / "episodes.csv";
  std::ifstream in(path);
  if (!in) throw IntegrityError("no episode log at '" + path.string() + "'");
  std::string line;
  if (!std::getline(in, line) || line != kEpisodesSchema) {
    throw IntegrityError("'" + path.string() + "' has an unknown schema line");
  }
  std::getline(in, line);
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) header.push_back(col);
  }
  auto column = [&](const char* name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw IntegrityError(std::string("missing column ") + name);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_ret = column("collective_return");
  const std::size_t c_eq = column("equality");
  const std::size_t c_tag = column("tagging");
  const std::size_t c_sus = column("sustainability");
  MetricSeries series;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    for (std::string col; std::getline(ss, col, ',');) cols.push_back(col);
    if (cols.size() != header.size()) throw IntegrityError("malformed row in episode log");
    series.collective_return.push_back(std::stod(cols[c_ret]));
    series.equality.push_back(std::stod(cols[c_eq]));
    series.tagging.push_back(std::stod(cols[c_tag]));
    series.sustainability.push_back(std::stod(cols[c_sus]));
  }
  return series;
}

std::vector<double> moving_average(const std::vector<double>& values, int window) {
  window = std::max(window, 1);
  std::vector<double> out(values.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    sum += values[i];
    if (i >= static_cast<std::size_t>(window)) sum -= values[i - window];
    out[i] = sum / static_cast<double>(std::min<std::size_t>(i + 1, window));
  }
  return out;
}

std::string render_svg(const MetricSeries& series, int window) {
  constexpr int kPanelW = 420, kPanelH = 260, kPad = 40;
  const std::pair<const char*, const std::vector<double>*> panels[] = {
      {"collective return", &series.collective_return},
      {"equality", &series.equality},
      {"tagging", &series.tagging},
      {"sustainability", &series.sustainability},
  };
  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << 2 * kPanelW << "\" height=\""
      << 2 * kPanelH << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  for (int p = 0; p < 4; ++p) {
    const int ox = (p % 2) * kPanelW, oy = (p / 2) * kPanelH;
    const std::vector<double> smooth = moving_average(*panels[p].second, window);
    const double w = kPanelW - 2 * kPad, h = kPanelH - 2 * kPad;
    double lo = 0.0, hi = 1.0;
    if (!smooth.empty()) {
      lo = *std::min_element(smooth.begin(), smooth.end());
      hi = *std::max_element(smooth.begin(), smooth.end());
      if (hi - lo < 1e-12) { lo -= 0.5; hi += 0.5; }
    }
    svg << "<g transform=\"translate(" << ox << ',' << oy << ")\">\n"
        << "<text x=\"" << kPad << "\" y=\"20\">" << panels[p].first << " (moving average, "
        << std::max(window, 1) << " ep)</text>\n"
        << "<rect x=\"" << kPad << "\" y=\"" << kPad << "\" width=\"" << w << "\" height=\""
        << h << "\" fill=\"none\" stroke=\"#888\"/>\n"
        << "<text x=\"2\" y=\"" << kPad + 4 << "\">" << num(hi) << "</text>\n"
        << "<text x=\"2\" y=\"" << kPad + h << "\">" << num(lo) << "</text>\n";
    if (!smooth.empty()) {
      svg << "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\" points=\"";
      const double dx = smooth.size() > 1 ? w / (smooth.size() - 1) : 0.0;
      for (std::size_t i = 0; i < smooth.size(); ++i) {
        const double x = kPad + dx * i;
        const double y = kPad + h - (smooth[i] - lo) / (hi - lo) * h;
        svg << num(x) << ',' << num(y) << ' ';
      }
      svg << "\"/>\n";
    }
    svg << "<text x=\"" << kPad + w - 60 << "\" y=\"" << kPanelH - 10 << "\">episodes: "
        << smooth.size() << "</text>\n</g>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

fs::path plot_run(const fs::path& run_dir) {
  const MetricSeries series = load_metric_series(run_dir);
  const int window = std::max<int>(1, static_cast<int>(series.equality.size() / 20));
  const fs::path out_path = run_dir / "metrics.svg";
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw IntegrityError("cannot write '" + out_path.string() + "'");
  out << render_svg(series, window);
  return out_path;
}

}  // namespace isd
