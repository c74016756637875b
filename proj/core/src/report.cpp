#include <algorithm>
#include <cstdio>
#include <sstream>

#include "pctdialog/eval.hpp"

namespace pctdialog {

ComparisonReport aggregate(const std::vector<PairJudgement>& results) {
  if (results.empty()) throw EmptyResults();
  const auto& labels = results.front().labels;
  for (const auto& r : results) {
    if (r.labels != labels)
      throw std::invalid_argument("cannot aggregate " + r.labels[0] + " vs " + r.labels[1] + " with " + labels[0] +
                                  " vs " + labels[1]);
  }

  ComparisonReport report;
  report.pair_count = results.size();
  const double n = static_cast<double>(results.size());
  for (std::size_t d = 0; d < 2; ++d) {
    MethodSummary s;
    s.label = labels[d];
    double blri_total = 0.0;
    double general_total = 0.0;
    for (const auto& r : results) {
      for (std::size_t m = 0; m < kGeneralMetricCount; ++m) {
        s.per_metric[m] += r.general[d][m];
        general_total += r.general[d][m];
      }
      for (std::size_t i = 0; i < kBlriItemCount; ++i) {
        s.per_item[i] += r.blri[d][i];
        blri_total += r.blri[d][i];
      }
    }
    for (auto& v : s.per_metric) v /= n;
    for (auto& v : s.per_item) v /= n;
    s.general_mean = general_total / (n * kGeneralMetricCount);
    s.blri_mean = blri_total / (n * kBlriItemCount);
    report.methods.push_back(std::move(s));
  }
  report.identical_general_count = static_cast<std::size_t>(
      std::count_if(results.begin(), results.end(), [](const PairJudgement& r) { return r.identical_general; }));
  return report;
}

ComparisonReport aggregate(const std::vector<std::pair<GeneralScores, BlriScores>>& results,
                           const std::array<std::string, 2>& labels) {
  std::vector<PairJudgement> judged;
  judged.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i)
    judged.push_back(make_judgement(std::to_string(i), labels, results[i].first, results[i].second));
  return aggregate(judged);
}

std::vector<ComparisonReport> aggregate_by_labels(const std::vector<PairJudgement>& results) {
  if (results.empty()) throw EmptyResults();
  std::vector<std::array<std::string, 2>> order;
  for (const auto& r : results)
    if (std::find(order.begin(), order.end(), r.labels) == order.end()) order.push_back(r.labels);
  std::vector<ComparisonReport> reports;
  for (const auto& labels : order) {
    std::vector<PairJudgement> group;
    std::copy_if(results.begin(), results.end(), std::back_inserter(group),
                 [&](const PairJudgement& r) { return r.labels == labels; });
    reports.push_back(aggregate(group));
  }
  return reports;
}

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

}  // namespace

std::string render_table(const ComparisonReport& report) {
  const std::string h_method = "Method", h_blri = "BLRI Score", h_general = "General Score";
  std::size_t w = h_method.size();
  for (const auto& m : report.methods) w = std::max(w, m.label.size());
  std::ostringstream out;
  out << pad(h_method, w) << " | " << h_blri << " | " << h_general << '\n';
  out << std::string(w, '-') << "-|-" << std::string(h_blri.size(), '-') << "-|-" << std::string(h_general.size(), '-')
      << '\n';
  for (const auto& m : report.methods)
    out << pad(m.label, w) << " | " << pad(fixed2(m.blri_mean), h_blri.size()) << " | " << fixed2(m.general_mean)
        << '\n';
  return out.str();
}

Json report_to_json(const ComparisonReport& report) {
  Json methods = Json::array();
  for (const auto& m : report.methods) {
    Json per_metric = Json::object();
    for (std::size_t i = 0; i < kGeneralMetricCount; ++i) per_metric[std::string(kGeneralMetrics[i])] = m.per_metric[i];
    Json per_item = Json::array();
    for (double v : m.per_item) per_item.push_back(v);
    methods.push_back(Json{{"label", m.label},
                           {"blri_score", m.blri_mean},
                           {"general_score", m.general_mean},
                           {"per_metric", per_metric},
                           {"per_item", per_item}});
  }
  return Json{{"pairs", report.pair_count},
              {"identical_general_pairs", report.identical_general_count},
              {"methods", methods}};
}

}  // namespace pctdialog
