#include "lmac/ranker.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <boost/tokenizer.hpp>
#include <nlohmann/json.hpp>

#include "lmac/error.hpp"

namespace lmac {

using json = nlohmann::json;

ModelScore score_of(const CompressionReport& report) {
  return ModelScore{report.model_id, report.ratio};
}

AccuracyTable::AccuracyTable(std::vector<AccuracyRow> rows) : rows_(std::move(rows)) {
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& r : rows_) {
    if (!(r.accuracy >= 0.0 && r.accuracy <= 100.0)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "accuracy for " + r.model_id + "/" + r.task_id + " outside [0, 100]");
    }
    if (!seen.emplace(r.model_id, r.task_id).second) {
      throw Error(ErrorCode::kInvalidArgument,
                  "duplicate accuracy row for " + r.model_id + "/" + r.task_id);
    }
  }
}

std::vector<std::string> AccuracyTable::tasks() const {
  std::vector<std::string> out;
  for (const auto& r : rows_) {
    if (std::find(out.begin(), out.end(), r.task_id) == out.end()) out.push_back(r.task_id);
  }
  return out;
}

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text,
                                                const std::vector<std::string>& header) {
  using Separator = boost::escaped_list_separator<char>;
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<std::string>> rows;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    try {
      boost::tokenizer<Separator> tok(line, Separator('\\', ',', '"'));
      fields.assign(tok.begin(), tok.end());
    } catch (const boost::escaped_list_error& e) {
      throw Error(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!header_seen) {
      if (fields != header) {
        std::string expected;
        for (const auto& h : header) expected += (expected.empty() ? "" : ",") + h;
        throw Error(ErrorCode::kFormat, "expected CSV header '" + expected + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::kFormat, "line " + std::to_string(line_no) + ": expected " +
                                          std::to_string(header.size()) + " fields");
    }
    rows.push_back(std::move(fields));
  }
  if (!header_seen) throw Error(ErrorCode::kFormat, "empty CSV");
  return rows;
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw Error(ErrorCode::kFormat, "bad " + what + " '" + s + "'");
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInput, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

AccuracyTable parse_accuracy_csv(const std::string& text) {
  std::vector<AccuracyRow> rows;
  for (auto& f : parse_csv(text, {"model", "task", "accuracy", "source"})) {
    rows.push_back({f[0], f[1], parse_number(f[2], "accuracy"), f[3]});
  }
  return AccuracyTable(std::move(rows));
}

AccuracyTable read_accuracy_csv(const std::filesystem::path& path) {
  return parse_accuracy_csv(read_file(path));
}

std::vector<ModelScore> read_scores_csv(const std::filesystem::path& path) {
  std::vector<ModelScore> out;
  for (auto& f : parse_csv(read_file(path), {"model", "ratio"})) {
    out.push_back({f[0], parse_number(f[1], "ratio")});
  }
  return out;
}

std::vector<ModelScore> rank_models(std::span<const ModelScore> scores) {
  std::vector<ModelScore> out(scores.begin(), scores.end());
  std::set<std::string> ids;
  for (const auto& s : out) {
    if (!ids.insert(s.model_id).second) {
      throw Error(ErrorCode::kInvalidArgument, "duplicate model id '" + s.model_id + "'");
    }
  }
  std::sort(out.begin(), out.end(), [](const ModelScore& a, const ModelScore& b) {
    if (a.ratio != b.ratio) return a.ratio > b.ratio;
    return a.model_id < b.model_id;
  });
  return out;
}

namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double rank = (static_cast<double>(i + j) / 2.0) + 1.0;  // 1-based average
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  return std::clamp(sxy / (std::sqrt(sxx) * std::sqrt(syy)), -1.0, 1.0);
}

std::optional<double> spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  // Doubled average ranks are integers, so every sum below is exact and a
  // perfect rank agreement comes out as exactly 1.
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const auto n = static_cast<__int128>(x.size());
  __int128 sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    const auto a = static_cast<__int128>(2 * rx[i]);
    const auto b = static_cast<__int128>(2 * ry[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    syy += b * b;
    sxy += a * b;
  }
  const __int128 cov = n * sxy - sx * sy;
  const __int128 vx = n * sxx - sx * sx;
  const __int128 vy = n * syy - sy * sy;
  if (vx == 0 || vy == 0) return std::nullopt;
  const long double rho = static_cast<long double>(cov) /
                          std::sqrt(static_cast<long double>(vx) * static_cast<long double>(vy));
  return std::clamp(static_cast<double>(rho), -1.0, 1.0);
}

std::optional<bool> order_agreement(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) return std::nullopt;
  auto sign = [](double d) { return (d > 0) - (d < 0); };
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      if (sign(x[i] - x[j]) != sign(y[i] - y[j])) return false;
    }
  }
  return true;
}

RankingReport correlation_report(std::span<const ModelScore> scores, const AccuracyTable& table) {
  RankingReport report;
  report.ranking = rank_models(scores);
  std::map<std::string, double> ratio_of;
  for (const auto& s : report.ranking) ratio_of[s.model_id] = s.ratio;

  for (const auto& task : table.tasks()) {
    TaskCorrelation tc;
    tc.task_id = task;
    for (const auto& row : table.rows()) {
      if (row.task_id != task) continue;
      auto it = ratio_of.find(row.model_id);
      if (it == ratio_of.end()) {
        throw Error(ErrorCode::kInvalidArgument,
                    "no compression report for model '" + row.model_id + "' (task " + task + ")");
      }
      tc.models.push_back(row.model_id);
      tc.ratios.push_back(it->second);
      tc.accuracies.push_back(row.accuracy);
    }
    tc.spearman = spearman(tc.ratios, tc.accuracies);
    tc.pearson = pearson(tc.ratios, tc.accuracies);
    tc.order_agreement = order_agreement(tc.ratios, tc.accuracies);
    report.tasks.push_back(std::move(tc));
  }
  return report;
}

std::string ranking_to_json(const RankingReport& report) {
  auto opt = [](const auto& v) -> json { return v ? json(*v) : json(nullptr); };
  json doc;
  json ranking = json::array();
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    ranking.push_back({{"rank", i + 1}, {"model", report.ranking[i].model_id},
                       {"ratio", report.ranking[i].ratio}});
  }
  doc["ranking"] = std::move(ranking);
  json tasks = json::array();
  for (const auto& t : report.tasks) {
    tasks.push_back({{"task", t.task_id},
                     {"n", t.n()},
                     {"models", t.models},
                     {"spearman", opt(t.spearman)},
                     {"pearson", opt(t.pearson)},
                     {"order_agreement", opt(t.order_agreement)}});
  }
  doc["tasks"] = std::move(tasks);
  return doc.dump(2) + "\n";
}

void write_ranking_summary(std::ostream& out, const RankingReport& report) {
  const auto flags = out.flags();
  out << std::fixed << std::setprecision(3);
  for (std::size_t i = 0; i < report.ranking.size(); ++i) {
    out << std::setw(3) << i + 1 << "  " << std::left << std::setw(24) << report.ranking[i].model_id
        << std::right << report.ranking[i].ratio << '\n';
  }
  out << '\n';
  for (const auto& t : report.tasks) {
    out << t.task_id << " (n=" << t.n() << "): spearman=";
    if (t.spearman) out << *t.spearman; else out << "undefined";
    out << " pearson=";
    if (t.pearson) out << *t.pearson; else out << "undefined";
    out << " order-agreement=";
    if (t.order_agreement) out << (*t.order_agreement ? "yes" : "no"); else out << "undefined";
    out << '\n';
  }
  out.flags(flags);
}

}  // namespace lmac
