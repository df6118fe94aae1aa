#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lmac/corpus.hpp"

namespace lmac {

/// One model's compression ratio, the only thing ranking needs from a
/// CompressionReport.
struct ModelScore {
  std::string model_id;
  double ratio = 0.0;
};

ModelScore score_of(const CompressionReport& report);

struct AccuracyRow {
  std::string model_id;
  std::string task_id;
  double accuracy = 0.0;  // percent
  std::string source;     // citation for the published figure
};

/// Published task accuracies, keyed by (model, task).
class AccuracyTable {
 public:
  AccuracyTable() = default;
  /// Throws kInvalidArgument on an accuracy outside [0, 100] or a repeated
  /// (model, task) pair.
  explicit AccuracyTable(std::vector<AccuracyRow> rows);

  const std::vector<AccuracyRow>& rows() const { return rows_; }
  /// Task ids in order of first appearance.
  std::vector<std::string> tasks() const;

 private:
  std::vector<AccuracyRow> rows_;
};

/// Reads "model,task,accuracy,source" CSV with that header. Fields may be
/// double-quoted. Throws kFormat on malformed input.
AccuracyTable read_accuracy_csv(const std::filesystem::path& path);
AccuracyTable parse_accuracy_csv(const std::string& text);

/// Reads "model,ratio" CSV with that header.
std::vector<ModelScore> read_scores_csv(const std::filesystem::path& path);

/// Descending by ratio, ties by model id. Throws kInvalidArgument on a
/// duplicate model id.
std::vector<ModelScore> rank_models(std::span<const ModelScore> scores);

/// Spearman rank correlation with average ranks for ties. Empty when
/// n < 2, the lengths differ, or either side has constant ranks.
std::optional<double> spearman(std::span<const double> x, std::span<const double> y);

/// Pearson product-moment correlation; empty under the same conditions.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

/// True when every pair of models is ordered the same way by both inputs.
/// Empty when n < 2.
std::optional<bool> order_agreement(std::span<const double> x, std::span<const double> y);

struct TaskCorrelation {
  std::string task_id;
  std::vector<std::string> models;
  std::vector<double> ratios;
  std::vector<double> accuracies;
  std::optional<double> spearman;
  std::optional<double> pearson;
  std::optional<bool> order_agreement;

  std::size_t n() const { return models.size(); }
};

struct RankingReport {
  std::vector<ModelScore> ranking;
  std::vector<TaskCorrelation> tasks;
};

/// Correlates ratios with each task's accuracies. Throws kInvalidArgument
/// naming the first model that has an accuracy but no score.
RankingReport correlation_report(std::span<const ModelScore> scores, const AccuracyTable& table);

std::string ranking_to_json(const RankingReport& report);
void write_ranking_summary(std::ostream& out, const RankingReport& report);

}  // namespace lmac
