#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clir/core.hpp"
#include "clir/evaluator.hpp"

namespace clir {

/// Mean over datasets for one direction, full precision.
Score direction_avg(const std::vector<Score>& per_dataset);

/// Mean of direction averages: 2 (one side) or 4 (overall).
Score ovr(const std::vector<Score>& direction_avgs);

enum class DeltaSign { none, improvement, decline };
enum class DeltaMagnitude { none, light, medium, strong };

struct DeltaBins {
    double light_below = 0.5;   // |delta| < 0.5 -> light
    double medium_below = 1.5;  // |delta| < 1.5 -> medium, otherwise strong

    void validate() const;
};

struct DeltaBin {
    DeltaSign sign = DeltaSign::none;
    DeltaMagnitude magnitude = DeltaMagnitude::none;
    bool operator==(const DeltaBin&) const = default;
};

/// Zero delta has no bin; every other value lands in exactly one.
DeltaBin bin_delta(double delta, const DeltaBins& bins = {});
std::string to_string(const DeltaBin& bin);  // "", "+light", "-strong", ...

struct CellKey {
    std::string dataset;
    TaskDirection direction;
    auto operator<=>(const CellKey&) const = default;
};

struct ScoreRow {
    std::string model;
    std::map<CellKey, Score> cells;
};

struct ScoreTable {
    std::vector<std::string> datasets;  // column order
    std::vector<ScoreRow> rows;         // row order
    std::optional<std::string> baseline_label;

    /// Every row must cover the same (dataset, direction) set.
    void validate() const;
    const ScoreRow* find(const std::string& model) const;
};

/// Groups eval results by model label. Datasets and models keep first-seen order,
/// except that the baseline row (when named) comes first.
ScoreTable table_from_results(const std::vector<EvalResult>& results,
                              const std::optional<std::string>& baseline = std::nullopt);

enum class Mark { none, bold, underline };

struct ReportColumn {
    std::string header;  // "belebele en-ko", "AVG en-ko", "OVR cross", "OVR mono", "OVR"
};

struct ReportCell {
    double value = 0.0;
    std::optional<double> delta;
    DeltaBin bin;
    Mark mark = Mark::none;
};

struct ReportRow {
    std::string model;
    std::vector<ReportCell> cells;  // parallel to ReportTable::columns
};

struct ReportTable {
    std::vector<ReportColumn> columns;
    std::vector<ReportRow> rows;
    std::optional<std::string> baseline_label;
};

struct ReportOptions {
    bool with_deltas = true;  // requires ScoreTable::baseline_label
    DeltaBins bins;
};

/// Per-dataset cells, AVG per direction, and OVR columns; cross directions first, then mono.
/// Column max is bold, runner-up underlined, ties resolved by row order.
ReportTable build_report(const ScoreTable& table, const ReportOptions& options = {});

enum class ReportFormat { markdown, csv, json };
ReportFormat parse_report_format(std::string_view text);

std::string render_table(const ScoreTable& table, ReportFormat format, const ReportOptions& options = {});

}  // namespace clir
