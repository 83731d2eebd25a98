#include "clir/report.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace clir {

namespace {

double mean(const std::vector<Score>& xs) {
    double sum = 0.0;
    for (const auto& x : xs) sum += x.value();
    return sum / static_cast<double>(xs.size());
}

std::string signed_2dp(double delta) {
    const auto text = format_2dp(delta);
    if (text == "0.00" || text.front() == '-') return text;
    return "+" + text;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

}  // namespace

Score direction_avg(const std::vector<Score>& per_dataset) {
    if (per_dataset.empty()) throw PreconditionError("direction_avg: no dataset scores");
    return Score(mean(per_dataset));
}

Score ovr(const std::vector<Score>& direction_avgs) {
    if (direction_avgs.empty()) throw PreconditionError("ovr: no direction averages");
    if (direction_avgs.size() != 2 && direction_avgs.size() != 4) {
        throw PreconditionError("ovr: expected 2 or 4 direction averages, got " + std::to_string(direction_avgs.size()));
    }
    return Score(mean(direction_avgs));
}

void DeltaBins::validate() const {
    if (!(light_below > 0.0 && medium_below > light_below)) {
        throw PreconditionError("delta bins must satisfy 0 < light < medium");
    }
}

DeltaBin bin_delta(double delta, const DeltaBins& bins) {
    if (delta == 0.0) return {};
    const double mag = std::fabs(delta);
    DeltaBin b;
    b.sign = delta > 0.0 ? DeltaSign::improvement : DeltaSign::decline;
    b.magnitude = mag < bins.light_below ? DeltaMagnitude::light
                  : mag < bins.medium_below ? DeltaMagnitude::medium
                                            : DeltaMagnitude::strong;
    return b;
}

std::string to_string(const DeltaBin& bin) {
    if (bin.sign == DeltaSign::none) return "";
    std::string out = bin.sign == DeltaSign::improvement ? "+" : "-";
    switch (bin.magnitude) {
        case DeltaMagnitude::light: return out + "light";
        case DeltaMagnitude::medium: return out + "medium";
        case DeltaMagnitude::strong: return out + "strong";
        case DeltaMagnitude::none: break;
    }
    return "";
}

void ScoreTable::validate() const {
    if (rows.empty()) throw PreconditionError("score table has no rows");
    for (const auto& row : rows) {
        if (row.cells.size() != rows.front().cells.size() ||
            !std::equal(row.cells.begin(), row.cells.end(), rows.front().cells.begin(),
                        [](const auto& a, const auto& b) { return a.first == b.first; })) {
            throw PreconditionError("score table row '" + row.model + "' covers different columns than '" +
                                    rows.front().model + "'");
        }
    }
    if (baseline_label && !find(*baseline_label)) {
        throw PreconditionError("baseline row '" + *baseline_label + "' is missing from the table");
    }
}

const ScoreRow* ScoreTable::find(const std::string& model) const {
    const auto it = std::find_if(rows.begin(), rows.end(), [&](const ScoreRow& r) { return r.model == model; });
    return it == rows.end() ? nullptr : &*it;
}

ScoreTable table_from_results(const std::vector<EvalResult>& results, const std::optional<std::string>& baseline) {
    ScoreTable t;
    t.baseline_label = baseline;
    for (const auto& r : results) {
        if (std::find(t.datasets.begin(), t.datasets.end(), r.dataset_name) == t.datasets.end()) {
            t.datasets.push_back(r.dataset_name);
        }
        auto it = std::find_if(t.rows.begin(), t.rows.end(), [&](const ScoreRow& row) { return row.model == r.model; });
        if (it == t.rows.end()) {
            t.rows.push_back({r.model, {}});
            it = std::prev(t.rows.end());
        }
        const CellKey key{r.dataset_name, r.direction};
        if (it->cells.contains(key)) {
            throw PreconditionError("duplicate result for model '" + r.model + "', " + r.dataset_name + " " +
                                    r.direction.render());
        }
        it->cells.emplace(key, Score::from_fraction(r.mean_ndcg));
    }
    if (baseline) {
        const auto it = std::find_if(t.rows.begin(), t.rows.end(), [&](const ScoreRow& r) { return r.model == *baseline; });
        if (it != t.rows.end()) std::rotate(t.rows.begin(), it, std::next(it));
    }
    t.validate();
    return t;
}

ReportTable build_report(const ScoreTable& table, const ReportOptions& options) {
    table.validate();
    options.bins.validate();
    if (options.with_deltas && !table.baseline_label) {
        throw PreconditionError("deltas requested but no baseline row was named");
    }

    // Which directions does the table cover?
    const auto& first = table.rows.front().cells;
    const auto covers = [&](const TaskDirection& d) {
        return std::any_of(first.begin(), first.end(), [&](const auto& kv) { return kv.first.direction == d; });
    };

    using RowValues = std::vector<double>;
    std::vector<ReportColumn> columns;
    std::vector<RowValues> values(table.rows.size());
    const auto add_column = [&](std::string header, const std::function<double(const ScoreRow&)>& fn) {
        columns.push_back({std::move(header)});
        for (std::size_t r = 0; r < table.rows.size(); ++r) values[r].push_back(fn(table.rows[r]));
    };

    std::vector<TaskDirection> covered_all;
    for (const bool cross : {true, false}) {
        std::vector<TaskDirection> side;
        for (const auto& d : all_directions()) {
            if (d.is_cross() == cross && covers(d)) side.push_back(d);
        }
        if (side.empty()) continue;
        for (const auto& ds : table.datasets) {
            for (const auto& d : side) {
                if (!first.contains({ds, d})) {
                    throw PreconditionError("dataset '" + ds + "' lacks direction " + d.render());
                }
                add_column(ds + " " + d.render(), [&](const ScoreRow& row) { return row.cells.at({ds, d}).value(); });
            }
        }
        const auto avg_of = [&](const ScoreRow& row, const TaskDirection& d) {
            std::vector<Score> per;
            for (const auto& ds : table.datasets) per.push_back(row.cells.at({ds, d}));
            return direction_avg(per);
        };
        for (const auto& d : side) {
            add_column("AVG " + d.render(), [&, d](const ScoreRow& row) { return avg_of(row, d).value(); });
        }
        if (side.size() == 2) {
            add_column(std::string("OVR ") + (cross ? "cross" : "mono"), [&, side](const ScoreRow& row) {
                return ovr({avg_of(row, side[0]), avg_of(row, side[1])}).value();
            });
        }
        covered_all.insert(covered_all.end(), side.begin(), side.end());
    }
    if (covered_all.size() == 4) {
        add_column("OVR", [&](const ScoreRow& row) {
            std::vector<Score> avgs;
            for (const auto& d : covered_all) {
                std::vector<Score> per;
                for (const auto& ds : table.datasets) per.push_back(row.cells.at({ds, d}));
                avgs.push_back(direction_avg(per));
            }
            return ovr(avgs).value();
        });
    }

    ReportTable out;
    out.columns = columns;
    out.baseline_label = table.baseline_label;
    std::size_t base_row = 0;
    if (table.baseline_label) {
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            if (table.rows[r].model == *table.baseline_label) base_row = r;
        }
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        ReportRow row{table.rows[r].model, {}};
        for (std::size_t c = 0; c < columns.size(); ++c) {
            ReportCell cell;
            cell.value = values[r][c];
            if (options.with_deltas) {
                cell.delta = values[r][c] - values[base_row][c];
                cell.bin = bin_delta(*cell.delta, options.bins);
            }
            row.cells.push_back(cell);
        }
        out.rows.push_back(std::move(row));
    }
    for (std::size_t c = 0; c < columns.size(); ++c) {
        std::vector<std::size_t> order(table.rows.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return values[a][c] > values[b][c]; });
        out.rows[order[0]].cells[c].mark = Mark::bold;
        if (order.size() > 1) out.rows[order[1]].cells[c].mark = Mark::underline;
    }
    return out;
}

ReportFormat parse_report_format(std::string_view text) {
    if (text == "markdown" || text == "md") return ReportFormat::markdown;
    if (text == "csv") return ReportFormat::csv;
    if (text == "json") return ReportFormat::json;
    throw UsageError("unknown report format '" + std::string(text) + "' (markdown, csv, json)");
}

std::string render_table(const ScoreTable& table, ReportFormat format, const ReportOptions& options) {
    const auto report = build_report(table, options);
    std::string out;
    switch (format) {
        case ReportFormat::markdown: {
            out += "| model |";
            for (const auto& c : report.columns) out += " " + c.header + " |";
            out += "\n|---|";
            for (std::size_t i = 0; i < report.columns.size(); ++i) out += "---:|";
            out += "\n";
            for (const auto& row : report.rows) {
                out += "| " + row.model + " |";
                for (const auto& cell : row.cells) {
                    std::string text = format_2dp(cell.value);
                    if (cell.mark == Mark::bold) text = "**" + text + "**";
                    if (cell.mark == Mark::underline) text = "<u>" + text + "</u>";
                    if (cell.delta) {
                        const auto bin = to_string(cell.bin);
                        text += " (" + signed_2dp(*cell.delta) + (bin.empty() ? "" : " " + bin) + ")";
                    }
                    out += " " + text + " |";
                }
                out += "\n";
            }
            break;
        }
        case ReportFormat::csv: {
            out += "model,column,value,delta,bin,mark\n";
            for (const auto& row : report.rows) {
                for (std::size_t c = 0; c < row.cells.size(); ++c) {
                    const auto& cell = row.cells[c];
                    out += csv_escape(row.model) + "," + csv_escape(report.columns[c].header) + "," +
                           format_2dp(cell.value) + "," + (cell.delta ? signed_2dp(*cell.delta) : "") + "," +
                           to_string(cell.bin) + "," +
                           (cell.mark == Mark::bold ? "bold" : cell.mark == Mark::underline ? "underline" : "") + "\n";
                }
            }
            break;
        }
        case ReportFormat::json: {
            json columns = json::array();
            for (const auto& c : report.columns) columns.push_back(c.header);
            json rows = json::array();
            for (const auto& row : report.rows) {
                json cells = json::array();
                for (const auto& cell : row.cells) {
                    json jc = {{"value", cell.value}};
                    if (cell.delta) {
                        jc["delta"] = *cell.delta;
                        jc["bin"] = to_string(cell.bin);
                    }
                    jc["mark"] = cell.mark == Mark::bold ? "bold" : cell.mark == Mark::underline ? "underline" : "";
                    cells.push_back(std::move(jc));
                }
                rows.push_back({{"model", row.model}, {"cells", std::move(cells)}});
            }
            json raw = json::array();
            for (const auto& row : table.rows) {
                json cells = json::object();
                for (const auto& [key, score] : row.cells) {
                    cells[key.dataset][key.direction.render()] = score.value();
                }
                raw.push_back({{"model", row.model}, {"scores", std::move(cells)}});
            }
            json j = {{"columns", columns}, {"rows", rows}, {"table", raw}};
            j["baseline"] = report.baseline_label ? json(*report.baseline_label) : json(nullptr);
            out = j.dump(2) + "\n";
            break;
        }
    }
    return out;
}

}  // namespace clir
