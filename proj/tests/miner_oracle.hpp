#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "clir/ingest.hpp"
#include "clir/miner.hpp"

// Brute-force hard-negative filter written directly from the mining rules.
namespace oracle {

struct Sim {
    std::string id;
    double sim;
};

inline std::vector<Sim> cosine_ranking(std::span<const float> q, const clir::EmbeddingMatrix& docs) {
    const auto unit = [](std::span<const float> v) {
        double n = 0.0;
        for (const float x : v) n += static_cast<double>(x) * x;
        n = std::sqrt(n);
        std::vector<double> out;
        for (const float x : v) out.push_back(x / n);
        return out;
    };
    const auto uq = unit(q);
    std::vector<Sim> out;
    for (std::size_t i = 0; i < docs.rows(); ++i) {
        const auto ud = unit(docs.row(i));
        double dot = 0.0;
        for (std::size_t j = 0; j < ud.size(); ++j) dot += uq[j] * ud[j];
        out.push_back({docs.ids()[i], dot});
    }
    std::sort(out.begin(), out.end(), [](const Sim& a, const Sim& b) {
        return a.sim != b.sim ? a.sim > b.sim : a.id < b.id;
    });
    return out;
}

/// Candidates in rank order that pass the window and both thresholds, truncated to `count`.
inline std::vector<std::string> mine(const std::vector<Sim>& ranking, const std::string& positive,
                                     const clir::MiningConfig& cfg) {
    double pos_sim = 0.0;
    for (const auto& s : ranking) {
        if (s.id == positive) pos_sim = s.sim;
    }
    std::vector<Sim> ranked;
    for (const auto& s : ranking) {
        if (s.id != positive || cfg.include_own_positive) ranked.push_back(s);
    }
    std::vector<std::string> out;
    for (std::size_t r = cfg.rank_lo; r <= std::min(cfg.rank_hi, ranked.size()); ++r) {
        const auto& s = ranked[r - 1];
        if (s.id == positive) continue;
        if (s.sim <= cfg.abs_cap && s.sim < cfg.rel_margin * pos_sim && out.size() < cfg.count) out.push_back(s.id);
    }
    return out;
}

/// True when some similarity sits so close to a threshold or a neighbour that
/// last-bit rounding differences between implementations could flip the outcome.
inline bool near_boundary(const std::vector<Sim>& ranking, const std::string& positive, const clir::MiningConfig& cfg) {
    constexpr double eps = 1e-9;
    double pos_sim = 0.0;
    for (const auto& s : ranking) {
        if (s.id == positive) pos_sim = s.sim;
    }
    for (std::size_t i = 0; i < ranking.size(); ++i) {
        const double s = ranking[i].sim;
        if (std::fabs(s - cfg.abs_cap) < eps || std::fabs(s - cfg.rel_margin * pos_sim) < eps) return true;
        if (i > 0 && std::fabs(s - ranking[i - 1].sim) < eps) return true;
    }
    return false;
}

}  // namespace oracle
