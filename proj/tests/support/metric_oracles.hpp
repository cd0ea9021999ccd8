#pragma once

// Brute-force metric oracles. Segments and IoUs are computed by counting
// frames, never through the library's segment helpers.

#include <algorithm>
#include <functional>
#include <set>
#include <tuple>
#include <vector>

#include "svtas/data_model.hpp"

namespace svtas::testing {

struct Seg {
    int cls;
    std::size_t a, b; // [a, b)
    double conf = 1.0;
};

inline std::vector<Seg> oracle_segments(std::span<const ClassId> labels) {
    std::vector<Seg> out;
    for (std::size_t t = 0; t < labels.size(); ++t) {
        if (t == 0 || labels[t] != labels[t - 1]) out.push_back({labels[t], t, t + 1});
        else out.back().b = t + 1;
    }
    return out;
}

inline double oracle_iou(const Seg& x, const Seg& y) {
    std::size_t inter = 0, uni = 0;
    const std::size_t hi = std::max(x.b, y.b);
    for (std::size_t t = 0; t < hi; ++t) {
        const bool in_x = t >= x.a && t < x.b, in_y = t >= y.a && t < y.b;
        inter += in_x && in_y;
        uni += in_x || in_y;
    }
    return uni ? double(inter) / double(uni) : 0.0;
}

inline std::vector<Seg> drop_background(std::vector<Seg> s, bool exclude) {
    if (exclude) std::erase_if(s, [](const Seg& x) { return x.cls == 0; });
    return s;
}

inline double oracle_accuracy(std::span<const ClassId> p, std::span<const ClassId> g) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < g.size(); ++i) ok += p[i] == g[i];
    return g.empty() ? 1.0 : double(ok) / double(g.size());
}

struct OracleCounts {
    double tp = 0, fp = 0, fn = 0;
};

inline OracleCounts oracle_f1_counts(std::span<const ClassId> pred, std::span<const ClassId> gt, double thr,
                                     bool exclude_bg = false) {
    const auto P = drop_background(oracle_segments(pred), exclude_bg);
    const auto G = drop_background(oracle_segments(gt), exclude_bg);
    std::vector<char> hit(G.size(), 0);
    OracleCounts c;
    for (const auto& p : P) {
        int best = -1;
        double best_iou = -1;
        for (std::size_t j = 0; j < G.size(); ++j) {
            if (hit[j] || G[j].cls != p.cls) continue;
            const double o = oracle_iou(p, G[j]);
            if (o > best_iou) {
                best_iou = o;
                best = int(j);
            }
        }
        if (best >= 0 && best_iou >= thr) {
            hit[std::size_t(best)] = 1;
            c.tp++;
        } else {
            c.fp++;
        }
    }
    for (char h : hit) c.fn += !h;
    return c;
}

inline double f1_of(const OracleCounts& c) {
    const double d = 2 * c.tp + c.fp + c.fn;
    return d > 0 ? 2 * c.tp / d : 1.0;
}

// Largest number of same-class pairs with IoU >= thr, by exhaustive search.
inline std::size_t oracle_max_matching(const std::vector<Seg>& P, const std::vector<Seg>& G, double thr) {
    std::vector<char> used(G.size(), 0);
    std::function<std::size_t(std::size_t)> go = [&](std::size_t i) -> std::size_t {
        if (i == P.size()) return 0;
        std::size_t best = go(i + 1);
        for (std::size_t j = 0; j < G.size(); ++j) {
            if (used[j] || G[j].cls != P[i].cls || oracle_iou(P[i], G[j]) < thr) continue;
            used[j] = 1;
            best = std::max(best, 1 + go(i + 1));
            used[j] = 0;
        }
        return best;
    };
    return go(0);
}

struct OracleVideo {
    std::vector<Seg> pred; // scored proposals
    std::vector<Seg> gt;
};

// mAP: for every rank cutoff the matching is recomputed from scratch on the
// top-r predictions; AP sums recall increments times the best precision at
// that recall or beyond.
inline double oracle_map(const std::vector<OracleVideo>& videos, double thr) {
    std::set<int> classes;
    for (const auto& v : videos)
        for (const auto& g : v.gt) classes.insert(g.cls);
    if (classes.empty()) {
        for (const auto& v : videos)
            if (!v.pred.empty()) return 0.0;
        return 1.0;
    }
    double total = 0;
    for (int c : classes) {
        // (conf desc, video, position) is the ranking.
        std::vector<std::tuple<double, std::size_t, std::size_t>> ranked;
        std::size_t n_gt = 0;
        for (std::size_t v = 0; v < videos.size(); ++v) {
            for (std::size_t i = 0; i < videos[v].pred.size(); ++i)
                if (videos[v].pred[i].cls == c) ranked.emplace_back(-videos[v].pred[i].conf, v, i);
            for (const auto& g : videos[v].gt) n_gt += g.cls == c;
        }
        std::sort(ranked.begin(), ranked.end());
        std::vector<double> P, R;
        for (std::size_t r = 1; r <= ranked.size(); ++r) {
            std::vector<std::vector<char>> used(videos.size());
            for (std::size_t v = 0; v < videos.size(); ++v) used[v].assign(videos[v].gt.size(), 0);
            double tp = 0;
            for (std::size_t q = 0; q < r; ++q) {
                const auto [negc, v, i] = ranked[q];
                const Seg& p = videos[v].pred[i];
                int best = -1;
                double bo = -1;
                for (std::size_t j = 0; j < videos[v].gt.size(); ++j) {
                    const Seg& g = videos[v].gt[j];
                    if (g.cls != c || used[v][j]) continue;
                    const double o = oracle_iou(p, g);
                    if (o > bo) {
                        bo = o;
                        best = int(j);
                    }
                }
                if (best >= 0 && bo >= thr) {
                    used[v][std::size_t(best)] = 1;
                    tp++;
                }
            }
            P.push_back(tp / double(r));
            R.push_back(tp / double(n_gt));
        }
        double ap = 0, prev_r = 0;
        for (std::size_t r = 0; r < P.size(); ++r) {
            if (R[r] > prev_r) {
                double best_p = 0;
                for (std::size_t q = r; q < P.size(); ++q) best_p = std::max(best_p, P[q]);
                ap += (R[r] - prev_r) * best_p;
                prev_r = R[r];
            }
        }
        total += ap;
    }
    return total / double(classes.size());
}

inline double oracle_auc(const std::vector<OracleVideo>& videos, const std::vector<std::size_t>& grid) {
    std::size_t n_gt = 0;
    for (const auto& v : videos) n_gt += v.gt.size();
    if (n_gt == 0) return 0.0;
    std::vector<double> ar;
    for (std::size_t an : grid) {
        double acc = 0;
        for (int step = 0; step < 10; ++step) {
            const double thr = 0.5 + 0.05 * step;
            std::size_t found = 0;
            for (const auto& v : videos) {
                std::vector<std::pair<double, std::size_t>> order;
                for (std::size_t i = 0; i < v.pred.size(); ++i) order.emplace_back(-v.pred[i].conf, i);
                std::stable_sort(order.begin(), order.end(),
                                 [](const auto& x, const auto& y) { return x.first < y.first; });
                for (const auto& g : v.gt) {
                    bool ok = false;
                    for (std::size_t q = 0; q < std::min(an, order.size()); ++q)
                        ok = ok || oracle_iou(v.pred[order[q].second], g) >= thr;
                    found += ok;
                }
            }
            acc += double(found) / double(n_gt);
        }
        ar.push_back(acc / 10.0);
    }
    if (grid.size() == 1) return ar[0];
    double area = 0;
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        for (std::size_t x = grid[i]; x < grid[i + 1]; ++x) {
            // Unit-width slices of the linear interpolant.
            const double f0 = ar[i] + (ar[i + 1] - ar[i]) * double(x - grid[i]) / double(grid[i + 1] - grid[i]);
            const double f1 = ar[i] + (ar[i + 1] - ar[i]) * double(x + 1 - grid[i]) / double(grid[i + 1] - grid[i]);
            area += 0.5 * (f0 + f1);
        }
    return area / double(grid.back() - grid.front());
}

inline std::vector<Seg> to_oracle(const SegmentList& s) {
    std::vector<Seg> out;
    for (const auto& x : s) out.push_back({x.class_id, x.start, x.end, x.confidence});
    return out;
}

} // namespace svtas::testing
