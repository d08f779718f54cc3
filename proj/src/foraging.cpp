#include "forage/foraging.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <json.hpp>

#include "forage/csv.hpp"
#include "forage/errors.hpp"

namespace forage {

using nlohmann::json;

FluencyTrace fluency_trace(const WalkTrace& trace) {
    if (trace.steps.empty()) throw ValidationError("fluency_trace requires a nonempty trace");
    FluencyTrace ft;
    ft.walk = trace.walk;
    std::unordered_set<int> seen;
    seen.reserve(trace.steps.size());
    for (std::size_t idx = 0; idx < trace.steps.size(); ++idx) {
        const int item = trace.steps[idx];
        if (seen.insert(item).second) {
            ft.unique.push_back(item);
            ft.tau.push_back(static_cast<int>(idx) + 1);  // 1-based raw index
        }
    }
    ft.irts.reserve(ft.tau.size());
    for (std::size_t k = 1; k < ft.tau.size(); ++k) ft.irts.push_back(ft.tau[k] - ft.tau[k - 1]);
    return ft;
}

SwitchAnnotation detect_switches(const FluencyTrace& ft, const Vocabulary& vocab) {
    const std::size_t u = ft.unique.size();
    SwitchAnnotation ann;
    ann.switch_at.assign(u, false);
    for (std::size_t k = 1; k < u; ++k) {
        // Empty intersection is a switch; uncategorized items never share,
        // so they produce a switch on both sides.
        ann.switch_at[k] = !vocab.shares_category(ft.unique[k - 1], ft.unique[k]);
    }
    int begin = 0;
    for (std::size_t k = 1; k < u; ++k) {
        if (ann.switch_at[k]) {
            ann.patches.emplace_back(begin, static_cast<int>(k));
            begin = static_cast<int>(k);
        }
    }
    if (u > 0) ann.patches.emplace_back(begin, static_cast<int>(u));
    return ann;
}

int profile_slot(int r, int radius) {
    if (r == 0 || r < -radius || r > radius) {
        throw ValidationError("profile position out of range: " + std::to_string(r));
    }
    return r < 0 ? r + radius : radius + r - 1;
}

int profile_position(std::size_t slot, int radius) {
    if (slot >= 2 * static_cast<std::size_t>(radius)) {
        throw ValidationError("profile slot out of range: " + std::to_string(slot));
    }
    const int s = static_cast<int>(slot);
    return s < radius ? s - radius : s - radius + 1;
}

namespace {

double mean_of(const std::vector<int>& values) {
    double sum = 0.0;
    for (int v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

void check_paired(const std::vector<FluencyTrace>& fts,
                  const std::vector<SwitchAnnotation>& anns) {
    if (fts.size() != anns.size()) {
        throw ValidationError("fluency traces and switch annotations differ in length");
    }
    if (fts.empty()) throw ValidationError("metric aggregation requires at least one walk");
}

}  // namespace

SwitchProfile switch_profile(const std::vector<FluencyTrace>& fts,
                             const std::vector<SwitchAnnotation>& anns, int radius) {
    check_paired(fts, anns);
    if (radius < 1) throw ValidationError("switch profile radius must be >= 1");

    SwitchProfile profile;
    profile.radius = radius;
    profile.mean_ratio.assign(2 * static_cast<std::size_t>(radius), 0.0);
    profile.count.assign(2 * static_cast<std::size_t>(radius), 0);
    std::vector<double> sums(2 * static_cast<std::size_t>(radius), 0.0);
    bool any_switch = false;

    for (std::size_t w = 0; w < fts.size(); ++w) {
        const auto& ft = fts[w];
        const auto& ann = anns[w];
        if (ft.irts.empty()) continue;
        std::vector<int> switch_positions;
        for (std::size_t k = 1; k < ann.switch_at.size(); ++k) {
            if (ann.switch_at[k]) switch_positions.push_back(static_cast<int>(k));
        }
        if (switch_positions.empty()) continue;
        any_switch = true;
        const double walk_mean = mean_of(ft.irts);

        // IRT entering unique position k (0-based, k >= 1) is irts[k-1]. The
        // switch at position s claims it as r = +1; nearer events win and
        // ties go to the later event.
        for (int k = 1; k < static_cast<int>(ft.unique.size()); ++k) {
            int best_r = 0;
            int best_dist = std::numeric_limits<int>::max();
            for (int s : switch_positions) {
                const int r = k >= s ? k - s + 1 : k - s;
                const int dist = std::abs(r);
                // switch_positions ascends, so <= resolves distance ties in
                // favor of the later event.
                if (dist <= best_dist) {
                    best_dist = dist;
                    best_r = r;
                }
            }
            if (best_r != 0 && best_r >= -radius && best_r <= radius) {
                const auto slot = static_cast<std::size_t>(profile_slot(best_r, radius));
                sums[slot] += ft.irts[static_cast<std::size_t>(k - 1)] / walk_mean;
                profile.count[slot] += 1;
            }
        }
    }
    if (!any_switch) {
        throw ValidationError("switch profile is empty: no walk contains a category switch");
    }
    for (std::size_t slot = 0; slot < sums.size(); ++slot) {
        if (profile.count[slot] > 0) {
            profile.mean_ratio[slot] = sums[slot] / static_cast<double>(profile.count[slot]);
        }
    }
    return profile;
}

PatchLeavingStat patch_leaving_stat(const std::vector<FluencyTrace>& fts,
                                    const std::vector<SwitchAnnotation>& anns) {
    check_paired(fts, anns);
    double last_sum = 0.0;
    long long last_n = 0;
    double paired_sum = 0.0;
    double global_sum = 0.0;
    long long global_n = 0;
    for (std::size_t w = 0; w < fts.size(); ++w) {
        const auto& ft = fts[w];
        for (int irt : ft.irts) global_sum += irt;
        global_n += static_cast<long long>(ft.irts.size());
        if (ft.irts.empty()) continue;
        const double walk_mean = mean_of(ft.irts);
        for (const auto& [begin, end] : anns[w].patches) {
            const int last_pos = end - 1;
            // A patch whose final item is the very first retrieval has no
            // entering IRT and contributes nothing.
            if (last_pos < 1) continue;
            const double last_irt = ft.irts[static_cast<std::size_t>(last_pos - 1)];
            last_sum += last_irt;
            paired_sum += last_irt - walk_mean;
            ++last_n;
        }
    }
    if (last_n == 0) {
        throw ValidationError("patch-leaving statistic: no patch has a defined final IRT");
    }
    PatchLeavingStat stat;
    stat.mean_last_irt = last_sum / static_cast<double>(last_n);
    stat.mean_global_irt = global_sum / static_cast<double>(global_n);
    stat.ratio = stat.mean_last_irt / stat.mean_global_irt;
    stat.paired_mean_difference = paired_sum / static_cast<double>(last_n);
    return stat;
}

DeviationData deviation_points(const std::vector<FluencyTrace>& fts,
                               const std::vector<SwitchAnnotation>& anns) {
    check_paired(fts, anns);
    DeviationData data;
    for (std::size_t w = 0; w < fts.size(); ++w) {
        const auto& ft = fts[w];
        if (ft.irts.empty()) {
            ++data.skipped_walks;
            continue;
        }
        const double walk_mean = mean_of(ft.irts);
        double dev_sum = 0.0;
        int dev_n = 0;
        for (const auto& [begin, end] : anns[w].patches) {
            const int last_pos = end - 1;
            if (last_pos < 1) continue;
            dev_sum += std::abs(ft.irts[static_cast<std::size_t>(last_pos - 1)] - walk_mean);
            ++dev_n;
        }
        if (dev_n == 0) {
            ++data.skipped_walks;
            continue;
        }
        DeviationPoint pt;
        pt.walk = ft.walk;
        pt.x_unique = static_cast<int>(ft.unique.size());
        pt.y_abs_dev = dev_sum / dev_n;
        data.points.push_back(pt);
    }
    return data;
}

void save_switch_profile_csv(const SwitchProfile& profile, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open profile CSV for writing: " + path);
    csv::write_row(out, {"relative_position", "mean_irt_ratio", "n"});
    for (std::size_t slot = 0; slot < profile.mean_ratio.size(); ++slot) {
        const int r = profile_position(slot, profile.radius);
        const bool has = profile.count[slot] > 0;
        csv::write_row(out, {std::to_string(r),
                             has ? csv::format_double(profile.mean_ratio[slot]) : std::string(),
                             std::to_string(profile.count[slot])});
    }
    if (!out) throw IoError("short write to profile CSV: " + path);
}

SwitchProfile load_switch_profile_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.size() < 3 || rows[0] != std::vector<std::string>{"relative_position", "mean_irt_ratio", "n"}) {
        throw ValidationError("malformed switch profile CSV: " + path);
    }
    const std::size_t slots = rows.size() - 1;
    if (slots % 2 != 0) throw ValidationError("switch profile CSV has an odd slot count: " + path);
    SwitchProfile profile;
    profile.radius = static_cast<int>(slots / 2);
    profile.mean_ratio.assign(slots, 0.0);
    profile.count.assign(slots, 0);
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 3) throw ValidationError("switch profile CSV row has wrong width: " + path);
        const int r = static_cast<int>(std::stol(row[0]));
        const auto slot = static_cast<std::size_t>(profile_slot(r, profile.radius));
        profile.count[slot] = std::stoll(row[2]);
        if (!row[1].empty()) profile.mean_ratio[slot] = csv::parse_double(row[1]);
    }
    return profile;
}

void save_deviation_csv(const DeviationData& data, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open deviation CSV for writing: " + path);
    csv::write_row(out, {"walk", "x_unique", "y_abs_dev"});
    for (const auto& pt : data.points) {
        csv::write_row(out, {std::to_string(pt.walk), std::to_string(pt.x_unique),
                             csv::format_double(pt.y_abs_dev)});
    }
    if (!out) throw IoError("short write to deviation CSV: " + path);
}

DeviationData load_deviation_csv(const std::string& path) {
    const auto rows = csv::read_file(path);
    if (rows.empty() || rows[0] != std::vector<std::string>{"walk", "x_unique", "y_abs_dev"}) {
        throw ValidationError("malformed deviation CSV: " + path);
    }
    DeviationData data;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.size() != 3) throw ValidationError("deviation CSV row has wrong width: " + path);
        DeviationPoint pt;
        pt.walk = static_cast<int>(std::stol(row[0]));
        pt.x_unique = static_cast<int>(std::stol(row[1]));
        pt.y_abs_dev = csv::parse_double(row[2]);
        data.points.push_back(pt);
    }
    return data;
}

void save_patch_leaving_json(const PatchLeavingStat& stat, const std::string& path) {
    json j;
    j["mean_last_irt"] = stat.mean_last_irt;
    j["mean_global_irt"] = stat.mean_global_irt;
    j["ratio"] = stat.ratio;
    j["paired_mean_difference"] = stat.paired_mean_difference;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open patch-leaving JSON for writing: " + path);
    out << j.dump(2) << '\n';
    if (!out) throw IoError("short write to patch-leaving JSON: " + path);
}

PatchLeavingStat load_patch_leaving_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open patch-leaving JSON: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ValidationError("malformed patch-leaving JSON: " + std::string(e.what()));
    }
    PatchLeavingStat stat;
    try {
        stat.mean_last_irt = j.at("mean_last_irt").get<double>();
        stat.mean_global_irt = j.at("mean_global_irt").get<double>();
        stat.ratio = j.at("ratio").get<double>();
        stat.paired_mean_difference = j.at("paired_mean_difference").get<double>();
    } catch (const json::exception& e) {
        throw ValidationError("patch-leaving JSON is missing a field: " + std::string(e.what()));
    }
    return stat;
}

}  // namespace forage
