#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "forage/samplers.hpp"
#include "forage/vocabulary.hpp"

namespace forage {

struct FluencyTrace {
    int walk = 0;              // id copied from the source WalkTrace
    std::vector<int> unique;   // first occurrences, in order of appearance
    std::vector<int> tau;      // 1-based raw index of each first occurrence
    std::vector<int> irts;     // irts[m] = tau[m+1] - tau[m]; size |unique| - 1
};

FluencyTrace fluency_trace(const WalkTrace& trace);

struct SwitchAnnotation {
    // switch_at[k]: unique items k-1 and k share no category; [0] is false.
    std::vector<bool> switch_at;
    // Half-open [begin, end) runs over unique positions; boundaries coincide
    // with switch flags and the patches partition the unique sequence.
    std::vector<std::pair<int, int>> patches;
};

SwitchAnnotation detect_switches(const FluencyTrace& ft, const Vocabulary& vocab);

struct SwitchProfile {
    int radius = 5;
    // Slot order: r = -R..-1 then +1..+R (2R slots). mean_ratio is the mean
    // over pooled per-walk-normalized IRTs; 0 with count 0 when no samples.
    std::vector<double> mean_ratio;
    std::vector<long long> count;
};

// r in {-R..-1, +1..+R} <-> slot in [0, 2R).
int profile_slot(int r, int radius);
int profile_position(std::size_t slot, int radius);

SwitchProfile switch_profile(const std::vector<FluencyTrace>& fts,
                             const std::vector<SwitchAnnotation>& anns, int radius);

struct PatchLeavingStat {
    double mean_last_irt = 0.0;    // mean IRT entering each patch's final item
    double mean_global_irt = 0.0;  // mean over all IRTs of all walks
    double ratio = 0.0;            // MVT-consistent when ~1
    // Mean over qualifying patches of (last IRT - that walk's mean IRT).
    double paired_mean_difference = 0.0;
};

PatchLeavingStat patch_leaving_stat(const std::vector<FluencyTrace>& fts,
                                    const std::vector<SwitchAnnotation>& anns);

struct DeviationPoint {
    int walk = 0;
    int x_unique = 0;      // total unique items produced by the walk
    double y_abs_dev = 0;  // mean over patches of |last IRT - walk mean IRT|
};

struct DeviationData {
    std::vector<DeviationPoint> points;
    int skipped_walks = 0;  // walks with no qualifying patch
};

DeviationData deviation_points(const std::vector<FluencyTrace>& fts,
                               const std::vector<SwitchAnnotation>& anns);

// CSV: relative_position,mean_irt_ratio,n (empty ratio cell when n = 0).
void save_switch_profile_csv(const SwitchProfile& profile, const std::string& path);
SwitchProfile load_switch_profile_csv(const std::string& path);

// CSV: walk,x_unique,y_abs_dev.
void save_deviation_csv(const DeviationData& data, const std::string& path);
DeviationData load_deviation_csv(const std::string& path);

// JSON object with exactly the four PatchLeavingStat fields.
void save_patch_leaving_json(const PatchLeavingStat& stat, const std::string& path);
PatchLeavingStat load_patch_leaving_json(const std::string& path);

}  // namespace forage
