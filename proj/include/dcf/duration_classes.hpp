#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "dcf/airtime.hpp"
#include "dcf/scenario.hpp"

namespace dcf {

/// A group of stations whose frames occupy the channel equally long.
/// `index` is 1-based with index 1 = slowest (longest occupancy).
struct DurationClass {
    int index = 0;
    std::vector<int> member_ids;       // station ids
    std::vector<std::size_t> members;  // positions in Scenario::stations
    double duration = 0.0;             // longest member full-frame airtime (s)
};

struct DurationClassMap {
    std::vector<DurationClass> classes;      // sorted by decreasing duration
    std::vector<std::size_t> class_of;       // station position -> class position

    [[nodiscard]] std::size_t class_count() const { return classes.size(); }
};

/// Groups stations into occupancy-duration classes. Membership keys on the
/// payload airtime (8*PL/R) with a 1 us tolerance; the class duration is the
/// longest full-frame airtime among members, which is what a collision of
/// that class occupies.
inline DurationClassMap build_duration_classes(const Scenario& sc) {
    constexpr double kTolerance = 1e-6;  // one propagation delay

    const std::size_t n = sc.stations.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return payload_airtime(sc.stations[a]) > payload_airtime(sc.stations[b]);
    });

    DurationClassMap map;
    map.class_of.assign(n, 0);
    double anchor = 0.0;
    for (std::size_t pos : order) {
        const double key = payload_airtime(sc.stations[pos]);
        if (map.classes.empty() || anchor - key > kTolerance) {
            map.classes.push_back({});
            anchor = key;
        }
        auto& cls = map.classes.back();
        cls.members.push_back(pos);
        cls.member_ids.push_back(sc.stations[pos].id);
        cls.duration = std::max(cls.duration, data_airtime(sc.stations[pos], sc.params));
    }

    // Payload-airtime order and full-frame order can disagree for exotic
    // rate/payload mixes; the class ranking is by full-frame duration.
    std::sort(map.classes.begin(), map.classes.end(),
              [](const DurationClass& a, const DurationClass& b) { return a.duration > b.duration; });

    for (std::size_t c = 0; c < map.classes.size(); ++c) {
        map.classes[c].index = static_cast<int>(c) + 1;
        for (std::size_t pos : map.classes[c].members) map.class_of[pos] = c;
    }
    return map;
}

}  // namespace dcf
