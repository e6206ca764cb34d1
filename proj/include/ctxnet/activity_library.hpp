#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "ctxnet/network.hpp"

namespace ctxnet {

// Physical sensors of the home and what they observe.
struct SensorCatalog {
    struct RoomPir {
        std::string sensor;
        std::string room;
    };
    struct Contact {
        std::string sensor;
        std::string furniture;  // concept; the mapped statement is <furniture>Used
    };

    std::vector<RoomPir> room_pirs;
    std::vector<Contact> contacts;
    std::string brightness_sensor;
    double brightness_threshold = 50.0;
    std::string bed_pir;

    // PIR1..PIR4 for Kitchen, LivingRoom, BedRoom, BathRoom; contacts for the
    // kitchen cabinet, bed and toilet seat; a brightness sensor on the TV and
    // a PIR over the bed.
    static SensorCatalog standard();

    // Throws ModelError if a room has more than one PIR or sensor ids clash.
    void validate() const;
};

inline constexpr std::string_view kPlaceId = "place";
inline constexpr Duration kDefaultDwell = std::chrono::seconds(60);

enum class ActivityModel { A1, A2, A3, A4, A5 };

inline constexpr ActivityModel kAllActivityModels[] = {ActivityModel::A1, ActivityModel::A2,
                                                       ActivityModel::A3, ActivityModel::A4,
                                                       ActivityModel::A5};

std::string_view to_string(ActivityModel model);
// Throws ModelError on anything but "A1".."A5".
ActivityModel parse_activity_model(std::string_view id);

// Event fired by the place node while the occupant is in `room`.
std::string presence_event(std::string_view room);

Node build_place(const SensorCatalog& catalog,
                 const IntervalTable& intervals = IntervalTable::standard());

Node build_activity(ActivityModel which, Duration dwell = kDefaultDwell,
                    const IntervalTable& intervals = IntervalTable::standard());

// Room whose presence event gates the model.
std::string_view context_room(ActivityModel which);

// Place plus the given activity models, one edge place->A_i carrying exactly
// the place-produced names A_i reads, and one listener per model.
NetworkGraph build_network(const SensorCatalog& catalog,
                           const std::vector<ActivityModel>& models,
                           Duration dwell = kDefaultDwell, Mode mode = Mode::CAE,
                           const IntervalTable& intervals = IntervalTable::standard());

// The shipped six-node network "home": place + A1..A5.
NetworkGraph build_home_network(Mode mode = Mode::CAE);

}  // namespace ctxnet
