#include "ctxnet/activity_library.hpp"

#include <algorithm>
#include <set>

namespace ctxnet {

SensorCatalog SensorCatalog::standard() {
    SensorCatalog c;
    c.room_pirs = {{"PIR1", "Kitchen"}, {"PIR2", "LivingRoom"}, {"PIR3", "BedRoom"}, {"PIR4", "BathRoom"}};
    c.contacts = {{"C1", "kitchenCabinet"}, {"C2", "bed"}, {"C3", "toiletSeat"}};
    c.brightness_sensor = "brightness";
    c.brightness_threshold = 50.0;
    c.bed_pir = "PIR5";
    return c;
}

void SensorCatalog::validate() const {
    std::set<std::string> rooms;
    std::set<std::string> ids;
    const auto claim = [&](const std::string& id) {
        if (id.empty()) throw ModelError("sensor", "empty sensor id");
        if (!ids.insert(id).second) throw ModelError("sensor", "sensor id '" + id + "' used twice");
    };
    for (const auto& p : room_pirs) {
        if (p.room.empty()) throw ModelError("room", "empty room name");
        if (!rooms.insert(p.room).second)
            throw ModelError("room", "room '" + p.room + "' has more than one room PIR");
        claim(p.sensor);
    }
    for (const auto& c : contacts) {
        if (c.furniture.empty()) throw ModelError("furniture", "empty furniture concept");
        claim(c.sensor);
    }
    if (!brightness_sensor.empty()) claim(brightness_sensor);
    if (!bed_pir.empty()) claim(bed_pir);
}

std::string_view to_string(ActivityModel model) {
    switch (model) {
        case ActivityModel::A1: return "A1";
        case ActivityModel::A2: return "A2";
        case ActivityModel::A3: return "A3";
        case ActivityModel::A4: return "A4";
        case ActivityModel::A5: return "A5";
    }
    return "?";
}

ActivityModel parse_activity_model(std::string_view id) {
    for (auto m : kAllActivityModels)
        if (to_string(m) == id) return m;
    throw ModelError("model", "unknown activity model '" + std::string(id) + "'");
}

std::string presence_event(std::string_view room) { return "humanIn_" + std::string(room); }

Node build_place(const SensorCatalog& catalog, const IntervalTable& intervals) {
    catalog.validate();
    NodeDef def;
    def.id = std::string(kPlaceId);
    for (const auto& p : catalog.room_pirs) {
        SensorMap m;
        m.sensor = p.sensor;
        m.target = "isIn_" + p.room;
        m.kind = MapKind::Location;
        m.room = p.room;
        def.maps.push_back(std::move(m));
    }
    for (const auto& c : catalog.contacts) {
        SensorMap m;
        m.sensor = c.sensor;
        m.target = c.furniture + "Used";
        m.kind = MapKind::Contact;
        def.maps.push_back(std::move(m));
    }
    if (!catalog.brightness_sensor.empty()) {
        SensorMap m;
        m.sensor = catalog.brightness_sensor;
        m.target = "highBrightnessTV";
        m.kind = MapKind::Threshold;
        m.threshold = catalog.brightness_threshold;
        def.maps.push_back(std::move(m));
    }
    if (!catalog.bed_pir.empty()) {
        SensorMap m;
        m.sensor = catalog.bed_pir;
        m.target = "motionOnBed";
        m.kind = MapKind::Motion;
        def.maps.push_back(std::move(m));
    }
    for (const auto& p : catalog.room_pirs)
        def.events.push_back({presence_event(p.room), {Atom::is("isIn_" + p.room, true)}});
    return Node(std::move(def), intervals);
}

namespace {

struct LabelledHead {
    DayLabel label;
    const char* rule_id;
    const char* head;
};

// Dwell in the room, use of the furniture at least `dwell` after entering,
// and the furniture use falling in the rule's day interval.
void add_furniture_rules(NodeDef& def, const std::string& location, const std::string& used,
                         Duration dwell, std::initializer_list<LabelledHead> heads) {
    for (const auto& h : heads) {
        def.rules.push_back({h.rule_id,
                             {Atom::held_for(location, dwell), Atom::is(used, true),
                              Atom::occurred_after(used, location, dwell),
                              Atom::in_interval(used, h.label)},
                             h.head});
    }
}

}  // namespace

std::string_view context_room(ActivityModel which) {
    switch (which) {
        case ActivityModel::A1: return "Kitchen";
        case ActivityModel::A2: return "LivingRoom";
        case ActivityModel::A3:
        case ActivityModel::A4: return "BedRoom";
        case ActivityModel::A5: return "BathRoom";
    }
    return "";
}

Node build_activity(ActivityModel which, Duration dwell, const IntervalTable& intervals) {
    if (dwell.count() <= 0) throw ModelError("dwell", "dwell must be positive");
    NodeDef def;
    def.id = std::string(to_string(which));
    switch (which) {
        case ActivityModel::A1:
            add_furniture_rules(def, "isIn_Kitchen", "kitchenCabinetUsed", dwell,
                                {{DayLabel::Morning, "breakfast", "MakingBreakfast"},
                                 {DayLabel::Afternoon, "lunch", "MakingLunch"},
                                 {DayLabel::Evening, "dinner", "MakingDinner"}});
            break;
        case ActivityModel::A2:
            def.rules.push_back({"watching_tv",
                                 {Atom::held_for("isIn_LivingRoom", dwell),
                                  Atom::fresh_within("motion_LivingRoom", dwell),
                                  Atom::is("highBrightnessTV", true),
                                  Atom::occurred_after("highBrightnessTV", "isIn_LivingRoom", dwell)},
                                 "WatchingTV"});
            break;
        case ActivityModel::A3:
            add_furniture_rules(def, "isIn_BedRoom", "bedUsed", dwell,
                                {{DayLabel::Morning, "nap_morning", "TakingNapMorning"},
                                 {DayLabel::Afternoon, "nap_afternoon", "TakingNapAfternoon"},
                                 {DayLabel::Evening, "nap_evening", "TakingNapEvening"}});
            break;
        case ActivityModel::A4:
            // No room dwell: bed use plus bed motion persisting past the dwell.
            def.rules.push_back({"movement",
                                 {Atom::is("bedUsed", true),
                                  Atom::occurred_after("motionOnBed", "bedUsed", dwell)},
                                 "MovementDuringNap"});
            break;
        case ActivityModel::A5:
            add_furniture_rules(def, "isIn_BathRoom", "toiletSeatUsed", dwell,
                                {{DayLabel::Morning, "visit_morning", "BathroomVisitMorning"},
                                 {DayLabel::Afternoon, "visit_afternoon", "BathroomVisitAfternoon"},
                                 {DayLabel::Evening, "visit_evening", "BathroomVisitEvening"},
                                 {DayLabel::Night, "visit_night", "BathroomVisitNight"}});
            break;
    }
    return Node(std::move(def), intervals);
}

NetworkGraph build_network(const SensorCatalog& catalog, const std::vector<ActivityModel>& models,
                           Duration dwell, Mode mode, const IntervalTable& intervals) {
    std::vector<Node> nodes;
    nodes.push_back(build_place(catalog, intervals));
    const auto place_names = nodes.front().definition().local_names();

    std::vector<Edge> edges;
    std::vector<Listener> listeners;
    for (auto model : models) {
        Node node = build_activity(model, dwell, intervals);
        Edge e{std::string(kPlaceId), node.id(), {}};
        for (const auto& r : node.definition().rules)
            for (const auto& a : r.body)
                for (auto n : a.names()) {
                    const bool from_place =
                        std::find(place_names.begin(), place_names.end(), n) != place_names.end();
                    if (from_place && !e.carries_name(n)) e.carries.emplace_back(n);
                }
        edges.push_back(std::move(e));
        listeners.push_back(
            {std::string(kPlaceId), presence_event(context_room(model)), node.id()});
        nodes.push_back(std::move(node));
    }
    return NetworkGraph("home", std::move(nodes), std::move(edges), std::move(listeners), mode);
}

NetworkGraph build_home_network(Mode mode) {
    return build_network(SensorCatalog::standard(),
                         {std::begin(kAllActivityModels), std::end(kAllActivityModels)},
                         kDefaultDwell, mode);
}

}  // namespace ctxnet
