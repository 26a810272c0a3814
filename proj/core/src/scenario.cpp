#include "cloudcontrol/scenario.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cloudcontrol/errors.hpp"

namespace cloudcontrol::scenario {

namespace {

using nlohmann::json;
namespace sg = cloudcontrol::signaling;
namespace fi = cloudcontrol::flipit;
namespace vh = cloudcontrol::vehicle;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ScenarioError("scenario: " + path + ": " + what);
}

const json& member(const json& j, const std::string& path, const char* key) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path + "." + key, "missing");
    return *it;
}

/// Numeric leaves may be JSON numbers or decimal strings; strings are
/// converted exactly once here.
double number_at(const json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const std::string& text = j.get_ref<const std::string&>();
        try {
            std::size_t consumed = 0;
            const double value = std::stod(text, &consumed);
            if (consumed != text.size()) fail(path, "trailing characters in number '" + text + "'");
            return value;
        } catch (const std::exception&) {
            fail(path, "not a number: '" + text + "'");
        }
    }
    fail(path, "expected a number or decimal string");
}

double req_number(const json& j, const std::string& path, const char* key) {
    return number_at(member(j, path, key), path + "." + key);
}

double opt_number(const json& j, const std::string& path, const char* key, double fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    return number_at(j.at(key), path + "." + key);
}

std::uint64_t opt_seed(const json& j, const std::string& path, const char* key,
                       std::uint64_t fallback) {
    if (!j.is_object() || !j.contains(key)) return fallback;
    const json& v = j.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    fail(path + "." + key, "expected a non-negative integer seed");
}

sg::SenderTable parse_sender_table(const json& j, const std::string& path) {
    sg::SenderTable table;
    const struct {
        sg::Message m;
        const char* key;
    } messages[] = {{sg::Message::High, "high"}, {sg::Message::Low, "low"}};
    for (const auto& [m, mkey] : messages) {
        const json& row = member(j, path, mkey);
        table.at(m, sg::Action::Trust) = req_number(row, path + "." + mkey, "trust");
        table.at(m, sg::Action::NotTrust) = req_number(row, path + "." + mkey, "not_trust");
    }
    return table;
}

sg::SignalingUtilities parse_signaling(const json& j, const std::string& path) {
    sg::SignalingUtilities u;
    const json& receiver = member(j, path, "receiver");
    const struct {
        sg::CloudType t;
        const char* key;
    } types[] = {{sg::CloudType::Attacker, "attacker"}, {sg::CloudType::Defender, "defender"}};
    for (const auto& [t, tkey] : types) {
        const std::string tpath = path + ".receiver." + tkey;
        const json& per_type = member(receiver, path + ".receiver", tkey);
        const sg::SenderTable rows = parse_sender_table(per_type, tpath);
        for (sg::Message m : {sg::Message::High, sg::Message::Low})
            for (sg::Action a : {sg::Action::Trust, sg::Action::NotTrust})
                u.receiver.at(t, m, a) = rows.at(m, a);
    }
    u.attacker = parse_sender_table(member(j, path, "attacker"), path + ".attacker");
    u.defender = parse_sender_table(member(j, path, "defender"), path + ".defender");
    if (!u.all_finite()) fail(path, "utilities must be finite");
    return u;
}

Policies parse_policies(const json& j, const std::string& path) {
    Policies p;
    if (j.contains("selection")) {
        const std::string mode = member(j, path, "selection").get<std::string>();
        if (mode == "paper")
            p.selection = sg::SelectionPolicy::PaperSelection;
        else if (mode == "enumerate")
            p.selection = sg::SelectionPolicy::Enumerate;
        else
            fail(path + ".selection", "expected 'paper' or 'enumerate'");
    }
    if (j.contains("off_path_belief")) {
        const json& b = j.at("off_path_belief");
        p.off_path_belief.attacker_given_high =
            opt_number(b, path + ".off_path_belief", "attacker_given_high", 1.0);
        p.off_path_belief.attacker_given_low =
            opt_number(b, path + ".off_path_belief", "attacker_given_low", 1.0);
    }
    p.zero_tolerance = opt_number(j, path, "zero_tolerance", p.zero_tolerance);
    p.fixed_point_tolerance = opt_number(j, path, "fixed_point_tolerance", p.fixed_point_tolerance);
    if (j.contains("grid_resolution")) {
        const json& g = j.at("grid_resolution");
        if (!g.is_number_integer()) fail(path + ".grid_resolution", "expected an integer");
        p.grid_resolution = g.get<int>();
        if (p.grid_resolution < 100) fail(path + ".grid_resolution", "must be at least 100");
    }
    if (p.zero_tolerance < 0.0) fail(path + ".zero_tolerance", "must be non-negative");
    if (p.fixed_point_tolerance <= 0.0) fail(path + ".fixed_point_tolerance", "must be positive");
    return p;
}

SimulationBlock parse_simulation(const json& j, const std::string& path) {
    SimulationBlock s;
    if (j.contains("mode")) {
        s.mode = j.at("mode").get<std::string>();
        if (s.mode != "flipit" && s.mode != "cloudcontrol")
            fail(path + ".mode", "expected 'flipit' or 'cloudcontrol'");
    }
    s.horizon = req_number(j, path, "horizon");
    const json& reps = member(j, path, "replications");
    if (!reps.is_number_integer()) fail(path + ".replications", "expected an integer");
    s.replications = reps.get<int>();
    s.seed = opt_seed(j, path, "seed", 0);
    if (j.contains("profile")) {
        const json& prof = j.at("profile");
        fi::PeriodicProfile profile;
        profile.freq_defender = req_number(prof, path + ".profile", "freq_defender");
        profile.freq_attacker = req_number(prof, path + ".profile", "freq_attacker");
        if (prof.contains("attacker_single_move"))
            profile.attacker_single_move = prof.at("attacker_single_move").get<bool>();
        s.profile = profile;
    }
    if (j.contains("value_defender")) s.value_defender = req_number(j, path, "value_defender");
    if (j.contains("value_attacker")) s.value_attacker = req_number(j, path, "value_attacker");
    s.epoch_rate = opt_number(j, path, "epoch_rate", 1.0);
    if (j.contains("tie_break")) {
        const std::string tie = j.at("tie_break").get<std::string>();
        if (tie == "defender")
            s.tie_break = simulate::TieBreak::DefenderWins;
        else if (tie == "attacker")
            s.tie_break = simulate::TieBreak::AttackerWins;
        else
            fail(path + ".tie_break", "expected 'defender' or 'attacker'");
    }
    return s;
}

vh::CloudCommandSource parse_source(const json& j, const std::string& path) {
    vh::CloudCommandSource source;
    const std::string kind = member(j, path, "kind").get<std::string>();
    if (kind == "faithful")
        source.kind = vh::CloudSourceKind::Faithful;
    else if (kind == "noisy_benign")
        source.kind = vh::CloudSourceKind::NoisyBenign;
    else if (kind == "adversarial_offset")
        source.kind = vh::CloudSourceKind::AdversarialOffset;
    else
        fail(path + ".kind", "expected 'faithful', 'noisy_benign' or 'adversarial_offset'");
    source.offset = opt_number(j, path, "offset", 0.0);
    source.noise_bound = opt_number(j, path, "noise_bound", 0.0);
    return source;
}

VehicleBlock parse_vehicle(const json& j, const std::string& path) {
    VehicleBlock v;
    v.params.speed = req_number(j, path, "speed");
    v.params.cg_to_rear = req_number(j, path, "cg_to_rear");
    v.params.wheelbase = req_number(j, path, "wheelbase");
    const json& gains = member(j, path, "gains");
    v.gains.k1 = req_number(gains, path + ".gains", "k1");
    v.gains.k2 = req_number(gains, path + ".gains", "k2");
    v.threshold = req_number(j, path, "threshold");
    const json& initial = member(j, path, "initial");
    v.initial.lateral = req_number(initial, path + ".initial", "lateral");
    v.initial.heading = req_number(initial, path + ".initial", "heading");
    const json& receiver = member(j, path, "receiver");
    v.receiver.trust_given_high = req_number(receiver, path + ".receiver", "trust_given_high");
    v.receiver.trust_given_low = req_number(receiver, path + ".receiver", "trust_given_low");
    const json& cloud = member(j, path, "cloud");
    v.schedule.attacker_probability =
        req_number(cloud, path + ".cloud", "attacker_probability");
    v.schedule.defender_source =
        parse_source(member(cloud, path + ".cloud", "defender_source"), path + ".cloud.defender_source");
    v.schedule.attacker_source =
        parse_source(member(cloud, path + ".cloud", "attacker_source"), path + ".cloud.attacker_source");
    v.dt = req_number(j, path, "dt");
    v.horizon = req_number(j, path, "horizon");
    v.seed = opt_seed(j, path, "seed", 0);
    v.small_angle_bound = opt_number(j, path, "small_angle_bound", 0.3);
    v.divergence_bound = opt_number(j, path, "divergence_bound", 1e6);
    return v;
}

json sender_table_json(const sg::SenderTable& t) {
    json j;
    for (sg::Message m : {sg::Message::High, sg::Message::Low}) {
        j[sg::to_string(m)] = {{"trust", t.at(m, sg::Action::Trust)},
                               {"not_trust", t.at(m, sg::Action::NotTrust)}};
    }
    return j;
}

json source_json(const vh::CloudCommandSource& s) {
    json j{{"kind", vh::to_string(s.kind)}};
    if (s.kind == vh::CloudSourceKind::AdversarialOffset) j["offset"] = s.offset;
    if (s.kind == vh::CloudSourceKind::NoisyBenign) j["noise_bound"] = s.noise_bound;
    return j;
}

json scenario_json(const Scenario& s) {
    json receiver;
    for (sg::CloudType t : {sg::CloudType::Attacker, sg::CloudType::Defender}) {
        json per_type;
        for (sg::Message m : {sg::Message::High, sg::Message::Low})
            per_type[sg::to_string(m)] = {
                {"trust", s.utilities.receiver.at(t, m, sg::Action::Trust)},
                {"not_trust", s.utilities.receiver.at(t, m, sg::Action::NotTrust)}};
        receiver[sg::to_string(t)] = per_type;
    }

    json root;
    root["signaling"] = {{"receiver", receiver},
                         {"attacker", sender_table_json(s.utilities.attacker)},
                         {"defender", sender_table_json(s.utilities.defender)}};

    json flip{{"move_cost_defender", s.move_cost_defender},
              {"move_cost_attacker", s.move_cost_attacker}};
    if (s.value_defender) flip["value_defender"] = *s.value_defender;
    if (s.value_attacker) flip["value_attacker"] = *s.value_attacker;
    root["flipit"] = flip;

    root["policies"] = {
        {"selection",
         s.policies.selection == sg::SelectionPolicy::PaperSelection ? "paper" : "enumerate"},
        {"off_path_belief",
         {{"attacker_given_high", s.policies.off_path_belief.attacker_given_high},
          {"attacker_given_low", s.policies.off_path_belief.attacker_given_low}}},
        {"zero_tolerance", s.policies.zero_tolerance},
        {"fixed_point_tolerance", s.policies.fixed_point_tolerance},
        {"grid_resolution", s.policies.grid_resolution}};

    if (s.simulation) {
        const SimulationBlock& sim = *s.simulation;
        json block{{"mode", sim.mode},
                   {"horizon", sim.horizon},
                   {"replications", sim.replications},
                   {"seed", sim.seed},
                   {"epoch_rate", sim.epoch_rate},
                   {"tie_break",
                    sim.tie_break == simulate::TieBreak::DefenderWins ? "defender" : "attacker"}};
        if (sim.profile)
            block["profile"] = {{"freq_defender", sim.profile->freq_defender},
                                {"freq_attacker", sim.profile->freq_attacker},
                                {"attacker_single_move", sim.profile->attacker_single_move}};
        if (sim.value_defender) block["value_defender"] = *sim.value_defender;
        if (sim.value_attacker) block["value_attacker"] = *sim.value_attacker;
        root["simulation"] = block;
    }

    if (s.vehicle_block) {
        const VehicleBlock& v = *s.vehicle_block;
        root["vehicle"] = {
            {"speed", v.params.speed},
            {"cg_to_rear", v.params.cg_to_rear},
            {"wheelbase", v.params.wheelbase},
            {"gains", {{"k1", v.gains.k1}, {"k2", v.gains.k2}}},
            {"threshold", v.threshold},
            {"initial", {{"lateral", v.initial.lateral}, {"heading", v.initial.heading}}},
            {"receiver",
             {{"trust_given_high", v.receiver.trust_given_high},
              {"trust_given_low", v.receiver.trust_given_low}}},
            {"cloud",
             {{"attacker_probability", v.schedule.attacker_probability},
              {"defender_source", source_json(v.schedule.defender_source)},
              {"attacker_source", source_json(v.schedule.attacker_source)}}},
            {"dt", v.dt},
            {"horizon", v.horizon},
            {"seed", v.seed},
            {"small_angle_bound", v.small_angle_bound},
            {"divergence_bound", v.divergence_bound}};
    }
    return root;
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ScenarioError(std::string("scenario: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ScenarioError("scenario: top level must be an object");

    Scenario s;
    s.utilities = parse_signaling(member(root, "$", "signaling"), "signaling");
    const json& flip = member(root, "$", "flipit");
    s.move_cost_defender = req_number(flip, "flipit", "move_cost_defender");
    s.move_cost_attacker = req_number(flip, "flipit", "move_cost_attacker");
    if (s.move_cost_defender <= 0.0 || s.move_cost_attacker <= 0.0)
        fail("flipit", "move costs must be strictly positive");
    if (flip.contains("value_defender"))
        s.value_defender = req_number(flip, "flipit", "value_defender");
    if (flip.contains("value_attacker"))
        s.value_attacker = req_number(flip, "flipit", "value_attacker");
    if (root.contains("policies")) s.policies = parse_policies(root.at("policies"), "policies");
    if (root.contains("simulation"))
        s.simulation = parse_simulation(root.at("simulation"), "simulation");
    if (root.contains("vehicle")) s.vehicle_block = parse_vehicle(root.at("vehicle"), "vehicle");
    return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw ScenarioError("scenario: cannot open " + file.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

std::string serialize_scenario(const Scenario& s) {
    return scenario_json(s).dump(2);
}

gestalt::CloudControlGame to_game(const Scenario& s) {
    gestalt::CloudControlGame game;
    game.signaling_utilities = s.utilities;
    game.move_cost_defender = s.move_cost_defender;
    game.move_cost_attacker = s.move_cost_attacker;
    game.selection_policy = s.policies.selection;
    game.off_path_policy = s.policies.off_path_belief;
    game.grid_resolution = s.policies.grid_resolution;
    game.fixed_point_tolerance = s.policies.fixed_point_tolerance;
    game.zero_tolerance = s.policies.zero_tolerance;
    return game;
}

std::string scenario_fingerprint(const Scenario& s) {
    const std::uint64_t hash = fnv1a64(scenario_json(s).dump());
    std::ostringstream out;
    out << "fnv1a64:" << std::hex << std::setw(16) << std::setfill('0') << hash;
    return out.str();
}

}  // namespace cloudcontrol::scenario
