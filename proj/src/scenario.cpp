#include "treecast/scenario.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "treecast/rng.hpp"

namespace treecast {

namespace {

std::string trim(std::string_view s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

struct ConfigDoc {
    // section -> key -> (value, line)
    std::map<std::string, std::map<std::string, std::pair<std::string, int>>> sections;
    std::vector<std::string> section_order;
};

ConfigDoc parse_ini(std::string_view text) {
    ConfigDoc doc;
    std::istringstream in{std::string(text)};
    std::string line;
    std::string section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
        std::string t = trim(line);
        if (t.empty()) continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw ParseError("unterminated section header", lineno);
            section = trim(std::string_view(t).substr(1, t.size() - 2));
            if (section.empty()) throw ParseError("empty section name", lineno);
            if (!doc.sections.count(section)) doc.section_order.push_back(section);
            doc.sections[section];
            continue;
        }
        auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError("expected key = value", lineno);
        if (section.empty()) throw ParseError("key outside any section", lineno);
        std::string key = trim(std::string_view(t).substr(0, eq));
        std::string value = trim(std::string_view(t).substr(eq + 1));
        if (key.empty()) throw ParseError("empty key", lineno);
        doc.sections[section][key] = {value, lineno};
    }
    return doc;
}

double to_double(const std::string& v, const std::string& what) {
    try {
        size_t used = 0;
        double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(what + ": not a number: '" + v + "'");
    }
}

long long to_int(const std::string& v, const std::string& what) {
    try {
        size_t used = 0;
        long long d = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw ConfigError(what + ": not an integer: '" + v + "'");
    }
}

bool to_bool(const std::string& v, const std::string& what) {
    if (v == "true" || v == "on" || v == "1") return true;
    if (v == "false" || v == "off" || v == "0") return false;
    throw ConfigError(what + ": expected true/false: '" + v + "'");
}

Algorithm parse_algorithm(const std::string& v) {
    if (v == "alg1" || v == "regulated") return Algorithm::Regulated;
    if (v == "alg2" || v == "randomized") return Algorithm::Randomized;
    throw ConfigError("algorithm: expected alg1 or alg2, got '" + v + "'");
}

Selector parse_selector(const std::string& v) {
    if (v == "exact") return Selector::Exact;
    if (v == "approx-level-2") return Selector::ApproxLevel2;
    if (v == "random") return Selector::Random;
    throw ConfigError("selector: expected exact|approx-level-2|random, got '" + v + "'");
}

MeasureMode parse_measure(const std::string& v) {
    if (v == "auto") return MeasureMode::Auto;
    if (v == "on") return MeasureMode::On;
    if (v == "off") return MeasureMode::Off;
    throw ConfigError("measure-optimality: expected auto|on|off, got '" + v + "'");
}

}  // namespace

std::string_view algorithm_name(Algorithm a) {
    return a == Algorithm::Regulated ? "alg1" : "alg2";
}

std::string_view selector_name(Selector s) {
    switch (s) {
        case Selector::Exact: return "exact";
        case Selector::ApproxLevel2: return "approx-level-2";
        case Selector::Random: return "random";
    }
    return "?";
}

std::string_view arrival_name(ArrivalKind k) {
    return k == ArrivalKind::Deterministic ? "deterministic" : "poisson";
}

void Scenario::validate() const {
    if (sessions.empty()) throw ConfigError("no sessions configured");
    if (!(eps1 > 0.0)) throw ConfigError("eps1 must be positive");
    if (!(eps2 > 0.0)) throw ConfigError("eps2 must be positive");
    if (!(gamma >= 1.0)) throw ConfigError("gamma must be >= 1");
    if (!(delta > 0.0 && delta <= 1.0)) throw ConfigError("delta must be in (0, 1]");
    if (slots < 0) throw ConfigError("slots must be >= 0");
    if (!(chunk_bytes > 0.0)) throw ConfigError("chunk-bytes must be positive");
    if (!(slot_seconds > 0.0)) throw ConfigError("slot-seconds must be positive");
    if (control_delay < 0) throw ConfigError("control-delay must be >= 0");
    if (algorithm == Algorithm::Regulated) {
        if (selector == Selector::Random)
            throw ConfigError("selector=random is only valid with alg2");
    } else {
        double min_cap = std::numeric_limits<double>::infinity();
        for (const Link& l : net.links()) min_cap = std::min(min_cap, l.capacity);
        if (net.num_links() > 0 && eps2 >= min_cap)
            throw ConfigError("eps2 must be below the smallest link capacity");
    }
    for (const Session& s : sessions) {
        if (s.receivers.empty())
            throw ConfigError("session " + std::to_string(s.id) + ": no receivers");
        if (std::find(s.receivers.begin(), s.receivers.end(), s.source) != s.receivers.end())
            throw ConfigError("session " + std::to_string(s.id) + ": source listed as receiver");
        if (s.rate < 0.0) throw ConfigError("session " + std::to_string(s.id) + ": negative rate");
    }
    std::vector<int> ids;
    for (const Session& s : sessions) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    if (std::adjacent_find(ids.begin(), ids.end()) != ids.end())
        throw ConfigError("duplicate session id");
}

bool Scenario::measure_enabled() const {
    if (measure_optimality == MeasureMode::On) return true;
    if (measure_optimality == MeasureMode::Off) return false;
    if (net.num_nodes() > 32) return false;
    for (const Session& s : sessions)
        if (s.receivers.size() > 8) return false;
    return true;
}

std::string Scenario::digest() const {
    std::ostringstream canon;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    canon << "topology\n" << serialize_topology(net);
    for (const Session& s : sessions) {
        canon << "session " << s.id << " source=" << net.label(s.source) << " recv=";
        for (NodeId r : s.receivers) canon << net.label(r) << ',';
        canon << " rate=" << num(s.rate) << " arrivals=" << arrival_name(s.arrivals) << '\n';
    }
    canon << "run alg=" << algorithm_name(algorithm) << " sel=" << selector_name(selector)
          << " eps1=" << num(eps1) << " eps2=" << num(eps2) << " gamma=" << num(gamma)
          << " delta=" << num(delta) << " slots=" << slots << " seed=" << seed
          << " chunk=" << num(chunk_bytes) << " slotsec=" << num(slot_seconds)
          << " delay=" << control_delay << " strict=" << strict_gamma
          << " hopdetail=" << record_hop_detail << " measure=" << static_cast<int>(measure_optimality)
          << '\n';
    std::uint64_t h = fnv1a64(canon.str());
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Scenario parse_scenario(std::string_view text, const std::string& base_dir,
                        const ScenarioOverrides& ov) {
    ConfigDoc doc = parse_ini(text);
    Scenario sc;

    auto netsec = doc.sections.find("network");
    if (netsec == doc.sections.end()) throw ConfigError("missing [network] section");
    std::string file;
    std::string capacity_unit = "chunks";
    for (const auto& [key, val] : netsec->second) {
        if (key == "file") file = val.first;
        else if (key == "capacity-unit") capacity_unit = val.first;
        else throw ConfigError("[network] unknown key '" + key + "'");
    }
    if (file.empty()) throw ConfigError("[network] file not set");
    if (capacity_unit != "chunks" && capacity_unit != "mbps")
        throw ConfigError("[network] capacity-unit: expected chunks|mbps");

    // run parameters first: unit conversion needs chunk size and slot length
    auto runsec = doc.sections.find("run");
    if (runsec != doc.sections.end()) {
        for (const auto& [key, val] : runsec->second) {
            const std::string& v = val.first;
            if (key == "algorithm") sc.algorithm = parse_algorithm(v);
            else if (key == "selector") sc.selector = parse_selector(v);
            else if (key == "gamma") sc.gamma = to_double(v, key);
            else if (key == "eps1") sc.eps1 = to_double(v, key);
            else if (key == "eps2") sc.eps2 = to_double(v, key);
            else if (key == "delta") sc.delta = to_double(v, key);
            else if (key == "slots") sc.slots = to_int(v, key);
            else if (key == "seed") sc.seed = static_cast<std::uint64_t>(to_int(v, key));
            else if (key == "chunk-bytes") sc.chunk_bytes = to_double(v, key);
            else if (key == "slot-seconds") sc.slot_seconds = to_double(v, key);
            else if (key == "control-delay") sc.control_delay = static_cast<int>(to_int(v, key));
            else if (key == "strict-gamma") sc.strict_gamma = to_bool(v, key);
            else if (key == "measure-optimality") sc.measure_optimality = parse_measure(v);
            else if (key == "record-hop-detail") sc.record_hop_detail = to_bool(v, key);
            else throw ConfigError("[run] unknown key '" + key + "'");
        }
    }

    std::filesystem::path path(file);
    if (path.is_relative() && !base_dir.empty()) path = std::filesystem::path(base_dir) / path;
    sc.topology_path = path.string();
    try {
        sc.net = load_topology_file(sc.topology_path);
    } catch (const ParseError& e) {
        throw TopologyError(sc.topology_path + ": " + e.what());
    } catch (const ValidationError& e) {
        throw TopologyError(std::string(e.what()));
    }
    const double chunks_per_mbit = 1.0e6 / (sc.chunk_bytes * 8.0);
    if (capacity_unit == "mbps") {
        Network converted;
        for (NodeId v = 0; v < sc.net.num_nodes(); ++v) converted.intern_node(sc.net.label(v));
        for (const Link& l : sc.net.links())
            converted.add_link(l.tail, l.head, l.capacity * chunks_per_mbit * sc.slot_seconds);
        sc.net = std::move(converted);
    }

    for (const std::string& name : doc.section_order) {
        if (name.rfind("session", 0) != 0) continue;
        std::string tag = trim(std::string_view(name).substr(7));
        Session s;
        s.id = tag.empty() ? static_cast<int>(sc.sessions.size())
                           : static_cast<int>(to_int(tag, "session id"));
        bool have_rate = false;
        for (const auto& [key, val] : doc.sections[name]) {
            const std::string& v = val.first;
            if (key == "source") {
                s.source = sc.net.node_of_label(to_int(v, key));
                if (s.source < 0) throw ConfigError("[" + name + "] source node not in topology");
            } else if (key == "receivers") {
                std::istringstream rs(v);
                std::string tok;
                while (rs >> tok) {
                    std::string item = tok;
                    std::replace(item.begin(), item.end(), ',', ' ');
                    std::istringstream is(item);
                    long long label;
                    while (is >> label) {
                        NodeId r = sc.net.node_of_label(label);
                        if (r < 0)
                            throw ConfigError("[" + name + "] receiver " + std::to_string(label) +
                                              " not in topology");
                        s.receivers.push_back(r);
                    }
                }
            } else if (key == "rate") {
                s.rate = to_double(v, key);
                have_rate = true;
            } else if (key == "rate-mbps") {
                s.rate = to_double(v, key) * chunks_per_mbit * sc.slot_seconds;
                have_rate = true;
            } else if (key == "arrivals") {
                if (v == "poisson") s.arrivals = ArrivalKind::Poisson;
                else if (v == "deterministic") s.arrivals = ArrivalKind::Deterministic;
                else throw ConfigError("[" + name + "] arrivals: expected poisson|deterministic");
            } else {
                throw ConfigError("[" + name + "] unknown key '" + key + "'");
            }
        }
        if (s.source < 0) throw ConfigError("[" + name + "] source not set");
        if (!have_rate) throw ConfigError("[" + name + "] rate not set");
        sc.sessions.push_back(std::move(s));
    }
    if (sc.sessions.empty()) throw ConfigError("no [session N] sections");
    std::sort(sc.sessions.begin(), sc.sessions.end(),
              [](const Session& a, const Session& b) { return a.id < b.id; });

    // command-line overrides win over file values
    if (ov.algorithm) sc.algorithm = parse_algorithm(*ov.algorithm);
    if (ov.selector) sc.selector = parse_selector(*ov.selector);
    if (ov.seed) sc.seed = *ov.seed;
    if (ov.slots) sc.slots = *ov.slots;
    if (ov.gamma) sc.gamma = *ov.gamma;
    if (ov.eps1) sc.eps1 = *ov.eps1;
    if (ov.eps2) sc.eps2 = *ov.eps2;
    if (ov.delta) sc.delta = *ov.delta;
    if (ov.control_delay) sc.control_delay = *ov.control_delay;
    if (ov.rate_multiplier)
        for (Session& s : sc.sessions) s.rate *= *ov.rate_multiplier;

    sc.validate();
    return sc;
}

Scenario load_scenario(const std::string& config_path, const ScenarioOverrides& ov) {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot open config file: " + config_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), std::filesystem::path(config_path).parent_path().string(), ov);
}

}  // namespace treecast
