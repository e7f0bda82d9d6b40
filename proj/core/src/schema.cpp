#include "fairpsm/schema.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "fairpsm/errors.hpp"

namespace fairpsm {

using nlohmann::json;

namespace {

std::optional<double> parse_number(const std::string& raw) {
    const char* begin = raw.data();
    const char* end = raw.data() + raw.size();
    while (begin < end && (*begin == ' ' || *begin == '\t')) ++begin;
    while (end > begin && (end[-1] == ' ' || end[-1] == '\t')) --end;
    double value = 0;
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || begin == end) return std::nullopt;
    return value;
}

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

ValueMatch parse_match(const json& j, const std::string& context) {
    ValueMatch m;
    if (j.is_string()) {
        m.op = ValueMatch::Op::equals;
        m.text = j.get<std::string>();
        return m;
    }
    if (!j.is_object()) throw ConfigError("schema: " + context + " must be a string or an object");
    if (j.contains("equals")) {
        m.op = ValueMatch::Op::equals;
        const auto& v = j.at("equals");
        m.text = v.is_string() ? v.get<std::string>() : v.dump();
        return m;
    }
    if (!j.contains("op") || !j.contains("value")) {
        throw ConfigError("schema: " + context + " needs either \"equals\" or \"op\"+\"value\"");
    }
    const std::string op = j.at("op").get<std::string>();
    if (op == "<") m.op = ValueMatch::Op::lt;
    else if (op == "<=") m.op = ValueMatch::Op::le;
    else if (op == ">") m.op = ValueMatch::Op::gt;
    else if (op == ">=") m.op = ValueMatch::Op::ge;
    else throw ConfigError("schema: " + context + " has unknown op \"" + op + "\"");
    m.cutoff = j.at("value").get<double>();
    return m;
}

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open schema file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("schema " + path + ": " + e.what());
    }
    return j;
}

} // namespace

bool ValueMatch::matches(const std::string& raw) const {
    if (op == Op::equals) return trim(raw) == text;
    auto value = parse_number(raw);
    if (!value) return false;
    switch (op) {
        case Op::lt: return *value < cutoff;
        case Op::le: return *value <= cutoff;
        case Op::gt: return *value > cutoff;
        case Op::ge: return *value >= cutoff;
        default: return false;
    }
}

std::string ValueMatch::describe() const {
    switch (op) {
        case Op::equals: return "== \"" + text + "\"";
        case Op::lt: return "< " + std::to_string(cutoff);
        case Op::le: return "<= " + std::to_string(cutoff);
        case Op::gt: return "> " + std::to_string(cutoff);
        case Op::ge: return ">= " + std::to_string(cutoff);
    }
    return "?";
}

DatasetSchema parse_schema(const std::string& json_text, const std::string& protected_attr) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("schema: ") + e.what());
    }

    DatasetSchema schema;
    schema.name = j.at("name").get<std::string>();
    schema.label_column = j.at("label").at("column").get<std::string>();
    schema.favorable_value = parse_match(j.at("label").at("favorable"), "label.favorable");

    // "protected" is either one attribute or a map of named candidates.
    const auto& prot = j.at("protected");
    json chosen;
    if (prot.contains("column")) {
        chosen = prot;
        if (!protected_attr.empty() && protected_attr != prot.at("column").get<std::string>()) {
            throw ConfigError("schema " + schema.name + ": protected attribute \"" + protected_attr +
                              "\" not defined (only \"" + prot.at("column").get<std::string>() + "\")");
        }
    } else {
        std::string key = protected_attr;
        if (key.empty()) key = j.at("default_protected").get<std::string>();
        if (!prot.contains(key)) {
            throw ConfigError("schema " + schema.name + ": protected attribute \"" + key + "\" not defined");
        }
        chosen = prot.at(key);
    }
    schema.protected_attribute = chosen.at("column").get<std::string>();
    schema.privileged_value = parse_match(chosen.at("privileged"), "protected.privileged");

    if (j.contains("features")) {
        for (const auto& f : j.at("features")) {
            FeatureColumn col;
            col.name = f.at("column").get<std::string>();
            const std::string kind = f.value("kind", "numeric");
            if (kind == "numeric") col.kind = FeatureKind::numeric;
            else if (kind == "categorical") col.kind = FeatureKind::categorical;
            else throw ConfigError("schema " + schema.name + ": unknown feature kind \"" + kind + "\"");
            if (f.contains("categories")) {
                for (const auto& c : f.at("categories")) col.categories.push_back(c.get<std::string>());
            }
            schema.feature_columns.push_back(std::move(col));
        }
    }
    schema.auto_features = j.value("auto_features", false);
    if (schema.feature_columns.empty() && !schema.auto_features) {
        throw ConfigError("schema " + schema.name + ": no features listed and auto_features is off");
    }
    schema.include_protected_in_features = j.value("include_protected_in_features", true);
    if (j.contains("missing_markers")) {
        schema.missing_markers.clear();
        for (const auto& m : j.at("missing_markers")) schema.missing_markers.push_back(m.get<std::string>());
    }
    return schema;
}

DatasetSchema load_schema(const std::string& path, const std::string& protected_attr) {
    return parse_schema(read_json_file(path).dump(), protected_attr);
}

std::vector<std::string> schema_protected_choices(const std::string& path) {
    json j = read_json_file(path);
    std::vector<std::string> names;
    const auto& prot = j.at("protected");
    if (prot.contains("column")) {
        names.push_back(prot.at("column").get<std::string>());
    } else {
        for (auto it = prot.begin(); it != prot.end(); ++it) names.push_back(it.key());
    }
    return names;
}

} // namespace fairpsm
