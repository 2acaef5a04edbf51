#include "ncerg/suites.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>
#include <thread>

#include "ncerg/errors.hpp"

namespace ncerg {

const std::vector<std::string>& suite_names() {
    static const std::vector<std::string> names = {
        "cuculescu",  "cz",        "khintchine",       "weak11",
        "bmo",        "strongpp",  "thm11",            "thm13-lamperti",
        "prop16-extension", "transference", "jor-l2", "dilation"};
    return names;
}

int worker_count() {
    if (const char* env = std::getenv("NCERG_THREADS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

const char* config_schema_text() {
    return R"JSON({
  "type": "object",
  "required": ["suite", "seed"],
  "additionalProperties": false,
  "properties": {
    "suite": {
      "type": "string",
      "enum": ["cuculescu", "cz", "khintchine", "weak11", "bmo", "strongpp",
               "thm11", "thm13-lamperti", "prop16-extension", "transference",
               "jor-l2", "dilation", "all"]
    },
    "seed": {"type": "integer"},
    "shapes": {
      "type": "array",
      "items": {
        "type": "object",
        "required": ["blocks", "weights"],
        "additionalProperties": false,
        "properties": {
          "blocks": {"type": "array", "items": {"type": "integer"}},
          "weights": {"type": "array", "items": {"type": "number"}}
        }
      }
    },
    "exponents": {"type": "array", "items": {"type": "number"}},
    "ensemble": {"type": "integer"},
    "sequence_length": {"type": "integer"},
    "sequence_max": {"type": "integer"},
    "sequence_kind": {
      "type": "string",
      "enum": ["dyadic", "arithmetic", "random", "adversarial", "mixed"]
    },
    "lambda_factors": {"type": "array", "items": {"type": "number"}},
    "window": {"type": "integer"},
    "tolerances": {"type": "object"}
  }
})JSON";
}

namespace {

std::string json_type_name(const njson& v) {
    if (v.is_object()) return "object";
    if (v.is_array()) return "array";
    if (v.is_string()) return "string";
    if (v.is_boolean()) return "boolean";
    if (v.is_number_integer() || v.is_number_unsigned()) return "integer";
    if (v.is_number()) return "number";
    return "null";
}

} // namespace

void validate_against_schema(const njson& value, const njson& schema,
                             const std::string& where) {
    if (schema.contains("type")) {
        const std::string want = schema["type"].get<std::string>();
        const std::string got = json_type_name(value);
        const bool ok = (want == got) || (want == "number" && got == "integer");
        if (!ok)
            throw ConfigInvalid(where + ": expected " + want + ", got " + got);
    }
    if (schema.contains("enum")) {
        bool ok = false;
        for (const auto& cand : schema["enum"])
            if (cand == value) ok = true;
        if (!ok) throw ConfigInvalid(where + ": value not in the allowed set");
    }
    if (value.is_object()) {
        if (schema.contains("required"))
            for (const auto& key : schema["required"])
                if (!value.contains(key.get<std::string>()))
                    throw ConfigInvalid(where + ": missing required field '" +
                                        key.get<std::string>() + "'");
        const njson props =
            schema.contains("properties") ? schema["properties"] : njson::object();
        const bool closed = schema.contains("additionalProperties") &&
                            schema["additionalProperties"].is_boolean() &&
                            !schema["additionalProperties"].get<bool>();
        for (const auto& [key, sub] : value.items()) {
            if (props.contains(key)) {
                validate_against_schema(sub, props[key], where + "." + key);
            } else if (closed) {
                throw ConfigInvalid(where + ": unknown field '" + key + "'");
            }
        }
    }
    if (value.is_array() && schema.contains("items")) {
        size_t i = 0;
        for (const auto& item : value)
            validate_against_schema(item, schema["items"], where + "[" + std::to_string(i++) + "]");
    }
}

njson config_to_json(const SuiteConfig& c) {
    njson j;
    j["suite"] = c.suite;
    j["seed"] = c.seed;
    njson shapes = njson::array();
    for (const auto& s : c.shapes) shapes.push_back(shape_to_json(s));
    j["shapes"] = std::move(shapes);
    j["exponents"] = c.exponents;
    j["ensemble"] = c.ensemble;
    j["sequence_length"] = c.sequence_length;
    j["sequence_max"] = c.sequence_max;
    j["sequence_kind"] = c.sequence_kind;
    j["lambda_factors"] = c.lambda_factors;
    j["window"] = c.window;
    j["tolerances"] = c.tolerance_overrides;
    return j;
}

SuiteConfig config_from_json(const njson& j) {
    validate_against_schema(j, njson::parse(config_schema_text()));
    SuiteConfig base = default_config(j.at("suite").get<std::string>());
    base.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("shapes")) {
        base.shapes.clear();
        for (const auto& s : j["shapes"]) base.shapes.push_back(shape_from_json(s));
        if (base.shapes.empty()) throw ConfigInvalid("config: shapes must be nonempty");
    }
    if (j.contains("exponents")) {
        base.exponents = j["exponents"].get<std::vector<double>>();
        for (double p : base.exponents)
            if (!(p >= 1.0)) throw ConfigInvalid("config: exponents must satisfy p >= 1");
    }
    if (j.contains("ensemble")) {
        base.ensemble = j["ensemble"].get<int>();
        if (base.ensemble < 1) throw ConfigInvalid("config: ensemble must be >= 1");
    }
    if (j.contains("sequence_length")) {
        base.sequence_length = j["sequence_length"].get<int>();
        if (base.sequence_length < 2) throw ConfigInvalid("config: sequence_length must be >= 2");
    }
    if (j.contains("sequence_max")) {
        base.sequence_max = j["sequence_max"].get<long>();
        if (base.sequence_max < 2) throw ConfigInvalid("config: sequence_max must be >= 2");
    }
    if (j.contains("sequence_kind")) base.sequence_kind = j["sequence_kind"].get<std::string>();
    if (j.contains("lambda_factors"))
        base.lambda_factors = j["lambda_factors"].get<std::vector<double>>();
    if (j.contains("window")) {
        base.window = j["window"].get<int>();
        if (base.window < 1 || base.window > 10)
            throw ConfigInvalid("config: window must lie in [1, 10]");
    }
    if (j.contains("tolerances")) base.tolerance_overrides = j["tolerances"];
    return base;
}

bool SuiteReport::all_pass() const {
    for (const auto& c : checks)
        if (!c.pass) return false;
    return true;
}

const CheckRecord* SuiteReport::find(const std::string& name) const {
    for (const auto& c : checks)
        if (c.name == name) return &c;
    return nullptr;
}

njson report_to_json(const SuiteReport& r) {
    njson j;
    j["suite"] = r.suite;
    j["seed"] = r.seed;
    j["fingerprint"] = r.fingerprint;
    j["wall_seconds"] = r.wall_seconds;
    njson checks = njson::array();
    for (const auto& c : r.checks) {
        njson cj;
        cj["name"] = c.name;
        cj["instances"] = c.instances;
        cj["worst_margin"] = c.worst_margin;
        cj["empirical_constant"] = c.empirical_constant;
        cj["pass"] = c.pass;
        cj["margins"] = c.margins;
        checks.push_back(std::move(cj));
    }
    j["checks"] = std::move(checks);
    njson curves = njson::array();
    for (const auto& c : r.curves) {
        njson cj;
        cj["name"] = c.name;
        njson pts = njson::array();
        for (auto& [x, y] : c.points) pts.push_back(njson::array({x, y}));
        cj["points"] = std::move(pts);
        curves.push_back(std::move(cj));
    }
    j["curves"] = std::move(curves);
    return j;
}

njson merge_reports(const std::vector<njson>& reports) {
    njson merged;
    njson arr = njson::array();
    for (const auto& r : reports) {
        bool dup = false;
        for (const auto& have : arr)
            if (have == r) dup = true;
        if (!dup) arr.push_back(r);
    }
    merged["reports"] = std::move(arr);
    return merged;
}

std::string reports_to_csv(const njson& merged) {
    std::ostringstream out;
    out << "suite,check,instance,margin,pass\n";
    for (const auto& rep : merged.at("reports")) {
        const std::string suite = rep.at("suite").get<std::string>();
        for (const auto& check : rep.at("checks")) {
            const std::string name = check.at("name").get<std::string>();
            const bool pass = check.at("pass").get<bool>();
            const auto& margins = check.at("margins");
            for (size_t i = 0; i < margins.size(); ++i) {
                out << suite << ',' << name << ',' << i << ','
                    << margins.at(i).get<double>() << ',' << (pass ? 1 : 0) << '\n';
            }
        }
    }
    return out.str();
}

std::string plot_data_csv(const njson& merged) {
    std::ostringstream out;
    out << "suite,curve,x,y\n";
    for (const auto& rep : merged.at("reports")) {
        const std::string suite = rep.at("suite").get<std::string>();
        for (const auto& curve : rep.at("curves")) {
            const std::string name = curve.at("name").get<std::string>();
            for (const auto& pt : curve.at("points"))
                out << suite << ',' << name << ',' << pt.at(0).get<double>() << ','
                    << pt.at(1).get<double>() << '\n';
        }
    }
    return out.str();
}

std::string constants_to_csv(const std::vector<ConstantRow>& rows) {
    std::ostringstream out;
    out << "p,class,length,max-ratio,mean-ratio,plateau-ratio\n";
    for (const auto& r : rows)
        out << r.p << ',' << r.op_class << ',' << r.length << ',' << r.max_ratio << ','
            << r.mean_ratio << ',' << r.plateau_ratio << '\n';
    return out.str();
}

int exit_code_for(const std::vector<SuiteReport>& reports) {
    for (const auto& r : reports)
        if (!r.all_pass()) return 1;
    return 0;
}

} // namespace ncerg
