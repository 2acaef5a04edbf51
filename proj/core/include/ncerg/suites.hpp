#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ncerg/serialize.hpp"

namespace ncerg {

struct SuiteConfig {
    std::string suite = "all";
    std::vector<AlgebraShape> shapes;
    std::vector<double> exponents;
    int ensemble = 50;
    int sequence_length = 6;
    long sequence_max = 64;
    std::string sequence_kind = "mixed"; // dyadic|arithmetic|random|adversarial|mixed
    std::vector<double> lambda_factors;
    int window = 5;
    std::uint64_t seed = 20200607u;
    njson tolerance_overrides = njson::object();
};

const std::vector<std::string>& suite_names();
SuiteConfig default_config(const std::string& suite);

// JSON round trip; loading validates against the shipped schema first and
// throws ConfigInvalid on any violation.
njson config_to_json(const SuiteConfig& c);
SuiteConfig config_from_json(const njson& j);
const char* config_schema_text();

// Minimal structural JSON-schema validator (type / required / properties /
// items / enum / additionalProperties).
void validate_against_schema(const njson& value, const njson& schema,
                             const std::string& where = "config");

struct CheckRecord {
    std::string name;
    int instances = 0;
    double worst_margin = 0.0;
    double empirical_constant = 0.0; // extreme measured value across instances
    bool pass = true;
    std::vector<double> margins; // one entry per instance
};

struct CurveData {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct SuiteReport {
    std::string suite;
    std::uint64_t seed = 0;
    std::string fingerprint;
    double wall_seconds = 0.0;
    std::vector<CheckRecord> checks;
    std::vector<CurveData> curves;

    bool all_pass() const;
    const CheckRecord* find(const std::string& name) const;
};

SuiteReport run_suite(const SuiteConfig& config);

struct ConstantRow {
    double p = 2.0;
    std::string op_class;
    int length = 0;
    double max_ratio = 0.0;
    double mean_ratio = 0.0;
    double plateau_ratio = 0.0; // C(2L)/C(L), recorded on the doubled row
};

std::vector<ConstantRow> estimate_constant(const SuiteConfig& config);
std::string constants_to_csv(const std::vector<ConstantRow>& rows);

njson report_to_json(const SuiteReport& r);
njson merge_reports(const std::vector<njson>& reports); // deduplicates
std::string reports_to_csv(const njson& merged);        // one row per instance
std::string plot_data_csv(const njson& merged);

// 0 when every check passes, 1 otherwise.
int exit_code_for(const std::vector<SuiteReport>& reports);

// Worker count for trial distribution; NCERG_THREADS overrides.
int worker_count();

} // namespace ncerg
