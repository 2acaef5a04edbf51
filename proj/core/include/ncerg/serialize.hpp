#pragma once

#include <string>

#include <json.hpp>

#include "ncerg/cz.hpp"
#include "ncerg/ergodic.hpp"
#include "ncerg/operators.hpp"

namespace ncerg {

// Stable field order everywhere so reports are byte-reproducible.
using njson = nlohmann::ordered_json;

njson shape_to_json(const AlgebraShape& s);
AlgebraShape shape_from_json(const njson& j);

// Per-block row-major arrays of [re, im] pairs.
njson element_to_json(const Element& x);
Element element_from_json(const AlgebraShape& shape, const njson& j);

njson norm_report_to_json(const NormReport& r);

njson sum_norm_solution_to_json(const SumNormSolution& s, bool emit_witness);

njson sequence_to_json(const OperatorSequence& f);
OperatorSequence sequence_from_json(const njson& j);

njson yeadon_to_json(const YeadonTriple& t);
YeadonTriple yeadon_from_json(const njson& j);

njson verification_to_json(const VerificationReport& r);

njson transference_to_json(const TransferenceReport& r);

std::string read_text_file(const std::string& path);  // throws IoFailure
void write_text_file(const std::string& path, const std::string& body);

} // namespace ncerg
