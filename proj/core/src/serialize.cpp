#include "ncerg/serialize.hpp"

#include <fstream>
#include <sstream>

#include "ncerg/errors.hpp"

namespace ncerg {

njson shape_to_json(const AlgebraShape& s) {
    njson j;
    j["blocks"] = s.block_dims;
    j["weights"] = s.trace_weights;
    return j;
}

AlgebraShape shape_from_json(const njson& j) {
    AlgebraShape s;
    s.block_dims = j.at("blocks").get<std::vector<int>>();
    s.trace_weights = j.at("weights").get<std::vector<double>>();
    s.validate();
    return s;
}

njson element_to_json(const Element& x) {
    njson blocks = njson::array();
    for (int k = 0; k < x.blocks(); ++k) {
        njson entries = njson::array();
        for (const cplx& c : x.block(k).data())
            entries.push_back(njson::array({c.real(), c.imag()}));
        blocks.push_back(std::move(entries));
    }
    return blocks;
}

Element element_from_json(const AlgebraShape& shape, const njson& j) {
    Element x(shape);
    if (static_cast<int>(j.size()) != x.blocks())
        throw ConfigInvalid("element: block count mismatch");
    for (int k = 0; k < x.blocks(); ++k) {
        auto& data = x.block(k).data();
        const njson& entries = j.at(static_cast<size_t>(k));
        if (entries.size() != data.size())
            throw ConfigInvalid("element: block entry count mismatch");
        for (size_t i = 0; i < data.size(); ++i)
            data[i] = cplx(entries.at(i).at(0).get<double>(), entries.at(i).at(1).get<double>());
    }
    return x;
}

njson norm_report_to_json(const NormReport& r) {
    njson j;
    j["value"] = r.value;
    if (r.p.is_inf())
        j["p"] = "inf";
    else
        j["p"] = r.p.value();
    switch (r.method) {
        case NormMethod::exact_spectral: j["method"] = "exact-spectral"; break;
        case NormMethod::optimizer: j["method"] = "optimizer"; break;
        case NormMethod::surrogate: j["method"] = "surrogate"; break;
    }
    return j;
}

njson sum_norm_solution_to_json(const SumNormSolution& s, bool emit_witness) {
    njson j;
    j["value"] = s.value;
    j["dual_lower_bound"] = s.dual_lower_bound;
    j["gap"] = s.gap;
    j["gap_exceeded"] = s.gap_exceeded;
    if (emit_witness) {
        njson col = njson::array(), row = njson::array();
        for (const auto& e : s.column_part.items) col.push_back(element_to_json(e));
        for (const auto& e : s.row_part.items) row.push_back(element_to_json(e));
        j["decomposition"] = njson{{"column", col}, {"row", row}};
    }
    return j;
}

njson sequence_to_json(const OperatorSequence& f) {
    njson j;
    j["window"] = f.window();
    j["shape"] = shape_to_json(f.shape());
    njson vals = njson::object();
    for (const auto& [pos, v] : f.values()) vals[std::to_string(pos)] = element_to_json(v);
    j["values"] = std::move(vals);
    return j;
}

OperatorSequence sequence_from_json(const njson& j) {
    AlgebraShape shape = shape_from_json(j.at("shape"));
    OperatorSequence f(shape, j.at("window").get<int>());
    for (auto& [key, val] : j.at("values").items())
        f.set(std::stol(key), element_from_json(shape, val));
    return f;
}

njson yeadon_to_json(const YeadonTriple& t) {
    njson j;
    j["shape"] = shape_to_json(t.shape);
    j["perm"] = t.perm;
    njson modes = njson::array();
    for (bool a : t.anti) modes.push_back(a ? "anti" : "hom");
    j["modes"] = std::move(modes);
    njson us = njson::array();
    for (const CMat& u : t.unitaries) {
        njson entries = njson::array();
        for (const cplx& c : u.data()) entries.push_back(njson::array({c.real(), c.imag()}));
        us.push_back(std::move(entries));
    }
    j["unitaries"] = std::move(us);
    j["w"] = element_to_json(t.w);
    j["p"] = t.p;
    return j;
}

YeadonTriple yeadon_from_json(const njson& j) {
    YeadonTriple t;
    t.shape = shape_from_json(j.at("shape"));
    t.perm = j.at("perm").get<std::vector<int>>();
    for (const auto& m : j.at("modes")) t.anti.push_back(m.get<std::string>() == "anti");
    for (size_t k = 0; k < j.at("unitaries").size(); ++k) {
        const int d = t.shape.block_dims.at(k);
        CMat u(d, d);
        const njson& entries = j.at("unitaries").at(k);
        if (static_cast<int>(entries.size()) != d * d)
            throw ConfigInvalid("yeadon: unitary entry count mismatch");
        for (int i = 0; i < d * d; ++i)
            u.data()[static_cast<size_t>(i)] =
                cplx(entries.at(i).at(0).get<double>(), entries.at(i).at(1).get<double>());
        t.unitaries.push_back(std::move(u));
    }
    t.w = element_from_json(t.shape, j.at("w"));
    t.p = j.at("p").get<double>();
    t.validate();
    return t;
}

njson verification_to_json(const VerificationReport& r) {
    njson arr = njson::array();
    for (const auto& c : r.checks) {
        njson j;
        j["check"] = c.name;
        j["margin"] = c.margin();
        j["tol"] = c.tolerance;
        j["pass"] = c.pass;
        arr.push_back(std::move(j));
    }
    return arr;
}

njson transference_to_json(const TransferenceReport& r) {
    njson j;
    j["defect"] = r.defect;
    j["factor"] = r.factor;
    j["per_k_max"] = r.per_k_max;
    return j;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoFailure("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoFailure("cannot open for writing: " + path);
    out << body;
    if (!out) throw IoFailure("write failed: " + path);
}

} // namespace ncerg
