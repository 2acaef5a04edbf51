#pragma once

#include <map>
#include <string>
#include <vector>

#include "ncerg/dyadic.hpp"

namespace ncerg {

// Stopping-time projections for a positive finitely supported sequence and a
// height lambda.  Projections are stored per dyadic cell (identity cells are
// implicit), with q_n constant on level-n cells and q_n <= q_{n+1}.
struct CuculescuResult {
    AlgebraShape shape;
    int window = 0;
    double lambda = 0.0;
    int m_lambda = 0;

    // level n in [0, m_lambda]; map cell start -> projection where != 1
    std::vector<std::map<long, Element>> q_cells;

    Element q_at(int n, long pos) const;  // q_n evaluated at a position
    Element p_at(int n, long pos) const;  // q_{n+1} - q_n, 0 <= n < m_lambda
    Element q_final(long pos) const { return q_at(0, pos); }

    // Positions where some projection is non-identity are contained here.
    IntInterval nontrivial_range() const;

    // Materialized view of q_n over a position range.
    OperatorSequence q_sequence(int n, IntInterval range) const;
};

CuculescuResult cuculescu(const OperatorSequence& f, double lambda);

struct CZResult {
    CuculescuResult stopping;
    OperatorSequence good;             // g = q f q + sum_n p_n f_n p_n
    std::vector<OperatorSequence> bad; // b_n, 0 <= n < m_lambda
    std::map<long, Element> zeta;      // non-identity values only
    IntInterval zeta_range;

    Element zeta_at(long pos) const;
};

CZResult cz_decompose(const OperatorSequence& f, double lambda);

// 5I: the integer interval with the same center as the level-n cell and five
// times its width; [start - 2 w, start + 3 w) for cell [start, start + w).
IntInterval five_i(const DyadicInterval& cell);

struct CheckResult {
    std::string name;
    double measured = 0.0;
    double bound = 0.0;
    double tolerance = 0.0;
    bool pass = false;
    double margin() const { return bound + tolerance - measured; }
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const;
    const CheckResult* find(const std::string& name) const;
};

VerificationReport cuculescu_verify(const OperatorSequence& f, double lambda,
                                    const CuculescuResult& r);
VerificationReport cz_verify(const OperatorSequence& f, double lambda, const CZResult& r);

} // namespace ncerg
