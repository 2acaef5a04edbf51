// ncerg: verification suites and constant estimation for operator-valued
// ergodic averaging experiments.
//
//   ncerg suite run <name> [--config c.json] [--seed S] [--out dir] [--emit-witness]
//   ncerg estimate [--config c.json] [--out table.csv]
//   ncerg report --merge a.json b.json ... [--format json|csv] [--out path]
//   ncerg czdemo --scalar
//
// Exit codes: 0 pass, 1 check failed, 2 invalid config, 3 internal error.

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ncerg/errors.hpp"
#include "ncerg/suites.hpp"

namespace {

using ncerg::njson;

ncerg::SuiteConfig load_config(const std::string& path, const std::string& suite,
                               std::uint64_t seed, bool seed_given) {
    ncerg::SuiteConfig cfg;
    if (!path.empty()) {
        njson j = njson::parse(ncerg::read_text_file(path), nullptr, true);
        if (!suite.empty()) j["suite"] = suite;
        if (seed_given) j["seed"] = seed;
        if (!j.contains("seed")) j["seed"] = ncerg::SuiteConfig{}.seed;
        cfg = ncerg::config_from_json(j);
    } else {
        cfg = ncerg::default_config(suite.empty() ? "all" : suite);
        if (seed_given) cfg.seed = seed;
    }
    return cfg;
}

// Representative sum-norm solution for the witness emission path.
njson sample_sum_norm(std::uint64_t seed, bool emit_witness) {
    ncerg::AlgebraShape shape{{2}, {1.0}};
    ncerg::Rng rng(seed);
    ncerg::ElementSequence seq{shape, {}};
    for (int i = 0; i < 2; ++i)
        seq.items.push_back(ncerg::random_element(shape, ncerg::RandomKind::generic, rng));
    ncerg::RcNormResult r = ncerg::rc_norm(seq, ncerg::PExp::finite(1.5));
    return ncerg::sum_norm_solution_to_json(*r.solution, emit_witness);
}

int run_suites(const std::string& name, const std::string& config_path, std::uint64_t seed,
               bool seed_given, const std::string& out_dir, bool emit_witness) {
    std::vector<std::string> names;
    if (name == "all")
        names = ncerg::suite_names();
    else
        names.push_back(name);

    std::vector<ncerg::SuiteReport> reports;
    std::vector<njson> blobs;
    for (const auto& n : names) {
        ncerg::SuiteConfig cfg = load_config(config_path, n, seed, seed_given);
        ncerg::SuiteReport rep = ncerg::run_suite(cfg);
        njson j = ncerg::report_to_json(rep);
        blobs.push_back(j);
        for (const auto& c : rep.checks)
            std::cout << (c.pass ? "[pass] " : "[FAIL] ") << n << "/" << c.name
                      << "  instances=" << c.instances << "  worst-margin=" << c.worst_margin
                      << "  constant=" << c.empirical_constant << "\n";
        reports.push_back(std::move(rep));
    }
    if (!out_dir.empty()) {
        std::filesystem::create_directories(out_dir);
        for (size_t i = 0; i < reports.size(); ++i)
            ncerg::write_text_file(out_dir + "/" + reports[i].suite + ".json",
                                   blobs[i].dump(2) + "\n");
        njson merged = ncerg::merge_reports(blobs);
        ncerg::write_text_file(out_dir + "/merged.json", merged.dump(2) + "\n");
        ncerg::write_text_file(out_dir + "/checks.csv", ncerg::reports_to_csv(merged));
        ncerg::write_text_file(out_dir + "/plotdata.csv", ncerg::plot_data_csv(merged));
        ncerg::write_text_file(out_dir + "/sumnorm-sample.json",
                               sample_sum_norm(seed_given ? seed : 1, emit_witness).dump(2) +
                                   "\n");
    }
    return ncerg::exit_code_for(reports);
}

void print_scalar_walkthrough() {
    using namespace ncerg;
    // the worked scalar decomposition: one atom of mass 4 on a 4-point window
    AlgebraShape scalar{{1}, {1.0}};
    OperatorSequence f(scalar, 2);
    Element atom(scalar);
    atom.block(0)(0, 0) = 4.0;
    f.set(0, atom);
    const double lambda = 1.0;

    CZResult cz = cz_decompose(f, lambda);
    std::cout << "scalar walkthrough: f = 4*delta_0 on [0,4), lambda = 1\n";
    std::cout << "  m_lambda = " << cz.stopping.m_lambda << "\n";
    for (int n = 0; n <= cz.stopping.m_lambda; ++n) {
        std::cout << "  q_" << n << " = [";
        for (long pos = 0; pos < 4; ++pos)
            std::cout << (pos ? ", " : "") << cz.stopping.q_at(n, pos).block(0)(0, 0).real();
        std::cout << "]\n";
    }
    std::cout << "  g   = [";
    for (long pos = 0; pos < 4; ++pos)
        std::cout << (pos ? ", " : "") << cz.good.at_or_zero(pos).block(0)(0, 0).real();
    std::cout << "]\n";
    for (size_t n = 0; n < cz.bad.size(); ++n) {
        std::cout << "  b_" << n << " = [";
        for (long pos = 0; pos < 4; ++pos)
            std::cout << (pos ? ", " : "")
                      << cz.bad[n].at_or_zero(pos).block(0)(0, 0).real();
        std::cout << "]\n";
    }
    VerificationReport ver = cz_verify(f, lambda, cz);
    for (const auto& c : ver.checks)
        std::cout << "  " << (c.pass ? "[pass] " : "[FAIL] ") << c.name
                  << "  measured=" << c.measured << "  bound=" << c.bound << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"operator-valued ergodic averaging laboratory"};
    app.require_subcommand(1);

    auto* suite_cmd = app.add_subcommand("suite", "verification suites");
    suite_cmd->require_subcommand(1);
    auto* run_cmd = suite_cmd->add_subcommand("run", "run one suite (or 'all')");
    std::string suite_name = "all";
    std::string config_path;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::string out_dir;
    bool emit_witness = false;
    run_cmd->add_option("name", suite_name, "suite name or 'all'")->required();
    run_cmd->add_option("--config", config_path, "suite config JSON");
    run_cmd->add_option("--seed", seed, "master seed")->each([&](const std::string&) {
        seed_given = true;
    });
    run_cmd->add_option("--out", out_dir, "output directory for reports");
    run_cmd->add_flag("--emit-witness", emit_witness,
                      "include decomposition witnesses in serialized solutions");

    auto* est_cmd = app.add_subcommand("estimate", "empirical constant table");
    std::string est_config, est_out;
    std::uint64_t est_seed = 0;
    bool est_seed_given = false;
    est_cmd->add_option("--config", est_config, "config JSON");
    est_cmd->add_option("--seed", est_seed, "master seed")->each([&](const std::string&) {
        est_seed_given = true;
    });
    est_cmd->add_option("--out", est_out, "CSV output path (stdout otherwise)");

    auto* rep_cmd = app.add_subcommand("report", "merge reports");
    std::vector<std::string> merge_paths;
    std::string rep_format = "json";
    std::string rep_out;
    std::string rep_plot;
    rep_cmd->add_option("--merge", merge_paths, "report JSON files")->required();
    rep_cmd->add_option("--format", rep_format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    rep_cmd->add_option("--out", rep_out, "output path (stdout otherwise)");
    rep_cmd->add_option("--plot-out", rep_plot, "also write the plot-data CSV here");

    auto* demo_cmd = app.add_subcommand("czdemo", "worked scalar decomposition");
    bool scalar = false;
    demo_cmd->add_flag("--scalar", scalar, "print the scalar walkthrough");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            if (suite_name != "all" &&
                std::find(ncerg::suite_names().begin(), ncerg::suite_names().end(),
                          suite_name) == ncerg::suite_names().end())
                throw ncerg::ConfigInvalid("unknown suite '" + suite_name + "'");
            return run_suites(suite_name, config_path, seed, seed_given, out_dir,
                              emit_witness);
        }
        if (est_cmd->parsed()) {
            ncerg::SuiteConfig cfg = load_config(est_config, "thm11", est_seed, est_seed_given);
            std::string csv = ncerg::constants_to_csv(ncerg::estimate_constant(cfg));
            if (est_out.empty())
                std::cout << csv;
            else
                ncerg::write_text_file(est_out, csv);
            return 0;
        }
        if (rep_cmd->parsed()) {
            std::vector<njson> blobs;
            for (const auto& path : merge_paths)
                blobs.push_back(njson::parse(ncerg::read_text_file(path)));
            njson merged = ncerg::merge_reports(blobs);
            std::string body =
                rep_format == "json" ? merged.dump(2) + "\n" : ncerg::reports_to_csv(merged);
            if (rep_out.empty())
                std::cout << body;
            else
                ncerg::write_text_file(rep_out, body);
            if (!rep_plot.empty())
                ncerg::write_text_file(rep_plot, ncerg::plot_data_csv(merged));
            return 0;
        }
        if (demo_cmd->parsed()) {
            print_scalar_walkthrough();
            return 0;
        }
    } catch (const ncerg::ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
