// Instance-file round trips (in process) and the command-line surface
// (as subprocesses): formats, exit codes, determinism, and input rejection.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wcf/adversary.hpp"
#include "wcf/io.hpp"

namespace {

using wcf::cmatrix;

cmatrix diag2(double a, double b) {
    cmatrix m = cmatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

// ---------------------------------------------------------------------------
// Document layer, exercised in process.

TEST(instance_files, round_trip_is_value_exact) {
    const cmatrix rho = diag2(0.5, 0.5);
    const cmatrix e0 = diag2(0.75, 0.25);
    const std::string path = "cli_roundtrip.json";
    wcf::save_instance_document(path, wcf::document_from_matrices(rho, e0));

    const wcf::instance_document back = wcf::load_instance_document(path);
    EXPECT_EQ(back.format_version, wcf::format_version_tag);
    ASSERT_EQ(back.dim, 2);
    for (Eigen::Index i = 0; i < 2; ++i) {
        for (Eigen::Index j = 0; j < 2; ++j) {
            EXPECT_EQ(back.rho(i, j), rho(i, j));
            EXPECT_EQ(back.e0(i, j), e0(i, j));
        }
    }

    const wcf::protocol_instance inst = wcf::instance_from_document(back);
    EXPECT_NEAR(wcf::p_b_max(inst), 0.5 + std::sqrt(3.0) / 4.0, 1e-12);
}

TEST(instance_files, parser_rejects_malformed_documents_by_field) {
    using nlohmann::json;
    const json good{{"format_version", "wcf-1"},
                    {"dim", 2},
                    {"rho", wcf::matrix_to_json(diag2(0.5, 0.5))},
                    {"e0", wcf::matrix_to_json(diag2(0.75, 0.25))}};
    EXPECT_NO_THROW(wcf::instance_document_from_json(good));

    EXPECT_THROW(wcf::instance_document_from_json(json::array()), wcf::parse_error);

    for (const char* key : {"format_version", "dim", "rho", "e0"}) {
        json j = good;
        j.erase(key);
        try {
            wcf::instance_document_from_json(j);
            FAIL() << "missing " << key << " was accepted";
        } catch (const wcf::parse_error& e) {
            EXPECT_NE(std::string(e.what()).find(key), std::string::npos);
        }
    }

    json bad_version = good;
    bad_version["format_version"] = "wcf-0";
    EXPECT_THROW(wcf::instance_document_from_json(bad_version), wcf::parse_error);

    for (const int dim : {0, -1, 257}) {
        json j = good;
        j["dim"] = dim;
        EXPECT_THROW(wcf::instance_document_from_json(j), wcf::parse_error) << dim;
    }

    json short_row = good;
    short_row["rho"][0] = json::array({json::array({0.5, 0.0})});
    EXPECT_THROW(wcf::instance_document_from_json(short_row), wcf::parse_error);

    json bare_number = good;
    bare_number["e0"][1][1] = 0.25;  // entry must be a [real, imaginary] pair
    try {
        wcf::instance_document_from_json(bare_number);
        FAIL() << "bare numeric entry was accepted";
    } catch (const wcf::parse_error& e) {
        EXPECT_NE(std::string(e.what()).find("e0"), std::string::npos);
    }
}

TEST(instance_files, building_from_a_document_applies_protocol_validation) {
    // Structurally fine, but the measurement is not fair for the state.
    const wcf::instance_document doc =
        wcf::document_from_matrices(diag2(0.5, 0.5), diag2(0.9, 0.9));
    EXPECT_THROW(wcf::instance_from_document(doc), wcf::fairness_error);
    EXPECT_THROW(wcf::document_from_matrices(diag2(0.5, 0.5), cmatrix::Identity(3, 3)),
                 wcf::dimension_error);
}

// ---------------------------------------------------------------------------
// Subprocess harness.

struct cli_result {
    int exit_code = -1;
    std::string out;
};

cli_result run_cli(const std::string& args) {
    const std::string cmd = std::string("\"") + WCF_CLI_PATH + "\" " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) {
        throw std::runtime_error("popen failed for: " + cmd);
    }
    cli_result r;
    char buffer[4096];
    std::size_t got = 0;
    while ((got = std::fread(buffer, 1, sizeof(buffer), pipe)) > 0) {
        r.out.append(buffer, got);
    }
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        lines.push_back(line);
    }
    return lines;
}

std::vector<std::string> fields_of(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) {
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') {
        fields.push_back("");
    }
    return fields;
}

const char* both_party_path() {
    static const std::string path = [] {
        const std::string p = "cli_both_party.json";
        wcf::save_instance_document(
            p, wcf::document_from_matrices(diag2(0.5, 0.5), diag2(0.75, 0.25)));
        return p;
    }();
    return path.c_str();
}

TEST(cli, make_then_describe_reports_the_family_figures) {
    const cli_result made = run_cli("make --family 1 --x 0.8 --out cli_f1.json");
    EXPECT_EQ(made.exit_code, 0);
    EXPECT_NE(made.out.find("wrote cli_f1.json"), std::string::npos);

    const cli_result described = run_cli("describe cli_f1.json --format json");
    ASSERT_EQ(described.exit_code, 0);
    const nlohmann::json j = nlohmann::json::parse(described.out);
    EXPECT_EQ(j["instance"]["dim"], 2);
    EXPECT_EQ(j["instance"]["format_version"], "wcf-1");
    EXPECT_NEAR(j["report"]["p_a_max"].get<double>(), 0.625, 1e-9);
    EXPECT_NEAR(j["report"]["p_a_thresh"].get<double>(), 0.5, 1e-9);
    EXPECT_NEAR(j["report"]["p_b_max"].get<double>(), 0.8, 1e-9);
    EXPECT_NEAR(j["report"]["p_b_thresh"].get<double>(), 0.8, 1e-9);
    EXPECT_NEAR(j["report"]["epsilon_a"].get<double>(), 0.125, 1e-9);
    EXPECT_NEAR(j["report"]["tradeoff_product"].get<double>(), 0.5, 1e-9);

    const cli_result csv = run_cli("describe cli_f1.json --format csv");
    ASSERT_EQ(csv.exit_code, 0);
    const auto csv_lines = lines_of(csv.out);
    ASSERT_EQ(csv_lines.size(), 2u);
    EXPECT_EQ(csv_lines[0], "p_a_max,p_a_thresh,p_b_max,p_b_thresh,epsilon_a,epsilon_b,tradeoff_product");
    EXPECT_NEAR(std::stod(fields_of(csv_lines[1])[0]), 0.625, 1e-15);
}

TEST(cli, make_rejects_bad_parameters_without_writing) {
    EXPECT_EQ(run_cli("make --family 1 --x 0.5 --out cli_never.json").exit_code, 2);
    EXPECT_FALSE(std::filesystem::exists("cli_never.json"));
    EXPECT_EQ(run_cli("make --family 3 --x 0.8 --out cli_never.json").exit_code, 2);
    EXPECT_FALSE(std::filesystem::exists("cli_never.json"));
}

TEST(cli, describe_rejects_missing_and_malformed_files_silently_on_stdout) {
    const cli_result missing = run_cli("describe cli_no_such_file.json");
    EXPECT_EQ(missing.exit_code, 2);
    EXPECT_TRUE(missing.out.empty());

    std::ofstream("cli_garbage.json") << "{ this is not json";
    const cli_result garbage = run_cli("describe cli_garbage.json");
    EXPECT_EQ(garbage.exit_code, 2);
    EXPECT_TRUE(garbage.out.empty());
}

TEST(cli, run_is_byte_identical_for_a_fixed_seed) {
    const std::string args = std::string("run ") + both_party_path() +
                             " --alice optimal --trials 20000 --seed 42 --format csv";
    const cli_result first = run_cli(args);
    const cli_result second = run_cli(args);
    ASSERT_EQ(first.exit_code, 0);
    EXPECT_EQ(first.out, second.out);

    const auto rows = lines_of(first.out);
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], "outcome,count,frequency,exact,z");
    EXPECT_NEAR(std::stod(fields_of(rows[1])[3]), 0.625, 1e-15);  // exact alice_wins rate
}

TEST(cli, run_with_never_caught_measurer_shows_no_catches) {
    const cli_result r = run_cli(std::string("run ") + both_party_path() +
                                 " --bob threshold --trials 100000 --seed 7 --format csv");
    ASSERT_EQ(r.exit_code, 0);
    const auto rows = lines_of(r.out);
    ASSERT_EQ(rows.size(), 5u);

    const auto caught_bob = fields_of(rows[3]);  // alice_catches_bob
    ASSERT_EQ(caught_bob[0], "alice_catches_bob");
    EXPECT_EQ(caught_bob[1], "0");

    const auto accused_alice = fields_of(rows[4]);  // bob_catches_alice
    ASSERT_EQ(accused_alice[0], "bob_catches_alice");
    EXPECT_GT(std::stod(accused_alice[3]), 0.05);  // false accusations are expected

    const auto wins = fields_of(rows[2]);  // bob_wins at his never-caught ceiling
    EXPECT_NEAR(std::stod(wins[3]), 2.0 / 3.0, 1e-12);
}

TEST(cli, run_rejects_contradictory_or_empty_requests) {
    EXPECT_EQ(run_cli(std::string("run ") + both_party_path() +
                      " --alice optimal --bob optimal")
                  .exit_code,
              2);
    EXPECT_EQ(run_cli(std::string("run ") + both_party_path() + " --trials 0").exit_code, 2);
    EXPECT_EQ(run_cli(std::string("run ") + both_party_path() + " --alice sneaky").exit_code, 2);
}

TEST(cli, run_json_counts_sum_to_trials) {
    const cli_result r = run_cli(std::string("run ") + both_party_path() +
                                 " --trials 5000 --seed 9 --format json");
    ASSERT_EQ(r.exit_code, 0);
    const nlohmann::json j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j["outcomes"].size(), 4u);
    std::uint64_t total = 0;
    for (const auto& row : j["outcomes"]) {
        total += row["count"].get<std::uint64_t>();
    }
    EXPECT_EQ(total, 5000u);
    EXPECT_EQ(j["run"]["seed"], 9);
    // Honest execution: both catch outcomes are impossible, z is null there.
    EXPECT_TRUE(j["outcomes"][2]["z"].is_null());
    EXPECT_EQ(j["outcomes"][2]["count"], 0);
}

TEST(cli, curve_traces_the_constant_tradeoff_of_family_one) {
    const cli_result r = run_cli("curve --family 1 --x-min 0.55 --x-max 1.0 --steps 50");
    ASSERT_EQ(r.exit_code, 0);
    const auto rows = lines_of(r.out);
    ASSERT_EQ(rows.size(), 51u);
    EXPECT_EQ(rows[0], "x,p_a_max,p_b_max,p_a_thresh,p_b_thresh,product");
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields_of(rows[i]);
        ASSERT_EQ(f.size(), 6u);
        EXPECT_NEAR(std::stod(f[5]), 0.5, 1e-9) << rows[i];
    }
    // Grid endpoints are exactly the requested bounds.
    EXPECT_EQ(std::stod(fields_of(rows[1])[0]), 0.55);
    EXPECT_EQ(std::stod(fields_of(rows[50])[0]), 1.0);
}

TEST(cli, curve_respects_out_file_steps_one_and_domain_errors) {
    const cli_result single =
        run_cli("curve --family 2 --x-min 0.75 --x-max 0.9 --steps 1 --out cli_curve.csv");
    ASSERT_EQ(single.exit_code, 0);
    EXPECT_NE(single.out.find("wrote cli_curve.csv"), std::string::npos);
    std::ifstream in("cli_curve.csv");
    std::stringstream buffer;
    buffer << in.rdbuf();
    const auto rows = lines_of(buffer.str());
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(std::stod(fields_of(rows[1])[0]), 0.75);

    // x = 1 is outside the second family's domain, so the sweep must fail
    // before emitting anything.
    const cli_result bad = run_cli("curve --family 2 --x-min 0.5 --x-max 1.0 --steps 3");
    EXPECT_EQ(bad.exit_code, 2);
    EXPECT_TRUE(bad.out.empty());
    EXPECT_EQ(run_cli("curve --family 1 --x-min 0.9 --x-max 0.6 --steps 3").exit_code, 2);
    EXPECT_EQ(run_cli("curve --family 1 --x-min 0.6 --x-max 0.9 --steps 0").exit_code, 2);
}

TEST(cli, verify_passes_all_figures_on_a_known_instance) {
    const cli_result r = run_cli(std::string("verify ") + both_party_path() +
                                 " --restarts 8 --seed 3 --format csv");
    ASSERT_EQ(r.exit_code, 0);
    const auto rows = lines_of(r.out);
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_EQ(rows[0], "figure,closed_form,oracle,delta,tolerance,pass");
    const char* expected[] = {"pa_max", "pa_thresh", "pb_max", "pb_thresh", "lemma"};
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto f = fields_of(rows[i]);
        ASSERT_EQ(f.size(), 6u);
        EXPECT_EQ(f[0], expected[i - 1]);
        EXPECT_EQ(f[5], "true") << rows[i];
    }
}

TEST(cli, verify_honors_figure_selection) {
    const cli_result two = run_cli(std::string("verify ") + both_party_path() +
                                   " --restarts 4 --seed 5 --which pa_max --which lemma "
                                   "--format csv");
    ASSERT_EQ(two.exit_code, 0);
    const auto rows = lines_of(two.out);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(fields_of(rows[1])[0], "pa_max");
    EXPECT_EQ(fields_of(rows[2])[0], "lemma");

    EXPECT_EQ(run_cli(std::string("verify ") + both_party_path() + " --which nonsense").exit_code,
              2);
}

TEST(cli, parser_level_failures_exit_with_input_error) {
    EXPECT_EQ(run_cli("--help").exit_code, 0);
    EXPECT_EQ(run_cli("").exit_code, 2);            // a subcommand is required
    EXPECT_EQ(run_cli("frobnicate").exit_code, 2);  // unknown subcommand
    EXPECT_EQ(run_cli("describe").exit_code, 2);    // missing required positional
    EXPECT_EQ(run_cli(std::string("describe ") + both_party_path() + " --format yaml").exit_code,
              2);
    EXPECT_EQ(run_cli(std::string("describe ") + both_party_path() + " --bogus-flag").exit_code,
              2);
}

}  // namespace
