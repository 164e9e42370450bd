// Command-line front end for the weak coin-flipping library: generate
// protocol instances from the built-in families, report security figures,
// simulate runs, sweep parameter curves, and verify the closed forms against
// the numerical search oracles.
//
// Exit codes are a stable contract: 0 on success, 1 when a verification
// check fails, 2 on any input error (bad flags, unparseable or invalid
// instance files, domain violations). Commands never emit partial output:
// everything is buffered and flushed only after the command has succeeded.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "wcf/adversary.hpp"
#include "wcf/io.hpp"
#include "wcf/oracle.hpp"
#include "wcf/protocol.hpp"

namespace {

using nlohmann::json;

// Full-precision rendering for machine-readable output (CSV); a double
// round-trips through 17 significant digits.
std::string full(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Human rendering for text output.
std::string human(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) {
        s.append(width - s.size(), ' ');
    }
    return s;
}

struct loaded_instance {
    std::string path;
    wcf::instance_document doc;
    wcf::protocol_instance inst;
};

loaded_instance load(const std::string& path) {
    wcf::instance_document doc = wcf::load_instance_document(path);
    wcf::protocol_instance inst = wcf::instance_from_document(doc);
    return {path, std::move(doc), std::move(inst)};
}

json instance_echo(const loaded_instance& li) {
    return json{{"path", li.path},
                {"format_version", li.doc.format_version},
                {"dim", li.doc.dim}};
}

std::string format_flag_help() { return "output format: text, json, or csv"; }

void check_format(const std::string& fmt) {
    if (fmt != "text" && fmt != "json" && fmt != "csv") {
        throw wcf::domain_error("unknown format '" + fmt + "': expected text, json, or csv");
    }
}

// ---------------------------------------------------------------------------
// make

wcf::protocol_instance family_instance(int family, double x) {
    if (family == 1) return wcf::family_one(x);
    if (family == 2) return wcf::family_two(x);
    throw wcf::domain_error("--family must be 1 or 2");
}

int cmd_make(int family, double x, const std::string& out_path, std::ostream& out) {
    const wcf::protocol_instance inst = family_instance(family, x);
    const wcf::instance_document doc =
        wcf::document_from_matrices(inst.rho().matrix(), inst.e0().matrix());
    wcf::save_instance_document(out_path, doc);
    out << "wrote " << out_path << " (family " << family << ", x = " << full(x) << ", dim "
        << doc.dim << ")\n";
    return 0;
}

// ---------------------------------------------------------------------------
// describe

int cmd_describe(const std::string& path, const std::string& fmt, std::ostream& out) {
    const loaded_instance li = load(path);
    const wcf::security_report rep = wcf::compute_security_report(li.inst);

    if (fmt == "json") {
        json j{{"instance", instance_echo(li)},
               {"report",
                {{"p_a_max", rep.p_a_max},
                 {"p_a_thresh", rep.p_a_thresh},
                 {"p_b_max", rep.p_b_max},
                 {"p_b_thresh", rep.p_b_thresh},
                 {"epsilon_a", rep.epsilon_a()},
                 {"epsilon_b", rep.epsilon_b()},
                 {"tradeoff_product", rep.tradeoff_product()}}}};
        out << j.dump(2) << '\n';
    } else if (fmt == "csv") {
        out << "p_a_max,p_a_thresh,p_b_max,p_b_thresh,epsilon_a,epsilon_b,tradeoff_product\n"
            << full(rep.p_a_max) << ',' << full(rep.p_a_thresh) << ',' << full(rep.p_b_max)
            << ',' << full(rep.p_b_thresh) << ',' << full(rep.epsilon_a()) << ','
            << full(rep.epsilon_b()) << ',' << full(rep.tradeoff_product()) << '\n';
    } else {
        out << "instance: " << path << " (dim " << li.doc.dim << ")\n";
        out << pad("p_a_max", 18) << human(rep.p_a_max) << '\n';
        out << pad("p_a_thresh", 18) << human(rep.p_a_thresh) << '\n';
        out << pad("p_b_max", 18) << human(rep.p_b_max) << '\n';
        out << pad("p_b_thresh", 18) << human(rep.p_b_thresh) << '\n';
        out << pad("epsilon_a", 18) << human(rep.epsilon_a()) << '\n';
        out << pad("epsilon_b", 18) << human(rep.epsilon_b()) << '\n';
        out << pad("tradeoff_product", 18) << human(rep.tradeoff_product()) << '\n';
    }
    return 0;
}

// ---------------------------------------------------------------------------
// run

wcf::alice_strategy alice_by_name(const wcf::protocol_instance& inst, const std::string& kind) {
    if (kind == "honest") return wcf::honest_alice(inst);
    if (kind == "optimal") return wcf::optimal_alice_state(inst);
    if (kind == "threshold") return wcf::threshold_alice_state(inst);
    throw wcf::domain_error("unknown strategy '" + kind +
                            "' for --alice: expected honest, optimal, or threshold");
}

wcf::bob_strategy bob_by_name(const wcf::protocol_instance& inst, const std::string& kind) {
    if (kind == "honest") return wcf::honest_bob(inst);
    if (kind == "optimal") return wcf::optimal_bob_strategy(inst);
    if (kind == "threshold") return wcf::threshold_bob_strategy(inst);
    throw wcf::domain_error("unknown strategy '" + kind +
                            "' for --bob: expected honest, optimal, or threshold");
}

int cmd_run(const std::string& path, const std::string& alice_kind, const std::string& bob_kind,
            std::uint64_t trials, std::uint64_t seed, const std::string& fmt, std::ostream& out) {
    if (trials < 1) {
        throw wcf::domain_error("--trials must be at least 1");
    }
    if (alice_kind != "honest" && bob_kind != "honest") {
        throw wcf::domain_error(
            "conflicting flags: --alice " + alice_kind + " and --bob " + bob_kind +
            " would have both parties deviate; every cheating analysis here assumes an honest "
            "opponent, so pick at most one cheater per run");
    }
    const loaded_instance li = load(path);
    const wcf::alice_strategy alice = alice_by_name(li.inst, alice_kind);
    const wcf::bob_strategy bob = bob_by_name(li.inst, bob_kind);

    const wcf::outcome_probabilities dist = wcf::outcome_distribution(li.inst, alice, bob);
    const wcf::detail::branch_sampler sampler = wcf::detail::make_branch_sampler(dist);
    wcf::rng_stream rng(seed);

    std::array<std::uint64_t, 4> counts{};
    for (std::uint64_t t = 0; t < trials; ++t) {
        const auto [bit, passed] = sampler.draw(rng);
        ++counts[wcf::outcome_index(wcf::detail::outcome_of(bit, passed))];
    }

    std::array<double, 4> frequency{};
    std::array<double, 4> exact{};
    std::array<std::optional<double>, 4> z{};
    for (std::size_t i = 0; i < 4; ++i) {
        const double p = dist.of(wcf::all_outcomes[i]);
        frequency[i] = static_cast<double>(counts[i]) / static_cast<double>(trials);
        exact[i] = p;
        const double variance = p * (1.0 - p) / static_cast<double>(trials);
        if (variance > 0.0) {
            z[i] = (frequency[i] - p) / std::sqrt(variance);
        }
    }

    if (fmt == "json") {
        json rows = json::array();
        for (std::size_t i = 0; i < 4; ++i) {
            json row{{"outcome", wcf::to_string(wcf::all_outcomes[i])},
                     {"count", counts[i]},
                     {"frequency", frequency[i]},
                     {"exact", exact[i]}};
            row["z"] = z[i] ? json(*z[i]) : json(nullptr);
            rows.push_back(std::move(row));
        }
        json j{{"instance", instance_echo(li)},
               {"run",
                {{"alice", alice_kind}, {"bob", bob_kind}, {"trials", trials}, {"seed", seed}}},
               {"outcomes", rows}};
        out << j.dump(2) << '\n';
    } else if (fmt == "csv") {
        out << "outcome,count,frequency,exact,z\n";
        for (std::size_t i = 0; i < 4; ++i) {
            out << wcf::to_string(wcf::all_outcomes[i]) << ',' << counts[i] << ','
                << full(frequency[i]) << ',' << full(exact[i]) << ','
                << (z[i] ? full(*z[i]) : std::string()) << '\n';
        }
    } else {
        out << "instance: " << path << " (dim " << li.doc.dim << "), alice=" << alice_kind
            << " bob=" << bob_kind << ", trials=" << trials << ", seed=" << seed << '\n';
        out << pad("outcome", 20) << pad("count", 12) << pad("frequency", 12) << pad("exact", 12)
            << "z\n";
        for (std::size_t i = 0; i < 4; ++i) {
            out << pad(wcf::to_string(wcf::all_outcomes[i]), 20)
                << pad(std::to_string(counts[i]), 12) << pad(human(frequency[i]), 12)
                << pad(human(exact[i]), 12) << (z[i] ? human(*z[i]) : std::string("-")) << '\n';
        }
    }
    return 0;
}

// ---------------------------------------------------------------------------
// curve

int cmd_curve(int family, double x_min, double x_max, int steps, const std::string& out_path,
              const std::string& fmt, std::ostream& out) {
    if (steps < 1) {
        throw wcf::domain_error("--steps must be at least 1");
    }
    if (!(x_min <= x_max)) {
        throw wcf::domain_error("--x-min must not exceed --x-max");
    }

    struct row {
        double x;
        wcf::security_report rep;
    };
    std::vector<row> rows;
    rows.reserve(static_cast<std::size_t>(steps));
    for (int i = 0; i < steps; ++i) {
        const double x =
            steps == 1 ? x_min : x_min + (x_max - x_min) * static_cast<double>(i) /
                                             static_cast<double>(steps - 1);
        rows.push_back({x, wcf::compute_security_report(family_instance(family, x))});
    }

    std::ostringstream body;
    if (fmt == "json") {
        json arr = json::array();
        for (const row& r : rows) {
            arr.push_back(json{{"x", r.x},
                               {"p_a_max", r.rep.p_a_max},
                               {"p_b_max", r.rep.p_b_max},
                               {"p_a_thresh", r.rep.p_a_thresh},
                               {"p_b_thresh", r.rep.p_b_thresh},
                               {"product", r.rep.tradeoff_product()}});
        }
        json j{{"family", family},
               {"x_min", x_min},
               {"x_max", x_max},
               {"steps", steps},
               {"rows", arr}};
        body << j.dump(2) << '\n';
    } else if (fmt == "text") {
        body << pad("x", 12) << pad("p_a_max", 12) << pad("p_b_max", 12) << pad("p_a_thresh", 12)
             << pad("p_b_thresh", 12) << "product\n";
        for (const row& r : rows) {
            body << pad(human(r.x), 12) << pad(human(r.rep.p_a_max), 12)
                 << pad(human(r.rep.p_b_max), 12) << pad(human(r.rep.p_a_thresh), 12)
                 << pad(human(r.rep.p_b_thresh), 12) << human(r.rep.tradeoff_product()) << '\n';
        }
    } else {
        body << "x,p_a_max,p_b_max,p_a_thresh,p_b_thresh,product\n";
        for (const row& r : rows) {
            body << full(r.x) << ',' << full(r.rep.p_a_max) << ',' << full(r.rep.p_b_max) << ','
                 << full(r.rep.p_a_thresh) << ',' << full(r.rep.p_b_thresh) << ','
                 << full(r.rep.tradeoff_product()) << '\n';
        }
    }

    if (out_path.empty()) {
        out << body.str();
    } else {
        std::ofstream file(out_path, std::ios::binary);
        if (!file) {
            throw wcf::parse_error("cannot open '" + out_path + "' for writing");
        }
        file << body.str();
        if (!file.good()) {
            throw wcf::parse_error("failed writing '" + out_path + "'");
        }
        out << "wrote " << out_path << " (" << rows.size() << " rows)\n";
    }
    return 0;
}

// ---------------------------------------------------------------------------
// verify

struct figure_check {
    std::string name;
    double closed_form = 0.0;
    double oracle = 0.0;
    double delta = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

figure_check check_figure(const loaded_instance& li, const std::string& name,
                          const wcf::oracle_config& cfg) {
    figure_check c;
    c.name = name;
    // Searches must find the closed form to within the per-figure accuracy and
    // may never exceed a maximum by more than numerical noise.
    constexpr double above = 1e-6;
    if (name == "pa_max") {
        c.closed_form = wcf::p_a_max(li.inst);
        c.oracle = wcf::alice_oracle(li.inst, cfg).best_value;
        c.tolerance = 1e-6;
    } else if (name == "pa_thresh") {
        c.closed_form = wcf::p_a_thresh(li.inst);
        c.oracle = wcf::alice_threshold_oracle(li.inst, cfg).best_value;
        c.tolerance = 1e-6;
    } else if (name == "pb_max") {
        c.closed_form = wcf::p_b_max(li.inst);
        c.oracle = wcf::bob_unitary_oracle(li.inst, cfg).best_value;
        c.tolerance = 1e-6;
    } else if (name == "pb_thresh") {
        c.closed_form = wcf::p_b_thresh(li.inst);
        c.oracle = wcf::bob_threshold_oracle(li.inst, cfg).best_value;
        c.tolerance = 1e-4;
    } else if (name == "lemma") {
        c.closed_form = 0.0;
        c.oracle = wcf::lemma_check(li.inst.dim(), 100, cfg.seed);
        c.tolerance = 1e-10;
        c.delta = c.oracle;
        c.pass = c.oracle < c.tolerance;
        return c;
    } else {
        throw wcf::domain_error("unknown figure '" + name +
                                "' for --which: expected pa_max, pa_thresh, pb_max, pb_thresh, "
                                "or lemma");
    }
    c.delta = c.oracle - c.closed_form;
    c.pass = c.delta >= -c.tolerance && c.delta <= above;
    return c;
}

int cmd_verify(const std::string& path, int restarts, std::uint64_t seed,
               std::vector<std::string> which, const std::string& fmt, std::ostream& out) {
    if (restarts < 1) {
        throw wcf::domain_error("--restarts must be at least 1");
    }
    const loaded_instance li = load(path);
    if (which.empty()) {
        which = {"pa_max", "pa_thresh", "pb_max", "pb_thresh", "lemma"};
    }
    wcf::oracle_config cfg;
    cfg.restarts = restarts;
    cfg.seed = seed;

    std::vector<figure_check> checks;
    checks.reserve(which.size());
    for (const std::string& name : which) {
        checks.push_back(check_figure(li, name, cfg));
    }
    const bool all_pass =
        std::all_of(checks.begin(), checks.end(), [](const figure_check& c) { return c.pass; });

    if (fmt == "json") {
        json rows = json::array();
        for (const figure_check& c : checks) {
            rows.push_back(json{{"figure", c.name},
                                {"closed_form", c.closed_form},
                                {"oracle", c.oracle},
                                {"delta", c.delta},
                                {"tolerance", c.tolerance},
                                {"pass", c.pass}});
        }
        json j{{"instance", instance_echo(li)},
               {"verify", {{"restarts", restarts}, {"seed", seed}}},
               {"figures", rows},
               {"all_pass", all_pass}};
        out << j.dump(2) << '\n';
    } else if (fmt == "csv") {
        out << "figure,closed_form,oracle,delta,tolerance,pass\n";
        for (const figure_check& c : checks) {
            out << c.name << ',' << full(c.closed_form) << ',' << full(c.oracle) << ','
                << full(c.delta) << ',' << full(c.tolerance) << ','
                << (c.pass ? "true" : "false") << '\n';
        }
    } else {
        out << "instance: " << path << " (dim " << li.doc.dim << "), restarts=" << restarts
            << ", seed=" << seed << '\n';
        out << pad("figure", 12) << pad("closed_form", 16) << pad("oracle", 16) << pad("delta", 16)
            << pad("tolerance", 12) << "status\n";
        for (const figure_check& c : checks) {
            out << pad(c.name, 12) << pad(human(c.closed_form), 16) << pad(human(c.oracle), 16)
                << pad(human(c.delta), 16) << pad(human(c.tolerance), 12)
                << (c.pass ? "pass" : "FAIL") << '\n';
        }
    }
    return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weak coin flipping: security figures, cheating strategies, and verification"};
    app.require_subcommand(1);

    // make
    auto* make_cmd = app.add_subcommand("make", "generate a family instance file");
    int make_family = 0;
    double make_x = 0.0;
    std::string make_out;
    make_cmd->add_option("--family", make_family, "protocol family, 1 or 2")->required();
    make_cmd->add_option("--x", make_x, "family parameter")->required();
    make_cmd->add_option("--out", make_out, "output instance path")->required();

    // describe
    auto* describe_cmd = app.add_subcommand("describe", "report the security figures");
    std::string describe_path;
    std::string describe_fmt = "text";
    describe_cmd->add_option("instance", describe_path, "instance file")->required();
    describe_cmd->add_option("--format", describe_fmt, format_flag_help());

    // run
    auto* run_cmd = app.add_subcommand("run", "simulate protocol executions");
    std::string run_path;
    std::string run_alice = "honest";
    std::string run_bob = "honest";
    std::uint64_t run_trials = 100000;
    std::uint64_t run_seed = 1;
    std::string run_fmt = "text";
    run_cmd->add_option("instance", run_path, "instance file")->required();
    run_cmd->add_option("--alice", run_alice, "honest, optimal, or threshold");
    run_cmd->add_option("--bob", run_bob, "honest, optimal, or threshold");
    run_cmd->add_option("--trials", run_trials, "number of protocol executions (>= 1)");
    run_cmd->add_option("--seed", run_seed, "random seed");
    run_cmd->add_option("--format", run_fmt, format_flag_help());

    // curve
    auto* curve_cmd = app.add_subcommand("curve", "sweep a family and emit the figure curve");
    int curve_family = 0;
    double curve_x_min = 0.0;
    double curve_x_max = 0.0;
    int curve_steps = 0;
    std::string curve_out;
    std::string curve_fmt = "csv";
    curve_cmd->add_option("--family", curve_family, "protocol family, 1 or 2")->required();
    curve_cmd->add_option("--x-min", curve_x_min, "grid start")->required();
    curve_cmd->add_option("--x-max", curve_x_max, "grid end")->required();
    curve_cmd->add_option("--steps", curve_steps, "number of grid points (>= 1)")->required();
    curve_cmd->add_option("--out", curve_out, "output path (stdout when omitted)");
    curve_cmd->add_option("--format", curve_fmt, format_flag_help());

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "check closed forms against the oracles");
    std::string verify_path;
    int verify_restarts = 64;
    std::uint64_t verify_seed = 1;
    std::vector<std::string> verify_which;
    std::string verify_fmt = "text";
    verify_cmd->add_option("instance", verify_path, "instance file")->required();
    verify_cmd->add_option("--restarts", verify_restarts, "search restarts per figure");
    verify_cmd->add_option("--seed", verify_seed, "random seed");
    verify_cmd->add_option("--which", verify_which,
                           "figures to check: pa_max, pa_thresh, pb_max, pb_thresh, lemma "
                           "(default: all)");
    verify_cmd->add_option("--format", verify_fmt, format_flag_help());

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // flag problems are input errors
    }

    try {
        std::ostringstream buffered;
        int code = 2;
        if (app.got_subcommand(make_cmd)) {
            if (make_family != 1 && make_family != 2) {
                throw wcf::domain_error("--family must be 1 or 2");
            }
            code = cmd_make(make_family, make_x, make_out, buffered);
        } else if (app.got_subcommand(describe_cmd)) {
            check_format(describe_fmt);
            code = cmd_describe(describe_path, describe_fmt, buffered);
        } else if (app.got_subcommand(run_cmd)) {
            check_format(run_fmt);
            code = cmd_run(run_path, run_alice, run_bob, run_trials, run_seed, run_fmt, buffered);
        } else if (app.got_subcommand(curve_cmd)) {
            check_format(curve_fmt);
            if (curve_family != 1 && curve_family != 2) {
                throw wcf::domain_error("--family must be 1 or 2");
            }
            code = cmd_curve(curve_family, curve_x_min, curve_x_max, curve_steps, curve_out,
                             curve_fmt, buffered);
        } else if (app.got_subcommand(verify_cmd)) {
            check_format(verify_fmt);
            code = cmd_verify(verify_path, verify_restarts, verify_seed, verify_which, verify_fmt,
                              buffered);
        }
        std::cout << buffered.str();
        return code;
    } catch (const wcf::error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
