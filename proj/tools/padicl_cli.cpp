#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "padicl/cli.hpp"

using namespace padicl;

namespace {

struct Options {
    std::string config;
    int level = -1;
    std::string out;
    std::string format = "json";
    bool timing = false;
};

void add_common(CLI::App* app, Options& o) {
    app->add_option("--config", o.config, "experiment config (YAML)")->required();
    app->add_option("--level", o.level, "tower level n");
    app->add_option("--out", o.out, "write the report here instead of stdout");
    app->add_option("--format", o.format, "json or text")->check(CLI::IsMember({"json", "text"}));
    app->add_flag("--timing", o.timing, "include wall time in the json report");
}

int emit(const cli::Report& rep, const Options& o) {
    std::string body = o.format == "text" ? cli::report_text(rep) : cli::report_json(rep, o.timing).dump(2) + "\n";
    if (o.out.empty()) {
        std::cout << body;
    } else {
        std::ofstream f(o.out);
        if (!f) {
            std::cerr << "IOError: cannot write " << o.out << "\n";
            return 2;
        }
        f << body;
    }
    return cli::exit_code(rep);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"padicl: p-adic L-functions of elliptic curves over F_q(t)"};
    app.require_subcommand(1);
    Options o;
    std::string command;
    std::vector<std::string> checks;

    auto simple = [&](const std::string& name, const std::string& help, const std::string& check) {
        auto* s = app.add_subcommand(name, help);
        add_common(s, o);
        s->callback([&, name, check] {
            command = name;
            checks = {check};
        });
    };
    simple("places", "local data at the bad places and at S", "places");
    simple("lvalue", "L-values at 1 for the characters of a level", "lvalue");
    simple("gauss", "Gauss sums for the characters of gauss.modulus", "gauss");
    simple("classical-fe", "functional equation of the classical L-functions", "classical-fe");
    simple("build", "build the hat and script elements at a level", "build");

    auto* run = app.add_subcommand("run", "run the checks listed in the config");
    add_common(run, o);
    run->callback([&] { command = "run"; });

    auto* check = app.add_subcommand("check", "verify one identity");
    check->require_subcommand(1);
    for (std::string c : {"fe", "spec", "daleth", "mtt", "theta", "constfield", "interp", "valuation"}) {
        auto* s = check->add_subcommand(c);
        add_common(s, o);
        s->callback([&, c] {
            command = "check " + c;
            checks = {c};
        });
    }
    auto* iw = app.add_subcommand("iwasawa", "Iwasawa invariants of the script element");
    iw->require_subcommand(1);
    for (std::string c : {"mu", "order", "weierstrass", "restrict"}) {
        auto* s = iw->add_subcommand(c);
        add_common(s, o);
        s->callback([&, c] {
            command = "iwasawa " + c;
            checks = {c};
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        cli::Runner runner(cli::load_config(o.config));
        if (command == "run") checks = runner.config().checks;
        return emit(runner.run(command, checks, o.level), o);
    } catch (const ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const PrecisionExhausted& e) {
        std::cerr << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
