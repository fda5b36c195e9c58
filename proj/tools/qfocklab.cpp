// qfocklab <subcommand> --config <path> [--out <path>] [--format json|csv]
//
// Exit codes: 0 all checks pass, 1 a tolerance check failed, 2 config,
// usage, budget or stage error.

#include <qfocklab/config.hpp>
#include <qfocklab/report.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <map>
#include <string>

namespace {

struct Subcommand {
    const char* name;
    const char* help;
    unsigned stages;
};

constexpr Subcommand kSubcommands[] = {
    {"report", "full pipeline", qfocklab::kStageAll},
    {"gram", "Gram matrix diagnostics per level", qfocklab::kStageGram},
    {"moments", "vacuum moments against the pairing oracle", qfocklab::kStageMoments},
    {"modular", "modular covariance, Δ-norm lemma, J and S checks", qfocklab::kStageModular},
    {"verdict", "μ, certificates and the fixed / non-fixed verdict", qfocklab::kStageVerdict},
    {"probe", "relative commutant probe", qfocklab::kStageProbe},
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"q-deformed Araki-Woods laboratory"};
    app.require_subcommand(1);
    std::string config_path, out_path, format = "json";
    for (const auto& sc : kSubcommands) {
        auto* sub = app.add_subcommand(sc.name, sc.help);
        sub->add_option("--config", config_path, "run configuration (JSON)")->required();
        sub->add_option("--out", out_path, "output file (json) or directory (csv); json defaults to stdout");
        sub->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    const Subcommand* chosen = nullptr;
    for (const auto& sc : kSubcommands)
        if (app.got_subcommand(sc.name)) chosen = &sc;

    try {
        const auto config = qfocklab::load_config(config_path);
        const auto bundle = qfocklab::run(config, chosen->stages, chosen->name);
        if (format == "csv") {
            if (out_path.empty()) {
                std::cerr << "error: --format csv needs --out <directory>\n";
                return 2;
            }
            qfocklab::emit(bundle, qfocklab::Format::Csv, out_path);
        } else if (out_path.empty()) {
            std::cout << qfocklab::to_json_text(bundle);
        } else {
            qfocklab::emit(bundle, qfocklab::Format::Json, out_path);
        }
        if (!bundle.pass()) {
            for (const auto& name : bundle.failed_checks) std::cerr << "check failed: " << name << "\n";
            return 1;
        }
        return 0;
    } catch (const qfocklab::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
