#include "digisim/error.hpp"
#include "digisim/pipeline.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace dp = digisim::pipeline;

int main(int argc, char **argv) {
    CLI::App app{"Synthesizes farm-level livestock datasets and spillover risk maps"};
    app.require_subcommand(0, 1);

    bool fixture = false;
    std::string fixture_out;
    app.add_flag("--fixture", fixture, "Write the synthetic two-county dataset and its config.json");
    app.add_option("--out", fixture_out, "Directory for --fixture");

    dp::RunOptions run;
    std::string config_path;
    std::string out_dir;
    for (const char *name : {"ingest", "gapfill", "ipf", "genfarms", "assign", "validate", "risk", "all"}) {
        auto *sub = app.add_subcommand(name, std::string(name) == "all" ? std::string("Run every stage in order")
                                                                        : std::string("Run the ") + name + " stage");
        sub->add_option("--config", config_path, "Pipeline config (JSON)")->required();
        sub->add_option("--county", run.counties, "Restrict to these county FIPS codes");
        sub->add_option("--livestock", run.livestock, "Restrict to these livestock types");
        sub->add_option("--out", out_dir, "Output directory (overrides the config)");
        sub->add_flag("--quiet", run.quiet, "Suppress log records");
    }
    CLI11_PARSE(app, argc, argv);

    try {
        if (fixture) {
            if (fixture_out.empty()) {
                std::cerr << "--fixture needs --out DIR\n";
                return 2;
            }
            dp::write_fixture(fixture_out);
            return 0;
        }
        const auto subs = app.get_subcommands();
        if (subs.empty()) {
            std::cerr << app.help();
            return 2;
        }
        const auto config = dp::load_config(config_path);
        if (!out_dir.empty()) {
            run.output_dir = out_dir;
        }
        return dp::run(subs.front()->get_name(), config, run);
    } catch (const digisim::Error &e) {
        std::cerr << "{\"level\":\"error\",\"kind\":\"" << digisim::to_string(e.kind()) << "\",\"msg\":"
                  << '"' << e.what() << "\"}\n";
        return 1;
    }
}
