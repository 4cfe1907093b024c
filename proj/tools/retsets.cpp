// retsets: batch driver. One subcommand per job type; parameters come from
// --config (JSON) and/or per-parameter flags, flags winning.

#include "retsets/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace {

using namespace retsets;
using namespace retsets::cli;

Json read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open config '" + path + "'");
    }
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw SchemaError("config", std::string("invalid JSON: ") + e.what());
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Return sets of polynomial multiple recurrence: counterexamples and certificates"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(0, 1);

    std::string config_path;
    std::string format;
    std::string out_path;
    std::string grid_flag;
    std::string window_flag;
    bool timing = false;
    app.add_option("--config", config_path, "JSON job file {command, params, output}");
    app.add_option("--format", format, "json, csv or text")->check(CLI::IsMember({"json", "csv", "text"}));
    app.add_option("--out", out_path, "write output here instead of stdout");
    app.add_option("--grid", grid_flag, "initial enclosure grid");
    app.add_option("--window", window_flag, "window: lo,hi or JSON");
    app.add_flag("--timing", timing, "add timing_ms to JSON output");

    std::map<std::string, std::map<std::string, std::vector<std::string>>> flags;
    for (const auto& spec : command_specs()) {
        auto* sub = app.add_subcommand(spec.name, spec.help);
        sub->fallthrough();
        for (const auto& p : spec.params) {
            if (p.name == "window" || p.name == "grid") {
                continue; // shared top-level flags
            }
            std::string help = p.help + (p.required ? " (required)" : "");
            if (!p.fallback.is_null()) {
                help += " [default " + p.fallback.dump() + "]";
            }
            auto* opt = sub->add_option("--" + p.name, flags[spec.name][p.name], help);
            if (p.type != ParamType::string_list) {
                opt->expected(1);
            }
            opt->allow_extra_args(false);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        JobConfig job;
        if (!config_path.empty()) {
            job = config_from_json(read_config(config_path));
        }
        const auto subs = app.get_subcommands();
        if (!subs.empty()) {
            const std::string name = subs.front()->get_name();
            if (!job.command.empty() && job.command != name) {
                throw SchemaError("command", "config says '" + job.command + "' but subcommand is '" + name + "'");
            }
            job.command = name;
        }
        if (job.command.empty()) {
            std::cerr << app.help();
            throw SchemaError("command", "no subcommand given and none in config");
        }
        const auto& spec = command_spec(job.command);
        for (const auto& p : spec.params) {
            const auto& raw = flags[job.command][p.name];
            if (!raw.empty()) {
                job.params[p.name] = flag_value(p, raw);
            }
            if (p.name == "grid" && !grid_flag.empty()) {
                job.params["grid"] = flag_value(p, {grid_flag});
            }
            if (p.name == "window" && !window_flag.empty()) {
                job.params["window"] = flag_value(p, {window_flag});
            }
        }
        if (!format.empty()) {
            job.format = format;
        }
        if (!out_path.empty()) {
            job.out_path = out_path;
        }
        job.timing = timing;

        const RunReport rep = run(job);
        const std::string text = emit(rep, job.format);
        if (job.out_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream out(job.out_path, std::ios::binary);
            if (!out) {
                throw Error("cannot write '" + job.out_path + "'");
            }
            out << text;
        }
        return static_cast<int>(rep.exit_code);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return static_cast<int>(ExitCode::error);
    }
}
