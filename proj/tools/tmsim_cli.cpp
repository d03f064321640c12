#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "tmsim/harness.hpp"
#include "tmsim/kernels.hpp"

namespace fs = std::filesystem;
using namespace tmsim;

namespace {

fs::path output_root(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("TMSIM_OUTPUT_ROOT")) return env;
    return "out";
}

int cmd_validate(const std::string& file) {
    ScenarioSpec spec = load_scenario_file(file);
    const EngineConfig& cfg = spec.engine;
    std::cout << "scenario '" << spec.name << "' ok\n";
    std::cout << "  buffer: " << cfg.capacity_cells << " cells ("
              << cfg.capacity_cells * cfg.geometry.cell_size_bytes / 1000 << " KB), cell "
              << cfg.geometry.cell_size_bytes << "B, mtu " << cfg.mtu_bytes << "B\n";
    SlotLength slot = slot_length(cfg);
    std::cout << "  ports: " << cfg.ports.size() << ", queues: " << cfg.queues.size()
              << ", cell-slot " << slot.num_ns << "/" << slot.den << " ns\n";
    std::cout << "  policy sweep:";
    for (const auto& po : spec.policy_sweep) std::cout << ' ' << po.tag;
    std::cout << "\n  seeds:";
    for (uint64_t s : spec.seeds) std::cout << ' ' << s;
    std::cout << "\n  duration: " << cfg.sim_duration.ns << " ns\n";
    return 0;
}

int cmd_run(const std::string& file, const std::string& out_flag) {
    ScenarioSpec spec = load_scenario_file(file);
    fs::path root = output_root(out_flag);
    auto results = run_scenario(spec, root);
    for (const auto& r : results)
        std::cout << r.policy_tag << " seed " << r.seed << " -> " << r.dir.string() << '\n';
    return 0;
}

int cmd_sweep(const std::string& file, const std::string& out_flag,
              const std::vector<std::string>& policies, const std::vector<uint64_t>& seeds) {
    ScenarioSpec spec = load_scenario_file(file);
    if (!policies.empty()) {
        spec.policy_sweep.clear();
        for (const std::string& p : policies) {
            // "kind" or "kind:alpha", e.g. DT:1, Occamy:8, Pushout
            std::string kind = p;
            std::optional<Alpha> alpha;
            if (auto colon = p.find(':'); colon != std::string::npos) {
                kind = p.substr(0, colon);
                alpha = parse_alpha(p.substr(colon + 1));
            }
            auto k = policy_kind_from_name(kind);
            if (!k) throw ConfigError("unknown policy '" + kind + "'");
            PolicyOverride po;
            po.policy.kind = *k;
            if (*k == PolicyKind::StaticThreshold)
                throw ConfigError("StaticThreshold sweeps need a scenario-file policy entry");
            po.alpha = alpha;
            Alpha a = alpha.value_or(default_alpha_for(*k));
            po.tag = std::string(*k == PolicyKind::DynamicThreshold ? "dt"
                                 : *k == PolicyKind::Occamy         ? "occamy"
                                                                    : "pushout");
            if (*k != PolicyKind::Pushout) {
                po.tag += "-a" + std::to_string(a.num);
                if (a.den != 1) po.tag += "_" + std::to_string(a.den);
            }
            spec.policy_sweep.push_back(std::move(po));
        }
    }
    if (!seeds.empty()) spec.seeds = seeds;
    auto results = run_scenario(spec, output_root(out_flag));
    for (const auto& r : results)
        std::cout << r.policy_tag << " seed " << r.seed << " -> " << r.dir.string() << '\n';
    return 0;
}

int cmd_list(const std::string& dir) {
    fs::path d = dir.empty() ? "scenarios" : dir;
    if (!fs::is_directory(d)) {
        std::cerr << "no scenario directory at " << d << '\n';
        return 1;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(d))
        if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        try {
            ScenarioSpec spec = load_scenario_file(f);
            std::cout << spec.name << "  (" << f.string() << ")  policies:";
            for (const auto& po : spec.policy_sweep) std::cout << ' ' << po.tag;
            std::cout << '\n';
        } catch (const std::exception& e) {
            std::cout << f.string() << "  INVALID: " << e.what() << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tmsim: cell-granular shared-buffer traffic-manager simulator"};
    app.require_subcommand(1);

    std::string file, out_flag, scen_dir;
    std::vector<std::string> policies;
    std::vector<uint64_t> seeds;

    CLI::App* run = app.add_subcommand("run", "run a scenario file (or a run manifest)");
    run->add_option("scenario", file, "scenario JSON file")->required();
    run->add_option("--out", out_flag, "output root (default $TMSIM_OUTPUT_ROOT or ./out)");

    CLI::App* validate = app.add_subcommand("validate", "validate a scenario file");
    validate->add_option("scenario", file, "scenario JSON file")->required();

    CLI::App* sweep = app.add_subcommand("sweep", "run a scenario across policies and seeds");
    sweep->add_option("scenario", file, "scenario JSON file")->required();
    sweep->add_option("--policies", policies,
                      "policy list, e.g. DT:1 DT:4 Occamy:8 Pushout (kind[:alpha])");
    sweep->add_option("--seeds", seeds, "seed list");
    sweep->add_option("--out", out_flag, "output root");

    CLI::App* list = app.add_subcommand("list-scenarios", "list scenario files");
    list->add_option("--dir", scen_dir, "scenario directory (default ./scenarios)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(file, out_flag);
        if (validate->parsed()) return cmd_validate(file);
        if (sweep->parsed()) return cmd_sweep(file, out_flag, policies, seeds);
        if (list->parsed()) return cmd_list(scen_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
