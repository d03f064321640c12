#include "tmsim/harness.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace tmsim {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
    throw ConfigError(path + ": " + msg);
}

void check_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
    if (!obj.is_object()) fail(path, "expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
    }
}

uint64_t get_u64(const json& obj, const std::string& path, const std::string& key,
                 std::optional<uint64_t> def = std::nullopt) {
    if (!obj.contains(key)) {
        if (def) return *def;
        fail(path + "." + key, "missing required field");
    }
    const json& v = obj.at(key);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<int64_t>() >= 0))
        fail(path + "." + key, "expected a non-negative integer");
    return v.get<uint64_t>();
}

double get_num(const json& obj, const std::string& path, const std::string& key, double def) {
    if (!obj.contains(key)) return def;
    if (!obj.at(key).is_number()) fail(path + "." + key, "expected a number");
    return obj.at(key).get<double>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key, bool def) {
    if (!obj.contains(key)) return def;
    if (!obj.at(key).is_boolean()) fail(path + "." + key, "expected a boolean");
    return obj.at(key).get<bool>();
}

std::string get_str(const json& obj, const std::string& path, const std::string& key,
                    std::optional<std::string> def = std::nullopt) {
    if (!obj.contains(key)) {
        if (def) return *def;
        fail(path + "." + key, "missing required field");
    }
    if (!obj.at(key).is_string()) fail(path + "." + key, "expected a string");
    return obj.at(key).get<std::string>();
}

Alpha get_alpha(const json& obj, const std::string& path, const std::string& key, Alpha def) {
    if (!obj.contains(key)) return def;
    const json& v = obj.at(key);
    try {
        if (v.is_string()) return parse_alpha(v.get<std::string>());
        if (v.is_number_unsigned() || v.is_number_integer())
            return parse_alpha(std::to_string(v.get<uint64_t>()));
        if (v.is_number_float()) {
            std::ostringstream os;
            os << v.get<double>();
            return parse_alpha(os.str());
        }
    } catch (const std::invalid_argument& e) {
        fail(path + "." + key, e.what());
    }
    fail(path + "." + key, "expected alpha as string or number");
}

SchedKind sched_kind_from(const std::string& s, const std::string& path) {
    if (s == "RoundRobin") return SchedKind::RoundRobin;
    if (s == "DRR") return SchedKind::DRR;
    if (s == "StrictPriority") return SchedKind::StrictPriority;
    fail(path, "unknown scheduler '" + s + "' (RoundRobin|DRR|StrictPriority)");
}

AdmissionPolicy parse_policy(const json& j, const std::string& path, std::optional<Alpha>* alpha_out,
                             std::string* tag_out) {
    check_keys(j, path, {"kind", "alpha", "static_limit_cells"});
    AdmissionPolicy p;
    std::string kind = get_str(j, path, "kind");
    auto k = policy_kind_from_name(kind);
    if (!k) fail(path + ".kind", "unknown policy kind '" + kind + "'");
    p.kind = *k;
    std::optional<Alpha> alpha;
    if (j.contains("alpha")) alpha = get_alpha(j, path, "alpha", Alpha{1, 1});
    if (j.contains("static_limit_cells")) {
        if (p.kind != PolicyKind::StaticThreshold)
            fail(path + ".static_limit_cells", "only valid for StaticThreshold");
        p.static_limit_cells = static_cast<uint32_t>(get_u64(j, path, "static_limit_cells"));
    }
    if (p.kind == PolicyKind::StaticThreshold && !p.static_limit_cells)
        fail(path, "StaticThreshold requires static_limit_cells");
    if (alpha_out) *alpha_out = alpha;
    if (tag_out) {
        std::ostringstream os;
        switch (p.kind) {
            case PolicyKind::StaticThreshold: os << "static-c" << *p.static_limit_cells; break;
            case PolicyKind::DynamicThreshold: os << "dt"; break;
            case PolicyKind::Occamy: os << "occamy"; break;
            case PolicyKind::Pushout: os << "pushout"; break;
        }
        Alpha a = alpha.value_or(default_alpha_for(p.kind));
        if (p.kind == PolicyKind::DynamicThreshold || p.kind == PolicyKind::Occamy) {
            os << "-a" << a.num;
            if (a.den != 1) os << "_" << a.den;
        }
        *tag_out = os.str();
    }
    return p;
}

}  // namespace

Alpha default_alpha_for(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::Occamy: return Alpha{8, 1};
        default: return Alpha{1, 1};
    }
}

WorkloadSpec parse_workload(const json& j, const std::filesystem::path& base_dir,
                            const std::string& path_prefix, size_t queue_count,
                            uint32_t mtu_bytes) {
    if (!j.is_array()) fail(path_prefix, "expected an array of generators");
    WorkloadSpec w;
    for (size_t i = 0; i < j.size(); ++i) {
        const json& g = j[i];
        std::string path = path_prefix + "[" + std::to_string(i) + "]";
        std::string type = get_str(g, path, "type");
        auto queue_ok = [&](uint64_t q) {
            if (q >= queue_count) fail(path + ".queue", "queue " + std::to_string(q) +
                                                            " does not exist in the engine config");
        };
        if (type == "RawBurst") {
            check_keys(g, path, {"type", "start_ns", "bytes", "packet_bytes", "queue", "rate_bps",
                                 "class"});
            RawBurstSpec s;
            s.start_time = SimTime{get_u64(g, path, "start_ns", uint64_t{0})};
            s.burst_size_bytes = get_u64(g, path, "bytes");
            s.packet_size_bytes = static_cast<uint32_t>(get_u64(g, path, "packet_bytes", 1500));
            if (s.packet_size_bytes == 0 || s.packet_size_bytes > mtu_bytes)
                fail(path + ".packet_bytes", "must be in [1, mtu_bytes]");
            s.target_queue = static_cast<QueueId>(get_u64(g, path, "queue"));
            queue_ok(s.target_queue);
            s.rate_bps = get_u64(g, path, "rate_bps", uint64_t{0});
            s.priority_class = static_cast<uint8_t>(get_u64(g, path, "class", uint64_t{0}));
            w.generators.emplace_back(s);
        } else if (type == "IncastQuery") {
            check_keys(g, path, {"type", "fan_in", "query_bytes", "start_ns", "queries_per_sec",
                                 "queue", "class", "ingress_rate_bps"});
            IncastQuerySpec s;
            s.fan_in = static_cast<uint32_t>(get_u64(g, path, "fan_in"));
            if (s.fan_in == 0) fail(path + ".fan_in", "must be >= 1");
            s.query_size_bytes = get_u64(g, path, "query_bytes");
            if (s.query_size_bytes < s.fan_in)
                fail(path + ".query_bytes", "must give every response flow at least one byte");
            s.first_query = SimTime{get_u64(g, path, "start_ns", uint64_t{0})};
            s.queries_per_sec = get_num(g, path, "queries_per_sec", 0.0);
            s.target_queue = static_cast<QueueId>(get_u64(g, path, "queue"));
            queue_ok(s.target_queue);
            s.priority_class = static_cast<uint8_t>(get_u64(g, path, "class", uint64_t{0}));
            s.ingress_rate_bps = get_u64(g, path, "ingress_rate_bps", uint64_t{0});
            w.generators.emplace_back(s);
        } else if (type == "LongLived") {
            check_keys(g, path, {"type", "flows", "queues", "class", "ingress_rate_bps"});
            LongLivedSpec s;
            s.flow_count = static_cast<uint32_t>(get_u64(g, path, "flows"));
            if (!g.contains("queues") || !g.at("queues").is_array() || g.at("queues").empty())
                fail(path + ".queues", "expected a non-empty array of queue ids");
            for (const json& q : g.at("queues")) {
                uint64_t id = q.get<uint64_t>();
                queue_ok(id);
                s.dst_queues.push_back(static_cast<QueueId>(id));
            }
            s.priority_class = static_cast<uint8_t>(get_u64(g, path, "class", uint64_t{0}));
            s.ingress_rate_bps = get_u64(g, path, "ingress_rate_bps", uint64_t{0});
            w.generators.emplace_back(s);
        } else if (type == "PoissonFlows") {
            check_keys(g, path, {"type", "flows_per_sec", "cdf_file", "queues", "class",
                                 "ingress_rate_bps"});
            PoissonFlowsSpec s;
            s.flows_per_sec = get_num(g, path, "flows_per_sec", 0.0);
            if (s.flows_per_sec <= 0) fail(path + ".flows_per_sec", "must be > 0");
            std::string cdf = get_str(g, path, "cdf_file");
            std::filesystem::path p(cdf);
            if (p.is_relative()) p = base_dir / p;
            s.sizes = Cdf::load_file(p.string());
            if (!g.contains("queues") || !g.at("queues").is_array() || g.at("queues").empty())
                fail(path + ".queues", "expected a non-empty array of queue ids");
            for (const json& q : g.at("queues")) {
                uint64_t id = q.get<uint64_t>();
                queue_ok(id);
                s.dst_queues.push_back(static_cast<QueueId>(id));
            }
            s.priority_class = static_cast<uint8_t>(get_u64(g, path, "class", uint64_t{0}));
            s.ingress_rate_bps = get_u64(g, path, "ingress_rate_bps", uint64_t{0});
            w.generators.emplace_back(s);
        } else {
            fail(path + ".type", "unknown generator type '" + type + "'");
        }
    }
    return w;
}

ScenarioSpec parse_scenario(const json& j, const std::filesystem::path& base_dir) {
    check_keys(j, "$", {"name", "engine", "policy", "sweep", "workload", "outputs"});
    ScenarioSpec spec;
    spec.raw = j;
    spec.name = get_str(j, "$", "name");
    if (spec.name.empty() || spec.name.find('/') != std::string::npos)
        fail("$.name", "must be a non-empty directory-safe name");

    if (!j.contains("engine")) fail("$.engine", "missing required field");
    const json& e = j.at("engine");
    check_keys(e, "$.engine",
               {"cell_size_bytes", "mtu_bytes", "capacity_cells", "buffer_kb_per_gbps",
                "aggregate_bps", "ports", "expulsion", "transport", "drr_quantum_bytes",
                "sim_duration_ns", "conservation_check"});

    EngineConfig& cfg = spec.engine;
    cfg.name = spec.name;
    cfg.geometry.cell_size_bytes = static_cast<uint32_t>(get_u64(e, "$.engine", "cell_size_bytes", 200));
    cfg.mtu_bytes = static_cast<uint32_t>(get_u64(e, "$.engine", "mtu_bytes", 1500));
    cfg.aggregate_bps = get_u64(e, "$.engine", "aggregate_bps", uint64_t{0});
    cfg.drr_quantum_bytes = get_u64(e, "$.engine", "drr_quantum_bytes", 1500);
    cfg.sim_duration = SimTime{get_u64(e, "$.engine", "sim_duration_ns")};
    cfg.check_conservation_each_slot = get_bool(e, "$.engine", "conservation_check", true);

    if (!e.contains("ports") || !e.at("ports").is_array() || e.at("ports").empty())
        fail("$.engine.ports", "expected a non-empty array");
    QueueId next_queue = 0;
    double total_gbps = 0;
    for (size_t pi = 0; pi < e.at("ports").size(); ++pi) {
        const json& pj = e.at("ports")[pi];
        std::string ppath = "$.engine.ports[" + std::to_string(pi) + "]";
        check_keys(pj, ppath, {"rate_bps", "rate_gbps", "scheduler", "queues"});
        PortSpec port;
        port.port_id = static_cast<PortId>(pi);
        if (pj.contains("rate_bps") && pj.contains("rate_gbps"))
            fail(ppath, "give rate_bps or rate_gbps, not both");
        if (pj.contains("rate_gbps"))
            port.line_rate_bits_per_sec =
                static_cast<uint64_t>(get_num(pj, ppath, "rate_gbps", 0) * 1e9);
        else
            port.line_rate_bits_per_sec = get_u64(pj, ppath, "rate_bps");
        if (port.line_rate_bits_per_sec == 0) fail(ppath, "line rate must be > 0");
        total_gbps += static_cast<double>(port.line_rate_bits_per_sec) / 1e9;
        port.scheduler_kind = sched_kind_from(get_str(pj, ppath, "scheduler", "RoundRobin"),
                                              ppath + ".scheduler");
        if (!pj.contains("queues") || !pj.at("queues").is_array() || pj.at("queues").empty())
            fail(ppath + ".queues", "expected a non-empty array");
        for (size_t qi = 0; qi < pj.at("queues").size(); ++qi) {
            const json& qj = pj.at("queues")[qi];
            std::string qpath = ppath + ".queues[" + std::to_string(qi) + "]";
            check_keys(qj, qpath, {"alpha", "priority"});
            QueueCfg qc;
            qc.queue_id = next_queue++;
            qc.port_id = port.port_id;
            qc.priority_rank = static_cast<uint32_t>(get_u64(qj, qpath, "priority", qi));
            bool has_alpha = qj.contains("alpha");
            qc.alpha = get_alpha(qj, qpath, "alpha", Alpha{1, 1});
            spec.alpha_explicit.push_back(has_alpha);
            cfg.queues.push_back(qc);
            port.queue_ids.push_back(qc.queue_id);
        }
        cfg.ports.push_back(std::move(port));
    }

    bool has_capacity = e.contains("capacity_cells");
    bool has_per_port = e.contains("buffer_kb_per_gbps");
    if (has_capacity && has_per_port)
        fail("$.engine.capacity_cells",
             "contradictory sizing: give capacity_cells or buffer_kb_per_gbps, not both");
    if (has_capacity) {
        cfg.capacity_cells = static_cast<uint32_t>(get_u64(e, "$.engine", "capacity_cells"));
    } else {
        // 5.12 KB per port per Gbps unless told otherwise (KB = 1000 bytes)
        double kb = get_num(e, "$.engine", "buffer_kb_per_gbps", 5.12);
        double bytes = kb * 1000.0 * total_gbps;
        cfg.capacity_cells = static_cast<uint32_t>(bytes / cfg.geometry.cell_size_bytes);
    }

    if (e.contains("expulsion")) {
        const json& x = e.at("expulsion");
        check_keys(x, "$.engine.expulsion", {"enabled", "attempts_per_slot", "burst_cap_tokens"});
        if (x.contains("enabled"))
            cfg.expulsion.enabled = get_bool(x, "$.engine.expulsion", "enabled", false);
        cfg.expulsion.attempts_per_slot =
            static_cast<uint32_t>(get_u64(x, "$.engine.expulsion", "attempts_per_slot", 1));
        if (x.contains("burst_cap_tokens"))
            cfg.expulsion.burst_cap_tokens =
                static_cast<int64_t>(get_u64(x, "$.engine.expulsion", "burst_cap_tokens"));
    }
    bool expulsion_pinned = e.contains("expulsion") && e.at("expulsion").contains("enabled");

    if (e.contains("transport")) {
        const json& t = e.at("transport");
        check_keys(t, "$.engine.transport", {"window_packets", "rto_ns"});
        cfg.transport.window_packets =
            static_cast<uint32_t>(get_u64(t, "$.engine.transport", "window_packets", 43));
        cfg.transport.rto = SimTime{get_u64(t, "$.engine.transport", "rto_ns", 5'000'000)};
    }

    // base policy (defaults to DT alpha=1)
    std::optional<Alpha> base_alpha;
    std::string base_tag = "dt-a1";
    if (j.contains("policy")) {
        cfg.policy = parse_policy(j.at("policy"), "$.policy", &base_alpha, &base_tag);
    }
    if (!expulsion_pinned) cfg.expulsion.enabled = (cfg.policy.kind == PolicyKind::Occamy);

    // sweep list; the base policy is the sole entry when absent
    if (j.contains("sweep")) {
        const json& s = j.at("sweep");
        check_keys(s, "$.sweep", {"policies", "seeds"});
        if (s.contains("policies")) {
            if (!s.at("policies").is_array() || s.at("policies").empty())
                fail("$.sweep.policies", "expected a non-empty array");
            for (size_t i = 0; i < s.at("policies").size(); ++i) {
                PolicyOverride po;
                po.policy = parse_policy(s.at("policies")[i],
                                         "$.sweep.policies[" + std::to_string(i) + "]", &po.alpha,
                                         &po.tag);
                spec.policy_sweep.push_back(std::move(po));
            }
        }
        if (s.contains("seeds")) {
            if (!s.at("seeds").is_array() || s.at("seeds").empty())
                fail("$.sweep.seeds", "expected a non-empty array");
            for (const json& v : s.at("seeds")) spec.seeds.push_back(v.get<uint64_t>());
        }
    }
    if (spec.policy_sweep.empty())
        spec.policy_sweep.push_back(PolicyOverride{cfg.policy, base_alpha, base_tag});
    if (spec.seeds.empty()) spec.seeds.push_back(1);

    // resolve base queue alphas from the base policy default
    Alpha base_def = base_alpha.value_or(default_alpha_for(cfg.policy.kind));
    for (size_t qi = 0; qi < cfg.queues.size(); ++qi)
        if (!spec.alpha_explicit[qi]) cfg.queues[qi].alpha = base_def;

    if (!j.contains("workload")) fail("$.workload", "missing required field");
    spec.workload = parse_workload(j.at("workload"), base_dir, "$.workload", cfg.queues.size(),
                                   cfg.mtu_bytes);

    if (j.contains("outputs")) {
        const json& o = j.at("outputs");
        check_keys(o, "$.outputs",
                   {"trace", "flow_csv", "summary_csv", "queue_trace", "queue_trace_interval_ns"});
        spec.outputs.trace = get_bool(o, "$.outputs", "trace", true);
        spec.outputs.flow_csv = get_bool(o, "$.outputs", "flow_csv", true);
        spec.outputs.summary_csv = get_bool(o, "$.outputs", "summary_csv", true);
        spec.outputs.queue_trace = get_bool(o, "$.outputs", "queue_trace", false);
        spec.outputs.queue_trace_interval_ns =
            get_u64(o, "$.outputs", "queue_trace_interval_ns", 1000);
    }

    // constructing an engine validates referential integrity up front
    Engine probe(materialize(spec, spec.policy_sweep.front(), spec.seeds.front()));
    (void)probe;
    return spec;
}

ScenarioSpec load_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open scenario file: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    // manifests embed the scenario verbatim; accept them transparently
    if (j.is_object() && j.contains("scenario")) j = j.at("scenario");
    return parse_scenario(j, path.parent_path());
}

EngineConfig materialize(const ScenarioSpec& spec, const PolicyOverride& po, uint64_t seed) {
    EngineConfig cfg = spec.engine;
    cfg.policy = po.policy;
    cfg.random_seed = seed;
    Alpha def = po.alpha.value_or(default_alpha_for(po.policy.kind));
    for (size_t qi = 0; qi < cfg.queues.size(); ++qi)
        if (!spec.alpha_explicit[qi]) cfg.queues[qi].alpha = def;
    bool expulsion_pinned = spec.raw.contains("engine") &&
                            spec.raw.at("engine").contains("expulsion") &&
                            spec.raw.at("engine").at("expulsion").contains("enabled");
    if (!expulsion_pinned) cfg.expulsion.enabled = (po.policy.kind == PolicyKind::Occamy);
    return cfg;
}

uint64_t fnv1a64(std::string_view data) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::vector<FlowRecord> flow_table(const Traffic& traffic) {
    std::vector<FlowRecord> out;
    for (const FlowState& f : traffic.flows()) {
        FlowRecord r;
        r.flow_id = f.flow_id;
        r.priority_class = f.priority_class;
        r.bytes = f.total_bytes;
        r.start = f.start_time;
        r.finish = f.finish_time;
        out.push_back(r);
    }
    return out;
}

std::vector<QueryRecord> query_table(const Traffic& traffic) {
    std::vector<QueryRecord> out;
    for (const QueryState& q : traffic.queries()) {
        QueryRecord r;
        r.query_id = q.query_id;
        r.issue = q.issue_time;
        r.completion = q.completion_time;
        out.push_back(r);
    }
    return out;
}

namespace {

std::string config_fingerprint(const EngineConfig& cfg) {
    std::ostringstream os;
    os << cfg.geometry.cell_size_bytes << '|' << cfg.mtu_bytes << '|' << cfg.capacity_cells << '|'
       << cfg.aggregate_bps << '|' << cfg.random_seed << '|' << cfg.sim_duration.ns << '|'
       << policy_kind_name(cfg.policy.kind) << '|'
       << (cfg.policy.static_limit_cells ? *cfg.policy.static_limit_cells : 0) << '|'
       << cfg.expulsion.enabled << '|' << cfg.expulsion.attempts_per_slot << '|'
       << cfg.transport.window_packets << '|' << cfg.transport.rto.ns << '|'
       << cfg.drr_quantum_bytes;
    for (const PortSpec& p : cfg.ports) {
        os << "|P" << p.port_id << ':' << p.line_rate_bits_per_sec << ':'
           << static_cast<int>(p.scheduler_kind);
        for (QueueId q : p.queue_ids) os << ',' << q;
    }
    for (const QueueCfg& q : cfg.queues)
        os << "|Q" << q.queue_id << ':' << q.alpha.num << '/' << q.alpha.den << ':'
           << q.priority_rank;
    return os.str();
}

}  // namespace

std::vector<RunResult> run_scenario(const ScenarioSpec& spec,
                                    const std::filesystem::path& out_root) {
    namespace fs = std::filesystem;
    std::vector<RunResult> results;
    fs::path scen_dir = out_root / spec.name;
    fs::create_directories(scen_dir);
    for (const PolicyOverride& po : spec.policy_sweep) {
        for (uint64_t seed : spec.seeds) {
            EngineConfig cfg = materialize(spec, po, seed);
            Engine engine(cfg);
            std::vector<EventRecord> events = engine.run(spec.workload);

            std::ostringstream dirname;
            dirname << po.tag << "_seed" << seed;
            fs::path run_dir = scen_dir / dirname.str();
            fs::create_directories(run_dir);

            if (spec.outputs.trace) {
                std::ofstream t(run_dir / "trace.tsv");
                write_trace(t, events);
            }

            SummaryConfig sc;
            sc.capacity_cells = cfg.capacity_cells;
            sc.slot = slot_length(cfg);
            sc.run_duration = cfg.sim_duration;
            sc.flow_table = flow_table(engine.traffic());
            sc.query_table = query_table(engine.traffic());
            RunSummary summary = summarize(events, sc);

            if (spec.outputs.flow_csv) {
                std::ofstream f(run_dir / "flows.csv");
                write_flow_csv(f, summary);
                std::ofstream q(run_dir / "queries.csv");
                write_query_csv(q, summary);
            }
            if (spec.outputs.summary_csv) {
                std::ofstream s(run_dir / "summary.csv");
                write_summary_csv(s, summary);
            }
            if (spec.outputs.queue_trace) {
                std::ofstream qt(run_dir / "queue_trace.tsv");
                write_queue_trace(qt, events, cfg.queues.size(),
                                  spec.outputs.queue_trace_interval_ns, cfg.sim_duration);
            }

            json manifest;
            manifest["scenario"] = spec.raw;
            manifest["policy"] = po.tag;
            manifest["seed"] = seed;
            char hex[32];
            std::snprintf(hex, sizeof hex, "%016llx",
                          static_cast<unsigned long long>(fnv1a64(config_fingerprint(cfg))));
            manifest["config_hash"] = std::string(hex);
            std::ofstream m(run_dir / "manifest.json");
            m << manifest.dump(2) << '\n';

            results.push_back(RunResult{run_dir, po.tag, seed});
        }
    }
    return results;
}

}  // namespace tmsim
