// Command-line driver: builds the exact rotation/return-time objects, runs
// the certified checks, and emits JSON/CSV artifacts.
//
// Commands: convergents, tower, build, verify, scan, probe.
// Exit codes: 0 all checks pass, 1 any check failed, 2 usage/config error.

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kinexp/checks.hpp"
#include "kinexp/suspension.hpp"

using namespace kinexp;
namespace fs = std::filesystem;

namespace {

struct RunConfig {
    long a = 2;
    int N = 5;
    int n_min = 1;
    int n_max = 2;
    int samples = 10;
    std::uint64_t seed = 1;
    long naive_cap = 1000000;
    long enum_cap = 1000000;
    std::string eps = "1/10";
    std::string out_dir;
    std::string format = "json";
    std::string search_depth = "1000000000000000000000000000000000000000000000000";

    json to_json() const {
        return json{{"a", a},           {"N", N},
                    {"n_min", n_min},   {"n_max", n_max},
                    {"samples", samples}, {"seed", seed},
                    {"naive_cap", naive_cap}, {"enum_cap", enum_cap},
                    {"eps", eps},       {"out", out_dir},
                    {"format", format}, {"search_depth", search_depth}};
    }
};

void apply_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    json j = json::parse(in);
    if (j.contains("a")) cfg.a = j["a"].get<long>();
    if (j.contains("N")) cfg.N = j["N"].get<int>();
    if (j.contains("n_min")) cfg.n_min = j["n_min"].get<int>();
    if (j.contains("n_max")) cfg.n_max = j["n_max"].get<int>();
    if (j.contains("samples")) cfg.samples = j["samples"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("naive_cap")) cfg.naive_cap = j["naive_cap"].get<long>();
    if (j.contains("enum_cap")) cfg.enum_cap = j["enum_cap"].get<long>();
    if (j.contains("eps")) cfg.eps = j["eps"].get<std::string>();
    if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
    if (j.contains("format")) cfg.format = j["format"].get<std::string>();
    if (j.contains("search_depth")) cfg.search_depth = j["search_depth"].get<std::string>();
}

// write-then-rename so partially written artifacts never appear
void atomic_write(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
    }
    fs::rename(tmp, path);
}

void emit(const RunConfig& cfg, const std::string& name, const json& doc,
          const std::string& csv) {
    if (cfg.out_dir.empty()) {
        if (cfg.format == "csv")
            std::cout << csv;
        else
            std::cout << doc.dump(2) << "\n";
        return;
    }
    fs::create_directories(cfg.out_dir);
    atomic_write(fs::path(cfg.out_dir) / (name + ".json"), doc.dump(2) + "\n");
    atomic_write(fs::path(cfg.out_dir) / (name + ".csv"), csv);
    std::cout << "wrote " << (fs::path(cfg.out_dir) / name).string() << ".{json,csv}\n";
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += "\"";
    return out;
}

int cmd_convergents(const RunConfig& cfg) {
    RotationParams P(cfg.a);
    auto cvs = convergents(P, cfg.N);
    json rows = json::array();
    std::ostringstream csv;
    csv << "n,p,q,norm,norm_decimal,det\n";
    bool ok = true;
    for (size_t n = 0; n < cvs.size(); ++n) {
        QuadElem norm = quad_abs(return_displacement(P, cvs[n]));
        Int det = n + 1 < cvs.size()
                      ? Int(-cvs[n + 1].q * cvs[n].p + cvs[n].q * cvs[n + 1].p)
                      : Int(0);
        if (n + 1 < cvs.size() && abs(det) != 1) ok = false;
        rows.push_back(json{{"n", cvs[n].n},
                            {"p", cvs[n].p.get_str()},
                            {"q", cvs[n].q.get_str()},
                            {"norm", to_json(norm)},
                            {"det_next", det.get_str()}});
        csv << cvs[n].n << "," << cvs[n].p.get_str() << "," << cvs[n].q.get_str() << ","
            << csv_escape(rat_to_string(norm.p()) + "+" + rat_to_string(norm.q()) + "*alpha")
            << "," << quad_to_decimal(norm) << "," << det.get_str() << "\n";
    }
    json doc{{"command", "convergents"}, {"config", cfg.to_json()}, {"rows", rows},
             {"unimodular", ok}};
    emit(cfg, "convergents", doc, csv.str());
    return ok ? 0 : 1;
}

int cmd_tower(const RunConfig& cfg, int n) {
    RotationParams P(cfg.a);
    TowerPartition part = tower_partition(P, n, Int(cfg.enum_cap));
    bool identity = partition_identity(P, n);
    json doc{{"command", "tower"},
             {"config", cfg.to_json()},
             {"partition", to_json(part)},
             {"identity_exact", identity},
             {"floor_count", part.floors.size()}};
    std::ostringstream csv;
    csv << "base,index,left_p,left_q,length_p,length_q,left_decimal,length_decimal\n";
    for (const auto& f : part.floors)
        csv << (f.from_long_base ? "long" : "short") << "," << f.index.get_str() << ","
            << csv_escape(rat_to_string(f.interval.left().value().p())) << ","
            << csv_escape(rat_to_string(f.interval.left().value().q())) << ","
            << csv_escape(rat_to_string(f.interval.length().p())) << ","
            << csv_escape(rat_to_string(f.interval.length().q())) << ","
            << quad_to_decimal(f.interval.left().value()) << ","
            << quad_to_decimal(f.interval.length()) << "\n";
    emit(cfg, "tower", doc, csv.str());
    return identity ? 0 : 1;
}

int cmd_build(const RunConfig& cfg) {
    RotationParams P(cfg.a);
    int maxlvl = std::max(cfg.N + 1, cfg.n_max + 2);
    LayerSystem sys(P, maxlvl);
    json layers = json::array();
    std::ostringstream csv;
    csv << "n,q_long,full_bumps,half_start,breakpoints,sup_decimal,bound_decimal\n";
    json series_doc;
    for (int n = 1; n <= cfg.N; ++n) {
        auto [spec, f] = build_layer(sys, n, Int(cfg.enum_cap) * 4);
        json lj{{"n", n},
                {"q_long", spec.q_long.get_str()},
                {"full_bumps", spec.full_bumps.get_str()},
                {"half_start", spec.half_start.get_str()},
                {"leading_sign", spec.leading_sign},
                {"breakpoints", f.nodes().size()},
                {"sup", to_json(f.sup_norm())},
                {"function", to_json(f)}};
        csv << n << "," << spec.q_long.get_str() << "," << spec.full_bumps.get_str() << ","
            << spec.half_start.get_str() << "," << f.nodes().size() << ","
            << quad_to_decimal(f.sup_norm()) << ","
            << quad_to_decimal(base_interval(P, n).length()) << "\n";
        layers.push_back(std::move(lj));
    }
    auto [series, tail] = build_series(sys, cfg.N, Int(cfg.enum_cap) * 4);
    series_doc = json{{"N", cfg.N},
                      {"breakpoints", series.nodes().size()},
                      {"tail_bound", to_json(tail)},
                      {"function", to_json(series)}};

    // sampled values for plotting
    std::ostringstream samples;
    samples << "x,value\n";
    int R = std::max(cfg.samples, 2);
    for (int k = 0; k < R; ++k) {
        Rat x(k, R);
        x.canonicalize();
        CirclePoint pt(P.from_rat(x));
        samples << rat_to_string(x) << "," << quad_to_decimal(series.eval(pt)) << "\n";
    }

    json doc{{"command", "build"}, {"config", cfg.to_json()}, {"layers", layers},
             {"series", series_doc}};
    emit(cfg, "build", doc, csv.str());
    if (!cfg.out_dir.empty())
        atomic_write(fs::path(cfg.out_dir) / "series_samples.csv", samples.str());
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    RotationParams P(cfg.a);
    int N = std::max(cfg.N, cfg.n_max + 2);
    LayerSystem sys(P, N + 1);
    CheckHarness harness(sys, N, Int(cfg.naive_cap));
    json rows = json::array();
    std::ostringstream csv;
    csv << "a,n,proposition,lhs,rhs,margin,verdict,evaluator,wall_ms\n";
    bool all_pass = true;
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
        for (SamplePoint kind :
             {SamplePoint::midpoint, SamplePoint::inner_endpoint, SamplePoint::outer_endpoint}) {
            CheckContext ctx = make_context(P, n, kind);
            std::vector<PropCheckResult> results;
            auto timed = [&](auto&& fn) {
                auto t0 = std::chrono::steady_clock::now();
                PropCheckResult r = fn();
                auto t1 = std::chrono::steady_clock::now();
                double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
                r.details["wall_ms"] = ms;
                results.push_back(std::move(r));
            };
            timed([&] { return harness.check_middle_layer(ctx); });
            timed([&] { return harness.check_previous_layer(ctx); });
            timed([&] { return harness.check_next_layer(ctx); });
            timed([&] { return harness.check_central_block(ctx); });
            timed([&] { return harness.check_upper_tail(ctx); });
            timed([&] { return harness.check_low_layers(ctx, /*brute_max_nu=*/0); });
            timed([&] { return harness.check_total_separation(ctx); });
            for (auto& r : results) {
                all_pass = all_pass && r.verdict == Verdict::pass;
                csv << r.a << "," << r.n << "," << r.id << "," << quad_to_decimal(r.lhs) << ","
                    << quad_to_decimal(r.rhs) << "," << quad_to_decimal(r.margin) << ","
                    << to_string(r.verdict) << "," << r.evaluator << ","
                    << r.details.value("wall_ms", 0.0) << "\n";
                rows.push_back(to_json(r));
            }
        }
    }
    json doc{{"command", "verify"}, {"config", cfg.to_json()}, {"results", rows},
             {"all_pass", all_pass}};
    emit(cfg, "verify", doc, csv.str());
    return all_pass ? 0 : 1;
}

int cmd_scan(const RunConfig& cfg) {
    RotationParams P(cfg.a);
    int N = std::max(cfg.N, cfg.n_max + 2);
    LayerSystem sys(P, N + 1);
    std::vector<int> levels;
    for (int n = cfg.n_min; n <= cfg.n_max; ++n) levels.push_back(n);
    SeparationCertificate cert = separation_certificate(sys, N, levels, cfg.samples, cfg.seed,
                                                        Int(cfg.search_depth));
    std::ostringstream csv;
    csv << "pair,level,separated,q,m,margin_q,margin_mq,achieved\n";
    for (size_t k = 0; k < cert.pair_reports.size(); ++k) {
        const json& r = cert.pair_reports[k];
        csv << k << "," << r.at("level").get<int>() << ","
            << (r.at("separated").get<bool>() ? 1 : 0) << ","
            << r.at("q").get<std::string>() << "," << r.at("m").get<std::string>() << ","
            << r.at("margin_q").at("dec").get<std::string>() << ","
            << r.at("margin_mq").at("dec").get<std::string>() << ","
            << r.at("achieved").at("dec").get<std::string>() << "\n";
    }
    json doc{{"command", "scan"}, {"config", cfg.to_json()}, {"certificate", to_json(cert)}};
    emit(cfg, "scan", doc, csv.str());
    return cert.all_separated ? 0 : 1;
}

int cmd_probe(const RunConfig& cfg) {
    RotationParams P(cfg.a);
    int N = std::max(cfg.N, cfg.n_max + 2);
    LayerSystem sys(P, N + 1);
    RoofFunction roof = RoofFunction::from_stack(sys, N);
    SuspensionFlow flow(roof);
    ProbeOptions opt;
    opt.epsilon = rat_from_string(cfg.eps);
    opt.seed = cfg.seed;
    opt.section_pairs_per_level = std::max(1, cfg.samples / 4);
    opt.random_pairs = std::max(1, cfg.samples / 2);
    opt.orbit_pairs = std::max(1, cfg.samples / 4);
    opt.search_depth = Int(cfg.search_depth);
    for (int n = cfg.n_min; n <= cfg.n_max; ++n)
        if (n > 2) opt.window_levels.push_back(n);
    ProbeResult pr = expansiveness_probe(flow, opt);
    std::ostringstream csv;
    csv << "pair,kind,separated,distance_decimal\n";
    for (size_t k = 0; k < pr.rows.size(); ++k) {
        const json& r = pr.rows[k];
        std::string dist = r.contains("distance") ? r.at("distance").at("dec").get<std::string>()
                         : r.contains("max_distance")
                             ? r.at("max_distance").at("dec").get<std::string>()
                             : "";
        csv << k << "," << r.at("kind").get<std::string>() << ","
            << (r.value("separated", false) ? 1 : 0) << "," << dist << "\n";
    }
    json doc{{"command", "probe"}, {"config", cfg.to_json()}, {"probe", to_json(pr)}};
    emit(cfg, "probe", doc, csv.str());
    bool ok = pr.section_pairs_separated == pr.section_pairs && quad_sign(pr.delta) > 0;
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exact rotation suspensions: towers, return-time series, certified checks"};
    app.require_subcommand(1);

    RunConfig cfg;
    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; flags override its keys");

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--a", cfg.a, "positive partial quotient of the rotation number");
        sub->add_option("--N", cfg.N, "truncation level of the return-time series");
        sub->add_option("--n-min", cfg.n_min, "lowest context level");
        sub->add_option("--n-max", cfg.n_max, "highest context level");
        sub->add_option("--samples", cfg.samples, "sample count (pairs, grid resolution)");
        sub->add_option("--seed", cfg.seed, "RNG seed, recorded in outputs");
        sub->add_option("--naive-cap", cfg.naive_cap, "largest iterate count for literal sums");
        sub->add_option("--enum-cap", cfg.enum_cap, "largest enumeration (floors, breakpoints)");
        sub->add_option("--eps", cfg.eps, "closeness scale for the probe (rational)");
        sub->add_option("--search-depth", cfg.search_depth, "largest transport step count");
        sub->add_option("--out", cfg.out_dir, "output directory (stdout when omitted)");
        sub->add_option("--format", cfg.format, "stdout format: json or csv")
            ->check(CLI::IsMember({"json", "csv"}));
    };

    int tower_n = 1;
    CLI::App* c_conv = app.add_subcommand("convergents", "denominator/numerator table");
    CLI::App* c_tower = app.add_subcommand("tower", "level-n partition with exact identity");
    c_tower->add_option("--n", tower_n, "tower level");
    CLI::App* c_build = app.add_subcommand("build", "materialize layers and truncated series");
    CLI::App* c_verify = app.add_subcommand("verify", "run the certified estimate checks");
    CLI::App* c_scan = app.add_subcommand("scan", "separation certificate over a pair grid");
    CLI::App* c_probe = app.add_subcommand("probe", "suspension-flow separation probe");
    for (CLI::App* sub : {c_conv, c_tower, c_build, c_verify, c_scan, c_probe}) add_common(sub);

    try {
        app.parse(argc, argv);
        if (!config_path.empty()) {
            RunConfig file_cfg;
            apply_config_file(config_path, file_cfg);
            // re-parse so explicit flags override config values
            cfg = file_cfg;
            app.clear();
            app.parse(argc, argv);
        }
        if (cfg.a <= 0) throw CLI::ValidationError("--a", "must be a positive integer");

        if (app.got_subcommand(c_conv)) return cmd_convergents(cfg);
        if (app.got_subcommand(c_tower)) return cmd_tower(cfg, tower_n);
        if (app.got_subcommand(c_build)) return cmd_build(cfg);
        if (app.got_subcommand(c_verify)) return cmd_verify(cfg);
        if (app.got_subcommand(c_scan)) return cmd_scan(cfg);
        if (app.got_subcommand(c_probe)) return cmd_probe(cfg);
        return 2;
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const guard_error& e) {
        std::cerr << "refused: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
