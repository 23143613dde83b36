// churnforge: command-line front end for the dropout-analysis pipeline.
//
// Exit codes: 0 success, 1 data/runtime error, 2 usage/config error.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "churnforge/analysis.hpp"
#include "churnforge/errors.hpp"
#include "churnforge/eval.hpp"
#include "churnforge/ingest.hpp"
#include "churnforge/label.hpp"
#include "churnforge/model.hpp"
#include "churnforge/network.hpp"
#include "churnforge/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace churnforge;

namespace {

constexpr std::uint64_t kDefaultSeed = 1;
constexpr Timestamp kDefaultPsi = 90LL * 86400; // 90 days, in seconds

class Timer {
public:
    double ms() const {
        return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_ = Clock::now();
};

struct CommonOpts {
    std::optional<std::uint64_t> seed;
    std::string format; // "", "csv" or "jsonl"
    std::string out_dir = ".";
    bool quiet = false;
};

void add_common(CLI::App* sub, CommonOpts& c) {
    sub->add_option("--seed", c.seed, "RNG seed (falls back to env CHURNFORGE_SEED, then 1)");
    sub->add_option("--format", c.format, "event file format; default is inferred from extensions")
        ->check(CLI::IsMember({"csv", "jsonl"}));
    sub->add_option("--out-dir", c.out_dir, "directory for outputs and the run manifest")
        ->capture_default_str();
    sub->add_flag("--quiet", c.quiet, "suppress console summaries");
}

struct LabelOpts {
    double cut_ratio = 2.0 / 3.0;
    Timestamp psi = kDefaultPsi;
    std::string mode = "window";
};

void add_label_opts(CLI::App* sub, LabelOpts& l) {
    sub->add_option("--cut-ratio", l.cut_ratio,
                    "train fraction of the chronological task split (window mode)")
        ->capture_default_str();
    sub->add_option("--psi", l.psi, "inter-arrival dropout threshold in seconds (threshold modes)")
        ->capture_default_str();
    sub->add_option("--label-mode", l.mode,
                    "dropout rule: window (post-cut silence), last-gap, or absence")
        ->capture_default_str()
        ->check(CLI::IsMember({"window", "last-gap", "absence"}));
}

std::uint64_t env_seed_or(std::uint64_t fallback) {
    const char* env = std::getenv("CHURNFORGE_SEED");
    if (env == nullptr || *env == '\0') return fallback;
    try {
        std::size_t used = 0;
        const std::string text(env);
        const unsigned long long parsed = std::stoull(text, &used);
        if (used == text.size()) return parsed;
    } catch (const std::exception&) {
    }
    throw ConfigError("CHURNFORGE_SEED must be a non-negative integer");
}

std::uint64_t resolve_seed(const CommonOpts& c) {
    return c.seed ? *c.seed : env_seed_or(kDefaultSeed);
}

std::optional<ingest::LogFormat> forced_format(const CommonOpts& c) {
    if (c.format.empty()) return std::nullopt;
    return ingest::format_from_name(c.format);
}

// All file outputs go through write-temp-then-rename.
template <typename WriteFn>
void atomic_write(const fs::path& path, WriteFn&& write_fn) {
    if (const fs::path dir = path.parent_path(); !dir.empty()) fs::create_directories(dir);
    fs::path tmp = path;
    tmp += ".tmp";
    write_fn(tmp);
    fs::rename(tmp, path);
}

void write_text_file(const fs::path& path, const std::string& text) {
    atomic_write(path, [&](const fs::path& tmp) {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw IoError("cannot open '" + tmp.string() + "' for writing");
        out << text;
        if (!out) throw IoError("failed writing '" + tmp.string() + "'");
    });
}

void write_manifest(const fs::path& out_dir, const std::string& subcommand, json parameters,
                    std::vector<std::string> inputs, std::vector<std::string> outputs,
                    std::optional<std::uint64_t> seed, double duration_ms) {
    json manifest;
    manifest["subcommand"] = subcommand;
    manifest["tool_version"] = CHURNFORGE_VERSION;
    manifest["parameters"] = std::move(parameters);
    manifest["inputs"] = std::move(inputs);
    manifest["outputs"] = std::move(outputs);
    manifest["seed"] = seed ? json(*seed) : json(nullptr);
    manifest["duration_ms"] = duration_ms;
    write_text_file(out_dir / (subcommand + "_manifest.json"), manifest.dump(2) + "\n");
}

std::string fixed4(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", value);
    return buf;
}

EventLog load_log(const fs::path& path, std::optional<ingest::LogFormat> forced, bool quiet) {
    const ingest::LogFormat fmt = ingest::infer_format(path, forced);
    auto [events, report] = ingest::read_events_file(path, fmt);
    EventLog log = ingest::finalize_log(std::move(events), std::nullopt, &report);
    if (!quiet && report.events_rejected() > 0) {
        std::cerr << "warning: " << report.events_rejected()
                  << " records skipped or collapsed while reading " << path << "\n";
    }
    return log;
}

std::vector<label::LabeledWorker> label_from_log(const EventLog& log, const LabelOpts& l,
                                                 json& parameters) {
    parameters["label_mode"] = l.mode;
    if (l.mode == "window") {
        parameters["cut_ratio"] = l.cut_ratio;
        const Timestamp cut = label::split_cut_time(log, l.cut_ratio);
        parameters["cut_time"] = cut;
        return label::label_dataset(log, cut);
    }
    parameters["psi"] = l.psi;
    const LabelRule rule = l.mode == "last-gap" ? LabelRule::threshold_last_gap(l.psi)
                                                : LabelRule::threshold_absence(l.psi);
    return label::label_dataset(log, rule);
}

std::pair<std::size_t, std::size_t> entity_counts(const EventLog& log) {
    std::unordered_set<std::string_view> workers, tasks;
    for (const ArrivalEvent& e : log.events()) {
        workers.insert(e.worker_id);
        tasks.insert(e.task_id);
    }
    return {workers.size(), tasks.size()};
}

// ---------------------------------------------------------------- simulate

struct SimulateOpts {
    CommonOpts common;
    std::string out;
    std::string config_file;
    std::optional<std::int64_t> n_workers, n_tasks, horizon_days;
    std::optional<double> task_rate, join_spread, skill_alpha, skill_beta, participation_prob,
        streak_hazard, base_hazard;
};

int run_simulate(const SimulateOpts& o) {
    const Timer timer;
    synth::MarketConfig cfg = synth::default_config(env_seed_or(kDefaultSeed));
    if (!o.config_file.empty()) cfg = synth::read_config_file(o.config_file, cfg);
    // Explicit flags beat the config file, which beats the defaults.
    if (o.common.seed) cfg.seed = *o.common.seed;
    if (o.n_workers) cfg.n_workers = *o.n_workers;
    if (o.n_tasks) cfg.n_tasks = *o.n_tasks;
    if (o.horizon_days) cfg.horizon_days = *o.horizon_days;
    if (o.task_rate) cfg.task_rate = *o.task_rate;
    if (o.join_spread) cfg.worker_join_spread = *o.join_spread;
    if (o.skill_alpha) cfg.skill_alpha = *o.skill_alpha;
    if (o.skill_beta) cfg.skill_beta = *o.skill_beta;
    if (o.participation_prob) cfg.base_participation_prob = *o.participation_prob;
    if (o.streak_hazard) cfg.streak_hazard = *o.streak_hazard;
    if (o.base_hazard) cfg.base_hazard = *o.base_hazard;

    const EventLog log = synth::generate_market(cfg);

    const fs::path out_dir = o.common.out_dir;
    const std::optional<ingest::LogFormat> forced = forced_format(o.common);
    fs::path out_path = o.out.empty()
                            ? out_dir / (forced == ingest::LogFormat::Jsonl ? "events.jsonl"
                                                                            : "events.csv")
                            : fs::path(o.out);
    const ingest::LogFormat fmt = ingest::infer_format(out_path, forced);
    atomic_write(out_path,
                 [&](const fs::path& tmp) { ingest::write_events_file(tmp, log.events(), fmt); });

    const auto [n_workers_seen, n_tasks_seen] = entity_counts(log);
    json parameters{{"n_workers", cfg.n_workers},
                    {"n_tasks", cfg.n_tasks},
                    {"horizon_days", cfg.horizon_days},
                    {"task_rate", cfg.task_rate},
                    {"worker_join_spread", cfg.worker_join_spread},
                    {"skill_alpha", cfg.skill_alpha},
                    {"skill_beta", cfg.skill_beta},
                    {"base_participation_prob", cfg.base_participation_prob},
                    {"streak_hazard", cfg.streak_hazard},
                    {"base_hazard", cfg.base_hazard},
                    {"format", std::string(ingest::format_name(fmt))}};
    std::vector<std::string> inputs;
    if (!o.config_file.empty()) inputs.push_back(o.config_file);
    write_manifest(out_dir, "simulate", std::move(parameters), std::move(inputs),
                   {out_path.string()}, cfg.seed, timer.ms());

    if (!o.common.quiet) {
        std::cout << "simulate: " << log.events().size() << " events, " << n_workers_seen
                  << " workers, " << n_tasks_seen << " filled tasks -> " << out_path.string()
                  << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ ingest

struct IngestOpts {
    CommonOpts common;
    std::string events;
    std::string out;
};

int run_ingest(const IngestOpts& o) {
    const Timer timer;
    const fs::path in_path = o.events;
    const std::optional<ingest::LogFormat> forced = forced_format(o.common);
    const ingest::LogFormat fmt_in = ingest::infer_format(in_path, forced);
    auto [events, report] = ingest::read_events_file(in_path, fmt_in);
    const EventLog log = ingest::finalize_log(std::move(events), std::nullopt, &report);

    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        const fs::path out_path = o.out;
        const ingest::LogFormat fmt_out = ingest::infer_format(out_path, forced);
        atomic_write(out_path, [&](const fs::path& tmp) {
            ingest::write_events_file(tmp, log.events(), fmt_out);
        });
        outputs.push_back(out_path.string());
    }

    if (!o.common.quiet) {
        const auto [n_workers, n_tasks] = entity_counts(log);
        std::cout << "ingest: " << log.events().size() << " events accepted, "
                  << report.events_rejected() << " records skipped or collapsed\n"
                  << "  workers " << n_workers << ", tasks " << n_tasks << ", horizon ["
                  << log.horizon_start() << ", " << log.horizon_end() << "]\n";
        constexpr std::size_t kMaxShown = 10;
        for (std::size_t i = 0; i < report.rejections.size() && i < kMaxShown; ++i) {
            const auto& [line, reason] = report.rejections[i];
            std::cout << "  skipped";
            if (line > 0) std::cout << " line " << line;
            std::cout << ": " << reason << "\n";
        }
        if (report.rejections.size() > kMaxShown) {
            std::cout << "  ... " << (report.rejections.size() - kMaxShown) << " more\n";
        }
    }

    json parameters{{"events", in_path.string()},
                    {"format", std::string(ingest::format_name(fmt_in))},
                    {"events_accepted", log.events().size()},
                    {"events_skipped", report.events_rejected()}};
    write_manifest(o.common.out_dir, "ingest", std::move(parameters), {in_path.string()},
                   std::move(outputs), std::nullopt, timer.ms());
    return 0;
}

// ----------------------------------------------------------------- analyze

struct AnalyzeOpts {
    CommonOpts common;
    std::string events;
    std::string from_bins;
    LabelOpts label_opts;
};

json correlation_json(const analysis::CorrelationResult& r) {
    return json{{"rho", r.rho}, {"n_points", r.n_points}};
}

int run_analyze(const AnalyzeOpts& o) {
    const Timer timer;
    const fs::path out_dir = o.common.out_dir;

    if (!o.from_bins.empty()) {
        const BinTable table = analysis::read_bin_table_file(o.from_bins);
        const auto excl = analysis::bin_dropout_correlation(table, true);
        const auto incl = analysis::bin_dropout_correlation(table, false);
        const json correlations{{"bins_excl_top", correlation_json(excl)},
                                {"bins_incl_top", correlation_json(incl)}};
        write_text_file(out_dir / "correlations.json", correlations.dump(2) + "\n");
        if (!o.common.quiet) {
            std::cout << analysis::render_bin_table(table) << "bin dropout correlation: "
                      << fixed4(excl.rho) << " over " << excl.n_points
                      << " bins (top bin excluded), " << fixed4(incl.rho) << " over "
                      << incl.n_points << " bins (included)\n";
        }
        write_manifest(out_dir, "analyze", json{{"from_bins", o.from_bins}}, {o.from_bins},
                       {(out_dir / "correlations.json").string()}, std::nullopt, timer.ms());
        return 0;
    }
    if (o.events.empty()) throw ConfigError("analyze needs --events or --from-bins");

    const EventLog log = load_log(o.events, forced_format(o.common), o.common.quiet);
    const auto features_all = network::worker_features(network::build_networks(log));
    const fs::path features_path = out_dir / "features.csv";
    atomic_write(features_path, [&](const fs::path& tmp) {
        network::write_features_file(tmp.string(), features_all);
    });

    json parameters{{"events", o.events}};
    const auto labeled = label_from_log(log, o.label_opts, parameters);
    const fs::path labels_path = out_dir / "labels.csv";
    atomic_write(labels_path,
                 [&](const fs::path& tmp) { label::write_labels_file(tmp.string(), labeled); });

    std::vector<WorkerFeatures> dropout_features;
    for (const label::LabeledWorker& w : labeled) {
        if (w.label == DropoutLabel::Dropout) dropout_features.push_back(w.features);
    }
    const BinTable bins = analysis::bin_success_rates(dropout_features);
    const fs::path bins_path = out_dir / "bins.csv";
    atomic_write(bins_path,
                 [&](const fs::path& tmp) { analysis::write_bin_table_file(tmp.string(), bins); });
    const fs::path bins_text_path = out_dir / "bins.txt";
    write_text_file(bins_text_path, analysis::render_bin_table(bins));

    const auto degree = analysis::degree_correlation(features_all);
    const auto excl = analysis::bin_dropout_correlation(bins, true);
    const auto incl = analysis::bin_dropout_correlation(bins, false);
    const json correlations{{"degree", correlation_json(degree)},
                            {"bins_excl_top", correlation_json(excl)},
                            {"bins_incl_top", correlation_json(incl)}};
    const fs::path correlations_path = out_dir / "correlations.json";
    write_text_file(correlations_path, correlations.dump(2) + "\n");

    if (!o.common.quiet) {
        std::cout << "analyze: " << labeled.size() << " labeled workers, "
                  << dropout_features.size() << " dropouts\n"
                  << analysis::render_bin_table(bins) << "degree correlation: "
                  << fixed4(degree.rho) << " over " << degree.n_points << " workers\n"
                  << "bin dropout correlation: " << fixed4(excl.rho) << " over " << excl.n_points
                  << " bins (top bin excluded), " << fixed4(incl.rho) << " over " << incl.n_points
                  << " bins (included)\n";
    }

    write_manifest(out_dir, "analyze", std::move(parameters), {o.events},
                   {features_path.string(), labels_path.string(), bins_path.string(),
                    bins_text_path.string(), correlations_path.string()},
                   std::nullopt, timer.ms());
    return 0;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateOpts {
    CommonOpts common;
    std::string events;
    std::string labels;
    std::vector<int> ratios{10, 20, 30, 40, 50, 60, 70, 80, 90};
    LabelOpts label_opts;
};

int run_evaluate(const EvaluateOpts& o) {
    const Timer timer;
    if (o.events.empty() == o.labels.empty()) {
        throw ConfigError("evaluate needs exactly one of --events or --labels");
    }
    const fs::path out_dir = o.common.out_dir;

    json parameters;
    std::vector<std::string> inputs;
    std::vector<label::LabeledWorker> labeled;
    if (!o.labels.empty()) {
        labeled = label::read_labels_file(o.labels);
        parameters["labels"] = o.labels;
        inputs.push_back(o.labels);
    } else {
        const EventLog log = load_log(o.events, forced_format(o.common), o.common.quiet);
        parameters["events"] = o.events;
        labeled = label_from_log(log, o.label_opts, parameters);
        inputs.push_back(o.events);
    }
    parameters["ratios"] = o.ratios;

    const std::uint64_t seed = resolve_seed(o.common);
    const std::vector<eval::SweepRow> rows = eval::split_sweep(labeled, o.ratios, seed);

    const fs::path sweep_path = out_dir / "sweep.csv";
    atomic_write(sweep_path,
                 [&](const fs::path& tmp) { eval::write_sweep_file(tmp.string(), rows); });
    const fs::path sweep_text_path = out_dir / "sweep.txt";
    write_text_file(sweep_text_path, eval::render_sweep(rows));

    if (!o.common.quiet) {
        std::cout << "evaluate: " << labeled.size() << " labeled workers, seed " << seed << "\n"
                  << eval::render_sweep(rows);
    }
    write_manifest(out_dir, "evaluate", std::move(parameters), std::move(inputs),
                   {sweep_path.string(), sweep_text_path.string()}, seed, timer.ms());
    return 0;
}

// ------------------------------------------------------------------ report

struct ReportOpts {
    CommonOpts common;
    std::string bins;
    std::string sweep;
    std::string out;
};

int run_report(const ReportOpts& o) {
    const Timer timer;
    if (o.bins.empty() && o.sweep.empty()) {
        throw ConfigError("report needs --bins and/or --sweep");
    }
    std::string text;
    std::vector<std::string> inputs;
    if (!o.bins.empty()) {
        const BinTable table = analysis::read_bin_table_file(o.bins);
        std::ostringstream section;
        section << "Dropouts by success rate\n"
                << analysis::render_bin_table(table) << "total dropouts: "
                << table.total_dropouts() << "\n";
        text += section.str();
        inputs.push_back(o.bins);
    }
    if (!o.sweep.empty()) {
        if (!text.empty()) text += "\n";
        text += "Classifier accuracy by train-test split (%)\n" +
                eval::render_sweep(eval::read_sweep_file(o.sweep));
        inputs.push_back(o.sweep);
    }

    std::vector<std::string> outputs;
    if (!o.out.empty()) {
        write_text_file(o.out, text);
        outputs.push_back(o.out);
    }
    if (!o.common.quiet) std::cout << text;
    write_manifest(o.common.out_dir, "report",
                   json{{"bins", o.bins}, {"sweep", o.sweep}, {"out", o.out}}, std::move(inputs),
                   std::move(outputs), std::nullopt, timer.ms());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"churnforge: dropout analysis for crowdsourcing contest markets"};
    app.require_subcommand(1);
    app.set_version_flag("--version", CHURNFORGE_VERSION);

    SimulateOpts sim;
    IngestOpts ing;
    AnalyzeOpts ana;
    EvaluateOpts eva;
    ReportOpts rep;

    CLI::App* sim_cmd = app.add_subcommand("simulate", "generate a synthetic market event log");
    add_common(sim_cmd, sim.common);
    sim_cmd->add_option("--out", sim.out, "events file to write (default <out-dir>/events.csv)");
    sim_cmd->add_option("--config", sim.config_file, "key=value market config file");
    sim_cmd->add_option("--n-workers", sim.n_workers, "worker count (default 1000)");
    sim_cmd->add_option("--n-tasks", sim.n_tasks, "task arrival cap (default 13000)");
    sim_cmd->add_option("--horizon-days", sim.horizon_days, "market horizon in days (default 600)");
    sim_cmd->add_option("--task-rate", sim.task_rate, "mean task arrivals per day (default 22)");
    sim_cmd->add_option("--join-spread", sim.join_spread,
                        "fraction of the horizon over which workers join (default 0.35)");
    sim_cmd->add_option("--skill-alpha", sim.skill_alpha, "skill Beta shape alpha (default 1.2)");
    sim_cmd->add_option("--skill-beta", sim.skill_beta, "skill Beta shape beta (default 3.0)");
    sim_cmd->add_option("--participation-prob", sim.participation_prob,
                        "per-task entry chance of a live worker (default 0.01)");
    sim_cmd->add_option("--streak-hazard", sim.streak_hazard,
                        "added exit hazard per consecutive loss (default 0.004)");
    sim_cmd->add_option("--base-hazard", sim.base_hazard,
                        "exit hazard after any participation (default 0.002)");

    CLI::App* ing_cmd = app.add_subcommand("ingest", "validate and normalize an event log");
    add_common(ing_cmd, ing.common);
    ing_cmd->add_option("--events", ing.events, "input events file")->required();
    ing_cmd->add_option("--out", ing.out, "write the normalized log here");

    CLI::App* ana_cmd =
        app.add_subcommand("analyze", "features, labels, success-rate bins, and correlations");
    add_common(ana_cmd, ana.common);
    add_label_opts(ana_cmd, ana.label_opts);
    CLI::Option* ana_events = ana_cmd->add_option("--events", ana.events, "input events file");
    ana_cmd->add_option("--from-bins", ana.from_bins,
                        "pre-binned dropout table CSV; skips the event pipeline")
        ->excludes(ana_events);

    CLI::App* eva_cmd =
        app.add_subcommand("evaluate", "split-ratio accuracy sweep of the classifiers");
    add_common(eva_cmd, eva.common);
    add_label_opts(eva_cmd, eva.label_opts);
    CLI::Option* eva_events = eva_cmd->add_option("--events", eva.events, "input events file");
    eva_cmd->add_option("--labels", eva.labels, "labeled-workers CSV (as written by analyze)")
        ->excludes(eva_events);
    eva_cmd->add_option("--ratios", eva.ratios, "train percentages to sweep")
        ->delimiter(',')
        ->capture_default_str();

    CLI::App* rep_cmd =
        app.add_subcommand("report", "render saved bin/sweep CSV artifacts as aligned text");
    add_common(rep_cmd, rep.common);
    rep_cmd->add_option("--bins", rep.bins, "bin table CSV (as written by analyze)");
    rep_cmd->add_option("--sweep", rep.sweep, "sweep CSV (as written by evaluate)");
    rep_cmd->add_option("--out", rep.out, "also write the rendered text here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (sim_cmd->parsed()) return run_simulate(sim);
        if (ing_cmd->parsed()) return run_ingest(ing);
        if (ana_cmd->parsed()) return run_analyze(ana);
        if (eva_cmd->parsed()) return run_evaluate(eva);
        if (rep_cmd->parsed()) return run_report(rep);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
